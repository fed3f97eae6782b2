//! CSV rendering shared by the library and the command-line driver.
//!
//! Dialect: comma-separated, `#`-prefixed comment lines before the header,
//! LF line endings, numbers in `{:.16e}` (17 significant digits, lossless
//! for `f64`).

use std::fmt::Write as _;

use crate::mesh::ShishkinMesh;
use crate::solver::{DecomposedSolution, SolutionGrid};

pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn mesh_csv(mesh: &ShishkinMesh) -> String {
    let sigmas: Vec<String> = mesh.sigmas().iter().map(|s| fmt_num(*s)).collect();
    let mut out = String::new();
    let _ = writeln!(out, "# N={}", mesh.intervals());
    let _ = writeln!(out, "# sigmas={}", sigmas.join(";"));
    let _ = writeln!(out, "# b={}", mesh.class_label());
    out.push_str("j,t_j,delta_j\n");
    for (j, t) in mesh.points().iter().enumerate() {
        let delta = if j == 0 { String::new() } else { fmt_num(mesh.delta(j)) };
        let _ = writeln!(out, "{j},{},{delta}", fmt_num(*t));
    }
    out
}

/// Columns `j, t_j, U_1 … U_n`, followed by `V_i` and `W_i` when a
/// decomposition on the same mesh is supplied.
pub fn solution_csv(grid: &SolutionGrid, parts: Option<&DecomposedSolution>, comments: &[String]) -> String {
    let n = grid.n();
    let mut out = String::new();
    let _ = writeln!(out, "# N={}", grid.intervals());
    let _ = writeln!(out, "# b={}", grid.mesh().class_label());
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let mut header = vec!["j".to_string(), "t_j".to_string()];
    header.extend((1..=n).map(|i| format!("U_{i}")));
    if parts.is_some() {
        header.extend((1..=n).map(|i| format!("V_{i}")));
        header.extend((1..=n).map(|i| format!("W_{i}")));
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (j, t) in grid.mesh().points().iter().enumerate() {
        let mut fields = vec![j.to_string(), fmt_num(*t)];
        fields.extend(grid.at(j).iter().map(|v| fmt_num(*v)));
        if let Some(d) = parts {
            fields.extend(d.smooth.at(j).iter().map(|v| fmt_num(*v)));
            fields.extend(d.singular.at(j).iter().map(|v| fmt_num(*v)));
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// A CSV table read back: column names and numeric columns (empty cells are NaN).
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut comments = Vec::new();
        let mut lines = text.lines().filter(|l| !l.is_empty());
        let header = loop {
            match lines.next() {
                Some(l) if l.starts_with('#') => comments.push(l.trim_start_matches('#').trim().to_string()),
                Some(l) => break l.split(',').map(str::to_string).collect::<Vec<_>>(),
                None => return Err("missing header".into()),
            }
        };
        let mut columns = vec![Vec::new(); header.len()];
        for (k, line) in lines.enumerate() {
            if line.starts_with('#') {
                break;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(format!("row {}: {} cells, expected {}", k + 1, cells.len(), header.len()));
            }
            for (col, cell) in columns.iter_mut().zip(cells) {
                let v = if cell.is_empty() {
                    f64::NAN
                } else {
                    cell.parse::<f64>().map_err(|e| format!("row {}: {cell:?}: {e}", k + 1))?
                };
                col.push(v);
            }
        }
        Ok(Self { comments, header, columns })
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header.iter().position(|h| h == name).map(|k| self.columns[k].as_slice())
    }
}
