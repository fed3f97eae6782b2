//! Piecewise-uniform Shishkin meshes for `n` initial layers.
//!
//! `[0, T]` is split at transition points `0 < σ_1 < … < σ_n ≤ T/2`:
//!
//! ```text
//! σ_n = min{ T/2,       (ε_n/α) ln N }
//! σ_i = min{ σ_{i+1}/2, (ε_i/α) ln N },   i = n-1, …, 1
//! ```
//!
//! `[0, σ_1]` gets `N/2ⁿ` intervals, `(σ_i, σ_{i+1}]` gets `N/2^{n-i+1}`,
//! and `(σ_n, T]` gets the remaining `N/2`. Bit `b_i` is 0 when the first
//! branch of the minimum is taken (ties included) and 1 otherwise.

use serde::Serialize;
use thiserror::Error;

use crate::problem::{PerturbationVector, ValidatedProblem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error(
        "N = {intervals} is not divisible by 2^{n} = {modulus}; use N = 2^{n}*k with k a positive power of 2 (e.g. N = {suggestion})"
    )]
    NotDivisible { n: usize, intervals: usize, modulus: usize, suggestion: usize },
    #[error("alpha = {0} must be positive and finite")]
    BadAlpha(f64),
    #[error("horizon T = {0} must be positive and finite")]
    BadHorizon(f64),
    #[error("system size {0} is too large for a 2^n-divisible mesh")]
    TooManyLayers(usize),
    #[error("meshes are not nested: coarse point t[{index}] = {coarse} has no match (fine has {fine})")]
    NotNested { index: usize, coarse: f64, fine: f64 },
    #[error("mesh sizes incompatible for bisection: coarse N = {coarse}, fine N = {fine}")]
    NotBisection { coarse: usize, fine: usize },
}

/// Transition points and the mesh-class bits they select.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionPoints {
    pub sigmas: Vec<f64>,
    /// `false` ↔ `b_i = 0` (halving branch), `true` ↔ `b_i = 1` (layer branch).
    pub bits: Vec<bool>,
}

/// Number of mesh intervals on each of the `n + 1` pieces.
pub fn interval_counts(n: usize, intervals: usize) -> Vec<usize> {
    let mut counts = Vec::with_capacity(n + 1);
    counts.push(intervals >> n);
    for i in 1..n {
        counts.push(intervals >> (n - i + 1));
    }
    counts.push(intervals / 2);
    counts
}

fn check_divisible(n: usize, intervals: usize) -> Result<(), MeshError> {
    if n >= usize::BITS as usize - 2 {
        return Err(MeshError::TooManyLayers(n));
    }
    let modulus = 1usize << n;
    if intervals == 0 || intervals % modulus != 0 {
        let k = (intervals / modulus).max(1).next_power_of_two();
        return Err(MeshError::NotDivisible { n, intervals, modulus, suggestion: modulus * k });
    }
    Ok(())
}

pub fn transition_points(
    eps: &PerturbationVector,
    alpha: f64,
    horizon: f64,
    intervals: usize,
) -> Result<TransitionPoints, MeshError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(MeshError::BadAlpha(alpha));
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(MeshError::BadHorizon(horizon));
    }
    let n = eps.len();
    check_divisible(n, intervals)?;
    let ln_n = (intervals as f64).ln();
    let mut sigmas = vec![0.0; n];
    let mut bits = vec![false; n];
    let mut upper = horizon;
    for i in (0..n).rev() {
        let halved = upper / 2.0;
        let layer = eps[i] / alpha * ln_n;
        if halved <= layer {
            sigmas[i] = halved;
        } else {
            sigmas[i] = layer;
            bits[i] = true;
        }
        upper = sigmas[i];
    }
    Ok(TransitionPoints { sigmas, bits })
}

/// A piecewise-uniform mesh `0 = t_0 < … < t_N = T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShishkinMesh {
    points: Vec<f64>,
    deltas: Vec<f64>,
    sigmas: Vec<f64>,
    bits: Vec<bool>,
    counts: Vec<usize>,
}

impl ShishkinMesh {
    pub fn build(vp: &ValidatedProblem, intervals: usize) -> Result<Self, MeshError> {
        Self::for_parameters(vp.eps(), vp.alpha(), vp.horizon(), intervals)
    }

    pub fn for_parameters(
        eps: &PerturbationVector,
        alpha: f64,
        horizon: f64,
        intervals: usize,
    ) -> Result<Self, MeshError> {
        let tp = transition_points(eps, alpha, horizon, intervals)?;
        let counts = interval_counts(eps.len(), intervals);
        debug_assert_eq!(counts.iter().sum::<usize>(), intervals);
        Ok(Self::assemble(horizon, tp.sigmas, tp.bits, counts))
    }

    fn assemble(horizon: f64, sigmas: Vec<f64>, bits: Vec<bool>, counts: Vec<usize>) -> Self {
        let total: usize = counts.iter().sum();
        let mut points = Vec::with_capacity(total + 1);
        points.push(0.0);
        let mut start = 0.0;
        for (piece, &count) in counts.iter().enumerate() {
            let end = sigmas.get(piece).copied().unwrap_or(horizon);
            let width = (end - start) / count as f64;
            for k in 1..count {
                points.push(start + k as f64 * width);
            }
            points.push(end);
            start = end;
        }
        let deltas = points.windows(2).map(|w| w[1] - w[0]).collect();
        Self { points, deltas, sigmas, bits, counts }
    }

    /// Mesh with the same transition points and every interval halved.
    pub fn bisect(&self) -> Self {
        let counts = self.counts.iter().map(|c| 2 * c).collect();
        Self::assemble(self.horizon(), self.sigmas.clone(), self.bits.clone(), counts)
    }

    pub fn intervals(&self) -> usize {
        self.deltas.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// `δ_j = t_j − t_{j−1}`; entry `j − 1` holds `δ_j`.
    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn delta(&self, j: usize) -> f64 {
        self.deltas[j - 1]
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn horizon(&self) -> f64 {
        *self.points.last().expect("mesh has points")
    }

    /// Bits rendered as a string of 0/1, `b_1` first.
    pub fn class_label(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Checks that every point of `self` appears at the even-indexed points of
    /// `fine` to a relative tolerance of `1e-12`.
    pub fn check_nested_in(&self, fine: &ShishkinMesh) -> Result<(), MeshError> {
        if fine.intervals() != 2 * self.intervals() {
            return Err(MeshError::NotBisection { coarse: self.intervals(), fine: fine.intervals() });
        }
        for (j, &t) in self.points.iter().enumerate() {
            let tf = fine.points[2 * j];
            if (t - tf).abs() > 1e-12 * t.abs() {
                return Err(MeshError::NotNested { index: j, coarse: t, fine: tf });
            }
        }
        Ok(())
    }

    /// Checks the structural guarantees of a Shishkin mesh built from
    /// `(eps, alpha)`; returns a description of every violated one.
    pub fn invariant_violations(&self, eps: &PerturbationVector, alpha: f64) -> Vec<String> {
        let mut out = Vec::new();
        let n = eps.len();
        let big_n = self.intervals();
        let horizon = self.horizon();
        let counts = interval_counts(n, big_n);
        if counts.iter().sum::<usize>() != big_n {
            out.push(format!("interval counts {counts:?} do not sum to {big_n}"));
        }
        if counts != self.counts {
            out.push(format!("piece counts {:?} differ from {counts:?}", self.counts));
        }
        if self.points[0] != 0.0 {
            out.push(format!("t_0 = {} != 0", self.points[0]));
        }
        if let Some(j) = self.deltas.iter().position(|&d| d <= 0.0) {
            out.push(format!("points not strictly increasing at j = {}", j + 1));
        }
        if self.sigmas[0] <= 0.0 {
            out.push("sigma_1 <= 0".into());
        }
        for i in 1..n {
            if self.sigmas[i - 1] >= self.sigmas[i] {
                out.push(format!("sigma_{} >= sigma_{}", i, i + 1));
            }
        }
        if self.sigmas[n - 1] > horizon / 2.0 {
            out.push(format!("sigma_n = {} > T/2", self.sigmas[n - 1]));
        }
        let dmax = 2.0 * horizon / big_n as f64;
        if let Some((j, d)) = self.deltas.iter().enumerate().find(|(_, &d)| d > dmax * (1.0 + 1e-12)) {
            out.push(format!("delta_{} = {d} > 2T/N = {dmax}", j + 1));
        }
        let ln_n = (big_n as f64).ln();
        for i in 0..n {
            let cap = eps[i] / alpha * ln_n;
            if self.sigmas[i] > cap * (1.0 + 1e-12) {
                out.push(format!("sigma_{} = {} > (eps/alpha) ln N = {cap}", i + 1, self.sigmas[i]));
            }
            let upper = if i + 1 < n { self.sigmas[i + 1] } else { horizon };
            let halving = self.sigmas[i] == upper / 2.0;
            if halving == self.bits[i] {
                out.push(format!("b_{} = {} inconsistent with sigma", i + 1, self.bits[i] as u8));
            }
        }
        let mut j = 0;
        for (piece, &count) in self.counts.iter().enumerate() {
            let d = &self.deltas[j..j + count];
            let w = d[0];
            if d.iter().any(|&x| (x - w).abs() > 1e-9 * w.abs().max(1e-300)) {
                out.push(format!("piece {} is not uniform", piece + 1));
            }
            j += count;
        }
        out
    }
}

/// Times `t_{i,j}` (`i < j`) where `B_i/ε_i` and `B_j/ε_j` cross.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionPoints {
    n: usize,
    values: Vec<f64>,
}

impl InteractionPoints {
    /// `t_{i,j}` with 0-based `i < j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < j && j < self.n, "need i < j < n");
        self.values[i * self.n + j]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| (i + 1..self.n).map(move |j| (i, j, self.get(i, j))))
    }
}

pub fn interaction_points(eps: &PerturbationVector, alpha: f64) -> InteractionPoints {
    let n = eps.len();
    let mut values = vec![f64::NAN; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let (ei, ej) = (eps[i], eps[j]);
            values[i * n + j] = (ej / ei).ln() / (alpha * (1.0 / ei - 1.0 / ej));
        }
    }
    InteractionPoints { n, values }
}
