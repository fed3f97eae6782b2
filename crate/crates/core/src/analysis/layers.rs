use serde::Serialize;

use crate::problem::PerturbationVector;
use crate::solver::SolutionGrid;

/// `B_i(t) = exp(−α t / ε_i)` for every component.
pub fn layer_functions(eps: &PerturbationVector, alpha: f64, t: f64) -> Vec<f64> {
    eps.as_slice().iter().map(|e| (-alpha * t / e).exp()).collect()
}

/// Smallest constants `C` with `max_i |W_i(t_j)| ≤ C·B_n(t_j)`, fitted
/// separately before and from the last transition point `σ_n` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayConstants {
    pub inside: f64,
    pub outside: f64,
}

impl DecayConstants {
    pub fn overall(&self) -> f64 {
        self.inside.max(self.outside)
    }
}

pub fn singular_decay_constants(singular: &SolutionGrid, eps: &PerturbationVector, alpha: f64) -> DecayConstants {
    let mesh = singular.mesh();
    let sigma_n = *mesh.sigmas().last().expect("at least one layer");
    let eps_n = eps.largest();
    let mut c = DecayConstants { inside: 0.0, outside: 0.0 };
    for (j, &t) in mesh.points().iter().enumerate() {
        let w = singular.at(j).iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if w == 0.0 {
            continue;
        }
        let ratio = w / (-alpha * t / eps_n).exp();
        let slot = if t < sigma_n { &mut c.inside } else { &mut c.outside };
        *slot = slot.max(ratio);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_function_values() {
        let eps = PerturbationVector::new(vec![0.5, 1.0]).unwrap();
        assert_eq!(layer_functions(&eps, 1.0, 0.0), vec![1.0, 1.0]);
        let b = layer_functions(&eps, 1.0, 1.0);
        assert!((b[0] - (-2f64).exp()).abs() < 1e-16 && (b[1] - (-1f64).exp()).abs() < 1e-16);
        assert!((b[0] - 0.13534).abs() < 1e-5 && (b[1] - 0.36788).abs() < 1e-5);
        assert!(b[0] < b[1]);
    }

    #[test]
    fn layer_function_at_transition_point() {
        let eps = PerturbationVector::new(vec![1.0 / 64.0, 1.0 / 16.0]).unwrap();
        let sigma_1 = (1.0 / 64.0) * 64f64.ln();
        let b = layer_functions(&eps, 1.0, sigma_1);
        assert!((b[0] - 1.0 / 64.0).abs() < 1e-12 / 64.0);
    }
}
