//! Dense linear algebra for small bipartite systems: pure states, density
//! operators, Schmidt decomposition, partial trace and transpose, trace norm
//! and fidelity.

mod density;
pub mod linalg;
pub mod random;
mod state;

pub use density::{
    ensemble_density, fidelity_mixed, partial_trace, partial_transpose, partial_transpose_matrix,
    trace_norm, DensityOperator, Ensemble, Subsystem,
};
pub(crate) use density::mixture;
pub use state::{
    fidelity_pure, schmidt_decompose, schmidt_probabilities, BipartitePureState, SchmidtDecomposition,
};

/// States with norm below this are rejected instead of renormalized.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Numerical tolerances shared by the checkers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Normalization, Hermiticity, trace and inequality ties.
    pub invariant: f64,
    /// Reconstruction error of decompositions.
    pub reconstruction: f64,
    /// Eigenvalues in `[-eigen_clip, 0)` count as zero.
    pub eigen_clip: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { invariant: 1e-9, reconstruction: 1e-8, eigen_clip: 1e-10 }
    }
}

#[cfg(test)]
mod tests {
    use super::linalg::{r, ZERO};
    use super::*;

    #[test]
    fn mixture_of_worked_example_inputs_is_diagonal() {
        // p(|00><00| + |11><11|) + (1 - 2p)|01><01| for the Bell pair plus |01>
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = BipartitePureState::new(2, 2, vec![r(h), ZERO, ZERO, r(h)]).unwrap();
        let minus = BipartitePureState::new(2, 2, vec![r(h), ZERO, ZERO, r(-h)]).unwrap();
        let flip = BipartitePureState::basis(2, 2, 0, 1).unwrap();
        for p in [0.1, 0.3, 0.47] {
            let rho = ensemble_density(&[p, p, 1.0 - 2.0 * p], &[plus.clone(), minus.clone(), flip.clone()]).unwrap();
            let mut expected = linalg::CMatrix::zeros(4, 4);
            expected[(0, 0)] = r(p);
            expected[(3, 3)] = r(p);
            expected[(1, 1)] = r(1.0 - 2.0 * p);
            assert!((rho.matrix() - expected).norm() < 1e-15);
        }
    }
}
