//! Seeded random states, unitaries and density operators for property checks.

use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{c, r, CMatrix, CVector};
use super::{BipartitePureState, DensityOperator};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> num_complex::Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim_a: usize, dim_b: usize) -> BipartitePureState {
    loop {
        let v: Vec<_> = (0..dim_a * dim_b).map(|_| gaussian(rng)).collect();
        if let Ok(s) = BipartitePureState::normalized(dim_a, dim_b, v) {
            return s;
        }
    }
}

/// Pure state with a prescribed squared-Schmidt spectrum in random local bases.
pub fn random_state_with_spectrum<R: Rng + ?Sized>(
    rng: &mut R,
    dim_a: usize,
    dim_b: usize,
    probabilities: &[f64],
) -> BipartitePureState {
    let ua = random_unitary(rng, dim_a);
    let ub = random_unitary(rng, dim_b);
    let mut v = CVector::zeros(dim_a * dim_b);
    for (k, p) in probabilities.iter().enumerate() {
        let amp = r(p.max(0.0).sqrt());
        for i in 0..dim_a {
            for j in 0..dim_b {
                v[i * dim_b + j] += amp * ua[(i, k)] * ub[(j, k)];
            }
        }
    }
    BipartitePureState::from_vector(dim_a, dim_b, v).expect("spectrum must carry weight")
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase correction.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for k in 0..d {
        let diag = rr[(k, k)];
        let phase = if diag.norm() > 0.0 { diag / r(diag.norm()) } else { r(1.0) };
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Random density operator of the given rank, `G G† / Tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim_a: usize, dim_b: usize, rank: usize) -> DensityOperator {
    let d = dim_a * dim_b;
    let g = CMatrix::from_fn(d, rank.max(1), |_, _| gaussian(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityOperator::new(dim_a, dim_b, m.unscale(tr)).expect("Wishart sample is a density operator")
}

/// Uniform point of the probability simplex with `n` entries.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| x / total).collect()
}
