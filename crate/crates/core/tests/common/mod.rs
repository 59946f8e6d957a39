#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use usd_kit::linalg::{gram_schmidt, spectral_norm};
use usd_kit::{ComplexMatrix, StateSet, ToleranceContext, C64};

pub fn ctx() -> ToleranceContext {
    ToleranceContext::default()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(r: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols)
        .map(|_| C64::new(r.sample(StandardNormal), r.sample(StandardNormal)))
        .collect();
    ComplexMatrix::new(rows, cols, data).unwrap()
}

pub fn random_hermitian(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    random_matrix(r, n, n).hermitian_part()
}

pub fn random_unitary(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    gram_schmidt(&random_matrix(r, n, n), &ctx()).unwrap()
}

/// Random matrix rescaled to the given spectral norm.
pub fn random_with_norm(r: &mut impl Rng, n: usize, norm: f64) -> ComplexMatrix {
    let k = random_matrix(r, n, n);
    let s = spectral_norm(&k, &ctx()).unwrap();
    k.scale_real(norm / s)
}

pub fn random_density(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = random_matrix(r, n, n);
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

pub fn random_states(r: &mut impl Rng, n: usize) -> StateSet {
    StateSet::normalized(random_matrix(r, n, n), &ctx()).unwrap()
}

/// Largest singular value by power iteration on `K†K`, iterated until the
/// Rayleigh quotient stops changing.
pub fn power_iteration_norm(k: &ComplexMatrix) -> f64 {
    let gram = &k.adjoint() * k;
    let n = gram.rows();
    let mut v: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + i as f64 * 0.37, 0.11 * i as f64))
        .collect();
    let mut last = 0.0;
    for _ in 0..100_000 {
        let w = gram.mul_vec(&v).unwrap();
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v = w.into_iter().map(|z| z / norm).collect();
        if (norm - last).abs() <= 1e-15 * norm {
            return norm.sqrt();
        }
        last = norm;
    }
    last.sqrt()
}

/// Eigenvalues of a general complex matrix through nalgebra's Schur form.
pub fn eigenvalues_general(k: &ComplexMatrix) -> Vec<C64> {
    let n = k.rows();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| k[(i, j)]);
    let schur = nalgebra::Schur::new(m);
    let (_, t) = schur.unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

/// Count of eigenvalues above `tol` for a Hermitian matrix.
pub fn rank_above(h: &ComplexMatrix, tol: f64) -> usize {
    usd_kit::linalg::hermitian_eigen(&h.hermitian_part(), &ctx())
        .unwrap()
        .eigenvalues
        .iter()
        .filter(|&&l| l > tol)
        .count()
}
