//! Random fixtures for unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{gram_schmidt, ComplexMatrix, ToleranceContext, C64};

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
    gram_schmidt(&random_matrix(r, n, n), &ToleranceContext::default()).unwrap()
}

/// Random contraction with largest singular value `top`.
pub fn random_contraction(r: &mut impl Rng, n: usize, top: f64) -> ComplexMatrix {
    let k = random_matrix(r, n, n);
    let s = crate::linalg::spectral_norm(&k, &ToleranceContext::default()).unwrap();
    k.scale_real(top / s)
}

pub fn random_density(r: &mut impl Rng, n: usize) -> ComplexMatrix {
    let g = random_matrix(r, n, n);
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}
