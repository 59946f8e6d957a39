//! Maps between a lossy evolution `K` followed by a projective measurement
//! and the USD POVM it implements.
//!
//! `K → POVM`: `F_i = K†Π_iK`, `F_{N+1} = I − K†K`. The inconclusive element
//! is positive exactly when `‖K‖_sp ≤ 1`, so passiveness of `K` and
//! completeness of the POVM are the same condition.
//!
//! `POVM → K`: `K = Σ_i Π_iF_i·e^{iφ_i}/√tr(F_iΠ_i)`, with free phases `φ_i`
//! that change `K` but not the measurement statistics.

use thiserror::Error;

use crate::duality::{self, DualityError, PovmSet, StateSet};
use crate::linalg::{
    expectation, inverse, inverse_with_cond, psd_sqrt, singular_values, vec_norm, ComplexMatrix, LinalgError,
    SingularValues, ToleranceContext, C64,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquivalenceError {
    #[error("evolution is not passive (spectral norm {spectral_norm})")]
    NotPassive { spectral_norm: f64 },
    #[error("gamma {gamma} is below the spectral norm {spectral_norm}")]
    GammaTooSmall { gamma: f64, spectral_norm: f64 },
    #[error("F_{index} has rank {rank}, expected 1")]
    RankMismatch { index: usize, rank: usize },
    #[error("basis vector {index} is orthogonal to its POVM element (tr(F_i Π_i) = {overlap:.3e})")]
    DegenerateBasisAlignment { index: usize, overlap: f64 },
    #[error("evolution is singular (condition number {cond:.3e})")]
    SingularMatrix { cond: f64 },
    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("phase {index} is not finite")]
    NonFinitePhase { index: usize },
    #[error(transparent)]
    Duality(#[from] DualityError),
    #[error(transparent)]
    Linalg(LinalgError),
}

impl From<LinalgError> for EquivalenceError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::SingularMatrix { cond } => EquivalenceError::SingularMatrix { cond },
            other => EquivalenceError::Linalg(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, EquivalenceError>;

/// A single Kraus operator with its singular values cached.
#[derive(Debug, Clone, PartialEq)]
pub struct LossyEvolution {
    k: ComplexMatrix,
    sv: SingularValues,
    passive: bool,
}

impl LossyEvolution {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.k
    }

    pub fn dim(&self) -> usize {
        self.k.rows()
    }

    pub fn singular_values(&self) -> &SingularValues {
        &self.sv
    }

    pub fn spectral_norm(&self) -> f64 {
        self.sv.largest()
    }

    /// `‖K‖_sp ≤ 1 + eq_tol`
    pub fn is_passive(&self) -> bool {
        self.passive
    }

    fn require_passive(&self) -> Result<()> {
        if self.passive {
            Ok(())
        } else {
            Err(EquivalenceError::NotPassive {
                spectral_norm: self.spectral_norm(),
            })
        }
    }
}

pub fn make_lossy(k: ComplexMatrix, ctx: &ToleranceContext) -> Result<LossyEvolution> {
    if !k.is_square() {
        return Err(EquivalenceError::DimensionMismatch(format!(
            "evolution must be square, got {}x{}",
            k.rows(),
            k.cols()
        )));
    }
    let sv = singular_values(&k, ctx)?;
    let passive = sv.largest() <= 1.0 + ctx.eq_tol;
    Ok(LossyEvolution { k, sv, passive })
}

/// Rescales `K → K/Γ`. Without `gamma`, `Γ` is the spectral norm (and
/// already-passive input is returned unchanged).
pub fn normalize_passive(le: &LossyEvolution, gamma: Option<f64>, ctx: &ToleranceContext) -> Result<LossyEvolution> {
    let norm = le.spectral_norm();
    let gamma = match gamma {
        Some(g) => {
            if !(g.is_finite() && g > 0.0 && g >= norm) {
                return Err(EquivalenceError::GammaTooSmall {
                    gamma: g,
                    spectral_norm: norm,
                });
            }
            g
        }
        None if le.passive => return Ok(le.clone()),
        None => norm,
    };
    let scaled = make_lossy(le.k.scale_real(1.0 / gamma), ctx)?;
    debug_assert!(scaled.passive);
    Ok(scaled)
}

/// Orthonormal measurement basis; column `i` defines `Π_i = |ψ_i⟩⟨ψ_i|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveBasis {
    psi: ComplexMatrix,
}

impl ProjectiveBasis {
    pub fn new(psi: ComplexMatrix, ctx: &ToleranceContext) -> Result<Self> {
        let residual = psi.unitarity_residual();
        if residual > ctx.eq_tol {
            return Err(EquivalenceError::NotUnitary { residual });
        }
        Ok(ProjectiveBasis { psi })
    }

    pub fn computational(n: usize) -> Self {
        ProjectiveBasis {
            psi: ComplexMatrix::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.psi.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.psi
    }

    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.psi.column(i)
    }

    pub fn projector(&self, i: usize) -> ComplexMatrix {
        let v = self.vector(i);
        ComplexMatrix::outer(&v, &v)
    }
}

/// Phases `φ_i` (radians) applied as `e^{iφ_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector(Vec<f64>);

impl PhaseVector {
    pub fn new(phi: Vec<f64>) -> Result<Self> {
        if let Some(index) = phi.iter().position(|p| !p.is_finite()) {
            return Err(EquivalenceError::NonFinitePhase { index });
        }
        Ok(PhaseVector(phi))
    }

    pub fn zeros(n: usize) -> Self {
        PhaseVector(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn check_basis_dim(dim: usize, basis: &ProjectiveBasis) -> Result<()> {
    if basis.dim() != dim {
        return Err(EquivalenceError::DimensionMismatch(format!(
            "basis has dimension {}, expected {dim}",
            basis.dim()
        )));
    }
    Ok(())
}

/// `⟨ψ_i|K`, i.e. row `i` of `Ψ†K`.
fn projected_row(k: &ComplexMatrix, basis: &ProjectiveBasis, i: usize) -> Vec<C64> {
    let psi = basis.vector(i);
    (0..k.cols())
        .map(|j| (0..k.rows()).map(|r| psi[r].conj() * k[(r, j)]).sum())
        .collect()
}

/// `F_i = K†Π_iK` for each basis vector, then `F_{N+1} = I − K†K`.
pub fn povm_from_lossy(le: &LossyEvolution, basis: &ProjectiveBasis, _ctx: &ToleranceContext) -> Result<PovmSet> {
    le.require_passive()?;
    let n = le.dim();
    check_basis_dim(n, basis)?;
    let k = &le.k;
    let mut operators: Vec<ComplexMatrix> = (0..n)
        .map(|i| {
            // (Π_iK)†(Π_iK) = |b⟩⟨b| with ⟨b| = ⟨ψ_i|K
            let b: Vec<C64> = projected_row(k, basis, i).iter().map(|z| z.conj()).collect();
            ComplexMatrix::outer(&b, &b)
        })
        .collect();
    let gram = &k.adjoint() * k;
    operators.push((&ComplexMatrix::identity(n) - &gram).hermitian_part());
    Ok(PovmSet::from_operators(operators)?)
}

/// Reconstructs a Kraus operator from the rank-one elements of a POVM:
/// `K = Σ_i Π_iF_i·e^{iφ_i}/√tr(F_iΠ_i)`. `F_{N+1}` is implied by
/// completeness and never read.
pub fn lossy_from_povm(
    p: &PovmSet,
    basis: &ProjectiveBasis,
    phases: &PhaseVector,
    ctx: &ToleranceContext,
) -> Result<LossyEvolution> {
    let n = p.outcomes();
    if p.dim() != n {
        return Err(EquivalenceError::DimensionMismatch(format!(
            "{n} conclusive outcomes in dimension {}",
            p.dim()
        )));
    }
    check_basis_dim(n, basis)?;
    if phases.0.len() != n {
        return Err(EquivalenceError::DimensionMismatch(format!(
            "expected {n} phases, got {}",
            phases.0.len()
        )));
    }
    let mut k = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let f = p.operator(i);
        let diag = duality::diagnose(f, ctx)?;
        if !diag.rank_one {
            return Err(EquivalenceError::RankMismatch {
                index: i + 1,
                rank: diag.rank,
            });
        }
        let psi = basis.vector(i);
        let overlap = expectation(f, &psi).re;
        if overlap <= ctx.psd_tol {
            return Err(EquivalenceError::DegenerateBasisAlignment { index: i + 1, overlap });
        }
        // Π_iF_i = |ψ_i⟩⟨ψ_i|F_i
        let row: Vec<C64> = (0..n)
            .map(|c| (0..n).map(|r| psi[r].conj() * f[(r, c)]).sum())
            .collect();
        let factor = C64::from_polar(1.0, phases.0[i]) / overlap.sqrt();
        let term = ComplexMatrix::from_fn(n, n, |r, c| psi[r] * row[c] * factor);
        k = &k + &term;
    }
    let le = make_lossy(k, ctx)?;
    le.require_passive()?;
    Ok(le)
}

/// One term `a_i|ψ_i⟩⟨β_i|` of the dyadic expansion of `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicTerm {
    pub amplitude: C64,
    pub psi: Vec<C64>,
    /// Unit vector with `⟨β_i| ∝ ⟨ψ_i|K`.
    pub beta: Vec<C64>,
}

/// Writes an invertible `K` as `Σ_i a_i|ψ_i⟩⟨β_i|` with unit `β_i` and real
/// positive `a_i`.
pub fn dyadic_form(le: &LossyEvolution, basis: &ProjectiveBasis, ctx: &ToleranceContext) -> Result<Vec<DyadicTerm>> {
    check_basis_dim(le.dim(), basis)?;
    inverse(&le.k, ctx)?;
    Ok((0..le.dim())
        .map(|i| {
            let row = projected_row(&le.k, basis, i);
            let a = vec_norm(&row);
            DyadicTerm {
                amplitude: C64::new(a, 0.0),
                psi: basis.vector(i),
                beta: row.iter().map(|z| z.conj() / a).collect(),
            }
        })
        .collect())
}

/// Recombines a dyadic expansion into a matrix.
pub fn dyadic_sum(terms: &[DyadicTerm]) -> ComplexMatrix {
    let n = terms[0].psi.len();
    terms.iter().fold(ComplexMatrix::zeros(n, n), |acc, t| {
        &acc + &ComplexMatrix::outer(&t.psi, &t.beta).scale(t.amplitude)
    })
}

/// The inputs that `K` maps onto the measurement basis: normalized columns
/// of `K⁻¹Ψ`.
pub fn discriminable_states(le: &LossyEvolution, basis: &ProjectiveBasis, ctx: &ToleranceContext) -> Result<StateSet> {
    check_basis_dim(le.dim(), basis)?;
    let (inv, _) = inverse_with_cond(&le.k, ctx)?;
    Ok(StateSet::normalized(&inv * basis.matrix(), ctx)?)
}

/// Unitary dilation of a contraction:
/// `U = [[K, (I − KK†)^{1/2}], [(I − K†K)^{1/2}, −K†]]`.
pub fn dilate_unitary(le: &LossyEvolution, ctx: &ToleranceContext) -> Result<ComplexMatrix> {
    le.require_passive()?;
    let n = le.dim();
    let k = &le.k;
    let kd = k.adjoint();
    let id = ComplexMatrix::identity(n);
    let defect_left = psd_sqrt(&(&id - &(k * &kd)).hermitian_part(), ctx)?;
    let defect_right = psd_sqrt(&(&id - &(&kd * k)).hermitian_part(), ctx)?;
    let mut u = ComplexMatrix::zeros(2 * n, 2 * n);
    u.set_block(0, 0, k);
    u.set_block(0, n, &defect_left);
    u.set_block(n, 0, &defect_right);
    u.set_block(n, n, &kd.scale_real(-1.0));
    Ok(u)
}

/// Top-left `subspace_dim × subspace_dim` block of a unitary.
pub fn reduced_evolution(u: &ComplexMatrix, subspace_dim: usize, ctx: &ToleranceContext) -> Result<LossyEvolution> {
    let residual = u.unitarity_residual();
    if residual > ctx.eq_tol {
        return Err(EquivalenceError::NotUnitary { residual });
    }
    if subspace_dim == 0 || subspace_dim > u.rows() {
        return Err(EquivalenceError::DimensionMismatch(format!(
            "subspace dimension {subspace_dim} outside 1..={}",
            u.rows()
        )));
    }
    let le = make_lossy(u.block(0, 0, subspace_dim, subspace_dim)?, ctx)?;
    le.require_passive()?;
    Ok(le)
}

/// Number of eigenvalues of `F_{N+1}` above `psd_tol`.
pub fn inconclusive_rank(p: &PovmSet, ctx: &ToleranceContext) -> Result<usize> {
    let eig = crate::linalg::hermitian_eigen(&p.inconclusive().hermitian_part(), ctx)?;
    Ok(eig.eigenvalues.iter().filter(|&&l| l > ctx.psd_tol).count())
}
