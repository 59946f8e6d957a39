//! Bi-orthogonal dual sets and USD POVM construction.
//!
//! For `N` linearly independent states `|α_i⟩` stacked as the columns of
//! `A`, the duals `|α_i⊥⟩` are the conjugated rows of `A⁻¹`, so that
//! `⟨α_i⊥|α_j⟩ = δ_ij`. The USD POVM is `F_i = λ_i|α_i⊥⟩⟨α_i⊥|` for
//! `i ≤ N` plus the inconclusive element `F_{N+1} = I − Σ F_i`.

use thiserror::Error;

use crate::linalg::{
    expectation, gram_schmidt, hermitian_eigen, inner, inverse, trace_of_product, vec_norm, ComplexMatrix, LinalgError,
    ToleranceContext, C64,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DualityError {
    #[error("state {index} has norm {norm}, expected 1")]
    NotNormalized { index: usize, norm: f64 },
    #[error("states are linearly dependent")]
    DependentStates,
    #[error("{states} states in dimension {dim}: duals need exactly one state per dimension")]
    Underdetermined { states: usize, dim: usize },
    #[error("scaling makes the inconclusive operator indefinite (min eigenvalue {min_eigenvalue:.3e})")]
    InfeasibleScaling { min_eigenvalue: f64 },
    #[error("invalid scaling: {0}")]
    InvalidScaling(String),
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("malformed POVM: {0}")]
    MalformedPovm(String),
    #[error("POVM failed validation: {}", .0.issues.join("; "))]
    InvalidPovm(Box<ValidationReport>),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, DualityError>;

fn dependent(e: LinalgError) -> DualityError {
    match e {
        LinalgError::SingularMatrix { .. } | LinalgError::RankDeficient { .. } => DualityError::DependentStates,
        other => DualityError::Linalg(other),
    }
}

/// Unit-norm, linearly independent states stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSet {
    states: ComplexMatrix,
}

impl StateSet {
    /// Checks that every column has unit norm and that the columns are
    /// linearly independent.
    pub fn new(states: ComplexMatrix, ctx: &ToleranceContext) -> Result<Self> {
        for (index, col) in states.columns().iter().enumerate() {
            let norm = vec_norm(col);
            if (norm - 1.0).abs() > ctx.eq_tol {
                return Err(DualityError::NotNormalized { index, norm });
            }
        }
        if states.cols() > states.rows() {
            return Err(DualityError::DependentStates);
        }
        gram_schmidt(&states, ctx).map_err(dependent)?;
        Ok(StateSet { states })
    }

    /// Normalizes each column before validating.
    pub fn normalized(states: ComplexMatrix, ctx: &ToleranceContext) -> Result<Self> {
        let mut cols = states.columns();
        for (index, col) in cols.iter_mut().enumerate() {
            let norm = vec_norm(col);
            if norm == 0.0 {
                return Err(DualityError::NotNormalized { index, norm });
            }
            col.iter_mut().for_each(|z| *z /= norm);
        }
        Self::new(ComplexMatrix::from_columns(&cols)?, ctx)
    }

    pub fn dim(&self) -> usize {
        self.states.rows()
    }

    pub fn len(&self) -> usize {
        self.states.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.states.cols() == 0
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.states
    }

    pub fn state(&self, i: usize) -> Vec<C64> {
        self.states.column(i)
    }

    /// Gram matrix `⟨α_i|α_j⟩`.
    pub fn overlaps(&self) -> ComplexMatrix {
        &self.states.adjoint() * &self.states
    }
}

/// Unnormalized duals `|α_i⊥⟩` stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSet {
    duals: ComplexMatrix,
}

impl DualSet {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.duals
    }

    pub fn dual(&self, i: usize) -> Vec<C64> {
        self.duals.column(i)
    }

    /// Matrix of pairings `⟨α_i⊥|α_j⟩`; the identity for a correct dual set.
    pub fn pairing(&self, states: &StateSet) -> ComplexMatrix {
        &self.duals.adjoint() * states.matrix()
    }
}

/// Duals of a full set of `N` states in `N` dimensions: conjugated rows of `A⁻¹`.
pub fn dual_set(s: &StateSet, ctx: &ToleranceContext) -> Result<DualSet> {
    if s.len() != s.dim() {
        return Err(DualityError::Underdetermined {
            states: s.len(),
            dim: s.dim(),
        });
    }
    let inv = inverse(s.matrix(), ctx).map_err(dependent)?;
    Ok(DualSet { duals: inv.adjoint() })
}

/// How to choose the weights `λ_i` of the rank-one POVM elements.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalingStrategy {
    /// A single `λ` for every state, as large as positivity of the
    /// inconclusive element allows.
    UniformMax,
    /// Caller-supplied weights, one per state.
    Explicit(Vec<f64>),
}

/// Ordered POVM elements `F_1..F_N, F_{N+1}`. The last element is the
/// inconclusive outcome.
///
/// Construction only checks shapes; use [`validate_povm`] or
/// [`PovmSet::validated`] for positivity and completeness.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmSet {
    operators: Vec<ComplexMatrix>,
    scaling: Option<Vec<f64>>,
}

impl PovmSet {
    pub fn from_operators(operators: Vec<ComplexMatrix>) -> Result<Self> {
        if operators.len() < 2 {
            return Err(DualityError::MalformedPovm(format!(
                "need at least one outcome plus the inconclusive element, got {} operators",
                operators.len()
            )));
        }
        let dim = operators[0].rows();
        if let Some(i) = operators.iter().position(|f| f.rows() != dim || f.cols() != dim) {
            return Err(DualityError::MalformedPovm(format!(
                "operator {i} is {}x{}, expected {dim}x{dim}",
                operators[i].rows(),
                operators[i].cols()
            )));
        }
        Ok(PovmSet {
            operators,
            scaling: None,
        })
    }

    /// Shape checks plus full validation.
    pub fn validated(operators: Vec<ComplexMatrix>, ctx: &ToleranceContext) -> Result<Self> {
        let p = Self::from_operators(operators)?;
        p.ensure_valid(ctx)?;
        Ok(p)
    }

    pub(crate) fn ensure_valid(&self, ctx: &ToleranceContext) -> Result<()> {
        let report = validate_povm(self, ctx)?;
        if report.valid {
            Ok(())
        } else {
            Err(DualityError::InvalidPovm(Box::new(report)))
        }
    }

    pub(crate) fn with_scaling(mut self, scaling: Vec<f64>) -> Self {
        self.scaling = Some(scaling);
        self
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    /// Number of conclusive outcomes `N`.
    pub fn outcomes(&self) -> usize {
        self.operators.len() - 1
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn operator(&self, i: usize) -> &ComplexMatrix {
        &self.operators[i]
    }

    /// `F_{N+1}`
    pub fn inconclusive(&self) -> &ComplexMatrix {
        self.operators.last().expect("POVM has at least two operators")
    }

    /// The weights `λ_i`, when the POVM was built from duals.
    pub fn scaling(&self) -> Option<&[f64]> {
        self.scaling.as_deref()
    }

    /// Largest Frobenius distance between corresponding operators.
    pub fn max_distance(&self, other: &PovmSet) -> f64 {
        if self.operators.len() != other.operators.len() {
            return f64::INFINITY;
        }
        self.operators
            .iter()
            .zip(&other.operators)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }
}

fn inconclusive_for(duals: &DualSet, lambdas: &[f64]) -> ComplexMatrix {
    let n = duals.matrix().rows();
    let mut f = ComplexMatrix::identity(n);
    for (i, &l) in lambdas.iter().enumerate() {
        let d = duals.dual(i);
        f = &f - &ComplexMatrix::outer(&d, &d).scale_real(l);
    }
    f.hermitian_part()
}

fn min_eigenvalue(f: &ComplexMatrix, ctx: &ToleranceContext) -> Result<f64> {
    Ok(hermitian_eigen(&f.hermitian_part(), ctx)?.min_eigenvalue())
}

/// Builds `F_i = λ_i|α_i⊥⟩⟨α_i⊥|` and `F_{N+1} = I − Σ F_i`.
///
/// `UniformMax` bisects on `λ ∈ [0, 1/max_i‖α_i⊥‖²]` for the largest value
/// keeping `F_{N+1}` positive semidefinite. The bracket is shrunk to
/// `1e-12` relative to the upper bound and the feasible end is returned.
pub fn build_usd_povm(s: &StateSet, strategy: &ScalingStrategy, ctx: &ToleranceContext) -> Result<PovmSet> {
    let duals = dual_set(s, ctx)?;
    let n = s.len();
    let lambdas = match strategy {
        ScalingStrategy::Explicit(l) => {
            if l.len() != n {
                return Err(DualityError::InvalidScaling(format!(
                    "expected {n} weights, got {}",
                    l.len()
                )));
            }
            if let Some(bad) = l.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                return Err(DualityError::InvalidScaling(format!(
                    "weights must be positive, got {bad}"
                )));
            }
            let min = min_eigenvalue(&inconclusive_for(&duals, l), ctx)?;
            if min < -ctx.psd_tol {
                return Err(DualityError::InfeasibleScaling { min_eigenvalue: min });
            }
            l.clone()
        }
        ScalingStrategy::UniformMax => vec![uniform_max_lambda(&duals, n, ctx)?; n],
    };

    let mut operators: Vec<ComplexMatrix> = lambdas
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let d = duals.dual(i);
            ComplexMatrix::outer(&d, &d).scale_real(l)
        })
        .collect();
    operators.push(inconclusive_for(&duals, &lambdas));
    Ok(PovmSet::from_operators(operators)?.with_scaling(lambdas))
}

fn uniform_max_lambda(duals: &DualSet, n: usize, ctx: &ToleranceContext) -> Result<f64> {
    let max_norm_sq = (0..n).map(|i| vec_norm(&duals.dual(i)).powi(2)).fold(0.0, f64::max);
    let hi_bound = 1.0 / max_norm_sq;
    // Round-off at an exactly singular F_{N+1} should not push the boundary
    // point out of the feasible set.
    let slack = 64.0 * f64::EPSILON;
    let feasible = |l: f64| -> Result<bool> {
        let f = inconclusive_for(duals, &vec![l; n]);
        Ok(min_eigenvalue(&f, ctx)? >= -slack)
    };
    if feasible(hi_bound)? {
        return Ok(hi_bound);
    }
    let (mut lo, mut hi) = (0.0, hi_bound);
    while hi - lo > 1e-12 * hi_bound {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Diagnostics for a single POVM element.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorDiagnostics {
    /// `‖F − F†‖_F`
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    /// Eigenvalues above `psd_tol` in modulus (relative once the operator
    /// norm exceeds 1).
    pub rank: usize,
    /// Second singular value at most `psd_tol` times the first, first nonzero.
    pub rank_one: bool,
}

/// Result of [`validate_povm`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub operators: Vec<OperatorDiagnostics>,
    /// `‖Σ F_i − I‖_F`
    pub completeness_residual: f64,
    pub valid: bool,
    /// Human-readable reasons for an invalid verdict.
    pub issues: Vec<String>,
}

pub(crate) fn diagnose(f: &ComplexMatrix, ctx: &ToleranceContext) -> Result<OperatorDiagnostics> {
    let eig = hermitian_eigen(&f.hermitian_part(), ctx)?;
    let mut mags: Vec<f64> = eig.eigenvalues.iter().map(|l| l.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let top = mags[0];
    let cut = ctx.psd_tol * top.max(1.0);
    let rank = mags.iter().filter(|&&m| m > cut).count();
    let rank_one = top > ctx.psd_tol && mags.get(1).is_none_or(|&s| s <= ctx.psd_tol * top);
    Ok(OperatorDiagnostics {
        hermiticity_residual: f.hermiticity_residual(),
        min_eigenvalue: eig.min_eigenvalue(),
        rank,
        rank_one,
    })
}

/// Checks Hermiticity, positivity, completeness and the rank-one shape of
/// the conclusive elements. Never fails on an invalid POVM; the verdict is
/// in the report.
pub fn validate_povm(p: &PovmSet, ctx: &ToleranceContext) -> Result<ValidationReport> {
    let n = p.outcomes();
    let mut issues = Vec::new();
    let mut operators = Vec::with_capacity(n + 1);
    let mut sum = ComplexMatrix::zeros(p.dim(), p.dim());
    for (i, f) in p.operators().iter().enumerate() {
        let d = diagnose(f, ctx)?;
        if d.hermiticity_residual > ctx.eq_tol {
            issues.push(format!(
                "F_{} is not Hermitian (residual {:.3e})",
                i + 1,
                d.hermiticity_residual
            ));
        }
        if d.min_eigenvalue < -ctx.psd_tol {
            issues.push(format!(
                "F_{} is not positive (min eigenvalue {:.3e})",
                i + 1,
                d.min_eigenvalue
            ));
        }
        if i < n && !d.rank_one {
            issues.push(format!("F_{} is not rank one (rank {})", i + 1, d.rank));
        }
        operators.push(d);
        sum = &sum + f;
    }
    let completeness_residual = sum.distance(&ComplexMatrix::identity(p.dim()));
    if completeness_residual > ctx.eq_tol {
        issues.push(format!(
            "operators do not sum to identity (residual {completeness_residual:.3e})"
        ));
    }
    Ok(ValidationReport {
        operators,
        completeness_residual,
        valid: issues.is_empty(),
        issues,
    })
}

/// Checks that `rho` is a density matrix of dimension `dim`.
pub fn check_density_matrix(rho: &ComplexMatrix, dim: usize, ctx: &ToleranceContext) -> Result<()> {
    if rho.rows() != dim || rho.cols() != dim {
        return Err(DualityError::InvalidDensityMatrix(format!(
            "expected {dim}x{dim}, got {}x{}",
            rho.rows(),
            rho.cols()
        )));
    }
    let herm = rho.hermiticity_residual();
    if herm > ctx.eq_tol {
        return Err(DualityError::InvalidDensityMatrix(format!(
            "not Hermitian (residual {herm:.3e})"
        )));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > ctx.eq_tol {
        return Err(DualityError::InvalidDensityMatrix(format!("trace is {tr}, expected 1")));
    }
    let min = min_eigenvalue(rho, ctx)?;
    if min < -ctx.psd_tol {
        return Err(DualityError::InvalidDensityMatrix(format!("min eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// `p_i = tr(ρF_i)` for every outcome, inconclusive last. Round-off
/// negatives down to `−psd_tol` are clamped to zero.
pub fn outcome_probabilities(rho: &ComplexMatrix, p: &PovmSet, ctx: &ToleranceContext) -> Result<Vec<f64>> {
    check_density_matrix(rho, p.dim(), ctx)?;
    Ok(p.operators()
        .iter()
        .map(|f| clamp_probability(trace_of_product(rho, f).re, ctx))
        .collect())
}

pub(crate) fn clamp_probability(x: f64, ctx: &ToleranceContext) -> f64 {
    if (-ctx.psd_tol..0.0).contains(&x) {
        0.0
    } else {
        x
    }
}

/// Probability of each POVM outcome for the pure state `v`.
pub(crate) fn pure_state_probabilities(v: &[C64], p: &PovmSet, ctx: &ToleranceContext) -> Vec<f64> {
    p.operators()
        .iter()
        .map(|f| clamp_probability(expectation(f, v).re, ctx))
        .collect()
}

/// Output of [`subspace_reduce`].
#[derive(Debug, Clone)]
pub struct SubspaceReduction {
    /// States expressed in the rotated frame; only the first `L` coordinates
    /// are populated.
    pub rotated: StateSet,
    /// Unitary taking the original frame to the rotated one.
    pub rotation: ComplexMatrix,
}

impl SubspaceReduction {
    /// The rotated states restricted to their first `L` coordinates.
    pub fn compact(&self, ctx: &ToleranceContext) -> Result<StateSet> {
        let l = self.rotated.len();
        StateSet::normalized(self.rotated.matrix().block(0, 0, l, l)?, ctx)
    }
}

/// Rotates `L ≤ dim` states into the first `L` computational coordinates.
///
/// The first `L` rows of the rotation are the Gram-Schmidt frame of the
/// states; the rest complete it greedily from the computational basis.
pub fn subspace_reduce(s: &StateSet, ctx: &ToleranceContext) -> Result<SubspaceReduction> {
    let dim = s.dim();
    let frame = gram_schmidt(s.matrix(), ctx).map_err(dependent)?;
    let mut basis = frame.columns();
    while basis.len() < dim {
        let (best, residual) = (0..dim)
            .map(|k| {
                let mut w = vec![C64::default(); dim];
                w[k] = C64::new(1.0, 0.0);
                for _ in 0..2 {
                    for q in &basis {
                        let proj = inner(q, &w);
                        for (wi, qi) in w.iter_mut().zip(q) {
                            *wi -= proj * qi;
                        }
                    }
                }
                w
            })
            .map(|w| {
                let n = vec_norm(&w);
                (w, n)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("dim > 0");
        basis.push(best.into_iter().map(|z| z / residual).collect());
    }
    let rotation = ComplexMatrix::from_columns(&basis)?.adjoint();
    let rotated = StateSet::new(&rotation * s.matrix(), ctx)?;
    Ok(SubspaceReduction { rotated, rotation })
}

/// Largest entrywise modulus of `pairing − I`.
pub fn pairing_residual(pairing: &ComplexMatrix) -> f64 {
    (pairing - &ComplexMatrix::identity(pairing.rows()))
        .data()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}
