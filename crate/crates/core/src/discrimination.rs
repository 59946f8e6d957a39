//! Ensembles, analytic USD reports, Monte Carlo sampling and
//! post-measurement states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::duality::{self, check_density_matrix, DualityError, PovmSet, StateSet};
use crate::equivalence::{EquivalenceError, LossyEvolution, ProjectiveBasis};
use crate::linalg::{inner, psd_sqrt, vec_norm, ComplexMatrix, LinalgError, ToleranceContext};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscriminationError {
    #[error("invalid priors: {0}")]
    InvalidPriors(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("POVM failed validation: {0}")]
    InvalidPovm(String),
    #[error("outcome has zero probability (tr = {probability:.3e})")]
    ZeroProbabilityBranch { probability: f64 },
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error(transparent)]
    Duality(#[from] DualityError),
    #[error(transparent)]
    Equivalence(#[from] EquivalenceError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, DiscriminationError>;

const PRIOR_TOL: f64 = 1e-12;

/// States together with their preparation probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct StateEnsemble {
    states: StateSet,
    priors: Vec<f64>,
}

impl StateEnsemble {
    pub fn new(states: StateSet, priors: Vec<f64>) -> Result<Self> {
        if priors.len() != states.len() {
            return Err(DiscriminationError::InvalidPriors(format!(
                "{} priors for {} states",
                priors.len(),
                states.len()
            )));
        }
        if let Some(p) = priors.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(DiscriminationError::InvalidPriors(format!(
                "prior {p} is negative or not finite"
            )));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > PRIOR_TOL {
            return Err(DiscriminationError::InvalidPriors(format!("priors sum to {total}")));
        }
        Ok(StateEnsemble { states, priors })
    }

    pub fn uniform(states: StateSet) -> Self {
        let n = states.len();
        StateEnsemble {
            states,
            priors: vec![1.0 / n as f64; n],
        }
    }

    pub fn states(&self) -> &StateSet {
        &self.states
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }
}

/// `ρ₀ = Σ P_i|α_i⟩⟨α_i|`
pub fn density_matrix(e: &StateEnsemble) -> ComplexMatrix {
    let dim = e.states.dim();
    (0..e.len()).fold(ComplexMatrix::zeros(dim, dim), |acc, i| {
        let a = e.states.state(i);
        &acc + &ComplexMatrix::outer(&a, &a).scale_real(e.priors[i])
    })
}

/// Conditional outcome probabilities for each prepared state.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminationReport {
    /// `p(detect i | prepared i)`
    pub per_state_success: Vec<f64>,
    /// `p(detect j | prepared i)` at `[i][j]`; the diagonal is zero.
    pub error_matrix: Vec<Vec<f64>>,
    pub inconclusive_per_state: Vec<f64>,
    pub total_success: f64,
    pub total_inconclusive: f64,
    pub total_error: f64,
}

impl DiscriminationReport {
    /// Builds the report from rows `[p(1|i), …, p(N|i), p(?|i)]`.
    fn from_rows(rows: &[Vec<f64>], priors: &[f64]) -> Self {
        let n = rows.len();
        let per_state_success: Vec<f64> = (0..n).map(|i| rows[i][i]).collect();
        let error_matrix: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { rows[i][j] }).collect())
            .collect();
        let inconclusive_per_state: Vec<f64> = rows.iter().map(|r| r[n]).collect();
        let weighted = |v: &dyn Fn(usize) -> f64| -> f64 { (0..n).map(|i| priors[i] * v(i)).sum() };
        DiscriminationReport {
            total_success: weighted(&|i| per_state_success[i]),
            total_inconclusive: weighted(&|i| inconclusive_per_state[i]),
            total_error: weighted(&|i| error_matrix[i].iter().sum()),
            per_state_success,
            error_matrix,
            inconclusive_per_state,
        }
    }

    /// Row `i` as `[p(1|i), …, p(N|i), p(?|i)]`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        let mut r = self.error_matrix[i].clone();
        r[i] = self.per_state_success[i];
        r.push(self.inconclusive_per_state[i]);
        r
    }

    /// Largest entrywise difference with another report.
    pub fn max_difference(&self, other: &DiscriminationReport) -> f64 {
        (0..self.per_state_success.len())
            .flat_map(|i| {
                let a = self.row(i);
                let b = other.row(i);
                a.into_iter().zip(b).map(|(x, y)| (x - y).abs()).collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }
}

fn check_povm_shape(e: &StateEnsemble, p: &PovmSet) -> Result<()> {
    if p.dim() != e.states.dim() || p.outcomes() != e.len() {
        return Err(DiscriminationError::DimensionMismatch(format!(
            "ensemble has {} states in dimension {}, POVM has {} outcomes in dimension {}",
            e.len(),
            e.states.dim(),
            p.outcomes(),
            p.dim()
        )));
    }
    Ok(())
}

fn outcome_rows(e: &StateEnsemble, p: &PovmSet, ctx: &ToleranceContext) -> Vec<Vec<f64>> {
    (0..e.len())
        .map(|i| duality::pure_state_probabilities(&e.states.state(i), p, ctx))
        .collect()
}

/// Analytic report with entries `tr(|α_i⟩⟨α_i|F_j)`.
pub fn usd_report(e: &StateEnsemble, p: &PovmSet, ctx: &ToleranceContext) -> Result<DiscriminationReport> {
    check_povm_shape(e, p)?;
    Ok(DiscriminationReport::from_rows(&outcome_rows(e, p, ctx), &e.priors))
}

/// The same report computed on the evolution side: `|⟨ψ_j|K|α_i⟩|²` for
/// the conclusive outcomes and `1 − ‖Kα_i‖²` for the lost amplitude.
pub fn report_from_evolution(
    e: &StateEnsemble,
    le: &LossyEvolution,
    basis: &ProjectiveBasis,
    ctx: &ToleranceContext,
) -> Result<DiscriminationReport> {
    let n = e.len();
    if le.dim() != e.states.dim() || basis.dim() != le.dim() || n != le.dim() {
        return Err(DiscriminationError::DimensionMismatch(format!(
            "ensemble has {} states in dimension {}, evolution acts on dimension {}",
            n,
            e.states.dim(),
            le.dim()
        )));
    }
    if !le.is_passive() {
        return Err(EquivalenceError::NotPassive {
            spectral_norm: le.spectral_norm(),
        }
        .into());
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let out = le.matrix().mul_vec(&e.states.state(i)).expect("dimensions checked");
            let mut row: Vec<f64> = (0..n).map(|j| inner(&basis.vector(j), &out).norm_sqr()).collect();
            row.push(duality::clamp_probability(1.0 - vec_norm(&out).powi(2), ctx));
            row
        })
        .collect();
    Ok(DiscriminationReport::from_rows(&rows, &e.priors))
}

/// Seeded generator for [`sample_outcomes`]. Streams come from ChaCha8
/// (`rand_chacha`), a counter-based generator; the same seed always yields
/// the same stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSource {
    pub seed: u64,
}

impl RandomSource {
    pub const ALGORITHM: &'static str = "chacha8";

    pub fn new(seed: u64) -> Self {
        RandomSource { seed }
    }

    fn worker_rng(&self, worker: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(worker as u64))
    }
}

/// Monte Carlo outcome counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeStats {
    /// `counts[i][j]`: outcome `j` (inconclusive last) for prepared state `i`.
    pub counts: Vec<Vec<u64>>,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl OutcomeStats {
    pub fn frequencies(&self, prepared: usize) -> Vec<f64> {
        self.counts[prepared]
            .iter()
            .map(|&c| c as f64 / self.trials as f64)
            .collect()
    }
}

/// Inverse-CDF draw over half-open intervals `[c_{j−1}, c_j)`; the last
/// interval absorbs round-off up to 1.
fn draw(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let clamped: Vec<f64> = probs.iter().map(|&p| p.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    let mut acc = 0.0;
    clamped
        .iter()
        .map(|p| {
            acc += p / total;
            acc
        })
        .collect()
}

/// Draws `trials_per_state` outcomes for each prepared state.
///
/// Trials are split across `workers` threads; worker `w` uses seed
/// `seed + w` and takes `trials/workers` trials (the first `trials % workers`
/// workers take one extra). Results depend only on `(seed, workers)`.
pub fn sample_outcomes(
    e: &StateEnsemble,
    p: &PovmSet,
    trials_per_state: u64,
    rng: RandomSource,
    workers: usize,
    ctx: &ToleranceContext,
) -> Result<OutcomeStats> {
    if workers == 0 {
        return Err(DiscriminationError::NoWorkers);
    }
    check_povm_shape(e, p)?;
    let report = duality::validate_povm(p, ctx)?;
    if !report.valid {
        return Err(DiscriminationError::InvalidPovm(report.issues.join("; ")));
    }
    let cdfs: Vec<Vec<f64>> = outcome_rows(e, p, ctx).iter().map(|r| cumulative(r)).collect();
    let outcomes = p.outcomes() + 1;

    let share = |w: usize| -> u64 {
        let w = w as u64;
        let wk = workers as u64;
        trials_per_state / wk + u64::from(w < trials_per_state % wk)
    };
    let run_worker = |w: usize| -> Vec<Vec<u64>> {
        let mut gen = rng.worker_rng(w);
        cdfs.iter()
            .map(|cdf| {
                let mut counts = vec![0u64; outcomes];
                for _ in 0..share(w) {
                    counts[draw(cdf, gen.random::<f64>())] += 1;
                }
                counts
            })
            .collect()
    };

    let partials: Vec<Vec<Vec<u64>>> = if workers == 1 {
        vec![run_worker(0)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers).map(|w| s.spawn(move || run_worker(w))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sampling worker panicked"))
                .collect()
        })
    };

    let mut counts = vec![vec![0u64; outcomes]; e.len()];
    for part in partials {
        for (row, prow) in counts.iter_mut().zip(part) {
            for (c, pc) in row.iter_mut().zip(prow) {
                *c += pc;
            }
        }
    }
    Ok(OutcomeStats {
        counts,
        trials: trials_per_state,
        seed: rng.seed,
        workers,
    })
}

/// `ρ' = MρM†/tr(MρM†)` with `M` the principal square root of `f`.
pub fn post_measurement_state(rho: &ComplexMatrix, f: &ComplexMatrix, ctx: &ToleranceContext) -> Result<ComplexMatrix> {
    check_density_matrix(rho, f.rows(), ctx)?;
    let m = psd_sqrt(f, ctx)?;
    let unnormalized = &(&m * rho) * &m.adjoint();
    let probability = unnormalized.trace().re;
    if probability <= ctx.psd_tol {
        return Err(DiscriminationError::ZeroProbabilityBranch { probability });
    }
    Ok(unnormalized.scale_real(1.0 / probability).hermitian_part())
}
