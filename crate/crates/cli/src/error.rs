//! Error codes and exit status. Every failure ends up as one JSON object
//! `{code, message, context}` on stderr.

use std::path::Path;

use serde_json::{json, Value};
use usd_kit::scenarios::ScenarioError;
use usd_kit::{DiscriminationError, DualityError, EquivalenceError, LinalgError};

/// Exit status for I/O, parse and usage errors.
pub const EXIT_IO: i32 = 1;
/// Exit status for inputs that parse but violate a domain invariant.
pub const EXIT_DOMAIN: i32 = 2;
/// Exit status for numerical failures: singularity, non-passive operators.
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub exit: i32,
    pub code: &'static str,
    pub message: String,
    pub context: Value,
}

impl CliError {
    pub fn new(exit: i32, code: &'static str, message: impl Into<String>, context: Value) -> Self {
        CliError {
            exit,
            code,
            message: message.into(),
            context,
        }
    }

    pub fn io(path: &Path, e: &std::io::Error) -> Self {
        CliError::new(
            EXIT_IO,
            "io_error",
            e.to_string(),
            json!({ "file": path.display().to_string() }),
        )
    }

    pub fn parse(message: impl Into<String>, context: Value) -> Self {
        CliError::new(EXIT_IO, "parse_error", message, context)
    }

    pub fn domain(code: &'static str, message: impl Into<String>, context: Value) -> Self {
        CliError::new(EXIT_DOMAIN, code, message, context)
    }

    pub fn to_json(&self) -> Value {
        json!({ "code": self.code, "message": self.message, "context": self.context })
    }

    /// Attaches an extra key to the context object.
    pub fn with(mut self, key: &str, value: Value) -> Self {
        if !self.context.is_object() {
            self.context = json!({});
        }
        self.context[key] = value;
        self
    }
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        let message = e.to_string();
        let (exit, code, context) = match e {
            LinalgError::DimensionMismatch(_) => (EXIT_DOMAIN, "dimension_mismatch", json!({})),
            LinalgError::NonFinite { row, col } => (EXIT_DOMAIN, "non_finite", json!({ "row": row, "col": col })),
            LinalgError::SingularMatrix { cond } => (EXIT_NUMERIC, "singular_matrix", json!({ "cond": cond })),
            LinalgError::NotHermitian { residual } => (EXIT_DOMAIN, "not_hermitian", json!({ "residual": residual })),
            LinalgError::NotPositive { min_eigenvalue } => {
                (EXIT_DOMAIN, "not_positive", json!({ "min_eigenvalue": min_eigenvalue }))
            }
            LinalgError::RankDeficient { column } => (EXIT_DOMAIN, "singular_states", json!({ "column": column })),
            LinalgError::NoConvergence { sweeps } => (EXIT_NUMERIC, "no_convergence", json!({ "sweeps": sweeps })),
            LinalgError::InvalidTolerance(_) => (EXIT_DOMAIN, "invalid_tolerance", json!({})),
        };
        CliError::new(exit, code, message, context)
    }
}

impl From<DualityError> for CliError {
    fn from(e: DualityError) -> Self {
        let message = e.to_string();
        let (code, context) = match e {
            DualityError::Linalg(inner) => return inner.into(),
            DualityError::NotNormalized { index, norm } => ("not_normalized", json!({ "index": index, "norm": norm })),
            DualityError::DependentStates => ("singular_states", json!({})),
            DualityError::Underdetermined { states, dim } => {
                ("underdetermined", json!({ "states": states, "dim": dim }))
            }
            DualityError::InfeasibleScaling { min_eigenvalue } => {
                ("infeasible_scaling", json!({ "min_eigenvalue": min_eigenvalue }))
            }
            DualityError::InvalidScaling(_) => ("invalid_scaling", json!({})),
            DualityError::InvalidDensityMatrix(_) => ("invalid_density_matrix", json!({})),
            DualityError::DimensionMismatch(_) => ("dimension_mismatch", json!({})),
            DualityError::MalformedPovm(_) => ("malformed_povm", json!({})),
            DualityError::InvalidPovm(report) => ("invalid_povm", json!({ "issues": report.issues })),
        };
        CliError::domain(code, message, context)
    }
}

impl From<EquivalenceError> for CliError {
    fn from(e: EquivalenceError) -> Self {
        let message = e.to_string();
        let (exit, code, context) = match e {
            EquivalenceError::Duality(inner) => return inner.into(),
            EquivalenceError::Linalg(inner) => return inner.into(),
            EquivalenceError::NotPassive { spectral_norm } => {
                (EXIT_NUMERIC, "not_passive", json!({ "spectral_norm": spectral_norm }))
            }
            EquivalenceError::GammaTooSmall { gamma, spectral_norm } => (
                EXIT_DOMAIN,
                "gamma_too_small",
                json!({ "gamma": gamma, "spectral_norm": spectral_norm }),
            ),
            EquivalenceError::RankMismatch { index, rank } => {
                (EXIT_DOMAIN, "rank_mismatch", json!({ "index": index, "rank": rank }))
            }
            EquivalenceError::DegenerateBasisAlignment { index, overlap } => (
                EXIT_DOMAIN,
                "degenerate_basis_alignment",
                json!({ "index": index, "overlap": overlap }),
            ),
            EquivalenceError::SingularMatrix { cond } => (EXIT_NUMERIC, "singular_matrix", json!({ "cond": cond })),
            EquivalenceError::NotUnitary { residual } => (EXIT_DOMAIN, "not_unitary", json!({ "residual": residual })),
            EquivalenceError::DimensionMismatch(_) => (EXIT_DOMAIN, "dimension_mismatch", json!({})),
            EquivalenceError::NonFinitePhase { index } => (EXIT_DOMAIN, "non_finite_phase", json!({ "index": index })),
        };
        CliError::new(exit, code, message, context)
    }
}

impl From<DiscriminationError> for CliError {
    fn from(e: DiscriminationError) -> Self {
        let message = e.to_string();
        let (exit, code, context) = match e {
            DiscriminationError::Duality(inner) => return inner.into(),
            DiscriminationError::Equivalence(inner) => return inner.into(),
            DiscriminationError::Linalg(inner) => return inner.into(),
            DiscriminationError::InvalidPriors(_) => (EXIT_DOMAIN, "invalid_priors", json!({})),
            DiscriminationError::DimensionMismatch(_) => (EXIT_DOMAIN, "dimension_mismatch", json!({})),
            DiscriminationError::InvalidPovm(_) => (EXIT_DOMAIN, "invalid_povm", json!({})),
            DiscriminationError::ZeroProbabilityBranch { probability } => (
                EXIT_NUMERIC,
                "zero_probability_branch",
                json!({ "probability": probability }),
            ),
            DiscriminationError::NoWorkers => (EXIT_DOMAIN, "no_workers", json!({})),
        };
        CliError::new(exit, code, message, context)
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        let message = e.to_string();
        match e {
            ScenarioError::Equivalence(inner) => inner.into(),
            ScenarioError::Linalg(inner) => inner.into(),
            ScenarioError::ParamOutOfRange { name, value, range } => CliError::domain(
                "param_out_of_range",
                message,
                json!({ "name": name, "value": value, "range": range }),
            ),
            ScenarioError::SingularAtThisZ { z } => {
                CliError::new(EXIT_NUMERIC, "singular_at_z", message, json!({ "z": z }))
            }
            ScenarioError::UnknownScenario(name) => {
                CliError::domain("unknown_scenario", message, json!({ "name": name }))
            }
        }
    }
}
