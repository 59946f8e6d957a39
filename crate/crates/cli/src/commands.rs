use std::path::Path;

use serde_json::json;
use usd_kit::discrimination::OutcomeStats;
use usd_kit::duality::{pairing_residual, subspace_reduce};
use usd_kit::scenarios::{scenario_by_name, Expected};
use usd_kit::{
    dilate_unitary, dual_set, inconclusive_rank, lossy_from_povm, make_lossy, povm_from_lossy, report_from_evolution,
    sample_outcomes, usd_report, validate_povm, ComplexMatrix, DiscriminationReport, PhaseVector, PovmSet,
    ProjectiveBasis, RandomSource, StateEnsemble, StateSet, ToleranceContext, ValidationReport, C64,
};

use crate::error::CliError;
use crate::formats::{write_json, EnsembleFile, MatrixFile, PovmFile};
use crate::output::Out;

type Result<T> = std::result::Result<T, CliError>;

fn load_ensemble(path: &Path, ctx: &ToleranceContext) -> Result<StateEnsemble> {
    let (states, priors) = EnsembleFile::load(path)?;
    let states = StateSet::new(states, ctx)?;
    Ok(StateEnsemble::new(states, priors)?)
}

fn load_basis(path: Option<&Path>, dim: usize, ctx: &ToleranceContext) -> Result<ProjectiveBasis> {
    match path {
        None => Ok(ProjectiveBasis::computational(dim)),
        Some(p) => Ok(ProjectiveBasis::new(MatrixFile::load(p)?, ctx)?),
    }
}

fn invalid_povm(report: &ValidationReport) -> CliError {
    CliError::domain(
        "invalid_povm",
        format!("not a valid POVM: {}", report.issues.join("; ")),
        json!({ "issues": report.issues, "completeness_residual": report.completeness_residual }),
    )
}

/// Loads a POVM file and insists that it passes validation.
fn load_valid_povm(path: &Path, ctx: &ToleranceContext) -> Result<PovmSet> {
    let p = PovmFile::load(path)?;
    let report = validate_povm(&p, ctx)?;
    if !report.valid {
        return Err(invalid_povm(&report).with("file", json!(path.display().to_string())));
    }
    Ok(p)
}

fn report_out(r: &DiscriminationReport) -> Out {
    Out::new()
        .reals("per_state_success", &r.per_state_success)
        .reals("inconclusive_per_state", &r.inconclusive_per_state)
        .real_rows("error_matrix", &r.error_matrix)
        .num("total_success", r.total_success)
        .num("total_inconclusive", r.total_inconclusive)
        .num("total_error", r.total_error)
}

fn sampling_out(s: &OutcomeStats) -> Out {
    let freqs: Vec<Vec<f64>> = (0..s.counts.len()).map(|i| s.frequencies(i)).collect();
    Out::new()
        .str("algorithm", RandomSource::ALGORITHM)
        .int("seed", s.seed)
        .int("workers", s.workers as u64)
        .int("trials_per_state", s.trials)
        .counts("counts", &s.counts)
        .real_rows("frequencies", &freqs)
}

/// Duals of the ensemble states. Fewer states than dimensions are handled by
/// working in their span and lifting the duals back.
pub fn dual(states: &Path, ctx: &ToleranceContext) -> Result<Out> {
    let e = load_ensemble(states, ctx)?;
    let s = e.states();
    let duals = if s.len() == s.dim() {
        dual_set(s, ctx)?.matrix().clone()
    } else {
        let red = subspace_reduce(s, ctx)?;
        let compact = dual_set(&red.compact(ctx)?, ctx)?;
        let mut padded = ComplexMatrix::zeros(s.dim(), s.len());
        for r in 0..s.len() {
            for c in 0..s.len() {
                padded[(r, c)] = compact.matrix()[(r, c)];
            }
        }
        &red.rotation.adjoint() * &padded
    };
    let pairing = &duals.adjoint() * s.matrix();
    Ok(Out::new()
        .int("dim", s.dim() as u64)
        .int("states", s.len() as u64)
        .vectors("duals", &duals.columns())
        .matrix("pairing", &pairing)
        .num("pairing_residual", pairing_residual(&pairing)))
}

pub fn povm_from_k(k: &Path, basis: Option<&Path>, out: &Path, ctx: &ToleranceContext) -> Result<Out> {
    let le = make_lossy(MatrixFile::load(k)?, ctx)?;
    let basis = load_basis(basis, le.dim(), ctx)?;
    let p = povm_from_lossy(&le, &basis, ctx)?;
    write_json(out, &PovmFile::from(&p))?;
    Ok(Out::new()
        .str("out", &out.display().to_string())
        .int("dim", p.dim() as u64)
        .int("outcomes", p.outcomes() as u64 + 1)
        .num("spectral_norm", le.spectral_norm())
        .int("inconclusive_rank", inconclusive_rank(&p, ctx)? as u64))
}

pub fn k_from_povm(
    povm: &Path,
    basis: Option<&Path>,
    phases: Option<Vec<f64>>,
    out: &Path,
    ctx: &ToleranceContext,
) -> Result<Out> {
    let p = load_valid_povm(povm, ctx)?;
    let basis = load_basis(basis, p.dim(), ctx)?;
    let phases = match phases {
        Some(v) => PhaseVector::new(v)?,
        None => PhaseVector::zeros(p.outcomes()),
    };
    let le = lossy_from_povm(&p, &basis, &phases, ctx)?;
    write_json(out, &MatrixFile::from(le.matrix()))?;
    Ok(Out::new()
        .str("out", &out.display().to_string())
        .int("dim", le.dim() as u64)
        .num("spectral_norm", le.spectral_norm()))
}

/// Prints the diagnostics; an invalid POVM is also reported as an error.
pub fn validate(povm: &Path, ctx: &ToleranceContext) -> Result<(Out, Option<CliError>)> {
    let p = PovmFile::load(povm)?;
    let report = validate_povm(&p, ctx)?;
    let operators: Vec<Out> = report
        .operators
        .iter()
        .map(|d| {
            Out::new()
                .num("hermiticity_residual", d.hermiticity_residual)
                .num("min_eigenvalue", d.min_eigenvalue)
                .int("rank", d.rank as u64)
                .flag("rank_one", d.rank_one)
        })
        .collect();
    let out = Out::new()
        .flag("valid", report.valid)
        .num("completeness_residual", report.completeness_residual)
        .records("operators", operators)
        .strings("issues", &report.issues);
    let err = (!report.valid).then(|| invalid_povm(&report));
    Ok((out, err))
}

pub fn embed(k: &Path, out: &Path, ctx: &ToleranceContext) -> Result<Out> {
    let le = make_lossy(MatrixFile::load(k)?, ctx)?;
    let u = dilate_unitary(&le, ctx)?;
    write_json(out, &MatrixFile::from(&u))?;
    Ok(Out::new()
        .str("out", &out.display().to_string())
        .int("dim", u.rows() as u64)
        .num("unitarity_residual", u.unitarity_residual()))
}

pub struct Sampling {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

pub enum Measurement<'a> {
    Povm(&'a Path),
    Evolution { k: &'a Path, basis: Option<&'a Path> },
}

pub fn discriminate(ensemble: &Path, m: Measurement<'_>, sampling: &Sampling, ctx: &ToleranceContext) -> Result<Out> {
    let e = load_ensemble(ensemble, ctx)?;
    let (report, p) = match m {
        Measurement::Povm(path) => {
            let p = load_valid_povm(path, ctx)?;
            (usd_report(&e, &p, ctx)?, p)
        }
        Measurement::Evolution { k, basis } => {
            let le = make_lossy(MatrixFile::load(k)?, ctx)?;
            let basis = load_basis(basis, le.dim(), ctx)?;
            let report = report_from_evolution(&e, &le, &basis, ctx)?;
            (report, povm_from_lossy(&le, &basis, ctx)?)
        }
    };
    let mut out = Out::new()
        .reals("priors", e.priors())
        .section("report", report_out(&report));
    if sampling.trials > 0 {
        let stats = sample_outcomes(
            &e,
            &p,
            sampling.trials,
            RandomSource::new(sampling.seed),
            sampling.workers,
            ctx,
        )?;
        out = out.section("sampling", sampling_out(&stats));
    }
    Ok(out)
}

pub fn example(name: &str, param: f64, ctx: &ToleranceContext) -> Result<Out> {
    let s = scenario_by_name(name, param, ctx)?;
    let e = StateEnsemble::uniform(s.input_states.clone());
    let p = povm_from_lossy(&s.evolution, &s.basis, ctx)?;
    let report = usd_report(&e, &p, ctx)?;
    let expected = match &s.expected {
        Expected::Fig1(x) => Out::new()
            .num("gamma", x.gamma)
            .num("output_amplitude", x.output_amplitude)
            .num("success_per_state", x.success_per_state)
            .num("inconclusive_per_state", x.inconclusive_per_state),
        Expected::Fig2(x) => Out::new()
            .num("coupling", x.coupling)
            .num("z", x.z)
            .vectors("outputs", &x.outputs)
            .complex("beta_1", x.beta[0])
            .complex("beta_2", x.beta[1])
            .reals("cross", &x.cross)
            .complex("ancilla_1", x.ancilla[0])
            .complex("ancilla_2", x.ancilla[1])
            .complex("input_overlap", x.input_overlap)
            .complex("output_overlap", x.output_overlap),
        Expected::Embedding(x) => Out::new()
            .num("gamma", x.gamma)
            .reals("ancilla_mass_per_state", &x.ancilla_mass_per_state)
            .num("ancilla_mass", x.ancilla_mass)
            .num("inconclusive", x.inconclusive),
    };
    let states: Vec<Vec<C64>> = s.input_states.matrix().columns();
    let mut out = Out::new()
        .str("name", s.name)
        .num("param", param)
        .matrix("k", s.evolution.matrix())
        .num("spectral_norm", s.evolution.spectral_norm())
        .vectors("input_states", &states)
        .section("report", report_out(&report))
        .section("expected", expected);
    if let Some(u) = &s.full_unitary {
        out = out.matrix("unitary", u);
    }
    Ok(out)
}
