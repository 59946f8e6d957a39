//! The two optical USD setups as ready-made scenarios.
//!
//! - `fig1`: 50-50 beam splitter with an attenuator `γ` on one arm,
//!   `K = (1/√2)[[1, γ], [−1, γ]]`.
//! - `fig2`: three equally coupled waveguides, `H = a(J − I)`, propagated to
//!   length `z`; waveguide 3 is the unpopulated auxiliary mode.
//! - `fig1-embed`: the `fig1` operator embedded in a 4-mode unitary, where
//!   the two extra modes collect the inconclusive amplitude.

use thiserror::Error;

use crate::duality::StateSet;
use crate::equivalence::{
    dilate_unitary, discriminable_states, make_lossy, reduced_evolution, EquivalenceError, LossyEvolution,
    ProjectiveBasis,
};
use crate::linalg::{fix_phase, inner, unitary_exp, vec_norm, ComplexMatrix, LinalgError, ToleranceContext, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("parameter {name} = {value} out of range ({range})")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("reduced evolution is singular at z = {z}")]
    SingularAtThisZ { z: f64 },
    #[error("unknown scenario {0:?}; expected fig1, fig2 or fig1-embed")]
    UnknownScenario(String),
    #[error(transparent)]
    Equivalence(#[from] EquivalenceError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

/// Closed-form values for the attenuator setup.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Expected {
    pub gamma: f64,
    /// `√2γ/√(1+γ²)`, the single nonzero output component per state.
    pub output_amplitude: f64,
    /// `2γ²/(1+γ²)`
    pub success_per_state: f64,
    /// `(1−γ²)/(1+γ²)`
    pub inconclusive_per_state: f64,
}

impl Fig1Expected {
    pub fn new(gamma: f64) -> Self {
        let g2 = gamma * gamma;
        Fig1Expected {
            gamma,
            output_amplitude: (2.0f64).sqrt() * gamma / (1.0 + g2).sqrt(),
            success_per_state: 2.0 * g2 / (1.0 + g2),
            inconclusive_per_state: (1.0 - g2) / (1.0 + g2),
        }
    }
}

/// Outputs of the three-waveguide propagation, each normalized so that its
/// first nonzero component is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Expected {
    pub coupling: f64,
    pub z: f64,
    /// `U·(α_i, 0)ᵀ`
    pub outputs: [Vec<C64>; 2],
    /// Component of output `i` on its own port.
    pub beta: [C64; 2],
    /// Modulus of output `i` on the other conclusive port.
    pub cross: [f64; 2],
    /// Component of output `i` on the auxiliary waveguide.
    pub ancilla: [C64; 2],
    pub input_overlap: C64,
    pub output_overlap: C64,
}

/// Values for the dilated attenuator.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingExpected {
    pub gamma: f64,
    /// Probability on the ancilla modes for each prepared state.
    pub ancilla_mass_per_state: [f64; 2],
    /// Equal-prior average of the above.
    pub ancilla_mass: f64,
    /// Inconclusive probability of the lossy (non-embedded) scheme.
    pub inconclusive: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expected {
    Fig1(Fig1Expected),
    Fig2(Fig2Expected),
    Embedding(EmbeddingExpected),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub evolution: LossyEvolution,
    pub basis: ProjectiveBasis,
    pub input_states: StateSet,
    pub expected: Expected,
    /// The enlarged unitary, for scenarios that embed `K`.
    pub full_unitary: Option<ComplexMatrix>,
}

/// Waveguide parameters; `a` only rescales `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig2Params {
    pub coupling: f64,
    pub z: f64,
}

impl Fig2Params {
    pub fn new(z: f64) -> Self {
        Fig2Params { coupling: 1.0, z }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(ScenarioError::ParamOutOfRange {
            name: "gamma",
            value: gamma,
            range: "0 < gamma < 1",
        })
    }
}

/// `(1/√2)[[1, γ], [−1, γ]]`
pub fn fig1_operator(gamma: f64) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[&[s, s * gamma], &[-s, s * gamma]]).expect("finite 2x2")
}

pub fn fig1_scenario(gamma: f64, ctx: &ToleranceContext) -> Result<Scenario> {
    check_gamma(gamma)?;
    let evolution = make_lossy(fig1_operator(gamma), ctx)?;
    let basis = ProjectiveBasis::computational(2);
    let input_states = discriminable_states(&evolution, &basis, ctx)?;
    Ok(Scenario {
        name: "fig1",
        evolution,
        basis,
        input_states,
        expected: Expected::Fig1(Fig1Expected::new(gamma)),
        full_unitary: None,
    })
}

/// `a·(J − I)` on three modes.
pub fn fig2_hamiltonian(coupling: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(3, 3, |i, j| {
        if i == j {
            C64::default()
        } else {
            C64::new(coupling, 0.0)
        }
    })
}

pub fn fig2_scenario(params: Fig2Params, ctx: &ToleranceContext) -> Result<Scenario> {
    if !(params.coupling > 0.0 && params.coupling.is_finite()) {
        return Err(ScenarioError::ParamOutOfRange {
            name: "a",
            value: params.coupling,
            range: "a > 0",
        });
    }
    if !params.z.is_finite() {
        return Err(ScenarioError::ParamOutOfRange {
            name: "z",
            value: params.z,
            range: "finite",
        });
    }
    let u = unitary_exp(&fig2_hamiltonian(params.coupling), params.z, ctx)?;
    let evolution = reduced_evolution(&u, 2, ctx)?;
    let basis = ProjectiveBasis::computational(2);
    let input_states = match discriminable_states(&evolution, &basis, ctx) {
        Err(EquivalenceError::SingularMatrix { .. }) => return Err(ScenarioError::SingularAtThisZ { z: params.z }),
        other => other?,
    };

    let outputs: [Vec<C64>; 2] = std::array::from_fn(|i| {
        let mut padded = input_states.state(i);
        padded.push(C64::default());
        let mut out = u.mul_vec(&padded).expect("3-mode vector");
        fix_phase(&mut out, ctx.eq_tol);
        out
    });
    let input_overlap = inner(&input_states.state(0), &input_states.state(1));
    let output_overlap = inner(&outputs[0], &outputs[1]);
    let expected = Fig2Expected {
        coupling: params.coupling,
        z: params.z,
        beta: [outputs[0][0], outputs[1][1]],
        cross: [outputs[0][1].norm(), outputs[1][0].norm()],
        ancilla: [outputs[0][2], outputs[1][2]],
        input_overlap,
        output_overlap,
        outputs,
    };
    Ok(Scenario {
        name: "fig2",
        evolution,
        basis,
        input_states,
        expected: Expected::Fig2(expected),
        full_unitary: Some(u),
    })
}

pub fn fig1_as_embedding(gamma: f64, ctx: &ToleranceContext) -> Result<Scenario> {
    check_gamma(gamma)?;
    let evolution = make_lossy(fig1_operator(gamma), ctx)?;
    let u = dilate_unitary(&evolution, ctx)?;
    let basis = ProjectiveBasis::computational(2);
    let input_states = discriminable_states(&evolution, &basis, ctx)?;
    let ancilla_mass_per_state: [f64; 2] = std::array::from_fn(|i| {
        let mut padded = input_states.state(i);
        padded.extend([C64::default(); 2]);
        let out = u.mul_vec(&padded).expect("4-mode vector");
        vec_norm(&out[2..]).powi(2)
    });
    let expected = EmbeddingExpected {
        gamma,
        ancilla_mass: 0.5 * (ancilla_mass_per_state[0] + ancilla_mass_per_state[1]),
        ancilla_mass_per_state,
        inconclusive: Fig1Expected::new(gamma).inconclusive_per_state,
    };
    Ok(Scenario {
        name: "fig1-embed",
        evolution,
        basis,
        input_states,
        expected: Expected::Embedding(expected),
        full_unitary: Some(u),
    })
}

/// Looks a scenario up by its stable name: `fig1` and `fig1-embed` take `γ`,
/// `fig2` takes `z` (with `a = 1`).
pub fn scenario_by_name(name: &str, param: f64, ctx: &ToleranceContext) -> Result<Scenario> {
    match name {
        "fig1" => fig1_scenario(param, ctx),
        "fig2" => fig2_scenario(Fig2Params::new(param), ctx),
        "fig1-embed" => fig1_as_embedding(param, ctx),
        other => Err(ScenarioError::UnknownScenario(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrimination::{report_from_evolution, usd_report, StateEnsemble};
    use crate::equivalence::{inconclusive_rank, povm_from_lossy};

    fn ctx() -> ToleranceContext {
        ToleranceContext::default()
    }

    fn fig1(e: &Expected) -> &Fig1Expected {
        match e {
            Expected::Fig1(x) => x,
            _ => panic!("not a fig1 scenario"),
        }
    }

    fn fig2(e: &Expected) -> &Fig2Expected {
        match e {
            Expected::Fig2(x) => x,
            _ => panic!("not a fig2 scenario"),
        }
    }

    #[test]
    fn fig1_half() {
        let s = fig1_scenario(0.5, &ctx()).unwrap();
        let ex = fig1(&s.expected);
        assert!((ex.success_per_state - 0.4).abs() < 1e-15);
        assert!((ex.inconclusive_per_state - 0.6).abs() < 1e-15);
        assert!((ex.output_amplitude - 0.632_455_532_033_675_9).abs() < 1e-15);

        let n = 1.25f64.sqrt();
        let closed = ComplexMatrix::from_real_rows(&[&[0.5 / n, -0.5 / n], &[1.0 / n, 1.0 / n]]).unwrap();
        assert!(s.input_states.matrix().distance(&closed) < 1e-14);

        for i in 0..2 {
            let out = s.evolution.matrix().mul_vec(&s.input_states.state(i)).unwrap();
            assert!((out[i].norm() - ex.output_amplitude).abs() < 1e-12);
            assert!(out[1 - i].norm() < 1e-12);
        }

        let e = StateEnsemble::uniform(s.input_states.clone());
        let r = report_from_evolution(&e, &s.evolution, &s.basis, &ctx()).unwrap();
        assert!((r.total_success - 0.4).abs() < 1e-12);
        assert!((r.total_inconclusive - 0.6).abs() < 1e-12);
    }

    #[test]
    fn fig1_limits_and_range() {
        let s = fig1_scenario(1.0 - 1e-6, &ctx()).unwrap();
        let ex = fig1(&s.expected);
        assert!(ex.inconclusive_per_state < 1e-5);
        assert!(s.input_states.overlaps()[(0, 1)].norm() < 1e-5);

        let s = fig1_scenario(0.1, &ctx()).unwrap();
        assert!((fig1(&s.expected).success_per_state - 0.019_801_980_198_019_8).abs() < 1e-15);

        for bad in [0.0, 1.0, -0.3, 2.0, f64::NAN] {
            assert!(matches!(
                fig1_scenario(bad, &ctx()),
                Err(ScenarioError::ParamOutOfRange { .. })
            ));
        }
    }

    #[test]
    fn fig1_success_and_inconclusive_sum_to_one() {
        for g in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
            let s = fig1_scenario(g, &ctx()).unwrap();
            let e = StateEnsemble::uniform(s.input_states.clone());
            let p = povm_from_lossy(&s.evolution, &s.basis, &ctx()).unwrap();
            let r = usd_report(&e, &p, &ctx()).unwrap();
            assert!((r.total_success + r.total_inconclusive - 1.0).abs() < 1e-12);
            let overlap = s.input_states.overlaps()[(0, 1)].norm();
            assert!((r.total_inconclusive - overlap).abs() < 1e-10);
        }
    }

    #[test]
    fn fig2_at_zero_is_trivial() {
        let s = fig2_scenario(Fig2Params::new(0.0), &ctx()).unwrap();
        assert!(s.evolution.matrix().distance(&ComplexMatrix::identity(2)) < 1e-14);
        let ex = fig2(&s.expected);
        assert!(ex.input_overlap.norm() < 1e-14);
        assert!((ex.beta[0].norm() - 1.0).abs() < 1e-14);
        assert!(ex.ancilla[0].norm() < 1e-14);
    }

    #[test]
    fn fig2_closed_form_at_unit_length() {
        let z = 1.0;
        let s = fig2_scenario(Fig2Params::new(z), &ctx()).unwrap();
        let diag = C64::from_polar(1.0, z);
        let off = (C64::from_polar(1.0, -2.0 * z) - C64::from_polar(1.0, z)) / 3.0;
        let expected = ComplexMatrix::from_fn(2, 2, |i, j| if i == j { diag + off } else { off });
        assert!(s.evolution.matrix().distance(&expected) < 1e-12);
        assert!((s.evolution.spectral_norm() - 1.0).abs() < 1e-9);
        let p = povm_from_lossy(&s.evolution, &s.basis, &ctx()).unwrap();
        assert_eq!(inconclusive_rank(&p, &ctx()).unwrap(), 1);
    }

    #[test]
    fn fig2_output_structure_over_sweep() {
        for step in 1..=15 {
            let z = 0.2 * step as f64;
            let s = fig2_scenario(Fig2Params::new(z), &ctx()).unwrap();
            let ex = fig2(&s.expected);
            assert!(ex.cross.iter().all(|&c| c <= 1e-10), "z = {z}");
            assert!((ex.ancilla[0].norm() - ex.ancilla[1].norm()).abs() <= 1e-10);
            assert!((ex.beta[0].norm() - ex.beta[1].norm()).abs() <= 1e-10);
            assert!((ex.output_overlap - ex.input_overlap).norm() <= 1e-10);
            assert!((ex.beta[0].norm().powi(2) + ex.ancilla[0].norm().powi(2) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn fig2_rejects_bad_params() {
        assert!(fig2_scenario(Fig2Params { coupling: 0.0, z: 1.0 }, &ctx()).is_err());
        assert!(fig2_scenario(Fig2Params::new(f64::INFINITY), &ctx()).is_err());
    }

    #[test]
    fn embedding_reproduces_inconclusive_rate() {
        let s = fig1_as_embedding(0.5, &ctx()).unwrap();
        let Expected::Embedding(ex) = &s.expected else {
            panic!("wrong scenario kind")
        };
        assert!((ex.ancilla_mass - 0.6).abs() < 1e-12);
        let u = s.full_unitary.as_ref().unwrap();
        assert_eq!(reduced_evolution(u, 2, &ctx()).unwrap().matrix(), &fig1_operator(0.5));

        let s = fig1_as_embedding(1.0 - 1e-6, &ctx()).unwrap();
        let Expected::Embedding(ex) = &s.expected else {
            panic!("wrong scenario kind")
        };
        assert!(ex.ancilla_mass < 1e-5);
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(scenario_by_name("fig1", 0.5, &ctx()).unwrap().name, "fig1");
        assert_eq!(scenario_by_name("fig2", 1.0, &ctx()).unwrap().name, "fig2");
        assert_eq!(scenario_by_name("fig1-embed", 0.5, &ctx()).unwrap().name, "fig1-embed");
        assert!(matches!(
            scenario_by_name("fig3", 0.5, &ctx()),
            Err(ScenarioError::UnknownScenario(_))
        ));
    }
}
