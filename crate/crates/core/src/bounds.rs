//! Preparation and error-disturbance relations evaluated on a point
//! `(eps, eta, sigma(A), sigma(B), C)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{EdrError, Result};
use crate::instruments::{heisenberg_observables, HeisenbergPair, IndirectModel};
use crate::linalg::{commutator, psd_sqrt, tensor_product, trace_norm, ComplexMatrix};
use crate::qubit::{stddev, DensityState, Observable};

/// A report is satisfied when `slack >= -SATISFACTION_TOL`.
pub const SATISFACTION_TOL: f64 = 1e-10;

/// `(4 / (pi e))^2`
pub fn buscemi_constant() -> f64 {
    let k = 4.0 / (std::f64::consts::PI * std::f64::consts::E);
    k * k
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    KennardRobertson,
    HeisenbergEd,
    Ozawa0,
    Ozawa,
    Branciard1,
    Branciard1a,
    Branciard2,
    BuschQubit,
    BuscemiQubit,
}

impl Relation {
    pub const ALL: [Relation; 9] = [
        Relation::KennardRobertson,
        Relation::HeisenbergEd,
        Relation::Ozawa0,
        Relation::Ozawa,
        Relation::Branciard1,
        Relation::Branciard1a,
        Relation::Branciard2,
        Relation::BuschQubit,
        Relation::BuscemiQubit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Relation::KennardRobertson => "kennard_robertson",
            Relation::HeisenbergEd => "heisenberg_ed",
            Relation::Ozawa0 => "ozawa0",
            Relation::Ozawa => "ozawa",
            Relation::Branciard1 => "branciard1",
            Relation::Branciard1a => "branciard1a",
            Relation::Branciard2 => "branciard2",
            Relation::BuschQubit => "busch_qubit",
            Relation::BuscemiQubit => "buscemi_qubit",
        }
    }

    /// Comma-separated list of accepted names.
    pub fn valid_names() -> String {
        Self::ALL.map(Relation::name).join(", ")
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Relation {
    type Err = EdrError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| EdrError::Config(format!("unknown relation '{s}'; valid: {}", Self::valid_names())))
    }
}

/// Everything a relation may need. `c` is either `C` or, for mixed states, `D`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EdrInputs {
    pub eps: f64,
    pub eta: f64,
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub c: f64,
    pub bloch_a: Option<[f64; 3]>,
    pub bloch_b: Option<[f64; 3]>,
    /// `1/2 |<[N(A), B]> + <[A, D(B)]>|`, needed only by `ozawa0`.
    pub ozawa_cross: Option<f64>,
}

impl EdrInputs {
    /// Inputs for a qubit `+-1` pair in a pure-or-mixed signal state: `C`
    /// from the signal state, direct `eps`/`eta` and the Ozawa commutator term
    /// from the model.
    pub fn from_model(model: &IndirectModel, a: &Observable, b: &Observable, psi: &DensityState) -> Result<Self> {
        let pair = heisenberg_observables(model, a, b)?;
        let joint = model.joint_state(psi)?;
        Ok(Self {
            eps: rms(&pair.na, &joint)?,
            eta: rms(&pair.db, &joint)?,
            sigma_a: stddev(a, psi)?,
            sigma_b: stddev(b, psi)?,
            c: commutator_bound_c(a, b, psi)?,
            bloch_a: a.bloch_direction().ok(),
            bloch_b: b.bloch_direction().ok(),
            ozawa_cross: Some(ozawa_cross_term(&pair, a, b, &joint)?),
        })
    }

    fn validate(&self) -> Result<()> {
        let named = [
            ("eps", self.eps),
            ("eta", self.eta),
            ("sigma_a", self.sigma_a),
            ("sigma_b", self.sigma_b),
            ("C", self.c),
        ];
        for (name, v) in named
            .into_iter()
            .chain(self.ozawa_cross.map(|v| ("ozawa cross term", v)))
        {
            if !v.is_finite() || v < 0.0 {
                return Err(EdrError::input(format!("{name} = {v} must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdrReport {
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub slack: f64,
    /// Set when `eps` or `eta` exceeded 2 and was clamped (branciard2 only).
    pub out_of_model: bool,
}

impl EdrReport {
    fn new(relation: Relation, lhs: f64, rhs: f64) -> Self {
        let slack = lhs - rhs;
        Self {
            relation,
            lhs,
            rhs,
            satisfied: slack >= -SATISFACTION_TOL,
            slack,
            out_of_model: false,
        }
    }
}

fn rms(op: &ComplexMatrix, joint: &DensityState) -> Result<f64> {
    let sq = joint.mean(&(op * op))?;
    if sq < -1e-12 {
        return Err(EdrError::Numerical(format!("negative mean square {sq:e}")));
    }
    Ok(sq.max(0.0).sqrt())
}

fn check_pair(a: &Observable, b: &Observable, rho: &DensityState) -> Result<()> {
    if a.dim() != b.dim() || a.dim() != rho.dim() {
        return Err(EdrError::dim(format!(
            "A is {0}x{0}, B is {1}x{1}, state is {2}x{2}",
            a.dim(),
            b.dim(),
            rho.dim()
        )));
    }
    Ok(())
}

/// `C = |<[A, B]>| / 2`
pub fn commutator_bound_c(a: &Observable, b: &Observable, rho: &DensityState) -> Result<f64> {
    check_pair(a, b, rho)?;
    Ok(0.5 * rho.expect(&commutator(a.matrix(), b.matrix()))?.norm())
}

/// `D = Tr|sqrt(rho) [A, B] sqrt(rho)| / 2`; equals `C` on pure states.
pub fn mixed_bound_d(a: &Observable, b: &Observable, rho: &DensityState) -> Result<f64> {
    check_pair(a, b, rho)?;
    let root = psd_sqrt(rho.matrix())?;
    let inner = commutator(a.matrix(), b.matrix()).sandwich(&root);
    Ok(0.5 * trace_norm(&inner)?)
}

/// `1/2 |<[N(A), B (x) I]> + <[A (x) I, D(B)]>|` on the joint input state.
pub fn ozawa_cross_term(pair: &HeisenbergPair, a: &Observable, b: &Observable, joint: &DensityState) -> Result<f64> {
    let dp = joint.dim() / a.dim().max(1);
    if a.dim() != b.dim() || dp * a.dim() != joint.dim() || pair.na.rows() != joint.dim() {
        return Err(EdrError::dim("Heisenberg pair, observables and joint state disagree"));
    }
    let ip = ComplexMatrix::identity(dp);
    let a_full = tensor_product(a.matrix(), &ip)?;
    let b_full = tensor_product(b.matrix(), &ip)?;
    let first = joint.expect(&commutator(&pair.na, &b_full))?;
    let second = joint.expect(&commutator(&a_full, &pair.db))?;
    Ok(0.5 * (first + second).norm())
}

/// `eps eta + 1/2 |<[N(A), B]> + <[A, D(B)]>|`
pub fn ozawa0_lhs(pair: &HeisenbergPair, a: &Observable, b: &Observable, joint: &DensityState) -> Result<f64> {
    let cross = ozawa_cross_term(pair, a, b, joint)?;
    Ok(rms(&pair.na, joint)? * rms(&pair.db, joint)? + cross)
}

/// `x sqrt(1 - x^2/4)`, clamped at `x = 2`; second value flags the clamp.
fn tilde(x: f64) -> (f64, bool) {
    let rad = 1.0 - x * x / 4.0;
    if rad < 0.0 {
        (0.0, true)
    } else {
        (x * rad.sqrt(), false)
    }
}

/// Left side of the +-1-spectrum Branciard relation in terms of the tilde variables.
pub fn branciard2_tilde_lhs(eps_t: f64, eta_t: f64, c: f64) -> f64 {
    eps_t * eps_t + eta_t * eta_t + 2.0 * eps_t * eta_t * (1.0 - c * c).max(0.0).sqrt()
}

/// `sqrt2 (|a - b| + |a + b| - 2)`
pub fn busch_rhs(a: [f64; 3], b: [f64; 3]) -> f64 {
    let norm = |s: f64| (0..3).map(|k| (a[k] + s * b[k]).powi(2)).sum::<f64>().sqrt();
    std::f64::consts::SQRT_2 * (norm(-1.0) + norm(1.0) - 2.0)
}

pub fn evaluate_relation(relation: Relation, inputs: &EdrInputs) -> Result<EdrReport> {
    inputs.validate()?;
    let EdrInputs {
        eps,
        eta,
        sigma_a: sa,
        sigma_b: sb,
        c,
        ..
    } = *inputs;
    let report = match relation {
        Relation::KennardRobertson => EdrReport::new(relation, sa * sb, c),
        Relation::HeisenbergEd => EdrReport::new(relation, eps * eta, c),
        Relation::Ozawa0 => {
            let cross = inputs
                .ozawa_cross
                .ok_or_else(|| EdrError::MissingInput("ozawa0 needs the Heisenberg commutator term".into()))?;
            EdrReport::new(relation, eps * eta + cross, c)
        }
        Relation::Ozawa => EdrReport::new(relation, eps * eta + eps * sb + sa * eta, c),
        Relation::Branciard1 => {
            let rad = sa * sa * sb * sb - c * c;
            if rad < -SATISFACTION_TOL {
                return Err(EdrError::input(format!(
                    "sigma_a^2 sigma_b^2 - C^2 = {rad:e} is negative; inputs violate the preparation relation"
                )));
            }
            let lhs = eps * eps * sb * sb + sa * sa * eta * eta + 2.0 * eps * eta * rad.max(0.0).sqrt();
            EdrReport::new(relation, lhs, c * c)
        }
        Relation::Branciard1a => EdrReport::new(relation, eps * sb + sa * eta, c),
        Relation::Branciard2 => {
            if c > 1.0 + SATISFACTION_TOL {
                return Err(EdrError::input(format!("C = {c} exceeds 1 for +-1 spectra")));
            }
            let (et, clamped_e) = tilde(eps);
            let (ht, clamped_h) = tilde(eta);
            let c = c.min(1.0);
            let mut r = EdrReport::new(relation, branciard2_tilde_lhs(et, ht, c), c * c);
            r.out_of_model = clamped_e || clamped_h;
            r
        }
        Relation::BuschQubit => {
            let (a, b) = inputs
                .bloch_a
                .zip(inputs.bloch_b)
                .ok_or_else(|| EdrError::MissingInput("busch_qubit needs Bloch vectors of A and B".into()))?;
            EdrReport::new(relation, eps * eps + eta * eta, busch_rhs(a, b))
        }
        Relation::BuscemiQubit => {
            let third = 1.0 / 3.0;
            EdrReport::new(relation, (eps * eps + third) * (eta * eta + third), buscemi_constant())
        }
    };
    Ok(report)
}

/// Reports in the order of `relations`; fails on the first error.
pub fn evaluate_all(relations: &[Relation], inputs: &EdrInputs) -> Result<Vec<EdrReport>> {
    relations.iter().map(|&r| evaluate_relation(r, inputs)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instruments::{imperfect_pbs_instrument, lund_wiseman_model};
    use crate::linalg::{hermitian_eig, ComplexMatrix};
    use crate::qubit::{standard_state, QubitPure, StandardState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, SQRT_2};

    fn l_state() -> DensityState {
        standard_state(StandardState::L).density()
    }

    fn ideal(theta: f64) -> EdrInputs {
        EdrInputs {
            eps: 2.0 * theta.sin(),
            eta: 2.0 * (FRAC_PI_4 - theta).sin(),
            sigma_a: 1.0,
            sigma_b: 1.0,
            c: 1.0,
            bloch_a: Some([0.0, 0.0, 1.0]),
            bloch_b: Some([1.0, 0.0, 0.0]),
            ozawa_cross: None,
        }
    }

    #[test]
    fn relation_names_round_trip() {
        for r in Relation::ALL {
            assert_eq!(r.name().parse::<Relation>().unwrap(), r);
            let json = serde_json::to_string(&r).unwrap();
            assert_eq!(json, format!("\"{}\"", r.name()));
        }
        let err = "ozawa2".parse::<Relation>().unwrap_err().to_string();
        assert!(err.contains("branciard1a") && err.contains("buscemi_qubit"));
    }

    #[test]
    fn c_examples() {
        let (z, x) = (Observable::sigma_z(), Observable::sigma_x());
        assert!((commutator_bound_c(&z, &x, &l_state()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            commutator_bound_c(&z, &x, &DensityState::maximally_mixed(2)).unwrap(),
            0.0
        );
        let h = standard_state(StandardState::H).density();
        assert_eq!(commutator_bound_c(&z, &x, &h).unwrap(), 0.0);
        assert!(commutator_bound_c(&z, &x, &DensityState::maximally_mixed(3)).is_err());
    }

    #[test]
    fn d_examples() {
        let (z, x) = (Observable::sigma_z(), Observable::sigma_x());
        let d = mixed_bound_d(&z, &x, &DensityState::maximally_mixed(2)).unwrap();
        assert!((d - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let psi = QubitPure::random(&mut rng).density();
            let d = mixed_bound_d(&z, &x, &psi).unwrap();
            assert!((d - commutator_bound_c(&z, &x, &psi).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn d_brute_force_diagonal_state() {
        // sqrt(rho) = diag(sqrt .9, sqrt .1); [Z, X] = 2i Y; the sandwich is
        // 2 sqrt(.09) [[0, 1], [-1, 0]] whose singular values are both 0.6.
        let (z, x) = (Observable::sigma_z(), Observable::sigma_x());
        let rho = DensityState::new(ComplexMatrix::diag_real(&[0.9, 0.1])).unwrap();
        let d = mixed_bound_d(&z, &x, &rho).unwrap();
        let root = ComplexMatrix::diag_real(&[0.9f64.sqrt(), 0.1f64.sqrt()]);
        let m = commutator(z.matrix(), x.matrix()).sandwich(&root);
        let brute: f64 = hermitian_eig(&(&m.adjoint() * &m))
            .unwrap()
            .iter()
            .map(|p| p.value.max(0.0).sqrt())
            .sum();
        assert!((d - 0.5 * brute).abs() < 1e-12);
        assert!((d - 0.6).abs() < 1e-12);
        assert!(d >= commutator_bound_c(&z, &x, &rho).unwrap() - 1e-10);
    }

    #[test]
    fn d_dominates_c_for_mixed_states() {
        let (z, x) = (Observable::sigma_z(), Observable::sigma_x());
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let p: f64 = rng.random_range(0.0..1.0);
            let a = QubitPure::random(&mut rng).density();
            let b = QubitPure::random(&mut rng).density();
            let rho = DensityState::new(&a.matrix().scale_real(p) + &b.matrix().scale_real(1.0 - p)).unwrap();
            assert!(mixed_bound_d(&z, &x, &rho).unwrap() >= commutator_bound_c(&z, &x, &rho).unwrap() - 1e-10);
        }
    }

    #[test]
    fn ozawa0_examples() {
        let (z, x) = (Observable::sigma_z(), Observable::sigma_x());
        let psi = l_state();
        let model = lund_wiseman_model(FRAC_PI_8).unwrap();
        let pair = heisenberg_observables(&model, &z, &x).unwrap();
        let joint = model.joint_state(&psi).unwrap();
        let lhs = ozawa0_lhs(&pair, &z, &x, &joint).unwrap();
        let prod = 2.0 - SQRT_2;
        assert!(lhs >= 1.0 - 1e-10 && prod < 1.0);

        let model = lund_wiseman_model(0.0).unwrap();
        let pair = heisenberg_observables(&model, &z, &x).unwrap();
        let joint = model.joint_state(&psi).unwrap();
        assert!(rms(&pair.na, &joint).unwrap() < 1e-15);
        assert!(ozawa0_lhs(&pair, &z, &x, &joint).unwrap() >= 1.0 - 1e-10);
    }

    #[test]
    fn ozawa0_unbiased_reduces_to_product() {
        // A = B = sigma_z: the meter and sigma_z (x) I commute, D(B) = 0.
        let z = Observable::sigma_z();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for i in 0..11 {
            let model = lund_wiseman_model(FRAC_PI_4 * i as f64 / 10.0).unwrap();
            let pair = heisenberg_observables(&model, &z, &z).unwrap();
            let joint = model.joint_state(&QubitPure::random(&mut rng).density()).unwrap();
            assert!(ozawa_cross_term(&pair, &z, &z, &joint).unwrap() < 1e-12);
        }
    }

    #[test]
    fn heisenberg_violation() {
        let r = evaluate_relation(Relation::HeisenbergEd, &ideal(FRAC_PI_8)).unwrap();
        assert!((r.lhs - (2.0 - SQRT_2)).abs() < 1e-12);
        assert!(!r.satisfied);
        for i in 1..100 {
            let r = evaluate_relation(Relation::HeisenbergEd, &ideal(FRAC_PI_4 * i as f64 / 100.0)).unwrap();
            assert!(r.slack < 0.0);
        }
    }

    #[test]
    fn branciard2_saturates_on_ideal_curve() {
        for i in 0..=100 {
            let theta = FRAC_PI_4 * i as f64 / 100.0;
            let r = evaluate_relation(Relation::Branciard2, &ideal(theta)).unwrap();
            assert!((r.lhs - 1.0).abs() < 1e-12, "theta {theta}: {}", r.lhs);
            assert!(r.satisfied && !r.out_of_model);
        }
    }

    #[test]
    fn branciard2_clamps_out_of_model() {
        let mut inputs = ideal(0.1);
        inputs.eps = 2.3;
        let r = evaluate_relation(Relation::Branciard2, &inputs).unwrap();
        assert!(r.out_of_model);
        inputs.c = 1.5;
        assert!(evaluate_relation(Relation::Branciard2, &inputs).is_err());
    }

    #[test]
    fn branciard2_monotone_in_tilde_variables() {
        for c in [0.0, 0.3, 0.7, 1.0] {
            for j in 0..=20 {
                let fixed = j as f64 / 20.0;
                let mut prev = f64::NEG_INFINITY;
                for i in 0..=50 {
                    let v = i as f64 / 50.0;
                    let a = branciard2_tilde_lhs(v, fixed, c);
                    let b = branciard2_tilde_lhs(fixed, v, c);
                    assert!(a >= prev && (a - b).abs() < 1e-15);
                    prev = a;
                }
            }
        }
    }

    #[test]
    fn branciard1_radicand_guard() {
        let inputs = EdrInputs {
            eps: 0.1,
            eta: 0.1,
            sigma_a: 0.5,
            sigma_b: 0.5,
            c: 1.0,
            ..Default::default()
        };
        assert!(matches!(
            evaluate_relation(Relation::Branciard1, &inputs),
            Err(EdrError::InvalidInput(_))
        ));
    }

    #[test]
    fn busch_and_buscemi_constants() {
        let r = evaluate_relation(Relation::BuschQubit, &ideal(FRAC_PI_8)).unwrap();
        assert!((r.rhs - 2.0 * (2.0 - SQRT_2)).abs() < 1e-12);
        assert!((r.rhs - 1.171_572_875_253_81).abs() < 1e-12);
        assert!(r.slack.abs() < 1e-12);
        assert!((buscemi_constant() - 0.219).abs() < 5e-4);
        assert!((busch_rhs([0.0, 0.0, 1.0], [0.0, 0.0, 1.0])).abs() < 1e-15);
        let mut inputs = ideal(0.2);
        inputs.bloch_b = None;
        assert!(matches!(
            evaluate_relation(Relation::BuschQubit, &inputs),
            Err(EdrError::MissingInput(_))
        ));
    }

    #[test]
    fn ozawa0_needs_cross_term() {
        assert!(matches!(
            evaluate_relation(Relation::Ozawa0, &ideal(0.2)),
            Err(EdrError::MissingInput(_))
        ));
    }

    #[test]
    fn negative_inputs_rejected() {
        let mut inputs = ideal(0.2);
        inputs.eta = -0.1;
        assert!(evaluate_relation(Relation::Ozawa, &inputs).is_err());
    }

    #[test]
    fn universal_relations_hold_on_grid() {
        let (z, x) = (Observable::sigma_z(), Observable::sigma_x());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let universal = [
            Relation::Ozawa0,
            Relation::Ozawa,
            Relation::Branciard1,
            Relation::Branciard1a,
            Relation::Branciard2,
        ];
        for i in 0..21 {
            let model = lund_wiseman_model(FRAC_PI_4 * i as f64 / 20.0).unwrap();
            for _ in 0..10 {
                let psi = QubitPure::random(&mut rng).density();
                let inputs = EdrInputs::from_model(&model, &z, &x, &psi).unwrap();
                for r in evaluate_all(&universal, &inputs).unwrap() {
                    assert!(r.satisfied, "{} slack {}", r.relation, r.slack);
                }
                let b1 = evaluate_relation(Relation::Branciard1, &inputs).unwrap();
                let b1a = evaluate_relation(Relation::Branciard1a, &inputs).unwrap();
                if b1.satisfied {
                    assert!(b1a.satisfied);
                }
            }
        }
    }

    #[test]
    fn imperfect_instrument_still_universal() {
        let (z, x) = (Observable::sigma_z(), Observable::sigma_x());
        for i in 0..11 {
            let inst = imperfect_pbs_instrument(FRAC_PI_4 * i as f64 / 10.0, 0.01).unwrap();
            let model = IndirectModel::from_instrument(&inst).unwrap();
            let inputs = EdrInputs::from_model(&model, &z, &x, &l_state()).unwrap();
            for r in evaluate_all(&[Relation::Ozawa0, Relation::Ozawa, Relation::Branciard2], &inputs).unwrap() {
                assert!(r.satisfied, "{} slack {}", r.relation, r.slack);
            }
        }
    }

    #[test]
    fn report_serializes_fixed_fields() {
        let r = evaluate_relation(Relation::Ozawa, &ideal(0.3)).unwrap();
        let v: serde_json::Value = serde_json::to_value(r).unwrap();
        for key in ["relation", "lhs", "rhs", "satisfied", "slack"] {
            assert!(v.get(key).is_some());
        }
        assert_eq!(v["relation"], "ozawa");
    }
}
