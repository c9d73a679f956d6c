//! Measurement devices: projective measurement, the PBS as a CNOT, the
//! strength-variable VPBS, a leaky-PBS variant, and indirect measurement
//! models with their Heisenberg-picture noise and disturbance operators.
//!
//! The probe (path qubit) basis `{|+1>, |-1>}` maps to indices `{0, 1}`, and
//! joint signal-probe operators use the `signal (x) probe` Kronecker layout,
//! so the 4x4 basis order is `{H+1, H-1, V+1, V-1}`.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EdrError, Result};
use crate::linalg::{c, tensor_product, ComplexMatrix, ENTRY_TOL, ONE, ZERO};
use crate::qubit::{sigma_x, sigma_z, DensityState, Observable};

/// Outcome values paired with POVM elements.
#[derive(Debug, Clone)]
pub struct Povm {
    pub values: Vec<f64>,
    pub elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn probabilities(&self, rho: &DensityState) -> Result<Vec<f64>> {
        self.elements.iter().map(|e| rho.mean(e)).collect()
    }

    /// `sum_m mu_m^k E_m`
    pub fn moment_operator(&self, k: i32) -> ComplexMatrix {
        let d = self.dim();
        self.values
            .iter()
            .zip(&self.elements)
            .fold(ComplexMatrix::zeros(d, d), |acc, (mu, e)| {
                &acc + &e.scale_real(mu.powi(k))
            })
    }

    /// `max |sum_m E_m - I|`
    pub fn completeness_defect(&self) -> f64 {
        let d = self.dim();
        let sum = self.elements.iter().fold(ComplexMatrix::zeros(d, d), |acc, e| &acc + e);
        sum.max_abs_diff(&ComplexMatrix::identity(d))
    }
}

/// A labelled outcome of an instrument.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub value: f64,
}

/// Outcome values plus one measurement (Kraus) operator per outcome.
#[derive(Debug, Clone)]
pub struct Instrument {
    outcomes: Vec<Outcome>,
    kraus: Vec<ComplexMatrix>,
    povm: Povm,
    strength: Option<f64>,
}

impl Instrument {
    /// Validates that the POVM elements `M^dag M` sum to the identity.
    pub fn new(outcomes: Vec<Outcome>, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if outcomes.is_empty() || outcomes.len() != kraus.len() {
            return Err(EdrError::input(format!(
                "{} outcomes for {} measurement operators",
                outcomes.len(),
                kraus.len()
            )));
        }
        let d = kraus[0].rows();
        if kraus.iter().any(|k| k.rows() != d || k.cols() != d) {
            return Err(EdrError::dim("measurement operators must share one square shape"));
        }
        let povm = Povm {
            values: outcomes.iter().map(|o| o.value).collect(),
            elements: kraus.iter().map(|k| (&k.adjoint() * k).hermitian_part()).collect(),
        };
        let defect = povm.completeness_defect();
        if defect > ENTRY_TOL {
            return Err(EdrError::Numerical(format!(
                "POVM elements sum to identity only within {defect:e}"
            )));
        }
        Ok(Self {
            outcomes,
            kraus,
            povm,
            strength: None,
        })
    }

    fn with_strength(mut self, s: f64) -> Self {
        self.strength = Some(s);
        self
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn values(&self) -> &[f64] {
        &self.povm.values
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].rows()
    }

    /// `s = cos 2 theta` for strength-variable devices.
    pub fn strength(&self) -> Option<f64> {
        self.strength
    }

    pub fn probabilities(&self, rho: &DensityState) -> Result<Vec<f64>> {
        self.povm.probabilities(rho)
    }

    /// `sum_m mu_m P(m)`
    pub fn mean_value(&self, rho: &DensityState) -> Result<f64> {
        Ok(self
            .probabilities(rho)?
            .iter()
            .zip(self.values())
            .map(|(p, mu)| p * mu)
            .sum())
    }

    /// Non-selective post-measurement state `sum_m M_m rho M_m^dag`.
    pub fn channel(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        self.kraus
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, m| &acc + &rho.sandwich(m))
    }

    /// Heisenberg-picture effect of measuring `post` after this instrument:
    /// values of `post` with elements `F_b = sum_m M_m^dag Pi_b M_m`.
    pub fn followed_by(&self, post: &Observable) -> Result<Povm> {
        if post.dim() != self.dim() {
            return Err(EdrError::dim("post-measurement observable has the wrong dimension"));
        }
        let d = self.dim();
        let elements = post
            .projectors()
            .iter()
            .map(|pi| {
                self.kraus
                    .iter()
                    .fold(ComplexMatrix::zeros(d, d), |acc, m| &acc + &pi.conjugate_by(m))
                    .hermitian_part()
            })
            .collect();
        Ok(Povm {
            values: post.spectrum().to_vec(),
            elements,
        })
    }
}

fn pm_outcomes() -> Vec<Outcome> {
    vec![
        Outcome {
            label: "+".into(),
            value: 1.0,
        },
        Outcome {
            label: "-".into(),
            value: -1.0,
        },
    ]
}

/// Projective measurement of `obs`: one projector per distinct eigenvalue.
pub fn projective_instrument(obs: &Observable) -> Instrument {
    let outcomes = obs
        .spectrum()
        .iter()
        .enumerate()
        .map(|(j, &v)| Outcome {
            label: j.to_string(),
            value: v,
        })
        .collect();
    Instrument::new(outcomes, obs.projectors().to_vec())
        .expect("spectral projectors are complete")
        .with_strength(1.0)
}

/// PBS acting on (polarization) x (path): `e^{i phi} I (+) sigma_x` in the
/// basis `{H1, H2, V1, V2}`, i.e. a CNOT with polarization as control.
pub fn pbs_unitary(phi: f64) -> ComplexMatrix {
    let ph = Complex64::from_polar(1.0, phi);
    let mut u = ComplexMatrix::zeros(4, 4);
    u[(0, 0)] = ph;
    u[(1, 1)] = ph;
    u[(2, 3)] = ONE;
    u[(3, 2)] = ONE;
    u
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_4 + 1e-12).contains(&theta) {
        return Err(EdrError::input(format!("theta = {theta} is outside [0, pi/4]")));
    }
    Ok(())
}

/// `M_+ = cos t Pi_+ + sin t Pi_-`, `M_- = sin t Pi_+ + cos t Pi_-` for a +-1 observable.
fn two_outcome_device(target: &Observable, plus: [Complex64; 2], minus: [Complex64; 2]) -> Result<Instrument> {
    if !target.is_dichotomic() || target.projectors().len() != 2 {
        return Err(EdrError::input("strength-variable devices need a +-1 valued target"));
    }
    let (pp, pm) = (&target.projectors()[0], &target.projectors()[1]);
    let m_plus = &pp.scale(plus[0]) + &pm.scale(plus[1]);
    let m_minus = &pp.scale(minus[0]) + &pm.scale(minus[1]);
    Instrument::new(pm_outcomes(), vec![m_plus, m_minus])
}

/// VPBS generalized measurement of `sigma_z` with `s = cos 2 theta`.
///
/// `theta = 0` is the projective H/V measurement, `theta = pi/4` the null
/// measurement.
pub fn vpbs_instrument(theta: f64) -> Result<Instrument> {
    vpbs_along(&Observable::sigma_z(), theta)
}

/// VPBS-type device acting in the eigenbasis of an arbitrary +-1 observable.
pub fn vpbs_along(target: &Observable, theta: f64) -> Result<Instrument> {
    check_theta(theta)?;
    let (ct, st) = (c(theta.cos(), 0.0), c(theta.sin(), 0.0));
    Ok(two_outcome_device(target, [ct, st], [st, ct])?.with_strength((2.0 * theta).cos()))
}

/// VPBS built from PBSs with a finite extinction ratio.
///
/// A fraction `extinction` of the wrong polarization leaks into each port,
/// which shifts the effective angle toward the null setting and leaves a
/// relative phase `+-phi` between the arms with `cos 2 phi = (1-x)/(1+x)`.
/// Completeness is exact and `extinction = 0` recovers [`vpbs_instrument`].
pub fn imperfect_pbs_instrument(theta: f64, extinction: f64) -> Result<Instrument> {
    imperfect_along(&Observable::sigma_z(), theta, extinction)
}

pub fn imperfect_along(target: &Observable, theta: f64, extinction: f64) -> Result<Instrument> {
    check_theta(theta)?;
    if !(0.0..1.0).contains(&extinction) {
        return Err(EdrError::input(format!("extinction = {extinction} must lie in [0, 1)")));
    }
    let k = extinction.sqrt();
    let (ct, st) = (theta.cos(), theta.sin());
    let eff = (st + k * ct).atan2(ct + k * st);
    let phi = 0.5 * ((1.0 - extinction) / (1.0 + extinction)).acos();
    let (ce, se) = (eff.cos(), eff.sin());
    let (up, down) = (Complex64::from_polar(1.0, phi), Complex64::from_polar(1.0, -phi));
    Ok(two_outcome_device(target, [up * ce, down * se], [down * se, up * ce])?.with_strength((2.0 * eff).cos()))
}

/// Instrument families selectable from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstrumentKind {
    Vpbs,
    Projective,
    ImperfectVpbs,
}

/// Instrument block of a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstrumentSpec {
    #[serde(rename = "type")]
    pub kind: InstrumentKind,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub extinction: f64,
}

impl InstrumentSpec {
    /// Builds the device for target observable `a` (H/V for `sigma_z`).
    pub fn build(&self, a: &Observable) -> Result<Instrument> {
        match self.kind {
            InstrumentKind::Vpbs => vpbs_along(a, self.theta),
            InstrumentKind::Projective => Ok(projective_instrument(a)),
            InstrumentKind::ImperfectVpbs => imperfect_along(a, self.theta, self.extinction),
        }
    }
}

/// Signal coupled to a probe by a unitary, read out by a probe observable.
#[derive(Debug, Clone)]
pub struct IndirectModel {
    probe_ket: Vec<Complex64>,
    coupling: ComplexMatrix,
    readout: Observable,
    signal_dim: usize,
    probe_dim: usize,
}

impl IndirectModel {
    pub fn new(
        signal_dim: usize,
        probe_ket: Vec<Complex64>,
        coupling: ComplexMatrix,
        readout: Observable,
    ) -> Result<Self> {
        let probe_dim = probe_ket.len();
        let total = signal_dim * probe_dim;
        if coupling.rows() != total || coupling.cols() != total || readout.dim() != probe_dim {
            return Err(EdrError::dim(format!(
                "coupling is {}x{}, expected {total}x{total}; readout dim {} vs probe dim {probe_dim}",
                coupling.rows(),
                coupling.cols(),
                readout.dim()
            )));
        }
        let norm: f64 = probe_ket.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > ENTRY_TOL {
            return Err(EdrError::input(format!("probe ket has norm^2 {norm}")));
        }
        let defect = (&coupling.adjoint() * &coupling).max_abs_diff(&ComplexMatrix::identity(total));
        if defect > ENTRY_TOL {
            return Err(EdrError::Numerical(format!(
                "coupling is not unitary (defect {defect:e})"
            )));
        }
        Ok(Self {
            probe_ket,
            coupling,
            readout,
            signal_dim,
            probe_dim,
        })
    }

    /// Canonical dilation `U|phi>|0> = sum_m M_m|phi>|m>` of any instrument;
    /// the remaining columns of `U` are completed by Gram-Schmidt.
    pub fn from_instrument(instr: &Instrument) -> Result<Self> {
        let d = instr.dim();
        let n = instr.kraus().len();
        let total = d * n;
        let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(total);
        let mut fixed = vec![None; total];
        for j in 0..d {
            let mut col = vec![ZERO; total];
            for (m, k) in instr.kraus().iter().enumerate() {
                for i in 0..d {
                    col[i * n + m] = k[(i, j)];
                }
            }
            fixed[j * n] = Some(col);
        }
        for v in fixed.iter().flatten() {
            columns.push(v.clone());
        }
        let mut free = Vec::new();
        for e in 0..total {
            if columns.len() + free.len() == total {
                break;
            }
            let mut v = vec![ZERO; total];
            v[e] = ONE;
            for u in columns.iter().chain(free.iter()) {
                let overlap: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= overlap * ui;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                free.push(v.into_iter().map(|z| z / norm).collect());
            }
        }
        let mut free = free.into_iter();
        let mut u = ComplexMatrix::zeros(total, total);
        for (col_idx, slot) in fixed.into_iter().enumerate() {
            let col = slot.unwrap_or_else(|| free.next().expect("Gram-Schmidt completion"));
            for (row, z) in col.into_iter().enumerate() {
                u[(row, col_idx)] = z;
            }
        }
        let mut probe = vec![ZERO; n];
        probe[0] = ONE;
        let readout = Observable::new(ComplexMatrix::diag_real(instr.values()))?;
        Self::new(d, probe, u, readout)
    }

    pub fn signal_dim(&self) -> usize {
        self.signal_dim
    }

    pub fn probe_dim(&self) -> usize {
        self.probe_dim
    }

    pub fn coupling(&self) -> &ComplexMatrix {
        &self.coupling
    }

    pub fn readout(&self) -> &Observable {
        &self.readout
    }

    pub fn probe_state(&self) -> DensityState {
        DensityState::from_ket(&self.probe_ket).expect("validated at construction")
    }

    /// `psi (x) xi` on the joint space.
    pub fn joint_state(&self, psi: &DensityState) -> Result<DensityState> {
        if psi.dim() != self.signal_dim {
            return Err(EdrError::dim(format!(
                "signal state has dimension {}, model expects {}",
                psi.dim(),
                self.signal_dim
            )));
        }
        let joint = tensor_product(psi.matrix(), self.probe_state().matrix())?;
        DensityState::new(joint)
    }

    /// Probe readout basis with values; the computational basis when the
    /// readout is diagonal.
    fn readout_basis(&self) -> Result<Vec<(f64, Vec<Complex64>)>> {
        let m = self.readout.matrix();
        let diagonal =
            (0..self.probe_dim).all(|i| (0..self.probe_dim).all(|j| i == j || m[(i, j)].norm() <= ENTRY_TOL));
        if diagonal {
            return Ok((0..self.probe_dim)
                .map(|k| {
                    let mut e = vec![ZERO; self.probe_dim];
                    e[k] = ONE;
                    (m[(k, k)].re, e)
                })
                .collect());
        }
        Ok(crate::linalg::hermitian_eig(m)?
            .into_iter()
            .map(|p| (p.value, p.vector))
            .collect())
    }

    /// `M_k = <k| U |xi>` for each readout basis vector `|k>`.
    pub fn extract_instrument(&self) -> Result<Instrument> {
        let (d, pd) = (self.signal_dim, self.probe_dim);
        let mut outcomes = Vec::new();
        let mut kraus = Vec::new();
        for (k, (value, e)) in self.readout_basis()?.into_iter().enumerate() {
            let m = ComplexMatrix::from_fn(d, d, |i, j| {
                let mut acc = ZERO;
                for (q, eq) in e.iter().enumerate() {
                    for (p, xi) in self.probe_ket.iter().enumerate() {
                        acc += eq.conj() * self.coupling[(i * pd + q, j * pd + p)] * xi;
                    }
                }
                acc
            });
            let label = if pd == 2 {
                ["+", "-"][k].to_string()
            } else {
                k.to_string()
            };
            outcomes.push(Outcome { label, value });
            kraus.push(m);
        }
        Instrument::new(outcomes, kraus)
    }
}

/// Lund-Wiseman apparatus: `W(theta)` on the probe `|+1>`, then a CNOT with
/// the signal as control, probe read out in `sigma_z`.
pub fn lund_wiseman_model(theta: f64) -> Result<IndirectModel> {
    check_theta(theta)?;
    let (ct, st) = (theta.cos(), theta.sin());
    let w = ComplexMatrix::from_real(2, 2, &[ct, st, st, -ct])?;
    let local = tensor_product(&ComplexMatrix::identity(2), &w)?;
    let u = &pbs_unitary(0.0) * &local;
    IndirectModel::new(2, vec![ONE, ZERO], u, Observable::sigma_z())
}

/// Heisenberg-picture meter observables and the noise/disturbance operators.
#[derive(Debug, Clone)]
pub struct HeisenbergPair {
    /// `U^dag (I (x) M) U`
    pub ma: ComplexMatrix,
    /// `U^dag (B (x) I) U`
    pub mb: ComplexMatrix,
    /// `M_A - A (x) I`
    pub na: ComplexMatrix,
    /// `M_B - B (x) I`
    pub db: ComplexMatrix,
}

pub fn heisenberg_observables(model: &IndirectModel, a: &Observable, b: &Observable) -> Result<HeisenbergPair> {
    let d = model.signal_dim();
    if a.dim() != d || b.dim() != d {
        return Err(EdrError::dim("A and B must act on the signal space"));
    }
    let ip = ComplexMatrix::identity(model.probe_dim());
    let u = model.coupling();
    let ma = tensor_product(&ComplexMatrix::identity(d), model.readout().matrix())?
        .conjugate_by(u)
        .hermitian_part();
    let mb = tensor_product(b.matrix(), &ip)?.conjugate_by(u).hermitian_part();
    let na = &ma - &tensor_product(a.matrix(), &ip)?;
    let db = &mb - &tensor_product(b.matrix(), &ip)?;
    Ok(HeisenbergPair { ma, mb, na, db })
}

fn rms(op: &ComplexMatrix, joint: &DensityState) -> Result<f64> {
    let sq = joint.mean(&(op * op))?;
    if sq < -1e-12 {
        return Err(EdrError::Numerical(format!("negative mean square {sq:e}")));
    }
    Ok(sq.max(0.0).sqrt())
}

/// `epsilon(A) = sqrt(<N(A)^2>)` on `psi (x) xi`.
pub fn error_direct(model: &IndirectModel, a: &Observable, psi: &DensityState) -> Result<f64> {
    let pair = heisenberg_observables(model, a, a)?;
    rms(&pair.na, &model.joint_state(psi)?)
}

/// `eta(B) = sqrt(<D(B)^2>)` on `psi (x) xi`.
pub fn disturbance_direct(model: &IndirectModel, b: &Observable, psi: &DensityState) -> Result<f64> {
    let pair = heisenberg_observables(model, b, b)?;
    rms(&pair.db, &model.joint_state(psi)?)
}

/// Signal-space `sigma_x` and `sigma_z`, re-exported for callers building
/// VPBS configurations by hand.
pub fn default_pair() -> (Observable, Observable) {
    (Observable::new(sigma_z()).unwrap(), Observable::new(sigma_x()).unwrap())
}
