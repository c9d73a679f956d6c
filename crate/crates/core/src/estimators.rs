//! Procedures that recover the error `epsilon(A)` and disturbance `eta(B)`
//! from measurable statistics: the three-state and two-state methods,
//! weak-valued joint probabilities, and the weak-probe cascade with a
//! finite-shot photon-counting simulator.
//!
//! The three- and two-state methods evaluate traces against the
//! unnormalized states `(I +- A) rho (I +- A)` and `A rho A`; they are never
//! renormalized.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{EdrError, Result};
use crate::instruments::{Instrument, Povm};
use crate::linalg::{c, ComplexMatrix};
use crate::qubit::{DensityState, Observable};

/// Squared estimates below `-NEGATIVE_SQUARE_TOL` signal estimator misuse.
pub const NEGATIVE_SQUARE_TOL: f64 = 1e-9;

/// Strengths below this cannot be inverted reliably.
pub const MIN_STRENGTH: f64 = 1e-9;

/// Default weak-probe strength `sin 2g`.
pub const DEFAULT_PROBE_STRENGTH: f64 = 0.104;

/// Shots drawn per RNG stream; fixes the partition of work independent of threads.
pub const SHOT_BLOCK: u64 = 1 << 16;

/// A squared quantity obtained by cancelling terms of total size `magnitude`
/// carries no significant digits once it is below the accumulated rounding of
/// those terms; such residues are reported as exactly zero.
fn snap_residue(value: f64, magnitude: f64) -> f64 {
    if value.abs() <= 64.0 * f64::EPSILON * magnitude.max(1.0) {
        0.0
    } else {
        value
    }
}

fn root_of_square(square: f64, magnitude: f64) -> Result<f64> {
    let s = snap_residue(square, magnitude);
    if s < -NEGATIVE_SQUARE_TOL {
        return Err(EdrError::Numerical(format!(
            "estimated square {s:e} is negative beyond float noise"
        )));
    }
    Ok(s.max(0.0).sqrt())
}

fn check_dims(povm: &Povm, a: &Observable, psi: &DensityState) -> Result<()> {
    if povm.dim() != a.dim() || a.dim() != psi.dim() {
        return Err(EdrError::dim(format!(
            "POVM dim {}, observable dim {}, state dim {}",
            povm.dim(),
            a.dim(),
            psi.dim()
        )));
    }
    Ok(())
}

/// `sum_m mu_m Tr(E_m sigma)` for a possibly unnormalized `sigma`.
fn meter_mean(povm: &Povm, sigma: &ComplexMatrix) -> f64 {
    povm.values
        .iter()
        .zip(&povm.elements)
        .map(|(mu, e)| mu * crate::linalg::expectation(sigma, e).re)
        .sum()
}

/// `<M_A^2>` and `<A^2>` for the signal state.
fn second_moments(povm: &Povm, a: &Observable, psi: &DensityState) -> Result<(f64, f64)> {
    let meter: f64 = povm
        .values
        .iter()
        .zip(povm.probabilities(psi)?)
        .map(|(mu, p)| mu * mu * p)
        .sum();
    Ok((meter, psi.mean(&a.squared())?))
}

fn shifted(a: &Observable, sign: f64) -> ComplexMatrix {
    &ComplexMatrix::identity(a.dim()) + &a.matrix().scale_real(sign)
}

/// Error from the states `(I+A)psi`, `A psi` and `psi`.
///
/// Works for the disturbance too: pass `instr.followed_by(B)` as the POVM and
/// `B` as the observable.
pub fn three_state_error(povm: &Povm, a: &Observable, psi: &DensityState) -> Result<f64> {
    check_dims(povm, a, psi)?;
    let rho = psi.matrix();
    let (m2, a2) = second_moments(povm, a, psi)?;
    let plus = meter_mean(povm, &rho.sandwich(&shifted(a, 1.0)));
    let flipped = meter_mean(povm, &rho.sandwich(a.matrix()));
    let bare = meter_mean(povm, rho);
    let cross = plus - flipped - bare;
    let magnitude = m2.abs() + a2.abs() + plus.abs() + flipped.abs() + bare.abs();
    root_of_square(m2 + a2 - cross, magnitude)
}

/// Error from the two states `(I +- A) psi`.
pub fn two_state_error(povm: &Povm, a: &Observable, psi: &DensityState) -> Result<f64> {
    check_dims(povm, a, psi)?;
    let rho = psi.matrix();
    let (m2, a2) = second_moments(povm, a, psi)?;
    let plus = meter_mean(povm, &rho.sandwich(&shifted(a, 1.0)));
    let minus = meter_mean(povm, &rho.sandwich(&shifted(a, -1.0)));
    let cross = 0.5 * (plus - minus);
    let magnitude = m2.abs() + a2.abs() + 0.5 * (plus.abs() + minus.abs());
    root_of_square(m2 + a2 - cross, magnitude)
}

/// Weak-valued joint quasi-probabilities `P_W(j, m) = Re Tr(rho E_m Pi_j)`.
#[derive(Debug, Clone)]
pub struct WeakJointTable {
    /// Eigenvalues `lambda_j` of the target, one per row.
    pub lambdas: Vec<f64>,
    /// Outcome values `mu_m`, one per column.
    pub mus: Vec<f64>,
    pub probs: Vec<Vec<f64>>,
}

impl WeakJointTable {
    /// `sum_j P_W(j, m)` for every `m`.
    pub fn outcome_marginals(&self) -> Vec<f64> {
        (0..self.mus.len())
            .map(|m| self.probs.iter().map(|row| row[m]).sum())
            .collect()
    }

    /// `sum_m P_W(j, m)` for every `j`.
    pub fn eigen_marginals(&self) -> Vec<f64> {
        self.probs.iter().map(|row| row.iter().sum()).collect()
    }

    /// `sum_{j,m} (mu_m - lambda_j)^2 P_W(j, m)`
    pub fn error_squared(&self) -> f64 {
        let mut acc = 0.0;
        for (l, row) in self.lambdas.iter().zip(&self.probs) {
            for (mu, p) in self.mus.iter().zip(row) {
                acc += (mu - l) * (mu - l) * p;
            }
        }
        acc
    }

    /// Error via the quasi-probability identity.
    pub fn error(&self) -> Result<f64> {
        let mut magnitude = 0.0;
        for (l, row) in self.lambdas.iter().zip(&self.probs) {
            for (mu, p) in self.mus.iter().zip(row) {
                magnitude += (mu - l) * (mu - l) * p.abs();
            }
        }
        root_of_square(self.error_squared(), magnitude)
    }
}

pub fn weak_joint_probabilities(povm: &Povm, a: &Observable, psi: &DensityState) -> Result<WeakJointTable> {
    check_dims(povm, a, psi)?;
    let probs = a
        .projectors()
        .iter()
        .map(|pi| {
            povm.elements
                .iter()
                .map(|e| psi.expect(&(e * pi)).map(|z| z.re))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeakJointTable {
        lambdas: a.spectrum().to_vec(),
        mus: povm.values.clone(),
        probs,
    })
}

/// Real part of the weak value of `A` conditioned on outcome element `E_m`.
pub fn weak_value(element: &ComplexMatrix, a: &Observable, psi: &DensityState) -> Result<f64> {
    let p = psi.mean(element)?;
    if p <= 1e-12 {
        return Err(EdrError::UndefinedConditioning { probability: p });
    }
    Ok(psi.expect(&(element * a.matrix()))?.re / p)
}

/// Qubit probe with `W_+- = (cos g I +- sin g T) / sqrt 2` for a +-1 target `T`.
#[derive(Debug, Clone)]
pub struct WeakProbe {
    target: Observable,
    g: f64,
    kraus: [ComplexMatrix; 2],
}

impl WeakProbe {
    pub fn new(target: Observable, g: f64) -> Result<Self> {
        if !target.is_dichotomic() {
            return Err(EdrError::input("weak probe target must satisfy T^2 = I"));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_4 + 1e-12).contains(&g) {
            return Err(EdrError::input(format!("coupling g = {g} outside [0, pi/4]")));
        }
        let id = ComplexMatrix::identity(target.dim());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let cosg = id.scale_real(g.cos() * s);
        let sing = target.matrix().scale_real(g.sin() * s);
        let kraus = [&cosg + &sing, &cosg - &sing];
        Ok(Self { target, g, kraus })
    }

    /// Probe with measurement strength `s = sin 2g` (equivalently `cos 2 theta_w`).
    pub fn with_strength(target: Observable, strength: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&strength) {
            return Err(EdrError::input(format!("probe strength {strength} outside [0, 1]")));
        }
        Self::new(target, 0.5 * strength.asin())
    }

    pub fn target(&self) -> &Observable {
        &self.target
    }

    pub fn coupling(&self) -> f64 {
        self.g
    }

    pub fn strength(&self) -> f64 {
        (2.0 * self.g).sin()
    }

    /// `[W_+, W_-]`
    pub fn kraus(&self) -> &[ComplexMatrix; 2] {
        &self.kraus
    }

    /// Non-selective effect of the probe on the signal.
    pub fn channel(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        &rho.sandwich(&self.kraus[0]) + &rho.sandwich(&self.kraus[1])
    }
}

/// Outcome labels of a weak-probe / main / post cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeAxes {
    pub weak: Vec<f64>,
    pub main: Vec<f64>,
    pub post: Vec<f64>,
}

impl CascadeAxes {
    pub fn len(&self) -> usize {
        self.weak.len() * self.main.len() * self.post.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of `(w, m, b)`, `b` fastest.
    pub fn index(&self, w: usize, m: usize, b: usize) -> usize {
        (w * self.main.len() + m) * self.post.len() + b
    }

    /// Outcome values `(w, mu_m, beta_b)` of every flat bin.
    pub fn labels(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.weak.iter().flat_map(move |&w| {
            self.main
                .iter()
                .flat_map(move |&m| self.post.iter().map(move |&b| (w, m, b)))
        })
    }
}

/// Joint outcome distribution of the three-stage cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub axes: CascadeAxes,
    pub probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(axes: CascadeAxes, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != axes.len() {
            return Err(EdrError::dim(format!(
                "{} probabilities for {} joint outcomes",
                probs.len(),
                axes.len()
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 || probs.iter().any(|&p| p < -1e-12 || !p.is_finite()) {
            return Err(EdrError::input(format!(
                "joint distribution must be non-negative and sum to 1 (sum {total})"
            )));
        }
        Ok(Self { axes, probs })
    }

    pub fn prob(&self, w: usize, m: usize, b: usize) -> f64 {
        self.probs[self.axes.index(w, m, b)]
    }

    /// `P(w, m)` summed over the post-measurement outcome.
    pub fn weak_main(&self) -> Vec<Vec<f64>> {
        (0..self.axes.weak.len())
            .map(|w| {
                (0..self.axes.main.len())
                    .map(|m| (0..self.axes.post.len()).map(|b| self.prob(w, m, b)).sum())
                    .collect()
            })
            .collect()
    }

    /// `P(w, b)` summed over the main outcome.
    pub fn weak_post(&self) -> Vec<Vec<f64>> {
        (0..self.axes.weak.len())
            .map(|w| {
                (0..self.axes.post.len())
                    .map(|b| (0..self.axes.main.len()).map(|m| self.prob(w, m, b)).sum())
                    .collect()
            })
            .collect()
    }

    /// `P(m)` summed over the probe and post outcomes.
    pub fn main_marginal(&self) -> Vec<f64> {
        (0..self.axes.main.len())
            .map(|m| {
                (0..self.axes.weak.len())
                    .flat_map(|w| (0..self.axes.post.len()).map(move |b| (w, b)))
                    .map(|(w, b)| self.prob(w, m, b))
                    .sum()
            })
            .collect()
    }

    pub fn weak_marginal(&self) -> Vec<f64> {
        self.weak_main().iter().map(|row| row.iter().sum()).collect()
    }
}

/// Born probabilities `Tr[Pi_b M_m W_w rho W_w^dag M_m^dag Pi_b]`.
pub fn cascade_distribution(
    probe: &WeakProbe,
    main: &Instrument,
    post: &Observable,
    psi: &DensityState,
) -> Result<JointDistribution> {
    let d = psi.dim();
    if probe.target().dim() != d || main.dim() != d || post.dim() != d {
        return Err(EdrError::dim(
            "probe, main instrument, post observable and state must share a dimension",
        ));
    }
    let axes = CascadeAxes {
        weak: vec![1.0, -1.0],
        main: main.values().to_vec(),
        post: post.spectrum().to_vec(),
    };
    let mut probs = Vec::with_capacity(axes.len());
    for w in probe.kraus() {
        let after_probe = psi.matrix().sandwich(w);
        for m in main.kraus() {
            let after_main = after_probe.sandwich(m);
            for pi in post.projectors() {
                probs.push(crate::linalg::expectation(&after_main, pi).re);
            }
        }
    }
    JointDistribution::new(axes, probs)
}

/// Optional second moments `(<M^2>, <T^2>)`; both are 1 for +-1 spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub meter: f64,
    pub target: f64,
}

impl Default for Moments {
    fn default() -> Self {
        Self {
            meter: 1.0,
            target: 1.0,
        }
    }
}

fn weak_statistic(table: &[Vec<f64>], weak: &[f64], values: &[f64]) -> (f64, f64) {
    let mut stat = 0.0;
    let mut abs = 0.0;
    for (w, row) in weak.iter().zip(table) {
        for (v, p) in values.iter().zip(row) {
            stat += w * v * p;
            abs += (w * v * p).abs();
        }
    }
    (stat, abs)
}

fn weak_formula(stat: f64, abs_stat: f64, strength: f64, moments: Moments) -> Result<f64> {
    if strength.abs() <= MIN_STRENGTH {
        return Err(EdrError::VanishingStrength(strength));
    }
    let k = 2.0 / strength;
    let square = moments.meter + moments.target - k * stat;
    let magnitude = moments.meter.abs() + moments.target.abs() + k.abs() * abs_stat;
    root_of_square(square, magnitude)
}

/// `eps^2 = <M_A^2> + <A^2> - (2 / sin 2g) sum_{w,m} w mu_m P(w, m)`.
pub fn weak_probe_error(dist: &JointDistribution, strength: f64, moments: Option<Moments>) -> Result<f64> {
    let (stat, abs) = weak_statistic(&dist.weak_main(), &dist.axes.weak, &dist.axes.main);
    weak_formula(stat, abs, strength, moments.unwrap_or_default())
}

/// `eta^2 = 2 - (2 / sin 2g) sum_{w,b} w beta_b P(w, b)`, probe acting on `B`.
pub fn weak_probe_disturbance(dist: &JointDistribution, strength: f64, moments: Option<Moments>) -> Result<f64> {
    let (stat, abs) = weak_statistic(&dist.weak_post(), &dist.axes.weak, &dist.axes.post);
    weak_formula(stat, abs, strength, moments.unwrap_or_default())
}

/// Photon counts per joint outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotRecord {
    pub counts: Vec<u64>,
    pub shots: u64,
    pub seed: u64,
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent seed for a sub-task (sweep row, cascade stage, ...).
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(base), |acc, &p| mix64(acc ^ mix64(p)))
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut s = seed;
    for chunk in key.chunks_exact_mut(8) {
        s = mix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(block);
    rng
}

/// Integer inverse-CDF thresholds on `[0, 2^64)`; bin `k` owns `[t_{k-1}, t_k)`.
fn thresholds(probs: &[f64]) -> Vec<u128> {
    let clipped: Vec<f64> = probs.iter().map(|p| p.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let last_live = clipped.iter().rposition(|&p| p > 0.0).unwrap_or(clipped.len() - 1);
    let full = 1u128 << 64;
    let mut cum = 0.0;
    clipped
        .iter()
        .enumerate()
        .map(|(k, p)| {
            cum += p;
            if k >= last_live {
                full
            } else {
                ((cum / total * 18_446_744_073_709_551_616.0) as u128).min(full)
            }
        })
        .collect()
}

/// Multinomial sample of `shots` photons over the joint outcomes.
///
/// Shots are split into fixed blocks, each with its own ChaCha8 stream, so
/// counts depend only on `(dist, shots, seed)` and never on thread count.
pub fn sample_shots(dist: &JointDistribution, shots: u64, seed: u64) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(EdrError::input("shots must be positive"));
    }
    let cuts = thresholds(&dist.probs);
    let bins = cuts.len();
    let blocks = shots.div_ceil(SHOT_BLOCK);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = block_rng(seed, blk);
            let n = SHOT_BLOCK.min(shots - blk * SHOT_BLOCK);
            let mut local = vec![0u64; bins];
            for _ in 0..n {
                let x = rng.next_u64() as u128;
                local[cuts.partition_point(|&t| t <= x)] += 1;
            }
            local
        })
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(ShotRecord { counts, shots, seed })
}

/// Which quantity a cascade was configured to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMode {
    Error,
    Disturbance,
}

/// Plug-in estimate and standard error from photon counts.
///
/// The standard error propagates multinomial variance through the linear
/// statistic `T = sum w v P`; `se(q^2) = (2/s) sd(T)` maps to
/// `se(q) = sqrt(q^2 + se(q^2)) - q`, which is the delta method away from
/// `q = 0` and stays finite at it. Negative plug-in squares clamp to zero.
pub fn estimate_from_counts(
    rec: &ShotRecord,
    axes: &CascadeAxes,
    strength: f64,
    mode: EstimateMode,
) -> Result<(f64, f64)> {
    if rec.shots == 0 {
        return Err(EdrError::input("shots must be positive"));
    }
    if rec.counts.len() != axes.len() || rec.counts.iter().sum::<u64>() != rec.shots {
        return Err(EdrError::input("shot record does not match the cascade layout"));
    }
    if strength.abs() <= MIN_STRENGTH {
        return Err(EdrError::VanishingStrength(strength));
    }
    let n = rec.shots as f64;
    let freqs: Vec<f64> = rec.counts.iter().map(|&k| k as f64 / n).collect();
    let coeffs: Vec<f64> = axes
        .labels()
        .map(|(w, m, b)| match mode {
            EstimateMode::Error => w * m,
            EstimateMode::Disturbance => w * b,
        })
        .collect();
    let stat: f64 = coeffs.iter().zip(&freqs).map(|(k, p)| k * p).sum();
    let second: f64 = coeffs.iter().zip(&freqs).map(|(k, p)| k * k * p).sum();
    let var_stat = ((second - stat * stat) / n).max(0.0);
    let k = 2.0 / strength;
    let square = 2.0 - k * stat;
    let estimate = square.max(0.0).sqrt();
    let se_square = k.abs() * var_stat.sqrt();
    let stderr = (estimate * estimate + se_square).sqrt() - estimate;
    Ok((estimate, stderr))
}

/// Exact distribution and simulated counts for one cascade.
pub fn simulate_cascade(
    probe: &WeakProbe,
    main: &Instrument,
    post: &Observable,
    psi: &DensityState,
    shots: u64,
    seed: u64,
) -> Result<(JointDistribution, ShotRecord)> {
    let dist = cascade_distribution(probe, main, post, psi)?;
    let rec = sample_shots(&dist, shots, seed)?;
    Ok((dist, rec))
}

/// Unit-trace copy of the post-probe state (non-selective), for diagnostics.
pub fn post_probe_state(probe: &WeakProbe, psi: &DensityState) -> Result<DensityState> {
    let out = probe.channel(psi.matrix());
    DensityState::new(out.scale(c(1.0 / out.trace().re, 0.0)))
}
