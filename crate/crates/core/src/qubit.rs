//! Polarization qubit states and observables.
//!
//! Basis ordering is `{|H>, |V>}`; `sigma_z` measures H/V, `sigma_x` D/A and
//! `sigma_y` L/R.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EdrError, Result};
use crate::linalg::{self, c, hermitian_eig, ComplexMatrix, DEGENERACY_GAP, ENTRY_TOL, I, ONE, ZERO};

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::new(2, 2, vec![ZERO, -I, I, ZERO]).unwrap()
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::diag_real(&[1.0, -1.0])
}

/// Pure polarization state `alpha |H> + beta |V>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitPure {
    alpha: Complex64,
    beta: Complex64,
}

impl QubitPure {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if (n - 1.0).abs() > Self::NORM_TOL {
            return Err(EdrError::input(format!("amplitudes have norm^2 {n}, expected 1")));
        }
        Ok(Self { alpha, beta })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !n.is_finite() || n <= 1e-300 {
            return Err(EdrError::input("state amplitudes are zero or not finite"));
        }
        Ok(Self {
            alpha: alpha / n,
            beta: beta / n,
        })
    }

    /// Haar-random pure state, drawn via a uniform point on the Bloch sphere.
    pub fn random(rng: &mut impl Rng) -> Self {
        let z: f64 = rng.random_range(-1.0..=1.0);
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let alpha = c(((1.0 + z) / 2.0).max(0.0).sqrt(), 0.0);
        let beta = Complex64::from_polar(((1.0 - z) / 2.0).max(0.0).sqrt(), phi);
        Self::normalized(alpha, beta).expect("random state has unit norm")
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn ket(&self) -> [Complex64; 2] {
        [self.alpha, self.beta]
    }

    pub fn density(&self) -> DensityState {
        DensityState {
            rho: ComplexMatrix::projector(&self.ket()),
        }
    }

    pub fn inner(&self, other: &QubitPure) -> Complex64 {
        self.alpha.conj() * other.alpha + self.beta.conj() * other.beta
    }
}

/// The six polarization states on the axes of the Poincare sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StandardState {
    H,
    V,
    D,
    A,
    L,
    R,
}

impl FromStr for StandardState {
    type Err = EdrError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "H" => Self::H,
            "V" => Self::V,
            "D" => Self::D,
            "A" => Self::A,
            "L" => Self::L,
            "R" => Self::R,
            other => {
                return Err(EdrError::input(format!(
                    "unknown state name '{other}' (expected one of H, V, D, A, L, R)"
                )))
            }
        })
    }
}

/// Named polarization ket; `alpha` is always real and non-negative.
pub fn standard_state(name: StandardState) -> QubitPure {
    let s = FRAC_1_SQRT_2;
    let (alpha, beta) = match name {
        StandardState::H => (ONE, ZERO),
        StandardState::V => (ZERO, ONE),
        StandardState::D => (c(s, 0.0), c(s, 0.0)),
        StandardState::A => (c(s, 0.0), c(-s, 0.0)),
        StandardState::L => (c(s, 0.0), c(0.0, s)),
        StandardState::R => (c(s, 0.0), c(0.0, -s)),
    };
    QubitPure { alpha, beta }
}

/// State literal as it appears in configuration: a name (`"L"`) or an
/// explicit amplitude pair (`"[re,im],[re,im]"`). Explicit pairs are
/// normalized.
pub fn parse_state_literal(text: &str) -> Result<QubitPure> {
    let t = text.trim();
    if !t.starts_with('[') {
        return Ok(standard_state(t.parse()?));
    }
    let nums: Vec<f64> = t
        .split(|ch: char| ch == '[' || ch == ']' || ch == ',' || ch.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| EdrError::input(format!("bad number '{s}' in state literal '{t}'")))
        })
        .collect::<Result<_>>()?;
    if nums.len() != 4 || t.matches('[').count() != 2 {
        return Err(EdrError::input(format!(
            "state literal '{t}' must look like [re,im],[re,im]"
        )));
    }
    QubitPure::normalized(c(nums[0], nums[1]), c(nums[2], nums[3]))
}

/// Positive unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    rho: ComplexMatrix,
}

impl DensityState {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        let asym = rho.max_asymmetry();
        if asym > ENTRY_TOL {
            return Err(EdrError::NotHermitian { max_asymmetry: asym });
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > ENTRY_TOL || tr.im.abs() > ENTRY_TOL {
            return Err(EdrError::input(format!("density matrix has trace {tr}, expected 1")));
        }
        let min_eig = hermitian_eig(&rho)?.last().map_or(0.0, |p| p.value);
        if min_eig < -ENTRY_TOL {
            return Err(EdrError::input(format!(
                "density matrix is not positive semidefinite (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(Self { rho })
    }

    /// `|psi><psi|` from a normalized ket of any dimension.
    pub fn from_ket(ket: &[Complex64]) -> Result<Self> {
        let n: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if (n - 1.0).abs() > ENTRY_TOL {
            return Err(EdrError::input(format!("ket has norm^2 {n}, expected 1")));
        }
        Ok(Self {
            rho: ComplexMatrix::projector(ket),
        })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            rho: ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    /// `Tr(rho X)`, real part; `X` is expected Hermitian.
    pub fn mean(&self, x: &ComplexMatrix) -> Result<f64> {
        Ok(self.expect(x)?.re)
    }

    /// `Tr(rho X)` for any square `X` of matching size.
    pub fn expect(&self, x: &ComplexMatrix) -> Result<Complex64> {
        if x.rows() != self.dim() || x.cols() != self.dim() {
            return Err(EdrError::dim(format!(
                "operator is {}x{} but state has dimension {}",
                x.rows(),
                x.cols(),
                self.dim()
            )));
        }
        Ok(linalg::expectation(&self.rho, x))
    }

    pub fn purity(&self) -> f64 {
        linalg::expectation(&self.rho, &self.rho).re
    }
}

/// Bloch vector `(<sigma_x>, <sigma_y>, <sigma_z>)` of a qubit state.
pub fn bloch_vector(rho: &DensityState) -> Result<[f64; 3]> {
    if rho.dim() != 2 {
        return Err(EdrError::dim(format!("Bloch vector needs d = 2, got {}", rho.dim())));
    }
    Ok([rho.mean(&sigma_x())?, rho.mean(&sigma_y())?, rho.mean(&sigma_z())?])
}

/// Hermitian observable with its spectral decomposition cached.
#[derive(Clone)]
pub struct Observable {
    matrix: ComplexMatrix,
    spectrum: Vec<f64>,
    projectors: Vec<ComplexMatrix>,
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Observable")
            .field("dim", &self.dim())
            .field("spectrum", &self.spectrum)
            .finish()
    }
}

impl Observable {
    /// Groups eigenvalues closer than the degeneracy gap into one spectral projector.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let pairs = hermitian_eig(&matrix)?;
        let n = matrix.rows();
        let mut spectrum: Vec<f64> = Vec::new();
        let mut projectors: Vec<ComplexMatrix> = Vec::new();
        let mut members = 0usize;
        for p in &pairs {
            let proj = ComplexMatrix::projector(&p.vector);
            match spectrum.last_mut() {
                Some(last) if (*last - p.value).abs() < DEGENERACY_GAP => {
                    *last = (*last * members as f64 + p.value) / (members as f64 + 1.0);
                    members += 1;
                    let acc = projectors.last_mut().unwrap();
                    *acc = &*acc + &proj;
                }
                _ => {
                    spectrum.push(p.value);
                    projectors.push(proj);
                    members = 1;
                }
            }
        }
        debug_assert_eq!(
            projectors.iter().map(|p| p.trace().re.round() as usize).sum::<usize>(),
            n
        );
        Ok(Self {
            matrix: matrix.hermitian_part(),
            spectrum,
            projectors,
        })
    }

    pub fn sigma_x() -> Self {
        Self::new(sigma_x()).unwrap()
    }

    pub fn sigma_y() -> Self {
        Self::new(sigma_y()).unwrap()
    }

    pub fn sigma_z() -> Self {
        Self::new(sigma_z()).unwrap()
    }

    /// Qubit observable `n . sigma` for a unit Bloch direction.
    pub fn along(n: [f64; 3]) -> Result<Self> {
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if (len - 1.0).abs() > 1e-12 {
            return Err(EdrError::input(format!("direction has length {len}, expected 1")));
        }
        let m = &(&sigma_x().scale_real(n[0]) + &sigma_y().scale_real(n[1])) + &sigma_z().scale_real(n[2]);
        Self::new(m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn squared(&self) -> ComplexMatrix {
        &self.matrix * &self.matrix
    }

    /// True when the spectrum is exactly `{+1, -1}` (so `A^2 = I`).
    pub fn is_dichotomic(&self) -> bool {
        self.squared()
            .approx_eq(&ComplexMatrix::identity(self.dim()), ENTRY_TOL)
    }

    /// Unit Bloch direction `a` of a dichotomic qubit observable `a . sigma`.
    pub fn bloch_direction(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 || !self.is_dichotomic() {
            return Err(EdrError::input("Bloch direction needs a +-1 valued qubit observable"));
        }
        let half = |p: ComplexMatrix| linalg::expectation(&self.matrix, &p).re / 2.0;
        Ok([half(sigma_x()), half(sigma_y()), half(sigma_z())])
    }
}

/// Named observables accepted by configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableName {
    SigmaX,
    SigmaY,
    SigmaZ,
}

impl ObservableName {
    pub fn observable(self) -> Observable {
        match self {
            Self::SigmaX => Observable::sigma_x(),
            Self::SigmaY => Observable::sigma_y(),
            Self::SigmaZ => Observable::sigma_z(),
        }
    }
}

/// `sigma(A) = sqrt(<A^2> - <A>^2)`.
pub fn stddev(obs: &Observable, rho: &DensityState) -> Result<f64> {
    let m1 = rho.mean(obs.matrix())?;
    let m2 = rho.mean(&obs.squared())?;
    let var = m2 - m1 * m1;
    if var < -1e-12 {
        return Err(EdrError::Numerical(format!("negative variance {var:e}")));
    }
    Ok(var.max(0.0).sqrt())
}
