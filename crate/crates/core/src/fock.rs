//! Two-mode truncated Fock space and the quantum Stokes operators.
//!
//! Basis states `|n, m>` (n photons in the x mode, m in the y mode) are
//! ordered with `n` major: index = `n * (cutoff + 1) + m`. In the
//! single-photon sector `|1,0> = |H>` and `|0,1> = |V>`.

use num_complex::Complex64;

use crate::error::{EdrError, Result};
use crate::linalg::{c, ComplexMatrix, I};

/// Two truncated bosonic modes, each holding at most `cutoff` photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    cutoff: usize,
}

impl Default for FockSpace {
    fn default() -> Self {
        Self { cutoff: 2 }
    }
}

/// Which polarization mode an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    X,
    Y,
}

impl FockSpace {
    pub fn new(cutoff: usize) -> Self {
        Self { cutoff }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        (self.cutoff + 1) * (self.cutoff + 1)
    }

    pub fn index(&self, n: usize, m: usize) -> Option<usize> {
        (n <= self.cutoff && m <= self.cutoff).then(|| n * (self.cutoff + 1) + m)
    }

    fn occupation(&self, idx: usize) -> (usize, usize) {
        (idx / (self.cutoff + 1), idx % (self.cutoff + 1))
    }

    /// `a|n,m> = sqrt(n)|n-1,m>` for the x mode (and likewise for y).
    pub fn annihilation(&self, mode: Mode) -> ComplexMatrix {
        let d = self.dim();
        let mut a = ComplexMatrix::zeros(d, d);
        for col in 0..d {
            let (n, m) = self.occupation(col);
            let target = match mode {
                Mode::X if n > 0 => self.index(n - 1, m).map(|r| (r, n)),
                Mode::Y if m > 0 => self.index(n, m - 1).map(|r| (r, m)),
                _ => None,
            };
            if let Some((row, k)) = target {
                a[(row, col)] = c((k as f64).sqrt(), 0.0);
            }
        }
        a
    }

    pub fn creation(&self, mode: Mode) -> ComplexMatrix {
        self.annihilation(mode).adjoint()
    }

    pub fn number(&self, mode: Mode) -> ComplexMatrix {
        let d = self.dim();
        ComplexMatrix::from_fn(d, d, |i, j| {
            if i != j {
                return c(0.0, 0.0);
            }
            let (n, m) = self.occupation(i);
            c(if mode == Mode::X { n } else { m } as f64, 0.0)
        })
    }

    /// Ket `alpha|1,0> + beta|0,1>` embedded in the full truncated space.
    pub fn single_photon(&self, alpha: Complex64, beta: Complex64) -> Result<Vec<Complex64>> {
        let (h, v) = self.single_photon_indices()?;
        let mut ket = vec![c(0.0, 0.0); self.dim()];
        ket[h] = alpha;
        ket[v] = beta;
        Ok(ket)
    }

    fn single_photon_indices(&self) -> Result<(usize, usize)> {
        match (self.index(1, 0), self.index(0, 1)) {
            (Some(h), Some(v)) => Ok((h, v)),
            _ => Err(EdrError::input("cutoff 0 has no single-photon sector")),
        }
    }
}

/// Quantum Stokes operator `s_index` on the truncated space.
///
/// `s0 = n_x + n_y`, `s1 = n_x - n_y`, `s2 = a_x^dag a_y + a_x a_y^dag`,
/// `s3 = -i (a_x^dag a_y - a_x a_y^dag)`.
pub fn stokes_operator(index: usize, space: &FockSpace) -> Result<ComplexMatrix> {
    let nx = space.number(Mode::X);
    let ny = space.number(Mode::Y);
    let ax = space.annihilation(Mode::X);
    let ay = space.annihilation(Mode::Y);
    let axd = ax.adjoint();
    let ayd = ay.adjoint();
    let out = match index {
        0 => &nx + &ny,
        1 => &nx - &ny,
        2 => &(&axd * &ay) + &(&ax * &ayd),
        3 => (&(&axd * &ay) - &(&ax * &ayd)).scale(-I),
        _ => return Err(EdrError::input(format!("Stokes index {index} is not in 0..=3"))),
    };
    Ok(out)
}

/// 2x2 block of `x` on `{|1,0>, |0,1>}`.
pub fn restrict_to_single_photon(x: &ComplexMatrix, space: &FockSpace) -> Result<ComplexMatrix> {
    if x.rows() != space.dim() || x.cols() != space.dim() {
        return Err(EdrError::dim(format!(
            "operator is {}x{}, Fock space has dimension {}",
            x.rows(),
            x.cols(),
            space.dim()
        )));
    }
    let (h, v) = space.single_photon_indices()?;
    let idx = [h, v];
    Ok(ComplexMatrix::from_fn(2, 2, |i, j| x[(idx[i], idx[j])]))
}
