//! Small dense complex linear algebra.
//!
//! Everything in this crate lives on Hilbert spaces of dimension at most a
//! few dozen, so matrices are plain row-major `Vec<Complex64>` and the
//! algorithms favour robustness over speed. The Hermitian eigensolver is a
//! cyclic complex Jacobi iteration with a closed form for the 2x2 case.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{EdrError, Result};

/// Largest dimension a tensor product may produce.
pub const D_MAX: usize = 64;

/// Absolute entrywise tolerance for Hermiticity and equality checks.
pub const ENTRY_TOL: f64 = 1e-10;

/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_GAP: f64 = 1e-8;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Which factor of a bipartite operator survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(EdrError::dim("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(EdrError::dim(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Real-entried matrix from row-major values.
    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, values.iter().map(|&v| c(v, 0.0)).collect())
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
    }

    /// Column vector (ket).
    pub fn column(entries: &[Complex64]) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
    }

    /// `|u><v|`
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// `|v><v|`
    pub fn projector(v: &[Complex64]) -> Self {
        Self::outer(v, v)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column_vec(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * k).collect(),
        }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(c(k, 0.0))
    }

    /// Checked matrix product.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(EdrError::dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// `X^dagger * self * X`
    pub fn conjugate_by(&self, x: &Self) -> Self {
        &(&x.adjoint() * self) * x
    }

    /// `X * self * X^dagger`
    pub fn sandwich(&self, x: &Self) -> Self {
        &(x * self) * &x.adjoint()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols) && self.max_abs_diff(other) <= tol
    }

    /// `max |X - X^dagger|` entrywise; infinite for non-square input.
    pub fn max_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.max_asymmetry() <= ENTRY_TOL
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `(X + X^dagger) / 2`
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sum");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch in difference"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// `[A, B] = AB - BA`
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    &(a * b) - &(b * a)
}

/// `Tr(rho X)`
pub fn expectation(rho: &ComplexMatrix, x: &ComplexMatrix) -> Complex64 {
    assert_eq!(rho.rows, x.cols, "expectation shape mismatch");
    assert_eq!(rho.cols, x.rows, "expectation shape mismatch");
    let mut acc = ZERO;
    for i in 0..rho.rows {
        for k in 0..rho.cols {
            acc += rho[(i, k)] * x[(k, i)];
        }
    }
    acc
}

/// Kronecker product; row index of the result is `i_a * rows_b + i_b`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows.checked_mul(b.rows).filter(|&r| r <= D_MAX);
    let cols = a.cols.checked_mul(b.cols).filter(|&c| c <= D_MAX);
    let (Some(rows), Some(cols)) = (rows, cols) else {
        return Err(EdrError::dim(format!(
            "tensor product of {}x{} and {}x{} exceeds d_max = {D_MAX}",
            a.rows, a.cols, b.rows, b.cols
        )));
    };
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
        a[(i / b.rows, j / b.cols)] * b[(i % b.rows, j % b.cols)]
    }))
}

/// Trace out one factor of an operator on a `d1 * d2` dimensional space.
pub fn partial_trace(x: &ComplexMatrix, dims: (usize, usize), keep: Keep) -> Result<ComplexMatrix> {
    let (d1, d2) = dims;
    if !x.is_square() || x.rows != d1 * d2 {
        return Err(EdrError::dim(format!(
            "partial trace over ({d1},{d2}) needs a {0}x{0} matrix, got {1}x{2}",
            d1 * d2,
            x.rows,
            x.cols
        )));
    }
    let out = match keep {
        Keep::First => ComplexMatrix::from_fn(d1, d1, |i, j| (0..d2).map(|k| x[(i * d2 + k, j * d2 + k)]).sum()),
        Keep::Second => ComplexMatrix::from_fn(d2, d2, |i, j| (0..d1).map(|k| x[(k * d2 + i, k * d2 + j)]).sum()),
    };
    Ok(out)
}

/// One eigenpair of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<Complex64>,
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
///
/// Vectors belonging to a degenerate cluster are orthonormal but otherwise
/// arbitrary; callers should only rely on the spectral projectors there.
pub fn hermitian_eig(x: &ComplexMatrix) -> Result<Vec<EigenPair>> {
    let asym = x.max_asymmetry();
    if asym > ENTRY_TOL {
        return Err(EdrError::NotHermitian { max_asymmetry: asym });
    }
    let h = x.hermitian_part();
    let mut pairs = if h.rows == 2 { eig_2x2(&h) } else { jacobi_eig(h) };
    pairs.sort_by(|a, b| b.value.total_cmp(&a.value));
    Ok(pairs)
}

fn normalized(v: [Complex64; 2]) -> Vec<Complex64> {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    vec![v[0] / n, v[1] / n]
}

fn eig_2x2(h: &ComplexMatrix) -> Vec<EigenPair> {
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    let b = h[(0, 1)];
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = (half * half + b.norm_sqr()).sqrt();
    let (hi, lo) = (mean + r, mean - r);

    if b.norm() <= f64::EPSILON * (a.abs() + d.abs()).max(1.0) {
        // Already diagonal.
        let e0 = vec![ONE, ZERO];
        let e1 = vec![ZERO, ONE];
        return if a >= d {
            vec![EigenPair { value: a, vector: e0 }, EigenPair { value: d, vector: e1 }]
        } else {
            vec![EigenPair { value: d, vector: e1 }, EigenPair { value: a, vector: e0 }]
        };
    }

    // (A - lambda) v = 0 has solutions (b, lambda - a) and (lambda - d, conj b);
    // take whichever is better conditioned.
    let vec_for = |lam: f64| {
        let u = [b, c(lam - a, 0.0)];
        let w = [c(lam - d, 0.0), b.conj()];
        let nu = u[0].norm_sqr() + u[1].norm_sqr();
        let nw = w[0].norm_sqr() + w[1].norm_sqr();
        normalized(if nu >= nw { u } else { w })
    };
    vec![
        EigenPair {
            value: hi,
            vector: vec_for(hi),
        },
        EigenPair {
            value: lo,
            vector: vec_for(lo),
        },
    ]
}

fn jacobi_eig(mut a: ComplexMatrix) -> Vec<EigenPair> {
    let n = a.rows;
    let mut v = ComplexMatrix::identity(n);
    let scale = a.fro_norm().max(1.0);
    let threshold = 1e-16 * scale;

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= threshold * 1e-3 {
                    continue;
                }
                // Phase-rotate q so the pivot is real, then apply a real Jacobi rotation.
                let phase = (apq / mag).conj();
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // J = diag(1, phase) * [[c, s], [-s, c]] on the (p, q) plane.
                let jpp = c(cs, 0.0);
                let jpq = c(sn, 0.0);
                let jqp = phase * -sn;
                let jqq = phase * cs;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = c(a[(p, p)].re, 0.0);
                a[(q, q)] = c(a[(q, q)].re, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    (0..n)
        .map(|j| EigenPair {
            value: a[(j, j)].re,
            vector: v.column_vec(j),
        })
        .collect()
}

/// `f(H) = sum_j f(lambda_j) |v_j><v_j|` for Hermitian `H`.
pub fn hermitian_map(x: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let n = x.rows;
    let mut out = ComplexMatrix::zeros(n, n);
    for pair in hermitian_eig(x)? {
        let w = f(pair.value);
        if w == 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += pair.vector[i] * pair.vector[j].conj() * w;
            }
        }
    }
    Ok(out)
}

/// Square root of a positive semidefinite matrix.
///
/// Eigenvalues within rounding of zero (relative to the spectral radius) are
/// treated as exact zeros; otherwise `sqrt` would turn 1e-17 noise into 3e-9.
pub fn psd_sqrt(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let pairs = hermitian_eig(x)?;
    let radius = pairs.iter().fold(0.0f64, |m, p| m.max(p.value.abs()));
    let floor = 64.0 * f64::EPSILON * x.rows as f64 * radius;
    let n = x.rows;
    let mut out = ComplexMatrix::zeros(n, n);
    for pair in pairs.iter().filter(|p| p.value > floor) {
        let w = pair.value.sqrt();
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += pair.vector[i] * pair.vector[j].conj() * w;
            }
        }
    }
    Ok(out)
}

/// `|X| = (X^dagger X)^{1/2}`
pub fn operator_abs(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !x.is_square() {
        return Err(EdrError::dim(format!(
            "operator_abs needs a square matrix, got {}x{}",
            x.rows, x.cols
        )));
    }
    let gram = (&x.adjoint() * x).hermitian_part();
    psd_sqrt(&gram)
}

/// `Tr |X|`
pub fn trace_norm(x: &ComplexMatrix) -> Result<f64> {
    Ok(operator_abs(x)?.trace().re)
}

/// Reconstruct `sum_j lambda_j v_j v_j^dagger` from eigenpairs.
pub fn reconstruct(pairs: &[EigenPair]) -> ComplexMatrix {
    let n = pairs.first().map_or(0, |p| p.vector.len());
    let mut out = ComplexMatrix::zeros(n, n);
    for p in pairs {
        out = &out + &ComplexMatrix::projector(&p.vector).scale_real(p.value);
    }
    out
}
