use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default relative tolerance for symmetry-class checks (scaled by the Frobenius norm).
pub const CLASS_TOLERANCE: f64 = 1e-12;

/// Square dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix order must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries; the entry count must be a positive square.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("matrix order must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<const N: usize>(rows: [[Complex64; N]; N]) -> Self {
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self { dim: N, data }
    }

    pub fn from_real_rows<const N: usize>(rows: [[f64; N]; N]) -> Self {
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        Self { dim: N, data }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Outer product `a b^H`.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        assert_eq!(a.len(), b.len());
        let dim = a.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = a[i] * b[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn conj_transpose(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(j, i)] = self[(i, j)];
            }
        }
        m
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.data.iter().all(|z| z.im.abs() <= tol)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "vector length must match matrix order");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Largest entrywise deviation from `self == self^H`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Largest deviation from being real and equal to the transpose.
    pub fn real_symmetric_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                dev = dev.max(self[(i, j)].im.abs());
                dev = dev.max((self[(i, j)].re - self[(j, i)].re).abs());
            }
        }
        dev
    }

    /// Determinant by LU with partial pivoting.
    pub fn determinant(&self) -> Complex64 {
        let n = self.dim;
        let mut a = self.clone();
        let mut det = ONE;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| a[(r, col)].norm().total_cmp(&a[(s, col)].norm()))
                .unwrap_or(col);
            if a[(pivot, col)] == ZERO {
                return ZERO;
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let d = a[(col, col)];
            det *= d;
            for row in (col + 1)..n {
                let factor = a[(row, col)] / d;
                for j in col..n {
                    let v = a[(col, j)];
                    a[(row, j)] -= factor * v;
                }
            }
        }
        det
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:>12.5e}{:+.5e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Symmetry class of a matrix or matrix family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryClass {
    RealSymmetric,
    Hermitian,
    General,
}

impl SymmetryClass {
    pub fn name(self) -> &'static str {
        match self {
            SymmetryClass::RealSymmetric => "real-symmetric",
            SymmetryClass::Hermitian => "Hermitian",
            SymmetryClass::General => "general",
        }
    }

    /// Deviation of `m` from this class; always zero for `General`.
    pub fn deviation(self, m: &ComplexMatrix) -> f64 {
        match self {
            SymmetryClass::RealSymmetric => m.real_symmetric_deviation(),
            SymmetryClass::Hermitian => m.hermitian_deviation(),
            SymmetryClass::General => 0.0,
        }
    }

    /// Checks `m` against the class at `CLASS_TOLERANCE * ||m||_F`.
    pub fn check(self, m: &ComplexMatrix) -> Result<()> {
        let deviation = self.deviation(m);
        if deviation > CLASS_TOLERANCE * m.frobenius_norm() {
            Err(Error::ClassViolation {
                class: self.name(),
                deviation,
            })
        } else {
            Ok(())
        }
    }

    /// Whether eigenvalues are guaranteed real.
    pub fn is_self_adjoint(self) -> bool {
        !matches!(self, SymmetryClass::General)
    }
}

/// Splits `m` into its Hermitian and anti-Hermitian parts `(H, N)`.
///
/// Both parts are exactly (anti-)Hermitian; `H + N` recovers `m` to within one ulp.
pub fn hermitian_split(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.dim();
    let mut herm = ComplexMatrix::zeros(n);
    let mut anti = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let a = m[(i, j)];
            let b = m[(j, i)].conj();
            herm[(i, j)] = (a + b) * 0.5;
            anti[(i, j)] = (a - b) * 0.5;
        }
    }
    (herm, anti)
}

/// The two eigenvalues of a 3x3 matrix with a known zero eigenvalue, from traces.
pub fn two_nonzero_eigs_trace(a: &ComplexMatrix) -> (Complex64, Complex64) {
    assert_eq!(a.dim(), 3, "trace formula applies to 3x3 matrices");
    let tr = a.trace();
    let tr2 = (a * a).trace();
    let root = (tr2 * 2.0 - tr * tr).sqrt();
    ((tr + root) * 0.5, (tr - root) * 0.5)
}

/// Inner product `(u, v) = sum u_i conj(v_i)`.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn real_vector(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Pairs two candidate values with two reference values by minimal total distance.
///
/// Returns the candidates reordered to line up with `reference`.
pub fn match_pairs(
    candidate: (Complex64, Complex64),
    reference: (Complex64, Complex64),
) -> (Complex64, Complex64) {
    let straight = (candidate.0 - reference.0).norm() + (candidate.1 - reference.1).norm();
    let swapped = (candidate.1 - reference.0).norm() + (candidate.0 - reference.1).norm();
    if swapped < straight {
        (candidate.1, candidate.0)
    } else {
        candidate
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn from_row_major_rejects_bad_lengths() {
        assert!(ComplexMatrix::from_row_major(2, vec![ZERO; 3]).is_err());
        assert!(ComplexMatrix::from_row_major(0, vec![]).is_err());
        assert!(ComplexMatrix::from_row_major(2, vec![ZERO; 4]).is_ok());
    }

    #[test]
    fn trace_formula_on_diagonal() {
        let a = ComplexMatrix::from_real_rows([[0.5, 0.0, 0.0], [0.0, 0.4, 0.0], [0.0, 0.0, 0.0]]);
        let (p, m) = two_nonzero_eigs_trace(&a);
        assert!((p - c(0.5, 0.0)).norm() < 1e-15);
        assert!((m - c(0.4, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn split_of_real_symmetric_is_all_hermitian() {
        let a = ComplexMatrix::from_real_rows([[1.0, 2.0], [2.0, -3.0]]);
        let (h, n) = hermitian_split(&a);
        assert_eq!(h, a);
        assert_eq!(n, ComplexMatrix::zeros(2));
    }

    #[test]
    fn split_of_imaginary_symmetric_is_all_anti_hermitian() {
        let a = ComplexMatrix::from_rows([[c(0.0, 3.0), c(0.0, 2.0)], [c(0.0, 2.0), c(0.0, -1.0)]]);
        let (h, n) = hermitian_split(&a);
        assert_eq!(h, ComplexMatrix::zeros(2));
        assert_eq!(n, a);
    }

    #[test]
    fn class_checks() {
        let herm =
            ComplexMatrix::from_rows([[c(1.0, 0.0), c(0.0, 2.0)], [c(0.0, -2.0), c(3.0, 0.0)]]);
        assert!(SymmetryClass::Hermitian.check(&herm).is_ok());
        assert!(SymmetryClass::RealSymmetric.check(&herm).is_err());
        assert!(SymmetryClass::General.check(&herm).is_ok());
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let a = ComplexMatrix::from_rows([
            [c(1.0, 1.0), c(2.0, 0.0), c(0.0, -1.0)],
            [c(0.5, 0.0), c(-1.0, 2.0), c(3.0, 0.0)],
            [c(0.0, 1.0), c(1.0, 0.0), c(2.0, -0.5)],
        ]);
        let m = |i: usize, j: usize| a[(i, j)];
        let cof = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
            - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
        assert!((a.determinant() - cof).norm() < 1e-13);
    }

    #[test]
    fn pairing_swaps_when_closer() {
        let (a, b) = match_pairs((c(1.0, 0.0), c(2.0, 0.0)), (c(2.1, 0.0), c(0.9, 0.0)));
        assert_eq!(a, c(2.0, 0.0));
        assert_eq!(b, c(1.0, 0.0));
    }
}
