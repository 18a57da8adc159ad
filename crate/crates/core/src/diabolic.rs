//! Diabolic points of parameterized matrix families and their first-order
//! splitting data.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{inner, norm, ComplexMatrix, SymmetryClass};

/// Relative step for central differences: `h = FD_STEP * max(1, |p_k|)`.
pub const FD_STEP: f64 = 1e-6;

/// Allowed relative change between the `h` and `h/2` central differences.
pub const FD_CHECK_TOLERANCE: f64 = 1e-5;

/// Both eigenvector ratio forms below this magnitude mean the direction is undetermined.
pub const DEGENERATE_RATIO: f64 = 1e-14;

/// A smooth map from real parameters to square complex matrices.
///
/// Implementations must be safe to evaluate concurrently.
pub trait MatrixFamily: Send + Sync {
    fn n_params(&self) -> usize;

    fn dim(&self) -> usize;

    fn class(&self) -> SymmetryClass;

    fn eval(&self, p: &[f64]) -> ComplexMatrix;

    /// `dA/dp_k` at `p`. Defaults to checked central differences.
    fn derivative(&self, p: &[f64], k: usize) -> Result<ComplexMatrix> {
        central_difference(self, p, k)
    }
}

/// Central difference of `fam` along parameter `k`, self-checked against the
/// half-step estimate.
pub fn central_difference<F: MatrixFamily + ?Sized>(
    fam: &F,
    p: &[f64],
    k: usize,
) -> Result<ComplexMatrix> {
    let h = FD_STEP * p[k].abs().max(1.0);
    let coarse = central_step(fam, p, k, h);
    let fine = central_step(fam, p, k, 0.5 * h);
    let change = (&coarse - &fine).frobenius_norm();
    let scale = fine.frobenius_norm().max(1.0);
    if !change.is_finite() || change > FD_CHECK_TOLERANCE * scale {
        return Err(Error::DerivativeFailure { param: k, change });
    }
    Ok(fine)
}

fn central_step<F: MatrixFamily + ?Sized>(fam: &F, p: &[f64], k: usize, h: f64) -> ComplexMatrix {
    let mut plus = p.to_vec();
    let mut minus = p.to_vec();
    plus[k] += h;
    minus[k] -= h;
    (&fam.eval(&plus) - &fam.eval(&minus)).scale_real(0.5 / h)
}

type EvalFn = Box<dyn Fn(&[f64]) -> ComplexMatrix + Send + Sync>;
type DerivFn = Box<dyn Fn(&[f64], usize) -> ComplexMatrix + Send + Sync>;

/// A family defined by closures, with an optional analytic derivative.
pub struct FnFamily {
    n_params: usize,
    dim: usize,
    class: SymmetryClass,
    eval: EvalFn,
    deriv: Option<DerivFn>,
}

impl FnFamily {
    pub fn new(
        n_params: usize,
        dim: usize,
        class: SymmetryClass,
        eval: impl Fn(&[f64]) -> ComplexMatrix + Send + Sync + 'static,
    ) -> Self {
        Self {
            n_params,
            dim,
            class,
            eval: Box::new(eval),
            deriv: None,
        }
    }

    pub fn with_derivative(
        mut self,
        deriv: impl Fn(&[f64], usize) -> ComplexMatrix + Send + Sync + 'static,
    ) -> Self {
        self.deriv = Some(Box::new(deriv));
        self
    }
}

impl MatrixFamily for FnFamily {
    fn n_params(&self) -> usize {
        self.n_params
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn class(&self) -> SymmetryClass {
        self.class
    }

    fn eval(&self, p: &[f64]) -> ComplexMatrix {
        (self.eval)(p)
    }

    fn derivative(&self, p: &[f64], k: usize) -> Result<ComplexMatrix> {
        match &self.deriv {
            Some(d) => Ok(d(p, k)),
            None => central_difference(self, p, k),
        }
    }
}

/// `A(p) = base + sum_k p_k slopes[k]`, with exact derivatives.
#[derive(Debug, Clone)]
pub struct AffineFamily {
    base: ComplexMatrix,
    slopes: Vec<ComplexMatrix>,
    class: SymmetryClass,
}

impl AffineFamily {
    pub fn new(
        base: ComplexMatrix,
        slopes: Vec<ComplexMatrix>,
        class: SymmetryClass,
    ) -> Result<Self> {
        if slopes.is_empty() {
            return Err(Error::InvalidInput(
                "family needs at least one parameter".into(),
            ));
        }
        class.check(&base)?;
        for s in &slopes {
            if s.dim() != base.dim() {
                return Err(Error::DimensionMismatch {
                    expected: base.dim(),
                    actual: s.dim(),
                });
            }
            class.check(s)?;
        }
        Ok(Self {
            base,
            slopes,
            class,
        })
    }

    pub fn base(&self) -> &ComplexMatrix {
        &self.base
    }
}

impl MatrixFamily for AffineFamily {
    fn n_params(&self) -> usize {
        self.slopes.len()
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn class(&self) -> SymmetryClass {
        self.class
    }

    fn eval(&self, p: &[f64]) -> ComplexMatrix {
        self.slopes
            .iter()
            .zip(p)
            .fold(self.base.clone(), |acc, (s, &pk)| &acc + &s.scale_real(pk))
    }

    fn derivative(&self, _p: &[f64], k: usize) -> Result<ComplexMatrix> {
        Ok(self.slopes[k].clone())
    }
}

/// A double eigenvalue `lambda0` of `A(p0)` with an orthonormal eigenvector pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DiabolicPoint {
    pub p0: Vec<f64>,
    pub lambda0: f64,
    pub u1: Vec<Complex64>,
    pub u2: Vec<Complex64>,
}

impl DiabolicPoint {
    pub fn new(p0: Vec<f64>, lambda0: f64, u1: Vec<Complex64>, u2: Vec<Complex64>) -> Self {
        Self {
            p0,
            lambda0,
            u1,
            u2,
        }
    }

    /// Rotates the basis within the eigenspace:
    /// `u1' = cos t u1 + sin t e^{i phi} u2`, `u2' = -sin t e^{-i phi} u1 + cos t u2`.
    pub fn rotated(&self, theta: f64, phi: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let w = Complex64::from_polar(1.0, phi);
        let u1 = self
            .u1
            .iter()
            .zip(&self.u2)
            .map(|(a, b)| a * c + w * b * s)
            .collect();
        let u2 = self
            .u1
            .iter()
            .zip(&self.u2)
            .map(|(a, b)| -(w.conj() * a * s) + b * c)
            .collect();
        Self {
            u1,
            u2,
            ..self.clone()
        }
    }

    /// Same point with `u2` negated.
    pub fn with_u2_negated(&self) -> Self {
        Self {
            u2: self.u2.iter().map(|z| -z).collect(),
            ..self.clone()
        }
    }

    pub fn is_real_basis(&self) -> bool {
        self.u1.iter().chain(&self.u2).all(|z| z.im == 0.0)
    }

    pub fn dim(&self) -> usize {
        self.u1.len()
    }
}

/// The vectors `f_ij` with components `f_ij^k = (dA/dp_k u_i, u_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingData {
    pub class: SymmetryClass,
    pub f11: Vec<Complex64>,
    pub f22: Vec<Complex64>,
    pub f12: Vec<Complex64>,
    pub f21: Vec<Complex64>,
}

impl CouplingData {
    pub fn n_params(&self) -> usize {
        self.f11.len()
    }

    pub fn max_norm(&self) -> f64 {
        [&self.f11, &self.f22, &self.f12, &self.f21]
            .iter()
            .map(|f| norm(f))
            .fold(0.0, f64::max)
    }

    /// Restricts to the structure of `class`, e.g. drops roundoff imaginary parts.
    fn enforce_class(mut self) -> Self {
        match self.class {
            SymmetryClass::RealSymmetric => {
                for f in [&mut self.f11, &mut self.f22] {
                    f.iter_mut().for_each(|z| *z = Complex64::new(z.re, 0.0));
                }
                for (a, b) in self.f12.iter_mut().zip(self.f21.iter_mut()) {
                    let m = Complex64::new(0.5 * (a.re + b.re), 0.0);
                    *a = m;
                    *b = m;
                }
            }
            SymmetryClass::Hermitian => {
                for f in [&mut self.f11, &mut self.f22] {
                    f.iter_mut().for_each(|z| *z = Complex64::new(z.re, 0.0));
                }
                for (a, b) in self.f12.iter_mut().zip(self.f21.iter_mut()) {
                    let m = (*a + b.conj()) * 0.5;
                    *a = m;
                    *b = m.conj();
                }
            }
            SymmetryClass::General => {}
        }
        self
    }

    fn class_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        match self.class {
            SymmetryClass::RealSymmetric => {
                for f in [&self.f11, &self.f22, &self.f12, &self.f21] {
                    for z in f {
                        dev = dev.max(z.im.abs());
                    }
                }
                for (a, b) in self.f12.iter().zip(&self.f21) {
                    dev = dev.max((a - b).norm());
                }
            }
            SymmetryClass::Hermitian => {
                for f in [&self.f11, &self.f22] {
                    for z in f {
                        dev = dev.max(z.im.abs());
                    }
                }
                for (a, b) in self.f12.iter().zip(&self.f21) {
                    dev = dev.max((a - b.conj()).norm());
                }
            }
            SymmetryClass::General => {}
        }
        dev
    }
}

/// `<f, dp>` for a real parameter increment.
pub fn pair(f: &[Complex64], dp: &[f64]) -> Complex64 {
    assert_eq!(f.len(), dp.len(), "parameter increment has wrong length");
    f.iter().zip(dp).map(|(z, &x)| z * x).sum()
}

/// True iff `u1, u2` are orthonormal and both residuals `||A(p0) u_i - lambda0 u_i||`
/// are within `tol`.
pub fn verify_diabolic<F: MatrixFamily + ?Sized>(fam: &F, dp: &DiabolicPoint, tol: f64) -> bool {
    if dp.p0.len() != fam.n_params() || dp.u1.len() != fam.dim() || dp.u2.len() != fam.dim() {
        return false;
    }
    let a0 = fam.eval(&dp.p0);
    let lambda = Complex64::new(dp.lambda0, 0.0);
    let residual = |u: &[Complex64]| {
        let au = a0.mul_vec(u);
        norm(
            &au.iter()
                .zip(u)
                .map(|(x, y)| x - lambda * y)
                .collect::<Vec<_>>(),
        )
    };
    let n11 = (inner(&dp.u1, &dp.u1) - 1.0).norm();
    let n22 = (inner(&dp.u2, &dp.u2) - 1.0).norm();
    let n12 = inner(&dp.u1, &dp.u2).norm();
    residual(&dp.u1) <= tol && residual(&dp.u2) <= tol && n11 <= tol && n22 <= tol && n12 <= tol
}

/// Coupling vectors `f_ij` at a diabolic point.
pub fn coupling_vectors<F: MatrixFamily + ?Sized>(
    fam: &F,
    dp: &DiabolicPoint,
) -> Result<CouplingData> {
    let n = fam.n_params();
    if dp.p0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: dp.p0.len(),
        });
    }
    let mut f11 = Vec::with_capacity(n);
    let mut f22 = Vec::with_capacity(n);
    let mut f12 = Vec::with_capacity(n);
    let mut f21 = Vec::with_capacity(n);
    for k in 0..n {
        let dk = fam.derivative(&dp.p0, k)?;
        let d1 = dk.mul_vec(&dp.u1);
        let d2 = dk.mul_vec(&dp.u2);
        f11.push(inner(&d1, &dp.u1));
        f22.push(inner(&d2, &dp.u2));
        f12.push(inner(&d1, &dp.u2));
        f21.push(inner(&d2, &dp.u1));
    }
    let class = match fam.class() {
        SymmetryClass::RealSymmetric if dp.is_real_basis() => SymmetryClass::RealSymmetric,
        SymmetryClass::RealSymmetric | SymmetryClass::Hermitian => SymmetryClass::Hermitian,
        SymmetryClass::General => SymmetryClass::General,
    };
    let raw = CouplingData {
        class,
        f11,
        f22,
        f12,
        f21,
    };
    let deviation = raw.class_deviation();
    if deviation > 1e-8 * raw.max_norm().max(1.0) {
        return Err(Error::ClassViolation {
            class: class.name(),
            deviation,
        });
    }
    Ok(raw.enforce_class())
}

/// The reduced 2x2 problem `lambda0 I + [[a11, a21], [a12, a22]]` on `span(u1, u2)`.
///
/// Entry `(j, i)` is `(A' u_i, u_j)`, so `a_ij` couples `u_i` into `u_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedProblem {
    pub lambda0: f64,
    pub a11: Complex64,
    pub a12: Complex64,
    pub a21: Complex64,
    pub a22: Complex64,
}

impl ReducedProblem {
    pub fn unperturbed(cd: &CouplingData, lambda0: f64, dp: &[f64]) -> Self {
        Self {
            lambda0,
            a11: pair(&cd.f11, dp),
            a12: pair(&cd.f12, dp),
            a21: pair(&cd.f21, dp),
            a22: pair(&cd.f22, dp),
        }
    }

    /// `(a11 - a22)^2 / 4 + a12 a21`.
    pub fn radicand(&self) -> Complex64 {
        let half = (self.a11 - self.a22) * 0.5;
        half * half + self.a12 * self.a21
    }

    /// `(lambda_+, lambda_-)` with the principal square root.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let mid = Complex64::new(self.lambda0, 0.0) + (self.a11 + self.a22) * 0.5;
        let root = self.radicand().sqrt();
        (mid + root, mid - root)
    }

    /// Coefficients `(alpha, beta)` of `alpha u1 + beta u2` for eigenvalue `lambda`,
    /// from whichever ratio form is better conditioned.
    pub fn coefficients(&self, lambda: Complex64) -> Result<(Complex64, Complex64)> {
        let shift = lambda - self.lambda0;
        let first = (self.a21, shift - self.a11);
        let second = (shift - self.a22, self.a12);
        let size = |(n, d): (Complex64, Complex64)| n.norm_sqr() + d.norm_sqr();
        let best = if size(first) >= size(second) {
            first
        } else {
            second
        };
        if best.0.norm() < DEGENERATE_RATIO && best.1.norm() < DEGENERATE_RATIO {
            return Err(Error::DegenerateDirection);
        }
        Ok(best)
    }

    /// Both ratio forms `(N1, D1, N2, D2)` of `alpha / beta`.
    pub fn ratio_forms(&self, lambda: Complex64) -> [Complex64; 4] {
        let shift = lambda - self.lambda0;
        [self.a21, shift - self.a11, shift - self.a22, self.a12]
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let l0 = Complex64::new(self.lambda0, 0.0);
        ComplexMatrix::from_rows([[l0 + self.a11, self.a21], [self.a12, l0 + self.a22]])
    }

    pub fn eigenvectors(&self, dp: &DiabolicPoint) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let (lp, lm) = self.eigenvalues();
        let build = |lambda| -> Result<Vec<Complex64>> {
            let (alpha, beta) = self.coefficients(lambda)?;
            let v: Vec<Complex64> = dp
                .u1
                .iter()
                .zip(&dp.u2)
                .map(|(a, b)| alpha * a + beta * b)
                .collect();
            Ok(gauge_fixed(v))
        };
        Ok((build(lp)?, build(lm)?))
    }
}

/// Unit norm with the first significant component rotated to be real positive.
pub fn gauge_fixed(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let nrm = norm(&v);
    if nrm == 0.0 {
        return v;
    }
    let lead = v
        .iter()
        .copied()
        .find(|z| z.norm() > 1e-8 * nrm)
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = lead.conj() / lead.norm();
    for z in &mut v {
        *z = *z * phase / nrm;
    }
    v
}

/// First-order eigenvalues `lambda_+-` at `p0 + delta`.
pub fn split_eigenvalues(
    cd: &CouplingData,
    dp: &DiabolicPoint,
    delta: &[f64],
) -> (Complex64, Complex64) {
    ReducedProblem::unperturbed(cd, dp.lambda0, delta).eigenvalues()
}

/// Zero-order eigenvectors `u_+-` at `p0 + delta`.
pub fn split_eigenvectors(
    cd: &CouplingData,
    dp: &DiabolicPoint,
    delta: &[f64],
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    ReducedProblem::unperturbed(cd, dp.lambda0, delta).eigenvectors(dp)
}

/// Angle between two complex directions, in radians.
pub fn vector_angle(a: &[Complex64], b: &[Complex64]) -> f64 {
    let c = inner(a, b).norm() / (norm(a) * norm(b));
    c.min(1.0).acos()
}
