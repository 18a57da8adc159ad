//! Optic axes of weakly absorbing, optically active biaxial crystals.
//!
//! Propagation along a unit direction `s` reduces to the projected problem
//! `P (eta_transp + eta_dichroic + eta_chiral) P` with `P = I - s s^T`, whose two
//! nonzero eigenvalues are `n^-2` for the two polarizations.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::diabolic::{CouplingData, DiabolicPoint, MatrixFamily};
use crate::error::{Error, Result};
use crate::linalg::{real_vector, ComplexMatrix, SymmetryClass};
use crate::perturb::PerturbationScalars;
use crate::unfold_symmetric::{classify, exceptional_xy, ClassificationReport, ExceptionalPair};

/// Symmetry tolerance for the dichroic and optical-activity tensors.
pub const TENSOR_SYMMETRY_TOLERANCE: f64 = 1e-14;

/// Allowed deviation of `||s||` from one.
pub const DIRECTION_TOLERANCE: f64 = 1e-14;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Inverse dielectric tensor `diag(eta) + i dichroic + eta_chiral(gamma s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DielectricModel {
    eta: [f64; 3],
    dichroic: [[f64; 3]; 3],
    gamma: [[Complex64; 3]; 3],
}

impl DielectricModel {
    pub fn new(eta: [f64; 3], dichroic: [[f64; 3]; 3], gamma: [[Complex64; 3]; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in i + 1..3 {
                let dev = (dichroic[i][j] - dichroic[j][i]).abs();
                if !(dev <= TENSOR_SYMMETRY_TOLERANCE) {
                    return Err(Error::AsymmetricTensor {
                        name: "dichroic",
                        row: i,
                        col: j,
                        deviation: dev,
                    });
                }
                let dev = (gamma[i][j] - gamma[j][i]).norm();
                if !(dev <= TENSOR_SYMMETRY_TOLERANCE) {
                    return Err(Error::AsymmetricTensor {
                        name: "gamma",
                        row: i,
                        col: j,
                        deviation: dev,
                    });
                }
            }
        }
        let finite = eta
            .iter()
            .chain(dichroic.iter().flatten())
            .all(|v| v.is_finite())
            && gamma.iter().flatten().all(|z| z.is_finite());
        if !finite {
            return Err(Error::InvalidInput("tensor entries must be finite".into()));
        }
        Ok(Self {
            eta,
            dichroic,
            gamma,
        })
    }

    /// A transparent, non-chiral crystal.
    pub fn transparent(eta: [f64; 3]) -> Result<Self> {
        Self::new(eta, [[0.0; 3]; 3], [[Complex64::new(0.0, 0.0); 3]; 3])
    }

    /// `eta = (0.5, 0.4, 0.1)` with weak absorption and real optical activity; the
    /// left pair of optic axes is absorption-dominated, the right pair chirality-dominated.
    pub fn example() -> Self {
        let d = [[3.0, 2.0, 0.0], [2.0, 3.0, 1.0], [0.0, 1.0, 3.0]];
        let g = [[3.0, 1.0, 2.0], [1.0, 3.0, 1.0], [2.0, 1.0, 3.0]];
        let dichroic = d.map(|row| row.map(|v| v / 200.0));
        let gamma = g.map(|row| row.map(|v| Complex64::new(v / 200.0, 0.0)));
        Self::new([0.5, 0.4, 0.1], dichroic, gamma).expect("example tensors are symmetric")
    }

    pub fn eta(&self) -> [f64; 3] {
        self.eta
    }

    /// Real coefficients of the dichroic tensor; the tensor itself is `i` times these.
    pub fn dichroic(&self) -> [[f64; 3]; 3] {
        self.dichroic
    }

    pub fn gamma(&self) -> [[Complex64; 3]; 3] {
        self.gamma
    }

    /// Same transparent part with the dichroic and optical-activity tensors scaled by `t`.
    pub fn with_perturbation_scale(&self, t: f64) -> Self {
        Self {
            eta: self.eta,
            dichroic: self.dichroic.map(|r| r.map(|v| v * t)),
            gamma: self.gamma.map(|r| r.map(|z| z * t)),
        }
    }

    pub fn check_biaxial(&self) -> Result<()> {
        let [a, b, c] = self.eta;
        if a > b && b > c {
            Ok(())
        } else {
            Err(Error::NotBiaxial(self.eta))
        }
    }

    /// Optical activity vector `g = gamma s`.
    pub fn activity_vector(&self, s: &[f64; 3]) -> [Complex64; 3] {
        std::array::from_fn(|i| (0..3).map(|j| self.gamma[i][j] * s[j]).sum())
    }

    fn chiral_tensor(&self, s: &[f64; 3]) -> ComplexMatrix {
        let [g1, g2, g3] = self.activity_vector(s);
        let z = Complex64::new(0.0, 0.0);
        ComplexMatrix::from_rows([[z, -g3, g2], [g3, z, -g1], [-g2, g1, z]]).scale(I)
    }

    fn dichroic_tensor(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(self.dichroic).scale(I)
    }
}

/// A real unit propagation direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    s: [f64; 3],
}

impl Direction {
    pub fn new(s: [f64; 3]) -> Result<Self> {
        let norm = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        if !((norm - 1.0).abs() <= DIRECTION_TOLERANCE) {
            return Err(Error::InvalidDirection { norm });
        }
        Ok(Self { s })
    }

    /// `(s1, s2, hemisphere * sqrt(1 - s1^2 - s2^2))`; `None` outside the unit disk.
    pub fn from_chart(s1: f64, s2: f64, hemisphere: f64) -> Option<Self> {
        let r2 = s1 * s1 + s2 * s2;
        if !(r2 <= 1.0) {
            return None;
        }
        Some(Self {
            s: [s1, s2, hemisphere.signum() * (1.0 - r2).sqrt()],
        })
    }

    pub fn s(&self) -> [f64; 3] {
        self.s
    }

    /// Sign of `s3`.
    pub fn hemisphere(&self) -> f64 {
        if self.s[2] < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn opposite(&self) -> Self {
        Self {
            s: self.s.map(|v| -v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixPart {
    Transparent,
    Perturbation,
    Full,
}

fn projector(s: &[f64; 3]) -> ComplexMatrix {
    let mut p = ComplexMatrix::identity(3);
    for i in 0..3 {
        for j in 0..3 {
            p[(i, j)] -= s[i] * s[j];
        }
    }
    p
}

/// `P T P` for the requested part `T` of the inverse dielectric tensor at `s`.
pub fn projected_matrix(
    model: &DielectricModel,
    s: &Direction,
    which: MatrixPart,
) -> ComplexMatrix {
    projected_at(model, &s.s, which)
}

fn projected_at(model: &DielectricModel, s: &[f64; 3], which: MatrixPart) -> ComplexMatrix {
    let p = projector(s);
    let transparent = || ComplexMatrix::from_diagonal(&real_vector(&model.eta));
    let perturbation = || &model.dichroic_tensor() + &model.chiral_tensor(s);
    let inner = match which {
        MatrixPart::Transparent => transparent(),
        MatrixPart::Perturbation => perturbation(),
        MatrixPart::Full => &transparent() + &perturbation(),
    };
    &(&p * &inner) * &p
}

/// Which of the four optic axes: signs of `S1` and `S3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AxisSigns {
    pub s1_positive: bool,
    pub s3_positive: bool,
}

impl AxisSigns {
    pub const ALL: [AxisSigns; 4] = [
        AxisSigns::new(true, true),
        AxisSigns::new(true, false),
        AxisSigns::new(false, true),
        AxisSigns::new(false, false),
    ];

    pub const fn new(s1_positive: bool, s3_positive: bool) -> Self {
        Self {
            s1_positive,
            s3_positive,
        }
    }

    pub fn opposite(self) -> Self {
        Self::new(!self.s1_positive, !self.s3_positive)
    }
}

impl fmt::Display for AxisSigns {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |b: bool| if b { '+' } else { '-' };
        write!(f, "{}{}", c(self.s1_positive), c(self.s3_positive))
    }
}

impl FromStr for AxisSigns {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let sign = |c: char| match c {
            '+' => Ok(true),
            '-' => Ok(false),
            _ => Err(Error::InvalidInput(format!(
                "axis selector must be one of ++, +-, -+, -- (got {text:?})"
            ))),
        };
        let mut chars = text.chars();
        match (chars.next(), chars.next(), chars.next()) {
            (Some(a), Some(b), None) => Ok(Self::new(sign(a)?, sign(b)?)),
            _ => Err(Error::InvalidInput(format!(
                "axis selector must be one of ++, +-, -+, -- (got {text:?})"
            ))),
        }
    }
}

/// A diabolic direction of the transparent crystal, with double eigenvalue `eta2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticAxis {
    pub s0: Direction,
    pub lambda0: f64,
    pub signs: AxisSigns,
}

impl OpticAxis {
    pub fn s1(&self) -> f64 {
        self.s0.s[0]
    }

    pub fn s3(&self) -> f64 {
        self.s0.s[2]
    }

    /// Parameter point `(S1, 0)`.
    pub fn p0(&self) -> [f64; 2] {
        [self.s1(), 0.0]
    }

    /// The point with basis `u1 = (0, 1, 0)`, `u2 = (S3, 0, -S1)`.
    pub fn diabolic_point(&self) -> DiabolicPoint {
        DiabolicPoint::new(
            self.p0().to_vec(),
            self.lambda0,
            real_vector(&[0.0, 1.0, 0.0]),
            real_vector(&[self.s3(), 0.0, -self.s1()]),
        )
    }

    pub fn family(&self, model: &DielectricModel) -> CrystalFamily {
        CrystalFamily::new(model.clone(), self.s0.hemisphere())
    }
}

/// The four optic axes in the order `++, +-, -+, --`.
pub fn optic_axes(model: &DielectricModel) -> Result<[OpticAxis; 4]> {
    model.check_biaxial()?;
    let [e1, e2, e3] = model.eta;
    let a1 = ((e1 - e2) / (e1 - e3)).sqrt();
    let a3 = (1.0 - a1 * a1).sqrt();
    Ok(AxisSigns::ALL.map(|signs| {
        let s1 = if signs.s1_positive { a1 } else { -a1 };
        let s3 = if signs.s3_positive { a3 } else { -a3 };
        OpticAxis {
            s0: Direction { s: [s1, 0.0, s3] },
            lambda0: e2,
            signs,
        }
    }))
}

pub fn optic_axis(model: &DielectricModel, signs: AxisSigns) -> Result<OpticAxis> {
    let axes = optic_axes(model)?;
    Ok(*axes
        .iter()
        .find(|a| a.signs == signs)
        .expect("all sign pairs are present"))
}

/// Transparent projected matrix as a function of `p = (s1, s2)` on one hemisphere,
/// with the chart derivative in closed form.
#[derive(Debug, Clone)]
pub struct CrystalFamily {
    model: DielectricModel,
    hemisphere: f64,
}

impl CrystalFamily {
    pub fn new(model: DielectricModel, hemisphere: f64) -> Self {
        Self {
            model,
            hemisphere: if hemisphere < 0.0 { -1.0 } else { 1.0 },
        }
    }

    pub fn model(&self) -> &DielectricModel {
        &self.model
    }

    /// The direction at `p`; the third component is clamped at zero outside the disk.
    pub fn direction(&self, p: &[f64]) -> [f64; 3] {
        let r2 = p[0] * p[0] + p[1] * p[1];
        [p[0], p[1], self.hemisphere * (1.0 - r2).max(0.0).sqrt()]
    }

    pub fn matrix(&self, p: &[f64], which: MatrixPart) -> ComplexMatrix {
        projected_at(&self.model, &self.direction(p), which)
    }
}

impl MatrixFamily for CrystalFamily {
    fn n_params(&self) -> usize {
        2
    }

    fn dim(&self) -> usize {
        3
    }

    fn class(&self) -> SymmetryClass {
        SymmetryClass::RealSymmetric
    }

    fn eval(&self, p: &[f64]) -> ComplexMatrix {
        self.matrix(p, MatrixPart::Transparent)
    }

    fn derivative(&self, p: &[f64], k: usize) -> Result<ComplexMatrix> {
        let s = self.direction(p);
        if s[2] == 0.0 {
            return Err(Error::DerivativeFailure {
                param: k,
                change: f64::INFINITY,
            });
        }
        let mut ds = [0.0; 3];
        ds[k] = 1.0;
        ds[2] = -p[k] / s[2];
        // dP = -(ds s^T + s ds^T)
        let mut dp = ComplexMatrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                dp[(i, j)] = Complex64::new(-(ds[i] * s[j] + s[i] * ds[j]), 0.0);
            }
        }
        let p_mat = projector(&s);
        let e = ComplexMatrix::from_diagonal(&real_vector(&self.model.eta));
        Ok(&(&(&dp * &e) * &p_mat) + &(&(&p_mat * &e) * &dp))
    }
}

/// Closed-form coupling vectors at an optic axis.
pub fn axis_coupling(model: &DielectricModel, axis: &OpticAxis) -> CouplingData {
    let [e1, _, e3] = model.eta;
    let (s1, s3) = (axis.s1(), axis.s3());
    let r = |a: f64, b: f64| vec![Complex64::new(a, 0.0), Complex64::new(b, 0.0)];
    let f12 = r(0.0, (e3 - e1) * s1 * s3);
    CouplingData {
        class: SymmetryClass::RealSymmetric,
        f11: r(0.0, 0.0),
        f22: r(2.0 * (e3 - e1) * s1, 0.0),
        f21: f12.clone(),
        f12,
    }
}

/// Closed-form perturbation scalars at an optic axis.
pub fn axis_perturbation(model: &DielectricModel, axis: &OpticAxis) -> PerturbationScalars {
    let d = model.dichroic;
    let g = model.gamma;
    let (s1, s3) = (axis.s1(), axis.s3());
    let eps11 = I * d[1][1];
    let eps22 = I * (d[0][0] * s3 * s3 - 2.0 * d[0][2] * s1 * s3 + d[2][2] * s1 * s1);
    let eps12 = -I * (g[0][0] * s1 + g[0][2] * s3 + d[1][2]) * s1
        + I * (-(g[0][2] * s1) - g[2][2] * s3 + d[0][1]) * s3;
    let eps21 = -I * (-(g[0][0] * s1) - g[0][2] * s3 + d[1][2]) * s1
        + I * (g[0][2] * s1 + g[2][2] * s3 + d[0][1]) * s3;
    let norm = projected_matrix(model, &axis.s0, MatrixPart::Perturbation).frobenius_norm();
    PerturbationScalars::from_eps([eps11, eps12, eps21, eps22], norm)
}

/// A singular axis, possibly outside the unit disk of the chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularAxis {
    pub s1: f64,
    pub s2: f64,
    /// `None` when `s1^2 + s2^2 > 1`.
    pub direction: Option<Direction>,
}

impl SingularAxis {
    pub fn is_valid(&self) -> bool {
        self.direction.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularAxes {
    pub a: SingularAxis,
    pub b: SingularAxis,
    pub pair: ExceptionalPair,
}

/// Singular axes near an absorption-dominated optic axis.
pub fn singular_axes(model: &DielectricModel, axis: &OpticAxis) -> Result<SingularAxes> {
    let ps = axis_perturbation(model, axis);
    let (xy_a, xy_b) = exceptional_xy(&ps)?;
    let [e1, _, e3] = model.eta;
    let (s1, s3) = (axis.s1(), axis.s3());
    let to_axis = |[x, y]: [f64; 2]| {
        let a1 = s1 + x / ((e1 - e3) * s1);
        let a2 = y / ((e3 - e1) * s1 * s3);
        SingularAxis {
            s1: a1,
            s2: a2,
            direction: Direction::from_chart(a1, a2, axis.s0.hemisphere()),
        }
    };
    let a = to_axis(xy_a);
    let b = to_axis(xy_b);
    Ok(SingularAxes {
        pair: ExceptionalPair {
            xy_a,
            xy_b,
            p_a: vec![a.s1, a.s2],
            p_b: vec![b.s1, b.s2],
            null_basis: Vec::new(),
        },
        a,
        b,
    })
}

/// The line `a s1 + b s2 = rhs` on which `Im c = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityLine {
    pub a: f64,
    pub b: f64,
    pub rhs: f64,
}

impl SingularityLine {
    pub fn residual(&self, p: [f64; 2]) -> f64 {
        self.a * p[0] + self.b * p[1] - self.rhs
    }

    /// Distance from `p` to the line.
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        self.residual(p).abs() / self.a.hypot(self.b)
    }

    /// Foot of the perpendicular from the origin and unit direction.
    pub fn point_direction(&self) -> ([f64; 2], [f64; 2]) {
        let n2 = self.a * self.a + self.b * self.b;
        let n = n2.sqrt();
        (
            [self.a * self.rhs / n2, self.b * self.rhs / n2],
            [-self.b / n, self.a / n],
        )
    }
}

pub fn singularity_line(model: &DielectricModel, axis: &OpticAxis) -> Result<SingularityLine> {
    let ps = axis_perturbation(model, axis);
    let [e1, _, e3] = model.eta;
    let (s1, s3) = (axis.s1(), axis.s3());
    let a = s1 * (e1 - e3) * ps.xi.im;
    let b = -s1 * s3 * (e1 - e3) * ps.eta.im;
    let scale = (e1 - e3) * ps.epsilon_norm;
    if a.hypot(b) <= 1e-14 * scale || a.hypot(b) == 0.0 {
        return Err(Error::DegenerateLine);
    }
    Ok(SingularityLine {
        a,
        b,
        rhs: a * s1 + ps.zeta.re * ps.zeta.im,
    })
}

/// Classification report for each optic axis, in the order of [`optic_axes`].
pub fn classify_crystal(model: &DielectricModel) -> Result<Vec<(OpticAxis, ClassificationReport)>> {
    Ok(optic_axes(model)?
        .into_iter()
        .map(|axis| (axis, classify(&axis_perturbation(model, &axis))))
        .collect())
}

/// `n = 1 / sqrt(lambda)` for a positive real eigenvalue.
pub fn refractive_index(lambda: f64) -> Option<f64> {
    (lambda > 0.0).then(|| 1.0 / lambda.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diabolic::{
        central_difference, coupling_vectors, split_eigenvalues, verify_diabolic, FnFamily,
    };
    use crate::linalg::{eig_exact, norm, two_nonzero_eigs_trace};
    use crate::perturb::perturbation_scalars;
    use crate::unfold_symmetric::Regime;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn left(model: &DielectricModel) -> OpticAxis {
        optic_axis(model, AxisSigns::new(false, true)).unwrap()
    }

    fn right(model: &DielectricModel) -> OpticAxis {
        optic_axis(model, AxisSigns::new(true, true)).unwrap()
    }

    #[test]
    fn asymmetric_tensors_are_rejected() {
        let mut d = [[0.0; 3]; 3];
        d[0][1] = 0.1;
        let zero = [[c(0.0, 0.0); 3]; 3];
        assert!(matches!(
            DielectricModel::new([0.5, 0.4, 0.1], d, zero),
            Err(Error::AsymmetricTensor {
                name: "dichroic",
                ..
            })
        ));
        let mut g = zero;
        g[2][1] = c(0.0, 0.1);
        assert!(matches!(
            DielectricModel::new([0.5, 0.4, 0.1], [[0.0; 3]; 3], g),
            Err(Error::AsymmetricTensor { name: "gamma", .. })
        ));
    }

    #[test]
    fn directions_must_be_unit() {
        assert!(Direction::new([1.0, 0.0, 0.0]).is_ok());
        assert!(matches!(
            Direction::new([1.0, 0.1, 0.0]),
            Err(Error::InvalidDirection { .. })
        ));
        assert!(Direction::from_chart(0.9, 0.9, 1.0).is_none());
    }

    #[test]
    fn axis_selector_round_trip() {
        for s in AxisSigns::ALL {
            assert_eq!(s.to_string().parse::<AxisSigns>().unwrap(), s);
        }
        assert!("+".parse::<AxisSigns>().is_err());
        assert!("+x".parse::<AxisSigns>().is_err());
    }

    #[test]
    fn vertical_direction_projects_out_third_axis() {
        let m = DielectricModel::example();
        let s = Direction::new([0.0, 0.0, 1.0]).unwrap();
        let a = projected_matrix(&m, &s, MatrixPart::Transparent);
        let expect =
            ComplexMatrix::from_real_rows([[0.5, 0.0, 0.0], [0.0, 0.4, 0.0], [0.0, 0.0, 0.0]]);
        assert_eq!((&a - &expect).max_abs(), 0.0);
    }

    #[test]
    fn projected_matrices_annihilate_direction() {
        let m = DielectricModel::example();
        for s in [[0.6, 0.0, 0.8], [0.48, 0.6, 0.64], [-0.36, 0.48, -0.8]] {
            let d = Direction::new(s).unwrap();
            for which in [
                MatrixPart::Transparent,
                MatrixPart::Perturbation,
                MatrixPart::Full,
            ] {
                let a = projected_matrix(&m, &d, which);
                assert!(norm(&a.mul_vec(&real_vector(&s))) <= 1e-15);
            }
            assert!(
                projected_matrix(&m, &d, MatrixPart::Transparent).real_symmetric_deviation()
                    <= 1e-16
            );
        }
    }

    #[test]
    fn axes_of_example_crystal() {
        let m = DielectricModel::example();
        let axes = optic_axes(&m).unwrap();
        for a in &axes {
            assert!((a.s1().abs() - 0.5).abs() < 1e-15);
            assert!((a.s3().abs() - SQRT3 / 2.0).abs() < 1e-15);
            assert_eq!(a.lambda0, 0.4);
            let t = projected_matrix(&m, &a.s0, MatrixPart::Transparent);
            let (p, q) = two_nonzero_eigs_trace(&t);
            assert!((p - 0.4).norm() < 1e-8 && (q - 0.4).norm() < 1e-8);
            let fam = a.family(&m);
            assert!(verify_diabolic(&fam, &a.diabolic_point(), 1e-14));
        }
        let other = optic_axes(&DielectricModel::transparent([2.0, 1.5, 1.0]).unwrap()).unwrap();
        assert!((other[0].s1() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn off_axis_point_is_not_diabolic() {
        let m = DielectricModel::example();
        let mut dp = left(&m).diabolic_point();
        dp.p0 = vec![0.3, 0.2];
        assert!(!verify_diabolic(&left(&m).family(&m), &dp, 1e-10));
    }

    #[test]
    fn uniaxial_is_rejected() {
        let m = DielectricModel::transparent([0.5, 0.5, 0.1]).unwrap();
        assert!(matches!(optic_axes(&m), Err(Error::NotBiaxial(_))));
    }

    #[test]
    fn opposite_directions_share_eigenvalues() {
        let m = DielectricModel::example();
        let d = Direction::new([0.48, 0.6, 0.64]).unwrap();
        for which in [MatrixPart::Transparent, MatrixPart::Full] {
            let a = projected_matrix(&m, &d, which);
            let b = projected_matrix(&m, &d.opposite(), which);
            let (p, q) = two_nonzero_eigs_trace(&a);
            let (r, s) = two_nonzero_eigs_trace(&b);
            if which == MatrixPart::Transparent {
                assert!((p - r).norm() < 1e-15 && (q - s).norm() < 1e-15);
            } else {
                // chirality is odd in s; the spectrum pairs with its transpose
                let t = projected_matrix(&m, &d, which).transpose();
                let (u, v) = two_nonzero_eigs_trace(&t);
                assert!((u - r).norm() < 1e-14 && (v - s).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn analytic_derivative_matches_finite_differences() {
        let m = DielectricModel::example();
        for axis in optic_axes(&m).unwrap() {
            let fam = axis.family(&m);
            let fd = FnFamily::new(2, 3, SymmetryClass::RealSymmetric, {
                let fam = fam.clone();
                move |p| fam.eval(p)
            });
            for p in [[axis.s1(), 0.0], [axis.s1() + 0.05, -0.03]] {
                for k in 0..2 {
                    let exact = fam.derivative(&p, k).unwrap();
                    let approx = central_difference(&fd, &p, k).unwrap();
                    assert!((&exact - &approx).max_abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn closed_form_coupling_matches_generic() {
        let m = DielectricModel::example();
        for axis in optic_axes(&m).unwrap() {
            let closed = axis_coupling(&m, &axis);
            let generic = coupling_vectors(&axis.family(&m), &axis.diabolic_point()).unwrap();
            for (a, b) in [
                (&closed.f11, &generic.f11),
                (&closed.f22, &generic.f22),
                (&closed.f12, &generic.f12),
                (&closed.f21, &generic.f21),
            ] {
                for (x, y) in a.iter().zip(b) {
                    assert!((x - y).norm() < 1e-12);
                }
            }
        }
        let l = axis_coupling(&m, &left(&m));
        assert!((l.f22[0].re - 0.4).abs() < 1e-15 && (l.f12[1].re - 0.1 * SQRT3).abs() < 1e-15);
        let r = axis_coupling(&m, &right(&m));
        assert!((r.f22[0].re + 0.4).abs() < 1e-15 && (r.f12[1].re + 0.1 * SQRT3).abs() < 1e-15);
    }

    #[test]
    fn cone_matches_closed_form_surface() {
        let m = DielectricModel::example();
        let [e1, e2, e3] = m.eta();
        for axis in optic_axes(&m).unwrap() {
            let cd = axis_coupling(&m, &axis);
            let dp = axis.diabolic_point();
            let (s1, s3) = (axis.s1(), axis.s3());
            for d in [[0.01, 0.0], [0.0, 0.01], [-0.004, 0.007]] {
                let (lp, lm) = split_eigenvalues(&cd, &dp, &d);
                for lambda in [lp.re, lm.re] {
                    let lhs = (lambda - e2 - (e3 - e1) * s1 * d[0]).powi(2);
                    let rhs = (e3 - e1).powi(2) * s1 * s1 * (d[0] * d[0] + s3 * s3 * d[1] * d[1]);
                    assert!((lhs - rhs).abs() < 1e-16);
                }
            }
        }
        // along s1 the split is 0.4 + 0.2 delta +- |0.2 delta|
        let cd = axis_coupling(&m, &left(&m));
        let (lp, lm) = split_eigenvalues(&cd, &left(&m).diabolic_point(), &[0.01, 0.0]);
        assert!((lp.re - 0.404).abs() < 1e-15 && (lm.re - 0.4).abs() < 1e-15);
    }

    #[test]
    fn closed_form_perturbation_matches_inner_products() {
        let m = DielectricModel::example();
        for axis in optic_axes(&m).unwrap() {
            let closed = axis_perturbation(&m, &axis);
            let delta = projected_matrix(&m, &axis.s0, MatrixPart::Perturbation);
            let generic = perturbation_scalars(&delta, &axis.diabolic_point()).unwrap();
            for (a, b) in closed.eps().iter().zip(generic.eps()) {
                assert!((a - b).norm() < 1e-12);
            }
            assert_eq!(closed.epsilon_norm, generic.epsilon_norm);
        }
    }

    #[test]
    fn example_scalars() {
        let m = DielectricModel::example();
        let ps = axis_perturbation(&m, &left(&m));
        assert!(ps.xi.norm() < 1e-17);
        assert!((ps.eta - c(0.0, (2.0 * SQRT3 + 1.0) / 400.0)).norm() < 1e-17);
        assert!((ps.zeta - c(0.0, -(3.0 - SQRT3) / 200.0)).norm() < 1e-17);
        assert!((ps.mu - c(0.0, 0.015)).norm() < 1e-17);
        let ps = axis_perturbation(&m, &right(&m));
        assert!((ps.eta - c(0.0, (2.0 * SQRT3 - 1.0) / 400.0)).norm() < 1e-17);
        assert!((ps.zeta - c(0.0, -(3.0 + SQRT3) / 200.0)).norm() < 1e-17);
    }

    #[test]
    fn perturbation_parts() {
        let eta = [0.5, 0.4, 0.1];
        let gamma_only =
            DielectricModel::new(eta, [[0.0; 3]; 3], DielectricModel::example().gamma()).unwrap();
        for (axis, report) in classify_crystal(&gamma_only).unwrap() {
            let ps = axis_perturbation(&gamma_only, &axis);
            assert!(ps.mu.norm() == 0.0 && ps.xi.norm() == 0.0 && ps.eta.norm() == 0.0);
            assert!(report.d <= 0.0);
            assert_eq!(report.regime, Regime::ChiralityDominated);
        }
        let dichroic_only = DielectricModel::new(
            eta,
            DielectricModel::example().dichroic(),
            [[c(0.0, 0.0); 3]; 3],
        )
        .unwrap();
        for (axis, report) in classify_crystal(&dichroic_only).unwrap() {
            assert_eq!(axis_perturbation(&dichroic_only, &axis).zeta, c(0.0, 0.0));
            assert!(report.d >= 0.0);
        }
    }

    #[test]
    fn example_classification() {
        let m = DielectricModel::example();
        let reports = classify_crystal(&m).unwrap();
        let d_left = 7.0 * (4.0 * SQRT3 - 5.0) / 160000.0;
        let d_right = -7.0 * (4.0 * SQRT3 + 5.0) / 160000.0;
        for (axis, r) in reports {
            // opposite directions share D
            let expect = if axis.s1() * axis.s3() < 0.0 {
                d_left
            } else {
                d_right
            };
            assert!(
                (r.d - expect).abs() <= 1e-13 * expect.abs(),
                "{} {} {}",
                axis.signs,
                r.d,
                expect
            );
        }
    }

    #[test]
    fn example_singular_axes() {
        let m = DielectricModel::example();
        let sa = singular_axes(&m, &left(&m)).unwrap();
        let h = (28.0 * SQRT3 - 35.0).sqrt() / 80.0;
        assert!((sa.a.s1 - (-0.5 - h)).abs() < 1e-12 && sa.a.s2.abs() < 1e-12);
        assert!((sa.b.s1 - (-0.5 + h)).abs() < 1e-12 && sa.b.s2.abs() < 1e-12);
        assert!(sa.a.is_valid() && sa.b.is_valid());
        assert!(matches!(
            singular_axes(&m, &right(&m)),
            Err(Error::NegativeD { .. })
        ));
    }

    #[test]
    fn singular_axes_match_generic_inversion() {
        let m = DielectricModel::example();
        for axis in [
            left(&m),
            optic_axis(&m, AxisSigns::new(true, false)).unwrap(),
        ] {
            let sa = singular_axes(&m, &axis).unwrap();
            let generic = crate::unfold_symmetric::exceptional_points(
                &axis_coupling(&m, &axis),
                &axis.diabolic_point(),
                &axis_perturbation(&m, &axis),
            )
            .unwrap();
            for (a, b) in sa.pair.p_a.iter().zip(&generic.p_a) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn non_chiral_singular_axes() {
        let d = [
            [0.01, 0.004, 0.002],
            [0.004, 0.03, 0.005],
            [0.002, 0.005, 0.02],
        ];
        let m = DielectricModel::new([0.5, 0.4, 0.1], d, [[c(0.0, 0.0); 3]; 3]).unwrap();
        for axis in optic_axes(&m).unwrap() {
            let ps = axis_perturbation(&m, &axis);
            let (s1, s3) = (axis.s1(), axis.s3());
            let x = d[0][1] * s3 - d[1][2] * s1;
            let y =
                (d[1][1] - d[0][0] * s3 * s3 + 2.0 * d[0][2] * s1 * s3 - d[2][2] * s1 * s1) / 2.0;
            assert!((ps.eta.im - x).abs() < 1e-17 && (ps.xi.im - y).abs() < 1e-17);
            let sa = singular_axes(&m, &axis).unwrap();
            assert!((sa.pair.xy_a[0] - x).abs() < 1e-17 && (sa.pair.xy_a[1] + y).abs() < 1e-17);
            assert!((sa.pair.xy_b[0] + x).abs() < 1e-17 && (sa.pair.xy_b[1] - y).abs() < 1e-17);
        }
    }

    #[test]
    fn far_singular_axes_are_flagged() {
        let m = DielectricModel::example().with_perturbation_scale(400.0);
        let sa = singular_axes(&m, &left(&m)).unwrap();
        assert!(!sa.a.is_valid());
        assert!(sa.a.s1 < -1.0);
    }

    #[test]
    fn example_singularity_line() {
        let m = DielectricModel::example();
        let line = singularity_line(&m, &left(&m)).unwrap();
        assert!(line.a.abs() < 1e-18);
        assert!(line.rhs.abs() < 1e-18);
        assert!(line.distance([-0.5, 0.0]) < 1e-15 && line.distance([0.3, 0.0]) < 1e-15);
        assert!(line.distance([0.0, 0.1]) > 0.09);
        let sa = singular_axes(&m, &left(&m)).unwrap();
        assert!(line.distance([sa.a.s1, sa.a.s2]) < 1e-15);
    }

    #[test]
    fn line_through_axis_for_real_or_imaginary_gamma() {
        let base = DielectricModel::example();
        for phase in [c(1.0, 0.0), c(0.0, 1.0), c(0.6, 0.8)] {
            let m = DielectricModel::new(
                base.eta(),
                base.dichroic(),
                base.gamma().map(|r| r.map(|z| z * phase)),
            )
            .unwrap();
            for axis in optic_axes(&m).unwrap() {
                let line = singularity_line(&m, &axis).unwrap();
                let through = line.distance(axis.p0()) < 1e-15;
                assert_eq!(through, phase.re == 0.0 || phase.im == 0.0);
            }
        }
    }

    #[test]
    fn non_chiral_line_is_vertical() {
        let d = [[0.01, 0.0, 0.002], [0.0, 0.03, 0.0], [0.002, 0.0, 0.02]];
        let m = DielectricModel::new([0.5, 0.4, 0.1], d, [[c(0.0, 0.0); 3]; 3]).unwrap();
        let line = singularity_line(&m, &left(&m)).unwrap();
        assert_eq!(line.b, 0.0);
        assert!(line.a != 0.0);
    }

    #[test]
    fn trace_formula_matches_oracle_off_axis() {
        let m = DielectricModel::example();
        let d = Direction::new([0.48, 0.6, 0.64]).unwrap();
        let a = projected_matrix(&m, &d, MatrixPart::Full);
        let (p, q) = two_nonzero_eigs_trace(&a);
        let eig = eig_exact(&a, SymmetryClass::General).unwrap();
        let mut big: Vec<Complex64> = eig.eigenvalues.clone();
        big.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
        let (u, v) = crate::linalg::match_pairs((big[0], big[1]), (p, q));
        assert!((u - p).norm() < 1e-10 && (v - q).norm() < 1e-10);
    }

    #[test]
    fn refractive_index_of_positive_eigenvalue() {
        assert_eq!(refractive_index(0.25), Some(2.0));
        assert_eq!(refractive_index(-0.25), None);
    }
}
