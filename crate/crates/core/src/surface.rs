//! Grid sampling of asymptotic eigenvalue sheets next to their exact counterparts.

use num_complex::Complex64;

use crate::crystal::{
    axis_coupling, axis_perturbation, projected_matrix, DielectricModel, Direction, MatrixPart,
    OpticAxis,
};
use crate::diabolic::{coupling_vectors, AffineFamily, CouplingData, DiabolicPoint, MatrixFamily};
use crate::error::{Error, Result};
use crate::linalg::{
    eig_exact, match_pairs, real_vector, two_nonzero_eigs_trace, ComplexMatrix, SymmetryClass,
};
use crate::perturb::{perturbation_scalars, PerturbationScalars};
use crate::unfold_hermitian::{
    c_hermitian_parts, exceptional_ring, frame3, invert_frame3, partition_xyz,
    perturbed_eigenvalues3, plane_tolerance, ExceptionalRing, RingRegion,
};
use crate::unfold_symmetric::{c_parts, frame2, sheets};

/// Square grid of `resolution x resolution` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub center: [f64; 2],
    pub half_width: f64,
    pub resolution: usize,
}

impl GridSpec {
    pub fn new(center: [f64; 2], half_width: f64, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::InvalidInput(format!(
                "grid resolution must be at least 2 (got {resolution})"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "half-width must be positive (got {half_width})"
            )));
        }
        if !center.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("grid center must be finite".into()));
        }
        Ok(Self {
            center,
            half_width,
            resolution,
        })
    }

    fn coordinate(&self, axis: usize, k: usize) -> f64 {
        let step = 2.0 * self.half_width / (self.resolution - 1) as f64;
        self.center[axis] - self.half_width + step * k as f64
    }

    /// Points in row-major order, the first coordinate varying fastest.
    pub fn points(&self) -> Vec<[f64; 2]> {
        let n = self.resolution;
        (0..n * n)
            .map(|idx| [self.coordinate(0, idx % n), self.coordinate(1, idx / n)])
            .collect()
    }
}

/// One grid row: asymptotic sheets, `c`, and the exact pair in matching order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceRow {
    pub s1: f64,
    pub s2: f64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub re_c: f64,
    pub im_c: f64,
    pub exact_plus: Complex64,
    pub exact_minus: Complex64,
}

impl SurfaceRow {
    pub fn abs_err_plus(&self) -> f64 {
        (self.lambda_plus - self.exact_plus).norm()
    }

    pub fn abs_err_minus(&self) -> f64 {
        (self.lambda_minus - self.exact_minus).norm()
    }
}

pub const SURFACE_HEADER: [&str; 14] = [
    "s1",
    "s2",
    "re_lambda_plus",
    "re_lambda_minus",
    "im_lambda_plus",
    "im_lambda_minus",
    "re_c",
    "im_c",
    "exact_re_plus",
    "exact_re_minus",
    "exact_im_plus",
    "exact_im_minus",
    "abs_err_plus",
    "abs_err_minus",
];

impl SurfaceRow {
    pub fn values(&self) -> [f64; 14] {
        [
            self.s1,
            self.s2,
            self.lambda_plus.re,
            self.lambda_minus.re,
            self.lambda_plus.im,
            self.lambda_minus.im,
            self.re_c,
            self.im_c,
            self.exact_plus.re,
            self.exact_minus.re,
            self.exact_plus.im,
            self.exact_minus.im,
            self.abs_err_plus(),
            self.abs_err_minus(),
        ]
    }
}

/// Everything needed to evaluate sheets around one optic axis.
#[derive(Debug, Clone)]
pub struct CrystalUnfolding {
    pub model: DielectricModel,
    pub axis: OpticAxis,
    pub coupling: CouplingData,
    pub dp: DiabolicPoint,
    pub scalars: PerturbationScalars,
}

impl CrystalUnfolding {
    pub fn new(model: &DielectricModel, axis: &OpticAxis) -> Self {
        Self {
            model: model.clone(),
            axis: *axis,
            coupling: axis_coupling(model, axis),
            dp: axis.diabolic_point(),
            scalars: axis_perturbation(model, axis),
        }
    }

    pub fn row(&self, p: [f64; 2]) -> Result<SurfaceRow> {
        let delta = [p[0] - self.dp.p0[0], p[1] - self.dp.p0[1]];
        let sample = sheets(&frame2(&self.coupling, &self.dp, &delta)?, &self.scalars);
        let (lp, lm) = (sample.lambda_plus(), sample.lambda_minus());
        let exact = self.exact(p)?;
        let (ep, em) = match_pairs(exact, (lp, lm));
        Ok(SurfaceRow {
            s1: p[0],
            s2: p[1],
            lambda_plus: lp,
            lambda_minus: lm,
            re_c: sample.re_c,
            im_c: sample.im_c,
            exact_plus: ep,
            exact_minus: em,
        })
    }

    /// `Re c` and `Im c` as polynomials in `(s1 - S1, s2)`.
    pub fn c_coefficients(&self) -> Result<CCoefficients> {
        let c_at = |d: [f64; 2]| -> Result<(f64, f64)> {
            Ok(c_parts(
                &frame2(&self.coupling, &self.dp, &d)?,
                &self.scalars,
            ))
        };
        // Re c is quadratic and Im c affine, so unit steps recover the coefficients
        let (k, i0) = c_at([0.0, 0.0])?;
        let (rp1, ip1) = c_at([1.0, 0.0])?;
        let (rm1, im1) = c_at([-1.0, 0.0])?;
        let (rp2, ip2) = c_at([0.0, 1.0])?;
        let (rm2, im2) = c_at([0.0, -1.0])?;
        let (r12, _) = c_at([1.0, 1.0])?;
        Ok(CCoefficients {
            re_constant: k,
            re_quadratic: [
                0.5 * (rp1 + rm1) - k,
                0.5 * (rp2 + rm2) - k,
                r12 - rp1 - rp2 + k,
            ],
            re_linear: [0.5 * (rp1 - rm1), 0.5 * (rp2 - rm2)],
            im_constant: i0,
            im_linear: [0.5 * (ip1 - im1), 0.5 * (ip2 - im2)],
        })
    }

    /// The two nonzero eigenvalues of the full projected matrix at `p`.
    pub fn exact(&self, p: [f64; 2]) -> Result<(Complex64, Complex64)> {
        let s = Direction::from_chart(p[0], p[1], self.axis.s0.hemisphere()).ok_or_else(|| {
            Error::InvalidInput(format!(
                "point ({}, {}) lies outside the unit disk",
                p[0], p[1]
            ))
        })?;
        Ok(two_nonzero_eigs_trace(&projected_matrix(
            &self.model,
            &s,
            MatrixPart::Full,
        )))
    }
}

/// `Re c = k + l . d + q0 d1^2 + q1 d2^2 + q2 d1 d2` and `Im c = i0 + m . d` with
/// `d = (s1 - S1, s2)`. The sign of `Im c` depends on the basis; its modulus does not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CCoefficients {
    pub re_constant: f64,
    pub re_linear: [f64; 2],
    pub re_quadratic: [f64; 3],
    pub im_constant: f64,
    pub im_linear: [f64; 2],
}

/// Sheets and exact eigenvalues over a window around an optic axis.
pub fn crystal_surface(
    model: &DielectricModel,
    axis: &OpticAxis,
    grid: &GridSpec,
) -> Result<Vec<SurfaceRow>> {
    let unfolding = CrystalUnfolding::new(model, axis);
    grid.points()
        .into_iter()
        .map(|p| unfolding.row(p))
        .collect()
}

/// A three-parameter Hermitian family with a diabolic point at the origin and a fixed
/// non-Hermitian perturbation.
#[derive(Debug, Clone)]
pub struct HermitianExample {
    pub family: AffineFamily,
    pub dp: DiabolicPoint,
    pub delta: ComplexMatrix,
}

impl HermitianExample {
    pub fn new(scale: f64) -> Self {
        let c = Complex64::new;
        let z = c(0.0, 0.0);
        let base =
            ComplexMatrix::from_real_rows([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.5]]);
        let slopes = vec![
            ComplexMatrix::from_real_rows([[1.0, 0.0, 0.2], [0.0, -1.0, 0.1], [0.2, 0.1, 0.3]]),
            ComplexMatrix::from_real_rows([[0.1, 0.9, 0.0], [0.9, 0.2, 0.3], [0.0, 0.3, -0.2]]),
            ComplexMatrix::from_rows([
                [z, c(0.1, -0.8), c(0.0, 0.2)],
                [c(0.1, 0.8), c(0.2, 0.0), z],
                [c(0.0, -0.2), z, c(0.1, 0.0)],
            ]),
        ];
        let family = AffineFamily::new(base, slopes, SymmetryClass::Hermitian)
            .expect("example family is Hermitian");
        let dp = DiabolicPoint::new(
            vec![0.0; 3],
            1.0,
            real_vector(&[1.0, 0.0, 0.0]),
            real_vector(&[0.0, 1.0, 0.0]),
        );
        let delta = ComplexMatrix::from_rows([
            [c(0.004, 0.010), c(0.006, 0.008), c(0.0, 0.003)],
            [c(-0.002, 0.004), c(-0.003, -0.006), c(0.002, 0.0)],
            [c(0.001, 0.0), c(0.0, 0.002), c(0.005, 0.001)],
        ])
        .scale_real(scale);
        Self { family, dp, delta }
    }

    pub fn coupling(&self) -> Result<CouplingData> {
        coupling_vectors(&self.family, &self.dp)
    }

    pub fn scalars(&self) -> Result<PerturbationScalars> {
        perturbation_scalars(&self.delta, &self.dp)
    }
}

/// One point of a plane section through the exceptional ring.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionRow {
    pub a: f64,
    pub b: f64,
    pub xyz: [f64; 3],
    pub p: Vec<f64>,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub re_c: f64,
    pub im_c: f64,
    pub exact_plus: Complex64,
    pub exact_minus: Complex64,
    pub region: RingRegion,
}

impl SectionRow {
    pub fn abs_err_plus(&self) -> f64 {
        (self.lambda_plus - self.exact_plus).norm()
    }

    pub fn abs_err_minus(&self) -> f64 {
        (self.lambda_minus - self.exact_minus).norm()
    }
}

/// Samples the ring plane of `example` on `(a, b)` in `[-w, w]^2`, where `w` is
/// `half_width` ring radii.
pub fn hermitian_section(
    example: &HermitianExample,
    half_width: f64,
    resolution: usize,
) -> Result<(ExceptionalRing, Vec<SectionRow>)> {
    let cd = example.coupling()?;
    let ps = example.scalars()?;
    let ring = exceptional_ring(&ps)?;
    let w = half_width * ring.radius;
    let grid = GridSpec::new([0.0, 0.0], w, resolution)?;
    // points built from the plane basis sit on the plane to roundoff of the frame size
    let tol = plane_tolerance(&ps).max(1e-13 * w * ring.radius);
    let full = |p: &[f64]| &example.family.eval(p) + &example.delta;
    let rows = grid
        .points()
        .into_iter()
        .map(|[a, b]| {
            let xyz = ring.plane_point(a, b);
            let sol = invert_frame3(&cd, xyz)?;
            let frame = frame3(&cd, &example.dp, &sol.particular)?;
            let (lp, lm) = perturbed_eigenvalues3(&frame, &ps);
            let (re_c, im_c) = c_hermitian_parts(frame.xyz(), &ps);
            let region = partition_xyz(frame.xyz(), &ps, tol)?;
            let eig = eig_exact(&full(&frame.p), SymmetryClass::General)?;
            let exact = nearest_pair(&eig.eigenvalues, frame.lambda0_prime + ps.mu.re);
            let (ep, em) = match_pairs(exact, (lp, lm));
            Ok(SectionRow {
                a,
                b,
                xyz: frame.xyz(),
                p: frame.p,
                lambda_plus: lp,
                lambda_minus: lm,
                re_c,
                im_c,
                exact_plus: ep,
                exact_minus: em,
                region,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((ring, rows))
}

/// The two eigenvalues closest to `target`.
pub fn nearest_pair(values: &[Complex64], target: f64) -> (Complex64, Complex64) {
    let mut v = values.to_vec();
    v.sort_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()));
    (v[0], v[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::{optic_axis, AxisSigns};
    use crate::unfold_hermitian::RING_SAMPLES;

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new([0.0, 0.0], 0.1, 1).is_err());
        assert!(GridSpec::new([0.0, 0.0], 0.0, 3).is_err());
        assert!(GridSpec::new([0.0, 0.0], -0.1, 3).is_err());
        let g = GridSpec::new([1.0, 2.0], 0.5, 2).unwrap();
        assert_eq!(
            g.points(),
            vec![[0.5, 1.5], [1.5, 1.5], [0.5, 2.5], [1.5, 2.5]]
        );
    }

    #[test]
    fn grid_is_symmetric_about_center() {
        let g = GridSpec::new([-0.5, 0.0], 0.1, 101).unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 101 * 101);
        assert_eq!(pts[50 * 101 + 50], [-0.5, 0.0]);
        assert!((pts[0][0] + 0.6).abs() < 1e-15 && (pts[pts.len() - 1][1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn unperturbed_surface_is_real_cone() {
        let m = DielectricModel::example().with_perturbation_scale(0.0);
        let axis = optic_axis(&m, AxisSigns::new(false, true)).unwrap();
        let g = GridSpec::new(axis.p0(), 0.05, 11).unwrap();
        for row in crystal_surface(&m, &axis, &g).unwrap() {
            assert_eq!(row.lambda_plus.im, 0.0);
            assert_eq!(row.lambda_minus.im, 0.0);
            assert!(row.exact_plus.im.abs() < 1e-15 && row.exact_minus.im.abs() < 1e-15);
            let r2 = (row.s1 - axis.s1()).powi(2) + row.s2.powi(2);
            // second-order term of the exact cone is (eta1 - eta3) r^2; at the axis itself the
            // trace formula loses half the digits to the square root
            let bound = 0.41 * r2 + 1e-8;
            assert!(row.abs_err_plus() <= bound && row.abs_err_minus() <= bound);
        }
    }

    #[test]
    fn surface_error_is_small_near_axis() {
        let m = DielectricModel::example();
        let axis = optic_axis(&m, AxisSigns::new(false, true)).unwrap();
        let g = GridSpec::new(axis.p0(), 0.1, 21).unwrap();
        let rows = crystal_surface(&m, &axis, &g).unwrap();
        let worst = rows
            .iter()
            .map(|r| r.abs_err_plus().max(r.abs_err_minus()))
            .fold(0.0, f64::max);
        // corners sit at r = 0.1 sqrt(2)
        assert!(worst <= 0.41 * 0.02, "{worst}");
        assert!(worst >= 1e-3);
    }

    #[test]
    fn c_coefficients_of_left_axis() {
        let m = DielectricModel::example();
        let axis = optic_axis(&m, AxisSigns::new(false, true)).unwrap();
        let c = CrystalUnfolding::new(&m, &axis).c_coefficients().unwrap();
        let sqrt3 = 3f64.sqrt();
        assert!((c.re_constant - (35.0 - 28.0 * sqrt3) / 160000.0).abs() < 1e-18);
        assert!(
            (c.re_quadratic[0] - 0.04).abs() < 1e-16 && (c.re_quadratic[1] - 0.03).abs() < 1e-16
        );
        assert!(c.re_quadratic[2].abs() < 1e-16 && c.re_linear.iter().all(|v| v.abs() < 1e-17));
        assert!((c.im_linear[1].abs() - (6.0 + sqrt3) / 2000.0).abs() < 1e-17);
        assert!(c.im_constant.abs() < 1e-18 && c.im_linear[0].abs() < 1e-18);
    }

    #[test]
    fn windows_leaving_the_disk_are_rejected() {
        let m = DielectricModel::example();
        let axis = optic_axis(&m, AxisSigns::new(true, true)).unwrap();
        let g = GridSpec::new(axis.p0(), 0.9, 3).unwrap();
        assert!(matches!(
            crystal_surface(&m, &axis, &g),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn hermitian_example_is_diabolic() {
        let ex = HermitianExample::new(1.0);
        assert!(crate::diabolic::verify_diabolic(&ex.family, &ex.dp, 1e-14));
        let cd = ex.coupling().unwrap();
        assert_eq!(cd.class, SymmetryClass::Hermitian);
        assert!(invert_frame3(&cd, [0.01, 0.02, 0.03])
            .unwrap()
            .null_basis
            .is_empty());
    }

    #[test]
    fn section_contains_ring_and_matches_exact() {
        let ex = HermitianExample::new(1.0);
        let (ring, rows) = hermitian_section(&ex, 2.0, 41).unwrap();
        assert_eq!(rows.len(), 41 * 41);
        assert!(rows.iter().any(|r| r.region == RingRegion::Inside));
        assert!(rows.iter().any(|r| r.region == RingRegion::Outside));
        let worst = rows
            .iter()
            .map(|r| r.abs_err_plus().max(r.abs_err_minus()))
            .fold(0.0, f64::max);
        assert!(worst < 0.1 * ring.radius, "{worst} vs {}", ring.radius);
        assert!(!ring.sample(RING_SAMPLES).is_empty());
    }

    #[test]
    fn nearest_pair_picks_closest() {
        let v = [
            Complex64::new(3.0, 0.0),
            Complex64::new(1.1, 0.0),
            Complex64::new(0.9, 0.1),
        ];
        let (a, b) = nearest_pair(&v, 1.0);
        assert_eq!((a, b), (v[1], v[2]));
    }
}
