//! Unfolding of a real-symmetric diabolic point under complex perturbation.

use num_complex::Complex64;

use crate::diabolic::{pair, CouplingData, DiabolicPoint};
use crate::error::{Error, Result};
use crate::frame::{solve_frame, FrameSolution};
use crate::linalg::SymmetryClass;
use crate::perturb::PerturbationScalars;

/// `|Re c|` below this makes the near-intersection expansion meaningless.
pub const NEAR_ZERO_REC: f64 = 1e-8;

/// Local coordinates `x = <f11 - f22, Δp>/2`, `y = <f12, Δp>`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldingFrame2 {
    /// The full parameter point `p0 + Δp`.
    pub p: Vec<f64>,
    pub lambda0_prime: f64,
    pub x: f64,
    pub y: f64,
    pub g_x: Vec<f64>,
    pub g_y: Vec<f64>,
}

/// Real and imaginary sheets at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetSample {
    pub p: Vec<f64>,
    pub re_plus: f64,
    pub re_minus: f64,
    pub im_plus: f64,
    pub im_minus: f64,
    pub re_c: f64,
    pub im_c: f64,
}

impl SheetSample {
    pub fn lambda_plus(&self) -> Complex64 {
        Complex64::new(self.re_plus, self.im_plus)
    }

    pub fn lambda_minus(&self) -> Complex64 {
        Complex64::new(self.re_minus, self.im_minus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `D < 0`: the real sheets stay apart.
    ChiralityDominated,
    Degenerate,
    /// `D > 0`: two exceptional points joined by a branch cut.
    AbsorptionDominated,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::ChiralityDominated => "chirality-dominated",
            Regime::Degenerate => "degenerate",
            Regime::AbsorptionDominated => "absorption-dominated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationReport {
    pub d: f64,
    pub im_xi: f64,
    pub im_eta: f64,
    pub im_zeta: f64,
    pub regime: Regime,
}

/// The two coupling points in frame and parameter coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ExceptionalPair {
    pub xy_a: [f64; 2],
    pub xy_b: [f64; 2],
    pub p_a: Vec<f64>,
    pub p_b: Vec<f64>,
    /// Kernel directions along which each point extends when `n > 2`.
    pub null_basis: Vec<Vec<f64>>,
}

/// Builds the frame at `p0 + delta`. The coupling must be real-symmetric.
pub fn frame2(cd: &CouplingData, dp: &DiabolicPoint, delta: &[f64]) -> Result<UnfoldingFrame2> {
    if cd.class != SymmetryClass::RealSymmetric {
        return Err(Error::ClassMismatch {
            expected: "real-symmetric",
        });
    }
    if delta.len() != cd.n_params() {
        return Err(Error::DimensionMismatch {
            expected: cd.n_params(),
            actual: delta.len(),
        });
    }
    let (g_x, g_y) = frame_vectors(cd);
    let dot = |g: &[f64]| g.iter().zip(delta).map(|(a, b)| a * b).sum::<f64>();
    Ok(UnfoldingFrame2 {
        p: dp.p0.iter().zip(delta).map(|(a, b)| a + b).collect(),
        lambda0_prime: dp.lambda0 + 0.5 * (pair(&cd.f11, delta) + pair(&cd.f22, delta)).re,
        x: dot(&g_x),
        y: dot(&g_y),
        g_x,
        g_y,
    })
}

fn frame_vectors(cd: &CouplingData) -> (Vec<f64>, Vec<f64>) {
    let g_x = cd
        .f11
        .iter()
        .zip(&cd.f22)
        .map(|(a, b)| 0.5 * (a - b).re)
        .collect();
    let g_y = cd.f12.iter().map(|z| z.re).collect();
    (g_x, g_y)
}

/// `c = (x + xi)^2 + (y + eta)^2 - zeta^2` as a complex number.
pub fn c_value(x: f64, y: f64, ps: &PerturbationScalars) -> Complex64 {
    let a = ps.xi + x;
    let b = ps.eta + y;
    a * a + b * b - ps.zeta * ps.zeta
}

/// `(Re c, Im c)` from the expanded real forms.
pub fn c_parts(frame: &UnfoldingFrame2, ps: &PerturbationScalars) -> (f64, f64) {
    c_parts_xy(frame.x, frame.y, ps)
}

pub fn c_parts_xy(x: f64, y: f64, ps: &PerturbationScalars) -> (f64, f64) {
    let (rxi, ixi) = (ps.xi.re, ps.xi.im);
    let (reta, ieta) = (ps.eta.re, ps.eta.im);
    let (rz, iz) = (ps.zeta.re, ps.zeta.im);
    let u = x + rxi;
    let v = y + reta;
    let re_c = (iz * iz - ixi * ixi - ieta * ieta - rz * rz) + u * u + v * v;
    let im_c = 2.0 * (u * ixi + v * ieta - rz * iz);
    (re_c, im_c)
}

/// `(Re sqrt(c), |Im sqrt(c)|)` without cancellation.
fn root_parts(re_c: f64, im_c: f64) -> (f64, f64) {
    let w = (0.5 * (re_c.abs() + re_c.hypot(im_c))).sqrt();
    if w == 0.0 {
        (0.0, 0.0)
    } else if re_c >= 0.0 {
        (w, 0.5 * im_c.abs() / w)
    } else {
        (0.5 * im_c.abs() / w, w)
    }
}

/// The four sheet values, with `+` labels paired so that
/// `lambda_+- = lambda0' + mu +- sqrt(c)` on the principal branch.
pub fn sheets(frame: &UnfoldingFrame2, ps: &PerturbationScalars) -> SheetSample {
    let (re_c, im_c) = c_parts(frame, ps);
    let (r, i) = root_parts(re_c, im_c);
    // equal signs for Im c >= 0, opposite otherwise
    let s = if im_c >= 0.0 { 1.0 } else { -1.0 };
    let re_mid = frame.lambda0_prime + ps.mu.re;
    SheetSample {
        p: frame.p.clone(),
        re_plus: re_mid + r,
        re_minus: re_mid - r,
        im_plus: ps.mu.im + s * i,
        im_minus: ps.mu.im - s * i,
        re_c,
        im_c,
    }
}

/// Leading-order sheet offsets near a sheet intersection.
///
/// For `Re c < 0` these are the offsets of `Re lambda_+-` from `lambda0' + Re mu`;
/// for `Re c > 0` the offsets of `Im lambda_+-` from `Im mu`.
pub fn sheet_approx_near_intersection(
    frame: &UnfoldingFrame2,
    ps: &PerturbationScalars,
) -> Result<(f64, f64)> {
    let (re_c, im_c) = c_parts(frame, ps);
    if re_c.abs() < NEAR_ZERO_REC {
        return Err(Error::NearZeroRec { re_c });
    }
    let v = 0.5 * im_c / re_c.abs().sqrt();
    Ok((v, -v))
}

/// `D = Im^2 xi + Im^2 eta - Im^2 zeta` and the regime it selects.
pub fn classify(ps: &PerturbationScalars) -> ClassificationReport {
    let (im_xi, im_eta, im_zeta) = (ps.xi.im, ps.eta.im, ps.zeta.im);
    let d = im_xi * im_xi + im_eta * im_eta - im_zeta * im_zeta;
    let regime = if d.abs() <= 1e-14 * ps.epsilon_norm * ps.epsilon_norm {
        Regime::Degenerate
    } else if d > 0.0 {
        Regime::AbsorptionDominated
    } else {
        Regime::ChiralityDominated
    };
    ClassificationReport {
        d,
        im_xi,
        im_eta,
        im_zeta,
        regime,
    }
}

/// Frame coordinates `(x, y)` of the two exceptional points, `a` taking the upper sign.
pub fn exceptional_xy(ps: &PerturbationScalars) -> Result<([f64; 2], [f64; 2])> {
    let report = classify(ps);
    match report.regime {
        Regime::Degenerate => return Err(Error::DegenerateD { d: report.d }),
        Regime::ChiralityDominated => return Err(Error::NegativeD { d: report.d }),
        Regime::AbsorptionDominated => {}
    }
    let (ixi, ieta, iz) = (ps.xi.im, ps.eta.im, ps.zeta.im);
    let rz = ps.zeta.re;
    let s = ixi * ixi + ieta * ieta;
    let root = ((s + rz * rz) * report.d).sqrt();
    let common = rz * iz;
    let x = |sign: f64| (ixi * common + sign * ieta * root) / s - ps.xi.re;
    let y = |sign: f64| (ieta * common - sign * ixi * root) / s - ps.eta.re;
    Ok(([x(1.0), y(1.0)], [x(-1.0), y(-1.0)]))
}

fn invert_frame(cd: &CouplingData, xy: [f64; 2]) -> Result<FrameSolution> {
    let (g_x, g_y) = frame_vectors(cd);
    solve_frame(&[g_x, g_y], &xy)
}

/// Exceptional points of the perturbed family. Requires `D > 0`.
pub fn exceptional_points(
    cd: &CouplingData,
    dp: &DiabolicPoint,
    ps: &PerturbationScalars,
) -> Result<ExceptionalPair> {
    if cd.class != SymmetryClass::RealSymmetric {
        return Err(Error::ClassMismatch {
            expected: "real-symmetric",
        });
    }
    let (xy_a, xy_b) = exceptional_xy(ps)?;
    let sa = invert_frame(cd, xy_a)?;
    let sb = invert_frame(cd, xy_b)?;
    let shift = |s: &FrameSolution| {
        dp.p0
            .iter()
            .zip(&s.particular)
            .map(|(a, b)| a + b)
            .collect()
    };
    Ok(ExceptionalPair {
        xy_a,
        xy_b,
        p_a: shift(&sa),
        p_b: shift(&sb),
        null_basis: sa.null_basis,
    })
}

/// Axis-aligned parameter rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Window {
    pub fn centered(center: [f64; 2], half_width: f64) -> Self {
        Self {
            lo: [center[0] - half_width, center[1] - half_width],
            hi: [center[0] + half_width, center[1] + half_width],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coincidence {
    /// `Re lambda_+ = Re lambda_-` (branch cut).
    Real,
    /// `Im lambda_+ = Im lambda_-`.
    Imag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocusSegment {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub kind: Coincidence,
}

/// The line `Im c = 0` in a two-parameter plane, `<normal, p - p0> = offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchLocus {
    pub point: [f64; 2],
    pub direction: [f64; 2],
    pub normal: [f64; 2],
    pub offset: f64,
    pub exceptional: Option<ExceptionalPair>,
    /// Pieces of the line inside the window, in order along `direction`.
    pub segments: Vec<LocusSegment>,
}

impl BranchLocus {
    pub fn at(&self, t: f64) -> [f64; 2] {
        [
            self.point[0] + t * self.direction[0],
            self.point[1] + t * self.direction[1],
        ]
    }

    fn param_of(&self, q: &[f64]) -> f64 {
        (q[0] - self.point[0]) * self.direction[0] + (q[1] - self.point[1]) * self.direction[1]
    }
}

/// Line of `Im c = 0` clipped to `window`, split into Re- and Im-coincidence pieces.
pub fn branch_locus(
    cd: &CouplingData,
    dp: &DiabolicPoint,
    ps: &PerturbationScalars,
    window: &Window,
) -> Result<BranchLocus> {
    if cd.n_params() != 2 {
        return Err(Error::InvalidInput(
            "branch locus is defined for two-parameter families".into(),
        ));
    }
    let (ixi, ieta) = (ps.xi.im, ps.eta.im);
    if ixi.hypot(ieta) <= 1e-14 * ps.epsilon_norm.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateLine);
    }
    let (g_x, g_y) = frame_vectors(cd);
    let normal = [ixi * g_x[0] + ieta * g_y[0], ixi * g_x[1] + ieta * g_y[1]];
    let nn = normal[0].hypot(normal[1]);
    if nn == 0.0 {
        return Err(Error::DegenerateLine);
    }
    let offset = ps.zeta.re * ps.zeta.im - ps.xi.re * ixi - ps.eta.re * ieta;
    let point = [
        dp.p0[0] + normal[0] * offset / (nn * nn),
        dp.p0[1] + normal[1] * offset / (nn * nn),
    ];
    let direction = [-normal[1] / nn, normal[0] / nn];
    let exceptional = match exceptional_points(cd, dp, ps) {
        Ok(e) => Some(e),
        Err(Error::NegativeD { .. } | Error::DegenerateD { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut locus = BranchLocus {
        point,
        direction,
        normal,
        offset,
        exceptional,
        segments: Vec::new(),
    };
    let Some((t0, t1)) = clip(point, direction, window) else {
        return Ok(locus);
    };
    let mut pieces = vec![(t0, t1, Coincidence::Imag)];
    if let Some(ep) = &locus.exceptional {
        let (ta, tb) = {
            let a = locus.param_of(&ep.p_a);
            let b = locus.param_of(&ep.p_b);
            (a.min(b), a.max(b))
        };
        pieces = [
            (t0, t1.min(ta), Coincidence::Imag),
            (t0.max(ta), t1.min(tb), Coincidence::Real),
            (t0.max(tb), t1, Coincidence::Imag),
        ]
        .into_iter()
        .filter(|(a, b, _)| b > a)
        .collect();
    }
    locus.segments = pieces
        .into_iter()
        .map(|(a, b, kind)| LocusSegment {
            start: locus.at(a),
            end: locus.at(b),
            kind,
        })
        .collect();
    Ok(locus)
}

/// Parameter interval of `point + t direction` inside the window.
fn clip(point: [f64; 2], direction: [f64; 2], w: &Window) -> Option<(f64, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for k in 0..2 {
        if direction[k] == 0.0 {
            if point[k] < w.lo[k] || point[k] > w.hi[k] {
                return None;
            }
        } else {
            let a = (w.lo[k] - point[k]) / direction[k];
            let b = (w.hi[k] - point[k]) / direction[k];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    (t1 > t0).then_some((t0, t1))
}

/// Angle between the two imaginary sheets where they cross the line `Im c = 0`,
/// from the leading-order expansion. Requires `Re c > 0` at the frame point.
pub fn im_sheet_crossing_angle(frame: &UnfoldingFrame2, ps: &PerturbationScalars) -> Result<f64> {
    let (re_c, _) = c_parts(frame, ps);
    if re_c < NEAR_ZERO_REC {
        return Err(Error::NearZeroRec { re_c });
    }
    let w: Vec<f64> = frame
        .g_x
        .iter()
        .zip(&frame.g_y)
        .map(|(a, b)| ps.xi.im * a + ps.eta.im * b)
        .collect();
    let slope = w.iter().map(|v| v * v).sum::<f64>().sqrt() / re_c.sqrt();
    Ok(2.0 * slope.atan())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingRegion {
    /// `c < 0`: complex-conjugate pair.
    Inside,
    /// `c > 0`: real pair.
    Outside,
    OnRing,
}

/// Eigenvalues for a real perturbation at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealSample {
    pub region: RingRegion,
    pub c: f64,
    pub re_plus: f64,
    pub re_minus: f64,
    pub im_plus: f64,
    pub im_minus: f64,
}

/// Surfaces of a real-symmetric family under a real perturbation, where `c` is real
/// and the exceptional points form the ring `(x + xi)^2 + (y + eta)^2 = zeta^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealPerturbationGeometry {
    pub mu: f64,
    pub xi: f64,
    pub eta: f64,
    pub zeta: f64,
    pub tolerance: f64,
}

impl RealPerturbationGeometry {
    pub fn ring_center(&self) -> [f64; 2] {
        [-self.xi, -self.eta]
    }

    pub fn ring_radius(&self) -> f64 {
        self.zeta.abs()
    }

    pub fn ring_point(&self, theta: f64) -> [f64; 2] {
        let r = self.ring_radius();
        [-self.xi + r * theta.cos(), -self.eta + r * theta.sin()]
    }

    pub fn c(&self, x: f64, y: f64) -> f64 {
        let a = x + self.xi;
        let b = y + self.eta;
        a * a + b * b - self.zeta * self.zeta
    }

    pub fn evaluate(&self, frame: &UnfoldingFrame2) -> RealSample {
        self.evaluate_xy(frame.lambda0_prime, frame.x, frame.y)
    }

    pub fn evaluate_xy(&self, lambda0_prime: f64, x: f64, y: f64) -> RealSample {
        let c = self.c(x, y);
        let mid = lambda0_prime + self.mu;
        let (region, re, im) = if c.abs() <= self.tolerance {
            (RingRegion::OnRing, 0.0, 0.0)
        } else if c < 0.0 {
            (RingRegion::Inside, 0.0, (-c).sqrt())
        } else {
            (RingRegion::Outside, c.sqrt(), 0.0)
        };
        RealSample {
            region,
            c,
            re_plus: mid + re,
            re_minus: mid - re,
            im_plus: im,
            im_minus: -im,
        }
    }
}

/// Geometry evaluator for a real perturbation; fails if any scalar has an imaginary part.
pub fn real_perturbation_geometry(ps: &PerturbationScalars) -> Result<RealPerturbationGeometry> {
    let imag = [ps.mu, ps.xi, ps.eta, ps.zeta]
        .iter()
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    if imag > 1e-14 * ps.epsilon_norm.max(1.0) {
        return Err(Error::RealnessViolated { imag });
    }
    Ok(RealPerturbationGeometry {
        mu: ps.mu.re,
        xi: ps.xi.re,
        eta: ps.eta.re,
        zeta: ps.zeta.re,
        tolerance: 1e-10 * ps.epsilon_norm.powi(2).max(1.0),
    })
}
