//! Unfolding of a Hermitian diabolic point under non-Hermitian perturbation.

use num_complex::Complex64;

use crate::diabolic::{pair, CouplingData, DiabolicPoint};
use crate::error::{Error, Result};
use crate::frame::{solve_frame, FrameSolution};
use crate::linalg::SymmetryClass;
use crate::perturb::PerturbationScalars;
pub use crate::unfold_symmetric::RingRegion;

/// Default number of sampled ring points.
pub const RING_SAMPLES: usize = 64;

/// Local coordinates `x = <f11 - f22, Δp>/2`, `y = <Re f12, Δp>`, `z = <Im f12, Δp>`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldingFrame3 {
    pub p: Vec<f64>,
    pub lambda0_prime: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub g_x: Vec<f64>,
    pub g_y: Vec<f64>,
    pub g_z: Vec<f64>,
}

impl UnfoldingFrame3 {
    pub fn xyz(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Unperturbed eigenvalues `lambda0' +- |(x, y, z)|`.
    pub fn split_eigenvalues(&self) -> (f64, f64) {
        let r = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        (self.lambda0_prime + r, self.lambda0_prime - r)
    }
}

fn frame_vectors(cd: &CouplingData) -> [Vec<f64>; 3] {
    [
        cd.f11
            .iter()
            .zip(&cd.f22)
            .map(|(a, b)| 0.5 * (a - b).re)
            .collect(),
        cd.f12.iter().map(|z| z.re).collect(),
        cd.f12.iter().map(|z| z.im).collect(),
    ]
}

/// Builds the frame at `p0 + delta`. Real-symmetric couplings are accepted and give `z = 0`.
pub fn frame3(cd: &CouplingData, dp: &DiabolicPoint, delta: &[f64]) -> Result<UnfoldingFrame3> {
    if cd.class == SymmetryClass::General {
        return Err(Error::ClassMismatch {
            expected: "Hermitian",
        });
    }
    if delta.len() != cd.n_params() {
        return Err(Error::DimensionMismatch {
            expected: cd.n_params(),
            actual: delta.len(),
        });
    }
    let [g_x, g_y, g_z] = frame_vectors(cd);
    let dot = |g: &[f64]| g.iter().zip(delta).map(|(a, b)| a * b).sum::<f64>();
    Ok(UnfoldingFrame3 {
        p: dp.p0.iter().zip(delta).map(|(a, b)| a + b).collect(),
        lambda0_prime: dp.lambda0 + 0.5 * (pair(&cd.f11, delta) + pair(&cd.f22, delta)).re,
        x: dot(&g_x),
        y: dot(&g_y),
        z: dot(&g_z),
        g_x,
        g_y,
        g_z,
    })
}

/// Solves `(x, y, z) = G Δp`; exact for three independent frame vectors, minimum-norm
/// with a kernel basis for more parameters.
pub fn invert_frame3(cd: &CouplingData, xyz: [f64; 3]) -> Result<FrameSolution> {
    let rows = frame_vectors(cd);
    solve_frame(&rows, &xyz)
}

/// `c = (x + xi)^2 + (y + eta)^2 + (z - i zeta)^2`.
pub fn c_hermitian(frame: &UnfoldingFrame3, ps: &PerturbationScalars) -> Complex64 {
    c_hermitian_xyz(frame.xyz(), ps)
}

pub fn c_hermitian_xyz([x, y, z]: [f64; 3], ps: &PerturbationScalars) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let a = ps.xi + x;
    let b = ps.eta + y;
    let w = -(i * ps.zeta) + z;
    a * a + b * b + w * w
}

/// `(Re c, Im c)` from the sphere and plane forms.
pub fn c_hermitian_parts([x, y, z]: [f64; 3], ps: &PerturbationScalars) -> (f64, f64) {
    let (rxi, ixi) = (ps.xi.re, ps.xi.im);
    let (reta, ieta) = (ps.eta.re, ps.eta.im);
    let (rz, iz) = (ps.zeta.re, ps.zeta.im);
    let (u, v, w) = (x + rxi, y + reta, z + iz);
    let re = u * u + v * v + w * w - (ixi * ixi + ieta * ieta + rz * rz);
    let im = 2.0 * (ixi * u + ieta * v - rz * w);
    (re, im)
}

/// `lambda0' + mu +- sqrt(c)` on the principal branch.
pub fn perturbed_eigenvalues3(
    frame: &UnfoldingFrame3,
    ps: &PerturbationScalars,
) -> (Complex64, Complex64) {
    let mid = ps.mu + frame.lambda0_prime;
    let root = c_hermitian(frame, ps).sqrt();
    (mid + root, mid - root)
}

/// Circle where the sphere `Re c = 0` meets the plane `Im c = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceptionalRing {
    pub center: [f64; 3],
    pub radius: f64,
    pub plane_normal: [f64; 3],
}

impl ExceptionalRing {
    /// Orthonormal pair spanning the ring plane.
    pub fn plane_basis(&self) -> ([f64; 3], [f64; 3]) {
        let n = self.plane_normal;
        let nn = norm3(n);
        let n = [n[0] / nn, n[1] / nn, n[2] / nn];
        // axis least aligned with the normal
        let k = (0..3)
            .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
            .unwrap_or(0);
        let mut e = [0.0; 3];
        e[k] = 1.0;
        let d = dot3(e, n);
        let e1 = [e[0] - d * n[0], e[1] - d * n[1], e[2] - d * n[2]];
        let l = norm3(e1);
        let e1 = [e1[0] / l, e1[1] / l, e1[2] / l];
        let e2 = cross(n, e1);
        (e1, e2)
    }

    /// `center + a e1 + b e2` in the ring plane.
    pub fn plane_point(&self, a: f64, b: f64) -> [f64; 3] {
        let (e1, e2) = self.plane_basis();
        std::array::from_fn(|k| self.center[k] + a * e1[k] + b * e2[k])
    }

    pub fn point(&self, theta: f64) -> [f64; 3] {
        let (s, c) = theta.sin_cos();
        self.plane_point(self.radius * c, self.radius * s)
    }

    /// `count` points equally spaced by angle.
    pub fn sample(&self, count: usize) -> Vec<[f64; 3]> {
        (0..count)
            .map(|k| self.point(std::f64::consts::TAU * k as f64 / count as f64))
            .collect()
    }

    /// Parameter-space images `p0 + Δp` of frame points.
    pub fn to_parameters(
        &self,
        cd: &CouplingData,
        dp: &DiabolicPoint,
        points: &[[f64; 3]],
    ) -> Result<Vec<FrameSolution>> {
        points
            .iter()
            .map(|&q| {
                let mut s = invert_frame3(cd, q)?;
                s.particular
                    .iter_mut()
                    .zip(&dp.p0)
                    .for_each(|(a, b)| *a += b);
                Ok(s)
            })
            .collect()
    }
}

/// The exceptional ring of the perturbed Hermitian family.
pub fn exceptional_ring(ps: &PerturbationScalars) -> Result<ExceptionalRing> {
    let plane_normal = [ps.xi.im, ps.eta.im, -ps.zeta.re];
    let radius = norm3(plane_normal);
    if radius <= 1e-14 * ps.epsilon_norm || radius == 0.0 {
        return Err(Error::DegenerateRing);
    }
    Ok(ExceptionalRing {
        center: [-ps.xi.re, -ps.eta.re, -ps.zeta.im],
        radius,
        plane_normal,
    })
}

/// Both eigenvector ratio forms at a ring point as `(N1, D1, N2, D2)`:
/// `(y + iz + eta + zeta) / (-x - xi)` and `(x + xi) / (y - iz + eta - zeta)`.
pub fn ring_ratio_forms([x, y, z]: [f64; 3], ps: &PerturbationScalars) -> [Complex64; 4] {
    let iz = Complex64::new(0.0, z);
    [
        ps.eta + ps.zeta + y + iz,
        -(ps.xi + x),
        ps.xi + x,
        ps.eta - ps.zeta + y - iz,
    ]
}

/// Relative disagreement `|N1 D2 - N2 D1| / (|N1 D2| + |N2 D1|)` of two ratio forms.
pub fn ratio_disagreement([n1, d1, n2, d2]: [Complex64; 4]) -> f64 {
    let a = n1 * d2;
    let b = n2 * d1;
    let scale = a.norm() + b.norm();
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Default on-plane / on-ring tolerance, `1e-10 eps^2`.
pub fn plane_tolerance(ps: &PerturbationScalars) -> f64 {
    1e-10 * ps.epsilon_norm * ps.epsilon_norm
}

/// Inside / outside / on the ring for a point in the plane `Im c = 0`.
pub fn ring_plane_partition(
    frame: &UnfoldingFrame3,
    ps: &PerturbationScalars,
) -> Result<RingRegion> {
    partition_xyz(frame.xyz(), ps, plane_tolerance(ps))
}

pub fn partition_xyz(xyz: [f64; 3], ps: &PerturbationScalars, tol: f64) -> Result<RingRegion> {
    let (re_c, im_c) = c_hermitian_parts(xyz, ps);
    if im_c.abs() > tol {
        return Err(Error::OffPlane { im_c });
    }
    Ok(if re_c.abs() <= tol {
        RingRegion::OnRing
    } else if re_c < 0.0 {
        RingRegion::Inside
    } else {
        RingRegion::Outside
    })
}

/// Residuals of the constant-gap surfaces for `|Re(lambda_+ - lambda_-)| = gap`
/// and `|Im(lambda_+ - lambda_-)| = gap` respectively.
pub fn gap_residuals(frame: &UnfoldingFrame3, ps: &PerturbationScalars, gap: f64) -> (f64, f64) {
    gap_residuals_xyz(frame.xyz(), ps, gap)
}

pub fn gap_residuals_xyz(xyz: [f64; 3], ps: &PerturbationScalars, gap: f64) -> (f64, f64) {
    let (re_c, im_c) = c_hermitian_parts(xyz, ps);
    let g2 = gap * gap;
    let tail = 4.0 * im_c * im_c;
    (
        g2 * g2 - 4.0 * g2 * re_c - tail,
        g2 * g2 + 4.0 * g2 * re_c - tail,
    )
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
