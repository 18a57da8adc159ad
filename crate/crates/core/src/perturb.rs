//! Complex perturbations `A(p) + ΔA(p)` of a diabolic point.

use num_complex::Complex64;

use crate::diabolic::{pair, CouplingData, DiabolicPoint, MatrixFamily, ReducedProblem};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_split, inner, ComplexMatrix};

/// `eps_ij = (ΔA(p0) u_i, u_j)` and the combinations `mu, xi, eta, zeta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationScalars {
    pub eps11: Complex64,
    pub eps12: Complex64,
    pub eps21: Complex64,
    pub eps22: Complex64,
    pub mu: Complex64,
    pub xi: Complex64,
    pub eta: Complex64,
    pub zeta: Complex64,
    /// Frobenius norm of `ΔA(p0)`.
    pub epsilon_norm: f64,
}

impl PerturbationScalars {
    pub fn from_eps(eps: [Complex64; 4], epsilon_norm: f64) -> Self {
        let [eps11, eps12, eps21, eps22] = eps;
        Self {
            eps11,
            eps12,
            eps21,
            eps22,
            mu: (eps11 + eps22) * 0.5,
            xi: (eps11 - eps22) * 0.5,
            eta: (eps12 + eps21) * 0.5,
            zeta: (eps12 - eps21) * 0.5,
            epsilon_norm,
        }
    }

    pub fn zero() -> Self {
        Self::from_eps([Complex64::new(0.0, 0.0); 4], 0.0)
    }

    /// Scalars of `t ΔA`.
    pub fn scaled(&self, t: f64) -> Self {
        Self::from_eps(
            [
                self.eps11 * t,
                self.eps12 * t,
                self.eps21 * t,
                self.eps22 * t,
            ],
            self.epsilon_norm * t.abs(),
        )
    }

    pub fn eps(&self) -> [Complex64; 4] {
        [self.eps11, self.eps12, self.eps21, self.eps22]
    }

    pub fn is_zero(&self) -> bool {
        self.eps().iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }
}

/// Perturbation scalars for `ΔA` evaluated at the diabolic point.
pub fn perturbation_scalars(
    delta0: &ComplexMatrix,
    dp: &DiabolicPoint,
) -> Result<PerturbationScalars> {
    if delta0.dim() != dp.dim() || dp.u2.len() != dp.dim() {
        return Err(Error::DimensionMismatch {
            expected: dp.dim(),
            actual: delta0.dim(),
        });
    }
    let d1 = delta0.mul_vec(&dp.u1);
    let d2 = delta0.mul_vec(&dp.u2);
    Ok(PerturbationScalars::from_eps(
        [
            inner(&d1, &dp.u1),
            inner(&d1, &dp.u2),
            inner(&d2, &dp.u1),
            inner(&d2, &dp.u2),
        ],
        delta0.frobenius_norm(),
    ))
}

/// Evaluates a perturbation map at `p0` and reduces it.
pub fn perturbation_at<F: MatrixFamily + ?Sized>(
    delta: &F,
    dp: &DiabolicPoint,
) -> Result<PerturbationScalars> {
    perturbation_scalars(&delta.eval(&dp.p0), dp)
}

/// The reduced problem with `a_ij = <f_ij, Δp> + eps_ij`.
pub fn perturbed_reduced(
    cd: &CouplingData,
    dp: &DiabolicPoint,
    ps: &PerturbationScalars,
    delta: &[f64],
) -> ReducedProblem {
    let mut r = ReducedProblem::unperturbed(cd, dp.lambda0, delta);
    r.a11 += ps.eps11;
    r.a12 += ps.eps12;
    r.a21 += ps.eps21;
    r.a22 += ps.eps22;
    r
}

/// First-order complex eigenvalues `lambda_+-` of the perturbed family at `p0 + delta`.
pub fn perturbed_eigenvalues(
    cd: &CouplingData,
    dp: &DiabolicPoint,
    ps: &PerturbationScalars,
    delta: &[f64],
) -> (Complex64, Complex64) {
    perturbed_reduced(cd, dp, ps, delta).eigenvalues()
}

/// Zero-order eigenvectors of the perturbed family at `p0 + delta`.
pub fn perturbed_eigenvectors(
    cd: &CouplingData,
    dp: &DiabolicPoint,
    ps: &PerturbationScalars,
    delta: &[f64],
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    perturbed_reduced(cd, dp, ps, delta).eigenvectors(dp)
}

/// Largest modulus among the three conditions for the coupling to stay diabolic.
pub fn dp_persistence_residual(cd: &CouplingData, ps: &PerturbationScalars, delta: &[f64]) -> f64 {
    let r12 = pair(&cd.f12, delta) + ps.eps12;
    let r21 = pair(&cd.f21, delta) + ps.eps21;
    let r11 = pair(&cd.f11, delta) - pair(&cd.f22, delta) + ps.eps11 - ps.eps22;
    r12.norm().max(r21.norm()).max(r11.norm())
}

/// Default threshold for [`dp_persistence_residual`]: `1e-10 (||f|| ||Δp|| + eps)`.
pub fn persistence_tolerance(cd: &CouplingData, ps: &PerturbationScalars, delta: &[f64]) -> f64 {
    let dnorm = delta.iter().map(|x| x * x).sum::<f64>().sqrt();
    1e-10 * (cd.max_norm() * dnorm + ps.epsilon_norm)
}

/// `(Im xi, Im eta, Im zeta)` from the Hermitian / anti-Hermitian split of `ΔA(p0)`.
///
/// Requires a real eigenvector basis.
pub fn part_contributions(delta0: &ComplexMatrix, dp: &DiabolicPoint) -> Result<(f64, f64, f64)> {
    if !dp.is_real_basis() {
        return Err(Error::ClassMismatch {
            expected: "real-symmetric",
        });
    }
    if delta0.dim() != dp.dim() {
        return Err(Error::DimensionMismatch {
            expected: dp.dim(),
            actual: delta0.dim(),
        });
    }
    let (h, n) = hermitian_split(delta0);
    let form = |m: &ComplexMatrix, a: &[Complex64], b: &[Complex64]| inner(&m.mul_vec(a), b);
    let two_i = Complex64::new(0.0, 2.0);
    let im_xi = (form(&n, &dp.u1, &dp.u1) - form(&n, &dp.u2, &dp.u2)) / two_i;
    let im_eta = (form(&n, &dp.u1, &dp.u2) + form(&n, &dp.u2, &dp.u1)) / two_i;
    let im_zeta = (form(&h, &dp.u1, &dp.u2) - form(&h, &dp.u2, &dp.u1)) / two_i;
    Ok((im_xi.re, im_eta.re, im_zeta.re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diabolic::{
        coupling_vectors, split_eigenvalues, split_eigenvectors, vector_angle, AffineFamily,
    };
    use crate::linalg::{eig_exact, match_pairs, real_vector, SymmetryClass};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let data = (0..n * n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ComplexMatrix::from_row_major(n, data).unwrap()
    }

    fn cone() -> (AffineFamily, DiabolicPoint) {
        let base =
            ComplexMatrix::from_real_rows([[0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, -1.0]]);
        let s1 =
            ComplexMatrix::from_real_rows([[0.3, 0.1, 0.2], [0.1, -0.7, 0.0], [0.2, 0.0, 0.4]]);
        let s2 = ComplexMatrix::from_real_rows([[0.2, 0.9, 0.0], [0.9, 0.1, 0.3], [0.0, 0.3, 0.0]]);
        let fam = AffineFamily::new(base, vec![s1, s2], SymmetryClass::RealSymmetric).unwrap();
        let dp = DiabolicPoint::new(
            vec![0.0, 0.0],
            0.5,
            real_vector(&[1.0, 0.0, 0.0]),
            real_vector(&[0.0, 1.0, 0.0]),
        );
        (fam, dp)
    }

    #[test]
    fn zero_perturbation_scalars() {
        let (_, dp) = cone();
        let ps = perturbation_scalars(&ComplexMatrix::zeros(3), &dp).unwrap();
        assert!(ps.is_zero());
        assert_eq!(ps.mu, c(0.0, 0.0));
        assert_eq!(ps.epsilon_norm, 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let (_, dp) = cone();
        assert!(matches!(
            perturbation_scalars(&ComplexMatrix::zeros(2), &dp),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_scalars_reduce_to_unperturbed() {
        let (fam, dp) = cone();
        let cd = coupling_vectors(&fam, &dp).unwrap();
        let zero = PerturbationScalars::zero();
        for d in [[0.01, 0.0], [0.0, -0.02], [0.003, 0.007]] {
            assert_eq!(
                perturbed_eigenvalues(&cd, &dp, &zero, &d),
                split_eigenvalues(&cd, &dp, &d)
            );
            assert_eq!(
                perturbed_eigenvectors(&cd, &dp, &zero, &d).unwrap(),
                split_eigenvectors(&cd, &dp, &d).unwrap()
            );
        }
    }

    #[test]
    fn reduced_two_by_two_oracle() {
        let (fam, dp) = cone();
        let cd = coupling_vectors(&fam, &dp).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let ps =
                perturbation_scalars(&random_complex(&mut rng, 3).scale_real(0.01), &dp).unwrap();
            let (lp, lm) = perturbed_eigenvalues(&cd, &dp, &ps, &[0.0, 0.0]);
            let l0 = c(dp.lambda0, 0.0);
            let m =
                ComplexMatrix::from_rows([[l0 + ps.eps11, ps.eps21], [ps.eps12, l0 + ps.eps22]]);
            let eig = eig_exact(&m, SymmetryClass::General).unwrap();
            let (a, b) = match_pairs((eig.eigenvalues[0], eig.eigenvalues[1]), (lp, lm));
            assert!((lp - a).norm() < 1e-14 && (lm - b).norm() < 1e-14);
        }
    }

    #[test]
    fn hermitian_perturbation_structure() {
        let (_, dp) = cone();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_complex(&mut rng, 3);
        let (h, n) = hermitian_split(&m);
        let ps = perturbation_scalars(&h, &dp).unwrap();
        assert!(ps.xi.im.abs() < 1e-15 && ps.eta.im.abs() < 1e-15 && ps.zeta.re.abs() < 1e-15);
        let (ixi, ieta, _) = part_contributions(&h, &dp).unwrap();
        assert!(ixi.abs() < 1e-15 && ieta.abs() < 1e-15);
        let (_, _, izeta) = part_contributions(&n, &dp).unwrap();
        assert!(izeta.abs() < 1e-15);
    }

    #[test]
    fn part_contributions_match_scalars() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 0..50 {
            let (_, dp) = cone();
            let dp = dp.rotated(0.1 * k as f64, 0.0);
            let m = random_complex(&mut rng, 3);
            let ps = perturbation_scalars(&m, &dp).unwrap();
            let (a, b, cc) = part_contributions(&m, &dp).unwrap();
            assert!((a - ps.xi.im).abs() < 1e-12);
            assert!((b - ps.eta.im).abs() < 1e-12);
            assert!((cc - ps.zeta.im).abs() < 1e-12);
        }
    }

    #[test]
    fn part_contributions_need_real_basis() {
        let (_, dp) = cone();
        let dp = dp.rotated(0.3, 0.5);
        assert!(part_contributions(&ComplexMatrix::identity(3), &dp).is_err());
    }

    #[test]
    fn gauge_phase_leaves_eigenvalues() {
        let (fam, dp) = cone();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_complex(&mut rng, 3).scale_real(0.01);
        let cd = coupling_vectors(&fam, &dp).unwrap();
        let ps = perturbation_scalars(&m, &dp).unwrap();
        let d = [0.004, -0.002];
        let (lp, lm) = perturbed_eigenvalues(&cd, &dp, &ps, &d);
        for theta in [0.4, 1.7, -2.2] {
            let g = DiabolicPoint {
                u2: dp
                    .u2
                    .iter()
                    .map(|z| z * Complex64::from_polar(1.0, theta))
                    .collect(),
                ..dp.clone()
            };
            let cdg = coupling_vectors(&fam, &g).unwrap();
            let psg = perturbation_scalars(&m, &g).unwrap();
            let pair_g = perturbed_eigenvalues(&cdg, &g, &psg, &d);
            let (a, b) = match_pairs(pair_g, (lp, lm));
            assert!((a - lp).norm() < 1e-14 && (b - lm).norm() < 1e-14);
        }
    }

    #[test]
    fn persistence_residual_cases() {
        let (fam, dp) = cone();
        let cd = coupling_vectors(&fam, &dp).unwrap();
        let zero = PerturbationScalars::zero();
        assert_eq!(dp_persistence_residual(&cd, &zero, &[0.0, 0.0]), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ps = perturbation_scalars(&random_complex(&mut rng, 3).scale_real(0.01), &dp).unwrap();
        assert!(dp_persistence_residual(&cd, &ps, &[0.0, 0.0]) > 0.0);
    }

    #[test]
    fn persistence_vanishes_in_kernel() {
        // three-parameter family whose two splitting forms share a kernel line
        let base = ComplexMatrix::from_real_rows([[0.0, 0.0], [0.0, 0.0]]);
        let s = |a: f64, b: f64| ComplexMatrix::from_real_rows([[a, b], [b, -a]]);
        let fam = AffineFamily::new(
            base,
            vec![s(1.0, 0.0), s(0.0, 1.0), s(1.0, 1.0)],
            SymmetryClass::RealSymmetric,
        )
        .unwrap();
        let dp = DiabolicPoint::new(
            vec![0.0; 3],
            0.0,
            real_vector(&[1.0, 0.0]),
            real_vector(&[0.0, 1.0]),
        );
        let cd = coupling_vectors(&fam, &dp).unwrap();
        let d = [0.3, 0.3, -0.3];
        let zero = PerturbationScalars::zero();
        assert!(dp_persistence_residual(&cd, &zero, &d) <= 1e-14);
        let (a, b) = split_eigenvalues(&cd, &dp, &d);
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn exceptional_coupling_merges_eigenvectors() {
        // reduced problem [[1, 1], [0, 1]] shifted: a Jordan block at Δp = 0
        let base = ComplexMatrix::zeros(2);
        let s = ComplexMatrix::from_real_rows([[1.0, 0.0], [0.0, -1.0]]);
        let fam = AffineFamily::new(base, vec![s], SymmetryClass::RealSymmetric).unwrap();
        let dp = DiabolicPoint::new(
            vec![0.0],
            0.0,
            real_vector(&[1.0, 0.0]),
            real_vector(&[0.0, 1.0]),
        );
        let cd = coupling_vectors(&fam, &dp).unwrap();
        let ps = PerturbationScalars::from_eps(
            [c(0.0, 0.0), c(0.0, 0.0), c(0.01, 0.0), c(0.0, 0.0)],
            0.01,
        );
        let (up, um) = perturbed_eigenvectors(&cd, &dp, &ps, &[0.0]).unwrap();
        assert!(vector_angle(&up, &um) < 1e-6);
    }

    #[test]
    fn ratio_forms_agree_generically() {
        let (fam, dp) = cone();
        let cd = coupling_vectors(&fam, &dp).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let ps =
                perturbation_scalars(&random_complex(&mut rng, 3).scale_real(0.01), &dp).unwrap();
            let d = [rng.gen_range(-0.01..0.01), rng.gen_range(-0.01..0.01)];
            let r = perturbed_reduced(&cd, &dp, &ps, &d);
            let (lp, lm) = r.eigenvalues();
            for lambda in [lp, lm] {
                let [n1, d1, n2, d2] = r.ratio_forms(lambda);
                let lhs = n1 * d2;
                let rhs = n2 * d1;
                assert!((lhs - rhs).norm() <= 1e-10 * (lhs.norm() + rhs.norm()));
            }
        }
    }
}
