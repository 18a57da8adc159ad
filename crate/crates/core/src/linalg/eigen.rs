//! Exact eigensolver for small dense matrices.
//!
//! Self-adjoint matrices go through cyclic complex Jacobi rotations; general
//! matrices through Householder reduction to Hessenberg form followed by
//! single-shift complex QR iterations and triangular back-substitution.

use num_complex::Complex64;

use super::matrix::{norm, ComplexMatrix, SymmetryClass};
use crate::error::{Error, Result};

/// Largest matrix order accepted by [`eig_exact`].
pub const MAX_ORACLE_DIM: usize = 16;

/// Default residual tolerance, relative to the Frobenius norm of the input.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const MAX_JACOBI_SWEEPS: usize = 64;
const QR_ITERATIONS_PER_EIGENVALUE: usize = 60;

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<Complex64>,
    /// Unit-norm eigenvectors, in the same order as `eigenvalues`.
    pub eigenvectors: Vec<Vec<Complex64>>,
    /// `max_i ||A v_i - lambda_i v_i||`.
    pub residual: f64,
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Eigen-decomposition of `a`, treating it according to `class`.
///
/// The class is checked first; residuals above `1e-12 * ||A||_F` are reported as
/// [`Error::NonConvergence`].
pub fn eig_exact(a: &ComplexMatrix, class: SymmetryClass) -> Result<EigenDecomposition> {
    let dim = a.dim();
    if dim > MAX_ORACLE_DIM {
        return Err(Error::DimensionTooLarge {
            dim,
            max: MAX_ORACLE_DIM,
        });
    }
    class.check(a)?;

    let (eigenvalues, eigenvectors) = match class {
        SymmetryClass::RealSymmetric | SymmetryClass::Hermitian => jacobi(a)?,
        SymmetryClass::General => schur_eigen(a)?,
    };

    let residual = eigenvalues
        .iter()
        .zip(&eigenvectors)
        .map(|(&lambda, v)| {
            let av = a.mul_vec(v);
            av.iter()
                .zip(v)
                .map(|(x, y)| (x - lambda * y).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);

    let tol = RESIDUAL_TOLERANCE * a.frobenius_norm();
    if residual > tol {
        return Err(Error::NonConvergence {
            iterations: 0,
            residual,
        });
    }

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        residual,
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi for Hermitian input. Eigenvalues are sorted ascending.
fn jacobi(a: &ComplexMatrix) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
    let n = a.dim();
    let mut m = a.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    let target = f64::EPSILON * scale;

    let mut sweeps = 0;
    while off_diagonal_norm(&m) > target {
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(Error::NonConvergence {
                iterations: sweeps,
                residual: off_diagonal_norm(&m),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / mag;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G acts on (p, q): columns [c, -s conj(phase)] and [s, c conj(phase)]
                let g_pp = Complex64::new(c, 0.0);
                let g_qp = -phase.conj() * s;
                let g_pq = Complex64::new(s, 0.0);
                let g_qq = phase.conj() * c;
                apply_rotation(&mut m, &mut v, p, q, [[g_pp, g_pq], [g_qp, g_qq]]);
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues = order
        .iter()
        .map(|&i| Complex64::new(m[(i, i)].re, 0.0))
        .collect();
    let eigenvectors = order.iter().map(|&i| normalized(v.column(i))).collect();
    Ok((eigenvalues, eigenvectors))
}

/// `m <- G^H m G`, `v <- v G` for a unitary `G` supported on rows/columns `p`, `q`.
fn apply_rotation(
    m: &mut ComplexMatrix,
    v: &mut ComplexMatrix,
    p: usize,
    q: usize,
    g: [[Complex64; 2]; 2],
) {
    let n = m.dim();
    for k in 0..n {
        let mp = m[(k, p)];
        let mq = m[(k, q)];
        m[(k, p)] = mp * g[0][0] + mq * g[1][0];
        m[(k, q)] = mp * g[0][1] + mq * g[1][1];
        let vp = v[(k, p)];
        let vq = v[(k, q)];
        v[(k, p)] = vp * g[0][0] + vq * g[1][0];
        v[(k, q)] = vp * g[0][1] + vq * g[1][1];
    }
    for k in 0..n {
        let mp = m[(p, k)];
        let mq = m[(q, k)];
        m[(p, k)] = g[0][0].conj() * mp + g[1][0].conj() * mq;
        m[(q, k)] = g[0][1].conj() * mp + g[1][1].conj() * mq;
    }
}

fn normalized(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let nrm = norm(&v);
    if nrm > 0.0 {
        for z in &mut v {
            *z /= nrm;
        }
    }
    v
}

/// Reduces `a` to upper Hessenberg form `H = Q^H A Q`; returns `(H, Q)`.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.dim();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        let alpha = norm(&x);
        if alpha <= f64::MIN_POSITIVE {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            ONE
        };
        let mut w = x.clone();
        w[0] += phase * alpha;
        let wn = norm(&w);
        for z in &mut w {
            *z /= wn;
        }
        // P = I - 2 w w^H acting on indices k+1..n
        for j in 0..n {
            let dot: Complex64 = ((k + 1)..n).map(|i| w[i - k - 1].conj() * h[(i, j)]).sum();
            for i in (k + 1)..n {
                h[(i, j)] -= w[i - k - 1] * dot * 2.0;
            }
        }
        for i in 0..n {
            let dot: Complex64 = ((k + 1)..n).map(|j| h[(i, j)] * w[j - k - 1]).sum();
            for j in (k + 1)..n {
                h[(i, j)] -= dot * w[j - k - 1].conj() * 2.0;
            }
            let dotq: Complex64 = ((k + 1)..n).map(|j| q[(i, j)] * w[j - k - 1]).sum();
            for j in (k + 1)..n {
                q[(i, j)] -= dotq * w[j - k - 1].conj() * 2.0;
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Givens rotation `[[c, s], [-conj(s), c]]` zeroing `b` in `(a, b)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let r = an.hypot(b.norm());
    if r == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, ONE);
    }
    (an / r, (a / an) * b.conj() / r)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    // eigenvalue of [[a, b], [c, d]] closest to d
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn schur_eigen(a: &ComplexMatrix) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
    let n = a.dim();
    let (mut h, mut z) = hessenberg(a);
    let anorm = a.frobenius_norm().max(f64::MIN_POSITIVE);

    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let scale = if diag > 0.0 { diag } else { anorm };
            if sub <= f64::EPSILON * scale {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > QR_ITERATIONS_PER_EIGENVALUE {
            return Err(Error::NonConvergence {
                iterations: total,
                residual: h[(hi, hi - 1)].norm(),
            });
        }

        let shift = if iter % 11 == 0 {
            // exceptional shift to break cycles
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm(), 0.0) * 0.75
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for k in l..=hi {
            h[(k, k)] -= shift;
        }
        let mut rotations = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rotations.push((c, s));
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
        }
        for (idx, &(c, s)) in rotations.iter().enumerate() {
            let k = l + idx;
            let top = (k + 2).min(hi);
            for i in 0..=top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
            for i in 0..n {
                let x = z[(i, k)];
                let y = z[(i, k + 1)];
                z[(i, k)] = x * c + y * s.conj();
                z[(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in l..=hi {
            h[(k, k)] += shift;
        }
    }

    let eigenvalues: Vec<Complex64> = (0..n).map(|i| h[(i, i)]).collect();
    let small = f64::EPSILON * anorm;
    let eigenvectors = (0..n)
        .map(|k| {
            let lambda = h[(k, k)];
            let mut y = vec![ZERO; n];
            y[k] = ONE;
            for j in (0..k).rev() {
                let s: Complex64 = ((j + 1)..=k).map(|i| h[(j, i)] * y[i]).sum();
                let mut d = h[(j, j)] - lambda;
                if d.norm() < small {
                    d = Complex64::new(small, 0.0);
                }
                y[j] = -s / d;
            }
            normalized(z.mul_vec(&y))
        })
        .collect();
    Ok((eigenvalues, eigenvectors))
}
