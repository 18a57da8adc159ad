//! Inversion of the linear maps `Δp -> (x, y[, z])` used by the unfolding frames.

use crate::error::{Error, Result};
use crate::linalg::{eig_exact, ComplexMatrix, SymmetryClass};

/// Frames whose condition number exceeds this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Solution set `particular + span(null_basis)` of `G Δp = target`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSolution {
    /// Minimum-norm solution.
    pub particular: Vec<f64>,
    /// Orthonormal basis of the kernel of `G`; empty when `G` is square.
    pub null_basis: Vec<Vec<f64>>,
    /// Ratio of the extreme singular values of `G`.
    pub condition: f64,
}

/// Condition number of the `k x n` matrix with the given rows (`k <= n`).
pub fn condition_number(rows: &[Vec<f64>]) -> f64 {
    let gram = gram(rows);
    let k = rows.len();
    let m = ComplexMatrix::from_row_major(k, gram.iter().flatten().map(|&v| v.into()).collect())
        .expect("gram matrix is square");
    let eig = match eig_exact(&m, SymmetryClass::RealSymmetric) {
        Ok(e) => e,
        Err(_) => return f64::INFINITY,
    };
    let lo = eig.eigenvalues.first().map_or(0.0, |z| z.re);
    let hi = eig.eigenvalues.last().map_or(0.0, |z| z.re);
    if lo <= 0.0 || hi <= 0.0 {
        f64::INFINITY
    } else {
        (hi / lo).sqrt()
    }
}

/// Solves `G Δp = target` for the rows of `G`, returning the minimum-norm
/// solution and a kernel basis.
pub fn solve_frame(rows: &[Vec<f64>], target: &[f64]) -> Result<FrameSolution> {
    let k = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if k == 0 || target.len() != k || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(
            "frame rows and target disagree in shape".into(),
        ));
    }
    if n < k {
        return Err(Error::SingularFrame {
            condition: f64::INFINITY,
        });
    }
    let condition = condition_number(rows);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularFrame { condition });
    }
    let particular = if n == k {
        solve_square(rows.to_vec(), target.to_vec()).ok_or(Error::SingularFrame { condition })?
    } else {
        // G^T (G G^T)^{-1} target
        let w =
            solve_square(gram(rows), target.to_vec()).ok_or(Error::SingularFrame { condition })?;
        (0..n)
            .map(|j| (0..k).map(|i| rows[i][j] * w[i]).sum())
            .collect()
    };
    Ok(FrameSolution {
        particular,
        null_basis: null_basis(rows),
        condition,
    })
}

fn gram(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|a| {
            rows.iter()
                .map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum())
                .collect()
        })
        .collect()
}

/// Gaussian elimination with partial pivoting.
pub(crate) fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Gram-Schmidt on the standard basis against the row space.
fn null_basis(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows[0].len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut span: Vec<Vec<f64>> = Vec::new();
    let orthogonalize = |v: &mut Vec<f64>, against: &[Vec<f64>]| {
        for q in against {
            let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
        }
    };
    for r in rows {
        let mut v = r.clone();
        orthogonalize(&mut v, &span);
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 0.0 {
            span.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    for j in 0..n {
        if span.len() + basis.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[j] = 1.0;
        // two passes keep the basis orthogonal to roundoff
        for _ in 0..2 {
            orthogonalize(&mut v, &span);
            orthogonalize(&mut v, &basis);
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-8 {
            basis.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(rows: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
        rows.iter()
            .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    #[test]
    fn square_system_is_solved_exactly() {
        let rows = vec![vec![2.0, 1.0], vec![-1.0, 3.0]];
        let s = solve_frame(&rows, &[3.0, 2.0]).unwrap();
        assert!(s.null_basis.is_empty());
        let back = apply(&rows, &s.particular);
        assert!((back[0] - 3.0).abs() < 1e-15 && (back[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn wide_system_has_kernel() {
        let rows = vec![vec![1.0, 0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0, 2.0]];
        let s = solve_frame(&rows, &[1.0, -1.0]).unwrap();
        assert_eq!(s.null_basis.len(), 2);
        let back = apply(&rows, &s.particular);
        assert!((back[0] - 1.0).abs() < 1e-14 && (back[1] + 1.0).abs() < 1e-14);
        for v in &s.null_basis {
            assert!(apply(&rows, v).iter().all(|x| x.abs() < 1e-14));
            // minimum norm: particular is orthogonal to the kernel
            let d: f64 = v.iter().zip(&s.particular).map(|(a, b)| a * b).sum();
            assert!(d.abs() < 1e-14);
        }
    }

    #[test]
    fn dependent_rows_are_singular() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(matches!(
            solve_frame(&rows, &[1.0, 1.0]),
            Err(Error::SingularFrame { .. })
        ));
    }

    #[test]
    fn condition_of_orthogonal_rows_is_one() {
        let rows = vec![vec![3.0, 0.0, 0.0], vec![0.0, 0.0, 3.0]];
        assert!((condition_number(&rows) - 1.0).abs() < 1e-14);
    }
}
