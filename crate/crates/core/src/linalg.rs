//! Dense linear algebra for the small systems of the norm solvers.

use crate::scalar::Scalar;

pub type Matrix<T> = Vec<Vec<T>>;

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` for a numerically singular matrix.
pub fn solve<T: Scalar>(mut a: Matrix<T>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if !(a[piv][col].abs() > T::zero()) || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let m = a[row][col] / a[col][col];
            if m == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[row][k] = a[row][k] - m * v;
            }
            b[row] = b[row] - m * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let s: T = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Inverse by Gauss-Jordan elimination.
pub fn invert<T: Scalar>(a: &Matrix<T>) -> Option<Matrix<T>> {
    let n = a.len();
    let mut m: Matrix<T> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if !(m[piv][col].abs() > T::zero()) {
            return None;
        }
        m.swap(col, piv);
        let d = m[col][col];
        m[col].iter_mut().for_each(|v| *v = *v / d);
        for row in 0..n {
            if row != col {
                let f = m[row][col];
                if f != T::zero() {
                    for k in 0..2 * n {
                        let v = m[col][k];
                        m[row][k] = m[row][k] - f * v;
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_vec<T: Scalar>(a: &Matrix<T>, x: &[T]) -> Vec<T> {
    a.iter().map(|row| row.iter().zip(x).map(|(u, v)| *u * *v).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_and_inverts() {
        let a: Matrix<f64> = vec![vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 0.0], vec![3.0, 0.0, 1.0]];
        let x = solve(a.clone(), vec![5.0, 3.0, 6.0]).unwrap();
        let back = mat_vec(&a, &x);
        for (u, v) in back.iter().zip([5.0, 3.0, 6.0]) {
            assert!((u - v).abs() < 1e-12);
        }
        let inv = invert(&a).unwrap();
        let y = mat_vec(&inv, &[5.0, 3.0, 6.0]);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-12);
        }
        assert!(solve(vec![vec![1.0f64, 2.0], vec![2.0, 4.0]], vec![1.0, 1.0]).is_none());
    }
}
