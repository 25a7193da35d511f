//! Small dense factorizations for the modal systems (n <= 32).

use crate::error::{Error, Result};

/// In-place lower Cholesky of a symmetric positive definite matrix stored
/// row-major. Only the lower triangle of the result is meaningful.
pub(crate) fn cholesky_factor(a: &mut [f64], n: usize) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d <= 0.0 || d.is_nan() {
            return Err(Error::FactorizationFailure {
                column: j,
                min_pivot: d,
            });
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Ok(())
}

/// Solves `L L^T x = b` in place given the factor from [`cholesky_factor`].
pub(crate) fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    debug_assert_eq!(l.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// In-place LU with partial pivoting; `piv` receives the row permutation.
pub(crate) fn lu_factor(a: &mut [f64], piv: &mut [usize], n: usize) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(piv.len(), n);
    for (i, p) in piv.iter_mut().enumerate() {
        *p = i;
    }
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = a[col * n + col].abs();
        for r in (col + 1)..n {
            let v = a[r * n + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val == 0.0 || !pivot_val.is_finite() {
            return Err(Error::SingularMatrix { column: col });
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            piv.swap(col, pivot_row);
        }
        let d = a[col * n + col];
        for r in (col + 1)..n {
            let f = a[r * n + col] / d;
            a[r * n + col] = f;
            for k in (col + 1)..n {
                a[r * n + k] -= f * a[col * n + k];
            }
        }
    }
    Ok(())
}

/// Solves `A x = b` given the LU factor and pivot vector.
pub(crate) fn lu_solve(lu: &[f64], piv: &[usize], n: usize, b: &mut [f64]) {
    let mut x = vec![0.0; n];
    for i in 0..n {
        x[i] = b[piv[i]];
    }
    for i in 0..n {
        for k in 0..i {
            x[i] -= lu[i * n + k] * x[k];
        }
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            x[i] -= lu[i * n + k] * x[k];
        }
        x[i] /= lu[i * n + i];
    }
    b.copy_from_slice(&x);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        // A = I + v v^T is SPD.
        let n = 4;
        let v = [0.3, -1.2, 0.7, 0.05];
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = v[i] * v[j] + if i == j { 1.0 } else { 0.0 };
            }
        }
        let a0 = a.clone();
        cholesky_factor(&mut a, n).unwrap();
        let mut b = vec![1.0, -2.0, 0.5, 3.0];
        let rhs = b.clone();
        cholesky_solve(&a, n, &mut b);
        for i in 0..n {
            let mut r = -rhs[i];
            for j in 0..n {
                r += a0[i * n + j] * b[j];
            }
            assert!(r.abs() < 1e-13, "row {i} residual {r}");
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = vec![1.0, 2.0, 2.0, 1.0]; // eigenvalues 3, -1
        match cholesky_factor(&mut a, 2) {
            Err(Error::FactorizationFailure { column: 1, min_pivot }) => {
                assert!(min_pivot <= 0.0);
            }
            other => panic!("expected FactorizationFailure, got {other:?}"),
        }
    }

    #[test]
    fn lu_solves_general_system() {
        let n = 3;
        let a0 = [0.0, 2.0, 1.0, 1.0, -1.0, 0.5, 3.0, 0.1, -2.0];
        let mut a = a0.to_vec();
        let mut piv = vec![0; n];
        lu_factor(&mut a, &mut piv, n).unwrap();
        let mut b = vec![1.0, 0.0, -1.0];
        let rhs = b.clone();
        lu_solve(&a, &piv, n, &mut b);
        for i in 0..n {
            let mut r = -rhs[i];
            for j in 0..n {
                r += a0[i * n + j] * b[j];
            }
            assert!(r.abs() < 1e-13);
        }
    }

    #[test]
    fn lu_rejects_singular() {
        let mut a = vec![1.0, 2.0, 2.0, 4.0];
        let mut piv = vec![0; 2];
        assert!(matches!(
            lu_factor(&mut a, &mut piv, 2),
            Err(Error::SingularMatrix { .. })
        ));
    }
}
