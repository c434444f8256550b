//! Small dense eigenvalue routines.
//!
//! Matrices are row-major `Vec<T>` of size `n × n`. The sizes in this crate
//! are tiny (at most a few hundred rows), so the cyclic Jacobi method is used:
//! it is simple, generic over the scalar, and accurate to working precision
//! for symmetric input.

use crate::scalar::{lit, Real};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a real symmetric matrix, sorted ascending.
pub fn symmetric_eigenvalues<T: Real>(mut a: Vec<T>, n: usize) -> Vec<T> {
    assert_eq!(a.len(), n * n, "matrix must be {n}x{n}");
    let scale = a.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if scale == T::zero() {
        return vec![T::zero(); n];
    }
    let eps = T::epsilon() * scale;
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= eps {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (lit::<T>(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<T> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    eig
}

/// Eigenvalues of the Hermitian matrix `re + i·im`, sorted ascending.
///
/// Computed through the real symmetric embedding `[[re, −im], [im, re]]`,
/// whose spectrum is that of the Hermitian matrix with every eigenvalue
/// doubled.
pub fn hermitian_eigenvalues<T: Real>(re: &[T], im: &[T], n: usize) -> Vec<T> {
    assert_eq!(re.len(), n * n);
    assert_eq!(im.len(), n * n);
    let m = 2 * n;
    let mut big = vec![T::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            let r = re[i * n + j];
            let s = im[i * n + j];
            big[i * m + j] = r;
            big[(i + n) * m + (j + n)] = r;
            big[i * m + (j + n)] = -s;
            big[(i + n) * m + j] = s;
        }
    }
    symmetric_eigenvalues(big, m).into_iter().step_by(2).collect()
}
