//! Dense linear algebra helpers for the fixed 4x4 problems in this crate:
//! a cyclic Jacobi eigensolver for complex Hermitian matrices, a PSD matrix
//! square root, a Cholesky factorization, and a pivoted Gaussian solver for
//! the small real systems of tomographic linear inversion.

#![allow(clippy::needless_range_loop)]

use crate::fmath;
use crate::qstate::TwoQubitOperator;
use alloc::vec::Vec;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigen-decomposition of a Hermitian 4x4 matrix.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues ascending and the
/// k-th column of the eigenvector matrix matching the k-th eigenvalue.
pub fn hermitian_eigen(m: &TwoQubitOperator) -> ([f64; 4], TwoQubitOperator) {
    let mut a = *m.entries();
    let mut v = [[ZERO; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = ONE;
    }

    // Cyclic Jacobi with complex plane rotations. Quadratic convergence;
    // a handful of sweeps suffices at this size.
    for _sweep in 0..64 {
        let mut off = 0.0_f64;
        for p in 0..4 {
            for q in (p + 1)..4 {
                off += a[p][q].norm_sqr();
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..4 {
            for q in (p + 1)..4 {
                let apq = a[p][q];
                let mag = apq.norm();
                if mag < 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                // Rotation angle zeroing the (p,q) entry.
                let cot2 = (app - aqq) / (2.0 * mag);
                let t = if cot2 >= 0.0 {
                    1.0 / (cot2 + fmath::sqrt(1.0 + cot2 * cot2))
                } else {
                    -1.0 / (-cot2 + fmath::sqrt(1.0 + cot2 * cot2))
                };
                let c = 1.0 / fmath::sqrt(1.0 + t * t);
                let s = t * c;

                // J is identity except J[p][p]=c, J[p][q]=-s*phase,
                // J[q][p]=s*conj(phase), J[q][q]=c; apply A <- J^dag A J.
                let cs = Complex64::new(c, 0.0);
                let sp = phase * s;
                for k in 0..4 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = akp * cs + akq * sp.conj();
                    a[k][q] = -akp * sp + akq * cs;
                }
                for k in 0..4 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = apk * cs + aqk * sp;
                    a[q][k] = -apk * sp.conj() + aqk * cs;
                }
                for k in 0..4 {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = vkp * cs + vkq * sp.conj();
                    v[k][q] = -vkp * sp + vkq * cs;
                }
            }
        }
    }

    let mut pairs: [(f64, usize); 4] = [(0.0, 0); 4];
    for (i, pair) in pairs.iter_mut().enumerate() {
        *pair = (a[i][i].re, i);
    }
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());

    let mut eigs = [0.0_f64; 4];
    let mut vecs = [[ZERO; 4]; 4];
    for (slot, &(val, src)) in pairs.iter().enumerate() {
        eigs[slot] = val;
        for k in 0..4 {
            vecs[k][slot] = v[k][src];
        }
    }
    (eigs, TwoQubitOperator::new(vecs))
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &TwoQubitOperator) -> [f64; 4] {
    hermitian_eigen(m).0
}

/// Square root of a positive semidefinite Hermitian matrix. Slightly
/// negative eigenvalues from rounding are clamped to zero.
pub fn sqrtm_psd(m: &TwoQubitOperator) -> TwoQubitOperator {
    let (eigs, vecs) = hermitian_eigen(m);
    let mut out = [[ZERO; 4]; 4];
    for (k, &lam) in eigs.iter().enumerate() {
        let root = fmath::sqrt(lam.max(0.0));
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] += vecs.entry(i, k) * vecs.entry(j, k).conj() * root;
            }
        }
    }
    TwoQubitOperator::new(out)
}

/// Lower-triangular Cholesky factor of a Hermitian positive definite matrix,
/// or `None` when a pivot is not strictly positive.
pub fn cholesky_lower(m: &TwoQubitOperator) -> Option<TwoQubitOperator> {
    let a = m.entries();
    let mut l = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..=i {
            let mut acc = a[i][j];
            for k in 0..j {
                acc -= l[i][k] * l[j][k].conj();
            }
            if i == j {
                let d = acc.re;
                if d <= 0.0 {
                    return None;
                }
                l[i][j] = Complex64::new(fmath::sqrt(d), 0.0);
            } else {
                l[i][j] = acc / l[j][j];
            }
        }
    }
    Some(TwoQubitOperator::new(l))
}

/// Solve the dense real system `A x = b` by Gaussian elimination with
/// partial pivoting. Returns `None` when a pivot falls below `1e-12`
/// (rank-deficient system).
pub fn solve_real(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs: Vec<f64> = b.to_vec();

    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if fmath::abs(m[row][col]) > fmath::abs(m[pivot][col]) {
                pivot = row;
            }
        }
        if fmath::abs(m[pivot][col]) < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                let upper = m[col][k];
                m[row][k] -= f * upper;
            }
            rhs[row] -= f * rhs[col];
        }
    }

    let mut x = alloc::vec![0.0_f64; n];
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for k in (col + 1)..n {
            acc -= m[col][k] * x[k];
        }
        x[col] = acc / m[col][col];
    }
    Some(x)
}
