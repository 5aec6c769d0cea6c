//! Small dense-linear-algebra helpers shared by the discrete modules.
//!
//! Everything here works with matrices that are symmetric with respect to a
//! diagonal weight `m` (a lumped mass or boundary arc-length measure), i.e.
//! `M A` symmetric for `M = diag(m)`. Such operators are diagonalised by
//! conjugating with `M^{1/2}`, which is what [`weighted_sym_eigen`] does.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()))
}

pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()))
}

/// Deviation of `a` from symmetry, relative to its largest entry.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let scale = max_abs(a).max(1e-300);
    let mut worst = 0.0_f64;
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst / scale
}

/// Deviation of `a` from symmetry in the weighted inner product, i.e. of
/// `diag(m) a` from plain symmetry, relative scale.
pub fn weighted_asymmetry(a: &DMatrix<f64>, m: &DVector<f64>) -> f64 {
    let mut wa = a.clone();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            wa[(i, j)] *= m[i];
        }
    }
    asymmetry(&wa)
}

/// Eigendecomposition of an operator `a` that is self-adjoint in the inner
/// product weighted by `m > 0`. Returns `(vals, vecs)` with columns of
/// `vecs` m-orthonormal and `a = vecs · diag(vals) · vecsᵀ · diag(m)`.
pub fn weighted_sym_eigen(a: &DMatrix<f64>, m: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    if a.ncols() != n || m.len() != n {
        return Err(Error::domain("weighted_sym_eigen: dimension mismatch"));
    }
    if m.iter().any(|&w| w <= 0.0) {
        return Err(Error::domain("weighted_sym_eigen: weights must be positive"));
    }
    let sq: Vec<f64> = m.iter().map(|w| w.sqrt()).collect();
    let mut s = a.clone();
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] *= sq[i] / sq[j];
        }
    }
    // Round-off can leave s slightly asymmetric; fold it before decomposing.
    let s = (&s + s.transpose()) * 0.5;
    let eig = s.clone().symmetric_eigen();
    // The QR-based solver can leave residuals around 1e-6 on clustered
    // spectra; a couple of Jacobi sweeps from its near-diagonal output
    // restore machine-precision eigenpairs.
    let (vals, q) = jacobi_refine(&s, eig.eigenvectors);
    let mut vecs = q;
    for i in 0..n {
        for j in 0..n {
            vecs[(i, j)] /= sq[i];
        }
    }
    Ok((vals, vecs))
}

/// Cyclic Jacobi sweeps on d = qᵀsq (near-diagonal), rotations folded
/// back into q. Returns the diagonal and the refined orthogonal factor.
fn jacobi_refine(s: &DMatrix<f64>, mut q: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = s.nrows();
    let mut d = q.transpose() * s * &q;
    d = (&d + d.transpose()) * 0.5;
    let scale = d.diagonal().iter().cloned().fold(0.0_f64, |a, b| a.max(b.abs())).max(1e-300);
    for _ in 0..8 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for r in (p + 1)..n {
                off = off.max(d[(p, r)].abs());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apq = d[(p, r)];
                if apq.abs() <= 1e-16 * scale {
                    continue;
                }
                let theta = (d[(r, r)] - d[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let dkp = d[(k, p)];
                    let dkr = d[(k, r)];
                    d[(k, p)] = c * dkp - sn * dkr;
                    d[(k, r)] = sn * dkp + c * dkr;
                }
                for k in 0..n {
                    let dpk = d[(p, k)];
                    let drk = d[(r, k)];
                    d[(p, k)] = c * dpk - sn * drk;
                    d[(r, k)] = sn * dpk + c * drk;
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = c * qkp - sn * qkr;
                    q[(k, r)] = sn * qkp + c * qkr;
                }
                d[(p, r)] = 0.0;
                d[(r, p)] = 0.0;
            }
        }
    }
    (d.diagonal().into_owned(), q)
}

/// Apply a scalar function through the weighted eigendecomposition:
/// `f(a) = vecs · diag(f(vals)) · vecsᵀ · diag(m)`.
pub fn weighted_matrix_function(
    vals: &DVector<f64>,
    vecs: &DMatrix<f64>,
    m: &DVector<f64>,
    f: impl Fn(f64) -> f64,
) -> DMatrix<f64> {
    let n = vecs.nrows();
    let k = vecs.ncols();
    let mut scaled = vecs.clone();
    for j in 0..k {
        let fj = f(vals[j]);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    let mut vt_m = vecs.transpose();
    for j in 0..n {
        for i in 0..k {
            vt_m[(i, j)] *= m[j];
        }
    }
    scaled * vt_m
}

/// LU solve `a x = rhs` with one step of iterative refinement. The
/// refinement matters for the stiff boundary blocks that arise at large
/// resolvent shifts, where a raw LU solve loses enough digits to pollute
/// conservation checks.
pub fn solve_refined(a: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let lu = a.clone().lu();
    let mut x = lu
        .solve(rhs)
        .ok_or_else(|| Error::numeric("solve_refined: singular matrix"))?;
    let resid = rhs - a * &x;
    if let Some(corr) = lu.solve(&resid) {
        x += corr;
    }
    Ok(x)
}

pub fn solve_refined_vec(a: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let m = DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice());
    let x = solve_refined(a, &m)?;
    Ok(DVector::from_column_slice(x.as_slice()))
}

/// 1-norm condition estimate via explicit inverse; fine at desk scale.
pub fn cond_1(a: &DMatrix<f64>) -> f64 {
    let norm1 = |m: &DMatrix<f64>| {
        (0..m.ncols())
            .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)
    };
    match a.clone().try_inverse() {
        Some(inv) => norm1(a) * norm1(&inv),
        None => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weighted_eigen_reconstructs() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, -0.5, 0.0, -1.0, 2.0, -1.0, 0.0, -0.5, 2.0]);
        let m = DVector::from_vec(vec![2.0, 1.0, 2.0]);
        // m-symmetric: m_i a_ij = m_j a_ji holds for the numbers above.
        let (vals, vecs) = weighted_sym_eigen(&a, &m).unwrap();
        let back = weighted_matrix_function(&vals, &vecs, &m, |x| x);
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(back[(i, j)], a[(i, j)], epsilon = 1e-12);
            }
        }
        // m-orthonormality of the eigenvectors.
        for p in 0..3 {
            for q in 0..3 {
                let dot: f64 = (0..3).map(|i| m[i] * vecs[(i, p)] * vecs[(i, q)]).sum();
                let expect = if p == q { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot, expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn matrix_exponential_of_zero_is_identity() {
        let a = DMatrix::zeros(4, 4);
        let m = DVector::from_element(4, 0.3);
        let (vals, vecs) = weighted_sym_eigen(&a, &m).unwrap();
        let e = weighted_matrix_function(&vals, &vecs, &m, f64::exp);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(e[(i, j)], expect, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn refined_solve_matches_direct() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let rhs = DVector::from_vec(vec![1.0, 2.0]);
        let x = solve_refined_vec(&a, &rhs).unwrap();
        let back = &a * &x;
        assert_abs_diff_eq!(back[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(back[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn cond_of_identity_is_one() {
        let a = DMatrix::<f64>::identity(5, 5);
        assert_abs_diff_eq!(cond_1(&a), 1.0, epsilon = 1e-12);
    }
}
