//! Eigenvalue front-end for the analytic block matrices.
//!
//! Every sector matrix in this crate satisfies a detailed-balance
//! relation: `M[i,j] / M[j,i]` is a ratio of positive weights
//! `w_j^2 / w_i^2`, so `diag(w) M diag(w)^-1` is symmetric. The
//! similarity is applied implicitly through the entrywise signed
//! geometric mean `sgn * sqrt(M[i,j] M[j,i])`, which never overflows
//! even when the weights span hundreds of orders of magnitude, and the
//! result goes to the symmetric tridiagonal eigensolver. That solver is
//! unconditionally convergent; the general Schur iteration is not (it
//! stalls on the permutation-shaped blocks that appear at the pure
//! squeezed-vacuum point).
//!
//! A sign clash between `M[i,j]` and `M[j,i]` above noise level means
//! the detailed-balance assumption is broken, which is reported as an
//! error rather than silently symmetrized away.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Entries below `SIGN_GATE * max |entry|` are cancellation residue;
/// opposite signs across the diagonal are only an error above this.
const SIGN_GATE: f64 = 1e-12;

/// Eigenvalues, sorted ascending, of a real matrix that is diagonally
/// similar to a symmetric one.
pub(crate) fn symmetrized_eigenvalues(m: DMatrix<f64>) -> Result<Vec<f64>> {
    debug_assert_eq!(m.nrows(), m.ncols());
    let n = m.nrows();
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let scale = m.abs().max();
    let floor = SIGN_GATE * scale;
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        s[(i, i)] = m[(i, i)];
        for j in (i + 1)..n {
            let a = m[(i, j)];
            let b = m[(j, i)];
            let val = if a * b > 0.0 {
                a.signum() * (a * b).sqrt()
            } else if a.abs() <= floor || b.abs() <= floor {
                0.0
            } else {
                return Err(Error::Numerical(format!(
                    "entries ({i},{j}) = {a:.6e} and ({j},{i}) = {b:.6e} have \
                     incompatible signs: matrix is not similar to a symmetric one"
                )));
            };
            s[(i, j)] = val;
            s[(j, i)] = val;
        }
    }
    let mut out: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    out.sort_by(|a, b| a.partial_cmp(b).expect("symmetric eigenvalues are not NaN"));
    Ok(out)
}
