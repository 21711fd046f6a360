//! The sign-split embedding: double the index set, write `M = P - N` with
//! entrywise non-negative `P` and `N`, and evolve `((P, N), (N, P))` on
//! antisymmetric vectors `(x, -x)`, which reproduces the dynamics of `M`
//! using only non-negative weights.
//!
//! The doubled index layout is `[copy-1 block; copy-2 block]` contiguous, so
//! the copy maps are plain offset arithmetic.

use crate::error::{Error, Result};
use crate::oracle::Oracle;

/// Default tolerance on the antisymmetry residual when projecting back.
pub const ANTISYMMETRY_TOL: f64 = 1e-8;

/// Index of `s` in the first copy of a doubled space of base size `n`.
pub fn sigma1(s: usize, _n: usize) -> usize {
    s
}

/// Index of `s` in the second copy.
pub fn sigma2(s: usize, n: usize) -> usize {
    s + n
}

/// Base index of a doubled index.
pub fn pi(bar_s: usize, n: usize) -> usize {
    if bar_s < n {
        bar_s
    } else {
        bar_s - n
    }
}

/// Copy (1 or 2) a doubled index belongs to.
pub fn copy_of(bar_s: usize, n: usize) -> u8 {
    if bar_s < n {
        1
    } else {
        2
    }
}

/// Splits `M` into its entrywise positive part `P` and negative-magnitude
/// part `N`, so `M = P - N` with both parts entrywise non-negative.
pub fn split_pos_neg(m: &Oracle) -> (Oracle, Oracle) {
    let pos = m.entrywise(|x| if x > 0.0 { x } else { 0.0 }).expect("f(0)=0");
    let neg = m.entrywise(|x| if x < 0.0 { -x } else { 0.0 }).expect("f(0)=0");
    (pos, neg)
}

/// Doubled operator `((P, N), (N, P))`. Every queried row is checked to be
/// entrywise non-negative.
pub fn embed_operator(pos: &Oracle, neg: &Oracle) -> Result<Oracle> {
    if pos.rows() != neg.rows() {
        return Err(Error::DimensionMismatch {
            left: pos.rows(),
            right: neg.rows(),
        });
    }
    if pos.cols() != neg.cols() {
        return Err(Error::DimensionMismatch {
            left: pos.cols(),
            right: neg.cols(),
        });
    }
    let embedded = Oracle::block2(Some(pos), Some(neg), Some(neg), Some(pos))?;
    let checked = embedded.entrywise(|x| {
        assert!(x >= 0.0, "sign-split embedding produced a negative entry {x}");
        x
    })?;
    Ok(checked)
}

/// Antisymmetric embedding `x -> (x, -x)`.
pub fn embed_vector(x: &[f64]) -> Vec<f64> {
    let mut z = Vec::with_capacity(2 * x.len());
    z.extend_from_slice(x);
    z.extend(x.iter().map(|v| -v));
    z
}

/// Projects a doubled vector back to the base space via
/// `x_s = (z_{sigma1(s)} - z_{sigma2(s)}) / 2`, asserting that the
/// antisymmetry residual stays below `tol`.
pub fn project_back(z: &[f64], tol: f64) -> Result<Vec<f64>> {
    assert!(z.len() % 2 == 0);
    let n = z.len() / 2;
    let mut max_violation: f64 = 0.0;
    for s in 0..n {
        max_violation = max_violation.max((z[s] + z[s + n]).abs());
    }
    if max_violation >= tol {
        return Err(Error::AntisymmetryViolation { max_violation, tol });
    }
    Ok((0..n).map(|s| 0.5 * (z[s] - z[s + n])).collect())
}
