//! One-dimensional extremum search.
//!
//! Golden-section search on a bracket, and a coarse-grid scan followed by
//! golden-section refinement around the best grid point. Objective values may
//! be `-inf` (log-likelihoods of impossible outcomes); `NaN` is treated as the
//! worst possible value.

use crate::error::{Error, Result};
use crate::scalar::{cst, from_usize, to_f64, Real};

/// `(3 - sqrt 5) / 2`, the golden-section interior fraction.
const INV_PHI2: f64 = 0.381_966_011_250_105_1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum<T> {
    pub x: T,
    pub value: T,
    pub evaluations: usize,
}

/// Minimize a unimodal `f` on `[a, b]` until the bracket is narrower than `tol`.
pub fn golden_section_min<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: T) -> Extremum<T> {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let r = cst::<T>(INV_PHI2);
    let mut x1 = lo + r * (hi - lo);
    let mut x2 = hi - r * (hi - lo);
    let mut f1 = sanitize(f(x1));
    let mut f2 = sanitize(f(x2));
    let mut evaluations = 2;
    // Each step shrinks the bracket by 1/phi; 200 steps is far below f64 resolution.
    while hi - lo > tol && evaluations < 200 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = lo + r * (hi - lo);
            f1 = sanitize(f(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = hi - r * (hi - lo);
            f2 = sanitize(f(x2));
        }
        evaluations += 1;
        if hi - lo <= T::default_epsilon() * (lo.abs() + hi.abs()) {
            break;
        }
    }
    let (x, value) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    Extremum {
        x,
        value,
        evaluations,
    }
}

/// Maximize a unimodal `f` on `[a, b]`.
pub fn golden_section_max<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, tol: T) -> Extremum<T> {
    let e = golden_section_min(|x| -f(x), a, b, tol);
    Extremum {
        value: -e.value,
        ..e
    }
}

/// Scan `n_cells + 1` equally spaced points of `[lo, hi]`, then refine the best
/// one by golden-section search on its two neighbouring cells.
///
/// A maximum on either end of the grid is reported as [`Error::Bracket`].
pub fn grid_golden_max<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    lo: T,
    hi: T,
    n_cells: usize,
    tol: T,
) -> Result<Extremum<T>> {
    if !(hi > lo) || n_cells < 2 {
        return Err(Error::InvalidParams(format!(
            "grid search needs lo < hi and >= 2 cells (got [{}, {}], {n_cells})",
            to_f64(lo),
            to_f64(hi)
        )));
    }
    let step = (hi - lo) / from_usize(n_cells);
    let mut best = 0;
    let mut best_val = T::zero();
    for i in 0..=n_cells {
        let v = sanitize_max(f(lo + step * from_usize(i)));
        if i == 0 || v > best_val {
            best = i;
            best_val = v;
        }
    }
    if best == 0 || best == n_cells {
        return Err(Error::Bracket {
            lo: to_f64(lo),
            hi: to_f64(hi),
            at: to_f64(lo + step * from_usize(best)),
        });
    }
    let a = lo + step * from_usize(best - 1);
    let b = lo + step * from_usize(best + 1);
    let refined = golden_section_max(&mut f, a, b, tol);
    let out = if refined.value >= best_val {
        refined
    } else {
        Extremum {
            x: lo + step * from_usize(best),
            value: best_val,
            evaluations: refined.evaluations,
        }
    };
    Ok(Extremum {
        evaluations: out.evaluations + n_cells + 1,
        ..out
    })
}

fn sanitize<T: Real>(v: T) -> T {
    if v.partial_cmp(&v).is_none() {
        T::max_value().unwrap_or_else(|| cst(f64::MAX))
    } else {
        v
    }
}

fn sanitize_max<T: Real>(v: T) -> T {
    if v.partial_cmp(&v).is_none() {
        T::min_value().unwrap_or_else(|| cst(f64::MIN))
    } else {
        v
    }
}
