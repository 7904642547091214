//! Globally adaptive 7/15-point Gauss-Kronrod quadrature.
//!
//! The interval is first cut at caller-supplied breakpoints, then the panel
//! with the largest error estimate is bisected until the summed estimate meets
//! the tolerance. [`geometric_breakpoints`] builds panel edges that tighten
//! toward a sharp feature.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::{cst, to_f64, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the odd Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_evaluations: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: cst(1e-10),
            abs_tol: cst(1e-300),
            max_evaluations: 2_000_000,
        }
    }
}

struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let c = (a + b) * cst(0.5);
    let hw = (b - a) * cst(0.5);
    let fc = f(c);
    let mut kron = fc * cst(WGK[7]);
    let mut gauss = fc * cst(WG[3]);
    for i in 0..7 {
        let dx = hw * cst(XGK[i]);
        let s = f(c - dx) + f(c + dx);
        kron += s * cst(WGK[i]);
        if i % 2 == 1 {
            gauss += s * cst(WG[i / 2]);
        }
    }
    (kron * hw, ((kron - gauss) * hw).abs())
}

/// Integrate `f` over `[points[0], points[last]]`, with panels initially cut at every point.
pub fn integrate<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    points: &[T],
    opts: QuadOptions<T>,
) -> Result<Quadrature<T>> {
    if points.len() < 2 {
        return Err(Error::InvalidParams(
            "quadrature needs at least two points".into(),
        ));
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk15(&mut f, w[0], w[1]);
            evaluations += 15;
            heap.push(Panel {
                a: w[0],
                b: w[1],
                value,
                error,
            });
        }
    }
    let a0 = points[0];
    let b0 = points[points.len() - 1];
    loop {
        let value: T = heap.iter().map(|p| p.value).sum();
        let error: T = heap.iter().map(|p| p.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Quadrature {
                a: to_f64(a0),
                b: to_f64(b0),
                estimate: to_f64(value),
                error: to_f64(error),
                evaluations,
            });
        }
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => {
                return Ok(Quadrature {
                    value,
                    error,
                    evaluations,
                })
            }
        };
        let mid = (worst.a + worst.b) * cst(0.5);
        if evaluations >= opts.max_evaluations || !(mid > worst.a && mid < worst.b) {
            return Err(Error::Quadrature {
                a: to_f64(a0),
                b: to_f64(b0),
                estimate: to_f64(value),
                error: to_f64(error),
                evaluations,
            });
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (v, e) = gk15(&mut f, a, b);
            heap.push(Panel {
                a,
                b,
                value: v,
                error: e,
            });
        }
        evaluations += 30;
    }
}

/// Panel edges on `[a, b]` that halve in width toward `peak`, down to `min_width`.
pub fn geometric_breakpoints<T: Real>(a: T, b: T, peak: T, min_width: T) -> Vec<T> {
    let peak = peak.max(a).min(b);
    let mut pts = vec![a, b, peak];
    let mut w = min_width.max((b - a) * cst(1e-14));
    while w < b - a {
        for x in [peak - w, peak + w] {
            if x > a && x < b {
                pts.push(x);
            }
        }
        w = w + w;
    }
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    pts
}
