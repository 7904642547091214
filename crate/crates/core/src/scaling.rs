//! Finite-size scaling of the ground-state QFI near `h = J`.
//!
//! With `z = L (h - J)` the QFI takes the form
//! `H / L^2 = phi(z) + (C0 + D' z) / L + ...`. [`scaling_collapse`] evaluates
//! exact sums on an `(L, z)` grid, extrapolates `H / L^2` in `1/L` at each `z`
//! and fits the resulting profile. The pseudo-critical point is the
//! finite-size maximizer of the QFI in `h`.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::optimize::golden_section_max;
use crate::qfi::{qfi_exact, qfi_zero_t_value};
use crate::regression::{fit_basis, fit_line};
use crate::scalar::{cst, from_usize, to_f64, Real};

/// Default half-width of the `h` bracket, as a fraction of `|J|`.
pub const DEFAULT_BRACKET: f64 = 0.25;

/// Smallest `L` used in shift-exponent regressions.
pub const MIN_SHIFT_L: usize = 64;

/// Maximizer of the ground-state QFI over `h in J (1 -+ bracket)`.
pub fn pseudo_critical_point<T: Real>(base: &ModelParams<T>, l: usize, bracket: T) -> Result<T> {
    let p = base.with_l(l);
    p.validate()?;
    if p.gamma == T::zero() {
        return Err(Error::InvalidParams(
            "pseudo-critical point needs gamma != 0".into(),
        ));
    }
    let j = p.j;
    let (a, b) = {
        let x = j * (T::one() - bracket);
        let y = j * (T::one() + bracket);
        if x < y {
            (x, y)
        } else {
            (y, x)
        }
    };
    let mut failure = None;
    let tol = cst::<T>(1e-10) * j.abs().max(T::one());
    let best = golden_section_max(
        |h| match qfi_zero_t_value(j, p.gamma, h, l) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                T::zero() / T::zero()
            }
        },
        a,
        b,
        tol,
    );
    if let Some(e) = failure {
        // A gapless grid point inside the bracket is not fatal as long as the optimum is regular.
        if !best.value.is_finite() {
            return Err(e);
        }
    }
    let edge = tol * cst(10.0);
    if best.x - a <= edge || b - best.x <= edge {
        return Err(Error::Bracket {
            lo: to_f64(a),
            hi: to_f64(b),
            at: to_f64(best.x),
        });
    }
    Ok(best.x)
}

/// Pseudo-critical points for several sizes, in ascending `L`.
pub fn pseudo_critical_points<T: Real>(
    base: &ModelParams<T>,
    ls: &[usize],
    bracket: T,
) -> Result<Vec<(usize, T)>> {
    let mut ls = ls.to_vec();
    ls.sort_unstable();
    ls.dedup();
    ls.par_iter()
        .map(|&l| pseudo_critical_point(base, l, bracket).map(|h| (l, h)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftFit<T> {
    /// `a` in `|h*_L - J| ~ c L^{-a}`.
    pub exponent: T,
    pub exponent_stderr: T,
    /// Signed prefactor `c` from the free log-log fit.
    pub coefficient: T,
    /// Mean of `L^2 (h*_L - J)`, the prefactor with the exponent held at 2.
    pub pinned_coefficient: T,
    pub points: usize,
}

/// Mean of `L^a (h*_L - J)` over the points.
pub fn pinned_shift_coefficient<T: Real>(points: &[(usize, T)], j: T, exponent: T) -> Result<T> {
    if points.is_empty() {
        return Err(Error::InsufficientData("no pseudo-critical points".into()));
    }
    let s: T = points
        .iter()
        .map(|&(l, h)| from_usize::<T>(l).powf(exponent) * (h - j))
        .sum();
    Ok(s / from_usize(points.len()))
}

/// Power-law fit of the pseudo-critical shift over points with `L >= 64`.
pub fn shift_exponent<T: Real>(points: &[(usize, T)], j: T) -> Result<ShiftFit<T>> {
    let used: Vec<(usize, T)> = points
        .iter()
        .copied()
        .filter(|&(l, _)| l >= MIN_SHIFT_L)
        .collect();
    let mut distinct: Vec<usize> = used.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "shift fit needs >= 5 distinct L >= {MIN_SHIFT_L} (got {})",
            distinct.len()
        )));
    }
    let resolution = cst::<T>(1e-9) * j.abs().max(T::one());
    if let Some(&(l, _)) = used.iter().find(|&&(_, h)| (h - j).abs() <= resolution) {
        return Err(Error::ExponentUndefined { l });
    }
    let signs: Vec<bool> = used.iter().map(|&(_, h)| h > j).collect();
    if signs.iter().any(|&s| s != signs[0]) {
        return Err(Error::Consistency(
            "pseudo-critical shift changes sign across sizes".into(),
        ));
    }
    let xs: Vec<T> = used.iter().map(|&(l, _)| from_usize::<T>(l).ln()).collect();
    let ys: Vec<T> = used.iter().map(|&(_, h)| (h - j).abs().ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    let sign = if signs[0] { T::one() } else { -T::one() };
    Ok(ShiftFit {
        exponent: -fit.slope,
        exponent_stderr: fit.slope_stderr,
        coefficient: sign * fit.intercept.exp(),
        pinned_coefficient: pinned_shift_coefficient(&used, j, cst(2.0))?,
        points: used.len(),
    })
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRow<T> {
    pub l: usize,
    pub j: T,
    pub gamma: T,
    pub h: T,
    pub z: T,
    pub qfi: T,
}

/// Ground-state QFI on the grid `h = J + z / L`, rows ordered by `L` then `z`.
pub fn evaluate_grid<T: Real>(
    base: &ModelParams<T>,
    ls: &[usize],
    zs: &[T],
) -> Result<Vec<GridRow<T>>> {
    let pts: Vec<(usize, T)> = ls
        .iter()
        .flat_map(|&l| zs.iter().map(move |&z| (l, z)))
        .collect();
    pts.par_iter()
        .map(|&(l, z)| {
            let h = base.j + z / from_usize::<T>(l);
            let qfi = qfi_zero_t_value(base.j, base.gamma, h, l)?;
            Ok(GridRow {
                l,
                j: base.j,
                gamma: base.gamma,
                h,
                z,
                qfi,
            })
        })
        .collect()
}

pub const GRID_HEADER: &str = "L,J,gamma,h,z,qfi";

pub fn write_grid_csv<T: Real, W: Write>(mut w: W, rows: &[GridRow<T>]) -> std::io::Result<()> {
    writeln!(w, "{GRID_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e},{:e}",
            r.l,
            to_f64(r.j),
            to_f64(r.gamma),
            to_f64(r.h),
            to_f64(r.z),
            to_f64(r.qfi)
        )?;
    }
    Ok(())
}

pub fn read_grid_csv<T: Real, R: BufRead>(r: R) -> Result<Vec<GridRow<T>>> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::InvalidParams(e.to_string()))?
        .unwrap_or_default();
    if header.trim() != GRID_HEADER {
        return Err(Error::InvalidParams(format!(
            "expected header '{GRID_HEADER}', found '{}'",
            header.trim()
        )));
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::InvalidParams(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || Error::InvalidParams(format!("malformed grid row {}: '{line}'", n + 2));
        if f.len() != 6 {
            return Err(bad());
        }
        let num = |s: &str| -> Result<T> {
            let v: f64 = s.parse().map_err(|_| bad())?;
            T::from_f64(v).ok_or_else(bad)
        };
        rows.push(GridRow {
            l: f[0].parse().map_err(|_| bad())?,
            j: num(f[1])?,
            gamma: num(f[2])?,
            h: num(f[3])?,
            z: num(f[4])?,
            qfi: num(f[5])?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit<T> {
    pub z_values: Vec<T>,
    pub ls: Vec<usize>,
    pub pseudo_points: Vec<(usize, T)>,
    pub shift: Option<ShiftFit<T>>,
    /// `L^{-2}` shift coefficient with the exponent held at 2 (defined even when the shift vanishes).
    pub shift_coefficient_pinned: Option<T>,
    pub delta_g: T,
    pub nu: T,
    pub phi0: T,
    /// `z^2` coefficient of `phi`.
    pub phi2: T,
    /// `D'`: slope in `z` of the `1/L` correction.
    pub d_slope: T,
    /// `z`-independent part of the `1/L` correction.
    pub c0: T,
    /// `|h - J|^{-nu}` at the largest `|z|` for each `L`.
    pub xi: Vec<(usize, T)>,
    /// Largest residual of the `phi` fit relative to `phi(0)`.
    pub relative_residual: T,
    pub warning: Option<String>,
}

/// Extrapolated `phi(z)` and `1/L` slope at one `z` from rows at that `z`.
fn extrapolate_in_size<T: Real>(rows: &[&GridRow<T>]) -> Result<(T, T)> {
    let xs: Vec<T> = rows
        .iter()
        .map(|r| T::one() / from_usize::<T>(r.l))
        .collect();
    let ys: Vec<T> = rows
        .iter()
        .map(|r| r.qfi / (from_usize::<T>(r.l) * from_usize::<T>(r.l)))
        .collect();
    if xs.len() >= 4 {
        let one = |_: T| T::one();
        let lin = |x: T| x;
        let sq = |x: T| x * x;
        let (c, _) = fit_basis(&xs, &ys, &[&one, &lin, &sq])?;
        Ok((c[0], c[1]))
    } else {
        let f = fit_line(&xs, &ys)?;
        Ok((f.intercept, f.slope))
    }
}

fn polynomial_fit<T: Real>(xs: &[T], ys: &[T], degree: usize) -> Result<(Vec<T>, T)> {
    let basis: Vec<Box<dyn Fn(T) -> T>> = (0..=degree)
        .map(|p| Box::new(move |x: T| x.powi(p as i32)) as Box<dyn Fn(T) -> T>)
        .collect();
    let refs: Vec<&dyn Fn(T) -> T> = basis.iter().map(|b| b.as_ref()).collect();
    fit_basis(xs, ys, &refs)
}

/// Collapse residual of `H / L^2` against `x = L^{1/nu} (h - J)` with the
/// leading size correction removed.
fn collapse_residual<T: Real>(rows: &[GridRow<T>], slope_at: &dyn Fn(T) -> T, nu: T) -> T {
    let mut xs = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for r in rows {
        let lf = from_usize::<T>(r.l);
        xs.push(lf.powf(T::one() / nu) * (r.h - r.j));
        ys.push(r.qfi / (lf * lf) - slope_at(r.z) / lf);
    }
    let degree = 6.min(xs.len().saturating_sub(1));
    match polynomial_fit(&xs, &ys, degree) {
        Ok((_, ssr)) => ssr,
        Err(_) => T::max_value().unwrap_or_else(|| cst(f64::MAX)),
    }
}

/// Scaling analysis of exact ground-state QFI data.
pub fn scaling_collapse<T: Real>(
    base: &ModelParams<T>,
    ls: &[usize],
    zs: &[T],
) -> Result<ScalingFit<T>> {
    let mut ls = ls.to_vec();
    ls.sort_unstable();
    ls.dedup();
    let rows = evaluate_grid(base, &ls, zs)?;
    let fit = scaling_from_rows(&rows)?;
    attach_pseudo_points(fit, base, &ls, cst(DEFAULT_BRACKET))
}

/// Add pseudo-critical points (sizes `L >= 64`) and the shift fit to `fit`.
/// A shift fit that cannot be made is left as `None`.
pub fn attach_pseudo_points<T: Real>(
    mut fit: ScalingFit<T>,
    base: &ModelParams<T>,
    ls: &[usize],
    bracket: T,
) -> Result<ScalingFit<T>> {
    let shift_ls: Vec<usize> = ls.iter().copied().filter(|&l| l >= MIN_SHIFT_L).collect();
    if base.gamma != T::zero() && !shift_ls.is_empty() {
        let pts = pseudo_critical_points(base, &shift_ls, bracket)?;
        fit.shift = shift_exponent(&pts, base.j).ok();
        fit.shift_coefficient_pinned = pinned_shift_coefficient(&pts, base.j, cst(2.0)).ok();
        fit.pseudo_points = pts;
    }
    Ok(fit)
}

/// Scaling analysis of precomputed grid rows (all with the same `J`, `gamma`).
pub fn scaling_from_rows<T: Real>(rows: &[GridRow<T>]) -> Result<ScalingFit<T>> {
    if rows.is_empty() {
        return Err(Error::InsufficientData("empty scaling grid".into()));
    }
    let mut ls: Vec<usize> = rows.iter().map(|r| r.l).collect();
    ls.sort_unstable();
    ls.dedup();
    let mut zs: Vec<T> = Vec::new();
    for r in rows {
        if !zs.contains(&r.z) {
            zs.push(r.z);
        }
    }
    zs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    if ls.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "scaling collapse needs >= 3 sizes (got {})",
            ls.len()
        )));
    }
    if zs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "scaling collapse needs >= 3 z values (got {})",
            zs.len()
        )));
    }
    let mut phis = Vec::with_capacity(zs.len());
    let mut slopes = Vec::with_capacity(zs.len());
    for &z in &zs {
        let at: Vec<&GridRow<T>> = rows.iter().filter(|r| r.z == z).collect();
        let (phi, s) = extrapolate_in_size(&at)?;
        phis.push(phi);
        slopes.push(s);
    }
    let degree = 4.min(zs.len() - 1);
    let (coef, _) = polynomial_fit(&zs, &phis, degree)?;
    let phi0 = coef[0];
    let phi2 = coef[2.min(coef.len() - 1)];
    let slope_fit = fit_line(&zs, &slopes)?;

    // Delta_g from the size dependence at the z closest to 0.
    let z0 = zs
        .iter()
        .copied()
        .fold(zs[0], |a, b| if b.abs() < a.abs() { b } else { a });
    let (lx, ly): (Vec<T>, Vec<T>) = rows
        .iter()
        .filter(|r| r.z == z0)
        .map(|r| (from_usize::<T>(r.l).ln(), r.qfi.ln()))
        .unzip();
    let delta_g = fit_line(&lx, &ly)?.slope - T::one();

    let slope_at = |z: T| slope_fit.intercept + slope_fit.slope * z;
    let nu = crate::optimize::golden_section_min(
        |nu| collapse_residual(rows, &slope_at, nu),
        cst(0.5),
        cst(2.0),
        cst(1e-6),
    )
    .x;

    let zmax = zs.iter().copied().fold(T::zero(), |a, b| a.max(b.abs()));
    let xi = if zmax > T::zero() {
        ls.iter()
            .map(|&l| (l, (zmax / from_usize::<T>(l)).powf(-nu)))
            .collect()
    } else {
        Vec::new()
    };

    let mut worst = T::zero();
    for (&z, &phi) in zs.iter().zip(&phis) {
        let model: T = coef
            .iter()
            .enumerate()
            .map(|(p, &c)| c * z.powi(p as i32))
            .sum();
        worst = worst.max((phi - model).abs());
    }
    let relative_residual = worst / phi0.abs().max(cst(1e-300));
    let warning = (relative_residual > cst(0.1)).then(|| {
        format!(
            "poor collapse: phi fit residual is {:.1}% of phi(0)",
            100.0 * to_f64(relative_residual)
        )
    });

    Ok(ScalingFit {
        z_values: zs,
        ls,
        pseudo_points: Vec::new(),
        shift: None,
        shift_coefficient_pinned: None,
        delta_g,
        nu,
        phi0,
        phi2,
        d_slope: slope_fit.slope,
        c0: slope_fit.intercept,
        xi,
        relative_residual,
        warning,
    })
}

/// Log-log slope of the QFI against `L` (at `h = J` when `at_critical`).
pub fn extensivity_probe<T: Real>(
    base: &ModelParams<T>,
    ls: &[usize],
    at_critical: bool,
) -> Result<T> {
    let mut ls = ls.to_vec();
    ls.sort_unstable();
    ls.dedup();
    if ls.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "extensivity probe needs >= 4 sizes (got {})",
            ls.len()
        )));
    }
    let p = if at_critical {
        base.with_h(base.j)
    } else {
        *base
    };
    let vals: Vec<T> = ls
        .par_iter()
        .map(|&l| qfi_exact(&p.with_l(l)).map(|r| r.value))
        .collect::<Result<_>>()?;
    let xs: Vec<T> = ls.iter().map(|&l| from_usize::<T>(l).ln()).collect();
    let ys: Vec<T> = vals.iter().map(|v| v.ln()).collect();
    Ok(fit_line(&xs, &ys)?.slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    type ModelParams = crate::model::ModelParams<f64>;

    #[test]
    fn synthetic_power_law_recovered() {
        let pts: Vec<(usize, f64)> = [64, 128, 256, 512, 1024]
            .iter()
            .map(|&l| (l, 1.0 + 37.0 / (l as f64).powi(2)))
            .collect();
        let f = shift_exponent(&pts, 1.0).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-10);
        assert!((f.coefficient - 37.0).abs() < 1e-8);
        assert!((f.pinned_coefficient - 37.0).abs() < 1e-10);
    }

    #[test]
    fn too_few_sizes_rejected() {
        let pts = vec![(128usize, 1.001), (256, 1.0002)];
        assert!(matches!(
            shift_exponent(&pts, 1.0),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn exact_critical_shift_is_undefined() {
        let pts: Vec<(usize, f64)> = [64, 128, 256, 512, 1024]
            .iter()
            .map(|&l| (l, 1.0))
            .collect();
        assert!(matches!(
            shift_exponent(&pts, 1.0),
            Err(Error::ExponentUndefined { l: 64 })
        ));
    }

    #[test]
    fn pseudo_critical_point_scales_with_j() {
        let base = ModelParams::ground(1.0, 2.0, 1.0, 64).unwrap();
        let a = pseudo_critical_point(&base, 64, 0.25).unwrap();
        let b = pseudo_critical_point(&base.with_j(2.0), 64, 0.25).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-8);
    }

    #[test]
    fn grid_csv_round_trip() {
        let base = ModelParams::ground(1.0, 1.0, 1.0, 8).unwrap();
        let rows = evaluate_grid(&base, &[8, 16], &[-0.5, 0.0, 0.5]).unwrap();
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &rows).unwrap();
        let back: Vec<GridRow<f64>> = read_grid_csv(&buf[..]).unwrap();
        assert_eq!(rows, back);
    }

    #[test]
    fn critical_growth_is_superextensive() {
        let base = ModelParams::ground(1.0, 1.0, 1.0, 8).unwrap();
        let a = extensivity_probe(&base, &[128, 256, 512, 1024], true).unwrap();
        assert!((a - 2.0).abs() < 0.05, "{a}");
        let b = extensivity_probe(&base.with_h(0.5), &[128, 256, 512, 1024], false).unwrap();
        assert!((b - 1.0).abs() < 0.05, "{b}");
    }
}
