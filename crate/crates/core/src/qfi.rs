//! Quantum Fisher information of the chain with respect to `J`.
//!
//! Exact values come from the block structure: each paired mode contributes
//! independently, and at finite temperature the unpaired momenta `0, pi`
//! add a classical Fisher term from their `J`-dependent occupations.
//! The thermodynamic-limit integrals, the critical finite-size expansion and
//! the low-temperature law on the critical line are provided alongside.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{momentum_grid, Beta, Mode, ModelParams, UnpairedMode};
use crate::quadrature::{geometric_breakpoints, integrate, QuadOptions};
use crate::scalar::{cst, from_usize, one_minus_sech, sech, to_f64, Real};

/// Catalan's constant.
pub const CATALAN: f64 = 0.915_965_594_177_219;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QfiMethod {
    ZeroTSum,
    BlockExact,
    IntegralLimit,
    CriticalExpansion,
    LowTLeading,
}

impl QfiMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            QfiMethod::ZeroTSum => "zero_t_sum",
            QfiMethod::BlockExact => "block_exact",
            QfiMethod::IntegralLimit => "integral_limit",
            QfiMethod::CriticalExpansion => "critical_expansion",
            QfiMethod::LowTLeading => "lowT_leading",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QfiReport<T> {
    pub value: T,
    /// `(k, contribution)` for each paired mode, ascending in `k`.
    pub per_mode: Vec<(T, T)>,
    pub method: QfiMethod,
    pub unpaired_contribution: T,
    pub error_estimate: T,
}

impl<T: Real> QfiReport<T> {
    /// Bures metric `g = H / 4`.
    pub fn bures(&self) -> T {
        self.value * cst(0.25)
    }
}

fn gap_floor<T: Real>(p: &ModelParams<T>) -> T {
    T::default_epsilon() * cst::<T>(16.0) * (p.j.abs() + p.h.abs()).max(T::one())
}

fn check_gapped<T: Real>(p: &ModelParams<T>, m: &Mode<T>) -> Result<()> {
    if m.lam <= gap_floor(p) {
        return Err(Error::Singular {
            k: to_f64(m.k),
            lam: to_f64(m.lam),
        });
    }
    Ok(())
}

/// `(d theta_k / dJ)^2 = h^2 gamma^2 sin^2 k / Lambda_k^4`.
fn ground_term<T: Real>(m: &Mode<T>) -> T {
    let d = m.d_theta();
    d * d
}

/// Exact ground-state QFI, summed over the paired modes.
pub fn qfi_zero_t<T: Real>(p: &ModelParams<T>) -> Result<QfiReport<T>> {
    if !p.beta.is_infinite() {
        return Err(Error::Domain("qfi_zero_t needs beta = infinity".into()));
    }
    let grid = momentum_grid(p)?;
    let mut per_mode = Vec::with_capacity(grid.modes.len());
    let mut value = T::zero();
    for m in &grid.modes {
        check_gapped(p, m)?;
        let c = ground_term(m);
        value += c;
        per_mode.push((m.k, c));
    }
    Ok(QfiReport {
        value,
        per_mode,
        method: QfiMethod::ZeroTSum,
        unpaired_contribution: T::zero(),
        error_estimate: T::default_epsilon() * value * from_usize(p.l),
    })
}

/// Ground-state QFI value only, without the per-mode table.
pub fn qfi_zero_t_value<T: Real>(j: T, gamma: T, h: T, l: usize) -> Result<T> {
    let p = ModelParams::ground(j, gamma, h, l)?;
    let lf = from_usize::<T>(l);
    let mut acc = T::zero();
    for n in 1..l / 2 {
        let m = Mode::new(j, gamma, h, T::two_pi() * from_usize(n) / lf);
        check_gapped(&p, &m)?;
        acc += ground_term(&m);
    }
    Ok(acc)
}

/// Per-block thermal QFI split as `(coherent, population)`.
pub fn block_thermal_terms<T: Real>(m: &Mode<T>, beta: T) -> (T, T) {
    let x = beta * m.lam;
    let coherent = if m.lam > T::zero() {
        one_minus_sech(x) * ground_term(m)
    } else {
        T::zero()
    };
    let s = sech(x * cst(0.5));
    let dl = if m.lam > T::zero() {
        m.d_lam()
    } else {
        T::zero()
    };
    let population = beta * beta * dl * dl * s * s * cst(0.5);
    (coherent, population)
}

/// Classical Fisher information of an unpaired occupation, `beta^2 / (4 cosh^2(beta eps / 2))`.
pub fn unpaired_fisher<T: Real>(u: &UnpairedMode<T>, beta: T) -> T {
    let s = sech(beta * u.eps * cst(0.5));
    beta * beta * u.d_eps * u.d_eps * s * s * cst(0.25)
}

/// Exact finite-temperature QFI of the thermal state at finite `L`.
pub fn qfi_thermal_exact<T: Real>(p: &ModelParams<T>) -> Result<QfiReport<T>> {
    let beta = p
        .beta
        .finite()
        .ok_or_else(|| Error::Domain("qfi_thermal_exact needs a finite beta".into()))?;
    let grid = momentum_grid(p)?;
    let mut per_mode = Vec::with_capacity(grid.modes.len());
    let mut value = T::zero();
    for m in &grid.modes {
        let (a, b) = block_thermal_terms(m, beta);
        value += a + b;
        per_mode.push((m.k, a + b));
    }
    let unpaired: T = grid.unpaired.iter().map(|u| unpaired_fisher(u, beta)).sum();
    let total = value + unpaired;
    Ok(QfiReport {
        value: total,
        per_mode,
        method: QfiMethod::BlockExact,
        unpaired_contribution: unpaired,
        error_estimate: T::default_epsilon() * total * from_usize(p.l),
    })
}

/// Exact QFI at any temperature.
pub fn qfi_exact<T: Real>(p: &ModelParams<T>) -> Result<QfiReport<T>> {
    match p.beta {
        Beta::Infinite => qfi_zero_t(p),
        Beta::Finite(_) => qfi_thermal_exact(p),
    }
}

/// Which population integrand [`qfi_thermal_integral`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralForm {
    /// `beta^2/(8 pi) int sech^2(beta Lambda/2) (J + h cos k)^2 / Lambda^2`, as commonly quoted.
    #[default]
    Printed,
    /// `beta^2/(4 pi) int sech^2(beta Lambda/2) (dLambda/dJ)^2`, the large-`L` limit
    /// of [`qfi_thermal_exact`] for any `gamma`.
    General,
}

/// Momentum in `[0, pi]` where `Lambda_k` is smallest.
pub fn gap_minimum_k<T: Real>(j: T, gamma: T, h: T) -> T {
    // Lambda^2 = J^2 (1 - gamma^2) c^2 + 2 J h c + h^2 + J^2 gamma^2 with c = cos k.
    let a = j * j * (T::one() - gamma * gamma);
    let b = (j * h) * cst(2.0);
    let f = |c: T| a * c * c + b * c;
    let mut best = (f(T::one()), T::one());
    let mut consider = |c: T| {
        let v = f(c);
        if v < best.0 {
            best = (v, c);
        }
    };
    consider(-T::one());
    if a > T::zero() {
        let c = (-b / (a + a)).max(-T::one()).min(T::one());
        consider(c);
    }
    best.1.acos()
}

/// Thermodynamic-limit QFI (`L` times the per-site integral value).
pub fn qfi_thermal_integral<T: Real>(
    p: &ModelParams<T>,
    form: IntegralForm,
) -> Result<QfiReport<T>> {
    p.validate()?;
    let beta = p
        .beta
        .finite()
        .ok_or_else(|| Error::Domain("qfi_thermal_integral needs a finite beta".into()))?;
    let (j, gamma, h) = (p.j, p.gamma, p.h);
    let pi = T::pi();
    let peak = gap_minimum_k(j, gamma, h);
    let width = (T::one() / beta) * cst(0.1);
    let pts = geometric_breakpoints(T::zero(), pi, peak, width.min(cst(0.1)));
    let opts = QuadOptions {
        rel_tol: cst(1e-11),
        ..QuadOptions::default()
    };

    let population = integrate(
        |k: T| {
            let m = Mode::new(j, gamma, h, k);
            if m.lam == T::zero() {
                return T::zero();
            }
            let s = sech(beta * m.lam * cst(0.5));
            let g = match form {
                IntegralForm::Printed => {
                    let r = (j + h * k.cos()) / m.lam;
                    r * r
                }
                IntegralForm::General => {
                    let d = m.d_lam();
                    d * d
                }
            };
            s * s * g
        },
        &pts,
        opts,
    )?;
    let coherent = integrate(
        |k: T| {
            let m = Mode::new(j, gamma, h, k);
            if m.lam == T::zero() {
                return T::zero();
            }
            one_minus_sech(beta * m.lam) * ground_term(&m)
        },
        &pts,
        opts,
    )?;
    let pref = match form {
        IntegralForm::Printed => beta * beta / (pi * cst(8.0)),
        IntegralForm::General => beta * beta / (pi * cst(4.0)),
    };
    let per_site = pref * population.value + coherent.value / (pi + pi);
    let err = pref * population.error + coherent.error / (pi + pi);
    let lf = from_usize::<T>(p.l);
    Ok(QfiReport {
        value: per_site * lf,
        per_mode: Vec::new(),
        method: QfiMethod::IntegralLimit,
        unpaired_contribution: T::zero(),
        error_estimate: err * lf,
    })
}

/// Small-`z` expansion of the ground-state QFI around `h = J`, `z = L (h - J)`.
pub fn qfi_critical_expansion<T: Real>(p: &ModelParams<T>, z: T) -> T {
    let l = from_usize::<T>(p.l);
    let jg2 = p.j * p.j * p.gamma * p.gamma;
    let pi2 = T::pi() * T::pi();
    let g2 = p.gamma * p.gamma;
    l * l / (jg2 * cst(24.0)) - l / (pi2 * jg2 * cst(2.0))
        + z * l * (g2 - T::one()) / (p.j * jg2 * g2 * cst(12.0))
        - z * z * l * l / (jg2 * jg2 * cst(720.0))
}

/// Leading low-temperature QFI on the critical line, `(2 C / pi^2) L / (T |J gamma|)`.
pub fn qfi_low_t_leading<T: Real>(p: &ModelParams<T>) -> Result<T> {
    p.validate()?;
    let beta = p
        .beta
        .finite()
        .ok_or_else(|| Error::Domain("low-temperature law needs a finite beta".into()))?;
    if (p.h - p.j).abs() > cst::<T>(1e-12) * p.j.abs().max(T::one()) {
        return Err(Error::Domain(format!(
            "low-temperature law holds on h = J only (h = {}, J = {})",
            to_f64(p.h),
            to_f64(p.j)
        )));
    }
    let pi = T::pi();
    Ok(cst::<T>(2.0 * CATALAN) / (pi * pi) * from_usize::<T>(p.l) * beta / (p.j * p.gamma).abs())
}

/// Energy variance of `H_J / 2` (the QFI for `beta`) and `c_V = beta^2 Var(H)`.
pub fn specific_heat<T: Real>(p: &ModelParams<T>) -> Result<(T, T)> {
    let beta = p
        .beta
        .finite()
        .ok_or_else(|| Error::Domain("specific heat needs a finite beta".into()))?;
    let grid = momentum_grid(p)?;
    let half = cst::<T>(0.5);
    let mut var = T::zero();
    for m in &grid.modes {
        let s = sech(beta * m.lam * half);
        var += m.lam * m.lam * s * s * half;
    }
    for u in &grid.unpaired {
        let s = sech(beta * u.eps * half);
        var += u.eps * u.eps * s * s * cst(0.25);
    }
    Ok((beta * beta * var, var))
}

#[cfg(test)]
mod tests {
    use super::*;

    type ModelParams = crate::model::ModelParams<f64>;

    #[test]
    fn zero_field_has_zero_qfi() {
        let p = ModelParams::ground(1.0, 0.8, 0.0, 12).unwrap();
        assert_eq!(qfi_zero_t(&p).unwrap().value, 0.0);
    }

    #[test]
    fn l4_hand_value() {
        let p = ModelParams::ground(1.0, 1.0, 1.0, 4).unwrap();
        let r = qfi_zero_t(&p).unwrap();
        assert!((r.value - 0.25).abs() < 1e-15);
        assert_eq!(r.per_mode.len(), 1);
    }

    #[test]
    fn gapless_grid_point_is_singular() {
        // gamma = 0 with h = 0 closes the gap at k = pi/2.
        let p = ModelParams::ground(1.0, 0.0, 0.0, 8).unwrap();
        assert!(matches!(qfi_zero_t(&p), Err(Error::Singular { .. })));
    }

    #[test]
    fn report_sums_are_consistent() {
        let p = ModelParams::thermal(1.0, 0.6, 0.8, 20, 3.0).unwrap();
        let r = qfi_thermal_exact(&p).unwrap();
        let s: f64 = r.per_mode.iter().map(|x| x.1).sum::<f64>() + r.unpaired_contribution;
        assert!((s - r.value).abs() <= 1e-12 * r.value);
    }

    #[test]
    fn high_temperature_limit_vanishes() {
        let p = ModelParams::thermal(1.0, 1.0, 0.5, 16, 1e-6).unwrap();
        assert!(qfi_thermal_exact(&p).unwrap().value < 1e-10);
        assert!(
            qfi_thermal_integral(&p, IntegralForm::Printed)
                .unwrap()
                .value
                < 1e-10
        );
    }

    #[test]
    fn low_temperature_limit_matches_ground_state() {
        let g = ModelParams::ground(1.0, 1.0, 0.5, 16).unwrap();
        let t0 = qfi_zero_t(&g).unwrap().value;
        let t = qfi_thermal_exact(&g.with_beta(Beta::Finite(200.0)))
            .unwrap()
            .value;
        assert!((t - t0).abs() / t0 < 1e-6);
    }

    #[test]
    fn critical_expansion_example() {
        let p = ModelParams::ground(1.0, 1.0, 1.0, 100).unwrap();
        let v = qfi_critical_expansion(&p, 0.0);
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((v - (1e4 / 24.0 - 100.0 / (2.0 * pi2))).abs() < 1e-12);
        assert!((v - 411.601).abs() < 1e-3);
    }

    #[test]
    fn low_t_law_values() {
        let p = ModelParams::thermal(1.0, 1.0, 1.0, 4, 1e3).unwrap();
        let per_site = qfi_low_t_leading(&p).unwrap() / 4.0;
        assert!((per_site - 185.6134).abs() < 1e-3);
        assert!((per_site - 185.60).abs() < 0.02);
        let p2 = p.with_beta(Beta::Finite(500.0));
        assert_eq!(
            qfi_low_t_leading(&p).unwrap() / qfi_low_t_leading(&p2).unwrap(),
            2.0
        );
        assert!(qfi_low_t_leading(&p.with_h(0.9)).is_err());
    }

    #[test]
    fn specific_heat_high_temperature_block_limit() {
        let p = ModelParams::thermal(1.0, 1.0, 0.3, 8, 1e-8).unwrap();
        let (_, var) = specific_heat(&p).unwrap();
        let g = momentum_grid(&p).unwrap();
        let expect: f64 = g.modes.iter().map(|m| m.lam * m.lam / 2.0).sum::<f64>()
            + g.unpaired.iter().map(|u| u.eps * u.eps / 4.0).sum::<f64>();
        assert!((var - expect).abs() < 1e-9);
    }

    #[test]
    fn specific_heat_freezes_out() {
        let p = ModelParams::thermal(1.0, 1.0, 0.3, 8, 400.0).unwrap();
        assert!(specific_heat(&p).unwrap().0 < 1e-100);
    }

    #[test]
    fn gap_minimum_location() {
        let pi = std::f64::consts::PI;
        assert!((gap_minimum_k(1.0, 1.0, 1.0) - pi).abs() < 1e-12);
        assert!(gap_minimum_k(1.0_f64, 1.0, -1.0).abs() < 1e-12);
        // gamma < 1 and small h: interior minimum.
        let k = gap_minimum_k(1.0, 0.5, 0.2);
        assert!(k > 0.0 && k < pi);
        let lam = |k: f64| Mode::new(1.0, 0.5, 0.2, k).lam;
        assert!(lam(k) <= lam(k + 1e-4) && lam(k) <= lam(k - 1e-4));
    }
}
