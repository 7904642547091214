use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use qcrit::densops::{ed_dhamiltonian, ed_hamiltonian, ED_MAX_L};
use qcrit::qfi::qfi_exact;
use qcrit::{
    bures_metric, ed_oracle, lyapunov_residual, pure_qfi_sum, qfi_from_sld, sld_full,
    DerivativeFamily, FdScheme, Params, SpectralDensity,
};

use super::{nonempty, resolve_out};
use crate::config::{load, VerifyConfig};
use crate::output::{json, CliError, Outputs};
use crate::Common;

#[derive(Serialize)]
struct Check {
    name: &'static str,
    #[serde(rename = "L")]
    l: usize,
    j: f64,
    gamma: f64,
    h: f64,
    beta: Option<f64>,
    value: f64,
    reference: f64,
    residual: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct Report {
    seed: u64,
    checks: Vec<Check>,
    failures: usize,
    all_pass: bool,
}

fn draw(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    loop {
        let j: f64 = rng.random_range(0.5..1.5);
        let g = rng.random_range(0.2..2.0);
        let h = rng.random_range(0.1..2.0);
        if (h - j).abs() > 0.05 {
            return (j, g, h);
        }
    }
}

fn family(p: Params) -> DerivativeFamily<'static, f64> {
    DerivativeFamily::new(move |j| Ok(ed_oracle(&p.with_j(j))?.to_matrix()))
        .with_step(1e-3)
        .with_scheme(FdScheme::Richardson)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

fn check(
    name: &'static str,
    p: &Params,
    value: f64,
    reference: f64,
    residual: f64,
    tol: f64,
) -> Check {
    Check {
        name,
        l: p.l,
        j: p.j,
        gamma: p.gamma,
        h: p.h,
        beta: p.beta.finite(),
        value,
        reference,
        residual,
        tolerance: tol,
        pass: residual <= tol,
    }
}

/// All checks for one size and coupling draw.
fn checks_for(c: &VerifyConfig, p0: Params, betas: &[f64]) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let exact = qfi_exact(&p0)?.value;
    let ed = pure_qfi_sum(&ed_hamiltonian(&p0)?, &ed_dhamiltonian(&p0)?)?;
    out.push(check(
        "zero_t_oracle",
        &p0,
        exact,
        ed,
        rel(exact, ed),
        c.tol_zero_t,
    ));
    for &b in betas {
        let p = p0.with_beta(qcrit::Beta::Finite(b));
        let fam = family(p);
        let exact = qfi_exact(&p)?.value;
        let ed = 4.0 * bures_metric(&fam, p.j)?;
        out.push(check(
            "thermal_oracle",
            &p,
            exact,
            ed,
            rel(exact, ed),
            c.tol_thermal,
        ));

        let rho = fam.density(p.j)?;
        let drho = fam.derivative(p.j)?;
        let sld = sld_full(&p)?.dense.expect("dense SLD for L <= 8");
        let res = lyapunov_residual(&rho, &drho, &sld);
        out.push(check("sld_lyapunov", &p, res, 0.0, res, c.tol_lyapunov));
        let q = qfi_from_sld(&SpectralDensity::from_matrix(&rho)?, &sld);
        out.push(check("sld_qfi", &p, q, exact, rel(q, exact), c.tol_sld_qfi));
    }
    Ok(out)
}

pub fn run(common: &Common) -> Result<(), CliError> {
    let c: VerifyConfig = load(common.config.as_deref())?;
    let out = resolve_out(&common.out, &c.out)?;
    let ls = nonempty("l", c.l.values()?)?;
    if let Some(&l) = ls
        .iter()
        .find(|&&l| !(4..=ED_MAX_L).contains(&l) || l % 2 == 1)
    {
        return Err(CliError::Config(format!(
            "verify runs on even L in [4, {ED_MAX_L}] (got {l})"
        )));
    }
    let betas = c.beta.values();
    if betas.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
        return Err(CliError::Config(
            "beta values must be positive and finite".into(),
        ));
    }
    let seed = common.seed.or(c.seed).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for &l in &ls {
        for _ in 0..c.draws {
            let (j, g, h) = draw(&mut rng);
            cases.push(Params::ground(j, g, h, l)?);
        }
    }
    let checks: Vec<Check> = cases
        .par_iter()
        .map(|&p| checks_for(&c, p, &betas))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    let failures = checks.iter().filter(|c| !c.pass).count();
    let report = Report {
        seed,
        all_pass: failures == 0,
        failures,
        checks,
    };
    let mut outputs = Outputs::default();
    outputs.primary(out.as_deref(), json(&report));
    outputs.flush()?;
    if failures > 0 {
        return Err(CliError::Numeric(format!(
            "{failures} of {} checks outside tolerance",
            report.checks.len()
        )));
    }
    Ok(())
}
