use rayon::prelude::*;

use qcrit::qfi::qfi_exact;
use qcrit::{
    qfi_critical_expansion, qfi_low_t_leading, qfi_thermal_integral, Beta, IntegralForm, Params,
    QfiMethod, QfiReport,
};

use super::{nonempty, resolve_out};
use crate::config::{beta_of, load, Form, SweepConfig, SweepMethod};
use crate::output::{num, CliError, Outputs};
use crate::Common;

pub const HEADER: &str = "L,J,gamma,h,beta,z,qfi,qfi_per_site,method,unpaired,err_est";

fn point(c: &SweepConfig, l: usize, h: f64, t: f64) -> Result<(Params, QfiReport<f64>), CliError> {
    let p = Params::new(c.j, c.gamma, h, l, beta_of(t)?)?;
    let report = match c.method {
        SweepMethod::Exact => qfi_exact(&p)?,
        SweepMethod::Integral => {
            let form = match c.integral_form {
                Form::Printed => IntegralForm::Printed,
                Form::General => IntegralForm::General,
            };
            qfi_thermal_integral(&p, form)?
        }
        SweepMethod::Expansion => {
            let z = l as f64 * (h - c.j);
            if z.abs() > 1.0 {
                eprintln!("qcrit: warning: expansion used outside |z| <= 1 (L = {l}, z = {z})");
            }
            QfiReport {
                value: qfi_critical_expansion(&p, z),
                per_mode: Vec::new(),
                method: QfiMethod::CriticalExpansion,
                unpaired_contribution: 0.0,
                error_estimate: f64::NAN,
            }
        }
        SweepMethod::LowT => QfiReport {
            value: qfi_low_t_leading(&p)?,
            per_mode: Vec::new(),
            method: QfiMethod::LowTLeading,
            unpaired_contribution: 0.0,
            error_estimate: f64::NAN,
        },
    };
    Ok((p, report))
}

fn validate(c: &SweepConfig, temps: &[f64]) -> Result<(), CliError> {
    let needs_t = matches!(c.method, SweepMethod::Integral | SweepMethod::LowT);
    if needs_t && temps.contains(&0.0) {
        return Err(CliError::Config(format!(
            "method {:?} needs temperature > 0",
            c.method
        )));
    }
    if c.method == SweepMethod::Expansion && temps.iter().any(|&t| t != 0.0) {
        return Err(CliError::Config(
            "method expansion is a T = 0 result".into(),
        ));
    }
    Ok(())
}

pub fn run(common: &Common) -> Result<(), CliError> {
    let c: SweepConfig = load(common.config.as_deref())?;
    let out = resolve_out(&common.out, &c.out)?;
    let ls = nonempty("l", c.l.values()?)?;
    let hs = nonempty("h", c.h.values())?;
    let ts = nonempty("temperature", c.temperature.values())?;
    validate(&c, &ts)?;

    let mut grid = Vec::with_capacity(ls.len() * hs.len() * ts.len());
    for &l in &ls {
        for &h in &hs {
            for &t in &ts {
                grid.push((l, h, t));
            }
        }
    }
    let rows: Vec<(Params, QfiReport<f64>)> = grid
        .par_iter()
        .map(|&(l, h, t)| point(&c, l, h, t))
        .collect::<Result<_, _>>()?;

    let mut csv = String::from(HEADER);
    csv.push('\n');
    for (p, r) in &rows {
        let beta = match p.beta {
            Beta::Infinite => f64::INFINITY,
            Beta::Finite(b) => b,
        };
        let lf = p.l as f64;
        let fields = [
            p.l.to_string(),
            num(p.j),
            num(p.gamma),
            num(p.h),
            num(beta),
            num(lf * (p.h - p.j)),
            num(r.value),
            num(r.value / lf),
            r.method.as_str().to_string(),
            num(r.unpaired_contribution),
            num(r.error_estimate),
        ];
        csv.push_str(&fields.join(","));
        csv.push('\n');
    }
    let mut outputs = Outputs::default();
    outputs.primary(out.as_deref(), csv);
    outputs.flush()
}
