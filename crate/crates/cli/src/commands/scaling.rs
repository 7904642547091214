use serde::Serialize;

use qcrit::scaling::{attach_pseudo_points, evaluate_grid, scaling_from_rows, write_grid_csv};
use qcrit::{Params, ScalingFit};

use super::{nonempty, resolve_out};
use crate::config::{load, ScalingConfig};
use crate::output::{json, num, sibling, CliError, Outputs};
use crate::Common;

#[derive(Serialize)]
struct Report<'a> {
    j: f64,
    gamma: f64,
    bracket: f64,
    /// Why the shift fit is missing, when it is.
    shift_note: Option<String>,
    fit: &'a ScalingFit<f64>,
}

pub fn run(common: &Common) -> Result<(), CliError> {
    let c: ScalingConfig = load(common.config.as_deref())?;
    let out = resolve_out(&common.out, &c.out)?;
    let table_out = c
        .table_out
        .clone()
        .or_else(|| out.as_deref().map(|p| sibling(p, "_pseudo.csv")));
    for p in table_out.iter().chain(&c.grid_out) {
        Outputs::check_writable(p)?;
    }
    let mut ls = nonempty("l", c.l.values()?)?;
    ls.sort_unstable();
    ls.dedup();
    if ls.len() < 3 {
        return Err(CliError::Config(format!(
            "scaling needs at least 3 distinct sizes (got {})",
            ls.len()
        )));
    }
    let zs = nonempty("z", c.z.values())?;
    if !(c.bracket > 0.0 && c.bracket < 1.0) {
        return Err(CliError::Config("bracket must lie in (0, 1)".into()));
    }
    let base = Params::ground(c.j, c.gamma, c.j, ls[0])?;

    let rows = evaluate_grid(&base, &ls, &zs)?;
    let fit = attach_pseudo_points(scaling_from_rows(&rows)?, &base, &ls, c.bracket)?;
    let shift_note = if fit.pseudo_points.is_empty() {
        Some("no sizes L >= 64 (or gamma = 0): pseudo-critical points not computed".into())
    } else if fit.shift.is_none() {
        let pts = &fit.pseudo_points;
        Some(match qcrit::shift_exponent(pts, c.j) {
            Err(e) => e.to_string(),
            Ok(_) => "shift fit unavailable".into(),
        })
    } else {
        None
    };
    if let Some(w) = &fit.warning {
        eprintln!("qcrit: warning: {w}");
    }

    let mut outputs = Outputs::default();
    if let Some(t) = &table_out {
        let mut csv = String::from("L,h_star,shift\n");
        for &(l, h) in &fit.pseudo_points {
            csv.push_str(&format!("{l},{},{}\n", num(h), num(h - c.j)));
        }
        outputs.file(t, csv);
    }
    if let Some(g) = &c.grid_out {
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &rows).map_err(|e| CliError::Numeric(e.to_string()))?;
        outputs.file(g, String::from_utf8_lossy(&buf).into_owned());
    }
    let report = Report {
        j: c.j,
        gamma: c.gamma,
        bracket: c.bracket,
        shift_note,
        fit: &fit,
    };
    outputs.primary(out.as_deref(), json(&report));
    outputs.flush()
}
