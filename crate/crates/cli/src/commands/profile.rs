use serde::Serialize;

use qcrit::sld::{classify_kernel, default_window, Decay};
use qcrit::{sld_momentum, sld_real_space, Error, Params};

use super::resolve_out;
use crate::config::{beta_of, load, ProfileConfig};
use crate::output::{json, num, CliError, Outputs};
use crate::Common;

#[derive(Serialize)]
struct KernelReport {
    kernel: &'static str,
    class: String,
    exponent_or_xi: Option<f64>,
    fit_window: (usize, usize),
    residual: Option<f64>,
    other_residual: Option<f64>,
    points: usize,
    error: Option<String>,
}

impl KernelReport {
    fn new(
        kernel: &'static str,
        window: (usize, usize),
        r: Result<Decay<f64>, Error>,
    ) -> Result<Self, CliError> {
        Ok(match r {
            Ok(d) => Self {
                kernel,
                class: serde_json::to_value(d.class)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default(),
                exponent_or_xi: Some(d.exponent_or_xi),
                fit_window: d.fit_window,
                residual: Some(d.residual),
                other_residual: Some(d.other_residual),
                points: d.points,
                error: None,
            },
            Err(Error::NullKernel) => {
                eprintln!("qcrit: warning: {kernel} kernel vanishes identically");
                Self {
                    kernel,
                    class: "null kernel".into(),
                    exponent_or_xi: None,
                    fit_window: window,
                    residual: None,
                    other_residual: None,
                    points: 0,
                    error: Some(Error::NullKernel.to_string()),
                }
            }
            Err(e) => return Err(e.into()),
        })
    }
}

#[derive(Serialize)]
struct Profile {
    #[serde(rename = "L")]
    l: usize,
    j: f64,
    gamma: f64,
    h: f64,
    temperature: f64,
    #[serde(flatten)]
    b_y: KernelReport,
    b_z: KernelReport,
}

pub fn run(common: &Common) -> Result<(), CliError> {
    let c: ProfileConfig = load(common.config.as_deref())?;
    let out = resolve_out(&common.out, &c.out)?;
    let json_out = c
        .json_out
        .clone()
        .or_else(|| out.as_deref().map(|p| p.with_extension("json")));
    if let Some(p) = &json_out {
        Outputs::check_writable(p)?;
    }
    let window = c.window.unwrap_or_else(|| default_window(c.l));
    if window.0 > window.1 || window.1 >= c.l {
        return Err(CliError::Config(format!(
            "fit window {window:?} does not fit in 0..{}",
            c.l
        )));
    }
    let p = Params::new(c.j, c.gamma, c.h, c.l, beta_of(c.temperature)?)?;
    let op = sld_real_space(sld_momentum(&p)?)?;

    let mut csv = String::from("d,b_y,b_z\n");
    for d in 0..c.l {
        csv.push_str(&format!("{d},{},{}\n", num(op.by_d[d]), num(op.bz_d[d])));
    }
    let profile = Profile {
        l: c.l,
        j: c.j,
        gamma: c.gamma,
        h: c.h,
        temperature: c.temperature,
        b_y: KernelReport::new("b_y", window, classify_kernel(&op.by_d, window))?,
        b_z: KernelReport::new("b_z", window, classify_kernel(&op.bz_d, window))?,
    };

    let mut outputs = Outputs::default();
    if let Some(o) = &out {
        outputs.file(o, csv);
    }
    // Without any output path the classification goes to stdout.
    outputs.primary(json_out.as_deref(), json(&profile));
    outputs.flush()
}
