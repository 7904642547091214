use serde::Serialize;

use qcrit::estimate::{run_replicas, Protocol};
use qcrit::{crb_report, CrbSummary, Params};

use super::resolve_out;
use crate::config::{beta_of, load, EstimateConfig, ProtocolKind};
use crate::output::{json, num, sibling, CliError, Outputs};
use crate::Common;

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a EstimateConfig,
    seed: u64,
    /// `flag`, `config` or `default`.
    seed_source: &'static str,
    protocol: Protocol<f64>,
    summary: Option<CrbSummary<f64>>,
    warning: Option<String>,
}

pub fn run(common: &Common) -> Result<(), CliError> {
    let c: EstimateConfig = load(common.config.as_deref())?;
    let out = resolve_out(&common.out, &c.out)?;
    let replicas_out = c
        .replicas_out
        .clone()
        .or_else(|| out.as_deref().map(|p| sibling(p, "_replicas.csv")));
    if let Some(p) = &replicas_out {
        Outputs::check_writable(p)?;
    }
    let (seed, seed_source) = match (common.seed, c.seed) {
        (Some(s), _) => (s, "flag"),
        (None, Some(s)) => (s, "config"),
        (None, None) => (0, "default"),
    };
    if c.replicas == 0 || c.m == 0 {
        return Err(CliError::Config("m and replicas must be at least 1".into()));
    }
    let p = Params::new(c.j, c.gamma, c.h, c.l, beta_of(c.temperature)?)?;
    let protocol = match c.protocol {
        ProtocolKind::Optimal => Protocol::SingleStage {
            reference_j0: c.reference_j0.unwrap_or(c.j),
        },
        ProtocolKind::TwoStage => Protocol::TwoStage {
            initial_guess: c.initial_guess.unwrap_or(1.1 * c.j),
            split: c.split,
        },
    };
    let runs = run_replicas(&p, protocol, c.m, c.replicas, seed)?;

    let (summary, warning) = match crb_report(&runs) {
        Ok(s) => {
            let w = s
                .qfi_zero
                .then(|| "QFI vanishes: the Cramer-Rao bound is undefined".to_string());
            (Some(s), w)
        }
        Err(e @ qcrit::Error::InsufficientData(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    if let Some(w) = &warning {
        eprintln!("qcrit: warning: {w}");
    }

    let mut outputs = Outputs::default();
    if let Some(r) = &replicas_out {
        let mut csv = String::from("replica,estimate,loglik,seed\n");
        for (i, run) in runs.iter().enumerate() {
            csv.push_str(&format!(
                "{i},{},{},{}\n",
                num(run.estimate),
                num(run.loglik),
                run.seed
            ));
        }
        outputs.file(r, csv);
    }
    let report = Summary {
        config: &c,
        seed,
        seed_source,
        protocol,
        summary,
        warning,
    };
    outputs.primary(out.as_deref(), json(&report));
    outputs.flush()
}
