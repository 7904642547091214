use std::path::PathBuf;

use crate::output::{CliError, Outputs};

pub mod estimate;
pub mod profile;
pub mod scaling;
pub mod sweep;
pub mod verify;

/// `--out` wins over the config key; the result is checked for writability.
fn resolve_out(
    flag: &Option<PathBuf>,
    config: &Option<PathBuf>,
) -> Result<Option<PathBuf>, CliError> {
    let out = flag.clone().or_else(|| config.clone());
    if let Some(p) = &out {
        Outputs::check_writable(p)?;
    }
    Ok(out)
}

fn nonempty<T>(name: &str, v: Vec<T>) -> Result<Vec<T>, CliError> {
    if v.is_empty() {
        Err(CliError::Config(format!("grid `{name}` is empty")))
    } else {
        Ok(v)
    }
}
