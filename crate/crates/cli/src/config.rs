//! TOML run configurations, one flat table per subcommand.
//!
//! Every key is optional and falls back to the defaults below. Unknown keys
//! are rejected. Grid keys accept a list, a single value, or a range table:
//!
//! ```toml
//! h = { start = 0.9, stop = 1.1, num = 21 }   # inclusive, evenly spaced
//! l = { start = 64, stop = 2048, factor = 2 } # geometric
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::output::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum FloatGrid {
    List(Vec<f64>),
    One(f64),
    Range(FloatRange),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloatRange {
    pub start: f64,
    pub stop: f64,
    pub num: usize,
}

impl FloatGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            FloatGrid::List(v) => v.clone(),
            FloatGrid::One(x) => vec![*x],
            FloatGrid::Range(r) => match r.num {
                0 => Vec::new(),
                1 => vec![r.start],
                n => (0..n)
                    .map(|i| r.start + (r.stop - r.start) * i as f64 / (n - 1) as f64)
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SizeGrid {
    List(Vec<usize>),
    One(usize),
    Range(SizeRange),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeRange {
    pub start: usize,
    pub stop: usize,
    pub factor: usize,
}

impl SizeGrid {
    pub fn values(&self) -> Result<Vec<usize>, CliError> {
        match self {
            SizeGrid::List(v) => Ok(v.clone()),
            SizeGrid::One(l) => Ok(vec![*l]),
            SizeGrid::Range(r) => {
                if r.factor < 2 || r.start == 0 {
                    return Err(CliError::Config(
                        "size range needs start >= 1 and factor >= 2".into(),
                    ));
                }
                let mut out = Vec::new();
                let mut l = r.start;
                while l <= r.stop {
                    out.push(l);
                    l *= r.factor;
                }
                Ok(out)
            }
        }
    }
}

fn floats(v: &[f64]) -> FloatGrid {
    FloatGrid::List(v.to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMethod {
    /// Exact momentum sum at `T = 0`, exact block sum at `T > 0`.
    #[default]
    Exact,
    Integral,
    Expansion,
    LowT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    #[default]
    Printed,
    General,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub j: f64,
    pub gamma: f64,
    pub h: FloatGrid,
    pub l: SizeGrid,
    /// `0` selects the ground state.
    pub temperature: FloatGrid,
    pub method: SweepMethod,
    pub integral_form: Form,
    pub out: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            j: 1.0,
            gamma: 1.0,
            h: floats(&[1.0]),
            l: SizeGrid::List(vec![4]),
            temperature: floats(&[0.0]),
            method: SweepMethod::Exact,
            integral_form: Form::Printed,
            out: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileConfig {
    pub j: f64,
    pub gamma: f64,
    pub h: f64,
    pub l: usize,
    pub temperature: f64,
    /// Fit window `[lo, hi]` in `d`; `[4, L/4]` if absent.
    pub window: Option<(usize, usize)>,
    pub out: Option<PathBuf>,
    /// Classification JSON; next to `out` with a `.json` extension if absent.
    pub json_out: Option<PathBuf>,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            j: 1.0,
            gamma: 1.0,
            h: 1.0,
            l: 512,
            temperature: 0.0,
            window: None,
            out: None,
            json_out: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingConfig {
    pub j: f64,
    pub gamma: f64,
    pub l: SizeGrid,
    /// Scaling variable `z = L (h - J)`.
    pub z: FloatGrid,
    /// Half-width of the pseudo-critical search, relative to `|J|`.
    pub bracket: f64,
    pub out: Option<PathBuf>,
    /// Pseudo-critical table; `<out stem>_pseudo.csv` if absent.
    pub table_out: Option<PathBuf>,
    /// Raw grid `L,J,gamma,h,z,qfi`; not written if absent.
    pub grid_out: Option<PathBuf>,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            j: 1.0,
            gamma: 2.0,
            l: SizeGrid::List(vec![128, 256, 512, 1024, 2048]),
            z: FloatGrid::Range(FloatRange {
                start: -1.0,
                stop: 1.0,
                num: 9,
            }),
            bracket: qcrit::scaling::DEFAULT_BRACKET,
            out: None,
            table_out: None,
            grid_out: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    #[default]
    Optimal,
    TwoStage,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateConfig {
    /// True coupling of the simulated state.
    pub j: f64,
    pub gamma: f64,
    pub h: f64,
    pub l: usize,
    pub temperature: f64,
    /// Copies per replica.
    pub m: usize,
    pub replicas: usize,
    pub protocol: ProtocolKind,
    /// Measurement reference of the optimal protocol; `j` if absent.
    pub reference_j0: Option<f64>,
    /// Stage-1 reference of the two-stage protocol; `1.1 j` if absent.
    pub initial_guess: Option<f64>,
    /// Stage-1 fraction of copies; `ceil(sqrt M)` copies if absent.
    pub split: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Per-replica CSV; `<out stem>_replicas.csv` if absent.
    pub replicas_out: Option<PathBuf>,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            j: 1.0,
            gamma: 1.0,
            h: 1.05,
            l: 64,
            temperature: 0.0,
            m: 10_000,
            replicas: 500,
            protocol: ProtocolKind::Optimal,
            reference_j0: None,
            initial_guess: None,
            split: None,
            seed: None,
            out: None,
            replicas_out: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub l: SizeGrid,
    /// Random `(J, gamma, h)` draws per size.
    pub draws: usize,
    pub beta: FloatGrid,
    pub seed: Option<u64>,
    pub tol_zero_t: f64,
    pub tol_thermal: f64,
    pub tol_lyapunov: f64,
    pub tol_sld_qfi: f64,
    pub out: Option<PathBuf>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            l: SizeGrid::List(vec![4, 6, 8]),
            draws: 5,
            beta: floats(&[0.5, 2.0, 10.0]),
            seed: None,
            tol_zero_t: 1e-8,
            tol_thermal: 1e-5,
            tol_lyapunov: 1e-8,
            tol_sld_qfi: 1e-6,
            out: None,
        }
    }
}

/// Parse `path`, or return the defaults when no file is given.
pub fn load<C: Default + for<'de> Deserialize<'de>>(path: Option<&Path>) -> Result<C, CliError> {
    let Some(path) = path else {
        return Ok(C::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
}

/// `T = 0` means the ground state.
pub fn beta_of(temperature: f64) -> Result<qcrit::Beta<f64>, CliError> {
    if temperature == 0.0 {
        Ok(qcrit::Beta::Infinite)
    } else if temperature > 0.0 && temperature.is_finite() {
        Ok(qcrit::Beta::Finite(1.0 / temperature))
    } else {
        Err(CliError::Config(format!(
            "temperature must be >= 0 (got {temperature})"
        )))
    }
}
