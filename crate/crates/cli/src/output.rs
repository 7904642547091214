use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

/// Failure of a subcommand, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or unusable output path (exit 2).
    Config(String),
    /// A numerical routine failed (exit 3).
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl From<qcrit::Error> for CliError {
    fn from(e: qcrit::Error) -> Self {
        use qcrit::Error as E;
        match e {
            E::InvalidParams(_) | E::SizeLimit { .. } | E::InsufficientData(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

/// Shortest round-trip scientific form (at most 17 significant digits).
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// `dir/stem<suffix>` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Output files collected in memory and written together at the end, so a
/// failed run leaves nothing behind.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, String)>,
    stdout: Option<String>,
}

impl Outputs {
    pub fn check_writable(path: &Path) -> Result<(), CliError> {
        let parent = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        if !parent.is_dir() {
            return Err(CliError::Config(format!(
                "output directory {} does not exist",
                parent.display()
            )));
        }
        if path.is_dir() {
            return Err(CliError::Config(format!(
                "{} is a directory",
                path.display()
            )));
        }
        Ok(())
    }

    /// Send `contents` to `path`, or to stdout when there is no path.
    pub fn primary(&mut self, path: Option<&Path>, contents: String) {
        match path {
            Some(p) => self.files.push((p.to_path_buf(), contents)),
            None => self.stdout = Some(contents),
        }
    }

    pub fn file(&mut self, path: &Path, contents: String) {
        self.files.push((path.to_path_buf(), contents));
    }

    pub fn flush(self) -> Result<(), CliError> {
        let mut written: Vec<&Path> = Vec::new();
        for (path, contents) in &self.files {
            if let Err(e) = fs::write(path, contents) {
                let _ = fs::remove_file(path);
                for p in written {
                    let _ = fs::remove_file(p);
                }
                return Err(CliError::Config(format!(
                    "cannot write {}: {e}",
                    path.display()
                )));
            }
            written.push(path);
        }
        if let Some(s) = self.stdout {
            print!("{s}");
        }
        Ok(())
    }
}
