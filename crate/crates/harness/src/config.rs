//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key is
//! optional; missing keys take the defaults of [`RunConfig::default`], which
//! describe solver S1 at `ν = 0.1` with four slices.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cylinder_bench::DEFAULT_GRID;
use ns2d::Method;
use thiserror::Error;
use timeparallel::Schedule;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("constraint `{constraint}` violated: {message}")]
    Invalid { constraint: &'static str, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Serial,
    Parareal,
    Mms,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "serial" => Ok(Mode::Serial),
            "parareal" => Ok(Mode::Parareal),
            "mms" => Ok(Mode::Mms),
            _ => Err(format!("unknown mode `{s}` (expected serial, parareal or mms)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Serial => "serial",
            Mode::Parareal => "parareal",
            Mode::Mms => "mms",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub nu: f64,
    pub nx: usize,
    pub ny: usize,
    pub scheme_coarse: Method,
    pub scheme_fine: Method,
    /// Coarse steps over the whole time interval.
    pub n_coarse_total: usize,
    /// Fine steps over the whole time interval.
    pub n_fine_total: usize,
    pub n_slices: usize,
    /// Parareal iteration limit; `None` means `n_slices`.
    pub k_max: Option<usize>,
    pub tol: f64,
    pub mode: Mode,
    pub out_dir: PathBuf,
    /// Write the serial boundary states as checkpoint files.
    pub checkpoints: bool,
    /// End of the simulated interval, at most 8.
    pub t_end: f64,
    /// Parabolic inflow on; off closes the inlet.
    pub inflow: bool,
    pub schedule: Schedule,
    /// Coarsest step count of the order study, per method.
    pub mms_steps_ie: usize,
    pub mms_steps_fs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            nu: 0.1,
            nx: DEFAULT_GRID.0,
            ny: DEFAULT_GRID.1,
            scheme_coarse: Method::ImplicitEuler,
            scheme_fine: Method::ImplicitEuler,
            n_coarse_total: 16,
            n_fine_total: 32,
            n_slices: 4,
            k_max: None,
            tol: 1e-12,
            mode: Mode::Parareal,
            out_dir: PathBuf::from("out"),
            checkpoints: false,
            t_end: 8.0,
            inflow: true,
            schedule: Schedule::Parallel,
            mms_steps_ie: 64,
            mms_steps_fs: 128,
        }
    }
}

impl RunConfig {
    /// S1: `(IE, 16) × (IE, 32)`.
    pub fn s1(nu: f64) -> Self {
        Self {
            nu,
            ..Self::default()
        }
    }

    /// S2: `(IE, 16) × (FS, 32)`.
    pub fn s2(nu: f64) -> Self {
        Self {
            nu,
            scheme_fine: Method::FractionalStep,
            ..Self::default()
        }
    }

    pub fn k_max(&self) -> usize {
        self.k_max.unwrap_or(self.n_slices)
    }

    pub fn coarse_steps_per_slice(&self) -> usize {
        self.n_coarse_total / self.n_slices
    }

    pub fn fine_steps_per_slice(&self) -> usize {
        self.n_fine_total / self.n_slices
    }

    /// `(IE,16)x(FS,32)`, prefixed by `S1`/`S2` for the two solvers of the
    /// study.
    pub fn solver_label(&self) -> String {
        let pair = format!(
            "({},{})x({},{})",
            self.scheme_coarse, self.n_coarse_total, self.scheme_fine, self.n_fine_total
        );
        let named = match (self.scheme_coarse, self.n_coarse_total, self.scheme_fine, self.n_fine_total) {
            (Method::ImplicitEuler, 16, Method::ImplicitEuler, 32) => Some("S1"),
            (Method::ImplicitEuler, 16, Method::FractionalStep, 32) => Some("S2"),
            _ => None,
        };
        match named {
            Some(s) => format!("{s} {pair}"),
            None => pair,
        }
    }

    /// Human-readable summary printed at the start of a run.
    pub fn header(&self) -> String {
        format!(
            "mode={} solver={} nu={} grid={}x{} n_slices={} k_max={} tol={:e} t_end={}",
            self.mode,
            self.solver_label(),
            self.nu,
            self.nx,
            self.ny,
            self.n_slices,
            self.k_max(),
            self.tol,
            self.t_end
        )
    }

    /// The configuration in the file format, with every key spelled out.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        put("mode", self.mode.to_string());
        put("nu", format!("{:?}", self.nu));
        put("nx", self.nx.to_string());
        put("ny", self.ny.to_string());
        put("scheme_coarse", self.scheme_coarse.to_string());
        put("scheme_fine", self.scheme_fine.to_string());
        put("n_coarse_total", self.n_coarse_total.to_string());
        put("n_fine_total", self.n_fine_total.to_string());
        put("n_slices", self.n_slices.to_string());
        put("k_max", self.k_max().to_string());
        put("tol", format!("{:e}", self.tol));
        put("out_dir", self.out_dir.display().to_string());
        put("checkpoints", self.checkpoints.to_string());
        put("t_end", format!("{:?}", self.t_end));
        put("inflow", if self.inflow { "on" } else { "off" }.to_string());
        put(
            "schedule",
            match self.schedule {
                Schedule::Parallel => "parallel",
                Schedule::Serial => "serial",
            }
            .to_string(),
        );
        put("mms_steps_ie", self.mms_steps_ie.to_string());
        put("mms_steps_fs", self.mms_steps_fs.to_string());
        s
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |constraint, message: String| Err(ConfigError::Invalid { constraint, message });
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return fail("nu > 0", format!("nu = {}", self.nu));
        }
        if self.nx < 3 || self.ny < 3 {
            return fail("grid >= 3x3", format!("{}x{}", self.nx, self.ny));
        }
        if self.n_slices == 0 {
            return fail("n_slices >= 1", "n_slices = 0".into());
        }
        for (name, n) in [("n_coarse_total", self.n_coarse_total), ("n_fine_total", self.n_fine_total)] {
            if n == 0 || n % self.n_slices != 0 {
                return fail(
                    "step totals divisible by n_slices",
                    format!("{name} = {n} is not a positive multiple of n_slices = {}", self.n_slices),
                );
            }
        }
        if self.k_max == Some(0) {
            return fail("k_max >= 1", "k_max = 0".into());
        }
        if !(self.tol >= 0.0) {
            return fail("tol >= 0", format!("tol = {}", self.tol));
        }
        if !(self.t_end > 0.0 && self.t_end <= 8.0) {
            return fail("0 < t_end <= 8", format!("t_end = {}", self.t_end));
        }
        if self.mms_steps_ie == 0 || self.mms_steps_fs == 0 {
            return fail("mms step counts >= 1", "zero base step count".into());
        }
        Ok(())
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::Parse {
        line,
        message: format!("bad value `{value}` for {key}: {e}"),
    })
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(ConfigError::Parse {
            line,
            message: format!("bad value `{value}` for {key}: expected on/off"),
        }),
    }
}

/// Parses configuration text and validates the result.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut c = RunConfig::default();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "nu" => c.nu = parse_value(line, key, value)?,
            "nx" => c.nx = parse_value(line, key, value)?,
            "ny" => c.ny = parse_value(line, key, value)?,
            "scheme_coarse" => c.scheme_coarse = parse_value(line, key, value)?,
            "scheme_fine" => c.scheme_fine = parse_value(line, key, value)?,
            "n_coarse_total" => c.n_coarse_total = parse_value(line, key, value)?,
            "n_fine_total" => c.n_fine_total = parse_value(line, key, value)?,
            "n_slices" => c.n_slices = parse_value(line, key, value)?,
            "k_max" => c.k_max = Some(parse_value(line, key, value)?),
            "tol" => c.tol = parse_value(line, key, value)?,
            "mode" => c.mode = parse_value(line, key, value)?,
            "out_dir" => c.out_dir = PathBuf::from(value),
            "checkpoints" => c.checkpoints = parse_bool(line, key, value)?,
            "t_end" => c.t_end = parse_value(line, key, value)?,
            "inflow" => c.inflow = parse_bool(line, key, value)?,
            "schedule" => {
                c.schedule = match value {
                    "parallel" => Schedule::Parallel,
                    "serial" => Schedule::Serial,
                    _ => {
                        return Err(ConfigError::Parse {
                            line,
                            message: format!("bad value `{value}` for schedule: expected parallel or serial"),
                        })
                    }
                }
            }
            "mms_steps_ie" => c.mms_steps_ie = parse_value(line, key, value)?,
            "mms_steps_fs" => c.mms_steps_fs = parse_value(line, key, value)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
    }
    c.validate()?;
    Ok(c)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}
