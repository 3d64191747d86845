//! Flat `key = value` scenario configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ffspin::{InitialSelection, ModelKind, Parity};

use crate::error::CliError;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    FastForward,
    NoDriving,
    SpectrumOnly,
    RegularizationOnly,
}

impl Mode {
    pub fn integrates(self) -> bool {
        matches!(self, Mode::FastForward | Mode::NoDriving)
    }
}

/// Which ground state the run starts from.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Sector {
    Even,
    Odd,
    /// Lowest level overall, degeneracy split at first order.
    None,
}

impl Sector {
    pub fn selection(self) -> InitialSelection {
        match self {
            Sector::Even => InitialSelection::Sector(Parity::Even),
            Sector::Odd => InitialSelection::Sector(Parity::Odd),
            Sector::None => InitialSelection::LowestFirstOrder,
        }
    }
}

macro_rules! keyword_enum {
    ($ty:ty, $what:literal, $($name:literal => $variant:expr),+ $(,)?) => {
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(format!(concat!("unknown ", $what, " '{}'"), other)),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let name = match self {
                    $(v if *v == $variant => $name,)+
                    _ => unreachable!(),
                };
                f.write_str(name)
            }
        }
    };
}

keyword_enum!(Mode, "mode",
    "fast_forward" => Mode::FastForward,
    "no_driving" => Mode::NoDriving,
    "spectrum_only" => Mode::SpectrumOnly,
    "regularization_only" => Mode::RegularizationOnly,
);

keyword_enum!(Sector, "sector",
    "even" => Sector::Even,
    "odd" => Sector::Odd,
    "none" => Sector::None,
);

/// Config-file spelling of the model.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ModelName(pub ModelKind);

keyword_enum!(ModelName, "model",
    "two_spin" => ModelName(ModelKind::TwoSpinXY),
    "three_spin_kagome" => ModelName(ModelKind::ThreeSpinKagome),
);

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub model: ModelKind,
    pub j0: f64,
    pub b0: f64,
    pub r0: f64,
    pub v_bar: f64,
    pub t_ff: f64,
    pub grid_points: usize,
    pub integrator_steps: usize,
    pub output_stride: usize,
    pub mode: Mode,
    pub sector: Sector,
    pub output_dir: PathBuf,
}

pub const KEYS: [&str; 12] = [
    "model",
    "j0",
    "b0",
    "r0",
    "v_bar",
    "t_ff",
    "grid_points",
    "integrator_steps",
    "output_stride",
    "mode",
    "sector",
    "output_dir",
];

impl ScenarioConfig {
    /// Standard constants for `model`; the three-spin spectrum uses the faster
    /// v̄ = 100, T_FF = 0.1 sweep.
    pub fn standard(model: ModelKind, mode: Mode) -> Self {
        let (v_bar, t_ff) = match (model, mode) {
            (ModelKind::ThreeSpinKagome, Mode::SpectrumOnly) => (100.0, 0.1),
            _ => (10.0, 1.0),
        };
        ScenarioConfig {
            model,
            j0: 10.0,
            b0: 0.0,
            r0: 0.0,
            v_bar,
            t_ff,
            grid_points: 2001,
            integrator_steps: 10_000,
            output_stride: 10,
            mode,
            sector: Sector::Even,
            output_dir: PathBuf::from("out"),
        }
    }

    /// Builds a config from `(key, value)` pairs applied in order. Model and
    /// mode are read first since they pick the defaults.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self, CliError> {
        let pick = |key: &str| pairs.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let model = match pick("model") {
            Some(v) => parse::<ModelName>("model", v)?.0,
            None => ModelKind::TwoSpinXY,
        };
        let mode = match pick("mode") {
            Some(v) => parse("mode", v)?,
            None => Mode::FastForward,
        };
        let mut config = ScenarioConfig::standard(model, mode);
        for (k, v) in pairs {
            config.set(k, v)?;
        }
        Ok(config)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "model" => self.model = parse::<ModelName>(key, value)?.0,
            "j0" => self.j0 = parse(key, value)?,
            "b0" => self.b0 = parse(key, value)?,
            "r0" => self.r0 = parse(key, value)?,
            "v_bar" => self.v_bar = parse(key, value)?,
            "t_ff" => self.t_ff = parse(key, value)?,
            "grid_points" => self.grid_points = parse(key, value)?,
            "integrator_steps" => self.integrator_steps = parse(key, value)?,
            "output_stride" => self.output_stride = parse(key, value)?,
            "mode" => self.mode = parse(key, value)?,
            "sector" => self.sector = parse(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            other => return Err(CliError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Every violated invariant, as a readable message. Empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let finite = [("j0", self.j0), ("b0", self.b0), ("r0", self.r0), ("v_bar", self.v_bar), ("t_ff", self.t_ff)];
        for (name, x) in finite {
            if !x.is_finite() {
                out.push(format!("{name} must be finite"));
            }
        }
        if self.v_bar.is_nan() || self.v_bar <= 0.0 {
            out.push("v_bar must be positive".into());
        }
        if self.t_ff.is_nan() || self.t_ff <= 0.0 {
            out.push("t_ff must be positive".into());
        }
        if self.grid_points < 3 {
            out.push(format!("grid_points must be at least 3 (got {})", self.grid_points));
        }
        if self.integrator_steps == 0 {
            out.push("integrator_steps must be positive".into());
        }
        if self.output_stride == 0 {
            out.push("output_stride must be positive".into());
        }
        if self.output_dir.as_os_str().is_empty() {
            out.push("output_dir must not be empty".into());
        }
        out
    }

    /// The resolved config in file syntax; parses back to `self`.
    pub fn to_manifest(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            s.push_str(key);
            s.push_str(" = ");
            s.push_str(&self.value_of(key));
            s.push('\n');
        }
        s
    }

    fn value_of(&self, key: &str) -> String {
        match key {
            "model" => ModelName(self.model).to_string(),
            "j0" => real(self.j0),
            "b0" => real(self.b0),
            "r0" => real(self.r0),
            "v_bar" => real(self.v_bar),
            "t_ff" => real(self.t_ff),
            "grid_points" => self.grid_points.to_string(),
            "integrator_steps" => self.integrator_steps.to_string(),
            "output_stride" => self.output_stride.to_string(),
            "mode" => self.mode.to_string(),
            "sector" => self.sector.to_string(),
            "output_dir" => self.output_dir.display().to_string(),
            _ => unreachable!(),
        }
    }
}

fn real(x: f64) -> String {
    format!("{x:?}")
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| CliError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::Syntax {
            line: n + 1,
            text: raw.to_string(),
        })?;
        let key = normalize_key(k.trim());
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::UnknownKey(key));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Turns `--key value` / `--key=value` arguments into pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let flag = arg.strip_prefix("--").ok_or_else(|| CliError::BadOverride(arg.clone()))?;
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| CliError::BadOverride(arg.clone()))?;
                (flag.to_string(), v.clone())
            }
        };
        let key = normalize_key(&key);
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::UnknownKey(key));
        }
        out.push((key, value));
    }
    Ok(out)
}

fn normalize_key(k: &str) -> String {
    k.replace('-', "_")
}

/// Reads `path` and applies `overrides` on top.
pub fn load(path: &Path, overrides: &[String]) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    let mut pairs = parse_pairs(&text)?;
    pairs.extend(parse_overrides(overrides)?);
    ScenarioConfig::from_pairs(&pairs)
}
