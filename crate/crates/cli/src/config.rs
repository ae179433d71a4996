//! Run configuration: a TOML file of sections whose dimensional values all
//! carry a unit suffix. Missing keys take the propanediol defaults.

use crate::units::{format_quantity, parse_quantity, Dimension, UnitError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use toml::Spanned;
use twodcs::model::ThreeLevelModel;
use twodcs::rdc::RdcSettings;
use twodcs::twod::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "rf2d")]
    Rf2d,
    #[serde(rename = "nhh2d")]
    Nhh2d,
    #[serde(rename = "rf-nhhpaths-2d")]
    RfNhhPaths2d,
    #[serde(rename = "popdyn")]
    Popdyn,
    #[serde(rename = "trace")]
    Trace,
    #[serde(rename = "greens")]
    Greens,
    #[serde(rename = "rdc")]
    Rdc,
    #[serde(rename = "compare")]
    Compare,
}

impl Mode {
    pub const ALL: [Mode; 8] = [
        Mode::Rf2d,
        Mode::Nhh2d,
        Mode::RfNhhPaths2d,
        Mode::Popdyn,
        Mode::Trace,
        Mode::Greens,
        Mode::Rdc,
        Mode::Compare,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Mode::Rf2d => "rf2d",
            Mode::Nhh2d => "nhh2d",
            Mode::RfNhhPaths2d => "rf-nhhpaths-2d",
            Mode::Popdyn => "popdyn",
            Mode::Trace => "trace",
            Mode::Greens => "greens",
            Mode::Rdc => "rdc",
            Mode::Compare => "compare",
        }
    }

    /// The spectrum method behind a 2D mode.
    pub fn method(self) -> Option<Method> {
        match self {
            Mode::Rf2d => Some(Method::Rf),
            Mode::Nhh2d => Some(Method::Nhh),
            Mode::RfNhhPaths2d => Some(Method::RfNhhPaths),
            _ => None,
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Mode::ALL.into_iter().find(|m| m.label() == s).ok_or_else(|| {
            format!("unknown mode `{s}`; expected one of {}", Mode::ALL.map(Mode::label).join(", "))
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Bin,
    Plot,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "bin" => Ok(Format::Bin),
            "plot" => Ok(Format::Plot),
            _ => Err(format!("unknown format `{s}`; expected csv, bin or plot")),
        }
    }
}

impl Format {
    fn label(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Bin => "bin",
            Format::Plot => "plot",
        }
    }
}

/// Detuning grid and waiting times for the three-level spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    /// rad/µs
    pub half_width: f64,
    pub count: usize,
    /// µs
    pub t2: Vec<f64>,
    pub peak_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopdynConfig {
    /// µs
    pub t2_max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdcConfig {
    pub settings: RdcSettings,
    pub peak_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub methods: [Method; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: BTreeSet<Format>,
    /// Also write every term of a 2D spectrum separately.
    pub split_paths: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub three_level: ThreeLevelModel,
    pub spectrum: SpectrumConfig,
    pub popdyn: PopdynConfig,
    pub rdc: RdcConfig,
    pub compare: CompareConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn defaults(mode: Mode) -> Self {
        Self {
            mode,
            three_level: ThreeLevelModel::propanediol(),
            spectrum: SpectrumConfig {
                half_width: std::f64::consts::TAU * 4.0,
                count: 401,
                t2: vec![0.0, 0.24, 0.5],
                peak_fraction: 0.2,
            },
            popdyn: PopdynConfig { t2_max: 10.0, count: 1001 },
            rdc: RdcConfig { settings: RdcSettings::default(), peak_fraction: 0.25 },
            compare: CompareConfig { methods: [Method::Rf, Method::Nhh] },
            output: OutputConfig {
                dir: PathBuf::from("twodcs-out"),
                formats: [Format::Csv, Format::Plot].into_iter().collect(),
                split_paths: false,
            },
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Syntax(String),
    #[error("line {line}: `{key}`: {source}")]
    Unit { line: usize, key: String, source: UnitError },
    #[error("line {line}: `{key}`: {message}")]
    Value { line: usize, key: String, message: String },
    #[error("mode `{mode}` does not use these keys: {}", keys.join(", "))]
    Incompatible { mode: Mode, keys: Vec<String> },
    #[error("{0}")]
    Model(#[from] twodcs::ModelError),
}

// Raw file layout. Every value keeps its source span for error messages.

macro_rules! section {
    ($name:ident { $($field:ident : $ty:ty),* $(,)? }) => {
        #[derive(Debug, Default, Deserialize)]
        #[serde(deny_unknown_fields)]
        struct $name {
            $($field: Option<Spanned<$ty>>,)*
        }

        impl $name {
            #[allow(dead_code)]
            fn present(&self) -> Vec<&'static str> {
                let mut keys = Vec::new();
                $(if self.$field.is_some() { keys.push(stringify!($field)); })*
                keys
            }
        }
    };
}

section!(RawThreeLevel {
    omega_b: String,
    omega_e: String,
    omega_c: String,
    rabi_ec: String,
    rabi_be: String,
    gamma1: String,
    gamma2: String,
    gamma0_b: String,
    gamma0_e: String,
    gamma0_c: String,
    dt_probe: String,
});

section!(RawSpectrum { half_width: String, count: i64, t2: Vec<String>, peak_fraction: f64 });

section!(RawPopdyn { t2_max: String, count: i64 });

section!(RawRdc {
    gamma: String,
    carrier: String,
    t_max: String,
    t_step: String,
    t2: String,
    pad_to: i64,
    window: Vec<String>,
    peak_fraction: f64,
});

section!(RawCompare { methods: Vec<String> });

section!(RawOutput { dir: String, formats: Vec<String>, split_paths: bool });

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    mode: Option<Spanned<String>>,
    three_level: Option<RawThreeLevel>,
    spectrum: Option<RawSpectrum>,
    popdyn: Option<RawPopdyn>,
    rdc: Option<RawRdc>,
    compare: Option<RawCompare>,
    output: Option<RawOutput>,
}

/// Resolves spans to line numbers and wraps value errors.
struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line<T>(&self, v: &Spanned<T>) -> usize {
        self.text[..v.span().start.min(self.text.len())].matches('\n').count() + 1
    }

    fn quantity(&self, key: &str, v: &Spanned<String>, dim: Dimension) -> Result<f64, ConfigError> {
        parse_quantity(v.get_ref(), dim).map_err(|source| ConfigError::Unit { line: self.line(v), key: key.into(), source })
    }

    fn invalid<T>(&self, key: &str, v: &Spanned<T>, message: impl Into<String>) -> ConfigError {
        ConfigError::Value { line: self.line(v), key: key.into(), message: message.into() }
    }

    fn non_negative(&self, key: &str, v: &Spanned<String>, dim: Dimension) -> Result<f64, ConfigError> {
        let x = self.quantity(key, v, dim)?;
        if !(x >= 0.0 && x.is_finite()) {
            return Err(self.invalid(key, v, format!("must be a finite non-negative value, got {}", v.get_ref())));
        }
        Ok(x)
    }

    fn positive(&self, key: &str, v: &Spanned<String>, dim: Dimension) -> Result<f64, ConfigError> {
        let x = self.non_negative(key, v, dim)?;
        if x == 0.0 {
            return Err(self.invalid(key, v, "must be positive"));
        }
        Ok(x)
    }

    fn count(&self, key: &str, v: &Spanned<i64>, min: i64) -> Result<usize, ConfigError> {
        let n = *v.get_ref();
        if n < min {
            return Err(self.invalid(key, v, format!("must be at least {min}, got {n}")));
        }
        Ok(n as usize)
    }

    fn fraction(&self, key: &str, v: &Spanned<f64>) -> Result<f64, ConfigError> {
        let f = *v.get_ref();
        if !(f > 0.0 && f < 1.0) {
            return Err(self.invalid(key, v, format!("must lie strictly between 0 and 1, got {f}")));
        }
        Ok(f)
    }
}

fn three_level_keys(raw: &RawFile) -> Vec<String> {
    let mut keys = Vec::new();
    let mut add = |section: &str, present: Vec<&str>| keys.extend(present.into_iter().map(|k| format!("{section}.{k}")));
    if let Some(s) = &raw.three_level {
        add("three_level", s.present());
    }
    if let Some(s) = &raw.spectrum {
        add("spectrum", s.present());
    }
    if let Some(s) = &raw.popdyn {
        add("popdyn", s.present());
    }
    if let Some(s) = &raw.compare {
        add("compare", s.present());
    }
    keys
}

fn rdc_keys(raw: &RawFile) -> Vec<String> {
    raw.rdc.as_ref().map_or(Vec::new(), |s| s.present().into_iter().map(|k| format!("rdc.{k}")).collect())
}

/// Parses configuration text for `mode`. An empty text gives the defaults.
pub fn parse_config_str(text: &str, mode: Mode) -> Result<RunConfig, ConfigError> {
    let raw: RawFile = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let src = Source { text };
    if let Some(m) = &raw.mode {
        let file_mode: Mode = m.get_ref().parse().map_err(|e: String| src.invalid("mode", m, e))?;
        if file_mode != mode {
            return Err(src.invalid("mode", m, format!("file is for `{file_mode}` but `{mode}` was requested")));
        }
    }
    let foreign = if mode == Mode::Rdc { three_level_keys(&raw) } else { rdc_keys(&raw) };
    if !foreign.is_empty() {
        return Err(ConfigError::Incompatible { mode, keys: foreign });
    }

    let mut cfg = RunConfig::defaults(mode);
    use Dimension::*;

    if let Some(s) = &raw.three_level {
        let m = &mut cfg.three_level;
        let levels = [("omega_b", &s.omega_b, &mut m.omega_b), ("omega_e", &s.omega_e, &mut m.omega_e), ("omega_c", &s.omega_c, &mut m.omega_c)];
        for (key, v, slot) in levels {
            if let Some(v) = v {
                *slot = src.quantity(&format!("three_level.{key}"), v, Frequency)?;
            }
        }
        let rates = [
            ("rabi_ec", &s.rabi_ec, &mut m.rabi_ec),
            ("rabi_be", &s.rabi_be, &mut m.rabi_be),
            ("gamma1", &s.gamma1, &mut m.gamma1),
            ("gamma2", &s.gamma2, &mut m.gamma2),
            ("gamma0_b", &s.gamma0_b, &mut m.gamma0_b),
            ("gamma0_e", &s.gamma0_e, &mut m.gamma0_e),
            ("gamma0_c", &s.gamma0_c, &mut m.gamma0_c),
        ];
        for (key, v, slot) in rates {
            if let Some(v) = v {
                *slot = src.non_negative(&format!("three_level.{key}"), v, Frequency)?;
            }
        }
        if let Some(v) = &s.dt_probe {
            m.dt_probe = src.non_negative("three_level.dt_probe", v, Time)?;
        }
    }
    cfg.three_level.validate()?;

    if let Some(s) = &raw.spectrum {
        let c = &mut cfg.spectrum;
        if let Some(v) = &s.half_width {
            c.half_width = src.positive("spectrum.half_width", v, Frequency)?;
        }
        if let Some(v) = &s.count {
            c.count = src.count("spectrum.count", v, 2)?;
        }
        if let Some(v) = &s.t2 {
            if v.get_ref().is_empty() {
                return Err(src.invalid("spectrum.t2", v, "needs at least one waiting time"));
            }
            c.t2 = v
                .get_ref()
                .iter()
                .map(|q| {
                    let t = parse_quantity(q, Time)
                        .map_err(|source| ConfigError::Unit { line: src.line(v), key: "spectrum.t2".into(), source })?;
                    if t >= 0.0 && t.is_finite() {
                        Ok(t)
                    } else {
                        Err(src.invalid("spectrum.t2", v, format!("waiting times must be non-negative, got {q}")))
                    }
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = &s.peak_fraction {
            c.peak_fraction = src.fraction("spectrum.peak_fraction", v)?;
        }
    }

    if let Some(s) = &raw.popdyn {
        if let Some(v) = &s.t2_max {
            cfg.popdyn.t2_max = src.positive("popdyn.t2_max", v, Time)?;
        }
        if let Some(v) = &s.count {
            cfg.popdyn.count = src.count("popdyn.count", v, 2)?;
        }
    }

    if let Some(s) = &raw.rdc {
        let r = &mut cfg.rdc.settings;
        if let Some(v) = &s.gamma {
            r.gamma_cm = src.positive("rdc.gamma", v, Wavenumber)?;
        }
        if let Some(v) = &s.carrier {
            r.carrier_cm = src.non_negative("rdc.carrier", v, Wavenumber)?;
        }
        if let Some(v) = &s.t_max {
            r.t_max_ps = src.positive("rdc.t_max", v, ShortTime)?;
        }
        if let Some(v) = &s.t_step {
            r.t_step_ps = src.positive("rdc.t_step", v, ShortTime)?;
        }
        if let Some(v) = &s.t2 {
            r.t2_ps = src.non_negative("rdc.t2", v, ShortTime)?;
        }
        if let Some(v) = &s.window {
            r.window_cm = match v.get_ref().as_slice() {
                [] => None,
                [lo, hi] => {
                    let parse = |q: &String| {
                        parse_quantity(q, Wavenumber)
                            .map_err(|source| ConfigError::Unit { line: src.line(v), key: "rdc.window".into(), source })
                    };
                    let (lo, hi) = (parse(lo)?, parse(hi)?);
                    if lo >= hi {
                        return Err(src.invalid("rdc.window", v, "lower bound must be below the upper bound"));
                    }
                    Some((lo, hi))
                }
                _ => return Err(src.invalid("rdc.window", v, "expected [] or [lower, upper]")),
            };
        }
        if let Some(v) = &s.peak_fraction {
            cfg.rdc.peak_fraction = src.fraction("rdc.peak_fraction", v)?;
        }
        let samples = (r.t_max_ps / r.t_step_ps).round() as usize + 1;
        if let Some(v) = &s.pad_to {
            r.pad_to = src.count("rdc.pad_to", v, 2)?;
            if r.pad_to < samples {
                return Err(src.invalid("rdc.pad_to", v, format!("must be at least the {samples} time samples")));
            }
        } else if r.pad_to < samples {
            r.pad_to = samples;
        }
    }

    if let Some(s) = &raw.compare {
        if let Some(v) = &s.methods {
            let parsed: Vec<Method> = v
                .get_ref()
                .iter()
                .map(|m| Method::from_label(m).ok_or_else(|| src.invalid("compare.methods", v, format!("unknown method `{m}`"))))
                .collect::<Result<_, _>>()?;
            cfg.compare.methods = parsed
                .try_into()
                .map_err(|_| src.invalid("compare.methods", v, "expected exactly two methods"))?;
        }
    }

    if let Some(s) = &raw.output {
        if let Some(v) = &s.dir {
            cfg.output.dir = PathBuf::from(v.get_ref());
        }
        if let Some(v) = &s.formats {
            cfg.output.formats = v
                .get_ref()
                .iter()
                .map(|f| f.parse::<Format>().map_err(|e| src.invalid("output.formats", v, e)))
                .collect::<Result<_, _>>()?;
        }
        if let Some(v) = &s.split_paths {
            cfg.output.split_paths = *v.get_ref();
        }
    }
    Ok(cfg)
}

pub fn parse_config(path: &Path, mode: Mode) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    parse_config_str(&text, mode)
}

fn quote(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn list(items: impl IntoIterator<Item = String>) -> String {
    format!("[{}]", items.into_iter().map(|s| quote(&s)).collect::<Vec<_>>().join(", "))
}

/// Writes the configuration in canonical units. Only the sections the mode
/// reads are written, so the text parses back for the same mode.
pub fn serialize_config(cfg: &RunConfig) -> String {
    use std::fmt::Write;
    use Dimension::*;
    let mut s = String::new();
    let q = format_quantity;
    let _ = writeln!(s, "mode = {}", quote(cfg.mode.label()));
    if cfg.mode == Mode::Rdc {
        let r = &cfg.rdc.settings;
        let _ = writeln!(s, "\n[rdc]");
        let _ = writeln!(s, "gamma = {}", quote(&q(r.gamma_cm, Wavenumber)));
        let _ = writeln!(s, "carrier = {}", quote(&q(r.carrier_cm, Wavenumber)));
        let _ = writeln!(s, "t_max = {}", quote(&q(r.t_max_ps, ShortTime)));
        let _ = writeln!(s, "t_step = {}", quote(&q(r.t_step_ps, ShortTime)));
        let _ = writeln!(s, "t2 = {}", quote(&q(r.t2_ps, ShortTime)));
        let _ = writeln!(s, "pad_to = {}", r.pad_to);
        let window = r.window_cm.map_or(Vec::new(), |(lo, hi)| vec![q(lo, Wavenumber), q(hi, Wavenumber)]);
        let _ = writeln!(s, "window = {}", list(window));
        let _ = writeln!(s, "peak_fraction = {:?}", cfg.rdc.peak_fraction);
    } else {
        let m = &cfg.three_level;
        let _ = writeln!(s, "\n[three_level]");
        for (key, v) in [
            ("omega_b", m.omega_b),
            ("omega_e", m.omega_e),
            ("omega_c", m.omega_c),
            ("rabi_ec", m.rabi_ec),
            ("rabi_be", m.rabi_be),
            ("gamma1", m.gamma1),
            ("gamma2", m.gamma2),
            ("gamma0_b", m.gamma0_b),
            ("gamma0_e", m.gamma0_e),
            ("gamma0_c", m.gamma0_c),
        ] {
            let _ = writeln!(s, "{key} = {}", quote(&q(v, Frequency)));
        }
        let _ = writeln!(s, "dt_probe = {}", quote(&q(m.dt_probe, Time)));
        let c = &cfg.spectrum;
        let _ = writeln!(s, "\n[spectrum]");
        let _ = writeln!(s, "half_width = {}", quote(&q(c.half_width, Frequency)));
        let _ = writeln!(s, "count = {}", c.count);
        let _ = writeln!(s, "t2 = {}", list(c.t2.iter().map(|&t| q(t, Time))));
        let _ = writeln!(s, "peak_fraction = {:?}", c.peak_fraction);
        let _ = writeln!(s, "\n[popdyn]");
        let _ = writeln!(s, "t2_max = {}", quote(&q(cfg.popdyn.t2_max, Time)));
        let _ = writeln!(s, "count = {}", cfg.popdyn.count);
        let _ = writeln!(s, "\n[compare]");
        let _ = writeln!(s, "methods = {}", list(cfg.compare.methods.iter().map(|m| m.label().to_string())));
    }
    let o = &cfg.output;
    let _ = writeln!(s, "\n[output]");
    let _ = writeln!(s, "dir = {}", quote(&o.dir.to_string_lossy()));
    let _ = writeln!(s, "formats = {}", list(o.formats.iter().map(|f| f.label().to_string())));
    let _ = writeln!(s, "split_paths = {}", o.split_paths);
    s
}
