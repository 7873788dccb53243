//! Flat key-value run configuration.
//!
//! One `key = value` pair per line, `#` starts a comment, blank lines
//! ignored. Keys are exactly the [`RunConfig`] field names; unknown keys
//! are rejected with a line diagnostic. All rates and frequencies are in
//! units of the common decay scale gamma, times in 1/gamma.

use crate::dynamics::{IntegratorConfig, Method, DEFAULT_STEADY_TOL, DEFAULT_STEP};
use crate::{C64, DensityMatrix, Error, Matrix4c, Result, SystemParams};
use std::fmt::Write as _;
use std::str::FromStr;

/// Initial condition: a bare level or an explicit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// 1-based bare-level index.
    Bare(usize),
    /// Row-major 16 complex entries.
    Explicit(Box<Matrix4c>),
}

impl InitialState {
    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        match self {
            InitialState::Bare(k) => {
                if !(1..=4).contains(k) {
                    return Err(Error::InvalidConfig(format!("initial_state level {k} out of 1..4")));
                }
                Ok(DensityMatrix::pure_bare(*k))
            }
            InitialState::Explicit(m) => DensityMatrix::from_matrix(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidConfig(format!("format must be csv or json, got {other:?}"))),
        }
    }
}

/// Everything a run needs, with physically sensible defaults (the strong
/// symmetric resonant drive).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub rabi_31: f64,
    pub rabi_32: f64,
    pub rabi_41: f64,
    pub delta_31: f64,
    pub delta_32: f64,
    pub delta_41: f64,
    pub gamma_31: f64,
    pub gamma_32: f64,
    pub gamma_41: f64,
    pub gamma_42: f64,
    pub phi_31: f64,
    pub phi_32: f64,
    pub step: f64,
    pub t_end: f64,
    pub sample_every: usize,
    /// "rk4" or "rk45".
    pub method: String,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub steady_tol: f64,
    pub initial_state: InitialState,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_step: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_step: f64,
    pub out: Option<String>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rabi_31: 5.0,
            rabi_32: 5.0,
            rabi_41: 5.0,
            delta_31: 0.0,
            delta_32: 0.0,
            delta_41: 0.0,
            gamma_31: 1.0,
            gamma_32: 1.0,
            gamma_41: 1.0,
            gamma_42: 1.0,
            phi_31: 0.0,
            phi_32: 0.0,
            step: DEFAULT_STEP,
            t_end: 20.0,
            sample_every: 100,
            method: "rk4".to_string(),
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            steady_tol: DEFAULT_STEADY_TOL,
            initial_state: InitialState::Bare(1),
            omega_min: 0.25,
            omega_max: 10.0,
            omega_step: 0.25,
            delta_min: -4.0,
            delta_max: 4.0,
            delta_step: 0.25,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    pub fn system_params(&self) -> SystemParams {
        SystemParams {
            rabi_31: self.rabi_31,
            rabi_32: self.rabi_32,
            rabi_41: self.rabi_41,
            delta_31: self.delta_31,
            delta_32: self.delta_32,
            delta_41: self.delta_41,
            gamma_31: self.gamma_31,
            gamma_32: self.gamma_32,
            gamma_41: self.gamma_41,
            gamma_42: self.gamma_42,
            phi_31: self.phi_31,
            phi_32: self.phi_32,
        }
    }

    pub fn integrator_config(&self) -> Result<IntegratorConfig> {
        let method = match self.method.as_str() {
            "rk4" => Method::FixedRk4,
            "rk45" => Method::AdaptiveRk45 { rel_tol: self.rel_tol, abs_tol: self.abs_tol },
            other => {
                return Err(Error::InvalidConfig(format!(
                    "method must be rk4 or rk45, got {other:?}"
                )))
            }
        };
        let cfg = IntegratorConfig {
            step: self.step,
            t_end: self.t_end,
            sample_every: self.sample_every,
            method,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.system_params().validate()?;
        self.integrator_config()?;
        if !(self.steady_tol > 0.0) {
            return Err(Error::InvalidConfig(format!("steady_tol must be > 0, got {}", self.steady_tol)));
        }
        for (name, v) in [
            ("omega_step", self.omega_step),
            ("delta_step", self.delta_step),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.omega_max < self.omega_min || self.delta_max < self.delta_min {
            return Err(Error::InvalidConfig("sweep axis max below min".to_string()));
        }
        self.initial_state.density_matrix()?;
        Ok(())
    }

    /// Parse the flat text format. Later assignments win; unknown keys and
    /// malformed values are reported with their line number.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::ConfigParse {
                line,
                msg: format!("expected key = value, got {body:?}"),
            })?;
            let key = key.trim();
            let value = value.trim();
            cfg.set(key, value)
                .map_err(|e| Error::ConfigParse { line, msg: e.to_string() })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num(key: &str, value: &str) -> Result<f64> {
            value.parse().map_err(|_| {
                Error::InvalidConfig(format!("{key}: expected a number, got {value:?}"))
            })
        }
        match key {
            "rabi_31" => self.rabi_31 = num(key, value)?,
            "rabi_32" => self.rabi_32 = num(key, value)?,
            "rabi_41" => self.rabi_41 = num(key, value)?,
            "delta_31" => self.delta_31 = num(key, value)?,
            "delta_32" => self.delta_32 = num(key, value)?,
            "delta_41" => self.delta_41 = num(key, value)?,
            "gamma_31" => self.gamma_31 = num(key, value)?,
            "gamma_32" => self.gamma_32 = num(key, value)?,
            "gamma_41" => self.gamma_41 = num(key, value)?,
            "gamma_42" => self.gamma_42 = num(key, value)?,
            "phi_31" => self.phi_31 = num(key, value)?,
            "phi_32" => self.phi_32 = num(key, value)?,
            "step" => self.step = num(key, value)?,
            "t_end" => self.t_end = num(key, value)?,
            "sample_every" => {
                self.sample_every = value.parse().map_err(|_| {
                    Error::InvalidConfig(format!("sample_every: expected a positive integer, got {value:?}"))
                })?
            }
            "method" => {
                if value != "rk4" && value != "rk45" {
                    return Err(Error::InvalidConfig(format!("method must be rk4 or rk45, got {value:?}")));
                }
                self.method = value.to_string();
            }
            "rel_tol" => self.rel_tol = num(key, value)?,
            "abs_tol" => self.abs_tol = num(key, value)?,
            "steady_tol" => self.steady_tol = num(key, value)?,
            "initial_state" => self.initial_state = parse_initial_state(value)?,
            "omega_min" => self.omega_min = num(key, value)?,
            "omega_max" => self.omega_max = num(key, value)?,
            "omega_step" => self.omega_step = num(key, value)?,
            "delta_min" => self.delta_min = num(key, value)?,
            "delta_max" => self.delta_max = num(key, value)?,
            "delta_step" => self.delta_step = num(key, value)?,
            "out" => self.out = Some(value.to_string()),
            "format" => self.format = value.parse()?,
            other => {
                return Err(Error::InvalidConfig(format!("unknown key {other:?}")));
            }
        }
        Ok(())
    }

    /// Text form that [`parse`](RunConfig::parse) maps back to an identical
    /// configuration.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("rabi_31", fmt_f64(self.rabi_31));
        kv("rabi_32", fmt_f64(self.rabi_32));
        kv("rabi_41", fmt_f64(self.rabi_41));
        kv("delta_31", fmt_f64(self.delta_31));
        kv("delta_32", fmt_f64(self.delta_32));
        kv("delta_41", fmt_f64(self.delta_41));
        kv("gamma_31", fmt_f64(self.gamma_31));
        kv("gamma_32", fmt_f64(self.gamma_32));
        kv("gamma_41", fmt_f64(self.gamma_41));
        kv("gamma_42", fmt_f64(self.gamma_42));
        kv("phi_31", fmt_f64(self.phi_31));
        kv("phi_32", fmt_f64(self.phi_32));
        kv("step", fmt_f64(self.step));
        kv("t_end", fmt_f64(self.t_end));
        kv("sample_every", self.sample_every.to_string());
        kv("method", self.method.clone());
        kv("rel_tol", fmt_f64(self.rel_tol));
        kv("abs_tol", fmt_f64(self.abs_tol));
        kv("steady_tol", fmt_f64(self.steady_tol));
        kv("initial_state", serialize_initial_state(&self.initial_state));
        kv("omega_min", fmt_f64(self.omega_min));
        kv("omega_max", fmt_f64(self.omega_max));
        kv("omega_step", fmt_f64(self.omega_step));
        kv("delta_min", fmt_f64(self.delta_min));
        kv("delta_max", fmt_f64(self.delta_max));
        kv("delta_step", fmt_f64(self.delta_step));
        if let Some(out) = &self.out {
            kv("out", out.clone());
        }
        kv("format", self.format.as_str().to_string());
        s
    }
}

fn fmt_f64(x: f64) -> String {
    // shortest round-trippable decimal
    format!("{x}")
}

fn parse_initial_state(value: &str) -> Result<InitialState> {
    if let Ok(k) = value.parse::<usize>() {
        if (1..=4).contains(&k) {
            return Ok(InitialState::Bare(k));
        }
        return Err(Error::InvalidConfig(format!("initial_state level {k} out of 1..4")));
    }
    let entries: Vec<&str> = value.split(',').map(str::trim).collect();
    if entries.len() != 16 {
        return Err(Error::InvalidConfig(format!(
            "initial_state must be a level 1..4 or 16 comma-separated complex entries, got {} fields",
            entries.len()
        )));
    }
    let mut m = Matrix4c::zeros();
    for (n, e) in entries.iter().enumerate() {
        let z = C64::from_str(e).map_err(|_| {
            Error::InvalidConfig(format!("initial_state entry {}: bad complex number {e:?}", n + 1))
        })?;
        m[(n / 4, n % 4)] = z;
    }
    Ok(InitialState::Explicit(Box::new(m)))
}

fn serialize_initial_state(st: &InitialState) -> String {
    match st {
        InitialState::Bare(k) => k.to_string(),
        InitialState::Explicit(m) => {
            let mut parts = Vec::with_capacity(16);
            for i in 0..4 {
                for j in 0..4 {
                    let z = m[(i, j)];
                    parts.push(format!("{}{}{}i", z.re, if z.im < 0.0 { "" } else { "+" }, z.im));
                }
            }
            parts.join(",")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn parse_with_comments_and_blank_lines() {
        let cfg = RunConfig::parse(
            "# strong detuned run\nrabi_31 = 5.0\nrabi_32=5\nrabi_41 = 5 # inline note\n\ndelta_31 = 4\ndelta_32 = 4\ndelta_41 = 4\nt_end = 20\n",
        )
        .unwrap();
        assert_eq!(cfg.rabi_32, 5.0);
        assert_eq!(cfg.delta_41, 4.0);
        assert_eq!(cfg.t_end, 20.0);
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = RunConfig::parse("rabi_31 = 5\nrabii_32 = 5\n").unwrap_err();
        match err {
            Error::ConfigParse { line, msg } => {
                assert_eq!(line, 2);
                assert!(msg.contains("rabii_32"), "{msg}");
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn malformed_line_reports_line() {
        let err = RunConfig::parse("rabi_31 5\n").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 1, .. }));
    }

    #[test]
    fn bad_value_rejected() {
        assert!(RunConfig::parse("step = fast\n").is_err());
        assert!(RunConfig::parse("method = euler\n").is_err());
        assert!(RunConfig::parse("format = yaml\n").is_err());
        assert!(RunConfig::parse("initial_state = 7\n").is_err());
    }

    #[test]
    fn invalid_physics_rejected_after_parse() {
        assert!(RunConfig::parse("gamma_31 = -1\n").is_err());
        assert!(RunConfig::parse("step = 50\n").is_err()); // step >= t_end
    }

    #[test]
    fn round_trip_default() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::parse(&cfg.serialize()).unwrap(), cfg);
    }

    #[test]
    fn round_trip_explicit_matrix() {
        let text = "initial_state = 0.5+0i, 0+0.5i, 0+0i, 0+0i, 0-0.5i, 0.5+0i, 0+0i, 0+0i, 0+0i, 0+0i, 0+0i, 0+0i, 0+0i, 0+0i, 0+0i, 0+0i\nout = run.csv\nformat = json\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert!(matches!(cfg.initial_state, InitialState::Explicit(_)));
        assert_eq!(cfg.out.as_deref(), Some("run.csv"));
        assert_eq!(cfg.format, OutputFormat::Json);
        let again = RunConfig::parse(&cfg.serialize()).unwrap();
        assert_eq!(again, cfg);
        let rho = cfg.initial_state.density_matrix().unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn explicit_matrix_must_be_physical() {
        // non-Hermitian
        let text = "initial_state = 1+0i, 0.5+0i, 0+0i, 0+0i, 0+0i, 0+0i, 0+0i, 0+0i, 0+0i, 0+0i, 0+0i, 0+0i, 0+0i, 0+0i, 0+0i, 0+0i\n";
        assert!(RunConfig::parse(text).is_err());
    }

    #[test]
    fn last_assignment_wins() {
        let cfg = RunConfig::parse("t_end = 5\nt_end = 9\n").unwrap();
        assert_eq!(cfg.t_end, 9.0);
    }
}
