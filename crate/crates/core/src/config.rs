//! Run configuration: a flat `key = value` file plus command-line overrides.
//!
//! ```text
//! # benchmark
//! problem = known_boundary_layer
//! theta = 0.5
//! eta_stop = 1e-3
//! dof_stop = 100000
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! rejected.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    /// Maximum-marking threshold in `(0, 1]`.
    pub theta: f64,
    pub eta_stop: f64,
    pub dof_stop: usize,
    /// Cap on nonlinear iterations plus rejections per mesh.
    pub max_iters: usize,
    pub nonlinear_tol_scale: f64,
    pub quad_degree: usize,
    pub out_dir: PathBuf,
    /// Uniform refinements of the initial mesh before the first solve.
    pub initial_refinements: usize,
    /// Uniformly refined steps before adaptive marking starts.
    pub uniform_steps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: "known_boundary_layer".into(),
            theta: 0.5,
            eta_stop: 1e-3,
            dof_stop: 100_000,
            max_iters: 10_000,
            nonlinear_tol_scale: 1e-8,
            quad_degree: crate::assembly::DEFAULT_QUAD_DEGREE,
            out_dir: PathBuf::from("out"),
            initial_refinements: 2,
            uniform_steps: 2,
        }
    }
}

pub const KEYS: &[&str] = &[
    "problem",
    "theta",
    "eta_stop",
    "dof_stop",
    "max_iters",
    "nonlinear_tol_scale",
    "quad_degree",
    "out_dir",
    "initial_refinements",
    "uniform_steps",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value for {key}: {value:?}")))
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        self.validate()
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got {kv:?}")))?;
        self.set(key.trim(), value.trim())?;
        self.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "problem" => self.problem = value.to_string(),
            "theta" => self.theta = parse_value(key, value)?,
            "eta_stop" => self.eta_stop = parse_value(key, value)?,
            "dof_stop" => self.dof_stop = parse_value(key, value)?,
            "max_iters" => self.max_iters = parse_value(key, value)?,
            "nonlinear_tol_scale" => self.nonlinear_tol_scale = parse_value(key, value)?,
            "quad_degree" => self.quad_degree = parse_value(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "initial_refinements" => self.initial_refinements = parse_value(key, value)?,
            "uniform_steps" => self.uniform_steps = parse_value(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::Config(format!(
                "theta must lie in (0, 1], got {}",
                self.theta
            )));
        }
        if !(self.eta_stop > 0.0) {
            return Err(Error::Config(format!(
                "eta_stop must be positive, got {}",
                self.eta_stop
            )));
        }
        if self.dof_stop < 1 {
            return Err(Error::Config("dof_stop must be at least 1".into()));
        }
        if !(self.nonlinear_tol_scale > 0.0) {
            return Err(Error::Config("nonlinear_tol_scale must be positive".into()));
        }
        if self.quad_degree == 0 {
            return Err(Error::Config("quad_degree must be at least 1".into()));
        }
        Ok(())
    }

    /// `key = value` lines that parse back to `self`.
    pub fn to_text(&self) -> String {
        format!(
            "problem = {}\ntheta = {:e}\neta_stop = {:e}\ndof_stop = {}\nmax_iters = {}\n\
             nonlinear_tol_scale = {:e}\nquad_degree = {}\nout_dir = {}\n\
             initial_refinements = {}\nuniform_steps = {}\n",
            self.problem,
            self.theta,
            self.eta_stop,
            self.dof_stop,
            self.max_iters,
            self.nonlinear_tol_scale,
            self.quad_degree,
            self.out_dir.display(),
            self.initial_refinements,
            self.uniform_steps,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let cfg = RunConfig::parse("# comment\n\nproblem = dmp_test\ntheta=0.3\n dof_stop = 500 \n").unwrap();
        assert_eq!(cfg.problem, "dmp_test");
        assert_eq!(cfg.theta, 0.3);
        assert_eq!(cfg.dof_stop, 500);
        assert_eq!(cfg.eta_stop, 1e-3);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(matches!(RunConfig::parse("colour = red"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("theta"), Err(Error::Config(_))));
        assert!(matches!(
            RunConfig::parse("dof_stop = many"),
            Err(Error::Config(_))
        ));
        assert!(matches!(RunConfig::parse("theta = 0"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("eta_stop = -1"), Err(Error::Config(_))));
    }

    #[test]
    fn overrides() {
        let mut cfg = RunConfig::default();
        cfg.apply_override("dof_stop=300").unwrap();
        assert_eq!(cfg.dof_stop, 300);
        assert!(cfg.apply_override("nope=1").is_err());
    }

    #[test]
    fn text_round_trip() {
        let cfg = RunConfig {
            theta: 0.25,
            eta_stop: 3.5e-4,
            out_dir: "results/a".into(),
            ..Default::default()
        };
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
        for key in KEYS {
            assert!(cfg.to_text().contains(&format!("{key} =")));
        }
    }
}
