//! Solver configuration, range validation and the `key = value` file format.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    /// Memory gradient direction with the max-type nonmonotone Armijo search.
    #[serde(rename = "max", alias = "max_type")]
    MaxType,
    /// Memory gradient direction with the average-type nonmonotone Armijo search.
    #[serde(rename = "avg", alias = "average_type")]
    AverageType,
    /// Memory gradient direction with the monotone Armijo search (window of one).
    #[serde(rename = "monotone", alias = "monotone_baseline")]
    MonotoneBaseline,
    /// `d_k = gamma * v(x_k)` with the monotone Armijo search.
    #[serde(rename = "sd", alias = "steepest_descent")]
    SteepestDescent,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::MaxType,
        Algorithm::AverageType,
        Algorithm::MonotoneBaseline,
        Algorithm::SteepestDescent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::MaxType => "max",
            Algorithm::AverageType => "avg",
            Algorithm::MonotoneBaseline => "monotone",
            Algorithm::SteepestDescent => "sd",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "max" | "max_type" | "maxtype" => Ok(Algorithm::MaxType),
            "avg" | "average" | "average_type" | "averagetype" => Ok(Algorithm::AverageType),
            "monotone" | "monotone_baseline" | "monotonebaseline" => {
                Ok(Algorithm::MonotoneBaseline)
            }
            "sd" | "steepest" | "steepest_descent" | "steepestdescent" => {
                Ok(Algorithm::SteepestDescent)
            }
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

/// How `eta_k` is picked from `[eta_min, eta_max]` by the average-type search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaSchedule {
    Max,
    Min,
}

impl FromStr for EtaSchedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "max" => Ok(EtaSchedule::Max),
            "min" => Ok(EtaSchedule::Min),
            other => Err(format!("unknown eta schedule `{other}`")),
        }
    }
}

/// Deliberate defects used to prove the invariant audit catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    FlipBetaSign,
}

/// All solver parameters. Real-valued fields are kept in `f64` and converted
/// to the run's scalar type when a run starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Memory depth `N`.
    pub memory: usize,
    /// Constant `gamma_k = gamma`.
    pub gamma: f64,
    pub eps_crit: f64,
    pub max_iter: usize,
    pub max_ls_trials: usize,
    /// Initial step interval `[lambda1, lambda2]` of the max-type search.
    pub lambda1: f64,
    pub lambda2: f64,
    /// Backtracking factor interval `[lambda3, lambda4]` of the max-type search.
    pub lambda3: f64,
    pub lambda4: f64,
    pub rho: f64,
    /// Window parameter `M` of the max-type search.
    pub window: usize,
    pub delta: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_schedule: EtaSchedule,
    /// Multiplier `mu > 1` on the lower bound for `phi_kj`.
    pub phi_margin: f64,
    /// Positive floor for `phi_kj`.
    pub phi_floor: f64,
    pub dual_tol: f64,
    pub dual_max_iter: usize,
    pub rng_seed: u64,
    /// Allows `eta_max = 1` (pure averaging).
    pub unsafe_eta: bool,
    /// Retry a failed line search once along `gamma * v(x_k)`.
    pub restart_on_failure: bool,
    /// Forces every memory weight to zero while still filling the memory.
    pub zero_beta: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<Fault>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::AverageType,
            memory: 5,
            gamma: 1.0,
            eps_crit: 1e-6,
            max_iter: 2000,
            max_ls_trials: 100,
            lambda1: 1.0,
            lambda2: 1.0,
            lambda3: 0.5,
            lambda4: 0.5,
            rho: 1e-4,
            window: 10,
            delta: 0.5,
            eta_min: 0.0,
            eta_max: 0.85,
            eta_schedule: EtaSchedule::Max,
            phi_margin: 2.0,
            phi_floor: 1e-12,
            dual_tol: 1e-10,
            dual_max_iter: 10_000,
            rng_seed: 0,
            unsafe_eta: false,
            restart_on_failure: false,
            zero_beta: false,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{field} violates {constraint}")]
pub struct RangeViolation {
    pub field: &'static str,
    pub constraint: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ConfigErrors(pub Vec<RangeViolation>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid configuration: ")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigParseError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {msg}")]
    BadValue {
        line: usize,
        key: String,
        msg: String,
    },
}

impl SolverConfig {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }

    /// Returns the configuration unchanged when every parameter range holds,
    /// otherwise the full list of violations.
    pub fn validate(self) -> Result<Self, ConfigErrors> {
        let mut bad = Vec::new();
        let mut check = |ok: bool, field, constraint| {
            if !ok {
                bad.push(RangeViolation { field, constraint });
            }
        };
        let open_unit = |v: f64| v > 0.0 && v < 1.0;

        check(
            self.lambda1 > 0.0 && self.lambda1.is_finite(),
            "lambda1",
            "> 0",
        );
        check(
            self.lambda1 <= self.lambda2 && self.lambda2.is_finite(),
            "lambda1",
            "<= lambda2",
        );
        check(self.lambda3 > 0.0, "lambda3", "> 0");
        check(self.lambda3 <= self.lambda4, "lambda3", "<= lambda4");
        check(self.lambda4 <= 1.0, "lambda4", "<= 1");
        check(open_unit(self.rho), "rho", "in (0,1)");
        check(open_unit(self.delta), "delta", "in (0,1)");
        check(self.eta_min >= 0.0, "eta_min", ">= 0");
        check(self.eta_min <= self.eta_max, "eta_min", "<= eta_max");
        if self.unsafe_eta {
            check(self.eta_max <= 1.0, "eta_max", "<= 1");
        } else {
            check(self.eta_max < 1.0, "eta_max", "< 1");
        }
        check(self.gamma > 0.0 && self.gamma.is_finite(), "gamma", "> 0");
        check(
            self.eps_crit >= 0.0 && self.eps_crit.is_finite(),
            "eps_crit",
            ">= 0",
        );
        check(
            self.phi_margin > 1.0 && self.phi_margin.is_finite(),
            "phi_margin",
            "> 1",
        );
        check(
            self.phi_floor > 0.0 && self.phi_floor.is_finite(),
            "phi_floor",
            "> 0",
        );
        check(self.dual_tol > 0.0, "dual_tol", "> 0");
        check(self.dual_max_iter >= 1, "dual_max_iter", ">= 1");
        check(self.max_ls_trials >= 1, "max_ls_trials", ">= 1");

        if bad.is_empty() {
            Ok(self)
        } else {
            Err(ConfigErrors(bad))
        }
    }

    /// Sets one parameter from its textual form. Keys match the config file.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<V: FromStr>(v: &str) -> Result<V, String>
        where
            V::Err: fmt::Display,
        {
            v.parse::<V>().map_err(|e| e.to_string())
        }
        fn flag(v: &str) -> Result<bool, String> {
            match v.to_ascii_lowercase().as_str() {
                "1" | "true" | "yes" | "on" => Ok(true),
                "0" | "false" | "no" | "off" => Ok(false),
                other => Err(format!("expected a boolean, got `{other}`")),
            }
        }
        match key {
            "algorithm" | "algo" => self.algorithm = value.parse()?,
            "N" | "memory" => self.memory = num(value)?,
            "M" | "window" => self.window = num(value)?,
            "gamma" => self.gamma = num(value)?,
            "eps_crit" => self.eps_crit = num(value)?,
            "max_iter" => self.max_iter = num(value)?,
            "max_ls_trials" => self.max_ls_trials = num(value)?,
            "lambda1" => self.lambda1 = num(value)?,
            "lambda2" => self.lambda2 = num(value)?,
            "lambda3" => self.lambda3 = num(value)?,
            "lambda4" => self.lambda4 = num(value)?,
            "rho" => self.rho = num(value)?,
            "delta" => self.delta = num(value)?,
            "eta_min" => self.eta_min = num(value)?,
            "eta_max" => self.eta_max = num(value)?,
            "eta_schedule" => self.eta_schedule = value.parse()?,
            "phi_margin" => self.phi_margin = num(value)?,
            "phi_floor" => self.phi_floor = num(value)?,
            "dual_tol" => self.dual_tol = num(value)?,
            "dual_max_iter" => self.dual_max_iter = num(value)?,
            "seed" | "rng_seed" => self.rng_seed = num(value)?,
            "unsafe_eta" => self.unsafe_eta = flag(value)?,
            "restart_on_failure" => self.restart_on_failure = flag(value)?,
            "zero_beta" => self.zero_beta = flag(value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Applies a `key = value` document on top of `self`. `#` starts a comment.
    pub fn apply_kv(&mut self, text: &str) -> Result<(), ConfigParseError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or(ConfigParseError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigParseError::Syntax { line });
            }
            self.set(key, value).map_err(|msg| {
                if msg.starts_with("unknown key") {
                    ConfigParseError::UnknownKey {
                        line,
                        key: key.to_string(),
                    }
                } else {
                    ConfigParseError::BadValue {
                        line,
                        key: key.to_string(),
                        msg,
                    }
                }
            })?;
        }
        Ok(())
    }

    pub fn from_kv_str(text: &str) -> Result<Self, ConfigParseError> {
        let mut cfg = Self::default();
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    /// Window used by the max-type search; the monotone variants pin it to zero.
    pub fn effective_window(&self) -> usize {
        match self.algorithm {
            Algorithm::MaxType => self.window,
            _ => 0,
        }
    }

    /// Memory depth after the baseline reductions are applied.
    pub fn effective_memory(&self) -> usize {
        match self.algorithm {
            Algorithm::SteepestDescent => 0,
            _ => self.memory,
        }
    }

    pub fn eta(&self) -> f64 {
        match self.eta_schedule {
            EtaSchedule::Max => self.eta_max,
            EtaSchedule::Min => self.eta_min,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = SolverConfig {
            rho: 0.5,
            delta: 0.5,
            eta_min: 0.0,
            eta_max: 0.85,
            ..SolverConfig::default()
        };
        assert!(cfg.validate().is_ok());
        assert!(SolverConfig::default().validate().is_ok());
    }

    #[test]
    fn rho_boundary_rejected() {
        let err = SolverConfig {
            rho: 1.0,
            ..SolverConfig::default()
        }
        .validate()
        .unwrap_err();
        assert_eq!(
            err.0,
            vec![RangeViolation {
                field: "rho",
                constraint: "in (0,1)"
            }]
        );
    }

    #[test]
    fn shrink_interval_ordering() {
        let err = SolverConfig {
            lambda3: 0.6,
            lambda4: 0.5,
            ..SolverConfig::default()
        }
        .validate()
        .unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].field, "lambda3");
        assert_eq!(err.0[0].constraint, "<= lambda4");
    }

    #[test]
    fn reports_every_violation() {
        let err = SolverConfig {
            rho: 0.0,
            delta: 1.5,
            gamma: -1.0,
            eta_max: 1.0,
            ..SolverConfig::default()
        }
        .validate()
        .unwrap_err();
        let fields: Vec<_> = err.0.iter().map(|v| v.field).collect();
        assert_eq!(fields, vec!["rho", "delta", "eta_max", "gamma"]);
    }

    #[test]
    fn unit_eta_needs_unsafe_flag() {
        let cfg = SolverConfig {
            eta_min: 1.0,
            eta_max: 1.0,
            ..SolverConfig::default()
        };
        assert!(cfg.clone().validate().is_err());
        assert!(SolverConfig {
            unsafe_eta: true,
            ..cfg
        }
        .validate()
        .is_ok());
    }

    #[test]
    fn kv_file_parses_with_comments() {
        let text = "# nonmonotone setup\nalgorithm = max\nM = 3  # window\nrho=0.001\n\nunsafe_eta = false\n";
        let cfg = SolverConfig::from_kv_str(text).unwrap();
        assert_eq!(cfg.algorithm, Algorithm::MaxType);
        assert_eq!(cfg.window, 3);
        assert_eq!(cfg.rho, 0.001);
    }

    #[test]
    fn kv_file_errors_carry_line_numbers() {
        assert_eq!(
            SolverConfig::from_kv_str("rho = 0.1\nbogus = 1\n").unwrap_err(),
            ConfigParseError::UnknownKey {
                line: 2,
                key: "bogus".into()
            }
        );
        assert_eq!(
            SolverConfig::from_kv_str("no equals sign").unwrap_err(),
            ConfigParseError::Syntax { line: 1 }
        );
        assert!(matches!(
            SolverConfig::from_kv_str("delta = abc").unwrap_err(),
            ConfigParseError::BadValue { line: 1, .. }
        ));
    }
}
