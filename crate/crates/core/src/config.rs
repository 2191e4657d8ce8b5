//! Run configuration: a flat `key = value` text format, CLI-style overrides,
//! and validation of the parameter ranges the simulation relies on.

use std::path::Path;

use thiserror::Error;

use crate::pheromone::DepositionParams;
use crate::robot::{DepositFalloff, DynamicsParams, Radii};
use crate::strategy::{StrategyKind, StrategyParams, DEFAULT_EPSILON};
use crate::vibit::CostModel;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    /// Per-robot maps, gossip dissemination, random asynchronous activation.
    Decentralized,
    /// One shared map, all robots stepped in lockstep each global step.
    Centralized,
}

/// Which strategy each robot runs.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StrategySpec {
    Uniform(StrategyKind),
    /// First two thirds of the robots (rounded up) run InertialProb, the
    /// rest Deterministic.
    Heterogeneous,
}

/// Strategy assigned to robot `id` out of `n` under a spec.
pub fn strategy_for(spec: StrategySpec, id: usize, n: usize) -> StrategyKind {
    match spec {
        StrategySpec::Uniform(kind) => kind,
        StrategySpec::Heterogeneous => {
            let inertial = (2 * n).div_ceil(3);
            if id < inertial {
                StrategyKind::InertialProb
            } else {
                StrategyKind::Deterministic
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {0}: expected 'key = value'")]
    Syntax(usize),
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("invalid override {0:?}: expected 'key=value'")]
    BadOverride(String),
    #[error("{0}")]
    Invalid(String),
    #[error("failed to read config file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    /// Path of the map file.
    pub environment: String,
    /// Number of robots.
    pub robots: usize,
    /// Cycles each robot runs (decentralized) or global steps (centralized).
    pub steps: u64,
    /// Evaporation fraction per update, in (0, 1].
    pub beta: f64,
    pub psi_max: f64,
    pub alpha: f64,
    pub delta: f64,
    pub eta: f64,
    pub mu: f64,
    pub nu: f64,
    pub r_v: f64,
    pub r_d: f64,
    pub r_t: f64,
    pub strategy: StrategySpec,
    pub g_d: u64,
    pub mode: Mode,
    pub seed: u64,
    pub header_bytes: u64,
    pub per_cell_bytes: u64,
    pub deposit_falloff: DepositFalloff,
    /// Record one row per broadcast in the run result. Not a file key.
    pub comm_log: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            environment: String::new(),
            robots: 3,
            steps: 10_000,
            beta: 0.005,
            psi_max: 100.0,
            alpha: 0.5,
            delta: 0.1,
            eta: 2.0,
            mu: 0.3,
            nu: 0.3,
            r_v: 6.0,
            r_d: 6.0,
            r_t: 13.0,
            strategy: StrategySpec::Heterogeneous,
            g_d: 1,
            mode: Mode::Decentralized,
            seed: 0,
            header_bytes: 12,
            per_cell_bytes: 8,
            deposit_falloff: DepositFalloff::Distance,
            comm_log: false,
        }
    }
}

impl SimConfig {
    /// Parses the flat `key = value` format; `#` starts a comment and blank
    /// lines are ignored. Unlisted keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = SimConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax(i + 1))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| ConfigError::BadOverride(spec.to_string()))?;
        self.set(key.trim(), value.trim())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn bad(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
            ConfigError::InvalidValue {
                key: key.to_string(),
                value: value.to_string(),
                reason: reason.into(),
            }
        }
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value.parse().map_err(|_| bad(key, value, "not a number"))
        }
        match key {
            "environment" => self.environment = value.to_string(),
            "robots" => self.robots = num(key, value)?,
            "steps" => self.steps = num(key, value)?,
            "beta" => self.beta = num(key, value)?,
            "psi_max" => self.psi_max = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "eta" => self.eta = num(key, value)?,
            "mu" => self.mu = num(key, value)?,
            "nu" => self.nu = num(key, value)?,
            "r_v" => self.r_v = num(key, value)?,
            "r_d" => self.r_d = num(key, value)?,
            "r_t" => self.r_t = num(key, value)?,
            "g_d" => self.g_d = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "header_bytes" => self.header_bytes = num(key, value)?,
            "per_cell_bytes" => self.per_cell_bytes = num(key, value)?,
            "strategy" => {
                self.strategy = match value {
                    "random" => StrategySpec::Uniform(StrategyKind::Random),
                    "deterministic" => StrategySpec::Uniform(StrategyKind::Deterministic),
                    "simple" => StrategySpec::Uniform(StrategyKind::SimpleProb),
                    "elitist" => StrategySpec::Uniform(StrategyKind::ElitistProb),
                    "inertial" => StrategySpec::Uniform(StrategyKind::InertialProb),
                    "heterogeneous" => StrategySpec::Heterogeneous,
                    _ => {
                        return Err(bad(
                            key,
                            value,
                            "expected one of random, deterministic, simple, elitist, \
                             inertial, heterogeneous",
                        ))
                    }
                }
            }
            "mode" => {
                self.mode = match value {
                    "decentralized" => Mode::Decentralized,
                    "centralized" => Mode::Centralized,
                    _ => return Err(bad(key, value, "expected decentralized or centralized")),
                }
            }
            "deposit_falloff" => {
                self.deposit_falloff = match value {
                    "distance" => DepositFalloff::Distance,
                    "flat" => DepositFalloff::Flat,
                    _ => return Err(bad(key, value, "expected distance or flat")),
                }
            }
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::Invalid(msg.to_string()))
            }
        };
        check(self.robots >= 1, "robots must be at least 1")?;
        check(
            self.beta > 0.0 && self.beta <= 1.0,
            "beta must lie in (0, 1]",
        )?;
        check(self.psi_max > 0.0, "psi_max must be positive")?;
        check(
            self.alpha > 0.0 && self.alpha <= 1.0,
            "alpha must lie in (0, 1]",
        )?;
        check(
            self.delta > 0.0 && self.delta <= 1.0,
            "delta must lie in (0, 1]",
        )?;
        check(self.eta > 0.0, "eta must be positive")?;
        check(self.mu > 0.0 && self.mu <= 1.0, "mu must lie in (0, 1]")?;
        check(self.nu > 0.0 && self.nu <= 1.0, "nu must lie in (0, 1]")?;
        check(self.r_v >= 1.0, "r_v must be at least 1")?;
        check(self.r_d >= self.r_v, "r_d must be at least r_v")?;
        check(self.r_t >= 0.0, "r_t must be nonnegative")?;
        check(self.g_d >= 1, "g_d must be at least 1")?;
        Ok(())
    }

    pub fn deposition(&self) -> DepositionParams {
        DepositionParams {
            psi_max: self.psi_max,
            alpha: self.alpha,
            delta: self.delta,
            eta: self.eta,
        }
    }

    pub fn strategy_params(&self) -> StrategyParams {
        StrategyParams {
            mu: self.mu,
            nu: self.nu,
            epsilon: DEFAULT_EPSILON,
            psi_max: self.psi_max,
        }
    }

    pub fn radii(&self) -> Radii {
        Radii {
            r_v: self.r_v,
            r_d: self.r_d,
            r_t: self.r_t,
        }
    }

    pub fn cost(&self) -> CostModel {
        CostModel {
            header_bytes: self.header_bytes,
            per_cell_bytes: self.per_cell_bytes,
        }
    }

    pub fn dynamics(&self) -> DynamicsParams {
        DynamicsParams {
            beta: self.beta,
            deposition: self.deposition(),
            falloff: self.deposit_falloff,
            g_d: self.g_d,
            cost: self.cost(),
        }
    }
}
