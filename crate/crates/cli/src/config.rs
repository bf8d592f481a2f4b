//! Run configuration: a flat TOML file, resolved against defaults.

use serde::{Deserialize, Serialize};
use xyrange::analysis::PLATEAU_CELL;
use xyrange::entanglement::ACTIVATION_EPS;
use xyrange::{Falloff, ModelSpec};

use crate::CliError;

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Keys as they appear in the file. Everything except `n` has a default.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub n: Option<usize>,
    pub z: Option<OneOrMany<usize>>,
    pub gamma: Option<OneOrMany<f64>>,
    pub falloff: Option<String>,
    pub alpha: Option<f64>,
    pub lambda: Option<OneOrMany<f64>>,
    pub lambda_start: Option<f64>,
    pub lambda_stop: Option<f64>,
    pub lambda_step: Option<f64>,
    pub beta_start: Option<f64>,
    pub beta_stop: Option<f64>,
    pub beta_step: Option<f64>,
    pub m: Option<usize>,
    pub m_protocol: Option<bool>,
    pub witness: Option<bool>,
    pub window: Option<f64>,
    pub eps: Option<f64>,
    pub plateau_cell: Option<f64>,
    pub precision: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

/// Fully resolved configuration. Its TOML form is stamped into every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub n: usize,
    pub z: Vec<usize>,
    pub gamma: Vec<f64>,
    pub falloff: String,
    pub alpha: f64,
    pub lambda: Vec<f64>,
    pub lambda_start: f64,
    pub lambda_stop: f64,
    pub lambda_step: f64,
    pub beta_start: f64,
    pub beta_stop: f64,
    pub beta_step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub m_protocol: bool,
    pub witness: bool,
    pub window: f64,
    pub eps: f64,
    pub plateau_cell: f64,
    pub precision: usize,
    pub seed: u64,
    #[serde(skip)]
    pub workers: Option<usize>,
}

pub const DEFAULT_SEED: u64 = 0x5eed;

/// Line of `key = …` in the source, for error messages.
fn line_of(source: &str, key: &str) -> Option<usize> {
    source.lines().position(|l| {
        let t = l.trim_start();
        t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
}

fn at(source: &str, key: &str, msg: impl std::fmt::Display) -> CliError {
    match line_of(source, key) {
        Some(i) => CliError::Config(format!("line {}: {key}: {msg}", i + 1)),
        None => CliError::Config(format!("{key}: {msg}")),
    }
}

/// Half-open grid `start, start + step, …` below `stop`, snapped to the step.
pub fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step - 1e-9).ceil().max(0.0) as usize;
    let digits = (-step.log10()).ceil().max(0.0) as i32 + 2;
    let scale = 10f64.powi(digits);
    (0..count).map(|k| ((start + k as f64 * step) * scale).round() / scale).collect()
}

impl RunConfig {
    pub fn parse(command: &str, source: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(source).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))?;
        let n = raw.n.ok_or_else(|| CliError::Config("missing required key n".into()))?;
        let falloff_name = raw.falloff.clone().unwrap_or_else(|| "exponential".into());
        let falloff: Falloff = falloff_name.parse().map_err(|e| at(source, "falloff", e))?;
        let alpha = raw.alpha.unwrap_or(match falloff {
            Falloff::Exponential => 2.0,
            Falloff::PowerLaw => 1.0,
        });
        let z = raw.z.map(OneOrMany::into_vec).unwrap_or_else(|| (1..=n / 2).collect());
        let cfg = RunConfig {
            command: command.to_string(),
            n,
            z,
            gamma: raw.gamma.map(OneOrMany::into_vec).unwrap_or_else(|| vec![0.5]),
            falloff: falloff.as_str().to_string(),
            alpha,
            lambda: raw.lambda.map(OneOrMany::into_vec).unwrap_or_default(),
            lambda_start: raw.lambda_start.unwrap_or(-3.0),
            lambda_stop: raw.lambda_stop.unwrap_or(3.0),
            lambda_step: raw.lambda_step.unwrap_or(0.01),
            beta_start: raw.beta_start.unwrap_or(0.0),
            beta_stop: raw.beta_stop.unwrap_or(5.0),
            beta_step: raw.beta_step.unwrap_or(0.01),
            m: raw.m,
            m_protocol: raw.m_protocol.unwrap_or(false),
            witness: raw.witness.unwrap_or(false),
            window: raw.window.unwrap_or(0.12),
            eps: raw.eps.unwrap_or(ACTIVATION_EPS),
            plateau_cell: raw.plateau_cell.unwrap_or(PLATEAU_CELL),
            precision: raw.precision.unwrap_or(9),
            seed: raw.seed.unwrap_or(DEFAULT_SEED),
            workers: raw.workers,
        };
        cfg.validate(source)?;
        Ok(cfg)
    }

    fn validate(&self, source: &str) -> Result<(), CliError> {
        if self.z.is_empty() {
            return Err(at(source, "z", "list is empty"));
        }
        if self.gamma.is_empty() {
            return Err(at(source, "gamma", "list is empty"));
        }
        for &z in &self.z {
            for &g in &self.gamma {
                ModelSpec::new(self.n, z, g, 0.0, self.falloff(), self.alpha).map_err(|e| {
                    let key = if z == 0 || z > self.n / 2 {
                        "z"
                    } else if !(0.0..=1.0).contains(&g) {
                        "gamma"
                    } else if e.to_string().contains("alpha") {
                        "alpha"
                    } else {
                        "n"
                    };
                    at(source, key, e)
                })?;
            }
        }
        for (key, step) in [("lambda_step", self.lambda_step), ("beta_step", self.beta_step)] {
            if !(step.is_finite() && step > 0.0) {
                return Err(at(source, key, format!("step must be positive, got {step}")));
            }
        }
        if !(self.lambda_start.is_finite() && self.lambda_stop.is_finite() && self.lambda_stop > self.lambda_start) {
            return Err(at(source, "lambda_stop", format!("empty field range [{}, {})", self.lambda_start, self.lambda_stop)));
        }
        if !(self.beta_start.is_finite() && self.beta_stop.is_finite() && self.beta_stop > self.beta_start && self.beta_start >= 0.0) {
            return Err(at(source, "beta_stop", format!("empty inverse-temperature range [{}, {})", self.beta_start, self.beta_stop)));
        }
        if self.lambda.iter().any(|l| !l.is_finite()) {
            return Err(at(source, "lambda", "values must be finite"));
        }
        if self.m == Some(0) {
            return Err(at(source, "m", "truncation must keep at least one level"));
        }
        if !(self.window.is_finite() && self.window > 0.0) {
            return Err(at(source, "window", "must be positive"));
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return Err(at(source, "eps", "must be nonnegative"));
        }
        if !(self.plateau_cell.is_finite() && self.plateau_cell > 0.0) {
            return Err(at(source, "plateau_cell", "must be positive"));
        }
        if !(6..=17).contains(&self.precision) {
            return Err(at(source, "precision", format!("must be between 6 and 17 digits, got {}", self.precision)));
        }
        if self.workers == Some(0) {
            return Err(at(source, "workers", "must be at least 1"));
        }
        Ok(())
    }

    pub fn falloff(&self) -> Falloff {
        self.falloff.parse().expect("validated")
    }

    pub fn spec(&self, z: usize, gamma: f64, lambda: f64) -> Result<ModelSpec, CliError> {
        Ok(ModelSpec::new(self.n, z, gamma, lambda, self.falloff(), self.alpha)?)
    }

    pub fn lambda_grid(&self) -> Vec<f64> {
        grid(self.lambda_start, self.lambda_stop, self.lambda_step)
    }

    pub fn beta_grid(&self) -> Vec<f64> {
        grid(self.beta_start, self.beta_stop, self.beta_step)
    }

    /// Fixed fields for `thermal` and `length`.
    pub fn fixed_lambdas(&self) -> Result<Vec<f64>, CliError> {
        if self.lambda.is_empty() {
            return Err(CliError::Config(format!("{} needs a lambda value or list", self.command)));
        }
        Ok(self.lambda.clone())
    }

    pub fn stamp(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_open_grid() {
        let g = grid(-3.0, 3.0, 0.01);
        assert_eq!(g.len(), 600);
        assert_eq!(g[0], -3.0);
        assert_eq!(g[599], 2.99);
        assert_eq!(grid(0.0, 1.0, 0.25), vec![0.0, 0.25, 0.5, 0.75]);
    }

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::parse("profile", "n = 8\n").unwrap();
        assert_eq!(c.z, vec![1, 2, 3, 4]);
        assert_eq!(c.alpha, 2.0);
        assert_eq!(c.precision, 9);
    }

    #[test]
    fn errors_point_at_the_line() {
        let e = RunConfig::parse("profile", "n = 8\n\ngamma = 1.5\n").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = RunConfig::parse("profile", "n = 8\nlambda_start = 1.0\nlambda_stop = 1.0\n").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = RunConfig::parse("profile", "n = 8\nbogus = 1\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn power_law_defaults_to_unit_exponent() {
        let c = RunConfig::parse("profile", "n = 8\nfalloff = \"power\"\nz = 2\n").unwrap();
        assert_eq!((c.alpha, c.z.clone()), (1.0, vec![2]));
    }
}
