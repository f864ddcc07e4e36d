use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::{Claim, TrialPlan};
use crate::error::{Error, Result};
use crate::ingest::{read_population, WeightFormat};
use crate::item::Population;

/// Deterministic weight vectors for experiments.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// `n` unit weights.
    Uniform { n: usize },
    /// `w_i = ratio^i` for `i < n`.
    Geometric { n: usize, ratio: f64 },
    /// `w_i = (i + 1)^(-exponent)` for `i < n`.
    Zipf { n: usize, exponent: f64 },
}

impl Generator {
    pub fn weights(&self) -> Vec<f64> {
        match *self {
            Generator::Uniform { n } => vec![1.0; n],
            Generator::Geometric { n, ratio } => (0..n).map(|i| ratio.powi(i as i32)).collect(),
            Generator::Zipf { n, exponent } => {
                (0..n).map(|i| ((i + 1) as f64).powf(-exponent)).collect()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match *self {
            Generator::Uniform { n } | Generator::Geometric { n, .. } | Generator::Zipf { n, .. }
                if n == 0 =>
            {
                bad("generator needs n >= 1".into())
            }
            Generator::Geometric { ratio, .. } if !(ratio > 0.0 && ratio <= 1.0) => {
                bad(format!("geometric ratio must lie in (0, 1], got {ratio}"))
            }
            Generator::Zipf { exponent, .. } if !(exponent > 0.0 && exponent.is_finite()) => {
                bad(format!("zipf exponent must be positive, got {exponent}"))
            }
            _ => Ok(()),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    /// Parses `uniform:N`, `geometric:N[:RATIO]` (ratio defaults to 0.5) or
    /// `zipf:N[:EXPONENT]` (exponent defaults to 1).
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let int = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::Config(format!("invalid size '{v}' in generator '{s}'")))
        };
        let real = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("invalid parameter '{v}' in generator '{s}'")))
        };
        let g = match parts.as_slice() {
            ["uniform", n] => Generator::Uniform { n: int(n)? },
            ["geometric", n] => Generator::Geometric { n: int(n)?, ratio: 0.5 },
            ["geometric", n, r] => Generator::Geometric {
                n: int(n)?,
                ratio: real(r)?,
            },
            ["zipf", n] => Generator::Zipf {
                n: int(n)?,
                exponent: 1.0,
            },
            ["zipf", n, e] => Generator::Zipf {
                n: int(n)?,
                exponent: real(e)?,
            },
            _ => return Err(Error::Config(format!("unrecognized generator '{s}'"))),
        };
        g.validate()?;
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSource {
    File { path: PathBuf, format: String },
    Generator(Generator),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub source: WeightSource,
    pub k: usize,
    pub trials: u64,
    pub seed: u64,
    pub claims: Vec<Claim>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn plan(&self) -> TrialPlan {
        TrialPlan::new(self.trials, self.seed, self.k)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 2 {
            return Err(Error::Config(format!(
                "trials must be at least 2, got {}",
                self.trials
            )));
        }
        if self.claims.is_empty() {
            return Err(Error::Config("no claims selected".into()));
        }
        if let WeightSource::Generator(g) = &self.source {
            g.validate()?;
        }
        Ok(())
    }

    pub fn population(&self) -> Result<Population> {
        match &self.source {
            WeightSource::Generator(g) => Population::from_weights(&g.weights()),
            WeightSource::File { path, format } => {
                let file = File::open(path)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                read_population(BufReader::new(file), format.parse::<WeightFormat>()?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators() {
        let g: Generator = "geometric:4".parse().unwrap();
        assert_eq!(g.weights(), vec![1.0, 0.5, 0.25, 0.125]);
        let z: Generator = "zipf:3:2".parse().unwrap();
        assert_eq!(z.weights(), vec![1.0, 0.25, 1.0 / 9.0]);
        assert_eq!("uniform:3".parse::<Generator>().unwrap().weights(), vec![1.0; 3]);
        for bad in ["uniform:0", "geometric:4:1.5", "geometric:4:0", "zipf:3:-1", "normal:3"] {
            assert!(bad.parse::<Generator>().is_err(), "{bad}");
        }
    }

    #[test]
    fn config_rejects_single_trial() {
        let cfg = ExperimentConfig {
            source: WeightSource::Generator(Generator::Uniform { n: 4 }),
            k: 2,
            trials: 1,
            seed: 0,
            claims: Claim::ALL.to_vec(),
            out: None,
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
