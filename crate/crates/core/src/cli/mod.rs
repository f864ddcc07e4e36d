//! Command-line front end: build sketches, answer subset-sum queries, count
//! distinct lines and run claim-checking experiments.
//!
//! Structured output is JSON on stdout (or `--out`); human summaries go to
//! stderr. Exit codes: 0 success, 1 claim failure, 2 input or usage error.

mod experiment;
mod subset;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use experiment::{ExperimentConfig, Generator, WeightSource};
pub use subset::SubsetSpec;

use crate::analysis::{check_claims, check_claims_feasible, Claim, ClaimReport};
use crate::distinct::KmvSketch;
use crate::error::{Error, Result};
use crate::ingest::{read_population, WeightFormat};
use crate::item::{draw_ranks, Population};
use crate::priority::PrioritySketch;
use crate::rng::SeedSpec;
use crate::threshold::{expected_sample_count, threshold_for_budget, ThresholdSketch};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CLAIM_FAILURE: u8 = 1;
pub const EXIT_INPUT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "subset-sketch", version, about = "Weighted sampling sketches for subset-sum estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Threshold,
    Priority,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

impl From<Format> for WeightFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => WeightFormat::Csv,
            Format::Jsonl => WeightFormat::Jsonl,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a threshold or priority sketch from a weight file.
    Sample {
        #[arg(long, value_enum)]
        method: Method,
        /// Weight file, or `-` for stdin.
        #[arg(long, default_value = "-")]
        input: PathBuf,
        /// Input format; guessed from the file extension when omitted.
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Sample size (priority) or expected sample size (threshold).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Explicit threshold for `--method threshold`, overriding k / W.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate a subset sum from a sketch file.
    Estimate {
        #[arg(long)]
        sketch: PathBuf,
        /// `all`, `list:3,5,8`, `range:0:99` or `mod:2:1`.
        #[arg(long, default_value = "all")]
        subset: String,
    },
    /// Check priority sampling's statistical claims by Monte Carlo.
    Experiment {
        /// Weight file; mutually exclusive with --generator.
        #[arg(long, conflicts_with = "generator")]
        weights: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// `uniform:N`, `geometric:N[:RATIO]` or `zipf:N[:EXPONENT]`.
        #[arg(long)]
        generator: Option<String>,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated claim keys; all claims when omitted.
        #[arg(long, value_delimiter = ',')]
        claims: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the number of distinct lines in a stream.
    Distinct {
        /// Line-oriented input, or `-` for stdin.
        #[arg(long, default_value = "-")]
        input: PathBuf,
        #[arg(long, default_value_t = 256)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        hash_seed: u64,
    },
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    let stdin = io::stdin();
    let code = run(
        std::env::args_os(),
        &mut stdin.lock(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    ExitCode::from(code)
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run(
    args: impl IntoIterator<Item = impl Into<OsString> + Clone>,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code() as u8;
            let rendered = e.render();
            let _ = if code == 0 {
                write!(stdout, "{rendered}")
            } else {
                write!(stderr, "{}", rendered.ansi())
            };
            return code;
        }
    };
    match dispatch(cli.command, stdin, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INPUT_ERROR
        }
    }
}

fn dispatch(
    command: Command,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<u8> {
    match command {
        Command::Sample {
            method,
            input,
            format,
            k,
            seed,
            tau,
            out,
        } => {
            let format = format.map_or_else(|| WeightFormat::from_path(&input), Into::into);
            let population = with_input(&input, stdin, |r| read_population(r, format))?;
            let sample = cmd_sample(method, &population, k as usize, SeedSpec(seed), tau)?;
            emit(&sample.json, out.as_deref(), stdout)?;
            writeln!(stderr, "{}", sample.summary)?;
            Ok(EXIT_OK)
        }
        Command::Estimate { sketch, subset } => {
            let subset: SubsetSpec = subset.parse()?;
            let text = fs::read_to_string(&sketch)
                .map_err(|e| Error::Io(format!("{}: {e}", sketch.display())))?;
            let estimate = cmd_estimate(&text, &subset)?;
            writeln!(stdout, "{}", serde_json::json!({ "estimate": estimate }))?;
            Ok(EXIT_OK)
        }
        Command::Experiment {
            weights,
            format,
            generator,
            k,
            trials,
            seed,
            claims,
            out,
        } => {
            let source = match (weights, generator) {
                (Some(path), None) => {
                    let format = format.map_or_else(|| WeightFormat::from_path(&path), Into::into);
                    WeightSource::File {
                        path,
                        format: match format {
                            WeightFormat::Csv => "csv".into(),
                            WeightFormat::Jsonl => "jsonl".into(),
                        },
                    }
                }
                (None, Some(g)) => WeightSource::Generator(g.parse()?),
                _ => {
                    return Err(Error::Config(
                        "exactly one of --weights or --generator is required".into(),
                    ))
                }
            };
            let claims = if claims.is_empty() {
                Claim::ALL.to_vec()
            } else {
                claims.iter().map(|c| c.parse()).collect::<Result<_>>()?
            };
            let config = ExperimentConfig {
                source,
                k,
                trials,
                seed,
                claims,
                out,
            };
            let report = cmd_experiment(&config)?;
            let json = serde_json::to_string_pretty(&ExperimentOutput {
                config: &config,
                report: &report,
            })
            .expect("report serializes");
            emit(&json, config.out.as_deref(), stdout)?;
            writeln!(
                stderr,
                "n={} k={} trials={} checks={} failed={}",
                report.n,
                report.k,
                report.trials,
                report.checks.len(),
                report.failed
            )?;
            Ok(if report.all_pass() {
                EXIT_OK
            } else {
                EXIT_CLAIM_FAILURE
            })
        }
        Command::Distinct {
            input,
            k,
            hash_seed,
        } => {
            let sketch = with_input(&input, stdin, |r| cmd_distinct(r, k, hash_seed))?;
            writeln!(
                stdout,
                "{}",
                serde_json::json!({ "estimate": sketch.estimate(), "exact_mode": sketch.exact_mode() })
            )?;
            Ok(EXIT_OK)
        }
    }
}

fn with_input<T>(
    path: &Path,
    stdin: &mut dyn BufRead,
    f: impl FnOnce(&mut dyn BufRead) -> Result<T>,
) -> Result<T> {
    if path == Path::new("-") {
        f(stdin)
    } else {
        let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        f(&mut BufReader::new(file))
    }
}

fn emit(json: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{json}\n"))
            .map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => Ok(writeln!(stdout, "{json}")?),
    }
}

/// A serialized sketch and its one-line summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutput {
    pub json: String,
    pub summary: String,
}

pub fn cmd_sample(
    method: Method,
    population: &Population,
    k: usize,
    seed: SeedSpec,
    tau: Option<f64>,
) -> Result<SampleOutput> {
    let ranked = draw_ranks(population, seed);
    let (n, w) = (population.len(), population.total_weight());
    match method {
        Method::Priority => {
            let sketch = PrioritySketch::build(&ranked, k)?;
            Ok(SampleOutput {
                json: sketch.to_json(),
                summary: format!("n={n} W={w} samples={} tau={}", sketch.len(), sketch.tau()),
            })
        }
        Method::Threshold => {
            let tau = match tau {
                Some(t) => t,
                None => threshold_for_budget(population, k)?,
            };
            let sketch = ThresholdSketch::build(&ranked, tau)?;
            let expected = expected_sample_count(population, tau)?;
            Ok(SampleOutput {
                json: sketch.to_json(),
                summary: format!(
                    "n={n} W={w} samples={} tau={tau} expected={expected}",
                    sketch.len()
                ),
            })
        }
    }
}

/// Estimates the subset sum from a serialized threshold or priority sketch.
pub fn cmd_estimate(sketch_json: &str, subset: &SubsetSpec) -> Result<f64> {
    let value: serde_json::Value =
        serde_json::from_str(sketch_json).map_err(|e| Error::InvalidSketch(e.to_string()))?;
    match value.get("method").and_then(|m| m.as_str()) {
        Some("priority") => {
            Ok(PrioritySketch::from_json(sketch_json)?.subset_estimate(|i| subset.contains(i)))
        }
        Some("threshold") => {
            Ok(ThresholdSketch::from_json(sketch_json)?.ht_estimate(|i| subset.contains(i)))
        }
        Some(other) => Err(Error::InvalidSketch(format!(
            "method '{other}' does not support subset estimates"
        ))),
        None => Err(Error::InvalidSketch("missing 'method'".into())),
    }
}

#[derive(Serialize)]
struct ExperimentOutput<'a> {
    config: &'a ExperimentConfig,
    report: &'a ClaimReport,
}

/// Validates the configuration, then runs the claim checks it selects.
pub fn cmd_experiment(config: &ExperimentConfig) -> Result<ClaimReport> {
    config.validate()?;
    let population = config.population()?;
    check_claims_feasible(&population, config.k)?;
    let mut report = check_claims(&population, &config.plan())?;
    report.retain(&config.claims);
    Ok(report)
}

/// Streams every line of `input` through a KMV sketch.
pub fn cmd_distinct(input: &mut dyn BufRead, k: usize, hash_seed: u64) -> Result<KmvSketch> {
    if k < 2 {
        return Err(Error::InvalidK { k, min: 2 });
    }
    let mut sketch = KmvSketch::new(k, hash_seed)?;
    let mut line = Vec::new();
    loop {
        line.clear();
        if input.read_until(b'\n', &mut line)? == 0 {
            break;
        }
        if line.last() == Some(&b'\n') {
            line.pop();
            if line.last() == Some(&b'\r') {
                line.pop();
            }
        }
        sketch.insert(&line);
    }
    Ok(sketch)
}
