//! Command-line experiment runner. Machine-readable artifacts go to `--out`
//! (CSV series, JSON reports, `manifest.json`); stdout carries a short
//! human summary.
//!
//! Exit codes: 0 success, 2 invariant violated, 3 cap hit or inconclusive
//! under `--strict`, 64 usage error, 74 I/O error.

mod artifacts;
mod commands;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

pub use artifacts::{content_hash, ExperimentManifest, Output, Provenance};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 2;
pub const EXIT_STRICT: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

/// Environment variable holding the default seed.
pub const SEED_ENV: &str = "SANDPILE_SEED";

#[derive(Debug, Parser, Serialize)]
#[command(name = "sandpile", version, about = "Sandpile stabilizability experiments", args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Directory for CSV/JSON artifacts and the manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Exit 3 when a cap is hit or a verdict is inconclusive.
    #[arg(long, global = true)]
    pub strict: bool,
    /// JSON object of flag values, e.g. {"sampler": "poisson:3.5", "L": [8, 16]}.
    /// Flags given on the command line win.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// A configuration given as a file or sampled on a centered box.
#[derive(Debug, Args, Serialize, Clone)]
pub struct ConfigSource {
    /// Configuration file (JSON, or ASM1 binary).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Sampler, short form or JSON.
    #[arg(long)]
    pub sampler: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Side of the centered box.
    #[arg(long = "L", default_value_t = 16)]
    pub side: usize,
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct PolicyArgs {
    #[arg(long, default_value_t = 1)]
    pub min_growth: u64,
    /// Per-site toppling cap.
    #[arg(long, default_value_t = crate::topple::DEFAULT_TOPPLING_CAP)]
    pub cap: u64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Toppling count at the origin over nested boxes, with a verdict.
    Probe {
        #[arg(long)]
        sampler: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Box sides; default 8, 16, ... per dimension.
        #[arg(long = "L", value_delimiter = ',')]
        sides: Vec<usize>,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Bisect the density at which a family starts to diverge.
    Bracket {
        /// `two-point:LOW,HIGH` or `poisson`.
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = 0.1)]
        tol: f64,
        #[arg(long = "L", value_delimiter = ',')]
        sides: Vec<usize>,
        /// Seeds per density point.
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Burning test, with a forbidden subconfiguration when not recurrent.
    BurnTest {
        #[command(flatten)]
        source: ConfigSource,
    },
    /// Samples of the uniform recurrent measure.
    UmrcSample {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "L", default_value_t = 16)]
        side: usize,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        /// Burn-in, in additions per site.
        #[arg(long, default_value_t = crate::recurrence::DEFAULT_BURN_IN_FACTOR)]
        burn_in: u64,
        /// Additions between samples, per site.
        #[arg(long, default_value_t = 1)]
        stride: u64,
        /// Also write ASM1 binary files.
        #[arg(long)]
        binary: bool,
    },
    /// Mean height over a central region.
    Density {
        #[arg(long)]
        sampler: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "L", default_value_t = 64)]
        side: usize,
        /// Side of the central region.
        #[arg(long, default_value_t = 32)]
        region: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Exact check of m(x) = Σ G(x, y) (eta - xi)(y).
    GreenCheck {
        #[command(flatten)]
        source: ConfigSource,
    },
    /// Activated random walkers, compared with direct stabilization.
    Arw {
        #[command(flatten)]
        source: ConfigSource,
        #[arg(long, conflicts_with = "t_max")]
        until_quiescent: bool,
        #[arg(long)]
        t_max: Option<f64>,
        /// Write (t, unstable_count, total_topplings) here.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        trace_step: f64,
    },
    /// Wave decomposition of one added grain.
    Waves {
        #[command(flatten)]
        source: ConfigSource,
        /// Addition site, comma separated; default the origin.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        site: Vec<i64>,
        #[arg(long, default_value_t = crate::topple::DEFAULT_WAVE_CAP)]
        wave_cap: usize,
    },
    /// Build nested lakes and detect them.
    Lakes {
        #[arg(long)]
        n: usize,
        #[arg(long = "L", default_value_t = 41)]
        side: usize,
    },
    /// Waves against nested lakes for one recurrent configuration.
    MetaProbe {
        #[command(flatten)]
        source: ConfigSource,
        #[arg(long, default_value_t = 10_000)]
        wave_cap: usize,
    },
    /// Sea-with-islands sweep over probabilities and sizes.
    MetaSweep {
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long = "L", value_delimiter = ',')]
        sides: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        #[arg(long, default_value_t = 10_000)]
        wave_cap: usize,
    },
    /// One-dimensional verdicts against the density-2 threshold.
    D1Check {
        #[arg(long)]
        sampler: String,
        #[arg(long = "L", value_delimiter = ',')]
        sides: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Constant 6 as 2 - Δ(x² + y²), and its divergence.
    #[command(name = "counterexample-6bar")]
    Counterexample6bar {
        #[arg(long, default_value_t = 50)]
        identity_side: usize,
        #[arg(long = "L", value_delimiter = ',')]
        sides: Vec<usize>,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Origin topplings of UMRC + line field against the rectangle ladder.
    LineFieldBound {
        #[arg(long, default_value_t = 0.2)]
        p: f64,
        #[arg(long = "L", default_value_t = 101)]
        side: usize,
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        /// Sides for the divergence verdict, ending at `L`.
        #[arg(long, value_delimiter = ',')]
        nest: Vec<usize>,
    },
    /// Recurrent configuration equivalent to the input.
    Representative {
        #[command(flatten)]
        source: ConfigSource,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invariant(_) => EXIT_INVARIANT,
        Error::IterationCap(_) => EXIT_STRICT,
        Error::Io(_) | Error::Csv(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

/// Expand `--config FILE` into flags placed before the explicit ones.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, Error> {
    let pos = args.iter().position(|a| a == "--config" || a.to_string_lossy().starts_with("--config="));
    let Some(pos) = pos else { return Ok(args) };
    let a = args[pos].to_string_lossy().into_owned();
    let path = match a.strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => args
            .get(pos + 1)
            .ok_or_else(|| Error::Usage("--config needs a file".into()))?
            .to_string_lossy()
            .into_owned(),
    };
    let text = std::fs::read_to_string(&path)?;
    let obj: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&text)?;
    let verbs: Vec<String> = Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect();
    let sub = args.iter().skip(1).position(|a| verbs.iter().any(|v| a == v.as_str())).map(|i| i + 1);
    let insert_at = sub.map_or(args.len(), |i| i + 1);
    // flags given on the command line win over the file
    let given: Vec<String> = args
        .iter()
        .filter_map(|a| a.to_str()?.strip_prefix("--").map(|f| f.split('=').next().unwrap_or(f).to_string()))
        .collect();
    let mut extra = Vec::new();
    for (k, v) in obj {
        if given.contains(&k) {
            continue;
        }
        let flag = OsString::from(format!("--{k}"));
        match v {
            serde_json::Value::Bool(true) => extra.push(flag),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::Array(items) => {
                let joined: Vec<String> = items.iter().map(json_scalar).collect();
                extra.push(flag);
                extra.push(joined.join(",").into());
            }
            other => {
                extra.push(flag);
                extra.push(json_scalar(&other).into());
            }
        }
    }
    let mut out = args;
    out.splice(insert_at..insert_at, extra);
    Ok(out)
}

fn json_scalar(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Object(_) => v.to_string(),
        other => other.to_string(),
    }
}

/// Parse, run, write artifacts, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let raw: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let expanded = match expand_config(raw.clone()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let cli = match Cli::try_parse_from(&expanded) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let mut out = match Output::new(cli.global.out.as_deref()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let mut prov = Provenance { tool_version: env!("CARGO_PKG_VERSION").into(), ..Provenance::default() };
    let result = commands::dispatch(&cli, &mut out, &mut prov);
    let (code, topplings) = match result {
        Ok(o) => {
            println!("{}", o.summary);
            let code = match (&o.strict_failure, cli.global.strict) {
                (Some(why), true) => {
                    eprintln!("strict: {why}");
                    EXIT_STRICT
                }
                _ => EXIT_OK,
            };
            (code, o.topplings)
        }
        Err(e) => {
            eprintln!("error: {e}");
            (exit_code(&e), 0)
        }
    };
    if out.dir().is_some() {
        let manifest = ExperimentManifest {
            command_line: raw.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
            provenance: prov,
            artifacts: out.written.clone(),
            wall_clock_seconds: start.elapsed().as_secs_f64(),
            total_topplings: topplings,
            exit_code: code,
        };
        if let Err(e) = out.json("manifest.json", &manifest) {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["sandpile", "probe"]), EXIT_USAGE);
        assert_eq!(run(["sandpile", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["sandpile", "probe", "--sampler", "nonsense:1", "--L", "4,8,16,32"]), EXIT_USAGE);
    }

    #[test]
    fn config_expansion() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("c.json");
        std::fs::write(&f, r#"{"sampler": "constant:6", "L": [4, 8, 16, 32], "strict": true}"#).unwrap();
        let args: Vec<OsString> =
            ["sandpile", "probe", "--config", f.to_str().unwrap(), "--L", "2,4,8,16"].iter().map(Into::into).collect();
        let e = expand_config(args).unwrap();
        let cli = Cli::try_parse_from(&e).unwrap();
        assert!(cli.global.strict);
        match cli.command {
            Command::Probe { sampler, sides, .. } => {
                assert_eq!(sampler, "constant:6");
                assert_eq!(sides, vec![2, 4, 8, 16]);
            }
            _ => panic!(),
        }
    }
}
