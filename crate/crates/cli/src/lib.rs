//! Config-driven experiment runner for `drinfeld-core`.

pub mod config;
pub mod experiments;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use drinfeld_core::algebra::cache;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use config::{Config, ConfigError, Kind};
pub use experiments::{run, Outcome, RunError, EXIT_CONFIG, EXIT_INCONCLUSIVE, EXIT_NEGATIVE, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "drinfeld", version, about = "Experiments with Drinfeld F_q[t]-modules")]
pub struct Cli {
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Torsion points and an A/(a)-basis.
    Torsion,
    /// Frobenius matrices on torsion.
    Frobenius,
    /// Mod-a image classification from sampled Frobenius elements.
    Image,
    /// Divisibility density of a point against the image oracle.
    KummerDensity,
    /// Rational division hull of a finitely generated submodule.
    DivisionHull,
    /// Endomorphisms in a bounded window.
    Endring,
    /// Index bound certificate for an isotrivial module over a finite field.
    IndexBound,
    /// Frobenius compatibility of an isogeny on torsion.
    IsogenyCheck,
    /// Torsion of a restriction versus primary parts of the original module.
    RestrictCheck,
    /// Inspect or clear the modulus and lattice caches.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CacheAction {
    Inspect,
    Clear,
}

impl Command {
    fn kind(&self) -> Option<Kind> {
        Some(match self {
            Command::Torsion => Kind::Torsion,
            Command::Frobenius => Kind::Frobenius,
            Command::Image => Kind::Image,
            Command::KummerDensity => Kind::KummerDensity,
            Command::DivisionHull => Kind::DivisionHull,
            Command::Endring => Kind::Endring,
            Command::IndexBound => Kind::IndexBound,
            Command::IsogenyCheck => Kind::IsogenyCheck,
            Command::RestrictCheck => Kind::RestrictCheck,
            Command::Cache { .. } => return None,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub wall_time_ms: u128,
    pub workers: usize,
    pub config_hash: String,
}

/// A run's report. Everything except `meta` is deterministic in the config.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub meta: Meta,
    pub kind: Kind,
    pub config: Value,
    pub verdict: String,
    pub exit_code: i32,
    pub error: Option<String>,
    pub payload: Value,
}

impl Report {
    /// The byte string covered by the determinism contract.
    pub fn payload_bytes(&self) -> String {
        serde_json::to_string(&json!({
            "kind": self.kind,
            "config": self.config,
            "verdict": self.verdict,
            "exit_code": self.exit_code,
            "error": self.error,
            "payload": self.payload,
        }))
        .expect("report serializes")
    }
}

/// Runs `kind` on a thread pool of `workers` threads (all cores if `None`).
pub fn execute(kind: Kind, cfg: &Config) -> Report {
    let workers = cfg
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let start = Instant::now();
    let result = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| run(kind, cfg)),
        Err(e) => Err(RunError::Config(format!("cannot start workers: {e}"))),
    };
    let (verdict, exit_code, error, payload) = match result {
        Ok(o) => (o.verdict, o.exit_code, None, o.payload),
        Err(RunError::Config(e)) => ("config-error".into(), EXIT_CONFIG, Some(e), Value::Null),
        Err(RunError::Inconclusive(e)) => ("inconclusive".into(), EXIT_INCONCLUSIVE, Some(e), Value::Null),
    };
    Report {
        meta: Meta {
            tool: "drinfeld".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            wall_time_ms: start.elapsed().as_millis(),
            workers,
            config_hash: cfg.hash(),
        },
        kind,
        config: cfg.canonical(),
        verdict,
        exit_code,
        error,
        payload,
    }
}

fn summary(r: &Report) -> String {
    let mut s = format!("{}: {} (exit {})", r.kind.name(), r.verdict, r.exit_code);
    if let Some(e) = &r.error {
        s.push_str(&format!("\n  {e}"));
    }
    s.push_str(&format!("\n  config {} in {} ms", &r.meta.config_hash[..12], r.meta.wall_time_ms));
    s
}

/// Entry point shared by the binary and tests; returns the exit status.
pub fn main_with(cli: Cli) -> i32 {
    let kind = match &cli.command {
        Command::Cache { action } => {
            let c = cache::global();
            match action {
                CacheAction::Inspect => {
                    let entries = c.inspect();
                    println!("{}", serde_json::to_string_pretty(&entries).unwrap());
                }
                CacheAction::Clear => {
                    let n = c.clear();
                    println!("removed {n} cache files");
                }
            }
            return EXIT_OK;
        }
        other => other.kind().unwrap(),
    };
    let Some(path) = &cli.config else {
        eprintln!("error: --config is required for {}", kind.name());
        return EXIT_CONFIG;
    };
    let mut cfg = match Config::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.display().to_string());
    }
    let report = execute(kind, &cfg);
    if let Some(out) = &cfg.out {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Err(e) = std::fs::write(out, text + "\n") {
            eprintln!("error: cannot write {out}: {e}");
            return EXIT_CONFIG;
        }
    }
    println!("{}", summary(&report));
    report.exit_code
}
