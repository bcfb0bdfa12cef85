#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! `hopf`: solve, scan and verify the reduced equation for harmonic Hopf
//! constructions from the command line.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::config::{Range, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "hopf", version, about = "Harmonic Hopf constructions between spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find a junction with zero jump and write the glued profile.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: Point,
        #[command(flatten)]
        scan: ScanFlags,
        /// Also solve by two-sided shooting and report the distance.
        #[arg(long)]
        shoot: bool,
    },
    /// Tabulate the jump l(s) over a geometric range of junctions.
    ScanJump {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: Point,
        #[arg(long, allow_negative_numbers = true)]
        s_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        s_max: Option<f64>,
        /// Number of scanned junctions.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Solvability verdicts over a (lambda, mu) grid.
    Map {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        scan: ScanFlags,
        /// `min:max:count`
        #[arg(long, default_value = "1:2:5")]
        lambda: Range,
        /// `min:max:count`
        #[arg(long, default_value = "1:6:10")]
        mu: Range,
    },
    /// Distance of the rescaled glued curve from its blow-up limit.
    Blowup {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: Point,
        /// Comma-separated junctions.
        #[arg(long, value_delimiter = ',', default_value = "0.04,0.02,0.01")]
        s: Vec<f64>,
        /// The comparison window is `[eps, 1/eps]` in the rescaled variable.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Randomized checks of the comparison bound against the closed form.
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        point: Point,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 0.004)]
        s_lo: f64,
        #[arg(long, default_value_t = 0.02)]
        s_hi: f64,
        /// `t0 = r s`.
        #[arg(long, default_value_t = 50.0)]
        r: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Run the closed-form oracle suite.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Also print the table as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Sample the full map built from a profile and report its defects.
    HopfEval {
        #[command(flatten)]
        common: Common,
        /// Profile CSV as written by `solve`.
        #[arg(long)]
        profile: PathBuf,
        /// complex, quaternion or octonion.
        #[arg(long, default_value = "complex")]
        kind: String,
        #[arg(long, default_value_t = 1)]
        lambda_hat: u32,
        #[arg(long, default_value_t = 10000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $HOPF_OUT_DIR or `.`).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads; 0 lets the pool decide.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    q: Option<u32>,
    /// Total grid nodes across both sides of the junction.
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    gradient_tol: Option<f64>,
    #[arg(long)]
    root_tol: Option<f64>,
    #[arg(long)]
    residual_tol: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct Point {
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct ScanFlags {
    #[arg(long = "scan-min", allow_negative_numbers = true)]
    s_min: Option<f64>,
    #[arg(long = "scan-max", allow_negative_numbers = true)]
    s_max: Option<f64>,
    #[arg(long = "scan-n")]
    n_scan: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<RunConfig, String> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        macro_rules! over {
            ($($field:ident),*) => { $(if let Some(v) = self.$field.clone() { cfg.$field = v; })* };
        }
        over!(out_dir, threads, p, q, nodes, gradient_tol, root_tol, residual_tol);
        Ok(cfg)
    }
}

impl Point {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.mu {
            cfg.mu = v;
        }
    }
}

impl ScanFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = self.s_min {
            cfg.s_min = v;
        }
        if let Some(v) = self.s_max {
            cfg.s_max = v;
        }
        if let Some(v) = self.n_scan {
            cfg.n_scan = v;
        }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::ScanJump { .. } => "scan-jump",
            Command::Map { .. } => "map",
            Command::Blowup { .. } => "blowup",
            Command::Compare { .. } => "compare",
            Command::Verify { .. } => "verify",
            Command::HopfEval { .. } => "hopf-eval",
        }
    }

    fn config(&self) -> Result<RunConfig, String> {
        let cfg = match self {
            Command::Solve { common, point, scan, .. } => {
                let mut c = common.config()?;
                point.apply(&mut c);
                scan.apply(&mut c);
                c
            }
            Command::ScanJump { common, point, s_min, s_max, n } => {
                let mut c = common.config()?;
                point.apply(&mut c);
                ScanFlags { s_min: *s_min, s_max: *s_max, n_scan: *n }.apply(&mut c);
                c
            }
            Command::Map { common, scan, .. } => {
                let mut c = common.config()?;
                scan.apply(&mut c);
                c
            }
            Command::Blowup { common, point, .. } | Command::Compare { common, point, .. } => {
                let mut c = common.config()?;
                point.apply(&mut c);
                c
            }
            Command::Verify { common, .. } | Command::HopfEval { common, .. } => common.config()?,
        };
        cfg.validate()?;
        if cfg.threads > 0 {
            // A second call only fails when the pool already exists.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
        }
        Ok(cfg)
    }

    fn run(&self, cfg: &RunConfig) -> Result<commands::Outcome, String> {
        match self {
            Command::Solve { shoot, .. } => commands::solve(cfg, *shoot),
            Command::ScanJump { .. } => commands::scan_jump(cfg),
            Command::Map { lambda, mu, .. } => commands::map(cfg, lambda, mu),
            Command::Blowup { s, eps, .. } => commands::blowup(cfg, s, *eps),
            Command::Compare { count, seed, s_lo, s_hi, r, tol, .. } => {
                commands::compare(cfg, *count, *seed, (*s_lo, *s_hi), *r, *tol)
            }
            Command::Verify { json, .. } => commands::verify(cfg, *json),
            Command::HopfEval { profile, kind, lambda_hat, samples, seed, .. } => {
                commands::hopf_eval(cfg, profile, kind, *lambda_hat, *samples, *seed)
            }
        }
    }
}

/// Looks for `--out-dir` in arguments clap refused to parse.
fn raw_out_dir(args: &[OsString]) -> PathBuf {
    let mut it = args.iter().map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if a == "--out-dir" {
            if let Some(v) = it.next() {
                return PathBuf::from(v);
            }
        } else if let Some(v) = a.strip_prefix("--out-dir=") {
            return PathBuf::from(v);
        }
    }
    RunConfig::default().out_dir
}

fn write_summary(dir: &Path, summary: &Value) {
    let text = serde_json::to_string_pretty(summary).unwrap_or_else(|_| "{}".into());
    let result = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join("summary.json"), text + "\n"));
    if let Err(e) = result {
        eprintln!("hopf: cannot write summary.json in {}: {e}", dir.display());
    }
}

fn failure(command: Option<&str>, config: Option<&RunConfig>, message: &str) -> Value {
    json!({
        "command": command,
        "status": "error",
        "exit_code": 1,
        "error": message,
        "config": config,
    })
}

fn main() -> ExitCode {
    let args: Vec<OsString> = std::env::args_os().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            write_summary(&raw_out_dir(&args), &failure(None, None, &e.to_string()));
            return ExitCode::from(1);
        }
    };
    let name = cli.command.name();
    let cfg = match cli.command.config() {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("hopf {name}: {msg}");
            write_summary(&raw_out_dir(&args), &failure(Some(name), None, &msg));
            return ExitCode::from(1);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cfg.out_dir) {
        eprintln!("hopf {name}: cannot create {}: {e}", cfg.out_dir.display());
        return ExitCode::from(1);
    }
    let summary = match cli.command.run(&cfg) {
        Ok(outcome) => {
            let mut m = Map::new();
            m.insert("command".into(), json!(name));
            m.insert("status".into(), json!(outcome.status));
            m.insert("exit_code".into(), json!(outcome.code));
            m.extend(outcome.details);
            m.insert("files_written".into(), json!(outcome.files));
            m.insert("config".into(), json!(cfg));
            write_summary(&cfg.out_dir, &Value::Object(m));
            return ExitCode::from(outcome.code);
        }
        Err(msg) => {
            eprintln!("hopf {name}: {msg}");
            failure(Some(name), Some(&cfg), &msg)
        }
    };
    write_summary(&cfg.out_dir, &summary);
    ExitCode::from(1)
}
