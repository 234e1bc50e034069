//! `sbq`: run verification suites and write JSON/CSV reports.
//!
//! Settings are layered: built-in defaults, then `--config <file>`, then
//! `SBQ_*` environment variables, then command-line flags.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sbq_core::config::{RunConfig, ENV_PREFIX};
use sbq_core::verify::{reduce_point, run_suite, Suite, SuiteOutcome};

#[derive(Parser, Debug)]
#[command(
    name = "sbq",
    version,
    about = "Segal–Bargmann transform verification suites"
)]
struct Cli {
    #[command(flatten)]
    opts: Overrides,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// ζ² and measure identities, the κ one-form, and the oracle checks.
    VerifyGeometry,
    /// Isometry, pairing-map unitarity and inversion.
    VerifyTransform,
    /// Bracket series of the geodesic flow.
    VerifyGeodesic,
    /// The flat ℝⁿ case.
    VerifyFlat,
    /// Lattice reduction and measure limits.
    VerifyReduction,
    /// Every suite.
    RunAll,
    /// A suite by name: geometry, transform, geodesic, flat, reduction, all.
    Run { suite: String },
    /// Print the effective configuration in file format.
    PrintConfig,
    /// One Monte Carlo reduction point, printed as JSON.
    Reduce,
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// Config file in `key = value` format.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    group: Option<String>,
    #[arg(long, global = true)]
    hbar: Option<String>,
    #[arg(long, global = true)]
    band_limit: Option<String>,
    #[arg(long, global = true)]
    quad_order: Option<String>,
    #[arg(long, global = true)]
    fiber_order: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    s: Option<String>,
    #[arg(long, global = true)]
    links: Option<String>,
    #[arg(long, global = true)]
    samples: Option<String>,
    #[arg(long, global = true)]
    substeps: Option<String>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Any config key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Run independent checks concurrently.
    #[arg(long, global = true)]
    parallel: bool,
}

impl Overrides {
    fn pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        };
        push("group", &self.group);
        push("hbar", &self.hbar);
        push("band_limit", &self.band_limit);
        push("quad_order", &self.quad_order);
        push("fiber_order", &self.fiber_order);
        push("seed", &self.seed);
        push("s", &self.s);
        push("links", &self.links);
        push("samples", &self.samples);
        push("substeps", &self.substeps);
        if let Some(p) = &self.output_dir {
            out.push(("output_dir".into(), p.display().to_string()));
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').unwrap_or((kv, ""));
            out.push((k.to_string(), v.to_string()));
        }
        out
    }
}

fn load_config(opts: &Overrides, env: &[(String, String)]) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &opts.config {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        cfg.apply_text(&text)
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    cfg.apply_env(env.iter().cloned())
        .map_err(|e| format!("environment: {e}"))?;
    for (k, v) in opts.pairs() {
        cfg.set(&k, &v).map_err(|e| format!("--{k}: {e}"))?;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn write_reports(out: &SuiteOutcome, dir: &Path) -> Result<(PathBuf, PathBuf), String> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let json_path = dir.join(format!("{}.json", out.suite));
    let csv_path = dir.join(format!("{}.csv", out.suite));
    let json = serde_json::to_string_pretty(out).map_err(|e| e.to_string())?;
    fs::write(&json_path, json + "\n").map_err(|e| format!("{}: {e}", json_path.display()))?;
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| e.to_string())?;
    w.write_record([
        "suite",
        "check",
        "test_id",
        "provenance",
        "abs_err",
        "rel_err",
        "err",
        "tolerance",
        "pass",
        "runtime_ms",
        "inputs",
        "computed",
        "reference",
    ])
    .map_err(|e| e.to_string())?;
    for r in &out.reports {
        let prov = serde_json::to_value(r.provenance).map_err(|e| e.to_string())?;
        w.write_record([
            out.suite.to_string(),
            r.check.clone(),
            r.test_id.clone(),
            prov.as_str().unwrap_or_default().to_string(),
            r.abs_err.to_string(),
            r.rel_err.to_string(),
            r.err.to_string(),
            r.tolerance.to_string(),
            r.pass.to_string(),
            format!("{:.3}", r.runtime_ms),
            r.inputs.to_string(),
            r.computed.to_string(),
            r.reference.to_string(),
        ])
        .map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())?;
    Ok((json_path, csv_path))
}

fn run(suite: Suite, cfg: &RunConfig, parallel: bool) -> ExitCode {
    let out = match run_suite(suite, cfg, parallel) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for r in &out.reports {
        println!(
            "{} {:<40} err {:>11.3e}  tol {:>9.1e}  [{}]",
            if r.pass { "PASS" } else { "FAIL" },
            r.test_id,
            r.err,
            r.tolerance,
            serde_json::to_value(r.provenance)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default()
        );
    }
    match write_reports(&out, &cfg.output_dir) {
        Ok((j, c)) => println!("wrote {} and {}", j.display(), c.display()),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let failed = out.failures().count();
    println!(
        "{} of {} rows passed",
        out.reports.len() - failed,
        out.reports.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut env: Vec<(String, String)> = std::env::vars()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    env.sort();
    let cfg = match load_config(&cli.opts, &env) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let parallel = cli.opts.parallel;
    let suite = match &cli.cmd {
        Command::VerifyGeometry => Suite::Geometry,
        Command::VerifyTransform => Suite::Transform,
        Command::VerifyGeodesic => Suite::Geodesic,
        Command::VerifyFlat => Suite::Flat,
        Command::VerifyReduction => Suite::Reduction,
        Command::RunAll => Suite::All,
        Command::Run { suite } => match suite.parse() {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        Command::PrintConfig => {
            print!("{}", cfg.to_text());
            return ExitCode::SUCCESS;
        }
        Command::Reduce => {
            return match reduce_point(&cfg) {
                Ok(p) => {
                    println!("{}", serde_json::to_string_pretty(&p).expect("plain data"));
                    if p.pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            };
        }
    };
    run(suite, &cfg, parallel)
}
