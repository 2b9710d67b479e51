use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fracnash::experiment::output::emit_outputs;
use fracnash::experiment::{oracle_check, run_experiment, ExperimentConfig};

/// Nash equilibria for space-time fractional control problems.
#[derive(Debug, Parser)]
#[command(name = "fracnash", version, allow_negative_numbers = true)]
struct Args {
    /// Configuration file with `key = value` lines.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario: ex1, ex2, ex3, ex4.
    #[arg(long)]
    preset: Option<String>,
    /// Caputo orders, comma separated.
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    /// Spatial orders s (not 2s), comma separated.
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<f64>>,
    /// Interior grid points per axis.
    #[arg(long)]
    n: Option<usize>,
    /// Time steps.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    mu2: Option<f64>,
    /// CG tolerance on the relative squared residual.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Simulate at the initial controls instead of solving for the equilibrium.
    #[arg(long)]
    no_control: bool,
    /// Compare CG against the dense oracle on a shrunk instance.
    #[arg(long)]
    oracle_check: bool,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    threads: Option<usize>,
}

fn list(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn build_config(args: &Args) -> fracnash::Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => ExperimentConfig::from_preset(name)?,
        (None, None) => ExperimentConfig::from_preset("ex3")?,
    };
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut push = |k: &str, v: String| overrides.push((k.to_string(), v));
    if let Some(g) = &args.gamma {
        push("orders.gamma", list(g));
    }
    if let Some(s) = &args.s {
        push("orders.s", list(s));
    }
    if let Some(n) = args.n {
        push("grid.n", n.to_string());
    }
    if let Some(m) = args.m {
        push("grid.m", m.to_string());
    }
    if let Some(v) = args.mu1 {
        push("cost.mu1", v.to_string());
    }
    if let Some(v) = args.mu2 {
        push("cost.mu2", v.to_string());
    }
    if let Some(v) = args.tol {
        push("solver.tol", v.to_string());
    }
    if let Some(v) = args.max_iter {
        push("solver.max_iter", v.to_string());
    }
    if let Some(v) = args.threads {
        push("solver.threads", v.to_string());
    }
    if let Some(v) = &args.out {
        push("output.dir", v.display().to_string());
    }
    if args.no_control {
        push("controls.none", "true".into());
    }
    if args.oracle_check {
        push("oracle.check", "true".into());
    }
    for item in &args.set {
        let (k, v) = item.split_once('=').ok_or_else(|| {
            fracnash::Error::Config(format!("--set expects KEY=VALUE, got `{item}`"))
        })?;
        push(k.trim(), v.trim().to_string());
    }
    for (k, v) in overrides {
        cfg.set(&k, &v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let cfg = match build_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(1);
        }
    };

    if cfg.oracle_check {
        return match oracle_check(&cfg) {
            Ok(checks) => {
                let mut ok = true;
                println!("gamma,s,n,m,dofs,disagreement,symmetry_defect,lambda_min");
                for c in &checks {
                    println!(
                        "{},{},{},{},{},{:e},{:e},{:e}",
                        c.gamma,
                        c.s,
                        c.points,
                        c.steps,
                        c.dofs,
                        c.disagreement,
                        c.certificate.symmetry_defect,
                        c.certificate.lambda_min
                    );
                    ok &= c.disagreement <= 1e-8 && c.certificate.passed;
                }
                if ok {
                    ExitCode::SUCCESS
                } else {
                    eprintln!("oracle check failed");
                    ExitCode::from(2)
                }
            }
            Err(e) => {
                eprintln!("oracle check error: {e}");
                ExitCode::from(2)
            }
        };
    }

    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(1);
        }
    };
    for o in &report.outcomes {
        let r = &o.row;
        let status = match (&o.error, o.converged) {
            (Some(e), _) => format!("error: {e}"),
            (None, false) => "not converged".to_string(),
            (None, true) => "ok".to_string(),
        };
        println!(
            "gamma={} s={} err_w1={:.6e} err_w2={:.6e} iters={} tol={:.3e} [{status}]",
            r.gamma, r.s, r.err_w1, r.err_w2, r.iters, r.tol
        );
    }
    match emit_outputs(&cfg.out_dir, &report, cfg.write_series, cfg.write_snapshots) {
        Ok(paths) => println!("wrote {} files to {}", paths.len(), cfg.out_dir.display()),
        Err(e) => {
            eprintln!("cannot write outputs: {e}");
            return ExitCode::from(1);
        }
    }
    if report.all_converged() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
