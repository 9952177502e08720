use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use gai_core::diagnostics::{self, ValidateSizes};
use gai_core::experiment::{self, preset_means, write_outputs, PRESETS};
use gai_core::{minimax_bounds, BanditInstance, Bound, BoundReport, ExperimentConfig, RewardKind};

#[derive(Debug, Parser)]
#[command(
    name = "gai-lab",
    version,
    about = "Good-arm identification experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every cell of an experiment config and write CSV summaries.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's `output`, then `results`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads.
        #[arg(long, env = "GAI_LAB_JOBS")]
        jobs: Option<usize>,
        /// Overrides the master seed of every cell.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print asymptotic stopping-time lower bounds for an instance.
    Theory {
        /// Comma-separated arm means.
        #[arg(
            long,
            value_delimiter = ',',
            conflicts_with = "preset",
            required_unless_present = "preset"
        )]
        means: Vec<f64>,
        /// Named preset instead of explicit means.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        xi: Option<f64>,
        #[arg(long)]
        delta: f64,
        /// Emit CSV only.
        #[arg(long)]
        csv: bool,
    },
    /// Run the built-in statistical self-checks.
    Validate {
        /// Smaller sample sizes for a fast smoke check.
        #[arg(long)]
        quick: bool,
    },
    /// List instance presets.
    Presets,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run {
            config,
            out,
            jobs,
            seed,
        } => run(config, out, jobs, seed),
        Command::Theory {
            means,
            preset,
            xi,
            delta,
            csv,
        } => theory(means, preset, xi, delta, csv),
        Command::Validate { quick } => validate(quick),
        Command::Presets => {
            for name in PRESETS {
                let (means, xi) = preset_means(name, None)?;
                println!("{name:<14} xi={xi} means={means:?}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run(
    config: PathBuf,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    seed: Option<u64>,
) -> Result<ExitCode> {
    if jobs == Some(0) {
        bail!("--jobs must be at least 1");
    }
    let mut cfg =
        ExperimentConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
    if let Some(s) = seed {
        cfg.override_seed(s);
    }
    let dir = out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let output = experiment::execute(&cfg, jobs)?;
    let paths = write_outputs(&output, &dir, cfg.json)?;

    for row in &output.summaries {
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.1}"));
        println!(
            "{:<24} {:<9} {:>10} ± {:<10} runs={} mislabeled={} truncated={}",
            row.cell,
            row.metric.name(),
            fmt(row.mean),
            fmt(row.std),
            row.n_runs,
            row.n_mislabeled,
            row.n_truncated
        );
    }
    eprintln!(
        "wrote {} and {}",
        paths.runs.display(),
        paths.summary.display()
    );
    if let Some(json) = paths.json {
        eprintln!("wrote {}", json.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn theory(
    means: Vec<f64>,
    preset: Option<String>,
    xi: Option<f64>,
    delta: f64,
    csv: bool,
) -> Result<ExitCode> {
    if !(delta > 0.0 && delta < 1.0) {
        bail!("--delta must lie in (0, 1), got {delta}");
    }
    let (means, xi) = match preset {
        Some(p) => preset_means(&p, xi)?,
        None => (means, xi.unwrap_or(0.5)),
    };
    let inst = BanditInstance::from_means(RewardKind::Bernoulli, &means, xi)?;
    let report = minimax_bounds(&inst, delta);
    if csv {
        print!("{}", report_csv(&report));
    } else {
        print_report(&report);
        println!();
        print!("{}", report_csv(&report));
    }
    Ok(ExitCode::SUCCESS)
}

fn cell(b: Bound) -> String {
    match b {
        Bound::Finite(v) => format!("{v}"),
        Bound::Infinite => "inf".into(),
    }
}

fn report_csv(r: &BoundReport) -> String {
    let mut s =
        String::from("quantity,coefficient,scaled_log_1_over_delta,scaled_log_2k_over_delta\n");
    let mut line = |name: String, b: Bound| {
        s.push_str(&format!(
            "{name},{},{},{}\n",
            cell(b),
            cell(b.scale(r.delta_scale())),
            cell(b.scale(r.union_scale()))
        ));
    };
    for (i, b) in r.tau_g_bounds.iter().enumerate() {
        line(format!("tau_g{}", i + 1), *b);
    }
    line("tau_stop".into(), r.tau_stop_bound);
    s
}

fn print_report(r: &BoundReport) {
    println!("threshold xi = {}, delta = {}", r.threshold, r.delta);
    println!("{:>5} {:>10} {:>14}", "arm", "mean", "d(mean, xi)");
    for (a, (m, d)) in r.means.iter().zip(&r.kl).enumerate() {
        println!("{:>5} {:>10} {:>14.7}", a + 1, m, d);
    }
    println!();
    println!(
        "{:<10} {:>14} {:>16} {:>16}",
        "bound", "coefficient", "x log(1/delta)", "x log(2K/delta)"
    );
    let row = |name: String, b: Bound| {
        println!(
            "{:<10} {:>14} {:>16} {:>16}",
            name,
            b.to_string(),
            b.scale(r.delta_scale()).to_string(),
            b.scale(r.union_scale()).to_string()
        );
    };
    for (i, b) in r.tau_g_bounds.iter().enumerate() {
        row(format!("tau_g{}", i + 1), *b);
    }
    row("tau_stop".into(), r.tau_stop_bound);
    println!("(x log(2K/delta) is a finite-delta heuristic, not a bound)");
    for w in &r.warnings {
        println!("warning: {w}; the asymptotic bound assumes otherwise");
    }
}

fn validate(quick: bool) -> Result<ExitCode> {
    let sizes = if quick {
        ValidateSizes {
            null_runs: 1_000,
            null_steps: 2_000,
            floor_runs: 20,
        }
    } else {
        ValidateSizes::default()
    };
    let outcomes = diagnostics::run_all(sizes);
    let mut ok = true;
    for o in &outcomes {
        println!(
            "[{}] {}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.detail
        );
        ok &= o.passed;
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}
