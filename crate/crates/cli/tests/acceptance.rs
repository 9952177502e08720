//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use gai_core::diagnostics::{growth_rate, null_crossings};
use gai_core::experiment::ExperimentOutput;
use gai_core::{
    execute, min_pulls_to_label, ArmModel, ExperimentConfig, LambdaSchedule, Metric, RunTrace,
};

const MASTER_SEED: u64 = 20_240_601;

const TABLE_CELLS: &str = r#"
[[cell]]
name = "moss-ep"
preset = "k4"
policy = "moss"
stopping = "eprocess"
delta = 0.05
replications = 200

[[cell]]
name = "oracle"
preset = "k4"
policy = "oracle"
stopping = "oracle_eprocess"
delta = 0.05
replications = 200

[[cell]]
name = "hdoc-cb"
preset = "k4"
policy = "hdoc"
stopping = "confidence_bound"
delta = 0.05
replications = 200

[[cell]]
name = "dose"
preset = "dose"
policy = "moss"
stopping = "eprocess"
delta = 0.05
replications = 200

[[cell]]
name = "delta-check"
preset = "k4"
policy = "moss"
stopping = "eprocess"
delta = 0.05
replications = 1000

[[cell]]
name = "hdoc-ep"
preset = "k4"
policy = "hdoc"
stopping = "eprocess"
delta = 0.05
replications = 200

[[cell]]
name = "moss-cb"
preset = "k4"
policy = "moss"
stopping = "confidence_bound"
delta = 0.05
replications = 200
"#;

struct Report {
    failures: usize,
}

impl Report {
    fn record(&mut self, id: u8, passed: bool, detail: String) {
        println!(
            "[{}] criterion {id:>2}: {detail}",
            if passed { "PASS" } else { "FAIL" }
        );
        if !passed {
            self.failures += 1;
        }
    }
}

fn mean_of(out: &ExperimentOutput, cell: &str, metric: Metric) -> f64 {
    out.summaries
        .iter()
        .find(|r| r.cell == cell && r.metric == metric)
        .and_then(|r| r.mean)
        .unwrap_or(f64::NAN)
}

fn traces<'a>(out: &'a ExperimentOutput, cell: &str) -> &'a [RunTrace] {
    &out.cells
        .iter()
        .find(|c| c.name == cell)
        .expect("cell present")
        .traces
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo && x <= hi
}

fn gai_lab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gai-lab"))
        .args(args)
        .env_remove("GAI_LAB_JOBS")
        .output()
        .expect("gai-lab starts")
}

fn table_runs(report: &mut Report) -> (ExperimentOutput, Duration) {
    let cfg_text = TABLE_CELLS.replace(
        "replications",
        &format!("master_seed = {MASTER_SEED}\nreplications"),
    );
    let cfg = ExperimentConfig::from_toml_str(&cfg_text).expect("acceptance config parses");
    let start = Instant::now();
    let out = execute(&cfg, None).expect("cells run");
    let elapsed = start.elapsed();

    let g1 = mean_of(&out, "moss-ep", Metric::TauG1);
    let stop = mean_of(&out, "moss-ep", Metric::TauStop);
    let hdoc = mean_of(&out, "hdoc-cb", Metric::TauG1);
    let ok = within(g1, 430.0, 640.0)
        && within(stop, 2900.0, 4300.0)
        && within(hdoc, 1140.0, 1710.0)
        && elapsed < Duration::from_secs(120);
    report.record(
        1,
        ok,
        format!(
            "K=4 Moss+e-process tau_g1 {g1:.1} in [430, 640], tau_stop {stop:.1} in [2900, 4300]; \
             HDoC+confidence-bound tau_g1 {hdoc:.1} in [1140, 1710]; all cells ran in {:.1}s",
            elapsed.as_secs_f64()
        ),
    );
    (out, elapsed)
}

fn oracle_row(report: &mut Report, out: &ExperimentOutput) {
    let runs = traces(out, "oracle");
    let zero = runs.iter().all(|t| t.regret_at_tau_g1 == Some(0.0));
    let g1 = mean_of(out, "oracle", Metric::TauG1);
    report.record(
        2,
        zero && within(g1, 200.0, 310.0),
        format!(
            "oracle regret exactly 0 on all {} runs: {zero}; tau_g1 {g1:.1} in [200, 310]",
            runs.len()
        ),
    );
}

fn dose_finding(report: &mut Report, out: &ExperimentOutput) {
    let g1 = mean_of(out, "dose", Metric::TauG1);
    let second = traces(out, "dose")
        .iter()
        .filter(|t| t.tau_good.len() > 1)
        .count();
    let (lo, hi) = (3444.7 * 0.7, 3444.7 * 1.3);
    report.record(
        3,
        within(g1, lo, hi) && second == 0,
        format!("dose-finding tau_g1 {g1:.1} in [{lo:.1}, {hi:.1}]; runs with a second good arm: {second}"),
    );
}

fn error_control(report: &mut Report, out: &ExperimentOutput) {
    let runs = traces(out, "delta-check");
    let bad = runs.iter().filter(|t| t.mislabeled).count();
    let frac = bad as f64 / runs.len() as f64;
    report.record(
        4,
        runs.len() >= 1000 && frac <= 0.05,
        format!(
            "{bad} of {} runs mislabeled an arm (fraction {frac:.4}, limit 0.05)",
            runs.len()
        ),
    );
}

fn e_power(report: &mut Report) {
    const TARGET: f64 = 0.020_135_513_550_688_87;
    const STEPS: usize = 1_000_000;
    let arm = ArmModel::bernoulli(0.6).unwrap();
    let oracle = growth_rate(
        arm,
        LambdaSchedule::oracle(0.6, 0.98, 0.5).unwrap(),
        STEPS,
        MASTER_SEED,
    );
    let plugin = growth_rate(
        arm,
        LambdaSchedule::plugin(0.98, 0.5).unwrap(),
        STEPS,
        MASTER_SEED ^ 1,
    );
    // sd of log(1 + 0.4 (X − 0.5)) under Bern(0.6), over sqrt(N)
    let sigma = 0.6f64.sqrt() * 0.4f64.sqrt() * (1.2f64 / 0.8).ln() / (STEPS as f64).sqrt();
    let oracle_ok = (oracle - TARGET).abs() <= 3.0 * sigma;
    let plugin_ok = (plugin - TARGET).abs() <= 0.1 * TARGET;
    report.record(
        5,
        oracle_ok && plugin_ok,
        format!(
            "growth at N=1e6: oracle {oracle:.7} (target {TARGET:.7} ± {:.7}), plug-in {plugin:.7} (± 10%)",
            3.0 * sigma
        ),
    );
}

fn null_process(report: &mut Report) {
    let res = null_crossings(0.5, 0.98, 0.05, 10_000, 10_000, MASTER_SEED);
    report.record(
        6,
        res.consistent_with_level(0.99),
        format!(
            "{} of {} null streams crossed 20 (fraction {:.4}, one-sided p = {:.3})",
            res.crossings,
            res.runs,
            res.fraction(),
            res.p_value
        ),
    );
}

fn floor(report: &mut Report, out: &ExperimentOutput) {
    let mut checked = 0usize;
    let mut violations = 0usize;
    for cell in ["moss-ep", "oracle", "dose", "delta-check"] {
        let cfg_k = traces(out, cell)[0].labels.len();
        let floor = min_pulls_to_label(cfg_k, 0.05, 0.98, 0.5);
        for n in traces(out, cell)
            .iter()
            .flat_map(|t| t.pulls_at_label.iter().flatten())
        {
            checked += 1;
            if *n < floor {
                violations += 1;
            }
        }
    }
    report.record(
        7,
        violations == 0 && checked > 0,
        format!("{violations} of {checked} e-process labels came before the minimum pull count"),
    );
}

fn theory(report: &mut Report, out: &ExperimentOutput) {
    let res = gai_lab(&["theory", "--preset", "k4", "--delta", "0.05", "--csv"]);
    let text = String::from_utf8_lossy(&res.stdout);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let coefficient = reader
        .records()
        .filter_map(|r| r.ok())
        .find(|r| &r[0] == "tau_stop")
        .and_then(|r| r[1].parse::<f64>().ok())
        .unwrap_or(f64::NAN);
    let lower = 498.66 * 20f64.ln();
    let stop = mean_of(out, "moss-ep", Metric::TauStop);
    report.record(
        8,
        res.status.success() && (coefficient - 498.66).abs() <= 0.01 && stop > lower,
        format!("theory tau_stop coefficient {coefficient:.4} (498.66 ± 0.01); observed tau_stop {stop:.1} > {lower:.1}"),
    );
}

fn ablation(report: &mut Report, out: &ExperimentOutput) {
    let hdoc = mean_of(out, "hdoc-ep", Metric::TauG1);
    let moss = mean_of(out, "moss-cb", Metric::TauG1);
    let band = |c: f64| (0.75 * c, 1.25 * c);
    let (h_lo, h_hi) = band(570.4);
    let (m_lo, m_hi) = band(1231.2);
    report.record(
        9,
        within(hdoc, h_lo, h_hi) && within(moss, m_lo, m_hi),
        format!(
            "HDoC+e-process tau_g1 {hdoc:.1} in [{h_lo:.1}, {h_hi:.1}]; \
             Moss+confidence-bound tau_g1 {moss:.1} in [{m_lo:.1}, {m_hi:.1}]"
        ),
    );
}

fn run_cli(config: &Path, out: &Path, jobs: &str) -> Vec<u8> {
    let res = gai_lab(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        jobs,
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    std::fs::read(out.join("runs.csv")).expect("runs.csv written")
}

fn determinism(report: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("k4.toml");
    std::fs::write(
        &config,
        format!("[[cell]]\nname = \"k4\"\npreset = \"k4\"\ndelta = 0.05\nreplications = 200\nmaster_seed = {MASTER_SEED}\n"),
    )
    .unwrap();
    let a = run_cli(&config, &dir.path().join("a"), "1");
    let b = run_cli(&config, &dir.path().join("b"), "4");
    let c = run_cli(&config, &dir.path().join("c"), "4");
    report.record(
        10,
        a == b && b == c && !a.is_empty(),
        format!(
            "runs.csv ({} bytes) identical across --jobs 1, 4 and a repeat: {}",
            a.len(),
            a == b && b == c
        ),
    );
}

fn main() {
    // `cargo test` passes harness flags such as `--list`; there is nothing to enumerate.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut report = Report { failures: 0 };
    let (out, _) = table_runs(&mut report);
    oracle_row(&mut report, &out);
    dose_finding(&mut report, &out);
    error_control(&mut report, &out);
    e_power(&mut report);
    null_process(&mut report);
    floor(&mut report, &out);
    theory(&mut report, &out);
    ablation(&mut report, &out);
    determinism(&mut report);

    if report.failures > 0 {
        println!("{} acceptance criteria failed", report.failures);
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
