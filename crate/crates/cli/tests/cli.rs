use std::process::{Command, Output};

fn gai_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gai-lab"))
        .args(args)
        .env_remove("GAI_LAB_JOBS")
        .output()
        .expect("gai-lab starts")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn presets_are_listed() {
    let out = gai_lab(&["presets"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in [
        "synthetic-k4",
        "synthetic-k10",
        "synthetic-k20",
        "dose-finding",
    ] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
    assert!(text.contains("0.537"));
}

#[test]
fn theory_table_for_explicit_means() {
    let out = gai_lab(&[
        "theory",
        "--means",
        "0.6,0.55,0.45,0.4",
        "--xi",
        "0.5",
        "--delta",
        "0.05",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("498.6588"), "{text}");
    assert!(text.contains("1493.8481"), "{text}");
}

#[test]
fn theory_csv_columns() {
    let out = gai_lab(&[
        "theory",
        "--preset",
        "dose-finding",
        "--delta",
        "0.05",
        "--csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("quantity,coefficient,scaled_log_1_over_delta,scaled_log_2k_over_delta")
    );
    let rows: Vec<&str> = lines.collect();
    // one good arm plus the stopping bound
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("tau_g1,"));
    assert!(rows[1].starts_with("tau_stop,"));
}

#[test]
fn theory_rejects_bad_delta() {
    let out = gai_lab(&["theory", "--means", "0.6", "--delta", "1.5"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("--delta"));
}

#[test]
fn theory_rejects_unknown_preset() {
    let out = gai_lab(&["theory", "--preset", "k7", "--delta", "0.05"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("k7"));
}

#[test]
fn quick_validate_passes() {
    let out = gai_lab(&["validate", "--quick"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert_eq!(stdout(&out).matches("[PASS]").count(), 4);
}

#[test]
fn run_writes_outputs_and_honours_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        "json = true\n[[cell]]\nname = \"small\"\npreset = \"k4\"\ndelta = 0.05\nreplications = 5\nmaster_seed = 1\n",
    )
    .unwrap();
    let cfg = config.to_str().unwrap();
    let run = |out: &str, seed: &str| {
        let dest = dir.path().join(out);
        let res = gai_lab(&[
            "run",
            "--config",
            cfg,
            "--out",
            dest.to_str().unwrap(),
            "--seed",
            seed,
        ]);
        assert!(res.status.success(), "{}", stderr(&res));
        assert!(dest.join("summary.csv").exists());
        assert!(dest.join("results.json").exists());
        std::fs::read_to_string(dest.join("runs.csv")).unwrap()
    };
    let a = run("a", "5");
    let b = run("b", "5");
    let c = run("c", "6");
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.starts_with(
        "cell,run_id,seed,tau_g1,tau_g2,tau_stop,regret_g1,mislabeled,truncated,labels\n"
    ));
    assert_eq!(a.lines().count(), 6);
}

#[test]
fn jobs_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        "[[cell]]\npreset = \"k4\"\ndelta = 0.05\nreplications = 2\n",
    )
    .unwrap();
    let res = Command::new(env!("CARGO_BIN_EXE_gai-lab"))
        .args([
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.path().join("o").to_str().unwrap(),
        ])
        .env("GAI_LAB_JOBS", "0")
        .output()
        .unwrap();
    assert!(!res.status.success());
    assert!(stderr(&res).contains("--jobs"));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("[[cell]]\npreset = \"k4\"\nreplications = 2\n", "delta"),
        (
            "[[cell]]\npreset = \"k4\"\ndelta = 0.05\nreplications = 0\n",
            "replications",
        ),
        (
            "[[cell]]\npreset = \"k4\"\ndelta = 0.05\nreplications = 2\nspeed = 3\n",
            "speed",
        ),
        (
            "[[cell]]\npreset = \"k5\"\ndelta = 0.05\nreplications = 2\n",
            "k5",
        ),
        (
            "[[cell]]\nname = \"a\"\npreset = \"k4\"\ndelta = 0.05\nreplications = 2\n\
             [[cell]]\nname = \"a\"\npreset = \"k4\"\ndelta = 0.05\nreplications = 2\n",
            "a",
        ),
        (
            "[[cell]]\nmeans = [0.6, 0.4]\nprior_weight = -1\ndelta = 0.05\nreplications = 2\n",
            "prior_weight",
        ),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let config = dir.path().join(format!("bad{i}.toml"));
        std::fs::write(&config, text).unwrap();
        let res = gai_lab(&[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(!res.status.success(), "case {i} should fail");
        let err = stderr(&res);
        assert!(err.contains(needle), "case {i}: `{needle}` not in {err}");
    }
}

#[test]
fn missing_config_file_fails() {
    let res = gai_lab(&["run", "--config", "/nonexistent/exp.toml"]);
    assert!(!res.status.success());
    assert!(stderr(&res).contains("/nonexistent/exp.toml"));
}
