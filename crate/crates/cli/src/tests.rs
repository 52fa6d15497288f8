use clap::Parser;

use super::*;

fn cli(args: &[&str]) -> Cli {
    Cli::try_parse_from(std::iter::once("qnt").chain(args.iter().copied())).unwrap()
}

fn exec(args: &[&str]) -> CliResult<String> {
    execute(&cli(args), MAX_DIM_CEILING)
}

fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&exec(args).unwrap()).unwrap()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(Result::unwrap)
        .collect()
}

#[test]
fn witness_of_nine() {
    let v = json(&["witness", "--k", "9"]);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["report"]["witnesses"], 6);
    assert_eq!(v["report"]["liars"], serde_json::json!([1, 8]));
}

#[test]
fn primality_report_carries_bound() {
    let v = json(&[
        "primality",
        "--k",
        "15",
        "--p",
        "8",
        "--r",
        "2",
        "--seed",
        "1",
    ]);
    let bound = v["report"]["error_probability_bound"].as_f64().unwrap();
    assert!((bound - (2.0 / (3f64.sqrt() * 8.0)).powi(4)).abs() < 1e-15);
    assert!(v["report"]["verdict"].is_string());
    let prime = json(&[
        "primality",
        "--k",
        "13",
        "--p",
        "8",
        "--r",
        "2",
        "--seed",
        "4",
    ]);
    assert_eq!(prime["report"]["verdict"], "probably_prime");
}

#[test]
fn count_defaults_to_primes() {
    let v = json(&["count", "--n", "16", "--p", "8", "--r", "2"]);
    assert_eq!(v["report"]["t_true"], 6);
    assert!(v["report"]["max_abs_diff"].as_f64().unwrap() < 1e-10);
    let v = json(&["count", "--n", "16", "--t", "4", "--p", "8"]);
    assert_eq!(v["report"]["t_true"], 4);
    assert!(matches!(
        exec(&["count", "--n", "4", "--t", "5"]),
        Err(CliError::Config(_))
    ));
}

#[test]
fn pnt_report_fields() {
    let v = json(&[
        "pnt", "--n", "16", "--p", "8", "--q", "16", "--reps", "50", "--seed", "7",
    ]);
    let r = &v["report"];
    assert_eq!(r["check"]["t_true"], 6);
    for key in [
        "t_estimate",
        "n_over_ln_n",
        "delta_t_exp",
        "delta_t_bound",
        "delta_t_th",
        "verdict",
    ] {
        assert!(!r["check"][key].is_null(), "{key}");
    }
    for key in ["e_norm_sq", "e_bound", "w_err", "w_err_bound"] {
        assert!(!r["budget"][key].is_null(), "{key}");
    }
    assert_eq!(r["outcomes"].as_array().unwrap().len(), 50);
}

#[test]
fn hl_report_fields() {
    let v = json(&["hl", "--two-n", "16", "--p", "4", "--q", "8", "--seed", "2"]);
    let r = &v["report"];
    assert_eq!(r["r2_true"], 4);
    for key in [
        "conjecture_ratio_estimate",
        "delta_r_bound",
        "rho_effective",
        "sigma_effective",
        "verdict",
    ] {
        assert!(!r[key].is_null(), "{key}");
    }
}

#[test]
fn reports_are_repeatable() {
    for args in [
        &[
            "pnt", "--n", "16", "--p", "8", "--q", "16", "--reps", "9", "--seed", "3",
        ][..],
        &[
            "count", "--n", "16", "--p", "8", "--r", "2", "--seed", "11", "--format", "csv",
        ][..],
    ] {
        assert_eq!(exec(args).unwrap(), exec(args).unwrap());
    }
}

#[test]
fn residual_sweep_decreases() {
    let text = exec(&[
        "sweep",
        "--kind",
        "s-tilde-error",
        "--n",
        "16",
        "--p",
        "8,16,32",
        "--format",
        "csv",
    ])
    .unwrap();
    let e: Vec<f64> = csv_rows(&text)
        .iter()
        .map(|r| r[2].parse().unwrap())
        .collect();
    assert_eq!(e.len(), 3);
    assert!(e[0] > e[1] && e[1] > e[2]);
}

#[test]
fn empty_sweep_is_header_only() {
    let text = exec(&["sweep", "--kind", "primality", "--k", "", "--format", "csv"]).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("k,p,r,seed,verdict"));
}

#[test]
fn invalid_sweeps_are_config_errors() {
    for args in [
        &[
            "sweep",
            "--kind",
            "primality",
            "--k",
            "9,15",
            "--p",
            "8,6",
            "--format",
            "csv",
        ][..],
        &["sweep", "--kind", "pnt", "--n", "16,abc"][..],
        &["sweep", "--kind", "witness"][..],
    ] {
        let err = exec(args).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
    }
}

#[test]
fn sweep_rows_use_offset_seeds() {
    let text = exec(&[
        "sweep",
        "--kind",
        "primality",
        "--k",
        "9,15",
        "--seed",
        "40",
        "--format",
        "csv",
    ])
    .unwrap();
    let seeds: Vec<String> = csv_rows(&text).iter().map(|r| r[3].to_string()).collect();
    assert_eq!(seeds, ["40", "41"]);
}

#[test]
fn exit_codes() {
    assert_eq!(exec(&["primality", "--k", "1"]).unwrap_err().exit_code(), 2);
    assert_eq!(exec(&["pnt", "--n", "12"]).unwrap_err().exit_code(), 2);
    let capped = execute(&cli(&["pnt", "--n", "16"]), 1000).unwrap_err();
    assert_eq!(capped.exit_code(), 3);
    assert_eq!(
        run(&cli(&["witness", "--k", "9"]), Some("lots"))
            .unwrap_err()
            .exit_code(),
        2
    );
    assert!(Cli::try_parse_from(["qnt", "pnt", "--n", "x"]).is_err());
}

#[test]
fn max_dim_env_is_clamped() {
    assert_eq!(max_dim_from_env(None).unwrap(), MAX_DIM_CEILING);
    assert_eq!(max_dim_from_env(Some("1000")).unwrap(), 1000);
    assert_eq!(
        max_dim_from_env(Some("999999999999")).unwrap(),
        MAX_DIM_CEILING
    );
    assert!(max_dim_from_env(Some("0")).is_err());
}

#[test]
fn writes_to_file_and_dumps_state() {
    let dir = std::env::temp_dir().join(format!("qnt-runner-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.json");
    let args = [
        "primality",
        "--k",
        "7",
        "--dump-state-threshold",
        "0.01",
        "--out",
        path.to_str().unwrap(),
    ];
    run(&cli(&args), None).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["state"]["amplitudes"].as_array().unwrap().len(), 7);
    std::fs::remove_dir_all(dir).unwrap();
}
