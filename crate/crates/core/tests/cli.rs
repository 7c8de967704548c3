use std::process::{Command, Output};

fn cica(args: &[&str], dir: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cica")).current_dir(dir).args(args).output().unwrap()
}

#[test]
fn cdf_prints_the_product_value() {
    let d = tempfile::tempdir().unwrap();
    let o = cica(&["cdf", "--matrix", "1,0,0,1", "--beta", "0", "--x", "0,0"], d.path());
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), "0.25");
    let o = cica(&["cdf", "--matrix", "1,0,0.4,0.916515138991168", "--beta", "0", "--x", "-1,0.5"], d.path());
    let v: f64 = String::from_utf8(o.stdout).unwrap().trim().parse().unwrap();
    assert!(v > 0.0 && v < 0.16);
}

#[test]
fn validation_errors_exit_one() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        vec!["cdf", "--matrix", "1,2,2,4", "--beta", "0", "--x", "0,0"],
        vec!["cdf", "--matrix", "1,0,0,1", "--beta", "2", "--x", "0,0"],
        vec!["verify", "--check", "nope"],
        vec!["experiment", "--alpha", "1.5", "--n-list", "10", "--reps", "1"],
        vec!["experiment", "--unknown-flag"],
        vec!["gamma", "--matrix", "1,0,0,1", "--order", "3", "--grid", "-1,1,3"],
    ] {
        assert_eq!(cica(&args, d.path()).status.code(), Some(1), "{args:?}");
    }
    std::fs::write(d.path().join("bad.cfg"), "colour=red\n").unwrap();
    assert_eq!(cica(&["experiment", "--config", "bad.cfg"], d.path()).status.code(), Some(1));
}

#[test]
fn small_experiment_with_config_then_plot() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(
        d.path().join("run.cfg"),
        "rho_list=0.25,0.75\nn_list=50,100\nreps=20\ngrid_points=50\nseed=11\nout=small.csv\n",
    )
    .unwrap();
    let o = cica(&["experiment", "--config", "run.cfg"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.path().join("small.csv")).unwrap();
    assert!(csv.contains("# seed=11\n"));
    assert!(csv.contains("# rho_list=0.25,0.75\n"));
    assert!(!csv.contains("workers"));
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "scenario_id,rho,beta,n,c,N,grid_mode,grid_points,estimate,stderr,seed,wall_ms");
    assert_eq!(rows.len(), 5);
    assert!(rows[1..].iter().all(|r| r.ends_with(",11,0")));

    let o = cica(&["plot", "--in", "small.csv", "--x", "n", "--out", "small.svg"], d.path());
    assert!(o.status.success());
    let svg = std::fs::read_to_string(d.path().join("small.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    cica(&["plot", "--in", "small.csv", "--x", "n", "--out", "again.svg"], d.path());
    assert_eq!(svg, std::fs::read_to_string(d.path().join("again.svg")).unwrap());
}

#[test]
fn gamma_table_and_limit_csv() {
    let d = tempfile::tempdir().unwrap();
    let o = cica(&["gamma", "--matrix", "1,0,0,1", "--order", "1", "--grid", "-1,1,3"], d.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 10);
    let origin = text.lines().find(|l| l.starts_with("0,0,")).unwrap();
    let v: f64 = origin.rsplit(',').next().unwrap().parse().unwrap();
    // identity mixing at the origin: two symmetric placements give nu_cdf(0)
    let c = 0.158_655_253_931_457_05;
    let nu0 = ((1.0 - (-1.0f64).exp()) - 0.5) / c;
    assert!((v - nu0).abs() < 1e-8, "{v} vs {nu0}");

    let o = cica(&["limit", "--n0", "500", "--reps", "20", "--grid-points", "50", "--c-list", "0.5,1,1.5"], d.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let s: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('c'))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(s.len(), 3);
    assert!(s[0] >= s[1] && s[1] >= s[2]);
}

#[test]
fn verify_single_check_passes() {
    let d = tempfile::tempdir().unwrap();
    let o = cica(&["verify", "--check", "lem32", "--out", "checks.csv"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.path().join("checks.csv")).unwrap();
    assert!(csv.contains("check,quantity,value,relation,pass\n"));
    assert!(!csv.contains(",false"));
}
