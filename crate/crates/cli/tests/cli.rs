use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wicklab(args: &[&str]) -> Output {
    wicklab_env(args, &[])
}

fn wicklab_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wicklab"));
    cmd.args(args).env_remove("WICKLAB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn params_prints_the_window() {
    let o = wicklab(&["params", "--d", "1", "--k", "2", "--alpha", "0.5", "--beta", "0.4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("admissible, sigma in (0, 0.4)"), "{}", stdout(&o));
    let o = wicklab(&["params", "--alpha", "0.2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("rejected"));
}

#[test]
fn fit_recovers_a_synthetic_slope() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    let mut text = String::from("shell_or_n,estimate,stderr,samples\n");
    for m in 0..=256i64 {
        let b = (1.0 + (m * m) as f64).sqrt();
        text.push_str(&format!("n={m},{},0,0\n", b.powf(-3.0)));
    }
    fs::write(&table, text).unwrap();
    let o = wicklab(&["fit", "--input", path(&table)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("slope -3.000"), "{}", stdout(&o));
}

#[test]
fn missing_flag_is_named() {
    let o = wicklab(&["fit"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--input"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [&["nonsense"][..], &["params", "--bta", "0.4"], &["moments", "--N", "ten"], &["moments", "--method", "magic"]] {
        let o = wicklab(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
    let o = wicklab(&["params", "--bta", "0.4"]);
    assert!(stderr(&o).contains("--beta"), "{}", stderr(&o));
    let o = wicklab_env(&["params"], &[("WICKLAB_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("out");
    fs::write(&cfg, "# data\nbeta = 0.4\nN = 8   # small box\n").unwrap();
    let o = wicklab(&["sample", "--config", path(&cfg), "--beta", "0.45", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let written = fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(written.contains("beta = 0.45\n") && written.contains("N = 8\n"), "{written}");
    assert!(fs::read_to_string(out.join("VERSION")).unwrap().starts_with("wicklab "));
    assert!(out.join("z.wlf").exists());
    assert!(stdout(&o).contains("# seed = 0"));

    // Feeding the written config back reproduces it byte for byte.
    let again = dir.path().join("again");
    fs::write(dir.path().join("copy.cfg"), written.replace(path(&out), path(&again))).unwrap();
    let o = wicklab(&["sample", "--config", path(&dir.path().join("copy.cfg"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read(out.join("z.wlf")).unwrap(), fs::read(again.join("z.wlf")).unwrap());
    let second = fs::read_to_string(again.join("config.txt")).unwrap();
    assert_eq!(second, written.replace(path(&out), path(&again)));
}

#[test]
fn empty_config_gives_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.cfg");
    fs::write(&cfg, "").unwrap();
    let o = wicklab(&["params", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("# beta = 0.4\n"));
}

#[test]
fn bad_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "beta = 0.4\nk = 2\nbeta = 0.5\n").unwrap();
    let o = wicklab(&["params", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3") && stderr(&o).contains("duplicate"), "{}", stderr(&o));

    fs::write(&cfg, "alpah = 0.5\n").unwrap();
    let o = wicklab(&["params", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("did you mean 'alpha'"), "{}", stderr(&o));

    fs::write(&cfg, "k = 2\nthis line has no equals sign\n").unwrap();
    let o = wicklab(&["params", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn monte_carlo_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = wicklab_env(
            &["moments", "--N", "16", "--method", "mc", "--samples", "100", "--seed", "5", "--out", path(&out)],
            &[("WICKLAB_THREADS", threads)],
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read(out.join("moments.csv")).unwrap()
    };
    let a = run("a", "1");
    assert_eq!(a, run("b", "1"));
    assert_eq!(a, run("c", "3"));
}

#[test]
fn exact_moments_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let o = wicklab(&["moments", "--N", "256", "--object", "wick", "--ell", "2", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = wicklab(&["fit", "--input", path(&out.join("moments.csv"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("slope -0."), "{}", stdout(&o));
    let o = wicklab(&["report", "--out", path(&out)]);
    assert!(stdout(&o).contains("moments.csv: 257 rows"), "{}", stdout(&o));
}

#[test]
fn checks_and_solvers_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let cases: Vec<Vec<String>> = vec![
        vec!["prodcheck".into(), "--N".into(), "8".into(), "--out".into(), out("p")],
        vec![
            "prodcheck".into(),
            "--N".into(),
            "2".into(),
            "--check".into(),
            "decomposition".into(),
            "--factors".into(),
            "wick:2,z".into(),
            "--out".into(),
            out("q"),
        ],
        vec!["counting".into(), "--R".into(), "4096".into(), "--hi".into(), "64".into(), "--out".into(), out("c")],
        vec!["wick".into(), "--N".into(), "8".into(), "--out".into(), out("w")],
        vec!["solve".into(), "--N".into(), "8".into(), "--T".into(), "0.2".into(), "--out".into(), out("s")],
        vec![
            "converge".into(),
            "--ladder".into(),
            "4,8".into(),
            "--T".into(),
            "0.2".into(),
            "--out".into(),
            out("v"),
        ],
    ];
    for args in &cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = wicklab(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    }
    let p = fs::read_to_string(dir.path().join("p/prodcheck.csv")).unwrap();
    assert!(p.starts_with("n,lhs,lhs_stderr,rhs,ratio\n"));
    assert!(fs::read_to_string(dir.path().join("v/converge.csv")).unwrap().starts_with("N,diff_norm,rate\n"));
    assert!(dir.path().join("s/v.wlf").exists());
}

#[test]
fn runtime_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = wicklab(&["solve", "--N", "8", "--T", "0.2", "--tol", "1e-300", "--max_iter", "2", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("did not converge"));
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "wrong,header\n1,2\n").unwrap();
    let o = wicklab(&["fit", "--input", path(&bad)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}
