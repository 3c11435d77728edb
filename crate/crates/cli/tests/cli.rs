use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn slelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slelab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exponents_table_has_hausdorff_row() {
    let o = slelab(&["exponents", "--kappa", "2", "--s-grid", "-0.4:0.9:0.05", "--quiet"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 27);
    let row = out.lines().find(|l| l.starts_with("s=0.5 ")).expect("row s=0.5");
    assert!(row.contains(" xi=1.25 "), "{row}");
}

#[test]
fn martingale_check_example_passes() {
    let o = slelab(&[
        "martingale-check", "--kappa", "2", "--rho", "2", "--z", "0.5+0.2i", "--t", "0.5", "--samples", "10000", "--seed", "7",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("mean_ratio="));
}

#[test]
fn output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("m{threads}.csv"));
        let o = slelab(&[
            "martingale-check", "--kappa", "2", "--rho", "2", "--z", "0.5+0.2i", "--t", "0.5", "--samples", "500",
            "--steps", "2000", "--seed", "7", "--threads", threads, "--output", path_str(&out), "--quiet",
        ]);
        assert!(o.status.success());
        files.push(fs::read(&out).unwrap());
    }
    assert_eq!(files[0], files[1]);
    let text = String::from_utf8(files[0].clone()).unwrap();
    assert!(text.starts_with("# schema_version: 1\n# version: slelab "));
    assert!(text.contains("\"subcommand\":\"martingale-check\""));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "kappa = 3\ns-grid = 0.5\n").unwrap();
    let from_file = stdout(&slelab(&["exponents", "--config", path_str(&conf), "--quiet"]));
    let overridden = stdout(&slelab(&["exponents", "--config", path_str(&conf), "--kappa", "2", "--quiet"]));
    assert!(overridden.contains(" xi=1.25 "));
    assert_ne!(from_file, overridden);
    let js = dir.path().join("run.json");
    fs::write(&js, r#"{"kappa": 2, "s_grid": [0.0, 0.5]}"#).unwrap();
    assert_eq!(stdout(&slelab(&["exponents", "--config", path_str(&js), "--quiet"])).lines().count(), 2);
}

#[test]
fn configuration_errors_exit_with_two() {
    assert_eq!(slelab(&["exponents", "--kappa", "-1"]).status.code(), Some(2));
    assert_eq!(slelab(&["exponents", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(slelab(&["mf-verify", "--kappa", "6"]).status.code(), Some(2));
    assert_eq!(slelab(&["ims-verify", "--a-grid", "5"]).status.code(), Some(2));
    assert_eq!(slelab(&["gff-cov", "--z", "1.5"]).status.code(), Some(2));
    assert_eq!(slelab(&["martingale-check", "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn failed_guard_exits_with_three() {
    let o = slelab(&["ims-verify", "--zeta", "5", "--steps", "64", "--nodes", "16", "--realizations", "1", "--quiet"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn json_output_embeds_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.json");
    let o = slelab(&[
        "gff-cov", "--z", "0.7i", "--w", "0.2", "--samples", "2000", "--format", "json", "--output", path_str(&out), "--quiet",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["config"]["z"], "0.7i");
    assert!(v["result"]["rows"][0]["exact"].as_f64().unwrap() < 0.0);
}

#[test]
fn dimension_csv_has_footer() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let o = slelab(&["dimension", "--steps", "4000", "--output", path_str(&out), "--quiet"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "mesh,count");
    assert_eq!(data[data.len() - 2], "dimension,stderr,predicted");
    assert!(data[data.len() - 1].ends_with(",1.25"));
}

#[test]
fn theta_and_trace_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("theta.csv");
    let o = slelab(&[
        "theta-stationary", "--steps", "20000", "--horizon", "200", "--substeps", "2", "--bins", "10", "--output",
        path_str(&out), "--quiet",
    ]);
    assert!(o.status.success());
    assert!(fs::read_to_string(&out).unwrap().contains("theta_bin,empirical,analytic"));
    let out = dir.path().join("trace.csv");
    let o = slelab(&["trace", "--steps", "100", "--frame", "disk", "--output", path_str(&out), "--quiet"]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 102);
}

#[test]
fn every_subcommand_documents_its_flags() {
    for sub in ["exponents", "trace", "mf-verify", "ims-verify", "theta-stationary", "martingale-check", "gff-cov", "dimension"] {
        let o = slelab(&[sub, "--help"]);
        assert!(o.status.success());
        let help = stdout(&o);
        for flag in ["--seed", "--threads", "--output", "--format", "--config"] {
            assert!(help.contains(flag), "{sub} help lacks {flag}");
        }
    }
}
