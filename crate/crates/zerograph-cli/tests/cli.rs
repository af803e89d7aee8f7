//! End-to-end checks of the binary: exit codes, determinism, export/import
//! round trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zerograph"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("zerograph-cli-test-{}-{}", std::process::id(), name));
    p
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["reproduce", "theorem2", "--n", "99"]).status.code(), Some(2));
    assert_eq!(run(&["search", "--graph", "missing.json"]).status.code(), Some(2));
    assert_eq!(run(&["search", "--graph", "ln"]).status.code(), Some(2)); // needs --n
    assert_eq!(run(&["search", "--graph", "l0", "--starts", "0"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["export", "--what", "nonsense"]).status.code(), Some(2));
}

#[test]
fn search_l0_reports_the_gap_and_is_deterministic() {
    let a = run(&["search", "--graph", "l0", "--starts", "60", "--seed", "42"]);
    assert_eq!(a.status.code(), Some(0));
    let b = run(&["search", "--graph", "l0", "--starts", "60", "--seed", "42"]);
    assert_eq!(a.stdout, b.stdout, "identical command lines must produce identical bytes");

    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["graph_dim"], 5);
    assert_eq!(report["starts"], 60);
    assert_eq!(report["seed"], 42);
    let best = report["best_value"].as_f64().unwrap();
    assert!((best - 0.0732233047).abs() < 1e-6, "best {best}");
    assert!(report["phi"]["rows"] == 4 && report["psi"]["rows"] == 4);
    assert!(report["converged_fraction"].is_number());
}

#[test]
fn search_tensor_square_finds_a_witness() {
    let out = run(&["search", "--graph", "l0sq", "--starts", "100", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["graph_dim"], 25);
    assert!(report["best_value"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn reproduce_corollary1_passes_and_writes_a_report() {
    let path = tmp_path("c1.json");
    let out = bin()
        .args([
            "reproduce",
            "corollary1",
            "--t",
            "0",
            "--t",
            "1.57",
            "--starts",
            "60",
            "--seed",
            "42",
            "--out",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["schema"], "1");
    assert_eq!(report["capacity_bound_bits"], 1.0);
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    std::fs::remove_file(&path).ok();
}

#[test]
fn reproduce_theorem2_reports_log_n_bits() {
    let out = run(&[
        "reproduce", "theorem2", "--n", "3", "--t", "0.7", "--starts", "60", "--seed", "42",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let bits = report["capacity_bound_bits"].as_f64().unwrap();
    assert!((bits - 3f64.log2()).abs() < 1e-12);
    assert_eq!(report["construction"]["env_dim"], 4);
}

#[test]
fn export_round_trips_and_is_byte_stable() {
    let povm_a = tmp_path("povm-a.json");
    let povm_b = tmp_path("povm-b.json");
    for p in [&povm_a, &povm_b] {
        let out = bin().args(["export", "--what", "povm", "--out"]).arg(p).output().unwrap();
        assert_eq!(out.status.code(), Some(0));
    }
    let bytes_a = std::fs::read(&povm_a).unwrap();
    assert_eq!(bytes_a, std::fs::read(&povm_b).unwrap());
    // five effects summing to the identity on re-import
    let v: serde_json::Value = serde_json::from_slice(&bytes_a).unwrap();
    assert_eq!(v["ops"].as_array().unwrap().len(), 5);

    let kraus = tmp_path("kraus.json");
    let out = bin().args(["export", "--what", "kraus", "--out"]).arg(&kraus).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&kraus).unwrap()).unwrap();
    assert_eq!(v["dim_in"], 4);
    assert_eq!(v["dim_out"], 12);
    assert_eq!(v["kraus"].as_array().unwrap().len(), 3);

    for p in [&povm_a, &povm_b, &kraus] {
        std::fs::remove_file(p).ok();
    }
}

#[test]
fn exported_graph_file_feeds_back_into_search() {
    let graph = tmp_path("graph-l0.json");
    let out = bin()
        .args(["export", "--what", "graph-l0", "--out"])
        .arg(&graph)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = bin()
        .args(["search", "--graph"])
        .arg(&graph)
        .args(["--starts", "40", "--seed", "42"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["graph_dim"], 5);
    assert!(report["best_value"].as_f64().unwrap() > 1e-4);
    std::fs::remove_file(&graph).ok();
}

#[test]
fn exported_graph_ln_has_formula_many_generators() {
    let graph = tmp_path("graph-ln4.json");
    let out = bin()
        .args(["export", "--what", "graph-ln", "--n", "4", "--out"])
        .arg(&graph)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&graph).unwrap()).unwrap();
    // 4 block slots + 12 coupling slots; the file re-spans to dimension 16
    assert_eq!(v["generators"].as_array().unwrap().len(), 16);
    assert_eq!(v["ambient_dim"], 8);
    std::fs::remove_file(&graph).ok();
}

#[test]
fn results_do_not_depend_on_the_thread_count() {
    let parallel = run(&["search", "--graph", "l0", "--starts", "40", "--seed", "9"]);
    assert_eq!(parallel.status.code(), Some(0));
    let serial = bin()
        .args(["search", "--graph", "l0", "--starts", "40", "--seed", "9"])
        .env("ZEROGRAPH_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(serial.status.code(), Some(0));
    assert_eq!(parallel.stdout, serial.stdout);
}

#[test]
fn povm_check_on_the_builtin_fixture() {
    let out = run(&["povm-check", "--starts", "60", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["dim"], 4);
    assert_eq!(v["outcomes"], 5);
    assert_eq!(v["sharp"], false);
    assert_eq!(v["indistinguishable_witness_found"], false);
}

#[test]
fn povm_check_rejects_invalid_observables() {
    let path = tmp_path("bad-obs.json");
    // one effect, half the identity: not a resolution
    std::fs::write(
        &path,
        "{\"dim\":2,\"effects\":[{\"rows\":2,\"cols\":2,\"data\":[[0.5,0],[0,0],[0,0],[0.5,0]]}]}",
    )
    .unwrap();
    let out = bin().args(["povm-check", "--file"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_file(&path).ok();

    let out = bin()
        .args(["povm-check", "--file"])
        .arg(Path::new("does-not-exist.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
