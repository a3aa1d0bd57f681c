//! End-to-end runs of the `chargeq` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

const CHAIN: &str = r#"{
  "array": {
    "topology": "chain",
    "n": 6,
    "qubit": { "e_c": 100.0, "e_j": 10.0 },
    "coupler": { "variant": "large_jj", "e_j0": 50.0 }
  }
}"#;

const COMMON: &str = r#"{
  "array": {
    "topology": "common_inductance",
    "n": 6,
    "qubit": { "e_c": 100.0, "e_j": 10.0 },
    "coupler": { "variant": "common_inductance", "inductance_nh": 10.0 }
  }
}"#;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Self {
            dir: TempDir::new().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn config(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, args: &[&str], env: &[(&str, &str)]) -> Run {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_chargeq"));
        cmd.args(args)
            .env_remove("CHARGEQ_MAX_DENSE_QUBITS")
            .env_remove("CHARGEQ_MAX_DIAGONAL_QUBITS");
        for (k, v) in env {
            cmd.env(k, v);
        }
        let out = cmd.output().unwrap();
        Run {
            code: out.status.code().unwrap(),
            stdout: String::from_utf8(out.stdout).unwrap(),
            stderr: String::from_utf8(out.stderr).unwrap(),
        }
    }

    fn cmd(&self, sub: &str, config: &Path, extra: &[&str]) -> Run {
        let mut args = vec![sub, "--config", config.to_str().unwrap()];
        args.extend_from_slice(extra);
        self.run(&args, &[])
    }
}

fn merge(base: &str, extra: Value) -> String {
    let mut v: Value = serde_json::from_str(base).unwrap();
    for (k, x) in extra.as_object().unwrap() {
        v[k] = x.clone();
    }
    v.to_string()
}

fn parse(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("bad JSON ({e}): {text}"))
}

/// Key and type structure of a JSON document.
fn skeleton(v: &Value) -> Value {
    match v {
        Value::Null => json!("null"),
        Value::Bool(_) => json!("bool"),
        Value::Number(_) => json!("number"),
        Value::String(_) => json!("string"),
        Value::Array(a) => Value::Array(a.first().map(skeleton).into_iter().collect()),
        Value::Object(m) => Value::Object(m.iter().map(|(k, x)| (k.clone(), skeleton(x))).collect()),
    }
}

/// Compares against `tests/golden/<name>`; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, actual: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    let text = serde_json::to_string_pretty(actual).unwrap() + "\n";
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, &text).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(parse(&expected), *actual, "schema drift in {name}");
}

fn csv_header(text: &str) -> &str {
    text.lines().next().unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn calibrate_chain_gives_quarter_nanosecond() {
    let sb = Sandbox::new();
    let cfg = sb.config("c.json", CHAIN);
    let r = sb.cmd("calibrate", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = parse(&r.stdout);
    let t_s = v["t_s"].as_f64().unwrap();
    assert!((t_s - 0.25).abs() / 0.25 < 0.01, "t_s = {t_s}");
    assert!(v["max_residual"].as_f64().unwrap() < 1e-9);
    golden("calibrate_chain.schema.json", &skeleton(&v));
}

#[test]
fn calibrate_common_reports_maximum_coupling() {
    let sb = Sandbox::new();
    let cfg = sb.config("c.json", COMMON);
    let out = sb.path("cal.json");
    let r = sb.cmd("calibrate", &cfg, &["--out", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    let v = parse(&fs::read_to_string(out).unwrap());
    let max = v["max_coupling_ghz"].as_f64().unwrap();
    assert!((max - 1.53).abs() / 1.53 < 0.01, "max = {max}");
    golden("calibrate_common.schema.json", &skeleton(&v));
}

#[test]
fn infeasible_target_exits_one_with_best_attempt() {
    let sb = Sandbox::new();
    // ħg/4 = 0.3 GHz lies below what the unbiased bonds already provide
    let g = 8.0 * std::f64::consts::PI * 0.3;
    let cfg = sb.config("c.json", &merge(CHAIN, json!({ "calibration": { "g_target": g } })));
    let r = sb.cmd("calibrate", &cfg, &[]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    assert!(r.stderr.contains("infeasible"), "{}", r.stderr);
    assert!(parse(&r.stdout)["max_residual"].as_f64().unwrap() > 1e-9);
}

#[test]
fn malformed_configs_exit_two() {
    let sb = Sandbox::new();
    let cases = [
        ("not json", "<root>"),
        (r#"{"array": {"topology": "ring"}}"#, "array.topology"),
        (r#"{"arrey": {}}"#, "arrey"),
        (
            r#"{"array": {"topology": "chain", "n": 3, "qubit": {"e_c": 100, "e_j": -1},
                "coupler": {"variant": "large_jj", "e_j0": 50}}}"#,
            "array.qubits[0]",
        ),
    ];
    for (i, (text, pointer)) in cases.iter().enumerate() {
        let cfg = sb.config(&format!("bad{i}.json"), text);
        let r = sb.cmd("calibrate", &cfg, &[]);
        assert_eq!(r.code, 2, "case {i}: {}", r.stderr);
        assert!(r.stderr.contains(pointer), "case {i}: {}", r.stderr);
    }
    let r = sb.run(&["calibrate"], &[]);
    assert_eq!(r.code, 2);
    let r = sb.run(
        &["calibrate", "--config", sb.path("missing.json").to_str().unwrap()],
        &[],
    );
    assert_eq!(r.code, 2);
}

#[test]
fn generate_peaks_at_pi() {
    let sb = Sandbox::new();
    let cfg = sb.config("g.json", r#"{"generate": {"n": 8, "topology": "chain", "steps": 256}}"#);
    let out = sb.path("curve.csv");
    let r = sb.cmd("generate", &cfg, &["--out", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = fs::read_to_string(out).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(csv_header(&text), "gt,fidelity_vs_closed_form,norm_check");
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 256);
    let fid: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let best = (0..fid.len()).max_by(|&a, &b| fid[a].total_cmp(&fid[b])).unwrap();
    assert_eq!(best, 128);
    let gt: f64 = rows[128][0].parse().unwrap();
    assert!((gt - std::f64::consts::PI).abs() < 1e-12);
    assert!(fid[128] >= 1.0 - 1e-9);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() < 1e-12));
}

#[test]
fn generate_longrange_curve_is_periodic() {
    let sb = Sandbox::new();
    let cfg = sb.config(
        "g.json",
        r#"{"generate": {"n": 2, "topology": "longrange", "steps": 64, "periods": 2}}"#,
    );
    let r = sb.cmd("generate", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let fid: Vec<f64> = csv_rows(&r.stdout).iter().map(|r| r[1].parse().unwrap()).collect();
    for k in 0..32 {
        assert!((fid[k] - fid[k + 32]).abs() < 1e-12, "k = {k}");
    }
}

#[test]
fn generate_single_step_is_initial_overlap() {
    let sb = Sandbox::new();
    let cfg = sb.config("g.json", r#"{"generate": {"n": 2, "topology": "chain", "steps": 1}}"#);
    let r = sb.cmd("generate", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = csv_rows(&r.stdout);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "0.0");
    assert!((rows[0][1].parse::<f64>().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn resource_guards_exit_three() {
    let sb = Sandbox::new();
    let cfg = sb.config("g.json", r#"{"generate": {"n": 12, "topology": "chain", "steps": 4}}"#);
    assert_eq!(sb.cmd("generate", &cfg, &["--max-qubits", "10"]).code, 3);
    let r = sb.run(
        &["generate", "--config", cfg.to_str().unwrap()],
        &[("CHARGEQ_MAX_DIAGONAL_QUBITS", "11")],
    );
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("limit is 11"), "{}", r.stderr);
    let big = sb.config(
        "big.json",
        r#"{"generate": {"n": 40, "topology": "chain", "steps": 1}}"#,
    );
    assert_eq!(sb.cmd("generate", &big, &[]).code, 3);
}

#[test]
fn verify_reports_every_size() {
    let sb = Sandbox::new();
    let cfg = sb.config(
        "v.json",
        r#"{"verify": {"n_min": 2, "n_max": 6, "random_states": 5, "seed": 4}}"#,
    );
    let r = sb.cmd("verify", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = parse(&r.stdout);
    assert_eq!(v["all_pass"], json!(true));
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 10);
    for e in results {
        let n = e["n"].as_u64().unwrap() as usize;
        assert_eq!(e["entropy"]["cuts_bits"].as_array().unwrap().len(), n - 1);
        assert!(e["generation"]["fidelity_pi"].as_f64().unwrap() >= 1.0 - 1e-9);
    }
    golden("verify.schema.json", &skeleton(&v));
}

#[test]
fn verify_runs_without_config() {
    let sb = Sandbox::new();
    let r = sb.run(&["verify", "--seed", "2"], &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(parse(&r.stdout)["seed"], json!(2));
}

#[test]
fn decohere_headline_ratio() {
    let sb = Sandbox::new();
    let cfg = sb.config("d.json", r#"{"decohere": {"t2_ns": 500.0, "n": 100, "t_s_ns": 0.25}}"#);
    let out = sb.path("d.json.out");
    let r = sb.cmd("decohere", &cfg, &["--out", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = parse(&fs::read_to_string(&out).unwrap());
    assert!((v["cluster_t2"]["value_ns"].as_f64().unwrap() - 5.0).abs() < 1e-12);
    assert!((v["ratio_t2_over_t_s"].as_f64().unwrap() - 20.0).abs() < 1e-10);
    let csv = fs::read_to_string(out.with_extension("csv")).unwrap();
    assert_eq!(csv_rows(&csv).len(), 100);
}

#[test]
fn decohere_single_qubit_matches_its_t2() {
    let sb = Sandbox::new();
    let cfg = sb.config("d.json", r#"{"decohere": {"t2_ns": 500.0}}"#);
    let r = sb.cmd("decohere", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = parse(&r.stdout);
    assert_eq!(v["cluster_t2"]["value_ns"], json!(500.0));
    assert_eq!(v["ratio_t2_over_t_s"], Value::Null);
}

#[test]
fn decohere_zero_noise_serializes_sentinel() {
    let sb = Sandbox::new();
    let cfg = sb.config(
        "d.json",
        r#"{"decohere": {"profiles": [
            {"epsilon": 0.01, "e_bar": 1.0, "spectrum": {"variant": "white", "s0": 0.0}}
        ], "t_s_ns": 0.25}}"#,
    );
    let r = sb.cmd("decohere", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = parse(&r.stdout);
    assert_eq!(v["cluster_t2"], json!({"value_ns": null, "infinite": true}));
    assert_eq!(v["qubits"][0]["rates"]["t_phi"]["infinite"], json!(true));
    assert_eq!(v["ratio_t2_over_t_s"], Value::Null);
    assert!(!r.stdout.contains("Infinity"));
}

#[test]
fn decohere_from_array() {
    let sb = Sandbox::new();
    let text = merge(
        CHAIN,
        json!({ "decohere": {
            "spectrum": { "variant": "white", "s0": 0.008 },
            "epsilon_ratio": 0.01
        }}),
    );
    let cfg = sb.config("d.json", &text);
    let out = sb.path("dec.json");
    let r = sb.cmd("decohere", &cfg, &["--out", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = parse(&fs::read_to_string(&out).unwrap());
    assert_eq!(v["source"], json!("array"));
    assert!(v["ratio_t2_over_t_s"].as_f64().unwrap() > 1.0);
    golden("decohere.schema.json", &skeleton(&v));
    let csv = fs::read_to_string(out.with_extension("csv")).unwrap();
    assert_eq!(
        csv_header(&csv),
        "index,epsilon,e_bar,gamma1,t_phi_ns,t_phi_infinite,gamma_phi,gamma2,t2_ns,t2_infinite"
    );
}

#[test]
fn unreachable_dephasing_time_exits_one() {
    // ohmic η grows only logarithmically in τ; at this strength it never reaches 1
    let sb = Sandbox::new();
    let cfg = sb.config(
        "d.json",
        r#"{"decohere": {"profiles": [
            {"epsilon": 0.01, "e_bar": 1.0, "spectrum": {"variant": "ohmic", "alpha": 1e-4, "cutoff": 100.0}}
        ]}}"#,
    );
    let r = sb.cmd("decohere", &cfg, &[]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    assert!(r.stderr.contains("numerical"), "{}", r.stderr);
}

#[test]
fn decohere_needs_one_source() {
    let sb = Sandbox::new();
    let cfg = sb.config(
        "d.json",
        r#"{"decohere": {"t2_ns": 1.0, "spectrum": {"variant": "white", "s0": 1.0}}}"#,
    );
    assert_eq!(sb.cmd("decohere", &cfg, &[]).code, 2);
}

fn sweep_config(samples: usize) -> String {
    merge(
        CHAIN,
        json!({ "sweep": {
            "kind": "chain",
            "variation": { "e_j": 0.1, "samples": samples, "seed": 5 }
        }}),
    )
}

#[test]
fn sweep_is_deterministic_and_seedable() {
    let sb = Sandbox::new();
    let cfg = sb.config("s.json", &sweep_config(40));
    let a = sb.cmd("sweep", &cfg, &[]);
    let b = sb.cmd("sweep", &cfg, &[]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    let c = sb.cmd("sweep", &cfg, &["--seed", "6"]);
    assert_ne!(a.stdout, c.stdout);
    let v = parse(&c.stdout);
    assert_eq!(v["variation"]["seed"], json!(6));
    assert!(v["fidelity"]["min"].as_f64().unwrap() > 1.0 - 1e-6);
}

#[test]
fn sweep_writes_flat_csv() {
    let sb = Sandbox::new();
    let cfg = sb.config("s.json", &sweep_config(25));
    let out = sb.path("sweep.json");
    let r = sb.cmd("sweep", &cfg, &["--out", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = parse(&fs::read_to_string(&out).unwrap());
    golden("sweep_chain.schema.json", &skeleton(&v));
    let csv = fs::read_to_string(out.with_extension("csv")).unwrap();
    assert_eq!(
        csv_header(&csv),
        "index,calibrated,max_residual,achieved_g,t_s,fidelity,t2_ns,e_j,coupler,error"
    );
    let rows = csv_rows(&csv);
    assert_eq!(rows.len(), 25);
    assert_eq!(rows[0][7].split(';').count(), 6);
}

#[test]
fn sweep_common_and_t2() {
    let sb = Sandbox::new();
    let common = merge(
        COMMON,
        json!({ "sweep": {
            "kind": "common_inductance",
            "variation": { "e_j": 0.05, "inductance": 0.05, "samples": 20, "seed": 1 }
        }}),
    );
    let r = sb.cmd("sweep", &sb.config("c.json", &common), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = parse(&r.stdout);
    assert_eq!(v["kind"], json!("common_inductance"));
    assert_eq!(v["fidelity"]["count"], json!(20));

    let t2 = merge(
        CHAIN,
        json!({ "sweep": {
            "kind": "t2",
            "spectrum": { "variant": "white", "s0": 0.008 },
            "variation": { "e_j": 0.1, "samples": 50, "seed": 11 }
        }}),
    );
    let r = sb.cmd("sweep", &sb.config("t.json", &t2), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = parse(&r.stdout);
    assert!(v["t2_ns"]["cv"].as_f64().unwrap() < 0.01);
}

#[test]
fn sweep_kind_must_match_topology() {
    let sb = Sandbox::new();
    let text = merge(COMMON, json!({ "sweep": { "kind": "chain" } }));
    assert_eq!(sb.cmd("sweep", &sb.config("s.json", &text), &[]).code, 2);
}

#[test]
fn bench_reports_timings() {
    let sb = Sandbox::new();
    let cfg = sb.config("b.json", r#"{"bench": {"n_min": 3, "n_max": 5, "repeats": 1}}"#);
    let out = sb.path("bench.json");
    let r = sb.cmd("bench", &cfg, &["--out", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = parse(&fs::read_to_string(&out).unwrap());
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert_eq!(v["speedup_ok"], Value::Null);
    for row in v["rows"].as_array().unwrap() {
        assert!(row["agreement"].as_f64().unwrap() > 1.0 - 1e-10);
    }
    golden("bench.schema.json", &skeleton(&v));
    let csv = fs::read_to_string(out.with_extension("csv")).unwrap();
    assert_eq!(csv_header(&csv), "n,diagonal_s,dense_s,speedup,agreement");
}

#[test]
fn bench_n10_meets_speedup() {
    let sb = Sandbox::new();
    let cfg = sb.config("b.json", r#"{"bench": {"n_min": 10, "n_max": 10, "repeats": 1}}"#);
    let r = sb.cmd("bench", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(parse(&r.stdout)["speedup_ok"], json!(true));
}
