use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mplab"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mplab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).arg("--out").arg("out").args(args).output().unwrap()
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const J: &str = r#"{"dim":1,"entries":[[0,1],[-1,0]]}"#;

#[test]
fn euler_on_j() {
    let dir = scratch("euler");
    std::fs::write(dir.join("J.json"), J).unwrap();
    let out = run(&dir, &["euler", "--input", "J.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(dir.join("out/euler.json"));
    assert_eq!(v["sigma"], serde_json::json!([1.0]));
    assert_eq!(v["U"], serde_json::json!([[0.0, -1.0], [1.0, 0.0]]));
    assert_eq!(v["pass"], true);
}

#[test]
fn euler_reads_csv() {
    let dir = scratch("csv");
    std::fs::write(dir.join("S.csv"), "2,0\n0,0.5\n").unwrap();
    let out = run(&dir, &["euler", "--input", "S.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(dir.join("out/euler.json"));
    assert!((v["sigma"][0].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn malformed_input_names_path_and_field() {
    let dir = scratch("bad");
    std::fs::write(dir.join("bad.json"), r#"{"dim":1,"entries":[[0,1],[-1,"x"]]}"#).unwrap();
    let out = run(&dir, &["euler", "--input", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json") && err.contains("entries"), "{err}");
    assert!(!dir.join("out/euler.json").exists());

    std::fs::write(dir.join("bad.csv"), "1,0\n0,oops\n").unwrap();
    let out = run(&dir, &["euler", "--input", "bad.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.csv") && err.contains("line 2"), "{err}");
}

#[test]
fn non_symplectic_input_fails_the_check() {
    let dir = scratch("nonsymp");
    std::fs::write(dir.join("A.json"), r#"{"dim":1,"entries":[[1,1],[0,2]]}"#).unwrap();
    let out = run(&dir, &["euler", "--input", "A.json"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = bin().args(["euler", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dry_run_writes_nothing() {
    let dir = scratch("dry");
    let out = run(&dir, &["--dry-run", "flow", "--flow", "free-particle", "--t", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!dir.join("out").exists());
    let out = run(&dir, &["--dry-run", "confine", "--s", "1", "--eps", "0.5", "--sigma-min", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flow_free_particle_at_one() {
    let dir = scratch("flow");
    let out = run(&dir, &["flow", "--flow", "free-particle", "--t", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(dir.join("out/flow.json"));
    let s = v["sigma"][0].as_f64().unwrap();
    assert!((s - (1.0 + 2f64.sqrt())).abs() < 1e-12, "{s}");
}

#[test]
fn config_is_overridden_by_flags() {
    let dir = scratch("config");
    std::fs::write(dir.join("c.json"), r#"{"flow":{"flow":"free-particle","t":3.0}}"#).unwrap();
    let out = run(&dir, &["--config", "c.json", "flow"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let from_config = json(dir.join("out/flow.json"))["sigma"][0].as_f64().unwrap();
    let out = run(&dir, &["--config", "c.json", "flow", "--t", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let overridden = json(dir.join("out/flow.json"))["sigma"][0].as_f64().unwrap();
    let exact = |t: f64| {
        let u = 2.0 * t;
        (u * u / 2.0 + 1.0 + u * (u * u / 4.0 + 1.0).sqrt()).sqrt()
    };
    assert!((from_config - exact(3.0)).abs() < 1e-10);
    assert!((overridden - exact(1.0)).abs() < 1e-10);
}

#[test]
fn spreading_plot_free_particle() {
    let dir = scratch("plot-free");
    let out = run(&dir, &["spreading-plot", "--flow", "free-particle", "--times", "0.5,1,2,4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(dir.join("out/spreading.json"));
    let frames = v.as_array().unwrap();
    assert_eq!(frames.len(), 4);
    let mut last = 0.0;
    for f in frames {
        let (major, minor, sigma) =
            (f["major"].as_f64().unwrap(), f["minor"].as_f64().unwrap(), f["sigma"].as_f64().unwrap());
        assert!((major / minor - sigma).abs() < 1e-9 * sigma);
        assert!(major / minor > last);
        last = major / minor;
    }
    let svg = std::fs::read_to_string(dir.join("out/spreading.svg")).unwrap();
    assert!(svg.contains("<svg"));
}

#[test]
fn spreading_plot_oscillator_full_period() {
    let dir = scratch("plot-ho");
    let out = run(
        &dir,
        &["spreading-plot", "--flow", "ho", "--m", "1.7939", "--omega", "1.7762", "--times-alpha", "0.5,1"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(dir.join("out/spreading.json"));
    let frames = v.as_array().unwrap();
    let d = frames[1]["distance_to_unit_disk"].as_f64().unwrap();
    assert!(d < 1e-9, "{d}");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = scratch("repeat");
    let cases: [(&[&str], &str); 3] = [
        (&["verify", "--lemma", "conv-lemma-1", "--trials", "40", "--seed", "7"], "out/verify-conv-lemma-1.json"),
        (&["spreading-plot", "--flow", "free-particle", "--times", "1,2"], "out/spreading.svg"),
        (&["stft", "--gaussian", "1", "--n", "64", "--L", "8"], "out/stft.csv"),
    ];
    for (args, file) in cases {
        assert_eq!(run(&dir, args).status.code(), Some(0));
        let a = std::fs::read(dir.join(file)).unwrap();
        assert_eq!(run(&dir, args).status.code(), Some(0));
        let b = std::fs::read(dir.join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn verify_exit_codes() {
    let dir = scratch("verify");
    let ok = run(&dir, &["verify", "--lemma", "conv-lemma-1", "--trials", "50"]);
    assert_eq!(ok.status.code(), Some(0));
    let v = json(dir.join("out/verify-conv-lemma-1.json"));
    assert_eq!(v["violations"], 0);
    let bad = run(&dir, &["verify", "--lemma", "no-such-lemma"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn constants_and_decay_fit() {
    let dir = scratch("decay");
    let out = run(&dir, &["constants", "--s", "1", "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(dir.join("out/constants.json"));
    assert!(v["c_eps_s"].as_f64().unwrap() > 0.0);
    let mut csv = String::from("x,value\n");
    for k in 0..40 {
        let x = k as f64 * 0.25;
        csv.push_str(&format!("{x},{}\n", 3.0 * (-0.7 * x).exp()));
    }
    std::fs::write(dir.join("samples.csv"), csv).unwrap();
    let out = run(&dir, &["decay-fit", "--input", "samples.csv", "--s", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(dir.join("out/decay_fit.json"));
    assert!((v["delta"].as_f64().unwrap() - 0.7).abs() < 1e-6, "{v}");
}
