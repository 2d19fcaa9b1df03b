use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ffmirror::ScenarioConfig;

const SWEEP: &str = r#"
name = "sweep"
engine = "gaussian"
variants = ["law", "conditional", "feedforward", "recovered"]
outputs = ["log_negativity", "purity", "inefficiency"]
sample_times = { step = 0.25 }

[params]
t_final = 2.0
registers = 2

[[sweep]]
axis = "eta"
values = [0.5, 1.0, 2.0, 5.0]
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ffmirror"));
    c.env_remove("FFMIRROR_WORKERS");
    c
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], workers: Option<&str>) -> Output {
    let mut c = bin();
    c.args(args);
    if let Some(w) = workers {
        c.env("FFMIRROR_WORKERS", w);
    }
    c.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn body(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn list_presets() {
    let o = run(&["list-presets"], None);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["fig2", "fig3a", "fig3b", "fig3c", "fig4", "figS2", "figS5", "figS10"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
    assert_eq!(text.lines().count(), 13);
}

#[test]
fn run_writes_tables_with_consistent_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.toml", SWEEP);
    let out = dir.path().join("out");
    let o = run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let meta: serde_json::Value = serde_json::from_str(&body(&out.join("sweep.metadata.json"))).unwrap();
    let hash = meta["config_hash"].as_str().unwrap();
    let reparsed = ScenarioConfig::load(&out.join(meta["config_file"].as_str().unwrap())).unwrap();
    assert_eq!(reparsed.hash(), hash);
    assert_eq!(ScenarioConfig::load(&cfg).unwrap().hash(), hash);
    assert_eq!(meta["time_unit"], "1/gamma");
    assert_eq!(meta["entanglement_unit"], "nats");

    let files = meta["files"].as_array().unwrap();
    assert_eq!(files.len(), 3);
    for f in files {
        let text = body(&out.join(f.as_str().unwrap()));
        let mut lines = text.lines();
        let comment = lines.next().unwrap();
        assert!(comment.starts_with('#') && comment.contains("nats") && comment.contains("1/gamma"));
        assert!(comment.ends_with(hash));
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header[0], "t");
        assert_eq!(header[header.len() - 2], "eta");
        assert_eq!(header[header.len() - 1], "config_hash");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 9 * 4);
        for r in rows {
            assert_eq!(r.rsplit(',').next().unwrap(), hash);
        }
    }
    let en = body(&out.join("sweep_log_negativity.csv"));
    assert!(en.lines().nth(1).unwrap().contains("log_negativity_recovered"));
}

#[test]
fn output_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.toml", SWEEP);
    let mut bodies = Vec::new();
    for w in ["1", "4"] {
        let out = dir.path().join(format!("out{w}"));
        let o = run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], Some(w));
        assert_eq!(code(&o), 0);
        bodies.push(
            ["log_negativity", "purity", "inefficiency"]
                .map(|m| std::fs::read(out.join(format!("sweep_{m}.csv"))).unwrap()),
        );
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn config_errors_exit_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cases = [
        ("syntax.toml", "name = \"x\"\nengine = "),
        ("variant.toml", &SWEEP.replace("\"recovered\"", "\"teleport\"")),
        ("axis.toml", &SWEEP.replace("axis = \"eta\"", "axis = \"warp\"")),
        ("times.toml", &SWEEP.replace("step = 0.25", "values = [1.0, 3.0]")),
        ("lattice.toml", &SWEEP.replace("registers = 2", "registers = 2\nsites = 3")),
    ];
    for (name, text) in cases {
        let cfg = write(dir.path(), name, text);
        let o = run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
        assert_eq!(code(&o), 2, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!out.exists(), "{name} left output behind");
    }
    assert_eq!(code(&run(&["run", "/nonexistent/config.toml"], None)), 2);
    assert_eq!(code(&run(&["preset", "fig99"], None)), 2);
    assert_eq!(code(&run(&["list-presets"], Some("zero"))), 0);
    let cfg = write(dir.path(), "ok.toml", SWEEP);
    assert_eq!(code(&run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], Some("zero"))), 2);
    assert!(!out.exists());
}

#[test]
fn runtime_failures_exit_3_and_name_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "unstable.toml",
        r#"
name = "unstable"
engine = "dense"
variants = ["qubit_register"]
outputs = ["log_negativity"]
sample_times = { values = [20.0] }
[params]
d = 4
eta = 3.0
t_final = 20.0
[integrator]
dense_dt = 0.5
"#,
    );
    let out = dir.path().join("out");
    let o = run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("eta=3") && err.contains("d=4"), "{err}");
    assert!(!out.exists());
}

#[test]
fn compare_self_law_and_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.toml", SWEEP);
    let out = dir.path().join("out");
    assert_eq!(code(&run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None)), 0);
    let en = out.join("sweep_log_negativity.csv");
    let en = en.to_str().unwrap();

    let o = run(&["compare", en, en, "--tol", "0"], None);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("max deviation 0.000e0"), "{text}");

    let law = ["--pair", "log_negativity_law=log_negativity_conditional"];
    let o = run(&[&["compare", en, en, "--tol", "1e-6"][..], &law[..]].concat(), None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));

    let ff = ["--pair", "log_negativity_conditional=log_negativity_feedforward"];
    assert_eq!(code(&run(&[&["compare", en, en, "--tol", "1e-6"][..], &ff[..]].concat(), None)), 1);

    let purity = out.join("sweep_purity.csv");
    assert_eq!(code(&run(&["compare", en, purity.to_str().unwrap(), "--tol", "1"], None)), 2);
    assert_eq!(code(&run(&["compare", en, en, "--tol", "loose"], None)), 2);
}

#[test]
fn gaussian_and_dense_engines_agree_at_short_times() {
    let dir = tempfile::tempdir().unwrap();
    let common = r#"
variants = ["dephasing", "feedforward"]
outputs = ["log_negativity"]
sample_times = { values = [0.1, 0.2, 0.3] }
[params]
t_final = 0.3
n_tr = 8
[integrator]
dense_dt = 0.01
"#;
    let g = write(dir.path(), "g.toml", &format!("name = \"g\"\nengine = \"gaussian\"\n{common}"));
    let d = write(dir.path(), "d.toml", &format!("name = \"d\"\nengine = \"dense\"\n{common}"));
    for c in [&g, &d] {
        let o = run(&["run", c.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], None);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = dir.path().join("g_log_negativity.csv");
    let b = dir.path().join("d_log_negativity.csv");
    let o = run(&["compare", a.to_str().unwrap(), b.to_str().unwrap(), "--tol", "2e-2"], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn preset_show_round_trips() {
    let o = run(&["preset", "fig3c", "--full", "--show"], None);
    assert_eq!(code(&o), 0);
    let c = ScenarioConfig::from_toml(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!((c.params.sites, c.params.registers), (32, 15));
    assert!(c.stop_rule);
}
