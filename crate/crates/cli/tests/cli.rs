use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn simnerve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simnerve")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = simnerve(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn demo(dir: &Path) {
    ok(&["demo", "--output-dir", dir.to_str().unwrap()]);
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn demo_pipeline_writes_every_output_listed_in_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    demo(dir.path());
    ok(&["run", "--config", &path(dir.path(), "demo.toml")]);
    let out = dir.path().join("out");
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(outputs.len() >= 20);
    for entry in outputs {
        let file = out.join(entry["file"].as_str().unwrap());
        assert_eq!(fs::metadata(&file).unwrap().len(), entry["bytes"].as_u64().unwrap(), "{}", file.display());
    }
    for name in ["network.json", "network.graphml", "regression.txt", "focal_1.json", "focal_14_scatter.csv"] {
        assert!(out.join(name).exists(), "{name}");
    }
}

#[test]
fn repeated_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    demo(dir.path());
    let config = path(dir.path(), "demo.toml");
    ok(&["run", "--config", &config, "--output-dir", &path(dir.path(), "a")]);
    ok(&["--threads", "1", "run", "--config", &config, "--output-dir", &path(dir.path(), "b")]);
    let read = |sub: &str| -> serde_json::Value {
        serde_json::from_str(&fs::read_to_string(dir.path().join(sub).join("manifest.json")).unwrap()).unwrap()
    };
    let (a, b) = (read("a"), read("b"));
    assert_eq!(a["outputs"], b["outputs"]);
    assert_eq!(a["input_sha256"], b["input_sha256"]);
}

#[test]
fn similarity_pair_reports_components() {
    let dir = tempfile::tempdir().unwrap();
    demo(dir.path());
    let text = ok(&["similarity", "--input", &path(dir.path(), "demo_corpus.csv"), "--pair", "1", "2"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let f = v["functional"].as_f64().unwrap();
    let c = v["cross_capacity"].as_f64().unwrap();
    let whole = v["whole"].as_f64().unwrap();
    let f_within = v["f_within"].as_f64().unwrap();
    assert!(((f + c) / f_within - whole).abs() < 1e-9);

    let missing = simnerve(&["similarity", "--input", &path(dir.path(), "demo_corpus.csv"), "--pair", "1", "999"]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("999"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    demo(dir.path());
    let config = dir.path().join("bad.toml");
    let text = fs::read_to_string(dir.path().join("demo.toml")).unwrap();
    fs::write(&config, format!("{text}resolutoin = 4\n")).unwrap();
    let out = simnerve(&["run", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("resolutoin"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn failed_stage_leaves_no_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    demo(dir.path());
    let config = dir.path().join("broken.toml");
    let text = fs::read_to_string(dir.path().join("demo.toml")).unwrap();
    fs::write(&config, text.replace("lens = \"pca\"", "lens = \"no_such_lens.csv\"")).unwrap();
    let out = simnerve(&["run", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("stage `lens` failed"), "{err}");
    assert!(!dir.path().join("out").exists(), "partial output directory survived");
}

#[test]
fn stages_compose_and_export_in_every_format() {
    let dir = tempfile::tempdir().unwrap();
    demo(dir.path());
    let d = dir.path();
    let corpus = path(d, "demo_corpus.csv");
    ok(&["mapper", "--input", &corpus, "--resolution", "2", "--output", &path(d, "net.json")]);
    ok(&["communities", "--network", &path(d, "net.json"), "--output", &path(d, "comm.csv")]);
    ok(&["layout", "--network", &path(d, "net.json"), "--iterations", "50", "--output", &path(d, "layout.json")]);
    for (format, file) in [("graphml", "n.graphml"), ("dot", "n.dot"), ("json", "n.json"), ("csv", "n.csv")] {
        ok(&[
            "export", "--network", &path(d, "net.json"), "--format", format,
            "--communities", &path(d, "comm.csv"), "--layout", &path(d, "layout.json"),
            "--output", &path(d, file),
        ]);
        assert!(fs::metadata(d.join(file)).unwrap().len() > 0, "{format}");
    }
    assert!(d.join("n_edges.csv").exists());
    let graphml = fs::read_to_string(d.join("n.graphml")).unwrap();
    assert!(graphml.contains("<graphml") && graphml.contains("community"));
    ok(&[
        "render", "--network", &path(d, "net.json"), "--layout", &path(d, "layout.json"),
        "--color-by", "community", "--communities", &path(d, "comm.csv"), "--output", &path(d, "n.svg"),
    ]);
    assert!(fs::read_to_string(d.join("n.svg")).unwrap().starts_with("<svg"));

    ok(&["profiles", "--input", &corpus, "--output", &path(d, "p.csv")]);
    let report = ok(&[
        "regress", "--profiles", &path(d, "p.csv"), "--network", &path(d, "net.json"),
        "--communities", &path(d, "comm.csv"), "--max-model", "2",
    ]);
    assert!(report.contains("Model Fit Measures"));
}

#[test]
fn non_unit_vectors_need_renormalize() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.csv");
    fs::write(&file, "id,if_text,then_text,if_0,if_1,then_0,then_1\n1,a,b,2,0,0,1\n2,c,d,0,1,1,0\n3,e,f,0.6,0.8,0.8,0.6\n").unwrap();
    let f = file.to_str().unwrap();
    assert!(!simnerve(&["ingest", "--input", f]).status.success());
    let report: serde_json::Value = serde_json::from_str(&ok(&["ingest", "--input", f, "--renormalize"])).unwrap();
    assert_eq!(report["renormalized_vectors"], 1);
}
