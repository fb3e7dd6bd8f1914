use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
[products]
count = 4

[agent]
hidden = [8]
epochs = 1
batch_size = 16

[demos]
periods = 20
split = 10

[field]
periods = 5
tau_index = 5
products_per_group = 3

[sweep]
gamma = [0.5, 0.9]
"#;

fn dynprice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynprice"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("small.toml");
    fs::write(&path, SMALL).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn generate_writes_demonstrations() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("gen");
    let o = dynprice(&[
        "generate",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // 4 products x 19 transitions + header
    assert_eq!(
        fs::read_to_string(out.join("demos.csv"))
            .unwrap()
            .lines()
            .count(),
        1 + 4 * 19
    );
    assert!(out.join("profiles.csv").exists());
}

#[test]
fn sweep_is_byte_identical_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = dynprice(&[
            "sweep",
            "--config",
            &config,
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out.join("sweep.csv")).unwrap()
    };
    let a = run("a", "7");
    assert_eq!(a, run("b", "7"));
    assert_ne!(a, run("c", "8"));
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 3);
}

#[test]
fn field_analog_and_evaluate_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let field = dir.path().join("field");
    let o = dynprice(&[
        "field-analog",
        "--config",
        &config,
        "--out",
        field.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read_to_string(field.join("field_summary.csv"))
            .unwrap()
            .lines()
            .count(),
        3
    );

    let gen = dir.path().join("gen");
    assert!(dynprice(&[
        "generate",
        "--config",
        &config,
        "--out",
        gen.to_str().unwrap()
    ])
    .status
    .success());
    let demos = gen.join("demos.csv");
    let eval = dir.path().join("eval");
    let first = dynprice(&[
        "evaluate",
        "--config",
        &config,
        "--demos",
        demos.to_str().unwrap(),
        "--out",
        eval.to_str().unwrap(),
    ]);
    assert!(
        first.status.success(),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let checkpoint = eval.join("agent");
    let second = dynprice(&[
        "evaluate",
        "--config",
        &config,
        "--demos",
        demos.to_str().unwrap(),
        "--checkpoint",
        checkpoint.to_str().unwrap(),
        "--out",
        dir.path().join("eval2").to_str().unwrap(),
    ]);
    assert!(
        second.status.success(),
        "{}",
        String::from_utf8_lossy(&second.stderr)
    );
    let score = |o: &Output| {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .find(|l| l.contains("R_pi"))
            .unwrap()
            .to_string()
    };
    assert_eq!(score(&first), score(&second));
}

#[test]
fn invalid_config_exits_nonzero_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "[agent]\ngamma = 0.0\n").unwrap();
    let o = dynprice(&["generate", "--config", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("agent.gamma"));

    let o = dynprice(&[
        "generate",
        "--config",
        dir.path().join("missing.toml").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.toml"));

    let o = dynprice(&["sweep", "--axis", "colour"]);
    assert!(!o.status.success());
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            dynprice::experiment::ScenarioConfig::load(&path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 2);
}
