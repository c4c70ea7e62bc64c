use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_shiftbench");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("SHIFTBENCH_BACKEND")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn generate_small(out: &Path) {
    let o = run(&[
        "generate",
        "--out",
        out.to_str().unwrap(),
        "--per-combination",
        "1",
        "--categories",
        "dog,car",
        "--seed",
        "3",
        "--resolution",
        "48",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn taxonomy_enumerate_lists_valid_combinations() {
    let o = run(&["taxonomy", "enumerate"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("390"));
    assert_eq!(lines.count(), 390);
    assert!(!text.contains("snowy | front | day | autumn"));
}

#[test]
fn taxonomy_validate_exit_codes() {
    let ok = run(&["taxonomy", "validate", "weathers=snowy,seasons=winter,time=night,views=top,occlusion=no occlusion"]);
    assert!(ok.status.success());
    assert_eq!(stdout(&ok).trim(), "valid");
    let bad = run(&["taxonomy", "validate", "weathers=snowy,seasons=autumn,time=night,views=top,occlusion=no occlusion"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("snowy"));
    let unknown = run(&["taxonomy", "validate", "weathers=hail"]);
    assert!(!unknown.status.success());
    assert!(!unknown.stderr.is_empty());
}

#[test]
fn unknown_flag_prints_usage() {
    let o = run(&["generate", "--bogus"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn generate_evaluate_compare_report() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds");
    generate_small(&ds);
    let manifest = ds.join("manifest.jsonl");
    let header: Value = serde_json::from_str(std::fs::read_to_string(&manifest).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(header["seed"], Value::from(3));

    let oracle = dir.path().join("oracle.json");
    let o = run(&["evaluate", "--manifest", manifest.to_str().unwrap(), "--mode", "domain_plus", "--out", oracle.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("heavy occlusion"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&oracle).unwrap()).unwrap();
    assert_eq!(report["overall_accuracy"], Value::from(1.0));
    assert_eq!(report["metadata"]["backend"], Value::from("mock:oracle"));

    let constant = dir.path().join("constant.json");
    let o = Command::new(BIN)
        .args(["evaluate", "--manifest", manifest.to_str().unwrap(), "--out", constant.to_str().unwrap()])
        .env("SHIFTBENCH_BACKEND", "mock:constant")
        .output()
        .unwrap();
    assert!(o.status.success());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&constant).unwrap()).unwrap();
    assert_eq!(report["overall_accuracy"], Value::from(0.5));

    let cmp = dir.path().join("cmp.json");
    let o = run(&["compare", oracle.to_str().unwrap(), constant.to_str().unwrap(), "--out", cmp.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("-50.00"));
    assert!(cmp.is_file());

    let o = run(&["report", oracle.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("100.00"));
}

#[test]
fn evaluate_through_stdio_backend() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds");
    generate_small(&ds);
    let out = dir.path().join("r.json");
    let backend = format!("stdio:'{BIN}' mock-backend --mode oracle --classes dog,car");
    let o = run(&[
        "evaluate",
        "--manifest",
        ds.join("manifest.jsonl").to_str().unwrap(),
        "--backend",
        &backend,
        "--adapt",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["overall_accuracy"], Value::from(1.0));
    assert_eq!(report["metadata"]["adapted"], Value::Bool(true));
}

#[test]
fn import_folder_layout() {
    let dir = tempfile::tempdir().unwrap();
    for (style, class) in [("photo", "dog"), ("sketch", "dog"), ("photo", "horse")] {
        let d = dir.path().join("data").join(style).join(class);
        std::fs::create_dir_all(&d).unwrap();
        image::RgbImage::new(2, 2).save(d.join("1.png")).unwrap();
    }
    let mapping = dir.path().join("map.toml");
    std::fs::write(
        &mapping,
        r#"format_version = 1
root = "data"

[[folders]]
path = "photo/dog"
class = "dog"
combination = { style = "photo" }

[[folders]]
path = "sketch/dog"
class = "dog"
combination = { style = "sketch" }

[[folders]]
path = "photo/horse"
class = "horse"
combination = { style = "photo" }
"#,
    )
    .unwrap();
    let taxonomy = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/style_taxonomy.toml");
    let out = dir.path().join("out/manifest.jsonl");
    std::fs::create_dir_all(out.parent().unwrap()).unwrap();
    let o = run(&[
        "import",
        "--mapping",
        mapping.to_str().unwrap(),
        "--taxonomy",
        taxonomy.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&[
        "evaluate",
        "--manifest",
        out.to_str().unwrap(),
        "--taxonomy",
        taxonomy.to_str().unwrap(),
        "--out",
        dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("sketch"));
}

#[test]
fn evaluate_missing_manifest_fails_cleanly() {
    let o = run(&["evaluate", "--manifest", "/no/such/manifest.jsonl"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}
