use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qformula"))
        .args(args)
        .env_remove("QF_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_single_input_and_table() {
    let xor = data("xor.qf.json");
    let o = run(&["simulate", p(&xor), "--x", "10"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "output: |1⟩⟨1| (classical 1)");

    let o = run(&["simulate", p(&xor), "--all"]);
    let rows: Vec<String> = stdout(&o).lines().skip(1).map(|l| l.split(' ').nth(1).unwrap().to_string()).collect();
    assert_eq!(rows, ["0", "1", "1", "0"]);
}

#[test]
fn malformed_input_is_a_parse_error() {
    assert_eq!(code(&run(&["simulate", p(&data("bad.json")), "--all"])), 2);
    assert_eq!(code(&run(&["simulate", "/nonexistent.json", "--all"])), 2);
}

#[test]
fn missing_variable_is_an_evaluation_error() {
    assert_eq!(code(&run(&["simulate", p(&data("xor.qf.json")), "--x", "1"])), 3);
}

#[test]
fn dequantize_recovers_obfuscated_xor() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("xor.cf.json");
    let src = data("xor_obfuscated.qf.json");
    let o = run(&["dequantize", p(&src), "-o", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("size=1 depth=1 certificates=1"));
    assert_eq!(code(&run(&["verify-equiv", p(&src), p(&out)])), 0);
    let o = run(&["simulate", p(&out), "--all", "--json"]);
    assert!(stdout(&o).contains("\"table\":\"0110\""));
}

#[test]
fn read_many_formula_fails_transformation() {
    let o = run(&["dequantize", p(&data("read_many.qf.json"))]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("NotReadOnce"));
}

#[test]
fn bounded_dequantization_of_generated_noisy_file() {
    let dir = tempfile::tempdir().unwrap();
    let noisy = dir.path().join("noisy.qf.json");
    let clean = dir.path().join("clean.qf.json");
    let cf = dir.path().join("out.cf.json");
    let gen = |kind: &str, path: &Path| run(&["gen", kind, "--seed", "5", "--max-vars", "6", "--max-depth", "3", "-o", p(path)]);
    assert_eq!(code(&gen("noisy", &noisy)), 0);
    assert_eq!(code(&gen("qformula", &clean)), 0);
    let o = run(&["dequantize", p(&noisy), "--delta", "0.1", "-o", p(&cf)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("mode=bounded"));
    assert_eq!(code(&run(&["verify-equiv", p(&clean), p(&cf)])), 0);

    let heavy = dir.path().join("heavy.qf.json");
    assert_eq!(code(&run(&["gen", "noisy", "--noise", "0.3", "-o", p(&heavy)])), 0);
    let o = run(&["dequantize", p(&heavy), "--delta", "0.1"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("SeparationViolated"));
}

#[test]
fn compile_and_verify_and() {
    let dir = tempfile::tempdir().unwrap();
    let prog = dir.path().join("and2.oqp.json");
    let circ = data("and2.circ.json");
    let o = run(&["compile-oqp", p(&circ), "-o", p(&prog)]);
    assert_eq!(stdout(&o).trim(), "length=4 bound=4 depth=1");
    assert_eq!(code(&run(&["verify-equiv", p(&circ), p(&prog)])), 0);

    let o = run(&["verify-equiv", p(&circ), p(&data("xor.qf.json"))]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o).trim(), "mismatch at x=01: left 0, right 1");
}

#[test]
fn affine_and_toffoli_queries() {
    assert_eq!(stdout(&run(&["affine-check", "--table", "0001"])).trim(), "non-affine");
    assert_eq!(stdout(&run(&["affine-check", "--table", "0110"])).trim(), "affine");
    assert_eq!(stdout(&run(&["affine-check", p(&data("xor.qf.json"))])).trim(), "affine");
    assert_eq!(code(&run(&["affine-check", "--table", "012"])), 5);

    assert_eq!(stdout(&run(&["classify-toffoli", "-m", "2", "--pre", "id,id"])).trim(), "table=0110");
    assert_eq!(stdout(&run(&["classify-toffoli", "-m", "3", "--pre", "id,id,id"])).trim(), "table=01010110");
    assert_eq!(code(&run(&["classify-toffoli", "-m", "2", "--pre", "h,id"])), 3);
    assert_eq!(code(&run(&["classify-toffoli", "-m", "2", "--pre", "id"])), 5);
    let listed = stdout(&run(&["classify-toffoli", "-m", "2", "--enumerate"]));
    assert!(!listed.lines().any(|l| l == "0001"));
}

#[test]
fn usage_errors() {
    assert_eq!(code(&run(&["frobnicate"])), 5);
    assert_eq!(code(&run(&["simulate"])), 5);
    assert_eq!(code(&run(&["--eps-num", "-1", "affine-check", "--table", "01"])), 5);
    assert_eq!(code(&run(&["dequantize", p(&data("xor.qf.json")), "--delta", "2.5"])), 5);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn generated_files_carry_metadata() {
    let o = run(&["gen", "circuit", "--seed", "3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["meta"]["seed"], 3);
    assert!(v["meta"]["prng"].as_str().unwrap().starts_with("ChaCha8Rng"));
    assert_eq!(stdout(&o), stdout(&run(&["gen", "circuit", "--seed", "3"])));
}

#[test]
fn thread_count_never_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.json");
    assert_eq!(code(&run(&["gen", "qformula", "--seed", "21", "-o", p(&q)])), 0);
    let artifacts = |threads: &str| {
        let certs = dir.path().join(format!("certs{threads}.json"));
        let mut bytes = run(&["--threads", threads, "dequantize", p(&q), "--json", "--certificates", p(&certs)]).stdout;
        bytes.extend(std::fs::read(&certs).unwrap());
        bytes.extend(run(&["--threads", threads, "simulate", p(&q), "--all", "--json"]).stdout);
        bytes.extend(run(&["--threads", threads, "gen", "noisy", "--seed", "21"]).stdout);
        bytes
    };
    let one = artifacts("1");
    assert_eq!(one, artifacts("8"));

    let env = Command::new(env!("CARGO_BIN_EXE_qformula"))
        .args(["simulate", p(&q), "--all", "--json"])
        .env("QF_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(env.stdout, run(&["simulate", p(&q), "--all", "--json"]).stdout);
}
