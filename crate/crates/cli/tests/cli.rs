use std::process::{Command, Output};

fn retarget(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_retarget"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn core_path(rel: &str) -> String {
    format!("{}/../core/{rel}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn tables_match_golden_text() {
    for id in ["permute-states", "rationalities", "counterexample"] {
        let out = retarget(&["table", id]);
        assert_eq!(code(&out), 0);
        let golden = std::fs::read_to_string(core_path(&format!("tests/golden/{id}.txt"))).unwrap();
        assert_eq!(String::from_utf8(out.stdout).unwrap(), golden, "{id}");
    }
    let csv = retarget(&["table", "counterexample", "--csv"]);
    let golden = std::fs::read_to_string(core_path("tests/golden/counterexample.csv")).unwrap();
    assert_eq!(String::from_utf8(csv.stdout).unwrap(), golden);
}

#[test]
fn exit_codes() {
    assert_eq!(
        code(&retarget(&["scenario", "run", "--builtin", "mr-actions5"])),
        0
    );
    let refuted = retarget(&[
        "orbit",
        "check",
        "--vector",
        "10,5,0",
        "--A",
        "1,0,0",
        "--B",
        "0,1,0;0,0,1",
        "--rule",
        "optimal",
        "--n",
        "100",
    ]);
    assert_eq!(code(&refuted), 2);
    let holds = retarget(&[
        "orbit",
        "check",
        "--vector",
        "10,5,0",
        "--A",
        "1,0,0",
        "--B",
        "0,1,0;0,0,1",
        "--rule",
        "optimal",
        "--n",
        "2",
    ]);
    assert_eq!(code(&holds), 0);
    assert_eq!(code(&retarget(&["frobnicate"])), 1);
    assert_eq!(code(&retarget(&["scenario", "run"])), 1);
    assert_eq!(code(&retarget(&["table", "table9"])), 1);
    assert_eq!(code(&retarget(&["--help"])), 0);
    assert_eq!(code(&retarget(&["--version"])), 0);
}

#[test]
fn list_names_every_builtin() {
    let out = retarget(&["scenario", "list"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "pacman3",
        "mr-actions5",
        "featurized4",
        "toy-mdp",
        "bandit5",
    ] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn json_report_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = retarget(&[
        "scenario",
        "run",
        "--builtin",
        "featurized4",
        "--json",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(value["schema_version"], 1);
    assert_eq!(value["verdict"], "holds");
    assert_eq!(value["results"]["kind"], "orbit");
}

#[test]
fn bad_config_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "id = \"x\"\nkind = \"orbit\"\nseed = 0\nbogus = 1\n").unwrap();
    let out = retarget(&["scenario", "run", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(!out.stderr.is_empty());
    assert_eq!(
        code(&retarget(&[
            "scenario",
            "run",
            "--config",
            "/nonexistent.toml"
        ])),
        1
    );
}

#[test]
fn thread_count_must_be_a_number() {
    let out = Command::new(env!("CARGO_BIN_EXE_retarget"))
        .args(["table", "rationalities"])
        .env("RETARGET_THREADS", "abc")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
}

#[test]
fn mdp_avgprob_on_fixtures() {
    let toy = core_path("fixtures/toy_mdp.txt");
    let out = retarget(&[
        "mdp",
        "avgprob",
        "--fixture",
        &toy,
        "--samples",
        "2000",
        "--seed",
        "3",
        "--d-prime",
        "empty",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let chain = core_path("fixtures/stochastic_chain.txt");
    let out = retarget(&[
        "mdp",
        "avgprob",
        "--fixture",
        &chain,
        "--samples",
        "500",
        "--seed",
        "3",
        "--start",
        "a",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bandit_verify_runs() {
    let out = retarget(&[
        "bandit", "verify", "--eps", "0.2", "--trials", "100", "--runs", "2000", "--seed", "1",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}
