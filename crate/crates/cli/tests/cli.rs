use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn xalign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xalign")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        stdout(out),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Copy of the evaluation config with absolute data paths and `edit` applied.
fn eval_config(dir: &Path, edit: impl FnOnce(&mut toml::Table)) -> PathBuf {
    let eval = fixtures().join("eval");
    let mut table: toml::Table = std::fs::read_to_string(eval.join("config.toml"))
        .unwrap()
        .parse()
        .unwrap();
    for section in ["data", "clients"] {
        absolutize(table.get_mut(section).unwrap(), &eval);
    }
    edit(&mut table);
    let out = dir.join("config.toml");
    std::fs::write(&out, toml::to_string(&table).unwrap()).unwrap();
    out
}

fn absolutize(value: &mut toml::Value, base: &Path) {
    if let toml::Value::Table(t) = value {
        for (k, v) in t.iter_mut() {
            if let toml::Value::String(s) = v {
                if k == "path" || k == "rules" || s.ends_with(".jsonl") {
                    *s = base.join(&*s).display().to_string();
                }
            } else {
                absolutize(v, base);
            }
        }
    }
}

#[test]
fn gen_instruct_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("one.jsonl");
    std::fs::write(
        &corpus,
        "{\"id\": \"p1\", \"src_lang\": \"eng\", \"tgt_lang\": \"ind\", \"src_text\": \"a b\", \"tgt_text\": \"c d\"}\n",
    )
    .unwrap();
    let out_file = dir.path().join("out.jsonl");
    let out = xalign(&[
        "gen-instruct",
        "--parallel",
        path(&corpus),
        "--objectives",
        "mt",
        "--seed",
        "1",
        "--out",
        path(&out_file),
    ]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("generated 2 samples"), "{}", stdout(&out));
    assert_eq!(std::fs::read_to_string(&out_file).unwrap().lines().count(), 2);

    let bad = xalign(&[
        "gen-instruct",
        "--parallel",
        path(&corpus),
        "--objectives",
        "nsp",
        "--seed",
        "1",
        "--out",
        path(&out_file),
    ]);
    assert_exit(&bad, 2);
}

#[test]
fn gen_instruct_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixtures().join("parallel_200.jsonl");
    let run = |name: &str| {
        let out_file = dir.path().join(name);
        assert_exit(
            &xalign(&[
                "gen-instruct",
                "--parallel",
                path(&corpus),
                "--seed",
                "42",
                "--out",
                path(&out_file),
            ]),
            0,
        );
        std::fs::read(out_file).unwrap()
    };
    assert_eq!(run("a.jsonl"), run("b.jsonl"));
}

#[test]
fn evaluate_matches_the_golden_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("report.json");
    let config = fixtures().join("eval/config.toml");
    let out = xalign(&["evaluate", "--config", path(&config), "--out", path(&out_file)]);
    assert_exit(&out, 0);
    let golden = std::fs::read(fixtures().join("eval/report.json")).unwrap();
    assert_eq!(std::fs::read(&out_file).unwrap(), golden);

    // Serial scoring changes the recorded config but not the results.
    let serial_file = dir.path().join("serial.json");
    assert_exit(
        &xalign(&[
            "evaluate",
            "--config",
            path(&config),
            "--out",
            path(&serial_file),
            "--max-inflight",
            "1",
        ]),
        0,
    );
    let mut serial: serde_json::Value = serde_json::from_slice(&std::fs::read(&serial_file).unwrap()).unwrap();
    let mut golden: serde_json::Value = serde_json::from_slice(&golden).unwrap();
    assert_ne!(serial["config_hash"], golden["config_hash"]);
    serial["config_hash"] = serde_json::Value::Null;
    golden["config_hash"] = serde_json::Value::Null;
    assert_eq!(serial, golden);
}

#[test]
fn evaluate_usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = eval_config(dir.path(), |t| {
        t["data"].as_table_mut().unwrap().remove("d_para");
    });
    let out = xalign(&[
        "evaluate",
        "--config",
        path(&config),
        "--out",
        path(&dir.path().join("r.json")),
    ]);
    assert_exit(&out, 2);
    assert_exit(
        &xalign(&["evaluate", "--config", path(&dir.path().join("missing.toml"))]),
        2,
    );
    assert_exit(&xalign(&["evaluate"]), 2);
}

#[test]
fn dry_run_prints_a_prompt_without_scoring() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let config = fixtures().join("eval/config.toml");
    let out = xalign(&[
        "evaluate",
        "--config",
        path(&config),
        "--out",
        path(&report),
        "--dry-run",
    ]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains(" means "), "{}", stdout(&out));
    assert!(!report.exists());
}

#[test]
fn align_quality_on_identity_vectors() {
    let out = xalign(&[
        "align-quality",
        "--lexicon",
        path(&fixtures().join("lexicon_ind_eng.tsv")),
        "--embeddings",
        path(&fixtures().join("lexicon_identity_embeddings.jsonl")),
        "--k",
        "1",
    ]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("= 1.0000"), "{}", stdout(&out));
}

#[test]
fn report_deltas() {
    let eval = fixtures().join("eval");
    let (base, treat) = (eval.join("report_baseline.json"), eval.join("report.json"));
    let out = xalign(&["report", "--baseline", path(&treat), "--treatment", path(&treat)]);
    assert_exit(&out, 0);
    let delta: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(delta["overall"], 0.0);
    assert!(delta["per_language"].as_object().unwrap().values().all(|v| v == 0.0));

    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("delta.json");
    let out = xalign(&[
        "report",
        "--baseline",
        path(&base),
        "--treatment",
        path(&treat),
        "--out",
        path(&out_file),
    ]);
    assert_exit(&out, 0);
    let got: serde_json::Value = serde_json::from_slice(&std::fs::read(&out_file).unwrap()).unwrap();
    let want: serde_json::Value =
        serde_json::from_slice(&std::fs::read(eval.join("delta_golden.json")).unwrap()).unwrap();
    assert_eq!(got, want);
}

#[test]
fn plan_replay_validates_its_plan() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    std::fs::write(&data, "{\"x\": 1}\n{\"x\": 2}\n{\"x\": 3}\n{\"x\": 4}\n").unwrap();
    let out_file = dir.path().join("plan.json");
    let args = |r: &str| {
        xalign(&[
            "plan-replay",
            "--old",
            path(&data),
            "--new",
            path(&data),
            "--r",
            r,
            "--batch-size",
            "4",
            "--seed",
            "0",
            "--out",
            path(&out_file),
        ])
    };
    assert_ne!(args("0").status.code(), Some(0));
    let ok = args("2");
    assert_exit(&ok, 0);
    assert!(stdout(&ok).contains("wrote 2 batches"), "{}", stdout(&ok));
    let first = std::fs::read(&out_file).unwrap();
    assert_exit(&args("2"), 0);
    assert_eq!(std::fs::read(&out_file).unwrap(), first);
}

#[test]
fn retrieve_lists_exemplars_per_query() {
    let config = fixtures().join("eval/config.toml");
    let out = xalign(&["retrieve", "--config", path(&config)]);
    assert_exit(&out, 0);
    let lines: Vec<serde_json::Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!lines.is_empty());
}
