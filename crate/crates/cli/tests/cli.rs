use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const HEADER: &str = "# biascorpus manifest ";

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(rel: &str) -> PathBuf {
    root().join("data/fixtures").join(rel)
}

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biascorpus"))
        .env_remove("BIASCORPUS_SEED")
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn strip_header(text: &str) -> &str {
    let (first, rest) = text.split_once('\n').unwrap();
    assert!(first.starts_with(HEADER), "{first}");
    assert_eq!(first.len(), HEADER.len() + 64);
    rest
}

fn without_timings(path: &Path) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(&fs::read(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("timings_ms");
    v
}

#[test]
fn bucket_reports_match_hand_counts() {
    for name in ["small", "dupes", "messy"] {
        let out = tempfile::tempdir().unwrap();
        let input = fixture(&format!("corpora/{name}.jsonl"));
        let r = bin(&["ingest", "--input", s(&input), "--out", s(out.path()), "--min-tokens", "6"]);
        assert!(r.status.success(), "{name}: {}", String::from_utf8_lossy(&r.stderr));
        let got = fs::read_to_string(out.path().join("buckets.csv")).unwrap();
        let want = fs::read_to_string(fixture(&format!("corpora/{name}.buckets.csv"))).unwrap();
        assert_eq!(strip_header(&got), want, "{name}");
    }
}

#[test]
fn malformed_lines_are_rejected_not_fatal() {
    let out = tempfile::tempdir().unwrap();
    let r = bin(&["ingest", "--input", s(&fixture("corpora/messy.jsonl")), "--out", s(out.path()), "--min-tokens", "6"]);
    assert_eq!(r.status.code(), Some(0));
    let rejects = fs::read_to_string(out.path().join("rejects.csv")).unwrap();
    let rows: Vec<&str> = strip_header(&rejects).lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("1,malformed json"));
    assert_eq!(rows[1], "2,missing year");
}

#[test]
fn empty_corpus_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let r = bin(&["ingest", "--input", s(&empty), "--out", s(&dir.path().join("o"))]);
    assert_eq!(r.status.code(), Some(2), "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn too_few_tokens_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let r = bin(&["ingest", "--input", s(&fixture("corpora/small.jsonl")), "--out", s(dir.path())]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn missing_lexicon_exits_1_naming_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let r = bin(&[
        "aggression",
        "--input",
        s(&fixture("aggression.conllu")),
        "--out",
        s(dir.path()),
        "--male",
        "no_such_male_list.txt",
    ]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("no_such_male_list.txt"));
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
    assert_eq!(bin(&["train", "--help"]).status.code(), Some(0));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bin(&["ingest"]).status.code(), Some(1));
}

#[test]
fn bad_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "no_such_key = 3\n").unwrap();
    let r = bin(&["--config", s(&cfg), "ingest", "--input", s(&fixture("corpora/small.jsonl")), "--out", s(dir.path())]);
    assert_eq!(r.status.code(), Some(1));
}

fn ingest_and_train(dir: &Path, seed: &str) -> Vec<u8> {
    let store = dir.join("store");
    let models = dir.join("models");
    let input = fixture("corpora/small.jsonl");
    assert!(bin(&["ingest", "--input", s(&input), "--out", s(&store), "--min-tokens", "6"]).status.success());
    let r = bin(&[
        "--seed", seed, "--threads", "1", "train", "--store", s(&store), "--out", s(&models), "--dim", "8", "--min-count", "1",
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    fs::read(models.join("1965.bin")).unwrap()
}

#[test]
fn same_seed_same_bytes() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (x, y, z) = (ingest_and_train(a.path(), "4"), ingest_and_train(b.path(), "4"), ingest_and_train(c.path(), "5"));
    assert_eq!(x, y);
    assert_ne!(x, z);
    for dir in ["store", "models"] {
        for e in fs::read_dir(a.path().join(dir)).unwrap() {
            let p = e.unwrap().path();
            let q = b.path().join(dir).join(p.file_name().unwrap());
            if p.to_string_lossy().ends_with(".manifest.json") {
                assert_eq!(without_timings(&p), without_timings(&q));
            } else {
                assert_eq!(fs::read(&p).unwrap(), fs::read(&q).unwrap(), "{}", p.display());
            }
        }
    }
}

#[test]
fn every_output_carries_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    ingest_and_train(dir.path(), "4");
    let agg = dir.path().join("agg");
    assert!(bin(&["aggression", "--input", s(&fixture("aggression.conllu")), "--out", s(&agg)]).status.success());
    let mut checked = 0;
    for sub in ["store", "models", "agg"] {
        for e in fs::read_dir(dir.path().join(sub)).unwrap() {
            let p = e.unwrap().path();
            let name = p.file_name().unwrap().to_string_lossy().to_string();
            if name.ends_with(".bin") {
                // header lives in the .vocab sidecar
                assert!(p.with_extension("vocab").exists());
                continue;
            }
            let text = fs::read_to_string(&p).unwrap();
            if name.ends_with(".manifest.json") {
                let v: serde_json::Value = serde_json::from_str(&text).unwrap();
                assert_eq!(v["digest"].as_str().unwrap().len(), 64, "{name}");
            } else if name.ends_with(".json") {
                let v: serde_json::Value = serde_json::from_str(&text).unwrap();
                assert!(v["_manifest"].is_string(), "{name}");
            } else {
                assert!(text.starts_with(HEADER), "{name}");
            }
            checked += 1;
        }
    }
    assert!(checked >= 10, "{checked}");
}

#[test]
fn seed_flag_overrides_env_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "seed = 9\n").unwrap();
    let run = |out: &str, flag: Option<&str>, env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_biascorpus"));
        c.env_remove("BIASCORPUS_SEED");
        if let Some(e) = env {
            c.env("BIASCORPUS_SEED", e);
        }
        c.args(["--config", s(&cfg)]);
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        let out = dir.path().join(out);
        assert!(c.args(["synth", "--songs", "60", "--out", s(&out)]).status().unwrap().success());
        let m: serde_json::Value = serde_json::from_slice(&fs::read(out.join("synth.manifest.json")).unwrap()).unwrap();
        m["seed"].as_u64().unwrap()
    };
    assert_eq!(run("a", None, None), 9);
    assert_eq!(run("b", None, Some("10")), 10);
    assert_eq!(run("c", Some("11"), Some("10")), 11);
}

#[test]
fn bundled_synthetic_data_regenerates() {
    let dir = tempfile::tempdir().unwrap();
    let r = bin(&["--seed", "2018", "synth", "--out", s(dir.path())]);
    assert!(r.status.success());
    let bundled = root().join("data/synthetic");
    for e in fs::read_dir(&bundled).unwrap() {
        let p = e.unwrap().path();
        let q = dir.path().join(p.file_name().unwrap());
        if p.to_string_lossy().ends_with(".manifest.json") {
            assert_eq!(without_timings(&p), without_timings(&q));
        } else {
            assert_eq!(fs::read(&p).unwrap(), fs::read(&q).unwrap(), "{}", p.display());
        }
    }
}
