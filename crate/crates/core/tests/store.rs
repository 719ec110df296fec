use std::fs;
use std::sync::Arc;
use vpt_core::dataset::{build_records, generate_dataset, regenerate, GenerationSpec};
use vpt_core::director::DirectorConfig;
use vpt_core::rft::{RftConfig, RftSet};
use vpt_core::scoring::score_response;
use vpt_core::store::*;
use vpt_core::transcript::Transcript;

fn rft_spec(n: usize, seed: u64) -> GenerationSpec {
    GenerationSpec::Rft { set: RftSet::Test2, n, seed, config: RftConfig::default() }
}

#[test]
fn write_read_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("d");
    let m = generate_dataset(&rft_spec(5, 1), &dir).unwrap();
    assert_eq!(m.trial_count, 10);
    assert_eq!(m.image_count, 5);
    assert_eq!(fs::read_dir(dir.join(IMAGES_DIR)).unwrap().count(), 5);
    let (m2, records) = read_dataset(&dir).unwrap();
    assert_eq!(m, m2);
    assert!(records == build_records(&rft_spec(5, 1)).unwrap(), "records differ after round trip");
    assert!(!tmp.path().join("d.partial").exists());
}

#[test]
fn regeneration_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let spec = GenerationSpec::Director { n: 6, seed: 3, config: DirectorConfig::default(), ascii: true };
    let m = generate_dataset(&spec, &a).unwrap();
    let m2 = regenerate(&read_manifest(&a).unwrap(), &b).unwrap();
    assert_eq!(m.trials_sha256, m2.trials_sha256);
    assert_eq!(fs::read(a.join(TRIALS_FILE)).unwrap(), fs::read(b.join(TRIALS_FILE)).unwrap());
    for e in fs::read_dir(a.join(IMAGES_DIR)).unwrap() {
        let name = e.unwrap().file_name();
        assert_eq!(fs::read(a.join(IMAGES_DIR).join(&name)).unwrap(), fs::read(b.join(IMAGES_DIR).join(&name)).unwrap());
    }
    assert_eq!(m.trial_count, 12);
    assert_eq!(m.image_count, 6);
}

#[test]
fn tampering_is_detected() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("d");
    generate_dataset(&rft_spec(2, 9), &dir).unwrap();
    let path = dir.join(TRIALS_FILE);
    let text = fs::read_to_string(&path).unwrap().replacen("LEFT", "RIGHT", 1).replacen("RIGHT", "LEFT", 1);
    fs::write(&path, text.replacen("\"ground_truth\":\"", "\"ground_truth\":\"x", 1)).unwrap();
    assert!(matches!(read_dataset(&dir), Err(StoreError::Integrity(_))));
}

#[test]
fn missing_image_names_the_trial() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("d");
    generate_dataset(&rft_spec(2, 9), &dir).unwrap();
    let first = fs::read_dir(dir.join(IMAGES_DIR)).unwrap().next().unwrap().unwrap().path();
    fs::remove_file(&first).unwrap();
    match read_dataset(&dir) {
        Err(e @ StoreError::MissingImage { .. }) => assert!(e.to_string().contains("rft-test_2-9-")),
        other => panic!("expected missing image, got {other:?}"),
    }
}

#[test]
fn unwritable_target_leaves_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let dir = blocker.join("d");
    assert!(generate_dataset(&rft_spec(1, 0), &dir).is_err());
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 1);
}

#[test]
fn refuses_to_replace_foreign_directory() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("notes.txt"), "keep me").unwrap();
    assert!(matches!(generate_dataset(&rft_spec(1, 0), tmp.path()), Err(_)));
    assert!(tmp.path().join("notes.txt").exists());
}

fn run_info(subject: &str) -> RunInfo {
    RunInfo {
        dataset: "d".into(),
        dataset_sha256: "abc".into(),
        subject: subject.into(),
        toolkit_version: "t".into(),
        scoring_version: "1".into(),
        flags: vec![],
    }
}

fn result(trial_id: &str, subject: &str) -> ResultRecord {
    let records = build_records(&rft_spec(1, 0)).unwrap();
    let mut scored = score_response(&records[0].trial, subject, Ok("9"));
    scored.trial_id = trial_id.into();
    ResultRecord {
        trial_id: trial_id.into(),
        subject: subject.into(),
        transcript: Transcript { answer: Some("9".into()), turns: 1, ..Transcript::default() },
        scored,
        started_unix_ms: 0,
        duration_ms: 0,
    }
}

#[test]
fn append_and_duplicates() {
    let tmp = tempfile::tempdir().unwrap();
    let store = ResultStore::open(tmp.path(), run_info("s")).unwrap();
    store.append(&result("t1", "s")).unwrap();
    assert!(store.completed_pairs().contains(&("t1".to_string(), "s".to_string())));
    assert!(matches!(store.append(&result("t1", "s")), Err(StoreError::Duplicate { .. })));
    drop(store);
    let store = ResultStore::open(tmp.path(), run_info("s")).unwrap();
    assert!(matches!(store.append(&result("t1", "s")), Err(StoreError::Duplicate { .. })));
    assert_eq!(read_results(tmp.path()).unwrap().len(), 1);
}

#[test]
fn mismatched_store_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    ResultStore::open(tmp.path(), run_info("s")).unwrap();
    let mut other = run_info("s");
    other.dataset_sha256 = "def".into();
    assert!(matches!(ResultStore::open(tmp.path(), other), Err(StoreError::Mismatch(_))));
    assert!(matches!(ResultStore::open(tmp.path(), run_info("t")), Err(StoreError::Mismatch(_))));
}

#[test]
fn torn_last_line_is_dropped() {
    let tmp = tempfile::tempdir().unwrap();
    let store = ResultStore::open(tmp.path(), run_info("s")).unwrap();
    store.append(&result("t1", "s")).unwrap();
    drop(store);
    let path = tmp.path().join(RESULTS_FILE);
    let mut bytes = fs::read(&path).unwrap();
    let line = serde_json::to_vec(&result("t2", "s")).unwrap();
    bytes.extend_from_slice(&line[..line.len() / 2]);
    fs::write(&path, bytes).unwrap();
    let store = ResultStore::open(tmp.path(), run_info("s")).unwrap();
    assert_eq!(store.completed_pairs().len(), 1);
    store.append(&result("t2", "s")).unwrap();
    assert_eq!(read_results(tmp.path()).unwrap().len(), 2);
}

#[test]
fn concurrent_appends_stay_intact() {
    let tmp = tempfile::tempdir().unwrap();
    let store = Arc::new(ResultStore::open(tmp.path(), run_info("s")).unwrap());
    let template = result("x", "s");
    std::thread::scope(|s| {
        for w in 0..10 {
            let store = store.clone();
            let template = template.clone();
            s.spawn(move || {
                for i in 0..10 {
                    let mut r = template.clone();
                    r.trial_id = format!("t{w}-{i}");
                    r.scored.trial_id = r.trial_id.clone();
                    store.append(&r).unwrap();
                }
            });
        }
    });
    let text = fs::read_to_string(tmp.path().join(RESULTS_FILE)).unwrap();
    assert_eq!(text.lines().count(), 100);
    for line in text.lines() {
        serde_json::from_str::<ResultRecord>(line).unwrap();
    }
}
