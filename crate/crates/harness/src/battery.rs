use crate::bundle::TrialBundle;
use crate::subject::{run_trial, Subject, DEFAULT_MAX_TURNS};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};
use vpt_core::scoring::score_response;
use vpt_core::store::{ResultRecord, ResultStore, StoreError, TrialRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatteryOptions {
    /// Upper bound on trials in flight at once.
    pub parallelism: usize,
    pub max_turns: u32,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        BatteryOptions { parallelism: 1, max_turns: DEFAULT_MAX_TURNS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BatterySummary {
    pub ran: usize,
    /// Already in the store from an earlier run.
    pub skipped: usize,
    /// Trials that ended without a submit.
    pub failed: usize,
    pub correct: usize,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// Runs every trial not yet recorded for this subject, appending one
/// scored result per trial. Work is pulled by `parallelism` worker threads,
/// so at most that many trials are unresolved at any moment.
pub fn run_battery(
    subject: &dyn Subject,
    records: &[TrialRecord],
    dataset_dir: &Path,
    store: &ResultStore,
    opts: BatteryOptions,
) -> Result<BatterySummary, StoreError> {
    let who = subject.id();
    let done = store.completed_pairs();
    let pending: Vec<&TrialRecord> =
        records.iter().filter(|r| !done.contains(&(r.trial_id().to_string(), who.clone()))).collect();
    let next = AtomicUsize::new(0);
    let summary = Mutex::new(BatterySummary { skipped: records.len() - pending.len(), ..Default::default() });
    let first_error: Mutex<Option<StoreError>> = Mutex::new(None);

    std::thread::scope(|s| {
        for _ in 0..opts.parallelism.max(1).min(pending.len().max(1)) {
            s.spawn(|| loop {
                if first_error.lock().expect("error lock").is_some() {
                    return;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(record) = pending.get(i) else { return };
                let bundle = TrialBundle::from_record(record, dataset_dir);
                let started = now_ms();
                let transcript = run_trial(subject, &bundle, opts.max_turns);
                let scored = score_response(&record.trial, &who, transcript.outcome());
                let result = ResultRecord {
                    trial_id: record.trial_id().to_string(),
                    subject: who.clone(),
                    duration_ms: transcript.duration_ms,
                    started_unix_ms: started,
                    scored,
                    transcript,
                };
                match store.append(&result) {
                    Ok(()) => {
                        let mut sum = summary.lock().expect("summary lock");
                        sum.ran += 1;
                        sum.failed += usize::from(result.transcript.failure.is_some());
                        sum.correct += usize::from(result.scored.correct);
                    }
                    Err(e) => {
                        first_error.lock().expect("error lock").get_or_insert(e);
                        return;
                    }
                }
            });
        }
    });

    match first_error.into_inner().expect("error lock") {
        Some(e) => Err(e),
        None => Ok(summary.into_inner().expect("summary lock")),
    }
}
