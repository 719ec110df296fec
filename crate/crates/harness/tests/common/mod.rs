#![allow(dead_code)]

use std::path::Path;
use vpt_core::dataset::{build_records, GenerationSpec};
use vpt_core::director::DirectorConfig;
use vpt_core::rft::{RftConfig, RftSet};
use vpt_core::store::TrialRecord;
use vpt_harness::TrialBundle;

pub fn rft_records(set: RftSet, n: usize, seed: u64) -> Vec<TrialRecord> {
    build_records(&GenerationSpec::Rft { set, n, seed, config: RftConfig::default() }).unwrap()
}

pub fn director_records(n: usize, seed: u64) -> Vec<TrialRecord> {
    build_records(&GenerationSpec::Director { n, seed, config: DirectorConfig::default(), ascii: false }).unwrap()
}

pub fn bundle(record: &TrialRecord) -> TrialBundle {
    TrialBundle::from_record(record, Path::new("/nonexistent"))
}
