use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use vpt_core::analysis::{emit_report, Filters, Observation, ReportOptions};
use vpt_core::dataset::{generate_dataset, GenerationSpec};
use vpt_core::director::{validate_trial, DirectorConfig, ItemLibrary};
use vpt_core::oracle::answer_rft;
use vpt_core::render::parse_director_ascii;
use vpt_core::rft::{RftConfig, RftSet};
use vpt_core::scoring::{score_response, SCORING_VERSION};
use vpt_core::store::{read_dataset, read_results, read_run_info, ResultStore, RunInfo, TrialRecord};
use vpt_core::trial::Trial;
use vpt_core::TOOLKIT_VERSION;
use vpt_harness::{run_battery, subject_from_spec, BatteryOptions, DEFAULT_MAX_TURNS};

/// Visuospatial perspective-taking benchmark toolkit.
#[derive(Debug, Parser)]
#[command(name = "vpt", version, propagate_version = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded dataset of trials and stimuli
    Generate(GenerateArgs),
    /// Administer a dataset to a subject and record transcripts
    Evaluate(EvaluateArgs),
    /// Re-score recorded transcripts into a scored JSONL file
    Score(ScoreArgs),
    /// Aggregate scored results into CSV tables and SVG charts
    Analyze(AnalyzeArgs),
    /// Check a dataset's integrity and every trial's constraints
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Task {
    Rft,
    Director,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Which task to generate
    #[arg(long, value_enum)]
    task: Task,
    /// RFT stimulus set: control_1, control_2, test_1, test_2 or test_3
    #[arg(long, value_parser = parse_set, required_if_eq("task", "rft"))]
    set: Option<RftSet>,
    /// Director: cycle through all 28 visual x adjective x point-of-view conditions
    #[arg(long, required_if_eq("task", "director"))]
    condition_grid: bool,
    /// Number of scenes (RFT) or trials (Director)
    #[arg(long)]
    n: usize,
    /// Base seed; all randomness derives from it
    #[arg(long)]
    seed: u64,
    /// Output dataset directory
    #[arg(long)]
    out: PathBuf,
    /// Director: also emit an ASCII-grid twin of every trial
    #[arg(long)]
    ascii: bool,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Dataset directory
    #[arg(long)]
    dataset: PathBuf,
    /// oracle, egocentric, mirror, random, or remote:<config.json>
    #[arg(long)]
    subject: String,
    /// Maximum trials in flight at once
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    parallelism: u64,
    /// Result store directory; rerunning resumes where it stopped
    #[arg(long)]
    out: PathBuf,
    /// Turn cap per trial
    #[arg(long, default_value_t = DEFAULT_MAX_TURNS)]
    max_turns: u32,
    /// Seed for the random agent
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Result store directory
    #[arg(long)]
    results: PathBuf,
    /// Output file [default: <results>/scored.jsonl]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Result store directory
    #[arg(long)]
    results: PathBuf,
    /// RFT bins: 4 folded-disparity bins, or 12/24 signed-angle buckets
    #[arg(long, default_value_t = 4, value_parser = parse_bins)]
    bins: usize,
    /// Drop trials whose figure faces within 10 degrees of a room corner
    #[arg(long)]
    corner_removed: bool,
    /// Director: add error-vector histograms for wrong-but-valid answers
    #[arg(long)]
    error_vectors: bool,
    /// Report output directory
    #[arg(long)]
    report: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Dataset directory
    #[arg(long)]
    dataset: PathBuf,
}

fn parse_set(s: &str) -> Result<RftSet, String> {
    s.parse::<RftSet>().map_err(|e| e.to_string())
}

fn parse_bins(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(b @ (4 | 12 | 24)) => Ok(b),
        _ => Err(format!("{s:?} is not one of 4, 12, 24")),
    }
}

fn argv() -> Vec<String> {
    std::env::args().skip(1).collect()
}

fn generate(a: GenerateArgs) -> Result<()> {
    if a.n == 0 {
        bail!("--n must be at least 1");
    }
    let spec = match a.task {
        Task::Rft => {
            if a.condition_grid || a.ascii {
                bail!("--condition-grid and --ascii apply only to --task director");
            }
            let set = a.set.context("--set is required for --task rft")?;
            GenerationSpec::Rft { set, n: a.n, seed: a.seed, config: RftConfig::default() }
        }
        Task::Director => {
            if a.set.is_some() {
                bail!("--set applies only to --task rft");
            }
            GenerationSpec::Director { n: a.n, seed: a.seed, config: DirectorConfig::default(), ascii: a.ascii }
        }
    };
    let m = generate_dataset(&spec, &a.out)?;
    println!(
        "wrote {} trials and {} images to {} (trials sha256 {})",
        m.trial_count,
        m.image_count,
        a.out.display(),
        m.trials_sha256
    );
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let (manifest, records) = read_dataset(&a.dataset)?;
    let subject = subject_from_spec(&a.subject, a.seed)?;
    let dataset = std::fs::canonicalize(&a.dataset).unwrap_or(a.dataset.clone());
    let run = RunInfo {
        dataset,
        dataset_sha256: manifest.trials_sha256.clone(),
        subject: subject.id(),
        toolkit_version: TOOLKIT_VERSION.to_string(),
        scoring_version: SCORING_VERSION.to_string(),
        flags: argv(),
    };
    let store = ResultStore::open(&a.out, run)?;
    let opts = BatteryOptions { parallelism: a.parallelism as usize, max_turns: a.max_turns };
    let s = run_battery(subject.as_ref(), &records, &a.dataset, &store, opts)?;
    println!(
        "{}: ran {} trials ({} already done), {} correct, {} without an answer",
        subject.id(),
        s.ran,
        s.skipped,
        s.correct,
        s.failed
    );
    Ok(())
}

/// Dataset records by trial id, located through the store's run info.
fn load_for_results(results: &Path) -> Result<(RunInfo, HashMap<String, TrialRecord>)> {
    let run = read_run_info(results)?;
    let (manifest, records) =
        read_dataset(&run.dataset).with_context(|| format!("loading dataset {}", run.dataset.display()))?;
    if manifest.trials_sha256 != run.dataset_sha256 {
        bail!("dataset {} has changed since these results were recorded", run.dataset.display());
    }
    Ok((run, records.into_iter().map(|r| (r.trial_id().to_string(), r)).collect()))
}

fn score(a: ScoreArgs) -> Result<()> {
    let (_, by_id) = load_for_results(&a.results)?;
    let out_path = a.out.unwrap_or_else(|| a.results.join("scored.jsonl"));
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(&out_path).with_context(|| format!("creating {}", out_path.display()))?,
    );
    let mut tally: BTreeMap<String, (u64, u64, u64)> = BTreeMap::new();
    for r in read_results(&a.results)? {
        let record = by_id.get(&r.trial_id).with_context(|| format!("result for unknown trial {}", r.trial_id))?;
        let scored = score_response(&record.trial, &r.subject, r.transcript.outcome());
        serde_json::to_writer(&mut out, &scored)?;
        out.write_all(b"\n")?;
        let key = match &record.trial {
            Trial::Rft(t) => format!("{} {}", t.set, t.question_type.as_str()),
            Trial::Director(_) => format!("director {}", record.format.as_str()),
        };
        let e = tally.entry(key).or_default();
        e.0 += 1;
        e.1 += u64::from(scored.correct);
        e.2 += u64::from(!scored.valid);
    }
    out.flush()?;
    for (key, (n, correct, invalid)) in &tally {
        println!(
            "{key}: n={n} accuracy={:.3} invalid={:.3}",
            *correct as f64 / *n as f64,
            *invalid as f64 / *n as f64
        );
    }
    println!("wrote {}", out_path.display());
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let (_, by_id) = load_for_results(&a.results)?;
    let mut obs = Vec::new();
    for r in read_results(&a.results)? {
        let record = by_id.get(&r.trial_id).with_context(|| format!("result for unknown trial {}", r.trial_id))?;
        let scored = score_response(&record.trial, &r.subject, r.transcript.outcome());
        obs.push(Observation::new(&record.trial, record.format, &scored));
    }
    if obs.is_empty() {
        bail!("{} holds no results", a.results.display());
    }
    let opts = ReportOptions {
        bins: a.bins,
        filters: Filters { corner_removed: a.corner_removed },
        error_vectors: a.error_vectors,
    };
    let written = emit_report(&a.report, &obs, opts)?;
    let flags = serde_json::json!({ "toolkit_version": TOOLKIT_VERSION, "flags": argv() });
    std::fs::write(a.report.join("command.json"), serde_json::to_vec_pretty(&flags)?)?;
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

/// Returns the number of failed trials.
fn validate(a: ValidateArgs) -> Result<usize> {
    let (manifest, records) = read_dataset(&a.dataset)?;
    let library = ItemLibrary::builtin();
    let mut failed = 0;
    for r in &records {
        let problem = match &r.trial {
            Trial::Rft(t) => match answer_rft(t) {
                Ok(a) if a == t.ground_truth => None,
                Ok(a) => Some(format!("oracle answers {a}, stored truth is {}", t.ground_truth)),
                Err(e) => Some(format!("oracle error: {e}")),
            },
            Trial::Director(t) => {
                let report = validate_trial(t, Some(&library));
                let ascii = r.ascii.as_ref().and_then(|text| match parse_director_ascii(text, &library) {
                    Ok(g) if g == t.grid => None,
                    Ok(_) => Some("ASCII grid does not parse back to the trial's grid".to_string()),
                    Err(e) => Some(format!("ASCII grid: {e}")),
                });
                report.first_failure().map(|c| format!("check {} failed: {}", c.name, c.detail)).or(ascii)
            }
        };
        if let Some(p) = problem {
            failed += 1;
            println!("FAIL {}: {p}", r.trial_id());
        }
    }
    println!(
        "{}: {} trials, {} failed; trials sha256 {} verified",
        a.dataset.display(),
        records.len(),
        failed,
        manifest.trials_sha256
    );
    Ok(failed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => generate(a).map(|_| 0),
        Command::Evaluate(a) => evaluate(a).map(|_| 0),
        Command::Score(a) => score(a).map(|_| 0),
        Command::Analyze(a) => analyze(a).map(|_| 0),
        Command::Validate(a) => validate(a),
    };
    match outcome {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
