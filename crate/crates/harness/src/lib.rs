//! Administers trials to subjects through a think/submit tool loop.

pub mod agents;
pub mod battery;
pub mod bundle;
pub mod remote;
pub mod subject;
pub mod tools;

pub use agents::{builtin_answer, AgentKind, BuiltinAgent, UnknownAgent};
pub use battery::{run_battery, BatteryOptions, BatterySummary};
pub use bundle::TrialBundle;
pub use remote::{parse_reply, RemoteConfig, RemoteSubject};
pub use subject::{run_trial, Reply, RequestedCall, Subject, SubjectError, DEFAULT_MAX_TURNS};

/// Builds a subject from its command-line spelling: a built-in agent name
/// or `remote:<config.json>`.
pub fn subject_from_spec(spec: &str, seed: u64) -> Result<Box<dyn Subject>, SubjectError> {
    if let Some(path) = spec.strip_prefix("remote:") {
        let config = RemoteConfig::load(std::path::Path::new(path))?;
        return Ok(Box::new(RemoteSubject::new(config)?));
    }
    let kind: AgentKind = spec.parse().map_err(|e: UnknownAgent| SubjectError::Setup(e.to_string()))?;
    Ok(Box::new(BuiltinAgent::new(kind, seed)))
}
