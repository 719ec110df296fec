use crate::bundle::TrialBundle;
use crate::tools::{CONTINUE_PROMPT, SUBMIT, THINK, THINK_ACK};
use std::time::Instant;
use thiserror::Error;
use vpt_core::transcript::{FailureReason, Message, Role, ToolCall, Transcript};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubjectError {
    /// Configuration problem detected before any message is sent.
    #[error("subject setup: {0}")]
    Setup(String),
    /// The endpoint could not be reached, after retries.
    #[error("transport: {0}")]
    Transport(String),
    /// The reply could not be understood as text or tool calls.
    #[error("malformed reply: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequestedCall {
    pub id: String,
    pub name: String,
    pub arguments: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Reply {
    pub text: String,
    pub tool_calls: Vec<RequestedCall>,
}

impl Reply {
    pub fn submit(answer: &str) -> Reply {
        Reply {
            text: String::new(),
            tool_calls: vec![RequestedCall {
                id: "call_0".into(),
                name: SUBMIT.into(),
                arguments: serde_json::json!({ "answer": answer }),
            }],
        }
    }
}

/// Something that can take a turn in the trial loop. Implementations must
/// be safe to call from several worker threads at once.
pub trait Subject: Send + Sync {
    fn id(&self) -> String;

    /// The next assistant reply given the transcript so far.
    fn reply(&self, bundle: &TrialBundle, transcript: &Transcript) -> Result<Reply, SubjectError>;
}

pub const DEFAULT_MAX_TURNS: u32 = 10;

/// Runs the think/submit loop for one trial. The transcript always ends at
/// the first submit or at a failure.
pub fn run_trial(subject: &dyn Subject, bundle: &TrialBundle, max_turns: u32) -> Transcript {
    let start = Instant::now();
    let mut t = Transcript { messages: bundle.opening_messages(), ..Transcript::default() };
    let finish = |mut t: Transcript, failure: Option<(FailureReason, String)>| {
        if let Some((reason, detail)) = failure {
            t.failure = Some(reason);
            t.failure_detail = Some(detail);
        }
        t.duration_ms = start.elapsed().as_millis() as u64;
        t
    };

    while t.turns < max_turns {
        t.turns += 1;
        let reply = match subject.reply(bundle, &t) {
            Ok(r) => r,
            Err(SubjectError::Malformed(m)) => return finish(t, Some((FailureReason::MalformedToolCall, m))),
            Err(e) => return finish(t, Some((FailureReason::TransportError, e.to_string()))),
        };
        t.messages.push(Message::new(Role::Assistant, reply.text.clone()));
        if reply.tool_calls.is_empty() {
            t.messages.push(Message::new(Role::User, CONTINUE_PROMPT));
            continue;
        }
        for call in reply.tool_calls {
            t.tool_calls.push(ToolCall {
                id: call.id.clone(),
                name: call.name.clone(),
                arguments: call.arguments.clone(),
                turn: t.turns,
            });
            let result = match call.name.as_str() {
                SUBMIT => match call.arguments.get("answer").and_then(|a| a.as_str()) {
                    Some(answer) => {
                        t.answer = Some(answer.to_string());
                        return finish(t, None);
                    }
                    None => "submit() needs a string argument named \"answer\".".to_string(),
                },
                THINK => THINK_ACK.to_string(),
                other => format!("Unknown function {other:?}; the available functions are think and submit."),
            };
            t.messages.push(Message { tool_call_id: Some(call.id), ..Message::new(Role::Tool, result) });
        }
    }
    let cap = format!("no submit within {max_turns} turns");
    finish(t, Some((FailureReason::MaxTurns, cap)))
}
