use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
    Tool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub text: String,
    /// Dataset-relative path of an attached image.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    /// Set on tool results, naming the call they answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_call_id: Option<String>,
}

impl Message {
    pub fn new(role: Role, text: impl Into<String>) -> Self {
        Message { role, text: text.into(), image: None, tool_call_id: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCall {
    pub id: String,
    pub name: String,
    pub arguments: serde_json::Value,
    pub turn: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FailureReason {
    MaxTurns,
    TransportError,
    MalformedToolCall,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::MaxTurns => "MAX_TURNS",
            FailureReason::TransportError => "TRANSPORT_ERROR",
            FailureReason::MalformedToolCall => "MALFORMED_TOOL_CALL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Transcript {
    pub messages: Vec<Message>,
    pub tool_calls: Vec<ToolCall>,
    pub answer: Option<String>,
    pub failure: Option<FailureReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_detail: Option<String>,
    pub turns: u32,
    pub duration_ms: u64,
}

impl Transcript {
    pub fn submit_count(&self) -> usize {
        self.tool_calls.iter().filter(|c| c.name == "submit").count()
    }

    /// The submitted answer, or the failure reason as text.
    pub fn outcome(&self) -> Result<&str, &str> {
        match (&self.answer, self.failure) {
            (Some(a), _) => Ok(a),
            (None, Some(f)) => Err(f.as_str()),
            (None, None) => Err("NO_ANSWER"),
        }
    }
}
