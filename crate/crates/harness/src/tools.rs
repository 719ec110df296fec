//! The two tools offered to every subject. Schemas are kept as literal text
//! so what goes over the wire is exactly what is documented.

use serde_json::value::RawValue;

pub const SUBMIT_SCHEMA: &str = r#"{
  "name": "submit",
  "description": "Submit an answer for evaluation.",
  "parameters": {
    "type": "object",
    "properties": {
      "answer": {
        "type": "string",
        "description": "Submitted answer"
      }
    },
    "required": ["answer"],
    "additionalProperties": false
  }
}"#;

// The published description is hard-wrapped across three lines; JSON
// strings cannot hold raw newlines, so the wraps are joined with spaces.
pub const THINK_SCHEMA: &str = r#"{
  "name": "think",
  "description": "Use this tool to stop, think and reason about the task at hand. Particularly useful to build plans and reflect on them prior to executing actions.",
  "parameters": {
    "type": "object",
    "properties": {
      "thoughts": {
        "type": "string",
        "description": "The thoughts or reasoning process of the agent."
      }
    },
    "required": ["thoughts"],
    "additionalProperties": false
  }
}"#;

pub const SUBMIT: &str = "submit";
pub const THINK: &str = "think";

/// Generic acknowledgement returned for every think call.
pub const THINK_ACK: &str = "Your thought has been recorded.";

/// Sent when a reply contains no tool call.
pub const CONTINUE_PROMPT: &str =
    "No tool was called. Continue with the task, and call submit() with your answer when you have one.";

/// Schemas in the order they are offered: think, then submit.
pub fn tool_schemas() -> [&'static str; 2] {
    [THINK_SCHEMA, SUBMIT_SCHEMA]
}

pub(crate) fn raw_schema(text: &'static str) -> Box<RawValue> {
    RawValue::from_string(text.to_string()).expect("tool schema is valid JSON")
}
