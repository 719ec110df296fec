use std::path::{Path, PathBuf};
use vpt_core::prompts::{DIRECTOR_SYSTEM_PROMPT, GENERAL_SYSTEM_PROMPT};
use vpt_core::rft::build_prompts;
use vpt_core::store::TrialRecord;
use vpt_core::transcript::{Message, Role};
use vpt_core::trial::Trial;

/// Everything shown to a subject for one trial. Built-in agents also read
/// `trial` directly.
#[derive(Debug, Clone)]
pub struct TrialBundle {
    pub trial: Trial,
    /// Task prompt first, then the general tool-use prompt.
    pub system_prompts: Vec<String>,
    pub user_text: String,
    /// Dataset-relative path, as recorded in transcripts.
    pub image: Option<String>,
    /// Where the image bytes live.
    pub image_path: Option<PathBuf>,
    pub ascii: Option<String>,
}

impl TrialBundle {
    pub fn from_record(record: &TrialRecord, dataset_dir: &Path) -> TrialBundle {
        let (task_prompt, user_text) = match &record.trial {
            Trial::Rft(t) => {
                let (system, context, question) = build_prompts(t);
                (system, format!("{context}\n{question}"))
            }
            Trial::Director(t) => (DIRECTOR_SYSTEM_PROMPT.to_string(), t.instruction.surface_text.clone()),
        };
        TrialBundle {
            trial: record.trial.clone(),
            system_prompts: vec![task_prompt, GENERAL_SYSTEM_PROMPT.to_string()],
            user_text,
            image: record.image.clone(),
            image_path: record.image.as_ref().map(|p| dataset_dir.join(p)),
            ascii: record.ascii.clone(),
        }
    }

    /// Opening messages in presentation order.
    pub fn opening_messages(&self) -> Vec<Message> {
        let mut out: Vec<Message> = self.system_prompts.iter().map(|p| Message::new(Role::System, p.clone())).collect();
        out.push(Message::new(Role::User, self.user_text.clone()));
        if let Some(img) = &self.image {
            out.push(Message { image: Some(img.clone()), ..Message::new(Role::User, "") });
        }
        if let Some(text) = &self.ascii {
            out.push(Message::new(Role::User, text.clone()));
        }
        out
    }
}
