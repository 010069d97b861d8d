//! Offline backend replying from a script of canned refactorings.

use std::path::Path;
use std::sync::{Arc, Mutex};

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

use crate::message::{extract_code, extract_language, prompt_part};
use crate::{CompletionBackend, LlmError};

/// A canned reply used when every marker occurs in the prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub markers: Vec<String>,
    /// Code returned inside a fenced block.
    pub code: String,
}

/// Entries are tried in order; the first match wins. Prompts that match
/// nothing are echoed back.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockScript {
    #[serde(default, rename = "entry")]
    pub entries: Vec<ScriptEntry>,
}

impl MockScript {
    pub fn with_entry(mut self, markers: &[&str], code: impl Into<String>) -> Self {
        self.entries.push(ScriptEntry {
            markers: markers.iter().map(|m| m.to_string()).collect(),
            code: code.into(),
        });
        self
    }

    pub fn from_toml(text: &str) -> Result<Self, LlmError> {
        toml::from_str(text).map_err(|e| LlmError::Config(format!("mock script: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Config(format!("reading mock script {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Index of the entry that answers `prompt`.
    pub fn lookup(&self, prompt: &str) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.markers.iter().all(|m| prompt.contains(m.as_str())))
    }
}

#[derive(Debug, Clone)]
pub struct MockBackend {
    script: MockScript,
    down: bool,
    traffic: Arc<Mutex<Vec<String>>>,
}

impl MockBackend {
    pub fn echo() -> Self {
        Self::scripted(MockScript::default())
    }

    pub fn scripted(script: MockScript) -> Self {
        Self {
            script,
            down: false,
            traffic: Arc::default(),
        }
    }

    /// A backend that is never reachable.
    pub fn down() -> Self {
        Self {
            down: true,
            ..Self::echo()
        }
    }

    /// Every message received so far, in order.
    pub fn traffic(&self) -> Vec<String> {
        self.traffic.lock().unwrap().clone()
    }

    fn reply_to(&self, message: &str) -> String {
        let lang = extract_language(message).unwrap_or_default();
        let code = match self.script.lookup(prompt_part(message)) {
            Some(i) => self.script.entries[i].code.clone(),
            None => extract_code(message).unwrap_or_default(),
        };
        format!("Here is the refactored code:\n\n```{lang}\n{code}\n```\n")
    }
}

#[async_trait]
impl CompletionBackend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    async fn complete(&self, message: &str) -> Result<String, LlmError> {
        self.traffic.lock().unwrap().push(message.to_string());
        if self.down {
            return Err(LlmError::Transport {
                attempts: 1,
                message: "mock backend is down".into(),
            });
        }
        Ok(self.reply_to(message))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_toml_script() {
        let script =
            MockScript::from_toml("[[entry]]\nmarkers = [\"short saccades\"]\ncode = \"class A {}\"\n").unwrap();
        assert_eq!(script.entries.len(), 1);
        assert_eq!(script.lookup("only short saccades here"), Some(0));
        assert_eq!(script.lookup("nothing"), None);
        assert_eq!(MockScript::from_toml("").unwrap(), MockScript::default());
    }

    #[test]
    fn all_markers_required() {
        let script = MockScript::default().with_entry(&["a", "b"], "x");
        assert_eq!(script.lookup("a only"), None);
        assert_eq!(script.lookup("b then a"), Some(0));
    }
}
