use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Yes => "YES",
            Verdict::No => "NO",
            Verdict::Unknown => "UNKNOWN",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "YES" => Some(Verdict::Yes),
            "NO" => Some(Verdict::No),
            "UNKNOWN" => Some(Verdict::Unknown),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// YES / NO / UNKNOWN together with the rule that produced it.
///
/// YES and NO are only emitted when a rule fires; UNKNOWN means no rule
/// applied, not that a computation failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriState {
    pub value: Verdict,
    pub rule: String,
    pub justification: String,
}

impl TriState {
    pub fn yes(rule: impl Into<String>, justification: impl Into<String>) -> Self {
        Self { value: Verdict::Yes, rule: rule.into(), justification: justification.into() }
    }

    pub fn no(rule: impl Into<String>, justification: impl Into<String>) -> Self {
        Self { value: Verdict::No, rule: rule.into(), justification: justification.into() }
    }

    pub fn unknown(rule: impl Into<String>, justification: impl Into<String>) -> Self {
        Self { value: Verdict::Unknown, rule: rule.into(), justification: justification.into() }
    }

    pub fn is_yes(&self) -> bool {
        self.value == Verdict::Yes
    }

    pub fn is_no(&self) -> bool {
        self.value == Verdict::No
    }
}
