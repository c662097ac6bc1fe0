use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::verdict::TriState;

/// Operation classes ordered by inclusion: LOCC ⊂ SEP ⊂ PPT ⊂ ALL.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum OpClass {
    Locc,
    Sep,
    Ppt,
    All,
}

impl OpClass {
    pub const ALL_CLASSES: [OpClass; 4] = [OpClass::Locc, OpClass::Sep, OpClass::Ppt, OpClass::All];

    pub fn as_str(self) -> &'static str {
        match self {
            OpClass::Locc => "LOCC",
            OpClass::Sep => "SEP",
            OpClass::Ppt => "PPT",
            OpClass::All => "ALL",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL_CLASSES.into_iter().find(|c| c.as_str() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnownFact {
    pub fixture_id: String,
    pub class: OpClass,
    pub distinguishable: bool,
    pub source: String,
}

#[derive(Deserialize, Serialize)]
struct FactFile {
    facts: Vec<KnownFact>,
}

/// Literature-sourced perfect-distinguishability facts, checked for class
/// monotonicity when loaded.
#[derive(Clone, Debug)]
pub struct KnownFactTable {
    by_fixture: BTreeMap<String, BTreeMap<OpClass, KnownFact>>,
}

const BUNDLED: &str = include_str!("../../data/known_facts.json");

impl KnownFactTable {
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED).expect("bundled known-fact table is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: FactFile = serde_json::from_str(text).map_err(|e| Error::Schema {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        Self::from_facts(file.facts)
    }

    pub fn from_facts(facts: Vec<KnownFact>) -> Result<Self> {
        let mut by_fixture: BTreeMap<String, BTreeMap<OpClass, KnownFact>> = BTreeMap::new();
        for fact in facts {
            let entry = by_fixture.entry(fact.fixture_id.clone()).or_default();
            if let Some(previous) = entry.get(&fact.class) {
                if previous.distinguishable != fact.distinguishable {
                    return Err(Error::NonMonotoneFacts(fact.fixture_id));
                }
            }
            entry.insert(fact.class, fact);
        }
        for (id, facts) in &by_fixture {
            for lower in facts.values().filter(|f| f.distinguishable) {
                if facts.values().any(|upper| upper.class > lower.class && !upper.distinguishable) {
                    return Err(Error::NonMonotoneFacts(id.clone()));
                }
            }
        }
        Ok(Self { by_fixture })
    }

    pub fn fixture_ids(&self) -> impl Iterator<Item = &str> {
        self.by_fixture.keys().map(String::as_str)
    }

    pub fn facts(&self) -> impl Iterator<Item = &KnownFact> {
        self.by_fixture.values().flat_map(|m| m.values())
    }

    /// Stated fact, or one implied through the inclusion chain, or UNKNOWN.
    pub fn lookup(&self, fixture_id: &str, class: OpClass) -> Result<TriState> {
        let facts = self
            .by_fixture
            .get(fixture_id)
            .ok_or_else(|| Error::UnknownFixture(fixture_id.to_string()))?;
        if let Some(fact) = facts.get(&class) {
            return Ok(if fact.distinguishable {
                TriState::yes("known-fact", fact.source.clone())
            } else {
                TriState::no("known-fact", fact.source.clone())
            });
        }
        if let Some(weaker) = facts.values().find(|f| f.class < class && f.distinguishable) {
            return Ok(TriState::yes(
                "inclusion",
                format!("distinguishable under {} ⊂ {}; {}", weaker.class.as_str(), class.as_str(), weaker.source),
            ));
        }
        if let Some(stronger) = facts.values().find(|f| f.class > class && !f.distinguishable) {
            return Ok(TriState::no(
                "inclusion",
                format!("indistinguishable under {} ⊃ {}; {}", stronger.class.as_str(), class.as_str(), stronger.source),
            ));
        }
        Ok(TriState::unknown("R6", "no stated or implied fact"))
    }
}

/// Lookup in the bundled table.
pub fn class_distinguishable(fixture_id: &str, class: OpClass) -> Result<TriState> {
    KnownFactTable::bundled().lookup(fixture_id, class)
}
