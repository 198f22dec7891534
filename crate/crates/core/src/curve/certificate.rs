use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

impl Verdict {
    /// The worse of two verdicts.
    pub fn and(self, other: Verdict) -> Verdict {
        self.max(other)
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 2,
            Verdict::Inconclusive => 3,
        }
    }
}

/// Outcome of one check with the parameters that reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub check: String,
    pub verdict: Verdict,
    pub witnesses: Vec<Value>,
    pub parameters: BTreeMap<String, Value>,
    pub checked: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn new(check: impl Into<String>) -> Self {
        Certificate {
            check: check.into(),
            verdict: Verdict::Pass,
            witnesses: Vec::new(),
            parameters: BTreeMap::new(),
            checked: 0,
            notes: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.set_param(key, value);
        self
    }

    pub fn set_param(&mut self, key: &str, value: impl Serialize) {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
    }

    pub fn fail(&mut self, witness: Value) {
        self.verdict = self.verdict.and(Verdict::Fail);
        self.witnesses.push(witness);
    }

    pub fn inconclusive(&mut self, note: impl Into<String>, witness: Value) {
        self.verdict = self.verdict.and(Verdict::Inconclusive);
        self.notes.push(note.into());
        self.witnesses.push(witness);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn first_witness(&self) -> Option<&Value> {
        self.witnesses.first()
    }
}

/// Worst verdict of a list.
pub fn overall<'a>(certs: impl IntoIterator<Item = &'a Certificate>) -> Verdict {
    certs
        .into_iter()
        .fold(Verdict::Pass, |v, c| v.and(c.verdict))
}
