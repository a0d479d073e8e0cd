//! Verification certificates: what was computed and which checks passed.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

/// One verified property. A failing check always names a concrete witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub scope: String,
    pub pass: bool,
    pub witness: Option<String>,
}

impl Check {
    /// Passes iff `witness` (the counterexample, if any) is `None`.
    pub fn new(name: impl Into<String>, scope: impl Into<String>, witness: Option<String>) -> Self {
        Self {
            name: name.into(),
            scope: scope.into(),
            pass: witness.is_none(),
            witness,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Timing {
    pub elapsed_ms: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate {
    pub command: String,
    pub instance_digest: Option<String>,
    pub outputs: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl Certificate {
    pub fn new(command: impl Into<String>, instance_digest: Option<String>) -> Self {
        Self {
            command: command.into(),
            instance_digest,
            outputs: BTreeMap::new(),
            checks: Vec::new(),
            passed: true,
            timing: None,
        }
    }

    pub fn output(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.outputs.insert(key.into(), value.into());
    }

    pub fn push(&mut self, check: Check) {
        self.passed &= check.pass;
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        for c in checks {
            self.push(c);
        }
    }

    /// Folds another certificate's outputs (under `prefix`) and checks into this one.
    pub fn absorb(&mut self, prefix: &str, other: Certificate) {
        for (k, v) in other.outputs {
            self.outputs.insert(format!("{prefix}.{k}"), v);
        }
        self.extend(other.checks.into_iter().map(|mut c| {
            c.name = format!("{prefix}.{}", c.name);
            c
        }));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "command: {}", self.command).unwrap();
        if let Some(d) = &self.instance_digest {
            writeln!(s, "instance: {d}").unwrap();
        }
        for (k, v) in &self.outputs {
            let shown = match v {
                Value::String(x) => x.clone(),
                other => other.to_string(),
            };
            writeln!(s, "  {k} = {shown}").unwrap();
        }
        for c in &self.checks {
            let mark = if c.pass { "PASS" } else { "FAIL" };
            write!(s, "[{mark}] {} ({})", c.name, c.scope).unwrap();
            if let Some(w) = &c.witness {
                write!(s, " witness: {w}").unwrap();
            }
            s.push('\n');
        }
        writeln!(
            s,
            "{}",
            if self.passed {
                "all checks passed"
            } else {
                "CHECK FAILURE"
            }
        )
        .unwrap();
        s
    }
}
