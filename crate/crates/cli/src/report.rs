use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Undecided,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Undecided => 3,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// One run's output. Field order and map ordering are fixed so the same
/// input always renders to the same bytes.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub checks: Vec<Check>,
    pub data: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            status: Status::Pass,
            checks: Vec::new(),
            data: BTreeMap::new(),
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.check_with(name, passed, detail, None::<String>);
    }

    pub fn check_with(&mut self, name: &str, passed: bool, detail: impl Into<String>, witness: Option<impl ToString>) {
        if !passed && self.status == Status::Pass {
            self.status = Status::Fail;
        }
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
            witness: witness.map(|w| w.to_string()),
        });
    }

    pub fn put(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report data serializes");
        self.data.insert(key.to_string(), v);
    }

    pub fn undecided(&mut self) {
        self.status = Status::Undecided;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} [{}]", self.command, status_word(self.status));
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "  {mark} {}: {}", c.name, c.detail);
            if let Some(w) = &c.witness {
                let _ = writeln!(out, "       witness: {w}");
            }
        }
        for (k, v) in &self.data {
            match v {
                Value::String(s) if s.contains('\n') => {
                    let _ = writeln!(out, "{k}:");
                    for line in s.lines() {
                        let _ = writeln!(out, "  {line}");
                    }
                }
                Value::String(s) => {
                    let _ = writeln!(out, "{k}: {s}");
                }
                other => {
                    let _ = writeln!(out, "{k}: {other}");
                }
            }
        }
        out
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Undecided => "undecided",
    }
}
