//! Machine-readable verdict report (JSON on stdout) and the human table
//! (stderr). Verdicts derive only from residual-versus-threshold
//! comparisons; timing lives in a separate block so reports are otherwise
//! byte-reproducible.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::config::{CheckName, Expected, JobConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    pub fn matches(self, expected: Expected) -> bool {
        matches!(
            (self, expected),
            (Verdict::Pass, Expected::Pass)
                | (Verdict::Fail, Expected::Fail)
                | (Verdict::NotApplicable, Expected::NotApplicable)
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "n/a",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: CheckName,
    pub verdict: Verdict,
    pub expected: Expected,
    pub matched: bool,
    /// Named residuals, raw and relative where applicable.
    pub residuals: BTreeMap<String, f64>,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub config: JobConfig,
    pub seed: u64,
    pub tolerance: f64,
    pub checks: Vec<CheckResult>,
    /// "pass" exactly when every requested check matched its expectation.
    pub overall: Verdict,
    pub timing: Timing,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub total_ms: f64,
    pub per_check_ms: BTreeMap<String, f64>,
}

impl VerdictReport {
    pub fn overall_pass(&self) -> bool {
        self.overall == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable table for stderr.
    pub fn human_table(&self) -> String {
        let mut out = String::new();
        if let Some(p) = &self.preset {
            out.push_str(&format!("preset: {p}\n"));
        }
        out.push_str(&format!(
            "{:<22} {:>8} {:>10} {:>12} {:>12}\n",
            "check", "verdict", "expected", "residual", "threshold"
        ));
        for c in &self.checks {
            let main_res = c
                .residuals
                .get("raw")
                .or_else(|| c.residuals.values().next())
                .copied();
            let res = match main_res {
                Some(r) => format!("{r:.3e}"),
                None => "-".into(),
            };
            let marker = if c.matched { "" } else { "   <- mismatch" };
            out.push_str(&format!(
                "{:<22} {:>8} {:>10} {:>12} {:>12.1e}{}\n",
                c.name.to_string(),
                c.verdict.label(),
                c.expected.to_string(),
                res,
                c.threshold,
                marker
            ));
        }
        let matched = self.checks.iter().filter(|c| c.matched).count();
        out.push_str(&format!(
            "overall: {} ({matched}/{} as expected)  [{:.2}s]\n",
            self.overall.label().to_uppercase(),
            self.checks.len(),
            self.timing.total_ms / 1000.0
        ));
        out
    }
}
