//! Job configuration: JSON schema, full-schema validation (every error is
//! collected, not just the first), and the typed form handed to the runner.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// The checks, in dependency order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    Hypercomplex,
    Hkt,
    Einstein,
    Btp,
    Bas,
    Strong,
    NaturallyReductive,
    FlagObstruction,
}

impl CheckName {
    pub fn all() -> Vec<CheckName> {
        use CheckName::*;
        vec![
            Hypercomplex,
            Hkt,
            Einstein,
            Btp,
            Bas,
            Strong,
            NaturallyReductive,
            FlagObstruction,
        ]
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CheckName::Hypercomplex => "hypercomplex",
            CheckName::Hkt => "hkt",
            CheckName::Einstein => "einstein",
            CheckName::Btp => "btp",
            CheckName::Bas => "bas",
            CheckName::Strong => "strong",
            CheckName::NaturallyReductive => "naturally-reductive",
            CheckName::FlagObstruction => "flag-obstruction",
        };
        write!(f, "{s}")
    }
}

impl FromStr for CheckName {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "hypercomplex" => Ok(CheckName::Hypercomplex),
            "hkt" => Ok(CheckName::Hkt),
            "einstein" => Ok(CheckName::Einstein),
            "btp" => Ok(CheckName::Btp),
            "bas" => Ok(CheckName::Bas),
            "strong" => Ok(CheckName::Strong),
            "naturally-reductive" => Ok(CheckName::NaturallyReductive),
            "flag-obstruction" => Ok(CheckName::FlagObstruction),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expected {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expected::Pass => write!(f, "pass"),
            Expected::Fail => write!(f, "fail"),
            Expected::NotApplicable => write!(f, "n/a"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorConfig {
    pub family: String,
    pub rank: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraConfig {
    pub factors: Vec<FactorConfig>,
    pub center_dim: usize,
}

/// A complex Cartan vector as `[re, im]` coordinate pairs.
pub type VectorConfig = Vec<[f64; 2]>;

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum VSpec {
    Named(String), // "none" | "center"
    Explicit(Vec<VectorConfig>),
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum FrameSpec {
    Named(String), // "biinvariant"
    Explicit(Vec<VectorConfig>),
}

#[derive(Debug, Clone, Serialize)]
pub struct IsotropyConfig {
    pub m: usize,
    pub v_subspace: VSpec,
    pub u_frame: FrameSpec,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum MetricConfig {
    Named(String), // "reference" | "einstein"
    Layer { layer: Vec<f64> },
    Perturbed { perturbed: PerturbedConfig },
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbedConfig {
    pub base: Vec<f64>,
    pub size: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct JobConfig {
    pub algebra: AlgebraConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isotropy: Option<IsotropyConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_phases: Option<Vec<f64>>,
    pub metric: MetricConfig,
    pub checks: Vec<CheckName>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub expect: BTreeMap<CheckName, Expected>,
    pub tolerance: f64,
    pub seed: u64,
}

struct Validator {
    errors: Vec<String>,
}

impl Validator {
    fn err(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    fn known_keys(&mut self, obj: &Value, path: &str, allowed: &[&str]) {
        if let Some(map) = obj.as_object() {
            for k in map.keys() {
                if !allowed.contains(&k.as_str()) {
                    self.err(format!("{path}: unknown key `{k}`"));
                }
            }
        }
    }

    fn vector(&mut self, v: &Value, path: &str) -> VectorConfig {
        let mut out = Vec::new();
        match v.as_array() {
            Some(entries) => {
                for (i, e) in entries.iter().enumerate() {
                    match e.as_array() {
                        Some(pair) if pair.len() == 2 => {
                            let re = pair[0].as_f64();
                            let im = pair[1].as_f64();
                            if let (Some(re), Some(im)) = (re, im) {
                                out.push([re, im]);
                            } else {
                                self.err(format!("{path}[{i}]: entries must be numbers"));
                            }
                        }
                        _ => self.err(format!("{path}[{i}]: expected a [re, im] pair")),
                    }
                }
            }
            None => self.err(format!("{path}: expected an array of [re, im] pairs")),
        }
        out
    }
}

/// Parses and fully validates a JSON job configuration, returning either the
/// typed config or the list of every problem found.
pub fn parse_config(text: &str) -> Result<JobConfig, Vec<String>> {
    let value: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => return Err(vec![format!("syntax error: {e}")]),
    };
    validate_config(&value)
}

pub fn validate_config(value: &Value) -> Result<JobConfig, Vec<String>> {
    let mut v = Validator { errors: Vec::new() };
    if !value.is_object() {
        return Err(vec!["top level: expected a JSON object".into()]);
    }
    v.known_keys(
        value,
        "top level",
        &[
            "algebra",
            "isotropy",
            "k_phases",
            "metric",
            "checks",
            "expect",
            "tolerance",
            "seed",
        ],
    );

    // algebra
    let algebra = match value.get("algebra") {
        Some(a) => {
            v.known_keys(a, "algebra", &["factors", "center_dim"]);
            let mut factors = Vec::new();
            match a.get("factors").and_then(|f| f.as_array()) {
                Some(list) if !list.is_empty() => {
                    for (i, f) in list.iter().enumerate() {
                        v.known_keys(f, &format!("algebra.factors[{i}]"), &["family", "rank"]);
                        let family = f
                            .get("family")
                            .and_then(|x| x.as_str())
                            .unwrap_or_default()
                            .to_string();
                        if hkt_core::lie::Family::parse(&family).is_err() {
                            v.err(format!(
                                "algebra.factors[{i}].family: unknown label `{family}`"
                            ));
                        }
                        let rank = f.get("rank").and_then(|x| x.as_u64());
                        if rank.is_none() || rank == Some(0) {
                            v.err(format!(
                                "algebra.factors[{i}].rank: expected a positive integer"
                            ));
                        }
                        factors.push(FactorConfig {
                            family,
                            rank: rank.unwrap_or(1) as usize,
                        });
                    }
                }
                _ => v.err("algebra.factors: expected a non-empty array"),
            }
            let center_dim = match a.get("center_dim") {
                None => 0,
                Some(c) => match c.as_u64() {
                    Some(c) => c as usize,
                    None => {
                        v.err("algebra.center_dim: expected a non-negative integer");
                        0
                    }
                },
            };
            AlgebraConfig {
                factors,
                center_dim,
            }
        }
        None => {
            v.err("missing required key `algebra`");
            AlgebraConfig {
                factors: Vec::new(),
                center_dim: 0,
            }
        }
    };

    // isotropy
    let isotropy = match value.get("isotropy") {
        None => None,
        Some(i) => {
            v.known_keys(i, "isotropy", &["m", "v_subspace", "u_frame"]);
            let m = match i.get("m").and_then(|x| x.as_u64()) {
                Some(m) if m > 0 => m as usize,
                _ => {
                    v.err("isotropy.m: expected a positive integer");
                    1
                }
            };
            let v_subspace = match i.get("v_subspace") {
                None => VSpec::Named("none".into()),
                Some(Value::String(s)) if s == "none" || s == "center" => VSpec::Named(s.clone()),
                Some(Value::String(s)) => {
                    v.err(format!(
                        "isotropy.v_subspace: unknown name `{s}` (use \"none\", \"center\" or vectors)"
                    ));
                    VSpec::Named("none".into())
                }
                Some(Value::Array(vs)) => VSpec::Explicit(
                    vs.iter()
                        .enumerate()
                        .map(|(k, x)| v.vector(x, &format!("isotropy.v_subspace[{k}]")))
                        .collect(),
                ),
                Some(_) => {
                    v.err("isotropy.v_subspace: expected a name or an array of vectors");
                    VSpec::Named("none".into())
                }
            };
            let u_frame = match i.get("u_frame") {
                None => FrameSpec::Named("biinvariant".into()),
                Some(Value::String(s)) if s == "biinvariant" => FrameSpec::Named(s.clone()),
                Some(Value::String(s)) => {
                    v.err(format!(
                        "isotropy.u_frame: unknown name `{s}` (use \"biinvariant\" or vectors)"
                    ));
                    FrameSpec::Named("biinvariant".into())
                }
                Some(Value::Array(vs)) => {
                    let frame: Vec<VectorConfig> = vs
                        .iter()
                        .enumerate()
                        .map(|(k, x)| v.vector(x, &format!("isotropy.u_frame[{k}]")))
                        .collect();
                    if frame.len() != m {
                        v.err(format!(
                            "isotropy.u_frame: {} vectors given but m = {m}",
                            frame.len()
                        ));
                    }
                    FrameSpec::Explicit(frame)
                }
                Some(_) => {
                    v.err("isotropy.u_frame: expected a name or an array of vectors");
                    FrameSpec::Named("biinvariant".into())
                }
            };
            Some(IsotropyConfig {
                m,
                v_subspace,
                u_frame,
            })
        }
    };

    // k_phases
    let k_phases = match value.get("k_phases") {
        None => None,
        Some(Value::Array(ps)) => {
            let mut out = Vec::new();
            for (i, p) in ps.iter().enumerate() {
                match p.as_f64() {
                    Some(x) => out.push(x),
                    None => v.err(format!("k_phases[{i}]: expected a number (radians)")),
                }
            }
            Some(out)
        }
        Some(_) => {
            v.err("k_phases: expected an array of numbers");
            None
        }
    };

    // metric
    let metric = match value.get("metric") {
        Some(Value::String(s)) if s == "reference" || s == "einstein" => {
            MetricConfig::Named(s.clone())
        }
        Some(Value::String(s)) => {
            v.err(format!(
                "metric: unknown name `{s}` (use \"reference\", \"einstein\", {{\"layer\": ..}} or {{\"perturbed\": ..}})"
            ));
            MetricConfig::Named("reference".into())
        }
        Some(obj @ Value::Object(map)) => {
            if map.contains_key("layer") {
                v.known_keys(obj, "metric", &["layer"]);
                let coeffs = match map.get("layer").and_then(|x| x.as_array()) {
                    Some(list) => {
                        let mut out = Vec::new();
                        for (i, c) in list.iter().enumerate() {
                            match c.as_f64() {
                                Some(x) if x > 0.0 => out.push(x),
                                Some(x) => {
                                    v.err(format!("metric.layer[{i}]: {x} is not positive"));
                                    out.push(1.0);
                                }
                                None => v.err(format!("metric.layer[{i}]: expected a number")),
                            }
                        }
                        out
                    }
                    None => {
                        v.err("metric.layer: expected an array of positive numbers");
                        Vec::new()
                    }
                };
                if let (Some(iso), false) = (&isotropy, coeffs.is_empty()) {
                    if coeffs.len() != iso.m {
                        v.err(format!(
                            "metric.layer: {} coefficients given but m = {}",
                            coeffs.len(),
                            iso.m
                        ));
                    }
                }
                MetricConfig::Layer { layer: coeffs }
            } else if map.contains_key("perturbed") {
                v.known_keys(obj, "metric", &["perturbed"]);
                let p = &map["perturbed"];
                v.known_keys(p, "metric.perturbed", &["base", "size", "seed"]);
                let base = match p.get("base").and_then(|x| x.as_array()) {
                    Some(list) => list.iter().filter_map(|c| c.as_f64()).collect(),
                    None => {
                        v.err("metric.perturbed.base: expected an array of numbers");
                        Vec::new()
                    }
                };
                let size = match p.get("size").and_then(|x| x.as_f64()) {
                    Some(s) if s > 0.0 => s,
                    _ => {
                        v.err("metric.perturbed.size: expected a positive number");
                        1e-2
                    }
                };
                let seed = p.get("seed").and_then(|x| x.as_u64());
                MetricConfig::Perturbed {
                    perturbed: PerturbedConfig { base, size, seed },
                }
            } else {
                v.err("metric: expected `layer` or `perturbed`");
                MetricConfig::Named("reference".into())
            }
        }
        Some(_) => {
            v.err("metric: expected a name or an object");
            MetricConfig::Named("reference".into())
        }
        None => {
            v.err("missing required key `metric`");
            MetricConfig::Named("reference".into())
        }
    };

    // checks
    let checks = match value.get("checks") {
        None => CheckName::all(),
        Some(Value::Array(list)) => {
            let mut out = Vec::new();
            for (i, c) in list.iter().enumerate() {
                match c.as_str().and_then(|s| CheckName::from_str(s).ok()) {
                    Some(name) => out.push(name),
                    None => v.err(format!("checks[{i}]: unknown check `{c}`")),
                }
            }
            if out.is_empty() {
                v.err("checks: at least one check is required");
            }
            // Dependency order regardless of the order given.
            out.sort();
            out.dedup();
            out
        }
        Some(_) => {
            v.err("checks: expected an array of check names");
            CheckName::all()
        }
    };

    // expect
    let mut expect = BTreeMap::new();
    if let Some(e) = value.get("expect") {
        match e.as_object() {
            Some(map) => {
                for (k, val) in map {
                    let name = match CheckName::from_str(k) {
                        Ok(n) => n,
                        Err(()) => {
                            v.err(format!("expect: unknown check `{k}`"));
                            continue;
                        }
                    };
                    if !checks.contains(&name) {
                        v.err(format!("expect.{k}: check is not in the requested set"));
                    }
                    let verdict = match val.as_str() {
                        Some("pass") => Expected::Pass,
                        Some("fail") => Expected::Fail,
                        Some("n/a") => Expected::NotApplicable,
                        _ => {
                            v.err(format!(
                                "expect.{k}: expected \"pass\", \"fail\" or \"n/a\""
                            ));
                            Expected::Pass
                        }
                    };
                    expect.insert(name, verdict);
                }
            }
            None => v.err("expect: expected an object mapping checks to verdicts"),
        }
    }

    // tolerance and seed
    let tolerance = match value.get("tolerance") {
        None => DEFAULT_TOLERANCE,
        Some(t) => match t.as_f64() {
            Some(t) if t > 0.0 => t,
            _ => {
                v.err("tolerance: expected a positive number");
                DEFAULT_TOLERANCE
            }
        },
    };
    let seed = match value.get("seed") {
        None => 0,
        Some(s) => match s.as_u64() {
            Some(s) => s,
            None => {
                v.err("seed: expected a non-negative integer");
                0
            }
        },
    };

    if v.errors.is_empty() {
        Ok(JobConfig {
            algebra,
            isotropy,
            k_phases,
            metric,
            checks,
            expect,
            tolerance,
            seed,
        })
    } else {
        Err(v.errors)
    }
}
