//! JSON certificates: a claim plus a DAG of rule applications, each step
//! naming the earlier steps it consumes.

mod checker;
mod report;
mod store;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bounds::{BoundFact, Derivation};
use crate::cremona::{EmptinessCertificate, Step, SystemSpec, Witness};
use crate::demailly::Verdict;
use crate::exact::format_ratio;

pub use checker::{check, check_str, CheckError, Checked};
pub use report::{render_markdown, ReportRow};
pub use store::{CertStore, StoreError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Emptiness,
    Bound,
    Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub id: String,
    pub rule: String,
    pub params: Map<String, Value>,
    pub inputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub version: u32,
    pub kind: Kind,
    pub claim: Value,
    pub steps: Vec<StepRecord>,
    pub m0: u64,
    pub tags: Vec<String>,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed certificate JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl CertificateFile {
    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("certificate serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }

    /// First 16 hex digits of the SHA-256 of [`CertificateFile::to_json`].
    pub fn content_id(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        hex::encode(&digest[..8])
    }
}

pub fn system_json(sys: &SystemSpec) -> Value {
    let mults: Vec<Value> =
        sys.mults.iter().map(|(e, c)| json!({ "mult": e.to_string(), "count": c })).collect();
    json!({ "n": sys.n, "degree": sys.degree.to_string(), "mults": mults })
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("params are built as objects"),
    }
}

/// Flattens derivation trees into steps, sharing identical subtrees.
#[derive(Default)]
struct Writer {
    steps: Vec<StepRecord>,
    seen: HashMap<String, String>,
    m0: u64,
}

impl Writer {
    fn new() -> Self {
        Writer { m0: 1, ..Default::default() }
    }

    fn push(&mut self, rule: &str, params: Value, inputs: Vec<String>) -> String {
        let params = object(params);
        let key = format!("{rule}|{}|{}", Value::Object(params.clone()), inputs.join(","));
        if let Some(id) = self.seen.get(&key) {
            return id.clone();
        }
        let id = format!("s{}", self.steps.len());
        self.steps.push(StepRecord { id: id.clone(), rule: rule.to_string(), params, inputs });
        self.seen.insert(key, id.clone());
        id
    }

    fn emptiness(&mut self, cert: &EmptinessCertificate) -> String {
        self.m0 = self.m0.max(cert.m0);
        match cert.steps.as_slice() {
            [Step::AxiomLeaf { fact, q }] => {
                let input = self.bound(fact);
                self.push("empty_from_bound", json!({ "q": q.to_string() }), vec![input])
            }
            [Step::Glue { left, right }] => {
                let l = self.emptiness(left);
                let r = self.emptiness(right);
                self.push("glue", json!({}), vec![l, r])
            }
            steps => {
                let mut prev = self.push("start", json!({ "system": system_json(&cert.claim) }), vec![]);
                for step in steps {
                    prev = match step {
                        Step::Cremona { selection, k } => {
                            self.push("cremona", json!({ "selection": selection, "k": k.to_string() }), vec![prev])
                        }
                        Step::Clamp { dropped, threshold } => {
                            self.push("clamp", json!({ "dropped": dropped, "threshold": threshold }), vec![prev])
                        }
                        Step::Contradiction { witness, threshold } => {
                            let w = match witness {
                                Witness::Point(i) => json!(i),
                                Witness::NegativeDegree => json!("negative_degree"),
                            };
                            self.push("contradiction", json!({ "witness": w, "threshold": threshold }), vec![prev])
                        }
                        Step::AxiomLeaf { .. } | Step::Glue { .. } => unreachable!("leaf steps stand alone"),
                    };
                }
                prev
            }
        }
    }

    fn bound(&mut self, fact: &BoundFact) -> String {
        match &fact.derivation {
            Derivation::Axiom(tag) => self.push(
                "axiom",
                json!({
                    "source": serde_json::to_value(tag.source).expect("tag serializes"),
                    "citation": tag.source.citation(),
                    "n": tag.n,
                    "s": tag.s,
                    "bound": format_ratio(&tag.bound),
                }),
                vec![],
            ),
            Derivation::MonotoneLift { from } => {
                let i = self.bound(from);
                self.push("monotone_lift", json!({ "s": fact.s }), vec![i])
            }
            Derivation::DoubleSplit { from } => {
                let i = self.bound(from);
                self.push("double_split", json!({}), vec![i])
            }
            Derivation::Clump { a, b, cert } => {
                let i = self.emptiness(cert);
                self.push("clump", json!({ "a": a, "b": b }), vec![i])
            }
            Derivation::Chudnovsky { c } => {
                self.push("chudnovsky", json!({ "n": fact.n, "s": fact.s, "c": c }), vec![])
            }
            Derivation::Decompose { k, parts } => {
                let inputs = parts.iter().map(|p| self.bound(p)).collect();
                self.push("decompose", json!({ "k": k }), inputs)
            }
            Derivation::Weaken { from } => {
                let i = self.bound(from);
                self.push("weaken", json!({ "bound": format_ratio(&fact.bound) }), vec![i])
            }
            Derivation::FromEmpty { cert } => {
                let i = self.emptiness(cert);
                self.push("bound_from_empty", json!({}), vec![i])
            }
        }
    }

    fn finish(self, kind: Kind, claim: Value, tags: Vec<String>) -> CertificateFile {
        CertificateFile { version: FORMAT_VERSION, kind, claim, steps: self.steps, m0: self.m0, tags }
    }
}

pub fn bound_claim(fact: &BoundFact) -> Value {
    json!({ "n": fact.n, "s": fact.s, "bound": format_ratio(&fact.bound) })
}

pub fn emptiness_certificate(cert: &EmptinessCertificate) -> CertificateFile {
    let mut w = Writer::new();
    w.emptiness(cert);
    w.finish(Kind::Emptiness, system_json(&cert.claim), vec![])
}

pub fn bound_certificate(fact: &BoundFact) -> CertificateFile {
    let mut w = Writer::new();
    w.bound(fact);
    let tags = vec![format!("route: {}", fact.route())];
    w.finish(Kind::Bound, bound_claim(fact), tags)
}

pub fn verdict_claim(v: &Verdict) -> Value {
    json!({
        "n": v.n,
        "s": v.s,
        "mode": v.mode,
        "ell": v.ell,
        "required": format_ratio(&v.required),
        "achieved": format_ratio(&v.achieved.bound),
        "status": v.status.to_string(),
        "reg_bound": v.reg_bound,
        "containment_r": v.containment_r.as_ref().map(|r| r.to_string()),
    })
}

pub fn verdict_certificate(v: &Verdict) -> CertificateFile {
    let mut w = Writer::new();
    let b = w.bound(&v.achieved);
    w.push("verdict", json!({ "mode": v.mode }), vec![b]);
    let mut tags = vec![format!("route: {}", v.achieved.route())];
    tags.extend(v.notes.iter().cloned());
    w.finish(Kind::Verdict, verdict_claim(v), tags)
}
