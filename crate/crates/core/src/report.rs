//! Versioned report documents shared by the command line and the service.
//!
//! Every report renders as an aligned text table or as pretty JSON carrying
//! `version`. Both forms are deterministic: terms follow the canonical
//! monomial order and policies follow declaration order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::ceu::{exponent_label, CeuReport, ErrorMomentPolicy};
use crate::evaluate::{MomentClosure, OracleEstimate, ScoreBoard};
use crate::model::{Diagnostic, SemModel};
use crate::paths::{enumerate_rooted_paths, expand_variable, PathError};
use crate::poly::VertexId;
use crate::separability::AdequacySpec;

pub const REPORT_VERSION: u32 = 1;

pub trait Report: Serialize {
    fn table(&self) -> String;

    fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Format::Table),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected table or json)")),
        }
    }
}

pub fn render<R: Report>(report: &R, format: Format) -> String {
    match format {
        Format::Table => report.table(),
        Format::Json => report.json(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub version: u32,
    pub valid: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn new(diagnostics: Vec<Diagnostic>) -> Self {
        ValidationReport { version: REPORT_VERSION, valid: diagnostics.is_empty(), diagnostics }
    }
}

impl Report for ValidationReport {
    /// Empty when the model is valid.
    fn table(&self) -> String {
        let mut out = String::new();
        for d in &self.diagnostics {
            let kind = serde_json::to_value(d.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
            let _ = writeln!(out, "{kind}: {}", d.message);
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PathEntry {
    pub path: String,
    pub monomial: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexPaths {
    pub vertex: u32,
    pub paths: Vec<PathEntry>,
    pub expansion: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathsReport {
    pub version: u32,
    pub vertices: Vec<VertexPaths>,
}

impl PathsReport {
    /// Rooted paths of `only`, or of every vertex.
    pub fn new(model: &SemModel, only: Option<VertexId>) -> Result<Self, PathError> {
        let targets: Vec<VertexId> = match only {
            Some(v) => vec![v],
            None => model.dag.vertices().to_vec(),
        };
        let vertices = targets
            .into_iter()
            .map(|v| {
                let expansion = expand_variable(model, v)?;
                let paths = enumerate_rooted_paths(&model.dag, v)
                    .iter()
                    .map(|p| PathEntry { path: p.to_string(), monomial: p.monomial().to_string() })
                    .collect();
                Ok(VertexPaths { vertex: v.0, paths, expansion: expansion.to_string() })
            })
            .collect::<Result<_, PathError>>()?;
        Ok(PathsReport { version: REPORT_VERSION, vertices })
    }
}

impl Report for PathsReport {
    fn table(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "Y{} = {}", v.vertex, v.expansion);
            let width = v.paths.iter().map(|p| p.path.len()).max().unwrap_or(0);
            for p in &v.paths {
                let _ = writeln!(out, "  {:<width$}  {}", p.path, p.monomial);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TupleEntry {
    pub exponents: String,
    pub paths: Vec<String>,
    pub count: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CeuTerm {
    pub monomial: String,
    pub coefficient: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tuples: Option<Vec<TupleEntry>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CeuDocument {
    pub version: u32,
    pub utility: String,
    pub errors: ErrorMomentPolicy,
    /// `None` for the symbolic master CEU.
    pub policy: Option<String>,
    pub monomials: usize,
    /// The truncation rule discarded even error powers ≥ 4; the Gaussian rule
    /// would keep them.
    pub truncated: bool,
    pub terms: Vec<CeuTerm>,
}

impl CeuDocument {
    /// The master CEU, or the numeric CEU of `policy`.
    pub fn new(report: &CeuReport, policy: Option<usize>) -> Self {
        let tuples_of = |m| {
            report.provenance.as_ref().map(|p| {
                p.get(m)
                    .into_iter()
                    .flatten()
                    .map(|t| TupleEntry {
                        exponents: exponent_label(&t.exponents),
                        paths: t.tuple.paths.iter().map(ToString::to_string).collect(),
                        count: t.tuple.count,
                    })
                    .collect()
            })
        };
        let terms: Vec<CeuTerm> = match policy {
            None => report
                .master
                .terms()
                .map(|(m, c)| CeuTerm { monomial: m.to_string(), coefficient: c.to_string(), tuples: tuples_of(m) })
                .collect(),
            Some(d) => report.per_policy[d]
                .terms()
                .map(|(m, c)| CeuTerm { monomial: m.to_string(), coefficient: c.to_string(), tuples: tuples_of(m) })
                .collect(),
        };
        CeuDocument {
            version: REPORT_VERSION,
            utility: report.utility.clone(),
            errors: report.errors,
            policy: policy.map(|d| report.policies[d].clone()),
            monomials: terms.len(),
            truncated: report.truncated,
            terms,
        }
    }
}

impl Report for CeuDocument {
    fn table(&self) -> String {
        let mut out = String::new();
        let scope = self.policy.as_deref().unwrap_or("symbolic");
        let _ = writeln!(
            out,
            "utility {} ({scope}), error moments {}: {} monomials",
            self.utility, self.errors, self.monomials
        );
        if self.truncated {
            out.push_str("note: even error powers of order 4 and above were set to zero\n");
        }
        let width = self.terms.iter().map(|t| t.coefficient.len()).max().unwrap_or(0);
        for t in &self.terms {
            let _ = writeln!(out, "{:>width$}  {}", t.coefficient, t.monomial);
            for tuple in t.tuples.iter().flatten() {
                let _ = writeln!(out, "{:width$}    {} x{}: {}", "", tuple.exponents, tuple.count, tuple.paths.join(" "));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AdequacyView {
    #[default]
    All,
    Summaries,
    Conditions,
}

impl std::str::FromStr for AdequacyView {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(AdequacyView::All),
            "summaries" => Ok(AdequacyView::Summaries),
            "conditions" | "independences" => Ok(AdequacyView::Conditions),
            other => Err(format!("unknown view `{other}` (expected all, summaries or conditions)")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryEntry {
    pub panel: String,
    pub monomial: String,
    pub text: String,
    pub policies: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorEntry {
    pub panel: String,
    pub monomial: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionEntry {
    pub text: String,
    pub monomial: String,
    pub factors: Vec<FactorEntry>,
    pub sources: Vec<usize>,
    pub policies: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdequacyDocument {
    pub version: u32,
    pub utility: String,
    pub view: AdequacyView,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summaries: Option<Vec<SummaryEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<Vec<ConditionEntry>>,
    /// Largest exponent per parameter over the required summaries.
    pub orders: BTreeMap<String, u32>,
    pub assumes_quasi_independence: bool,
}

impl AdequacyDocument {
    pub fn new(utility: &str, spec: &AdequacySpec, view: AdequacyView) -> Self {
        let summaries = (view != AdequacyView::Conditions).then(|| {
            spec.summaries
                .iter()
                .map(|s| SummaryEntry {
                    panel: s.panel.clone(),
                    monomial: s.monomial.to_string(),
                    text: s.to_string(),
                    policies: s.policies.clone(),
                })
                .collect()
        });
        let conditions = (view != AdequacyView::Summaries).then(|| {
            spec.conditions
                .iter()
                .map(|c| ConditionEntry {
                    text: c.to_string(),
                    monomial: c.monomial.to_string(),
                    factors: c
                        .factors
                        .iter()
                        .map(|f| FactorEntry { panel: f.panel.clone(), monomial: f.monomial.to_string() })
                        .collect(),
                    sources: c.sources.clone(),
                    policies: c.policies.clone(),
                })
                .collect()
        });
        AdequacyDocument {
            version: REPORT_VERSION,
            utility: utility.to_string(),
            view,
            summaries,
            conditions,
            orders: spec.orders.iter().map(|(s, e)| (s.to_string(), *e)).collect(),
            assumes_quasi_independence: spec.assumes_quasi_independence,
        }
    }
}

impl Report for AdequacyDocument {
    /// One requirement per line.
    fn table(&self) -> String {
        let mut out = String::new();
        for s in self.summaries.iter().flatten() {
            let _ = writeln!(out, "{}", s.text);
        }
        for c in self.conditions.iter().flatten() {
            let _ = writeln!(out, "{}", c.text);
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoreDocument {
    pub version: u32,
    pub utility: String,
    pub errors: ErrorMomentPolicy,
    pub closure: MomentClosure,
    #[serde(flatten)]
    pub board: ScoreBoard<f64>,
}

impl ScoreDocument {
    pub fn new(utility: &str, errors: ErrorMomentPolicy, closure: MomentClosure, board: ScoreBoard<f64>) -> Self {
        ScoreDocument { version: REPORT_VERSION, utility: utility.to_string(), errors, closure, board }
    }
}

impl Report for ScoreDocument {
    fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "utility {}, error moments {}, closure {}", self.utility, self.errors, self.closure);
        let width = self.board.scores.iter().map(|s| s.policy.len()).max().unwrap_or(0).max(6);
        let _ = writeln!(out, "{:<width$}  {:>20}  {:>10}", "policy", "EU", "normalized");
        for s in &self.board.scores {
            let _ = writeln!(out, "{:<width$}  {:>20.10}  {:>10.6}", s.policy, s.eu, s.normalized);
        }
        let _ = writeln!(out, "ranking: {}", self.board.ranking.join(" > "));
        for group in &self.board.ties {
            let _ = writeln!(out, "tie: {}", group.join(" = "));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleEntry {
    pub policy: String,
    #[serde(flatten)]
    pub estimate: OracleEstimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleDocument {
    pub version: u32,
    pub utility: String,
    pub estimates: Vec<OracleEntry>,
}

impl OracleDocument {
    pub fn new(utility: &str, estimates: Vec<OracleEntry>) -> Self {
        OracleDocument { version: REPORT_VERSION, utility: utility.to_string(), estimates }
    }
}

impl Report for OracleDocument {
    fn table(&self) -> String {
        let mut out = String::new();
        for e in &self.estimates {
            let _ = writeln!(
                out,
                "{}: {:.10} ± {:.10} ({} samples, seed {})",
                e.policy, e.estimate.mean, e.estimate.std_error, e.estimate.samples, e.estimate.seed
            );
        }
        out
    }
}
