//! JSON model document: parsing into [`SemModel`] and serialization back.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::marker::PhantomData;

use num_traits::ToPrimitive;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{
    validate_topology, Dag, EquationForm, Factorization, ModelError, MomentMode, MomentTable, PanelAssignment,
    ParameterMoments, PolicyValues, PolynomialTerm, SemModel, StructuralEquation, UtilitySpec,
};
use crate::poly::{rational_from_decimal, Indeterminate, VertexId};
use crate::Rational;

/// JSON object kept as an ordered list of entries, duplicates included.
#[derive(Debug, Clone, PartialEq)]
pub struct Entries<T>(pub Vec<(String, T)>);

impl<T> Default for Entries<T> {
    fn default() -> Self {
        Entries(Vec::new())
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Entries<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct EntriesVisitor<T>(PhantomData<T>);
        impl<'de, T: Deserialize<'de>> Visitor<'de> for EntriesVisitor<T> {
            type Value = Entries<T>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a JSON object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, T>()? {
                    out.push((k, v));
                }
                Ok(Entries(out))
            }
        }
        d.deserialize_map(EntriesVisitor(PhantomData))
    }
}

impl<T: Serialize> Serialize for Entries<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

/// A constant shared by every policy or given per policy id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueDoc {
    Scalar(f64),
    PerPolicy(Entries<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EquationDoc {
    Linear {
        vertex: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        intercept: Option<String>,
        #[serde(default)]
        coefficients: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variance: Option<String>,
    },
    Polynomial {
        vertex: u32,
        terms: Vec<TermDoc>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variance: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    #[serde(default)]
    pub exponents: Entries<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityDoc {
    #[serde(rename = "type")]
    pub factorization: String,
    pub degrees: Entries<u32>,
    pub weights: Entries<ValueDoc>,
    pub coefficients: Entries<Vec<ValueDoc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UtilityDocs {
    Single(UtilityDoc),
    Named(Entries<UtilityDoc>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MomentEntryDoc {
    Parameter {
        mean: ValueDoc,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        variance: Option<ValueDoc>,
    },
    Value(ValueDoc),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsDoc {
    pub mode: String,
    #[serde(default)]
    pub entries: Entries<MomentEntryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub vertices: Vec<u32>,
    #[serde(default)]
    pub edges: Vec<(u32, u32)>,
    pub equations: Vec<EquationDoc>,
    pub panels: Entries<String>,
    pub policies: Vec<String>,
    pub utility: UtilityDocs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<MomentsDoc>,
}

fn schema(msg: impl Into<String>) -> ModelError {
    ModelError::Schema(msg.into())
}

fn vertex_key(key: &str, what: &str) -> Result<VertexId, ModelError> {
    key.trim()
        .parse::<u32>()
        .ok()
        .filter(|v| *v > 0)
        .map(VertexId)
        .ok_or_else(|| schema(format!("{what}: `{key}` is not a vertex id")))
}

fn symbol(text: &str, what: &str) -> Result<Indeterminate, ModelError> {
    text.trim().parse().map_err(|_| schema(format!("{what}: unknown symbol `{text}`")))
}

fn policy_values<T, F>(value: &ValueDoc, policies: &[String], what: &str, conv: F) -> Result<PolicyValues<T>, ModelError>
where
    T: Clone,
    F: Fn(f64) -> Result<T, ModelError>,
{
    match value {
        ValueDoc::Scalar(x) => Ok(PolicyValues::uniform(conv(*x)?, policies.len())),
        ValueDoc::PerPolicy(entries) => {
            let mut out = vec![None; policies.len()];
            for (id, x) in &entries.0 {
                let idx = policies
                    .iter()
                    .position(|p| p == id)
                    .ok_or_else(|| ModelError::UnknownPolicy(format!("{id} (in {what})")))?;
                if out[idx].is_some() {
                    return Err(schema(format!("{what}: policy `{id}` given twice")));
                }
                out[idx] = Some(conv(*x)?);
            }
            Ok(PolicyValues(out))
        }
    }
}

fn exact(x: f64) -> Result<Rational, ModelError> {
    rational_from_decimal(x).ok_or_else(|| schema(format!("non-finite number {x}")))
}

fn float(x: f64) -> Result<f64, ModelError> {
    Ok(x)
}

fn build_equation(doc: &EquationDoc) -> Result<StructuralEquation, ModelError> {
    let parse_var = |v: &Option<String>, vertex: u32| -> Result<Option<Indeterminate>, ModelError> {
        v.as_deref().map(|s| symbol(s, &format!("vertex {vertex} variance"))).transpose()
    };
    match doc {
        EquationDoc::Linear { vertex, intercept, coefficients, variance } => {
            let what = format!("vertex {vertex} equation");
            if let Some(i) = intercept {
                let sym = symbol(i, &what)?;
                if sym != Indeterminate::intercept(*vertex) {
                    return Err(schema(format!("{what}: intercept must be t0{vertex}, found `{i}`")));
                }
            }
            let coefficients = coefficients.iter().map(|c| symbol(c, &what)).collect::<Result<Vec<_>, _>>()?;
            Ok(StructuralEquation {
                vertex: VertexId(*vertex),
                form: EquationForm::Linear { coefficients },
                variance: parse_var(variance, *vertex)?,
            })
        }
        EquationDoc::Polynomial { vertex, terms, variance } => {
            let what = format!("vertex {vertex} equation");
            let terms = terms
                .iter()
                .map(|t| {
                    let mut exponents = BTreeMap::new();
                    for (k, e) in &t.exponents.0 {
                        let v = vertex_key(k, &what)?;
                        if *e > 0 && exponents.insert(v, *e).is_some() {
                            return Err(schema(format!("{what}: vertex {v} repeated in an exponent vector")));
                        }
                    }
                    Ok(PolynomialTerm { exponents })
                })
                .collect::<Result<Vec<_>, ModelError>>()?;
            Ok(StructuralEquation {
                vertex: VertexId(*vertex),
                form: EquationForm::Polynomial { terms },
                variance: parse_var(variance, *vertex)?,
            })
        }
    }
}

fn build_utility(name: &str, doc: &UtilityDoc, policies: &[String]) -> Result<UtilitySpec, ModelError> {
    let what = format!("utility {name}");
    let factorization = match doc.factorization.as_str() {
        "additive" => Factorization::Additive,
        "multilinear" => Factorization::Multilinear,
        other => return Err(schema(format!("{what}: unknown type `{other}`"))),
    };
    let mut degrees = BTreeMap::new();
    for (k, n) in &doc.degrees.0 {
        if degrees.insert(vertex_key(k, &what)?, *n).is_some() {
            return Err(schema(format!("{what}: degree for vertex {k} given twice")));
        }
    }
    let mut weights = BTreeMap::new();
    for (k, w) in &doc.weights.0 {
        let mut set = k.split(',').map(|v| vertex_key(v, &what)).collect::<Result<Vec<_>, _>>()?;
        let n = set.len();
        set.sort_unstable();
        set.dedup();
        if set.len() != n {
            return Err(schema(format!("{what}: weight index set `{k}` repeats a vertex")));
        }
        let values = policy_values(w, policies, &what, exact)?;
        if weights.insert(set, values).is_some() {
            return Err(schema(format!("{what}: weight `{k}` given twice")));
        }
    }
    let mut coefficients = BTreeMap::new();
    for (k, list) in &doc.coefficients.0 {
        let v = vertex_key(k, &what)?;
        let values = list.iter().map(|x| policy_values(x, policies, &what, exact)).collect::<Result<Vec<_>, _>>()?;
        if coefficients.insert(v, values).is_some() {
            return Err(schema(format!("{what}: coefficients for vertex {k} given twice")));
        }
    }
    Ok(UtilitySpec { name: name.to_string(), factorization, degrees, weights, coefficients })
}

/// Moment entries against a policy list; geared for both documents and overrides.
fn build_moments(doc: &MomentsDoc, policies: &[String]) -> Result<MomentTable, ModelError> {
    let mode = match doc.mode.as_str() {
        "direct" => MomentMode::Direct,
        "mean_variance" => MomentMode::MeanVariance,
        other => return Err(schema(format!("moments: unknown mode `{other}`"))),
    };
    let mut table = MomentTable::empty(mode);
    for (key, entry) in &doc.entries.0 {
        let what = format!("moment `{key}`");
        match entry {
            MomentEntryDoc::Parameter { mean, variance } => {
                let sym = symbol(key, &what)?;
                let moments = ParameterMoments {
                    mean: policy_values(mean, policies, &what, float)?,
                    variance: variance.as_ref().map(|v| policy_values(v, policies, &what, float)).transpose()?,
                };
                if table.parameters.insert(sym, moments).is_some() {
                    return Err(schema(format!("{what} given twice")));
                }
            }
            MomentEntryDoc::Value(v) => {
                let poly: crate::Poly = key.parse().map_err(|_| schema(format!("{what}: not a monomial")))?;
                let mono = match poly.terms().next() {
                    Some((m, c)) if poly.len() == 1 && *c == Rational::from_integer(1.into()) => m.clone(),
                    _ => return Err(schema(format!("{what}: not a monomial"))),
                };
                let values = policy_values(v, policies, &what, float)?;
                if table.direct.insert(mono, values).is_some() {
                    return Err(schema(format!("{what} given twice")));
                }
            }
        }
    }
    Ok(table)
}

impl ModelDocument {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents always serialize")
    }

    /// Structural conversion only; see [`validate_topology`] for invariants.
    pub fn build(&self) -> Result<SemModel, ModelError> {
        if let Some(v) = self.version.filter(|v| *v != 1) {
            return Err(schema(format!("unsupported document version {v}")));
        }
        let vertices: Vec<VertexId> = self.vertices.iter().copied().map(VertexId).collect();
        let mut edges = BTreeSet::new();
        for &(p, c) in &self.edges {
            if !edges.insert((VertexId(p), VertexId(c))) {
                return Err(schema(format!("edge {p} -> {c} declared twice")));
            }
        }
        let dag = Dag::from_parts(vertices, edges);
        let equations = self.equations.iter().map(build_equation).collect::<Result<Vec<_>, _>>()?;

        let mut seen = BTreeSet::new();
        let mut panel_entries = Vec::new();
        for (k, panel) in &self.panels.0 {
            let v = vertex_key(k, "panels")?;
            if !dag.contains(v) {
                return Err(ModelError::Ownership(format!("panel {panel} claims undeclared vertex {v}")));
            }
            if !seen.insert(v) {
                return Err(ModelError::Ownership(format!("vertex {v} assigned to more than one panel")));
            }
            panel_entries.push((v, panel.clone()));
        }
        let panels = PanelAssignment::new(panel_entries);

        let mut policies_seen = BTreeSet::new();
        for p in &self.policies {
            if !policies_seen.insert(p) {
                return Err(schema(format!("policy `{p}` declared twice")));
            }
        }
        let utilities = match &self.utility {
            UtilityDocs::Single(u) => vec![build_utility("default", u, &self.policies)?],
            UtilityDocs::Named(entries) => {
                let mut names = BTreeSet::new();
                entries
                    .0
                    .iter()
                    .map(|(name, u)| {
                        if !names.insert(name) {
                            return Err(schema(format!("utility class `{name}` declared twice")));
                        }
                        build_utility(name, u, &self.policies)
                    })
                    .collect::<Result<Vec<_>, _>>()?
            }
        };
        let moments = match &self.moments {
            Some(m) => build_moments(m, &self.policies)?,
            None => MomentTable::empty(MomentMode::MeanVariance),
        };
        Ok(SemModel {
            name: self.name.clone(),
            dag,
            equations,
            panels,
            utilities,
            policies: self.policies.clone(),
            moments,
        })
    }

    pub fn from_model(model: &SemModel) -> Self {
        let policies = &model.policies;
        let equations = model
            .equations
            .iter()
            .map(|eq| {
                let variance = eq.variance.map(|v| v.to_string());
                match &eq.form {
                    EquationForm::Linear { coefficients } => EquationDoc::Linear {
                        vertex: eq.vertex.0,
                        intercept: None,
                        coefficients: coefficients.iter().map(|c| c.to_string()).collect(),
                        variance,
                    },
                    EquationForm::Polynomial { terms } => EquationDoc::Polynomial {
                        vertex: eq.vertex.0,
                        terms: terms
                            .iter()
                            .map(|t| TermDoc {
                                exponents: Entries(t.exponents.iter().map(|(v, e)| (v.to_string(), *e)).collect()),
                            })
                            .collect(),
                        variance,
                    },
                }
            })
            .collect();
        let utility_doc = |u: &UtilitySpec| UtilityDoc {
            factorization: match u.factorization {
                Factorization::Additive => "additive".into(),
                Factorization::Multilinear => "multilinear".into(),
            },
            degrees: Entries(u.degrees.iter().map(|(v, n)| (v.to_string(), *n)).collect()),
            weights: Entries(
                u.weights
                    .iter()
                    .map(|(set, w)| {
                        let key = set.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
                        (key, value_doc(w, policies, rational_to_f64))
                    })
                    .collect(),
            ),
            coefficients: Entries(
                u.coefficients
                    .iter()
                    .map(|(v, list)| (v.to_string(), list.iter().map(|x| value_doc(x, policies, rational_to_f64)).collect()))
                    .collect(),
            ),
        };
        let utility = match model.utilities.as_slice() {
            [only] if only.name == "default" => UtilityDocs::Single(utility_doc(only)),
            all => UtilityDocs::Named(Entries(all.iter().map(|u| (u.name.clone(), utility_doc(u))).collect())),
        };
        let mut entries: Vec<(String, MomentEntryDoc)> = model
            .moments
            .parameters
            .iter()
            .map(|(sym, pm)| {
                (
                    sym.to_string(),
                    MomentEntryDoc::Parameter {
                        mean: value_doc(&pm.mean, policies, |x| *x),
                        variance: pm.variance.as_ref().map(|v| value_doc(v, policies, |x| *x)),
                    },
                )
            })
            .collect();
        entries.extend(
            model
                .moments
                .direct
                .iter()
                .map(|(m, v)| (m.to_string(), MomentEntryDoc::Value(value_doc(v, policies, |x| *x)))),
        );
        ModelDocument {
            version: Some(1),
            name: model.name.clone(),
            vertices: model.dag.vertices().iter().map(|v| v.0).collect(),
            edges: model.dag.edges().map(|(p, c)| (p.0, c.0)).collect(),
            equations,
            panels: Entries(model.panels.entries().map(|(v, p)| (v.to_string(), p.to_string())).collect()),
            policies: policies.clone(),
            utility,
            moments: Some(MomentsDoc {
                mode: match model.moments.mode {
                    MomentMode::Direct => "direct".into(),
                    MomentMode::MeanVariance => "mean_variance".into(),
                },
                entries: Entries(entries),
            }),
        }
    }
}

fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn value_doc<T: PartialEq, F: Fn(&T) -> f64>(values: &PolicyValues<T>, policies: &[String], f: F) -> ValueDoc {
    let all_present = values.0.iter().all(Option::is_some);
    let uniform = all_present && values.0.windows(2).all(|w| w[0] == w[1]);
    match values.0.first() {
        Some(Some(first)) if uniform => ValueDoc::Scalar(f(first)),
        _ => ValueDoc::PerPolicy(Entries(
            values
                .0
                .iter()
                .zip(policies)
                .filter_map(|(v, p)| v.as_ref().map(|v| (p.clone(), f(v))))
                .collect(),
        )),
    }
}

/// Parses and validates a model document. Diagnostics become the error of the
/// first-reported kind, with every message joined.
pub fn parse_model(text: &str) -> Result<SemModel, ModelError> {
    let model = ModelDocument::from_json(text)?.build()?;
    let diags = validate_topology(&model);
    match ModelError::from_diagnostics(&diags) {
        Some(e) => Err(e),
        None => Ok(model),
    }
}

/// Parses a `moments` object (`{"mode": ..., "entries": ...}`) against the
/// model's policy list, for merging over the document's table.
pub fn parse_moment_overrides(value: &serde_json::Value, model: &SemModel) -> Result<MomentTable, ModelError> {
    let doc: MomentsDoc = serde_json::from_value(value.clone()).map_err(|e| schema(e.to_string()))?;
    build_moments(&doc, &model.policies)
}

impl Serialize for SemModel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ModelDocument::from_model(self).serialize(s)
    }
}
