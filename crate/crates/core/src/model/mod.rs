//! The common-knowledge class: DAG, structural equations, panel jurisdiction,
//! utility factorization, policy set and panel moment deliveries.

mod document;
mod validate;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::poly::{Indeterminate, Monomial, VertexId};
use crate::{Poly, Rational};

pub use document::{parse_model, parse_moment_overrides, ModelDocument};
pub use validate::{validate_topology, Diagnostic, DiagnosticKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("cycle error: {0}")]
    Cycle(String),
    #[error("ownership error: {0}")]
    Ownership(String),
    #[error("missing value: {0}")]
    MissingValue(String),
    #[error("unknown utility class `{0}`")]
    UnknownUtility(String),
    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),
}

impl ModelError {
    fn from_diagnostics(diags: &[Diagnostic]) -> Option<Self> {
        let first = diags.first()?;
        let text = diags.iter().map(|d| d.message.as_str()).collect::<Vec<_>>().join("; ");
        Some(match first.kind {
            DiagnosticKind::Schema => ModelError::Schema(text),
            DiagnosticKind::Cycle => ModelError::Cycle(text),
            DiagnosticKind::Ownership => ModelError::Ownership(text),
            DiagnosticKind::MissingValue => ModelError::MissingValue(text),
        })
    }
}

/// Directed graph over vertices `1..=m`. Acyclicity (parents numbered below
/// children) is checked by [`validate_topology`], not on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    vertices: Vec<VertexId>,
    edges: BTreeSet<(VertexId, VertexId)>,
}

impl Dag {
    pub fn new<I: IntoIterator<Item = (u32, u32)>>(vertex_count: u32, edges: I) -> Self {
        Dag {
            vertices: (1..=vertex_count).map(VertexId).collect(),
            edges: edges.into_iter().map(|(p, c)| (VertexId(p), VertexId(c))).collect(),
        }
    }

    /// Every edge `i -> j` with `i < j`.
    pub fn complete(vertex_count: u32) -> Self {
        let edges = (1..=vertex_count).flat_map(|j| (1..j).map(move |i| (i, j)));
        Self::new(vertex_count, edges)
    }

    pub(crate) fn from_parts(vertices: Vec<VertexId>, edges: BTreeSet<(VertexId, VertexId)>) -> Self {
        Dag { vertices, edges }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, parent: VertexId, child: VertexId) -> bool {
        self.edges.contains(&(parent, child))
    }

    /// Π_v in ascending order.
    pub fn parents(&self, v: VertexId) -> Vec<VertexId> {
        self.edges.iter().filter(|(_, c)| *c == v).map(|(p, _)| *p).collect()
    }

    pub fn children(&self, v: VertexId) -> Vec<VertexId> {
        self.edges.iter().filter(|(p, _)| *p == v).map(|(_, c)| *c).collect()
    }
}

/// One monomial term `θ · ∏ Y_j^{a_j}` of a polynomial structural equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolynomialTerm {
    pub exponents: BTreeMap<VertexId, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquationForm {
    /// `Y_i = θ0i + Σ θji Y_j + ε_i`; `coefficients` are the declared θji.
    Linear { coefficients: Vec<Indeterminate> },
    Polynomial { terms: Vec<PolynomialTerm> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralEquation {
    pub vertex: VertexId,
    pub form: EquationForm,
    /// Declared error-variance symbol ψi.
    pub variance: Option<Indeterminate>,
}

impl StructuralEquation {
    pub fn is_linear(&self) -> bool {
        matches!(self.form, EquationForm::Linear { .. })
    }

    /// Parameter carried by a polynomial term: θ0i for the empty exponent
    /// vector, θji for a single parent with exponent one, θ_{i a} otherwise.
    pub fn term_symbol(&self, index: usize, term: &PolynomialTerm) -> Indeterminate {
        let nonzero: Vec<(VertexId, u32)> =
            term.exponents.iter().filter(|(_, e)| **e > 0).map(|(v, e)| (*v, *e)).collect();
        match nonzero.as_slice() {
            [] => Indeterminate::Intercept(self.vertex),
            [(p, 1)] => Indeterminate::Edge { child: self.vertex, parent: *p },
            _ => Indeterminate::Coefficient { vertex: self.vertex, term: index as u32 },
        }
    }

    /// Parameters (excluding ψ) appearing in the regression.
    pub fn parameters(&self) -> Vec<Indeterminate> {
        match &self.form {
            EquationForm::Linear { coefficients } => {
                let mut out = vec![Indeterminate::Intercept(self.vertex)];
                out.extend(coefficients.iter().copied());
                out
            }
            EquationForm::Polynomial { terms } => {
                terms.iter().enumerate().map(|(i, t)| self.term_symbol(i, t)).collect()
            }
        }
    }

    /// Right-hand side over parent placeholders, including the explicit `+ ε_i`.
    pub fn right_hand_side(&self) -> Poly {
        let one = Rational::from_integer(1.into());
        let mut rhs = Poly::var(Indeterminate::Error(self.vertex));
        match &self.form {
            EquationForm::Linear { coefficients } => {
                rhs.add_term(Monomial::var(Indeterminate::Intercept(self.vertex)), one.clone());
                for c in coefficients {
                    if let Some(p) = c.parent() {
                        let m = Monomial::from_factors([(*c, 1), (Indeterminate::Placeholder(p), 1)]);
                        rhs.add_term(m, one.clone());
                    }
                }
            }
            EquationForm::Polynomial { terms } => {
                for (i, t) in terms.iter().enumerate() {
                    let factors = std::iter::once((self.term_symbol(i, t), 1))
                        .chain(t.exponents.iter().map(|(v, e)| (Indeterminate::Placeholder(*v), *e)));
                    rhs.add_term(Monomial::from_factors(factors), one.clone());
                }
            }
        }
        rhs
    }
}

/// Which panel has jurisdiction over each vertex (and so over its θ, ψ, ρ).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PanelAssignment {
    panels: Vec<String>,
    of_vertex: BTreeMap<VertexId, usize>,
}

impl PanelAssignment {
    /// Panels are numbered in order of first appearance.
    pub fn new<I: IntoIterator<Item = (VertexId, String)>>(entries: I) -> Self {
        let mut panels: Vec<String> = Vec::new();
        let mut of_vertex = BTreeMap::new();
        for (v, id) in entries {
            let idx = match panels.iter().position(|p| *p == id) {
                Some(i) => i,
                None => {
                    panels.push(id);
                    panels.len() - 1
                }
            };
            of_vertex.insert(v, idx);
        }
        PanelAssignment { panels, of_vertex }
    }

    /// Panel `G<i>` for every vertex `i`.
    pub fn one_per_vertex(dag: &Dag) -> Self {
        Self::new(dag.vertices().iter().map(|v| (*v, format!("G{v}"))))
    }

    pub fn panels(&self) -> &[String] {
        &self.panels
    }

    pub fn panel_of_vertex(&self, v: VertexId) -> Option<usize> {
        self.of_vertex.get(&v).copied()
    }

    pub fn owner(&self, symbol: &Indeterminate) -> Option<usize> {
        self.panel_of_vertex(symbol.vertex())
    }

    pub fn panel_id(&self, index: usize) -> &str {
        &self.panels[index]
    }

    pub fn vertices_of(&self, index: usize) -> Vec<VertexId> {
        self.of_vertex.iter().filter(|(_, p)| **p == index).map(|(v, _)| *v).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (VertexId, &str)> {
        self.of_vertex.iter().map(|(v, p)| (*v, self.panels[*p].as_str()))
    }
}

/// A per-policy constant; `None` marks a policy with no value yet.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyValues<T>(pub Vec<Option<T>>);

impl<T: Clone> PolicyValues<T> {
    pub fn uniform(value: T, policies: usize) -> Self {
        PolicyValues(vec![Some(value); policies])
    }

    pub fn get(&self, policy: usize) -> Option<&T> {
        self.0.get(policy).and_then(Option::as_ref)
    }

    pub fn missing(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, v)| v.is_none()).map(|(i, _)| i)
    }

    /// Overwrites entries that are present in `other`.
    pub fn merge(&mut self, other: &PolicyValues<T>) {
        for (slot, new) in self.0.iter_mut().zip(other.0.iter()) {
            if let Some(v) = new {
                *slot = Some(v.clone());
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factorization {
    Additive,
    Multilinear,
}

/// Panel-separable polynomial utility `Σ_I k_I ∏_{i∈I} Σ_j ρ_ij y_i^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilitySpec {
    pub name: String,
    pub factorization: Factorization,
    /// Marginal degree n_i per vertex carrying a marginal utility.
    pub degrees: BTreeMap<VertexId, u32>,
    /// k_I keyed by the ascending index set I.
    pub weights: BTreeMap<Vec<VertexId>, PolicyValues<Rational>>,
    /// ρ_ij for j = 1..=n_i.
    pub coefficients: BTreeMap<VertexId, Vec<PolicyValues<Rational>>>,
}

impl UtilitySpec {
    pub fn weight(&self, set: &[VertexId], policy: usize) -> Option<&Rational> {
        self.weights.get(set).and_then(|w| w.get(policy))
    }

    pub fn rho(&self, vertex: VertexId, degree: u32, policy: usize) -> Option<&Rational> {
        let idx = degree.checked_sub(1)? as usize;
        self.coefficients.get(&vertex).and_then(|c| c.get(idx)).and_then(|v| v.get(policy))
    }

    /// Direct numeric evaluation of u(y, d) from the factorization.
    pub fn evaluate(&self, y: &BTreeMap<VertexId, f64>, policy: usize) -> f64 {
        use num_traits::ToPrimitive;
        let marginal = |v: VertexId| -> f64 {
            let n = self.degrees.get(&v).copied().unwrap_or(0);
            let yv = y.get(&v).copied().unwrap_or(0.0);
            (1..=n)
                .map(|j| self.rho(v, j, policy).and_then(|r| r.to_f64()).unwrap_or(0.0) * yv.powi(j as i32))
                .sum()
        };
        self.weights
            .iter()
            .map(|(set, w)| {
                let k = w.get(policy).and_then(|r| r.to_f64()).unwrap_or(0.0);
                set.iter().fold(k, |acc, v| acc * marginal(*v))
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMode {
    /// Only direct entries E(within-panel monomial) are used.
    Direct,
    /// Means and variances per parameter, closed under a moment closure rule.
    MeanVariance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterMoments {
    pub mean: PolicyValues<f64>,
    /// `None` means the parameter is a point mass at its mean.
    pub variance: Option<PolicyValues<f64>>,
}

/// Panel deliveries: per-parameter mean/variance plus direct joint moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub mode: MomentMode,
    pub parameters: BTreeMap<Indeterminate, ParameterMoments>,
    pub direct: BTreeMap<Monomial<Indeterminate>, PolicyValues<f64>>,
}

impl MomentTable {
    pub fn empty(mode: MomentMode) -> Self {
        MomentTable { mode, parameters: BTreeMap::new(), direct: BTreeMap::new() }
    }

    pub fn mean(&self, symbol: &Indeterminate, policy: usize) -> Option<f64> {
        self.parameters.get(symbol).and_then(|p| p.mean.get(policy)).copied()
    }

    pub fn variance(&self, symbol: &Indeterminate, policy: usize) -> Option<f64> {
        let p = self.parameters.get(symbol)?;
        match &p.variance {
            None => Some(0.0),
            Some(v) => v.get(policy).copied(),
        }
    }

    pub fn direct(&self, monomial: &Monomial<Indeterminate>, policy: usize) -> Option<f64> {
        self.direct.get(monomial).and_then(|v| v.get(policy)).copied()
    }

    /// Entries of `overrides` replace the matching entries of `self`.
    pub fn merge(&mut self, overrides: &MomentTable) {
        for (symbol, o) in &overrides.parameters {
            match self.parameters.get_mut(symbol) {
                Some(base) => {
                    base.mean.merge(&o.mean);
                    if let Some(ov) = &o.variance {
                        match &mut base.variance {
                            Some(bv) => bv.merge(ov),
                            None => {
                                let mut bv = PolicyValues::uniform(0.0, ov.0.len());
                                bv.merge(ov);
                                base.variance = Some(bv);
                            }
                        }
                    }
                }
                None => {
                    self.parameters.insert(*symbol, o.clone());
                }
            }
        }
        for (m, o) in &overrides.direct {
            match self.direct.get_mut(m) {
                Some(base) => base.merge(o),
                None => {
                    self.direct.insert(m.clone(), o.clone());
                }
            }
        }
    }
}

/// A validated common-knowledge class.
#[derive(Debug, Clone, PartialEq)]
pub struct SemModel {
    pub name: Option<String>,
    pub dag: Dag,
    pub equations: Vec<StructuralEquation>,
    pub panels: PanelAssignment,
    pub utilities: Vec<UtilitySpec>,
    pub policies: Vec<String>,
    pub moments: MomentTable,
}

impl SemModel {
    pub fn equation(&self, v: VertexId) -> Option<&StructuralEquation> {
        self.equations.iter().find(|e| e.vertex == v)
    }

    pub fn is_linear(&self) -> bool {
        self.equations.iter().all(StructuralEquation::is_linear)
    }

    /// First vertex whose equation is not linear.
    pub fn first_nonlinear(&self) -> Option<VertexId> {
        self.equations.iter().find(|e| !e.is_linear()).map(|e| e.vertex)
    }

    pub fn policy_index(&self, id: &str) -> Result<usize, ModelError> {
        self.policies.iter().position(|p| p == id).ok_or_else(|| ModelError::UnknownPolicy(id.to_string()))
    }

    /// Selects a utility class by name, defaulting to the first declared.
    pub fn utility(&self, name: Option<&str>) -> Result<&UtilitySpec, ModelError> {
        match name {
            None => self.utilities.first().ok_or_else(|| ModelError::UnknownUtility("<none>".into())),
            Some(n) => self.utilities.iter().find(|u| u.name == n).ok_or_else(|| ModelError::UnknownUtility(n.into())),
        }
    }

    /// All random parameters of the model (θ, θ_{i a}, ψ).
    pub fn indeterminates(&self) -> BTreeSet<Indeterminate> {
        let mut out = BTreeSet::new();
        for eq in &self.equations {
            out.extend(eq.parameters());
            out.insert(Indeterminate::Variance(eq.vertex));
        }
        out
    }
}
