use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{EquationForm, Factorization, SemModel};
use crate::poly::{Indeterminate, UtilitySymbol, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    Schema,
    Cycle,
    Ownership,
    MissingValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

struct Sink(Vec<Diagnostic>);

impl Sink {
    fn push(&mut self, kind: DiagnosticKind, message: String) {
        self.0.push(Diagnostic { kind, message });
    }
}

/// Checks every model invariant; the list is empty iff the model is valid.
/// Order violations come first, then schema, ownership and missing values.
pub fn validate_topology(model: &SemModel) -> Vec<Diagnostic> {
    use DiagnosticKind::*;
    let mut out = Sink(Vec::new());
    let dag = &model.dag;

    if dag.is_empty() {
        out.push(Schema, "model declares no vertices".into());
    }
    for (n, v) in dag.vertices().iter().enumerate() {
        if v.0 as usize != n + 1 {
            out.push(Schema, format!("vertices must be numbered 1..m in order; position {} holds {v}", n + 1));
            break;
        }
    }
    for (p, c) in dag.edges() {
        if !dag.contains(p) || !dag.contains(c) {
            out.push(Schema, format!("edge {p} -> {c}: endpoint not a declared vertex"));
        } else if p >= c {
            out.push(Cycle, format!("edge {p} -> {c}: parent must precede child in the vertex order"));
        }
    }

    for v in dag.vertices() {
        let count = model.equations.iter().filter(|e| e.vertex == *v).count();
        match count {
            0 => out.push(Schema, format!("vertex {v}: structural equation missing")),
            1 => {}
            _ => out.push(Schema, format!("vertex {v}: {count} structural equations declared")),
        }
    }
    for eq in &model.equations {
        let v = eq.vertex;
        if !dag.contains(v) {
            out.push(Schema, format!("equation for undeclared vertex {v}"));
            continue;
        }
        let parents: BTreeSet<VertexId> = dag.parents(v).into_iter().collect();
        match &eq.form {
            EquationForm::Linear { coefficients } => {
                let mut declared = BTreeSet::new();
                for c in coefficients {
                    match c {
                        Indeterminate::Edge { child, parent } if *child == v => {
                            if !parents.contains(parent) {
                                out.push(Schema, format!("vertex {v}: coefficient {c} references non-parent {parent}"));
                            }
                            if !declared.insert(*parent) {
                                out.push(Schema, format!("vertex {v}: coefficient {c} declared twice"));
                            }
                        }
                        _ => out.push(Schema, format!("vertex {v}: `{c}` is not an edge coefficient into {v}")),
                    }
                }
                for p in parents.difference(&declared) {
                    out.push(Schema, format!("vertex {v}: coefficient {} for parent {p} undeclared", Indeterminate::edge(p.0, v.0)));
                }
            }
            EquationForm::Polynomial { terms } => {
                let mut seen = BTreeSet::new();
                let mut used = BTreeSet::new();
                for t in terms {
                    for u in t.exponents.keys() {
                        if *u >= v {
                            out.push(Schema, format!("vertex {v}: exponent vector references vertex {u} not below {v}"));
                        } else if !parents.contains(u) {
                            out.push(Schema, format!("vertex {v}: exponent vector references non-parent {u}"));
                        }
                        used.insert(*u);
                    }
                    if !seen.insert(t.exponents.clone()) {
                        out.push(Schema, format!("vertex {v}: exponent vector repeated"));
                    }
                }
                for p in parents.difference(&used) {
                    out.push(Schema, format!("vertex {v}: parent {p} appears in no term"));
                }
            }
        }
        match eq.variance {
            None => out.push(Schema, format!("vertex {v}: error variance undeclared")),
            Some(Indeterminate::Variance(w)) if w == v => {}
            Some(other) => out.push(Schema, format!("vertex {v}: error variance must be psi{v}, found {other}")),
        }
    }

    for v in dag.vertices() {
        if model.panels.panel_of_vertex(*v).is_none() {
            out.push(Ownership, format!("vertex {v}: no panel has jurisdiction"));
        }
    }

    if model.policies.is_empty() {
        out.push(Schema, "policy set is empty".into());
    }
    if model.utilities.is_empty() {
        out.push(Schema, "no utility class declared".into());
    }
    let policy = |i: usize| model.policies.get(i).map(String::as_str).unwrap_or("?");
    for u in &model.utilities {
        let name = &u.name;
        for (v, n) in &u.degrees {
            if !dag.contains(*v) {
                out.push(Schema, format!("utility {name}: degree given for undeclared vertex {v}"));
            }
            if *n == 0 {
                out.push(Schema, format!("utility {name}: vertex {v} has degree 0"));
            }
            match u.coefficients.get(v) {
                None => out.push(MissingValue, format!("utility {name}: no coefficients for vertex {v}")),
                Some(c) if c.len() != *n as usize => out.push(
                    MissingValue,
                    format!("utility {name}: vertex {v} has degree {n} but {} coefficients", c.len()),
                ),
                Some(c) => {
                    for (j, values) in c.iter().enumerate() {
                        for d in values.missing() {
                            let rho = UtilitySymbol::Rho { vertex: *v, degree: j as u32 + 1 };
                            out.push(MissingValue, format!("utility {name}: {rho} has no value for policy {}", policy(d)));
                        }
                    }
                }
            }
        }
        for v in u.coefficients.keys() {
            if !u.degrees.contains_key(v) {
                out.push(Schema, format!("utility {name}: coefficients for vertex {v} without a degree"));
            }
        }
        if u.weights.is_empty() {
            out.push(Schema, format!("utility {name}: no criterion weights"));
        }
        for (set, values) in &u.weights {
            let label = UtilitySymbol::Weight(set.clone());
            if u.factorization == Factorization::Additive && set.len() != 1 {
                out.push(Schema, format!("utility {name}: additive utility cannot weight the set {label}"));
            }
            for v in set {
                if !u.degrees.contains_key(v) {
                    out.push(MissingValue, format!("utility {name}: weight {label} needs coefficients for vertex {v}"));
                }
            }
            for d in values.missing() {
                out.push(MissingValue, format!("utility {name}: {label} has no value for policy {}", policy(d)));
            }
        }
    }

    let universe = model.indeterminates();
    for (sym, pm) in &model.moments.parameters {
        if !universe.contains(sym) {
            out.push(Schema, format!("moment for {sym}, which is not a model parameter"));
        }
        for d in pm.mean.missing() {
            out.push(MissingValue, format!("moment {sym}: mean has no value for policy {}", policy(d)));
        }
        if let Some(var) = &pm.variance {
            for d in var.missing() {
                out.push(MissingValue, format!("moment {sym}: variance has no value for policy {}", policy(d)));
            }
            for (d, x) in var.0.iter().enumerate() {
                if matches!(x, Some(x) if *x < 0.0) {
                    out.push(Schema, format!("moment {sym}: negative variance for policy {}", policy(d)));
                }
            }
        }
    }
    for m in model.moments.direct.keys() {
        let panels: BTreeSet<Option<usize>> = m.variables().map(|s| model.panels.owner(s)).collect();
        if m.variables().any(|s| !universe.contains(s)) {
            out.push(Schema, format!("direct moment E({m}) mentions a symbol outside the model"));
        } else if panels.len() != 1 {
            out.push(Ownership, format!("direct moment E({m}) spans more than one panel"));
        }
    }
    let mut diags = out.0;
    diags.sort_by_key(|d| match d.kind {
        Cycle => 0,
        Schema => 1,
        Ownership => 2,
        MissingValue => 3,
    });
    diags
}
