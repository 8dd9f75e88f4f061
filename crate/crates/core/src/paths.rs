//! Rooted paths, path monomials and algebraic substitution.

use std::fmt;

use thiserror::Error;

use crate::model::{Dag, SemModel};
use crate::poly::{Indeterminate, Monomial, VertexId};
use crate::{Poly, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("vertex {0} has a polynomial structural equation; the path expansion needs a linear model")]
    NotLinear(VertexId),
    #[error("vertex {0} is not in the model")]
    UnknownVertex(VertexId),
}

/// A directed path `root -> ... -> target`; no edges means the trivial path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RootedPath {
    pub root: VertexId,
    pub edges: Vec<(VertexId, VertexId)>,
}

impl RootedPath {
    pub fn trivial(root: VertexId) -> Self {
        RootedPath { root, edges: Vec::new() }
    }

    pub fn target(&self) -> VertexId {
        self.edges.last().map(|e| e.1).unwrap_or(self.root)
    }

    /// θ_P: the root's augmented intercept times every edge coefficient.
    pub fn monomial(&self) -> Monomial<Indeterminate> {
        let root = Indeterminate::AugmentedIntercept(self.root);
        let edges = self.edges.iter().map(|(p, c)| (Indeterminate::edge(p.0, c.0), 1));
        Monomial::from_factors(std::iter::once((root, 1)).chain(edges))
    }
}

impl fmt::Display for RootedPath {
    /// `(1,(1,2),(2,3))`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.root)?;
        for (p, c) in &self.edges {
            write!(f, ",({p},{c})")?;
        }
        f.write_str(")")
    }
}

impl serde::Serialize for RootedPath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathMonomial {
    pub path: RootedPath,
    pub monomial: Monomial<Indeterminate>,
}

impl From<RootedPath> for PathMonomial {
    fn from(path: RootedPath) -> Self {
        let monomial = path.monomial();
        PathMonomial { path, monomial }
    }
}

/// All directed paths ending at `target`, sorted by root then edge list.
pub fn enumerate_rooted_paths(dag: &Dag, target: VertexId) -> Vec<RootedPath> {
    fn walk(dag: &Dag, head: VertexId, suffix: &mut Vec<(VertexId, VertexId)>, out: &mut Vec<RootedPath>) {
        let mut edges = suffix.clone();
        edges.reverse();
        out.push(RootedPath { root: head, edges });
        for p in dag.parents(head) {
            suffix.push((p, head));
            walk(dag, p, suffix, out);
            suffix.pop();
        }
    }
    let mut out = Vec::new();
    if dag.contains(target) {
        walk(dag, target, &mut Vec::new(), &mut out);
    }
    out.sort();
    out
}

fn check_vertex(model: &SemModel, target: VertexId) -> Result<(), PathError> {
    if model.dag.contains(target) {
        Ok(())
    } else {
        Err(PathError::UnknownVertex(target))
    }
}

fn require_linear(model: &SemModel) -> Result<(), PathError> {
    match model.first_nonlinear() {
        Some(v) => Err(PathError::NotLinear(v)),
        None => Ok(()),
    }
}

/// Y_target as the sum of its path monomials, over θ' and edge symbols.
pub fn expand_variable(model: &SemModel, target: VertexId) -> Result<Poly, PathError> {
    require_linear(model)?;
    check_vertex(model, target)?;
    let one = Rational::from_integer(1.into());
    Ok(Poly::from_terms(enumerate_rooted_paths(&model.dag, target).iter().map(|p| (p.monomial(), one.clone()))))
}

/// E(Y_target | θ, d), which for a linear model is the path expansion itself.
pub fn conditional_mean(model: &SemModel, target: VertexId) -> Result<Poly, PathError> {
    expand_variable(model, target)
}

/// Y_target by backward substitution of every structural equation, keeping the
/// explicit errors; the result is a polynomial in θ, θ_{i a} and ε.
pub fn expand_variable_general(model: &SemModel, target: VertexId) -> Result<Poly, PathError> {
    check_vertex(model, target)?;
    substitute_backward(model, Poly::var(Indeterminate::Placeholder(target)), |_, p| p)
}

/// Replaces placeholders `y_m, ..., y_1` by their right-hand sides, applying
/// `step` after each vertex is eliminated.
pub(crate) fn substitute_backward<F>(model: &SemModel, mut p: Poly, step: F) -> Result<Poly, PathError>
where
    F: Fn(VertexId, Poly) -> Poly,
{
    for v in model.dag.vertices().iter().rev() {
        let placeholder = Indeterminate::Placeholder(*v);
        if !p.contains_var(&placeholder) {
            continue;
        }
        let eq = model.equation(*v).ok_or(PathError::UnknownVertex(*v))?;
        p = p
            .substitute(&placeholder, &eq.right_hand_side())
            .expect("right-hand sides only mention lower-numbered vertices");
        p = step(*v, p);
    }
    Ok(p)
}

/// Rewrites every θ'0i as θ0i + εi.
pub fn expand_augmented(p: &Poly) -> Poly {
    let augmented: Vec<VertexId> = p
        .variables()
        .into_iter()
        .filter_map(|s| match s {
            Indeterminate::AugmentedIntercept(v) => Some(v),
            _ => None,
        })
        .collect();
    augmented.into_iter().fold(p.clone(), |acc, v| {
        let replacement = Poly::var(Indeterminate::Intercept(v)) + Poly::var(Indeterminate::Error(v));
        acc.substitute(&Indeterminate::AugmentedIntercept(v), &replacement)
            .expect("θ0i + εi does not contain θ'0i")
    })
}
