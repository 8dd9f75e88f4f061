use serde::Serialize;

use crate::model::SemModel;
use crate::paths::{enumerate_rooted_paths, PathError, RootedPath};
use crate::poly::{Indeterminate, Monomial, VertexId};

/// One unordered tuple of rooted paths contributing to Y^a.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathTuple {
    /// Paths grouped by target vertex, each group a sorted multiset.
    pub paths: Vec<RootedPath>,
    /// Number of ordered arrangements: the product over targets of the
    /// multinomial coefficient of the path multiplicities.
    pub count: u64,
    /// Product of the path monomials, before error reduction.
    pub monomial: Monomial<Indeterminate>,
}

fn factorial(n: u32) -> u64 {
    (1..=n as u64).product()
}

/// Non-decreasing index sequences of length `k` over `0..n`.
fn multisets(n: usize, k: u32) -> Vec<Vec<usize>> {
    fn rec(n: usize, k: u32, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k - 1, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, 0, &mut Vec::new(), &mut out);
    out
}

fn multinomial(choice: &[usize], k: u32) -> u64 {
    let mut denom = 1u64;
    let mut run = 1u32;
    for w in choice.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            denom *= factorial(run);
            run = 1;
        }
    }
    if !choice.is_empty() {
        denom *= factorial(run);
    }
    factorial(k) / denom
}

/// Every unordered path tuple in 𝒫_a for the exponent vector `a` (a monomial
/// in vertex ids), found by explicit enumeration.
pub fn path_tuples(model: &SemModel, a: &Monomial<VertexId>) -> Result<Vec<PathTuple>, PathError> {
    if let Some(v) = model.first_nonlinear() {
        return Err(PathError::NotLinear(v));
    }
    let mut tuples = vec![PathTuple { paths: Vec::new(), count: 1, monomial: Monomial::one() }];
    for (v, k) in a.factors() {
        if !model.dag.contains(*v) {
            return Err(PathError::UnknownVertex(*v));
        }
        let paths = enumerate_rooted_paths(&model.dag, *v);
        let choices = multisets(paths.len(), *k);
        let mut next = Vec::with_capacity(tuples.len() * choices.len());
        for t in &tuples {
            for choice in &choices {
                let mut grown = t.clone();
                for &i in choice {
                    grown.paths.push(paths[i].clone());
                    grown.monomial = grown.monomial.mul(&paths[i].monomial());
                }
                grown.count *= multinomial(choice, *k);
                next.push(grown);
            }
        }
        tuples = next;
    }
    Ok(tuples)
}
