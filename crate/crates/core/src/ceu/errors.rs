use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::poly::{Indeterminate, Monomial, Polynomial, Ring, VertexId};

/// How E(ε_i^k | ψ_i) is written as a polynomial in ψ_i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorMomentPolicy {
    /// ε^2 → ψ, every other positive power → 0.
    #[default]
    Truncate,
    /// Normal errors: odd powers → 0, ε^{2k} → (2k−1)!! ψ^k.
    Gaussian,
}

impl ErrorMomentPolicy {
    /// E(ε^k) as `(coefficient, power of ψ)`, or `None` when it is zero.
    pub fn moment(self, k: u32) -> Option<(u64, u32)> {
        match (self, k) {
            (_, 0) => Some((1, 0)),
            (_, k) if k % 2 == 1 => None,
            (ErrorMomentPolicy::Truncate, 2) => Some((1, 1)),
            (ErrorMomentPolicy::Truncate, _) => None,
            (ErrorMomentPolicy::Gaussian, k) => Some((double_factorial(k - 1), k / 2)),
        }
    }

    /// True when this policy zeroes a moment a normal error would not.
    pub fn drops(self, k: u32) -> bool {
        self == ErrorMomentPolicy::Truncate && k >= 4 && k % 2 == 0
    }
}

impl fmt::Display for ErrorMomentPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorMomentPolicy::Truncate => "truncate",
            ErrorMomentPolicy::Gaussian => "gaussian",
        })
    }
}

impl FromStr for ErrorMomentPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "truncate" => Ok(ErrorMomentPolicy::Truncate),
            "gaussian" => Ok(ErrorMomentPolicy::Gaussian),
            other => Err(format!("unknown error-moment policy `{other}` (expected truncate or gaussian)")),
        }
    }
}

fn double_factorial(n: u32) -> u64 {
    (1..=n as u64).rev().step_by(2).product()
}

pub(crate) fn binomial(n: u32, k: u32) -> u64 {
    let k = k.min(n - k) as u64;
    (0..k).fold(1u64, |acc, i| acc * (n as u64 - i) / (i + 1))
}

/// Result of eliminating errors from a polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduced<C> {
    pub poly: Polynomial<Indeterminate, C>,
    /// Set when the truncation rule discarded an even error power ≥ 4.
    pub truncated: bool,
}

/// Expands each θ'0i into θ0i + εi and replaces every ε power by its moment,
/// treating errors as mutually independent, zero-mean and independent of θ
/// given ψ. The result mentions only θ and ψ symbols.
pub fn reduce_errors<C: Ring>(p: &Polynomial<Indeterminate, C>, policy: ErrorMomentPolicy) -> Reduced<C> {
    let mut out = Polynomial::zero();
    let mut truncated = false;
    let mut cache: BTreeMap<(VertexId, u32, u32), Polynomial<Indeterminate, C>> = BTreeMap::new();
    for (m, c) in p.terms() {
        // (θ'0i exponent, εi exponent) per vertex
        let mut per_vertex: BTreeMap<VertexId, (u32, u32)> = BTreeMap::new();
        let mut rest = Vec::new();
        for (s, e) in m.factors() {
            match s {
                Indeterminate::AugmentedIntercept(v) => per_vertex.entry(*v).or_default().0 += e,
                Indeterminate::Error(v) => per_vertex.entry(*v).or_default().1 += e,
                _ => rest.push((*s, *e)),
            }
        }
        let mut term = Polynomial::term(Monomial::from_factors(rest), c.clone());
        for (v, (k, r)) in per_vertex {
            let factor = cache.entry((v, k, r)).or_insert_with(|| {
                let (poly, dropped) = vertex_factor(v, k, r, policy);
                truncated |= dropped;
                poly
            });
            term = &term * factor;
            if term.is_zero() {
                break;
            }
        }
        out = out + term;
    }
    Reduced { poly: out, truncated }
}

/// E((θ0v + εv)^k εv^r | θ0v, ψv) = Σ_j C(k, j) θ0v^{k−j} M(j + r).
fn vertex_factor<C: Ring>(v: VertexId, k: u32, r: u32, policy: ErrorMomentPolicy) -> (Polynomial<Indeterminate, C>, bool) {
    let mut out = Polynomial::zero();
    let mut dropped = false;
    for j in 0..=k {
        let n = j + r;
        dropped |= policy.drops(n);
        if let Some((coef, psi)) = policy.moment(n) {
            let m = Monomial::from_factors([(Indeterminate::Intercept(v), k - j), (Indeterminate::Variance(v), psi)]);
            out.add_term(m, C::from_count(binomial(k, j) * coef));
        }
    }
    (out, dropped)
}
