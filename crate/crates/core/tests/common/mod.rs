//! Fixtures shared by the integration suites and the acceptance binary.
#![allow(dead_code)]

pub mod checks;
pub mod random;

use std::collections::BTreeSet;

use idss_core::model::{parse_model, SemModel};
use idss_core::poly::{Indeterminate, Monomial, UtilitySymbol};
use idss_core::{CoefficientPoly, Rational, SymbolicPoly, FOOD_SECURITY_MODEL};

pub fn food() -> SemModel {
    parse_model(FOOD_SECURITY_MODEL).expect("bundled model is valid")
}

/// Symbolic CEU of the additive class, one term per line: an optional integer,
/// then k and ρ symbols, then parameters.
pub const ADDITIVE_CEU: &[&str] = &[
    "k1 rho11 t01",
    "k1 rho12 t01^2",
    "k1 rho12 psi1",
    "k2 rho21 t02",
    "k2 rho21 t01 t12",
    "k2 rho22 t02^2",
    "k2 rho22 psi2",
    "k2 rho22 t01^2 t12^2",
    "k2 rho22 psi1 t12^2",
    "2 k2 rho22 t01 t02 t12",
    "k3 rho31 t03",
    "k3 rho31 t02 t23",
    "k3 rho31 t01 t12 t23",
    "k3 rho31 t01 t13",
    "k3 rho32 t03^2",
    "k3 rho32 psi3",
    "k3 rho32 t01^2 t13^2",
    "k3 rho32 t13^2 psi1",
    "k3 rho32 t02^2 t23^2",
    "2 k3 rho32 t03 t01 t12 t23",
    "k3 rho32 psi2 t23^2",
    "k3 rho32 psi1 t12^2 t23^2",
    "k3 rho32 t01^2 t12^2 t23^2",
    "2 k3 rho32 t03 t02 t23",
    "2 k3 rho32 t03 t01 t13",
    "2 k3 rho32 psi1 t12 t13 t23",
    "2 k3 rho32 t01 t02 t13 t23",
    "2 k3 rho32 t12 t13 t23 t01^2",
    "2 k3 rho32 t01 t02 t12 t23^2",
    "k4 rho41 t04",
    "k4 rho41 t01 t14",
    "k4 rho42 t04^2",
    "k4 rho42 psi4",
    "k4 rho42 t01^2 t14^2",
    "k4 rho42 psi1 t14^2",
    "2 k4 rho42 t01 t04 t14",
];

/// Cross-panel independences of the additive class, factors in any order.
pub const ADDITIVE_CONDITIONS: &[&str] = &[
    "E(t01 t12) = E(t01) E(t12)",
    "E(t01^2 t12^2) = E(t01^2) E(t12^2)",
    "E(psi1 t12^2) = E(psi1) E(t12^2)",
    "E(t01 t02 t12) = E(t01) E(t02 t12)",
    "E(t02 t23) = E(t02) E(t23)",
    "E(t01 t12 t23) = E(t01) E(t12) E(t23)",
    "E(t01 t13) = E(t01) E(t13)",
    "E(t01^2 t13^2) = E(t01^2) E(t13^2)",
    "E(t13^2 psi1) = E(t13^2) E(psi1)",
    "E(t02^2 t23^2) = E(t02^2) E(t23^2)",
    "E(t01 t12 t03 t23) = E(t01) E(t12) E(t03 t23)",
    "E(t23^2 psi2) = E(t23^2) E(psi2)",
    "E(psi1 t12^2 t23^2) = E(psi1) E(t12^2) E(t23^2)",
    "E(t01^2 t12^2 t23^2) = E(t01^2) E(t12^2) E(t23^2)",
    "E(t02 t03 t23) = E(t02) E(t03 t23)",
    "E(t01 t03 t13) = E(t01) E(t03 t13)",
    "E(psi1 t12 t13 t23) = E(psi1) E(t12) E(t13 t23)",
    "E(t01 t02 t13 t23) = E(t01) E(t02) E(t13 t23)",
    "E(t01 t02 t12 t23^2) = E(t01) E(t02 t12) E(t23^2)",
    "E(t12 t13 t23 t01^2) = E(t12) E(t13 t23) E(t01^2)",
    "E(t01 t14) = E(t01) E(t14)",
    "E(t01^2 t14^2) = E(t01^2) E(t14^2)",
    "E(psi1 t14^2) = E(psi1) E(t14^2)",
    "E(t01 t04 t14) = E(t01) E(t04 t14)",
];

/// Number of monomials in the multilinear class's CEU under truncation.
pub const MULTILINEAR_TERMS: usize = 3869;

/// Tuples contributing to E(Y2² Y4²), with their arrangement counts.
pub const Y2Y4_TUPLES: &[(&str, u64)] = &[
    ("(2) (2) (4) (4)", 1),
    ("(1,(1,2)) (2) (4) (4)", 2),
    ("(1,(1,2)) (1,(1,2)) (4) (4)", 1),
    ("(2) (2) (1,(1,4)) (4)", 2),
    ("(1,(1,2)) (2) (1,(1,4)) (4)", 4),
    ("(1,(1,2)) (1,(1,2)) (1,(1,4)) (4)", 2),
    ("(2) (2) (1,(1,4)) (1,(1,4))", 1),
    ("(1,(1,2)) (2) (1,(1,4)) (1,(1,4))", 2),
    ("(1,(1,2)) (1,(1,2)) (1,(1,4)) (1,(1,4))", 1),
];

fn monomial_of(tokens: &[&str]) -> Monomial<Indeterminate> {
    let factors = tokens.iter().map(|t| {
        let (name, exp) = t.split_once('^').map_or((*t, 1), |(n, e)| (n, e.parse().unwrap()));
        (name.parse::<Indeterminate>().unwrap(), exp)
    });
    Monomial::from_factors(factors)
}

pub fn symbolic_term(line: &str) -> (Monomial<Indeterminate>, CoefficientPoly) {
    let mut scale = Rational::from_integer(1.into());
    let mut coef = Monomial::<UtilitySymbol>::one();
    let mut params = Vec::new();
    for t in line.split_whitespace() {
        if let Ok(n) = t.parse::<i64>() {
            scale = Rational::from_integer(n.into());
        } else if let Ok(s) = t.parse::<UtilitySymbol>() {
            coef = coef.mul(&Monomial::var(s));
        } else {
            params.push(t);
        }
    }
    (monomial_of(&params), CoefficientPoly::term(coef, scale))
}

pub fn symbolic_poly(lines: &[&str]) -> SymbolicPoly {
    let mut p = SymbolicPoly::zero();
    for line in lines {
        let (m, c) = symbolic_term(line);
        p.add_term(m, c);
    }
    p
}

fn expectation(text: &str) -> Monomial<Indeterminate> {
    let inner = text.trim().strip_prefix("E(").and_then(|s| s.strip_suffix(')')).expect("E(...)");
    monomial_of(&inner.split_whitespace().collect::<Vec<_>>())
}

/// `E(m) = E(f1) E(f2)` as a monomial and its unordered factor set.
pub fn condition(text: &str) -> (Monomial<Indeterminate>, BTreeSet<Monomial<Indeterminate>>) {
    let (lhs, rhs) = text.split_once('=').unwrap();
    let factors = rhs.split(") ").map(|f| if f.ends_with(')') { expectation(f) } else { expectation(&format!("{f})")) });
    (expectation(lhs), factors.collect())
}

/// Two-variable chain with quadratic marginal utilities a·y − b·y².
pub const CHAIN_MODEL: &str = r#"{
        "vertices": [1, 2],
        "edges": [[1, 2]],
        "equations": [
            { "kind": "linear", "vertex": 1, "intercept": "t01", "variance": "psi1" },
            { "kind": "linear", "vertex": 2, "intercept": "t02", "coefficients": ["t12"], "variance": "psi2" }
        ],
        "panels": { "1": "G1", "2": "G2" },
        "policies": ["d"],
        "utility": {
            "type": "additive",
            "degrees": { "1": 2, "2": 2 },
            "weights": { "1": 0.6, "2": 0.4 },
            "coefficients": { "1": [3, -0.5], "2": [1, -2] }
        }
    }"#;

pub fn chain() -> SemModel {
    parse_model(CHAIN_MODEL).unwrap()
}

pub const CHAIN_CEU: &[&str] = &[
    "k1 rho11 t01",
    "k1 rho12 t01^2",
    "k1 rho12 psi1",
    "k2 rho21 t02",
    "k2 rho21 t12 t01",
    "k2 rho22 t02^2",
    "k2 rho22 t12^2 t01^2",
    "k2 rho22 t12^2 psi1",
    "k2 rho22 psi2",
    "2 k2 rho22 t02 t12 t01",
];

pub const CHAIN_CONDITIONS: &[&str] = &[
    "E(t01 t12) = E(t01) E(t12)",
    "E(t12^2 t01^2) = E(t12^2) E(t01^2)",
    "E(t12^2 psi1) = E(t12^2) E(psi1)",
    "E(t02 t12 t01) = E(t02 t12) E(t01)",
];
