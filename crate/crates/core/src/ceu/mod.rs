//! Conditional expected utility as a polynomial in panel parameters.

mod errors;
mod tuples;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{SemModel, UtilitySpec};
use crate::paths::{expand_variable, substitute_backward, PathError};
use crate::poly::{Indeterminate, Monomial, Polynomial, UtilitySymbol, VertexId};
use crate::{CoefficientPoly, Poly, Rational, SymbolicPoly};

pub use errors::{reduce_errors, ErrorMomentPolicy, Reduced};
pub use tuples::{path_tuples, PathTuple};

/// Utility written over vertex monomials `y^a` with symbolic coefficients c_a.
pub type UtilityMonomialForm = Polynomial<VertexId, CoefficientPoly>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CeuError {
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("utility {utility}: {symbol} has no value for policy {policy}")]
    MissingValue { utility: String, symbol: UtilitySymbol, policy: String },
}

/// `y1^2 y3`, the text form of a utility exponent vector.
pub fn exponent_label(a: &Monomial<VertexId>) -> String {
    let mut out = String::new();
    for (n, (v, e)) in a.factors().iter().enumerate() {
        if n > 0 {
            out.push(' ');
        }
        let _ = if *e == 1 { write!(out, "y{v}") } else { write!(out, "y{v}^{e}") };
    }
    out
}

/// Distributes `Σ_I k_I ∏_{i∈I} Σ_j ρ_ij y_i^j` into monomials in y. The
/// coefficient of `y^a` is `k_J ∏_{j∈J} ρ_{j a_j}` with J the support of a.
pub fn expand_utility(spec: &UtilitySpec) -> UtilityMonomialForm {
    let marginal = |v: VertexId| -> UtilityMonomialForm {
        let n = spec.degrees.get(&v).copied().unwrap_or(0);
        Polynomial::from_terms((1..=n).map(|j| {
            let rho = CoefficientPoly::var(UtilitySymbol::Rho { vertex: v, degree: j });
            (Monomial::power(v, j), rho)
        }))
    };
    let mut out = UtilityMonomialForm::zero();
    for set in spec.weights.keys() {
        let k = CoefficientPoly::var(UtilitySymbol::Weight(set.clone()));
        let product = set.iter().fold(UtilityMonomialForm::constant(k), |acc, v| &acc * &marginal(*v));
        out = out + product;
    }
    out
}

/// Per-vertex path expansions and their powers up to `max_power`.
struct Expansions {
    powers: BTreeMap<VertexId, Vec<Poly>>,
}

impl Expansions {
    fn new(model: &SemModel, max_power: &BTreeMap<VertexId, u32>) -> Result<Self, PathError> {
        let mut powers = BTreeMap::new();
        for (v, n) in max_power {
            let y = expand_variable(model, *v)?;
            let mut list = vec![Poly::one()];
            for _ in 0..*n {
                let next = list.last().unwrap() * &y;
                list.push(next);
            }
            powers.insert(*v, list);
        }
        Ok(Expansions { powers })
    }

    fn raise(&self, a: &Monomial<VertexId>) -> Poly {
        a.factors().iter().fold(Poly::one(), |acc, (v, e)| &acc * &self.powers[v][*e as usize])
    }
}

fn max_powers<'a, I: IntoIterator<Item = &'a Monomial<VertexId>>>(exponents: I) -> BTreeMap<VertexId, u32> {
    let mut out: BTreeMap<VertexId, u32> = BTreeMap::new();
    for a in exponents {
        for (v, e) in a.factors() {
            let slot = out.entry(*v).or_default();
            *slot = (*slot).max(*e);
        }
    }
    out
}

/// `∏_i pow(expand_variable(i), a_i)` over θ' and edge symbols.
pub fn raise_expansion(model: &SemModel, a: &Monomial<VertexId>) -> Result<Poly, PathError> {
    Ok(Expansions::new(model, &max_powers([a]))?.raise(a))
}

/// Where a CEU monomial comes from: a utility term and a path tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub exponents: Monomial<VertexId>,
    pub tuple: PathTuple,
}

/// Compiled CEU for one utility class over every policy.
#[derive(Debug, Clone, PartialEq)]
pub struct CeuReport {
    pub utility: String,
    pub errors: ErrorMomentPolicy,
    pub policies: Vec<String>,
    /// Coefficients carry unevaluated k and ρ symbols.
    pub master: SymbolicPoly,
    /// `master` with k and ρ evaluated at each policy.
    pub per_policy: Vec<Poly>,
    /// The truncation rule discarded an even error power ≥ 4 somewhere.
    pub truncated: bool,
    /// Contributing path tuples per master monomial, when requested.
    pub provenance: Option<BTreeMap<Monomial<Indeterminate>, Vec<Provenance>>>,
}

impl CeuReport {
    pub fn policy(&self, index: usize) -> &Poly {
        &self.per_policy[index]
    }

    pub fn len(&self) -> usize {
        self.master.len()
    }

    pub fn is_empty(&self) -> bool {
        self.master.is_zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CompileOptions {
    pub errors: ErrorMomentPolicy,
    pub provenance: bool,
}

fn utility_values(spec: &UtilitySpec, policy: usize) -> BTreeMap<UtilitySymbol, Option<Rational>> {
    let mut out = BTreeMap::new();
    for (set, w) in &spec.weights {
        out.insert(UtilitySymbol::Weight(set.clone()), w.get(policy).cloned());
    }
    for (v, list) in &spec.coefficients {
        for (j, r) in list.iter().enumerate() {
            out.insert(UtilitySymbol::Rho { vertex: *v, degree: j as u32 + 1 }, r.get(policy).cloned());
        }
    }
    out
}

fn evaluate_policies(model: &SemModel, spec: &UtilitySpec, master: &SymbolicPoly) -> Result<Vec<Poly>, CeuError> {
    let mut symbols = std::collections::BTreeSet::new();
    for (_, c) in master.terms() {
        symbols.extend(c.variables());
    }
    (0..model.policies.len())
        .map(|d| {
            let values = utility_values(spec, d);
            if let Some(symbol) = symbols.iter().find(|s| !matches!(values.get(*s), Some(Some(_)))) {
                return Err(CeuError::MissingValue {
                    utility: spec.name.clone(),
                    symbol: symbol.clone(),
                    policy: model.policies[d].clone(),
                });
            }
            Ok(master.map_coefficients(|c| c.evaluate(|s| values[s].clone().expect("checked above"), |r| r.clone())))
        })
        .collect()
}

fn assemble(
    model: &SemModel,
    spec: &UtilitySpec,
    errors: ErrorMomentPolicy,
    parts: Vec<(CoefficientPoly, Reduced<Rational>)>,
) -> Result<CeuReport, CeuError> {
    let mut master = SymbolicPoly::zero();
    let mut truncated = false;
    for (c_a, reduced) in parts {
        truncated |= reduced.truncated;
        for (m, r) in reduced.poly.into_terms() {
            master.add_term(m, c_a.scale(&r));
        }
    }
    let per_policy = evaluate_policies(model, spec, &master)?;
    Ok(CeuReport {
        utility: spec.name.clone(),
        errors,
        policies: model.policies.clone(),
        master,
        per_policy,
        truncated,
        provenance: None,
    })
}

/// Path-monomial track for linear SEMs: `Σ_a c_a · reduce(raise_expansion(a))`.
pub fn compile(model: &SemModel, spec: &UtilitySpec, options: CompileOptions) -> Result<CeuReport, CeuError> {
    let form = expand_utility(spec);
    let expansions = Expansions::new(model, &max_powers(form.monomials()))?;
    let terms: Vec<(&Monomial<VertexId>, &CoefficientPoly)> = form.terms().collect();
    let parts: Vec<(CoefficientPoly, Reduced<Rational>)> = terms
        .par_iter()
        .map(|(a, c_a)| ((*c_a).clone(), reduce_errors(&expansions.raise(a), options.errors)))
        .collect();
    let mut report = assemble(model, spec, options.errors, parts)?;
    if options.provenance {
        report.provenance = Some(provenance(model, &form, options.errors)?);
    }
    Ok(report)
}

fn provenance(
    model: &SemModel,
    form: &UtilityMonomialForm,
    errors: ErrorMomentPolicy,
) -> Result<BTreeMap<Monomial<Indeterminate>, Vec<Provenance>>, PathError> {
    let mut out: BTreeMap<Monomial<Indeterminate>, Vec<Provenance>> = BTreeMap::new();
    for a in form.monomials() {
        for tuple in path_tuples(model, a)? {
            let single = Poly::term(tuple.monomial.clone(), Rational::from_integer(1.into()));
            for m in reduce_errors(&single, errors).poly.monomials() {
                out.entry(m.clone()).or_default().push(Provenance { exponents: a.clone(), tuple: tuple.clone() });
            }
        }
    }
    Ok(out)
}

/// Tower-rule track valid for polynomial SEMs: each `y^a` is expanded by
/// backward substitution, and ε_v is integrated out as soon as Y_v is replaced.
pub fn compile_general(model: &SemModel, spec: &UtilitySpec, errors: ErrorMomentPolicy) -> Result<CeuReport, CeuError> {
    let form = expand_utility(spec);
    let terms: Vec<(&Monomial<VertexId>, &CoefficientPoly)> = form.terms().collect();
    let parts = terms
        .par_iter()
        .map(|(a, c_a)| {
            let start = Poly::term(a.map_variables(|v| Indeterminate::Placeholder(*v)), Rational::from_integer(1.into()));
            let truncated = std::sync::atomic::AtomicBool::new(false);
            let poly = substitute_backward(model, start, |_, p| {
                let r = reduce_errors(&p, errors);
                if r.truncated {
                    truncated.store(true, std::sync::atomic::Ordering::Relaxed);
                }
                r.poly
            })?;
            let truncated = truncated.into_inner();
            Ok(((*c_a).clone(), Reduced { poly, truncated }))
        })
        .collect::<Result<Vec<_>, PathError>>()?;
    assemble(model, spec, errors, parts)
}

/// Linear models use the path track, polynomial models the tower-rule track.
pub fn compile_auto(model: &SemModel, spec: &UtilitySpec, options: CompileOptions) -> Result<CeuReport, CeuError> {
    if model.is_linear() {
        compile(model, spec, options)
    } else {
        compile_general(model, spec, options.errors)
    }
}

/// Numeric CEU of one policy.
pub fn build_ceu(model: &SemModel, spec: &UtilitySpec, policy: usize, errors: ErrorMomentPolicy) -> Result<Poly, CeuError> {
    let report = compile(model, spec, CompileOptions { errors, provenance: false })?;
    Ok(report.per_policy[policy].clone())
}

/// Numeric CEU of one policy via the tower-rule track.
pub fn build_ceu_general(
    model: &SemModel,
    spec: &UtilitySpec,
    policy: usize,
    errors: ErrorMomentPolicy,
) -> Result<Poly, CeuError> {
    let report = compile_general(model, spec, errors)?;
    Ok(report.per_policy[policy].clone())
}
