mod common;

use std::collections::BTreeSet;

use common::*;
use idss_core::ceu::{compile, path_tuples, raise_expansion, CompileOptions, ErrorMomentPolicy};
use idss_core::evaluate::{score, MomentClosure};
use idss_core::paths::expand_variable;
use idss_core::poly::{Indeterminate, Monomial, VertexId};
use idss_core::separability::derive_adequacy;
use idss_core::{Poly, ScoreBoard64};

fn options() -> CompileOptions {
    CompileOptions { errors: ErrorMomentPolicy::Truncate, provenance: false }
}

#[test]
fn additive_ceu_matches_the_published_terms() {
    let model = food();
    let report = compile(&model, model.utility(Some("u1")).unwrap(), options()).unwrap();
    assert_eq!(report.len(), 36);
    assert_eq!(report.master, symbolic_poly(ADDITIVE_CEU));
    assert!(!report.truncated);
}

#[test]
fn multilinear_ceu_term_count() {
    let model = food();
    let report = compile(&model, model.utility(Some("u2")).unwrap(), options()).unwrap();
    assert_eq!(report.len(), MULTILINEAR_TERMS);
}

#[test]
fn additive_independences() {
    let model = food();
    let report = compile(&model, model.utility(Some("u1")).unwrap(), options()).unwrap();
    let adequacy = derive_adequacy(&report, &model.panels).unwrap();
    let got: BTreeSet<_> = adequacy
        .conditions
        .iter()
        .map(|c| (c.monomial.clone(), c.factors.iter().map(|f| f.monomial.clone()).collect::<BTreeSet<_>>()))
        .collect();
    let want: BTreeSet<_> = ADDITIVE_CONDITIONS.iter().map(|c| condition(c)).collect();
    assert_eq!(want.len(), 24);
    assert_eq!(got, want);
    for c in &adequacy.conditions {
        let product = c.factors.iter().fold(Monomial::one(), |acc, f| acc.mul(&f.monomial));
        assert_eq!(product, c.monomial);
    }
}

#[test]
fn rendered_condition_uses_panel_order() {
    let model = food();
    let report = compile(&model, model.utility(Some("u1")).unwrap(), options()).unwrap();
    let adequacy = derive_adequacy(&report, &model.panels).unwrap();
    let text: Vec<String> = adequacy.conditions.iter().map(ToString::to_string).collect();
    assert!(text.contains(&"E(t01 t03 t12 t23) = E(t01) E(t12) E(t03 t23)".to_string()), "{text:#?}");
}

fn y2y4() -> Monomial<VertexId> {
    Monomial::from_factors([(VertexId(2), 2), (VertexId(4), 2)])
}

#[test]
fn second_moments_of_y2_and_y4() {
    let model = food();
    let got = raise_expansion(&model, &y2y4()).unwrap();
    let want: Poly = "t02'^2 * t04'^2 + 2 * t01' * t12 * t02' * t04'^2 + t01'^2 * t12^2 * t04'^2 \
        + 2 * t02'^2 * t01' * t14 * t04' + 4 * t01'^2 * t12 * t02' * t14 * t04' \
        + 2 * t01'^3 * t12^2 * t14 * t04' + t02'^2 * t01'^2 * t14^2 \
        + 2 * t01'^3 * t12 * t02' * t14^2 + t01'^4 * t12^2 * t14^2"
        .parse()
        .unwrap();
    assert_eq!(got, want);
    let mut coefficients: Vec<i64> =
        got.terms().map(|(_, c)| c.to_integer().try_into().unwrap()).collect();
    coefficients.sort_unstable();
    assert_eq!(coefficients, [1, 1, 1, 1, 2, 2, 2, 2, 4]);
}

#[test]
fn tuples_of_y2_and_y4() {
    let model = food();
    let tuples = path_tuples(&model, &y2y4()).unwrap();
    let got: BTreeSet<(String, u64)> = tuples
        .iter()
        .map(|t| (t.paths.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "), t.count))
        .collect();
    let want: BTreeSet<(String, u64)> = Y2Y4_TUPLES.iter().map(|(p, n)| (p.to_string(), *n)).collect();
    assert_eq!(got, want);
    let summed = tuples.iter().fold(Poly::zero(), |mut acc, t| {
        acc.add_term(t.monomial.clone(), idss_core::Rational::from_integer(t.count.into()));
        acc
    });
    assert_eq!(summed, raise_expansion(&model, &y2y4()).unwrap());
}

#[test]
fn expansion_of_y3() {
    let got = expand_variable(&food(), VertexId(3)).unwrap();
    let want: Poly = "t03' + t01' * t13 + t02' * t23 + t01' * t12 * t23".parse().unwrap();
    assert_eq!(got, want);
}

#[test]
fn square_of_y4() {
    let got = expand_variable(&food(), VertexId(4)).unwrap().pow(2);
    let want: Poly = "t04'^2 + t01'^2 * t14^2 + 2 * t01' * t04' * t14".parse().unwrap();
    assert_eq!(got, want);
}

#[test]
fn additive_class_prefers_d0() {
    let model = food();
    let report = compile(&model, model.utility(Some("u1")).unwrap(), options()).unwrap();
    let adequacy = derive_adequacy(&report, &model.panels).unwrap();
    let board: ScoreBoard64 =
        score(&report, &adequacy, &model.panels, &model.moments, MomentClosure::Gaussian).unwrap();
    assert_eq!(board.best(), Some("d0"));
}

#[test]
fn parameter_orders() {
    let model = food();
    let t01 = Indeterminate::intercept(1);
    for (class, order) in [("u1", 2), ("u2", 8)] {
        let report = compile(&model, model.utility(Some(class)).unwrap(), options()).unwrap();
        let adequacy = derive_adequacy(&report, &model.panels).unwrap();
        assert_eq!(adequacy.orders[&t01], order, "{class}");
    }
}

#[test]
fn provenance_covers_every_monomial() {
    let model = food();
    let spec = model.utility(Some("u1")).unwrap();
    let report = compile(&model, spec, CompileOptions { provenance: true, ..options() }).unwrap();
    let provenance = report.provenance.as_ref().unwrap();
    for m in report.master.monomials() {
        assert!(provenance.contains_key(m), "{m}");
    }
}
