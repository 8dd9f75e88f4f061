//! Cross-track properties on one random SEM, shared by the proptest suite and
//! the acceptance binary.

use std::collections::BTreeMap;

use idss_core::ceu::{compile, compile_general, expand_utility, path_tuples, raise_expansion, CompileOptions, ErrorMomentPolicy};
use idss_core::evaluate::{score, MomentClosure};
use idss_core::model::{MomentMode, MomentTable, PolicyValues};
use idss_core::paths::{enumerate_rooted_paths, expand_augmented, expand_variable, expand_variable_general};
use idss_core::separability::derive_adequacy;
use idss_core::{Poly, Rational, ScoreBoard64};
use num_traits::ToPrimitive;
use proptest::prelude::*;

use super::random::{panel_states, RandomSem};

pub fn path_expansion_is_backward_substitution(sem: &RandomSem) -> Result<(), TestCaseError> {
    let model = sem.model();
    for v in model.dag.vertices() {
        let paths = expand_augmented(&expand_variable(&model, *v).unwrap());
        prop_assert_eq!(paths, expand_variable_general(&model, *v).unwrap());
    }
    Ok(())
}

pub fn path_count_matches_expansion(sem: &RandomSem) -> Result<(), TestCaseError> {
    let model = sem.model();
    for v in model.dag.vertices() {
        let by_parent: usize =
            1 + model.dag.parents(*v).iter().map(|p| enumerate_rooted_paths(&model.dag, *p).len()).sum::<usize>();
        prop_assert_eq!(enumerate_rooted_paths(&model.dag, *v).len(), by_parent);
    }
    Ok(())
}

/// Path-tuple CEU against the tower-rule CEU built from polynomial powers.
pub fn both_tracks_agree(sem: &RandomSem) -> Result<(), TestCaseError> {
    let model = sem.model();
    let spec = model.utility(None).unwrap();
    for errors in [ErrorMomentPolicy::Truncate, ErrorMomentPolicy::Gaussian] {
        let paths = compile(&model, spec, CompileOptions { errors, provenance: false }).unwrap();
        let tower = compile_general(&model, spec, errors).unwrap();
        prop_assert_eq!(&paths.master, &tower.master);
        prop_assert_eq!(paths.truncated, tower.truncated);
    }
    Ok(())
}

pub fn tuples_reproduce_powers(sem: &RandomSem) -> Result<(), TestCaseError> {
    let model = sem.model();
    let form = expand_utility(model.utility(None).unwrap());
    for a in form.monomials() {
        let mut summed = Poly::zero();
        for t in path_tuples(&model, a).unwrap() {
            summed.add_term(t.monomial, Rational::from_integer(t.count.into()));
        }
        prop_assert_eq!(summed, raise_expansion(&model, a).unwrap());
    }
    Ok(())
}

/// Panels independent of one another, each with two joint states: the exact
/// expectation of the CEU against the score from delivered summaries.
pub fn score_matches_discrete_enumeration(sem: &RandomSem) -> Result<(), TestCaseError> {
    let model = sem.model();
    let spec = model.utility(None).unwrap();
    let report = compile(&model, spec, CompileOptions::default()).unwrap();
    let adequacy = derive_adequacy(&report, &model.panels).unwrap();
    let states = panel_states(&model, &sem.means);

    let mut table = MomentTable::empty(MomentMode::Direct);
    for s in &adequacy.summaries {
        let value: f64 = states[s.panel_index]
            .iter()
            .map(|st| s.monomial.factors().iter().map(|(v, e)| st[v].powi(*e as i32)).product::<f64>() / 2.0)
            .sum();
        table.direct.insert(s.monomial.clone(), PolicyValues::uniform(value, model.policies.len()));
    }
    let board: ScoreBoard64 = score(&report, &adequacy, &model.panels, &table, MomentClosure::DirectOnly).unwrap();

    let panels = states.len();
    for (d, poly) in report.per_policy.iter().enumerate() {
        let mut expected = 0.0;
        for combo in 0..(1u32 << panels) {
            let mut values = BTreeMap::new();
            for (p, st) in states.iter().enumerate() {
                values.extend(st[((combo >> p) & 1) as usize].iter().map(|(k, v)| (*k, *v)));
            }
            let ceu: f64 = poly.evaluate(|s| values[s], |c: &Rational| c.to_f64().unwrap());
            expected += ceu / f64::from(1u32 << panels);
        }
        let got = board.scores[d].eu;
        prop_assert!((got - expected).abs() <= 1e-9 * (1.0 + expected.abs()), "{got} vs {expected}");
    }
    Ok(())
}
