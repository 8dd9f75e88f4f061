//! Path-monomial results against backward substitution, tuple enumeration and
//! exhaustive discrete expectation, on random linear SEMs.

mod common;

use common::checks;
use common::random::random_sem;
use idss_core::ceu::{compile, CompileOptions};
use idss_core::evaluate::{score, MomentClosure};
use idss_core::model::{MomentMode, MomentTable, PolicyValues};
use idss_core::poly::{Indeterminate, Monomial};
use idss_core::separability::derive_adequacy;
use idss_core::{Rational, ScoreBoard64};
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 200, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn path_expansion_is_backward_substitution(sem in random_sem(8, 4)) {
        checks::path_expansion_is_backward_substitution(&sem)?;
    }

    #[test]
    fn path_count_matches_expansion(sem in random_sem(8, 4)) {
        checks::path_count_matches_expansion(&sem)?;
    }

    #[test]
    fn both_tracks_agree(sem in random_sem(6, 4)) {
        checks::both_tracks_agree(&sem)?;
    }

    #[test]
    fn tuples_reproduce_powers(sem in random_sem(6, 4)) {
        checks::tuples_reproduce_powers(&sem)?;
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn score_matches_discrete_enumeration(sem in random_sem(5, 3)) {
        checks::score_matches_discrete_enumeration(&sem)?;
    }

    #[test]
    fn ranking_is_invariant_under_affine_maps(sem in random_sem(5, 3), shift in -50i32..50, scale in 1u32..20) {
        let model = sem.model();
        let spec = model.utility(None).unwrap();
        let report = compile(&model, spec, CompileOptions::default()).unwrap();
        let adequacy = derive_adequacy(&report, &model.panels).unwrap();
        let table = point_masses(&model, &sem.means);
        let base: ScoreBoard64 = score(&report, &adequacy, &model.panels, &table, MomentClosure::Gaussian).unwrap();

        let mut shifted = report.clone();
        let c = Rational::from_integer(shift.into());
        let alpha = Rational::from_integer(scale.into());
        for p in &mut shifted.per_policy {
            *p = p.scale(&alpha);
            p.add_term(Monomial::one(), c.clone());
        }
        let moved: ScoreBoard64 = score(&shifted, &adequacy, &model.panels, &table, MomentClosure::Gaussian).unwrap();
        for (a, b) in base.scores.iter().zip(&moved.scores) {
            let want = a.eu * f64::from(scale) + f64::from(shift);
            prop_assert!((b.eu - want).abs() <= 1e-9 * (1.0 + want.abs()));
        }
        let distinct = (base.scores[0].eu - base.scores[1].eu).abs() > 1e-9 * (1.0 + base.scores[0].eu.abs());
        if distinct {
            prop_assert_eq!(&base.ranking, &moved.ranking);
        }
    }

    #[test]
    fn point_mass_score_is_ceu_at_the_means(sem in random_sem(6, 3)) {
        let model = sem.model();
        let spec = model.utility(None).unwrap();
        let report = compile(&model, spec, CompileOptions::default()).unwrap();
        let adequacy = derive_adequacy(&report, &model.panels).unwrap();
        let table = point_masses(&model, &sem.means);
        let board: ScoreBoard64 = score(&report, &adequacy, &model.panels, &table, MomentClosure::Gaussian).unwrap();
        for (d, poly) in report.per_policy.iter().enumerate() {
            let want: f64 = poly.evaluate(|s| table.mean(s, d).unwrap(), |c: &Rational| c.to_f64().unwrap());
            prop_assert!((board.scores[d].eu - want).abs() <= 1e-9 * (1.0 + want.abs()));
        }
    }
}

fn point_masses(model: &idss_core::model::SemModel, means: &[i32]) -> MomentTable {
    let mut table = MomentTable::empty(MomentMode::MeanVariance);
    for (i, s) in model.indeterminates().into_iter().enumerate() {
        let mean = f64::from(means[i % means.len()]) * 0.5;
        let mean = if matches!(s, Indeterminate::Variance(_)) { mean.abs() } else { mean };
        table.parameters.insert(
            s,
            idss_core::model::ParameterMoments {
                mean: PolicyValues(vec![Some(mean), Some(mean + 0.25)]),
                variance: None,
            },
        );
    }
    table
}
