//! Adequacy requirements of a compiled CEU: the within-panel summaries each
//! panel delivers and the cross-panel moment-independence conditions.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::ceu::CeuReport;
use crate::model::PanelAssignment;
use crate::poly::{Indeterminate, Monomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeparabilityError {
    #[error("no panel has jurisdiction over {0}")]
    Unowned(Indeterminate),
}

/// The part of a monomial owned by one panel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PanelFactor {
    pub panel: String,
    #[serde(skip)]
    pub panel_index: usize,
    pub monomial: Monomial<Indeterminate>,
}

/// One factor per contributing panel, in panel order.
pub fn partition_by_panel(
    monomial: &Monomial<Indeterminate>,
    ownership: &PanelAssignment,
) -> Result<Vec<PanelFactor>, SeparabilityError> {
    let mut groups: BTreeMap<usize, Vec<(Indeterminate, u32)>> = BTreeMap::new();
    for (s, e) in monomial.factors() {
        let panel = ownership.owner(s).ok_or(SeparabilityError::Unowned(*s))?;
        groups.entry(panel).or_default().push((*s, *e));
    }
    Ok(groups
        .into_iter()
        .map(|(panel_index, factors)| PanelFactor {
            panel: ownership.panel_id(panel_index).to_string(),
            panel_index,
            monomial: Monomial::from_factors(factors),
        })
        .collect())
}

/// A within-panel expectation the IDSS needs, and the policies needing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SummaryRequirement {
    pub panel: String,
    #[serde(skip)]
    pub panel_index: usize,
    pub monomial: Monomial<Indeterminate>,
    pub policies: Vec<String>,
}

/// E(monomial) = ∏ E(factor), required for score separability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndependenceCondition {
    pub monomial: Monomial<Indeterminate>,
    pub factors: Vec<PanelFactor>,
    /// Positions of the source monomial in the master CEU's term order.
    pub sources: Vec<usize>,
    pub policies: Vec<String>,
}

fn expectation(f: &mut fmt::Formatter<'_>, m: &Monomial<Indeterminate>) -> fmt::Result {
    f.write_str("E(")?;
    for (n, (s, e)) in m.factors().iter().enumerate() {
        if n > 0 {
            f.write_str(" ")?;
        }
        if *e == 1 {
            write!(f, "{s}")?;
        } else {
            write!(f, "{s}^{e}")?;
        }
    }
    f.write_str(")")
}

impl fmt::Display for IndependenceCondition {
    /// `E(t01 t12) = E(t01) E(t12)`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        expectation(f, &self.monomial)?;
        f.write_str(" =")?;
        for factor in &self.factors {
            f.write_str(" ")?;
            expectation(f, &factor.monomial)?;
        }
        Ok(())
    }
}

impl fmt::Display for SummaryRequirement {
    /// `G3: E(t03 t23)`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.panel)?;
        expectation(f, &self.monomial)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdequacySpec {
    pub summaries: Vec<SummaryRequirement>,
    pub conditions: Vec<IndependenceCondition>,
    /// Largest exponent of each parameter over all required factors.
    pub orders: BTreeMap<Indeterminate, u32>,
    /// The conditions are assumptions the collective must endorse; nothing here
    /// checks the panels' actual joint beliefs.
    pub assumes_quasi_independence: bool,
}

impl AdequacySpec {
    /// Factorization of a CEU monomial into per-panel summaries.
    pub fn factors_of(&self, m: &Monomial<Indeterminate>) -> Option<&[PanelFactor]> {
        self.conditions.iter().find(|c| &c.monomial == m).map(|c| c.factors.as_slice())
    }
}

/// Summaries and conditions covering every monomial of every policy.
/// Summaries are sorted by panel then monomial order; conditions follow the
/// master CEU's term order.
pub fn derive_adequacy(report: &CeuReport, ownership: &PanelAssignment) -> Result<AdequacySpec, SeparabilityError> {
    let mut summaries: BTreeMap<(usize, Monomial<Indeterminate>), Vec<bool>> = BTreeMap::new();
    let mut conditions = Vec::new();
    let npol = report.policies.len();
    for (index, (m, _)) in report.master.terms().enumerate() {
        let needed: Vec<bool> = report.per_policy.iter().map(|p| p.coefficient(m).is_some()).collect();
        if m.is_one() {
            continue;
        }
        let factors = partition_by_panel(m, ownership)?;
        for f in &factors {
            let slot = summaries.entry((f.panel_index, f.monomial.clone())).or_insert_with(|| vec![false; npol]);
            for (s, n) in slot.iter_mut().zip(&needed) {
                *s |= *n;
            }
        }
        if factors.len() >= 2 {
            conditions.push(IndependenceCondition {
                monomial: m.clone(),
                factors,
                sources: vec![index],
                policies: policy_names(&report.policies, &needed),
            });
        }
    }
    let summaries: Vec<SummaryRequirement> = summaries
        .into_iter()
        .map(|((panel_index, monomial), needed)| SummaryRequirement {
            panel: ownership.panel_id(panel_index).to_string(),
            panel_index,
            monomial,
            policies: policy_names(&report.policies, &needed),
        })
        .collect();
    let mut spec = AdequacySpec { summaries, conditions, orders: BTreeMap::new(), assumes_quasi_independence: true };
    spec.orders = max_orders(&spec);
    Ok(spec)
}

fn policy_names(policies: &[String], needed: &[bool]) -> Vec<String> {
    policies.iter().zip(needed).filter(|(_, n)| **n).map(|(p, _)| p.clone()).collect()
}

/// Per-parameter maximal exponents over every required within-panel factor.
pub fn max_orders(spec: &AdequacySpec) -> BTreeMap<Indeterminate, u32> {
    let mut out: BTreeMap<Indeterminate, u32> = BTreeMap::new();
    for s in &spec.summaries {
        for (v, e) in s.monomial.factors() {
            let slot = out.entry(*v).or_default();
            *slot = (*slot).max(*e);
        }
    }
    out
}

/// Orders restricted to the parameters of one panel.
pub fn panel_orders(spec: &AdequacySpec, ownership: &PanelAssignment, panel: usize) -> BTreeMap<Indeterminate, u32> {
    spec.orders.iter().filter(|(s, _)| ownership.owner(s) == Some(panel)).map(|(s, e)| (*s, *e)).collect()
}
