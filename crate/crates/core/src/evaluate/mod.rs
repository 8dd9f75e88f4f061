//! From panel deliveries to EU scores and a policy ranking.

mod oracle;

use num_traits::{Float, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ceu::CeuReport;
use crate::model::{MomentTable, PanelAssignment};
use crate::poly::{Monomial, Ring};
use crate::separability::{partition_by_panel, AdequacySpec, PanelFactor};

pub use oracle::{mc_oracle, OracleEstimate};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("panel {panel} must deliver E({monomial}) for policy {policy}")]
    MissingSummary { panel: String, monomial: String, policy: String },
    #[error("negative variance {variance} for {symbol}")]
    NegativeVariance { symbol: String, variance: f64 },
    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),
    #[error("oracle unsupported: {0}")]
    OracleUnsupported(String),
}

/// Rule for moments of order ≥ 2 that panels do not deliver directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentClosure {
    /// Normal recursion from mean and variance.
    #[default]
    Gaussian,
    /// Only E(θ) = mean and E(θ²) = mean² + variance; anything else must be a
    /// direct entry.
    #[serde(rename = "direct")]
    DirectOnly,
}

impl std::str::FromStr for MomentClosure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(MomentClosure::Gaussian),
            "direct" => Ok(MomentClosure::DirectOnly),
            other => Err(format!("unknown closure `{other}` (expected gaussian or direct)")),
        }
    }
}

impl std::fmt::Display for MomentClosure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MomentClosure::Gaussian => "gaussian",
            MomentClosure::DirectOnly => "direct",
        })
    }
}

/// Non-central normal moment by `E(θ^k) = μ E(θ^{k−1}) + (k−1) σ² E(θ^{k−2})`,
/// in any ring (exact, floating or symbolic).
pub fn normal_moment<T: Ring>(mean: &T, variance: &T, k: u32) -> T {
    let (mut prev, mut cur) = (T::one(), mean.clone());
    if k == 0 {
        return prev;
    }
    for j in 2..=k {
        let next = mean.clone() * cur.clone() + T::from_count(u64::from(j - 1)) * variance.clone() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

pub fn gaussian_moment<F: Float>(mean: F, variance: F, k: u32) -> Result<F, EvalError> {
    if variance < F::zero() {
        return Err(EvalError::NegativeVariance {
            symbol: "<argument>".into(),
            variance: variance.to_f64().unwrap_or(f64::NAN),
        });
    }
    let (mut prev, mut cur) = (F::one(), mean);
    if k == 0 {
        return Ok(prev);
    }
    for j in 2..=k {
        let next = mean * cur + F::from(j - 1).unwrap() * variance * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<F> {
    sum: F,
    compensation: F,
}

impl<F: Float> Default for CompensatedSum<F> {
    fn default() -> Self {
        CompensatedSum { sum: F::zero(), compensation: F::zero() }
    }
}

impl<F: Float> CompensatedSum<F> {
    pub fn add(&mut self, x: F) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation = self.compensation + ((self.sum - t) + x);
        } else {
            self.compensation = self.compensation + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> F {
        self.sum + self.compensation
    }
}

impl<F: Float> FromIterator<F> for CompensatedSum<F> {
    fn from_iter<I: IntoIterator<Item = F>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

fn cast<F: Float>(x: f64) -> F {
    F::from(x).expect("f64 converts into every Float")
}

/// E(factor) for policy `d`: a direct entry if the panel delivered one,
/// otherwise the closure applied under within-panel independence.
pub fn summary_value<F: Float>(
    factor: &PanelFactor,
    moments: &MomentTable,
    closure: MomentClosure,
    policy: usize,
    policy_id: &str,
) -> Result<F, EvalError> {
    if let Some(x) = moments.direct(&factor.monomial, policy) {
        return Ok(cast(x));
    }
    let missing = || EvalError::MissingSummary {
        panel: factor.panel.clone(),
        monomial: factor.monomial.to_string(),
        policy: policy_id.to_string(),
    };
    if closure == MomentClosure::DirectOnly && factor.monomial.factors().len() > 1 {
        return Err(missing());
    }
    let mut value = F::one();
    for (s, k) in factor.monomial.factors() {
        let single = Monomial::power(*s, *k);
        if let Some(x) = moments.direct(&single, policy) {
            value = value * cast(x);
            continue;
        }
        let (mean, variance) = match (moments.mean(s, policy), moments.variance(s, policy)) {
            (Some(m), Some(v)) => (m, v),
            _ => return Err(missing()),
        };
        if variance < 0.0 {
            return Err(EvalError::NegativeVariance { symbol: s.to_string(), variance });
        }
        if closure == MomentClosure::DirectOnly && *k > 2 {
            return Err(missing());
        }
        value = value * gaussian_moment(cast::<F>(mean), cast::<F>(variance), *k)?;
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyScore<F> {
    pub policy: String,
    pub eu: F,
    /// (EU − min) / (max − min) across policies; 1 everywhere when all tie.
    pub normalized: F,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreBoard<F = f64> {
    pub scores: Vec<PolicyScore<F>>,
    /// Policy ids by EU descending; ties keep declaration order.
    pub ranking: Vec<String>,
    /// Groups of two or more policies with exactly equal EU.
    pub ties: Vec<Vec<String>>,
}

impl<F: Float> ScoreBoard<F> {
    pub fn from_values(policies: &[String], eu: Vec<F>) -> Self {
        let lo = eu.iter().copied().fold(F::infinity(), F::min);
        let hi = eu.iter().copied().fold(F::neg_infinity(), F::max);
        let scores = policies
            .iter()
            .zip(&eu)
            .map(|(p, x)| PolicyScore {
                policy: p.clone(),
                eu: *x,
                normalized: if hi > lo { (*x - lo) / (hi - lo) } else { F::one() },
            })
            .collect();
        let mut order: Vec<usize> = (0..policies.len()).collect();
        order.sort_by(|a, b| eu[*b].partial_cmp(&eu[*a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(b)));
        let ranking = order.iter().map(|i| policies[*i].clone()).collect();
        let mut ties = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let mut j = i + 1;
            while j < order.len() && eu[order[j]] == eu[order[i]] {
                j += 1;
            }
            if j - i > 1 {
                ties.push(order[i..j].iter().map(|k| policies[*k].clone()).collect());
            }
            i = j;
        }
        ScoreBoard { scores, ranking, ties }
    }

    pub fn best(&self) -> Option<&str> {
        self.ranking.first().map(String::as_str)
    }

    pub fn eu(&self, policy: &str) -> Option<F> {
        self.scores.iter().find(|s| s.policy == policy).map(|s| s.eu)
    }
}

/// EU of one policy: Σ over CEU monomials of coefficient × ∏ panel summaries.
pub fn score_policy<F: Float>(
    report: &CeuReport,
    spec: &AdequacySpec,
    ownership: &PanelAssignment,
    moments: &MomentTable,
    closure: MomentClosure,
    policy: usize,
) -> Result<F, EvalError> {
    let policy_id = report.policies.get(policy).ok_or_else(|| EvalError::UnknownPolicy(policy.to_string()))?;
    let mut sum = CompensatedSum::default();
    for (m, c) in report.per_policy[policy].terms() {
        let coef: F = cast(c.to_f64().unwrap_or(f64::NAN));
        let owned;
        let factors: &[PanelFactor] = match spec.factors_of(m) {
            Some(f) => f,
            None => {
                owned = partition_by_panel(m, ownership).map_err(|e| EvalError::MissingSummary {
                    panel: "?".into(),
                    monomial: e.to_string(),
                    policy: policy_id.clone(),
                })?;
                &owned
            }
        };
        let mut term = coef;
        for f in factors {
            term = term * summary_value::<F>(f, moments, closure, policy, policy_id)?;
        }
        sum.add(term);
    }
    Ok(sum.value())
}

/// Scores and ranks every policy.
pub fn score<F: Float>(
    report: &CeuReport,
    spec: &AdequacySpec,
    ownership: &PanelAssignment,
    moments: &MomentTable,
    closure: MomentClosure,
) -> Result<ScoreBoard<F>, EvalError> {
    let eu = (0..report.policies.len())
        .map(|d| score_policy(report, spec, ownership, moments, closure, d))
        .collect::<Result<Vec<F>, _>>()?;
    Ok(ScoreBoard::from_values(&report.policies, eu))
}
