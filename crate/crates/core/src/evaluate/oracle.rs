//! Monte Carlo estimate of EU by forward simulation, independent of the
//! symbolic pipeline.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::EvalError;
use crate::model::{EquationForm, MomentTable, SemModel, UtilitySpec};
use crate::poly::Indeterminate;

const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

/// (mean, sd) of a normal draw; ψ is fixed at its mean.
#[derive(Clone, Copy)]
struct Draw {
    mean: f64,
    sd: f64,
}

impl Draw {
    fn sample<R: Rng>(self, rng: &mut R) -> f64 {
        if self.sd == 0.0 {
            self.mean
        } else {
            let z: f64 = rng.sample(StandardNormal);
            self.mean + self.sd * z
        }
    }
}

enum Form {
    Linear { intercept: Draw, parents: Vec<(usize, Draw)> },
    Polynomial { terms: Vec<(Draw, Vec<(usize, i32)>)> },
}

struct Vertex {
    form: Form,
    error_sd: f64,
}

struct Utility {
    terms: Vec<(f64, Vec<(usize, Vec<f64>)>)>,
}

impl Utility {
    fn new(spec: &UtilitySpec, policy: usize) -> Self {
        let f = |r: Option<&crate::Rational>| r.and_then(ToPrimitive::to_f64).unwrap_or(0.0);
        let terms = spec
            .weights
            .iter()
            .map(|(set, w)| {
                let factors = set
                    .iter()
                    .map(|v| {
                        let n = spec.degrees.get(v).copied().unwrap_or(0);
                        let rho = (1..=n).map(|j| f(spec.rho(*v, j, policy))).collect();
                        (v.0 as usize - 1, rho)
                    })
                    .collect();
                (f(w.get(policy)), factors)
            })
            .collect();
        Utility { terms }
    }

    fn eval(&self, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, factors)| {
                factors.iter().fold(*k, |acc, (i, rho)| {
                    let mut power = 1.0;
                    let mut marginal = 0.0;
                    for r in rho {
                        power *= y[*i];
                        marginal += r * power;
                    }
                    acc * marginal
                })
            })
            .sum()
    }
}

fn draw_for(symbol: Indeterminate, moments: &MomentTable, policy: usize, policy_id: &str) -> Result<Draw, EvalError> {
    let mean = moments.mean(&symbol, policy).ok_or_else(|| EvalError::MissingSummary {
        panel: format!("vertex {}", symbol.vertex()),
        monomial: symbol.to_string(),
        policy: policy_id.to_string(),
    })?;
    let variance = moments.variance(&symbol, policy).unwrap_or(0.0);
    if variance < 0.0 {
        return Err(EvalError::NegativeVariance { symbol: symbol.to_string(), variance });
    }
    Ok(Draw { mean, sd: variance.sqrt() })
}

fn vertices(model: &SemModel, moments: &MomentTable, policy: usize) -> Result<Vec<Vertex>, EvalError> {
    let policy_id = &model.policies[policy];
    model
        .dag
        .vertices()
        .iter()
        .map(|v| {
            let eq = model.equation(*v).ok_or_else(|| EvalError::OracleUnsupported(format!("vertex {v} has no equation")))?;
            let psi = Indeterminate::Variance(*v);
            if moments.variance(&psi, policy).is_some_and(|x| x != 0.0) {
                return Err(EvalError::OracleUnsupported(format!(
                    "{psi} has nonzero variance; the oracle needs ψ as a point mass"
                )));
            }
            let psi_mean = draw_for(psi, moments, policy, policy_id)?.mean;
            if psi_mean < 0.0 {
                return Err(EvalError::NegativeVariance { symbol: psi.to_string(), variance: psi_mean });
            }
            let form = match &eq.form {
                EquationForm::Linear { coefficients } => Form::Linear {
                    intercept: draw_for(Indeterminate::Intercept(*v), moments, policy, policy_id)?,
                    parents: coefficients
                        .iter()
                        .map(|c| {
                            let p = c.parent().expect("validated linear coefficients are edges");
                            Ok((p.0 as usize - 1, draw_for(*c, moments, policy, policy_id)?))
                        })
                        .collect::<Result<_, EvalError>>()?,
                },
                EquationForm::Polynomial { terms } => Form::Polynomial {
                    terms: terms
                        .iter()
                        .enumerate()
                        .map(|(i, t)| {
                            let draw = draw_for(eq.term_symbol(i, t), moments, policy, policy_id)?;
                            let exps = t.exponents.iter().map(|(u, e)| (u.0 as usize - 1, *e as i32)).collect();
                            Ok((draw, exps))
                        })
                        .collect::<Result<_, EvalError>>()?,
                },
            };
            Ok(Vertex { form, error_sd: psi_mean.sqrt() })
        })
        .collect()
}

/// Running mean and sum of squared deviations.
#[derive(Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Welford {
            n,
            mean: self.mean + delta * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64,
        }
    }
}

/// Draws every parameter from independent normals with the table's means and
/// variances, Gaussian errors with variance ψ, simulates the SEM forward and
/// averages u(y, d). Sample chunks use separate ChaCha streams, so the result
/// depends only on `seed` and `samples`, not on the thread count.
pub fn mc_oracle(
    model: &SemModel,
    spec: &UtilitySpec,
    policy: usize,
    moments: &MomentTable,
    samples: u64,
    seed: u64,
) -> Result<OracleEstimate, EvalError> {
    if policy >= model.policies.len() {
        return Err(EvalError::UnknownPolicy(policy.to_string()));
    }
    if samples == 0 {
        return Err(EvalError::OracleUnsupported("at least one sample is required".into()));
    }
    let vertices = vertices(model, moments, policy)?;
    let utility = Utility::new(spec, policy);
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<Welford> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let n = CHUNK.min(samples - chunk * CHUNK);
            let mut acc = Welford::default();
            let mut y = vec![0.0; vertices.len()];
            for _ in 0..n {
                for (i, v) in vertices.iter().enumerate() {
                    let mut value = match &v.form {
                        Form::Linear { intercept, parents } => {
                            let mut x = intercept.sample(&mut rng);
                            for (p, d) in parents {
                                x += d.sample(&mut rng) * y[*p];
                            }
                            x
                        }
                        Form::Polynomial { terms } => terms
                            .iter()
                            .map(|(d, exps)| exps.iter().fold(d.sample(&mut rng), |acc, (p, e)| acc * y[*p].powi(*e)))
                            .sum(),
                    };
                    if v.error_sd > 0.0 {
                        let z: f64 = rng.sample(StandardNormal);
                        value += v.error_sd * z;
                    }
                    y[i] = value;
                }
                acc.push(utility.eval(&y));
            }
            acc
        })
        .collect();
    let total = partial.into_iter().fold(Welford::default(), Welford::merge);
    let variance = if total.n > 1 { total.m2 / (total.n - 1) as f64 } else { 0.0 };
    Ok(OracleEstimate { mean: total.mean, std_error: (variance / total.n as f64).sqrt(), samples, seed })
}
