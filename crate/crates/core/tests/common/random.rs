//! Random linear SEMs for property tests.

use std::collections::BTreeMap;

use proptest::prelude::*;
use serde_json::{json, Value};

use idss_core::model::{parse_model, SemModel};
use idss_core::poly::Indeterminate;

#[derive(Debug, Clone)]
pub struct RandomSem {
    pub n: u32,
    pub edges: Vec<(u32, u32)>,
    /// Panel index per vertex.
    pub panels: Vec<u32>,
    pub multilinear: bool,
    pub degrees: Vec<u32>,
    pub weights: Vec<(Vec<u32>, i32)>,
    pub coefficients: Vec<Vec<i32>>,
    pub means: Vec<i32>,
}

impl RandomSem {
    pub fn parents(&self, v: u32) -> Vec<u32> {
        self.edges.iter().filter(|(_, c)| *c == v).map(|(p, _)| *p).collect()
    }

    pub fn to_json(&self) -> Value {
        let equations: Vec<Value> = (1..=self.n)
            .map(|v| {
                let coefficients: Vec<String> = self.parents(v).iter().map(|p| format!("t{p}{v}")).collect();
                json!({ "kind": "linear", "vertex": v, "intercept": format!("t0{v}"),
                        "coefficients": coefficients, "variance": format!("psi{v}") })
            })
            .collect();
        let panels: serde_json::Map<String, Value> =
            (1..=self.n).map(|v| (v.to_string(), json!(format!("P{}", self.panels[v as usize - 1])))).collect();
        let utility_vertices: Vec<u32> = {
            let mut vs: Vec<u32> = self.weights.iter().flat_map(|(s, _)| s.clone()).collect();
            vs.sort_unstable();
            vs.dedup();
            vs
        };
        let degrees: serde_json::Map<String, Value> =
            utility_vertices.iter().map(|v| (v.to_string(), json!(self.degrees[*v as usize - 1]))).collect();
        let coefficients: serde_json::Map<String, Value> = utility_vertices
            .iter()
            .map(|v| {
                let d = self.degrees[*v as usize - 1] as usize;
                (v.to_string(), json!(self.coefficients[*v as usize - 1][..d]))
            })
            .collect();
        let weights: serde_json::Map<String, Value> = self
            .weights
            .iter()
            .map(|(s, w)| {
                let key = s.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
                (key, json!({ "a": w, "b": w - 1 }))
            })
            .collect();
        json!({
            "vertices": (1..=self.n).collect::<Vec<_>>(),
            "edges": self.edges,
            "equations": equations,
            "panels": panels,
            "policies": ["a", "b"],
            "utility": {
                "type": if self.multilinear { "multilinear" } else { "additive" },
                "degrees": degrees,
                "weights": weights,
                "coefficients": coefficients,
            }
        })
    }

    pub fn model(&self) -> SemModel {
        parse_model(&self.to_json().to_string()).expect("generated model is valid")
    }
}

/// DAGs on up to `max_n` vertices with random density; utilities of degree ≤ 2.
pub fn random_sem(max_n: u32, multilinear_max_n: u32) -> impl Strategy<Value = RandomSem> {
    (1..=max_n, 0.0f64..=1.0).prop_flat_map(move |(n, density)| {
        let pairs: Vec<(u32, u32)> = (1..=n).flat_map(|c| (1..c).map(move |p| (p, c))).collect();
        let edge_mask = proptest::collection::vec(proptest::bool::weighted(density.clamp(0.05, 0.95)), pairs.len());
        let panels = proptest::collection::vec(0..n, n as usize);
        let degrees = proptest::collection::vec(1u32..=2, n as usize);
        let coefficients = proptest::collection::vec(proptest::collection::vec(-3i32..=3, 2), n as usize);
        let means = proptest::collection::vec(-2i32..=2, 4 * n as usize);
        let multilinear = if n <= multilinear_max_n { proptest::bool::ANY.boxed() } else { Just(false).boxed() };
        let subsets = proptest::collection::vec((1u32..(1 << n), 1i32..=4), 1..=6);
        (edge_mask, panels, degrees, coefficients, means, multilinear, subsets).prop_map(
            move |(mask, panels, degrees, coefficients, means, multilinear, subsets)| {
                let edges = pairs.iter().zip(&mask).filter(|(_, keep)| **keep).map(|(e, _)| *e).collect();
                let mut weights: Vec<(Vec<u32>, i32)> = if multilinear {
                    subsets
                        .iter()
                        .map(|(bits, w)| ((1..=n).filter(|v| bits & (1 << (v - 1)) != 0).collect(), *w))
                        .collect()
                } else {
                    subsets.iter().map(|(bits, w)| (vec![bits.trailing_zeros() + 1], *w)).collect()
                };
                weights.sort();
                weights.dedup_by(|a, b| a.0 == b.0);
                RandomSem { n, edges, panels, multilinear, degrees, weights, coefficients, means }
            },
        )
    })
}

/// Two equally likely joint states per panel; values depend on the panel's
/// parameters jointly, so within-panel moments are not products.
pub fn panel_states(model: &SemModel, seed: &[i32]) -> Vec<Vec<BTreeMap<Indeterminate, f64>>> {
    let mut k = 0usize;
    let mut next = || {
        k += 1;
        f64::from(seed[k % seed.len()]) * 0.5 + (k % 3) as f64 * 0.25
    };
    (0..model.panels.panels().len())
        .map(|panel| {
            (0..2)
                .map(|_| {
                    let mut state = BTreeMap::new();
                    for v in model.panels.vertices_of(panel) {
                        let eq = model.equation(v).unwrap();
                        for s in eq.parameters() {
                            state.insert(s, next());
                        }
                        state.insert(Indeterminate::Variance(v), next().abs());
                    }
                    state
                })
                .collect()
        })
        .collect()
}
