use super::{NetworkGraph, NodeId, ObjectId};
use crate::error::{Error, Result};

/// Zipf popularity over `count` ranked objects: `p(k) ∝ k^-alpha`, ranks
/// starting at 1.
pub fn zipf_pmf(alpha: f64, count: usize) -> Vec<f64> {
    let weights: Vec<f64> = (1..=count).map(|k| (k as f64).powf(-alpha)).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// How exogenous request rates are specified.
#[derive(Debug, Clone, PartialEq)]
pub enum DemandConfig {
    /// Explicit `(node, object, requests/sec)` triples; unspecified pairs are zero.
    Explicit(Vec<(NodeId, ObjectId, f64)>),
    /// Every requester issues `rate_per_node` requests/sec with Zipf(`alpha`)
    /// object popularity.
    Zipf {
        requesters: Vec<NodeId>,
        rate_per_node: f64,
        alpha: f64,
    },
}

impl DemandConfig {
    pub fn materialize(&self, graph: &NetworkGraph) -> Result<Demand> {
        let n = graph.node_count();
        let k_count = graph.object_count();
        let mut demand = Demand::zeros(n, k_count);
        match self {
            DemandConfig::Explicit(entries) => {
                for &(i, k, r) in entries {
                    if i >= n || k >= k_count {
                        return Err(Error::config(format!(
                            "demand entry ({i}, {k}) out of range"
                        )));
                    }
                    if !(r.is_finite() && r >= 0.0) {
                        return Err(Error::config(format!("demand rate {r} must be >= 0")));
                    }
                    demand.rates[k * n + i] += r;
                }
            }
            DemandConfig::Zipf {
                requesters,
                rate_per_node,
                alpha,
            } => {
                if !(rate_per_node.is_finite() && *rate_per_node >= 0.0) {
                    return Err(Error::config(format!(
                        "rate per node {rate_per_node} must be >= 0"
                    )));
                }
                if !alpha.is_finite() {
                    return Err(Error::config("zipf exponent must be finite"));
                }
                let pmf = zipf_pmf(*alpha, k_count);
                for &i in requesters {
                    if i >= n {
                        return Err(Error::config(format!("requester {i} out of range")));
                    }
                    for (k, p) in pmf.iter().enumerate() {
                        demand.rates[k * n + i] += rate_per_node * p;
                    }
                }
            }
        }
        Ok(demand)
    }

    /// Same configuration with the per-requester rate replaced (Zipf) or all
    /// explicit rates scaled so that their per-node maximum equals `rate`.
    pub fn with_rate(&self, rate: f64) -> DemandConfig {
        match self {
            DemandConfig::Zipf {
                requesters, alpha, ..
            } => DemandConfig::Zipf {
                requesters: requesters.clone(),
                rate_per_node: rate,
                alpha: *alpha,
            },
            DemandConfig::Explicit(entries) => {
                let mut per_node = std::collections::BTreeMap::<NodeId, f64>::new();
                for &(i, _, r) in entries {
                    *per_node.entry(i).or_default() += r;
                }
                let max = per_node.values().cloned().fold(0.0, f64::max);
                let scale = if max > 0.0 { rate / max } else { 0.0 };
                DemandConfig::Explicit(entries.iter().map(|&(i, k, r)| (i, k, r * scale)).collect())
            }
        }
    }
}

/// Exogenous request rates `r_i(k)` in requests/sec, stored object-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Demand {
    node_count: usize,
    object_count: usize,
    rates: Vec<f64>,
}

impl Demand {
    pub fn zeros(node_count: usize, object_count: usize) -> Self {
        Demand {
            node_count,
            object_count,
            rates: vec![0.0; node_count * object_count],
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn object_count(&self) -> usize {
        self.object_count
    }

    pub fn rate(&self, node: NodeId, object: ObjectId) -> f64 {
        self.rates[object * self.node_count + node]
    }

    pub fn set_rate(&mut self, node: NodeId, object: ObjectId, rate: f64) {
        assert!(rate >= 0.0, "negative demand");
        self.rates[object * self.node_count + node] = rate;
    }

    /// Rates of one object, indexed by node.
    pub fn object_rates(&self, object: ObjectId) -> &[f64] {
        let n = self.node_count;
        &self.rates[object * n..(object + 1) * n]
    }

    pub fn node_total(&self, node: NodeId) -> f64 {
        (0..self.object_count).map(|k| self.rate(node, k)).sum()
    }

    pub fn scaled(&self, factor: f64) -> Demand {
        Demand {
            rates: self.rates.iter().map(|r| r * factor).collect(),
            ..self.clone()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rates.iter().all(|&r| r == 0.0)
    }
}
