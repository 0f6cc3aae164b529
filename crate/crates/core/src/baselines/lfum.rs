use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

use super::lfu::{lfu_admit, LfuCacheState};
use crate::sim::{CacheDecision, ContentStore, SimNetwork, Strategy};
use crate::topology::{NodeId, ObjectId};

/// How LFUM weights the next hops of an Interest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LfumMode {
    /// `∝ 1 / (PI + 1)` with PI the pending Interests on the interface.
    PendingInterests,
    /// `∝ 1 / RTT` with RTT an exponentially weighted average.
    RoundTrip { beta: f64 },
}

/// Outstanding Interests per flat routing hop, that is per node, object
/// and outgoing interface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingInterestCounters {
    counts: Vec<u64>,
}

impl PendingInterestCounters {
    pub fn new(hop_count: usize) -> Self {
        PendingInterestCounters {
            counts: vec![0; hop_count],
        }
    }

    pub fn forwarded(&mut self, hop: usize) {
        self.counts[hop] += 1;
    }

    pub fn answered(&mut self, hop: usize) {
        self.counts[hop] = self.counts[hop].saturating_sub(1);
    }

    pub fn get(&self, hop: usize) -> u64 {
        self.counts[hop]
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> &[u64] {
        &self.counts[range]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// RTT averages per flat routing hop; `None` before the first sample.
#[derive(Debug, Clone, PartialEq)]
pub struct RttEstimators {
    beta: f64,
    estimates: Vec<Option<f64>>,
}

impl RttEstimators {
    pub fn new(hop_count: usize, beta: f64) -> Self {
        RttEstimators {
            beta,
            estimates: vec![None; hop_count],
        }
    }

    /// `avg ← (1-β) avg + β sample`; the first sample initializes.
    pub fn sample(&mut self, hop: usize, rtt: f64) {
        let e = &mut self.estimates[hop];
        *e = Some(match *e {
            None => rtt,
            Some(avg) => (1.0 - self.beta) * avg + self.beta * rtt,
        });
    }

    pub fn get(&self, hop: usize) -> Option<f64> {
        self.estimates[hop]
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> &[Option<f64>] {
        &self.estimates[range]
    }
}

/// Forwarding probabilities `∝ 1 / (PI + 1)`.
pub fn pending_interest_probabilities(counts: &[u64]) -> Vec<f64> {
    normalize(counts.iter().map(|&c| 1.0 / (c as f64 + 1.0)).collect())
}

/// Forwarding probabilities `∝ 1 / RTT`.
///
/// Uniform before any interface has a sample. An interface without a
/// sample is weighted like the fastest sampled one so that it still gets
/// explored.
pub fn round_trip_probabilities(estimates: &[Option<f64>]) -> Vec<f64> {
    let fastest = estimates
        .iter()
        .flatten()
        .copied()
        .filter(|&r| r > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !fastest.is_finite() {
        return vec![1.0 / estimates.len() as f64; estimates.len()];
    }
    normalize(
        estimates
            .iter()
            .map(|e| 1.0 / e.filter(|&r| r > 0.0).unwrap_or(fastest))
            .collect(),
    )
}

fn normalize(weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn sample<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> usize {
    if probabilities.len() == 1 {
        return 0;
    }
    WeightedIndex::new(probabilities)
        .expect("positive finite weights")
        .sample(rng)
}

/// Draws a next-hop position with probability `∝ 1 / (PI + 1)`.
pub fn lfum_pi_forward<R: Rng + ?Sized>(counts: &[u64], rng: &mut R) -> usize {
    sample(&pending_interest_probabilities(counts), rng)
}

/// Draws a next-hop position with probability `∝ 1 / RTT`.
pub fn lfum_rtt_forward<R: Rng + ?Sized>(estimates: &[Option<f64>], rng: &mut R) -> usize {
    sample(&round_trip_probabilities(estimates), rng)
}

/// LFU caching with randomized multipath forwarding.
#[derive(Debug)]
pub struct LfumStrategy {
    mode: LfumMode,
    pending: PendingInterestCounters,
    rtt: RttEstimators,
    lfu: Vec<LfuCacheState>,
}

impl LfumStrategy {
    pub fn new(net: &SimNetwork<'_>, mode: LfumMode) -> Self {
        let hops = net.routing.hop_count();
        let beta = match mode {
            LfumMode::RoundTrip { beta } => beta,
            LfumMode::PendingInterests => 0.125,
        };
        LfumStrategy {
            mode,
            pending: PendingInterestCounters::new(hops),
            rtt: RttEstimators::new(hops, beta),
            lfu: vec![LfuCacheState::new(net.graph.object_count()); net.graph.node_count()],
        }
    }

    pub fn pending(&self) -> &PendingInterestCounters {
        &self.pending
    }
}

impl Strategy for LfumStrategy {
    fn name(&self) -> &'static str {
        match self.mode {
            LfumMode::PendingInterests => "lfum-pi",
            LfumMode::RoundTrip { .. } => "lfum-rtt",
        }
    }

    fn on_interest(&mut self, _net: &SimNetwork<'_>, node: NodeId, object: ObjectId, _now: f64) {
        self.lfu[node].record(object);
    }

    fn select_hop(&mut self, net: &SimNetwork<'_>, node: NodeId, object: ObjectId, rng: &mut ChaCha8Rng) -> usize {
        let range = net.routing.hop_range(object, node);
        let position = match self.mode {
            LfumMode::PendingInterests => lfum_pi_forward(self.pending.slice(range.clone()), rng),
            LfumMode::RoundTrip { .. } => lfum_rtt_forward(self.rtt.slice(range.clone()), rng),
        };
        range.start + position
    }

    fn on_forward(&mut self, _net: &SimNetwork<'_>, hop: usize, _now: f64) {
        self.pending.forwarded(hop);
    }

    fn on_data(&mut self, _net: &SimNetwork<'_>, hop: usize, rtt: f64, _now: f64) {
        self.pending.answered(hop);
        self.rtt.sample(hop, rtt);
    }

    fn cache_decision(
        &mut self,
        _net: &SimNetwork<'_>,
        node: NodeId,
        object: ObjectId,
        store: &ContentStore,
        _now: f64,
    ) -> CacheDecision {
        lfu_admit(&self.lfu[node], store, object)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15)
    }

    #[test]
    fn pending_interest_weights() {
        assert!(close(&pending_interest_probabilities(&[0, 0]), &[0.5, 0.5]));
        assert!(close(&pending_interest_probabilities(&[1, 3]), &[2.0 / 3.0, 1.0 / 3.0]));
        assert!(close(&pending_interest_probabilities(&[9]), &[1.0]));
    }

    #[test]
    fn round_trip_weights() {
        assert!(close(&round_trip_probabilities(&[Some(0.1), Some(0.3)]), &[0.75, 0.25]));
        assert!(close(&round_trip_probabilities(&[Some(0.2), Some(0.2)]), &[0.5, 0.5]));
        assert!(close(&round_trip_probabilities(&[None, None]), &[0.5, 0.5]));
        assert!(close(&round_trip_probabilities(&[None, Some(0.2)]), &[0.5, 0.5]));
    }

    #[test]
    fn ewma_update() {
        let mut e = RttEstimators::new(1, 0.125);
        assert_eq!(e.get(0), None);
        e.sample(0, 1.0);
        assert_eq!(e.get(0), Some(1.0));
        e.sample(0, 2.0);
        assert_eq!(e.get(0), Some(1.125));
    }

    #[test]
    fn counters_never_go_negative() {
        let mut c = PendingInterestCounters::new(2);
        c.forwarded(1);
        c.answered(1);
        c.answered(1);
        assert_eq!(c.total(), 0);
    }
}
