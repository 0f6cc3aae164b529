use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::topology::{Demand, NodeId, ObjectId};

/// One exogenous request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Request {
    pub time: f64,
    pub node: NodeId,
    pub object: ObjectId,
    pub nonce: u64,
}

/// Poisson request arrivals at every node with positive total rate over
/// `[0, horizon)`, each naming an object drawn in proportion to the node's
/// per-object rates and carrying a fresh 64-bit nonce.
///
/// Sorted by time, then node. Nodes draw in id order from `rng`, so the
/// result depends only on the demand, the horizon and the RNG state.
pub fn generate_requests<R: Rng + ?Sized>(demand: &Demand, horizon: f64, rng: &mut R) -> Vec<Request> {
    let mut requests = Vec::new();
    for node in 0..demand.node_count() {
        let total = demand.node_total(node);
        if total <= 0.0 {
            continue;
        }
        let weights: Vec<f64> = (0..demand.object_count()).map(|k| demand.rate(node, k)).collect();
        let objects = WeightedIndex::new(&weights).expect("positive total rate");
        let gaps = Exp::new(total).expect("positive rate");
        let mut time = 0.0;
        loop {
            time += gaps.sample(rng);
            if time >= horizon {
                break;
            }
            requests.push(Request {
                time,
                node,
                object: objects.sample(rng),
                nonce: rng.random(),
            });
        }
    }
    requests.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.node.cmp(&b.node)));
    requests
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_rate_generates_nothing() {
        let d = Demand::zeros(3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(generate_requests(&d, 100.0, &mut rng).is_empty());
    }

    #[test]
    fn count_matches_rate() {
        let mut d = Demand::zeros(2, 2);
        d.set_rate(0, 0, 3.0);
        d.set_rate(0, 1, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let reqs = generate_requests(&d, 1000.0, &mut rng);
        // Poisson(4000): 5 sigma is about 316.
        assert!((reqs.len() as f64 - 4000.0).abs() < 320.0, "{}", reqs.len());
        assert!(reqs.iter().all(|r| r.node == 0 && r.time < 1000.0));
        assert!(reqs.windows(2).all(|w| w[0].time <= w[1].time));
        let first = reqs.iter().filter(|r| r.object == 0).count() as f64 / reqs.len() as f64;
        assert!((first - 0.75).abs() < 0.03, "{first}");
    }
}
