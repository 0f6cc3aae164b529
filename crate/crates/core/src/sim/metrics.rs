use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::topology::{NodeId, ObjectId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequestRecord {
    pub creation: f64,
    pub fulfill: f64,
    pub object: ObjectId,
    pub requester: NodeId,
}

impl RequestRecord {
    pub fn delay(&self) -> f64 {
        self.fulfill - self.creation
    }
}

/// An Interest answered from the cache of a node that is not a source of
/// the object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitRecord {
    pub time: f64,
    pub node: NodeId,
    pub object: ObjectId,
}

/// Conditions that never occur in a valid run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Anomalies {
    /// Interests at a non-source node with no FIB entry.
    pub no_route: u64,
    /// Data without a matching PIT entry.
    pub orphan_data: u64,
    /// Interests whose name and nonce matched an existing PIT entry.
    pub nonce_collisions: u64,
    /// Strategy decisions that would overflow or corrupt a cache.
    pub cache_violations: u64,
    /// Strategy hop choices outside the node's FIB.
    pub invalid_hops: u64,
}

impl Anomalies {
    pub fn total(&self) -> u64 {
        self.no_route + self.orphan_data + self.nonce_collisions + self.cache_violations + self.invalid_hops
    }
}

/// Everything a run records.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsLog {
    /// Fulfilled requests in fulfilment order.
    pub requests: Vec<RequestRecord>,
    pub hits: Vec<HitRecord>,
    pub generated: usize,
    pub anomalies: Anomalies,
    /// PIT entries left at termination, summed over nodes.
    pub pit_remaining: usize,
    pub horizon: f64,
    pub end_time: f64,
    pub events: u64,
    /// Hash over every processed event; equal for identical runs.
    pub trace_hash: u64,
    pub node_names: Vec<String>,
}

impl MetricsLog {
    pub fn empty(horizon: f64, node_names: Vec<String>) -> Self {
        MetricsLog {
            requests: Vec::new(),
            hits: Vec::new(),
            generated: 0,
            anomalies: Anomalies::default(),
            pit_remaining: 0,
            horizon,
            end_time: 0.0,
            events: 0,
            trace_hash: 0,
            node_names,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn fulfilled(&self) -> usize {
        self.requests.len()
    }

    pub fn is_complete(&self) -> bool {
        self.fulfilled() == self.generated
    }

    /// Sum of request delays, seconds.
    pub fn total_delay(&self) -> Result<f64> {
        if !self.is_complete() {
            return Err(Error::IncompleteLog {
                generated: self.generated,
                fulfilled: self.fulfilled(),
            });
        }
        Ok(self.requests.iter().map(RequestRecord::delay).sum())
    }

    pub fn mean_delay(&self) -> Result<f64> {
        let total = self.total_delay()?;
        Ok(if self.requests.is_empty() {
            0.0
        } else {
            total / self.requests.len() as f64
        })
    }

    /// Cache hits per node per second of the request horizon.
    pub fn cache_hit_rate(&self) -> f64 {
        cache_hit_rate(self.hits.len(), self.node_count(), self.horizon)
    }

    /// One `request` row per fulfilled request and one `hit` row per cache
    /// hit. Objects are numbered from 1 and nodes are given by name.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("event,creation_time,fulfill_time,object,node\n");
        for r in &self.requests {
            let _ = writeln!(
                out,
                "request,{},{},{},{}",
                r.creation,
                r.fulfill,
                r.object + 1,
                self.node_names[r.requester]
            );
        }
        for h in &self.hits {
            let _ = writeln!(out, "hit,{},,{},{}", h.time, h.object + 1, self.node_names[h.node]);
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// `hits / (nodes * horizon)`; 0 for an empty network or horizon.
pub fn cache_hit_rate(hits: usize, nodes: usize, horizon: f64) -> f64 {
    if nodes == 0 || horizon <= 0.0 {
        return 0.0;
    }
    hits as f64 / (nodes as f64 * horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log(delays: &[f64]) -> MetricsLog {
        let mut log = MetricsLog::empty(10.0, vec!["a".into(), "b".into()]);
        for (n, &d) in delays.iter().enumerate() {
            log.requests.push(RequestRecord {
                creation: n as f64,
                fulfill: n as f64 + d,
                object: 0,
                requester: 0,
            });
        }
        log.generated = delays.len();
        log
    }

    #[test]
    fn total_delay_sums() {
        assert_eq!(log(&[]).total_delay().unwrap(), 0.0);
        assert_eq!(log(&[0.1]).total_delay().unwrap(), 0.1);
        assert!((log(&[0.1, 0.3]).total_delay().unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn incomplete_log_is_rejected() {
        let mut l = log(&[0.1]);
        l.generated = 2;
        assert!(matches!(l.total_delay(), Err(Error::IncompleteLog { .. })));
    }

    #[test]
    fn hit_rate() {
        assert_eq!(cache_hit_rate(0, 10, 10.0), 0.0);
        assert_eq!(cache_hit_rate(100, 10, 10.0), 1.0);
    }

    #[test]
    fn csv_uses_names_and_one_based_objects() {
        let mut l = log(&[0.5]);
        l.hits.push(HitRecord { time: 2.0, node: 1, object: 4 });
        assert_eq!(
            l.to_csv(),
            "event,creation_time,fulfill_time,object,node\nrequest,0,0.5,1,a\nhit,2,,5,b\n"
        );
    }
}
