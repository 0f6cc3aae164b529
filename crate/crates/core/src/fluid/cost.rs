/// Congestion cost of the Data traffic induced by a request flow.
///
/// `flow` is the Data rate in bits/sec and `capacity` the capacity of the
/// link carrying it. Saturated links (`flow >= capacity`) return
/// `f64::INFINITY` for both cost and derivative; implementations must never
/// return NaN.
pub trait LinkCostModel: Send + Sync + std::fmt::Debug {
    fn cost(&self, flow: f64, capacity: f64) -> f64;
    fn derivative(&self, flow: f64, capacity: f64) -> f64;
}

/// M/M/1 queue occupancy `F / (C - F)`: the expected number of packets
/// queued or in service on the link.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MM1;

impl LinkCostModel for MM1 {
    fn cost(&self, flow: f64, capacity: f64) -> f64 {
        link_cost(flow, capacity)
    }

    fn derivative(&self, flow: f64, capacity: f64) -> f64 {
        link_cost_derivative(flow, capacity)
    }
}

pub fn link_cost(flow: f64, capacity: f64) -> f64 {
    debug_assert!(flow >= 0.0, "negative flow {flow}");
    if flow >= capacity {
        f64::INFINITY
    } else {
        flow / (capacity - flow)
    }
}

/// `C / (C - F)^2`.
pub fn link_cost_derivative(flow: f64, capacity: f64) -> f64 {
    debug_assert!(flow >= 0.0, "negative flow {flow}");
    if flow >= capacity {
        f64::INFINITY
    } else {
        let slack = capacity - flow;
        capacity / (slack * slack)
    }
}
