//! Deterministic packet-level simulation.
//!
//! Each request is a single Interest that travels hop by hop toward a
//! source along next hops chosen by the strategy, leaving a PIT entry keyed
//! by name and nonce at every node it passes. The first node holding the
//! object answers with a Data Packet that retraces the path, letting each
//! node's caching strategy inspect it. Links are FIFO queues serving one
//! packet at a time at their capacity.
//!
//! Runs are single-threaded and reproducible: the workload and every
//! strategy draw from separate ChaCha streams of the run seed, and
//! simultaneous events fire in insertion order.

mod engine;
mod event;
mod metrics;
mod packet;
mod store;
mod strategy;
mod workload;

pub use engine::{run, run_with_strategy, SimConfig};
pub use event::{Event, EventKind, EventQueue};
pub use metrics::{cache_hit_rate, Anomalies, HitRecord, MetricsLog, RequestRecord};
pub use packet::{DataPacket, InterestPacket, Packet, PitEntry, PitKey, DEFAULT_INTEREST_BITS};
pub use store::{CacheDecision, ContentStore};
pub use strategy::{SimNetwork, Strategy, StrategyKind, StrategyParams};
pub use workload::{generate_requests, Request};
