//! Comparison strategies.
//!
//! * BP: backpressure forwarding and caching driven by Virtual Interest
//!   Packet counters, without Interest aggregation.
//! * LFUM-PI and LFUM-RTT: LFU caching with randomized multipath
//!   forwarding weighted by pending Interests or by measured round-trip
//!   times.

mod lfu;
mod lfum;
mod vip;

pub use lfu::{lfu_admit, LfuCacheState};
pub use lfum::{
    lfum_pi_forward, lfum_rtt_forward, pending_interest_probabilities, round_trip_probabilities,
    LfumMode, LfumStrategy, PendingInterestCounters, RttEstimators,
};
pub use vip::{bp_forward, vip_cache_update, vip_slot_update, BpStrategy, VipState};
