//! Joint forwarding and caching for information-centric networks.
//!
//! The crate has two halves that share one network description:
//!
//! * a fluid model ([`fluid`], [`mindelay`]) in which request traffic is a
//!   continuous rate, link costs follow an M/M/1 congestion model, and the
//!   MinDelay conditional-gradient iteration picks forwarding fractions and
//!   integer caching decisions from marginal costs;
//! * a packet-level discrete-event simulator ([`sim`]) that runs the online
//!   MinDelay rules next to three comparison strategies ([`baselines`]),
//!   driven by the experiment runner in [`experiments`].
//!
//! Work that is embarrassingly parallel (per-object recursions in the fluid
//! model, independent simulation runs) goes through [`exec::Execution`],
//! which uses rayon when the `parallel` feature is enabled and falls back to
//! a plain loop otherwise.

pub mod baselines;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod fluid;
pub mod mindelay;
pub mod sim;
pub mod synth;
pub mod topology;

pub use error::{Error, Result};
pub use exec::Execution;
