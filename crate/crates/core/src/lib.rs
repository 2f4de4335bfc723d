//! Simulator and exact verification lab for 𝒟-adaptive and semi-random
//! graph processes.
//!
//! The crate is organised bottom-up: [`graph`] holds the multigraph,
//! [`process`] runs the 𝒟-process against a [`process::Strategy`],
//! [`properties`] and [`strategies`] provide the monotone properties and the
//! players, [`threshold`] and [`sweep`] turn trials into estimates, and
//! [`martingale`] verifies the boosting and coupling arguments exactly on
//! tiny instances.

pub mod cli;
pub mod graph;
pub mod martingale;
pub mod process;
pub mod properties;
pub mod rng;
pub mod strategies;
pub mod sweep;
pub mod threshold;
