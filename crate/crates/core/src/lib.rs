//! Starvation analysis of a media-streaming playout buffer.
//!
//! Packets of a file of `N` packets arrive at a client buffer and are played
//! out at rate `mu`. Playback starts once `x1` packets are buffered; whenever
//! the buffer runs dry it stalls (a *starvation*) and resumes after refilling.
//! The crate computes the distribution of the number of starvations under
//! Poisson, slotted and ON/OFF arrivals, fluid approximations for random
//! file sizes, the prefetch threshold that balances start-up delay against
//! stalls, and a discrete-event simulator to check all of them.
//!
//! ```
//! use playout_core::{ballot, QueueParams, ScenarioSpec};
//!
//! let params = QueueParams::new(0.95, 1.0)?;
//! let spec = ScenarioSpec::poisson(200, 20)?;
//! let dist = ballot::starvation_pmf(&params, &spec, 2, ballot::Mode::Exact)?;
//! assert!(dist.get(0) > 0.0 && dist.get(0) < 1.0);
//! # Ok::<(), playout_core::Error>(())
//! ```

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ballot;
pub mod error;
pub mod fluid;
pub mod numeric;
pub mod params;
pub mod qoe;
pub mod recursive;
pub mod sim;
pub mod takacs;
pub mod toeplitz;

pub use error::{Error, Result};
pub use params::{ArrivalModel, IppParams, Method, QueueParams, ScenarioSpec, SlotParams, StarvationDistribution};
pub use toeplitz::BandedToeplitzMatrix;
