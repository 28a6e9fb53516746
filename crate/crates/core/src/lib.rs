//! Event-triggered stabilization of scalar linear plants over a finite-rate
//! channel with unknown bounded delay and bounded disturbances.
//!
//! The sensor watches the estimation error `z = x - x̂` and transmits when
//! `|z|` reaches the triggering radius `J`. A packet carries the sign (or a
//! quantized phase) of `z` together with a few bits of the triggering time;
//! the rest of the timing information is carried implicitly by the moment
//! the packet arrives. The controller rebuilds `z(t_c)` from the packet and
//! its reception time and jumps its estimate accordingly.
//!
//! Module map:
//!
//! - [`model`]: plant, trigger, channel and disturbance configuration, the
//!   config validator and the practical-stability envelope.
//! - [`codec`]: bit-exact packet encoder and decoder (real and complex).
//! - [`engine`]: deterministic discrete-time closed-loop simulator.
//! - [`bounds`]: closed-form packet-size and rate bounds.
//! - [`adversary`]: uncertainty sets, the minimal quantizer and worst-case
//!   delay/disturbance realizations for the necessary side.
//! - [`vector`]: modal decomposition of diagonalizable vector plants and the
//!   inverted-pendulum case study.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod adversary;
pub mod bounds;
pub mod codec;
pub mod engine;
pub mod model;
pub mod table;
pub mod vector;

pub use num_complex::Complex64;

pub use bounds::RateReport;
pub use codec::{DecodedEvent, Packet};
pub use engine::{EventLog, RunOutput, SimState, Trajectory};
pub use model::{ChannelModel, DisturbanceModel, IspsEnvelope, PlantConfig, TriggerConfig};
