//! APSK constellation design for joint communication and sensing.
//!
//! Builds ring constellations under the tradeoff-family scaling rules,
//! evaluates their mutual information over AWGN and their symbol-energy
//! variance and CRB for sensing, and sweeps the design space for the
//! (variance, rate) Pareto frontier.

// `!(x > 0.0)` guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comm;
pub mod constellation;
pub mod error;
pub mod geometry;
pub mod report;
pub mod rng;
pub mod sense;
pub mod stats;
pub mod tradeoff;
pub mod verify;

pub use comm::{ChannelSpec, MiEstimate};
pub use constellation::{
    build_apsk, build_prop1_family, build_psk, build_qam, build_tradeoff_family, ApskDesign, Constellation,
    EnergyMoments, Family, RingLayout, TradeoffParams,
};
pub use error::{ApskError, Result};
pub use geometry::DistanceReport;
pub use sense::SensingSpec;
pub use tradeoff::{FrontierSet, MetricPoint, SweepConfig};
