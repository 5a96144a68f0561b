//! Camera-based target positioning, avoidance and net-tracking guidance for
//! small UAVs, with a desk-scale closed-loop simulator.
//!
//! The pipeline, one module per stage:
//!
//! - [`camera`]: bounding box to metric target position via a fitted
//!   stadiametric depth law.
//! - [`guidance`]: velocity setpoints that avoid (no net) or track (net) the
//!   target, and the guided/offboard mode machine.
//! - [`vehicle`]: point-mass vehicle and waypoint mission follower.
//! - [`detector`]: synthetic detector that closes the loop in simulation.
//! - [`link`]: UDP datagram link between detection and guidance processes.
//! - [`sim`]: scenario files, the fixed-step loop, trajectory logs and
//!   metrics.
//!
//! See the `examples/` directory for one runnable program per stage.

// NaN must fail every range check, so bounds are written as `!(x > lo)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod detector;
pub mod frame;
pub mod guidance;
pub mod link;
pub mod sim;
pub mod vehicle;

pub use camera::{BoundingBox, CameraModel, NormalizedCentre, TargetEstimate};
pub use frame::Ned;
pub use guidance::{FlightMode, GuidanceConfig, VelocitySetpointNed};
pub use sim::{run_scenario, RunReport, Scenario};
pub use vehicle::{Mission, VehicleState};
