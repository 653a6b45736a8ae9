//! Vehicle-dynamics simulator with a fuzzy-logic stability program that keeps
//! a car under control through a sudden tyre burst.
//!
//! The crate is organised bottom-up:
//!
//! - [`fuzzy`]: zero-order fuzzy inference shared by every controller.
//! - [`tyre`]: slip, inflated/deflated friction and the deflation schedule.
//! - [`vehicle`]: 6-DOF body with wheel spin and suspension, load transfer.
//! - [`integrator`]: fixed-step RK4.
//! - [`autopilot`]: four-bend trajectory and the kinematic + fuzzy pilot.
//! - [`abs`]: fuzzy brake modulator and load-based brake distributor.
//! - [`stability`]: reference model, slip-angle estimator, yaw-moment and
//!   torque-cut controllers, yaw-moment dispenser.
//! - [`sim`]: scenarios, the closed loop, metrics, export and sweeps.

pub mod abs;
pub mod autopilot;
pub mod config;
pub mod corner;
pub mod error;
pub mod fuzzy;
pub mod integrator;
pub mod sim;
pub mod stability;
pub mod tyre;
pub mod vehicle;

pub use corner::Corner;
pub use error::{ExportError, FuzzyError, ScenarioError, SimFault};
