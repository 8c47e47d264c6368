//! Discrete-time age-of-information (AoI) queueing toolkit.
//!
//! A source emits time-stamped status updates into a queue; a monitor tracks
//! the age of the freshest update it has received. Everything here runs on a
//! slotted clock: arrivals, services, vacations, and ages are all measured in
//! whole slots.
//!
//! The crate has four layers:
//!
//! * [`dist`] — discrete probability distributions on `{1, 2, 3, …}` with
//!   exact moments, probability generating functions, and inverse-transform
//!   sampling.
//! * [`analytic`] — closed-form peak/average age evaluators for four
//!   disciplines: Bernoulli-arrival FCFS, FCFS with multiple server
//!   vacations, preemptive LCFS with general renewal arrivals, and an
//!   infinite-server queue where late updates are discarded.
//! * [`sim`] — an exact slot-by-slot simulator for the same four
//!   disciplines, with full trace capture, batch-means error bars, and a
//!   library of replayable trace invariants.
//! * [`harness`] — a TOML-driven experiment runner that evaluates analytic
//!   and simulated ages side by side and emits deterministic CSV reports.

pub mod analytic;
pub mod dist;
pub mod harness;
pub mod sim;

pub use analytic::{AnalyticError, AnalyticResult, ArrivalSpec, Discipline, QueueSpec};
pub use dist::{DiscreteDist, DistError};
pub use sim::{AgeEstimate, SimConfig, SimError, SimOutput, SimTrace};
