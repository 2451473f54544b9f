//! Planning toolkit for LoRaWAN gateway placement.
//!
//! The pipeline: define a [`scenario::Scenario`] (candidate grid plus end
//! devices), build a received-power matrix from a closed-form
//! [`channel::ChannelConfig`] or from ingested ray-tracer coverage maps
//! ([`rt_ingest`]), threshold it into binary coverage, solve the
//! minimum-gateway set cover ([`placement`]), and validate the resulting
//! deployment with a packet-level uplink simulation ([`sim`]).
//!
//! Matrix construction and threshold sweeps are data-parallel under the
//! `parallel` feature (on by default); every parallel path has a sequential
//! twin that produces bit-identical results.

// `!(x > 0.0)` validations are NaN-rejecting on purpose; `x <= 0.0` is not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod coverage;
pub mod error;
pub mod placement;
pub mod report;
pub mod rt_ingest;
pub mod scenario;
pub mod sim;

pub use channel::{ChannelConfig, Environment, LosMode, ModelKind};
pub use coverage::{build_alpha, threshold, uncovered_eds, CoverageMatrix, GainMatrix};
pub use error::{Error, Result};
pub use placement::{
    avg_ed_best_power, brute_force, solve_exact, solve_greedy, sweep_rho, PlacementSolution,
    PlanFile, SolveStatus, SolverKind, SweepReport,
};
pub use rt_ingest::{build_alpha_from_maps, load_gain_map, sample_gain, GainMap};
pub use scenario::{
    build_grid, distance_2d, distance_3d, load_scenario, sample_scenario, save_scenario, Position,
    Scenario,
};
pub use sim::{avg_pdr, run_sim, sensitivity_dbm, time_on_air_s, PdrReport, TrafficConfig};
