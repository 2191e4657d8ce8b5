//! Discrete simulator for swarm surveillance through virtual pheromones.
//!
//! Robots patrol a grid floor plan, marking where they have been by
//! depositing an evaporating pheromone into a private map and steering
//! toward the least-marked cells they can see. Nearby robots exchange map
//! patches over range-limited broadcasts and reconcile them with a
//! freshest-wins, per-cell maximum merge, so coverage coordination emerges
//! without any shared state. A synchronous single-map baseline mode
//! provides the comparison point for task throughput and communication
//! cost.
//!
//! The crate is organised bottom-up:
//!
//! - [`env`]: grid maps, rooms, ring/disc geometry, supercover lines
//! - [`pheromone`]: concentration fields, deposition and evaporation
//! - [`strategy`]: target-cell choice policies
//! - [`vibit`]: broadcast messages, delivery, freshness-gated aggregation
//! - [`robot`]: the per-robot sense–act cycle
//! - [`metrics`]: task-points, cellsteps, heatmaps, difference histograms
//! - [`config`]: run parameters and the flat key-value config format
//! - [`engine`]: schedulers, full runs, seed-matched sweeps
//! - [`maps`]: built-in floor plans

pub mod config;
pub mod engine;
pub mod env;
pub mod maps;
pub mod metrics;
pub mod pheromone;
pub mod robot;
pub mod strategy;
pub mod vibit;
