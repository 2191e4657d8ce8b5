//! Run orchestration: robot placement, the asynchronous scheduler, the
//! synchronous shared-map baseline, and seed-matched batch sweeps.
//!
//! All randomness flows from the run seed through a fixed derivation order
//! (placement stream, scheduler stream, then one stream per robot), so a
//! config plus a seed pins every trajectory bit-for-bit and adding metrics
//! can never perturb a run.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{strategy_for, Mode, SimConfig};
use crate::env::{path_cells, CellCoord, Environment, MapError};
use crate::metrics::{
    snapshot_heatmap, CellstepsGrid, HeatmapSnapshot, MetricsError, TaskPointTracker,
};
use crate::pheromone::{FieldError, PheromoneMap};
use crate::robot::{fsm_cycle, should_terminate, DynamicsParams, GeomTables, Robot};
use crate::strategy::{candidate_set_offsets, choose_target, travel_angle, wrap_angle};
use crate::vibit::{deliver, message_size, AggregateOutcome, CommCounters};
use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("cannot place {robots} robots on {free} free cells")]
    TooManyRobots { robots: usize, free: usize },
}

/// One broadcast, as recorded when communication logging is enabled.
#[derive(Clone, Debug, PartialEq)]
pub struct CommEvent {
    pub event_index: u64,
    pub sender: usize,
    pub sender_timestep: u64,
    pub payload_cells: usize,
    pub bytes: u64,
    pub recipients: usize,
}

/// CSV of a communication log, one row per broadcast.
pub fn comm_log_csv(events: &[CommEvent]) -> String {
    let mut out =
        String::from("step,sender_id,sender_timestep,recipients,payload_cells,bytes\n");
    for e in events {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            e.event_index, e.sender, e.sender_timestep, e.recipients, e.payload_cells, e.bytes
        ));
    }
    out
}

/// Everything one run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub taskpoints: u64,
    /// Global event index of each task-point completion.
    pub taskpoint_events: Vec<u64>,
    pub comm: CommCounters,
    pub cellsteps: CellstepsGrid,
    /// Final-step map snapshots: one per robot, or a single shared-map entry.
    pub heatmaps: Vec<HeatmapSnapshot>,
    /// Final maps in robot-id order (single entry for the shared map).
    pub final_maps: Vec<PheromoneMap>,
    pub comm_log: Option<Vec<CommEvent>>,
}

/// Derives the run's generator streams from its seed: placement, scheduler,
/// then one stream per robot in id order. This order is a stability
/// contract; reordering it changes every trajectory.
pub fn rng_streams(seed: u64, robots: usize) -> (ChaCha8Rng, ChaCha8Rng, Vec<ChaCha8Rng>) {
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    let placement = ChaCha8Rng::seed_from_u64(seeder.random());
    let scheduler = ChaCha8Rng::seed_from_u64(seeder.random());
    let streams = (0..robots)
        .map(|_| ChaCha8Rng::seed_from_u64(seeder.random()))
        .collect();
    (placement, scheduler, streams)
}

/// Draws distinct uniformly-random free starting cells, then a uniform
/// heading per robot, from the placement stream.
pub fn initial_placement(
    env: &Environment,
    robots: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(CellCoord, f64)>, SimError> {
    let free = env.free_cells();
    if robots > free.len() {
        return Err(SimError::TooManyRobots {
            robots,
            free: free.len(),
        });
    }
    let mut cells = free.to_vec();
    for k in 0..robots {
        let j = rng.random_range(k..cells.len());
        cells.swap(k, j);
    }
    Ok((0..robots)
        .map(|k| (cells[k], wrap_angle(rng.random_range(-PI..PI))))
        .collect())
}

fn build_robots(
    cfg: &SimConfig,
    env: &Environment,
    placement: &[(CellCoord, f64)],
) -> Vec<Robot> {
    placement
        .iter()
        .enumerate()
        .map(|(id, &(pos, heading))| {
            Robot::new(
                id,
                pos,
                heading,
                strategy_for(cfg.strategy, id, cfg.robots),
                cfg.strategy_params(),
                cfg.radii(),
                env,
            )
        })
        .collect()
}

/// Rooms touched by a path plus the room of the end position, so a robot
/// holding still inside a room still counts as surveilling it.
fn visit_rooms(env: &Environment, path: &[CellCoord], end: CellCoord) -> BTreeSet<char> {
    let mut rooms = BTreeSet::new();
    for &cell in path.iter().chain(std::iter::once(&end)) {
        if let Some(label) = env.room(cell) {
            rooms.insert(label);
        }
    }
    rooms
}

fn occupied_rooms(env: &Environment, robots: &[Robot]) -> BTreeSet<char> {
    robots
        .iter()
        .filter_map(|r| env.room(r.pos))
        .collect()
}

/// Resolves the `environment` config value: first as a built-in layout
/// name, otherwise as a path to a map file.
pub fn load_environment(spec: &str) -> Result<Environment, SimError> {
    if let Some(env) = crate::maps::builtin(spec) {
        return Ok(env);
    }
    Ok(Environment::from_file(spec)?)
}

/// Loads the map named by the config and runs it.
pub fn run(cfg: &SimConfig) -> Result<RunResult, SimError> {
    let env = load_environment(&cfg.environment)?;
    run_on(cfg, &env)
}

/// Runs on an already-parsed environment.
pub fn run_on(cfg: &SimConfig, env: &Environment) -> Result<RunResult, SimError> {
    cfg.validate()?;
    match cfg.mode {
        Mode::Decentralized => run_decentralized(cfg, env),
        Mode::Centralized => run_centralized(cfg, env),
    }
}

/// Asynchronous mode: each event activates one robot drawn uniformly from
/// those still short of the horizon and executes one full cycle, so local
/// clocks drift apart; the run ends when every robot has reached it.
fn run_decentralized(cfg: &SimConfig, env: &Environment) -> Result<RunResult, SimError> {
    let (mut placement_rng, mut scheduler, mut streams) = rng_streams(cfg.seed, cfg.robots);
    let placement = initial_placement(env, cfg.robots, &mut placement_rng)?;
    let mut robots = build_robots(cfg, env, &placement);
    let dynamics: DynamicsParams = cfg.dynamics();
    let geom = GeomTables::new(&cfg.radii(), &dynamics.deposition, dynamics.falloff);

    let mut tracker = TaskPointTracker::new(env);
    let mut cellsteps = CellstepsGrid::new(env);
    let mut comm = CommCounters::default();
    let mut comm_log = cfg.comm_log.then(Vec::new);

    let mut active: Vec<usize> = (0..robots.len())
        .filter(|&id| !should_terminate(&robots[id], cfg.steps))
        .collect();
    let mut event_index: u64 = 0;
    while !active.is_empty() {
        let slot = scheduler.random_range(0..active.len());
        let id = active[slot];
        let out = fsm_cycle(&mut robots[id], env, &geom, &dynamics, &mut streams[id]);

        cellsteps.record(&out.path)?;
        for outcome in &out.aggregations {
            match *outcome {
                AggregateOutcome::Accepted { bytes, .. } => {
                    comm.aggregations_accepted += 1;
                    comm.bytes_aggregated += bytes;
                }
                AggregateOutcome::StaleRejected | AggregateOutcome::MalformedRejected => {
                    comm.aggregations_rejected += 1;
                }
            }
        }
        if let Some(msg) = &out.message {
            let sender_pos = robots[id].pos;
            let recipients = deliver(
                msg,
                sender_pos,
                &mut robots,
                cfg.r_t,
                &mut comm,
                &dynamics.cost,
            );
            if let Some(log) = &mut comm_log {
                log.push(CommEvent {
                    event_index,
                    sender: id,
                    sender_timestep: msg.sender_timestep,
                    payload_cells: msg.payload.len(),
                    bytes: message_size(msg, &dynamics.cost),
                    recipients: recipients.len(),
                });
            }
        }

        let visits = visit_rooms(env, &out.path, robots[id].pos);
        let occupied = occupied_rooms(env, &robots);
        tracker.update(&visits, &occupied, event_index);

        if should_terminate(&robots[id], cfg.steps) {
            active.swap_remove(slot);
        }
        event_index += 1;
    }

    let heatmaps = robots
        .iter()
        .map(|r| snapshot_heatmap(&r.map, Some(r.id), r.timestep))
        .collect();
    let final_maps = robots.iter().map(|r| r.map.clone()).collect();
    Ok(RunResult {
        taskpoints: tracker.count,
        taskpoint_events: tracker.event_steps.clone(),
        comm,
        cellsteps,
        heatmaps,
        final_maps,
        comm_log,
    })
}

/// Synchronous baseline: one shared map, every robot stepped in id order
/// each global step against the pre-step concentrations, then a single
/// evaporation-plus-deposit update. Each robot-step is charged one full-map
/// download and one deposit-footprint upload.
fn run_centralized(cfg: &SimConfig, env: &Environment) -> Result<RunResult, SimError> {
    let (mut placement_rng, _scheduler, mut streams) = rng_streams(cfg.seed, cfg.robots);
    let placement = initial_placement(env, cfg.robots, &mut placement_rng)?;
    let mut robots = build_robots(cfg, env, &placement);
    let dynamics: DynamicsParams = cfg.dynamics();
    let geom = GeomTables::new(&cfg.radii(), &dynamics.deposition, dynamics.falloff);

    let mut shared = PheromoneMap::new(env, cfg.psi_max);
    let mut tracker = TaskPointTracker::new(env);
    let mut cellsteps = CellstepsGrid::new(env);
    let mut comm = CommCounters::default();

    let psi_max = dynamics.deposition.psi_max;
    let map_cells = (env.width() * env.height()) as u64;
    let download_bytes = dynamics.cost.header_bytes + dynamics.cost.per_cell_bytes * map_cells;

    let mut deposits: Vec<(CellCoord, f64)> = Vec::new();
    for step in 0..cfg.steps {
        deposits.clear();
        let mut visits = BTreeSet::new();
        for id in 0..robots.len() {
            let robot = &robots[id];
            let candidates =
                candidate_set_offsets(env, &shared, robot.pos, robot.heading, &geom.ring_v);
            let target = choose_target(robot.strategy, &robot.params, &candidates, &mut streams[id])
                .expect("candidate set is never empty");

            // deposits are buffered against the pre-step map and applied
            // together after the whole round
            let mut footprint: u64 = 0;
            for &(dr, dc, factor) in &geom.disc_d {
                let row = robot.pos.row as i64 + dr as i64;
                let col = robot.pos.col as i64 + dc as i64;
                if env.in_bounds(row, col) {
                    let cell = CellCoord::new(row as usize, col as usize);
                    if env.is_free(cell) {
                        deposits.push((cell, (psi_max - shared.psi(cell)) * factor));
                        footprint += 1;
                    }
                }
            }

            let path = path_cells(robot.pos, target);
            cellsteps.record(&path)?;
            let robot = &mut robots[id];
            if target != robot.pos {
                robot.heading = travel_angle(robot.pos, target);
                robot.pos = target;
            }
            robot.timestep += 1;
            for &cell in &path {
                if let Some(label) = env.room(cell) {
                    visits.insert(label);
                }
            }
            if let Some(label) = env.room(robot.pos) {
                visits.insert(label);
            }

            // one map download plus one deposit upload per robot-step
            let upload_bytes =
                dynamics.cost.header_bytes + dynamics.cost.per_cell_bytes * footprint;
            comm.transmissions += 2;
            comm.transmissions_heard += 2;
            comm.bytes_disseminated += download_bytes + upload_bytes;
        }
        shared.step_update(cfg.beta, &deposits)?;
        let occupied = occupied_rooms(env, &robots);
        tracker.update(&visits, &occupied, step);
    }

    let heatmaps = vec![snapshot_heatmap(&shared, None, cfg.steps)];
    let final_maps = vec![shared];
    Ok(RunResult {
        taskpoints: tracker.count,
        taskpoint_events: tracker.event_steps.clone(),
        comm,
        cellsteps,
        heatmaps,
        final_maps,
        comm_log: None,
    })
}

/// One sweep replica's scalar results.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub r_t: f64,
    pub seed: u64,
    pub taskpoints: u64,
    pub transmissions: u64,
    pub transmissions_heard: u64,
    pub total_bytes: u64,
}

/// Runs every (radius, seed) pair of a sweep, in (radius, seed) order.
/// Replicas share nothing, so the parallel path returns exactly the
/// sequential table.
pub fn batch(
    cfg: &SimConfig,
    env: &Environment,
    radii: &[f64],
    seeds: &[u64],
    parallel: bool,
) -> Result<Vec<SweepPoint>, SimError> {
    let jobs: Vec<(f64, u64)> = radii
        .iter()
        .flat_map(|&r_t| seeds.iter().map(move |&seed| (r_t, seed)))
        .collect();
    let run_one = |&(r_t, seed): &(f64, u64)| -> Result<SweepPoint, SimError> {
        let mut replica = cfg.clone();
        replica.r_t = r_t;
        replica.seed = seed;
        replica.comm_log = false;
        let result = run_on(&replica, env)?;
        Ok(SweepPoint {
            r_t,
            seed,
            taskpoints: result.taskpoints,
            transmissions: result.comm.transmissions,
            transmissions_heard: result.comm.transmissions_heard,
            total_bytes: result.comm.total_bytes(),
        })
    };
    if parallel {
        jobs.par_iter().map(run_one).collect()
    } else {
        jobs.iter().map(run_one).collect()
    }
}
