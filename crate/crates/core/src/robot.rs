//! Robot control loop. Each cycle runs the full state sequence: read the
//! vision ring, choose a target, deposit around the current position,
//! evaporate the local map, move, optionally broadcast, and drain the inbox.
//! One cycle advances the robot's local clock by one timestep.

use rand::Rng;

use crate::env::{path_cells, CellCoord, Environment};
use crate::pheromone::{DepositionParams, PheromoneMap};
use crate::strategy::{
    candidate_set_offsets, choose_target, travel_angle, StrategyKind, StrategyParams,
};
use crate::vibit::{aggregate, build_message_offsets, AggregateOutcome, CostModel, Message, PeerHistory};

/// Vision, deposition, and transmission radii, in cells. Deposition must
/// reach at least as far as vision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Radii {
    pub r_v: f64,
    pub r_d: f64,
    pub r_t: f64,
}

/// How deposits fall off with distance from the robot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DepositFalloff {
    /// Exponential decay with the cell's distance.
    Distance,
    /// Full-strength deposit on every cell of the disc.
    Flat,
}

/// Run-constant dynamics shared by all robots.
#[derive(Clone, Copy, Debug)]
pub struct DynamicsParams {
    pub beta: f64,
    pub deposition: DepositionParams,
    pub falloff: DepositFalloff,
    /// Broadcast period in cycles; 1 broadcasts every cycle.
    pub g_d: u64,
    pub cost: CostModel,
}

/// Offset tables derived from the radii once per run.
#[derive(Clone, Debug)]
pub struct GeomTables {
    /// Vision ring offsets.
    pub ring_v: Vec<(i32, i32)>,
    /// Deposit disc offsets with the falloff factor baked in.
    pub disc_d: Vec<(i32, i32, f64)>,
    /// Transmission disc offsets.
    pub disc_t: Vec<(i32, i32, f64)>,
}

impl GeomTables {
    pub fn new(radii: &Radii, deposition: &DepositionParams, falloff: DepositFalloff) -> Self {
        let disc_d = crate::env::disc_offsets(radii.r_d)
            .into_iter()
            .map(|(dr, dc, d)| {
                let factor = match falloff {
                    DepositFalloff::Distance => deposition.falloff_factor(d),
                    DepositFalloff::Flat => deposition.falloff_factor(0.0),
                };
                (dr, dc, factor)
            })
            .collect();
        GeomTables {
            ring_v: crate::env::ring_offsets(radii.r_v),
            disc_d,
            disc_t: crate::env::disc_offsets(radii.r_t),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Robot {
    pub id: usize,
    pub pos: CellCoord,
    /// Direction of the last travel, radians in (-pi, pi].
    pub heading: f64,
    /// Local clock: completed cycles.
    pub timestep: u64,
    pub strategy: StrategyKind,
    pub params: StrategyParams,
    pub radii: Radii,
    pub map: PheromoneMap,
    pub history: PeerHistory,
    pub inbox: Vec<Message>,
}

impl Robot {
    pub fn new(
        id: usize,
        pos: CellCoord,
        heading: f64,
        strategy: StrategyKind,
        params: StrategyParams,
        radii: Radii,
        env: &Environment,
    ) -> Self {
        Robot {
            id,
            pos,
            heading,
            timestep: 0,
            strategy,
            params,
            radii,
            map: PheromoneMap::new(env, params.psi_max),
            history: PeerHistory::new(),
            inbox: Vec::new(),
        }
    }
}

/// True once the robot's local clock has reached the horizon.
pub fn should_terminate(robot: &Robot, horizon: u64) -> bool {
    robot.timestep >= horizon
}

/// Everything one cycle produced that the caller has to act on.
#[derive(Clone, Debug)]
pub struct CycleOutput {
    /// Cells traversed this cycle, origin excluded, target included.
    pub path: Vec<CellCoord>,
    /// Broadcast to deliver, when this cycle was a dissemination cycle.
    pub message: Option<Message>,
    /// Results of draining the inbox, in arrival order.
    pub aggregations: Vec<AggregateOutcome>,
}

/// Runs one full cycle for a robot that has not terminated.
pub fn fsm_cycle(
    robot: &mut Robot,
    env: &Environment,
    geom: &GeomTables,
    dynamics: &DynamicsParams,
    rng: &mut impl Rng,
) -> CycleOutput {
    // perception and choice
    let candidates =
        candidate_set_offsets(env, &robot.map, robot.pos, robot.heading, &geom.ring_v);
    let target = choose_target(robot.strategy, &robot.params, &candidates, rng)
        .expect("candidate set is never empty");

    // deposit around the current position, then evaporate: deposits are
    // computed from pre-evaporation concentrations
    let psi_max = dynamics.deposition.psi_max;
    let mut deposits = Vec::with_capacity(geom.disc_d.len());
    for &(dr, dc, factor) in &geom.disc_d {
        let row = robot.pos.row as i64 + dr as i64;
        let col = robot.pos.col as i64 + dc as i64;
        if env.in_bounds(row, col) {
            let cell = CellCoord::new(row as usize, col as usize);
            if env.is_free(cell) {
                deposits.push((cell, (psi_max - robot.map.psi(cell)) * factor));
            }
        }
    }
    robot
        .map
        .step_update(dynamics.beta, &deposits)
        .expect("deposits are valid by construction");

    // movement: teleport to the target, face the direction of travel
    let path = path_cells(robot.pos, target);
    if target != robot.pos {
        robot.heading = travel_angle(robot.pos, target);
        robot.pos = target;
    }

    // periodic broadcast from the new position
    let message = if robot.timestep % dynamics.g_d == 0 {
        Some(build_message_offsets(robot, env, &geom.disc_t))
    } else {
        None
    };

    // drain the inbox in arrival order
    let pending: Vec<Message> = robot.inbox.drain(..).collect();
    let aggregations = pending
        .iter()
        .map(|msg| aggregate(robot, msg, &dynamics.cost))
        .collect();

    robot.timestep += 1;
    CycleOutput {
        path,
        message,
        aggregations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn open_env(n: usize) -> Environment {
        let mut text = String::new();
        for row in 0..n {
            for col in 0..n {
                let border = row == 0 || row == n - 1 || col == 0 || col == n - 1;
                text.push(if border { '#' } else { 'A' });
            }
            text.push('\n');
        }
        Environment::parse(&text).unwrap()
    }

    fn test_setup(r_t: f64) -> (Environment, GeomTables, DynamicsParams) {
        let radii = Radii {
            r_v: 2.0,
            r_d: 2.0,
            r_t,
        };
        let deposition = DepositionParams::default();
        let dynamics = DynamicsParams {
            beta: 0.005,
            deposition,
            falloff: DepositFalloff::Distance,
            g_d: 1,
            cost: CostModel::default(),
        };
        let env = open_env(15);
        let geom = GeomTables::new(&radii, &deposition, dynamics.falloff);
        (env, geom, dynamics)
    }

    fn make_robot(id: usize, row: usize, col: usize, env: &Environment, r_t: f64) -> Robot {
        Robot::new(
            id,
            CellCoord::new(row, col),
            0.0,
            StrategyKind::Deterministic,
            StrategyParams::default(),
            Radii {
                r_v: 2.0,
                r_d: 2.0,
                r_t,
            },
            env,
        )
    }

    #[test]
    fn cycle_advances_clock_and_stays_on_free_cells() {
        let (env, geom, dynamics) = test_setup(5.0);
        let mut robot = make_robot(0, 7, 7, &env, 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in 0..20 {
            assert_eq!(robot.timestep, t);
            let out = fsm_cycle(&mut robot, &env, &geom, &dynamics, &mut rng);
            assert!(env.is_free(robot.pos));
            for c in &out.path {
                assert!(env.is_free(*c));
            }
            assert_eq!(out.path.last().copied(), Some(robot.pos));
        }
        assert!(!should_terminate(&robot, 10_000));
        assert!(should_terminate(&robot, 20));
        assert!(should_terminate(&robot, 19));
    }

    #[test]
    fn cycle_deposits_around_previous_position() {
        let (env, geom, dynamics) = test_setup(5.0);
        let mut robot = make_robot(0, 7, 7, &env, 5.0);
        let start = robot.pos;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        fsm_cycle(&mut robot, &env, &geom, &dynamics, &mut rng);
        assert!(robot.map.psi(start) > 0.0);
        // the deposit at distance zero is alpha * psi_max
        approx::assert_relative_eq!(robot.map.psi(start), 50.0, max_relative = 1e-12);
        assert_ne!(robot.pos, start);
    }

    #[test]
    fn broadcast_follows_the_period() {
        let (env, geom, mut dynamics) = test_setup(5.0);
        dynamics.g_d = 3;
        let mut robot = make_robot(0, 7, 7, &env, 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut sent = Vec::new();
        for t in 0..9u64 {
            let out = fsm_cycle(&mut robot, &env, &geom, &dynamics, &mut rng);
            if out.message.is_some() {
                sent.push(t);
            }
        }
        assert_eq!(sent, vec![0, 3, 6]);
    }

    #[test]
    fn message_timesteps_strictly_increase() {
        let (env, geom, dynamics) = test_setup(5.0);
        let mut robot = make_robot(0, 7, 7, &env, 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut last = None;
        for _ in 0..5 {
            let out = fsm_cycle(&mut robot, &env, &geom, &dynamics, &mut rng);
            let t = out.message.expect("g_d = 1 broadcasts every cycle").sender_timestep;
            if let Some(prev) = last {
                assert!(t > prev);
            }
            last = Some(t);
        }
    }

    #[test]
    fn aggregation_matches_max_merge_of_dynamics_only_clone() {
        // Run B once with a pending message and once without; the two runs
        // must differ exactly by a max-merge of the message payload.
        let (env, geom, dynamics) = test_setup(8.0);
        let mut a = make_robot(0, 4, 4, &env, 8.0);
        let mut b = make_robot(1, 4, 8, &env, 8.0);
        let mut rng_a = ChaCha8Rng::seed_from_u64(10);
        let mut rng_b = ChaCha8Rng::seed_from_u64(11);

        // a few independent cycles so both maps hold structure
        for _ in 0..3 {
            fsm_cycle(&mut a, &env, &geom, &dynamics, &mut rng_a);
            fsm_cycle(&mut b, &env, &geom, &dynamics, &mut rng_b);
        }
        let out_a = fsm_cycle(&mut a, &env, &geom, &dynamics, &mut rng_a);
        let msg = out_a.message.unwrap();

        let mut b_with = b.clone();
        b_with.inbox.push(msg.clone());
        let mut rng_with = rng_b.clone();
        let out = fsm_cycle(&mut b_with, &env, &geom, &dynamics, &mut rng_with);
        assert!(matches!(
            out.aggregations.as_slice(),
            [AggregateOutcome::Accepted { .. }]
        ));
        fsm_cycle(&mut b, &env, &geom, &dynamics, &mut rng_b);

        for row in 0..env.height() {
            for col in 0..env.width() {
                let c = CellCoord::new(row, col);
                let sent = msg.payload.iter().find(|(pc, _)| *pc == c).map(|(_, v)| *v);
                let expect = match sent {
                    Some(v) => b.map.psi(c).max(v),
                    None => b.map.psi(c),
                };
                assert_eq!(b_with.map.psi(c), expect);
            }
        }
    }
}
