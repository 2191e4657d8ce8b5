//! Property tests for the merge semilattice, aggregation replay safety,
//! strategy membership, and wall avoidance under randomized environments.

use pherocom_core::config::{Mode, SimConfig, StrategySpec};
use pherocom_core::engine::run_on;
use pherocom_core::env::{CellCoord, Environment};
use pherocom_core::pheromone::merge_cell;
use pherocom_core::robot::{Radii, Robot};
use pherocom_core::strategy::{choose_target, Candidate, StrategyKind, StrategyParams};
use pherocom_core::vibit::{aggregate, AggregateOutcome, CostModel, Message};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4000))]

    #[test]
    fn merge_is_idempotent(a in 0.0..=100.0f64) {
        prop_assert_eq!(merge_cell(a, a), a);
    }

    #[test]
    fn merge_commutes(a in 0.0..=100.0f64, b in 0.0..=100.0f64) {
        prop_assert_eq!(merge_cell(a, b), merge_cell(b, a));
    }

    #[test]
    fn merge_associates(a in 0.0..=100.0f64, b in 0.0..=100.0f64, c in 0.0..=100.0f64) {
        prop_assert_eq!(
            merge_cell(merge_cell(a, b), c),
            merge_cell(a, merge_cell(b, c))
        );
    }

    #[test]
    fn merge_picks_one_of_its_arguments_and_never_decreases(
        a in 0.0..=100.0f64,
        b in 0.0..=100.0f64,
    ) {
        let m = merge_cell(a, b);
        prop_assert!(m == a || m == b);
        prop_assert!(m >= a && m >= b);
    }
}

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

fn receiver(env: &Environment) -> Robot {
    Robot::new(
        1,
        CellCoord::new(1, 1),
        0.0,
        StrategyKind::Deterministic,
        StrategyParams::default(),
        Radii {
            r_v: 1.0,
            r_d: 1.0,
            r_t: 50.0,
        },
        env,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn replaying_an_aggregated_message_changes_nothing(
        values in prop::collection::vec(0.0..=100.0f64, 1..30),
        offset in 0usize..100,
    ) {
        let env = open_env(12);
        let mut robot = receiver(&env);
        let free = env.free_cells();
        let payload: Vec<(CellCoord, f64)> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (free[(offset + i) % free.len()], v))
            .collect();
        let msg = Message { sender_id: 0, sender_timestep: 4, payload };
        let cost = CostModel::default();

        let first = aggregate(&mut robot, &msg, &cost);
        let accepted = matches!(first, AggregateOutcome::Accepted { .. });
        prop_assert!(accepted, "first aggregation was {:?}", first);
        let after_first = robot.map.clone();
        let replay = aggregate(&mut robot, &msg, &cost);
        prop_assert_eq!(replay, AggregateOutcome::StaleRejected);
        prop_assert_eq!(&robot.map, &after_first);

        // an older timestep from the same sender is also ignored
        let older = Message { sender_id: 0, sender_timestep: 3, ..msg.clone() };
        prop_assert_eq!(
            aggregate(&mut robot, &older, &cost),
            AggregateOutcome::StaleRejected
        );
        prop_assert_eq!(&robot.map, &after_first);
    }
}

#[test]
fn malformed_messages_reject_whole_and_leave_no_trace() {
    let env = open_env(12);
    let mut robot = receiver(&env);
    let cost = CostModel::default();
    let wall = CellCoord::new(0, 0);
    let good_cell = CellCoord::new(2, 2);

    for bad_payload in [
        vec![(good_cell, 30.0), (wall, 10.0)],
        vec![(good_cell, 30.0), (CellCoord::new(500, 1), 10.0)],
        vec![(good_cell, 30.0), (CellCoord::new(3, 3), 100.5)],
        vec![(good_cell, 30.0), (CellCoord::new(3, 3), -0.1)],
        vec![(good_cell, 30.0), (CellCoord::new(3, 3), f64::NAN)],
    ] {
        let msg = Message {
            sender_id: 0,
            sender_timestep: 7,
            payload: bad_payload,
        };
        assert_eq!(
            aggregate(&mut robot, &msg, &cost),
            AggregateOutcome::MalformedRejected
        );
        // even the valid cells of a rejected message must not land
        assert_eq!(robot.map.psi(good_cell), 0.0);
    }

    // rejection must not advance the freshness record: the same timestep
    // from a clean message is still acceptable afterwards
    let clean = Message {
        sender_id: 0,
        sender_timestep: 7,
        payload: vec![(good_cell, 30.0)],
    };
    assert!(matches!(
        aggregate(&mut robot, &clean, &cost),
        AggregateOutcome::Accepted { .. }
    ));
    assert_eq!(robot.map.psi(good_cell), 30.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn every_strategy_picks_a_listed_candidate(
        raw in prop::collection::vec((0.0..=100.0f64, -3.14..=3.14f64), 1..15),
        draw_seed in any::<u64>(),
    ) {
        let candidates: Vec<Candidate> = raw
            .iter()
            .enumerate()
            .map(|(i, &(psi, bearing))| Candidate {
                cell: CellCoord::new(1 + i / 8, 1 + i % 8),
                psi,
                bearing,
            })
            .collect();
        let params = StrategyParams::default();
        let cells: Vec<CellCoord> = candidates.iter().map(|c| c.cell).collect();
        for kind in [
            StrategyKind::Random,
            StrategyKind::Deterministic,
            StrategyKind::SimpleProb,
            StrategyKind::ElitistProb,
            StrategyKind::InertialProb,
        ] {
            let mut rng = ChaCha8Rng::seed_from_u64(draw_seed);
            let chosen = choose_target(kind, &params, &candidates, &mut rng).unwrap();
            prop_assert!(cells.contains(&chosen), "{kind:?} chose {chosen:?}");
        }
    }
}

// Environments drawn here may be disconnected or nearly full of walls;
// robots must still never touch a wall, which the engine enforces by
// erroring out of cellstep recording if movement ever produced one.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn runs_on_random_environments_never_touch_walls(
        walls in prop::collection::vec(prop::bool::weighted(0.35), 64),
        seed in any::<u64>(),
        robots in 1usize..4,
        mode_centralized in any::<bool>(),
    ) {
        let mut text = String::new();
        for row in 0..10 {
            for col in 0..10 {
                let border = row == 0 || row == 9 || col == 0 || col == 9;
                let wall = border || walls[(row - 1).min(7) * 8 + (col - 1).min(7)];
                text.push(if wall { '#' } else { 'A' });
            }
            text.push('\n');
        }
        let env = match Environment::parse(&text) {
            Ok(env) => env,
            Err(_) => return Ok(()), // all-wall draw
        };
        prop_assume!(env.free_cells().len() >= robots);

        let mut cfg = SimConfig::default();
        cfg.robots = robots;
        cfg.steps = 40;
        cfg.seed = seed;
        cfg.r_v = 2.0;
        cfg.r_d = 2.0;
        cfg.r_t = 3.0;
        cfg.strategy = StrategySpec::Heterogeneous;
        cfg.mode = if mode_centralized { Mode::Centralized } else { Mode::Decentralized };
        let result = run_on(&cfg, &env).unwrap();

        for row in 0..10 {
            for col in 0..10 {
                let cell = CellCoord::new(row, col);
                if !env.is_free(cell) {
                    assert_eq!(result.cellsteps.count(cell), 0);
                    for map in &result.final_maps {
                        assert_eq!(map.psi(cell), 0.0);
                    }
                }
            }
        }
    }
}
