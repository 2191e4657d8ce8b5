//! Movement policies: build the set of reachable candidate cells on the
//! vision ring, then pick a target with one of five strategies ranging from
//! uniform random to pheromone-repelled choices with elitist and inertial
//! weighting.

use rand::Rng;
use thiserror::Error;

use crate::env::{ring_offsets, CellCoord, Environment};
use crate::pheromone::PheromoneMap;

/// Weight floor so fully saturated cells keep a nonzero pick probability.
pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StrategyKind {
    /// Uniform over candidates.
    Random,
    /// Lowest concentration wins; ties broken by smallest turn, then
    /// row-major. Consumes no randomness.
    Deterministic,
    /// Weight proportional to remaining headroom plus epsilon.
    SimpleProb,
    /// SimpleProb with the lowest-concentration fraction `mu` doubled.
    ElitistProb,
    /// ElitistProb with the straightest-ahead candidate boosted by
    /// `1 + nu * n`.
    InertialProb,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrategyParams {
    /// Elite fraction for ElitistProb, in (0, 1].
    pub mu: f64,
    /// Inertia gain for InertialProb, in (0, 1].
    pub nu: f64,
    /// Additive weight floor.
    pub epsilon: f64,
    /// Saturation level the headroom is measured against.
    pub psi_max: f64,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            mu: 0.3,
            nu: 0.3,
            epsilon: DEFAULT_EPSILON,
            psi_max: 100.0,
        }
    }
}

/// A reachable target cell with the concentration the robot reads for it and
/// its bearing relative to the robot's heading, in (-pi, pi].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub cell: CellCoord,
    pub psi: f64,
    pub bearing: f64,
}

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("no candidates to choose from")]
    NoCandidates,
}

/// Absolute angle of the direction `from -> to`, atan2 over (d_row, d_col).
pub fn travel_angle(from: CellCoord, to: CellCoord) -> f64 {
    let dy = to.row as f64 - from.row as f64;
    let dx = to.col as f64 - from.col as f64;
    dy.atan2(dx)
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut a = a % tau;
    if a > std::f64::consts::PI {
        a -= tau;
    } else if a <= -std::f64::consts::PI {
        a += tau;
    }
    a
}

/// Candidate targets for a robot at `pos` looking `r_v` cells ahead: free
/// ring cells with a clear line of sight. Falls back to the radius-1 ring
/// when the full ring is unreachable, and to staying in place when even that
/// is empty.
pub fn candidate_set(
    env: &Environment,
    map: &PheromoneMap,
    pos: CellCoord,
    heading: f64,
    r_v: f64,
) -> Vec<Candidate> {
    candidate_set_offsets(env, map, pos, heading, &ring_offsets(r_v))
}

/// `candidate_set` with a precomputed vision-ring offset table.
pub fn candidate_set_offsets(
    env: &Environment,
    map: &PheromoneMap,
    pos: CellCoord,
    heading: f64,
    ring: &[(i32, i32)],
) -> Vec<Candidate> {
    let visible = |cells: Vec<CellCoord>| -> Vec<Candidate> {
        cells
            .into_iter()
            .filter(|&c| env.line_clear(pos, c))
            .map(|cell| Candidate {
                cell,
                psi: map.psi(cell),
                bearing: wrap_angle(travel_angle(pos, cell) - heading),
            })
            .collect()
    };
    let out = visible(env.ring_cells(pos, ring));
    if !out.is_empty() {
        return out;
    }
    let out = visible(env.cells_on_circumference(pos, 1.0));
    if !out.is_empty() {
        return out;
    }
    vec![Candidate {
        cell: pos,
        psi: map.psi(pos),
        bearing: 0.0,
    }]
}

/// Picks the movement target from a non-empty candidate list.
pub fn choose_target(
    kind: StrategyKind,
    params: &StrategyParams,
    candidates: &[Candidate],
    rng: &mut impl Rng,
) -> Result<CellCoord, StrategyError> {
    if candidates.is_empty() {
        return Err(StrategyError::NoCandidates);
    }
    match kind {
        StrategyKind::Deterministic => {
            let best = candidates
                .iter()
                .min_by(|a, b| {
                    a.psi
                        .total_cmp(&b.psi)
                        .then(a.bearing.abs().total_cmp(&b.bearing.abs()))
                        .then(a.cell.cmp(&b.cell))
                })
                .expect("non-empty");
            Ok(best.cell)
        }
        StrategyKind::Random => {
            let idx = rng.random_range(0..candidates.len());
            Ok(candidates[idx].cell)
        }
        StrategyKind::SimpleProb | StrategyKind::ElitistProb | StrategyKind::InertialProb => {
            let weights = candidate_weights(kind, params, candidates);
            Ok(candidates[weighted_draw(&weights, rng)].cell)
        }
    }
}

/// Draw weights for the probabilistic strategies, in candidate order.
pub fn candidate_weights(
    kind: StrategyKind,
    params: &StrategyParams,
    candidates: &[Candidate],
) -> Vec<f64> {
    let n = candidates.len();
    let mut weights: Vec<f64> = candidates
        .iter()
        .map(|c| (params.psi_max - c.psi) + params.epsilon)
        .collect();
    if matches!(kind, StrategyKind::ElitistProb | StrategyKind::InertialProb) {
        let elite = (params.mu * n as f64).ceil() as usize;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            candidates[a]
                .psi
                .total_cmp(&candidates[b].psi)
                .then(
                    candidates[a]
                        .bearing
                        .abs()
                        .total_cmp(&candidates[b].bearing.abs()),
                )
                .then(candidates[a].cell.cmp(&candidates[b].cell))
        });
        for &i in order.iter().take(elite.min(n)) {
            weights[i] *= 2.0;
        }
    }
    if kind == StrategyKind::InertialProb {
        let forward = (0..n)
            .min_by(|&a, &b| {
                candidates[a]
                    .bearing
                    .abs()
                    .total_cmp(&candidates[b].bearing.abs())
                    .then(candidates[a].cell.cmp(&candidates[b].cell))
            })
            .expect("non-empty");
        weights[forward] *= 1.0 + params.nu * n as f64;
    }
    weights
}

fn weighted_draw(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let x = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if x < acc {
            return i;
        }
    }
    weights.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cand(row: usize, col: usize, psi: f64, bearing: f64) -> Candidate {
        Candidate {
            cell: CellCoord::new(row, col),
            psi,
            bearing,
        }
    }

    #[test]
    fn deterministic_picks_lowest_concentration() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cands = vec![
            cand(1, 1, 5.0, 0.1),
            cand(1, 2, 2.0, 1.0),
            cand(1, 3, 7.0, 0.0),
        ];
        let c = choose_target(
            StrategyKind::Deterministic,
            &StrategyParams::default(),
            &cands,
            &mut rng,
        )
        .unwrap();
        assert_eq!(c, CellCoord::new(1, 2));
    }

    #[test]
    fn deterministic_breaks_psi_ties_by_bearing_then_row_major() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let params = StrategyParams::default();
        let cands = vec![
            cand(2, 1, 2.0, 0.8),
            cand(1, 4, 2.0, -0.2),
            cand(3, 3, 2.0, 0.2),
        ];
        let c = choose_target(StrategyKind::Deterministic, &params, &cands, &mut rng).unwrap();
        // |bearing| ties at 0.2; row-major picks (1, 4)
        assert_eq!(c, CellCoord::new(1, 4));
    }

    #[test]
    fn deterministic_consumes_no_randomness() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        let cands = vec![cand(1, 1, 1.0, 0.0), cand(1, 2, 2.0, 0.5)];
        choose_target(
            StrategyKind::Deterministic,
            &StrategyParams::default(),
            &cands,
            &mut a,
        )
        .unwrap();
        assert_eq!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn deterministic_is_invariant_to_uniform_concentration_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let params = StrategyParams::default();
        let cands = vec![
            cand(1, 1, 5.0, 0.4),
            cand(2, 2, 3.0, 1.2),
            cand(3, 1, 9.0, -0.3),
        ];
        let shifted: Vec<Candidate> = cands
            .iter()
            .map(|c| Candidate { psi: c.psi + 17.5, ..*c })
            .collect();
        let a = choose_target(StrategyKind::Deterministic, &params, &cands, &mut rng).unwrap();
        let b = choose_target(StrategyKind::Deterministic, &params, &shifted, &mut rng).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_candidate_list_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = choose_target(
            StrategyKind::Random,
            &StrategyParams::default(),
            &[],
            &mut rng,
        );
        assert!(matches!(err, Err(StrategyError::NoCandidates)));
    }

    #[test]
    fn elitist_doubles_the_mu_fraction() {
        let params = StrategyParams {
            mu: 0.3,
            ..StrategyParams::default()
        };
        let cands: Vec<Candidate> = (0..10)
            .map(|i| cand(1, i + 1, i as f64 * 10.0, 0.1 * i as f64))
            .collect();
        let simple = candidate_weights(StrategyKind::SimpleProb, &params, &cands);
        let elitist = candidate_weights(StrategyKind::ElitistProb, &params, &cands);
        // ceil(0.3 * 10) = 3 lowest-psi candidates get doubled
        for i in 0..10 {
            let factor = if i < 3 { 2.0 } else { 1.0 };
            assert_eq!(elitist[i], simple[i] * factor);
        }
    }

    #[test]
    fn inertial_boosts_the_forward_candidate() {
        let params = StrategyParams {
            nu: 0.3,
            ..StrategyParams::default()
        };
        let cands: Vec<Candidate> = (0..10)
            .map(|i| cand(1, i + 1, 50.0, -1.5 + 0.35 * i as f64))
            .collect();
        let elitist = candidate_weights(StrategyKind::ElitistProb, &params, &cands);
        let inertial = candidate_weights(StrategyKind::InertialProb, &params, &cands);
        // bearing closest to zero is at index 4 (-0.1); boost is 1 + 0.3*10 = 4
        for i in 0..10 {
            let factor = if i == 4 { 4.0 } else { 1.0 };
            assert_eq!(inertial[i], elitist[i] * factor);
        }
    }

    #[test]
    fn probabilistic_choices_stay_within_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let params = StrategyParams::default();
        let cands = vec![
            cand(1, 1, 0.0, 0.0),
            cand(1, 2, 100.0, 0.3),
            cand(2, 1, 55.0, -0.3),
        ];
        for kind in [
            StrategyKind::Random,
            StrategyKind::SimpleProb,
            StrategyKind::ElitistProb,
            StrategyKind::InertialProb,
        ] {
            for _ in 0..200 {
                let c = choose_target(kind, &params, &cands, &mut rng).unwrap();
                assert!(cands.iter().any(|x| x.cell == c));
            }
        }
    }

    #[test]
    fn saturated_candidates_keep_nonzero_weight() {
        let params = StrategyParams::default();
        let cands = vec![cand(1, 1, 100.0, 0.0), cand(1, 2, 100.0, 0.4)];
        let w = candidate_weights(StrategyKind::SimpleProb, &params, &cands);
        assert!(w.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn wrap_angle_stays_in_half_open_interval() {
        for k in -8..=8 {
            let a = wrap_angle(0.7 + k as f64 * std::f64::consts::TAU);
            assert!(a > -std::f64::consts::PI && a <= std::f64::consts::PI);
            approx::assert_relative_eq!(a, 0.7, max_relative = 1e-9);
        }
        assert!(wrap_angle(std::f64::consts::PI + 0.1) < 0.0);
    }
}
