//! Map dissemination between robots: periodic local broadcasts of the
//! sender's nearby pheromone readings, received through per-sender freshness
//! checks and merged cell-wise by maximum. Transport is instantaneous and
//! unacknowledged; a sender never learns whether anyone listened.

use crate::env::{disc_offsets, CellCoord, Environment};
use crate::robot::Robot;

/// One broadcast: sender identity, the sender's local clock when it was
/// built, and the nonzero concentrations within the transmission radius of
/// the sender's position.
#[derive(Clone, Debug, PartialEq)]
pub struct Message {
    pub sender_id: usize,
    pub sender_timestep: u64,
    pub payload: Vec<(CellCoord, f64)>,
}

/// Latest accepted timestep per sender. A message is fresh only when its
/// timestep is strictly newer than the recorded one.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PeerHistory {
    latest: std::collections::BTreeMap<usize, u64>,
}

impl PeerHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn latest(&self, sender: usize) -> Option<u64> {
        self.latest.get(&sender).copied()
    }

    fn record(&mut self, sender: usize, timestep: u64) {
        self.latest.insert(sender, timestep);
    }
}

/// Byte accounting for messages: a fixed header plus a per-cell record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostModel {
    pub header_bytes: u64,
    pub per_cell_bytes: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        // 4-byte id + 8-byte timestep header; 2+2-byte coordinates and a
        // 4-byte concentration per cell
        CostModel {
            header_bytes: 12,
            per_cell_bytes: 8,
        }
    }
}

pub fn message_size(msg: &Message, cost: &CostModel) -> u64 {
    cost.header_bytes + cost.per_cell_bytes * msg.payload.len() as u64
}

/// Monotone communication counters for one run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CommCounters {
    /// Broadcasts sent, whether or not anyone was in range.
    pub transmissions: u64,
    /// Broadcasts that reached at least one recipient.
    pub transmissions_heard: u64,
    pub bytes_disseminated: u64,
    pub bytes_aggregated: u64,
    pub aggregations_accepted: u64,
    pub aggregations_rejected: u64,
}

impl CommCounters {
    pub fn total_bytes(&self) -> u64 {
        self.bytes_disseminated + self.bytes_aggregated
    }
}

/// True when two positions are within transmission range (closed comparison).
pub fn in_range(a: CellCoord, b: CellCoord, r_t: f64) -> bool {
    (a.dist2(b) as f64) <= r_t * r_t
}

/// Builds the robot's broadcast from its current position and map: every
/// free cell within `r_t` holding a nonzero concentration.
pub fn build_message(robot: &Robot, env: &Environment) -> Message {
    build_message_offsets(robot, env, &disc_offsets(robot.radii.r_t))
}

/// `build_message` with a precomputed transmission-disc offset table.
pub fn build_message_offsets(
    robot: &Robot,
    env: &Environment,
    disc: &[(i32, i32, f64)],
) -> Message {
    let mut payload = Vec::new();
    for &(dr, dc, _) in disc {
        let row = robot.pos.row as i64 + dr as i64;
        let col = robot.pos.col as i64 + dc as i64;
        if env.in_bounds(row, col) {
            let cell = CellCoord::new(row as usize, col as usize);
            if env.is_free(cell) {
                let psi = robot.map.psi(cell);
                if psi > 0.0 {
                    payload.push((cell, psi));
                }
            }
        }
    }
    Message {
        sender_id: robot.id,
        sender_timestep: robot.timestep,
        payload,
    }
}

/// Delivers a broadcast to every other robot in range of the sender's
/// position, appending to their inboxes. The transmission is counted even
/// when nobody is in range.
pub fn deliver(
    msg: &Message,
    sender_pos: CellCoord,
    robots: &mut [Robot],
    r_t: f64,
    counters: &mut CommCounters,
    cost: &CostModel,
) -> Vec<usize> {
    counters.transmissions += 1;
    counters.bytes_disseminated += message_size(msg, cost);
    let mut recipients = Vec::new();
    for robot in robots.iter_mut() {
        if robot.id != msg.sender_id && in_range(sender_pos, robot.pos, r_t) {
            robot.inbox.push(msg.clone());
            recipients.push(robot.id);
        }
    }
    if !recipients.is_empty() {
        counters.transmissions_heard += 1;
    }
    recipients
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AggregateOutcome {
    /// Message passed the freshness check; every payload cell was merged.
    Accepted { cells: usize, bytes: u64 },
    /// Sender timestep not newer than the recorded one.
    StaleRejected,
    /// A payload cell fell outside the grid, on a wall, or carried an
    /// invalid concentration; the whole message is dropped.
    MalformedRejected,
}

/// Applies one received message to the robot's map: reject stale or
/// malformed messages whole, otherwise max-merge every payload cell and
/// advance the sender's freshness record.
pub fn aggregate(robot: &mut Robot, msg: &Message, cost: &CostModel) -> AggregateOutcome {
    debug_assert_ne!(msg.sender_id, robot.id, "no self-aggregation");
    for &(cell, value) in &msg.payload {
        let inside = cell.row < robot.map.height() && cell.col < robot.map.width();
        if !inside
            || !robot.map.is_free(cell)
            || !value.is_finite()
            || value < 0.0
            || value > robot.map.psi_max()
        {
            return AggregateOutcome::MalformedRejected;
        }
    }
    if let Some(latest) = robot.history.latest(msg.sender_id) {
        if msg.sender_timestep <= latest {
            return AggregateOutcome::StaleRejected;
        }
    }
    for &(cell, value) in &msg.payload {
        robot.map.merge(cell, value);
    }
    robot.history.record(msg.sender_id, msg.sender_timestep);
    AggregateOutcome::Accepted {
        cells: msg.payload.len(),
        bytes: message_size(msg, cost),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn message_size_is_header_plus_per_cell() {
        let msg = Message {
            sender_id: 0,
            sender_timestep: 0,
            payload: vec![(CellCoord::new(1, 1), 1.0); 79],
        };
        assert_eq!(message_size(&msg, &CostModel::default()), 644);
        let empty = Message {
            sender_id: 0,
            sender_timestep: 0,
            payload: vec![],
        };
        assert_eq!(message_size(&empty, &CostModel::default()), 12);
    }

    #[test]
    fn in_range_is_a_closed_comparison() {
        let a = CellCoord::new(0, 0);
        assert!(in_range(a, CellCoord::new(5, 12), 13.0)); // exactly 13 away
        assert!(!in_range(a, CellCoord::new(5, 13), 13.0));
        assert!(in_range(a, a, 0.0));
        assert!(!in_range(a, CellCoord::new(0, 1), 0.0));
    }
}
