//! Packet trajectories and the solution file format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Instance, NodeId, Time};

/// One movement along a base arc. Holdovers between moves are implicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub arc: usize,
    pub depart: Time,
    /// Arrival time at the head; equals `depart + transit` in the full network
    /// and may be earlier in a partially expanded one.
    pub arrive: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub commodity: usize,
    pub moves: Vec<Move>,
}

impl Trajectory {
    /// Arrival time of the last move, or 0 for an empty trajectory.
    pub fn arrival(&self) -> Time {
        self.moves.last().map_or(0, |m| m.arrive)
    }

    /// Base arcs used, in order.
    pub fn arcs(&self) -> impl Iterator<Item = usize> + '_ {
        self.moves.iter().map(|m| m.arc)
    }
}

/// One trajectory per packet, indexed by commodity position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub horizon: Time,
    pub trajectories: Vec<Trajectory>,
}

impl Schedule {
    /// Latest arrival over all moves.
    pub fn makespan(&self) -> Time {
        self.trajectories.iter().flat_map(|t| t.moves.iter()).map(|m| m.arrive).max().unwrap_or(0)
    }

    /// Latest `depart + transit` over all moves; the value the timing rows of the
    /// lower-bound model charge for a trajectory.
    pub fn true_makespan(&self, inst: &Instance) -> Time {
        self.trajectories
            .iter()
            .flat_map(|t| t.moves.iter())
            .map(|m| m.depart + inst.arcs[m.arc].transit)
            .max()
            .unwrap_or(0)
    }

    pub fn to_file(&self, inst: &Instance) -> SolutionFile {
        let paths = self
            .trajectories
            .iter()
            .map(|tr| {
                let c = &inst.commodities[tr.commodity];
                let mut visits = Vec::with_capacity(tr.moves.len() + 1);
                let first_depart = tr.moves.first().map_or(0, |m| m.depart);
                visits.push(Visit { node: c.origin, arrival: 0, departure: Some(first_depart), via_arc: None });
                for (i, m) in tr.moves.iter().enumerate() {
                    let head = inst.arcs[m.arc].head;
                    let departure = tr.moves.get(i + 1).map(|n| n.depart);
                    visits.push(Visit { node: head, arrival: m.arrive, departure, via_arc: Some(m.arc) });
                }
                PathRecord { commodity: c.id, visits }
            })
            .collect();
        SolutionFile { horizon: self.horizon, makespan: self.makespan(), paths }
    }

    pub fn from_file(inst: &Instance, file: &SolutionFile) -> Result<Schedule> {
        let mut trajectories = Vec::with_capacity(file.paths.len());
        for p in &file.paths {
            let k = inst
                .commodities
                .iter()
                .position(|c| c.id == p.commodity)
                .ok_or_else(|| Error::MalformedSchedule(format!("unknown commodity {}", p.commodity)))?;
            let mut moves = Vec::new();
            for w in p.visits.windows(2) {
                let (from, to) = (&w[0], &w[1]);
                let depart = from.departure.ok_or_else(|| {
                    Error::MalformedSchedule(format!("commodity {}: visit without departure", p.commodity))
                })?;
                let arc = match to.via_arc {
                    Some(a) if a < inst.arcs.len() => a,
                    Some(a) => return Err(Error::MalformedSchedule(format!("unknown arc {a}"))),
                    None => inst
                        .arcs
                        .iter()
                        .position(|a| a.tail == from.node && a.head == to.node)
                        .ok_or_else(|| {
                            Error::MalformedSchedule(format!("no arc {} -> {}", from.node, to.node))
                        })?,
                };
                moves.push(Move { arc, depart, arrive: to.arrival });
            }
            trajectories.push(Trajectory { commodity: k, moves });
        }
        trajectories.sort_by_key(|t| t.commodity);
        Ok(Schedule { horizon: file.horizon, trajectories })
    }
}

/// Solution file: per packet, the ordered list of visited nodes with arrival
/// and departure times.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub horizon: Time,
    pub makespan: Time,
    pub paths: Vec<PathRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathRecord {
    pub commodity: usize,
    pub visits: Vec<Visit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Visit {
    pub node: NodeId,
    pub arrival: Time,
    /// Absent on the final visit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub departure: Option<Time>,
    /// Arc used to reach this node; absent on the origin visit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub via_arc: Option<usize>,
}

impl SolutionFile {
    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::InstanceBuilder;

    #[test]
    fn file_round_trip() {
        let inst = InstanceBuilder::new(6)
            .nodes(&[0, 1, 0])
            .arc(0, 1, 1, 1)
            .arc(1, 2, 2, 1)
            .arc(0, 1, 3, 1)
            .packet(0, 2)
            .packet(0, 2)
            .build();
        let s = Schedule {
            horizon: 6,
            trajectories: vec![
                Trajectory { commodity: 0, moves: vec![Move { arc: 0, depart: 0, arrive: 1 }, Move { arc: 1, depart: 2, arrive: 4 }] },
                Trajectory { commodity: 1, moves: vec![Move { arc: 2, depart: 0, arrive: 3 }, Move { arc: 1, depart: 3, arrive: 5 }] },
            ],
        };
        let f = s.to_file(&inst);
        assert_eq!(f.makespan, 5);
        assert_eq!(f.paths[0].visits[1].departure, Some(2));
        let json = serde_json::to_string(&f).unwrap();
        let back: SolutionFile = serde_json::from_str(&json).unwrap();
        assert_eq!(Schedule::from_file(&inst, &back).unwrap(), s);
    }
}
