//! Base network, packets, and instance-level checks.
//!
//! An [`Instance`] is the flat digraph with integral transit times, arc
//! throughputs and node storage levels, together with the packet set and an
//! upper bound `horizon` on the optimal makespan. Every packet is released at
//! time 0 and must reach its destination by `horizon`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer time point.
pub type Time = u32;

/// Dense node index into [`Instance::nodes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    /// Maximum number of active packets held at this node at any time.
    pub storage: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcData {
    pub tail: NodeId,
    pub head: NodeId,
    pub transit: Time,
    /// Maximum number of packets departing along the arc at the same time.
    pub throughput: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commodity {
    pub id: usize,
    pub origin: NodeId,
    pub dest: NodeId,
}

/// Provenance block carried in instance files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default)]
    pub generator: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub nodes: Vec<Node>,
    pub arcs: Vec<ArcData>,
    pub commodities: Vec<Commodity>,
    pub horizon: Time,
    #[serde(default)]
    pub meta: Meta,
}

/// Structural problem found by [`Instance::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum InstanceViolation {
    NodeIdMismatch { position: usize, id: usize },
    UnknownNode { arc: usize, node: NodeId },
    SelfLoop { arc: usize },
    NonPositiveThroughput { arc: usize },
    UnknownEndpoint { commodity: usize, node: NodeId },
    OriginIsDestination { commodity: usize },
    DestinationUnreachable { commodity: usize },
    HorizonBelowShortestPath { commodity: usize, shortest: Time, horizon: Time },
    ZeroHorizon,
}

impl fmt::Display for InstanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NodeIdMismatch { position, id } => {
                write!(f, "node at position {position} has id {id}")
            }
            Self::UnknownNode { arc, node } => write!(f, "arc {arc} references unknown node {node}"),
            Self::SelfLoop { arc } => write!(f, "arc {arc} is a self loop"),
            Self::NonPositiveThroughput { arc } => write!(f, "arc {arc} has throughput 0"),
            Self::UnknownEndpoint { commodity, node } => {
                write!(f, "commodity {commodity} references unknown node {node}")
            }
            Self::OriginIsDestination { commodity } => {
                write!(f, "commodity {commodity} has origin equal to destination")
            }
            Self::DestinationUnreachable { commodity } => {
                write!(f, "destination unreachable for commodity {commodity}")
            }
            Self::HorizonBelowShortestPath { commodity, shortest, horizon } => write!(
                f,
                "horizon below shortest path for commodity {commodity} ({horizon} < {shortest})"
            ),
            Self::ZeroHorizon => write!(f, "horizon must be at least 1"),
        }
    }
}

/// Minimum transit time and, among the minimum-transit paths, the fewest arcs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathLength {
    pub transit: Time,
    pub hops: usize,
}

impl Instance {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn storage(&self, v: NodeId) -> u64 {
        self.nodes[v.0].storage
    }

    pub fn arc(&self, a: usize) -> &ArcData {
        &self.arcs[a]
    }

    /// Indices of arcs leaving each node, in arc order.
    pub fn out_arcs(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (i, a) in self.arcs.iter().enumerate() {
            out[a.tail.0].push(i);
        }
        out
    }

    /// Indices of arcs entering each node, in arc order.
    pub fn in_arcs(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.nodes.len()];
        for (i, a) in self.arcs.iter().enumerate() {
            inc[a.head.0].push(i);
        }
        inc
    }

    pub fn min_transit(&self) -> Option<Time> {
        self.arcs.iter().map(|a| a.transit).min()
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    /// All structural violations; an empty list means the instance is usable.
    ///
    /// The horizon check is only necessary for feasibility: whether the
    /// packets can actually be routed within `horizon` is decided by solving.
    pub fn validate(&self) -> Vec<InstanceViolation> {
        let mut out = Vec::new();
        let n = self.nodes.len();
        if self.horizon == 0 {
            out.push(InstanceViolation::ZeroHorizon);
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                out.push(InstanceViolation::NodeIdMismatch { position: i, id: node.id });
            }
        }
        let mut arcs_ok = true;
        for (i, a) in self.arcs.iter().enumerate() {
            for end in [a.tail, a.head] {
                if end.0 >= n {
                    out.push(InstanceViolation::UnknownNode { arc: i, node: end });
                    arcs_ok = false;
                }
            }
            if a.tail == a.head {
                out.push(InstanceViolation::SelfLoop { arc: i });
            }
            if a.throughput == 0 {
                out.push(InstanceViolation::NonPositiveThroughput { arc: i });
            }
        }
        for c in &self.commodities {
            let mut ends_ok = true;
            for end in [c.origin, c.dest] {
                if end.0 >= n {
                    out.push(InstanceViolation::UnknownEndpoint { commodity: c.id, node: end });
                    ends_ok = false;
                }
            }
            if !ends_ok || !arcs_ok {
                continue;
            }
            if c.origin == c.dest {
                out.push(InstanceViolation::OriginIsDestination { commodity: c.id });
                continue;
            }
            match self.shortest_transit(c.origin, c.dest) {
                None => out.push(InstanceViolation::DestinationUnreachable { commodity: c.id }),
                Some(p) if p.transit > self.horizon => {
                    out.push(InstanceViolation::HorizonBelowShortestPath {
                        commodity: c.id,
                        shortest: p.transit,
                        horizon: self.horizon,
                    })
                }
                Some(_) => {}
            }
        }
        out
    }

    /// Fails with every violation joined into one message.
    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            let msg: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            Err(Error::InvalidInstance(msg.join("; ")))
        }
    }

    /// Packets that count toward storage at `v`: those with neither endpoint at `v`.
    pub fn active_commodities(&self, v: NodeId) -> Result<BTreeSet<usize>> {
        if v.0 >= self.nodes.len() {
            return Err(Error::InvalidNode(v.0));
        }
        Ok(self
            .commodities
            .iter()
            .filter(|c| c.origin != v && c.dest != v)
            .map(|c| c.id)
            .collect())
    }

    /// Whether commodity at position `k` is active at `v`.
    #[inline]
    pub fn is_active(&self, k: usize, v: NodeId) -> bool {
        let c = &self.commodities[k];
        c.origin != v && c.dest != v
    }

    /// Minimum-transit path length from `s` to `t` (ties broken by hop count).
    pub fn shortest_transit(&self, s: NodeId, t: NodeId) -> Option<PathLength> {
        self.shortest_from(s)[t.0]
    }

    /// Single-source version of [`Instance::shortest_transit`].
    pub fn shortest_from(&self, s: NodeId) -> Vec<Option<PathLength>> {
        let out = self.out_arcs();
        let mut best: Vec<Option<(Time, usize)>> = vec![None; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        best[s.0] = Some((0, 0));
        heap.push(Reverse((0 as Time, 0usize, s.0)));
        while let Some(Reverse((d, h, v))) = heap.pop() {
            if best[v] != Some((d, h)) {
                continue;
            }
            for &ai in &out[v] {
                let a = &self.arcs[ai];
                let cand = (d + a.transit, h + 1);
                let w = a.head.0;
                if best[w].is_none_or(|b| cand < b) {
                    best[w] = Some(cand);
                    heap.push(Reverse((cand.0, cand.1, w)));
                }
            }
        }
        best.into_iter()
            .map(|b| b.map(|(transit, hops)| PathLength { transit, hops }))
            .collect()
    }

    /// Transit distances to `t` from every node.
    pub fn shortest_to(&self, t: NodeId) -> Vec<Option<Time>> {
        let inc = self.in_arcs();
        let mut best: Vec<Option<Time>> = vec![None; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        best[t.0] = Some(0);
        heap.push(Reverse((0 as Time, t.0)));
        while let Some(Reverse((d, v))) = heap.pop() {
            if best[v] != Some(d) {
                continue;
            }
            for &ai in &inc[v] {
                let a = &self.arcs[ai];
                let cand = d + a.transit;
                let w = a.tail.0;
                if best[w].is_none_or(|b| cand < b) {
                    best[w] = Some(cand);
                    heap.push(Reverse((cand, w)));
                }
            }
        }
        best
    }

    /// Largest shortest-path transit over all packets; a lower bound on the makespan.
    pub fn makespan_lower_bound(&self) -> Time {
        self.commodities
            .iter()
            .filter_map(|c| self.shortest_transit(c.origin, c.dest))
            .map(|p| p.transit)
            .max()
            .unwrap_or(0)
    }

    /// `|A| * k / sum(u)` as an exact fraction `(numerator, denominator)`.
    pub fn capacity_ratio(&self) -> Result<(u64, u64)> {
        if self.arcs.is_empty() {
            return Err(Error::EmptyArcSet);
        }
        let num = self.arcs.len() as u64 * self.commodities.len() as u64;
        let den: u64 = self.arcs.iter().map(|a| a.throughput).sum();
        let g = gcd(num, den);
        Ok((num / g, den / g))
    }

    pub fn capacity_ratio_f64(&self) -> Result<f64> {
        self.capacity_ratio().map(|(n, d)| n as f64 / d as f64)
    }

    /// Same network and packets with a different horizon.
    pub fn with_horizon(&self, horizon: Time) -> Instance {
        let mut out = self.clone();
        out.horizon = horizon;
        out
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// Small builder used by fixtures and tests.
#[derive(Debug, Default, Clone)]
pub struct InstanceBuilder {
    inst: Option<Instance>,
}

impl InstanceBuilder {
    pub fn new(horizon: Time) -> Self {
        Self {
            inst: Some(Instance {
                nodes: Vec::new(),
                arcs: Vec::new(),
                commodities: Vec::new(),
                horizon,
                meta: Meta::default(),
            }),
        }
    }

    fn inner(&mut self) -> &mut Instance {
        self.inst.as_mut().expect("builder consumed")
    }

    pub fn node(mut self, storage: u64) -> Self {
        let i = self.inner();
        let id = i.nodes.len();
        i.nodes.push(Node { id, storage });
        self
    }

    pub fn nodes(mut self, storages: &[u64]) -> Self {
        for &s in storages {
            self = self.node(s);
        }
        self
    }

    pub fn arc(mut self, tail: usize, head: usize, transit: Time, throughput: u64) -> Self {
        self.inner().arcs.push(ArcData {
            tail: NodeId(tail),
            head: NodeId(head),
            transit,
            throughput,
        });
        self
    }

    pub fn packet(mut self, origin: usize, dest: usize) -> Self {
        let i = self.inner();
        let id = i.commodities.len();
        i.commodities.push(Commodity { id, origin: NodeId(origin), dest: NodeId(dest) });
        self
    }

    pub fn packets(mut self, origin: usize, dest: usize, count: usize) -> Self {
        for _ in 0..count {
            self = self.packet(origin, dest);
        }
        self
    }

    pub fn generator(mut self, name: &str) -> Self {
        self.inner().meta.generator = name.to_string();
        self
    }

    pub fn build(mut self) -> Instance {
        self.inst.take().expect("builder consumed")
    }
}
