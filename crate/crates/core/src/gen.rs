//! Seeded instance generators.
//!
//! Every generator draws from a ChaCha8 generator seeded with
//! `seed_from_u64(seed)`, split into independent streams with `set_stream`:
//! stream 1 for the network (node positions and arcs), stream 2 for
//! capacities and stream 3 for packet origins and destinations. Changing a
//! capacity range therefore leaves the arcs and packets of a seed unchanged.
//!
//! The horizon of a generated instance is the makespan of a greedy schedule,
//! so every generated instance is feasible.

use std::collections::{BTreeMap, HashMap};

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::expand::{build_arcs, PartialNetwork, StorageRule, TimeSets};
use crate::instance::{ArcData, Commodity, Instance, InstanceBuilder, Meta, Node, NodeId, Time};
use crate::schedule::{Move, Schedule, Trajectory};

const STREAM_NETWORK: u64 = 1;
const STREAM_CAPACITY: u64 = 2;
const STREAM_PACKETS: u64 = 3;

const CITIES_CSV: &str = include_str!("../data/us_cities_top20.csv");
const EARTH_RADIUS_MILES: f64 = 3958.8;

/// Generator family plus its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    #[serde(default)]
    pub seed: u64,
    #[serde(flatten)]
    pub family: Family,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Geographic(GeographicParams),
    Geometric(GeometricParams),
    Tiny(TinyParams),
    AppendixA,
}

/// City network with random arcs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeographicParams {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    /// Closed range for arc throughput.
    pub throughput: (u64, u64),
    /// Closed range for node storage.
    pub storage: (u64, u64),
    /// Minimum hop count of an OD pair's shortest path.
    pub delta: usize,
    /// Maximum shortest-path transit as a fraction of the largest one.
    pub gamma: f64,
}

impl Default for GeographicParams {
    fn default() -> Self {
        Self { n: 20, m: 30, k: 200, throughput: (1, 2), storage: (0, 2), delta: 3, gamma: 0.9 }
    }
}

/// Random lattice nodes with local and long-range arcs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometricParams {
    /// Grid side length.
    pub l: usize,
    pub n: usize,
    pub k: usize,
    /// L1 radius for local arcs.
    pub p: usize,
    /// Long-range arc counts; each node draws one uniformly.
    pub q: Vec<usize>,
    /// Long-range endpoints are drawn with weight `d^-r`.
    pub r: f64,
    pub throughput: (u64, u64),
    pub storage: (u64, u64),
    pub delta: usize,
    pub gamma: f64,
}

impl Default for GeometricParams {
    fn default() -> Self {
        Self {
            l: 25,
            n: 20,
            k: 200,
            p: 3,
            q: vec![1],
            r: 0.5,
            throughput: (1, 2),
            storage: (0, 2),
            delta: 3,
            gamma: 0.9,
        }
    }
}

/// Oracle-scale instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TinyParams {
    pub n: usize,
    pub k: usize,
    pub max_horizon: Time,
    pub max_transit: Time,
    pub max_throughput: u64,
    pub max_storage: u64,
    /// Probability of each extra arc beyond the spanning cycle.
    pub density: f64,
    /// Added to the greedy makespan to form the horizon, capped by `max_horizon`.
    pub slack: Time,
}

impl Default for TinyParams {
    fn default() -> Self {
        Self {
            n: 4,
            k: 4,
            max_horizon: 10,
            max_transit: 2,
            max_throughput: 2,
            max_storage: 1,
            density: 0.3,
            slack: 3,
        }
    }
}

/// `ceil(frac * k)`, the capacity bound form used by the experiment grids.
pub fn ceil_frac(k: usize, frac: f64) -> u64 {
    (frac * k as f64 - 1e-9).ceil().max(0.0) as u64
}

impl GeographicParams {
    pub fn check(&self) -> Result<()> {
        let cities = cities()?;
        if self.n < 2 || self.n > cities.len() {
            return Err(Error::Generator(format!("n={} outside 2..={}", self.n, cities.len())));
        }
        if self.m == 0 || self.m > self.n * (self.n - 1) {
            return Err(Error::Generator(format!("m={} outside 1..={}", self.m, self.n * (self.n - 1))));
        }
        check_common(self.k, self.throughput, self.storage, self.gamma)
    }

    /// Differences from the published experiment grid.
    pub fn grid_deviations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n != 20 {
            out.push(format!("n={} (grid uses 20)", self.n));
        }
        if ![30, 45, 60].contains(&self.m) {
            out.push(format!("m={} not in {{30,45,60}}", self.m));
        }
        if ![200, 250, 300].contains(&self.k) {
            out.push(format!("k={} not in {{200,250,300}}", self.k));
        }
        let fracs = [0.01, 0.0175, 0.025];
        if !fracs.iter().any(|&f| self.throughput == (1, ceil_frac(self.k, f))) {
            out.push(format!("throughput range {:?} off grid", self.throughput));
        }
        if !fracs.iter().any(|&f| self.storage == (0, ceil_frac(self.k, f))) {
            out.push(format!("storage range {:?} off grid", self.storage));
        }
        if self.delta != 3 || (self.gamma - 0.9).abs() > 1e-12 {
            out.push(format!("delta={} gamma={}", self.delta, self.gamma));
        }
        out
    }
}

impl GeometricParams {
    pub fn check(&self) -> Result<()> {
        if self.n < 2 || self.n > self.l * self.l {
            return Err(Error::Generator(format!("n={} outside 2..={}", self.n, self.l * self.l)));
        }
        if self.q.is_empty() || self.q.iter().any(|&q| q >= self.n) {
            return Err(Error::Generator(format!("q={:?} must be non-empty and below n", self.q)));
        }
        if !self.r.is_finite() || self.r < 0.0 {
            return Err(Error::Generator(format!("r={} must be finite and non-negative", self.r)));
        }
        check_common(self.k, self.throughput, self.storage, self.gamma)
    }

    pub fn grid_deviations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.l != 25 || self.n != 20 {
            out.push(format!("l={} n={} (grid uses 25, 20)", self.l, self.n));
        }
        if ![200, 225, 250].contains(&self.k) {
            out.push(format!("k={} not in {{200,225,250}}", self.k));
        }
        if ![3, 4].contains(&self.p) {
            out.push(format!("p={} not in {{3,4}}", self.p));
        }
        if self.q != [1] && self.q != [1, 2] {
            out.push(format!("q={:?} not in {{1, {{1,2}}}}", self.q));
        }
        if (self.r - 0.5).abs() > 1e-12 {
            out.push(format!("r={}", self.r));
        }
        let fracs = [0.01, 0.02];
        if !fracs.iter().any(|&f| self.throughput == (1, ceil_frac(self.k, f))) {
            out.push(format!("throughput range {:?} off grid", self.throughput));
        }
        if !fracs.iter().any(|&f| self.storage == (0, ceil_frac(self.k, f))) {
            out.push(format!("storage range {:?} off grid", self.storage));
        }
        out
    }
}

impl TinyParams {
    pub fn check(&self) -> Result<()> {
        if self.n < 2 || self.n > 6 || self.k > 8 || self.max_horizon > 10 {
            return Err(Error::Generator(format!(
                "tiny limits are n in 2..=6, k <= 8, T <= 10; got n={} k={} T={}",
                self.n, self.k, self.max_horizon
            )));
        }
        if self.max_transit == 0 || self.max_throughput == 0 {
            return Err(Error::Generator("max_transit and max_throughput must be positive".into()));
        }
        Ok(())
    }
}

fn check_common(k: usize, throughput: (u64, u64), storage: (u64, u64), gamma: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::Generator("k must be positive".into()));
    }
    if throughput.0 == 0 || throughput.0 > throughput.1 {
        return Err(Error::Generator(format!("bad throughput range {throughput:?}")));
    }
    if storage.0 > storage.1 {
        return Err(Error::Generator(format!("bad storage range {storage:?}")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Generator(format!("gamma={gamma} outside (0,1]")));
    }
    Ok(())
}

pub fn generate(params: &GenParams) -> Result<Instance> {
    match &params.family {
        Family::Geographic(p) => gen_geographic(p, params.seed),
        Family::Geometric(p) => gen_geometric(p, params.seed),
        Family::Tiny(p) => gen_tiny(params.seed, p),
        Family::AppendixA => Ok(gen_appendix_a().instance),
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct City {
    pub name: String,
    pub lat: f64,
    pub lon: f64,
}

/// The bundled city table in population order.
pub fn cities() -> Result<Vec<City>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(CITIES_CSV.as_bytes());
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Great-circle distance in miles.
pub fn haversine_miles(a: &City, b: &City) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_MILES * h.sqrt().asin()
}

pub fn gen_geographic(params: &GeographicParams, seed: u64) -> Result<Instance> {
    params.check()?;
    let cities = cities()?;
    let n = params.n;
    let mut net = stream(seed, STREAM_NETWORK);
    let mut picks = index::sample(&mut net, n * (n - 1), params.m).into_vec();
    picks.sort_unstable();
    let pairs: Vec<(usize, usize)> = picks
        .into_iter()
        .map(|i| {
            let (v, j) = (i / (n - 1), i % (n - 1));
            (v, if j >= v { j + 1 } else { j })
        })
        .collect();
    let transit: Vec<Time> = pairs
        .iter()
        .map(|&(v, w)| ((haversine_miles(&cities[v], &cities[w]) / 100.0).ceil() as Time).max(1))
        .collect();
    let mut inst = assemble(n, &pairs, &transit, params.throughput, params.storage, seed);
    inst.commodities = sample_packets(&inst, params.k, params.delta, params.gamma, seed)?;
    finish(inst, "geographic", seed, to_params(params))
}

/// Sampling weights of long-range endpoints from node `v`; index `v` itself gets 0.
pub fn long_range_weights(positions: &[(usize, usize)], v: usize, r: f64) -> Vec<f64> {
    positions
        .iter()
        .enumerate()
        .map(|(w, &pw)| if w == v { 0.0 } else { (l1(positions[v], pw) as f64).powf(-r) })
        .collect()
}

fn l1(a: (usize, usize), b: (usize, usize)) -> usize {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
}

/// Lattice positions and arc list of a geometric network.
pub fn geometric_network(params: &GeometricParams, rng: &mut ChaCha8Rng) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let positions: Vec<(usize, usize)> =
        index::sample(rng, params.l * params.l, params.n).into_iter().map(|i| (i / params.l, i % params.l)).collect();
    let n = params.n;
    let mut arcs = Vec::new();
    for v in 0..n {
        for w in 0..n {
            if v != w && l1(positions[v], positions[w]) <= params.p {
                arcs.push((v, w));
            }
        }
    }
    for v in 0..n {
        let q = if params.q.len() == 1 { params.q[0] } else { params.q[rng.gen_range(0..params.q.len())] };
        let weights = long_range_weights(&positions, v, params.r);
        let others: Vec<usize> = (0..n).filter(|&w| w != v).collect();
        let chosen: Vec<usize> = others
            .choose_multiple_weighted(rng, q, |&w| weights[w])
            .expect("weights are positive and finite")
            .copied()
            .collect();
        for w in chosen {
            if !arcs.contains(&(v, w)) {
                arcs.push((v, w));
            }
        }
    }
    (positions, arcs)
}

const GRAPH_ATTEMPTS: usize = 100;

pub fn gen_geometric(params: &GeometricParams, seed: u64) -> Result<Instance> {
    params.check()?;
    let mut net = stream(seed, STREAM_NETWORK);
    let mut last = None;
    for _ in 0..GRAPH_ATTEMPTS {
        let (positions, pairs) = geometric_network(params, &mut net);
        let transit: Vec<Time> = pairs.iter().map(|&(v, w)| l1(positions[v], positions[w]) as Time).collect();
        let mut inst = assemble(params.n, &pairs, &transit, params.throughput, params.storage, seed);
        match sample_packets(&inst, params.k, params.delta, params.gamma, seed) {
            Ok(c) => {
                inst.commodities = c;
                let mut extra = to_params(params);
                extra.insert(
                    "positions".into(),
                    serde_json::to_value(&positions).expect("positions serialize"),
                );
                return finish(inst, "geometric", seed, extra);
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Generator("no geometric graph".into())))
}

fn assemble(
    n: usize,
    pairs: &[(usize, usize)],
    transit: &[Time],
    throughput: (u64, u64),
    storage: (u64, u64),
    seed: u64,
) -> Instance {
    let mut caps = stream(seed, STREAM_CAPACITY);
    let arcs = pairs
        .iter()
        .zip(transit)
        .map(|(&(v, w), &t)| ArcData {
            tail: NodeId(v),
            head: NodeId(w),
            transit: t,
            throughput: caps.gen_range(throughput.0..=throughput.1),
        })
        .collect();
    let nodes = (0..n).map(|id| Node { id, storage: caps.gen_range(storage.0..=storage.1) }).collect();
    Instance { nodes, arcs, commodities: Vec::new(), horizon: 0, meta: Meta::default() }
}

/// OD pairs meeting the hop and transit filters, as `(origin, dest)`.
pub fn qualifying_pairs(inst: &Instance, delta: usize, gamma: f64) -> Vec<(usize, usize)> {
    let n = inst.num_nodes();
    let table: Vec<_> = (0..n).map(|s| inst.shortest_from(NodeId(s))).collect();
    let longest = table
        .iter()
        .enumerate()
        .flat_map(|(s, row)| row.iter().enumerate().filter(move |&(t, _)| t != s).filter_map(|(_, p)| *p))
        .map(|p| p.transit)
        .max()
        .unwrap_or(0);
    let limit = gamma * longest as f64 + 1e-9;
    let mut out = Vec::new();
    for (s, row) in table.iter().enumerate() {
        for (t, p) in row.iter().enumerate() {
            if let (true, Some(p)) = (s != t, p) {
                if p.hops >= delta && (p.transit as f64) <= limit {
                    out.push((s, t));
                }
            }
        }
    }
    out
}

fn sample_packets(inst: &Instance, k: usize, delta: usize, gamma: f64, seed: u64) -> Result<Vec<Commodity>> {
    let n = inst.num_nodes();
    let ok: std::collections::HashSet<(usize, usize)> = qualifying_pairs(inst, delta, gamma).into_iter().collect();
    let mut rng = stream(seed, STREAM_PACKETS);
    let budget = 1000 * k;
    let mut out = Vec::with_capacity(k);
    let mut draws = 0;
    while out.len() < k {
        if draws == budget {
            return Err(Error::Generator(format!(
                "only {} of {k} OD pairs qualified after {budget} draws",
                out.len()
            )));
        }
        draws += 1;
        let s = rng.gen_range(0..n);
        let mut t = rng.gen_range(0..n - 1);
        if t >= s {
            t += 1;
        }
        if ok.contains(&(s, t)) {
            out.push(Commodity { id: out.len(), origin: NodeId(s), dest: NodeId(t) });
        }
    }
    Ok(out)
}

fn to_params<P: Serialize>(p: &P) -> BTreeMap<String, Value> {
    match serde_json::to_value(p).expect("params serialize") {
        Value::Object(m) => m.into_iter().collect(),
        _ => BTreeMap::new(),
    }
}

fn finish(mut inst: Instance, generator: &str, seed: u64, mut params: BTreeMap<String, Value>) -> Result<Instance> {
    let greedy = greedy_schedule(&inst).ok_or_else(|| Error::Generator("greedy routing failed".into()))?;
    inst.horizon = greedy.makespan();
    let (num, den) = inst.capacity_ratio()?;
    params.insert("capacity_ratio".into(), Value::from(num as f64 / den as f64));
    params.insert("capacity_ratio_fraction".into(), Value::from(vec![num, den]));
    params.insert("length_measure".into(), Value::from("transit"));
    params.insert("horizon_source".into(), Value::from("greedy"));
    inst.meta = Meta { generator: generator.to_string(), seed, params };
    inst.ensure_valid()?;
    Ok(inst)
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Start,
    Wait,
    Move { arc: usize, from: usize, depart: Time },
}

/// Routes packets one at a time, longest shortest path first, each on an
/// earliest-arrival trajectory through the capacity left by earlier packets.
/// Waiting at the origin is free, so every packet with a path gets through.
/// `None` if some destination is unreachable.
pub fn greedy_schedule(inst: &Instance) -> Option<Schedule> {
    let n = inst.num_nodes();
    let out = inst.out_arcs();
    let mut order = Vec::with_capacity(inst.commodities.len());
    for (k, c) in inst.commodities.iter().enumerate() {
        order.push((inst.shortest_transit(c.origin, c.dest)?.transit, k));
    }
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut arc_load: HashMap<(usize, Time), u64> = HashMap::new();
    let mut held: HashMap<(usize, Time), u64> = HashMap::new();
    let mut latest: Time = 0;
    let mut trajectories = vec![Trajectory { commodity: 0, moves: Vec::new() }; inst.commodities.len()];

    for (shortest, k) in order {
        let c = &inst.commodities[k];
        let cap = latest + shortest;
        let mut pred: Vec<Vec<Option<Step>>> = vec![vec![None; n]; cap as usize + 1];
        pred[0][c.origin.0] = Some(Step::Start);
        let mut arrival = None;
        'time: for t in 0..=cap {
            let mut stack: Vec<usize> = (0..n).filter(|&v| pred[t as usize][v].is_some()).collect();
            while let Some(v) = stack.pop() {
                if v == c.dest.0 {
                    arrival = Some(t);
                    break 'time;
                }
                for &a in &out[v] {
                    let arc = &inst.arcs[a];
                    let arr = t + arc.transit;
                    if arr > cap || arc_load.get(&(a, t)).copied().unwrap_or(0) >= arc.throughput {
                        continue;
                    }
                    let w = arc.head.0;
                    if pred[arr as usize][w].is_none() {
                        pred[arr as usize][w] = Some(Step::Move { arc: a, from: v, depart: t });
                        if arr == t {
                            stack.push(w);
                        }
                    }
                }
                let room = !inst.is_active(k, NodeId(v))
                    || held.get(&(v, t)).copied().unwrap_or(0) < inst.nodes[v].storage;
                if t < cap && room && pred[t as usize + 1][v].is_none() {
                    pred[t as usize + 1][v] = Some(Step::Wait);
                }
            }
        }
        let arrival = arrival.expect("departing after every earlier arrival always succeeds");
        let mut moves = Vec::new();
        let (mut v, mut t) = (c.dest.0, arrival);
        loop {
            match pred[t as usize][v].expect("predecessor chain") {
                Step::Start => break,
                Step::Wait => t -= 1,
                Step::Move { arc, from, depart } => {
                    moves.push(Move { arc, depart, arrive: t });
                    v = from;
                    t = depart;
                }
            }
        }
        moves.reverse();
        for (i, m) in moves.iter().enumerate() {
            *arc_load.entry((m.arc, m.depart)).or_default() += 1;
            if let Some(next) = moves.get(i + 1) {
                let at = inst.arcs[m.arc].head;
                if inst.is_active(k, at) {
                    for s in m.arrive..next.depart {
                        *held.entry((at.0, s)).or_default() += 1;
                    }
                }
            }
        }
        latest = latest.max(arrival);
        trajectories[k] = Trajectory { commodity: k, moves };
    }
    Some(Schedule { horizon: latest, trajectories })
}

const TINY_ATTEMPTS: usize = 1000;

/// Strongly connected digraph on `n` nodes: a random spanning cycle plus
/// extra arcs, with every throughput at least 1.
pub fn gen_tiny(seed: u64, params: &TinyParams) -> Result<Instance> {
    params.check()?;
    let n = params.n;
    let mut net = stream(seed, STREAM_NETWORK);
    let mut caps = stream(seed, STREAM_CAPACITY);
    let mut packets = stream(seed, STREAM_PACKETS);
    for _ in 0..TINY_ATTEMPTS {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut net);
        let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (perm[i], perm[(i + 1) % n])).collect();
        if n == 2 {
            pairs.dedup();
        }
        for v in 0..n {
            for w in 0..n {
                if v != w && !pairs.contains(&(v, w)) && net.gen_bool(params.density) {
                    pairs.push((v, w));
                }
            }
        }
        let mut inst = Instance {
            nodes: (0..n).map(|id| Node { id, storage: caps.gen_range(0..=params.max_storage) }).collect(),
            arcs: pairs
                .iter()
                .map(|&(v, w)| ArcData {
                    tail: NodeId(v),
                    head: NodeId(w),
                    transit: net.gen_range(1..=params.max_transit),
                    throughput: caps.gen_range(1..=params.max_throughput),
                })
                .collect(),
            commodities: Vec::new(),
            horizon: 0,
            meta: Meta::default(),
        };
        for id in 0..params.k {
            let s = packets.gen_range(0..n);
            let mut t = packets.gen_range(0..n - 1);
            if t >= s {
                t += 1;
            }
            inst.commodities.push(Commodity { id, origin: NodeId(s), dest: NodeId(t) });
        }
        let greedy = greedy_schedule(&inst).expect("spanning cycle reaches every node");
        if greedy.makespan() > params.max_horizon {
            continue;
        }
        let mut inst = finish(inst, "tiny", seed, to_params(params))?;
        inst.horizon = (inst.horizon + params.slack).min(params.max_horizon);
        return Ok(inst);
    }
    Err(Error::Generator(format!("no tiny instance with horizon <= {} after {TINY_ATTEMPTS} draws", params.max_horizon)))
}

/// Two unit packets over a two-arc chain sharing throughput-1 arcs, with
/// storage 1 at the middle node. The optimum is 3: one packet goes straight
/// through, the other waits one step at the origin.
pub fn shared_arc_fixture() -> Instance {
    InstanceBuilder::new(4).nodes(&[0, 1, 0]).arc(0, 1, 1, 1).arc(1, 2, 1, 1).packets(0, 2, 2).generator("tiny").build()
}

/// The storage-bound comparison fixture.
#[derive(Debug, Clone)]
pub struct AppendixA {
    pub instance: Instance,
    pub network: PartialNetwork,
    /// Node `w`, whose copies are only at `0, 1, 2, T`.
    pub w: NodeId,
    /// Tight holdover capacity at `(w, 2)`.
    pub tight: u64,
    /// Relaxed holdover capacity `m_S * b_w + U` at `(w, 2)`.
    pub relaxed: u64,
}

pub const APPENDIX_A_PACKETS: usize = 50;

/// Nodes `s, v, w, t`; arcs `s->v`, two parallel `v->w` arcs with transit 1
/// and 2, and `w->t`; `b_w = 20`; 50 unit packets from `s` to `t`; `T = 5`.
/// The partial time set keeps every copy of `s` and `v`, copies of `w` at
/// `0, 1, 2, T` and copies of `t` at `0, T`.
pub fn gen_appendix_a() -> AppendixA {
    let horizon: Time = 5;
    let mut instance = InstanceBuilder::new(horizon)
        .nodes(&[0, 20, 20, 0])
        .arc(0, 1, 1, 50)
        .arc(1, 2, 1, 50)
        .arc(1, 2, 2, 50)
        .arc(2, 3, 1, 50)
        .packets(0, 3, APPENDIX_A_PACKETS)
        .generator("appendix_a")
        .build();
    let mut params = BTreeMap::new();
    params.insert(
        "free_choices".to_string(),
        Value::from(vec![
            "horizon 5",
            "storage 20 at v",
            "storage 0 at s and t",
            "throughput 50 on every arc",
            "copies of t only at 0 and T",
            "transit 1 on s->v and w->t",
        ]),
    );
    instance.meta.params = params;
    let all: Vec<Time> = (0..=horizon).collect();
    let times = TimeSets::from_lists(vec![all.clone(), all, vec![0, 1, 2, horizon], vec![0, horizon]], horizon)
        .expect("fixture time sets contain 0 and T");
    let network = build_arcs(times, &instance, StorageRule::Tight).expect("fixture network");
    let w = NodeId(2);
    let tight = network.storage_bound_tight(&instance, w, 2).expect("(w,2) is included");
    let relaxed = network.storage_bound_relaxed(&instance, w, 2).expect("(w,2) is included");
    AppendixA { instance, network, w, tight, relaxed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::check_schedule;

    #[test]
    fn city_table() {
        let c = cities().unwrap();
        assert_eq!(c.len(), 20);
        assert_eq!(c[0].name, "New York");
        // New York to Los Angeles is about 2445 great-circle miles.
        let d = haversine_miles(&c[0], &c[1]);
        assert!((d - 2445.0).abs() < 10.0, "{d}");
    }

    #[test]
    fn ceil_frac_grid() {
        assert_eq!(ceil_frac(200, 0.01), 2);
        assert_eq!(ceil_frac(200, 0.0175), 4);
        assert_eq!(ceil_frac(250, 0.025), 7);
        assert_eq!(ceil_frac(20, 0.01), 1);
    }

    #[test]
    fn geographic_defaults() {
        let p = GeographicParams::default();
        assert!(p.grid_deviations().is_empty());
        let inst = gen_geographic(&p, 7).unwrap();
        assert!(inst.validate().is_empty());
        assert_eq!(inst.arcs.len(), 30);
        assert_eq!(inst.commodities.len(), 200);
        for c in &inst.commodities {
            assert!(inst.shortest_transit(c.origin, c.dest).unwrap().hops >= 3);
        }
        for a in &inst.arcs {
            assert!((1..=2).contains(&a.throughput));
        }
        assert!(inst.nodes.iter().all(|v| v.storage <= 2));
        assert!(inst.meta.params.contains_key("capacity_ratio"));
        let again = gen_geographic(&p, 7).unwrap();
        assert_eq!(inst.to_json(), again.to_json());
    }

    #[test]
    fn greedy_is_feasible() {
        let p = GeographicParams { k: 60, throughput: (1, 1), storage: (0, 1), ..Default::default() };
        let inst = gen_geographic(&p, 3).unwrap();
        let sched = greedy_schedule(&inst).unwrap();
        let report = check_schedule(&inst, &sched).unwrap();
        assert!(report.is_ok(), "{:?}", report.violations);
        assert_eq!(report.makespan, inst.horizon);
    }

    #[test]
    fn geometric_local_arcs() {
        let p = GeometricParams { k: 30, ..Default::default() };
        let inst = gen_geometric(&p, 11).unwrap();
        assert!(inst.validate().is_empty());
        let pos: Vec<(usize, usize)> = serde_json::from_value(inst.meta.params["positions"].clone()).unwrap();
        for v in 0..p.n {
            for w in 0..p.n {
                if v != w && l1(pos[v], pos[w]) <= p.p {
                    assert!(inst.arcs.iter().any(|a| a.tail.0 == v && a.head.0 == w));
                }
            }
        }
        for a in &inst.arcs {
            assert_eq!(a.transit as usize, l1(pos[a.tail.0], pos[a.head.0]));
        }
        assert_eq!(inst.to_json(), gen_geometric(&p, 11).unwrap().to_json());
    }

    #[test]
    fn uniform_weights_at_r_zero() {
        let pos = vec![(0, 0), (0, 5), (3, 3), (9, 1)];
        assert_eq!(long_range_weights(&pos, 1, 0.0), vec![1.0, 0.0, 1.0, 1.0]);
        let w = long_range_weights(&pos, 0, 1.0);
        assert!((w[1] - 0.2).abs() < 1e-12 && (w[2] - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn tiny_within_limits() {
        for seed in 0..30 {
            let p = TinyParams { n: 3 + (seed as usize % 4), k: 2 + (seed as usize % 7), ..Default::default() };
            let inst = gen_tiny(seed, &p).unwrap();
            assert!(inst.validate().is_empty());
            assert!(inst.horizon <= 10);
            assert_eq!(inst.to_json(), gen_tiny(seed, &p).unwrap().to_json());
        }
        assert!(gen_tiny(0, &TinyParams { n: 7, ..Default::default() }).is_err());
    }

    #[test]
    fn appendix_a_bounds() {
        let a = gen_appendix_a();
        assert_eq!(a.tight, 40);
        assert_eq!(a.relaxed, 60);
        assert_eq!(a.instance.commodities.len(), 50);
    }

    #[test]
    fn params_from_toml() {
        let p: GenParams = toml::from_str("family = \"geographic\"\nseed = 5\nm = 45\nk = 20\n").unwrap();
        assert_eq!(p.seed, 5);
        match p.family {
            Family::Geographic(g) => assert_eq!((g.m, g.k, g.n), (45, 20, 20)),
            _ => panic!("wrong family"),
        }
        let a: GenParams = toml::from_str("family = \"appendix_a\"").unwrap();
        assert_eq!(a.family, Family::AppendixA);
    }
}
