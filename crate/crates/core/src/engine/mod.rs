//! Synchronous time-stepped simulation of one run on one graph.
//!
//! A copy sent at step `t` arrives at step `t + 1`. Within a step every node
//! first handles its arrivals, in ascending `(sender, message id)` order,
//! and then scheduled nodes generate. Generation stops `initial_ttl` steps
//! before the horizon; copies still in flight at the horizon are delivered
//! in one final step so that every send has its delivery.

mod trace;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

pub use trace::{Delivery, EventTrace, Generation, TraceFile, TraceSink, TraceWriter};

use crate::error::{Error, Result};
use crate::protocol::{Message, MessageId, NodeState, ProtocolConfig};
use crate::seed::{derive, rng_for, SimRng, Stream};
use crate::topology::{NodeId, OverlayGraph};

/// Who generates messages, and when.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Workload {
    /// Every node generates with exponential inter-arrival times of mean
    /// `mean_generation_interval`.
    #[default]
    Exponential,
    /// One message at step 0, from `origin` or from a seeded uniform node.
    Single { origin: Option<NodeId> },
}

/// What a node knows about its neighbors' degrees at the start of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeKnowledge {
    /// Nothing; degrees are learned from piggybacked values.
    #[default]
    Learned,
    /// Every neighbor degree is known from the start.
    Preloaded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub protocol: ProtocolConfig,
    #[serde(default = "defaults::total_steps")]
    pub total_steps: u32,
    #[serde(default = "defaults::interval")]
    pub mean_generation_interval: f64,
    #[serde(default = "defaults::cache")]
    pub cache_capacity: usize,
    #[serde(default)]
    pub free_rider_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workload: Workload,
    #[serde(default)]
    pub degree_knowledge: DegreeKnowledge,
    /// Stop with [`Error::OverheadExceeded`] once sends pass this multiple of
    /// the spanning-tree bound of every planned message.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_overhead: Option<f64>,
}

mod defaults {
    pub fn total_steps() -> u32 {
        1000
    }
    pub fn interval() -> f64 {
        10.0
    }
    pub fn cache() -> usize {
        256
    }
}

impl SimulationConfig {
    pub fn new(protocol: ProtocolConfig) -> Self {
        SimulationConfig {
            protocol,
            total_steps: defaults::total_steps(),
            mean_generation_interval: defaults::interval(),
            cache_capacity: defaults::cache(),
            free_rider_fraction: 0.0,
            seed: 0,
            workload: Workload::Exponential,
            degree_knowledge: DegreeKnowledge::Learned,
            max_overhead: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.protocol.validate()?;
        if self.total_steps <= self.protocol.initial_ttl {
            return Err(Error::param(format!(
                "{} steps leave no room for TTL {}",
                self.total_steps, self.protocol.initial_ttl
            )));
        }
        if self.cache_capacity == 0 {
            return Err(Error::param("cache capacity must be positive"));
        }
        if !(0.0..1.0).contains(&self.free_rider_fraction) {
            return Err(Error::param(format!(
                "free rider fraction {} not in [0, 1)",
                self.free_rider_fraction
            )));
        }
        if !(self.mean_generation_interval.is_finite() && self.mean_generation_interval > 0.0) {
            return Err(Error::param("mean generation interval must be positive"));
        }
        if let Some(cap) = self.max_overhead {
            if !(cap.is_finite() && cap > 0.0) {
                return Err(Error::param(format!("overhead cap {cap} must be positive")));
            }
        }
        Ok(())
    }

    /// Last step (exclusive) at which messages may be created.
    pub fn generation_limit(&self) -> u32 {
        self.total_steps - self.protocol.initial_ttl
    }
}

/// Generation steps for one node: the first at the rounded exponential
/// draw, then gaps of `max(1, round(draw))`, all before
/// `total_steps - initial_ttl`.
pub fn generation_schedule<R: Rng + ?Sized>(
    rng: &mut R,
    mean_interval: f64,
    total_steps: u32,
    initial_ttl: u32,
) -> Vec<u32> {
    assert!(mean_interval > 0.0, "mean interval must be positive");
    let limit = total_steps.saturating_sub(initial_ttl) as f64;
    let exp = Exp::new(1.0 / mean_interval).expect("positive rate");
    let mut out = Vec::new();
    let mut t = exp.sample(rng).round();
    while t < limit {
        out.push(t as u32);
        t += exp.sample(rng).round().max(1.0);
    }
    out
}

/// `⌊fraction·n⌋` distinct nodes drawn uniformly, in ascending order.
pub fn assign_free_riders(node_count: usize, fraction: f64, seed: u64) -> Vec<NodeId> {
    assert!((0.0..1.0).contains(&fraction), "fraction not in [0, 1)");
    let count = ((fraction * node_count as f64) + 1e-9).floor() as usize;
    let mut rng = rng_for(seed, Stream::FreeRiders, 0);
    let mut ids: Vec<NodeId> = index::sample(&mut rng, node_count, count)
        .into_iter()
        .map(|i| i as NodeId)
        .collect();
    ids.sort_unstable();
    ids
}

/// Totals of a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunStats {
    pub messages: u32,
    pub sends: u64,
    pub deliveries: u64,
    /// Steps executed, the final drain step included.
    pub steps: u32,
}

#[derive(Debug, Clone, Copy)]
struct MessageMeta {
    origin: NodeId,
    created_at: u32,
}

/// Run one simulation, streaming every event into `sink`.
pub fn run<S: TraceSink + ?Sized>(
    g: &OverlayGraph,
    cfg: &SimulationConfig,
    sink: &mut S,
) -> Result<RunStats> {
    cfg.validate()?;
    let n = g.node_count();
    if n < 2 {
        return Err(Error::param("a run needs at least two nodes"));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let ttl = cfg.protocol.initial_ttl;
    let gen_limit = cfg.generation_limit();

    let mut nodes: Vec<NodeState> = g
        .nodes()
        .map(|v| {
            let mut s = NodeState::new(v, g.degree(v), cfg.cache_capacity);
            if cfg.degree_knowledge == DegreeKnowledge::Preloaded {
                for (slot, &u) in g.neighbors(v).iter().enumerate() {
                    s.neighbor_degrees[slot] = g.degree(u) as u32;
                }
            }
            s
        })
        .collect();
    for v in assign_free_riders(n, cfg.free_rider_fraction, cfg.seed) {
        nodes[v as usize].is_free_rider = true;
    }
    let mut schedules: Vec<std::vec::IntoIter<u32>> = match cfg.workload {
        Workload::Exponential => (0..n)
            .map(|v| {
                let mut rng = rng_for(cfg.seed, Stream::Generation, v as u64);
                generation_schedule(&mut rng, cfg.mean_generation_interval, cfg.total_steps, ttl)
                    .into_iter()
            })
            .collect(),
        Workload::Single { origin } => {
            let origin = match origin {
                Some(o) if (o as usize) < n => o,
                Some(o) => return Err(Error::param(format!("origin {o} not in graph"))),
                None => rng_for(cfg.seed, Stream::Origin, 0).random_range(0..n as NodeId),
            };
            (0..n)
                .map(|v| if v as NodeId == origin { vec![0] } else { vec![] }.into_iter())
                .collect()
        }
    };
    let planned: u64 = schedules.iter().map(|s| s.len() as u64).sum();
    let send_cap = cfg
        .max_overhead
        .map(|cap| (cap * planned as f64 * (n - 1) as f64).floor() as u64);
    for (s, sched) in nodes.iter_mut().zip(&mut schedules) {
        s.next_generation_at = sched.next();
    }
    let mut rngs: Vec<SimRng> = (0..n)
        .map(|v| rng_for(cfg.seed, Stream::Forwarding, v as u64))
        .collect();

    // back[offsets[v] + i]: position of v in the adjacency of its i-th neighbor
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0usize);
    for v in g.nodes() {
        offsets.push(offsets[v as usize] + g.degree(v));
    }
    let back: Vec<u32> = g
        .nodes()
        .flat_map(|v| {
            g.neighbors(v).iter().map(move |&u| {
                g.neighbors(u).binary_search(&v).expect("symmetric adjacency") as u32
            })
        })
        .collect();

    let words = n.div_ceil(64);
    let mut seen: Vec<u64> = Vec::new();
    let mut meta: Vec<MessageMeta> = Vec::new();
    // per receiver: (sender's slot in the receiver's adjacency << 32 | message
    // id); adjacency is sorted, so this orders by sender id
    let mut inbox: Vec<Vec<u64>> = vec![Vec::new(); n];
    let mut outbox: Vec<Vec<u64>> = vec![Vec::new(); n];
    let mut targets: Vec<u32> = Vec::new();
    let mut scratch: Vec<u64> = Vec::new();
    let mut stats = RunStats::default();
    let mut in_flight: u64 = 0;

    // queue `id` from v to the neighbors at adjacency positions `targets`
    let post = |v: usize, id: MessageId, targets: &[u32], outbox: &mut Vec<Vec<u64>>| {
        if targets.is_empty() {
            return 0;
        }
        let nb = g.neighbors(v as NodeId);
        let back = &back[offsets[v]..offsets[v + 1]];
        for &i in targets {
            let slot = back[i as usize] as u64;
            outbox[nb[i as usize] as usize].push((slot << 32) | id as u64);
        }
        targets.len() as u64
    };

    let mut now: u32 = 0;
    while now < cfg.total_steps || in_flight > 0 {
        std::mem::swap(&mut inbox, &mut outbox);
        in_flight = 0;
        for v in 0..n {
            let arrivals = &mut inbox[v];
            if arrivals.is_empty() {
                continue;
            }
            sort_envelopes(arrivals, &mut scratch);
            let neighbors = g.neighbors(v as NodeId);
            for &key in arrivals.iter() {
                let slot = (key >> 32) as usize;
                let id = key as MessageId;
                let m = meta[id as usize];
                let hops = now - m.created_at;
                if hops == 0 || hops > ttl + 1 {
                    return Err(Error::Integrity(format!(
                        "message {id} arrived after {hops} hops"
                    )));
                }
                let msg = Message {
                    id,
                    origin: m.origin,
                    created_at: m.created_at,
                    ttl_remaining: ttl + 1 - hops,
                    hops_traversed: hops,
                    sender_degree: g.degree(neighbors[slot]) as u32,
                };
                targets.clear();
                let rec = nodes[v].on_receive_slot(
                    &msg,
                    slot,
                    &cfg.protocol,
                    &mut rngs[v],
                    &mut targets,
                );
                let bit = id as usize * words + v / 64;
                let mask = 1u64 << (v % 64);
                let first = rec.received && seen[bit] & mask == 0;
                if first {
                    seen[bit] |= mask;
                }
                sink.delivered(&Delivery {
                    msg: id,
                    receiver: v as NodeId,
                    hops,
                    step: now,
                    first,
                });
                stats.deliveries += 1;
                let sent = post(v, id, &targets, &mut outbox);
                stats.sends += sent;
                in_flight += sent;
            }
            arrivals.clear();
        }
        if now < gen_limit {
            for v in 0..n {
                if nodes[v].next_generation_at != Some(now) {
                    continue;
                }
                let id = meta.len() as MessageId;
                meta.push(MessageMeta {
                    origin: v as NodeId,
                    created_at: now,
                });
                seen.resize(seen.len() + words, 0);
                seen[id as usize * words + v / 64] |= 1u64 << (v % 64);
                targets.clear();
                nodes[v].on_generate_slots(
                    id,
                    now,
                    &cfg.protocol,
                    &mut rngs[v],
                    &mut targets,
                );
                sink.generated(&Generation {
                    msg: id,
                    origin: v as NodeId,
                    step: now,
                    ttl,
                });
                let sent = post(v, id, &targets, &mut outbox);
                stats.sends += sent;
                in_flight += sent;
                nodes[v].next_generation_at = schedules[v].next();
                if nodes[v].next_generation_at.is_some_and(|t| t <= now) {
                    return Err(Error::Integrity(format!("node {v} schedule not increasing")));
                }
            }
        }
        if let (Some(cap), Some(limit)) = (cfg.max_overhead, send_cap) {
            if stats.sends > limit {
                return Err(Error::OverheadExceeded {
                    limit: cap,
                    sends: stats.sends,
                    step: now,
                });
            }
        }
        now += 1;
    }
    stats.messages = meta.len() as u32;
    stats.steps = now;
    if stats.sends != stats.deliveries {
        return Err(Error::Integrity(format!(
            "{} sends but {} deliveries",
            stats.sends, stats.deliveries
        )));
    }
    Ok(stats)
}

/// Sort `(slot << 32 | id)` envelopes ascending. Large buckets go through an
/// LSD radix sort on the compacted key `(slot, id - min id)`, which has few
/// significant bits because only recent messages are in flight.
fn sort_envelopes(keys: &mut Vec<u64>, scratch: &mut Vec<u64>) {
    const DIGIT: u32 = 8;
    if keys.len() < 256 {
        keys.sort_unstable();
        return;
    }
    let (mut lo, mut hi, mut top) = (u32::MAX, 0u32, 0u64);
    for &k in keys.iter() {
        lo = lo.min(k as u32);
        hi = hi.max(k as u32);
        top = top.max(k >> 32);
    }
    let id_bits = 32 - (hi - lo).leading_zeros();
    let bits = id_bits + (64 - top.leading_zeros());
    if bits > 32 {
        keys.sort_unstable();
        return;
    }
    let compact = |k: u64| ((k >> 32) << id_bits) | (k as u32 - lo) as u64;
    scratch.clear();
    scratch.resize(keys.len(), 0);
    let mut shift = 0;
    while shift < bits {
        let mut count = [0usize; 1 << DIGIT];
        for &k in keys.iter() {
            count[(compact(k) >> shift) as usize & ((1 << DIGIT) - 1)] += 1;
        }
        let mut sum = 0;
        for c in count.iter_mut() {
            let here = *c;
            *c = sum;
            sum += here;
        }
        for &k in keys.iter() {
            let d = (compact(k) >> shift) as usize & ((1 << DIGIT) - 1);
            scratch[count[d]] = k;
            count[d] += 1;
        }
        std::mem::swap(keys, scratch);
        shift += DIGIT;
    }
}

/// Run one simulation and keep the whole trace in memory.
pub fn simulate(g: &OverlayGraph, cfg: &SimulationConfig) -> Result<EventTrace> {
    let mut trace = EventTrace::default();
    run(g, cfg, &mut trace)?;
    Ok(trace)
}

/// Master seed of repetition `rep` on corpus graph `graph`.
pub fn run_seed(base: u64, graph: usize, rep: usize) -> u64 {
    derive(derive(base, Stream::SweepRun, graph as u64), Stream::SweepRun, rep as u64)
}
