//! Per-node dissemination behavior: generation, reception, the four
//! forwarding strategies, LRU caching, TTL handling, degree piggybacking and
//! free riding.

mod forward;
mod lru;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use forward::{forward_ddf, forward_fp, forward_pb};
use forward::{ddf_slots, fp_slots, pb_slots};
pub use lru::LruCache;

use crate::error::{Error, Result};
use crate::theory::GossipFunction;
use crate::topology::NodeId;

pub type MessageId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Message {
    pub id: MessageId,
    pub origin: NodeId,
    pub created_at: u32,
    pub ttl_remaining: u32,
    pub hops_traversed: u32,
    /// Degree of the node that sent this copy.
    pub sender_degree: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", content = "param", rename_all = "snake_case")]
pub enum Variant {
    /// Fixed-probability gossip, `γ`.
    Fp(f64),
    /// Probabilistic broadcast, `β`.
    Pb(f64),
    Ddf1(f64),
    Ddf2(f64),
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Fp(_) => "FP",
            Variant::Pb(_) => "PB",
            Variant::Ddf1(_) => "DDF1",
            Variant::Ddf2(_) => "DDF2",
        }
    }

    pub fn parameter(&self) -> f64 {
        match *self {
            Variant::Fp(v) | Variant::Pb(v) | Variant::Ddf1(v) | Variant::Ddf2(v) => v,
        }
    }

    pub fn with_parameter(&self, v: f64) -> Self {
        match self {
            Variant::Fp(_) => Variant::Fp(v),
            Variant::Pb(_) => Variant::Pb(v),
            Variant::Ddf1(_) => Variant::Ddf1(v),
            Variant::Ddf2(_) => Variant::Ddf2(v),
        }
    }

    /// The per-neighbor probability function, for the per-neighbor rules.
    pub fn gossip_function(&self) -> Option<GossipFunction> {
        match *self {
            Variant::Fp(g) => Some(GossipFunction::Fixed(g)),
            Variant::Pb(_) => None,
            Variant::Ddf1(a) => Some(GossipFunction::Ddf1(a)),
            Variant::Ddf2(a) => Some(GossipFunction::Ddf2(a)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Variant::Pb(b) if !(0.0..=1.0).contains(&b) => {
                Err(Error::param(format!("broadcast probability {b} not in [0, 1]")))
            }
            Variant::Pb(_) => Ok(()),
            _ => self.gossip_function().expect("per-neighbor rule").validate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub variant: Variant,
    pub initial_ttl: u32,
    /// Skip the neighbor a message arrived from when forwarding it.
    #[serde(default = "yes")]
    pub exclude_sender: bool,
    /// Neither count nor cache arrivals whose TTL is already exhausted.
    #[serde(default)]
    pub strict_reception: bool,
    /// Make a duplicate arrival the most recently used cache entry. Off, the
    /// duplicate check is a plain membership test and entries age from
    /// insertion.
    #[serde(default)]
    pub refresh_on_hit: bool,
}

fn yes() -> bool {
    true
}

impl ProtocolConfig {
    pub fn new(variant: Variant, initial_ttl: u32) -> Self {
        ProtocolConfig {
            variant,
            initial_ttl,
            exclude_sender: true,
            strict_reception: false,
            refresh_on_hit: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_ttl == 0 {
            return Err(Error::param("initial TTL must be at least 1"));
        }
        self.variant.validate()
    }
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub node_id: NodeId,
    pub cache: LruCache,
    /// Learned degree of each neighbor, aligned with the adjacency list;
    /// `0` until learned.
    pub neighbor_degrees: Vec<u32>,
    pub is_free_rider: bool,
    pub next_generation_at: Option<u32>,
}

/// Outcome of one arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reception {
    /// The message was not cached on arrival and the node counts it as
    /// received.
    pub received: bool,
    /// The copy sent to the targets appended to the output buffer, if any.
    pub forwarded: Option<Message>,
}

impl NodeState {
    pub fn new(node_id: NodeId, degree: usize, cache_capacity: usize) -> Self {
        NodeState {
            node_id,
            cache: LruCache::new(cache_capacity),
            neighbor_degrees: vec![0; degree],
            is_free_rider: false,
            next_generation_at: None,
        }
    }

    /// Learned degree of `neighbor`, if any.
    pub fn known_degree(&self, neighbors: &[NodeId], neighbor: NodeId) -> Option<u32> {
        let i = neighbors.binary_search(&neighbor).ok()?;
        Some(self.neighbor_degrees[i]).filter(|&d| d > 0)
    }

    /// Create message `id`, cache it and send it out as a first transmission.
    /// The outgoing copies keep the full TTL.
    pub fn on_generate<R: Rng + ?Sized>(
        &mut self,
        id: MessageId,
        now: u32,
        neighbors: &[NodeId],
        cfg: &ProtocolConfig,
        rng: &mut R,
        out: &mut Vec<NodeId>,
    ) -> Message {
        let from = out.len();
        let msg = self.on_generate_slots(id, now, cfg, rng, out);
        slots_to_ids(neighbors, out, from);
        msg
    }

    /// [`NodeState::on_generate`] appending the adjacency positions of the
    /// targets instead of their ids.
    pub fn on_generate_slots<R: Rng + ?Sized>(
        &mut self,
        id: MessageId,
        now: u32,
        cfg: &ProtocolConfig,
        rng: &mut R,
        out: &mut Vec<u32>,
    ) -> Message {
        let msg = Message {
            id,
            origin: self.node_id,
            created_at: now,
            ttl_remaining: cfg.initial_ttl,
            hops_traversed: 0,
            sender_degree: self.neighbor_degrees.len() as u32,
        };
        self.cache.insert(id);
        self.disseminate(cfg, true, None, rng, out);
        msg
    }

    /// Handle `msg` arriving from `sender`.
    pub fn on_receive<R: Rng + ?Sized>(
        &mut self,
        msg: &Message,
        sender: NodeId,
        neighbors: &[NodeId],
        cfg: &ProtocolConfig,
        rng: &mut R,
        out: &mut Vec<NodeId>,
    ) -> Result<Reception> {
        let slot = neighbors.binary_search(&sender).map_err(|_| {
            Error::Integrity(format!(
                "message {} reached node {} from non-neighbor {sender}",
                msg.id, self.node_id
            ))
        })?;
        let from = out.len();
        let rec = self.on_receive_slot(msg, slot, cfg, rng, out);
        slots_to_ids(neighbors, out, from);
        Ok(rec)
    }

    /// [`NodeState::on_receive`] with the sender given by its adjacency
    /// position, appending the positions of the targets.
    pub fn on_receive_slot<R: Rng + ?Sized>(
        &mut self,
        msg: &Message,
        slot: usize,
        cfg: &ProtocolConfig,
        rng: &mut R,
        out: &mut Vec<u32>,
    ) -> Reception {
        self.neighbor_degrees[slot] = msg.sender_degree;
        let ignored = Reception {
            received: false,
            forwarded: None,
        };
        if msg.ttl_remaining == 0 && cfg.strict_reception {
            if cfg.refresh_on_hit {
                self.cache.touch(msg.id);
            }
            return ignored;
        }
        if self.cache.check_insert(msg.id, cfg.refresh_on_hit) {
            return ignored;
        }
        let received = Reception {
            received: true,
            forwarded: None,
        };
        if msg.ttl_remaining == 0 || (self.is_free_rider && msg.origin != self.node_id) {
            return received;
        }
        let exclude = cfg.exclude_sender.then_some(slot);
        let before = out.len();
        self.disseminate(cfg, false, exclude, rng, out);
        let forwarded = (out.len() > before).then_some(Message {
            ttl_remaining: msg.ttl_remaining - 1,
            hops_traversed: msg.hops_traversed + 1,
            sender_degree: self.neighbor_degrees.len() as u32,
            ..*msg
        });
        Reception {
            forwarded,
            ..received
        }
    }

    fn disseminate<R: Rng + ?Sized>(
        &self,
        cfg: &ProtocolConfig,
        first_transmission: bool,
        exclude: Option<usize>,
        rng: &mut R,
        out: &mut Vec<u32>,
    ) {
        let emit = |i: usize| out.push(i as u32);
        let degree = self.neighbor_degrees.len();
        match cfg.variant {
            Variant::Fp(gamma) => fp_slots(degree, gamma, exclude, rng, emit),
            Variant::Pb(beta) => pb_slots(degree, beta, first_transmission, exclude, rng, emit),
            Variant::Ddf1(a) => ddf_slots(&GossipFunction::Ddf1(a), &self.neighbor_degrees, exclude, rng, emit),
            Variant::Ddf2(a) => ddf_slots(&GossipFunction::Ddf2(a), &self.neighbor_degrees, exclude, rng, emit),
        }
    }
}

/// Replace the adjacency positions appended after `from` by node ids.
fn slots_to_ids(neighbors: &[NodeId], out: &mut [NodeId], from: usize) {
    for x in &mut out[from..] {
        *x = neighbors[*x as usize];
    }
}
