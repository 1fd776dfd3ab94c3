//! Neighbor selection rules. Each appends the chosen neighbors to `out` in
//! adjacency order.
//!
//! The per-neighbor rules (fixed probability and degree-dependent) draw
//! exactly one uniform number per eligible neighbor, whatever the outcome,
//! so two rules that assign equal probabilities select identical sets from
//! identical generator states.

use rand::Rng;

use crate::theory::GossipFunction;
use crate::topology::NodeId;

/// Fixed-probability gossip: each eligible neighbor independently with
/// probability `gamma`.
pub fn forward_fp<R: Rng + ?Sized>(
    neighbors: &[NodeId],
    gamma: f64,
    exclude: Option<NodeId>,
    rng: &mut R,
    out: &mut Vec<NodeId>,
) {
    let ex = position(neighbors, exclude);
    fp_slots(neighbors.len(), gamma, ex, rng, |i| out.push(neighbors[i]));
}

/// Probabilistic broadcast: everyone on the first transmission, otherwise all
/// eligible neighbors with probability `beta` and nobody else.
pub fn forward_pb<R: Rng + ?Sized>(
    neighbors: &[NodeId],
    beta: f64,
    first_transmission: bool,
    exclude: Option<NodeId>,
    rng: &mut R,
    out: &mut Vec<NodeId>,
) {
    let ex = position(neighbors, exclude);
    pb_slots(neighbors.len(), beta, first_transmission, ex, rng, |i| out.push(neighbors[i]));
}

/// Degree-dependent gossip. `known_degrees[i]` is the learned degree of
/// `neighbors[i]`, `0` when not yet known; unknown neighbors are always
/// selected.
pub fn forward_ddf<R: Rng + ?Sized>(
    neighbors: &[NodeId],
    gossip: &GossipFunction,
    known_degrees: &[u32],
    exclude: Option<NodeId>,
    rng: &mut R,
    out: &mut Vec<NodeId>,
) {
    debug_assert_eq!(neighbors.len(), known_degrees.len());
    let ex = position(neighbors, exclude);
    ddf_slots(gossip, known_degrees, ex, rng, |i| out.push(neighbors[i]));
}

fn position(neighbors: &[NodeId], v: Option<NodeId>) -> Option<usize> {
    v.and_then(|v| neighbors.iter().position(|&u| u == v))
}

// The slot forms work on adjacency positions; `exclude` is a position too.

pub(crate) fn fp_slots<R: Rng + ?Sized>(
    degree: usize,
    gamma: f64,
    exclude: Option<usize>,
    rng: &mut R,
    mut emit: impl FnMut(usize),
) {
    for i in 0..degree {
        if exclude != Some(i) && rng.random::<f64>() < gamma {
            emit(i);
        }
    }
}

pub(crate) fn pb_slots<R: Rng + ?Sized>(
    degree: usize,
    beta: f64,
    first_transmission: bool,
    exclude: Option<usize>,
    rng: &mut R,
    emit: impl FnMut(usize),
) {
    if first_transmission {
        (0..degree).for_each(emit);
    } else if rng.random::<f64>() < beta {
        (0..degree).filter(|&i| exclude != Some(i)).for_each(emit);
    }
}

pub(crate) fn ddf_slots<R: Rng + ?Sized>(
    gossip: &GossipFunction,
    known_degrees: &[u32],
    exclude: Option<usize>,
    rng: &mut R,
    mut emit: impl FnMut(usize),
) {
    for (i, &d) in known_degrees.iter().enumerate() {
        if exclude == Some(i) {
            continue;
        }
        let u = rng.random::<f64>();
        if d == 0 || u < gossip.eval(d as usize) {
            emit(i);
        }
    }
}
