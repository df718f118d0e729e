//! Round-synchronous routing programs run on the original network.
//!
//! In round `r` every node first emits one optional message per out-arc,
//! computed from its state after round `r - 1`; then it folds the messages
//! that arrived on its in-arcs into a new state. Programs must be
//! deterministic functions of their arguments. Randomised programs draw from
//! [`NodeContext::shared_random`], which is identical for all copies of a node.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Network, NodeId};
use crate::rng;

/// Messages are opaque; two messages are the same iff their bytes are.
pub type Message = Vec<u8>;

#[derive(Clone, Copy, Debug)]
pub struct NodeContext<'a> {
    pub node: NodeId,
    /// 0 during `init`, then 1, 2, ...
    pub round: usize,
    pub in_neighbors: &'a [NodeId],
    pub out_neighbors: &'a [NodeId],
    pub shared_random: u64,
}

impl<'a> NodeContext<'a> {
    pub(crate) fn new(g: &'a Network, node: NodeId, round: usize, shared_seed: u64) -> Self {
        Self {
            node,
            round,
            in_neighbors: g.in_neighbors(node),
            out_neighbors: g.out_neighbors(node),
            shared_random: rng::mix(shared_seed ^ rng::splitmix64(node.0 as u64), round as u64),
        }
    }
}

pub trait RoutingProgram: Sync {
    type State: Clone + Eq + fmt::Debug + Send + Sync;

    fn init(&self, ctx: &NodeContext<'_>) -> Self::State;

    /// One entry per out-neighbour, in `ctx.out_neighbors` order.
    fn send(&self, ctx: &NodeContext<'_>, state: &Self::State) -> Vec<Option<Message>>;

    /// `inbox` has one entry per in-neighbour, in `ctx.in_neighbors` order.
    fn receive(
        &self,
        ctx: &NodeContext<'_>,
        state: &Self::State,
        inbox: &[Option<Message>],
    ) -> Self::State;
}

/// A token starts at `source`; every node holding it forwards it on all
/// out-arcs every round.
#[derive(Clone, Copy, Debug)]
pub struct Flood {
    pub source: NodeId,
}

const TOKEN: &[u8] = b"token";

impl RoutingProgram for Flood {
    type State = bool;

    fn init(&self, ctx: &NodeContext<'_>) -> bool {
        ctx.node == self.source
    }

    fn send(&self, ctx: &NodeContext<'_>, state: &bool) -> Vec<Option<Message>> {
        vec![state.then(|| TOKEN.to_vec()); ctx.out_neighbors.len()]
    }

    fn receive(&self, _: &NodeContext<'_>, state: &bool, inbox: &[Option<Message>]) -> bool {
        *state || inbox.iter().any(|m| m.as_deref() == Some(TOKEN))
    }
}

/// Never sends anything.
#[derive(Clone, Copy, Debug, Default)]
pub struct Silent;

impl RoutingProgram for Silent {
    type State = ();

    fn init(&self, _: &NodeContext<'_>) {}

    fn send(&self, ctx: &NodeContext<'_>, _: &()) -> Vec<Option<Message>> {
        vec![None; ctx.out_neighbors.len()]
    }

    fn receive(&self, _: &NodeContext<'_>, _: &(), _: &[Option<Message>]) {}
}

/// Timed source routing: the message of route `i` is injected at `route[0]`
/// and crosses hop `h` (from `route[h-1]` to `route[h]`) in round `h`.
/// A node's state is the sorted list of route ids it has received.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathForwarding {
    routes: Vec<Vec<NodeId>>,
}

impl PathForwarding {
    pub fn new(g: &Network, routes: Vec<Vec<NodeId>>) -> Result<Self> {
        for (i, route) in routes.iter().enumerate() {
            if route.is_empty() {
                return Err(Error::Argument(format!("route {i} is empty")));
            }
            for hop in route.windows(2) {
                if !g.has_arc(hop[0], hop[1]) {
                    return Err(Error::Argument(format!(
                        "route {i} uses missing arc {}->{}",
                        hop[0], hop[1]
                    )));
                }
            }
        }
        Ok(Self { routes })
    }

    pub fn routes(&self) -> &[Vec<NodeId>] {
        &self.routes
    }

    /// Rounds needed until every route has arrived.
    pub fn horizon(&self) -> usize {
        self.routes.iter().map(|r| r.len() - 1).max().unwrap_or(0)
    }
}

impl RoutingProgram for PathForwarding {
    type State = Vec<u32>;

    fn init(&self, ctx: &NodeContext<'_>) -> Vec<u32> {
        (0..self.routes.len() as u32)
            .filter(|&i| self.routes[i as usize][0] == ctx.node)
            .collect()
    }

    fn send(&self, ctx: &NodeContext<'_>, state: &Vec<u32>) -> Vec<Option<Message>> {
        let r = ctx.round;
        ctx.out_neighbors
            .iter()
            .map(|&w| {
                let ids: Vec<u32> = state
                    .iter()
                    .copied()
                    .filter(|&i| {
                        let route = &self.routes[i as usize];
                        r < route.len() && route[r - 1] == ctx.node && route[r] == w
                    })
                    .collect();
                (!ids.is_empty()).then(|| ids.iter().flat_map(|i| i.to_le_bytes()).collect())
            })
            .collect()
    }

    /// Unknown route ids are dropped.
    fn receive(&self, _: &NodeContext<'_>, state: &Vec<u32>, inbox: &[Option<Message>]) -> Vec<u32> {
        let mut next = state.clone();
        for msg in inbox.iter().flatten() {
            next.extend(
                msg.chunks_exact(4)
                    .map(|c| u32::from_le_bytes(c.try_into().expect("4-byte chunk")))
                    .filter(|&i| (i as usize) < self.routes.len()),
            );
        }
        next.sort_unstable();
        next.dedup();
        next
    }
}

/// Pseudo-random deterministic automaton: sends and state transitions are
/// hashes of the state, round, arc position and shared randomness.
#[derive(Clone, Copy, Debug)]
pub struct RandomAutomaton {
    pub salt: u64,
}

impl RoutingProgram for RandomAutomaton {
    type State = u64;

    fn init(&self, ctx: &NodeContext<'_>) -> u64 {
        rng::mix(self.salt, ctx.node.0 as u64)
    }

    fn send(&self, ctx: &NodeContext<'_>, state: &u64) -> Vec<Option<Message>> {
        (0..ctx.out_neighbors.len())
            .map(|j| {
                let h = rng::mix(*state ^ self.salt ^ ctx.shared_random, j as u64);
                (!h.is_multiple_of(4)).then(|| h.to_le_bytes()[..1 + (h >> 8) as usize % 4].to_vec())
            })
            .collect()
    }

    fn receive(&self, ctx: &NodeContext<'_>, state: &u64, inbox: &[Option<Message>]) -> u64 {
        inbox.iter().fold(rng::mix(*state, ctx.round as u64), |acc, m| match m {
            None => rng::mix(acc, 0xdead),
            Some(bytes) => bytes
                .iter()
                .fold(rng::mix(acc, bytes.len() as u64), |a, &b| rng::mix(a, b as u64)),
        })
    }
}
