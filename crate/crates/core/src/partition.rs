//! Region partitions of a network and the partitioners that produce them.
//!
//! Cut accounting is done on the undirected support: an unordered pair with
//! arcs in both directions counts once.

use std::collections::VecDeque;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{hypercube_coords, Network, NodeId};
use crate::rng;

/// Disjoint regions covering `0..n`, stored in canonical form: members sorted,
/// regions ordered by their smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    regions: Vec<Vec<NodeId>>,
    region_of: Vec<usize>,
}

impl Partition {
    pub fn new(n: usize, regions: Vec<Vec<NodeId>>) -> Result<Self> {
        let mut regions = regions;
        for r in &mut regions {
            if r.is_empty() {
                return Err(Error::InvalidPartition("empty region".into()));
            }
            r.sort_unstable();
        }
        regions.sort_unstable_by_key(|r| r[0]);
        let mut region_of = vec![usize::MAX; n];
        for (k, r) in regions.iter().enumerate() {
            for &v in r {
                let slot = region_of.get_mut(v.0).ok_or_else(|| {
                    Error::InvalidPartition(format!("node {v} outside 0..{n}"))
                })?;
                if *slot != usize::MAX {
                    return Err(Error::InvalidPartition(format!("node {v} in two regions")));
                }
                *slot = k;
            }
        }
        if let Some(v) = region_of.iter().position(|&k| k == usize::MAX) {
            return Err(Error::InvalidPartition(format!("node {v} is not covered")));
        }
        if n == 0 {
            return Err(Error::InvalidPartition("partition of an empty node set".into()));
        }
        Ok(Self { regions, region_of })
    }

    /// Builds a partition from a per-node region label. Labels need not be dense.
    pub fn from_assignment(labels: &[usize]) -> Result<Self> {
        let mut order: Vec<usize> = labels.to_vec();
        order.sort_unstable();
        order.dedup();
        let mut regions = vec![Vec::new(); order.len()];
        for (v, label) in labels.iter().enumerate() {
            let k = order.binary_search(label).expect("label collected above");
            regions[k].push(NodeId(v));
        }
        Self::new(labels.len(), regions)
    }

    /// One region holding every node.
    pub fn whole(g: &Network) -> Result<Self> {
        Self::new(g.node_count(), vec![g.nodes().collect()])
    }

    pub fn node_count(&self) -> usize {
        self.region_of.len()
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    pub fn regions(&self) -> &[Vec<NodeId>] {
        &self.regions
    }

    pub fn region_of(&self, v: NodeId) -> usize {
        self.region_of[v.0]
    }

    pub fn same_region(&self, u: NodeId, v: NodeId) -> bool {
        self.region_of[u.0] == self.region_of[v.0]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.regions.iter().map(Vec::len).collect()
    }

    pub fn is_singleton(&self) -> bool {
        self.regions.len() == self.region_of.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&PartitionJson::from(self))?)
    }

    /// Parses `{regions: [[ids...], ...]}` for a network with `n` nodes.
    pub fn from_json(text: &str, n: usize) -> Result<Self> {
        let wire: PartitionJson = serde_json::from_str(text)?;
        wire.into_partition(n)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionJson {
    pub regions: Vec<Vec<usize>>,
}

impl From<&Partition> for PartitionJson {
    fn from(p: &Partition) -> Self {
        Self {
            regions: p
                .regions
                .iter()
                .map(|r| r.iter().map(|v| v.0).collect())
                .collect(),
        }
    }
}

impl PartitionJson {
    pub fn into_partition(self, n: usize) -> Result<Partition> {
        Partition::new(
            n,
            self.regions
                .into_iter()
                .map(|r| r.into_iter().map(NodeId).collect())
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutStats {
    pub regions: usize,
    pub cut_edges: usize,
    pub total_edges: usize,
    /// `cut_edges / total_edges`, zero for an edgeless graph.
    pub epsilon: Ratio<usize>,
    pub r_min: usize,
    pub r_max: usize,
}

impl CutStats {
    pub fn epsilon_f64(&self) -> f64 {
        *self.epsilon.numer() as f64 / *self.epsilon.denom() as f64
    }
}

pub fn cut_stats(g: &Network, part: &Partition) -> Result<CutStats> {
    if part.node_count() != g.node_count() {
        return Err(Error::Argument(format!(
            "partition covers {} nodes, network has {}",
            part.node_count(),
            g.node_count()
        )));
    }
    let edges = g.undirected_edges();
    let cut_edges = edges
        .iter()
        .filter(|&&(u, v)| !part.same_region(u, v))
        .count();
    let sizes = part.sizes();
    let epsilon = if edges.is_empty() {
        Ratio::from_integer(0)
    } else {
        Ratio::new(cut_edges, edges.len())
    };
    Ok(CutStats {
        regions: part.region_count(),
        cut_edges,
        total_edges: edges.len(),
        epsilon,
        r_min: sizes.iter().copied().min().unwrap_or(0),
        r_max: sizes.iter().copied().max().unwrap_or(0),
    })
}

/// Every node in its own region.
pub fn singleton_partition(g: &Network) -> Partition {
    Partition::new(g.node_count(), g.nodes().map(|v| vec![v]).collect())
        .expect("singletons always form a partition")
}

/// Axis-aligned `h`-ary subcubes of the `q`-ary `d`-dimensional hypercube.
pub fn partition_hypercube(q: usize, d: usize, h: usize) -> Result<Partition> {
    if h == 0 || q == 0 || !q.is_multiple_of(h) {
        return Err(Error::Argument(format!("subcube side h={h} must divide q={q}")));
    }
    if d == 0 {
        return Err(Error::Argument("dimension must be >= 1".into()));
    }
    let n = q
        .checked_pow(d as u32)
        .ok_or_else(|| Error::Argument(format!("hypercube {q}^{d} is too large")))?;
    let blocks = q / h;
    let labels: Vec<usize> = (0..n)
        .map(|v| {
            hypercube_coords(NodeId(v), q, d)
                .into_iter()
                .fold(0, |acc, c| acc * blocks + c / h)
        })
        .collect();
    Partition::from_assignment(&labels)
}

const FIEDLER_TOLERANCE: f64 = 1e-8;
const FIEDLER_SEED: u64 = 0x5eed_f1ed_1e55;
const START_JITTER: f64 = 1e-3;

/// Recursive spectral bisection until every region has at most `max_region`
/// nodes.
///
/// Regions are first split into connected components. A connected region
/// that is still too large is cut by the sign of its Fiedler vector, zero
/// entries going to the non-negative side; if one side comes out empty the
/// split falls back to the median. Final regions are always connected.
pub fn partition_spectral(g: &Network, max_region: usize) -> Result<Partition> {
    if max_region == 0 {
        return Err(Error::Argument("max_region must be >= 1".into()));
    }
    if g.node_count() == 0 {
        return Err(Error::Argument("cannot partition an empty network".into()));
    }
    let adj = g.undirected_adjacency();
    let mut queue = VecDeque::from([g.nodes().collect::<Vec<_>>()]);
    let mut done = Vec::new();
    while let Some(region) = queue.pop_front() {
        let components = components_within(&adj, &region);
        if components.len() > 1 {
            queue.extend(components);
            continue;
        }
        if region.len() <= max_region {
            done.push(region);
            continue;
        }
        let (left, right) = fiedler_split(&adj, &region);
        queue.push_back(left);
        queue.push_back(right);
    }
    Partition::new(g.node_count(), done)
}

fn local_index(region: &[NodeId], n: usize) -> Vec<Option<usize>> {
    let mut local = vec![None; n];
    for (i, v) in region.iter().enumerate() {
        local[v.0] = Some(i);
    }
    local
}

fn components_within(adj: &[Vec<NodeId>], region: &[NodeId]) -> Vec<Vec<NodeId>> {
    let local = local_index(region, adj.len());
    let mut comp = vec![usize::MAX; region.len()];
    let mut out = Vec::new();
    for start in 0..region.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![region[start]];
        comp[start] = id;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for w in &adj[region[i].0] {
                if let Some(j) = local[w.0] {
                    if comp[j] == usize::MAX {
                        comp[j] = id;
                        members.push(region[j]);
                        stack.push(j);
                    }
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Fiedler vector of the unnormalised Laplacian of the subgraph induced by
/// `region`, computed by power iteration on `c*I - L` with the constant
/// vector projected out each step.
pub fn fiedler_vector(adj: &[Vec<NodeId>], region: &[NodeId]) -> Vec<f64> {
    let s = region.len();
    if s < 2 {
        return vec![0.0; s];
    }
    let local = local_index(region, adj.len());
    let neighbours: Vec<Vec<usize>> = region
        .iter()
        .map(|v| adj[v.0].iter().filter_map(|w| local[w.0]).collect())
        .collect();
    let max_degree = neighbours.iter().map(Vec::len).max().unwrap_or(0);
    let shift = (2 * max_degree).max(1) as f64;

    // index ramp plus a small seeded jitter keeps the start vector
    // deterministic and away from any eigenvector orthogonal to it
    let centre = (s as f64 - 1.0) / 2.0;
    let mut x: Vec<f64> = (0..s)
        .map(|i| {
            let jitter = rng::unit(FIEDLER_SEED, region[i].0 as u64) - 0.5;
            i as f64 - centre + START_JITTER * centre.max(1.0) * jitter
        })
        .collect();
    deflate_and_normalise(&mut x);

    let mut y = vec![0.0; s];
    for _ in 0..10 * s {
        for i in 0..s {
            let lx = neighbours[i].len() as f64 * x[i]
                - neighbours[i].iter().map(|&j| x[j]).sum::<f64>();
            y[i] = shift * x[i] - lx;
        }
        deflate_and_normalise(&mut y);
        let change = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        std::mem::swap(&mut x, &mut y);
        if change < FIEDLER_TOLERANCE {
            break;
        }
    }
    x
}

fn deflate_and_normalise(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

fn fiedler_split(adj: &[Vec<NodeId>], region: &[NodeId]) -> (Vec<NodeId>, Vec<NodeId>) {
    let x = fiedler_vector(adj, region);
    let (mut pos, mut neg): (Vec<_>, Vec<_>) =
        (0..region.len()).partition(|&i| x[i] >= 0.0);
    if pos.is_empty() || neg.is_empty() {
        let mut order: Vec<usize> = (0..region.len()).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(region[a].cmp(&region[b])));
        let half = region.len() / 2;
        neg = order[..half].to_vec();
        pos = order[half..].to_vec();
    }
    let pick = |idx: Vec<usize>| idx.into_iter().map(|i| region[i]).collect::<Vec<_>>();
    (pick(neg), pick(pos))
}

/// Largest network accepted by [`partition_brute_force`].
pub const BRUTE_FORCE_MAX_NODES: usize = 13;

/// Exhaustive search over partitions into connected regions of at most
/// `max_region` nodes, minimising cut edges, then region count, then the
/// region-assignment vector in lexicographic order.
pub fn partition_brute_force(g: &Network, max_region: usize) -> Result<Partition> {
    let n = g.node_count();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::TooLarge(format!(
            "brute-force partitioning supports at most {BRUTE_FORCE_MAX_NODES} nodes, got {n}"
        )));
    }
    if max_region == 0 {
        return Err(Error::Argument("max_region must be >= 1".into()));
    }
    if n == 0 {
        return Err(Error::Argument("cannot partition an empty network".into()));
    }
    let nbr: Vec<u32> = g
        .undirected_adjacency()
        .iter()
        .map(|list| list.iter().fold(0u32, |m, w| m | 1 << w.0))
        .collect();
    let mut search = BruteForce {
        nbr,
        max_region,
        assign: vec![0; n],
        best: None,
    };
    search.run((1u32 << n) - 1, 0, 0);
    let (_, _, assign) = search.best.expect("singletons are always feasible");
    Partition::from_assignment(&assign)
}

struct BruteForce {
    nbr: Vec<u32>,
    max_region: usize,
    assign: Vec<usize>,
    best: Option<(usize, usize, Vec<usize>)>,
}

impl BruteForce {
    fn run(&mut self, unassigned: u32, k: usize, cut: usize) {
        if unassigned == 0 {
            let candidate = (cut, k, self.assign.clone());
            if self.best.as_ref().is_none_or(|b| candidate < *b) {
                self.best = Some(candidate);
            }
            return;
        }
        if let Some((best_cut, best_k, _)) = &self.best {
            let bound = cut + self.cut_lower_bound(unassigned);
            if bound > *best_cut || (bound == *best_cut && k + 1 > *best_k) {
                return;
            }
        }
        let root = unassigned.trailing_zeros() as usize;
        let mut sets = Vec::new();
        self.connected_sets(unassigned, 1 << root, self.nbr[root] & unassigned, 0, &mut sets);
        let mut scored: Vec<(usize, u32)> = sets
            .into_iter()
            .map(|s| (self.boundary(s, unassigned & !s), s))
            .collect();
        // cheap boundaries first so good incumbents appear early
        scored.sort_unstable_by_key(|&(delta, s)| (delta, std::cmp::Reverse(s.count_ones()), s));
        for (delta, set) in scored {
            for v in bits(set) {
                self.assign[v] = k;
            }
            self.run(unassigned & !set, k + 1, cut + delta);
        }
    }

    fn boundary(&self, set: u32, rest: u32) -> usize {
        bits(set).map(|v| (self.nbr[v] & rest).count_ones() as usize).sum()
    }

    /// Every node with more unassigned neighbours than fit in its region
    /// must lose the excess; each cut edge is seen from at most two ends.
    fn cut_lower_bound(&self, unassigned: u32) -> usize {
        let excess: usize = bits(unassigned)
            .map(|v| {
                ((self.nbr[v] & unassigned).count_ones() as usize)
                    .saturating_sub(self.max_region - 1)
            })
            .sum();
        excess.div_ceil(2)
    }

    /// Connected subsets of `allowed` that contain `current`, each once.
    fn connected_sets(&self, allowed: u32, current: u32, ext: u32, forbid: u32, out: &mut Vec<u32>) {
        out.push(current);
        if current.count_ones() as usize >= self.max_region {
            return;
        }
        let mut rest = ext;
        let mut forbid = forbid;
        while rest != 0 {
            let w = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let grown = current | 1 << w;
            let next_ext = (rest | (self.nbr[w] & allowed)) & !grown & !forbid;
            self.connected_sets(allowed, grown, next_ext, forbid, out);
            forbid |= 1 << w;
        }
    }
}

fn bits(mut mask: u32) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        (mask != 0).then(|| {
            let v = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            v
        })
    })
}
