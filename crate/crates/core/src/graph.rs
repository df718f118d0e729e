//! Directed network model and synthetic topology generators.
//!
//! A [`Network`] is a simple directed graph on dense node indices `0..n`.
//! Arcs are kept sorted, so two networks with the same node count, arc set
//! and labels compare equal regardless of how they were built.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index into a [`Network`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
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

/// Where a network came from. Not part of its identity.
#[derive(Clone, Debug, Default)]
pub struct Origin {
    pub source: Option<String>,
    pub undirected: bool,
}

/// Degree summary over the undirected support.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegreeStats {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

#[derive(Clone, Debug)]
pub struct Network {
    n: usize,
    arcs: Vec<(NodeId, NodeId)>,
    labels: Option<Vec<String>>,
    origin: Origin,
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    arc_index: HashMap<(NodeId, NodeId), usize>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.arcs == other.arcs && self.labels == other.labels
    }
}

impl Eq for Network {}

impl Network {
    /// Builds a network from an explicit arc list.
    ///
    /// Self-loops, duplicate arcs and out-of-range endpoints are rejected; use
    /// [`Network::from_arcs_lenient`] to drop or collapse them instead.
    pub fn new(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (u, v) in arcs {
            if u >= n || v >= n {
                return Err(Error::InvalidNetwork(format!(
                    "arc ({u},{v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidNetwork(format!("self-loop at node {u}")));
            }
            if !seen.insert((NodeId(u), NodeId(v))) {
                return Err(Error::InvalidNetwork(format!("duplicate arc ({u},{v})")));
            }
        }
        Ok(Self::assemble(n, seen, None, Origin::default()))
    }

    /// Like [`Network::new`] but drops self-loops and collapses parallel arcs.
    pub fn from_arcs_lenient(
        n: usize,
        arcs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in arcs {
            if u >= n || v >= n {
                return Err(Error::InvalidNetwork(format!(
                    "arc ({u},{v}) has an endpoint outside 0..{n}"
                )));
            }
            if u != v {
                set.insert((NodeId(u), NodeId(v)));
            }
        }
        Ok(Self::assemble(n, set, None, Origin::default()))
    }

    /// Expands every undirected edge into two opposing arcs.
    pub fn from_undirected_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let arcs: Vec<_> = edges.into_iter().flat_map(|(u, v)| [(u, v), (v, u)]).collect();
        let mut g = Self::from_arcs_lenient(n, arcs)?;
        g.origin.undirected = true;
        Ok(g)
    }

    fn assemble(
        n: usize,
        arcs: BTreeSet<(NodeId, NodeId)>,
        labels: Option<Vec<String>>,
        origin: Origin,
    ) -> Self {
        let arcs: Vec<_> = arcs.into_iter().collect();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        let mut arc_index = HashMap::with_capacity(arcs.len());
        for (i, &(u, v)) in arcs.iter().enumerate() {
            out_adj[u.0].push(v);
            in_adj[v.0].push(u);
            arc_index.insert((u, v), i);
        }
        // arcs are sorted by (u, v), so out lists are sorted; in lists need it
        for list in &mut in_adj {
            list.sort_unstable();
        }
        Self {
            n,
            arcs,
            labels,
            origin,
            out_adj,
            in_adj,
            arc_index,
        }
    }

    /// Attaches per-node labels. Labels must be unique and cover every node.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidNetwork(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.n
            )));
        }
        let unique: BTreeSet<_> = labels.iter().collect();
        if unique.len() != labels.len() {
            return Err(Error::InvalidNetwork("node labels are not unique".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.n).map(NodeId)
    }

    /// Arcs in sorted `(tail, head)` order.
    pub fn arcs(&self) -> &[(NodeId, NodeId)] {
        &self.arcs
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, v: NodeId) -> Option<&str> {
        self.labels.as_ref().map(|l| l[v.0].as_str())
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    /// Out-neighbours of `v`, sorted.
    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.out_adj[v.0]
    }

    /// In-neighbours of `v`, sorted.
    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.in_adj[v.0]
    }

    pub fn has_arc(&self, u: NodeId, v: NodeId) -> bool {
        self.arc_index.contains_key(&(u, v))
    }

    /// Position of arc `(u, v)` in [`Network::arcs`].
    pub fn arc_id(&self, u: NodeId, v: NodeId) -> Option<usize> {
        self.arc_index.get(&(u, v)).copied()
    }

    /// Looks a node up by its label.
    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.labels
            .as_ref()?
            .iter()
            .position(|l| l == label)
            .map(NodeId)
    }

    /// Undirected support: each unordered pair `{u, v}` with an arc in either
    /// direction, reported once as `(min, max)`.
    pub fn undirected_edges(&self) -> Vec<(NodeId, NodeId)> {
        let set: BTreeSet<_> = self
            .arcs
            .iter()
            .map(|&(u, v)| if u < v { (u, v) } else { (v, u) })
            .collect();
        set.into_iter().collect()
    }

    pub fn undirected_edge_count(&self) -> usize {
        self.undirected_edges().len()
    }

    /// Neighbour lists of the undirected support.
    pub fn undirected_adjacency(&self) -> Vec<Vec<NodeId>> {
        let mut adj = vec![Vec::new(); self.n];
        for (u, v) in self.undirected_edges() {
            adj[u.0].push(v);
            adj[v.0].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Connectivity of the undirected support. The empty graph counts as connected.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let adj = self.undirected_adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w.0] {
                    seen[w.0] = true;
                    count += 1;
                    stack.push(w.0);
                }
            }
        }
        count == self.n
    }

    pub fn degree_stats(&self) -> DegreeStats {
        let adj = self.undirected_adjacency();
        let degrees: Vec<usize> = adj.iter().map(Vec::len).collect();
        let min = degrees.iter().copied().min().unwrap_or(0);
        let max = degrees.iter().copied().max().unwrap_or(0);
        let mean = if self.n == 0 {
            0.0
        } else {
            degrees.iter().sum::<usize>() as f64 / self.n as f64
        };
        DegreeStats { min, max, mean }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&NetworkJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: NetworkJson = serde_json::from_str(text)?;
        Self::try_from(wire)
    }
}

/// Canonical wire form `{n, arcs, labels}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkJson {
    pub n: usize,
    pub arcs: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl From<&Network> for NetworkJson {
    fn from(g: &Network) -> Self {
        Self {
            n: g.n,
            arcs: g.arcs.iter().map(|&(u, v)| [u.0, v.0]).collect(),
            labels: g.labels.clone(),
        }
    }
}

impl TryFrom<NetworkJson> for Network {
    type Error = Error;

    fn try_from(wire: NetworkJson) -> Result<Self> {
        let g = Network::new(wire.n, wire.arcs.into_iter().map(|[u, v]| (u, v)))?;
        match wire.labels {
            Some(labels) => g.with_labels(labels),
            None => Ok(g),
        }
    }
}

/// Path `0 -> 1 -> ... -> n-1`, arcs pointing in the direction of travel.
pub fn build_path(n: usize) -> Result<Network> {
    if n == 0 {
        return Err(Error::Argument("path needs at least one node".into()));
    }
    Network::new(n, (1..n).map(|i| (i - 1, i)))
}

/// `q`-ary `d`-dimensional hypercube (grid), optionally with torus wrap-around.
///
/// Node index is the lexicographic rank of its coordinate vector, most
/// significant coordinate first. Adjacent nodes get arcs in both directions.
pub fn build_hypercube(q: usize, d: usize, wrap: bool) -> Result<Network> {
    if q < 2 {
        return Err(Error::Argument(format!("hypercube arity q={q} must be >= 2")));
    }
    if d < 1 {
        return Err(Error::Argument(format!("hypercube dimension d={d} must be >= 1")));
    }
    let n = q
        .checked_pow(d as u32)
        .filter(|&n| n <= 1 << 24)
        .ok_or_else(|| Error::Argument(format!("hypercube {q}^{d} is too large")))?;
    let mut edges = Vec::new();
    for v in 0..n {
        let mut stride = 1;
        for _ in 0..d {
            let coord = (v / stride) % q;
            if coord + 1 < q {
                edges.push((v, v + stride));
            } else if wrap {
                edges.push((v, v - coord * stride));
            }
            stride *= q;
        }
    }
    Network::from_undirected_edges(n, edges)
}

/// Coordinates of hypercube node `v`, most significant first.
pub fn hypercube_coords(v: NodeId, q: usize, d: usize) -> Vec<usize> {
    let mut coords = vec![0; d];
    let mut rest = v.0;
    for slot in coords.iter_mut().rev() {
        *slot = rest % q;
        rest /= q;
    }
    coords
}
