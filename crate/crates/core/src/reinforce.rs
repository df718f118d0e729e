//! Node-replication reinforcement.
//!
//! Every node `v` is replaced by `ell` copies; copy `i` of `v` has the dense
//! id `v + i * n`. An arc `(v, w)` whose endpoints share a region becomes the
//! `ell` parallel arcs `(v_i, w_i)`. An arc across regions becomes the full
//! bipartite set `(v_i, w_j)`. With the singleton partition every arc is a
//! crossing arc and the construction is the strong one.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Network, NetworkJson, NodeId};
use crate::partition::{singleton_partition, Partition, PartitionJson};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultKind {
    Omission,
    Byzantine,
}

impl FaultKind {
    /// Copies per node needed to tolerate `f` faulty copies.
    pub fn copies(self, f: usize) -> usize {
        match self {
            FaultKind::Omission => f + 1,
            FaultKind::Byzantine => 2 * f + 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FaultKind::Omission => "omission",
            FaultKind::Byzantine => "byzantine",
        }
    }
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FaultKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "om" | "omission" => Ok(FaultKind::Omission),
            "byz" | "byzantine" => Ok(FaultKind::Byzantine),
            other => Err(Error::Argument(format!("unknown fault model `{other}`"))),
        }
    }
}

/// A fault model with its per-node fault probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaultModel {
    pub kind: FaultKind,
    pub p: f64,
}

impl FaultModel {
    pub fn new(kind: FaultKind, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("fault probability {p} outside [0, 1]")));
        }
        Ok(Self { kind, p })
    }
}

/// Dense id of a node copy in the reinforced network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CopyId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReinforcedNetwork {
    base: Network,
    partition: Partition,
    kind: FaultKind,
    f: usize,
    ell: usize,
    intra_arcs: usize,
    cross_arcs: usize,
}

/// Node and edge overheads as exact ratios.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Overheads {
    pub nu: Ratio<usize>,
    pub eta: Ratio<usize>,
}

impl Overheads {
    /// The unreinforced network.
    pub fn identity() -> Self {
        Self {
            nu: Ratio::from_integer(1),
            eta: Ratio::from_integer(1),
        }
    }

    pub fn nu_f64(&self) -> f64 {
        ratio_f64(self.nu)
    }

    pub fn eta_f64(&self) -> f64 {
        ratio_f64(self.eta)
    }
}

pub(crate) fn ratio_f64(r: Ratio<usize>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Strong reinforcement: all `ell^2` copies of every arc.
pub fn reinforce_strong(g: &Network, f: usize, kind: FaultKind) -> Result<ReinforcedNetwork> {
    reinforce_partitioned(g, &singleton_partition(g), f, kind)
}

/// Partition-aware reinforcement.
pub fn reinforce_partitioned(
    g: &Network,
    part: &Partition,
    f: usize,
    kind: FaultKind,
) -> Result<ReinforcedNetwork> {
    if f < 1 {
        return Err(Error::Argument("fault parameter f must be >= 1".into()));
    }
    if part.node_count() != g.node_count() {
        return Err(Error::Argument(format!(
            "partition covers {} nodes, network has {}",
            part.node_count(),
            g.node_count()
        )));
    }
    let intra_arcs = g
        .arcs()
        .iter()
        .filter(|&&(u, v)| part.same_region(u, v))
        .count();
    Ok(ReinforcedNetwork {
        base: g.clone(),
        partition: part.clone(),
        kind,
        f,
        ell: kind.copies(f),
        intra_arcs,
        cross_arcs: g.arc_count() - intra_arcs,
    })
}

pub fn overheads(rn: &ReinforcedNetwork) -> Overheads {
    rn.overheads()
}

impl ReinforcedNetwork {
    pub fn base(&self) -> &Network {
        &self.base
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn kind(&self) -> FaultKind {
        self.kind
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn is_strong(&self) -> bool {
        self.partition.is_singleton()
    }

    pub fn copy_count(&self) -> usize {
        self.base.node_count() * self.ell
    }

    #[inline]
    pub fn copy(&self, v: NodeId, i: usize) -> CopyId {
        debug_assert!(i < self.ell);
        CopyId(v.0 + i * self.base.node_count())
    }

    /// The projection `P`: the original node a copy stands for.
    #[inline]
    pub fn project(&self, c: CopyId) -> NodeId {
        NodeId(c.0 % self.base.node_count())
    }

    #[inline]
    pub fn copy_index(&self, c: CopyId) -> usize {
        c.0 / self.base.node_count()
    }

    pub fn copies_of(&self, v: NodeId) -> impl Iterator<Item = CopyId> + '_ {
        (0..self.ell).map(move |i| self.copy(v, i))
    }

    pub fn is_cross(&self, u: NodeId, v: NodeId) -> bool {
        !self.partition.same_region(u, v)
    }

    /// Copies of `w` wired to `receiver` for the base arc `(w, P(receiver))`:
    /// the matching-index copy inside a region, every copy across regions.
    pub fn senders(&self, w: NodeId, receiver: CopyId) -> Senders {
        let v = self.project(receiver);
        if self.is_cross(w, v) {
            Senders {
                start: w.0,
                step: self.base.node_count(),
                len: self.ell,
            }
        } else {
            Senders {
                start: self.copy(w, self.copy_index(receiver)).0,
                step: 0,
                len: 1,
            }
        }
    }

    /// Number of arcs of the reinforced graph.
    pub fn arc_count(&self) -> usize {
        self.intra_arcs * self.ell + self.cross_arcs * self.ell * self.ell
    }

    pub fn intra_arc_count(&self) -> usize {
        self.intra_arcs
    }

    pub fn cross_arc_count(&self) -> usize {
        self.cross_arcs
    }

    /// All copy arcs, grouped by base arc in base order.
    pub fn copy_arcs(&self) -> impl Iterator<Item = (CopyId, CopyId)> + '_ {
        self.base.arcs().iter().flat_map(move |&(u, v)| {
            let cross = self.is_cross(u, v);
            let ell = self.ell;
            (0..ell).flat_map(move |i| {
                let targets = if cross { 0..ell } else { i..i + 1 };
                targets.map(move |j| (self.copy(u, i), self.copy(v, j)))
            })
        })
    }

    pub fn overheads(&self) -> Overheads {
        let m = self.base.arc_count();
        Overheads {
            nu: Ratio::from_integer(self.ell),
            eta: if m == 0 {
                Ratio::from_integer(0)
            } else {
                Ratio::new(self.arc_count(), m)
            },
        }
    }

    /// The reinforced graph as a plain [`Network`] on copy ids.
    pub fn to_network(&self) -> Network {
        Network::new(self.copy_count(), self.copy_arcs().map(|(a, b)| (a.0, b.0)))
            .expect("copy arcs are simple")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ReinforcedJson::from(self))?)
    }

    /// Rebuilds from JSON and checks the stored arc list against the rule.
    pub fn from_json(text: &str) -> Result<Self> {
        let wire: ReinforcedJson = serde_json::from_str(text)?;
        let base = Network::try_from(wire.base)?;
        let partition = wire.partition.into_partition(base.node_count())?;
        let rn = reinforce_partitioned(&base, &partition, wire.f, wire.model)?;
        if rn.ell != wire.ell {
            return Err(Error::InvalidNetwork(format!(
                "ell={} does not match {} copies for f={}",
                wire.ell, rn.ell, wire.f
            )));
        }
        let expected: Vec<[usize; 2]> = rn.copy_arcs().map(|(a, b)| [a.0, b.0]).collect();
        let mut got = wire.arcs;
        got.sort_unstable();
        let mut want = expected;
        want.sort_unstable();
        if got != want {
            return Err(Error::InvalidNetwork(
                "arc list does not follow the reinforcement rule".into(),
            ));
        }
        Ok(rn)
    }
}

/// Iterator over sender copy ids; see [`ReinforcedNetwork::senders`].
#[derive(Clone, Debug)]
pub struct Senders {
    start: usize,
    step: usize,
    len: usize,
}

impl Iterator for Senders {
    type Item = CopyId;

    fn next(&mut self) -> Option<CopyId> {
        (self.len > 0).then(|| {
            let c = CopyId(self.start);
            self.start += self.step;
            self.len -= 1;
            c
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.len, Some(self.len))
    }
}

impl ExactSizeIterator for Senders {}

/// Wire form `{base, ell, f, model, partition, arcs}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReinforcedJson {
    pub base: NetworkJson,
    pub ell: usize,
    pub f: usize,
    pub model: FaultKind,
    pub partition: PartitionJson,
    pub arcs: Vec<[usize; 2]>,
}

impl From<&ReinforcedNetwork> for ReinforcedJson {
    fn from(rn: &ReinforcedNetwork) -> Self {
        Self {
            base: NetworkJson::from(&rn.base),
            ell: rn.ell,
            f: rn.f,
            model: rn.kind,
            partition: PartitionJson::from(&rn.partition),
            arcs: rn.copy_arcs().map(|(a, b)| [a.0, b.0]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_hypercube, build_path};
    use crate::partition::Partition;
    use std::collections::BTreeSet;

    fn five_node() -> Network {
        Network::from_undirected_edges(5, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (1, 4)]).unwrap()
    }

    fn three_regions() -> Partition {
        Partition::from_assignment(&[0, 0, 0, 1, 1]).unwrap()
    }

    #[test]
    fn strong_overheads() {
        let g = five_node();
        let byz = reinforce_strong(&g, 1, FaultKind::Byzantine).unwrap().overheads();
        assert_eq!((byz.nu, byz.eta), (Ratio::from_integer(3), Ratio::from_integer(9)));
        let om = reinforce_strong(&g, 1, FaultKind::Omission).unwrap().overheads();
        assert_eq!((om.nu, om.eta), (Ratio::from_integer(2), Ratio::from_integer(4)));
        let byz2 = reinforce_strong(&g, 2, FaultKind::Byzantine).unwrap().overheads();
        assert_eq!(byz2.eta, Ratio::from_integer(25));
    }

    #[test]
    fn single_arc_copies() {
        let g = build_path(2).unwrap();
        let rn = reinforce_strong(&g, 1, FaultKind::Omission).unwrap();
        let arcs: Vec<_> = rn.copy_arcs().map(|(a, b)| (a.0, b.0)).collect();
        assert_eq!(arcs, vec![(0, 1), (0, 3), (2, 1), (2, 3)]);
    }

    #[test]
    fn rejects_zero_f() {
        assert!(reinforce_strong(&five_node(), 0, FaultKind::Omission).is_err());
    }

    #[test]
    fn five_node_partitioned() {
        let rn = reinforce_partitioned(&five_node(), &three_regions(), 1, FaultKind::Omission).unwrap();
        let o = rn.overheads();
        assert_eq!(o.nu, Ratio::from_integer(2));
        assert_eq!(o.eta, Ratio::new(8, 3));
        assert!((o.eta_f64() - 2.67).abs() < 0.005);
        // naive duplication
        let whole = Partition::whole(&five_node()).unwrap();
        let o = reinforce_partitioned(&five_node(), &whole, 1, FaultKind::Omission).unwrap().overheads();
        assert_eq!((o.nu, o.eta), (Ratio::from_integer(2), Ratio::from_integer(2)));
    }

    #[test]
    fn one_fifth_cut() {
        // 6-path halves: 1 of 5 edges crosses
        let g = build_path(6).unwrap();
        let p = Partition::from_assignment(&[0, 0, 0, 1, 1, 1]).unwrap();
        let om = reinforce_partitioned(&g, &p, 1, FaultKind::Omission).unwrap().overheads();
        assert_eq!(om.eta, Ratio::new(12, 5));
        let byz = reinforce_partitioned(&g, &p, 1, FaultKind::Byzantine).unwrap().overheads();
        assert_eq!(byz.eta, Ratio::new(21, 5));
    }

    #[test]
    fn edge_rule_exhaustive() {
        let g = build_hypercube(3, 2, false).unwrap();
        let p = Partition::from_assignment(&[0, 0, 1, 0, 0, 1, 2, 2, 1]).unwrap();
        for kind in [FaultKind::Omission, FaultKind::Byzantine] {
            let rn = reinforce_partitioned(&g, &p, 2, kind).unwrap();
            let ell = rn.ell();
            let got: BTreeSet<_> = rn.copy_arcs().collect();
            assert_eq!(got.len(), rn.arc_count());
            let n = g.node_count();
            for a in 0..n * ell {
                for b in 0..n * ell {
                    let (ca, cb) = (CopyId(a), CopyId(b));
                    let (u, v) = (rn.project(ca), rn.project(cb));
                    let expected = g.has_arc(u, v)
                        && (!p.same_region(u, v) || rn.copy_index(ca) == rn.copy_index(cb));
                    assert_eq!(got.contains(&(ca, cb)), expected, "{a}->{b}");
                }
            }
        }
    }

    #[test]
    fn strong_equals_singleton_partitioned() {
        let g = five_node();
        let a = reinforce_strong(&g, 2, FaultKind::Byzantine).unwrap();
        let b = reinforce_partitioned(&g, &singleton_partition(&g), 2, FaultKind::Byzantine).unwrap();
        assert_eq!(a.copy_arcs().collect::<Vec<_>>(), b.copy_arcs().collect::<Vec<_>>());
    }

    #[test]
    fn senders_follow_rule() {
        let rn = reinforce_partitioned(&five_node(), &three_regions(), 1, FaultKind::Byzantine).unwrap();
        // d_2 (copy index 1) hearing from c across regions: every copy of c
        let from_c: Vec<_> = rn.senders(NodeId(2), rn.copy(NodeId(3), 1)).collect();
        assert_eq!(from_c, vec![CopyId(2), CopyId(7), CopyId(12)]);
        // e_2 hearing from d inside the region: only d_2
        let from_d: Vec<_> = rn.senders(NodeId(3), rn.copy(NodeId(4), 1)).collect();
        assert_eq!(from_d, vec![CopyId(8)]);
    }

    #[test]
    fn json_round_trip_and_tamper() {
        let rn = reinforce_partitioned(&five_node(), &three_regions(), 1, FaultKind::Omission).unwrap();
        let text = rn.to_json().unwrap();
        assert_eq!(ReinforcedNetwork::from_json(&text).unwrap(), rn);
        let mut wire: ReinforcedJson = serde_json::from_str(&text).unwrap();
        wire.arcs.pop();
        assert!(ReinforcedNetwork::from_json(&serde_json::to_string(&wire).unwrap()).is_err());
    }

    #[test]
    fn to_network_counts() {
        let rn = reinforce_partitioned(&five_node(), &three_regions(), 1, FaultKind::Omission).unwrap();
        assert_eq!(rn.to_network().arc_count(), 32);
    }
}
