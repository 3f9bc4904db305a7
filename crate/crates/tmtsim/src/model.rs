//! Domain types for the ToR-matching-ToR network model.
//!
//! `n` top-of-rack nodes are interconnected by `k` spine switches. Each
//! switch realizes one directed [`Matching`] over the nodes at a time, and
//! the network seen by a request is the union of the switches' currently
//! active edges, captured as a [`NetworkSnapshot`] with per-switch
//! provenance.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::rational::{int, Rational};

/// A node (top-of-rack switch), indexed `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(usize);

impl NodeId {
    pub fn new(index: usize) -> Self {
        NodeId(index)
    }

    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A directed port-to-port connection from `src` to `dst`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectedEdge {
    pub src: NodeId,
    pub dst: NodeId,
}

impl DirectedEdge {
    pub fn new(src: NodeId, dst: NodeId) -> Self {
        DirectedEdge { src, dst }
    }
}

impl fmt::Display for DirectedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}->{})", self.src, self.dst)
    }
}

/// Convenience constructor for an edge between raw indices.
pub fn edge(src: usize, dst: usize) -> DirectedEdge {
    DirectedEdge::new(NodeId::new(src), NodeId::new(dst))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("edge {edge} is a self-loop")]
    SelfLoop { edge: DirectedEdge },
    #[error("edge {edge} references a node outside 0..{n}")]
    NodeOutOfRange { edge: DirectedEdge, n: usize },
    #[error("edge {edge} duplicates source {node}")]
    DuplicateSource { edge: DirectedEdge, node: NodeId },
    #[error("edge {edge} duplicates destination {node}")]
    DuplicateDestination { edge: DirectedEdge, node: NodeId },
    #[error("shift amount {shift} is not in 1..{n}")]
    InvalidShift { shift: usize, n: usize },
    #[error("matching is defined for {matching_n} nodes, expected {expected_n}")]
    NodeCountMismatch {
        matching_n: usize,
        expected_n: usize,
    },
    #[error("static switch {switch_id} must have a pool of exactly 1 matching, got {len}")]
    StaticPoolSize { switch_id: usize, len: usize },
    #[error("rotor switch {switch_id} must have a pool of at least 2 matchings, got {len}")]
    RotorPoolSize { switch_id: usize, len: usize },
    #[error("rotor switch {switch_id} must have a rotation period of at least 1")]
    RotorPeriodZero { switch_id: usize },
    #[error("request at t={t} has identical source and destination {node}")]
    SelfRequest { t: u64, node: NodeId },
}

/// A set of directed edges with pairwise-distinct sources and destinations:
/// a partial permutation of the `n` ports. May leave ports idle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    edges: BTreeSet<DirectedEdge>,
    n: usize,
}

impl Matching {
    /// Validates an edge set as a matching over `n` nodes: every node in
    /// range, no self-loops, no source or destination used twice.
    pub fn new(
        edges: impl IntoIterator<Item = DirectedEdge>,
        n: usize,
    ) -> Result<Self, ModelError> {
        let mut seen_src = BTreeSet::new();
        let mut seen_dst = BTreeSet::new();
        let mut set = BTreeSet::new();
        for e in edges {
            if e.src.index() >= n || e.dst.index() >= n {
                return Err(ModelError::NodeOutOfRange { edge: e, n });
            }
            if e.src == e.dst {
                return Err(ModelError::SelfLoop { edge: e });
            }
            if !seen_src.insert(e.src) {
                return Err(ModelError::DuplicateSource { edge: e, node: e.src });
            }
            if !seen_dst.insert(e.dst) {
                return Err(ModelError::DuplicateDestination { edge: e, node: e.dst });
            }
            set.insert(e);
        }
        Ok(Matching { edges: set, n })
    }

    /// The empty matching (all ports idle).
    pub fn empty(n: usize) -> Self {
        Matching {
            edges: BTreeSet::new(),
            n,
        }
    }

    /// The circulant permutation connecting every node `i` to `(i + shift) % n`.
    pub fn shift(n: usize, shift: usize) -> Result<Self, ModelError> {
        if shift == 0 || shift >= n {
            return Err(ModelError::InvalidShift { shift, n });
        }
        let edges = (0..n).map(|i| edge(i, (i + shift) % n));
        Matching::new(edges, n)
    }

    pub fn edges(&self) -> &BTreeSet<DirectedEdge> {
        &self.edges
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: &DirectedEdge) -> bool {
        self.edges.contains(e)
    }

    /// Number of edges present here but not in `other` (`|self \ other|`).
    pub fn edges_not_in(&self, other: &Matching) -> usize {
        self.edges.difference(&other.edges).count()
    }

    /// Edges present in both matchings.
    pub fn intersection(&self, other: &Matching) -> BTreeSet<DirectedEdge> {
        self.edges.intersection(&other.edges).copied().collect()
    }
}

/// What kind of controller drives a switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchKind {
    /// The matching never changes.
    Static,
    /// Cycles round-robin through its pool every `period` time slots.
    Rotor { period: u64 },
    /// Matching chosen at runtime by the demand-aware policy.
    DemandAware,
}

impl SwitchKind {
    pub fn is_rotor(self) -> bool {
        matches!(self, SwitchKind::Rotor { .. })
    }
}

/// Which edges a reconfiguring switch withholds from the network while the
/// adjustment is in progress.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InactivityScope {
    /// The entire matching is unavailable for the reconfiguration window.
    WholeSwitch,
    /// Only the changing edges are unavailable; edges shared by the old and
    /// new matching keep forwarding.
    ChangedEdgesOnly,
}

/// How matching changes are priced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjustmentMode {
    /// `alpha` per newly installed edge, summed over switches.
    EdgeDistance,
    /// `alpha` per switch whose matching changed, however many edges moved.
    SwitchCost,
    /// No direct charge; the price is paid through edge inactivity during
    /// the reconfiguration window.
    NoDirectCost(InactivityScope),
}

/// Per-switch configuration: controller kind, allowed matchings, and the
/// reconfiguration latency `beta` in time slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchConfig {
    pub switch_id: usize,
    pub kind: SwitchKind,
    /// Allowed matchings. Exactly one for `Static`, at least two for
    /// `Rotor`; may be empty for `DemandAware` (an optional single entry
    /// seeds the initial matching).
    pub pool: Vec<Matching>,
    /// Slots during which reconfiguring edges are unavailable (the paper's
    /// per-switch reconfiguration time).
    pub beta: u64,
}

impl SwitchConfig {
    pub fn fixed(switch_id: usize, matching: Matching) -> Self {
        SwitchConfig {
            switch_id,
            kind: SwitchKind::Static,
            pool: vec![matching],
            beta: 0,
        }
    }

    pub fn rotor(switch_id: usize, pool: Vec<Matching>, period: u64, beta: u64) -> Self {
        SwitchConfig {
            switch_id,
            kind: SwitchKind::Rotor { period },
            pool,
            beta,
        }
    }

    pub fn demand_aware(switch_id: usize, beta: u64) -> Self {
        SwitchConfig {
            switch_id,
            kind: SwitchKind::DemandAware,
            pool: Vec::new(),
            beta,
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), ModelError> {
        match self.kind {
            SwitchKind::Static => {
                if self.pool.len() != 1 {
                    return Err(ModelError::StaticPoolSize {
                        switch_id: self.switch_id,
                        len: self.pool.len(),
                    });
                }
            }
            SwitchKind::Rotor { period } => {
                if self.pool.len() < 2 {
                    return Err(ModelError::RotorPoolSize {
                        switch_id: self.switch_id,
                        len: self.pool.len(),
                    });
                }
                if period == 0 {
                    return Err(ModelError::RotorPeriodZero {
                        switch_id: self.switch_id,
                    });
                }
            }
            SwitchKind::DemandAware => {}
        }
        for matching in &self.pool {
            if matching.n() != n {
                return Err(ModelError::NodeCountMismatch {
                    matching_n: matching.n(),
                    expected_n: n,
                });
            }
        }
        Ok(())
    }
}

/// One communication request: at time slot `t`, node `src` talks to `dst`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Request {
    pub t: u64,
    pub src: NodeId,
    pub dst: NodeId,
}

impl Request {
    pub fn new(t: u64, src: NodeId, dst: NodeId) -> Result<Self, ModelError> {
        if src == dst {
            return Err(ModelError::SelfRequest { t, node: src });
        }
        Ok(Request { t, src, dst })
    }
}

/// The demand sequence: exactly one request per time slot, `t = 1..=m`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    requests: Vec<Request>,
}

impl Trace {
    /// Builds a trace from source-destination pairs, assigning consecutive
    /// time slots starting at 1.
    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, ModelError> {
        let requests = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (src, dst))| Request::new(i as u64 + 1, src, dst))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Trace { requests })
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// Largest node index referenced, if any.
    pub fn max_node(&self) -> Option<usize> {
        self.requests
            .iter()
            .map(|r| r.src.index().max(r.dst.index()))
            .max()
    }
}

/// Cost-model parameters shared by all switches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostParams {
    /// Per-unit adjustment cost.
    pub alpha: Rational,
    pub adj_mode: AdjustmentMode,
    /// Service cost charged for a request with no path. Must strictly exceed
    /// `n - 1`, the longest feasible shortest path, so it dominates every
    /// reachable cost.
    pub unreachable_penalty: Rational,
}

impl CostParams {
    /// Parameters with the default penalty of `n`.
    pub fn new(alpha: Rational, adj_mode: AdjustmentMode, n: usize) -> Self {
        CostParams {
            alpha,
            adj_mode,
            unreachable_penalty: int(n as u64),
        }
    }
}

/// The union of all switches' active edges at one time slot, each edge
/// tagged with the switch that provides it. Parallel edges from different
/// switches stay distinct; the restriction to any one switch is a valid
/// matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSnapshot {
    n: usize,
    edges: BTreeSet<(usize, DirectedEdge)>,
}

/// Builds the provenance-tagged union of per-switch active edge sets. Each
/// per-switch set must itself satisfy the matching invariants.
pub fn union_snapshot(
    active_sets: &[(usize, BTreeSet<DirectedEdge>)],
    n: usize,
) -> Result<NetworkSnapshot, ModelError> {
    let mut edges = BTreeSet::new();
    for (switch_id, set) in active_sets {
        Matching::new(set.iter().copied(), n)?;
        for e in set {
            edges.insert((*switch_id, *e));
        }
    }
    Ok(NetworkSnapshot { n, edges })
}

impl NetworkSnapshot {
    pub fn n(&self) -> usize {
        self.n
    }

    /// All provenance-tagged edges, ordered by `(switch_id, edge)`.
    pub fn tagged_edges(&self) -> impl Iterator<Item = (usize, DirectedEdge)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of active edges contributed by one switch.
    pub fn switch_edge_count(&self, switch_id: usize) -> usize {
        self.edges.iter().filter(|(s, _)| *s == switch_id).count()
    }

    /// Out-neighbour adjacency lists over the union graph, with parallel
    /// edges collapsed (hop counts do not care about multiplicity).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (_, e) in &self.edges {
            let out = &mut adj[e.src.index()];
            if !out.contains(&e.dst.index()) {
                out.push(e.dst.index());
            }
        }
        adj
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_edge_set_is_a_valid_matching() {
        let m = Matching::new([], 4).unwrap();
        assert!(m.is_empty());
        assert_eq!(m.n(), 4);
    }

    #[test]
    fn shift_permutation_is_valid() {
        let m = Matching::new([edge(0, 1), edge(1, 2), edge(2, 3), edge(3, 0)], 4).unwrap();
        assert_eq!(m.len(), 4);
        assert_eq!(m, Matching::shift(4, 1).unwrap());
    }

    #[test]
    fn duplicate_destination_names_the_edge() {
        let err = Matching::new([edge(0, 1), edge(2, 1)], 4).unwrap_err();
        assert_eq!(
            err,
            ModelError::DuplicateDestination {
                edge: edge(2, 1),
                node: NodeId::new(1),
            }
        );
    }

    #[test]
    fn duplicate_source_self_loop_and_range_are_rejected() {
        assert!(matches!(
            Matching::new([edge(0, 1), edge(0, 2)], 4),
            Err(ModelError::DuplicateSource { .. })
        ));
        assert!(matches!(
            Matching::new([edge(2, 2)], 4),
            Err(ModelError::SelfLoop { .. })
        ));
        assert!(matches!(
            Matching::new([edge(0, 4)], 4),
            Err(ModelError::NodeOutOfRange { .. })
        ));
    }

    #[test]
    fn union_of_empty_sets_is_empty() {
        let snapshot =
            union_snapshot(&[(0, BTreeSet::new()), (1, BTreeSet::new())], 4).unwrap();
        assert_eq!(snapshot.edge_count(), 0);
    }

    #[test]
    fn parallel_edges_from_different_switches_stay_distinct() {
        let set: BTreeSet<_> = [edge(0, 1)].into();
        let snapshot = union_snapshot(&[(0, set.clone()), (1, set)], 4).unwrap();
        assert_eq!(snapshot.edge_count(), 2);
        assert_eq!(snapshot.switch_edge_count(0), 1);
        assert_eq!(snapshot.switch_edge_count(1), 1);
        // hop counts collapse multiplicity
        assert_eq!(snapshot.adjacency()[0], vec![1]);
    }

    #[test]
    fn disjoint_union_keeps_both_edges() {
        let a: BTreeSet<_> = [edge(0, 1)].into();
        let b: BTreeSet<_> = [edge(1, 2)].into();
        let snapshot = union_snapshot(&[(0, a), (1, b)], 4).unwrap();
        let edges: Vec<_> = snapshot.tagged_edges().collect();
        assert_eq!(edges, vec![(0, edge(0, 1)), (1, edge(1, 2))]);
    }

    #[test]
    fn union_propagates_matching_violations() {
        let bad: BTreeSet<_> = [edge(0, 1), edge(2, 1)].into();
        assert!(union_snapshot(&[(0, bad)], 4).is_err());
    }

    #[test]
    fn shift_zero_is_rejected() {
        assert!(matches!(
            Matching::shift(4, 0),
            Err(ModelError::InvalidShift { .. })
        ));
        assert!(Matching::shift(4, 4).is_err());
    }

    #[test]
    fn trace_assigns_consecutive_slots_from_one() {
        let trace =
            Trace::from_pairs([(NodeId::new(0), NodeId::new(1)), (NodeId::new(1), NodeId::new(2))])
                .unwrap();
        let ts: Vec<_> = trace.requests().iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![1, 2]);
    }

    #[test]
    fn trace_rejects_self_requests() {
        let err = Trace::from_pairs([(NodeId::new(3), NodeId::new(3))]).unwrap_err();
        assert!(matches!(err, ModelError::SelfRequest { t: 1, .. }));
    }

    /// Independent pairwise check used to cross-validate `Matching::new`.
    fn brute_force_valid(edges: &[DirectedEdge], n: usize) -> bool {
        for (i, a) in edges.iter().enumerate() {
            if a.src == a.dst || a.src.index() >= n || a.dst.index() >= n {
                return false;
            }
            for b in &edges[..i] {
                if a.src == b.src || a.dst == b.dst {
                    return false;
                }
            }
        }
        true
    }

    fn arbitrary_edges(n: usize) -> impl Strategy<Value = Vec<DirectedEdge>> {
        prop::collection::vec((0..n * 2, 0..n * 2), 0..=n).prop_map(|pairs| {
            pairs.into_iter().map(|(s, d)| edge(s, d)).collect()
        })
    }

    proptest! {
        #[test]
        fn validation_agrees_with_pairwise_brute_force(
            n in 1usize..8,
            edges in arbitrary_edges(6),
        ) {
            let unique: Vec<_> = edges
                .iter()
                .copied()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            prop_assert_eq!(
                Matching::new(unique.iter().copied(), n).is_ok(),
                brute_force_valid(&unique, n)
            );
        }

        #[test]
        fn union_is_order_independent(
            seed_sets in prop::collection::vec(arbitrary_edges(5), 1..4),
        ) {
            let n = 10;
            // keep only valid per-switch matchings
            let sets: Vec<(usize, BTreeSet<DirectedEdge>)> = seed_sets
                .into_iter()
                .enumerate()
                .filter_map(|(i, edges)| {
                    Matching::new(edges, n).ok().map(|m| (i, m.edges().clone()))
                })
                .collect();
            prop_assume!(!sets.is_empty());
            let forward = union_snapshot(&sets, n).unwrap();
            let mut reversed = sets.clone();
            reversed.reverse();
            let backward = union_snapshot(&reversed, n).unwrap();
            prop_assert_eq!(forward, backward);
        }

        #[test]
        fn snapshot_per_switch_restriction_is_a_matching(
            seed_sets in prop::collection::vec(arbitrary_edges(5), 1..4),
        ) {
            let n = 10;
            let sets: Vec<(usize, BTreeSet<DirectedEdge>)> = seed_sets
                .into_iter()
                .enumerate()
                .filter_map(|(i, edges)| {
                    Matching::new(edges, n).ok().map(|m| (i, m.edges().clone()))
                })
                .collect();
            prop_assume!(!sets.is_empty());
            let snapshot = union_snapshot(&sets, n).unwrap();
            for (switch_id, _) in &sets {
                let restricted: Vec<_> = snapshot
                    .tagged_edges()
                    .filter(|(s, _)| s == switch_id)
                    .map(|(_, e)| e)
                    .collect();
                prop_assert!(Matching::new(restricted, n).is_ok());
            }
        }
    }
}
