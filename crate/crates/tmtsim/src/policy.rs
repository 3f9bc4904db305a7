//! A reference online controller for demand-aware switches.
//!
//! The controller keeps an exponentially decayed count of traffic per
//! source-destination pair, greedily proposes a matching that connects the
//! heaviest pairs directly, and reconfigures only when the weight gained
//! clears a threshold proportional to the adjustment cost. The model itself
//! prescribes no particular algorithm; this is a deliberately simple,
//! deterministic baseline.

use std::cmp::Reverse;
use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{AdjustmentMode, Matching, NodeId, Request};
use crate::rational::{int, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("node {node} is outside 0..{n}")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("decay must be in (0, 1], got {decay}")]
    DecayOutOfRange { decay: String },
    #[error("decision epoch must be at least 1")]
    EpochZero,
    #[error("threshold theta must be non-negative")]
    NegativeTheta,
}

/// Decayed per-pair traffic counts. With `decay = 1` this is a plain
/// frequency count; smaller values weight recent requests more.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandMatrix {
    n: usize,
    decay: Rational,
    weights: BTreeMap<(NodeId, NodeId), Rational>,
}

impl DemandMatrix {
    pub fn new(n: usize, decay: Rational) -> Result<Self, PolicyError> {
        if decay <= Rational::zero() || decay > Rational::one() {
            return Err(PolicyError::DecayOutOfRange {
                decay: crate::rational::format_decimal(&decay),
            });
        }
        Ok(DemandMatrix {
            n,
            decay,
            weights: BTreeMap::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Decays every weight, then credits the request's pair with 1.
    pub fn record_request(&mut self, request: &Request) -> Result<(), PolicyError> {
        for node in [request.src, request.dst] {
            if node.index() >= self.n {
                return Err(PolicyError::NodeOutOfRange { node, n: self.n });
            }
        }
        if !self.decay.is_one() {
            for weight in self.weights.values_mut() {
                *weight *= &self.decay;
            }
        }
        let entry = self
            .weights
            .entry((request.src, request.dst))
            .or_insert_with(Rational::zero);
        *entry += Rational::one();
        Ok(())
    }

    /// The weight of one pair; absent pairs weigh 0.
    pub fn weight(&self, src: NodeId, dst: NodeId) -> Rational {
        self.weights
            .get(&(src, dst))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Total weight of the pairs a matching connects directly.
    pub fn matching_weight(&self, matching: &Matching) -> Rational {
        matching
            .edges()
            .iter()
            .map(|e| self.weight(e.src, e.dst))
            .sum()
    }

    /// Pairs with strictly positive weight.
    pub fn positive_pairs(&self) -> impl Iterator<Item = (NodeId, NodeId, &Rational)> {
        self.weights
            .iter()
            .filter(|(_, w)| **w > Rational::zero())
            .map(|((s, d), w)| (*s, *d, w))
    }
}

/// Controller parameters, exposed through the simulation config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyParams {
    /// Decision interval in slots; proposals are evaluated when
    /// `t % epoch == 0`.
    pub epoch: u64,
    /// Reconfiguration threshold: reconfigure only if the weight gain
    /// exceeds `theta * alpha * (change magnitude)`.
    pub theta: Rational,
    pub decay: Rational,
}

impl PolicyParams {
    pub fn validate(&self) -> Result<(), PolicyError> {
        if self.epoch == 0 {
            return Err(PolicyError::EpochZero);
        }
        if self.theta < Rational::zero() {
            return Err(PolicyError::NegativeTheta);
        }
        if self.decay <= Rational::zero() || self.decay > Rational::one() {
            return Err(PolicyError::DecayOutOfRange {
                decay: crate::rational::format_decimal(&self.decay),
            });
        }
        Ok(())
    }
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            epoch: 1,
            theta: Rational::zero(),
            decay: Rational::one(),
        }
    }
}

/// Greedily builds a matching over the heaviest pairs: scan pairs by weight
/// descending (ties broken by ascending `(src, dst)` so runs are
/// reproducible) and take each pair whose source and destination are both
/// still free.
pub fn propose_matching(matrix: &DemandMatrix) -> Matching {
    let mut pairs: Vec<(NodeId, NodeId, &Rational)> = matrix.positive_pairs().collect();
    pairs.sort_by(|a, b| (Reverse(a.2), a.0, a.1).cmp(&(Reverse(b.2), b.0, b.1)));

    let mut used_src = vec![false; matrix.n()];
    let mut used_dst = vec![false; matrix.n()];
    let mut edges = Vec::new();
    for (src, dst, _) in pairs {
        if !used_src[src.index()] && !used_dst[dst.index()] {
            used_src[src.index()] = true;
            used_dst[dst.index()] = true;
            edges.push(crate::model::DirectedEdge::new(src, dst));
        }
    }
    Matching::new(edges, matrix.n()).expect("greedy construction cannot violate the invariants")
}

/// Decides whether replacing `current` with `proposed` is worth it: the
/// weight gained must strictly exceed `theta * alpha * magnitude`, where the
/// magnitude is the number of newly installed edges under the edge-distance
/// regime and 1 under the per-switch and no-direct-cost regimes.
pub fn decide_reconfig(
    current: &Matching,
    proposed: &Matching,
    matrix: &DemandMatrix,
    params: &PolicyParams,
    alpha: &Rational,
    mode: AdjustmentMode,
) -> bool {
    if proposed == current {
        return false;
    }
    let magnitude = match mode {
        AdjustmentMode::EdgeDistance => proposed.edges_not_in(current) as u64,
        AdjustmentMode::SwitchCost | AdjustmentMode::NoDirectCost(_) => 1,
    };
    let gain = matrix.matching_weight(proposed) - matrix.matching_weight(current);
    gain > &params.theta * alpha * int(magnitude)
}
