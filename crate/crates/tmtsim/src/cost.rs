//! Service and adjustment cost functions, and the per-run cost ledger.
//!
//! Serving a request costs its shortest-path hop count on the current
//! snapshot. Changing matchings costs either `alpha` per replaced edge
//! (edge distance), `alpha` per changed switch (switch cost), or nothing at
//! all (no direct cost, where the price is paid through edge inactivity
//! instead — see the switch dynamics module).

use std::collections::VecDeque;

use num_traits::Zero;
use thiserror::Error;

use crate::model::{AdjustmentMode, CostParams, Matching, NetworkSnapshot, NodeId, Request};
use crate::rational::{int, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CostError {
    #[error("node {node} is outside 0..{n}")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("matching lists differ in length: {prev} vs {next}")]
    LengthMismatch { prev: usize, next: usize },
}

/// Shortest-path hop count from `request.src` to `request.dst` over the
/// snapshot's active edges (directed breadth-first search). Returns
/// `(unreachable_penalty, true)` when no path exists.
pub fn service_cost(
    request: &Request,
    snapshot: &NetworkSnapshot,
    params: &CostParams,
) -> Result<(Rational, bool), CostError> {
    let n = snapshot.n();
    for node in [request.src, request.dst] {
        if node.index() >= n {
            return Err(CostError::NodeOutOfRange { node, n });
        }
    }
    match bfs_distance(&snapshot.adjacency(), request.src.index(), request.dst.index()) {
        Some(hops) => Ok((int(hops as u64), false)),
        None => Ok((params.unreachable_penalty.clone(), true)),
    }
}

fn bfs_distance(adjacency: &[Vec<usize>], src: usize, dst: usize) -> Option<usize> {
    let mut dist = vec![usize::MAX; adjacency.len()];
    let mut queue = VecDeque::new();
    dist[src] = 0;
    queue.push_back(src);
    while let Some(node) = queue.pop_front() {
        for &next in &adjacency[node] {
            if dist[next] == usize::MAX {
                dist[next] = dist[node] + 1;
                if next == dst {
                    return Some(dist[next]);
                }
                queue.push_back(next);
            }
        }
    }
    None
}

fn check_lengths(prev: &[Matching], next: &[Matching]) -> Result<(), CostError> {
    if prev.len() != next.len() {
        return Err(CostError::LengthMismatch {
            prev: prev.len(),
            next: next.len(),
        });
    }
    Ok(())
}

/// Edge-distance adjustment: `alpha` times the number of newly installed
/// edges, summed over switches (`alpha * sum_i |next[i] \ prev[i]|`).
pub fn edge_distance_cost(
    prev: &[Matching],
    next: &[Matching],
    alpha: &Rational,
) -> Result<Rational, CostError> {
    check_lengths(prev, next)?;
    let replaced: u64 = prev
        .iter()
        .zip(next)
        .map(|(p, q)| q.edges_not_in(p) as u64)
        .sum();
    Ok(alpha * int(replaced))
}

/// Switch-cost adjustment: `alpha` per switch whose matching changed,
/// regardless of how many edges moved.
pub fn switch_change_cost(
    prev: &[Matching],
    next: &[Matching],
    alpha: &Rational,
) -> Result<Rational, CostError> {
    check_lengths(prev, next)?;
    let changed = prev.iter().zip(next).filter(|(p, q)| p != q).count() as u64;
    Ok(alpha * int(changed))
}

/// No-direct-cost adjustment: always zero. Reconfiguration is paid for
/// implicitly, through edges being inactive for `beta` slots.
pub fn no_direct_cost(_prev: &[Matching], _next: &[Matching], _alpha: &Rational) -> Rational {
    Rational::zero()
}

/// Dispatches to the adjustment function selected by `mode`.
pub fn adjustment_cost(
    mode: AdjustmentMode,
    prev: &[Matching],
    next: &[Matching],
    alpha: &Rational,
) -> Result<Rational, CostError> {
    match mode {
        AdjustmentMode::EdgeDistance => edge_distance_cost(prev, next, alpha),
        AdjustmentMode::SwitchCost => switch_change_cost(prev, next, alpha),
        AdjustmentMode::NoDirectCost(_) => Ok(no_direct_cost(prev, next, alpha)),
    }
}

/// Costs charged while serving one request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepCost {
    pub t: u64,
    pub srv: Rational,
    pub adj: Rational,
    pub unreachable: bool,
}

/// Per-step costs plus running totals. `push` keeps the totals equal to the
/// sums of the recorded steps, so `total == total_srv + total_adj` holds by
/// construction; `replay_verify` re-checks it from the raw steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostLedger {
    pub steps: Vec<StepCost>,
    pub total_srv: Rational,
    pub total_adj: Rational,
    pub total: Rational,
    pub unreachable_count: u64,
}

impl CostLedger {
    pub fn new() -> Self {
        CostLedger {
            steps: Vec::new(),
            total_srv: Rational::zero(),
            total_adj: Rational::zero(),
            total: Rational::zero(),
            unreachable_count: 0,
        }
    }

    pub fn push(&mut self, step: StepCost) {
        self.total_srv += &step.srv;
        self.total_adj += &step.adj;
        self.total += &step.srv + &step.adj;
        if step.unreachable {
            self.unreachable_count += 1;
        }
        self.steps.push(step);
    }
}

impl Default for CostLedger {
    fn default() -> Self {
        CostLedger::new()
    }
}
