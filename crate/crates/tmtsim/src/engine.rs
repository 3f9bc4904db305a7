//! The per-slot simulation loop and its result types.
//!
//! Each slot `t` proceeds: finalize due reconfigurations, build the snapshot
//! from every switch's active edges, serve the request at shortest-path
//! cost, record demand, let controllers act (rotors first, then demand-aware
//! switches, in switch-id order), and charge the adjustment cost of whatever
//! changed. Requests are served before new reconfigurations take hold, so a
//! change decided at slot `t` first affects slot `t+1`.
//!
//! Under the directly-charged adjustment modes a committed change replaces
//! the matching immediately; under the no-direct-cost modes it starts a
//! reconfiguration job whose edges sit out the next `beta` slots instead.
//! Adjustment is always charged on the committed (nominal) matchings, so the
//! charge never depends on `beta`.

use num_traits::Zero;
use thiserror::Error;

use crate::cost::{adjustment_cost, service_cost, CostError, CostLedger, StepCost};
use crate::model::{
    union_snapshot, AdjustmentMode, CostParams, Matching, ModelError, NodeId, SwitchConfig,
    SwitchKind, Trace,
};
use crate::policy::{decide_reconfig, propose_matching, DemandMatrix, PolicyError, PolicyParams};
use crate::rational::{int, Rational};
use crate::switch::{SwitchError, SwitchState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("config lists {got} switches but k = {expected}")]
    SwitchCountMismatch { expected: usize, got: usize },
    #[error("switch at position {position} has switch_id {switch_id}; ids must equal positions")]
    SwitchIdMismatch { position: usize, switch_id: usize },
    #[error("config has a demand-aware switch but no policy parameters")]
    MissingPolicy,
    #[error("alpha must be non-negative")]
    NegativeAlpha,
    #[error(
        "unreachable_penalty must strictly exceed n - 1 = {max_distance} so it dominates every \
         feasible path length"
    )]
    PenaltyTooSmall { max_distance: usize },
    #[error("trace request at t={t} references node {node} outside 0..{n}")]
    TraceMismatch { t: u64, node: NodeId, n: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Switch(#[from] SwitchError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// A complete simulation instance: topology size, switches, cost model,
/// controller parameters, and a seed echoed into reports (reserved for
/// randomized controllers; the built-in ones are deterministic).
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub k: usize,
    pub switches: Vec<SwitchConfig>,
    pub cost: CostParams,
    /// Required when any switch is demand-aware.
    pub policy: Option<PolicyParams>,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.switches.len() != self.k {
            return Err(EngineError::SwitchCountMismatch {
                expected: self.k,
                got: self.switches.len(),
            });
        }
        for (position, switch) in self.switches.iter().enumerate() {
            if switch.switch_id != position {
                return Err(EngineError::SwitchIdMismatch {
                    position,
                    switch_id: switch.switch_id,
                });
            }
            switch.validate(self.n)?;
        }
        if self.cost.alpha < Rational::zero() {
            return Err(EngineError::NegativeAlpha);
        }
        let max_distance = self.n.saturating_sub(1);
        if self.cost.unreachable_penalty <= int(max_distance as u64) {
            return Err(EngineError::PenaltyTooSmall { max_distance });
        }
        let has_demand_aware = self
            .switches
            .iter()
            .any(|s| s.kind == SwitchKind::DemandAware);
        match &self.policy {
            Some(policy) => policy.validate()?,
            None if has_demand_aware => return Err(EngineError::MissingPolicy),
            None => {}
        }
        Ok(())
    }
}

/// Everything a run produces: the ledger, per-switch reconfiguration
/// counts, the mean hop count over reachable requests, and a per-slot
/// record of how many active edges each switch contributed.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub ledger: CostLedger,
    /// Committed matching changes per switch (rotations, accepted
    /// proposals, and begun jobs alike).
    pub per_switch_reconfig_counts: Vec<u64>,
    /// Mean shortest-path hop count over the reachable requests; 0 if none
    /// were reachable. Unreachable penalties are excluded — they are not
    /// hops.
    pub mean_hop_count: Rational,
    /// For each slot, the number of active edges each switch contributed
    /// to the snapshot (`log[t-1][i]` for slot `t`, switch `i`).
    pub snapshot_log: Option<Vec<Vec<usize>>>,
}

/// Runs the simulation loop over the whole trace.
pub fn run(config: &SimConfig, trace: &Trace) -> Result<SimResult, EngineError> {
    config.validate()?;
    for request in trace.requests() {
        for node in [request.src, request.dst] {
            if node.index() >= config.n {
                return Err(EngineError::TraceMismatch {
                    t: request.t,
                    node,
                    n: config.n,
                });
            }
        }
    }

    let mut switches: Vec<SwitchState> = config
        .switches
        .iter()
        .map(|sc| SwitchState::initial(sc.clone(), config.n))
        .collect::<Result<_, _>>()?;
    let has_demand_aware = config
        .switches
        .iter()
        .any(|s| s.kind == SwitchKind::DemandAware);
    let policy = config.policy.clone().unwrap_or_default();
    let mut matrix = if has_demand_aware {
        Some(DemandMatrix::new(config.n, policy.decay.clone())?)
    } else {
        None
    };

    let mode = config.cost.adj_mode;
    let alpha = &config.cost.alpha;
    let mut prev_nominal: Vec<Matching> =
        switches.iter().map(|s| s.nominal().clone()).collect();
    let mut ledger = CostLedger::new();
    let mut reconfig_counts = vec![0u64; config.k];
    let mut snapshot_log = Vec::with_capacity(trace.len());
    let mut reachable_hops = Rational::zero();
    let mut reachable_count: u64 = 0;

    for request in trace.requests() {
        let t = request.t;

        // 1. finalize reconfigurations that became ready
        for switch in &mut switches {
            switch.finalize_due(t);
        }

        // 2. snapshot of all active edges
        let active_sets: Vec<_> = switches
            .iter()
            .map(|s| (s.switch_id(), s.active_edges(t)))
            .collect();
        let snapshot = union_snapshot(&active_sets, config.n)?;
        snapshot_log.push(
            (0..config.k)
                .map(|i| snapshot.switch_edge_count(i))
                .collect::<Vec<_>>(),
        );

        // 3. serve the request
        let (srv, unreachable) = service_cost(request, &snapshot, &config.cost)?;
        if !unreachable {
            reachable_hops += &srv;
            reachable_count += 1;
        }

        // 4. record demand
        if let Some(matrix) = &mut matrix {
            matrix.record_request(request)?;
        }

        // 5. controllers: rotors first, then demand-aware, in id order
        for i in 0..switches.len() {
            if switches[i].config().kind.is_rotor() {
                if let Some(target) = switches[i].rotor_due_target(t)? {
                    commit_change(&mut switches[i], target, t, mode)?;
                    reconfig_counts[i] += 1;
                }
            }
        }
        if let Some(matrix) = &matrix {
            if t % policy.epoch == 0 {
                for i in 0..switches.len() {
                    let switch = &switches[i];
                    if switch.config().kind != SwitchKind::DemandAware
                        || switch.pending().is_some()
                    {
                        continue;
                    }
                    let proposed = propose_matching(matrix);
                    if decide_reconfig(switch.current(), &proposed, matrix, &policy, alpha, mode)
                    {
                        commit_change(&mut switches[i], proposed, t, mode)?;
                        reconfig_counts[i] += 1;
                    }
                }
            }
        }

        // 6. charge the adjustment on committed matchings
        let next_nominal: Vec<Matching> =
            switches.iter().map(|s| s.nominal().clone()).collect();
        let adj = adjustment_cost(mode, &prev_nominal, &next_nominal, alpha)?;
        prev_nominal = next_nominal;

        ledger.push(StepCost {
            t,
            srv,
            adj,
            unreachable,
        });
    }

    let mean_hop_count = if reachable_count == 0 {
        Rational::zero()
    } else {
        reachable_hops / int(reachable_count)
    };
    Ok(SimResult {
        ledger,
        per_switch_reconfig_counts: reconfig_counts,
        mean_hop_count,
        snapshot_log: Some(snapshot_log),
    })
}

/// Applies an accepted matching change: immediately under the directly
/// charged modes, as a reconfiguration job under the no-direct-cost modes.
fn commit_change(
    switch: &mut SwitchState,
    target: Matching,
    t: u64,
    mode: AdjustmentMode,
) -> Result<(), SwitchError> {
    match mode {
        AdjustmentMode::EdgeDistance | AdjustmentMode::SwitchCost => switch.apply_instant(target),
        AdjustmentMode::NoDirectCost(scope) => switch.begin_reconfig(target, t, scope),
    }
}

/// Audits a result against its inputs: per-step records must be consistent
/// with the trace, every total must equal the recomputed sum exactly, and
/// each step's service cost must be a feasible hop count or the penalty.
pub fn replay_verify(result: &SimResult, config: &SimConfig, trace: &Trace) -> bool {
    let ledger = &result.ledger;
    if ledger.steps.len() != trace.len() {
        return false;
    }
    let mut total_srv = Rational::zero();
    let mut total_adj = Rational::zero();
    let mut unreachable_count = 0u64;
    let mut reachable_hops = Rational::zero();
    let mut reachable_count = 0u64;
    for (step, request) in ledger.steps.iter().zip(trace.requests()) {
        if step.t != request.t {
            return false;
        }
        if step.unreachable {
            if step.srv != config.cost.unreachable_penalty {
                return false;
            }
            unreachable_count += 1;
        } else {
            let max_distance = int(config.n.saturating_sub(1) as u64);
            if step.srv < int(1) || step.srv > max_distance || !step.srv.is_integer() {
                return false;
            }
            reachable_hops += &step.srv;
            reachable_count += 1;
        }
        total_srv += &step.srv;
        total_adj += &step.adj;
    }
    let mean = if reachable_count == 0 {
        Rational::zero()
    } else {
        reachable_hops / int(reachable_count)
    };
    total_srv == ledger.total_srv
        && total_adj == ledger.total_adj
        && &total_srv + &total_adj == ledger.total
        && unreachable_count == ledger.unreachable_count
        && mean == result.mean_hop_count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{edge, InactivityScope};
    use crate::traffic::{generate, PatternKind, PatternSpec};

    fn ring_config(n: usize) -> SimConfig {
        SimConfig {
            n,
            k: 1,
            switches: vec![SwitchConfig::fixed(0, Matching::shift(n, 1).unwrap())],
            cost: CostParams::new(int(1), AdjustmentMode::EdgeDistance, n),
            policy: None,
            seed: 0,
        }
    }

    fn trace_of(pairs: &[(usize, usize)]) -> Trace {
        Trace::from_pairs(
            pairs
                .iter()
                .map(|&(s, d)| (NodeId::new(s), NodeId::new(d))),
        )
        .unwrap()
    }

    #[test]
    fn static_ring_serves_at_ring_distance() {
        // hand BFS on the 4-ring: d(0,1) = 1, d(0,3) = 3
        let result = run(&ring_config(4), &trace_of(&[(0, 1), (0, 3)])).unwrap();
        assert_eq!(result.ledger.total, int(4));
        assert_eq!(result.ledger.total_srv, int(4));
        assert_eq!(result.ledger.total_adj, int(0));
    }

    #[test]
    fn empty_trace_has_zero_cost_and_no_steps() {
        let result = run(&ring_config(4), &Trace::default()).unwrap();
        assert_eq!(result.ledger.total, int(0));
        assert!(result.ledger.steps.is_empty());
        assert_eq!(result.mean_hop_count, int(0));
    }

    #[test]
    fn rotor_rotation_charges_the_replaced_edges() {
        let config = SimConfig {
            n: 4,
            k: 1,
            switches: vec![SwitchConfig::rotor(
                0,
                vec![Matching::shift(4, 1).unwrap(), Matching::shift(4, 2).unwrap()],
                1,
                0,
            )],
            cost: CostParams::new(int(1), AdjustmentMode::EdgeDistance, 4),
            policy: None,
            seed: 0,
        };
        let result = run(&config, &trace_of(&[(0, 1), (0, 1)])).unwrap();
        // the two shift matchings are disjoint: all 4 edges replaced
        assert_eq!(result.ledger.steps[0].adj, int(4));
        assert_eq!(result.per_switch_reconfig_counts, vec![2]);
    }

    #[test]
    fn static_only_runs_never_charge_adjustment() {
        for mode in [
            AdjustmentMode::EdgeDistance,
            AdjustmentMode::SwitchCost,
            AdjustmentMode::NoDirectCost(InactivityScope::WholeSwitch),
            AdjustmentMode::NoDirectCost(InactivityScope::ChangedEdgesOnly),
        ] {
            let mut config = ring_config(5);
            config.cost.adj_mode = mode;
            let trace = trace_of(&[(0, 2), (3, 1), (4, 0)]);
            let result = run(&config, &trace).unwrap();
            assert_eq!(result.ledger.total_adj, int(0), "{mode:?}");
        }
    }

    #[test]
    fn snapshots_are_oblivious_to_request_content_without_demand_aware() {
        let config = SimConfig {
            n: 6,
            k: 2,
            switches: vec![
                SwitchConfig::fixed(0, Matching::shift(6, 1).unwrap()),
                SwitchConfig::rotor(
                    1,
                    vec![Matching::shift(6, 2).unwrap(), Matching::shift(6, 3).unwrap()],
                    2,
                    1,
                ),
            ],
            cost: CostParams::new(
                int(1),
                AdjustmentMode::NoDirectCost(InactivityScope::WholeSwitch),
                6,
            ),
            policy: None,
            seed: 0,
        };
        let trace_a = generate(&PatternSpec {
            kind: PatternKind::AllToAll,
            n: 6,
            m: 20,
            seed: 1,
        })
        .unwrap();
        let trace_b = generate(&PatternSpec {
            kind: PatternKind::Zipf { skew: 1.5 },
            n: 6,
            m: 20,
            seed: 9,
        })
        .unwrap();
        let result_a = run(&config, &trace_a).unwrap();
        let result_b = run(&config, &trace_b).unwrap();
        assert_eq!(result_a.snapshot_log, result_b.snapshot_log);
    }

    #[test]
    fn demand_aware_learns_the_elephant_pair() {
        let config = SimConfig {
            n: 6,
            k: 1,
            switches: vec![SwitchConfig::demand_aware(0, 0)],
            cost: CostParams::new(int(1), AdjustmentMode::EdgeDistance, 6),
            policy: Some(PolicyParams::default()),
            seed: 0,
        };
        let trace = trace_of(&[(2, 5); 10]);
        let result = run(&config, &trace).unwrap();
        // first request sees the empty network, pays the penalty, and
        // triggers one reconfiguration; everything after is a direct hop
        assert_eq!(result.ledger.steps[0].srv, int(6));
        assert!(result.ledger.steps[0].unreachable);
        assert_eq!(result.ledger.steps[0].adj, int(1));
        for step in &result.ledger.steps[1..] {
            assert_eq!(step.srv, int(1));
            assert_eq!(step.adj, int(0));
        }
        assert_eq!(result.per_switch_reconfig_counts, vec![1]);
    }

    #[test]
    fn missing_policy_with_demand_aware_switch_is_rejected() {
        let config = SimConfig {
            n: 4,
            k: 1,
            switches: vec![SwitchConfig::demand_aware(0, 0)],
            cost: CostParams::new(int(1), AdjustmentMode::EdgeDistance, 4),
            policy: None,
            seed: 0,
        };
        assert_eq!(
            run(&config, &Trace::default()),
            Err(EngineError::MissingPolicy)
        );
    }

    #[test]
    fn config_invariants_are_named() {
        let mut config = ring_config(4);
        config.k = 2;
        assert!(matches!(
            config.validate(),
            Err(EngineError::SwitchCountMismatch { expected: 2, got: 1 })
        ));

        let mut config = ring_config(4);
        config.cost.unreachable_penalty = int(2);
        assert!(matches!(
            config.validate(),
            Err(EngineError::PenaltyTooSmall { max_distance: 3 })
        ));

        let mut config = ring_config(4);
        config.switches[0].switch_id = 5;
        assert!(matches!(
            config.validate(),
            Err(EngineError::SwitchIdMismatch { .. })
        ));
    }

    #[test]
    fn trace_node_out_of_range_is_a_mismatch() {
        let err = run(&ring_config(4), &trace_of(&[(0, 5)])).unwrap_err();
        assert!(matches!(err, EngineError::TraceMismatch { t: 1, .. }));
    }

    #[test]
    fn replay_verify_accepts_honest_results_and_rejects_tampering() {
        let config = ring_config(4);
        let trace = trace_of(&[(0, 1), (0, 3), (2, 0)]);
        let mut result = run(&config, &trace).unwrap();
        assert!(replay_verify(&result, &config, &trace));

        result.ledger.steps[1].srv += int(1);
        assert!(!replay_verify(&result, &config, &trace));
    }

    #[test]
    fn replay_verify_rejects_rounded_totals() {
        let config = ring_config(4);
        let trace = trace_of(&[(0, 1), (0, 3)]);
        let mut result = run(&config, &trace).unwrap();
        result.ledger.total += crate::rational::ratio(1, 1_000_000_000_000);
        assert!(!replay_verify(&result, &config, &trace));
    }

    #[test]
    fn identical_inputs_give_identical_results() {
        let config = SimConfig {
            n: 5,
            k: 2,
            switches: vec![
                SwitchConfig::rotor(
                    0,
                    vec![Matching::shift(5, 1).unwrap(), Matching::shift(5, 2).unwrap()],
                    1,
                    1,
                ),
                SwitchConfig::demand_aware(1, 0),
            ],
            cost: CostParams::new(int(1), AdjustmentMode::EdgeDistance, 5),
            policy: Some(PolicyParams::default()),
            seed: 7,
        };
        let trace = generate(&PatternSpec {
            kind: PatternKind::ElephantMice {
                fraction: 0.8,
                pairs: 2,
            },
            n: 5,
            m: 40,
            seed: 3,
        })
        .unwrap();
        assert_eq!(run(&config, &trace).unwrap(), run(&config, &trace).unwrap());
    }
}
