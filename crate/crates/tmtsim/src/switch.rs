//! Per-switch state over time: the current matching, rotor rotation, and
//! in-flight reconfiguration jobs with their edge-inactivity windows.
//!
//! A reconfiguration begun in slot `t` with latency `beta` blocks the
//! affected edges while serving slots `t+1 ..= t+beta`; the new matching
//! first serves traffic in slot `t+beta+1`. Which edges are blocked depends
//! on the [`InactivityScope`]: the whole matching, or only the edges that
//! actually change (edges shared by the old and new matching keep
//! forwarding).

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{DirectedEdge, InactivityScope, Matching, SwitchConfig, SwitchKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SwitchError {
    #[error("switch {switch_id} already has a reconfiguration in progress")]
    ReconfigInProgress { switch_id: usize },
    #[error("switch {switch_id} is static and cannot be reconfigured")]
    StaticSwitchImmutable { switch_id: usize },
    #[error("switch {switch_id} is not a rotor")]
    NotARotor { switch_id: usize },
    #[error("switch {switch_id} target matching is not in its pool")]
    TargetNotInPool { switch_id: usize },
}

/// An in-flight matching change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconfigJob {
    pub target: Matching,
    /// Slot in which the job was begun (after that slot's request was served).
    pub started_at: u64,
    /// First slot in which the target matching serves traffic:
    /// `started_at + beta + 1`. The affected edges are inactive for the
    /// `beta` slots strictly between `started_at` and `ready_at`.
    pub ready_at: u64,
    pub scope: InactivityScope,
}

/// One switch's evolving state. At most one job is pending at any time;
/// for static and rotor switches the nominal matching is always a pool
/// member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchState {
    config: SwitchConfig,
    current: Matching,
    pool_index: usize,
    pending: Option<ReconfigJob>,
}

impl SwitchState {
    /// Initial state from a validated config: static and rotor switches
    /// start on `pool[0]`; demand-aware switches start on their seed
    /// matching if one is configured, otherwise on the empty matching.
    pub fn initial(config: SwitchConfig, n: usize) -> Result<Self, crate::model::ModelError> {
        config.validate(n)?;
        let current = config
            .pool
            .first()
            .cloned()
            .unwrap_or_else(|| Matching::empty(n));
        Ok(SwitchState {
            config,
            current,
            pool_index: 0,
            pending: None,
        })
    }

    pub fn config(&self) -> &SwitchConfig {
        &self.config
    }

    pub fn switch_id(&self) -> usize {
        self.config.switch_id
    }

    /// The committed matching: the pre-reconfiguration one until a pending
    /// job completes.
    pub fn current(&self) -> &Matching {
        &self.current
    }

    pub fn pending(&self) -> Option<&ReconfigJob> {
        self.pending.as_ref()
    }

    /// The matching this switch is committed to: the pending job's target
    /// if one exists, else the current matching. Adjustment costs are
    /// charged on nominal matchings, so they do not depend on `beta`.
    pub fn nominal(&self) -> &Matching {
        match &self.pending {
            Some(job) => &job.target,
            None => &self.current,
        }
    }

    /// The edges this switch offers the network while serving slot `t`.
    ///
    /// With no pending job this is the current matching. During a job's
    /// inactivity window it is either nothing (`WholeSwitch`) or the edges
    /// common to the old and new matching (`ChangedEdgesOnly`); from
    /// `ready_at` on it is the target.
    pub fn active_edges(&self, t: u64) -> BTreeSet<DirectedEdge> {
        match &self.pending {
            None => self.current.edges().clone(),
            Some(job) => {
                if t >= job.ready_at {
                    job.target.edges().clone()
                } else if t > job.started_at {
                    match job.scope {
                        InactivityScope::WholeSwitch => BTreeSet::new(),
                        InactivityScope::ChangedEdgesOnly => self.current.intersection(&job.target),
                    }
                } else {
                    self.current.edges().clone()
                }
            }
        }
    }

    /// Starts changing this switch's matching to `target` in slot `t`.
    ///
    /// With `beta == 0` the change applies immediately; otherwise a job is
    /// recorded and the affected edges go inactive for the next `beta`
    /// slots. Rejected for static switches and while another job is
    /// pending.
    pub fn begin_reconfig(
        &mut self,
        target: Matching,
        t: u64,
        scope: InactivityScope,
    ) -> Result<(), SwitchError> {
        if self.config.kind == SwitchKind::Static {
            return Err(SwitchError::StaticSwitchImmutable {
                switch_id: self.switch_id(),
            });
        }
        if self.pending.is_some() {
            return Err(SwitchError::ReconfigInProgress {
                switch_id: self.switch_id(),
            });
        }
        if self.config.beta == 0 {
            return self.apply_target(target);
        }
        self.pending = Some(ReconfigJob {
            target,
            started_at: t,
            ready_at: t + self.config.beta + 1,
            scope,
        });
        Ok(())
    }

    /// Replaces the matching immediately, bypassing any inactivity window.
    /// Used by the directly-charged adjustment modes, where `beta` plays no
    /// role.
    pub fn apply_instant(&mut self, target: Matching) -> Result<(), SwitchError> {
        if self.config.kind == SwitchKind::Static {
            return Err(SwitchError::StaticSwitchImmutable {
                switch_id: self.switch_id(),
            });
        }
        if self.pending.is_some() {
            return Err(SwitchError::ReconfigInProgress {
                switch_id: self.switch_id(),
            });
        }
        self.apply_target(target)
    }

    fn apply_target(&mut self, target: Matching) -> Result<(), SwitchError> {
        if self.config.kind.is_rotor() {
            self.pool_index = self
                .config
                .pool
                .iter()
                .position(|m| *m == target)
                .ok_or(SwitchError::TargetNotInPool {
                    switch_id: self.switch_id(),
                })?;
        }
        self.current = target;
        Ok(())
    }

    /// Completes the pending job if its `ready_at` has arrived. Called at
    /// the start of every slot; a no-op otherwise.
    pub fn finalize_due(&mut self, t: u64) {
        if let Some(job) = &self.pending {
            if t >= job.ready_at {
                let job = self.pending.take().expect("checked above");
                self.apply_target(job.target)
                    .expect("pool membership was checked when the job began");
            }
        }
    }

    /// For rotors: the next pool matching, when `t` is a rotation slot
    /// (`t % period == 0`) and no job is pending. Rotations are suppressed
    /// while a reconfiguration is in flight.
    pub fn rotor_due_target(&self, t: u64) -> Result<Option<Matching>, SwitchError> {
        let SwitchKind::Rotor { period } = self.config.kind else {
            return Err(SwitchError::NotARotor {
                switch_id: self.switch_id(),
            });
        };
        if t % period != 0 || self.pending.is_some() {
            return Ok(None);
        }
        let next = (self.pool_index + 1) % self.config.pool.len();
        Ok(Some(self.config.pool[next].clone()))
    }
}
