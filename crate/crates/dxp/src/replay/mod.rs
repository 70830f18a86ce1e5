//! Trajectory replay with composite priority scores.
//!
//! Stores fixed-length trajectory chunks, scores each one from its return,
//! reconstruction error, and value error, and samples training batches
//! proportionally to those scores through a sum tree. A uniform mode
//! bypasses priorities entirely and reproduces plain uniform replay.

mod snapshot;
mod sum_tree;

pub use snapshot::{read_snapshot, write_snapshot};
pub use sum_tree::SumTree;

use crate::action::Action;
use crate::error::{Error, Result};
use crate::rng::uniform_open_closed;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// One environment step as stored in the buffer. `action` is the action that
/// led to `observation`, and `reward_ext` arrived together with it; on
/// episode-start transitions both are zero placeholders.
#[derive(Debug, Clone)]
pub struct Transition {
    pub observation: Vec<f64>,
    pub action: Action,
    pub reward_ext: f64,
    pub is_first: bool,
    pub is_terminal: bool,
    /// Intrinsic reward recorded at step time (0 when intrinsic is off).
    pub reward_intr: f64,
    /// Mixed reward recorded at step time (equals `reward_ext` when
    /// intrinsic is off).
    pub reward_total: f64,
}

impl Transition {
    pub fn validate(&self, obs_dim: usize) -> Result<()> {
        if self.observation.len() != obs_dim {
            return Err(Error::DimensionMismatch {
                what: "transition observation",
                expected: obs_dim,
                got: self.observation.len(),
            });
        }
        if self.is_first && self.is_terminal {
            return Err(Error::config(
                "transition flagged both is_first and is_terminal",
            ));
        }
        if !self.reward_ext.is_finite() {
            return Err(Error::NonFinite {
                field: "reward_ext",
                value: self.reward_ext,
            });
        }
        Ok(())
    }
}

/// A fixed-length chunk of the experience stream plus its cached priority
/// signals.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub transitions: Vec<Transition>,
    /// Sum of extrinsic rewards over the chunk.
    pub return_ext: f64,
    /// Mean per-step reconstruction error from the last model pass.
    pub recon_error: f64,
    /// Mean per-step absolute value-target residual from the last model pass.
    pub value_error: f64,
    /// Current priority score; assigned by the buffer.
    pub priority: f64,
    /// Monotone insertion counter; assigned by the buffer.
    pub insert_id: u64,
}

impl Trajectory {
    /// Wrap raw transitions; the return is the exact transition-order sum of
    /// extrinsic rewards, and model signals start at zero until the first
    /// training pass refreshes them.
    pub fn new(transitions: Vec<Transition>) -> Trajectory {
        let return_ext = transitions.iter().map(|t| t.reward_ext).sum();
        Trajectory {
            transitions,
            return_ext,
            recon_error: 0.0,
            value_error: 0.0,
            priority: 0.0,
            insert_id: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }
}

/// Weights of the composite priority score.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct PriorityWeights {
    /// Weight on the return term.
    pub lambda_return: f64,
    /// Weight coupling the value error to the return.
    pub lambda_value: f64,
    /// Weight on the reconstruction-error term.
    pub lambda_recon: f64,
    /// Lower bound keeping every stored trajectory reachable.
    pub priority_floor: f64,
}

impl Default for PriorityWeights {
    fn default() -> Self {
        PriorityWeights {
            lambda_return: 1.0,
            lambda_value: 1.0,
            lambda_recon: 1.0,
            priority_floor: 1e-3,
        }
    }
}

impl PriorityWeights {
    fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("lambda_return", self.lambda_return),
            ("lambda_value", self.lambda_value),
            ("lambda_recon", self.lambda_recon),
            ("priority_floor", self.priority_floor),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite { field, value: v });
            }
        }
        if self.priority_floor <= 0.0 {
            return Err(Error::config("priority_floor must be positive"));
        }
        Ok(())
    }
}

/// The raw composite score on scalar signals, clamped to the floor.
pub fn score_parts(
    return_ext: f64,
    value_error: f64,
    recon_error: f64,
    w: &PriorityWeights,
) -> Result<f64> {
    w.validate()?;
    for (field, v) in [
        ("return_R", return_ext),
        ("value_error_delta", value_error),
        ("recon_error_eps", recon_error),
    ] {
        if !v.is_finite() {
            return Err(Error::NonFinite { field, value: v });
        }
    }
    let raw = (w.lambda_return + w.lambda_value * value_error) * return_ext
        + w.lambda_recon * recon_error;
    Ok(raw.max(w.priority_floor))
}

/// Composite priority of a trajectory under weights `w`.
pub fn score_trajectory(traj: &Trajectory, w: &PriorityWeights) -> Result<f64> {
    score_parts(traj.return_ext, traj.value_error, traj.recon_error, w)
}

/// Sampling behavior of the buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    Uniform,
    Prioritized,
}

/// A sampled batch entry: which slot, its id at sampling time, and the
/// normalized probability it was drawn with.
#[derive(Debug, Clone, Copy)]
pub struct SampleRef {
    pub slot: usize,
    pub insert_id: u64,
    pub probability: f64,
}

/// Fresh priority signals for a previously sampled trajectory.
#[derive(Debug, Clone, Copy)]
pub struct PriorityUpdate {
    pub slot: usize,
    pub insert_id: u64,
    pub recon_error: f64,
    pub value_error: f64,
}

/// Ring buffer of trajectories with a sum tree over their priorities.
///
/// Single-writer, single-reader: no internal synchronization, callers
/// serialize access.
#[derive(Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    t_seq: usize,
    obs_dim: usize,
    weights: PriorityWeights,
    mode: SampleMode,
    normalize_return: bool,
    slots: Vec<Trajectory>,
    tree: SumTree,
    insert_count: u64,
    stale_updates: u64,
}

impl ReplayBuffer {
    pub fn new(
        capacity: usize,
        t_seq: usize,
        obs_dim: usize,
        weights: PriorityWeights,
        mode: SampleMode,
    ) -> Result<ReplayBuffer> {
        if capacity == 0 || t_seq == 0 {
            return Err(Error::config("replay capacity and t_seq must be positive"));
        }
        weights.validate()?;
        Ok(ReplayBuffer {
            capacity,
            t_seq,
            obs_dim,
            weights,
            mode,
            normalize_return: false,
            slots: Vec::with_capacity(capacity),
            tree: SumTree::new(capacity),
            insert_count: 0,
            stale_updates: 0,
        })
    }

    /// Score returns as `R / max(1, max |R|)` instead of raw returns.
    pub fn set_normalize_return(&mut self, on: bool) {
        self.normalize_return = on;
    }

    pub fn occupied(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn t_seq(&self) -> usize {
        self.t_seq
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn mode(&self) -> SampleMode {
        self.mode
    }

    pub fn weights(&self) -> &PriorityWeights {
        &self.weights
    }

    pub fn get(&self, slot: usize) -> Option<&Trajectory> {
        self.slots.get(slot)
    }

    /// Number of priority updates dropped because the slot had been evicted.
    pub fn stale_update_count(&self) -> u64 {
        self.stale_updates
    }

    pub fn total_priority(&self) -> f64 {
        self.tree.total()
    }

    pub fn max_priority(&self) -> f64 {
        self.slots
            .iter()
            .map(|t| t.priority)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn priorities(&self) -> Vec<f64> {
        self.slots.iter().map(|t| t.priority).collect()
    }

    /// Ids currently stored, ascending.
    pub fn insert_ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self.slots.iter().map(|t| t.insert_id).collect();
        ids.sort_unstable();
        ids
    }

    fn return_scale(&self) -> f64 {
        if !self.normalize_return {
            return 1.0;
        }
        let max_abs = self
            .slots
            .iter()
            .map(|t| t.return_ext.abs())
            .fold(0.0f64, f64::max);
        1.0 / max_abs.max(1.0)
    }

    fn rescore(&self, traj: &Trajectory) -> Result<f64> {
        score_parts(
            traj.return_ext * self.return_scale(),
            traj.value_error,
            traj.recon_error,
            &self.weights,
        )
    }

    /// Store a trajectory. Fresh data enters at the current maximum priority
    /// (the floor on an empty buffer) so it is sampled at least once before
    /// its model signals exist; at capacity the oldest chunk is evicted.
    pub fn add(&mut self, mut traj: Trajectory) -> Result<u64> {
        if traj.len() != self.t_seq {
            return Err(Error::WrongTrajectoryLength {
                expected: self.t_seq,
                got: traj.len(),
            });
        }
        for t in &traj.transitions {
            t.validate(self.obs_dim)?;
        }
        let priority = if self.slots.is_empty() {
            self.weights.priority_floor
        } else {
            self.max_priority()
        };
        let id = self.insert_count;
        traj.insert_id = id;
        traj.priority = priority;
        let slot = (id % self.capacity as u64) as usize;
        if slot == self.slots.len() {
            self.slots.push(traj);
        } else {
            self.slots[slot] = traj;
        }
        self.tree.set(slot, priority);
        self.insert_count += 1;
        Ok(id)
    }

    /// Draw `n` slots with replacement. Prioritized mode splits the total
    /// mass into `n` equal strata with one uniform query each; uniform mode
    /// ignores priorities.
    pub fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<SampleRef>> {
        if self.slots.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        let mut out = Vec::with_capacity(n);
        match self.mode {
            SampleMode::Uniform => {
                let occ = self.slots.len();
                for _ in 0..n {
                    let slot = rng.gen_range(0..occ);
                    out.push(SampleRef {
                        slot,
                        insert_id: self.slots[slot].insert_id,
                        probability: 1.0 / occ as f64,
                    });
                }
            }
            SampleMode::Prioritized => {
                let total = self.tree.total();
                debug_assert!(total > 0.0);
                for i in 0..n {
                    let u = (i as f64 + uniform_open_closed(rng)) / n as f64 * total;
                    let slot = self.tree.find(u.min(total));
                    out.push(SampleRef {
                        slot,
                        insert_id: self.slots[slot].insert_id,
                        probability: self.tree.leaf(slot) / total,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Overwrite the model signals of the given slots and recompute their
    /// priorities. Entries whose trajectory was evicted since sampling are
    /// skipped and counted, not errored.
    pub fn update_priorities(&mut self, updates: &[PriorityUpdate]) -> Result<usize> {
        let mut applied = 0;
        for u in updates {
            let stale = match self.slots.get(u.slot) {
                Some(t) => t.insert_id != u.insert_id,
                None => true,
            };
            if stale {
                self.stale_updates += 1;
                continue;
            }
            for (field, v) in [
                ("recon_error_eps", u.recon_error),
                ("value_error_delta", u.value_error),
            ] {
                if !v.is_finite() {
                    return Err(Error::NonFinite { field, value: v });
                }
            }
            let traj = &mut self.slots[u.slot];
            traj.recon_error = u.recon_error;
            traj.value_error = u.value_error;
            let score = self.rescore(&self.slots[u.slot])?;
            self.slots[u.slot].priority = score;
            self.tree.set(u.slot, score);
            applied += 1;
        }
        Ok(applied)
    }

    /// Largest internal inconsistency of the sum tree (diagnostic).
    pub fn tree_consistency_error(&self) -> f64 {
        self.tree.max_consistency_error()
    }

    /// Rebuild the occupied slots from restored trajectories, which carry
    /// their original ids and priorities. Slot placement follows the ring
    /// rule `id % capacity`.
    pub(crate) fn restore(&mut self, trajectories: Vec<Trajectory>) -> Result<()> {
        let occupied = trajectories.len();
        let mut by_slot: Vec<Option<Trajectory>> = (0..occupied).map(|_| None).collect();
        for traj in trajectories {
            let slot = (traj.insert_id % self.capacity as u64) as usize;
            if slot >= occupied || by_slot[slot].is_some() {
                return Err(Error::format(
                    "replay snapshot",
                    "trajectory ids do not form a contiguous ring",
                ));
            }
            self.insert_count = self.insert_count.max(traj.insert_id + 1);
            by_slot[slot] = Some(traj);
        }
        for (slot, traj) in by_slot.into_iter().enumerate() {
            let traj = traj.expect("every slot filled");
            let priority = traj.priority;
            self.slots.push(traj);
            self.tree.set(slot, priority);
        }
        Ok(())
    }
}
