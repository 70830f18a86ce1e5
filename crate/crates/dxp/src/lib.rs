//! Desk-scale model-based RL toolkit built around a small recurrent latent
//! world model, with three pluggable training extensions: composite-score
//! prioritized trajectory replay, intrinsic rewards from ensemble
//! reward-prediction disagreement, and dynamic extrinsic/intrinsic reward
//! weighting. Ships with seedable toy environments and a fully deterministic
//! experiment runner that emits per-step metrics.
//!
//! Start from the `examples/` directory: each example is a runnable tour of
//! one capability (replay priorities, world-model training, imagined
//! disagreement, weight schedules, planning, end-to-end runs, comparisons).

pub mod action;
pub mod error;
pub mod replay;
pub mod rng;

pub use action::Action;
pub use error::{Error, Result};
