//! Ranking engine for model evaluations: turns a response tensor of per-trial outcomes into
//! scores and tie-aware rankings with a large family of methods, plus the evaluation protocols
//! used to compare them.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evalproto;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod irt;
pub mod mc;
pub mod metrics;
pub mod numkit;
pub mod paired;
pub mod ranking;
pub mod rating;
pub mod registry;
pub mod tensor;
pub mod voting;

pub use error::{RankError, Result};
pub use ranking::{
    scores_to_ranking, scores_to_ranking_with, Ranking, ScoreVector, TieRule, Warning, WarningKind,
};
pub use tensor::{PairwiseCounts, PriorOutcomes, ResponseTensor, SetwiseEvent, SetwiseEvents};
