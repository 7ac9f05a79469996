//! Value bookkeeping for boundary moves. The value of the model after a
//! move is the change in entropy it causes plus `gamma` times the previous
//! value; moves are chosen to minimize it.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateMove {
    pub description: String,
    /// Entropy of the model after applying the move.
    pub c_next: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellmanDecision {
    /// Index of the chosen candidate; `None` means stay.
    pub chosen: Option<usize>,
    pub c_next: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellmanStep {
    pub iteration: usize,
    /// Value estimate after this iteration.
    pub c_value: f64,
    /// Entropy of the model after this iteration.
    pub c_model: f64,
    pub accepted_move: String,
}

impl BellmanStep {
    pub fn start(c: f64) -> Self {
        Self {
            iteration: 0,
            c_value: c,
            c_model: c,
            accepted_move: "initial".into(),
        }
    }
}

/// `R + gamma * estimate`.
pub fn bellman_value(reward: f64, gamma: f64, estimate: f64) -> f64 {
    reward + gamma * estimate
}

/// One update step. `estimate` is the previous value and `c_current` the
/// entropy of the current model. Each candidate's reward is
/// `c_next - c_current`; the candidate with the lowest value wins unless no
/// candidate lowers the entropy, in which case the move is "stay" with
/// reward zero.
pub fn bellman_update(estimate: f64, c_current: f64, candidates: &[CandidateMove], gamma: f64) -> BellmanDecision {
    let best = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.c_next < c_current)
        .min_by(|(ia, a), (ib, b)| a.c_next.total_cmp(&b.c_next).then(ia.cmp(ib)));
    match best {
        Some((i, c)) => BellmanDecision {
            chosen: Some(i),
            c_next: bellman_value(c.c_next - c_current, gamma, estimate),
        },
        None => BellmanDecision {
            chosen: None,
            c_next: bellman_value(0.0, gamma, estimate),
        },
    }
}
