//! Stochastic policies over a tabular MDP.

use crate::error::{check_dim, invalid_param, Result};

/// A possibly time-dependent stochastic policy `π_t(a|s)`.
pub trait Policy {
    fn n_states(&self) -> usize;
    fn n_actions(&self) -> usize;
    /// Action distribution at decision step `step` in `state`. Stationary
    /// policies ignore `step`; time-indexed ones reuse their last table past
    /// the end of the schedule.
    fn action_probs(&self, step: usize, state: usize) -> &[f64];
}

/// Stationary policy stored as an `n_states × n_actions` table.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    n_states: usize,
    n_actions: usize,
    table: Vec<f64>,
}

impl TabularPolicy {
    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        TabularPolicy {
            n_states,
            n_actions,
            table: vec![1.0 / n_actions as f64; n_states * n_actions],
        }
    }

    /// One-hot policy taking `actions[s]` in state `s`.
    pub fn deterministic(actions: &[usize], n_actions: usize) -> Result<Self> {
        let mut table = vec![0.0; actions.len() * n_actions];
        for (s, &a) in actions.iter().enumerate() {
            if a >= n_actions {
                return Err(invalid_param("actions", format!("action {a} out of range")));
            }
            table[s * n_actions + a] = 1.0;
        }
        Ok(TabularPolicy {
            n_states: actions.len(),
            n_actions,
            table,
        })
    }

    /// Wraps a flat `s * n_actions + a` table whose rows must sum to one.
    pub fn from_table(n_states: usize, n_actions: usize, table: Vec<f64>) -> Result<Self> {
        check_dim(n_states * n_actions, table.len())?;
        for s in 0..n_states {
            let row = &table[s * n_actions..(s + 1) * n_actions];
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(invalid_param(
                    "table",
                    format!("row {s} is not a probability vector"),
                ));
            }
        }
        Ok(TabularPolicy {
            n_states,
            n_actions,
            table,
        })
    }
}

impl Policy for TabularPolicy {
    fn n_states(&self) -> usize {
        self.n_states
    }

    fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn action_probs(&self, _step: usize, state: usize) -> &[f64] {
        &self.table[state * self.n_actions..(state + 1) * self.n_actions]
    }
}
