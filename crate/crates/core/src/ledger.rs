//! Explored-mass bookkeeping for the probabilistic search.
//!
//! The search keeps a current path `c_0 .. c_{d-1}` of combined states.
//! `p[k]` is the step probability into `c_k` (`p[0] = 1`, from a virtual
//! root). For `x` in goal/fail/noter, `alpha_x[k]` is explored mass relative
//! to `c_{k-1}` (the root for `k = 0`) whose first step is not `c_k`; the
//! last entry `alpha_x[d]` covers every explored step out of `c_{d-1}`.
//! `alpha_loop[k][m]` is explored mass relative to `c_m`, first step not
//! `c_{m+1}`, that first re-enters the path at `c_k`.
//!
//! ```text
//! loop[k] = sum_{m=k}^{d-1} prod_{j=k+1}^{m} p[j] / (1 - loop[j]) * alpha_loop[k][m]
//! x[d]    = alpha_x[d]
//! x[k]    = p[k] * x[k+1] / (1 - loop[k]) + alpha_x[k]
//! ```
//!
//! A saturated loop (`loop[k] = 1`) never exits `c_k`; the whole subtree
//! then counts as non-terminating.

use thiserror::Error;

use crate::prob::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("cannot cumulate an empty ledger")]
    Empty,
    #[error("loop target {target} is not on the current path of length {depth}")]
    LoopTarget { target: usize, depth: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchLedger<T> {
    probs: Vec<T>,
    goal: Vec<T>,
    fail: Vec<T>,
    noter: Vec<T>,
    /// `alpha_loop[k][m]`, row `k` has length `d` (entries below `k` are 0).
    loops: Vec<Vec<T>>,
}

/// Lower bounds derived from a ledger; `goal[0]`, `fail[0]`, `noter[0]`
/// bound the measures of the whole system.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaVector<T> {
    pub goal: Vec<T>,
    pub fail: Vec<T>,
    pub noter: Vec<T>,
    pub loops: Vec<T>,
}

impl<T: Scalar> LambdaVector<T> {
    pub fn goal0(&self) -> &T {
        &self.goal[0]
    }

    pub fn fail0(&self) -> &T {
        &self.fail[0]
    }

    pub fn noter0(&self) -> &T {
        &self.noter[0]
    }

    /// Prefix of length `d` (the vectors of a ledger with `d` path nodes).
    pub fn truncated(&self, d: usize) -> Self {
        Self {
            goal: self.goal[..=d].to_vec(),
            fail: self.fail[..=d].to_vec(),
            noter: self.noter[..=d].to_vec(),
            loops: self.loops[..d].to_vec(),
        }
    }
}

impl<T: Scalar> Default for SearchLedger<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> SearchLedger<T> {
    /// Ledger for the empty path: only the root entry.
    pub fn new() -> Self {
        Self { probs: Vec::new(), goal: vec![T::zero()], fail: vec![T::zero()], noter: vec![T::zero()], loops: Vec::new() }
    }

    /// Number of path nodes `d`.
    pub fn depth(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, k: usize) -> &T {
        &self.probs[k]
    }

    pub fn alpha_goal(&self, k: usize) -> &T {
        &self.goal[k]
    }

    pub fn alpha_fail(&self, k: usize) -> &T {
        &self.fail[k]
    }

    pub fn alpha_noter(&self, k: usize) -> &T {
        &self.noter[k]
    }

    pub fn alpha_loop(&self, k: usize, m: usize) -> &T {
        &self.loops[k][m]
    }

    /// Extends the path by a node reached with probability `p`.
    pub fn push(&mut self, p: T) {
        self.probs.push(p);
        self.goal.push(T::zero());
        self.fail.push(T::zero());
        self.noter.push(T::zero());
        for row in &mut self.loops {
            row.push(T::zero());
        }
        let d = self.probs.len();
        self.loops.push(vec![T::zero(); d]);
    }

    pub fn add_goal(&mut self, p: T) {
        add_last(&mut self.goal, p);
    }

    pub fn add_fail(&mut self, p: T) {
        add_last(&mut self.fail, p);
    }

    pub fn add_noter(&mut self, p: T) {
        add_last(&mut self.noter, p);
    }

    /// Adds mass `p` leaving the last node and re-entering the path at `c_k`.
    pub fn add_loop(&mut self, k: usize, p: T) -> Result<(), LedgerError> {
        let d = self.depth();
        if k >= d {
            return Err(LedgerError::LoopTarget { target: k, depth: d });
        }
        let e = &mut self.loops[k][d - 1];
        *e = e.clone() + p;
        Ok(())
    }

    /// `p_loop` of a step with probability `p` from the last node back to `c_k`.
    pub fn loop_likelihood(&self, k: usize, p: T) -> T {
        self.probs[k + 1..].iter().fold(p, |acc, q| acc * q.clone())
    }

    /// Derives all lower bounds; a pure function of the ledger.
    pub fn calc_lambda(&self) -> LambdaVector<T> {
        let d = self.depth();
        // Geometric amplification 1 / (1 - loop[j]); `None` once saturated.
        let mut loops = vec![T::zero(); d];
        let mut amp: Vec<Option<T>> = vec![None; d];
        for k in (0..d).rev() {
            let mut acc = self.loops[k][k].clone();
            let mut reach = T::one();
            for (m, amp_m) in amp.iter().enumerate().skip(k + 1) {
                let Some(a) = amp_m else { break };
                reach = reach * self.probs[m].clone() * a.clone();
                acc = acc + reach.clone() * self.loops[k][m].clone();
            }
            if !acc.is_saturated() {
                amp[k] = Some(T::one() / (T::one() - acc.clone()));
            }
            loops[k] = acc;
        }
        let mut goal = vec![T::zero(); d + 1];
        let mut fail = vec![T::zero(); d + 1];
        let mut noter = vec![T::zero(); d + 1];
        goal[d] = self.goal[d].clone();
        fail[d] = self.fail[d].clone();
        noter[d] = self.noter[d].clone();
        for k in (0..d).rev() {
            let p = &self.probs[k];
            match &amp[k] {
                Some(a) => {
                    goal[k] = p.clone() * goal[k + 1].clone() * a.clone() + self.goal[k].clone();
                    fail[k] = p.clone() * fail[k + 1].clone() * a.clone() + self.fail[k].clone();
                    noter[k] = p.clone() * noter[k + 1].clone() * a.clone() + self.noter[k].clone();
                }
                None => {
                    goal[k] = self.goal[k].clone();
                    fail[k] = self.fail[k].clone();
                    noter[k] = p.clone() + self.noter[k].clone();
                }
            }
        }
        LambdaVector { goal, fail, noter, loops }
    }

    /// Folds the last path node into its parent so that `calc_lambda`
    /// afterwards equals the truncation of `calc_lambda` before.
    pub fn cumulate_alpha(&mut self) -> Result<(), LedgerError> {
        let d = self.depth();
        if d == 0 {
            return Err(LedgerError::Empty);
        }
        let n = d - 1;
        let p = self.probs.pop().expect("non-empty");
        let self_loop = self.loops[n][n].clone();
        let goal = self.goal.pop().expect("non-empty");
        let fail = self.fail.pop().expect("non-empty");
        let noter = self.noter.pop().expect("non-empty");
        self.loops.pop();
        let exits: Vec<T> = self.loops.iter_mut().map(|row| row.pop().expect("non-empty")).collect();
        if self_loop.is_saturated() {
            self.noter[n] = self.noter[n].clone() + p;
            return Ok(());
        }
        let scale = p / (T::one() - self_loop);
        self.goal[n] = self.goal[n].clone() + scale.clone() * goal;
        self.fail[n] = self.fail[n].clone() + scale.clone() * fail;
        self.noter[n] = self.noter[n].clone() + scale.clone() * noter;
        if n > 0 {
            for (i, e) in exits.into_iter().enumerate() {
                self.loops[i][n - 1] = self.loops[i][n - 1].clone() + scale.clone() * e;
            }
        }
        Ok(())
    }
}

fn add_last<T: Scalar>(v: &mut [T], p: T) {
    let e = v.last_mut().expect("ledger vectors are never empty");
    *e = e.clone() + p;
}
