//! Exact measures of a fixed controller.
//!
//! The combined system over `(q, s)` is a Markov chain. Stopping routes all
//! mass into a goal or fail sink and an undefined `(q, o)` pair into a third
//! sink; absorption probabilities come from an exact sparse solve of
//! `x = b + P x` over the nodes that can reach a sink. Nodes that cannot
//! reach any sink (including blocked runs) are split off beforehand, which
//! keeps the system nonsingular.
//!
//! Elimination is cubic in the number of live nodes in the worst case; the
//! chains met at desk scale have at most a few thousand.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_traits::{One, Zero};

use crate::model::{Act, ActionId, Controller, Edge, ObsId, PlanningProblem, StateId, SystemStep};
use crate::prob::Rational;

/// Exact absorption masses of a (problem, controller) pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Measures {
    /// Likelihood of terminating in a goal state.
    pub lgt: Rational,
    /// Likelihood of terminating at all.
    pub lter: Rational,
    /// Likelihood of terminating outside the goal set.
    pub fail: Rational,
    /// Mass that runs forever (or blocks on an inapplicable action).
    pub nonterm: Rational,
    /// Mass that reaches an undefined `(q, o)` pair.
    pub undefined: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sink {
    Goal,
    Fail,
    Undefined,
}

#[derive(Clone, Debug)]
enum Node {
    Sink(Sink),
    Blocked,
    Inner(Vec<(usize, Rational)>),
}

/// The reachable part of the combined chain from `(0, s0)`.
#[derive(Clone, Debug)]
pub struct CombinedChain {
    states: Vec<(usize, StateId)>,
    nodes: Vec<Node>,
}

impl CombinedChain {
    pub fn build(problem: &PlanningProblem, controller: &Controller) -> Self {
        let start = (0usize, problem.initial());
        let mut index: HashMap<(usize, StateId), usize> = HashMap::from([(start, 0)]);
        let mut states = vec![start];
        let mut nodes = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let (q, s) = states[i];
            let node = match crate::model::system_step(problem, controller, q, s) {
                SystemStep::Stop if problem.is_goal(s) => Node::Sink(Sink::Goal),
                SystemStep::Stop => Node::Sink(Sink::Fail),
                SystemStep::Undefined => Node::Sink(Sink::Undefined),
                SystemStep::Branch { outcomes: [], .. } => Node::Blocked,
                SystemStep::Branch { next, outcomes, .. } => {
                    let mut succ = Vec::with_capacity(outcomes.len());
                    for (t, p) in outcomes {
                        let key = (next, *t);
                        let j = *index.entry(key).or_insert_with(|| {
                            states.push(key);
                            queue.push_back(states.len() - 1);
                            states.len() - 1
                        });
                        succ.push((j, p.clone()));
                    }
                    Node::Inner(succ)
                }
            };
            debug_assert_eq!(nodes.len(), i);
            nodes.push(node);
        }
        Self { states, nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Combined states in discovery order; index 0 is `(0, s0)`.
    pub fn states(&self) -> &[(usize, StateId)] {
        &self.states
    }

    /// Nodes from which some sink is reachable.
    fn live(&self) -> Vec<bool> {
        let n = self.nodes.len();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut live = vec![false; n];
        let mut stack = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Sink(_) => {
                    live[i] = true;
                    stack.push(i);
                }
                Node::Inner(succ) => {
                    for (j, _) in succ {
                        preds[*j].push(i);
                    }
                }
                Node::Blocked => {}
            }
        }
        while let Some(j) = stack.pop() {
            for &i in &preds[j] {
                if !live[i] {
                    live[i] = true;
                    stack.push(i);
                }
            }
        }
        live
    }
}

/// Exact LGT, LTER, failing, non-terminating and undefined mass.
pub fn exact_measures(problem: &PlanningProblem, controller: &Controller) -> Measures {
    let chain = CombinedChain::build(problem, controller);
    let live = chain.live();
    // Unknowns: live inner nodes. Sinks are folded into the right-hand side.
    let mut var = vec![usize::MAX; chain.len()];
    let mut order = Vec::new();
    for (i, node) in chain.nodes.iter().enumerate() {
        if live[i] && matches!(node, Node::Inner(_)) {
            var[i] = order.len();
            order.push(i);
        }
    }
    let sink_vector = |s: Sink| -> [Rational; 3] {
        let mut v = [Rational::zero(), Rational::zero(), Rational::zero()];
        v[s as usize] = Rational::one();
        v
    };
    let start_value = match &chain.nodes[0] {
        Node::Sink(s) => sink_vector(*s),
        Node::Blocked => [Rational::zero(), Rational::zero(), Rational::zero()],
        Node::Inner(_) if !live[0] => [Rational::zero(), Rational::zero(), Rational::zero()],
        Node::Inner(_) => {
            let mut system = SparseSystem::new(order.len());
            for (row, &i) in order.iter().enumerate() {
                system.add(row, row, Rational::one());
                let Node::Inner(succ) = &chain.nodes[i] else { unreachable!() };
                for (j, p) in succ {
                    match &chain.nodes[*j] {
                        Node::Sink(s) => system.rhs[row][*s as usize] += p,
                        Node::Inner(_) if live[*j] => system.add(row, var[*j], -p.clone()),
                        _ => {}
                    }
                }
            }
            system.solve().swap_remove(var[0])
        }
    };
    let [goal, fail, undefined] = start_value;
    let lter = &goal + &fail;
    let nonterm = Rational::one() - &lter - &undefined;
    Measures { lgt: goal, lter, fail, nonterm, undefined }
}

/// `A x = B` with sparse rows and three right-hand sides.
struct SparseSystem {
    rows: Vec<BTreeMap<usize, Rational>>,
    rhs: Vec<[Rational; 3]>,
}

impl SparseSystem {
    fn new(n: usize) -> Self {
        Self { rows: vec![BTreeMap::new(); n], rhs: vec![[Rational::zero(), Rational::zero(), Rational::zero()]; n] }
    }

    fn add(&mut self, row: usize, col: usize, v: Rational) {
        let e = self.rows[row].entry(col).or_insert_with(Rational::zero);
        *e += v;
        if e.is_zero() {
            self.rows[row].remove(&col);
        }
    }

    /// Gaussian elimination without pivoting. `I - P` restricted to
    /// transient nodes is a nonsingular M-matrix, so every pivot is positive.
    fn solve(mut self) -> Vec<[Rational; 3]> {
        let n = self.rows.len();
        // rows holding a nonzero below the diagonal, per column
        let mut by_col: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row.keys() {
                if c < r {
                    by_col[c].push(r);
                }
            }
        }
        for k in 0..n {
            let pivot = self.rows[k].get(&k).cloned().expect("transient system has a nonzero pivot");
            let targets = std::mem::take(&mut by_col[k]);
            let pivot_row: Vec<(usize, Rational)> =
                self.rows[k].range(k + 1..).map(|(c, v)| (*c, v.clone())).collect();
            let pivot_rhs = self.rhs[k].clone();
            for r in targets {
                let Some(a) = self.rows[r].remove(&k) else { continue };
                let factor = a / &pivot;
                for (c, v) in &pivot_row {
                    let had = self.rows[r].contains_key(c);
                    self.add(r, *c, -(&factor * v));
                    if !had && *c < r && self.rows[r].contains_key(c) {
                        by_col[*c].push(r);
                    }
                }
                for (rhs, pr) in self.rhs[r].iter_mut().zip(&pivot_rhs) {
                    *rhs -= &factor * pr;
                }
            }
        }
        let mut x: Vec<[Rational; 3]> = vec![[Rational::zero(), Rational::zero(), Rational::zero()]; n];
        for k in (0..n).rev() {
            let mut acc = self.rhs[k].clone();
            for (c, v) in self.rows[k].range(k + 1..) {
                for t in 0..3 {
                    acc[t] -= v * &x[*c][t];
                }
            }
            let pivot = &self.rows[k][&k];
            for t in 0..3 {
                x[k][t] = &acc[t] / pivot;
            }
        }
        x
    }
}

/// Bounds on LGT from all histories with at most `depth` transitions.
///
/// Histories are aggregated by their final combined state, which leaves
/// the masses unchanged. `lower` counts goal stops reached within `depth`;
/// `upper` adds the mass still running after `depth` transitions.
pub fn brute_force_measures(problem: &PlanningProblem, controller: &Controller, depth: usize) -> (Rational, Rational) {
    if depth == 0 {
        return (Rational::zero(), Rational::one());
    }
    let mut lower = Rational::zero();
    let mut frontier: HashMap<(usize, StateId), Rational> = HashMap::from([((0, problem.initial()), Rational::one())]);
    for t in 0..=depth {
        let mut next: HashMap<(usize, StateId), Rational> = HashMap::new();
        let mut live = Rational::zero();
        for ((q, s), mass) in frontier {
            match crate::model::system_step(problem, controller, q, s) {
                SystemStep::Stop if problem.is_goal(s) => lower += mass,
                SystemStep::Branch { next: q2, outcomes, .. } if !outcomes.is_empty() => {
                    if t == depth {
                        live += mass;
                        continue;
                    }
                    for (s2, p) in outcomes {
                        *next.entry((q2, *s2)).or_insert_with(Rational::zero) += &mass * p;
                    }
                }
                _ => {}
            }
        }
        if t == depth {
            return (lower.clone(), lower + live);
        }
        frontier = next;
    }
    unreachable!()
}

/// Every complete controller with exactly `n` states, in a fixed order.
///
/// Each `(q, o)` pair ranges over `stop` followed by every `(a, q')`.
pub fn complete_controllers(num_obs: usize, num_actions: usize, n: usize) -> impl Iterator<Item = Controller> {
    let choices: Vec<Edge> = std::iter::once(Edge { act: Act::Stop, next: 0 })
        .chain((0..num_actions).flat_map(|a| (0..n).map(move |q| Edge { act: Act::Do(ActionId(a as u32)), next: q })))
        .collect();
    let slots = n * num_obs;
    let mut digits = vec![0usize; slots];
    let mut done = n == 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let mut c = Controller::with_capacity(num_obs, n);
        for (i, &d) in digits.iter().enumerate() {
            c.set_edge(i / num_obs, ObsId((i % num_obs) as u32), choices[d]);
        }
        // odometer increment
        done = true;
        for d in digits.iter_mut() {
            *d += 1;
            if *d < choices.len() {
                done = false;
                break;
            }
            *d = 0;
        }
        Some(c)
    })
}

/// Highest exact LGT over all complete controllers with at most `n` states.
pub fn max_lgt(problem: &PlanningProblem, n: usize) -> Rational {
    let env = problem.env();
    let mut best = Rational::zero();
    for k in 1..=n {
        for c in complete_controllers(env.num_observations(), env.num_actions(), k) {
            let m = exact_measures(problem, &c);
            if m.lgt > best {
                best = m.lgt;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains;
    use crate::prob::ratio;

    fn edge(c: &mut Controller, problem: &PlanningProblem, q: usize, obs: &str, act: Option<&str>, next: usize) {
        let env = problem.env();
        let act = match act {
            Some(a) => Act::Do(env.action_id(a).unwrap()),
            None => Act::Stop,
        };
        c.set_edge(q, env.obs_id(obs).unwrap(), Edge { act, next });
    }

    fn flip_stop() -> (PlanningProblem, Controller) {
        let p = domains::coin_flip();
        let mut c = Controller::new(p.env().num_observations());
        edge(&mut c, &p, 0, "A", Some("flip"), 0);
        edge(&mut c, &p, 0, "goal", None, 0);
        edge(&mut c, &p, 0, "not-goal", None, 0);
        (p, c)
    }

    fn always_flip() -> (PlanningProblem, Controller) {
        let p = domains::decay_loop();
        let mut c = Controller::new(p.env().num_observations());
        edge(&mut c, &p, 0, "A", Some("flip"), 0);
        edge(&mut c, &p, 0, "goal", None, 0);
        (p, c)
    }

    #[test]
    fn flip_then_stop() {
        let (p, c) = flip_stop();
        let m = exact_measures(&p, &c);
        assert_eq!(m.lgt, ratio(1, 2));
        assert_eq!(m.lter, ratio(1, 1));
        assert_eq!(m.nonterm, ratio(0, 1));
    }

    #[test]
    fn decaying_flip_loop_reaches_goal() {
        let (p, c) = always_flip();
        let m = exact_measures(&p, &c);
        assert_eq!(m.lgt, ratio(1, 1));
        assert_eq!(m.lter, ratio(1, 1));
    }

    #[test]
    fn combined_decaying_loops_never_terminate() {
        let p = domains::three_state();
        let mut c = Controller::new(1);
        edge(&mut c, &p, 0, "o", Some("a"), 0);
        let m = exact_measures(&p, &c);
        assert_eq!(m.lgt, ratio(0, 1));
        assert_eq!(m.lter, ratio(0, 1));
        assert_eq!(m.nonterm, ratio(1, 1));
    }

    #[test]
    fn hall_a_two_state_controller() {
        let p = domains::hall_a_1d(5).unwrap();
        let mut c = Controller::new(3);
        edge(&mut c, &p, 0, "A", Some("→"), 0);
        edge(&mut c, &p, 0, "-", Some("→"), 0);
        edge(&mut c, &p, 0, "B", Some("←"), 1);
        edge(&mut c, &p, 1, "-", Some("←"), 1);
        edge(&mut c, &p, 1, "A", None, 1);
        let m = exact_measures(&p, &c);
        assert_eq!(m.lgt, ratio(1, 1));
    }

    #[test]
    fn undefined_pairs_have_their_own_sink() {
        let p = domains::coin_flip();
        let mut c = Controller::new(3);
        edge(&mut c, &p, 0, "A", Some("flip"), 0);
        edge(&mut c, &p, 0, "goal", None, 0);
        let m = exact_measures(&p, &c);
        assert_eq!(m.lgt, ratio(1, 2));
        assert_eq!(m.undefined, ratio(1, 2));
        assert_eq!(m.nonterm, ratio(0, 1));
        let empty = Controller::new(3);
        assert_eq!(exact_measures(&p, &empty).undefined, ratio(1, 1));
    }

    #[test]
    fn blocked_runs_count_as_nonterminating() {
        let p = domains::bridgewalk(2, ratio(1, 10)).unwrap();
        let mut c = Controller::new(4);
        for o in ["start", "middle", "end"] {
            edge(&mut c, &p, 0, o, Some("walk"), 0);
        }
        edge(&mut c, &p, 0, "fallen", None, 0);
        let m = exact_measures(&p, &c);
        assert_eq!(m.lgt, ratio(0, 1));
        assert_eq!(m.nonterm, ratio(81, 100));
    }

    #[test]
    fn brute_force_examples() {
        let (p, c) = always_flip();
        assert_eq!(brute_force_measures(&p, &c, 3).0, ratio(7, 8));
        let (p, c) = flip_stop();
        assert_eq!(brute_force_measures(&p, &c, 1), (ratio(1, 2), ratio(1, 2)));
        assert_eq!(brute_force_measures(&p, &c, 0), (ratio(0, 1), ratio(1, 1)));
    }

    #[test]
    fn goal_everywhere_forces_lgt_equal_lter() {
        let (p, c) = flip_stop();
        let all = p.with_goals(p.env().states()).unwrap();
        let m = exact_measures(&all, &c);
        assert_eq!(m.lgt, m.lter);
    }

    #[test]
    fn enumerates_every_complete_controller() {
        // one observation, one action, one state: stop or (a, 0)
        assert_eq!(complete_controllers(1, 1, 1).count(), 2);
        assert_eq!(complete_controllers(3, 1, 2).count(), 3usize.pow(6));
        assert!(complete_controllers(2, 2, 2).all(|c| c.is_complete()));
    }

    #[test]
    fn coin_flip_maximum() {
        assert_eq!(max_lgt(&domains::coin_flip(), 2), ratio(1, 2));
        assert_eq!(max_lgt(&domains::decay_loop(), 1), ratio(1, 1));
    }
}
