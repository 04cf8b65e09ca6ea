//! Probabilistic AND-OR search for bounded controllers.
//!
//! The search simulates the combined system depth-first, extending the
//! controller lazily whenever an undefined `(q, o)` pair is met. Explored
//! mass is booked in a [`SearchLedger`]; after every ledger update the
//! derived lower bounds decide between returning the controller, failing
//! the current branch, or continuing.
//!
//! Backtracking restores a full snapshot taken at the choice point.
//! Extensions are tried in a fixed order: `stop` first, then every action in
//! declaration order with successor states ascending, restricted to at most
//! one state above the highest one in use.

use std::collections::HashMap;

use num_traits::One;

use crate::ledger::{LambdaVector, SearchLedger};
use crate::model::{system_step, Act, Controller, Edge, PlanningProblem, StateId, SynthesisRequest, SystemStep};
use crate::prob::{Rational, Scalar};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SynthesisOutcome {
    /// A controller meeting the bounds, completed with `stop` on every
    /// pair the search left undefined.
    Controller(Controller),
    /// Every controller within the state bound was refuted.
    Failure,
    /// The OR-step budget ran out before a verdict.
    BudgetExhausted,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub or_steps: u64,
    pub and_steps: u64,
    pub choice_points: u64,
    pub backtracks: u64,
    pub peak_depth: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesisResult {
    pub outcome: SynthesisOutcome,
    pub stats: SearchStats,
}

/// Callback invoked after every ledger update with the controller
/// fingerprint and the current bounds.
pub type Hook<'h, T> = &'h mut dyn FnMut(u64, &LambdaVector<T>);

/// Exact search with the default budget.
pub fn pandor_synth(req: &SynthesisRequest) -> SynthesisResult {
    Pandor::<Rational>::new(req).run()
}

/// Configurable search over scalar type `T`. Only `Rational` gives exact
/// soundness; `f64` trades it for speed.
pub struct Pandor<'r, 'h, T: Scalar> {
    req: &'r SynthesisRequest,
    budget: u64,
    hook: Option<Hook<'h, T>>,
}

impl<'r, 'h, T: Scalar> Pandor<'r, 'h, T> {
    pub fn new(req: &'r SynthesisRequest) -> Self {
        Self { req, budget: DEFAULT_BUDGET, hook: None }
    }

    pub fn budget(mut self, or_steps: u64) -> Self {
        self.budget = or_steps;
        self
    }

    pub fn hook(mut self, hook: Hook<'h, T>) -> Self {
        self.hook = Some(hook);
        self
    }

    pub fn run(self) -> SynthesisResult {
        let req = self.req;
        let bounds = Bounds {
            lgt: T::from_rational(&req.lgt_star),
            lter: req.lter_star.as_ref().map(T::from_rational),
        };
        let controller = Controller::with_capacity(req.problem.env().num_observations(), req.max_states);
        let mut search = Search::new(&req.problem, controller, Mode::Synthesize { bounds, max_states: req.max_states }, self.hook);
        let outcome = search.run(self.budget);
        SynthesisResult { outcome, stats: search.stats }
    }
}

/// Explores every at-most-once-looping history of a fixed controller with
/// no early termination and returns the final bounds.
///
/// Undefined pairs contribute nothing.
pub fn explore_fixed(problem: &PlanningProblem, controller: &Controller, hook: Option<Hook<'_, Rational>>) -> LambdaVector<Rational> {
    let mut search = Search::new(problem, controller.clone(), Mode::Fixed, hook);
    let outcome = search.run(u64::MAX);
    debug_assert_eq!(outcome, SynthesisOutcome::Failure);
    search.state.ledger.calc_lambda()
}

struct Bounds<T> {
    lgt: T,
    lter: Option<T>,
}

enum Mode<T> {
    Synthesize { bounds: Bounds<T>, max_states: usize },
    Fixed,
}

#[derive(Clone, Copy, Debug)]
enum Successors<'a> {
    Initial,
    Outcomes(&'a [(StateId, Rational)]),
}

#[derive(Clone, Debug)]
struct Frame<'a> {
    /// Path node this frame expands; `None` for the virtual root.
    node: Option<(usize, StateId)>,
    next_q: usize,
    succ: Successors<'a>,
    idx: usize,
}

#[derive(Clone, Debug)]
struct State<'a, T> {
    controller: Controller,
    ledger: SearchLedger<T>,
    frames: Vec<Frame<'a>>,
    on_path: HashMap<(usize, StateId), usize>,
}

struct ChoicePoint<'a, T> {
    snapshot: State<'a, T>,
    q: usize,
    s: StateId,
    p: Rational,
    options: Vec<Edge>,
    next: usize,
}

enum Verdict {
    Continue,
    Success,
    Fail,
}

struct Search<'a, 'h, T: Scalar> {
    problem: &'a PlanningProblem,
    mode: Mode<T>,
    hook: Option<Hook<'h, T>>,
    state: State<'a, T>,
    choices: Vec<ChoicePoint<'a, T>>,
    stats: SearchStats,
}

impl<'a, 'h, T: Scalar> Search<'a, 'h, T> {
    fn new(problem: &'a PlanningProblem, controller: Controller, mode: Mode<T>, hook: Option<Hook<'h, T>>) -> Self {
        let root = Frame { node: None, next_q: 0, succ: Successors::Initial, idx: 0 };
        Self {
            problem,
            mode,
            hook,
            state: State { controller, ledger: SearchLedger::new(), frames: vec![root], on_path: HashMap::new() },
            choices: Vec::new(),
            stats: SearchStats::default(),
        }
    }

    fn run(&mut self, budget: u64) -> SynthesisOutcome {
        let mut pending: Option<(usize, StateId, Rational)> = None;
        loop {
            if self.stats.or_steps >= budget {
                return SynthesisOutcome::BudgetExhausted;
            }
            let verdict = match pending.take() {
                Some((q, s, p)) => self.or_step(q, s, p),
                None => self.advance(),
            };
            match verdict {
                Verdict::Continue => {}
                Verdict::Success => {
                    return SynthesisOutcome::Controller(self.state.controller.completed_with_stop());
                }
                Verdict::Fail => match self.backtrack() {
                    Some(retry) => pending = Some(retry),
                    None => return SynthesisOutcome::Failure,
                },
            }
        }
    }

    /// Visits the next successor of the deepest frame, or pops it.
    fn advance(&mut self) -> Verdict {
        let top = self.state.frames.last_mut().expect("root frame is never popped");
        let next = match top.succ {
            Successors::Initial if top.idx == 0 => Some((self.problem.initial(), Rational::one())),
            Successors::Outcomes(out) if top.idx < out.len() => Some(out[top.idx].clone()),
            _ => None,
        };
        if let Some((s, p)) = next {
            top.idx += 1;
            let q = top.next_q;
            return self.or_step(q, s, p);
        }
        if self.state.frames.len() == 1 {
            // Everything reachable is explored and no bound was met.
            return Verdict::Fail;
        }
        let frame = self.state.frames.pop().expect("non-root frame");
        self.state.on_path.remove(&frame.node.expect("path frame"));
        self.state.ledger.cumulate_alpha().expect("ledger depth tracks the frame stack");
        self.and_step()
    }

    fn or_step(&mut self, q: usize, s: StateId, p: Rational) -> Verdict {
        self.stats.or_steps += 1;
        self.visit(q, s, p)
    }

    fn visit(&mut self, q: usize, s: StateId, p: Rational) -> Verdict {
        let pt = T::from_rational(&p);
        if let Some(&k) = self.state.on_path.get(&(q, s)) {
            let ledger = &mut self.state.ledger;
            let p_loop = ledger.loop_likelihood(k, pt.clone());
            if p_loop.is_saturated() {
                ledger.add_noter(pt);
            } else {
                ledger.add_loop(k, pt).expect("path index is in range");
            }
            return self.and_step();
        }
        match system_step(self.problem, &self.state.controller, q, s) {
            SystemStep::Stop => {
                if self.problem.is_goal(s) {
                    self.state.ledger.add_goal(pt);
                } else {
                    self.state.ledger.add_fail(pt);
                }
                self.and_step()
            }
            SystemStep::Branch { outcomes: [], .. } => {
                self.state.ledger.add_noter(pt);
                self.and_step()
            }
            SystemStep::Branch { next, outcomes, .. } => {
                let depth = self.state.ledger.depth();
                self.state.on_path.insert((q, s), depth);
                self.state.ledger.push(pt);
                self.state.frames.push(Frame { node: Some((q, s)), next_q: next, succ: Successors::Outcomes(outcomes), idx: 0 });
                self.stats.peak_depth = self.stats.peak_depth.max(depth + 1);
                Verdict::Continue
            }
            SystemStep::Undefined => {
                let Mode::Synthesize { max_states, .. } = self.mode else { return Verdict::Continue };
                self.stats.choice_points += 1;
                let options = extension_options(self.problem, &self.state.controller, max_states);
                let o = self.problem.env().observe(s);
                let snapshot = self.state.clone();
                self.state.controller.set_edge(q, o, options[0]);
                self.choices.push(ChoicePoint { snapshot, q, s, p: p.clone(), options, next: 1 });
                self.visit(q, s, p)
            }
        }
    }

    fn and_step(&mut self) -> Verdict {
        self.stats.and_steps += 1;
        let lam = self.state.ledger.calc_lambda();
        if let Some(hook) = self.hook.as_mut() {
            hook(self.state.controller.fingerprint(), &lam);
        }
        let Mode::Synthesize { bounds, .. } = &self.mode else { return Verdict::Continue };
        let (g, f, n) = (lam.goal0().clone(), lam.fail0().clone(), lam.noter0().clone());
        let lter = g.clone() + f.clone();
        let goal_met = g >= bounds.lgt;
        let lter_met = bounds.lter.as_ref().is_none_or(|b| lter >= *b);
        if goal_met && lter_met {
            return Verdict::Success;
        }
        let goal_dead = T::one() - f - n.clone() < bounds.lgt;
        let lter_dead = bounds.lter.as_ref().is_some_and(|b| T::one() - n < *b);
        if goal_dead || lter_dead {
            return Verdict::Fail;
        }
        Verdict::Continue
    }

    /// Restores the latest choice point with an untried option.
    fn backtrack(&mut self) -> Option<(usize, StateId, Rational)> {
        loop {
            let cp = self.choices.last_mut()?;
            if cp.next >= cp.options.len() {
                self.choices.pop();
                continue;
            }
            self.stats.backtracks += 1;
            let edge = cp.options[cp.next];
            cp.next += 1;
            let (q, s, p) = (cp.q, cp.s, cp.p.clone());
            self.state = if cp.next == cp.options.len() {
                self.choices.pop().expect("checked above").snapshot
            } else {
                cp.snapshot.clone()
            };
            let o = self.problem.env().observe(s);
            self.state.controller.set_edge(q, o, edge);
            return Some((q, s, p));
        }
    }
}

/// Candidate edges for an undefined pair, in search order.
pub fn extension_options(problem: &PlanningProblem, controller: &Controller, max_states: usize) -> Vec<Edge> {
    let limit = controller.num_states().min(max_states.saturating_sub(1));
    let mut options = vec![Edge { act: Act::Stop, next: 0 }];
    for a in problem.env().actions() {
        for next in 0..=limit {
            options.push(Edge { act: Act::Do(a), next });
        }
    }
    options
}
