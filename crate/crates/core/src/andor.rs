//! Classical bounded AND-OR search over the support of the transitions.
//!
//! A controller is accepted only if every history from every initial state
//! stops in a goal state without repeating a combined state. Probabilities
//! are ignored, so decaying loops and unavoidable dead ends both fail.
//!
//! Goal states are reached by choosing `stop` like any other extension;
//! `stop` outside the goal set fails the branch. Backtracking replays an
//! undo log down to the choice point. Combined states whose whole subtree
//! was verified are memoised and accepted on later visits; the memo is part
//! of the undo log.

use std::collections::HashSet;

use crate::error::ModelError;
use crate::model::{system_step, Controller, Edge, Environment, ObsId, PlanningProblem, StateId, SystemStep};
use crate::pandor::{extension_options, SearchStats, SynthesisOutcome, SynthesisResult, DEFAULT_BUDGET};

/// Environment with a set of initial states.
#[derive(Clone, Debug)]
pub struct GeneralizedProblem {
    problem: PlanningProblem,
    initial: Vec<StateId>,
}

impl GeneralizedProblem {
    pub fn new(problem: PlanningProblem, initial: Vec<StateId>) -> Result<Self, ModelError> {
        if initial.is_empty() {
            return Err(ModelError::Empty("initial state"));
        }
        if let Some(s) = initial.iter().find(|s| s.index() >= problem.env().num_states()) {
            return Err(ModelError::DanglingIdentifier { kind: "state", name: format!("#{}", s.0) });
        }
        Ok(Self { problem, initial })
    }

    pub fn env(&self) -> &Environment {
        self.problem.env()
    }

    pub fn initial_states(&self) -> &[StateId] {
        &self.initial
    }
}

impl From<PlanningProblem> for GeneralizedProblem {
    fn from(problem: PlanningProblem) -> Self {
        let initial = vec![problem.initial()];
        Self { problem, initial }
    }
}

pub fn andor_synth(gp: &GeneralizedProblem, max_states: usize) -> SynthesisResult {
    andor_synth_with_budget(gp, max_states, DEFAULT_BUDGET)
}

pub fn andor_synth_with_budget(gp: &GeneralizedProblem, max_states: usize, budget: u64) -> SynthesisResult {
    let mut search = Search::new(gp, max_states.max(1));
    let outcome = search.run(budget);
    SynthesisResult { outcome, stats: search.stats }
}

#[derive(Clone, Debug)]
struct Frame<'a> {
    node: Option<(usize, StateId)>,
    next_q: usize,
    succ: Succ<'a>,
    idx: usize,
}

#[derive(Clone, Copy, Debug)]
enum Succ<'a> {
    Initial(&'a [StateId]),
    Outcomes(&'a [(StateId, crate::prob::Rational)]),
}

impl Succ<'_> {
    fn get(&self, i: usize) -> Option<StateId> {
        match self {
            Succ::Initial(s) => s.get(i).copied(),
            Succ::Outcomes(o) => o.get(i).map(|(s, _)| *s),
        }
    }
}

enum Undo<'a> {
    Push,
    Pop(Frame<'a>),
    Advance,
    SetEdge { q: usize, o: ObsId, num_states: usize },
    Memo((usize, StateId)),
}

struct ChoicePoint {
    trail_len: usize,
    q: usize,
    s: StateId,
    options: Vec<Edge>,
    next: usize,
}

enum Verdict {
    Continue,
    Success,
    Fail,
}

struct Search<'a> {
    gp: &'a GeneralizedProblem,
    max_states: usize,
    controller: Controller,
    frames: Vec<Frame<'a>>,
    on_path: HashSet<(usize, StateId)>,
    memo: HashSet<(usize, StateId)>,
    trail: Vec<Undo<'a>>,
    choices: Vec<ChoicePoint>,
    stats: SearchStats,
}

impl<'a> Search<'a> {
    fn new(gp: &'a GeneralizedProblem, max_states: usize) -> Self {
        let root = Frame { node: None, next_q: 0, succ: Succ::Initial(&gp.initial), idx: 0 };
        Self {
            gp,
            max_states,
            controller: Controller::with_capacity(gp.env().num_observations(), max_states),
            frames: vec![root],
            on_path: HashSet::new(),
            memo: HashSet::new(),
            trail: Vec::new(),
            choices: Vec::new(),
            stats: SearchStats::default(),
        }
    }

    fn run(&mut self, budget: u64) -> SynthesisOutcome {
        let mut pending = None;
        loop {
            if self.stats.or_steps >= budget {
                return SynthesisOutcome::BudgetExhausted;
            }
            let verdict = match pending.take() {
                Some((q, s)) => self.or_step(q, s),
                None => self.advance(),
            };
            match verdict {
                Verdict::Continue => {}
                Verdict::Success => return SynthesisOutcome::Controller(self.controller.completed_with_stop()),
                Verdict::Fail => match self.backtrack() {
                    Some(retry) => pending = Some(retry),
                    None => return SynthesisOutcome::Failure,
                },
            }
        }
    }

    fn advance(&mut self) -> Verdict {
        let top = self.frames.last_mut().expect("root frame is never popped");
        if let Some(s) = top.succ.get(top.idx) {
            top.idx += 1;
            let q = top.next_q;
            self.trail.push(Undo::Advance);
            return self.or_step(q, s);
        }
        if self.frames.len() == 1 {
            return Verdict::Success;
        }
        let frame = self.frames.pop().expect("non-root frame");
        let node = frame.node.expect("path frame");
        self.on_path.remove(&node);
        self.trail.push(Undo::Pop(frame));
        if self.memo.insert(node) {
            self.trail.push(Undo::Memo(node));
        }
        Verdict::Continue
    }

    fn or_step(&mut self, q: usize, s: StateId) -> Verdict {
        self.stats.or_steps += 1;
        self.visit(q, s)
    }

    fn visit(&mut self, q: usize, s: StateId) -> Verdict {
        if self.memo.contains(&(q, s)) {
            return Verdict::Continue;
        }
        if self.on_path.contains(&(q, s)) {
            return Verdict::Fail;
        }
        let problem = &self.gp.problem;
        match system_step(problem, &self.controller, q, s) {
            SystemStep::Stop if problem.is_goal(s) => Verdict::Continue,
            SystemStep::Stop => Verdict::Fail,
            SystemStep::Branch { outcomes: [], .. } => Verdict::Fail,
            SystemStep::Branch { next, outcomes, .. } => {
                self.on_path.insert((q, s));
                self.frames.push(Frame { node: Some((q, s)), next_q: next, succ: Succ::Outcomes(outcomes), idx: 0 });
                self.trail.push(Undo::Push);
                self.stats.peak_depth = self.stats.peak_depth.max(self.frames.len() - 1);
                Verdict::Continue
            }
            SystemStep::Undefined => {
                self.stats.choice_points += 1;
                let options = extension_options(problem, &self.controller, self.max_states);
                let first = options[0];
                self.choices.push(ChoicePoint { trail_len: self.trail.len(), q, s, options, next: 1 });
                self.set_edge(q, s, first);
                self.visit(q, s)
            }
        }
    }

    fn set_edge(&mut self, q: usize, s: StateId, edge: Edge) {
        let o = self.gp.env().observe(s);
        self.trail.push(Undo::SetEdge { q, o, num_states: self.controller.num_states() });
        self.controller.set_edge(q, o, edge);
    }

    fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            match self.trail.pop().expect("checked length") {
                Undo::Push => {
                    let frame = self.frames.pop().expect("pushed frame");
                    self.on_path.remove(&frame.node.expect("path frame"));
                }
                Undo::Pop(frame) => {
                    self.on_path.insert(frame.node.expect("path frame"));
                    self.frames.push(frame);
                }
                Undo::Advance => self.frames.last_mut().expect("advanced frame").idx -= 1,
                Undo::SetEdge { q, o, num_states } => {
                    self.controller.clear_edge(q, o);
                    self.controller.set_num_states(num_states);
                }
                Undo::Memo(node) => {
                    self.memo.remove(&node);
                }
            }
        }
    }

    fn backtrack(&mut self) -> Option<(usize, StateId)> {
        loop {
            let cp = self.choices.last_mut()?;
            if cp.next >= cp.options.len() {
                self.choices.pop();
                continue;
            }
            self.stats.backtracks += 1;
            let edge = cp.options[cp.next];
            cp.next += 1;
            let (len, q, s) = (cp.trail_len, cp.q, cp.s);
            self.undo_to(len);
            self.set_edge(q, s, edge);
            return Some((q, s));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains;
    use crate::format::{parse_controller, write_controller};
    use crate::oracle::exact_measures;
    use crate::prob::ratio;

    #[test]
    fn hall_a_reproduces_two_state_controller() {
        let p = domains::hall_a_1d(5).unwrap();
        let r = andor_synth(&p.clone().into(), 2);
        let SynthesisOutcome::Controller(c) = r.outcome else { panic!("{r:?}") };
        let expected = parse_controller(
            "states 2\nedge 0 A → 0\nedge 0 - → 0\nedge 0 B ← 1\nedge 1 - ← 1\nedge 1 A stop 0\n",
            p.env(),
        )
        .unwrap();
        let defined: Vec<_> = c.edges().filter(|(q, o, _)| expected.edge(*q, *o).is_some()).collect();
        assert_eq!(defined, expected.edges().collect::<Vec<_>>(), "{}", write_controller(&c, p.env()));
        assert_eq!(exact_measures(&p, &c).lgt, ratio(1, 1));
    }

    #[test]
    fn unavoidable_dead_end_fails() {
        for n in 1..=3 {
            assert_eq!(andor_synth(&domains::coin_flip().into(), n).outcome, SynthesisOutcome::Failure);
        }
    }

    #[test]
    fn decaying_loop_fails() {
        for n in 1..=3 {
            assert_eq!(andor_synth(&domains::decay_loop().into(), n).outcome, SynthesisOutcome::Failure);
        }
    }

    #[test]
    fn one_state_cannot_return_to_a() {
        assert_eq!(andor_synth(&domains::hall_a_1d(4).unwrap().into(), 1).outcome, SynthesisOutcome::Failure);
    }

    #[test]
    fn several_initial_states() {
        let p = domains::hall_a_1d(4).unwrap();
        let env = p.env();
        let starts = vec![env.state_id("c0").unwrap(), env.state_id("c1").unwrap()];
        let gp = GeneralizedProblem::new(p.clone(), starts.clone()).unwrap();
        let SynthesisOutcome::Controller(c) = andor_synth(&gp, 2).outcome else { panic!() };
        for s in starts {
            let from_s = p.with_initial(s);
            assert_eq!(exact_measures(&from_s, &c).lgt, ratio(1, 1));
        }
        assert!(GeneralizedProblem::new(p, vec![]).is_err());
    }

    #[test]
    fn budget_is_respected() {
        let r = andor_synth_with_budget(&domains::hall_a_1d(5).unwrap().into(), 2, 2);
        assert_eq!(r.outcome, SynthesisOutcome::BudgetExhausted);
    }
}
