//! Environments, planning problems, finite-state controllers and histories.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_traits::{One, Zero};

use crate::error::ModelError;
use crate::prob::Rational;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(
    /// Dense index of an environment state.
    StateId
);
id_type!(
    /// Dense index of an environment action.
    ActionId
);
id_type!(
    /// Dense index of an observation.
    ObsId
);

/// A discrete distribution over successor states, positive entries only.
pub type Outcomes = Vec<(StateId, Rational)>;

/// Finite stochastic environment with a total observation function.
///
/// Transitions are partial over (state, action): a missing entry means the
/// action is inapplicable in that state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Environment {
    state_names: Vec<String>,
    action_names: Vec<String>,
    obs_names: Vec<String>,
    observe: Vec<ObsId>,
    delta: Vec<Option<Outcomes>>,
}

impl Environment {
    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn num_observations(&self) -> usize {
        self.obs_names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.num_states() as u32).map(StateId)
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionId> {
        (0..self.num_actions() as u32).map(ActionId)
    }

    pub fn observations(&self) -> impl Iterator<Item = ObsId> {
        (0..self.num_observations() as u32).map(ObsId)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s.index()]
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.action_names[a.index()]
    }

    pub fn obs_name(&self, o: ObsId) -> &str {
        &self.obs_names[o.index()]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name).map(|i| StateId(i as u32))
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.action_names.iter().position(|n| n == name).map(|i| ActionId(i as u32))
    }

    pub fn obs_id(&self, name: &str) -> Option<ObsId> {
        self.obs_names.iter().position(|n| n == name).map(|i| ObsId(i as u32))
    }

    #[inline]
    pub fn observe(&self, s: StateId) -> ObsId {
        self.observe[s.index()]
    }

    /// Successor distribution of `a` in `s`, or `None` if inapplicable.
    #[inline]
    pub fn outcomes(&self, s: StateId, a: ActionId) -> Option<&[(StateId, Rational)]> {
        self.delta[s.index() * self.num_actions() + a.index()].as_deref()
    }

    /// Probability of reaching `next` from `s` under `a` (zero if inapplicable).
    pub fn prob(&self, s: StateId, a: ActionId, next: StateId) -> Rational {
        self.outcomes(s, a)
            .and_then(|out| out.iter().find(|(t, _)| *t == next))
            .map(|(_, p)| p.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// True if every applicable action has a single outcome.
    pub fn is_deterministic(&self) -> bool {
        self.delta.iter().flatten().all(|d| d.len() == 1)
    }
}

/// Incremental constructor for [`Environment`]; validates on every call.
#[derive(Debug, Default)]
pub struct EnvironmentBuilder {
    state_names: Vec<String>,
    action_names: Vec<String>,
    obs_names: Vec<String>,
    state_index: HashMap<String, StateId>,
    action_index: HashMap<String, ActionId>,
    obs_index: HashMap<String, ObsId>,
    observe: HashMap<StateId, ObsId>,
    delta: HashMap<(StateId, ActionId), Outcomes>,
}

impl EnvironmentBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&mut self, name: &str) -> Result<StateId, ModelError> {
        if self.state_index.contains_key(name) {
            return Err(ModelError::DuplicateIdentifier { kind: "state", name: name.to_string() });
        }
        let id = StateId(self.state_names.len() as u32);
        self.state_names.push(name.to_string());
        self.state_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn action(&mut self, name: &str) -> Result<ActionId, ModelError> {
        if name == "stop" {
            return Err(ModelError::ReservedAction);
        }
        if self.action_index.contains_key(name) {
            return Err(ModelError::DuplicateIdentifier { kind: "action", name: name.to_string() });
        }
        let id = ActionId(self.action_names.len() as u32);
        self.action_names.push(name.to_string());
        self.action_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn observation(&mut self, name: &str) -> Result<ObsId, ModelError> {
        if self.obs_index.contains_key(name) {
            return Err(ModelError::DuplicateIdentifier { kind: "observation", name: name.to_string() });
        }
        let id = ObsId(self.obs_names.len() as u32);
        self.obs_names.push(name.to_string());
        self.obs_index.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn state_id(&self, name: &str) -> Result<StateId, ModelError> {
        self.state_index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::DanglingIdentifier { kind: "state", name: name.to_string() })
    }

    pub fn action_id(&self, name: &str) -> Result<ActionId, ModelError> {
        self.action_index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::DanglingIdentifier { kind: "action", name: name.to_string() })
    }

    pub fn obs_id(&self, name: &str) -> Result<ObsId, ModelError> {
        self.obs_index
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::DanglingIdentifier { kind: "observation", name: name.to_string() })
    }

    pub fn observe(&mut self, state: &str, obs: &str) -> Result<(), ModelError> {
        let s = self.state_id(state)?;
        let o = self.obs_id(obs)?;
        if self.observe.insert(s, o).is_some() {
            return Err(ModelError::DuplicateObservation(state.to_string()));
        }
        Ok(())
    }

    /// Declares the successor distribution of `action` in `state`.
    ///
    /// Repeated successors are merged and zero entries dropped; the total
    /// must be exactly 1.
    pub fn transition(&mut self, state: &str, action: &str, outcomes: &[(&str, Rational)]) -> Result<(), ModelError> {
        let s = self.state_id(state)?;
        let a = self.action_id(action)?;
        if self.delta.contains_key(&(s, a)) {
            return Err(ModelError::DuplicateTransition { state: state.to_string(), action: action.to_string() });
        }
        let mut merged: Outcomes = Vec::new();
        let mut sum = Rational::zero();
        for (name, p) in outcomes {
            let t = self.state_id(name)?;
            if *p < Rational::zero() {
                return Err(ModelError::NegativeProbability { state: state.to_string(), action: action.to_string() });
            }
            sum += p;
            if p.is_zero() {
                continue;
            }
            match merged.iter_mut().find(|(u, _)| *u == t) {
                Some((_, q)) => *q += p,
                None => merged.push((t, p.clone())),
            }
        }
        if !sum.is_one() {
            return Err(ModelError::ProbabilitySum {
                state: state.to_string(),
                action: action.to_string(),
                sum: format!("{}/{}", sum.numer(), sum.denom()),
            });
        }
        self.delta.insert((s, a), merged);
        Ok(())
    }

    pub fn build(self) -> Result<Environment, ModelError> {
        if self.state_names.is_empty() {
            return Err(ModelError::Empty("state"));
        }
        if self.obs_names.is_empty() {
            return Err(ModelError::Empty("observation"));
        }
        let mut observe = Vec::with_capacity(self.state_names.len());
        for (i, name) in self.state_names.iter().enumerate() {
            match self.observe.get(&StateId(i as u32)) {
                Some(o) => observe.push(*o),
                None => return Err(ModelError::MissingObservation(name.clone())),
            }
        }
        let na = self.action_names.len();
        let mut delta = vec![None; self.state_names.len() * na];
        for ((s, a), out) in self.delta {
            delta[s.index() * na + a.index()] = Some(out);
        }
        Ok(Environment {
            state_names: self.state_names,
            action_names: self.action_names,
            obs_names: self.obs_names,
            observe,
            delta,
        })
    }
}

/// Environment plus initial state and goal set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanningProblem {
    env: Environment,
    initial: StateId,
    goal: Vec<bool>,
}

impl PlanningProblem {
    pub fn new(env: Environment, initial: StateId, goals: impl IntoIterator<Item = StateId>) -> Result<Self, ModelError> {
        if initial.index() >= env.num_states() {
            return Err(ModelError::DanglingIdentifier { kind: "state", name: format!("#{}", initial.0) });
        }
        let mut goal = vec![false; env.num_states()];
        for g in goals {
            if g.index() >= env.num_states() {
                return Err(ModelError::DanglingIdentifier { kind: "state", name: format!("#{}", g.0) });
            }
            goal[g.index()] = true;
        }
        Ok(Self { env, initial, goal })
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    #[inline]
    pub fn is_goal(&self, s: StateId) -> bool {
        self.goal[s.index()]
    }

    pub fn goals(&self) -> impl Iterator<Item = StateId> + '_ {
        self.env.states().filter(|s| self.is_goal(*s))
    }

    /// Same environment and goal set with a different initial state.
    pub fn with_initial(&self, initial: StateId) -> Self {
        assert!(initial.index() < self.env.num_states(), "initial state out of range");
        Self { env: self.env.clone(), initial, goal: self.goal.clone() }
    }

    /// Same environment and initial state with a different goal set.
    pub fn with_goals(&self, goals: impl IntoIterator<Item = StateId>) -> Result<Self, ModelError> {
        Self::new(self.env.clone(), self.initial, goals)
    }
}

/// Controller output for one (controller state, observation) pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Act {
    Stop,
    Do(ActionId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub act: Act,
    pub next: usize,
}

/// Mealy-style finite-state controller. Labeling and transition share one
/// partial map `(q, o) -> (act, q')`; state 0 is the initial state.
#[derive(Clone, Debug)]
pub struct Controller {
    num_obs: usize,
    num_states: usize,
    edges: Vec<Option<Edge>>,
}

impl Controller {
    /// The empty controller: one state, no edges.
    pub fn new(num_obs: usize) -> Self {
        Self::with_capacity(num_obs, 1)
    }

    pub fn with_capacity(num_obs: usize, max_states: usize) -> Self {
        Self { num_obs, num_states: 1, edges: vec![None; num_obs * max_states.max(1)] }
    }

    pub fn num_observations(&self) -> usize {
        self.num_obs
    }

    /// Number of controller states in use (highest referenced index + 1).
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    #[inline]
    pub fn edge(&self, q: usize, o: ObsId) -> Option<Edge> {
        if q >= self.num_states {
            return None;
        }
        self.edges.get(q * self.num_obs + o.index()).copied().flatten()
    }

    pub fn set_edge(&mut self, q: usize, o: ObsId, edge: Edge) {
        let needed = (q.max(edge.next) + 1) * self.num_obs;
        if self.edges.len() < needed {
            self.edges.resize(needed, None);
        }
        self.edges[q * self.num_obs + o.index()] = Some(edge);
        self.num_states = self.num_states.max(q + 1).max(edge.next + 1);
    }

    pub fn clear_edge(&mut self, q: usize, o: ObsId) {
        if let Some(slot) = self.edges.get_mut(q * self.num_obs + o.index()) {
            *slot = None;
        }
    }

    /// Shrinks or restores the used-state count; for undoing `set_edge`.
    pub(crate) fn set_num_states(&mut self, n: usize) {
        self.num_states = n.max(1);
    }

    /// Defined edges in `(q, o)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, ObsId, Edge)> + '_ {
        (0..self.num_states).flat_map(move |q| {
            (0..self.num_obs).filter_map(move |o| {
                let o = ObsId(o as u32);
                self.edge(q, o).map(|e| (q, o, e))
            })
        })
    }

    pub fn num_edges(&self) -> usize {
        self.edges().count()
    }

    pub fn is_complete(&self) -> bool {
        self.num_edges() == self.num_states * self.num_obs
    }

    /// Every undefined pair of the used states mapped to `stop`.
    pub fn completed_with_stop(&self) -> Self {
        let mut c = self.clone();
        for q in 0..self.num_states {
            for o in 0..self.num_obs {
                let o = ObsId(o as u32);
                if c.edge(q, o).is_none() {
                    c.set_edge(q, o, Edge { act: Act::Stop, next: q });
                }
            }
        }
        c
    }

    /// Stable hash over the defined edges.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }

    /// Checks action/observation/state references against `env`.
    pub fn validate(&self, env: &Environment) -> Result<(), ModelError> {
        if self.num_obs != env.num_observations() {
            return Err(ModelError::DanglingIdentifier {
                kind: "observation",
                name: format!("controller built for {} observations", self.num_obs),
            });
        }
        for (_, _, e) in self.edges() {
            if let Act::Do(a) = e.act {
                if a.index() >= env.num_actions() {
                    return Err(ModelError::DanglingIdentifier { kind: "action", name: format!("#{}", a.0) });
                }
            }
        }
        Ok(())
    }
}

impl PartialEq for Controller {
    fn eq(&self, other: &Self) -> bool {
        self.num_obs == other.num_obs && self.num_states == other.num_states && self.edges().eq(other.edges())
    }
}

impl Eq for Controller {}

impl Hash for Controller {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.num_states.hash(state);
        for (q, o, e) in self.edges() {
            (q, o, e).hash(state);
        }
    }
}

/// Outcome of executing one step of the combined system.
#[derive(Clone, Debug, PartialEq)]
pub enum SystemStep<'a> {
    Stop,
    Undefined,
    /// An empty outcome list means the action is inapplicable and the run
    /// is blocked.
    Branch { action: ActionId, next: usize, outcomes: &'a [(StateId, Rational)] },
}

/// One state -> observation -> action -> next-state cycle from `(q, s)`.
pub fn system_step<'a>(problem: &'a PlanningProblem, controller: &Controller, q: usize, s: StateId) -> SystemStep<'a> {
    let env = problem.env();
    match controller.edge(q, env.observe(s)) {
        None => SystemStep::Undefined,
        Some(Edge { act: Act::Stop, .. }) => SystemStep::Stop,
        Some(Edge { act: Act::Do(a), next }) => {
            SystemStep::Branch { action: a, next, outcomes: env.outcomes(s, a).unwrap_or(&[]) }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistoryStep {
    pub q: usize,
    pub s: StateId,
    /// Probability of the transition into this element; 1 for the first.
    pub p: Rational,
}

/// Finite sequence of combined states with per-step probabilities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct History {
    steps: Vec<HistoryStep>,
}

impl History {
    pub fn start(q: usize, s: StateId) -> Self {
        Self { steps: vec![HistoryStep { q, s, p: Rational::one() }] }
    }

    pub fn from_steps(steps: Vec<HistoryStep>) -> Option<Self> {
        if steps.is_empty() || !steps[0].p.is_one() {
            return None;
        }
        Some(Self { steps })
    }

    pub fn push(&mut self, q: usize, s: StateId, p: Rational) {
        self.steps.push(HistoryStep { q, s, p });
    }

    pub fn steps(&self) -> &[HistoryStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> &HistoryStep {
        self.steps.last().expect("history is never empty")
    }

    /// Product of the step probabilities.
    pub fn likelihood(&self) -> Rational {
        self.steps.iter().fold(Rational::one(), |acc, st| acc * &st.p)
    }

    /// `self · other`, defined when `other` starts where `self` ends.
    pub fn concat(&self, other: &History) -> Option<History> {
        let end = self.last();
        let first = &other.steps[0];
        if end.q != first.q || end.s != first.s {
            return None;
        }
        let mut steps = self.steps.clone();
        steps.extend(other.steps[1..].iter().cloned());
        Some(History { steps })
    }

    /// Checks every step against the controller and transition function.
    pub fn is_valid(&self, problem: &PlanningProblem, controller: &Controller) -> bool {
        self.steps.windows(2).all(|w| match system_step(problem, controller, w[0].q, w[0].s) {
            SystemStep::Branch { next, outcomes, .. } => {
                w[1].q == next && outcomes.iter().any(|(t, p)| *t == w[1].s && *p == w[1].p && !p.is_zero())
            }
            _ => false,
        })
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, st) in self.steps.iter().enumerate() {
            if i > 0 {
                write!(f, " -{}/{}-> ", st.p.numer(), st.p.denom())?;
            }
            write!(f, "<q{},{}>", st.q, st.s.0)?;
        }
        Ok(())
    }
}

/// True iff the history ends with `stop` in a goal state.
pub fn is_goal_history(problem: &PlanningProblem, controller: &Controller, h: &History) -> bool {
    let end = h.last();
    problem.is_goal(end.s) && matches!(system_step(problem, controller, end.q, end.s), SystemStep::Stop)
}

/// True iff the history ends with `stop`.
pub fn is_terminating_history(problem: &PlanningProblem, controller: &Controller, h: &History) -> bool {
    let end = h.last();
    matches!(system_step(problem, controller, end.q, end.s), SystemStep::Stop)
}

/// Input to the probabilistic synthesis engine.
#[derive(Clone, Debug)]
pub struct SynthesisRequest {
    pub problem: PlanningProblem,
    pub max_states: usize,
    pub lgt_star: Rational,
    pub lter_star: Option<Rational>,
}

impl SynthesisRequest {
    pub fn new(problem: PlanningProblem, max_states: usize, lgt_star: Rational) -> Result<Self, ModelError> {
        if max_states == 0 {
            return Err(ModelError::ParameterOutOfRange { name: "max_states".into(), reason: "must be at least 1".into() });
        }
        check_open_unit("lgt_star", &lgt_star)?;
        Ok(Self { problem, max_states, lgt_star, lter_star: None })
    }

    pub fn with_lter(mut self, lter_star: Rational) -> Result<Self, ModelError> {
        check_open_unit("lter_star", &lter_star)?;
        self.lter_star = Some(lter_star);
        Ok(self)
    }
}

fn check_open_unit(name: &str, v: &Rational) -> Result<(), ModelError> {
    if *v <= Rational::zero() || *v >= Rational::one() {
        return Err(ModelError::ParameterOutOfRange { name: name.into(), reason: "must lie strictly between 0 and 1".into() });
    }
    Ok(())
}
