//! Built-in benchmark domains.
//!
//! | name               | parameters            | notes                                  |
//! |--------------------|-----------------------|----------------------------------------|
//! | `coin-flip`        |                       | one flip, goal or dead end             |
//! | `decay-loop`       |                       | `no-op` self loop, decaying `flip` loop |
//! | `three-state`      |                       | decaying loops that never terminate    |
//! | `hall-a-1d`        | `n` (2..=64)          | visit B, return to A                   |
//! | `noisy-hall-a-1d`  | `n`, `p` (0<p<1)      | moves succeed w.p. `p`, else stay      |
//! | `hall-a-2d`        | `n` (2..=16)          | perimeter corridor of an n x n grid    |
//! | `noisy-hall-a-2d`  | `n`, `p`              | noisy perimeter corridor               |
//! | `bridgewalk`       | `n` (1..=1000), `p`   | each step falls w.p. `p`               |
//!
//! The 2-D hall keeps only the perimeter cells of the grid; A is the top-left
//! corner, B the bottom-right one, the two remaining corners observe `+`.
//! Hall actions are declared `←` first, which steers the search towards the
//! familiar two-state controller.

use num_traits::{One, ToPrimitive, Zero};

use crate::error::ModelError;
use crate::model::{EnvironmentBuilder, PlanningProblem};
use crate::prob::{ratio, Rational};

/// A named domain with its parameter assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DomainSpec {
    pub name: String,
    pub params: Vec<(String, Rational)>,
}

impl DomainSpec {
    pub fn new(name: &str) -> Self {
        Self { name: name.to_string(), params: Vec::new() }
    }

    pub fn with(mut self, key: &str, value: Rational) -> Self {
        self.params.push((key.to_string(), value));
        self
    }

    pub fn build(&self) -> Result<PlanningProblem, ModelError> {
        build(&self.name, &self.params)
    }

    /// `name n=5 p=1/2` style label.
    pub fn label(&self) -> String {
        let mut s = self.name.clone();
        for (k, v) in &self.params {
            s.push_str(&format!(" {k}={}", crate::prob::format_fraction(v).trim_end_matches("/1")));
        }
        s
    }
}

pub const BUILTIN: &[&str] = &[
    "coin-flip",
    "decay-loop",
    "three-state",
    "hall-a-1d",
    "noisy-hall-a-1d",
    "hall-a-2d",
    "noisy-hall-a-2d",
    "bridgewalk",
];

/// Builds a named domain; missing parameters take their defaults
/// (`n = 4`, `p = 1/2` for noisy halls, `p = 1/10` for bridgewalk).
pub fn build(name: &str, params: &[(String, Rational)]) -> Result<PlanningProblem, ModelError> {
    let allowed: &[&str] = match name {
        "coin-flip" | "decay-loop" | "three-state" => &[],
        "hall-a-1d" | "hall-a-2d" => &["n"],
        "noisy-hall-a-1d" | "noisy-hall-a-2d" | "bridgewalk" => &["n", "p"],
        _ => return Err(ModelError::UnknownDomain(name.to_string())),
    };
    for (k, _) in params {
        if !allowed.contains(&k.as_str()) {
            return Err(ModelError::UnknownParameter { domain: name.to_string(), param: k.clone() });
        }
    }
    let get = |key: &str| params.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.clone());
    match name {
        "coin-flip" => Ok(coin_flip()),
        "decay-loop" => Ok(decay_loop()),
        "three-state" => Ok(three_state()),
        "hall-a-1d" => hall_a_1d(int_param("n", get("n"), 4, 2, 64)?),
        "noisy-hall-a-1d" => {
            noisy_hall_a_1d(int_param("n", get("n"), 4, 2, 64)?, prob_param("p", get("p"), ratio(1, 2))?)
        }
        "hall-a-2d" => hall_a_2d(int_param("n", get("n"), 3, 2, 16)?),
        "noisy-hall-a-2d" => {
            noisy_hall_a_2d(int_param("n", get("n"), 3, 2, 16)?, prob_param("p", get("p"), ratio(1, 2))?)
        }
        "bridgewalk" => bridgewalk(int_param("n", get("n"), 4, 1, 1000)?, prob_param("p", get("p"), ratio(1, 10))?),
        _ => unreachable!(),
    }
}

fn int_param(name: &str, v: Option<Rational>, default: usize, lo: usize, hi: usize) -> Result<usize, ModelError> {
    let Some(v) = v else { return Ok(default) };
    let out_of_range = || ModelError::ParameterOutOfRange { name: name.into(), reason: format!("expected an integer in {lo}..={hi}") };
    if !v.is_integer() {
        return Err(out_of_range());
    }
    let n = v.to_integer().to_usize().ok_or_else(out_of_range)?;
    if n < lo || n > hi {
        return Err(out_of_range());
    }
    Ok(n)
}

fn prob_param(name: &str, v: Option<Rational>, default: Rational) -> Result<Rational, ModelError> {
    let v = v.unwrap_or(default);
    if v <= Rational::zero() || v >= Rational::one() {
        return Err(ModelError::ParameterOutOfRange { name: name.into(), reason: "expected 0 < p < 1".into() });
    }
    Ok(v)
}

fn finish(b: EnvironmentBuilder, init: &str, goals: &[&str]) -> PlanningProblem {
    let init = b.state_id(init).expect("builder state");
    let goals: Vec<_> = goals.iter().map(|g| b.state_id(g).expect("builder state")).collect();
    PlanningProblem::new(b.build().expect("built-in domain is valid"), init, goals).expect("built-in domain is valid")
}

/// One `flip` from `s0`: goal or dead end with equal probability.
pub fn coin_flip() -> PlanningProblem {
    let mut b = EnvironmentBuilder::new();
    for s in ["s0", "goal", "not-goal"] {
        b.state(s).unwrap();
    }
    b.action("flip").unwrap();
    for o in ["A", "goal", "not-goal"] {
        b.observation(o).unwrap();
    }
    b.observe("s0", "A").unwrap();
    b.observe("goal", "goal").unwrap();
    b.observe("not-goal", "not-goal").unwrap();
    b.transition("s0", "flip", &[("goal", ratio(1, 2)), ("not-goal", ratio(1, 2))]).unwrap();
    finish(b, "s0", &["goal"])
}

/// `no-op` loops forever; `flip` reaches the goal or returns to `s0`.
pub fn decay_loop() -> PlanningProblem {
    let mut b = EnvironmentBuilder::new();
    b.state("s0").unwrap();
    b.state("goal").unwrap();
    b.action("no-op").unwrap();
    b.action("flip").unwrap();
    b.observation("A").unwrap();
    b.observation("goal").unwrap();
    b.observe("s0", "A").unwrap();
    b.observe("goal", "goal").unwrap();
    b.transition("s0", "no-op", &[("s0", ratio(1, 1))]).unwrap();
    b.transition("s0", "flip", &[("goal", ratio(1, 2)), ("s0", ratio(1, 2))]).unwrap();
    finish(b, "s0", &["goal"])
}

/// `s0 -> s1 -> s2 -> {s1, s0}` under the only action `a`; no goal state
/// and a single shared observation.
pub fn three_state() -> PlanningProblem {
    let mut b = EnvironmentBuilder::new();
    for s in ["s0", "s1", "s2"] {
        b.state(s).unwrap();
    }
    b.action("a").unwrap();
    b.observation("o").unwrap();
    for s in ["s0", "s1", "s2"] {
        b.observe(s, "o").unwrap();
    }
    b.transition("s0", "a", &[("s1", ratio(1, 1))]).unwrap();
    b.transition("s1", "a", &[("s2", ratio(1, 1))]).unwrap();
    b.transition("s2", "a", &[("s1", ratio(1, 2)), ("s0", ratio(1, 2))]).unwrap();
    finish(b, "s0", &[])
}

pub fn hall_a_1d(n: usize) -> Result<PlanningProblem, ModelError> {
    hall_1d(n, None)
}

pub fn noisy_hall_a_1d(n: usize, p: Rational) -> Result<PlanningProblem, ModelError> {
    hall_1d(n, Some(p))
}

/// Adds `name` with `success` chance of moving to `target`, else staying.
fn noisy_move(b: &mut EnvironmentBuilder, from: &str, action: &str, target: &str, success: &Option<Rational>) {
    match success {
        Some(p) if target != from => {
            b.transition(from, action, &[(target, p.clone()), (from, Rational::one() - p)]).unwrap();
        }
        _ => b.transition(from, action, &[(target, Rational::one())]).unwrap(),
    }
}

fn hall_1d(n: usize, success: Option<Rational>) -> Result<PlanningProblem, ModelError> {
    if n < 2 {
        return Err(ModelError::ParameterOutOfRange { name: "n".into(), reason: "hall needs at least 2 cells".into() });
    }
    // State `c{i}` before B has been visited, `c{i}b` after.
    let name = |i: usize, visited: bool| if visited { format!("c{i}b") } else { format!("c{i}") };
    let mut cells = Vec::new();
    for i in 0..n - 1 {
        cells.push((i, false));
    }
    for i in (0..n).rev() {
        cells.push((i, true));
    }
    let mut b = EnvironmentBuilder::new();
    for &(i, v) in &cells {
        b.state(&name(i, v))?;
    }
    b.action("←")?;
    b.action("→")?;
    for o in ["A", "B", "-"] {
        b.observation(o)?;
    }
    for &(i, v) in &cells {
        let obs = if i == 0 {
            "A"
        } else if i == n - 1 {
            "B"
        } else {
            "-"
        };
        b.observe(&name(i, v), obs)?;
        let right = (i + 1).min(n - 1);
        let left = i.saturating_sub(1);
        noisy_move(&mut b, &name(i, v), "→", &name(right, v || right == n - 1), &success);
        noisy_move(&mut b, &name(i, v), "←", &name(left, v), &success);
    }
    Ok(finish(b, &name(0, false), &[&name(0, true)]))
}

pub fn hall_a_2d(n: usize) -> Result<PlanningProblem, ModelError> {
    hall_2d(n, None)
}

pub fn noisy_hall_a_2d(n: usize, p: Rational) -> Result<PlanningProblem, ModelError> {
    hall_2d(n, Some(p))
}

fn hall_2d(n: usize, success: Option<Rational>) -> Result<PlanningProblem, ModelError> {
    if n < 2 {
        return Err(ModelError::ParameterOutOfRange { name: "n".into(), reason: "grid needs at least 2x2 cells".into() });
    }
    let on_perimeter = |r: usize, c: usize| r == 0 || c == 0 || r == n - 1 || c == n - 1;
    let name = |r: usize, c: usize, visited: bool| {
        if visited {
            format!("r{r}c{c}b")
        } else {
            format!("r{r}c{c}")
        }
    };
    let is_b = |r: usize, c: usize| r == n - 1 && c == n - 1;
    let mut cells = Vec::new();
    for visited in [false, true] {
        for r in 0..n {
            for c in 0..n {
                if on_perimeter(r, c) && (visited || !is_b(r, c)) {
                    cells.push((r, c, visited));
                }
            }
        }
    }
    let mut b = EnvironmentBuilder::new();
    for &(r, c, v) in &cells {
        b.state(&name(r, c, v))?;
    }
    let moves: [(&str, isize, isize); 4] = [("↑", -1, 0), ("↓", 1, 0), ("←", 0, -1), ("→", 0, 1)];
    for (a, _, _) in moves {
        b.action(a)?;
    }
    for o in ["A", "B", "+", "-"] {
        b.observation(o)?;
    }
    for &(r, c, v) in &cells {
        let corner = (r == 0 || r == n - 1) && (c == 0 || c == n - 1);
        let obs = if r == 0 && c == 0 {
            "A"
        } else if is_b(r, c) {
            "B"
        } else if corner {
            "+"
        } else {
            "-"
        };
        b.observe(&name(r, c, v), obs)?;
        for (a, dr, dc) in moves {
            let (nr, nc) = (r as isize + dr, c as isize + dc);
            let inside = nr >= 0 && nc >= 0 && (nr as usize) < n && (nc as usize) < n;
            let (tr, tc) = if inside && on_perimeter(nr as usize, nc as usize) { (nr as usize, nc as usize) } else { (r, c) };
            noisy_move(&mut b, &name(r, c, v), a, &name(tr, tc, v || is_b(tr, tc)), &success);
        }
    }
    Ok(finish(b, &name(0, 0, false), &[&name(0, 0, true)]))
}

/// Cells `cell_0..cell_n` and a dead-end `fallen`; `walk` advances one cell
/// with probability `1 - p_fall`. The best achievable goal likelihood is
/// `(1 - p_fall)^n`.
pub fn bridgewalk(n: usize, p_fall: Rational) -> Result<PlanningProblem, ModelError> {
    if n < 1 {
        return Err(ModelError::ParameterOutOfRange { name: "n".into(), reason: "bridge needs at least one step".into() });
    }
    let mut b = EnvironmentBuilder::new();
    for i in 0..=n {
        b.state(&format!("cell_{i}"))?;
    }
    b.state("fallen")?;
    b.action("walk")?;
    for o in ["start", "middle", "end", "fallen"] {
        b.observation(o)?;
    }
    for i in 0..=n {
        let obs = if i == 0 {
            "start"
        } else if i == n {
            "end"
        } else {
            "middle"
        };
        b.observe(&format!("cell_{i}"), obs)?;
        if i < n {
            b.transition(
                &format!("cell_{i}"),
                "walk",
                &[(&format!("cell_{}", i + 1), Rational::one() - &p_fall), ("fallen", p_fall.clone())],
            )?;
        }
    }
    b.observe("fallen", "fallen")?;
    Ok(finish(b, "cell_0", &[&format!("cell_{n}")]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(name: &str, params: &[(&str, Rational)]) -> Vec<(String, Rational)> {
        let _ = name;
        params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn coin_flip_shape() {
        let p = build("coin-flip", &[]).unwrap();
        assert_eq!(p.env().num_states(), 3);
        assert_eq!(p.env().num_actions(), 1);
    }

    #[test]
    fn hall_a_layout() {
        let p = build("hall-a-1d", &spec("hall-a-1d", &[("n", ratio(5, 1))])).unwrap();
        let env = p.env();
        let obs: Vec<_> = ["c0", "c1", "c2", "c3", "c4b"].iter().map(|s| env.obs_name(env.observe(env.state_id(s).unwrap()))).collect();
        assert_eq!(obs, vec!["A", "-", "-", "-", "B"]);
        assert_eq!(env.num_observations(), 3);
        assert!(env.is_deterministic());
        assert!(p.is_goal(env.state_id("c0b").unwrap()));
        assert_eq!(env.state_name(p.initial()), "c0");
    }

    #[test]
    fn noisy_moves_succeed_half_the_time() {
        let p = build("noisy-hall-a-1d", &spec("", &[("n", ratio(4, 1)), ("p", ratio(1, 2))])).unwrap();
        let env = p.env();
        let c1 = env.state_id("c1").unwrap();
        let right = env.action_id("→").unwrap();
        let out = env.outcomes(c1, right).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(env.prob(c1, right, env.state_id("c2").unwrap()), ratio(1, 2));
        assert_eq!(env.prob(c1, right, c1), ratio(1, 2));
        // bumping into the wall keeps the state with certainty
        let c0 = env.state_id("c0").unwrap();
        let left = env.action_id("←").unwrap();
        assert_eq!(env.prob(c0, left, c0), ratio(1, 1));
    }

    #[test]
    fn bridgewalk_layout() {
        let p = build("bridgewalk", &spec("", &[("n", ratio(3, 1))])).unwrap();
        let env = p.env();
        assert_eq!(env.num_states(), 5);
        assert_eq!(env.num_observations(), 4);
        let c0 = env.state_id("cell_0").unwrap();
        assert_eq!(env.prob(c0, env.action_id("walk").unwrap(), env.state_id("fallen").unwrap()), ratio(1, 10));
    }

    #[test]
    fn hall_2d_perimeter() {
        let p = build("hall-a-2d", &spec("", &[("n", ratio(3, 1))])).unwrap();
        // 8 perimeter cells, 7 before B and 8 after
        assert_eq!(p.env().num_states(), 15);
        assert!(p.env().is_deterministic());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(build("nope", &[]), Err(ModelError::UnknownDomain(_))));
        assert!(matches!(build("hall-a-1d", &spec("", &[("n", ratio(1, 1))])), Err(ModelError::ParameterOutOfRange { .. })));
        assert!(matches!(build("hall-a-1d", &spec("", &[("n", ratio(5, 2))])), Err(ModelError::ParameterOutOfRange { .. })));
        assert!(matches!(build("bridgewalk", &spec("", &[("p", ratio(1, 1))])), Err(ModelError::ParameterOutOfRange { .. })));
        assert!(matches!(build("coin-flip", &spec("", &[("n", ratio(3, 1))])), Err(ModelError::UnknownParameter { .. })));
    }

    #[test]
    fn parameter_grids_are_valid() {
        for n in 2..=8 {
            for p in [ratio(1, 10), ratio(1, 2), ratio(9, 10)] {
                build("hall-a-1d", &spec("", &[("n", ratio(n, 1))])).unwrap();
                build("noisy-hall-a-1d", &spec("", &[("n", ratio(n, 1)), ("p", p.clone())])).unwrap();
                build("bridgewalk", &spec("", &[("n", ratio(n, 1)), ("p", p.clone())])).unwrap();
                if n <= 5 {
                    build("hall-a-2d", &spec("", &[("n", ratio(n, 1))])).unwrap();
                    build("noisy-hall-a-2d", &spec("", &[("n", ratio(n, 1)), ("p", p)])).unwrap();
                }
            }
        }
    }
}
