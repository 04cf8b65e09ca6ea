#![allow(dead_code)]

use fsc_core::model::{Act, ActionId, Controller, Edge, EnvironmentBuilder, ObsId, PlanningProblem};
use fsc_core::prob::{ratio, Rational};
use fsc_core::{domains, ledger::SearchLedger};
use rand::Rng;

/// Random environment with `n` states, two actions and two observations.
/// Some actions are inapplicable; probabilities have small denominators.
pub fn random_problem<R: Rng>(rng: &mut R, n: usize) -> PlanningProblem {
    let mut b = EnvironmentBuilder::new();
    let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    for s in &names {
        b.state(s).unwrap();
    }
    b.action("a").unwrap();
    b.action("b").unwrap();
    b.observation("x").unwrap();
    b.observation("y").unwrap();
    for s in &names {
        b.observe(s, if rng.gen_bool(0.5) { "x" } else { "y" }).unwrap();
        for a in ["a", "b"] {
            if rng.gen_bool(0.15) {
                continue;
            }
            let k = rng.gen_range(1..=3usize);
            let mut weights: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
            let total: i64 = weights.iter().sum();
            let outcomes: Vec<(&str, Rational)> = weights
                .drain(..)
                .map(|w| (names[rng.gen_range(0..n)].as_str(), ratio(w, total)))
                .collect();
            b.transition(s, a, &outcomes).unwrap();
        }
    }
    let env = b.build().unwrap();
    let goals: Vec<_> = env.states().filter(|_| rng.gen_bool(0.4)).collect();
    PlanningProblem::new(env, fsc_core::StateId(0), goals).unwrap()
}

/// Random complete controller with exactly `n` states.
pub fn random_controller<R: Rng>(rng: &mut R, num_obs: usize, num_actions: usize, n: usize) -> Controller {
    let mut c = Controller::with_capacity(num_obs, n);
    for q in 0..n {
        for o in 0..num_obs {
            let act = if rng.gen_bool(0.25) { Act::Stop } else { Act::Do(ActionId(rng.gen_range(0..num_actions) as u32)) };
            c.set_edge(q, ObsId(o as u32), Edge { act, next: rng.gen_range(0..n) });
        }
    }
    c
}

/// The built-in instances used by the soundness and completeness suites.
pub fn suite_problems() -> Vec<(String, PlanningProblem)> {
    let mut out = vec![
        ("coin-flip".to_string(), domains::coin_flip()),
        ("decay-loop".to_string(), domains::decay_loop()),
        ("three-state".to_string(), domains::three_state()),
    ];
    for n in [3, 4, 5] {
        out.push((format!("hall-a-1d n={n}"), domains::hall_a_1d(n).unwrap()));
    }
    for n in [3, 4] {
        out.push((format!("noisy-hall-a-1d n={n}"), domains::noisy_hall_a_1d(n, ratio(1, 2)).unwrap()));
    }
    for n in [3, 5] {
        out.push((format!("bridgewalk n={n}"), domains::bridgewalk(n, ratio(1, 10)).unwrap()));
    }
    out
}

/// Every built-in domain at a small parameter setting.
pub fn all_builtin_problems() -> Vec<(String, PlanningProblem)> {
    let mut out = suite_problems();
    out.push(("hall-a-2d n=3".to_string(), domains::hall_a_2d(3).unwrap()));
    out.push(("noisy-hall-a-2d n=3".to_string(), domains::noisy_hall_a_2d(3, ratio(1, 2)).unwrap()));
    out
}

/// LGT⋆ grid 0.1, 0.2, ..., 0.9.
pub fn lgt_grid() -> Vec<Rational> {
    (1..=9).map(|i| ratio(i, 10)).collect()
}

/// Shape of a random ledger describing a small Markov chain: the path
/// `c_0 .. c_{d-1}` and, per entry, weights for goal, fail, noter, the loop
/// targets, and unexplored slack.
#[derive(Clone, Debug)]
pub struct LedgerShape {
    pub probs: Vec<(i64, i64)>,
    pub weights: Vec<Vec<i64>>,
}

/// Builds a ledger whose masses form a sub-stochastic chain, so every
/// derived bound is a probability.
pub fn ledger_from_shape(shape: &LedgerShape) -> SearchLedger<Rational> {
    let d = shape.probs.len();
    let mut l = SearchLedger::new();
    for k in 1..=d {
        let (num, den) = shape.probs[k - 1];
        let p = if k == 1 { ratio(1, 1) } else { ratio(num, den) };
        l.push(p);
        let available = if k < d { ratio(1, 1) - ratio(shape.probs[k].0, shape.probs[k].1) } else { ratio(1, 1) };
        let w = &shape.weights[k - 1];
        // goal, fail, noter, slack, then one weight per loop target c_0..c_{k-1}
        let total: i64 = w[..4 + k].iter().sum::<i64>().max(1);
        let share = |x: i64| &available * ratio(x, total);
        l.add_goal(share(w[0]));
        l.add_fail(share(w[1]));
        l.add_noter(share(w[2]));
        for j in 0..k {
            l.add_loop(j, share(w[4 + j])).unwrap();
        }
    }
    l
}
