use std::fmt::Write as _;
use std::time::Duration;

use fsc_core::format::write_controller;
use fsc_core::oracle::exact_measures;
use fsc_core::pandor::{SearchStats, SynthesisResult};
use fsc_core::prob::{format_decimal, format_fraction, format_exact};
use fsc_core::{Measures, PlanningProblem, Rational, SynthesisOutcome};
use serde::Serialize;

/// Exact value with its 12-digit decimal rendering.
#[derive(Debug, Serialize)]
pub struct Exact {
    pub exact: String,
    pub decimal: String,
}

impl From<&Rational> for Exact {
    fn from(r: &Rational) -> Self {
        Self { exact: format_fraction(r), decimal: format_decimal(r, 12) }
    }
}

/// Result of one synthesis run. Oracle fields are set iff a controller was
/// found.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub outcome: &'static str,
    pub algo: &'static str,
    pub max_states: usize,
    pub lgt_star: String,
    pub lter_star: Option<String>,
    pub or_steps: u64,
    pub and_steps: u64,
    pub choice_points: u64,
    pub backtracks: u64,
    pub peak_depth: usize,
    pub wall_time_ms: f64,
    pub controller_states: Option<usize>,
    pub controller: Option<String>,
    pub lgt: Option<Exact>,
    pub lter: Option<Exact>,
}

pub fn outcome_name(outcome: &SynthesisOutcome) -> &'static str {
    match outcome {
        SynthesisOutcome::Controller(_) => "controller",
        SynthesisOutcome::Failure => "failure-proved",
        SynthesisOutcome::BudgetExhausted => "budget-exhausted",
    }
}

pub fn exit_code(outcome: &SynthesisOutcome) -> u8 {
    match outcome {
        SynthesisOutcome::Controller(_) => 0,
        SynthesisOutcome::Failure => 2,
        SynthesisOutcome::BudgetExhausted => 3,
    }
}

pub struct RunInfo<'a> {
    pub algo: &'static str,
    pub max_states: usize,
    pub lgt_star: &'a Rational,
    pub lter_star: Option<&'a Rational>,
    pub elapsed: Duration,
}

impl RunReport {
    pub fn new(problem: &PlanningProblem, result: &SynthesisResult, info: RunInfo<'_>) -> Self {
        let SearchStats { or_steps, and_steps, choice_points, backtracks, peak_depth } = result.stats;
        let (controller_states, controller, measures) = match &result.outcome {
            SynthesisOutcome::Controller(c) => {
                (Some(c.num_states()), Some(write_controller(c, problem.env())), Some(exact_measures(problem, c)))
            }
            _ => (None, None, None),
        };
        Self {
            outcome: outcome_name(&result.outcome),
            algo: info.algo,
            max_states: info.max_states,
            lgt_star: format_fraction(info.lgt_star),
            lter_star: info.lter_star.map(format_fraction),
            or_steps,
            and_steps,
            choice_points,
            backtracks,
            peak_depth,
            wall_time_ms: info.elapsed.as_secs_f64() * 1000.0,
            controller_states,
            controller,
            lgt: measures.as_ref().map(|m| Exact::from(&m.lgt)),
            lter: measures.as_ref().map(|m| Exact::from(&m.lter)),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "outcome: {}", self.outcome);
        let _ = writeln!(s, "algo: {}", self.algo);
        let _ = writeln!(s, "max-states: {}", self.max_states);
        let _ = writeln!(s, "lgt-star: {}", self.lgt_star);
        if let Some(l) = &self.lter_star {
            let _ = writeln!(s, "lter-star: {l}");
        }
        let _ = writeln!(s, "or-steps: {}", self.or_steps);
        let _ = writeln!(s, "and-steps: {}", self.and_steps);
        let _ = writeln!(s, "choice-points: {}", self.choice_points);
        let _ = writeln!(s, "backtracks: {}", self.backtracks);
        let _ = writeln!(s, "peak-depth: {}", self.peak_depth);
        let _ = writeln!(s, "wall-time-ms: {:.3}", self.wall_time_ms);
        if let (Some(lgt), Some(lter)) = (&self.lgt, &self.lter) {
            let _ = writeln!(s, "lgt: {} ({})", lgt.exact, lgt.decimal);
            let _ = writeln!(s, "lter: {} ({})", lter.exact, lter.decimal);
        }
        if let (Some(n), Some(c)) = (self.controller_states, &self.controller) {
            let _ = writeln!(s, "controller-states: {n}");
            s.push_str("controller:\n");
            s.push_str(c);
        }
        s
    }
}

/// Verification report printed by `fsc verify`.
#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub lgt: Exact,
    pub lter: Exact,
    pub fail: Exact,
    pub nonterm: Exact,
    pub undefined: Exact,
}

impl From<&Measures> for VerifyReport {
    fn from(m: &Measures) -> Self {
        Self {
            lgt: (&m.lgt).into(),
            lter: (&m.lter).into(),
            fail: (&m.fail).into(),
            nonterm: (&m.nonterm).into(),
            undefined: (&m.undefined).into(),
        }
    }
}

pub fn verify_text(m: &Measures) -> String {
    [("lgt", &m.lgt), ("lter", &m.lter), ("fail", &m.fail), ("nonterm", &m.nonterm), ("undefined", &m.undefined)]
        .iter()
        .map(|(k, v)| format!("{k}: {}\n", format_exact(v)))
        .collect()
}
