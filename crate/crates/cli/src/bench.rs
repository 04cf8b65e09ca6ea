use std::time::Instant;

use fsc_core::andor::andor_synth_with_budget;
use fsc_core::domains::DomainSpec;
use fsc_core::oracle::exact_measures;
use fsc_core::pandor::{Pandor, SynthesisResult};
use fsc_core::prob::{format_decimal, ratio, Rational};
use fsc_core::{ModelError, SynthesisOutcome, SynthesisRequest};
use rayon::prelude::*;
use serde::Serialize;

use crate::report::{exit_code, outcome_name};
use crate::Algo;

pub struct Case {
    pub domain: DomainSpec,
    pub max_states: usize,
    pub algo: Algo,
    pub lgt_star: Rational,
}

#[derive(Debug, Serialize)]
pub struct Row {
    pub domain: String,
    pub params: String,
    pub max_states: usize,
    pub algo: &'static str,
    pub lgt_star: String,
    pub outcome: &'static str,
    pub exit_code: u8,
    pub controller_states: Option<usize>,
    pub or_steps: u64,
    pub and_steps: u64,
    pub peak_depth: usize,
    pub time_ms: String,
    pub lgt: Option<String>,
}

/// The default grid. Deterministic halls run with both algorithms.
pub fn default_grid() -> Vec<Case> {
    let case = |domain: DomainSpec, max_states, algo, lgt_star| Case { domain, max_states, algo, lgt_star };
    let mut grid = vec![
        case(DomainSpec::new("coin-flip"), 2, Algo::Pandor, ratio(2, 5)),
        case(DomainSpec::new("decay-loop"), 2, Algo::Pandor, ratio(99, 100)),
        case(DomainSpec::new("three-state"), 2, Algo::Pandor, ratio(1, 10)),
    ];
    for n in [3, 4, 5] {
        for algo in [Algo::Pandor, Algo::Andor] {
            grid.push(case(DomainSpec::new("hall-a-1d").with("n", ratio(n, 1)), 2, algo, ratio(99, 100)));
        }
    }
    for n in [3, 4] {
        let d = DomainSpec::new("noisy-hall-a-1d").with("n", ratio(n, 1)).with("p", ratio(1, 2));
        grid.push(case(d, 2, Algo::Pandor, ratio(99, 100)));
    }
    for algo in [Algo::Pandor, Algo::Andor] {
        grid.push(case(DomainSpec::new("hall-a-2d").with("n", ratio(3, 1)), 2, algo, ratio(99, 100)));
    }
    for (n, lgt) in [(3, ratio(7, 10)), (5, ratio(1, 2))] {
        let d = DomainSpec::new("bridgewalk").with("n", ratio(n, 1)).with("p", ratio(1, 10));
        grid.push(case(d, 1, Algo::Pandor, lgt));
    }
    grid
}

fn run_case(case: &Case, budget: u64, float: bool) -> Result<Row, ModelError> {
    let problem = case.domain.build()?;
    let start = Instant::now();
    let result: SynthesisResult = match case.algo {
        Algo::Andor => andor_synth_with_budget(&problem.clone().into(), case.max_states, budget),
        Algo::Pandor => {
            let req = SynthesisRequest::new(problem.clone(), case.max_states, case.lgt_star.clone())?;
            if float {
                Pandor::<f64>::new(&req).budget(budget).run()
            } else {
                Pandor::<Rational>::new(&req).budget(budget).run()
            }
        }
    };
    let elapsed = start.elapsed();
    let (controller_states, lgt) = match &result.outcome {
        SynthesisOutcome::Controller(c) => (Some(c.num_states()), Some(format_decimal(&exact_measures(&problem, c).lgt, 12))),
        _ => (None, None),
    };
    let params = case.domain.label().trim_start_matches(case.domain.name.as_str()).trim().to_string();
    Ok(Row {
        domain: case.domain.name.clone(),
        params,
        max_states: case.max_states,
        algo: case.algo.name(),
        lgt_star: format_decimal(&case.lgt_star, 12),
        outcome: outcome_name(&result.outcome),
        exit_code: exit_code(&result.outcome),
        controller_states,
        or_steps: result.stats.or_steps,
        and_steps: result.stats.and_steps,
        peak_depth: result.stats.peak_depth,
        time_ms: format!("{:.3}", elapsed.as_secs_f64() * 1000.0),
        lgt,
    })
}

/// Runs the cases on the rayon pool, keeping the input order.
pub fn run(cases: &[Case], budget: u64, float: bool) -> Result<Vec<Row>, ModelError> {
    cases.par_iter().map(|c| run_case(c, budget, float)).collect()
}

pub fn to_csv(rows: &[Row]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
