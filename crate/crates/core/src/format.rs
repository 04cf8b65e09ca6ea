//! Line-oriented text formats for planning problems and controllers.
//!
//! ```text
//! # comment
//! states s0 goal not-goal
//! actions flip
//! observations A goal not-goal
//! observe s0 A
//! observe goal goal
//! observe not-goal not-goal
//! init s0
//! goal goal
//! trans s0 flip 1/2 goal 1/2 not-goal
//! ```
//!
//! Controllers:
//!
//! ```text
//! states 2
//! start 0
//! edge 0 A flip 0
//! edge 0 goal stop 0
//! ```
//!
//! Probabilities are written `a/b` or as plain decimals and are kept exact.

use std::collections::{HashMap, HashSet};

use crate::error::{ModelError, ParseError, ParseErrorKind};
use crate::model::{Act, Controller, Edge, Environment, EnvironmentBuilder, PlanningProblem};
use crate::prob::{format_fraction, parse_rational, Rational};

#[derive(Clone, Copy, Debug)]
struct Token<'t> {
    text: &'t str,
    line: usize,
    column: usize,
}

impl Token<'_> {
    fn err(&self, kind: impl Into<ParseErrorKind>) -> ParseError {
        ParseError { line: self.line, column: self.column, kind: kind.into() }
    }
}

/// Splits `text` into non-empty lines of tokens, dropping `#` comments.
fn tokenize(text: &str) -> Vec<Vec<Token<'_>>> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start: Option<usize> = None;
        for (b, ch) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (true, Some(s)) => {
                    let column = body[..s].chars().count() + 1;
                    tokens.push(Token { text: &body[s..b], line: i + 1, column });
                    start = None;
                }
                (false, None) => start = Some(b),
                _ => {}
            }
        }
        if !tokens.is_empty() {
            lines.push(tokens);
        }
    }
    lines
}

fn syntax(msg: impl Into<String>) -> ParseErrorKind {
    ParseErrorKind::Syntax(msg.into())
}

fn end_of(line: &[Token<'_>]) -> ParseError {
    let last = line.last().expect("lines are non-empty");
    ParseError {
        line: last.line,
        column: last.column + last.text.chars().count(),
        kind: syntax(format!("`{}` needs more arguments", line[0].text)),
    }
}

/// Parses an environment file into a planning problem.
pub fn parse_env(text: &str) -> Result<PlanningProblem, ParseError> {
    let lines = tokenize(text);
    let mut b = EnvironmentBuilder::new();
    let mut declared_at: HashMap<String, Token<'_>> = HashMap::new();
    // Declarations first so that later directives may appear in any order.
    for line in &lines {
        let head = line[0];
        let declare: fn(&mut EnvironmentBuilder, &str) -> Result<(), ModelError> = match head.text {
            "states" => |b, n| b.state(n).map(|_| ()),
            "actions" => |b, n| b.action(n).map(|_| ()),
            "observations" => |b, n| b.observation(n).map(|_| ()),
            "observe" | "init" | "goal" | "trans" => continue,
            other => return Err(head.err(ParseErrorKind::UnknownDirective(other.to_string()))),
        };
        if line.len() < 2 {
            return Err(end_of(line));
        }
        for tok in &line[1..] {
            declare(&mut b, tok.text).map_err(|e| tok.err(e))?;
            if head.text == "states" {
                declared_at.insert(tok.text.to_string(), *tok);
            }
        }
    }
    let mut init = None;
    let mut goals = Vec::new();
    for line in &lines {
        let head = line[0];
        match head.text {
            "observe" => {
                if line.len() != 3 {
                    return Err(if line.len() < 3 { end_of(line) } else { line[3].err(syntax("`observe` takes a state and an observation")) });
                }
                b.state_id(line[1].text).map_err(|e| line[1].err(e))?;
                b.obs_id(line[2].text).map_err(|e| line[2].err(e))?;
                b.observe(line[1].text, line[2].text).map_err(|e| line[1].err(e))?;
            }
            "init" => {
                if line.len() != 2 {
                    return Err(if line.len() < 2 { end_of(line) } else { line[2].err(syntax("`init` takes one state")) });
                }
                if init.is_some() {
                    return Err(head.err(syntax("`init` declared twice")));
                }
                init = Some(b.state_id(line[1].text).map_err(|e| line[1].err(e))?);
            }
            "goal" => {
                if line.len() < 2 {
                    return Err(end_of(line));
                }
                for tok in &line[1..] {
                    goals.push(b.state_id(tok.text).map_err(|e| tok.err(e))?);
                }
            }
            "trans" => {
                if line.len() < 5 {
                    return Err(end_of(line));
                }
                if (line.len() - 3) % 2 != 0 {
                    return Err(end_of(line));
                }
                b.state_id(line[1].text).map_err(|e| line[1].err(e))?;
                b.action_id(line[2].text).map_err(|e| line[2].err(e))?;
                let mut outcomes: Vec<(&str, Rational)> = Vec::new();
                for pair in line[3..].chunks(2) {
                    let p = parse_rational(pair[0].text).ok_or_else(|| pair[0].err(ParseErrorKind::BadProbability(pair[0].text.into())))?;
                    b.state_id(pair[1].text).map_err(|e| pair[1].err(e))?;
                    outcomes.push((pair[1].text, p));
                }
                b.transition(line[1].text, line[2].text, &outcomes).map_err(|e| head.err(e))?;
            }
            _ => {}
        }
    }
    let at_end = || ParseError { line: lines.last().map_or(1, |l| l[0].line + 1), column: 1, kind: ParseErrorKind::Missing("init") };
    let init = init.ok_or_else(at_end)?;
    let env = b.build().map_err(|e| {
        let pos = match &e {
            ModelError::MissingObservation(name) => declared_at.get(name).map(|t| (t.line, t.column)),
            _ => None,
        };
        let (line, column) = pos.unwrap_or((1, 1));
        ParseError { line, column, kind: e.into() }
    })?;
    PlanningProblem::new(env, init, goals).map_err(|e| ParseError { line: 1, column: 1, kind: e.into() })
}

/// Writes `problem` in the environment format; `parse_env` reads it back
/// to an identical problem.
pub fn write_env(problem: &PlanningProblem) -> String {
    let env = problem.env();
    let mut out = String::new();
    let join = |names: Vec<&str>| names.join(" ");
    out.push_str(&format!("states {}\n", join(env.states().map(|s| env.state_name(s)).collect())));
    if env.num_actions() > 0 {
        out.push_str(&format!("actions {}\n", join(env.actions().map(|a| env.action_name(a)).collect())));
    }
    out.push_str(&format!("observations {}\n", join(env.observations().map(|o| env.obs_name(o)).collect())));
    for s in env.states() {
        out.push_str(&format!("observe {} {}\n", env.state_name(s), env.obs_name(env.observe(s))));
    }
    out.push_str(&format!("init {}\n", env.state_name(problem.initial())));
    let goals: Vec<&str> = problem.goals().map(|s| env.state_name(s)).collect();
    if !goals.is_empty() {
        out.push_str(&format!("goal {}\n", join(goals)));
    }
    for s in env.states() {
        for a in env.actions() {
            if let Some(outcomes) = env.outcomes(s, a) {
                out.push_str(&format!("trans {} {}", env.state_name(s), env.action_name(a)));
                for (t, p) in outcomes {
                    out.push_str(&format!(" {} {}", format_probability(p), env.state_name(*t)));
                }
                out.push('\n');
            }
        }
    }
    out
}

fn format_probability(p: &Rational) -> String {
    if p.is_integer() {
        p.to_integer().to_string()
    } else {
        format_fraction(p)
    }
}

fn parse_index(tok: &Token<'_>) -> Result<usize, ParseError> {
    tok.text.parse().map_err(|_| tok.err(ParseErrorKind::BadInteger(tok.text.into())))
}

/// Parses a controller for `env`.
pub fn parse_controller(text: &str, env: &Environment) -> Result<Controller, ParseError> {
    let lines = tokenize(text);
    let mut num_states = None;
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for line in &lines {
        let head = line[0];
        match head.text {
            "states" => {
                if line.len() != 2 {
                    return Err(if line.len() < 2 { end_of(line) } else { line[2].err(syntax("`states` takes one count")) });
                }
                if num_states.is_some() {
                    return Err(head.err(syntax("`states` declared twice")));
                }
                let n = parse_index(&line[1])?;
                if n == 0 {
                    return Err(line[1].err(syntax("a controller has at least one state")));
                }
                num_states = Some((n, line[1]));
            }
            "start" => {
                if line.len() != 2 {
                    return Err(if line.len() < 2 { end_of(line) } else { line[2].err(syntax("`start` takes one state")) });
                }
                if parse_index(&line[1])? != 0 {
                    return Err(line[1].err(syntax("the start state must be 0")));
                }
            }
            "edge" => {
                if line.len() < 4 || line.len() > 5 {
                    return Err(if line.len() < 4 { end_of(line) } else { line[5].err(syntax("too many arguments to `edge`")) });
                }
                let q = parse_index(&line[1])?;
                let o = env.obs_id(line[2].text).ok_or_else(|| {
                    line[2].err(ModelError::DanglingIdentifier { kind: "observation", name: line[2].text.into() })
                })?;
                let act = match line[3].text {
                    "stop" => Act::Stop,
                    name => Act::Do(
                        env.action_id(name)
                            .ok_or_else(|| line[3].err(ModelError::DanglingIdentifier { kind: "action", name: name.into() }))?,
                    ),
                };
                let next = match line.get(4) {
                    Some(tok) => parse_index(tok)?,
                    None if act == Act::Stop => q,
                    None => return Err(end_of(line)),
                };
                if !seen.insert((q, o)) {
                    return Err(head.err(syntax(format!("edge ({q}, {}) defined twice", line[2].text))));
                }
                edges.push((line[1], q, o, Edge { act, next }, line.get(4).copied().unwrap_or(line[1])));
            }
            other => return Err(head.err(ParseErrorKind::UnknownDirective(other.to_string()))),
        }
    }
    let eof = ParseError { line: lines.last().map_or(1, |l| l[0].line + 1), column: 1, kind: ParseErrorKind::Missing("states") };
    let (n, _) = num_states.ok_or(eof)?;
    let mut c = Controller::with_capacity(env.num_observations(), n);
    for (q_tok, q, o, edge, next_tok) in edges {
        if q >= n {
            return Err(q_tok.err(ModelError::ControllerStateOutOfRange { q, n }));
        }
        if edge.next >= n {
            return Err(next_tok.err(ModelError::ControllerStateOutOfRange { q: edge.next, n }));
        }
        c.set_edge(q, o, edge);
    }
    c.set_num_states(n);
    Ok(c)
}

/// Writes `controller` in the controller format.
pub fn write_controller(controller: &Controller, env: &Environment) -> String {
    let mut out = format!("states {}\nstart 0\n", controller.num_states());
    for (q, o, e) in controller.edges() {
        let act = match e.act {
            Act::Stop => "stop",
            Act::Do(a) => env.action_name(a),
        };
        out.push_str(&format!("edge {q} {} {act} {}\n", env.obs_name(o), e.next));
    }
    out
}
