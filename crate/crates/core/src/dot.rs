//! Graphviz export of controllers.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::model::{Act, Controller, Environment};

/// DOT text with one edge per `(q, q', stop?)` group, labels `o : a` one
/// per line, and dashed `stop` edges. A `stop` edge has no successor and is
/// drawn as a loop on its own state. Node and edge order is deterministic.
pub fn to_dot(controller: &Controller, env: &Environment) -> String {
    let mut groups: BTreeMap<(usize, bool, usize), Vec<String>> = BTreeMap::new();
    for (q, o, e) in controller.edges() {
        let (stop, act, next) = match e.act {
            Act::Stop => (true, "stop", q),
            Act::Do(a) => (false, env.action_name(a), e.next),
        };
        groups.entry((q, stop, next)).or_default().push(format!("{} : {}", env.obs_name(o), act));
    }
    let mut out = String::from("digraph controller {\n    rankdir=LR;\n    node [shape=circle];\n    start [shape=point];\n");
    for q in 0..controller.num_states() {
        let _ = writeln!(out, "    q{q};");
    }
    out.push_str("    start -> q0;\n");
    for ((q, stop, next), labels) in groups {
        let label = labels.iter().map(|l| escape(l)).collect::<Vec<_>>().join("\\n");
        let style = if stop { ", style=dashed" } else { "" };
        let _ = writeln!(out, "    q{q} -> q{next} [label=\"{label}\"{style}];");
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
