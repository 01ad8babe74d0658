use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::automaton::{Automaton, StateId};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering. Marked states are double circles, `highlight`ed
/// states are filled, and parallel edges share one comma-separated label.
pub fn export_dot(a: &Automaton, name: &str, highlight: &BTreeSet<StateId>) -> String {
    let al = a.alphabet();
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(name)).unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  __start [shape=point];").unwrap();
    for q in a.states() {
        let mut attrs = vec![format!("label={}", quote(a.label(q)))];
        attrs.push(format!("shape={}", if a.is_marked(q) { "doublecircle" } else { "circle" }));
        if highlight.contains(&q) {
            attrs.push("style=filled".into());
            attrs.push("fillcolor=lightblue".into());
        }
        writeln!(out, "  s{q} [{}];", attrs.join(", ")).unwrap();
    }
    writeln!(out, "  __start -> s{};", a.initial()).unwrap();
    for q in a.states() {
        let mut edges: BTreeMap<StateId, Vec<&str>> = BTreeMap::new();
        for (e, t) in a.transitions(q) {
            edges.entry(t).or_default().push(al.name(e));
        }
        for (t, names) in edges {
            writeln!(out, "  s{q} -> s{t} [label={}];", quote(&names.join(", "))).unwrap();
        }
    }
    out.push_str("}\n");
    out
}
