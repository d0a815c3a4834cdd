use std::fmt::Write;

use super::{ConstraintNetwork, Polarity};

/// Optional state to colour nodes with.
#[derive(Debug, Clone, Copy)]
pub enum DotState<'a> {
    None,
    /// Per-claim activations; a claim counts as accepted iff its activation is > 0.
    Activations(&'a [f64]),
    /// Per-claim acceptance flags.
    Partition(&'a [bool]),
}

const ACCEPTED_FILL: &str = "#e06666";
const REJECTED_FILL: &str = "#6fa8dc";

/// Graphviz rendering. Positive constraints are solid, negative ones dashed;
/// accepted claims are filled red and rejected ones blue when a state is given.
pub fn export_dot(net: &ConstraintNetwork, state: DotState<'_>) -> String {
    let mut out = String::new();
    out.push_str("digraph claims {\n");
    out.push_str("  graph [overlap=false];\n");
    out.push_str("  node [shape=box, style=\"rounded,filled\", fillcolor=white];\n");
    out.push_str("  edge [dir=none];\n");

    for (i, claim) in net.claims().iter().enumerate() {
        let (status, label) = match state {
            DotState::None => (None, claim.id.clone()),
            DotState::Activations(a) => (Some(a[i] > 0.0), format!("{}\\n{:.3}", claim.id, a[i])),
            DotState::Partition(p) => (Some(p[i]), claim.id.clone()),
        };
        write!(out, "  \"{}\" [label=\"{}\", tooltip=\"{}\"", escape(&claim.id), label, escape(&claim.label)).unwrap();
        match status {
            Some(true) => write!(out, ", status=accepted, fillcolor=\"{ACCEPTED_FILL}\"").unwrap(),
            Some(false) => write!(out, ", status=rejected, fillcolor=\"{REJECTED_FILL}\"").unwrap(),
            None => {}
        }
        out.push_str("];\n");
    }

    for c in net.constraints() {
        let style = match c.polarity {
            Polarity::Positive => "solid",
            Polarity::Negative => "dashed",
        };
        writeln!(
            out,
            "  \"{}\" -> \"{}\" [style={style}, weight={}];",
            escape(net.id(c.u)),
            escape(net.id(c.v)),
            c.weight
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
