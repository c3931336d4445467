use std::collections::BTreeMap;

use super::{validate_circuit, Circuit, Gate, Path};
use crate::{Error, Result};

/// Events reported while walking coherent assignments.
pub(crate) enum WalkEvent<'a, 'b> {
    /// The gate's selection table has no row for these source outcomes.
    Missing(&'a Gate, &'b BTreeMap<String, String>),
    /// The gate selected this measurement index.
    Selected(&'a Gate, usize),
}

/// Depth-first enumeration of every coherent assignment over `gates`, taken
/// in the given order; outcomes follow each measurement's declaration order.
/// Unmatched selections and out-of-range indices prune the walk.
pub(crate) fn walk_paths<'a>(gates: &[&'a Gate], on_event: &mut dyn FnMut(WalkEvent<'a, '_>)) -> Vec<Path> {
    fn go<'a>(
        gates: &[&'a Gate],
        partial: &mut BTreeMap<String, String>,
        out: &mut Vec<Path>,
        on_event: &mut dyn FnMut(WalkEvent<'a, '_>),
    ) {
        let Some((gate, rest)) = gates.split_first() else {
            out.push(Path {
                assignment: partial.clone(),
            });
            return;
        };
        let Some(index) = gate.selected_index(partial) else {
            on_event(WalkEvent::Missing(gate, partial));
            return;
        };
        on_event(WalkEvent::Selected(gate, index));
        let Some(m) = gate.measurements.get(index) else {
            return;
        };
        for label in m.labels() {
            partial.insert(gate.id.clone(), label.to_string());
            go(rest, partial, out, on_event);
        }
        partial.remove(&gate.id);
    }

    let mut out = Vec::new();
    go(gates, &mut BTreeMap::new(), &mut out, on_event);
    out
}

/// All coherent paths, each once, ordered by execution order and then by
/// outcome declaration order.
pub fn enumerate_paths(c: &Circuit) -> Result<Vec<Path>> {
    let violations = validate_circuit(c);
    if !violations.is_empty() {
        return Err(Error::InvalidCircuit(violations));
    }
    Ok(walk_paths(&c.execution_order()?, &mut |_| {}))
}
