use std::collections::{BTreeMap, BTreeSet};

use crate::circuit_ir::{enumerate_paths, validate_circuit, Circuit, Gate, Path, SelectionFunction, SelectionRule};
use crate::qlin::{tensor_measurements, tuple_label, Measurement, TUPLE_SEPARATOR};
use crate::{Error, Result};

/// A circuit with singleton bouts and the path bijection to it.
#[derive(Debug, Clone)]
pub struct Linearization {
    pub circuit: Circuit,
    /// Original path to linearized path.
    pub forward: BTreeMap<Path, Path>,
    pub backward: BTreeMap<Path, Path>,
}

/// Merges each bout into one gate whose measurements are tensor products of
/// the constituents' selected measurements, in gate order.
///
/// Merged gates are named by joining constituent ids with `|`; a bout of one
/// gate keeps its id. Outcomes of a merged gate are tuple labels. The
/// selection table of a merged gate is read off the coherent paths of `c`,
/// and its measurements are ordered by the constituent measurement indices.
pub fn linearize(c: &Circuit) -> Result<Linearization> {
    let violations = validate_circuit(c);
    if !violations.is_empty() {
        return Err(Error::InvalidCircuit(violations));
    }
    let paths = enumerate_paths(c)?;

    let bouts: Vec<Vec<&Gate>> = c
        .schedule
        .iter()
        .map(|bout| {
            let mut gates: Vec<&Gate> = bout.iter().map(|id| c.gate(id).expect("validated")).collect();
            gates.sort_by_key(|g| c.gate_order.iter().position(|x| x == &g.id));
            gates
        })
        .collect();
    let bout_ids: Vec<String> = bouts
        .iter()
        .map(|gs| gs.iter().map(|g| g.id.as_str()).collect::<Vec<_>>().join(&TUPLE_SEPARATOR.to_string()))
        .collect();
    let bout_of: BTreeMap<&str, usize> = bouts
        .iter()
        .enumerate()
        .flat_map(|(n, gs)| gs.iter().map(move |g| (g.id.as_str(), n)))
        .collect();

    let merged_label = |gs: &[&Gate], mu: &Path| -> String {
        let parts: Vec<&str> = gs.iter().map(|g| mu.outcome(&g.id).expect("complete path")).collect();
        tuple_label(&parts)
    };

    let mut gates = Vec::with_capacity(bouts.len());
    for (n, gs) in bouts.iter().enumerate() {
        let sources: BTreeSet<usize> = gs
            .iter()
            .flat_map(|g| g.classical_sources.iter().map(|s| bout_of[s.as_str()]))
            .collect();
        let source_ids: Vec<String> = sources.iter().map(|&i| bout_ids[i].clone()).collect();

        // Selected index tuple for every coherent combination of source outcomes.
        let mut table: BTreeMap<BTreeMap<String, String>, Vec<usize>> = BTreeMap::new();
        for mu in &paths {
            let picks: Vec<usize> = gs
                .iter()
                .map(|g| g.selected_index(&mu.assignment).expect("coherent path"))
                .collect();
            let when: BTreeMap<String, String> = sources
                .iter()
                .map(|&i| (bout_ids[i].clone(), merged_label(&bouts[i], mu)))
                .collect();
            let prev = table.insert(when, picks.clone());
            debug_assert!(prev.is_none_or(|p| p == picks), "selection depends only on sources");
        }
        let tuples: Vec<Vec<usize>> = table.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let measurements = tuples
            .iter()
            .map(|picks| {
                let parts: Vec<Measurement> = gs.iter().zip(picks).map(|(g, &k)| g.measurements[k].clone()).collect();
                tensor_measurements(&parts)
            })
            .collect::<Result<Vec<_>>>()?;
        let selection = if source_ids.is_empty() {
            SelectionFunction::constant()
        } else {
            SelectionFunction {
                rules: table
                    .into_iter()
                    .map(|(when, picks)| SelectionRule {
                        when,
                        use_index: tuples.iter().position(|t| *t == picks).expect("listed"),
                    })
                    .collect(),
            }
        };
        gates.push(Gate {
            id: bout_ids[n].clone(),
            wires: gs.iter().flat_map(|g| g.wires.iter().cloned()).collect(),
            classical_sources: source_ids,
            measurements,
            selection,
        });
    }

    let circuit = Circuit {
        layout: c.layout.clone(),
        gates,
        gate_order: bout_ids.clone(),
        schedule: bout_ids.iter().map(|id| vec![id.clone()]).collect(),
    };
    let violations = validate_circuit(&circuit);
    if !violations.is_empty() {
        return Err(Error::InvalidCircuit(violations));
    }

    let mut forward = BTreeMap::new();
    let mut backward = BTreeMap::new();
    for mu in paths {
        let mu2 = Path {
            assignment: bouts
                .iter()
                .zip(&bout_ids)
                .map(|(gs, id)| (id.clone(), merged_label(gs, &mu)))
                .collect(),
        };
        backward.insert(mu2.clone(), mu.clone());
        forward.insert(mu, mu2);
    }
    Ok(Linearization {
        circuit,
        forward,
        backward,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit_ir::{demos, Layout, Wire};
    use crate::qlin::C64;

    #[test]
    fn linear_circuit_is_copied() {
        for c in [demos::feedforward_x(), demos::measure_discard(), demos::bare_mz()] {
            let l = linearize(&c).unwrap();
            assert_eq!(l.circuit, c);
            assert!(l.forward.iter().all(|(a, b)| a == b));
        }
    }

    #[test]
    fn linearizing_twice_changes_nothing() {
        let once = linearize(&demos::teleportation()).unwrap().circuit;
        let twice = linearize(&once).unwrap().circuit;
        assert_eq!(once, twice);
    }

    #[test]
    fn teleportation_measurement_bout_merges() {
        let l = linearize(&demos::teleportation()).unwrap();
        let c = &l.circuit;
        assert!(c.is_linear());
        assert_eq!(c.gates.len(), 8);
        let merged = c.gate("m_q|m_a").unwrap();
        assert_eq!(merged.wires, ["q", "a1"]);
        assert_eq!(merged.all_labels().collect::<Vec<_>>(), ["0|0", "0|1", "1|0", "1|1"]);
        let x_fix = c.gate("x_fix").unwrap();
        assert_eq!(x_fix.classical_sources, ["m_q|m_a"]);
        assert_eq!(x_fix.selection.rules.len(), 4);
        assert_eq!(l.forward.len(), 4);
        for (mu, mu2) in &l.forward {
            let expected = format!("{}|{}", mu.outcome("m_q").unwrap(), mu.outcome("m_a").unwrap());
            assert_eq!(mu2.outcome("m_q|m_a"), Some(expected.as_str()));
            assert_eq!(l.backward[mu2], *mu);
        }
    }

    #[test]
    fn parallel_measurements_merge_into_four_outcomes() {
        let c = Circuit {
            layout: Layout::new(vec![Wire::principal("x", 2), Wire::principal("y", 2)], vec![C64::new(1.0, 0.0)]),
            gates: vec![
                Gate::fixed("mx", ["x"], Measurement::computational(2)),
                Gate::fixed("my", ["y"], Measurement::computational(2)),
            ],
            gate_order: vec!["mx".into(), "my".into()],
            schedule: vec![vec!["mx".into(), "my".into()]],
        };
        let l = linearize(&c).unwrap();
        assert_eq!(l.circuit.gates.len(), 1);
        assert_eq!(l.circuit.gates[0].measurements[0].len(), 4);
    }
}
