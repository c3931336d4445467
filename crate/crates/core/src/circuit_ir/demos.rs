//! Small reference circuits.

use super::{Circuit, Gate, Layout, SelectionFunction, Wire};
use crate::qlin::{gates, ComplexMatrix, Measurement, C64};

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &[
    "teleportation",
    "measure_discard",
    "feedforward_x",
    "bare_mz",
    "single_hadamard",
    "split_identity",
    "isometry_embed",
];

pub fn by_name(name: &str) -> Option<Circuit> {
    Some(match name {
        "teleportation" => teleportation(),
        "measure_discard" => measure_discard(),
        "feedforward_x" => feedforward_x(),
        "bare_mz" => bare_mz(),
        "single_hadamard" => single_unitary(gates::hadamard()),
        "split_identity" => split_identity(),
        "isometry_embed" => isometry_embed(),
        _ => return None,
    })
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn basis(dim: usize, k: usize) -> Vec<C64> {
    (0..dim).map(|i| c(if i == k { 1.0 } else { 0.0 })).collect()
}

fn unitary(op: ComplexMatrix) -> Measurement {
    Measurement::single("u", op).expect("unitary gate")
}

fn mz() -> Measurement {
    Measurement::computational(2)
}

fn pair(label: &str, op: ComplexMatrix) -> Measurement {
    Measurement::single(label, op).expect("unitary correction")
}

fn linear_schedule(ids: &[&str]) -> Vec<Vec<String>> {
    ids.iter().map(|id| vec![id.to_string()]).collect()
}

fn strings(ids: &[&str]) -> Vec<String> {
    ids.iter().map(|s| s.to_string()).collect()
}

/// One-qubit teleportation from `q` through a Bell pair on `a1`, `a2`, with
/// classically controlled corrections and a final swap so the state lands
/// back on `q`.
pub fn teleportation() -> Circuit {
    let layout = Layout::new(
        vec![Wire::principal("q", 2), Wire::ancilla("a1", 2), Wire::ancilla("a2", 2)],
        basis(4, 0),
    );
    let x_fix = Gate {
        id: "x_fix".into(),
        wires: strings(&["a2"]),
        classical_sources: strings(&["m_a"]),
        measurements: vec![pair("id", ComplexMatrix::identity(2)), pair("x", gates::pauli_x())],
        selection: SelectionFunction::from_rules([(vec![("m_a", "0")], 0), (vec![("m_a", "1")], 1)]),
    };
    let z_fix = Gate {
        id: "z_fix".into(),
        wires: strings(&["a2"]),
        classical_sources: strings(&["m_q"]),
        measurements: vec![pair("id", ComplexMatrix::identity(2)), pair("z", gates::pauli_z())],
        selection: SelectionFunction::from_rules([(vec![("m_q", "0")], 0), (vec![("m_q", "1")], 1)]),
    };
    let gates = vec![
        Gate::fixed("bell_h", ["a1"], unitary(gates::hadamard())),
        Gate::fixed("bell_cx", ["a1", "a2"], unitary(gates::cnot())),
        Gate::fixed("cx", ["q", "a1"], unitary(gates::cnot())),
        Gate::fixed("h", ["q"], unitary(gates::hadamard())),
        Gate::fixed("m_q", ["q"], mz()),
        Gate::fixed("m_a", ["a1"], mz()),
        x_fix,
        z_fix,
        Gate::fixed("swap", ["q", "a2"], unitary(gates::swap())),
    ];
    let order = ["bell_h", "bell_cx", "cx", "h", "m_q", "m_a", "x_fix", "z_fix", "swap"];
    let mut schedule = linear_schedule(&order);
    schedule.splice(4..6, [strings(&["m_q", "m_a"])]);
    Circuit {
        layout,
        gates,
        gate_order: strings(&order),
        schedule,
    }
}

/// Copies `q` onto a fresh ancilla with a CNOT and measures the ancilla.
pub fn measure_discard() -> Circuit {
    Circuit {
        layout: Layout::new(vec![Wire::principal("q", 2), Wire::ancilla("a", 2)], basis(2, 0)),
        gates: vec![
            Gate::fixed("copy", ["q", "a"], unitary(gates::cnot())),
            Gate::fixed("m", ["a"], mz()),
        ],
        gate_order: strings(&["copy", "m"]),
        schedule: linear_schedule(&["copy", "m"]),
    }
}

/// Measures `q`, then flips it back to `|0⟩` when the outcome was 1.
pub fn feedforward_x() -> Circuit {
    let fix = Gate {
        id: "fix".into(),
        wires: strings(&["q"]),
        classical_sources: strings(&["m"]),
        measurements: vec![pair("keep", ComplexMatrix::identity(2)), pair("flip", gates::pauli_x())],
        selection: SelectionFunction::from_rules([(vec![("m", "0")], 0), (vec![("m", "1")], 1)]),
    };
    Circuit {
        layout: Layout::new(vec![Wire::principal("q", 2)], basis(1, 0)),
        gates: vec![Gate::fixed("m", ["q"], mz()), fix],
        gate_order: strings(&["m", "fix"]),
        schedule: linear_schedule(&["m", "fix"]),
    }
}

/// A single computational-basis measurement of the principal qubit.
pub fn bare_mz() -> Circuit {
    Circuit {
        layout: Layout::new(vec![Wire::principal("q", 2)], basis(1, 0)),
        gates: vec![Gate::fixed("m", ["q"], mz())],
        gate_order: strings(&["m"]),
        schedule: linear_schedule(&["m"]),
    }
}

/// One gate `u` applying `op` to a principal wire `q` of matching dimension.
pub fn single_unitary(op: ComplexMatrix) -> Circuit {
    let dim = op.rows();
    Circuit {
        layout: Layout::new(vec![Wire::principal("q", dim)], basis(1, 0)),
        gates: vec![Gate::fixed("u", ["q"], unitary(op))],
        gate_order: strings(&["u"]),
        schedule: linear_schedule(&["u"]),
    }
}

/// Two outcomes `l`, `r`, each applying `I/√2`.
pub fn split_identity() -> Circuit {
    let half = ComplexMatrix::identity(2).scale_real(std::f64::consts::FRAC_1_SQRT_2);
    let m = Measurement::from_pairs([("l", half.clone()), ("r", half)]).expect("complete");
    Circuit {
        layout: Layout::new(vec![Wire::principal("q", 2)], basis(1, 0)),
        gates: vec![Gate::fixed("split", ["q"], m)],
        gate_order: strings(&["split"]),
        schedule: linear_schedule(&["split"]),
    }
}

/// Encodes `q` into the two-qubit repetition code on `q`, `a` while measuring
/// an unrelated ancilla `g` prepared in `|+⟩`, in the same bout. The output
/// lives on `q`, `a`; the map is an isometry but not a unitary.
pub fn isometry_embed() -> Circuit {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut layout = Layout::new(
        vec![Wire::principal("q", 2), Wire::ancilla("a", 2), Wire::ancilla("g", 2)],
        vec![c(s), c(s), c(0.0), c(0.0)],
    );
    layout.output_principal = Some(strings(&["q", "a"]));
    Circuit {
        layout,
        gates: vec![
            Gate::fixed("encode", ["q", "a"], unitary(gates::cnot())),
            Gate::fixed("mg", ["g"], mz()),
        ],
        gate_order: strings(&["encode", "mg"]),
        schedule: vec![strings(&["encode", "mg"])],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        for name in NAMES {
            assert!(by_name(name).is_some(), "{name}");
        }
        assert!(by_name("nope").is_none());
    }

    #[test]
    fn teleportation_has_one_parallel_bout() {
        let c = teleportation();
        assert_eq!(c.schedule.len(), 8);
        assert_eq!(c.schedule[4], ["m_q", "m_a"]);
        assert!(!c.is_linear());
    }

    #[test]
    fn json_round_trip() {
        for name in NAMES {
            let c = by_name(name).unwrap();
            assert_eq!(Circuit::from_json(&c.to_json()).unwrap(), c, "{name}");
        }
    }
}
