use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{walk_paths, Circuit, Gate, WalkEvent, WireRole};
use crate::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    DuplicateWire,
    WireDim,
    MissingRole,
    PrincipalDim,
    AncillaInit,
    OutputWires,
    DuplicateGate,
    UnknownWire,
    GateWires,
    EmptyMeasurements,
    MeasurementDim,
    DisjointOutcomes,
    UnknownGate,
    SelfSource,
    DuplicateSource,
    SourcelessMulti,
    SelectionKeys,
    SelectionLabel,
    SelectionRange,
    SelectionDuplicate,
    SelectionTotal,
    SelectionSurjective,
    GateOrder,
    Cycle,
    EmptyBout,
    ScheduleCover,
    BoutConflict,
    SchedulePrereq,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        use ViolationCode::*;
        match self {
            DuplicateWire => "DUPLICATE_WIRE",
            WireDim => "WIRE_DIM",
            MissingRole => "MISSING_ROLE",
            PrincipalDim => "PRINCIPAL_DIM",
            AncillaInit => "ANCILLA_INIT",
            OutputWires => "OUTPUT_WIRES",
            DuplicateGate => "DUPLICATE_GATE",
            UnknownWire => "UNKNOWN_WIRE",
            GateWires => "GATE_WIRES",
            EmptyMeasurements => "EMPTY_MEASUREMENTS",
            MeasurementDim => "MEASUREMENT_DIM",
            DisjointOutcomes => "DISJOINT_OUTCOMES",
            UnknownGate => "UNKNOWN_GATE",
            SelfSource => "SELF_SOURCE",
            DuplicateSource => "DUPLICATE_SOURCE",
            SourcelessMulti => "SOURCELESS_MULTI",
            SelectionKeys => "SELECTION_KEYS",
            SelectionLabel => "SELECTION_LABEL",
            SelectionRange => "SELECTION_RANGE",
            SelectionDuplicate => "SELECTION_DUPLICATE",
            SelectionTotal => "SELECTION_TOTAL",
            SelectionSurjective => "SELECTION_SURJECTIVE",
            GateOrder => "GATE_ORDER",
            Cycle => "CYCLE",
            EmptyBout => "EMPTY_BOUT",
            ScheduleCover => "SCHEDULE_COVER",
            BoutConflict => "BOUT_CONFLICT",
            SchedulePrereq => "SCHEDULE_PREREQ",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A broken structural constraint, with the gates involved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub gates: Vec<String>,
    pub message: String,
}

struct Collector {
    out: Vec<Violation>,
    /// Set by violations that make the prerequisite graph or the selection
    /// walk meaningless.
    blocking: bool,
}

impl Collector {
    fn push(&mut self, code: ViolationCode, gates: &[&str], message: String) {
        self.out.push(Violation {
            code,
            gates: gates.iter().map(|s| s.to_string()).collect(),
            message,
        });
    }

    fn block(&mut self, code: ViolationCode, gates: &[&str], message: String) {
        self.blocking = true;
        self.push(code, gates, message);
    }
}

/// Checks every structural constraint of a circuit. An empty result means
/// the circuit is valid.
pub fn validate_circuit(c: &Circuit) -> Vec<Violation> {
    use ViolationCode::*;
    let mut v = Collector {
        out: Vec::new(),
        blocking: false,
    };

    check_wires(c, &mut v);

    // gates
    let wire_dims: HashMap<&str, usize> = c.layout.wires.iter().map(|w| (w.id.as_str(), w.dim)).collect();
    let mut gate_ids: HashMap<&str, &Gate> = HashMap::new();
    for g in &c.gates {
        if gate_ids.insert(&g.id, g).is_some() {
            v.block(DuplicateGate, &[&g.id], format!("gate `{}` is declared twice", g.id));
        }
    }
    for g in &c.gates {
        check_gate(g, &wire_dims, &gate_ids, &mut v);
    }

    // gate order
    let mut position: HashMap<&str, usize> = HashMap::new();
    for (i, id) in c.gate_order.iter().enumerate() {
        if !gate_ids.contains_key(id.as_str()) {
            v.block(GateOrder, &[id], format!("gate order lists unknown gate `{id}`"));
        } else if position.insert(id, i).is_some() {
            v.block(GateOrder, &[id], format!("gate order lists `{id}` twice"));
        }
    }
    for g in &c.gates {
        if !position.contains_key(g.id.as_str()) {
            v.block(GateOrder, &[&g.id], format!("gate `{}` is missing from the gate order", g.id));
        }
    }
    if v.blocking {
        return v.out;
    }

    // Direct prerequisites: the previous gate on each shared wire, and the
    // classical sources.
    let mut prereqs: BTreeMap<&str, BTreeSet<&str>> = c.gates.iter().map(|g| (g.id.as_str(), BTreeSet::new())).collect();
    let mut last_on_wire: HashMap<&str, &str> = HashMap::new();
    for id in &c.gate_order {
        let g = gate_ids[id.as_str()];
        for w in &g.wires {
            if let Some(prev) = last_on_wire.insert(w, &g.id) {
                prereqs.get_mut(g.id.as_str()).unwrap().insert(prev);
            }
        }
        for s in &g.classical_sources {
            prereqs.get_mut(g.id.as_str()).unwrap().insert(s);
        }
    }

    let topo = match topological_order(&prereqs, &position) {
        Ok(order) => order,
        Err(stuck) => {
            v.block(Cycle, &stuck, "prerequisite relation has a cycle".to_string());
            return v.out;
        }
    };

    check_schedule(c, &gate_ids, &prereqs, &mut v);

    // Totality and surjectivity of selection tables over jointly coherent
    // source outcomes.
    if !v.blocking {
        let ordered: Vec<&Gate> = topo.iter().map(|id| gate_ids[id]).collect();
        let mut missing: BTreeSet<(String, String)> = BTreeSet::new();
        let mut used: HashMap<&str, BTreeSet<usize>> = HashMap::new();
        walk_paths(&ordered, &mut |event| match event {
            WalkEvent::Missing(g, partial) => {
                let combo: Vec<String> = g
                    .classical_sources
                    .iter()
                    .map(|s| format!("{s}={}", partial.get(s).map(String::as_str).unwrap_or("?")))
                    .collect();
                missing.insert((g.id.clone(), combo.join(",")));
            }
            WalkEvent::Selected(g, i) => {
                used.entry(g.id.as_str()).or_default().insert(i);
            }
        });
        for (g, combo) in &missing {
            v.push(
                SelectionTotal,
                &[g],
                format!("selection of `{g}` is undefined for coherent source outcomes {{{combo}}}"),
            );
        }
        if missing.is_empty() {
            for g in &c.gates {
                let hit = used.get(g.id.as_str());
                for i in 0..g.measurements.len() {
                    if !hit.is_some_and(|h| h.contains(&i)) {
                        v.push(
                            SelectionSurjective,
                            &[&g.id],
                            format!("measurement {i} of `{}` is never selected", g.id),
                        );
                    }
                }
            }
        }
    }
    v.out
}

fn check_wires(c: &Circuit, v: &mut Collector) {
    use ViolationCode::*;
    let layout = &c.layout;
    let mut seen = BTreeSet::new();
    for w in &layout.wires {
        if !seen.insert(w.id.as_str()) {
            v.block(DuplicateWire, &[], format!("wire `{}` is declared twice", w.id));
        }
        if w.dim == 0 {
            v.block(WireDim, &[], format!("wire `{}` has dimension 0", w.id));
        }
        match w.role {
            None => v.block(MissingRole, &[], format!("wire `{}` has no role", w.id)),
            Some(WireRole::Principal) if w.dim < 2 => {
                v.push(PrincipalDim, &[], format!("principal wire `{}` has dimension {} < 2", w.id, w.dim))
            }
            _ => {}
        }
    }
    if v.blocking {
        return;
    }
    let principal_dim: usize = layout
        .wires
        .iter()
        .filter(|w| w.role == Some(WireRole::Principal))
        .map(|w| w.dim)
        .product();
    if layout.principal_wires().is_empty() || principal_dim < 2 {
        v.push(PrincipalDim, &[], format!("principal space has dimension {principal_dim} < 2"));
    }
    let ancilla_dim: usize = layout
        .wires
        .iter()
        .filter(|w| w.role == Some(WireRole::Ancilla))
        .map(|w| w.dim)
        .product();
    if layout.ancilla_init.len() != ancilla_dim {
        v.push(
            AncillaInit,
            &[],
            format!(
                "ancilla_init has length {}, ancilla space has dimension {ancilla_dim}",
                layout.ancilla_init.len()
            ),
        );
    } else {
        let norm = layout.ancilla_init.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > Tolerances::current().complete {
            v.push(AncillaInit, &[], format!("ancilla_init has norm {norm}, expected 1"));
        }
    }
    if let Some(out) = &layout.output_principal {
        let mut seen = BTreeSet::new();
        for w in out {
            if !layout.wires.iter().any(|x| &x.id == w) || !seen.insert(w) {
                v.push(OutputWires, &[], format!("output wire `{w}` is unknown or repeated"));
            }
        }
        if out.is_empty() {
            v.push(OutputWires, &[], "output wire list is empty".to_string());
        }
    }
}

fn check_gate(g: &Gate, wire_dims: &HashMap<&str, usize>, gates: &HashMap<&str, &Gate>, v: &mut Collector) {
    use ViolationCode::*;
    let id = g.id.as_str();
    if g.wires.is_empty() {
        v.block(GateWires, &[id], format!("gate `{id}` acts on no wires"));
    }
    let mut local_dim = Some(1usize);
    let mut seen = BTreeSet::new();
    for w in &g.wires {
        if !seen.insert(w.as_str()) {
            v.block(GateWires, &[id], format!("gate `{id}` lists wire `{w}` twice"));
        }
        match wire_dims.get(w.as_str()) {
            Some(d) => local_dim = local_dim.map(|x| x * d),
            None => {
                local_dim = None;
                v.block(UnknownWire, &[id], format!("gate `{id}` uses unknown wire `{w}`"));
            }
        }
    }

    if g.measurements.is_empty() {
        v.block(EmptyMeasurements, &[id], format!("gate `{id}` has no measurements"));
    }
    if let Some(d) = local_dim {
        for (k, m) in g.measurements.iter().enumerate() {
            if m.dim() != d {
                v.block(
                    MeasurementDim,
                    &[id],
                    format!("measurement {k} of `{id}` has dimension {}, wires need {d}", m.dim()),
                );
            }
        }
    }
    let mut labels: BTreeMap<&str, usize> = BTreeMap::new();
    for (k, m) in g.measurements.iter().enumerate() {
        for l in m.labels() {
            if let Some(prev) = labels.insert(l, k) {
                v.push(
                    DisjointOutcomes,
                    &[id],
                    format!("measurements {prev} and {k} of `{id}` share outcome `{l}`"),
                );
            }
        }
    }

    let mut sources = BTreeSet::new();
    for s in &g.classical_sources {
        if s == id {
            v.block(SelfSource, &[id], format!("gate `{id}` is its own classical source"));
        } else if !gates.contains_key(s.as_str()) {
            v.block(UnknownGate, &[id, s], format!("classical source `{s}` of `{id}` does not exist"));
        }
        if !sources.insert(s.as_str()) {
            v.push(DuplicateSource, &[id], format!("classical source `{s}` of `{id}` is listed twice"));
        }
    }
    if sources.is_empty() && g.measurements.len() > 1 {
        v.push(
            SourcelessMulti,
            &[id],
            format!("gate `{id}` has no classical sources but {} measurements", g.measurements.len()),
        );
    }

    let mut whens = BTreeSet::new();
    for r in &g.selection.rules {
        let keys: BTreeSet<&str> = r.when.keys().map(String::as_str).collect();
        if keys != sources {
            v.block(
                SelectionKeys,
                &[id],
                format!("selection row of `{id}` is keyed by {keys:?}, sources are {sources:?}"),
            );
        }
        for (s, l) in &r.when {
            if let Some(src) = gates.get(s.as_str()) {
                if !src.all_labels().any(|x| x == l) {
                    v.push(
                        SelectionLabel,
                        &[id, s],
                        format!("selection of `{id}` refers to `{l}`, not an outcome of `{s}`"),
                    );
                }
            }
        }
        if r.use_index >= g.measurements.len() {
            v.push(
                SelectionRange,
                &[id],
                format!("selection of `{id}` uses index {} out of range", r.use_index),
            );
        }
        if !whens.insert(&r.when) {
            v.block(SelectionDuplicate, &[id], format!("selection of `{id}` has duplicate rows"));
        }
    }
}

/// Kahn's algorithm, ties broken by gate order. On a cycle returns the gates
/// that could not be ordered.
fn topological_order<'a>(
    prereqs: &BTreeMap<&'a str, BTreeSet<&'a str>>,
    position: &HashMap<&str, usize>,
) -> Result<Vec<&'a str>, Vec<&'a str>> {
    let mut remaining: BTreeMap<&str, usize> = prereqs.iter().map(|(g, p)| (*g, p.len())).collect();
    let mut ready: BTreeSet<(usize, &str)> = remaining
        .iter()
        .filter(|(_, n)| **n == 0)
        .map(|(g, _)| (position[g], *g))
        .collect();
    let mut order = Vec::with_capacity(prereqs.len());
    while let Some((_, g)) = ready.pop_first() {
        order.push(g);
        remaining.remove(g);
        for (h, p) in prereqs {
            if p.contains(g) {
                if let Some(n) = remaining.get_mut(h) {
                    *n -= 1;
                    if *n == 0 {
                        ready.insert((position[h], *h));
                    }
                }
            }
        }
    }
    if remaining.is_empty() {
        Ok(order)
    } else {
        Err(remaining.keys().copied().collect())
    }
}

fn check_schedule(
    c: &Circuit,
    gates: &HashMap<&str, &Gate>,
    prereqs: &BTreeMap<&str, BTreeSet<&str>>,
    v: &mut Collector,
) {
    use ViolationCode::*;
    let mut bout_of: HashMap<&str, usize> = HashMap::new();
    for (n, bout) in c.schedule.iter().enumerate() {
        if bout.is_empty() {
            v.block(EmptyBout, &[], format!("bout {n} is empty"));
        }
        for id in bout {
            if !gates.contains_key(id.as_str()) {
                v.block(UnknownGate, &[id], format!("schedule lists unknown gate `{id}`"));
            } else if let Some(prev) = bout_of.insert(id, n) {
                v.block(ScheduleCover, &[id], format!("gate `{id}` is scheduled in bouts {prev} and {n}"));
            }
        }
    }
    for g in &c.gates {
        if !bout_of.contains_key(g.id.as_str()) {
            v.block(ScheduleCover, &[&g.id], format!("gate `{}` is not scheduled", g.id));
        }
    }
    for (g, ps) in prereqs {
        let Some(&bg) = bout_of.get(g) else { continue };
        for p in ps {
            let Some(&bp) = bout_of.get(p) else { continue };
            if bp == bg {
                v.block(
                    BoutConflict,
                    &[p, g],
                    format!("`{p}` is a prerequisite of `{g}` but both are in bout {bg}"),
                );
            } else if bp > bg {
                v.block(
                    SchedulePrereq,
                    &[p, g],
                    format!("`{g}` runs in bout {bg} before its prerequisite `{p}` in bout {bp}"),
                );
            }
        }
    }
}
