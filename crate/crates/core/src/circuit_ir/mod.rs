//! Circuit model: wires, gates with measurement sets and selection tables,
//! classical channels, bout schedules and computation paths.

pub mod demos;
mod paths;
pub mod random;
mod simulate;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::qlin::{complex_vec, DensityOperator, HilbertSpec, Ket, Measurement, C64};
use crate::{Error, Result};

pub use paths::enumerate_paths;
pub(crate) use paths::{walk_paths, WalkEvent};
pub use simulate::{principal_output, sample_run, sample_run_with, simulate_path, simulate_path_full, PathOutcome};
pub use validate::{validate_circuit, Violation, ViolationCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WireRole {
    Principal,
    Ancilla,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wire {
    pub id: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<WireRole>,
}

impl Wire {
    pub fn principal(id: impl Into<String>, dim: usize) -> Self {
        Wire {
            id: id.into(),
            dim,
            role: Some(WireRole::Principal),
        }
    }

    pub fn ancilla(id: impl Into<String>, dim: usize) -> Self {
        Wire {
            id: id.into(),
            dim,
            role: Some(WireRole::Ancilla),
        }
    }
}

fn trivial_ket() -> Vec<C64> {
    vec![C64::new(1.0, 0.0)]
}

/// Wires with their roles, the fixed ancilla state `|a⟩`, and optionally the
/// wires carrying the principal output when it differs from the input.
///
/// The full space is `H ⊗ A`: principal wires first, then ancilla wires, each
/// in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub wires: Vec<Wire>,
    #[serde(with = "complex_vec", default = "trivial_ket")]
    pub ancilla_init: Vec<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_principal: Option<Vec<String>>,
}

impl Layout {
    pub fn new(wires: Vec<Wire>, ancilla_init: Vec<C64>) -> Self {
        Layout {
            wires,
            ancilla_init,
            output_principal: None,
        }
    }

    pub fn has_roles(&self) -> bool {
        self.wires.iter().all(|w| w.role.is_some())
    }

    fn with_role(&self, role: WireRole) -> Vec<&Wire> {
        self.wires.iter().filter(|w| w.role == Some(role)).collect()
    }

    pub fn principal_wires(&self) -> Vec<&str> {
        self.with_role(WireRole::Principal).into_iter().map(|w| w.id.as_str()).collect()
    }

    pub fn ancilla_wires(&self) -> Vec<&str> {
        self.with_role(WireRole::Ancilla).into_iter().map(|w| w.id.as_str()).collect()
    }

    /// The full space; declaration order when roles are missing.
    pub fn space(&self) -> Result<HilbertSpec> {
        if self.has_roles() {
            let p = self.with_role(WireRole::Principal);
            let a = self.with_role(WireRole::Ancilla);
            HilbertSpec::new(p.into_iter().chain(a).map(|w| (w.id.clone(), w.dim)))
        } else {
            HilbertSpec::new(self.wires.iter().map(|w| (w.id.clone(), w.dim)))
        }
    }

    fn require_roles(&self) -> Result<()> {
        if self.has_roles() {
            Ok(())
        } else {
            Err(Error::MissingWireRoles)
        }
    }

    pub fn principal_space(&self) -> Result<HilbertSpec> {
        self.require_roles()?;
        self.space()?.subspace(&self.principal_wires())
    }

    pub fn ancilla_space(&self) -> Result<HilbertSpec> {
        self.require_roles()?;
        self.space()?.subspace(&self.ancilla_wires())
    }

    /// Wires holding the principal output.
    pub fn output_wires(&self) -> Vec<String> {
        match &self.output_principal {
            Some(out) => out.clone(),
            None => self.principal_wires().into_iter().map(String::from).collect(),
        }
    }

    /// Wires discarded at the end: the complement of the output wires, in
    /// full-space order.
    pub fn garbage_wires(&self) -> Result<Vec<String>> {
        let out = self.output_wires();
        Ok(self
            .space()?
            .wires()
            .filter(|w| !out.iter().any(|o| o == w))
            .map(String::from)
            .collect())
    }

    pub fn ancilla_ket(&self) -> Result<Ket> {
        Ket::new(self.ancilla_init.clone(), self.ancilla_space()?)
    }

    /// `ρ ⊗ |a⟩⟨a|` on the full space. `ρ` is matched to the principal
    /// wires by dimension.
    pub fn full_input(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let rho = rho.relabel(self.principal_space()?)?;
        rho.tensor(&self.ancilla_ket()?.to_density()?)
    }

    /// `|ψ⟩ ⊗ |a⟩` on the full space.
    pub fn full_ket(&self, psi: &[C64]) -> Result<Ket> {
        Ket::new(psi.to_vec(), self.principal_space()?)?.tensor(&self.ancilla_ket()?)
    }
}

/// One row of a selection table: the outcomes of the classical sources and
/// the index of the measurement they select.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRule {
    pub when: BTreeMap<String, String>,
    #[serde(rename = "use")]
    pub use_index: usize,
}

/// Explicit selection table. Empty for gates without classical sources,
/// which always run their only measurement.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SelectionFunction {
    pub rules: Vec<SelectionRule>,
}

impl SelectionFunction {
    pub fn constant() -> Self {
        SelectionFunction::default()
    }

    pub fn from_rules(rules: impl IntoIterator<Item = (Vec<(&'static str, &'static str)>, usize)>) -> Self {
        SelectionFunction {
            rules: rules
                .into_iter()
                .map(|(when, use_index)| SelectionRule {
                    when: when.into_iter().map(|(g, l)| (g.to_string(), l.to_string())).collect(),
                    use_index,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub id: String,
    pub wires: Vec<String>,
    #[serde(default)]
    pub classical_sources: Vec<String>,
    pub measurements: Vec<Measurement>,
    #[serde(default)]
    pub selection: SelectionFunction,
}

impl Gate {
    /// Gate with no classical sources and a single measurement.
    pub fn fixed<S: Into<String>>(id: impl Into<String>, wires: impl IntoIterator<Item = S>, m: Measurement) -> Self {
        Gate {
            id: id.into(),
            wires: wires.into_iter().map(Into::into).collect(),
            classical_sources: vec![],
            measurements: vec![m],
            selection: SelectionFunction::constant(),
        }
    }

    /// Index picked by the selection function given outcomes that include
    /// every classical source; `None` when the table has no matching row.
    pub fn selected_index(&self, outcomes: &BTreeMap<String, String>) -> Option<usize> {
        if self.classical_sources.is_empty() {
            return match self.selection.rules.as_slice() {
                [] => Some(0),
                rules => rules.iter().find(|r| r.when.is_empty()).map(|r| r.use_index),
            };
        }
        let mut key = BTreeMap::new();
        for s in &self.classical_sources {
            key.insert(s, outcomes.get(s)?);
        }
        self.selection
            .rules
            .iter()
            .find(|r| r.when.len() == key.len() && r.when.iter().all(|(g, l)| key.get(g) == Some(&l)))
            .map(|r| r.use_index)
    }

    pub fn selected(&self, outcomes: &BTreeMap<String, String>) -> Option<&Measurement> {
        self.selected_index(outcomes).and_then(|i| self.measurements.get(i))
    }

    /// The gate's outcome labels across all of its measurements.
    pub fn all_labels(&self) -> impl Iterator<Item = &str> {
        self.measurements.iter().flat_map(Measurement::labels)
    }
}

/// A circuit with a fixed linear gate order and a bout schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    #[serde(flatten)]
    pub layout: Layout,
    pub gates: Vec<Gate>,
    pub gate_order: Vec<String>,
    pub schedule: Vec<Vec<String>>,
}

impl Circuit {
    pub fn gate(&self, id: &str) -> Option<&Gate> {
        self.gates.iter().find(|g| g.id == id)
    }

    pub fn space(&self) -> Result<HilbertSpec> {
        self.layout.space()
    }

    fn order_position(&self, id: &str) -> usize {
        self.gate_order.iter().position(|g| g == id).unwrap_or(usize::MAX)
    }

    /// Gates in execution order: bout by bout, each bout in gate order.
    pub fn execution_order(&self) -> Result<Vec<&Gate>> {
        let mut out = Vec::with_capacity(self.gates.len());
        for bout in &self.schedule {
            let mut ids: Vec<&String> = bout.iter().collect();
            ids.sort_by_key(|id| self.order_position(id));
            for id in ids {
                out.push(self.gate(id).ok_or_else(|| Error::UnknownGate(id.clone()))?);
            }
        }
        Ok(out)
    }

    /// True when every bout holds a single gate.
    pub fn is_linear(&self) -> bool {
        self.schedule.iter().all(|b| b.len() == 1)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Circuit> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }
}

/// A coherent assignment of one outcome to every gate.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path {
    pub assignment: BTreeMap<String, String>,
}

impl Path {
    pub fn new<S: Into<String>, T: Into<String>>(pairs: impl IntoIterator<Item = (S, T)>) -> Self {
        Path {
            assignment: pairs.into_iter().map(|(g, o)| (g.into(), o.into())).collect(),
        }
    }

    pub fn outcome(&self, gate: &str) -> Option<&str> {
        self.assignment.get(gate).map(String::as_str)
    }

    /// Parses `gate=label,gate=label`. A partial assignment is allowed; see
    /// [`Path::matches`].
    pub fn parse(s: &str) -> Result<Path> {
        let mut assignment = BTreeMap::new();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (g, l) = item.split_once('=').ok_or_else(|| Error::BadPathSpec(s.to_string()))?;
            if assignment.insert(g.trim().to_string(), l.trim().to_string()).is_some() {
                return Err(Error::BadPathSpec(s.to_string()));
            }
        }
        Ok(Path { assignment })
    }

    /// True when `self` agrees with `other` on every gate `self` assigns.
    pub fn matches(&self, other: &Path) -> bool {
        self.assignment.iter().all(|(g, l)| other.outcome(g) == Some(l))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.assignment.iter().map(|(g, l)| format!("{g}={l}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// The principal input `ρ`; the full input `ρ ⊗ |a⟩⟨a|` is materialized per circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct FullInput {
    pub principal: DensityOperator,
}

impl FullInput {
    pub fn new(principal: DensityOperator) -> Self {
        FullInput { principal }
    }

    pub fn pure(psi: &[C64]) -> Result<Self> {
        let dims = HilbertSpec::new([("principal", psi.len())])?;
        Ok(FullInput::new(Ket::new(psi.to_vec(), dims)?.to_density()?))
    }

    pub fn materialize(&self, layout: &Layout) -> Result<DensityOperator> {
        layout.full_input(&self.principal)
    }
}
