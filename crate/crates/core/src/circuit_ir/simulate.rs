use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{validate_circuit, Circuit, FullInput, Gate, Path};
use crate::qlin::{apply_kraus, apply_kraus_post, lift_operator, ComplexMatrix, DensityOperator, PostState};
use crate::{Error, Result, Tolerances};

/// Probability and unnormalized output of one path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathOutcome {
    pub probability: f64,
    pub output: PostState,
}

fn ensure_valid(c: &Circuit) -> Result<()> {
    let violations = validate_circuit(c);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidCircuit(violations))
    }
}

/// The lifted operator a gate applies for `label`, given earlier outcomes.
fn gate_operator(
    c: &Circuit,
    gate: &Gate,
    outcomes: &BTreeMap<String, String>,
    label: &str,
) -> Result<ComplexMatrix> {
    let m = gate.selected(outcomes).ok_or_else(|| Error::IncoherentPath {
        gate: gate.id.clone(),
        reason: "no measurement is selected by the source outcomes".into(),
    })?;
    let op = m.operator(label).ok_or_else(|| Error::IncoherentPath {
        gate: gate.id.clone(),
        reason: format!("`{label}` is not an outcome of the selected measurement"),
    })?;
    lift_operator(op, &gate.wires, &c.space()?)
}

/// Runs `μ` on a state `σ` of the full space, gate by gate in execution order.
pub fn simulate_path_full(c: &Circuit, mu: &Path, sigma: &DensityOperator) -> Result<PathOutcome> {
    ensure_valid(c)?;
    let space = c.space()?;
    if sigma.dim() != space.total_dim() {
        return Err(Error::DimensionMismatch {
            context: "full input",
            expected: space.total_dim(),
            found: sigma.dim(),
        });
    }
    let sigma = sigma.relabel(space)?;
    let initial = sigma.trace();
    if initial <= Tolerances::current().zero {
        return Err(Error::ZeroTrace(initial));
    }
    let gates = c.execution_order()?;
    if let Some(extra) = mu.assignment.keys().find(|g| c.gate(g).is_none()) {
        return Err(Error::UnknownGate(extra.clone()));
    }
    let mut state = PostState::State(sigma);
    for gate in gates {
        let label = mu.outcome(&gate.id).ok_or_else(|| Error::IncoherentPath {
            gate: gate.id.clone(),
            reason: "path assigns no outcome".into(),
        })?;
        let op = gate_operator(c, gate, &mu.assignment, label)?;
        state = apply_kraus_post(&op, &state)?;
    }
    let probability = crate::qlin::clamp_probability(state.trace() / initial);
    Ok(PathOutcome {
        probability,
        output: state,
    })
}

/// Runs `μ` on the full input `ρ ⊗ |a⟩⟨a|`.
pub fn simulate_path(c: &Circuit, mu: &Path, rho: &FullInput) -> Result<PathOutcome> {
    simulate_path_full(c, mu, &rho.materialize(&c.layout)?)
}

/// The path output with every non-output wire traced out.
pub fn principal_output(c: &Circuit, mu: &Path, rho: &FullInput) -> Result<PostState> {
    simulate_path(c, mu, rho)?.output.partial_trace(&c.layout.output_wires())
}

/// Samples one run with Born probabilities, returning the path and its
/// unnormalized output.
pub fn sample_run(c: &Circuit, rho: &FullInput, seed: u64) -> Result<(Path, DensityOperator)> {
    sample_run_with(c, rho, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// [`sample_run`] drawing from a caller-supplied generator.
pub fn sample_run_with<R: Rng + ?Sized>(c: &Circuit, rho: &FullInput, rng: &mut R) -> Result<(Path, DensityOperator)> {
    ensure_valid(c)?;
    let mut state = rho.materialize(&c.layout)?.relabel(c.space()?)?;
    let mut outcomes = BTreeMap::new();
    for gate in c.execution_order()? {
        let m = gate.selected(&outcomes).ok_or_else(|| Error::IncoherentPath {
            gate: gate.id.clone(),
            reason: "no measurement is selected by the source outcomes".into(),
        })?;
        let mut candidates = Vec::with_capacity(m.len());
        for (label, op) in m.iter() {
            let lifted = lift_operator(op, &gate.wires, &c.space()?)?;
            if let PostState::State(next) = apply_kraus(&lifted, &state)? {
                candidates.push((label.to_string(), next));
            }
        }
        let total: f64 = candidates.iter().map(|(_, s)| s.trace()).sum();
        let mut draw = rng.random::<f64>() * total;
        let mut pick = candidates.len() - 1;
        for (k, (_, s)) in candidates.iter().enumerate() {
            if draw < s.trace() {
                pick = k;
                break;
            }
            draw -= s.trace();
        }
        let (label, next) = candidates.swap_remove(pick);
        outcomes.insert(gate.id.clone(), label);
        state = next;
    }
    Ok((Path { assignment: outcomes }, state))
}
