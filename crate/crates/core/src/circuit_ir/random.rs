//! Seeded generator of small valid circuits.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::{walk_paths, Circuit, Gate, Layout, SelectionFunction, SelectionRule, Wire};
use crate::qlin::random::{haar_ket, random_measurement};

/// Size limits and shape requirements for [`random_circuit`]. All wires are
/// qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomCircuitParams {
    pub max_principal: usize,
    pub max_ancilla: usize,
    pub max_gates: usize,
    pub max_bouts: usize,
    pub max_outcomes: usize,
    /// Require a bout holding at least two gates.
    pub require_parallel: bool,
    /// Require at least one gate with a classical source.
    pub require_channel: bool,
}

impl Default for RandomCircuitParams {
    fn default() -> Self {
        RandomCircuitParams {
            max_principal: 2,
            max_ancilla: 1,
            max_gates: 5,
            max_bouts: 4,
            max_outcomes: 3,
            require_parallel: false,
            require_channel: false,
        }
    }
}

/// Draws a valid circuit within `params`. Gate order follows the schedule, so
/// every prerequisite sits in an earlier bout.
pub fn random_circuit<R: Rng + ?Sized>(rng: &mut R, params: &RandomCircuitParams) -> Circuit {
    let p = *params;
    assert!(p.max_principal >= 1 && p.max_gates >= 1 && p.max_bouts >= 1 && p.max_outcomes >= 1);
    let min_wires = if p.require_parallel { 2 } else { 1 };
    assert!(p.max_principal + p.max_ancilla >= min_wires, "parallel bouts need two wires");
    let min_bouts = if p.require_channel { 2 } else { 1 };
    let min_gates = min_bouts + usize::from(p.require_parallel);
    assert!(p.max_bouts >= min_bouts && p.max_gates >= min_gates, "limits too tight");

    let (n_principal, n_ancilla) = loop {
        let np = rng.random_range(1..=p.max_principal);
        let na = rng.random_range(0..=p.max_ancilla);
        if np + na >= min_wires {
            break (np, na);
        }
    };
    let mut wires: Vec<Wire> = (0..n_principal).map(|i| Wire::principal(format!("p{i}"), 2)).collect();
    wires.extend((0..n_ancilla).map(|i| Wire::ancilla(format!("a{i}"), 2)));
    let wire_ids: Vec<String> = wires.iter().map(|w| w.id.clone()).collect();
    let layout = Layout::new(wires, haar_ket(1 << n_ancilla, rng));

    // Bout sizes: each bout gets one gate, the rest are spread at random
    // without exceeding the wire count of a bout.
    let parallel = usize::from(p.require_parallel);
    let n_bouts = rng.random_range(min_bouts..=p.max_bouts.min(p.max_gates - parallel));
    let n_gates = rng.random_range(n_bouts + parallel..=p.max_gates);
    let cap = wire_ids.len();
    let mut sizes = vec![1usize; n_bouts];
    if p.require_parallel {
        let k = rng.random_range(0..n_bouts);
        sizes[k] = 2;
    }
    let mut extra = n_gates - sizes.iter().sum::<usize>();
    while extra > 0 {
        let open: Vec<usize> = (0..n_bouts).filter(|&k| sizes[k] < cap).collect();
        let Some(&k) = open.choose(rng) else { break };
        sizes[k] += 1;
        extra -= 1;
    }

    let mut built: Vec<Gate> = Vec::new();
    let mut schedule = Vec::with_capacity(n_bouts);
    let mut channel_made = false;
    for (b, &size) in sizes.iter().enumerate() {
        let earlier = built.len();
        let mut free = wire_ids.clone();
        free.shuffle(rng);
        let mut bout = Vec::with_capacity(size);
        for slot in 0..size {
            // Leave at least one wire for each remaining gate of the bout.
            let spare = free.len() - (size - slot - 1);
            let width = rng.random_range(1..=spare.min(2));
            let mut gw: Vec<String> = free.drain(..width).collect();
            gw.sort();
            let id = format!("g{}", built.len());

            let mut sources: Vec<String> = Vec::new();
            if earlier > 0 {
                let force = p.require_channel && !channel_made && b + 1 == n_bouts && slot == 0;
                let n_src = if force { 1 } else { rng.random_range(0..=2usize.min(earlier)) };
                let mut pool: Vec<&Gate> = built[..earlier].iter().collect();
                pool.shuffle(rng);
                sources = pool.iter().take(n_src.max(usize::from(force))).map(|g| g.id.clone()).collect();
                sources.sort();
            }
            channel_made |= !sources.is_empty();
            let gate = random_gate(rng, &p, id, gw, sources, &built[..earlier]);
            bout.push(gate.id.clone());
            built.push(gate);
        }
        schedule.push(bout);
    }
    let gate_order = built.iter().map(|g| g.id.clone()).collect();
    Circuit {
        layout,
        gates: built,
        gate_order,
        schedule,
    }
}

fn random_gate<R: Rng + ?Sized>(
    rng: &mut R,
    p: &RandomCircuitParams,
    id: String,
    wires: Vec<String>,
    sources: Vec<String>,
    earlier: &[Gate],
) -> Gate {
    let dim = 1 << wires.len();
    let mut counter = 0usize;
    let mut fresh = |n: usize| -> Vec<String> {
        (0..n)
            .map(|_| {
                counter += 1;
                format!("o{}", counter - 1)
            })
            .collect()
    };

    if sources.is_empty() {
        let k = rng.random_range(1..=p.max_outcomes);
        return Gate {
            id,
            wires,
            classical_sources: vec![],
            measurements: vec![random_measurement(dim, fresh(k), rng)],
            selection: SelectionFunction::constant(),
        };
    }

    // Jointly coherent source outcomes over the gates built so far.
    let refs: Vec<&Gate> = earlier.iter().collect();
    let combos: BTreeSet<Vec<(String, String)>> = walk_paths(&refs, &mut |_| {})
        .into_iter()
        .map(|path| {
            sources
                .iter()
                .map(|s| (s.clone(), path.outcome(s).expect("source precedes gate").to_string()))
                .collect()
        })
        .collect();
    let mut combos: Vec<_> = combos.into_iter().collect();
    combos.shuffle(rng);
    let n_meas = rng.random_range(1..=2usize.min(combos.len()));
    let measurements = (0..n_meas)
        .map(|_| {
            let k = rng.random_range(1..=p.max_outcomes);
            random_measurement(dim, fresh(k), rng)
        })
        .collect();
    let rules = combos
        .into_iter()
        .enumerate()
        .map(|(i, when)| SelectionRule {
            when: when.into_iter().collect(),
            use_index: if i < n_meas { i } else { rng.random_range(0..n_meas) },
        })
        .collect();
    Gate {
        id,
        wires,
        classical_sources: sources,
        measurements,
        selection: SelectionFunction { rules },
    }
}
