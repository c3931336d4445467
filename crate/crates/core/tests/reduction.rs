mod common;

use meastree::circuit_ir::random::{random_circuit, RandomCircuitParams};
use meastree::circuit_ir::{demos, enumerate_paths, simulate_path, simulate_path_full, FullInput};
use meastree::reduce::{linearize, reduce_circuit, tree_of_linear, Route};
use meastree::tree_exec::{branch_output, branch_probability, run_tree};
use proptest::prelude::*;

fn params(parallel: bool, channel: bool) -> RandomCircuitParams {
    RandomCircuitParams {
        require_parallel: parallel,
        require_channel: channel,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reduced_tree_reproduces_every_path(seed: u64, parallel: bool, channel: bool) {
        let mut rng = common::rng(seed);
        let circuit = random_circuit(&mut rng, &params(parallel, channel));
        let r = reduce_circuit(&circuit).unwrap();
        let paths = enumerate_paths(&circuit).unwrap();
        prop_assert_eq!(r.tree.branches().len(), paths.len());
        prop_assert_eq!(r.map.len(), paths.len());
        for _ in 0..2 {
            let rho = common::random_principal(&circuit.layout, false, &mut rng);
            let full = circuit.layout.full_input(&rho).unwrap();
            for mu in &paths {
                let beta = r.map.branch(mu).unwrap();
                let oracle = simulate_path(&circuit, mu, &FullInput::new(rho.clone())).unwrap();
                let p = branch_probability(&r.tree, beta, &full).unwrap();
                let out = branch_output(&r.tree, beta, &full).unwrap();
                prop_assert!((oracle.probability - p).abs() <= 1e-10);
                prop_assert!(oracle.output.matrix().distance(&out.matrix()) <= 1e-10);
            }
        }
    }

    #[test]
    fn tree_nodes_are_complete_and_edges_match(seed: u64) {
        let mut rng = common::rng(seed);
        let circuit = random_circuit(&mut rng, &params(true, true));
        let r = reduce_circuit(&circuit).unwrap();
        for node in r.tree.nodes().values() {
            if let Some(m) = &node.measurement {
                prop_assert!(m.completeness_residual() <= 1e-9);
                let labels: Vec<&str> = m.labels().collect();
                let edges: Vec<&str> = node.children.keys().map(String::as_str).collect();
                prop_assert_eq!(labels, edges);
            } else {
                prop_assert!(node.children.is_empty());
            }
        }
    }

    #[test]
    fn linearization_preserves_paths_and_semantics(seed: u64) {
        let mut rng = common::rng(seed);
        let circuit = random_circuit(&mut rng, &params(true, false));
        let l = linearize(&circuit).unwrap();
        prop_assert!(l.circuit.is_linear());
        let paths = enumerate_paths(&circuit).unwrap();
        prop_assert_eq!(enumerate_paths(&l.circuit).unwrap().len(), paths.len());
        let rho = common::random_principal(&circuit.layout, true, &mut rng);
        let full = circuit.layout.full_input(&rho).unwrap();
        for mu in &paths {
            let a = simulate_path_full(&circuit, mu, &full).unwrap();
            let b = simulate_path_full(&l.circuit, &l.forward[mu], &full).unwrap();
            prop_assert!((a.probability - b.probability).abs() <= 1e-10);
            prop_assert!(a.output.matrix().distance(&b.output.matrix()) <= 1e-10);
        }
        let again = linearize(&l.circuit).unwrap();
        prop_assert_eq!(again.circuit.gates.len(), l.circuit.gates.len());
        prop_assert_eq!(enumerate_paths(&again.circuit).unwrap().len(), paths.len());
    }
}

#[test]
fn teleportation_tree_branches_are_quarter_probable() {
    let circuit = demos::teleportation();
    let r = reduce_circuit(&circuit).unwrap();
    assert_eq!(r.tree.branches().len(), 4);
    let mut rng = common::rng(8);
    for _ in 0..20 {
        let rho = common::random_principal(&circuit.layout, true, &mut rng);
        let full = circuit.layout.full_input(&rho).unwrap();
        for run in run_tree(&r.tree, &full).unwrap() {
            assert!((run.probability - 0.25).abs() < 1e-12);
        }
    }
}

#[test]
fn linearized_teleportation_agrees_on_random_inputs() {
    let circuit = demos::teleportation();
    let l = linearize(&circuit).unwrap();
    let mut rng = common::rng(9);
    for _ in 0..20 {
        let rho = common::random_principal(&circuit.layout, false, &mut rng);
        let input = FullInput::new(rho);
        for (mu, mu2) in &l.forward {
            let a = simulate_path(&circuit, mu, &input).unwrap();
            let b = simulate_path(&l.circuit, mu2, &input).unwrap();
            assert!((a.probability - b.probability).abs() < 1e-12);
            assert!(a.output.matrix().distance(&b.output.matrix()) < 1e-12);
        }
    }
}

#[test]
fn feedforward_tree_has_two_branches() {
    let (t, _) = tree_of_linear(&demos::feedforward_x()).unwrap();
    assert_eq!(t.branches(), vec![Route::new(["0", "keep"]), Route::new(["1", "flip"])]);
}

#[test]
fn tree_json_round_trips_for_random_circuits() {
    let mut rng = common::rng(10);
    for _ in 0..20 {
        let circuit = random_circuit(&mut rng, &params(true, true));
        let t = reduce_circuit(&circuit).unwrap().tree;
        let back = meastree::reduce::MeasTree::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
    }
}
