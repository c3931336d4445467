mod common;

use common::{c, real};
use meastree::qlin::random::{haar_ket, random_density, random_measurement, random_unitary};
use meastree::qlin::{
    apply_kraus, lift_operator, outcome_probability, partial_trace, proportional, tensor_measurements, ComplexMatrix,
    DensityOperator, HilbertSpec, Measurement, C64,
};
use proptest::prelude::*;

fn density(dim: usize, rank: usize, seed: u64, names: &[&str]) -> DensityOperator {
    let mut rng = common::rng(seed);
    let spec = if names.len() == 1 {
        HilbertSpec::new([(names[0], dim)]).unwrap()
    } else {
        common::qubits(names)
    };
    DensityOperator::new(random_density(dim, rank.min(dim), &mut rng), spec).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn outcome_probabilities_sum_to_one(dim in 1usize..6, n in 1usize..5, rank in 1usize..6, seed: u64) {
        let mut rng = common::rng(seed);
        let labels: Vec<String> = (0..n).map(|k| k.to_string()).collect();
        let m = random_measurement(dim, labels, &mut rng);
        let sigma = density(dim, rank, seed ^ 1, &["w"]);
        let total: f64 = m.iter().map(|(_, l)| outcome_probability(l, &sigma).unwrap()).sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn kraus_map_is_linear(dim in 1usize..5, a in 0.0f64..3.0, b in 0.0f64..3.0, seed: u64) {
        prop_assume!(a + b > 0.1);
        let mut rng = common::rng(seed);
        let l = random_unitary(dim, &mut rng).scale_real(0.7);
        let s1 = density(dim, dim, seed ^ 2, &["w"]);
        let s2 = density(dim, 1, seed ^ 3, &["w"]);
        let mix = DensityOperator::new(
            &s1.matrix().scale_real(a) + &s2.matrix().scale_real(b),
            s1.dims().clone(),
        ).unwrap();
        let lhs = apply_kraus(&l, &mix).unwrap().matrix();
        let rhs = &apply_kraus(&l, &s1).unwrap().matrix().scale_real(a) + &apply_kraus(&l, &s2).unwrap().matrix().scale_real(b);
        prop_assert!(lhs.distance(&rhs) <= 1e-10);
    }

    #[test]
    fn partial_trace_of_products_factorizes(seed: u64, scale in 0.2f64..3.0) {
        let rho = density(2, 2, seed, &["p"]);
        let tau = DensityOperator::new(
            density(4, 3, seed ^ 5, &["x"]).matrix().scale_real(scale),
            common::qubits(&["a", "b"]),
        ).unwrap();
        let joint = rho.tensor(&tau).unwrap();
        let reduced = partial_trace(&joint, &["p"]).unwrap();
        prop_assert!(reduced.matrix().distance(&rho.matrix().scale_real(tau.trace())) <= 1e-10);
    }

    #[test]
    fn lifting_keeps_measurements_complete(seed: u64, which in 0usize..3) {
        let mut rng = common::rng(seed);
        let space = common::qubits(&["w0", "w1", "w2"]);
        let on: Vec<&str> = match which {
            0 => vec!["w1"],
            1 => vec!["w2", "w0"],
            _ => vec!["w0", "w1", "w2"],
        };
        let d = 1 << on.len();
        let m = random_measurement(d, ["a", "b", "c"], &mut rng);
        let lifted = m.lift(&on, &space).unwrap();
        prop_assert!(lifted.completeness_residual() <= 1e-9);
        prop_assert_eq!(lifted.dim(), 8);
    }

    #[test]
    fn proportional_recovers_planted_scalar(seed: u64, k in 0.01f64..50.0) {
        let r = density(3, 2, seed, &["w"]).into_matrix();
        let got = proportional(&r.scale_real(k), &r, 1e-10).unwrap();
        prop_assert!((got - k).abs() <= 1e-10 * k.max(1.0));
    }
}

#[test]
fn tensor_measurement_probabilities_multiply() {
    let mut rng = common::rng(40);
    for case in 0..50 {
        let a = random_measurement(2, ["x", "y"], &mut rng);
        let b = random_measurement(2, ["u", "v", "w"], &mut rng);
        let s1 = density(2, 2, 1000 + case, &["p"]);
        let s2 = density(2, 1, 2000 + case, &["q"]);
        let joint = s1.tensor(&s2).unwrap();
        let ab = tensor_measurements(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(ab.len(), 6);
        for (la, opa) in a.iter() {
            for (lb, opb) in b.iter() {
                let p = outcome_probability(opa, &s1).unwrap();
                let q = outcome_probability(opb, &s2).unwrap();
                let op = ab.operator(&format!("{la}|{lb}")).unwrap();
                let pq = outcome_probability(op, &joint).unwrap();
                assert!((pq - p * q).abs() < 1e-12, "case {case}");
            }
        }
    }
}

#[test]
fn x_kron_z_by_hand() {
    let x = real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let z = real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    #[rustfmt::skip]
    let expected = real(4, 4, &[
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, -1.0,
        1.0, 0.0, 0.0, 0.0,
        0.0, -1.0, 0.0, 0.0,
    ]);
    assert_eq!(meastree::qlin::tensor_product(&x, &z), expected);
}

#[test]
fn lifted_cnot_with_control_on_second_wire() {
    let space = common::qubits(&["w0", "w1"]);
    let cnot = meastree::qlin::gates::cnot();
    let lifted = lift_operator(&cnot, &["w1", "w0"], &space).unwrap();
    // |w0 w1⟩: the second wire controls a flip of the first.
    for (input, output) in [(0, 0), (1, 3), (2, 2), (3, 1)] {
        let mut e = vec![c(0.0, 0.0); 4];
        e[input] = c(1.0, 0.0);
        let v = lifted.apply(&e);
        for (k, z) in v.iter().enumerate() {
            let want = if k == output { 1.0 } else { 0.0 };
            assert!((z - C64::new(want, 0.0)).norm() < 1e-15);
        }
    }
}

#[test]
fn bell_state_reduces_to_half_identity() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell = common::pure(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)], common::qubits(&["a", "b"]));
    let reduced = partial_trace(&bell, &["a"]).unwrap();
    assert!(reduced.matrix().distance(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
}

#[test]
fn singleton_tensor_is_identity_operation() {
    let m = Measurement::computational(2);
    assert_eq!(tensor_measurements(std::slice::from_ref(&m)).unwrap(), m);
    let mut rng = common::rng(3);
    let psi = haar_ket(2, &mut rng);
    assert!((psi.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12);
}
