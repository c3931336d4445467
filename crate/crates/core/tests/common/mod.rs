#![allow(dead_code)]

use meastree::circuit_ir::Layout;
use meastree::qlin::random::{haar_ket, random_density};
use meastree::qlin::{ComplexMatrix, DensityOperator, HilbertSpec, Ket, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_real(rows, cols, entries).unwrap()
}

/// A random principal state: pure or of random rank, with random trace in
/// [0.5, 2] to exercise the unnormalized convention.
pub fn random_principal<R: Rng>(layout: &Layout, pure: bool, rng: &mut R) -> DensityOperator {
    let dims = layout.principal_space().unwrap();
    let d = dims.total_dim();
    let scale = rng.random_range(0.5..2.0);
    let m = if pure {
        let k = Ket::new(haar_ket(d, rng), dims.clone()).unwrap();
        k.to_density().unwrap().into_matrix()
    } else {
        let rank = rng.random_range(1..=d);
        random_density(d, rank, rng)
    };
    DensityOperator::new(m.scale_real(scale), dims).unwrap()
}

pub fn qubits(names: &[&str]) -> HilbertSpec {
    HilbertSpec::new(names.iter().map(|n| (*n, 2))).unwrap()
}

pub fn pure(v: &[C64], dims: HilbertSpec) -> DensityOperator {
    Ket::new(v.to_vec(), dims).unwrap().to_density().unwrap()
}
