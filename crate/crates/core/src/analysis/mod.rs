//! Numerical checks on tree branches: product factorization of cumulative
//! operators, input independence of branch probabilities, the constant-factor
//! criterion for linear maps into a tensor product, and isometry scaling.

mod checks;
mod factor;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::qlin::{random::haar_ket, C64};

pub use checks::{
    check_computes, check_independence, check_isometry_scaling, check_set_independence, ComputesReport,
    IndependenceReport, IsometryScalingReport, ScalingVerdict, SetIndependenceReport, Verdict,
};
pub use factor::{factor_branch, factor_constant, factorization_residual, BranchFactorization, ConstantFactor, FactorKind};

/// Probe kets on a `dim`-dimensional space: the basis, every
/// `(e_i + e_j)/√2` and `(e_i + i·e_j)/√2` with `i < j`, then `random`
/// Haar-distributed kets drawn from `seed`.
pub fn probe_kets(dim: usize, random: usize, seed: u64) -> Vec<Vec<C64>> {
    let mut out = structured_probes(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.extend((0..random).map(|_| haar_ket(dim, &mut rng)));
    out
}

/// The deterministic part of [`probe_kets`].
pub fn structured_probes(dim: usize) -> Vec<Vec<C64>> {
    let zero = C64::new(0.0, 0.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out: Vec<Vec<C64>> = (0..dim)
        .map(|i| {
            let mut v = vec![zero; dim];
            v[i] = C64::new(1.0, 0.0);
            v
        })
        .collect();
    for i in 0..dim {
        for j in i + 1..dim {
            for phase in [C64::new(s, 0.0), C64::new(0.0, s)] {
                let mut v = vec![zero; dim];
                v[i] = C64::new(s, 0.0);
                v[j] = phase;
                out.push(v);
            }
        }
    }
    out
}
