//! Seeded random states, unitaries and measurements.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{ComplexMatrix, Measurement, C64};

/// Complex standard Gaussian.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-uniform unit vector.
pub fn haar_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

/// Random positive operator `G G†` with `G` a `dim × rank` Gaussian matrix,
/// normalized to unit trace.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, rank.max(1), |_, _| gaussian(rng));
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    m.scale_real(1.0 / tr)
}

/// `rows × cols` matrix with orthonormal columns (`rows ≥ cols`), from
/// Gram–Schmidt on a Gaussian matrix.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(rows >= cols);
    loop {
        let mut columns: Vec<Vec<C64>> = Vec::with_capacity(cols);
        let mut degenerate = false;
        for _ in 0..cols {
            let mut v: Vec<C64> = (0..rows).map(|_| gaussian(rng)).collect();
            // two passes for numerical orthogonality
            for _ in 0..2 {
                for u in &columns {
                    let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (x, y) in v.iter_mut().zip(u) {
                        *x -= proj * y;
                    }
                }
            }
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n < 1e-8 {
                degenerate = true;
                break;
            }
            columns.push(v.into_iter().map(|z| z / n).collect());
        }
        if !degenerate {
            return ComplexMatrix::from_fn(rows, cols, |i, j| columns[j][i]);
        }
    }
}

pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    random_isometry(dim, dim, rng)
}

/// Random measurement with the given labels on a `dim`-dimensional space:
/// the Kraus operators are the blocks of a random isometry `dim → n·dim`.
pub fn random_measurement<R: Rng + ?Sized, S: Into<String>>(
    dim: usize,
    labels: impl IntoIterator<Item = S>,
    rng: &mut R,
) -> Measurement {
    let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
    let n = labels.len();
    let v = random_isometry(n * dim, dim, rng);
    let pairs = labels.into_iter().enumerate().map(|(k, label)| {
        (label, ComplexMatrix::from_fn(dim, dim, |i, j| v[(k * dim + i, j)]))
    });
    Measurement::from_pairs(pairs).expect("isometry blocks form a complete measurement")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_objects_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(4, &mut rng);
        assert!(u.is_unitary(1e-12));
        let m = random_measurement(3, ["a", "b", "c"], &mut rng);
        assert!(m.completeness_residual() < 1e-12);
        let k = haar_ket(5, &mut rng);
        assert!((k.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12);
        let d = random_density(3, 2, &mut rng);
        assert!((d.trace().re - 1.0).abs() < 1e-12);
        assert!(d.hermitian_eigenvalues()[0] > -1e-12);
    }
}
