use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, C64};
use crate::{Error, Result};

/// One tensor factor of a Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub wire: String,
    pub dim: usize,
}

/// Ordered tensor product of named finite-dimensional factors.
///
/// The empty product is the one-dimensional space.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HilbertSpec {
    factors: Vec<Factor>,
}

impl HilbertSpec {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let factors: Vec<Factor> = factors
            .into_iter()
            .map(|(w, dim)| Factor { wire: w.into(), dim })
            .collect();
        for (i, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(Error::InvalidDimension(f.wire.clone(), 0));
            }
            if factors[..i].iter().any(|g| g.wire == f.wire) {
                return Err(Error::DuplicateWire(f.wire.clone()));
            }
        }
        Ok(HilbertSpec { factors })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn wires(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|f| f.wire.as_str())
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn position(&self, wire: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.wire == wire)
    }

    pub fn dim_of(&self, wire: &str) -> Option<usize> {
        self.position(wire).map(|p| self.factors[p].dim)
    }

    /// The subspace spanned by `wires`, in the listed order.
    pub fn subspace<S: AsRef<str>>(&self, wires: &[S]) -> Result<HilbertSpec> {
        let factors = wires
            .iter()
            .map(|w| {
                let w = w.as_ref();
                self.dim_of(w)
                    .map(|dim| (w.to_string(), dim))
                    .ok_or_else(|| Error::UnknownWire(w.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        HilbertSpec::new(factors)
    }

    /// `self ⊗ other`; wire ids must stay unique.
    pub fn concat(&self, other: &HilbertSpec) -> Result<HilbertSpec> {
        HilbertSpec::new(
            self.factors
                .iter()
                .chain(&other.factors)
                .map(|f| (f.wire.clone(), f.dim)),
        )
    }

    /// Row-major strides of each factor.
    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factors.len()];
        for k in (0..self.factors.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.factors[k + 1].dim;
        }
        strides
    }

    /// Full-space offsets of every basis state of the listed factor positions,
    /// enumerated in row-major order over those factors.
    fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &p in positions {
            let mut next = Vec::with_capacity(out.len() * self.factors[p].dim);
            for base in &out {
                for d in 0..self.factors[p].dim {
                    next.push(base + d * strides[p]);
                }
            }
            out = next;
        }
        out
    }

    fn positions<S: AsRef<str>>(&self, wires: &[S]) -> Result<Vec<usize>> {
        let mut seen = Vec::with_capacity(wires.len());
        for w in wires {
            let w = w.as_ref();
            let p = self.position(w).ok_or_else(|| Error::UnknownWire(w.to_string()))?;
            if seen.contains(&p) {
                return Err(Error::DuplicateWire(w.to_string()));
            }
            seen.push(p);
        }
        Ok(seen)
    }

    fn complement(&self, positions: &[usize]) -> Vec<usize> {
        (0..self.factors.len()).filter(|p| !positions.contains(p)).collect()
    }
}

/// Embeds `op`, acting on the wires `on` in the listed order, into `space`
/// with the identity on every other factor.
pub fn lift_operator<S: AsRef<str>>(
    op: &ComplexMatrix,
    on: &[S],
    space: &HilbertSpec,
) -> Result<ComplexMatrix> {
    let pos = space.positions(on)?;
    let local: usize = pos.iter().map(|&p| space.factors[p].dim).product();
    if !op.is_square() {
        return Err(Error::NotSquare(op.rows(), op.cols()));
    }
    if op.rows() != local {
        return Err(Error::DimensionMismatch {
            context: "lifted operator",
            expected: local,
            found: op.rows(),
        });
    }
    let on_offsets = space.offsets(&pos);
    let rest_offsets = space.offsets(&space.complement(&pos));
    let n = space.total_dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for &r in &rest_offsets {
        for (i, &oi) in on_offsets.iter().enumerate() {
            for (j, &oj) in on_offsets.iter().enumerate() {
                out[(oi + r, oj + r)] = op[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Traces out every factor not listed in `keep`. The result lives on the kept
/// factors in their original order.
pub fn partial_trace_matrix<S: AsRef<str>>(
    m: &ComplexMatrix,
    space: &HilbertSpec,
    keep: &[S],
) -> Result<(ComplexMatrix, HilbertSpec)> {
    let n = space.total_dim();
    if m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "partial trace",
            expected: n,
            found: m.rows(),
        });
    }
    let mut pos = space.positions(keep)?;
    pos.sort_unstable();
    let kept = space.offsets(&pos);
    let traced = space.offsets(&space.complement(&pos));
    let out = ComplexMatrix::from_fn(kept.len(), kept.len(), |i, j| {
        traced.iter().map(|&t| m[(kept[i] + t, kept[j] + t)]).sum()
    });
    let spec = HilbertSpec {
        factors: pos.iter().map(|&p| space.factors[p].clone()).collect(),
    };
    Ok((out, spec))
}

/// Index map taking a basis index of `space` reordered as `order` to the
/// original index. `order` must list every wire exactly once.
fn permutation<S: AsRef<str>>(space: &HilbertSpec, order: &[S]) -> Result<(Vec<usize>, HilbertSpec)> {
    let pos = space.positions(order)?;
    if pos.len() != space.len() {
        return Err(Error::DimensionMismatch {
            context: "factor permutation",
            expected: space.len(),
            found: pos.len(),
        });
    }
    let target = HilbertSpec {
        factors: pos.iter().map(|&p| space.factors[p].clone()).collect(),
    };
    Ok((space.offsets(&pos), target))
}

/// Reorders the tensor factors of a vector.
pub fn permute_vector<S: AsRef<str>>(
    v: &[C64],
    space: &HilbertSpec,
    order: &[S],
) -> Result<(Vec<C64>, HilbertSpec)> {
    if v.len() != space.total_dim() {
        return Err(Error::DimensionMismatch {
            context: "vector permutation",
            expected: space.total_dim(),
            found: v.len(),
        });
    }
    let (map, target) = permutation(space, order)?;
    Ok((map.iter().map(|&k| v[k]).collect(), target))
}

/// Reorders the tensor factors of a square operator.
pub fn permute_matrix<S: AsRef<str>>(
    m: &ComplexMatrix,
    space: &HilbertSpec,
    order: &[S],
) -> Result<(ComplexMatrix, HilbertSpec)> {
    if m.rows() != space.total_dim() || !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "matrix permutation",
            expected: space.total_dim(),
            found: m.rows(),
        });
    }
    let (map, target) = permutation(space, order)?;
    let out = ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(map[i], map[j])]);
    Ok((out, target))
}
