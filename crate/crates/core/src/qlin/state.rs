use super::space::partial_trace_matrix;
use super::{ComplexMatrix, HilbertSpec, C64};
use crate::{Error, Result, Tolerances};

/// A vector on a named tensor-product space; not necessarily normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    vector: Vec<C64>,
    dims: HilbertSpec,
}

impl Ket {
    pub fn new(vector: Vec<C64>, dims: HilbertSpec) -> Result<Self> {
        if vector.len() != dims.total_dim() {
            return Err(Error::DimensionMismatch {
                context: "ket",
                expected: dims.total_dim(),
                found: vector.len(),
            });
        }
        Ok(Ket { vector, dims })
    }

    pub fn basis(dims: HilbertSpec, index: usize) -> Self {
        let mut vector = vec![C64::new(0.0, 0.0); dims.total_dim()];
        vector[index] = C64::new(1.0, 0.0);
        Ket { vector, dims }
    }

    pub fn vector(&self) -> &[C64] {
        &self.vector
    }

    pub fn dims(&self) -> &HilbertSpec {
        &self.dims
    }

    pub fn norm(&self) -> f64 {
        self.vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn tensor(&self, other: &Ket) -> Result<Ket> {
        let dims = self.dims.concat(&other.dims)?;
        let vector = self
            .vector
            .iter()
            .flat_map(|a| other.vector.iter().map(move |b| a * b))
            .collect();
        Ok(Ket { vector, dims })
    }

    /// `|ψ⟩⟨ψ|`; fails for the zero vector.
    pub fn to_density(&self) -> Result<DensityOperator> {
        let n2 = self.norm().powi(2);
        if n2 <= Tolerances::current().zero {
            return Err(Error::ZeroTrace(n2));
        }
        Ok(DensityOperator {
            matrix: ComplexMatrix::outer(&self.vector, &self.vector),
            dims: self.dims.clone(),
        })
    }
}

/// Nonzero positive semidefinite operator; the trace need not be one.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    dims: HilbertSpec,
}

impl DensityOperator {
    /// Checks Hermiticity, positivity and a positive trace.
    pub fn new(matrix: ComplexMatrix, dims: HilbertSpec) -> Result<Self> {
        let tol = Tolerances::current();
        if !matrix.is_square() {
            return Err(Error::NotSquare(matrix.rows(), matrix.cols()));
        }
        if matrix.rows() != dims.total_dim() {
            return Err(Error::DimensionMismatch {
                context: "density operator",
                expected: dims.total_dim(),
                found: matrix.rows(),
            });
        }
        let scale = matrix.frobenius_norm().max(1.0);
        let defect = matrix.hermiticity_defect();
        if defect > tol.herm * scale {
            return Err(Error::NotHermitian(defect));
        }
        let trace = matrix.trace().re;
        if trace <= tol.zero {
            return Err(Error::ZeroTrace(trace));
        }
        let min_ev = matrix.hermitian_eigenvalues()[0];
        if min_ev < -tol.psd * trace.max(1.0) {
            return Err(Error::NotPsd(min_ev));
        }
        Ok(DensityOperator { matrix, dims })
    }

    /// Skips validation; for operators positive by construction.
    pub(crate) fn from_parts(matrix: ComplexMatrix, dims: HilbertSpec) -> Self {
        debug_assert_eq!(matrix.rows(), dims.total_dim());
        DensityOperator { matrix, dims }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &HilbertSpec {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Explicit renormalization to unit trace.
    pub fn normalized(&self) -> DensityOperator {
        DensityOperator {
            matrix: self.matrix.scale_real(1.0 / self.trace()),
            dims: self.dims.clone(),
        }
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        Ok(DensityOperator {
            matrix: self.matrix.kron(&other.matrix),
            dims: self.dims.concat(&other.dims)?,
        })
    }

    /// Same operator viewed on a relabeled space of equal total dimension.
    pub fn relabel(&self, dims: HilbertSpec) -> Result<DensityOperator> {
        if dims.total_dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "relabel",
                expected: self.dim(),
                found: dims.total_dim(),
            });
        }
        Ok(DensityOperator {
            matrix: self.matrix.clone(),
            dims,
        })
    }
}

/// Result of applying a Kraus operator: either a density operator or zero
/// (a probability-zero outcome).
#[derive(Debug, Clone, PartialEq)]
pub enum PostState {
    State(DensityOperator),
    Zero(HilbertSpec),
}

impl PostState {
    pub fn is_zero(&self) -> bool {
        matches!(self, PostState::Zero(_))
    }

    pub fn state(&self) -> Option<&DensityOperator> {
        match self {
            PostState::State(s) => Some(s),
            PostState::Zero(_) => None,
        }
    }

    pub fn dims(&self) -> &HilbertSpec {
        match self {
            PostState::State(s) => s.dims(),
            PostState::Zero(d) => d,
        }
    }

    pub fn trace(&self) -> f64 {
        self.state().map_or(0.0, DensityOperator::trace)
    }

    /// The operator, with zero materialized as the zero matrix.
    pub fn matrix(&self) -> ComplexMatrix {
        match self {
            PostState::State(s) => s.matrix().clone(),
            PostState::Zero(d) => ComplexMatrix::zeros(d.total_dim(), d.total_dim()),
        }
    }

    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<PostState> {
        match self {
            PostState::State(s) => partial_trace(s, keep).map(PostState::State),
            PostState::Zero(d) => Ok(PostState::Zero(d.subspace(&sorted_keep(d, keep)?)?)),
        }
    }

    fn from_matrix(matrix: ComplexMatrix, dims: HilbertSpec, reference_trace: f64) -> PostState {
        if matrix.trace().re <= Tolerances::current().zero * reference_trace {
            PostState::Zero(dims)
        } else {
            PostState::State(DensityOperator::from_parts(matrix, dims))
        }
    }
}

fn sorted_keep<S: AsRef<str>>(d: &HilbertSpec, keep: &[S]) -> Result<Vec<String>> {
    let mut pos = keep
        .iter()
        .map(|w| d.position(w.as_ref()).ok_or_else(|| Error::UnknownWire(w.as_ref().to_string())))
        .collect::<Result<Vec<_>>>()?;
    pos.sort_unstable();
    Ok(pos.into_iter().map(|p| d.factors()[p].wire.clone()).collect())
}

fn check_operator(l: &ComplexMatrix, dim: usize) -> Result<()> {
    if !l.is_square() {
        return Err(Error::NotSquare(l.rows(), l.cols()));
    }
    if l.rows() != dim {
        return Err(Error::DimensionMismatch {
            context: "Kraus operator",
            expected: dim,
            found: l.rows(),
        });
    }
    Ok(())
}

/// `σ ↦ LσL†`, flagged as zero when the trace falls below the zero cutoff
/// relative to `Tr(σ)`.
pub fn apply_kraus(l: &ComplexMatrix, sigma: &DensityOperator) -> Result<PostState> {
    check_operator(l, sigma.dim())?;
    let m = &(l * sigma.matrix()) * &l.adjoint();
    Ok(PostState::from_matrix(m, sigma.dims().clone(), sigma.trace()))
}

/// Applies `L` to a possibly-zero state.
pub fn apply_kraus_post(l: &ComplexMatrix, sigma: &PostState) -> Result<PostState> {
    match sigma {
        PostState::State(s) => apply_kraus(l, s),
        PostState::Zero(d) => {
            check_operator(l, d.total_dim())?;
            Ok(PostState::Zero(d.clone()))
        }
    }
}

/// `Tr(LσL†)/Tr(σ)`, clamped to `[0, 1]` when within tolerance of the boundary.
pub fn outcome_probability(l: &ComplexMatrix, sigma: &DensityOperator) -> Result<f64> {
    check_operator(l, sigma.dim())?;
    let tr = sigma.trace();
    if tr <= Tolerances::current().zero {
        return Err(Error::ZeroTrace(tr));
    }
    let p = (&(l * sigma.matrix()) * &l.adjoint()).trace().re / tr;
    Ok(clamp_probability(p))
}

pub(crate) fn clamp_probability(p: f64) -> f64 {
    let slack = Tolerances::current().complete;
    if p < 0.0 && p > -slack {
        0.0
    } else if p > 1.0 && p < 1.0 + slack {
        1.0
    } else {
        p
    }
}

/// Traces out every factor not in `keep`; the trace is preserved.
pub fn partial_trace<S: AsRef<str>>(sigma: &DensityOperator, keep: &[S]) -> Result<DensityOperator> {
    let (m, dims) = partial_trace_matrix(sigma.matrix(), sigma.dims(), keep)?;
    Ok(DensityOperator::from_parts(m, dims))
}

/// Purity test `|Tr(σ²) − Tr(σ)²| ≤ tol·Tr(σ)²`, valid for unnormalized σ.
pub fn is_pure(sigma: &DensityOperator, tol: f64) -> bool {
    let m = sigma.matrix();
    let tr = sigma.trace();
    let tr_sq = (m * m).trace().re;
    (tr_sq - tr * tr).abs() <= tol * tr * tr
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlin::gates;

    fn qubit(w: &str) -> HilbertSpec {
        HilbertSpec::new([(w, 2)]).unwrap()
    }

    fn dm(entries: &[f64], w: &str) -> DensityOperator {
        DensityOperator::new(ComplexMatrix::from_real(2, 2, entries).unwrap(), qubit(w)).unwrap()
    }

    fn plus() -> DensityOperator {
        dm(&[0.5, 0.5, 0.5, 0.5], "q")
    }

    fn proj(k: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(k, k)] = C64::new(1.0, 0.0);
        m
    }

    #[test]
    fn density_validation() {
        assert!(matches!(
            DensityOperator::new(gates::pauli_x(), qubit("q")),
            Err(Error::ZeroTrace(_))
        ));
        assert!(matches!(
            DensityOperator::new(ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 1.0]).unwrap(), qubit("q")),
            Err(Error::NotPsd(_))
        ));
        assert!(matches!(
            DensityOperator::new(ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap(), qubit("q")),
            Err(Error::NotHermitian(_))
        ));
        // unnormalized is fine
        assert!(DensityOperator::new(ComplexMatrix::identity(2).scale_real(7.0), qubit("q")).is_ok());
    }

    #[test]
    fn kraus_identity_and_projectors() {
        let s = plus();
        let out = apply_kraus(&ComplexMatrix::identity(2), &s).unwrap();
        assert_eq!(out.state().unwrap(), &s);

        let out = apply_kraus(&proj(0), &s).unwrap();
        assert!(out.matrix().distance(&proj(0).scale_real(0.5)) < 1e-15);

        let out = apply_kraus(&proj(0), &dm(&[0.0, 0.0, 0.0, 1.0], "q")).unwrap();
        assert!(out.is_zero());
        assert_eq!(out.matrix(), ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn probabilities() {
        assert!((outcome_probability(&proj(0), &plus()).unwrap() - 0.5).abs() < 1e-15);
        let u = gates::hadamard();
        assert!((outcome_probability(&u, &plus()).unwrap() - 1.0).abs() < 1e-15);
        let unnorm = dm(&[0.6, 0.0, 0.0, 1.4], "q");
        assert!((outcome_probability(&proj(1), &unnorm).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_and_bell() {
        let rho = dm(&[0.3, 0.1, 0.1, 0.7], "h");
        let a = Ket::basis(qubit("a"), 1).to_density().unwrap();
        let full = rho.tensor(&a).unwrap();
        let back = partial_trace(&full, &["h"]).unwrap();
        assert!(back.matrix().distance(rho.matrix()) < 1e-15);
        assert_eq!(back.dims(), rho.dims());

        let r = 0.5f64.sqrt();
        let dims = HilbertSpec::new([("a", 2), ("b", 2)]).unwrap();
        let bell = Ket::new(
            vec![C64::new(r, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(r, 0.0)],
            dims,
        )
        .unwrap()
        .to_density()
        .unwrap();
        let reduced = partial_trace(&bell, &["a"]).unwrap();
        assert!(reduced.matrix().distance(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);

        let total = partial_trace(&bell, &[] as &[&str]).unwrap();
        assert!((total.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(matches!(partial_trace(&bell, &["zz"]), Err(Error::UnknownWire(_))));
    }

    #[test]
    fn purity() {
        assert!(is_pure(&dm(&[1.0, 0.0, 0.0, 0.0], "q"), 1e-12));
        assert!(!is_pure(&dm(&[0.5, 0.0, 0.0, 0.5], "q"), 1e-12));
        assert!(is_pure(&dm(&[2.5, 2.5, 2.5, 2.5], "q"), 1e-12));
    }

    #[test]
    fn zero_post_state_partial_trace_keeps_dims() {
        let dims = HilbertSpec::new([("a", 2), ("b", 3)]).unwrap();
        let z = PostState::Zero(dims).partial_trace(&["b"]).unwrap();
        assert_eq!(z.matrix(), ComplexMatrix::zeros(3, 3));
    }
}
