use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::space::lift_operator;
use super::{ComplexMatrix, HilbertSpec};
use crate::{Error, Result, Tolerances};

/// Separator joining constituent labels of a tensor-product measurement.
pub const TUPLE_SEPARATOR: char = '|';

/// A general measurement: labeled operators `L_i` with `Σ L_i†L_i = I`.
///
/// Outcomes keep their declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasurementRepr", into = "MeasurementRepr")]
pub struct Measurement {
    outcomes: IndexMap<String, ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
struct MeasurementRepr {
    outcomes: IndexMap<String, ComplexMatrix>,
}

impl TryFrom<MeasurementRepr> for Measurement {
    type Error = Error;

    fn try_from(r: MeasurementRepr) -> Result<Self> {
        Measurement::new(r.outcomes)
    }
}

impl From<Measurement> for MeasurementRepr {
    fn from(m: Measurement) -> Self {
        MeasurementRepr { outcomes: m.outcomes }
    }
}

impl Measurement {
    pub fn new(outcomes: IndexMap<String, ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(outcomes, Tolerances::current().complete)
    }

    pub fn with_tolerance(outcomes: IndexMap<String, ComplexMatrix>, tol: f64) -> Result<Self> {
        let first = outcomes.values().next().ok_or(Error::EmptyMeasurement)?;
        let dim = first.rows();
        for op in outcomes.values() {
            if !op.is_square() {
                return Err(Error::NotSquare(op.rows(), op.cols()));
            }
            if op.rows() != dim {
                return Err(Error::DimensionMismatch {
                    context: "measurement operator",
                    expected: dim,
                    found: op.rows(),
                });
            }
        }
        let m = Measurement { outcomes };
        let residual = m.completeness_residual();
        if residual.is_nan() || residual > tol {
            return Err(Error::IncompleteMeasurement(residual));
        }
        Ok(m)
    }

    /// Builds from `(label, operator)` pairs, rejecting repeated labels.
    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, ComplexMatrix)>) -> Result<Self> {
        let mut outcomes = IndexMap::new();
        for (label, op) in pairs {
            let label = label.into();
            if outcomes.contains_key(&label) {
                return Err(Error::DuplicateLabel(label));
            }
            outcomes.insert(label, op);
        }
        Self::new(outcomes)
    }

    /// A single-outcome measurement, i.e. a unitary (or isometric) gate.
    pub fn single(label: impl Into<String>, op: ComplexMatrix) -> Result<Self> {
        Self::from_pairs([(label, op)])
    }

    /// Projective measurement in the computational basis, labels `"0"`, `"1"`, ….
    pub fn computational(dim: usize) -> Self {
        let pairs = (0..dim).map(|k| {
            let mut p = ComplexMatrix::zeros(dim, dim);
            p[(k, k)] = super::C64::new(1.0, 0.0);
            (k.to_string(), p)
        });
        Self::from_pairs(pairs).expect("projectors are complete")
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].rows()
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.outcomes.keys().map(String::as_str)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.outcomes.contains_key(label)
    }

    pub fn operator(&self, label: &str) -> Option<&ComplexMatrix> {
        self.outcomes.get(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ComplexMatrix)> {
        self.outcomes.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// `‖Σ L†L − I‖_F`.
    pub fn completeness_residual(&self) -> f64 {
        let n = self.dim();
        let sum = self
            .outcomes
            .values()
            .fold(ComplexMatrix::zeros(n, n), |acc, l| &acc + &(&l.adjoint() * l));
        sum.distance_to_identity()
    }

    /// Lifts every operator onto `space`; completeness is preserved.
    pub fn lift<S: AsRef<str>>(&self, on: &[S], space: &HilbertSpec) -> Result<Measurement> {
        let outcomes = self
            .outcomes
            .iter()
            .map(|(k, l)| Ok((k.clone(), lift_operator(l, on, space)?)))
            .collect::<Result<IndexMap<_, _>>>()?;
        Ok(Measurement { outcomes })
    }
}

/// Joins constituent labels into a tuple label.
pub fn tuple_label<S: AsRef<str>>(parts: &[S]) -> String {
    let sep = TUPLE_SEPARATOR.to_string();
    parts.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(&sep)
}

/// Tensor product `M_1 ⊗ M_2 ⊗ …` with outcomes `(i, j, …)` in row-major order.
///
/// A single measurement is returned unchanged. With two or more factors the
/// constituent labels must not contain [`TUPLE_SEPARATOR`].
pub fn tensor_measurements(ms: &[Measurement]) -> Result<Measurement> {
    match ms {
        [] => Err(Error::EmptyMeasurement),
        [m] => Ok(m.clone()),
        _ => {
            for m in ms {
                if let Some(bad) = m.labels().find(|l| l.contains(TUPLE_SEPARATOR)) {
                    return Err(Error::LabelSeparator(bad.to_string()));
                }
            }
            let mut acc: Vec<(Vec<&str>, ComplexMatrix)> = vec![(vec![], ComplexMatrix::identity(1))];
            for m in ms {
                acc = acc
                    .iter()
                    .flat_map(|(labels, op)| {
                        m.iter().map(move |(l, x)| {
                            let mut labels = labels.clone();
                            labels.push(l);
                            (labels, op.kron(x))
                        })
                    })
                    .collect();
            }
            let outcomes = acc
                .into_iter()
                .map(|(labels, op)| (tuple_label(&labels), op))
                .collect();
            Ok(Measurement { outcomes })
        }
    }
}
