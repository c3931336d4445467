use serde::{Deserialize, Serialize};

use super::factor::{factor_branch, output_split};
use super::probe_kets;
use crate::qlin::{partial_trace_matrix, proportional, ComplexMatrix, DensityOperator, HilbertSpec, Ket, C64};
use crate::reduce::{Branch, MeasTree};
use crate::tree_exec::{branch_output, branch_probability};
use crate::{Error, Result, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Independent,
    Dependent,
    Inconclusive,
}

impl Verdict {
    fn from_spread(spread: f64, tol: &Tolerances) -> Verdict {
        if spread <= tol.independence {
            Verdict::Independent
        } else if spread > tol.dependence {
            Verdict::Dependent
        } else {
            Verdict::Inconclusive
        }
    }
}

/// Spread of one branch's probability over pure principal probes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub branch: Branch,
    pub probe_count: usize,
    pub min_prob: f64,
    pub max_prob: f64,
    pub max_deviation: f64,
    pub verdict: Verdict,
    /// `‖b‖²` when the branch factors.
    pub factor_probability: Option<f64>,
    /// When the branch factors: every probe probability equals `‖b‖²` and the
    /// spread is within the independence tolerance.
    pub factor_consistent: Option<bool>,
}

fn principal_dims(t: &MeasTree) -> Result<HilbertSpec> {
    t.layout().principal_space()
}

fn pure_probe(dims: &HilbertSpec, psi: Vec<C64>) -> Result<DensityOperator> {
    Ket::new(psi, dims.clone())?.to_density()
}

/// Probabilities of `beta` on each probe, with the probes' full inputs.
fn probe_probabilities(t: &MeasTree, beta: &Branch, probes: usize, seed: u64) -> Result<Vec<f64>> {
    let dims = principal_dims(t)?;
    probe_kets(dims.total_dim(), probes, seed)
        .into_iter()
        .map(|psi| {
            let rho = pure_probe(&dims, psi)?;
            branch_probability(t, beta, &t.layout().full_input(&rho)?)
        })
        .collect()
}

fn spread(ps: &[f64]) -> (f64, f64) {
    let lo = ps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Evaluates the branch probability on the structured probes plus `probes`
/// Haar-random principal kets and classifies the spread.
pub fn check_independence(t: &MeasTree, beta: &Branch, probes: usize, seed: u64) -> Result<IndependenceReport> {
    let tol = Tolerances::current();
    let ps = probe_probabilities(t, beta, probes, seed)?;
    let (lo, hi) = spread(&ps);
    let deviation = hi - lo;
    let factor = factor_branch(t, beta)?;
    let factor_probability = factor.as_ref().map(|f| f.probability);
    let factor_consistent = factor_probability.map(|q| {
        deviation <= tol.independence && ps.iter().all(|p| (p - q).abs() <= tol.independence)
    });
    Ok(IndependenceReport {
        branch: beta.clone(),
        probe_count: ps.len(),
        min_prob: lo,
        max_prob: hi,
        max_deviation: deviation,
        verdict: Verdict::from_spread(deviation, tol),
        factor_probability,
        factor_consistent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputesReport {
    pub branch: Branch,
    pub holds: bool,
    pub probe_count: usize,
    /// Largest `‖Tr_G(C_β ρ̃ C_β†) − P(β|ρ̃)·UρU†‖_F`.
    pub max_residual: f64,
}

/// Checks that along `beta` the output wires carry `UρU†` scaled by the
/// branch probability, for every probe on which the branch is attainable.
pub fn check_computes(t: &MeasTree, beta: &Branch, u: &ComplexMatrix, probes: usize, seed: u64) -> Result<ComputesReport> {
    let tol = Tolerances::current();
    let dims = principal_dims(t)?;
    let (_, out_space, _) = output_split(t)?;
    if u.cols() != dims.total_dim() || u.rows() != out_space.total_dim() {
        return Err(Error::DimensionMismatch {
            context: "computed operator",
            expected: out_space.total_dim() * dims.total_dim(),
            found: u.rows() * u.cols(),
        });
    }
    let out_wires: Vec<&str> = out_space.wires().collect();
    let kets = probe_kets(dims.total_dim(), probes, seed);
    let mut holds = true;
    let mut max_residual = 0.0f64;
    for psi in &kets {
        let rho = pure_probe(&dims, psi.clone())?;
        let full = t.layout().full_input(&rho)?;
        let p = branch_probability(t, beta, &full)?;
        let output = branch_output(t, beta, &full)?;
        let (reduced, reduced_space) = partial_trace_matrix(&output.matrix(), output.dims(), &out_wires)?;
        // Partial trace keeps full-space order; bring it to the listed output order.
        let (reduced, _) = crate::qlin::permute_matrix(&reduced, &reduced_space, &out_wires)?;
        let target = &(u * rho.matrix()) * &u.adjoint();
        max_residual = max_residual.max(reduced.distance(&target.scale_real(p)));
        if p <= tol.zero {
            continue;
        }
        match proportional(&reduced, &target, tol.fact) {
            Some(c) if (c - p).abs() <= tol.independence => {}
            _ => holds = false,
        }
    }
    Ok(ComputesReport {
        branch: beta.clone(),
        holds,
        probe_count: kets.len(),
        max_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetIndependenceReport {
    pub branches: Vec<Branch>,
    pub probe_count: usize,
    pub min_total: f64,
    pub max_total: f64,
    pub max_deviation: f64,
    /// `Σ‖b_β‖²`, when every branch factors.
    pub constant: Option<f64>,
    pub verdict: Verdict,
    /// First branch that does not factor.
    pub failing_branch: Option<Branch>,
}

/// Checks that the total probability of a set of branches is the same on
/// every probe. Inconclusive when some branch does not factor.
pub fn check_set_independence(
    t: &MeasTree,
    branches: &[Branch],
    probes: usize,
    seed: u64,
) -> Result<SetIndependenceReport> {
    let tol = Tolerances::current();
    let mut constant = 0.0;
    let mut failing = None;
    for beta in branches {
        match factor_branch(t, beta)? {
            Some(f) => constant += f.probability,
            None => {
                failing = Some(beta.clone());
                break;
            }
        }
    }
    let mut totals: Vec<f64> = Vec::new();
    for beta in branches {
        let ps = probe_probabilities(t, beta, probes, seed)?;
        if totals.is_empty() {
            totals = ps;
        } else {
            totals.iter_mut().zip(ps).for_each(|(a, p)| *a += p);
        }
    }
    if totals.is_empty() {
        totals = vec![0.0; probe_kets(principal_dims(t)?.total_dim(), probes, seed).len()];
    }
    let (lo, hi) = spread(&totals);
    let verdict = if failing.is_some() {
        Verdict::Inconclusive
    } else {
        Verdict::from_spread(hi - lo, tol)
    };
    Ok(SetIndependenceReport {
        branches: branches.to_vec(),
        probe_count: totals.len(),
        min_total: lo,
        max_total: hi,
        max_deviation: hi - lo,
        constant: failing.is_none().then_some(constant),
        verdict,
        failing_branch: failing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingVerdict {
    Confirmed,
    Refuted,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryScalingReport {
    /// `sqrt(Σ_β ‖b_β‖²)` with each `b_β` taken relative to the given `U`.
    pub t_scale: Option<f64>,
    /// `(tU)†(tU) = I`.
    pub isometry: bool,
    /// `tU` unitary, reported when `U` is square.
    pub unitary: Option<bool>,
    pub verdict: ScalingVerdict,
    /// Branch that does not factor, or whose factor is not a multiple of `U`.
    pub failing_branch: Option<Branch>,
}

/// Given that every branch computes a multiple of `U`, finds the scale `t`
/// with `tU` an isometry.
///
/// A branch factoring as `U_β = λ_β·U` contributes `|λ_β|²‖b_β‖²` to `t²`.
pub fn check_isometry_scaling(t: &MeasTree, u: &ComplexMatrix) -> Result<IsometryScalingReport> {
    let tol = Tolerances::current();
    let inconclusive = |failing: Branch| IsometryScalingReport {
        t_scale: None,
        isometry: false,
        unitary: None,
        verdict: ScalingVerdict::Inconclusive,
        failing_branch: Some(failing),
    };
    let u_sq = u.frobenius_inner(u).re;
    if u_sq <= tol.zero {
        return Err(Error::Malformed("operator is zero".into()));
    }
    let mut t_sq = 0.0;
    for beta in t.branches() {
        let Some(f) = factor_branch(t, &beta)? else {
            return Ok(inconclusive(beta));
        };
        let ub = &f.principal_operator;
        if ub.rows() != u.rows() || ub.cols() != u.cols() {
            return Err(Error::DimensionMismatch {
                context: "computed operator",
                expected: ub.rows() * ub.cols(),
                found: u.rows() * u.cols(),
            });
        }
        let lambda = u.frobenius_inner(ub) / u_sq;
        if ub.distance(&u.scale(lambda)) > tol.fact * ub.frobenius_norm().max(1.0) {
            return Ok(inconclusive(beta));
        }
        t_sq += lambda.norm_sqr() * f.probability;
    }
    let scale = t_sq.sqrt();
    let tu = u.scale_real(scale);
    let isometry = tu.is_isometry(tol.independence);
    let unitary = u.is_square().then(|| tu.is_unitary(tol.independence));
    Ok(IsometryScalingReport {
        t_scale: Some(scale),
        isometry,
        unitary,
        verdict: if isometry {
            ScalingVerdict::Confirmed
        } else {
            ScalingVerdict::Refuted
        },
        failing_branch: None,
    })
}
