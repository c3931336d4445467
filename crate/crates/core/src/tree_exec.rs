//! Sequential execution of measurement trees and the cumulative operators of
//! their branches.

use indexmap::IndexMap;

use crate::qlin::{apply_kraus, apply_kraus_post, outcome_probability, ComplexMatrix, DensityOperator, Measurement, PostState};
use crate::reduce::{Branch, MeasTree, Route};
use crate::{Error, Result, Tolerances};

/// Probability and unnormalized output of one branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchRun {
    pub branch: Branch,
    pub probability: f64,
    pub output: PostState,
}

/// `C_β = A_N ⋯ A_1`, the edge operators of a branch composed with the
/// deepest one leftmost.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeOperator {
    pub branch: Branch,
    pub matrix: ComplexMatrix,
}

fn on_tree_space(t: &MeasTree, sigma: &DensityOperator) -> Result<DensityOperator> {
    let space = t.space()?;
    if sigma.dim() != space.total_dim() {
        return Err(Error::DimensionMismatch {
            context: "tree input",
            expected: space.total_dim(),
            found: sigma.dim(),
        });
    }
    let tr = sigma.trace();
    if tr <= Tolerances::current().zero {
        return Err(Error::ZeroTrace(tr));
    }
    sigma.relabel(space)
}

/// Runs the tree on `σ₀`: measure at the root, follow the outcome, repeat
/// until a leaf. States stay unnormalized; each step's probability is the
/// trace ratio of consecutive states and a branch's probability is their
/// product. Branches come depth first in outcome order.
pub fn run_tree(t: &MeasTree, sigma0: &DensityOperator) -> Result<Vec<BranchRun>> {
    fn go(
        t: &MeasTree,
        id: &str,
        state: PostState,
        prob: f64,
        route: &mut Vec<String>,
        out: &mut Vec<BranchRun>,
    ) -> Result<()> {
        let node = t.node(id).expect("tree is closed");
        let Some(m) = &node.measurement else {
            out.push(BranchRun {
                branch: Route(route.clone()),
                probability: prob,
                output: state,
            });
            return Ok(());
        };
        let before = state.trace();
        for (label, op) in m.iter() {
            let next = apply_kraus_post(op, &state)?;
            let step = if next.is_zero() { 0.0 } else { next.trace() / before };
            route.push(label.to_string());
            go(t, &node.children[label], next, prob * step, route, out)?;
            route.pop();
        }
        Ok(())
    }

    let sigma = on_tree_space(t, sigma0)?;
    let mut out = Vec::new();
    go(t, t.root(), PostState::State(sigma), 1.0, &mut Vec::new(), &mut out)?;
    Ok(out)
}

/// The edge operators along `β` multiplied right to left.
pub fn cumulative_operator(t: &MeasTree, beta: &Branch) -> Result<CumulativeOperator> {
    if !t.is_branch(beta) {
        return Err(Error::NotABranch(beta.to_string()));
    }
    let mut at = t.root();
    let mut c = ComplexMatrix::identity(t.space()?.total_dim());
    for label in beta.labels() {
        let node = t.node(at).expect("tree is closed");
        let m = node.measurement.as_ref().expect("internal node");
        c = m.operator(label).expect("edge matches an outcome") * &c;
        at = &node.children[label];
    }
    Ok(CumulativeOperator {
        branch: beta.clone(),
        matrix: c,
    })
}

/// `{C_β}` over all branches, labeled by the branches' display form.
pub fn aggregate_measurement(t: &MeasTree) -> Result<Measurement> {
    let mut outcomes = IndexMap::new();
    for beta in t.branches() {
        let label = beta.to_string();
        let c = cumulative_operator(t, &beta)?.matrix;
        if outcomes.insert(label.clone(), c).is_some() {
            return Err(Error::DuplicateLabel(label));
        }
    }
    Measurement::new(outcomes)
}

/// `Tr(C_β σ C_β†)/Tr(σ)`.
pub fn branch_probability(t: &MeasTree, beta: &Branch, sigma: &DensityOperator) -> Result<f64> {
    let sigma = on_tree_space(t, sigma)?;
    outcome_probability(&cumulative_operator(t, beta)?.matrix, &sigma)
}

/// `C_β σ C_β†`.
pub fn branch_output(t: &MeasTree, beta: &Branch, sigma: &DensityOperator) -> Result<PostState> {
    let sigma = on_tree_space(t, sigma)?;
    apply_kraus(&cumulative_operator(t, beta)?.matrix, &sigma)
}

/// True when the branch probability exceeds the zero cutoff.
pub fn attainable(t: &MeasTree, beta: &Branch, sigma: &DensityOperator) -> Result<bool> {
    Ok(branch_probability(t, beta, sigma)? > Tolerances::current().zero)
}
