use serde::{Deserialize, Serialize};

use crate::qlin::{permute_matrix, permute_vector, ComplexMatrix, DensityOperator, HilbertSpec, Ket, C64};
use crate::reduce::{Branch, MeasTree};
use crate::tree_exec::cumulative_operator;
use crate::{Error, Result, Tolerances};

use super::structured_probes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorKind {
    /// `U` is square with `U†U = UU† = I`.
    Unitary,
    /// `U†U = I` only.
    IsometryOnly,
}

/// `C_β(|ψ⟩⊗|a⟩) = U|ψ⟩ ⊗ |b⟩` for every principal `|ψ⟩`, where `U` maps the
/// principal input to the output wires and `|b⟩` lives on the remaining
/// wires.
///
/// `|b⟩` is gauged so that its largest entry is real and positive; `U`
/// carries the compensating phase.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchFactorization {
    pub branch: Branch,
    pub principal_operator: ComplexMatrix,
    pub ancilla_vector: Ket,
    /// Largest `‖C_β(ψ⊗a) − Uψ⊗b‖` over unit probes.
    pub residual: f64,
    /// `‖b‖²`.
    pub probability: f64,
    pub kind: FactorKind,
}

/// Output wires followed by the remaining wires, and the two subspaces.
pub(crate) fn output_split(t: &MeasTree) -> Result<(Vec<String>, HilbertSpec, HilbertSpec)> {
    let layout = t.layout();
    if !layout.has_roles() {
        return Err(Error::MissingWireRoles);
    }
    let space = t.space()?;
    let out = layout.output_wires();
    let garbage = layout.garbage_wires()?;
    let out_space = space.subspace(&out)?;
    let garbage_space = space.subspace(&garbage)?;
    let order = out.into_iter().chain(garbage).collect();
    Ok((order, out_space, garbage_space))
}

/// `C_β(|ψ⟩⊗|a⟩)` with factors reordered as (output, garbage).
fn branch_image(
    c: &ComplexMatrix,
    t: &MeasTree,
    order: &[String],
    psi: &[C64],
) -> Result<Vec<C64>> {
    let full = t.layout().full_ket(psi)?;
    let v = c.apply(full.vector());
    Ok(permute_vector(&v, &t.space()?, order)?.0)
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Factors the branch's cumulative operator on inputs `ψ ⊗ a`. Returns
/// `None` when some basis image is not a product, when the images do not
/// share one ancilla factor, or when the resulting `U` is not an isometry.
pub fn factor_branch(t: &MeasTree, beta: &Branch) -> Result<Option<BranchFactorization>> {
    let tol = Tolerances::current();
    let (order, out_space, garbage_space) = output_split(t)?;
    let d_in = t.layout().principal_space()?.total_dim();
    let d_out = out_space.total_dim();
    let d_g = garbage_space.total_dim();
    let c = cumulative_operator(t, beta)?.matrix;

    // Images of the basis, each reshaped to d_out × d_g.
    let images: Vec<ComplexMatrix> = structured_probes(d_in)[..d_in]
        .iter()
        .map(|e| Ok(ComplexMatrix::new(d_out, d_g, branch_image(&c, t, &order, e)?).expect("shape")))
        .collect::<Result<_>>()?;

    let mut biggest = 0;
    for (i, v) in images.iter().enumerate() {
        let s = v.singular_values();
        if s[0] > tol.zero && s.get(1).is_some_and(|&s1| s1 > tol.rank * s[0]) {
            log::debug!("branch {beta}: basis image {i} has Schmidt rank above one");
            return Ok(None);
        }
        if v.frobenius_norm() > images[biggest].frobenius_norm() {
            biggest = i;
        }
    }
    if images[biggest].frobenius_norm() <= tol.zero {
        log::debug!("branch {beta}: cumulative operator vanishes on the input subspace");
        return Ok(None);
    }

    // Any nonzero row of a product image is proportional to b.
    let v = &images[biggest];
    let row = (0..d_out)
        .max_by(|&a, &b| vec_norm(v.row(a)).total_cmp(&vec_norm(v.row(b))))
        .expect("nonempty");
    let mut b_hat: Vec<C64> = v.row(row).to_vec();
    let peak = b_hat
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("nonempty");
    let gauge = peak.conj() / (peak.norm() * vec_norm(&b_hat));
    b_hat.iter_mut().for_each(|z| *z *= gauge);

    // u_i = V_i · conj(b̂), scaled so that U has unit mean column norm.
    let columns: Vec<Vec<C64>> = images
        .iter()
        .map(|v| (0..d_out).map(|r| v.row(r).iter().zip(&b_hat).map(|(x, y)| x * y.conj()).sum()).collect())
        .collect();
    let b_norm = (columns.iter().map(|u| vec_norm(u).powi(2)).sum::<f64>() / d_in as f64).sqrt();
    let u = ComplexMatrix::from_fn(d_out, d_in, |r, i| columns[i][r] / b_norm);
    let b: Vec<C64> = b_hat.iter().map(|z| z * b_norm).collect();

    let mut residual = 0.0f64;
    for psi in structured_probes(d_in) {
        let got = branch_image(&c, t, &order, &psi)?;
        let want = kron_vec(&u.apply(&psi), &b);
        let diff: Vec<C64> = got.iter().zip(&want).map(|(x, y)| x - y).collect();
        residual = residual.max(vec_norm(&diff));
    }
    if residual > tol.fact {
        log::debug!("branch {beta}: no common ancilla factor (residual {residual:e})");
        return Ok(None);
    }
    if !u.is_isometry(tol.fact) {
        log::debug!("branch {beta}: factor is not an isometry");
        return Ok(None);
    }
    let kind = if u.is_unitary(tol.fact) {
        FactorKind::Unitary
    } else {
        FactorKind::IsometryOnly
    };
    Ok(Some(BranchFactorization {
        branch: beta.clone(),
        principal_operator: u,
        ancilla_vector: Ket::new(b, garbage_space)?,
        residual,
        probability: b_norm * b_norm,
        kind,
    }))
}

/// `‖C_β ρ̃ C_β† − UρU† ⊗ |b⟩⟨b|‖_F` for a principal state `ρ`, with the
/// full space ordered as (output, garbage).
pub fn factorization_residual(t: &MeasTree, f: &BranchFactorization, rho: &DensityOperator) -> Result<f64> {
    let (order, _, _) = output_split(t)?;
    let c = cumulative_operator(t, &f.branch)?.matrix;
    let full = t.layout().full_input(rho)?;
    let out = &(&c * full.matrix()) * &c.adjoint();
    let (out, _) = permute_matrix(&out, &t.space()?, &order)?;
    let u = &f.principal_operator;
    let b = f.ancilla_vector.vector();
    let expected = (&(u * rho.matrix()) * &u.adjoint()).kron(&ComplexMatrix::outer(b, b));
    Ok(out.distance(&expected))
}

/// A vector `c` with `Λx = Lx ⊗ c` on every probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantFactor {
    pub factor: Vec<C64>,
    /// Largest `‖Λy − Ly ⊗ c‖` over unit probes.
    pub residual: f64,
}

/// Decides whether `Λ: V₁ → V₂⊗V₃` equals `L ⊗ c` for one fixed `c ∈ V₃`,
/// given `L: V₁ → V₂` of rank at least two. `c` is read off the basis vector
/// with the largest image under `L` and checked on the basis and all
/// pairwise superpositions.
pub fn factor_constant(lambda: &ComplexMatrix, l: &ComplexMatrix) -> Result<Option<ConstantFactor>> {
    let tol = Tolerances::current();
    let (d1, d2) = (l.cols(), l.rows());
    if lambda.cols() != d1 {
        return Err(Error::DimensionMismatch {
            context: "constant factor domain",
            expected: d1,
            found: lambda.cols(),
        });
    }
    if !lambda.rows().is_multiple_of(d2) || lambda.rows() == 0 {
        return Err(Error::DimensionMismatch {
            context: "constant factor codomain",
            expected: d2,
            found: lambda.rows(),
        });
    }
    let d3 = lambda.rows() / d2;
    let rank = l.rank(tol.rank);
    if rank < 2 {
        return Err(Error::RankTooLow(rank));
    }

    let probes = structured_probes(d1);
    let k = (0..d1)
        .max_by(|&a, &b| vec_norm(&l.apply(&probes[a])).total_cmp(&vec_norm(&l.apply(&probes[b]))))
        .expect("nonempty domain");
    let lx = l.apply(&probes[k]);
    let image = lambda.apply(&probes[k]);
    let lx_sq: f64 = lx.iter().map(|z| z.norm_sqr()).sum();
    let factor: Vec<C64> = (0..d3)
        .map(|g| (0..d2).map(|r| lx[r].conj() * image[r * d3 + g]).sum::<C64>() / lx_sq)
        .collect();

    let scale = lambda.frobenius_norm().max(1.0);
    let mut residual = 0.0f64;
    for y in &probes {
        let want = kron_vec(&l.apply(y), &factor);
        let got = lambda.apply(y);
        let diff: Vec<C64> = got.iter().zip(&want).map(|(a, b)| a - b).collect();
        residual = residual.max(vec_norm(&diff));
    }
    Ok((residual <= tol.fact * scale).then_some(ConstantFactor { factor, residual }))
}
