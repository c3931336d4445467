//! Acceptance suite: one line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use meastree::analysis::{
    check_computes, check_independence, check_isometry_scaling, check_set_independence, factor_branch,
    factor_constant, factorization_residual, structured_probes, FactorKind, ScalingVerdict, Verdict,
};
use meastree::circuit_ir::random::{random_circuit, RandomCircuitParams};
use meastree::circuit_ir::{demos, enumerate_paths, simulate_path, FullInput, Layout, Wire};
use meastree::qlin::random::{gaussian, haar_ket, random_density, random_isometry};
use meastree::qlin::{ComplexMatrix, DensityOperator, HilbertSpec, Ket, Measurement, C64};
use meastree::reduce::{reduce_circuit, MeasTree, Route};
use meastree::tree_exec::{aggregate_measurement, attainable, branch_output, branch_probability, cumulative_operator, run_tree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn principal_state<R: Rng>(layout: &Layout, pure: bool, rng: &mut R) -> DensityOperator {
    let dims = layout.principal_space().expect("roles");
    let d = dims.total_dim();
    let m = if pure {
        Ket::new(haar_ket(d, rng), dims.clone()).unwrap().to_density().unwrap().into_matrix()
    } else {
        random_density(d, rng.random_range(1..=d), rng)
    };
    DensityOperator::new(m, dims).unwrap()
}

fn desk_params(parallel: bool, channel: bool) -> RandomCircuitParams {
    RandomCircuitParams {
        max_principal: 2,
        max_ancilla: 1,
        max_gates: 5,
        max_bouts: 4,
        max_outcomes: 3,
        require_parallel: parallel,
        require_channel: channel,
    }
}

fn completeness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst = 0.0f64;
    for k in 0..200 {
        let c = random_circuit(&mut rng, &desk_params(k % 2 == 0, k % 3 == 0));
        let tree = reduce_circuit(&c).map_err(|e| e.to_string())?.tree;
        let dim = tree.space().unwrap().total_dim();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for beta in tree.branches() {
            let cb = cumulative_operator(&tree, &beta).unwrap().matrix;
            sum = &sum + &(&cb.adjoint() * &cb);
        }
        let r = sum.distance_to_identity();
        worst = worst.max(r);
        ensure(r <= 1e-9, || format!("circuit {k}: residual {r:e}"))?;
    }
    Ok(format!("200 circuits, max ‖ΣC†C − I‖ = {worst:.2e}"))
}

fn reduction_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let (mut dp, mut dout) = (0.0f64, 0.0f64);
    let mut checked = 0usize;
    for k in 0..100 {
        let c = random_circuit(&mut rng, &desk_params(true, true));
        ensure(c.schedule.iter().any(|b| b.len() > 1), || format!("circuit {k} has no parallel bout"))?;
        ensure(c.gates.iter().any(|g| !g.classical_sources.is_empty()), || format!("circuit {k} has no channel"))?;
        let r = reduce_circuit(&c).map_err(|e| e.to_string())?;
        let paths = enumerate_paths(&c).unwrap();
        ensure(paths.len() == r.tree.branches().len(), || format!("circuit {k}: path/branch count"))?;
        for i in 0..5 {
            let rho = principal_state(&c.layout, i % 2 == 0, &mut rng);
            let full = c.layout.full_input(&rho).unwrap();
            let runs = run_tree(&r.tree, &full).unwrap();
            for mu in &paths {
                let oracle = simulate_path(&c, mu, &FullInput::new(rho.clone())).unwrap();
                let beta = r.map.branch(mu).ok_or("unmapped path")?;
                let run = runs.iter().find(|x| &x.branch == beta).ok_or("branch not run")?;
                let closed = branch_probability(&r.tree, beta, &full).unwrap();
                let p_err = (oracle.probability - run.probability).abs().max((oracle.probability - closed).abs());
                let o_err = oracle.output.matrix().distance(&run.output.matrix());
                dp = dp.max(p_err);
                dout = dout.max(o_err);
                ensure(p_err <= 1e-10 && o_err <= 1e-10, || {
                    format!("circuit {k}, path {mu}: probability error {p_err:e}, output error {o_err:e}")
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} path/input pairs, max probability error {dp:.2e}, max output error {dout:.2e}"))
}

fn teleportation_independence() -> Outcome {
    let c = demos::teleportation();
    let paths = enumerate_paths(&c).unwrap();
    ensure(paths.len() == 4, || format!("{} paths", paths.len()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    let mut worst = 0.0f64;
    for i in 0..120 {
        let rho = principal_state(&c.layout, i < 100, &mut rng);
        for mu in &paths {
            let p = simulate_path(&c, mu, &FullInput::new(rho.clone())).unwrap().probability;
            worst = worst.max((p - 0.25).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("probability off by {worst:e}"))?;
    let r = reduce_circuit(&c).unwrap();
    let mut worst_res = 0.0f64;
    for beta in r.tree.branches() {
        let f = factor_branch(&r.tree, &beta).unwrap().ok_or_else(|| format!("branch {beta} does not factor"))?;
        let u = &f.principal_operator;
        let phase = u[(0, 0)];
        let off = u.distance(&ComplexMatrix::identity(2).scale(phase));
        ensure((phase.norm() - 1.0).abs() <= 1e-8 && off <= 1e-8, || format!("branch {beta}: U is not a phase"))?;
        ensure(f.residual <= 1e-8, || format!("branch {beta}: residual {:e}", f.residual))?;
        ensure((f.probability - 0.25).abs() <= 1e-9, || format!("branch {beta}: ‖b‖² = {}", f.probability))?;
        worst_res = worst_res.max(f.residual);
    }
    Ok(format!(
        "120 inputs × 4 paths, max |P − 0.25| = {worst:.2e}; U = phase·I, max residual {worst_res:.2e}"
    ))
}

fn teleportation_sets() -> Outcome {
    let r = reduce_circuit(&demos::teleportation()).unwrap();
    let branches = r.tree.branches();
    let check = |set: &[Route], want: f64| -> Result<(), String> {
        let rep = check_set_independence(&r.tree, set, 50, 4004).map_err(|e| e.to_string())?;
        let constant = rep.constant.ok_or("a branch does not factor")?;
        ensure(
            rep.verdict == Verdict::Independent
                && (constant - want).abs() <= 1e-9
                && (rep.min_total - want).abs() <= 1e-9
                && (rep.max_total - want).abs() <= 1e-9,
            || format!("set {set:?}: constant {constant}, totals [{}, {}]", rep.min_total, rep.max_total),
        )
    };
    check(&branches, 1.0)?;
    let mut pairs = 0;
    for i in 0..branches.len() {
        for j in i + 1..branches.len() {
            check(&[branches[i].clone(), branches[j].clone()], 0.5)?;
            pairs += 1;
        }
    }
    Ok(format!("all four branches → 1.0, {pairs} pairs → 0.5"))
}

fn negative_control() -> Outcome {
    let r = reduce_circuit(&demos::bare_mz()).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let probes = structured_probes(2);
    let zero = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let plus = [C64::new(s, 0.0), C64::new(s, 0.0)];
    ensure(probes.iter().any(|p| p == &zero) && probes.iter().any(|p| p == &plus), || {
        "probe set lacks |0⟩ or |+⟩".into()
    })?;
    let beta = Route::new(["0"]);
    let rep = check_independence(&r.tree, &beta, 20, 5005).unwrap();
    ensure(rep.verdict == Verdict::Dependent, || format!("verdict {:?}", rep.verdict))?;
    ensure(rep.max_deviation >= 0.3, || format!("deviation {}", rep.max_deviation))?;
    ensure(factor_branch(&r.tree, &beta).unwrap().is_none(), || "factorization found".into())?;
    Ok(format!("dependent, max deviation {:.3}, no factorization", rep.max_deviation))
}

fn constant_factor() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6006);
    let mut worst = 0.0f64;
    let mut found = 0;
    while found < 100 {
        let (d1, d2, d3) = (rng.random_range(2..=6), rng.random_range(2..=6), rng.random_range(1..=4));
        let l = ComplexMatrix::from_fn(d2, d1, |_, _| gaussian(&mut rng));
        if l.rank(1e-8) < 2 {
            continue;
        }
        let c0: Vec<C64> = (0..d3).map(|_| gaussian(&mut rng)).collect();
        let lambda = l.kron(&ComplexMatrix::column(&c0));
        let got = factor_constant(&lambda, &l).map_err(|e| e.to_string())?.ok_or("planted factor rejected")?;
        let err = got.factor.iter().zip(&c0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        ensure(got.residual <= 1e-9 && err <= 1e-9, || {
            format!("residual {:e}, factor error {err:e}", got.residual)
        })?;
        worst = worst.max(got.residual);
        found += 1;
    }
    for k in 0..20 {
        let (d1, d2, d3) = (rng.random_range(2..=6), rng.random_range(2..=6), rng.random_range(2..=4));
        let l = random_isometry(d2.max(d1), d1, &mut rng);
        let fs: Vec<Vec<C64>> = (0..d1).map(|_| (0..d3).map(|_| gaussian(&mut rng)).collect()).collect();
        let lambda = ComplexMatrix::from_fn(l.rows() * d3, d1, |row, j| l[(row / d3, j)] * fs[j][row % d3]);
        ensure(factor_constant(&lambda, &l).map_err(|e| e.to_string())?.is_none(), || {
            format!("counterexample {k} accepted")
        })?;
    }
    Ok(format!("100 planted factors recovered (max residual {worst:.2e}), 20 counterexamples rejected"))
}

fn isometry_results() -> Outcome {
    let split = reduce_circuit(&demos::split_identity()).unwrap();
    for beta in split.tree.branches() {
        let f = factor_branch(&split.tree, &beta).unwrap().ok_or("split branch does not factor")?;
        ensure((f.probability - 0.5).abs() <= 1e-9, || format!("‖b‖² = {}", f.probability))?;
    }
    let half = ComplexMatrix::identity(2).scale_real(std::f64::consts::FRAC_1_SQRT_2);
    let rep = check_isometry_scaling(&split.tree, &half).unwrap();
    let t = rep.t_scale.ok_or("no scale")?;
    ensure((t - 2f64.sqrt()).abs() <= 1e-9 && rep.verdict == ScalingVerdict::Confirmed, || {
        format!("t = {t}, verdict {:?}", rep.verdict)
    })?;

    let c = demos::isometry_embed();
    let r = reduce_circuit(&c).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7007);
    let mut u_ref = None;
    for beta in r.tree.branches() {
        let f = factor_branch(&r.tree, &beta).unwrap().ok_or("encoding branch does not factor")?;
        ensure(f.kind == FactorKind::IsometryOnly, || format!("kind {:?}", f.kind))?;
        let ind = check_independence(&r.tree, &beta, 50, 7007).unwrap();
        ensure(ind.verdict == Verdict::Independent && ind.factor_consistent == Some(true), || {
            format!("branch {beta}: {:?}", ind.verdict)
        })?;
        let comp = check_computes(&r.tree, &beta, &f.principal_operator, 50, 7007).unwrap();
        ensure(comp.holds, || format!("branch {beta} does not compute its factor"))?;
        for i in 0..50 {
            let rho = principal_state(&c.layout, i % 5 == 0, &mut rng);
            let res = factorization_residual(&r.tree, &f, &rho).unwrap();
            ensure(res <= 1e-8, || format!("branch {beta}: mixed residual {res:e}"))?;
            let full = c.layout.full_input(&rho).unwrap();
            ensure(attainable(&r.tree, &beta, &full).unwrap(), || format!("branch {beta} unattainable"))?;
        }
        u_ref.get_or_insert(f.principal_operator);
    }
    let scaling = check_isometry_scaling(&r.tree, &u_ref.unwrap()).unwrap();
    ensure(scaling.verdict == ScalingVerdict::Confirmed, || "encoding scale not confirmed".into())?;
    Ok(format!("split t = {t:.12}; encoding: isometry-only on both branches, t = {:.12}", scaling.t_scale.unwrap()))
}

fn closed_form_and_zero() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8008);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let c = random_circuit(&mut rng, &desk_params(k % 2 == 1, k % 4 == 1));
        let tree = reduce_circuit(&c).unwrap().tree;
        let rho = principal_state(&c.layout, k % 3 == 0, &mut rng);
        let full = c.layout.full_input(&rho).unwrap();
        for run in run_tree(&tree, &full).unwrap() {
            let p = branch_probability(&tree, &run.branch, &full).unwrap();
            let err = (p - run.probability).abs();
            worst = worst.max(err);
            ensure(err <= 1e-10, || format!("pair {k}, branch {}: error {err:e}", run.branch))?;
        }
    }

    // Orthogonal projector cases: {P, I − P} onto a random subspace, stacked,
    // on states inside the range of P or of I − P.
    let zero = meastree::Tolerances::current().zero;
    let mut cases = 0;
    for dim in [2usize, 3, 4] {
        let layout = Layout::new(vec![Wire::principal("q", dim)], vec![C64::new(1.0, 0.0)]);
        let v = random_isometry(dim, 1, &mut rng);
        let col: Vec<C64> = (0..dim).map(|i| v[(i, 0)]).collect();
        let p = ComplexMatrix::outer(&col, &col);
        let q = &ComplexMatrix::identity(dim) - &p;
        let m = Measurement::from_pairs([("in", p.clone()), ("out", q.clone())]).unwrap();
        let tree = MeasTree::stacked(layout, &[m.clone(), m]).unwrap();
        let dims = HilbertSpec::new([("q", dim)]).unwrap();
        let inside = DensityOperator::new(p.scale_real(1.7), dims.clone()).unwrap();
        let outside = DensityOperator::new(q.clone(), dims).unwrap();
        for (state, live) in [(&inside, Route::new(["in", "in"])), (&outside, Route::new(["out", "out"]))] {
            for beta in tree.branches() {
                let prob = branch_probability(&tree, &beta, state).unwrap();
                let out = branch_output(&tree, &beta, state).unwrap();
                let norm = out.matrix().frobenius_norm();
                let prob_zero = prob <= zero;
                let out_zero = norm <= zero * state.trace();
                ensure(prob_zero == out_zero, || format!("dim {dim}, branch {beta}: p = {prob:e}, ‖out‖ = {norm:e}"))?;
                ensure(prob_zero == (beta != live), || format!("dim {dim}, branch {beta}: unexpected p = {prob:e}"))?;
                ensure(attainable(&tree, &beta, state).unwrap() == !prob_zero, || "attainable disagrees".into())?;
                cases += 1;
            }
        }
        ensure(aggregate_measurement(&tree).unwrap().completeness_residual() <= 1e-9, || "aggregate".into())?;
    }
    Ok(format!("100 pairs, max error {worst:.2e}; {cases} projector cases consistent"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 aggregate completeness on random circuits", completeness),
        ("2 circuit and tree agree path by path", reduction_equivalence),
        ("3 teleportation probabilities and factorization", teleportation_independence),
        ("4 teleportation branch sets", teleportation_sets),
        ("5 bare measurement is input dependent", negative_control),
        ("6 constant factor recovery", constant_factor),
        ("7 isometry scaling and encoding", isometry_results),
        ("8 closed-form probabilities and zero dichotomy", closed_form_and_zero),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({secs:.2}s)"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why} ({secs:.2}s)");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
