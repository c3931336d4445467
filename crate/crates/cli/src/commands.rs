use std::fs;
use std::path::{Path as FsPath, PathBuf};

use serde_json::{json, Value};

use meastree::analysis::{
    check_computes, check_independence, check_isometry_scaling, factor_branch, FactorKind, Verdict,
};
use meastree::circuit_ir::{demos, enumerate_paths, simulate_path_full, validate_circuit, Circuit, Path};
use meastree::qlin::{partial_trace_matrix, permute_matrix, ComplexMatrix, PostState};
use meastree::reduce::{reduce_circuit, MeasTree, Reduction};
use meastree::tree_exec::run_tree;
use meastree::Error;

use crate::io::{load_circuit, load_full_state, load_matrix, load_tree};
use crate::table::{num, render};
use crate::{Command, Format, PathSelect, Source};

pub const EXIT_MALFORMED: u8 = 1;
pub const EXIT_VIOLATIONS: u8 = 2;
pub const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn malformed(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_MALFORMED,
            message: message.into(),
        }
    }

    pub fn malformed_lib(e: Error) -> Self {
        CliError::malformed(e.to_string())
    }

    /// Invalid circuits map to the violation exit code, everything else to
    /// malformed input.
    pub fn from_lib(e: Error) -> Self {
        match e {
            Error::InvalidCircuit(ref v) => CliError {
                code: EXIT_VIOLATIONS,
                message: format!(
                    "{e}\n{}",
                    v.iter().map(|x| format!("  {}: {}", x.code, x.message)).collect::<Vec<_>>().join("\n")
                ),
            },
            other => CliError::malformed(other.to_string()),
        }
    }
}

pub struct Output {
    pub text: String,
    pub code: u8,
}

type CliResult<T> = Result<T, CliError>;

fn emit(format: Format, json: Value, table: impl FnOnce() -> String, code: u8) -> CliResult<Output> {
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&json).expect("json") + "\n",
        Format::Table => table(),
    };
    Ok(Output { text, code })
}

pub fn run(cmd: Command, format: Format) -> CliResult<Output> {
    match cmd {
        Command::Validate { file } => validate(&file, format),
        Command::Paths { file } => paths(&file, format),
        Command::Simulate { source, input } => simulate(&source, &input, format),
        Command::Reduce { file } => reduce(&file, format),
        Command::Tree { source, dot } => tree(&source, dot, format),
        Command::CheckIndependence {
            circuit,
            select,
            probes,
            seed,
        } => independence(&circuit, &select, probes, seed, format),
        Command::CheckUnitary {
            circuit,
            unitary,
            select,
            probes,
            seed,
        } => computes(&circuit, &unitary, &select, probes, seed, format),
        Command::Factor { circuit, path } => factor(&circuit, &path, format),
        Command::Demo { name, emit, out } => demo(name.as_deref(), emit, &out, format),
    }
}

fn valid_circuit(file: &FsPath) -> CliResult<Circuit> {
    let c = load_circuit(file)?;
    let violations = validate_circuit(&c);
    if violations.is_empty() {
        Ok(c)
    } else {
        Err(CliError::from_lib(Error::InvalidCircuit(violations)))
    }
}

fn validate(file: &FsPath, format: Format) -> CliResult<Output> {
    let c = load_circuit(file)?;
    let violations = validate_circuit(&c);
    let code = if violations.is_empty() { 0 } else { EXIT_VIOLATIONS };
    let rows: Vec<Vec<String>> = violations
        .iter()
        .map(|v| vec![v.code.to_string(), v.gates.join(","), v.message.clone()])
        .collect();
    emit(
        format,
        json!({ "valid": violations.is_empty(), "violations": violations }),
        || {
            if rows.is_empty() {
                "valid\n".to_string()
            } else {
                render(&["code", "gates", "message"], &rows)
            }
        },
        code,
    )
}

fn paths(file: &FsPath, format: Format) -> CliResult<Output> {
    let c = valid_circuit(file)?;
    let ps = enumerate_paths(&c).map_err(CliError::from_lib)?;
    let rows: Vec<Vec<String>> = ps.iter().enumerate().map(|(i, p)| vec![i.to_string(), p.to_string()]).collect();
    emit(format, json!(ps), || render(&["#", "path"], &rows), 0)
}

fn output_json(state: &PostState) -> Value {
    json!(state.matrix())
}

/// The output traced down to the output wires, in their listed order.
fn reduced_output(state: &PostState, wires: &[String]) -> CliResult<ComplexMatrix> {
    let (m, space) = partial_trace_matrix(&state.matrix(), state.dims(), wires).map_err(CliError::from_lib)?;
    Ok(permute_matrix(&m, &space, wires).map_err(CliError::from_lib)?.0)
}

fn simulate(source: &Source, input: &FsPath, format: Format) -> CliResult<Output> {
    let mut rows = Vec::new();
    let mut items = Vec::new();
    if let Some(file) = &source.circuit {
        let c = valid_circuit(file)?;
        let sigma = load_full_state(input, &c.layout)?;
        let out_wires = c.layout.has_roles().then(|| c.layout.output_wires());
        for mu in enumerate_paths(&c).map_err(CliError::from_lib)? {
            let run = simulate_path_full(&c, &mu, &sigma).map_err(CliError::from_lib)?;
            let principal = out_wires.as_ref().map(|w| reduced_output(&run.output, w)).transpose()?;
            rows.push(vec![mu.to_string(), num(run.probability), num(run.output.trace())]);
            items.push(json!({
                "path": mu,
                "probability": run.probability,
                "output_trace": run.output.trace(),
                "output": output_json(&run.output),
                "principal_output": principal,
            }));
        }
    } else {
        let t = load_tree(source.tree.as_deref().expect("clap group"))?;
        let sigma = load_full_state(input, t.layout())?;
        let out_wires = t.layout().has_roles().then(|| t.layout().output_wires());
        for run in run_tree(&t, &sigma).map_err(CliError::from_lib)? {
            let principal = out_wires.as_ref().map(|w| reduced_output(&run.output, w)).transpose()?;
            rows.push(vec![run.branch.to_string(), num(run.probability), num(run.output.trace())]);
            items.push(json!({
                "branch": run.branch,
                "probability": run.probability,
                "output_trace": run.output.trace(),
                "output": output_json(&run.output),
                "principal_output": principal,
            }));
        }
    }
    let header = if source.circuit.is_some() { "path" } else { "branch" };
    emit(format, json!(items), || render(&[header, "probability", "output trace"], &rows), 0)
}

fn reduce(file: &FsPath, format: Format) -> CliResult<Output> {
    let c = valid_circuit(file)?;
    let r = reduce_circuit(&c).map_err(CliError::from_lib)?;
    let rows: Vec<Vec<String>> = r.map.iter().map(|(p, b)| vec![b.to_string(), p.to_string()]).collect();
    emit(
        format,
        serde_json::to_value(&r.tree).expect("tree json"),
        || render(&["branch", "path"], &rows),
        0,
    )
}

fn load_any_tree(source: &Source) -> CliResult<MeasTree> {
    match (&source.circuit, &source.tree) {
        (Some(file), _) => Ok(reduce_circuit(&valid_circuit(file)?).map_err(CliError::from_lib)?.tree),
        (None, Some(file)) => load_tree(file),
        (None, None) => unreachable!("clap group"),
    }
}

fn tree(source: &Source, dot: bool, format: Format) -> CliResult<Output> {
    let t = load_any_tree(source)?;
    if dot {
        return Ok(Output {
            text: t.to_dot(),
            code: 0,
        });
    }
    let branches = t.branches();
    let rows: Vec<Vec<String>> = branches.iter().map(|b| vec![b.to_string(), b.len().to_string()]).collect();
    emit(
        format,
        json!({
            "root": t.root(),
            "nodes": t.nodes().len(),
            "depth": t.depth(),
            "branches": branches,
        }),
        || {
            format!(
                "nodes: {}\ndepth: {}\n",
                t.nodes().len(),
                t.depth()
            ) + &render(&["branch", "length"], &rows)
        },
        0,
    )
}

/// Reduces the circuit and picks the selected paths with their branches.
fn selected(file: &FsPath, path: Option<&str>) -> CliResult<(Reduction, Vec<Path>)> {
    let c = valid_circuit(file)?;
    let r = reduce_circuit(&c).map_err(CliError::from_lib)?;
    let all: Vec<Path> = enumerate_paths(&c).map_err(CliError::from_lib)?;
    let Some(spec) = path else {
        return Ok((r, all));
    };
    let partial = Path::parse(spec).map_err(CliError::malformed_lib)?;
    let hits: Vec<Path> = all.into_iter().filter(|p| partial.matches(p)).collect();
    match hits.len() {
        1 => Ok((r, hits)),
        0 => Err(CliError::malformed(format!("no path matches `{spec}`"))),
        n => Err(CliError::malformed(format!("`{spec}` matches {n} paths; give more outcomes"))),
    }
}

fn select_path(select: &PathSelect) -> Option<&str> {
    if select.all_paths {
        None
    } else {
        select.path.as_deref()
    }
}

fn independence(file: &FsPath, select: &PathSelect, probes: usize, seed: u64, format: Format) -> CliResult<Output> {
    let (r, paths) = selected(file, select_path(select))?;
    let mut items = Vec::new();
    let mut rows = Vec::new();
    let mut ok = true;
    for mu in &paths {
        let b = r.map.branch(mu).expect("bijection");
        let rep = check_independence(&r.tree, b, probes, seed).map_err(CliError::from_lib)?;
        ok &= rep.verdict == Verdict::Independent && rep.factor_consistent != Some(false);
        rows.push(vec![
            mu.to_string(),
            num(rep.min_prob),
            num(rep.max_prob),
            format!("{:.3e}", rep.max_deviation),
            json!(rep.verdict).as_str().unwrap_or_default().to_string(),
        ]);
        let mut v = serde_json::to_value(&rep).expect("report json");
        v["path"] = json!(mu);
        items.push(v);
    }
    emit(
        format,
        json!(items),
        || render(&["path", "min", "max", "deviation", "verdict"], &rows),
        if ok { 0 } else { EXIT_CHECK_FAILED },
    )
}

fn computes(
    file: &FsPath,
    unitary: &FsPath,
    select: &PathSelect,
    probes: usize,
    seed: u64,
    format: Format,
) -> CliResult<Output> {
    let u = load_matrix(unitary)?;
    let (r, paths) = selected(file, select_path(select))?;
    let mut items = Vec::new();
    let mut rows = Vec::new();
    let mut ok = true;
    for mu in &paths {
        let b = r.map.branch(mu).expect("bijection");
        let rep = check_computes(&r.tree, b, &u, probes, seed).map_err(CliError::from_lib)?;
        ok &= rep.holds;
        rows.push(vec![mu.to_string(), rep.holds.to_string(), format!("{:.3e}", rep.max_residual)]);
        let mut v = serde_json::to_value(&rep).expect("report json");
        v["path"] = json!(mu);
        items.push(v);
    }
    let mut out = json!({ "paths": items });
    let mut scaling_line = String::new();
    if select.all_paths {
        let s = check_isometry_scaling(&r.tree, &u).map_err(CliError::from_lib)?;
        ok &= s.isometry;
        scaling_line = format!(
            "t_scale: {}\nverdict: {}\n",
            s.t_scale.map(num).unwrap_or_else(|| "-".into()),
            json!(s.verdict).as_str().unwrap_or_default()
        );
        out["isometry_scaling"] = serde_json::to_value(&s).expect("report json");
    }
    emit(
        format,
        out,
        || render(&["path", "computes", "residual"], &rows) + &scaling_line,
        if ok { 0 } else { EXIT_CHECK_FAILED },
    )
}

fn factor(file: &FsPath, path: &str, format: Format) -> CliResult<Output> {
    let (r, paths) = selected(file, Some(path))?;
    let mu = &paths[0];
    let b = r.map.branch(mu).expect("bijection");
    let f = factor_branch(&r.tree, b).map_err(CliError::from_lib)?;
    let kind = match f.as_ref().map(|f| f.kind) {
        Some(FactorKind::Unitary) => "unitary",
        Some(FactorKind::IsometryOnly) => "isometry-only",
        None => "none",
    };
    let json = match &f {
        Some(f) => json!({
            "path": mu,
            "branch": b,
            "kind": kind,
            "U": f.principal_operator,
            "b": f.ancilla_vector.vector().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "b_norm_sq": f.probability,
            "residual": f.residual,
        }),
        None => json!({ "path": mu, "branch": b, "kind": kind }),
    };
    let table = || {
        let mut rows = vec![vec!["path".to_string(), mu.to_string()], vec!["kind".into(), kind.into()]];
        if let Some(f) = &f {
            rows.push(vec!["|b|^2".into(), num(f.probability)]);
            rows.push(vec!["residual".into(), format!("{:.3e}", f.residual)]);
        }
        render(&["field", "value"], &rows)
    };
    emit(format, json, table, if f.is_some() { 0 } else { EXIT_CHECK_FAILED })
}

fn demo(name: Option<&str>, write: bool, out: &FsPath, format: Format) -> CliResult<Output> {
    let Some(name) = name else {
        let rows: Vec<Vec<String>> = demos::NAMES.iter().map(|n| vec![n.to_string()]).collect();
        return emit(format, json!(demos::NAMES), || render(&["demo"], &rows), 0);
    };
    let c = demos::by_name(name)
        .ok_or_else(|| CliError::malformed(format!("unknown demo `{name}`; known: {}", demos::NAMES.join(", "))))?;
    let text = c.to_json() + "\n";
    if !write {
        return Ok(Output { text, code: 0 });
    }
    let target: PathBuf = out.join(format!("{name}.json"));
    fs::write(&target, text).map_err(|e| CliError::malformed(format!("{}: {e}", target.display())))?;
    emit(format, json!({ "written": target }), || format!("wrote {}\n", target.display()), 0)
}
