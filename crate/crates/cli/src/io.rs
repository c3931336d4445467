use std::fs;
use std::path::Path as FsPath;

use serde::Deserialize;

use meastree::circuit_ir::{Circuit, Layout};
use meastree::qlin::{complex_vec, ComplexMatrix, DensityOperator, HilbertSpec, Ket, C64};
use meastree::reduce::MeasTree;

use crate::commands::CliError;

fn read(path: &FsPath) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::malformed(format!("{}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(path: &FsPath, what: &str) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::malformed(format!("{}: not a valid {what}: {e}", path.display())))
}

pub fn load_circuit(path: &FsPath) -> Result<Circuit, CliError> {
    parse(path, "circuit")
}

pub fn load_tree(path: &FsPath) -> Result<MeasTree, CliError> {
    parse(path, "measurement tree")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    Bare(ComplexMatrix),
    Wrapped { matrix: ComplexMatrix },
}

pub fn load_matrix(path: &FsPath) -> Result<ComplexMatrix, CliError> {
    Ok(match parse::<MatrixFile>(path, "matrix")? {
        MatrixFile::Bare(m) | MatrixFile::Wrapped { matrix: m } => m,
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StateFile {
    Density { density: ComplexMatrix },
    Ket {
        #[serde(with = "complex_vec")]
        ket: Vec<C64>,
    },
    Bare(ComplexMatrix),
}

/// Reads a state and places it on the layout's full space: a state on the
/// principal wires is tensored with the ancilla state, one on all wires is
/// taken as is.
pub fn load_full_state(path: &FsPath, layout: &Layout) -> Result<DensityOperator, CliError> {
    let matrix = match parse::<StateFile>(path, "state")? {
        StateFile::Density { density } | StateFile::Bare(density) => density,
        StateFile::Ket { ket } => {
            let dims = HilbertSpec::new([("state", ket.len())]).map_err(CliError::from_lib)?;
            Ket::new(ket, dims).and_then(|k| k.to_density()).map_err(CliError::from_lib)?.into_matrix()
        }
    };
    let full = layout.space().map_err(CliError::from_lib)?;
    let n = matrix.rows();
    if n == full.total_dim() {
        return DensityOperator::new(matrix, full).map_err(CliError::malformed_lib);
    }
    if layout.has_roles() {
        let principal = layout.principal_space().map_err(CliError::from_lib)?;
        if n == principal.total_dim() {
            let rho = DensityOperator::new(matrix, principal).map_err(CliError::malformed_lib)?;
            return layout.full_input(&rho).map_err(CliError::from_lib);
        }
    }
    Err(CliError::malformed(format!(
        "{}: state has dimension {n}, expected the principal or full dimension",
        path.display()
    )))
}
