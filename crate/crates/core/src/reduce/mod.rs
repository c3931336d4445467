//! Lowering of circuits to measurement trees: bout merging into a linear
//! circuit, then one tree node per coherent initial outcome segment.

mod linearize;
mod tree;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit_ir::{Circuit, Path};
use crate::Result;

pub use linearize::{linearize, Linearization};
pub use tree::{tree_of_linear, MeasTree, TreeNode, ROOT_ID};

/// A sequence of outcome labels read from the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Route(pub Vec<String>);

/// A route ending at a leaf.
pub type Branch = Route;

/// Separator used by [`Route`]'s display form.
pub const ROUTE_SEPARATOR: char = '/';

impl Route {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        Route(labels.into_iter().map(Into::into).collect())
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses the display form; the empty string is the empty route.
    pub fn parse(s: &str) -> Route {
        if s.is_empty() {
            Route::default()
        } else {
            Route::new(s.split(ROUTE_SEPARATOR))
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(&ROUTE_SEPARATOR.to_string()))
    }
}

/// Mutually inverse maps between circuit paths and tree branches.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathBranchMap {
    forward: BTreeMap<Path, Branch>,
    backward: BTreeMap<Branch, Path>,
}

impl PathBranchMap {
    /// Builds the map from pairs; `None` if either side repeats.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Path, Branch)>) -> Option<Self> {
        let mut m = PathBranchMap::default();
        for (p, b) in pairs {
            if m.forward.insert(p.clone(), b.clone()).is_some() || m.backward.insert(b, p).is_some() {
                return None;
            }
        }
        Some(m)
    }

    pub fn branch(&self, path: &Path) -> Option<&Branch> {
        self.forward.get(path)
    }

    pub fn path(&self, branch: &Branch) -> Option<&Path> {
        self.backward.get(branch)
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// Pairs ordered by path.
    pub fn iter(&self) -> impl Iterator<Item = (&Path, &Branch)> {
        self.forward.iter()
    }

    /// Composes with a path map `μ ↦ μ′` whose targets are this map's paths.
    fn pull_back(&self, paths: &BTreeMap<Path, Path>) -> Option<PathBranchMap> {
        PathBranchMap::from_pairs(
            paths
                .iter()
                .map(|(mu, mu2)| self.branch(mu2).map(|b| (mu.clone(), b.clone())))
                .collect::<Option<Vec<_>>>()?,
        )
    }
}

/// Output of [`reduce_circuit`].
#[derive(Debug, Clone)]
pub struct Reduction {
    pub tree: MeasTree,
    /// Original circuit paths to tree branches.
    pub map: PathBranchMap,
    pub linearized: Linearization,
}

/// Linearizes `c` and builds its tree; paths of `c` map to branches.
pub fn reduce_circuit(c: &Circuit) -> Result<Reduction> {
    let linearized = linearize(c)?;
    let (tree, linear_map) = tree_of_linear(&linearized.circuit)?;
    let map = linear_map
        .pull_back(&linearized.forward)
        .expect("linearization and tree construction are bijective");
    Ok(Reduction { tree, map, linearized })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit_ir::{demos, enumerate_paths};

    #[test]
    fn route_display_round_trip() {
        let r = Route::new(["0", "1|x"]);
        assert_eq!(r.to_string(), "0/1|x");
        assert_eq!(Route::parse(&r.to_string()), r);
        assert_eq!(Route::parse(""), Route::default());
    }

    #[test]
    fn map_rejects_collisions() {
        let p = Path::new([("g", "0")]);
        let q = Path::new([("g", "1")]);
        let b = Route::new(["0"]);
        assert!(PathBranchMap::from_pairs([(p.clone(), b.clone()), (q, b.clone())]).is_none());
        let m = PathBranchMap::from_pairs([(p.clone(), b.clone())]).unwrap();
        assert_eq!(m.path(&b), Some(&p));
    }

    #[test]
    fn teleportation_reduces_to_four_branches() {
        let c = demos::teleportation();
        let r = reduce_circuit(&c).unwrap();
        assert_eq!(r.tree.branches().len(), 4);
        for mu in enumerate_paths(&c).unwrap() {
            let b = r.map.branch(&mu).unwrap();
            assert_eq!(r.map.path(b), Some(&mu));
            assert!(r.tree.is_branch(b));
        }
    }

    #[test]
    fn single_measurement_sits_at_root() {
        let c = demos::bare_mz();
        let r = reduce_circuit(&c).unwrap();
        let root = r.tree.node(r.tree.root()).unwrap();
        assert_eq!(root.measurement.as_ref(), Some(&c.gates[0].measurements[0]));
        assert_eq!(r.tree.branches(), vec![Route::new(["0"]), Route::new(["1"])]);
    }
}
