use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{Branch, PathBranchMap, Route};
use crate::circuit_ir::{validate_circuit, Circuit, Layout, Path};
use crate::qlin::{HilbertSpec, Measurement};
use crate::{Error, Result};

/// Id of the root node of trees built by [`tree_of_linear`].
pub const ROOT_ID: &str = "root";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Measurement on the full space; absent exactly at leaves.
    pub measurement: Option<Measurement>,
    /// Outcome label to child node id, in outcome order.
    #[serde(default)]
    pub children: IndexMap<String, String>,
}

impl TreeNode {
    pub fn leaf() -> Self {
        TreeNode {
            measurement: None,
            children: IndexMap::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.measurement.is_none()
    }
}

/// A rooted tree with a full-space measurement at each internal node and
/// edges labeled by that measurement's outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeRepr", into = "TreeRepr")]
pub struct MeasTree {
    layout: Layout,
    root: String,
    nodes: BTreeMap<String, TreeNode>,
}

#[derive(Serialize, Deserialize)]
struct TreeRepr {
    #[serde(flatten)]
    layout: Layout,
    root: String,
    nodes: BTreeMap<String, TreeNode>,
}

impl TryFrom<TreeRepr> for MeasTree {
    type Error = Error;

    fn try_from(r: TreeRepr) -> Result<Self> {
        MeasTree::new(r.layout, r.root, r.nodes)
    }
}

impl From<MeasTree> for TreeRepr {
    fn from(t: MeasTree) -> Self {
        TreeRepr {
            layout: t.layout,
            root: t.root,
            nodes: t.nodes,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidTree(msg.into())
}

fn escape(label: &str) -> String {
    label.replace('%', "%25").replace('/', "%2F")
}

fn child_id(parent: &str, label: &str) -> String {
    format!("{parent}/{}", escape(label))
}

impl MeasTree {
    /// Checks that the nodes form a finite tree hanging from `root`, that
    /// every measurement acts on the layout's full space, and that each
    /// internal node's edges match its outcomes one to one.
    pub fn new(layout: Layout, root: impl Into<String>, nodes: BTreeMap<String, TreeNode>) -> Result<Self> {
        let root = root.into();
        let dim = layout.space()?.total_dim();
        if !nodes.contains_key(&root) {
            return Err(invalid(format!("root `{root}` is not a node")));
        }
        let mut parent: HashMap<&str, &str> = HashMap::new();
        for (id, node) in &nodes {
            match &node.measurement {
                None if !node.children.is_empty() => {
                    return Err(invalid(format!("leaf `{id}` has children")));
                }
                None => {}
                Some(m) => {
                    if m.dim() != dim {
                        return Err(invalid(format!(
                            "measurement at `{id}` has dimension {}, the space has {dim}",
                            m.dim()
                        )));
                    }
                    let same = m.len() == node.children.len() && m.labels().all(|l| node.children.contains_key(l));
                    if !same {
                        return Err(invalid(format!("edges at `{id}` do not match its outcomes")));
                    }
                }
            }
            for child in node.children.values() {
                if !nodes.contains_key(child) {
                    return Err(invalid(format!("`{id}` points to missing node `{child}`")));
                }
                if child == &root || parent.insert(child, id).is_some() {
                    return Err(invalid(format!("node `{child}` has more than one parent")));
                }
            }
        }
        // Every node must reach the root; with unique parents this rules out cycles.
        for id in nodes.keys() {
            let mut at = id.as_str();
            for _ in 0..=nodes.len() {
                match parent.get(at) {
                    Some(p) => at = p,
                    None => break,
                }
            }
            if at != root {
                return Err(invalid(format!("node `{id}` is not connected to the root")));
            }
        }
        Ok(MeasTree { layout, root, nodes })
    }

    /// A tree applying `levels[k]` at every node of depth `k`.
    pub fn stacked(layout: Layout, levels: &[Measurement]) -> Result<Self> {
        fn grow(id: &str, levels: &[Measurement], nodes: &mut BTreeMap<String, TreeNode>) {
            let Some((m, rest)) = levels.split_first() else {
                nodes.insert(id.to_string(), TreeNode::leaf());
                return;
            };
            let mut children = IndexMap::new();
            for l in m.labels() {
                let c = child_id(id, l);
                grow(&c, rest, nodes);
                children.insert(l.to_string(), c);
            }
            nodes.insert(
                id.to_string(),
                TreeNode {
                    measurement: Some(m.clone()),
                    children,
                },
            );
        }
        let mut nodes = BTreeMap::new();
        grow(ROOT_ID, levels, &mut nodes);
        MeasTree::new(layout, ROOT_ID, nodes)
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn space(&self) -> Result<HilbertSpec> {
        self.layout.space()
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn node(&self, id: &str) -> Option<&TreeNode> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> &BTreeMap<String, TreeNode> {
        &self.nodes
    }

    /// Id of the node at the end of `route`.
    pub fn end(&self, route: &Route) -> Result<&str> {
        let mut at = self.root.as_str();
        for l in route.labels() {
            at = self.nodes[at]
                .children
                .get(l)
                .ok_or_else(|| Error::NotABranch(route.to_string()))?;
        }
        Ok(at)
    }

    pub fn is_branch(&self, route: &Route) -> bool {
        self.end(route).is_ok_and(|id| self.nodes[id].is_leaf())
    }

    /// All branches, depth first in outcome order.
    pub fn branches(&self) -> Vec<Branch> {
        let mut out = Vec::new();
        let mut stack = vec![(self.root.as_str(), Vec::new())];
        while let Some((id, labels)) = stack.pop() {
            let node = &self.nodes[id];
            if node.is_leaf() {
                out.push(Route(labels));
                continue;
            }
            for (l, c) in node.children.iter().rev() {
                let mut next = labels.clone();
                next.push(l.clone());
                stack.push((c.as_str(), next));
            }
        }
        out
    }

    /// Length of the longest branch.
    pub fn depth(&self) -> usize {
        self.branches().iter().map(Route::len).max().unwrap_or(0)
    }

    pub fn from_json(s: &str) -> serde_json::Result<MeasTree> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    /// Graphviz rendering: internal nodes show their outcome count, edges
    /// their labels.
    pub fn to_dot(&self) -> String {
        let quote = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
        let mut out = String::from("digraph meastree {\n  node [shape=circle, label=\"\"];\n");
        for (id, node) in &self.nodes {
            let attrs = match &node.measurement {
                Some(m) => format!("label={}", quote(&m.len().to_string())),
                None => "shape=point".to_string(),
            };
            let _ = writeln!(out, "  {} [{attrs}];", quote(id));
        }
        for (id, node) in &self.nodes {
            for (l, c) in &node.children {
                let _ = writeln!(out, "  {} -> {} [label={}];", quote(id), quote(c), quote(l));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Tree of a circuit whose bouts are singletons: the node for the outcome
/// segment `(o_1, …, o_n)` carries the measurement the next gate selects
/// from those outcomes, lifted to the full space.
pub fn tree_of_linear(c: &Circuit) -> Result<(MeasTree, PathBranchMap)> {
    if let Some((n, bout)) = c.schedule.iter().enumerate().find(|(_, b)| b.len() != 1) {
        return Err(Error::NonLinearSchedule(n, bout.len()));
    }
    let violations = validate_circuit(c);
    if !violations.is_empty() {
        return Err(Error::InvalidCircuit(violations));
    }
    let gates = c.execution_order()?;
    let space = c.space()?;
    let mut lifted: HashMap<(usize, usize), Measurement> = HashMap::new();
    for (k, g) in gates.iter().enumerate() {
        for (j, m) in g.measurements.iter().enumerate() {
            lifted.insert((k, j), m.lift(&g.wires, &space)?);
        }
    }

    struct Build<'a> {
        gates: &'a [&'a crate::circuit_ir::Gate],
        lifted: &'a HashMap<(usize, usize), Measurement>,
        nodes: BTreeMap<String, TreeNode>,
        pairs: Vec<(Path, Branch)>,
    }

    fn grow(b: &mut Build<'_>, id: String, depth: usize, partial: &mut BTreeMap<String, String>, route: &mut Vec<String>) {
        let Some(gate) = b.gates.get(depth) else {
            b.nodes.insert(id, TreeNode::leaf());
            b.pairs.push((
                Path {
                    assignment: partial.clone(),
                },
                Route(route.clone()),
            ));
            return;
        };
        let index = gate.selected_index(partial).expect("validated selection is total");
        let m = b.lifted[&(depth, index)].clone();
        let mut children = IndexMap::new();
        for label in m.labels() {
            let child = child_id(&id, label);
            partial.insert(gate.id.clone(), label.to_string());
            route.push(label.to_string());
            grow(b, child.clone(), depth + 1, partial, route);
            route.pop();
            children.insert(label.to_string(), child);
        }
        partial.remove(&gate.id);
        b.nodes.insert(
            id,
            TreeNode {
                measurement: Some(m),
                children,
            },
        );
    }

    let mut b = Build {
        gates: &gates,
        lifted: &lifted,
        nodes: BTreeMap::new(),
        pairs: Vec::new(),
    };
    grow(&mut b, ROOT_ID.to_string(), 0, &mut BTreeMap::new(), &mut Vec::new());
    let tree = MeasTree::new(c.layout.clone(), ROOT_ID, b.nodes)?;
    let map = PathBranchMap::from_pairs(b.pairs).expect("segments are distinct");
    Ok((tree, map))
}
