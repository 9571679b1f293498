//! Causal DAGs and graphical adjustment audits.
//!
//! A [`Dag`] is built once and never mutated. Path queries walk edges in
//! either orientation; blocking follows the usual d-separation rules, with a
//! collider counted as opened when it or any of its descendants is in the
//! conditioning set.
//!
//! Path enumeration is exhaustive simple-path search and therefore
//! exponential in the worst case. The graphs audited here have a handful of
//! nodes, which keeps it cheap.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    /// Directed cycle, listed as its node sequence (first node repeated last).
    Cycle(Vec<String>),
    DuplicateEdge(String, String),
    DuplicateNode(String),
    SelfLoop(String),
    UnknownNode(String),
    NodeNotOnPath(String),
    /// The two query endpoints coincide.
    SameEndpoints(String),
    /// A conditioning set contains a query endpoint.
    ConditionedEndpoint(String),
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::Cycle(nodes) => write!(f, "directed cycle: {}", nodes.join(" -> ")),
            GraphError::DuplicateEdge(a, b) => write!(f, "duplicate edge {a} -> {b}"),
            GraphError::DuplicateNode(v) => write!(f, "duplicate node {v}"),
            GraphError::SelfLoop(v) => write!(f, "self edge on {v}"),
            GraphError::UnknownNode(v) => write!(f, "unknown node {v}"),
            GraphError::NodeNotOnPath(v) => write!(f, "node {v} is not on the path"),
            GraphError::SameEndpoints(v) => write!(f, "path endpoints must differ (both {v})"),
            GraphError::ConditionedEndpoint(v) => {
                write!(f, "conditioning set contains endpoint {v}")
            }
        }
    }
}

impl core::error::Error for GraphError {}

/// Direction of one path step relative to the path's reading order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Orientation {
    /// `nodes[i] → nodes[i+1]`
    Forward,
    /// `nodes[i] ← nodes[i+1]`
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum NodeRole {
    /// `→ v ←`
    Collider,
    /// `→ v →` or `← v ←`
    Chain,
    /// `← v →`
    Fork,
    Endpoint,
}

/// A simple path through the skeleton, read from `nodes[0]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Path {
    nodes: Vec<String>,
    orientations: Vec<Orientation>,
}

impl Path {
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn orientations(&self) -> &[Orientation] {
        &self.orientations
    }

    pub fn len(&self) -> usize {
        self.orientations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orientations.is_empty()
    }

    /// Role of `v` on this path.
    pub fn role(&self, v: &str) -> Result<NodeRole, GraphError> {
        let i = self
            .nodes
            .iter()
            .position(|n| n == v)
            .ok_or_else(|| GraphError::NodeNotOnPath(v.to_string()))?;
        Ok(self.role_at(i))
    }

    fn role_at(&self, i: usize) -> NodeRole {
        if i == 0 || i + 1 == self.nodes.len() {
            return NodeRole::Endpoint;
        }
        match (self.orientations[i - 1], self.orientations[i]) {
            (Orientation::Forward, Orientation::Backward) => NodeRole::Collider,
            (Orientation::Backward, Orientation::Forward) => NodeRole::Fork,
            _ => NodeRole::Chain,
        }
    }

    /// Interior nodes with their roles.
    pub fn interior(&self) -> impl Iterator<Item = (&str, NodeRole)> + '_ {
        (1..self.nodes.len().saturating_sub(1)).map(move |i| (self.nodes[i].as_str(), self.role_at(i)))
    }

    /// Whether the first step points into the start node.
    pub fn is_back_door(&self) -> bool {
        self.orientations.first() == Some(&Orientation::Backward)
    }

    /// Whether every step points forward (a causal path from start to end).
    pub fn is_directed(&self) -> bool {
        self.orientations.iter().all(|o| *o == Orientation::Forward)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                let arrow = match self.orientations[i - 1] {
                    Orientation::Forward => " → ",
                    Orientation::Backward => " ← ",
                };
                f.write_str(arrow)?;
            }
            f.write_str(n)?;
        }
        Ok(())
    }
}

/// Outcome of a back-door audit for one proposed adjustment set.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdjustmentVerdict {
    pub valid: bool,
    /// Back-door paths left open by the set.
    pub open_backdoor_paths: Vec<Path>,
    /// Paths blocked with no conditioning that the set opens through a collider.
    pub opened_collider_paths: Vec<Path>,
    /// Members of the set that are descendants of the exposure.
    pub descendants_of_exposure_in_set: Vec<String>,
}

/// Directed acyclic graph over named variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    edges: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl Dag {
    /// Validates nodes and edges and computes a topological order.
    pub fn new<N, E, S>(nodes: N, edges: E) -> Result<Self, GraphError>
    where
        N: IntoIterator<Item = S>,
        E: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut names = Vec::new();
        let mut index = BTreeMap::new();
        for n in nodes {
            let n = n.as_ref();
            if index.insert(n.to_string(), names.len()).is_some() {
                return Err(GraphError::DuplicateNode(n.to_string()));
            }
            names.push(n.to_string());
        }
        let k = names.len();
        let mut parents = vec![Vec::new(); k];
        let mut children = vec![Vec::new(); k];
        let mut seen = BTreeSet::new();
        let mut edge_list = Vec::new();
        for (a, b) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let ia = *index.get(a).ok_or_else(|| GraphError::UnknownNode(a.to_string()))?;
            let ib = *index.get(b).ok_or_else(|| GraphError::UnknownNode(b.to_string()))?;
            if ia == ib {
                return Err(GraphError::SelfLoop(a.to_string()));
            }
            if !seen.insert((ia, ib)) {
                return Err(GraphError::DuplicateEdge(a.to_string(), b.to_string()));
            }
            parents[ib].push(ia);
            children[ia].push(ib);
            edge_list.push((ia, ib));
        }
        let topo = topological_order(&children, &parents)
            .map_err(|cycle| GraphError::Cycle(cycle.into_iter().map(|i| names[i].clone()).collect()))?;
        Ok(Self {
            names,
            index,
            edges: edge_list,
            parents,
            children,
            topo,
        })
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    /// Node names in declaration order.
    pub fn nodes(&self) -> &[String] {
        &self.names
    }

    /// Edges as `(from, to)` names, in declaration order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges
            .iter()
            .map(|&(a, b)| (self.names[a].as_str(), self.names[b].as_str()))
    }

    pub fn topological_order(&self) -> impl Iterator<Item = &str> + '_ {
        self.topo.iter().map(|&i| self.names[i].as_str())
    }

    pub fn contains(&self, v: &str) -> bool {
        self.index.contains_key(v)
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        match (self.index.get(from), self.index.get(to)) {
            (Some(&a), Some(&b)) => self.children[a].contains(&b),
            _ => false,
        }
    }

    pub fn parents(&self, v: &str) -> Result<Vec<&str>, GraphError> {
        let i = self.idx(v)?;
        Ok(self.parents[i].iter().map(|&p| self.names[p].as_str()).collect())
    }

    fn idx(&self, v: &str) -> Result<usize, GraphError> {
        self.index
            .get(v)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(v.to_string()))
    }

    fn descendant_mask(&self, i: usize) -> Vec<bool> {
        let mut mask = vec![false; self.names.len()];
        let mut stack = vec![i];
        mask[i] = true;
        while let Some(u) = stack.pop() {
            for &c in &self.children[u] {
                if !mask[c] {
                    mask[c] = true;
                    stack.push(c);
                }
            }
        }
        mask
    }

    /// Strict descendants of `v`, in declaration order.
    pub fn descendants(&self, v: &str) -> Result<Vec<&str>, GraphError> {
        let i = self.idx(v)?;
        let mask = self.descendant_mask(i);
        Ok((0..self.names.len())
            .filter(|&j| j != i && mask[j])
            .map(|j| self.names[j].as_str())
            .collect())
    }

    /// All simple paths between `x` and `y`, ignoring edge direction, sorted
    /// lexicographically by node sequence.
    pub fn enumerate_paths(&self, x: &str, y: &str) -> Result<Vec<Path>, GraphError> {
        let (ix, iy) = (self.idx(x)?, self.idx(y)?);
        if ix == iy {
            return Err(GraphError::SameEndpoints(x.to_string()));
        }
        let mut out = Vec::new();
        let mut on_path = vec![false; self.names.len()];
        let mut stack_nodes = vec![ix];
        let mut stack_dirs = Vec::new();
        on_path[ix] = true;
        self.extend_paths(iy, &mut on_path, &mut stack_nodes, &mut stack_dirs, &mut out);
        out.sort_by(|a, b| a.nodes.cmp(&b.nodes));
        Ok(out)
    }

    fn extend_paths(
        &self,
        target: usize,
        on_path: &mut [bool],
        nodes: &mut Vec<usize>,
        dirs: &mut Vec<Orientation>,
        out: &mut Vec<Path>,
    ) {
        let u = *nodes.last().expect("path never empty");
        if u == target {
            out.push(Path {
                nodes: nodes.iter().map(|&i| self.names[i].clone()).collect(),
                orientations: dirs.clone(),
            });
            return;
        }
        let steps = self.children[u]
            .iter()
            .map(|&c| (c, Orientation::Forward))
            .chain(self.parents[u].iter().map(|&p| (p, Orientation::Backward)));
        for (v, o) in steps {
            if on_path[v] {
                continue;
            }
            on_path[v] = true;
            nodes.push(v);
            dirs.push(o);
            self.extend_paths(target, on_path, nodes, dirs, out);
            dirs.pop();
            nodes.pop();
            on_path[v] = false;
        }
    }

    /// Whether `path` is blocked by `conditioning`.
    ///
    /// Blocked iff some chain or fork node is conditioned on, or some
    /// collider has neither itself nor any descendant in the set.
    pub fn is_path_blocked<S: AsRef<str>>(&self, path: &Path, conditioning: &[S]) -> Result<bool, GraphError> {
        let z = self.conditioning_mask(conditioning)?;
        for n in &path.nodes {
            self.idx(n)?;
        }
        for end in [path.nodes.first(), path.nodes.last()].into_iter().flatten() {
            if z[self.idx(end)?] {
                return Err(GraphError::ConditionedEndpoint(end.clone()));
            }
        }
        Ok(self.blocked_by_mask(path, &z))
    }

    fn conditioning_mask<S: AsRef<str>>(&self, conditioning: &[S]) -> Result<Vec<bool>, GraphError> {
        let mut z = vec![false; self.names.len()];
        for v in conditioning {
            z[self.idx(v.as_ref())?] = true;
        }
        Ok(z)
    }

    fn blocked_by_mask(&self, path: &Path, z: &[bool]) -> bool {
        path.interior().any(|(v, role)| {
            let i = self.index[v];
            match role {
                NodeRole::Collider => {
                    let desc = self.descendant_mask(i);
                    !desc.iter().zip(z).any(|(&d, &c)| d && c)
                }
                _ => z[i],
            }
        })
    }

    /// d-separation of `x` and `y` given `conditioning`: every path between
    /// them is blocked.
    pub fn d_separated<S: AsRef<str>>(&self, x: &str, y: &str, conditioning: &[S]) -> Result<bool, GraphError> {
        let z = self.conditioning_mask(conditioning)?;
        for end in [x, y] {
            if z[self.idx(end)?] {
                return Err(GraphError::ConditionedEndpoint(end.to_string()));
            }
        }
        Ok(self.enumerate_paths(x, y)?.iter().all(|p| self.blocked_by_mask(p, &z)))
    }

    /// Audits `adjust` as an adjustment set for the effect of `exposure` on
    /// `outcome` under the back-door criterion.
    pub fn check_adjustment_set<S: AsRef<str>>(
        &self,
        exposure: &str,
        outcome: &str,
        adjust: &[S],
    ) -> Result<AdjustmentVerdict, GraphError> {
        let z = self.conditioning_mask(adjust)?;
        let ia = self.idx(exposure)?;
        let iy = self.idx(outcome)?;
        for (end, i) in [(exposure, ia), (outcome, iy)] {
            if z[i] {
                return Err(GraphError::ConditionedEndpoint(end.to_string()));
            }
        }
        let none = vec![false; self.names.len()];
        let mut open_backdoor_paths = Vec::new();
        let mut opened_collider_paths = Vec::new();
        for path in self.enumerate_paths(exposure, outcome)? {
            if path.is_directed() || self.blocked_by_mask(&path, &z) {
                continue;
            }
            if self.blocked_by_mask(&path, &none) {
                opened_collider_paths.push(path);
            } else if path.is_back_door() {
                open_backdoor_paths.push(path);
            }
        }
        let desc = self.descendant_mask(ia);
        let descendants_of_exposure_in_set = (0..self.names.len())
            .filter(|&i| i != ia && desc[i] && z[i])
            .map(|i| self.names[i].clone())
            .collect::<Vec<_>>();
        let valid = open_backdoor_paths.is_empty()
            && opened_collider_paths.is_empty()
            && descendants_of_exposure_in_set.is_empty();
        Ok(AdjustmentVerdict {
            valid,
            open_backdoor_paths,
            opened_collider_paths,
            descendants_of_exposure_in_set,
        })
    }
}

/// Kahn's algorithm; on failure returns one directed cycle.
fn topological_order(children: &[Vec<usize>], parents: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    let k = children.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: Vec<usize> = (0..k).rev().filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(k);
    while let Some(u) = ready.pop() {
        order.push(u);
        for &c in children[u].iter().rev() {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    if order.len() == k {
        return Ok(order);
    }
    // Every unprocessed node keeps an unprocessed parent; walk parents until a repeat.
    let mut start = (0..k).find(|&i| indegree[i] > 0).expect("some node left");
    let mut visited = vec![usize::MAX; k];
    let mut walk = Vec::new();
    loop {
        if visited[start] != usize::MAX {
            let mut cycle: Vec<usize> = walk[visited[start]..].to_vec();
            cycle.reverse();
            cycle.push(cycle[0]);
            return Err(cycle);
        }
        visited[start] = walk.len();
        walk.push(start);
        start = *parents[start]
            .iter()
            .find(|&&p| indegree[p] > 0)
            .expect("unprocessed parent");
    }
}
