//! Canonical measurement graph: sensing nodes with self measurements
//! `z_i = C_i x_i + v_i` on the nodes and joint measurements
//! `z_{i,j} = C_{i,j} x_i + C_{j,i} x_j + v_{i,j}` on the undirected edges,
//! together with validation of the invertibility assumption
//! (`C_iᵀ R_i⁻¹ C_i > 0` at every node) and the graph metrics the accuracy
//! bounds are phrased in (eccentricities, diameter, loop-free depth).

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{min_symmetric_eigenvalue, spd_inverse, symmetrize};

/// Positive definiteness margin for the per-node assumption check.
pub const EPS_PSD: f64 = 1e-10;

/// Identifier of a sensing node. Indices start at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(usize);

impl NodeId {
    /// Panics if `index` is zero; node indices are 1-based.
    pub fn new(index: usize) -> Self {
        assert!(index >= 1, "node indices are 1-based");
        Self(index)
    }

    pub fn try_new(index: usize) -> Option<Self> {
        (index >= 1).then_some(Self(index))
    }

    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Unordered node pair identifying an edge; stored with the smaller id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey {
    lo: NodeId,
    hi: NodeId,
}

impl EdgeKey {
    /// Panics on self-loops.
    pub fn new(a: NodeId, b: NodeId) -> Self {
        assert!(a != b, "self-loops are not allowed");
        if a < b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    pub fn lo(self) -> NodeId {
        self.lo
    }

    pub fn hi(self) -> NodeId {
        self.hi
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo, self.hi)
    }
}

/// Self measurement `z_i = C_i x_i + v_i` with `v_i ~ N(0, R_i)`.
///
/// `z` stays `None` until a realization is sampled or loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfMeasurement {
    pub c: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub z: Option<DVector<f64>>,
}

/// Joint measurement on an undirected edge, stored once per pair with the
/// coefficient of the smaller endpoint first.
#[derive(Debug, Clone, PartialEq)]
pub struct JointMeasurement {
    pub c_lo: DMatrix<f64>,
    pub c_hi: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub z: Option<DVector<f64>>,
}

/// Directed view of a joint measurement: `c_self` is the coefficient of the
/// node the view was requested from.
#[derive(Debug, Clone, Copy)]
pub struct JointView<'a> {
    pub c_self: &'a DMatrix<f64>,
    pub c_other: &'a DMatrix<f64>,
    pub r: &'a DMatrix<f64>,
    pub z: Option<&'a DVector<f64>>,
}

#[derive(Debug, Clone)]
struct NodeData {
    dim: usize,
    meas: SelfMeasurement,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("node {0} already exists")]
    DuplicateNode(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("edge {0} already exists")]
    DuplicateEdge(EdgeKey),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("node index 0 in document (indices are 1-based)")]
    ZeroNodeIndex,
    #[error("network is not connected")]
    Disconnected,
    #[error("network failed validation:\n{0}")]
    Invalid(ValidationReport),
    #[error("ragged matrix rows in document ({context})")]
    RaggedMatrix { context: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One validation violation, tied to the node or edge it was found at.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NodeDimension { node: NodeId, detail: String },
    EdgeDimension { edge: EdgeKey, detail: String },
    NodeNoiseNotSpd { node: NodeId, min_eig: f64 },
    EdgeNoiseNotSpd { edge: EdgeKey, min_eig: f64 },
    AssumptionViolated { node: NodeId, min_eig: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NodeDimension { node, detail } => {
                write!(f, "node {node}: dimension mismatch, {detail}")
            }
            Violation::EdgeDimension { edge, detail } => {
                write!(f, "edge {edge}: dimension mismatch, {detail}")
            }
            Violation::NodeNoiseNotSpd { node, min_eig } => {
                write!(f, "node {node}: R is not positive definite (min eig {min_eig:.3e})")
            }
            Violation::EdgeNoiseNotSpd { edge, min_eig } => {
                write!(f, "edge {edge}: R is not positive definite (min eig {min_eig:.3e})")
            }
            Violation::AssumptionViolated { node, min_eig } => {
                write!(
                    f,
                    "node {node}: CᵀR⁻¹C is not positive definite (min eig {min_eig:.3e} <= {EPS_PSD:.0e})"
                )
            }
        }
    }
}

/// Outcome of [`SensorNetwork::validate`]: empty means pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_pass() {
            write!(f, "pass")
        } else {
            for v in &self.violations {
                writeln!(f, "- {v}")?;
            }
            Ok(())
        }
    }
}

/// Loop-free depth of a node: the largest `l` such that the subgraph induced
/// by all nodes within distance `l` is acyclic. `Unbounded` means the whole
/// connected component of the node is acyclic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopFreeDepth {
    Finite(usize),
    Unbounded,
}

impl LoopFreeDepth {
    /// Finite value, clamping `Unbounded` to the node eccentricity.
    pub fn clamped(self, eccentricity: usize) -> usize {
        match self {
            LoopFreeDepth::Finite(l) => l,
            LoopFreeDepth::Unbounded => eccentricity,
        }
    }

    pub fn as_finite(self) -> Option<usize> {
        match self {
            LoopFreeDepth::Finite(l) => Some(l),
            LoopFreeDepth::Unbounded => None,
        }
    }
}

impl fmt::Display for LoopFreeDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoopFreeDepth::Finite(l) => write!(f, "{l}"),
            LoopFreeDepth::Unbounded => write!(f, "unbounded"),
        }
    }
}

/// Graph-level constants used throughout the accuracy analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    /// Maximum node degree minus one.
    pub ubar: usize,
    /// Maximum state dimension.
    pub nbar: usize,
    /// Maximum measurement dimension over self and joint measurements.
    pub mbar: usize,
    pub diameter: usize,
    pub eccentricity: BTreeMap<NodeId, usize>,
    /// Number of breadth-first layers seen from each node
    /// (eccentricity + 1).
    pub r1: BTreeMap<NodeId, usize>,
}

/// The canonical measurement graph. Immutable once built; cheap to share
/// read-only across workers.
#[derive(Debug, Clone, Default)]
pub struct SensorNetwork {
    nodes: BTreeMap<NodeId, NodeData>,
    edges: BTreeMap<EdgeKey, JointMeasurement>,
    adjacency: BTreeMap<NodeId, Vec<NodeId>>,
    true_state: BTreeMap<NodeId, DVector<f64>>,
}

impl SensorNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(
        &mut self,
        id: NodeId,
        dim: usize,
        meas: SelfMeasurement,
    ) -> Result<(), GraphError> {
        if self.nodes.contains_key(&id) {
            return Err(GraphError::DuplicateNode(id));
        }
        self.nodes.insert(id, NodeData { dim, meas });
        self.adjacency.entry(id).or_default();
        Ok(())
    }

    /// Add the joint measurement `z = c_a x_a + c_b x_b + v`, `v ~ N(0, r)`.
    /// Coefficients follow the argument order; storage normalizes by id.
    pub fn add_edge(
        &mut self,
        a: NodeId,
        b: NodeId,
        c_a: DMatrix<f64>,
        c_b: DMatrix<f64>,
        r: DMatrix<f64>,
        z: Option<DVector<f64>>,
    ) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        for id in [a, b] {
            if !self.nodes.contains_key(&id) {
                return Err(GraphError::UnknownNode(id));
            }
        }
        let key = EdgeKey::new(a, b);
        if self.edges.contains_key(&key) {
            return Err(GraphError::DuplicateEdge(key));
        }
        let (c_lo, c_hi) = if a == key.lo { (c_a, c_b) } else { (c_b, c_a) };
        self.edges.insert(key, JointMeasurement { c_lo, c_hi, r, z });
        self.adjacency.get_mut(&a).unwrap().push(b);
        self.adjacency.get_mut(&b).unwrap().push(a);
        self.adjacency.get_mut(&a).unwrap().sort_unstable();
        self.adjacency.get_mut(&b).unwrap().sort_unstable();
        Ok(())
    }

    pub fn set_true_state(&mut self, id: NodeId, x: DVector<f64>) -> Result<(), GraphError> {
        if !self.nodes.contains_key(&id) {
            return Err(GraphError::UnknownNode(id));
        }
        self.true_state.insert(id, x);
        Ok(())
    }

    pub fn true_state(&self, id: NodeId) -> Option<&DVector<f64>> {
        self.true_state.get(&id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    /// Node ids in ascending order.
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn dim(&self, id: NodeId) -> usize {
        self.nodes[&id].dim
    }

    pub fn self_measurement(&self, id: NodeId) -> &SelfMeasurement {
        &self.nodes[&id].meas
    }

    pub fn self_measurement_mut(&mut self, id: NodeId) -> &mut SelfMeasurement {
        &mut self.nodes.get_mut(&id).unwrap().meas
    }

    /// Neighbors of `id` in ascending order.
    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        self.adjacency.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.neighbors(id).len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeKey, &JointMeasurement)> {
        self.edges.iter().map(|(k, m)| (*k, m))
    }

    pub fn joint(&self, a: NodeId, b: NodeId) -> Option<&JointMeasurement> {
        self.edges.get(&EdgeKey::new(a, b))
    }

    pub fn joint_mut(&mut self, a: NodeId, b: NodeId) -> Option<&mut JointMeasurement> {
        self.edges.get_mut(&EdgeKey::new(a, b))
    }

    /// Joint measurement as seen from node `from`: `c_self` multiplies
    /// `x_from`, `c_other` multiplies `x_to`.
    pub fn joint_from(&self, from: NodeId, to: NodeId) -> Option<JointView<'_>> {
        let key = EdgeKey::new(from, to);
        let m = self.edges.get(&key)?;
        Some(if from == key.lo {
            JointView { c_self: &m.c_lo, c_other: &m.c_hi, r: &m.r, z: m.z.as_ref() }
        } else {
            JointView { c_self: &m.c_hi, c_other: &m.c_lo, r: &m.r, z: m.z.as_ref() }
        })
    }

    /// Coefficient `C_{i,j}` of `x_i` in the joint measurement `z_{i,j}`.
    pub fn coeff(&self, i: NodeId, j: NodeId) -> Option<&DMatrix<f64>> {
        self.joint_from(i, j).map(|v| v.c_self)
    }

    /// Breadth-first distances from `root` within its connected component.
    pub fn bfs_distances(&self, root: NodeId) -> Result<BTreeMap<NodeId, usize>, GraphError> {
        if !self.contains(root) {
            return Err(GraphError::UnknownNode(root));
        }
        let mut dist = BTreeMap::new();
        dist.insert(root, 0usize);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let du = dist[&u];
            for &v in self.neighbors(u) {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(v) {
                    e.insert(du + 1);
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    pub fn is_connected(&self) -> bool {
        match self.nodes.keys().next() {
            None => true,
            Some(&first) => {
                self.bfs_distances(first).map(|d| d.len() == self.nodes.len()).unwrap_or(false)
            }
        }
    }

    /// Nodes within `radius` hops of `root`.
    pub fn neighborhood(&self, root: NodeId, radius: usize) -> Result<BTreeSet<NodeId>, GraphError> {
        let dist = self.bfs_distances(root)?;
        Ok(dist.into_iter().filter(|&(_, d)| d <= radius).map(|(n, _)| n).collect())
    }

    /// Subgraph induced by `keep`: the listed nodes and all edges among them.
    /// Node ids are preserved.
    pub fn induced_subgraph(&self, keep: &BTreeSet<NodeId>) -> SensorNetwork {
        let mut sub = SensorNetwork::new();
        for (&id, data) in &self.nodes {
            if keep.contains(&id) {
                sub.add_node(id, data.dim, data.meas.clone()).unwrap();
            }
        }
        for (key, meas) in &self.edges {
            if keep.contains(&key.lo) && keep.contains(&key.hi) {
                sub.add_edge(
                    key.lo,
                    key.hi,
                    meas.c_lo.clone(),
                    meas.c_hi.clone(),
                    meas.r.clone(),
                    meas.z.clone(),
                )
                .unwrap();
            }
        }
        for (&id, x) in &self.true_state {
            if keep.contains(&id) {
                sub.true_state.insert(id, x.clone());
            }
        }
        sub
    }

    /// Full structural and numerical validation. A passing report certifies
    /// dimension agreement of all stored matrices and vectors, positive
    /// definite noise covariances, and the per-node invertibility assumption
    /// `min_eig(C_iᵀ R_i⁻¹ C_i) >` [`EPS_PSD`].
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (&id, data) in &self.nodes {
            let m = &data.meas;
            let rows = m.c.nrows();
            if m.c.ncols() != data.dim {
                violations.push(Violation::NodeDimension {
                    node: id,
                    detail: format!("C has {} columns for state dimension {}", m.c.ncols(), data.dim),
                });
                continue;
            }
            if m.r.nrows() != rows || m.r.ncols() != rows {
                violations.push(Violation::NodeDimension {
                    node: id,
                    detail: format!(
                        "R is {}x{} for a {rows}-row measurement",
                        m.r.nrows(),
                        m.r.ncols()
                    ),
                });
                continue;
            }
            if let Some(z) = &m.z {
                if z.len() != rows {
                    violations.push(Violation::NodeDimension {
                        node: id,
                        detail: format!("z has length {} for a {rows}-row measurement", z.len()),
                    });
                    continue;
                }
            }
            let min_r = min_symmetric_eigenvalue(&m.r);
            if min_r <= 0.0 {
                violations.push(Violation::NodeNoiseNotSpd { node: id, min_eig: min_r });
                continue;
            }
            let r_inv = match spd_inverse(&m.r) {
                Ok(inv) => inv,
                Err(_) => {
                    violations.push(Violation::NodeNoiseNotSpd { node: id, min_eig: min_r });
                    continue;
                }
            };
            let info = symmetrize(&(m.c.transpose() * r_inv * &m.c));
            let min_info = min_symmetric_eigenvalue(&info);
            if min_info <= EPS_PSD {
                violations.push(Violation::AssumptionViolated { node: id, min_eig: min_info });
            }
        }
        for (key, m) in &self.edges {
            let rows = m.c_lo.nrows();
            let mut detail = None;
            if m.c_hi.nrows() != rows {
                detail = Some(format!(
                    "coefficient blocks have {} and {} rows",
                    rows,
                    m.c_hi.nrows()
                ));
            } else if m.c_lo.ncols() != self.dim(key.lo) {
                detail = Some(format!(
                    "coefficient of node {} has {} columns for state dimension {}",
                    key.lo,
                    m.c_lo.ncols(),
                    self.dim(key.lo)
                ));
            } else if m.c_hi.ncols() != self.dim(key.hi) {
                detail = Some(format!(
                    "coefficient of node {} has {} columns for state dimension {}",
                    key.hi,
                    m.c_hi.ncols(),
                    self.dim(key.hi)
                ));
            } else if m.r.nrows() != rows || m.r.ncols() != rows {
                detail = Some(format!(
                    "R is {}x{} for a {rows}-row measurement",
                    m.r.nrows(),
                    m.r.ncols()
                ));
            } else if let Some(z) = &m.z {
                if z.len() != rows {
                    detail = Some(format!("z has length {} for a {rows}-row measurement", z.len()));
                }
            }
            if let Some(detail) = detail {
                violations.push(Violation::EdgeDimension { edge: *key, detail });
                continue;
            }
            let min_r = min_symmetric_eigenvalue(&m.r);
            if min_r <= 0.0 {
                violations.push(Violation::EdgeNoiseNotSpd { edge: *key, min_eig: min_r });
            }
        }
        ValidationReport { violations }
    }

    /// Shorthand for validate-and-fail.
    pub fn require_valid(&self) -> Result<(), GraphError> {
        let report = self.validate();
        if report.is_pass() {
            Ok(())
        } else {
            Err(GraphError::Invalid(report))
        }
    }

    /// Largest `l` such that the subgraph induced by nodes within distance
    /// `l` of `root` is acyclic, or `Unbounded` when the whole component of
    /// `root` has no cycle.
    pub fn loop_free_depth(&self, root: NodeId) -> Result<LoopFreeDepth, GraphError> {
        let dist = self.bfs_distances(root)?;
        let ecc = dist.values().copied().max().unwrap_or(0);

        // Edge (u,v) enters the neighborhood subgraph at l = max(d_u, d_v);
        // a cycle appears exactly when union-find joins two nodes already
        // connected at that level.
        let ids: Vec<NodeId> = dist.keys().copied().collect();
        let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(k, &n)| (n, k)).collect();
        let mut edges_at: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (key, _) in self.edges() {
            let (Some(&du), Some(&dv)) = (dist.get(&key.lo), dist.get(&key.hi)) else {
                continue;
            };
            edges_at
                .entry(du.max(dv))
                .or_default()
                .push((index[&key.lo], index[&key.hi]));
        }

        let mut uf = UnionFind::new(ids.len());
        for l in 0..=ecc {
            if let Some(level_edges) = edges_at.get(&l) {
                for &(u, v) in level_edges {
                    if !uf.union(u, v) {
                        debug_assert!(l > 0, "level 0 has a single node and no edges");
                        return Ok(LoopFreeDepth::Finite(l - 1));
                    }
                }
            }
        }
        Ok(LoopFreeDepth::Unbounded)
    }

    /// Graph metrics over a connected network.
    pub fn graph_stats(&self) -> Result<GraphStats, GraphError> {
        if self.nodes.is_empty() || !self.is_connected() {
            return Err(GraphError::Disconnected);
        }
        let max_degree = self.node_ids().map(|n| self.degree(n)).max().unwrap_or(0);
        let nbar = self.node_ids().map(|n| self.dim(n)).max().unwrap_or(0);
        let mbar = self
            .nodes
            .values()
            .map(|d| d.meas.c.nrows())
            .chain(self.edges.values().map(|m| m.c_lo.nrows()))
            .max()
            .unwrap_or(0);
        let mut eccentricity = BTreeMap::new();
        let mut r1 = BTreeMap::new();
        for id in self.node_ids() {
            let ecc = self.bfs_distances(id)?.values().copied().max().unwrap_or(0);
            eccentricity.insert(id, ecc);
            r1.insert(id, ecc + 1);
        }
        let diameter = eccentricity.values().copied().max().unwrap_or(0);
        Ok(GraphStats {
            ubar: max_degree.saturating_sub(1),
            nbar,
            mbar,
            diameter,
            eccentricity,
            r1,
        })
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when both nodes were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

// ---------------------------------------------------------------------------
// JSON document
// ---------------------------------------------------------------------------

/// On-disk form of a network: row-major nested arrays of numbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<NodeDocument>,
    pub edges: Vec<EdgeDocument>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeDocument {
    pub id: usize,
    pub dim: usize,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeDocument {
    pub i: usize,
    pub j: usize,
    #[serde(rename = "C_ij")]
    pub c_ij: Vec<Vec<f64>>,
    #[serde(rename = "C_ji")]
    pub c_ji: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn matrix_from_rows(rows: &[Vec<f64>], context: &str) -> Result<DMatrix<f64>, GraphError> {
    let nrows = rows.len();
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(GraphError::RaggedMatrix { context: context.into() });
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

impl SensorNetwork {
    pub fn to_document(&self) -> GraphDocument {
        let nodes = self
            .nodes
            .iter()
            .map(|(&id, data)| NodeDocument {
                id: id.index(),
                dim: data.dim,
                c: matrix_to_rows(&data.meas.c),
                r: matrix_to_rows(&data.meas.r),
                z: data.meas.z.as_ref().map(|z| z.iter().copied().collect()),
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|(key, m)| EdgeDocument {
                i: key.lo.index(),
                j: key.hi.index(),
                c_ij: matrix_to_rows(&m.c_lo),
                c_ji: matrix_to_rows(&m.c_hi),
                r: matrix_to_rows(&m.r),
                z: m.z.as_ref().map(|z| z.iter().copied().collect()),
            })
            .collect();
        GraphDocument { nodes, edges }
    }

    pub fn from_document(doc: &GraphDocument) -> Result<Self, GraphError> {
        let mut net = SensorNetwork::new();
        for n in &doc.nodes {
            let id = NodeId::try_new(n.id).ok_or(GraphError::ZeroNodeIndex)?;
            let meas = SelfMeasurement {
                c: matrix_from_rows(&n.c, &format!("node {} C", n.id))?,
                r: matrix_from_rows(&n.r, &format!("node {} R", n.id))?,
                z: n.z.as_ref().map(|z| DVector::from_vec(z.clone())),
            };
            net.add_node(id, n.dim, meas)?;
        }
        for e in &doc.edges {
            let i = NodeId::try_new(e.i).ok_or(GraphError::ZeroNodeIndex)?;
            let j = NodeId::try_new(e.j).ok_or(GraphError::ZeroNodeIndex)?;
            let c_i = matrix_from_rows(&e.c_ij, &format!("edge ({},{}) C_ij", e.i, e.j))?;
            let c_j = matrix_from_rows(&e.c_ji, &format!("edge ({},{}) C_ji", e.i, e.j))?;
            let r = matrix_from_rows(&e.r, &format!("edge ({},{}) R", e.i, e.j))?;
            let z = e.z.as_ref().map(|z| DVector::from_vec(z.clone()));
            net.add_edge(i, j, c_i, c_j, r, z)?;
        }
        Ok(net)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("document serialization")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<(), GraphError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
