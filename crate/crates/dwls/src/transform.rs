//! Equivalent graph representations used by the accuracy analysis.
//!
//! A cyclic measurement graph can be unrolled, from a chosen root, into a
//! finite computation tree: each tree node is a copy of a canonical node,
//! and a node's children are copies of its canonical neighbors except the
//! one it was reached from. Running the message-passing estimator for N
//! rounds on the original graph produces at the root exactly the
//! centralized WLS solution of the depth-N tree.
//!
//! Grouping all tree nodes at equal hop distance into super-nodes collapses
//! the tree into a chain ([`LineSystem`]) whose stacked block measurement
//! matrices admit a block-tridiagonal normal system. A second chain, the
//! layered line ([`layered_line`]), groups the *original* graph's
//! breadth-first layers instead, folding intra-layer joint measurements into
//! the layer's self block; it is a re-grouping of the original system, so
//! centralized WLS on it is exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::graph::{NodeId, SensorNetwork};
use crate::linalg::{operator_norm, smallest_singular_value};

/// Default cap on materialized tree nodes; layer sizes grow geometrically on
/// loopy graphs.
pub const DEFAULT_NODE_CAP: usize = 100_000;

/// Index of a node within a [`ComputationTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeNodeId(usize);

impl TreeNodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
pub struct TreeNode {
    /// Canonical node this tree node is a copy of.
    pub origin: NodeId,
    pub parent: Option<TreeNodeId>,
    pub children: Vec<TreeNodeId>,
    /// Hops from the root.
    pub depth: usize,
}

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("root {0} is not in the network")]
    UnknownRoot(NodeId),
    #[error("computation tree exceeds the node cap of {cap}")]
    TreeOverflow { cap: usize },
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("network is not connected")]
    Disconnected,
    #[error("missing sampled measurement: {0}")]
    MissingMeasurement(String),
}

/// Finite unrolling of a network into a rooted tree of measurement copies.
///
/// Copies share the realized measurement values of their canonical
/// originals; the construction duplicates data, it does not redraw noise.
#[derive(Debug, Clone)]
pub struct ComputationTree {
    network: SensorNetwork,
    nodes: Vec<TreeNode>,
    layers: Vec<Vec<TreeNodeId>>,
}

impl ComputationTree {
    pub fn node(&self, id: TreeNodeId) -> &TreeNode {
        &self.nodes[id.0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Layers by hop distance; `layers()[0]` is the root alone.
    pub fn layers(&self) -> &[Vec<TreeNodeId>] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn root(&self) -> TreeNodeId {
        TreeNodeId(0)
    }

    pub fn origin(&self, id: TreeNodeId) -> NodeId {
        self.nodes[id.0].origin
    }

    /// The canonical network the copies draw their measurements from.
    pub fn network(&self) -> &SensorNetwork {
        &self.network
    }

    /// GraphViz rendering with tree indices and canonical origins.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph computation_tree {\n");
        for (idx, node) in self.nodes.iter().enumerate() {
            writeln!(out, "  t{idx} [label=\"t{idx} / g{}\"];", node.origin).unwrap();
        }
        for (idx, node) in self.nodes.iter().enumerate() {
            for child in &node.children {
                writeln!(out, "  t{idx} -- t{};", child.0).unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Unroll `net` from `root` into the depth-`depth` computation tree, with
/// the default node cap.
pub fn unroll(net: &SensorNetwork, root: NodeId, depth: usize) -> Result<ComputationTree, TransformError> {
    unroll_with_cap(net, root, depth, DEFAULT_NODE_CAP)
}

pub fn unroll_with_cap(
    net: &SensorNetwork,
    root: NodeId,
    depth: usize,
    cap: usize,
) -> Result<ComputationTree, TransformError> {
    if depth == 0 {
        return Err(TransformError::ZeroDepth);
    }
    if !net.contains(root) {
        return Err(TransformError::UnknownRoot(root));
    }
    let mut nodes = vec![TreeNode { origin: root, parent: None, children: Vec::new(), depth: 0 }];
    let mut layers = vec![vec![TreeNodeId(0)]];
    for d in 1..depth {
        let mut layer = Vec::new();
        let prev = layers[d - 1].clone();
        for &leaf in &prev {
            let leaf_origin = nodes[leaf.0].origin;
            let came_from = nodes[leaf.0].parent.map(|p| nodes[p.0].origin);
            for &j in net.neighbors(leaf_origin) {
                if Some(j) == came_from {
                    continue;
                }
                if nodes.len() >= cap {
                    return Err(TransformError::TreeOverflow { cap });
                }
                let id = TreeNodeId(nodes.len());
                nodes.push(TreeNode { origin: j, parent: Some(leaf), children: Vec::new(), depth: d });
                nodes[leaf.0].children.push(id);
                layer.push(id);
            }
        }
        if layer.is_empty() {
            break;
        }
        layers.push(layer);
    }
    Ok(ComputationTree { network: net.clone(), nodes, layers })
}

/// One super-node of a chain system: the stacked state of its members
/// together with the block-diagonal self-measurement system.
#[derive(Debug, Clone)]
pub struct LayerBlock {
    /// Canonical origin of each member, in layer order.
    pub members: Vec<NodeId>,
    /// Column offset of each member within the stacked layer state.
    pub offsets: Vec<usize>,
    /// Stacked state dimension.
    pub dim: usize,
    pub c: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub z: DVector<f64>,
}

/// Joint measurements between consecutive super-nodes.
#[derive(Debug, Clone)]
pub struct CouplingBlock {
    /// Coefficient of the earlier layer's stacked state.
    pub c_fwd: DMatrix<f64>,
    /// Coefficient of the later layer's stacked state.
    pub c_bwd: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub z: DVector<f64>,
}

/// A measurement system with chain topology.
#[derive(Debug, Clone)]
pub struct LineSystem {
    layers: Vec<LayerBlock>,
    couplings: Vec<CouplingBlock>,
}

/// Spectral constants of a chain system: singular-value range of the
/// stacked observation matrix and the derived eigenvalue range of the
/// normal matrix.
#[derive(Debug, Clone, Copy)]
pub struct LineSpectralConstants {
    pub eps_under: f64,
    pub eps_over: f64,
    pub r_under: f64,
    pub r_over: f64,
    pub q_under: f64,
    pub q_over: f64,
}

impl LineSystem {
    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[LayerBlock] {
        &self.layers
    }

    pub fn couplings(&self) -> &[CouplingBlock] {
        &self.couplings
    }

    pub fn total_dim(&self) -> usize {
        self.layers.iter().map(|l| l.dim).sum()
    }

    /// First `n` layers with the trailing coupling dropped.
    pub fn truncate(&self, n: usize) -> LineSystem {
        assert!(n >= 1 && n <= self.layers.len());
        LineSystem {
            layers: self.layers[..n].to_vec(),
            couplings: self.couplings[..n - 1].to_vec(),
        }
    }

    /// Stacked observation system `(A, S, y)` of the whole chain: `A` has
    /// one column block per layer; rows are the per-layer self blocks
    /// interleaved with the couplings. For small-system cross-checks.
    pub fn dense_stacked(&self) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
        let n = self.layers.len();
        let mut col_offsets = Vec::with_capacity(n);
        let mut total_dim = 0;
        for layer in &self.layers {
            col_offsets.push(total_dim);
            total_dim += layer.dim;
        }
        let total_rows: usize = self.layers.iter().map(|l| l.c.nrows()).sum::<usize>()
            + self.couplings.iter().map(|c| c.c_fwd.nrows()).sum::<usize>();
        let mut a = DMatrix::zeros(total_rows, total_dim);
        let mut s = DMatrix::zeros(total_rows, total_rows);
        let mut y = DVector::zeros(total_rows);
        let mut row = 0;
        for (i, layer) in self.layers.iter().enumerate() {
            let m = layer.c.nrows();
            a.view_mut((row, col_offsets[i]), (m, layer.dim)).copy_from(&layer.c);
            s.view_mut((row, row), (m, m)).copy_from(&layer.r);
            y.rows_mut(row, m).copy_from(&layer.z);
            row += m;
            if i + 1 < n {
                let c = &self.couplings[i];
                let mc = c.c_fwd.nrows();
                a.view_mut((row, col_offsets[i]), (mc, self.layers[i].dim)).copy_from(&c.c_fwd);
                a.view_mut((row, col_offsets[i + 1]), (mc, self.layers[i + 1].dim))
                    .copy_from(&c.c_bwd);
                s.view_mut((row, row), (mc, mc)).copy_from(&c.r);
                y.rows_mut(row, mc).copy_from(&c.z);
                row += mc;
            }
        }
        (a, s, y)
    }

    /// Eigenvalue range constants: `eps` bounds the singular values of the
    /// stacked observation matrix, `r` the noise spectrum, and
    /// `q_under = eps_under²/r_over`, `q_over = eps_over²/r_under` bound the
    /// normal matrix.
    pub fn spectral_constants(&self) -> LineSpectralConstants {
        let n = self.layers.len();
        let coupling_sq = |idx: usize| -> f64 {
            let c = &self.couplings[idx];
            let f = operator_norm(&c.c_fwd);
            let b = operator_norm(&c.c_bwd);
            2.0 * f.max(b).powi(2)
        };
        let mut eps_over = 0.0f64;
        let mut eps_under = f64::INFINITY;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut total = operator_norm(&layer.c).powi(2);
            if i > 0 {
                total += coupling_sq(i - 1);
            }
            if i < n - 1 {
                total += coupling_sq(i);
            }
            eps_over = eps_over.max(total.sqrt());
            eps_under = eps_under.min(smallest_singular_value(&layer.c));
        }
        let mut r_over = 0.0f64;
        let mut r_under = f64::INFINITY;
        for layer in &self.layers {
            r_over = r_over.max(operator_norm(&layer.r));
            r_under = r_under.min(smallest_singular_value(&layer.r));
        }
        for c in &self.couplings {
            r_over = r_over.max(operator_norm(&c.r));
            r_under = r_under.min(smallest_singular_value(&c.r));
        }
        LineSpectralConstants {
            eps_under,
            eps_over,
            r_under,
            r_over,
            q_under: eps_under.powi(2) / r_over,
            q_over: eps_over.powi(2) / r_under,
        }
    }
}

fn layer_offsets(net: &SensorNetwork, members: &[NodeId]) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(members.len());
    let mut acc = 0;
    for &m in members {
        offsets.push(acc);
        acc += net.dim(m);
    }
    (offsets, acc)
}

fn require_node_z(net: &SensorNetwork, id: NodeId) -> Result<&DVector<f64>, TransformError> {
    net.self_measurement(id)
        .z
        .as_ref()
        .ok_or_else(|| TransformError::MissingMeasurement(format!("node {id}")))
}

/// Collapse a computation tree into its chain of hop-distance super-nodes.
pub fn collapse_to_line(tree: &ComputationTree) -> Result<LineSystem, TransformError> {
    let net = tree.network();
    let mut layers = Vec::with_capacity(tree.depth());
    let mut couplings = Vec::new();

    for (d, layer_nodes) in tree.layers().iter().enumerate() {
        let members: Vec<NodeId> = layer_nodes.iter().map(|&t| tree.origin(t)).collect();
        let (offsets, dim) = layer_offsets(net, &members);

        // Block diagonal of the members' self measurements.
        let mut rows = 0;
        for &m in &members {
            rows += net.self_measurement(m).c.nrows();
        }
        let mut c = DMatrix::zeros(rows, dim);
        let mut r = DMatrix::zeros(rows, rows);
        let mut z = DVector::zeros(rows);
        let mut row = 0;
        for (k, &m) in members.iter().enumerate() {
            let meas = net.self_measurement(m);
            let zm = require_node_z(net, m)?;
            let (mr, mc) = (meas.c.nrows(), meas.c.ncols());
            c.view_mut((row, offsets[k]), (mr, mc)).copy_from(&meas.c);
            r.view_mut((row, row), (mr, mr)).copy_from(&meas.r);
            z.rows_mut(row, mr).copy_from(zm);
            row += mr;
        }
        layers.push(LayerBlock { members, offsets, dim, c, r, z });

        // Joint measurements toward the next layer: one row block per
        // (parent, child) tree edge, parents in layer order, children in
        // their stored order.
        if d + 1 < tree.depth() {
            let next_nodes = &tree.layers()[d + 1];
            let next_members: Vec<NodeId> = next_nodes.iter().map(|&t| tree.origin(t)).collect();
            let (next_offsets, next_dim) = layer_offsets(net, &next_members);
            let next_index: BTreeMap<TreeNodeId, usize> =
                next_nodes.iter().enumerate().map(|(k, &t)| (t, k)).collect();

            let mut rows = 0;
            for &t in layer_nodes {
                for &ch in &tree.node(t).children {
                    let view = net
                        .joint_from(tree.origin(t), tree.origin(ch))
                        .expect("tree edges mirror canonical edges");
                    rows += view.c_self.nrows();
                }
            }
            let mut c_fwd = DMatrix::zeros(rows, layers[d].dim);
            let mut c_bwd = DMatrix::zeros(rows, next_dim);
            let mut r = DMatrix::zeros(rows, rows);
            let mut z = DVector::zeros(rows);
            let mut row = 0;
            for (k, &t) in layer_nodes.iter().enumerate() {
                for &ch in &tree.node(t).children {
                    let from = tree.origin(t);
                    let to = tree.origin(ch);
                    let view = net.joint_from(from, to).expect("tree edges mirror canonical edges");
                    let zj = view.z.ok_or_else(|| {
                        TransformError::MissingMeasurement(format!("edge ({from},{to})"))
                    })?;
                    let m = view.c_self.nrows();
                    c_fwd
                        .view_mut((row, layers[d].offsets[k]), (m, view.c_self.ncols()))
                        .copy_from(view.c_self);
                    c_bwd
                        .view_mut((row, next_offsets[next_index[&ch]]), (m, view.c_other.ncols()))
                        .copy_from(view.c_other);
                    r.view_mut((row, row), (m, m)).copy_from(view.r);
                    z.rows_mut(row, m).copy_from(zj);
                    row += m;
                }
            }
            couplings.push(CouplingBlock { c_fwd, c_bwd, r, z });
        }
    }
    Ok(LineSystem { layers, couplings })
}

/// Chain of breadth-first layers of the original graph, rooted at `root`.
///
/// Layer `k` holds the nodes at distance `k − 1`. Joint measurements inside
/// a layer fold into the layer's self block; joints between consecutive
/// layers become the chain coupling. Every measurement of the network
/// appears exactly once, so this is the original system re-grouped, not an
/// approximation.
pub fn layered_line(net: &SensorNetwork, root: NodeId) -> Result<LineSystem, TransformError> {
    if !net.contains(root) {
        return Err(TransformError::UnknownRoot(root));
    }
    let dist = net.bfs_distances(root).map_err(|_| TransformError::UnknownRoot(root))?;
    if dist.len() != net.node_count() {
        return Err(TransformError::Disconnected);
    }
    let r1 = dist.values().copied().max().unwrap_or(0) + 1;
    let mut layer_members: Vec<Vec<NodeId>> = vec![Vec::new(); r1];
    for (&node, &d) in &dist {
        layer_members[d].push(node); // BTreeMap iteration: ascending ids
    }

    let mut layers = Vec::with_capacity(r1);
    let mut couplings = Vec::with_capacity(r1.saturating_sub(1));
    for k in 0..r1 {
        let members = layer_members[k].clone();
        let (offsets, dim) = layer_offsets(net, &members);
        let position: BTreeMap<NodeId, usize> =
            members.iter().enumerate().map(|(p, &m)| (m, p)).collect();

        // Intra-layer edges, ascending pair order.
        let mut inner_edges = Vec::new();
        for &u in &members {
            for &v in net.neighbors(u) {
                if u < v && position.contains_key(&v) {
                    inner_edges.push((u, v));
                }
            }
        }
        inner_edges.sort_unstable();

        let mut rows = 0;
        for &m in &members {
            rows += net.self_measurement(m).c.nrows();
        }
        for &(u, v) in &inner_edges {
            rows += net.joint(u, v).unwrap().c_lo.nrows();
        }
        let mut c = DMatrix::zeros(rows, dim);
        let mut r = DMatrix::zeros(rows, rows);
        let mut z = DVector::zeros(rows);
        let mut row = 0;
        for (p, &m) in members.iter().enumerate() {
            let meas = net.self_measurement(m);
            let zm = require_node_z(net, m)?;
            let (mr, mc) = (meas.c.nrows(), meas.c.ncols());
            c.view_mut((row, offsets[p]), (mr, mc)).copy_from(&meas.c);
            r.view_mut((row, row), (mr, mr)).copy_from(&meas.r);
            z.rows_mut(row, mr).copy_from(zm);
            row += mr;
        }
        for &(u, v) in &inner_edges {
            let view = net.joint_from(u, v).unwrap();
            let zj = view.z.ok_or_else(|| {
                TransformError::MissingMeasurement(format!("edge ({u},{v})"))
            })?;
            let m = view.c_self.nrows();
            c.view_mut((row, offsets[position[&u]]), (m, view.c_self.ncols()))
                .copy_from(view.c_self);
            c.view_mut((row, offsets[position[&v]]), (m, view.c_other.ncols()))
                .copy_from(view.c_other);
            r.view_mut((row, row), (m, m)).copy_from(view.r);
            z.rows_mut(row, m).copy_from(zj);
            row += m;
        }
        layers.push(LayerBlock { members: members.clone(), offsets, dim, c, r, z });

        // Coupling to the next breadth-first layer.
        if k + 1 < r1 {
            let next = &layer_members[k + 1];
            let (next_offsets, next_dim) = layer_offsets(net, next);
            let next_position: BTreeMap<NodeId, usize> =
                next.iter().enumerate().map(|(p, &m)| (m, p)).collect();

            let mut pairs = Vec::new();
            for &u in &members {
                for &v in net.neighbors(u) {
                    if next_position.contains_key(&v) {
                        pairs.push((u, v));
                    }
                }
            }
            let mut rows = 0;
            for &(u, v) in &pairs {
                rows += net.joint(u, v).unwrap().c_lo.nrows();
            }
            let layer_dim = layers[k].dim;
            let mut c_fwd = DMatrix::zeros(rows, layer_dim);
            let mut c_bwd = DMatrix::zeros(rows, next_dim);
            let mut rj = DMatrix::zeros(rows, rows);
            let mut zc = DVector::zeros(rows);
            let mut row = 0;
            for &(u, v) in &pairs {
                let view = net.joint_from(u, v).unwrap();
                let zv = view.z.ok_or_else(|| {
                    TransformError::MissingMeasurement(format!("edge ({u},{v})"))
                })?;
                let m = view.c_self.nrows();
                c_fwd
                    .view_mut((row, layers[k].offsets[position[&u]]), (m, view.c_self.ncols()))
                    .copy_from(view.c_self);
                c_bwd
                    .view_mut((row, next_offsets[next_position[&v]]), (m, view.c_other.ncols()))
                    .copy_from(view.c_other);
                rj.view_mut((row, row), (m, m)).copy_from(view.r);
                zc.rows_mut(row, m).copy_from(zv);
                row += m;
            }
            couplings.push(CouplingBlock { c_fwd, c_bwd, r: rj, z: zc });
        }
    }
    Ok(LineSystem { layers, couplings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::unit_network;

    #[test]
    fn tree_unrolls_to_itself() {
        let net = unit_network(6, &[(1, 2), (1, 3), (2, 4), (2, 5), (3, 6)]);
        let tree = unroll(&net, NodeId::new(1), 5).unwrap();
        assert_eq!(tree.node_count(), 6);
        let mut seen: Vec<NodeId> = (0..6).map(|i| tree.origin(TreeNodeId(i))).collect();
        seen.sort_unstable();
        assert_eq!(seen, net.node_ids().collect::<Vec<_>>());
    }

    #[test]
    fn triangle_layers_are_1_2_2() {
        let net = unit_network(3, &[(1, 2), (2, 3), (1, 3)]);
        let tree = unroll(&net, NodeId::new(1), 3).unwrap();
        let sizes: Vec<usize> = tree.layers().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![1, 2, 2]);
        // Node 2 spawns a copy of 3, node 3 spawns a copy of 2.
        let origins: Vec<NodeId> =
            tree.layers()[2].iter().map(|&t| tree.origin(t)).collect();
        assert_eq!(origins, vec![NodeId::new(3), NodeId::new(2)]);
    }

    #[test]
    fn four_ring_depth_two_has_three_nodes() {
        let net = unit_network(4, &[(1, 2), (2, 3), (3, 4), (1, 4)]);
        let tree = unroll(&net, NodeId::new(1), 2).unwrap();
        assert_eq!(tree.node_count(), 3);
    }

    #[test]
    fn cap_overflow_is_an_error() {
        let net = unit_network(3, &[(1, 2), (2, 3), (1, 3)]);
        assert!(matches!(
            unroll_with_cap(&net, NodeId::new(1), 12, 10),
            Err(TransformError::TreeOverflow { cap: 10 })
        ));
    }

    #[test]
    fn layer_growth_bound_holds() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rand::Rng::gen_range(&mut rng, 3..=9);
            let edges = crate::testutil::random_connected_edges(&mut rng, n, 2, 4);
            let net = unit_network(n, &edges);
            let stats = net.graph_stats().unwrap();
            if stats.ubar == 0 {
                continue;
            }
            let tree = unroll(&net, NodeId::new(1), 5).unwrap();
            for (i, layer) in tree.layers().iter().enumerate() {
                let bound = (stats.ubar + 1) as f64 * (stats.ubar as f64).powi(i as i32 - 1);
                let bound = if i == 0 { 1.0 } else { bound };
                assert!(
                    layer.len() as f64 <= bound,
                    "layer {i} has {} nodes, bound {bound}",
                    layer.len()
                );
            }
        }
    }

    #[test]
    fn single_node_line_is_self_measurement() {
        let net = unit_network(1, &[]);
        let tree = unroll(&net, NodeId::new(1), 1).unwrap();
        let line = collapse_to_line(&tree).unwrap();
        assert_eq!(line.layer_count(), 1);
        assert_eq!(line.layers()[0].c, net.self_measurement(NodeId::new(1)).c);
        assert!(line.couplings().is_empty());
    }

    #[test]
    fn two_node_chain_collapses_to_itself() {
        let net = crate::testutil::two_node_chain(1.0, 2.0, 3.0);
        let tree = unroll(&net, NodeId::new(1), 2).unwrap();
        let line = collapse_to_line(&tree).unwrap();
        assert_eq!(line.layer_count(), 2);
        assert_eq!(line.layers()[0].dim, 1);
        assert_eq!(line.layers()[1].dim, 1);
        assert_eq!(line.couplings()[0].z[0], 3.0);
    }

    #[test]
    fn layered_line_of_path_is_the_path() {
        let net = unit_network(4, &[(1, 2), (2, 3), (3, 4)]);
        let line = layered_line(&net, NodeId::new(1)).unwrap();
        assert_eq!(line.layer_count(), 4);
        for layer in line.layers() {
            assert_eq!(layer.members.len(), 1);
        }
    }

    #[test]
    fn layered_line_folds_triangle_inner_edge() {
        let net = unit_network(3, &[(1, 2), (2, 3), (1, 3)]);
        let line = layered_line(&net, NodeId::new(1)).unwrap();
        assert_eq!(line.layer_count(), 2);
        let second = &line.layers()[1];
        assert_eq!(second.members, vec![NodeId::new(2), NodeId::new(3)]);
        // Two self rows plus the folded (2,3) joint row.
        assert_eq!(second.c.nrows(), 3);
        // The coupling carries the two root edges.
        assert_eq!(line.couplings()[0].c_fwd.nrows(), 2);
    }

    #[test]
    fn layered_line_requires_connectivity() {
        let net = unit_network(3, &[(1, 2)]);
        assert!(matches!(
            layered_line(&net, NodeId::new(1)),
            Err(TransformError::Disconnected)
        ));
    }

    #[test]
    fn dot_export_mentions_every_tree_node() {
        let net = unit_network(3, &[(1, 2), (2, 3), (1, 3)]);
        let tree = unroll(&net, NodeId::new(1), 3).unwrap();
        let dot = tree.to_dot();
        for idx in 0..tree.node_count() {
            assert!(dot.contains(&format!("t{idx} ")));
        }
    }

    #[test]
    fn truncate_keeps_prefix() {
        let net = unit_network(4, &[(1, 2), (2, 3), (3, 4)]);
        let line = layered_line(&net, NodeId::new(1)).unwrap();
        let cut = line.truncate(2);
        assert_eq!(cut.layer_count(), 2);
        assert_eq!(cut.couplings().len(), 1);
    }
}
