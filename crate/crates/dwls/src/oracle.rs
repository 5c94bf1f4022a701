//! Centralized weighted least squares over a whole network, an induced
//! neighborhood, or a chain system. This is the ground truth every
//! distributed result is measured against.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

use crate::graph::{GraphError, NodeId, SensorNetwork};
use crate::linalg::{first_block_row_inverse, symmetrize, BandedBlockSystem, LinalgError};
use crate::transform::LineSystem;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("missing sampled measurement: {0}")]
    MissingMeasurement(String),
    #[error("singular global information matrix (per-node observability violated?)")]
    SingularInformation,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Explicitly stacked `(H, R, z)` of a global measurement system.
pub type StackedRows = (DMatrix<f64>, DMatrix<f64>, DVector<f64>);

/// Stacked global measurement system `z = H x + v`, `v ~ N(0, R)`, with
/// column blocks in ascending node order and measurement rows ordered as all
/// self measurements (by node) followed by all joint measurements (by edge).
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    offsets: BTreeMap<NodeId, usize>,
    dims: BTreeMap<NodeId, usize>,
    total_dim: usize,
}

impl GlobalSystem {
    pub fn new(net: &SensorNetwork) -> Self {
        let mut offsets = BTreeMap::new();
        let mut dims = BTreeMap::new();
        let mut acc = 0;
        for id in net.node_ids() {
            offsets.insert(id, acc);
            dims.insert(id, net.dim(id));
            acc += net.dim(id);
        }
        Self { offsets, dims, total_dim: acc }
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn offset(&self, id: NodeId) -> usize {
        self.offsets[&id]
    }

    pub fn dim(&self, id: NodeId) -> usize {
        self.dims[&id]
    }

    /// Information matrix and vector accumulated measurement by measurement;
    /// information is additive, so assembly never forms the stacked `H`.
    pub fn information(
        &self,
        net: &SensorNetwork,
    ) -> Result<(DMatrix<f64>, DVector<f64>), OracleError> {
        let n = self.total_dim;
        let mut info = DMatrix::zeros(n, n);
        let mut vec = DVector::zeros(n);
        for id in net.node_ids() {
            let meas = net.self_measurement(id);
            let z = meas
                .z
                .as_ref()
                .ok_or_else(|| OracleError::MissingMeasurement(format!("node {id}")))?;
            let r_inv = crate::linalg::spd_inverse(&meas.r)?;
            let ct_rinv = meas.c.transpose() * r_inv;
            let off = self.offsets[&id];
            let d = self.dims[&id];
            let mut block = info.view_mut((off, off), (d, d));
            block += &ct_rinv * &meas.c;
            let mut seg = vec.rows_mut(off, d);
            seg += &ct_rinv * z;
        }
        for (key, meas) in net.edges() {
            let z = meas
                .z
                .as_ref()
                .ok_or_else(|| OracleError::MissingMeasurement(format!("edge {key}")))?;
            let r_inv = crate::linalg::spd_inverse(&meas.r)?;
            let (lo, hi) = (key.lo(), key.hi());
            let (off_lo, off_hi) = (self.offsets[&lo], self.offsets[&hi]);
            let (d_lo, d_hi) = (self.dims[&lo], self.dims[&hi]);
            let ct_lo = meas.c_lo.transpose() * &r_inv;
            let ct_hi = meas.c_hi.transpose() * &r_inv;
            let cross = &ct_lo * &meas.c_hi;
            let mut b = info.view_mut((off_lo, off_lo), (d_lo, d_lo));
            b += &ct_lo * &meas.c_lo;
            let mut b = info.view_mut((off_hi, off_hi), (d_hi, d_hi));
            b += &ct_hi * &meas.c_hi;
            let mut b = info.view_mut((off_lo, off_hi), (d_lo, d_hi));
            b += &cross;
            let mut b = info.view_mut((off_hi, off_lo), (d_hi, d_lo));
            b += cross.transpose();
            let mut seg = vec.rows_mut(off_lo, d_lo);
            seg += &ct_lo * z;
            let mut seg = vec.rows_mut(off_hi, d_hi);
            seg += &ct_hi * z;
        }
        Ok((symmetrize(&info), vec))
    }

    /// Explicit stacked `(H, R, z)`; quadratic in memory, intended for
    /// cross-checks on small systems.
    pub fn dense_rows(&self, net: &SensorNetwork) -> Result<StackedRows, OracleError> {
        let mut total_rows = 0;
        for id in net.node_ids() {
            total_rows += net.self_measurement(id).c.nrows();
        }
        for (_, meas) in net.edges() {
            total_rows += meas.c_lo.nrows();
        }
        let mut h = DMatrix::zeros(total_rows, self.total_dim);
        let mut r = DMatrix::zeros(total_rows, total_rows);
        let mut z = DVector::zeros(total_rows);
        let mut row = 0;
        for id in net.node_ids() {
            let meas = net.self_measurement(id);
            let zm = meas
                .z
                .as_ref()
                .ok_or_else(|| OracleError::MissingMeasurement(format!("node {id}")))?;
            let m = meas.c.nrows();
            h.view_mut((row, self.offsets[&id]), (m, self.dims[&id])).copy_from(&meas.c);
            r.view_mut((row, row), (m, m)).copy_from(&meas.r);
            z.rows_mut(row, m).copy_from(zm);
            row += m;
        }
        for (key, meas) in net.edges() {
            let zm = meas
                .z
                .as_ref()
                .ok_or_else(|| OracleError::MissingMeasurement(format!("edge {key}")))?;
            let m = meas.c_lo.nrows();
            h.view_mut((row, self.offsets[&key.lo()]), (m, self.dims[&key.lo()]))
                .copy_from(&meas.c_lo);
            h.view_mut((row, self.offsets[&key.hi()]), (m, self.dims[&key.hi()]))
                .copy_from(&meas.c_hi);
            r.view_mut((row, row), (m, m)).copy_from(&meas.r);
            z.rows_mut(row, m).copy_from(zm);
            row += m;
        }
        Ok((h, r, z))
    }
}

/// Full centralized WLS solution with per-node block access.
#[derive(Debug, Clone)]
pub struct GlobalSolution {
    system: GlobalSystem,
    pub x: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GlobalSolution {
    pub fn x_at(&self, id: NodeId) -> DVector<f64> {
        self.x.rows(self.system.offset(id), self.system.dim(id)).into_owned()
    }

    pub fn cov_at(&self, id: NodeId) -> DMatrix<f64> {
        let off = self.system.offset(id);
        let d = self.system.dim(id);
        self.cov.view((off, off), (d, d)).into_owned()
    }

    /// Per-node reference pairs, as consumed by trajectory mismatch export.
    pub fn per_node(&self, net: &SensorNetwork) -> BTreeMap<NodeId, (DVector<f64>, DMatrix<f64>)> {
        net.node_ids().map(|id| (id, (self.x_at(id), self.cov_at(id)))).collect()
    }
}

/// Centralized WLS over the whole network:
/// `x̂ = (HᵀR⁻¹H)⁻¹ HᵀR⁻¹z`, `Cov = (HᵀR⁻¹H)⁻¹` via Cholesky on the
/// information matrix.
pub fn solve(net: &SensorNetwork) -> Result<GlobalSolution, OracleError> {
    let system = GlobalSystem::new(net);
    let (info, vec) = system.information(net)?;
    let chol = Cholesky::new(info).ok_or(OracleError::SingularInformation)?;
    let x = chol.solve(&vec);
    let cov = symmetrize(&chol.inverse());
    Ok(GlobalSolution { system, x, cov })
}

/// Centralized WLS restricted to the subgraph of nodes within `radius` hops
/// of `root` (with every edge among them); returns the root's block.
pub fn solve_restricted(
    net: &SensorNetwork,
    root: NodeId,
    radius: usize,
) -> Result<(DVector<f64>, DMatrix<f64>), OracleError> {
    let keep = net.neighborhood(root, radius)?;
    let sub = net.induced_subgraph(&keep);
    let sol = solve(&sub)?;
    Ok((sol.x_at(root), sol.cov_at(root)))
}

/// Normal equations of a chain system as a symmetric block-tridiagonal
/// system, per layer `i` (with couplings above/below where they exist):
///
/// ```text
/// Q_{i,i}   = C̃ᵢᵀR̃ᵢ⁻¹C̃ᵢ + C̃ᵢ,ᵢ₊₁ᵀR̃ᵢ,ᵢ₊₁⁻¹C̃ᵢ,ᵢ₊₁ + C̃ᵢ,ᵢ₋₁ᵀR̃ᵢ₋₁,ᵢ⁻¹C̃ᵢ,ᵢ₋₁
/// Q_{i,i+1} = C̃ᵢ,ᵢ₊₁ᵀR̃ᵢ,ᵢ₊₁⁻¹C̃ᵢ₊₁,ᵢ
/// qᵢ        = C̃ᵢᵀR̃ᵢ⁻¹z̃ᵢ + C̃ᵢ,ᵢ₊₁ᵀR̃ᵢ,ᵢ₊₁⁻¹z̃ᵢ,ᵢ₊₁ + C̃ᵢ,ᵢ₋₁ᵀR̃ᵢ₋₁,ᵢ⁻¹z̃ᵢ₋₁,ᵢ
/// ```
pub fn line_normal_system(line: &LineSystem) -> Result<BandedBlockSystem, OracleError> {
    let n = line.layer_count();
    let layers = line.layers();
    let couplings = line.couplings();

    let r_invs: Vec<DMatrix<f64>> = layers
        .iter()
        .map(|l| crate::linalg::spd_inverse(&l.r))
        .collect::<Result<_, _>>()?;
    let rj_invs: Vec<DMatrix<f64>> = couplings
        .iter()
        .map(|c| crate::linalg::spd_inverse(&c.r))
        .collect::<Result<_, _>>()?;

    let mut diag = Vec::with_capacity(n);
    let mut superdiag = Vec::with_capacity(n.saturating_sub(1));
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let layer = &layers[i];
        let ct_rinv = layer.c.transpose() * &r_invs[i];
        let mut q = &ct_rinv * &layer.c;
        let mut b = &ct_rinv * &layer.z;
        if i + 1 < n {
            let c = &couplings[i];
            let ct = c.c_fwd.transpose() * &rj_invs[i];
            q += &ct * &c.c_fwd;
            b += &ct * &c.z;
            superdiag.push(&ct * &c.c_bwd);
        }
        if i > 0 {
            let c = &couplings[i - 1];
            let ct = c.c_bwd.transpose() * &rj_invs[i - 1];
            q += &ct * &c.c_bwd;
            b += &ct * &c.z;
        }
        diag.push(symmetrize(&q));
        rhs.push(b);
    }
    Ok(BandedBlockSystem::new(diag, superdiag, rhs)?)
}

/// WLS estimate and covariance of the first layer of a chain system.
#[derive(Debug, Clone)]
pub struct LineSolution {
    pub x1: DVector<f64>,
    pub cov1: DMatrix<f64>,
}

/// Solve the chain normal equations for the first-layer block through the
/// block-tridiagonal first-row recursion:
/// `x̂₁ = Σⱼ [Σ_N]_{1,j} qⱼ` and `Cov₁ = [Σ_N]_{1,1}`.
pub fn solve_line(line: &LineSystem) -> Result<LineSolution, OracleError> {
    let sys = line_normal_system(line)?;
    let row = first_block_row_inverse(&sys)?;
    let d1 = line.layers()[0].dim;
    let mut x1 = DVector::zeros(d1);
    for (j, block) in row.blocks.iter().enumerate() {
        x1 += block * &sys.rhs_blocks()[j];
    }
    Ok(LineSolution { x1, cov1: symmetrize(&row.blocks[0]) })
}

/// Dense-route solve of the same chain system; the independent cross-check
/// for [`solve_line`].
pub fn solve_line_dense(line: &LineSystem) -> Result<LineSolution, OracleError> {
    let sys = line_normal_system(line)?;
    let dense = sys.to_dense();
    let chol = Cholesky::new(dense).ok_or(OracleError::SingularInformation)?;
    let x = chol.solve(&sys.dense_rhs());
    let cov = chol.inverse();
    let d1 = line.layers()[0].dim;
    Ok(LineSolution {
        x1: x.rows(0, d1).into_owned(),
        cov1: symmetrize(&cov.view((0, 0), (d1, d1)).into_owned()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_standard;
    use crate::graph::LoopFreeDepth;
    use crate::testutil::{random_network, random_tree_edges, two_node_chain, unit_network};
    use crate::transform::{collapse_to_line, layered_line, unroll};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn isolated_node_solution() {
        let mut net = unit_network(1, &[]);
        net.self_measurement_mut(NodeId::new(1)).z = Some(DVector::from_element(1, 2.5));
        let sol = solve(&net).unwrap();
        assert_relative_eq!(sol.x_at(NodeId::new(1))[0], 2.5);
        assert_relative_eq!(sol.cov_at(NodeId::new(1))[(0, 0)], 1.0);
    }

    #[test]
    fn two_node_chain_closed_form() {
        let (a, b, c) = (0.9, -1.4, 2.2);
        let net = two_node_chain(a, b, c);
        let sol = solve(&net).unwrap();
        assert_relative_eq!(sol.x_at(NodeId::new(1))[0], (2.0 * a - b + c) / 3.0, max_relative = 1e-12);
        assert_relative_eq!(sol.x_at(NodeId::new(2))[0], (2.0 * b - a + c) / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn tree_beliefs_match_oracle_after_diameter_rounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let n = rand::Rng::gen_range(&mut rng, 3..=9);
            let edges = random_tree_edges(&mut rng, n);
            let net = random_network(&mut rng, n, &edges, 3);
            net.require_valid().unwrap();
            let diameter = net.graph_stats().unwrap().diameter;
            let traj = run_standard(&net, diameter + 1).unwrap();
            let sol = solve(&net).unwrap();
            for id in net.node_ids() {
                let belief = traj.belief(id, diameter + 1);
                let x_ref = sol.x_at(id);
                assert!((&belief.x_hat - &x_ref).norm() <= 1e-9 * (1.0 + x_ref.norm()));
                let cov_ref = sol.cov_at(id);
                let dcov = crate::linalg::operator_norm(&(&belief.sigma - &cov_ref));
                assert!(dcov <= 1e-9 * (1.0 + crate::linalg::operator_norm(&cov_ref)));
            }
        }
    }

    #[test]
    fn information_additivity_between_routes() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let edges = crate::testutil::random_connected_edges(&mut rng, 6, 3, 4);
        let net = random_network(&mut rng, 6, &edges, 3);
        let system = GlobalSystem::new(&net);
        let (info, vec) = system.information(&net).unwrap();
        let (h, r, z) = system.dense_rows(&net).unwrap();
        let r_inv = r.try_inverse().unwrap();
        let info_dense = h.transpose() * &r_inv * &h;
        let vec_dense = h.transpose() * &r_inv * z;
        let scale = crate::linalg::operator_norm(&info_dense);
        assert!(crate::linalg::operator_norm(&(&info - &info_dense)) <= 1e-12 * scale);
        assert!((&vec - &vec_dense).norm() <= 1e-12 * (1.0 + vec_dense.norm()));
    }

    #[test]
    fn restricted_radius_zero_is_isolated_solution() {
        let net = two_node_chain(1.0, 2.0, 3.0);
        let (x, cov) = solve_restricted(&net, NodeId::new(1), 0).unwrap();
        assert_relative_eq!(x[0], 1.0);
        assert_relative_eq!(cov[(0, 0)], 1.0);
    }

    #[test]
    fn restricted_full_radius_matches_global() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let edges = crate::testutil::random_connected_edges(&mut rng, 7, 2, 4);
        let net = random_network(&mut rng, 7, &edges, 2);
        let stats = net.graph_stats().unwrap();
        let root = NodeId::new(3);
        let (x, cov) = solve_restricted(&net, root, stats.eccentricity[&root]).unwrap();
        let sol = solve(&net).unwrap();
        assert_relative_eq!(x, sol.x_at(root), max_relative = 1e-10);
        assert_relative_eq!(cov, sol.cov_at(root), max_relative = 1e-10);
    }

    #[test]
    fn restricted_solve_matches_engine_below_loop_free_depth() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..6 {
            let n = rand::Rng::gen_range(&mut rng, 5..=9);
            let edges = crate::testutil::random_connected_edges(&mut rng, n, 2, 3);
            let net = random_network(&mut rng, n, &edges, 2);
            let root = NodeId::new(1);
            let LoopFreeDepth::Finite(l1) = net.loop_free_depth(root).unwrap() else {
                continue;
            };
            let traj = run_standard(&net, l1 + 1).unwrap();
            for radius in 0..=l1 {
                let (x, _) = solve_restricted(&net, root, radius).unwrap();
                let belief = traj.belief(root, radius + 1);
                assert!(
                    (&belief.x_hat - &x).norm() <= 1e-9 * (1.0 + x.norm()),
                    "radius {radius} mismatch"
                );
            }
        }
    }

    #[test]
    fn single_layer_line_solution() {
        let mut net = unit_network(1, &[]);
        net.self_measurement_mut(NodeId::new(1)).z = Some(DVector::from_element(1, -0.75));
        let tree = unroll(&net, NodeId::new(1), 1).unwrap();
        let line = collapse_to_line(&tree).unwrap();
        let sol = solve_line(&line).unwrap();
        assert_relative_eq!(sol.x1[0], -0.75);
        assert_relative_eq!(sol.cov1[(0, 0)], 1.0);
    }

    #[test]
    fn recursion_matches_dense_on_random_lines() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..10 {
            let n = rand::Rng::gen_range(&mut rng, 4..=10);
            let edges = crate::testutil::random_connected_edges(&mut rng, n, 2, 3);
            let net = random_network(&mut rng, n, &edges, 2);
            let line = layered_line(&net, NodeId::new(1)).unwrap();
            let fast = solve_line(&line).unwrap();
            let dense = solve_line_dense(&line).unwrap();
            assert!((&fast.x1 - &dense.x1).norm() <= 1e-9 * (1.0 + dense.x1.norm()));
            let dcov = crate::linalg::operator_norm(&(&fast.cov1 - &dense.cov1));
            assert!(dcov <= 1e-9 * (1.0 + crate::linalg::operator_norm(&dense.cov1)));
        }
    }

    #[test]
    fn triangle_line_matches_engine_belief() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let net = random_network(&mut rng, 3, &[(1, 2), (2, 3), (1, 3)], 2);
        for rounds in 1..=4 {
            let tree = unroll(&net, NodeId::new(1), rounds).unwrap();
            let line = collapse_to_line(&tree).unwrap();
            let sol = solve_line(&line).unwrap();
            let traj = run_standard(&net, rounds).unwrap();
            let belief = traj.belief(NodeId::new(1), rounds);
            assert!(
                (&belief.x_hat - &sol.x1).norm() <= 1e-9 * (1.0 + sol.x1.norm()),
                "round {rounds}: estimate mismatch"
            );
            assert!(
                crate::linalg::operator_norm(&(&belief.sigma - &sol.cov1))
                    <= 1e-9 * (1.0 + crate::linalg::operator_norm(&sol.cov1)),
                "round {rounds}: covariance mismatch"
            );
        }
    }

    #[test]
    fn layered_line_reproduces_global_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        for _ in 0..8 {
            let n = rand::Rng::gen_range(&mut rng, 4..=10);
            let edges = crate::testutil::random_connected_edges(&mut rng, n, 3, 4);
            let net = random_network(&mut rng, n, &edges, 2);
            let line = layered_line(&net, NodeId::new(1)).unwrap();
            let sol_line = solve_line(&line).unwrap();
            let sol = solve(&net).unwrap();
            let x_ref = sol.x_at(NodeId::new(1));
            assert!((&sol_line.x1 - &x_ref).norm() <= 1e-9 * (1.0 + x_ref.norm()));
            let cov_ref = sol.cov_at(NodeId::new(1));
            assert!(
                crate::linalg::operator_norm(&(&sol_line.cov1 - &cov_ref))
                    <= 1e-9 * (1.0 + crate::linalg::operator_norm(&cov_ref))
            );
        }
    }

    #[test]
    fn truncated_layered_line_is_restricted_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        let edges = crate::testutil::random_connected_edges(&mut rng, 8, 2, 3);
        let net = random_network(&mut rng, 8, &edges, 2);
        let line = layered_line(&net, NodeId::new(1)).unwrap();
        for n_layers in 1..=line.layer_count() {
            let sol = solve_line(&line.truncate(n_layers)).unwrap();
            let (x_ref, _) = solve_restricted(&net, NodeId::new(1), n_layers - 1).unwrap();
            assert!(
                (&sol.x1 - &x_ref).norm() <= 1e-9 * (1.0 + x_ref.norm()),
                "truncation at {n_layers} layers"
            );
        }
    }

    #[test]
    fn line_spectral_bounds_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..6 {
            let n = rand::Rng::gen_range(&mut rng, 4..=8);
            let edges = crate::testutil::random_connected_edges(&mut rng, n, 2, 3);
            let net = random_network(&mut rng, n, &edges, 2);
            let line = layered_line(&net, NodeId::new(1)).unwrap();
            let consts = line.spectral_constants();
            let (a, s, _) = line.dense_stacked();
            let s_inv = s.try_inverse().unwrap();
            let q = a.transpose() * s_inv * &a;
            let sv = a.singular_values();
            let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            let smax = sv.max();
            assert!(smin >= consts.eps_under - 1e-9);
            assert!(smax <= consts.eps_over + 1e-9);
            let eigs = symmetrize(&q).symmetric_eigen().eigenvalues;
            let emin = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
            let emax = eigs.iter().cloned().fold(0.0f64, f64::max);
            assert!(emin >= consts.q_under - 1e-9);
            assert!(emax <= consts.q_over + 1e-9);

            // The Schur complement sequences sit in the same eigenvalue
            // band as the assembled normal matrix.
            let sys = line_normal_system(&line).unwrap();
            let row = first_block_row_inverse(&sys).unwrap();
            for seq in [&row.deltas, &row.gammas, &row.phis] {
                for block in seq.iter() {
                    let eigs = symmetrize(block).symmetric_eigen().eigenvalues;
                    for &e in eigs.iter() {
                        assert!(e >= consts.q_under - 1e-9);
                        assert!(e <= consts.q_over + 1e-9);
                    }
                }
            }
        }
    }
}
