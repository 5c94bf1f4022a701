//! Randomized invariant suites: the Riemannian metric properties, the
//! block-tridiagonal recursion against dense inversion, representation
//! equivalence, the contraction and bracketing properties of the message
//! recursion, and the accuracy bounds themselves. The CLI exposes them as
//! `dwls verify --suite <name>`; the acceptance tests drive the same checks
//! with pinned trial counts.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{covariance_bound, estimate_bound, increment_bounds};
use crate::engine::{run, run_standard, DirectedEdge, InitSet};
use crate::graph::{LoopFreeDepth, NodeId, SensorNetwork};
use crate::harness::{generate, GeneratorSpec, MeasurementModel, TopologyFamily};
use crate::linalg::{
    banded_decay_envelope, first_block_row_inverse, min_symmetric_eigenvalue, operator_norm,
    random_spd_with_spectrum, riemannian_distance_raw, smallest_singular_value, spd_inverse,
    symmetrize, BandedBlockSystem,
};
use crate::oracle::{solve, solve_restricted, solve_line};
use crate::transform::{collapse_to_line, layered_line, unroll};

/// Outcome of one randomized check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// Largest observed violation (negative or zero means clean margins).
    pub worst: f64,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: trials={} failures={} worst={:.3e}",
            if self.pass() { "PASS" } else { "FAIL" },
            self.name,
            self.trials,
            self.failures,
            self.worst
        )
    }
}

struct Recorder {
    name: &'static str,
    trials: usize,
    failures: usize,
    worst: f64,
}

impl Recorder {
    fn new(name: &'static str) -> Self {
        Self { name, trials: 0, failures: 0, worst: f64::NEG_INFINITY }
    }

    /// Record a violation margin; positive means the property failed.
    fn record(&mut self, violation: f64) {
        self.trials += 1;
        self.worst = self.worst.max(violation);
        if violation > 0.0 {
            self.failures += 1;
        }
    }

    fn finish(self) -> Check {
        Check {
            name: self.name.to_string(),
            trials: self.trials,
            failures: self.failures,
            worst: if self.trials == 0 { 0.0 } else { self.worst },
        }
    }
}

/// A named collection of checks.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {}:", self.suite)?;
        for check in &self.checks {
            writeln!(f, "  {check}")?;
        }
        write!(f, "suite {}: {}", self.suite, if self.pass() { "PASS" } else { "FAIL" })
    }
}

// ---------------------------------------------------------------------------
// Synthetic inputs
// ---------------------------------------------------------------------------

pub(crate) mod synth {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    /// Zero-mean Gaussian draw with covariance `cov`.
    pub(crate) fn sample_gaussian<R: Rng>(rng: &mut R, cov: &DMatrix<f64>) -> DVector<f64> {
        let chol = nalgebra::Cholesky::new(cov.clone()).expect("SPD covariance");
        let white = DVector::from_fn(cov.nrows(), |_, _| StandardNormal.sample(rng));
        chol.l() * white
    }

    /// Random spanning tree edges over nodes 1..=n.
    pub(crate) fn random_tree_edges<R: Rng>(rng: &mut R, n: usize) -> Vec<(usize, usize)> {
        (2..=n).map(|v| (rng.gen_range(1..v), v)).collect()
    }

    /// Random connected graph: a degree-capped spanning tree plus up to
    /// `chords` extra edges.
    pub(crate) fn random_connected_edges<R: Rng>(
        rng: &mut R,
        n: usize,
        chords: usize,
        max_degree: usize,
    ) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        let mut degree = vec![0usize; n + 1];
        for v in 2..=n {
            let candidates: Vec<usize> = (1..v).filter(|&u| degree[u] < max_degree).collect();
            let u = if candidates.is_empty() {
                rng.gen_range(1..v)
            } else {
                candidates[rng.gen_range(0..candidates.len())]
            };
            edges.push((u, v));
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut attempts = 0;
        let mut added = 0;
        while added < chords && attempts < 200 {
            attempts += 1;
            let u = rng.gen_range(1..=n);
            let v = rng.gen_range(1..=n);
            let (u, v) = (u.min(v), u.max(v));
            if u == v
                || edges.contains(&(u, v))
                || degree[u] >= max_degree
                || degree[v] >= max_degree
            {
                continue;
            }
            edges.push((u, v));
            degree[u] += 1;
            degree[v] += 1;
            added += 1;
        }
        edges
    }

    /// Connected network with random well-conditioned measurements, random
    /// state dimensions in `1..=max_dim`, and measurements sampled from a
    /// random true state.
    pub(crate) fn random_network<R: Rng>(
        rng: &mut R,
        n: usize,
        edges: &[(usize, usize)],
        max_dim: usize,
    ) -> SensorNetwork {
        let mut net = SensorNetwork::new();
        let dims: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=max_dim)).collect();
        let states: Vec<DVector<f64>> = dims
            .iter()
            .map(|&d| DVector::from_fn(d, |_, _| StandardNormal.sample(rng)))
            .collect();
        for i in 1..=n {
            let dim = dims[i - 1];
            let rows = dim + rng.gen_range(0..=1);
            // Identity-dominated C keeps the self information well
            // conditioned, which the 1e-9 oracle comparisons need.
            let mut c = DMatrix::from_fn(rows, dim, |_, _| {
                let g: f64 = StandardNormal.sample(rng);
                0.3 * g
            });
            for k in 0..dim {
                c[(k, k)] += 1.0;
            }
            let r = random_spd_with_spectrum(rng, rows, 0.5, 1.5);
            let noise = sample_gaussian(rng, &r);
            let z = &c * &states[i - 1] + noise;
            net.add_node(
                NodeId::new(i),
                dim,
                crate::graph::SelfMeasurement { c, r, z: Some(z) },
            )
            .unwrap();
        }
        for &(i, j) in edges {
            let rows = rng.gen_range(1..=max_dim);
            let c_i = DMatrix::from_fn(rows, dims[i - 1], |_, _| {
                let g: f64 = StandardNormal.sample(rng);
                0.4 * g
            });
            let c_j = DMatrix::from_fn(rows, dims[j - 1], |_, _| {
                let g: f64 = StandardNormal.sample(rng);
                0.4 * g
            });
            let r = random_spd_with_spectrum(rng, rows, 0.5, 1.5);
            let noise = sample_gaussian(rng, &r);
            let z = &c_i * &states[i - 1] + &c_j * &states[j - 1] + noise;
            net.add_edge(NodeId::new(i), NodeId::new(j), c_i, c_j, r, Some(z)).unwrap();
        }
        for i in 1..=n {
            net.set_true_state(NodeId::new(i), states[i - 1].clone()).unwrap();
        }
        net
    }

    /// Random SPD block-tridiagonal system with the given block sizes.
    pub(crate) fn random_spd_tridiagonal<R: Rng>(rng: &mut R, sizes: &[usize]) -> BandedBlockSystem {
        let n = sizes.len();
        let mut superdiag = Vec::new();
        for k in 0..n - 1 {
            superdiag.push(DMatrix::from_fn(sizes[k], sizes[k + 1], |_, _| rng.gen_range(-1.0..1.0)));
        }
        let mut diag = Vec::new();
        for k in 0..n {
            let mut d = random_spd_with_spectrum(rng, sizes[k], 0.5, 2.0);
            let mut shift = 0.0;
            if k > 0 {
                shift += operator_norm(&superdiag[k - 1]);
            }
            if k < n - 1 {
                shift += operator_norm(&superdiag[k]);
            }
            d += DMatrix::identity(sizes[k], sizes[k]) * (shift + 0.1);
            diag.push(d);
        }
        let rhs = sizes
            .iter()
            .map(|&s| DVector::from_fn(s, |_, _| rng.gen_range(-1.0..1.0)))
            .collect();
        BandedBlockSystem::new(diag, superdiag, rhs).unwrap()
    }
}

// ---------------------------------------------------------------------------
// Riemannian metric properties
// ---------------------------------------------------------------------------

/// Property checks of the Riemannian distance, `trials`
/// randomized instances each at tolerance `tol`.
pub fn riemann_property_checks(seed: u64, trials: usize, tol: f64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut identity = Recorder::new("riemann_self_distance_zero");
    let mut inversion = Recorder::new("riemann_inverse_and_swap_invariance");
    let mut congruence = Recorder::new("riemann_congruence_contraction");
    let mut additivity = Recorder::new("riemann_psd_shift_monotonicity");
    let mut quotient = Recorder::new("riemann_information_step_contraction");
    let mut norm_gap = Recorder::new("riemann_norm_exponential_gap");

    for _ in 0..trials {
        let n = rng.gen_range(1..=6);
        let p = random_spd_with_spectrum(&mut rng, n, 0.1, 10.0);
        let q = random_spd_with_spectrum(&mut rng, n, 0.1, 10.0);
        let d = riemannian_distance_raw(&p, &q).unwrap();

        identity.record(riemannian_distance_raw(&p, &p).unwrap() - tol);

        let d_inv =
            riemannian_distance_raw(&spd_inverse(&p).unwrap(), &spd_inverse(&q).unwrap()).unwrap();
        let d_swap = riemannian_distance_raw(&q, &p).unwrap();
        let scale = 1.0 + d;
        inversion.record((d_inv - d).abs().max((d_swap - d).abs()) - tol * scale);

        // Full-row-rank congruence shrinks the distance; square invertible
        // congruence preserves it. Resample until B is comfortably full
        // rank so the distance stays well conditioned.
        let k = rng.gen_range(1..=n);
        let b = loop {
            let b = DMatrix::from_fn(k, n, |_, _| rng.gen_range(-1.0..1.0));
            if smallest_singular_value(&b) > 0.05 {
                break b;
            }
        };
        let bp = symmetrize(&(&b * &p * b.transpose()));
        let bq = symmetrize(&(&b * &q * b.transpose()));
        let d_cong = riemannian_distance_raw(&bp, &bq).unwrap();
        if k == n {
            congruence.record((d_cong - d).abs() - tol * scale);
        } else {
            congruence.record(d_cong - d - tol * scale);
        }

        // P >= Q plus a PSD shift moves P further from Q.
        let p_above = &q + random_spd_with_spectrum(&mut rng, n, 0.0, 2.0);
        let w_psd = random_spd_with_spectrum(&mut rng, n, 0.0, 2.0);
        let base = riemannian_distance_raw(&p_above, &q).unwrap();
        let shifted = riemannian_distance_raw(&symmetrize(&(&p_above + &w_psd)), &q).unwrap();
        additivity.record(base - shifted - tol * (1.0 + base));

        // The information-step map W + B P^{-1} Bᵀ contracts by α/(α+β).
        let m = rng.gen_range(1..=5);
        let w = random_spd_with_spectrum(&mut rng, m, 0.2, 3.0);
        let b = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
        let bp = symmetrize(&(&b * spd_inverse(&p).unwrap() * b.transpose()));
        let bq = symmetrize(&(&b * spd_inverse(&q).unwrap() * b.transpose()));
        let alpha = operator_norm(&bp).max(operator_norm(&bq));
        let beta = smallest_singular_value(&w);
        let lhs =
            riemannian_distance_raw(&symmetrize(&(&w + bp)), &symmetrize(&(&w + bq))).unwrap();
        let rhs = alpha / (alpha + beta) * d;
        quotient.record(lhs - rhs - tol * (1.0 + rhs));

        // P > Q pins the operator-norm gap under (e^δ − 1)‖Q‖.
        let p_strict = &q + random_spd_with_spectrum(&mut rng, n, 0.1, 2.0);
        let d_strict = riemannian_distance_raw(&p_strict, &q).unwrap();
        let lhs = operator_norm(&(&p_strict - &q));
        let rhs = (d_strict.exp() - 1.0) * operator_norm(&q);
        norm_gap.record(lhs - rhs - tol * (1.0 + rhs));
    }

    vec![
        identity.finish(),
        inversion.finish(),
        congruence.finish(),
        additivity.finish(),
        quotient.finish(),
        norm_gap.finish(),
    ]
}

/// First-block-row recursion against dense inversion on random SPD
/// block-tridiagonal systems (up to 8 blocks of size up to 4).
pub fn band_recursion_check(seed: u64, systems: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("band_recursion_vs_dense_inverse");
    for _ in 0..systems {
        let nblocks = rng.gen_range(1..=8);
        let sizes: Vec<usize> = (0..nblocks).map(|_| rng.gen_range(1..=4)).collect();
        let sys = synth::random_spd_tridiagonal(&mut rng, &sizes);
        let row = first_block_row_inverse(&sys).unwrap();
        let inv = sys.to_dense().try_inverse().unwrap();
        let offs = sys.offsets();
        let mut worst = 0.0f64;
        for j in 0..sizes.len() {
            let reference = inv.view((0, offs[j]), (sizes[0], sizes[j])).into_owned();
            let err = operator_norm(&(&row.blocks[j] - &reference))
                / (1.0 + operator_norm(&reference));
            worst = worst.max(err);
        }
        rec.record(worst - 1e-9);
    }
    rec.finish()
}

/// Banded-inverse decay envelope on random SPD tridiagonal systems.
pub fn banded_decay_check(seed: u64, instances: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("banded_inverse_decay_envelope");
    for _ in 0..instances {
        let nblocks = rng.gen_range(3..=7);
        let sizes: Vec<usize> = (0..nblocks).map(|_| rng.gen_range(1..=3)).collect();
        let sys = synth::random_spd_tridiagonal(&mut rng, &sizes);
        let dense = sys.to_dense();
        let eigs = dense.clone().symmetric_eigen().eigenvalues;
        let a = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let b = eigs.iter().cloned().fold(0.0f64, f64::max);
        let inv = dense.try_inverse().unwrap();
        let offs = sys.offsets();
        let mut worst = f64::NEG_INFINITY;
        for i in 0..sizes.len() {
            for j in 0..sizes.len() {
                let block = inv.view((offs[i], offs[j]), (sizes[i], sizes[j])).into_owned();
                let bound = banded_decay_envelope(a, b, 2, i.abs_diff(j)).unwrap();
                worst = worst.max(operator_norm(&block) - bound - 1e-9);
            }
        }
        rec.record(worst);
    }
    rec.finish()
}

// ---------------------------------------------------------------------------
// Representation equivalence
// ---------------------------------------------------------------------------

fn relative_vec_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}

fn relative_mat_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    operator_norm(&(a - b)) / (1.0 + operator_norm(b))
}

/// Beliefs at node 1 equal node-1 centralized WLS on the collapsed
/// unrolling, for every round up to `max_rounds`.
pub fn equivalence_check(seed: u64, trials: usize, max_rounds: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("unroll_collapse_matches_beliefs");
    for _ in 0..trials {
        // Resample until at least one chord survived the degree caps, so
        // every trial is genuinely loopy.
        let (n, edges) = loop {
            let n = rng.gen_range(5..=12);
            let chords = rng.gen_range(1..=3);
            let edges = synth::random_connected_edges(&mut rng, n, chords, 3);
            if edges.len() >= n {
                break (n, edges);
            }
        };
        let net = synth::random_network(&mut rng, n, &edges, 2);
        let root = NodeId::new(1);
        let traj = run_standard(&net, max_rounds).unwrap();
        let mut worst = 0.0f64;
        for rounds in 1..=max_rounds {
            let tree = unroll(&net, root, rounds).unwrap();
            let line = collapse_to_line(&tree).unwrap();
            let sol = solve_line(&line).unwrap();
            let belief = traj.belief(root, rounds);
            let q_line = spd_inverse(&sol.cov1).unwrap();
            worst = worst.max(relative_vec_err(&belief.x_hat, &sol.x1));
            worst = worst.max(relative_mat_err(&belief.q, &q_line));
        }
        rec.record(worst - 1e-9);
    }
    rec.finish()
}

/// Node-1 centralized WLS on the layered line equals node-1 centralized WLS
/// on the original network.
pub fn layered_line_check(seed: u64, trials: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("layered_line_reproduces_global_wls");
    for _ in 0..trials {
        let n = rng.gen_range(4..=12);
        let chords = rng.gen_range(0..=3);
        let edges = synth::random_connected_edges(&mut rng, n, chords, 4);
        let net = synth::random_network(&mut rng, n, &edges, 2);
        let line = layered_line(&net, NodeId::new(1)).unwrap();
        let sol_line = solve_line(&line).unwrap();
        let sol = solve(&net).unwrap();
        let worst = relative_vec_err(&sol_line.x1, &sol.x_at(NodeId::new(1)))
            .max(relative_mat_err(&sol_line.cov1, &sol.cov_at(NodeId::new(1))));
        rec.record(worst - 1e-9);
    }
    rec.finish()
}

/// On trees, beliefs at round diameter + 1 equal centralized WLS at every
/// node.
pub fn acyclic_exactness_check(seed: u64, trials: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("acyclic_exactness_at_diameter_plus_one");
    for _ in 0..trials {
        let n = rng.gen_range(5..=30);
        let edges = synth::random_tree_edges(&mut rng, n);
        let net = synth::random_network(&mut rng, n, &edges, 3);
        let diameter = net.graph_stats().unwrap().diameter;
        let traj = run_standard(&net, diameter + 1).unwrap();
        let sol = solve(&net).unwrap();
        let mut worst = 0.0f64;
        for id in net.node_ids() {
            let belief = traj.belief(id, diameter + 1);
            worst = worst.max(relative_vec_err(&belief.x_hat, &sol.x_at(id)));
            worst = worst.max(relative_mat_err(&belief.sigma, &sol.cov_at(id)));
        }
        rec.record(worst - 1e-9);
    }
    rec.finish()
}

// ---------------------------------------------------------------------------
// Bounds and supporting properties
// ---------------------------------------------------------------------------

fn contraction_network(rng: &mut ChaCha8Rng, i: usize) -> SensorNetwork {
    let nodes = 18 + (i % 5) * 4;
    let spec = GeneratorSpec { family: TopologyFamily::RingOfTrees, nodes, degree: 3 };
    generate(&spec, &MeasurementModel::default(), rng.gen()).unwrap()
}

/// Covariance accuracy: `‖Cov₁ᵂᴸˢ − Q₁⁻¹(N)‖ ≤ varpi ρ^{l₁}` for all
/// `N ∈ [l₁+1, l₁+10]` on generated contraction networks.
pub fn covariance_accuracy_check(seed: u64, trials: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("covariance_accuracy_bound");
    for i in 0..trials {
        let net = if i % 3 == 2 {
            let spec = GeneratorSpec { family: TopologyFamily::Grid, nodes: 16 + (i % 4) * 3, degree: 4 };
            generate(&spec, &MeasurementModel::default(), rng.gen()).unwrap()
        } else {
            contraction_network(&mut rng, i)
        };
        let probe = NodeId::new(1);
        let report = covariance_bound(&net, probe).unwrap();
        if !report.applicable {
            rec.record(1.0);
            continue;
        }
        let Some(l1) = report.l1 else {
            rec.record(1.0);
            continue;
        };
        let sol = solve(&net).unwrap();
        let cov_ref = sol.cov_at(probe);
        let traj = run_standard(&net, l1 + 10).unwrap();
        let mut worst = f64::NEG_INFINITY;
        for n in l1 + 1..=l1 + 10 {
            let mismatch = operator_norm(&(&traj.belief(probe, n).sigma - &cov_ref));
            worst = worst.max(mismatch - report.bound);
        }
        rec.record(worst);
    }
    rec.finish()
}

/// Estimate accuracy: `‖x̂₁(N) − x̂₁ᵂᴸˢ‖ ≤ (2χ̄/(1−κ)) κ^{l₁+1}` for all
/// `N ∈ [l₁+1, l₁+10]` on networks with `κ < 1`.
pub fn estimate_accuracy_check(seed: u64, trials: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("estimate_accuracy_bound");
    for i in 0..trials {
        let net = contraction_network(&mut rng, i);
        let probe = NodeId::new(1);
        let report = estimate_bound(&net, probe).unwrap();
        if !report.applicable {
            rec.record(1.0);
            continue;
        }
        let Some(l1) = report.l1 else {
            rec.record(1.0);
            continue;
        };
        let sol = solve(&net).unwrap();
        let x_ref = sol.x_at(probe);
        let traj = run_standard(&net, l1 + 10).unwrap();
        let mut worst = f64::NEG_INFINITY;
        for n in l1 + 1..=l1 + 10 {
            let mismatch = (&traj.belief(probe, n).x_hat - &x_ref).norm();
            worst = worst.max(mismatch - report.bound);
        }
        rec.record(worst);
    }
    rec.finish()
}

/// Contraction of the information recursion in the Riemannian metric:
/// `δ(Q₁(N,ℚ₁), Q₁(N,ℚ₂)) ≤ ρ^{N−1} δ̄` for admissible initialization
/// pairs.
pub fn init_contraction_check(seed: u64, pairs: usize, max_rounds: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("initialization_contraction");
    for i in 0..pairs {
        let net = contraction_network(&mut rng, i);
        let probe = NodeId::new(1);
        let report = covariance_bound(&net, probe).unwrap();
        if !report.applicable {
            rec.record(1.0);
            continue;
        }
        // Admissible: Q0 = t · C_{i,j}ᵀR⁻¹C_{i,j} with t ∈ [0,1].
        let draw_init = |rng: &mut ChaCha8Rng| {
            let maximal = InitSet::maximal(&net);
            let entries: BTreeMap<DirectedEdge, DMatrix<f64>> = maximal
                .messages()
                .iter()
                .map(|(&edge, msg)| (edge, &msg.q * rng.gen_range(0.0..=1.0)))
                .collect();
            InitSet::from_entries(&net, entries).unwrap()
        };
        let init_a = draw_init(&mut rng);
        let init_b = draw_init(&mut rng);
        let traj_a = run(&net, &init_a, max_rounds).unwrap();
        let traj_b = run(&net, &init_b, max_rounds).unwrap();
        let mut worst = f64::NEG_INFINITY;
        for n in 1..=max_rounds {
            let qa = &traj_a.belief(probe, n).q;
            let qb = &traj_b.belief(probe, n).q;
            let dist = riemannian_distance_raw(qa, qb).unwrap();
            let bound = report.rho.powi(n as i32 - 1) * report.delta_bar;
            worst = worst.max(dist - bound - 1e-9);
        }
        rec.record(worst);
    }
    rec.finish()
}

/// Monotone bracketing: zero-initialized information matrices grow, maximal
/// ones shrink, and the true covariance sits between the two round-(l₁+1)
/// inverses.
pub fn monotone_sandwich_check(seed: u64, trials: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("monotone_sandwich");
    let tol = 1e-9;
    for i in 0..trials {
        let net = contraction_network(&mut rng, i);
        let probe = NodeId::new(1);
        let LoopFreeDepth::Finite(l1) = net.loop_free_depth(probe).unwrap() else {
            rec.record(1.0);
            continue;
        };
        let rounds = l1 + 6;
        let (zero, maximal) = crate::engine::standard_inits(&net);
        let traj_zero = run(&net, &zero, rounds).unwrap();
        let traj_max = run(&net, &maximal, rounds).unwrap();
        let mut worst = f64::NEG_INFINITY;
        for n in 1..rounds {
            for id in net.node_ids() {
                let grow = &traj_zero.belief(id, n + 1).q - &traj_zero.belief(id, n).q;
                let shrink = &traj_max.belief(id, n).q - &traj_max.belief(id, n + 1).q;
                worst = worst.max(-min_symmetric_eigenvalue(&grow) - tol);
                worst = worst.max(-min_symmetric_eigenvalue(&shrink) - tol);
            }
        }
        let lower = &traj_max.belief(probe, l1 + 1).sigma; // Q⁻¹(l₁+1, ℚᴹ)
        let upper = &traj_zero.belief(probe, l1 + 1).sigma; // Q⁻¹(l₁+1, ℚ⁰)
        let cov = solve(&net).unwrap().cov_at(probe);
        worst = worst.max(-min_symmetric_eigenvalue(&(&cov - lower)) - tol);
        worst = worst.max(-min_symmetric_eigenvalue(&(upper - &cov)) - tol);
        for n in l1 + 1..=rounds {
            let sigma = &traj_zero.belief(probe, n).sigma;
            worst = worst.max(-min_symmetric_eigenvalue(&(sigma - lower)) - tol);
            worst = worst.max(-min_symmetric_eigenvalue(&(upper - sigma)) - tol);
        }
        rec.record(worst);
    }
    rec.finish()
}

/// The estimate-bound constants dominate the covariance-bound constants.
pub fn dominance_check(seed: u64, trials: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("constant_dominance");
    for i in 0..trials {
        let net = contraction_network(&mut rng, i);
        let probe = NodeId::new(1);
        let cov = covariance_bound(&net, probe).unwrap();
        let est = estimate_bound(&net, probe).unwrap();
        let tol = 1e-12;
        let mut worst = f64::NEG_INFINITY;
        worst = worst.max(cov.alpha1 - est.a1 - tol);
        worst = worst.max(cov.alpha2 - est.a2 - tol);
        worst = worst.max(est.b1 - cov.beta1 - tol);
        worst = worst.max(est.b2 - cov.beta2 - tol);
        worst = worst.max(cov.lambda - est.omega - tol);
        worst = worst.max(est.kappa_check - est.kappa - tol);
        worst = worst.max(cov.rho - est.kappa - tol);
        rec.record(worst);
    }
    rec.finish()
}

/// Per-round increment envelopes: the estimator's increments sit under
/// `χ̄̌ κ̌^N`, the restricted-WLS increments under `χ̄ κ^N` with an exact
/// cutoff after `r₁` rounds.
pub fn increment_check(seed: u64, trials: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rec = Recorder::new("increment_envelopes");
    for i in 0..trials {
        let net = contraction_network(&mut rng, i);
        let probe = NodeId::new(1);
        let stats = net.graph_stats().unwrap();
        let r1 = stats.r1[&probe];
        let max_round = r1 + 3;
        let inc = increment_bounds(&net, probe, max_round).unwrap();
        if !inc.applicable {
            rec.record(1.0);
            continue;
        }
        let traj = run_standard(&net, max_round + 1).unwrap();
        let mut worst = f64::NEG_INFINITY;
        for n in 1..=max_round {
            let step =
                (&traj.belief(probe, n + 1).x_hat - &traj.belief(probe, n).x_hat).norm();
            worst = worst.max(step - inc.dwls[n - 1]);
        }
        for n in 1..=max_round {
            let (x_now, _) = solve_restricted(&net, probe, n - 1).unwrap();
            let (x_next, _) = solve_restricted(&net, probe, n).unwrap();
            let step = (&x_next - &x_now).norm();
            let bound = inc.restricted_wls[n - 1];
            if n > r1 {
                // The neighborhood saturates: increments must vanish.
                worst = worst.max(step - 1e-12);
            } else {
                worst = worst.max(step - bound);
            }
        }
        rec.record(worst);
    }
    rec.finish()
}

// ---------------------------------------------------------------------------
// Suite entry points
// ---------------------------------------------------------------------------

/// Riemannian metric properties plus the matrix-analysis oracles.
pub fn riemann_suite(seed: u64, trials: usize) -> SuiteReport {
    let mut checks = riemann_property_checks(seed, trials, 1e-8);
    checks.push(band_recursion_check(seed + 1, trials.min(100)));
    checks.push(banded_decay_check(seed + 2, trials.min(50)));
    SuiteReport { suite: "riemann".into(), checks }
}

/// Representation equivalence of the unrolled/collapsed and layered chains.
pub fn equiv_suite(seed: u64, trials: usize) -> SuiteReport {
    SuiteReport {
        suite: "equiv".into(),
        checks: vec![
            equivalence_check(seed, trials, 6),
            layered_line_check(seed + 1, trials),
        ],
    }
}

/// Accuracy bounds and their supporting contraction properties on generated networks.
pub fn bounds_suite(seed: u64, trials: usize) -> SuiteReport {
    SuiteReport {
        suite: "bounds".into(),
        checks: vec![
            covariance_accuracy_check(seed, trials),
            estimate_accuracy_check(seed + 1, trials),
            init_contraction_check(seed + 2, trials.min(20), 8),
            monotone_sandwich_check(seed + 3, trials.min(10)),
            dominance_check(seed + 4, trials.min(10)),
            increment_check(seed + 5, trials.min(6)),
        ],
    }
}

/// Finite-time exactness on acyclic networks.
pub fn acyclic_suite(seed: u64, trials: usize) -> SuiteReport {
    SuiteReport {
        suite: "acyclic".into(),
        checks: vec![acyclic_exactness_check(seed, trials)],
    }
}
