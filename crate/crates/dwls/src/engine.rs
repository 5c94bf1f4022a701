//! Synchronous-round message passing for distributed weighted least
//! squares.
//!
//! Every round, each node fuses its self measurement with the messages
//! received in the previous round into an information pair `(α_i, Q_i)`,
//! reads off its estimate `x̂_i = Q_i⁻¹ α_i` and covariance `Σ_i = Q_i⁻¹`,
//! and then sends to each neighbor `j` a message built from the joint
//! measurement `z_{i,j}` after removing what `j` itself contributed:
//!
//! ```text
//! z_{i→j} = z_{i,j} − C_{i,j} (Q_i − Q_{j→i})⁻¹ (α_i − α_{j→i})
//! R_{i→j} = R_{i,j} + C_{i,j} (Q_i − Q_{j→i})⁻¹ C_{i,j}ᵀ
//! Q_{i→j} = C_{j,i}ᵀ R_{i→j}⁻¹ C_{j,i},   α_{i→j} = C_{j,i}ᵀ R_{i→j}⁻¹ z_{i→j}
//! ```
//!
//! On acyclic graphs the beliefs coincide with centralized WLS after
//! diameter + 1 rounds; on cyclic graphs they approach it exponentially in
//! the loop-free depth (see the `bounds` module).
//!
//! All rounds are synchronous: round-N messages are computed exclusively
//! from round-(N−1) messages. Sums over neighbors accumulate in ascending
//! node order, so trajectories are deterministic.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

use crate::graph::{NodeId, SensorNetwork};
use crate::linalg::{min_symmetric_eigenvalue, operator_norm, symmetrize};

/// A communication direction along an existing edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectedEdge {
    pub from: NodeId,
    pub to: NodeId,
}

impl DirectedEdge {
    pub fn new(from: NodeId, to: NodeId) -> Self {
        Self { from, to }
    }
}

impl fmt::Display for DirectedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

/// Information pair sent along a directed edge. `q` is sized by the state
/// dimension of the *receiving* node and is symmetric PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub alpha: DVector<f64>,
    pub q: DMatrix<f64>,
}

impl Message {
    pub fn zero(dim: usize) -> Self {
        Self { alpha: DVector::zeros(dim), q: DMatrix::zeros(dim, dim) }
    }
}

pub type MessageMap = BTreeMap<DirectedEdge, Message>;

/// Per-node information state and the estimate derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeBelief {
    pub alpha: DVector<f64>,
    pub q: DMatrix<f64>,
    pub x_hat: DVector<f64>,
    pub sigma: DMatrix<f64>,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("missing sampled measurement z at node {0}")]
    MissingNodeMeasurement(NodeId),
    #[error("missing sampled measurement z on edge ({0},{1})")]
    MissingEdgeMeasurement(NodeId, NodeId),
    #[error("singular information matrix Q_i(N) - Q_{{j->i}}(N-1) on edge {edge} at round {round}")]
    SingularInformation { edge: DirectedEdge, round: usize },
    #[error("singular belief information matrix at node {node}, round {round}")]
    SingularBelief { node: NodeId, round: usize },
    #[error("initialization entry {edge}: {reason}")]
    BadInitEntry { edge: DirectedEdge, reason: String },
    #[error("rounds must be >= 1")]
    NoRounds,
}

/// A complete round-0 message assignment: one PSD information matrix (and a
/// zero information vector) per directed edge.
#[derive(Debug, Clone, PartialEq)]
pub struct InitSet {
    entries: MessageMap,
    warnings: Vec<String>,
}

impl InitSet {
    /// The all-zero initialization used by the algorithm itself.
    pub fn zeros(net: &SensorNetwork) -> Self {
        let mut entries = MessageMap::new();
        for (key, _) in net.edges() {
            for (from, to) in [(key.lo(), key.hi()), (key.hi(), key.lo())] {
                entries.insert(DirectedEdge::new(from, to), Message::zero(net.dim(to)));
            }
        }
        Self { entries, warnings: Vec::new() }
    }

    /// The maximal admissible initialization `Q_{j→i}(0) = C_{i,j}ᵀ R_{i,j}⁻¹ C_{i,j}`.
    pub fn maximal(net: &SensorNetwork) -> Self {
        let mut entries = MessageMap::new();
        for (key, _) in net.edges() {
            for (from, to) in [(key.lo(), key.hi()), (key.hi(), key.lo())] {
                let view = net.joint_from(to, from).expect("edge exists");
                let r_inv = crate::linalg::spd_inverse(view.r).expect("validated edge noise");
                let q = symmetrize(&(view.c_self.transpose() * r_inv * view.c_self));
                entries.insert(
                    DirectedEdge::new(from, to),
                    Message { alpha: DVector::zeros(net.dim(to)), q },
                );
            }
        }
        Self { entries, warnings: Vec::new() }
    }

    /// Custom information matrices per directed edge; missing edges default
    /// to zero, information vectors are zero. Entries must be symmetric PSD
    /// and sized by the receiving node. Inadmissibility (an entry above the
    /// joint information cap) is not an error, since the engine only needs
    /// invertibility, but it is recorded in [`InitSet::warnings`] at
    /// construction since the contraction guarantees assume it.
    pub fn from_entries(
        net: &SensorNetwork,
        entries: BTreeMap<DirectedEdge, DMatrix<f64>>,
    ) -> Result<Self, EngineError> {
        let mut init = Self::zeros(net);
        for (edge, q) in entries {
            let slot = init
                .entries
                .get_mut(&edge)
                .ok_or_else(|| EngineError::BadInitEntry {
                    edge,
                    reason: "no such directed edge".into(),
                })?;
            let dim = net.dim(edge.to);
            if q.nrows() != dim || q.ncols() != dim {
                return Err(EngineError::BadInitEntry {
                    edge,
                    reason: format!("matrix is {}x{}, receiver has dimension {dim}", q.nrows(), q.ncols()),
                });
            }
            let min_eig = min_symmetric_eigenvalue(&q);
            if min_eig < -1e-8 {
                return Err(EngineError::BadInitEntry {
                    edge,
                    reason: format!("not positive semidefinite (min eig {min_eig:.3e})"),
                });
            }
            slot.q = symmetrize(&q);
        }
        init.warnings = init.admissibility_warnings(net);
        Ok(init)
    }

    pub fn message(&self, edge: DirectedEdge) -> Option<&Message> {
        self.entries.get(&edge)
    }

    pub fn messages(&self) -> &MessageMap {
        &self.entries
    }

    /// Warnings collected when the set was built from custom entries.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Entries violating the admissibility hypothesis
    /// `0 ⪯ Q_{(i,j),0} ⪯ C_{i,j}ᵀ R_{i,j}⁻¹ C_{i,j}` of the contraction
    /// guarantee. The engine runs fine regardless; the contraction and sandwich
    /// guarantees need admissibility, so callers usually want to surface
    /// these.
    pub fn admissibility_warnings(&self, net: &SensorNetwork) -> Vec<String> {
        let mut warnings = Vec::new();
        for (edge, msg) in &self.entries {
            let view = net.joint_from(edge.to, edge.from).expect("edge exists");
            let r_inv = match crate::linalg::spd_inverse(view.r) {
                Ok(inv) => inv,
                Err(_) => continue,
            };
            let cap = symmetrize(&(view.c_self.transpose() * r_inv * view.c_self));
            let below = min_symmetric_eigenvalue(&msg.q);
            let above = min_symmetric_eigenvalue(&(&cap - &msg.q));
            if below < -1e-9 {
                warnings.push(format!("init {edge}: not PSD (min eig {below:.3e})"));
            }
            if above < -1e-9 {
                warnings.push(format!(
                    "init {edge}: exceeds joint information cap (min eig of cap - Q0 is {above:.3e})"
                ));
            }
        }
        warnings
    }
}

/// The standard pair of bracketing initializations: all-zero and maximal.
pub fn standard_inits(net: &SensorNetwork) -> (InitSet, InitSet) {
    (InitSet::zeros(net), InitSet::maximal(net))
}

/// State after one synchronous round.
#[derive(Debug, Clone)]
pub struct RoundState {
    pub beliefs: BTreeMap<NodeId, NodeBelief>,
    pub messages: MessageMap,
}

/// Full history of a run: round-0 messages (the initialization) plus one
/// [`RoundState`] per round `1..=N`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    init: MessageMap,
    rounds: Vec<RoundState>,
}

impl Trajectory {
    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }

    /// Beliefs after round `n` (1-based).
    pub fn beliefs(&self, n: usize) -> &BTreeMap<NodeId, NodeBelief> {
        &self.rounds[n - 1].beliefs
    }

    pub fn belief(&self, node: NodeId, n: usize) -> &NodeBelief {
        &self.beliefs(n)[&node]
    }

    /// Messages sent at round `n`; `n = 0` returns the initialization.
    pub fn messages(&self, n: usize) -> &MessageMap {
        if n == 0 {
            &self.init
        } else {
            &self.rounds[n - 1].messages
        }
    }

    pub fn final_beliefs(&self) -> &BTreeMap<NodeId, NodeBelief> {
        &self.rounds.last().expect("at least one round").beliefs
    }

    /// Per-round, per-node mismatch against a reference solution, as CSV
    /// with columns `round,node,mismatch_x,mismatch_cov`.
    pub fn mismatch_csv(&self, reference: &BTreeMap<NodeId, (DVector<f64>, DMatrix<f64>)>) -> String {
        let mut out = String::from("round,node,mismatch_x,mismatch_cov\n");
        for (round_idx, state) in self.rounds.iter().enumerate() {
            for (node, belief) in &state.beliefs {
                let Some((x_ref, cov_ref)) = reference.get(node) else { continue };
                let dx = (&belief.x_hat - x_ref).norm();
                let dcov = operator_norm(&(&belief.sigma - cov_ref));
                out.push_str(&format!("{},{},{},{}\n", round_idx + 1, node, dx, dcov));
            }
        }
        out
    }
}

struct NodePrior {
    info: DMatrix<f64>,
    info_vec: DVector<f64>,
}

fn node_priors(net: &SensorNetwork) -> Result<BTreeMap<NodeId, NodePrior>, EngineError> {
    let mut priors = BTreeMap::new();
    for id in net.node_ids() {
        let meas = net.self_measurement(id);
        let z = meas.z.as_ref().ok_or(EngineError::MissingNodeMeasurement(id))?;
        let r_inv = crate::linalg::spd_inverse(&meas.r)
            .map_err(|_| EngineError::SingularBelief { node: id, round: 0 })?;
        let ct_rinv = meas.c.transpose() * r_inv;
        priors.insert(
            id,
            NodePrior { info: symmetrize(&(&ct_rinv * &meas.c)), info_vec: &ct_rinv * z },
        );
    }
    Ok(priors)
}

/// One synchronous round: fuse `prev_messages` into beliefs, then produce
/// the round-`round` outgoing messages. `prev_messages` must hold one entry
/// per directed edge (as produced by an [`InitSet`] or a previous step);
/// incomplete maps panic.
pub fn step(
    net: &SensorNetwork,
    prev_messages: &MessageMap,
    round: usize,
) -> Result<(BTreeMap<NodeId, NodeBelief>, MessageMap), EngineError> {
    let priors = node_priors(net)?;
    step_with_priors(net, &priors, prev_messages, round)
}

fn step_with_priors(
    net: &SensorNetwork,
    priors: &BTreeMap<NodeId, NodePrior>,
    prev_messages: &MessageMap,
    round: usize,
) -> Result<(BTreeMap<NodeId, NodeBelief>, MessageMap), EngineError> {
    let mut beliefs = BTreeMap::new();
    for id in net.node_ids() {
        let prior = &priors[&id];
        let mut q = prior.info.clone();
        let mut alpha = prior.info_vec.clone();
        for &j in net.neighbors(id) {
            let msg = &prev_messages[&DirectedEdge::new(j, id)];
            q += &msg.q;
            alpha += &msg.alpha;
        }
        symmetrize_in_place(&mut q);
        let chol = Cholesky::new(q.clone())
            .ok_or(EngineError::SingularBelief { node: id, round })?;
        let x_hat = chol.solve(&alpha);
        let sigma = symmetrize(&chol.inverse());
        beliefs.insert(id, NodeBelief { alpha, q, x_hat, sigma });
    }

    let mut messages = MessageMap::new();
    for id in net.node_ids() {
        let belief = &beliefs[&id];
        for &j in net.neighbors(id) {
            let edge = DirectedEdge::new(id, j);
            let back = &prev_messages[&DirectedEdge::new(j, id)];
            let view = net.joint_from(id, j).expect("edge exists");
            let z_joint = view
                .z
                .ok_or(EngineError::MissingEdgeMeasurement(id, j))?;

            let reduced = symmetrize(&(&belief.q - &back.q));
            let chol = Cholesky::new(reduced)
                .ok_or(EngineError::SingularInformation { edge, round })?;
            let mean = chol.solve(&(&belief.alpha - &back.alpha));

            let z_msg = z_joint - view.c_self * &mean;
            let r_msg = symmetrize(&(view.r + view.c_self * chol.inverse() * view.c_self.transpose()));
            let r_chol = Cholesky::new(r_msg)
                .ok_or(EngineError::SingularInformation { edge, round })?;
            let r_inv = symmetrize(&r_chol.inverse());

            let ct_rinv = view.c_other.transpose() * r_inv;
            messages.insert(
                edge,
                Message {
                    alpha: &ct_rinv * z_msg,
                    q: symmetrize(&(ct_rinv * view.c_other)),
                },
            );
        }
    }
    Ok((beliefs, messages))
}

fn symmetrize_in_place(m: &mut DMatrix<f64>) {
    crate::linalg::symmetrize_mut(m);
}

/// Run `rounds` synchronous rounds from the given initialization.
///
/// The trajectory is a pure function of the network content and the
/// initialization; re-running with identical inputs reproduces it bit for
/// bit.
pub fn run(net: &SensorNetwork, init: &InitSet, rounds: usize) -> Result<Trajectory, EngineError> {
    if rounds == 0 {
        return Err(EngineError::NoRounds);
    }
    let priors = node_priors(net)?;
    let mut states = Vec::with_capacity(rounds);
    let mut prev = init.messages().clone();
    for round in 1..=rounds {
        let (beliefs, messages) = step_with_priors(net, &priors, &prev, round)?;
        prev = messages.clone();
        states.push(RoundState { beliefs, messages });
    }
    Ok(Trajectory { init: init.messages().clone(), rounds: states })
}

/// Run with the algorithm's own all-zero initialization.
pub fn run_standard(net: &SensorNetwork, rounds: usize) -> Result<Trajectory, EngineError> {
    run(net, &InitSet::zeros(net), rounds)
}
