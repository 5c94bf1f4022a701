//! Distributed weighted least-squares estimation on sensor networks.
//!
//! Each node of an undirected measurement graph owns a slice of a global
//! state vector, observed through per-node self measurements and pairwise
//! joint measurements. The crate provides:
//!
//! - [`graph`]: the measurement graph, validation, and the graph metrics
//!   (diameter, eccentricities, loop-free depth) the accuracy analysis is
//!   phrased in;
//! - [`engine`]: the synchronous message-passing estimator, with pluggable
//!   round-0 message initializations and full trajectory capture;
//! - [`transform`]: the equivalent graph representations: computation-tree
//!   unrolling, collapsing a tree into a chain of super-nodes, and the
//!   breadth-first layered chain of the original graph;
//! - [`oracle`]: centralized WLS ground truth over networks, induced
//!   subgraphs, and chain systems (via the block-tridiagonal first-row
//!   recursion);
//! - [`linalg`]: the Riemannian metric on SPD matrices, the
//!   block-tridiagonal inverse recursion, and banded-inverse decay bounds;
//! - [`bounds`]: explicit, computable accuracy bounds for the covariance
//!   and estimate mismatch at a probe node, exponential in its loop-free
//!   depth;
//! - [`harness`]: seeded network generators, the experiment driver with CSV
//!   outputs, and a block-Jacobi baseline;
//! - [`verify`]: randomized invariant suites runnable from the CLI.
//!
//! ## Quick start
//!
//! ```
//! use dwls::graph::{NodeId, SelfMeasurement, SensorNetwork};
//! use nalgebra::{DMatrix, DVector};
//!
//! // Two scalar nodes with unit self measurements and one joint
//! // measurement z12 = x1 + x2 + v.
//! let mut net = SensorNetwork::new();
//! for (i, z) in [(1, 1.3), (2, -0.7)] {
//!     net.add_node(NodeId::new(i), 1, SelfMeasurement {
//!         c: DMatrix::from_element(1, 1, 1.0),
//!         r: DMatrix::from_element(1, 1, 1.0),
//!         z: Some(DVector::from_element(1, z)),
//!     }).unwrap();
//! }
//! net.add_edge(
//!     NodeId::new(1), NodeId::new(2),
//!     DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, 1.0),
//!     DMatrix::from_element(1, 1, 1.0), Some(DVector::from_element(1, 0.4)),
//! ).unwrap();
//! assert!(net.validate().is_pass());
//!
//! // Two rounds (diameter + 1) reach the centralized WLS solution.
//! let trajectory = dwls::run_standard(&net, 2).unwrap();
//! let oracle = dwls::oracle::solve(&net).unwrap();
//! let belief = trajectory.belief(NodeId::new(1), 2);
//! assert!((belief.x_hat[0] - oracle.x_at(NodeId::new(1))[0]).abs() < 1e-12);
//! ```
//!
//! ## Examples
//!
//! The examples directory is the guided tour, one runnable program per
//! capability:
//!
//! ```text
//! examples/
//! ├── two_node_chain.rs          # smallest network, solved by hand and by message passing
//! ├── tree_exactness.rs          # finite-time exactness on acyclic networks
//! ├── unroll_and_collapse.rs     # computation tree, DOT export, chain equivalence
//! ├── riemannian_contraction.rs  # the SPD metric and initialization forgetting
//! ├── accuracy_bounds.rs         # bound reports vs. measured mismatch at a probe
//! ├── convergence_race.rs        # message passing vs. block-Jacobi to 1e-6
//! └── depth_decay.rs             # per-depth mismatch maxima under the bound envelopes
//! ```
//!
//! ```bash
//! cargo run --example two_node_chain
//! cargo run --example accuracy_bounds
//! ```
//!
//! The `dwls` binary wraps the same library behind `gen`, `run`, `bounds`,
//! and `verify` subcommands for file-based workflows.

pub mod bounds;
pub mod engine;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod oracle;
pub mod transform;
pub mod verify;

#[cfg(test)]
pub(crate) mod testutil;

pub use engine::{run, run_standard, standard_inits, InitSet, Message, NodeBelief, Trajectory};
pub use graph::{GraphStats, LoopFreeDepth, NodeId, SensorNetwork};
pub use linalg::{riemannian_distance, SpdMatrix};
pub use oracle::GlobalSolution;
