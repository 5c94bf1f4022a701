//! The Riemannian metric on SPD matrices and why it matters here.
//!
//! `δ(P, Q) = sqrt(Σ log² σₖ(PQ⁻¹))` treats SPD matrices on a log scale:
//! congruences never increase it, and the information-fusion step
//! `W + B P⁻¹ Bᵀ` contracts it. Consequence: two runs of the estimator
//! that differ only in their round-0 message initialization approach each
//! other geometrically, at the rate `ρ` that also drives the accuracy
//! bounds.
//!
//! The example prints a few hand-checkable distances, then races two
//! admissible initializations (all-zero vs maximal) on a loopy network and
//! tabulates the measured distance between the node-1 information matrices
//! against the `ρ^{N−1} δ̄` envelope.
//!
//! ```bash
//! cargo run --example riemannian_contraction
//! ```

use dwls::bounds::covariance_bound;
use dwls::engine::standard_inits;
use dwls::graph::NodeId;
use dwls::harness::{generate, GeneratorSpec, MeasurementModel, TopologyFamily};
use dwls::linalg::riemannian_distance_raw;
use nalgebra::DMatrix;

fn main() {
    // Scalars first: δ(4, 1) = log 4, and inversion is an isometry.
    let p = DMatrix::from_element(1, 1, 4.0);
    let q = DMatrix::from_element(1, 1, 1.0);
    println!("δ(4·I, I)      = {:.6}  (log 4 = {:.6})", riemannian_distance_raw(&p, &q).unwrap(), 4.0f64.ln());
    println!("δ(I/4, I)      = {:.6}  (inversion invariance)", riemannian_distance_raw(&p.clone().try_inverse().unwrap(), &q).unwrap());

    let spec = GeneratorSpec { family: TopologyFamily::RingOfTrees, nodes: 30, degree: 3 };
    let net = generate(&spec, &MeasurementModel::default(), 8).unwrap();
    let probe = NodeId::new(1);
    let report = covariance_bound(&net, probe).unwrap();
    println!(
        "\n30-node loopy network: rho = {:.4}, delta_bar = {:.4} (contraction certified: {})",
        report.rho, report.delta_bar, report.applicable
    );

    let rounds = 8;
    let (zero, maximal) = standard_inits(&net);
    let traj_zero = dwls::run(&net, &zero, rounds).unwrap();
    let traj_max = dwls::run(&net, &maximal, rounds).unwrap();

    println!("\nround | δ(Q1(N,zero), Q1(N,maximal)) | envelope ρ^(N−1)·δ̄");
    for n in 1..=rounds {
        let d = riemannian_distance_raw(
            &traj_zero.belief(probe, n).q,
            &traj_max.belief(probe, n).q,
        )
        .unwrap();
        let envelope = report.rho.powi(n as i32 - 1) * report.delta_bar;
        println!("{n:>5} | {d:>28.3e} | {envelope:>18.3e}");
    }
    println!("\nthe two extreme admissible initializations bracket every other one,");
    println!("so this table certifies forgetting of round-0 conditions at rate ρ.");
}
