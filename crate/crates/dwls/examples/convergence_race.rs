//! Message passing versus block-Jacobi on the desk-scale network.
//!
//! Both methods target the same centralized WLS solution of a 60-node
//! loopy network. Block-Jacobi iterates the global normal equations one
//! node block at a time and converges linearly at the rate of its
//! iteration matrix; message passing forgets its initialization at the
//! contraction rate `rho` and reaches the 1e-6 combined-mismatch line in
//! fewer rounds.
//!
//! ```bash
//! cargo run --example convergence_race
//! ```

use std::collections::BTreeMap;

use dwls::graph::NodeId;
use dwls::harness::{combined_mismatch, generate, jacobi_baseline, GeneratorSpec, MeasurementModel, TopologyFamily};
use nalgebra::DVector;

fn main() {
    let spec = GeneratorSpec { family: TopologyFamily::RingOfTrees, nodes: 60, degree: 3 };
    let net = generate(&spec, &MeasurementModel::default(), 60).unwrap();
    println!("network: {} nodes, {} edges, diameter {}", net.node_count(), net.edge_count(), net.graph_stats().unwrap().diameter);

    let oracle = dwls::oracle::solve(&net).unwrap();
    let reference: BTreeMap<NodeId, DVector<f64>> =
        net.node_ids().map(|id| (id, oracle.x_at(id))).collect();

    let rounds = 18;
    let traj = dwls::run_standard(&net, rounds).unwrap();
    let jacobi = jacobi_baseline(&net, rounds).unwrap();

    let mut dwls_hit = None;
    let mut jacobi_hit = None;
    println!("\nround | combined mismatch: message passing |  block-Jacobi");
    for n in 1..=rounds {
        let est: BTreeMap<NodeId, DVector<f64>> =
            traj.beliefs(n).iter().map(|(&id, b)| (id, b.x_hat.clone())).collect();
        let d = combined_mismatch(&est, &reference);
        let j = combined_mismatch(&jacobi[n - 1], &reference);
        if dwls_hit.is_none() && d <= 1e-6 {
            dwls_hit = Some(n);
        }
        if jacobi_hit.is_none() && j <= 1e-6 {
            jacobi_hit = Some(n);
        }
        println!("{n:>5} | {d:>35.3e} | {j:>13.3e}");
    }
    println!(
        "\n1e-6 reached at round {:?} (message passing) vs {:?} (block-Jacobi)",
        dwls_hit, jacobi_hit
    );
}
