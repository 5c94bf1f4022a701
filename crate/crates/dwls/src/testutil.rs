//! Small network constructors shared across unit tests.

use nalgebra::{DMatrix, DVector};

use crate::graph::{NodeId, SelfMeasurement, SensorNetwork};

pub(crate) use crate::verify::synth::{
    random_connected_edges, random_network, random_tree_edges,
};

/// Scalar network with unit C and R everywhere and zero measurements.
pub(crate) fn unit_network(n: usize, edges: &[(usize, usize)]) -> SensorNetwork {
    let mut net = SensorNetwork::new();
    for i in 1..=n {
        net.add_node(
            NodeId::new(i),
            1,
            SelfMeasurement {
                c: DMatrix::from_element(1, 1, 1.0),
                r: DMatrix::from_element(1, 1, 1.0),
                z: Some(DVector::from_element(1, 0.0)),
            },
        )
        .unwrap();
    }
    for &(i, j) in edges {
        net.add_edge(
            NodeId::new(i),
            NodeId::new(j),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            Some(DVector::from_element(1, 0.0)),
        )
        .unwrap();
    }
    net
}

/// The worked 2-node example: z1 = a, z2 = b, z12 = c with all C = R = 1.
pub(crate) fn two_node_chain(a: f64, b: f64, c: f64) -> SensorNetwork {
    let mut net = unit_network(2, &[]);
    net.self_measurement_mut(NodeId::new(1)).z = Some(DVector::from_element(1, a));
    net.self_measurement_mut(NodeId::new(2)).z = Some(DVector::from_element(1, b));
    net.add_edge(
        NodeId::new(1),
        NodeId::new(2),
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_element(1, 1, 1.0),
        Some(DVector::from_element(1, c)),
    )
    .unwrap();
    net
}

/// Self measurement with C = I3, R = 0.01 I3.
pub(crate) fn paper_node(z: Option<DVector<f64>>) -> SelfMeasurement {
    SelfMeasurement { c: DMatrix::identity(3, 3), r: DMatrix::identity(3, 3) * 0.01, z }
}

/// Joint measurement with C = 0.4 I3 on both ends and R = 0.01 I3.
pub(crate) fn paper_edge(net: &mut SensorNetwork, i: usize, j: usize) {
    net.add_edge(
        NodeId::new(i),
        NodeId::new(j),
        DMatrix::identity(3, 3) * 0.4,
        DMatrix::identity(3, 3) * 0.4,
        DMatrix::identity(3, 3) * 0.01,
        Some(DVector::zeros(3)),
    )
    .unwrap();
}
