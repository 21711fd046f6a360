//! Small built-in instances: the path and star graphs and the two-vertex
//! self-loop graph used throughout the test suite and the golden fixtures.

use nalgebra::DMatrix;

use crate::oracle::Oracle;

/// Three-vertex path graph.
pub fn t1_path() -> Oracle {
    Oracle::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)])
}

/// Four-vertex star graph, center at vertex 0.
pub fn t2_star() -> Oracle {
    Oracle::from_edges(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)])
}

/// Star graph shifted by 6 on the diagonal.
pub fn t3_shifted_star() -> Oracle {
    Oracle::from_edges(
        4,
        &[
            (0, 0, 6.0),
            (1, 1, 6.0),
            (2, 2, 6.0),
            (3, 3, 6.0),
            (0, 1, 1.0),
            (0, 2, 1.0),
            (0, 3, 1.0),
        ],
    )
}

/// Two-vertex graph with unit coupling and self-loops of weight 2.
pub fn two_vertex_shifted() -> Oracle {
    Oracle::from_edges(2, &[(0, 0, 2.0), (1, 1, 2.0), (0, 1, 1.0)])
}

pub fn t1_dense() -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0])
}

/// Square of the path graph.
pub fn a1_tilde_dense() -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 1.0, 0.0, 1.0])
}

pub fn t2_dense() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, 1.0, 1.0, 1.0, //
            1.0, 0.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0,
        ],
    )
}

pub fn t3_dense() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            6.0, 1.0, 1.0, 1.0, //
            1.0, 6.0, 0.0, 0.0, //
            1.0, 0.0, 6.0, 0.0, //
            1.0, 0.0, 0.0, 6.0,
        ],
    )
}
