//! The coupling-condition matrix `T(k)` acting on `X = (A_1, B_1, ..., A_M, B_M)`.
//!
//! On edge `i` the solution of `f'' = -k^2 f` is `A_i sin(k x) + B_i cos(k x)`.
//! Its value is `B_i` at the tail and `A_i sin(k l_i) + B_i cos(k l_i)` at the
//! head; the derivative pointing from the node into the edge, divided by `k`,
//! is `A_i` at the tail and `-(A_i cos(k l_i) - B_i sin(k l_i))` at the head.
//!
//! Each node contributes `deg(u)` rows. A Kirchhoff node gets `deg(u) - 1`
//! continuity rows (value at the reference end minus value at each other
//! end; the reference is the end of the lowest edge id) and one row summing
//! the outward derivatives. A Dirichlet node gets one row per incident end
//! pinning the value to zero.

pub mod svd;

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::graph::{BoundaryCondition, EdgeEnd, End, MetricNetwork};
use crate::registry;

pub use svd::{SingularValueEstimator, SingularValueSummary};

/// Matrices up to this dimension go through a dense SVD by default.
pub const DENSE_SVD_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Continuity,
    Condition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowLabel {
    pub node_id: usize,
    pub kind: RowKind,
}

#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    pub k: f64,
    dim: usize,
    /// `(row, col, value)`, no duplicates.
    triplets: Vec<(usize, usize, f64)>,
    row_labels: Vec<RowLabel>,
}

/// `(column, coefficient)` pairs for the value of edge `i` at one end.
fn value_terms(ee: EdgeEnd, kl: f64) -> [(usize, f64); 2] {
    let (a, b) = (2 * ee.edge, 2 * ee.edge + 1);
    match ee.end {
        End::Tail => [(a, 0.0), (b, 1.0)],
        End::Head => [(a, kl.sin()), (b, kl.cos())],
    }
}

/// Outward derivative divided by `k`.
fn derivative_terms(ee: EdgeEnd, kl: f64) -> [(usize, f64); 2] {
    let (a, b) = (2 * ee.edge, 2 * ee.edge + 1);
    match ee.end {
        End::Tail => [(a, 1.0), (b, 0.0)],
        End::Head => [(a, -kl.cos()), (b, kl.sin())],
    }
}

impl CouplingMatrix {
    pub fn assemble(net: &MetricNetwork, k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(invalid(format!("T(k) needs k > 0, got {k}")));
        }
        let edges = net.edges();
        let kl = |ee: EdgeEnd| k * edges[ee.edge].length;
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(2 * edges.len());
        let mut row_labels = Vec::with_capacity(2 * edges.len());
        for (node, ends) in net.nodes().iter().zip(net.incident_ends()) {
            match node.bc {
                BoundaryCondition::Kirchhoff => {
                    let reference = ends[0];
                    for &other in &ends[1..] {
                        let mut row: Vec<(usize, f64)> = value_terms(reference, kl(reference)).to_vec();
                        row.extend(value_terms(other, kl(other)).iter().map(|&(c, v)| (c, -v)));
                        rows.push(row);
                        row_labels.push(RowLabel {
                            node_id: node.id,
                            kind: RowKind::Continuity,
                        });
                    }
                    rows.push(ends.iter().flat_map(|&ee| derivative_terms(ee, kl(ee))).collect());
                    row_labels.push(RowLabel {
                        node_id: node.id,
                        kind: RowKind::Condition,
                    });
                }
                BoundaryCondition::Dirichlet => {
                    for &ee in &ends {
                        rows.push(value_terms(ee, kl(ee)).to_vec());
                        row_labels.push(RowLabel {
                            node_id: node.id,
                            kind: RowKind::Condition,
                        });
                    }
                }
            }
        }
        let mut triplets = Vec::new();
        for (r, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (c, v) in row {
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => *lv += v,
                    _ => merged.push((c, v)),
                }
            }
            triplets.extend(merged.into_iter().filter(|&(_, v)| v != 0.0).map(|(c, v)| (r, c, v)));
        }
        debug_assert_eq!(row_labels.len(), 2 * edges.len());
        Ok(Self {
            k,
            dim: 2 * edges.len(),
            triplets,
            row_labels,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.triplets
    }

    pub fn row_labels(&self) -> &[RowLabel] {
        &self.row_labels
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.triplets {
            m[(i, j)] += v;
        }
        m
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            triplets: self.triplets.iter().map(|&(i, j, v)| (i, j, v * factor)).collect(),
            ..self.clone()
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for &(i, j, v) in &self.triplets {
            y[i] += v * x[j];
        }
        y
    }

    pub fn mul_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for &(i, j, v) in &self.triplets {
            y[j] += v * x[i];
        }
        y
    }

    /// Coordinate-format dump: one `row col value` line per nonzero.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = format!("% T(k) at k = {}, {} x {}\n", self.k, self.dim, self.dim);
        for &(i, j, v) in &self.triplets {
            let _ = writeln!(out, "{i} {j} {v}");
        }
        out
    }
}

pub fn assemble_t(net: &MetricNetwork, k: f64) -> Result<CouplingMatrix> {
    CouplingMatrix::assemble(net, k)
}

/// Name of the singular-value strategy used when none is requested.
pub fn default_estimator(dim: usize) -> &'static str {
    if dim <= DENSE_SVD_LIMIT {
        "dense-svd"
    } else {
        "inverse-iteration"
    }
}

/// `sigma_min / sigma_max` of `T(k)`; zero means numerically singular.
pub fn inverse_condition_number(net: &MetricNetwork, k: f64) -> Result<f64> {
    let t = CouplingMatrix::assemble(net, k)?;
    let est = registry::singular_value_estimators().create(default_estimator(t.dim()))?;
    est.extremes(&t)?.inverse_condition()
}

pub fn inverse_condition_number_with(
    net: &MetricNetwork,
    k: f64,
    estimator: &dyn SingularValueEstimator,
) -> Result<f64> {
    estimator.extremes(&CouplingMatrix::assemble(net, k)?)?.inverse_condition()
}

/// Closed-form secular determinant of a star with the given edge lengths,
/// `sum_i tan(k l_i) prod_j cos(k l_j)`, evaluated in the pole-free form
/// `sum_i sin(k l_i) prod_{j != i} cos(k l_j)`.
pub fn star_secular_determinant(k: f64, lengths: &[f64]) -> f64 {
    (0..lengths.len())
        .map(|i| {
            lengths
                .iter()
                .enumerate()
                .map(|(j, l)| if i == j { (k * l).sin() } else { (k * l).cos() })
                .product::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_interval, build_star, Edge, Node};
    use std::f64::consts::PI;

    #[test]
    fn star_matrix_matches_the_hand_assembled_form() {
        let k = 0.83;
        let t = CouplingMatrix::assemble(&build_star(3, 1.0).unwrap(), k).unwrap().to_dense();
        let (s, c) = (k.sin(), k.cos());
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(6, 6, &[
            1.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 1.0, 0.0,
            s, c, -s, -c, 0.0, 0.0,
            s, c, 0.0, 0.0, -s, -c,
            -c, s, -c, s, -c, s,
        ]);
        assert!((t - expected).amax() < 1e-15);
    }

    #[test]
    fn row_labels_follow_nodes() {
        let t = CouplingMatrix::assemble(&build_star(3, 1.0).unwrap(), 1.0).unwrap();
        let kinds: Vec<_> = t.row_labels().iter().map(|l| (l.node_id, l.kind)).collect();
        assert_eq!(kinds[0], (0, RowKind::Condition));
        assert_eq!(kinds[3], (3, RowKind::Continuity));
        assert_eq!(kinds[5], (3, RowKind::Condition));
    }

    #[test]
    fn single_kirchhoff_edge_determinant_is_proportional_to_sin() {
        let net = build_interval(1.0).unwrap();
        for k in [0.3, 1.1, 2.9, 4.4] {
            let det = CouplingMatrix::assemble(&net, k).unwrap().to_dense().determinant();
            // rows: A = 0 and -A cos + B sin = 0  =>  det = sin(k)
            assert!((det - k.sin()).abs() < 1e-14, "{det}");
        }
    }

    #[test]
    fn single_dirichlet_edge_rows() {
        let net = build_interval(1.0)
            .unwrap()
            .with_all_boundary_conditions(BoundaryCondition::Dirichlet);
        let k = 0.7;
        let t = CouplingMatrix::assemble(&net, k).unwrap().to_dense();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, k.sin(), k.cos()]);
        assert!((t - expected).amax() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_k() {
        let net = build_interval(1.0).unwrap();
        assert!(CouplingMatrix::assemble(&net, 0.0).is_err());
        assert!(CouplingMatrix::assemble(&net, -1.0).is_err());
    }

    #[test]
    fn secular_determinant_closed_forms() {
        for k in [0.2f64, 1.3, 2.0, 7.7] {
            let c = k.cos();
            assert!((star_secular_determinant(k, &[1.0; 3]) - 3.0 * c * c * k.sin()).abs() < 1e-14);
            assert!((star_secular_determinant(k, &[1.0; 4]) - 4.0 * c * c * c * k.sin()).abs() < 1e-14);
        }
        assert!(star_secular_determinant(PI / 2.0, &[1.0; 3]).abs() < 1e-15);
    }

    #[test]
    fn loop_rows_use_both_ends() {
        // a lasso: a loop at node 0 plus a pendant edge
        let net = MetricNetwork::new(
            vec![Node::new(0), Node::new(1)],
            vec![Edge::new(0, 0, 0, 1.0), Edge::new(1, 0, 1, 0.5)],
        )
        .unwrap();
        let t = CouplingMatrix::assemble(&net, 1.3).unwrap();
        assert_eq!(t.row_labels().len(), 4);
        // continuity between the loop tail (reference) and the loop head
        let d = t.to_dense();
        let kl = 1.3f64;
        assert!((d[(0, 0)] + kl.sin()).abs() < 1e-15);
        assert!((d[(0, 1)] - (1.0 - kl.cos())).abs() < 1e-15);
    }

    #[test]
    fn coordinate_dump_lists_every_nonzero() {
        let t = CouplingMatrix::assemble(&build_star(3, 1.0).unwrap(), 0.5).unwrap();
        let text = t.to_coordinate_text();
        assert_eq!(text.lines().count(), 1 + t.triplets().len());
        assert!(text.lines().nth(1).unwrap().starts_with("0 0 1"));
    }
}
