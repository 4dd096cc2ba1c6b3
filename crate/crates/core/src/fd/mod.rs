//! Finite-difference discretization of the generalized Laplacian.
//!
//! Unknowns are one shared value per Kirchhoff node (node order) followed by
//! the `N_i - 1` interior points of each edge (edge order). Dirichlet nodes
//! are pinned to zero and carry no unknown.
//!
//! Besides `Delta` itself the operator exposes cell volumes `D` (interior
//! points `h_i`, a node `sum h_e / 2` over its incident ends) and
//! `K = D Delta`, which is symmetric with `-K` positive semi-definite. The
//! solvers work with `K` and `D`.

pub mod eigen;
pub mod io;
pub mod solve;
pub mod time;

use crate::error::{invalid, Result};
use crate::graph::{BoundaryCondition, EdgeEnd, End, MetricNetwork};
use crate::{EdgeFunction, EdgeProfile, NetworkFunction};

/// Intervals per edge: one count for all edges or one per edge (edge order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Uniform(usize),
    PerEdge(Vec<usize>),
}

impl From<usize> for Resolution {
    fn from(n: usize) -> Self {
        Resolution::Uniform(n)
    }
}

impl Resolution {
    pub fn intervals(&self, net: &MetricNetwork) -> Result<Vec<usize>> {
        let counts = match self {
            Resolution::Uniform(n) => vec![*n; net.edge_count()],
            Resolution::PerEdge(v) => {
                if v.len() != net.edge_count() {
                    return Err(invalid(format!(
                        "{} interval counts for {} edges",
                        v.len(),
                        net.edge_count()
                    )));
                }
                v.clone()
            }
        };
        if let Some((i, n)) = counts.iter().enumerate().find(|(_, &n)| n < 2) {
            return Err(invalid(format!(
                "edge {} needs at least 2 intervals, got {n}",
                net.edges()[i].id
            )));
        }
        Ok(counts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridLayout {
    pub intervals: Vec<usize>,
    pub spacing: Vec<f64>,
    node_unknown: Vec<Option<usize>>,
    edge_offset: Vec<usize>,
    dim: usize,
}

impl GridLayout {
    pub fn new(net: &MetricNetwork, resolution: &Resolution) -> Result<Self> {
        let intervals = resolution.intervals(net)?;
        let spacing = net
            .edges()
            .iter()
            .zip(&intervals)
            .map(|(e, &n)| e.length / n as f64)
            .collect();
        let mut next = 0;
        let node_unknown = net
            .nodes()
            .iter()
            .map(|n| match n.bc {
                BoundaryCondition::Kirchhoff => {
                    next += 1;
                    Some(next - 1)
                }
                BoundaryCondition::Dirichlet => None,
            })
            .collect();
        let mut edge_offset = Vec::with_capacity(intervals.len());
        for &n in &intervals {
            edge_offset.push(next);
            next += n - 1;
        }
        Ok(Self {
            intervals,
            spacing,
            node_unknown,
            edge_offset,
            dim: next,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_unknowns(&self) -> usize {
        self.node_unknown.iter().flatten().count()
    }

    /// Unknown of the node at position `node`, if it is Kirchhoff.
    pub fn node_index(&self, node: usize) -> Option<usize> {
        self.node_unknown[node]
    }

    /// Unknown of interior point `j` (`1 <= j < N_i`) of edge `edge`.
    pub fn interior_index(&self, edge: usize, j: usize) -> usize {
        debug_assert!(j >= 1 && j < self.intervals[edge]);
        self.edge_offset[edge] + j - 1
    }

    /// Range of unknowns holding the interior of `edge`.
    pub fn interior_range(&self, edge: usize) -> std::ops::Range<usize> {
        let start = self.edge_offset[edge];
        start..start + self.intervals[edge] - 1
    }
}

/// One incident end of a Kirchhoff node as its row sees it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NodeLink {
    /// Unknown of the first interior point in from this end.
    pub neighbour: usize,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    pub layout: GridLayout,
    /// Per edge: unknowns of the tail and head nodes (`None` = Dirichlet).
    pub(crate) edge_nodes: Vec<(Option<usize>, Option<usize>)>,
    /// Per Kirchhoff unknown, its incident ends.
    pub(crate) node_links: Vec<Vec<NodeLink>>,
    volumes: Vec<f64>,
}

pub fn build_generalized_laplacian(net: &MetricNetwork, resolution: &Resolution) -> Result<DiscreteOperator> {
    DiscreteOperator::new(net, resolution)
}

impl DiscreteOperator {
    pub fn new(net: &MetricNetwork, resolution: &Resolution) -> Result<Self> {
        let layout = GridLayout::new(net, resolution)?;
        let edge_nodes: Vec<_> = (0..net.edge_count())
            .map(|i| {
                let (t, h) = net.endpoints(i);
                (layout.node_index(t), layout.node_index(h))
            })
            .collect();
        let mut node_links = vec![Vec::new(); layout.node_unknowns()];
        for (pos, ends) in net.incident_ends().into_iter().enumerate() {
            if let Some(u) = layout.node_index(pos) {
                node_links[u] = ends
                    .into_iter()
                    .map(|EdgeEnd { edge, end }| NodeLink {
                        neighbour: match end {
                            End::Tail => layout.interior_index(edge, 1),
                            End::Head => layout.interior_index(edge, layout.intervals[edge] - 1),
                        },
                        h: layout.spacing[edge],
                    })
                    .collect();
            }
        }
        let mut volumes = vec![0.0; layout.dim()];
        for (u, links) in node_links.iter().enumerate() {
            volumes[u] = links.iter().map(|l| 0.5 * l.h).sum();
        }
        for e in 0..layout.intervals.len() {
            let h = layout.spacing[e];
            volumes[layout.interior_range(e)].iter_mut().for_each(|v| *v = h);
        }
        Ok(Self {
            layout,
            edge_nodes,
            node_links,
            volumes,
        })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Diagonal of `D`.
    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn has_dirichlet(&self) -> bool {
        self.edge_nodes.iter().any(|(t, h)| t.is_none() || h.is_none())
    }

    /// `y = K x` with `K = D Delta`.
    pub fn apply_k(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        for (u, links) in self.node_links.iter().enumerate() {
            y[u] = links.iter().map(|l| (x[l.neighbour] - x[u]) / l.h).sum();
        }
        for (e, &(tail, head)) in self.edge_nodes.iter().enumerate() {
            let r = self.layout.interior_range(e);
            let inv_h = 1.0 / self.layout.spacing[e];
            let left = tail.map_or(0.0, |u| x[u]);
            let right = head.map_or(0.0, |u| x[u]);
            let xs = &x[r.clone()];
            let n = xs.len();
            for j in 0..n {
                let prev = if j == 0 { left } else { xs[j - 1] };
                let next = if j + 1 == n { right } else { xs[j + 1] };
                y[r.start + j] = (prev - 2.0 * xs[j] + next) * inv_h;
            }
        }
        y
    }

    /// `y = Delta x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.apply_k(x);
        y.iter_mut().zip(&self.volumes).for_each(|(v, d)| *v /= d);
        y
    }

    /// Nonzeros of `K` as `(row, col, value)`, duplicates summed per row.
    pub fn k_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::with_capacity(3 * self.dim());
        for (u, links) in self.node_links.iter().enumerate() {
            let mut diag = 0.0;
            for l in links {
                t.push((u, l.neighbour, 1.0 / l.h));
                diag -= 1.0 / l.h;
            }
            t.push((u, u, diag));
        }
        for (e, &(tail, head)) in self.edge_nodes.iter().enumerate() {
            let r = self.layout.interior_range(e);
            let inv_h = 1.0 / self.layout.spacing[e];
            for row in r.clone() {
                t.push((row, row, -2.0 * inv_h));
                let prev = if row == r.start { tail } else { Some(row - 1) };
                let next = if row + 1 == r.end { head } else { Some(row + 1) };
                for c in [prev, next].into_iter().flatten() {
                    t.push((row, c, inv_h));
                }
            }
        }
        t
    }

    /// Nonzeros of `Delta` (not symmetric in general).
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.k_triplets()
            .into_iter()
            .map(|(i, j, v)| (i, j, v / self.volumes[i]))
            .collect()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim(), self.dim());
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    /// Gershgorin bound on the spectral radius of `-Delta`.
    pub fn spectral_radius_bound(&self) -> f64 {
        let mut bound: f64 = 0.0;
        for (u, links) in self.node_links.iter().enumerate() {
            let s: f64 = links.iter().map(|l| 1.0 / l.h).sum();
            bound = bound.max(2.0 * s / self.volumes[u]);
        }
        for h in &self.layout.spacing {
            bound = bound.max(4.0 / (h * h));
        }
        bound
    }

    /// `<x, y>_D`
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        crate::linalg::compensated_sum(x.iter().zip(y).zip(&self.volumes).map(|((a, b), d)| a * b * d))
    }

    /// Values of `f` on the grid. Interior points are sampled directly; a
    /// node takes the volume-weighted average of its incident end values,
    /// so a source that jumps across a node still gets a consistent value.
    pub fn sample(&self, f: &NetworkFunction) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.dim()];
        let mut end_values = vec![(0.0, 0.0); self.edge_nodes.len()];
        for (e, ef) in f.edges().iter().enumerate() {
            let n = self.layout.intervals[e];
            let grid = sample_edge(ef, n);
            end_values[e] = (grid[0], grid[n]);
            let r = self.layout.interior_range(e);
            x[r].copy_from_slice(&grid[1..n]);
        }
        let mut weight = vec![0.0; self.layout.node_unknowns()];
        for (e, &(tail, head)) in self.edge_nodes.iter().enumerate() {
            let h = 0.5 * self.layout.spacing[e];
            if let Some(u) = tail {
                x[u] += h * end_values[e].0;
                weight[u] += h;
            }
            if let Some(u) = head {
                x[u] += h * end_values[e].1;
                weight[u] += h;
            }
        }
        for (u, w) in weight.into_iter().enumerate() {
            x[u] /= w;
        }
        Ok(x)
    }

    /// Grid vector back to a sampled network function (Dirichlet ends are 0).
    pub fn to_function(&self, net: &MetricNetwork, x: &[f64]) -> Result<NetworkFunction> {
        let edges = net
            .edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| {
                let (tail, head) = self.edge_nodes[e];
                let mut s = Vec::with_capacity(self.layout.intervals[e] + 1);
                s.push(tail.map_or(0.0, |u| x[u]));
                s.extend_from_slice(&x[self.layout.interior_range(e)]);
                s.push(head.map_or(0.0, |u| x[u]));
                EdgeFunction::samples(edge.id, edge.length, s)
            })
            .collect::<Result<Vec<_>>>()?;
        NetworkFunction::new(net, edges)
    }
}

/// `n + 1` samples of `f` at `x_j = j l / n`; reuses stored samples when the
/// grids coincide.
pub fn sample_edge(f: &EdgeFunction, n: usize) -> Vec<f64> {
    match &f.profile {
        EdgeProfile::Samples(s) if s.len() == n + 1 => s.clone(),
        _ => f.sample(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_hexagonal_lattice, build_interval, build_star, Edge, Node};

    fn dirichlet_interval() -> MetricNetwork {
        build_interval(1.0)
            .unwrap()
            .with_all_boundary_conditions(BoundaryCondition::Dirichlet)
    }

    #[test]
    fn dirichlet_edge_is_the_classic_tridiagonal() {
        let op = build_generalized_laplacian(&dirichlet_interval(), &4.into()).unwrap();
        let m = op.to_dense() / 16.0;
        #[rustfmt::skip]
        let expected = nalgebra::DMatrix::from_row_slice(3, 3, &[
            -2.0, 1.0, 0.0,
            1.0, -2.0, 1.0,
            0.0, 1.0, -2.0,
        ]);
        assert!((m - expected).amax() < 1e-14);
    }

    #[test]
    fn kirchhoff_edge_has_ghost_point_corners() {
        let op = build_generalized_laplacian(&build_interval(1.0).unwrap(), &4.into()).unwrap();
        // unknowns: node 0, node 1, interior 1..3; reorder to grid order
        let order = [0, 2, 3, 4, 1];
        let d = op.to_dense();
        let m = nalgebra::DMatrix::from_fn(5, 5, |i, j| d[(order[i], order[j])] / 16.0);
        #[rustfmt::skip]
        let expected = nalgebra::DMatrix::from_row_slice(5, 5, &[
            -2.0, 2.0, 0.0, 0.0, 0.0,
            1.0, -2.0, 1.0, 0.0, 0.0,
            0.0, 1.0, -2.0, 1.0, 0.0,
            0.0, 0.0, 1.0, -2.0, 1.0,
            0.0, 0.0, 0.0, 2.0, -2.0,
        ]);
        assert!((m - expected).amax() < 1e-14);
    }

    #[test]
    fn star_hub_row() {
        let n = 5;
        let op = build_generalized_laplacian(&build_star(3, 1.0).unwrap(), &n.into()).unwrap();
        let h = 1.0 / n as f64;
        let d = op.to_dense();
        let hub = 3;
        assert!((d[(hub, hub)] + 2.0 / (h * h)).abs() < 1e-9);
        let couplings: Vec<f64> = (0..op.dim()).filter(|&j| j != hub && d[(hub, j)] != 0.0).map(|j| d[(hub, j)]).collect();
        assert_eq!(couplings.len(), 3);
        for c in couplings {
            assert!((c - 2.0 / (3.0 * h * h)).abs() < 1e-9);
        }
    }

    #[test]
    fn constants_are_in_the_kernel_and_k_is_symmetric() {
        let net = build_hexagonal_lattice(2, 2).unwrap();
        let op = build_generalized_laplacian(&net, &Resolution::PerEdge((0..net.edge_count()).map(|i| 3 + i % 4).collect())).unwrap();
        let y = op.apply(&vec![1.0; op.dim()]);
        assert!(y.iter().all(|v| v.abs() < 1e-10));
        let mut k = nalgebra::DMatrix::<f64>::zeros(op.dim(), op.dim());
        for (i, j, v) in op.k_triplets() {
            k[(i, j)] += v;
        }
        assert!((&k - k.transpose()).amax() < 1e-12 * k.amax());
        // the apply path agrees with the assembled matrix
        let x: Vec<f64> = (0..op.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
        let dense = k * nalgebra::DVector::from_vec(x.clone());
        let fast = op.apply_k(&x);
        assert!(dense.iter().zip(&fast).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn layout_counts() {
        let net = build_star(3, 1.0)
            .unwrap()
            .with_boundary_condition(0, BoundaryCondition::Dirichlet)
            .unwrap();
        let op = build_generalized_laplacian(&net, &10.into()).unwrap();
        assert_eq!(op.dim(), 3 + 3 * 9);
        assert!(op.has_dirichlet());
        assert!(build_generalized_laplacian(&net, &1.into()).is_err());
        assert!(build_generalized_laplacian(&net, &Resolution::PerEdge(vec![4, 4])).is_err());
    }

    #[test]
    fn loops_count_both_ends() {
        let net = MetricNetwork::new(vec![Node::new(0)], vec![Edge::new(0, 0, 0, 1.0)]).unwrap();
        let op = build_generalized_laplacian(&net, &4.into()).unwrap();
        assert_eq!(op.node_links[0].len(), 2);
        assert!((op.volumes()[0] - 0.25).abs() < 1e-15);
        let y = op.apply(&vec![2.0; op.dim()]);
        assert!(y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn sampling_round_trip() {
        let net = build_star(3, 1.0).unwrap();
        let op = build_generalized_laplacian(&net, &8.into()).unwrap();
        let f = NetworkFunction::from_fn(&net, |_, _| EdgeProfile::Sinusoid { a: 0.0, b: 1.0, k: 2.0 * std::f64::consts::PI });
        let x = op.sample(&f).unwrap();
        let g = op.to_function(&net, &x).unwrap();
        for e in g.edges() {
            for (j, v) in e.sample(8).iter().enumerate() {
                assert!((v - (2.0 * std::f64::consts::PI * j as f64 / 8.0).cos()).abs() < 1e-12);
            }
        }
        assert!((op.sample(&g).unwrap().iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)) < 1e-15);
    }
}
