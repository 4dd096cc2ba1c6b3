//! Linear solves with `S = alpha D - beta K` (`alpha >= 0`, `beta > 0`),
//! which is positive definite unless `alpha = 0` on an all-Kirchhoff
//! network. In that singular case the system is solved for a compatible
//! right-hand side (`sum b = 0`) and the representative returned is
//! whatever the solver produces; callers fix the gauge.

use std::collections::HashMap;

use super::DiscreteOperator;
use crate::error::{invalid, Error, Result};
use crate::linalg::{compensated_sum, dot, max_abs, EnvelopeCholesky, SymTridiagonal};

pub trait LinearSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn factor<'a>(&self, op: &'a DiscreteOperator, alpha: f64, beta: f64) -> Result<Box<dyn FactoredSystem + 'a>>;
}

pub trait FactoredSystem: Send + Sync {
    fn solve(&self, b: &[f64]) -> Result<Vec<f64>>;
}

fn check_shift(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
        return Err(invalid(format!("need alpha >= 0 and beta > 0, got {alpha}, {beta}")));
    }
    Ok(())
}

/// `S x` for `S = alpha D - beta K`.
pub fn apply_shifted(op: &DiscreteOperator, alpha: f64, beta: f64, x: &[f64]) -> Vec<f64> {
    let mut y = op.apply_k(x);
    for ((v, d), xi) in y.iter_mut().zip(op.volumes()).zip(x) {
        *v = alpha * d * xi - beta * *v;
    }
    y
}

/// Direct solve by eliminating each edge's interior chain. Every chain is
/// a constant symmetric tridiagonal matrix, so its contribution to the
/// node equations needs only two corner entries of its inverse. The
/// remaining node system is factored by an envelope Cholesky after reverse
/// Cuthill-McKee reordering. A singular all-Kirchhoff system is made
/// definite by pinning the last node to zero; its right-hand sides are first
/// projected onto the range so rounding-level incompatibility is spread over
/// all rows instead of landing on the pinned one.
#[derive(Debug, Clone, Copy, Default)]
pub struct ChainCondensation;

struct Condensed<'a> {
    op: &'a DiscreteOperator,
    beta: f64,
    chains: Vec<SymTridiagonal>,
    chain_of_edge: Vec<usize>,
    /// `None` when there are no free node unknowns.
    nodes: Option<EnvelopeCholesky>,
    node_count: usize,
    /// Total volume when the system is singular.
    singular_volume: Option<f64>,
}

impl LinearSolver for ChainCondensation {
    fn name(&self) -> &'static str {
        "condensed"
    }

    fn factor<'a>(&self, op: &'a DiscreteOperator, alpha: f64, beta: f64) -> Result<Box<dyn FactoredSystem + 'a>> {
        check_shift(alpha, beta)?;
        let layout = &op.layout;
        let mut cache: HashMap<(usize, u64), usize> = HashMap::new();
        let mut chains = Vec::new();
        let mut chain_of_edge = Vec::with_capacity(layout.intervals.len());
        for (&n, &h) in layout.intervals.iter().zip(&layout.spacing) {
            let idx = *cache.entry((n, h.to_bits())).or_insert_with(|| {
                chains.push(SymTridiagonal::new(n - 1, alpha * h + 2.0 * beta / h, -beta / h));
                chains.len() - 1
            });
            chain_of_edge.push(idx);
        }
        if chains.iter().any(|c| !c.is_positive_definite()) {
            return Err(Error::NumericalFailure("edge chain is not positive definite".into()));
        }

        let node_count = layout.node_unknowns();
        let singular = alpha == 0.0 && !op.has_dirichlet();
        let pinned = singular.then(|| node_count - 1);
        let mut triplets = Vec::new();
        for (u, links) in op.node_links.iter().enumerate() {
            let diag: f64 = alpha * op.volumes()[u] + links.iter().map(|l| beta / l.h).sum::<f64>();
            triplets.push((u, u, diag));
        }
        for (e, &(tail, head)) in op.edge_nodes.iter().enumerate() {
            let (a, b) = chains[chain_of_edge[e]].inverse_corners();
            let g = (beta / layout.spacing[e]).powi(2);
            let ends = [(tail, a, b), (head, a, b)];
            // tail sees (T^-1)_11 for itself and (T^-1)_n1 for the head; head mirrors
            for (i, &(ui, _, _)) in ends.iter().enumerate() {
                for (j, &(uj, _, _)) in ends.iter().enumerate() {
                    if let (Some(ui), Some(uj)) = (ui, uj) {
                        triplets.push((ui, uj, -g * if i == j { a } else { b }));
                    }
                }
            }
        }
        let free = node_count - pinned.map_or(0, |_| 1);
        triplets.retain(|&(i, j, _)| i < free && j < free);
        // the envelope factor reads the lower triangle
        let lower: Vec<_> = triplets.into_iter().filter(|&(i, j, _)| i >= j).collect();
        let nodes = if free > 0 {
            Some(EnvelopeCholesky::factor(free, &lower)?)
        } else {
            None
        };
        Ok(Box::new(Condensed {
            op,
            beta,
            chains,
            chain_of_edge,
            nodes,
            node_count,
            singular_volume: singular.then(|| compensated_sum(op.volumes().iter().copied())),
        }))
    }
}

impl Condensed<'_> {
    fn chain_solve(&self, e: usize, rhs: &mut [f64]) {
        self.chains[self.chain_of_edge[e]].solve_in_place(rhs);
    }
}

impl FactoredSystem for Condensed<'_> {
    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let op = self.op;
        if b.len() != op.dim() {
            return Err(invalid(format!("right-hand side has {} entries, system {}", b.len(), op.dim())));
        }
        let projected: Vec<f64>;
        let b = match self.singular_volume {
            Some(volume) => {
                let shift = compensated_sum(b.iter().copied()) / volume;
                projected = b.iter().zip(op.volumes()).map(|(v, d)| v - shift * d).collect();
                &projected[..]
            }
            None => b,
        };
        let layout = &op.layout;
        let mut node_rhs = b[..self.node_count].to_vec();
        let mut scratch = Vec::new();
        for (e, &(tail, head)) in op.edge_nodes.iter().enumerate() {
            if tail.is_none() && head.is_none() {
                continue;
            }
            let r = layout.interior_range(e);
            scratch.clear();
            scratch.extend_from_slice(&b[r]);
            self.chain_solve(e, &mut scratch);
            let c = self.beta / layout.spacing[e];
            if let Some(u) = tail {
                node_rhs[u] += c * scratch[0];
            }
            if let Some(u) = head {
                node_rhs[u] += c * scratch[scratch.len() - 1];
            }
        }
        let mut x = vec![0.0; op.dim()];
        if let Some(nodes) = &self.nodes {
            let free = nodes.dim();
            let sol = nodes.solve(&node_rhs[..free]);
            x[..free].copy_from_slice(&sol);
        }
        let (node_values, interior) = x.split_at_mut(self.node_count);
        let offset = self.node_count;
        for (e, &(tail, head)) in op.edge_nodes.iter().enumerate() {
            let r = layout.interior_range(e);
            let c = self.beta / layout.spacing[e];
            let seg = &mut interior[r.start - offset..r.end - offset];
            seg.copy_from_slice(&b[r]);
            if let Some(u) = tail {
                seg[0] += c * node_values[u];
            }
            if let Some(u) = head {
                let last = seg.len() - 1;
                seg[last] += c * node_values[u];
            }
            self.chain_solve(e, seg);
        }
        Ok(x)
    }
}

/// Jacobi-preconditioned conjugate gradients on `S`; matrix-free.
#[derive(Debug, Clone, Copy)]
pub struct ConjugateGradient {
    pub rel_tol: f64,
    /// Iteration cap as a multiple of the system size.
    pub max_sweeps: usize,
}

impl Default for ConjugateGradient {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_sweeps: 4,
        }
    }
}

struct CgSystem<'a> {
    op: &'a DiscreteOperator,
    alpha: f64,
    beta: f64,
    inv_diag: Vec<f64>,
    rel_tol: f64,
    max_iterations: usize,
}

impl LinearSolver for ConjugateGradient {
    fn name(&self) -> &'static str {
        "cg"
    }

    fn factor<'a>(&self, op: &'a DiscreteOperator, alpha: f64, beta: f64) -> Result<Box<dyn FactoredSystem + 'a>> {
        check_shift(alpha, beta)?;
        let mut diag = vec![0.0; op.dim()];
        for (i, j, v) in op.k_triplets() {
            if i == j {
                diag[i] += v;
            }
        }
        let inv_diag = diag
            .iter()
            .zip(op.volumes())
            .map(|(k, d)| 1.0 / (alpha * d - beta * k))
            .collect();
        Ok(Box::new(CgSystem {
            op,
            alpha,
            beta,
            inv_diag,
            rel_tol: self.rel_tol,
            max_iterations: self.max_sweeps * op.dim().max(10),
        }))
    }
}

impl FactoredSystem for CgSystem<'_> {
    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.op.dim();
        if b.len() != n {
            return Err(invalid(format!("right-hand side has {} entries, system {n}", b.len())));
        }
        let b_norm = dot(b, b).sqrt();
        let mut x = vec![0.0; n];
        if b_norm == 0.0 {
            return Ok(x);
        }
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&self.inv_diag).map(|(a, d)| a * d).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for _ in 0..self.max_iterations {
            let q = apply_shifted(self.op, self.alpha, self.beta, &p);
            let step = rz / dot(&p, &q);
            x.iter_mut().zip(&p).for_each(|(a, b)| *a += step * b);
            r.iter_mut().zip(&q).for_each(|(a, b)| *a -= step * b);
            if dot(&r, &r).sqrt() <= self.rel_tol * b_norm {
                return Ok(x);
            }
            z.iter_mut()
                .zip(&r)
                .zip(&self.inv_diag)
                .for_each(|((z, r), d)| *z = r * d);
            let rz_next = dot(&r, &z);
            let gamma = rz_next / rz;
            rz = rz_next;
            p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + gamma * *p);
        }
        Err(Error::NumericalFailure(format!(
            "conjugate gradients stalled at relative residual {:.3e} after {} iterations",
            dot(&r, &r).sqrt() / b_norm,
            self.max_iterations
        )))
    }
}

/// A solve followed by iterative refinement against `S`, repeated while the
/// residual keeps shrinking (at most `MAX_REFINEMENTS` times).
pub fn solve_refined(
    system: &dyn FactoredSystem,
    op: &DiscreteOperator,
    alpha: f64,
    beta: f64,
    b: &[f64],
) -> Result<Vec<f64>> {
    let residual = |x: &[f64]| -> Vec<f64> {
        let sx = apply_shifted(op, alpha, beta, x);
        b.iter().zip(&sx).map(|(a, c)| a - c).collect()
    };
    let mut x = system.solve(b)?;
    let mut r = residual(&x);
    let mut size = max_abs(&r);
    for _ in 0..MAX_REFINEMENTS {
        if !(size > 0.0) {
            break;
        }
        let dx = system.solve(&r)?;
        let candidate: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
        let r_next = residual(&candidate);
        let next = max_abs(&r_next);
        if !(next < size) {
            break;
        }
        (x, r, size) = (candidate, r_next, next);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("linear solve produced non-finite values".into()));
    }
    Ok(x)
}

pub const MAX_REFINEMENTS: usize = 3;
