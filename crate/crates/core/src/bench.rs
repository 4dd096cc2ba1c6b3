//! Poisson scaling harness on growing hexagonal lattices.

use std::time::Instant;

use crate::error::{invalid, Result};
use crate::fd::Resolution;
use crate::graph::generators::build_hexagonal_lattice;
use crate::poisson::{mean_squared_error, solve_poisson_fd_detailed};
use crate::sources;

/// Lattice rows used for every size.
pub const LATTICE_ROWS: usize = 5;
/// Column counts giving `(N, M) = (106, 145) ... (6154, 8713)`.
pub const LATTICE_COLUMNS: [usize; 7] = [8, 16, 32, 64, 128, 256, 512];

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub nodes: usize,
    pub edges: usize,
    pub unknowns: usize,
    pub n_per_edge: usize,
    pub build_seconds: f64,
    pub solve_seconds: f64,
    pub mse: f64,
    pub relative_residual: f64,
}

impl ScalingRow {
    pub const CSV_HEADER: &'static str =
        "nodes,edges,unknowns,n_per_edge,build_seconds,solve_seconds,mse,relative_residual";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{:?},{:?},{:?},{:?}",
            self.nodes,
            self.edges,
            self.unknowns,
            self.n_per_edge,
            self.build_seconds,
            self.solve_seconds,
            self.mse,
            self.relative_residual
        )
    }
}

/// FD Poisson solve of `Delta phi = cos(2 pi x)` on a `LATTICE_ROWS x cols`
/// lattice, scored against `-cos(2 pi x) / (4 pi^2)`.
pub fn poisson_scaling_row(cols: usize, n_per_edge: usize, solver: &str) -> Result<ScalingRow> {
    if n_per_edge < 2 {
        return Err(invalid(format!("need at least 2 intervals per edge, got {n_per_edge}")));
    }
    let start = Instant::now();
    let net = build_hexagonal_lattice(LATTICE_ROWS, cols)?;
    let rho = sources::cos2pi(&net);
    let build_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let out = solve_poisson_fd_detailed(&net, &rho, &Resolution::Uniform(n_per_edge), solver)?;
    let solve_seconds = start.elapsed().as_secs_f64();

    let exact = sources::poisson_solution("cos2pi", &net).expect("cos2pi has a closed form");
    Ok(ScalingRow {
        nodes: net.node_count(),
        edges: net.edge_count(),
        unknowns: net.kirchhoff_count() + net.edge_count() * (n_per_edge - 1),
        n_per_edge,
        build_seconds,
        solve_seconds,
        mse: mean_squared_error(&out.solution, &exact, n_per_edge),
        relative_residual: out.relative_residual,
    })
}
