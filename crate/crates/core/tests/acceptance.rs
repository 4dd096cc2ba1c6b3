//! End-to-end acceptance checks. Each test prints one PASS/FAIL line with the
//! measured values (written straight to stderr so it survives output capture)
//! and then asserts on the same condition.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use metnet::bench::{poisson_scaling_row, LATTICE_COLUMNS};
use metnet::coupling::CouplingMatrix;
use metnet::fd::time::{solve_heat_fd, solve_wave_fd, StepConfig};
use metnet::fd::{eigen::fd_eigenvalues, DiscreteOperator, Resolution};
use metnet::graph::function::simpson;
use metnet::graph::generators::build_star_with_lengths;
use metnet::graph::{build_hexagonal_lattice, build_interval, build_random_line_network, build_star, BoundaryCondition};
use metnet::poisson::{max_error, mean_squared_error, solve_poisson_fd, solve_poisson_spectral};
use metnet::sources;
use metnet::spectral::{compute_spectrum, counting_function, weyl_check, SpectralConfig, Spectrum};
use metnet::symmetry::{character_table, decompose, permutation_character, predict_star_degeneracies};
use metnet::{inner_product, EdgeProfile, MetricNetwork, NetworkFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random-line network with 6 needles of unit length. Of the seeds below
/// 2000 that give 8 nodes and 10 edges this one has the longest shortest
/// edge (0.182).
const RANDOM_LINE_SEED: u64 = 1420;

fn report(name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{tag}] {name}: {detail}");
    assert!(pass, "{name}: {detail}");
}

fn single_threaded<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// `a sin(k x) + b cos(k x)` on every edge.
fn sinusoid(net: &MetricNetwork, a: f64, b: f64, k: f64) -> NetworkFunction {
    NetworkFunction::from_fn(net, |_, _| EdgeProfile::Sinusoid { a, b, k })
}

fn sinusoid_per_edge(net: &MetricNetwork, coeffs: &[(f64, f64)], k: f64) -> NetworkFunction {
    NetworkFunction::from_fn(net, |i, _| EdgeProfile::Sinusoid { a: coeffs[i].0, b: coeffs[i].1, k })
}

fn ip(f: &NetworkFunction, g: &NetworkFunction) -> f64 {
    inner_product(f, g).unwrap()
}

/// L2 distance between `f` and `+-g`, sign picked to match. Computed from
/// the sampled difference: `2 - 2 |<f, g>|` cancels below 1e-8.
fn distance_up_to_sign(f: &NetworkFunction, g: &NetworkFunction) -> f64 {
    let sign = ip(f, g).signum();
    let n = 20_000;
    let total: f64 = f
        .edges()
        .iter()
        .zip(g.edges())
        .map(|(a, b)| {
            let d: Vec<f64> = a.sample(n).iter().zip(b.sample(n)).map(|(x, y)| (x - sign * y).powi(2)).collect();
            simpson(&d, a.length)
        })
        .sum();
    total.max(0.0).sqrt()
}

/// Orthonormalizes per-edge `(sin, cos)` coefficient sets sharing one `k`.
fn gram_schmidt(net: &MetricNetwork, k: f64, sets: &[Vec<(f64, f64)>]) -> Vec<NetworkFunction> {
    let mut out: Vec<(Vec<(f64, f64)>, NetworkFunction)> = Vec::new();
    for set in sets {
        let mut c = set.clone();
        for (qc, q) in &out {
            let p = ip(&sinusoid_per_edge(net, &c, k), q);
            c.iter_mut().zip(qc).for_each(|(x, y)| {
                x.0 -= p * y.0;
                x.1 -= p * y.1;
            });
        }
        let f = sinusoid_per_edge(net, &c, k);
        let n = ip(&f, &f).sqrt();
        c.iter_mut().for_each(|x| {
            x.0 /= n;
            x.1 /= n;
        });
        let f = sinusoid_per_edge(net, &c, k);
        out.push((c, f));
    }
    out.into_iter().map(|(_, f)| f).collect()
}

/// Sine of the largest principal angle between two orthonormal families.
fn largest_principal_angle(u: &[NetworkFunction], v: &[NetworkFunction]) -> f64 {
    // sin^2 = largest eigenvalue of I - M M^T with M_ij = <u_i, v_j>
    let n = u.len();
    let m: Vec<Vec<f64>> = u.iter().map(|a| v.iter().map(|b| ip(a, b)).collect()).collect();
    let g = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        let mm: f64 = (0..v.len()).map(|l| m[i][l] * m[j][l]).sum();
        ip(&u[i], &u[j]) - mm
    });
    let top = g.symmetric_eigenvalues().max();
    top.max(0.0).sqrt().asin()
}

fn positive_with_multiplicity(spec: &Spectrum) -> Vec<f64> {
    spec.positive().flat_map(|e| std::iter::repeat_n(e.k, e.multiplicity())).collect()
}

/// Least-squares slope of `log y` against `log x`.
fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[test]
fn two_node_closed_forms() {
    let start = Instant::now();
    // near k = pi m the inverse condition number is about |k - pi m| / 2, so
    // the cutoff needs a grid point within 0.02 of every root
    let cfg = SpectralConfig { k_max: 70.0, n_grid: 7001, ..Default::default() };
    let mut worst_k: f64 = 0.0;
    let mut worst_mode: f64 = 0.0;
    let mut found = true;
    for (bc, label) in [(BoundaryCondition::Kirchhoff, "kirchhoff"), (BoundaryCondition::Dirichlet, "dirichlet")] {
        let net = build_interval(1.0).unwrap().with_all_boundary_conditions(bc);
        let spec = single_threaded(|| compute_spectrum(&net, &cfg)).unwrap();
        let pos: Vec<_> = spec.positive().collect();
        if pos.len() < 20 {
            eprintln!("{label}: only {} positive wavenumbers", pos.len());
            found = false;
            continue;
        }
        for (m, entry) in pos.iter().take(20).enumerate() {
            let m = (m + 1) as f64;
            worst_k = worst_k.max((entry.k - PI * m).abs());
            found &= entry.multiplicity() == 1;
            let exact = match bc {
                BoundaryCondition::Kirchhoff => sinusoid(&net, 0.0, 2f64.sqrt(), PI * m),
                BoundaryCondition::Dirichlet => sinusoid(&net, 2f64.sqrt(), 0.0, PI * m),
            };
            worst_mode = worst_mode.max(distance_up_to_sign(&entry.modes[0], &exact));
        }
    }
    let elapsed = secs(start.elapsed());
    report(
        "two-node closed forms",
        found && worst_k < 1e-8 && worst_mode < 1e-6 && elapsed < 5.0,
        &format!("grid spacing 0.01, m <= 20, max |k - pi m| = {worst_k:.3e} (< 1e-8), max mode L2 error = {worst_mode:.3e} (< 1e-6), {elapsed:.2} s (< 5 s)"),
    );
}

fn star_spectrum() -> (MetricNetwork, Spectrum, f64) {
    let net = build_star(3, 1.0).unwrap();
    let start = Instant::now();
    let spec = single_threaded(|| compute_spectrum(&net, &SpectralConfig::default())).unwrap();
    (net, spec, secs(start.elapsed()))
}

#[test]
fn star_spectrum_and_degenerate_subspaces() {
    let (net, spec, elapsed) = star_spectrum();
    let expected: Vec<f64> = (1..).map(|m| PI * m as f64 / 2.0).take_while(|&k| k <= 100.0).collect();
    let pos: Vec<_> = spec.positive().collect();
    let mut worst_k: f64 = 0.0;
    let mut multiplicities_ok = pos.len() == expected.len();
    let mut worst_angle: f64 = 0.0;
    let mut worst_single: f64 = 0.0;
    for (i, (entry, &k)) in pos.iter().zip(&expected).enumerate() {
        let m = i + 1;
        worst_k = worst_k.max((entry.k - k).abs());
        // every edge runs leaf (x = 0) -> hub, so modes are cos(k x) per edge
        if m % 2 == 1 {
            multiplicities_ok &= entry.multiplicity() == 2;
            let basis = gram_schmidt(
                &net,
                k,
                &[vec![(0.0, 1.0), (0.0, -1.0), (0.0, 0.0)], vec![(0.0, 1.0), (0.0, 0.0), (0.0, -1.0)]],
            );
            worst_angle = worst_angle.max(largest_principal_angle(&entry.modes, &basis));
        } else {
            multiplicities_ok &= entry.multiplicity() == 1;
            let exact = sinusoid(&net, 0.0, (2.0 / 3.0f64).sqrt(), k);
            worst_single = worst_single.max(distance_up_to_sign(&entry.modes[0], &exact));
        }
    }
    report(
        "star spectrum",
        pos.len() == expected.len() && worst_k < 1e-8 && multiplicities_ok && worst_angle < 1e-6 && elapsed < 120.0,
        &format!(
            "found {}/{} wavenumbers, max |k - pi m/2| = {worst_k:.3e} (< 1e-8), multiplicities 2/1 ok = {multiplicities_ok}, \
             max principal angle = {worst_angle:.3e} (< 1e-6), max simple-mode L2 error = {worst_single:.3e}, {elapsed:.2} s single-threaded (< 120 s)",
            pos.len(),
            expected.len()
        ),
    );
}

#[test]
fn weyl_bounds_on_the_star() {
    let (net, spec, _) = star_spectrum();
    // oracle count: zero mode plus pi m / 2 <= k with multiplicity 2 for odd m
    let oracle = |k: f64| 1 + (1..).take_while(|&m| PI * m as f64 / 2.0 <= k).map(|m| if m % 2 == 1 { 2 } else { 1 }).sum::<usize>();
    let mut ks: Vec<f64> = (0..=20000).map(|j| j as f64 * 100.0 / 20000.0).collect();
    for e in spec.positive() {
        ks.extend([e.k, e.k * (1.0 - 1e-12), e.k * (1.0 + 1e-12)]);
    }
    ks.retain(|&k| k <= 100.0);
    let violations = ks.iter().filter(|&&k| !weyl_check(&spec, &net, k).within_bounds).count();
    let at10 = counting_function(&spec, 10.0);
    report(
        "weyl bounds",
        violations == 0 && at10 == oracle(10.0) && at10 == 10,
        &format!(
            "{} k values in [0, 100], {violations} outside [Lk/pi - M, Lk/pi + N]; N(10) = {at10} (oracle {})",
            ks.len(),
            oracle(10.0)
        ),
    );
}

fn dirichlet_edge_errors(n: usize, ms: &[usize]) -> Vec<(f64, f64)> {
    let net = build_interval(1.0).unwrap().with_all_boundary_conditions(BoundaryCondition::Dirichlet);
    let op = DiscreteOperator::new(&net, &Resolution::Uniform(n)).unwrap();
    let top = *ms.iter().max().unwrap();
    let ev = fd_eigenvalues(&op, top).unwrap();
    ms.iter()
        .map(|&m| {
            let exact = (PI * m as f64).powi(2);
            (m as f64, (ev[m - 1] - exact).abs())
        })
        .collect()
}

/// `(m, |k^2_h - k^2|)` for the unit star, one point per eigenvalue.
fn star_errors(n: usize, ms: &[usize]) -> Vec<(f64, f64)> {
    let net = build_star(3, 1.0).unwrap();
    let op = DiscreteOperator::new(&net, &Resolution::Uniform(n)).unwrap();
    let top = *ms.iter().max().unwrap();
    let labels: Vec<usize> = std::iter::once(0)
        .chain((1..=top).flat_map(|m| std::iter::repeat_n(m, if m % 2 == 1 { 2 } else { 1 })))
        .collect();
    let ev = fd_eigenvalues(&op, labels.len()).unwrap();
    labels
        .iter()
        .zip(&ev)
        .filter(|(m, _)| ms.contains(m))
        .map(|(&m, &v)| (m as f64, (v - (PI * m as f64 / 2.0).powi(2)).abs()))
        .collect()
}

#[test]
fn fd_eigenvalue_error_scaling() {
    let start = Instant::now();
    let ms_edge: Vec<usize> = (1..=50).collect();
    let ms_star: Vec<usize> = (1..=25).collect();
    let slope_m_edge = loglog_slope(&dirichlet_edge_errors(200, &ms_edge));
    let slope_m_star = loglog_slope(&star_errors(100, &ms_star));
    let ns = [25usize, 50, 100, 200, 400];
    let by_h = |f: &dyn Fn(usize) -> f64| -> f64 {
        let pts: Vec<(f64, f64)> = ns.iter().map(|&n| (1.0 / n as f64, f(n))).collect();
        loglog_slope(&pts)
    };
    let slope_h_edge = by_h(&|n| dirichlet_edge_errors(n, &[3])[0].1);
    let slope_h_star = by_h(&|n| star_errors(n, &[3]).iter().map(|p| p.1).fold(0.0, f64::max));
    let elapsed = secs(start.elapsed());
    let in4 = |s: f64| (s - 4.0).abs() <= 0.3;
    let in2 = |s: f64| (s - 2.0).abs() <= 0.2;
    report(
        "fd eigenvalue error scaling",
        in4(slope_m_edge) && in4(slope_m_star) && in2(slope_h_edge) && in2(slope_h_star) && elapsed < 60.0,
        &format!(
            "slope vs m: dirichlet edge N=200 m<=50 {slope_m_edge:.3}, star N=100 m<=25 {slope_m_star:.3} (4 +- 0.3); \
             slope vs h at m=3: edge {slope_h_edge:.3}, star {slope_h_star:.3} (2 +- 0.2); {elapsed:.2} s (< 60 s)"
        ),
    );
}

struct PoissonCase {
    label: &'static str,
    net: MetricNetwork,
    source: &'static str,
}

fn poisson_cases() -> Vec<PoissonCase> {
    vec![
        PoissonCase { label: "star", net: build_star(3, 1.0).unwrap(), source: "cos2pi" },
        PoissonCase { label: "hexagonal (154, 213)", net: build_hexagonal_lattice(5, 12).unwrap(), source: "cos2pi" },
        PoissonCase {
            label: "random-line",
            net: build_random_line_network(6, 1.0, RANDOM_LINE_SEED).unwrap(),
            source: "cos2pi-scaled",
        },
    ]
}

#[test]
fn poisson_fd_and_spectral() {
    let mut lines = Vec::new();
    let mut pass = true;
    for case in poisson_cases() {
        let net = &case.net;
        let rho = sources::named(case.source, net).unwrap();
        let exact = sources::poisson_solution(case.source, net).unwrap();
        let fd = solve_poisson_fd(net, &rho, &Resolution::Uniform(1000)).unwrap();
        let mse = mean_squared_error(&fd, &exact, 1000);
        let start = Instant::now();
        let spec = single_threaded(|| compute_spectrum(net, &SpectralConfig::default())).unwrap();
        let phi = solve_poisson_spectral(net, &spec, &rho, &Resolution::Uniform(1000)).unwrap();
        let elapsed = secs(start.elapsed());
        let linf = max_error(&phi, &exact, 1000);
        let ok = mse < 1e-12 && linf < 1e-4;
        pass &= ok;
        lines.push(format!(
            "{} (N={}, M={}) fd MSE {mse:.3e} (< 1e-12), spectral L_inf {linf:.3e} (< 1e-4) [{}], spectral {elapsed:.1} s",
            case.label,
            net.node_count(),
            net.edge_count(),
            if ok { "ok" } else { "FAIL" }
        ));
    }
    report("poisson", pass, &lines.join("; "));
}

#[test]
fn heat_equation() {
    let net = build_star(3, 1.0).unwrap();
    let rho = sources::cos2pi(&net);
    let phi0 = sinusoid(&net, 0.0, -3.0 / (8.0 * PI * PI), 2.0 * PI);
    let steady = sinusoid(&net, 0.0, -1.0 / (4.0 * PI * PI), 2.0 * PI);
    let cfg = StepConfig { t_end: 5.0, dt: 1e-3, stride: 5000 };
    let series = solve_heat_fd(&net, &phi0, &rho, &cfg, &Resolution::Uniform(1000), "condensed").unwrap();
    let t_last = *series.times.last().unwrap();
    let to_steady = max_error(series.snapshots.last().unwrap(), &steady, 1000);

    // even mode at k = pi decays as exp(-pi^2 t)
    let mode = sinusoid(&net, 0.0, 1.0, PI);
    let zero = NetworkFunction::zero(&net);
    let cfg = StepConfig { t_end: 0.1, dt: 1e-4, stride: 1000 };
    let series = solve_heat_fd(&net, &mode, &zero, &cfg, &Resolution::Uniform(1000), "condensed").unwrap();
    let decayed = mode.scaled((-PI * PI * 0.1f64).exp());
    let decay_err = max_error(series.snapshots.last().unwrap(), &decayed, 1000);
    report(
        "heat equation",
        (t_last - 5.0).abs() < 1e-9 && to_steady < 1e-6 && decay_err < 1e-6,
        &format!(
            "dt=1e-3, N=1000: L_inf to -cos(2 pi x)/(4 pi^2) at t={t_last} is {to_steady:.3e} (< 1e-6); \
             k=pi mode decay at t=0.1 (dt=1e-4) error {decay_err:.3e} (< 1e-6)"
        ),
    );
}

#[test]
fn wave_equation() {
    let net = build_star(3, 1.0).unwrap();
    let c = -1.0 / (4.0 * PI * PI);
    let phi0 = sinusoid(&net, 0.0, c, 2.0 * PI);
    let zero = NetworkFunction::zero(&net);
    let cfg = StepConfig { t_end: 1.0, dt: 2e-4, stride: 50 };
    let run = solve_wave_fd(&net, &phi0, &zero, &cfg, &Resolution::Uniform(1000)).unwrap();
    let mut worst: f64 = 0.0;
    for (t, snap) in run.series.times.iter().zip(&run.series.snapshots) {
        let exact = sinusoid(&net, 0.0, c * (2.0 * PI * t).cos(), 2.0 * PI);
        worst = worst.max(max_error(snap, &exact, 1000));
    }
    let snapshots = run.series.times.len();

    let cfg = StepConfig { t_end: 10.0, dt: 2e-4, stride: 50_000 };
    let long = solve_wave_fd(&net, &phi0, &zero, &cfg, &Resolution::Uniform(1000)).unwrap();
    let drift = long.relative_energy_drift();
    report(
        "wave equation",
        snapshots > 20 && worst < 1e-3 && drift < 1e-6,
        &format!(
            "dt=2e-4, N=1000: max L_inf error over {snapshots} snapshots in [0, 1] = {worst:.3e} (< 1e-3); \
             relative energy drift over [0, 10] ({} steps) = {drift:.3e} (< 1e-6)",
            long.energy.len()
        ),
    );
}

#[test]
fn symmetry_predictions() {
    let s3 = character_table(3).unwrap();
    let classes: Vec<(Vec<usize>, i64)> = s3.classes.iter().map(|c| (c.cycle_type.clone(), c.size)).collect();
    let chars: Vec<(String, Vec<i64>)> = s3.irreps.iter().map(|r| (r.name.clone(), r.characters.clone())).collect();
    let table_ok = classes == vec![(vec![1, 1, 1], 1), (vec![2, 1], 3), (vec![3], 2)]
        && chars
            == vec![
                ("trivial".to_string(), vec![1, 1, 1]),
                ("sign".to_string(), vec![1, -1, 1]),
                ("standard".to_string(), vec![2, 0, -1]),
            ];

    let d3 = decompose(&permutation_character(3).unwrap(), &s3).unwrap();
    let s4 = character_table(4).unwrap();
    let d4 = decompose(&permutation_character(4).unwrap(), &s4).unwrap();
    let decomp_ok = d3.coefficients == vec![1, 0, 1] && d4.describe(&s4) == "trivial + standard";

    let mut degeneracy_lines = Vec::new();
    let mut degeneracy_ok = true;
    for m in [2usize, 3, 4] {
        let net = build_star(m, 1.0).unwrap();
        let cfg = SpectralConfig { k_max: 15.0, n_grid: 301, ..Default::default() };
        let spec = compute_spectrum(&net, &cfg).unwrap();
        let mut measured: Vec<i64> = spec.positive().take(8).map(|e| e.multiplicity() as i64).collect();
        let count = measured.len();
        measured.sort_unstable();
        measured.dedup();
        let mut predicted = predict_star_degeneracies(m).unwrap();
        predicted.dedup();
        degeneracy_ok &= count == 8 && measured == predicted;
        degeneracy_lines.push(format!("M={m}: measured {measured:?} predicted {predicted:?}"));
    }

    // det T against sum_i sin(k l_i) prod_{j != i} cos(k l_j), up to a constant
    let lengths = [1.0, 1.3, 0.7];
    let net = build_star_with_lengths(&lengths).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ratios = Vec::new();
    while ratios.len() < 100 {
        let k: f64 = rng.random_range(0.01..100.0);
        let secular: f64 = (0..3)
            .map(|i| (k * lengths[i]).sin() * (0..3).filter(|&j| j != i).map(|j| (k * lengths[j]).cos()).product::<f64>())
            .sum();
        if secular.abs() < 1e-3 {
            continue;
        }
        let det = CouplingMatrix::assemble(&net, k).unwrap().to_dense().determinant();
        ratios.push(det / secular);
    }
    let r0 = ratios[0];
    let spread = ratios.iter().fold(0.0f64, |m, r| m.max(((r - r0) / r0).abs()));

    report(
        "symmetry predictions",
        table_ok && decomp_ok && degeneracy_ok && spread < 1e-8,
        &format!(
            "S3 table matches = {table_ok}; perm decompositions n=3 {:?}, n=4 \"{}\"; {}; det T / secular on 100 random k: ratio {r0:.6}, max relative spread {spread:.3e} (< 1e-8)",
            d3.coefficients,
            d4.describe(&s4),
            degeneracy_lines.join(", ")
        ),
    );
}

#[test]
fn degree_two_node_insertion() {
    let cfg = SpectralConfig::default();
    let mut worst: f64 = 0.0;
    let mut same_count = true;
    let mut cases = 0;
    let star = build_star(3, 1.0).unwrap();
    let line = build_random_line_network(6, 1.0, RANDOM_LINE_SEED).unwrap();
    for net in [&star, &line] {
        let base = positive_with_multiplicity(&compute_spectrum(net, &cfg).unwrap());
        for edge in net.edges() {
            let split = net.split_edge(edge.id, 0.37).unwrap();
            let ks = positive_with_multiplicity(&compute_spectrum(&split, &cfg).unwrap());
            same_count &= ks.len() == base.len();
            worst = ks.iter().zip(&base).fold(worst, |m, (a, b)| m.max((a - b).abs()));
            cases += 1;
        }
    }
    report(
        "degree-2 node insertion",
        same_count && worst < 1e-8,
        &format!("{cases} single-edge splits (star and random-line): same mode counts = {same_count}, max |dk| = {worst:.3e} (< 1e-8)"),
    );
}

#[test]
fn poisson_scaling_harness() {
    let mut rows = Vec::new();
    let mut pass = true;
    for cols in LATTICE_COLUMNS {
        let row = poisson_scaling_row(cols, 1000, "condensed").unwrap();
        pass &= row.mse < 1e-12;
        rows.push(format!("({}, {}) MSE {:.3e} in {:.2} s", row.nodes, row.edges, row.mse, row.solve_seconds));
    }
    report("poisson scaling harness", pass && rows.len() == 7, &format!("N_i=1000, MSE < 1e-12 at every size: {}", rows.join("; ")));
}
