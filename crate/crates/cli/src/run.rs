use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde_json::{json, Map, Value};

use metnet::fd::eigen::fd_eigenvalues;
use metnet::fd::io::{solution_csv, time_series_csv, write_text};
use metnet::fd::time::{solve_heat_fd, solve_wave_fd, StepConfig};
use metnet::fd::{DiscreteOperator, Resolution};
use metnet::graph::generators::build_star_with_lengths;
use metnet::graph::{build_hexagonal_lattice, build_interval, build_random_line_network, build_star};
use metnet::poisson::{max_error, mean_squared_error, solve_poisson_fd_detailed, solve_poisson_spectral};
use metnet::spectral::{compute_spectrum, scan, weyl_check, SpectralConfig, Spectrum};
use metnet::symmetry::{character_table, decompose, permutation_character, predict_star_degeneracies};
use metnet::{registry, sources, BoundaryCondition, Error, MetricNetwork, NetworkFunction};

use crate::args::*;
use crate::Failure;

type Outcome = Result<(), Failure>;

/// Wall-clock phases, written next to the output as `<out>.timing.json`.
struct Timing {
    command: &'static str,
    phases: Map<String, Value>,
    extra: Map<String, Value>,
    last: Instant,
}

impl Timing {
    fn start(command: &'static str) -> Self {
        Self {
            command,
            phases: Map::new(),
            extra: Map::new(),
            last: Instant::now(),
        }
    }

    fn lap(&mut self, phase: &str) {
        let now = Instant::now();
        let secs = (now - self.last).as_secs_f64();
        info!("{}: {phase} took {secs:.3} s", self.command);
        self.phases.insert(phase.into(), json!(secs));
        self.last = now;
    }

    fn note(&mut self, key: &str, value: Value) {
        self.extra.insert(key.into(), value);
    }

    fn write(self, out: &Path) -> Outcome {
        let total: f64 = self.phases.values().filter_map(Value::as_f64).sum();
        let doc = json!({
            "command": self.command,
            "threads": rayon::current_num_threads(),
            "wall_seconds": self.phases,
            "total_seconds": total,
            "diagnostics": self.extra,
        });
        let mut path = OsString::from(out.as_os_str());
        path.push(".timing.json");
        write_text(PathBuf::from(path), &(serde_json::to_string_pretty(&doc).expect("timing serializes") + "\n"))?;
        Ok(())
    }
}

fn required_out<'a>(out: &'a Option<PathBuf>, command: &str) -> Result<&'a Path, Failure> {
    out.as_deref()
        .ok_or_else(|| Failure::Usage(format!("`{command}` needs an output file (-o/--out)")))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Outcome {
    match out {
        Some(path) => write_text(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Network JSON. Files that parse but break the network invariants count
/// as malformed input.
fn load_network(path: &Path) -> Result<MetricNetwork, Failure> {
    MetricNetwork::load(path).map_err(|e| match e {
        Error::InvalidNetwork(msg) => Error::Parse(format!("{}: {msg}", path.display())).into(),
        other => with_path(other, path),
    })
}

fn with_path(e: Error, path: &Path) -> Failure {
    match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())).into(),
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))).into(),
        other => other.into(),
    }
}

fn load_spectrum(path: &Path, net: &MetricNetwork) -> Result<Spectrum, Failure> {
    Spectrum::load(path, net).map_err(|e| with_path(e, path))
}

fn spectral_config(a: &SpectralArgs, precision: u32) -> Result<SpectralConfig, Failure> {
    let cfg = SpectralConfig {
        k_max: a.k_max,
        n_grid: a.grid,
        cutoff: a.cutoff,
        bracket_halfwidth: a.bracket,
        round_precision: precision,
        rank_tol: a.rank_tol,
        estimator: a.estimator.clone(),
        minimizer: a.minimizer.clone(),
        nullspace: a.nullspace.clone(),
        ..SpectralConfig::default()
    };
    cfg.validate()?;
    if let Some(name) = &cfg.estimator {
        registry::singular_value_estimators().create(name)?;
    }
    registry::scalar_minimizers().create(&cfg.minimizer)?;
    if let Some(name) = &cfg.nullspace {
        registry::nullspace_methods().create(name)?;
    }
    Ok(cfg)
}

fn with_boundary(net: MetricNetwork, b: &Boundary) -> Result<MetricNetwork, Failure> {
    if b.all_dirichlet {
        return Ok(net.with_all_boundary_conditions(BoundaryCondition::Dirichlet));
    }
    let mut net = net;
    for &id in &b.dirichlet {
        net = net.with_boundary_condition(id, BoundaryCondition::Dirichlet)?;
    }
    Ok(net)
}

fn scaled_source(spec: &str, scale: f64, net: &MetricNetwork) -> Result<NetworkFunction, Failure> {
    if !scale.is_finite() {
        return Err(Error::InvalidParameter(format!("scale factor must be finite, got {scale}")).into());
    }
    let f = sources::resolve(spec, net)?;
    Ok(if scale == 1.0 { f } else { f.scaled(scale) })
}

pub fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Net(cmd) => net(cmd, &cli.out, cli.seed),
        Command::Spectrum(args) => spectrum(args, &cli.out, cli.precision),
        Command::Solve(cmd) => solve(cmd, &cli.out, cli.precision),
        Command::Weyl(args) => weyl(args, &cli.out, cli.precision),
        Command::Symmetry(cmd) => symmetry(cmd, &cli.out),
        Command::Bench(cmd) => bench(cmd, &cli.out),
    }
}

fn net(cmd: NetCommand, out: &Option<PathBuf>, seed: u64) -> Outcome {
    let net = match cmd {
        NetCommand::Interval { length, boundary } => with_boundary(build_interval(length)?, &boundary)?,
        NetCommand::Star {
            edges,
            length,
            lengths,
            boundary,
        } => {
            let net = match lengths {
                Some(l) => build_star_with_lengths(&l)?,
                None => build_star(edges, length)?,
            };
            with_boundary(net, &boundary)?
        }
        NetCommand::Hex { rows, cols, boundary } => with_boundary(build_hexagonal_lattice(rows, cols)?, &boundary)?,
        NetCommand::RandomLine {
            needles,
            needle_length,
            boundary,
        } => with_boundary(build_random_line_network(needles, needle_length, seed)?, &boundary)?,
    };
    info!("network with {} nodes, {} edges", net.node_count(), net.edge_count());
    emit(out, &(net.to_json() + "\n"))
}

fn spectrum(args: SpectrumArgs, out: &Option<PathBuf>, precision: u32) -> Outcome {
    let out = required_out(out, "spectrum")?;
    let cfg = spectral_config(&args.spectral, precision)?;
    let mut timing = Timing::start("spectrum");
    let net = load_network(&args.input)?;
    timing.lap("load");

    let spec = compute_spectrum(&net, &cfg)?;
    timing.lap("spectrum");
    timing.note("wavenumbers", json!(spec.entries.len()));
    timing.note("modes", json!(spec.mode_count()));

    write_text(out, &(spec.to_json() + "\n"))?;
    if let Some(path) = &args.scan {
        let trace = scan(&net, &cfg)?;
        timing.lap("scan_trace");
        let mut text = String::from("k,inverse_condition\n");
        for (k, v) in trace {
            let _ = writeln!(text, "{k},{v}");
        }
        write_text(path, &text)?;
    }
    timing.lap("write");
    timing.write(out)
}

fn check_common(c: &Common) -> Outcome {
    if c.n_per_edge < 2 {
        return Err(Error::InvalidParameter(format!("--n-per-edge must be at least 2, got {}", c.n_per_edge)).into());
    }
    registry::linear_solvers().create(&c.solver)?;
    Ok(())
}

fn solve(cmd: SolveCommand, out: &Option<PathBuf>, precision: u32) -> Outcome {
    let out = required_out(out, "solve")?;
    match cmd {
        SolveCommand::Poisson {
            common,
            rho,
            spectrum,
            spectral,
        } => {
            check_common(&common)?;
            let cfg = spectral_config(&spectral, precision)?;
            let mut timing = Timing::start("solve poisson");
            let net = load_network(&common.input)?;
            let source = sources::resolve(&rho, &net)?;
            let resolution = Resolution::Uniform(common.n_per_edge);
            timing.lap("load");

            let phi = match common.method {
                Method::Fd => {
                    let sol = solve_poisson_fd_detailed(&net, &source, &resolution, &common.solver)?;
                    timing.note("relative_residual", json!(sol.relative_residual));
                    timing.note("compatibility", json!(sol.compatibility));
                    sol.solution
                }
                Method::Spectral => {
                    let spec = match &spectrum {
                        Some(path) => load_spectrum(path, &net)?,
                        None => compute_spectrum(&net, &cfg)?,
                    };
                    timing.note("modes", json!(spec.mode_count()));
                    solve_poisson_spectral(&net, &spec, &source, &resolution)?
                }
            };
            timing.lap("solve");
            timing.note("method", json!(format!("{:?}", common.method).to_lowercase()));
            // -rho / (4 pi^2) for the named sources; exact whenever it meets
            // the node conditions (integer lengths for cos2pi).
            if let Some(reference) = sources::poisson_solution(&rho, &net) {
                timing.note("reference_mse", json!(mean_squared_error(&phi, &reference, common.n_per_edge)));
                timing.note("reference_max_error", json!(max_error(&phi, &reference, common.n_per_edge)));
            }

            write_text(out, &solution_csv(&net, &phi, common.n_per_edge))?;
            timing.lap("write");
            timing.write(out)
        }
        SolveCommand::Heat {
            common,
            rho,
            phi0,
            phi0_scale,
            time,
        } => {
            reject_spectral_time_stepping(common.method)?;
            check_common(&common)?;
            let step = StepConfig {
                t_end: time.t_end,
                dt: time.dt,
                stride: time.stride,
            };
            let mut timing = Timing::start("solve heat");
            let net = load_network(&common.input)?;
            let source = sources::resolve(&rho, &net)?;
            let initial = scaled_source(&phi0, phi0_scale, &net)?;
            timing.lap("load");

            let resolution = Resolution::Uniform(common.n_per_edge);
            let series = solve_heat_fd(&net, &initial, &source, &step, &resolution, &common.solver)?;
            timing.lap("solve");
            timing.note("snapshots", json!(series.times.len()));

            write_text(out, &time_series_csv(&net, &series, common.n_per_edge))?;
            timing.lap("write");
            timing.write(out)
        }
        SolveCommand::Wave {
            common,
            phi0,
            phi0_scale,
            phidot0,
            phidot0_scale,
            time,
            energy,
        } => {
            reject_spectral_time_stepping(common.method)?;
            check_common(&common)?;
            let step = StepConfig {
                t_end: time.t_end,
                dt: time.dt,
                stride: time.stride,
            };
            let mut timing = Timing::start("solve wave");
            let net = load_network(&common.input)?;
            let initial = scaled_source(&phi0, phi0_scale, &net)?;
            let velocity = scaled_source(&phidot0, phidot0_scale, &net)?;
            timing.lap("load");

            let resolution = Resolution::Uniform(common.n_per_edge);
            let run = solve_wave_fd(&net, &initial, &velocity, &step, &resolution)?;
            timing.lap("solve");
            timing.note("snapshots", json!(run.series.times.len()));
            timing.note("relative_energy_drift", json!(run.relative_energy_drift()));

            write_text(out, &time_series_csv(&net, &run.series, common.n_per_edge))?;
            if let Some(path) = &energy {
                // entry i is the midpoint energy of step i -> i + 1
                let mut text = String::from("step,t_mid,energy\n");
                for (i, e) in run.energy.iter().enumerate() {
                    let _ = writeln!(text, "{},{},{e}", i + 1, (i as f64 + 0.5) * time.dt);
                }
                write_text(path, &text)?;
            }
            timing.lap("write");
            timing.write(out)
        }
    }
}

fn reject_spectral_time_stepping(method: Method) -> Outcome {
    match method {
        Method::Fd => Ok(()),
        Method::Spectral => Err(Error::InvalidParameter(
            "heat and wave problems are only solved with --method fd".into(),
        )
        .into()),
    }
}

fn weyl(args: WeylArgs, out: &Option<PathBuf>, precision: u32) -> Outcome {
    if args.points < 2 {
        return Err(Error::InvalidParameter(format!("--points must be at least 2, got {}", args.points)).into());
    }
    let cfg = spectral_config(&args.spectral, precision)?;
    let net = load_network(&args.input)?;
    let spec = match &args.spectrum {
        Some(path) => load_spectrum(path, &net)?,
        None => compute_spectrum(&net, &cfg)?,
    };
    let k_end = args.k_end.unwrap_or(spec.k_max);
    if !(k_end.is_finite() && k_end > 0.0) || k_end > spec.k_max {
        return Err(Error::InvalidParameter(format!(
            "--k-end must lie in (0, {}], the range the spectrum covers; got {k_end}",
            spec.k_max
        ))
        .into());
    }
    let mut text = String::from("k,counted,estimate,lower,upper\n");
    let mut outside = 0;
    for j in 0..args.points {
        let k = k_end * j as f64 / (args.points - 1) as f64;
        let r = weyl_check(&spec, &net, k);
        outside += usize::from(!r.within_bounds);
        let _ = writeln!(text, "{},{},{},{},{}", r.k, r.counted, r.estimate, r.lower, r.upper);
    }
    if outside > 0 {
        log::warn!("{outside} grid points fall outside the Weyl bounds");
    }
    emit(out, &text)
}

fn symmetry(cmd: SymmetryCommand, out: &Option<PathBuf>) -> Outcome {
    let text = match cmd {
        SymmetryCommand::Table { n, format } => {
            let table = character_table(n)?;
            match format {
                Format::Text => table.to_text(),
                Format::Json => serde_json::to_string_pretty(&table).expect("table serializes") + "\n",
            }
        }
        SymmetryCommand::Decompose { n, character, format } => {
            let table = character_table(n)?;
            let chi = match character {
                Some(c) => c,
                None => permutation_character(n)?,
            };
            let dec = decompose(&chi, &table)?;
            match format {
                Format::Text => {
                    let mut s = table.to_text();
                    let _ = writeln!(s, "\ncharacter     {chi:?}");
                    let _ = writeln!(s, "coefficients  {:?}", dec.coefficients);
                    let _ = writeln!(s, "decomposition {}", dec.describe(&table));
                    s
                }
                Format::Json => {
                    let doc = json!({
                        "n": n,
                        "character": dec.source_character,
                        "irreps": table.irreps.iter().map(|r| r.name.clone()).collect::<Vec<_>>(),
                        "coefficients": dec.coefficients,
                        "dimension": dec.dimension,
                        "description": dec.describe(&table),
                    });
                    serde_json::to_string_pretty(&doc).expect("decomposition serializes") + "\n"
                }
            }
        }
        SymmetryCommand::StarDegeneracies { edges, format } => {
            let dims = predict_star_degeneracies(edges)?;
            match format {
                Format::Text => {
                    let list: Vec<String> = dims.iter().map(i64::to_string).collect();
                    format!("edges         {edges}\ndegeneracies  {}\n", list.join(" "))
                }
                Format::Json => {
                    serde_json::to_string_pretty(&json!({"edges": edges, "degeneracies": dims})).expect("serializes")
                        + "\n"
                }
            }
        }
    };
    emit(out, &text)
}

fn bench(cmd: BenchCommand, out: &Option<PathBuf>) -> Outcome {
    let out = required_out(out, "bench")?;
    match cmd {
        BenchCommand::PoissonScaling {
            n_per_edge,
            solver,
            cols,
            max_mse,
        } => {
            if cols.is_empty() || cols.contains(&0) {
                return Err(Error::InvalidParameter("--cols needs positive column counts".into()).into());
            }
            if n_per_edge < 2 {
                return Err(Error::InvalidParameter(format!("--n-per-edge must be at least 2, got {n_per_edge}")).into());
            }
            registry::linear_solvers().create(&solver)?;
            let mut timing = Timing::start("bench poisson-scaling");
            let mut text = format!("{}\n", metnet::bench::ScalingRow::CSV_HEADER);
            let mut worst: f64 = 0.0;
            for &c in &cols {
                let row = metnet::bench::poisson_scaling_row(c, n_per_edge, &solver)?;
                info!(
                    "(N, M) = ({}, {}): {} unknowns, solve {:.3} s, MSE {:e}",
                    row.nodes, row.edges, row.unknowns, row.solve_seconds, row.mse
                );
                worst = worst.max(row.mse);
                text += &row.to_csv();
                text.push('\n');
                timing.lap(&format!("cols_{c}"));
            }
            timing.note("max_mse", json!(worst));
            write_text(out, &text)?;
            timing.write(out)?;
            if !(worst < max_mse) {
                return Err(Error::NumericalFailure(format!("MSE {worst:e} reached the bound {max_mse:e}")).into());
            }
            Ok(())
        }
        BenchCommand::FdEigenvalues {
            input,
            n_per_edge,
            modes,
        } => {
            if modes == 0 {
                return Err(Error::InvalidParameter("--modes must be positive".into()).into());
            }
            if let Some(n) = n_per_edge.iter().find(|&&n| n < 2) {
                return Err(Error::InvalidParameter(format!("--n-per-edge must be at least 2, got {n}")).into());
            }
            let mut timing = Timing::start("bench fd-eigenvalues");
            let net = load_network(&input)?;
            timing.lap("load");

            let exact = reference_eigenvalues(&net, modes)?;
            timing.lap("spectrum");

            let mut text = String::from("n_per_edge,index,k2_exact,k2_fd,abs_error\n");
            for &n in &n_per_edge {
                let op = DiscreteOperator::new(&net, &Resolution::Uniform(n))?;
                let fd = fd_eigenvalues(&op, modes)?;
                for (i, (e, f)) in exact.iter().zip(&fd).enumerate() {
                    let _ = writeln!(text, "{n},{i},{e},{f},{}", (f - e).abs());
                }
                timing.lap(&format!("fd_{n}"));
            }
            write_text(out, &text)?;
            timing.write(out)
        }
    }
}

/// The smallest `count` values of `k^2`, repeated by multiplicity, from a
/// spectral scan wide enough that Weyl's lower bound guarantees `count`
/// modes below its end.
fn reference_eigenvalues(net: &MetricNetwork, count: usize) -> Result<Vec<f64>, Failure> {
    let k_max = std::f64::consts::PI * (count + net.edge_count() + 1) as f64 / net.total_length();
    let cfg = SpectralConfig {
        k_max,
        n_grid: 2000usize.max((100.0 * k_max).ceil() as usize),
        ..SpectralConfig::default()
    };
    let spec = compute_spectrum(net, &cfg)?;
    let values: Vec<f64> = spec
        .entries
        .iter()
        .flat_map(|e| std::iter::repeat_n(e.k * e.k, e.multiplicity()))
        .take(count)
        .collect();
    if values.len() < count {
        return Err(Error::NumericalFailure(format!(
            "the spectral scan up to k = {k_max} resolved {} of {count} modes",
            values.len()
        ))
        .into());
    }
    Ok(values)
}
