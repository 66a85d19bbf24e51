use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use gp_core::estimates::{gradient_estimate_check, harnack_verify, SolutionPair};
use gp_core::generators::{
    cycle, lattice_ball, path, regular_tree_ball, sample_solution_pair, star, BallGenerator, FixedGraph, Lattice,
    RegularTree,
};
use gp_core::green::{eigen_bound_check, green_direct, green_exhaustion, green_series, transition, GreenMatrix};
use gp_core::io::{parse_function_for, parse_graph, parse_vertex_list, write_function, write_graph};
use gp_core::operators::laplacian;
use gp_core::report::{ExperimentReport, Section, REPORT_SCHEMA};
use gp_core::solvers::DirichletSolver;
use gp_core::spectral::{lambda1, lambda1_exhaustion, DirichletForm};
use gp_core::suite::{check_all, DEFAULT_TRIALS};
use gp_core::{Config, Error, GraphFunction, Potential, VertexId, WeightedGraph};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::{Command, GreenMode, Output, Source};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io { path: PathBuf, source: std::io::Error },
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::ResourceCap { .. }) => 3,
            CliError::Core(
                Error::Singular(_)
                | Error::NoConvergence { .. }
                | Error::PositivityFailure { .. }
                | Error::Residual { .. },
            ) => 1,
            _ => 2,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

/// Prints a line, treating a closed pipe as a normal end of output.
fn print_stdout(line: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{line}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(CliError::Io { path: PathBuf::from("<stdout>"), source: e })
        }
        _ => Ok(()),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads an input file and records its digest in the report.
fn input(report: &mut ExperimentReport, name: &str, path: &Path) -> CliResult<String> {
    let text = read(path)?;
    report.add_input(format!("{name}:{}", path.display()), sha256_hex(text.as_bytes()));
    Ok(text)
}

fn generated(family: &str, param: usize) -> CliResult<(WeightedGraph, Box<dyn BallGenerator>)> {
    let fixed = |g: WeightedGraph| -> (WeightedGraph, Box<dyn BallGenerator>) {
        (g.clone(), Box::new(FixedGraph { name: format!("{family}{param}"), graph: g }))
    };
    if let Some(dim) = family.strip_prefix("lattice") {
        let dim: usize = dim.parse().map_err(|_| CliError::Usage(format!("unknown family {family:?}")))?;
        return Ok((lattice_ball(dim, param)?, Box::new(Lattice { dim })));
    }
    if let Some(degree) = family.strip_prefix("tree") {
        let degree: usize = degree.parse().map_err(|_| CliError::Usage(format!("unknown family {family:?}")))?;
        return Ok((regular_tree_ball(degree, param)?, Box::new(RegularTree { degree })));
    }
    match family {
        "path" => Ok(fixed(path(param)?)),
        "cycle" => Ok(fixed(cycle(param)?)),
        "star" => Ok(fixed(star(param)?)),
        _ => Err(CliError::Usage(format!("unknown family {family:?}"))),
    }
}

/// `default_param` stands in for a missing `--param` when only the ball
/// generator is needed.
fn load(
    source: &Source,
    default_param: Option<usize>,
    report: &mut ExperimentReport,
) -> CliResult<(WeightedGraph, Box<dyn BallGenerator>)> {
    match (&source.graph, &source.generator) {
        (Some(path), _) => {
            let g = parse_graph(&input(report, "graph", path)?)?;
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((g.clone(), Box::new(FixedGraph { name, graph: g })))
        }
        (None, Some(family)) => {
            let param =
                source.param.or(default_param).ok_or_else(|| CliError::Usage("--generator needs --param".into()))?;
            generated(family, param)
        }
        (None, None) => Err(CliError::Usage("give --graph FILE or --generator NAME --param N".into())),
    }
}

/// Complete vertices with at least two neighbours; if that is every vertex,
/// the smallest id is left out so the region has a boundary.
fn default_interior(g: &WeightedGraph) -> Vec<VertexId> {
    let mut s: Vec<VertexId> =
        g.complete_vertices().filter(|&x| g.neighbors(x).map(|n| n.count() >= 2).unwrap_or(false)).collect();
    if s.len() == g.vertex_count() {
        s.remove(0);
    }
    s
}

fn interior(g: &WeightedGraph, file: &Option<PathBuf>, report: &mut ExperimentReport) -> CliResult<Vec<VertexId>> {
    match file {
        Some(p) => Ok(parse_vertex_list(&input(report, "interior", p)?)?),
        None => Ok(default_interior(g)),
    }
}

fn potential(spec: &str, g: &WeightedGraph, report: &mut ExperimentReport) -> CliResult<Potential> {
    if spec == "zero" {
        return Ok(Potential::Zero);
    }
    if let Some(v) = spec.strip_prefix("const:") {
        let q: f64 = v.parse().map_err(|_| CliError::Usage(format!("bad potential constant {v:?}")))?;
        return Ok(Potential::Constant(q));
    }
    let text = input(report, "q", Path::new(spec))?;
    Ok(Potential::Function(parse_function_for(&text, g)?))
}

fn function_or_zero(
    file: &Option<PathBuf>,
    name: &str,
    domain: Vec<VertexId>,
    g: &WeightedGraph,
    report: &mut ExperimentReport,
) -> CliResult<GraphFunction> {
    match file {
        Some(p) => Ok(parse_function_for(&input(report, name, p)?, g)?),
        None => Ok(GraphFunction::constant(domain, 0.0)),
    }
}

fn emit(report: &mut ExperimentReport, output: &Output, started: Instant) -> CliResult<ExitCode> {
    report.wall_time_seconds = started.elapsed().as_secs_f64();
    let json = report.to_json();
    match &output.report {
        Some(p) => write(p, &(json + "\n"))?,
        None => print_stdout(&json)?,
    }
    if let Some(p) = &output.csv {
        write(p, &report.series_csv())?;
    }
    for s in &report.sections {
        for c in s.failed_checks() {
            eprintln!("gp: FAILED [{}] {}: value {:e}, bound {:e}", s.name, c.name, c.value, c.bound);
        }
    }
    Ok(if report.pass() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn parse_probe(s: &str) -> CliResult<(VertexId, VertexId)> {
    let bad = || CliError::Usage(format!("probe {s:?} is not of the form x:y"));
    let (x, y) = s.split_once(':').ok_or_else(bad)?;
    Ok((x.trim().parse().map_err(|_| bad())?, y.trim().parse().map_err(|_| bad())?))
}

pub fn run(command: Command, argv: Vec<String>) -> CliResult<ExitCode> {
    let started = Instant::now();
    match command {
        Command::Validate { graph, output } => {
            let mut report = ExperimentReport::new(argv, Config::default());
            let g = parse_graph(&input(&mut report, "graph", &graph)?)?;
            let mut s = Section::new("validate");
            let v = g.validate();
            s.holds("graph invariants", v.is_valid());
            s.fact("vertices", g.vertex_count());
            s.fact("edges", g.edge_count());
            s.fact("truncated", g.vertices().iter().filter(|&&x| g.is_truncated(x).unwrap_or(false)).count());
            report.add_section(s);
            emit(&mut report, &output, started)
        }
        Command::Generate { family, param, out } => {
            let (g, _) = generated(&family, param)?;
            let text = write_graph(&g);
            match out {
                Some(p) => write(&p, &text)?,
                None => print_stdout(text.trim_end())?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { source, interior: interior_file, q, f, bc, out, output, tol } => {
            let cfg = tol.apply(Config::default());
            let mut report = ExperimentReport::new(argv, cfg.clone());
            let (g, _) = load(&source, None, &mut report)?;
            let s_ids = interior(&g, &interior_file, &mut report)?;
            let region = g.region_from_interior(&s_ids)?;
            let q = potential(&q, &g, &mut report)?;
            let f = function_or_zero(&f, "f", region.interior(), &g, &mut report)?;
            let bc = function_or_zero(&bc, "bc", region.boundary(), &g, &mut report)?;
            let solver = DirichletSolver::new(&region, &q, &cfg)?;
            let u = solver.solve(&f, &bc, &cfg)?;
            let mut s = Section::new("solve");
            s.fact("interior", region.len());
            s.fact("boundary", region.boundary().len());
            s.fact("factorised", solver.is_direct());
            // residual recomputed pointwise from the operator definition
            let mut residual: f64 = 0.0;
            for x in region.interior() {
                let r = -laplacian(&g, &u, x)? + q.at(x)? * u.get(x)? - f.get(x)?;
                residual = residual.max(r.abs());
            }
            let scale = f.sup_norm() + bc.sup_norm() + 1.0;
            s.at_most("max |(-Δ + Q)u - f| on S", residual, cfg.solve_residual * scale);
            let bc_err = region
                .boundary()
                .iter()
                .map(|&y| Ok((u.get(y)? - bc.get(y)?).abs()))
                .try_fold(0.0, |m: f64, v: Result<f64, Error>| v.map(|v| m.max(v)))?;
            s.at_most("max |u - bc| on δS", bc_err, 0.0);
            s.fact("u", &u);
            report.add_section(s);
            if let Some(p) = out {
                write(&p, &write_function(&u))?;
            }
            emit(&mut report, &output, started)
        }
        Command::Lambda1 { source, interior: interior_file, q, radii, origin, output, tol } => {
            let cfg = tol.apply(Config::default());
            let mut report = ExperimentReport::new(argv, cfg.clone());
            let (g, generator) = load(&source, radii.iter().max().copied(), &mut report)?;
            let q = potential(&q, &g, &mut report)?;
            let mut s = Section::new("lambda1");
            if radii.is_empty() {
                let region = g.region_from_interior(&interior(&g, &interior_file, &mut report)?)?;
                let form = DirichletForm::assemble(&region, &q)?;
                let pair = lambda1(&form, &cfg)?;
                s.fact("lambda1", pair.lambda);
                s.fact("interior", region.len());
                s.fact("method", pair.method);
                s.fact("iterations", pair.iterations);
                s.at_most("‖Au - λDu‖∞", pair.residual, cfg.eigen_residual * form.norm_inf());
                s.holds("eigenfunction positive on S", pair.positive);
                s.fact("eigenfunction", &pair.eigenfunction);
            } else {
                let r = lambda1_exhaustion(generator.as_ref(), origin, &radii, &q, &cfg)?;
                s.at_most("λ₁ increase between radii", r.monotonicity_defect, cfg.monotone);
                s.holds("eigenfunctions positive", r.steps.iter().all(|st| st.positive));
                s.fact("estimate", r.estimate);
                s.fact("last_gap", r.last_gap);
                s.fact("steps", &r.steps);
                s.add_series(r.series);
            }
            report.add_section(s);
            emit(&mut report, &output, started)
        }
        Command::Green { source, interior: interior_file, mode, radii, probes, origin, output, tol } => {
            let cfg = tol.apply(Config::default());
            let mut report = ExperimentReport::new(argv, cfg.clone());
            let (g, generator) = load(&source, radii.iter().max().copied(), &mut report)?;
            let mut probes: Vec<(VertexId, VertexId)> =
                probes.iter().map(|p| parse_probe(p)).collect::<CliResult<_>>()?;
            let mode = mode.unwrap_or(if radii.is_empty() { GreenMode::Direct } else { GreenMode::Exhaustion });
            let mut s = Section::new("green");
            match mode {
                GreenMode::Exhaustion => {
                    if radii.is_empty() {
                        return Err(CliError::Usage("exhaustion mode needs --radii".into()));
                    }
                    if probes.is_empty() {
                        probes.push((origin, origin));
                    }
                    let r = green_exhaustion(generator.as_ref(), origin, &radii, &probes, &cfg)?;
                    s.fact("interior_sizes", &r.interior_sizes);
                    for p in r.probes {
                        let label = format!("g({},{})", p.x, p.y);
                        s.at_most(format!("{label} decrease between radii"), p.monotonicity_defect, cfg.monotone);
                        s.holds(format!("{label} nonnegative"), p.nonnegative);
                        s.fact(format!("{label} classification"), &p.classification);
                        s.add_series(p.series);
                    }
                }
                GreenMode::Series | GreenMode::Direct => {
                    let region = g.region_from_interior(&interior(&g, &interior_file, &mut report)?)?;
                    let p = transition(&region)?;
                    let green: GreenMatrix<'_> = if matches!(mode, GreenMode::Series) {
                        let out = green_series(&region, cfg.series_max_terms, cfg.series_tol, &cfg)?;
                        s.holds("series converged", out.is_converged());
                        if let gp_core::green::SeriesOutcome::Truncated { terms, growth, .. } = &out {
                            s.fact("terms", terms);
                            s.fact("growth", growth);
                        }
                        if let gp_core::green::SeriesOutcome::Converged { terms, .. } = &out {
                            s.fact("terms", terms);
                        }
                        out.green().clone()
                    } else {
                        green_direct(&region, &cfg)?
                    };
                    s.at_most("max |(I - P_S)g - I|", green.identity_residual(&p), cfg.green_identity);
                    s.at_most("kernel asymmetry", green.symmetry_defect(), cfg.kernel_symmetry);
                    s.at_least("min g(x,x)", green.min_diagonal(), 1.0 - 1e-12);
                    let bound = eigen_bound_check(&region, &cfg)?;
                    s.at_least("λ₁·A", bound.product, 1.0 - cfg.eigen_bound);
                    s.at_most(
                        "eigenfunction representation residual",
                        bound.representation_residual,
                        cfg.representation,
                    );
                    s.fact("A", bound.a);
                    s.fact("lambda1", bound.lambda1);
                    for (x, y) in probes {
                        s.fact(format!("g({x},{y})"), green.get(x, y)?);
                        s.fact(format!("kernel({x},{y})"), green.kernel(x, y)?);
                    }
                }
            }
            report.add_section(s);
            emit(&mut report, &output, started)
        }
        Command::Harnack { source, q, u, interior: interior_file, seed, output, tol } => {
            let cfg = tol.apply(Config::default());
            let mut report = ExperimentReport::new(argv, cfg.clone());
            let (g, _) = load(&source, None, &mut report)?;
            let pair = match (q, u) {
                (Some(qp), Some(up)) => {
                    let q = parse_function_for(&input(&mut report, "q", &qp)?, &g)?;
                    let u = parse_function_for(&input(&mut report, "u", &up)?, &g)?;
                    let declared: Vec<VertexId> = q.domain().collect();
                    SolutionPair::new(&g, u, q, declared, &cfg)?
                }
                _ => {
                    report.seed = Some(seed);
                    sample_solution_pair(&g, seed, &cfg)?
                }
            };
            let set = match &interior_file {
                Some(p) => parse_vertex_list(&input(&mut report, "interior", p)?)?,
                None => pair.declared().to_vec(),
            };
            let mut s = Section::new("harnack");
            let grad = gradient_estimate_check(&pair, &cfg)?;
            s.at_least("min (P + tol) u² - |∇u|²", grad.min_slack, 0.0);
            s.fact("worst |∇u|²/(P u²)", grad.worst_ratio);
            let h = harnack_verify(&pair, &set, &cfg)?;
            s.at_most("sup/inf vs C_degree", h.ratio, h.c_degree * (1.0 + cfg.harnack));
            s.at_most("sup/inf vs C_sharp", h.ratio, h.c_sharp * (1.0 + cfg.harnack));
            s.at_most("C_sharp vs C_degree", h.c_sharp, h.c_degree * (1.0 + cfg.harnack));
            s.fact("residual", pair.residual());
            s.fact("set_size", set.len());
            report.add_section(s);
            emit(&mut report, &output, started)
        }
        Command::CheckAll { seed, output, tol } => {
            let cfg = tol.apply(Config::default());
            let mut report = ExperimentReport::new(argv, cfg.clone());
            report.seed = Some(seed);
            for section in check_all(seed, &cfg, &DEFAULT_TRIALS) {
                report.add_section(section);
            }
            emit(&mut report, &output, started)
        }
        Command::ReportDiff { a, b } => {
            let load = |p: &Path| -> CliResult<Value> {
                let mut v: Value = serde_json::from_str(&read(p)?)
                    .map_err(|e| CliError::Usage(format!("{}: not a report: {e}", p.display())))?;
                if v.get("schema").and_then(Value::as_str) != Some(REPORT_SCHEMA) {
                    return Err(CliError::Usage(format!("{}: unknown report schema tag", p.display())));
                }
                if let Some(obj) = v.as_object_mut() {
                    obj.remove("wall_time_seconds");
                }
                Ok(v)
            };
            let (va, vb) = (load(&a)?, load(&b)?);
            let mut diffs = Vec::new();
            diff_values("", &va, &vb, &mut diffs);
            for d in &diffs {
                print_stdout(d)?;
            }
            Ok(if diffs.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn diff_values(at: &str, a: &Value, b: &Value, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let mut keys: Vec<&String> = x.keys().chain(y.keys()).collect();
            keys.sort();
            keys.dedup();
            for k in keys {
                let path = format!("{at}/{k}");
                match (x.get(k), y.get(k)) {
                    (Some(p), Some(q)) => diff_values(&path, p, q, out),
                    _ => out.push(format!("{path}: present in only one report")),
                }
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (i, (p, q)) in x.iter().zip(y).enumerate() {
                diff_values(&format!("{at}/{i}"), p, q, out);
            }
        }
        _ if a != b => out.push(format!("{at}: {a} != {b}")),
        _ => {}
    }
}
