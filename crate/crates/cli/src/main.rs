use clap::{Args, Parser, Subcommand, ValueEnum};
use pslgraph_core::domain::{ArcLabel, BoundaryData, DomainFile, DomainSpec};
use pslgraph_core::flux::{boundary_flux_per_arc, flux_integral, scherk_flux_experiment, FluxPath};
use pslgraph_core::hyperbolic::{HPoint, Model};
use pslgraph_core::invariant::{
    catenoid_r0, sample_family, Branch, CatenoidFamily, Family, GridSpec, HelicoidFamily, ParabolicFamily,
};
use pslgraph_core::jenkins_serrin::{check_admissibility, construct_js_solution, AdmissibilityReport, Verdict};
use pslgraph_core::mesh::generate_mesh;
use pslgraph_core::solver::{solve_dirichlet, SolutionField, SolverConfig};
use pslgraph_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

const RESIDUAL_LIMIT: f64 = 1e-6;
const THREADS_VAR: &str = "PSLGRAPH_THREADS";

#[derive(Parser)]
#[command(name = "pslgraph", version, about = "Minimal graphs over the hyperbolic plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an invariant family and report its residual.
    Invariant(InvariantArgs),
    /// Solve the Dirichlet problem (or the capped construction) on a domain file.
    Solve(SolveArgs),
    /// Print the inscribed-polygon table and the admissibility verdict.
    Check(CheckArgs),
    /// Flux ratio table of the ±∞ arcs across the caps.
    Scherk(ScherkArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    Helicoid,
    Catenoid,
    Parabolic,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Plus,
    Minus,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    HalfPlane,
    Disc,
}

impl ModelArg {
    fn model(self) -> Model {
        match self {
            ModelArg::HalfPlane => Model::HalfPlane,
            ModelArg::Disc => Model::Disc,
        }
    }
}

#[derive(Args, Clone)]
struct Common {
    /// Output directory; nothing is written when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized probes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Chart: sample coordinates for `invariant`, expected model of the domain file otherwise.
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Target mesh size.
    #[arg(long, default_value_t = 0.1)]
    h: f64,
    /// Comma-separated caps for ±∞ arcs.
    #[arg(long, value_delimiter = ',')]
    caps: Option<Vec<f64>>,
    /// Newton tolerance on the interior residual.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct InvariantArgs {
    #[arg(value_enum)]
    family: FamilyName,
    #[arg(long = "C", allow_negative_numbers = true)]
    c: f64,
    #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
    branch: BranchArg,
    /// Evaluate the parabolic profile at this height.
    #[arg(long)]
    y: Option<f64>,
    /// Evaluate the catenoid profile at this disc radius.
    #[arg(long)]
    r: Option<f64>,
    /// Evaluate the helicoid profile at this angle.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    transverse: Option<usize>,
    /// Distance kept from singular lines.
    #[arg(long)]
    delta: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SolveArgs {
    domain: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CheckArgs {
    domain: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ScherkArgs {
    domain: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    common: Common,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Solver(_)) { 3 } else { 2 };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(format!("i/o: {e}"))
    }
}

type Outcome = Result<u8, Failure>;

#[derive(Serialize)]
struct RunManifest {
    tool: String,
    version: String,
    command: String,
    inputs: Vec<String>,
    input_sha256: Vec<String>,
    overrides: BTreeMap<String, String>,
    out: String,
    seed: u64,
}

impl RunManifest {
    fn new(command: &str, inputs: &[&Path], common: &Common) -> Result<Self, Failure> {
        let mut input_sha256 = Vec::new();
        for p in inputs {
            input_sha256.push(hex::encode(Sha256::digest(std::fs::read(p)?)));
        }
        Ok(RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            input_sha256,
            overrides: BTreeMap::new(),
            out: common.out.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            seed: common.seed,
        })
    }

    fn set(&mut self, key: &str, value: impl ToString) {
        self.overrides.insert(key.to_string(), value.to_string());
    }

    fn text(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.text().as_bytes()))
    }
}

/// Writes the named files under `out`, each prefixed with the manifest hash.
fn write_outputs(out: &Option<PathBuf>, manifest: &RunManifest, files: &[(&str, String)]) -> Result<(), Failure> {
    let Some(dir) = out else {
        return Ok(());
    };
    std::fs::create_dir_all(dir)?;
    let hash = manifest.hash();
    std::fs::write(dir.join("manifest.toml"), format!("# sha256 {hash}\n{}", manifest.text()))?;
    for (name, body) in files {
        std::fs::write(dir.join(name), format!("# manifest sha256 {hash}\n{body}"))?;
    }
    Ok(())
}

fn branch(b: BranchArg) -> Branch {
    match b {
        BranchArg::Plus => Branch::Plus,
        BranchArg::Minus => Branch::Minus,
    }
}

fn lambda_text(model: Model) -> &'static str {
    match model {
        Model::HalfPlane => "lambda = 1/y",
        Model::Disc => "lambda = 1/(1 - (x^2 + y^2)/4)",
    }
}

fn cmd_invariant(a: &InvariantArgs) -> Outcome {
    let b = branch(a.branch);
    let family = match a.family {
        FamilyName::Helicoid => Family::Helicoid(HelicoidFamily::new(a.c, b)?),
        FamilyName::Catenoid => Family::Catenoid(CatenoidFamily::new(a.c, b)?),
        FamilyName::Parabolic => Family::Parabolic(ParabolicFamily::new(a.c, b)?),
    };
    let mut grid = GridSpec::default();
    grid.samples = a.samples.unwrap_or(grid.samples);
    grid.transverse = a.transverse.unwrap_or(grid.transverse);
    grid.delta = a.delta.unwrap_or(grid.delta);
    let mut manifest = RunManifest::new("invariant", &[], &a.common)?;
    manifest.set("family", family.describe());
    manifest.set("samples", grid.samples);
    manifest.set("transverse", grid.transverse);
    manifest.set("delta", grid.delta);

    println!("family: {}", family.describe());
    if let Family::Catenoid(_) = family {
        println!("r0 = {:.9}", catenoid_r0(a.c)?);
    }
    let probe = match (&family, a.y, a.r, a.theta) {
        (Family::Parabolic(f), Some(y), _, _) => Some((format!("y = {y}"), f.profile(y)?)),
        (Family::Catenoid(f), _, Some(r), _) => Some((format!("r = {r}"), f.profile(r)?.value)),
        (Family::Helicoid(f), _, _, Some(t)) => Some((format!("theta = {t}"), f.profile(t)?.value)),
        (_, None, None, None) => None,
        _ => return Err(Failure::usage("probe flag does not match the family (--y parabolic, --r catenoid, --theta helicoid)")),
    };
    if let Some((at, u)) = &probe {
        println!("u({at}) = {u:.9}");
    }

    let sample = sample_family(&family, &grid)?;
    let out_model = a.common.model.map(ModelArg::model).unwrap_or(family.model());
    if let Some(m) = a.common.model {
        manifest.set("model", m.model());
    }
    let mut csv = format!("# model {out_model}, {}\nx,y,u\n", lambda_text(out_model));
    for p in &sample.points {
        let q = HPoint::new(family.model(), p[0], p[1])?.to_model(out_model);
        writeln!(csv, "{},{},{}", q.x(), q.y(), p[2]).unwrap();
    }
    println!("points: {}", sample.points.len());
    println!("max residual: {:.3e}", sample.max_residual);
    write_outputs(&a.common.out, &manifest, &[("samples.csv", csv)])?;
    if sample.max_residual > RESIDUAL_LIMIT {
        println!("FAIL: residual exceeds {RESIDUAL_LIMIT:e}");
        return Ok(1);
    }
    Ok(0)
}

fn load_domain(path: &Path, common: &Common) -> Result<(DomainFile, DomainSpec), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let file = DomainFile::parse(&text)?;
    if let Some(m) = common.model {
        if m.model() != file.model {
            return Err(Failure::usage(format!(
                "domain file is in the {} model, --model asked for {}",
                file.model,
                m.model()
            )));
        }
    }
    let domain = file.build()?;
    Ok((file, domain))
}

fn solver_config(s: &SolverArgs, manifest: &mut RunManifest) -> Result<SolverConfig, Failure> {
    let mut cfg = SolverConfig::default();
    manifest.set("h", s.h);
    if let Some(c) = &s.caps {
        cfg.cap_sequence = c.clone();
        manifest.set("caps", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
    }
    if let Some(t) = s.tol {
        cfg.newton_tol = t;
        manifest.set("tol", t);
    }
    cfg.validate()?;
    if !(s.h > 0.0) {
        return Err(Failure::usage("--h must be positive"));
    }
    Ok(cfg)
}

fn nodal_error(field: &SolutionField, exact: &BoundaryData) -> Result<f64, Failure> {
    let mesh = field.mesh();
    let mut worst: f64 = 0.0;
    for (i, u) in field.values().iter().enumerate() {
        worst = worst.max((u - exact.eval(&mesh.point(i))?).abs());
    }
    Ok(worst)
}

/// A random triangle strictly inside the domain, drawn from the seed.
fn random_loop(domain: &DomainSpec, seed: u64) -> Option<Vec<HPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vs = domain.vertices();
    let n = vs.len() as f64;
    let c = vs.iter().fold([0.0; 2], |a, p| [a[0] + p.x() / n, a[1] + p.y() / n]);
    for _ in 0..200 {
        let mut pts = Vec::new();
        for k in 0..3 {
            let ang = 2.0 * std::f64::consts::PI * (k as f64 + rng.gen_range(0.1..0.9)) / 3.0;
            let v = &vs[rng.gen_range(0..vs.len())];
            let reach = rng.gen_range(0.1..0.6) * (v.x() - c[0]).hypot(v.y() - c[1]);
            let p = HPoint::new(domain.model(), c[0] + reach * ang.cos(), c[1] + reach * ang.sin()).ok()?;
            pts.push(p);
        }
        if pts.iter().all(|p| domain.contains(p)) {
            return Some(pts);
        }
    }
    None
}

fn flux_table(field: &SolutionField, domain: &DomainSpec) -> Result<(String, f64), Failure> {
    let mut csv = String::from("arc,label,value,length,ratio\n");
    let mut total = 0.0;
    for (k, r) in boundary_flux_per_arc(field, domain)?.iter().enumerate() {
        total += r.value;
        writeln!(csv, "{k},{},{},{},{}", domain.arcs()[k].label.short(), r.value, r.length, r.ratio).unwrap();
    }
    Ok((csv, total))
}

fn surface_files(field: &SolutionField) -> (String, String) {
    let mesh = field.mesh();
    let model = mesh.model();
    let mut csv = String::from("vertex,x,y,u\n");
    let mut obj = format!("# pslgraph surface over the {model} model, {}\n# vertices are (x, y, u)\n", lambda_text(model));
    for (i, (p, u)) in mesh.nodes().iter().zip(field.values()).enumerate() {
        writeln!(csv, "{i},{},{},{u}", p[0], p[1]).unwrap();
        writeln!(obj, "v {} {} {u}", p[0], p[1]).unwrap();
    }
    for t in mesh.triangles() {
        writeln!(obj, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    (csv, obj)
}

fn log_report(tag: &str, field: &SolutionField) {
    let r = field.report();
    println!(
        "{tag}: picard {} newton {} residual {:.3e} converged {}",
        r.picard_iterations, r.newton_iterations, r.residual_norm, r.converged
    );
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Admissible => 0,
        Verdict::Inadmissible => 1,
        Verdict::Marginal => 4,
    }
}

fn print_admissibility(report: &AdmissibilityReport) {
    println!("polygon,alpha,beta,gamma,rule,status");
    for r in &report.records {
        let vs: Vec<String> = r.polygon.vertices.iter().map(|v| v.to_string()).collect();
        let rule = if r.balance_rule { "alpha=beta" } else { "2alpha<gamma,2beta<gamma" };
        println!("{},{:.12},{:.12},{:.12},{rule},{}", vs.join("-"), r.alpha, r.beta, r.gamma, r.status);
    }
    println!("verdict: {}", report.verdict);
    if let Some(w) = report.witness_record() {
        let vs: Vec<String> = w.polygon.vertices.iter().map(|v| v.to_string()).collect();
        println!(
            "witness: polygon {} (2alpha = {:.9}, 2beta = {:.9}, gamma = {:.9})",
            vs.join("-"),
            2.0 * w.alpha,
            2.0 * w.beta,
            w.gamma
        );
    }
}

fn cmd_solve(a: &SolveArgs) -> Outcome {
    let (file, domain) = load_domain(&a.domain, &a.common)?;
    let mut manifest = RunManifest::new("solve", &[&a.domain], &a.common)?;
    let cfg = solver_config(&a.solver, &mut manifest)?;
    let h = a.solver.h;

    let field = if domain.all_finite() {
        let mesh = Arc::new(generate_mesh(&domain, h)?);
        println!("mesh: {} nodes, {} triangles, max edge {:.4}", mesh.node_count(), mesh.triangles().len(), mesh.max_edge());
        let field = solve_dirichlet(&mesh, &domain, &cfg)?;
        log_report("solve", &field);
        if let Some(exact) = file.exact_solution()? {
            let fine_mesh = Arc::new(generate_mesh(&domain, 0.5 * h)?);
            let fine = solve_dirichlet(&fine_mesh, &domain, &cfg)?;
            log_report("solve h/2", &fine);
            let (e1, e2) = (nodal_error(&field, &exact)?, nodal_error(&fine, &exact)?);
            println!("error h = {h}: {e1:.3e}");
            println!("error h = {}: {e2:.3e}", 0.5 * h);
            println!("error ratio: {:.3}", e1 / e2);
            if let BoundaryData::Family(f) = &exact {
                match random_loop(&domain, a.common.seed) {
                    Some(pts) => {
                        let r = flux_integral(f, &FluxPath::new(pts, true)?)?;
                        println!("closed-loop flux (exact field, seed {}): {:.3e}", a.common.seed, r.value);
                    }
                    None => println!("closed-loop flux: no interior loop found"),
                }
            }
        }
        field
    } else {
        let adm = check_admissibility(&domain)?;
        if adm.verdict != Verdict::Admissible {
            print_admissibility(&adm);
            return Ok(verdict_code(adm.verdict));
        }
        let js = construct_js_solution(&domain, h, &cfg)?;
        for (cap, f) in js.monotone.caps.iter().zip(&js.monotone.fields) {
            log_report(&format!("cap {cap}"), f);
        }
        js.monotone.last().clone()
    };

    let (flux_csv, total) = flux_table(&field, &domain)?;
    print!("{flux_csv}");
    println!("closed-loop flux (boundary, discrete): {total:.3e}");
    let (csv, obj) = surface_files(&field);
    write_outputs(
        &a.common.out,
        &manifest,
        &[("nodes.csv", csv), ("surface.obj", obj), ("flux.csv", flux_csv)],
    )?;
    Ok(0)
}

fn cmd_check(a: &CheckArgs) -> Outcome {
    let (_, domain) = load_domain(&a.domain, &a.common)?;
    let manifest = RunManifest::new("check", &[&a.domain], &a.common)?;
    let report = check_admissibility(&domain)?;
    print_admissibility(&report);
    write_outputs(&a.common.out, &manifest, &[])?;
    Ok(verdict_code(report.verdict))
}

fn cmd_scherk(a: &ScherkArgs) -> Outcome {
    let (_, domain) = load_domain(&a.domain, &a.common)?;
    let mut manifest = RunManifest::new("scherk", &[&a.domain], &a.common)?;
    let cfg = solver_config(&a.solver, &mut manifest)?;
    if domain.infinite_arcs().is_empty() {
        return Err(Failure::usage("domain has no ±∞ arcs"));
    }
    let adm = check_admissibility(&domain)?;
    if adm.verdict != Verdict::Admissible {
        print_admissibility(&adm);
        return Ok(verdict_code(adm.verdict));
    }
    let table = scherk_flux_experiment(&domain, a.solver.h, &cfg)?;
    let mut csv = String::from("cap,arc,ratio\n");
    for r in table.rows.iter().filter(|r| !domain.arcs()[r.arc].label.is_finite()) {
        writeln!(csv, "{},{},{}", r.cap, r.arc, r.ratio).unwrap();
    }
    print!("{csv}");
    write_outputs(&a.common.out, &manifest, &[("scherk.csv", csv)])?;
    if table.approaches_limit(&domain, 0.9) {
        Ok(0)
    } else {
        let inf: Vec<usize> = domain.infinite_arcs();
        let finals: Vec<String> = inf
            .iter()
            .map(|&k| {
                let sign = if domain.arcs()[k].label == ArcLabel::PlusInf { "+" } else { "-" };
                format!("arc {k} ({sign}) {:?}", table.ratios(k).last())
            })
            .collect();
        println!("FAIL: ratios not monotone or below 0.9: {}", finals.join("; "));
        Ok(1)
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .parse()
            .map_err(|_| Failure::usage(format!("{THREADS_VAR} must be a positive integer")))?;
        if n == 0 {
            return Err(Failure::usage(format!("{THREADS_VAR} must be a positive integer")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> Outcome {
        configure_threads()?;
        match &cli.command {
            Command::Invariant(a) => cmd_invariant(a),
            Command::Solve(a) => cmd_solve(a),
            Command::Check(a) => cmd_check(a),
            Command::Scherk(a) => cmd_scherk(a),
        }
    };
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
