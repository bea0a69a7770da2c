//! Command-line surface of `cbh`: operator evaluation on body files, the
//! Minkowski solver, the randomized theorem suite and grid diagnostics.
//!
//! Exit codes: `0` success, `1` violated statements, `2` invalid input,
//! `3` solver non-convergence.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bodies::{polar, polar_of_polytope, polar_of_star, random_rotation, AnyBody, BodyFile, Polytope, StarBody, SupportBody};
use crate::error::{GeomError, Result};
use crate::inequalities::{run_suite, Family, SuiteConfig, DEFAULT_GRID_RESOLUTION};
use crate::measures::{surface_area_measure, AtomicMeasure};
use crate::minkowski_solver::{blaschke_measure, solve_minkowski_detailed, MinkowskiProblem, DEFAULT_TOLERANCE};
use crate::operators::{apply_bm, apply_radial, BMHomomorphism, RadialBMHomomorphism};
use crate::sphere::{build_grid, integrate, sphere_area, SphericalGrid, ZonalKernel};
use crate::vec3;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CBH_THREADS";

#[derive(Debug, Parser)]
#[command(name = "cbh", version, about = "Blaschke–Minkowski homomorphisms: operators, Minkowski solver and inequality suite")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply an operator to body files.
    Op(OpArgs),
    /// Reconstruct a polytope from its surface area measure.
    SolveMinkowski(SolveArgs),
    /// Run the randomized inequality suite and write a JSON report.
    Suite(SuiteArgs),
    /// Describe the spherical quadrature grid.
    GridInfo(GridInfoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpName {
    /// Projection body operator Π (polytope input).
    Pi,
    /// Sine-transform operator Θ (polytope input).
    Theta,
    /// Blaschke–Minkowski homomorphism with the profile from `--kernel-csv` (polytope input).
    Kernel,
    /// Intersection body operator I (star body input).
    Intersection,
    /// Polar body (any input).
    Polar,
    /// Blaschke combination `λ_a·A # λ_b·B` of two polytopes.
    BlaschkeSum,
}

/// A user zonal profile read from `t,value` rows covering `[-1, 1]`.
#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// CSV file of `t,value` rows defining a piecewise-linear generating profile.
    #[arg(long, value_name = "FILE")]
    pub kernel_csv: Option<PathBuf>,
    /// Operator name of the user kernel.
    #[arg(long, default_value = "kernel")]
    pub kernel_name: String,
    /// Declare the profile even (`ğ(−t) = ğ(t)`); trusted, not verified.
    #[arg(long)]
    pub kernel_even: bool,
    /// Declare the profile a support function; trusted, not verified.
    #[arg(long)]
    pub kernel_support: bool,
}

impl KernelArgs {
    fn load(&self) -> Result<Option<BMHomomorphism>> {
        let Some(path) = &self.kernel_csv else { return Ok(None) };
        let text = read(path)?;
        let kernel = ZonalKernel::from_csv(self.kernel_name.clone(), &text, self.kernel_even, self.kernel_support)?;
        Ok(Some(BMHomomorphism::from_kernel(kernel)?))
    }
}

#[derive(Debug, Args)]
pub struct OpArgs {
    pub name: OpName,
    /// Input body (JSON body file).
    #[arg(long = "in", value_name = "FILE", required_unless_present = "a")]
    pub input: Option<PathBuf>,
    /// First summand of `blaschke-sum`.
    #[arg(long, value_name = "FILE", requires = "b")]
    pub a: Option<PathBuf>,
    /// Second summand of `blaschke-sum`.
    #[arg(long, value_name = "FILE")]
    pub b: Option<PathBuf>,
    /// Coefficient of `--a`.
    #[arg(long, default_value_t = 1.0)]
    pub la: f64,
    /// Coefficient of `--b`.
    #[arg(long, default_value_t = 1.0)]
    pub lb: f64,
    /// Output body file; printed to stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Resolution of the sampling grid for sampled outputs.
    #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION)]
    pub grid: usize,
    /// Cross-check the result against the operator's invariants and print the margins.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub kernel: KernelArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Measure file: `{"dim": 3, "atoms": [{"dir": [..], "w": ..}, ..]}`.
    #[arg(long, value_name = "FILE")]
    pub measure: PathBuf,
    /// Output polytope body file.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Target relative facet-area error.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long, default_value_t = crate::minkowski_solver::DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Ambient dimension (only 3 is supported).
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    /// Index of the first trial (to rerun a single failing trial).
    #[arg(long, default_value_t = 0)]
    pub first_trial: u64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Comma-separated operators: pi, theta, intersection, and the `--kernel-name` of a user kernel.
    #[arg(long, value_delimiter = ',', default_value = "pi,theta,intersection")]
    pub ops: Vec<String>,
    /// Comma-separated theorem families (default: all).
    #[arg(long, value_delimiter = ',')]
    pub families: Vec<String>,
    /// Resolution of the spherical grid.
    #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION)]
    pub grid: usize,
    /// JSON report path; printed to stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// CSV export of every evaluated check.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub kernel: KernelArgs,
}

#[derive(Debug, Args)]
pub struct GridInfoArgs {
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION)]
    pub resolution: usize,
}

/// Parses the arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

/// Exit code of a failed command.
pub fn exit_code_for(e: &GeomError) -> i32 {
    match e {
        GeomError::NoConvergence { .. } => EXIT_NO_CONVERGENCE,
        _ => EXIT_INVALID,
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Op(a) => cmd_op(&a),
        Command::SolveMinkowski(a) => cmd_solve(&a),
        Command::Suite(a) => cmd_suite(&a),
        Command::GridInfo(a) => cmd_grid_info(&a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| GeomError::Io(format!("{}: {e}", path.display())))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| GeomError::Io(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_body(path: &Path, grid: &Arc<SphericalGrid>) -> Result<AnyBody> {
    BodyFile::from_json(&read(path)?)
        .map_err(|e| match e {
            GeomError::Format(m) => GeomError::Format(format!("{}: {m}", path.display())),
            other => other,
        })?
        .load(Some(grid.clone()))
}

fn load_polytope(path: &Path, grid: &Arc<SphericalGrid>) -> Result<Polytope> {
    match load_body(path, grid)? {
        AnyBody::Polytope(p) => Ok(p),
        _ => Err(GeomError::InvalidArgument(format!("{}: expected a polytope body file", path.display()))),
    }
}

fn load_star(path: &Path, grid: &Arc<SphericalGrid>) -> Result<StarBody> {
    match load_body(path, grid)? {
        AnyBody::Star(s) => Ok(s),
        AnyBody::Polytope(p) => {
            let m = p.facets().iter().map(|f| f.offset).fold(f64::INFINITY, f64::min);
            if !(m > 0.0) {
                return Err(GeomError::OriginNotInterior(m));
            }
            // ρ_P(u) = min over facets facing u of offset / (n·u)
            let rho = |u: vec3::Vec3| {
                p.facets()
                    .iter()
                    .filter_map(|f| {
                        let c = vec3::dot(f.normal, u);
                        (c > 0.0).then(|| f.offset / c)
                    })
                    .fold(f64::INFINITY, f64::min)
            };
            StarBody::from_samples(grid.clone(), grid.nodes3().map(rho).collect())
        }
        AnyBody::Support(_) => Err(GeomError::InvalidArgument(format!(
            "{}: expected a star body (or polytope) body file",
            path.display()
        ))),
    }
}

/// One verified invariant: `error ≤ tolerance` passes.
struct Verified {
    invariant: &'static str,
    error: f64,
    tolerance: f64,
}

impl Verified {
    fn ok(&self) -> bool {
        self.error <= self.tolerance
    }
}

fn sup_diff(a: impl Iterator<Item = f64>, b: impl Iterator<Item = f64>) -> f64 {
    a.zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn verification_rotation() -> vec3::Mat3 {
    random_rotation(&mut ChaCha8Rng::seed_from_u64(0x5eed))
}

/// Invariants of a Blaschke–Minkowski image `ΦK`.
fn verify_bm(phi: &BMHomomorphism, k: &Polytope, img: &SupportBody, grid: &Arc<SphericalGrid>) -> Result<Vec<Verified>> {
    let scale = img.samples().iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut out = vec![Verified {
        invariant: "Steiner point of the image at the origin",
        error: vec3::norm(img.steiner_point()) / scale,
        tolerance: 1e-8,
    }];
    let r = verification_rotation();
    let rotated = apply_bm(phi, &k.rotate(&r)?, grid)?;
    let err = grid
        .nodes3()
        .map(|u| (rotated.eval(vec3::mat_vec(&r, u)) - img.eval(u)).abs())
        .fold(0.0, f64::max);
    out.push(Verified { invariant: "rotation intertwining Φ(ϑK) = ϑΦK", error: err / scale, tolerance: 1e-6 });
    // Blaschke additivity with a homothet: S(K # λK) = (1 + λ²)S(K), so Φ(K # λK) = (1 + λ²)ΦK.
    let lambda = 0.5;
    let doubled = apply_bm(phi, &k.dilate(lambda)?, grid)?;
    let err = sup_diff(doubled.samples().iter().copied(), img.samples().iter().map(|h| lambda * lambda * h));
    out.push(Verified { invariant: "degree-2 homogeneity Φ(λK) = λ²ΦK", error: err / scale, tolerance: 1e-9 });
    if phi.name() == "pi" {
        let exact = crate::operators::projection_zonotope(k)?;
        let err = sup_diff(img.samples().iter().copied(), grid.nodes3().map(|u| exact.support(u)));
        out.push(Verified { invariant: "agreement with the exact projection zonotope", error: err / scale, tolerance: 1e-9 });
    }
    Ok(out)
}

fn verify_radial(psi: &RadialBMHomomorphism, l: &StarBody, img: &StarBody) -> Result<Vec<Verified>> {
    let scale = img.max_rho();
    let r = verification_rotation();
    let l_rot = l.rotate(&r)?;
    let rotated = apply_radial(psi, &l_rot)?;
    let err = l.grid().nodes3().map(|u| (rotated.eval(vec3::mat_vec(&r, u)) - img.eval(u)).abs()).fold(0.0, f64::max);
    // Rotating a sampled body interpolates it; a kinked ρ loses accuracy there,
    // and |ΔΨ| ≤ π·sup|Δρ²| carries that loss to the image.
    let resampling = l
        .grid()
        .nodes3()
        .zip(l.samples())
        .map(|(u, x)| (l_rot.eval(vec3::mat_vec(&r, u)).powi(2) - x * x).abs())
        .fold(0.0, f64::max);
    let budget = 1e-4 + std::f64::consts::PI * resampling / scale;
    let lambda = 0.5;
    let scaled = apply_radial(psi, &l.dilate(lambda)?)?;
    let hom = sup_diff(scaled.samples().iter().copied(), img.samples().iter().map(|x| lambda * lambda * x));
    Ok(vec![
        Verified { invariant: "rotation intertwining Ψ(ϑL) = ϑΨL", error: err / scale, tolerance: budget },
        Verified { invariant: "degree-2 homogeneity Ψ(λL) = λ²ΨL", error: hom / scale, tolerance: 1e-9 },
    ])
}

fn report_verification(checks: &[Verified]) -> i32 {
    let mut ok = true;
    for c in checks {
        ok &= c.ok();
        println!(
            "{} {}: error={:.3e} tolerance={:.1e}",
            if c.ok() { "ok  " } else { "FAIL" },
            c.invariant,
            c.error,
            c.tolerance
        );
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn cmd_op(a: &OpArgs) -> Result<i32> {
    let grid = Arc::new(build_grid(3, a.grid)?);
    let input = || a.input.as_deref().ok_or_else(|| GeomError::InvalidArgument("missing --in".into()));
    let (file, checks) = match a.name {
        OpName::Pi | OpName::Theta | OpName::Kernel => {
            let phi = match a.name {
                OpName::Pi => BMHomomorphism::projection(),
                OpName::Theta => BMHomomorphism::theta(),
                _ => a.kernel.load()?.ok_or_else(|| GeomError::InvalidArgument("op kernel needs --kernel-csv".into()))?,
            };
            let k = load_polytope(input()?, &grid)?;
            let img = apply_bm(&phi, &k, &grid)?;
            let checks = if a.verify { verify_bm(&phi, &k, &img, &grid)? } else { Vec::new() };
            (BodyFile::from_support(&img), checks)
        }
        OpName::Intersection => {
            let psi = RadialBMHomomorphism::intersection();
            let l = load_star(input()?, &grid)?;
            let img = apply_radial(&psi, &l)?;
            let checks = if a.verify { verify_radial(&psi, &l, &img)? } else { Vec::new() };
            (BodyFile::from_star(&img), checks)
        }
        OpName::Polar => {
            let (file, pairs): (BodyFile, Vec<f64>) = match load_body(input()?, &grid)? {
                AnyBody::Polytope(p) => {
                    let s = polar_of_polytope(&p, grid.clone())?;
                    let prod = grid.nodes3().zip(s.samples()).map(|(u, r)| p.support(u) * r).collect();
                    (BodyFile::from_star(&s), prod)
                }
                AnyBody::Support(h) => {
                    let s = polar(&h)?;
                    let prod = h.samples().iter().zip(s.samples()).map(|(x, r)| x * r).collect();
                    (BodyFile::from_star(&s), prod)
                }
                AnyBody::Star(l) => {
                    let h = polar_of_star(&l)?;
                    let prod = l.samples().iter().zip(h.samples()).map(|(r, x)| x * r).collect();
                    (BodyFile::from_support(&h), prod)
                }
            };
            let checks = if a.verify {
                vec![Verified {
                    invariant: "polarity h_K · ρ_{K*} = 1 at the grid nodes",
                    error: sup_diff(pairs.iter().copied(), std::iter::repeat(1.0)),
                    tolerance: 1e-9,
                }]
            } else {
                Vec::new()
            };
            (file, checks)
        }
        OpName::BlaschkeSum => {
            let (pa, pb) = match (&a.a, &a.b) {
                (Some(x), Some(y)) => (x, y),
                _ => return Err(GeomError::InvalidArgument("blaschke-sum needs --a and --b".into())),
            };
            let (k, l) = (load_polytope(pa, &grid)?, load_polytope(pb, &grid)?);
            let mu = blaschke_measure(&k, &l, a.la, a.lb)?;
            let sol = solve_minkowski_detailed(&MinkowskiProblem::new(mu.clone()))?;
            let checks = if a.verify {
                vec![Verified {
                    invariant: "surface area measure λ_a S(A) + λ_b S(B)",
                    error: facet_area_error(&sol.polytope, &mu),
                    tolerance: 1e-6,
                }]
            } else {
                Vec::new()
            };
            (BodyFile::from_polytope(&sol.polytope), checks)
        }
    };
    write_or_print(a.out.as_deref(), &file.to_json()?)?;
    Ok(if a.verify { report_verification(&checks) } else { EXIT_OK })
}

/// Largest relative deviation between the facet areas of `p` and the atoms of `mu`.
fn facet_area_error(p: &Polytope, mu: &AtomicMeasure) -> f64 {
    let s = surface_area_measure(p);
    let total = mu.mass();
    mu.atoms()
        .iter()
        .map(|a| {
            let got = s
                .atoms()
                .iter()
                .filter(|b| vec3::dot(a.dir, b.dir) > 1.0 - 1e-9)
                .map(|b| b.weight)
                .sum::<f64>();
            (got - a.weight).abs() / total
        })
        .fold(0.0, f64::max)
}

fn cmd_solve(a: &SolveArgs) -> Result<i32> {
    let mu = AtomicMeasure::from_json(&read(&a.measure)?)?;
    let sol = solve_minkowski_detailed(&MinkowskiProblem::new(mu).with_tolerance(a.tol).with_max_iters(a.max_iters))?;
    write_or_print(Some(&a.out), &BodyFile::from_polytope(&sol.polytope).to_json()?)?;
    eprintln!(
        "solved: {} facets, volume {:.12}, {} iterations, residual {:.3e}",
        sol.polytope.facets().len(),
        sol.polytope.volume(),
        sol.iterations,
        sol.residual
    );
    Ok(EXIT_OK)
}

/// Thread cap from `CBH_THREADS` (unset or empty means the default pool).
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(GeomError::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
        _ => Ok(None),
    }
}

/// Builds the suite configuration from command-line arguments.
pub fn suite_config(a: &SuiteArgs) -> Result<SuiteConfig> {
    if a.dim != 3 {
        return Err(GeomError::UnsupportedDimension(a.dim, "3"));
    }
    let user = a.kernel.load()?;
    let mut bm_ops = Vec::new();
    let mut radial_ops = Vec::new();
    for name in &a.ops {
        match name.as_str() {
            "pi" => bm_ops.push(BMHomomorphism::projection()),
            "theta" => bm_ops.push(BMHomomorphism::theta()),
            "intersection" => radial_ops.push(RadialBMHomomorphism::intersection()),
            other => match &user {
                Some(phi) if phi.name() == other => bm_ops.push(phi.clone()),
                _ => {
                    return Err(GeomError::InvalidArgument(format!(
                        "unknown operator '{other}' (built-ins: pi, theta, intersection; user kernels via --kernel-csv)"
                    )))
                }
            },
        }
    }
    if let Some(phi) = user {
        if !bm_ops.iter().any(|p| p.name() == phi.name()) {
            bm_ops.push(phi);
        }
    }
    let families = if a.families.is_empty() {
        Family::ALL.to_vec()
    } else {
        a.families.iter().map(|f| Family::from_name(f)).collect::<Result<_>>()?
    };
    Ok(SuiteConfig {
        trials: a.trials,
        first_trial: a.first_trial,
        seed: a.seed,
        grid_resolution: a.grid,
        families,
        bm_ops,
        radial_ops,
        threads: threads_from_env()?,
    })
}

fn cmd_suite(a: &SuiteArgs) -> Result<i32> {
    let config = suite_config(a)?;
    let outcome = run_suite(&config)?;
    let r = &outcome.report;
    write_or_print(a.out.as_deref(), &r.to_json()?)?;
    if let Some(p) = &a.csv {
        write_or_print(Some(p), &outcome.to_csv()?)?;
    }
    eprintln!(
        "{} trials, {} checks: {} violations, {} equality failures, {} errors",
        r.total_trials, r.total_checks, r.violations, r.equality_failures, r.errors
    );
    for f in r.failures.iter().take(10) {
        eprintln!("  {:?} {} [{} {}] trial {}: {}  (reproduce: {})", f.kind, f.family.name(), f.operator, f.params, f.trial, f.message, f.reproduce);
    }
    Ok(if r.clean() { EXIT_OK } else { EXIT_VIOLATION })
}

fn cmd_grid_info(a: &GridInfoArgs) -> Result<i32> {
    let g = build_grid(a.dim, a.resolution)?;
    let wsum: f64 = g.weights().iter().sum();
    let area = sphere_area(a.dim);
    println!("dim                  {}", g.dim());
    println!("resolution           {}", g.resolution());
    println!("nodes                {}", g.len());
    println!("weight sum           {wsum:.15}");
    println!("sphere area          {area:.15}");
    println!("relative weight err  {:.3e}", (wsum - area).abs() / area);
    println!(
        "weights min/max      {:.3e} / {:.3e}",
        g.weights().iter().copied().fold(f64::INFINITY, f64::min),
        g.weights().iter().copied().fold(0.0, f64::max)
    );
    if a.dim == 3 {
        // exactness probes: polynomial in the polar coordinate and a kink at the equator
        let quartic = integrate(&g, &g.sample3(|u| u[2].powi(4)));
        let kink = integrate(&g, &g.sample3(|u| u[2].abs()));
        println!("∫ z⁴ error           {:.3e}", (quartic - 4.0 * std::f64::consts::PI / 5.0).abs());
        println!("∫ |z| error          {:.3e}", (kink - 2.0 * std::f64::consts::PI).abs());
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("cbh").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn suite_defaults() {
        let Command::Suite(a) = parse(&["suite"]).command else { panic!() };
        let cfg = suite_config(&a).unwrap();
        assert_eq!(cfg.trials, 200);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.bm_ops.len(), 2);
        assert_eq!(cfg.radial_ops.len(), 1);
        assert_eq!(cfg.families.len(), Family::ALL.len());
    }

    #[test]
    fn suite_rejects_other_dimensions_and_unknown_operators() {
        let Command::Suite(a) = parse(&["suite", "--dim", "4"]).command else { panic!() };
        assert!(matches!(suite_config(&a), Err(GeomError::UnsupportedDimension(4, _))));
        let Command::Suite(a) = parse(&["suite", "--ops", "pi,nope"]).command else { panic!() };
        assert!(suite_config(&a).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code_for(&GeomError::NoConvergence { iterations: 3, residual: 1.0 }), EXIT_NO_CONVERGENCE);
        assert_eq!(exit_code_for(&GeomError::InvalidMeasure("x".into())), EXIT_INVALID);
        assert_eq!(main_with_args(["cbh", "suite", "--trials", "0"]), EXIT_OK);
        assert_eq!(main_with_args(["cbh", "frobnicate"]), EXIT_INVALID);
    }
}
