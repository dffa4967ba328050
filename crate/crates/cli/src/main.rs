//! `weyl`: reproducible Weyl-sum experiments from the command line.
//!
//! Exit codes: 0 success, 1 verify failure, 2 domain/resolution/parse error,
//! 3 resource-guard or deadline refusal, 64 usage error.

mod params;

use clap::{Parser, Subcommand};
use params::{Params, RunConfig};
use std::process::ExitCode;
use std::time::{Duration, Instant};
use weyl_core::counting::{
    arc_max_count, circle_lattice_with, even_moment_count, l4_kernel_sup, pair_count_ij, parab_kernel_bound,
    paraboloid_ones, sumset, vinogradov_count,
};
use weyl_core::expsum::eval_table;
use weyl_core::fit::{exponent_fit_over_j, exponent_fit_over_n, FitResult};
use weyl_core::io::{append_results, write_shell, ResultRow};
use weyl_core::measures::{DecayKernel, GraphSurface, SurfaceFamily};
use weyl_core::moments::{
    box_moment, dyadic_box_normalized, decoupling_ratio, decoupling_slope, kernel_moment, surface_moment,
    DecouplingStatement, Normalization, QuadratureSpec,
};
use weyl_core::recipes::{half_support_lo, realize, SequenceRecipe};
use weyl_core::verify::{run_suite, Suite, VerifyOptions};
use weyl_core::{Coefficients, Error, Limits, PhaseSystem, Support, TorusBox};

const EXIT_VERIFY: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "weyl", version, about = "Weyl-sum moments, counting oracles and decoupling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate S(x) at one point of the torus.
    Eval(Params),
    /// Moment of |S|^p over a box of the torus.
    Moment(Params),
    /// Moment of |S|^p against a surface measure.
    SurfaceMoment(Params),
    /// Kernel sums: decay-kernel moments, paraboloid bounds, L4 sups.
    Kernel(Params),
    /// Scaling-exponent fit over an N or j ladder.
    Fit(Params),
    /// Decoupling ratio for one statement, or its slope over a ladder.
    Decoupling(Params),
    /// Exact counts: Vinogradov systems, even moments, sumsets.
    Count(Params),
    /// Lattice points on the circle x^2 + y^2 = N.
    Shell(Params),
    /// Run an acceptance suite.
    Verify {
        /// core, paraboloid, l4, sphere, decoupling-light or decoupling-heavy.
        #[arg(default_value = "core")]
        suite: String,
        #[command(flatten)]
        params: Params,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::Moment(_) => "moment",
            Command::SurfaceMoment(_) => "surface-moment",
            Command::Kernel(_) => "kernel",
            Command::Fit(_) => "fit",
            Command::Decoupling(_) => "decoupling",
            Command::Count(_) => "count",
            Command::Shell(_) => "shell",
            Command::Verify { .. } => "verify",
        }
    }

    fn params(&self) -> &Params {
        match self {
            Command::Eval(p)
            | Command::Moment(p)
            | Command::SurfaceMoment(p)
            | Command::Kernel(p)
            | Command::Fit(p)
            | Command::Decoupling(p)
            | Command::Count(p)
            | Command::Shell(p)
            | Command::Verify { params: p, .. } => p,
        }
    }
}

/// Failure categories mapped onto exit codes.
enum Failure {
    Usage(String),
    Core(Error),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn usage<T>(msg: impl Into<String>) -> std::result::Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY),
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_resource() { EXIT_RESOURCE } else { EXIT_DOMAIN })
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let command = cli.command.name();
    let flags = cli.command.params().clone();
    let cfg = match &flags.config {
        Some(path) => {
            let stored = RunConfig::load(path).map_err(Failure::Core)?;
            if stored.command.as_deref().is_some_and(|c| c != command) {
                return usage(format!("config is for {:?}, not {command:?}", stored.command.unwrap_or_default()));
            }
            flags.over(stored.params)
        }
        None => flags,
    };
    if let Some(path) = &cfg.save_config {
        RunConfig { command: Some(command.into()), params: cfg.without_plumbing() }.save(path)?;
    }
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    let mut limits = Limits::default();
    if let Some(t) = cfg.max_tuples {
        limits.max_tuples = t;
    }
    if let Some(s) = cfg.max_seconds {
        limits = limits.with_budget(Duration::from_secs_f64(s));
    }
    let ctx = Ctx { p: cfg, limits, started: Instant::now() };
    match &cli.command {
        Command::Eval(_) => ctx.eval(),
        Command::Moment(_) => ctx.moment(),
        Command::SurfaceMoment(_) => ctx.surface_moment(),
        Command::Kernel(_) => ctx.kernel(),
        Command::Fit(_) => ctx.fit(),
        Command::Decoupling(_) => ctx.decoupling(),
        Command::Count(_) => ctx.count(),
        Command::Shell(_) => ctx.shell(),
        Command::Verify { suite, .. } => ctx.verify(suite),
    }
}

struct Ctx {
    p: Params,
    limits: Limits,
    started: Instant,
}

impl Ctx {
    fn need<T: Clone>(&self, v: &Option<T>, flag: &str) -> std::result::Result<T, Failure> {
        v.clone().ok_or_else(|| Failure::Usage(format!("--{flag} is required")))
    }

    fn recipe(&self, default: SequenceRecipe) -> std::result::Result<SequenceRecipe, Failure> {
        Ok(match &self.p.seq {
            Some(s) => SequenceRecipe::parse(s)?,
            None => default,
        })
    }

    fn coefficients(&self, n: i64) -> std::result::Result<Coefficients, Failure> {
        let lo = self.p.lo.unwrap_or(1);
        Ok(realize(&self.recipe(SequenceRecipe::Constant)?, &Support::Interval { lo, hi: n })?)
    }

    fn seed(&self) -> u64 {
        self.p.seed.unwrap_or(1)
    }

    fn quad(&self) -> std::result::Result<QuadratureSpec, Failure> {
        match &self.p.quad {
            Some(q) => Ok(QuadratureSpec::parse(q, self.seed())?),
            None => Ok(QuadratureSpec::auto()),
        }
    }

    fn row(&self, experiment: &str, method: &str, value: f64, stderr: f64) -> ResultRow {
        let mut r = ResultRow::new(experiment, method, value, stderr);
        r.d = self.p.d.map(|d| d as u64);
        r.n = self.p.n;
        r.p = self.p.p;
        r.j = self.p.j;
        r.seed = self.p.seed;
        if self.p.timing {
            r.wall_ms = self.started.elapsed().as_millis() as u64;
        }
        r
    }

    fn emit(&self, rows: &[ResultRow]) -> Outcome {
        if let Some(out) = &self.p.out {
            append_results(out, rows)?;
        }
        Ok(())
    }

    fn eval(&self) -> Outcome {
        let d = self.need(&self.p.d, "d")?;
        let n = self.need(&self.p.n, "N")?;
        let x = params::parse_list::<f64>(&self.need(&self.p.x, "x")?).map_err(Failure::Usage)?;
        if x.len() != d {
            return usage(format!("--x needs {d} coordinates"));
        }
        let a = self.coefficients(n)?;
        let table = a.frequencies(&PhaseSystem::MomentCurve { d })?;
        let z = eval_table(&table, a.values(), &x);
        println!("{} {} {}", z.re, z.im, z.norm());
        self.emit(&[self.row("eval", "direct", z.norm(), 0.0)])
    }

    fn moment(&self) -> Outcome {
        let d = self.need(&self.p.d, "d")?;
        let n = self.need(&self.p.n, "N")?;
        let p = self.need(&self.p.p, "p")?;
        let a = self.coefficients(n)?;
        let quad = self.quad()?;
        if let Some(norm) = &self.p.normalize {
            let j = self.need(&self.p.j, "j")?;
            let norm = parse_normalization(norm)?;
            let v = dyadic_box_normalized(&a, d, n as u64, j, p, &quad, norm, &self.limits)?;
            println!("{} ± {}", v.value, v.stderr);
            return self.emit(&[self.row("dyadic-box-normalized", &v.moment.method.to_string(), v.value, v.stderr)]);
        }
        let bx = match (&self.p.r#box, self.p.j) {
            (Some(text), _) => TorusBox::parse(text, d)?,
            (None, Some(j)) => TorusBox::parse(&format!("dyadic:{j}"), d)?,
            (None, None) => TorusBox::full(d),
        };
        let m = box_moment(&a, &PhaseSystem::MomentCurve { d }, &bx, p, &quad, &self.limits)?;
        println!("{} ± {}", m.value, m.abs_error);
        self.emit(&[self.row("moment", &m.method.to_string(), m.value, m.abs_error)])
    }

    fn surface_moment(&self) -> Outcome {
        let family = SurfaceFamily::parse(&self.need(&self.p.surface, "surface")?)?;
        let surface = GraphSurface::new(family)?;
        let n = self.need(&self.p.n, "N")?;
        let p = self.need(&self.p.p, "p")?;
        let a = self.coefficients(n)?;
        let m = surface_moment(&a, &PhaseSystem::MomentCurve { d: surface.d }, &surface, p, &self.quad()?, &self.limits)?;
        println!("{} ± {}", m.value, m.abs_error);
        self.emit(&[self.row("surface-moment", &m.method.to_string(), m.value, m.abs_error)])
    }

    fn kernel(&self) -> Outcome {
        let n = self.need(&self.p.n, "N")?;
        let beta = self.need(&self.p.beta, "beta")?;
        match self.p.kind.as_deref().unwrap_or("decay") {
            "decay" => {
                let d = self.need(&self.p.d, "d")?;
                let l = self.p.l.unwrap_or(1);
                let (a, sys) = match self.p.system.as_deref().unwrap_or("moment-curve") {
                    "moment-curve" => (self.coefficients(n)?, PhaseSystem::MomentCurve { d }),
                    "paraboloid" => (paraboloid_ones(d, n)?, PhaseSystem::Paraboloid { d, n }),
                    other => return usage(format!("unknown --system {other:?}")),
                };
                let v = kernel_moment(&a, &sys, &DecayKernel::new(beta)?, l, &self.limits)?;
                println!("{v}");
                self.emit(&[self.row("kernel-moment", "exact-kernel", v, 0.0)])
            }
            "paraboloid-bound" => {
                let d = self.need(&self.p.d, "d")?;
                let b = parab_kernel_bound(d, n, beta, &paraboloid_ones(d, n)?, &self.limits)?;
                println!("{} {}", b.value, b.normalized);
                self.emit(&[self.row("paraboloid-bound", "exact-kernel", b.value, 0.0)])
            }
            "l4-sup" => {
                let s = l4_kernel_sup(n, beta, &self.limits)?;
                println!("{} at ({}, {})", s.sup, s.n1, s.n3);
                self.emit(&[self.row("l4-sup", "exact-kernel", s.sup, 0.0)])
            }
            other => usage(format!("unknown --kind {other:?}")),
        }
    }

    fn fit(&self) -> Outcome {
        let d = self.need(&self.p.d, "d")?;
        let p = self.need(&self.p.p, "p")?;
        let ladder = self.need(&self.p.ladder, "ladder")?;
        let quad = self.quad()?;
        let sys = PhaseSystem::MomentCurve { d };
        let fit: FitResult = match self.p.over.as_deref().unwrap_or("n") {
            "n" | "N" => {
                let ladder = params::parse_list::<u64>(&ladder).map_err(Failure::Usage)?;
                let bx = match &self.p.r#box {
                    Some(text) => TorusBox::parse(text, d)?,
                    None => TorusBox::full(d),
                };
                let exact = bx.is_full() && p % 2.0 == 0.0 && self.p.quad.is_none();
                exponent_fit_over_n(&ladder, |n| {
                    let a = self.coefficients(n as i64).map_err(into_core)?;
                    if exact {
                        even_moment_count(&a, &sys, (p / 2.0) as u32, &self.limits)
                    } else {
                        Ok(box_moment(&a, &sys, &bx, p, &quad, &self.limits)?.value)
                    }
                })?
            }
            "j" => {
                let ladder = params::parse_list::<u32>(&ladder).map_err(Failure::Usage)?;
                let a = self.coefficients(self.need(&self.p.n, "N")?)?;
                exponent_fit_over_j(&ladder, |j| {
                    let bx = TorusBox::parse(&format!("dyadic:{j}"), d)?;
                    Ok(box_moment(&a, &sys, &bx, p, &quad, &self.limits)?.value)
                })?
            }
            other => return usage(format!("--over must be n or j, got {other:?}")),
        };
        println!("slope {} ± {}", fit.slope, fit.slope_stderr);
        if let Some(path) = &self.p.json {
            std::fs::write(path, serde_json::to_string_pretty(&fit).map_err(Error::from)?).map_err(Error::from)?;
        }
        self.emit(&[self.row("fit", "log-log", fit.slope, fit.slope_stderr)])
    }

    fn decoupling(&self) -> Outcome {
        let stmt = DecouplingStatement::parse(&self.need(&self.p.statement, "statement")?)?;
        let recipe = self.recipe(SequenceRecipe::UnimodularRandom { seed: self.seed() })?;
        let samples = self.p.samples.unwrap_or(1 << 16);
        let label = format!("decoupling-{}", serde_json::to_value(stmt).map_err(Error::from)?.as_str().unwrap_or(""));
        if let Some(ladder) = &self.p.ladder {
            let ladder = params::parse_list::<u64>(ladder).map_err(Failure::Usage)?;
            let (fit, rows) = decoupling_slope(stmt, &ladder, &recipe, samples, self.seed(), &self.limits)?;
            let mut out = Vec::new();
            for r in &rows {
                println!("N={} ratio {} ± {}", r.n, r.ratio, r.ratio_stderr);
                let mut row = self.row(&label, "mc", r.ratio, r.ratio_stderr);
                row.n = Some(r.n as i64);
                row.p = Some(stmt.p());
                row.seed = Some(self.seed());
                out.push(row);
            }
            println!("slope {} ± {}", fit.slope, fit.slope_stderr);
            return self.emit(&out);
        }
        let n = self.need(&self.p.n, "N")?;
        let a = realize(&recipe, &Support::Interval { lo: half_support_lo(n), hi: n })?;
        let r = decoupling_ratio(stmt, n as u64, &a, samples, self.seed(), &self.limits)?;
        println!("ratio {} ± {} (lhs {}, rhs {})", r.ratio, r.ratio_stderr, r.lhs.value, r.rhs);
        let mut row = self.row(&label, "mc", r.ratio, r.ratio_stderr);
        row.p = Some(stmt.p());
        row.seed = Some(self.seed());
        self.emit(&[row])
    }

    fn count(&self) -> Outcome {
        let l = self.p.l.unwrap_or(1);
        if let Some(set) = &self.p.sumset {
            let set = params::parse_list::<i64>(set).map_err(Failure::Usage)?;
            let s = sumset(&set, l, &self.limits)?;
            println!("{}", s.len());
            return self.emit(&[self.row("sumset", "exact-count", s.len() as f64, 0.0)]);
        }
        let d = self.need(&self.p.d, "d")?;
        let n = self.need(&self.p.n, "N")?;
        if self.p.vinogradov {
            let c = vinogradov_count(d, l, n, &self.limits)?;
            println!("{c}");
            return self.emit(&[self.row("vinogradov", "exact-count", c as f64, 0.0)]);
        }
        let v = even_moment_count(&self.coefficients(n)?, &PhaseSystem::MomentCurve { d }, l, &self.limits)?;
        println!("{v}");
        self.emit(&[self.row("even-moment", "exact-count", v, 0.0)])
    }

    fn shell(&self) -> Outcome {
        let n = self.need(&self.p.n, "N")?;
        let shell = circle_lattice_with(n, !self.p.open)?;
        println!("|S_{n}| = {}", shell.len());
        if let Some(gamma) = self.p.gamma {
            println!("arc max count {}", arc_max_count(n, gamma)?);
        }
        if self.p.pairs {
            let j = self.p.j;
            println!("pair count {}", pair_count_ij(n, j, &self.limits)?);
        }
        if let Some(out) = &self.p.out {
            write_shell(&shell, std::fs::File::create(out).map_err(Error::from)?)?;
        }
        Ok(())
    }

    fn verify(&self, suite: &str) -> Outcome {
        let suite = Suite::parse(suite).or_else(|e| usage(e.to_string()))?;
        let opts = VerifyOptions { beta: self.p.beta, limits: self.limits.clone() };
        let report = run_suite(suite, &opts)?;
        for c in &report.criteria {
            println!("{}", c.line());
        }
        let json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
        if let Some(path) = self.p.json.as_ref().or(self.p.out.as_ref()) {
            std::fs::write(path, json).map_err(Error::from)?;
        }
        if report.passed {
            Ok(())
        } else {
            Err(Failure::Verify)
        }
    }
}

fn into_core(f: Failure) -> Error {
    match f {
        Failure::Core(e) => e,
        Failure::Usage(m) => Error::Parse(m),
        Failure::Verify => Error::Domain("verification failed".into()),
    }
}

fn parse_normalization(text: &str) -> std::result::Result<Normalization, Failure> {
    match text {
        "l2" => Ok(Normalization::L2),
        "l6" => Ok(Normalization::L6),
        "l9" => Ok(Normalization::L9),
        other => usage(format!("--normalize must be l2, l6 or l9, got {other:?}")),
    }
}
