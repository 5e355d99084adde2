//! Command-line front end: ingest functions, compute norms, run parameter
//! sweeps and embedding verifications, emit machine-readable reports.
//!
//! Exit codes: 0 on success/converged, 1 on input errors, 2 on divergence,
//! 3 when a stability check stayed inconclusive.

use std::fs;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use grand_lorentz::norms::{self, NormResult};
use grand_lorentz::verify::{self, ReportSettings, TestFamily};
use grand_lorentz::{
    iterated_rearrangement, BoundSide, DyadicTruncation, GrandParams, GridFunction2D, LogGrid,
    LogWeightVariant, ParamPair, Rearrangement2D, SearchConfig, ThetaPair,
};

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_DIVERGED: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "glnorm",
    about = "Anisotropic grand Lorentz norms: evaluation, sweeps, and embedding verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one norm of one function.
    Norm(NormArgs),
    /// Sweep a parameter and tabulate the norm against it.
    Sweep(SweepArgs),
    /// Run an embedding verification over the registered families.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct FunctionArgs {
    /// CSV grid: header line `N1,N2`, then `N2` rows of `N1` values.
    #[arg(long, conflicts_with = "analytic")]
    csv: Option<PathBuf>,
    /// Analytic function, e.g. `constant=1`, `indicator=0.25,0.25`,
    /// `powerlog=e1,e2,g1,g2`, or `example1=p1,p2,r1,r2,th1,th2,d1,d2`.
    #[arg(long)]
    analytic: Option<String>,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Truncation depth of the log grid.
    #[arg(long, default_value_t = grand_lorentz::DEFAULT_T_MIN)]
    t_min: f64,
    /// Nodes per axis of the log grid.
    #[arg(long, default_value_t = grand_lorentz::DEFAULT_NODES)]
    nodes: usize,
    /// Relative tolerance for convergence flags.
    #[arg(long, default_value_t = grand_lorentz::DEFAULT_REL_TOL)]
    rel_tol: f64,
    /// Coarse nodes per axis of the epsilon search.
    #[arg(long, default_value_t = 64)]
    eps_nodes: usize,
}

impl GridArgs {
    fn grid(&self) -> Result<LogGrid> {
        Ok(LogGrid::new(self.t_min, self.nodes)?)
    }

    fn search(&self) -> SearchConfig {
        SearchConfig {
            coarse_nodes: self.eps_nodes,
            ..SearchConfig::default()
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
enum Space {
    Lorentz,
    WeakLorentz,
    Grand,
    GrandWeak,
    LogWeightWeak,
    LogWeightUpper,
    LogWeightLower,
    DyadicGrand,
}

#[derive(Args)]
struct NormArgs {
    #[command(flatten)]
    function: FunctionArgs,
    /// Which norm to evaluate.
    #[arg(long, value_enum)]
    space: Space,
    /// Exponent pair `p1,p2` (use `inf` for infinity).
    #[arg(long, value_parser = parse_pair)]
    p: (f64, f64),
    /// Exponent pair `q1,q2`.
    #[arg(long, value_parser = parse_pair)]
    q: Option<(f64, f64)>,
    /// Grand exponent pair `theta1,theta2`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    theta: Option<(f64, f64)>,
    /// Dyadic sum exponents `tau1,tau2`.
    #[arg(long, value_parser = parse_pair)]
    tau: Option<(f64, f64)>,
    /// Use the guarded variant of the logarithmic weight.
    #[arg(long)]
    guarded: bool,
    /// Dyadic truncation depth.
    #[arg(long, default_value_t = 60)]
    depth: u32,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutputArgs {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text)
                .with_context(|| format!("cannot write report to {}", path.display()))?,
            None => println!("{text}"),
        }
        Ok(())
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    function: FunctionArgs,
    /// Parameter to sweep: theta1, theta2, p1, p2, q1, q2, or eps-box.
    #[arg(long)]
    axis: String,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long)]
    steps: usize,
    /// Base exponents `p1,p2`.
    #[arg(long, value_parser = parse_pair)]
    p: (f64, f64),
    #[arg(long, value_parser = parse_pair)]
    q: (f64, f64),
    /// Base grand exponents (the swept axis overrides one component).
    #[arg(long, value_parser = parse_pair, default_value = "0,0", allow_hyphen_values = true)]
    theta: (f64, f64),
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug, ValueEnum)]
enum Theorem {
    T1,
    T3,
    T4,
    T5,
    T6,
    T7,
    Example1,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which statement to verify.
    #[arg(value_enum)]
    theorem: Theorem,
    #[arg(long, value_parser = parse_pair)]
    p: (f64, f64),
    #[arg(long, value_parser = parse_pair)]
    q: Option<(f64, f64)>,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    theta: Option<(f64, f64)>,
    /// Larger grand exponent for T3.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    s: Option<(f64, f64)>,
    /// Larger inner exponents for T4.
    #[arg(long, value_parser = parse_pair)]
    rq: Option<(f64, f64)>,
    /// Inner exponents for T6, dyadic exponents for T7, power parameter for
    /// Example1.
    #[arg(long, value_parser = parse_pair)]
    tau: Option<(f64, f64)>,
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    lambda: Option<(f64, f64)>,
    /// Restricted box for T5 or the power-log offset for Example1.
    #[arg(long, value_parser = parse_pair)]
    delta: Option<(f64, f64)>,
    /// Dyadic truncation depth for T7.
    #[arg(long, default_value_t = 60)]
    depth: u32,
    /// Restrict to one family (constants | indicators | steps | power-log).
    #[arg(long)]
    family: Option<String>,
    /// Quadrature nodes for the verification grid.
    #[arg(long, default_value_t = 512)]
    nodes: usize,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `a,b`, got `{s}`"));
    }
    let parse = |t: &str| -> std::result::Result<f64, String> {
        let t = t.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(f64::INFINITY);
        }
        t.parse::<f64>().map_err(|e| format!("bad number `{t}`: {e}"))
    };
    Ok((parse(parts[0])?, parse(parts[1])?))
}

fn load_function(args: &FunctionArgs) -> Result<(String, Rearrangement2D)> {
    if let Some(path) = &args.csv {
        let file = fs::File::open(path)
            .with_context(|| format!("cannot open csv grid {}", path.display()))?;
        let grid = GridFunction2D::from_csv(BufReader::new(file))
            .with_context(|| format!("cannot parse csv grid {}", path.display()))?;
        return Ok((
            format!("csv:{}", path.display()),
            iterated_rearrangement(&grid),
        ));
    }
    let Some(spec) = &args.analytic else {
        bail!("one of --csv or --analytic is required");
    };
    let (name, params) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("analytic spec must look like `name=params`, got `{spec}`"))?;
    let nums: Vec<f64> = if params.is_empty() {
        vec![]
    } else {
        params
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| anyhow!("bad parameter `{x}`: {e}"))
            })
            .collect::<Result<_>>()?
    };
    let r = match (name, nums.as_slice()) {
        ("constant", [c]) => Rearrangement2D::constant(*c)?,
        ("indicator", [a1, a2]) => Rearrangement2D::indicator(*a1, *a2)?,
        ("powerlog", [e1, e2, g1, g2]) => {
            grand_lorentz::analytic_power_log((*e1, *e2), (*g1, *g2))?
        }
        ("example1", [p1, p2, r1, r2, t1, t2, d1, d2]) => grand_lorentz::analytic_example1(
            ParamPair::new(*p1, *p2)?,
            ParamPair::new(*r1, *r2)?,
            ThetaPair::new(*t1, *t2)?,
            ThetaPair::new(*d1, *d2)?,
        )?,
        _ => bail!(
            "unknown analytic spec `{spec}`; expected constant=c, indicator=a1,a2, \
             powerlog=e1,e2,g1,g2, or example1=p1,p2,r1,r2,th1,th2,d1,d2"
        ),
    };
    Ok((spec.clone(), r))
}

#[derive(Serialize)]
struct NormReport {
    command: &'static str,
    function: String,
    space: String,
    p: (f64, f64),
    q: Option<(f64, f64)>,
    theta: Option<(f64, f64)>,
    tau: Option<(f64, f64)>,
    t_min: f64,
    nodes: usize,
    rel_tol: f64,
    eps_nodes: usize,
    result: NormResult,
}

fn pair_of(v: (f64, f64)) -> Result<ParamPair> {
    Ok(ParamPair::new(v.0, v.1)?)
}

fn theta_of(v: (f64, f64)) -> Result<ThetaPair> {
    Ok(ThetaPair::new(v.0, v.1)?)
}

fn run_norm(args: &NormArgs) -> Result<(String, u8)> {
    let (label, r) = load_function(&args.function)?;
    let grid = args.grid.grid()?;
    let cfg = args.grid.search();
    let p = pair_of(args.p)?;
    let need = |v: Option<(f64, f64)>, what: &str| {
        v.ok_or_else(|| anyhow!("--{what} is required for this space"))
    };
    let result = match args.space {
        Space::Lorentz => norms::lorentz_norm(&r, p, pair_of(need(args.q, "q")?)?, &grid)?,
        Space::WeakLorentz => norms::weak_lorentz_norm(&r, p, &grid)?,
        Space::Grand => {
            let gp = GrandParams::new(
                p,
                pair_of(need(args.q, "q")?)?,
                theta_of(need(args.theta, "theta")?)?,
            )?;
            norms::grand_norm(&r, &gp, &grid, &cfg)?
        }
        Space::GrandWeak => {
            let gp = GrandParams::new(
                p,
                ParamPair::new(f64::INFINITY, f64::INFINITY)?,
                theta_of(need(args.theta, "theta")?)?,
            )?;
            norms::grand_weak_norm(&r, &gp, &grid, &cfg)?
        }
        Space::LogWeightWeak => norms::log_weight_weak_norm(
            &r,
            p,
            theta_of(need(args.theta, "theta")?)?,
            &grid,
            if args.guarded {
                LogWeightVariant::Guarded
            } else {
                LogWeightVariant::Literal
            },
        )?,
        Space::LogWeightUpper | Space::LogWeightLower => norms::log_weight_integral_bound(
            &r,
            p,
            pair_of(need(args.q, "q")?)?,
            theta_of(need(args.theta, "theta")?)?,
            if args.space == Space::LogWeightUpper {
                BoundSide::UpperForPosTheta
            } else {
                BoundSide::LowerForNegTheta
            },
            &grid,
        )?,
        Space::DyadicGrand => {
            let tau = pair_of(need(args.tau, "tau")?)?;
            let gp = GrandParams::new(p, tau, theta_of(need(args.theta, "theta")?)?)?;
            norms::dyadic_grand_norm(&r, &gp, tau, DyadicTruncation::new(args.depth)?, &cfg)?
        }
    };
    let code = if result.converged {
        EXIT_OK
    } else {
        EXIT_DIVERGED
    };
    let report = NormReport {
        command: "norm",
        function: label,
        space: format!("{:?}", args.space),
        p: args.p,
        q: args.q,
        theta: args.theta,
        tau: args.tau,
        t_min: args.grid.t_min,
        nodes: args.grid.nodes,
        rel_tol: args.grid.rel_tol,
        eps_nodes: args.grid.eps_nodes,
        result,
    };
    Ok((serde_json::to_string_pretty(&report)?, code))
}

#[derive(Serialize)]
struct SweepRow {
    value: f64,
    norm: f64,
    extremal_eps: Option<(f64, f64)>,
    converged: bool,
}

#[derive(Serialize)]
struct SweepReport {
    command: &'static str,
    function: String,
    axis: String,
    p: (f64, f64),
    q: (f64, f64),
    theta: (f64, f64),
    t_min: f64,
    nodes: usize,
    rows: Vec<SweepRow>,
    /// `non-increasing`, `non-decreasing`, `constant`, or `none`.
    monotone: String,
}

fn run_sweep(args: &SweepArgs) -> Result<(String, u8)> {
    if args.steps < 2 {
        bail!("sweep needs at least 2 steps");
    }
    if args.to <= args.from {
        bail!("sweep range must satisfy from < to");
    }
    const AXES: [&str; 7] = ["theta1", "theta2", "p1", "p2", "q1", "q2", "eps-box"];
    if !AXES.contains(&args.axis.as_str()) {
        return Err(grand_lorentz::Error::InvalidAxis(args.axis.clone()).into());
    }
    let (label, r) = load_function(&args.function)?;
    let grid = args.grid.grid()?;
    let cfg = args.grid.search();

    let mut rows = Vec::with_capacity(args.steps);
    for k in 0..args.steps {
        let x = args.from + (args.to - args.from) * k as f64 / (args.steps - 1) as f64;
        let (mut p, mut q, mut th) = (args.p, args.q, args.theta);
        let mut delta = None;
        match args.axis.as_str() {
            "theta1" => th.0 = x,
            "theta2" => th.1 = x,
            "p1" => p.0 = x,
            "p2" => p.1 = x,
            "q1" => q.0 = x,
            "q2" => q.1 = x,
            "eps-box" => delta = Some((x, x)),
            _ => unreachable!(),
        }
        let gp = GrandParams::new(pair_of(p)?, pair_of(q)?, theta_of(th)?)?;
        let out = match delta {
            None => norms::grand_norm(&r, &gp, &grid, &cfg)?,
            Some(d) => norms::grand_norm_restricted(&r, &gp, d, &grid, &cfg)?,
        };
        rows.push(SweepRow {
            value: x,
            norm: out.value,
            extremal_eps: out.extremal_eps,
            converged: out.converged,
        });
    }

    let tol = 1e-9;
    let non_inc = rows.windows(2).all(|w| w[1].norm <= w[0].norm * (1.0 + tol));
    let non_dec = rows.windows(2).all(|w| w[1].norm >= w[0].norm * (1.0 - tol));
    let monotone = match (non_inc, non_dec) {
        (true, true) => "constant",
        (true, false) => "non-increasing",
        (false, true) => "non-decreasing",
        (false, false) => "none",
    };
    let all_converged = rows.iter().all(|row| row.converged);

    let report = SweepReport {
        command: "sweep",
        function: label,
        axis: args.axis.clone(),
        p: args.p,
        q: args.q,
        theta: args.theta,
        t_min: args.grid.t_min,
        nodes: args.grid.nodes,
        rows,
        monotone: monotone.into(),
    };
    let text = match args.output.format {
        Format::Json => serde_json::to_string_pretty(&report)?,
        Format::Csv => {
            let mut s = String::from("value,norm,eps1,eps2,converged\n");
            for row in &report.rows {
                let (e1, e2) = row.extremal_eps.unwrap_or((f64::NAN, f64::NAN));
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    row.value, row.norm, e1, e2, row.converged
                ));
            }
            s.push_str(&format!("# monotone: {}\n", report.monotone));
            s
        }
    };
    Ok((
        text,
        if all_converged {
            EXIT_OK
        } else {
            EXIT_DIVERGED
        },
    ))
}

fn select_families(name: Option<&str>) -> Result<Vec<TestFamily>> {
    let all = verify::standard_families();
    match name {
        None => Ok(all),
        Some(n) => {
            let picked: Vec<TestFamily> = all.into_iter().filter(|f| f.name == n).collect();
            if picked.is_empty() {
                bail!("unknown family `{n}`; available: constants, indicators, steps, power-log");
            }
            Ok(picked)
        }
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum TheoremReport {
    Chain(Box<verify::ChainReport>),
    Embedding(Box<verify::EmbeddingReport>),
    Dyadic(Box<verify::DyadicReport>),
    Example1(verify::Example1Outcome),
}

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    theorem: String,
    passed: bool,
    inconclusive: bool,
    reports: Vec<TheoremReport>,
}

fn embedding_code(rep: &verify::EmbeddingReport) -> u8 {
    if !rep.failures.is_empty() {
        EXIT_DIVERGED
    } else if !rep.stable {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

fn run_verify(args: &VerifyArgs) -> Result<(String, u8)> {
    let settings = ReportSettings {
        grid: LogGrid::new(grand_lorentz::DEFAULT_T_MIN, args.nodes)?,
        ..ReportSettings::default()
    };
    let families = select_families(args.family.as_deref())?;
    let need = |v: Option<(f64, f64)>, what: &str| {
        v.ok_or_else(|| anyhow!("--{what} is required for this theorem"))
    };
    let p = pair_of(args.p)?;

    let mut reports = Vec::new();
    let mut code = EXIT_OK;
    let bump = |c: u8, code: &mut u8| *code = (*code).max(c);

    match args.theorem {
        Theorem::T1 => {
            let q = pair_of(need(args.q, "q")?)?;
            let th = theta_of(need(args.theta, "theta")?)?;
            for fam in &families {
                let chain = verify::verify_theorem1(p, q, th, fam, &settings)?;
                // the sup-regime embedding has constant one in this setup
                if !chain.right_embedding.ratios_at_most(1.0 + 1e-6) {
                    bump(EXIT_DIVERGED, &mut code);
                }
                bump(embedding_code(&chain.right_embedding), &mut code);
                bump(embedding_code(&chain.left_embedding), &mut code);
                reports.push(TheoremReport::Chain(Box::new(chain)));
            }
        }
        Theorem::T3 => {
            let q = pair_of(need(args.q, "q")?)?;
            let th = theta_of(need(args.theta, "theta")?)?;
            let s = theta_of(need(args.s, "s")?)?;
            for fam in &families {
                let rep = verify::verify_theorem3(p, q, th, s, fam, &settings)?;
                if rep.c_hat.is_none_or(|c| c > 1.0 + 1e-6) {
                    bump(EXIT_DIVERGED, &mut code);
                }
                bump(embedding_code(&rep), &mut code);
                reports.push(TheoremReport::Embedding(Box::new(rep)));
            }
        }
        Theorem::T4 => {
            let q = pair_of(need(args.q, "q")?)?;
            let rq = pair_of(need(args.rq, "rq")?)?;
            let th = theta_of(need(args.theta, "theta")?)?;
            for fam in &families {
                let rep = verify::verify_theorem4(p, q, rq, th, fam, &settings)?;
                bump(embedding_code(&rep), &mut code);
                reports.push(TheoremReport::Embedding(Box::new(rep)));
            }
        }
        Theorem::T5 => {
            let q = pair_of(need(args.q, "q")?)?;
            let th = theta_of(need(args.theta, "theta")?)?;
            let delta = need(args.delta, "delta")?;
            for fam in &families {
                let rep = verify::verify_theorem5(p, q, th, delta, fam, &settings)?;
                bump(embedding_code(&rep), &mut code);
                reports.push(TheoremReport::Embedding(Box::new(rep)));
            }
        }
        Theorem::T6 => {
            let q = pair_of(need(args.q, "q")?)?;
            let tau = pair_of(need(args.tau, "tau")?)?;
            let th = theta_of(need(args.theta, "theta")?)?;
            let lam = theta_of(need(args.lambda, "lambda")?)?;
            for fam in &families {
                let rep = verify::verify_theorem6(p, q, tau, th, lam, fam, &settings)?;
                bump(embedding_code(&rep), &mut code);
                reports.push(TheoremReport::Embedding(Box::new(rep)));
            }
        }
        Theorem::T7 => {
            let tau = pair_of(need(args.tau, "tau")?)?;
            let th = theta_of(need(args.theta, "theta")?)?;
            for fam in &families {
                let rep = verify::verify_theorem7(p, tau, th, args.depth, fam, &settings)?;
                if !rep.failures.is_empty() || !rep.all_within {
                    bump(EXIT_DIVERGED, &mut code);
                }
                reports.push(TheoremReport::Dyadic(Box::new(rep)));
            }
        }
        Theorem::Example1 => {
            let rpar = pair_of(need(args.tau, "tau")?)?;
            let th = theta_of(need(args.theta, "theta")?)?;
            let de = theta_of(need(args.delta, "delta")?)?;
            let out = verify::verify_example1(p, rpar, th, de, &settings)?;
            if !out.member {
                bump(
                    if out.value.is_finite() {
                        EXIT_INCONCLUSIVE
                    } else {
                        EXIT_DIVERGED
                    },
                    &mut code,
                );
            }
            reports.push(TheoremReport::Example1(out));
        }
    }

    let report = VerifyReport {
        command: "verify",
        theorem: format!("{:?}", args.theorem),
        passed: code == EXIT_OK,
        inconclusive: code == EXIT_INCONCLUSIVE,
        reports,
    };
    Ok((serde_json::to_string_pretty(&report)?, code))
}

fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("GL_THREADS") {
        let n: usize = raw
            .parse()
            .map_err(|_| anyhow!("GL_THREADS must be a non-negative integer, got `{raw}`"))?;
        if n > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("cannot configure the thread pool")?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_INPUT);
    }
    let outcome = match &cli.command {
        Command::Norm(args) => run_norm(args).map(|r| (r, args.output.clone())),
        Command::Sweep(args) => run_sweep(args).map(|r| (r, args.output.clone())),
        Command::Verify(args) => run_verify(args).map(|r| (r, args.output.clone())),
    };
    match outcome {
        Ok(((text, code), output)) => {
            if let Err(e) = output.emit(&text) {
                eprintln!("error: {e:#}");
                return ExitCode::from(EXIT_INPUT);
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
