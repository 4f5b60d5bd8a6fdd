//! Subcommands and their argument types.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use trusspp_core::analysis::{dynamic_min_eigenvalue, peak_power, peak_power_time_sampled, solve_equilibrium};
use trusspp_core::presets::{self, multifreq_load, two_rotation_load};
use trusspp_core::sensitivity::peak_power_grad;
use trusspp_core::solver::InteriorPoint;

use crate::artifacts::{sweep_csv, write_bundle, write_json};
use crate::pipeline::{run, Analyses, Outcome, Report, EXIT_OK};
use crate::problem::{preset_case, Case, ProblemFile};

#[derive(Parser, Debug)]
#[command(name = "trusspp", version, about = "Minimum peak-power truss design under periodic loads")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the penalized relaxation once and write the result bundle.
    Solve(SolveArgs),
    /// Solve over a grid of penalty weights and write sweep.csv.
    Sweep(SweepArgs),
    /// Two forces rotating at ω₁ and ω₂ on the 21-bar truss.
    TwoRotation(TwoRotationArgs),
    /// Square-wave loads truncated at N harmonics, cross-evaluated at other truncations.
    Multifreq(MultifreqArgs),
    /// Write a preset as a problem file.
    Export(ExportArgs),
    /// Seeded consistency checks (gradient and peak-power oracles) on random designs.
    Check(CheckArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Named preset.
    #[arg(long, conflicts_with = "problem", required_unless_present = "problem")]
    pub preset: Option<String>,
    /// Problem file (JSON).
    #[arg(long)]
    pub problem: Option<PathBuf>,
}

impl Source {
    pub fn case(&self) -> Result<Case> {
        match (&self.preset, &self.problem) {
            (Some(name), _) => preset_case(name),
            (None, Some(path)) => ProblemFile::read(path)?.build(),
            (None, None) => bail!("either --preset or --problem is required"),
        }
    }
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: Source,
    /// Penalty weight; defaults to the problem's own.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Also write the conic program as sdp.json.
    #[arg(long)]
    pub emit_sdp: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: Source,
    /// lo:hi:count[:log|lin]
    #[arg(long, default_value = "1e-9:10:80:log")]
    pub eta_grid: String,
    /// Parallel solves; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TwoRotationArgs {
    #[arg(long)]
    pub omega1: f64,
    #[arg(long, default_value_t = 15.0)]
    pub omega2: f64,
    #[arg(long, default_value_t = FRAC_PI_2, allow_negative_numbers = true)]
    pub phi1: f64,
    #[arg(long, default_value_t = -FRAC_PI_2, allow_negative_numbers = true)]
    pub phi2: f64,
    #[arg(long, default_value_t = presets::ETA)]
    pub eta: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct MultifreqArgs {
    /// Truncations to optimize for.
    #[arg(long = "n", value_delimiter = ',', default_values_t = [3usize, 5])]
    pub n: Vec<usize>,
    /// Truncations every design is evaluated at.
    #[arg(long, value_delimiter = ',', default_values_t = presets::MULTIFREQ_EVAL)]
    pub eval: Vec<usize>,
    #[arg(long, default_value_t = presets::MULTIFREQ_PERIOD)]
    pub period: f64,
    #[arg(long, default_value_t = presets::MULTIFREQ_DELAY)]
    pub delay: f64,
    #[arg(long, default_value_t = presets::ETA)]
    pub eta: f64,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(long)]
    pub preset: String,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub designs: usize,
}

pub fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::TwoRotation(a) => cmd_two_rotation(&a),
        Command::Multifreq(a) => cmd_multifreq(&a),
        Command::Export(a) => cmd_export(&a),
        Command::Check(a) => cmd_check(&a),
    }
}

fn summarize(out: &Outcome) {
    let r = &out.report;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into());
    eprintln!(
        "{} eta={:.3e} status={:?} theta={:.6e} peak_power={} trace_gap={} mass={:.4} kkt={} w1={}",
        r.name,
        r.eta,
        r.status,
        r.theta,
        fmt(r.peak_power),
        fmt(r.trace_gap),
        r.mass_utilization,
        fmt(r.kkt_residual),
        fmt(r.eigenfrequencies.first().copied()),
    );
    if let Some(e) = &r.error {
        eprintln!("error: {e}");
    }
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let case = args.source.case()?;
    let eta = args.eta.unwrap_or(case.eta);
    let out = run(&case, eta, &InteriorPoint::default(), Analyses::default())?;
    write_bundle(&args.out, &case.model.gs, &out)?;
    if args.emit_sdp {
        let relax = trusspp_core::sdp::build_penalized_relaxation(&case.model, &case.load, case.mass, eta)?;
        write_json(&args.out.join("sdp.json"), &relax.problem)?;
    }
    summarize(&out);
    Ok(out.report.exit_code())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub log: bool,
}

impl EtaGrid {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() < 3 || parts.len() > 4 {
            bail!("expected lo:hi:count[:log|lin], got {s:?}");
        }
        let lo: f64 = parts[0].parse().with_context(|| format!("bad lower bound {:?}", parts[0]))?;
        let hi: f64 = parts[1].parse().with_context(|| format!("bad upper bound {:?}", parts[1]))?;
        let count: usize = parts[2].parse().with_context(|| format!("bad count {:?}", parts[2]))?;
        let log = match parts.get(3).copied().unwrap_or("log") {
            "log" => true,
            "lin" => false,
            other => bail!("grid spacing must be log or lin, got {other:?}"),
        };
        if count == 0 || !(lo >= 0.0) || !(hi >= lo) || (log && lo <= 0.0) {
            bail!("invalid grid {s:?}");
        }
        Ok(EtaGrid { lo, hi, count, log })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let n = (self.count - 1) as f64;
        let mut v: Vec<f64> = (0..self.count)
            .map(|i| {
                let s = i as f64 / n;
                if self.log {
                    (self.lo.ln() + s * (self.hi.ln() - self.lo.ln())).exp()
                } else {
                    self.lo + s * (self.hi - self.lo)
                }
            })
            .collect();
        // exact endpoints
        v[0] = self.lo;
        v[self.count - 1] = self.hi;
        v
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

/// Solves every η independently; rows keep grid order.
pub fn sweep(case: &Case, etas: &[f64], jobs: usize) -> Result<Vec<Report>> {
    let what = Analyses { power_samples: 0, ..Analyses::default() };
    pool(jobs)?.install(|| {
        etas.par_iter()
            .map(|&eta| run(case, eta, &InteriorPoint::default(), what).map(|o| o.report).map_err(Into::into))
            .collect()
    })
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    let case = args.source.case()?;
    let grid = EtaGrid::parse(&args.eta_grid)?;
    let reports = sweep(&case, &grid.values(), args.jobs)?;
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("sweep.csv"), sweep_csv(&reports))?;
    let failed = reports.iter().filter(|r| r.exit_code() != EXIT_OK).count();
    eprintln!("{} of {} rows solved", reports.len() - failed, reports.len());
    Ok(reports.iter().map(Report::exit_code).max().unwrap_or(EXIT_OK))
}

#[derive(Serialize)]
struct TwoRotationReport<'a> {
    omega1: f64,
    omega2: f64,
    omega0: f64,
    n1: usize,
    n2: usize,
    #[serde(flatten)]
    report: &'a Report,
}

pub fn two_rotation_case(omega1: f64, omega2: f64, phi1: f64, phi2: f64) -> Result<(Case, f64, usize, usize)> {
    let model = presets::heidari_model();
    let (load, w0, n1, n2) = two_rotation_load(&model, omega1, omega2, phi1, phi2).with_context(|| {
        format!("ω₁ = {omega1} and ω₂ = {omega2} need a rational ratio (small integer multiples of a common base)")
    })?;
    let name = format!("two-rotation-{omega1}-{omega2}");
    Ok((Case { name, model, load, mass: presets::MASS, eta: presets::ETA }, w0, n1, n2))
}

pub fn cmd_two_rotation(args: &TwoRotationArgs) -> Result<i32> {
    let (case, w0, n1, n2) = two_rotation_case(args.omega1, args.omega2, args.phi1, args.phi2)?;
    eprintln!("base frequency {w0}, harmonics {n1} and {n2}");
    let out = run(&case, args.eta, &InteriorPoint::default(), Analyses::default())?;
    write_bundle(&args.out, &case.model.gs, &out)?;
    let rep = TwoRotationReport { omega1: args.omega1, omega2: args.omega2, omega0: w0, n1, n2, report: &out.report };
    write_json(&args.out.join("report.json"), &rep)?;
    summarize(&out);
    Ok(out.report.exit_code())
}

pub fn multifreq_case(n: usize, period: f64, delay: f64) -> Result<Case> {
    let model = presets::heidari_model();
    let load = multifreq_load(&model, n, period, delay)?;
    Ok(Case { name: format!("multifreq-n{n}"), model, load, mass: presets::MASS, eta: presets::ETA })
}

/// Peak power of the uniform design and of each optimized design under each truncation.
#[derive(Clone, Debug, Serialize)]
pub struct CrossTable {
    pub eval: Vec<usize>,
    /// (label, peak power per eval truncation).
    pub rows: Vec<(String, Vec<Option<f64>>)>,
}

impl CrossTable {
    pub fn csv(&self) -> String {
        let mut s = String::from("design");
        for n in &self.eval {
            let _ = write!(s, ",N={n}");
        }
        s.push('\n');
        for (label, vals) in &self.rows {
            s.push_str(label);
            for v in vals {
                let _ = write!(s, ",{}", v.map(|x| format!("{x:.6e}")).unwrap_or_default());
            }
            s.push('\n');
        }
        s
    }
}

pub fn cross_evaluate(designs: &[(String, Vec<f64>)], eval: &[usize], period: f64, delay: f64) -> Result<CrossTable> {
    let model = presets::heidari_model();
    let mut rows = Vec::new();
    for (label, a) in designs {
        let mut vals = Vec::new();
        for &n in eval {
            let load = multifreq_load(&model, n, period, delay)?;
            vals.push(peak_power(&model, a, &load).ok());
        }
        rows.push((label.clone(), vals));
    }
    Ok(CrossTable { eval: eval.to_vec(), rows })
}

pub fn cmd_multifreq(args: &MultifreqArgs) -> Result<i32> {
    if args.n.contains(&0) || args.eval.contains(&0) {
        bail!("truncations must be at least 1");
    }
    let cases: Vec<Case> = args.n.iter().map(|&n| multifreq_case(n, args.period, args.delay)).collect::<Result<_>>()?;
    let outcomes: Vec<Outcome> = pool(args.jobs)?.install(|| {
        cases
            .par_iter()
            .map(|c| run(c, args.eta, &InteriorPoint::default(), Analyses::default()).map_err(anyhow::Error::from))
            .collect::<Result<_>>()
    })?;
    let uniform = cases[0].model.uniform_design(presets::MASS);
    let mut designs = vec![("uniform".to_string(), uniform)];
    for (c, o) in cases.iter().zip(&outcomes) {
        write_bundle(&args.out.join(&c.name), &c.model.gs, o)?;
        summarize(o);
        designs.push((format!("optimized N={}", c.load.n_harm()), o.design.clone()));
    }
    let table = cross_evaluate(&designs, &args.eval, args.period, args.delay)?;
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("multifreq.csv"), table.csv())?;
    print!("{}", table.csv());
    Ok(outcomes.iter().map(|o| o.report.exit_code()).max().unwrap_or(EXIT_OK))
}

pub fn cmd_export(args: &ExportArgs) -> Result<i32> {
    let case = preset_case(&args.preset)?;
    let text = serde_json::to_string_pretty(&ProblemFile::from_case(&case))? + "\n";
    match &args.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub peak_power: f64,
    pub sampled_peak_power: f64,
    pub gradient_fd_deviation: f64,
    pub subgradient: bool,
}

/// Random positive designs at the mass bound that keep K_{Nω} positive semidefinite.
pub fn random_designs(case: &Case, seed: u64, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = case.load.n_harm() as f64 * case.load.omega0;
    let model = &case.model;
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count && tries < 1000 * count.max(1) {
        tries += 1;
        let a: Vec<f64> = (0..model.n_elements()).map(|_| rng.gen_range(0.1..2.0)).collect();
        let s = case.mass / model.mass(&a);
        let a: Vec<f64> = a.iter().map(|v| v * s).collect();
        let psd = dynamic_min_eigenvalue(model, &a, top).map(|v| v > 0.0).unwrap_or(false);
        if psd && solve_equilibrium(model, &a, &case.load).is_ok() {
            out.push(a);
        }
    }
    out
}

pub fn check_rows(case: &Case, seed: u64, count: usize) -> Result<Vec<CheckRow>> {
    let ip = InteriorPoint::default();
    random_designs(case, seed, count)
        .into_iter()
        .map(|a| {
            let ss = solve_equilibrium(&case.model, &a, &case.load)?;
            let g = peak_power_grad(&case.model, &a, &case.load, &ip)?.with_fd_check(&case.model, &a, &case.load, 1e-6)?;
            Ok(CheckRow {
                peak_power: peak_power(&case.model, &a, &case.load)?,
                sampled_peak_power: peak_power_time_sampled(&case.load, &ss, 1 << 16),
                gradient_fd_deviation: g.fd_check.unwrap_or(f64::NAN),
                subgradient: g.subgradient,
            })
        })
        .collect()
}

pub fn cmd_check(args: &CheckArgs) -> Result<i32> {
    let case = args.source.case()?;
    let rows = check_rows(&case, args.seed, args.designs)?;
    println!("{}", serde_json::to_string_pretty(&rows)?);
    Ok(EXIT_OK)
}
