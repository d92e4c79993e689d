//! Command-line front end: classify, sample, flow, verify, limits.
//!
//! Exit codes: 0 success, 1 verification failures, 2 usage or parameter errors, 3 domain or
//! numeric errors.

use std::f64::consts::PI;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::families::{
    conical_data, curvature_closed, domain_s, faraday_closed, family_from_params, limit_metric, ConicalData, FamilyMetric,
    TimeEnd,
};
use crate::flow::{evolve_observed, Boundary, FlowState, PdeConfig};
use crate::geometry::{curvature_fd, faraday_fd, moment_map, vortex_residual};
use crate::params::{classify_regime, FamilyDescriptor, FamilyId, RegimeParameters, Sign};
use crate::verify::{catalog, find_entry, run_all, CatalogEntry, VerifyConfig, Window, DEFAULT_DS};

/// Defaults shared by the subcommands.
pub mod defaults {
    /// Grid spacing for `sample` and `verify`.
    pub const DS: f64 = 1e-3;
    /// Time step for `flow`.
    pub const DT: f64 = 1e-5;
    /// Grid spacing for `flow`; 1e-3 would need dt below 5e-7 for the explicit step.
    pub const FLOW_DS: f64 = 1e-2;
    /// Rows written by `flow` besides the initial one.
    pub const FLOW_SNAPSHOTS: usize = 10;
    /// s-window for `limits` when the family has no built-in probe.
    pub const LIMIT_WINDOW: (f64, f64) = (-5.0, 5.0);
    pub const LIMIT_POINTS: usize = 201;
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "vortex-flow", version, about = "Explicit vortex-type metrics on the cylinder and their Ricci flow")]
pub struct Cli {
    /// Directory for output files; without it results go to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Also write a gnuplot script next to each CSV (needs --out).
    #[arg(long, global = true)]
    pub emit_gnuplot: bool,
    /// Scale grid-dependent tolerances with ds.
    #[arg(long, global = true)]
    pub scale_tol: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a parameter set into one of the families A-J.
    Classify(ClassifyArgs),
    /// Sample a family profile with closed-form and finite-difference curvature.
    Sample(SampleArgs),
    /// Evolve a family in time, by closed form and/or the PDE solver.
    Flow(FlowArgs),
    /// Run the invariant suites over the built-in catalog.
    Verify(VerifyArgs),
    /// Distances of rescaled profiles to the documented limit metric.
    Limits(LimitsArgs),
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub tau0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma0: f64,
    /// Checked against 4 eps rho = tau0^2 - sigma0 when given.
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hat_eps: Option<i64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub t0: f64,
}

/// Selects a family: a catalog name or alias (sausage, cigar, torus, eternal, E-cone, ...) or a
/// letter, optionally with its own parameters.
#[derive(Clone, Debug, Args)]
pub struct FamilyArgs {
    #[arg(long)]
    pub family: String,
    /// rho for C-J (C and D force 0).
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// Constant tau for A and B.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hat_eps: Option<i64>,
    /// Reference time at which the parameters are read off the normal form.
    #[arg(long, allow_hyphen_values = true)]
    pub t_ref: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub s_shift: f64,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub s_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub s_max: Option<f64>,
    #[arg(long, default_value_t = defaults::DS)]
    pub ds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FlowMode {
    Closed,
    Numeric,
    Both,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t1: f64,
    #[arg(long, default_value_t = defaults::DT)]
    pub dt: f64,
    #[arg(long, default_value_t = defaults::FLOW_DS)]
    pub ds: f64,
    #[arg(long, value_enum, default_value = "both")]
    pub mode: FlowMode,
    #[arg(long, allow_hyphen_values = true)]
    pub s_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub s_max: Option<f64>,
    #[arg(long, default_value_t = defaults::FLOW_SNAPSHOTS)]
    pub snapshots: usize,
    /// Hold the end values instead of taking them from the closed form.
    #[arg(long)]
    pub frozen_ends: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// `all`, a family letter, or a catalog name or alias.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = DEFAULT_DS)]
    pub ds: f64,
    /// Report file; defaults to report.json under --out, else stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Skip the PDE cross-checks.
    #[arg(long)]
    pub no_pde: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Start,
    End,
}

#[derive(Debug, Args)]
pub struct LimitsArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub t_seq: Vec<f64>,
    /// Which end of the time interval; inferred from the last time when omitted.
    #[arg(long, value_enum)]
    pub direction: Option<Direction>,
    #[arg(long, allow_hyphen_values = true)]
    pub s_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub s_max: Option<f64>,
    /// Leave out |s - shift| < gap, where some limits are singular.
    #[arg(long)]
    pub s_gap: Option<f64>,
}

/// Error carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InconsistentParameters { .. } | Error::InvalidRegime(_) | Error::InvalidInput(_) => EXIT_USAGE,
            _ => EXIT_DOMAIN,
        };
        CliError { code, message: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError { code: EXIT_USAGE, message: msg.into() }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError { code: EXIT_DOMAIN, message: format!("i/o error: {e}") }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<i32> {
    if cli.emit_gnuplot && cli.out.is_none() {
        return Err(usage("--emit-gnuplot needs --out"));
    }
    match &cli.command {
        Command::Classify(a) => cmd_classify(cli, a),
        Command::Sample(a) => cmd_sample(cli, a),
        Command::Flow(a) => cmd_flow(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
        Command::Limits(a) => cmd_limits(cli, a),
    }
}

fn sign_flag(v: i64, name: &str) -> CliResult<Sign> {
    Sign::from_int(v).ok_or_else(|| usage(format!("--{name} must be 1 or -1, got {v}")))
}

#[derive(Serialize)]
struct ClassifyOutput {
    descriptor: FamilyDescriptor,
    params: RegimeParameters,
    ends: Vec<ConicalData>,
}

fn cmd_classify(cli: &Cli, a: &ClassifyArgs) -> CliResult<i32> {
    let eps = sign_flag(a.epsilon, "epsilon")?;
    let hat = a.hat_eps.map(|h| sign_flag(h, "hat-eps")).transpose()?;
    let mut p = RegimeParameters::new(eps, a.tau0, a.sigma0, a.t0);
    if let Some(rho) = a.rho {
        p.rho = rho;
        p.check()?;
    }
    let descriptor = classify_regime(&p, hat)?;
    let ends = family_from_params(&p, hat).map(|fm| conical_data(&fm)).unwrap_or_default();
    let out = ClassifyOutput { descriptor, params: p, ends };
    let text = match cli.format {
        Format::Json => json(&out),
        Format::Csv => {
            let d = &out.descriptor;
            let ends: Vec<String> = out.ends.iter().map(|e| serde_json::to_string(e).expect("end")).collect();
            let header = ["family_id", "branch", "hat_eps", "time_lo", "time_hi", "time_tag", "rho", "surface_note", "ends"];
            let row = vec![
                d.family_id.to_string(),
                d.branch.clone(),
                d.hat_eps.map_or("none".into(), |h| h.to_string()),
                num(d.time_interval.lo),
                num(d.time_interval.hi),
                format!("{:?}", d.time_tag),
                num(p.rho),
                d.surface_note.clone(),
                ends.join(";"),
            ];
            csv_text(&header, &[row])?
        }
    };
    emit(cli, "classify", &text, None)?;
    Ok(EXIT_OK)
}

/// Default reference time for a family given by letter and rho: a time inside its interval.
fn default_t_ref(id: FamilyId, rho: f64, hat: Option<Sign>) -> f64 {
    let k = rho.abs().sqrt();
    match id {
        FamilyId::A | FamilyId::B | FamilyId::J => 0.0,
        FamilyId::C => 1.0,
        FamilyId::D | FamilyId::E => -1.0,
        FamilyId::F => -PI / (4.0 * k),
        FamilyId::G => {
            if hat == Some(Sign::Plus) {
                1.0
            } else {
                -1.0
            }
        }
        FamilyId::H => PI / (4.0 * k),
        FamilyId::I => 1.0,
    }
}

/// Resolves family flags to a metric plus the catalog entry that supplies default windows.
pub fn resolve_family(a: &FamilyArgs) -> CliResult<(FamilyMetric, CatalogEntry)> {
    use Sign::{Minus, Plus};
    let named = find_entry(&a.family);
    let id = match &named {
        Some(e) => e.family.id(),
        None => FamilyId::parse(&a.family).ok_or_else(|| usage(format!("unknown family '{}'", a.family)))?,
    };
    let base = named.clone().unwrap_or_else(|| catalog().into_iter().find(|e| e.family.id() == id).expect("every letter is cataloged"));
    let hat_flag = a.hat_eps.map(|h| sign_flag(h, "hat-eps")).transpose()?;
    let custom = a.rho.is_some() || a.tau.is_some() || a.t_ref.is_some() || hat_flag.is_some();
    let fm = if !custom {
        base.family.clone()
    } else {
        let base_hat = base.family.descriptor.hat_eps;
        let hat = hat_flag.or(base_hat);
        match id {
            FamilyId::A | FamilyId::B => {
                let tau = a.tau.unwrap_or(base.family.params.tau0);
                family_from_params(&RegimeParameters::soliton(Plus, tau), hat)?
            }
            _ => {
                let (eps, sigma_sign, rho) = match id {
                    FamilyId::C => (Minus, Plus, 0.0),
                    FamilyId::D => (Plus, Plus, 0.0),
                    FamilyId::F | FamilyId::I => (Minus, Plus, a.rho.unwrap_or(base.family.params.rho)),
                    FamilyId::J => (Plus, Minus, a.rho.unwrap_or(base.family.params.rho)),
                    _ => (Plus, Plus, a.rho.unwrap_or(base.family.params.rho)),
                };
                let t_ref = a.t_ref.unwrap_or_else(|| default_t_ref(id, rho, hat));
                let p = RegimeParameters::from_normal_form(eps, rho, sigma_sign, t_ref)?;
                let fm = family_from_params(&p, hat)?;
                if fm.id() != id {
                    return Err(usage(format!("these flags give family {}, not {}", fm.id(), id)));
                }
                fm
            }
        }
    };
    Ok((fm.with_s_shift(a.s_shift), base))
}

/// Explicit s-bounds, with missing ones taken from the catalog window at time t.
fn window_or(window: Window, fm: &FamilyMetric, t: f64, lo: Option<f64>, hi: Option<f64>) -> CliResult<(f64, f64)> {
    let (dlo, dhi) = if lo.is_some() && hi.is_some() { (0.0, 0.0) } else { window.at(fm, t)? };
    let (lo, hi) = (lo.unwrap_or(dlo), hi.unwrap_or(dhi));
    if !(hi > lo) {
        return Err(usage(format!("empty s-window [{lo}, {hi}]")));
    }
    Ok((lo, hi))
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(|e| usage(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Rows as a list of objects keyed by the header.
fn rows_json(header: &[&str], rows: &[Vec<f64>]) -> String {
    let objs: Vec<serde_json::Map<String, serde_json::Value>> = rows
        .iter()
        .map(|r| header.iter().zip(r).map(|(k, v)| (k.to_string(), serde_json::json!(v))).collect())
        .collect();
    json(&objs)
}

fn table(cli: &Cli, header: &[&str], rows: &[Vec<f64>]) -> CliResult<String> {
    match cli.format {
        Format::Csv => csv_text(header, &rows.iter().map(|r| r.iter().map(|v| num(*v)).collect()).collect::<Vec<_>>()),
        Format::Json => Ok(rows_json(header, rows)),
    }
}

/// Writes `<stem>.csv|json` under --out (atomically) or prints to stdout.
fn emit(cli: &Cli, stem: &str, text: &str, plot: Option<&str>) -> CliResult<()> {
    let ext = match cli.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    match &cli.out {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(io_err)?;
        }
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(io_err)?;
            let name = format!("{stem}.{ext}");
            write_atomic(&dir.join(&name), text)?;
            if cli.emit_gnuplot && cli.format == Format::Csv {
                if let Some(body) = plot {
                    let script = format!(
                        "# plots {name}\nset datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\nset output '{stem}.png'\n{body}\n",
                    );
                    write_atomic(&dir.join(format!("{stem}.gp")), &script.replace("DATA", &format!("'{name}'")))?;
                }
            }
        }
    }
    Ok(())
}

pub fn write_atomic(path: &Path, text: &str) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(text.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn cmd_sample(cli: &Cli, a: &SampleArgs) -> CliResult<i32> {
    if !(a.ds > 0.0) {
        return Err(usage("--ds must be positive"));
    }
    let (fm, entry) = resolve_family(&a.family)?;
    domain_s(&fm, a.t)?;
    let (lo, hi) = window_or(entry.window, &fm, a.t, a.s_min, a.s_max)?;
    let p = fm.profile(a.t, lo, hi, a.ds)?;
    let r_fd = curvature_fd(&p)?;
    let f_fd = faraday_fd(&p)?;
    let mu = moment_map(&p)?;
    let mut rows = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        let s = p.s(i);
        rows.push(vec![s, p.u[i], 1.0 / p.u[i], curvature_closed(&fm, a.t, s)?, r_fd[i], faraday_closed(&fm, a.t, s)?, f_fd[i], mu[i]]);
    }
    let header = ["s", "u", "w", "R_closed", "R_fd", "F_closed", "F_fd", "mu"];
    let text = table(cli, &header, &rows)?;
    emit(cli, "sample", &text, Some("plot DATA using 1:2 with lines, DATA using 1:4 with lines, DATA using 1:6 with lines"))?;
    Ok(EXIT_OK)
}

fn cmd_flow(cli: &Cli, a: &FlowArgs) -> CliResult<i32> {
    if !(a.t1 > a.t0) {
        return Err(usage("need --t1 > --t0"));
    }
    if !(a.ds > 0.0 && a.dt > 0.0) {
        return Err(usage("--ds and --dt must be positive"));
    }
    let (fm, entry) = resolve_family(&a.family)?;
    let window = entry.pde.map_or(entry.window, |c| c.window);
    let (lo, hi) = window_or(window, &fm, a.t1, a.s_min, a.s_max)?;
    domain_s(&fm, a.t0)?;
    domain_s(&fm, a.t1)?;
    let eps = fm.epsilon();
    let snapshots = a.snapshots.max(1);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut summary = 0.0f64;
    if matches!(a.mode, FlowMode::Closed | FlowMode::Both) {
        for k in 0..=snapshots {
            let t = a.t0 + (a.t1 - a.t0) * k as f64 / snapshots as f64;
            let p = fm.profile(t, lo, hi, a.ds)?;
            let st = fm.tau_sigma(t)?;
            rows.push(vec![0.0, t, st.tau, st.sigma, vortex_residual(&p, eps, st.tau)?, 0.0]);
        }
    }
    if matches!(a.mode, FlowMode::Numeric | FlowMode::Both) {
        let cfg = PdeConfig {
            ds: a.ds,
            dt: a.dt,
            boundary: if a.frozen_ends { Boundary::Frozen } else { Boundary::Dirichlet },
            stability_factor: 0.5,
        };
        let steps = ((a.t1 - a.t0) / a.dt - 1e-9).ceil().max(1.0) as usize;
        let every = steps.div_ceil(snapshots).max(1);
        let mut observed: Vec<(FlowState, f64)> = Vec::new();
        let (_, max_err) = evolve_observed(&fm, a.t0, a.t1, (lo, hi), &cfg, every, |s, e| observed.push((s.clone(), e)))?;
        for (st, err) in observed {
            let p = st.to_profile()?;
            rows.push(vec![1.0, st.t, st.tau, st.sigma, vortex_residual(&p, eps, st.tau)?, err]);
        }
        summary = max_err;
    }
    let header = ["numeric", "t", "tau", "sigma", "max_vortex_residual", "sup_error_vs_closed"];
    let text = table(cli, &header, &rows)?;
    emit(cli, "flow", &text, Some("set logscale y\nplot DATA using 2:6 with linespoints"))?;
    eprintln!("max sup_error_vs_closed = {}", num(summary));
    Ok(EXIT_OK)
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> CliResult<i32> {
    if !(a.ds > 0.0) {
        return Err(usage("--ds must be positive"));
    }
    let filter = if a.suite.eq_ignore_ascii_case("all") {
        None
    } else {
        if !catalog().iter().any(|e| e.matches(&a.suite)) {
            return Err(usage(format!("unknown suite '{}'", a.suite)));
        }
        Some(vec![a.suite.clone()])
    };
    let cfg = VerifyConfig { ds: a.ds, scale_tol: cli.scale_tol, filter, include_pde: !a.no_pde, ..VerifyConfig::default() };
    let report = run_all(&cfg);
    let text = report.to_json() + "\n";
    match (&a.report, &cli.out) {
        (Some(path), _) => write_atomic(path, &text)?,
        (None, Some(dir)) => {
            std::fs::create_dir_all(dir).map_err(io_err)?;
            write_atomic(&dir.join("report.json"), &text)?;
        }
        (None, None) => print!("{text}"),
    }
    for r in report.results.iter().filter(|r| !r.passed) {
        eprintln!("FAIL {} {} t={:?} residual={:e} tolerance={:e}", r.params_summary, r.check_id, r.t, r.residual, r.tolerance);
    }
    eprintln!("{} checks, {} passed, {} failed", report.summary.total, report.summary.passed, report.summary.failed);
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_limits(cli: &Cli, a: &LimitsArgs) -> CliResult<i32> {
    let (fm, entry) = resolve_family(&a.family)?;
    let iv = fm.descriptor.time_interval;
    let last = *a.t_seq.last().ok_or_else(|| usage("--t-seq is empty"))?;
    let direction = match a.direction {
        Some(Direction::Start) => TimeEnd::Start,
        Some(Direction::End) => TimeEnd::End,
        None => {
            if (iv.hi - last).abs() <= (last - iv.lo).abs() {
                TimeEnd::End
            } else {
                TimeEnd::Start
            }
        }
    };
    let lim = limit_metric(&fm, direction)?;
    let overridden = a.s_min.is_some() || a.s_max.is_some() || a.s_gap.is_some();
    let s_points: Vec<f64> = match (&entry.limit, overridden) {
        (Some(probe), false) if probe.direction == direction => probe.s_points.iter().map(|s| s + fm.s_shift).collect(),
        _ => {
            let lo = a.s_min.unwrap_or(defaults::LIMIT_WINDOW.0);
            let hi = a.s_max.unwrap_or(defaults::LIMIT_WINDOW.1);
            let gap = a.s_gap.unwrap_or(0.0);
            let n = defaults::LIMIT_POINTS - 1;
            (0..=n)
                .map(|i| lo + (hi - lo) * i as f64 / n as f64)
                .filter(|s| (s - fm.s_shift).abs() >= gap)
                .collect()
        }
    };
    let mut rows = Vec::new();
    for &t in &a.t_seq {
        let st = fm.tau_sigma(t)?;
        let k = match lim.factor {
            crate::families::RescaleFactor::Tau => st.tau,
            crate::families::RescaleFactor::SqrtSigma => st.sigma.sqrt(),
        };
        rows.push(vec![t, k, lim.distance(&fm, t, &s_points)?]);
    }
    let header = ["t", "rescale_factor", "distance"];
    let text = table(cli, &header, &rows)?;
    emit(cli, "limits", &text, Some("set logscale y\nplot DATA using 1:3 with linespoints"))?;
    Ok(EXIT_OK)
}
