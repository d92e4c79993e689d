//! Invariant suites over a built-in catalog of families, with JSON-ready reports.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{
    conical_data, curvature_closed, domain_s, faraday_closed, family_from_params, limit_metric, EndKind, FamilyMetric,
    TimeEnd,
};
use crate::flow::{evolve, l_factor, l_factor_ode, local_flow_check, Boundary, PdeConfig};
use crate::geometry::{
    laplacian_identity_f, laplacian_identity_r, s_length, soliton_defect, structure_identities, vortex_residual,
    Profile,
};
use crate::params::{flat_soliton, tau_sigma_closed, tau_sigma_ode, FamilyId, RegimeParameters, Sign};

pub const DEFAULT_DS: f64 = 1e-3;
pub const DEFAULT_DT: f64 = 1e-5;
/// Grid for the PDE cross-check inside suites.
pub const PDE_DS: f64 = 1e-2;
/// Grid spacing at which the default tolerances are stated.
pub const REFERENCE_DS: f64 = 1e-3;
/// Spacing used for the second difference of R in the R-Laplacian check.
pub const LAPLACIAN_R_SPACING: f64 = 1e-2;
/// Closed-form samples per family, spread over the sampled times.
pub const CLOSED_SAMPLES: usize = 100;
/// Below this the FD vortex residual is at rounding level and the refinement ratio is meaningless.
const REFINE_FLOOR: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_id: String,
    pub family_id: String,
    pub params_summary: String,
    pub t: Option<f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryGrid {
    pub name: String,
    pub s_ranges: Vec<(f64, f64)>,
    pub t_samples: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub ds: f64,
    pub entries: Vec<EntryGrid>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub created_at: String,
    pub grid_spec: GridSpec,
    pub results: Vec<CheckResult>,
    pub summary: Summary,
}

impl Report {
    fn assemble(ds: f64, parts: Vec<(EntryGrid, Vec<CheckResult>)>) -> Report {
        let mut entries = Vec::new();
        let mut results = Vec::new();
        for (g, r) in parts {
            entries.push(g);
            results.extend(r);
        }
        let passed = results.iter().filter(|r| r.passed).count();
        Report {
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            grid_spec: GridSpec { ds, entries },
            summary: Summary { total: results.len(), passed, failed: results.len() - passed },
            results,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `base` holds at REFERENCE_DS; with scaling on it becomes base * (ds / REFERENCE_DS)^order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub base: f64,
    pub order: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances(pub BTreeMap<String, Tolerance>);

impl Default for Tolerances {
    fn default() -> Self {
        let table: [(&str, f64, i32); 22] = [
            ("w-first-integral", 1e-10, 0),
            ("w-second-derivative", 1e-10, 0),
            ("vortex-closed", 1e-10, 0),
            ("vortex-fd", 1e-4, 2),
            ("vortex-refine", 1.0, 0),
            ("sigma-value", 1e-9, 0),
            ("sigma-spread", 1e-9, 0),
            ("rho-conservation", 1e-9, 0),
            ("r-slope-identity", 1e-3, 2),
            ("f-slope-identity", 1e-3, 2),
            ("laplacian-f", 1e-2, 2),
            ("laplacian-r", 1e-2, 2),
            ("curvature-bound", 1e-9, 0),
            ("sausage-bound", 1e-9, 0),
            ("soliton", 1e-4, 2),
            ("cone-angle", 0.0, 0),
            ("limit", 0.0, 0),
            ("tau-sigma-ode", 1e-6, 0),
            ("l-factor-ode", 1e-8, 0),
            ("flow-local", 1e-8, 0),
            ("flow-local-vortex", 1e-4, 2),
            ("pde", 1e-4, 0),
        ];
        let mut m: BTreeMap<String, Tolerance> =
            table.iter().map(|&(k, base, order)| (k.to_string(), Tolerance { base, order })).collect();
        m.insert("pde-affine".into(), Tolerance { base: 1e-12, order: 0 });
        Tolerances(m)
    }
}

impl Tolerances {
    pub fn get(&self, check_id: &str, ds: f64, scale: bool) -> f64 {
        let t = self.0.get(check_id).copied().unwrap_or(Tolerance { base: 0.0, order: 0 });
        if scale && t.order != 0 {
            t.base * (ds / REFERENCE_DS).powi(t.order)
        } else {
            t.base
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub ds: f64,
    pub scale_tol: bool,
    /// Entry names or family letters; `None` runs everything, an empty list nothing.
    pub filter: Option<Vec<String>>,
    pub include_pde: bool,
    pub tolerances: Tolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { ds: DEFAULT_DS, scale_tol: false, filter: None, include_pde: true, tolerances: Tolerances::default() }
    }
}

/// s-window as a function of time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Window {
    Fixed { lo: f64, hi: f64 },
    /// [speed t + lo, speed t + hi], following an end that moves with the flow.
    Moving { speed: f64, lo: f64, hi: f64 },
    /// Central fraction of the s-domain at time t.
    Interior { fraction: f64 },
}

impl Window {
    pub fn at(&self, fm: &FamilyMetric, t: f64) -> Result<(f64, f64)> {
        match *self {
            Window::Fixed { lo, hi } => Ok((lo, hi)),
            Window::Moving { speed, lo, hi } => Ok((speed * t + lo + fm.s_shift, speed * t + hi + fm.s_shift)),
            Window::Interior { fraction } => {
                let iv = domain_s(fm, t)?.interval;
                let (mid, half) = (0.5 * (iv.lo + iv.hi), 0.5 * fraction * (iv.hi - iv.lo));
                Ok((mid - half, mid + half))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitProbe {
    pub direction: TimeEnd,
    pub t_seq: Vec<f64>,
    pub s_points: Vec<f64>,
}

/// Span and window for the PDE cross-check; the window keeps max w moderate so the explicit step stays affordable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdeCase {
    pub t0: f64,
    pub t1: f64,
    pub window: Window,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub aliases: Vec<String>,
    pub family: FamilyMetric,
    pub t_samples: Vec<f64>,
    pub window: Window,
    /// Interval of length 0.5 for the tau/sigma ODE comparison.
    pub tau_window: (f64, f64),
    pub pde: Option<PdeCase>,
    pub limit: Option<LimitProbe>,
}

impl CatalogEntry {
    pub fn matches(&self, key: &str) -> bool {
        let key = key.trim();
        self.name.eq_ignore_ascii_case(key)
            || self.aliases.iter().any(|a| a.eq_ignore_ascii_case(key))
            || FamilyId::parse(key) == Some(self.family.id())
    }

    pub fn params_summary(&self) -> String {
        let p = &self.family.params;
        format!(
            "{} [{}] eps={} tau0={} sigma0={} rho={} t0={}",
            self.name, self.family.descriptor.branch, p.epsilon, p.tau0, p.sigma0, p.rho, p.t0
        )
    }

    pub fn grid(&self) -> EntryGrid {
        EntryGrid {
            name: self.name.clone(),
            s_ranges: self.t_samples.iter().map(|&t| self.window.at(&self.family, t).unwrap_or((f64::NAN, f64::NAN))).collect(),
            t_samples: self.t_samples.clone(),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn entry(
    name: &str,
    aliases: &[&str],
    family: FamilyMetric,
    t_samples: &[f64],
    window: Window,
    tau_window: (f64, f64),
    pde: Option<PdeCase>,
    limit: Option<LimitProbe>,
) -> CatalogEntry {
    CatalogEntry {
        name: name.into(),
        aliases: aliases.iter().map(|a| a.to_string()).collect(),
        family,
        t_samples: t_samples.to_vec(),
        window,
        tau_window,
        pde,
        limit,
    }
}

fn normal(eps: Sign, rho: f64, sigma_sign: Sign, t: f64, hat: Option<Sign>) -> FamilyMetric {
    let p = RegimeParameters::from_normal_form(eps, rho, sigma_sign, t).expect("catalog parameters");
    family_from_params(&p, hat).expect("catalog family")
}

fn soliton(tau: f64, hat: Option<Sign>) -> FamilyMetric {
    family_from_params(&RegimeParameters::soliton(Sign::Plus, tau), hat).expect("catalog family")
}

fn grid_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// One entry per family and branch, with cone-angle variants (rho = 9, angle 3 pi) next to the
/// smooth rho = 4 members.
///
/// Windows stay where u is not small: the rounding error of the FD curvature grows like
/// 1 / (ds^2 u), and the refinement check needs the truncation error to dominate.
pub fn catalog() -> Vec<CatalogEntry> {
    use Sign::{Minus, Plus};
    let fixed = |lo, hi| Window::Fixed { lo, hi };
    let right = |lo, hi| Window::Moving { speed: 2.0, lo, hi };
    let left = |lo, hi| Window::Moving { speed: -2.0, lo, hi };
    let interior = |fraction| Window::Interior { fraction };
    let pde = |t0, t1, window| Some(PdeCase { t0, t1, window });
    let flat = {
        let p = RegimeParameters::soliton(Plus, 4.0);
        crate::families::build_family(&flat_soliton(&p).expect("flat"), &p).expect("flat family")
    };
    let sausage_limit = LimitProbe { direction: TimeEnd::End, t_seq: vec![-1e-1, -1e-2, -1e-3], s_points: grid_points(-5.0, 5.0, 200) };
    let f_limit = |rho: f64| {
        let start = -PI / (2.0 * f64::sqrt(rho));
        let mut s_points = grid_points(-5.0, -0.5, 90);
        s_points.extend(grid_points(0.5, 5.0, 90));
        LimitProbe { direction: TimeEnd::Start, t_seq: vec![start + 1e-1, start + 1e-2, start + 1e-3], s_points }
    };
    vec![
        entry("A+", &[], soliton(0.0, Some(Plus)), &[0.0, 0.5, 1.0], right(0.5, 1.9), (0.0, 0.5), pde(0.0, 0.02, right(0.5, 1.9)), None),
        entry("A-", &[], soliton(0.0, Some(Minus)), &[0.0, 0.5, 1.0], left(-1.9, -0.5), (0.0, 0.5), pde(0.0, 0.02, left(-1.9, -0.5)), None),
        entry("B-cigar", &["cigar"], soliton(4.0, Some(Plus)), &[-0.5, 0.0, 0.5], right(-0.5, 3.0), (0.0, 0.5), pde(0.0, 0.02, right(-0.5, 3.0)), None),
        entry("B-cigar-cone", &[], soliton(6.0, Some(Plus)), &[-0.5, 0.0, 0.5], right(-0.3, 2.0), (0.0, 0.5), pde(0.0, 0.02, right(-0.3, 2.0)), None),
        entry("B-cusp", &[], soliton(4.0, Some(Minus)), &[-0.5, 0.0, 0.5], right(0.3, 3.0), (0.0, 0.5), pde(0.0, 0.02, right(0.3, 3.0)), None),
        entry("B-exploding", &[], soliton(-4.0, Some(Minus)), &[-0.5, 0.0, 0.5], right(0.4, 2.5), (0.0, 0.5), pde(0.0, 0.02, right(0.4, 1.2)), None),
        entry("B-flat", &[], flat, &[0.0, 1.0], fixed(-2.0, 2.0), (0.0, 0.5), pde(0.0, 0.02, fixed(-2.0, 2.0)), None),
        entry("C", &[], normal(Minus, 0.0, Plus, 0.5, None), &[0.25, 0.4, 0.5], fixed(-3.0, 3.0), (1.0, 1.5), pde(0.5, 0.52, fixed(-3.0, 3.0)), None),
        entry("D+", &[], normal(Plus, 0.0, Plus, -1.0, None), &[-1.0, -0.75, -0.5], interior(0.7), (-2.0, -1.5), pde(-1.0, -0.98, interior(0.7)), None),
        entry("D-", &[], normal(Plus, 0.0, Plus, 1.0, None), &[0.5, 0.75, 1.0], right(0.4, 3.0), (1.0, 1.5), pde(1.0, 1.02, right(0.4, 3.0)), None),
        entry("E", &["sausage"], normal(Plus, 4.0, Plus, -1.0, Some(Plus)), &[-1.0, -0.5, -0.1], fixed(-1.5, 1.5), (-1.0, -0.5), pde(-1.0, -0.98, fixed(-1.5, 1.5)), Some(sausage_limit.clone())),
        entry("E-cone", &[], normal(Plus, 9.0, Plus, -1.0, Some(Plus)), &[-1.0, -0.5, -0.1], fixed(-1.0, 1.0), (-1.0, -0.5), pde(-1.0, -0.98, fixed(-1.0, 1.0)), Some(sausage_limit)),
        entry("F", &[], normal(Minus, 4.0, Plus, -0.4, None), &[-0.6, -0.4, -0.1], fixed(-1.5, 1.5), (-0.7, -0.2), pde(-0.6, -0.58, fixed(-1.0, 1.0)), Some(f_limit(4.0))),
        entry("F-cone", &[], normal(Minus, 9.0, Plus, -0.3, None), &[-0.35, -0.25, -0.1], fixed(-0.8, 0.8), (-0.515, -0.015), pde(-0.35, -0.33, fixed(-0.5, 0.5)), Some(f_limit(9.0))),
        entry("G+", &[], normal(Plus, 4.0, Plus, -1.0, Some(Minus)), &[-1.0, -0.75, -0.5], interior(0.6), (-1.0, -0.5), pde(-1.0, -0.98, interior(0.6)), None),
        entry("G-", &[], normal(Plus, 4.0, Plus, 0.75, Some(Minus)), &[0.5, 0.75, 1.0], right(0.5, 2.0), (0.5, 1.0), pde(0.5, 0.52, right(0.5, 1.2)), None),
        entry("H", &[], normal(Plus, -4.0, Plus, 0.35, None), &[0.2, 0.35, 0.5], interior(0.5), (0.1, 0.6), pde(0.2, 0.22, interior(0.5)), None),
        entry("I", &["torus"], normal(Minus, -4.0, Plus, 0.75, None), &[0.5, 0.75, 1.0], fixed(-2.0, 2.0), (0.5, 1.0), pde(0.5, 0.52, fixed(-2.0, 2.0)), None),
        entry("J", &["eternal"], normal(Plus, 4.0, Minus, 0.0, None), &[-0.2, 0.0, 0.2], right(0.5, 2.5), (0.1, 0.6), pde(0.0, 0.02, right(0.4, 1.2)), None),
        entry("J-cone", &[], normal(Plus, 9.0, Minus, 0.0, None), &[-0.2, 0.0, 0.2], right(0.4, 1.7), (0.1, 0.6), pde(0.0, 0.02, right(0.3, 0.8)), None),
    ]
}

pub fn find_entry(key: &str) -> Option<CatalogEntry> {
    catalog().into_iter().find(|e| e.name.eq_ignore_ascii_case(key) || e.aliases.iter().any(|a| a.eq_ignore_ascii_case(key)))
}

struct Recorder<'a> {
    family_id: String,
    summary: String,
    cfg: &'a VerifyConfig,
    out: Vec<CheckResult>,
}

impl Recorder<'_> {
    fn push(&mut self, check_id: &str, t: Option<f64>, r: Result<f64>) {
        self.push_with(check_id, check_id, t, r, None)
    }

    fn push_with(&mut self, check_id: &str, tol_key: &str, t: Option<f64>, r: Result<f64>, note: Option<String>) {
        let tolerance = self.cfg.tolerances.get(tol_key, self.cfg.ds, self.cfg.scale_tol);
        let (residual, passed, note) = match r {
            Ok(v) => (v, v <= tolerance, note),
            Err(e) => (f64::NAN, false, Some(e.to_string())),
        };
        self.out.push(CheckResult {
            check_id: check_id.into(),
            family_id: self.family_id.clone(),
            params_summary: self.summary.clone(),
            t,
            residual,
            tolerance,
            passed,
            note,
        });
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        (a - b).abs()
    } else {
        ((a - b) / b).abs()
    }
}

/// Closed-form checks at deterministic sample points.
fn closed_form_checks(rec: &mut Recorder, fm: &FamilyMetric, t: f64, s: &[f64]) {
    let eps = fm.epsilon();
    let rho = fm.params.rho;
    let is_sausage = fm.id() == FamilyId::E;
    let st = match fm.tau_sigma(t) {
        Ok(st) => st,
        Err(e) => {
            for id in ["w-first-integral", "w-second-derivative", "vortex-closed", "sigma-value", "sigma-spread", "rho-conservation"] {
                rec.push(id, Some(t), Err(e.clone()));
            }
            return;
        }
    };
    let (tau, sigma) = (st.tau, st.sigma);
    let mut first_integral = Ok(0.0f64);
    let mut second_derivative = Ok(0.0f64);
    let mut vortex = Ok(0.0f64);
    let mut sigma_value = Ok(0.0f64);
    let mut rho_conservation = Ok(0.0f64);
    let mut bound = Ok(0.0f64);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let upd = |acc: &mut Result<f64>, v: Result<f64>| {
        *acc = match (acc.clone(), v) {
            (Ok(a), Ok(b)) => Ok(a.max(b)),
            (Err(e), _) | (_, Err(e)) => Err(e),
        }
    };
    for &si in s {
        let point = (|| -> Result<[f64; 6]> {
            let j = fm.jet(t, si)?;
            let u = 1.0 / j.w;
            let r = curvature_closed(fm, t, si)?;
            let f = faraday_closed(fm, t, si)?;
            let first_integral_scale = j.ws * j.ws + 4.0 + (2.0 * tau * j.w).abs() + (rho * j.w * j.w).abs();
            let first_integral = (j.ws * j.ws - 4.0 * eps + 2.0 * tau * j.w - rho * j.w * j.w).abs() / first_integral_scale;
            let second_derivative = (j.wss - (rho * j.w - tau)).abs() / (1.0 + (rho * j.w).abs() + tau.abs());
            let vortex = (r + 4.0 * eps * u - tau).abs();
            let field = r * r - eps * f * f;
            let rho_conservation = (f * f + 8.0 * tau * u - 16.0 * eps * u * u - 4.0 * rho).abs();
            let scale = 1.0 + tau.abs() + sigma.abs();
            let viol = if eps > 0.0 {
                let mut v = (r - tau).max(sigma - r * r);
                if is_sausage {
                    v = v.max(sigma.sqrt() - r);
                }
                v
            } else {
                (tau - r).max(r * r - sigma).max(f.abs() - sigma.max(0.0).sqrt())
            };
            Ok([first_integral, second_derivative, vortex, field, rho_conservation, viol.max(0.0) / scale])
        })();
        match point {
            Ok([a, b, c, field, e, v]) => {
                upd(&mut first_integral, Ok(a));
                upd(&mut second_derivative, Ok(b));
                upd(&mut vortex, Ok(c));
                upd(&mut sigma_value, Ok((field - sigma).abs()));
                upd(&mut rho_conservation, Ok(e));
                upd(&mut bound, Ok(v));
                lo = lo.min(field);
                hi = hi.max(field);
            }
            Err(e) => {
                for acc in [&mut first_integral, &mut second_derivative, &mut vortex, &mut sigma_value, &mut rho_conservation, &mut bound] {
                    upd(acc, Err(e.clone()));
                }
            }
        }
    }
    let spread = sigma_value.clone().map(|_| hi - lo);
    rec.push("w-first-integral", Some(t), first_integral);
    rec.push("w-second-derivative", Some(t), second_derivative);
    rec.push("vortex-closed", Some(t), vortex);
    rec.push("sigma-value", Some(t), sigma_value);
    rec.push("sigma-spread", Some(t), spread);
    rec.push("rho-conservation", Some(t), rho_conservation);
    rec.push(if is_sausage { "sausage-bound" } else { "curvature-bound" }, Some(t), bound);
}

/// Max over grid points of the bound violation, evaluated with closed forms.
pub fn bound_violation(fm: &FamilyMetric, p: &Profile) -> Result<f64> {
    let st = fm.tau_sigma(p.t)?;
    let (tau, sigma, eps) = (st.tau, st.sigma, fm.epsilon());
    let mut worst: f64 = 0.0;
    for i in 0..p.len() {
        let s = p.s(i);
        let r = curvature_closed(fm, p.t, s)?;
        let f = faraday_closed(fm, p.t, s)?;
        let v = if eps > 0.0 {
            let v = (r - tau).max(sigma - r * r);
            if fm.id() == FamilyId::E {
                v.max(sigma.sqrt() - r)
            } else {
                v
            }
        } else {
            (tau - r).max(r * r - sigma).max(f.abs() - sigma.max(0.0).sqrt())
        };
        worst = worst.max(v);
    }
    Ok(worst / (1.0 + tau.abs() + sigma.abs()))
}

/// Finite-difference checks on one profile. Exposed so that modified profiles can be fed in.
pub fn profile_checks(fm: &FamilyMetric, p: &Profile, cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut rec = Recorder { family_id: fm.id().to_string(), summary: String::new(), cfg, out: Vec::new() };
    fd_checks(&mut rec, fm, p);
    rec.out
}

fn fd_checks(rec: &mut Recorder, fm: &FamilyMetric, p: &Profile) {
    let t = Some(p.t);
    let eps = fm.epsilon();
    let st = match fm.tau_sigma(p.t) {
        Ok(st) => st,
        Err(e) => {
            rec.push("vortex-fd", t, Err(e));
            return;
        }
    };
    rec.push("vortex-fd", t, vortex_residual(p, eps, st.tau));
    let (r_slope, f_slope) = match structure_identities(p, eps) {
        Ok((a, b)) => (Ok(a), Ok(b)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    rec.push("r-slope-identity", t, r_slope);
    rec.push("f-slope-identity", t, f_slope);
    rec.push("laplacian-f", t, laplacian_identity_f(p, st.tau));
    let stride = (LAPLACIAN_R_SPACING / p.ds).round().max(1.0) as usize;
    let lap_r = laplacian_identity_r(p, st.tau, st.sigma, stride).and_then(|v| Ok(v / identity_scale(p, st.tau, st.sigma)?));
    rec.push("laplacian-r", t, lap_r);
    if st.sigma == 0.0 {
        rec.push("soliton", t, soliton_defect(p));
    }
}

/// Size of the terms in the R-Laplacian identity, max over the grid of |tau R| + 2 R^2 + |sigma|.
fn identity_scale(p: &Profile, tau: f64, sigma: f64) -> Result<f64> {
    let r = crate::geometry::curvature_fd(p)?;
    Ok(r.iter().map(|r| (tau * r).abs() + 2.0 * r * r + sigma.abs()).fold(1e-300, f64::max))
}

/// |r(ds) / r(ds/2) - 4|; second order means a ratio near 4.
fn refinement(fm: &FamilyMetric, t: f64, (lo, hi): (f64, f64), ds: f64) -> Result<(f64, Option<String>)> {
    let eps = fm.epsilon();
    let tau = fm.tau_sigma(t)?.tau;
    let coarse = vortex_residual(&fm.profile(t, lo, hi, ds)?, eps, tau)?;
    let fine = vortex_residual(&fm.profile(t, lo, hi, 0.5 * ds)?, eps, tau)?;
    if coarse < REFINE_FLOOR {
        return Ok((0.0, Some(format!("residual {coarse:e} already at rounding level"))));
    }
    let ratio = coarse / fine;
    Ok(((ratio - 4.0).abs(), Some(format!("ratio {ratio:.4}"))))
}

fn tau_sigma_ode_check(p: &RegimeParameters, (a, b): (f64, f64)) -> Result<f64> {
    let start = p.rebased(a)?;
    let mut worst: f64 = 0.0;
    for k in 1..=5 {
        let t = a + (b - a) * k as f64 / 5.0;
        let ode = tau_sigma_ode(&start, t, 1e-4)?;
        let closed = tau_sigma_closed(p, t)?;
        worst = worst.max(rel_diff(ode.tau, closed.tau)).max(rel_diff(ode.sigma, closed.sigma));
    }
    Ok(worst)
}

/// |angle - pi sqrt|rho|| over reported cone ends; a smooth end counts as angle 2 pi.
fn cone_check(fm: &FamilyMetric) -> f64 {
    let expected = PI * fm.params.rho.abs().sqrt();
    conical_data(fm)
        .iter()
        .filter_map(|c| match c.end {
            EndKind::Cone { angle } => Some((angle - expected).abs()),
            EndKind::Smooth => Some((2.0 * PI - expected).abs()),
            _ => None,
        })
        .fold(0.0, f64::max)
}

fn l_factor_ode_check(fm: &FamilyMetric, t0: f64, t1: f64, window: (f64, f64)) -> Result<f64> {
    let base = fm.params.rebased(t0)?;
    let mut worst: f64 = 0.0;
    for s in grid_points(window.0, window.1, 4) {
        let u = fm.u(t0, s)?;
        let closed = l_factor(&base, u, t1)?;
        let ode = l_factor_ode(&base, u, t1, 1e-4)?;
        worst = worst.max(rel_diff(ode, closed));
    }
    Ok(worst)
}

/// Strictly decreasing distances give 0; otherwise the largest increase.
fn limit_check(fm: &FamilyMetric, probe: &LimitProbe) -> Result<(f64, String)> {
    let lim = limit_metric(fm, probe.direction)?;
    let d = probe.t_seq.iter().map(|&t| lim.distance(fm, t, &probe.s_points)).collect::<Result<Vec<_>>>()?;
    let worst = d.windows(2).map(|w| if w[1] < w[0] { 0.0 } else { w[1] - w[0] + f64::MIN_POSITIVE }).fold(0.0, f64::max);
    Ok((worst, format!("distances {d:?}")))
}

/// Sup error of the PDE solution relative to max(1, max w).
fn pde_check(fm: &FamilyMetric, (t0, t1): (f64, f64), window: (f64, f64)) -> Result<f64> {
    let w0 = fm.profile(t0, window.0, window.1, PDE_DS)?.u.iter().map(|u| 1.0 / u).fold(0.0, f64::max);
    let w1 = fm.profile(t1, window.0, window.1, PDE_DS)?.u.iter().map(|u| 1.0 / u).fold(0.0, f64::max);
    let dt = DEFAULT_DT.min(0.25 * PDE_DS * PDE_DS / w0.max(w1));
    let cfg = PdeConfig { ds: PDE_DS, dt, boundary: Boundary::Dirichlet, stability_factor: 0.5 };
    Ok(evolve(fm, t0, t1, window, &cfg)?.1 / w0.max(w1).max(1.0))
}

pub fn run_family_suite(entry: &CatalogEntry, cfg: &VerifyConfig) -> Report {
    Report::assemble(cfg.ds, vec![(entry.grid(), suite_results(entry, cfg))])
}

fn suite_results(entry: &CatalogEntry, cfg: &VerifyConfig) -> Vec<CheckResult> {
    let fm = &entry.family;
    let mut rec = Recorder { family_id: fm.id().to_string(), summary: entry.params_summary(), cfg, out: Vec::new() };
    let per_t = CLOSED_SAMPLES.div_ceil(entry.t_samples.len().max(1));
    for &t in &entry.t_samples {
        let window = match entry.window.at(fm, t) {
            Ok(w) => w,
            Err(e) => {
                rec.push("window", Some(t), Err(e));
                continue;
            }
        };
        let (lo, hi) = window;
        let s: Vec<f64> = (0..per_t).map(|j| lo + (hi - lo) * (j as f64 + 0.5) / per_t as f64).collect();
        closed_form_checks(&mut rec, fm, t, &s);
        match fm.profile(t, lo, hi, cfg.ds) {
            Ok(p) => fd_checks(&mut rec, fm, &p),
            Err(e) => rec.push("vortex-fd", Some(t), Err(e)),
        }
        match refinement(fm, t, window, cfg.ds) {
            Ok((r, note)) => rec.push_with("vortex-refine", "vortex-refine", Some(t), Ok(r), note),
            Err(e) => rec.push("vortex-refine", Some(t), Err(e)),
        }
    }
    rec.push("tau-sigma-ode", None, tau_sigma_ode_check(&fm.params, entry.tau_window));
    rec.push("cone-angle", None, Ok(cone_check(fm)));

    let (t_first, t_last) = (entry.t_samples[0], *entry.t_samples.last().expect("t samples"));
    if t_last > t_first {
        match entry.window.at(fm, t_last) {
            Ok(window) => {
                rec.push("l-factor-ode", None, l_factor_ode_check(fm, t_first, t_last, window));
                match local_flow_check(fm, t_first, t_last, window, cfg.ds) {
                    Ok(o) => {
                        let scale = fm.profile(t_last, window.0, window.1, 0.1).map_or(1.0, |p| p.u.iter().cloned().fold(1.0, f64::max));
                        rec.push("flow-local", None, Ok(o.sup_deviation / scale));
                        rec.push("flow-local-vortex", None, Ok(o.vortex_residual));
                    }
                    Err(e) => rec.push("flow-local", None, Err(e)),
                }
            }
            Err(e) => rec.push("l-factor-ode", None, Err(e)),
        }
    }
    if cfg.include_pde {
        if let Some(case) = entry.pde {
            let id = if fm.id() == FamilyId::A { "pde-affine" } else { "pde" };
            let r = case.window.at(fm, case.t1).and_then(|w| pde_check(fm, (case.t0, case.t1), w));
            rec.push(id, None, r);
        }
    }
    if let Some(probe) = &entry.limit {
        match limit_check(fm, probe) {
            Ok((r, note)) => rec.push_with("limit", "limit", None, Ok(r), Some(note)),
            Err(e) => rec.push("limit", None, Err(e)),
        }
    }
    rec.out
}

/// Runs every selected catalog entry; entries run on separate threads and merge in catalog order.
pub fn run_all(cfg: &VerifyConfig) -> Report {
    let selected: Vec<CatalogEntry> = catalog()
        .into_iter()
        .filter(|e| cfg.filter.as_ref().is_none_or(|keys| keys.iter().any(|k| e.matches(k))))
        .collect();
    let parts: Vec<(EntryGrid, Vec<CheckResult>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = selected.iter().map(|e| scope.spawn(move || (e.grid(), suite_results(e, cfg)))).collect();
        handles.into_iter().map(|h| h.join().expect("suite thread")).collect()
    });
    Report::assemble(cfg.ds, parts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckDiff {
    pub family_id: String,
    pub params_summary: String,
    pub check_id: String,
    pub t: Option<f64>,
    pub residual_a: f64,
    pub residual_b: f64,
    /// residual_b / residual_a
    pub ratio: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ReportDiff {
    pub diffs: Vec<CheckDiff>,
    pub regression: bool,
}

/// Residual ratios for checks whose residual changed. Reports must cover the same entries,
/// windows and sample times; the grid spacing may differ, which is how refinement runs compare.
pub fn compare_reports(a: &Report, b: &Report) -> Result<ReportDiff> {
    if a.grid_spec.entries != b.grid_spec.entries {
        return Err(Error::IncomparableReports("catalog entries, windows or sample times differ".into()));
    }
    type Key = (String, String, String, Option<u64>);
    let key = |r: &CheckResult| -> Key { (r.family_id.clone(), r.params_summary.clone(), r.check_id.clone(), r.t.map(f64::to_bits)) };
    let index: BTreeMap<Key, &CheckResult> = b.results.iter().map(|r| (key(r), r)).collect();
    let mut out = ReportDiff::default();
    for ra in &a.results {
        let Some(rb) = index.get(&key(ra)) else {
            return Err(Error::IncomparableReports(format!("check {} missing from second report", ra.check_id)));
        };
        if ra.residual.to_bits() == rb.residual.to_bits() {
            continue;
        }
        let ratio = rb.residual / ra.residual;
        if ratio > 2.0 || (rb.residual.is_nan() && !ra.residual.is_nan()) {
            out.regression = true;
        }
        out.diffs.push(CheckDiff {
            family_id: ra.family_id.clone(),
            params_summary: ra.params_summary.clone(),
            check_id: ra.check_id.clone(),
            t: ra.t,
            residual_a: ra.residual,
            residual_b: rb.residual,
            ratio,
        });
    }
    Ok(out)
}

/// Lengths of [start, b_k] with b_k = end + (start - end) 2^-k approaching `end`.
///
/// Each dyadic piece gets its own grid of `points` cells, so the relative quadrature error is the
/// same on every piece even where u blows up.
pub fn incompleteness_probe(fm: &FamilyMetric, t: f64, start: f64, end: f64, levels: usize, points: usize) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(levels);
    let mut total = 0.0;
    let mut a = start;
    for k in 1..=levels {
        let b = end + (start - end) * 0.5f64.powi(k as i32);
        let (lo, hi) = (a.min(b), a.max(b));
        let p = fm.profile(t, lo, hi, (hi - lo) / points as f64)?;
        total += s_length(&p, lo, hi)?;
        out.push((b, total));
        a = b;
    }
    Ok(out)
}
