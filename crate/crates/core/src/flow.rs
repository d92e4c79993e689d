//! Time evolution of profiles.
//!
//! Two independent routes: an explicit finite-difference solver for
//! `w_t = w w_ss - w_s^2` (the Ricci flow written for w = 1/u), and the pointwise
//! rescaling `u(t) = u(t0) / L(t)` where L solves `L' = tau(t) L - 4 eps u(t0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::FamilyMetric;
use crate::geometry::{vortex_residual, Profile};
use crate::params::{tau_sigma_closed, RegimeParameters, BLOWUP_LIMIT, MAX_TAU_DT};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowState {
    pub t: f64,
    pub s0: f64,
    pub ds: f64,
    pub w: Vec<f64>,
    pub tau: f64,
    pub sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// End values taken from the closed form at every step.
    Dirichlet,
    /// End values held at their initial values.
    Frozen,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdeConfig {
    pub ds: f64,
    pub dt: f64,
    pub boundary: Boundary,
    /// c in dt <= c ds^2 / max(w); at most 0.5.
    pub stability_factor: f64,
}

impl Default for PdeConfig {
    fn default() -> Self {
        PdeConfig { ds: 1e-3, dt: 1e-5, boundary: Boundary::Dirichlet, stability_factor: 0.5 }
    }
}

/// End values for one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Edges {
    Keep,
    Set(f64, f64),
}

impl FlowState {
    pub fn from_family(fm: &FamilyMetric, t: f64, s_a: f64, s_b: f64, ds: f64) -> Result<Self> {
        let p = fm.profile(t, s_a, s_b, ds)?;
        let st = fm.tau_sigma(t)?;
        Ok(FlowState { t, s0: p.s0, ds: p.ds, w: p.u.iter().map(|u| 1.0 / u).collect(), tau: st.tau, sigma: st.sigma })
    }

    pub fn s(&self, i: usize) -> f64 {
        self.s0 + i as f64 * self.ds
    }

    pub fn to_profile(&self) -> Result<Profile> {
        Profile::new(self.s0, self.ds, self.w.iter().map(|w| 1.0 / w).collect(), self.t)
    }

    pub fn stable_dt(&self, cfg: &PdeConfig) -> f64 {
        let wmax = self.w.iter().cloned().fold(0.0, f64::max);
        cfg.stability_factor * self.ds * self.ds / wmax
    }
}

/// One forward-Euler step with central differences. tau and sigma advance by one RK4 step
/// of tau' = sigma, sigma' = 2 tau sigma.
pub fn pde_step(state: &FlowState, cfg: &PdeConfig, edges: Edges) -> Result<FlowState> {
    if !(cfg.stability_factor > 0.0 && cfg.stability_factor <= 0.5) {
        return Err(Error::InvalidInput(format!("stability factor {} not in (0, 0.5]", cfg.stability_factor)));
    }
    let n = state.w.len();
    if n < 5 {
        return Err(Error::GridTooSmall(n));
    }
    let dt = cfg.dt;
    let limit = state.stable_dt(cfg);
    if !(dt > 0.0) || dt > limit {
        return Err(Error::UnstableStep { dt, limit });
    }
    let (w, h) = (&state.w, state.ds);
    let mut next = w.clone();
    for i in 1..n - 1 {
        let wss = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h * h);
        let ws = (w[i + 1] - w[i - 1]) / (2.0 * h);
        next[i] = w[i] + dt * (w[i] * wss - ws * ws);
    }
    if let Edges::Set(l, r) = edges {
        next[0] = l;
        next[n - 1] = r;
    }
    if let Some(i) = (1..n - 1).find(|&i| !(next[i] > 0.0)) {
        return Err(Error::NonpositiveW { index: i, w: next[i] });
    }
    let f = |tau: f64, sigma: f64| (sigma, 2.0 * tau * sigma);
    let (t0, s0) = (state.tau, state.sigma);
    let k1 = f(t0, s0);
    let k2 = f(t0 + 0.5 * dt * k1.0, s0 + 0.5 * dt * k1.1);
    let k3 = f(t0 + 0.5 * dt * k2.0, s0 + 0.5 * dt * k2.1);
    let k4 = f(t0 + dt * k3.0, s0 + dt * k3.1);
    Ok(FlowState {
        t: state.t + dt,
        s0: state.s0,
        ds: state.ds,
        w: next,
        tau: t0 + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        sigma: s0 + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    })
}

fn sup_error(fm: &FamilyMetric, st: &FlowState) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, w) in st.w.iter().enumerate() {
        worst = worst.max((w - fm.w(st.t, st.s(i))?).abs());
    }
    Ok(worst)
}

/// Runs the solver from the closed form at t0 to t1 on [s_a, s_b], calling `observe` after
/// every `every` steps (and at the end) with the state and its sup-distance to the closed form.
pub fn evolve_observed(
    fm: &FamilyMetric,
    t0: f64,
    t1: f64,
    window: (f64, f64),
    cfg: &PdeConfig,
    every: usize,
    mut observe: impl FnMut(&FlowState, f64),
) -> Result<(FlowState, f64)> {
    if !(t1 > t0) {
        return Err(Error::InvalidInput(format!("need t1 > t0, got {t0} -> {t1}")));
    }
    let mut state = FlowState::from_family(fm, t0, window.0, window.1, cfg.ds)?;
    let steps = ((t1 - t0) / cfg.dt - 1e-9).ceil().max(1.0) as usize;
    let step_cfg = PdeConfig { dt: (t1 - t0) / steps as f64, ..*cfg };
    let n = state.w.len();
    let mut max_err: f64 = 0.0;
    observe(&state, 0.0);
    for k in 1..=steps {
        let t_next = t0 + k as f64 * step_cfg.dt;
        let edges = match cfg.boundary {
            Boundary::Dirichlet => Edges::Set(fm.w(t_next, state.s(0))?, fm.w(t_next, state.s(n - 1))?),
            Boundary::Frozen => Edges::Keep,
        };
        state = pde_step(&state, &step_cfg, edges)?;
        state.t = t_next;
        let err = sup_error(fm, &state)?;
        max_err = max_err.max(err);
        if k % every.max(1) == 0 || k == steps {
            observe(&state, err);
        }
    }
    Ok((state, max_err))
}

pub fn evolve(fm: &FamilyMetric, t0: f64, t1: f64, window: (f64, f64), cfg: &PdeConfig) -> Result<(FlowState, f64)> {
    evolve_observed(fm, t0, t1, window, cfg, usize::MAX, |_, _| {})
}

/// Which closed form of L applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LBranch {
    General,
    Soliton,
    RhoZero,
    Affine,
}

pub fn l_branch(p: &RegimeParameters) -> LBranch {
    match (p.rho != 0.0, p.sigma0 != 0.0, p.tau0 != 0.0) {
        (true, true, _) => LBranch::General,
        (true, false, _) => LBranch::Soliton,
        (false, _, true) => LBranch::RhoZero,
        (false, _, false) => LBranch::Affine,
    }
}

/// Closed-form solution of L' = tau(t) L - 4 eps u_p with L(t0) = 1.
pub fn l_factor(p: &RegimeParameters, u_p: f64, t: f64) -> Result<f64> {
    let eps = p.epsilon.value();
    let st = tau_sigma_closed(p, t)?;
    let l = match l_branch(p) {
        LBranch::General => {
            let c = p.tau0 * u_p / p.rho;
            (1.0 - c) * (st.sigma / p.sigma0).sqrt() + st.tau * u_p / p.rho
        }
        LBranch::Soliton => {
            let c = p.tau0 * u_p / p.rho;
            (1.0 - c) * (p.tau0 * (t - p.t0)).exp() + c
        }
        LBranch::RhoZero => {
            let c = 2.0 * eps * u_p;
            (1.0 - c / p.tau0) * (st.sigma / p.sigma0).sqrt() + c / st.tau
        }
        LBranch::Affine => 1.0 + 4.0 * eps * (p.t0 - t) * u_p,
    };
    Ok(l)
}

/// RK4 for (tau, L) from (tau0, 1) at t0; uses no closed forms.
pub fn l_factor_ode(p: &RegimeParameters, u_p: f64, t1: f64, dt: f64) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let eps = p.epsilon.value();
    let four_eps_rho = 4.0 * eps * p.rho;
    let f = |tau: f64, l: f64| (tau * tau - four_eps_rho, tau * l - 4.0 * eps * u_p);
    let n = if t1 == p.t0 { 0 } else { ((t1 - p.t0).abs() / dt).ceil().max(1.0) as usize };
    if n == 0 {
        return Ok(1.0);
    }
    let h = (t1 - p.t0) / n as f64;
    let (mut tau, mut l) = (p.tau0, 1.0);
    for i in 0..n {
        if tau.abs() * h.abs() > MAX_TAU_DT {
            return Err(Error::StepTooLarge(tau.abs() * h.abs()));
        }
        let k1 = f(tau, l);
        let k2 = f(tau + 0.5 * h * k1.0, l + 0.5 * h * k1.1);
        let k3 = f(tau + 0.5 * h * k2.0, l + 0.5 * h * k2.1);
        let k4 = f(tau + h * k3.0, l + h * k3.1);
        tau += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        l += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if !(tau.abs() <= BLOWUP_LIMIT) {
            return Err(Error::OutsideTimeDomain {
                t: p.t0 + (i + 1) as f64 * h,
                detail: format!("|tau| exceeded {BLOWUP_LIMIT:e}"),
            });
        }
    }
    Ok(l)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalFlowOutcome {
    pub vortex_residual: f64,
    /// sup |u(t0)/L(t1) - u_closed(t1)|
    pub sup_deviation: f64,
    pub min_l: f64,
}

/// Builds u(t1) = u(t0) / L(t1) pointwise on a grid and compares it with the family at t1.
///
/// Fails with `OutsideTimeDomain` at the first grid point where L is not positive.
pub fn local_flow_check(fm: &FamilyMetric, t0: f64, t1: f64, window: (f64, f64), ds: f64) -> Result<LocalFlowOutcome> {
    let base = fm.params.rebased(t0)?;
    let p0 = fm.profile(t0, window.0, window.1, ds)?;
    let mut u1 = Vec::with_capacity(p0.len());
    let mut dev: f64 = 0.0;
    let mut min_l = f64::INFINITY;
    for (i, &u) in p0.u.iter().enumerate() {
        let l = l_factor(&base, u, t1)?;
        if !(l > 0.0) {
            return Err(Error::OutsideTimeDomain { t: t1, detail: format!("L = {l} at s = {}", p0.s(i)) });
        }
        min_l = min_l.min(l);
        let v = u / l;
        dev = dev.max((v - fm.u(t1, p0.s(i))?).abs());
        u1.push(v);
    }
    let p1 = Profile::new(p0.s0, p0.ds, u1, t1)?;
    let tau1 = fm.tau_sigma(t1)?.tau;
    Ok(LocalFlowOutcome { vortex_residual: vortex_residual(&p1, fm.epsilon(), tau1)?, sup_deviation: dev, min_l })
}
