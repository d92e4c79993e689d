//! Closed-form catalog of the explicit families A through J.
//!
//! Every family is a rotationally symmetric metric `u(t, s) (dr^2 + ds^2)` with `w = 1/u`.
//! Profiles use the translation normalization in s fixed by the normal forms; an extra
//! `s_shift` moves the whole profile (`s -> s - s_shift`).

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Profile;
use crate::params::{
    classify_regime, flat_soliton, normal_tau_sigma, tau_sigma_closed, FamilyDescriptor, FamilyId, Interval,
    ParameterState, RegimeParameters, Sign,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyMetric {
    pub descriptor: FamilyDescriptor,
    pub params: RegimeParameters,
    pub s_shift: f64,
}

/// Value of w with its first two s-derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub w: f64,
    pub ws: f64,
    pub wss: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EndKind {
    Cone { angle: f64 },
    Smooth,
    Cusp,
    Complete,
    Blowup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndLocation {
    NegInfinity,
    PosInfinity,
    LeftBoundary,
    RightBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConicalData {
    pub location: EndLocation,
    pub end: EndKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SDomain {
    pub interval: Interval,
    pub left: Option<EndKind>,
    pub right: Option<EndKind>,
    /// Set for the torus family, whose profile is periodic in s.
    pub period: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitKind {
    ConicalSphere,
    ConicalHyperbolic,
    FlatCylinder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeEnd {
    Start,
    End,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RescaleFactor {
    Tau,
    SqrtSigma,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitMetric {
    pub kind: LimitKind,
    pub rho: f64,
    pub factor: RescaleFactor,
    pub direction: TimeEnd,
    pub endpoint: f64,
}

impl LimitMetric {
    /// Conformal factor of the limit metric at (unshifted) coordinate `x`.
    pub fn u_limit(&self, x: f64) -> f64 {
        let rho = self.rho;
        match self.kind {
            LimitKind::FlatCylinder => rho,
            LimitKind::ConicalSphere => rho / ((rho.sqrt() * x).cosh() + 1.0),
            LimitKind::ConicalHyperbolic => {
                if rho > 0.0 {
                    rho / ((rho.sqrt() * x).cosh() - 1.0)
                } else if rho < 0.0 {
                    -rho / (1.0 - ((-rho).sqrt() * x).cos())
                } else {
                    2.0 / (x * x)
                }
            }
        }
    }

    /// sup over `s` of |k(t) u(t, s) / u_limit(s) - 1|.
    pub fn distance(&self, fm: &FamilyMetric, t: f64, s: &[f64]) -> Result<f64> {
        let st = fm.tau_sigma(t)?;
        let k = match self.factor {
            RescaleFactor::Tau => st.tau,
            RescaleFactor::SqrtSigma => st.sigma.sqrt(),
        };
        let mut worst: f64 = 0.0;
        for &si in s {
            let u = fm.u(t, si)?;
            worst = worst.max((k * u / self.u_limit(si - fm.s_shift) - 1.0).abs());
        }
        Ok(worst)
    }
}

pub fn build_family(desc: &FamilyDescriptor, params: &RegimeParameters) -> Result<FamilyMetric> {
    let expect = if desc.family_id == FamilyId::B && desc.hat_eps.is_none() {
        flat_soliton(params)?
    } else {
        classify_regime(params, desc.hat_eps)?
    };
    if expect.family_id != desc.family_id || expect.hat_eps != desc.hat_eps {
        return Err(Error::InvalidRegime(format!(
            "parameters belong to family {} ({}), not {}",
            expect.family_id, expect.branch, desc.family_id
        )));
    }
    Ok(FamilyMetric { descriptor: expect, params: *params, s_shift: 0.0 })
}

/// Classifies and builds in one go.
pub fn family_from_params(params: &RegimeParameters, hat_eps: Option<Sign>) -> Result<FamilyMetric> {
    let desc = classify_regime(params, hat_eps)?;
    build_family(&desc, params)
}

fn hat(fm: &FamilyMetric) -> f64 {
    fm.descriptor.hat_eps.map_or(0.0, Sign::value)
}

impl FamilyMetric {
    pub fn id(&self) -> FamilyId {
        self.descriptor.family_id
    }

    pub fn epsilon(&self) -> f64 {
        self.params.epsilon.value()
    }

    pub fn with_s_shift(mut self, shift: f64) -> Self {
        self.s_shift = shift;
        self
    }

    /// (tau, sigma) at flow time t; constant for the solitons.
    pub fn tau_sigma(&self, t: f64) -> Result<ParameterState> {
        match self.id() {
            FamilyId::A | FamilyId::B => Ok(ParameterState { t, tau: self.params.tau0, sigma: 0.0 }),
            _ => tau_sigma_closed(&self.params, t),
        }
    }

    /// Time variable fed to the profile formulas.
    fn formula_time(&self, t: f64) -> f64 {
        match self.id() {
            FamilyId::A | FamilyId::B => t,
            _ => self.params.normal_time(t),
        }
    }

    /// Domain in the unshifted coordinate x = s - s_shift.
    fn x_domain(&self, t: f64) -> Result<SDomain> {
        use EndKind::*;
        let tn = self.formula_time(t);
        let cone = self.cone_end();
        let inf = f64::INFINITY;
        let h = hat(self);
        let dom = |lo: f64, hi: f64, l: Option<EndKind>, r: Option<EndKind>| SDomain {
            interval: Interval::new(lo, hi),
            left: l,
            right: r,
            period: None,
        };
        let out = match self.id() {
            FamilyId::A => {
                if h > 0.0 {
                    dom(2.0 * tn, inf, Some(Blowup), Some(Complete))
                } else {
                    dom(-inf, -2.0 * tn, Some(Complete), Some(Blowup))
                }
            }
            FamilyId::B => match self.descriptor.hat_eps {
                None => dom(-inf, inf, Some(Complete), Some(Complete)),
                Some(Sign::Plus) => dom(-inf, inf, Some(cone), Some(Cusp)),
                Some(Sign::Minus) if self.params.tau0 > 0.0 => dom(2.0 * tn, inf, Some(Blowup), Some(Cusp)),
                Some(Sign::Minus) => dom(2.0 * tn, inf, Some(Blowup), Some(cone)),
            },
            FamilyId::C => dom(-inf, inf, Some(Complete), Some(Complete)),
            FamilyId::D => {
                if tn < 0.0 {
                    dom(2.0 * tn, -2.0 * tn, Some(Blowup), Some(Blowup))
                } else {
                    dom(2.0 * tn, inf, Some(Blowup), Some(Complete))
                }
            }
            FamilyId::E | FamilyId::F => dom(-inf, inf, Some(cone), Some(cone)),
            FamilyId::G => {
                if tn < 0.0 {
                    dom(2.0 * tn, -2.0 * tn, Some(Blowup), Some(Blowup))
                } else {
                    dom(2.0 * tn, inf, Some(Blowup), Some(cone))
                }
            }
            FamilyId::H => {
                let a = (-self.params.rho).sqrt();
                dom(2.0 * tn, 2.0 * PI / a - 2.0 * tn, Some(Blowup), Some(Blowup))
            }
            FamilyId::I => {
                let a = (-self.params.rho).sqrt();
                SDomain { interval: Interval::REAL_LINE, left: None, right: None, period: Some(2.0 * PI / a) }
            }
            FamilyId::J => dom(2.0 * tn, inf, Some(Blowup), Some(cone)),
        };
        Ok(out)
    }

    fn cone_end(&self) -> EndKind {
        let k = self.params.rho.abs().sqrt();
        if k == 2.0 {
            EndKind::Smooth
        } else {
            EndKind::Cone { angle: PI * k }
        }
    }

    /// Checks (t, s) and returns (tau, sigma), formula time and x.
    fn locate(&self, t: f64, s: f64) -> Result<(ParameterState, f64, f64)> {
        let st = self.tau_sigma(t)?;
        let dom = domain_s(self, t)?;
        if !dom.interval.contains(s) {
            return Err(Error::OutsideDomain { s, lo: dom.interval.lo, hi: dom.interval.hi });
        }
        Ok((st, self.formula_time(t), s - self.s_shift))
    }

    /// w and its analytic s-derivatives.
    pub fn jet(&self, t: f64, s: f64) -> Result<Jet> {
        let (st, tn, x) = self.locate(t, s)?;
        let rho = self.params.rho;
        let tau = st.tau;
        let j = match self.id() {
            FamilyId::A => {
                let h = hat(self);
                Jet { w: 2.0 * h * x - 4.0 * tn, ws: 2.0 * h, wss: 0.0 }
            }
            FamilyId::B => {
                let h = hat(self);
                let e = (tau * (tn - 0.5 * x)).exp();
                Jet { w: 4.0 / tau * (1.0 + h * e), ws: -2.0 * h * e, wss: h * tau * e }
            }
            FamilyId::C => Jet { w: (x * x + 4.0 * tn * tn) / (2.0 * tn), ws: x / tn, wss: 1.0 / tn },
            FamilyId::D => Jet { w: (x * x - 4.0 * tn * tn) / (2.0 * tn), ws: x / tn, wss: 1.0 / tn },
            FamilyId::J => {
                let k = rho.sqrt();
                let amp = 2.0 * k / (2.0 * k * tn).cosh();
                let (sh, ch) = ((k * x).sinh(), (k * x).cosh());
                Jet { w: (tau + amp * sh) / rho, ws: amp * k * ch / rho, wss: amp * sh }
            }
            _ => {
                // w = (tau + c C(x)) / rho with C'' = rho C
                let (c, cx, dcx) = self.cosine_term(tn, x);
                Jet { w: (tau + c * cx) / rho, ws: c * dcx / rho, wss: c * cx }
            }
        };
        if !(j.w > 0.0) || !j.w.is_finite() {
            let dom = domain_s(self, t)?;
            return Err(Error::OutsideDomain { s, lo: dom.interval.lo, hi: dom.interval.hi });
        }
        Ok(j)
    }

    /// (c, C(x), C'(x)) for families E through I.
    fn cosine_term(&self, tn: f64, x: f64) -> (f64, f64, f64) {
        let rho = self.params.rho;
        let k = rho.abs().sqrt();
        let big_t = 2.0 * k * tn;
        let c = match self.id() {
            FamilyId::E => -2.0 * k / big_t.sinh(),
            FamilyId::F => -2.0 * k / big_t.sin(),
            FamilyId::G => 2.0 * k / big_t.sinh(),
            FamilyId::H => 2.0 * k / big_t.sin(),
            FamilyId::I => 2.0 * k / big_t.sinh(),
            _ => unreachable!("cosine_term called for family {}", self.id()),
        };
        if rho > 0.0 {
            (c, (k * x).cosh(), k * (k * x).sinh())
        } else {
            (c, (k * x).cos(), -k * (k * x).sin())
        }
    }

    pub fn w(&self, t: f64, s: f64) -> Result<f64> {
        Ok(self.jet(t, s)?.w)
    }

    pub fn u(&self, t: f64, s: f64) -> Result<f64> {
        Ok(1.0 / self.jet(t, s)?.w)
    }

    /// Samples u on [s_a, s_b] with spacing close to `ds` (the count is rounded).
    pub fn profile(&self, t: f64, s_a: f64, s_b: f64, ds: f64) -> Result<Profile> {
        let n = ((s_b - s_a) / ds).round() as usize + 1;
        let h = (s_b - s_a) / (n - 1).max(1) as f64;
        let u = (0..n).map(|i| self.u(t, s_a + i as f64 * h)).collect::<Result<Vec<_>>>()?;
        Profile::new(s_a, h, u, t)
    }
}

pub fn w_profile(fm: &FamilyMetric, t: f64, s: f64) -> Result<f64> {
    fm.w(t, s)
}

/// Scalar curvature from the displayed closed forms of each family.
pub fn curvature_closed(fm: &FamilyMetric, t: f64, s: f64) -> Result<f64> {
    let (st, tn, x) = fm.locate(t, s)?;
    fm.jet(t, s)?;
    let tau = st.tau;
    let rho = fm.params.rho;
    let k = rho.abs().sqrt();
    let bt = 2.0 * k * tn;
    let r = match fm.id() {
        FamilyId::A => -4.0 / (2.0 * hat(fm) * x - 4.0 * tn),
        FamilyId::B => match fm.descriptor.hat_eps {
            None => 0.0,
            Some(h) => tau / (1.0 + h.value() * (-tau * (tn - 0.5 * x)).exp()),
        },
        FamilyId::C => (4.0 * tn * tn - x * x) / (tn * (4.0 * tn * tn + x * x)),
        FamilyId::D => (4.0 * tn * tn + x * x) / (tn * (4.0 * tn * tn - x * x)),
        FamilyId::E => {
            let (c, ch) = (bt.cosh(), (k * x).cosh());
            -2.0 * k / bt.sinh() * (c * ch + 1.0) / (c + ch)
        }
        FamilyId::F => {
            let (c, ch) = (bt.cos(), (k * x).cosh());
            -2.0 * k / bt.sin() * (c * ch + 1.0) / (c + ch)
        }
        FamilyId::G => {
            let (c, ch) = (bt.cosh(), (k * x).cosh());
            2.0 * k / bt.sinh() * (c * ch - 1.0) / (c - ch)
        }
        FamilyId::H => {
            let (c, cx) = (bt.cos(), (k * x).cos());
            2.0 * k / bt.sin() * (c * cx - 1.0) / (c - cx)
        }
        FamilyId::I => {
            let (c, cx) = (bt.cosh(), (k * x).cos());
            2.0 * k / bt.sinh() * (c * cx - 1.0) / (c - cx)
        }
        FamilyId::J => {
            let sx = (k * x).sinh();
            -2.0 * k / bt.cosh() * (bt.sinh() * sx + 1.0) / (sx - bt.sinh())
        }
    };
    Ok(r)
}

/// Faraday function F = -2 (log u)_s from the closed forms.
pub fn faraday_closed(fm: &FamilyMetric, t: f64, s: f64) -> Result<f64> {
    let (_, tn, x) = fm.locate(t, s)?;
    let j = fm.jet(t, s)?;
    let rho = fm.params.rho;
    let k = rho.abs().sqrt();
    let bt = 2.0 * k * tn;
    let f = match fm.id() {
        FamilyId::A => 4.0 * hat(fm) / j.w,
        FamilyId::B => -curvature_closed(fm, t, s)?,
        FamilyId::C => 4.0 * x / (x * x + 4.0 * tn * tn),
        FamilyId::D => 4.0 * x / (x * x - 4.0 * tn * tn),
        FamilyId::E => 2.0 * k * (k * x).sinh() / (bt.cosh() + (k * x).cosh()),
        FamilyId::F => 2.0 * k * (k * x).sinh() / (bt.cos() + (k * x).cosh()),
        FamilyId::G => 2.0 * k * (k * x).sinh() / ((k * x).cosh() - bt.cosh()),
        FamilyId::H => 2.0 * k * (k * x).sin() / (bt.cos() - (k * x).cos()),
        FamilyId::I => 2.0 * k * (k * x).sin() / (bt.cosh() - (k * x).cos()),
        FamilyId::J => 2.0 * k * (k * x).cosh() / ((k * x).sinh() - bt.sinh()),
    };
    Ok(f)
}

/// Open s-interval where w > 0, with the nature of each end.
pub fn domain_s(fm: &FamilyMetric, t: f64) -> Result<SDomain> {
    if !fm.descriptor.time_interval.contains(t) {
        return Err(Error::OutsideTimeDomain { t, detail: format!("family lives on {}", fm.descriptor.time_interval) });
    }
    let mut d = fm.x_domain(t)?;
    d.interval = Interval::new(d.interval.lo + fm.s_shift, d.interval.hi + fm.s_shift);
    Ok(d)
}

/// Per-end cone angle, cusp, or smooth flag. Empty for the torus.
pub fn conical_data(fm: &FamilyMetric) -> Vec<ConicalData> {
    let t = representative_time(fm);
    let Ok(d) = fm.x_domain(t) else { return Vec::new() };
    let mut out = Vec::new();
    if let Some(e) = d.left {
        let loc = if d.interval.lo.is_finite() { EndLocation::LeftBoundary } else { EndLocation::NegInfinity };
        out.push(ConicalData { location: loc, end: e });
    }
    if let Some(e) = d.right {
        let loc = if d.interval.hi.is_finite() { EndLocation::RightBoundary } else { EndLocation::PosInfinity };
        out.push(ConicalData { location: loc, end: e });
    }
    out
}

fn representative_time(fm: &FamilyMetric) -> f64 {
    let iv = fm.descriptor.time_interval;
    match (iv.lo.is_finite(), iv.hi.is_finite()) {
        (true, true) => 0.5 * (iv.lo + iv.hi),
        (true, false) => iv.lo + 1.0,
        (false, true) => iv.hi - 1.0,
        (false, false) => fm.params.t0,
    }
}

/// Rescaled limit of the flow at an end of its time interval, where one is known.
pub fn limit_metric(fm: &FamilyMetric, direction: TimeEnd) -> Result<LimitMetric> {
    use LimitKind::*;
    use RescaleFactor::*;
    let iv = fm.descriptor.time_interval;
    let rho = fm.params.rho;
    let tau_pos = fm.params.tau0 > 0.0;
    let found = match (fm.id(), direction) {
        (FamilyId::E, TimeEnd::End) => Some((ConicalSphere, Tau)),
        (FamilyId::E, TimeEnd::Start) => Some((FlatCylinder, Tau)),
        (FamilyId::F, TimeEnd::End) => Some((ConicalSphere, SqrtSigma)),
        (FamilyId::F, TimeEnd::Start) => Some((ConicalHyperbolic, SqrtSigma)),
        (FamilyId::G, TimeEnd::Start) if tau_pos => Some((FlatCylinder, Tau)),
        (FamilyId::G, TimeEnd::Start) => Some((ConicalHyperbolic, SqrtSigma)),
        (FamilyId::C, TimeEnd::Start) => Some((ConicalHyperbolic, SqrtSigma)),
        (FamilyId::D, TimeEnd::Start) if !tau_pos => Some((ConicalHyperbolic, SqrtSigma)),
        (FamilyId::H | FamilyId::I, TimeEnd::Start) => Some((ConicalHyperbolic, SqrtSigma)),
        _ => None,
    };
    let (kind, factor) = found.ok_or_else(|| {
        Error::NoDocumentedLimit(format!("family {} ({}) toward the {:?} of {}", fm.id(), fm.descriptor.branch, direction, iv))
    })?;
    let endpoint = match direction {
        TimeEnd::Start => iv.lo,
        TimeEnd::End => iv.hi,
    };
    Ok(LimitMetric { kind, rho, factor, direction, endpoint })
}

/// (h, Y) -> (e^{2c} h, e^{-2c} Y): tau, sigma, rho pick up e^{-2c}, e^{-4c}, e^{-4c};
/// s and t are stretched by e^{2c}, so u(t, s) becomes e^{-2c} u(e^{-2c} t, e^{-2c} s).
pub fn rescale(fm: &FamilyMetric, c: f64) -> FamilyMetric {
    let params = fm.params.rescaled(c);
    let desc = if fm.id() == FamilyId::B && fm.descriptor.hat_eps.is_none() {
        flat_soliton(&params)
    } else {
        classify_regime(&params, fm.descriptor.hat_eps)
    };
    let descriptor = desc.unwrap_or_else(|_| fm.descriptor.clone());
    FamilyMetric { descriptor, params, s_shift: fm.s_shift * (2.0 * c).exp() }
}

/// Normal-form (tau, sigma) at a normal time, exposed for oracle comparisons.
pub fn normal_form_values(params: &RegimeParameters, tn: f64) -> (f64, f64) {
    normal_tau_sigma(params, tn)
}
