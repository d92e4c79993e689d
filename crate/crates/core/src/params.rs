//! Scalar parameters of a solution: epsilon, tau, sigma, rho.
//!
//! `tau` and `sigma` evolve along the flow by `tau' = sigma`, `sigma' = 2 tau sigma`
//! while `rho` stays fixed. Closed forms are evaluated in a shifted "normal time"
//! in which they take their simplest shape (`tau = -1/t`, `-m coth(m t)`, ...).

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Closed-form evaluators refuse times closer than this to a pole.
pub const POLE_GUARD: f64 = 1e-12;
/// RK4 gives up once |tau| exceeds this.
pub const BLOWUP_LIMIT: f64 = 1e12;
/// Largest |tau| * dt accepted by the RK4 integrators.
pub const MAX_TAU_DT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// `None` for zero and NaN.
    pub fn of(x: f64) -> Option<Sign> {
        if x > 0.0 {
            Some(Sign::Plus)
        } else if x < 0.0 {
            Some(Sign::Minus)
        } else {
            None
        }
    }

    pub fn from_int(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// Open interval; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    /// Inside and at least `margin` away from every finite end.
    pub fn contains_strictly(&self, x: f64, margin: f64) -> bool {
        x > self.lo + margin && x < self.hi - margin
    }
}

fn fmt_end(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", fmt_end(self.lo), fmt_end(self.hi))
    }
}

// JSON has no infinities, so infinite ends go out as strings.
impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(Serialize)]
        #[serde(untagged)]
        enum End {
            Num(f64),
            Text(String),
        }
        let end = |x: f64| if x.is_finite() { End::Num(x) } else { End::Text(fmt_end(x)) };
        let mut st = ser.serialize_struct("Interval", 2)?;
        st.serialize_field("lo", &end(self.lo))?;
        st.serialize_field("hi", &end(self.hi))?;
        st.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeParameters {
    pub epsilon: Sign,
    pub tau0: f64,
    pub sigma0: f64,
    pub rho: f64,
    pub t0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterState {
    pub t: f64,
    pub tau: f64,
    pub sigma: f64,
}

pub fn derive_rho(epsilon: Sign, tau0: f64, sigma0: f64) -> f64 {
    (tau0 * tau0 - sigma0) / (4.0 * epsilon.value())
}

/// Shape of the closed form for (tau, sigma); `m = 2 sqrt|rho|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Form {
    /// sigma0 == 0: tau is constant.
    Constant,
    /// rho == 0: tau = -1/t.
    Rational,
    /// sigma > 0, eps*rho > 0: tau = -m coth(m t).
    Hyperbolic(f64),
    /// sigma > 0, eps*rho < 0: tau = -m cot(m t).
    Trigonometric(f64),
    /// sigma < 0: tau = -m tanh(m t).
    Tanh(f64),
}

impl RegimeParameters {
    /// Builds parameters with rho derived from the other fields.
    pub fn new(epsilon: Sign, tau0: f64, sigma0: f64, t0: f64) -> Self {
        RegimeParameters { epsilon, tau0, sigma0, rho: derive_rho(epsilon, tau0, sigma0), t0 }
    }

    /// Parameters read off the normal form at time `t`, so that normal time equals flow time.
    ///
    /// `sigma_sign` only matters for eps = +1, rho > 0, where both signs occur.
    pub fn from_normal_form(epsilon: Sign, rho: f64, sigma_sign: Sign, t: f64) -> Result<Self> {
        let e = epsilon.value();
        let m = 2.0 * rho.abs().sqrt();
        let x = m * t;
        let (tau, sigma) = if rho == 0.0 {
            (-1.0 / t, 1.0 / (t * t))
        } else if sigma_sign == Sign::Minus {
            if epsilon == Sign::Minus || rho < 0.0 {
                return Err(Error::InvalidRegime("sigma < 0 requires eps = +1 and rho > 0".into()));
            }
            (-m * x.tanh(), -m * m / x.cosh().powi(2))
        } else if e * rho > 0.0 {
            (-m / x.tanh(), m * m / x.sinh().powi(2))
        } else {
            (-m / x.tan(), m * m / x.sin().powi(2))
        };
        if !tau.is_finite() || !sigma.is_finite() {
            return Err(Error::OutsideTimeDomain { t, detail: "pole of the normal form".into() });
        }
        Ok(RegimeParameters { epsilon, tau0: tau, sigma0: sigma, rho, t0: t })
    }

    /// Sigma = 0 parameters: constant tau, rho = tau^2 / (4 eps).
    pub fn soliton(epsilon: Sign, tau: f64) -> Self {
        RegimeParameters::new(epsilon, tau, 0.0, 0.0)
    }

    /// 4 eps rho = tau0^2 - sigma0 up to a few ulps of the largest term.
    pub fn check(&self) -> Result<()> {
        let lhs = 4.0 * self.epsilon.value() * self.rho;
        let rhs = self.tau0 * self.tau0 - self.sigma0;
        let scale = lhs.abs().max(self.tau0 * self.tau0).max(self.sigma0.abs());
        if !(lhs - rhs).is_finite() || (lhs - rhs).abs() > 16.0 * f64::EPSILON * scale {
            return Err(Error::InconsistentParameters { lhs, rhs });
        }
        Ok(())
    }

    pub(crate) fn form(&self) -> Form {
        let m = 2.0 * self.rho.abs().sqrt();
        if self.sigma0 == 0.0 {
            Form::Constant
        } else if self.rho == 0.0 {
            Form::Rational
        } else if self.sigma0 < 0.0 {
            Form::Tanh(m)
        } else if self.epsilon.value() * self.rho > 0.0 {
            Form::Hyperbolic(m)
        } else {
            Form::Trigonometric(m)
        }
    }

    /// Normal time corresponding to the reference time t0.
    pub(crate) fn normal_t0(&self) -> f64 {
        match self.form() {
            Form::Constant => self.t0,
            Form::Rational => -1.0 / self.tau0,
            // atanh loses the phase once |tau| is close to m; sigma carries it there
            Form::Hyperbolic(m) => -self.tau0.signum() * (m / self.sigma0.sqrt()).asinh() / m,
            Form::Tanh(m) if (self.tau0 / m).abs() < 0.5 => -(self.tau0 / m).atanh() / m,
            Form::Tanh(m) => -self.tau0.signum() * (m / (-self.sigma0).sqrt()).acosh() / m,
            Form::Trigonometric(m) => {
                let phase = match self.epsilon {
                    Sign::Plus => m.atan2(-self.tau0),
                    Sign::Minus => (-m).atan2(self.tau0),
                };
                phase / m
            }
        }
    }

    /// Shift taking flow time to normal time.
    pub fn normal_time(&self, t: f64) -> f64 {
        t - self.t0 + self.normal_t0()
    }

    /// Same solution, re-referenced at time `t`.
    pub fn rebased(&self, t: f64) -> Result<RegimeParameters> {
        let st = tau_sigma_closed(self, t)?;
        Ok(RegimeParameters { tau0: st.tau, sigma0: st.sigma, t0: t, ..*self })
    }

    /// Scaling (h, Y) -> (e^{2c} h, e^{-2c} Y).
    pub fn rescaled(&self, c: f64) -> RegimeParameters {
        let a = (-2.0 * c).exp();
        RegimeParameters {
            epsilon: self.epsilon,
            tau0: a * self.tau0,
            sigma0: a * a * self.sigma0,
            rho: a * a * self.rho,
            t0: self.t0 / a,
        }
    }
}

/// Pole-free normal-time interval containing the normal reference time.
fn normal_interval(p: &RegimeParameters) -> Interval {
    let tn0 = p.normal_t0();
    match p.form() {
        Form::Constant | Form::Tanh(_) => Interval::REAL_LINE,
        Form::Rational | Form::Hyperbolic(_) => {
            if tn0 < 0.0 {
                Interval::new(f64::NEG_INFINITY, 0.0)
            } else {
                Interval::new(0.0, f64::INFINITY)
            }
        }
        Form::Trigonometric(m) => {
            let j = (m * tn0 / PI).floor();
            Interval::new(j * PI / m, (j + 1.0) * PI / m)
        }
    }
}

/// Normal-form (tau, sigma) at normal time `tn`; no domain checks.
pub(crate) fn normal_tau_sigma(p: &RegimeParameters, tn: f64) -> (f64, f64) {
    match p.form() {
        Form::Constant => (p.tau0, 0.0),
        Form::Rational => (-1.0 / tn, 1.0 / (tn * tn)),
        Form::Hyperbolic(m) => {
            let x = m * tn;
            (-m / x.tanh(), (m / x.sinh()).powi(2))
        }
        Form::Trigonometric(m) => {
            let x = m * tn;
            (-m / x.tan(), (m / x.sin()).powi(2))
        }
        Form::Tanh(m) => {
            let x = m * tn;
            (-m * x.tanh(), -(m / x.cosh()).powi(2))
        }
    }
}

/// Largest open t-interval around t0 on which the closed forms are finite.
pub fn time_domain(p: &RegimeParameters) -> Interval {
    let iv = normal_interval(p);
    let shift = p.t0 - p.normal_t0();
    Interval::new(iv.lo + shift, iv.hi + shift)
}

pub fn tau_sigma_closed(p: &RegimeParameters, t: f64) -> Result<ParameterState> {
    let iv = time_domain(p);
    if !iv.contains_strictly(t, POLE_GUARD) {
        return Err(Error::OutsideTimeDomain { t, detail: format!("closed form is finite on {iv}") });
    }
    let (tau, sigma) = normal_tau_sigma(p, p.normal_time(t));
    Ok(ParameterState { t, tau, sigma })
}

/// Fixed-step classical RK4 for the (tau, sigma) system from (t0, tau0, sigma0) to t1.
pub fn tau_sigma_ode(p: &RegimeParameters, t1: f64, dt: f64) -> Result<ParameterState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let four_eps_rho = 4.0 * p.epsilon.value() * p.rho;
    let f = |tau: f64, sigma: f64| (tau * tau - four_eps_rho, 2.0 * tau * sigma);
    let n = ((t1 - p.t0).abs() / dt).ceil().max(if t1 == p.t0 { 0.0 } else { 1.0 }) as usize;
    let h = if n == 0 { 0.0 } else { (t1 - p.t0) / n as f64 };
    let (mut tau, mut sigma) = (p.tau0, p.sigma0);
    for i in 0..n {
        let t = p.t0 + i as f64 * h;
        if tau.abs() * h.abs() > MAX_TAU_DT {
            return Err(Error::StepTooLarge(tau.abs() * h.abs()));
        }
        let k1 = f(tau, sigma);
        let k2 = f(tau + 0.5 * h * k1.0, sigma + 0.5 * h * k1.1);
        let k3 = f(tau + 0.5 * h * k2.0, sigma + 0.5 * h * k2.1);
        let k4 = f(tau + h * k3.0, sigma + h * k3.1);
        tau += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        sigma += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if !(tau.abs() <= BLOWUP_LIMIT) {
            return Err(Error::OutsideTimeDomain { t: t + h, detail: format!("|tau| exceeded {BLOWUP_LIMIT:e}") });
        }
    }
    Ok(ParameterState { t: t1, tau, sigma })
}

/// Letters for the explicit families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyId {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
}

impl FamilyId {
    pub const ALL: [FamilyId; 10] = [
        FamilyId::A,
        FamilyId::B,
        FamilyId::C,
        FamilyId::D,
        FamilyId::E,
        FamilyId::F,
        FamilyId::G,
        FamilyId::H,
        FamilyId::I,
        FamilyId::J,
    ];

    pub fn letter(self) -> char {
        (b'A' + self as u8) as char
    }

    pub fn parse(s: &str) -> Option<FamilyId> {
        let mut c = s.chars();
        match (c.next(), c.next()) {
            (Some(ch), None) => FamilyId::ALL.iter().copied().find(|f| f.letter() == ch.to_ascii_uppercase()),
            _ => None,
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeTag {
    Ancient,
    Immortal,
    Eternal,
    FiniteWindow,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyDescriptor {
    pub family_id: FamilyId,
    /// Sign in front of the cosh/exp term; `None` where the family has no such choice.
    /// In family B, `None` selects the flat solution w = 4/tau.
    pub hat_eps: Option<Sign>,
    pub tau_sign: Option<Sign>,
    pub branch: String,
    pub surface_note: String,
    pub time_interval: Interval,
    pub time_tag: TimeTag,
}

fn descriptor(
    id: FamilyId,
    hat_eps: Option<Sign>,
    tau_sign: Option<Sign>,
    branch: &str,
    note: &str,
    tag: TimeTag,
    p: &RegimeParameters,
) -> FamilyDescriptor {
    let mut d = FamilyDescriptor {
        family_id: id,
        hat_eps,
        tau_sign,
        branch: branch.into(),
        surface_note: note.into(),
        time_interval: Interval::REAL_LINE,
        time_tag: tag,
    };
    d.time_interval = maximal_time_interval(&d, p);
    d
}

fn invalid<T>(msg: &str) -> Result<T> {
    Err(Error::InvalidRegime(msg.into()))
}

/// Picks the family a parameter set belongs to.
///
/// `hat_eps` chooses between branches sharing (eps, sigma, rho); `None` takes the default branch.
pub fn classify_regime(p: &RegimeParameters, hat_eps: Option<Sign>) -> Result<FamilyDescriptor> {
    use FamilyId::*;
    use TimeTag::*;
    p.check()?;
    let eps = p.epsilon;
    let tau_sign = Sign::of(p.tau0);
    if p.sigma0 == 0.0 {
        if eps == Sign::Minus {
            return invalid("sigma = 0 with eps = -1 only admits flat metrics with parallel Y");
        }
        return match tau_sign {
            None => {
                let h = hat_eps.unwrap_or(Sign::Plus);
                let note = match h {
                    Sign::Plus => "half cylinder s > 2t (complement of a disk)",
                    Sign::Minus => "half cylinder s < -2t (punctured disk)",
                };
                Ok(descriptor(A, Some(h), None, "affine", note, Eternal, p))
            }
            Some(Sign::Plus) => match hat_eps.unwrap_or(Sign::Plus) {
                Sign::Plus => Ok(descriptor(
                    B,
                    Some(Sign::Plus),
                    tau_sign,
                    "cigar",
                    "plane with a cone point at the origin (sphere minus a point)",
                    Eternal,
                    p,
                )),
                Sign::Minus => Ok(descriptor(
                    B,
                    Some(Sign::Minus),
                    tau_sign,
                    "cusp",
                    "complement of a disk, cusp at infinity",
                    Eternal,
                    p,
                )),
            },
            Some(Sign::Minus) => match hat_eps.unwrap_or(Sign::Minus) {
                Sign::Plus => invalid("sigma = 0, tau < 0 requires hat_eps = -1"),
                Sign::Minus => Ok(descriptor(
                    B,
                    Some(Sign::Minus),
                    tau_sign,
                    "exploding soliton",
                    "complement of a disk, cone point at infinity",
                    Eternal,
                    p,
                )),
            },
        };
    }
    if p.sigma0 < 0.0 {
        if eps == Sign::Minus || p.rho <= 0.0 {
            return invalid("sigma < 0 forces eps = +1 and rho > 0");
        }
        return Ok(descriptor(J, None, tau_sign, "eternal", "complement of a disk, cone point at infinity", Eternal, p));
    }
    // sigma > 0 from here on
    if p.rho == 0.0 {
        return match eps {
            Sign::Minus => {
                if p.tau0 > 0.0 {
                    return invalid("eps = -1, rho = 0 and tau > 0 force Y = 0");
                }
                Ok(descriptor(C, None, tau_sign, "immortal", "punctured plane", Immortal, p))
            }
            Sign::Plus => {
                if p.tau0 > 0.0 {
                    Ok(descriptor(D, None, tau_sign, "annulus", "annulus |s| < -2t", Ancient, p))
                } else {
                    Ok(descriptor(D, None, tau_sign, "half cylinders", "half cylinders |s| > 2t", Immortal, p))
                }
            }
        };
    }
    if p.rho > 0.0 {
        return match eps {
            Sign::Minus => {
                let h = hat_eps.unwrap_or(Sign::Plus);
                Ok(descriptor(F, Some(h), tau_sign, "sphere flow", "sphere with two cone points", FiniteWindow, p))
            }
            Sign::Plus => match (hat_eps, p.tau0 > 0.0) {
                (None | Some(Sign::Plus), true) => {
                    Ok(descriptor(E, Some(Sign::Plus), tau_sign, "sausage", "sphere with two cone points", Ancient, p))
                }
                (Some(Sign::Minus), true) => {
                    Ok(descriptor(G, Some(Sign::Minus), tau_sign, "annulus", "annulus |s| < -2t", Ancient, p))
                }
                (None | Some(Sign::Minus), false) => Ok(descriptor(
                    G,
                    Some(Sign::Minus),
                    tau_sign,
                    "funnels",
                    "two capped funnels |s| > 2t, cone points at the ends",
                    Immortal,
                    p,
                )),
                (Some(Sign::Plus), false) => invalid("eps = +1, rho > 0, tau < 0 has no hat_eps = +1 branch"),
            },
        };
    }
    // rho < 0
    match eps {
        Sign::Plus => Ok(descriptor(H, None, tau_sign, "bounded cylinder", "bounded cylinder 2t < s < 2pi/sqrt|rho| - 2t", FiniteWindow, p)),
        Sign::Minus => {
            if p.tau0 >= 0.0 {
                return invalid("eps = -1, rho < 0 requires tau < 0");
            }
            Ok(descriptor(I, None, tau_sign, "torus", "torus (periodic in s)", Immortal, p))
        }
    }
}

/// The flat member w = 4/tau of family B.
pub fn flat_soliton(p: &RegimeParameters) -> Result<FamilyDescriptor> {
    p.check()?;
    if p.sigma0 != 0.0 || p.epsilon == Sign::Minus || !(p.tau0 > 0.0) {
        return invalid("the flat soliton needs sigma = 0, eps = +1, tau > 0");
    }
    Ok(descriptor(FamilyId::B, None, Some(Sign::Plus), "flat", "flat cylinder", TimeTag::Eternal, p))
}

/// Time interval of the closed forms. Solitons (A, B) live for all t.
pub fn maximal_time_interval(desc: &FamilyDescriptor, p: &RegimeParameters) -> Interval {
    match desc.family_id {
        FamilyId::A | FamilyId::B => Interval::REAL_LINE,
        _ => time_domain(p),
    }
}
