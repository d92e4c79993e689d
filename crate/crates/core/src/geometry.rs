//! Finite-difference geometry of sampled profiles `u(s)` on a uniform grid.
//!
//! Central second-order stencils inside, one-sided second-order stencils at the two ends.
//! Residual maxima skip the first and last grid point.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Profile {
    pub s0: f64,
    pub ds: f64,
    pub u: Vec<f64>,
    pub t: f64,
    /// Circumference weight of the r-circle in area integrals.
    pub period_r: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometrySample {
    pub s: f64,
    pub u: f64,
    pub w: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub mu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TotalCurvature {
    pub signed: f64,
    pub absolute: f64,
}

impl Profile {
    pub fn new(s0: f64, ds: f64, u: Vec<f64>, t: f64) -> Result<Self> {
        if u.len() < 5 {
            return Err(Error::GridTooSmall(u.len()));
        }
        if !(ds > 0.0) {
            return Err(Error::InvalidInput(format!("ds must be positive, got {ds}")));
        }
        if let Some(i) = u.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(format!("u[{i}] = {} is not positive", u[i])));
        }
        Ok(Profile { s0, ds, u, t, period_r: 2.0 * std::f64::consts::PI })
    }

    pub fn from_fn(s_a: f64, s_b: f64, ds: f64, t: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = ((s_b - s_a) / ds).round() as usize + 1;
        let h = (s_b - s_a) / (n.max(2) - 1) as f64;
        Profile::new(s_a, h, (0..n).map(|i| f(s_a + i as f64 * h)).collect(), t)
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn s(&self, i: usize) -> f64 {
        self.s0 + i as f64 * self.ds
    }

    pub fn s_values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.s(i)).collect()
    }

    pub fn s_end(&self) -> f64 {
        self.s(self.len() - 1)
    }

    /// log(u[i+1] / u[i]), which keeps full relative accuracy where u is tiny.
    fn log_steps(&self) -> Vec<f64> {
        self.u.windows(2).map(|w| ((w[1] - w[0]) / w[0]).ln_1p()).collect()
    }

    /// (log u)_s with the same stencils as `d1`.
    fn log_u_s(&self) -> Vec<f64> {
        let d = self.log_steps();
        let (n, h) = (self.len(), self.ds);
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            out[i] = (d[i] + d[i - 1]) / (2.0 * h);
        }
        out[0] = (3.0 * d[0] - d[1]) / (2.0 * h);
        out[n - 1] = (3.0 * d[n - 2] - d[n - 3]) / (2.0 * h);
        out
    }

    /// (log u)_ss with the same stencils as `d2`.
    fn log_u_ss(&self) -> Vec<f64> {
        let d = self.log_steps();
        let (n, h2) = (self.len(), self.ds * self.ds);
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            out[i] = (d[i] - d[i - 1]) / h2;
        }
        out[0] = (-2.0 * d[0] + 3.0 * d[1] - d[2]) / h2;
        out[n - 1] = (2.0 * d[n - 2] - 3.0 * d[n - 3] + d[n - 4]) / h2;
        out
    }

    fn check(&self) -> Result<()> {
        if self.len() < 5 {
            Err(Error::GridTooSmall(self.len()))
        } else {
            Ok(())
        }
    }
}

/// First derivative, second order everywhere.
pub fn d1(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    out
}

/// Second derivative, second order everywhere.
pub fn d2(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let h2 = h * h;
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    }
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    out
}

/// Applies a stencil to a derived field using only its entries 1..n-1, so that the
/// lower-accuracy end values never feed a second differentiation.
fn inner(f: &[f64], h: f64, op: fn(&[f64], f64) -> Vec<f64>) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![f64::NAN; n];
    out[1..n - 1].copy_from_slice(&op(&f[1..n - 1], h));
    out
}

fn interior_max(v: impl Iterator<Item = f64>, n: usize) -> f64 {
    v.enumerate()
        .filter(|(i, _)| *i > 0 && *i + 1 < n)
        .fold(0.0, |acc: f64, (_, x)| if x.is_nan() { f64::NAN } else { acc.max(x) })
}

/// R = -u^{-1} (log u)_ss
pub fn curvature_fd(p: &Profile) -> Result<Vec<f64>> {
    p.check()?;
    let l2 = p.log_u_ss();
    Ok(l2.iter().zip(&p.u).map(|(a, u)| -a / u).collect())
}

/// F = -2 (log u)_s
pub fn faraday_fd(p: &Profile) -> Result<Vec<f64>> {
    p.check()?;
    Ok(p.log_u_s().iter().map(|a| -2.0 * a).collect())
}

/// max |R + 4 eps u - tau|
pub fn vortex_residual(p: &Profile, epsilon: f64, tau: f64) -> Result<f64> {
    let r = curvature_fd(p)?;
    Ok(interior_max(r.iter().zip(&p.u).map(|(r, u)| (r + 4.0 * epsilon * u - tau).abs()), p.len()))
}

/// Pointwise R^2 - eps F^2 and its spread (max - min) over interior points.
pub fn sigma_field(p: &Profile, epsilon: f64) -> Result<(Vec<f64>, f64)> {
    let r = curvature_fd(p)?;
    let f = faraday_fd(p)?;
    let field: Vec<f64> = r.iter().zip(&f).map(|(r, f)| r * r - epsilon * f * f).collect();
    let inner = &field[1..field.len() - 1];
    let hi = inner.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = inner.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((field, hi - lo))
}

/// max |F^2 + 8 tau u - 16 eps u^2 - 4 rho|
pub fn rho_residual(p: &Profile, epsilon: f64, tau: f64, rho: f64) -> Result<f64> {
    let f = faraday_fd(p)?;
    Ok(interior_max(
        f.iter().zip(&p.u).map(|(f, u)| (f * f + 8.0 * tau * u - 16.0 * epsilon * u * u - 4.0 * rho).abs()),
        p.len(),
    ))
}

/// Maxima of |R_s - 2 eps F u| and |F_s - 2 R u|.
pub fn structure_identities(p: &Profile, epsilon: f64) -> Result<(f64, f64)> {
    let r = curvature_fd(p)?;
    let f = faraday_fd(p)?;
    let rs = inner(&r, p.ds, d1);
    let fs = inner(&f, p.ds, d1);
    let n = p.len();
    let res_r = interior_max((0..n).map(|i| (rs[i] - 2.0 * epsilon * f[i] * p.u[i]).abs()), n);
    let res_f = interior_max((0..n).map(|i| (fs[i] - 2.0 * r[i] * p.u[i]).abs()), n);
    Ok((res_r, res_f))
}

/// max |u^{-1} F_ss - tau F + 2 R F|
pub fn laplacian_identity_f(p: &Profile, tau: f64) -> Result<f64> {
    let r = curvature_fd(p)?;
    let f = faraday_fd(p)?;
    let fss = inner(&f, p.ds, d2);
    let n = p.len();
    Ok(interior_max((0..n).map(|i| (fss[i] / p.u[i] - tau * f[i] + 2.0 * r[i] * f[i]).abs()), n))
}

/// max |u^{-1} R_ss - tau R + 2 R^2 - sigma|
///
/// R comes from the full grid, but R_ss is differenced over `stride` cells: this is a fourth
/// derivative of log u, and on fine grids rounding noise would swamp it.
pub fn laplacian_identity_r(p: &Profile, tau: f64, sigma: f64, stride: usize) -> Result<f64> {
    let r = curvature_fd(p)?;
    let k = stride.max(1);
    let n = p.len();
    if n < 2 + 2 * k + 1 {
        return Err(Error::GridTooSmall(n));
    }
    let h2 = (k as f64 * p.ds).powi(2);
    let worst = (1 + k..n - 1 - k)
        .map(|i| {
            let rss = (r[i + k] - 2.0 * r[i] + r[i - k]) / h2;
            (rss / p.u[i] - tau * r[i] + 2.0 * r[i] * r[i] - sigma).abs()
        })
        .fold(0.0, |acc: f64, x| if x.is_nan() { f64::NAN } else { acc.max(x) });
    Ok(worst)
}

/// Cumulative trapezoid of u, zero at the left end.
pub fn moment_map(p: &Profile) -> Result<Vec<f64>> {
    p.check()?;
    let mut mu = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    mu.push(0.0);
    for w in p.u.windows(2) {
        acc += 0.5 * p.ds * (w[0] + w[1]);
        mu.push(acc);
    }
    Ok(mu)
}

/// min over the sign of max |R +- F|.
pub fn soliton_defect(p: &Profile) -> Result<f64> {
    let r = curvature_fd(p)?;
    let f = faraday_fd(p)?;
    let n = p.len();
    let plus = interior_max((0..n).map(|i| (r[i] + f[i]).abs()), n);
    let minus = interior_max((0..n).map(|i| (r[i] - f[i]).abs()), n);
    Ok(plus.min(minus))
}

/// Trapezoid length of the s-segment [s_a, s_b], interpolating sqrt(u) linearly in partial cells.
pub fn s_length(p: &Profile, s_a: f64, s_b: f64) -> Result<f64> {
    let (lo, hi) = (p.s0, p.s_end());
    let tol = 1e-9 * p.ds;
    for s in [s_a, s_b] {
        if s < lo - tol || s > hi + tol {
            return Err(Error::OutsideDomain { s, lo, hi });
        }
    }
    let (a, b, sign) = if s_a <= s_b { (s_a, s_b, 1.0) } else { (s_b, s_a, -1.0) };
    let root: Vec<f64> = p.u.iter().map(|v| v.sqrt()).collect();
    let at = |s: f64| {
        let x = ((s - lo) / p.ds).clamp(0.0, (p.len() - 1) as f64);
        let i = (x.floor() as usize).min(p.len() - 2);
        let frac = x - i as f64;
        root[i] * (1.0 - frac) + root[i + 1] * frac
    };
    let mut knots = vec![a];
    let first = ((a - lo) / p.ds).floor() as usize + 1;
    let mut i = first;
    while i < p.len() && p.s(i) < b {
        knots.push(p.s(i));
        i += 1;
    }
    knots.push(b);
    let total: f64 = knots.windows(2).map(|k| 0.5 * (k[1] - k[0]) * (at(k[0]) + at(k[1]))).sum();
    Ok(sign * total)
}

/// Trapezoid integrals of R dA and |R| dA with dA = period_r u ds.
///
/// R u is taken as -(log u)_ss directly, which stays accurate where u is tiny.
pub fn total_curvature(p: &Profile) -> Result<TotalCurvature> {
    p.check()?;
    let ru: Vec<f64> = p.log_u_ss().iter().map(|v| -v).collect();
    let trap = |g: &dyn Fn(f64) -> f64| -> f64 {
        ru.windows(2).map(|w| 0.5 * p.ds * (g(w[0]) + g(w[1]))).sum::<f64>() * p.period_r
    };
    Ok(TotalCurvature { signed: trap(&|x| x), absolute: trap(&|x: f64| x.abs()) })
}

/// Curvature carried by the two truncated tails, from the boundary values of F.
///
/// Since R u = (F/2)_s, the integral of R dA over s > s_end is period_r (F(+inf) - F(s_end)) / 2,
/// and likewise on the left. Absolute values assume R keeps one sign in each tail.
pub fn tail_curvature(p: &Profile, f_neg_inf: f64, f_pos_inf: f64) -> Result<TotalCurvature> {
    let f = faraday_fd(p)?;
    let half = 0.5 * p.period_r;
    let left = half * (f[0] - f_neg_inf);
    let right = half * (f_pos_inf - f[f.len() - 1]);
    Ok(TotalCurvature { signed: left + right, absolute: left.abs() + right.abs() })
}

/// Per-point table: s, u, w, R, F, mu.
pub fn sample(p: &Profile) -> Result<Vec<GeometrySample>> {
    let r = curvature_fd(p)?;
    let f = faraday_fd(p)?;
    let mu = moment_map(p)?;
    Ok((0..p.len())
        .map(|i| GeometrySample { s: p.s(i), u: p.u[i], w: 1.0 / p.u[i], r: r[i], f: f[i], mu: mu[i] })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn flat(c: f64) -> Profile {
        Profile::from_fn(-2.0, 2.0, 0.01, 0.0, |_| c).unwrap()
    }

    #[test]
    fn flat_profile_is_trivial() {
        let p = flat(0.75);
        assert!(curvature_fd(&p).unwrap().iter().all(|r| r.abs() < 1e-9));
        assert!(faraday_fd(&p).unwrap().iter().all(|f| f.abs() < 1e-12));
        assert!(vortex_residual(&p, 1.0, 3.0).unwrap() < 1e-9);
        assert!(rho_residual(&p, 1.0, 3.0, 2.25).unwrap() < 1e-12);
        let (field, spread) = sigma_field(&p, 1.0).unwrap();
        assert!(field.iter().all(|v| v.abs() < 1e-12) && spread < 1e-12);
        let tc = total_curvature(&p).unwrap();
        assert!(tc.signed.abs() < 1e-9 && tc.absolute < 1e-9);
        assert_relative_eq!(s_length(&p, -1.0, 1.5).unwrap(), 0.75f64.sqrt() * 2.5, max_relative = 1e-12);
        let mu = moment_map(&p).unwrap();
        assert_relative_eq!(mu[p.len() - 1], 0.75 * 4.0, max_relative = 1e-12);
        assert!(soliton_defect(&p).unwrap() < 1e-9);
        assert!(laplacian_identity_f(&p, 3.0).unwrap() < 1e-9);
        assert!(laplacian_identity_r(&p, 3.0, 0.0, 1).unwrap() < 1e-6);
    }

    #[test]
    fn round_sphere_profile() {
        let p = Profile::from_fn(-4.0, 4.0, 1e-3, 0.0, |s| 2.0 / s.cosh().powi(2)).unwrap();
        let r = curvature_fd(&p).unwrap();
        let worst = r[1..r.len() - 1].iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-5, "worst = {worst}");
    }

    #[test]
    fn small_grid_rejected() {
        assert!(matches!(Profile::new(0.0, 0.1, vec![1.0; 4], 0.0), Err(Error::GridTooSmall(4))));
    }

    #[test]
    fn length_outside_grid() {
        let p = flat(1.0);
        assert!(matches!(s_length(&p, -3.0, 0.0), Err(Error::OutsideDomain { .. })));
    }
}
