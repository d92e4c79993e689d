//! Acceptance criteria, one line per criterion.
//!
//! Runs without the libtest harness so the PASS/FAIL lines always show up in `cargo test`.

use std::f64::consts::PI;
use std::process::ExitCode;

use vortex_flow::families::{
    conical_data, curvature_closed, domain_s, faraday_closed, family_from_params, limit_metric, EndKind, FamilyMetric,
};
use vortex_flow::flow::{evolve, l_branch, l_factor, l_factor_ode, local_flow_check, Boundary, LBranch, PdeConfig};
use vortex_flow::geometry::{
    curvature_fd, faraday_fd, laplacian_identity_f, structure_identities, tail_curvature, total_curvature,
    vortex_residual, Profile,
};
use vortex_flow::params::{tau_sigma_closed, tau_sigma_ode, RegimeParameters, Sign};
use vortex_flow::verify::{catalog, find_entry, incompleteness_probe, CatalogEntry};

type Outcome = Result<String, String>;

fn fail<E: std::fmt::Display>(what: &str) -> impl FnOnce(E) -> String + '_ {
    move |e| format!("{what}: {e}")
}

fn entry(name: &str) -> CatalogEntry {
    find_entry(name).unwrap_or_else(|| panic!("catalog entry {name}"))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect()
}

fn windows(e: &CatalogEntry) -> Result<Vec<(f64, (f64, f64))>, String> {
    e.t_samples
        .iter()
        .map(|&t| e.window.at(&e.family, t).map(|w| (t, w)).map_err(fail(&e.name)))
        .collect()
}

/// Closed (tau, sigma) against RK4 on a 0.5-long interval with dt = 1e-4, every family.
fn tau_sigma_ode_agreement() -> Outcome {
    let mut worst: f64 = 0.0;
    for e in catalog() {
        let (a, b) = e.tau_window;
        let p = e.family.params;
        let start = p.rebased(a).map_err(fail(&e.name))?;
        for k in 1..=10 {
            let t = a + (b - a) * k as f64 / 10.0;
            let ode = tau_sigma_ode(&start, t, 1e-4).map_err(fail(&e.name))?;
            let closed = tau_sigma_closed(&p, t).map_err(fail(&e.name))?;
            let err = rel(ode.tau, closed.tau).max(rel(ode.sigma, closed.sigma));
            if err > 1e-6 {
                return Err(format!("{} at t = {t}: relative error {err:e}", e.name));
            }
            worst = worst.max(err);
        }
    }
    Ok(format!("worst relative error {worst:.2e} (tol 1e-6)"))
}

/// Closed-form and FD vortex residuals with second-order refinement.
fn vortex_equation() -> Outcome {
    let entries = catalog();
    let (mut closed_worst, mut fd_worst) = (0.0f64, 0.0f64);
    let (mut ratio_lo, mut ratio_hi) = (f64::INFINITY, 0.0f64);
    let mut exact = Vec::new();
    for e in &entries {
        let fm = &e.family;
        let eps = fm.epsilon();
        let ws = windows(e)?;
        let per_t = 100usize.div_ceil(ws.len());
        for &(t, (lo, hi)) in &ws {
            let tau = fm.tau_sigma(t).map_err(fail(&e.name))?.tau;
            for s in points(lo, hi, per_t) {
                let r = curvature_closed(fm, t, s).map_err(fail(&e.name))?;
                let u = fm.u(t, s).map_err(fail(&e.name))?;
                closed_worst = closed_worst.max((r + 4.0 * eps * u - tau).abs());
            }
            let coarse = vortex_residual(&fm.profile(t, lo, hi, 1e-3).map_err(fail(&e.name))?, eps, tau).map_err(fail(&e.name))?;
            let fine = vortex_residual(&fm.profile(t, lo, hi, 5e-4).map_err(fail(&e.name))?, eps, tau).map_err(fail(&e.name))?;
            fd_worst = fd_worst.max(coarse);
            if coarse > 1e-4 {
                return Err(format!("{} at t = {t}: FD residual {coarse:e}", e.name));
            }
            if coarse < 1e-11 {
                // constant profiles are reproduced exactly by the stencil
                exact.push(e.name.clone());
                continue;
            }
            let ratio = coarse / fine;
            if !(3.0..=5.0).contains(&ratio) {
                return Err(format!("{} at t = {t}: halving ratio {ratio}", e.name));
            }
            ratio_lo = ratio_lo.min(ratio);
            ratio_hi = ratio_hi.max(ratio);
        }
    }
    if closed_worst > 1e-10 {
        return Err(format!("closed residual {closed_worst:e}"));
    }
    exact.dedup();
    Ok(format!(
        "{} entries, closed {closed_worst:.2e}, FD {fd_worst:.2e}, ratios in [{ratio_lo:.3}, {ratio_hi:.3}], exact: {}",
        entries.len(),
        exact.join(",")
    ))
}

/// R^2 - eps F^2 constant in s and equal to sigma(t); F^2 + 8 tau u - 16 eps u^2 = 4 rho.
fn sigma_and_rho_fields() -> Outcome {
    let (mut spread_worst, mut rho_worst) = (0.0f64, 0.0f64);
    for e in catalog() {
        let fm = &e.family;
        let eps = fm.epsilon();
        for (t, (lo, hi)) in windows(&e)? {
            let st = fm.tau_sigma(t).map_err(fail(&e.name))?;
            let (mut smin, mut smax) = (f64::INFINITY, f64::NEG_INFINITY);
            for s in points(lo, hi, 40) {
                let r = curvature_closed(fm, t, s).map_err(fail(&e.name))?;
                let f = faraday_closed(fm, t, s).map_err(fail(&e.name))?;
                let u = fm.u(t, s).map_err(fail(&e.name))?;
                let field = r * r - eps * f * f;
                smin = smin.min(field);
                smax = smax.max(field);
                rho_worst = rho_worst.max((f * f + 8.0 * st.tau * u - 16.0 * eps * u * u - 4.0 * fm.params.rho).abs());
                spread_worst = spread_worst.max((field - st.sigma).abs());
            }
            spread_worst = spread_worst.max(smax - smin);
        }
    }
    if spread_worst > 1e-9 || rho_worst > 1e-9 {
        return Err(format!("sigma spread {spread_worst:e}, rho residual {rho_worst:e}"));
    }
    Ok(format!("sigma spread {spread_worst:.2e}, rho residual {rho_worst:.2e} (tol 1e-9)"))
}

/// R_s = 2 eps F u and F_s = 2 R u by FD, second order; Laplacian identity for F.
fn structure_and_laplacian() -> Outcome {
    let (mut worst, mut lap_worst) = (0.0f64, 0.0f64);
    let (mut ratio_lo, mut ratio_hi) = (f64::INFINITY, 0.0f64);
    for e in catalog() {
        let fm = &e.family;
        let eps = fm.epsilon();
        for (t, (lo, hi)) in windows(&e)? {
            let tau = fm.tau_sigma(t).map_err(fail(&e.name))?.tau;
            let base = fm.profile(t, lo, hi, 1e-3).map_err(fail(&e.name))?;
            let (rc, fc) = structure_identities(&base, eps).map_err(fail(&e.name))?;
            let lap = laplacian_identity_f(&base, tau).map_err(fail(&e.name))?;
            if rc.max(fc) > 1e-3 || lap > 1e-2 {
                return Err(format!("{} at t = {t}: R slope {rc:e}, F slope {fc:e}, laplacian {lap:e}", e.name));
            }
            worst = worst.max(rc).max(fc);
            lap_worst = lap_worst.max(lap);
            // These identities difference log u three times, so below ds = 1e-3 rounding
            // (about 1e-16 / ds^3) overtakes truncation; halve from 4e-3 instead.
            let coarse = fm.profile(t, lo, hi, 4e-3).map_err(fail(&e.name))?;
            let fine = fm.profile(t, lo, hi, 2e-3).map_err(fail(&e.name))?;
            let (r4, f4) = structure_identities(&coarse, eps).map_err(fail(&e.name))?;
            let (r2, f2) = structure_identities(&fine, eps).map_err(fail(&e.name))?;
            for (c, f) in [(r4, r2), (f4, f2)] {
                if c < 1e-9 {
                    continue;
                }
                let ratio = c / f;
                if !(3.0..=5.0).contains(&ratio) {
                    return Err(format!("{} at t = {t}: structure halving ratio {ratio}", e.name));
                }
                ratio_lo = ratio_lo.min(ratio);
                ratio_hi = ratio_hi.max(ratio);
            }
        }
    }
    Ok(format!(
        "structure {worst:.2e} (tol 1e-3), ratios in [{ratio_lo:.3}, {ratio_hi:.3}], laplacian F {lap_worst:.2e} (tol 1e-2)"
    ))
}

/// Explicit scheme for w_t = w w_ss - w_s^2 against the sausage and the affine soliton.
fn pde_against_closed_forms() -> Outcome {
    let cfg = PdeConfig { ds: 1e-2, dt: 1e-5, boundary: Boundary::Dirichlet, stability_factor: 0.5 };
    let sausage = entry("sausage").family;
    let (_, err_e) = evolve(&sausage, -1.0, -0.9, (-2.0, 2.0), &cfg).map_err(fail("sausage"))?;
    let a = entry("A-");
    let window = a.window.at(&a.family, 0.0).map_err(fail("A-"))?;
    let (_, err_a) = evolve(&a.family, 0.0, 0.1, window, &cfg).map_err(fail("A-"))?;
    let msg = format!("sausage sup error {err_e:.2e} (tol 1e-4), affine sup error {err_a:.2e} (tol 1e-12)");
    if err_e <= 1e-4 && err_a <= 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Pointwise evolution u / L on the sausage, and closed L against its ODE on each branch.
fn l_factor_evolution() -> Outcome {
    let sausage = entry("sausage").family;
    let out = local_flow_check(&sausage, -1.0, -0.7, (-2.0, 2.0), 1e-3).map_err(fail("sausage"))?;
    if out.sup_deviation > 1e-8 || out.vortex_residual > 1e-4 {
        return Err(format!("sausage deviation {:e}, vortex residual {:e}", out.sup_deviation, out.vortex_residual));
    }
    let cases = [
        (LBranch::General, entry("sausage").family.params.rebased(-1.0).unwrap(), -0.7),
        (LBranch::Soliton, RegimeParameters::soliton(Sign::Plus, 4.0), 0.5),
        (LBranch::RhoZero, entry("C").family.params.rebased(0.5).unwrap(), 1.0),
        (LBranch::Affine, RegimeParameters::soliton(Sign::Plus, 0.0), 0.5),
    ];
    let mut worst: f64 = 0.0;
    for (branch, p, t1) in cases {
        if l_branch(&p) != branch {
            return Err(format!("expected {branch:?} for {p:?}"));
        }
        for u_p in [0.05, 0.2, 0.4] {
            let closed = l_factor(&p, u_p, t1).map_err(fail("l_factor"))?;
            let ode = l_factor_ode(&p, u_p, t1, 1e-4).map_err(fail("l_factor_ode"))?;
            let err = rel(ode, closed);
            if err > 1e-8 {
                return Err(format!("{branch:?} u_p = {u_p}: closed {closed}, ode {ode}"));
            }
            worst = worst.max(err);
        }
    }
    Ok(format!(
        "sausage deviation {:.2e}, vortex FD {:.2e}; four branches vs ODE {worst:.2e} (tol 1e-8)",
        out.sup_deviation, out.vortex_residual
    ))
}

/// Total curvature of C, the cigar, the sausage pinching bounds and the round sphere.
fn reference_quantities() -> Outcome {
    let c = entry("C").family;
    let p = c.profile(1.0, -60.0, 60.0, 1e-2).map_err(fail("C"))?;
    let body = total_curvature(&p).map_err(fail("C"))?;
    let tails = tail_curvature(&p, 0.0, 0.0).map_err(fail("C"))?;
    let (abs_total, signed) = (body.absolute + tails.absolute, body.signed + tails.signed);
    if (abs_total - 4.0 * PI).abs() > 1e-3 * 4.0 * PI {
        return Err(format!("C absolute curvature {abs_total}"));
    }
    if signed.abs() > 1e-6 {
        return Err(format!("C signed curvature {signed:e}"));
    }

    let cigar = entry("cigar").family;
    let mut cigar_sigma: f64 = 0.0;
    for i in 0..=15000 {
        let s = -5.0 + i as f64 * 1e-3;
        let r = curvature_closed(&cigar, 0.0, s).map_err(fail("cigar"))?;
        let f = faraday_closed(&cigar, 0.0, s).map_err(fail("cigar"))?;
        if !(r > 0.0 && r <= 4.0) {
            return Err(format!("cigar R = {r} at s = {s}"));
        }
        cigar_sigma = cigar_sigma.max((r * r - f * f).abs());
    }
    if cigar_sigma > 1e-12 {
        return Err(format!("cigar sigma field {cigar_sigma:e}"));
    }
    let cp = cigar.profile(0.0, -0.5, 3.0, 1e-3).map_err(fail("cigar"))?;
    let (rf, ff) = (curvature_fd(&cp).map_err(fail("cigar"))?, faraday_fd(&cp).map_err(fail("cigar"))?);
    let r_plus_f = rf.iter().zip(&ff).skip(1).take(rf.len() - 2).map(|(r, f)| (r + f).abs()).fold(0.0, f64::max);
    if r_plus_f > 1e-4 {
        return Err(format!("cigar R + F = {r_plus_f:e}"));
    }

    let sausage = entry("sausage").family;
    let mut bound_worst: f64 = 0.0;
    for t in [-1.0, -0.5, -0.1] {
        let st = sausage.tau_sigma(t).map_err(fail("sausage"))?;
        for i in 0..=12000 {
            let s = -6.0 + i as f64 * 1e-3;
            let r = curvature_closed(&sausage, t, s).map_err(fail("sausage"))?;
            let over = (st.sigma.sqrt() - r).max(r - st.tau) / st.tau;
            bound_worst = bound_worst.max(over);
        }
    }
    if bound_worst > 1e-12 {
        return Err(format!("sausage leaves [sqrt(sigma), tau] by {bound_worst:e}"));
    }

    let sphere = Profile::from_fn(-4.0, 4.0, 1e-3, 0.0, |s| 2.0 / s.cosh().powi(2)).map_err(fail("sphere"))?;
    let r = curvature_fd(&sphere).map_err(fail("sphere"))?;
    let sphere_err = r[1..r.len() - 1].iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    if sphere_err > 1e-5 {
        return Err(format!("sphere R off by {sphere_err:e}"));
    }
    Ok(format!(
        "C |K| {abs_total:.6} vs 4pi, signed {signed:.1e}; cigar sigma {cigar_sigma:.1e}, R+F {r_plus_f:.1e}; \
         sausage bounds {bound_worst:.1e}; sphere {sphere_err:.1e}"
    ))
}

fn angles(fm: &FamilyMetric) -> Vec<EndKind> {
    conical_data(fm).into_iter().map(|c| c.end).collect()
}

/// Cone angles read off the closed forms, compared for exact equality.
fn cone_angles() -> Outcome {
    use Sign::{Minus, Plus};
    let normal = |eps, rho, sig, t, hat| family_from_params(&RegimeParameters::from_normal_form(eps, rho, sig, t).unwrap(), hat).unwrap();
    let cigar = |tau| family_from_params(&RegimeParameters::soliton(Plus, tau), Some(Plus)).unwrap();
    let pi = 3.141592653589793;
    let three_pi = 9.42477796076938;
    let smooth = EndKind::Smooth;
    let cone = |angle| EndKind::Cone { angle };
    let table: Vec<(&str, FamilyMetric, Vec<EndKind>)> = vec![
        ("sausage rho=4", normal(Plus, 4.0, Plus, -1.0, Some(Plus)), vec![smooth, smooth]),
        ("sausage rho=9", normal(Plus, 9.0, Plus, -1.0, Some(Plus)), vec![cone(three_pi), cone(three_pi)]),
        ("sausage rho=1", normal(Plus, 1.0, Plus, -1.0, Some(Plus)), vec![cone(pi), cone(pi)]),
        ("two-cone sphere rho=4", normal(Minus, 4.0, Plus, -0.4, None), vec![smooth, smooth]),
        ("two-cone sphere rho=9", normal(Minus, 9.0, Plus, -0.3, None), vec![cone(three_pi), cone(three_pi)]),
        ("two-cone sphere rho=1", normal(Minus, 1.0, Plus, -0.5, None), vec![cone(pi), cone(pi)]),
        ("funnel rho=9", normal(Plus, 9.0, Plus, 0.75, Some(Minus)), vec![cone(three_pi)]),
        ("eternal rho=4", normal(Plus, 4.0, Minus, 0.0, None), vec![smooth]),
        ("eternal rho=9", normal(Plus, 9.0, Minus, 0.0, None), vec![cone(three_pi)]),
        ("cigar tau=4", cigar(4.0), vec![smooth]),
        ("cigar tau=6", cigar(6.0), vec![cone(three_pi)]),
        ("cigar tau=2", cigar(2.0), vec![cone(pi)]),
    ];
    let mut rows = Vec::new();
    for (name, fm, expect) in table {
        let got: Vec<EndKind> = angles(&fm).into_iter().filter(|k| matches!(k, EndKind::Cone { .. } | EndKind::Smooth)).collect();
        if got != expect {
            return Err(format!("{name}: got {got:?}, expected {expect:?}"));
        }
        rows.push(name);
    }
    Ok(format!("{} rows equal: {}", rows.len(), rows.join(", ")))
}

fn decreasing(d: &[f64]) -> bool {
    d.windows(2).all(|w| w[1] < w[0])
}

/// Rescaled sausage and F converge to their limits along the probe times.
fn limit_convergence() -> Outcome {
    let mut msg = Vec::new();
    for name in ["sausage", "F"] {
        let e = entry(name);
        let probe = e.limit.clone().expect("limit probe");
        let lim = limit_metric(&e.family, probe.direction).map_err(fail(name))?;
        let (neg, pos): (Vec<f64>, Vec<f64>) = probe.s_points.iter().partition(|s| **s < 0.0);
        let pieces: Vec<Vec<f64>> = if name == "F" { vec![neg, pos] } else { vec![probe.s_points.clone()] };
        for s in &pieces {
            let d = probe.t_seq.iter().map(|&t| lim.distance(&e.family, t, s)).collect::<Result<Vec<_>, _>>().map_err(fail(name))?;
            if !decreasing(&d) {
                return Err(format!("{name}: distances {d:?}"));
            }
            msg.push(format!("{name} {:.1e}->{:.1e}", d[0], d[d.len() - 1]));
        }
    }
    Ok(msg.join(", "))
}

/// The end of A- at s = 0 lies at finite distance 2 from s = -2.
fn incompleteness() -> Outcome {
    let a = entry("A-").family;
    let dom = domain_s(&a, 0.0).map_err(fail("A-"))?;
    if dom.interval.hi != 0.0 {
        return Err(format!("A- domain at t = 0 is {:?}", dom.interval));
    }
    let probe = incompleteness_probe(&a, 0.0, -2.0, 0.0, 40, 400).map_err(fail("A-"))?;
    let lengths: Vec<f64> = probe.iter().map(|p| p.1).collect();
    if !lengths.windows(2).all(|w| w[1] > w[0]) {
        return Err("partial lengths not increasing".into());
    }
    let last = lengths[lengths.len() - 1];
    if (last - 2.0).abs() > 1e-4 {
        return Err(format!("length {last}"));
    }
    Ok(format!("length after {} dyadic pieces {last:.9} (target 2, tol 1e-4)", probe.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("tau/sigma closed form vs ODE", tau_sigma_ode_agreement),
        ("vortex equation, closed and FD", vortex_equation),
        ("sigma and rho fields", sigma_and_rho_fields),
        ("structure and Laplacian identities", structure_and_laplacian),
        ("PDE vs closed forms", pde_against_closed_forms),
        ("L-factor evolution", l_factor_evolution),
        ("reference quantities", reference_quantities),
        ("cone angle table", cone_angles),
        ("limit convergence", limit_convergence),
        ("incompleteness of A-", incompleteness),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
