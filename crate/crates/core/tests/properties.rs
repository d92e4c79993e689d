use proptest::prelude::*;

use vortex_flow::families::{curvature_closed, domain_s, faraday_closed, family_from_params, rescale, FamilyMetric};
use vortex_flow::flow::{l_factor, l_factor_ode, pde_step, Edges, FlowState, PdeConfig};
use vortex_flow::geometry::{curvature_fd, Profile};
use vortex_flow::params::{classify_regime, tau_sigma_closed, time_domain, RegimeParameters, Sign};
use vortex_flow::Error;

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

fn sausage(rho: f64, t: f64) -> FamilyMetric {
    let p = RegimeParameters::from_normal_form(Sign::Plus, rho, Sign::Plus, t).unwrap();
    family_from_params(&p, Some(Sign::Plus)).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_forms_are_consistent(eps in sign(), rho in 0.1f64..9.0, neg in any::<bool>(), t in 0.05f64..0.7) {
        let rho = if neg { -rho } else { rho };
        let t = if neg { t * 0.5 } else { t };
        let p = RegimeParameters::from_normal_form(eps, rho, Sign::Plus, t).unwrap();
        prop_assert!(p.check().is_ok());
        prop_assert!(time_domain(&p).contains(t));
    }

    #[test]
    fn tau_derivative_is_sigma(rho in 0.1f64..9.0, t in -2.0f64..-0.1, dt in 0.01f64..0.05) {
        let p = RegimeParameters::from_normal_form(Sign::Plus, rho, Sign::Plus, -1.0).unwrap();
        let t1 = t + dt.min(-t / 2.0);
        let h = 1e-5;
        let a = tau_sigma_closed(&p, t1 - h).unwrap();
        let b = tau_sigma_closed(&p, t1 + h).unwrap();
        let mid = tau_sigma_closed(&p, t1).unwrap();
        prop_assert!(close((b.tau - a.tau) / (2.0 * h), mid.sigma, 1e-6));
        prop_assert!(close(mid.tau * mid.tau - mid.sigma, 4.0 * p.rho, 1e-10));
        // tau moves in the direction of sign(sigma)
        prop_assert!(b.tau > a.tau);
    }

    #[test]
    fn rebasing_keeps_the_solution(rho in 0.1f64..9.0, t1 in -2.0f64..-0.1, t2 in -2.0f64..-0.1) {
        let p = RegimeParameters::from_normal_form(Sign::Plus, rho, Sign::Plus, -1.0).unwrap();
        let q = p.rebased(t1).unwrap();
        let a = tau_sigma_closed(&p, t2).unwrap();
        let b = tau_sigma_closed(&q, t2).unwrap();
        prop_assert!(close(a.tau, b.tau, 1e-10) && close(a.sigma, b.sigma, 1e-10));
    }

    #[test]
    fn closed_forms_satisfy_the_identities(rho in 0.5f64..9.0, t in -2.0f64..-0.05, s in -3.0f64..3.0) {
        let fm = sausage(rho, -1.0);
        let st = fm.tau_sigma(t).unwrap();
        let (r, f, u) = (curvature_closed(&fm, t, s).unwrap(), faraday_closed(&fm, t, s).unwrap(), fm.u(t, s).unwrap());
        let scale = 1.0 + st.tau.abs() + st.sigma.abs();
        prop_assert!((r + 4.0 * u - st.tau).abs() <= 1e-10 * scale);
        prop_assert!((r * r - f * f - st.sigma).abs() <= 1e-9 * scale * scale);
        prop_assert!((f * f + 8.0 * st.tau * u - 16.0 * u * u - 4.0 * rho).abs() <= 1e-9 * scale * scale);
    }

    #[test]
    fn steady_solitons_have_f_equal_minus_r(tau in 0.5f64..8.0, t in -1.0f64..1.0, x in -3.0f64..3.0) {
        let fm = family_from_params(&RegimeParameters::soliton(Sign::Plus, tau), Some(Sign::Plus)).unwrap();
        let s = x + 2.0 * t;
        let r = curvature_closed(&fm, t, s).unwrap();
        let f = faraday_closed(&fm, t, s).unwrap();
        prop_assert!((r + f).abs() <= 1e-12 * tau.max(1.0));
    }

    #[test]
    fn scaling_maps_solutions_to_solutions(rho in 0.5f64..9.0, c in -1.0f64..1.0, t in -2.0f64..-0.1, s in -2.0f64..2.0) {
        let fm = sausage(rho, -1.0);
        let scaled = rescale(&fm, c);
        let k = (2.0 * c).exp();
        prop_assert!(close(scaled.u(k * t, k * s).unwrap(), fm.u(t, s).unwrap() / k, 1e-10));
    }

    #[test]
    fn l_is_one_at_the_reference_time(rho in 0.5f64..9.0, t0 in -2.0f64..-0.1, u in 0.0f64..2.0) {
        let p = RegimeParameters::from_normal_form(Sign::Plus, rho, Sign::Plus, t0).unwrap();
        prop_assert!((l_factor(&p, u, t0).unwrap() - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn l_factor_solves_its_ode(rho in 0.5f64..9.0, t0 in -2.0f64..-0.5, dt in 0.05f64..0.4, s in -1.5f64..1.5) {
        let fm = sausage(rho, -1.0);
        let p = fm.params.rebased(t0).unwrap();
        let u = fm.u(t0, s).unwrap();
        let t1 = t0 + dt;
        let closed = l_factor(&p, u, t1).unwrap();
        let ode = l_factor_ode(&p, u, t1, 1e-4).unwrap();
        prop_assert!(close(closed, ode, 1e-8));
        // pointwise evolution reproduces the family
        prop_assert!(close(u / closed, fm.u(t1, s).unwrap(), 1e-9));
    }

    #[test]
    fn pde_step_fixes_constants_and_lowers_affine(w0 in 0.1f64..5.0, a in -3.0f64..3.0, n in 8usize..40) {
        let ds = 0.05;
        let cfg = PdeConfig { ds, dt: 1e-5, ..PdeConfig::default() };
        let flat = FlowState { t: 0.0, s0: 0.0, ds, w: vec![w0; n], tau: 0.0, sigma: 0.0 };
        prop_assert_eq!(pde_step(&flat, &cfg, Edges::Keep).unwrap().w, flat.w);
        let line: Vec<f64> = (0..n).map(|i| w0 + 10.0 + a * ds * i as f64).collect();
        let st = FlowState { w: line.clone(), ..flat };
        let next = pde_step(&st, &cfg, Edges::Keep).unwrap();
        for i in 1..n - 1 {
            prop_assert!((next.w[i] - (line[i] - cfg.dt * a * a)).abs() <= 1e-12 * line[i]);
        }
    }

    #[test]
    fn fd_curvature_scales_inversely(c in 0.1f64..10.0, rho in 0.5f64..9.0) {
        let fm = sausage(rho, -1.0);
        let p = fm.profile(-1.0, -1.0, 1.0, 1e-2).unwrap();
        let q = Profile::new(p.s0, p.ds, p.u.iter().map(|u| c * u).collect(), p.t).unwrap();
        let (r, rq) = (curvature_fd(&p).unwrap(), curvature_fd(&q).unwrap());
        for (a, b) in r.iter().zip(&rq) {
            prop_assert!(close(a / c, *b, 1e-9));
        }
    }

    #[test]
    fn classification_is_total(eps in sign(), tau0 in -10.0f64..10.0, sigma0 in -10.0f64..10.0, hat in proptest::option::of(sign())) {
        let p = RegimeParameters::new(eps, tau0, sigma0, 0.0);
        match classify_regime(&p, hat) {
            Ok(desc) => {
                let fm = family_from_params(&p, hat).unwrap();
                prop_assert_eq!(fm.id(), desc.family_id);
                prop_assert!(domain_s(&fm, 0.0).is_ok());
            }
            Err(e) => prop_assert!(matches!(e, Error::InvalidRegime(_)), "unexpected error {e:?}"),
        }
    }
}
