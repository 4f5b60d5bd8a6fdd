use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trusspp_core::analysis::{dynamic_min_eigenvalue, peak_power, solve_equilibrium};
use trusspp_core::conic::ConicProblem;
use trusspp_core::fem::{GroundStructure, TrussModel};
use trusspp_core::linalg::c;
use trusspp_core::loads::HarmonicLoad;
use trusspp_core::presets::*;
use trusspp_core::sensitivity::*;
use trusspp_core::solver::{ConicBackend, InteriorPoint};
use trusspp_core::trigpoly::{max_abs_on_circle, TrigPoly};

fn axial_bar(len: f64) -> TrussModel {
    let gs = GroundStructure::new(vec![[0.0, 0.0], [len, 0.0]], vec![(0, 1)], vec![0, 1, 3]).unwrap();
    TrussModel::new(gs, E_MOD, RHO).unwrap()
}

fn random_feasible(model: &TrussModel, load: &HarmonicLoad, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let top = load.n_harm() as f64 * load.omega0;
    loop {
        let a: Vec<f64> = (0..model.n_elements()).map(|_| rng.gen_range(0.1..2.0)).collect();
        let s = 1.0 / model.mass(&a);
        let a: Vec<f64> = a.iter().map(|v| v * s).collect();
        if solve_equilibrium(model, &a, load).is_ok() && dynamic_min_eigenvalue(model, &a, top).unwrap() > 0.0 {
            return a;
        }
    }
}

#[test]
fn inner_value_of_single_coefficient() {
    // q(θ) = 2 q₂ cos 2θ
    let q = TrigPoly::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.3, 0.0)]);
    let (v, g) = inner_value_grad(&q, &InteriorPoint::default()).unwrap();
    assert!((v - 0.6).abs() < 1e-7, "{v}");
    assert!((g[2].re - 2.0).abs() < 1e-5, "{:?}", g);
    assert!(g[1].norm() < 1e-5);
}

#[test]
fn inner_value_of_zero() {
    let q = TrigPoly::new(vec![c(0.0, 0.0); 5]);
    let (v, g) = inner_value_grad(&q, &InteriorPoint::default()).unwrap();
    assert_eq!(v, 0.0);
    assert!(g.iter().all(|z| *z == c(0.0, 0.0)));
}

#[test]
fn inner_value_grad_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ip = InteriorPoint::default();
    for _ in 0..5 {
        let mut coeffs: Vec<Complex64> = (0..5).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        coeffs[0].im = 0.0;
        let q = TrigPoly::new(coeffs.clone());
        let (v, g) = inner_value_grad(&q, &ip).unwrap();
        assert!((v - max_abs_on_circle(&q)).abs() < 1e-6 * v);
        let h = 1e-6;
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for k in 0..5 {
            for (part, dir) in [(0, c(1.0, 0.0)), (1, c(0.0, 1.0))] {
                if k == 0 && part == 1 {
                    continue;
                }
                let shifted = |s: f64| {
                    let mut cs = coeffs.clone();
                    cs[k] += dir * s;
                    max_abs_on_circle(&TrigPoly::new(cs))
                };
                let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                let an = if part == 0 { g[k].re } else { g[k].im };
                worst = worst.max((fd - an).abs());
                scale = scale.max(fd.abs());
            }
        }
        assert!(worst <= 1e-3 * scale, "{worst} vs {scale}");
    }
}

#[test]
fn sos_value_bounds_sampled_peak() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let ip = InteriorPoint::default();
    for _ in 0..20 {
        let coeffs: Vec<Complex64> =
            (0..7).map(|k| c(rng.gen_range(-1.0..1.0), if k == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) })).collect();
        let q = TrigPoly::new(coeffs);
        let (theta, _) = inner_value_grad(&q, &ip).unwrap();
        let sampled = (0..4096).map(|i| q.eval_angle(i as f64 * core::f64::consts::TAU / 4096.0).abs()).fold(0.0, f64::max);
        assert!(theta >= sampled - 1e-6);
    }
}

#[test]
fn single_bar_gradient_is_analytic() {
    let len = 2.0;
    let model = axial_bar(len);
    let (a, w, f) = (0.6, 15.0, 0.8);
    let load = HarmonicLoad::from_entries(&model.gs, w, 1, &[(1, 2, c(f, 0.0))]).unwrap();
    let d = E_MOD / len - w * w * RHO * len / 3.0;
    // p(a) = 2ω f² / (a d)
    let p = 2.0 * w * f * f / (a * d);
    let r = peak_power_grad(&model, &[a], &load, &InteriorPoint::default()).unwrap();
    assert!((r.peak_power - p).abs() < 1e-7 * p);
    assert!((r.grad[0] + p / a).abs() < 1e-5 * p / a, "{} vs {}", r.grad[0], -p / a);
    let direct = peak_power_grad_direct(&model, &[a], &load).unwrap();
    assert!((direct.grad[0] + p / a).abs() < 1e-9 * p / a);
}

#[test]
fn single_bar_at_mass_bound_is_stationary() {
    let model = axial_bar(2.0);
    let load = HarmonicLoad::from_entries(&model.gs, 15.0, 1, &[(1, 2, c(0.5, 0.1))]).unwrap();
    let m = 1.5;
    let a = model.uniform_design(m);
    let r = kkt_residual(&model, &a, &load, m, &InteriorPoint::default()).unwrap();
    let p = r.gradient.peak_power;
    assert!(r.residual.abs() < 1e-6 * p, "{}", r.residual);
    assert!(r.mass_multiplier > 0.0);
    // below the bound the multiplier cannot cancel the gradient
    let half: Vec<f64> = a.iter().map(|v| v / 2.0).collect();
    let r2 = kkt_residual(&model, &half, &load, m, &InteriorPoint::default()).unwrap();
    assert!(r2.residual > 0.1 * r2.gradient.peak_power);
}

#[test]
fn uniform_heidari_gradient_matches_finite_differences() {
    let p = heidari_outphase();
    let a = p.model.uniform_design(p.mass);
    let r = peak_power_grad(&p.model, &a, &p.load, &InteriorPoint::default())
        .unwrap()
        .with_fd_check(&p.model, &a, &p.load, 1e-6)
        .unwrap();
    assert!(!r.subgradient);
    assert!(r.fd_check.unwrap() <= 1e-4, "{:?}", r.fd_check);
    assert_eq!(r.adjoints.len(), 1);
}

#[test]
fn random_design_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let ip = InteriorPoint::default();
    let mf_model = heidari_model();
    let mf = multifreq_load(&mf_model, 3, MULTIFREQ_PERIOD, MULTIFREQ_DELAY).unwrap();
    let out = heidari_outphase();
    let mut checked = 0;
    while checked < 10 {
        let (model, load) = if checked % 2 == 0 { (&mf_model, &mf) } else { (&out.model, &out.load) };
        let a = random_feasible(model, load, &mut rng);
        let r = peak_power_grad(model, &a, load, &ip).unwrap();
        if r.subgradient {
            continue;
        }
        let r = r.with_fd_check(model, &a, load, 1e-6).unwrap();
        assert!(r.fd_check.unwrap() <= 1e-3, "{:?}", r.fd_check);
        checked += 1;
    }
}

#[test]
fn doubling_the_load_quadruples_the_gradient() {
    let p = heidari_outphase();
    let a = p.model.uniform_design(1.0);
    let g1 = peak_power_grad_direct(&p.model, &a, &p.load).unwrap().grad;
    let g2 = peak_power_grad_direct(&p.model, &a, &p.load.scaled(2.0)).unwrap().grad;
    let scale = g1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(g1.iter().zip(&g2).all(|(x, y)| (4.0 * x - y).abs() <= 1e-8 * 4.0 * scale));
}

#[test]
fn sdp_and_direct_gradients_agree() {
    let p = heidari_outphase();
    let a = p.model.uniform_design(1.0);
    let g1 = peak_power_grad(&p.model, &a, &p.load, &InteriorPoint::default()).unwrap();
    let g2 = peak_power_grad_direct(&p.model, &a, &p.load).unwrap();
    assert!(relative_deviation(&g1.grad, &g2.grad) < 1e-5);
    assert!((g1.peak_power - peak_power(&p.model, &a, &p.load).unwrap()).abs() < 1e-7 * g1.peak_power);
}

/// min aᵀγ + Γ(m − wᵀa) over γ, Γ ≥ 0 with ∇p − γ + Γw = 0, as a conic LP.
fn kkt_by_lp(grad: &[f64], a: &[f64], w: &[f64], m: f64) -> f64 {
    let n = grad.len();
    let mut p = ConicProblem::new("kkt");
    let g0 = p.add_block("gamma", n);
    let big = p.add_block("Gamma", 1);
    let wa: f64 = w.iter().zip(a).map(|(x, y)| x * y).sum();
    for i in 0..n {
        p.c[g0 + i] = a[i];
        p.add_eq(&[(g0 + i, 1.0), (big, -w[i])], grad[i]);
        p.add_nonneg(&[(g0 + i, -1.0)], 0.0);
    }
    p.c[big] = m - wa;
    p.add_nonneg(&[(big, -1.0)], 0.0);
    let r = InteriorPoint::default().solve(&p);
    assert!(r.status.is_usable());
    r.objective
}

#[test]
fn closed_form_kkt_matches_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let n = 6;
        let grad: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..0.5)).collect();
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let m = w.iter().zip(&a).map(|(x, y)| x * y).sum::<f64>() * rng.gen_range(1.0..1.5);
        let (r, _) = kkt_lp(&grad, &a, &w, m);
        let lp = kkt_by_lp(&grad, &a, &w, m);
        assert!((r - lp).abs() < 1e-6 * (1.0 + r.abs()), "{r} vs {lp}");
    }
}

#[test]
fn wrong_design_length_is_rejected() {
    let p = heidari_outphase();
    let r = peak_power_grad(&p.model, &[1.0; 3], &p.load, &InteriorPoint::default());
    assert_eq!(r, Err(SensitivityError::DimensionMismatch { expected: 21, got: 3 }));
}
