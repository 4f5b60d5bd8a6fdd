use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trusspp_core::analysis::*;
use trusspp_core::fem::{GroundStructure, TrussModel};
use trusspp_core::linalg::{c, range_basis, to_complex, CMat};
use trusspp_core::loads::HarmonicLoad;
use trusspp_core::presets::*;
use trusspp_core::sdp::{build_f, build_penalized_relaxation};
use trusspp_core::solver::InteriorPoint;

/// Bar along x with only the tip x-displacement free.
fn axial_bar(len: f64) -> TrussModel {
    let gs = GroundStructure::new(vec![[0.0, 0.0], [len, 0.0]], vec![(0, 1)], vec![0, 1, 3]).unwrap();
    TrussModel::new(gs, E_MOD, RHO).unwrap()
}

fn multifreq(n: usize) -> (TrussModel, HarmonicLoad) {
    let model = heidari_model();
    let load = multifreq_load(&model, n, MULTIFREQ_PERIOD, MULTIFREQ_DELAY).unwrap();
    (model, load)
}

/// Random positive areas at unit mass whose K_{Nω} stays positive semidefinite.
fn random_feasible(model: &TrussModel, load: &HarmonicLoad, rng: &mut ChaCha8Rng, sparse: bool) -> Vec<f64> {
    let top = load.n_harm() as f64 * load.omega0;
    loop {
        let a: Vec<f64> = (0..model.n_elements())
            .map(|_| if sparse && rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(0.1..2.0) })
            .collect();
        let s = 1.0 / model.mass(&a);
        let a: Vec<f64> = a.iter().map(|v| v * s).collect();
        if solve_equilibrium(model, &a, load).is_ok() && dynamic_min_eigenvalue(model, &a, top).unwrap() > -1e-10 {
            return a;
        }
    }
}

#[test]
fn single_bar_closed_form() {
    let model = axial_bar(2.0);
    let (a, w, f) = (0.7, 15.0, c(0.3, -0.2));
    let load = HarmonicLoad::from_entries(&model.gs, w, 1, &[(1, 2, f)]).unwrap();
    let ss = solve_equilibrium(&model, &[a], &load).unwrap();
    let k = E_MOD * a / 2.0;
    let m = RHO * a * 2.0 / 3.0;
    let want = c(0.0, w) * f / (k - w * w * m);
    assert!((ss.coeffs[0][0] - want).norm() < 1e-14 * want.norm());
}

#[test]
fn empty_design_does_not_carry() {
    let p = heidari_outphase();
    let r = solve_equilibrium(&p.model, &[0.0; 21], &p.load);
    assert!(matches!(r, Err(AnalysisError::NotCarried { harmonic: 1, .. })));
    assert!(peak_power(&p.model, &[0.0; 21], &p.load).is_err());
}

#[test]
fn uniform_heidari_residuals() {
    let p = heidari_outphase();
    let a = p.model.uniform_design(p.mass);
    let ss = solve_equilibrium(&p.model, &a, &p.load).unwrap();
    assert!(ss.residuals.iter().all(|r| *r <= 1e-10), "{:?}", ss.residuals);
}

#[test]
fn zero_load_has_zero_power() {
    let m = heidari_model();
    let load = HarmonicLoad::zeros(OMEGA, 2, m.n_free()).unwrap();
    assert_eq!(peak_power(&m, &m.uniform_design(1.0), &load).unwrap(), 0.0);
}

#[test]
fn oracle_agreement_on_random_designs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (model, load) = multifreq(3);
    let out = heidari_outphase();
    for i in 0..20 {
        let (model, load) = if i % 2 == 0 { (&model, &load) } else { (&out.model, &out.load) };
        let a = random_feasible(model, load, &mut rng, false);
        let ss = solve_equilibrium(model, &a, load).unwrap();
        let exact = peak_power(model, &a, load).unwrap();
        let sampled = peak_power_time_sampled(load, &ss, 1 << 16);
        assert!((exact - sampled).abs() <= 1e-6 * exact, "{exact} vs {sampled}");
    }
}

#[test]
fn power_trace_matches_instant_power() {
    let p = heidari_outphase();
    let a = p.model.uniform_design(1.0);
    let ss = solve_equilibrium(&p.model, &a, &p.load).unwrap();
    let tr = power_trace(&p.load, &ss, 64);
    assert_eq!(tr.len(), 64);
    let peak = tr.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    assert!(peak <= peak_power(&p.model, &a, &p.load).unwrap() * (1.0 + 1e-12));
}

#[test]
fn eigenfrequency_brackets_definiteness() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = heidari_model();
    for _ in 0..10 {
        let a: Vec<f64> = (0..21).map(|_| rng.gen_range(0.05..1.0)).collect();
        let w1 = eigenfrequencies(&m, &a, 1).unwrap()[0];
        assert!(dynamic_min_eigenvalue(&m, &a, 0.99 * w1).unwrap() >= -1e-8);
        assert!(dynamic_min_eigenvalue(&m, &a, 1.01 * w1).unwrap() < -1e-8);
    }
}

#[test]
fn eigenfrequencies_ascend_and_ignore_massless_directions() {
    let m = heidari_model();
    let mut a = m.uniform_design(1.0);
    a[0] = 0.0;
    a[1] = 0.0;
    let w = eigenfrequencies(&m, &a, 3).unwrap();
    assert!(w[0] > 0.0 && w[0] <= w[1] && w[1] <= w[2]);
    assert_eq!(eigenfrequencies(&m, &[0.0; 21], 3), Err(AnalysisError::Massless));
}

#[test]
fn ranges_of_dynamic_stiffnesses_coincide() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (model, load) = multifreq(3);
    for _ in 0..10 {
        let a = random_feasible(&model, &load, &mut rng, true);
        let bases: Vec<_> = (1..=3)
            .map(|k| range_basis(&model.dynamic_stiffness(&a, k as f64 * load.omega0).unwrap(), 1e-10))
            .collect();
        for (i, bi) in bases.iter().enumerate() {
            for bj in &bases[i + 1..] {
                assert_eq!(bi.ncols(), bj.ncols());
                // columns of one basis projected onto the other
                let res = bj - bi * (bi.transpose() * bj);
                assert!(res.amax() <= 1e-8, "{}", res.amax());
            }
        }
    }
}

#[test]
fn physical_gram_has_zero_trace_gap() {
    let (model, load) = multifreq(3);
    let a = model.uniform_design(1.0);
    let f = build_f(&load);
    let x = physical_gram(&model, &a, &f, load.omega0).unwrap();
    assert!(trace_gap(&x, &a, &f, &model, load.omega0).unwrap().abs() < 1e-12 * x.trace().norm());
    let bumped = &x + CMat::identity(x.nrows(), x.ncols());
    assert!((trace_gap(&bumped, &a, &f, &model, load.omega0).unwrap() - x.nrows() as f64).abs() < 1e-9);
}

#[test]
fn physical_gram_single_harmonic_entry() {
    // N = 1: the columns are (iωc₁, c₀ = 0, c₋₁)
    let p = heidari_outphase();
    let a = p.model.uniform_design(1.0);
    let f = build_f(&p.load);
    let g = physical_gram(&p.model, &a, &f, p.load.omega0).unwrap();
    let kd = p.model.dynamic_stiffness(&a, p.load.omega0).unwrap();
    let cf = &p.load.coeffs[0];
    let sol = to_complex(&kd.clone().lu().solve(&cf.map(|z| z.re)).unwrap())
        + to_complex(&kd.lu().solve(&cf.map(|z| z.im)).unwrap()) * c(0.0, 1.0);
    let want = cf.dotc(&sol);
    let w = p.load.omega0;
    assert!((g[(0, 0)] - want * w * w).norm() < 1e-10 * w * w * want.norm());
    assert_eq!(g[(1, 1)], c(0.0, 0.0));
    assert!((g[(2, 2)] - want.conj()).norm() < 1e-10 * want.norm());
}

#[test]
fn mass_utilization_of_uniform_design() {
    let m = cantilever_model();
    let a = m.uniform_design(MASS);
    assert!((mass_utilization(&m, &a, MASS) - 1.0).abs() < 1e-12);
    assert!((mass(&m, &a) - MASS).abs() < 1e-12);
    let half: Vec<f64> = a.iter().map(|v| v / 2.0).collect();
    assert!((mass_utilization(&m, &half, 2.0) - 0.25).abs() < 1e-12);
}

#[test]
fn pruning() {
    let a = [1.0, 1e-7, 0.5, 0.0];
    assert_eq!(prune(&a, 1e-6), vec![1.0, 0.0, 0.5, 0.0]);
    assert_eq!(active_count(&a, 1e-6), 2);
}

#[test]
fn relaxation_certificate_bounds_the_oracle() {
    let p = heidari_outphase();
    let relax = build_penalized_relaxation(&p.model, &p.load, p.mass, 10.0).unwrap();
    let sol = relax.solve(&InteriorPoint::default());
    assert!(sol.status.is_usable(), "{:?}", sol.status);
    let gap = trace_gap(&sol.x, &sol.a, &relax.f, &p.model, p.load.omega0).unwrap();
    assert!(gap >= -1e-8 && gap <= 1e-5 * sol.x.trace().re, "{gap}");
    let pp = peak_power(&p.model, &sol.a, &p.load).unwrap();
    assert!(sol.theta >= pp - 1e-6, "θ {} pp {}", sol.theta, pp);
    assert!(mass_utilization(&p.model, &sol.a, p.mass) > 0.99);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn power_is_quadratic_in_load(s in 0.1..5.0f64, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (model, load) = multifreq(3);
        let a = random_feasible(&model, &load, &mut rng, false);
        let p1 = peak_power(&model, &a, &load).unwrap();
        let p2 = peak_power(&model, &a, &load.scaled(s)).unwrap();
        prop_assert!((p2 - s * s * p1).abs() <= 1e-10 * p2);
    }

    #[test]
    fn steady_state_satisfies_equilibrium(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (model, load) = multifreq(3);
        let a = random_feasible(&model, &load, &mut rng, true);
        let ss = solve_equilibrium(&model, &a, &load).unwrap();
        for (k, r) in ss.residuals.iter().enumerate() {
            let w = (k + 1) as f64 * load.omega0;
            let kn = model.dynamic_stiffness(&a, w).unwrap().norm();
            let bound = 1e-8 * (kn * ss.coeffs[k].norm() + w * load.coeffs[k].norm());
            prop_assert!(*r <= bound, "{} > {}", r, bound);
        }
    }
}
