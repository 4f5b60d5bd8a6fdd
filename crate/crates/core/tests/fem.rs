use proptest::prelude::*;
use trusspp_core::analysis::{dynamic_min_eigenvalue, eigenfrequencies};
use trusspp_core::fem::*;
use trusspp_core::linalg::{sym_eigen, sym_eigenvalues, Mat};
use trusspp_core::presets::{cantilever_model, heidari_model};

fn bar(dx: f64, dy: f64) -> TrussModel {
    let gs = GroundStructure::new(vec![[0.0, 0.0], [dx, dy], [5.0, 5.0]], vec![(0, 1)], vec![4, 5]).unwrap();
    TrussModel::new(gs, 25000.0, 1.0).unwrap()
}

#[test]
fn full_grid_has_every_pair() {
    let gs = build_grid_ground_structure(7, 4, 1.0 / 3.0, Connectivity::Full, &Supports::LeftEdge).unwrap();
    assert_eq!(gs.nodes.len(), 28);
    assert_eq!(gs.elements.len(), 378);
    assert_eq!(gs.n_free(), 48);
}

#[test]
fn square_perimeter() {
    let gs = build_grid_ground_structure(2, 2, 1.0, Connectivity::Neighbors, &Supports::TopRow).unwrap();
    assert_eq!(gs.elements.len(), 4);
}

#[test]
fn heidari_counts() {
    let m = heidari_model();
    assert_eq!((m.gs.nodes.len(), m.n_elements()), (12, 21));
}

#[test]
fn invalid_inputs_are_rejected() {
    assert_eq!(build_grid_ground_structure(1, 3, 1.0, Connectivity::Full, &Supports::LeftEdge), Err(FemError::BadGrid));
    assert_eq!(build_grid_ground_structure(2, 2, 0.0, Connectivity::Full, &Supports::LeftEdge), Err(FemError::BadGrid));
    let gs = build_grid_ground_structure(2, 2, 1.0, Connectivity::Neighbors, &Supports::TopRow).unwrap();
    assert_eq!(TrussModel::new(gs.clone(), -1.0, 1.0).map(|_| ()), Err(FemError::BadMaterial));
    let m = TrussModel::new(gs, 1.0, 1.0).unwrap();
    assert!(matches!(m.assemble(&[1.0]), Err(FemError::DimensionMismatch { expected: 4, got: 1 })));
    let dup = GroundStructure::new(vec![[0.0, 0.0], [1.0, 0.0]], vec![(0, 1), (1, 0)], vec![0, 1]);
    assert!(dup.is_err());
}

#[test]
fn horizontal_bar_stiffness_eigenvalues() {
    let m = bar(1.0, 0.0);
    let k = m.elems[0].stiffness_seed(m.n_free());
    let e = sym_eigenvalues(&k);
    // E bᵀb / L with b = (−1, 0, 1, 0)
    assert!((e[3] - 50000.0).abs() < 1e-9);
    assert!(e[..3].iter().all(|v| v.abs() < 1e-9));
}

#[test]
fn diagonal_bar_stiffness_eigenvalue() {
    let m = bar(3.0, 4.0);
    let e = sym_eigenvalues(&m.elems[0].stiffness_seed(m.n_free()));
    assert!((e[3] - 2.0 * 25000.0 / 5.0).abs() < 1e-9);
}

#[test]
fn mass_trace_is_four_thirds_rho_l() {
    let m = cantilever_model();
    for e in m.elems.iter().step_by(17) {
        let t: f64 = (0..4).map(|i| e.m_local[i][i]).sum();
        assert!((t - 4.0 / 3.0 * e.weight).abs() < 1e-12);
    }
}

#[test]
fn lumped_mass_is_diagonal_with_same_total() {
    let gs = heidari_model().gs;
    let c = TrussModel::new(gs.clone(), 25000.0, 1.0).unwrap();
    let l = TrussModel::with_mass_convention(gs, 25000.0, 1.0, MassConvention::Lumped).unwrap();
    for (ec, el) in c.elems.iter().zip(&l.elems) {
        // rigid translation in x carries ρL either way
        let sum = |m: &[[f64; 4]; 4]| m[0][0] + m[0][2] + m[2][0] + m[2][2];
        assert!((sum(&ec.m_local) - ec.weight).abs() < 1e-12);
        assert!((sum(&el.m_local) - el.weight).abs() < 1e-12);
        assert_eq!(el.m_local[0][2], 0.0);
        assert_eq!(ec.k_local, el.k_local);
    }
}

#[test]
fn lumped_mass_lowers_the_first_eigenfrequency() {
    // consistent mass bounds the frequencies from above
    let gs = heidari_model().gs;
    let c = TrussModel::new(gs.clone(), 25000.0, 1.0).unwrap();
    let l = TrussModel::with_mass_convention(gs, 25000.0, 1.0, MassConvention::Lumped).unwrap();
    let a = c.uniform_design(1.0);
    let wc = eigenfrequencies(&c, &a, 1).unwrap()[0];
    let wl = eigenfrequencies(&l, &a, 1).unwrap()[0];
    assert!(wl < wc, "{wl} vs {wc}");
}

#[test]
fn zero_design_gives_zero_matrices() {
    let m = heidari_model();
    let (mm, kk) = m.assemble(&[0.0; 21]).unwrap();
    assert_eq!(mm.norm(), 0.0);
    assert_eq!(kk.norm(), 0.0);
}

#[test]
fn unit_area_selects_one_element() {
    let m = heidari_model();
    let mut a = vec![0.0; 21];
    a[7] = 1.0;
    let (mm, kk) = m.assemble(&a).unwrap();
    assert_eq!(kk, m.elems[7].stiffness_seed(m.n_free()));
    assert_eq!(mm, m.elems[7].mass_seed(m.n_free()));
}

#[test]
fn dynamic_stiffness_at_zero_is_stiffness() {
    let m = heidari_model();
    let a = m.uniform_design(1.0);
    let (_, k) = m.assemble(&a).unwrap();
    assert_eq!(m.dynamic_stiffness(&a, 0.0).unwrap(), k);
}

#[test]
fn dynamic_stiffness_loses_definiteness_above_first_eigenfrequency() {
    let m = heidari_model();
    let a = m.uniform_design(1.0);
    let w1 = eigenfrequencies(&m, &a, 1).unwrap()[0];
    assert!(dynamic_min_eigenvalue(&m, &a, 0.99 * w1).unwrap() > -1e-8);
    assert!(dynamic_min_eigenvalue(&m, &a, 1.01 * w1).unwrap() < 0.0);
    assert!(dynamic_min_eigenvalue(&m, &a, 10.0 * w1).unwrap() < 0.0);
    // K_λ at the eigenfrequency has a (numerically) zero eigenvalue
    let k = m.dynamic_stiffness(&a, w1).unwrap();
    let e = sym_eigenvalues(&k);
    let smallest = e.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    assert!(smallest < 1e-9 * k.norm());
}

fn design(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0..2.0f64], n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn assembly_is_linear(a in design(21), b in design(21), al in -2.0..2.0f64, be in -2.0..2.0f64) {
        let m = heidari_model();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| al * x + be * y).collect();
        let (ma, ka) = m.assemble(&a).unwrap();
        let (mb, kb) = m.assemble(&b).unwrap();
        let (mm, km) = m.assemble(&mix).unwrap();
        let scale = 1.0 + ka.norm() + kb.norm();
        prop_assert!((km - (ka * al + kb * be)).amax() <= 1e-12 * scale);
        prop_assert!((mm - (ma * al + mb * be)).amax() <= 1e-12 * (1.0 + scale));
    }

    #[test]
    fn assembled_matrices_are_psd(a in design(21)) {
        let m = heidari_model();
        let (mm, kk) = m.assemble(&a).unwrap();
        prop_assert_eq!(kk.nrows(), m.n_free());
        prop_assert!(sym_eigenvalues(&kk)[0] >= -1e-10 * kk.norm().max(1.0));
        prop_assert!(sym_eigenvalues(&mm)[0] >= -1e-10 * mm.norm().max(1.0));
        prop_assert!((&kk - kk.transpose()).amax() == 0.0);
    }

    #[test]
    fn mass_kernel_inside_stiffness_kernel(a in design(21)) {
        let m = heidari_model();
        let (mm, kk) = m.assemble(&a).unwrap();
        let (vals, vecs): (Vec<f64>, Mat) = sym_eigen(&mm);
        let mnorm = mm.norm();
        for (i, v) in vals.iter().enumerate() {
            if *v <= 1e-10 * mnorm {
                let w = vecs.column(i);
                prop_assert!((&kk * w).norm() <= 1e-8 * kk.norm().max(1e-300));
            }
        }
    }
}
