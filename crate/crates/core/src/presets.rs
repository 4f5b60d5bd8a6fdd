//! The benchmark problems: the 21-bar Heidari truss under single-harmonic,
//! two-rotation and square-wave loads, and the 4×7 full-connectivity cantilever.
//! All use E = 25000 and ρ = 1; the mass bound is 1 except for the cantilever (10).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use crate::fem::{build_grid_ground_structure, Connectivity, GroundStructure, Supports, TrussModel};
use crate::linalg::{c, Vector};
use crate::loads::{harmonic_base, rotating_load, square_wave_load, HarmonicLoad, LoadError};

pub const E_MOD: f64 = 25000.0;
pub const RHO: f64 = 1.0;
pub const MASS: f64 = 1.0;
pub const CANTILEVER_MASS: f64 = 10.0;
pub const OMEGA: f64 = 15.0;
pub const ETA: f64 = 10.0;

/// Names accepted by [`preset`].
pub const NAMES: [&str; 4] = ["heidari-inphase-fr", "heidari-inphase-fi", "heidari-outphase", "cantilever"];

#[derive(Clone, Debug)]
pub struct Preset {
    pub name: String,
    pub model: TrussModel,
    pub load: HarmonicLoad,
    pub mass: f64,
    pub eta: f64,
}

/// 4×3 nodes, top row clamped; 9 horizontal and 8 vertical bars plus two crossed
/// diagonals in the bottom middle panel and one diagonal in each top outer panel.
pub fn heidari_ground_structure() -> GroundStructure {
    let (nx, ny) = (4, 3);
    let mut nodes = Vec::with_capacity(nx * ny);
    for row in 0..ny {
        for col in 0..nx {
            nodes.push([col as f64, (ny - 1 - row) as f64]);
        }
    }
    // (x, y) with y = 0 at the bottom
    let id = |x: usize, y: usize| (ny - 1 - y) * nx + x;
    let mut el = Vec::with_capacity(21);
    for y in 0..ny {
        for x in 0..nx - 1 {
            el.push((id(x, y), id(x + 1, y)));
        }
    }
    for y in 0..ny - 1 {
        for x in 0..nx {
            el.push((id(x, y), id(x, y + 1)));
        }
    }
    el.extend([(id(1, 0), id(2, 1)), (id(2, 0), id(1, 1)), (id(0, 1), id(1, 2)), (id(3, 1), id(2, 2))]);
    GroundStructure::new(nodes, el, (0..2 * nx).collect()).expect("valid ground structure")
}

pub fn heidari_model() -> TrussModel {
    TrussModel::new(heidari_ground_structure(), E_MOD, RHO).expect("valid material")
}

/// In-phase and quadrature parts (f_R, f_I) of the two bottom-right forces of
/// magnitude 1/2: c₁ ends with (i/4, 1/4, −i/4, 1/4).
pub fn heidari_real_imag(model: &TrussModel) -> (Vector, Vector) {
    let nf = model.n_free();
    let mut fr = Vector::zeros(nf);
    let mut fi = Vector::zeros(nf);
    fr[nf - 3] = 0.5;
    fr[nf - 1] = 0.5;
    fi[nf - 4] = -0.5;
    fi[nf - 2] = 0.5;
    (fr, fi)
}

pub fn heidari_outphase() -> Preset {
    let model = heidari_model();
    let (fr, fi) = heidari_real_imag(&model);
    let load = HarmonicLoad::from_real_imag(OMEGA, &fr, &fi).expect("matching lengths");
    Preset { name: "heidari-outphase".into(), model, load, mass: MASS, eta: ETA }
}

pub fn heidari_inphase_fr() -> Preset {
    let model = heidari_model();
    let (fr, _) = heidari_real_imag(&model);
    let load = HarmonicLoad::from_real_imag(OMEGA, &fr, &Vector::zeros(fr.len())).expect("matching lengths");
    Preset { name: "heidari-inphase-fr".into(), model, load, mass: MASS, eta: ETA }
}

pub fn heidari_inphase_fi() -> Preset {
    let model = heidari_model();
    let (_, fi) = heidari_real_imag(&model);
    let load = HarmonicLoad::from_real_imag(OMEGA, &Vector::zeros(fi.len()), &fi).expect("matching lengths");
    Preset { name: "heidari-inphase-fi".into(), model, load, mass: MASS, eta: ETA }
}

pub fn cantilever_model() -> TrussModel {
    let gs = build_grid_ground_structure(7, 4, 1.0 / 3.0, Connectivity::Full, &Supports::LeftEdge)
        .expect("valid grid");
    TrussModel::new(gs, E_MOD, RHO).expect("valid material")
}

/// Unit-norm rotating force at the upper right corner: c₁ = −(i, 1)/√2 on its (x, y).
pub fn cantilever() -> Preset {
    let model = cantilever_model();
    let corner = 6;
    let s = FRAC_1_SQRT_2;
    let load = HarmonicLoad::from_entries(
        &model.gs,
        OMEGA,
        1,
        &[(1, 2 * corner, c(0.0, -s)), (1, 2 * corner + 1, c(-s, 0.0))],
    )
    .expect("corner is free");
    Preset { name: "cantilever".into(), model, load, mass: CANTILEVER_MASS, eta: ETA }
}

pub fn preset(name: &str) -> Option<Preset> {
    match name {
        "heidari-inphase-fr" => Some(heidari_inphase_fr()),
        "heidari-inphase-fi" => Some(heidari_inphase_fi()),
        "heidari-outphase" => Some(heidari_outphase()),
        "cantilever" => Some(cantilever()),
        _ => None,
    }
}

/// Largest harmonic index accepted for the slower rotation; beyond this the
/// lifted problem is too large to be useful.
pub const MAX_ROTATION_HARMONIC: u64 = 64;

/// Two forces of magnitude 1/2 rotating at ω₁ and ω₂ on the two bottom-right nodes.
/// Returns the load on the common base frequency together with (ω₀, n₁, n₂).
pub fn two_rotation_load(
    model: &TrussModel,
    omega1: f64,
    omega2: f64,
    phi1: f64,
    phi2: f64,
) -> Result<(HarmonicLoad, f64, usize, usize), LoadError> {
    let (w0, n1, n2) = harmonic_base(omega1, omega2, MAX_ROTATION_HARMONIC, 1e-9)?;
    let nn = model.gs.nodes.len();
    let n = n1.max(n2);
    let l1 = rotating_load(&model.gs, nn - 2, 0.5, n1, phi1, w0, n)?;
    let l2 = rotating_load(&model.gs, nn - 1, 0.5, n2, phi2, w0, n)?;
    Ok((l1.add(&l2)?, w0, n1, n2))
}

/// Phases used in the rotating-load experiment.
pub const TWO_ROTATION_PHASES: (f64, f64) = (FRAC_PI_2, -FRAC_PI_2);

/// (ω₁, ω₂) of the rotating-load table; ω₂ = 15 throughout.
pub const TWO_ROTATION_CASES: [(f64, f64); 4] = [(7.5, 15.0), (10.0, 15.0), (12.5, 15.0), (13.125, 15.0)];

/// Unit square wave on x of the second-to-last node and its copy delayed by `delay`
/// on x of the last node, truncated to `n` harmonics.
pub fn multifreq_load(model: &TrussModel, n: usize, period: f64, delay: f64) -> Result<HarmonicLoad, LoadError> {
    let nn = model.gs.nodes.len();
    let f1 = square_wave_load(&model.gs, nn - 2, 0, period, n, 0.0)?;
    let f2 = square_wave_load(&model.gs, nn - 1, 0, period, n, delay)?;
    f1.add(&f2)
}

pub const MULTIFREQ_PERIOD: f64 = 2.0;
pub const MULTIFREQ_DELAY: f64 = 0.2;
pub const MULTIFREQ_EVAL: [usize; 3] = [3, 5, 31];

/// Every named preset, in the order of [`NAMES`].
pub fn all() -> Vec<Preset> {
    vec![heidari_inphase_fr(), heidari_inphase_fi(), heidari_outphase(), cantilever()]
}
