//! Steady-state response, instant power, eigenfrequencies and design statistics.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

#[allow(unused_imports)] // inherent on f64 whenever std is linked
use num_traits::Float;

use crate::fem::{FemError, TrussModel};
use crate::linalg::{c, cdot_t, min_eigenvalue, projected_generalized_eigenvalues, CMat, CVec, SymPinv, RANK_TOL};
use crate::loads::HarmonicLoad;
use crate::sdp::FMatrix;
use crate::trigpoly::{max_abs_on_circle_arg, TrigPoly};

/// Relative range residual above which a load is reported as not carried.
pub const RANGE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum AnalysisError {
    NotCarried { harmonic: usize, residual: f64 },
    Fem(FemError),
    Massless,
    LoadSize { expected: usize, got: usize },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::NotCarried { harmonic, residual } => write!(
                f,
                "harmonic {harmonic} of the load is not carried (relative range residual {residual:.3e})"
            ),
            AnalysisError::Fem(e) => write!(f, "{e}"),
            AnalysisError::Massless => write!(f, "mass matrix is numerically zero"),
            AnalysisError::LoadSize { expected, got } => {
                write!(f, "load acts on {got} dofs, model has {expected}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AnalysisError {}

impl From<FemError> for AnalysisError {
    fn from(e: FemError) -> Self {
        AnalysisError::Fem(e)
    }
}

/// Velocity Fourier coefficients c_k(v), k = 1..N, of the periodic steady state.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState {
    pub omega0: f64,
    pub coeffs: Vec<CVec>,
    /// ‖K_{kω} c_k(v) − ikω c_k(f)‖ per harmonic.
    pub residuals: Vec<f64>,
}

impl SteadyState {
    pub fn coeff(&self, k: i64) -> CVec {
        let n = self.coeffs.len() as i64;
        let nf = self.coeffs[0].len();
        if k == 0 || k.abs() > n {
            CVec::zeros(nf)
        } else if k > 0 {
            self.coeffs[(k - 1) as usize].clone()
        } else {
            self.coeffs[(-k - 1) as usize].map(|z| z.conj())
        }
    }

    pub fn eval_time(&self, t: f64) -> crate::linalg::Vector {
        let mut out = crate::linalg::Vector::zeros(self.coeffs[0].len());
        for (k, ck) in self.coeffs.iter().enumerate() {
            let ph = num_complex::Complex64::from_polar(1.0, (k + 1) as f64 * self.omega0 * t);
            for i in 0..out.len() {
                out[i] += 2.0 * (ck[i] * ph).re;
            }
        }
        out
    }
}

fn check_load(model: &TrussModel, load: &HarmonicLoad) -> Result<(), AnalysisError> {
    if load.n_free() != model.n_free() {
        return Err(AnalysisError::LoadSize { expected: model.n_free(), got: load.n_free() });
    }
    Ok(())
}

/// Pseudo-inverses of K_{kω}(a) for k = 1..N.
pub fn dynamic_pinvs(model: &TrussModel, a: &[f64], omega0: f64, n_harm: usize) -> Result<Vec<SymPinv>, AnalysisError> {
    let (m, k) = model.assemble(a)?;
    Ok((1..=n_harm)
        .map(|h| {
            let l = h as f64 * omega0;
            SymPinv::with_tol(&(&k - &m * (l * l)), RANK_TOL)
        })
        .collect())
}

/// c_k(v) = ikω K_{kω}(a)† c_k(f), or NotCarried when c_k(f) leaves the numerical range.
pub fn solve_equilibrium(model: &TrussModel, a: &[f64], load: &HarmonicLoad) -> Result<SteadyState, AnalysisError> {
    check_load(model, load)?;
    let pinvs = dynamic_pinvs(model, a, load.omega0, load.n_harm())?;
    let (m, k) = model.assemble(a)?;
    let mut coeffs = Vec::with_capacity(load.n_harm());
    let mut residuals = Vec::with_capacity(load.n_harm());
    for (h, (p, cf)) in pinvs.iter().zip(&load.coeffs).enumerate() {
        let kw = (h + 1) as f64 * load.omega0;
        let norm = cf.norm();
        if norm > 0.0 {
            let r = p.range_residual(cf) / norm;
            if r > RANGE_TOL {
                return Err(AnalysisError::NotCarried { harmonic: h + 1, residual: r });
            }
        }
        let rhs = cf * c(0.0, kw);
        let v = p.apply_c(&rhs);
        let kd = (&k - &m * (kw * kw)).map(|x| c(x, 0.0));
        residuals.push((kd * &v - rhs).norm());
        coeffs.push(v);
    }
    Ok(SteadyState { omega0: load.omega0, coeffs, residuals })
}

/// Power polynomial q_k = Σ_n c_{k−n}(f)ᵀ c_n(v), k = 0..2N, with q_0 = 0.
pub fn power_poly(load: &HarmonicLoad, ss: &SteadyState) -> TrigPoly {
    let n = load.n_harm() as i64;
    let mut q = Vec::with_capacity(2 * n as usize + 1);
    q.push(c(0.0, 0.0));
    for k in 1..=2 * n {
        let mut s = c(0.0, 0.0);
        for m in -n..=n {
            if m == 0 || (k - m).abs() > n || k == m {
                continue;
            }
            s += cdot_t(&load.coeff(k - m), &ss.coeff(m));
        }
        q.push(s);
    }
    TrigPoly::new(q)
}

/// max_t |f(t)ᵀ v(t)| from the power polynomial.
pub fn peak_power(model: &TrussModel, a: &[f64], load: &HarmonicLoad) -> Result<f64, AnalysisError> {
    let ss = solve_equilibrium(model, a, load)?;
    Ok(max_abs_on_circle_arg(&power_poly(load, &ss)).0)
}

/// Instant power f(t)ᵀv(t).
pub fn instant_power(load: &HarmonicLoad, ss: &SteadyState, t: f64) -> f64 {
    load.eval_time(t).dot(&ss.eval_time(t))
}

/// (t, p(t)) at `samples` equispaced points of one period.
pub fn power_trace(load: &HarmonicLoad, ss: &SteadyState, samples: usize) -> Vec<(f64, f64)> {
    let period = 2.0 * PI / load.omega0;
    (0..samples)
        .map(|i| {
            let t = period * i as f64 / samples as f64;
            (t, instant_power(load, ss, t))
        })
        .collect()
}

/// Time-domain peak power: dense sampling of |f(t)ᵀv(t)| plus local refinement.
pub fn peak_power_time_sampled(load: &HarmonicLoad, ss: &SteadyState, samples: usize) -> f64 {
    let period = 2.0 * PI / load.omega0;
    let h = period / samples as f64;
    let f = |t: f64| instant_power(load, ss, t).abs();
    let mut best = (0.0f64, 0.0f64);
    for i in 0..samples {
        let t = i as f64 * h;
        let v = f(t);
        if v > best.0 {
            best = (v, t);
        }
    }
    // ternary refinement on the bracketing interval
    let (mut lo, mut hi) = (best.1 - h, best.1 + h);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    best.0.max(f(0.5 * (lo + hi)))
}

/// √λ of the `count` smallest well-defined eigenvalues of K w = λ M w.
pub fn eigenfrequencies(model: &TrussModel, a: &[f64], count: usize) -> Result<Vec<f64>, AnalysisError> {
    let (m, k) = model.assemble(a)?;
    let vals = projected_generalized_eigenvalues(&k, &m).ok_or(AnalysisError::Massless)?;
    Ok(vals.iter().take(count).map(|v| v.max(0.0).sqrt()).collect())
}

/// Smallest eigenvalue of K_λ(a) relative to ‖K(a)‖.
pub fn dynamic_min_eigenvalue(model: &TrussModel, a: &[f64], lambda: f64) -> Result<f64, AnalysisError> {
    let (m, k) = model.assemble(a)?;
    let scale = k.norm().max(1e-300);
    Ok(min_eigenvalue(&(&k - &m * (lambda * lambda))) / scale)
}

/// F* L(a)† F with L = blockdiag(K_ω, …, K_{Nω}).
pub fn physical_gram(model: &TrussModel, a: &[f64], f: &FMatrix, omega0: f64) -> Result<CMat, AnalysisError> {
    let pinvs = dynamic_pinvs(model, a, omega0, f.n_harm)?;
    let nf = f.n_free;
    let cols = f.cols.ncols();
    let mut out = CMat::zeros(cols, cols);
    for (h, p) in pinvs.iter().enumerate() {
        let blk = f.cols.rows(h * nf, nf).into_owned();
        let mut sol = CMat::zeros(nf, cols);
        for j in 0..cols {
            sol.set_column(j, &p.apply_c(&blk.column(j).into_owned()));
        }
        out += blk.adjoint() * sol;
    }
    Ok(out)
}

/// tr{X − F* L(a)† F}.
pub fn trace_gap(x: &CMat, a: &[f64], f: &FMatrix, model: &TrussModel, omega0: f64) -> Result<f64, AnalysisError> {
    let g = physical_gram(model, a, f, omega0)?;
    Ok((x.trace() - g.trace()).re)
}

pub fn mass(model: &TrussModel, a: &[f64]) -> f64 {
    model.mass(a)
}

pub fn mass_utilization(model: &TrussModel, a: &[f64], m: f64) -> f64 {
    model.mass(a) / m
}

/// Areas below `rel`·max(a) set to zero.
pub fn prune(a: &[f64], rel: f64) -> Vec<f64> {
    let amax = a.iter().fold(0.0f64, |m, v| m.max(*v));
    a.iter().map(|&v| if v > rel * amax { v } else { 0.0 }).collect()
}

pub fn active_count(a: &[f64], rel: f64) -> usize {
    let amax = a.iter().fold(0.0f64, |m, v| m.max(*v));
    a.iter().filter(|&&v| v > rel * amax).count()
}
