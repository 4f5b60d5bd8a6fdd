//! Adjoint gradient of the peak power with respect to the areas, and the
//! KKT-residual optimality indicator.
//!
//! The peak power is p(a) = 𝒫(q(a)) with 𝒫 the optimal value of the inner SOS
//! program and q(a) the power polynomial. ∂𝒫/∂q_k comes from the equality duals
//! of the inner program; the chain through q_k = Σ_n c_{k−n}(f)ᵀ c_n(v) is
//! closed with one adjoint solve per harmonic.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent on f64 whenever std is linked
use num_traits::Float;

use crate::analysis::{dynamic_pinvs, peak_power, power_poly, solve_equilibrium, AnalysisError};
use crate::fem::{ElementData, TrussModel};
use crate::linalg::{c, sym_eigen, CVec, Mat, SymPinv};
use crate::loads::HarmonicLoad;
use crate::sdp::build_peak_power_sdp;
use crate::solver::ConicBackend;
use crate::trigpoly::{local_maxima_abs, TrigPoly};

/// Two maxima of |q| closer than this (relative) make the peak power nonsmooth.
pub const KINK_TOL: f64 = 1e-6;

/// Squared projection above which an element counts as touching the kernel.
const KERNEL_TOUCH: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum SensitivityError {
    Analysis(AnalysisError),
    /// The inner program is always feasible, so any failure is the backend's.
    Backend(crate::solver::SolveStatus),
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for SensitivityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SensitivityError::Analysis(e) => write!(f, "{e}"),
            SensitivityError::Backend(s) => write!(f, "inner peak-power program ended with status {s:?}"),
            SensitivityError::DimensionMismatch { expected, got } => {
                write!(f, "expected {expected} areas, got {got}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SensitivityError {}

impl From<AnalysisError> for SensitivityError {
    fn from(e: AnalysisError) -> Self {
        SensitivityError::Analysis(e)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GradientReport {
    pub peak_power: f64,
    /// ∂p/∂a_j.
    pub grad: Vec<f64>,
    /// ∂𝒫/∂Re q_k + i ∂𝒫/∂Im q_k, k = 0..=2N.
    pub inner_value_grads: Vec<Complex64>,
    /// λ_n for n = 1..=N; λ_{−n} is the conjugate.
    pub adjoints: Vec<Vec<Complex64>>,
    /// Set when |q| attains its maximum at more than one angle; grad is then one subgradient.
    pub subgradient: bool,
    /// Max relative ∞-norm deviation from central finite differences, when checked.
    pub fd_check: Option<f64>,
}

/// Optimal value 𝒫(q) of min θ s.t. θ ± q SOS, and its gradient from the equality duals.
pub fn inner_value_grad(q: &TrigPoly, backend: &dyn ConicBackend) -> Result<(f64, Vec<Complex64>), SensitivityError> {
    let scale = q.max_abs_coeff();
    if scale == 0.0 {
        return Ok((0.0, vec![c(0.0, 0.0); q.degree() + 1]));
    }
    // 𝒫 is positively homogeneous, so the gradient is unchanged by normalization
    let unit = TrigPoly::new(q.coeffs.iter().map(|v| v / scale).collect());
    let sdp = build_peak_power_sdp(&unit);
    let rep = backend.solve(&sdp.problem);
    if !rep.status.is_usable() {
        return Err(SensitivityError::Backend(rep.status));
    }
    Ok((rep.x[sdp.theta] * scale, sdp.value_gradient(&rep)))
}

/// max|q| and its gradient in q at every maximizing angle within KINK_TOL of the top.
pub fn max_abs_gradients(q: &TrigPoly) -> (f64, Vec<Vec<Complex64>>) {
    let maxima = local_maxima_abs(q);
    let Some(&(v, _)) = maxima.first() else {
        return (0.0, vec![vec![c(0.0, 0.0); q.degree() + 1]]);
    };
    let grads = maxima.iter().take_while(|&&(v2, _)| v - v2 <= KINK_TOL * v).map(|&(_, t)| angle_gradient(q, t)).collect();
    (v, grads)
}

fn angle_gradient(q: &TrigPoly, t: f64) -> Vec<Complex64> {
    let sign = q.eval_angle(t).signum();
    let mut g = vec![c(sign, 0.0)];
    for k in 1..=q.degree() {
        let kt = k as f64 * t;
        g.push(c(2.0 * sign * kt.cos(), -2.0 * sign * kt.sin()));
    }
    g
}

/// uᵀ S_e v with S_e = K_e − λ²M_e condensed over the kernel directions of
/// K_λ(a) that the element touches. Without such directions S_e is the element
/// matrix itself; with them, growing the bar brings new DOFs into the range and
/// the one-sided derivative sees only the Schur complement.
fn element_form(e: &ElementData, lambda: f64, u: &CVec, v: &CVec, kernel: &Mat) -> Complex64 {
    let l2 = lambda * lambda;
    let mut d = Mat::zeros(4, 4);
    let mut ul = CVec::zeros(4);
    let mut vl = CVec::zeros(4);
    let mut zl = Mat::zeros(4, kernel.ncols());
    for p in 0..4 {
        let Some(r) = e.dofs[p] else { continue };
        ul[p] = u[r];
        vl[p] = v[r];
        zl.set_row(p, &kernel.row(r));
        for q in 0..4 {
            if e.dofs[q].is_some() {
                d[(p, q)] = e.k_local[p][q] - l2 * e.m_local[p][q];
            }
        }
    }
    let dc = d.map(|x| c(x, 0.0));
    let full = ul.transpose() * &dc * &vl;
    if kernel.ncols() == 0 {
        return full[0];
    }
    let (vals, vecs) = sym_eigen(&(&zl * zl.transpose()));
    let touched: Vec<usize> = (0..4).filter(|&k| vals[k] > KERNEL_TOUCH).collect();
    if touched.is_empty() {
        return full[0];
    }
    let basis = Mat::from_fn(4, touched.len(), |i, j| vecs[(i, touched[j])]);
    let g = basis.transpose() * &d * &basis;
    let bd = (basis.transpose() * &d).map(|x| c(x, 0.0));
    let gu = &bd * &ul;
    let gv = &bd * &vl;
    let corr = gu.transpose() * to_complex_mat(&SymPinv::new(&g).matrix()) * gv;
    full[0] - corr[0]
}

fn to_complex_mat(m: &Mat) -> crate::linalg::CMat {
    m.map(|x| c(x, 0.0))
}

/// Adjoint gradient of the peak power at `a`.
pub fn peak_power_grad(
    model: &TrussModel,
    a: &[f64],
    load: &HarmonicLoad,
    backend: &dyn ConicBackend,
) -> Result<GradientReport, SensitivityError> {
    if a.len() != model.n_elements() {
        return Err(SensitivityError::DimensionMismatch { expected: model.n_elements(), got: a.len() });
    }
    let ss = solve_equilibrium(model, a, load)?;
    let q = power_poly(load, &ss);
    let (value, g) = inner_value_grad(&q, backend)?;
    let (_, alt) = max_abs_gradients(&q);
    Ok(assemble_gradient(model, a, load, &ss, value, g, &alt)?)
}

/// Same chain rule, with ∂𝒫/∂q taken at the maximizing angle instead of from an SDP.
pub fn peak_power_grad_direct(model: &TrussModel, a: &[f64], load: &HarmonicLoad) -> Result<GradientReport, SensitivityError> {
    if a.len() != model.n_elements() {
        return Err(SensitivityError::DimensionMismatch { expected: model.n_elements(), got: a.len() });
    }
    let ss = solve_equilibrium(model, a, load)?;
    let q = power_poly(load, &ss);
    let (value, mut alt) = max_abs_gradients(&q);
    let g = alt.remove(0);
    Ok(assemble_gradient(model, a, load, &ss, value, g, &alt)?)
}

/// Chain rule through the adjoints. `alt` holds ∂𝒫/∂q at the other maximizing
/// angles; the result is flagged as a subgradient when any of them yields a
/// different ∂p/∂a.
fn assemble_gradient(
    model: &TrussModel,
    a: &[f64],
    load: &HarmonicLoad,
    ss: &crate::analysis::SteadyState,
    value: f64,
    g: Vec<Complex64>,
    alt: &[Vec<Complex64>],
) -> Result<GradientReport, AnalysisError> {
    let pinvs = dynamic_pinvs(model, a, load.omega0, load.n_harm())?;
    let (grad, adjoints) = chain(model, load, ss, &pinvs, &g);
    let norm = grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let subgradient = alt.iter().any(|ga| {
        let (other, _) = chain(model, load, ss, &pinvs, ga);
        other.iter().zip(&grad).any(|(x, y)| (x - y).abs() > 1e3 * KINK_TOL * norm)
    });
    Ok(GradientReport { peak_power: value, grad, inner_value_grads: g, adjoints, subgradient, fd_check: None })
}

fn chain(
    model: &TrussModel,
    load: &HarmonicLoad,
    ss: &crate::analysis::SteadyState,
    pinvs: &[crate::linalg::SymPinv],
    g: &[Complex64],
) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let n = load.n_harm() as i64;
    let nf = load.n_free();
    let gk = |k: i64| g.get(k as usize).copied().unwrap_or(c(0.0, 0.0));
    let mut adjoints = Vec::with_capacity(n as usize);
    let mut grad = vec![0.0; model.n_elements()];
    for h in 1..=n {
        // w_n = Σ_k conj(g_k) c_{k−n}(f) + conj(Σ_k conj(g_k) c_{k+n}(f))
        let mut w = CVec::zeros(nf);
        let mut w2 = CVec::zeros(nf);
        for k in 1..=2 * n {
            let gc = gk(k).conj();
            if gc == c(0.0, 0.0) {
                continue;
            }
            w += load.coeff(k - h) * gc;
            w2 += load.coeff(k + h) * gc;
        }
        let rhs = w + w2.map(|z| z.conj());
        let pinv = &pinvs[(h - 1) as usize];
        let lam = pinv.apply_c(&rhs);
        let kernel = pinv.kernel_basis();
        let cv = ss.coeff(h);
        let lambda = h as f64 * load.omega0;
        for (j, e) in model.elems.iter().enumerate() {
            grad[j] -= element_form(e, lambda, &lam, &cv, &kernel).re;
        }
        adjoints.push(lam.iter().copied().collect());
    }
    (grad, adjoints)
}

/// Central finite differences of the peak power with steps `rel_step`·a_j.
pub fn finite_difference_grad(model: &TrussModel, a: &[f64], load: &HarmonicLoad, rel_step: f64) -> Result<Vec<f64>, AnalysisError> {
    let mut out = Vec::with_capacity(a.len());
    let mut ap = a.to_vec();
    for j in 0..a.len() {
        let h = rel_step * a[j].abs().max(1e-12);
        ap[j] = a[j] + h;
        let up = peak_power(model, &ap, load)?;
        ap[j] = a[j] - h;
        let dn = peak_power(model, &ap, load)?;
        ap[j] = a[j];
        out.push((up - dn) / (2.0 * h));
    }
    Ok(out)
}

/// max_j |g_j − fd_j| / max_j |fd_j|.
pub fn relative_deviation(g: &[f64], fd: &[f64]) -> f64 {
    let scale = fd.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    g.iter().zip(fd).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

impl GradientReport {
    pub fn with_fd_check(mut self, model: &TrussModel, a: &[f64], load: &HarmonicLoad, rel_step: f64) -> Result<Self, AnalysisError> {
        let fd = finite_difference_grad(model, a, load, rel_step)?;
        self.fd_check = Some(relative_deviation(&self.grad, &fd));
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KktReport {
    /// min aᵀγ + Γ(m − qᵀa) over γ, Γ ≥ 0 with ∇p − γ + Γq = 0.
    pub residual: f64,
    /// Optimal multiplier Γ of the mass bound.
    pub mass_multiplier: f64,
    pub gradient: GradientReport,
}

/// Closed-form optimum of the KKT-residual LP for a given gradient.
///
/// γ = ∇p + Γq must be nonnegative, so Γ ≥ max_i(−∂_i p / q_i); the objective
/// reduces to aᵀ∇p + mΓ and is minimized at the smallest admissible Γ.
pub fn kkt_lp(grad: &[f64], a: &[f64], weights: &[f64], m: f64) -> (f64, f64) {
    let gamma = grad.iter().zip(weights).fold(0.0f64, |g, (d, w)| g.max(-d / w));
    let ag: f64 = a.iter().zip(grad).map(|(x, d)| x * d).sum();
    (ag + m * gamma, gamma)
}

pub fn kkt_residual(
    model: &TrussModel,
    a: &[f64],
    load: &HarmonicLoad,
    m: f64,
    backend: &dyn ConicBackend,
) -> Result<KktReport, SensitivityError> {
    let gradient = peak_power_grad(model, a, load, backend)?;
    let (residual, mass_multiplier) = kkt_lp(&gradient.grad, a, &model.weights(), m);
    Ok(KktReport { residual, mass_multiplier, gradient })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kkt_lp_stationary_point() {
        // ∇p = −Γq with Γ = 2 and the mass bound active: residual zero
        let w = [1.0, 2.0];
        let g = [-2.0, -4.0];
        let a = [0.5, 0.25];
        let (r, gam) = kkt_lp(&g, &a, &w, 1.0);
        assert!((gam - 2.0).abs() < 1e-15);
        assert!(r.abs() < 1e-15);
    }

    #[test]
    fn cos2_has_four_peaks() {
        let q = TrigPoly::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        let (v, g) = max_abs_gradients(&q);
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(g.len(), 4);
        // ∂/∂Re q₂ agrees at all of them
        assert!(g.iter().all(|gi| (gi[2].re - 2.0).abs() < 1e-9));
    }

    #[test]
    fn mirrored_peaks() {
        // 1.5 + cos θ − cos 2θ is even and peaks at ±arccos(1/4)
        let q = TrigPoly::new(vec![c(1.5, 0.0), c(0.5, 0.0), c(-0.5, 0.0)]);
        let (v, g) = max_abs_gradients(&q);
        assert!((v - 2.625).abs() < 1e-12);
        assert_eq!(g.len(), 2);
        assert!((g[0][1].im + g[1][1].im).abs() < 1e-6 && g[0][1].im.abs() > 1.0);
    }
}
