//! Trigonometric polynomials on the unit circle, Toeplitz selectors and Gram matrices.
//!
//! A polynomial of degree D is stored by its coefficients q_0..q_D, with
//! q_{-k} = conj(q_k). It is read as q(z) = Σ_k q_k z^{-k}; on the circle z = e^{-iθ}
//! this is q_0 + 2 Re Σ_{k≥1} q_k e^{ikθ}.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent on f64 whenever std is linked
use num_traits::Float;

use crate::linalg::{c, herm_eigen, is_hermitian, CMat, CVec, Mat};

#[derive(Clone, Debug, PartialEq)]
pub enum TrigError {
    SelectorOutOfRange { k: i64, size: usize },
    NotHermitian,
    Indefinite(f64),
    Infeasible,
    Backend(&'static str),
}

impl fmt::Display for TrigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrigError::SelectorOutOfRange { k, size } => {
                write!(f, "shift {k} needs |k| < {size}")
            }
            TrigError::NotHermitian => write!(f, "matrix is not Hermitian"),
            TrigError::Indefinite(v) => write!(f, "matrix has negative eigenvalue {v}"),
            TrigError::Infeasible => write!(f, "no PSD Gram matrix: the polynomial takes negative values"),
            TrigError::Backend(m) => write!(f, "backend failure: {m}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for TrigError {}

#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    pub coeffs: Vec<Complex64>,
}

impl TrigPoly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(c(0.0, 0.0));
        }
        coeffs[0] = c(coeffs[0].re, 0.0);
        TrigPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        let d = self.degree() as i64;
        if k.abs() > d {
            c(0.0, 0.0)
        } else if k >= 0 {
            self.coeffs[k as usize]
        } else {
            self.coeffs[(-k) as usize].conj()
        }
    }

    /// Value at z = e^{-iθ}.
    pub fn eval_angle(&self, theta: f64) -> f64 {
        let mut v = self.coeffs[0].re;
        for (k, q) in self.coeffs.iter().enumerate().skip(1) {
            v += 2.0 * (q * Complex64::from_polar(1.0, k as f64 * theta)).re;
        }
        v
    }

    /// Σ_k q_k z^{-k} at an arbitrary complex z (real on the unit circle).
    pub fn eval_z(&self, z: Complex64) -> Complex64 {
        let d = self.degree() as i64;
        let mut v = c(0.0, 0.0);
        for k in -d..=d {
            v += self.coeff(k) * z.powi(-k as i32);
        }
        v
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, q| m.max(q.norm()))
    }
}

/// Toeplitz selector Λ_k: (Λ_k)_{ij} = 1 iff j − i = k.
#[derive(Clone, Debug, PartialEq)]
pub struct GramSelector {
    pub k: i64,
    pub size: usize,
}

impl GramSelector {
    pub fn matrix(&self) -> Mat {
        Mat::from_fn(self.size, self.size, |i, j| if j as i64 - i as i64 == self.k { 1.0 } else { 0.0 })
    }

    /// tr{Λ_k Q} = Σ_i Q_{i+k, i}.
    pub fn trace_with(&self, q: &CMat) -> Complex64 {
        let mut s = c(0.0, 0.0);
        for i in 0..self.size {
            let r = i as i64 + self.k;
            if r >= 0 && (r as usize) < self.size {
                s += q[(r as usize, i)];
            }
        }
        s
    }
}

pub fn lambda_matrix(k: i64, size: usize) -> Result<GramSelector, TrigError> {
    if k.unsigned_abs() as usize >= size {
        return Err(TrigError::SelectorOutOfRange { k, size });
    }
    Ok(GramSelector { k, size })
}

/// ψ(z) = (1, z, …, z^D).
pub fn psi(z: Complex64, degree: usize) -> CVec {
    let mut v = CVec::zeros(degree + 1);
    let mut p = c(1.0, 0.0);
    for i in 0..=degree {
        v[i] = p;
        p *= z;
    }
    v
}

pub fn gram_to_coeffs(q: &CMat) -> Result<TrigPoly, TrigError> {
    if !is_hermitian(q, 1e-10) {
        return Err(TrigError::NotHermitian);
    }
    let size = q.nrows();
    let coeffs = (0..size as i64).map(|k| GramSelector { k, size }.trace_with(q)).collect();
    Ok(TrigPoly::new(coeffs))
}

/// Factors h_j with Σ_j |h_j(z)|² = ψ(z)*Qψ(z). Each factor is returned by its
/// coefficients on z^{-i}, i = 0..D, i.e. h_j(z) = Σ_i h_{ji} z^{-i} on the circle.
pub fn sos_extract(q: &CMat) -> Result<Vec<Vec<Complex64>>, TrigError> {
    if !is_hermitian(q, 1e-10) {
        return Err(TrigError::NotHermitian);
    }
    let (vals, vecs) = herm_eigen(q);
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(&v) = vals.first() {
        if v < -1e-10 * scale.max(1e-300) {
            return Err(TrigError::Indefinite(v));
        }
    }
    let mut out = Vec::new();
    for (k, &s) in vals.iter().enumerate() {
        if s > 1e-10 * scale {
            let r = s.sqrt();
            out.push(vecs.column(k).iter().map(|v| v * r).collect());
        }
    }
    Ok(out)
}

pub fn eval_factor(h: &[Complex64], z: Complex64) -> Complex64 {
    h.iter().enumerate().fold(c(0.0, 0.0), |acc, (i, v)| acc + v * z.powi(-(i as i32)))
}

/// max_θ |p(e^{-iθ})| and a maximizing angle: dense sampling, then golden-section
/// refinement around the three best samples.
pub fn max_abs_on_circle_arg(p: &TrigPoly) -> (f64, f64) {
    let d = p.degree().max(1);
    let n = 4096 * d;
    let h = 2.0 * PI / n as f64;
    let f = |t: f64| p.eval_angle(t).abs();
    let mut best: [(f64, usize); 3] = [(-1.0, 0); 3];
    for i in 0..n {
        let v = f(i as f64 * h);
        if v > best[2].0 {
            best[2] = (v, i);
            best.sort_by(|a, b| b.0.total_cmp(&a.0));
        }
    }
    let mut out = (f(0.0), 0.0);
    for &(v, i) in &best {
        if v < 0.0 {
            continue;
        }
        let (t, fv) = golden_max(&f, (i as f64 - 1.0) * h, (i as f64 + 1.0) * h);
        let cand = if fv >= v { (fv, t) } else { (v, i as f64 * h) };
        if cand.0 > out.0 {
            out = cand;
        }
    }
    (out.0, num_traits::Euclid::rem_euclid(&out.1, &(2.0 * PI)))
}

pub fn max_abs_on_circle(p: &TrigPoly) -> f64 {
    max_abs_on_circle_arg(p).0
}

/// Local maxima of |p| on the circle, refined, sorted by decreasing value.
pub fn local_maxima_abs(p: &TrigPoly) -> Vec<(f64, f64)> {
    let d = p.degree().max(1);
    let n = 4096 * d;
    let h = 2.0 * PI / n as f64;
    let f = |t: f64| p.eval_angle(t).abs();
    let vals: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
    let mut out: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        let (l, r) = (vals[(i + n - 1) % n], vals[(i + 1) % n]);
        if vals[i] >= l && vals[i] > r {
            let (t, v) = golden_max(&f, (i as f64 - 1.0) * h, (i as f64 + 1.0) * h);
            out.push(if v >= vals[i] { (v, num_traits::Euclid::rem_euclid(&t, &(2.0 * PI))) } else { (vals[i], i as f64 * h) });
        }
    }
    out.sort_by(|a, b| b.0.total_cmp(&a.0));
    out
}

/// Gram matrix Q ⪰ 0 with ψ*Qψ = p, found by a feasibility SDP. Infeasibility
/// certifies that p takes negative values on the circle.
pub fn certify_nonneg(p: &TrigPoly, backend: &dyn crate::solver::ConicBackend) -> Result<CMat, TrigError> {
    use crate::solver::SolveStatus;
    let scale = p.max_abs_coeff();
    if scale == 0.0 {
        let n = p.degree() + 1;
        return Ok(CMat::zeros(n, n));
    }
    let unit = TrigPoly::new(p.coeffs.iter().map(|q| q / scale).collect());
    let (prob, q) = crate::sdp::build_gram_feasibility(&unit);
    let rep = backend.solve(&prob);
    match rep.status {
        SolveStatus::Optimal | SolveStatus::NearOptimal => Ok(q.value(&rep.x) * c(scale, 0.0)),
        SolveStatus::Infeasible => Err(TrigError::Infeasible),
        SolveStatus::Unbounded => Err(TrigError::Backend("feasibility problem reported unbounded")),
        SolveStatus::NumericalFailure => Err(TrigError::Backend("numerical failure")),
    }
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
        if (b - a).abs() < 1e-15 {
            break;
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}
