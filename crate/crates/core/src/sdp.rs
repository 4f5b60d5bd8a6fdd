//! Conic builders: compliance SDP, peak-power SDP of a fixed power polynomial, and the
//! penalized relaxation over (a, θ, X, Q₁, Q₂).
//!
//! Hermitian unknowns are parametrized directly by their d² real degrees of freedom
//! (Re of the upper triangle, Im of the strict upper triangle) and enter every LMI
//! through the real embedding [[Re, −Im], [Im, Re]].

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent on f64 whenever std is linked
use num_traits::Float;

use crate::conic::{ConicProblem, PsdBlock};
use crate::fem::TrussModel;
use crate::linalg::{c, is_hermitian, CMat, Mat, Vector};
use crate::loads::HarmonicLoad;
use crate::solver::{ConicBackend, SolveReport, SolveStatus};
use crate::trigpoly::TrigPoly;

#[derive(Clone, Debug, PartialEq)]
pub enum SdpError {
    NotHermitian,
    NegativeEta(f64),
    NonPositiveMass(f64),
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for SdpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SdpError::NotHermitian => write!(f, "matrix is not Hermitian"),
            SdpError::NegativeEta(e) => write!(f, "penalty eta must be nonnegative, got {e}"),
            SdpError::NonPositiveMass(m) => write!(f, "mass bound must be positive, got {m}"),
            SdpError::DimensionMismatch { expected, got } => {
                write!(f, "vector has length {got}, expected {expected}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SdpError {}

/// [[Re H, −Im H], [Im H, Re H]].
pub fn herm_to_real(h: &CMat) -> Result<Mat, SdpError> {
    if !h.is_square() || !is_hermitian(h, 1e-10) {
        return Err(SdpError::NotHermitian);
    }
    let n = h.nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            m[(i, j)] = z.re;
            m[(i + n, j + n)] = z.re;
            m[(i + n, j)] = z.im;
            m[(i, j + n)] = -z.im;
        }
    }
    Ok(m)
}

/// Upper-triangle entries of the embedding of a Hermitian matrix with value z at (r, s)
/// and conj(z) at (s, r); `dim` is the Hermitian size.
pub fn embed_entry(r: usize, s: usize, z: Complex64, dim: usize, out: &mut Vec<(usize, usize, f64)>) {
    let (r, s, z) = if r > s { (s, r, z.conj()) } else { (r, s, z) };
    if z.re != 0.0 {
        out.push((r, s, z.re));
        out.push((r + dim, s + dim, z.re));
    }
    if r != s && z.im != 0.0 {
        out.push((s, r + dim, z.im));
        out.push((r, s + dim, -z.im));
    }
}

/// Real parametrization of a Hermitian d×d unknown occupying variables start..start+d².
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HermParam {
    pub start: usize,
    pub dim: usize,
}

impl HermParam {
    pub fn n_params(dim: usize) -> usize {
        dim * dim
    }

    pub fn declare(p: &mut ConicProblem, name: &str, dim: usize) -> HermParam {
        let start = p.add_block(name, Self::n_params(dim));
        HermParam { start, dim }
    }

    /// Variable holding Re Z_{jk}, j ≤ k.
    pub fn re(&self, j: usize, k: usize) -> usize {
        debug_assert!(j <= k && k < self.dim);
        self.start + j * self.dim - j * j.saturating_sub(1) / 2 + (k - j)
    }

    /// Variable holding Im Z_{jk}, j < k.
    pub fn im(&self, j: usize, k: usize) -> usize {
        debug_assert!(j < k && k < self.dim);
        let d = self.dim;
        self.start + d * (d + 1) / 2 + j * d - j * (j + 1) / 2 + (k - j - 1)
    }

    /// Linear forms (Re, Im) of the entry Z_{rs}.
    pub fn entry(&self, r: usize, s: usize) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
        if r == s {
            (vec![(self.re(r, r), 1.0)], vec![])
        } else if r < s {
            (vec![(self.re(r, s), 1.0)], vec![(self.im(r, s), 1.0)])
        } else {
            (vec![(self.re(s, r), 1.0)], vec![(self.im(s, r), -1.0)])
        }
    }

    pub fn trace_terms(&self, coef: f64) -> Vec<(usize, f64)> {
        (0..self.dim).map(|i| (self.re(i, i), coef)).collect()
    }

    /// Coefficients G_j so that the embedded LMI slack gains +Z, placed at `offset`
    /// inside a Hermitian block of size `block_dim`.
    pub fn lmi_coeffs(&self, offset: usize, block_dim: usize, out: &mut Vec<(usize, usize, usize, f64)>) {
        let mut buf = Vec::new();
        for j in 0..self.dim {
            for k in j..self.dim {
                buf.clear();
                embed_entry(offset + j, offset + k, c(-1.0, 0.0), block_dim, &mut buf);
                out.extend(buf.iter().map(|&(r, s, v)| (self.re(j, k), r, s, v)));
                if j < k {
                    buf.clear();
                    embed_entry(offset + j, offset + k, c(0.0, -1.0), block_dim, &mut buf);
                    out.extend(buf.iter().map(|&(r, s, v)| (self.im(j, k), r, s, v)));
                }
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> CMat {
        let d = self.dim;
        let mut m = CMat::zeros(d, d);
        for j in 0..d {
            m[(j, j)] = c(x[self.re(j, j)], 0.0);
            for k in j + 1..d {
                let z = c(x[self.re(j, k)], x[self.im(j, k)]);
                m[(j, k)] = z;
                m[(k, j)] = z.conj();
            }
        }
        m
    }

    /// Entries of the unknown as a parameter vector (inverse of `value`).
    pub fn params_of(&self, z: &CMat, x: &mut [f64]) {
        for j in 0..self.dim {
            for k in j..self.dim {
                x[self.re(j, k)] = z[(j, k)].re;
                if j < k {
                    x[self.im(j, k)] = z[(j, k)].im;
                }
            }
        }
    }
}

/// F with 3N columns: column a (1-based) is T_{N−a}c for a ≠ N and Dc for a = N,
/// where (T_j c)_n = c_{n+j} and (Dc)_n = inω c_n.
#[derive(Clone, Debug, PartialEq)]
pub struct FMatrix {
    pub n_harm: usize,
    pub n_free: usize,
    pub cols: CMat,
}

impl FMatrix {
    pub fn column(&self, a: usize) -> crate::linalg::CVec {
        self.cols.column(a - 1).into_owned()
    }
}

pub fn build_f(load: &HarmonicLoad) -> FMatrix {
    let n = load.n_harm();
    let nf = load.n_free();
    let mut cols = CMat::zeros(n * nf, 3 * n);
    for a in 1..=3 * n {
        for m in 1..=n {
            let block = if a == n {
                load.coeff(m as i64) * c(0.0, (m as f64) * load.omega0)
            } else {
                load.coeff(m as i64 + n as i64 - a as i64)
            };
            for i in 0..nf {
                cols[((m - 1) * nf + i, a - 1)] = block[i];
            }
        }
    }
    FMatrix { n_harm: n, n_free: nf, cols }
}

/// Selector with tr{C_k X} = X_{N+k,N} + X_{N,N−k} (1-based, out-of-range terms dropped).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CSelector {
    pub k: i64,
    pub n_harm: usize,
}

impl CSelector {
    /// 0-based (row, col) positions of X summed by tr{C_k X}.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        let n = self.n_harm as i64;
        let size = 3 * n;
        let mut out = Vec::new();
        let (r1, c1) = (n + self.k, n);
        if (1..=size).contains(&r1) {
            out.push(((r1 - 1) as usize, (c1 - 1) as usize));
        }
        let (r2, c2) = (n, n - self.k);
        if (1..=size).contains(&c2) {
            out.push(((r2 - 1) as usize, (c2 - 1) as usize));
        }
        out
    }

    pub fn matrix(&self) -> Mat {
        let s = 3 * self.n_harm;
        let mut m = Mat::zeros(s, s);
        for (r, col) in self.positions() {
            m[(col, r)] += 1.0;
        }
        m
    }

    pub fn trace_with(&self, x: &CMat) -> Complex64 {
        self.positions().iter().map(|&(r, s)| x[(r, s)]).sum()
    }
}

pub fn build_c(load: &HarmonicLoad) -> Vec<CSelector> {
    let n = load.n_harm() as i64;
    (-2 * n..=2 * n).filter(|&k| k != 0).map(|k| CSelector { k, n_harm: load.n_harm() }).collect()
}

/// Σ_i Q_{i+k,i} as linear forms (Re, Im) in the parameters of Q.
fn lambda_trace_terms(q: &HermParam, k: usize) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
    let mut re = Vec::new();
    let mut im = Vec::new();
    for i in 0..q.dim.saturating_sub(k) {
        let (r, s) = q.entry(i + k, i);
        re.extend(r);
        im.extend(s);
    }
    (re, im)
}

fn scaled(terms: &[(usize, f64)], s: f64) -> Vec<(usize, f64)> {
    terms.iter().map(|&(v, c)| (v, c * s)).collect()
}

fn gram_block(name: &str, q: &HermParam) -> PsdBlock {
    let mut g = Vec::new();
    q.lmi_coeffs(0, q.dim, &mut g);
    PsdBlock { name: name.into(), size: 2 * q.dim, h: vec![], g }
}

/// Design scaling a = s·â with s = m/Σq (the uniform full-mass design is â = 1) and
/// congruence factor δ applied to the stiffness rows of the bordered LMIs.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scaling {
    pub area: f64,
    pub lmi: f64,
}

impl Scaling {
    pub fn for_model(model: &TrussModel, m: f64) -> Scaling {
        let w: f64 = model.weights().iter().sum();
        let area = m / w;
        let k = model.assemble(&model.uniform_design(m)).map(|(_, k)| k).unwrap_or_else(|_| Mat::zeros(0, 0));
        let kmax = (0..k.nrows()).fold(0.0f64, |acc, i| acc.max(k[(i, i)]));
        let lmi = if kmax > 0.0 { 1.0 / kmax.sqrt() } else { 1.0 };
        Scaling { area, lmi }
    }

    pub fn identity() -> Scaling {
        Scaling { area: 1.0, lmi: 1.0 }
    }
}

fn add_design_constraints(p: &mut ConicProblem, model: &TrussModel, m: f64, sc: Scaling) -> usize {
    let ne = model.n_elements();
    let a0 = p.add_block("a", ne);
    for i in 0..ne {
        p.add_nonneg(&[(a0 + i, -1.0)], 0.0);
    }
    let w = model.weights();
    let terms: Vec<(usize, f64)> = w.iter().enumerate().map(|(i, wi)| (a0 + i, wi * sc.area / m)).collect();
    p.add_nonneg(&terms, 1.0);
    a0
}

/// Stiffness contributions of â to a Hermitian LMI block: +δ²s·(K_i − λ²M_i) at `offset`.
fn push_stiffness(
    model: &TrussModel,
    a0: usize,
    lambda: f64,
    offset: usize,
    block_dim: usize,
    sc: Scaling,
    hermitian: bool,
    out: &mut Vec<(usize, usize, usize, f64)>,
) {
    let f = sc.lmi * sc.lmi * sc.area;
    let mut buf = Vec::new();
    for (i, e) in model.elems.iter().enumerate() {
        for (r, s, v) in e.dynamic_entries(lambda) {
            if r > s {
                continue;
            }
            if hermitian {
                buf.clear();
                embed_entry(offset + r, offset + s, c(-f * v, 0.0), block_dim, &mut buf);
                out.extend(buf.iter().map(|&(rr, ss, vv)| (a0 + i, rr, ss, vv)));
            } else {
                out.push((a0 + i, offset + r, offset + s, -f * v));
            }
        }
    }
}

/// min θ s.t. [[θ, fᵀ], [f, K(a)]] ⪰ 0, a ≥ 0, qᵀa ≤ m.
#[derive(Clone, Debug)]
pub struct ComplianceSdp {
    pub problem: ConicProblem,
    pub scaling: Scaling,
    a0: usize,
    theta: usize,
    n_elem: usize,
}

impl ComplianceSdp {
    pub fn extract(&self, rep: &SolveReport) -> (Vec<f64>, f64) {
        let a = (0..self.n_elem).map(|i| rep.x[self.a0 + i] * self.scaling.area).collect();
        (a, rep.x[self.theta])
    }
}

pub fn build_compliance_sdp(model: &TrussModel, f: &Vector, m: f64) -> Result<ComplianceSdp, SdpError> {
    if !(m > 0.0) {
        return Err(SdpError::NonPositiveMass(m));
    }
    let n = model.n_free();
    if f.len() != n {
        return Err(SdpError::DimensionMismatch { expected: n, got: f.len() });
    }
    let sc = Scaling::for_model(model, m);
    let mut p = ConicProblem::new("compliance");
    let a0 = add_design_constraints(&mut p, model, m, sc);
    let theta = p.add_block("theta", 1);
    p.c[theta] = 1.0;
    let mut h = Vec::new();
    for i in 0..n {
        if f[i] != 0.0 {
            h.push((0, 1 + i, sc.lmi * f[i]));
        }
    }
    let mut g = vec![(theta, 0, 0, -1.0)];
    push_stiffness(model, a0, 0.0, 1, n + 1, sc, false, &mut g);
    p.psd.push(PsdBlock { name: "bordered".into(), size: n + 1, h, g });
    Ok(ComplianceSdp { problem: p, scaling: sc, a0, theta, n_elem: model.n_elements() })
}

/// Equality rows tying one coefficient k ≥ 1 to the Gram matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoeffRows {
    pub q1_re: usize,
    pub q1_im: usize,
    pub q2_re: usize,
    pub q2_im: usize,
}

/// min θ s.t. θ ± q(z) are SOS with Gram matrices Q₁, Q₂, for a fixed q of degree D.
#[derive(Clone, Debug)]
pub struct PeakPowerSdp {
    pub problem: ConicProblem,
    pub theta: usize,
    pub q1: HermParam,
    pub q2: HermParam,
    pub trace_rows: (usize, usize),
    /// Rows for k = 1..=D.
    pub rows: Vec<CoeffRows>,
}

impl PeakPowerSdp {
    /// ∂(optimal value)/∂Re q_k + i ∂/∂Im q_k for k = 0..=D (k = 0 is real).
    pub fn value_gradient(&self, rep: &SolveReport) -> Vec<Complex64> {
        let d = &rep.equality_duals;
        let mut g = vec![c(d[self.trace_rows.0] - d[self.trace_rows.1], 0.0)];
        for r in &self.rows {
            g.push(c(d[r.q1_re] - d[r.q2_re], d[r.q1_im] - d[r.q2_im]));
        }
        g
    }
}

pub fn build_peak_power_sdp(q: &TrigPoly) -> PeakPowerSdp {
    let size = q.degree() + 1;
    let mut p = ConicProblem::new("peak_power");
    let theta = p.add_block("theta", 1);
    p.c[theta] = 1.0;
    let q1 = HermParam::declare(&mut p, "Q1", size);
    let q2 = HermParam::declare(&mut p, "Q2", size);
    let q0 = q.coeffs[0].re;
    let mut t1 = q1.trace_terms(1.0);
    t1.push((theta, -1.0));
    let mut t2 = q2.trace_terms(1.0);
    t2.push((theta, -1.0));
    let r1 = p.add_eq(&t1, q0);
    let r2 = p.add_eq(&t2, -q0);
    let mut rows = Vec::new();
    for k in 1..size {
        let (a_re, a_im) = lambda_trace_terms(&q1, k);
        let (b_re, b_im) = lambda_trace_terms(&q2, k);
        let qk = q.coeffs[k];
        rows.push(CoeffRows {
            q1_re: p.add_eq(&a_re, qk.re),
            q1_im: p.add_eq(&a_im, qk.im),
            q2_re: p.add_eq(&b_re, -qk.re),
            q2_im: p.add_eq(&b_im, -qk.im),
        });
    }
    p.psd.push(gram_block("Q1", &q1));
    p.psd.push(gram_block("Q2", &q2));
    PeakPowerSdp { problem: p, theta, q1, q2, trace_rows: (r1, r2), rows }
}

/// Feasibility SDP for a Gram matrix of p: Q ⪰ 0 with tr{Λ_k Q} = p_k.
pub fn build_gram_feasibility(p: &TrigPoly) -> (ConicProblem, HermParam) {
    let size = p.degree() + 1;
    let mut prob = ConicProblem::new("gram_feasibility");
    let q = HermParam::declare(&mut prob, "Q", size);
    prob.add_eq(&q.trace_terms(1.0), p.coeffs[0].re);
    for k in 1..size {
        let (re, im) = lambda_trace_terms(&q, k);
        prob.add_eq(&re, p.coeffs[k].re);
        prob.add_eq(&im, p.coeffs[k].im);
    }
    prob.psd.push(gram_block("Q", &q));
    (prob, q)
}

/// Variable layout of the penalized relaxation.
#[derive(Clone, Debug)]
pub struct RelaxationLayout {
    pub a0: usize,
    pub n_elem: usize,
    pub theta: usize,
    pub x: HermParam,
    pub q1: HermParam,
    pub q2: HermParam,
    pub trace_rows: (usize, usize),
    /// Rows for k = 1..=2N.
    pub rows: Vec<CoeffRows>,
    pub scaling: Scaling,
}

#[derive(Clone, Debug)]
pub struct Relaxation {
    pub problem: ConicProblem,
    pub layout: RelaxationLayout,
    pub f: FMatrix,
    pub eta: f64,
}

#[derive(Clone, Debug)]
pub struct RelaxationSolution {
    pub status: SolveStatus,
    pub a: Vec<f64>,
    pub theta: f64,
    pub x: CMat,
    pub q1: CMat,
    pub q2: CMat,
    pub objective: f64,
    pub equality_duals: Vec<f64>,
    pub iterations: usize,
    pub solve_time: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl Relaxation {
    pub fn extract(&self, rep: &SolveReport) -> RelaxationSolution {
        let l = &self.layout;
        let x = &rep.x;
        RelaxationSolution {
            status: rep.status,
            a: (0..l.n_elem).map(|i| (x[l.a0 + i] * l.scaling.area).max(0.0)).collect(),
            theta: x[l.theta],
            x: l.x.value(x),
            q1: l.q1.value(x),
            q2: l.q2.value(x),
            objective: rep.objective,
            equality_duals: rep.equality_duals.clone(),
            iterations: rep.iterations,
            solve_time: rep.solve_time,
            primal_residual: rep.primal_residual,
            dual_residual: rep.dual_residual,
        }
    }

    pub fn solve(&self, backend: &dyn ConicBackend) -> RelaxationSolution {
        self.extract(&backend.solve(&self.problem))
    }

    /// Parameter vector for given (a, θ, X, Q₁, Q₂).
    pub fn pack(&self, a: &[f64], theta: f64, x: &CMat, q1: &CMat, q2: &CMat) -> Vec<f64> {
        let l = &self.layout;
        let mut v = vec![0.0; self.problem.n_vars];
        for (i, ai) in a.iter().enumerate() {
            v[l.a0 + i] = ai / l.scaling.area;
        }
        v[l.theta] = theta;
        l.x.params_of(x, &mut v);
        l.q1.params_of(q1, &mut v);
        l.q2.params_of(q2, &mut v);
        v
    }
}

/// min θ + η tr{X} s.t. a ≥ 0, qᵀa ≤ m, [[X, F*], [F, L(a)]] ⪰ 0, Q₁, Q₂ ⪰ 0,
/// tr{Q₁} = tr{Q₂} = θ, tr{C_k X} = tr{Λ_k Q₁} = −tr{Λ_k Q₂} for k = 1..2N.
pub fn build_penalized_relaxation(
    model: &TrussModel,
    load: &HarmonicLoad,
    m: f64,
    eta: f64,
) -> Result<Relaxation, SdpError> {
    build_penalized_relaxation_scaled(model, load, m, eta, Scaling::for_model(model, m))
}

pub fn build_penalized_relaxation_scaled(
    model: &TrussModel,
    load: &HarmonicLoad,
    m: f64,
    eta: f64,
    sc: Scaling,
) -> Result<Relaxation, SdpError> {
    if !(eta >= 0.0) {
        return Err(SdpError::NegativeEta(eta));
    }
    if !(m > 0.0) {
        return Err(SdpError::NonPositiveMass(m));
    }
    let nf = model.n_free();
    if load.n_free() != nf {
        return Err(SdpError::DimensionMismatch { expected: nf, got: load.n_free() });
    }
    let n = load.n_harm();
    let fm = build_f(load);
    let mut p = ConicProblem::new("penalized_relaxation");
    let a0 = add_design_constraints(&mut p, model, m, sc);
    let theta = p.add_block("theta", 1);
    let x = HermParam::declare(&mut p, "X", 3 * n);
    let gsize = 2 * n + 1;
    let q1 = HermParam::declare(&mut p, "Q1", gsize);
    let q2 = HermParam::declare(&mut p, "Q2", gsize);
    p.c[theta] = 1.0;
    for (v, w) in x.trace_terms(eta) {
        p.c[v] = w;
    }

    let mut t1 = q1.trace_terms(1.0);
    t1.push((theta, -1.0));
    let mut t2 = q2.trace_terms(1.0);
    t2.push((theta, -1.0));
    let r1 = p.add_eq(&t1, 0.0);
    let r2 = p.add_eq(&t2, 0.0);
    let mut rows = Vec::new();
    for k in 1..=2 * n {
        let sel = CSelector { k: k as i64, n_harm: n };
        let mut cx_re = Vec::new();
        let mut cx_im = Vec::new();
        for (r, s) in sel.positions() {
            let (re, im) = x.entry(r, s);
            cx_re.extend(re);
            cx_im.extend(im);
        }
        let (a_re, a_im) = lambda_trace_terms(&q1, k);
        let (b_re, b_im) = lambda_trace_terms(&q2, k);
        let row = |p: &mut ConicProblem, cx: &[(usize, f64)], lam: &[(usize, f64)], s: f64| {
            let mut t = cx.to_vec();
            t.extend(scaled(lam, s));
            p.add_eq(&t, 0.0)
        };
        rows.push(CoeffRows {
            q1_re: row(&mut p, &cx_re, &a_re, -1.0),
            q1_im: row(&mut p, &cx_im, &a_im, -1.0),
            q2_re: row(&mut p, &cx_re, &b_re, 1.0),
            q2_im: row(&mut p, &cx_im, &b_im, 1.0),
        });
    }

    // bordered LMI [[X, δF*], [δF, δ²L(a)]]
    let dim = 3 * n + n * nf;
    let mut h = Vec::new();
    for row in 0..n * nf {
        for col in 0..3 * n {
            let z = fm.cols[(row, col)];
            if z != c(0.0, 0.0) {
                embed_entry(3 * n + row, col, z * sc.lmi, dim, &mut h);
            }
        }
    }
    let mut g = Vec::new();
    x.lmi_coeffs(0, dim, &mut g);
    for k in 1..=n {
        push_stiffness(model, a0, k as f64 * load.omega0, 3 * n + (k - 1) * nf, dim, sc, true, &mut g);
    }
    p.psd.push(PsdBlock { name: "bordered".into(), size: 2 * dim, h, g });
    p.psd.push(gram_block("Q1", &q1));
    p.psd.push(gram_block("Q2", &q2));

    let layout = RelaxationLayout {
        a0,
        n_elem: model.n_elements(),
        theta,
        x,
        q1,
        q2,
        trace_rows: (r1, r2),
        rows,
        scaling: sc,
    };
    Ok(Relaxation { problem: p, layout, f: fm, eta })
}

/// Single harmonic f(t) = f_R cos ωt + f_I sin ωt, i.e. c₁ = (f_R − i f_I)/2.
pub fn build_single_harmonic_sdp(
    model: &TrussModel,
    f_r: &Vector,
    f_i: &Vector,
    omega: f64,
    m: f64,
    eta: f64,
) -> Result<Relaxation, SdpError> {
    let load = HarmonicLoad::from_real_imag(omega, f_r, f_i)
        .map_err(|_| SdpError::DimensionMismatch { expected: f_r.len(), got: f_i.len() })?;
    build_penalized_relaxation(model, &load, m, eta)
}

pub fn describe(p: &ConicProblem) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    let _ = write!(s, "{}: {} vars, {} eq, {} lin", p.name, p.n_vars, p.n_eq(), p.n_lin());
    for b in &p.psd {
        let _ = write!(s, ", {}[{}]", b.name, b.size);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn herm_param_indices_are_a_bijection() {
        for d in 1..6 {
            let hp = HermParam { start: 3, dim: d };
            let mut seen = vec![false; d * d];
            for j in 0..d {
                for k in j..d {
                    let r = hp.re(j, k) - 3;
                    assert!(!seen[r]);
                    seen[r] = true;
                    if j < k {
                        let i = hp.im(j, k) - 3;
                        assert!(!seen[i]);
                        seen[i] = true;
                    }
                }
            }
            assert!(seen.iter().all(|s| *s));
        }
    }

    #[test]
    fn embedding_of_pauli_y() {
        let h = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let m = herm_to_real(&h).unwrap();
        let mut e = crate::linalg::sym_eigenvalues(&m);
        e.sort_by(|a, b| a.total_cmp(b));
        for (v, t) in e.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((v - t).abs() < 1e-12);
        }
    }
}
