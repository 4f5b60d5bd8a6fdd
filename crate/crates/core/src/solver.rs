//! Primal-dual interior-point method for `ConicProblem`s.
//!
//! Homogeneous self-dual embedding with Nesterov-Todd scaling and Mehrotra
//! predictor-corrector steps. The Newton system is reduced to the Schur complement
//! H = Gᵀ(WᵀW)⁻¹G, assembled directly from the sparse LMI coefficients, then solved
//! together with the equality rows by a Cholesky factorization of H + AᵀA.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, Dyn, SVD};
#[allow(unused_imports)] // inherent on f64 whenever std is linked
use num_traits::Float;

use crate::conic::ConicProblem;
use crate::linalg::{sym_eigen, symmetrize, Mat, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_usable(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub feastol: f64,
    pub abstol: f64,
    pub reltol: f64,
    /// Looser tolerance accepted as `NearOptimal` when the method stalls.
    pub near_tol: f64,
    pub max_iter: usize,
    pub step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { feastol: 1e-8, abstol: 1e-8, reltol: 1e-8, near_tol: 1e-5, max_iter: 100, step: 0.99 }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// ∂(optimal value)/∂b for each equality row.
    pub equality_duals: Vec<f64>,
    pub lin_duals: Vec<f64>,
    pub psd_duals: Vec<Mat>,
    pub objective: f64,
    pub iterations: usize,
    pub solve_time: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
}

impl SolveReport {
    pub(crate) fn failed(p: &ConicProblem, status: SolveStatus) -> Self {
        SolveReport {
            status,
            x: vec![0.0; p.n_vars],
            equality_duals: vec![0.0; p.n_eq()],
            lin_duals: vec![0.0; p.n_lin()],
            psd_duals: p.psd.iter().map(|b| Mat::zeros(b.size, b.size)).collect(),
            objective: f64::NAN,
            iterations: 0,
            solve_time: 0.0,
            primal_residual: f64::INFINITY,
            dual_residual: f64::INFINITY,
            gap: f64::INFINITY,
        }
    }

    pub fn block<'a>(&'a self, p: &ConicProblem, name: &str) -> Option<&'a [f64]> {
        p.block_values(name, &self.x)
    }
}

/// Backend contract used by the builders and the sensitivity module.
pub trait ConicBackend {
    fn solve(&self, p: &ConicProblem) -> SolveReport;
}

/// Default backend: the interior-point method below.
#[derive(Clone, Debug, Default)]
pub struct InteriorPoint {
    pub opts: SolverOptions,
}

impl ConicBackend for InteriorPoint {
    fn solve(&self, p: &ConicProblem) -> SolveReport {
        solve(p, &self.opts)
    }
}

struct PsdData {
    m: usize,
    h: Mat,
    /// Per variable: full (both mirror positions) coefficient entries.
    vars: Vec<(usize, Vec<(usize, usize, f64)>)>,
}

struct Data {
    n: usize,
    c: Vector,
    b: Vector,
    a: Mat,
    lin_rows: Vec<Vec<(usize, f64)>>,
    h_lin: Vector,
    psd: Vec<PsdData>,
}

#[derive(Clone)]
struct Cv {
    lin: Vector,
    mats: Vec<Mat>,
}

impl Cv {
    fn zeros(d: &Data) -> Cv {
        Cv { lin: Vector::zeros(d.h_lin.len()), mats: d.psd.iter().map(|b| Mat::zeros(b.m, b.m)).collect() }
    }
    fn dot(&self, o: &Cv) -> f64 {
        self.lin.dot(&o.lin) + self.mats.iter().zip(&o.mats).map(|(a, b)| a.dot(b)).sum::<f64>()
    }
    fn axpy(&mut self, a: f64, o: &Cv) {
        self.lin.axpy(a, &o.lin, 1.0);
        for (m, om) in self.mats.iter_mut().zip(&o.mats) {
            *m += om * a;
        }
    }
    fn scaled(&self, a: f64) -> Cv {
        Cv { lin: &self.lin * a, mats: self.mats.iter().map(|m| m * a).collect() }
    }
    fn add(&self, o: &Cv) -> Cv {
        let mut r = self.clone();
        r.axpy(1.0, o);
        r
    }
}

impl Data {
    fn new(p: &ConicProblem) -> Data {
        let n = p.n_vars;
        let mut a = Mat::zeros(p.n_eq(), n);
        for &(r, v, val) in &p.a {
            a[(r, v)] += val;
        }
        let mut lin_rows = vec![Vec::new(); p.n_lin()];
        for &(r, v, val) in &p.g_lin {
            lin_rows[r].push((v, val));
        }
        let psd = p
            .psd
            .iter()
            .map(|blk| {
                let mut h = Mat::zeros(blk.size, blk.size);
                for &(r, s, v) in &blk.h {
                    h[(r, s)] += v;
                    if r != s {
                        h[(s, r)] += v;
                    }
                }
                let mut per: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n];
                for &(j, r, s, v) in &blk.g {
                    per[j].push((r, s, v));
                    if r != s {
                        per[j].push((s, r, v));
                    }
                }
                let vars = per.into_iter().enumerate().filter(|(_, e)| !e.is_empty()).collect();
                PsdData { m: blk.size, h, vars }
            })
            .collect();
        Data {
            n,
            c: Vector::from_column_slice(&p.c),
            b: Vector::from_column_slice(&p.b),
            a,
            lin_rows,
            h_lin: Vector::from_column_slice(&p.h_lin),
            psd,
        }
    }

    fn h(&self) -> Cv {
        Cv { lin: self.h_lin.clone(), mats: self.psd.iter().map(|b| b.h.clone()).collect() }
    }

    fn g_mul(&self, x: &Vector) -> Cv {
        let lin = Vector::from_iterator(
            self.lin_rows.len(),
            self.lin_rows.iter().map(|row| row.iter().map(|&(v, val)| val * x[v]).sum::<f64>()),
        );
        let mats = self
            .psd
            .iter()
            .map(|b| {
                let mut m = Mat::zeros(b.m, b.m);
                for (j, ents) in &b.vars {
                    let xj = x[*j];
                    if xj != 0.0 {
                        for &(r, s, v) in ents {
                            m[(r, s)] += xj * v;
                        }
                    }
                }
                m
            })
            .collect();
        Cv { lin, mats }
    }

    fn gt_mul(&self, z: &Cv) -> Vector {
        let mut out = Vector::zeros(self.n);
        for (row, zr) in self.lin_rows.iter().zip(z.lin.iter()) {
            for &(v, val) in row {
                out[v] += val * zr;
            }
        }
        for (b, zm) in self.psd.iter().zip(&z.mats) {
            for (j, ents) in &b.vars {
                out[*j] += ents.iter().map(|&(r, s, v)| v * zm[(r, s)]).sum::<f64>();
            }
        }
        out
    }

    fn degree(&self) -> f64 {
        (self.h_lin.len() + self.psd.iter().map(|b| b.m).sum::<usize>()) as f64
    }
}

/// Nesterov-Todd scaling: lin part W z = d∘z, PSD part W z = Rᵀ z R.
struct Scaling {
    d: Vector,
    lam_lin: Vector,
    r: Vec<Mat>,
    rinv: Vec<Mat>,
    lam: Vec<Vector>,
}

impl Scaling {
    fn identity(d: &Data) -> Scaling {
        Scaling {
            d: Vector::from_element(d.h_lin.len(), 1.0),
            lam_lin: Vector::from_element(d.h_lin.len(), 1.0),
            r: d.psd.iter().map(|b| Mat::identity(b.m, b.m)).collect(),
            rinv: d.psd.iter().map(|b| Mat::identity(b.m, b.m)).collect(),
            lam: d.psd.iter().map(|b| Vector::from_element(b.m, 1.0)).collect(),
        }
    }

    fn from_points(s: &Cv, z: &Cv) -> Option<Scaling> {
        let d = s.lin.zip_map(&z.lin, |a, b| (a / b).sqrt());
        let lam_lin = s.lin.zip_map(&z.lin, |a, b| (a * b).sqrt());
        let mut r = Vec::new();
        let mut rinv = Vec::new();
        let mut lam = Vec::new();
        for (sm, zm) in s.mats.iter().zip(&z.mats) {
            let (rt, rti, l) = nt_factor(sm, zm)?;
            r.push(rt);
            rinv.push(rti);
            lam.push(l);
        }
        Some(Scaling { d, lam_lin, r, rinv, lam })
    }

    fn lam_cv(&self) -> Cv {
        Cv { lin: self.lam_lin.clone(), mats: self.lam.iter().map(Mat::from_diagonal).collect() }
    }

    /// W z (scaled frame).
    fn w(&self, z: &Cv) -> Cv {
        Cv {
            lin: self.d.component_mul(&z.lin),
            mats: z.mats.iter().zip(&self.r).map(|(m, r)| r.transpose() * m * r).collect(),
        }
    }

    /// Wᵀ u (back to the original frame of s).
    fn wt(&self, u: &Cv) -> Cv {
        Cv {
            lin: self.d.component_mul(&u.lin),
            mats: u.mats.iter().zip(&self.r).map(|(m, r)| r * m * r.transpose()).collect(),
        }
    }

    /// W⁻ᵀ u.
    fn wt_inv(&self, u: &Cv) -> Cv {
        Cv {
            lin: u.lin.zip_map(&self.d, |a, d| a / d),
            mats: u.mats.iter().zip(&self.rinv).map(|(m, ri)| ri * m * ri.transpose()).collect(),
        }
    }

    /// (WᵀW)⁻¹ u.
    fn wtw_inv(&self, u: &Cv, p: &[Mat]) -> Cv {
        Cv {
            lin: u.lin.zip_map(&self.d, |a, d| a / (d * d)),
            mats: u.mats.iter().zip(p).map(|(m, p)| p * m * p).collect(),
        }
    }

    fn p_mats(&self) -> Vec<Mat> {
        self.rinv
            .iter()
            .map(|ri| {
                let mut p = ri.transpose() * ri;
                symmetrize(&mut p);
                p
            })
            .collect()
    }

    /// Moves to s̃ = λ + α ds, z̃ = λ + α dz (scaled frame) and rescales.
    fn update(&mut self, ds: &Cv, dz: &Cv, alpha: f64) -> Option<()> {
        for i in 0..self.lam_lin.len() {
            let s = self.lam_lin[i] + alpha * ds.lin[i];
            let z = self.lam_lin[i] + alpha * dz.lin[i];
            if !(s > 0.0 && z > 0.0) {
                return None;
            }
            self.d[i] *= (s / z).sqrt();
            self.lam_lin[i] = (s * z).sqrt();
        }
        for k in 0..self.r.len() {
            let l = Mat::from_diagonal(&self.lam[k]);
            let st = &l + &ds.mats[k] * alpha;
            let zt = &l + &dz.mats[k] * alpha;
            let (rt, rti, lam) = nt_factor(&st, &zt)?;
            self.r[k] = &self.r[k] * rt;
            self.rinv[k] = rti * &self.rinv[k];
            self.lam[k] = lam;
        }
        Some(())
    }
}

/// R with Rᵀ z R = R⁻¹ s R⁻ᵀ = diag(λ); returns (R, R⁻¹, λ).
fn nt_factor(s: &Mat, z: &Mat) -> Option<(Mat, Mat, Vector)> {
    let mut s = s.clone();
    let mut z = z.clone();
    symmetrize(&mut s);
    symmetrize(&mut z);
    let ls = Cholesky::new(s)?.l();
    let lz = Cholesky::new(z)?.l();
    let svd = SVD::new(lz.transpose() * &ls, true, true);
    let v = svd.v_t?.transpose();
    let sig = svd.singular_values;
    if sig.iter().any(|x| !(*x > 0.0)) {
        return None;
    }
    let isq = sig.map(|x| 1.0 / x.sqrt());
    let sq = sig.map(|x| x.sqrt());
    let r = &ls * &v * Mat::from_diagonal(&isq);
    let ls_inv = ls.solve_lower_triangular(&Mat::identity(ls.nrows(), ls.nrows()))?;
    let rinv = Mat::from_diagonal(&sq) * v.transpose() * ls_inv;
    Some((r, rinv, sig))
}

struct Kkt {
    chol: Cholesky<f64, Dyn>,
    kinv_at: Mat,
    schur: Option<Cholesky<f64, Dyn>>,
    p: Vec<Mat>,
    /// WᵀW on the PSD blocks, R Rᵀ.
    q: Vec<Mat>,
}

impl Kkt {
    fn factor(d: &Data, w: &Scaling) -> Option<Kkt> {
        let n = d.n;
        let p = w.p_mats();
        let mut h = Mat::zeros(n, n);
        for (row, di) in d.lin_rows.iter().zip(w.d.iter()) {
            let s = 1.0 / (di * di);
            for &(i, vi) in row {
                for &(j, vj) in row {
                    h[(i, j)] += s * vi * vj;
                }
            }
        }
        for (b, pm) in d.psd.iter().zip(&p) {
            let nv = b.vars.len();
            for ii in 0..nv {
                let (i, ei) = &b.vars[ii];
                for jj in ii..nv {
                    let (j, ej) = &b.vars[jj];
                    let mut acc = 0.0;
                    for &(r, s, v) in ei {
                        for &(r2, s2, v2) in ej {
                            acc += v * v2 * pm[(s, r2)] * pm[(s2, r)];
                        }
                    }
                    h[(*i, *j)] += acc;
                    if i != j {
                        h[(*j, *i)] += acc;
                    }
                }
            }
        }
        h += d.a.transpose() * &d.a;
        let scale = (0..n).fold(0.0f64, |m, i| m.max(h[(i, i)].abs())).max(1e-300);
        let mut reg = 0.0;
        let chol = loop {
            let mut hr = h.clone();
            for i in 0..n {
                hr[(i, i)] += reg;
            }
            if let Some(c) = Cholesky::new(hr) {
                break c;
            }
            reg = if reg == 0.0 { 1e-14 * scale } else { reg * 100.0 };
            if reg > 1e-4 * scale {
                return None;
            }
        };
        let kinv_at = chol.solve(&d.a.transpose());
        let schur = if d.a.nrows() > 0 {
            let mut s = &d.a * &kinv_at;
            symmetrize(&mut s);
            Some(Cholesky::new(s)?)
        } else {
            None
        };
        let q = w.r.iter().map(|r| r * r.transpose()).collect();
        Some(Kkt { chol, kinv_at, schur, p, q })
    }

    /// Solves [0 Aᵀ Gᵀ; A 0 0; G 0 −WᵀW][dx; dy; dz] = [r1; r2; r3].
    /// Solve with two rounds of iterative refinement on the full system.
    fn solve(&self, d: &Data, w: &Scaling, r1: &Vector, r2: &Vector, r3: &Cv) -> (Vector, Vector, Cv) {
        let (mut x, mut y, mut z) = self.solve_once(d, w, r1, r2, r3);
        let rhs = (r1.norm_squared() + r2.norm_squared() + r3.dot(r3)).sqrt();
        for _ in 0..2 {
            let (e1, e2, e3) = self.apply(d, w, &x, &y, &z);
            let (f1, f2) = (r1 - e1, r2 - e2);
            let f3 = r3.add(&e3.scaled(-1.0));
            let res = (f1.norm_squared() + f2.norm_squared() + f3.dot(&f3)).sqrt();
            if !(res > 1e-13 * rhs) {
                break;
            }
            let (c1, c2, c3) = self.solve_once(d, w, &f1, &f2, &f3);
            x += c1;
            y += c2;
            z.axpy(1.0, &c3);
        }
        (x, y, z)
    }

    /// [0 Aᵀ Gᵀ; A 0 0; G 0 −WᵀW] applied to (x, y, z).
    fn apply(&self, d: &Data, w: &Scaling, x: &Vector, y: &Vector, z: &Cv) -> (Vector, Vector, Cv) {
        let mut e1 = d.gt_mul(z);
        let e2 = if d.a.nrows() > 0 {
            e1 += d.a.transpose() * y;
            &d.a * x
        } else {
            Vector::zeros(0)
        };
        let mut e3 = d.g_mul(x);
        e3.lin -= z.lin.component_mul(&w.d).component_mul(&w.d);
        for ((m, zm), q) in e3.mats.iter_mut().zip(&z.mats).zip(&self.q) {
            *m -= q * zm * q;
        }
        (e1, e2, e3)
    }

    fn solve_once(&self, d: &Data, w: &Scaling, r1: &Vector, r2: &Vector, r3: &Cv) -> (Vector, Vector, Cv) {
        let r3w = w.wtw_inv(r3, &self.p);
        let mut t = r1 + d.gt_mul(&r3w);
        if d.a.nrows() > 0 {
            t += d.a.transpose() * r2;
        }
        let u = self.chol.solve(&t);
        let (dx, dy) = match &self.schur {
            Some(s) => {
                let dy = s.solve(&(&d.a * &u - r2));
                (u - &self.kinv_at * &dy, dy)
            }
            None => (u, Vector::zeros(0)),
        };
        let mut gdx = d.g_mul(&dx);
        gdx.axpy(-1.0, r3);
        let dz = w.wtw_inv(&gdx, &self.p);
        (dx, dy, dz)
    }
}

fn lam_circ(lam: &Cv, u: &Cv) -> Cv {
    // λ ∘ u with λ diagonal on PSD blocks
    Cv {
        lin: lam.lin.component_mul(&u.lin),
        mats: lam
            .mats
            .iter()
            .zip(&u.mats)
            .map(|(l, m)| Mat::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (l[(i, i)] + l[(j, j)]) * m[(i, j)]))
            .collect(),
    }
}

fn lam_div(lam: &Cv, u: &Cv) -> Cv {
    // solves λ ∘ x = u
    Cv {
        lin: u.lin.zip_map(&lam.lin, |a, l| a / l),
        mats: lam
            .mats
            .iter()
            .zip(&u.mats)
            .map(|(l, m)| Mat::from_fn(m.nrows(), m.ncols(), |i, j| 2.0 * m[(i, j)] / (l[(i, i)] + l[(j, j)])))
            .collect(),
    }
}

fn circ(u: &Cv, v: &Cv) -> Cv {
    Cv {
        lin: u.lin.component_mul(&v.lin),
        mats: u
            .mats
            .iter()
            .zip(&v.mats)
            .map(|(a, b)| {
                let mut m = (a * b + b * a) * 0.5;
                symmetrize(&mut m);
                m
            })
            .collect(),
    }
}

/// Largest α with λ + α u in the cone (∞ when unbounded).
fn max_step(lam: &Cv, u: &Cv) -> f64 {
    let mut a = f64::INFINITY;
    for (l, x) in lam.lin.iter().zip(u.lin.iter()) {
        if *x < 0.0 {
            a = a.min(-l / x);
        }
    }
    for (l, m) in lam.mats.iter().zip(&u.mats) {
        let n = m.nrows();
        let isq: Vec<f64> = (0..n).map(|i| 1.0 / l[(i, i)].sqrt()).collect();
        let t = Mat::from_fn(n, n, |i, j| isq[i] * m[(i, j)] * isq[j]);
        let (vals, _) = sym_eigen(&t);
        if let Some(&mn) = vals.first() {
            if mn < 0.0 {
                a = a.min(-1.0 / mn);
            }
        }
    }
    a
}

fn shift_interior(v: &mut Cv) {
    let mut worst = f64::NEG_INFINITY;
    for x in v.lin.iter() {
        worst = worst.max(-x);
    }
    for m in &v.mats {
        let (vals, _) = sym_eigen(m);
        if let Some(&mn) = vals.first() {
            worst = worst.max(-mn);
        }
    }
    if worst >= 0.0 || worst == f64::NEG_INFINITY {
        let t = if worst == f64::NEG_INFINITY { 1.0 } else { 1.0 + worst };
        for x in v.lin.iter_mut() {
            *x += t;
        }
        for m in v.mats.iter_mut() {
            for i in 0..m.nrows() {
                m[(i, i)] += t;
            }
        }
    }
}

#[cfg(feature = "std")]
fn now() -> Option<std::time::Instant> {
    Some(std::time::Instant::now())
}

#[cfg(feature = "std")]
fn elapsed(t: Option<std::time::Instant>) -> f64 {
    t.map(|t| t.elapsed().as_secs_f64()).unwrap_or(0.0)
}

#[cfg(not(feature = "std"))]
fn now() -> Option<()> {
    None
}

#[cfg(not(feature = "std"))]
fn elapsed(_: Option<()>) -> f64 {
    0.0
}

pub fn solve(p: &ConicProblem, opts: &SolverOptions) -> SolveReport {
    let t0 = now();
    if p.validate().is_err() {
        return SolveReport::failed(p, SolveStatus::NumericalFailure);
    }
    let mut rep = solve_inner(p, opts);
    rep.solve_time = elapsed(t0);
    rep
}

fn solve_inner(p: &ConicProblem, opts: &SolverOptions) -> SolveReport {
    let d = Data::new(p);
    let h = d.h();
    let nu = d.degree();
    let resx0 = d.c.norm().max(1.0);
    let resz0 = (d.b.norm_squared() + h.dot(&h)).sqrt().max(1.0);

    // starting point from two least-squares problems with W = I
    let w0 = Scaling::identity(&d);
    let Some(k0) = Kkt::factor(&d, &w0) else {
        return SolveReport::failed(p, SolveStatus::NumericalFailure);
    };
    let (mut x, _, zp) = k0.solve(&d, &w0, &Vector::zeros(d.n), &d.b, &h);
    let mut s = zp.scaled(-1.0);
    let (_, mut y, mut z) = k0.solve(&d, &w0, &(-&d.c), &Vector::zeros(d.b.len()), &Cv::zeros(&d));
    shift_interior(&mut s);
    shift_interior(&mut z);
    let mut tau = 1.0;
    let mut kappa = 1.0;
    let Some(mut w) = Scaling::from_points(&s, &z) else {
        return SolveReport::failed(p, SolveStatus::NumericalFailure);
    };

    let mut best: Option<(f64, SolveReport)> = None;
    let mut iters = 0;
    loop {
        let lam = w.lam_cv();
        let gap_raw = lam.dot(&lam);
        let mu = (gap_raw + tau * kappa) / (nu + 1.0);

        let gx = d.g_mul(&x);
        let gtz = d.gt_mul(&z);
        let aty = if !d.b.is_empty() { d.a.transpose() * &y } else { Vector::zeros(d.n) };
        let ax = if !d.b.is_empty() { &d.a * &x } else { Vector::zeros(0) };
        let rx = &aty + &gtz + &d.c * tau;
        let ry = &ax - &d.b * tau;
        let mut rz = s.add(&gx);
        rz.axpy(-tau, &h);
        let cx = d.c.dot(&x);
        let by = d.b.dot(&y);
        let hz = h.dot(&z);
        let rt = kappa + cx + by + hz;

        let pcost = cx / tau;
        let dcost = -(by + hz) / tau;
        let gap = s.dot(&z).abs() / (tau * tau);
        let pres = (ry.norm_squared() + rz.dot(&rz)).sqrt() / tau / resz0;
        let dres = rx.norm() / tau / resx0;
        let relgap = if pcost < 0.0 {
            gap / -pcost
        } else if dcost > 0.0 {
            gap / dcost
        } else {
            f64::INFINITY
        };

        let snapshot = |status: SolveStatus| -> SolveReport {
            let zt = z.scaled(1.0 / tau);
            SolveReport {
                status,
                x: (&x / tau).iter().copied().collect(),
                equality_duals: (&y / -tau).iter().copied().collect(),
                lin_duals: zt.lin.iter().copied().collect(),
                psd_duals: zt.mats.clone(),
                objective: pcost + p.c0,
                iterations: iters,
                solve_time: 0.0,
                primal_residual: pres,
                dual_residual: dres,
                gap,
            }
        };

        if pres <= opts.feastol && dres <= opts.feastol && (gap <= opts.abstol || relgap <= opts.reltol) {
            return snapshot(SolveStatus::Optimal);
        }
        let merit = pres.max(dres).max(gap.min(relgap));
        if best.as_ref().is_none_or(|(m, _)| merit < *m) {
            best = Some((merit, snapshot(SolveStatus::NearOptimal)));
        }

        // infeasibility certificates
        if hz + by < 0.0 {
            let pinf = (&aty + &gtz).norm() / resx0 / -(hz + by);
            if pinf <= opts.feastol {
                let mut r = snapshot(SolveStatus::Infeasible);
                r.x = vec![f64::NAN; d.n];
                r.objective = f64::INFINITY;
                return r;
            }
        }
        if cx < 0.0 {
            let gs = gx.add(&s);
            let dinf = (ax.norm_squared() + gs.dot(&gs)).sqrt() / resz0 / -cx;
            if dinf <= opts.feastol {
                let mut r = snapshot(SolveStatus::Unbounded);
                r.objective = f64::NEG_INFINITY;
                return r;
            }
        }

        if iters >= opts.max_iter {
            break;
        }
        iters += 1;

        let Some(kkt) = Kkt::factor(&d, &w) else { break };

        let (x1, y1, z1) = kkt.solve(&d, &w, &(-&d.c), &d.b, &h);
        let denom_base = d.c.dot(&x1) + d.b.dot(&y1) + h.dot(&z1);

        let lam_sq = lam_circ(&lam, &lam);
        let step_dirs = |sigma: f64, ds_target: &Cv, dk_target: f64| {
            let f = 1.0 - sigma;
            let bx = &rx * -f;
            let by_ = &ry * -f;
            let ld = lam_div(&lam, ds_target);
            let mut bz = rz.scaled(-f);
            bz.axpy(-1.0, &w.wt(&ld));
            let (x2, y2, z2) = kkt.solve(&d, &w, &bx, &by_, &bz);
            let num = dk_target + tau * f * rt + tau * (d.c.dot(&x2) + d.b.dot(&y2) + h.dot(&z2));
            let den = kappa - tau * denom_base;
            let dtau = num / den;
            let dx = &x2 + &x1 * dtau;
            let dy = &y2 + &y1 * dtau;
            let mut dzv = z2.clone();
            dzv.axpy(dtau, &z1);
            let dkappa = (dk_target - kappa * dtau) / tau;
            let dzs = w.w(&dzv);
            // ds from the linear equation so that primal residuals stay exact
            let mut ds = rz.scaled(-f);
            ds.axpy(-1.0, &d.g_mul(&dx));
            ds.axpy(dtau, &h);
            let dss = w.wt_inv(&ds);
            (dx, dy, dss, dzs, dtau, dkappa, dzv, ds)
        };

        // predictor
        let (_, _, ds_a, dz_a, dt_a, dk_a, _, _) = step_dirs(0.0, &lam_sq.scaled(-1.0), -tau * kappa);
        let mut amax = max_step(&lam, &ds_a).min(max_step(&lam, &dz_a));
        if dt_a < 0.0 {
            amax = amax.min(-tau / dt_a);
        }
        if dk_a < 0.0 {
            amax = amax.min(-kappa / dk_a);
        }
        let a_aff = amax.min(1.0);
        let sigma = (1.0 - a_aff).powi(3).clamp(0.0, 1.0);

        // corrector
        let mut target = lam_sq.scaled(-1.0);
        target.axpy(-1.0, &circ(&ds_a, &dz_a));
        let idm = Cv {
            lin: Vector::from_element(lam.lin.len(), sigma * mu),
            mats: lam.mats.iter().map(|m| Mat::identity(m.nrows(), m.nrows()) * (sigma * mu)).collect(),
        };
        target = target.add(&idm);
        let dk_target = -tau * kappa + sigma * mu - dt_a * dk_a;
        let (dx, dy, ds, dz, dt, dk, dz_orig, ds_orig) = step_dirs(sigma, &target, dk_target);
        let mut amax = max_step(&lam, &ds).min(max_step(&lam, &dz));
        if dt < 0.0 {
            amax = amax.min(-tau / dt);
        }
        if dk < 0.0 {
            amax = amax.min(-kappa / dk);
        }
        let alpha = (opts.step * amax).min(1.0);
        if !(alpha > 1e-12) {
            break;
        }
        x.axpy(alpha, &dx, 1.0);
        y.axpy(alpha, &dy, 1.0);
        tau += alpha * dt;
        kappa += alpha * dk;
        s.axpy(alpha, &ds_orig);
        z.axpy(alpha, &dz_orig);
        if w.update(&ds, &dz, alpha).is_none() || !(tau > 0.0) || !(kappa > 0.0) {
            break;
        }
        if !x.iter().all(|v| v.is_finite()) {
            break;
        }
    }

    match best {
        Some((merit, mut r)) => {
            r.iterations = iters;
            r.status = if merit <= opts.near_tol { SolveStatus::NearOptimal } else { SolveStatus::NumericalFailure };
            r
        }
        None => SolveReport::failed(p, SolveStatus::NumericalFailure),
    }
}
