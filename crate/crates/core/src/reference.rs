//! Dense log-barrier method for tiny conic problems, used to cross-check the
//! primal-dual backend and, above all, its equality duals.
//!
//! Phase I minimizes a shift u with S(x) + uI ≻ 0 to find a strictly feasible
//! point; phase II follows the central path of t·cᵀx − log det S(x) − Σ log s(x)
//! under Ax = b with equality-constrained Newton steps.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Cholesky;
#[allow(unused_imports)] // inherent on f64 whenever std is linked
use num_traits::Float;

use crate::conic::ConicProblem;
use crate::linalg::{Mat, Vector};
use crate::solver::{ConicBackend, SolveReport, SolveStatus};

/// Largest variable count the dense method accepts.
pub const MAX_VARS: usize = 200;

#[derive(Clone, Debug)]
pub struct DenseBarrier {
    /// Target bound on the duality gap, ν/t.
    pub gap_tol: f64,
    pub max_newton: usize,
}

impl Default for DenseBarrier {
    fn default() -> Self {
        DenseBarrier { gap_tol: 1e-10, max_newton: 2000 }
    }
}

impl ConicBackend for DenseBarrier {
    fn solve(&self, p: &ConicProblem) -> SolveReport {
        if p.validate().is_err() || p.n_vars > MAX_VARS {
            return SolveReport::failed(p, SolveStatus::NumericalFailure);
        }
        solve_dense(p, self)
    }
}

/// Constraint data in dense form, with an optional extra variable u that is added
/// to every slack (phase I).
#[derive(Clone)]
struct Dense {
    n: usize,
    a: Mat,
    b: Vector,
    g_lin: Mat,
    h_lin: Vector,
    h_psd: Vec<Mat>,
    g_psd: Vec<Vec<Mat>>,
}

impl Dense {
    fn new(p: &ConicProblem) -> Self {
        let n = p.n_vars;
        let mut a = Mat::zeros(p.n_eq(), n);
        for &(r, v, val) in &p.a {
            a[(r, v)] += val;
        }
        let mut g_lin = Mat::zeros(p.n_lin(), n);
        for &(r, v, val) in &p.g_lin {
            g_lin[(r, v)] += val;
        }
        let zero = vec![0.0; n];
        let h_psd = (0..p.psd.len()).map(|k| p.psd_slack(k, &zero)).collect();
        let g_psd = p
            .psd
            .iter()
            .map(|blk| {
                let mut gs = vec![Mat::zeros(blk.size, blk.size); n];
                for &(j, r, s, v) in &blk.g {
                    gs[j][(r, s)] += v;
                    if r != s {
                        gs[j][(s, r)] += v;
                    }
                }
                gs
            })
            .collect();
        Dense { n, a, b: Vector::from_vec(p.b.clone()), g_lin, h_lin: Vector::from_vec(p.h_lin.clone()), h_psd, g_psd }
    }

    fn degree(&self) -> f64 {
        (self.h_lin.len() + self.h_psd.iter().map(|m| m.nrows()).sum::<usize>()) as f64
    }

    /// Slacks at (x, u): s = h − Gx + u, S_k = H_k − Σ x_j G_kj + uI.
    fn slacks(&self, x: &Vector, u: f64) -> (Vector, Vec<Mat>) {
        let s = (&self.h_lin - &self.g_lin * x).add_scalar(u);
        let mats = self
            .h_psd
            .iter()
            .zip(&self.g_psd)
            .map(|(h, gs)| {
                let mut m = h.clone();
                for (j, g) in gs.iter().enumerate() {
                    if x[j] != 0.0 {
                        m -= g * x[j];
                    }
                }
                for i in 0..m.nrows() {
                    m[(i, i)] += u;
                }
                m
            })
            .collect();
        (s, mats)
    }

    fn interior(&self, x: &Vector, u: f64) -> bool {
        let (s, mats) = self.slacks(x, u);
        s.iter().all(|v| *v > 0.0) && mats.into_iter().all(|m| Cholesky::new(m).is_some())
    }

    /// Barrier value, gradient and Hessian in (x, u); the u column is dropped when
    /// `with_u` is false.
    fn barrier(&self, x: &Vector, u: f64, with_u: bool) -> Option<(f64, Vector, Mat)> {
        let nv = self.n + with_u as usize;
        let (s, mats) = self.slacks(x, u);
        if s.iter().any(|v| *v <= 0.0) {
            return None;
        }
        let mut val = -s.iter().map(|v| v.ln()).sum::<f64>();
        let mut grad = Vector::zeros(nv);
        let mut hess = Mat::zeros(nv, nv);
        // −log s_l: ∂/∂x = G_lᵀ/s, ∂/∂u = −1/s
        for l in 0..s.len() {
            let inv = 1.0 / s[l];
            let row: Vec<f64> = (0..nv).map(|j| if j < self.n { -self.g_lin[(l, j)] } else { 1.0 }).collect();
            for i in 0..nv {
                grad[i] -= row[i] * inv;
                for j in 0..nv {
                    hess[(i, j)] += row[i] * row[j] * inv * inv;
                }
            }
        }
        for (m, gs) in mats.into_iter().zip(&self.g_psd) {
            let chol = Cholesky::new(m)?;
            val -= 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
            let sinv = chol.inverse();
            let size = sinv.nrows();
            // dS/dx_j = −G_j, dS/du = I
            let mut dirs: Vec<Mat> = gs.iter().map(|g| -g).collect();
            if with_u {
                dirs.push(Mat::identity(size, size));
            }
            let prods: Vec<Mat> = dirs.iter().map(|d| &sinv * d).collect();
            for i in 0..nv {
                grad[i] -= prods[i].trace();
                for j in i..nv {
                    let v = prods[i].component_mul(&prods[j].transpose()).sum();
                    hess[(i, j)] += v;
                    hess[(j, i)] = hess[(i, j)];
                }
            }
        }
        Some((val, grad, hess))
    }
}

struct Centered {
    x: Vector,
    u: f64,
    newton: usize,
}

/// Minimizes t·cᵀ(x, u) + φ(x, u) over x ∈ x₀ + range(Z) from a strictly feasible start.
/// `z` has orthonormal columns spanning ker A, so Ax = b holds up to roundoff throughout.
/// With `with_u`, returns early once u < 0.
fn center(d: &Dense, z: &Mat, c: &Vector, t: f64, start: Centered, with_u: bool, max_newton: usize) -> Option<Centered> {
    let nv = d.n + with_u as usize;
    let r = z.ncols();
    let nr = r + with_u as usize;
    let mut zx = Mat::zeros(nv, nr);
    zx.view_mut((0, 0), (d.n, r)).copy_from(z);
    if with_u {
        zx[(d.n, r)] = 1.0;
    }
    let Centered { mut x, mut u, mut newton } = start;
    loop {
        if with_u && u < 0.0 {
            return Some(Centered { x, u, newton });
        }
        if nr == 0 {
            return Some(Centered { x, u, newton });
        }
        let (phi, g, h) = d.barrier(&x, u, with_u)?;
        let grad = zx.transpose() * (c * t + g);
        let hr = zx.transpose() * h * &zx;
        let dy = match Cholesky::new(hr.clone()) {
            Some(ch) => ch.solve(&(-&grad)),
            None => hr.lu().solve(&(-&grad))?,
        };
        if dy.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let decrement = -grad.dot(&dy);
        newton += 1;
        if decrement < 1e-9 {
            return Some(Centered { x, u, newton });
        }
        if newton >= max_newton {
            return None;
        }
        let step = &zx * dy;
        // backtracking on the change of t·cᵀv + φ, keeping strict feasibility;
        // differencing the linear part avoids cancellation at large t
        let slope = t * c.dot(&step);
        let mut alpha = 1.0;
        loop {
            let xn = &x + step.rows(0, d.n) * alpha;
            let un = if with_u { u + alpha * step[d.n] } else { u };
            if let Some((phin, _, _)) = d.barrier(&xn, un, with_u) {
                if alpha * slope + (phin - phi) <= -0.25 * alpha * decrement {
                    x = xn;
                    u = un;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-14 {
                return Some(Centered { x, u, newton });
            }
        }
    }
}

/// Orthonormal basis of the complement of range(q) in Rⁿ.
fn complete_basis(q: &Mat, n: usize) -> Mat {
    let proj = Mat::identity(n, n) - q * q.transpose();
    crate::linalg::range_basis(&proj, 1e-8)
}

fn solve_dense(p: &ConicProblem, opts: &DenseBarrier) -> SolveReport {
    let d = Dense::new(p);
    let nu = d.degree().max(1.0);
    let me = d.b.len();

    // least-squares start on Ax = b and an orthonormal basis of ker A
    let (mut x, z) = if me > 0 {
        let svd = d.a.clone().svd(true, true);
        let x = svd.solve(&d.b, 1e-12).unwrap_or_else(|_| Vector::zeros(d.n));
        if (&d.a * &x - &d.b).norm() > 1e-9 * (1.0 + d.b.norm()) {
            return SolveReport::failed(p, SolveStatus::Infeasible);
        }
        let smax = svd.singular_values.max();
        let full = d.a.transpose().svd(true, false);
        let u = full.u.unwrap();
        // columns of U beyond the rank of Aᵀ span ker A; a thin SVD drops them, so pad
        let rank = svd.singular_values.iter().filter(|v| **v > 1e-12 * smax).count();
        let q = complete_basis(&u.columns(0, rank).into_owned(), d.n);
        (x, q)
    } else {
        (Vector::zeros(d.n), Mat::identity(d.n, d.n))
    };

    let mut newton = 0;
    if !d.interior(&x, 0.0) {
        // phase I: minimize u
        let (s, mats) = d.slacks(&x, 0.0);
        let worst = mats
            .iter()
            .map(|m| -crate::linalg::min_eigenvalue(m))
            .chain(s.iter().map(|v| -v))
            .fold(0.0f64, f64::max);
        let mut u = worst + 1.0;
        let mut cu = Vector::zeros(d.n + 1);
        cu[d.n] = 1.0;
        let mut dd = d.clone();
        // u ≥ −1 and a box |x_j| ≤ R keep the phase I barrier bounded below;
        // each row reads h − Gx + u > 0
        let r = 1e4 * (1.0 + x.amax());
        let base = dd.g_lin.nrows();
        let mut h = dd.h_lin.iter().copied().collect::<Vec<_>>();
        h.push(1.0);
        h.extend(core::iter::repeat_n(r + 1.0, 2 * d.n));
        let mut g = Mat::zeros(base + 1 + 2 * d.n, d.n);
        g.view_mut((0, 0), (base, d.n)).copy_from(&dd.g_lin);
        for j in 0..d.n {
            g[(base + 1 + 2 * j, j)] = 1.0;
            g[(base + 2 + 2 * j, j)] = -1.0;
        }
        dd.h_lin = Vector::from_vec(h);
        dd.g_lin = g;
        let mut t = 1.0;
        let mut state = Centered { x: x.clone(), u, newton: 0 };
        loop {
            let Some(next) = center(&dd, &z, &cu, t, state, true, opts.max_newton) else {
                return SolveReport::failed(p, SolveStatus::NumericalFailure);
            };
            state = next;
            u = state.u;
            if u < 0.0 && d.interior(&state.x, 0.0) {
                break;
            }
            if (nu + 1.0) / t < 1e-10 {
                // u* ≥ 0: no strictly feasible point
                let mut r = SolveReport::failed(p, SolveStatus::Infeasible);
                r.iterations = state.newton;
                return r;
            }
            t *= 10.0;
        }
        x = state.x;
        newton = state.newton;
    }

    // phase II
    let c = Vector::from_vec(p.c.clone());
    let obj0 = c.dot(&x).abs().max(1.0);
    let mut t = nu / obj0;
    let mut state = Centered { x, u: 0.0, newton };
    loop {
        let Some(next) = center(&d, &z, &c, t, state, false, opts.max_newton) else {
            return SolveReport::failed(p, SolveStatus::NumericalFailure);
        };
        state = next;
        let obj = c.dot(&state.x);
        if obj < -1e12 {
            return SolveReport::failed(p, SolveStatus::Unbounded);
        }
        if nu / t <= opts.gap_tol * (1.0 + obj.abs()) {
            break;
        }
        t *= 10.0;
    }

    let (s, mats) = d.slacks(&state.x, 0.0);
    let ax = &d.a * &state.x;
    // stationarity t·c + ∇φ + Aᵀw = 0 in the least-squares sense
    let w = match d.barrier(&state.x, 0.0, false) {
        Some((_, g, _)) if me > 0 => {
            let rhs = -(&c * t + g);
            d.a.transpose().svd(true, true).solve(&rhs, 1e-12).unwrap_or_else(|_| Vector::zeros(me))
        }
        _ => Vector::zeros(me),
    };
    SolveReport {
        status: SolveStatus::Optimal,
        x: state.x.iter().copied().collect(),
        // ∂p*/∂b = −w/t
        equality_duals: w.iter().map(|v| -v / t).collect(),
        lin_duals: s.iter().map(|v| 1.0 / (t * v)).collect(),
        psd_duals: mats.into_iter().map(|m| m.try_inverse().unwrap_or_else(|| Mat::zeros(0, 0)) / t).collect(),
        objective: c.dot(&state.x) + p.c0,
        iterations: state.newton,
        solve_time: 0.0,
        primal_residual: (ax - &d.b).norm(),
        dual_residual: 0.0,
        gap: nu / t,
    }
}
