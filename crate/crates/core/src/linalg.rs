//! Dense helpers on top of nalgebra: sorted symmetric eigensolves, a rank-revealing
//! pseudo-inverse and the projected generalized eigenproblem.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;
pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Relative cutoff used by the pseudo-inverse and the kernel detection of `M(a)`.
pub const RANK_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn symmetrize(m: &mut Mat) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn sym_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let mut s = m.clone();
    symmetrize(&mut s);
    let eig = SymmetricEigen::new(s);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = Mat::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn sym_eigenvalues(m: &Mat) -> Vec<f64> {
    sym_eigen(m).0
}

pub fn min_eigenvalue(m: &Mat) -> f64 {
    sym_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Eigendecomposition of a Hermitian matrix, ascending.
pub fn herm_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    let mut s = h.clone();
    for i in 0..n {
        s[(i, i)] = c(s[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = (s[(i, j)] + s[(j, i)].conj()) * 0.5;
            s[(i, j)] = v;
            s[(j, i)] = v.conj();
        }
    }
    let eig = SymmetricEigen::new(s);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn is_hermitian(h: &CMat, tol: f64) -> bool {
    if h.nrows() != h.ncols() {
        return false;
    }
    let scale = h.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    for i in 0..h.nrows() {
        for j in i..h.ncols() {
            if (h[(i, j)] - h[(j, i)].conj()).norm() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// Moore-Penrose pseudo-inverse of a real symmetric matrix, kept in factored form.
#[derive(Clone, Debug)]
pub struct SymPinv {
    vals: Vec<f64>,
    vecs: Mat,
    keep: Vec<bool>,
}

impl SymPinv {
    pub fn new(m: &Mat) -> Self {
        Self::with_tol(m, RANK_TOL)
    }

    pub fn with_tol(m: &Mat, rel: f64) -> Self {
        let (vals, vecs) = sym_eigen(m);
        let smax = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let keep = vals.iter().map(|v| smax > 0.0 && v.abs() > rel * smax).collect();
        SymPinv { vals, vecs, keep }
    }

    pub fn rank(&self) -> usize {
        self.keep.iter().filter(|k| **k).count()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.vals
    }

    pub fn apply(&self, b: &Vector) -> Vector {
        let mut out = Vector::zeros(b.len());
        for (k, keep) in self.keep.iter().enumerate() {
            if *keep {
                let col = self.vecs.column(k);
                let coef = col.dot(b) / self.vals[k];
                out.axpy(coef, &col, 1.0);
            }
        }
        out
    }

    pub fn apply_c(&self, b: &CVec) -> CVec {
        let re = self.apply(&b.map(|z| z.re));
        let im = self.apply(&b.map(|z| z.im));
        CVec::from_fn(b.len(), |i, _| c(re[i], im[i]))
    }

    /// Norm of the part of `b` outside the numerical range.
    pub fn range_residual(&self, b: &CVec) -> f64 {
        let mut proj = CVec::zeros(b.len());
        for (k, keep) in self.keep.iter().enumerate() {
            if *keep {
                let col = self.vecs.column(k).map(|v| c(v, 0.0));
                let coef = col.dotc(b);
                proj.axpy(coef, &col, c(1.0, 0.0));
            }
        }
        (b - proj).norm()
    }

    /// Orthonormal basis of the numerical kernel.
    pub fn kernel_basis(&self) -> Mat {
        let cols: Vec<usize> = (0..self.keep.len()).filter(|&k| !self.keep[k]).collect();
        Mat::from_fn(self.vecs.nrows(), cols.len(), |i, j| self.vecs[(i, cols[j])])
    }

    pub fn matrix(&self) -> Mat {
        let n = self.vals.len();
        let mut out = Mat::zeros(n, n);
        for (k, keep) in self.keep.iter().enumerate() {
            if *keep {
                let col = self.vecs.column(k);
                out.ger(1.0 / self.vals[k], &col, &col, 1.0);
            }
        }
        out
    }
}

/// Orthonormal basis of the numerical range of a PSD matrix.
pub fn range_basis(m: &Mat, rel: f64) -> Mat {
    let (vals, vecs) = sym_eigen(m);
    let vmax = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let cols: Vec<usize> = (0..vals.len()).filter(|&k| vmax > 0.0 && vals[k] > rel * vmax).collect();
    let mut p = Mat::zeros(m.nrows(), cols.len());
    for (j, &k) in cols.iter().enumerate() {
        p.set_column(j, &vecs.column(k));
    }
    p
}

/// Ascending eigenvalues of `K w = λ M w` restricted to range(M).
/// Returns `None` when `M` is numerically zero.
pub fn projected_generalized_eigenvalues(k: &Mat, m: &Mat) -> Option<Vec<f64>> {
    let p = range_basis(m, RANK_TOL);
    if p.ncols() == 0 {
        return None;
    }
    let mp = p.transpose() * m * &p;
    let kp = p.transpose() * k * &p;
    let chol = nalgebra::Cholesky::new(mp)?;
    let l = chol.l();
    let linv = l.clone().try_inverse()?;
    let a = &linv * kp * linv.transpose();
    Some(sym_eigenvalues(&a))
}

pub fn cdot_t(a: &CVec, b: &CVec) -> Complex64 {
    a.iter().zip(b.iter()).fold(c(0.0, 0.0), |acc, (x, y)| acc + x * y)
}

pub fn to_complex(v: &Vector) -> CVec {
    v.map(|x| c(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_of_singular_diagonal() {
        let m = Mat::from_diagonal(&Vector::from_vec(alloc::vec![2.0, 0.0, 4.0]));
        let p = SymPinv::new(&m);
        assert_eq!(p.rank(), 2);
        let x = p.apply(&Vector::from_vec(alloc::vec![2.0, 5.0, 4.0]));
        assert!((x[0] - 1.0).abs() < 1e-14 && x[1].abs() < 1e-14 && (x[2] - 1.0).abs() < 1e-14);
        let r = p.range_residual(&to_complex(&Vector::from_vec(alloc::vec![0.0, 3.0, 0.0])));
        assert!((r - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_is_sorted() {
        let m = Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let v = sym_eigenvalues(&m);
        assert!((v[0] - 1.0).abs() < 1e-12 && (v[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn projected_pencil_skips_massless_dofs() {
        let k = Mat::from_diagonal(&Vector::from_vec(alloc::vec![4.0, 0.0]));
        let m = Mat::from_diagonal(&Vector::from_vec(alloc::vec![1.0, 0.0]));
        let e = projected_generalized_eigenvalues(&k, &m).unwrap();
        assert_eq!(e.len(), 1);
        assert!((e[0] - 4.0).abs() < 1e-12);
    }
}
