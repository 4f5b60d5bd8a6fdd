//! Solver-agnostic conic program:
//!
//! ```text
//! minimize    cᵀx + c0
//! subject to  A x = b
//!             h_l − G_l x ≥ 0                      (componentwise)
//!             H_k − Σ_j x_j G_kj ⪰ 0               (one LMI per PSD block)
//! ```
//!
//! Symmetric matrices are given by their upper-triangle entries (row ≤ col); an
//! off-diagonal entry stands for both mirror positions.

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VarBlock {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PsdBlock {
    pub name: String,
    pub size: usize,
    /// Constant term H as (row, col, value), row ≤ col.
    pub h: Vec<(usize, usize, f64)>,
    /// Coefficients G_j as (var, row, col, value), row ≤ col.
    pub g: Vec<(usize, usize, usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConicProblem {
    pub name: String,
    pub n_vars: usize,
    pub blocks: Vec<VarBlock>,
    pub c: Vec<f64>,
    pub c0: f64,
    /// Equality rows as (row, var, value).
    pub a: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    /// Nonnegative rows as (row, var, value).
    pub g_lin: Vec<(usize, usize, f64)>,
    pub h_lin: Vec<f64>,
    pub psd: Vec<PsdBlock>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemError {
    VarOutOfRange(usize),
    RowOutOfRange(usize),
    EntryOutOfRange { block: usize },
    LowerTriangleEntry { block: usize },
    ObjectiveLength,
}

impl core::fmt::Display for ProblemError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ProblemError::VarOutOfRange(v) => write!(f, "variable {v} is not declared"),
            ProblemError::RowOutOfRange(r) => write!(f, "row {r} has no right-hand side"),
            ProblemError::EntryOutOfRange { block } => write!(f, "PSD block {block} has an entry outside its size"),
            ProblemError::LowerTriangleEntry { block } => write!(f, "PSD block {block} has a lower-triangle entry"),
            ProblemError::ObjectiveLength => write!(f, "objective length differs from the variable count"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ProblemError {}

impl ConicProblem {
    pub fn new(name: &str) -> Self {
        ConicProblem { name: name.into(), ..Default::default() }
    }

    /// Declares `len` new variables and returns the index of the first.
    pub fn add_block(&mut self, name: &str, len: usize) -> usize {
        let start = self.n_vars;
        self.blocks.push(VarBlock { name: name.into(), start, len });
        self.n_vars += len;
        self.c.resize(self.n_vars, 0.0);
        start
    }

    pub fn block(&self, name: &str) -> Option<&VarBlock> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn block_values<'a>(&self, name: &str, x: &'a [f64]) -> Option<&'a [f64]> {
        self.block(name).map(|b| &x[b.start..b.start + b.len])
    }

    /// Appends an equality row Σ coef·x = rhs, returning its index.
    pub fn add_eq(&mut self, terms: &[(usize, f64)], rhs: f64) -> usize {
        let r = self.b.len();
        for &(v, val) in terms {
            if val != 0.0 {
                self.a.push((r, v, val));
            }
        }
        self.b.push(rhs);
        r
    }

    /// Appends a row rhs − Σ coef·x ≥ 0.
    pub fn add_nonneg(&mut self, terms: &[(usize, f64)], rhs: f64) -> usize {
        let r = self.h_lin.len();
        for &(v, val) in terms {
            if val != 0.0 {
                self.g_lin.push((r, v, val));
            }
        }
        self.h_lin.push(rhs);
        r
    }

    pub fn n_eq(&self) -> usize {
        self.b.len()
    }

    pub fn n_lin(&self) -> usize {
        self.h_lin.len()
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.c.len() != self.n_vars {
            return Err(ProblemError::ObjectiveLength);
        }
        for &(r, v, _) in &self.a {
            if v >= self.n_vars {
                return Err(ProblemError::VarOutOfRange(v));
            }
            if r >= self.b.len() {
                return Err(ProblemError::RowOutOfRange(r));
            }
        }
        for &(r, v, _) in &self.g_lin {
            if v >= self.n_vars {
                return Err(ProblemError::VarOutOfRange(v));
            }
            if r >= self.h_lin.len() {
                return Err(ProblemError::RowOutOfRange(r));
            }
        }
        for (k, blk) in self.psd.iter().enumerate() {
            for &(r, s, _) in &blk.h {
                if r >= blk.size || s >= blk.size {
                    return Err(ProblemError::EntryOutOfRange { block: k });
                }
                if r > s {
                    return Err(ProblemError::LowerTriangleEntry { block: k });
                }
            }
            for &(v, r, s, _) in &blk.g {
                if v >= self.n_vars {
                    return Err(ProblemError::VarOutOfRange(v));
                }
                if r >= blk.size || s >= blk.size {
                    return Err(ProblemError::EntryOutOfRange { block: k });
                }
                if r > s {
                    return Err(ProblemError::LowerTriangleEntry { block: k });
                }
            }
        }
        Ok(())
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum::<f64>() + self.c0
    }

    /// Dense value of the k-th LMI slack H − Σ x_j G_j.
    pub fn psd_slack(&self, k: usize, x: &[f64]) -> crate::linalg::Mat {
        let blk = &self.psd[k];
        let mut m = crate::linalg::Mat::zeros(blk.size, blk.size);
        for &(r, s, v) in &blk.h {
            m[(r, s)] += v;
            if r != s {
                m[(s, r)] += v;
            }
        }
        for &(j, r, s, v) in &blk.g {
            m[(r, s)] -= x[j] * v;
            if r != s {
                m[(s, r)] -= x[j] * v;
            }
        }
        m
    }

    /// Largest violation of the equalities, the linear rows and the LMIs at x.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut ax = alloc::vec![0.0; self.b.len()];
        for &(r, v, val) in &self.a {
            ax[r] += val * x[v];
        }
        let mut worst = ax.iter().zip(&self.b).fold(0.0f64, |m, (l, r)| m.max((l - r).abs()));
        let mut gx = self.h_lin.clone();
        for &(r, v, val) in &self.g_lin {
            gx[r] -= val * x[v];
        }
        worst = gx.iter().fold(worst, |m, s| m.max(-s));
        for k in 0..self.psd.len() {
            let e = crate::linalg::min_eigenvalue(&self.psd_slack(k, x));
            worst = worst.max(-e);
        }
        worst
    }
}
