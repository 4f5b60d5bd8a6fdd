//! Multi-harmonic periodic loads stored as complex Fourier coefficients c_1..c_N.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent on f64 whenever std is linked
use num_traits::Float;

use crate::fem::GroundStructure;
use crate::linalg::{c, CVec, Vector};

#[derive(Clone, Debug, PartialEq)]
pub enum LoadError {
    FixedDof(usize),
    HarmonicOutOfRange { k: usize, n: usize },
    LengthMismatch { expected: usize, got: usize },
    FrequencyMismatch,
    NotHarmonic,
    BadParameter(&'static str),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::FixedDof(d) => write!(f, "dof {d} is supported and cannot be loaded"),
            LoadError::HarmonicOutOfRange { k, n } => write!(f, "harmonic {k} outside 1..={n}"),
            LoadError::LengthMismatch { expected, got } => {
                write!(f, "coefficient vector has length {got}, expected {expected}")
            }
            LoadError::FrequencyMismatch => write!(f, "loads must share the base frequency"),
            LoadError::NotHarmonic => {
                write!(f, "frequencies are not integer multiples of a common base frequency")
            }
            LoadError::BadParameter(p) => write!(f, "invalid parameter: {p}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LoadError {}

/// f(t) = Σ_{k=-N..N} c_k e^{ikω₀t} with c_{-k} = conj(c_k) and c_0 = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicLoad {
    pub omega0: f64,
    /// `coeffs[k-1]` is c_k for k = 1..=N.
    pub coeffs: Vec<CVec>,
}

impl HarmonicLoad {
    pub fn new(omega0: f64, coeffs: Vec<CVec>) -> Result<Self, LoadError> {
        if !(omega0 > 0.0) {
            return Err(LoadError::BadParameter("omega0 must be positive"));
        }
        if coeffs.is_empty() {
            return Err(LoadError::BadParameter("at least one harmonic is required"));
        }
        let n = coeffs[0].len();
        if let Some(v) = coeffs.iter().find(|v| v.len() != n) {
            return Err(LoadError::LengthMismatch { expected: n, got: v.len() });
        }
        Ok(HarmonicLoad { omega0, coeffs })
    }

    pub fn zeros(omega0: f64, n_harm: usize, n_free: usize) -> Result<Self, LoadError> {
        Self::new(omega0, (0..n_harm).map(|_| CVec::zeros(n_free)).collect())
    }

    /// Single harmonic from in-phase and quadrature parts: f(t) = f_R cos ωt + f_I sin ωt.
    pub fn from_real_imag(omega: f64, f_r: &Vector, f_i: &Vector) -> Result<Self, LoadError> {
        if f_r.len() != f_i.len() {
            return Err(LoadError::LengthMismatch { expected: f_r.len(), got: f_i.len() });
        }
        let c1 = CVec::from_fn(f_r.len(), |i, _| c(f_r[i], -f_i[i]) * 0.5);
        Self::new(omega, alloc::vec![c1])
    }

    pub fn n_harm(&self) -> usize {
        self.coeffs.len()
    }

    pub fn n_free(&self) -> usize {
        self.coeffs[0].len()
    }

    /// c_k for any integer k, zero outside -N..=N and at k = 0.
    pub fn coeff(&self, k: i64) -> CVec {
        let n = self.n_harm() as i64;
        if k == 0 || k.abs() > n {
            return CVec::zeros(self.n_free());
        }
        if k > 0 {
            self.coeffs[(k - 1) as usize].clone()
        } else {
            self.coeffs[(-k - 1) as usize].map(|z| z.conj())
        }
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega0
    }

    pub fn eval_time(&self, t: f64) -> Vector {
        let mut out = Vector::zeros(self.n_free());
        for (k, ck) in self.coeffs.iter().enumerate() {
            let ph = Complex64::from_polar(1.0, (k + 1) as f64 * self.omega0 * t);
            for i in 0..out.len() {
                out[i] += 2.0 * (ck[i] * ph).re;
            }
        }
        out
    }

    /// Raw complex partial sum over k = -N..N; its imaginary part is round-off only.
    pub fn eval_time_complex(&self, t: f64) -> CVec {
        let n = self.n_harm() as i64;
        let mut out = CVec::zeros(self.n_free());
        for k in -n..=n {
            let ph = Complex64::from_polar(1.0, k as f64 * self.omega0 * t);
            out += self.coeff(k) * ph;
        }
        out
    }

    /// Superposition. Both loads must share ω₀; the result has max(N₁, N₂) harmonics.
    pub fn add(&self, other: &HarmonicLoad) -> Result<HarmonicLoad, LoadError> {
        if (self.omega0 - other.omega0).abs() > 1e-12 * self.omega0.max(other.omega0) {
            return Err(LoadError::FrequencyMismatch);
        }
        if self.n_free() != other.n_free() {
            return Err(LoadError::LengthMismatch { expected: self.n_free(), got: other.n_free() });
        }
        let n = self.n_harm().max(other.n_harm());
        let coeffs = (1..=n as i64).map(|k| self.coeff(k) + other.coeff(k)).collect();
        HarmonicLoad::new(self.omega0, coeffs)
    }

    /// Same coefficients truncated or zero-padded to `n` harmonics.
    pub fn with_harmonics(&self, n: usize) -> HarmonicLoad {
        let coeffs = (1..=n as i64).map(|k| self.coeff(k)).collect();
        HarmonicLoad { omega0: self.omega0, coeffs }
    }

    pub fn scaled(&self, s: f64) -> HarmonicLoad {
        HarmonicLoad { omega0: self.omega0, coeffs: self.coeffs.iter().map(|v| v * c(s, 0.0)).collect() }
    }

    /// Build from (harmonic, global dof, coefficient) entries.
    pub fn from_entries(
        gs: &GroundStructure,
        omega0: f64,
        n_harm: usize,
        entries: &[(usize, usize, Complex64)],
    ) -> Result<Self, LoadError> {
        let mut load = Self::zeros(omega0, n_harm, gs.n_free())?;
        let map = gs.dof_map();
        for &(k, dof, v) in entries {
            if k == 0 || k > n_harm {
                return Err(LoadError::HarmonicOutOfRange { k, n: n_harm });
            }
            let idx = map.get(dof).copied().flatten().ok_or(LoadError::FixedDof(dof))?;
            load.coeffs[k - 1][idx] += v;
        }
        Ok(load)
    }

    /// Nonzero (harmonic, global dof, value) entries.
    pub fn to_entries(&self, gs: &GroundStructure) -> Vec<(usize, usize, Complex64)> {
        let free: Vec<usize> =
            gs.dof_map().iter().enumerate().filter_map(|(d, m)| m.map(|_| d)).collect();
        let mut out = Vec::new();
        for (k, ck) in self.coeffs.iter().enumerate() {
            for (i, v) in ck.iter().enumerate() {
                if *v != c(0.0, 0.0) {
                    out.push((k + 1, free[i], *v));
                }
            }
        }
        out
    }
}

fn free_pair(gs: &GroundStructure, node: usize) -> Result<(usize, usize), LoadError> {
    if node >= gs.nodes.len() {
        return Err(LoadError::BadParameter("node index out of range"));
    }
    let map = gs.dof_map();
    let x = map[2 * node].ok_or(LoadError::FixedDof(2 * node))?;
    let y = map[2 * node + 1].ok_or(LoadError::FixedDof(2 * node + 1))?;
    Ok((x, y))
}

/// A force of constant magnitude `amplitude` rotating at n·ω₀ with phase φ:
/// f(t) = amplitude·(cos(nω₀t + φ), sin(nω₀t + φ)).
pub fn rotating_load(
    gs: &GroundStructure,
    node: usize,
    amplitude: f64,
    harmonic: usize,
    phase: f64,
    omega0: f64,
    n_harm: usize,
) -> Result<HarmonicLoad, LoadError> {
    if harmonic == 0 || harmonic > n_harm {
        return Err(LoadError::HarmonicOutOfRange { k: harmonic, n: n_harm });
    }
    let (ix, iy) = free_pair(gs, node)?;
    let mut load = HarmonicLoad::zeros(omega0, n_harm, gs.n_free())?;
    let e = Complex64::from_polar(amplitude, phase) * 0.5;
    load.coeffs[harmonic - 1][ix] = e;
    load.coeffs[harmonic - 1][iy] = e / c(0.0, 1.0);
    Ok(load)
}

/// Unit square wave (−1 on (−T/2, 0], +1 on (0, T/2]) delayed by `delay`, on one dof,
/// truncated to `n_trunc` harmonics.
pub fn square_wave_load(
    gs: &GroundStructure,
    node: usize,
    axis: usize,
    period: f64,
    n_trunc: usize,
    delay: f64,
) -> Result<HarmonicLoad, LoadError> {
    if !(period > 0.0) || n_trunc == 0 || axis > 1 {
        return Err(LoadError::BadParameter("period > 0, n_trunc >= 1, axis in {0, 1}"));
    }
    let dof = 2 * node + axis;
    let idx = gs.dof_map().get(dof).copied().flatten().ok_or(LoadError::FixedDof(dof))?;
    let omega = 2.0 * PI / period;
    let mut load = HarmonicLoad::zeros(omega, n_trunc, gs.n_free())?;
    for k in 1..=n_trunc {
        load.coeffs[k - 1][idx] = square_wave_coeff(k, omega, delay);
    }
    Ok(load)
}

pub fn square_wave_coeff(k: usize, omega: f64, delay: f64) -> Complex64 {
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let base = c(0.0, 1.0 / PI) * ((sign - 1.0) / k as f64);
    base * Complex64::from_polar(1.0, -(k as f64) * omega * delay)
}

/// Base frequency ω₀ with ω₁ = n₁ω₀, ω₂ = n₂ω₀ and gcd(n₁, n₂) = 1.
pub fn harmonic_base(omega1: f64, omega2: f64, max_den: u64, tol: f64) -> Result<(f64, usize, usize), LoadError> {
    if !(omega1 > 0.0) || !(omega2 > 0.0) {
        return Err(LoadError::BadParameter("frequencies must be positive"));
    }
    let r = omega1 / omega2;
    // continued-fraction convergents of r
    let (mut h0, mut h1, mut k0, mut k1) = (0u64, 1u64, 1u64, 0u64);
    let mut x = r;
    for _ in 0..64 {
        let a = x.floor();
        let ai = a as u64;
        let h2 = ai.saturating_mul(h1).saturating_add(h0);
        let k2 = ai.saturating_mul(k1).saturating_add(k0);
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if ((h1 as f64) / (k1 as f64) - r).abs() <= tol * r {
            let omega0 = omega1 / h1 as f64;
            return Ok((omega0, h1 as usize, k1 as usize));
        }
        let frac = x - a;
        if frac.abs() < 1e-300 {
            break;
        }
        x = 1.0 / frac;
    }
    Err(LoadError::NotHarmonic)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_ratios() {
        let (w0, n1, n2) = harmonic_base(13.125, 15.0, 1_000_000, 1e-9).unwrap();
        assert_eq!((n1, n2), (7, 8));
        assert!((w0 - 1.875).abs() < 1e-12);
        let (w0, n1, n2) = harmonic_base(15.0, 15.0, 1_000_000, 1e-9).unwrap();
        assert_eq!((n1, n2), (1, 1));
        assert!((w0 - 15.0).abs() < 1e-12);
    }

    #[test]
    fn irrational_ratio_rejected() {
        let r = harmonic_base(core::f64::consts::SQRT_2, 1.0, 1000, 1e-9);
        assert_eq!(r, Err(LoadError::NotHarmonic));
    }
}
