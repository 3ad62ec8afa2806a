//! Full inverse pipeline: diagonal of `K_N` on a grid, `q_N = 2 d/dx K_N(x, x)`,
//! boundary constants and the optional ϖ centering shift.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm_solver::KnEvaluator;
use crate::spectral_data::{trivial_lambda, SpectralData};
use crate::trig_kernel::KernelFN;

pub const MIN_GRID: usize = 8;
pub const DEFAULT_GRID: usize = 600;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shift {
    None,
    /// `ϖ = λ_{N−1} − (N−1)²`.
    #[default]
    Auto,
    /// Mean of `λ_n − n²` over the upper half of the stored indices.
    Tail,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Central2,
    Central4,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReconstructOptions {
    pub shift: Shift,
    pub scheme: Scheme,
    /// Take `H` from the asymptotic limit formula instead of `−K(π, π)`.
    pub h_from_limit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub grid: Vec<f64>,
    pub k_diag: Vec<f64>,
    pub q: Vec<f64>,
    pub h: f64,
    #[serde(rename = "H")]
    pub big_h: f64,
    pub varpi: f64,
    #[serde(rename = "N")]
    pub n_used: usize,
}

impl Reconstruction {
    pub fn spacing(&self) -> f64 {
        PI / (self.grid.len() - 1) as f64
    }
}

/// `m + 1` equispaced nodes on `[0, π]`, with both endpoints exact.
pub fn uniform_grid(m: usize) -> Vec<f64> {
    (0..=m)
        .map(|i| if i == m { PI } else { i as f64 * PI / m as f64 })
        .collect()
}

/// `ϖ = λ_{N−1} − (N−1)²` for `N` stored pairs.
pub fn varpi(data: &SpectralData) -> f64 {
    let last = data.len() - 1;
    data.lambda()[last] - trivial_lambda(last)
}

/// Mean of `λ_n − n²` over `n ∈ [N/2, N)`; less sensitive than [`varpi`] to
/// the `O(1/n)` oscillation of `λ_n − n²` for non-smooth potentials.
pub fn tail_varpi(data: &SpectralData) -> f64 {
    let len = data.len();
    let lo = len / 2;
    let sum: f64 = (lo..len)
        .map(|n| data.lambda()[n] - trivial_lambda(n))
        .sum();
    sum / (len - lo) as f64
}

pub fn reconstruct(
    data: &SpectralData,
    m: usize,
    opts: ReconstructOptions,
) -> Result<Reconstruction> {
    if m < MIN_GRID {
        return Err(Error::GridTooSmall(m));
    }
    let shift = match opts.shift {
        Shift::None => 0.0,
        Shift::Auto => varpi(data),
        Shift::Tail => tail_varpi(data),
    };
    let centered = if shift == 0.0 {
        data.clone()
    } else {
        data.shifted(-shift)?
    };
    let ev = KnEvaluator::new(KernelFN::new(&centered)?);

    let grid = uniform_grid(m);
    let k_diag = grid
        .par_iter()
        .map(|&x| ev.diagonal(x))
        .collect::<Result<Vec<f64>>>()?;

    let dk = differentiate_diagonal(&k_diag, PI / m as f64, opts.scheme)?;
    let q = dk.iter().map(|d| 2.0 * d + shift).collect();

    let h = k_diag[0];
    let k_pi = k_diag[m];
    let big_h = if opts.h_from_limit {
        let n = centered.len() - 1;
        let l = centered.lambda()[n];
        let root = l.signum() * l.abs().sqrt();
        PI * (n + 1) as f64 * (root - n as f64) - k_pi
    } else {
        -k_pi
    };

    Ok(Reconstruction {
        grid,
        k_diag,
        q,
        h,
        big_h,
        varpi: shift,
        n_used: data.len(),
    })
}

/// Finite-difference derivative of equispaced samples with spacing `step`.
///
/// `Central2`: 3-point centered interior with 4-point one-sided closures.
/// `Central4`: 5-point centered interior with 5-point closures on the first and
/// last two nodes.
pub fn differentiate_diagonal(f: &[f64], step: f64, scheme: Scheme) -> Result<Vec<f64>> {
    let len = f.len();
    if len < MIN_GRID + 1 {
        return Err(Error::GridTooSmall(len.saturating_sub(1)));
    }
    let mut d = vec![0.0; len];
    let last = len - 1;
    match scheme {
        Scheme::Central2 => {
            // closures written in first differences so constants map to exactly 0
            let c = 1.0 / (6.0 * step);
            let fwd = |i: usize| f[i + 1] - f[i];
            let bwd = |i: usize| f[i] - f[i - 1];
            d[0] = c * (11.0 * fwd(0) - 7.0 * fwd(1) + 2.0 * fwd(2));
            d[last] = c * (11.0 * bwd(last) - 7.0 * bwd(last - 1) + 2.0 * bwd(last - 2));
            for i in 1..last {
                d[i] = (f[i + 1] - f[i - 1]) / (2.0 * step);
            }
        }
        Scheme::Central4 => {
            let c = 1.0 / (12.0 * step);
            let fwd = |i: usize| f[i + 1] - f[i];
            let bwd = |i: usize| f[i] - f[i - 1];
            d[0] = c * (25.0 * fwd(0) - 23.0 * fwd(1) + 13.0 * fwd(2) - 3.0 * fwd(3));
            d[1] = c * (3.0 * fwd(0) + 13.0 * fwd(1) - 5.0 * fwd(2) + fwd(3));
            d[last] = c
                * (25.0 * bwd(last) - 23.0 * bwd(last - 1) + 13.0 * bwd(last - 2)
                    - 3.0 * bwd(last - 3));
            d[last - 1] =
                c * (3.0 * bwd(last) + 13.0 * bwd(last - 1) - 5.0 * bwd(last - 2) + bwd(last - 3));
            for i in 2..last - 1 {
                d[i] = c * (8.0 * (f[i + 1] - f[i - 1]) - (f[i + 2] - f[i - 2]));
            }
        }
    }
    Ok(d)
}

/// `2‖k1 − k2‖_{L^p[0, π]}` by the trapezoid rule (`p = ∞` gives the grid maximum).
pub fn sobolev_diagnostic(k1: &[f64], k2: &[f64], step: f64, p: f64) -> Result<f64> {
    if k1.len() != k2.len() {
        return Err(Error::LengthMismatch {
            left: k1.len(),
            right: k2.len(),
        });
    }
    if !(p >= 1.0) {
        return Err(Error::Validation(format!(
            "Lebesgue exponent must be >= 1, got {p}"
        )));
    }
    let diff = k1.iter().zip(k2).map(|(a, b)| (a - b).abs());
    if p.is_infinite() {
        return Ok(2.0 * diff.fold(0.0, f64::max));
    }
    let last = k1.len().saturating_sub(1);
    let integral: f64 = diff
        .enumerate()
        .map(|(i, d)| {
            let w = if i == 0 || i == last { 0.5 } else { 1.0 };
            w * d.powf(p)
        })
        .sum::<f64>()
        * step;
    Ok(2.0 * integral.powf(1.0 / p))
}
