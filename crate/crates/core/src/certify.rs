//! A-priori error certificate for data with `ω = 0` and `ℓ²` remainders
//! bounded by `M`.
//!
//! The Riesz constant is obtained from the finite section
//! `A_J = (⟨g_j, f_i⟩)_{i,j ≤ J}` of the operator mapping the cosine basis
//! `f_n` to the data functions `g_n = α_n^{-1/2} cos(λ_n^{1/2} t)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_data::{decompose, validate, SpectralData};
use crate::trig_kernel::{atom_inner_product, TrigAtom};

pub const DEFAULT_K_CAP: u64 = 1_000_000;
pub const DEFAULT_J_CAP: usize = 10_000;

/// `C_M^(1) = M cosh(2πM)[(8π²/√6 + 2π)M + 5]`.
pub fn c_m1(m: f64) -> f64 {
    m * (2.0 * PI * m).cosh() * ((8.0 * PI * PI / 6f64.sqrt() + 2.0 * PI) * m + 5.0)
}

/// `(C_Ω, c)` for bound `M`.
pub fn hypothesis_constants(m: f64) -> (f64, f64) {
    let ch = (m * PI).cosh();
    let two_pi_m = 2.0 * PI * m;
    let c_omega = m * PI * ch * (1.5 * (1.0 + two_pi_m * two_pi_m + (2.0 + PI * m).powi(2))).sqrt();
    let c_eta = (PI / 2.0).powf(-0.5) * (2.0 / PI + m).sqrt() * m * (1.0 + m) * ch;
    (c_omega, c_eta)
}

/// `δ_J = max(4c log(J)/J, C_Ω/J)`.
pub fn delta_j(j: usize, m: f64) -> f64 {
    let (c_omega, c_eta) = hypothesis_constants(m);
    let jf = j as f64;
    (4.0 * c_eta * jf.ln() / jf).max(c_omega / jf)
}

/// `f_0 = π^{-1/2}`, `f_n = (2/π)^{1/2} cos(nt)`: the orthonormal cosine basis.
pub fn cosine_basis_atom(n: usize) -> TrigAtom {
    if n == 0 {
        TrigAtom::constant(PI.powf(-0.5))
    } else {
        TrigAtom::circular((2.0 / PI).sqrt(), n as f64)
    }
}

/// `g_n = α_n^{-1/2} cos(λ_n^{1/2} t)`, trivial beyond the stored prefix.
pub fn data_atom(data: &SpectralData, n: usize) -> TrigAtom {
    TrigAtom::from_eigenvalue(data.alpha_at(n).powf(-0.5), data.lambda_at(n))
}

/// `T_ij = ⟨g_j, f_i⟩_{L²[0, π]}`.
pub fn t_matrix_entry(data: &SpectralData, i: usize, j: usize) -> f64 {
    atom_inner_product(&data_atom(data, j), &cosine_basis_atom(i), PI)
}

/// `A_J = (T_ij)_{i,j=0}^{J}`.
pub fn t_matrix(data: &SpectralData, j: usize) -> DMatrix<f64> {
    let n = j + 1;
    let g: Vec<TrigAtom> = (0..n).map(|k| data_atom(data, k)).collect();
    let f: Vec<TrigAtom> = (0..n).map(cosine_basis_atom).collect();
    let entries: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|idx| atom_inner_product(&g[idx % n], &f[idx / n], PI))
        .collect();
    DMatrix::from_row_slice(n, n, &entries)
}

/// Smallest integer `k ≥ 1` with `A*A − k^{-2} I` positive definite, so that
/// `k − 1 ≤ ‖A^{-1}‖₂ < k` whenever `‖A^{-1}‖₂ ≥ 1`.
pub fn inverse_norm_bracket(a: &DMatrix<f64>, k_cap: u64) -> Result<u64> {
    let gram = a.transpose() * a;
    let n = gram.nrows();
    for k in 1..=k_cap {
        let shift = 1.0 / (k as f64 * k as f64);
        let mut b = gram.clone();
        for i in 0..n {
            b[(i, i)] -= shift;
        }
        if cholesky_succeeds(b) {
            return Ok(k);
        }
    }
    Err(Error::NumericallySingular { cap: k_cap })
}

/// Plain Cholesky with a strict `pivot > 0` test.
fn cholesky_succeeds(mut b: DMatrix<f64>) -> bool {
    let n = b.nrows();
    for j in 0..n {
        let mut pivot = b[(j, j)];
        for k in 0..j {
            pivot -= b[(j, k)] * b[(j, k)];
        }
        if !(pivot > 0.0) {
            return false;
        }
        let root = pivot.sqrt();
        b[(j, j)] = root;
        for i in j + 1..n {
            let mut v = b[(i, j)];
            for k in 0..j {
                v -= b[(i, k)] * b[(j, k)];
            }
            b[(i, j)] = v / root;
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszOptions {
    pub j_cap: usize,
    pub k_cap: u64,
}

impl Default for RieszOptions {
    fn default() -> Self {
        Self {
            j_cap: DEFAULT_J_CAP,
            k_cap: DEFAULT_K_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszConstant {
    #[serde(rename = "J")]
    pub j: usize,
    pub delta_j: f64,
    pub a_j: u64,
    #[serde(rename = "C_M2")]
    pub c_m2: f64,
}

/// First `J` tried by the Riesz search: the log branch of `δ_J` needs `J ≥ 3`
/// and the section estimate needs `J > 2M`.
fn first_j(m: f64) -> usize {
    if m == 0.0 {
        1
    } else {
        3usize.max((2.0 * m).floor() as usize + 1)
    }
}

pub fn riesz_constant(data: &SpectralData, m: f64, opts: RieszOptions) -> Result<RieszConstant> {
    check_bound(m)?;
    for j in first_j(m)..=opts.j_cap {
        let delta = delta_j(j, m);
        // a_J ≥ 1, so δ_J ≥ 1/2 can never pass the acceptance test below
        if delta >= 0.5 {
            continue;
        }
        let a_j = inverse_norm_bracket(&t_matrix(data, j), opts.k_cap)?;
        let a1 = (a_j + 1) as f64;
        if delta < 1.0 / a1 {
            return Ok(RieszConstant {
                j,
                delta_j: delta,
                a_j,
                c_m2: a1 / (1.0 - delta * a1),
            });
        }
    }
    Err(Error::RieszSearchExhausted { cap: opts.j_cap })
}

fn check_bound(m: f64) -> Result<()> {
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::Validation(format!(
            "bound M must be finite and >= 0, got {m}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "C_M1")]
    pub c_m1: f64,
    #[serde(rename = "C_Omega")]
    pub c_omega: f64,
    pub c_eta: f64,
    #[serde(rename = "J")]
    pub j: usize,
    #[serde(rename = "delta_J")]
    pub delta_j: f64,
    #[serde(rename = "a_J")]
    pub a_j: u64,
    #[serde(rename = "C_M2")]
    pub c_m2: f64,
    #[serde(rename = "N0")]
    pub n0: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub bound_q: f64,
    pub bound_h: f64,
    #[serde(rename = "bound_H")]
    pub bound_big_h: f64,
}

/// `N_0 = 2π(C_M^(1) C_M^(2))²`.
pub fn threshold(c1: f64, c2: f64) -> f64 {
    2.0 * PI * (c1 * c2).powi(2)
}

/// `W^{-1,∞}` bound on `q_N − q` for `N` data pairs.
pub fn q_bound(n: usize, c1: f64, c2: f64) -> f64 {
    let p = c1 * c2;
    2.0 / (n as f64).sqrt() * c1 * (PI.sqrt() + PI * p) * (1.0 + 2.0 * PI.powf(1.5) * p)
}

pub fn certify(data: &SpectralData, m: f64, n: usize) -> Result<Certificate> {
    certify_with(data, m, n, RieszOptions::default())
}

pub fn certify_with(
    data: &SpectralData,
    m: f64,
    n: usize,
    opts: RieszOptions,
) -> Result<Certificate> {
    check_bound(m)?;
    if !validate(data, Some(m))?.in_omega0m {
        let detail = match decompose(data, 0.0) {
            Ok(dec) => format!(
                "with omega = 0 the remainders have norms {:.6e} and {:.6e}, bound M = {m}",
                dec.kappa_norm(),
                dec.kappa_tilde_norm_centered(data.alpha_at(0))
            ),
            Err(e) => e.to_string(),
        };
        return Err(Error::NotInOmega0M(detail));
    }
    let c1 = c_m1(m);
    // a_J ≥ 1 forces C_M2 ≥ 2, which can already settle a refusal without
    // running the Riesz search; the reported N_0 is then this lower bound.
    let n0_floor = threshold(c1, 2.0);
    if m > 0.0 && n as f64 <= n0_floor {
        return Err(Error::BelowThreshold { n, n0: n0_floor });
    }
    let riesz = riesz_constant(data, m, opts)?;
    let n0 = threshold(c1, riesz.c_m2);
    if n as f64 <= n0 {
        return Err(Error::BelowThreshold { n, n0 });
    }
    let (c_omega, c_eta) = hypothesis_constants(m);
    let bound_q = q_bound(n, c1, riesz.c_m2);
    Ok(Certificate {
        m,
        c_m1: c1,
        c_omega,
        c_eta,
        j: riesz.j,
        delta_j: riesz.delta_j,
        a_j: riesz.a_j,
        c_m2: riesz.c_m2,
        n0,
        n,
        bound_q,
        bound_h: bound_q / 2.0,
        bound_big_h: bound_q,
    })
}
