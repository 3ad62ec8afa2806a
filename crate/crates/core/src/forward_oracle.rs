//! Forward Sturm–Liouville solver used to generate synthetic spectral data
//! and to score round trips.
//!
//! Eigenvalues come from scaled Prüfer shooting: with `ψ = r sin θ` and
//! `ψ' = s r cos θ`,
//!
//! ```text
//! θ' = s cos²θ + (λ − q)/s · sin²θ,   θ(0) = atan2(1, h/s),
//! ```
//!
//! and the n-th eigenvalue is the unique root of `θ(π; λ) = β + nπ` with
//! `β = atan2(1, −H/s)`. Norming constants integrate `φ`, `φ'` and `∫φ²`
//! directly.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate_piecewise, Tolerance};
use crate::reconstruction::{reconstruct, ReconstructOptions, Scheme, Shift};
use crate::spectral_data::SpectralData;

/// Built-in and sampled potentials on `[0, π]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Zero,
    Constant {
        value: f64,
    },
    /// `a·exp(−((x − π/2)/w)²)`.
    SmoothBump {
        amplitude: f64,
        width: f64,
    },
    /// `height` on `[π/3, 2π/3]`, zero elsewhere.
    Step {
        height: f64,
    },
    /// Tent of the given height peaking at `π/2`, supported on `[π/4, 3π/4]`.
    Hat {
        height: f64,
    },
    /// `a·cos(kx)`.
    Cosine {
        amplitude: f64,
        k: u32,
    },
    /// Equispaced samples on `[0, π]` with linear interpolation.
    Grid {
        samples: Vec<f64>,
    },
}

impl Potential {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Constant { value } => *value,
            Potential::SmoothBump { amplitude, width } => {
                let z = (x - PI / 2.0) / width;
                amplitude * (-z * z).exp()
            }
            Potential::Step { height } => {
                if (PI / 3.0..=2.0 * PI / 3.0).contains(&x) {
                    *height
                } else {
                    0.0
                }
            }
            Potential::Hat { height } => {
                let d = (x - PI / 2.0).abs();
                height * (1.0 - d / (PI / 4.0)).max(0.0)
            }
            Potential::Cosine { amplitude, k } => amplitude * (*k as f64 * x).cos(),
            Potential::Grid { samples } => {
                let m = samples.len() - 1;
                let step = PI / m as f64;
                let pos = (x / step).clamp(0.0, m as f64);
                let i = (pos.floor() as usize).min(m - 1);
                let frac = pos - i as f64;
                samples[i] + frac * (samples[i + 1] - samples[i])
            }
        }
    }

    /// Points where `q` or a derivative may jump, including both endpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Potential::Step { .. } => vec![0.0, PI / 3.0, 2.0 * PI / 3.0, PI],
            Potential::Hat { .. } => vec![0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI],
            Potential::Grid { samples } => {
                let m = samples.len() - 1;
                (0..=m)
                    .map(|i| if i == m { PI } else { i as f64 * PI / m as f64 })
                    .collect()
            }
            _ => vec![0.0, PI],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        let ok = match self {
            Potential::Zero => true,
            Potential::Constant { value } => finite(*value),
            Potential::SmoothBump { amplitude, width } => {
                finite(*amplitude) && *width > 0.0 && finite(*width)
            }
            Potential::Step { height } | Potential::Hat { height } => finite(*height),
            Potential::Cosine { amplitude, .. } => finite(*amplitude),
            Potential::Grid { samples } => {
                samples.len() >= 2 && samples.iter().all(|v| v.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("invalid potential {self:?}")))
        }
    }

    /// `∫₀^π q`: exact for grids (trapezoid of the interpolant), composite
    /// Simpson per smooth piece otherwise.
    pub fn integral(&self) -> f64 {
        if let Potential::Grid { samples } = self {
            let step = PI / (samples.len() - 1) as f64;
            let inner: f64 = samples[1..samples.len() - 1].iter().sum();
            return step * (inner + 0.5 * (samples[0] + samples[samples.len() - 1]));
        }
        let bp = self.breakpoints();
        bp.windows(2)
            .map(|w| {
                let n = 2000;
                let step = (w[1] - w[0]) / n as f64;
                let mut s = self.eval(w[0]) + self.eval(w[1]);
                for i in 1..n {
                    let x = w[0] + i as f64 * step;
                    s += if i % 2 == 1 { 4.0 } else { 2.0 } * self.eval(x);
                }
                s * step / 3.0
            })
            .sum()
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Constant { value } => value.abs(),
            Potential::SmoothBump { amplitude, .. } => amplitude.abs(),
            Potential::Step { height } | Potential::Hat { height } => height.abs(),
            Potential::Cosine { amplitude, .. } => amplitude.abs(),
            Potential::Grid { samples } => samples.iter().fold(0.0, |a, v| a.max(v.abs())),
        }
    }
}

/// `(q, h, H)` for `−ψ'' + qψ = λψ`, `ψ'(0) = hψ(0)`, `ψ'(π) = −Hψ(π)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub q: Potential,
    #[serde(default)]
    pub h: f64,
    #[serde(rename = "H", default)]
    pub big_h: f64,
}

impl PotentialSpec {
    pub fn new(q: Potential, h: f64, big_h: f64) -> Self {
        Self { q, h, big_h }
    }

    pub fn zero() -> Self {
        Self::new(Potential::Zero, 0.0, 0.0)
    }

    fn validate(&self) -> Result<()> {
        self.q.validate()?;
        if !(self.h.is_finite() && self.big_h.is_finite()) {
            return Err(Error::Validation(
                "boundary constants must be finite".into(),
            ));
        }
        Ok(())
    }

    /// `ω = h + H + ½∫₀^π q`.
    pub fn omega(&self) -> f64 {
        self.h + self.big_h + 0.5 * self.q.integral()
    }

    /// `K(x, x) = h + ½∫₀ˣ q` at the given abscissae, by composite Simpson
    /// between consecutive points.
    pub fn kernel_diagonal(&self, grid: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(grid.len());
        let mut acc = 0.0;
        let mut prev = 0.0;
        let bp = self.q.breakpoints();
        for &x in grid {
            let mut cuts: Vec<f64> = bp.iter().copied().filter(|&b| b > prev && b < x).collect();
            cuts.insert(0, prev);
            cuts.push(x);
            for w in cuts.windows(2) {
                let n = 16;
                let step = (w[1] - w[0]) / n as f64;
                let mut s = self.q.eval(w[0]) + self.q.eval(w[1]);
                for i in 1..n {
                    s += if i % 2 == 1 { 4.0 } else { 2.0 } * self.q.eval(w[0] + i as f64 * step);
                }
                acc += s * step / 3.0;
            }
            prev = x;
            out.push(self.h + 0.5 * acc);
        }
        out
    }
}

const FORWARD_TOL: Tolerance = Tolerance {
    rtol: 1e-12,
    atol: 1e-13,
};

/// Prüfer scale for index `n`, close to `λ_n^{1/2}` so that `θ' ≈ s`.
fn prufer_scale(spec: &PotentialSpec, n: usize) -> f64 {
    let guess = eigenvalue_guess(spec, n);
    guess.abs().sqrt().max(1.0)
}

fn eigenvalue_guess(spec: &PotentialSpec, n: usize) -> f64 {
    (n * n) as f64 + 2.0 * spec.omega() / PI
}

/// `θ(π; λ) − β − nπ`, increasing in `λ`.
fn shooting_mismatch(
    spec: &PotentialSpec,
    n: usize,
    s: f64,
    lambda: f64,
    bp: &[f64],
) -> Result<f64> {
    let q = &spec.q;
    let rhs = |x: f64, y: &[f64; 1]| {
        let (sin, cos) = y[0].sin_cos();
        [s * cos * cos + (lambda - q.eval(x)) / s * sin * sin]
    };
    let theta0 = 1f64.atan2(spec.h / s);
    let theta = integrate_piecewise(rhs, bp, [theta0], FORWARD_TOL, lambda)?[0];
    let beta = 1f64.atan2(-spec.big_h / s);
    Ok(theta - beta - n as f64 * PI)
}

/// The `n`-th eigenvalue (0-based).
pub fn eigenvalue(spec: &PotentialSpec, n: usize) -> Result<f64> {
    spec.validate()?;
    let bp = spec.q.breakpoints();
    let s = prufer_scale(spec, n);
    let g = |l: f64| shooting_mismatch(spec, n, s, l, &bp);
    let search_err = |reason: &str| Error::EigenSearch {
        index: n,
        reason: reason.to_string(),
    };

    let guess = eigenvalue_guess(spec, n);
    let mut step = (2.0 * n as f64 + 1.0).max(1.0);
    let g0 = g(guess)?;
    if g0 == 0.0 {
        return Ok(guess);
    }
    let (mut lo, mut glo, mut hi, mut ghi);
    if g0 < 0.0 {
        lo = guess;
        glo = g0;
        hi = guess + step;
        ghi = g(hi)?;
        let mut tries = 0;
        while ghi < 0.0 {
            lo = hi;
            glo = ghi;
            step *= 2.0;
            hi += step;
            ghi = g(hi)?;
            tries += 1;
            if tries > 60 {
                return Err(search_err("no upper bracket"));
            }
        }
    } else {
        hi = guess;
        ghi = g0;
        lo = guess - step;
        glo = g(lo)?;
        let mut tries = 0;
        while glo > 0.0 {
            hi = lo;
            ghi = glo;
            step *= 2.0;
            lo -= step;
            glo = g(lo)?;
            tries += 1;
            if tries > 60 {
                return Err(search_err("no lower bracket"));
            }
        }
    }

    // Illinois regula falsi, with bisection whenever it fails to shrink the bracket.
    let mut side = 0i8;
    for _ in 0..300 {
        let width = hi - lo;
        if width <= (1e-11 * lo.abs().max(hi.abs())).max(1e-14) {
            break;
        }
        let mut mid = (lo * ghi - hi * glo) / (ghi - glo);
        if !(mid > lo + 0.01 * width && mid < hi - 0.01 * width) {
            mid = 0.5 * (lo + hi);
        }
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm < 0.0 {
            lo = mid;
            glo = gm;
            if side == -1 {
                ghi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            ghi = gm;
            if side == 1 {
                glo *= 0.5;
            }
            side = 1;
        }
    }
    if !(hi - lo).is_finite() {
        return Err(search_err("bracket diverged"));
    }
    Ok(0.5 * (lo + hi))
}

/// `λ_0 < … < λ_{count−1}`.
pub fn eigenvalues(spec: &PotentialSpec, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Validation("eigenvalue count must be >= 1".into()));
    }
    (0..count)
        .into_par_iter()
        .map(|n| eigenvalue(spec, n))
        .collect()
}

/// `α = ∫₀^π φ(x, λ)²` with `φ(0) = 1`, `φ'(0) = h`.
pub fn norming_constant(spec: &PotentialSpec, lambda: f64) -> Result<f64> {
    spec.validate()?;
    let q = &spec.q;
    let rhs = |x: f64, y: &[f64; 3]| [y[1], (q.eval(x) - lambda) * y[0], y[0] * y[0]];
    let tol = Tolerance {
        rtol: 1e-12,
        atol: 1e-14,
    };
    Ok(integrate_piecewise(rhs, &q.breakpoints(), [1.0, spec.h, 0.0], tol, lambda)?[2])
}

pub fn norming_constants(spec: &PotentialSpec, eigenvalues: &[f64]) -> Result<Vec<f64>> {
    eigenvalues
        .par_iter()
        .map(|&l| norming_constant(spec, l))
        .collect()
}

/// First `count` eigenvalues and norming constants.
pub fn spectral_data(spec: &PotentialSpec, count: usize) -> Result<SpectralData> {
    let lambda = eigenvalues(spec, count)?;
    let alpha = norming_constants(spec, &lambda)?;
    SpectralData::new(lambda, alpha)
}

fn signed_root(v: f64) -> f64 {
    v.signum() * v.abs().sqrt()
}

/// `e_N = (Σ (sgn(λ)|λ|^{1/2} − sgn(μ)|μ|^{1/2})²)^{1/2}`.
pub fn spectral_error(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    for list in [a, b] {
        if let Some(i) = list.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Unsorted(i + 1));
        }
    }
    Ok(a.iter()
        .zip(b)
        .map(|(&x, &y)| (signed_root(x) - signed_root(y)).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// `ω ≈ (π/2)·mean(λ_n − n²)` over `n ∈ [lo, hi)`.
pub fn asymptotic_omega(spec: &PotentialSpec, lo: usize, hi: usize) -> Result<f64> {
    if hi <= lo {
        return Err(Error::Validation(format!(
            "empty index window [{lo}, {hi})"
        )));
    }
    let shifts = (lo..hi)
        .into_par_iter()
        .map(|n| eigenvalue(spec, n).map(|l| l - (n * n) as f64))
        .collect::<Result<Vec<f64>>>()?;
    Ok(PI / 2.0 * shifts.iter().sum::<f64>() / shifts.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub e_n: f64,
    pub h_true: f64,
    #[serde(rename = "H_true")]
    pub big_h_true: f64,
    pub h_n: f64,
    #[serde(rename = "H_N")]
    pub big_h_n: f64,
    pub delta_h: f64,
    #[serde(rename = "delta_H")]
    pub delta_big_h: f64,
    pub varpi: f64,
    pub original: Vec<f64>,
    pub recomputed: Vec<f64>,
}

pub const ROUNDTRIP_GRID: usize = 4000;

pub fn roundtrip_options() -> ReconstructOptions {
    ReconstructOptions {
        scheme: Scheme::Central4,
        shift: Shift::Tail,
        ..Default::default()
    }
}

/// Forward data for `n` eigenpairs, reconstruct on an `m`-interval grid, then
/// re-solve the forward problem for the reconstruction and compare spectra.
pub fn roundtrip(
    spec: &PotentialSpec,
    n: usize,
    m: usize,
    opts: ReconstructOptions,
) -> Result<RoundTripReport> {
    let data = spectral_data(spec, n)?;
    let rec = reconstruct(&data, m, opts)?;
    let rebuilt = PotentialSpec::new(
        Potential::Grid {
            samples: rec.q.clone(),
        },
        rec.h,
        rec.big_h,
    );
    let recomputed = eigenvalues(&rebuilt, n)?;
    let e_n = spectral_error(data.lambda(), &recomputed)?;
    Ok(RoundTripReport {
        n,
        m,
        e_n,
        h_true: spec.h,
        big_h_true: spec.big_h,
        h_n: rec.h,
        big_h_n: rec.big_h,
        delta_h: rec.h - spec.h,
        delta_big_h: rec.big_h - spec.big_h,
        varpi: rec.varpi,
        original: data.lambda().to_vec(),
        recomputed,
    })
}
