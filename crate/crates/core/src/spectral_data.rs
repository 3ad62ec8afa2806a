//! Spectral data ingestion: validation, asymptotic decomposition, ω-shift
//! estimation and finite-rank detection.
//!
//! Data sets store only a finite prefix `(λ_n, α_n)_{n < len}`. Every index
//! beyond the stored prefix is *trivial*, i.e. `λ_n = n²` and `α_n = π/2`,
//! which are the eigenvalues and norming constants of the zero potential with
//! Neumann boundary conditions.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norming constant of the zero potential with Neumann conditions.
pub fn trivial_alpha(n: usize) -> f64 {
    if n == 0 {
        PI
    } else {
        FRAC_PI_2
    }
}

/// Eigenvalue of the zero potential with Neumann conditions.
pub fn trivial_lambda(n: usize) -> f64 {
    (n * n) as f64
}

/// Finite prefix of eigenvalues and norming constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectralData", into = "RawSpectralData")]
pub struct SpectralData {
    lambda: Vec<f64>,
    alpha: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSpectralData {
    lambda: Vec<f64>,
    alpha: Vec<f64>,
}

impl TryFrom<RawSpectralData> for SpectralData {
    type Error = Error;

    fn try_from(raw: RawSpectralData) -> Result<Self> {
        SpectralData::new(raw.lambda, raw.alpha)
    }
}

impl From<SpectralData> for RawSpectralData {
    fn from(d: SpectralData) -> Self {
        RawSpectralData {
            lambda: d.lambda,
            alpha: d.alpha,
        }
    }
}

impl SpectralData {
    pub fn new(lambda: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        if lambda.len() != alpha.len() {
            return Err(Error::Validation(format!(
                "lambda has {} entries but alpha has {}",
                lambda.len(),
                alpha.len()
            )));
        }
        if lambda.is_empty() {
            return Err(Error::Validation(
                "at least one (lambda, alpha) pair is required".into(),
            ));
        }
        if let Some(i) = lambda
            .iter()
            .chain(alpha.iter())
            .position(|v| !v.is_finite())
        {
            return Err(Error::Validation(format!(
                "non-finite entry at position {i}"
            )));
        }
        if let Some(i) = alpha.iter().position(|&a| a <= 0.0) {
            return Err(Error::Validation(format!(
                "alpha[{i}] = {} is not positive",
                alpha[i]
            )));
        }
        if let Some(i) = lambda.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Validation(format!(
                "lambda is not strictly increasing: lambda[{}] = {} >= lambda[{}] = {}",
                i,
                lambda[i],
                i + 1,
                lambda[i + 1]
            )));
        }
        Ok(Self { lambda, alpha })
    }

    /// Zero-potential data (`λ_n = n²`, `α_0 = π`, `α_n = π/2`) with `len` stored pairs.
    pub fn trivial(len: usize) -> Self {
        let len = len.max(1);
        Self {
            lambda: (0..len).map(trivial_lambda).collect(),
            alpha: (0..len).map(trivial_alpha).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `λ_n`, applying the trivial tail rule beyond the stored prefix.
    pub fn lambda_at(&self, n: usize) -> f64 {
        self.lambda
            .get(n)
            .copied()
            .unwrap_or_else(|| trivial_lambda(n))
    }

    /// `α_n`, applying the trivial tail rule beyond the stored prefix.
    pub fn alpha_at(&self, n: usize) -> f64 {
        self.alpha
            .get(n)
            .copied()
            .unwrap_or_else(|| trivial_alpha(n))
    }

    /// `(λ_n + c, α_n)` for every stored `n`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        Self::new(
            self.lambda.iter().map(|l| l + c).collect(),
            self.alpha.clone(),
        )
    }

    /// The first `len` stored pairs.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        let len = len.min(self.len());
        Self::new(self.lambda[..len].to_vec(), self.alpha[..len].to_vec())
    }
}

/// Whether `(λ, α)` coincides with the zero-potential pair at index `n`.
///
/// `tol = None` uses exact equality.
pub fn is_trivial_pair(n: usize, lambda: f64, alpha: f64, tol: Option<f64>) -> bool {
    let (l0, a0) = (trivial_lambda(n), trivial_alpha(n));
    match tol {
        None => lambda == l0 && alpha == a0,
        Some(eps) => (lambda - l0).abs() <= eps && (alpha - a0).abs() <= eps,
    }
}

/// `λ_n^{1/2} = n + ω/(π(n+1)) + κ_n/(n+1)`, `1/α_n = 2/π + κ̃_n/(n+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticDecomposition {
    pub omega: f64,
    /// Real parts of `κ_n`.
    pub kappa: Vec<f64>,
    /// Imaginary part of `κ_0`; nonzero only when `λ_0 < 0`.
    pub kappa0_imag: f64,
    pub kappa_tilde: Vec<f64>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
}

impl AsymptoticDecomposition {
    /// `‖κ‖_{ℓ²}` over the stored prefix, counting `|κ_0|` as a complex modulus.
    pub fn kappa_norm(&self) -> f64 {
        (self.kappa.iter().map(|k| k * k).sum::<f64>() + self.kappa0_imag.powi(2)).sqrt()
    }

    /// `‖κ̃‖_{ℓ²}` over the stored prefix, literal definition (includes `κ̃_0`).
    pub fn kappa_tilde_norm(&self) -> f64 {
        self.kappa_tilde.iter().map(|k| k * k).sum::<f64>().sqrt()
    }

    /// `‖κ̃‖_{ℓ²}` measured against the zero-potential reference, i.e. with the
    /// `n = 0` entry replaced by `1/α_0 − 1/π` so that zero-potential data has
    /// vanishing remainder.
    pub fn kappa_tilde_norm_centered(&self, alpha0: f64) -> f64 {
        let head = 1.0 / alpha0 - 1.0 / PI;
        let tail: f64 = self.kappa_tilde.iter().skip(1).map(|k| k * k).sum();
        (head * head + tail).sqrt()
    }

    /// Re-synthesize `(λ_n, α_n)` from `ω, κ, κ̃`.
    pub fn synthesize(&self) -> Result<SpectralData> {
        let lambda = self
            .kappa
            .iter()
            .enumerate()
            .map(|(n, &k)| {
                let n1 = (n + 1) as f64;
                if n == 0 && self.kappa0_imag != 0.0 {
                    -self.kappa0_imag.powi(2)
                } else {
                    let root = n as f64 + self.omega / (PI * n1) + k / n1;
                    root * root
                }
            })
            .collect();
        let alpha = self
            .kappa_tilde
            .iter()
            .enumerate()
            .map(|(n, &kt)| 1.0 / (2.0 / PI + kt / (n + 1) as f64))
            .collect();
        SpectralData::new(lambda, alpha)
    }
}

/// Membership of the stored prefix in the primary sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub in_omega: bool,
    pub in_omega0m: bool,
    pub finite_rank_n: usize,
}

/// Smallest `N` such that every stored pair with index `> N` is trivial.
pub fn finite_rank(data: &SpectralData, tol: Option<f64>) -> usize {
    (0..data.len())
        .rev()
        .find(|&n| !is_trivial_pair(n, data.lambda_at(n), data.alpha_at(n), tol))
        .unwrap_or(0)
}

/// Check the stored prefix against `Ω` and (assuming `ω = 0`) `Ω_{0,M}`.
///
/// `SpectralData` construction already enforces ordering and positivity, so
/// any constructed value is a member of `Ω`. For `Ω_{0,M}` the `n = 0`
/// norming-constant remainder is measured against the zero-potential value
/// `α_0 = π`.
pub fn validate(data: &SpectralData, m: Option<f64>) -> Result<MembershipReport> {
    let in_omega0m = match m {
        Some(m) if m >= 0.0 => match decompose(data, 0.0) {
            Ok(dec) => {
                dec.kappa_norm() <= m && dec.kappa_tilde_norm_centered(data.alpha_at(0)) <= m
            }
            Err(_) => false,
        },
        _ => false,
    };
    Ok(MembershipReport {
        in_omega: true,
        in_omega0m,
        finite_rank_n: finite_rank(data, None),
    })
}

/// Remainders `κ_n`, `κ̃_n` of the stored prefix for a given `ω`.
///
/// `λ_0 < 0` yields a purely imaginary `λ_0^{1/2}`; its modulus is returned in
/// `kappa0_imag` with `kappa[0] = −ω/π`.
pub fn decompose(data: &SpectralData, omega: f64) -> Result<AsymptoticDecomposition> {
    let mut kappa = Vec::with_capacity(data.len());
    let mut kappa0_imag = 0.0;
    for (n, &l) in data.lambda().iter().enumerate() {
        let n1 = (n + 1) as f64;
        if l < 0.0 {
            if n > 0 {
                return Err(Error::NegativeEigenvalue { index: n, value: l });
            }
            kappa0_imag = (-l).sqrt();
            kappa.push(-omega / PI);
        } else {
            kappa.push(n1 * (l.sqrt() - n as f64) - omega / PI);
        }
    }
    let kappa_tilde = data
        .alpha()
        .iter()
        .enumerate()
        .map(|(n, &a)| (n + 1) as f64 * (1.0 / a - 2.0 / PI))
        .collect();
    Ok(AsymptoticDecomposition {
        omega,
        kappa,
        kappa0_imag,
        kappa_tilde,
        m: None,
    })
}

/// `ϖ = λ_{N−1} − (N−1)²` where `N` is the stored length.
pub fn estimate_omega(data: &SpectralData) -> f64 {
    let last = data.len() - 1;
    data.lambda_at(last) - trivial_lambda(last)
}

/// Options for [`detect_finite_rank`].
#[derive(Debug, Clone, Copy)]
pub struct DetectOptions {
    pub trivial_tol: Option<f64>,
    pub read_cap: usize,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            trivial_tol: None,
            read_cap: 1_000_000,
        }
    }
}

/// Scan `n = 1, 2, …` until `n_tilde` consecutive trivial pairs are seen and
/// return `N = n − ctr + 1`.
///
/// Under the promise that `n_tilde` consecutive trivial pairs imply an
/// all-trivial tail, every pair past the returned `N` is trivial.
pub fn detect_finite_rank<S>(stream: S, n_tilde: usize, opts: DetectOptions) -> Result<usize>
where
    S: Fn(usize) -> (f64, f64),
{
    if n_tilde == 0 {
        return Err(Error::Validation("n_tilde must be positive".into()));
    }
    let mut ctr = 0usize;
    let mut n = 1usize;
    loop {
        if n > opts.read_cap {
            return Err(Error::ReadCapExceeded {
                cap: opts.read_cap,
                n_tilde,
            });
        }
        let (l, a) = stream(n);
        if is_trivial_pair(n, l, a, opts.trivial_tol) {
            ctr += 1;
        } else {
            ctr = 0;
        }
        if ctr == n_tilde {
            return Ok(n - ctr + 1);
        }
        n += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn rank_one(n0: usize) -> SpectralData {
        let mut alpha: Vec<f64> = (0..=n0).map(trivial_alpha).collect();
        alpha[n0] = PI / (PI + 2.0);
        SpectralData::new((0..=n0).map(trivial_lambda).collect(), alpha).unwrap()
    }

    #[test]
    fn rejects_bad_data() {
        assert!(matches!(
            SpectralData::new(vec![4.0, 1.0, 0.0], vec![FRAC_PI_2; 3]),
            Err(Error::Validation(_))
        ));
        assert!(SpectralData::new(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
        assert!(SpectralData::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(SpectralData::new(vec![], vec![]).is_err());
        assert!(SpectralData::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn json_validates_on_parse() {
        let bad = r#"{"lambda":[4,1,0],"alpha":[1,1,1]}"#;
        assert!(serde_json::from_str::<SpectralData>(bad).is_err());
        let good = r#"{"lambda":[0,1,4],"alpha":[3,1.5,1.5]}"#;
        assert_eq!(serde_json::from_str::<SpectralData>(good).unwrap().len(), 3);
    }

    #[test]
    fn validate_zero_data() {
        let d = SpectralData::trivial(3);
        let r = validate(&d, Some(1.0)).unwrap();
        assert!(r.in_omega && r.in_omega0m);
        assert_eq!(r.finite_rank_n, 0);
        // the zero potential belongs to every Ω_{0,M}
        assert!(validate(&d, Some(0.0)).unwrap().in_omega0m);
    }

    #[test]
    fn validate_rank_one() {
        let r = validate(&rank_one(1), Some(1.0)).unwrap();
        assert!(r.in_omega);
        assert_eq!(r.finite_rank_n, 1);
    }

    #[test]
    fn decompose_zero_data() {
        let dec = decompose(&SpectralData::trivial(6), 0.0).unwrap();
        assert!(dec.kappa.iter().all(|&k| k == 0.0));
        assert_abs_diff_eq!(dec.kappa_tilde[0], -1.0 / PI, epsilon = 1e-15);
        assert!(dec.kappa_tilde[1..].iter().all(|&k| k.abs() < 1e-15));
    }

    #[test]
    fn decompose_ground_state_shift() {
        let mut lambda: Vec<f64> = (0..4).map(trivial_lambda).collect();
        lambda[0] = 1.0;
        // λ_0 = 1 must stay below λ_1 for a valid ordering, so move λ_1 up too.
        lambda[1] = 1.5;
        let d = SpectralData::new(lambda, (0..4).map(trivial_alpha).collect()).unwrap();
        let dec = decompose(&d, 0.0).unwrap();
        assert_abs_diff_eq!(dec.kappa[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn decompose_linear_in_omega() {
        let d = rank_one(4);
        let a = decompose(&d, 0.0).unwrap();
        let b = decompose(&d, PI).unwrap();
        for (n, (ka, kb)) in a.kappa.iter().zip(&b.kappa).enumerate() {
            let _ = n;
            assert_abs_diff_eq!(kb - ka, -1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn decompose_rejects_negative_excited_state() {
        let d = SpectralData::new(vec![-3.0, -1.0, 4.0], vec![1.0; 3]).unwrap();
        assert!(matches!(
            decompose(&d, 0.0),
            Err(Error::NegativeEigenvalue { index: 1, .. })
        ));
        let d = SpectralData::new(vec![-3.0, 1.0, 4.0], vec![1.0; 3]).unwrap();
        let dec = decompose(&d, 0.0).unwrap();
        assert_abs_diff_eq!(dec.kappa0_imag, 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(dec.kappa_norm(), 3f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn omega_estimate_examples() {
        assert_eq!(estimate_omega(&SpectralData::trivial(3)), 0.0);
        let d = SpectralData::new(vec![1.0, 2.0, 5.0], vec![1.0; 3]).unwrap();
        assert_eq!(estimate_omega(&d), 1.0);
        let d = SpectralData::new(vec![0.5], vec![1.0]).unwrap();
        assert_eq!(estimate_omega(&d), 0.5);
    }

    fn stream_with(nontrivial: &'static [usize]) -> impl Fn(usize) -> (f64, f64) {
        move |n| {
            if nontrivial.contains(&n) {
                (trivial_lambda(n), 1.0)
            } else {
                (trivial_lambda(n), trivial_alpha(n))
            }
        }
    }

    #[test]
    fn detect_traces() {
        let o = DetectOptions::default();
        assert_eq!(detect_finite_rank(stream_with(&[1]), 2, o).unwrap(), 2);
        assert_eq!(detect_finite_rank(stream_with(&[]), 1, o).unwrap(), 1);
        assert_eq!(detect_finite_rank(stream_with(&[2, 4]), 3, o).unwrap(), 5);
    }

    #[test]
    fn detect_respects_tolerance_and_cap() {
        let noisy = |n: usize| (trivial_lambda(n) + 1e-12, trivial_alpha(n));
        let capped = DetectOptions {
            trivial_tol: None,
            read_cap: 50,
        };
        assert!(matches!(
            detect_finite_rank(noisy, 2, capped),
            Err(Error::ReadCapExceeded { cap: 50, .. })
        ));
        let tolerant = DetectOptions {
            trivial_tol: Some(1e-9),
            read_cap: 50,
        };
        assert_eq!(detect_finite_rank(noisy, 2, tolerant).unwrap(), 1);
    }

    proptest! {
        #[test]
        fn decompose_synthesize_roundtrip(
            omega in -3.0f64..3.0,
            kappa in prop::collection::vec(-0.4f64..0.4, 1..40),
            kt in prop::collection::vec(-0.3f64..0.3, 40),
        ) {
            let n = kappa.len();
            let dec = AsymptoticDecomposition {
                omega,
                // keep λ_0^{1/2} ≥ 0 so the real branch is exercised
                kappa: kappa.iter().enumerate().map(|(i, &k)| if i == 0 { k.abs() + omega.abs() / PI } else { k }).collect(),
                kappa0_imag: 0.0,
                kappa_tilde: kt[..n].to_vec(),
                m: None,
            };
            // sqrt is monotone only for nonnegative roots; skip draws violating ordering
            if let Ok(data) = dec.synthesize() {
                let back = decompose(&data, omega).unwrap();
                for (a, b) in back.kappa.iter().zip(&dec.kappa) {
                    prop_assert!((a - b).abs() <= 1e-13 * (1.0 + b.abs()) * (n as f64));
                }
                for (a, b) in back.kappa_tilde.iter().zip(&dec.kappa_tilde) {
                    prop_assert!((a - b).abs() <= 1e-13 * (1.0 + b.abs()) * (n as f64));
                }
            }
        }

        #[test]
        fn omega_estimate_shift_covariant(c in -5.0f64..5.0, len in 1usize..30) {
            let d = SpectralData::trivial(len);
            let shifted = d.shifted(c).unwrap();
            let scale = (len * len) as f64;
            prop_assert!((estimate_omega(&shifted) - estimate_omega(&d) - c).abs() <= 4.0 * f64::EPSILON * (scale + c.abs()));
        }

        #[test]
        fn detect_result_has_trivial_tail(
            gaps in prop::collection::vec(0usize..4, 0..6),
            n_tilde in 1usize..5,
        ) {
            // gaps between nontrivial indices stay below n_tilde
            let mut idx = Vec::new();
            let mut prev = 0usize;
            for g in gaps {
                prev += 1 + g % n_tilde;
                idx.push(prev);
            }
            let idx2 = idx.clone();
            let stream = move |n: usize| {
                if idx2.contains(&n) { (trivial_lambda(n), 0.3) } else { (trivial_lambda(n), trivial_alpha(n)) }
            };
            let n = detect_finite_rank(&stream, n_tilde, DetectOptions::default()).unwrap();
            prop_assert!(idx.iter().all(|&i| i < n));
        }
    }
}
