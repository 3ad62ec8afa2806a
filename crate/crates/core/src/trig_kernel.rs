//! Cosine atoms, the degenerate representation of the data kernel `F_N`, and
//! closed-form `L²[0, x]` inner products between atoms.
//!
//! A circular atom is `a·cos(ρt)`; a hyperbolic atom is `a·cosh(ρt)`, the real
//! continuation of `cos(λ^{1/2} t)` for `λ < 0`. Internally both are handled
//! as `cos(z t)` with a complex frequency `z = ρ` or `z = iρ`, so every
//! product integral reduces to `∫₀ˣ cos(w s) ds = x·sinc(w x)`.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_data::{trivial_alpha, trivial_lambda, SpectralData};

/// Below this frequency the sinc factor is evaluated by its Taylor series.
const SINC_SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Circular,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigAtom {
    pub amplitude: f64,
    pub freq: f64,
    pub branch: Branch,
}

impl TrigAtom {
    pub fn circular(amplitude: f64, freq: f64) -> Self {
        Self {
            amplitude,
            freq,
            branch: Branch::Circular,
        }
    }

    pub fn constant(amplitude: f64) -> Self {
        Self::circular(amplitude, 0.0)
    }

    /// `amplitude·cos(λ^{1/2} t)`, taking the hyperbolic branch for `λ < 0`.
    pub fn from_eigenvalue(amplitude: f64, lambda: f64) -> Self {
        if lambda < 0.0 {
            Self {
                amplitude,
                freq: (-lambda).sqrt(),
                branch: Branch::Hyperbolic,
            }
        } else {
            Self::circular(amplitude, lambda.sqrt())
        }
    }

    pub fn negated(self) -> Self {
        Self {
            amplitude: -self.amplitude,
            ..self
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.branch {
            Branch::Circular => self.amplitude * (self.freq * t).cos(),
            Branch::Hyperbolic => self.amplitude * (self.freq * t).cosh(),
        }
    }

    fn complex_freq(&self) -> Complex64 {
        match self.branch {
            Branch::Circular => Complex64::new(self.freq, 0.0),
            Branch::Hyperbolic => Complex64::new(0.0, self.freq),
        }
    }
}

/// `∫₀ˣ cos(w s) ds` for real `w`.
fn cos_integral(w: f64, x: f64) -> f64 {
    if w.abs() <= SINC_SERIES_THRESHOLD {
        let z2 = (w * x).powi(2);
        x * (1.0 - z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0)))
    } else {
        (w * x).sin() / w
    }
}

/// `∫₀ˣ cos(w s) ds` for complex `w`.
fn cos_integral_complex(w: Complex64, x: f64) -> Complex64 {
    if w.norm() <= SINC_SERIES_THRESHOLD {
        let z2 = (w * x).powi(2);
        (1.0 - z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0))) * x
    } else {
        (w * x).sin() / w
    }
}

/// `∫₀ˣ cos(a s) cos(b s) ds`.
pub fn cos_product_integral(a: f64, b: f64, x: f64) -> f64 {
    0.5 * (cos_integral(a - b, x) + cos_integral(a + b, x))
}

/// `⟨u, v⟩_{L²[0, x]}` in closed form.
pub fn atom_inner_product(u: &TrigAtom, v: &TrigAtom, x: f64) -> f64 {
    let scale = u.amplitude * v.amplitude;
    if scale == 0.0 {
        return 0.0;
    }
    let integral = match (u.branch, v.branch) {
        (Branch::Circular, Branch::Circular) => cos_product_integral(u.freq, v.freq, x),
        _ => {
            let (zu, zv) = (u.complex_freq(), v.complex_freq());
            0.5 * (cos_integral_complex(zu - zv, x) + cos_integral_complex(zu + zv, x)).re
        }
    };
    scale * integral
}

/// The `2N + 2` atoms `A_i`, `B_i` with `k_N(t, s) = Σ A_i(t) B_i(s)`.
///
/// * `i = 0..=N`: `A_i = −B_i = α_i^{-1/2} cos(λ_i^{1/2} s)`
/// * `i = N+1..=2N`: `A_i = B_i = (2/π)^{1/2} cos((i − N) s)`
/// * `i = 2N+1`: `A_i = B_i = π^{-1/2}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisSet {
    pub n: usize,
    pub atoms_a: Vec<TrigAtom>,
    pub atoms_b: Vec<TrigAtom>,
}

impl BasisSet {
    pub fn dim(&self) -> usize {
        self.atoms_a.len()
    }

    /// `B_i = sign_i·A_i` with `sign_i = −1` for the data atoms.
    pub fn sign(&self, i: usize) -> f64 {
        if i <= self.n {
            -1.0
        } else {
            1.0
        }
    }
}

/// Build the degenerate-kernel basis from a data prefix of length `N + 1`.
pub fn build_basis(data: &SpectralData) -> Result<BasisSet> {
    let n = data.len() - 1;
    let mut atoms_a = Vec::with_capacity(2 * n + 2);
    for (i, (&l, &a)) in data.lambda().iter().zip(data.alpha()).enumerate() {
        if a <= 0.0 {
            return Err(Error::Validation(format!(
                "alpha[{i}] = {a} is not positive"
            )));
        }
        atoms_a.push(TrigAtom::from_eigenvalue(a.powf(-0.5), l));
    }
    let free = FRAC_2_PI.sqrt();
    atoms_a.extend((1..=n).map(|k| TrigAtom::circular(free, k as f64)));
    atoms_a.push(TrigAtom::constant(PI.powf(-0.5)));
    let atoms_b = atoms_a
        .iter()
        .enumerate()
        .map(|(i, &atom)| if i <= n { atom.negated() } else { atom })
        .collect();
    Ok(BasisSet {
        n,
        atoms_a,
        atoms_b,
    })
}

/// Finite-rank data kernel `F_N` together with its degenerate representation
/// `k_N(t, s) = −F_N(s, t) = Σ A_i(t) B_i(s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelFN {
    basis: BasisSet,
    lambda: Vec<f64>,
    alpha: Vec<f64>,
}

impl KernelFN {
    pub fn new(data: &SpectralData) -> Result<Self> {
        Ok(Self {
            basis: build_basis(data)?,
            lambda: data.lambda().to_vec(),
            alpha: data.alpha().to_vec(),
        })
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn n(&self) -> usize {
        self.basis.n
    }

    /// `F_N(x, y)` summed directly from the spectral data.
    pub fn eval_f(&self, x: f64, y: f64) -> f64 {
        let mut sum = 0.0;
        for (i, (&l, &a)) in self.lambda.iter().zip(&self.alpha).enumerate() {
            let atom = TrigAtom::from_eigenvalue(1.0, l);
            let data_term = atom.eval(x) * atom.eval(y) / a;
            let free = if i == 0 {
                1.0 / PI
            } else {
                let k = i as f64;
                2.0 / PI * ((k * x).cos() * (k * y).cos())
            };
            sum += data_term - free;
        }
        sum
    }

    /// `k_N(t, s) = Σ A_i(t) B_i(s)`.
    pub fn eval_k(&self, t: f64, s: f64) -> f64 {
        self.basis
            .atoms_a
            .iter()
            .zip(&self.basis.atoms_b)
            .map(|(a, b)| a.eval(t) * b.eval(s))
            .sum()
    }

    /// `Φ_N(t)` with `F_N(x, y) = (Φ_N(x + y) + Φ_N(x − y))/2`.
    pub fn phi(&self, t: f64) -> f64 {
        self.lambda
            .iter()
            .zip(&self.alpha)
            .enumerate()
            .map(|(i, (&l, &a))| {
                let free = if i == 0 {
                    1.0 / PI
                } else {
                    2.0 / PI * (i as f64 * t).cos()
                };
                TrigAtom::from_eigenvalue(1.0, l).eval(t) / a - free
            })
            .sum()
    }

    /// True when every stored pair is the zero-potential pair, so `F_N ≡ 0`.
    pub fn is_trivial(&self) -> bool {
        self.lambda
            .iter()
            .zip(&self.alpha)
            .enumerate()
            .all(|(i, (&l, &a))| l == trivial_lambda(i) && a == trivial_alpha(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn rank_one(n0: usize, alpha_n0: f64) -> SpectralData {
        let mut alpha: Vec<f64> = (0..=n0).map(trivial_alpha).collect();
        alpha[n0] = alpha_n0;
        SpectralData::new((0..=n0).map(trivial_lambda).collect(), alpha).unwrap()
    }

    #[test]
    fn product_integral_examples() {
        assert_abs_diff_eq!(cos_product_integral(0.0, 0.0, 1.3), 1.3, epsilon = 1e-15);
        assert_abs_diff_eq!(cos_product_integral(1.0, 2.0, PI), 0.0, epsilon = 1e-15);
        for &(a, x) in &[(0.7, 2.0), (3.0, PI), (11.5, 0.3)] {
            let expected = x / 2.0 + (2.0 * a * x).sin() / (4.0 * a);
            assert_abs_diff_eq!(cos_product_integral(a, a, x), expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn inner_product_examples() {
        let c = TrigAtom::constant(PI.powf(-0.5));
        assert_abs_diff_eq!(atom_inner_product(&c, &c, PI), 1.0, epsilon = 1e-14);
        let f1 = TrigAtom::circular(FRAC_2_PI.sqrt(), 1.0);
        assert_abs_diff_eq!(atom_inner_product(&f1, &f1, PI), 1.0, epsilon = 1e-14);
        let rho: f64 = 2.3;
        let g = TrigAtom::circular(1.0, rho);
        for k in 0..6 {
            let fk = TrigAtom::circular(1.0, k as f64);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let expected = sign * rho * (rho * PI).sin() / (rho * rho - (k * k) as f64);
            assert_abs_diff_eq!(atom_inner_product(&g, &fk, PI), expected, epsilon = 1e-13);
        }
    }

    #[test]
    fn hyperbolic_inner_products() {
        let x = 2.1;
        let (a, b) = (1.3, 0.4);
        let ch_a = TrigAtom::from_eigenvalue(1.0, -a * a);
        let ch_b = TrigAtom::from_eigenvalue(1.0, -b * b);
        let c = TrigAtom::circular(1.0, a);
        let hh = ((a - b) * x).sinh() / (2.0 * (a - b)) + ((a + b) * x).sinh() / (2.0 * (a + b));
        assert_abs_diff_eq!(atom_inner_product(&ch_a, &ch_b, x), hh, epsilon = 1e-13);
        // ∫ cos(a s) cosh(b s) = (a sin(ax)cosh(bx) + b cos(ax)sinh(bx)) / (a² + b²)
        let mixed = (a * (a * x).sin() * (b * x).cosh() + b * (a * x).cos() * (b * x).sinh())
            / (a * a + b * b);
        assert_abs_diff_eq!(atom_inner_product(&c, &ch_b, x), mixed, epsilon = 1e-13);
        assert_abs_diff_eq!(atom_inner_product(&ch_b, &c, x), mixed, epsilon = 1e-13);
    }

    #[test]
    fn basis_trivial_n0() {
        let b = build_basis(&SpectralData::trivial(1)).unwrap();
        assert_eq!(b.dim(), 2);
        assert_abs_diff_eq!(b.atoms_a[0].amplitude, PI.powf(-0.5), epsilon = 1e-15);
        assert_eq!(b.atoms_a[0].freq, 0.0);
        assert_eq!(b.atoms_b[0], b.atoms_a[0].negated());
        assert_eq!(b.atoms_a[1], b.atoms_b[1]);
        assert_abs_diff_eq!(b.atoms_a[1].amplitude, PI.powf(-0.5), epsilon = 1e-15);
        let k = KernelFN::new(&SpectralData::trivial(1)).unwrap();
        assert_abs_diff_eq!(k.eval_k(0.4, 1.9), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn basis_layout() {
        let d = rank_one(3, 1.0);
        let b = build_basis(&d).unwrap();
        assert_eq!(b.n, 3);
        assert_eq!(b.dim(), 8);
        for i in 4..=6 {
            assert_eq!(b.atoms_a[i].freq, (i - 3) as f64);
            assert_abs_diff_eq!(b.atoms_a[i].amplitude, FRAC_2_PI.sqrt(), epsilon = 1e-15);
        }
        assert_eq!(b.atoms_a[7].freq, 0.0);
    }

    #[test]
    fn basis_hyperbolic_ground_state() {
        let d = SpectralData::new(vec![-1.0, 1.0], vec![PI, FRAC_PI_2]).unwrap();
        let b = build_basis(&d).unwrap();
        assert_eq!(b.atoms_a[0].branch, Branch::Hyperbolic);
        assert_eq!(b.atoms_a[0].freq, 1.0);
    }

    #[test]
    fn rank_one_kernel_is_product_of_cosines() {
        for n0 in [1usize, 3, 7] {
            let k = KernelFN::new(&rank_one(n0, PI / (PI + 2.0))).unwrap();
            for &(x, y) in &[(0.0, 0.0), (0.3, 2.0), (PI, 1.1), (2.5, 2.5)] {
                let expected = (n0 as f64 * x).cos() * (n0 as f64 * y).cos();
                assert_abs_diff_eq!(k.eval_f(x, y), expected, epsilon = 1e-13);
            }
            assert_abs_diff_eq!(-k.eval_f(0.0, 0.0), -1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn trivial_kernel_vanishes() {
        let k = KernelFN::new(&SpectralData::trivial(9)).unwrap();
        assert!(k.is_trivial());
        for i in 0..20 {
            let x = i as f64 * PI / 19.0;
            assert_abs_diff_eq!(k.eval_f(x, PI - x), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn degenerate_identity_on_grid() {
        let d = SpectralData::new(
            vec![-0.3, 1.2, 3.9, 9.4, 16.0],
            vec![2.9, 1.4, 1.7, 1.5, 1.6],
        )
        .unwrap();
        let k = KernelFN::new(&d).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..50 {
            for j in 0..50 {
                let t = i as f64 * PI / 49.0;
                let s = j as f64 * PI / 49.0;
                worst = worst.max((k.eval_k(t, s) + k.eval_f(s, t)).abs());
                assert_eq!(k.eval_f(t, s), k.eval_f(s, t));
            }
        }
        assert!(worst <= 1e-14, "worst {worst}");
    }

    #[test]
    fn phi_representation() {
        let d = SpectralData::new(vec![0.2, 1.1, 4.3], vec![3.0, 1.5, 1.6]).unwrap();
        let k = KernelFN::new(&d).unwrap();
        for &(x, y) in &[(0.3, 0.9), (2.0, 1.0), (PI, PI)] {
            let via_phi = 0.5 * (k.phi(x + y) + k.phi(x - y));
            assert_abs_diff_eq!(via_phi, k.eval_f(x, y), epsilon = 1e-13);
        }
    }

    fn taylor_sinc_term(w: f64, x: f64) -> f64 {
        // ∫₀ˣ cos(ws) ds = Σ_k (−1)^k w^{2k} x^{2k+1} / (2k+1)!
        let mut term = x;
        let mut sum = x;
        for k in 1..50 {
            term *= -(w * x).powi(2) / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term;
        }
        sum
    }

    proptest! {
        #[test]
        fn near_resonant_frequencies_are_stable(
            a in 0.0f64..20.0,
            d in -1e-6f64..1e-6,
            x in 0.0f64..PI,
        ) {
            let b = (a + d).abs();
            let sum_term = if a + b == 0.0 { x } else { ((a + b) * x).sin() / (a + b) };
            let expected = 0.5 * (taylor_sinc_term(a - b, x) + sum_term);
            prop_assert!((cos_product_integral(a, b, x) - expected).abs() <= 1e-12);
        }

        #[test]
        fn product_integral_symmetric(a in 0.0f64..30.0, b in 0.0f64..30.0, x in 0.0f64..PI) {
            prop_assert_eq!(cos_product_integral(a, b, x), cos_product_integral(b, a, x));
        }
    }
}
