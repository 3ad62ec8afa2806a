//! Per-abscissa solution of the Gel'fand–Levitan–Marchenko equation
//!
//! ```text
//! K(x, y) + F_N(x, y) + ∫₀ˣ K(x, t) F_N(t, y) dt = 0,    0 ≤ y ≤ x ≤ π,
//! ```
//!
//! through its degenerate kernel. With `u_x(y) = K(x, y)`,
//! `f_x(y) = −F_N(x, y) = Σ B_i(x) A_i(y)` and the ansatz
//! `u_x = f_x + Σ c_i A_i`, the equation becomes the `(2N+2)`-dimensional
//! system `(I − 𝔄) c = 𝔟` with `𝔄_ij = ⟨A_j, B_i⟩` and `𝔟_i = ⟨f_x, B_i⟩`,
//! all inner products taken over `[0, x]` in closed form.
//!
//! [`solve_nystrom`] is an independent trapezoid-rule discretization used to
//! cross-check the closed-form route.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::trig_kernel::{atom_inner_product, BasisSet, KernelFN, TrigAtom};

/// Backward-error acceptance for a solved system, relative to `1 + ‖𝔟‖_∞`.
const BACKWARD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GlmSystem {
    pub x: f64,
    /// `I − 𝔄`.
    pub matrix: DMatrix<f64>,
    /// `𝔟`.
    pub rhs: DVector<f64>,
}

fn check_abscissa(x: f64) -> Result<()> {
    if !(0.0..=PI).contains(&x) {
        return Err(Error::Domain { x, y: x });
    }
    Ok(())
}

/// `𝔄_ij = ⟨A_j, B_i⟩_{L²[0, x]}`.
fn coupling_matrix(basis: &BasisSet, x: f64) -> DMatrix<f64> {
    let d = basis.dim();
    let mut gram = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let g = atom_inner_product(&basis.atoms_a[i], &basis.atoms_a[j], x);
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
    }
    // B_i = sign_i A_i, so ⟨A_j, B_i⟩ = sign_i ⟨A_j, A_i⟩.
    for i in 0..d {
        let s = basis.sign(i);
        gram.row_mut(i).scale_mut(s);
    }
    gram
}

/// `(B_i(x))_i`.
fn b_values(basis: &BasisSet, x: f64) -> DVector<f64> {
    DVector::from_iterator(basis.dim(), basis.atoms_b.iter().map(|b| b.eval(x)))
}

/// Assemble `(I − 𝔄) c = 𝔟` at abscissa `x`.
pub fn assemble(kernel: &KernelFN, x: f64) -> Result<GlmSystem> {
    check_abscissa(x)?;
    let basis = kernel.basis();
    let coupling = coupling_matrix(basis, x);
    // f_x = Σ_j B_j(x) A_j, hence ⟨f_x, B_i⟩ = Σ_j 𝔄_ij B_j(x).
    let rhs = &coupling * b_values(basis, x);
    let matrix = DMatrix::identity(basis.dim(), basis.dim()) - coupling;
    Ok(GlmSystem { x, matrix, rhs })
}

/// Solve the assembled system with partially pivoted LU.
pub fn solve_coefficients(sys: &GlmSystem) -> Result<DVector<f64>> {
    let n = sys.matrix.nrows();
    let lu = sys.matrix.clone().lu();
    let u = lu.u();
    let pivots = u.diagonal().map(f64::abs);
    let largest = pivots.max();
    if pivots.min() <= n as f64 * f64::EPSILON * largest.max(1.0) {
        return Err(Error::SingularSystem { x: sys.x });
    }
    let c = lu
        .solve(&sys.rhs)
        .ok_or(Error::SingularSystem { x: sys.x })?;
    let residual = (&sys.matrix * &c - &sys.rhs).amax();
    if !residual.is_finite() || residual > BACKWARD_TOL * (1.0 + sys.rhs.amax()) {
        return Err(Error::SingularSystem { x: sys.x });
    }
    Ok(c)
}

/// Evaluates `K_N(x, y)`, caching one coefficient solve per abscissa.
#[derive(Debug)]
pub struct KnEvaluator {
    kernel: KernelFN,
    trivial: bool,
    cache: RwLock<HashMap<u64, Arc<DVector<f64>>>>,
}

impl KnEvaluator {
    pub fn new(kernel: KernelFN) -> Self {
        Self {
            trivial: kernel.is_trivial(),
            kernel,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn kernel(&self) -> &KernelFN {
        &self.kernel
    }

    pub fn cached_abscissae(&self) -> usize {
        self.cache.read().map(|c| c.len()).unwrap_or(0)
    }

    /// `c(x)`.
    pub fn coefficients(&self, x: f64) -> Result<Arc<DVector<f64>>> {
        let key = x.to_bits();
        if let Some(c) = self.cache.read().ok().and_then(|c| c.get(&key).cloned()) {
            return Ok(c);
        }
        let c = Arc::new(solve_coefficients(&assemble(&self.kernel, x)?)?);
        if let Ok(mut cache) = self.cache.write() {
            cache.entry(key).or_insert_with(|| c.clone());
        }
        Ok(c)
    }

    /// Weights `w_i(x) = B_i(x) + c_i(x)` with `K(x, ·) = Σ w_i A_i`.
    pub fn row_weights(&self, x: f64) -> Result<DVector<f64>> {
        let c = self.coefficients(x)?;
        Ok(b_values(self.kernel.basis(), x) + c.as_ref())
    }

    /// `K(x, ·)` as an explicit list of atoms.
    pub fn row_atoms(&self, x: f64) -> Result<Vec<TrigAtom>> {
        let w = self.row_weights(x)?;
        Ok(self
            .kernel
            .basis()
            .atoms_a
            .iter()
            .zip(w.iter())
            .map(|(a, &wi)| TrigAtom {
                amplitude: a.amplitude * wi,
                ..*a
            })
            .collect())
    }

    /// `K_N(x, y)` for `0 ≤ y ≤ x ≤ π`.
    pub fn eval_k(&self, x: f64, y: f64) -> Result<f64> {
        if !(0.0..=PI).contains(&x) || !(0.0..=x).contains(&y) {
            return Err(Error::Domain { x, y });
        }
        // F ≡ 0 exactly; skip the rounding noise of cancelling atom pairs
        if self.trivial {
            return Ok(0.0);
        }
        let w = self.row_weights(x)?;
        Ok(self
            .kernel
            .basis()
            .atoms_a
            .iter()
            .zip(w.iter())
            .map(|(a, wi)| wi * a.eval(y))
            .sum())
    }

    /// `K_N(x, x)`.
    pub fn diagonal(&self, x: f64) -> Result<f64> {
        self.eval_k(x, x)
    }

    /// `K(x, y) + F(x, y) + ∫₀ˣ K(x, t) F(t, y) dt`, with the integral taken in
    /// closed form from the atom expansion of `K(x, ·)`.
    pub fn residual(&self, x: f64, y: f64) -> Result<f64> {
        let row = self.row_atoms(x)?;
        let basis = self.kernel.basis();
        // F(t, y) = −Σ_i A_i(y) B_i(t)
        let integral: f64 = basis
            .atoms_a
            .iter()
            .zip(&basis.atoms_b)
            .map(|(a, b)| {
                let proj: f64 = row.iter().map(|r| atom_inner_product(r, b, x)).sum();
                -a.eval(y) * proj
            })
            .sum();
        Ok(self.eval_k(x, y)? + self.kernel.eval_f(x, y) + integral)
    }
}

/// Trapezoid-rule solution of the GLM equation at a fixed `x`.
#[derive(Debug, Clone)]
pub struct NystromSolution {
    pub x: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
    kernel: KernelFN,
}

impl NystromSolution {
    /// Nyström interpolant `K̃(x, y) = −F(x, y) − Σ_l w_l K̃(x, t_l) F(t_l, y)`.
    pub fn eval(&self, y: f64) -> f64 {
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.values)
            .map(|((&t, &w), &k)| w * k * self.kernel.eval_f(t, y))
            .sum();
        -self.kernel.eval_f(self.x, y) - sum
    }
}

/// Solve the GLM equation on `[0, x]` with the `m`-node composite trapezoid rule.
///
/// Kernel values come from the direct spectral sum for `F_N` (tabulated
/// through `Φ_N`), not from the atom representation.
pub fn solve_nystrom(kernel: &KernelFN, x: f64, m: usize) -> Result<NystromSolution> {
    if m < 2 {
        return Err(Error::Validation(format!(
            "Nyström needs m >= 2 nodes, got {m}"
        )));
    }
    check_abscissa(x)?;
    let h = x / (m - 1) as f64;
    let nodes: Vec<f64> = (0..m).map(|i| i as f64 * h).collect();
    let mut weights = vec![h; m];
    weights[0] *= 0.5;
    weights[m - 1] *= 0.5;

    // F(t_l, t_k) = (Φ(t_l + t_k) + Φ(t_l − t_k))/2 with t_l ± t_k on the grid.
    let offset = m - 1;
    let phi: Vec<f64> = (0..3 * m - 2)
        .map(|j| kernel.phi((j as f64 - offset as f64) * h))
        .collect();
    let f_grid = |l: usize, k: usize| 0.5 * (phi[l + k + offset] + phi[l + offset - k]);

    let mut matrix = DMatrix::identity(m, m);
    for k in 0..m {
        for l in 0..m {
            matrix[(k, l)] += weights[l] * f_grid(l, k);
        }
    }
    let rhs = DVector::from_iterator(m, nodes.iter().map(|&t| -kernel.eval_f(x, t)));
    let values = matrix.lu().solve(&rhs).ok_or(Error::SingularSystem { x })?;
    Ok(NystromSolution {
        x,
        nodes,
        weights,
        values: values.iter().copied().collect(),
        kernel: kernel.clone(),
    })
}
