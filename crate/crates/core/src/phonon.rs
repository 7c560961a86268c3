//! Phonon-state tomography: reference states, position density, Wigner
//! function, Uhlmann–Jozsa fidelity, purity and quadrature variances.
//!
//! Quadratures are dimensionless, `X = (a + a†)/√2`, `P = i(a† − a)/√2`, so
//! the vacuum has variance 1/2 in both and a coherent state `|α⟩` (real α)
//! sits at `x = √2 α`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{hermite_functions, ln_factorial, weighted_laguerre};
use crate::spectra::{PhononDensityMatrix, PSD_TOL};

/// Tail mass above which a truncated coherent state is reported.
pub const TAIL_WARNING: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ReferenceKind {
    Vacuum,
    Coherent(f64),
    /// `A_+ (|α₀⟩ + |−α₀⟩)`
    CatPlus(f64),
    /// `A_− (|α₀⟩ − |−α₀⟩)`
    CatMinus(f64),
    /// `(|α₀⟩⟨α₀| + |−α₀⟩⟨−α₀|) / 2`
    Mixture(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceState {
    pub kind: ReferenceKind,
    pub n_max: usize,
}

impl ReferenceState {
    pub fn new(kind: ReferenceKind, n_max: usize) -> Self {
        Self { kind, n_max }
    }
}

/// Probability outside `0..=n_max` of the untruncated coherent state.
pub fn coherent_tail_mass(alpha: f64, n_max: usize) -> f64 {
    let t = alpha * alpha;
    let kept: f64 = (0..=n_max).map(|n| poisson(t, n)).sum();
    (1.0 - kept).max(0.0)
}

fn poisson(t: f64, n: usize) -> f64 {
    if t == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (n as f64 * t.ln() - t - ln_factorial(n)).exp()
}

/// Smallest cutoff suggested for `|α⟩`: `|α|² + 6√(|α|² + 1)`.
pub fn suggested_cutoff(alpha: f64) -> usize {
    let t = alpha * alpha;
    (t + 6.0 * (t + 1.0).sqrt()).ceil() as usize
}

/// `e^(−α²/2) αⁿ/√n!` on `0..=n_max`, renormalized after truncation.
pub fn coherent_state(alpha: f64, n_max: usize) -> Result<DVector<f64>> {
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be finite (got {alpha})")));
    }
    let tail = coherent_tail_mass(alpha, n_max);
    if tail > TAIL_WARNING {
        log::warn!(
            "coherent state alpha = {alpha} truncated at n_max = {n_max}: tail mass {tail:e} (suggested n_max >= {})",
            suggested_cutoff(alpha)
        );
    }
    let t = alpha * alpha;
    let mut v = DVector::from_fn(n_max + 1, |n, _| {
        if t == 0.0 {
            return if n == 0 { 1.0 } else { 0.0 };
        }
        let sign = if alpha < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
        sign * (0.5 * (n as f64 * t.ln() - t - ln_factorial(n))).exp()
    });
    let norm = v.norm();
    v /= norm;
    Ok(v)
}

/// Density matrix of a reference state.
pub fn reference_density(reference: &ReferenceState) -> Result<PhononDensityMatrix> {
    let n = reference.n_max;
    match reference.kind {
        ReferenceKind::Vacuum => PhononDensityMatrix::pure(&coherent_state(0.0, n)?),
        ReferenceKind::Coherent(a) => PhononDensityMatrix::pure(&coherent_state(a, n)?),
        ReferenceKind::CatPlus(a) | ReferenceKind::CatMinus(a) => {
            let sign = if matches!(reference.kind, ReferenceKind::CatPlus(_)) { 1.0 } else { -1.0 };
            let overlap = (-2.0 * a * a).exp();
            if 1.0 + sign * overlap <= 0.0 {
                return Err(Error::InvalidParameter("odd cat state needs alpha != 0".into()));
            }
            let norm = 1.0 / (2.0 * (1.0 + sign * overlap)).sqrt();
            let mut v = (coherent_state(a, n)? + coherent_state(-a, n)? * sign) * norm;
            v /= v.norm();
            PhononDensityMatrix::pure(&v)
        }
        ReferenceKind::Mixture(a) => {
            let p = coherent_state(a, n)?;
            let m = coherent_state(-a, n)?;
            let rho = (&p * p.transpose() + &m * m.transpose()) * 0.5;
            PhononDensityMatrix::new(rho)
        }
    }
}

/// Highest Fock index carrying weight; `|ρ_mn| <= √(ρ_mm ρ_nn)` makes the
/// rest negligible.
fn support(rho: &DMatrix<f64>) -> usize {
    (0..rho.nrows()).rev().find(|&n| rho[(n, n)] > 1e-30).unwrap_or(0)
}

/// `ρ(x) = Σ ρ_mn ψ_m(x) ψ_n(x)` on the given points.
pub fn position_density(rho: &PhononDensityMatrix, x_grid: &[f64]) -> Vec<f64> {
    let m = rho.as_matrix();
    let top = support(m);
    let sub = m.view((0, 0), (top + 1, top + 1));
    x_grid
        .par_iter()
        .map(|&x| {
            let psi = DVector::from_vec(hermite_functions(x, top));
            psi.dot(&(sub * &psi))
        })
        .collect()
}

/// Rectangular phase-space grid in dimensionless quadrature units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl Default for PhaseSpaceGrid {
    fn default() -> Self {
        Self { x_min: -8.0, x_max: 8.0, p_min: -8.0, p_max: 8.0, nx: 161, np: 161 }
    }
}

impl PhaseSpaceGrid {
    pub fn validate(&self) -> Result<()> {
        let b = [self.x_min, self.x_max, self.p_min, self.p_max];
        if b.iter().any(|v| !v.is_finite()) || !(self.x_max > self.x_min) || !(self.p_max > self.p_min) {
            return Err(Error::InvalidParameter(format!("bad phase-space bounds {self:?}")));
        }
        if self.nx < 2 || self.np < 2 {
            return Err(Error::InvalidParameter("phase-space grid needs at least 2 points per axis".into()));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn ps(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.np)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { b } else { a + i as f64 * h }).collect()
}

/// Wigner function sampled on a grid; `values[(i, j)]` is `W(x_i, p_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerMap {
    pub grid: PhaseSpaceGrid,
    pub values: DMatrix<f64>,
}

impl WignerMap {
    pub fn min(&self) -> f64 {
        self.values.min()
    }

    /// Trapezoid estimate of `∬ W dx dp`.
    pub fn integral(&self) -> f64 {
        let (nx, np) = (self.grid.nx, self.grid.np);
        let w = |i: usize, n: usize| if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        let mut s = 0.0;
        for i in 0..nx {
            for j in 0..np {
                s += w(i, nx) * w(j, np) * self.values[(i, j)];
            }
        }
        s * self.grid.dx() * self.grid.dp()
    }

    /// Trapezoid `∫ W(x, p) dp` at every grid `x`.
    pub fn x_marginal(&self) -> Vec<f64> {
        let np = self.grid.np;
        (0..self.grid.nx)
            .map(|i| {
                let s: f64 = (0..np)
                    .map(|j| self.values[(i, j)] * if j == 0 || j + 1 == np { 0.5 } else { 1.0 })
                    .sum();
                s * self.grid.dp()
            })
            .collect()
    }
}

/// `W(x, p) = (1/π) Σ_n Σ_k (−1)^n (2 − δ_k0) ρ_{n+k,n} Q_n^(k)(t) cos kθ`,
/// `t = 2(x² + p²)`, `θ = atan2(p, x)`, with the weighted Laguerre functions
/// of [`weighted_laguerre`]. Vacuum: `W = e^(−x²−p²)/π`.
pub fn wigner_point(rho: &DMatrix<f64>, top: usize, x: f64, p: f64) -> f64 {
    let t = 2.0 * (x * x + p * p);
    let theta = p.atan2(x);
    let mut w = 0.0;
    for k in 0..=top {
        let q = weighted_laguerre(t, k, top + 1 - k);
        let mut s = 0.0;
        for (n, &qn) in q.iter().enumerate() {
            let term = rho[(n + k, n)] * qn;
            s += if n % 2 == 0 { term } else { -term };
        }
        w += if k == 0 { s } else { 2.0 * s * (k as f64 * theta).cos() };
    }
    w / PI
}

/// Wigner function on a grid, rows evaluated in parallel.
pub fn wigner(rho: &PhononDensityMatrix, grid: &PhaseSpaceGrid) -> Result<WignerMap> {
    grid.validate()?;
    if grid.dx() > 0.2 || grid.dp() > 0.2 {
        log::warn!("coarse Wigner grid: dx = {}, dp = {}", grid.dx(), grid.dp());
    }
    let m = rho.as_matrix();
    let top = support(m);
    let xs = grid.xs();
    let ps = grid.ps();
    let rows: Vec<Vec<f64>> =
        xs.par_iter().map(|&x| ps.iter().map(|&p| wigner_point(m, top, x, p)).collect()).collect();
    let values = DMatrix::from_fn(grid.nx, grid.np, |i, j| rows[i][j]);
    Ok(WignerMap { grid: *grid, values })
}

fn check_state(rho: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let tr = rho.trace();
    if (tr - 1.0).abs() > crate::spectra::TRACE_TOL {
        return Err(Error::NotAState(format!("trace {tr} differs from 1")));
    }
    // Far-tail entries of near-vacuum states (~1e-200 and below) overflow the
    // Householder step; anything under ε² of the largest entry is below rounding.
    let cut = f64::EPSILON * f64::EPSILON * rho.amax();
    let flushed = rho.map(|v| if v.abs() < cut { 0.0 } else { v });
    let eig = SymmetricEigen::try_new(flushed, f64::EPSILON, 1000 * rho.nrows())
        .filter(|e| e.eigenvalues.iter().all(|l| l.is_finite()))
        .ok_or(Error::NonConvergence { block: 0, dim: rho.nrows() })?;
    let min = eig.eigenvalues.min();
    if min < -PSD_TOL {
        return Err(Error::NotAState(format!("negative eigenvalue {min:e}")));
    }
    Ok(eig)
}

/// Eigenvalues at or below this fraction of the largest count as rounding noise.
const RANK_FLOOR: f64 = 64.0 * f64::EPSILON;

/// `W` with `W Wᵀ = ρ`, keeping only eigenvalues above the rounding floor.
fn support_factor(eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> DMatrix<f64> {
    let top = eig.eigenvalues.max().max(0.0);
    let kept: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > RANK_FLOOR * top).collect();
    DMatrix::from_fn(eig.eigenvectors.nrows(), kept.len(), |r, c| {
        eig.eigenvectors[(r, kept[c])] * eig.eigenvalues[kept[c]].sqrt()
    })
}

fn padded(rho: &PhononDensityMatrix, n_max: usize) -> DMatrix<f64> {
    if rho.n_max() == n_max {
        rho.as_matrix().clone()
    } else {
        rho.resized(n_max).as_matrix().clone()
    }
}

/// Uhlmann–Jozsa fidelity `(Tr √(√ρ σ √ρ))²`. With `ρ = W Wᵀ` on its
/// support, `√ρ σ √ρ` and `Wᵀ σ W` share their nonzero eigenvalues, so the
/// trace is taken over the `rank(ρ)`-dimensional block (the lower-rank state
/// plays `ρ`). States of different cutoff are zero-padded.
pub fn fidelity(rho: &PhononDensityMatrix, sigma: &PhononDensityMatrix) -> Result<f64> {
    let n = rho.n_max().max(sigma.n_max());
    let (a, b) = (padded(rho, n), padded(sigma, n));
    let (wa, wb) = (support_factor(&check_state(&a)?), support_factor(&check_state(&b)?));
    let (w, other) = if wa.ncols() <= wb.ncols() { (wa, &b) } else { (wb, &a) };
    let k = w.transpose() * other * &w;
    let k = (&k + k.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(k, f64::EPSILON, 1000 * w.ncols().max(1))
        .ok_or(Error::NonConvergence { block: 0, dim: w.ncols() })?;
    let s: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok(s * s)
}

/// `Tr ρ²`.
pub fn purity(rho: &PhononDensityMatrix) -> f64 {
    rho.as_matrix().iter().map(|v| v * v).sum()
}

/// `(⟨X²⟩ − ⟨X⟩², ⟨P²⟩ − ⟨P⟩²)`; `⟨P⟩ = 0` for real density matrices.
pub fn quadrature_variances(rho: &PhononDensityMatrix) -> (f64, f64) {
    let m = rho.as_matrix();
    let d = m.nrows();
    let mut mean_a = 0.0;
    let mut mean_a2 = 0.0;
    let mut mean_n = 0.0;
    for n in 0..d {
        mean_n += n as f64 * m[(n, n)];
        if n + 1 < d {
            mean_a += ((n + 1) as f64).sqrt() * m[(n, n + 1)];
        }
        if n + 2 < d {
            mean_a2 += (((n + 1) * (n + 2)) as f64).sqrt() * m[(n, n + 2)];
        }
    }
    let mean_x = std::f64::consts::SQRT_2 * mean_a;
    let var_x = 0.5 * (2.0 * mean_a2 + 2.0 * mean_n + 1.0) - mean_x * mean_x;
    let var_p = 0.5 * (2.0 * mean_n + 1.0 - 2.0 * mean_a2);
    (var_x, var_p)
}

/// `⟨X⟩`.
pub fn mean_position(rho: &PhononDensityMatrix) -> f64 {
    let m = rho.as_matrix();
    let s: f64 = (0..m.nrows() - 1).map(|n| ((n + 1) as f64).sqrt() * m[(n, n + 1)]).sum();
    std::f64::consts::SQRT_2 * s
}
