//! Mean-field ground state: the phonon mode is replaced by a real coherent
//! amplitude α and the 4 × 4 spin problem is solved exactly,
//!
//! ```text
//! 𝓔(α) = ωα² + λ_min[Ω(σ1x + σ2x) + ε(σ1z + σ2z) + 2gα σ1z σ2z]
//! ```
//!
//! The spin problem splits into the singlet (eigenvalue `−2gα`) and a 3 × 3
//! triplet block whose lowest root is taken in closed form.

use std::f64::consts::{SQRT_2, TAU};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Triplet block on `{|↑↑⟩, |+⟩, |↓↓⟩}` for the amplitude `alpha`.
fn triplet_block(alpha: f64, p: &ModelParams) -> [[f64; 3]; 3] {
    let x = 2.0 * p.g * alpha;
    let o = SQRT_2 * p.rabi;
    [[x + 2.0 * p.eps, o, 0.0], [o, -x, o], [0.0, o, x - 2.0 * p.eps]]
}

/// Smallest eigenvalue of a symmetric 3 × 3 matrix, trigonometric form.
fn lowest_eigenvalue(a: &[[f64; 3]; 3]) -> f64 {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (0..3).map(|i| (a[i][i] - q).powi(2)).sum::<f64>() + 2.0 * p1;
    if p2 == 0.0 {
        return q;
    }
    let p = (p2 / 6.0).sqrt();
    let b = |i: usize, j: usize| (a[i][j] - if i == j { q } else { 0.0 }) / p;
    let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let phi = (0.5 * det).clamp(-1.0, 1.0).acos() / 3.0;
    newton_refine(a, q + 2.0 * p * (phi + TAU / 3.0).cos())
}

/// Newton steps on `det(a − λ)`. The acos above loses digits when two
/// eigenvalues nearly coincide; the lowest root itself stays simple.
fn newton_refine(a: &[[f64; 3]; 3], mut lambda: f64) -> f64 {
    for _ in 0..2 {
        let m = |i: usize, j: usize| a[i][j] - if i == j { lambda } else { 0.0 };
        let minor = |i: usize, j: usize| m(i, i) * m(j, j) - m(i, j) * m(j, i);
        let f = m(0, 0) * minor(1, 2) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
        let df = -(minor(0, 1) + minor(0, 2) + minor(1, 2));
        let step = f / df;
        if !step.is_finite() || step.abs() > 1e-6 * (1.0 + lambda.abs()) {
            break;
        }
        lambda -= step;
    }
    lambda
}

/// Eigenvector of `a` for eigenvalue `lambda` from the largest cross product
/// of two rows of `a − λ`.
fn eigenvector(a: &[[f64; 3]; 3], lambda: f64) -> [f64; 3] {
    let r = |i: usize| [a[i][0] - if i == 0 { lambda } else { 0.0 }, a[i][1] - if i == 1 { lambda } else { 0.0 }, a[i][2] - if i == 2 { lambda } else { 0.0 }];
    let cross = |u: [f64; 3], v: [f64; 3]| [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    let cands = [cross(r(0), r(1)), cross(r(0), r(2)), cross(r(1), r(2))];
    let norm2 = |v: &[f64; 3]| v.iter().map(|x| x * x).sum::<f64>();
    let best = cands.iter().max_by(|x, y| norm2(x).total_cmp(&norm2(y))).copied().unwrap();
    let n = norm2(&best).sqrt();
    if n == 0.0 {
        return [0.0, 1.0, 0.0];
    }
    [best[0] / n, best[1] / n, best[2] / n]
}

/// Lowest spin energy and `⟨σ1z σ2z⟩` in that state.
fn spin_ground(alpha: f64, p: &ModelParams) -> (f64, f64) {
    let t = triplet_block(alpha, p);
    let lt = lowest_eigenvalue(&t);
    let singlet = -2.0 * p.g * alpha;
    if singlet < lt {
        return (singlet, -1.0);
    }
    let v = eigenvector(&t, lt);
    (lt, v[0] * v[0] - v[1] * v[1] + v[2] * v[2])
}

/// `𝓔(α)`; at ε = 0 this is `ωα² − 2√(g²α² + Ω²)`.
pub fn energy_functional(alpha: f64, params: &ModelParams) -> f64 {
    params.omega * alpha * alpha + spin_ground(alpha, params).0
}

/// `d𝓔/dα = 2ωα + 2g⟨σ1z σ2z⟩` (Hellmann–Feynman).
pub fn energy_gradient(alpha: f64, params: &ModelParams) -> f64 {
    2.0 * params.omega * alpha + 2.0 * params.g * spin_ground(alpha, params).1
}

/// Large-detuning form `ωα² + 2gα − 2ε`.
pub fn detuned_limit(alpha: f64, params: &ModelParams) -> f64 {
    params.omega * alpha * alpha + 2.0 * params.g * alpha - 2.0 * params.eps
}

/// `α₀ = √(g²/ω² − Ω²/g²)` above the critical coupling, else `None`.
pub fn superradiant_amplitude(params: &ModelParams) -> Option<f64> {
    if params.g.abs() <= params.critical_coupling() {
        return None;
    }
    let g2 = params.g * params.g;
    Some((g2 / (params.omega * params.omega) - params.rabi * params.rabi / g2).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Subradiant,
    SuperradiantPlus,
    SuperradiantMinus,
    DetunedUnique,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanFieldResult {
    pub alpha_star: f64,
    pub energy: f64,
    pub branch: Branch,
    /// `±α_star` are both minima (resonant superradiant phase); `alpha_star`
    /// is the positive representative.
    pub degenerate: bool,
    pub gradient: f64,
}

const SCAN_STEP: f64 = 1e-2;
const GOLDEN_TOL: f64 = 1e-12;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > GOLDEN_TOL {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Bisection on the gradient inside `[a, b]` when it changes sign there.
fn polish(params: &ModelParams, alpha: f64, a: f64, b: f64) -> f64 {
    let grad = |x: f64| energy_gradient(x, params);
    let (mut lo, mut hi) = (a, b);
    let (glo, ghi) = (grad(lo), grad(hi));
    if !(glo < 0.0 && ghi > 0.0) {
        return alpha;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = grad(mid);
        if g == 0.0 {
            return mid;
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if grad(lo).abs() <= grad(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Global minimum of 𝓔 by a scan over `±(2|g|/ω + 2)` followed by golden
/// section and a gradient polish.
pub fn scan_minimum(params: &ModelParams) -> f64 {
    let reach = 2.0 * params.g.abs() / params.omega + 2.0;
    let n = (2.0 * reach / SCAN_STEP).ceil() as usize;
    let pts: Vec<f64> = (0..=n).map(|k| -reach + k as f64 * SCAN_STEP).collect();
    let f = |x: f64| energy_functional(x, params);
    let best = (0..pts.len()).min_by(|&i, &j| f(pts[i]).total_cmp(&f(pts[j]))).unwrap();
    let a = pts[best.saturating_sub(1)];
    let b = pts[(best + 1).min(pts.len() - 1)];
    let alpha = golden_section(f, a, b);
    polish(params, alpha, a, b)
}

/// Mean-field ground state. At ε = 0 the closed forms (`α = 0` for
/// `|g| <= g_c`, `±α₀` above) are returned and cross-checked against the
/// numerical minimum; otherwise the numerical minimum is returned.
pub fn minimize_alpha(params: &ModelParams) -> Result<MeanFieldResult> {
    params.validate()?;
    let numeric = scan_minimum(params);
    let (alpha, branch, degenerate) = if params.is_resonant() {
        match superradiant_amplitude(params) {
            None => (0.0, Branch::Subradiant, false),
            Some(a0) => (a0, Branch::SuperradiantPlus, true),
        }
    } else {
        (numeric, Branch::DetunedUnique, false)
    };
    let energy = energy_functional(alpha, params);
    if params.is_resonant() && energy_functional(numeric, params) < energy - 1e-10 * params.omega {
        return Err(Error::InvalidParameter(format!(
            "closed-form mean-field minimum {alpha} is not global (numerical {numeric})"
        )));
    }
    Ok(MeanFieldResult { alpha_star: alpha, energy, branch, degenerate, gradient: energy_gradient(alpha, params) })
}

/// Mean-field energy and its finite-difference derivatives over a coupling grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyCurve {
    pub g: Vec<f64>,
    pub alpha: Vec<f64>,
    pub energy: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// Grid cell `(g_i, g_{i+1})` with the largest jump of `d²E/dg²`.
    pub transition_cell: (f64, f64),
    pub max_jump: f64,
}

/// Central differences inside the grid, second-order one-sided at the ends.
pub fn ground_energy_curve(params_base: &ModelParams, g_grid: &[f64]) -> Result<EnergyCurve> {
    if g_grid.len() < 4 {
        return Err(Error::InvalidParameter("coupling grid needs at least 4 points".into()));
    }
    let h = g_grid[1] - g_grid[0];
    if !(h > 0.0) || g_grid.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(w[1].abs())) {
        return Err(Error::InvalidParameter("coupling grid must be uniform and ascending".into()));
    }
    let results: Vec<MeanFieldResult> =
        g_grid.par_iter().map(|&g| minimize_alpha(&params_base.with_g(g))).collect::<Result<_>>()?;
    let e: Vec<f64> = results.iter().map(|r| r.energy).collect();
    let n = e.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 1..n - 1 {
        d1[i] = (e[i + 1] - e[i - 1]) / (2.0 * h);
        d2[i] = (e[i + 1] - 2.0 * e[i] + e[i - 1]) / (h * h);
    }
    d1[0] = (-3.0 * e[0] + 4.0 * e[1] - e[2]) / (2.0 * h);
    d1[n - 1] = (3.0 * e[n - 1] - 4.0 * e[n - 2] + e[n - 3]) / (2.0 * h);
    d2[0] = (2.0 * e[0] - 5.0 * e[1] + 4.0 * e[2] - e[3]) / (h * h);
    d2[n - 1] = (2.0 * e[n - 1] - 5.0 * e[n - 2] + 4.0 * e[n - 3] - e[n - 4]) / (h * h);

    let (mut cell, mut max_jump) = (0, 0.0);
    for i in 1..n - 2 {
        let jump = (d2[i + 1] - d2[i]).abs();
        if jump > max_jump {
            max_jump = jump;
            cell = i;
        }
    }
    Ok(EnergyCurve {
        g: g_grid.to_vec(),
        alpha: results.iter().map(|r| r.alpha_star).collect(),
        energy: e,
        d1,
        d2,
        transition_cell: (g_grid[cell], g_grid[cell + 1]),
        max_jump,
    })
}

/// Uniform grid `start, start + step, …` up to `stop` (inclusive within rounding).
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidParameter(format!("bad grid {start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn p(omega: f64, rabi: f64, eps: f64, g: f64) -> ModelParams {
        ModelParams::new(omega, rabi, eps, g).unwrap()
    }

    /// 4 × 4 spin Hamiltonian diagonalized numerically.
    fn oracle(alpha: f64, params: &ModelParams) -> f64 {
        use crate::model::pauli;
        let (x1, x2) = (pauli::on(1, &pauli::x()), pauli::on(2, &pauli::x()));
        let (z1, z2) = (pauli::on(1, &pauli::z()), pauli::on(2, &pauli::z()));
        let h: DMatrix<f64> =
            (&x1 + &x2) * params.rabi + (&z1 + &z2) * params.eps + (&z1 * &z2) * (2.0 * params.g * alpha);
        let min = h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        params.omega * alpha * alpha + min
    }

    #[test]
    fn functional_matches_spin_diagonalization() {
        for params in [p(1.0, 0.4, 0.2, 0.5), p(1.3, 1.0, -0.7, 2.1), p(1.0, 0.0, 0.3, 1.0), p(1.0, 1.0, 0.0, 0.0)] {
            for &alpha in &[-2.5, -0.3, 0.0, 0.01, 1.7] {
                let a = energy_functional(alpha, &params);
                assert!((a - oracle(alpha, &params)).abs() < 1e-12, "{params:?} α={alpha}");
            }
        }
    }

    #[test]
    fn resonant_closed_form() {
        let params = p(1.0, 1.0, 0.0, 2.0);
        assert_eq!(energy_functional(0.0, &params), -2.0);
        let a0 = 3.75f64.sqrt();
        assert!((energy_functional(a0, &params) + 4.25).abs() < 1e-12);
        for &alpha in &[0.3, 1.1, 2.9] {
            let expected = alpha * alpha - 2.0 * (4.0 * alpha * alpha + 1.0f64).sqrt();
            assert!((energy_functional(alpha, &params) - expected).abs() < 1e-12);
            assert!((energy_functional(alpha, &params) - energy_functional(-alpha, &params)).abs() < 1e-12);
        }
    }

    #[test]
    fn large_detuning_limit() {
        let params = p(1.0, 0.05, 40.0, 0.5);
        for &alpha in &[-0.5, 0.0, 0.4] {
            let diff = energy_functional(alpha, &params) - detuned_limit(alpha, &params);
            assert!(diff.abs() < 1e-3, "{diff}");
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let params = p(1.0, 0.7, 0.3, 1.4);
        for &alpha in &[-1.3, -0.2, 0.6] {
            let h = 1e-6;
            let fd = (energy_functional(alpha + h, &params) - energy_functional(alpha - h, &params)) / (2.0 * h);
            assert!((fd - energy_gradient(alpha, &params)).abs() < 1e-7);
        }
    }

    #[test]
    fn resonant_minima() {
        let sub = minimize_alpha(&p(1.0, 1.0, 0.0, 0.9)).unwrap();
        assert_eq!(sub.alpha_star, 0.0);
        assert_eq!(sub.branch, Branch::Subradiant);
        let sup = minimize_alpha(&p(1.0, 1.0, 0.0, 2.0)).unwrap();
        assert!((sup.alpha_star - 3.75f64.sqrt()).abs() < 1e-12);
        assert!(sup.degenerate);
        assert!(sup.gradient.abs() <= 1e-10);
        // the scan agrees on |α|
        assert!((scan_minimum(&p(1.0, 1.0, 0.0, 2.0)).abs() - 3.75f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn detuned_minimum_is_negative_and_stationary() {
        let mut last = 0.0;
        for k in 1..30 {
            let g = 0.1 * k as f64;
            let r = minimize_alpha(&p(1.0, 1.0, 0.5, g)).unwrap();
            assert!(r.alpha_star < 0.0);
            assert!(r.alpha_star.abs() > last);
            assert!(r.gradient.abs() <= 1e-10, "g={g}: {}", r.gradient);
            assert!((r.energy - energy_functional(r.alpha_star, &p(1.0, 1.0, 0.5, g))).abs() < 1e-12);
            last = r.alpha_star.abs();
        }
    }

    #[test]
    fn second_derivative_jumps_at_critical_coupling() {
        let grid = uniform_grid(0.5, 1.5, 1e-2).unwrap();
        let curve = ground_energy_curve(&p(1.0, 1.0, 0.0, 0.0), &grid).unwrap();
        let (a, b) = curve.transition_cell;
        assert!(a - 1e-2 <= 1.0 && 1.0 <= b + 1e-2, "{a} {b}");
        // d²E jumps from 0 to −8 across g_c = 1; the stencil straddling the
        // kink splits the jump over two cells
        assert!(curve.max_jump > 2.0);
    }

    #[test]
    fn detuned_curve_is_smooth() {
        let coarse = uniform_grid(0.2, 2.0, 2e-2).unwrap();
        let fine = uniform_grid(0.2, 2.0, 1e-2).unwrap();
        let base = p(1.0, 1.0, 1.0, 0.0);
        let jc = ground_energy_curve(&base, &coarse).unwrap().max_jump;
        let jf = ground_energy_curve(&base, &fine).unwrap().max_jump;
        assert!(jf < 0.75 * jc, "{jc} {jf}");
    }

    #[test]
    fn curve_rejects_bad_grids() {
        let base = p(1.0, 1.0, 0.0, 0.0);
        assert!(ground_energy_curve(&base, &[0.0, 0.1, 0.3, 0.4]).is_err());
        assert!(ground_energy_curve(&base, &[0.0, 0.1]).is_err());
    }
}
