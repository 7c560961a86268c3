//! Oscillator special functions evaluated by normalized recurrences.

use nalgebra::DMatrix;

/// `ln(n!)` by direct summation for small `n` and Stirling's series above.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 32 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    let x = n as f64 + 1.0;
    // ln Γ(x), Stirling with three correction terms; |error| < 1e-15 for x > 32.
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}

/// Weighted associated Laguerre functions
///
/// ```text
/// Q_n^(k)(t) = sqrt(n! / (n+k)!) t^(k/2) e^(-t/2) L_n^(k)(t),   n = 0..count
/// ```
///
/// These are the building blocks of Fock-basis displacement matrix elements
/// and Wigner functions; the weights keep every value O(1).
pub fn weighted_laguerre(t: f64, k: usize, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let q0 = if t > 0.0 {
        (0.5 * k as f64 * t.ln() - 0.5 * t - 0.5 * ln_factorial(k)).exp()
    } else if k == 0 {
        1.0
    } else {
        0.0
    };
    let kf = k as f64;
    let (mut prev, mut cur) = (0.0_f64, q0);
    for n in 0..count {
        out.push(cur);
        let nf = n as f64;
        let next = ((2.0 * nf + kf + 1.0 - t) * cur - (nf * (nf + kf)).sqrt() * prev)
            / ((nf + 1.0) * (nf + kf + 1.0)).sqrt();
        prev = cur;
        cur = next;
    }
    out
}

/// Hermite functions `ψ_0..ψ_n_max` at `x` (unit-frequency oscillator,
/// `ψ_0 = π^(-1/4) e^(-x²/2)`).
pub fn hermite_functions(x: f64, n_max: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(n_max + 1);
    psi.push(std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp());
    if n_max >= 1 {
        psi.push(std::f64::consts::SQRT_2 * x * psi[0]);
    }
    for n in 1..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * psi[n] - (nf / (nf + 1.0)).sqrt() * psi[n - 1];
        psi.push(next);
    }
    psi
}

/// Matrix elements `<m|D(α)|n>` of the displacement operator for real `α`,
/// `0 <= m, n < dim`. Elements are those of the untruncated operator.
pub fn displacement_matrix(alpha: f64, dim: usize) -> DMatrix<f64> {
    let t = alpha * alpha;
    let s: f64 = if alpha < 0.0 { -1.0 } else { 1.0 };
    let mut d = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let q = weighted_laguerre(t, k, dim - k);
        let lower = s.powi(k as i32);
        let upper = (-s).powi(k as i32);
        for (n, &v) in q.iter().enumerate() {
            d[(n + k, n)] = lower * v;
            if k > 0 {
                d[(n, n + k)] = upper * v;
            }
        }
    }
    d
}
