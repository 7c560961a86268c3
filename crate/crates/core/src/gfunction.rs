//! G-function of the detuned triplet block from displaced-oscillator
//! (Bogoliubov) recursions, and spectrum location by its zeros.
//!
//! In the original frame the triplet block acts on `{|↑↑⟩, |+⟩, |↓↓⟩}`. With
//! `A = a + g/ω` the outer states are displaced oscillators and the eigenstate
//! is expanded as `Σ √n! (c_n, d_n, e_n) |n_A⟩`; with `B = a − g/ω` the middle
//! state is, and the expansion is `Σ (−1)^n √n! (c′_n, d′_n, e′_n) |n_B⟩`.
//! The A-side solution is fixed by `d_0 = 1`; the B side has the two free
//! seeds `c′_0`, `e′_0`. An energy is an eigenvalue when the A-side vector of
//! weighted sums lies in the plane spanned by the two B-side basis solutions,
//! i.e. when the 3 × 3 determinant [`g_function`] vanishes.

use std::f64::consts::SQRT_2;

use nalgebra::{DVector, Matrix3};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{FockTruncation, ModelParams, Sector};
use crate::special::{displacement_matrix, ln_factorial};
use crate::spectra;

/// Coefficients are renormalized every this many recursion steps.
const RESCALE_EVERY: usize = 16;
const RESCALE_ABOVE: f64 = 1e100;

/// Recursion arrays with a shared base-e scale: the true coefficient is
/// `stored · exp(log_scale)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesCoefficients {
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub e: Vec<f64>,
    pub log_scale: f64,
}

impl SeriesCoefficients {
    fn with_capacity(m: usize, log_scale: f64) -> Self {
        Self {
            c: Vec::with_capacity(m + 1),
            d: Vec::with_capacity(m + 1),
            e: Vec::with_capacity(m + 1),
            log_scale,
        }
    }

    /// Highest index `M`.
    pub fn order(&self) -> usize {
        self.d.len() - 1
    }

    fn push(&mut self, c: f64, d: f64, e: f64) {
        self.c.push(c);
        self.d.push(d);
        self.e.push(e);
    }

    fn maybe_rescale(&mut self, m: usize) {
        if !m.is_multiple_of(RESCALE_EVERY) {
            return;
        }
        let big = [self.c[m], self.d[m], self.e[m]].iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if big > RESCALE_ABOVE {
            let inv = 1.0 / big;
            for v in self.c.iter_mut().chain(self.d.iter_mut()).chain(self.e.iter_mut()) {
                *v *= inv;
            }
            self.log_scale += big.ln();
        }
    }

    /// `x_m · w^m · exp(log_scale)` evaluated in logs so that neither factor
    /// overflows on its own.
    fn term(&self, x: f64, m: usize, ln_w: f64, w_negative: bool) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let sign = if x < 0.0 { -1.0 } else { 1.0 } * if w_negative && m % 2 == 1 { -1.0 } else { 1.0 };
        sign * (x.abs().ln() + m as f64 * ln_w + self.log_scale).exp()
    }

    /// True-scale weighted sums `(Σ c_n wⁿ, Σ d_n wⁿ, Σ e_n wⁿ)` over `n <= m_max`.
    pub fn weighted_sums(&self, w: f64, m_max: usize) -> [f64; 3] {
        let (ln_w, neg) = (w.abs().ln(), w < 0.0);
        let mut s = [0.0; 3];
        for m in 0..=m_max.min(self.order()) {
            s[0] += self.term(self.c[m], m, ln_w, neg);
            s[1] += self.term(self.d[m], m, ln_w, neg);
            s[2] += self.term(self.e[m], m, ln_w, neg);
        }
        s
    }

    /// All coefficients multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let f = |v: &Vec<f64>| v.iter().map(|x| x * s).collect();
        Self { c: f(&self.c), d: f(&self.d), e: f(&self.e), log_scale: self.log_scale }
    }
}

fn check_coupling(params: &ModelParams) -> Result<()> {
    params.validate()?;
    if params.g == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    Ok(())
}

fn check_energy(energy: f64) -> Result<()> {
    if !energy.is_finite() {
        return Err(Error::InvalidParameter(format!("energy must be finite (got {energy})")));
    }
    Ok(())
}

/// `E − ωm + g²/ω`.
fn shifted(energy: f64, params: &ModelParams, m: usize) -> f64 {
    energy - params.omega * m as f64 + params.g * params.g / params.omega
}

fn guard_pole(energy: f64, m: usize, distance: f64, guard: f64) -> Result<()> {
    if distance.abs() < guard {
        return Err(Error::PoleProximity { energy, m, distance: distance.abs() });
    }
    Ok(())
}

/// A-side arrays up to order `m_max` with `d_0 = 1`, `d_1 = C_0` and
/// `m d_m = C_{m−1} d_{m−1} − d_{m−2}`,
///
/// ```text
/// C_m = [ωm + 3g²/ω − E + 2Ω²(1/(D_m + 2ε) + 1/(D_m − 2ε))] / 2g,   D_m = E − ωm + g²/ω
/// c_m = √2 Ω d_m / (D_m − 2ε),   e_m = √2 Ω d_m / (D_m + 2ε)
/// ```
pub fn a_side_coefficients(energy: f64, params: &ModelParams, m_max: usize) -> Result<SeriesCoefficients> {
    a_side_guarded(energy, params, m_max, DEFAULT_POLE_GUARD * params.omega)
}

fn a_side_guarded(energy: f64, params: &ModelParams, m_max: usize, guard: f64) -> Result<SeriesCoefficients> {
    check_coupling(params)?;
    check_energy(energy)?;
    let &ModelParams { omega, rabi, eps, g } = params;
    let g2w = g * g / omega;
    let mut out = SeriesCoefficients::with_capacity(m_max, 0.0);
    let big_c = |m: usize| -> Result<(f64, f64, f64)> {
        let dm = shifted(energy, params, m);
        guard_pole(energy, m, dm - 2.0 * eps, guard)?;
        guard_pole(energy, m, dm + 2.0 * eps, guard)?;
        let cm = (omega * m as f64 + 3.0 * g2w - energy
            + 2.0 * rabi * rabi * (1.0 / (dm + 2.0 * eps) + 1.0 / (dm - 2.0 * eps)))
            / (2.0 * g);
        Ok((cm, dm - 2.0 * eps, dm + 2.0 * eps))
    };
    let closure = |d: f64, up: f64, down: f64| (SQRT_2 * rabi * d / up, SQRT_2 * rabi * d / down);

    let (mut c_prev, up, down) = big_c(0)?;
    let (c0, e0) = closure(1.0, up, down);
    out.push(c0, 1.0, e0);
    for m in 1..=m_max {
        let d_prev2 = if m >= 2 { out.d[m - 2] } else { 0.0 };
        let d = (c_prev * out.d[m - 1] - d_prev2) / m as f64;
        let (cm, up, down) = big_c(m)?;
        let (c, e) = closure(d, up, down);
        out.push(c, d, e);
        out.maybe_rescale(m);
        c_prev = cm;
    }
    Ok(out)
}

/// B-side arrays seeded by the overlaps of the A-side solution with `|0_B⟩`,
///
/// ```text
/// c′_0 = e^(−2g²/ω²) Σ c_n (2g/ω)^n,   e′_0 = e^(−2g²/ω²) Σ e_n (2g/ω)^n
/// ```
///
/// and continued by [`b_side_from_seeds`]. Shares the A-side scale.
pub fn b_side_coefficients(
    energy: f64,
    params: &ModelParams,
    m_max: usize,
    a_side: &SeriesCoefficients,
) -> Result<SeriesCoefficients> {
    check_coupling(params)?;
    let beta = params.g / params.omega;
    let sums = a_side.weighted_sums(2.0 * beta, a_side.order());
    let damp = (-2.0 * beta * beta).exp();
    let (c0, e0) = (damp * sums[0], damp * sums[2]);
    if c0 == 0.0 && e0 == 0.0 && (sums[0] != 0.0 || sums[2] != 0.0) {
        return Err(Error::SeedUnderflow(energy));
    }
    // seeds are already at true scale; keep log_scale bookkeeping shared
    let s = (-a_side.log_scale).exp();
    let mut out = b_side_from_seeds(energy, params, m_max, c0 * s, e0 * s)?;
    out.log_scale += a_side.log_scale;
    Ok(out)
}

/// B-side arrays from explicit seeds, with
///
/// ```text
/// d′_m = √2 Ω (c′_m + e′_m) / (E + g²/ω − ωm)
/// m c′_m = (Ω/√2g) d′_{m−1} + C⁺_{m−1} c′_{m−1} − c′_{m−2}
/// m e′_m = (Ω/√2g) d′_{m−1} + C⁻_{m−1} e′_{m−1} − e′_{m−2}
/// C±_m = (ωm + 3g²/ω ± 2ε − E) / 2g
/// ```
pub fn b_side_from_seeds(
    energy: f64,
    params: &ModelParams,
    m_max: usize,
    c0: f64,
    e0: f64,
) -> Result<SeriesCoefficients> {
    b_side_guarded(energy, params, m_max, c0, e0, DEFAULT_POLE_GUARD * params.omega)
}

fn b_side_guarded(
    energy: f64,
    params: &ModelParams,
    m_max: usize,
    c0: f64,
    e0: f64,
    guard: f64,
) -> Result<SeriesCoefficients> {
    check_coupling(params)?;
    check_energy(energy)?;
    let &ModelParams { omega, rabi, eps, g } = params;
    let g2w = g * g / omega;
    let feed = rabi / (SQRT_2 * g);
    let big_c = |m: usize, sign: f64| (omega * m as f64 + 3.0 * g2w + sign * 2.0 * eps - energy) / (2.0 * g);
    let middle = |m: usize, c: f64, e: f64| -> Result<f64> {
        let den = shifted(energy, params, m);
        guard_pole(energy, m, den, guard)?;
        Ok(SQRT_2 * rabi * (c + e) / den)
    };

    let mut out = SeriesCoefficients::with_capacity(m_max, 0.0);
    out.push(c0, middle(0, c0, e0)?, e0);
    for m in 1..=m_max {
        let (cm2, em2) = if m >= 2 { (out.c[m - 2], out.e[m - 2]) } else { (0.0, 0.0) };
        let dp = out.d[m - 1];
        let c = (feed * dp + big_c(m - 1, 1.0) * out.c[m - 1] - cm2) / m as f64;
        let e = (feed * dp + big_c(m - 1, -1.0) * out.e[m - 1] - em2) / m as f64;
        out.push(c, middle(m, c, e)?, e);
        out.maybe_rescale(m);
    }
    Ok(out)
}

pub const DEFAULT_POLE_GUARD: f64 = 1e-4;
pub const DEFAULT_SCAN_STEP: f64 = 1e-3;
pub const DEFAULT_ROOT_TOL: f64 = 1e-9;

/// Adaptive truncation of the weighted series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPolicy {
    /// A term is negligible below `rel_tol` times the running sum.
    pub rel_tol: f64,
    /// Number of consecutive negligible terms required in every sum.
    pub consecutive: usize,
    /// Hard cap on the order `M`.
    pub cap: usize,
    /// Lower bound on the order, before the stopping test applies.
    pub min_terms: usize,
    /// Minimum distance to a pole, in units of ω.
    pub pole_guard: f64,
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        Self { rel_tol: 1e-12, consecutive: 5, cap: 400, min_terms: 0, pole_guard: DEFAULT_POLE_GUARD }
    }
}

/// One evaluation of the G-function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GEvaluation {
    pub energy: f64,
    /// `det[A | U | V]` of the weighted sums (A side scaled by `d_0 = 1`).
    pub value: f64,
    /// `value` divided by the three column norms; bounded by 1 in magnitude
    /// and finite across poles.
    pub normalized: f64,
    pub nearest_pole_distance: f64,
    pub m_used: usize,
}

/// Distance from `energy` to the closest pole `ωm − g²/ω` or `ωm − g²/ω ± 2ε`, `m <= m_max`.
pub fn nearest_pole_distance(energy: f64, params: &ModelParams, m_max: usize) -> f64 {
    (0..=m_max)
        .flat_map(|m| {
            let dm = shifted(energy, params, m);
            [dm.abs(), (dm - 2.0 * params.eps).abs(), (dm + 2.0 * params.eps).abs()]
        })
        .fold(f64::INFINITY, f64::min)
}

/// Weighted sums of the three solutions at order `m` and the largest
/// relative term magnitude at that order.
struct Columns {
    a: SeriesCoefficients,
    u: SeriesCoefficients,
    v: SeriesCoefficients,
}

impl Columns {
    fn compute(energy: f64, params: &ModelParams, m_max: usize, guard: f64) -> Result<Self> {
        Ok(Self {
            a: a_side_guarded(energy, params, m_max, guard)?,
            u: b_side_guarded(energy, params, m_max, 1.0, 0.0, guard)?,
            v: b_side_guarded(energy, params, m_max, 0.0, 1.0, guard)?,
        })
    }

    /// Per-order term magnitudes relative to the running column sums.
    fn relative_terms(&self, r: f64) -> Vec<f64> {
        let ln_r = r.abs().ln();
        let neg = r < 0.0;
        let m_max = self.a.order();
        let mut running = [[0.0_f64; 3]; 3];
        let mut out = Vec::with_capacity(m_max + 1);
        for m in 0..=m_max {
            let mut worst = 0.0_f64;
            for (k, col) in [&self.a, &self.u, &self.v].into_iter().enumerate() {
                let t = [
                    col.term(col.c[m], m, ln_r, neg),
                    col.term(col.d[m], m, ln_r, neg),
                    col.term(col.e[m], m, ln_r, neg),
                ];
                for i in 0..3 {
                    running[k][i] += t[i];
                }
                let scale = running[k].iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                let big = t.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                worst = worst.max(if scale > 0.0 { big / scale } else if big > 0.0 { f64::INFINITY } else { 0.0 });
            }
            out.push(worst);
        }
        out
    }

    fn matrix(&self, r: f64, m_used: usize) -> Matrix3<f64> {
        let a = self.a.weighted_sums(r, m_used);
        let u = self.u.weighted_sums(r, m_used);
        let v = self.v.weighted_sums(r, m_used);
        Matrix3::new(a[0], u[0], v[0], a[1], u[1], v[1], a[2], u[2], v[2])
    }
}

/// Order below which the recursion is still in its oscillatory regime.
fn minimum_order(energy: f64, params: &ModelParams) -> usize {
    let reach = (energy.abs() + 3.0 * params.g * params.g / params.omega + 2.0 * params.eps.abs())
        / params.omega;
    (reach.ceil() as usize + 10).max(10)
}

/// Determinant G-function at `energy`, with adaptive series order.
pub fn g_function(energy: f64, params: &ModelParams, policy: &SeriesPolicy) -> Result<GEvaluation> {
    check_coupling(params)?;
    check_energy(energy)?;
    if params.is_resonant() {
        return Err(Error::ResonantRedirect);
    }
    let r = params.g / params.omega;
    let guard = policy.pole_guard * params.omega;
    let floor = minimum_order(energy, params).max(policy.min_terms);
    let mut m_try = (2 * floor).max(64).min(policy.cap.max(1));
    loop {
        let cols = Columns::compute(energy, params, m_try, guard)?;
        let rel = cols.relative_terms(r);
        let mut run = 0;
        let mut stop = None;
        for (m, &t) in rel.iter().enumerate() {
            run = if t < policy.rel_tol { run + 1 } else { 0 };
            if run >= policy.consecutive && m >= floor {
                stop = Some(m);
                break;
            }
        }
        if let Some(m_used) = stop {
            let mat = cols.matrix(r, m_used);
            let value = mat.determinant();
            let norms: f64 = (0..3).map(|j| mat.column(j).norm()).product();
            if !value.is_finite() || !norms.is_finite() {
                return Err(Error::NonConvergentSeries { energy, cap: m_used, tail: f64::INFINITY });
            }
            let normalized = if norms > 0.0 { value / norms } else { 0.0 };
            return Ok(GEvaluation {
                energy,
                value,
                normalized,
                nearest_pole_distance: nearest_pole_distance(energy, params, m_used),
                m_used,
            });
        }
        if m_try >= policy.cap {
            let tail = rel[rel.len().saturating_sub(policy.consecutive)..]
                .iter()
                .fold(0.0_f64, |a, &v| a.max(v));
            return Err(Error::NonConvergentSeries { energy, cap: policy.cap, tail });
        }
        m_try = (2 * m_try).min(policy.cap);
    }
}

/// The two-term form built from overlap-seeded B-side arrays,
/// `Σ c_n rⁿ Σ e′_n rⁿ − Σ c′_n rⁿ Σ e_n rⁿ`, `r = g/ω`, at fixed order.
/// Quadratic in the A-side scale. Kept for comparison; its zeros are not the
/// triplet spectrum (see [`g_function`]).
pub fn overlap_g_function(energy: f64, params: &ModelParams, m_max: usize) -> Result<f64> {
    let a = a_side_coefficients(energy, params, m_max)?;
    let b = b_side_coefficients(energy, params, m_max, &a)?;
    Ok(overlap_form(&a, &b, params.g / params.omega))
}

fn overlap_form(a: &SeriesCoefficients, b: &SeriesCoefficients, r: f64) -> f64 {
    let sa = a.weighted_sums(r, a.order());
    let sb = b.weighted_sums(r, b.order());
    sa[0] * sb[2] - sb[0] * sa[2]
}

/// Determinant of explicit coefficient arrays; linear in each of them.
pub fn determinant_form(
    a: &SeriesCoefficients,
    u: &SeriesCoefficients,
    v: &SeriesCoefficients,
    r: f64,
) -> f64 {
    let cols = Columns { a: a.clone(), u: u.clone(), v: v.clone() };
    cols.matrix(r, a.order().min(u.order()).min(v.order())).determinant()
}

/// Closed-form singlet levels `nω − g²/ω`, `0 <= n < n_count`.
pub fn singlet_energies(params: &ModelParams, n_count: usize) -> Result<Vec<f64>> {
    params.validate()?;
    if n_count == 0 {
        return Err(Error::InvalidParameter("n_count must be >= 1".into()));
    }
    let shift = params.g * params.g / params.omega;
    Ok((0..n_count).map(|n| n as f64 * params.omega - shift).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RootKind {
    Regular,
    /// A sign change or ED level inside a pole guard band; left to ED.
    ExceptionalCandidate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootRecord {
    pub energy: f64,
    pub sector: Sector,
    /// `|normalized G|` at the returned energy.
    pub residual_g: f64,
    pub bracket_width: f64,
    /// Distance to the nearest ED triplet level, when an oracle was requested.
    pub ed_match: Option<f64>,
    pub kind: RootKind,
}

/// Scan and refinement settings; lengths are in units of ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootOptions {
    pub scan_step: f64,
    pub root_tol: f64,
    pub series: SeriesPolicy,
    /// ED truncation for the optional nearest-level oracle.
    pub oracle: Option<FockTruncation>,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            scan_step: DEFAULT_SCAN_STEP,
            root_tol: DEFAULT_ROOT_TOL,
            series: SeriesPolicy::default(),
            oracle: None,
        }
    }
}

/// Sorted poles of either side inside `[e_min, e_max]`.
pub fn poles_in(params: &ModelParams, e_min: f64, e_max: f64) -> Vec<f64> {
    let shift = params.g * params.g / params.omega;
    let mut out = Vec::new();
    for offset in [0.0, 2.0 * params.eps, -2.0 * params.eps] {
        // ωm − shift + offset >= e_min
        let first = ((e_min + shift - offset) / params.omega).ceil().max(0.0) as usize;
        let mut m = first;
        loop {
            let p = params.omega * m as f64 - shift + offset;
            if p > e_max {
                break;
            }
            if p >= e_min {
                out.push(p);
            }
            m += 1;
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Pole-free sub-intervals of `[e_min, e_max]` after removing guard bands.
pub fn scan_intervals(params: &ModelParams, e_min: f64, e_max: f64, guard: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut lo = e_min;
    // Edges sit just outside the band so that rounding in `p ± guard` cannot
    // put them back inside it.
    let edge = guard * (1.0 + 1e-6);
    for p in poles_in(params, e_min - edge, e_max + edge) {
        let hi = p - edge;
        if hi > lo {
            out.push((lo, hi));
        }
        lo = lo.max(p + edge);
    }
    if e_max > lo {
        out.push((lo, e_max));
    }
    out
}

/// Fraction of `[e_min, e_max]` removed by pole guard bands.
pub fn excluded_fraction(params: &ModelParams, e_min: f64, e_max: f64, guard: f64) -> f64 {
    let kept: f64 = scan_intervals(params, e_min, e_max, guard).iter().map(|(a, b)| b - a).sum();
    1.0 - kept / (e_max - e_min)
}

/// One grid point of a G-function scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub energy: f64,
    pub value: f64,
    pub normalized: f64,
    pub valid: bool,
}

fn grid(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step).floor() as usize;
    let mut pts: Vec<f64> = (0..=n).map(|k| a + k as f64 * step).collect();
    if b - pts[pts.len() - 1] > 1e-12 * step {
        pts.push(b);
    }
    pts
}

/// G on a uniform grid over `[e_min, e_max]`, grid points inside guard
/// bands or failing evaluation marked invalid. Points are evaluated in
/// parallel and returned in energy order.
pub fn scan(params: &ModelParams, e_min: f64, e_max: f64, step: f64, policy: &SeriesPolicy) -> Vec<ScanPoint> {
    let pts = grid(e_min, e_max, step * params.omega);
    pts.par_iter()
        .map(|&energy| match g_function(energy, params, policy) {
            Ok(ev) => ScanPoint { energy, value: ev.value, normalized: ev.normalized, valid: true },
            Err(_) => ScanPoint { energy, value: f64::NAN, normalized: f64::NAN, valid: false },
        })
        .collect()
}

fn check_range(e_min: f64, e_max: f64, opts: &RootOptions) -> Result<()> {
    if !e_min.is_finite() || !e_max.is_finite() || !(e_max > e_min) {
        return Err(Error::InvalidParameter(format!("energy range [{e_min}, {e_max}] is not a finite interval")));
    }
    if !(opts.scan_step > 0.0) || !(opts.root_tol > 0.0) {
        return Err(Error::InvalidParameter("scan_step and root_tol must be > 0".into()));
    }
    Ok(())
}

fn bisect(params: &ModelParams, policy: &SeriesPolicy, mut lo: (f64, f64), mut hi: (f64, f64), tol: f64) -> Result<(f64, f64, f64)> {
    // refine well past tol; each step is cheap
    let target = tol * 1e-3;
    for _ in 0..200 {
        let mid = 0.5 * (lo.0 + hi.0);
        if hi.0 - lo.0 <= target || mid <= lo.0 || mid >= hi.0 {
            break;
        }
        let v = g_function(mid, params, policy)?.normalized;
        if v == 0.0 {
            return Ok((mid, 0.0, 0.0));
        }
        if v.signum() == lo.1.signum() {
            lo = (mid, v);
        } else {
            hi = (mid, v);
        }
    }
    let (e, r) = if lo.1.abs() <= hi.1.abs() { lo } else { hi };
    Ok((e, r.abs(), hi.0 - lo.0))
}

/// Triplet-block eigenvalues as sign changes of [`g_function`] on a scan of
/// `[e_min, e_max]` (units of ω for `opts`), refined by bisection.
///
/// Guard bands around poles are skipped. A sign change of the normalized G
/// across a band with small values on both edges, or an ED level inside a
/// band when an oracle is requested, yields an `ExceptionalCandidate`.
pub fn find_roots(params: &ModelParams, e_min: f64, e_max: f64, opts: &RootOptions) -> Result<Vec<RootRecord>> {
    check_coupling(params)?;
    if params.is_resonant() {
        return Err(Error::ResonantRedirect);
    }
    check_range(e_min, e_max, opts)?;
    let w = params.omega;
    let guard = opts.series.pole_guard * w;
    let tol = opts.root_tol * w;
    let intervals = scan_intervals(params, e_min, e_max, guard);

    let points: Vec<(usize, f64)> = intervals
        .iter()
        .enumerate()
        .flat_map(|(i, &(a, b))| grid(a, b, opts.scan_step * w).into_iter().map(move |e| (i, e)))
        .collect();
    let values: Vec<Option<f64>> = points
        .par_iter()
        .map(|&(_, e)| g_function(e, params, &opts.series).ok().map(|ev| ev.normalized))
        .collect();

    let mut records = Vec::new();
    for k in 1..points.len() {
        let (ia, ea) = points[k - 1];
        let (ib, eb) = points[k];
        let (Some(va), Some(vb)) = (values[k - 1], values[k]) else { continue };
        if ia == ib {
            if va == 0.0 {
                records.push(regular(ea, 0.0, 0.0));
            } else if va.signum() != vb.signum() && vb != 0.0 {
                let (e, res, width) = bisect(params, &opts.series, (ea, va), (eb, vb), tol)?;
                records.push(regular(e, res, width));
            }
        } else if va.signum() != vb.signum() && va.abs().max(vb.abs()) < EXCEPTIONAL_EDGE {
            records.push(RootRecord {
                energy: 0.5 * (ea + eb),
                sector: Sector::TripletRotated,
                residual_g: va.abs().min(vb.abs()),
                bracket_width: eb - ea,
                ed_match: None,
                kind: RootKind::ExceptionalCandidate,
            });
        }
    }
    if let Some(&(_, last)) = points.last() {
        if values.last().copied().flatten() == Some(0.0) {
            records.push(regular(last, 0.0, 0.0));
        }
    }

    if let Some(trunc) = opts.oracle {
        let ed = spectra::sector_spectrum(params, &trunc, Sector::TripletRotated)?;
        for rec in records.iter_mut() {
            rec.ed_match = Some(ed.iter().map(|l| (l - rec.energy).abs()).fold(f64::INFINITY, f64::min));
        }
        for &level in ed.iter().filter(|&&l| l >= e_min && l <= e_max) {
            let in_band = poles_in(params, level - guard, level + guard).iter().any(|p| (p - level).abs() < guard);
            let covered = records.iter().any(|r| (r.energy - level).abs() < guard.max(tol));
            if in_band && !covered {
                records.push(RootRecord {
                    energy: level,
                    sector: Sector::TripletRotated,
                    residual_g: f64::NAN,
                    bracket_width: 2.0 * guard,
                    ed_match: Some(0.0),
                    kind: RootKind::ExceptionalCandidate,
                });
            }
        }
        records.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    }
    Ok(records)
}

/// Edge magnitude of the normalized G below which a sign change across a
/// guard band is reported.
const EXCEPTIONAL_EDGE: f64 = 1e-2;

fn regular(energy: f64, residual_g: f64, bracket_width: f64) -> RootRecord {
    RootRecord {
        energy,
        sector: Sector::TripletRotated,
        residual_g,
        bracket_width,
        ed_match: None,
        kind: RootKind::Regular,
    }
}

/// The two expansions of a candidate eigenstate on `0..=n_max`, in the
/// original-frame triplet basis `{|↑↑⟩, |+⟩, |↓↓⟩}` (spin-major).
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub psi_a: DVector<f64>,
    pub psi_b: DVector<f64>,
}

impl Reconstruction {
    /// `|⟨Ψ_A|Ψ_B⟩| / (‖Ψ_A‖ ‖Ψ_B‖)`.
    pub fn cosine_similarity(&self) -> f64 {
        cosine(&self.psi_a, &self.psi_b)
    }
}

pub fn cosine(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(b).abs() / (a.norm() * b.norm())
}

/// `ln|√n! x_n|` of each component at true scale, `-inf` for zeros.
fn log_amplitudes(coeffs: &SeriesCoefficients) -> [Vec<f64>; 3] {
    let f = |x: &Vec<f64>| {
        x.iter()
            .enumerate()
            .map(|(n, &v)| if v == 0.0 { f64::NEG_INFINITY } else { 0.5 * ln_factorial(n) + v.abs().ln() + coeffs.log_scale })
            .collect()
    };
    [f(&coeffs.c), f(&coeffs.d), f(&coeffs.e)]
}

/// Order at which the Fock amplitudes of a forward-recursed solution are
/// smallest. Beyond it the dominant solution, seeded by rounding, takes over
/// and grows like `√n! (ω/2g)^n`; the physical one decays like `(2g/ω)^n/√n!`.
fn cut_order(logs: &[Vec<f64>; 3], from: usize) -> usize {
    let len = logs[0].len();
    let level = |n: usize| logs.iter().map(|l| l[n]).fold(f64::NEG_INFINITY, f64::max);
    (from.min(len - 1)..len).min_by(|&a, &b| level(a).total_cmp(&level(b))).unwrap_or(len - 1)
}

fn fock_vector(coeffs: &SeriesCoefficients, k: usize, cut: usize, logs: &[Vec<f64>; 3], alternate: bool) -> Vec<f64> {
    let x = [&coeffs.c, &coeffs.d, &coeffs.e][k];
    (0..x.len())
        .map(|n| {
            if n > cut || x[n] == 0.0 {
                return 0.0;
            }
            let s = x[n].signum() * if alternate && n % 2 == 1 { -1.0 } else { 1.0 };
            s * logs[k][n].exp()
        })
        .collect()
}

/// Rebuilds `|Ψ_A⟩ = Σ √n! (c_n, d_n, e_n) D(−g/ω)|n⟩` and
/// `|Ψ_B⟩ = Σ (−1)^n √n! (c′_n, d′_n, e′_n) D(g/ω)|n⟩` with overlap-seeded
/// B-side arrays, each expansion cut where its amplitudes are smallest. At an
/// eigenvalue the two are parallel.
pub fn reconstruct(energy: f64, params: &ModelParams, n_max: usize) -> Result<Reconstruction> {
    let a = a_side_coefficients(energy, params, n_max)?;
    let b = b_side_coefficients(energy, params, n_max, &a)?;
    let beta = params.g / params.omega;
    let dim = n_max + 1;
    let from = minimum_order(energy, params).min(n_max);
    let build = |coeffs: &SeriesCoefficients, alpha: f64, alternate: bool| {
        let disp = displacement_matrix(alpha, dim);
        let logs = log_amplitudes(coeffs);
        let cut = cut_order(&logs, from);
        let mut out = DVector::zeros(3 * dim);
        for k in 0..3 {
            let amp = DVector::from_vec(fock_vector(coeffs, k, cut, &logs, alternate));
            out.rows_mut(k * dim, dim).copy_from(&(&disp * amp));
        }
        out
    };
    Ok(Reconstruction { psi_a: build(&a, -beta, false), psi_b: build(&b, beta, true) })
}

/// Cosine similarity of the reconstructed expansions at `energy`.
pub fn proportionality(energy: f64, params: &ModelParams, n_max: usize) -> Result<f64> {
    Ok(reconstruct(energy, params, n_max)?.cosine_similarity())
}
