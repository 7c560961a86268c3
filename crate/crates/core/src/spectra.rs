//! Exact diagonalization: eigensolver, converged ground states, coupling
//! sweeps and the reduced phonon density matrix.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::RealSymmetricMatrix;
use crate::model::{self, FockTruncation, ModelParams, Sector};

/// Ascending eigenvalues with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.vectors.column(i).into_owned()
    }
}

fn iteration_budget(dim: usize) -> usize {
    1000 * dim.max(1)
}

/// Full eigensystem, or the lowest `k` pairs when `k` is given.
pub fn eigensolve(h: &RealSymmetricMatrix, k: Option<usize>) -> Result<EigenSystem> {
    let dim = h.dim();
    if dim == 0 {
        return Ok(EigenSystem { values: vec![], vectors: DMatrix::zeros(0, 0) });
    }
    let eig = SymmetricEigen::try_new(h.as_matrix().clone(), f64::EPSILON, iteration_budget(dim))
        .ok_or(Error::NonConvergence { block: 0, dim })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let keep = k.unwrap_or(dim).min(dim);
    let values = order[..keep].iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(dim, keep);
    for (c, &i) in order[..keep].iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        fix_sign(&mut col);
        vectors.set_column(c, &col);
    }
    Ok(EigenSystem { values, vectors })
}

/// Makes the largest-magnitude component positive so outputs are reproducible.
fn fix_sign(v: &mut DVector<f64>) {
    let pivot = v.iter().copied().fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    if pivot < 0.0 {
        v.neg_mut();
    }
}

/// Ascending eigenvalues only.
pub fn eigenvalues(h: &RealSymmetricMatrix) -> Result<Vec<f64>> {
    if h.dim() == 0 {
        return Ok(vec![]);
    }
    let mut vals: Vec<f64> = h.as_matrix().symmetric_eigenvalues().iter().copied().collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence { block: 0, dim: h.dim() });
    }
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Sorted spectrum of one sector block.
pub fn sector_spectrum(params: &ModelParams, trunc: &FockTruncation, sector: Sector) -> Result<Vec<f64>> {
    eigenvalues(&model::build_sector_hamiltonian(params, trunc, sector)?)
}

/// A ground state together with the cutoff it was computed at.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    /// In the basis of the requested sector (`Full`: original frame).
    pub state: DVector<f64>,
    pub n_max_used: usize,
    pub sector: Sector,
}

impl GroundState {
    pub fn density_matrix(&self) -> Result<PhononDensityMatrix> {
        partial_trace_phonon(&self.state, self.n_max_used)
    }
}

fn lowest(h: &RealSymmetricMatrix) -> Result<(f64, DVector<f64>)> {
    let sys = eigensolve(h, Some(1))?;
    Ok((sys.values[0], sys.vector(0)))
}

/// Ground state of `H_s` with definite parity: the two parity blocks are
/// diagonalized separately, so the quasi-degenerate superradiant doublet never
/// mixes.
fn parity_resolved_collective(params: &ModelParams, trunc: &FockTruncation) -> Result<(f64, DVector<f64>)> {
    let h = model::build_sector_hamiltonian(params, trunc, Sector::ResonantCollective)?;
    let parity = model::parity_operator(trunc)?;
    let dim = h.dim();
    let mut best: Option<(f64, DVector<f64>)> = None;
    for sign in [-1.0, 1.0] {
        let idx: Vec<usize> = (0..dim).filter(|&i| parity[(i, i)] == sign).collect();
        let block = h.as_matrix().select_rows(&idx).select_columns(&idx);
        let (e, v) = lowest(&RealSymmetricMatrix::from_symmetric_unchecked(block))?;
        if best.as_ref().is_none_or(|(b, _)| e < *b) {
            let mut full = DVector::zeros(dim);
            for (k, &i) in idx.iter().enumerate() {
                full[i] = v[k];
            }
            best = Some((e, full));
        }
    }
    Ok(best.expect("two parity blocks"))
}

fn ground_at(params: &ModelParams, trunc: &FockTruncation, sector: Sector) -> Result<(f64, DVector<f64>)> {
    let n = trunc.n_max;
    match sector {
        Sector::ResonantCollective => {
            if !params.is_resonant() {
                return Err(Error::SectorUnavailable { sector, eps: params.eps });
            }
            parity_resolved_collective(params, trunc)
        }
        Sector::Full => {
            // decompose into invariant blocks and embed the lowest
            let candidates: Vec<(Sector, f64, DVector<f64>)> = if params.is_resonant() {
                let (ec, vc) = parity_resolved_collective(params, trunc)?;
                let mut out = vec![(Sector::ResonantCollective, ec, vc)];
                for s in [Sector::ResonantMinus, Sector::ResonantPlus] {
                    let (e, v) = lowest(&model::build_sector_hamiltonian(params, trunc, s)?)?;
                    out.push((s, e, v));
                }
                out
            } else {
                let mut out = Vec::new();
                for s in [Sector::TripletRotated, Sector::SingletRotated] {
                    let (e, v) = lowest(&model::build_sector_hamiltonian(params, trunc, s)?)?;
                    out.push((s, e, v));
                }
                out
            };
            let (s, e, v) = candidates
                .into_iter()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty");
            Ok((e, model::embed_in_full(s, &v, n)?))
        }
        _ => lowest(&model::build_sector_hamiltonian(params, trunc, sector)?),
    }
}

/// Ground state certified by cutoff doubling: `n_max` grows by
/// `trunc.growth_factor` until two successive ground energies differ by less
/// than `trunc.tol · ω`. Returns the state at the smaller of the two cutoffs.
pub fn converged_ground_state(
    params: &ModelParams,
    trunc: &FockTruncation,
    sector: Sector,
) -> Result<GroundState> {
    params.validate()?;
    trunc.validate()?;
    let mut current = *trunc;
    let (mut energy, mut state) = ground_at(params, &current, sector)?;
    loop {
        let next_n = current.n_max * trunc.growth_factor;
        if next_n > trunc.cap {
            return Err(Error::TruncationCeiling { cap: trunc.cap, last_change: f64::NAN });
        }
        let next = current.with_n_max(next_n);
        let (e_next, s_next) = ground_at(params, &next, sector)?;
        let change = (e_next - energy).abs();
        log::debug!("ground energy n_max {} -> {}: change {:e}", current.n_max, next_n, change);
        if change < trunc.tol * params.omega {
            return Ok(GroundState { energy, state, n_max_used: current.n_max, sector });
        }
        if next_n * trunc.growth_factor > trunc.cap {
            return Err(Error::TruncationCeiling { cap: trunc.cap, last_change: change });
        }
        current = next;
        energy = e_next;
        state = s_next;
    }
}

/// Ground state at a fixed cutoff (no convergence control).
pub fn ground_state(params: &ModelParams, trunc: &FockTruncation, sector: Sector) -> Result<GroundState> {
    params.validate()?;
    trunc.validate()?;
    let (energy, state) = ground_at(params, trunc, sector)?;
    Ok(GroundState { energy, state, n_max_used: trunc.n_max, sector })
}

/// One row of a coupling sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub g: f64,
    pub values: Vec<f64>,
}

/// Lowest `k` eigenvalues of the sector block at every coupling in `g_grid`.
/// Rows are computed in parallel and returned in grid order.
pub fn spectrum_sweep(
    params_base: &ModelParams,
    g_grid: &[f64],
    trunc: &FockTruncation,
    sector: Sector,
    k: usize,
) -> Result<Vec<SweepRow>> {
    if g_grid.is_empty() {
        return Err(Error::InvalidParameter("empty coupling grid".into()));
    }
    if g_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("coupling grid must be strictly ascending".into()));
    }
    g_grid
        .par_iter()
        .map(|&g| {
            let params = params_base.with_g(g);
            let mut values = sector_spectrum(&params, trunc, sector)
                .map_err(|e| Error::Sweep { g, source: Box::new(e) })?;
            values.truncate(k);
            Ok(SweepRow { g, values })
        })
        .collect()
}

/// Reduced phonon density matrix on `0..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhononDensityMatrix {
    matrix: DMatrix<f64>,
}

/// Eigenvalue floor and trace tolerance for density matrices.
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;

impl PhononDensityMatrix {
    /// Validates symmetry, unit trace and positivity (eigenvalues `>= −1e-10`).
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let rsm = RealSymmetricMatrix::new(matrix)
            .map_err(|e| Error::NotAState(format!("not symmetric: {e}")))?;
        let tr = rsm.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotAState(format!("trace {tr} differs from 1")));
        }
        let min = eigenvalues(&rsm)?.first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NotAState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix: rsm.into_inner() })
    }

    pub(crate) fn from_trusted(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|` for a normalized phonon vector.
    pub fn pure(psi: &DVector<f64>) -> Result<Self> {
        check_normalized(psi)?;
        Ok(Self { matrix: psi * psi.transpose() })
    }

    pub fn n_max(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn mean_number(&self) -> f64 {
        (0..self.matrix.nrows()).map(|n| n as f64 * self.matrix[(n, n)]).sum()
    }

    /// Copy zero-padded (or cut) to `0..=n_max`.
    pub fn resized(&self, n_max: usize) -> Self {
        let d = n_max + 1;
        let m = DMatrix::from_fn(d, d, |i, j| {
            if i < self.matrix.nrows() && j < self.matrix.ncols() {
                self.matrix[(i, j)]
            } else {
                0.0
            }
        });
        Self { matrix: m }
    }
}

fn check_normalized(psi: &DVector<f64>) -> Result<()> {
    let dev = (psi.norm() - 1.0).abs();
    if dev > 1e-8 {
        return Err(Error::NotNormalized(dev));
    }
    Ok(())
}

/// `ρ_b[m][n] = Σ_s ψ[s, m] ψ[s, n]` for a spin-major state with any number
/// of spin components.
pub fn partial_trace_phonon(state: &DVector<f64>, n_max: usize) -> Result<PhononDensityMatrix> {
    let f = n_max + 1;
    if state.is_empty() || !state.len().is_multiple_of(f) {
        return Err(Error::DimensionMismatch { len: state.len(), n_max });
    }
    check_normalized(state)?;
    let spins = state.len() / f;
    let mut rho = DMatrix::zeros(f, f);
    for s in 0..spins {
        let block = state.rows(s * f, f);
        rho += block * block.transpose();
    }
    Ok(PhononDensityMatrix::from_trusted(rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Frame;

    fn p(omega: f64, rabi: f64, eps: f64, g: f64) -> ModelParams {
        ModelParams::new(omega, rabi, eps, g).unwrap()
    }

    #[test]
    fn diagonal_eigenvalues() {
        let h = RealSymmetricMatrix::from_diagonal(&[3.0, 1.0, 2.0]);
        let sys = eigensolve(&h, None).unwrap();
        assert_eq!(sys.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(sys.vector(0)[1].abs(), 1.0);
        assert_eq!(eigensolve(&h, Some(2)).unwrap().len(), 2);
    }

    #[test]
    fn free_oscillator_block() {
        let tr = FockTruncation::new(5).unwrap();
        let h = model::build_sector_hamiltonian(&p(1.0, 0.0, 0.0, 0.0), &tr, Sector::ResonantPlus)
            .unwrap();
        let vals = eigenvalues(&h).unwrap();
        for (n, v) in vals.iter().enumerate() {
            assert!((v - n as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_coupling_ground_uses_initial_cutoff() {
        let params = p(1.0, 0.4, 0.2, 0.0);
        let tr = FockTruncation::new(8).unwrap();
        let gs = converged_ground_state(&params, &tr, Sector::Full).unwrap();
        assert_eq!(gs.n_max_used, 8);
        assert!((gs.energy + 2.0 * (0.16f64 + 0.04).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn ceiling_is_reported() {
        let params = p(1.0, 1.0, 0.0, 3.5);
        let tr = FockTruncation::new(4).unwrap().with_cap(16);
        assert!(matches!(
            converged_ground_state(&params, &tr, Sector::ResonantCollective),
            Err(Error::TruncationCeiling { cap: 16, .. })
        ));
    }

    #[test]
    fn partial_trace_examples() {
        let n_max = 3;
        let f = n_max + 1;
        // |⇓⇓⟩ ⊗ |0⟩
        let mut psi = DVector::zeros(4 * f);
        psi[3 * f] = 1.0;
        let rho = partial_trace_phonon(&psi, n_max).unwrap();
        assert_eq!(rho.as_matrix()[(0, 0)], 1.0);
        assert_eq!(rho.trace(), 1.0);

        // (|⇑⇑,0⟩ + |⇓⇓,1⟩)/√2
        let mut bell = DVector::zeros(4 * f);
        bell[0] = std::f64::consts::FRAC_1_SQRT_2;
        bell[3 * f + 1] = std::f64::consts::FRAC_1_SQRT_2;
        let rho = partial_trace_phonon(&bell, n_max).unwrap();
        assert!((rho.as_matrix()[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((rho.as_matrix()[(1, 1)] - 0.5).abs() < 1e-15);
        assert_eq!(rho.as_matrix()[(0, 1)], 0.0);
        let purity: f64 = rho.as_matrix().iter().map(|v| v * v).sum();
        assert!((purity - 0.5).abs() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_input() {
        let psi = DVector::from_element(8, 1.0);
        assert!(matches!(partial_trace_phonon(&psi, 3), Err(Error::NotNormalized(_))));
        let psi = DVector::from_element(7, 1.0 / 7f64.sqrt());
        assert!(matches!(partial_trace_phonon(&psi, 3), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn density_matrix_validation() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.2, 0.0, 0.0, -0.2]);
        assert!(matches!(PhononDensityMatrix::new(bad), Err(Error::NotAState(_))));
        let bad_trace = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.4]);
        assert!(PhononDensityMatrix::new(bad_trace).is_err());
        let ok = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.1, 0.5]);
        assert!(PhononDensityMatrix::new(ok).is_ok());
    }

    #[test]
    fn sweep_rejects_bad_grid_and_keeps_order() {
        let params = p(1.0, 0.4, 0.2, 0.0);
        let tr = FockTruncation::new(10).unwrap();
        assert!(spectrum_sweep(&params, &[], &tr, Sector::Full, 3).is_err());
        assert!(spectrum_sweep(&params, &[0.2, 0.1], &tr, Sector::Full, 3).is_err());
        let rows = spectrum_sweep(&params, &[0.0, 0.1, 0.2, 0.3], &tr, Sector::Full, 3).unwrap();
        let gs: Vec<f64> = rows.iter().map(|r| r.g).collect();
        assert_eq!(gs, vec![0.0, 0.1, 0.2, 0.3]);
        assert!(rows.iter().all(|r| r.values.len() == 3));
    }

    #[test]
    fn sweep_annotates_errors_with_coupling() {
        let params = p(1.0, 0.4, 0.2, 0.0);
        let tr = FockTruncation::new(4).unwrap();
        let err = spectrum_sweep(&params, &[0.5], &tr, Sector::ResonantMinus, 2).unwrap_err();
        assert!(matches!(err, Error::Sweep { g, .. } if g == 0.5));
    }

    #[test]
    fn resonant_ground_state_has_definite_parity() {
        let params = p(1.0, 1.0, 0.0, 3.5);
        let tr = FockTruncation::new(120).unwrap();
        let gs = ground_state(&params, &tr, Sector::ResonantCollective).unwrap();
        let pi = model::parity_operator(&tr).unwrap();
        let expectation = gs.state.dot(&(pi.as_matrix() * &gs.state));
        assert!((expectation.abs() - 1.0).abs() < 1e-12);
        // and the full-space embedding is an eigenvector of H at the same energy
        let full = ground_state(&params, &tr, Sector::Full).unwrap();
        let h = model::build_hamiltonian(&params, &tr, Frame::Original).unwrap();
        let r = h.as_matrix() * &full.state - &full.state * full.energy;
        assert!(r.amax() < 1e-9 * h.max_abs());
    }
}
