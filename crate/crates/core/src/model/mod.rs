//! Operators, Hamiltonians and symmetry sectors on the truncated
//! spin-pair ⊗ Fock space.
//!
//! Basis ordering is spin-major: index `s * (n_max + 1) + n` with the two-spin
//! index `s = 2 s1 + s2` and spin-up first, so the four blocks are
//! `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩` (original frame) or `|⇑⇑⟩, |⇑⇓⟩, |⇓⇑⟩, |⇓⇓⟩`
//! (rotated frame). The phonon ladder is cut hard at `n_max`.

mod appendix;

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{kron, max_abs, RealSymmetricMatrix};

pub use appendix::{verify_appendix_assembly, AppendixReport};

/// Couplings of the model in a common angular-frequency unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Phonon frequency ω.
    pub omega: f64,
    /// Rabi frequency Ω.
    pub rabi: f64,
    /// Detuning ε.
    pub eps: f64,
    /// Tripartite coupling g.
    pub g: f64,
}

impl ModelParams {
    pub fn new(omega: f64, rabi: f64, eps: f64, g: f64) -> Result<Self> {
        let p = Self { omega, rabi, eps, g };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega, self.rabi, self.eps, self.g];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite couplings {self:?}")));
        }
        if self.omega <= 0.0 {
            return Err(Error::InvalidParameter(format!("omega must be > 0 (got {})", self.omega)));
        }
        if self.rabi < 0.0 {
            return Err(Error::InvalidParameter(format!("Omega must be >= 0 (got {})", self.rabi)));
        }
        Ok(())
    }

    /// Mean-field critical coupling `g_c = sqrt(ω Ω)`.
    pub fn critical_coupling(&self) -> f64 {
        (self.omega * self.rabi).sqrt()
    }

    pub fn with_g(self, g: f64) -> Self {
        Self { g, ..self }
    }

    pub fn is_resonant(&self) -> bool {
        self.eps == 0.0
    }

    /// All couplings multiplied by `s`.
    pub fn scaled(self, s: f64) -> Self {
        Self { omega: self.omega * s, rabi: self.rabi * s, eps: self.eps * s, g: self.g * s }
    }
}

/// Phonon cutoff and the convergence policy used by
/// [`converged_ground_state`](crate::spectra::converged_ground_state).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FockTruncation {
    pub n_max: usize,
    pub growth_factor: usize,
    /// Relative (to ω) ground-energy tolerance between successive cutoffs.
    pub tol: f64,
    /// Hard ceiling for `n_max` during convergence doubling.
    pub cap: usize,
}

impl FockTruncation {
    pub const DEFAULT_N_MAX: usize = 120;
    pub const DEFAULT_CAP: usize = 4096;

    pub fn new(n_max: usize) -> Result<Self> {
        let t = Self { n_max, growth_factor: 2, tol: 1e-9, cap: Self::DEFAULT_CAP };
        t.validate()?;
        Ok(t)
    }

    pub fn with_tol(self, tol: f64) -> Self {
        Self { tol, ..self }
    }

    pub fn with_cap(self, cap: usize) -> Self {
        Self { cap, ..self }
    }

    pub fn with_n_max(self, n_max: usize) -> Self {
        Self { n_max, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 1 {
            return Err(Error::InvalidTruncation(self.n_max));
        }
        if self.growth_factor < 2 {
            return Err(Error::InvalidParameter(format!(
                "growth_factor must be >= 2 (got {})",
                self.growth_factor
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be > 0 (got {})", self.tol)));
        }
        Ok(())
    }

    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }
}

impl Default for FockTruncation {
    fn default() -> Self {
        Self::new(Self::DEFAULT_N_MAX).expect("default truncation is valid")
    }
}

/// Spin frame: as written, or rotated by π/2 about both σ^y axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Frame {
    Original,
    Rotated,
}

/// Invariant subspaces of the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    /// All four spin states, original frame.
    Full,
    /// `{|⇑⇑⟩, |+⟩, |⇓⇓⟩}` in the rotated frame.
    TripletRotated,
    /// `|−⟩ = (|⇓⇑⟩ − |⇑⇓⟩)/√2`; spectrum `nω − g²/ω`.
    SingletRotated,
    /// `{|⇑⇑⟩, |⇓⇓⟩}` at ε = 0: `H_s = ω a†a − 2Ω S^z + g S^x (a† + a)`.
    ResonantCollective,
    /// `(|⇑⇓⟩ + |⇓⇑⟩)/√2` at ε = 0: `H_+ = ω a†a + g (a† + a)`.
    ResonantPlus,
    /// `(|⇓⇑⟩ − |⇑⇓⟩)/√2` at ε = 0: `H_− = ω a†a − g (a† + a)`.
    ResonantMinus,
}

impl Sector {
    pub fn spin_dim(self) -> usize {
        match self {
            Sector::Full => 4,
            Sector::TripletRotated => 3,
            Sector::ResonantCollective => 2,
            Sector::SingletRotated | Sector::ResonantPlus | Sector::ResonantMinus => 1,
        }
    }

    pub fn requires_resonance(self) -> bool {
        matches!(self, Sector::ResonantCollective | Sector::ResonantPlus | Sector::ResonantMinus)
    }

    /// Columns are the sector's spin states expanded in the rotated two-spin basis.
    fn rotated_spin_basis(self) -> DMatrix<f64> {
        let h = FRAC_1_SQRT_2;
        match self {
            Sector::Full => DMatrix::identity(4, 4),
            Sector::TripletRotated => DMatrix::from_column_slice(
                4,
                3,
                &[1.0, 0.0, 0.0, 0.0, 0.0, h, h, 0.0, 0.0, 0.0, 0.0, 1.0],
            ),
            Sector::SingletRotated | Sector::ResonantMinus => {
                DMatrix::from_column_slice(4, 1, &[0.0, -h, h, 0.0])
            }
            Sector::ResonantCollective => {
                DMatrix::from_column_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0])
            }
            Sector::ResonantPlus => DMatrix::from_column_slice(4, 1, &[0.0, h, h, 0.0]),
        }
    }
}

/// Annihilation operator on `0..=n_max`.
pub fn annihilation(n_max: usize) -> DMatrix<f64> {
    let d = n_max + 1;
    let mut a = DMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = (n as f64).sqrt();
    }
    a
}

/// `a + a†` on `0..=n_max`.
pub fn position_quadrature(n_max: usize) -> DMatrix<f64> {
    let a = annihilation(n_max);
    &a + a.transpose()
}

pub fn number_operator(n_max: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n_max + 1, n_max + 1, |i, j| if i == j { i as f64 } else { 0.0 })
}

/// Single-spin and two-spin Pauli matrices, spin-up first.
pub mod pauli {
    use nalgebra::DMatrix;

    pub fn x() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn z() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    pub fn id() -> DMatrix<f64> {
        DMatrix::identity(2, 2)
    }

    /// Operator `op` acting on spin `j` (1 or 2) of the pair.
    pub fn on(j: usize, op: &DMatrix<f64>) -> DMatrix<f64> {
        match j {
            1 => op.kronecker(&id()),
            2 => id().kronecker(op),
            _ => panic!("spin index must be 1 or 2"),
        }
    }
}

/// Two-spin rotation `U ⊗ U`, `U = exp(−iπσ^y/4)`, mapping original-frame
/// spin vectors to rotated-frame ones: `ψ_R = R ψ`, `H_R = R H Rᵀ`.
pub fn spin_rotation() -> DMatrix<f64> {
    let h = FRAC_1_SQRT_2;
    let u = DMatrix::from_row_slice(2, 2, &[h, -h, h, h]);
    u.kronecker(&u)
}

/// Spin-only parts of the Hamiltonian in a frame: `(single-spin terms, coupling spin operator)`.
fn spin_terms(params: &ModelParams, frame: Frame) -> (DMatrix<f64>, DMatrix<f64>) {
    let (x1, x2) = (pauli::on(1, &pauli::x()), pauli::on(2, &pauli::x()));
    let (z1, z2) = (pauli::on(1, &pauli::z()), pauli::on(2, &pauli::z()));
    match frame {
        Frame::Original => ((&x1 + &x2) * params.rabi + (&z1 + &z2) * params.eps, &z1 * &z2),
        Frame::Rotated => ((&z1 + &z2) * (-params.rabi) + (&x1 + &x2) * params.eps, &x1 * &x2),
    }
}

/// `kron(I_d, ωN) + kron(single, I) + g kron(coupling, a + a†)` assembled
/// directly; `single` and `coupling` are `d × d` spin matrices.
fn assemble(
    params: &ModelParams,
    n_max: usize,
    single: &DMatrix<f64>,
    coupling: &DMatrix<f64>,
) -> RealSymmetricMatrix {
    let d = single.nrows();
    let f = n_max + 1;
    let mut h = DMatrix::zeros(d * f, d * f);
    for s in 0..d {
        for t in 0..d {
            let base_r = s * f;
            let base_c = t * f;
            let c_single = single[(s, t)];
            let c_coup = params.g * coupling[(s, t)];
            for n in 0..f {
                let mut diag = c_single;
                if s == t {
                    diag += params.omega * n as f64;
                }
                h[(base_r + n, base_c + n)] += diag;
                if c_coup != 0.0 && n + 1 < f {
                    let v = c_coup * ((n + 1) as f64).sqrt();
                    h[(base_r + n, base_c + n + 1)] += v;
                    h[(base_r + n + 1, base_c + n)] += v;
                }
            }
        }
    }
    RealSymmetricMatrix::from_symmetric_unchecked(h)
}

fn check_inputs(params: &ModelParams, trunc: &FockTruncation) -> Result<()> {
    params.validate()?;
    trunc.validate()
}

/// Full Hamiltonian in the requested frame, dimension `4 (n_max + 1)`.
pub fn build_hamiltonian(
    params: &ModelParams,
    trunc: &FockTruncation,
    frame: Frame,
) -> Result<RealSymmetricMatrix> {
    check_inputs(params, trunc)?;
    let (single, coupling) = spin_terms(params, frame);
    Ok(assemble(params, trunc.n_max, &single, &coupling))
}

/// Hamiltonian projected onto the spin subspace spanned by the columns of
/// `basis` (4 × d, orthonormal columns, expressed in `frame`).
pub fn projected_hamiltonian(
    params: &ModelParams,
    trunc: &FockTruncation,
    frame: Frame,
    basis: &DMatrix<f64>,
) -> Result<RealSymmetricMatrix> {
    check_inputs(params, trunc)?;
    let (single, coupling) = spin_terms(params, frame);
    let bt = basis.transpose();
    let mut ps = &bt * single * basis;
    let mut pc = &bt * coupling * basis;
    symmetrize(&mut ps);
    symmetrize(&mut pc);
    Ok(assemble(params, trunc.n_max, &ps, &pc))
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m = (&*m + t) * 0.5;
}

/// Triplet block in the original frame over `{|↑↑⟩, |+⟩, |↓↓⟩}`,
/// `|+⟩ = (|↑↓⟩ + |↓↑⟩)/√2`. This is the representation the displaced-oscillator
/// recursions of [`gfunction`](crate::gfunction) are written in.
pub fn triplet_original(params: &ModelParams, trunc: &FockTruncation) -> Result<RealSymmetricMatrix> {
    let basis = Sector::TripletRotated.rotated_spin_basis();
    projected_hamiltonian(params, trunc, Frame::Original, &basis)
}

/// Block of the Hamiltonian in one symmetry sector.
pub fn build_sector_hamiltonian(
    params: &ModelParams,
    trunc: &FockTruncation,
    sector: Sector,
) -> Result<RealSymmetricMatrix> {
    check_inputs(params, trunc)?;
    if sector.requires_resonance() && params.eps != 0.0 {
        return Err(Error::SectorUnavailable { sector, eps: params.eps });
    }
    match sector {
        Sector::Full => build_hamiltonian(params, trunc, Frame::Original),
        _ => projected_hamiltonian(params, trunc, Frame::Rotated, &sector.rotated_spin_basis()),
    }
}

/// Embedding of a sector state into the full original-frame basis.
pub fn embed_in_full(sector: Sector, state: &DVector<f64>, n_max: usize) -> Result<DVector<f64>> {
    let f = n_max + 1;
    let d = sector.spin_dim();
    if state.len() != d * f {
        return Err(Error::DimensionMismatch { len: state.len(), n_max });
    }
    if sector == Sector::Full {
        return Ok(state.clone());
    }
    let spin_map = spin_rotation().transpose() * sector.rotated_spin_basis();
    let mut out = DVector::zeros(4 * f);
    for s in 0..4 {
        for t in 0..d {
            let c = spin_map[(s, t)];
            if c == 0.0 {
                continue;
            }
            for n in 0..f {
                out[s * f + n] += c * state[t * f + n];
            }
        }
    }
    Ok(out)
}

/// Rotated-frame full vector to original frame.
pub fn rotated_to_original(state: &DVector<f64>, n_max: usize) -> Result<DVector<f64>> {
    embed_in_full_rotated(state, n_max, &spin_rotation().transpose())
}

fn embed_in_full_rotated(
    state: &DVector<f64>,
    n_max: usize,
    spin_map: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    let f = n_max + 1;
    if state.len() != 4 * f {
        return Err(Error::DimensionMismatch { len: state.len(), n_max });
    }
    Ok(spin_map.kronecker(&DMatrix::identity(f, f)) * state)
}

/// Parity `Π_p = exp(iπ(a†a + (S^z − 1)/2)) = (−1)^n S^z` on the
/// [`Sector::ResonantCollective`] basis (`|⇑⇑⟩` block first, `S^z = +1`).
///
/// The literal `exp(iπ(a†a + S^z))` is spin independent for `S^z = ±1` and
/// does not commute with `S^x (a + a†)`; the half-shifted exponent does.
pub fn parity_operator(trunc: &FockTruncation) -> Result<RealSymmetricMatrix> {
    trunc.validate()?;
    let f = trunc.fock_dim();
    let diag: Vec<f64> = (0..2 * f)
        .map(|i| {
            let (s, n) = (i / f, i % f);
            let sz = if s == 0 { 1.0 } else { -1.0 };
            if n % 2 == 0 {
                sz
            } else {
                -sz
            }
        })
        .collect();
    Ok(RealSymmetricMatrix::from_diagonal(&diag))
}

/// Spin-exchange permutation on the full basis (either frame).
pub fn exchange_operator(trunc: &FockTruncation) -> Result<RealSymmetricMatrix> {
    trunc.validate()?;
    let f = trunc.fock_dim();
    let mut swap = DMatrix::zeros(4, 4);
    swap[(0, 0)] = 1.0;
    swap[(1, 2)] = 1.0;
    swap[(2, 1)] = 1.0;
    swap[(3, 3)] = 1.0;
    Ok(RealSymmetricMatrix::from_symmetric_unchecked(kron(&swap, &DMatrix::identity(f, f))))
}

/// Max-norm of `H_d + F_1 + F_2 − g σ1z σ2z (a + a†)` with
/// `H_d = g (σ1zσ2z + σ1z + σ2z + 1)(a + a†)` and `F_j = −g (σjz + 1/2)(a + a†)`.
pub fn verify_tripartite_reduction(g: f64, trunc: &FockTruncation) -> Result<f64> {
    if !g.is_finite() {
        return Err(Error::InvalidParameter(format!("g must be finite (got {g})")));
    }
    trunc.validate()?;
    let x = position_quadrature(trunc.n_max) * g;
    let z1 = pauli::on(1, &pauli::z());
    let z2 = pauli::on(2, &pauli::z());
    let id4 = DMatrix::<f64>::identity(4, 4);
    let zz = &z1 * &z2;

    // Every term is (spin operator) ⊗ g(a + a†); the spin factors are dyadic,
    // so summing them before the Kronecker product is exact.
    let h_d = &zz + &z1 + &z2 + &id4;
    let f1 = (&z1 + &id4 * 0.5) * -1.0;
    let f2 = (&z2 + &id4 * 0.5) * -1.0;
    Ok(max_abs(&kron(&(h_d + f1 + f2 - zz), &x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::eigenvalues;

    fn p(omega: f64, rabi: f64, eps: f64, g: f64) -> ModelParams {
        ModelParams::new(omega, rabi, eps, g).unwrap()
    }

    fn t(n: usize) -> FockTruncation {
        FockTruncation::new(n).unwrap()
    }

    #[test]
    fn free_oscillator_is_diagonal() {
        let h = build_hamiltonian(&p(1.0, 0.0, 0.0, 0.0), &t(2), Frame::Original).unwrap();
        assert_eq!(h.dim(), 12);
        for i in 0..12 {
            for j in 0..12 {
                let expected = if i == j { (i % 3) as f64 } else { 0.0 };
                assert_eq!(h[(i, j)], expected);
            }
        }
    }

    #[test]
    fn zero_coupling_ground_is_spin_ground() {
        // 4x4 spin oracle: Ω(σ1x+σ2x) + ε(σ1z+σ2z) has ground -2 sqrt(Ω² + ε²)
        let params = p(1.0, 0.4, 0.2, 0.0);
        let (single, _) = spin_terms(&params, Frame::Original);
        let spin_ground = eigenvalues(&RealSymmetricMatrix::new(single).unwrap()).unwrap()[0];
        let expected = -2.0 * (0.4f64 * 0.4 + 0.2 * 0.2).sqrt();
        assert!((spin_ground - expected).abs() < 1e-14);
        for n in [1, 5, 17] {
            let h = build_hamiltonian(&params, &t(n), Frame::Original).unwrap();
            let e0 = eigenvalues(&h).unwrap()[0];
            assert!((e0 - (-0.894_427_190_999_916)).abs() < 1e-12, "n_max={n}: {e0}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(FockTruncation::new(0), Err(Error::InvalidTruncation(0))));
        assert!(ModelParams::new(1.0, f64::NAN, 0.0, 0.0).is_err());
        assert!(ModelParams::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, f64::INFINITY).is_err());
        let bad = ModelParams { omega: 1.0, rabi: 1.0, eps: 0.0, g: f64::NAN };
        assert!(build_hamiltonian(&bad, &t(3), Frame::Rotated).is_err());
    }

    #[test]
    fn frames_are_unitarily_equivalent() {
        let params = p(1.0, 0.4, 0.2, 0.5);
        let h = build_hamiltonian(&params, &t(30), Frame::Original).unwrap();
        let hr = build_hamiltonian(&params, &t(30), Frame::Rotated).unwrap();
        let f = 31;
        let r = spin_rotation().kronecker(&DMatrix::identity(f, f));
        let mapped = &r * h.as_matrix() * r.transpose();
        assert!(max_abs(&(mapped - hr.as_matrix())) < 1e-13);
    }

    #[test]
    fn resonant_sectors_need_zero_detuning() {
        let err = build_sector_hamiltonian(&p(1.0, 0.4, 0.1, 0.5), &t(4), Sector::ResonantMinus);
        assert!(matches!(err, Err(Error::SectorUnavailable { .. })));
        assert!(build_sector_hamiltonian(&p(1.0, 0.4, 0.1, 0.5), &t(4), Sector::SingletRotated).is_ok());
    }

    #[test]
    fn sector_dimensions() {
        let params = p(1.0, 0.4, 0.0, 0.5);
        for (s, d) in [
            (Sector::Full, 4),
            (Sector::TripletRotated, 3),
            (Sector::SingletRotated, 1),
            (Sector::ResonantCollective, 2),
            (Sector::ResonantPlus, 1),
            (Sector::ResonantMinus, 1),
        ] {
            let h = build_sector_hamiltonian(&params, &t(9), s).unwrap();
            assert_eq!(h.dim(), d * 10, "{s:?}");
            assert_eq!(s.spin_dim(), d);
        }
    }

    #[test]
    fn collective_sector_is_effective_rabi_model() {
        let params = p(1.0, 0.7, 0.0, 1.3);
        let h = build_sector_hamiltonian(&params, &t(5), Sector::ResonantCollective).unwrap();
        let f = 6;
        // −2Ω S^z on the diagonal, g S^x (a + a†) off the diagonal blocks
        assert!((h[(0, 0)] + 1.4).abs() < 1e-15);
        assert!((h[(f, f)] - 1.4).abs() < 1e-15);
        assert!((h[(0, f + 1)] - 1.3).abs() < 1e-15);
        assert_eq!(h[(0, 1)], 0.0);
    }

    #[test]
    fn parity_examples_and_involution() {
        let tr = t(6);
        let pi = parity_operator(&tr).unwrap();
        let f = 7;
        assert_eq!(pi[(f, f)], -1.0); // |⇓⇓, 0⟩
        assert_eq!(pi[(f + 1, f + 1)], 1.0); // |⇓⇓, 1⟩
        let sq = pi.as_matrix() * pi.as_matrix();
        assert_eq!(sq, DMatrix::identity(2 * f, 2 * f));
    }

    #[test]
    fn parity_commutes_with_collective_hamiltonian() {
        let tr = t(40);
        let h = build_sector_hamiltonian(&p(1.0, 0.7, 0.0, 1.3), &tr, Sector::ResonantCollective)
            .unwrap();
        let pi = parity_operator(&tr).unwrap();
        assert!(h.commutator_max_norm(pi.as_matrix()) <= 1e-12);
    }

    #[test]
    fn exchange_symmetry() {
        let tr = t(12);
        let swap = exchange_operator(&tr).unwrap();
        let sq = swap.as_matrix() * swap.as_matrix();
        assert_eq!(sq, DMatrix::identity(52, 52));
        for frame in [Frame::Original, Frame::Rotated] {
            let h = build_hamiltonian(&p(1.0, 0.4, 0.3, 0.6), &tr, frame).unwrap();
            assert!(h.commutator_max_norm(swap.as_matrix()) <= 1e-12);
        }
        // |−⟩ ⊗ |n⟩ is a −1 eigenvector
        let f = 13;
        let mut minus = DVector::zeros(4 * f);
        minus[f + 3] = -FRAC_1_SQRT_2;
        minus[2 * f + 3] = FRAC_1_SQRT_2;
        let image = swap.as_matrix() * &minus;
        assert!((image + &minus).norm() < 1e-15);
    }

    #[test]
    fn tripartite_reduction_cancels() {
        assert!(verify_tripartite_reduction(1.0, &t(10)).unwrap() <= 1e-14);
        assert_eq!(verify_tripartite_reduction(0.0, &t(10)).unwrap(), 0.0);
        assert!(verify_tripartite_reduction(-3.7, &t(50)).unwrap() <= 1e-13);
        assert!(verify_tripartite_reduction(f64::NAN, &t(3)).is_err());
    }

    #[test]
    fn embedding_preserves_norm_and_energy() {
        let params = p(1.0, 0.4, 0.2, 0.5);
        let tr = t(20);
        let hs = build_sector_hamiltonian(&params, &tr, Sector::TripletRotated).unwrap();
        let sys = crate::spectra::eigensolve(&hs, Some(1)).unwrap();
        let v = sys.vectors.column(0).into_owned();
        let full = embed_in_full(Sector::TripletRotated, &v, 20).unwrap();
        assert!((full.norm() - 1.0).abs() < 1e-13);
        let h = build_hamiltonian(&params, &tr, Frame::Original).unwrap();
        let e = full.dot(&(h.as_matrix() * &full));
        assert!((e - sys.values[0]).abs() < 1e-12);
    }
}
