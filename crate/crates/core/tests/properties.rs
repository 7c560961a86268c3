use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use tqrm::gfunction::{self, RootKind, RootOptions};
use tqrm::meanfield;
use tqrm::model::{self, FockTruncation, Frame, ModelParams, Sector};
use tqrm::phonon::{self, PhaseSpaceGrid, ReferenceKind, ReferenceState};
use tqrm::physparams::{self, LbConvention, PhysicalIonParams};
use tqrm::spectra::{self, PhononDensityMatrix};
use tqrm::RealSymmetricMatrix;

fn trunc(n: usize) -> FockTruncation {
    FockTruncation::new(n).unwrap()
}

fn params() -> impl Strategy<Value = ModelParams> {
    (0.5..2.0f64, 0.0..1.5f64, -1.0..1.0f64, -1.5..1.5f64)
        .prop_map(|(w, r, e, g)| ModelParams::new(w, r, e, g).unwrap())
}

fn resonant() -> impl Strategy<Value = ModelParams> {
    (0.5..2.0f64, 0.0..1.5f64, -1.5..1.5f64).prop_map(|(w, r, g)| ModelParams::new(w, r, 0.0, g).unwrap())
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn density(entries: Vec<f64>, d: usize) -> PhononDensityMatrix {
    let a = DMatrix::from_vec(d, d, entries);
    let m = &a * a.transpose();
    let tr = m.trace();
    PhononDensityMatrix::new(m / tr).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frames_share_a_spectrum(p in params()) {
        let tr = trunc(20);
        let a = spectra::eigenvalues(&model::build_hamiltonian(&p, &tr, Frame::Original).unwrap()).unwrap();
        let b = spectra::eigenvalues(&model::build_hamiltonian(&p, &tr, Frame::Rotated).unwrap()).unwrap();
        prop_assert!(max_diff(&a, &b) < 1e-10);
    }

    #[test]
    fn triplet_and_singlet_complete_the_spectrum(p in params()) {
        let tr = trunc(20);
        let mut union = spectra::sector_spectrum(&p, &tr, Sector::TripletRotated).unwrap();
        union.extend(spectra::sector_spectrum(&p, &tr, Sector::SingletRotated).unwrap());
        union.sort_by(f64::total_cmp);
        let full = spectra::sector_spectrum(&p, &tr, Sector::Full).unwrap();
        prop_assert!(max_diff(&union, &full) < 1e-10);
    }

    #[test]
    fn resonant_sectors_complete_the_spectrum(p in resonant()) {
        let tr = trunc(20);
        let mut union = Vec::new();
        for s in [Sector::ResonantCollective, Sector::ResonantPlus, Sector::ResonantMinus] {
            union.extend(spectra::sector_spectrum(&p, &tr, s).unwrap());
        }
        union.sort_by(f64::total_cmp);
        let full = spectra::sector_spectrum(&p, &tr, Sector::Full).unwrap();
        prop_assert!(max_diff(&union, &full) < 1e-10);
    }

    #[test]
    fn exchange_and_parity_are_conserved(p in params()) {
        let tr = trunc(12);
        let ex = model::exchange_operator(&tr).unwrap();
        for frame in [Frame::Original, Frame::Rotated] {
            let h = model::build_hamiltonian(&p, &tr, frame).unwrap();
            prop_assert!(h.commutator_max_norm(ex.as_matrix()) <= 1e-12);
        }
        let r = ModelParams::new(p.omega, p.rabi, 0.0, p.g).unwrap();
        let hs = model::build_sector_hamiltonian(&r, &tr, Sector::ResonantCollective).unwrap();
        let pi = model::parity_operator(&tr).unwrap();
        prop_assert!(hs.commutator_max_norm(pi.as_matrix()) <= 1e-12);
    }

    #[test]
    fn eigenpairs_have_small_residuals(entries in prop::collection::vec(-1.0..1.0f64, 144)) {
        let a = DMatrix::from_vec(12, 12, entries);
        let h = RealSymmetricMatrix::new(&a + a.transpose()).unwrap();
        let sys = spectra::eigensolve(&h, None).unwrap();
        let scale = h.max_abs().max(1.0);
        for i in 0..sys.len() {
            let v = sys.vector(i);
            let r = h.as_matrix() * &v - &v * sys.values[i];
            prop_assert!(r.amax() <= 1e-12 * scale * 12.0);
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        prop_assert!(sys.values.windows(2).all(|w| w[0] <= w[1]));
        let gram = sys.vectors.transpose() * &sys.vectors - DMatrix::identity(12, 12);
        prop_assert!(gram.amax() < 1e-12);
    }

    #[test]
    fn ground_energy_decreases_with_cutoff(p in params()) {
        // Nested Fock spaces: the variational minimum can only go down.
        let mut last = f64::INFINITY;
        for n in [4, 8, 16, 32] {
            let e = spectra::ground_state(&p, &trunc(n), Sector::Full).unwrap().energy;
            prop_assert!(e <= last + 1e-12);
            last = e;
        }
    }

    #[test]
    fn reduced_state_is_a_density_matrix(entries in prop::collection::vec(-1.0..1.0f64, 4 * 9)) {
        let mut psi = DVector::from_vec(entries);
        prop_assume!(psi.norm() > 1e-3);
        psi /= psi.norm();
        let rho = spectra::partial_trace_phonon(&psi, 8).unwrap();
        let m = rho.as_matrix();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        prop_assert!((m - m.transpose()).amax() < 1e-15);
        prop_assert!(m.clone().symmetric_eigenvalues().min() > -1e-12);
        let pur = phonon::purity(&rho);
        prop_assert!((1.0 / 9.0 - 1e-12..=1.0 + 1e-12).contains(&pur));
    }

    #[test]
    fn fidelity_is_a_bounded_symmetric_overlap(
        a in prop::collection::vec(-1.0..1.0f64, 36),
        b in prop::collection::vec(-1.0..1.0f64, 36),
    ) {
        let (rho, sigma) = (density(a, 6), density(b, 6));
        let f = phonon::fidelity(&rho, &sigma).unwrap();
        let g = phonon::fidelity(&sigma, &rho).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        prop_assert!((f - g).abs() < 1e-10);
        prop_assert!((phonon::fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
        // F >= Tr(ρσ) holds for all pairs.
        prop_assert!(f + 1e-12 >= (rho.as_matrix().component_mul(sigma.as_matrix())).sum());
    }

    #[test]
    fn coherent_fidelity_is_gaussian_overlap(a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let n = 60;
        let ra = phonon::reference_density(&ReferenceState::new(ReferenceKind::Coherent(a), n)).unwrap();
        let rb = phonon::reference_density(&ReferenceState::new(ReferenceKind::Coherent(b), n)).unwrap();
        let f = phonon::fidelity(&ra, &rb).unwrap();
        prop_assert!((f - (-(a - b).powi(2)).exp()).abs() < 1e-9);
    }

    #[test]
    fn wigner_marginal_is_position_density(a in -2.0..2.0f64, cat in any::<bool>()) {
        let kind = if cat && a.abs() > 0.2 { ReferenceKind::CatMinus(a) } else { ReferenceKind::Coherent(a) };
        let rho = phonon::reference_density(&ReferenceState::new(kind, 40)).unwrap();
        let grid = PhaseSpaceGrid { x_min: -7.0, x_max: 7.0, p_min: -7.0, p_max: 7.0, nx: 57, np: 141 };
        let w = phonon::wigner(&rho, &grid).unwrap();
        prop_assert!((w.integral() - 1.0).abs() < 1e-6);
        let dens = phonon::position_density(&rho, &grid.xs());
        prop_assert!(max_diff(&w.x_marginal(), &dens) < 1e-6);
        prop_assert!(w.values.amax() <= 1.0 / std::f64::consts::PI + 1e-12);
    }

    #[test]
    fn mean_field_gradient_and_minimum(p in params(), alpha in -3.0..3.0f64) {
        let h = 1e-5;
        let fd = (meanfield::energy_functional(alpha + h, &p) - meanfield::energy_functional(alpha - h, &p)) / (2.0 * h);
        prop_assert!((fd - meanfield::energy_gradient(alpha, &p)).abs() < 1e-6 * (1.0 + fd.abs()));
        let r = meanfield::minimize_alpha(&p).unwrap();
        prop_assert!(r.energy <= meanfield::energy_functional(alpha, &p) + 1e-12);
        prop_assert!(r.gradient.abs() < 1e-7);
    }

    #[test]
    fn resonant_mean_field_is_even(p in resonant(), alpha in -3.0..3.0f64) {
        let (a, b) = (meanfield::energy_functional(alpha, &p), meanfield::energy_functional(-alpha, &p));
        prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn trap_ratio_scales(nu_mhz in 0.5..5.0f64, mass in 10.0..200.0f64, slope in 10.0..500.0f64) {
        let base = PhysicalIonParams {
            mass_amu: mass,
            nu: 2.0 * std::f64::consts::PI * nu_mhz * 1e6,
            vd_slope: 2.0 * std::f64::consts::PI * slope * 1e12,
            ..PhysicalIonParams::strontium_example()
        };
        let trap = physparams::derive_trap(&base).unwrap();
        let breathing = physparams::derive_trap(&base.with_convention(LbConvention::BreathingMode)).unwrap();
        prop_assert!((trap.ratio / breathing.ratio - 3f64.sqrt()).abs() < 1e-12);
        prop_assert!((trap.omega_breathing / base.nu - 3f64.sqrt()).abs() < 1e-14);
        let n = physparams::model_params_from_physical(&base, 0.0).unwrap();
        prop_assert!((n.physical().g - trap.g).abs() <= 1e-9 * trap.g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn g_function_roots_are_triplet_levels(
        rabi in 0.1..1.0f64,
        eps in prop_oneof![-0.6..-0.05f64, 0.05..0.6f64],
        g in 0.2..1.2f64,
    ) {
        let p = ModelParams::new(1.0, rabi, eps, g).unwrap();
        let opts = RootOptions { oracle: Some(trunc(120)), ..RootOptions::default() };
        let roots = gfunction::find_roots(&p, -2.0, 2.0, &opts).unwrap();
        let ed: Vec<f64> = spectra::sector_spectrum(&p, &trunc(120), Sector::TripletRotated)
            .unwrap()
            .into_iter()
            .filter(|e| (-2.0..=2.0).contains(e))
            .collect();
        for r in roots.iter().filter(|r| r.kind == RootKind::Regular) {
            prop_assert!(r.ed_match.unwrap() < 1e-8, "root {} off by {:?}", r.energy, r.ed_match);
        }
        // Every level away from the pole guard bands is found.
        for e in ed {
            let near_pole = !gfunction::poles_in(&p, e - 1e-3, e + 1e-3).is_empty();
            let found = roots.iter().any(|r| (r.energy - e).abs() < 1e-6);
            prop_assert!(found || near_pole, "missing level {e}");
        }
    }
}
