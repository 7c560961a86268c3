//! Checks against closed forms and independently computed reference values.

use approx::assert_relative_eq;
use std::f64::consts::PI;

use tqrm::gfunction;
use tqrm::meanfield;
use tqrm::model::{FockTruncation, ModelParams, Sector};
use tqrm::phonon::{self, ReferenceKind, ReferenceState};
use tqrm::spectra::{self, PhononDensityMatrix};

fn p(omega: f64, rabi: f64, eps: f64, g: f64) -> ModelParams {
    ModelParams::new(omega, rabi, eps, g).unwrap()
}

fn trunc(n: usize) -> FockTruncation {
    FockTruncation::new(n).unwrap()
}

#[test]
fn uncoupled_spectrum_is_oscillator_plus_spin_levels() {
    let (omega, rabi, eps): (f64, f64, f64) = (1.3, 0.4, 0.25);
    let r = (rabi * rabi + eps * eps).sqrt();
    let n_max = 30;
    let full = spectra::sector_spectrum(&p(omega, rabi, eps, 0.0), &trunc(n_max), Sector::Full).unwrap();
    let mut expected: Vec<f64> = (0..=n_max)
        .flat_map(|n| [-2.0 * r, 0.0, 0.0, 2.0 * r].map(|s| n as f64 * omega + s))
        .collect();
    expected.sort_by(f64::total_cmp);
    for (a, b) in full.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn undriven_spectrum_is_displaced_oscillator() {
    // Ω = 0: σ1zσ2z is conserved and each spin configuration is a displaced
    // oscillator with shift −g²/ω.
    let (omega, eps, g) = (0.9, 0.3, 0.7);
    let levels = spectra::sector_spectrum(&p(omega, 0.0, eps, g), &trunc(120), Sector::Full).unwrap();
    let shift = g * g / omega;
    let mut expected: Vec<f64> = (0..=20)
        .flat_map(|n| [-2.0 * eps, 0.0, 0.0, 2.0 * eps].map(|s| n as f64 * omega - shift + s))
        .collect();
    expected.sort_by(f64::total_cmp);
    for (a, b) in levels.iter().zip(&expected).take(60) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn triplet_levels_match_reference_diagonalization() {
    // Independent dense diagonalization of the rotated triplet block at
    // (Ω, ε, g) = (0.4, 0.2, 0.5), cutoff 240.
    let reference = [
        -1.01322271, -0.42599085, -0.0051857, 0.37427775, 0.80635103, 1.17230342, 1.27817443, 1.76879501, 2.19088172,
        2.31399568, 2.74210853,
    ];
    let ed = spectra::sector_spectrum(&p(1.0, 0.4, 0.2, 0.5), &trunc(120), Sector::TripletRotated).unwrap();
    for (a, b) in ed.iter().zip(reference) {
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }
    let singlet = gfunction::singlet_energies(&p(1.0, 0.4, 0.2, 0.5), 3).unwrap();
    assert_relative_eq!(singlet[0], -0.25, epsilon = 1e-15);
}

#[test]
fn resonant_mean_field_closed_form() {
    // E(α) = ωα² − 2√(g²α² + Ω²): minimum at α₀² = g²/ω² − Ω²/g² above g_c.
    let q = p(1.0, 1.0, 0.0, 2.0);
    let a0 = meanfield::superradiant_amplitude(&q).unwrap();
    assert_relative_eq!(a0, 3.75f64.sqrt(), epsilon = 1e-14);
    let e0 = a0 * a0 - 2.0 * (4.0 * a0 * a0 + 1.0f64).sqrt();
    assert_relative_eq!(meanfield::energy_functional(a0, &q), e0, epsilon = 1e-12);
    let r = meanfield::minimize_alpha(&q).unwrap();
    assert_relative_eq!(r.energy, e0, epsilon = 1e-12);
    assert!(r.degenerate);
    let below = meanfield::minimize_alpha(&p(1.0, 1.0, 0.0, 0.6)).unwrap();
    assert_eq!(below.alpha_star, 0.0);
    assert_relative_eq!(below.energy, -2.0, epsilon = 1e-12);
}

#[test]
fn wigner_of_fock_states_at_origin() {
    let vac = phonon::reference_density(&ReferenceState::new(ReferenceKind::Vacuum, 4)).unwrap();
    assert_relative_eq!(phonon::wigner_point(vac.as_matrix(), 0, 0.0, 0.0), 1.0 / PI, epsilon = 1e-15);
    // W_vac(x, p) = e^(−x²−p²)/π.
    assert_relative_eq!(phonon::wigner_point(vac.as_matrix(), 0, 0.7, -0.4), (-0.65f64).exp() / PI, epsilon = 1e-15);
    let mut one = nalgebra::DVector::zeros(5);
    one[1] = 1.0;
    let rho1 = PhononDensityMatrix::pure(&one).unwrap();
    assert_relative_eq!(phonon::wigner_point(rho1.as_matrix(), 4, 0.0, 0.0), -1.0 / PI, epsilon = 1e-15);
    // W_1(x, p) = (2(x²+p²) − 1) e^(−x²−p²)/π.
    let (x, q) = (0.9, 0.3);
    let r2 = x * x + q * q;
    assert_relative_eq!(phonon::wigner_point(rho1.as_matrix(), 4, x, q), (2.0 * r2 - 1.0) * (-r2).exp() / PI, epsilon = 1e-14);
}

#[test]
fn coherent_state_moments() {
    let a = -1.7;
    let rho = phonon::reference_density(&ReferenceState::new(ReferenceKind::Coherent(a), 60)).unwrap();
    assert_relative_eq!(rho.mean_number(), a * a, epsilon = 1e-12);
    let (vx, vp) = phonon::quadrature_variances(&rho);
    assert_relative_eq!(vx, 0.5, epsilon = 1e-12);
    assert_relative_eq!(vp, 0.5, epsilon = 1e-12);
    assert_relative_eq!(phonon::mean_position(&rho), 2f64.sqrt() * a, epsilon = 1e-12);
    assert_relative_eq!(phonon::purity(&rho), 1.0, epsilon = 1e-12);
}

#[test]
fn cat_and_mixture_statistics() {
    let a = 1.2;
    let t = a * a;
    let ref_of = |k| phonon::reference_density(&ReferenceState::new(k, 60)).unwrap();
    // ⟨n⟩ of even/odd cats: |α|² tanh|α|² and |α|² coth|α|².
    assert_relative_eq!(ref_of(ReferenceKind::CatPlus(a)).mean_number(), t * t.tanh(), epsilon = 1e-12);
    assert_relative_eq!(ref_of(ReferenceKind::CatMinus(a)).mean_number(), t / t.tanh(), epsilon = 1e-12);
    let mix = ref_of(ReferenceKind::Mixture(a));
    assert_relative_eq!(mix.mean_number(), t, epsilon = 1e-12);
    // Purity of the equal mixture: (1 + e^(−4|α|²)) / 2.
    assert_relative_eq!(phonon::purity(&mix), 0.5 * (1.0 + (-4.0 * t).exp()), epsilon = 1e-12);
    // ⟨cat+|ρ_mix|cat+⟩ = (1 + e^(−2|α|²)) / 2.
    let f = phonon::fidelity(&ref_of(ReferenceKind::CatPlus(a)), &mix).unwrap();
    assert_relative_eq!(f, 0.5 * (1.0 + (-2.0 * t).exp()), epsilon = 1e-9);
}

#[test]
fn undriven_ground_state_is_coherent() {
    // Ω = 0, ε > 0: ground state |⇓⇓⟩ ⊗ |−g/ω⟩ exactly.
    let q = p(1.0, 0.0, 0.3, 0.8);
    let gs = spectra::converged_ground_state(&q, &trunc(40), Sector::Full).unwrap();
    assert_relative_eq!(gs.energy, -0.6 - 0.64, epsilon = 1e-12);
    let rho = gs.density_matrix().unwrap();
    let coh = phonon::reference_density(&ReferenceState::new(ReferenceKind::Coherent(-0.8), gs.n_max_used)).unwrap();
    assert_relative_eq!(phonon::fidelity(&rho, &coh).unwrap(), 1.0, epsilon = 1e-9);
}

#[test]
fn weak_coupling_second_order_shift() {
    let (omega, rabi) = (1.0, 0.5);
    let g = 1e-3;
    let e0 = spectra::ground_state(&p(omega, rabi, 0.0, 0.0), &trunc(10), Sector::Full).unwrap().energy;
    let e = spectra::ground_state(&p(omega, rabi, 0.0, g), &trunc(10), Sector::Full).unwrap().energy;
    // In the σ^x eigenbasis the coupling σ1zσ2z flips both spins: from the
    // ground state (−Ω −Ω) it reaches (+Ω +Ω) with amplitude 1, gap 4Ω.
    let expected = -g * g / (omega + 4.0 * rabi);
    assert_relative_eq!(e - e0, expected, max_relative = 1e-4);
}
