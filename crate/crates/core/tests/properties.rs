//! Randomized invariants.

use proptest::prelude::*;
use rydnoise::analysis::{find_peaks_xy, infer_efield};
use rydnoise::config::ScenarioConfig;
use rydnoise::lindblad::{
    build_hamiltonian, build_liouvillian, DecayParameters, DensityMatrix, DriveParameters, Wavelengths, DIM,
};
use rydnoise::noise::{dbm_to_watts, watts_to_dbm, NoiseCouplings, NoiseSpectrum};
use rydnoise::num::Cplx;
use rydnoise::rydberg::RydbergState;

const TP: f64 = 2.0 * std::f64::consts::PI;

fn mhz() -> impl Strategy<Value = f64> {
    (-30.0..30.0f64).prop_map(|x| TP * 1e6 * x)
}

fn rabi() -> impl Strategy<Value = f64> {
    (0.05..20.0f64).prop_map(|x| TP * 1e6 * x)
}

fn drives() -> impl Strategy<Value = DriveParameters<f64>> {
    (rabi(), rabi(), prop_oneof![Just(0.0), rabi()], mhz(), mhz(), mhz()).prop_map(
        |(omega_p, omega_c, omega_rf, delta_p, delta_c, delta_rf)| DriveParameters {
            omega_p,
            omega_c,
            omega_rf,
            delta_p,
            delta_c,
            delta_rf,
        },
    )
}

fn rate() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), 1e3..1e7f64]
}

fn decays() -> impl Strategy<Value = DecayParameters<f64>> {
    (1e4..1e6f64, 1e4..1e6f64, 0usize..2, 0usize..3, rate(), rate(), rate(), -5e6..5e6f64, -5e6..5e6f64).prop_map(
        |(g3, g4, branch3, branch4, r34, rd3, re4, shift3, shift4)| DecayParameters {
            gamma3: TP * g3,
            gamma4: TP * g4,
            branch3,
            branch4,
            noise: NoiseCouplings { r34, rd3, re4, shift3, shift4 },
            ..DecayParameters::default()
        },
    )
}

fn steady(d: &DriveParameters<f64>, g: &DecayParameters<f64>, v: f64) -> DensityMatrix<f64> {
    let h = build_hamiltonian(d, (g.noise.shift3, g.noise.shift4), v, &Wavelengths::default());
    build_liouvillian(&h, g).unwrap().steady_state().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steady_state_is_a_density_matrix(d in drives(), g in decays(), v in -500.0..500.0f64) {
        let rho = steady(&d, &g, v);
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.hermiticity_error() < 1e-12);
        prop_assert!(rho.eigenvalues()[0] > -1e-10);
        prop_assert!(rho.fictive_coherence() < 1e-12);
    }

    #[test]
    fn steady_state_is_stationary(d in drives(), g in decays(), v in -500.0..500.0f64) {
        let h = build_hamiltonian(&d, (g.noise.shift3, g.noise.shift4), v, &Wavelengths::default());
        let l = build_liouvillian(&h, &g).unwrap();
        let rho = l.steady_state().unwrap();
        let drift = l.apply(&rho);
        let worst = (0..DIM * DIM).map(|k| drift.as_slice()[k].norm()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-6 * l.norm(), "{} vs {}", worst, l.norm());
    }

    #[test]
    fn liouvillian_preserves_trace(d in drives(), g in decays(), entries in prop::collection::vec(-1.0..1.0f64, 2 * DIM * DIM)) {
        let h = build_hamiltonian(&d, (0.0, 0.0), 0.0, &Wavelengths::default());
        let l = build_liouvillian(&h, &g).unwrap();
        let v: Vec<Cplx<f64>> = entries.chunks(2).map(|c| Cplx::new(c[0], c[1])).collect();
        let t = l.apply(&DensityMatrix::from_vec(&v)).trace();
        prop_assert!(t.norm() < 1e-9 * l.norm());
    }

    /// With no RF drive a level shift of |3⟩ is the same as retuning the
    /// coupling laser by the same amount.
    #[test]
    fn shift_acts_as_coupling_detuning(d in drives(), g in decays(), s in -5e6..5e6f64) {
        let d = DriveParameters { omega_rf: 0.0, ..d };
        let g = DecayParameters { noise: NoiseCouplings { shift3: 0.0, shift4: 0.0, ..g.noise }, ..g };
        let shifted = steady(&d, &DecayParameters { noise: NoiseCouplings { shift3: s, ..g.noise }, ..g }, 0.0);
        let moved = steady(&DriveParameters { delta_c: d.delta_c - TP * s, ..d }, &g, 0.0);
        prop_assert!(shifted.max_abs_diff(&moved) < 1e-9);
    }

    #[test]
    fn lorentzian_pair_is_recovered(c in -40.0..40.0f64, sep in 20.0..120.0f64, w in 2.0..8.0f64, a in 0.3..1.0f64) {
        let x: Vec<f64> = (0..801).map(|k| -200.0 + 0.5 * k as f64).collect();
        let lor = |x: f64, x0: f64| 1.0 / (1.0 + ((x - x0) / w).powi(2));
        let (x1, x2) = (c - sep / 2.0, c + sep / 2.0);
        let y: Vec<f64> = x.iter().map(|&x| lor(x, x1) + a * lor(x, x2)).collect();
        let p = find_peaks_xy(&x, &y, 0.05).unwrap();
        let (lo, hi) = p.dominant_pair().unwrap();
        // Each line's wing pulls the other's maximum inward slightly.
        let pull = 2.0 * w * w / sep;
        prop_assert!((lo.position - x1).abs() < pull + 0.05, "{} vs {}", lo.position, x1);
        prop_assert!((hi.position - x2).abs() < pull + 0.05, "{} vs {}", hi.position, x2);
        prop_assert_eq!(p.len(), 2);
    }

    #[test]
    fn field_inversion_is_linear(s in 1e6..1e9f64, k in 0.1..10.0f64, dip in 100.0..3000.0f64) {
        let e = infer_efield(s, dip, 1.0);
        prop_assert!((infer_efield(k * s, dip, 1.0) / (k * e) - 1.0).abs() < 1e-12);
        prop_assert!((infer_efield(s, k * dip, 1.0) * k / e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dbm_round_trip(p in -60.0..30.0f64) {
        prop_assert!((watts_to_dbm(dbm_to_watts(p)) - p).abs() < 1e-10);
    }

    #[test]
    fn attenuation_scales_power(centre in 10e9..30e9f64, bw in 1e6..2e9f64, p in 1e-6..1e-1f64, db in -30.0..10.0f64) {
        let s = NoiseSpectrum::rect(centre, bw, p).unwrap();
        prop_assert!((s.integrated_power() / p - 1.0).abs() < 1e-12);
        let r = s.attenuated(db).integrated_power() / p;
        prop_assert!((r / 10f64.powf(db / 10.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn state_labels_round_trip(n in 5u32..120, l in 0u32..4, up in any::<bool>()) {
        let j2 = if l == 0 || up { 2 * l + 1 } else { 2 * l - 1 };
        let label = format!("{n}{}{j2}/2", ['S', 'P', 'D', 'F'][l as usize]);
        if l >= n {
            prop_assert!(label.parse::<RydbergState>().is_err());
        } else {
            let s: RydbergState = label.parse().unwrap();
            prop_assert_eq!(s.to_string(), label);
        }
    }

    #[test]
    fn config_values_survive_parsing(x in 0.05..2.0f64, a in 0.5..3.0f64, att in prop::collection::vec(-30.0..10.0f64, 1..5), power_dbm in -20.0..10.0f64) {
        let list = att.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ");
        let text = format!(
            "[atom]\nlower_state = \"57S1/2\"\nupper_state = \"57P1/2\"\n\
             [drives]\nrf_frequency_Hz = 19.7825e9\n\
             [noise]\nattenuations_dB = [{list}]\n[[noise.band]]\ncenter_Hz = 20.7e9\nbandwidth_Hz = 1e9\npower_dBm = {power_dbm:?}\n\
             [geometry]\ndistance_m = {x:?}\nenhancement = {a:?}\n[cell]\n[run]\n"
        );
        let cfg = ScenarioConfig::parse(&text, ".").unwrap();
        prop_assert_eq!(cfg.geometry.distance_m, x);
        prop_assert_eq!(cfg.geometry.enhancement, a);
        prop_assert_eq!(&cfg.noise.attenuations_db, &att);
        let total = cfg.noise_spectrum::<f64>().unwrap().integrated_power();
        prop_assert!((total / dbm_to_watts(power_dbm) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn radial_cache_is_transparent() {
    use rydnoise::noise::{compute_couplings, CouplingOptions, FieldGeometry};
    use rydnoise::rydberg::Atom;
    let s = NoiseSpectrum::rect(20.7e9, 1e9, 3e-3).unwrap();
    let g = FieldGeometry::new(0.342, 1.73).unwrap();
    let i = g.spectral_intensity(&s);
    let (s3, s4): (RydbergState, RydbergState) = ("57S1/2".parse().unwrap(), "57P1/2".parse().unwrap());
    let o = CouplingOptions::default();
    let cached = Atom::<f64>::rubidium85();
    let first = compute_couplings(&cached, &s3, &s4, &i, &o).unwrap();
    let again = compute_couplings(&cached, &s3, &s4, &i, &o).unwrap();
    let plain = compute_couplings(&Atom::<f64>::rubidium85().with_cache(false), &s3, &s4, &i, &o).unwrap();
    assert_eq!(first, again);
    assert_eq!(first, plain);
}
