//! Doppler-averaged probe transmission through a thermal vapor cell.

mod cell;
mod velocity;

pub use cell::{most_probable_speed, rabi_from_beam, vapor_density, vapor_pressure, Beam, CellParameters};
pub use velocity::{VelocityClasses, VelocityGrid};

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;

use crate::constants::{ea0, two_pi, EPSILON_0, HBAR};
use crate::error::{Error, Result};
use crate::lindblad::{build_hamiltonian, build_liouvillian, DecayParameters, DriveParameters};
use crate::num::{CompensatedSum, Cplx, Real};

/// Which laser is swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanAxis {
    Coupling,
    Probe,
}

impl ScanAxis {
    pub fn name(self) -> &'static str {
        match self {
            Self::Coupling => "coupling",
            Self::Probe => "probe",
        }
    }
}

/// Everything needed to evaluate a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig<T> {
    /// Drives; the swept detuning is overwritten point by point.
    pub drives: DriveParameters<T>,
    pub decays: DecayParameters<T>,
    pub cell: CellParameters<T>,
    /// Probe-transition dipole ℘₁₂ in e·a₀.
    pub probe_dipole: T,
    pub velocity: VelocityGrid<T>,
    /// When set, the velocity grid is refined by doubling until two
    /// successive spectra differ by less than this (absolute transmission).
    pub velocity_tolerance: Option<T>,
    /// Number of refinements tried before giving up.
    pub max_refinements: usize,
}

impl<T: Real> SystemConfig<T> {
    pub fn new(drives: DriveParameters<T>, decays: DecayParameters<T>, cell: CellParameters<T>, probe_dipole: T) -> Self {
        Self {
            drives,
            decays,
            cell,
            probe_dipole,
            velocity: VelocityGrid::default(),
            velocity_tolerance: None,
            max_refinements: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cell.validate()?;
        self.decays.validate()?;
        let d = &self.drives;
        for (name, x) in [("omega_p", d.omega_p), ("omega_c", d.omega_c), ("omega_rf", d.omega_rf)] {
            if !(x >= T::zero()) || !x.is_finite() {
                return Err(Error::param(name, "Rabi frequency must be finite and non-negative"));
            }
        }
        if !(d.omega_p > T::zero()) {
            return Err(Error::param("omega_p", "probe Rabi frequency must be positive"));
        }
        if !(self.probe_dipole > T::zero()) {
            return Err(Error::param("probe_dipole", "must be positive"));
        }
        self.velocity.validate()
    }
}

/// Probe transmission versus a scanned detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionSpectrum<T> {
    pub axis: ScanAxis,
    /// Scanned detuning in rad/s, strictly increasing.
    pub detuning: Vec<T>,
    pub transmission: Vec<T>,
    /// Free-form `key=value` records written to the CSV header.
    pub metadata: Vec<(String, String)>,
}

impl<T: Real> TransmissionSpectrum<T> {
    /// Detuning grid in Hz.
    pub fn detuning_hz(&self) -> Vec<T> {
        let tp = two_pi::<T>();
        self.detuning.iter().map(|&d| d / tp).collect()
    }

    pub fn len(&self) -> usize {
        self.detuning.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detuning.is_empty()
    }

    pub fn push_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// `# key=value` lines, then `detuning_Hz,transmission`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}={v}").unwrap();
        }
        out.push_str("detuning_Hz,transmission\n");
        for (d, t) in self.detuning_hz().iter().zip(&self.transmission) {
            writeln!(out, "{},{}", d.to_f64_lossy(), t.to_f64_lossy()).unwrap();
        }
        w.write_all(out.as_bytes())?;
        Ok(())
    }

    /// Largest absolute difference between two spectra on the same grid.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.transmission.iter().zip(&other.transmission).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }
}

/// Velocities (m/s) at which the probe, the two-photon or the RF-dressed
/// three-level resonances are met.
pub fn resonant_velocities<T: Real>(sys: &SystemConfig<T>, drives: &DriveParameters<T>) -> Vec<T> {
    let tp = two_pi::<T>();
    let wl = &sys.cell.wavelengths;
    let (kp, kc) = (tp / wl.probe, tp / wl.coupling);
    let n = &sys.decays.noise;
    let mut out = vec![drives.delta_p / kp];
    // dp + dc = Δp + Δc + (kc − kp)v must equal an eigenvalue of the
    // Rydberg block [[2πs₃, Ω/2], [Ω/2, 2πs₄ − Δ_RF]].
    let (a, b) = (tp * n.shift3, tp * n.shift4 - drives.delta_rf);
    let half = T::c(0.5);
    let root = ((a - b) * (a - b) + drives.omega_rf * drives.omega_rf).sqrt();
    for lambda in [a, b, (a + b) * half + root * half, (a + b) * half - root * half] {
        out.push((lambda - drives.delta_p - drives.delta_c) / (kc - kp));
    }
    out
}

/// Velocity-averaged ρ₁₂ (probe coherence) at one detuning point.
fn averaged_coherence<T: Real>(
    sys: &SystemConfig<T>,
    drives: &DriveParameters<T>,
    grid: &VelocityGrid<T>,
) -> Result<Cplx<T>> {
    let n = &sys.decays.noise;
    let u = most_probable_speed(sys.cell.temperature);
    let classes = grid.classes(u, &resonant_velocities(sys, drives));
    let wl = &sys.cell.wavelengths;
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for (&v, &w) in classes.velocity.iter().zip(&classes.weight) {
        let h = build_hamiltonian(drives, (n.shift3, n.shift4), v, wl);
        let rho = build_liouvillian(&h, &sys.decays)?.steady_state()?;
        let c = rho[(0, 1)];
        re.add(w * c.re);
        im.add(w * c.im);
    }
    Ok(Cplx::new(re.value(), im.value()))
}

/// Converts an averaged ρ₁₂ to transmission exp(−αL).
///
/// With this Hamiltonian's sign convention absorption is carried by
/// Im ρ₁₂ = −Im ρ₂₁.
fn transmission_from<T: Real>(sys: &SystemConfig<T>, rho12: Cplx<T>, density: T) -> T {
    // 2℘²/(ε₀ħ) is ~1e-13 but its factors underflow f32, so fold it in f64.
    let dip = sys.probe_dipole.to_f64_lossy() * ea0::<f64>();
    let coeff = T::c(2.0 * dip * dip / (EPSILON_0 * HBAR));
    let chi_im = coeff * density * rho12.im / sys.drives.omega_p;
    let alpha = two_pi::<T>() / sys.cell.wavelengths.probe * chi_im;
    (-alpha * sys.cell.length).exp()
}

fn check_grid<T: Real>(detunings: &[T]) -> Result<()> {
    if detunings.is_empty() {
        return Err(Error::param("detunings", "grid is empty"));
    }
    if detunings.windows(2).any(|w| !(w[1] > w[0])) || detunings.iter().any(|d| !d.is_finite()) {
        return Err(Error::param("detunings", "grid must be finite and strictly increasing"));
    }
    Ok(())
}

fn scan_once<T: Real>(
    sys: &SystemConfig<T>,
    axis: ScanAxis,
    detunings: &[T],
    grid: &VelocityGrid<T>,
    density: T,
) -> Result<Vec<T>> {
    detunings
        .par_iter()
        .map(|&d| {
            let mut drives = sys.drives;
            match axis {
                ScanAxis::Coupling => drives.delta_c = d,
                ScanAxis::Probe => drives.delta_p = d,
            }
            let rho12 = averaged_coherence(sys, &drives, grid)?;
            Ok(transmission_from(sys, rho12, density))
        })
        .collect()
}

fn scan<T: Real>(sys: &SystemConfig<T>, axis: ScanAxis, detunings: &[T]) -> Result<TransmissionSpectrum<T>> {
    sys.validate()?;
    check_grid(detunings)?;
    let density = vapor_density(sys.cell.temperature, sys.cell.isotope_fraction)?;
    let mut grid = sys.velocity;
    let mut values = scan_once(sys, axis, detunings, &grid, density)?;
    let mut achieved = None;
    if let Some(tol) = sys.velocity_tolerance {
        for round in 0.. {
            let Some(finer) = grid.refined().filter(|_| round < sys.max_refinements) else {
                return Err(Error::VelocityConvergence {
                    achieved: achieved.map_or(f64::INFINITY, |a: T| a.to_f64_lossy()),
                    required: tol.to_f64_lossy(),
                });
            };
            let next = scan_once(sys, axis, detunings, &finer, density)?;
            let diff = values.iter().zip(&next).fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
            achieved = Some(diff);
            values = next;
            grid = finer;
            if diff < tol {
                break;
            }
        }
    }
    let mut out = TransmissionSpectrum { axis, detuning: detunings.to_vec(), transmission: values, metadata: Vec::new() };
    let tp = two_pi::<T>();
    let d = &sys.drives;
    out.push_meta("scan", axis.name());
    out.push_meta("omega_p_Hz", (d.omega_p / tp).to_f64_lossy());
    out.push_meta("omega_c_Hz", (d.omega_c / tp).to_f64_lossy());
    out.push_meta("omega_rf_Hz", (d.omega_rf / tp).to_f64_lossy());
    out.push_meta("temperature_K", sys.cell.temperature.to_f64_lossy());
    out.push_meta("density_per_m3", density.to_f64_lossy());
    out.push_meta("velocity_grid", grid.describe());
    if let Some(a) = achieved {
        out.push_meta("velocity_change", a.to_f64_lossy());
    }
    let n = &sys.decays.noise;
    out.push_meta("shift3_Hz", n.shift3.to_f64_lossy());
    out.push_meta("shift4_Hz", n.shift4.to_f64_lossy());
    out.push_meta("r34_per_s", n.r34.to_f64_lossy());
    out.push_meta("rd3_per_s", n.rd3.to_f64_lossy());
    out.push_meta("re4_per_s", n.re4.to_f64_lossy());
    Ok(out)
}

/// Transmission versus coupling detuning Δ_c (rad/s) at fixed Δ_p.
pub fn transmission_spectrum<T: Real>(sys: &SystemConfig<T>, detunings: &[T]) -> Result<TransmissionSpectrum<T>> {
    scan(sys, ScanAxis::Coupling, detunings)
}

/// Transmission versus probe detuning Δ_p (rad/s) at fixed Δ_c.
pub fn probe_scan_spectrum<T: Real>(sys: &SystemConfig<T>, detunings: &[T]) -> Result<TransmissionSpectrum<T>> {
    scan(sys, ScanAxis::Probe, detunings)
}

/// Uniform detuning grid in rad/s from `lo` to `hi` Hz with `points` samples.
pub fn detuning_grid<T: Real>(lo_hz: T, hi_hz: T, points: usize) -> Vec<T> {
    let tp = two_pi::<T>();
    if points < 2 {
        return vec![lo_hz * tp];
    }
    let step = (hi_hz - lo_hz) / T::from_usize_lossy(points - 1);
    (0..points).map(|k| (lo_hz + step * T::from_usize_lossy(k)) * tp).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::find_peaks;
    use crate::noise::NoiseCouplings;

    fn system() -> SystemConfig<f64> {
        let cell = CellParameters::default();
        let drives = DriveParameters {
            omega_p: rabi_from_beam(cell.probe.power, cell.probe.fwhm, 2.042),
            omega_c: rabi_from_beam(cell.coupling.power, cell.coupling.fwhm, 0.00618),
            ..Default::default()
        };
        SystemConfig::new(drives, DecayParameters::default(), cell, 2.042)
    }

    fn grid() -> Vec<f64> {
        detuning_grid(-30e6, 30e6, 61)
    }

    fn peak(s: &TransmissionSpectrum<f64>) -> (f64, f64) {
        let p = find_peaks(s, 0.0).unwrap();
        let t = p.most_prominent().unwrap();
        (t.position, t.prominence)
    }

    #[test]
    fn no_coupling_means_no_dependence_on_coupling_detuning() {
        let mut sys = system();
        sys.drives.omega_c = 0.0;
        let s = transmission_spectrum(&sys, &grid()).unwrap();
        let (lo, hi) = s.transmission.iter().fold((1.0f64, 0.0f64), |(a, b), &t| (a.min(t), b.max(t)));
        // Only the panel placement follows Δ_c, so differences are quadrature noise.
        assert!(hi - lo < 1e-8, "{lo} {hi}");
        assert!(lo > 0.0 && hi <= 1.0);
    }

    #[test]
    fn clean_eit_peak_sits_at_zero() {
        let s = transmission_spectrum(&system(), &grid()).unwrap();
        assert!(s.transmission.iter().all(|t| *t > 0.0 && *t <= 1.0));
        let (pos, prom) = peak(&s);
        assert!(pos.abs() < 0.1e6, "{pos}");
        assert!(prom > 0.05, "{prom}");
        assert_eq!(s.meta("scan"), Some("coupling"));
    }

    #[test]
    fn level_shift_moves_peak_by_the_same_amount() {
        let base = transmission_spectrum(&system(), &grid()).unwrap();
        let mut sys = system();
        sys.decays.noise = NoiseCouplings { shift3: 10e6, ..Default::default() };
        let shifted = transmission_spectrum(&sys, &grid()).unwrap();
        let (p0, _) = peak(&base);
        let (p1, _) = peak(&shifted);
        assert!((p1 - p0 - 10e6).abs() < 0.1e6, "{p0} {p1}");
    }

    #[test]
    fn noise_rates_broaden_and_lower_the_peak() {
        let (_, clean) = peak(&transmission_spectrum(&system(), &grid()).unwrap());
        let mut sys = system();
        sys.decays.noise = NoiseCouplings { rd3: 2e8, ..Default::default() };
        let (_, noisy) = peak(&transmission_spectrum(&sys, &grid()).unwrap());
        assert!(noisy < 0.8 * clean, "{clean} {noisy}");
    }

    #[test]
    fn single_class_matches_engine_at_rest() {
        let mut sys = system();
        sys.velocity = VelocityGrid::Single;
        let d = sys.drives;
        let rho = build_liouvillian(&build_hamiltonian(&d, (0.0, 0.0), 0.0, &sys.cell.wavelengths), &sys.decays)
            .unwrap()
            .steady_state()
            .unwrap();
        let avg = averaged_coherence(&sys, &d, &sys.velocity).unwrap();
        assert_eq!(avg, rho[(0, 1)]);
        assert!(avg.im > 0.0, "absorption carried by Im ρ12 > 0: {avg}");
    }

    #[test]
    fn velocity_grid_is_converged() {
        let mut sys = system();
        sys.drives.omega_rf = two_pi::<f64>() * 40e6;
        let g = detuning_grid(-40e6, 40e6, 41);
        let a = transmission_spectrum(&sys, &g).unwrap();
        sys.velocity = sys.velocity.refined().unwrap();
        let b = transmission_spectrum(&sys, &g).unwrap();
        sys.velocity = sys.velocity.with_span(5.0);
        let c = transmission_spectrum(&sys, &g).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-4, "{}", a.max_abs_diff(&b));
        assert!(b.max_abs_diff(&c) < 1e-6, "{}", b.max_abs_diff(&c));
    }

    #[test]
    fn refinement_reports_failure() {
        let mut sys = system();
        sys.velocity_tolerance = Some(1e-30);
        sys.max_refinements = 1;
        let g = detuning_grid(-5e6, 5e6, 5);
        match transmission_spectrum(&sys, &g) {
            Err(Error::VelocityConvergence { achieved, required }) => {
                assert!(achieved > required && achieved < 1e-3);
            }
            other => panic!("{other:?}"),
        }
        sys.velocity_tolerance = Some(1e-3);
        let s = transmission_spectrum(&sys, &g).unwrap();
        assert!(s.meta("velocity_change").is_some());
    }

    #[test]
    fn thread_count_does_not_change_values() {
        let sys = system();
        let g = grid();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| transmission_spectrum(&sys, &g)).unwrap();
        let b = three.install(|| transmission_spectrum(&sys, &g)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_grids_and_parameters() {
        let sys = system();
        assert!(transmission_spectrum(&sys, &[]).is_err());
        assert!(transmission_spectrum(&sys, &[1.0, 1.0]).is_err());
        let mut bad = system();
        bad.drives.omega_p = 0.0;
        assert!(transmission_spectrum(&bad, &grid()).is_err());
    }

    #[test]
    fn single_precision_tracks_double() {
        let s64 = transmission_spectrum(&system(), &grid()).unwrap();
        let cell = CellParameters::<f32>::default();
        let drives = DriveParameters {
            omega_p: rabi_from_beam(cell.probe.power, cell.probe.fwhm, 2.042f32),
            omega_c: rabi_from_beam(cell.coupling.power, cell.coupling.fwhm, 0.00618f32),
            ..Default::default()
        };
        let sys = SystemConfig::new(drives, DecayParameters::default(), cell, 2.042f32);
        let g: Vec<f32> = grid().iter().map(|x| *x as f32).collect();
        let s32 = transmission_spectrum(&sys, &g).unwrap();
        for (a, b) in s64.transmission.iter().zip(&s32.transmission) {
            assert!((a - *b as f64).abs() < 2e-3, "{a} {b}");
        }
    }
}
