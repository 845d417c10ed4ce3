//! A fully specified experiment: atom, drives, cell, horn geometry and noise.
//!
//! Everything here is derived from a [`crate::config::ScenarioConfig`] or
//! built by hand in tests.

use std::sync::OnceLock;

use crate::analysis::{self, at_splitting, find_peaks, FieldEstimate, PeakSet};
use crate::constants::{ea0, two_pi, HBAR};
use crate::error::{Error, Result};
use crate::noise::{compute_couplings, CouplingOptions, FieldGeometry, NoiseCouplings, NoiseSpectrum};
use crate::num::Real;
use crate::rydberg::{Atom, RydbergState};
use crate::spectroscopy::{probe_scan_spectrum, transmission_spectrum, ScanAxis, SystemConfig, TransmissionSpectrum};

#[derive(Debug, Clone)]
pub struct Scenario<T: Real> {
    /// Free-text noise descriptor (e.g. the filter name).
    pub label: String,
    pub atom: Atom<T>,
    /// Rydberg pair (|3⟩, |4⟩).
    pub states: (RydbergState, RydbergState),
    /// CW RF frequency, Hz.
    pub rf_frequency: T,
    /// |3⟩↔|4⟩ dipole used for Ω_RF and for field inversion, e·a₀.
    pub rf_dipole: T,
    pub geometry: FieldGeometry<T>,
    /// Noise at the horn input before attenuation.
    pub noise: NoiseSpectrum<T>,
    pub coupling_options: CouplingOptions<T>,
    /// Drives (Ω_RF is overwritten per CW power), decays without noise,
    /// cell and velocity grid.
    pub system: SystemConfig<T>,
    pub axis: ScanAxis,
    /// Scan grid, rad/s.
    pub detunings: Vec<T>,
    /// Peak threshold as a fraction of the clean Ω_RF = 0 peak prominence.
    pub prominence_fraction: T,
    threshold: OnceLock<T>,
}

impl<T: Real> Scenario<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        label: impl Into<String>,
        atom: Atom<T>,
        states: (RydbergState, RydbergState),
        rf_frequency: T,
        rf_dipole: T,
        geometry: FieldGeometry<T>,
        noise: NoiseSpectrum<T>,
        system: SystemConfig<T>,
        detunings: Vec<T>,
    ) -> Self {
        Self {
            label: label.into(),
            atom,
            states,
            rf_frequency,
            rf_dipole,
            geometry,
            noise,
            coupling_options: CouplingOptions::default(),
            system,
            axis: ScanAxis::Coupling,
            detunings,
            prominence_fraction: T::c(0.05),
            threshold: OnceLock::new(),
        }
    }

    pub fn with_axis(mut self, axis: ScanAxis) -> Self {
        self.axis = axis;
        self.threshold = OnceLock::new();
        self
    }

    /// Integrated noise power at the horn input after `attenuation` dB.
    pub fn noise_power(&self, attenuation: T) -> T {
        self.noise.attenuated(attenuation).integrated_power()
    }

    /// Far-field CW amplitude (V/m) for `cw_power` W at the horn input.
    pub fn efield(&self, cw_power: T) -> T {
        self.geometry.farfield_efield(cw_power, self.rf_frequency)
    }

    /// Ω_RF = ℘E/ħ in rad/s.
    pub fn rf_rabi(&self, cw_power: T) -> T {
        self.rf_dipole * ea0::<T>() * self.efield(cw_power) / T::c(HBAR)
    }

    /// Noise couplings after `attenuation` dB; `None` means no noise.
    pub fn couplings(&self, attenuation: Option<T>) -> Result<NoiseCouplings<T>> {
        let Some(a) = attenuation else { return Ok(NoiseCouplings::default()) };
        if !a.is_finite() {
            return Err(Error::param("attenuation", format!("{a} dB is not finite")));
        }
        let noise = self.noise.attenuated(a);
        let intensity = self.geometry.spectral_intensity(&noise);
        compute_couplings(&self.atom, &self.states.0, &self.states.1, &intensity, &self.coupling_options)
    }

    /// System at Rabi frequency `omega_rf` (rad/s) with the given noise couplings.
    pub fn system_for(&self, omega_rf: T, couplings: &NoiseCouplings<T>) -> SystemConfig<T> {
        let mut sys = self.system.clone();
        sys.drives.omega_rf = omega_rf;
        sys.decays.noise = *couplings;
        sys
    }

    /// Spectrum at `cw_power` W with precomputed couplings.
    pub fn spectrum_with(&self, cw_power: T, couplings: &NoiseCouplings<T>) -> Result<TransmissionSpectrum<T>> {
        if !(cw_power >= T::zero()) {
            return Err(Error::param("cw_power", format!("{cw_power} W must be non-negative")));
        }
        let sys = self.system_for(self.rf_rabi(cw_power), couplings);
        let mut s = match self.axis {
            ScanAxis::Coupling => transmission_spectrum(&sys, &self.detunings)?,
            ScanAxis::Probe => probe_scan_spectrum(&sys, &self.detunings)?,
        };
        s.push_meta("noise", &self.label);
        s.push_meta("cw_power_W", cw_power.to_f64_lossy());
        s.push_meta("efield_V_per_m", self.efield(cw_power).to_f64_lossy());
        s.push_meta("rf_frequency_Hz", self.rf_frequency.to_f64_lossy());
        Ok(s)
    }

    pub fn spectrum(&self, cw_power: T, attenuation: Option<T>) -> Result<TransmissionSpectrum<T>> {
        let mut s = self.spectrum_with(cw_power, &self.couplings(attenuation)?)?;
        let att = attenuation.map_or_else(|| "none".to_string(), |a| a.to_f64_lossy().to_string());
        s.push_meta("attenuation_dB", att);
        Ok(s)
    }

    /// Absolute peak threshold, computed once from the noise-free Ω_RF = 0
    /// spectrum.
    pub fn threshold(&self) -> Result<T> {
        if let Some(t) = self.threshold.get() {
            return Ok(*t);
        }
        let clean = self.spectrum_with(T::zero(), &NoiseCouplings::default())?;
        let peaks = find_peaks(&clean, T::zero())?;
        let reference = peaks.most_prominent().ok_or(Error::SuppressedPeak)?.prominence;
        Ok(*self.threshold.get_or_init(|| reference * self.prominence_fraction))
    }

    pub fn peaks(&self, spectrum: &TransmissionSpectrum<T>) -> Result<PeakSet<T>> {
        find_peaks(spectrum, self.threshold()?)
    }

    /// D in |E| = 2π(ħ/℘)·D·Δf_m: 1 for a coupling scan, λ_p/λ_c for a
    /// probe scan.
    pub fn d_factor(&self) -> T {
        match self.axis {
            ScanAxis::Coupling => T::one(),
            ScanAxis::Probe => self.system.cell.wavelengths.probe / self.system.cell.wavelengths.coupling,
        }
    }

    /// Field inferred from the dominant AT pair of `spectrum`.
    pub fn infer(&self, spectrum: &TransmissionSpectrum<T>) -> Result<FieldEstimate<T>> {
        let split = at_splitting(&self.peaks(spectrum)?)?;
        Ok(FieldEstimate::new(split, self.rf_dipole, self.d_factor()))
    }

    /// Tallest-peak position (Hz) at Ω_RF = 0.
    pub fn zero_rf_offset(&self, attenuation: Option<T>) -> Result<T> {
        let s = self.spectrum(T::zero(), attenuation)?;
        analysis::zero_rf_offset(&s, self.threshold()?)
    }

    /// Ω_RF/2π for `cw_power`, in Hz.
    pub fn rf_rabi_hz(&self, cw_power: T) -> T {
        self.rf_rabi(cw_power) / two_pi::<T>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{DecayParameters, DriveParameters};
    use crate::spectroscopy::{detuning_grid, rabi_from_beam, CellParameters};

    fn scenario() -> Scenario<f64> {
        let cell = CellParameters::default();
        let drives = DriveParameters {
            omega_p: rabi_from_beam(cell.probe.power, cell.probe.fwhm, 2.042),
            omega_c: rabi_from_beam(cell.coupling.power, cell.coupling.fwhm, 0.00618),
            ..Default::default()
        };
        let sys = SystemConfig::new(drives, DecayParameters::default(), cell, 2.042);
        let states = ("57S1/2".parse().unwrap(), "57P1/2".parse().unwrap());
        Scenario::new(
            "F1",
            Atom::rubidium85(),
            states,
            19.7825e9,
            1120.0,
            FieldGeometry::new(0.342, 1.73).unwrap(),
            NoiseSpectrum::rect(20.7e9, 1e9, 3e-3).unwrap(),
            sys,
            detuning_grid(-125e6, 125e6, 101),
        )
    }

    #[test]
    fn rabi_from_cw_power() {
        let s = scenario();
        assert_eq!(s.rf_rabi(0.0), 0.0);
        let e = s.efield(2.4e-3);
        assert!((e - 11.6).abs() < 0.1, "{e}");
        let hz = s.rf_rabi_hz(2.4e-3);
        // ℘E/h with ℘ = 1120 e·a₀
        assert!((hz / (1120.0 * 1.602_176_634e-19 * 5.291_772_109_03e-11 * e / 6.626_070_15e-34) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn attenuation_scales_noise_power() {
        let s = scenario();
        let p0 = s.noise_power(0.0);
        assert!((p0 - 3e-3).abs() < 1e-12);
        assert!((s.noise_power(-10.0) / p0 - 0.1).abs() < 1e-12);
        assert!(s.couplings(None).unwrap().is_zero());
        assert!(s.couplings(Some(f64::NAN)).is_err());
    }

    #[test]
    fn clean_offset_is_zero() {
        let s = scenario();
        let off = s.zero_rf_offset(None).unwrap();
        assert!(off.abs() < 1e5, "{off}");
        let blue = s.zero_rf_offset(Some(-6.0)).unwrap();
        assert!(blue > 10e6, "{blue}");
    }

    #[test]
    fn splitting_inverts_to_field() {
        let s = scenario();
        let spectrum = s.spectrum(2.4e-3, None).unwrap();
        let est = s.infer(&spectrum).unwrap();
        let e = s.efield(2.4e-3);
        assert!((est.efield / e - 1.0).abs() < 0.03, "{} vs {e}", est.efield);
        assert!(s.infer(&s.spectrum(0.0, None).unwrap()).is_err());
    }
}
