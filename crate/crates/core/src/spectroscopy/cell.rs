use crate::constants::{
    ea0, ATOMIC_MASS_UNIT, BOLTZMANN, EPSILON_0, HBAR, RB85_ABUNDANCE, RB85_MASS_U, SPEED_OF_LIGHT, TORR,
};
use crate::error::{Error, Result};
use crate::lindblad::Wavelengths;
use crate::num::Real;

/// Gaussian laser beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beam<T> {
    /// Power in W.
    pub power: T,
    /// Intensity FWHM in m.
    pub fwhm: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParameters<T> {
    /// Cell length L in m.
    pub length: T,
    /// Temperature in K.
    pub temperature: T,
    pub isotope_fraction: T,
    pub wavelengths: Wavelengths<T>,
    pub probe: Beam<T>,
    pub coupling: Beam<T>,
}

impl<T: Real> Default for CellParameters<T> {
    fn default() -> Self {
        Self {
            length: T::c(0.075),
            temperature: T::c(294.0),
            isotope_fraction: T::c(RB85_ABUNDANCE),
            wavelengths: Wavelengths::default(),
            probe: Beam { power: T::c(4.1e-6), fwhm: T::c(270e-6) },
            coupling: Beam { power: T::c(43.3e-3), fwhm: T::c(353e-6) },
        }
    }
}

impl<T: Real> CellParameters<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("length", self.length),
            ("temperature", self.temperature),
            ("probe_wavelength", self.wavelengths.probe),
            ("coupling_wavelength", self.wavelengths.coupling),
            ("probe_power", self.probe.power),
            ("probe_fwhm", self.probe.fwhm),
            ("coupling_power", self.coupling.power),
            ("coupling_fwhm", self.coupling.fwhm),
        ];
        for (name, x) in positive {
            if !(x > T::zero()) || !x.is_finite() {
                return Err(Error::param(name, format!("must be positive, got {x}")));
            }
        }
        if !(self.isotope_fraction > T::zero() && self.isotope_fraction <= T::one()) {
            return Err(Error::param("isotope_fraction", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Peak Rabi frequency (rad/s) of a Gaussian beam of `power` (W) and
/// intensity FWHM `fwhm` (m) on a transition with dipole `dipole` (e·a₀).
pub fn rabi_from_beam<T: Real>(power: T, fwhm: T, dipole: T) -> T {
    let w = fwhm / (T::c(2.0) * T::LN_2()).sqrt();
    let intensity = T::c(2.0) * power / (T::PI() * w * w);
    let e = (T::c(2.0) * intensity / T::c(SPEED_OF_LIGHT * EPSILON_0)).sqrt();
    dipole * ea0::<T>() * e / T::c(HBAR)
}

/// Saturated vapor pressure of rubidium in Pa, valid for 250 K < T < 450 K.
///
/// log₁₀(P/torr) = 2.881 + 4.857 − 4215/T for the solid and
/// 2.881 + 4.312 − 4040/T for the liquid (melting point 312.46 K).
pub fn vapor_pressure<T: Real>(temperature: T) -> Result<T> {
    if !(temperature > T::c(250.0) && temperature < T::c(450.0)) {
        return Err(Error::param("temperature", format!("{temperature} K is outside 250-450 K")));
    }
    let log_torr = if temperature < T::c(312.46) {
        T::c(2.881 + 4.857) - T::c(4215.0) / temperature
    } else {
        T::c(2.881 + 4.312) - T::c(4040.0) / temperature
    };
    Ok(T::c(10.0).powf(log_torr) * T::c(TORR))
}

/// Number density (1/m³) of the isotope in the vapor.
pub fn vapor_density<T: Real>(temperature: T, isotope_fraction: T) -> Result<T> {
    if !(isotope_fraction > T::zero() && isotope_fraction <= T::one()) {
        return Err(Error::param("isotope_fraction", "must lie in (0, 1]"));
    }
    let p = vapor_pressure(temperature)?;
    Ok(isotope_fraction * p / (T::c(BOLTZMANN) * temperature))
}

/// Most probable speed √(2k_BT/m) of ⁸⁵Rb along one axis, m/s.
pub fn most_probable_speed<T: Real>(temperature: T) -> T {
    (T::c(2.0 * BOLTZMANN / (RB85_MASS_U * ATOMIC_MASS_UNIT)) * temperature).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rabi_scales_with_root_power() {
        let a = rabi_from_beam(1e-3, 300e-6, 2.0);
        let b = rabi_from_beam(2e-3, 300e-6, 2.0);
        assert!((b / a - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(rabi_from_beam(0.0, 300e-6, 2.0), 0.0);
    }

    #[test]
    fn probe_beam_rabi_by_hand() {
        // 4.1 µW, 270 µm FWHM, 2.042 e·a₀.
        let w = 270e-6 / (2.0 * 2f64.ln()).sqrt();
        let i = 2.0 * 4.1e-6 / (std::f64::consts::PI * w * w);
        let e = (2.0 * i / (SPEED_OF_LIGHT * EPSILON_0)).sqrt();
        let expect = 2.042 * 1.602_176_634e-19 * 5.291_772_109_03e-11 * e / HBAR;
        let got = rabi_from_beam(4.1e-6, 270e-6, 2.042);
        assert!((got - expect).abs() / expect < 1e-12);
        assert!((e - 193.39).abs() < 0.01, "{e}");
    }

    #[test]
    fn vapor_density_room_temperature() {
        // Tabulated 3.92(20)e-7 torr at 25 °C.
        let p = vapor_pressure(298.15_f64).unwrap() / TORR;
        assert!((p / 3.92e-7 - 1.0).abs() < 0.05, "{p}");
        // 294 K: 10^(7.738 − 4215/294) torr = 3.359e-5 Pa, n = P/(k_B T).
        let n: f64 = vapor_density(294.0, 1.0).unwrap();
        assert!((n / 8.275e15 - 1.0).abs() < 2e-3, "{n}");
        assert!(vapor_density(300.0, 1.0).unwrap() < vapor_density(310.0, 1.0).unwrap());
        let half: f64 = vapor_density(294.0, 0.7217).unwrap();
        assert!((half / n - 0.7217).abs() < 1e-12);
        assert!(vapor_density(200.0, 1.0).is_err());
    }

    #[test]
    fn thermal_speed() {
        let u = most_probable_speed(294.0_f64);
        assert!((u - 240.0).abs() < 1.0, "{u}");
    }
}
