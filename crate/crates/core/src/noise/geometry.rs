use crate::constants::{MU_0, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::noise::NoiseSpectrum;
use crate::num::Real;

/// Log-linear horn gain: G[dB] = ref_dB + slope·(ν − ν_ref).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainModel<T> {
    pub ref_db: T,
    pub slope_db_per_ghz: T,
    pub ref_frequency_hz: T,
}

impl<T: Real> Default for GainModel<T> {
    fn default() -> Self {
        Self { ref_db: T::c(15.0), slope_db_per_ghz: T::c(3.0 / 8.5), ref_frequency_hz: T::c(18e9) }
    }
}

impl<T: Real> GainModel<T> {
    pub fn gain_db(&self, nu: T) -> T {
        self.ref_db + self.slope_db_per_ghz * (nu - self.ref_frequency_hz) / T::c(1e9)
    }

    pub fn gain_linear(&self, nu: T) -> T {
        T::c(10.0).powf(self.gain_db(nu) / T::c(10.0))
    }
}

/// How the horn-side power density maps to the intensity used in the rate
/// and shift formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntensityConvention {
    /// Poynting intensity (cε₀/2)|E|² of the far field:
    /// I_ν = A² G dP/dν / (4π x²).
    #[default]
    Poynting,
    /// The squared-field density (A²/x²)(cμ₀/2π) G dP/dν, in V²/(m²·Hz),
    /// used directly as if it were an intensity.
    FieldSquared,
}

impl IntensityConvention {
    pub fn name(self) -> &'static str {
        match self {
            Self::Poynting => "poynting",
            Self::FieldSquared => "field-squared",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "poynting" => Some(Self::Poynting),
            "field-squared" => Some(Self::FieldSquared),
            _ => None,
        }
    }
}

/// Horn-to-atoms propagation geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldGeometry<T> {
    /// Horn-to-cell distance x in m.
    pub distance: T,
    /// Standing-wave enhancement A_sw.
    pub enhancement: T,
    pub gain: GainModel<T>,
    pub convention: IntensityConvention,
}

impl<T: Real> FieldGeometry<T> {
    pub fn new(distance: T, enhancement: T) -> Result<Self> {
        if !(distance > T::zero()) {
            return Err(Error::param("distance", "must be positive"));
        }
        if !(enhancement > T::zero()) {
            return Err(Error::param("enhancement", "must be positive"));
        }
        Ok(Self { distance, enhancement, gain: GainModel::default(), convention: IntensityConvention::Poynting })
    }

    pub fn with_gain(mut self, gain: GainModel<T>) -> Self {
        self.gain = gain;
        self
    }

    pub fn with_convention(mut self, convention: IntensityConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn horn_gain_linear(&self, nu: T) -> T {
        self.gain.gain_linear(nu)
    }

    /// (A/x)² · cμ₀/2π: |E|² per watt of horn input at unit gain.
    fn field_squared_per_watt(&self) -> T {
        let ax = self.enhancement / self.distance;
        ax * ax * T::c(SPEED_OF_LIGHT * MU_0 / (2.0 * std::f64::consts::PI))
    }

    /// Far-field amplitude |E| (V/m) for CW power `p_sg` (W) at `nu`.
    pub fn farfield_efield(&self, p_sg: T, nu: T) -> T {
        (self.field_squared_per_watt() * p_sg * self.horn_gain_linear(nu)).sqrt()
    }

    /// Converts dP/dν at the horn to I_ν at the atoms (per unit gain).
    fn intensity_factor(&self) -> T {
        match self.convention {
            IntensityConvention::FieldSquared => self.field_squared_per_watt(),
            IntensityConvention::Poynting => {
                let ax = self.enhancement / self.distance;
                ax * ax / (T::c(4.0) * T::PI())
            }
        }
    }

    pub fn spectral_intensity<'a>(&self, spectrum: &'a NoiseSpectrum<T>) -> SpectralIntensity<'a, T> {
        SpectralIntensity { spectrum, geometry: *self, factor: self.intensity_factor() }
    }
}

/// I_ν(ν) at the atoms, W/(m²·Hz).
#[derive(Debug, Clone, Copy)]
pub struct SpectralIntensity<'a, T> {
    spectrum: &'a NoiseSpectrum<T>,
    geometry: FieldGeometry<T>,
    factor: T,
}

impl<'a, T: Real> SpectralIntensity<'a, T> {
    pub fn at(&self, nu: T) -> T {
        let p = self.spectrum.psd(nu);
        if p == T::zero() {
            return T::zero();
        }
        self.factor * self.geometry.horn_gain_linear(nu) * p
    }

    pub fn spectrum(&self) -> &'a NoiseSpectrum<T> {
        self.spectrum
    }

    pub fn geometry(&self) -> &FieldGeometry<T> {
        &self.geometry
    }
}
