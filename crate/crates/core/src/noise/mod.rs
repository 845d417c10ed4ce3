//! Noise spectra, their intensity at the atoms, and the incoherent transition
//! rates and level shifts they induce on the Rydberg pair.

mod geometry;
mod spectrum;

pub use geometry::{FieldGeometry, GainModel, IntensityConvention, SpectralIntensity};
pub use spectrum::{dbm_to_watts, watts_to_dbm, NoiseSpectrum, PsdUnits};

use crate::constants::{BOHR_RADIUS, ELEMENTARY_CHARGE, EPSILON_0, HBAR, PLANCK, SPEED_OF_LIGHT};
use crate::error::Result;
use crate::num::{CompensatedSum, Real};
use crate::quad::{self, QuadOptions, QuadResult};
use crate::rydberg::{Atom, Perturber, RydbergState};

/// Frequencies inside shift integrals are expressed in GHz so that ν⁴ stays
/// representable in `f32`; the ν³ prefactor cancels the scaling exactly.
const GHZ: f64 = 1e9;

/// Noise-induced rates (1/s) and level shifts (Hz) of the Rydberg pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseCouplings<T> {
    /// Exchange rate on the driven pair |3⟩ ↔ |4⟩.
    pub r34: T,
    /// |3⟩ ↔ |d⟩ lumped exchange rate.
    pub rd3: T,
    /// |4⟩ ↔ |e⟩ lumped exchange rate.
    pub re4: T,
    /// Shift ΔE₃/h in Hz.
    pub shift3: T,
    /// Shift ΔE₄/h in Hz.
    pub shift4: T,
}

impl<T: Real> NoiseCouplings<T> {
    pub fn is_zero(&self) -> bool {
        [self.r34, self.rd3, self.re4, self.shift3, self.shift4].iter().all(|x| *x == T::zero())
    }
}

/// Settings for the level-shift integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcShiftOptions<T> {
    /// Half-width (Hz) of the symmetric window around a pole that is
    /// integrated as a principal value.
    pub pv_half_width: T,
    /// Integration range (Hz); defaults to the spectrum grid padded by one step.
    pub bounds: Option<(T, T)>,
    pub quad: QuadOptions<T>,
}

impl<T: Real> Default for AcShiftOptions<T> {
    fn default() -> Self {
        Self { pv_half_width: T::c(1e6), bounds: None, quad: QuadOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingOptions<T> {
    /// Principal-quantum-number window for perturbers.
    pub n_window: u32,
    pub ac: AcShiftOptions<T>,
}

impl<T: Real> Default for CouplingOptions<T> {
    fn default() -> Self {
        Self { n_window: 10, ac: AcShiftOptions::default() }
    }
}

/// Incoherent rate (1/s) on a transition of frequency `nu_fi` (Hz) with
/// polarization-projected dipole `dipole` (e·a₀): e²|d|² I_ν(|ν|)/(2ε₀ħ²c).
pub fn transition_rate<T: Real>(nu_fi: T, dipole: T, intensity: &SpectralIntensity<'_, T>) -> T {
    let i = intensity.at(nu_fi.abs());
    if i == T::zero() {
        return T::zero();
    }
    let k = (ELEMENTARY_CHARGE * BOHR_RADIUS).powi(2) / (2.0 * EPSILON_0 * HBAR * HBAR * SPEED_OF_LIGHT);
    T::c(k) * dipole * dipole * i
}

/// Eq.-(4)-type rate between two states of `atom`.
pub fn noise_rate<T: Real>(
    atom: &Atom<T>,
    i: &RydbergState,
    f: &RydbergState,
    intensity: &SpectralIntensity<'_, T>,
) -> Result<T> {
    let d = atom.dipole_moment(i, f)?;
    let nu = atom.transition_frequency(i, f)?;
    Ok(transition_rate(nu, d.total, intensity))
}

/// Sums of per-transition rates: (R₃₄, R_d3, R_e4). `perturbers3` and
/// `perturbers4` must not contain the driven pair.
pub fn lumped_rates<T: Real>(
    intensity: &SpectralIntensity<'_, T>,
    driven: &Perturber<T>,
    perturbers3: &[Perturber<T>],
    perturbers4: &[Perturber<T>],
) -> (T, T, T) {
    let sum = |ps: &[Perturber<T>]| {
        let s: CompensatedSum<T> =
            ps.iter().map(|p| transition_rate(p.frequency, p.dipole.total, intensity)).collect();
        s.value()
    };
    (transition_rate(driven.frequency, driven.dipole.total, intensity), sum(perturbers3), sum(perturbers4))
}

fn default_bounds<T: Real>(psd: &NoiseSpectrum<T>) -> Option<(T, T)> {
    let (lo, hi) = psd.support()?;
    let step = psd.min_step().unwrap_or(T::zero());
    Some(((lo - step).max(T::zero()), hi + step))
}

/// ∫ I(ν)/(ν²(ν²−a²)) dν over [lo, hi] (all in GHz), principal value at ν = a.
fn shift_integral<T: Real>(
    intensity: &SpectralIntensity<'_, T>,
    nodes: &[T],
    a: T,
    lo: T,
    hi: T,
    window: T,
    opts: &QuadOptions<T>,
) -> QuadResult<T> {
    let ghz = T::c(GHZ);
    let i_at = |s: T| intensity.at(s * ghz);
    let g = |s: T| i_at(s) / (s * s * (s * s - a * a));
    let inside = a > lo && a < hi;
    let w = if inside { window.min(a - lo).min(hi - a) } else { T::zero() };
    if !(w > T::zero()) {
        return quad::integrate(g, lo, hi, nodes, opts);
    }
    let left = quad::integrate(g, lo, a - w, nodes, opts);
    let right = quad::integrate(g, a + w, hi, nodes, opts);
    // PV over [a−w, a+w] folded onto u ∈ (0, w): [h(a+u) − h(a−u)]/u with
    // h(s) = I(s)/(s²(s+a)).
    let h = |s: T| i_at(s) / (s * s * (s + a));
    let folded = |u: T| (h(a + u) - h(a - u)) / u;
    let kinks: Vec<T> = nodes.iter().map(|&n| (n - a).abs()).filter(|&d| d > T::zero() && d < w).collect();
    let centre = quad::integrate(folded, T::zero(), w, &kinks, opts);
    let mut total = CompensatedSum::new();
    total.add(left.value);
    total.add(centre.value);
    total.add(right.value);
    QuadResult {
        value: total.value(),
        error: left.error + centre.error + right.error,
        converged: left.converged && centre.converged && right.converged,
    }
}

/// Level shift ΔE/h (Hz) of a state from second-order coupling to
/// `perturbers` through the noise field. The sign of each ν_fi is kept.
pub fn ac_shift<T: Real>(
    intensity: &SpectralIntensity<'_, T>,
    perturbers: &[Perturber<T>],
    opts: &AcShiftOptions<T>,
) -> T {
    let psd = intensity.spectrum();
    let Some((lo, hi)) = opts.bounds.or_else(|| default_bounds(psd)) else {
        return T::zero();
    };
    if psd.is_zero() {
        return T::zero();
    }
    let ghz = T::c(GHZ);
    let nodes: Vec<T> = psd.nodes().map(|n| n / ghz).collect();
    let (lo, hi, window) = (lo / ghz, hi / ghz, opts.pv_half_width / ghz);
    let k = (ELEMENTARY_CHARGE * BOHR_RADIUS).powi(2) / (PLANCK * PLANCK * SPEED_OF_LIGHT * EPSILON_0);
    let k = T::c(k);
    let mut total = CompensatedSum::new();
    for p in perturbers {
        let nu = p.frequency / ghz;
        let integral = shift_integral(intensity, &nodes, nu.abs(), lo, hi, window, &opts.quad);
        total.add(k * p.dipole.total * p.dipole.total * nu * nu * nu * integral.value);
    }
    total.value()
}

/// Rates and shifts of the driven pair (`s3` coupled to `s4`) for the given
/// noise intensity. Shifts include the partner level; rates into the fictive
/// levels exclude it.
pub fn compute_couplings<T: Real>(
    atom: &Atom<T>,
    s3: &RydbergState,
    s4: &RydbergState,
    intensity: &SpectralIntensity<'_, T>,
    opts: &CouplingOptions<T>,
) -> Result<NoiseCouplings<T>> {
    if intensity.spectrum().is_zero() {
        return Ok(NoiseCouplings::default());
    }
    let p3 = atom.enumerate_perturbers(s3, opts.n_window, &[*s4])?;
    let p4 = atom.enumerate_perturbers(s4, opts.n_window, &[*s3])?;
    let to4 = Perturber { state: *s4, frequency: atom.transition_frequency(s3, s4)?, dipole: atom.dipole_moment(s3, s4)? };
    let to3 = Perturber { state: *s3, frequency: -to4.frequency, dipole: to4.dipole };
    let (r34, rd3, re4) = lumped_rates(intensity, &to4, &p3, &p4);
    let with = |mut v: Vec<Perturber<T>>, extra: Perturber<T>| {
        v.push(extra);
        v
    };
    let shift3 = ac_shift(intensity, &with(p3, to4), &opts.ac);
    let shift4 = ac_shift(intensity, &with(p4, to3), &opts.ac);
    Ok(NoiseCouplings { r34, rd3, re4, shift3, shift4 })
}
