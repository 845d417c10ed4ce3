//! Peak extraction, AT splittings, field inversion, and the zero-RF and
//! CSNR analyses built on them.

use crate::constants::{ea0, PLANCK};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::spectroscopy::TransmissionSpectrum;

pub use crate::noise::FieldGeometry;

/// A local maximum of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<T> {
    /// Interpolated position, Hz of scanned detuning.
    pub position: T,
    /// Interpolated transmission at the maximum.
    pub height: T,
    /// Height above the higher of the two bounding minima.
    pub prominence: T,
}

/// Peaks sorted by position; empty when nothing clears the threshold.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeakSet<T> {
    pub peaks: Vec<Peak<T>>,
}

impl<T: Real> PeakSet<T> {
    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    /// Tallest peak by interpolated height.
    pub fn tallest(&self) -> Option<&Peak<T>> {
        self.peaks.iter().max_by(|a, b| a.height.partial_cmp(&b.height).unwrap())
    }

    /// Most prominent peak.
    pub fn most_prominent(&self) -> Option<&Peak<T>> {
        self.peaks.iter().max_by(|a, b| a.prominence.partial_cmp(&b.prominence).unwrap())
    }

    /// The two most prominent peaks, ordered by position.
    pub fn dominant_pair(&self) -> Option<(Peak<T>, Peak<T>)> {
        if self.peaks.len() < 2 {
            return None;
        }
        let mut by_prom = self.peaks.clone();
        by_prom.sort_by(|a, b| b.prominence.partial_cmp(&a.prominence).unwrap());
        let (a, b) = (by_prom[0], by_prom[1]);
        Some(if a.position <= b.position { (a, b) } else { (b, a) })
    }
}

/// Vertex of the parabola through three points.
fn parabola_vertex<T: Real>(x: [T; 3], y: [T; 3]) -> Option<(T, T)> {
    let (d0, d1) = (x[1] - x[0], x[2] - x[1]);
    let (s0, s1) = ((y[1] - y[0]) / d0, (y[2] - y[1]) / d1);
    let curvature = (s1 - s0) / (x[2] - x[0]);
    if !(curvature < T::zero()) {
        return None;
    }
    // y = y₁ + b(x − x₁) + c(x − x₁)² with b the centred slope at x₁.
    let b = s0 + curvature * d0;
    let xv = x[1] - b / (T::c(2.0) * curvature);
    let yv = y[1] - b * b / (T::c(4.0) * curvature);
    Some((xv, yv))
}

/// Local maxima of `spectrum` with prominence above `threshold`
/// (transmission units), refined by three-point quadratic interpolation.
pub fn find_peaks<T: Real>(spectrum: &TransmissionSpectrum<T>, threshold: T) -> Result<PeakSet<T>> {
    find_peaks_xy(&spectrum.detuning_hz(), &spectrum.transmission, threshold)
}

/// [`find_peaks`] on raw samples (`x` in Hz, strictly increasing).
pub fn find_peaks_xy<T: Real>(x: &[T], y: &[T], threshold: T) -> Result<PeakSet<T>> {
    let n = y.len();
    if n < 5 || x.len() != n {
        return Err(Error::param("spectrum", "need at least 5 samples"));
    }
    let mut peaks = Vec::new();
    let mut k = 1;
    while k + 1 < n {
        if !(y[k] > y[k - 1]) {
            k += 1;
            continue;
        }
        // Walk over a flat top.
        let mut end = k;
        while end + 1 < n && y[end + 1] == y[k] {
            end += 1;
        }
        if end + 1 >= n || !(y[end + 1] < y[k]) {
            k = end + 1;
            continue;
        }
        let top = y[k];
        let mut left_min = top;
        let mut i = k;
        while i > 0 {
            i -= 1;
            if y[i] > top {
                break;
            }
            left_min = left_min.min(y[i]);
        }
        let mut right_min = top;
        let mut j = end;
        while j + 1 < n {
            j += 1;
            if y[j] > top {
                break;
            }
            right_min = right_min.min(y[j]);
        }
        let prominence = top - left_min.max(right_min);
        if prominence > threshold {
            let c = (k + end) / 2;
            let (position, height) = if k == end {
                parabola_vertex([x[c - 1], x[c], x[c + 1]], [y[c - 1], y[c], y[c + 1]]).unwrap_or((x[c], y[c]))
            } else {
                ((x[k] + x[end]) * T::c(0.5), top)
            };
            peaks.push(Peak { position, height, prominence });
        }
        k = end + 1;
    }
    Ok(PeakSet { peaks })
}

/// Separation (Hz) of the two most prominent peaks.
pub fn at_splitting<T: Real>(peaks: &PeakSet<T>) -> Result<T> {
    peaks.dominant_pair().map(|(a, b)| b.position - a.position).ok_or(Error::NoSplitting { found: peaks.len() })
}

/// An apparent field inferred from an AT splitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldEstimate<T> {
    /// |E| in V/m.
    pub efield: T,
    /// Δf_m in Hz.
    pub splitting: T,
    /// Scan factor D (1 for coupling scans, λp/λc for probe scans).
    pub d_factor: T,
    /// ℘ in e·a₀.
    pub dipole: T,
}

impl<T: Real> FieldEstimate<T> {
    pub fn new(splitting: T, dipole: T, d_factor: T) -> Self {
        Self { efield: infer_efield(splitting, dipole, d_factor), splitting, d_factor, dipole }
    }
}

/// |E| = 2π(ħ/℘)·D·Δf_m in V/m, with ℘ in e·a₀ and Δf_m in Hz.
pub fn infer_efield<T: Real>(splitting: T, dipole: T, d_factor: T) -> T {
    T::c(PLANCK) * d_factor * splitting / (dipole * ea0::<T>())
}

/// Far-field CW amplitude (V/m) of `p_sg` watts at the horn input.
pub fn farfield_efield<T: Real>(p_sg: T, nu: T, geometry: &FieldGeometry<T>) -> T {
    geometry.farfield_efield(p_sg, nu)
}

/// Position (Hz) of the tallest EIT peak of a spectrum taken with Ω_RF = 0.
pub fn zero_rf_offset<T: Real>(spectrum: &TransmissionSpectrum<T>, threshold: T) -> Result<T> {
    let peaks = find_peaks(spectrum, threshold)?;
    peaks.tallest().map(|p| p.position).ok_or(Error::SuppressedPeak)
}

/// One point of a CSNR curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsnrPoint<T> {
    /// CW power at the horn input, W.
    pub cw_power: T,
    /// Noise attenuation in dB.
    pub attenuation: T,
    /// Integrated noise power at the horn input, W.
    pub noise_power: T,
    /// P_CW / P_noise.
    pub csnr: T,
    /// Field inferred without noise, V/m (`None` if no splitting was found).
    pub clean: Option<T>,
    /// Field inferred with noise, V/m.
    pub noisy: Option<T>,
}

impl<T: Real> CsnrPoint<T> {
    /// 100·|E_noisy − E_clean|/E_clean, or `None` if either is missing.
    pub fn percent_difference(&self) -> Option<T> {
        match (self.clean, self.noisy) {
            (Some(c), Some(n)) if c > T::zero() => Some(T::c(100.0) * (n - c).abs() / c),
            _ => None,
        }
    }
}

/// Coherent-signal-to-noise power ratio.
pub fn csnr<T: Real>(cw_power: T, noise_power: T) -> T {
    cw_power / noise_power
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorentz(x: f64, x0: f64, w: f64) -> f64 {
        1.0 / (1.0 + ((x - x0) / w).powi(2))
    }

    fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step).round() as usize + 1;
        (0..n).map(|k| lo + step * k as f64).collect()
    }

    #[test]
    fn single_lorentzian_subgrid_position() {
        let x = grid(-100e6, 100e6, 1e6);
        let y: Vec<f64> = x.iter().map(|&x| lorentz(x, 12.5e6, 5e6)).collect();
        let p = find_peaks_xy(&x, &y, 0.05).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p.peaks[0].position - 12.5e6).abs() < 0.1e6, "{}", p.peaks[0].position);
    }

    #[test]
    fn lorentzian_pair_separation() {
        let x = grid(-200e6, 200e6, 1e6);
        let y: Vec<f64> = x.iter().map(|&x| lorentz(x, -50e6, 8e6) + lorentz(x, 50e6, 8e6)).collect();
        let p = find_peaks_xy(&x, &y, 0.05).unwrap();
        assert_eq!(p.len(), 2);
        assert!((at_splitting(&p).unwrap() - 100e6).abs() < 0.2e6);
    }

    #[test]
    fn flat_spectrum_is_empty() {
        let x = grid(0.0, 10.0, 1.0);
        let p = find_peaks_xy(&x, &vec![0.5; x.len()], 0.0).unwrap();
        assert!(p.is_empty());
        assert!(matches!(at_splitting(&p), Err(Error::NoSplitting { found: 0 })));
    }

    #[test]
    fn too_few_points() {
        assert!(find_peaks_xy(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn dominant_pair_ignores_small_third_peak() {
        let x = grid(-200e6, 200e6, 1e6);
        let y: Vec<f64> =
            x.iter().map(|&x| lorentz(x, -83.1e6, 6e6) + lorentz(x, 83.1e6, 6e6) + 0.2 * lorentz(x, 0.0, 3e6)).collect();
        let p = find_peaks_xy(&x, &y, 0.05).unwrap();
        assert_eq!(p.len(), 3);
        assert!((at_splitting(&p).unwrap() - 166.2e6).abs() < 0.2e6);
    }

    #[test]
    fn single_peak_has_no_splitting() {
        let x = grid(-50.0, 50.0, 1.0);
        let y: Vec<f64> = x.iter().map(|&x| lorentz(x, 0.0, 5.0)).collect();
        let p = find_peaks_xy(&x, &y, 0.05).unwrap();
        assert!(matches!(at_splitting(&p), Err(Error::NoSplitting { found: 1 })));
    }

    #[test]
    fn field_inversion() {
        assert_eq!(infer_efield(0.0, 1120.0, 1.0), 0.0);
        let e: f64 = infer_efield(166.2e6, 1120.0, 1.0);
        assert!((infer_efield(166.2e6, 2240.0, 1.0) - e / 2.0).abs() < 1e-12);
        let est = FieldEstimate::new(166.2e6, 1120.0, 1.0);
        let h = 2.0 * std::f64::consts::PI * crate::constants::HBAR;
        assert!((est.efield - h * est.d_factor * est.splitting / (est.dipole * ea0::<f64>())).abs() < 1e-12);
    }

    #[test]
    fn farfield_closes_with_inversion() {
        let g = FieldGeometry::<f64>::new(0.342, 1.73).unwrap();
        let e: f64 = farfield_efield(2.4e-3, 19.7825e9, &g);
        assert!((e - 11.6).abs() < 0.1);
        assert_eq!(farfield_efield(0.0, 19.7825e9, &g), 0.0);
        assert!((farfield_efield(9.6e-3, 19.7825e9, &g) / e - 2.0).abs() < 1e-12);
        // Splitting that corresponds to this field, inverted again.
        let split = e * 1120.0 * ea0::<f64>() / PLANCK;
        assert!((infer_efield(split, 1120.0, 1.0) - e).abs() < 1e-12);
    }

    #[test]
    fn csnr_point() {
        assert_eq!(csnr(1e-3, 1e-3), 1.0);
        let p: CsnrPoint<f64> = CsnrPoint {
            cw_power: 1e-3,
            attenuation: 0.0,
            noise_power: 1e-3,
            csnr: 1.0,
            clean: Some(10.0),
            noisy: Some(11.0),
        };
        assert!((p.percent_difference().unwrap() - 10.0).abs() < 1e-12);
        assert!(CsnrPoint { noisy: None, ..p }.percent_difference().is_none());
    }
}
