use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::num::{CompensatedSum, Real};

/// dBm to watts.
pub fn dbm_to_watts<T: Real>(dbm: T) -> T {
    T::c(1e-3) * T::c(10.0).powf(dbm / T::c(10.0))
}

pub fn watts_to_dbm<T: Real>(w: T) -> T {
    T::c(10.0) * (w / T::c(1e-3)).log10()
}

/// Units tag of a PSD file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdUnits {
    /// Frequency in Hz, density in W/Hz.
    HzWattsPerHz,
    /// Frequency in GHz, density in dBm/Hz.
    GHzDbmPerHz,
}

impl PsdUnits {
    fn parse(tag: &str) -> Option<Self> {
        match tag.replace(' ', "").as_str() {
            "Hz,W_per_Hz" => Some(Self::HzWattsPerHz),
            "GHz,dBm_per_Hz" => Some(Self::GHzDbmPerHz),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Self::HzWattsPerHz => "Hz,W_per_Hz",
            Self::GHzDbmPerHz => "GHz,dBm_per_Hz",
        }
    }
}

/// Piecewise-linear power spectral density dP/dν (W/Hz).
///
/// Made of one or more disjoint segments; the density is linear between
/// samples of a segment and exactly zero outside every segment.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpectrum<T> {
    segments: Vec<Segment<T>>,
    integrated_power: T,
}

#[derive(Debug, Clone, PartialEq)]
struct Segment<T> {
    freq: Vec<T>,
    psd: Vec<T>,
}

impl<T: Real> Segment<T> {
    fn power(&self) -> T {
        let s: CompensatedSum<T> = self
            .freq
            .windows(2)
            .zip(self.psd.windows(2))
            .map(|(f, p)| (f[1] - f[0]) * (p[0] + p[1]) * T::c(0.5))
            .collect();
        s.value()
    }

    fn eval(&self, nu: T) -> T {
        let (f, p) = (&self.freq, &self.psd);
        if nu < f[0] || nu > f[f.len() - 1] {
            return T::zero();
        }
        let k = f.partition_point(|&x| x <= nu).clamp(1, f.len() - 1);
        let t = (nu - f[k - 1]) / (f[k] - f[k - 1]);
        p[k - 1] + t * (p[k] - p[k - 1])
    }
}

impl<T: Real> NoiseSpectrum<T> {
    /// Spectrum from samples. The grid must be strictly increasing with at
    /// least two points and the density non-negative.
    pub fn from_samples(freq: Vec<T>, psd: Vec<T>) -> Result<Self> {
        Self::check(&freq, &psd)?;
        let seg = Segment { freq, psd };
        Ok(Self { integrated_power: seg.power(), segments: vec![seg] })
    }

    fn check(freq: &[T], psd: &[T]) -> Result<()> {
        if freq.len() != psd.len() || freq.len() < 2 {
            return Err(Error::param("spectrum", "need at least two (frequency, psd) samples"));
        }
        if freq.windows(2).any(|w| !(w[1] > w[0])) || !freq[0].is_finite() {
            return Err(Error::param("spectrum", "frequency grid must be strictly increasing"));
        }
        if psd.iter().any(|p| !(*p >= T::zero()) || !p.is_finite()) {
            return Err(Error::param("spectrum", "psd must be finite and non-negative"));
        }
        Ok(())
    }

    /// Identically zero spectrum.
    pub fn zero() -> Self {
        Self { segments: Vec::new(), integrated_power: T::zero() }
    }

    /// Flat density `power / bandwidth` over `[center − B/2, center + B/2]`.
    pub fn rect(center: T, bandwidth: T, power: T) -> Result<Self> {
        if !(bandwidth > T::zero()) {
            return Err(Error::param("bandwidth", "must be positive"));
        }
        if !(power >= T::zero()) {
            return Err(Error::param("power", "must be non-negative"));
        }
        let half = bandwidth * T::c(0.5);
        let (lo, hi) = (center - half, center + half);
        if !(lo > T::zero()) {
            return Err(Error::param("center", "band must lie at positive frequencies"));
        }
        let level = power / bandwidth;
        let mut s = Self::from_samples(vec![lo, hi], vec![level, level])?;
        // (hi − lo) can differ from `bandwidth` by rounding; keep the requested power.
        s.integrated_power = power;
        Ok(s)
    }

    /// Union of disjoint spectra.
    pub fn combine(parts: impl IntoIterator<Item = Self>) -> Result<Self> {
        let mut segments: Vec<Segment<T>> = parts.into_iter().flat_map(|s| s.segments).collect();
        segments.sort_by(|a, b| a.freq[0].partial_cmp(&b.freq[0]).unwrap());
        if segments.windows(2).any(|w| w[1].freq[0] <= *w[0].freq.last().unwrap()) {
            return Err(Error::param("spectrum", "bands overlap"));
        }
        let s: CompensatedSum<T> = segments.iter().map(Segment::power).collect();
        Ok(Self { integrated_power: s.value(), segments })
    }

    /// Same shape, every sample multiplied by `factor` (≥ 0).
    pub fn scaled(&self, factor: T) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| Segment { freq: s.freq.clone(), psd: s.psd.iter().map(|&p| p * factor).collect() })
            .collect();
        Self { segments, integrated_power: self.integrated_power * factor }
    }

    /// Same shape with the integral set to `power`.
    pub fn with_power(&self, power: T) -> Self {
        if self.integrated_power > T::zero() {
            let mut s = self.scaled(power / self.integrated_power);
            s.integrated_power = power;
            s
        } else {
            self.clone()
        }
    }

    /// Applies an attenuation in dB (negative values attenuate).
    pub fn attenuated(&self, db: T) -> Self {
        self.scaled(T::c(10.0).powf(db / T::c(10.0)))
    }

    /// dP/dν at `nu`, zero outside the grid.
    pub fn psd(&self, nu: T) -> T {
        self.segments.iter().map(|s| s.eval(nu)).fold(T::zero(), |a, b| a + b)
    }

    /// Trapezoid integral of the samples, in W.
    pub fn integrated_power(&self) -> T {
        self.integrated_power
    }

    pub fn is_zero(&self) -> bool {
        self.segments.iter().all(|s| s.psd.iter().all(|p| *p == T::zero()))
    }

    /// (lowest, highest) grid frequency, or `None` for the empty spectrum.
    pub fn support(&self) -> Option<(T, T)> {
        let first = self.segments.first()?;
        let last = self.segments.last()?;
        Some((first.freq[0], *last.freq.last().unwrap()))
    }

    /// Smallest spacing of the sample grid.
    pub fn min_step(&self) -> Option<T> {
        self.segments
            .iter()
            .flat_map(|s| s.freq.windows(2).map(|w| w[1] - w[0]))
            .reduce(|a, b| a.min(b))
    }

    /// All sample frequencies (where the density may have kinks).
    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        self.segments.iter().flat_map(|s| s.freq.iter().copied())
    }

    /// (frequency, psd) samples of every segment in order.
    pub fn samples(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.segments.iter().flat_map(|s| s.freq.iter().copied().zip(s.psd.iter().copied()))
    }

    /// Reads a two-column PSD CSV. The first non-blank line must be the
    /// units tag `# units: Hz,W_per_Hz` or `# units: GHz,dBm_per_Hz`;
    /// other `#` lines are comments.
    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut text = String::new();
        let mut reader = reader;
        reader.read_to_string(&mut text)?;
        let mut units = None;
        let mut header_line = 0;
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            header_line = i + 1;
            if let Some(rest) = t.strip_prefix('#') {
                if let Some(tag) = rest.trim().strip_prefix("units:") {
                    units = PsdUnits::parse(tag.trim());
                    if units.is_none() {
                        return Err(Error::Parse { line: i + 1, msg: format!("unknown units tag `{}`", tag.trim()) });
                    }
                }
            }
            break;
        }
        let Some(units) = units else {
            return Err(Error::Parse {
                line: header_line.max(1),
                msg: "missing `# units: <Hz,W_per_Hz | GHz,dBm_per_Hz>` header".into(),
            });
        };

        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let (mut freq, mut psd) = (Vec::new(), Vec::new());
        let mut last_line = 0;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse {
                line: e.position().map(|p| p.line() as usize).unwrap_or(0),
                msg: e.to_string(),
            })?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            last_line = line;
            if rec.iter().all(str::is_empty) {
                continue;
            }
            if rec.len() != 2 {
                return Err(Error::Parse { line, msg: format!("expected 2 columns, found {}", rec.len()) });
            }
            let num = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("`{s}` is not a number") })
            };
            let (f, p) = (num(&rec[0])?, num(&rec[1])?);
            let (f, p) = match units {
                PsdUnits::HzWattsPerHz => (f, p),
                PsdUnits::GHzDbmPerHz => (f * 1e9, dbm_to_watts(p)),
            };
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::Parse { line, msg: format!("negative or non-finite psd {p}") });
            }
            if let Some(&prev) = freq.last() {
                if !(T::c(f) > prev) {
                    return Err(Error::Parse { line, msg: "frequency grid is not strictly increasing".into() });
                }
            }
            freq.push(T::c(f));
            psd.push(T::c(p));
        }
        if freq.len() < 2 {
            return Err(Error::Parse { line: last_line.max(header_line), msg: "need at least two samples".into() });
        }
        Self::from_samples(freq, psd)
    }

    /// Loads a PSD file, optionally rescaling it to `total_power` (W).
    pub fn load(path: impl AsRef<Path>, total_power: Option<T>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let s = Self::read_csv(file)?;
        Ok(match total_power {
            Some(p) => s.with_power(p),
            None => s,
        })
    }

    /// Writes the samples in (Hz, W/Hz) with the units header.
    pub fn write_csv(&self, mut w: impl std::io::Write) -> Result<()> {
        writeln!(w, "# units: {}", PsdUnits::HzWattsPerHz.tag())?;
        for (f, p) in self.samples() {
            writeln!(w, "{},{}", f.to_f64_lossy(), p.to_f64_lossy())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rect_level_and_power() {
        let p = dbm_to_watts(6.0_f64);
        let s = NoiseSpectrum::rect(19.7e9, 1e9, p).unwrap();
        assert!((s.psd(19.7e9) - 3.981e-12).abs() < 1e-15);
        assert!((s.integrated_power() - p).abs() <= 1e-12 * p);
        assert_eq!(s.psd(19.1e9), 0.0);
        assert_eq!(s.psd(20.3e9), 0.0);
    }

    #[test]
    fn zero_power_rect_is_zero() {
        let s = NoiseSpectrum::<f64>::rect(19.7e9, 1e9, 0.0).unwrap();
        assert!(s.is_zero());
        assert!(NoiseSpectrum::<f64>::rect(19.7e9, 0.0, 1.0).is_err());
    }

    #[test]
    fn csv_in_watts() {
        let text = "# units: Hz,W_per_Hz\n# measured\n1e9,1e-12\n2e9,3e-12\n";
        let s = NoiseSpectrum::<f64>::read_csv(text.as_bytes()).unwrap();
        assert!((s.integrated_power() - 2e-3).abs() < 1e-18);
        assert!((s.psd(1.5e9) - 2e-12).abs() < 1e-24);
    }

    #[test]
    fn csv_in_dbm_per_hz() {
        let text = "# units: GHz,dBm_per_Hz\n1.0,0\n2.0,0\n";
        let s = NoiseSpectrum::<f64>::read_csv(text.as_bytes()).unwrap();
        assert_eq!(s.psd(1.5e9), 1e-3);
        assert!((s.integrated_power() - 1e6).abs() < 1e-6);
    }

    #[test]
    fn rescale_to_filter1_power() {
        let text = "# units: Hz,W_per_Hz\n20.2e9,1e-12\n20.7e9,2e-12\n21.2e9,1e-12\n";
        let s = NoiseSpectrum::<f64>::read_csv(text.as_bytes()).unwrap().with_power(dbm_to_watts(5.4));
        assert!((s.integrated_power() - 3.467e-3).abs() / 3.467e-3 < 1e-3);
        let direct: f64 = s.samples().collect::<Vec<_>>().windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum();
        assert!((direct - dbm_to_watts(5.4)).abs() / direct < 1e-9);
    }

    #[test]
    fn csv_errors_have_lines() {
        let cases = [
            ("1e9,1\n2e9,1\n", 1),
            ("# units: Hz,W_per_Hz\n1e9,1\n1e9,1\n", 3),
            ("# units: Hz,W_per_Hz\n1e9,1\n2e9,-1\n", 3),
            ("# units: furlongs\n1,1\n", 1),
            ("# units: Hz,W_per_Hz\n\n1e9,1\n2e9,x\n", 4),
        ];
        for (text, want) in cases {
            match NoiseSpectrum::<f64>::read_csv(text.as_bytes()) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn combine_rejects_overlap() {
        let a = NoiseSpectrum::rect(18.7e9, 1e9, 1e-3).unwrap();
        let b = NoiseSpectrum::rect(20.7e9, 1e9, 1e-3).unwrap();
        let ab: NoiseSpectrum<f64> = NoiseSpectrum::combine([a.clone(), b]).unwrap();
        assert!((ab.integrated_power() - 2e-3).abs() < 1e-15);
        assert_eq!(ab.psd(19.7e9), 0.0);
        assert!(NoiseSpectrum::combine([a.clone(), a]).is_err());
    }
}
