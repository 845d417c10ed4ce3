//! Scenario sweeps and their on-disk artifacts.
//!
//! A run evaluates one spectrum for every (noise condition, CW power) pair.
//! The noise conditions are "none" followed by each configured attenuation;
//! CW power 0 is always included so Ω_RF = 0 offsets can be read off.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::analysis::{csnr, CsnrPoint};
use crate::config::{hex_digest, ScenarioConfig};
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::spectroscopy::TransmissionSpectrum;

/// Outcome of the peak analysis of one spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakStatus {
    Ok,
    /// Only one peak, so no splitting (expected at Ω_RF = 0).
    NoSplitting,
    /// No peak above threshold.
    Suppressed,
}

impl PeakStatus {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::NoSplitting => "no_splitting",
            Self::Suppressed => "suppressed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BundleEntry {
    /// `None` is the noise-free reference.
    pub attenuation: Option<f64>,
    pub cw_power: f64,
    pub spectrum: TransmissionSpectrum<f64>,
    /// Tallest-peak position, Hz.
    pub offset: Option<f64>,
    /// Dominant-pair separation, Hz.
    pub splitting: Option<f64>,
    /// Field inferred from `splitting`, V/m.
    pub inferred: Option<f64>,
    pub status: PeakStatus,
}

impl BundleEntry {
    pub fn file_name(&self) -> String {
        format!("spectra/{}_cw{}W.csv", condition_tag(self.attenuation), self.cw_power)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Bundle {
    pub descriptor: String,
    pub distance: f64,
    pub enhancement: f64,
    pub waterfall_offset: f64,
    /// Ordered by condition, then by CW power.
    pub entries: Vec<BundleEntry>,
    pub noise_powers: Vec<(f64, f64)>,
    pub efields: Vec<(f64, f64)>,
}

fn condition_tag(att: Option<f64>) -> String {
    match att {
        None => "noise-none".to_string(),
        Some(a) => format!("atten{a}dB"),
    }
}

impl Bundle {
    pub fn conditions(&self) -> Vec<Option<f64>> {
        let mut out: Vec<Option<f64>> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.attenuation) {
                out.push(e.attenuation);
            }
        }
        out
    }

    pub fn entry(&self, attenuation: Option<f64>, cw_power: f64) -> Option<&BundleEntry> {
        self.entries.iter().find(|e| e.attenuation == attenuation && e.cw_power == cw_power)
    }

    /// Ω_RF = 0 offsets per condition.
    pub fn offsets(&self) -> Vec<(Option<f64>, Option<f64>, PeakStatus)> {
        self.entries
            .iter()
            .filter(|e| e.cw_power == 0.0)
            .map(|e| (e.attenuation, e.offset, if e.offset.is_some() { PeakStatus::Ok } else { PeakStatus::Suppressed }))
            .collect()
    }

    /// CSNR points for every noisy entry with CW power > 0.
    pub fn csnr_points(&self) -> Vec<CsnrPoint<f64>> {
        let mut out = Vec::new();
        for e in self.entries.iter().filter(|e| e.cw_power > 0.0) {
            let Some(att) = e.attenuation else { continue };
            let noise_power = self.noise_powers.iter().find(|(a, _)| *a == att).map_or(0.0, |(_, p)| *p);
            if !(noise_power > 0.0) {
                continue;
            }
            let clean = self.entry(None, e.cw_power).and_then(|c| c.inferred);
            out.push(CsnrPoint {
                cw_power: e.cw_power,
                attenuation: att,
                noise_power,
                csnr: csnr(e.cw_power, noise_power),
                clean,
                noisy: e.inferred,
            });
        }
        out
    }

    pub fn suppressed(&self) -> usize {
        self.entries.iter().filter(|e| e.status == PeakStatus::Suppressed).count()
    }
}

fn sorted_powers(cfg: &ScenarioConfig) -> Vec<f64> {
    let mut p = cfg.drives.cw_powers_w.clone();
    if !p.contains(&0.0) {
        p.push(0.0);
    }
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    p.dedup();
    p
}

fn analyse(scenario: &Scenario<f64>, spectrum: &TransmissionSpectrum<f64>) -> Result<(Option<f64>, Option<f64>, Option<f64>, PeakStatus)> {
    let peaks = scenario.peaks(spectrum)?;
    let offset = peaks.tallest().map(|p| p.position);
    Ok(match peaks.dominant_pair() {
        Some((a, b)) => {
            let split = (b.position - a.position).abs();
            let e = crate::analysis::infer_efield(split, scenario.rf_dipole, scenario.d_factor());
            (offset, Some(split), Some(e), PeakStatus::Ok)
        }
        None if peaks.is_empty() => (None, None, None, PeakStatus::Suppressed),
        None => (offset, None, None, PeakStatus::NoSplitting),
    })
}

/// Evaluates every spectrum of the sweep. `threads = 0` uses the global pool.
pub fn compute_bundle(cfg: &ScenarioConfig, threads: usize) -> Result<Bundle> {
    let scenario = cfg.scenario::<f64>()?;
    let work = || -> Result<Bundle> {
        let mut conditions = vec![None];
        conditions.extend(cfg.noise.attenuations_db.iter().map(|a| Some(*a)));
        let powers = sorted_powers(cfg);
        let mut bundle = Bundle {
            descriptor: cfg.noise.descriptor.clone(),
            distance: cfg.geometry.distance_m,
            enhancement: cfg.geometry.enhancement,
            waterfall_offset: cfg.run.waterfall_offset,
            noise_powers: cfg.noise.attenuations_db.iter().map(|a| (*a, scenario.noise_power(*a))).collect(),
            efields: powers.iter().map(|p| (*p, scenario.efield(*p))).collect(),
            entries: Vec::new(),
        };
        for att in conditions {
            let tag = condition_tag(att);
            let couplings = scenario.couplings(att).map_err(|e| e.at(tag.clone()))?;
            for &p in &powers {
                let at = |e: Error| e.at(format!("{tag}, cw {p} W"));
                let mut spectrum = scenario.spectrum_with(p, &couplings).map_err(at)?;
                spectrum.push_meta("attenuation_dB", att.map_or_else(|| "none".to_string(), |a| a.to_string()));
                let (offset, splitting, inferred, status) = analyse(&scenario, &spectrum).map_err(at)?;
                bundle.entries.push(BundleEntry { attenuation: att, cw_power: p, spectrum, offset, splitting, inferred, status });
            }
        }
        Ok(bundle)
    };
    if threads == 0 {
        work()
    } else {
        thread_pool(threads)?.install(work)
    }
}

pub use rayon::ThreadPool;

/// A dedicated worker pool with `threads` threads.
pub fn thread_pool(threads: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| Error::param("threads", e.to_string()))
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn att_str(a: Option<f64>) -> String {
    a.map_or_else(|| "none".to_string(), |v| v.to_string())
}

/// `attenuation_dB,noise_power_W,offset_Hz,status`
pub fn offsets_csv(bundle: &Bundle) -> String {
    let mut out = String::from("attenuation_dB,noise_power_W,offset_Hz,status\n");
    for (a, off, status) in bundle.offsets() {
        let p = a.and_then(|a| bundle.noise_powers.iter().find(|(x, _)| *x == a)).map_or(0.0, |(_, p)| *p);
        writeln!(out, "{},{},{},{}", att_str(a), p, opt(off), status.name()).unwrap();
    }
    out
}

/// One row per spectrum with peak analysis and inferred field.
pub fn fields_csv(bundle: &Bundle) -> String {
    let mut out = String::from(
        "attenuation_dB,cw_power_W,farfield_V_per_m,offset_Hz,splitting_Hz,inferred_V_per_m,status\n",
    );
    for e in &bundle.entries {
        let far = bundle.efields.iter().find(|(p, _)| *p == e.cw_power).map_or(f64::NAN, |(_, f)| *f);
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            att_str(e.attenuation),
            e.cw_power,
            far,
            opt(e.offset),
            opt(e.splitting),
            opt(e.inferred),
            e.status.name()
        )
        .unwrap();
    }
    out
}

/// `attenuation_dB,cw_power_W,noise_power_W,csnr,clean_V_per_m,noisy_V_per_m,percent_difference`
pub fn csnr_csv(bundle: &Bundle) -> String {
    let mut out =
        String::from("attenuation_dB,cw_power_W,noise_power_W,csnr,clean_V_per_m,noisy_V_per_m,percent_difference\n");
    for c in bundle.csnr_points() {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.attenuation,
            c.cw_power,
            c.noise_power,
            c.csnr,
            opt(c.clean),
            opt(c.noisy),
            opt(c.percent_difference())
        )
        .unwrap();
    }
    out
}

/// Waterfall tables: per condition, one column per CW power, trace k
/// shifted up by k·offset. An empty bundle gives one header-only file.
pub fn waterfall_files(bundle: &Bundle) -> Vec<(String, String)> {
    let header = |att: Option<f64>, powers: &[f64]| {
        let mut h = String::new();
        writeln!(h, "# descriptor={}", bundle.descriptor).unwrap();
        writeln!(h, "# A_sw={}", bundle.enhancement).unwrap();
        writeln!(h, "# x_m={}", bundle.distance).unwrap();
        writeln!(h, "# attenuation_dB={}", att_str(att)).unwrap();
        writeln!(h, "# offset={}", bundle.waterfall_offset).unwrap();
        writeln!(h, "# column k (from 0) holds transmission + k*offset").unwrap();
        h.push_str("detuning_Hz");
        for p in powers {
            write!(h, ",cw_{p}W").unwrap();
        }
        h.push('\n');
        h
    };
    let conditions = bundle.conditions();
    if conditions.is_empty() {
        return vec![("waterfall.csv".to_string(), header(None, &[]))];
    }
    conditions
        .into_iter()
        .map(|att| {
            let traces: Vec<&BundleEntry> = bundle.entries.iter().filter(|e| e.attenuation == att).collect();
            let powers: Vec<f64> = traces.iter().map(|e| e.cw_power).collect();
            let mut text = header(att, &powers);
            let grid = traces[0].spectrum.detuning_hz();
            for (i, d) in grid.iter().enumerate() {
                write!(text, "{d}").unwrap();
                for (k, e) in traces.iter().enumerate() {
                    write!(text, ",{}", e.spectrum.transmission[i] + k as f64 * bundle.waterfall_offset).unwrap();
                }
                text.push('\n');
            }
            (format!("waterfall_{}.csv", condition_tag(att)), text)
        })
        .collect()
}

/// Writes the waterfall files into `dir` and returns their paths.
pub fn export_plotdata(bundle: &Bundle, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for (name, text) in waterfall_files(bundle) {
        let p = dir.join(name);
        std::fs::write(&p, text)?;
        out.push(p);
    }
    Ok(out)
}

/// Files written by a run and the manifest that describes them.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub bundle: Bundle,
    /// Relative path and SHA-256 of every output except the manifest.
    pub outputs: Vec<(String, String)>,
    /// SHA-256 over the sorted (path, hash) list.
    pub outputs_hash: String,
    pub manifest: PathBuf,
}

/// Runs the sweep and writes spectra, analysis tables, waterfall files and
/// `manifest.toml` into `out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: impl AsRef<Path>, threads: usize) -> Result<RunReport> {
    let start = Instant::now();
    let bundle = compute_bundle(cfg, threads)?;
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir.join("spectra"))?;
    let mut files: Vec<(String, String)> = Vec::new();
    for e in &bundle.entries {
        let mut buf = Vec::new();
        e.spectrum.write_csv(&mut buf)?;
        files.push((e.file_name(), String::from_utf8(buf).expect("CSV is UTF-8")));
    }
    files.push(("offsets.csv".into(), offsets_csv(&bundle)));
    files.push(("fields.csv".into(), fields_csv(&bundle)));
    files.push(("csnr.csv".into(), csnr_csv(&bundle)));
    files.extend(waterfall_files(&bundle).into_iter().map(|(n, t)| (format!("plot/{n}"), t)));
    std::fs::create_dir_all(dir.join("plot"))?;
    let mut outputs = Vec::new();
    for (name, text) in &files {
        std::fs::write(dir.join(name), text)?;
        outputs.push((name.clone(), hex_digest(text.as_bytes())));
    }
    outputs.sort();
    let listing: String = outputs.iter().map(|(n, h)| format!("{n} {h}\n")).collect();
    let outputs_hash = hex_digest(listing.as_bytes());
    let mut m = String::new();
    writeln!(m, "config_sha256 = \"{}\"", cfg.hash).unwrap();
    writeln!(m, "version = \"{}\"", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(m, "threads = {threads}").unwrap();
    writeln!(m, "wall_time_s = {}", start.elapsed().as_secs_f64()).unwrap();
    writeln!(m, "outputs_sha256 = \"{outputs_hash}\"").unwrap();
    writeln!(m, "suppressed_spectra = {}", bundle.suppressed()).unwrap();
    writeln!(m, "\n[outputs]").unwrap();
    for (n, h) in &outputs {
        writeln!(m, "\"{n}\" = \"{h}\"").unwrap();
    }
    let manifest = dir.join("manifest.toml");
    std::fs::write(&manifest, m)?;
    Ok(RunReport { bundle, outputs, outputs_hash, manifest })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fake_entry(att: Option<f64>, p: f64) -> BundleEntry {
        let spectrum = TransmissionSpectrum {
            axis: crate::spectroscopy::ScanAxis::Coupling,
            detuning: vec![-1.0, 0.0, 1.0],
            transmission: vec![0.5, 0.6, 0.5],
            metadata: Vec::new(),
        };
        BundleEntry {
            attenuation: att,
            cw_power: p,
            spectrum,
            offset: Some(0.0),
            splitting: None,
            inferred: None,
            status: PeakStatus::NoSplitting,
        }
    }

    #[test]
    fn empty_bundle_gives_header_only() {
        let b = Bundle { descriptor: "Filter 2".into(), distance: 0.342, enhancement: 1.73, ..Default::default() };
        let files = waterfall_files(&b);
        assert_eq!(files.len(), 1);
        let text = &files[0].1;
        assert!(text.contains("# A_sw=1.73\n") && text.contains("# x_m=0.342\n"));
        assert!(text.contains("# descriptor=Filter 2\n"));
        assert!(text.ends_with("detuning_Hz\n"));
    }

    #[test]
    fn waterfall_has_one_trace_per_power_with_equal_offsets() {
        let powers: Vec<f64> = (0..13).map(|k| 0.2e-3 * k as f64).collect();
        let b = Bundle {
            descriptor: "rect 18.2-19.2 GHz; 6.6 dBm".into(),
            distance: 0.342,
            enhancement: 1.73,
            waterfall_offset: 0.25,
            entries: powers.iter().map(|p| fake_entry(Some(-6.0), *p)).collect(),
            ..Default::default()
        };
        let files = waterfall_files(&b);
        assert_eq!(files.len(), 1);
        let (name, text) = &files[0];
        assert_eq!(name, "waterfall_atten-6dB.csv");
        assert!(text.contains("# descriptor=rect 18.2-19.2 GHz; 6.6 dBm\n"));
        assert!(text.contains("# offset=0.25\n"));
        let rows: Vec<Vec<f64>> = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("detuning"))
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 3);
        for r in rows {
            assert_eq!(r.len(), 14);
            for k in 2..14 {
                assert!(((r[k] - r[k - 1]) - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn csnr_points_pair_with_clean_reference() {
        let mut clean = fake_entry(None, 1e-3);
        clean.inferred = Some(5.0);
        let mut noisy = fake_entry(Some(0.0), 1e-3);
        noisy.inferred = Some(5.5);
        let b = Bundle { entries: vec![clean, noisy], noise_powers: vec![(0.0, 2e-3)], ..Default::default() };
        let pts = b.csnr_points();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].csnr - 0.5).abs() < 1e-15);
        assert!((pts[0].percent_difference().unwrap() - 10.0).abs() < 1e-9);
    }
}
