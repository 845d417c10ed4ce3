//! Scenario configuration files.
//!
//! TOML with one table per block (`atom`, `drives`, `noise`, `geometry`,
//! `cell`, `run`). Physical quantities carry their unit in the key name
//! (`distance_m`, `rf_frequency_Hz`, `power_dBm`, ...); unknown keys are
//! rejected. Every resolved value remembers whether it came from the file or
//! from a default.

use std::cell::RefCell;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::constants::two_pi;
use crate::error::{Error, Result};
use crate::lindblad::{DecayParameters, DriveParameters, Wavelengths};
use crate::noise::{dbm_to_watts, AcShiftOptions, CouplingOptions, FieldGeometry, GainModel, IntensityConvention, NoiseSpectrum};
use crate::num::Real;
use crate::rydberg::{Atom, QuantumDefectTable, RydbergState};
use crate::scenario::Scenario;
use crate::spectroscopy::{detuning_grid, rabi_from_beam, Beam, CellParameters, ScanAxis, SystemConfig, VelocityGrid};
use crate::textcfg::{self, Source, TableReader};

pub use crate::textcfg::{Diagnostic, DiagnosticKind};

const BLOCKS: [&str; 6] = ["atom", "drives", "noise", "geometry", "cell", "run"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Default,
    User,
}

/// One resolved key: where it came from and its value as read.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub key: String,
    pub source: Provenance,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomBlock {
    pub lower_state: RydbergState,
    pub upper_state: RydbergState,
    /// Quantum-defect table; the shipped ⁸⁵Rb table when `None`.
    pub defects_file: Option<PathBuf>,
    pub probe_dipole_ea0: f64,
    pub coupling_dipole_ea0: f64,
    /// Overrides the computed |3⟩↔|4⟩ dipole.
    pub rf_dipole_ea0: Option<f64>,
    pub perturber_n_window: u32,
    pub matrix_cache: bool,
    /// Decay rates Γ/2π in Hz.
    pub gamma2_hz: f64,
    pub gamma3_hz: f64,
    pub gamma4_hz: f64,
    pub gamma_extra_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrivesBlock {
    pub rf_frequency_hz: f64,
    /// ν_RF − ν₃₄ used in the Hamiltonian.
    pub rf_detuning_hz: f64,
    pub cw_powers_w: Vec<f64>,
    pub probe_detuning_hz: f64,
    pub coupling_detuning_hz: f64,
    /// Ω/2π overrides of the beam-derived Rabi frequencies.
    pub probe_rabi_hz: Option<f64>,
    pub coupling_rabi_hz: Option<f64>,
    pub scan_axis: ScanAxis,
    pub scan_start_hz: f64,
    pub scan_stop_hz: f64,
    pub scan_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub center_hz: f64,
    pub bandwidth_hz: f64,
    pub power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSource {
    None,
    Bands(Vec<Band>),
    File { path: PathBuf, total_power_dbm: Option<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBlock {
    /// Free text, copied verbatim into outputs.
    pub descriptor: String,
    pub source: NoiseSource,
    pub attenuations_db: Vec<f64>,
    pub convention: IntensityConvention,
    pub pv_half_width_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryBlock {
    pub distance_m: f64,
    pub enhancement: f64,
    pub gain: GainModel<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunBlock {
    pub velocity: VelocityGrid<f64>,
    pub velocity_tolerance: Option<f64>,
    pub max_refinements: usize,
    pub prominence_fraction: f64,
    /// Vertical step between waterfall traces.
    pub waterfall_offset: f64,
    pub output_dir: PathBuf,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub atom: AtomBlock,
    pub drives: DrivesBlock,
    pub noise: NoiseBlock,
    pub geometry: GeometryBlock,
    pub cell: CellParameters<f64>,
    pub run: RunBlock,
    /// `(key path, source)` for every resolved key, in file order of blocks.
    pub provenance: Vec<Resolved>,
    /// SHA-256 of the file text, hex.
    pub hash: String,
    /// Directory relative paths are resolved against.
    pub base_dir: PathBuf,
}

/// Reads and validates a configuration file.
pub fn validate_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, Vec<Diagnostic>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        vec![Diagnostic {
            kind: DiagnosticKind::Io,
            path: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        }]
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    ScenarioConfig::parse(&text, base)
}

/// Wraps a reader and records provenance of everything read through it.
struct Block<'r, 'a, 'i> {
    r: &'r TableReader<'a, 'i>,
    name: &'static str,
    prov: &'r RefCell<Vec<Resolved>>,
}

impl Block<'_, '_, '_> {
    fn note(&self, key: &str, user: bool, value: impl fmt::Debug) {
        let source = if user { Provenance::User } else { Provenance::Default };
        let value = format!("{value:?}");
        let value = match value.strip_prefix("Some(").and_then(|v| v.strip_suffix(')')) {
            Some(inner) => inner.to_string(),
            None if value == "None" => "unset".to_string(),
            None => value,
        };
        self.prov.borrow_mut().push(Resolved { key: format!("{}.{key}", self.name), source, value });
    }

    fn num(&self, key: &str, default: f64) -> f64 {
        let (v, user) = self.r.f64_or(key, default);
        self.note(key, user, v);
        v
    }

    fn opt(&self, key: &str) -> Option<f64> {
        let v = self.r.f64(key);
        self.note(key, v.is_some(), v);
        v
    }

    fn req(&self, key: &str) -> f64 {
        let v = self.r.req_f64(key).unwrap_or(f64::NAN);
        self.note(key, true, v);
        v
    }

    fn array(&self, key: &str, default: &[f64]) -> Vec<f64> {
        let v = self.r.f64_array(key);
        let user = v.is_some();
        let v = v.unwrap_or_else(|| default.to_vec());
        self.note(key, user, &v);
        v
    }

    fn count(&self, key: &str, default: i64, lo: i64, hi: i64) -> usize {
        let v = self.r.int(key);
        let user = v.is_some();
        let v = v.unwrap_or(default);
        self.note(key, user, v);
        if !(lo..=hi).contains(&v) {
            self.r.out_of_range(key, format!("{v} is outside {lo}..={hi}"));
            return default as usize;
        }
        v as usize
    }

    fn text(&self, key: &str, default: &str) -> String {
        let v = self.r.string(key);
        let user = v.is_some();
        let v = v.unwrap_or_else(|| default.to_string());
        self.note(key, user, &v);
        v
    }

    fn flag(&self, key: &str, default: bool) -> bool {
        let v = self.r.boolean(key);
        let user = v.is_some();
        let v = v.unwrap_or(default);
        self.note(key, user, v);
        v
    }

    fn positive(&self, key: &str, v: f64) {
        if !(v > 0.0) && !v.is_nan() || v.is_infinite() {
            self.r.out_of_range(key, format!("{v} must be positive and finite"));
        }
    }

    fn non_negative(&self, key: &str, v: f64) {
        if !(v >= 0.0) && !v.is_nan() || v.is_infinite() {
            self.r.out_of_range(key, format!("{v} must be non-negative and finite"));
        }
    }

    fn state(&self, key: &str, default: &str) -> RydbergState {
        let s = self.text(key, default);
        s.parse().unwrap_or_else(|e| {
            self.r.out_of_range(key, format!("{e}"));
            default.parse().expect("default state label")
        })
    }
}

impl ScenarioConfig {
    /// Parses configuration text. Relative file paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, Vec<Diagnostic>> {
        let base_dir = base_dir.into();
        let doc = textcfg::parse_document(text).map_err(|d| vec![d])?;
        let src = Source::new(text);
        let diags = RefCell::new(Vec::new());
        let prov = RefCell::new(Vec::new());
        let empty = textcfg::parse_document("").expect("empty document parses");
        let cfg = {
            let root = TableReader::new(&src, "", &doc, &diags);
            let mut tables = Vec::new();
            for name in BLOCKS {
                match root.table(name) {
                    Some(t) => tables.push(t),
                    None => {
                        if !root.has(name) {
                            root.push(DiagnosticKind::MissingRequired, name, 0, "required block is missing");
                        }
                        // Parse an empty stand-in so per-key checks still run.
                        tables.push(TableReader::new(&src, name, &empty, &diags));
                    }
                }
            }
            let block = |i: usize| Block { r: &tables[i], name: BLOCKS[i], prov: &prov };
            let atom = parse_atom(&block(0), &base_dir);
            let drives = parse_drives(&block(1));
            let noise = parse_noise(&block(2), &base_dir);
            let geometry = parse_geometry(&block(3));
            let cell = parse_cell(&block(4));
            let run = parse_run(&block(5), &base_dir);
            for t in tables {
                t.finish();
            }
            root.finish();
            ScenarioConfig {
                atom,
                drives,
                noise,
                geometry,
                cell,
                run,
                provenance: Vec::new(),
                hash: hex_digest(text.as_bytes()),
                base_dir,
            }
        };
        let diags = diags.into_inner();
        if !diags.is_empty() {
            return Err(diags);
        }
        Ok(ScenarioConfig { provenance: prov.into_inner(), ..cfg })
    }

    pub fn provenance_of(&self, key: &str) -> Option<Provenance> {
        self.provenance.iter().find(|r| r.key == key).map(|r| r.source)
    }

    /// `key = value  # default|user` listing of the resolved configuration.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for r in &self.provenance {
            let tag = match r.source {
                Provenance::Default => "default",
                Provenance::User => "user",
            };
            writeln!(out, "{} = {}  # {tag}", r.key, r.value).unwrap();
        }
        out
    }

    /// Noise spectrum at the horn input (before attenuation).
    pub fn noise_spectrum<T: Real>(&self) -> Result<NoiseSpectrum<T>> {
        match &self.noise.source {
            NoiseSource::None => Ok(NoiseSpectrum::zero()),
            NoiseSource::Bands(bands) => NoiseSpectrum::combine(
                bands
                    .iter()
                    .map(|b| NoiseSpectrum::rect(T::c(b.center_hz), T::c(b.bandwidth_hz), dbm_to_watts(T::c(b.power_dbm))))
                    .collect::<Result<Vec<_>>>()?,
            ),
            NoiseSource::File { path, total_power_dbm } => {
                NoiseSpectrum::load(path, total_power_dbm.map(|p| dbm_to_watts(T::c(p))))
            }
        }
    }

    /// Builds the numerical scenario in precision `T`.
    pub fn scenario<T: Real>(&self) -> Result<Scenario<T>> {
        let a = &self.atom;
        let table = match &a.defects_file {
            Some(p) => QuantumDefectTable::<T>::load(p)?,
            None => QuantumDefectTable::rubidium85(),
        };
        let atom = Atom::new(table).with_cache(a.matrix_cache);
        let states = (a.lower_state, a.upper_state);
        let rf_dipole = match a.rf_dipole_ea0 {
            Some(d) => T::c(d),
            None => atom.dipole_moment(&states.0, &states.1)?.total.abs(),
        };
        let c = &self.cell;
        let cell = CellParameters::<T> {
            length: T::c(c.length),
            temperature: T::c(c.temperature),
            isotope_fraction: T::c(c.isotope_fraction),
            wavelengths: Wavelengths { probe: T::c(c.wavelengths.probe), coupling: T::c(c.wavelengths.coupling) },
            probe: Beam { power: T::c(c.probe.power), fwhm: T::c(c.probe.fwhm) },
            coupling: Beam { power: T::c(c.coupling.power), fwhm: T::c(c.coupling.fwhm) },
        };
        let tp = two_pi::<T>();
        let d = &self.drives;
        let drives = DriveParameters {
            omega_p: d.probe_rabi_hz.map_or_else(
                || rabi_from_beam(cell.probe.power, cell.probe.fwhm, T::c(a.probe_dipole_ea0)),
                |hz| tp * T::c(hz),
            ),
            omega_c: d.coupling_rabi_hz.map_or_else(
                || rabi_from_beam(cell.coupling.power, cell.coupling.fwhm, T::c(a.coupling_dipole_ea0)),
                |hz| tp * T::c(hz),
            ),
            omega_rf: T::zero(),
            delta_p: tp * T::c(d.probe_detuning_hz),
            delta_c: tp * T::c(d.coupling_detuning_hz),
            delta_rf: tp * T::c(d.rf_detuning_hz),
        };
        let decays = DecayParameters {
            gamma2: tp * T::c(a.gamma2_hz),
            gamma3: tp * T::c(a.gamma3_hz),
            gamma4: tp * T::c(a.gamma4_hz),
            gamma_extra: tp * T::c(a.gamma_extra_hz),
            ..DecayParameters::default()
        };
        let mut system = SystemConfig::new(drives, decays, cell, T::c(a.probe_dipole_ea0));
        let r = &self.run;
        system.velocity = match r.velocity {
            VelocityGrid::Uniform { classes, span } => VelocityGrid::Uniform { classes, span: T::c(span) },
            VelocityGrid::Resonant { order, span, width } => {
                VelocityGrid::Resonant { order, span: T::c(span), width: T::c(width) }
            }
            VelocityGrid::Single => VelocityGrid::Single,
        };
        system.velocity_tolerance = r.velocity_tolerance.map(T::c);
        system.max_refinements = r.max_refinements;
        system.validate()?;
        let g = &self.geometry;
        let geometry = FieldGeometry::new(T::c(g.distance_m), T::c(g.enhancement))?
            .with_gain(GainModel {
                ref_db: T::c(g.gain.ref_db),
                slope_db_per_ghz: T::c(g.gain.slope_db_per_ghz),
                ref_frequency_hz: T::c(g.gain.ref_frequency_hz),
            })
            .with_convention(self.noise.convention);
        let grid = detuning_grid(T::c(d.scan_start_hz), T::c(d.scan_stop_hz), d.scan_points);
        let mut s = Scenario::new(
            self.noise.descriptor.clone(),
            atom,
            states,
            T::c(d.rf_frequency_hz),
            rf_dipole,
            geometry,
            self.noise_spectrum()?,
            system,
            grid,
        )
        .with_axis(d.scan_axis);
        s.coupling_options = CouplingOptions {
            n_window: a.perturber_n_window,
            ac: AcShiftOptions { pv_half_width: T::c(self.noise.pv_half_width_hz), ..AcShiftOptions::default() },
        };
        s.prominence_fraction = T::c(r.prominence_fraction);
        Ok(s)
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(64);
    for b in Sha256::digest(bytes) {
        write!(out, "{b:02x}").unwrap();
    }
    out
}

fn resolve(base: &Path, p: String) -> PathBuf {
    let p = PathBuf::from(p);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

fn parse_atom(b: &Block, base: &Path) -> AtomBlock {
    let lower_state = b.state("lower_state", "57S1/2");
    let upper_state = b.state("upper_state", "57P1/2");
    let defects_file = b.r.string("defects_file").map(|p| resolve(base, p));
    b.note("defects_file", defects_file.is_some(), &defects_file);
    let out = AtomBlock {
        lower_state,
        upper_state,
        defects_file,
        probe_dipole_ea0: b.num("probe_dipole_ea0", 2.042),
        coupling_dipole_ea0: b.num("coupling_dipole_ea0", 0.00618),
        rf_dipole_ea0: b.opt("rf_dipole_ea0"),
        perturber_n_window: b.count("perturber_n_window", 10, 0, 40) as u32,
        matrix_cache: b.flag("matrix_cache", true),
        gamma2_hz: b.num("gamma2_Hz", 6.07e6),
        gamma3_hz: b.num("gamma3_Hz", 10e3),
        gamma4_hz: b.num("gamma4_Hz", 10e3),
        gamma_extra_hz: b.num("gamma_extra_Hz", 0.0),
    };
    b.positive("probe_dipole_ea0", out.probe_dipole_ea0);
    b.positive("coupling_dipole_ea0", out.coupling_dipole_ea0);
    if let Some(d) = out.rf_dipole_ea0 {
        b.positive("rf_dipole_ea0", d);
    }
    b.positive("gamma2_Hz", out.gamma2_hz);
    b.non_negative("gamma3_Hz", out.gamma3_hz);
    b.non_negative("gamma4_Hz", out.gamma4_hz);
    b.non_negative("gamma_extra_Hz", out.gamma_extra_hz);
    if lower_state.level() == upper_state.level() {
        b.r.out_of_range("upper_state", "must differ from lower_state");
    }
    out
}

fn parse_drives(b: &Block) -> DrivesBlock {
    let rf_frequency_hz = b.req("rf_frequency_Hz");
    let cw_powers_w = b.array("cw_powers_W", &[0.0]);
    for p in &cw_powers_w {
        b.non_negative("cw_powers_W", *p);
    }
    let axis = b.text("scan_axis", "coupling");
    let scan_axis = match axis.as_str() {
        "coupling" => ScanAxis::Coupling,
        "probe" => ScanAxis::Probe,
        other => {
            b.r.out_of_range("scan_axis", format!("`{other}` is not `coupling` or `probe`"));
            ScanAxis::Coupling
        }
    };
    let out = DrivesBlock {
        rf_frequency_hz,
        rf_detuning_hz: b.num("rf_detuning_Hz", 0.0),
        cw_powers_w,
        probe_detuning_hz: b.num("probe_detuning_Hz", 0.0),
        coupling_detuning_hz: b.num("coupling_detuning_Hz", 0.0),
        probe_rabi_hz: b.opt("probe_rabi_Hz"),
        coupling_rabi_hz: b.opt("coupling_rabi_Hz"),
        scan_axis,
        scan_start_hz: b.num("scan_start_Hz", -250e6),
        scan_stop_hz: b.num("scan_stop_Hz", 250e6),
        scan_points: b.count("scan_points", 201, 5, 100_000),
    };
    if b.r.has("rf_frequency_Hz") {
        b.positive("rf_frequency_Hz", out.rf_frequency_hz);
    }
    if let Some(x) = out.probe_rabi_hz {
        b.positive("probe_rabi_Hz", x);
    }
    if let Some(x) = out.coupling_rabi_hz {
        b.non_negative("coupling_rabi_Hz", x);
    }
    if !(out.scan_stop_hz > out.scan_start_hz) {
        b.r.out_of_range("scan_stop_Hz", "must exceed scan_start_Hz");
    }
    out
}

fn parse_noise(b: &Block, base: &Path) -> NoiseBlock {
    let descriptor = b.text("descriptor", "");
    let bands: Vec<Band> = b
        .r
        .tables("band")
        .into_iter()
        .map(|t| {
            let band = Band {
                center_hz: t.req_f64("center_Hz").unwrap_or(f64::NAN),
                bandwidth_hz: t.req_f64("bandwidth_Hz").unwrap_or(f64::NAN),
                power_dbm: t.req_f64("power_dBm").unwrap_or(f64::NAN),
            };
            if band.center_hz.is_finite() && band.bandwidth_hz.is_finite()
                && (!(band.bandwidth_hz > 0.0) || !(band.center_hz - band.bandwidth_hz / 2.0 > 0.0)) {
                    t.out_of_range("bandwidth_Hz", "band must have positive width and lie above 0 Hz");
                }
            t.finish();
            band
        })
        .collect();
    b.note("band", !bands.is_empty(), bands.len());
    let file = b.r.string("psd_file").map(|p| resolve(base, p));
    b.note("psd_file", file.is_some(), &file);
    let total = b.opt("total_power_dBm");
    let source = match (file, bands.is_empty()) {
        (Some(_), false) => {
            b.r.out_of_range("psd_file", "give either `psd_file` or `[[noise.band]]`, not both");
            NoiseSource::None
        }
        (Some(path), true) => {
            if let Err(e) = NoiseSpectrum::<f64>::load(&path, None) {
                b.r.push(
                    DiagnosticKind::Io,
                    "psd_file",
                    b.r.value_line("psd_file"),
                    format!("{}: {e}", path.display()),
                );
            }
            NoiseSource::File { path, total_power_dbm: total }
        }
        (None, false) => NoiseSource::Bands(bands),
        (None, true) => NoiseSource::None,
    };
    if total.is_some() && !matches!(source, NoiseSource::File { .. }) {
        b.r.out_of_range("total_power_dBm", "only applies to `psd_file`");
    }
    let conv = b.text("intensity_convention", IntensityConvention::Poynting.name());
    let convention = IntensityConvention::from_name(&conv).unwrap_or_else(|| {
        b.r.out_of_range("intensity_convention", format!("`{conv}` is not `poynting` or `field-squared`"));
        IntensityConvention::Poynting
    });
    let attenuations_db = b.array("attenuations_dB", &[0.0]);
    for a in &attenuations_db {
        if !a.is_finite() {
            b.r.out_of_range("attenuations_dB", "must be finite");
        }
    }
    let out = NoiseBlock {
        descriptor,
        source,
        attenuations_db,
        convention,
        pv_half_width_hz: b.num("pv_half_width_Hz", 1e6),
    };
    b.positive("pv_half_width_Hz", out.pv_half_width_hz);
    out
}

fn parse_geometry(b: &Block) -> GeometryBlock {
    let distance_m = b.req("distance_m");
    let enhancement = b.req("enhancement");
    let d = GainModel::<f64>::default();
    let out = GeometryBlock {
        distance_m,
        enhancement,
        gain: GainModel {
            ref_db: b.num("gain_ref_dB", d.ref_db),
            slope_db_per_ghz: b.num("gain_slope_dB_per_GHz", d.slope_db_per_ghz),
            ref_frequency_hz: b.num("gain_ref_frequency_Hz", d.ref_frequency_hz),
        },
    };
    if b.r.has("distance_m") {
        b.positive("distance_m", distance_m);
    }
    if b.r.has("enhancement") {
        b.positive("enhancement", enhancement);
    }
    out
}

fn parse_cell(b: &Block) -> CellParameters<f64> {
    let d = CellParameters::<f64>::default();
    let out = CellParameters {
        length: b.num("length_m", d.length),
        temperature: b.num("temperature_K", d.temperature),
        isotope_fraction: b.num("isotope_fraction", d.isotope_fraction),
        wavelengths: Wavelengths {
            probe: b.num("probe_wavelength_m", d.wavelengths.probe),
            coupling: b.num("coupling_wavelength_m", d.wavelengths.coupling),
        },
        probe: Beam { power: b.num("probe_power_W", d.probe.power), fwhm: b.num("probe_fwhm_m", d.probe.fwhm) },
        coupling: Beam {
            power: b.num("coupling_power_W", d.coupling.power),
            fwhm: b.num("coupling_fwhm_m", d.coupling.fwhm),
        },
    };
    for (k, v) in [
        ("length_m", out.length),
        ("probe_wavelength_m", out.wavelengths.probe),
        ("coupling_wavelength_m", out.wavelengths.coupling),
        ("probe_power_W", out.probe.power),
        ("probe_fwhm_m", out.probe.fwhm),
        ("coupling_power_W", out.coupling.power),
        ("coupling_fwhm_m", out.coupling.fwhm),
    ] {
        b.positive(k, v);
    }
    if !(out.temperature > 250.0 && out.temperature < 450.0) {
        b.r.out_of_range("temperature_K", "vapor-pressure model covers 250-450 K");
    }
    if !(out.isotope_fraction > 0.0 && out.isotope_fraction <= 1.0) {
        b.r.out_of_range("isotope_fraction", "must lie in (0, 1]");
    }
    out
}

fn parse_run(b: &Block, base: &Path) -> RunBlock {
    let kind = b.text("velocity_grid", "resonant");
    let span = b.num("velocity_span", 4.0);
    b.positive("velocity_span", span);
    let velocity = match kind.as_str() {
        "resonant" => {
            let order = b.count("velocity_order", 6, 1, 64);
            let width = b.num("velocity_width_mps", 1.0);
            b.positive("velocity_width_mps", width);
            VelocityGrid::Resonant { order, span, width }
        }
        "uniform" => VelocityGrid::Uniform { classes: b.count("velocity_classes", 201, 3, 1_000_000), span },
        "single" => VelocityGrid::Single,
        other => {
            b.r.out_of_range("velocity_grid", format!("`{other}` is not `resonant`, `uniform` or `single`"));
            VelocityGrid::Single
        }
    };
    let velocity_tolerance = b.opt("velocity_tolerance");
    if let Some(t) = velocity_tolerance {
        b.positive("velocity_tolerance", t);
    }
    let out = RunBlock {
        velocity,
        velocity_tolerance,
        max_refinements: b.count("max_refinements", 3, 0, 10),
        prominence_fraction: b.num("prominence_fraction", 0.05),
        waterfall_offset: b.num("waterfall_offset", 0.1),
        output_dir: resolve(base, b.text("output_dir", "out")),
        threads: b.count("threads", 0, 0, 4096),
    };
    if !(out.prominence_fraction > 0.0 && out.prominence_fraction < 1.0) {
        b.r.out_of_range("prominence_fraction", "must lie in (0, 1)");
    }
    b.non_negative("waterfall_offset", out.waterfall_offset);
    out
}

impl Error {
    /// Collapses configuration diagnostics into one error.
    pub fn from_diagnostics(diags: &[Diagnostic]) -> Self {
        let line = diags.first().map_or(0, |d| d.line);
        let msg = diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
        Error::Parse { line, msg }
    }
}
