use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::Path;

use crate::constants;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::rydberg::RydbergState;
use crate::textcfg::{self, Diagnostic, DiagnosticKind, Source, TableReader};

const RB85_TABLE: &str = include_str!("../../data/rb85_defects.toml");

/// Rydberg-Ritz coefficients of one (l, j) series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectSeries<T> {
    pub delta0: T,
    pub delta2: T,
    /// Lowest principal quantum number that exists in this series.
    pub min_n: u32,
}

/// Quantum-defect data for one alkali species. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumDefectTable<T> {
    species: String,
    rydberg_hz: T,
    core_radius_a0: T,
    series: BTreeMap<(u32, u32), DefectSeries<T>>,
}

impl<T: Real> QuantumDefectTable<T> {
    /// Shipped ⁸⁵Rb table (literature Rydberg-Ritz coefficients).
    pub fn rubidium85() -> Self {
        Self::parse(RB85_TABLE).expect("shipped defect table is valid")
    }

    /// Defect-free table with the given Rydberg constant, covering `l < max_l`.
    pub fn hydrogenic(rydberg_hz: T, max_l: u32) -> Self {
        let mut series = BTreeMap::new();
        for l in 0..max_l {
            let zero = DefectSeries { delta0: T::zero(), delta2: T::zero(), min_n: l + 1 };
            series.insert((l, 2 * l + 1), zero);
            if l > 0 {
                series.insert((l, 2 * l - 1), zero);
            }
        }
        Self { species: "H".into(), rydberg_hz, core_radius_a0: T::zero(), series }
    }

    pub fn from_series(
        species: impl Into<String>,
        rydberg_hz: T,
        core_radius_a0: T,
        series: impl IntoIterator<Item = ((u32, u32), DefectSeries<T>)>,
    ) -> Self {
        Self { species: species.into(), rydberg_hz, core_radius_a0, series: series.into_iter().collect() }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses the key/value table format (see `data/rb85_defects.toml`).
    pub fn parse(text: &str) -> Result<Self> {
        let first = |d: Vec<Diagnostic>| {
            let d = d.into_iter().next().expect("non-empty");
            Error::Parse { line: d.line, msg: format!("`{}`: {}", d.path, d.message) }
        };
        let doc = textcfg::parse_document(text).map_err(|d| first(vec![d]))?;
        let src = Source::new(text);
        let diags = RefCell::new(Vec::new());
        let mut table = None;
        {
            let root = TableReader::new(&src, "", &doc, &diags);
            let species = root.string("species").unwrap_or_else(|| "unknown".into());
            let ry = root.req_f64("rydberg_constant_Hz");
            let (core, _) = root.f64_or("core_radius_a0", 0.0);
            let mut series = BTreeMap::new();
            for s in root.tables("series") {
                let l = s.int("l");
                let j = s.req_f64("j");
                let d0 = s.req_f64("delta0");
                let (d2, _) = s.f64_or("delta2", 0.0);
                let min_n = s.int("min_n");
                if let (Some(l), Some(j), Some(d0)) = (l, j, d0) {
                    let j2 = (2.0 * j).round() as i64;
                    let valid_j = (j2 as f64 - 2.0 * j).abs() < 1e-9
                        && (j2 == 2 * l + 1 || (l > 0 && j2 == 2 * l - 1));
                    if l < 0 || !valid_j {
                        s.out_of_range("j", format!("j = {j} is not l ± 1/2 for l = {l}"));
                    } else {
                        let min_n = min_n.unwrap_or(l + 1).max(l + 1) as u32;
                        let entry = DefectSeries { delta0: T::c(d0), delta2: T::c(d2), min_n };
                        if series.insert((l as u32, j2 as u32), entry).is_some() {
                            s.push(DiagnosticKind::OutOfRange, "l", s.line(), "duplicate series");
                        }
                    }
                } else if l.is_none() {
                    s.missing("l");
                }
                s.finish();
            }
            if let Some(ry) = ry {
                if ry <= 0.0 {
                    root.out_of_range("rydberg_constant_Hz", "must be positive");
                }
                table = Some(Self {
                    species,
                    rydberg_hz: T::c(ry),
                    core_radius_a0: T::c(core),
                    series,
                });
            }
            root.finish();
        }
        let diags = diags.into_inner();
        if !diags.is_empty() {
            return Err(first(diags));
        }
        Ok(table.expect("no diagnostics implies a table"))
    }

    pub fn species(&self) -> &str {
        &self.species
    }

    pub fn rydberg_hz(&self) -> T {
        self.rydberg_hz
    }

    pub fn core_radius_a0(&self) -> T {
        self.core_radius_a0
    }

    pub fn series(&self, l: u32, j2: u32) -> Result<&DefectSeries<T>> {
        self.series
            .get(&(l, j2))
            .ok_or_else(|| Error::MissingSeries { l, j: format!("{j2}/2") })
    }

    pub fn has_series(&self, l: u32, j2: u32) -> bool {
        self.series.contains_key(&(l, j2))
    }

    /// δ(n) for the state's series.
    pub fn defect(&self, state: &RydbergState) -> Result<T> {
        let s = self.series(state.l(), state.j2())?;
        let n = T::from_u32(state.n()).expect("u32 representable");
        let m = n - s.delta0;
        Ok(s.delta0 + s.delta2 / (m * m))
    }

    /// Effective principal quantum number n* = n − δ(n).
    pub fn effective_n(&self, state: &RydbergState) -> Result<T> {
        let n = T::from_u32(state.n()).expect("u32 representable");
        Ok(n - self.defect(state)?)
    }

    /// Binding energy in Hz (negative): −Ry / n*².
    pub fn level_energy(&self, state: &RydbergState) -> Result<T> {
        let ns = self.effective_n(state)?;
        Ok(-self.rydberg_hz / (ns * ns))
    }
}

impl QuantumDefectTable<f64> {
    /// Mass-corrected Rydberg constant for ⁸⁵Rb, computed from CODATA values.
    pub fn rb85_rydberg_hz() -> f64 {
        constants::reduced_mass_rydberg_hz(constants::RB85_MASS_U)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_rydberg_constant_matches_mass_correction() {
        let t = QuantumDefectTable::<f64>::rubidium85();
        let expect = QuantumDefectTable::<f64>::rb85_rydberg_hz();
        assert!((t.rydberg_hz() - expect).abs() / expect < 1e-9);
    }

    #[test]
    fn hydrogen_ground_state_is_minus_rydberg() {
        let t = QuantumDefectTable::hydrogenic(3.2898419602508e15_f64, 3);
        let e = t.level_energy(&RydbergState::s_half(1).unwrap()).unwrap();
        assert_eq!(e, -3.2898419602508e15);
    }

    #[test]
    fn energies_increase_with_n() {
        let t = QuantumDefectTable::<f64>::rubidium85();
        for label in ["S1/2", "P1/2", "P3/2", "D3/2", "D5/2"] {
            let mut prev = f64::NEG_INFINITY;
            for n in 10..90 {
                let s: RydbergState = format!("{n}{label}").parse().unwrap();
                let e = t.level_energy(&s).unwrap();
                assert!(e > prev && e < 0.0);
                prev = e;
            }
        }
    }

    #[test]
    fn defects_positive_for_supported_n() {
        let t = QuantumDefectTable::<f64>::rubidium85();
        for ((l, j2), s) in &t.series {
            for n in s.min_n.max(5)..200 {
                let st = RydbergState::new(n, *l, *j2).unwrap();
                let d = t.defect(&st).unwrap();
                assert!(d.is_finite() && d > 0.0, "{st}: {d}");
            }
        }
    }

    #[test]
    fn missing_series_is_named() {
        let t = QuantumDefectTable::<f64>::rubidium85();
        let g = RydbergState::new(30, 4, 7).unwrap();
        let err = t.level_energy(&g).unwrap_err();
        assert!(err.to_string().contains("l=4"), "{err}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "rydberg_constant_Hz = 1e15\n[[series]]\nl = 1\nj = 2.5\ndelta0 = 1.0\n";
        match QuantumDefectTable::<f64>::parse(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let text = "rydberg_constant_Hz = 1e15\nbogus = 3\n";
        match QuantumDefectTable::<f64>::parse(text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("bogus"));
            }
            other => panic!("{other:?}"),
        }
    }
}
