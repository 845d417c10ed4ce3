//! Alkali Rydberg structure: level energies, transition frequencies, dipole
//! matrix elements and the dipole-allowed perturbers of a level.

pub mod angular;
mod defects;
pub mod radial;
mod state;

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::RwLock;

pub use angular::Polarization;
pub use defects::{DefectSeries, QuantumDefectTable};
pub use radial::RadialOptions;
pub use state::RydbergState;

use crate::error::{Error, Result};
use crate::num::Real;

/// Dipole matrix element split into radial and angular parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleMatrixElement<T> {
    /// Radial integral in a₀.
    pub radial: T,
    /// Net angular factor (dimensionless).
    pub angular: T,
    /// radial × angular, in e·a₀.
    pub total: T,
}

impl<T: Real> DipoleMatrixElement<T> {
    pub fn new(radial: T, angular: T) -> Self {
        Self { radial, angular, total: radial * angular }
    }
}

/// A dipole-allowed level coupled to the state of interest.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturber<T> {
    pub state: RydbergState,
    /// ν_fi = (E_f − E_i)/h in Hz, sign preserved.
    pub frequency: T,
    pub dipole: DipoleMatrixElement<T>,
}

/// Radial elements keyed by the unordered pair of levels.
#[derive(Debug, Default)]
struct RadialCache<T> {
    map: RwLock<HashMap<(RydbergState, RydbergState), T>>,
}

/// An alkali species: quantum defects, radial solver settings, RF polarization.
///
/// Cloning shares the (idempotent) radial-element cache.
#[derive(Debug, Clone)]
pub struct Atom<T> {
    defects: Arc<QuantumDefectTable<T>>,
    radial: RadialOptions<T>,
    polarization: Polarization,
    cache: Option<Arc<RadialCache<T>>>,
}

fn check_dipole_allowed(i: &RydbergState, f: &RydbergState) -> Result<()> {
    let forbidden = |reason| Error::SelectionRule { from: i.to_string(), to: f.to_string(), reason };
    if i.l().abs_diff(f.l()) != 1 {
        return Err(forbidden("requires Δl = ±1"));
    }
    if i.j2().abs_diff(f.j2()) > 2 {
        return Err(forbidden("requires Δj ∈ {0, ±1}"));
    }
    Ok(())
}

impl<T: Real> Atom<T> {
    /// Builds an atom with the table's core radius as inner cutoff and the
    /// default Numerov step; matrix-element caching is on.
    pub fn new(defects: QuantumDefectTable<T>) -> Self {
        let radial = RadialOptions { core_radius: defects.core_radius_a0(), ..RadialOptions::default() };
        Self {
            defects: Arc::new(defects),
            radial,
            polarization: Polarization::PI,
            cache: Some(Arc::default()),
        }
    }

    pub fn rubidium85() -> Self {
        Self::new(QuantumDefectTable::rubidium85())
    }

    pub fn with_radial_options(mut self, radial: RadialOptions<T>) -> Self {
        self.radial = radial;
        if self.cache.is_some() {
            self.cache = Some(Arc::default());
        }
        self
    }

    pub fn with_polarization(mut self, polarization: Polarization) -> Self {
        self.polarization = polarization;
        self
    }

    pub fn with_cache(mut self, enabled: bool) -> Self {
        self.cache = enabled.then(Arc::default);
        self
    }

    pub fn defects(&self) -> &QuantumDefectTable<T> {
        &self.defects
    }

    pub fn polarization(&self) -> &Polarization {
        &self.polarization
    }

    pub fn radial_options(&self) -> &RadialOptions<T> {
        &self.radial
    }

    /// Level energy in Hz relative to the ionization limit.
    pub fn level_energy(&self, state: &RydbergState) -> Result<T> {
        self.defects.level_energy(state)
    }

    /// ν_fi = (E_f − E_i)/h in Hz.
    pub fn transition_frequency(&self, i: &RydbergState, f: &RydbergState) -> Result<T> {
        if i.level() == f.level() {
            return Ok(T::zero());
        }
        Ok(self.level_energy(f)? - self.level_energy(i)?)
    }

    /// |⟨f| r |i⟩| in a₀ (symmetric in its arguments).
    pub fn radial_matrix_element(&self, i: &RydbergState, f: &RydbergState) -> Result<T> {
        if i.l().abs_diff(f.l()) != 1 {
            return Err(Error::SelectionRule {
                from: i.to_string(),
                to: f.to_string(),
                reason: "requires Δl = ±1",
            });
        }
        let (a, b) = if i.level() <= f.level() { (i.level(), f.level()) } else { (f.level(), i.level()) };
        if let Some(cache) = &self.cache {
            if let Some(v) = cache.map.read().get(&(a, b)) {
                return Ok(*v);
            }
        }
        let na = self.defects.effective_n(&a)?;
        let nb = self.defects.effective_n(&b)?;
        let value = radial::radial_integral(na, a.l(), nb, b.l(), &self.radial);
        if let Some(cache) = &self.cache {
            cache.map.write().entry((a, b)).or_insert(value);
        }
        Ok(value)
    }

    /// Dipole element |n̂·⟨f|r̂|i⟩| (e·a₀) for the atom's RF polarization.
    pub fn dipole_moment(&self, i: &RydbergState, f: &RydbergState) -> Result<DipoleMatrixElement<T>> {
        check_dipole_allowed(i, f)?;
        let radial = self.radial_matrix_element(i, f)?;
        let angular = angular::angular_factor(
            i.l(),
            i.j2(),
            i.mj2(),
            f.l(),
            f.j2(),
            f.mj2(),
            &self.polarization,
        );
        Ok(DipoleMatrixElement::new(radial, T::c(angular)))
    }

    /// All dipole-allowed levels with n' ∈ [n − window, n + window], minus
    /// `exclude`, sorted by |ν_fi|.
    pub fn enumerate_perturbers(
        &self,
        state: &RydbergState,
        n_window: u32,
        exclude: &[RydbergState],
    ) -> Result<Vec<Perturber<T>>> {
        let mut out = Vec::new();
        let lo = state.n().saturating_sub(n_window).max(1);
        let hi = state.n() + n_window;
        let l = state.l();
        let candidates_l = [l.checked_sub(1), Some(l + 1)];
        for lp in candidates_l.into_iter().flatten() {
            for jp2 in [2 * lp + 1, (2 * lp).wrapping_sub(1)] {
                if lp == 0 && jp2 != 1 {
                    continue;
                }
                if state.j2().abs_diff(jp2) > 2 || !self.defects.has_series(lp, jp2) {
                    continue;
                }
                let min_n = self.defects.series(lp, jp2)?.min_n;
                for np in lo.max(min_n).max(lp + 1)..=hi {
                    let f = RydbergState::new(np, lp, jp2)?;
                    if exclude.iter().any(|e| e.level() == f) || f == state.level() {
                        continue;
                    }
                    let dipole = self.dipole_moment(state, &f)?;
                    if dipole.total == T::zero() {
                        continue;
                    }
                    let frequency = self.transition_frequency(state, &f)?;
                    out.push(Perturber { state: f, frequency, dipole });
                }
            }
        }
        out.sort_by(|a, b| {
            a.frequency
                .abs()
                .partial_cmp(&b.frequency.abs())
                .unwrap()
                .then_with(|| a.state.cmp(&b.state))
        });
        Ok(out)
    }
}
