//! Six-level master equation: ladder |1⟩→|2⟩→|3⟩→|4⟩ plus the fictive
//! levels |d⟩ and |e⟩ that collect noise-driven population.

mod density;
mod evolve;
mod linalg;

pub use density::{DensityMatrix, DIM, FICTIVE_D, FICTIVE_E};
pub use evolve::{time_evolve, EvolveOptions};

use crate::constants::two_pi;
use crate::error::{Error, Result};
use crate::noise::NoiseCouplings;
use crate::num::{Cplx, Real};

/// Coherent drives, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DriveParameters<T> {
    pub omega_p: T,
    pub omega_c: T,
    pub omega_rf: T,
    pub delta_p: T,
    pub delta_c: T,
    pub delta_rf: T,
}

/// Incoherent processes. Rates in 1/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayParameters<T> {
    pub gamma2: T,
    pub gamma3: T,
    pub gamma4: T,
    /// Level (0-based) that |3⟩ decays into.
    pub branch3: usize,
    /// Level (0-based) that |4⟩ decays into.
    pub branch4: usize,
    /// Extra dephasing of every coherence of |3⟩ and |4⟩.
    pub gamma_extra: T,
    pub noise: NoiseCouplings<T>,
}

impl<T: Real> Default for DecayParameters<T> {
    fn default() -> Self {
        let tp = two_pi::<T>();
        Self {
            gamma2: tp * T::c(6.07e6),
            gamma3: tp * T::c(10e3),
            gamma4: tp * T::c(10e3),
            branch3: 1,
            branch4: 2,
            gamma_extra: T::zero(),
            noise: NoiseCouplings::default(),
        }
    }
}

impl<T: Real> DecayParameters<T> {
    pub fn validate(&self) -> Result<()> {
        let n = &self.noise;
        let rates = [
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
            ("gamma4", self.gamma4),
            ("gamma_extra", self.gamma_extra),
            ("r34", n.r34),
            ("rd3", n.rd3),
            ("re4", n.re4),
        ];
        for (name, r) in rates {
            if !(r >= T::zero()) || !r.is_finite() {
                return Err(Error::param(name, format!("rate must be finite and non-negative, got {r}")));
            }
        }
        if self.branch3 > 1 {
            return Err(Error::param("branch3", "|3⟩ must decay into |1⟩ or |2⟩"));
        }
        if self.branch4 > 2 {
            return Err(Error::param("branch4", "|4⟩ must decay into |1⟩, |2⟩ or |3⟩"));
        }
        Ok(())
    }
}

/// Probe and coupling wavelengths in m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavelengths<T> {
    pub probe: T,
    pub coupling: T,
}

impl<T: Real> Default for Wavelengths<T> {
    fn default() -> Self {
        Self { probe: T::c(780.24e-9), coupling: T::c(479.9285e-9) }
    }
}

/// Real symmetric rotating-frame Hamiltonian (rad/s, ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Hamiltonian<T>(pub [[T; DIM]; DIM]);

impl<T: Real> Hamiltonian<T> {
    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|x| *x == T::zero())
    }
}

/// Ladder Hamiltonian for an atom moving at `velocity` (m/s) along the probe
/// direction, with the coupling beam counter-propagating. `shifts` are
/// (ΔE₃/h, ΔE₄/h) in Hz.
pub fn build_hamiltonian<T: Real>(
    drives: &DriveParameters<T>,
    shifts: (T, T),
    velocity: T,
    wavelengths: &Wavelengths<T>,
) -> Hamiltonian<T> {
    let tp = two_pi::<T>();
    let half = T::c(0.5);
    let dp = drives.delta_p - tp * velocity / wavelengths.probe;
    let dc = drives.delta_c + tp * velocity / wavelengths.coupling;
    let mut h = [[T::zero(); DIM]; DIM];
    h[1][1] = -dp;
    h[2][2] = -(dp + dc) + tp * shifts.0;
    h[3][3] = -(dp + dc + drives.delta_rf) + tp * shifts.1;
    h[0][1] = drives.omega_p * half;
    h[1][2] = drives.omega_c * half;
    h[2][3] = drives.omega_rf * half;
    for i in 0..DIM {
        for j in 0..i {
            h[i][j] = h[j][i];
        }
    }
    Hamiltonian(h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Jump<T> {
    /// |to⟩⟨from| with the given rate.
    Transfer { from: usize, to: usize, rate: T },
    /// √(2γ)·|k⟩⟨k|: every coherence of level k decays at γ.
    Dephase { level: usize, rate: T },
}

/// Superoperator L with dρ/dt = L(ρ), acting on row-major vec(ρ).
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian<T> {
    h: Hamiltonian<T>,
    jumps: Vec<Jump<T>>,
}

const REDUCED: usize = 18;

/// Full index i·6+j → position among the 18 unknowns that can be nonzero.
const fn reduced_index(full: usize) -> Option<usize> {
    let (i, j) = (full / DIM, full % DIM);
    if i < 4 && j < 4 {
        Some(i * 4 + j)
    } else if i == j && i == FICTIVE_D {
        Some(16)
    } else if i == j && i == FICTIVE_E {
        Some(17)
    } else {
        None
    }
}

const fn full_index(red: usize) -> usize {
    match red {
        16 => FICTIVE_D * DIM + FICTIVE_D,
        17 => FICTIVE_E * DIM + FICTIVE_E,
        r => (r / 4) * DIM + r % 4,
    }
}

/// Builds L from the Hamiltonian and the decay channels.
pub fn build_liouvillian<T: Real>(h: &Hamiltonian<T>, decays: &DecayParameters<T>) -> Result<Liouvillian<T>> {
    decays.validate()?;
    let n = &decays.noise;
    let mut jumps = Vec::with_capacity(11);
    let mut push = |j: Jump<T>| {
        let rate = match j {
            Jump::Transfer { rate, .. } | Jump::Dephase { rate, .. } => rate,
        };
        if rate > T::zero() {
            jumps.push(j);
        }
    };
    push(Jump::Transfer { from: 1, to: 0, rate: decays.gamma2 });
    push(Jump::Transfer { from: 2, to: decays.branch3, rate: decays.gamma3 });
    push(Jump::Transfer { from: 3, to: decays.branch4, rate: decays.gamma4 });
    for (a, b, r) in [(2, FICTIVE_D, n.rd3), (3, FICTIVE_E, n.re4), (2, 3, n.r34)] {
        push(Jump::Transfer { from: a, to: b, rate: r });
        push(Jump::Transfer { from: b, to: a, rate: r });
    }
    push(Jump::Dephase { level: 2, rate: decays.gamma_extra });
    push(Jump::Dephase { level: 3, rate: decays.gamma_extra });
    Ok(Liouvillian { h: *h, jumps })
}

impl<T: Real> Liouvillian<T> {
    /// Calls `add(row, col, value)` for every contribution to L in the full
    /// 36-dimensional space (entries may repeat and must be accumulated).
    fn for_each_term(&self, mut add: impl FnMut(usize, usize, Cplx<T>)) {
        let h = &self.h.0;
        let idx = |i: usize, j: usize| i * DIM + j;
        let half = T::c(0.5);
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    if h[i][k] != T::zero() {
                        add(idx(i, j), idx(k, j), Cplx::new(T::zero(), -h[i][k]));
                    }
                    if h[k][j] != T::zero() {
                        add(idx(i, j), idx(i, k), Cplx::new(T::zero(), h[k][j]));
                    }
                }
            }
        }
        for jump in &self.jumps {
            match *jump {
                Jump::Transfer { from: b, to: a, rate } => {
                    add(idx(a, a), idx(b, b), Cplx::new(rate, T::zero()));
                    let d = Cplx::new(-rate * half, T::zero());
                    for x in 0..DIM {
                        add(idx(b, x), idx(b, x), d);
                        add(idx(x, b), idx(x, b), d);
                    }
                }
                Jump::Dephase { level: k, rate } => {
                    let d = Cplx::new(-rate, T::zero());
                    for x in (0..DIM).filter(|&x| x != k) {
                        add(idx(k, x), idx(k, x), d);
                        add(idx(x, k), idx(x, k), d);
                    }
                }
            }
        }
    }

    /// Dense 36×36 row-major matrix.
    pub fn matrix(&self) -> Vec<Cplx<T>> {
        let n = DIM * DIM;
        let mut m = vec![Cplx::new(T::zero(), T::zero()); n * n];
        self.for_each_term(|r, c, v| m[r * n + c] += v);
        m
    }

    /// Nonzero entries (row, col, value) of the dense matrix.
    pub fn sparse(&self) -> Vec<(usize, usize, Cplx<T>)> {
        let n = DIM * DIM;
        let m = self.matrix();
        (0..n * n)
            .filter(|&k| m[k] != Cplx::new(T::zero(), T::zero()))
            .map(|k| (k / n, k % n, m[k]))
            .collect()
    }

    fn reduced_matrix(&self) -> [Cplx<T>; REDUCED * REDUCED] {
        let mut m = [Cplx::new(T::zero(), T::zero()); REDUCED * REDUCED];
        self.for_each_term(|r, c, v| {
            if let (Some(r), Some(c)) = (reduced_index(r), reduced_index(c)) {
                m[r * REDUCED + c] += v;
            }
        });
        m
    }

    /// L(ρ).
    pub fn apply(&self, rho: &DensityMatrix<T>) -> DensityMatrix<T> {
        let mut out = [Cplx::new(T::zero(), T::zero()); DIM * DIM];
        let v = rho.as_slice();
        self.for_each_term(|r, c, x| out[r] += x * v[c]);
        DensityMatrix::from_vec(&out)
    }

    /// ‖L‖∞ of the dense matrix.
    pub fn norm(&self) -> T {
        linalg::inf_norm(&self.matrix(), DIM * DIM)
    }

    /// Steady state with unit trace. The population equation of |1⟩ is
    /// replaced by the trace condition; a fictive level with no exchange
    /// rate is pinned to zero population.
    pub fn steady_state(&self) -> Result<DensityMatrix<T>> {
        let m = self.reduced_matrix();
        let norm = linalg::inf_norm(&m, REDUCED);
        let zero = Cplx::new(T::zero(), T::zero());
        let mut a = m;
        let mut b = [zero; REDUCED];
        for c in 0..REDUCED {
            a[c] = zero;
        }
        // Trace row scaled to the size of L so the pivots are comparable.
        let scale = norm.max(T::one());
        let tr = Cplx::new(scale, T::zero());
        for k in 0..4 {
            a[k * 4 + k] = tr;
        }
        a[16] = tr;
        a[17] = tr;
        b[0] = tr;
        for f in [16, 17] {
            let row_empty = (0..REDUCED).all(|c| m[f * REDUCED + c] == zero);
            let col_empty = (0..REDUCED).all(|r| m[r * REDUCED + f] == zero);
            if row_empty && col_empty {
                a[f * REDUCED + f] = tr;
            }
        }
        let mut lu = a;
        let outcome = linalg::lu_solve(&mut lu, &mut b, REDUCED).ok_or(Error::AmbiguousSteadyState)?;
        if outcome.min_pivot < T::epsilon() * T::c(16.0) * scale {
            return Err(Error::AmbiguousSteadyState);
        }
        let mut rho = DensityMatrix::default();
        for (r, x) in b.iter().enumerate() {
            let f = full_index(r);
            rho[(f / DIM, f % DIM)] = *x;
        }
        let mut residual = T::zero();
        for r in 0..REDUCED {
            let s = (0..REDUCED).fold(zero, |s, c| s + m[r * REDUCED + c] * b[c]);
            residual = residual.max(s.norm());
        }
        let tolerance = T::solve_tolerance() * norm;
        if residual > tolerance {
            return Err(Error::SteadyStateResidual {
                residual: residual.to_f64_lossy(),
                tolerance: tolerance.to_f64_lossy(),
            });
        }
        Ok(rho)
    }
}

/// Steady state of L (see [`Liouvillian::steady_state`]).
pub fn steady_state<T: Real>(l: &Liouvillian<T>) -> Result<DensityMatrix<T>> {
    l.steady_state()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp() -> f64 {
        two_pi::<f64>()
    }

    fn eit_drives() -> DriveParameters<f64> {
        DriveParameters { omega_p: tp() * 0.1e6, omega_c: tp() * 5e6, ..Default::default() }
    }

    #[test]
    fn zero_drives_zero_hamiltonian() {
        let h = build_hamiltonian(&DriveParameters::<f64>::default(), (0.0, 0.0), 0.0, &Wavelengths::default());
        assert!(h.is_zero());
    }

    #[test]
    fn doppler_shifts_have_opposite_signs() {
        let wl = Wavelengths::default();
        let d = DriveParameters::<f64>::default();
        let h0 = build_hamiltonian(&d, (0.0, 0.0), 0.0, &wl);
        let h = build_hamiltonian(&d, (0.0, 0.0), 10.0, &wl);
        let probe = -(h.0[1][1] - h0.0[1][1]);
        let coupling = -(h.0[2][2] - h0.0[2][2]) - probe;
        assert!((probe + tp() * 10.0 / wl.probe).abs() < 1e-6);
        assert!((coupling - tp() * 10.0 / wl.coupling).abs() < 1e-6);
        assert!(h.0[4].iter().chain(h.0[5].iter()).all(|x| *x == 0.0));
    }

    #[test]
    fn ground_state_without_drive() {
        let h = Hamiltonian::<f64>::default();
        let l = build_liouvillian(&h, &DecayParameters::default()).unwrap();
        let rho = l.steady_state().unwrap();
        assert!(rho.max_abs_diff(&DensityMatrix::pure(0)) < 1e-14);
    }

    #[test]
    fn liouvillian_is_trace_preserving() {
        let mut d = DecayParameters::<f64>::default();
        d.noise = NoiseCouplings { r34: 1e5, rd3: 2e5, re4: 3e5, shift3: 1e6, shift4: -2e6 };
        d.gamma_extra = 1e5;
        let h = build_hamiltonian(&eit_drives(), (1e6, -2e6), 3.0, &Wavelengths::default());
        let m = build_liouvillian(&h, &d).unwrap().matrix();
        for col in 0..36 {
            let s: Cplx<f64> = (0..6).map(|k| m[(k * 7) * 36 + col]).sum();
            assert!(s.norm() < 1e-6, "column {col}: {s}");
        }
    }

    #[test]
    fn fictive_exchange_equalizes() {
        let d = DecayParameters {
            gamma2: 0.0,
            gamma3: 0.0,
            gamma4: 0.0,
            noise: NoiseCouplings { rd3: 1e5, ..Default::default() },
            ..Default::default()
        };
        let l = build_liouvillian(&Hamiltonian::default(), &d).unwrap();
        let mut rho = DensityMatrix::<f64>::pure(2);
        let opts = EvolveOptions::default();
        rho = time_evolve(&l, &rho, 2e-4, &opts).unwrap();
        assert!((rho.population(2) - rho.population(FICTIVE_D)).abs() < 1e-9);
        assert!((rho.population(2) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn zero_noise_leaves_fictive_levels_empty() {
        let h = build_hamiltonian(&eit_drives(), (0.0, 0.0), 0.0, &Wavelengths::default());
        let rho = build_liouvillian(&h, &DecayParameters::default()).unwrap().steady_state().unwrap();
        assert_eq!(rho.population(FICTIVE_D), 0.0);
        assert_eq!(rho.population(FICTIVE_E), 0.0);
        assert_eq!(rho.fictive_coherence(), 0.0);
    }

    #[test]
    fn eit_transparency_on_resonance() {
        let wl = Wavelengths::default();
        let solve = |omega_c: f64| {
            let d = DriveParameters { omega_c, ..eit_drives() };
            let h = build_hamiltonian(&d, (0.0, 0.0), 0.0, &wl);
            build_liouvillian(&h, &DecayParameters::default()).unwrap().steady_state().unwrap()[(0, 1)].im
        };
        let with = solve(tp() * 5e6).abs();
        let without = solve(0.0).abs();
        assert!(with < 0.1 * without, "{with} vs {without}");
    }

    #[test]
    fn negative_rate_rejected() {
        let d = DecayParameters { gamma3: -1.0, ..DecayParameters::<f64>::default() };
        assert!(build_liouvillian(&Hamiltonian::default(), &d).is_err());
    }

    #[test]
    fn runs_in_f32() {
        let h = build_hamiltonian(
            &DriveParameters { omega_p: 0.6f32, omega_c: 3.0, ..Default::default() },
            (0.0, 0.0),
            0.0,
            &Wavelengths::default(),
        );
        let d = DecayParameters {
            gamma2: 6.0f32,
            gamma3: 0.1,
            gamma4: 0.1,
            ..DecayParameters::default()
        };
        let rho = build_liouvillian(&h, &d).unwrap().steady_state().unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-5);
    }
}
