//! Adaptive Dormand-Prince 5(4) propagation of dρ/dt = L(ρ).

use crate::error::{Error, Result};
use crate::lindblad::{DensityMatrix, Liouvillian, DIM};
use crate::num::{Cplx, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Smallest step allowed, relative to the final time.
    pub min_step_fraction: T,
}

impl<T: Real> Default for EvolveOptions<T> {
    fn default() -> Self {
        Self { rel_tol: T::c(1e-11), abs_tol: T::c(1e-13), min_step_fraction: T::c(1e-14) }
    }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const N: usize = DIM * DIM;

/// ρ(t) from ρ(0) = `rho0`.
pub fn time_evolve<T: Real>(
    l: &Liouvillian<T>,
    rho0: &DensityMatrix<T>,
    t: T,
    opts: &EvolveOptions<T>,
) -> Result<DensityMatrix<T>> {
    let entries = l.sparse();
    if entries.is_empty() || t == T::zero() {
        return Ok(*rho0);
    }
    let zero = Cplx::new(T::zero(), T::zero());
    let deriv = |y: &[Cplx<T>; N], out: &mut [Cplx<T>; N]| {
        out.fill(zero);
        for &(r, c, v) in &entries {
            out[r] += v * y[c];
        }
    };
    let norm = entries.iter().fold(T::zero(), |m, e| m.max(e.2.norm()));
    let mut y = [zero; N];
    y.copy_from_slice(rho0.as_slice());
    let mut h = (T::c(0.1) / norm).min(t);
    let min_step = t * opts.min_step_fraction;
    let mut now = T::zero();
    let mut k = [[zero; N]; 7];
    let mut tmp = [zero; N];
    deriv(&y, &mut k[0]);
    while now < t {
        if now + h > t {
            h = t - now;
        }
        for s in 1..7 {
            for i in 0..N {
                let mut acc = y[i];
                for j in 0..s {
                    if A[s][j] != 0.0 {
                        acc += k[j][i] * T::c(A[s][j]) * h;
                    }
                }
                tmp[i] = acc;
            }
            deriv(&tmp, &mut k[s]);
        }
        // 5th-order solution is the last stage input (FSAL).
        let mut err = T::zero();
        for i in 0..N {
            let mut e = zero;
            for s in 0..7 {
                let w = B[s] - B4[s];
                if w != 0.0 {
                    e += k[s][i] * T::c(w) * h;
                }
            }
            let scale = opts.abs_tol + opts.rel_tol * y[i].norm().max(tmp[i].norm());
            err = err.max(e.norm() / scale);
        }
        if err <= T::one() {
            now += h;
            y = tmp;
            k[0] = k[6];
        }
        let factor = if err == T::zero() {
            T::c(5.0)
        } else {
            (T::c(0.9) * err.powf(T::c(-0.2))).max(T::c(0.2)).min(T::c(5.0))
        };
        h *= factor;
        if h < min_step && now < t {
            return Err(Error::IntegrationFailure { t: now.to_f64_lossy() });
        }
    }
    Ok(DensityMatrix::from_vec(&y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{build_liouvillian, DecayParameters, Hamiltonian};

    #[test]
    fn zero_liouvillian_is_identity() {
        let d = DecayParameters { gamma2: 0.0, gamma3: 0.0, gamma4: 0.0, ..DecayParameters::<f64>::default() };
        let l = build_liouvillian(&Hamiltonian::default(), &d).unwrap();
        let rho = DensityMatrix::pure(2);
        assert_eq!(time_evolve(&l, &rho, 1.0, &EvolveOptions::default()).unwrap(), rho);
    }

    #[test]
    fn exponential_decay_of_level_2() {
        let d = DecayParameters::<f64>::default();
        let l = build_liouvillian(&Hamiltonian::default(), &d).unwrap();
        for t in [1e-8, 5e-8, 2e-7] {
            let rho = time_evolve(&l, &DensityMatrix::pure(1), t, &EvolveOptions::default()).unwrap();
            assert!((rho.population(1) - (-d.gamma2 * t).exp()).abs() < 1e-6);
            assert!((rho.trace().re - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn tolerance_halving_changes_little() {
        use crate::lindblad::{build_hamiltonian, DriveParameters, Wavelengths};
        let tp = crate::constants::two_pi::<f64>();
        let dr = DriveParameters { omega_p: tp * 3e6, omega_c: tp * 5e6, delta_c: tp * 1e6, ..Default::default() };
        let h = build_hamiltonian(&dr, (0.0, 0.0), 0.0, &Wavelengths::default());
        let l = build_liouvillian(&h, &DecayParameters::default()).unwrap();
        let tol = 1e-8;
        let o1 = EvolveOptions { rel_tol: tol, abs_tol: tol * 1e-2, ..Default::default() };
        let o2 = EvolveOptions { rel_tol: tol / 2.0, abs_tol: tol * 0.5e-2, ..Default::default() };
        let a = time_evolve(&l, &DensityMatrix::pure(0), 1e-6, &o1).unwrap();
        let b = time_evolve(&l, &DensityMatrix::pure(0), 1e-6, &o2).unwrap();
        assert!(a.max_abs_diff(&b) < 10.0 * tol);
    }
}
