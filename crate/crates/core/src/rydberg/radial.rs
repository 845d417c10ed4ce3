//! Radial wavefunctions and matrix elements in the Coulomb approximation.
//!
//! The radial equation for u(r) = r R(r) in atomic units is integrated with
//! Numerov's method on the scaled coordinate x = √r, where the substitution
//! u = x^{1/2} X(x) turns it into
//!
//! X'' = [8x²(V(x²) − E) + (2l + 1/2)(2l + 3/2)/x²] X,
//!
//! with V = −1/r and E = −1/(2n*²) taken from the quantum defect. The
//! integration runs inward from twice the outer classical turning point and
//! stops at the core radius, or earlier if the solution starts growing
//! inside the inner turning point.

use crate::num::{CompensatedSum, Real};

/// Numerical settings of the radial solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOptions<T> {
    /// Step in x = √r (units √a₀).
    pub step: T,
    /// Inner cutoff radius in a₀ (zero means integrate to the first grid point).
    pub core_radius: T,
}

impl<T: Real> Default for RadialOptions<T> {
    fn default() -> Self {
        Self { step: T::c(0.01), core_radius: T::zero() }
    }
}

/// Normalized scaled wavefunction X on the lattice x_k = k·h, k ∈ [first, first + values.len()).
#[derive(Debug, Clone)]
pub struct RadialWavefunction<T> {
    step: T,
    first: usize,
    values: Vec<T>,
}

impl<T: Real> RadialWavefunction<T> {
    pub fn x(&self, k: usize) -> T {
        T::from_usize_lossy(k) * self.step
    }

    /// Grid range as lattice indices.
    pub fn range(&self) -> std::ops::Range<usize> {
        self.first..self.first + self.values.len()
    }

    fn at(&self, k: usize) -> T {
        if self.range().contains(&k) {
            self.values[k - self.first]
        } else {
            T::zero()
        }
    }

    /// u(r) = r R(r) at lattice node k.
    pub fn u(&self, k: usize) -> T {
        self.x(k).sqrt() * self.at(k)
    }

    /// ∫ u² dr, should be 1 after normalization.
    pub fn norm(&self) -> T {
        let two = T::c(2.0);
        let s: CompensatedSum<T> =
            self.range().map(|k| self.x(k).powi(2) * self.at(k).powi(2)).collect();
        two * self.step * s.value()
    }
}

/// Outer starting radius: twice the classical outer turning point, extended
/// by many decay lengths for low-lying states whose tails are long relative
/// to their turning point.
fn outer_radius<T: Real>(n_star: T, l: u32) -> T {
    let ll = T::from_u32(l * (l + 1)).unwrap();
    let n2 = n_star * n_star;
    let disc = (T::one() - ll / n2).max(T::zero());
    let turning = n2 * (T::one() + disc.sqrt());
    (T::c(2.0) * turning).max(turning + T::c(18.0) * n_star)
}

/// Integrates the scaled radial equation inward and normalizes the result.
pub fn wavefunction<T: Real>(n_star: T, l: u32, opts: &RadialOptions<T>) -> RadialWavefunction<T> {
    let h = opts.step;
    let r_out = outer_radius(n_star, l);
    let x_out = r_out.sqrt();
    let top = (x_out / h).ceil().to_usize().expect("finite grid") + 1;
    let x_in = opts.core_radius.max(T::zero()).sqrt();
    let bottom = ((x_in / h).ceil().to_usize().unwrap_or(1)).max(1);

    let energy_term = T::c(4.0) / (n_star * n_star);
    let centrifugal = (T::c(2.0 * l as f64) + T::c(0.5)) * (T::c(2.0 * l as f64) + T::c(1.5));
    let g = |k: usize| {
        let x = T::from_usize_lossy(k) * h;
        let x2 = x * x;
        energy_term * x2 - T::c(8.0) + centrifugal / x2
    };
    let h2_12 = h * h / T::c(12.0);

    // Inner classical turning point in x: smallest root of g(x) = 0.
    let a = energy_term;
    let disc = (T::c(64.0) - T::c(4.0) * a * centrifugal).max(T::zero());
    let x_itp = ((T::c(8.0) - disc.sqrt()) / (T::c(2.0) * a)).max(T::zero()).sqrt();

    let len = top - bottom + 1;
    let mut vals = vec![T::zero(); len];
    let tiny = T::c(1e-12);
    vals[len - 1] = tiny;
    vals[len - 2] = tiny * (T::one() + h * (g(top).max(T::zero())).sqrt());
    let rescale = T::c(1e30);
    let mut stop = 0usize;
    for idx in (0..len - 2).rev() {
        let k = bottom + idx;
        let y1 = vals[idx + 1];
        let y2 = vals[idx + 2];
        let next = (T::c(2.0) * y1 * (T::one() + T::c(5.0) * h2_12 * g(k + 1))
            - y2 * (T::one() - h2_12 * g(k + 2)))
            / (T::one() - h2_12 * g(k));
        let x = T::from_usize_lossy(k) * h;
        if x < x_itp && next.abs() > y1.abs() {
            stop = idx + 1;
            break;
        }
        vals[idx] = next;
        if next.abs() > rescale {
            let inv = T::one() / rescale;
            for v in &mut vals[idx..] {
                *v *= inv;
            }
        }
    }
    let values = vals.split_off(stop);
    let mut wf = RadialWavefunction { step: h, first: bottom + stop, values };
    let norm = wf.norm().sqrt();
    for v in &mut wf.values {
        *v /= norm;
    }
    wf
}

/// ⟨a| r |b⟩ in a₀ for two wavefunctions on the same lattice.
pub fn overlap_r<T: Real>(a: &RadialWavefunction<T>, b: &RadialWavefunction<T>) -> T {
    assert!(a.step == b.step, "wavefunctions must share a lattice");
    let lo = a.first.max(b.first);
    let hi = (a.first + a.values.len()).min(b.first + b.values.len());
    let s: CompensatedSum<T> = (lo..hi)
        .map(|k| {
            let x = a.x(k);
            x.powi(4) * a.at(k) * b.at(k)
        })
        .collect();
    T::c(2.0) * a.step * s.value()
}

/// |⟨n*₁ l₁| r |n*₂ l₂⟩| in a₀.
pub fn radial_integral<T: Real>(
    n_star_1: T,
    l1: u32,
    n_star_2: T,
    l2: u32,
    opts: &RadialOptions<T>,
) -> T {
    let a = wavefunction(n_star_1, l1, opts);
    let b = wavefunction(n_star_2, l2, opts);
    overlap_r(&a, &b).abs()
}
