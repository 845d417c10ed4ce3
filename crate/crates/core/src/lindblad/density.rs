use std::ops::{Index, IndexMut};

use nalgebra::{Complex, Matrix6};

use crate::num::{Cplx, Real};

/// Number of basis states {|1⟩, |2⟩, |3⟩, |4⟩, |d⟩, |e⟩}.
pub const DIM: usize = 6;
pub const FICTIVE_D: usize = 4;
pub const FICTIVE_E: usize = 5;

/// 6×6 complex matrix in the level basis, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix<T> {
    data: [Cplx<T>; DIM * DIM],
}

impl<T: Real> Default for DensityMatrix<T> {
    fn default() -> Self {
        Self { data: [Cplx::new(T::zero(), T::zero()); DIM * DIM] }
    }
}

impl<T> Index<(usize, usize)> for DensityMatrix<T> {
    type Output = Cplx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cplx<T> {
        &self.data[i * DIM + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DensityMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cplx<T> {
        &mut self.data[i * DIM + j]
    }
}

impl<T: Real> DensityMatrix<T> {
    /// Projector onto basis state `k` (0-based).
    pub fn pure(k: usize) -> Self {
        let mut m = Self::default();
        m[(k, k)] = Cplx::new(T::one(), T::zero());
        m
    }

    pub fn from_vec(v: &[Cplx<T>]) -> Self {
        let mut m = Self::default();
        m.data.copy_from_slice(v);
        m
    }

    pub fn as_slice(&self) -> &[Cplx<T>] {
        &self.data
    }

    pub fn trace(&self) -> Cplx<T> {
        (0..DIM).map(|k| self[(k, k)]).fold(Cplx::new(T::zero(), T::zero()), |a, b| a + b)
    }

    /// Population of level `k`.
    pub fn population(&self, k: usize) -> T {
        self[(k, k)].re
    }

    /// max |ρ − ρ†|.
    pub fn hermiticity_error(&self) -> T {
        let mut worst = T::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Largest magnitude of any coherence that involves |d⟩ or |e⟩.
    pub fn fictive_coherence(&self) -> T {
        let mut worst = T::zero();
        for f in [FICTIVE_D, FICTIVE_E] {
            for k in 0..DIM {
                if k != f {
                    worst = worst.max(self[(f, k)].norm()).max(self[(k, f)].norm());
                }
            }
        }
        worst
    }

    /// Eigenvalues (ascending) of the Hermitian part, evaluated in f64.
    pub fn eigenvalues(&self) -> [f64; DIM] {
        let m = Matrix6::from_fn(|i, j| {
            let a = self[(i, j)];
            let b = self[(j, i)].conj();
            Complex::new(0.5 * (a.re + b.re).to_f64_lossy(), 0.5 * (a.im + b.im).to_f64_lossy())
        });
        let ev = m.symmetric_eigenvalues();
        let mut out = [0.0; DIM];
        out.copy_from_slice(ev.as_slice());
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).fold(T::zero(), |w, (a, b)| w.max((*a - *b).norm()))
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> DensityMatrix<U> {
        let mut out = DensityMatrix::<U>::default();
        for (o, x) in out.data.iter_mut().zip(&self.data) {
            *o = Cplx::new(U::c(x.re.to_f64_lossy()), U::c(x.im.to_f64_lossy()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_state_properties() {
        let r = DensityMatrix::<f64>::pure(1);
        assert_eq!(r.trace().re, 1.0);
        assert_eq!(r.hermiticity_error(), 0.0);
        let ev = r.eigenvalues();
        assert!((ev[5] - 1.0).abs() < 1e-14 && ev[0].abs() < 1e-14);
    }
}
