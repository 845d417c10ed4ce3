use crate::num::{Cplx, Real};

/// Result of an in-place LU solve.
pub(crate) struct LuOutcome<T> {
    /// Smallest pivot magnitude met during elimination.
    pub min_pivot: T,
}

/// Solves `a x = b` in place (`a` is n×n row-major, overwritten; `b` becomes
/// `x`). Gaussian elimination with partial pivoting. Returns `None` when a
/// pivot is exactly zero.
pub(crate) fn lu_solve<T: Real>(a: &mut [Cplx<T>], b: &mut [Cplx<T>], n: usize) -> Option<LuOutcome<T>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let mut min_pivot = T::infinity();
    for col in 0..n {
        let (mut best, mut best_abs) = (col, T::zero());
        for r in col..n {
            let v = a[r * n + col].re.abs() + a[r * n + col].im.abs();
            if v > best_abs {
                best = r;
                best_abs = v;
            }
        }
        if best_abs == T::zero() {
            return None;
        }
        if best != col {
            for c in 0..n {
                a.swap(col * n + c, best * n + c);
            }
            b.swap(col, best);
        }
        let pivot = a[col * n + col];
        min_pivot = min_pivot.min(pivot.norm());
        let inv = pivot.inv();
        for r in col + 1..n {
            let f = a[r * n + col] * inv;
            if f.re == T::zero() && f.im == T::zero() {
                continue;
            }
            a[r * n + col] = f;
            for c in col + 1..n {
                let t = a[col * n + c];
                a[r * n + c] -= f * t;
            }
            let t = b[col];
            b[r] -= f * t;
        }
    }
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= a[r * n + c] * b[c];
        }
        b[r] = s / a[r * n + r];
    }
    Some(LuOutcome { min_pivot })
}

/// ‖a‖∞ (max absolute row sum) of an n×n row-major matrix.
pub(crate) fn inf_norm<T: Real>(a: &[Cplx<T>], n: usize) -> T {
    (0..n)
        .map(|r| a[r * n..(r + 1) * n].iter().fold(T::zero(), |s, x| s + x.norm()))
        .fold(T::zero(), T::max)
}
