use crate::error::{Error, Result};
use crate::num::{compensated_sum, Real};

/// Quadrature of the 1D Maxwell distribution along the beams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VelocityGrid<T> {
    /// `classes` equally spaced velocities over ±`span` most-probable speeds.
    Uniform { classes: usize, span: T },
    /// Composite Gauss-Legendre rule over ±`span` most-probable speeds with
    /// panel edges at every resonant velocity and at distances
    /// `width`·2ᵏ (m/s) from it; `order` nodes per panel.
    Resonant { order: usize, span: T, width: T },
    /// A single class at rest (no Doppler averaging).
    Single,
}

impl<T: Real> Default for VelocityGrid<T> {
    fn default() -> Self {
        Self::Resonant { order: 6, span: T::c(4.0), width: T::c(1.0) }
    }
}

/// Velocities (m/s) and normalized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityClasses<T> {
    pub velocity: Vec<T>,
    pub weight: Vec<T>,
}

impl<T: Real> VelocityGrid<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Uniform { classes, span } => {
                if classes < 3 {
                    return Err(Error::param("velocity_classes", "need at least 3 classes"));
                }
                if !(span > T::zero()) {
                    return Err(Error::param("velocity_span", "must be positive"));
                }
            }
            Self::Resonant { order, span, width } => {
                if !(1..=64).contains(&order) {
                    return Err(Error::param("velocity_order", "must lie in 1..=64"));
                }
                if !(span > T::zero()) {
                    return Err(Error::param("velocity_span", "must be positive"));
                }
                if !(width > T::zero()) {
                    return Err(Error::param("velocity_width", "must be positive"));
                }
            }
            Self::Single => {}
        }
        Ok(())
    }

    /// Same kind of grid with about twice as many classes, or `None` for a
    /// single class.
    pub fn refined(&self) -> Option<Self> {
        match *self {
            Self::Uniform { classes, span } => Some(Self::Uniform { classes: 2 * classes - 1, span }),
            Self::Resonant { order, span, width } => Some(Self::Resonant { order: 2 * order, span, width }),
            Self::Single => None,
        }
    }

    /// Same grid over a different span (in most-probable speeds).
    pub fn with_span(&self, new_span: T) -> Self {
        match *self {
            Self::Uniform { classes, .. } => Self::Uniform { classes, span: new_span },
            Self::Resonant { order, width, .. } => Self::Resonant { order, span: new_span, width },
            Self::Single => Self::Single,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Self::Uniform { classes, span } => format!("uniform(classes={classes};span={span})"),
            Self::Resonant { order, span, width } => {
                format!("resonant(order={order};span={span};width_mps={width})")
            }
            Self::Single => "single".to_string(),
        }
    }

    /// Classes for most-probable speed `u`. `centres` are velocities (m/s)
    /// where the integrand has narrow features; only the resonant grid
    /// uses them.
    pub fn classes(&self, u: T, centres: &[T]) -> VelocityClasses<T> {
        let gauss = |v: T| (-(v / u) * (v / u)).exp();
        let (velocity, mut weight): (Vec<T>, Vec<T>) = match *self {
            Self::Single => (vec![T::zero()], vec![T::one()]),
            Self::Uniform { classes, span } => {
                let vmax = span * u;
                let step = T::c(2.0) * vmax / T::from_usize_lossy(classes - 1);
                (0..classes)
                    .map(|k| {
                        let v = -vmax + step * T::from_usize_lossy(k);
                        (v, gauss(v))
                    })
                    .unzip()
            }
            Self::Resonant { order, span, width } => {
                let edges = panel_edges(span * u, width, centres);
                let (x, w) = gauss_legendre::<T>(order);
                let mut vs = Vec::with_capacity(order * edges.len());
                let mut ws = Vec::with_capacity(order * edges.len());
                for e in edges.windows(2) {
                    let (mid, half) = ((e[0] + e[1]) * T::c(0.5), (e[1] - e[0]) * T::c(0.5));
                    for (xi, wi) in x.iter().zip(&w) {
                        let v = mid + half * *xi;
                        vs.push(v);
                        ws.push(*wi * half * gauss(v));
                    }
                }
                (vs, ws)
            }
        };
        let total = compensated_sum(weight.iter().copied());
        for w in &mut weight {
            *w /= total;
        }
        VelocityClasses { velocity, weight }
    }
}

/// Sorted panel edges on [−vmax, vmax], refined geometrically towards each
/// centre.
fn panel_edges<T: Real>(vmax: T, width: T, centres: &[T]) -> Vec<T> {
    let mut edges = vec![-vmax, vmax];
    for &c in centres {
        if !c.is_finite() || c.abs() > vmax + width {
            continue;
        }
        let c = c.max(-vmax).min(vmax);
        edges.push(c);
        let mut d = width;
        while d < T::c(2.0) * vmax {
            edges.push(c - d);
            edges.push(c + d);
            d *= T::c(2.0);
        }
    }
    edges.retain(|e| *e >= -vmax && *e <= vmax);
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Merge edges closer than a quarter of the innermost width.
    let min_gap = width * T::c(0.25);
    let mut out: Vec<T> = Vec::with_capacity(edges.len());
    for e in edges {
        match out.last() {
            Some(&last) if e - last < min_gap => {}
            _ => out.push(e),
        }
    }
    let last = out.len() - 1;
    out[last] = vmax;
    out
}

/// Gauss-Legendre nodes and weights on [−1, 1] by Newton iteration on Pₙ.
pub(crate) fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = Pₙ(z), p0 = Pₙ₋₁(z).
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x.into_iter().map(T::c).collect(), w.into_iter().map(T::c).collect())
}
