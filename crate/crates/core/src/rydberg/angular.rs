//! Angular-momentum algebra for electric-dipole matrix elements.
//!
//! Angular momenta are passed doubled (`j2 = 2j`) so half-integers stay exact.

use num_complex::Complex64;

/// Real unit vector giving the RF field polarization in the frame whose z axis
/// is the quantization axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarization([f64; 3]);

impl Polarization {
    /// Linear polarization along the quantization axis (π light).
    pub const PI: Polarization = Polarization([0.0, 0.0, 1.0]);

    /// Normalizes `v`; returns `None` for a zero vector.
    pub fn new(v: [f64; 3]) -> Option<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        (n > 0.0 && n.is_finite()).then(|| Self([v[0] / n, v[1] / n, v[2] / n]))
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    /// Spherical components n_q for q = -1, 0, +1.
    fn spherical(&self) -> [Complex64; 3] {
        let [x, y, z] = self.0;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        [
            Complex64::new(x * s, -y * s),
            Complex64::new(z, 0.0),
            Complex64::new(-x * s, -y * s),
        ]
    }
}

impl Default for Polarization {
    fn default() -> Self {
        Self::PI
    }
}

fn factorial(n: i64) -> f64 {
    debug_assert!(n >= 0);
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Factorial of a doubled argument, `None` if negative or odd.
fn fact2(x2: i64) -> Option<f64> {
    (x2 >= 0 && x2 % 2 == 0).then(|| factorial(x2 / 2))
}

fn triangle(a2: i64, b2: i64, c2: i64) -> Option<f64> {
    let num = fact2(a2 + b2 - c2)? * fact2(a2 - b2 + c2)? * fact2(-a2 + b2 + c2)?;
    Some(num / fact2(a2 + b2 + c2 + 2)?)
}

fn phase(x2: i64) -> f64 {
    // (-1)^(x2/2); x2 must be even.
    if (x2 / 2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3) with doubled arguments.
pub fn wigner_3j(j1: i64, j2: i64, j3: i64, m1: i64, m2: i64, m3: i64) -> f64 {
    if m1 + m2 + m3 != 0 || m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    if (j1 + m1) % 2 != 0 || (j2 + m2) % 2 != 0 || (j3 + m3) % 2 != 0 {
        return 0.0;
    }
    let Some(delta) = triangle(j1, j2, j3) else { return 0.0 };
    let norm = (delta
        * fact2(j1 + m1).unwrap()
        * fact2(j1 - m1).unwrap()
        * fact2(j2 + m2).unwrap()
        * fact2(j2 - m2).unwrap()
        * fact2(j3 + m3).unwrap()
        * fact2(j3 - m3).unwrap())
    .sqrt();
    let mut sum = 0.0;
    let mut k2 = 0;
    while k2 <= j1 + j2 + j3 {
        let terms = [
            fact2(k2),
            fact2(j3 - j2 + k2 + m1),
            fact2(j3 - j1 + k2 - m2),
            fact2(j1 + j2 - j3 - k2),
            fact2(j1 - k2 - m1),
            fact2(j2 - k2 + m2),
        ];
        if terms.iter().all(Option::is_some) {
            let denom: f64 = terms.iter().map(|t| t.unwrap()).product();
            sum += phase(k2) / denom;
        }
        k2 += 2;
    }
    phase(j1 - j2 - m3) * norm * sum
}

/// Wigner 6j symbol {j1 j2 j3; j4 j5 j6} with doubled arguments.
pub fn wigner_6j(j1: i64, j2: i64, j3: i64, j4: i64, j5: i64, j6: i64) -> f64 {
    let triads = [(j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3)];
    let mut pre = 1.0;
    for &(a, b, c) in &triads {
        match triangle(a, b, c) {
            Some(d) => pre *= d,
            None => return 0.0,
        }
    }
    let pre = pre.sqrt();
    let lo = triads.iter().map(|&(a, b, c)| a + b + c).max().unwrap();
    let hi = [j1 + j2 + j4 + j5, j2 + j3 + j5 + j6, j3 + j1 + j6 + j4].into_iter().min().unwrap();
    let mut sum = 0.0;
    let mut t2 = lo;
    while t2 <= hi {
        let num = fact2(t2 + 2).unwrap();
        let denom: Option<f64> = [
            fact2(t2 - j1 - j2 - j3),
            fact2(t2 - j1 - j5 - j6),
            fact2(t2 - j4 - j2 - j6),
            fact2(t2 - j4 - j5 - j3),
            fact2(j1 + j2 + j4 + j5 - t2),
            fact2(j2 + j3 + j5 + j6 - t2),
            fact2(j3 + j1 + j6 + j4 - t2),
        ]
        .into_iter()
        .product();
        if let Some(d) = denom {
            sum += phase(t2) * num / d;
        }
        t2 += 2;
    }
    pre * sum
}

/// Angular part of the reduced element ⟨l' j' ‖ r̂ ‖ l j⟩ for a single electron (s = 1/2).
pub fn reduced_angular(l: u32, j2: u32, lp: u32, jp2: u32) -> f64 {
    let (l2, lp2) = (2 * l as i64, 2 * lp as i64);
    let (j2, jp2) = (j2 as i64, jp2 as i64);
    let orbital = phase(lp2)
        * (((l2 + 1) * (lp2 + 1)) as f64).sqrt()
        * wigner_3j(lp2, 2, l2, 0, 0, 0);
    let spin = phase(lp2 + 1 + j2 + 2)
        * (((j2 + 1) * (jp2 + 1)) as f64).sqrt()
        * wigner_6j(lp2, jp2, 1, j2, l2, 2);
    orbital * spin
}

/// ⟨j' m'| r̂_q |j m⟩ (angular part only) via Wigner-Eckart.
pub fn component(l: u32, j2: u32, m2: i32, lp: u32, jp2: u32, mp2: i32, q: i32) -> f64 {
    let (jp, mp) = (jp2 as i64, mp2 as i64);
    phase(jp - mp)
        * wigner_3j(jp, 2, j2 as i64, -mp, 2 * q as i64, m2 as i64)
        * reduced_angular(l, j2, lp, jp2)
}

/// Σ over final m' of |⟨j' m'| n̂·r̂ |j m⟩|² for one initial m.
fn strength_from(
    l: u32,
    j2: u32,
    m2: i32,
    lp: u32,
    jp2: u32,
    final_m: Option<i32>,
    pol: &Polarization,
) -> f64 {
    let n = pol.spherical();
    let mut total = 0.0;
    let mut mp2 = -(jp2 as i32);
    while mp2 <= jp2 as i32 {
        if final_m.is_none_or(|fm| fm == mp2) {
            let mut amp = Complex64::new(0.0, 0.0);
            for q in -1..=1i32 {
                // n·r = Σ_q (-1)^q n_{-q} r_q
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                let n_mq = n[(1 - q) as usize];
                amp += n_mq * sign * component(l, j2, m2, lp, jp2, mp2, q);
            }
            total += amp.norm_sqr();
        }
        mp2 += 2;
    }
    total
}

/// Net angular factor |n̂·⟨f|r̂|i⟩| aggregated over magnetic sublevels.
///
/// With `m_j` of the initial state unspecified the strength is averaged over
/// an unpolarized initial ensemble and summed over final sublevels; the
/// result is then independent of the polarization direction.
pub fn angular_factor(
    l: u32,
    j2: u32,
    mj2: Option<i32>,
    lp: u32,
    jp2: u32,
    final_mj2: Option<i32>,
    pol: &Polarization,
) -> f64 {
    let strength = match mj2 {
        Some(m) => strength_from(l, j2, m, lp, jp2, final_mj2, pol),
        None => {
            let mut acc = 0.0;
            let mut m = -(j2 as i32);
            while m <= j2 as i32 {
                acc += strength_from(l, j2, m, lp, jp2, final_mj2, pol);
                m += 2;
            }
            acc / (j2 as f64 + 1.0)
        }
    };
    strength.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_3j_values() {
        // (1 1 0; 0 0 0) = -1/sqrt(3)
        assert!((wigner_3j(2, 2, 0, 0, 0, 0) + 1.0 / 3f64.sqrt()).abs() < 1e-14);
        // (1/2 1/2 1; 1/2 -1/2 0) = 1/sqrt(6)
        assert!((wigner_3j(1, 1, 2, 1, -1, 0) - 1.0 / 6f64.sqrt()).abs() < 1e-14);
        assert_eq!(wigner_3j(2, 2, 6, 0, 0, 0), 0.0);
    }

    #[test]
    fn known_6j_values() {
        // {1/2 1/2 1; 1/2 1/2 0} = 1/2
        assert!((wigner_6j(1, 1, 2, 1, 1, 0) - 0.5).abs() < 1e-14);
        // {1 1 1; 1 1 1} = 1/6
        assert!((wigner_6j(2, 2, 2, 2, 2, 2) - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn s_to_p_half_pi_factor_is_one_third() {
        let f = angular_factor(0, 1, None, 1, 1, None, &Polarization::PI);
        assert!((f - 1.0 / 3.0).abs() < 1e-14, "{f}");
        let f = angular_factor(0, 1, Some(1), 1, 1, None, &Polarization::PI);
        assert!((f - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn unpolarized_average_is_direction_independent() {
        let tilted = Polarization::new([0.3, -0.7, 0.2]).unwrap();
        for &(l, j2, lp, jp2) in &[(0, 1, 1, 3), (1, 1, 2, 3), (1, 3, 2, 5), (2, 5, 1, 3)] {
            let a = angular_factor(l, j2, None, lp, jp2, None, &Polarization::PI);
            let b = angular_factor(l, j2, None, lp, jp2, None, &tilted);
            assert!((a - b).abs() < 1e-13, "{l} {j2} {lp} {jp2}: {a} vs {b}");
        }
    }

    #[test]
    fn fine_structure_partners_share_orbital_strength() {
        // Summed over j', an S state reaches P with total |r̂|² = 1/3 per axis.
        let half = angular_factor(0, 1, None, 1, 1, None, &Polarization::PI).powi(2);
        let three_half = angular_factor(0, 1, None, 1, 3, None, &Polarization::PI).powi(2);
        assert!((half + three_half - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn forbidden_is_zero() {
        assert_eq!(angular_factor(0, 1, None, 2, 5, None, &Polarization::PI), 0.0);
        assert_eq!(angular_factor(1, 1, None, 2, 5, None, &Polarization::PI), 0.0);
    }
}
