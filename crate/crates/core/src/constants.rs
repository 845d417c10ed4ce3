//! CODATA 2018 physical constants (SI) and a few species defaults.

use crate::num::Real;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const MU_0: f64 = 1.256_637_062_12e-6;
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const ELECTRON_MASS_U: f64 = 5.485_799_090_65e-4;
/// Rydberg constant for infinite nuclear mass, in Hz (R∞·c).
pub const RYDBERG_INFINITY_HZ: f64 = 3.289_841_960_250_8e15;
/// Torr to pascal.
pub const TORR: f64 = 101_325.0 / 760.0;

/// ⁸⁵Rb atomic mass in u.
pub const RB85_MASS_U: f64 = 84.911_789_738;
/// Natural abundance of ⁸⁵Rb.
pub const RB85_ABUNDANCE: f64 = 0.7217;

/// Rydberg constant corrected for a nucleus of `mass_u` atomic mass units.
pub fn reduced_mass_rydberg_hz(mass_u: f64) -> f64 {
    RYDBERG_INFINITY_HZ / (1.0 + ELECTRON_MASS_U / mass_u)
}

/// One dipole unit e·a₀ in C·m.
pub fn ea0<T: Real>() -> T {
    T::c(ELEMENTARY_CHARGE * BOHR_RADIUS)
}

/// 2π as `T`.
#[inline]
pub fn two_pi<T: Real>() -> T {
    T::c(2.0) * T::PI()
}
