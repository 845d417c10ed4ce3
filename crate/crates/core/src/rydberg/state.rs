use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An alkali level labelled by (n, l, j) and optionally m_j.
///
/// Half-integer quantum numbers are stored doubled (`j2 = 2j`, `mj2 = 2m_j`)
/// so equality and hashing are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RydbergState {
    n: u32,
    l: u32,
    j2: u32,
    mj2: Option<i32>,
}

const L_LETTERS: [char; 7] = ['S', 'P', 'D', 'F', 'G', 'H', 'I'];

impl RydbergState {
    /// Builds a state with `j = j2 / 2`.
    pub fn new(n: u32, l: u32, j2: u32) -> Result<Self> {
        Self::with_mj(n, l, j2, None)
    }

    pub fn with_mj(n: u32, l: u32, j2: u32, mj2: Option<i32>) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidState(format!("n = {n} must be >= 1")));
        }
        if l >= n {
            return Err(Error::InvalidState(format!("l = {l} must be < n = {n}")));
        }
        let allowed = if l == 0 { j2 == 1 } else { j2 == 2 * l - 1 || j2 == 2 * l + 1 };
        if !allowed {
            return Err(Error::InvalidState(format!("j = {}/2 incompatible with l = {l}", j2)));
        }
        if let Some(m) = mj2 {
            if m.unsigned_abs() > j2 || (m - j2 as i32) % 2 != 0 {
                return Err(Error::InvalidState(format!("m_j = {m}/2 incompatible with j = {j2}/2")));
            }
        }
        Ok(Self { n, l, j2, mj2 })
    }

    /// `nS1/2`-style shorthand for `l = 0`, `j = 1/2`.
    pub fn s_half(n: u32) -> Result<Self> {
        Self::new(n, 0, 1)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    /// Twice the total angular momentum.
    pub fn j2(&self) -> u32 {
        self.j2
    }

    pub fn j(&self) -> f64 {
        self.j2 as f64 / 2.0
    }

    pub fn mj2(&self) -> Option<i32> {
        self.mj2
    }

    /// Same level with the magnetic quantum number dropped.
    pub fn level(&self) -> Self {
        Self { mj2: None, ..*self }
    }

    pub fn with_principal(&self, n: u32) -> Result<Self> {
        Self::with_mj(n, self.l, self.j2, self.mj2)
    }
}

impl fmt::Display for RydbergState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = L_LETTERS.get(self.l as usize).copied().unwrap_or('?');
        write!(f, "{}{}{}/2", self.n, letter, self.j2)?;
        if let Some(m) = self.mj2 {
            write!(f, ",mj={m}/2")?;
        }
        Ok(())
    }
}

impl FromStr for RydbergState {
    type Err = Error;

    /// Parses labels such as `57S1/2`, `57P3/2` or `56D5/2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidState(format!("cannot parse state label `{s}`"));
        let pos = s.find(|c: char| c.is_ascii_alphabetic()).ok_or_else(bad)?;
        let n: u32 = s[..pos].parse().map_err(|_| bad())?;
        let letter = s[pos..].chars().next().ok_or_else(bad)?.to_ascii_uppercase();
        let l = L_LETTERS.iter().position(|&c| c == letter).ok_or_else(bad)? as u32;
        let rest = &s[pos + 1..];
        let j2: u32 = rest.strip_suffix("/2").ok_or_else(bad)?.parse().map_err(|_| bad())?;
        Self::new(n, l, j2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints_labels() {
        let s: RydbergState = "57P1/2".parse().unwrap();
        assert_eq!((s.n(), s.l(), s.j2()), (57, 1, 1));
        assert_eq!(s.to_string(), "57P1/2");
        assert!("57X1/2".parse::<RydbergState>().is_err());
        assert!("57S3/2".parse::<RydbergState>().is_err());
    }

    #[test]
    fn rejects_inconsistent_quantum_numbers() {
        assert!(RydbergState::new(3, 3, 5).is_err());
        assert!(RydbergState::new(5, 2, 1).is_err());
        assert!(RydbergState::with_mj(5, 0, 1, Some(3)).is_err());
        assert!(RydbergState::with_mj(5, 0, 1, Some(-1)).is_ok());
    }

    #[test]
    fn equality_includes_mj() {
        let a = RydbergState::with_mj(57, 0, 1, Some(1)).unwrap();
        let b = RydbergState::with_mj(57, 0, 1, Some(-1)).unwrap();
        assert_ne!(a, b);
        assert_eq!(a.level(), b.level());
    }
}
