//! Exact rationals and the coin parameter.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Parse `"p/q"` or an integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse {
        input: s.to_string(),
        reason: "expected a rational of the form P/Q".into(),
    };
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// The coin probability, a rational strictly inside `(0, 1)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Theta(Rational);

impl Theta {
    pub fn new(value: Rational) -> Result<Self> {
        if value.is_positive() && value < Rational::one() {
            Ok(Theta(value))
        } else {
            Err(Error::ThetaRange(format_rational(&value)))
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::ThetaRange(format!("{num}/{den}")));
        }
        Self::new(rat(num, den))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn complement(&self) -> Rational {
        Rational::one() - &self.0
    }

    /// `m = (1 - theta) / theta`.
    pub fn m_parameter(&self) -> Rational {
        self.complement() / &self.0
    }

    /// `theta^(-k)`, the unnormalised stationary weight of a state of length `k`.
    pub fn inverse_power(&self, k: u32) -> Rational {
        Rational::new(
            self.0.denom().pow(k),
            self.0.numer().pow(k),
        )
    }
}

impl FromStr for Theta {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Theta::new(parse_rational(s)?)
    }
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl fmt::Debug for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Theta({self})")
    }
}
