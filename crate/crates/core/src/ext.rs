//! Exact arithmetic in `Q(sqrt(theta), sqrt(Z))` for positive rationals
//! `theta` and `Z`.
//!
//! An element is `a + b sqrt(theta) + c sqrt(Z) + d sqrt(theta Z)`. When a
//! radical is rational (or expressible through another one) it is folded at
//! construction, so the stored coordinates are unique and zero-testing is a
//! coordinate check.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub const DEFAULT_PRECISION_CAP: u32 = 1 << 14;

fn rational_sqrt(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    let (p, q) = (r.numer(), r.denom());
    let sp = p.sqrt();
    let sq = q.sqrt();
    (&sp * &sp == *p && &sq * &sq == *q).then(|| Rational::new(sp, sq))
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Shape {
    /// Both radicals rational.
    Rational { t: Rational, u: Rational },
    /// `sqrt(theta) = t`.
    ThetaSquare { t: Rational },
    /// `sqrt(Z) = u`.
    ZSquare { u: Rational },
    /// `sqrt(theta Z) = v`, neither factor a square.
    ProductSquare { v: Rational },
    Full,
}

/// The field parameters, shared by all scalars of one computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadField {
    theta: Rational,
    z: Rational,
    shape: Shape,
}

impl QuadField {
    pub fn new(theta: Rational, z: Rational) -> Result<Arc<Self>> {
        if !theta.is_positive() || !z.is_positive() {
            return Err(Error::Precondition(format!(
                "radicands must be positive, got {theta} and {z}"
            )));
        }
        let shape = match (rational_sqrt(&theta), rational_sqrt(&z)) {
            (Some(t), Some(u)) => Shape::Rational { t, u },
            (Some(t), None) => Shape::ThetaSquare { t },
            (None, Some(u)) => Shape::ZSquare { u },
            (None, None) => match rational_sqrt(&(&theta * &z)) {
                Some(v) => Shape::ProductSquare { v },
                None => Shape::Full,
            },
        };
        Ok(Arc::new(QuadField { theta, z, shape }))
    }

    pub fn theta(&self) -> &Rational {
        &self.theta
    }

    pub fn z(&self) -> &Rational {
        &self.z
    }

    /// Degree over the rationals.
    pub fn degree(&self) -> usize {
        match self.shape {
            Shape::Rational { .. } => 1,
            Shape::Full => 4,
            _ => 2,
        }
    }

    fn fold(&self, mut c: [Rational; 4]) -> [Rational; 4] {
        let take = |x: &mut Rational| std::mem::replace(x, Rational::zero());
        match &self.shape {
            Shape::Full => {}
            Shape::ThetaSquare { t } => {
                let b = take(&mut c[1]);
                let d = take(&mut c[3]);
                c[0] += b * t;
                c[2] += d * t;
            }
            Shape::ZSquare { u } => {
                let cc = take(&mut c[2]);
                let d = take(&mut c[3]);
                c[0] += cc * u;
                c[1] += d * u;
            }
            Shape::ProductSquare { v } => {
                let cc = take(&mut c[2]);
                let d = take(&mut c[3]);
                c[1] += cc * v / &self.theta;
                c[0] += d * v;
            }
            Shape::Rational { t, u } => {
                let b = take(&mut c[1]);
                let cc = take(&mut c[2]);
                let d = take(&mut c[3]);
                c[0] += b * t + cc * u + d * t * u;
            }
        }
        c
    }
}

/// `a + b sqrt(theta) + c sqrt(Z) + d sqrt(theta Z)` in canonical form.
#[derive(Clone)]
pub struct ExtScalar {
    field: Arc<QuadField>,
    c: [Rational; 4],
}

impl ExtScalar {
    fn from_coords(field: &Arc<QuadField>, c: [Rational; 4]) -> Self {
        let c = field.fold(c);
        ExtScalar {
            field: Arc::clone(field),
            c,
        }
    }

    pub fn new(field: &Arc<QuadField>, a: Rational, b: Rational, c: Rational, d: Rational) -> Self {
        Self::from_coords(field, [a, b, c, d])
    }

    pub fn zero(field: &Arc<QuadField>) -> Self {
        Self::rational(field, Rational::zero())
    }

    pub fn one(field: &Arc<QuadField>) -> Self {
        Self::rational(field, Rational::one())
    }

    pub fn rational(field: &Arc<QuadField>, a: Rational) -> Self {
        ExtScalar {
            field: Arc::clone(field),
            c: [a, Rational::zero(), Rational::zero(), Rational::zero()],
        }
    }

    pub fn sqrt_theta(field: &Arc<QuadField>) -> Self {
        let o = Rational::zero;
        Self::from_coords(field, [o(), Rational::one(), o(), o()])
    }

    pub fn sqrt_z(field: &Arc<QuadField>) -> Self {
        let o = Rational::zero;
        Self::from_coords(field, [o(), o(), Rational::one(), o()])
    }

    pub fn sqrt_theta_z(field: &Arc<QuadField>) -> Self {
        let o = Rational::zero;
        Self::from_coords(field, [o(), o(), o(), Rational::one()])
    }

    pub fn field(&self) -> &Arc<QuadField> {
        &self.field
    }

    /// Canonical coordinates `(a, b, c, d)`.
    pub fn coords(&self) -> &[Rational; 4] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.c[1..].iter().all(Zero::is_zero).then_some(&self.c[0])
    }

    pub fn scale(&self, r: &Rational) -> Self {
        ExtScalar {
            field: Arc::clone(&self.field),
            c: std::array::from_fn(|k| &self.c[k] * r),
        }
    }

    pub fn div_rational(&self, r: &Rational) -> Self {
        assert!(!r.is_zero(), "division by zero");
        self.scale(&r.recip())
    }

    fn check_field(&self, other: &ExtScalar) {
        assert!(
            Arc::ptr_eq(&self.field, &other.field) || self.field == other.field,
            "scalars from different fields"
        );
    }

    /// Bounds `lo <= value <= hi` using radicals to `bits` binary places.
    pub fn enclose(&self, bits: u32) -> (Rational, Rational) {
        let f = &self.field;
        let radicands = [f.theta.clone(), f.z.clone(), &f.theta * &f.z];
        let mut lo = self.c[0].clone();
        let mut hi = self.c[0].clone();
        for (coef, r) in self.c[1..].iter().zip(&radicands) {
            if coef.is_zero() {
                continue;
            }
            let (rl, rh) = sqrt_bounds(r, bits);
            if coef.is_positive() {
                lo += coef * &rl;
                hi += coef * &rh;
            } else {
                lo += coef * &rh;
                hi += coef * &rl;
            }
        }
        (lo, hi)
    }

    /// Exact sign. Precision doubles from 64 bits until the enclosure
    /// excludes zero; past `cap_bits` the call fails.
    pub fn sign(&self, cap_bits: u32) -> Result<Ordering> {
        if self.is_zero() {
            return Ok(Ordering::Equal);
        }
        if let Some(a) = self.as_rational() {
            return Ok(a.cmp(&Rational::zero()));
        }
        let mut bits = 64u32;
        loop {
            let (lo, hi) = self.enclose(bits);
            if lo.is_positive() {
                return Ok(Ordering::Greater);
            }
            if hi.is_negative() {
                return Ok(Ordering::Less);
            }
            if bits >= cap_bits {
                return Err(Error::PrecisionExhausted { bits });
            }
            bits = bits.saturating_mul(2).min(cap_bits);
        }
    }

    pub fn cmp_exact(&self, other: &ExtScalar, cap_bits: u32) -> Result<Ordering> {
        (self - other).sign(cap_bits)
    }

    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.enclose(64);
        let mid = (lo + hi) / Rational::from_integer(2.into());
        ratio_to_f64(&mid)
    }
}

fn ratio_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// `lo <= sqrt(r) <= hi` with `hi - lo` about `2^-bits`.
fn sqrt_bounds(r: &Rational, bits: u32) -> (Rational, Rational) {
    let scale = BigInt::one() << (2 * bits as usize);
    let num = r.numer() * &scale;
    let den = r.denom();
    let floor = &num / den;
    let ceil = if (&floor * den) == num { floor.clone() } else { &floor + 1 };
    let lo = floor.sqrt();
    let mut hi = ceil.sqrt();
    if &hi * &hi != ceil {
        hi += 1;
    }
    let unit = BigInt::one() << bits as usize;
    (
        Rational::new(lo, unit.clone()),
        Rational::new(hi, unit),
    )
}

impl PartialEq for ExtScalar {
    fn eq(&self, other: &Self) -> bool {
        self.check_field(other);
        self.c == other.c
    }
}

impl Eq for ExtScalar {}

impl fmt::Display for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["", "sqrt(theta)", "sqrt(Z)", "sqrt(theta*Z)"];
        let mut first = true;
        for (k, v) in self.c.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let mag = v.abs();
            match (first, v.is_negative()) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            if k == 0 {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(names[k])?;
            } else {
                write!(f, "{mag}*{}", names[k])?;
            }
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExtScalar({self})")
    }
}

impl Add for &ExtScalar {
    type Output = ExtScalar;
    fn add(self, rhs: &ExtScalar) -> ExtScalar {
        self.check_field(rhs);
        ExtScalar {
            field: Arc::clone(&self.field),
            c: std::array::from_fn(|k| &self.c[k] + &rhs.c[k]),
        }
    }
}

impl Sub for &ExtScalar {
    type Output = ExtScalar;
    fn sub(self, rhs: &ExtScalar) -> ExtScalar {
        self.check_field(rhs);
        ExtScalar {
            field: Arc::clone(&self.field),
            c: std::array::from_fn(|k| &self.c[k] - &rhs.c[k]),
        }
    }
}

impl Neg for &ExtScalar {
    type Output = ExtScalar;
    fn neg(self) -> ExtScalar {
        ExtScalar {
            field: Arc::clone(&self.field),
            c: std::array::from_fn(|k| -&self.c[k]),
        }
    }
}

impl Mul for &ExtScalar {
    type Output = ExtScalar;
    fn mul(self, rhs: &ExtScalar) -> ExtScalar {
        self.check_field(rhs);
        let [a1, b1, c1, d1] = &self.c;
        let [a2, b2, c2, d2] = &rhs.c;
        let t = &self.field.theta;
        let z = &self.field.z;
        let tz = t * z;
        let out = [
            a1 * a2 + b1 * b2 * t + c1 * c2 * z + d1 * d2 * &tz,
            a1 * b2 + b1 * a2 + (c1 * d2 + d1 * c2) * z,
            a1 * c2 + c1 * a2 + (b1 * d2 + d1 * b2) * t,
            a1 * d2 + d1 * a2 + b1 * c2 + c1 * b2,
        ];
        ExtScalar::from_coords(&self.field, out)
    }
}

impl Mul<&Rational> for &ExtScalar {
    type Output = ExtScalar;
    fn mul(self, rhs: &Rational) -> ExtScalar {
        self.scale(rhs)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for ExtScalar {
            type Output = ExtScalar;
            fn $m(self, rhs: ExtScalar) -> ExtScalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&ExtScalar> for ExtScalar {
            type Output = ExtScalar;
            fn $m(self, rhs: &ExtScalar) -> ExtScalar {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for ExtScalar {
    type Output = ExtScalar;
    fn neg(self) -> ExtScalar {
        -&self
    }
}

impl AddAssign<&ExtScalar> for ExtScalar {
    fn add_assign(&mut self, rhs: &ExtScalar) {
        self.check_field(rhs);
        for k in 0..4 {
            self.c[k] += &rhs.c[k];
        }
    }
}

impl SubAssign<&ExtScalar> for ExtScalar {
    fn sub_assign(&mut self, rhs: &ExtScalar) {
        self.check_field(rhs);
        for k in 0..4 {
            self.c[k] -= &rhs.c[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn field(t: (i64, i64), z: (i64, i64)) -> Arc<QuadField> {
        QuadField::new(rat(t.0, t.1), rat(z.0, z.1)).unwrap()
    }

    #[test]
    fn radicals_square_to_radicands() {
        for (t, z) in [((1, 2), (7, 1)), ((1, 4), (7, 1)), ((1, 2), (9, 1)), ((1, 2), (2, 1)), ((1, 4), (9, 4))] {
            let f = field(t, z);
            let st = ExtScalar::sqrt_theta(&f);
            let sz = ExtScalar::sqrt_z(&f);
            let stz = ExtScalar::sqrt_theta_z(&f);
            assert_eq!(&st * &st, ExtScalar::rational(&f, rat(t.0, t.1)));
            assert_eq!(&sz * &sz, ExtScalar::rational(&f, rat(z.0, z.1)));
            assert_eq!(&st * &sz, stz);
            assert_eq!(&stz * &stz, ExtScalar::rational(&f, rat(t.0 * z.0, t.1 * z.1)));
        }
    }

    #[test]
    fn folding() {
        assert_eq!(field((1, 4), (9, 1)).degree(), 1);
        assert_eq!(field((1, 4), (7, 1)).degree(), 2);
        assert_eq!(field((1, 2), (2, 1)).degree(), 2);
        assert_eq!(field((1, 2), (7, 1)).degree(), 4);
        let f = field((1, 2), (2, 1));
        // sqrt(theta Z) = 1
        assert_eq!(ExtScalar::sqrt_theta_z(&f), ExtScalar::one(&f));
        let f = field((1, 4), (7, 1));
        assert_eq!(ExtScalar::sqrt_theta(&f).as_rational(), Some(&rat(1, 2)));
    }

    #[test]
    fn signs() {
        let f = field((1, 2), (7, 1));
        let st = ExtScalar::sqrt_theta(&f);
        let sz = ExtScalar::sqrt_z(&f);
        // sqrt(7) - 2.6457 > 0, sqrt(7) - 2.6458 < 0
        let x = &sz - &ExtScalar::rational(&f, rat(26457, 10000));
        assert_eq!(x.sign(DEFAULT_PRECISION_CAP).unwrap(), Ordering::Greater);
        let y = &sz - &ExtScalar::rational(&f, rat(26458, 10000));
        assert_eq!(y.sign(DEFAULT_PRECISION_CAP).unwrap(), Ordering::Less);
        // 2 sqrt(theta) - sqrt(2) = 0 but written without folding
        let two = ExtScalar::rational(&f, int(2));
        let zero = &(&two * &st) * &st - &ExtScalar::one(&f);
        assert!(zero.is_zero());
        assert_eq!(zero.sign(64).unwrap(), Ordering::Equal);
        assert_eq!((-&st).sign(64).unwrap(), Ordering::Less);
    }

    #[test]
    fn close_values_need_more_bits() {
        let f = field((1, 2), (7, 1));
        let sz = ExtScalar::sqrt_z(&f);
        // a rational within 2^-100 of sqrt(7)
        let (lo, _) = sz.enclose(200);
        let x = &sz - &ExtScalar::rational(&f, lo);
        assert!(matches!(x.sign(64), Err(Error::PrecisionExhausted { bits: 64 })));
        assert_eq!(x.sign(DEFAULT_PRECISION_CAP).unwrap(), Ordering::Greater);
    }

    #[test]
    fn display() {
        let f = field((1, 2), (7, 1));
        let x = ExtScalar::new(&f, int(1), int(-2), int(0), rat(1, 3));
        assert_eq!(x.to_string(), "1 - 2*sqrt(theta) + 1/3*sqrt(theta*Z)");
        assert_eq!(ExtScalar::zero(&f).to_string(), "0");
        assert!((ExtScalar::sqrt_z(&f).to_f64() - 7f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_radicands() {
        assert!(QuadField::new(int(0), int(1)).is_err());
        assert!(QuadField::new(int(1), int(-1)).is_err());
    }
}
