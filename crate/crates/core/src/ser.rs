//! Serde helpers shared by report types.

use std::fmt::Display;

use num_rational::BigRational;
use serde::Serializer;

pub fn display<T: Display, S: Serializer>(value: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(value)
}

/// Rationals travel as `"num/den"` strings.
pub fn rationals<S: Serializer>(values: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(
        values
            .iter()
            .map(|v| format!("{}/{}", v.numer(), v.denom())),
    )
}
