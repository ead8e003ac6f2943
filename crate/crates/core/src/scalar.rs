//! Scalar abstraction for the linear algebra kernel.

use std::fmt;

use num::BigInt;
use num_traits::{Num, Signed, ToPrimitive};

use crate::Rat;

/// Field scalar the matrix and graph layers are generic over.
///
/// Satisfied by `f64` and by [`Rat`]; the latter is the only scalar on
/// which structural decisions (row equality, ranks) are made.
pub trait Scalar:
    Num + Signed + Clone + PartialEq + PartialOrd + ToPrimitive + fmt::Debug + fmt::Display
{
}

impl<T> Scalar for T where
    T: Num + Signed + Clone + PartialEq + PartialOrd + ToPrimitive + fmt::Debug + fmt::Display
{
}

/// Exact rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Exact rational `n/d`. Panics if `d == 0`.
pub fn ratq(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses a rational from `"p/q"` or plain integer form.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    let (numer, denom) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let n: BigInt = numer
        .parse()
        .map_err(|_| format!("invalid rational numerator in {s:?}"))?;
    let d: BigInt = match denom {
        Some(d) => d
            .parse()
            .map_err(|_| format!("invalid rational denominator in {s:?}"))?,
        None => BigInt::from(1),
    };
    if d == BigInt::from(0) {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rat::new(n, d))
}

/// Canonical string form of a rational: `"p"` when integral, else `"p/q"`.
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}
