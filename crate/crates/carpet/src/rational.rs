//! Exact rational arithmetic helpers and values on the length-4 circle.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Exact rational number in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

/// Builds `num / den` from machine integers.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds an integer-valued rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Lossy conversion used only for statistics and reports.
pub fn to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale both parts down together when they overflow a double.
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
            if d == 0.0 {
                if r.is_negative() {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            } else {
                n / d
            }
        }
    }
}

/// Natural logarithm of a positive rational, accurate for very small values.
pub fn ln(r: &Rational) -> f64 {
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().unwrap_or(f64::NAN).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Floor of a rational as a big integer.
pub fn floor(r: &Rational) -> BigInt {
    r.numer().div_floor(r.denom())
}

/// Serialized form of a rational: decimal strings for both parts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRepr {
    pub den: String,
    pub num: String,
}

impl From<&Rational> for RationalRepr {
    fn from(r: &Rational) -> Self {
        RationalRepr {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }
}

impl TryFrom<&RationalRepr> for Rational {
    type Error = crate::CarpetError;

    fn try_from(r: &RationalRepr) -> crate::Result<Rational> {
        let parse = |s: &str| {
            s.parse::<BigInt>()
                .map_err(|e| crate::CarpetError::Format(format!("bad integer {s:?}: {e}")))
        };
        let den = parse(&r.den)?;
        if den.is_zero() {
            return Err(crate::CarpetError::Format("zero denominator".into()));
        }
        Ok(Rational::new(parse(&r.num)?, den))
    }
}

/// A point of the circle of length 4, stored as a rational in `[0, 4)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HValue(Rational);

impl HValue {
    pub fn new(value: Rational) -> Self {
        let four = int(4);
        let mut v = value;
        if v.is_negative() || v >= four {
            let turns = floor(&(&v / &four));
            v -= Rational::from_integer(turns) * &four;
        }
        HValue(v)
    }

    pub fn zero() -> Self {
        HValue(Rational::zero())
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    /// Moves along the circle by `delta` (either sign).
    pub fn shift(&self, delta: &Rational) -> Self {
        HValue::new(&self.0 + delta)
    }

    /// Counter-clockwise difference `self - other` normalized into `[0, 4)`.
    pub fn diff(&self, other: &HValue) -> Rational {
        HValue::new(&self.0 - &other.0).0
    }

    /// Length of the shorter arc between the two values.
    pub fn arc_distance(&self, other: &HValue) -> Rational {
        let d = self.diff(other);
        let back = int(4) - &d;
        if back < d {
            back
        } else {
            d
        }
    }
}

/// Returns true when `r` is a positive integer multiple of `unit`.
pub fn is_multiple_of(r: &Rational, unit: &Rational) -> bool {
    (r / unit).is_integer()
}

/// Exact value of `log(a) / log(b)` when it is rational, for integers `a, b >= 2`.
///
/// The ratio is rational exactly when the prime exponent vectors of `a` and `b`
/// are proportional.
pub fn exact_log_ratio(a: u64, b: u64) -> Option<Rational> {
    if a < 2 || b < 2 {
        return None;
    }
    let fa = factorize(a);
    let fb = factorize(b);
    if fa.len() != fb.len() || fa.iter().zip(&fb).any(|(x, y)| x.0 != y.0) {
        return None;
    }
    let candidate = ratio(fa[0].1 as i64, fb[0].1 as i64);
    let consistent = fa
        .iter()
        .zip(&fb)
        .all(|(x, y)| ratio(x.1 as i64, y.1 as i64) == candidate);
    consistent.then_some(candidate)
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Positive part helper used by interval bookkeeping.
pub fn clamp(r: Rational, lo: &Rational, hi: &Rational) -> Rational {
    if &r < lo {
        lo.clone()
    } else if &r > hi {
        hi.clone()
    } else {
        r
    }
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn zero() -> Rational {
    Rational::zero()
}
