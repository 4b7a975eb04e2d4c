//! Exact rational scalars.
//!
//! Every coefficient, noise bound, and pre-floor value in the system is a
//! `Rat` (arbitrary-precision rational), so floor decisions are bit-exact.
//! Serialized form is always `"p/q"` or an integer literal; decimal literals
//! such as `"0.5"` are accepted on input and converted exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::SpipError;

/// Arbitrary-precision rational: reduced, positive denominator.
pub type Rat = BigRational;

/// Rational from an integer pair `p/q`. Panics if `q == 0`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Exact floor to a machine integer. Panics if the result is outside `i64`,
/// which only happens for coefficients far beyond the supported lattice range.
pub fn floor_i64(v: &Rat) -> i64 {
    v.floor()
        .to_integer()
        .to_i64()
        .expect("floor value overflows i64 lattice coordinate")
}

/// Parse `"p/q"`, an integer literal, or an exact decimal like `"-0.25"`.
pub fn parse_rat(s: &str) -> Result<Rat, SpipError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(SpipError::Parse("empty rational literal".into()));
    }
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p
            .trim()
            .parse()
            .map_err(|_| SpipError::Parse(format!("bad numerator in rational `{s}`")))?;
        let den: BigInt = q
            .trim()
            .parse()
            .map_err(|_| SpipError::Parse(format!("bad denominator in rational `{s}`")))?;
        if den.is_zero() {
            return Err(SpipError::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.trim_start().starts_with('-');
        let whole_part: BigInt = if whole == "-" || whole.is_empty() {
            BigInt::zero()
        } else {
            whole
                .parse()
                .map_err(|_| SpipError::Parse(format!("bad decimal `{s}`")))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(SpipError::Parse(format!("bad decimal `{s}`")));
        }
        let frac_num: BigInt = frac
            .parse()
            .map_err(|_| SpipError::Parse(format!("bad decimal `{s}`")))?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let mut value = Rat::from_integer(whole_part.abs()) + Rat::new(frac_num, scale);
        if neg {
            value = -value;
        }
        return Ok(value);
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| SpipError::Parse(format!("bad integer literal `{s}`")))?;
    Ok(Rat::from_integer(n))
}

/// Canonical `"p/q"` form (denominator always present, e.g. `"4/1"`).
pub fn format_rat(v: &Rat) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

/// Approximate value for reporting only; never used in state computations.
pub fn rat_to_f64(v: &Rat) -> f64 {
    v.numer().to_f64().unwrap_or(f64::NAN) / v.denom().to_f64().unwrap_or(f64::NAN)
}

/// Smallest-grid rational `s` with `s² ≥ c` and `s ≤ 1`, by exact bisection.
/// Requires `0 ≤ c ≤ 1`.
pub fn sqrt_upper_bound(c: &Rat, iters: u32) -> Rat {
    assert!(!c.is_negative() && *c <= Rat::one(), "sqrt bound needs c in [0, 1]");
    let mut lo = Rat::zero();
    let mut hi = Rat::one();
    for _ in 0..iters {
        let mid = (&lo + &hi) / rat_int(2);
        if &mid * &mid >= *c {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
