//! Exact rational helpers and string (de)serialization.

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Accepts `"p/q"`, `"n"` and finite decimals such as `"0.25"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    if let Some((int, frac)) = t.split_once('.') {
        if !t.contains('/') {
            let neg = int.starts_with('-');
            let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
            let num: BigInt = digits
                .parse()
                .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
            let den = num::pow(BigInt::from(10), frac.len());
            let v = Q::new(num, den);
            return Ok(if neg { -v } else { v });
        }
    }
    t.parse::<Q>()
        .map_err(|_| Error::Parse(format!("bad rational {s:?}")))
}

pub fn fmt_q(x: &Q) -> String {
    x.to_string()
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn floor_int(x: &Q) -> BigInt {
    x.floor().to_integer()
}

pub fn ceil_int(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

/// `⌈x⌉` as usize; panics on negative or huge input.
pub fn ceil_usize(x: &Q) -> usize {
    ceil_int(x).to_usize().expect("ceil fits usize")
}

pub fn floor_usize(x: &Q) -> usize {
    floor_int(x).to_usize().expect("floor fits usize")
}

pub fn is_nonneg(x: &Q) -> bool {
    !x.is_negative()
}

/// Exact cube root when `x` is the cube of a rational.
pub fn exact_cbrt(x: &Q) -> Option<Q> {
    fn icbrt(n: &BigInt) -> Option<BigInt> {
        if n.is_negative() {
            return icbrt(&-n).map(|r| -r);
        }
        let r = n.cbrt();
        (&r * &r * &r == *n).then_some(r)
    }
    Some(Q::new(icbrt(x.numer())?, icbrt(x.denom())?))
}

pub fn lcm_of_denominators<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    use num::Integer;
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

pub mod as_string {
    use super::{fmt_q, parse_q, Q};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            I(i64),
        }
        match Raw::deserialize(d)? {
            Raw::S(s) => parse_q(&s).map_err(serde::de::Error::custom),
            Raw::I(i) => Ok(super::qi(i)),
        }
    }
}

pub mod opt_string {
    use super::{fmt_q, Q};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&fmt_q(v)),
            None => s.serialize_none(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_and_decimal() {
        assert_eq!(parse_q("3/6").unwrap(), q(1, 2));
        assert_eq!(parse_q("7").unwrap(), qi(7));
        assert_eq!(parse_q("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_q("-1.5").unwrap(), q(-3, 2));
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn cube_roots() {
        assert_eq!(exact_cbrt(&q(1, 64)), Some(q(1, 4)));
        assert_eq!(exact_cbrt(&q(1, 100)), None);
    }
}
