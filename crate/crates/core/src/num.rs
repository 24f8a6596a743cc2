//! Arbitrary-precision integer and rational helpers shared by every module.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Int = BigInt;
pub type Rat = BigRational;

pub fn int(v: i64) -> Int {
    BigInt::from(v)
}

pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(v: &Int) -> Rat {
    BigRational::from_integer(v.clone())
}

pub fn lcm(a: &Int, b: &Int) -> Int {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    a.lcm(b)
}

pub fn gcd(a: &Int, b: &Int) -> Int {
    a.gcd(b)
}

/// Floor modulus: result in `[0, |m|)`.
pub fn modulo(a: &Int, m: &Int) -> Int {
    a.mod_floor(&m.abs())
}

/// `p^e` for a possibly negative integer exponent.
pub fn pow_rat(p: &Int, e: &Int) -> Rat {
    let mag = e.abs().to_u32().expect("exponent too large");
    let v = num_traits::pow(p.clone(), mag as usize);
    if e.is_negative() {
        BigRational::new(BigInt::one(), v)
    } else {
        BigRational::from_integer(v)
    }
}

pub fn rat_pow(base: &Rat, e: u32) -> Rat {
    num_traits::pow(base.clone(), e as usize)
}

/// Lowest-terms rendering, `a` when the denominator is one.
pub fn format_rat(q: &Rat) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: Int = n.trim().parse().ok()?;
            let d: Int = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => s.parse::<Int>().ok().map(BigRational::from_integer),
    }
}

pub fn is_integer(q: &Rat) -> bool {
    q.denom().is_one()
}

pub fn is_prime(p: &Int) -> bool {
    if *p < int(2) {
        return false;
    }
    let mut d = int(2);
    while &d * &d <= *p {
        if (p % &d).is_zero() {
            return false;
        }
        d += 1;
    }
    true
}

pub fn to_i64(v: &Int) -> Option<i64> {
    v.to_i64()
}
