//! Exact integer, rational, and quadratic-irrational helpers.
//!
//! Everything here is deterministic and allocation-honest: the counting
//! pipeline routes every boundary decision through these sign tests, so none
//! of them may approximate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// `BigInt` from a machine integer.
pub fn big(n: i128) -> BigInt {
    BigInt::from(n)
}

/// `BigRational` from a machine integer.
pub fn rat_i(n: i128) -> BigRational {
    BigRational::from_integer(big(n))
}

/// `BigRational` `n / d`.
pub fn rat(n: i128, d: i128) -> BigRational {
    BigRational::new(big(n), big(d))
}

/// Floor of `sqrt(n)` for `n >= 0`.
pub fn isqrt_i128(n: i128) -> i128 {
    debug_assert!(n >= 0);
    (n as u128).isqrt() as i128
}

/// Floor of `sqrt(r)` for a rational `r >= 0`.
///
/// Uses `floor(sqrt(p/q)) = floor(isqrt(p*q) / q)`, which is exact because no
/// integer can sit strictly between `isqrt(p*q)/q` and `sqrt(p*q)/q`.
pub fn floor_sqrt(r: &BigRational) -> BigInt {
    assert!(!r.is_negative(), "floor_sqrt of negative rational");
    let p = r.numer();
    let q = r.denom();
    (p * q).sqrt().div_floor(q)
}

/// Ceiling of `sqrt(r)` for a rational `r >= 0`.
pub fn ceil_sqrt(r: &BigRational) -> BigInt {
    let f = floor_sqrt(r);
    let fr = BigRational::from_integer(f.clone());
    if &fr * &fr == *r {
        f
    } else {
        f + 1
    }
}

/// Enclosure `[lo, hi]` of `sqrt(r)` with `hi - lo <= 2^-bits`.
pub fn sqrt_interval(r: &BigRational, bits: u32) -> (BigRational, BigRational) {
    assert!(!r.is_negative());
    let scale = BigInt::one() << (2 * bits as usize);
    let t = floor_sqrt(&(r * BigRational::from_integer(scale)));
    let den = BigRational::from_integer(BigInt::one() << (bits as usize));
    let lo = BigRational::from_integer(t.clone()) / den.clone();
    let hi = BigRational::from_integer(t + 1) / den;
    (lo, hi)
}

/// Squarefree kernel of `n > 0`: returns `(kernel, c)` with `n = kernel * c^2`
/// and `kernel` squarefree. Trial division; inputs here are desk-scale.
pub fn squarefree_kernel(n: i128) -> (i128, i128) {
    assert!(n > 0);
    let mut rest = n;
    let mut kernel = 1i128;
    let mut cof = 1i128;
    let mut p = 2i128;
    while p * p <= rest {
        if rest % p == 0 {
            let mut e = 0u32;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            if e % 2 == 1 {
                kernel *= p;
            }
            cof *= p.pow(e / 2);
        }
        p += 1;
    }
    (kernel * rest, cof)
}

/// Exact sign of `sum_i coef_i * sqrt(rad_i)` with `rad_i >= 1`.
///
/// Radicands are reduced to squarefree kernels and like terms merged; the
/// reduced terms are linearly independent over the rationals, so a nonzero
/// reduced sum is bounded away from zero and enclosure refinement terminates.
pub fn sqrt_sum_sign(terms: &[(BigRational, i64)]) -> i32 {
    let mut reduced: Vec<(i64, BigRational)> = Vec::new();
    for (coef, rad) in terms {
        if coef.is_zero() {
            continue;
        }
        assert!(*rad >= 1, "sqrt_sum_sign radicand must be positive");
        let (kernel, cof) = squarefree_kernel(*rad as i128);
        let c = coef * rat_i(cof);
        match reduced.iter_mut().find(|(k, _)| *k == kernel as i64) {
            Some((_, acc)) => *acc += c,
            None => reduced.push((kernel as i64, c)),
        }
    }
    reduced.retain(|(_, c)| !c.is_zero());
    match reduced.len() {
        0 => 0,
        1 => {
            let c = &reduced[0].1;
            if c.is_positive() {
                1
            } else {
                -1
            }
        }
        2 if reduced[0].1.is_positive() != reduced[1].1.is_positive() => {
            // a*sqrt(m) + b*sqrt(n) with opposite signs: compare a^2 m vs b^2 n.
            let (m, a) = &reduced[0];
            let (n, b) = &reduced[1];
            let left = a * a * rat_i(*m as i128);
            let right = b * b * rat_i(*n as i128);
            let pos_is_first = a.is_positive();
            match left.cmp(&right) {
                std::cmp::Ordering::Equal => 0,
                std::cmp::Ordering::Greater => {
                    if pos_is_first {
                        1
                    } else {
                        -1
                    }
                }
                std::cmp::Ordering::Less => {
                    if pos_is_first {
                        -1
                    } else {
                        1
                    }
                }
            }
        }
        _ => {
            let mut bits = 32u32;
            loop {
                let mut lo = BigRational::zero();
                let mut hi = BigRational::zero();
                for (rad, coef) in &reduced {
                    let (slo, shi) = sqrt_interval(&rat_i(*rad as i128), bits);
                    if coef.is_positive() {
                        lo += coef * &slo;
                        hi += coef * &shi;
                    } else {
                        lo += coef * &shi;
                        hi += coef * &slo;
                    }
                }
                if lo.is_positive() {
                    return 1;
                }
                if hi.is_negative() {
                    return -1;
                }
                bits *= 2;
                assert!(
                    bits <= 1 << 20,
                    "sqrt_sum_sign failed to separate; terms not reduced?"
                );
            }
        }
    }
}

/// Element `a + b*sqrt(m)` of a real quadratic extension, `m` squarefree.
///
/// `m = 1` encodes a plain rational (with `b` folded into `a`). Mixed-field
/// arithmetic is rejected; comparisons against rationals are always allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quad {
    pub a: BigRational,
    pub b: BigRational,
    pub m: i64,
}

impl Quad {
    pub fn new(a: BigRational, b: BigRational, m: i64) -> Self {
        assert!(m >= 1);
        let (kernel, cof) = squarefree_kernel(m as i128);
        let (a, b, m) = if kernel == 1 {
            (a + b * rat_i(cof), BigRational::zero(), 1)
        } else {
            (a, b * rat_i(cof), kernel as i64)
        };
        Self::canon(a, b, m)
    }

    /// Canonical form: a rational value always carries radicand 1, so that
    /// derived equality agrees with equality of real numbers.
    fn canon(a: BigRational, b: BigRational, m: i64) -> Quad {
        let m = if b.is_zero() { 1 } else { m };
        Quad { a, b, m }
    }

    pub fn from_rational(a: BigRational) -> Self {
        Quad {
            a,
            b: BigRational::zero(),
            m: 1,
        }
    }

    pub fn zero() -> Self {
        Self::from_rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Galois conjugate `a - b*sqrt(m)`.
    pub fn conj(&self) -> Self {
        Quad {
            a: self.a.clone(),
            b: -self.b.clone(),
            m: self.m,
        }
    }

    fn join(&self, other: &Quad) -> Result<i64> {
        if self.b.is_zero() {
            return Ok(other.m);
        }
        if other.b.is_zero() || self.m == other.m {
            return Ok(self.m);
        }
        Err(Error::Invariant(format!(
            "mixed quadratic fields sqrt({}) vs sqrt({})",
            self.m, other.m
        )))
    }

    pub fn add(&self, other: &Quad) -> Result<Quad> {
        let m = self.join(other)?;
        Ok(Self::canon(&self.a + &other.a, &self.b + &other.b, m))
    }

    pub fn sub(&self, other: &Quad) -> Result<Quad> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Quad {
        Quad {
            a: -self.a.clone(),
            b: -self.b.clone(),
            m: self.m,
        }
    }

    pub fn mul(&self, other: &Quad) -> Result<Quad> {
        let m = self.join(other)?;
        let rad = rat_i(m as i128);
        Ok(Self::canon(
            &self.a * &other.a + &self.b * &other.b * &rad,
            &self.a * &other.b + &self.b * &other.a,
            m,
        ))
    }

    pub fn scale(&self, c: &BigRational) -> Quad {
        Self::canon(&self.a * c, &self.b * c, self.m)
    }

    /// Multiplicative inverse; errors on zero.
    pub fn inv(&self) -> Result<Quad> {
        if self.is_zero() {
            return Err(Error::Invariant("division by zero Quad".into()));
        }
        let n = &self.a * &self.a - &self.b * &self.b * rat_i(self.m as i128);
        if n.is_zero() {
            return Err(Error::Invariant("Quad with zero norm; m a square?".into()));
        }
        Ok(Quad {
            a: &self.a / &n,
            b: -&self.b / &n,
            m: self.m,
        })
    }

    pub fn div(&self, other: &Quad) -> Result<Quad> {
        self.mul(&other.inv()?)
    }

    /// Exact sign as a real number (`sqrt(m) > 0` branch).
    pub fn sign(&self) -> i32 {
        sqrt_sum_sign(&[(self.a.clone(), 1), (self.b.clone(), self.m)])
    }

    /// Exact comparison with another element of the same field.
    pub fn cmp_quad(&self, other: &Quad) -> Result<std::cmp::Ordering> {
        let d = self.sub(other)?;
        Ok(match d.sign() {
            0 => std::cmp::Ordering::Equal,
            s if s > 0 => std::cmp::Ordering::Greater,
            _ => std::cmp::Ordering::Less,
        })
    }

    /// Enclosure `[lo, hi]` with width about `2^-bits`.
    pub fn interval(&self, bits: u32) -> (BigRational, BigRational) {
        if self.b.is_zero() {
            return (self.a.clone(), self.a.clone());
        }
        let (slo, shi) = sqrt_interval(&rat_i(self.m as i128), bits);
        if self.b.is_positive() {
            (&self.a + &self.b * slo, &self.a + &self.b * shi)
        } else {
            (&self.a + &self.b * shi, &self.a + &self.b * slo)
        }
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.a) + ratio_to_f64(&self.b) * (self.m as f64).sqrt()
    }
}

/// Round-to-nearest `f64` for a `BigRational` (good to an ulp; display only).
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// Parse a decimal literal (optionally signed, optional fraction part) into
/// an exact rational. This is the only numeric entry point for CLI values:
/// `1.5` means exactly `3/2`, never the nearest float.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::Config(format!("invalid decimal literal: {t:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let (sign, rest) = match t.strip_prefix('-') {
        Some(r) => (-1i32, r),
        None => (1, t.strip_prefix('+').unwrap_or(t)),
    };
    let mut parts = rest.splitn(2, '.');
    let int_part = parts.next().unwrap_or("");
    let frac_part = parts.next().unwrap_or("");
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    let mut v = BigRational::new(numer, denom);
    if sign < 0 {
        v = -v;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_and_ceil_sqrt() {
        assert_eq!(floor_sqrt(&rat(10, 1)), big(3));
        assert_eq!(ceil_sqrt(&rat(10, 1)), big(4));
        assert_eq!(floor_sqrt(&rat(9, 1)), big(3));
        assert_eq!(ceil_sqrt(&rat(9, 1)), big(3));
        assert_eq!(floor_sqrt(&rat(1, 2)), big(0));
        assert_eq!(floor_sqrt(&rat(9, 4)), big(1));
        assert_eq!(ceil_sqrt(&rat(9, 4)), big(2));
    }

    #[test]
    fn squarefree_kernels() {
        assert_eq!(squarefree_kernel(1), (1, 1));
        assert_eq!(squarefree_kernel(12), (3, 2));
        assert_eq!(squarefree_kernel(49), (1, 7));
        assert_eq!(squarefree_kernel(30), (30, 1));
    }

    #[test]
    fn sqrt_sum_signs() {
        // sqrt(2) + sqrt(3) - sqrt(5) - sqrt(6/10 adjusted): pick a known case.
        let s = sqrt_sum_sign(&[(rat_i(1), 2), (rat_i(1), 3), (rat_i(-1), 5)]);
        assert_eq!(s, 1); // 1.414 + 1.732 - 2.236 > 0
        let s = sqrt_sum_sign(&[(rat_i(1), 2), (rat_i(-1), 8)]);
        assert_eq!(s, -1); // sqrt(2) - 2 sqrt(2)
        let s = sqrt_sum_sign(&[(rat_i(3), 2), (rat_i(-1), 18)]);
        assert_eq!(s, 0); // 3 sqrt(2) - 3 sqrt(2)
        let s = sqrt_sum_sign(&[(rat(1, 1000000), 1), (rat_i(1), 2), (rat_i(-1), 2)]);
        assert_eq!(s, 1);
    }

    #[test]
    fn quad_arithmetic() {
        // golden ratio: x^2 = x + 1 with x = (1+sqrt5)/2
        let phi = Quad::new(rat(1, 2), rat(1, 2), 5);
        let sq = phi.mul(&phi).unwrap();
        let want = phi.add(&Quad::one()).unwrap();
        assert_eq!(sq, want);
        assert_eq!(phi.sign(), 1);
        assert_eq!(phi.conj().sign(), -1); // (1-sqrt5)/2 < 0
        let inv = phi.inv().unwrap();
        assert_eq!(phi.mul(&inv).unwrap(), Quad::one());
        // normalization folds square radicands
        let q = Quad::new(rat_i(0), rat_i(2), 4);
        assert!(q.is_rational());
        assert_eq!(q.a, rat_i(4));
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(parse_decimal("1.5").unwrap(), rat(3, 2));
        assert_eq!(parse_decimal("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_decimal("12").unwrap(), rat_i(12));
        assert_eq!(parse_decimal(".5").unwrap(), rat(1, 2));
        assert!(parse_decimal("1e5").is_err());
        assert!(parse_decimal("").is_err());
        assert!(parse_decimal("1.2.3").is_err());
    }
}
