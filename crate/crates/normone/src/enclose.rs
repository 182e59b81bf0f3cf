//! Certified enclosures: rational interval arithmetic with pi, sin/cos, and
//! arctan kernels.
//!
//! Endpoints are exact rationals, so interval operations never round inward;
//! `shrink` rounds outward to dyadic endpoints to cap coefficient growth.
//! Transcendental kernels carry explicit Taylor remainder bounds.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::sync::Mutex;

use crate::exact::{rat_i, ratio_to_f64, sqrt_interval};

/// Closed interval with exact rational endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct RInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "inverted interval");
        RInterval { lo, hi }
    }

    pub fn point(v: BigRational) -> Self {
        RInterval {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn zero() -> Self {
        Self::point(BigRational::zero())
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn mid_f64(&self) -> f64 {
        (ratio_to_f64(&self.lo) + ratio_to_f64(&self.hi)) / 2.0
    }

    pub fn add(&self, o: &RInterval) -> RInterval {
        RInterval {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn sub(&self, o: &RInterval) -> RInterval {
        RInterval {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
        }
    }

    pub fn neg(&self) -> RInterval {
        RInterval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    pub fn mul(&self, o: &RInterval) -> RInterval {
        let cands = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        RInterval { lo, hi }
    }

    pub fn scale(&self, c: &BigRational) -> RInterval {
        if c.is_negative() {
            RInterval {
                lo: &self.hi * c,
                hi: &self.lo * c,
            }
        } else {
            RInterval {
                lo: &self.lo * c,
                hi: &self.hi * c,
            }
        }
    }

    pub fn shift(&self, c: &BigRational) -> RInterval {
        RInterval {
            lo: &self.lo + c,
            hi: &self.hi + c,
        }
    }

    /// Reciprocal; requires the interval to exclude zero.
    pub fn recip(&self) -> RInterval {
        assert!(
            self.lo.is_positive() || self.hi.is_negative(),
            "recip of interval containing zero"
        );
        RInterval {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        }
    }

    pub fn div(&self, o: &RInterval) -> RInterval {
        self.mul(&o.recip())
    }

    /// Enclosure of the square root; requires `lo >= 0`.
    pub fn sqrt(&self, bits: u32) -> RInterval {
        assert!(!self.lo.is_negative(), "sqrt of negative interval");
        let (lo, _) = sqrt_interval(&self.lo, bits);
        let (_, hi) = sqrt_interval(&self.hi, bits);
        RInterval { lo, hi }
    }

    /// Exact sign if determined: `Some(-1 | 0 | 1)`, else `None`.
    /// `Some(0)` only for the exact point zero.
    pub fn sign(&self) -> Option<i32> {
        if self.lo.is_positive() {
            Some(1)
        } else if self.hi.is_negative() {
            Some(-1)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        self.lo <= *v && *v <= self.hi
    }

    /// Round endpoints outward to denominator `2^bits`.
    pub fn outward(&self, bits: u32) -> RInterval {
        RInterval {
            lo: dyadic_floor(&self.lo, bits),
            hi: dyadic_ceil(&self.hi, bits),
        }
    }
}

fn dyadic_floor(v: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits as usize;
    let scaled = v * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.floor().to_integer(), scale)
}

fn dyadic_ceil(v: &BigRational, bits: u32) -> BigRational {
    let scale = BigInt::one() << bits as usize;
    let scaled = v * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.ceil().to_integer(), scale)
}

/// `atan(1/x)` for integer `x >= 2`, to within `2^-bits`: the alternating
/// Gregory series, with consecutive partial sums as the bracket.
fn atan_inv_int(x: i128, bits: u32) -> RInterval {
    let eps = BigRational::new(BigInt::one(), BigInt::one() << (bits as usize + 2));
    let x2 = rat_i(x * x);
    let mut term = rat_i(x).recip();
    let mut sum = BigRational::zero();
    let mut k = 0u32;
    loop {
        let contrib = &term / rat_i((2 * k + 1) as i128);
        if k % 2 == 0 {
            sum += &contrib;
        } else {
            sum -= &contrib;
        }
        term /= &x2;
        k += 1;
        let next = &term / rat_i((2 * k + 1) as i128);
        if next < eps {
            // Alternating: truth lies between consecutive partial sums.
            return if k % 2 == 0 {
                RInterval::new(sum.clone(), sum + next)
            } else {
                RInterval::new(&sum - &next, sum)
            };
        }
    }
}

/// Enclosure of pi to within `2^-bits` (Machin's formula), cached.
pub fn pi(bits: u32) -> RInterval {
    static CACHE: Mutex<Option<(u32, RInterval)>> = Mutex::new(None);
    let mut guard = CACHE.lock().unwrap();
    if let Some((b, iv)) = guard.as_ref() {
        if *b >= bits {
            return iv.clone().outward(bits + 8);
        }
    }
    let a5 = atan_inv_int(5, bits + 8).scale(&rat_i(16));
    let a239 = atan_inv_int(239, bits + 8).scale(&rat_i(4));
    let iv = a5.sub(&a239).outward(bits + 4);
    *guard = Some((bits, iv.clone()));
    iv
}

/// Taylor sin and cos at an exact rational `m` with `|m| <= 8`, remainder
/// bounded by the first dropped term's magnitude envelope.
fn sin_cos_taylor(m: &BigRational, bits: u32) -> (RInterval, RInterval) {
    assert!(m.abs() <= rat_i(8), "sin_cos_taylor needs reduced argument");
    // Round the argument to a dyadic first so powers stay cheap; the rounding
    // error (<= 2^-(bits+8)) propagates with derivative bound 1.
    let p = bits + 8;
    let md = dyadic_floor(m, p);
    let slop = BigRational::new(BigInt::one(), BigInt::one() << (p as usize - 1));
    let eps = BigRational::new(BigInt::one(), BigInt::one() << (bits as usize + 4));
    let m2 = &md * &md;
    // sin: sum_{k} (-1)^k md^(2k+1)/(2k+1)!; cos: (-1)^k md^(2k)/(2k)!
    let mut sin_sum = BigRational::zero();
    let mut cos_sum = BigRational::zero();
    let mut pow = BigRational::one(); // md^(2k)
    let mut fact_even = BigRational::one(); // (2k)!
    let mut fact_odd = BigRational::one(); // (2k+1)!
    let mut k = 0u64;
    loop {
        let even_term = &pow / &fact_even;
        let odd_term = &pow * &md / &fact_odd;
        if k % 2 == 0 {
            cos_sum += &even_term;
            sin_sum += &odd_term;
        } else {
            cos_sum -= &even_term;
            sin_sum -= &odd_term;
        }
        // Remainder after this k: next terms have magnitude <= |md|^(2k+2)/(2k+2)!
        let next_even = (&pow * &m2 / (&fact_even * rat_i(((2 * k + 1) * (2 * k + 2)) as i128)))
            .abs();
        if next_even < eps && k >= 1 {
            let r = &next_even + &slop;
            let sin_iv = RInterval::new(&sin_sum - &r, &sin_sum + &r).outward(bits + 2);
            let cos_iv = RInterval::new(&cos_sum - &r, &cos_sum + &r).outward(bits + 2);
            return (sin_iv, cos_iv);
        }
        pow *= &m2;
        fact_even *= rat_i(((2 * k + 1) * (2 * k + 2)) as i128);
        fact_odd *= rat_i(((2 * k + 2) * (2 * k + 3)) as i128);
        k += 1;
    }
}

/// Enclosures of `(sin t, cos t)` for an interval argument.
///
/// The argument is reduced mod 2 pi using the pi enclosure, evaluated at the
/// reduced midpoint, and widened by the interval half-width (derivative
/// bound 1 for both functions).
pub fn sin_cos(t: &RInterval, bits: u32) -> (RInterval, RInterval) {
    let two_pi = pi(bits + 16).scale(&rat_i(2));
    let mid = (&t.lo + &t.hi) / rat_i(2);
    // k = nearest integer to mid / 2pi, computed from the enclosure midpoint.
    let approx = ratio_to_f64(&mid) / (2.0 * std::f64::consts::PI);
    let k = approx.round() as i64;
    let shift = two_pi.scale(&rat_i(k as i128));
    let reduced = RInterval::point(mid.clone()).sub(&shift);
    let half_width = (&t.hi - &t.lo) / rat_i(2);
    if reduced.lo.abs() > rat_i(7) || reduced.hi.abs() > rat_i(7) {
        // Midpoint estimate was off (huge argument); fall back to one more
        // reduction round.
        let approx2 = reduced.mid_f64() / (2.0 * std::f64::consts::PI);
        let k2 = approx2.round() as i128;
        let reduced2 = reduced.sub(&two_pi.scale(&rat_i(k2)));
        return widen_sin_cos(&reduced2, &half_width, bits);
    }
    widen_sin_cos(&reduced, &half_width, bits)
}

fn widen_sin_cos(
    reduced: &RInterval,
    half_width: &BigRational,
    bits: u32,
) -> (RInterval, RInterval) {
    let mid = (&reduced.lo + &reduced.hi) / rat_i(2);
    let wid = (&reduced.hi - &reduced.lo) / rat_i(2) + half_width;
    let (s, c) = sin_cos_taylor(&mid, bits);
    let pad = RInterval::new(-wid.clone(), wid.clone());
    let clamp = |iv: RInterval| {
        let lo = iv.lo.clone().max(rat_i(-1));
        let hi = iv.hi.clone().min(rat_i(1));
        if lo <= hi {
            RInterval::new(lo, hi)
        } else {
            iv
        }
    };
    (clamp(s.add(&pad)), clamp(c.add(&pad)))
}

/// `atan(v)` for `v >= 0` given as an exact rational, to about `2^-bits`.
fn atan_nonneg(v: &BigRational, bits: u32) -> RInterval {
    assert!(!v.is_negative());
    if v > &BigRational::one() {
        // atan(v) = pi/2 - atan(1/v)
        let half_pi = pi(bits + 8).scale(&crate::exact::rat(1, 2));
        return half_pi.sub(&atan_nonneg(&v.recip(), bits + 2));
    }
    if v > &crate::exact::rat(1, 2) {
        // atan(v) = pi/4 + atan((v-1)/(v+1)), second argument in (-1/3, 0].
        let quarter_pi = pi(bits + 8).scale(&crate::exact::rat(1, 4));
        let w = (v - BigRational::one()) / (v + BigRational::one());
        return quarter_pi.sub(&atan_nonneg(&-w, bits + 2));
    }
    // Gregory series, |v| <= 1/2: alternating with ratio <= 1/4.
    let p = bits + 8;
    let vd = dyadic_floor(v, p);
    let slop = BigRational::new(BigInt::one(), BigInt::one() << (p as usize - 1));
    let eps = BigRational::new(BigInt::one(), BigInt::one() << (bits as usize + 4));
    let v2 = &vd * &vd;
    let mut term = vd.clone();
    let mut sum = BigRational::zero();
    let mut k = 0u32;
    loop {
        let contrib = &term / rat_i((2 * k + 1) as i128);
        if k % 2 == 0 {
            sum += &contrib;
        } else {
            sum -= &contrib;
        }
        term *= &v2;
        k += 1;
        let next = &term / rat_i((2 * k + 1) as i128);
        if next < eps {
            let (lo, hi) = if k % 2 == 0 {
                (sum.clone(), &sum + &next)
            } else {
                (&sum - &next, sum.clone())
            };
            return RInterval::new(lo - &slop, hi + &slop).outward(bits + 2);
        }
    }
}

/// Enclosure of `atan2(y, x)` in `[0, 2 pi)` for exact rational `y`, `x`,
/// not both zero. The branch cut convention matches argument windows
/// `[0, 2 pi)`: positive real axis maps to 0.
pub fn atan2_exact(y: &BigRational, x: &BigRational, bits: u32) -> RInterval {
    assert!(!(x.is_zero() && y.is_zero()), "atan2 at origin");
    let pi_iv = pi(bits + 8);
    if y.is_zero() {
        return if x.is_positive() {
            RInterval::zero()
        } else {
            pi_iv
        };
    }
    if x.is_zero() {
        return if y.is_positive() {
            pi_iv.scale(&crate::exact::rat(1, 2))
        } else {
            pi_iv.scale(&crate::exact::rat(3, 2))
        };
    }
    let base = atan_nonneg(&(y / x).abs(), bits + 2);
    match (x.is_positive(), y.is_positive()) {
        (true, true) => base,
        (false, true) => pi_iv.sub(&base),
        (false, false) => pi_iv.add(&base),
        (true, false) => pi_iv.scale(&rat_i(2)).sub(&base),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn close(iv: &RInterval, v: f64, tol: f64) {
        assert!(
            (iv.mid_f64() - v).abs() < tol,
            "interval {:?} vs {v}",
            iv.mid_f64()
        );
        assert!(ratio_to_f64(&iv.width()) < tol);
    }

    #[test]
    fn pi_enclosure() {
        let iv = pi(96);
        close(&iv, std::f64::consts::PI, 1e-14);
        assert!(iv.lo < iv.hi);
    }

    #[test]
    fn sin_cos_values() {
        let (s, c) = sin_cos(&RInterval::point(rat_i(1)), 96);
        close(&s, 1f64.sin(), 1e-14);
        close(&c, 1f64.cos(), 1e-14);
        // argument near 100: reduction path
        let (s, c) = sin_cos(&RInterval::point(rat_i(100)), 96);
        close(&s, 100f64.sin(), 1e-13);
        close(&c, 100f64.cos(), 1e-13);
        let (s, _) = sin_cos(&RInterval::point(rat(-7, 2)), 96);
        close(&s, (-3.5f64).sin(), 1e-13);
    }

    #[test]
    fn atan2_quadrants() {
        let cases = [
            (1, 1, std::f64::consts::FRAC_PI_4),
            (1, -1, 3.0 * std::f64::consts::FRAC_PI_4),
            (-1, -1, 5.0 * std::f64::consts::FRAC_PI_4),
            (-1, 1, 7.0 * std::f64::consts::FRAC_PI_4),
            (0, -1, std::f64::consts::PI),
            (1, 0, std::f64::consts::FRAC_PI_2),
        ];
        for (y, x, want) in cases {
            let iv = atan2_exact(&rat_i(y), &rat_i(x), 96);
            close(&iv, want, 1e-13);
        }
        close(&atan2_exact(&rat_i(0), &rat_i(1), 96), 0.0, 1e-13);
        // steep ratio exercises the reciprocal branch
        close(
            &atan2_exact(&rat_i(1000), &rat_i(1), 96),
            (1000f64).atan2(1.0),
            1e-13,
        );
    }
}
