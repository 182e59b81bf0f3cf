//! Exact angles, arcs, and argument-membership decisions.
//!
//! An [`Angle`] is `p*pi + r` with `p` a small rational and `r` an exact
//! rational radian offset. Because `pi` is irrational, two such angles are
//! equal only when both components match, and every strict comparison can be
//! settled by interval refinement.
//!
//! Deciding whether an algebraic point lies inside a half-open arc never
//! evaluates an arctangent: the point's quadrant comes from exact coordinate
//! signs, and within a quadrant the comparison against an endpoint reduces to
//! the sign of `cos(t0)*im - sin(t0)*re`. That sign can vanish only when the
//! endpoint is a rational multiple of pi (a point with algebraic coordinates
//! has an algebraic unit direction, while `exp(i(p*pi + r))` with rational
//! `r != 0` is transcendental), and those potential ties are settled exactly
//! through a squared-tangent identity in a quadratic field.

use std::cmp::Ordering;


use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::enclose::{pi, sin_cos, RInterval};
use crate::exact::{big, parse_decimal, rat, rat_i, ratio_to_f64, sqrt_interval, Quad};
use crate::{baseline_bits, max_bits, Error, Result};

/// Exact angle `pi_mult * pi + rad`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Angle {
    pub pi_mult: Rational64,
    pub rad: BigRational,
}

fn pi_mult_to_big(p: Rational64) -> BigRational {
    BigRational::new(big(*p.numer() as i128), big(*p.denom() as i128))
}

impl Angle {
    pub fn zero() -> Self {
        Angle {
            pi_mult: Rational64::zero(),
            rad: BigRational::zero(),
        }
    }

    /// `(n/d) * pi`.
    pub fn from_pi(n: i64, d: i64) -> Self {
        Angle {
            pi_mult: Rational64::new(n, d),
            rad: BigRational::zero(),
        }
    }

    pub fn from_rad(rad: BigRational) -> Self {
        Angle {
            pi_mult: Rational64::zero(),
            rad,
        }
    }

    pub fn two_pi() -> Self {
        Self::from_pi(2, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.pi_mult.is_zero() && self.rad.is_zero()
    }

    pub fn add(&self, o: &Angle) -> Angle {
        Angle {
            pi_mult: self.pi_mult + o.pi_mult,
            rad: &self.rad + &o.rad,
        }
    }

    pub fn sub(&self, o: &Angle) -> Angle {
        Angle {
            pi_mult: self.pi_mult - o.pi_mult,
            rad: &self.rad - &o.rad,
        }
    }

    pub fn neg(&self) -> Angle {
        Angle {
            pi_mult: -self.pi_mult,
            rad: -self.rad.clone(),
        }
    }

    pub fn half(&self) -> Angle {
        Angle {
            pi_mult: self.pi_mult / 2,
            rad: &self.rad / rat_i(2),
        }
    }

    pub fn add_pi(&self) -> Angle {
        Angle {
            pi_mult: self.pi_mult + Rational64::one(),
            rad: self.rad.clone(),
        }
    }

    /// Enclosure of the real value.
    pub fn value_interval(&self, bits: u32) -> RInterval {
        pi(bits + 4)
            .scale(&pi_mult_to_big(self.pi_mult))
            .shift(&self.rad)
    }

    pub fn to_f64(&self) -> f64 {
        self.pi_mult.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI
            + ratio_to_f64(&self.rad)
    }

    /// Exact sign. Terminates because `p*pi + r = 0` forces `p = r = 0`.
    pub fn sign(&self) -> i32 {
        if self.pi_mult.is_zero() && self.rad.is_zero() {
            return 0;
        }
        if self.rad.is_zero() {
            return if self.pi_mult.is_positive() { 1 } else { -1 };
        }
        if self.pi_mult.is_zero() {
            return if self.rad.is_positive() { 1 } else { -1 };
        }
        let mut bits = baseline_bits();
        loop {
            let iv = self.value_interval(bits);
            if let Some(s) = iv.sign() {
                if s != 0 {
                    return s;
                }
            }
            bits = bits.saturating_mul(2);
            assert!(
                bits <= max_bits(),
                "angle sign refinement exhausted; pi_mult={} rad={}",
                self.pi_mult,
                self.rad
            );
        }
    }

    pub fn cmp_angle(&self, other: &Angle) -> Ordering {
        match self.sub(other).sign() {
            0 => Ordering::Equal,
            s if s > 0 => Ordering::Greater,
            _ => Ordering::Less,
        }
    }

    /// Canonical representative in `[0, 2*pi)`.
    pub fn normalize(&self) -> Angle {
        let est = (self.to_f64() / (2.0 * std::f64::consts::PI)).floor();
        let k = if est.is_finite() { est as i64 } else { 0 };
        let mut cur = self.sub(&Angle::from_pi(2 * k, 1));
        while cur.sign() < 0 {
            cur = cur.add(&Angle::two_pi());
        }
        while cur.cmp_angle(&Angle::two_pi()) != Ordering::Less {
            cur = cur.sub(&Angle::two_pi());
        }
        cur
    }

    /// Parse an angle token: a decimal radian value (`1.5708`) or a pi
    /// expression (`pi`, `pi/3`, `3pi/2`, `1.5pi`, `-pi/4`).
    pub fn parse(s: &str) -> Result<Angle> {
        let t = s.trim();
        let bad = || Error::Config(format!("invalid angle token: {t:?}"));
        if let Some(idx) = t.find("pi") {
            let (pre, rest) = t.split_at(idx);
            let post = &rest[2..];
            let coeff: BigRational = match pre {
                "" | "+" => BigRational::one(),
                "-" => -BigRational::one(),
                other => parse_decimal(other)?,
            };
            let den: BigRational = if post.is_empty() {
                BigRational::one()
            } else if let Some(d) = post.strip_prefix('/') {
                let d: i64 = d.trim().parse().map_err(|_| bad())?;
                if d == 0 {
                    return Err(bad());
                }
                rat_i(d as i128)
            } else {
                return Err(bad());
            };
            let v = coeff / den;
            let n = v.numer().to_i64().ok_or_else(bad)?;
            let d = v.denom().to_i64().ok_or_else(bad)?;
            Ok(Angle::from_pi(n, d))
        } else {
            Ok(Angle::from_rad(parse_decimal(t)?))
        }
    }
}

/// Exact `cos(p * pi)` as a quadratic-field element, when its degree over the
/// rationals is at most two; `None` otherwise (degree >= 3, hence never equal
/// to any quadratic-field value).
pub fn cos_pi_rational(p: Rational64) -> Option<Quad> {
    let u0 = *p.numer();
    let v = *p.denom(); // > 0, reduced
    if v > 6 {
        return None;
    }
    let period = 2 * v;
    let um = u0.rem_euclid(period);
    let u = um.min(period - um); // cos symmetry about 0 and 2*pi
    let q = |n: i128, d: i128, m: i64| Some(Quad::new(rat(0, 1), rat(n, d), m));
    let r = |n: i128, d: i128| Some(Quad::from_rational(rat(n, d)));
    match (v, u) {
        (1, 0) => r(1, 1),
        (1, 1) => r(-1, 1),
        (2, 1) => r(0, 1),
        (3, 1) => r(1, 2),
        (3, 2) => r(-1, 2),
        (4, 1) => q(1, 2, 2),
        (4, 3) => q(-1, 2, 2),
        (5, 1) => Some(Quad::new(rat(1, 4), rat(1, 4), 5)),
        (5, 2) => Some(Quad::new(rat(-1, 4), rat(1, 4), 5)),
        (5, 3) => Some(Quad::new(rat(1, 4), rat(-1, 4), 5)),
        (5, 4) => Some(Quad::new(rat(-1, 4), rat(-1, 4), 5)),
        (6, 1) => q(1, 2, 3),
        (6, 5) => q(-1, 2, 3),
        _ => unreachable!("unreduced rational in cos_pi_rational: {p}"),
    }
}

/// Equality test between quadratic-field elements that may live in different
/// fields: distinct real quadratic fields intersect only in the rationals.
fn quad_eq_cross(x: &Quad, y: &Quad) -> bool {
    match (x.is_rational(), y.is_rational()) {
        (true, true) => x.a == y.a,
        (false, false) => x.m == y.m && x.a == y.a && x.b == y.b,
        _ => false,
    }
}

/// Exact comparison of a rational against `cos(theta)`.
///
/// Ties are possible only when `theta` is a rational multiple of pi whose
/// cosine is itself rational; every other case separates under refinement.
pub fn cmp_rational_vs_cos(r: &BigRational, theta: &Angle) -> Result<Ordering> {
    if theta.rad.is_zero() {
        if let Some(c) = cos_pi_rational(theta.pi_mult) {
            let d = Quad::from_rational(r.clone()).sub(&c)?;
            return Ok(match d.sign() {
                0 => Ordering::Equal,
                s if s > 0 => Ordering::Greater,
                _ => Ordering::Less,
            });
        }
    }
    let mut bits = baseline_bits();
    loop {
        let (_, c) = sin_cos(&theta.value_interval(bits), bits);
        if r > &c.hi {
            return Ok(Ordering::Greater);
        }
        if r < &c.lo {
            return Ok(Ordering::Less);
        }
        bits = bits.saturating_mul(2);
        if bits > max_bits() {
            return Err(Error::Precision(format!(
                "rational vs cos comparison did not separate at {} bits",
                max_bits()
            )));
        }
    }
}

/// A planar point with exact quadratic-field coordinates: `re` directly, and
/// the imaginary part as `im_sign * sqrt(im_sq)`.
#[derive(Clone, Debug)]
pub struct PlanarPoint {
    pub re: Quad,
    pub im_sq: Quad,
    pub im_sign: i32,
}

impl PlanarPoint {
    pub fn new(re: Quad, im_sq: Quad, im_sign: i32) -> Result<Self> {
        let s = im_sq.sign();
        if s < 0 {
            return Err(Error::Invariant("negative squared imaginary part".into()));
        }
        if (s == 0) != (im_sign == 0) {
            return Err(Error::Invariant(
                "imaginary sign inconsistent with squared magnitude".into(),
            ));
        }
        Ok(PlanarPoint {
            re,
            im_sq,
            im_sign: im_sign.signum(),
        })
    }

    /// Point `x + y*sqrt(d)*i` with rational `x`, `y` and `d > 0`.
    pub fn from_rational_parts(x: BigRational, y: BigRational, d: i64) -> Self {
        let im_sign = if y.is_zero() {
            0
        } else if y.is_positive() {
            1
        } else {
            -1
        };
        PlanarPoint {
            re: Quad::from_rational(x),
            im_sq: Quad::from_rational(&y * &y * rat_i(d as i128)),
            im_sign,
        }
    }

    pub fn is_origin(&self) -> bool {
        self.re.is_zero() && self.im_sq.is_zero()
    }

    /// Squared modulus as an exact field element.
    pub fn norm_sq(&self) -> Result<Quad> {
        self.re.mul(&self.re)?.add(&self.im_sq)
    }

    /// Octant-resolution angular class, ordered by argument in `[0, 2*pi)`:
    /// even classes are the four semiaxes, odd classes the open quadrants.
    pub fn class(&self) -> Result<u8> {
        let rs = self.re.sign();
        let is = self.im_sign;
        Ok(match (rs, is) {
            (1, 0) => 0,
            (1, 1) => 1,
            (0, 1) => 2,
            (-1, 1) => 3,
            (-1, 0) => 4,
            (-1, -1) => 5,
            (0, -1) => 6,
            (1, -1) => 7,
            _ => {
                return Err(Error::Invariant(
                    "angular class of the origin is undefined".into(),
                ))
            }
        })
    }

    pub fn re_interval(&self, bits: u32) -> RInterval {
        let (lo, hi) = self.re.interval(bits);
        RInterval::new(lo, hi)
    }

    pub fn im_interval(&self, bits: u32) -> RInterval {
        if self.im_sign == 0 {
            return RInterval::zero();
        }
        let (lo, hi) = self.im_sq.interval(bits);
        let lo = lo.max(BigRational::zero());
        let (slo, _) = sqrt_interval(&lo, bits);
        let (_, shi) = sqrt_interval(&hi, bits);
        if self.im_sign > 0 {
            RInterval::new(slo, shi)
        } else {
            RInterval::new(-shi, -slo)
        }
    }

    pub fn re_f64(&self) -> f64 {
        self.re.to_f64()
    }

    pub fn im_f64(&self) -> f64 {
        self.im_sign as f64 * self.im_sq.to_f64().max(0.0).sqrt()
    }

    /// Approximate argument in `[0, 2*pi)`, for reporting only.
    pub fn arg_f64(&self) -> f64 {
        let a = self.im_f64().atan2(self.re_f64());
        if a < 0.0 {
            a + 2.0 * std::f64::consts::PI
        } else {
            a
        }
    }
}

/// Angular class of an angle in `[0, 2*pi)`, on the same scale as
/// [`PlanarPoint::class`]. The value `2*pi` gets the past-the-end class 8.
fn angle_class(theta: &Angle) -> Result<u8> {
    if theta.rad.is_zero() {
        let p = theta.pi_mult;
        let half = Rational64::new(1, 2);
        debug_assert!(!p.is_negative() && p <= Rational64::new(2, 1));
        return Ok(if p.is_zero() {
            0
        } else if p < half {
            1
        } else if p == half {
            2
        } else if p < Rational64::one() {
            3
        } else if p == Rational64::one() {
            4
        } else if p < half * 3 {
            5
        } else if p == half * 3 {
            6
        } else if p < Rational64::new(2, 1) {
            7
        } else {
            8
        });
    }
    // Irrational-offset angle: never on an axis, so both signs resolve.
    let mut bits = baseline_bits();
    loop {
        let (s, c) = sin_cos(&theta.value_interval(bits), bits);
        if let (Some(ss), Some(cs)) = (s.sign(), c.sign()) {
            if ss != 0 && cs != 0 {
                return Ok(match (cs, ss) {
                    (1, 1) => 1,
                    (-1, 1) => 3,
                    (-1, -1) => 5,
                    (1, -1) => 7,
                    _ => unreachable!(),
                });
            }
        }
        bits = bits.saturating_mul(2);
        if bits > max_bits() {
            return Err(Error::Precision(
                "angle quadrant refinement exhausted".into(),
            ));
        }
    }
}

/// Exact comparison of the argument of `pt` (taken in `[0, 2*pi)`) against an
/// angle in `[0, 2*pi]`.
pub fn cmp_point_angle(pt: &PlanarPoint, theta: &Angle) -> Result<Ordering> {
    let cp = pt.class()?;
    let c0 = angle_class(theta)?;
    if cp != c0 {
        return Ok(cp.cmp(&c0));
    }
    if cp % 2 == 0 {
        // Shared semiaxis: the argument is pinned there.
        return Ok(Ordering::Equal);
    }
    // Same open quadrant. A tie requires the endpoint to be a rational
    // multiple of pi with cos(2*theta) of degree <= 2; check it exactly via
    // cos(2t) = (re^2 - im^2) / (re^2 + im^2).
    if theta.rad.is_zero() {
        if let Some(c) = cos_pi_rational(theta.pi_mult * 2) {
            let re2 = pt.re.mul(&pt.re)?;
            let n = re2.add(&pt.im_sq)?;
            let rhs = re2.sub(&pt.im_sq)?.div(&n)?;
            if quad_eq_cross(&c, &rhs) {
                return Ok(Ordering::Equal);
            }
        }
    }
    // Strict inequality now certain; the sign of
    // cos(theta)*im - sin(theta)*re equals the sign of arg(pt) - theta
    // within a common open quadrant.
    let mut bits = baseline_bits();
    loop {
        let (s, c) = sin_cos(&theta.value_interval(bits), bits);
        let cross = c
            .mul(&pt.im_interval(bits))
            .sub(&s.mul(&pt.re_interval(bits)));
        if let Some(sg) = cross.sign() {
            if sg > 0 {
                return Ok(Ordering::Greater);
            }
            if sg < 0 {
                return Ok(Ordering::Less);
            }
        }
        bits = bits.saturating_mul(2);
        if bits > max_bits() {
            return Err(Error::Precision(format!(
                "argument comparison did not separate at {} bits",
                max_bits()
            )));
        }
    }
}

/// Half-open arc `[lo, hi)` with `0 <= lo < hi <= 2*pi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    pub lo: Angle,
    pub hi: Angle,
}

impl Arc {
    pub fn new(lo: Angle, hi: Angle) -> Result<Self> {
        if lo.sign() < 0 {
            return Err(Error::Config("arc start below zero".into()));
        }
        if hi.cmp_angle(&Angle::two_pi()) == Ordering::Greater {
            return Err(Error::Config("arc end above 2*pi".into()));
        }
        if lo.cmp_angle(&hi) != Ordering::Less {
            return Err(Error::Config("arc must have positive length".into()));
        }
        Ok(Arc { lo, hi })
    }

    pub fn full() -> Self {
        Arc {
            lo: Angle::zero(),
            hi: Angle::two_pi(),
        }
    }

    pub fn length(&self) -> Angle {
        self.hi.sub(&self.lo)
    }

    pub fn half(&self) -> Arc {
        Arc {
            lo: self.lo.half(),
            hi: self.hi.half(),
        }
    }

    pub fn shift_pi(&self) -> Arc {
        Arc {
            lo: self.lo.add_pi(),
            hi: self.hi.add_pi(),
        }
    }

    pub fn contains_angle(&self, theta: &Angle) -> bool {
        theta.cmp_angle(&self.lo) != Ordering::Less && theta.cmp_angle(&self.hi) == Ordering::Less
    }

    pub fn contains_point(&self, pt: &PlanarPoint) -> Result<bool> {
        Ok(cmp_point_angle(pt, &self.lo)? != Ordering::Less
            && cmp_point_angle(pt, &self.hi)? == Ordering::Less)
    }

    pub fn contains_f64(&self, arg: f64) -> bool {
        arg >= self.lo.to_f64() && arg < self.hi.to_f64()
    }

    pub fn length_f64(&self) -> f64 {
        self.length().to_f64()
    }
}

/// Per-coordinate unions of disjoint arcs: the argument window `I` of a
/// count, one coordinate per archimedean place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcProduct {
    pub coords: Vec<Vec<Arc>>,
}

impl ArcProduct {
    /// Full window `[0, 2*pi)^n`.
    pub fn full(n: usize) -> Self {
        ArcProduct {
            coords: vec![vec![Arc::full()]; n],
        }
    }

    pub fn new(coords: Vec<Vec<Arc>>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Config("empty arc product".into()));
        }
        for arcs in &coords {
            if arcs.is_empty() {
                return Err(Error::Config("coordinate with no arcs".into()));
            }
            let mut sorted: Vec<&Arc> = arcs.iter().collect();
            sorted.sort_by(|a, b| a.lo.cmp_angle(&b.lo));
            for w in sorted.windows(2) {
                if w[0].hi.cmp_angle(&w[1].lo) == Ordering::Greater {
                    return Err(Error::Config("overlapping arcs in one coordinate".into()));
                }
            }
        }
        Ok(ArcProduct { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Product over coordinates of the total arc length, as a float.
    pub fn measure_f64(&self) -> f64 {
        self.coords
            .iter()
            .map(|arcs| arcs.iter().map(Arc::length_f64).sum::<f64>())
            .product()
    }

    /// The half-angle window: arguments of `b` such that the arguments of
    /// `b / conj(b)` (twice those of `b`, mod `2*pi`) land in `self`, within
    /// the fundamental domain that pins the first coordinate to `[0, pi)`.
    pub fn half_domain(&self) -> ArcProduct {
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(n, arcs)| {
                let mut out: Vec<Arc> = arcs.iter().map(Arc::half).collect();
                if n > 0 {
                    let shifted: Vec<Arc> = out.iter().map(Arc::shift_pi).collect();
                    out.extend(shifted);
                }
                out
            })
            .collect();
        ArcProduct { coords }
    }

    /// Exact membership for a vector of algebraic points, one per coordinate.
    pub fn contains_points(&self, pts: &[PlanarPoint]) -> Result<bool> {
        if pts.len() != self.coords.len() {
            return Err(Error::Invariant(format!(
                "point dimension {} vs window dimension {}",
                pts.len(),
                self.coords.len()
            )));
        }
        for (arcs, pt) in self.coords.iter().zip(pts) {
            let mut hit = false;
            for arc in arcs {
                if arc.contains_point(pt)? {
                    hit = true;
                    break;
                }
            }
            if !hit {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Float membership for sampling; arguments must already lie in
    /// `[0, 2*pi)`.
    pub fn contains_f64(&self, args: &[f64]) -> bool {
        self.coords
            .len()
            .eq(&args.len())
            .then(|| {
                self.coords
                    .iter()
                    .zip(args)
                    .all(|(arcs, &a)| arcs.iter().any(|arc| arc.contains_f64(a)))
            })
            .unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: i128, y: i128) -> PlanarPoint {
        PlanarPoint::from_rational_parts(rat_i(x), rat_i(y), 1)
    }

    #[test]
    fn parse_angles() {
        assert_eq!(Angle::parse("pi/2").unwrap(), Angle::from_pi(1, 2));
        assert_eq!(Angle::parse("3pi/2").unwrap(), Angle::from_pi(3, 2));
        assert_eq!(Angle::parse("1.5pi").unwrap(), Angle::from_pi(3, 2));
        assert_eq!(Angle::parse("2pi").unwrap(), Angle::from_pi(2, 1));
        assert_eq!(Angle::parse("-pi/4").unwrap(), Angle::from_pi(-1, 4));
        assert_eq!(Angle::parse("0.25").unwrap(), Angle::from_rad(rat(1, 4)));
        assert!(Angle::parse("pi/0").is_err());
        assert!(Angle::parse("2tau").is_err());
    }

    #[test]
    fn normalize_angles() {
        assert_eq!(
            Angle::from_pi(-1, 3).normalize(),
            Angle::from_pi(5, 3),
        );
        assert_eq!(Angle::from_pi(5, 2).normalize(), Angle::from_pi(1, 2));
        assert_eq!(Angle::from_pi(2, 1).normalize(), Angle::zero());
        let mixed = Angle {
            pi_mult: Rational64::new(2, 1),
            rad: rat(1, 10),
        };
        assert_eq!(mixed.normalize(), Angle::from_rad(rat(1, 10)));
    }

    #[test]
    fn angle_ordering() {
        let a = Angle::from_pi(1, 3);
        let b = Angle::from_rad(rat(21, 20)); // 1.05 > pi/3 ~ 1.047
        assert_eq!(a.cmp_angle(&b), Ordering::Less);
        assert_eq!(b.cmp_angle(&a), Ordering::Greater);
        assert_eq!(a.cmp_angle(&a.clone()), Ordering::Equal);
    }

    #[test]
    fn cos_values() {
        let c = cos_pi_rational(Rational64::new(1, 3)).unwrap();
        assert_eq!(c, Quad::from_rational(rat(1, 2)));
        let c = cos_pi_rational(Rational64::new(1, 5)).unwrap();
        assert_eq!(c, Quad::new(rat(1, 4), rat(1, 4), 5));
        assert!(cos_pi_rational(Rational64::new(1, 7)).is_none());
        // periodicity and reflection
        let c = cos_pi_rational(Rational64::new(11, 6)).unwrap();
        assert_eq!(c, Quad::new(rat(0, 1), rat(1, 2), 3));
        let c = cos_pi_rational(Rational64::new(-1, 2)).unwrap();
        assert_eq!(c, Quad::from_rational(rat(0, 1)));
    }

    #[test]
    fn rational_vs_cos() {
        let r = rat(1, 2);
        assert_eq!(
            cmp_rational_vs_cos(&r, &Angle::from_pi(1, 3)).unwrap(),
            Ordering::Equal
        );
        assert_eq!(
            cmp_rational_vs_cos(&rat(3, 5), &Angle::from_pi(1, 3)).unwrap(),
            Ordering::Greater
        );
        assert_eq!(
            cmp_rational_vs_cos(&rat(1, 2), &Angle::from_rad(rat_i(1))).unwrap(),
            Ordering::Less // cos(1) ~ 0.5403
        );
    }

    #[test]
    fn point_classes() {
        assert_eq!(pt(1, 0).class().unwrap(), 0);
        assert_eq!(pt(3, 1).class().unwrap(), 1);
        assert_eq!(pt(0, 2).class().unwrap(), 2);
        assert_eq!(pt(-1, 1).class().unwrap(), 3);
        assert_eq!(pt(-5, 0).class().unwrap(), 4);
        assert_eq!(pt(-1, -1).class().unwrap(), 5);
        assert_eq!(pt(0, -1).class().unwrap(), 6);
        assert_eq!(pt(2, -3).class().unwrap(), 7);
        assert!(pt(0, 0).class().is_err());
    }

    #[test]
    fn point_vs_angle_ties() {
        // (1, 1) sits exactly on pi/4.
        let p = pt(1, 1);
        assert_eq!(
            cmp_point_angle(&p, &Angle::from_pi(1, 4)).unwrap(),
            Ordering::Equal
        );
        assert_eq!(
            cmp_point_angle(&p, &Angle::from_pi(1, 3)).unwrap(),
            Ordering::Less
        );
        assert_eq!(
            cmp_point_angle(&p, &Angle::from_pi(1, 6)).unwrap(),
            Ordering::Greater
        );
        // (1, sqrt(3)) sits exactly on pi/3.
        let p = PlanarPoint::new(
            Quad::from_rational(rat_i(1)),
            Quad::from_rational(rat_i(3)),
            1,
        )
        .unwrap();
        assert_eq!(
            cmp_point_angle(&p, &Angle::from_pi(1, 3)).unwrap(),
            Ordering::Equal
        );
        // Golden-ratio slope: (1, sqrt(phi^2)) vs 2*pi/5 endpoints.
        // tan(2pi/5)^2 = 5 + 2*sqrt(5); take the point (1, sqrt(5+2sqrt5)).
        let p = PlanarPoint::new(
            Quad::from_rational(rat_i(1)),
            Quad::new(rat_i(5), rat_i(2), 5),
            1,
        )
        .unwrap();
        assert_eq!(
            cmp_point_angle(&p, &Angle::from_pi(2, 5)).unwrap(),
            Ordering::Equal
        );
        assert_eq!(
            cmp_point_angle(&p, &Angle::from_pi(3, 7)).unwrap(),
            Ordering::Less
        );
    }

    #[test]
    fn point_vs_angle_axes() {
        let p = pt(0, 5);
        assert_eq!(
            cmp_point_angle(&p, &Angle::from_pi(1, 2)).unwrap(),
            Ordering::Equal
        );
        assert_eq!(
            cmp_point_angle(&p, &Angle::from_pi(1, 4)).unwrap(),
            Ordering::Greater
        );
        assert_eq!(
            cmp_point_angle(&p, &Angle::two_pi()).unwrap(),
            Ordering::Less
        );
    }

    #[test]
    fn arcs_and_membership() {
        let arc = Arc::new(Angle::zero(), Angle::from_pi(1, 2)).unwrap();
        assert!(arc.contains_point(&pt(1, 0)).unwrap());
        assert!(arc.contains_point(&pt(1, 1)).unwrap());
        assert!(!arc.contains_point(&pt(0, 1)).unwrap()); // hi excluded
        assert!(!arc.contains_point(&pt(-1, 1)).unwrap());
        assert!(Arc::full().contains_point(&pt(-3, -4)).unwrap());
        assert!(Arc::new(Angle::from_pi(1, 2), Angle::from_pi(1, 3)).is_err());
    }

    #[test]
    fn window_products() {
        let w = ArcProduct::full(2);
        assert!((w.measure_f64() - 4.0 * std::f64::consts::PI * std::f64::consts::PI).abs() < 1e-12);
        let half = w.half_domain();
        // First coordinate [0, pi); second [0, pi) u [pi, 2pi).
        assert_eq!(half.coords[0].len(), 1);
        assert_eq!(half.coords[1].len(), 2);
        assert!(half.coords[0][0].hi == Angle::from_pi(1, 1));
        let quarter = ArcProduct::new(vec![vec![Arc::new(
            Angle::zero(),
            Angle::from_pi(1, 2),
        )
        .unwrap()]])
        .unwrap();
        let hd = quarter.half_domain();
        assert!(hd.coords[0][0].hi == Angle::from_pi(1, 4));
        assert!(hd.contains_points(&[pt(3, 1)]).unwrap());
        assert!(!hd.contains_points(&[pt(1, 1)]).unwrap()); // pi/4 excluded
        assert!(ArcProduct::new(vec![vec![
            Arc::new(Angle::zero(), Angle::from_pi(1, 2)).unwrap(),
            Arc::new(Angle::from_pi(1, 4), Angle::from_pi(1, 1)).unwrap(),
        ]])
        .is_err());
    }
}
