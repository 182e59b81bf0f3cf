//! Aggregate count of unit-circle algebraic numbers of degree at most two,
//! pooled across every imaginary quadratic field at once.
//!
//! A degree-two point on the unit circle of height `H` is a root of a
//! primitive integer quadratic `a*x^2 + b*x + a` with `a = H^2 >= 1`,
//! `|b| < 2a`, and `gcd(a, b) = 1`; its argument `theta` in `(0, pi)`
//! satisfies `cos(theta) = -b / (2a)`, and the conjugate root carries the
//! mirror argument `2*pi - theta`. Counting points with argument in a
//! half-open window `I` inside the upper half-circle therefore reduces to
//! counting lattice pairs `(a, b)` whose rational `-b/(2a)` lies in the
//! cosine image of `I`. Window membership is decided by exact
//! rational-versus-cosine comparisons, never by a floating-point filter:
//! for each `a` the admissible `b` form a contiguous run whose endpoints are
//! located by binary search on the exact comparison.
//!
//! The two rational points `1` and `-1` (height one, arguments `0` and `pi`)
//! join the count when their argument lies in the window and the height
//! bound is at least one. Each remaining pair generates the imaginary
//! quadratic field determined by the squarefree kernel of `4a^2 - b^2`,
//! which is how the aggregate census regroups into per-field counts.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;

use crate::angle::{cmp_rational_vs_cos, Angle, Arc};
use crate::exact::rat;
use crate::field::HeightBound;
use crate::{Error, Result};

/// Largest admissible `floor(H^2)`; above this the pair census (which grows
/// like `H^4`) stops being a desk-scale computation.
const MAX_A: i64 = 1_000_000;

/// One degree-two point on the unit circle with argument in the upper
/// half-circle: the root `exp(i*theta)` of `a*x^2 + b*x + a`.
///
/// `theta` is a display-grade float; the exact datum is the pair `(a, b)`
/// with `cos(theta) = -b/(2a)`. `field_kernel` is the squarefree kernel `d`
/// of `4a^2 - b^2`, so the point lives in `Q(sqrt(-d))`, and the point's
/// height is `sqrt(a)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggregatePoint {
    pub a: i64,
    pub b: i64,
    pub theta_f64_bits: u64,
    pub field_kernel: i64,
}

impl AggregatePoint {
    pub fn theta(&self) -> f64 {
        f64::from_bits(self.theta_f64_bits)
    }
}

fn require_upper(arc: &Arc) -> Result<()> {
    if arc.hi.cmp_angle(&Angle::from_pi(1, 1)) == Ordering::Greater {
        return Err(Error::Config(
            "aggregate window must lie in the upper half-circle [0, pi]; \
             reflect lower-half windows first"
                .into(),
        ));
    }
    Ok(())
}

fn a_limit(hbound: &HeightBound) -> Result<i64> {
    if hbound.h_sq.is_negative() {
        return Err(Error::Config("height bound must be non-negative".into()));
    }
    let floor = hbound.h_sq.floor().to_integer();
    let a_max = floor
        .to_i64()
        .ok_or_else(|| Error::Config("height bound out of range".into()))?;
    if a_max > MAX_A {
        return Err(Error::Config(format!(
            "height bound too large for the aggregate census (floor(H^2) = {a_max} > {MAX_A})"
        )));
    }
    Ok(a_max)
}

/// Smallest `b` in `[-2a+1, 2a]` with `-b/(2a) <= cos(endpoint)`, found by
/// binary search on the exact comparison. The argument `theta(b)` of the
/// pair `(a, b)` is increasing in `b`, so this is the first `b` whose
/// argument is `>= endpoint`. Returns `2a` when no admissible `b` qualifies
/// (the sentinel pair `b = 2a` has `-b/(2a) = -1 <= cos` always).
fn first_b_at_or_past(a: i64, endpoint: &Angle) -> Result<i64> {
    let q = |b: i64| rat(-(b as i128), 2 * a as i128);
    let passes = |b: i64| -> Result<bool> {
        Ok(cmp_rational_vs_cos(&q(b), endpoint)? != Ordering::Greater)
    };
    let mut left = -2 * a + 1;
    if passes(left)? {
        return Ok(left);
    }
    let mut right = 2 * a;
    while right - left > 1 {
        let mid = left + (right - left) / 2;
        if passes(mid)? {
            right = mid;
        } else {
            left = mid;
        }
    }
    Ok(right)
}

/// Inclusive range of `b` for which `(a, b)` has argument in `arc`
/// (possibly empty, signalled by `start > end`).
fn b_window(arc: &Arc, a: i64) -> Result<(i64, i64)> {
    let start = first_b_at_or_past(a, &arc.lo)?;
    let end = (first_b_at_or_past(a, &arc.hi)? - 1).min(2 * a - 1);
    Ok((start, end))
}

fn rational_endpoint_count(arc: &Arc, a_max: i64) -> i64 {
    if a_max < 1 {
        return 0;
    }
    let mut n = 0;
    if arc.contains_angle(&Angle::zero()) {
        n += 1;
    }
    if arc.contains_angle(&Angle::from_pi(1, 1)) {
        n += 1;
    }
    n
}

/// Exact count of unit-circle points of degree at most two with height at
/// most the bound and argument in `arc` (a half-open window inside
/// `[0, pi]`): the degree-two pair census plus the rational points whose
/// argument lies in the window.
pub fn count_aggregate(arc: &Arc, hbound: &HeightBound) -> Result<i64> {
    require_upper(arc)?;
    let a_max = a_limit(hbound)?;
    let pair_total: Result<i64> = (1..=a_max)
        .into_par_iter()
        .map(|a| -> Result<i64> {
            let (start, end) = b_window(arc, a)?;
            let mut n = 0i64;
            for b in start..=end {
                if a.gcd(&b) == 1 {
                    n += 1;
                }
            }
            Ok(n)
        })
        .try_reduce(|| 0, |x, y| Ok(x + y));
    Ok(pair_total? + rational_endpoint_count(arc, a_max))
}

/// Smallest-prime-factor table for `0..=limit`.
fn spf_table(limit: usize) -> Vec<u32> {
    let mut spf: Vec<u32> = (0..=limit as u32).collect();
    let mut p = 2usize;
    while p * p <= limit {
        if spf[p] == p as u32 {
            let mut m = p * p;
            while m <= limit {
                if spf[m] == m as u32 {
                    spf[m] = p as u32;
                }
                m += p;
            }
        }
        p += 1;
    }
    spf
}

fn kernel_spf(mut x: i64, spf: &[u32]) -> i64 {
    let mut kernel = 1i64;
    while x > 1 {
        let p = spf[x as usize] as i64;
        let mut e = 0u32;
        while x % p == 0 {
            x /= p;
            e += 1;
        }
        if e % 2 == 1 {
            kernel *= p;
        }
    }
    kernel
}

/// The degree-two points themselves, sorted by `(a, b)`. The rational
/// points `1` and `-1` are not listed (they belong to no quadratic field);
/// [`count_aggregate`] adds them when their argument lies in the window.
pub fn aggregate_points(arc: &Arc, hbound: &HeightBound) -> Result<Vec<AggregatePoint>> {
    require_upper(arc)?;
    let a_max = a_limit(hbound)?;
    if a_max < 1 {
        return Ok(Vec::new());
    }
    // 4a^2 - b^2 = (2a - b)(2a + b) with both factors in [1, 4a]; factoring
    // the two linear pieces against a smallest-prime-factor table is far
    // cheaper than trial division on the product. Exponent parities add, so
    // kernel(m*n) = (k_m / g) * (k_n / g) with g = gcd(k_m, k_n).
    let spf = spf_table(4 * a_max as usize);
    let per_a: Result<Vec<Vec<AggregatePoint>>> = (1..=a_max)
        .into_par_iter()
        .map(|a| -> Result<Vec<AggregatePoint>> {
            let (start, end) = b_window(arc, a)?;
            let mut v = Vec::new();
            for b in start..=end {
                if a.gcd(&b) != 1 {
                    continue;
                }
                let k1 = kernel_spf(2 * a - b, &spf);
                let k2 = kernel_spf(2 * a + b, &spf);
                let g = k1.gcd(&k2);
                let kernel = (k1 / g) * (k2 / g);
                let theta = (-(b as f64) / (2.0 * a as f64)).acos();
                v.push(AggregatePoint {
                    a,
                    b,
                    theta_f64_bits: theta.to_bits(),
                    field_kernel: kernel,
                });
            }
            Ok(v)
        })
        .collect();
    Ok(per_a?.concat())
}

/// Regroup the degree-two census by generating field: maps the squarefree
/// kernel `d` (the point lies in `Q(sqrt(-d))`) to the number of points.
pub fn group_by_field(arc: &Arc, hbound: &HeightBound) -> Result<BTreeMap<i64, i64>> {
    let mut groups = BTreeMap::new();
    for p in aggregate_points(arc, hbound)? {
        *groups.entry(p.field_kernel).or_insert(0) += 1;
    }
    Ok(groups)
}

/// Transport a window in the lower half-circle `[pi, 2*pi]` to the upper
/// half by subtracting `pi`. The map `alpha -> -alpha` preserves degree and
/// height and shifts the argument by `pi`, so the aggregate count over a
/// lower-half window equals the count over its reflection.
pub fn reflect_to_upper(arc: &Arc) -> Result<Arc> {
    let half = Angle::from_pi(1, 1);
    if arc.lo.cmp_angle(&half) == Ordering::Less {
        return Err(Error::Config(
            "reflect_to_upper expects a window inside the lower half-circle [pi, 2*pi]".into(),
        ));
    }
    Arc::new(arc.lo.sub(&half), arc.hi.sub(&half))
}

/// First-order prediction for [`count_aggregate`]: the census grows like
/// `(|cos I| / zeta(2)) * H^4` with `|cos I| = cos(lo) - cos(hi)`, one
/// power of `H^2` more than any single field contributes.
pub fn aggregate_main_term(arc: &Arc, hbound: &HeightBound) -> f64 {
    let cos_span = arc.lo.to_f64().cos() - arc.hi.to_f64().cos();
    let zeta2 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
    let h4 = hbound.h_f64().powi(4);
    cos_span / zeta2 * h4
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::ArcProduct;
    use crate::domain::RegionSF;
    use crate::exact::squarefree_kernel;
    use crate::field::FieldDescriptor;

    fn upper() -> Arc {
        Arc::new(Angle::zero(), Angle::from_pi(1, 1)).unwrap()
    }

    fn arc_pi(ln: i64, ld: i64, hn: i64, hd: i64) -> Arc {
        Arc::new(Angle::from_pi(ln, ld), Angle::from_pi(hn, hd)).unwrap()
    }

    fn h(s: &str) -> HeightBound {
        HeightBound::parse(s).unwrap()
    }

    #[test]
    fn height_one_census() {
        // Height one admits a = 1 only: pairs (1,-1), (1,0), (1,1) at
        // arguments pi/3, pi/2, 2*pi/3, plus the rational point 1 at
        // argument 0. The point -1 sits at pi, outside [0, pi).
        assert_eq!(count_aggregate(&upper(), &h("1")).unwrap(), 4);
        // [0, pi/2): argument 0 and pi/3 only.
        assert_eq!(count_aggregate(&arc_pi(0, 1, 1, 2), &h("1")).unwrap(), 2);
        // Exact tie at the closed lower endpoint: pi/3 is included.
        assert_eq!(count_aggregate(&arc_pi(1, 3, 1, 2), &h("1")).unwrap(), 1);
        // Exact tie at the open upper endpoint: pi/3 is excluded.
        assert_eq!(count_aggregate(&arc_pi(0, 1, 1, 3), &h("1")).unwrap(), 1);
        // Below height one nothing qualifies.
        assert_eq!(count_aggregate(&upper(), &h("0.5")).unwrap(), 0);
    }

    #[test]
    fn binary_search_matches_per_pair_scan() {
        // Independent path: test every pair directly against the window
        // with the exact comparison, no binary search involved.
        let windows = [
            upper(),
            arc_pi(1, 5, 2, 5),
            arc_pi(1, 3, 1, 2),
            arc_pi(1, 6, 5, 6),
            Arc::new(
                Angle::from_rad(rat(1, 2)),
                Angle::from_rad(rat(5, 2)),
            )
            .unwrap(),
        ];
        let hb = h("4");
        let a_max = a_limit(&hb).unwrap();
        for arc in &windows {
            let mut slow = 0i64;
            for a in 1..=a_max {
                for b in (-2 * a + 1)..=(2 * a - 1) {
                    if a.gcd(&b) != 1 {
                        continue;
                    }
                    let q = rat(-(b as i128), 2 * a as i128);
                    let ge_lo =
                        cmp_rational_vs_cos(&q, &arc.lo).unwrap() != Ordering::Greater;
                    let lt_hi =
                        cmp_rational_vs_cos(&q, &arc.hi).unwrap() == Ordering::Greater;
                    if ge_lo && lt_hi {
                        slow += 1;
                    }
                }
            }
            slow += rational_endpoint_count(arc, a_max);
            assert_eq!(
                count_aggregate(arc, &hb).unwrap(),
                slow,
                "window [{}, {})",
                arc.lo.to_f64(),
                arc.hi.to_f64()
            );
        }
    }

    #[test]
    fn negating_the_middle_coefficient_reflects_the_window() {
        // b -> -b sends theta to pi - theta. With endpoints at odd
        // fifths of pi no pair can sit on a boundary (those cosines are
        // quadratic irrationals), so half-open conventions cannot bite.
        let left = arc_pi(1, 5, 2, 5);
        let right = arc_pi(3, 5, 4, 5);
        let hb = h("6");
        assert_eq!(
            count_aggregate(&left, &hb).unwrap(),
            count_aggregate(&right, &hb).unwrap()
        );
    }

    #[test]
    fn lower_half_windows_reflect() {
        let lower = arc_pi(6, 5, 7, 5);
        let reflected = reflect_to_upper(&lower).unwrap();
        assert_eq!(reflected, arc_pi(1, 5, 2, 5));
        assert!(reflect_to_upper(&arc_pi(1, 5, 2, 5)).is_err());
        assert!(count_aggregate(&lower, &h("3")).is_err());
    }

    #[test]
    fn regroup_matches_per_field_enumeration() {
        // Every degree-two point with kernel d is a norm-one element of
        // Q(sqrt(-d)) and vice versa; the only extra element the per-field
        // enumeration sees on [0, pi) is the rational point 1.
        let hb = h("3");
        let groups = group_by_field(&upper(), &hb).unwrap();
        let total: i64 = groups.values().sum();
        assert_eq!(
            total + rational_endpoint_count(&upper(), 9),
            count_aggregate(&upper(), &hb).unwrap()
        );
        for d in [1i64, 2, 3, 5, 7] {
            let desc = FieldDescriptor::imag_quadratic(d).unwrap();
            let arcs = ArcProduct::new(vec![vec![upper()]]).unwrap();
            let region = RegionSF::new(&desc, arcs).unwrap();
            let pts = crate::oracle::enumerate_norm_one(&desc, &region, &hb).unwrap();
            let expect = pts.len() as i64 - 1;
            assert_eq!(
                groups.get(&d).copied().unwrap_or(0),
                expect,
                "kernel d = {d}"
            );
        }
    }

    #[test]
    fn census_grows_one_power_faster_than_any_field() {
        let hb10 = h("10");
        let hb30 = h("30");
        let c10 = count_aggregate(&upper(), &hb10).unwrap();
        let c30 = count_aggregate(&upper(), &hb30).unwrap();
        // Quartic growth: tripling the height bound multiplies the census
        // by about 81; quadratic per-field growth would give about 9.
        assert!(c30 > 40 * c10, "c10 = {c10}, c30 = {c30}");
        let predicted = aggregate_main_term(&upper(), &hb30);
        let ratio = c30 as f64 / predicted;
        assert!(
            (ratio - 1.0).abs() < 0.05,
            "census {c30} vs predicted {predicted}"
        );

        // A single field really does grow one power slower.
        let qi = FieldDescriptor::imag_quadratic(1).unwrap();
        let full = crate::domain::full_region(&qi).unwrap();
        let (f10, _) = crate::sieve::count_norm_one(&qi, &full, &hb10, false).unwrap();
        let (f30, _) = crate::sieve::count_norm_one(&qi, &full, &hb30, false).unwrap();
        assert!(f30 < 20 * f10, "field ratio unexpectedly large: {f10} -> {f30}");
        assert!(f30 > 4 * f10, "field ratio unexpectedly small: {f10} -> {f30}");
    }

    #[test]
    fn listed_points_carry_consistent_data() {
        let pts = aggregate_points(&upper(), &h("2")).unwrap();
        // Sorted by (a, b), heights within bound, kernels squarefree.
        for w in pts.windows(2) {
            assert!((w[0].a, w[0].b) < (w[1].a, w[1].b));
        }
        for p in &pts {
            assert!(p.a >= 1 && p.a <= 4);
            assert!(p.b.abs() < 2 * p.a);
            assert_eq!(p.a.gcd(&p.b), 1);
            let disc = 4 * (p.a as i128) * (p.a as i128) - (p.b as i128) * (p.b as i128);
            let (kernel, cof) = squarefree_kernel(disc);
            assert_eq!(kernel, p.field_kernel as i128);
            assert_eq!(kernel * cof * cof, disc);
            let expect = (-(p.b as f64) / (2.0 * p.a as f64)).acos();
            assert_eq!(p.theta(), expect);
            assert!(p.theta() > 0.0 && p.theta() < std::f64::consts::PI);
        }
        // Window additivity at a finer height: quarters of the upper half
        // partition it.
        let hb = h("5");
        let whole = count_aggregate(&upper(), &hb).unwrap();
        let parts: i64 = (0..4)
            .map(|i| count_aggregate(&arc_pi(i, 4, i + 1, 4), &hb).unwrap())
            .sum();
        assert_eq!(whole, parts);
    }
}
