//! Regression locks for hand-derived counts and point sets. Every value
//! here was computed independently (by hand or by the brute-force oracle
//! before the sieve existed) and is frozen; a change in any of them is a
//! correctness bug, not drift.

use normone::aggregate;
use normone::angle::{Angle, Arc, ArcProduct};
use normone::config::load_descriptor;
use normone::domain::{full_region, RegionSF};
use normone::exact::rat;
use normone::field::{FieldDescriptor, HeightBound};
use normone::{oracle, sieve};

fn region_for(desc: &FieldDescriptor, arcs: Vec<Vec<Arc>>) -> RegionSF {
    RegionSF::new(desc, ArcProduct::new(arcs).unwrap()).unwrap()
}

fn h(s: &str) -> HeightBound {
    HeightBound::parse(s).unwrap()
}

#[test]
fn torsion_counts_at_height_one() {
    for (d, want) in [(1i64, 4i64), (3, 6)] {
        let desc = FieldDescriptor::imag_quadratic(d).unwrap();
        let region = full_region(&desc).unwrap();
        let pts = oracle::enumerate_norm_one(&desc, &region, &h("1")).unwrap();
        assert_eq!(pts.len() as i64, want, "d = {d}");
        let (sieved, _) = sieve::count_norm_one(&desc, &region, &h("1"), false).unwrap();
        assert_eq!(sieved, want, "d = {d}");
        for p in &pts {
            assert!(desc.is_torsion(&p.alpha).unwrap());
        }
    }
}

#[test]
fn gaussian_sqrt5_census() {
    let qi = FieldDescriptor::imag_quadratic(1).unwrap();
    let region = full_region(&qi).unwrap();
    let pts = oracle::enumerate_norm_one(&qi, &region, &h("sqrt5")).unwrap();
    assert_eq!(pts.len(), 12, "4 torsion + 8 points above the split prime 5");
    let (sieved, _) = sieve::count_norm_one(&qi, &region, &h("sqrt5"), false).unwrap();
    assert_eq!(sieved, 12);
}

#[test]
fn gaussian_sqrt5_quarter_window_points() {
    // Arguments in [0, pi/2): 0 for 1, and the two split-prime points at
    // atan(4/3) and atan(3/4). The torsion point i sits exactly at pi/2 and
    // is excluded by the half-open window.
    let qi = FieldDescriptor::imag_quadratic(1).unwrap();
    let region = region_for(
        &qi,
        vec![vec![
            Arc::new(Angle::zero(), Angle::from_pi(1, 2)).unwrap(),
        ]],
    );
    let pts = oracle::enumerate_norm_one(&qi, &region, &h("sqrt5")).unwrap();
    let mut alphas: Vec<Vec<String>> = pts
        .iter()
        .map(|p| p.alpha.coords.iter().map(|c| c.to_string()).collect())
        .collect();
    alphas.sort();
    assert_eq!(
        alphas,
        vec![
            vec!["1".to_string(), "0".to_string()],
            vec!["3/5".to_string(), "4/5".to_string()],
            vec!["4/5".to_string(), "3/5".to_string()],
        ]
    );
}

#[test]
fn gaussian_height_five_census() {
    // Heights sqrt(1), sqrt(5), sqrt(13), sqrt(17), sqrt(25):
    // 4 + 8 + 8 + 8 + 8 points.
    let qi = FieldDescriptor::imag_quadratic(1).unwrap();
    let region = full_region(&qi).unwrap();
    let pts = oracle::enumerate_norm_one(&qi, &region, &h("5")).unwrap();
    assert_eq!(pts.len(), 36);
    let (sieved, _) = sieve::count_norm_one(&qi, &region, &h("5"), false).unwrap();
    assert_eq!(sieved, 36);
}

#[test]
fn quartic_torsion_census() {
    let zeta = load_descriptor("Qzeta5").unwrap();
    let region = full_region(&zeta).unwrap();
    let pts = oracle::enumerate_norm_one(&zeta, &region, &h("1")).unwrap();
    assert_eq!(pts.len(), 10, "tenth roots of unity");
    for p in &pts {
        assert!(zeta.is_torsion(&p.alpha).unwrap());
    }
    let (sieved, _) = sieve::count_norm_one(&zeta, &region, &h("1"), false).unwrap();
    assert_eq!(sieved, 10);
}

#[test]
fn gaussian_discrepancy_at_height_one() {
    let qi = FieldDescriptor::imag_quadratic(1).unwrap();
    let region = full_region(&qi).unwrap();
    let pts = oracle::enumerate_norm_one(&qi, &region, &h("1")).unwrap();
    let d = oracle::discrepancy(&qi, &pts).unwrap();
    assert_eq!(d.mode, "exact-scan");
    assert_eq!(d.value, 0.25, "four equally spaced points");
}

#[test]
fn aggregate_census_at_height_one() {
    // Pairs (1,-1), (1,0), (1,1) at arguments pi/3, pi/2, 2*pi/3, plus the
    // rational point 1 at argument 0.
    let upper = Arc::new(Angle::zero(), Angle::from_pi(1, 1)).unwrap();
    assert_eq!(aggregate::count_aggregate(&upper, &h("1")).unwrap(), 4);
}

#[test]
fn histogram_format_is_locked() {
    let qi = FieldDescriptor::imag_quadratic(1).unwrap();
    let region = full_region(&qi).unwrap();
    let pts = oracle::enumerate_norm_one(&qi, &region, &h("1")).unwrap();
    let rows = oracle::histogram(&pts, 4).unwrap();
    let csv = oracle::histogram_csv(&rows);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("bin_lo,bin_hi,count"));
    assert_eq!(
        lines.next(),
        Some("0.000000000000,1.570796326795,1"),
        "first bin holds only the point at argument 0"
    );
    assert_eq!(rows.iter().map(|r| r.2).sum::<u64>(), 4);
}

#[test]
fn leading_constants_are_locked() {
    // 2/pi^2 for the Gaussian field; 3*sqrt(3)/(2*pi^2) for Q(sqrt(-3)).
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let qi = FieldDescriptor::imag_quadratic(1).unwrap();
    assert!((sieve::leading_constant(&qi).unwrap() - 2.0 / pi2).abs() < 1e-9);
    let q3 = FieldDescriptor::imag_quadratic(3).unwrap();
    assert!(
        (sieve::leading_constant(&q3).unwrap() - 3.0 * 3.0f64.sqrt() / (2.0 * pi2)).abs() < 1e-9
    );
}

#[test]
fn split_prime_window_additivity() {
    // The eight norm-5 points split 3/1/3/1 over the quadrants together
    // with one torsion point each.
    let qi = FieldDescriptor::imag_quadratic(1).unwrap();
    let hb = h("sqrt5");
    let mut per_quadrant = Vec::new();
    for q in 0..4 {
        let region = region_for(
            &qi,
            vec![vec![
                Arc::new(Angle::from_pi(q, 2), Angle::from_pi(q + 1, 2)).unwrap(),
            ]],
        );
        let (c, _) = sieve::count_norm_one(&qi, &region, &hb, false).unwrap();
        per_quadrant.push(c);
    }
    assert_eq!(per_quadrant.iter().sum::<i64>(), 12);
    assert_eq!(per_quadrant, vec![3, 3, 3, 3]);
}

#[test]
fn window_endpoints_use_exact_ties() {
    // beta = 1 + 2i has argument atan(2) = 1.10714...; a window whose
    // rational endpoint equals a point's argument only by rounding must not
    // flip membership. alpha = psi(1+2i) = (-3+4i)/5 at argument
    // pi - atan(4/3) = 2.2142974...; windows pinned just around it.
    let qi = FieldDescriptor::imag_quadratic(1).unwrap();
    let hb = h("sqrt5");
    let tight = region_for(
        &qi,
        vec![vec![Arc::new(
            Angle::from_rad(rat(22142974, 10_000_000)),
            Angle::from_rad(rat(22142976, 10_000_000)),
        )
        .unwrap()]],
    );
    let pts = oracle::enumerate_norm_one(&qi, &tight, &hb).unwrap();
    assert_eq!(pts.len(), 1);
    let (sieved, _) = sieve::count_norm_one(&qi, &tight, &hb, false).unwrap();
    assert_eq!(sieved, 1);

    let just_below = region_for(
        &qi,
        vec![vec![Arc::new(
            Angle::from_rad(rat(22142970, 10_000_000)),
            Angle::from_rad(rat(22142974, 10_000_000)),
        )
        .unwrap()]],
    );
    let (below, _) = sieve::count_norm_one(&qi, &just_below, &hb, false).unwrap();
    assert_eq!(below, 0);
}
