//! Exact lattice enumeration and boundary-counting certificates.
//!
//! The conjugation trace form `2 * sum_n |sigma_n(x)|^2` is an integer
//! quadratic form on any ideal of O_K, so balls in the embedding space can be
//! enumerated with no floating-point decisions: an exact LDL^T factorization
//! gives rational per-coordinate ranges whose endpoints are floors of shifted
//! square roots, each resolved by integer comparisons. Floating point only
//! seeds the initial guesses.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::exact::{rat_i, ratio_to_f64};
use crate::field::{det_rational, FieldDescriptor};
use crate::ideal::{IdealHnf, Ring};
use crate::{Error, Result};

/// A full-rank sublattice of O_K with its doubled Gram matrix
/// `gram[i][j] = Tr_{K/Q}(b_i * tau(b_j))` and an exact LDL^T factorization.
#[derive(Clone, Debug)]
pub struct LatticeBasis {
    /// Basis vectors as integer coordinates over the O_K basis.
    pub rows: Vec<Vec<i128>>,
    /// Doubled Gram matrix of the conjugation trace form.
    pub gram: Vec<Vec<i128>>,
    /// Norm of the underlying ideal.
    pub norm: i128,
    diag: Vec<BigRational>,
    upper: Vec<Vec<BigRational>>,
}

impl LatticeBasis {
    /// Build from a top-ring ideal; verifies `det(gram) = norm^2 |disc_K|`
    /// and positive definiteness, then size-reduces the basis.
    pub fn from_ideal(desc: &FieldDescriptor, ideal: &IdealHnf) -> Result<Self> {
        if ideal.ring != Ring::Top {
            return Err(Error::Invariant(
                "lattice enumeration expects a top-ring ideal".into(),
            ));
        }
        let base_gram = desc.trace_gram()?;
        let dim = desc.dim;
        let mut rows = ideal.mat.clone();
        let mut gram = pair_gram(&base_gram, &rows, dim)?;

        // Determinant invariant ties the form, the ideal, and the field.
        let gram_rat: Vec<Vec<BigRational>> = gram
            .iter()
            .map(|r| r.iter().map(|&v| rat_i(v)).collect())
            .collect();
        let det = det_rational(&gram_rat);
        let expected = rat_i(ideal.norm) * rat_i(ideal.norm) * rat_i(desc.disc_k_field.abs());
        if det != expected {
            return Err(Error::Invariant(format!(
                "lattice determinant {det} differs from norm^2 |disc| = {expected}"
            )));
        }

        size_reduce(&mut rows, &mut gram);
        let (diag, upper) = ldl(&gram)?;
        Ok(LatticeBasis {
            rows,
            gram,
            norm: ideal.norm,
            diag,
            upper,
        })
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// `sum_n |sigma_n(x)|^2` of an integer combination, as an exact integer.
    pub fn form_value(&self, combo: &[i128]) -> i128 {
        let mut q = 0i128;
        for i in 0..combo.len() {
            for j in 0..combo.len() {
                q += self.gram[i][j] * combo[i] * combo[j];
            }
        }
        debug_assert!(q % 2 == 0);
        q / 2
    }

    /// Squared minimum of the form over nonzero lattice vectors.
    pub fn shortest_sq(&self) -> Result<i128> {
        let bound = (0..self.rank())
            .map(|i| self.gram[i][i] / 2)
            .min()
            .ok_or_else(|| Error::Invariant("empty lattice basis".into()))?;
        let mut best = bound;
        self.walk_ball(&rat_i(bound), &mut |combo: &[i128]| {
            let q = self.form_value(combo);
            if q < best {
                best = q;
            }
            Ok(())
        })?;
        Ok(best)
    }

    /// All nonzero lattice points with `sum_n |sigma_n(x)|^2 <= bound`,
    /// as O_K coordinates.
    pub fn enumerate_ball(&self, bound: &BigRational) -> Result<Vec<Vec<i128>>> {
        let mut out = Vec::new();
        self.walk_ball(bound, &mut |combo: &[i128]| {
            out.push(self.combo_coords(combo));
            Ok(())
        })?;
        Ok(out)
    }

    /// Visit every nonzero integer combination with form value within the
    /// bound. The visitor receives basis combinations, not O_K coordinates.
    pub fn walk_ball(
        &self,
        bound: &BigRational,
        visit: &mut dyn FnMut(&[i128]) -> Result<()>,
    ) -> Result<()> {
        if bound.is_negative() {
            return Ok(());
        }
        let r = self.rank();
        let mut combo = vec![0i128; r];
        // The LDL form works on the doubled Gram, so the budget is 2*bound.
        let budget = bound * rat_i(2);
        self.descend(r, &budget, &mut combo, visit)
    }

    fn descend(
        &self,
        level: usize,
        budget: &BigRational,
        combo: &mut Vec<i128>,
        visit: &mut dyn FnMut(&[i128]) -> Result<()>,
    ) -> Result<()> {
        if level == 0 {
            if combo.iter().any(|&v| v != 0) {
                visit(combo)?;
            }
            return Ok(());
        }
        let i = level - 1;
        let mut center = BigRational::zero();
        for j in (i + 1)..self.rank() {
            center += &self.upper[i][j] * rat_i(combo[j]);
        }
        let t = budget / &self.diag[i];
        let lo = -floor_sqrt_shift(&t, &(-&center));
        let hi = floor_sqrt_shift(&t, &center);
        let lo = big_to_i128(&lo)?;
        let hi = big_to_i128(&hi)?;
        for y in lo..=hi {
            combo[i] = y;
            let off = rat_i(y) + &center;
            let used = &self.diag[i] * &off * &off;
            let rest = budget - &used;
            debug_assert!(!rest.is_negative());
            self.descend(i, &rest, combo, visit)?;
        }
        combo[i] = 0;
        Ok(())
    }

    /// O_K coordinates of an integer combination of the basis rows.
    pub fn combo_coords(&self, combo: &[i128]) -> Vec<i128> {
        let dim = self.rows[0].len();
        let mut out = vec![0i128; dim];
        for (i, &c) in combo.iter().enumerate() {
            if c != 0 {
                for d in 0..dim {
                    out[d] += c * self.rows[i][d];
                }
            }
        }
        out
    }
}

fn pair_gram(
    base_gram: &[Vec<i128>],
    rows: &[Vec<i128>],
    dim: usize,
) -> Result<Vec<Vec<i128>>> {
    let r = rows.len();
    let mut gram = vec![vec![0i128; r]; r];
    for a in 0..r {
        for b in 0..r {
            let mut acc = 0i128;
            for i in 0..dim {
                if rows[a][i] == 0 {
                    continue;
                }
                for j in 0..dim {
                    acc = acc
                        .checked_add(
                            rows[a][i]
                                .checked_mul(base_gram[i][j])
                                .and_then(|v| v.checked_mul(rows[b][j]))
                                .ok_or_else(|| {
                                    Error::Unsupported("Gram entry overflows".into())
                                })?,
                        )
                        .ok_or_else(|| Error::Unsupported("Gram entry overflows".into()))?;
                }
            }
            gram[a][b] = acc;
        }
    }
    Ok(gram)
}

/// Greedy pairwise size reduction: repeatedly subtract rounded projections
/// and reorder by norm. Keeps the lattice fixed while shrinking the diagonal,
/// which keeps later enumerations shallow.
fn size_reduce(rows: &mut [Vec<i128>], gram: &mut [Vec<i128>]) {
    let r = rows.len();
    let mut changed = true;
    let mut rounds = 0;
    while changed && rounds < 64 {
        changed = false;
        rounds += 1;
        for i in 0..r {
            for j in 0..r {
                if i == j || gram[i][i] == 0 {
                    continue;
                }
                // Nearest integer to gram[j][i] / gram[i][i].
                let num = gram[j][i];
                let den = gram[i][i];
                let f = (2 * num + den).div_euclid(2 * den);
                if f == 0 {
                    continue;
                }
                let new_diag = gram[j][j] - 2 * f * gram[j][i] + f * f * gram[i][i];
                if new_diag >= gram[j][j] {
                    continue;
                }
                for d in 0..rows[j].len() {
                    rows[j][d] -= f * rows[i][d];
                }
                for t in 0..r {
                    gram[j][t] -= f * gram[i][t];
                }
                for t in 0..r {
                    gram[t][j] -= f * gram[t][i];
                }
                changed = true;
            }
        }
    }
}

/// Exact LDL^T of a positive definite rational matrix given as integers:
/// `A = U^T D U` with U unit upper triangular.
fn ldl(gram: &[Vec<i128>]) -> Result<(Vec<BigRational>, Vec<Vec<BigRational>>)> {
    let r = gram.len();
    let mut a: Vec<Vec<BigRational>> = gram
        .iter()
        .map(|row| row.iter().map(|&v| rat_i(v)).collect())
        .collect();
    let mut diag = vec![BigRational::zero(); r];
    let mut upper = vec![vec![BigRational::zero(); r]; r];
    for i in 0..r {
        let d = a[i][i].clone();
        if !d.is_positive() {
            return Err(Error::Invariant("trace form is not positive definite".into()));
        }
        diag[i] = d.clone();
        for j in (i + 1)..r {
            upper[i][j] = &a[i][j] / &d;
        }
        for x in (i + 1)..r {
            for y in (i + 1)..r {
                let sub = &d * &upper[i][x] * &upper[i][y];
                a[x][y] -= sub;
            }
        }
    }
    Ok((diag, upper))
}

fn big_to_i128(v: &BigInt) -> Result<i128> {
    v.to_i128()
        .ok_or_else(|| Error::Unsupported("enumeration range overflows".into()))
}

/// `floor(sqrt(t) - c)` for rational `t >= 0`, fully exact: a float seeds the
/// answer and integer comparisons certify it.
fn floor_sqrt_shift(t: &BigRational, c: &BigRational) -> BigInt {
    debug_assert!(!t.is_negative());
    let est = ratio_to_f64(t).max(0.0).sqrt() - ratio_to_f64(c);
    let mut n = BigInt::from(if est.is_finite() { est.floor() as i64 } else { 0 });
    // n fits iff n + c <= sqrt(t).
    let fits = |n: &BigInt| -> bool {
        let v = BigRational::from_integer(n.clone()) + c;
        !v.is_positive() || &v * &v <= *t
    };
    while !fits(&n) {
        n -= 1;
    }
    loop {
        let next = &n + 1;
        if fits(&next) {
            n = next;
        } else {
            break;
        }
    }
    n
}

/// Boundary-translate certificate from the Lipschitz counting principle: a
/// region of R^D whose boundary is covered by `pieces` Lipschitz images of a
/// unit cube with constant `lip` meets at most this many translates of a
/// lattice with minimum distance `lambda1`.
pub fn boundary_translate_bound(dim_r: u32, pieces: u32, lip: f64, lambda1: f64) -> f64 {
    let d = dim_r as f64;
    let ratio = (lip / lambda1).max(1.0);
    2.0 * d.powf(3.0 * d * d / 2.0) * pieces as f64 * ratio.powf(d - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::field::FieldElement;

    fn qi() -> FieldDescriptor {
        FieldDescriptor::imag_quadratic(1).unwrap()
    }

    #[test]
    fn gaussian_unit_lattice() {
        let f = qi();
        let unit = IdealHnf::unit(Ring::Top, 2);
        let lat = LatticeBasis::from_ideal(&f, &unit).unwrap();
        assert_eq!(lat.shortest_sq().unwrap(), 1);
        // Gauss circle: 1257 points within radius 20 of the origin,
        // excluding the origin itself makes 1256.
        let pts = lat.enumerate_ball(&rat(400, 1)).unwrap();
        assert_eq!(pts.len(), 1256);
        // Independent row-by-row count.
        let mut rowwise = 0i64;
        for x in -20i64..=20 {
            let rem = 400 - x * x;
            let y = (rem as f64).sqrt().floor() as i64;
            // adjust the float guess exactly
            let mut y = y;
            while (y + 1) * (y + 1) <= rem {
                y += 1;
            }
            while y * y > rem {
                y -= 1;
            }
            rowwise += 2 * y + 1;
        }
        assert_eq!(pts.len() as i64, rowwise - 1);
    }

    #[test]
    fn ideal_lattice_minimum() {
        let f = qi();
        // (1+i): index-2 sublattice, shortest vector 1+i of squared length 2.
        let p2 = IdealHnf::principal(&f, Ring::Top, &FieldElement::from_ints(&[1, 1])).unwrap();
        let lat = LatticeBasis::from_ideal(&f, &p2).unwrap();
        assert_eq!(lat.shortest_sq().unwrap(), 2);
        // (3): all coordinates multiples of 3.
        let p3 = IdealHnf::principal(&f, Ring::Top, &FieldElement::from_ints(&[3, 0])).unwrap();
        let lat3 = LatticeBasis::from_ideal(&f, &p3).unwrap();
        assert_eq!(lat3.shortest_sq().unwrap(), 9);
        let pts = lat3.enumerate_ball(&rat(9, 1)).unwrap();
        assert_eq!(pts.len(), 4);
        for p in &pts {
            assert!(p.iter().all(|&c| c % 3 == 0));
        }
    }

    #[test]
    fn quartic_lattice_torsion_shell() {
        let f = crate::config::load_descriptor("Qzeta5").unwrap();
        let unit = IdealHnf::unit(Ring::Top, 4);
        let lat = LatticeBasis::from_ideal(&f, &unit).unwrap();
        // Roots of unity sit at form value exactly N = 2; nothing is closer.
        assert_eq!(lat.shortest_sq().unwrap(), 2);
        let shell = lat.enumerate_ball(&rat(2, 1)).unwrap();
        // z^j (5 values incl. 1) and -z^j: exactly the 10 torsion points.
        assert_eq!(shell.len(), 10);
        for coords in &shell {
            let e = FieldElement::new(coords.iter().map(|&c| rat_i(c)).collect());
            assert!(f.is_torsion(&e).unwrap());
        }
    }

    #[test]
    fn certificate_anchor_values() {
        // D = 2, 4 pieces, L = lambda1: the certificate is exactly 512.
        let b = boundary_translate_bound(2, 4, 1.0, 1.0);
        assert!((b - 512.0).abs() < 1e-9);
        // Z^2 disk of radius 20: |count - area| is far below the bound.
        let f = qi();
        let unit = IdealHnf::unit(Ring::Top, 2);
        let lat = LatticeBasis::from_ideal(&f, &unit).unwrap();
        let count = lat.enumerate_ball(&rat(400, 1)).unwrap().len() as f64 + 1.0;
        let area = std::f64::consts::PI * 400.0;
        let bound = boundary_translate_bound(2, 4, 2.0 * 20.0, 1.0);
        assert!((count - area).abs() <= bound);
    }

    #[test]
    fn enumeration_respects_sublattice_and_bound() {
        let f = qi();
        let p5 = IdealHnf::principal(&f, Ring::Top, &FieldElement::from_ints(&[2, 1])).unwrap();
        let lat = LatticeBasis::from_ideal(&f, &p5).unwrap();
        let pts = lat.enumerate_ball(&rat(100, 1)).unwrap();
        for p in &pts {
            // Membership in the ideal and the exact bound.
            assert!(p5.contains_coords(p));
            let q = p[0] * p[0] + p[1] * p[1];
            assert!(q > 0 && q <= 100);
        }
        // Compare against a brute scan of the ambient lattice.
        let mut brute = 0;
        for x in -10i128..=10 {
            for y in -10i128..=10 {
                if (x != 0 || y != 0) && x * x + y * y <= 100 && p5.contains_coords(&[x, y]) {
                    brute += 1;
                }
            }
        }
        assert_eq!(pts.len(), brute);
    }
}
