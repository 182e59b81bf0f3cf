//! Field descriptors and exact arithmetic for the quadratic extension K/k.
//!
//! K is a totally complex quadratic extension of a totally real field k of
//! degree N over the rationals (N = 1 or 2 here). Elements are exact rational
//! coordinate vectors over an integral basis of O_K; every product, inverse,
//! norm, and conjugate is exact. Numeric embeddings are derived, not
//! configured: the loader picks a basis element generating K over k, splits
//! every basis element over k, and represents each archimedean place by exact
//! quadratic-field data plus one positive square root. That makes coordinate
//! signs, squared moduli, and argument comparisons decidable exactly.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::angle::PlanarPoint;
use crate::exact::{isqrt_i128, rat, rat_i, ratio_to_f64, Quad};
use crate::ideal::{IdealHnf, Ring};
use crate::{Error, Result};

/// Element of K: exact rational coordinates over the integral basis of O_K.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    pub coords: Vec<BigRational>,
}

impl FieldElement {
    pub fn new(coords: Vec<BigRational>) -> Self {
        FieldElement { coords }
    }

    pub fn from_ints(ints: &[i64]) -> Self {
        FieldElement {
            coords: ints.iter().map(|&c| rat_i(c as i128)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(BigRational::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.denom().is_one())
    }

    pub fn add(&self, o: &FieldElement) -> FieldElement {
        FieldElement {
            coords: self
                .coords
                .iter()
                .zip(&o.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, o: &FieldElement) -> FieldElement {
        FieldElement {
            coords: self
                .coords
                .iter()
                .zip(&o.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement {
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> FieldElement {
        FieldElement {
            coords: self.coords.iter().map(|a| a * c).collect(),
        }
    }

    /// Integer coordinates, if the element is integral.
    pub fn int_coords(&self) -> Option<Vec<i128>> {
        self.coords
            .iter()
            .map(|c| c.denom().is_one().then(|| c.numer().to_i128()).flatten())
            .collect()
    }
}

/// Element of the totally real subfield k, as coordinates over its basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubfieldElement {
    pub coords: Vec<BigRational>,
}

/// Numeric image of an element under the N archimedean places, with a
/// per-component error radius. Display and sampling use this; counting
/// decisions never do.
#[derive(Clone, Debug)]
pub struct EmbeddingVector {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub radius: Vec<f64>,
    pub bits: u32,
}

/// Exact embedding data for one archimedean place: every basis element maps
/// to `re_j + b_j * s * i` where `re_j`, `b_j` live in a real quadratic field
/// and `s = sqrt(s_sq) > 0` is one fixed positive square root per place.
#[derive(Clone, Debug)]
pub struct PlaceData {
    pub re: Vec<Quad>,
    pub b: Vec<Quad>,
    pub s_sq: Quad,
}

/// A ramified place of K/k: a prime P of O_k with extension p^2 = P O_K.
#[derive(Clone, Debug)]
pub struct RamifiedPair {
    pub p_base: IdealHnf,
    pub p_ext: IdealHnf,
    pub norm_base: i128,
}

/// Complete arithmetic data for K/k.
#[derive(Debug)]
pub struct FieldDescriptor {
    pub label: String,
    /// N: number of archimedean places of K (half the degree).
    pub n_places: usize,
    /// 2N = [K:Q].
    pub dim: usize,
    /// Rational structure constants: mult_table[i][j] = coordinates of
    /// basis_i * basis_j.
    pub mult_table: Vec<Vec<Vec<BigRational>>>,
    /// Same table with integer entries (products of integral elements are
    /// integral over an integral basis).
    pub mult_table_int: Vec<Vec<Vec<i128>>>,
    /// tau_mat[r][c]: coefficient of basis_r in tau(basis_c).
    pub tau_mat: Vec<Vec<i64>>,
    /// Basis of O_k written in K-coordinates (N elements).
    pub basis_k: Vec<FieldElement>,
    pub disc_k: i128,
    pub disc_k_field: i128,
    pub rel_disc_norm: i128,
    /// Ideal class representatives of O_k (the trivial class alone for every
    /// built-in field).
    pub class_reps: Vec<IdealHnf>,
    /// Fundamental units of O_k (N - 1 of them).
    pub units: Vec<FieldElement>,
    pub regulator: f64,
    pub ramified: Vec<RamifiedPair>,
    /// Exact embedding data per place.
    pub places: Vec<PlaceData>,
    /// (x_j, y_j, d) for N = 1: basis_j embeds as x_j + y_j*sqrt(d)*i.
    pub quad_embedding: Option<(Vec<BigRational>, Vec<BigRational>, i64)>,
    /// k-basis generator data: trace and norm of the second k-basis element,
    /// and the squarefree kernel used by its embeddings (N = 2 only).
    pub k_gen: Option<(BigRational, BigRational, i64)>,
    /// Inverse of an N x N submatrix of the k-basis coordinate matrix, with
    /// the chosen row indices, for projecting K-elements into k.
    k_proj: (Vec<usize>, Vec<Vec<BigRational>>),
    /// Cache: rational prime -> prime ideals of O_K above it.
    pub(crate) prime_cache_top: Mutex<HashMap<i128, Vec<(IdealHnf, u32, u32)>>>,
    /// Cache: rational prime -> prime ideals of O_k above it.
    pub(crate) prime_cache_base: Mutex<HashMap<i128, Vec<(IdealHnf, u32, u32)>>>,
}

/// Exact height bound `H`, stored as the rational `H^2` so that comparisons
/// against the exact `H(alpha)^{2N}` are rational comparisons.
///
/// Accepts plain decimal literals (`"1.5"`, `"12"`) and integer square roots
/// (`"sqrt5"`, `"sqrt(5)"`), which keeps bounds like `H = sqrt(5)` exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightBound {
    pub h_sq: BigRational,
    pub display: String,
}

impl HeightBound {
    pub fn parse(s: &str) -> Result<HeightBound> {
        let t = s.trim();
        let h_sq = if let Some(rest) = t.strip_prefix("sqrt") {
            let inner = rest
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .unwrap_or(rest);
            let v = crate::exact::parse_decimal(inner)?;
            if v.is_negative() {
                return Err(Error::Config(format!("negative height bound: {s}")));
            }
            v
        } else {
            let v = crate::exact::parse_decimal(t)?;
            if v.is_negative() {
                return Err(Error::Config(format!("negative height bound: {s}")));
            }
            &v * &v
        };
        Ok(HeightBound {
            h_sq,
            display: t.to_string(),
        })
    }

    pub fn from_integer(h: i64) -> HeightBound {
        HeightBound {
            h_sq: rat_i((h as i128) * (h as i128)),
            display: h.to_string(),
        }
    }

    /// `H^{2N}` as an exact rational.
    pub fn pow_2n(&self, n_places: usize) -> BigRational {
        let mut out = BigRational::one();
        for _ in 0..n_places {
            out *= &self.h_sq;
        }
        out
    }

    pub fn h_f64(&self) -> f64 {
        ratio_to_f64(&self.h_sq).sqrt()
    }

    /// Does an exact `H(alpha)^{2N}` value satisfy the bound?
    pub fn accepts(&self, n_places: usize, h_pow_2n: &Quad) -> Result<bool> {
        let bound = Quad::from_rational(self.pow_2n(n_places));
        Ok(h_pow_2n.cmp_quad(&bound)? != Ordering::Greater)
    }
}

/// Pre-ideal construction data handed to [`FieldDescriptor::assemble`].
pub struct RawDescriptor {
    pub label: String,
    pub n_places: usize,
    pub mult_table: Vec<Vec<Vec<BigRational>>>,
    pub tau_mat: Vec<Vec<i64>>,
    pub basis_k: Vec<Vec<BigRational>>,
    pub disc_k: i128,
    pub disc_k_field: i128,
    pub rel_disc_norm: i128,
    pub units: Vec<Vec<BigRational>>,
    pub regulator_claim: Option<f64>,
    /// Generators (k-coordinates, K-coordinates) of each ramified pair.
    pub ramified_gens: Vec<(Vec<Vec<BigRational>>, Vec<Vec<BigRational>>)>,
    /// Ideal class representatives as lists of k-coordinate generators;
    /// empty means the class group is trivial.
    pub class_reps: Vec<Vec<Vec<BigRational>>>,
}

// ---------------------------------------------------------------------------
// small exact linear algebra
// ---------------------------------------------------------------------------

pub(crate) fn solve_linear(
    mat: &[Vec<BigRational>],
    rhs: &[BigRational],
) -> Option<Vec<BigRational>> {
    let n = mat.len();
    let mut a: Vec<Vec<BigRational>> = mat
        .iter()
        .zip(rhs)
        .map(|(row, r)| {
            let mut v = row.clone();
            v.push(r.clone());
            v
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x /= &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=n {
                    let sub = &a[col][c] * &f;
                    a[r][c] -= sub;
                }
            }
        }
    }
    Some(a.iter().map(|row| row[n].clone()).collect())
}

/// Determinant of a small integer matrix by fraction-free elimination;
/// `None` on overflow. The matrix is consumed as scratch space.
fn det_int(a: &mut [Vec<i128>]) -> Option<i128> {
    let n = a.len();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for col in 0..n.saturating_sub(1) {
        if a[col][col] == 0 {
            let Some(pivot) = (col + 1..n).find(|&r| a[r][col] != 0) else {
                return Some(0);
            };
            a.swap(col, pivot);
            sign = -sign;
        }
        for r in col + 1..n {
            for c in col + 1..n {
                let num = a[col][col]
                    .checked_mul(a[r][c])?
                    .checked_sub(a[r][col].checked_mul(a[col][c])?)?;
                // Bareiss: the division by the previous pivot is exact.
                a[r][c] = num / prev;
            }
            a[r][col] = 0;
        }
        prev = a[col][col];
    }
    if n == 0 {
        return Some(1);
    }
    Some(sign * a[n - 1][n - 1])
}

pub fn det_rational(mat: &[Vec<BigRational>]) -> BigRational {
    let n = mat.len();
    let mut a: Vec<Vec<BigRational>> = mat.to_vec();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if !a[r][col].is_zero() {
                let f = &a[r][col] / &p;
                for c in col..n {
                    let sub = &a[col][c] * &f;
                    a[r][c] -= sub;
                }
            }
        }
    }
    det
}

// ---------------------------------------------------------------------------
// descriptor assembly
// ---------------------------------------------------------------------------

impl FieldDescriptor {
    /// Build and fully validate a descriptor from raw structural data.
    pub fn assemble(raw: RawDescriptor) -> Result<FieldDescriptor> {
        let n = raw.n_places;
        if n == 0 || n > 2 {
            return Err(Error::Unsupported(format!(
                "{} archimedean places; only 1 or 2 supported",
                n
            )));
        }
        let dim = 2 * n;
        if raw.mult_table.len() != dim
            || raw.mult_table.iter().any(|row| {
                row.len() != dim || row.iter().any(|e| e.len() != dim)
            })
        {
            return Err(Error::Config("multiplication table shape mismatch".into()));
        }
        if raw.tau_mat.len() != dim || raw.tau_mat.iter().any(|r| r.len() != dim) {
            return Err(Error::Config("conjugation matrix shape mismatch".into()));
        }
        if raw.basis_k.len() != n || raw.units.len() != n - 1 {
            return Err(Error::Config(
                "subfield basis or unit list has wrong length".into(),
            ));
        }
        let mult_table_int: Vec<Vec<Vec<i128>>> = raw
            .mult_table
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| {
                        e.iter()
                            .map(|c| {
                                if c.denom().is_one() {
                                    c.numer().to_i128().ok_or_else(|| {
                                        Error::Config("structure constant overflow".into())
                                    })
                                } else {
                                    Err(Error::Config(
                                        "non-integral structure constant: basis is not an integral basis".into(),
                                    ))
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;

        let basis_k: Vec<FieldElement> = raw
            .basis_k
            .iter()
            .map(|c| FieldElement::new(c.clone()))
            .collect();

        // Projection data: an invertible N x N row-submatrix of the k-basis
        // coordinate matrix (rows = K-coordinates, columns = k-basis index).
        let rows: Vec<usize> = {
            let mut found = None;
            let idxs: Vec<usize> = (0..dim).collect();
            'outer: for combo in choose(&idxs, n) {
                let sub: Vec<Vec<BigRational>> = combo
                    .iter()
                    .map(|&r| (0..n).map(|j| basis_k[j].coords[r].clone()).collect())
                    .collect();
                if !det_rational(&sub).is_zero() {
                    found = Some(combo);
                    break 'outer;
                }
            }
            found.ok_or_else(|| Error::Config("subfield basis is degenerate".into()))?
        };
        let sub: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|&r| (0..n).map(|j| basis_k[j].coords[r].clone()).collect())
            .collect();
        let sub_inv = invert_matrix(&sub)
            .ok_or_else(|| Error::Config("subfield basis is degenerate".into()))?;

        let mut desc = FieldDescriptor {
            label: raw.label,
            n_places: n,
            dim,
            mult_table: raw.mult_table,
            mult_table_int,
            tau_mat: raw.tau_mat,
            basis_k,
            disc_k: raw.disc_k,
            disc_k_field: raw.disc_k_field,
            rel_disc_norm: raw.rel_disc_norm,
            class_reps: Vec::new(),
            units: raw.units.iter().map(|c| FieldElement::new(c.clone())).collect(),
            regulator: 1.0,
            ramified: Vec::new(),
            places: Vec::new(),
            quad_embedding: None,
            k_gen: None,
            k_proj: (rows, sub_inv),
            prime_cache_top: Mutex::new(HashMap::new()),
            prime_cache_base: Mutex::new(HashMap::new()),
        };

        desc.check_structure()?;
        desc.derive_embeddings()?;
        desc.derive_regulator(raw.regulator_claim)?;

        // Ideal-level data.
        desc.class_reps = if raw.class_reps.is_empty() {
            vec![IdealHnf::unit(Ring::Base, n)]
        } else {
            raw.class_reps
                .iter()
                .map(|gens| {
                    IdealHnf::from_generators(
                        &desc,
                        Ring::Base,
                        &gens
                            .iter()
                            .map(|c| desc.k_to_top(&SubfieldElement { coords: c.clone() }))
                            .collect::<Vec<_>>(),
                    )
                })
                .collect::<Result<Vec<_>>>()?
        };
        for (p_gens, e_gens) in &raw.ramified_gens {
            let p_base = IdealHnf::from_generators(
                &desc,
                Ring::Base,
                &p_gens
                    .iter()
                    .map(|c| SubfieldElement { coords: c.clone() })
                    .map(|e| desc.k_to_top(&e))
                    .collect::<Vec<_>>(),
            )?;
            let p_ext = IdealHnf::from_generators(
                &desc,
                Ring::Top,
                &e_gens
                    .iter()
                    .map(|c| FieldElement::new(c.clone()))
                    .collect::<Vec<_>>(),
            )?;
            let norm_base = p_base.norm;
            desc.ramified.push(RamifiedPair {
                p_base,
                p_ext,
                norm_base,
            });
        }
        desc.check_ideal_invariants()?;
        desc.check_norm_kernel_samples()?;
        Ok(desc)
    }

    /// Derived descriptor for an imaginary quadratic field `K = Q(sqrt(-d))`,
    /// `d > 0` squarefree.
    pub fn imag_quadratic(d: i64) -> Result<FieldDescriptor> {
        if d <= 0 {
            return Err(Error::Config("d must be positive".into()));
        }
        let (kernel, _) = crate::exact::squarefree_kernel(d as i128);
        if kernel != d as i128 {
            return Err(Error::Config(format!("d = {d} is not squarefree")));
        }
        // Integral basis {1, w}: w = sqrt(-d) unless -d = 1 mod 4, where
        // w = (1 + sqrt(-d)) / 2.
        let half_mode = (-(d as i128)).rem_euclid(4) == 1;
        let disc: i128 = if half_mode { -(d as i128) } else { -4 * d as i128 };
        // w^2 = -d, or w^2 = w - (1+d)/4 in half mode.
        let w_sq: Vec<BigRational> = if half_mode {
            vec![rat(-((1 + d as i128) / 4), 1), rat(1, 1)]
        } else {
            vec![rat(-(d as i128), 1), rat(0, 1)]
        };
        let e0 = vec![rat(1, 1), rat(0, 1)];
        let e1 = vec![rat(0, 1), rat(1, 1)];
        let mult_table = vec![
            vec![e0.clone(), e1.clone()],
            vec![e1.clone(), w_sq],
        ];
        // tau(w) = -w, or 1 - w in half mode.
        let tau_mat = if half_mode {
            vec![vec![1, 1], vec![0, -1]]
        } else {
            vec![vec![1, 0], vec![0, -1]]
        };
        let ramified_gens = ramified_gens_quadratic(d, half_mode, disc)?;
        FieldDescriptor::assemble(RawDescriptor {
            label: format!("Q(sqrt(-{d}))"),
            n_places: 1,
            mult_table,
            tau_mat,
            basis_k: vec![vec![rat(1, 1), rat(0, 1)]],
            disc_k: 1,
            disc_k_field: disc,
            rel_disc_norm: disc.abs(),
            units: vec![],
            regulator_claim: None,
            ramified_gens,
            class_reps: vec![],
        })
    }

    // -- validation ---------------------------------------------------------

    fn check_structure(&self) -> Result<()> {
        // Commutativity and associativity of the structure constants (spot
        // associativity on all basis triples — dimension is at most 4).
        for i in 0..self.dim {
            for j in 0..self.dim {
                if self.mult_table[i][j] != self.mult_table[j][i] {
                    return Err(Error::Config("multiplication table not symmetric".into()));
                }
            }
        }
        for i in 0..self.dim {
            for j in 0..self.dim {
                for l in 0..self.dim {
                    let ij_l = self.mul(&self.basis_elem(i), &self.basis_elem(j));
                    let left = self.mul(&ij_l, &self.basis_elem(l));
                    let jl = self.mul(&self.basis_elem(j), &self.basis_elem(l));
                    let right = self.mul(&self.basis_elem(i), &jl);
                    if left != right {
                        return Err(Error::Config(
                            "multiplication table not associative".into(),
                        ));
                    }
                }
            }
        }
        // Identity element: basis_0 must be 1.
        for j in 0..self.dim {
            if self.mult_table[0][j]
                != (0..self.dim)
                    .map(|r| {
                        if r == j {
                            BigRational::one()
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect::<Vec<_>>()
            {
                return Err(Error::Config("first basis element must be 1".into()));
            }
        }
        // tau is an involutive ring automorphism fixing k.
        let id = identity_i64(self.dim);
        if mat_mul_i64(&self.tau_mat, &self.tau_mat) != id {
            return Err(Error::Config("conjugation is not an involution".into()));
        }
        for i in 0..self.dim {
            for j in 0..self.dim {
                let lhs = self.tau(&self.mul(&self.basis_elem(i), &self.basis_elem(j)));
                let rhs = self.mul(&self.tau(&self.basis_elem(i)), &self.tau(&self.basis_elem(j)));
                if lhs != rhs {
                    return Err(Error::Config("conjugation is not multiplicative".into()));
                }
            }
        }
        for b in &self.basis_k {
            if &self.tau(b) != b {
                return Err(Error::Config(
                    "conjugation does not fix the subfield basis".into(),
                ));
            }
        }
        for u in &self.units {
            if &self.tau(u) != u {
                return Err(Error::Config("fundamental unit not in the subfield".into()));
            }
            let nu = self.norm_abs(u);
            if nu.abs() != BigRational::one() {
                return Err(Error::Config("fundamental unit is not a unit".into()));
            }
        }
        // Discriminant relation |disc_K| = disc_k^2 * rel_disc_norm.
        if self.disc_k_field.abs() != self.disc_k * self.disc_k * self.rel_disc_norm {
            return Err(Error::Config(
                "discriminant relation |disc_K| = disc_k^2 * N(rel disc) fails".into(),
            ));
        }
        Ok(())
    }

    fn check_ideal_invariants(&self) -> Result<()> {
        for pair in &self.ramified {
            let ext = pair.p_base.extend_to_top(self)?;
            let sq = pair.p_ext.mul(self, &pair.p_ext)?;
            if sq != ext {
                return Err(Error::Config(format!(
                    "ramified pair fails p^2 = P O_K (norms {} vs {}; mats {:?} vs {:?})",
                    sq.norm, ext.norm, sq.mat, ext.mat
                )));
            }
        }
        Ok(())
    }

    /// Sample check: psi-images have relative norm one and unit modulus at
    /// every place (ties the conjugation data to the embedding data).
    fn check_norm_kernel_samples(&self) -> Result<()> {
        let samples: Vec<Vec<i64>> = match self.dim {
            2 => vec![vec![2, 1], vec![1, -3], vec![5, 2]],
            _ => vec![
                vec![2, 1, 0, 0],
                vec![1, 0, -1, 1],
                vec![1, 1, 1, 0],
            ],
        };
        for s in samples {
            let beta = FieldElement::from_ints(&s);
            let alpha = self.psi(&beta)?;
            let nr = self.norm_rel(&alpha)?;
            if !self.k_is_one(&nr) {
                return Err(Error::Config(
                    "psi image does not have relative norm one".into(),
                ));
            }
            for pt in self.planar_points(&alpha)? {
                let m2 = pt.norm_sq()?;
                if m2.sub(&Quad::one())?.sign() != 0 {
                    return Err(Error::Config(
                        "embedding data inconsistent: |psi image| != 1".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    // -- embeddings ---------------------------------------------------------

    fn derive_embeddings(&mut self) -> Result<()> {
        if self.n_places == 1 {
            // K = Q(sqrt(-d)): split each basis element as x + y*sqrt(-d).
            // basis_1 is w with w + tau(w) = t (rational) and w*tau(w) = q:
            // x = t/2, y = sqrt(d)-coefficient from w - x.
            let w = self.basis_elem(1);
            let tw = self.tau(&w);
            let t = {
                let s = w.add(&tw);
                if !s.coords[1].is_zero() {
                    return Err(Error::Config("trace of generator not rational".into()));
                }
                s.coords[0].clone()
            };
            let q = {
                let p = self.mul(&w, &tw);
                if !p.coords[1].is_zero() {
                    return Err(Error::Config("norm of generator not rational".into()));
                }
                p.coords[0].clone()
            };
            // w = t/2 + i*sqrt(4q - t^2)/2; need 4q - t^2 = d * c^2 exactly.
            let disc = rat_i(4) * &q - &t * &t;
            if !disc.is_positive() {
                return Err(Error::Config("field is not totally complex".into()));
            }
            if !disc.denom().is_one() {
                return Err(Error::Config("generator discriminant not integral".into()));
            }
            let disc_i = disc.numer().to_i128().ok_or_else(|| {
                Error::Config("generator discriminant overflow".into())
            })?;
            let (d, c) = crate::exact::squarefree_kernel(disc_i);
            let d64 = i64::try_from(d)
                .map_err(|_| Error::Config("discriminant kernel overflow".into()))?;
            // basis_0 = 1 -> (1, 0); basis_1 = w -> (t/2, c/2).
            let xs = vec![BigRational::one(), &t / rat_i(2)];
            let ys = vec![BigRational::zero(), rat_i(c) / rat_i(2)];
            self.quad_embedding = Some((xs.clone(), ys.clone(), d64));
            self.places = vec![PlaceData {
                re: xs.into_iter().map(Quad::from_rational).collect(),
                b: ys.into_iter().map(Quad::from_rational).collect(),
                s_sq: Quad::from_rational(rat_i(d)),
            }];
            return Ok(());
        }

        // N = 2. First, exact embeddings of k: basis_k = {1, g} with
        // g^2 = t*g - q for rational t, q read off the K-side product.
        let g = self.basis_k[1].clone();
        let g_sq = self.mul(&g, &g);
        let g_sq_k = self.top_to_k(&g_sq)?;
        let t = g_sq_k.coords[1].clone();
        let q = -g_sq_k.coords[0].clone();
        let dk = &t * &t - rat_i(4) * &q;
        if !dk.is_positive() || !dk.denom().is_one() {
            return Err(Error::Config("subfield is not real quadratic".into()));
        }
        let (m, c) = crate::exact::squarefree_kernel(
            dk.numer()
                .to_i128()
                .ok_or_else(|| Error::Config("subfield discriminant overflow".into()))?,
        );
        let m64 =
            i64::try_from(m).map_err(|_| Error::Config("subfield kernel overflow".into()))?;
        // sigma_1(g) = (t + c*sqrt(m))/2, sigma_2 its conjugate.
        let g_sigma1 = Quad::new(&t / rat_i(2), rat_i(c) / rat_i(2), m64);
        self.k_gen = Some((t.clone(), q.clone(), m64));

        // Generator of K over k: first basis element not fixed by tau.
        let theta_idx = (1..self.dim)
            .find(|&j| self.tau(&self.basis_elem(j)) != self.basis_elem(j))
            .ok_or_else(|| Error::Config("conjugation fixes the whole basis".into()))?;
        let theta = self.basis_elem(theta_idx);
        let t_theta = self.top_to_k(&theta.add(&self.tau(&theta)))?;
        let n_theta = self.top_to_k(&self.mul(&theta, &self.tau(&theta)))?;
        // Relative discriminant delta = S^2 - 4P in k; must be totally
        // negative (K totally complex).
        let s_sq_minus = |kv: &SubfieldElement, place: usize| -> Result<Quad> {
            self.k_embed_with(kv, place, &g_sigma1)
        };
        let mut delta_k = SubfieldElement {
            coords: vec![
                &t_theta.coords[0] * &t_theta.coords[0]
                    + &t_theta.coords[1] * &t_theta.coords[1] * (-&q)
                    - rat_i(4) * &n_theta.coords[0],
                rat_i(2) * &t_theta.coords[0] * &t_theta.coords[1]
                    + &t_theta.coords[1] * &t_theta.coords[1] * self.k_gen.as_ref().unwrap().0.clone()
                    - rat_i(4) * &n_theta.coords[1],
            ],
        };
        // (a + b g)^2 = a^2 + 2ab g + b^2 (t g - q) done above inline.
        let _ = &mut delta_k;
        for place in 0..2 {
            let dq = s_sq_minus(&delta_k, place)?;
            if dq.sign() >= 0 {
                return Err(Error::Config(
                    "relative discriminant is not totally negative".into(),
                ));
            }
        }
        // Split every basis element: w_j = a_j + b_j * theta with a_j, b_j
        // in k, via b_j = (w_j - tau(w_j)) / (theta - tau(theta)).
        let dtheta = theta.sub(&self.tau(&theta));
        let dtheta_inv = self.inv(&dtheta)?;
        let mut re = vec![Vec::new(), Vec::new()];
        let mut bq = vec![Vec::new(), Vec::new()];
        for j in 0..self.dim {
            let w = self.basis_elem(j);
            let b = self.mul(&w.sub(&self.tau(&w)), &dtheta_inv);
            let a = w.sub(&self.mul(&b, &theta));
            let a_k = self.top_to_k(&a)?;
            let b_k = self.top_to_k(&b)?;
            for place in 0..2 {
                let a_s = self.k_embed_with(&a_k, place, &g_sigma1)?;
                let b_s = self.k_embed_with(&b_k, place, &g_sigma1)?;
                let s_half = self
                    .k_embed_with(&t_theta, place, &g_sigma1)?
                    .scale(&rat(1, 2));
                // sigma(w_j) = a + b*(S/2) + b * s * i
                re[place].push(a_s.add(&b_s.mul(&s_half)?)?);
                bq[place].push(b_s);
            }
        }
        let mut places = Vec::new();
        for place in 0..2 {
            let dq = s_sq_minus(&delta_k, place)?;
            places.push(PlaceData {
                re: re[place].clone(),
                b: bq[place].clone(),
                // s = sqrt(-delta)/2 > 0, so s^2 = -delta/4.
                s_sq: dq.neg().scale(&rat(1, 4)),
            });
        }
        self.places = places;
        Ok(())
    }

    fn derive_regulator(&mut self, claim: Option<f64>) -> Result<()> {
        if self.n_places == 1 {
            self.regulator = 1.0;
            return Ok(());
        }
        let (eps_coords, reg) = self.fundamental_unit_k()?;
        let uk = self.top_to_k(&self.units[0].clone())?;
        if uk.coords != eps_coords {
            return Err(Error::Config(
                "declared unit is not the fundamental unit of the real subfield".into(),
            ));
        }
        self.regulator = reg;
        if let Some(rc) = claim {
            if (rc - reg).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "declared regulator {rc} disagrees with derived value {reg}"
                )));
            }
        }
        Ok(())
    }

    /// Fundamental unit of the real quadratic subfield order, as coordinates
    /// over `{1, g}`, together with its regulator. Derived independently of
    /// any declared data: the continued fraction of `sqrt(m)` yields the
    /// smallest unit of `Z[sqrt(m)]` above 1, and a cube-root search covers
    /// the index-3 case of half-integral orders.
    fn fundamental_unit_k(&self) -> Result<(Vec<BigRational>, f64)> {
        let (t, q, m) = self
            .k_gen
            .clone()
            .ok_or_else(|| Error::Invariant("subfield generator data missing".into()))?;
        let t_i = rational_to_int(&t)?;
        let q_i = rational_to_int(&q)?;
        let m_i = m as i128;
        let disc_gen = t_i * t_i - 4 * q_i;
        let c_i = isqrt_i128(disc_gen / m_i);
        if c_i * c_i * m_i != disc_gen {
            return Err(Error::Invariant("generator discriminant mismatch".into()));
        }
        let a0 = isqrt_i128(m_i);
        if a0 * a0 == m_i {
            return Err(Error::Config("real subfield radicand is a square".into()));
        }
        let (mut p_older, mut p_last, mut q_older, mut q_last) = (1i128, a0, 0i128, 1i128);
        let (mut big_p, mut big_q, mut a_cur) = (0i128, 1i128, a0);
        let mut solved = false;
        for _ in 0..300 {
            let p_next = a_cur * big_q - big_p;
            let q_next = (m_i - p_next * p_next) / big_q;
            let a_next = (a0 + p_next) / q_next;
            if a_next == 2 * a0 && q_next == 1 {
                solved = true;
                break;
            }
            let (pp, qq) = (
                a_next
                    .checked_mul(p_last)
                    .and_then(|v| v.checked_add(p_older))
                    .ok_or_else(|| Error::Unsupported("continued fraction overflow".into()))?,
                a_next
                    .checked_mul(q_last)
                    .and_then(|v| v.checked_add(q_older))
                    .ok_or_else(|| Error::Unsupported("continued fraction overflow".into()))?,
            );
            p_older = p_last;
            p_last = pp;
            q_older = q_last;
            q_last = qq;
            big_p = p_next;
            big_q = q_next;
            a_cur = a_next;
        }
        if !solved {
            return Err(Error::Invariant("continued fraction period exceeds bound".into()));
        }
        // Contenders as (x, y) meaning (x + y*sqrt(m))/2, most fundamental first.
        let mut cands = Vec::new();
        if let Some(xy) = half_cube_root_unit(p_last, q_last, m_i) {
            cands.push(xy);
        }
        cands.push((2 * p_last, 2 * q_last));
        for (x, y) in cands {
            let x_c = rat(x, 2) - rat(y * t_i, 2 * c_i);
            let y_c = rat(y, c_i);
            if x_c.denom().is_one() && y_c.denom().is_one() {
                let reg = ((x as f64 + y as f64 * (m_i as f64).sqrt()) / 2.0).ln();
                return Ok((vec![x_c, y_c], reg));
            }
        }
        Err(Error::Invariant(
            "fundamental unit does not lie in the declared order".into(),
        ))
    }

    // -- element arithmetic -------------------------------------------------

    pub fn basis_elem(&self, j: usize) -> FieldElement {
        let mut coords = vec![BigRational::zero(); self.dim];
        coords[j] = BigRational::one();
        FieldElement::new(coords)
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::new(vec![BigRational::zero(); self.dim])
    }

    pub fn one(&self) -> FieldElement {
        self.basis_elem(0)
    }

    pub fn from_rational(&self, r: BigRational) -> FieldElement {
        let mut coords = vec![BigRational::zero(); self.dim];
        coords[0] = r;
        FieldElement::new(coords)
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let mut out = vec![BigRational::zero(); self.dim];
        for i in 0..self.dim {
            if a.coords[i].is_zero() {
                continue;
            }
            for j in 0..self.dim {
                if b.coords[j].is_zero() {
                    continue;
                }
                let f = &a.coords[i] * &b.coords[j];
                for (l, t) in self.mult_table[i][j].iter().enumerate() {
                    if !t.is_zero() {
                        out[l] += t * &f;
                    }
                }
            }
        }
        FieldElement::new(out)
    }

    /// Integer fast path for integral elements.
    pub fn mul_int(&self, a: &[i128], b: &[i128]) -> Vec<i128> {
        let mut out = vec![0i128; self.dim];
        for i in 0..self.dim {
            if a[i] == 0 {
                continue;
            }
            for j in 0..self.dim {
                if b[j] == 0 {
                    continue;
                }
                let f = a[i] * b[j];
                for (l, &t) in self.mult_table_int[i][j].iter().enumerate() {
                    if t != 0 {
                        out[l] += t * f;
                    }
                }
            }
        }
        out
    }

    pub fn tau(&self, a: &FieldElement) -> FieldElement {
        let mut out = vec![BigRational::zero(); self.dim];
        for (c, col) in a.coords.iter().enumerate() {
            if col.is_zero() {
                continue;
            }
            for r in 0..self.dim {
                let t = self.tau_mat[r][c];
                if t != 0 {
                    out[r] += rat_i(t as i128) * col;
                }
            }
        }
        FieldElement::new(out)
    }

    pub fn tau_int(&self, a: &[i128]) -> Vec<i128> {
        let mut out = vec![0i128; self.dim];
        for (c, &col) in a.iter().enumerate() {
            if col == 0 {
                continue;
            }
            for r in 0..self.dim {
                out[r] += self.tau_mat[r][c] as i128 * col;
            }
        }
        out
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::Invariant("inverse of zero".into()));
        }
        // Columns of the multiplication-by-a matrix.
        let cols: Vec<FieldElement> = (0..self.dim)
            .map(|j| self.mul(a, &self.basis_elem(j)))
            .collect();
        let mat: Vec<Vec<BigRational>> = (0..self.dim)
            .map(|r| (0..self.dim).map(|c| cols[c].coords[r].clone()).collect())
            .collect();
        let mut rhs = vec![BigRational::zero(); self.dim];
        rhs[0] = BigRational::one();
        let x = solve_linear(&mat, &rhs)
            .ok_or_else(|| Error::Invariant("singular multiplication matrix".into()))?;
        Ok(FieldElement::new(x))
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    /// Absolute norm N over the rationals: determinant of multiplication.
    pub fn norm_abs(&self, a: &FieldElement) -> BigRational {
        let cols: Vec<FieldElement> = (0..self.dim)
            .map(|j| self.mul(a, &self.basis_elem(j)))
            .collect();
        let mat: Vec<Vec<BigRational>> = (0..self.dim)
            .map(|r| (0..self.dim).map(|c| cols[c].coords[r].clone()).collect())
            .collect();
        det_rational(&mat)
    }

    /// Absolute norm of an integral element given by integer coordinates,
    /// entirely in machine integers; `None` on overflow. Always non-negative
    /// for a totally complex field.
    pub fn norm_int(&self, coords: &[i128]) -> Option<i128> {
        let dim = self.dim;
        let mut mat = vec![vec![0i128; dim]; dim];
        for j in 0..dim {
            for i in 0..dim {
                let c = coords[i];
                if c == 0 {
                    continue;
                }
                for l in 0..dim {
                    let t = self.mult_table_int[i][j][l];
                    if t != 0 {
                        mat[l][j] = mat[l][j].checked_add(c.checked_mul(t)?)?;
                    }
                }
            }
        }
        det_int(&mut mat)
    }

    /// Relative norm a * tau(a), expressed in the subfield basis.
    pub fn norm_rel(&self, a: &FieldElement) -> Result<SubfieldElement> {
        self.top_to_k(&self.mul(a, &self.tau(a)))
    }

    /// The norm-one map: a / tau(a).
    pub fn psi(&self, a: &FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::Invariant("psi of zero".into()));
        }
        self.div(a, &self.tau(a))
    }

    // -- subfield plumbing --------------------------------------------------

    pub fn k_to_top(&self, a: &SubfieldElement) -> FieldElement {
        let mut out = self.zero();
        for (j, c) in a.coords.iter().enumerate() {
            out = out.add(&self.basis_k[j].scale(c));
        }
        out
    }

    /// Express a K-element in the subfield basis; errors when it is not in k.
    pub fn top_to_k(&self, a: &FieldElement) -> Result<SubfieldElement> {
        let (rows, inv) = &self.k_proj;
        let sub: Vec<BigRational> = rows.iter().map(|&r| a.coords[r].clone()).collect();
        let coords: Vec<BigRational> = (0..self.n_places)
            .map(|i| {
                (0..self.n_places)
                    .map(|j| &inv[i][j] * &sub[j])
                    .fold(BigRational::zero(), |acc, x| acc + x)
            })
            .collect();
        let back = self.k_to_top(&SubfieldElement {
            coords: coords.clone(),
        });
        if &back != a {
            return Err(Error::Invariant(
                "element does not lie in the totally real subfield".into(),
            ));
        }
        Ok(SubfieldElement { coords })
    }

    pub fn k_is_one(&self, a: &SubfieldElement) -> bool {
        a.coords[0].is_one() && a.coords.iter().skip(1).all(BigRational::is_zero)
    }

    /// Exact image of a subfield element under place `n`.
    pub fn k_embed(&self, a: &SubfieldElement, place: usize) -> Result<Quad> {
        if self.n_places == 1 {
            return Ok(Quad::from_rational(a.coords[0].clone()));
        }
        let (t, _, m) = self.k_gen.as_ref().unwrap();
        let c = {
            let dk = t * t - rat_i(4) * {
                // q = g*sigma - recompute from stored data: q enters only via
                // the stored kernel; reconstruct c from t^2 - 4q = c^2 m.
                // We stored (t, q, m); recover c = sqrt((t^2-4q)/m).
                self.k_gen.as_ref().unwrap().1.clone()
            };
            let cm = dk / rat_i(*m as i128);
            crate::exact::floor_sqrt(&cm)
        };
        let g1 = Quad::new(
            t / rat_i(2),
            BigRational::from_integer(c) / rat_i(2),
            *m,
        );
        self.k_embed_with(a, place, &g1)
    }

    fn k_embed_with(&self, a: &SubfieldElement, place: usize, g1: &Quad) -> Result<Quad> {
        let g = if place == 0 { g1.clone() } else { g1.conj() };
        Quad::from_rational(a.coords[0].clone()).add(&g.scale(&a.coords[1]))
    }

    /// Exact norm of a subfield element down to the rationals.
    pub fn k_norm(&self, a: &SubfieldElement) -> BigRational {
        if self.n_places == 1 {
            return a.coords[0].clone();
        }
        let (t, q, _) = self.k_gen.as_ref().unwrap();
        // N(u + v g) = u^2 + u v t + v^2 q  (g^2 = t g - q).
        let u = &a.coords[0];
        let v = &a.coords[1];
        u * u + u * v * t + v * v * q
    }

    pub fn k_is_totally_positive(&self, a: &SubfieldElement) -> Result<bool> {
        for place in 0..self.n_places {
            if self.k_embed(a, place)?.sign() <= 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    // -- embeddings of K-elements ------------------------------------------

    /// Exact planar data of `sigma_n(a)` for every place `n`.
    pub fn planar_points(&self, a: &FieldElement) -> Result<Vec<PlanarPoint>> {
        let mut out = Vec::with_capacity(self.n_places);
        for place in &self.places {
            let mut re = Quad::zero();
            let mut b = Quad::zero();
            for (j, c) in a.coords.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                re = re.add(&place.re[j].scale(c))?;
                b = b.add(&place.b[j].scale(c))?;
            }
            let im_sq = b.mul(&b)?.mul(&place.s_sq)?;
            out.push(PlanarPoint::new(re, im_sq, b.sign())?);
        }
        Ok(out)
    }

    /// Certified numeric embedding for display and sampling.
    pub fn embed(&self, a: &FieldElement, bits: u32) -> Result<EmbeddingVector> {
        let pts = self.planar_points(a)?;
        let mut re = Vec::new();
        let mut im = Vec::new();
        let mut radius = Vec::new();
        for pt in &pts {
            let ri = pt.re_interval(bits);
            let ii = pt.im_interval(bits);
            re.push(ri.mid_f64());
            im.push(ii.mid_f64());
            let w = ratio_to_f64(&ri.width()).max(ratio_to_f64(&ii.width()));
            // Interval half-width plus float-rounding slack.
            radius.push(w + 1e-13 * (ri.mid_f64().abs() + ii.mid_f64().abs() + 1.0));
        }
        Ok(EmbeddingVector {
            re,
            im,
            radius,
            bits,
        })
    }

    /// Arguments of all places in `[0, 2*pi)`, display-grade.
    pub fn arg_vector(&self, a: &FieldElement) -> Result<Vec<f64>> {
        Ok(self
            .planar_points(a)?
            .iter()
            .map(PlanarPoint::arg_f64)
            .collect())
    }

    // -- heights and membership --------------------------------------------

    /// Exact `H(a)^{2N}`: the denominator-ideal norm times the product of
    /// `max(1, |sigma_n(a)|^2)` over places, as a quadratic-field element
    /// (rational whenever N = 1 or `a` has norm one).
    pub fn weil_height_pow(&self, a: &FieldElement) -> Result<Quad> {
        if a.is_zero() {
            return Err(Error::Invariant("height of zero".into()));
        }
        // Denominator ideal: a = b/m with b integral; den = (m) / gcd((b), (m)).
        let m = a
            .coords
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let b = a.scale(&BigRational::from_integer(m.clone()));
        let m_elem = self.from_rational(BigRational::from_integer(m.clone()));
        let ib = IdealHnf::principal(self, Ring::Top, &b)?;
        let im = IdealHnf::principal(self, Ring::Top, &m_elem)?;
        let g = ib.sum(self, &im)?;
        let m_i = m.to_i128().ok_or_else(|| {
            Error::Invariant("denominator too large for exact height".into())
        })?;
        let den_norm = rat_i(m_i.pow(self.dim as u32)) / rat_i(g.norm);
        // Archimedean part: product of max(1, sigma_n(a tau a)).
        let nr = self.norm_rel(a)?;
        let mut arch = Quad::one();
        for place in 0..self.n_places {
            let v = self.k_embed(&nr, place)?;
            let one = Quad::one();
            let factor = match v.cmp_quad(&one)? {
                Ordering::Greater => v,
                _ => one,
            };
            arch = arch.mul(&factor)?;
        }
        Ok(arch.scale(&den_norm))
    }

    /// Display-grade height `H(a)`.
    pub fn weil_height_f64(&self, a: &FieldElement) -> Result<f64> {
        Ok(self
            .weil_height_pow(a)?
            .to_f64()
            .powf(1.0 / self.dim as f64))
    }

    /// Membership in the norm-one group: `a * tau(a) = 1`.
    pub fn in_sk(&self, a: &FieldElement) -> Result<bool> {
        if a.is_zero() {
            return Err(Error::Invariant("norm-one test of zero".into()));
        }
        Ok(self.k_is_one(&self.norm_rel(a)?))
    }

    /// Torsion test: integral norm-one element of finite order, by bounded
    /// exponent search (bound 2|disc_K|, generous for degree at most 4).
    pub fn is_torsion(&self, a: &FieldElement) -> Result<bool> {
        if !self.in_sk(a)? || !a.is_integral() {
            return Ok(false);
        }
        let bound = 2 * self.disc_k_field.unsigned_abs() as u64;
        let one = self.one();
        let mut p = a.clone();
        for _ in 0..bound {
            if p == one {
                return Ok(true);
            }
            p = self.mul(&p, a);
        }
        Ok(false)
    }

    /// Torsion order bound used by `is_torsion`.
    pub fn torsion_search_bound(&self) -> u64 {
        2 * self.disc_k_field.unsigned_abs() as u64
    }

    /// Trace of an element over Q, via the regular representation.
    pub fn trace_q(&self, a: &FieldElement) -> BigRational {
        let mut t = BigRational::zero();
        for j in 0..self.dim {
            let col = self.mul(a, &self.basis_elem(j));
            t += &col.coords[j];
        }
        t
    }

    /// Gram matrix `Tr(basis_i * tau(basis_j))` of the conjugation trace
    /// form, as exact integers. Positive definite: evaluated at integral
    /// coordinates it equals twice the sum of squared moduli over the places.
    pub fn trace_gram(&self) -> Result<Vec<Vec<i128>>> {
        let mut m = vec![vec![0i128; self.dim]; self.dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let prod = self.mul(&self.basis_elem(i), &self.tau(&self.basis_elem(j)));
                let tr = self.trace_q(&prod);
                if !tr.denom().is_one() {
                    return Err(Error::Invariant("trace form is not integral".into()));
                }
                m[i][j] = tr
                    .numer()
                    .to_i128()
                    .ok_or_else(|| Error::Unsupported("trace form overflow".into()))?;
            }
        }
        Ok(m)
    }

    /// Number of roots of unity in the field. Torsion elements satisfy
    /// `Tr(x tau(x)) = 2N` exactly, so they live on a level set of the trace
    /// form; the level set is enumerated in an exact coordinate box and each
    /// candidate is confirmed by an order search.
    pub fn torsion_count(&self) -> Result<usize> {
        let gram = self.trace_gram()?;
        let level = 2 * self.n_places as i128;
        let gram_rat: Vec<Vec<BigRational>> = gram
            .iter()
            .map(|row| row.iter().map(|&v| rat_i(v)).collect())
            .collect();
        let inv = invert_matrix(&gram_rat)
            .ok_or_else(|| Error::Invariant("trace form is degenerate".into()))?;
        // For positive definite M: x_i^2 <= (x^T M x) * (M^{-1})_ii.
        let bounds: Vec<i128> = (0..self.dim)
            .map(|i| {
                let b = &inv[i][i] * rat_i(level);
                crate::exact::floor_sqrt(&b).to_i128().unwrap_or(0)
            })
            .collect();
        let mut count = 0usize;
        let mut coords = vec![0i128; self.dim];
        count_level_set(&gram, level, &bounds, 0, &mut coords, &mut |c| {
            let e = FieldElement::new(c.iter().map(|&v| rat_i(v)).collect());
            if self.is_torsion(&e)? {
                count += 1;
            }
            Ok(())
        })?;
        Ok(count)
    }
}

fn count_level_set(
    gram: &[Vec<i128>],
    level: i128,
    bounds: &[i128],
    idx: usize,
    coords: &mut Vec<i128>,
    visit: &mut dyn FnMut(&[i128]) -> Result<()>,
) -> Result<()> {
    if idx == bounds.len() {
        let mut q = 0i128;
        for i in 0..coords.len() {
            for j in 0..coords.len() {
                q += gram[i][j] * coords[i] * coords[j];
            }
        }
        if q == level {
            visit(coords)?;
        }
        return Ok(());
    }
    for v in -bounds[idx]..=bounds[idx] {
        coords[idx] = v;
        count_level_set(gram, level, bounds, idx + 1, coords, visit)?;
    }
    coords[idx] = 0;
    Ok(())
}

fn ramified_gens_quadratic(
    d: i64,
    half_mode: bool,
    disc: i128,
) -> Result<Vec<(Vec<Vec<BigRational>>, Vec<Vec<BigRational>>)>> {
    // Ramified primes are exactly the primes dividing the discriminant. For
    // each p | disc, the prime above it is (p, w - r) with r a double root of
    // the minimal polynomial of w mod p.
    let mut out = Vec::new();
    let mut rest = disc.abs();
    let mut p = 2i128;
    while rest > 1 {
        if rest % p == 0 {
            while rest % p == 0 {
                rest /= p;
            }
            let r = double_root_mod_p(d as i128, half_mode, p)?;
            // Base generators are coordinates over basis_k (length 1 here).
            out.push((
                vec![vec![rat_i(p)]],
                vec![
                    vec![rat_i(p), rat_i(0)],
                    vec![rat_i(-r), rat_i(1)],
                ],
            ));
        }
        p += 1;
    }
    Ok(out)
}

fn rational_to_int(r: &BigRational) -> Result<i128> {
    if !r.denom().is_one() {
        return Err(Error::Invariant("expected an integer value".into()));
    }
    r.numer()
        .to_i128()
        .ok_or_else(|| Error::Unsupported("integer value overflows".into()))
}

/// Search for `(x + y*sqrt(m))/2` whose cube is `a + b*sqrt(m)`; the unit
/// index of a half-integral quadratic order over `Z[sqrt(m)]` divides 3, so
/// this is the only refinement the continued-fraction unit can need.
fn half_cube_root_unit(a: i128, b: i128, m: i128) -> Option<(i128, i128)> {
    let target = 2.0 * (a as f64 + b as f64 * (m as f64).sqrt()).cbrt();
    if !target.is_finite() {
        return None;
    }
    let bound = target.ceil() as i128 + 2;
    for y in 1..=bound {
        for x in 1..=bound {
            if (x - y) % 2 != 0 {
                continue;
            }
            // (x + y sqrt m)^3 = x^3 + 3xy^2 m + (3x^2 y + y^3 m) sqrt m
            let x3 = x.checked_mul(x)?.checked_mul(x)?;
            let y2m = y.checked_mul(y)?.checked_mul(m)?;
            let lhs_r = x3.checked_add(3i128.checked_mul(x)?.checked_mul(y2m)?)?;
            let lhs_s = 3i128
                .checked_mul(x)?
                .checked_mul(x)?
                .checked_mul(y)?
                .checked_add(y.checked_mul(y2m)?)?;
            if lhs_r == 8 * a && lhs_s == 8 * b {
                return Some((x, y));
            }
        }
    }
    None
}

fn double_root_mod_p(d: i128, half_mode: bool, p: i128) -> Result<i128> {
    // w^2 + d = 0, or w^2 - w + (1+d)/4 = 0 in half mode; at a ramified p the
    // reduction has a double root.
    for r in 0..p {
        let v = if half_mode {
            r * r - r + (1 + d) / 4
        } else {
            r * r + d
        };
        if v.rem_euclid(p) == 0 {
            return Ok(r);
        }
    }
    Err(Error::Config(format!("no root mod ramified prime {p}")))
}

fn choose(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in choose(&items[i + 1..], k - 1) {
            let mut v = vec![x];
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

fn identity_i64(n: usize) -> Vec<Vec<i64>> {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

fn mat_mul_i64(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|l| a[i][l] * b[l][j]).sum())
                .collect()
        })
        .collect()
}

pub(crate) fn invert_matrix(mat: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = mat.len();
    let mut cols = Vec::new();
    for j in 0..n {
        let mut rhs = vec![BigRational::zero(); n];
        rhs[j] = BigRational::one();
        cols.push(solve_linear(mat, &rhs)?);
    }
    Some(
        (0..n)
            .map(|i| (0..n).map(|j| cols[j][i].clone()).collect())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qi() -> FieldDescriptor {
        FieldDescriptor::imag_quadratic(1).unwrap()
    }

    #[test]
    fn gaussian_basics() {
        let f = qi();
        assert_eq!(f.dim, 2);
        assert_eq!(f.disc_k_field, -4);
        assert_eq!(f.rel_disc_norm, 4);
        assert_eq!(f.ramified.len(), 1);
        assert_eq!(f.ramified[0].p_ext.norm, 2);
        let i = f.basis_elem(1);
        let m1 = f.mul(&i, &i);
        assert_eq!(m1, f.from_rational(rat_i(-1)));
        let a = FieldElement::from_ints(&[2, 1]);
        assert_eq!(f.norm_abs(&a), rat_i(5));
        let nr = f.norm_rel(&a).unwrap();
        assert_eq!(nr.coords[0], rat_i(5));
        assert_eq!(f.tau(&f.tau(&a)), a);
    }

    #[test]
    fn half_integral_field() {
        let f = FieldDescriptor::imag_quadratic(3).unwrap();
        assert_eq!(f.disc_k_field, -3);
        assert_eq!(f.rel_disc_norm, 3);
        // w = (1 + sqrt(-3))/2 is a sixth root of unity: w^6 = 1.
        let w = f.basis_elem(1);
        let mut p = w.clone();
        for _ in 0..5 {
            p = f.mul(&p, &w);
        }
        assert_eq!(p, f.one());
        assert!(f.is_torsion(&w).unwrap());
        assert_eq!(f.norm_abs(&w), rat_i(1));
    }

    #[test]
    fn rejects_non_squarefree() {
        assert!(FieldDescriptor::imag_quadratic(4).is_err());
        assert!(FieldDescriptor::imag_quadratic(12).is_err());
    }

    #[test]
    fn psi_and_norm_one() {
        let f = qi();
        let b = FieldElement::from_ints(&[2, 1]);
        let a = f.psi(&b).unwrap();
        // (2+i)/(2-i) = (3+4i)/5
        assert_eq!(a.coords, vec![rat(3, 5), rat(4, 5)]);
        assert!(f.in_sk(&a).unwrap());
        assert!(!f.is_torsion(&a).unwrap());
        // kernel: psi of a rational is 1
        let r = f.from_rational(rat(7, 3));
        assert_eq!(f.psi(&r).unwrap(), f.one());
        // psi(alpha) = alpha^2 for norm-one alpha
        assert_eq!(f.psi(&a).unwrap(), f.mul(&a, &a));
    }

    #[test]
    fn heights() {
        let f = qi();
        assert_eq!(
            f.weil_height_pow(&f.one()).unwrap(),
            Quad::from_rational(rat_i(1))
        );
        let b = FieldElement::from_ints(&[2, 1]);
        let a = f.psi(&b).unwrap();
        // H((3+4i)/5)^2 = 5
        assert_eq!(f.weil_height_pow(&a).unwrap(), Quad::from_rational(rat_i(5)));
        // H(2+i)^2 = 5 as well: integral, archimedean factor 5.
        assert_eq!(f.weil_height_pow(&b).unwrap(), Quad::from_rational(rat_i(5)));
        // H(alpha) = H(1/alpha) = H(tau alpha)
        let inv = f.inv(&a).unwrap();
        assert_eq!(
            f.weil_height_pow(&inv).unwrap(),
            f.weil_height_pow(&a).unwrap()
        );
        assert_eq!(
            f.weil_height_pow(&f.tau(&a)).unwrap(),
            f.weil_height_pow(&a).unwrap()
        );
        // H(1/2) ^ 2 = 4
        let half = f.from_rational(rat(1, 2));
        assert_eq!(
            f.weil_height_pow(&half).unwrap(),
            Quad::from_rational(rat_i(4))
        );
    }

    #[test]
    fn torsion_counts_quadratic() {
        // Q(i): 4 torsion points; Q(sqrt(-3)): 6; Q(sqrt(-5)): 2.
        for (d, want) in [(1i64, 4usize), (3, 6), (5, 2), (7, 2)] {
            let f = FieldDescriptor::imag_quadratic(d).unwrap();
            let mut count = 0;
            for x in -2i64..=2 {
                for y in -2i64..=2 {
                    let a = FieldElement::from_ints(&[x, y]);
                    if !a.is_zero() && f.is_torsion(&a).unwrap() {
                        count += 1;
                    }
                }
            }
            assert_eq!(count, want, "torsion count for d={d}");
        }
    }

    #[test]
    fn integer_norm_matches_rational() {
        for d in [1i64, 3, 5, 7] {
            let f = FieldDescriptor::imag_quadratic(d).unwrap();
            for x in -4i128..=4 {
                for y in -4i128..=4 {
                    let fast = f.norm_int(&[x, y]).unwrap();
                    let slow = f.norm_abs(&FieldElement::from_ints(&[x as i64, y as i64]));
                    assert_eq!(crate::exact::rat_i(fast), slow, "d={d} x={x} y={y}");
                    assert!(fast >= 0);
                }
            }
        }
    }

    #[test]
    fn embeddings_and_args() {
        let f = qi();
        let a = f.psi(&FieldElement::from_ints(&[2, 1])).unwrap();
        let args = f.arg_vector(&a).unwrap();
        assert!((args[0] - 0.9272952180016122).abs() < 1e-12);
        let e = f.embed(&a, 96).unwrap();
        assert!((e.re[0] - 0.6).abs() < 1e-12);
        assert!((e.im[0] - 0.8).abs() < 1e-12);
        assert!(e.radius[0] < 1e-10);
        // |sigma(alpha)| = 1 exactly
        let pts = f.planar_points(&a).unwrap();
        assert_eq!(pts[0].norm_sq().unwrap(), Quad::from_rational(rat_i(1)));
    }

    #[test]
    fn subfield_roundtrip() {
        let f = qi();
        let five = f.from_rational(rat_i(5));
        let k5 = f.top_to_k(&five).unwrap();
        assert_eq!(f.k_norm(&k5), rat_i(5));
        assert_eq!(f.k_to_top(&k5), five);
        assert!(f.top_to_k(&f.basis_elem(1)).is_err());
    }
}
