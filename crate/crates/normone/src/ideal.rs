//! Exact ideal arithmetic over the two rings O_k and O_K.
//!
//! Ideals are integer row-style Hermite normal forms over the respective
//! integral bases, so equality is literal matrix equality and norms are
//! diagonal products. Prime splitting comes from factoring the minimal
//! polynomial of a ring generator modulo p (both rings here are monogenic,
//! which the loader validates). The decomposition routine splits a principal
//! ideal (beta) into a part extended from O_k, a squarefree ramified part,
//! and a remainder coprime to its own conjugate.


use num_traits::ToPrimitive;

use crate::field::{FieldDescriptor, FieldElement, SubfieldElement};
use crate::{Error, Result};

/// Which ring an ideal lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ring {
    /// O_k, the totally real subring.
    Base,
    /// O_K, the full ring of integers.
    Top,
}

/// Integral ideal in Hermite normal form: rows are a triangular module basis
/// (row i has its pivot on the diagonal, entries above pivots reduced).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IdealHnf {
    pub ring: Ring,
    pub mat: Vec<Vec<i128>>,
    pub norm: i128,
}

impl IdealHnf {
    /// The unit ideal (the whole ring) of the given coordinate dimension.
    pub fn unit(ring: Ring, dim: usize) -> IdealHnf {
        let mat: Vec<Vec<i128>> = (0..dim)
            .map(|i| (0..dim).map(|j| i128::from(i == j)).collect())
            .collect();
        IdealHnf { ring, mat, norm: 1 }
    }

    pub fn dim(&self) -> usize {
        self.mat.len()
    }

    pub fn is_unit(&self) -> bool {
        self.norm == 1
    }

    /// Module generated by ring multiples of the given generators.
    /// Generators are K-elements; for the base ring they must lie in k.
    pub fn from_generators(
        desc: &FieldDescriptor,
        ring: Ring,
        gens: &[FieldElement],
    ) -> Result<IdealHnf> {
        let mut rows = Vec::new();
        match ring {
            Ring::Top => {
                for g in gens {
                    let gi = g.int_coords().ok_or_else(|| {
                        Error::Invariant("ideal generator is not integral".into())
                    })?;
                    for j in 0..desc.dim {
                        let mut e = vec![0i128; desc.dim];
                        e[j] = 1;
                        rows.push(desc.mul_int(&gi, &e));
                    }
                }
            }
            Ring::Base => {
                for g in gens {
                    let gk = desc.top_to_k(g)?;
                    let gi = subfield_int_coords(&gk)?;
                    for j in 0..desc.n_places {
                        let mut e = vec![0i128; desc.n_places];
                        e[j] = 1;
                        rows.push(k_mul_int(desc, &gi, &e));
                    }
                }
            }
        }
        let dim = match ring {
            Ring::Top => desc.dim,
            Ring::Base => desc.n_places,
        };
        hnf_from_rows(ring, rows, dim)
    }

    /// Principal ideal generated by one element.
    pub fn principal(desc: &FieldDescriptor, ring: Ring, g: &FieldElement) -> Result<IdealHnf> {
        if g.is_zero() {
            return Err(Error::Invariant("principal ideal of zero".into()));
        }
        IdealHnf::from_generators(desc, ring, std::slice::from_ref(g))
    }

    /// Product of two ideals of the same ring.
    pub fn mul(&self, desc: &FieldDescriptor, other: &IdealHnf) -> Result<IdealHnf> {
        if self.ring != other.ring {
            return Err(Error::Invariant("ideal product across rings".into()));
        }
        let mut rows = Vec::new();
        for a in &self.mat {
            for b in &other.mat {
                rows.push(match self.ring {
                    Ring::Top => desc.mul_int(a, b),
                    Ring::Base => k_mul_int(desc, a, b),
                });
            }
        }
        hnf_from_rows(self.ring, rows, self.dim())
    }

    pub fn pow(&self, desc: &FieldDescriptor, e: u32) -> Result<IdealHnf> {
        let mut out = IdealHnf::unit(self.ring, self.dim());
        for _ in 0..e {
            out = out.mul(desc, self)?;
        }
        Ok(out)
    }

    /// Ideal sum (greatest common divisor).
    pub fn sum(&self, _desc: &FieldDescriptor, other: &IdealHnf) -> Result<IdealHnf> {
        if self.ring != other.ring {
            return Err(Error::Invariant("ideal sum across rings".into()));
        }
        let mut rows = self.mat.clone();
        rows.extend(other.mat.iter().cloned());
        hnf_from_rows(self.ring, rows, self.dim())
    }

    pub fn coprime(&self, desc: &FieldDescriptor, other: &IdealHnf) -> Result<bool> {
        Ok(self.sum(desc, other)?.is_unit())
    }

    /// Does this ideal divide `other` (equivalently contain it)?
    pub fn divides(&self, other: &IdealHnf) -> bool {
        debug_assert_eq!(self.ring, other.ring);
        other.mat.iter().all(|row| self.contains_coords(row))
    }

    /// Module membership of a coordinate vector.
    pub fn contains_coords(&self, x: &[i128]) -> bool {
        let dim = self.dim();
        let mut t = x.to_vec();
        // Rows are upper triangular, so the multiplier of row i is fixed by
        // column i once the earlier columns are cleared: walk forward.
        for i in 0..dim {
            let p = self.mat[i][i];
            if t[i] % p != 0 {
                return false;
            }
            let f = t[i] / p;
            if f != 0 {
                for c in 0..dim {
                    t[c] -= f * self.mat[i][c];
                }
            }
        }
        t.iter().all(|&v| v == 0)
    }

    pub fn contains_elem(&self, e: &FieldElement) -> bool {
        match e.int_coords() {
            Some(c) if c.len() == self.dim() => self.contains_coords(&c),
            _ => false,
        }
    }

    /// Image under conjugation (top ring only).
    pub fn conj(&self, desc: &FieldDescriptor) -> Result<IdealHnf> {
        if self.ring != Ring::Top {
            return Err(Error::Invariant("conjugation of a base ideal".into()));
        }
        let rows: Vec<Vec<i128>> = self.mat.iter().map(|r| desc.tau_int(r)).collect();
        hnf_from_rows(Ring::Top, rows, self.dim())
    }

    /// Extension of a base ideal to the top ring.
    pub fn extend_to_top(&self, desc: &FieldDescriptor) -> Result<IdealHnf> {
        if self.ring != Ring::Base {
            return Err(Error::Invariant("extension of a top ideal".into()));
        }
        let gens: Vec<FieldElement> = self
            .mat
            .iter()
            .map(|r| {
                desc.k_to_top(&SubfieldElement {
                    coords: r.iter().map(|&c| crate::exact::rat_i(c)).collect(),
                })
            })
            .collect();
        IdealHnf::from_generators(desc, Ring::Top, &gens)
    }
}

fn subfield_int_coords(e: &SubfieldElement) -> Result<Vec<i128>> {
    e.coords
        .iter()
        .map(|c| {
            if c.denom().to_i128() == Some(1) {
                c.numer()
                    .to_i128()
                    .ok_or_else(|| Error::Invariant("coordinate overflow".into()))
            } else {
                Err(Error::Invariant("ideal generator is not integral".into()))
            }
        })
        .collect()
}

pub(crate) fn k_mul_int(desc: &FieldDescriptor, a: &[i128], b: &[i128]) -> Vec<i128> {
    if desc.n_places == 1 {
        return vec![a[0] * b[0]];
    }
    let (t, q) = k_tq_int(desc);
    vec![
        a[0] * b[0] - q * a[1] * b[1],
        a[0] * b[1] + a[1] * b[0] + t * a[1] * b[1],
    ]
}

pub(crate) fn k_tq_int(desc: &FieldDescriptor) -> (i128, i128) {
    let (t, q, _) = desc.k_gen.as_ref().expect("subfield generator data");
    (
        t.numer().to_i128().expect("trace fits"),
        q.numer().to_i128().expect("norm fits"),
    )
}

/// Row-style Hermite normal form of a spanning set; errors when the span has
/// rank below the ring dimension (the zero ideal is not representable).
fn hnf_from_rows(ring: Ring, rows: Vec<Vec<i128>>, dim: usize) -> Result<IdealHnf> {
    let mut work: Vec<Vec<i128>> = rows.into_iter().filter(|r| r.iter().any(|&v| v != 0)).collect();
    let mut mat: Vec<Vec<i128>> = Vec::with_capacity(dim);
    for col in 0..dim {
        loop {
            let mut nz: Vec<usize> = (0..work.len()).filter(|&r| work[r][col] != 0).collect();
            match nz.len() {
                0 => return Err(Error::Invariant("ideal span has deficient rank".into())),
                1 => {
                    let mut row = work.swap_remove(nz[0]);
                    if row[col] < 0 {
                        for v in row.iter_mut() {
                            *v = -*v;
                        }
                    }
                    mat.push(row);
                    break;
                }
                _ => {
                    // Euclidean step on the two smallest entries at this column.
                    nz.sort_by_key(|&r| work[r][col].unsigned_abs());
                    let (small, large) = (nz[0], nz[1]);
                    let f = work[large][col] / work[small][col];
                    for c in 0..dim {
                        let sub = f * work[small][c];
                        work[large][c] -= sub;
                    }
                    if work[large].iter().all(|&v| v == 0) {
                        work.swap_remove(large);
                    }
                }
            }
        }
        // Remaining rows have a zero at this column from now on only if we
        // eliminated them; rows with nonzero entries at col were consumed.
    }
    // Back-reduce entries above each pivot into [0, pivot). Increasing pivot
    // order: subtracting row i touches columns >= i, which later iterations
    // then reduce; the reverse order would re-pollute finished columns.
    for i in 1..dim {
        let p = mat[i][i];
        for r in 0..i {
            let v = mat[r][i];
            let f = v.div_euclid(p);
            if f != 0 {
                for c in 0..dim {
                    let sub = f * mat[i][c];
                    mat[r][c] -= sub;
                }
            }
        }
    }
    let norm = (0..dim).map(|i| mat[i][i]).product();
    Ok(IdealHnf { ring, mat, norm })
}

// ---------------------------------------------------------------------------
// number-theory helpers
// ---------------------------------------------------------------------------

/// Kronecker symbol (a / n).
pub fn kronecker(mut a: i128, mut n: i128) -> i32 {
    if n == 0 {
        return i32::from(a == 1 || a == -1);
    }
    let mut result = 1i32;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    // factor out 2s from n
    let mut twos = 0;
    while n % 2 == 0 {
        n /= 2;
        twos += 1;
    }
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        // (2/a) depends on a mod 8
        let r = a.rem_euclid(8);
        let two_sym = if r == 1 || r == 7 { 1 } else { -1 };
        if twos % 2 == 1 {
            result *= two_sym;
        }
    }
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n.rem_euclid(8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a.rem_euclid(4) == 3 && n.rem_euclid(4) == 3 {
            result = -result;
        }
        a = a.rem_euclid(n);
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Cached list of the primes below 100_000.
pub fn small_primes() -> &'static [u32] {
    use std::sync::OnceLock;
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = 100_000usize;
        let mut is_comp = vec![false; n + 1];
        let mut out = Vec::new();
        for p in 2..=n {
            if !is_comp[p] {
                out.push(p as u32);
                let mut m = p * p;
                while m <= n {
                    is_comp[m] = true;
                    m += p;
                }
            }
        }
        out
    })
}

/// Prime factorization by trial division (valid for |n| < 10^10).
pub fn factor_i128(n: i128) -> Result<Vec<(i128, u32)>> {
    let mut n = n.abs();
    if n == 0 {
        return Err(Error::Invariant("factoring zero".into()));
    }
    let mut out = Vec::new();
    for &p in small_primes() {
        let p = p as i128;
        if p * p > n {
            break;
        }
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if n > 1 {
        if n >= 10_000_000_000 {
            return Err(Error::Unsupported(format!(
                "factorization cofactor {n} too large for trial division"
            )));
        }
        out.push((n, 1));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// polynomial factorization mod p (degree <= 4)
// ---------------------------------------------------------------------------

fn poly_divmod_mod_p(num: &[i128], den: &[i128], p: i128) -> (Vec<i128>, Vec<i128>) {
    // Monic divisor; ascending coefficients.
    let mut rem: Vec<i128> = num.to_vec();
    let dn = den.len() - 1;
    if rem.len() <= dn {
        return (vec![], rem);
    }
    let mut quot = vec![0i128; rem.len() - dn];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dn].rem_euclid(p);
        quot[i] = c;
        if c != 0 {
            for j in 0..=dn {
                rem[i + j] = (rem[i + j] - c * den[j]).rem_euclid(p);
            }
        }
    }
    while rem.len() > 1 && *rem.last().unwrap() % p == 0 {
        rem.pop();
    }
    (quot, rem)
}

fn poly_is_zero_mod_p(f: &[i128], p: i128) -> bool {
    f.iter().all(|&c| c.rem_euclid(p) == 0)
}

/// Monic factorization of a monic polynomial of degree <= 4 modulo p,
/// returned as (ascending-coefficient factor, multiplicity) pairs.
fn factor_monic_mod_p(f: &[i128], p: i128) -> Result<Vec<(Vec<i128>, u32)>> {
    let deg = f.len() - 1;
    if deg > 2 && p > 1000 {
        return Err(Error::Unsupported(format!(
            "prime splitting above p = {p} for a degree-{deg} generator"
        )));
    }
    let mut factors: Vec<Vec<i128>> = Vec::new();
    let mut rest: Vec<i128> = f.iter().map(|&c| c.rem_euclid(p)).collect();
    // Strip linear factors.
    let mut r = 0i128;
    while r < p && rest.len() > 1 {
        let val = eval_poly_mod_p(&rest, r, p);
        if val == 0 {
            factors.push(vec![(-r).rem_euclid(p), 1]);
            let (q, rem) = poly_divmod_mod_p(&rest, &[(-r).rem_euclid(p), 1], p);
            debug_assert!(poly_is_zero_mod_p(&rem, p));
            rest = q;
            // stay on the same root to catch multiplicities
        } else {
            r += 1;
        }
    }
    // What remains is rootless: degree 2 or 3 means irreducible; degree 4
    // is either irreducible or a product of two irreducible quadratics,
    // found by direct search (only reached for small p).
    match rest.len() - 1 {
        0 => {}
        2 | 3 => {
            factors.push(rest.clone());
            rest = vec![1];
        }
        4 => {
            'outer: for a in 0..p {
                for b in 0..p {
                    let cand = vec![b, a, 1];
                    let (q, rem) = poly_divmod_mod_p(&rest, &cand, p);
                    if poly_is_zero_mod_p(&rem, p) {
                        factors.push(cand);
                        rest = q;
                        break 'outer;
                    }
                }
            }
            if rest.len() - 1 == 2 || rest.len() - 1 == 4 {
                factors.push(rest.clone());
                rest = vec![1];
            }
        }
        _ => {}
    }
    if rest.len() != 1 {
        return Err(Error::Invariant("polynomial factorization incomplete".into()));
    }
    // Merge duplicates into multiplicities.
    let mut merged: Vec<(Vec<i128>, u32)> = Vec::new();
    for fac in factors {
        if let Some(m) = merged.iter_mut().find(|(g, _)| *g == fac) {
            m.1 += 1;
        } else {
            merged.push((fac, 1));
        }
    }
    merged.sort();
    Ok(merged)
}

fn eval_poly_mod_p(f: &[i128], x: i128, p: i128) -> i128 {
    let mut acc = 0i128;
    for &c in f.iter().rev() {
        acc = (acc * x + c).rem_euclid(p);
    }
    acc
}

// ---------------------------------------------------------------------------
// prime ideals
// ---------------------------------------------------------------------------

/// Minimal polynomial (ascending, monic) of the ring generator.
fn generator_minpoly(desc: &FieldDescriptor, ring: Ring) -> Result<Vec<i128>> {
    match ring {
        Ring::Top => {
            // basis_1 generates O_K; its dim-th power in terms of lower powers
            // gives the minimal polynomial. The loader guarantees that
            // basis_j = basis_1^j.
            let g = desc.basis_elem(1);
            let mut pw = desc.one();
            for j in 0..desc.dim {
                let expect = desc.basis_elem(j);
                if pw != expect {
                    return Err(Error::Unsupported(
                        "top ring is not monogenic over its listed basis".into(),
                    ));
                }
                pw = desc.mul(&pw, &g);
            }
            let mut coeffs: Vec<i128> = pw
                .int_coords()
                .ok_or_else(|| Error::Invariant("generator power not integral".into()))?
                .iter()
                .map(|&c| -c)
                .collect();
            coeffs.push(1);
            Ok(coeffs)
        }
        Ring::Base => {
            if desc.n_places == 1 {
                return Err(Error::Invariant(
                    "rational base ring has no quadratic generator".into(),
                ));
            }
            let (t, q) = k_tq_int(desc);
            Ok(vec![q, -t, 1])
        }
    }
}

/// Prime ideals above the rational prime p, with ramification index and
/// residue degree, cached per descriptor.
pub fn primes_above(
    desc: &FieldDescriptor,
    ring: Ring,
    p: i128,
) -> Result<Vec<(IdealHnf, u32, u32)>> {
    if ring == Ring::Base && desc.n_places == 1 {
        let mat = vec![vec![p]];
        return Ok(vec![(
            IdealHnf {
                ring: Ring::Base,
                mat,
                norm: p,
            },
            1,
            1,
        )]);
    }
    let cache = match ring {
        Ring::Top => &desc.prime_cache_top,
        Ring::Base => &desc.prime_cache_base,
    };
    if let Some(hit) = cache.lock().unwrap().get(&p) {
        return Ok(hit.clone());
    }
    let minpoly = generator_minpoly(desc, ring)?;
    let dim = match ring {
        Ring::Top => desc.dim,
        Ring::Base => desc.n_places,
    };
    let mut out = Vec::new();
    for (fac, e) in factor_monic_mod_p(&minpoly, p)? {
        // Ideal (p, fac(g)): evaluate the factor at the ring generator by
        // Horner's rule. A factor of full degree is the minimal polynomial
        // and evaluates to zero, leaving the inert ideal (p).
        let mut acc = vec![0i128; dim];
        let mut gvec = vec![0i128; dim];
        gvec[1] = 1;
        for &c in fac.iter().rev() {
            acc = match ring {
                Ring::Top => desc.mul_int(&acc, &gvec),
                Ring::Base => k_mul_int(desc, &acc, &gvec),
            };
            acc[0] += c;
        }
        let gens: Vec<FieldElement> = match ring {
            Ring::Top => vec![
                desc.from_rational(crate::exact::rat_i(p)),
                FieldElement::new(acc.iter().map(|&c| crate::exact::rat_i(c)).collect()),
            ],
            Ring::Base => {
                let pe = desc.k_to_top(&SubfieldElement {
                    coords: vec![crate::exact::rat_i(p), crate::exact::rat_i(0)],
                });
                let fe = desc.k_to_top(&SubfieldElement {
                    coords: acc.iter().map(|&c| crate::exact::rat_i(c)).collect(),
                });
                vec![pe, fe]
            }
        };
        let ideal = IdealHnf::from_generators(desc, ring, &gens)?;
        let f = (fac.len() - 1) as u32;
        debug_assert_eq!(ideal.norm, p.pow(f));
        out.push((ideal, e, f));
    }
    out.sort_by(|a, b| a.0.mat.cmp(&b.0.mat));
    cache.lock().unwrap().insert(p, out.clone());
    Ok(out)
}

/// Valuation of an ideal at a prime.
pub fn valuation(desc: &FieldDescriptor, prime: &IdealHnf, ideal: &IdealHnf) -> Result<u32> {
    let mut v = 0u32;
    let mut power = prime.clone();
    while power.divides(ideal) {
        v += 1;
        power = power.mul(desc, prime)?;
        if v > 256 {
            return Err(Error::Invariant("runaway valuation".into()));
        }
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// squarefree Moebius enumeration over the base ring
// ---------------------------------------------------------------------------

/// One squarefree base ideal with its Moebius value.
#[derive(Clone, Debug)]
pub struct MobiusTerm {
    pub ideal: IdealHnf,
    pub norm: i128,
    pub mu: i8,
}

/// All squarefree ideals of the chosen ring with norm at most `bound`,
/// coprime to every ideal in `exclude`, with Moebius values. Includes the
/// unit ideal.
pub fn mobius_enumerate(
    desc: &FieldDescriptor,
    ring: Ring,
    bound: i128,
    exclude: &[IdealHnf],
) -> Result<Vec<MobiusTerm>> {
    if bound < 1 {
        return Ok(Vec::new());
    }
    // Gather primes of the ring with norm <= bound.
    let mut primes: Vec<(IdealHnf, i128)> = Vec::new();
    let mut p = 2i128;
    while p <= bound {
        if small_primes().binary_search(&(p as u32)).is_ok() {
            for (ideal, _e, f) in primes_above(desc, ring, p)? {
                let norm = p.pow(f);
                if norm <= bound && !exclude.iter().any(|x| x == &ideal) {
                    primes.push((ideal, norm));
                }
            }
        }
        p += 1;
        if p > 100_000 {
            return Err(Error::Unsupported(
                "Moebius enumeration bound exceeds the prime table".into(),
            ));
        }
    }
    primes.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.mat.cmp(&b.0.mat)));
    let mut out = Vec::new();
    let unit = IdealHnf::unit(
        ring,
        match ring {
            Ring::Top => desc.dim,
            Ring::Base => desc.n_places,
        },
    );
    let mut stack: Vec<(usize, IdealHnf, i128, i8)> = vec![(0, unit, 1, 1)];
    while let Some((start, ideal, norm, mu)) = stack.pop() {
        out.push(MobiusTerm {
            ideal: ideal.clone(),
            norm,
            mu,
        });
        for i in start..primes.len() {
            let (ref pr, pn) = primes[i];
            if norm * pn > bound {
                continue;
            }
            stack.push((i + 1, ideal.mul(desc, pr)?, norm * pn, -mu));
        }
    }
    out.sort_by(|a, b| a.norm.cmp(&b.norm).then(a.ideal.mat.cmp(&b.ideal.mat)));
    Ok(out)
}

// ---------------------------------------------------------------------------
// decomposition of principal ideals
// ---------------------------------------------------------------------------

/// Splitting of (beta) into extended, ramified, and conjugate-coprime parts:
/// `(beta) = (A O_K) * prod(ramified at odd indices) * B`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    /// The maximal-norm base ideal whose extension divides (beta).
    pub a_base: IdealHnf,
    /// Indices into the descriptor's ramified list with odd valuation.
    pub ram_odd: Vec<usize>,
    /// Remainder, coprime to the ramified locus and to its own conjugate.
    pub b_top: IdealHnf,
    pub b_norm: i128,
}

/// Is the ideal coprime to the ramified locus and to its own conjugate?
pub fn in_conjugate_coprime_class(desc: &FieldDescriptor, b: &IdealHnf) -> Result<bool> {
    for pair in &desc.ramified {
        if !b.coprime(desc, &pair.p_ext)? {
            return Ok(false);
        }
    }
    b.coprime(desc, &b.conj(desc)?)
}

/// Exact three-part decomposition of a nonzero integral element's ideal.
pub fn decompose(desc: &FieldDescriptor, beta: &FieldElement) -> Result<Decomposition> {
    if beta.is_zero() {
        return Err(Error::Invariant("decomposition of zero".into()));
    }
    let nb = desc.norm_abs(beta);
    if !nb.denom().to_i128().map(|d| d == 1).unwrap_or(false) {
        return Err(Error::Invariant("decomposition requires an integral element".into()));
    }
    let n_int = nb
        .numer()
        .to_i128()
        .ok_or_else(|| Error::Invariant("norm overflow".into()))?
        .abs();
    let principal = IdealHnf::principal(desc, Ring::Top, beta)?;
    let mut a_base = IdealHnf::unit(Ring::Base, desc.n_places);
    let mut ram_odd = Vec::new();
    let mut b_top = IdealHnf::unit(Ring::Top, desc.dim);
    for (p, _) in factor_i128(n_int)? {
        let top_primes = primes_above(desc, Ring::Top, p)?;
        let vals: Vec<u32> = top_primes
            .iter()
            .map(|(q, _, _)| valuation(desc, q, &principal))
            .collect::<Result<_>>()?;
        // Group the top primes by the base primes they lie over.
        for (bp, _e, _f) in primes_above(desc, Ring::Base, p)? {
            let ext = bp.extend_to_top(desc)?;
            let over: Vec<usize> = (0..top_primes.len())
                .filter(|&i| top_primes[i].0.divides(&ext))
                .collect();
            match over.len() {
                2 => {
                    // Split in K/k: conjugate pair.
                    let (i, j) = (over[0], over[1]);
                    let a_e = vals[i].min(vals[j]);
                    if a_e > 0 {
                        a_base = a_base.mul(desc, &bp.pow(desc, a_e)?)?;
                    }
                    for &x in &[i, j] {
                        if vals[x] > a_e {
                            b_top =
                                b_top.mul(desc, &top_primes[x].0.pow(desc, vals[x] - a_e)?)?;
                        }
                    }
                }
                1 => {
                    let i = over[0];
                    let v = vals[i];
                    if v == 0 {
                        continue;
                    }
                    let rel_ramified = valuation(desc, &top_primes[i].0, &ext)? == 2;
                    if rel_ramified {
                        if v / 2 > 0 {
                            a_base = a_base.mul(desc, &bp.pow(desc, v / 2)?)?;
                        }
                        if v % 2 == 1 {
                            let idx = desc
                                .ramified
                                .iter()
                                .position(|pair| pair.p_ext == top_primes[i].0)
                                .ok_or_else(|| {
                                    Error::Invariant(
                                        "ramified prime missing from descriptor".into(),
                                    )
                                })?;
                            ram_odd.push(idx);
                        }
                    } else {
                        // Inert in K/k: the whole valuation extends from k.
                        a_base = a_base.mul(desc, &bp.pow(desc, v)?)?;
                    }
                }
                _ => {
                    return Err(Error::Invariant(
                        "unexpected splitting pattern over a base prime".into(),
                    ))
                }
            }
        }
    }
    ram_odd.sort_unstable();
    // Verify the product reconstructs (beta).
    let mut product = a_base.extend_to_top(desc)?;
    for &i in &ram_odd {
        product = product.mul(desc, &desc.ramified[i].p_ext)?;
    }
    product = product.mul(desc, &b_top)?;
    if product != principal {
        return Err(Error::Invariant(
            "decomposition does not re-multiply to (beta)".into(),
        ));
    }
    debug_assert!(in_conjugate_coprime_class(desc, &b_top)?);
    let b_norm = b_top.norm;
    Ok(Decomposition {
        a_base,
        ram_odd,
        b_top,
        b_norm,
    })
}
