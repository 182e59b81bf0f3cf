//! Counting regions: height-and-argument bodies with exact membership.
//!
//! A region couples an argument window on the torus with a radial height
//! bound and, when the real subfield has units, a fundamental window for the
//! unit action on moduli. Membership of an algebraic point is decided
//! exactly; floating point only screens clear cases, and anything within a
//! hair of a boundary is escalated to the exact angle comparisons.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::angle::{Angle, Arc, ArcProduct, PlanarPoint};
use crate::exact::{floor_sqrt, rat, rat_i, Quad};
use crate::field::{FieldDescriptor, FieldElement, HeightBound};
use crate::{Error, Result};

const TAU: f64 = std::f64::consts::TAU;
/// Screening margin for float argument tests; anything closer to an endpoint
/// goes through the exact comparison.
const ARG_MARGIN: f64 = 1e-9;

/// Precomputed float endpoints of one coordinate's arcs.
type CoordCache = Vec<(f64, f64)>;

/// The counting region: an argument window `I` for the norm-one points
/// themselves and the derived window for their lattice representatives.
#[derive(Clone, Debug)]
pub struct RegionSF {
    /// The window `I` on the arguments of the counted points.
    pub arcs_alpha: ArcProduct,
    /// Sign-completed half-angle window for lattice representatives.
    pub arcs_beta: ArcProduct,
    pub n_places: usize,
    /// Fourth power of the fundamental unit at the first place (two places
    /// only): the exclusive end of the modulus-ratio window.
    eps_pow4: Option<Quad>,
    eps_f64: f64,
    alpha_cache: Vec<CoordCache>,
    beta_cache: Vec<CoordCache>,
    alpha_full: Vec<bool>,
    beta_full: Vec<bool>,
    /// Float embedding of each basis element at each place, for screening.
    emb_f64: Vec<Vec<(f64, f64)>>,
}

impl RegionSF {
    pub fn new(desc: &FieldDescriptor, arcs_alpha: ArcProduct) -> Result<Self> {
        if arcs_alpha.dim() != desc.n_places {
            return Err(Error::Config(format!(
                "window has {} coordinates for {} places",
                arcs_alpha.dim(),
                desc.n_places
            )));
        }
        let arcs_beta = arcs_alpha.half_domain();
        let (eps_pow4, eps_f64) = if desc.n_places == 2 {
            let uk = desc.top_to_k(&desc.units[0])?;
            let e1 = desc.k_embed(&uk, 0)?;
            let e2 = e1.mul(&e1)?;
            let e4 = e2.mul(&e2)?;
            (Some(e4), e1.to_f64())
        } else {
            (None, 1.0)
        };
        let alpha_cache = endpoint_cache(&arcs_alpha);
        let beta_cache = endpoint_cache(&arcs_beta);
        let alpha_full = full_flags(&arcs_alpha);
        let beta_full = full_flags(&arcs_beta);
        let mut emb_f64 = vec![Vec::with_capacity(desc.dim); desc.n_places];
        for j in 0..desc.dim {
            let pts = desc.planar_points(&desc.basis_elem(j))?;
            for (place, pt) in pts.iter().enumerate() {
                emb_f64[place].push((pt.re_f64(), pt.im_f64()));
            }
        }
        Ok(RegionSF {
            arcs_alpha,
            arcs_beta,
            n_places: desc.n_places,
            eps_pow4,
            eps_f64,
            alpha_cache,
            beta_cache,
            alpha_full,
            beta_full,
            emb_f64,
        })
    }

    /// Ball radius (as a bound on the sum of squared moduli) that contains
    /// every representative passing the radial bound `|N(beta)| <= radial`
    /// and, with two places, the modulus window.
    pub fn ball_radius_sq(&self, radial: &BigRational) -> BigRational {
        match self.n_places {
            1 => radial.clone(),
            _ => {
                // |sigma_1|^2 < eps^2 T^2 and |sigma_2|^2 <= T^2 inside the
                // window, so eps^2 + 1 < 19/5 works for the golden ratio and
                // anything smaller; scale by a ceiling of T^2 = sqrt(radial).
                let t2 = BigRational::from_integer(floor_sqrt(radial) + 1);
                rat(19, 5) * t2
            }
        }
    }

    /// Exact membership of a lattice representative: nonzero, the radial
    /// bound, the modulus window, and the half-angle argument window.
    pub fn beta_in_region(
        &self,
        desc: &FieldDescriptor,
        coords: &[i128],
        radial: &BigRational,
    ) -> Result<bool> {
        if coords.iter().all(|&c| c == 0) {
            return Ok(false);
        }
        let e = FieldElement::new(coords.iter().map(|&c| rat_i(c)).collect());
        if desc.norm_abs(&e) > *radial {
            return Ok(false);
        }
        self.beta_args_window(desc, coords)
    }

    /// Modulus-window plus half-angle argument membership (radial bound
    /// excluded). Floating point screens points that are clearly in or out;
    /// anything within the margin of a boundary is re-decided exactly.
    pub fn beta_args_window(&self, desc: &FieldDescriptor, coords: &[i128]) -> Result<bool> {
        let mut pts = [(0.0f64, 0.0f64); 2];
        for place in 0..self.n_places {
            let emb = &self.emb_f64[place];
            let (mut x, mut y) = (0.0f64, 0.0f64);
            for (i, &c) in coords.iter().enumerate() {
                if c != 0 {
                    x += c as f64 * emb[i].0;
                    y += c as f64 * emb[i].1;
                }
            }
            pts[place] = (x, y);
        }
        const DELTA: f64 = 1e-9;
        if self.eps_pow4.is_some() {
            let s0 = pts[0].0 * pts[0].0 + pts[0].1 * pts[0].1;
            let s1 = pts[1].0 * pts[1].0 + pts[1].1 * pts[1].1;
            if s1 <= 0.0 || s0 <= 0.0 {
                return self.beta_args_window_exact(desc, coords);
            }
            let r = s0 / s1;
            let cap = self.eps_f64.powi(4);
            if r < 1.0 - DELTA || r > cap * (1.0 + DELTA) {
                return Ok(false);
            }
            if r < 1.0 + DELTA || r > cap * (1.0 - DELTA) {
                return self.beta_args_window_exact(desc, coords);
            }
        }
        for place in 0..self.n_places {
            if self.beta_full[place] {
                continue;
            }
            let (x, y) = pts[place];
            let mut a = y.atan2(x);
            if !a.is_finite() {
                return self.beta_args_window_exact(desc, coords);
            }
            if a < 0.0 {
                a += TAU;
            }
            if a < DELTA || a > TAU - DELTA {
                return self.beta_args_window_exact(desc, coords);
            }
            let mut inside = false;
            for &(lo, hi) in &self.beta_cache[place] {
                if (a - lo).abs() < DELTA || (a - hi).abs() < DELTA {
                    return self.beta_args_window_exact(desc, coords);
                }
                if a > lo && a < hi {
                    inside = true;
                }
            }
            if !inside {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Fully exact fallback for `beta_args_window`.
    fn beta_args_window_exact(&self, desc: &FieldDescriptor, coords: &[i128]) -> Result<bool> {
        let e = FieldElement::new(coords.iter().map(|&c| rat_i(c)).collect());
        let pts = desc.planar_points(&e)?;
        if let Some(e4) = &self.eps_pow4 {
            let s1 = pts[0].norm_sq()?;
            let s2 = pts[1].norm_sq()?;
            if s1.cmp_quad(&s2)? == std::cmp::Ordering::Less {
                return Ok(false);
            }
            let cap = e4.mul(&s2)?;
            if s1.cmp_quad(&cap)? != std::cmp::Ordering::Less {
                return Ok(false);
            }
        }
        window_contains(&self.arcs_beta, &self.beta_cache, &self.beta_full, &pts)
    }

    /// Exact membership of a norm-one point itself: height bound plus the
    /// argument window `I`.
    pub fn alpha_in_region(
        &self,
        desc: &FieldDescriptor,
        alpha: &FieldElement,
        height: &HeightBound,
    ) -> Result<bool> {
        let h_pow = desc.weil_height_pow(alpha)?;
        if !height.accepts(desc.n_places, &h_pow)? {
            return Ok(false);
        }
        self.alpha_args_in(desc, alpha)
    }

    /// Argument-window test alone, for classifying points already known to
    /// satisfy a height bound.
    pub fn alpha_args_in(&self, desc: &FieldDescriptor, alpha: &FieldElement) -> Result<bool> {
        let pts = desc.planar_points(alpha)?;
        window_contains(&self.arcs_alpha, &self.alpha_cache, &self.alpha_full, &pts)
    }

    /// Closed-form volume of the unit region: the product of the window
    /// measure with the radial-and-unit integral `R_k / 2^{N+1}`.
    pub fn volume_unit(&self, desc: &FieldDescriptor) -> f64 {
        let measure = self.arcs_alpha.measure_f64();
        measure * desc.regulator / 2f64.powi(desc.n_places as i32 + 1)
    }

    /// Monte Carlo estimate of the same volume with its standard error:
    /// rejection sampling from a box that contains the all-halved region.
    pub fn mc_volume(&self, desc: &FieldDescriptor, samples: u64, seed: u64) -> (f64, f64) {
        let halved = ArcProduct {
            coords: self
                .arcs_alpha
                .coords
                .iter()
                .map(|arcs| arcs.iter().map(Arc::half).collect())
                .collect(),
        };
        let n = desc.n_places;
        // Moduli never exceed 1 with one place, and eps with two.
        let side = if n == 1 { 1.0 } else { self.eps_f64 };
        let box_vol = (2.0 * side).powi(2 * n as i32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = 0u64;
        let eps4 = self.eps_f64.powi(4);
        let mut args = vec![0.0f64; n];
        for _ in 0..samples {
            let mut sq = vec![0.0f64; n];
            let mut dead = false;
            for place in 0..n {
                let x = rng.gen_range(-side..side);
                let y = rng.gen_range(-side..side);
                let s = x * x + y * y;
                if s == 0.0 {
                    dead = true;
                    break;
                }
                sq[place] = s;
                let mut a = y.atan2(x);
                if a < 0.0 {
                    a += TAU;
                }
                args[place] = a;
            }
            if dead {
                continue;
            }
            let radial: f64 = sq.iter().product();
            if radial > 1.0 {
                continue;
            }
            if n == 2 && (sq[0] < sq[1] || sq[0] >= eps4 * sq[1]) {
                continue;
            }
            if halved.contains_f64(&args) {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        let est = box_vol * p;
        let se = box_vol * (p * (1.0 - p) / samples as f64).sqrt();
        (est, se)
    }
}

/// Lipschitz boundary cover of a union of disk sectors of radius `t`: each
/// arc needs two radii and one piece per started quarter turn; a full circle
/// needs four quarter arcs and no radii. The constant `2 t` dominates both
/// the radius pieces (length `t`) and quarter arcs (length `pi t / 2`).
pub fn sector_boundary_params(arcs: &[Arc], t: f64) -> (u32, f64) {
    let mut total = Angle::zero();
    for a in arcs {
        total = total.add(&a.length());
    }
    if total.cmp_angle(&Angle::two_pi()) == std::cmp::Ordering::Equal {
        return (4, 2.0 * t);
    }
    let mut pieces = 0u32;
    for a in arcs {
        let len = a.length_f64();
        pieces += 2 + (len / std::f64::consts::FRAC_PI_2).ceil() as u32;
    }
    (pieces, 2.0 * t)
}

fn endpoint_cache(prod: &ArcProduct) -> Vec<CoordCache> {
    prod.coords
        .iter()
        .map(|arcs| {
            arcs.iter()
                .map(|a| (a.lo.to_f64(), a.hi.to_f64()))
                .collect()
        })
        .collect()
}

fn full_flags(prod: &ArcProduct) -> Vec<bool> {
    prod.coords
        .iter()
        .map(|arcs| {
            let mut total = Angle::zero();
            for a in arcs {
                total = total.add(&a.length());
            }
            total.cmp_angle(&Angle::two_pi()) == std::cmp::Ordering::Equal
        })
        .collect()
}

fn window_contains(
    prod: &ArcProduct,
    cache: &[CoordCache],
    full: &[bool],
    pts: &[PlanarPoint],
) -> Result<bool> {
    for (coord, pt) in pts.iter().enumerate() {
        if full[coord] {
            continue;
        }
        match coord_contains_fast(&cache[coord], pt) {
            Some(true) => continue,
            Some(false) => return Ok(false),
            None => {
                let mut hit = false;
                for arc in &prod.coords[coord] {
                    if arc.contains_point(pt)? {
                        hit = true;
                        break;
                    }
                }
                if !hit {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Float screening: `Some(answer)` when the argument clears every endpoint
/// by the margin, `None` when an exact comparison is required.
fn coord_contains_fast(cache: &CoordCache, pt: &PlanarPoint) -> Option<bool> {
    let mut a = pt.arg_f64();
    if !a.is_finite() {
        return None;
    }
    if a < 0.0 {
        a += TAU;
    }
    // Near the wrap both representations are ambiguous; escalate.
    if a < ARG_MARGIN || a > TAU - ARG_MARGIN {
        return None;
    }
    let mut inside = false;
    for &(lo, hi) in cache {
        if (a - lo).abs() < ARG_MARGIN || (a - hi).abs() < ARG_MARGIN {
            return None;
        }
        if a > lo && a < hi {
            inside = true;
        }
    }
    Some(inside)
}

/// Quick helper: `[0, 2*pi)^n` region for a descriptor.
pub fn full_region(desc: &FieldDescriptor) -> Result<RegionSF> {
    RegionSF::new(desc, ArcProduct::full(desc.n_places))
}

/// Height-and-window region check reused by oracle-style scans: all nonzero
/// integral vectors in a ball that certifies coverage of the region.
pub fn certified_ball_bound(
    region: &RegionSF,
    height: &HeightBound,
    cell_norm: i128,
) -> Result<BigRational> {
    let radial = height.pow_2n(region.n_places) * rat_i(cell_norm);
    Ok(region.ball_radius_sq(&radial))
}
