//! Field configuration: built-in descriptors and the JSON loader.
//!
//! Two modes exist. `imag_quadratic` needs a single squarefree integer `d`
//! and everything else is derived. `quartic_cm` supplies the multiplication
//! table of an integral basis, the conjugation images, the real subfield
//! basis, units, ramified-prime generators, and discriminants; the loader
//! cross-validates all of it (associativity, conjugation laws, discriminant
//! compatibility, fundamental-unit and regulator checks, ramification
//! squares) before handing back a descriptor.

use num_rational::BigRational;
use serde::Deserialize;

use crate::exact::{parse_decimal, rat_i, ratio_to_f64};
use crate::field::{FieldDescriptor, RawDescriptor};
use crate::{Error, Result};

#[derive(Deserialize)]
#[serde(tag = "mode", deny_unknown_fields)]
enum ConfigFile {
    #[serde(rename = "imag_quadratic")]
    ImagQuadratic { d: i64 },
    #[serde(rename = "quartic_cm")]
    QuarticCm(Box<QuarticConfig>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuarticConfig {
    label: String,
    basis: BasisConfig,
    /// Images of the basis elements under conjugation, as coordinate rows.
    tau: Vec<Vec<i64>>,
    #[serde(default)]
    class_reps: Vec<Vec<Vec<i64>>>,
    units: Vec<Vec<i64>>,
    /// Decimal string; validated against the derived fundamental unit.
    regulator: String,
    ramified: Vec<RamifiedConfig>,
    discs: DiscConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisConfig {
    /// `mult_table[i][j]` = coordinates of (basis_i * basis_j).
    mult_table: Vec<Vec<Vec<i64>>>,
    /// Coordinates of the real-subfield basis inside the top field.
    #[serde(rename = "k_in_K")]
    subfield_basis: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RamifiedConfig {
    /// Generators of the base prime, in subfield coordinates.
    #[serde(rename = "P")]
    p_base: Vec<Vec<i64>>,
    /// Generators of the prime above it, in top-field coordinates.
    #[serde(rename = "p")]
    p_top: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiscConfig {
    k: i64,
    #[serde(rename = "K")]
    top: i64,
    rel_norm: i64,
}

/// The cyclotomic field of fifth roots of unity over its real subfield,
/// with basis `{1, z, z^2, z^3}` and `z^4 = -1 - z - z^2 - z^3`.
const QZETA5_JSON: &str = r#"{
  "mode": "quartic_cm",
  "label": "Q(zeta5)",
  "basis": {
    "mult_table": [
      [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]],
      [[0,1,0,0],[0,0,1,0],[0,0,0,1],[-1,-1,-1,-1]],
      [[0,0,1,0],[0,0,0,1],[-1,-1,-1,-1],[1,0,0,0]],
      [[0,0,0,1],[-1,-1,-1,-1],[1,0,0,0],[0,1,0,0]]
    ],
    "k_in_K": [[1,0,0,0],[0,0,-1,-1]]
  },
  "tau": [[1,0,0,0],[-1,-1,-1,-1],[0,0,0,1],[0,0,1,0]],
  "class_reps": [],
  "units": [[0,0,-1,-1]],
  "regulator": "0.4812118250596035",
  "ramified": [{"P": [[-1,2]], "p": [[1,-1,0,0]]}],
  "discs": {"k": 5, "K": 125, "rel_norm": 5}
}"#;

/// Resolve a field given either a built-in name or a path to a JSON file.
pub fn load_descriptor(spec: &str) -> Result<FieldDescriptor> {
    match spec {
        "Qi" => FieldDescriptor::imag_quadratic(1),
        "Qsqrt-3" => FieldDescriptor::imag_quadratic(3),
        "Qsqrt-5" => FieldDescriptor::imag_quadratic(5),
        "Qsqrt-7" => FieldDescriptor::imag_quadratic(7),
        "Qzeta5" => parse_config_str(QZETA5_JSON),
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read field config `{path}`: {e}"))
            })?;
            parse_config_str(&text)
        }
    }
}

/// Parse and validate a JSON field configuration.
pub fn parse_config_str(text: &str) -> Result<FieldDescriptor> {
    let parsed: ConfigFile = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("field config parse error: {e}")))?;
    match parsed {
        ConfigFile::ImagQuadratic { d } => FieldDescriptor::imag_quadratic(d),
        ConfigFile::QuarticCm(q) => assemble_quartic(*q),
    }
}

fn ints_to_rats(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&c| rat_i(c as i128)).collect()
}

fn assemble_quartic(q: QuarticConfig) -> Result<FieldDescriptor> {
    let dim = q.basis.mult_table.len();
    if dim != 4 {
        return Err(Error::Config(format!(
            "quartic mode expects a 4x4x4 multiplication table, got {dim}"
        )));
    }
    let mult_table: Vec<Vec<Vec<BigRational>>> = q
        .basis
        .mult_table
        .iter()
        .map(|row| row.iter().map(|e| ints_to_rats(e)).collect())
        .collect();
    let tau_mat = transpose_images(&q.tau, dim)?;
    let regulator_claim = ratio_to_f64(&parse_decimal(&q.regulator)?);
    let raw = RawDescriptor {
        label: q.label,
        n_places: 2,
        mult_table,
        tau_mat,
        basis_k: q.basis.subfield_basis.iter().map(|v| ints_to_rats(v)).collect(),
        disc_k: q.discs.k as i128,
        disc_k_field: q.discs.top as i128,
        rel_disc_norm: q.discs.rel_norm as i128,
        units: q.units.iter().map(|v| ints_to_rats(v)).collect(),
        regulator_claim: Some(regulator_claim),
        ramified_gens: q
            .ramified
            .iter()
            .map(|r| {
                (
                    r.p_base.iter().map(|v| ints_to_rats(v)).collect(),
                    r.p_top.iter().map(|v| ints_to_rats(v)).collect(),
                )
            })
            .collect(),
        class_reps: q
            .class_reps
            .iter()
            .map(|rep| rep.iter().map(|v| ints_to_rats(v)).collect())
            .collect(),
    };
    FieldDescriptor::assemble(raw)
}

/// Config rows are images of basis elements; the descriptor stores the matrix
/// with `[r][c]` = coefficient of `basis_r` in the image of `basis_c`.
fn transpose_images(images: &[Vec<i64>], dim: usize) -> Result<Vec<Vec<i64>>> {
    if images.len() != dim || images.iter().any(|r| r.len() != dim) {
        return Err(Error::Config("conjugation image shape mismatch".into()));
    }
    Ok((0..dim)
        .map(|r| (0..dim).map(|c| images[c][r]).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::field::FieldElement;

    #[test]
    fn builtin_names_resolve() {
        for name in ["Qi", "Qsqrt-3", "Qsqrt-5", "Qsqrt-7"] {
            let f = load_descriptor(name).unwrap();
            assert_eq!(f.n_places, 1);
        }
    }

    #[test]
    fn cyclotomic_builtin_loads() {
        let f = load_descriptor("Qzeta5").unwrap();
        assert_eq!(f.n_places, 2);
        assert_eq!(f.dim, 4);
        assert_eq!(f.disc_k, 5);
        assert_eq!(f.disc_k_field, 125);
        assert_eq!(f.rel_disc_norm, 5);
        assert_eq!(f.ramified.len(), 1);
        assert_eq!(f.ramified[0].norm_base, 5);
        assert!((f.regulator - 0.481_211_825_059_603_4).abs() < 1e-12);
        // Golden-ratio unit: z^5 = 1 forces the first place onto the unit
        // circle, and the subfield embedding of the unit must be (1+sqrt5)/2.
        let uk = f.top_to_k(&f.units[0].clone()).unwrap();
        let val = f.k_embed(&uk, 0).unwrap().to_f64();
        assert!((val - 1.618_033_988_749_895).abs() < 1e-12);
        let conj_val = f.k_embed(&uk, 1).unwrap().to_f64();
        assert!((conj_val + 0.618_033_988_749_895).abs() < 1e-12);
    }

    #[test]
    fn imag_quadratic_json_mode() {
        let f = parse_config_str(r#"{"mode": "imag_quadratic", "d": 2}"#).unwrap();
        assert_eq!(f.disc_k_field, -8);
        assert!(parse_config_str(r#"{"mode": "imag_quadratic", "d": 4}"#).is_err());
        assert!(parse_config_str(r#"{"mode": "bogus"}"#).is_err());
    }

    #[test]
    fn missing_path_is_config_error() {
        match load_descriptor("/nonexistent/field.json") {
            Err(Error::Config(_)) => {}
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn tampered_quartic_rejected() {
        // Break one structure constant; associativity validation must fire.
        let bad = QZETA5_JSON.replace("[-1,-1,-1,-1],[1,0,0,0],[0,1,0,0]", "[-1,-1,-1,-1],[1,0,0,0],[0,1,1,0]");
        assert!(bad != QZETA5_JSON);
        assert!(parse_config_str(&bad).is_err());
        // Wrong regulator claim.
        let bad = QZETA5_JSON.replace("0.4812118250596035", "0.50");
        assert!(parse_config_str(&bad).is_err());
        // Non-fundamental unit (the square of the golden ratio).
        let bad = QZETA5_JSON.replace(
            "\"units\": [[0,0,-1,-1]]",
            "\"units\": [[1,0,-1,-1]]",
        );
        assert!(parse_config_str(&bad).is_err());
    }

    #[test]
    fn torsion_of_cyclotomic_field() {
        let f = load_descriptor("Qzeta5").unwrap();
        // 10 roots of unity: +-z^j.
        let z = f.basis_elem(1);
        assert!(f.is_torsion(&z).unwrap());
        let mz = z.neg();
        assert!(f.is_torsion(&mz).unwrap());
        assert!(!f.is_torsion(&f.units[0].clone()).unwrap());
        assert_eq!(f.torsion_count().unwrap(), 10);
    }

    #[test]
    fn cyclotomic_heights() {
        let f = load_descriptor("Qzeta5").unwrap();
        // Roots of unity have height 1 (the power is H^{2N} = H^4).
        let z = f.basis_elem(1);
        let h4 = f.weil_height_pow(&z).unwrap();
        assert_eq!(h4, crate::exact::Quad::one());
        // delta = z - z^4 is conjugate-antisymmetric, so psi collapses it to
        // the torsion element -1 even though |N(delta)| = 5.
        let z4 = f.mul(&z, &f.mul(&z, &f.mul(&z, &z)));
        let delta = z.sub(&z4);
        assert_eq!(f.norm_abs(&delta), rat(5, 1));
        let alpha = f.psi(&delta).unwrap();
        assert!(f.is_torsion(&alpha).unwrap());
        // beta = 2 + z generates a degree-one prime over the split prime 11;
        // its psi-image has fourth power of the height exactly 11.
        let beta = FieldElement::from_ints(&[2, 1, 0, 0]);
        assert_eq!(f.norm_abs(&beta), rat(11, 1));
        let alpha = f.psi(&beta).unwrap();
        assert!(f.in_sk(&alpha).unwrap());
        let h4 = f.weil_height_pow(&alpha).unwrap();
        assert_eq!(h4, crate::exact::Quad::from_rational(rat(11, 1)));
    }
}
