//! Machine-readable reports assembled from the counting pipeline.
//!
//! A report bundles one full run — exact sieve count, optional independent
//! enumeration, main-term comparison, residual fit, and the term-ledger
//! summary — into a serializable record with a stable schema. All fields are
//! produced deterministically, so identical inputs yield byte-identical
//! JSON; wall-clock time is the one nondeterministic datum and is only
//! present when the caller chooses to attach it.

use serde::{Deserialize, Serialize};

use crate::domain::RegionSF;
use crate::field::{FieldDescriptor, HeightBound};
use crate::sieve::SieveTermLedger;
use crate::{oracle, sieve, Result};

/// Schema tag stamped on every JSON report.
pub const REPORT_SCHEMA: &str = "normone-report/1";

/// Per-cell subtotal in serialized form: class index, indices of the
/// ramified primes in the cell divisor, and the cell's exact count.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CellTotalReport {
    pub class_idx: usize,
    pub ram: Vec<usize>,
    pub count: i64,
}

/// Ledger summary carried inside a report: term census, the exact radial
/// truncation used (as a rational string), and per-cell subtotals.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LedgerReport {
    pub term_count: u64,
    pub truncation: String,
    pub cell_totals: Vec<CellTotalReport>,
}

impl LedgerReport {
    pub fn from_ledger(ledger: &SieveTermLedger) -> Self {
        LedgerReport {
            term_count: ledger.term_count,
            truncation: ledger.truncation.clone(),
            cell_totals: ledger
                .cell_totals
                .iter()
                .map(|c| CellTotalReport {
                    class_idx: c.class_idx,
                    ram: c.ram_cell.clone(),
                    count: c.count,
                })
                .collect(),
        }
    }
}

/// One full counting run over a field, window, and height bound.
///
/// `residual` is always `count - main_term`; `fitted_residual` rescales it
/// by the expected error shape `H^(2N-1) * ln(H)` and is absent when the
/// height bound does not exceed one (the logarithm vanishes). When an
/// oracle count is present and disagrees with the sieve, `status` is
/// `"FAILED"`; otherwise `"ok"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountReport {
    pub schema: String,
    pub field: String,
    pub window: Vec<Vec<String>>,
    pub height: String,
    pub count: i64,
    pub oracle_count: Option<i64>,
    pub main_term: f64,
    pub residual: f64,
    pub fitted_residual: Option<f64>,
    pub discrepancy: Option<f64>,
    pub discrepancy_mode: Option<String>,
    pub ledger: LedgerReport,
    pub wall_ms: Option<u64>,
    pub status: String,
}

/// Fixed rendering of one arc as `lo:hi` in radians (12 decimal places,
/// locale-independent).
pub fn render_arc(lo: f64, hi: f64) -> String {
    format!("{lo:.12}:{hi:.12}")
}

fn render_window(region: &RegionSF) -> Vec<Vec<String>> {
    region
        .arcs_alpha
        .coords
        .iter()
        .map(|arcs| {
            arcs.iter()
                .map(|a| render_arc(a.lo.to_f64(), a.hi.to_f64()))
                .collect()
        })
        .collect()
}

fn fitted(desc: &FieldDescriptor, hbound: &HeightBound, residual: f64) -> Option<f64> {
    let h = hbound.h_f64();
    if h <= 1.0 {
        return None;
    }
    let shape = h.powi(2 * desc.n_places as i32 - 1) * h.ln();
    Some(residual / shape)
}

/// Run the sieve (and optionally the enumeration oracle and discrepancy
/// scan) over one window and height bound and assemble the report.
pub fn build_count_report(
    desc: &FieldDescriptor,
    region: &RegionSF,
    hbound: &HeightBound,
    with_oracle: bool,
    with_discrepancy: bool,
) -> Result<CountReport> {
    let (count, ledger) = sieve::count_norm_one(desc, region, hbound, false)?;
    let main = sieve::main_term(desc, region, hbound)?;
    let residual = count as f64 - main;

    let mut oracle_count = None;
    let mut discrepancy = None;
    let mut discrepancy_mode = None;
    if with_oracle || with_discrepancy {
        let points = oracle::enumerate_norm_one(desc, region, hbound)?;
        oracle_count = Some(points.len() as i64);
        if with_discrepancy {
            let d = oracle::discrepancy(desc, &points)?;
            discrepancy = Some(d.value);
            discrepancy_mode = Some(d.mode);
        }
    }

    let status = match oracle_count {
        Some(o) if o != count => "FAILED".to_string(),
        _ => "ok".to_string(),
    };

    Ok(CountReport {
        schema: REPORT_SCHEMA.to_string(),
        field: desc.label.clone(),
        window: render_window(region),
        height: hbound.display.clone(),
        count,
        oracle_count,
        main_term: main,
        residual,
        fitted_residual: fitted(desc, hbound, residual),
        discrepancy,
        discrepancy_mode,
        ledger: LedgerReport::from_ledger(&ledger),
        wall_ms: None,
        status,
    })
}

impl CountReport {
    pub fn passed(&self) -> bool {
        self.status == "ok"
    }

    /// Stable JSON rendering (pretty-printed, trailing newline).
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    /// One CSV row matching [`count_csv_header`].
    pub fn to_csv_row(&self) -> String {
        let opt_i = |v: &Option<i64>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_f = |v: &Option<f64>| v.map(|x| format!("{x:.9}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{:.9},{:.9},{},{},{}\n",
            self.field,
            self.window
                .iter()
                .map(|c| c.join(";"))
                .collect::<Vec<_>>()
                .join("|"),
            self.height,
            self.count,
            opt_i(&self.oracle_count),
            self.main_term,
            self.residual,
            opt_f(&self.fitted_residual),
            opt_f(&self.discrepancy),
            self.status,
        )
    }
}

/// Header for CSV count/verify output.
pub fn count_csv_header() -> String {
    "field,window,height,count,oracle,main_term,residual,fitted,discrepancy,status\n".to_string()
}

/// Field-level constants: the leading asymptotic constant and the exact
/// arithmetic data it is assembled from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub schema: String,
    pub field: String,
    pub degree: usize,
    pub places: usize,
    pub base_discriminant: i128,
    pub discriminant: i128,
    pub relative_discriminant_norm: i128,
    pub class_count: usize,
    pub torsion_order: u32,
    pub regulator: f64,
    pub ramified_base_norms: Vec<i128>,
    pub base_zeta_two: f64,
    pub leading_constant: f64,
}

/// Number of roots of unity, found by scanning the small coordinate box
/// that must contain them (torsion elements are integral with every
/// embedding on the unit circle, so their coordinates are bounded).
pub fn torsion_order(desc: &FieldDescriptor) -> Result<u32> {
    let mut count = 0u32;
    let dim = desc.dim;
    let mut coords = vec![-2i64; dim];
    loop {
        if coords.iter().any(|&c| c != 0) {
            let x = crate::field::FieldElement::from_ints(&coords);
            if desc.is_torsion(&x)? {
                count += 1;
            }
        }
        let mut i = 0;
        loop {
            if i == dim {
                return Ok(count);
            }
            coords[i] += 1;
            if coords[i] <= 2 {
                break;
            }
            coords[i] = -2;
            i += 1;
        }
    }
}

pub fn build_constants_report(desc: &FieldDescriptor) -> Result<ConstantsReport> {
    let (zeta2, _) = sieve::zeta_base_two(desc, 100_000);
    let zeta2 = sieve::zeta_base_two_closed(desc).unwrap_or(zeta2);
    Ok(ConstantsReport {
        schema: REPORT_SCHEMA.to_string(),
        field: desc.label.clone(),
        degree: desc.dim,
        places: desc.n_places,
        base_discriminant: desc.disc_k,
        discriminant: desc.disc_k_field,
        relative_discriminant_norm: desc.rel_disc_norm,
        class_count: desc.class_reps.len(),
        torsion_order: torsion_order(desc)?,
        regulator: desc.regulator,
        ramified_base_norms: desc.ramified.iter().map(|r| r.norm_base).collect(),
        base_zeta_two: zeta2,
        leading_constant: sieve::leading_constant(desc)?,
    })
}

impl ConstantsReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}

/// One aggregate-census run over all imaginary quadratic fields at once.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AggregateReport {
    pub schema: String,
    pub window: Vec<String>,
    pub height: String,
    pub count: i64,
    pub main_term: f64,
    pub ratio: f64,
    pub wall_ms: Option<u64>,
}

pub fn build_aggregate_report(
    arcs: &[crate::angle::Arc],
    hbound: &HeightBound,
) -> Result<AggregateReport> {
    let mut count = 0i64;
    let mut main = 0.0f64;
    for arc in arcs {
        count += crate::aggregate::count_aggregate(arc, hbound)?;
        main += crate::aggregate::aggregate_main_term(arc, hbound);
    }
    Ok(AggregateReport {
        schema: REPORT_SCHEMA.to_string(),
        window: arcs
            .iter()
            .map(|a| render_arc(a.lo.to_f64(), a.hi.to_f64()))
            .collect(),
        height: hbound.display.clone(),
        count,
        main_term: main,
        ratio: count as f64 / main,
        wall_ms: None,
    })
}

impl AggregateReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}
