//! `normone`: exact counting and equidistribution diagnostics for norm-one
//! elements of CM fields.
//!
//! Machine-readable JSON (or CSV) goes to standard output; a short human
//! summary goes to standard error. Exit codes: 0 success, 2 configuration
//! error, 3 assertion failure (a cross-check that must hold mathematically
//! did not), 4 precision exhaustion.

use std::cmp::Ordering;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_rational::BigRational;
use num_traits::Signed;

use normone::aggregate;
use normone::angle::{Angle, Arc, ArcProduct};
use normone::config::load_descriptor;
use normone::domain::RegionSF;
use normone::exact::parse_decimal;
use normone::field::HeightBound;
use normone::report::{
    build_aggregate_report, build_constants_report, build_count_report, count_csv_header,
    CountReport, REPORT_SCHEMA,
};
use normone::{oracle, Error, Result};

#[derive(Parser)]
#[command(
    name = "normone",
    version,
    about = "Exact counting of norm-one elements in CM fields",
    long_about = "Counts norm-one elements of bounded height in CM fields two independent \
                  ways (Moebius sieve and brute-force enumeration), compares against the \
                  asymptotic main term, and measures equidistribution.\n\n\
                  JSON or CSV reports go to stdout, human summaries to stderr. The \
                  environment variable NORMONE_PRECISION_BITS (default 128) sets the \
                  baseline working precision for certified comparisons."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Cap worker-thread parallelism (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Output format on stdout.
    #[arg(long, global = true, default_value = "json", value_parser = ["json", "csv"])]
    format: String,

    /// Attach wall-clock milliseconds to reports (off by default so that
    /// identical inputs produce byte-identical output).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Field-level constants: the leading asymptotic constant and the exact
    /// arithmetic data it is assembled from.
    Constants {
        /// Builtin field id (Qi, Qsqrt-3, Qsqrt-5, Qsqrt-7, Qzeta5) or a
        /// path to a field config JSON.
        #[arg(long)]
        field: String,
    },

    /// Exact count over an argument window and height bound(s), with an
    /// optional independent-enumeration cross-check.
    Count {
        #[arg(long)]
        field: String,
        /// Height bound(s), comma-separated; decimals or sqrtN (e.g. "5",
        /// "sqrt5", "2.5").
        #[arg(long = "H", value_name = "LIST")]
        heights: String,
        /// Argument window `lo:hi[,lo:hi...]` in radians (decimal literals,
        /// parsed exactly). Wrapping windows are split internally; for
        /// quartic fields give one window per place joined by `x`.
        /// Default: the full circle at every place.
        #[arg(long)]
        arc: Option<String>,
        /// Also run the brute-force enumeration and compare exactly.
        #[arg(long)]
        oracle: bool,
    },

    /// Count across a height grid and fit the residual against the
    /// expected error shape.
    Verify {
        #[arg(long)]
        field: String,
        #[arg(long = "H", value_name = "LIST")]
        heights: String,
        #[arg(long)]
        arc: Option<String>,
        /// Also cross-check each grid point against the enumeration oracle.
        #[arg(long)]
        oracle: bool,
    },

    /// Equidistribution discrepancy of the enumerated points (exact
    /// endpoint scan for quadratic fields, grid lower bound for quartic).
    Discrepancy {
        #[arg(long)]
        field: String,
        #[arg(long = "H", value_name = "LIST")]
        heights: String,
        #[arg(long)]
        arc: Option<String>,
    },

    /// Aggregate census of unit-circle algebraic numbers of degree at most
    /// two, pooled over all imaginary quadratic fields at once.
    S2 {
        /// Height bound (single value).
        #[arg(long = "H", value_name = "H")]
        height: String,
        /// Window `lo:hi[,lo:hi...]` on the circle; lower-half parts are
        /// reflected to the upper half (the count is invariant).
        /// Default: the upper half-circle.
        #[arg(long)]
        arc: Option<String>,
    },

    /// Histogram of first-place arguments over the enumerated points.
    Histogram {
        #[arg(long)]
        field: String,
        #[arg(long = "H", value_name = "H")]
        height: String,
        #[arg(long, default_value_t = 16)]
        bins: usize,
        #[arg(long)]
        arc: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // Ignore a second initialization (e.g. under test harnesses).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("normone: {e}");
            match e {
                Error::Config(_) | Error::Unsupported(_) => ExitCode::from(2),
                Error::Invariant(_) => ExitCode::from(3),
                Error::Precision(_) => ExitCode::from(4),
            }
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.cmd {
        Cmd::Constants { field } => cmd_constants(cli, field),
        Cmd::Count {
            field,
            heights,
            arc,
            oracle,
        } => cmd_count(cli, field, heights, arc.as_deref(), *oracle, false),
        Cmd::Verify {
            field,
            heights,
            arc,
            oracle,
        } => cmd_count(cli, field, heights, arc.as_deref(), *oracle, false),
        Cmd::Discrepancy {
            field,
            heights,
            arc,
        } => cmd_count(cli, field, heights, arc.as_deref(), true, true),
        Cmd::S2 { height, arc } => cmd_s2(cli, height, arc.as_deref()),
        Cmd::Histogram {
            field,
            height,
            bins,
            arc,
        } => cmd_histogram(cli, field, height, *bins, arc.as_deref()),
    }
}

// ---------------------------------------------------------------------------
// window parsing

/// Reduce an exact angle into `[0, 2*pi)` by subtracting full turns.
fn reduce_mod_two_pi(mut a: Angle) -> Result<Angle> {
    let two_pi = Angle::two_pi();
    let mut guard = 0;
    while a.cmp_angle(&two_pi) != Ordering::Less {
        a = a.sub(&two_pi);
        guard += 1;
        if guard > 64 {
            return Err(Error::Config("arc endpoint too large".into()));
        }
    }
    Ok(a)
}

/// Parse one `lo:hi` pair of exact decimal radians into non-wrapping arcs.
///
/// Endpoints are taken modulo a full turn; a span of at least `2*pi` means
/// the whole circle, and a window that wraps past `2*pi` is split in two.
fn parse_arc_spec(part: &str) -> Result<Vec<Arc>> {
    let (lo_s, hi_s) = part
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("arc `{part}` must have the form lo:hi")))?;
    let lo_r = parse_decimal(lo_s.trim())?;
    let hi_r = parse_decimal(hi_s.trim())?;
    if lo_r.is_negative() {
        return Err(Error::Config("arc start below zero".into()));
    }
    let span: BigRational = &hi_r - &lo_r;
    if !span.is_positive() {
        return Err(Error::Config("arc must have positive length".into()));
    }
    if Angle::from_rad(span)
        .cmp_angle(&Angle::two_pi())
        .is_ge()
    {
        return Ok(vec![Arc::full()]);
    }
    let lo = reduce_mod_two_pi(Angle::from_rad(lo_r))?;
    let hi = reduce_mod_two_pi(Angle::from_rad(hi_r))?;
    if lo.cmp_angle(&hi) == Ordering::Less {
        return Ok(vec![Arc::new(lo, hi)?]);
    }
    // Wrapped: [lo, 2*pi) plus [0, hi) when the second part is nonempty.
    let mut parts = vec![Arc::new(lo, Angle::two_pi())?];
    if hi.sign() > 0 {
        parts.push(Arc::new(Angle::zero(), hi)?);
    }
    Ok(parts)
}

/// Parse a full window spec: coordinates joined by `x`, arcs within one
/// coordinate joined by `,`.
fn parse_window(spec: Option<&str>, n_places: usize) -> Result<ArcProduct> {
    let Some(spec) = spec else {
        return Ok(ArcProduct::full(n_places));
    };
    let coords: Vec<&str> = spec.split('x').collect();
    if coords.len() != n_places {
        return Err(Error::Config(format!(
            "window has {} coordinate(s) but the field has {} archimedean place(s)",
            coords.len(),
            n_places
        )));
    }
    let mut out = Vec::new();
    for coord in coords {
        let mut arcs = Vec::new();
        for part in coord.split(',') {
            arcs.extend(parse_arc_spec(part)?);
        }
        out.push(arcs);
    }
    ArcProduct::new(out)
}

/// Fold circle arcs into upper-half windows for the aggregate census:
/// lower-half parts are reflected (the count is invariant under negation),
/// and arcs straddling `pi` are split first.
fn fold_to_upper(arcs: Vec<Arc>) -> Result<Vec<Arc>> {
    let half = Angle::from_pi(1, 1);
    let mut out = Vec::new();
    for arc in arcs {
        if arc.hi.cmp_angle(&half) != Ordering::Greater {
            out.push(arc);
        } else if arc.lo.cmp_angle(&half) != Ordering::Less {
            out.push(aggregate::reflect_to_upper(&arc)?);
        } else {
            out.push(Arc::new(arc.lo.clone(), half.clone())?);
            out.push(aggregate::reflect_to_upper(&Arc::new(
                half.clone(),
                arc.hi.clone(),
            )?)?);
        }
    }
    Ok(out)
}

fn parse_heights(list: &str) -> Result<Vec<HeightBound>> {
    list.split(',')
        .map(|s| HeightBound::parse(s.trim()))
        .collect()
}

// ---------------------------------------------------------------------------
// subcommands

fn cmd_constants(cli: &Cli, field: &str) -> Result<ExitCode> {
    if cli.format == "csv" {
        return Err(Error::Config(
            "constants has no CSV form; use --format json".into(),
        ));
    }
    let desc = load_descriptor(field)?;
    let rep = build_constants_report(&desc)?;
    print!("{}", rep.to_json());
    eprintln!(
        "{}: degree {}, class count {}, torsion order {}, leading constant {:.6}",
        rep.field, rep.degree, rep.class_count, rep.torsion_order, rep.leading_constant
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_count(
    cli: &Cli,
    field: &str,
    heights: &str,
    arc: Option<&str>,
    with_oracle: bool,
    with_discrepancy: bool,
) -> Result<ExitCode> {
    let desc = load_descriptor(field)?;
    let arcs = parse_window(arc, desc.n_places)?;
    let region = RegionSF::new(&desc, arcs)?;
    let mut reports: Vec<CountReport> = Vec::new();
    for hb in parse_heights(heights)? {
        let start = Instant::now();
        let mut rep = build_count_report(&desc, &region, &hb, with_oracle, with_discrepancy)?;
        if cli.timings {
            rep.wall_ms = Some(start.elapsed().as_millis() as u64);
        }
        reports.push(rep);
    }

    if cli.format == "csv" {
        print!("{}", count_csv_header());
        for r in &reports {
            print!("{}", r.to_csv_row());
        }
    } else {
        let mut s = serde_json::to_string_pretty(&reports).expect("report serialization");
        s.push('\n');
        print!("{s}");
    }

    let mut ok = true;
    for r in &reports {
        let oracle_note = match r.oracle_count {
            Some(o) if r.status == "ok" => format!(", oracle {o} agrees"),
            Some(o) => format!(", ORACLE MISMATCH {o}"),
            None => String::new(),
        };
        let disc_note = match r.discrepancy {
            Some(d) => format!(", discrepancy {d:.6}"),
            None => String::new(),
        };
        eprintln!(
            "{} H={}: count {} (main term {:.3}, residual {:+.3}{}{})",
            r.field, r.height, r.count, r.main_term, r.residual, oracle_note, disc_note
        );
        ok &= r.passed();
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn cmd_s2(cli: &Cli, height: &str, arc: Option<&str>) -> Result<ExitCode> {
    let hb = HeightBound::parse(height)?;
    let arcs = match arc {
        None => vec![Arc::new(Angle::zero(), Angle::from_pi(1, 1))?],
        Some(spec) => {
            let mut all = Vec::new();
            for part in spec.split(',') {
                all.extend(parse_arc_spec(part)?);
            }
            fold_to_upper(all)?
        }
    };
    let start = Instant::now();
    let mut rep = build_aggregate_report(&arcs, &hb)?;
    if cli.timings {
        rep.wall_ms = Some(start.elapsed().as_millis() as u64);
    }
    if cli.format == "csv" {
        print!("window,height,count,main_term,ratio\n");
        print!(
            "{},{},{},{:.9},{:.9}\n",
            rep.window.join("|"),
            rep.height,
            rep.count,
            rep.main_term,
            rep.ratio
        );
    } else {
        print!("{}", rep.to_json());
    }
    eprintln!(
        "aggregate H={}: count {} (main term {:.3}, ratio {:.4})",
        rep.height, rep.count, rep.main_term, rep.ratio
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_histogram(
    cli: &Cli,
    field: &str,
    height: &str,
    bins: usize,
    arc: Option<&str>,
) -> Result<ExitCode> {
    let desc = load_descriptor(field)?;
    let arcs = parse_window(arc, desc.n_places)?;
    let region = RegionSF::new(&desc, arcs)?;
    let hb = HeightBound::parse(height)?;
    let points = oracle::enumerate_norm_one(&desc, &region, &hb)?;
    let rows = oracle::histogram(&points, bins)?;
    if cli.format == "csv" {
        print!("{}", oracle::histogram_csv(&rows));
    } else {
        let json_rows: Vec<serde_json::Value> = rows
            .iter()
            .map(|(lo, hi, c)| {
                serde_json::json!({"bin_lo": lo, "bin_hi": hi, "count": c})
            })
            .collect();
        let doc = serde_json::json!({
            "schema": REPORT_SCHEMA,
            "field": desc.label,
            "height": hb.display,
            "points": points.len(),
            "bins": json_rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serialization");
        s.push('\n');
        print!("{s}");
    }
    eprintln!(
        "{} H={}: {} points in {} bins",
        desc.label,
        hb.display,
        points.len(),
        bins
    );
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arc_specs_reduce_and_split() {
        // Slightly more than a full turn collapses to the whole circle.
        let full = parse_arc_spec("0:6.2832").unwrap();
        assert_eq!(full, vec![Arc::full()]);
        // A window wrapping past 2*pi splits into two arcs.
        let parts = parse_arc_spec("5.5:7.0").unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].hi, Angle::two_pi());
        assert_eq!(parts[1].lo, Angle::zero());
        // Plain windows stay single.
        assert_eq!(parse_arc_spec("0.5:1.5").unwrap().len(), 1);
        // Degenerate and reversed windows are rejected.
        assert!(parse_arc_spec("1.0:1.0").is_err());
        assert!(parse_arc_spec("2.0:1.0").is_err());
        assert!(parse_arc_spec("nonsense").is_err());
    }

    #[test]
    fn window_validation() {
        assert!(parse_window(Some("0:1x0:1"), 1).is_err());
        assert!(parse_window(Some("0:1"), 2).is_err());
        let w = parse_window(Some("0:1,2:3"), 1).unwrap();
        assert_eq!(w.coords[0].len(), 2);
        // Overlapping arcs in one coordinate are rejected.
        assert!(parse_window(Some("0:2,1:3"), 1).is_err());
    }

    #[test]
    fn lower_half_folding() {
        // The full circle folds into the upper window twice.
        let folded = fold_to_upper(vec![Arc::full()]).unwrap();
        assert_eq!(folded.len(), 2);
        let half = Angle::from_pi(1, 1);
        assert_eq!(folded[0].hi, half);
        assert_eq!(folded[1].hi, half);
        let hb = HeightBound::parse("1").unwrap();
        let total: i64 = folded
            .iter()
            .map(|a| aggregate::count_aggregate(a, &hb).unwrap())
            .sum();
        // Eight roots of unity of degree at most two: +-1, +-i, and the
        // four primitive sixth/third roots.
        assert_eq!(total, 8);
    }
}
