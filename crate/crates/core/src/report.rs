//! File formats: constellation JSON, metric rows and the frontier/baseline CSVs.
//!
//! Numbers in CSV output use 12 significant digits so that files are
//! byte-identical across runs with the same configuration.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::comm::{
    estimate_mi, gap_upper_bound_from_dmin, gaussian_capacity, mi_lower_bound_from_dmin, ChannelSpec, MiEstimate,
};
use crate::constellation::{build_apsk, ApskDesign, Constellation, Family};
use crate::error::{ApskError, Result};
use crate::geometry::{dmin, layout_distance, DistanceReport};
use crate::rng::derive_seed;
use crate::sense::{avg_crb_bound, avg_crb_monte_carlo, variance_metric, CrbEstimate, SensingSpec};
use crate::tradeoff::{FrontierSet, SweepRow, TimeSharing};

/// Formats with 12 significant digits, `%g` style.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-5..12).contains(&exp) {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    let fixed = format!("{:.*}", (11 - exp) as usize, x);
    trim_zeros(&fixed).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointJson {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationMeta {
    pub m: u32,
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rings: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring_counts: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
    pub mean_energy: f64,
    pub variance: f64,
    pub min_energy: f64,
    pub d_min: f64,
    /// Remainder ring larger than `alpha * K` (tradeoff family only).
    #[serde(default)]
    pub oversized_last_ring: bool,
}

/// `{meta, points: [{re, im}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationFile {
    pub meta: ConstellationMeta,
    pub points: Vec<PointJson>,
}

impl ConstellationFile {
    pub fn from_constellation(c: &Constellation) -> Self {
        let layout = c.layout();
        let oversized = match c.family() {
            Family::Tradeoff { params } => params.oversized_last_ring(),
            _ => false,
        };
        Self {
            meta: ConstellationMeta {
                m: c.m(),
                family: c.family().clone(),
                rings: layout.map(|l| l.rings()),
                ring_counts: layout.map(|l| l.counts.clone()),
                radii: layout.map(|l| l.radii.clone()),
                phases: layout.map(|l| l.phases.clone()),
                mean_energy: c.moments().mean,
                variance: c.moments().variance,
                min_energy: c.min_energy(),
                d_min: dmin(c),
                oversized_last_ring: oversized,
            },
            points: c.points().iter().map(|p| PointJson { re: p.re, im: p.im }).collect(),
        }
    }

    /// Rebuilds the constellation. Ring metadata, when present, restores the
    /// ring layout and must agree with the listed points.
    pub fn to_constellation(&self) -> Result<Constellation> {
        let raw: Vec<Complex64> = self.points.iter().map(|p| Complex64::new(p.re, p.im)).collect();
        let meta = &self.meta;
        match (&meta.ring_counts, &meta.radii, &meta.phases) {
            (Some(counts), Some(radii), Some(phases)) => {
                let design = ApskDesign::new(meta.m, counts.clone(), radii.clone(), phases.clone());
                let c = build_apsk(&design)?.with_family(meta.family.clone());
                if raw.len() != c.len() || raw.iter().zip(c.points()).any(|(a, b)| (a - b).norm() > 1e-9) {
                    return Err(ApskError::BadLayout("points disagree with ring metadata".into()));
                }
                Ok(c)
            }
            _ => {
                let c = Constellation::from_points(&raw)?;
                if c.m() != meta.m {
                    return Err(ApskError::BadLayout(format!("meta.m = {} but {} points", meta.m, raw.len())));
                }
                Ok(c.with_family(meta.family.clone()))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("constellation serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| ApskError::InvalidParameter(format!("constellation JSON: {e}")))
    }
}

/// Every metric of one constellation at one operating point.
#[derive(Debug, Clone, Serialize)]
pub struct ConstellationMetrics {
    pub m: u32,
    pub rings: Option<usize>,
    pub snr_db: f64,
    pub d_min: f64,
    pub mi: MiEstimate,
    pub mi_lower_bound: f64,
    pub gap_bound: f64,
    pub capacity: f64,
    pub variance: f64,
    pub min_energy: f64,
    pub block_len: usize,
    /// Absent when the constellation contains the origin.
    pub crb_bound: Option<f64>,
    pub crb_mc: CrbEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<DistanceReport>,
}

pub fn evaluate_metrics(
    c: &Constellation,
    ch: &ChannelSpec,
    s: &SensingSpec,
    n_samples: usize,
    n_blocks: usize,
    seed: u64,
) -> Result<ConstellationMetrics> {
    let d = dmin(c);
    Ok(ConstellationMetrics {
        m: c.m(),
        rings: c.rings(),
        snr_db: ch.snr_db(),
        d_min: d,
        mi: estimate_mi(c, ch, n_samples, derive_seed(seed, &[1]))?,
        mi_lower_bound: mi_lower_bound_from_dmin(c.m(), d, ch)?,
        gap_bound: gap_upper_bound_from_dmin(c.m(), d, ch)?,
        capacity: gaussian_capacity(ch),
        variance: variance_metric(c),
        min_energy: c.min_energy(),
        block_len: s.block_len(),
        crb_bound: avg_crb_bound(c, s).ok(),
        crb_mc: avg_crb_monte_carlo(c, s, n_blocks, derive_seed(seed, &[2]))?,
        distance: c.layout().map(layout_distance),
    })
}

pub const METRICS_COLUMNS: [&str; 15] = [
    "m",
    "K",
    "snr_db",
    "d_min",
    "mi_bits",
    "mi_stderr",
    "mi_lower_bound",
    "gap_bound",
    "capacity",
    "variance",
    "min_energy",
    "L",
    "crb_bound",
    "crb_mc",
    "crb_mc_stderr",
];

fn write_comments<W: Write>(w: &mut W, header: &[(String, String)]) -> std::io::Result<()> {
    for (k, v) in header {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

pub fn write_metrics_csv<W: Write>(
    mut w: W,
    header: &[(String, String)],
    rows: &[ConstellationMetrics],
) -> std::io::Result<()> {
    write_comments(&mut w, header)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(METRICS_COLUMNS).map_err(csv_error)?;
    for r in rows {
        out.write_record([
            r.m.to_string(),
            r.rings.map(|k| k.to_string()).unwrap_or_default(),
            fmt_sig(r.snr_db),
            fmt_sig(r.d_min),
            fmt_sig(r.mi.value_bits),
            fmt_sig(r.mi.std_error_bits),
            fmt_sig(r.mi_lower_bound),
            fmt_sig(r.gap_bound),
            fmt_sig(r.capacity),
            fmt_sig(r.variance),
            fmt_sig(r.min_energy),
            r.block_len.to_string(),
            r.crb_bound.map(fmt_sig).unwrap_or_default(),
            fmt_sig(r.crb_mc.mean),
            fmt_sig(r.crb_mc.std_error),
        ])
        .map_err(csv_error)?;
    }
    out.flush()
}

pub const FRONTIER_COLUMNS: [&str; 11] =
    ["alpha", "b", "c", "K", "variance", "rate_bits", "rate_stderr", "d_min", "gap_bound", "pareto", "skipped_reason"];

pub fn write_frontier_csv<W: Write>(mut w: W, header: &[(String, String)], set: &FrontierSet) -> std::io::Result<()> {
    write_comments(&mut w, header)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(FRONTIER_COLUMNS).map_err(csv_error)?;
    for row in &set.rows {
        let rec = match row {
            SweepRow::Point(p) => [
                p.params.alpha.to_string(),
                fmt_sig(p.params.b),
                fmt_sig(p.params.c),
                p.rings.to_string(),
                fmt_sig(p.variance),
                fmt_sig(p.rate.value_bits),
                fmt_sig(p.rate.std_error_bits),
                fmt_sig(p.d_min),
                fmt_sig(p.gap_bound),
                p.pareto.to_string(),
                String::new(),
            ],
            SweepRow::Skipped(s) => [
                s.params.alpha.to_string(),
                fmt_sig(s.params.b),
                fmt_sig(s.params.c),
                s.params.ring_count().to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                s.reason.clone(),
            ],
        };
        out.write_record(rec).map_err(csv_error)?;
    }
    out.flush()
}

pub const BASELINE_COLUMNS: [&str; 3] = ["lambda", "rate_bits", "variance"];

pub fn write_baseline_csv<W: Write>(mut w: W, header: &[(String, String)], ts: &TimeSharing) -> std::io::Result<()> {
    write_comments(&mut w, header)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(BASELINE_COLUMNS).map_err(csv_error)?;
    for s in &ts.samples {
        out.write_record([fmt_sig(s.lambda), fmt_sig(s.rate_bits), fmt_sig(s.variance)]).map_err(csv_error)?;
    }
    out.flush()
}

/// One row of the sensing table.
#[derive(Debug, Clone, Serialize)]
pub struct SensingRow {
    pub id: String,
    pub variance: f64,
    pub bound: f64,
    pub mc: CrbEstimate,
    pub block_len: usize,
}

pub fn write_sensing_csv<W: Write>(w: W, rows: &[SensingRow]) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["id", "variance", "crb_bound", "crb_mc", "crb_mc_stderr", "L"]).map_err(csv_error)?;
    for r in rows {
        out.write_record([
            r.id.clone(),
            fmt_sig(r.variance),
            fmt_sig(r.bound),
            fmt_sig(r.mc.mean),
            fmt_sig(r.mc.std_error),
            r.block_len.to_string(),
        ])
        .map_err(csv_error)?;
    }
    out.flush()
}
