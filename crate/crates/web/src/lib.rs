//! Browser bindings. Every export takes plain numbers and returns a JSON
//! string, so the page needs no generated TypeScript types.

use apsk_core::comm::{estimate_mi, gap_upper_bound_from_dmin, gaussian_capacity, mi_lower_bound_from_dmin};
use apsk_core::constellation::{build_psk, build_qam, build_tradeoff_family};
use apsk_core::geometry::dmin;
use apsk_core::sense::{avg_crb_bound, variance_metric};
use apsk_core::tradeoff::{grid, sweep};
use apsk_core::{ChannelSpec, Constellation, SensingSpec, SweepConfig, TradeoffParams};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// `kind` is `tradeoff`, `psk` or `qam`; `alpha`, `b`, `c` only matter for
/// the tradeoff family.
fn build(kind: &str, m: u32, alpha: u32, b: f64, c: f64) -> Result<Constellation, String> {
    let r = match kind {
        "psk" => build_psk(m),
        "qam" => build_qam(m),
        "tradeoff" => build_tradeoff_family(&TradeoffParams::new(m, alpha, b, c)),
        other => return Err(format!("unknown constellation kind `{other}`")),
    };
    r.map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Shape {
    m: u32,
    rings: Option<usize>,
    ring_counts: Option<Vec<usize>>,
    radii: Option<Vec<f64>>,
    points: Vec<[f64; 2]>,
    d_min: f64,
    variance: f64,
}

pub fn constellation_json(kind: &str, m: u32, alpha: u32, b: f64, c: f64) -> Result<String, String> {
    let con = build(kind, m, alpha, b, c)?;
    let layout = con.layout();
    let shape = Shape {
        m: con.m(),
        rings: con.rings(),
        ring_counts: layout.map(|l| l.counts.clone()),
        radii: layout.map(|l| l.radii.clone()),
        points: con.points().iter().map(|p| [p.re, p.im]).collect(),
        d_min: dmin(&con),
        variance: variance_metric(&con),
    };
    serde_json::to_string(&shape).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Metrics {
    d_min: f64,
    mi_bits: f64,
    mi_stderr: f64,
    mi_lower_bound: f64,
    gap_bound: f64,
    capacity: f64,
    variance: f64,
    crb_bound: Option<f64>,
    crb_floor: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn metrics_json(
    kind: &str,
    m: u32,
    alpha: u32,
    b: f64,
    c: f64,
    snr_db: f64,
    block_len: usize,
    samples: usize,
    seed: u64,
) -> Result<String, String> {
    let con = build(kind, m, alpha, b, c)?;
    let ch = ChannelSpec::from_db(snr_db).map_err(|e| e.to_string())?;
    let s = SensingSpec::unit(block_len).map_err(|e| e.to_string())?;
    let d = dmin(&con);
    let mi = estimate_mi(&con, &ch, samples, seed).map_err(|e| e.to_string())?;
    let out = Metrics {
        d_min: d,
        mi_bits: mi.value_bits,
        mi_stderr: mi.std_error_bits,
        mi_lower_bound: mi_lower_bound_from_dmin(m, d, &ch).map_err(|e| e.to_string())?,
        gap_bound: gap_upper_bound_from_dmin(m, d, &ch).map_err(|e| e.to_string())?,
        capacity: gaussian_capacity(&ch),
        variance: variance_metric(&con),
        crb_bound: avg_crb_bound(&con, &s).ok(),
        crb_floor: s.floor(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct SweepPoint {
    alpha: u32,
    b: f64,
    c: f64,
    rings: usize,
    variance: f64,
    rate: f64,
    pareto: bool,
}

#[derive(Serialize)]
struct SweepOut {
    points: Vec<SweepPoint>,
    skipped: usize,
    /// `[variance, rate]` along the PSK-QAM segment; empty for odd m.
    baseline: Vec<[f64; 2]>,
}

/// Coarse frontier sweep over the default alpha range with one grid for b and c.
pub fn sweep_json(m: u32, snr_db: f64, step: f64, samples: usize, seed: u64) -> Result<String, String> {
    let mut cfg = SweepConfig::standard(m, snr_db);
    let g = grid(0.0, 2.0, step).map_err(|e| e.to_string())?;
    cfg.b_grid = g.clone();
    cfg.c_grid = g;
    cfg.n_samples = samples;
    cfg.seed = seed;
    let set = sweep(&cfg).map_err(|e| e.to_string())?;
    let out = SweepOut {
        points: set
            .points()
            .map(|p| SweepPoint {
                alpha: p.params.alpha,
                b: p.params.b,
                c: p.params.c,
                rings: p.rings,
                variance: p.variance,
                rate: p.rate.value_bits,
                pareto: p.pareto,
            })
            .collect(),
        skipped: set.skipped().count(),
        baseline: set.baseline.iter().flat_map(|ts| ts.samples.iter().map(|s| [s.variance, s.rate_bits])).collect(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn constellation(kind: &str, m: u32, alpha: u32, b: f64, c: f64) -> Result<String, JsError> {
    js(constellation_json(kind, m, alpha, b, c))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn metrics(
    kind: &str,
    m: u32,
    alpha: u32,
    b: f64,
    c: f64,
    snr_db: f64,
    block_len: usize,
    samples: usize,
    seed: u32,
) -> Result<String, JsError> {
    js(metrics_json(kind, m, alpha, b, c, snr_db, block_len, samples, u64::from(seed)))
}

#[wasm_bindgen]
pub fn frontier(m: u32, snr_db: f64, step: f64, samples: usize, seed: u32) -> Result<String, JsError> {
    js(sweep_json(m, snr_db, step, samples, u64::from(seed)))
}
