//! Design-space sweeps over `(alpha, b, c)`, Pareto extraction on the
//! (variance, rate) plane and the PSK/QAM time-sharing baseline.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comm::{estimate_mi, gap_upper_bound_from_dmin, ChannelSpec, MiEstimate, DEFAULT_MI_SAMPLES};
use crate::constellation::{build_psk, build_qam, build_tradeoff_family, TradeoffParams};
use crate::error::{ApskError, Result};
use crate::geometry::dmin;
use crate::rng::derive_seed;
use crate::sense::variance_metric;

/// Variances closer than this are the same sensing level.
pub const VARIANCE_TIE: f64 = 1e-12;

pub const DEFAULT_SEED: u64 = 2026;

/// Inclusive grid `start, start + step, ..., stop`.
pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && start.is_finite() && stop.is_finite() && stop >= start) {
        return Err(ApskError::InvalidParameter(format!("bad grid {start}:{step}:{stop}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    // snap to the step lattice so seeds derived from b*100 are stable
    Ok((0..=n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect())
}

/// Default alpha range `[2, 2^(m-1) + 1]`: from the densest ring layout down to the first single-ring value.
pub fn default_alpha_range(m: u32) -> (u32, u32) {
    (2, (1u32 << (m - 1)) + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub m: u32,
    pub snr_c_db: f64,
    pub alpha_min: u32,
    pub alpha_max: u32,
    pub b_grid: Vec<f64>,
    pub c_grid: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
}

impl SweepConfig {
    /// Full grid: default alpha range and `b, c` in `0..=2` with step `0.25`.
    pub fn standard(m: u32, snr_c_db: f64) -> Self {
        let (alpha_min, alpha_max) = default_alpha_range(m);
        let g = grid(0.0, 2.0, 0.25).expect("static grid");
        Self {
            m,
            snr_c_db,
            alpha_min,
            alpha_max,
            b_grid: g.clone(),
            c_grid: g,
            n_samples: DEFAULT_MI_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 || self.m > 12 {
            return Err(ApskError::BadBits(self.m));
        }
        let full = 1u64 << self.m;
        if self.alpha_min == 0 || self.alpha_min > self.alpha_max || u64::from(self.alpha_max) > full {
            return Err(ApskError::InvalidParameter(format!(
                "alpha range [{}, {}] not within [1, {full}]",
                self.alpha_min, self.alpha_max
            )));
        }
        if self.b_grid.is_empty() || self.c_grid.is_empty() {
            return Err(ApskError::InvalidParameter("b and c grids must be non-empty".into()));
        }
        ChannelSpec::from_db(self.snr_c_db)?;
        Ok(())
    }

    pub fn channel(&self) -> Result<ChannelSpec> {
        ChannelSpec::from_db(self.snr_c_db)
    }

    /// All `(alpha, b, c)` tuples in sweep order.
    pub fn tuples(&self) -> Vec<TradeoffParams> {
        let mut out = Vec::new();
        for alpha in self.alpha_min..=self.alpha_max {
            for &b in &self.b_grid {
                for &c in &self.c_grid {
                    out.push(TradeoffParams::new(self.m, alpha, b, c));
                }
            }
        }
        out
    }
}

/// Seed of one tuple; depends only on the master seed and the tuple.
pub fn tuple_seed(master: u64, params: &TradeoffParams) -> u64 {
    let b = (params.b * 100.0).round() as i64 as u64;
    let c = (params.c * 100.0).round() as i64 as u64;
    derive_seed(master, &[u64::from(params.m), u64::from(params.alpha), b, c])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricPoint {
    pub params: TradeoffParams,
    pub rings: usize,
    pub rate: MiEstimate,
    pub variance: f64,
    pub d_min: f64,
    pub gap_bound: f64,
    pub pareto: bool,
}

/// Builds the tradeoff constellation and evaluates its metrics.
pub fn evaluate(params: &TradeoffParams, ch: &ChannelSpec, n_samples: usize, seed: u64) -> Result<MetricPoint> {
    let c = build_tradeoff_family(params)?;
    let d = dmin(&c);
    Ok(MetricPoint {
        params: *params,
        rings: c.rings().unwrap_or(0),
        rate: estimate_mi(&c, ch, n_samples, seed)?,
        variance: variance_metric(&c),
        d_min: d,
        gap_bound: gap_upper_bound_from_dmin(c.m(), d, ch)?,
        pareto: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedTuple {
    pub params: TradeoffParams,
    pub reason: String,
}

/// One evaluated or rejected grid tuple, in sweep order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepRow {
    Point(MetricPoint),
    Skipped(SkippedTuple),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Endpoint {
    pub m: u32,
    pub rate: MiEstimate,
    pub variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineSample {
    pub lambda: f64,
    pub rate_bits: f64,
    pub variance: f64,
}

/// Time sharing between PSK (weight `lambda`) and QAM (weight `1 - lambda`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSharing {
    pub psk: Endpoint,
    pub qam: Endpoint,
    pub samples: Vec<BaselineSample>,
}

impl TimeSharing {
    pub fn at(&self, lambda: f64) -> BaselineSample {
        BaselineSample {
            lambda,
            rate_bits: lambda * self.psk.rate.value_bits + (1.0 - lambda) * self.qam.rate.value_bits,
            variance: lambda * self.psk.variance + (1.0 - lambda) * self.qam.variance,
        }
    }

    /// Time-shared rate and its standard error at a given variance, when the
    /// variance lies on the segment.
    pub fn rate_at_variance(&self, variance: f64) -> Option<(f64, f64)> {
        let span = self.qam.variance - self.psk.variance;
        if span <= 0.0 {
            return None;
        }
        let lambda = 1.0 - (variance - self.psk.variance) / span;
        if !(0.0..=1.0).contains(&lambda) {
            return None;
        }
        let se = ((lambda * self.psk.rate.std_error_bits).powi(2)
            + ((1.0 - lambda) * self.qam.rate.std_error_bits).powi(2))
        .sqrt();
        Some((self.at(lambda).rate_bits, se))
    }
}

pub const BASELINE_STEPS: usize = 20;

pub fn time_sharing_baseline(
    m_psk: u32,
    m_qam: u32,
    ch: &ChannelSpec,
    n_samples: usize,
    seed: u64,
) -> Result<TimeSharing> {
    let psk = build_psk(m_psk)?;
    let qam = build_qam(m_qam)?;
    let psk = Endpoint {
        m: m_psk,
        rate: estimate_mi(&psk, ch, n_samples, derive_seed(seed, &[0x0050_534b, u64::from(m_psk)]))?,
        variance: variance_metric(&psk),
    };
    let qam = Endpoint {
        m: m_qam,
        rate: estimate_mi(&qam, ch, n_samples, derive_seed(seed, &[0x0051_414d, u64::from(m_qam)]))?,
        variance: variance_metric(&qam),
    };
    let mut ts = TimeSharing { psk, qam, samples: Vec::with_capacity(BASELINE_STEPS + 1) };
    ts.samples = (0..=BASELINE_STEPS).map(|i| ts.at(i as f64 / BASELINE_STEPS as f64)).collect();
    Ok(ts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierSet {
    pub config: SweepConfig,
    /// Evaluated and skipped tuples in `(alpha, b, c)` order.
    pub rows: Vec<SweepRow>,
    /// Present when `m` is even (square QAM exists).
    pub baseline: Option<TimeSharing>,
}

impl FrontierSet {
    pub fn points(&self) -> impl Iterator<Item = &MetricPoint> {
        self.rows.iter().filter_map(|r| match r {
            SweepRow::Point(p) => Some(p),
            SweepRow::Skipped(_) => None,
        })
    }

    pub fn skipped(&self) -> impl Iterator<Item = &SkippedTuple> {
        self.rows.iter().filter_map(|r| match r {
            SweepRow::Skipped(s) => Some(s),
            SweepRow::Point(_) => None,
        })
    }

    /// Pareto points sorted by variance.
    pub fn frontier(&self) -> Vec<&MetricPoint> {
        let mut f: Vec<&MetricPoint> = self.points().filter(|p| p.pareto).collect();
        f.sort_by(|a, b| a.variance.total_cmp(&b.variance).then(a.rate.value_bits.total_cmp(&b.rate.value_bits)));
        f
    }

    /// Frontier points strictly inside the baseline's variance span, compared
    /// against the time-shared rate at the same variance.
    pub fn baseline_comparison(&self) -> Vec<BaselineGain> {
        let Some(ts) = &self.baseline else { return Vec::new() };
        self.frontier()
            .into_iter()
            .filter(|p| p.variance > ts.psk.variance + VARIANCE_TIE && p.variance < ts.qam.variance - VARIANCE_TIE)
            .filter_map(|p| {
                let (ts_rate, ts_se) = ts.rate_at_variance(p.variance)?;
                Some(BaselineGain {
                    params: p.params,
                    variance: p.variance,
                    rate: p.rate.value_bits,
                    baseline_rate: ts_rate,
                    combined_std_error: (p.rate.std_error_bits.powi(2) + ts_se.powi(2)).sqrt(),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineGain {
    pub params: TradeoffParams,
    pub variance: f64,
    pub rate: f64,
    pub baseline_rate: f64,
    pub combined_std_error: f64,
}

impl BaselineGain {
    pub fn margin(&self) -> f64 {
        self.rate - self.baseline_rate
    }

    /// Margin in units of the combined standard error.
    pub fn sigmas(&self) -> f64 {
        if self.combined_std_error > 0.0 {
            self.margin() / self.combined_std_error
        } else if self.margin() > 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    }
}

fn evaluate_row(params: TradeoffParams, ch: &ChannelSpec, n_samples: usize, master: u64) -> SweepRow {
    match evaluate(&params, ch, n_samples, tuple_seed(master, &params)) {
        Ok(p) => SweepRow::Point(p),
        Err(e) => SweepRow::Skipped(SkippedTuple { params, reason: e.to_string() }),
    }
}

/// Evaluates every grid tuple, records infeasible ones with their reason and
/// flags the Pareto frontier. Output is independent of thread scheduling.
pub fn sweep(cfg: &SweepConfig) -> Result<FrontierSet> {
    cfg.validate()?;
    let ch = cfg.channel()?;
    let tuples = cfg.tuples();

    #[cfg(feature = "parallel")]
    let mut rows: Vec<SweepRow> =
        tuples.into_par_iter().map(|p| evaluate_row(p, &ch, cfg.n_samples, cfg.seed)).collect();
    #[cfg(not(feature = "parallel"))]
    let mut rows: Vec<SweepRow> = tuples.into_iter().map(|p| evaluate_row(p, &ch, cfg.n_samples, cfg.seed)).collect();

    let keys: Vec<ParetoKey> = rows
        .iter()
        .filter_map(|r| match r {
            SweepRow::Point(p) => Some(ParetoKey::of(p)),
            SweepRow::Skipped(_) => None,
        })
        .collect();
    let flags = pareto_flags(&keys);
    let mut it = flags.into_iter();
    for row in rows.iter_mut() {
        if let SweepRow::Point(p) = row {
            p.pareto = it.next().unwrap_or(false);
        }
    }

    let baseline = if cfg.m.is_multiple_of(2) {
        Some(time_sharing_baseline(cfg.m, cfg.m, &ch, cfg.n_samples, cfg.seed)?)
    } else {
        None
    };
    Ok(FrontierSet { config: cfg.clone(), rows, baseline })
}

/// Coordinates used for domination: minimize variance, maximize rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoKey {
    pub variance: f64,
    pub rate: f64,
    pub std_error: f64,
}

impl ParetoKey {
    pub fn of(p: &MetricPoint) -> Self {
        Self { variance: p.variance, rate: p.rate.value_bits, std_error: p.rate.std_error_bits }
    }
}

/// `a` dominates `b`: lower variance with at least the same rate, or equal
/// variance with a rate higher by more than the combined standard error.
pub fn dominates(a: &ParetoKey, b: &ParetoKey) -> bool {
    let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    if (a.variance - b.variance).abs() <= VARIANCE_TIE {
        a.rate - b.rate > se
    } else {
        a.variance < b.variance && a.rate >= b.rate
    }
}

/// Non-domination flags; exhaustive `O(n^2)` comparison.
pub fn pareto_flags(keys: &[ParetoKey]) -> Vec<bool> {
    keys.iter().map(|b| !keys.iter().any(|a| dominates(a, b))).collect()
}

/// Flags non-dominated points and returns them all ordered by variance
/// (stable, so exact ties stay together in input order).
pub fn pareto_filter(points: Vec<MetricPoint>) -> Vec<MetricPoint> {
    let keys: Vec<ParetoKey> = points.iter().map(ParetoKey::of).collect();
    let flags = pareto_flags(&keys);
    let mut out: Vec<MetricPoint> = points
        .into_iter()
        .zip(flags)
        .map(|(mut p, f)| {
            p.pareto = f;
            p
        })
        .collect();
    out.sort_by(|a, b| a.variance.total_cmp(&b.variance));
    out
}

/// One labeled design from the parameter table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabeledDesign {
    pub label: char,
    pub params: TradeoffParams,
    pub listed_rings: usize,
    /// SNR of the figure the point belongs to.
    pub snr_db: f64,
}

/// Points A-C come from the `m = 6`, 10 dB region; D-F from the `m = 4`,
/// 5 dB region, where `floor(sqrt(32/alpha)) = 2` for alpha in {4, 5, 8}.
pub const TABLE1: [LabeledDesign; 6] = [
    LabeledDesign {
        label: 'A',
        params: TradeoffParams { m: 6, alpha: 16, b: 0.50, c: 0.00, rings_override: None },
        listed_rings: 2,
        snr_db: 10.0,
    },
    LabeledDesign {
        label: 'B',
        params: TradeoffParams { m: 6, alpha: 5, b: 0.50, c: 0.75, rings_override: None },
        listed_rings: 5,
        snr_db: 10.0,
    },
    LabeledDesign {
        label: 'C',
        params: TradeoffParams { m: 6, alpha: 5, b: 1.25, c: 2.00, rings_override: None },
        listed_rings: 5,
        snr_db: 10.0,
    },
    LabeledDesign {
        label: 'D',
        params: TradeoffParams { m: 4, alpha: 4, b: 1.00, c: 0.75, rings_override: None },
        listed_rings: 2,
        snr_db: 5.0,
    },
    LabeledDesign {
        label: 'E',
        params: TradeoffParams { m: 4, alpha: 5, b: 0.50, c: 1.25, rings_override: None },
        listed_rings: 2,
        snr_db: 5.0,
    },
    LabeledDesign {
        label: 'F',
        params: TradeoffParams { m: 4, alpha: 8, b: 0.25, c: 0.75, rings_override: None },
        listed_rings: 2,
        snr_db: 5.0,
    },
];

#[derive(Debug, Clone, Serialize)]
pub struct LabeledPoint {
    pub label: char,
    pub listed_rings: usize,
    pub point: MetricPoint,
    /// Ring count the design would have at `m = 6`.
    pub rings_at_m6: usize,
}

/// Evaluates the labeled designs. Fails if a built ring count differs from
/// the listed one.
pub fn table1_points(n_samples: usize, seed: u64) -> Result<Vec<LabeledPoint>> {
    TABLE1
        .iter()
        .map(|d| {
            let ch = ChannelSpec::from_db(d.snr_db)?;
            let point = evaluate(&d.params, &ch, n_samples, tuple_seed(seed, &d.params))?;
            if point.rings != d.listed_rings {
                return Err(ApskError::BadLayout(format!(
                    "point {} built with {} rings, table lists {}",
                    d.label, point.rings, d.listed_rings
                )));
            }
            Ok(LabeledPoint {
                label: d.label,
                listed_rings: d.listed_rings,
                point,
                rings_at_m6: crate::constellation::ring_count_for(6, d.params.alpha),
            })
        })
        .collect()
}
