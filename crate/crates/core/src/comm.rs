//! Communication metrics over the complex AWGN channel.
//!
//! The channel gain and transmit power enter only through `SNR_c`; the noise
//! is normalized to unit power so the received symbol is `sqrt(SNR_c) x + z`.

use std::f64::consts::{E, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constellation::{build_prop1_family, Constellation};
use crate::error::{ApskError, Result};
use crate::geometry::dmin;
use crate::rng::{derive_seed, stream};
use crate::stats::RunningStats;

pub const DEFAULT_MI_SAMPLES: usize = 200_000;
pub const MIN_MI_SAMPLES: usize = 1_000;

/// Mixture terms this far below the largest exponent are dropped; their
/// total weight is below `2^m * e^-50`.
const LOG_CUTOFF: f64 = 50.0;

/// `log2(2 pi e / 4)`.
pub fn shaping_constant() -> f64 {
    (2.0 * PI * E / 4.0).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    snr_c: f64,
}

impl ChannelSpec {
    pub fn from_linear(snr_c: f64) -> Result<Self> {
        if !(snr_c.is_finite() && snr_c > 0.0) {
            return Err(ApskError::InvalidParameter(format!("SNR must be positive, got {snr_c}")));
        }
        Ok(Self { snr_c })
    }

    pub fn from_db(snr_db: f64) -> Result<Self> {
        Self::from_linear(10f64.powf(snr_db / 10.0))
    }

    pub fn snr(&self) -> f64 {
        self.snr_c
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * self.snr_c.log10()
    }

    /// Noise power; fixed to one.
    pub fn sigma_c2(&self) -> f64 {
        1.0
    }
}

/// Monte Carlo mutual information estimate in bits per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    pub value_bits: f64,
    pub std_error_bits: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// Estimates `I(X; sqrt(SNR) X + Z)` for `X` uniform over `c`.
///
/// Each sample draws a symbol `x_i` and noise `z ~ CN(0, 1)` and evaluates
/// `log2 sum_j exp(|z|^2 - |y - sqrt(SNR) x_j|^2)` in the log domain; the
/// estimate is `m` minus the sample mean. Deterministic in `(seed, n_samples)`.
pub fn estimate_mi(c: &Constellation, ch: &ChannelSpec, n_samples: usize, seed: u64) -> Result<MiEstimate> {
    if n_samples < MIN_MI_SAMPLES {
        return Err(ApskError::TooFewSamples { got: n_samples, min: MIN_MI_SAMPLES });
    }
    let amp = ch.snr().sqrt();
    let scaled: Vec<(f64, f64)> = c.points().iter().map(|p| (amp * p.re, amp * p.im)).collect();
    let count = scaled.len();
    let mut rng = stream(seed);
    let mut exponents = vec![0.0f64; count];
    let noise_std = std::f64::consts::FRAC_1_SQRT_2;

    let mut stats = RunningStats::default();
    for _ in 0..n_samples {
        let idx = rng.random_range(0..count);
        let zr: f64 = rng.sample::<f64, _>(StandardNormal) * noise_std;
        let zi: f64 = rng.sample::<f64, _>(StandardNormal) * noise_std;
        let yr = scaled[idx].0 + zr;
        let yi = scaled[idx].1 + zi;
        let z2 = zr * zr + zi * zi;

        let mut max = f64::NEG_INFINITY;
        for (e, &(xr, xi)) in exponents.iter_mut().zip(&scaled) {
            let dr = yr - xr;
            let di = yi - xi;
            *e = z2 - (dr * dr + di * di);
            max = max.max(*e);
        }
        let floor = max - LOG_CUTOFF;
        let acc: f64 = exponents.iter().filter(|&&e| e > floor).map(|&e| (e - max).exp()).sum();
        let term = (max + acc.ln()) * std::f64::consts::LOG2_E;
        if !term.is_finite() {
            return Err(ApskError::NonFinite);
        }
        stats.push(term);
    }

    let value = c.m() as f64 - stats.mean();
    if !value.is_finite() {
        return Err(ApskError::NonFinite);
    }
    Ok(MiEstimate {
        // mutual information is non-negative; the clamp only removes sampling noise near zero
        value_bits: value.max(0.0),
        std_error_bits: stats.std_error(),
        n_samples,
        seed,
    })
}

/// `m - log2(2 pi e/4) - log2(1 + 16 / (pi SNR d_min^2))`.
pub fn mi_lower_bound_from_dmin(m: u32, d_min: f64, ch: &ChannelSpec) -> Result<f64> {
    if !(d_min > 0.0) {
        return Err(ApskError::ZeroDistance);
    }
    let penalty = 1.0 + 16.0 / (PI * ch.snr() * d_min * d_min);
    Ok(m as f64 - shaping_constant() - penalty.log2())
}

pub fn mi_lower_bound(c: &Constellation, ch: &ChannelSpec) -> Result<f64> {
    mi_lower_bound_from_dmin(c.m(), dmin(c), ch)
}

/// `log2(2 pi e/4) + log2(2^-m (1 + SNR + 16/(pi d^2 SNR) + 16/(pi d^2)))`.
pub fn gap_upper_bound_from_dmin(m: u32, d_min: f64, ch: &ChannelSpec) -> Result<f64> {
    if !(d_min > 0.0) {
        return Err(ApskError::ZeroDistance);
    }
    let snr = ch.snr();
    let a = 16.0 / (PI * d_min * d_min);
    let inner = (1.0 + snr + a / snr + a) / (1u64 << m) as f64;
    Ok(shaping_constant() + inner.log2())
}

pub fn gap_upper_bound(c: &Constellation, ch: &ChannelSpec) -> Result<f64> {
    gap_upper_bound_from_dmin(c.m(), dmin(c), ch)
}

/// `log2(1 + SNR)`.
pub fn gaussian_capacity(ch: &ChannelSpec) -> f64 {
    ch.snr().ln_1p() * std::f64::consts::LOG2_E
}

#[derive(Debug, Clone, Serialize)]
pub struct GapEntry {
    pub snr_db: f64,
    pub m: u32,
    pub rings: usize,
    pub capacity: f64,
    pub mi: MiEstimate,
    pub gap: f64,
    pub gap_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub alpha: u32,
    pub entries: Vec<GapEntry>,
    /// `max gap - min gap` across the SNR list.
    pub spread: f64,
}

/// Bits per symbol tied to the SNR: `ceil(log2 SNR) + 2`, at least 2.
pub fn bits_for_snr(snr_linear: f64) -> u32 {
    (snr_linear.log2().ceil() as i64 + 2).max(2) as u32
}

/// Measures `C - I` for the communication-optimal family with `m` growing
/// with the SNR, and reports how much the gap varies.
pub fn constant_gap_check(alpha: u32, snr_db_list: &[f64], n_samples: usize, seed: u64) -> Result<GapReport> {
    let mut entries = Vec::with_capacity(snr_db_list.len());
    for (i, &snr_db) in snr_db_list.iter().enumerate() {
        let ch = ChannelSpec::from_db(snr_db)?;
        let m = bits_for_snr(ch.snr());
        let c = build_prop1_family(m, alpha)?;
        let mi = estimate_mi(&c, &ch, n_samples, derive_seed(seed, &[i as u64, m as u64]))?;
        let capacity = gaussian_capacity(&ch);
        entries.push(GapEntry {
            snr_db,
            m,
            rings: c.rings().unwrap_or(0),
            capacity,
            gap: capacity - mi.value_bits,
            gap_bound: gap_upper_bound(&c, &ch)?,
            mi,
        });
    }
    let max = entries.iter().map(|e| e.gap).fold(f64::NEG_INFINITY, f64::max);
    let min = entries.iter().map(|e| e.gap).fold(f64::INFINITY, f64::min);
    let spread = if entries.is_empty() { 0.0 } else { max - min };
    Ok(GapReport { alpha, entries, spread })
}
