//! Sensing metrics: symbol-energy variance and Cramér-Rao bounds for the
//! sensing channel coefficient.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::error::{ApskError, Result};
use crate::rng::stream;
use crate::stats::RunningStats;

pub const DEFAULT_BLOCK_LEN: usize = 64;
pub const DEFAULT_CRB_BLOCKS: usize = 10_000;
pub const MIN_CRB_BLOCKS: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingSpec {
    sigma_s2: f64,
    power: f64,
    block_len: usize,
}

impl SensingSpec {
    pub fn new(sigma_s2: f64, power: f64, block_len: usize) -> Result<Self> {
        if !(sigma_s2.is_finite() && sigma_s2 > 0.0) {
            return Err(ApskError::InvalidParameter(format!("sensing noise power must be positive, got {sigma_s2}")));
        }
        if !(power.is_finite() && power > 0.0) {
            return Err(ApskError::InvalidParameter(format!("transmit power must be positive, got {power}")));
        }
        if block_len == 0 {
            return Err(ApskError::InvalidParameter("block length must be at least 1".into()));
        }
        Ok(Self { sigma_s2, power, block_len })
    }

    /// Unit noise and power with block length `l`.
    pub fn unit(block_len: usize) -> Result<Self> {
        Self::new(1.0, 1.0, block_len)
    }

    pub fn sigma_s2(&self) -> f64 {
        self.sigma_s2
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// CRB of a constant-modulus block, `sigma_s^2 / (P L)`.
    pub fn floor(&self) -> f64 {
        self.sigma_s2 / (self.power * self.block_len as f64)
    }
}

/// `sigma_s^2 / (P ||x||^2)` given the block's symbol energies.
pub fn crb_conditional(energies: &[f64], s: &SensingSpec) -> Result<f64> {
    let total: f64 = energies.iter().sum();
    if !(total > 0.0) {
        return Err(ApskError::ZeroBlockEnergy);
    }
    Ok(s.sigma_s2 / (s.power * total))
}

/// Upper bound on the average conditional CRB,
/// `(sigma_s^2/P) (1/L + Var(|X|^2) / (L^2 delta))` with `delta = min |x|^2`.
pub fn avg_crb_bound(c: &Constellation, s: &SensingSpec) -> Result<f64> {
    let delta = c.min_energy();
    if !(delta > 0.0) {
        return Err(ApskError::ZeroMinEnergy);
    }
    let l = s.block_len as f64;
    Ok(s.sigma_s2 / s.power * (1.0 / l + variance_metric(c) / (l * l * delta)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrbEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_blocks: usize,
    pub seed: u64,
}

/// Monte Carlo average of the conditional CRB over i.i.d. uniform blocks.
pub fn avg_crb_monte_carlo(c: &Constellation, s: &SensingSpec, n_blocks: usize, seed: u64) -> Result<CrbEstimate> {
    if n_blocks < MIN_CRB_BLOCKS {
        return Err(ApskError::TooFewSamples { got: n_blocks, min: MIN_CRB_BLOCKS });
    }
    let energies = c.energies();
    let mut rng = stream(seed);
    let mut block = vec![0.0; s.block_len];
    let mut stats = RunningStats::default();
    for _ in 0..n_blocks {
        for e in block.iter_mut() {
            *e = energies[rng.random_range(0..energies.len())];
        }
        stats.push(crb_conditional(&block, s)?);
    }
    Ok(CrbEstimate { mean: stats.mean(), std_error: stats.std_error(), n_blocks, seed })
}

/// `Var(|X|^2)`, the sensing axis of the tradeoff.
pub fn variance_metric(c: &Constellation) -> f64 {
    c.moments().variance
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{build_prop1_family, build_psk, build_qam};
    use approx::assert_abs_diff_eq;

    #[test]
    fn conditional_examples() {
        let s = SensingSpec::unit(8).unwrap();
        assert_abs_diff_eq!(crb_conditional(&[1.0; 8], &s).unwrap(), 1.0 / 8.0, epsilon = 1e-15);
        let s = SensingSpec::unit(2).unwrap();
        assert_abs_diff_eq!(crb_conditional(&[0.5, 1.5], &s).unwrap(), 0.5, epsilon = 1e-15);
        let s1 = SensingSpec::new(1.0, 1.0, 2).unwrap();
        let s2 = SensingSpec::new(1.0, 2.0, 2).unwrap();
        let a = crb_conditional(&[0.3, 0.9], &s1).unwrap();
        let b = crb_conditional(&[0.3, 0.9], &s2).unwrap();
        assert_abs_diff_eq!(b, a / 2.0, epsilon = 1e-15);
        assert!(matches!(crb_conditional(&[0.0, 0.0], &s1), Err(ApskError::ZeroBlockEnergy)));
    }

    #[test]
    fn sensing_spec_rejects_bad_input() {
        assert!(SensingSpec::new(0.0, 1.0, 4).is_err());
        assert!(SensingSpec::new(1.0, -1.0, 4).is_err());
        assert!(SensingSpec::new(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn psk_bound_is_floor() {
        let s = SensingSpec::new(2.0, 0.5, 16).unwrap();
        let c = build_psk(4).unwrap();
        assert_eq!(avg_crb_bound(&c, &s).unwrap(), s.floor());
        let mc = avg_crb_monte_carlo(&c, &s, 1_000, 9).unwrap();
        assert_eq!(mc.mean, s.floor());
        assert_eq!(mc.std_error, 0.0);
    }

    #[test]
    fn qam16_bound() {
        let s = SensingSpec::unit(64).unwrap();
        let bound = avg_crb_bound(&build_qam(4).unwrap(), &s).unwrap();
        assert_abs_diff_eq!(bound, 1.0 / 64.0 + 0.32 / (64.0 * 64.0 * 0.2), epsilon = 1e-15);
    }

    #[test]
    fn monte_carlo_within_bounds() {
        let s = SensingSpec::unit(8).unwrap();
        let c = build_qam(4).unwrap();
        let mc = avg_crb_monte_carlo(&c, &s, 5_000, 11).unwrap();
        assert!(mc.mean >= s.floor() - 3.0 * mc.std_error);
        assert!(mc.mean <= avg_crb_bound(&c, &s).unwrap() + 3.0 * mc.std_error);
        let again = avg_crb_monte_carlo(&c, &s, 5_000, 11).unwrap();
        assert_eq!(mc, again);
        assert!(avg_crb_monte_carlo(&c, &s, 10, 11).is_err());
    }

    #[test]
    fn variance_ring_sum() {
        let c = build_prop1_family(6, 2).unwrap();
        let layout = c.layout().unwrap();
        assert_abs_diff_eq!(variance_metric(&c), layout.fourth_power_sum() / 64.0 - 1.0, epsilon = 1e-12);
        assert_eq!(variance_metric(&build_psk(6).unwrap()), 0.0);
    }
}
