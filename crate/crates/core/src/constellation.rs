//! APSK constellation construction and normalization.
//!
//! Every constellation is a set of `2^m` complex points with unit mean
//! energy. Ring-structured constellations (APSK, PSK) keep their ring layout
//! so that distance computations can use the intra/inter-ring decomposition.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ApskError, Result};

/// Two points closer than this (normalized units) are treated as coincident.
pub const DISTINCT_TOL: f64 = 1e-12;

/// Largest supported number of bits per symbol.
pub const MAX_BITS: u32 = 16;

/// Symbolic description of an APSK constellation before normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApskDesign {
    pub m: u32,
    pub ring_counts: Vec<usize>,
    pub ring_radii_raw: Vec<f64>,
    pub phase_offsets: Vec<f64>,
}

impl ApskDesign {
    pub fn new(m: u32, ring_counts: Vec<usize>, ring_radii_raw: Vec<f64>, phase_offsets: Vec<f64>) -> Self {
        Self { m, ring_counts, ring_radii_raw, phase_offsets }
    }

    /// Design with all phase offsets set to zero.
    pub fn aligned(m: u32, ring_counts: Vec<usize>, ring_radii_raw: Vec<f64>) -> Self {
        let k = ring_counts.len();
        Self::new(m, ring_counts, ring_radii_raw, vec![0.0; k])
    }

    pub fn rings(&self) -> usize {
        self.ring_counts.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > MAX_BITS {
            return Err(ApskError::BadBits(self.m));
        }
        let k = self.ring_counts.len();
        if k == 0 {
            return Err(ApskError::BadLayout("at least one ring is required".into()));
        }
        if self.ring_radii_raw.len() != k || self.phase_offsets.len() != k {
            return Err(ApskError::BadLayout(format!(
                "{} ring counts, {} radii, {} phase offsets",
                k,
                self.ring_radii_raw.len(),
                self.phase_offsets.len()
            )));
        }
        if let Some(ring) = self.ring_counts.iter().position(|&n| n == 0) {
            return Err(ApskError::BadLayout(format!("ring {} is empty", ring + 1)));
        }
        if self.phase_offsets.iter().any(|p| !p.is_finite()) {
            return Err(ApskError::BadLayout("non-finite phase offset".into()));
        }
        let expected = 1usize << self.m;
        let got: usize = self.ring_counts.iter().sum();
        if got != expected {
            return Err(ApskError::RingCountMismatch { m: self.m, got, expected });
        }
        for (i, &r) in self.ring_radii_raw.iter().enumerate() {
            let increasing = i == 0 || r > self.ring_radii_raw[i - 1];
            if !(r.is_finite() && r > 0.0 && increasing) {
                return Err(ApskError::NonIncreasingRadii { ring: i + 1 });
            }
        }
        Ok(())
    }
}

/// Parameters of the tradeoff family with perturbation `f(k) = k - c*sqrt(k) + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffParams {
    pub m: u32,
    pub alpha: u32,
    pub b: f64,
    pub c: f64,
    /// Replaces the ring count given by the alpha rule. Not part of the
    /// standard family; kept for reproducing hand-picked layouts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rings_override: Option<usize>,
}

impl TradeoffParams {
    pub fn new(m: u32, alpha: u32, b: f64, c: f64) -> Self {
        Self { m, alpha, b, c, rings_override: None }
    }

    pub fn with_rings(mut self, rings: usize) -> Self {
        self.rings_override = Some(rings);
        self
    }

    /// `floor(sqrt(2^(m+1) / alpha))`, or the override when set.
    pub fn ring_count(&self) -> usize {
        self.rings_override.unwrap_or_else(|| ring_count_for(self.m, self.alpha))
    }

    pub fn perturbation(&self, k: usize) -> f64 {
        let k = k as f64;
        k - self.c * k.sqrt() + self.b
    }

    /// Per-ring point counts: `alpha * k` on the inner rings, remainder on the last.
    pub fn ring_counts(&self) -> Result<Vec<usize>> {
        check_bits(self.m)?;
        let total = 1u64 << self.m;
        if self.alpha == 0 || u64::from(self.alpha) > total {
            return Err(ApskError::AlphaOutOfRange { m: self.m, alpha: self.alpha });
        }
        let rings = self.ring_count();
        if rings == 0 {
            return Err(ApskError::BadLayout("ring count is zero".into()));
        }
        let alpha = u64::from(self.alpha);
        let mut counts: Vec<usize> = (1..rings as u64).map(|k| (alpha * k) as usize).collect();
        let inner: u64 = counts.iter().map(|&n| n as u64).sum();
        let remainder = total as i64 - inner as i64;
        if remainder < 1 {
            return Err(ApskError::EmptyLastRing { alpha: self.alpha, rings, remainder });
        }
        counts.push(remainder as usize);
        Ok(counts)
    }

    /// Builds the symbolic design, rejecting invalid perturbations.
    pub fn design(&self) -> Result<ApskDesign> {
        if !(self.b.is_finite() && self.c.is_finite() && self.b >= 0.0 && self.c >= 0.0) {
            return Err(ApskError::InvalidParameter(format!(
                "perturbation coefficients must be finite and non-negative (b = {}, c = {})",
                self.b, self.c
            )));
        }
        let counts = self.ring_counts()?;
        let rings = counts.len();
        let norm = ((1u64 << self.m) as f64).sqrt();
        let mut radii = Vec::with_capacity(rings);
        for k in 1..=rings {
            let f = self.perturbation(k);
            if !(f > 0.0) {
                return Err(ApskError::InvalidPerturbation { k, reason: "f(k) <= 0" });
            }
            if k > 1 && f <= self.perturbation(k - 1) {
                return Err(ApskError::InvalidPerturbation { k, reason: "f(k) <= f(k-1)" });
            }
            radii.push(f / norm);
        }
        Ok(ApskDesign::aligned(self.m, counts, radii))
    }

    /// True when the remainder ring holds more than `alpha * K` points.
    pub fn oversized_last_ring(&self) -> bool {
        match self.ring_counts() {
            Ok(counts) => {
                let k = counts.len();
                counts[k - 1] > self.alpha as usize * k
            }
            Err(_) => false,
        }
    }
}

/// `floor(sqrt(2^(m+1) / alpha))` in exact integer arithmetic.
pub fn ring_count_for(m: u32, alpha: u32) -> usize {
    if alpha == 0 {
        return 0;
    }
    let num = 1u128 << (m + 1);
    let alpha = u128::from(alpha);
    // largest k with k^2 * alpha <= 2^(m+1)
    let mut k = ((num as f64 / alpha as f64).sqrt()) as u128;
    while k * k * alpha > num {
        k -= 1;
    }
    while (k + 1) * (k + 1) * alpha <= num {
        k += 1;
    }
    k as usize
}

/// Ring structure of a normalized constellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingLayout {
    pub counts: Vec<usize>,
    /// Normalized radii, strictly increasing.
    pub radii: Vec<f64>,
    pub phases: Vec<f64>,
}

impl RingLayout {
    pub fn rings(&self) -> usize {
        self.counts.len()
    }

    /// Index of the first point of each ring in the point list.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.counts
            .iter()
            .map(|&n| {
                let o = acc;
                acc += n;
                o
            })
            .collect()
    }

    /// `sum_k N_k r_k^4`.
    pub fn fourth_power_sum(&self) -> f64 {
        self.counts.iter().zip(&self.radii).map(|(&n, &r)| n as f64 * r.powi(4)).sum()
    }
}

/// Energy statistics of `|X|^2` under uniform input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyMoments {
    pub mean: f64,
    pub variance: f64,
    pub fourth: f64,
}

impl EnergyMoments {
    pub fn from_energies(energies: &[f64]) -> Self {
        let n = energies.len() as f64;
        let first = energies.first().copied().unwrap_or(0.0);
        let constant = energies.iter().all(|&e| e == first);
        let mean = if constant { first } else { energies.iter().sum::<f64>() / n };
        let variance = energies.iter().map(|&e| (e - mean) * (e - mean)).sum::<f64>() / n;
        let fourth = energies.iter().map(|&e| e * e).sum::<f64>() / n;
        Self { mean, variance, fourth }
    }
}

/// Which construction produced a constellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    Apsk,
    Tradeoff { params: TradeoffParams },
    Psk,
    Qam,
    Custom,
}

/// A normalized constellation with cached energy statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    m: u32,
    points: Vec<Complex64>,
    energies: Vec<f64>,
    moments: EnergyMoments,
    min_energy: f64,
    layout: Option<RingLayout>,
    family: Family,
}

impl Constellation {
    fn assemble(
        m: u32,
        points: Vec<Complex64>,
        energies: Vec<f64>,
        layout: Option<RingLayout>,
        family: Family,
    ) -> Self {
        let moments = EnergyMoments::from_energies(&energies);
        let min_energy = energies.iter().copied().fold(f64::INFINITY, f64::min);
        debug_assert!((moments.mean - 1.0).abs() <= 1e-12, "mean energy {}", moments.mean);
        Self { m, points, energies, moments, min_energy, layout, family }
    }

    /// Normalizes an arbitrary point set to unit mean energy.
    ///
    /// The point count must be a power of two and all points distinct.
    pub fn from_points(raw: &[Complex64]) -> Result<Self> {
        let count = raw.len();
        if count < 2 || !count.is_power_of_two() {
            return Err(ApskError::InvalidParameter(format!("point count {count} is not a power of two >= 2")));
        }
        if raw.iter().any(|p| !(p.re.is_finite() && p.im.is_finite())) {
            return Err(ApskError::NonFinite);
        }
        let m = count.trailing_zeros();
        let raw_mean = raw.iter().map(|p| p.norm_sqr()).sum::<f64>() / count as f64;
        if !(raw_mean > 0.0) {
            return Err(ApskError::InvalidParameter("all points at the origin".into()));
        }
        let scale = raw_mean.sqrt().recip();
        let points: Vec<Complex64> = raw.iter().map(|p| p * scale).collect();
        for i in 0..count {
            for j in i + 1..count {
                if (points[i] - points[j]).norm() <= DISTINCT_TOL {
                    return Err(ApskError::DuplicatePoints(format!("points {i} and {j}")));
                }
            }
        }
        let energies = points.iter().map(|p| p.norm_sqr()).collect();
        Ok(Self::assemble(m, points, energies, None, Family::Custom))
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Per-point energies `|x|^2`. Ring points report `r_k^2`.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn moments(&self) -> EnergyMoments {
        self.moments
    }

    /// `delta = min |x|^2`.
    pub fn min_energy(&self) -> f64 {
        self.min_energy
    }

    pub fn layout(&self) -> Option<&RingLayout> {
        self.layout.as_ref()
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn rings(&self) -> Option<usize> {
        self.layout.as_ref().map(RingLayout::rings)
    }

    pub(crate) fn with_family(mut self, family: Family) -> Self {
        self.family = family;
        self
    }

    /// Same constellation rotated by `theta` radians.
    pub fn rotated(&self, theta: f64) -> Self {
        let rot = Complex64::from_polar(1.0, theta);
        let mut out = self.clone();
        out.points.iter_mut().for_each(|p| *p *= rot);
        if let Some(layout) = out.layout.as_mut() {
            layout.phases.iter_mut().for_each(|p| *p += theta);
        }
        out
    }
}

fn check_bits(m: u32) -> Result<()> {
    if m == 0 || m > MAX_BITS {
        Err(ApskError::BadBits(m))
    } else {
        Ok(())
    }
}

/// Places `N_k` equally spaced points on each ring and rescales all radii by
/// one factor so that the mean symbol energy is one.
pub fn build_apsk(design: &ApskDesign) -> Result<Constellation> {
    build_rings(design, Family::Apsk)
}

fn build_rings(design: &ApskDesign, family: Family) -> Result<Constellation> {
    design.validate()?;
    let total = 1usize << design.m;
    let raw_energy: f64 =
        design.ring_counts.iter().zip(&design.ring_radii_raw).map(|(&n, &r)| n as f64 * r * r).sum::<f64>()
            / total as f64;
    let scale = raw_energy.sqrt().recip();
    let radii: Vec<f64> = design.ring_radii_raw.iter().map(|r| r * scale).collect();
    // a single ring of unit radius stays exactly on the unit circle
    let radii = if radii.len() == 1 { vec![1.0] } else { radii };

    for (k, (&n, &r)) in design.ring_counts.iter().zip(&radii).enumerate() {
        if n > 1 && 2.0 * r * (PI / n as f64).sin() <= DISTINCT_TOL {
            return Err(ApskError::DuplicatePoints(format!("ring {} chord collapses", k + 1)));
        }
        if k > 0 && r - radii[k - 1] <= DISTINCT_TOL {
            return Err(ApskError::DuplicatePoints(format!("rings {} and {} coincide", k, k + 1)));
        }
    }

    let mut points = Vec::with_capacity(total);
    let mut energies = Vec::with_capacity(total);
    for ((&n, &r), &phi) in design.ring_counts.iter().zip(&radii).zip(&design.phase_offsets) {
        for i in 0..n {
            let theta = phi + 2.0 * PI * i as f64 / n as f64;
            points.push(Complex64::from_polar(r, theta));
            energies.push(r * r);
        }
    }
    let layout = RingLayout { counts: design.ring_counts.clone(), radii, phases: design.phase_offsets.clone() };
    let out = Constellation::assemble(design.m, points, energies, Some(layout), family);
    if (out.moments.mean - 1.0).abs() > 1e-12 {
        return Err(ApskError::InvalidParameter(format!("normalization failed: mean energy {}", out.moments.mean)));
    }
    Ok(out)
}

/// Tradeoff family member: `K = floor(sqrt(2^(m+1)/alpha))`, radii `f(k)/sqrt(2^m)`,
/// aligned phases and `alpha * k` points on the inner rings.
pub fn build_tradeoff_family(params: &TradeoffParams) -> Result<Constellation> {
    let design = params.design()?;
    build_rings(&design, Family::Tradeoff { params: *params })
}

/// Communication-optimal family: constant `alpha`, no radius perturbation.
pub fn build_prop1_family(m: u32, alpha: u32) -> Result<Constellation> {
    build_tradeoff_family(&TradeoffParams::new(m, alpha, 0.0, 0.0))
}

/// `2^m`-PSK on the unit circle.
pub fn build_psk(m: u32) -> Result<Constellation> {
    check_bits(m)?;
    let design = ApskDesign::aligned(m, vec![1 << m], vec![1.0]);
    build_rings(&design, Family::Psk)
}

/// Square `2^m`-QAM on odd-integer coordinates.
pub fn build_qam(m: u32) -> Result<Constellation> {
    check_bits(m)?;
    if !m.is_multiple_of(2) {
        return Err(ApskError::OddQam(m));
    }
    let side = 1i64 << (m / 2);
    let levels: Vec<i64> = (0..side).map(|i| 2 * i - side + 1).collect();
    let raw_mean = 2.0 * ((side * side - 1) as f64) / 3.0;
    let scale2 = raw_mean.recip();
    let scale = scale2.sqrt();
    let mut points = Vec::with_capacity((side * side) as usize);
    let mut energies = Vec::with_capacity(points.capacity());
    for &q in &levels {
        for &i in &levels {
            points.push(Complex64::new(i as f64 * scale, q as f64 * scale));
            energies.push((i * i + q * q) as f64 * scale2);
        }
    }
    Ok(Constellation::assemble(m, points, energies, None, Family::Qam))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn qpsk_points() {
        let c = build_apsk(&ApskDesign::aligned(2, vec![4], vec![1.0])).unwrap();
        assert_eq!(c.len(), 4);
        for (i, p) in c.points().iter().enumerate() {
            assert_abs_diff_eq!(p.norm(), 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(p.arg().rem_euclid(2.0 * PI), i as f64 * PI / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_ring_normalizes() {
        let c = build_apsk(&ApskDesign::aligned(6, vec![16, 48], vec![0.3, 0.55])).unwrap();
        assert_eq!(c.len(), 64);
        let mean = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / 64.0;
        assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.moments().mean, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_designs() {
        let err = build_apsk(&ApskDesign::aligned(2, vec![3], vec![1.0])).unwrap_err();
        assert!(matches!(err, ApskError::RingCountMismatch { got: 3, expected: 4, .. }));
        let err = build_apsk(&ApskDesign::aligned(3, vec![4, 4], vec![1.0, 1.0])).unwrap_err();
        assert!(matches!(err, ApskError::NonIncreasingRadii { ring: 2 }));
        let err = build_apsk(&ApskDesign::aligned(3, vec![4, 4], vec![-1.0, 1.0])).unwrap_err();
        assert!(matches!(err, ApskError::NonIncreasingRadii { ring: 1 }));
        let err = build_apsk(&ApskDesign::aligned(3, vec![4, 4], vec![1.0, 1.0 + 1e-14])).unwrap_err();
        assert!(matches!(err, ApskError::DuplicatePoints(_)));
        assert!(build_apsk(&ApskDesign::new(3, vec![4, 4], vec![1.0, 2.0], vec![0.0])).is_err());
    }

    #[test]
    fn ring_count_rule() {
        assert_eq!(ring_count_for(6, 2), 8);
        assert_eq!(ring_count_for(6, 32), 2);
        assert_eq!(ring_count_for(6, 33), 1);
        assert_eq!(ring_count_for(6, 16), 2);
        assert_eq!(ring_count_for(6, 5), 5);
        assert_eq!(ring_count_for(4, 2), 4);
        assert_eq!(ring_count_for(4, 16), 1);
        // exact squares: 2^(m+1)/alpha = 4 -> 2
        assert_eq!(ring_count_for(10, 512), 2);
    }

    #[test]
    fn tradeoff_table_a() {
        let p = TradeoffParams::new(6, 16, 0.5, 0.0);
        let c = build_tradeoff_family(&p).unwrap();
        assert_eq!(c.layout().unwrap().counts, vec![16, 48]);
        assert!(p.oversized_last_ring());
    }

    #[test]
    fn prop1_counts() {
        let c = build_prop1_family(6, 2).unwrap();
        assert_eq!(c.layout().unwrap().counts, vec![2, 4, 6, 8, 10, 12, 14, 8]);
        let c = build_prop1_family(4, 2).unwrap();
        assert_eq!(c.layout().unwrap().counts, vec![2, 4, 6, 4]);
        let c = build_prop1_family(4, 16).unwrap();
        assert_eq!(c.rings(), Some(1));
        assert_eq!(c.moments().variance, 0.0);
    }

    #[test]
    fn tradeoff_rejections() {
        // f(1) = 1 - 2 + 0.5 < 0
        let err = build_tradeoff_family(&TradeoffParams::new(6, 2, 0.5, 2.0)).unwrap_err();
        assert!(matches!(err, ApskError::InvalidPerturbation { k: 1, .. }));
        // f(2) - f(1) = 1 - 3(sqrt2 - 1) < 0
        let err = build_tradeoff_family(&TradeoffParams::new(6, 2, 3.0, 3.0)).unwrap_err();
        assert!(matches!(err, ApskError::InvalidPerturbation { k: 2, .. }));
        let err = build_tradeoff_family(&TradeoffParams::new(6, 0, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, ApskError::AlphaOutOfRange { .. }));
        let err = build_tradeoff_family(&TradeoffParams::new(6, 65, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, ApskError::AlphaOutOfRange { .. }));
        // override forces too many rings: 2 * (1 + ... + 9) = 90 > 64
        let err = build_tradeoff_family(&TradeoffParams::new(6, 2, 0.0, 0.0).with_rings(10)).unwrap_err();
        assert!(matches!(err, ApskError::EmptyLastRing { .. }));
    }

    #[test]
    fn alpha_full_is_psk() {
        for m in 2..=8 {
            let t = build_tradeoff_family(&TradeoffParams::new(m, 1 << m, 0.5, 0.25)).unwrap();
            let p = build_psk(m).unwrap();
            assert_eq!(t.rings(), Some(1));
            for (a, b) in t.points().iter().zip(p.points()) {
                assert!((a - b).norm() < 1e-12);
            }
            assert_eq!(t.moments().variance, 0.0);
        }
    }

    #[test]
    fn psk_properties() {
        for m in 1..=10 {
            let c = build_psk(m).unwrap();
            assert_eq!(c.len(), 1 << m);
            assert_eq!(c.moments().variance, 0.0);
            assert_eq!(c.min_energy(), 1.0);
        }
    }

    #[test]
    fn qam16_moments() {
        let c = build_qam(4).unwrap();
        let mut levels: Vec<f64> = c.energies().to_vec();
        levels.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(levels[0], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(levels[3], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(levels[4], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(levels[11], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(levels[12], 1.8, epsilon = 1e-15);
        assert_abs_diff_eq!(c.moments().variance, 0.32, epsilon = 1e-14);
        assert_abs_diff_eq!(c.min_energy(), 0.2, epsilon = 1e-15);
        assert!(matches!(build_qam(5), Err(ApskError::OddQam(5))));
    }

    #[test]
    fn qam_mean_energy() {
        for m in [2, 4, 6, 8, 10] {
            let c = build_qam(m).unwrap();
            let mean = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / c.len() as f64;
            assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-12);
        }
        assert!(build_qam(2).unwrap().moments().variance.abs() < 1e-15);
    }

    #[test]
    fn from_points_checks() {
        let pts = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        let c = Constellation::from_points(&pts).unwrap();
        assert_eq!(c.m(), 1);
        assert!(Constellation::from_points(&pts[..1]).is_err());
        let dup = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(matches!(Constellation::from_points(&dup), Err(ApskError::DuplicatePoints(_))));
    }
}
