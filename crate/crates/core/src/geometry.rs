//! Minimum Euclidean distance of ring constellations and energy moments.
//!
//! The structured path splits the minimum distance into intra-ring chords
//! `2 r sin(pi/N)` and inter-ring distances at the smallest angular offset
//! between two rings. [`brute_force_dmin`] is the pairwise oracle.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::Serialize;

use crate::constellation::{ApskDesign, Constellation, EnergyMoments, RingLayout};
use crate::error::{ApskError, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Reduces an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(TWO_PI);
    if t > PI {
        t -= TWO_PI;
    }
    t
}

/// `|theta|_{2pi}`: distance from `theta` to the nearest multiple of `2pi`.
pub fn circular_abs(theta: f64) -> f64 {
    wrap_angle(theta).abs()
}

/// Closest chord within one ring; `+inf` when the ring holds a single point.
pub fn intra_ring_dmin(r: f64, n: usize) -> Result<f64> {
    if !(r > 0.0) {
        return Err(ApskError::InvalidParameter(format!("ring radius {r} must be positive")));
    }
    if n == 0 {
        return Err(ApskError::InvalidParameter("ring has no points".into()));
    }
    if n == 1 {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 * r * (PI / n as f64).sin())
}

/// Smallest angular offset between points of two rings, with the indices
/// `(n, n')` of a pair attaining it.
///
/// For each point of the first ring the nearest point of the second ring is
/// found by rounding, so the cost is `O(n1)` instead of `O(n1 * n2)`.
pub fn angular_offset(n1: usize, n2: usize, phi1: f64, phi2: f64) -> (f64, (usize, usize)) {
    let step2 = TWO_PI / n2 as f64;
    let mut best = (f64::INFINITY, (0, 0));
    for i in 0..n1 {
        let theta = phi1 - phi2 + TWO_PI * i as f64 / n1 as f64;
        let j0 = (theta / step2).round() as i64;
        for j in [j0 - 1, j0, j0 + 1] {
            let d = circular_abs(theta - step2 * j as f64);
            if d < best.0 {
                best = (d, (i, j.rem_euclid(n2 as i64) as usize));
            }
        }
    }
    best
}

/// Exhaustive scan over all `n1 * n2` point pairs of two rings.
pub fn angular_offset_exhaustive(n1: usize, n2: usize, phi1: f64, phi2: f64) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..n1 {
        for j in 0..n2 {
            let theta = phi1 - phi2 + TWO_PI * i as f64 / n1 as f64 - TWO_PI * j as f64 / n2 as f64;
            best = best.min(circular_abs(theta));
        }
    }
    best
}

/// Law-of-cosines distance in the cancellation-free form
/// `(r1 - r2)^2 + 4 r1 r2 sin^2(delta/2)`.
fn ring_pair_distance(r1: f64, r2: f64, delta: f64) -> f64 {
    let s = (0.5 * delta).sin();
    ((r1 - r2).powi(2) + 4.0 * r1 * r2 * s * s).sqrt()
}

/// Closest distance between points of two distinct rings.
pub fn inter_ring_dmin(r1: f64, r2: f64, n1: usize, n2: usize, phi1: f64, phi2: f64) -> Result<f64> {
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(ApskError::InvalidParameter(format!("ring radii ({r1}, {r2}) must be positive")));
    }
    if n1 == 0 || n2 == 0 {
        return Err(ApskError::InvalidParameter("ring has no points".into()));
    }
    let (delta, _) = angular_offset(n1, n2, phi1, phi2);
    Ok(ring_pair_distance(r1, r2, delta))
}

/// Minimum-distance decomposition of a ring constellation.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceReport {
    pub d_min: f64,
    /// Point indices of a closest pair.
    pub argmin_pair: (usize, usize),
    /// Per-ring intra-ring minimum (`+inf` for single-point rings).
    pub intra: Vec<f64>,
    /// Symmetric ring-pair distance matrix; diagonal is `+inf`.
    pub inter: Vec<Vec<f64>>,
    /// Symmetric matrix of smallest angular offsets between rings.
    pub delta_angles: Vec<Vec<f64>>,
}

impl DistanceReport {
    pub fn intra_min(&self) -> f64 {
        self.intra.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn inter_min(&self) -> f64 {
        self.inter.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// Minimum over neighbouring ring pairs `(k, k+1)` only.
    pub fn adjacent_inter_min(&self) -> f64 {
        (1..self.inter.len()).map(|k| self.inter[k - 1][k]).fold(f64::INFINITY, f64::min)
    }
}

/// Structured minimum distance of a ring layout.
pub fn layout_distance(layout: &RingLayout) -> DistanceReport {
    let k = layout.rings();
    let offsets = layout.offsets();
    let mut intra = Vec::with_capacity(k);
    let mut best = (f64::INFINITY, (0, 0));
    for ((&n, &r), &start) in layout.counts.iter().zip(&layout.radii).zip(&offsets) {
        let d = if n == 1 { f64::INFINITY } else { 2.0 * r * (PI / n as f64).sin() };
        if d < best.0 {
            best = (d, (start, start + 1));
        }
        intra.push(d);
    }

    let mut inter = vec![vec![f64::INFINITY; k]; k];
    let mut delta_angles = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a + 1..k {
            // scan the sparser ring
            let (delta, (ia, ib)) = if layout.counts[a] <= layout.counts[b] {
                angular_offset(layout.counts[a], layout.counts[b], layout.phases[a], layout.phases[b])
            } else {
                let (d, (ib, ia)) =
                    angular_offset(layout.counts[b], layout.counts[a], layout.phases[b], layout.phases[a]);
                (d, (ia, ib))
            };
            let d = ring_pair_distance(layout.radii[a], layout.radii[b], delta);
            inter[a][b] = d;
            inter[b][a] = d;
            delta_angles[a][b] = delta;
            delta_angles[b][a] = delta;
            if d < best.0 {
                best = (d, (offsets[a] + ia, offsets[b] + ib));
            }
        }
    }

    DistanceReport { d_min: best.0, argmin_pair: best.1, intra, inter, delta_angles }
}

/// Structured minimum distance of `c`, checked against the design it was built from.
pub fn min_distance(c: &Constellation, design: &ApskDesign) -> Result<DistanceReport> {
    let layout = c.layout().ok_or(ApskError::NotApsk)?;
    let mismatch = |what: &str| Err(ApskError::BadLayout(format!("constellation does not match design: {what}")));
    if design.m != c.m() || design.ring_counts != layout.counts {
        return mismatch("ring counts");
    }
    if design.phase_offsets.len() != layout.phases.len()
        || design.phase_offsets.iter().zip(&layout.phases).any(|(a, b)| circular_abs(a - b) > 1e-12)
    {
        return mismatch("phase offsets");
    }
    let scale = layout.radii[0] / design.ring_radii_raw[0];
    if design.ring_radii_raw.iter().zip(&layout.radii).any(|(raw, r)| ((raw * scale) - r).abs() > 1e-9 * r.max(1.0)) {
        return mismatch("radii");
    }
    Ok(layout_distance(layout))
}

/// Pairwise minimum distance over all point pairs, with the attaining pair.
pub fn brute_force_pair(c: &Constellation) -> (f64, (usize, usize)) {
    let pts = c.points();
    let mut best = (f64::INFINITY, (0, 0));
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = (pts[i] - pts[j]).norm_sqr();
            if d < best.0 {
                best = (d, (i, j));
            }
        }
    }
    (best.0.sqrt(), best.1)
}

pub fn brute_force_dmin(c: &Constellation) -> f64 {
    brute_force_pair(c).0
}

/// Minimum distance of any constellation: structured when ring layout is
/// known, brute force otherwise.
pub fn dmin(c: &Constellation) -> f64 {
    match c.layout() {
        Some(layout) => layout_distance(layout).d_min,
        None => brute_force_dmin(c),
    }
}

pub fn energy_moments(c: &Constellation) -> EnergyMoments {
    c.moments()
}

/// Orders two normalized constellations by `sum |x|^4` (for ring layouts
/// `sum_k N_k r_k^4`), i.e. by symbol-energy variance. Differences of the
/// normalized fourth moment within `1e-12` compare equal.
pub fn fourth_moment_compare(a: &Constellation, b: &Constellation) -> Ordering {
    let fa = a.moments().fourth;
    let fb = b.moments().fourth;
    if (fa - fb).abs() <= 1e-12 {
        Ordering::Equal
    } else if fa < fb {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}
