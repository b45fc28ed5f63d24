//! Property suites run by `apsk verify`.
//!
//! Each suite returns a [`SuiteReport`] naming the invariant it checks and
//! every violation found.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::comm::{
    constant_gap_check, estimate_mi, gap_upper_bound_from_dmin, gaussian_capacity, mi_lower_bound_from_dmin,
    ChannelSpec,
};
use crate::constellation::{
    build_apsk, build_prop1_family, build_psk, build_qam, build_tradeoff_family, ring_count_for, ApskDesign,
    Constellation, TradeoffParams,
};
use crate::geometry::{brute_force_dmin, dmin, min_distance};
use crate::report::{write_baseline_csv, write_frontier_csv};
use crate::rng::{derive_seed, stream};
use crate::sense::{avg_crb_bound, avg_crb_monte_carlo, variance_metric, SensingSpec};
use crate::tradeoff::{grid, sweep, SweepConfig, TABLE1};

/// `96 + 64 sqrt(2)`.
pub fn packing_constant() -> f64 {
    96.0 + 64.0 * 2f64.sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub id: &'static str,
    pub invariant: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub violations: Vec<String>,
    pub detail: serde_json::Value,
}

impl SuiteReport {
    fn new(
        id: &'static str,
        invariant: &'static str,
        checked: usize,
        violations: Vec<String>,
        detail: serde_json::Value,
    ) -> Self {
        Self { id, invariant, passed: violations.is_empty(), checked, violations, detail }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    pub n_samples: usize,
    pub n_blocks: usize,
    pub block_lens: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub gap_snr_db: Vec<f64>,
    pub max_m: u32,
    /// Multiplies every structured minimum distance; 1.0 for real runs.
    pub dmin_scale: f64,
    /// Samples per sweep tuple in the frontier suite.
    pub frontier_samples: usize,
    /// Step of the b/c grid in the frontier suite.
    pub frontier_step: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 7,
            n_samples: 200_000,
            n_blocks: 10_000,
            block_lens: vec![8, 64, 512],
            snr_db: vec![5.0, 10.0, 15.0],
            gap_snr_db: vec![5.0, 10.0, 15.0, 20.0],
            max_m: 10,
            dmin_scale: 1.0,
            frontier_samples: 20_000,
            frontier_step: 0.25,
        }
    }
}

pub const SUITES: [&str; 12] = [
    "k_range",
    "table1",
    "lemma1",
    "scaling",
    "eq12",
    "eq13",
    "corollary1",
    "lemma2",
    "variance",
    "frontier",
    "oracle",
    "determinism",
];

pub fn run_suite(id: &str, opts: &VerifyOptions) -> Option<SuiteReport> {
    Some(match id {
        "k_range" => k_range(),
        "table1" => table1(),
        "lemma1" => packing_bound(opts),
        "scaling" => scaling_band(opts),
        "eq12" => mi_bounds(opts).0,
        "eq13" => mi_bounds(opts).1,
        "corollary1" => constant_gap(opts),
        "lemma2" => crb_ordering(opts),
        "variance" => variance_sign(),
        "frontier" => frontier_dominance(opts),
        "oracle" => distance_oracle(opts),
        "determinism" => determinism(opts),
        _ => return None,
    })
}

/// Ring counts over alpha in [2, 33] at m = 6 stay within [1, 8] and reach
/// both ends. K = 7 is not reachable: it needs 49 <= 128/alpha < 64.
pub fn k_range() -> SuiteReport {
    let mut ks: Vec<usize> = (2..=33).map(|a| ring_count_for(6, a)).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut violations = Vec::new();
    if ks.first() != Some(&1) || ks.last() != Some(&8) {
        violations.push(format!("K range {ks:?} does not run from 1 to 8"));
    }
    if ks != [1, 2, 3, 4, 5, 6, 8] {
        violations.push(format!("K values {ks:?}"));
    }
    SuiteReport::new(
        "k_range",
        "K_m in [1, 8] for alpha in [2, 33], m = 6",
        32,
        violations,
        serde_json::json!({ "k": ks }),
    )
}

pub fn table1() -> SuiteReport {
    let mut violations = Vec::new();
    let mut rows = Vec::new();
    for d in TABLE1.iter() {
        match build_tradeoff_family(&d.params) {
            Ok(c) => {
                let k = c.rings().unwrap_or(0);
                if k != d.listed_rings {
                    violations.push(format!("{}: K = {k}, listed {}", d.label, d.listed_rings));
                }
                rows.push(serde_json::json!({
                    "label": d.label.to_string(), "m": d.params.m, "alpha": d.params.alpha,
                    "K": k, "listed": d.listed_rings, "K_at_m6": ring_count_for(6, d.params.alpha),
                }));
            }
            Err(e) => violations.push(format!("{}: {e}", d.label)),
        }
    }
    SuiteReport::new(
        "table1",
        "labeled designs build with the listed ring counts",
        TABLE1.len(),
        violations,
        rows.into(),
    )
}

fn bc_grid() -> Vec<f64> {
    grid(0.0, 2.0, 0.25).expect("static grid")
}

/// Every tradeoff constellation for m in 2..=max_m, all alpha, the b/c grid.
pub fn for_each_tradeoff<F: FnMut(&TradeoffParams, &Constellation)>(max_m: u32, mut f: F) {
    let g = bc_grid();
    for m in 2..=max_m {
        for alpha in 1..=(1u32 << m) {
            let k = ring_count_for(m, alpha);
            for &b in &g {
                for &c in &g {
                    // with one ring only f(1) matters, and the normalized result is PSK
                    if k == 1 && (b, c) != (0.0, 0.0) {
                        continue;
                    }
                    let p = TradeoffParams::new(m, alpha, b, c);
                    if let Ok(con) = build_tradeoff_family(&p) {
                        f(&p, &con);
                    }
                }
            }
        }
    }
}

/// Packing bound over the whole tradeoff family. For `m <= 6` the structured
/// distance is also checked against the pairwise oracle, since the bound
/// alone is loose enough to hide a scaled distance.
pub fn packing_bound(opts: &VerifyOptions) -> SuiteReport {
    let limit = packing_constant();
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut mismatches = 0usize;
    let mut violations = Vec::new();
    for_each_tradeoff(opts.max_m, |p, c| {
        checked += 1;
        let d = dmin(c) * opts.dmin_scale;
        let v = d * d * c.len() as f64;
        worst = worst.max(v);
        if v > limit && violations.len() < 20 {
            violations.push(format!("m={} alpha={} b={} c={}: d^2 2^m = {v:.4}", p.m, p.alpha, p.b, p.c));
        }
        if p.m <= 6 && (d - brute_force_dmin(c)).abs() > 1e-9 {
            mismatches += 1;
            if violations.len() < 20 {
                violations.push(format!(
                    "m={} alpha={} b={} c={}: d_min {d:.6} disagrees with pairwise oracle",
                    p.m, p.alpha, p.b, p.c
                ));
            }
        }
    });
    SuiteReport::new(
        "lemma1",
        "d_min^2 * 2^m <= 96 + 64 sqrt(2)",
        checked,
        violations,
        serde_json::json!({ "max_product": worst, "limit": limit, "oracle_mismatches": mismatches }),
    )
}

/// `d_min^2 alpha 2^m` over m in {4, 6, 8, 10} for alpha in {2, 4}.
pub fn scaling_products(alpha: u32) -> Vec<(u32, f64)> {
    [4, 6, 8, 10]
        .iter()
        .map(|&m| {
            let c = build_prop1_family(m, alpha).expect("communication-optimal member");
            let d = dmin(&c);
            (m, d * d * alpha as f64 * c.len() as f64)
        })
        .collect()
}

pub fn scaling_band(opts: &VerifyOptions) -> SuiteReport {
    let mut violations = Vec::new();
    let mut detail = Vec::new();
    for alpha in [2, 4] {
        let products: Vec<f64> =
            scaling_products(alpha).into_iter().map(|(_, v)| v * opts.dmin_scale.powi(2)).collect();
        let hi = products.iter().copied().fold(f64::MIN, f64::max);
        let lo = products.iter().copied().fold(f64::MAX, f64::min);
        if hi / lo > 4.0 {
            violations.push(format!("alpha={alpha}: band ratio {:.3}", hi / lo));
        }
        detail.push(serde_json::json!({ "alpha": alpha, "products": products, "ratio": hi / lo }));
    }
    SuiteReport::new("scaling", "d_min^2 alpha 2^m within a factor-4 band", 8, violations, detail.into())
}

/// Random feasible tradeoff parameters with `m` in 4..=6 on the b/c grid.
pub fn random_tradeoff_params(seed: u64, count: usize) -> Vec<TradeoffParams> {
    let mut rng = stream(seed);
    let g = bc_grid();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let m = rng.random_range(4..=6u32);
        let alpha = rng.random_range(1..=(1u32 << (m - 1)));
        let p = TradeoffParams::new(m, alpha, g[rng.random_range(0..g.len())], g[rng.random_range(0..g.len())]);
        if ring_count_for(m, alpha) >= 2 && p.design().is_ok() {
            out.push(p);
        }
    }
    out
}

/// Random valid APSK designs: random ring partition of `2^m`, increasing
/// radii and arbitrary phase offsets.
pub fn random_designs(seed: u64, count: usize) -> Vec<ApskDesign> {
    let mut rng = stream(seed);
    (0..count)
        .map(|_| {
            let m = rng.random_range(2..=8u32);
            let total = 1usize << m;
            let rings = rng.random_range(1..=total.min(8));
            let mut cuts: Vec<usize> = Vec::new();
            while cuts.len() < rings - 1 {
                let c = rng.random_range(1..total);
                if !cuts.contains(&c) {
                    cuts.push(c);
                }
            }
            cuts.sort_unstable();
            cuts.push(total);
            let mut prev = 0;
            let counts: Vec<usize> = cuts
                .iter()
                .map(|&c| {
                    let n = c - prev;
                    prev = c;
                    n
                })
                .collect();
            let mut r = 0.0;
            let radii: Vec<f64> = (0..rings)
                .map(|_| {
                    r += rng.random_range(0.05..1.0);
                    r
                })
                .collect();
            let phases: Vec<f64> = (0..rings).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
            ApskDesign::new(m, counts, radii, phases)
        })
        .collect()
}

/// QPSK, 8-PSK, 16-QAM and ten random tradeoff designs.
pub fn communication_test_set(seed: u64) -> Vec<(String, Constellation)> {
    let mut set = vec![
        ("QPSK".to_string(), build_psk(2).expect("qpsk")),
        ("8-PSK".to_string(), build_psk(3).expect("8psk")),
        ("16-QAM".to_string(), build_qam(4).expect("16qam")),
    ];
    for p in random_tradeoff_params(seed, 10) {
        let c = build_tradeoff_family(&p).expect("feasible by construction");
        set.push((format!("m={} alpha={} b={} c={}", p.m, p.alpha, p.b, p.c), c));
    }
    set
}

pub fn mi_bounds(opts: &VerifyOptions) -> (SuiteReport, SuiteReport) {
    let set = communication_test_set(opts.seed);
    let mut lower_violations = Vec::new();
    let mut gap_violations = Vec::new();
    let mut rows = Vec::new();
    let mut checked = 0;
    for (i, (name, c)) in set.iter().enumerate() {
        for (j, &snr_db) in opts.snr_db.iter().enumerate() {
            let ch = ChannelSpec::from_db(snr_db).expect("positive SNR");
            let est = match estimate_mi(c, &ch, opts.n_samples, derive_seed(opts.seed, &[i as u64, j as u64])) {
                Ok(e) => e,
                Err(e) => {
                    lower_violations.push(format!("{name} @ {snr_db} dB: {e}"));
                    continue;
                }
            };
            checked += 1;
            let slack = 3.0 * est.std_error_bits;
            let d = dmin(c) * opts.dmin_scale;
            let lb = mi_lower_bound_from_dmin(c.m(), d, &ch).unwrap_or(f64::NAN);
            let gb = gap_upper_bound_from_dmin(c.m(), d, &ch).unwrap_or(f64::NAN);
            let gap = gaussian_capacity(&ch) - est.value_bits;
            if !(lb <= est.value_bits + slack) {
                lower_violations.push(format!("{name} @ {snr_db} dB: bound {lb:.4} > MI {:.4}", est.value_bits));
            }
            if !(gap <= gb + slack) {
                gap_violations.push(format!("{name} @ {snr_db} dB: gap {gap:.4} > bound {gb:.4}"));
            }
            rows.push(serde_json::json!({
                "name": name, "snr_db": snr_db, "mi": est.value_bits, "stderr": est.std_error_bits,
                "lower_bound": lb, "gap": gap, "gap_bound": gb,
            }));
        }
    }
    let detail: serde_json::Value = rows.into();
    (
        SuiteReport::new("eq12", "MI lower bound <= MC MI + 3 stderr", checked, lower_violations, detail.clone()),
        SuiteReport::new("eq13", "C - MC MI <= gap bound + 3 stderr", checked, gap_violations, detail),
    )
}

pub fn constant_gap(opts: &VerifyOptions) -> SuiteReport {
    match constant_gap_check(2, &opts.gap_snr_db, opts.n_samples, opts.seed) {
        Ok(rep) => {
            let mut violations = Vec::new();
            if rep.spread > 0.5 {
                violations.push(format!("gap spread {:.4} bits > 0.5", rep.spread));
            }
            for e in &rep.entries {
                if e.gap > e.gap_bound + 3.0 * e.mi.std_error_bits {
                    violations.push(format!("{} dB: gap {:.4} above bound {:.4}", e.snr_db, e.gap, e.gap_bound));
                }
            }
            let n = rep.entries.len();
            SuiteReport::new(
                "corollary1",
                "gap to capacity spread <= 0.5 bits",
                n,
                violations,
                serde_json::to_value(&rep).unwrap_or_default(),
            )
        }
        Err(e) => SuiteReport::new(
            "corollary1",
            "gap to capacity spread <= 0.5 bits",
            0,
            vec![e.to_string()],
            serde_json::Value::Null,
        ),
    }
}

pub fn crb_ordering(opts: &VerifyOptions) -> SuiteReport {
    let mut set =
        vec![("PSK".to_string(), build_psk(4).expect("psk")), ("16-QAM".to_string(), build_qam(4).expect("qam"))];
    for p in random_tradeoff_params(derive_seed(opts.seed, &[0x0043_5242]), 10) {
        set.push((
            format!("m={} alpha={} b={} c={}", p.m, p.alpha, p.b, p.c),
            build_tradeoff_family(&p).expect("feasible"),
        ));
    }
    let mut violations = Vec::new();
    let mut rows = Vec::new();
    let mut checked = 0;
    for (i, (name, c)) in set.iter().enumerate() {
        for &l in &opts.block_lens {
            let s = SensingSpec::unit(l).expect("valid block length");
            let (Ok(bound), Ok(mc)) = (
                avg_crb_bound(c, &s),
                avg_crb_monte_carlo(c, &s, opts.n_blocks, derive_seed(opts.seed, &[i as u64, l as u64])),
            ) else {
                violations.push(format!("{name} L={l}: evaluation failed"));
                continue;
            };
            checked += 1;
            if mc.mean > bound + 3.0 * mc.std_error {
                violations.push(format!("{name} L={l}: MC {:.6e} > bound {:.6e}", mc.mean, bound));
            }
            if variance_metric(c) == 0.0 && (bound != s.floor() || mc.mean != s.floor()) {
                violations.push(format!("{name} L={l}: constant modulus must give exactly 1/L"));
            }
            rows.push(
                serde_json::json!({ "name": name, "L": l, "bound": bound, "mc": mc.mean, "stderr": mc.std_error }),
            );
        }
    }
    SuiteReport::new("lemma2", "MC average CRB <= bound + 3 stderr", checked, violations, rows.into())
}

pub fn variance_sign() -> SuiteReport {
    let mut violations = Vec::new();
    let mut checked = 0;
    for m in 1..=10 {
        checked += 1;
        let v = variance_metric(&build_psk(m).expect("psk"));
        if v != 0.0 {
            violations.push(format!("{m}-bit PSK variance {v:e}"));
        }
    }
    for_each_tradeoff(8, |p, c| {
        checked += 1;
        let v = variance_metric(c);
        let multi = c.rings().unwrap_or(0) > 1;
        if (multi && !(v > 0.0)) || (!multi && v != 0.0) {
            violations.push(format!("m={} alpha={} b={} c={}: variance {v:e}", p.m, p.alpha, p.b, p.c));
        }
    });
    SuiteReport::new(
        "variance",
        "PSK variance is 0; multi-ring variance > 0",
        checked,
        violations,
        serde_json::Value::Null,
    )
}

/// Full alpha range at m = 6, 10 dB with the configured grid step and sample count.
pub fn frontier_config(opts: &VerifyOptions) -> SweepConfig {
    let mut cfg = SweepConfig::standard(6, 10.0);
    let g = grid(0.0, 2.0, opts.frontier_step).expect("grid");
    cfg.b_grid = g.clone();
    cfg.c_grid = g;
    cfg.n_samples = opts.frontier_samples;
    cfg.seed = opts.seed;
    cfg
}

pub fn frontier_dominance(opts: &VerifyOptions) -> SuiteReport {
    let cfg = frontier_config(opts);
    let set = match sweep(&cfg) {
        Ok(s) => s,
        Err(e) => {
            return SuiteReport::new(
                "frontier",
                "frontier beats time sharing",
                0,
                vec![e.to_string()],
                serde_json::Value::Null,
            )
        }
    };
    let gains = set.baseline_comparison();
    let mut levels: Vec<f64> = gains.iter().filter(|g| g.sigmas() > 3.0).map(|g| g.variance).collect();
    levels.dedup_by(|a, b| (*a - *b).abs() <= crate::tradeoff::VARIANCE_TIE);
    let violations = if levels.len() >= 3 {
        vec![]
    } else {
        vec![format!("only {} interior variance levels beat time sharing by > 3 stderr", levels.len())]
    };
    let detail = serde_json::json!({
        "interior_frontier_points": gains.len(),
        "levels_beating_baseline": levels.len(),
        "gains": gains.iter().map(|g| serde_json::json!({
            "variance": g.variance, "rate": g.rate, "baseline": g.baseline_rate, "sigmas": g.sigmas(),
        })).collect::<Vec<_>>(),
    });
    SuiteReport::new(
        "frontier",
        "frontier beats time sharing at >= 3 interior variances",
        gains.len(),
        violations,
        detail,
    )
}

pub fn distance_oracle(opts: &VerifyOptions) -> SuiteReport {
    let mut violations = Vec::new();
    let designs = random_designs(opts.seed, 100);
    for (i, design) in designs.iter().enumerate() {
        match build_apsk(design).and_then(|c| min_distance(&c, design).map(|r| (r, c))) {
            Ok((rep, c)) => {
                let brute = brute_force_dmin(&c);
                let structured = rep.d_min * opts.dmin_scale;
                if (structured - brute).abs() > 1e-9 {
                    violations.push(format!("design {i}: structured {structured:.12} vs brute {brute:.12}"));
                }
            }
            Err(e) => violations.push(format!("design {i}: {e}")),
        }
    }
    SuiteReport::new(
        "oracle",
        "structured d_min equals brute force within 1e-9",
        designs.len(),
        violations,
        serde_json::Value::Null,
    )
}

fn sweep_csv_bytes(cfg: &SweepConfig) -> Option<Vec<u8>> {
    let set = sweep(cfg).ok()?;
    let mut buf = Vec::new();
    write_frontier_csv(&mut buf, &[], &set).ok()?;
    if let Some(ts) = &set.baseline {
        write_baseline_csv(&mut buf, &[], ts).ok()?;
    }
    Some(buf)
}

pub fn determinism(opts: &VerifyOptions) -> SuiteReport {
    let cfg = SweepConfig {
        m: 4,
        snr_c_db: 5.0,
        alpha_min: 2,
        alpha_max: 9,
        b_grid: vec![0.0, 1.0],
        c_grid: vec![0.0, 1.0],
        n_samples: 2_000,
        seed: opts.seed,
    };
    let a = sweep_csv_bytes(&cfg);
    let b = sweep_csv_bytes(&cfg);
    let violations = match (a, b) {
        (Some(a), Some(b)) if a == b => vec![],
        (Some(_), Some(_)) => vec!["CSV bytes differ between identical runs".to_string()],
        _ => vec!["sweep failed".to_string()],
    };
    SuiteReport::new("determinism", "identical sweeps give identical CSV bytes", 2, violations, serde_json::Value::Null)
}
