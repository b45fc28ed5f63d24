//! Sweep configuration: flags over TOML over defaults.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use apsk_core::comm::MIN_MI_SAMPLES;
use apsk_core::report::fmt_sig;
use apsk_core::tradeoff::{default_alpha_range, grid, DEFAULT_SEED};
use apsk_core::SweepConfig;
use serde::Deserialize;

use crate::SweepArgs;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub m: Option<u32>,
    pub snr_db: Option<f64>,
    pub alpha: Option<String>,
    pub grid: Option<String>,
    pub b_grid: Option<String>,
    pub c_grid: Option<String>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub mba: Option<PathBuf>,
}

impl SweepFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

pub struct SweepPlan {
    pub config: SweepConfig,
    pub out_dir: PathBuf,
    pub mba: Option<PathBuf>,
}

pub fn resolve(args: &SweepArgs) -> Result<SweepPlan> {
    let file = match &args.config {
        Some(p) => SweepFile::load(p)?,
        None => SweepFile::default(),
    };
    let m = args.m.or(file.m).ok_or_else(|| anyhow!("--m is required (flag or config file)"))?;
    let snr_db = args.snr_db.or(file.snr_db).ok_or_else(|| anyhow!("--snr-db is required (flag or config file)"))?;
    if !(2..=12).contains(&m) {
        bail!("m = {m} outside 2..=12");
    }

    let (alpha_min, alpha_max) = match args.alpha.as_ref().or(file.alpha.as_ref()) {
        Some(s) => parse_range(s)?,
        None => default_alpha_range(m),
    };
    // per-axis flag > --grid flag > per-axis file key > file grid
    let pick = |own_flag: &Option<String>, own_file: &Option<String>| -> Result<Vec<f64>> {
        match own_flag.as_ref().or(args.grid.as_ref()).or(own_file.as_ref()).or(file.grid.as_ref()) {
            Some(s) => parse_grid(s),
            None => Ok(grid(0.0, 2.0, 0.25)?),
        }
    };
    let b_grid = pick(&args.b_grid, &file.b_grid)?;
    let c_grid = pick(&args.c_grid, &file.c_grid)?;

    let n_samples = args.samples.or(file.samples).unwrap_or(apsk_core::comm::DEFAULT_MI_SAMPLES);
    if n_samples < MIN_MI_SAMPLES {
        bail!("--samples must be at least {MIN_MI_SAMPLES}");
    }
    let config = SweepConfig {
        m,
        snr_c_db: snr_db,
        alpha_min,
        alpha_max,
        b_grid,
        c_grid,
        n_samples,
        seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
    };
    config.validate()?;
    Ok(SweepPlan {
        config,
        out_dir: args.out_dir.clone().or(file.out_dir).unwrap_or_else(|| PathBuf::from(".")),
        mba: args.mba.clone().or(file.mba),
    })
}

/// `lo:hi`, inclusive.
pub fn parse_range(s: &str) -> Result<(u32, u32)> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| anyhow!("range `{s}` is not lo:hi"))?;
    let lo: u32 = lo.trim().parse().with_context(|| format!("range start in `{s}`"))?;
    let hi: u32 = hi.trim().parse().with_context(|| format!("range end in `{s}`"))?;
    if lo > hi {
        bail!("range `{s}` is empty");
    }
    Ok((lo, hi))
}

/// `start:step:stop`, a single value, or a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let nums = |parts: &[&str]| -> Result<Vec<f64>> {
        parts.iter().map(|p| p.trim().parse::<f64>().with_context(|| format!("number `{p}` in grid `{s}`"))).collect()
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        3 => {
            let v = nums(&parts)?;
            Ok(grid(v[0], v[2], v[1])?)
        }
        1 => nums(&s.split(',').collect::<Vec<_>>()),
        _ => bail!("grid `{s}` is not start:step:stop or a list"),
    }
}

/// Effective configuration as `# key = value` header pairs. Output paths and
/// thread counts are left out so reruns elsewhere stay byte-identical.
pub fn header(cfg: &SweepConfig) -> Vec<(String, String)> {
    let list = |v: &[f64]| v.iter().map(|x| fmt_sig(*x)).collect::<Vec<_>>().join(",");
    vec![
        ("m".into(), cfg.m.to_string()),
        ("snr_db".into(), fmt_sig(cfg.snr_c_db)),
        ("alpha".into(), format!("{}:{}", cfg.alpha_min, cfg.alpha_max)),
        ("b_grid".into(), list(&cfg.b_grid)),
        ("c_grid".into(), list(&cfg.c_grid)),
        ("samples".into(), cfg.n_samples.to_string()),
        ("seed".into(), cfg.seed.to_string()),
    ]
}
