use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use apsk_core::constellation::{build_apsk, build_psk, build_qam, build_tradeoff_family, ring_count_for};
use apsk_core::report::ConstellationFile;
use apsk_core::tradeoff::default_alpha_range;
use apsk_core::{ApskDesign, Constellation, TradeoffParams};
use clap::Args;

/// Which constellation to build: tradeoff family, PSK, QAM or an explicit design.
#[derive(Args, Debug, Clone)]
pub struct ConstellationArgs {
    /// Bits per symbol.
    #[arg(long)]
    pub m: Option<u32>,

    /// Tradeoff family parameter controlling ring count and ring sizes.
    #[arg(long, requires = "m")]
    pub alpha: Option<u32>,

    /// Additive radius perturbation.
    #[arg(long, default_value_t = 0.0, requires = "alpha")]
    pub b: f64,

    /// Square-root radius perturbation.
    #[arg(long, default_value_t = 0.0, requires = "alpha")]
    pub c: f64,

    /// Override the derived ring count.
    #[arg(long, requires = "alpha")]
    pub rings: Option<usize>,

    /// Build 2^m-PSK.
    #[arg(long, requires = "m", conflicts_with_all = ["alpha", "qam"])]
    pub psk: bool,

    /// Build square 2^m-QAM (even m).
    #[arg(long, requires = "m", conflicts_with = "alpha")]
    pub qam: bool,

    /// JSON ring design: {m, ring_counts, ring_radii_raw, phase_offsets}.
    #[arg(long, conflicts_with_all = ["m", "alpha", "psk", "qam"])]
    pub design: Option<PathBuf>,
}

impl ConstellationArgs {
    pub fn is_empty(&self) -> bool {
        self.m.is_none() && self.design.is_none()
    }

    /// Short description echoed into output headers.
    pub fn describe(&self) -> String {
        if let Some(p) = &self.design {
            return format!("design {}", p.display());
        }
        let m = self.m.unwrap_or(0);
        match (self.psk, self.qam, self.alpha) {
            (true, _, _) => format!("psk m={m}"),
            (_, true, _) => format!("qam m={m}"),
            (_, _, Some(a)) => {
                let mut s = format!("tradeoff m={m} alpha={a} b={} c={}", self.b, self.c);
                if let Some(k) = self.rings {
                    s.push_str(&format!(" rings={k}"));
                }
                s
            }
            _ => format!("m={m}"),
        }
    }

    pub fn build(&self) -> Result<Constellation> {
        if let Some(path) = &self.design {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let design: ApskDesign =
                serde_json::from_str(&text).with_context(|| format!("parsing design {}", path.display()))?;
            return Ok(build_apsk(&design)?);
        }
        let Some(m) = self.m else { bail!("give --m with --alpha, --psk or --qam, or --design FILE") };
        if self.psk {
            return Ok(build_psk(m)?);
        }
        if self.qam {
            return Ok(build_qam(m)?);
        }
        let Some(alpha) = self.alpha else { bail!("--m needs one of --alpha, --psk or --qam") };
        check_alpha(m, alpha)?;
        let mut params = TradeoffParams::new(m, alpha, self.b, self.c);
        if let Some(k) = self.rings {
            params = params.with_rings(k);
        }
        Ok(build_tradeoff_family(&params)?)
    }
}

/// Above `2^(m-1) + 1` the ring count is 1 and the family degenerates to
/// PSK; only `alpha = 2^m` is accepted there, as an explicit PSK request.
fn check_alpha(m: u32, alpha: u32) -> Result<()> {
    if m == 0 || m > apsk_core::constellation::MAX_BITS {
        bail!("m = {m} outside 1..={}", apsk_core::constellation::MAX_BITS);
    }
    let (_, hi) = default_alpha_range(m);
    let full = 1u64 << m;
    if u64::from(alpha) > u64::from(hi) && u64::from(alpha) != full {
        let k = ring_count_for(m, alpha);
        let inner = alpha as u64 * (k as u64).saturating_sub(1) * k as u64 / 2;
        bail!(
            "alpha = {alpha} is above {hi} = 2^(m-1)+1 for m = {m}: ring count K = {k}, \
             inner rings hold {inner} points and the last ring holds {}; \
             the design collapses to {full}-PSK, which is refused (use --psk or --alpha {full})",
            full as i64 - inner as i64
        );
    }
    Ok(())
}

pub fn read_constellation(path: &PathBuf) -> Result<Constellation> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = ConstellationFile::from_json(&text)?;
    Ok(file.to_constellation()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_boundary() {
        assert!(check_alpha(6, 33).is_ok());
        assert!(check_alpha(6, 64).is_ok());
        let err = check_alpha(6, 40).unwrap_err().to_string();
        assert!(err.contains("K = 1"), "{err}");
        assert!(err.contains("64-PSK"), "{err}");
    }
}
