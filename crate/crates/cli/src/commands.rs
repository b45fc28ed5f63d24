use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use apsk_core::report::{
    evaluate_metrics, fmt_sig, write_baseline_csv, write_frontier_csv, write_metrics_csv, ConstellationFile,
    ConstellationMetrics,
};
use apsk_core::tradeoff::{sweep as run_sweep, SweepRow};
use apsk_core::verify::{run_suite, SuiteReport, VerifyOptions, SUITES};
use apsk_core::{ChannelSpec, SensingSpec};
use serde::Serialize;

use crate::input::read_constellation;
use crate::{config, plot, Format, GenArgs, MetricsArgs, Scale, SweepArgs, VerifyArgs};

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn gen(args: &GenArgs, verbose: bool) -> Result<ExitCode> {
    let c = args.source.build()?;
    let file = ConstellationFile::from_constellation(&c);
    write_file(&args.out, (file.to_json() + "\n").as_bytes())?;
    if !args.no_svg {
        let title = format!("{} ({} points)", args.source.describe(), c.len());
        write_file(&args.out.with_extension("svg"), plot::scatter(&c, &title).as_bytes())?;
    }
    if file.meta.oversized_last_ring {
        eprintln!("note: the last ring holds more points than alpha * K");
    }
    if verbose {
        eprintln!(
            "{}: {} points, K = {}, d_min = {}, Var(|X|^2) = {}",
            args.out.display(),
            c.len(),
            file.meta.rings.map_or("-".into(), |k| k.to_string()),
            fmt_sig(file.meta.d_min),
            fmt_sig(file.meta.variance)
        );
    }
    Ok(ExitCode::SUCCESS)
}

pub fn metrics(args: &MetricsArgs, verbose: bool) -> Result<ExitCode> {
    let (c, source) = match &args.input {
        Some(path) => (read_constellation(path)?, path.display().to_string()),
        None if args.source.is_empty() => bail!("give --input FILE or inline constellation parameters"),
        None => (args.source.build()?, args.source.describe()),
    };
    let s = SensingSpec::new(args.sigma_s2, args.power, args.block_len)?;
    let mut rows = Vec::with_capacity(args.snr_db.len());
    for &snr in &args.snr_db {
        let t = Instant::now();
        let ch = ChannelSpec::from_db(snr)?;
        rows.push(evaluate_metrics(&c, &ch, &s, args.samples, args.blocks, args.seed)?);
        if verbose {
            eprintln!("{snr} dB: {:.2?}", t.elapsed());
        }
    }

    let mut buf = Vec::new();
    match args.format {
        Format::Csv => {
            let header = vec![
                ("source".to_string(), source),
                ("sigma_s2".to_string(), fmt_sig(args.sigma_s2)),
                ("power".to_string(), fmt_sig(args.power)),
                ("samples".to_string(), args.samples.to_string()),
                ("blocks".to_string(), args.blocks.to_string()),
                ("seed".to_string(), args.seed.to_string()),
            ];
            write_metrics_csv(&mut buf, &header, &rows)?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                source: &'a str,
                sensing: SensingSpec,
                seed: u64,
                rows: &'a [ConstellationMetrics],
            }
            let doc = Doc { source: &source, sensing: s, seed: args.seed, rows: &rows };
            serde_json::to_writer_pretty(&mut buf, &doc)?;
            buf.push(b'\n');
        }
    }
    match &args.out {
        Some(path) => write_file(path, &buf)?,
        None => io::stdout().write_all(&buf)?,
    }
    Ok(ExitCode::SUCCESS)
}

/// Reads `variance,rate` pairs from an external CSV. Columns named
/// `variance` and `rate_bits` (or `rate`) are used when present, otherwise
/// the first two columns. `#` lines are comments.
fn read_overlay(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let Some(first) = lines.next() else { return Ok(Vec::new()) };
    let cells: Vec<&str> = first.split(',').map(str::trim).collect();
    let (mut vx, mut vy, mut out) = (0, 1, Vec::new());
    if cells.iter().any(|c| c.parse::<f64>().is_err()) {
        vx = cells.iter().position(|c| *c == "variance").unwrap_or(0);
        vy = cells.iter().position(|c| *c == "rate_bits" || *c == "rate").unwrap_or(1);
    } else {
        out.push(pair(&cells, 0, 1, path)?);
    }
    for line in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        out.push(pair(&cells, vx, vy, path)?);
    }
    Ok(out)
}

fn pair(cells: &[&str], x: usize, y: usize, path: &Path) -> Result<(f64, f64)> {
    let get = |i: usize| -> Result<f64> {
        cells
            .get(i)
            .and_then(|c| c.parse().ok())
            .with_context(|| format!("{}: bad row {:?}", path.display(), cells.join(",")))
    };
    Ok((get(x)?, get(y)?))
}

pub fn sweep(args: &SweepArgs, verbose: bool) -> Result<ExitCode> {
    let plan = config::resolve(args)?;
    let cfg = &plan.config;
    let header = config::header(cfg);
    if verbose {
        for (k, v) in &header {
            eprintln!("{k} = {v}");
        }
        eprintln!("{} tuples, {} threads", cfg.tuples().len(), rayon::current_num_threads());
    }
    let t = Instant::now();
    let set = run_sweep(cfg)?;

    let mut frontier = Vec::new();
    write_frontier_csv(&mut frontier, &header, &set)?;
    write_file(&plan.out_dir.join("frontier.csv"), &frontier)?;
    if let Some(ts) = &set.baseline {
        let mut baseline = Vec::new();
        write_baseline_csv(&mut baseline, &header, ts)?;
        write_file(&plan.out_dir.join("baseline.csv"), &baseline)?;
    }
    let mut log = String::new();
    for row in &set.rows {
        if let SweepRow::Skipped(s) = row {
            log.push_str(&format!(
                "alpha={} b={} c={}: {}\n",
                s.params.alpha,
                fmt_sig(s.params.b),
                fmt_sig(s.params.c),
                s.reason
            ));
        }
    }
    write_file(&plan.out_dir.join("skipped.log"), log.as_bytes())?;

    if !args.no_svg {
        let overlay = match &plan.mba {
            Some(p) => read_overlay(p)?,
            None => Vec::new(),
        };
        write_file(&plan.out_dir.join("frontier.svg"), plot::frontier(&set, &overlay).as_bytes())?;
    }

    let gains = set.baseline_comparison();
    let above = gains.iter().filter(|g| g.sigmas() > 3.0).count();
    eprintln!(
        "{} evaluated, {} skipped, {} on the frontier; {above} of {} interior frontier points beat time sharing by > 3 se ({:.1?})",
        set.points().count(),
        set.skipped().count(),
        set.frontier().len(),
        gains.len(),
        t.elapsed()
    );
    if set.baseline.is_none() {
        eprintln!("no time-sharing baseline: square QAM needs even m");
    }
    Ok(ExitCode::SUCCESS)
}

fn options(args: &VerifyArgs) -> VerifyOptions {
    let mut o = VerifyOptions::default();
    if args.scale == Scale::Quick {
        o.n_samples = 20_000;
        o.n_blocks = 2_000;
        o.max_m = 8;
        o.frontier_samples = 5_000;
        o.frontier_step = 0.5;
    }
    if !args.block_lens.is_empty() {
        o.block_lens = args.block_lens.clone();
    }
    if !args.snr_db.is_empty() {
        o.snr_db = args.snr_db.clone();
    }
    o.n_samples = args.samples.unwrap_or(o.n_samples);
    o.n_blocks = args.blocks.unwrap_or(o.n_blocks);
    o.max_m = args.max_m.unwrap_or(o.max_m);
    o.seed = args.seed.unwrap_or(o.seed);
    o.dmin_scale = args.inject_dmin_scale.unwrap_or(1.0);
    o
}

pub fn verify(args: &VerifyArgs, verbose: bool) -> Result<ExitCode> {
    if args.list {
        for id in SUITES {
            println!("{id}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let ids: Vec<&str> =
        if args.suite.is_empty() { SUITES.to_vec() } else { args.suite.iter().map(String::as_str).collect() };
    if let Some(bad) = ids.iter().find(|id| !SUITES.contains(id)) {
        bail!("unknown suite `{bad}`; known: {}", SUITES.join(", "));
    }
    let opts = options(args);
    let mut reports = Vec::new();
    for id in ids {
        let t = Instant::now();
        let r = run_suite(id, &opts).expect("suite id checked above");
        eprintln!(
            "{} {:<12} {} checks, {} violations ({:.1?})",
            if r.passed { "PASS" } else { "FAIL" },
            r.id,
            r.checked,
            r.violations.len(),
            t.elapsed()
        );
        if verbose || !r.passed {
            for v in r.violations.iter().take(10) {
                eprintln!("    {}: {v}", r.invariant);
            }
        }
        reports.push(r);
    }
    let passed = reports.iter().all(|r| r.passed);
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.invariant).collect();
    #[derive(Serialize)]
    struct Doc<'a> {
        passed: bool,
        failed: Vec<&'a str>,
        options: &'a VerifyOptions,
        suites: &'a [SuiteReport],
    }
    let doc = Doc { passed, failed, options: &opts, suites: &reports };
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    match &args.out {
        Some(path) => write_file(path, text.as_bytes())?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_formats() {
        let dir = tempfile::tempdir().unwrap();
        let named = dir.path().join("a.csv");
        fs::write(&named, "# external\nrate_bits,variance\n3.1,0.2\n3.4,0.3\n").unwrap();
        assert_eq!(read_overlay(&named).unwrap(), vec![(0.2, 3.1), (0.3, 3.4)]);
        let bare = dir.path().join("b.csv");
        fs::write(&bare, "0.1,2.9\n0.2,3.0\n").unwrap();
        assert_eq!(read_overlay(&bare).unwrap(), vec![(0.1, 2.9), (0.2, 3.0)]);
        fs::write(&bare, "0.1,2.9\n0.2,x\n").unwrap();
        assert!(read_overlay(&bare).is_err());
    }
}
