use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use prunedirect_core::io::load_population;
use prunedirect_core::regmodel::{fit, Fitter};
use prunedirect_core::simpop::Population;

use super::permute::{PermuteOutput, Threshold};
use super::scan::ScanOutput;
use super::Locus;
use crate::args::ReportArgs;
use crate::output::{check_paths, emit_json, read_json, write_atomic};
use crate::{config_error, CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanSummary {
    pub d: usize,
    pub loci: Vec<Locus>,
    pub best_rss: f64,
    pub best_logvar: f64,
    pub evaluations: u64,
    /// Re-fitting at the stored loci reproduced `best_rss` exactly.
    pub verified: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PermutationSummary {
    pub n_perms: usize,
    pub n_exceeding: usize,
    pub p_value: f64,
    pub thresholds: Vec<Threshold>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportOutput {
    pub scan: Option<ScanSummary>,
    pub permutations: Option<PermutationSummary>,
    pub histogram: Vec<HistogramBin>,
    pub profile_rows: usize,
}

fn coarsen_to(pop: Population, step_cm: f64) -> CliResult<Population> {
    let factor = (step_cm / pop.map().step_cm()).round() as usize;
    if factor == 0 || (factor as f64 * pop.map().step_cm() - step_cm).abs() > 1e-9 {
        return Err(config_error(format!("scan step {step_cm} cM does not fit the population lattice")));
    }
    Ok(pop.coarsened(factor)?)
}

/// Equal-width bins over `values`; the last bin is closed.
pub fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return vec![HistogramBin { lo, hi, count: values.len() }];
    }
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            lo: lo + width * i as f64,
            hi: if i + 1 == bins { hi } else { lo + width * (i + 1) as f64 },
            count: 0,
        })
        .collect();
    for &v in values {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        out[i].count += 1;
    }
    out
}

/// LogVar along one chromosome; other loci of the optimum stay fixed.
fn profile(pop: &Population, chromosome: usize, optimum: &[Locus]) -> CliResult<String> {
    let map = pop.map();
    let mut points: Vec<usize> = optimum
        .iter()
        .map(|l| map.global_index(l.position))
        .collect::<Result<_, _>>()?;
    let slot = optimum.iter().position(|l| l.position.chromosome == chromosome).unwrap_or(0);
    if points.is_empty() {
        points.push(0);
    }
    let mut fitter = Fitter::new(pop);
    let mut csv = String::from("chromosome,offset_cm,rss,logvar\n");
    let name = &map.chromosomes()[chromosome].name;
    for locus in 0..map.loci_on(chromosome) {
        let pos = prunedirect_core::GenomePosition::new(chromosome, locus);
        points[slot] = map.global_index(pos)?;
        let rss = fitter.evaluate(&points)?.rss;
        writeln!(csv, "{name},{},{rss},{}", map.offset_cm(pos), fitter.logvar(rss)?).expect("string write");
    }
    Ok(csv)
}

pub fn cmd_report(args: &ReportArgs) -> CliResult<()> {
    let inputs: Vec<&std::path::Path> = [Some(args.map.as_path()), Some(args.pop.as_path()), args.scan.as_deref(), args.permutations.as_deref()]
        .into_iter()
        .flatten()
        .collect();
    check_paths(&inputs, &[args.out.as_deref(), args.profile_csv.as_deref(), args.hist_csv.as_deref()])?;
    if args.hist_csv.is_some() && args.permutations.is_none() {
        return Err(config_error("--hist-csv needs --permutations"));
    }
    let base = load_population(&args.map, &args.pop)?;
    let scan: Option<ScanOutput> = args.scan.as_deref().map(read_json).transpose()?;
    let perms: Option<PermuteOutput> = args.permutations.as_deref().map(read_json).transpose()?;

    let pop = match &scan {
        Some(s) => coarsen_to(base, s.step_cm)?,
        None => base,
    };
    let mut text = String::new();

    let scan_summary = match &scan {
        Some(s) => {
            let positions: Vec<_> = s.loci.iter().map(|l| l.position).collect();
            let refit = fit(&pop, &positions)?;
            let verified = refit.rss.to_bits() == s.result.best_rss.to_bits();
            writeln!(
                text,
                "scan: d={} best at {} RSS {:.6} LogVar {:.6} after {} evaluations; re-fit {}",
                s.result.d,
                s.loci.iter().map(|l| format!("{}:{}", l.chromosome, l.offset_cm)).collect::<Vec<_>>().join(", "),
                s.result.best_rss,
                s.result.best_logvar,
                s.result.evaluations,
                if verified { "matches" } else { "DIFFERS" }
            )
            .unwrap();
            Some(ScanSummary {
                d: s.result.d,
                loci: s.loci.clone(),
                best_rss: s.result.best_rss,
                best_logvar: s.result.best_logvar,
                evaluations: s.result.evaluations,
                verified,
            })
        }
        None => None,
    };

    let perm_summary = perms.as_ref().map(|p| {
        writeln!(
            text,
            "permutations: {} of {} reach RSS {:.6}, p = {:.4}",
            p.report.n_exceeding, p.report.n_perms, p.candidate_rss, p.report.p_value
        )
        .unwrap();
        for t in &p.thresholds {
            writeln!(text, "  {:.1}% threshold RSS {:.6} LogVar {:.6}", 100.0 * t.level, t.rss, t.logvar).unwrap();
        }
        PermutationSummary {
            n_perms: p.report.n_perms,
            n_exceeding: p.report.n_exceeding,
            p_value: p.report.p_value,
            thresholds: p.thresholds.clone(),
        }
    });

    let mut hist = Vec::new();
    if let (Some(path), Some(p)) = (&args.hist_csv, &perms) {
        if !p.report.engine.records_optima() {
            return Err(config_error("shortcut permutations do not record optima; rerun with --engine search"));
        }
        hist = histogram(&p.report.best_rss, args.bins);
        let mut csv = String::from("bin_lo,bin_hi,count\n");
        for b in &hist {
            writeln!(csv, "{},{},{}", b.lo, b.hi, b.count).unwrap();
        }
        write_atomic(path, csv.as_bytes())?;
    }

    let mut profile_rows = 0;
    if let Some(path) = &args.profile_csv {
        let optimum = scan_summary.as_ref().map(|s| s.loci.clone()).unwrap_or_default();
        let chromosome = match &args.chromosome {
            Some(name) => pop
                .map()
                .chromosome_index(name)
                .ok_or_else(|| config_error(format!("chromosome {name:?} not in map")))?,
            None => optimum.first().map(|l| l.position.chromosome).unwrap_or(0),
        };
        let csv = profile(&pop, chromosome, &optimum)?;
        profile_rows = csv.lines().count() - 1;
        write_atomic(path, csv.as_bytes())?;
    }

    print!("{text}");
    let output = ReportOutput {
        scan: scan_summary,
        permutations: perm_summary,
        histogram: hist,
        profile_rows,
    };
    if args.out.is_some() {
        emit_json("report", &output, args.out.as_deref())?;
    }
    match &output.scan {
        Some(s) if !s.verified => Err(CliError::Disagreement("re-fit RSS differs from the stored scan result".into())),
        _ => Ok(()),
    }
}
