use serde::{Deserialize, Serialize};

use prunedirect_core::permtest::{run_permutation_test, PermutationEngine, PermutationReport};
use prunedirect_core::regmodel::Fitter;
use prunedirect_core::search::{run_prunedirect, ScanConfig, ScanResult};

use super::load_data;
use crate::args::{EngineArg, PermuteArgs};
use crate::output::{check_paths, emit_json};
use crate::{config_error, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Threshold {
    /// Significance level as given, e.g. 0.95.
    pub level: f64,
    pub rss: f64,
    pub logvar: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PermuteOutput {
    pub config: PermuteArgs,
    pub candidate_rss: f64,
    /// The scan that supplied the candidate, when none was given.
    pub main_scan: Option<ScanResult>,
    pub thresholds: Vec<Threshold>,
    pub report: PermutationReport,
}

pub fn cmd_permute(args: &PermuteArgs) -> CliResult<()> {
    check_paths(&[], &[args.out.as_deref()])?;
    if args.perms == 0 {
        return Err(config_error("need at least one permutation"));
    }
    if let Some(level) = args.levels.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(config_error(format!("levels must be in [0, 1], got {level}")));
    }
    let engine = match args.engine {
        EngineArg::Shortcut => PermutationEngine::Shortcut,
        EngineArg::Search => PermutationEngine::Search,
        EngineArg::Exhaustive => PermutationEngine::Exhaustive { budget: args.data.budget },
    };
    if !args.levels.is_empty() && !engine.records_optima() {
        return Err(config_error("thresholds need --engine search or exhaustive"));
    }
    let pop = load_data(&args.data)?;
    let (candidate_rss, main_scan) = match args.candidate_rss {
        Some(c) => (c, None),
        None => {
            let config = ScanConfig {
                epsilon: args.data.epsilon,
                ..ScanConfig::default()
            };
            let main = run_prunedirect(&pop, args.data.d, &config)?;
            (main.best_rss, Some(main))
        }
    };
    let report = run_permutation_test(&pop, args.data.d, candidate_rss, args.perms, args.seed, engine, args.data.epsilon)?;
    let fitter = Fitter::new(&pop);
    let thresholds = args
        .levels
        .iter()
        .map(|&level| {
            let rss = report.threshold_at(1.0 - level)?;
            Ok(Threshold {
                level,
                rss,
                logvar: fitter.logvar(rss)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    eprintln!(
        "candidate RSS {candidate_rss:.6}: {} of {} permutations reach it, p = {:.4}; {} evaluations",
        report.n_exceeding,
        report.n_perms,
        report.p_value,
        report.evaluations.iter().sum::<u64>()
    );
    for t in &thresholds {
        eprintln!("  {:.1}% threshold: RSS {:.6} (LogVar {:.6})", 100.0 * t.level, t.rss, t.logvar);
    }
    let output = PermuteOutput {
        config: args.clone(),
        candidate_rss,
        main_scan,
        thresholds,
        report,
    };
    emit_json("permute", &output, args.out.as_deref())
}
