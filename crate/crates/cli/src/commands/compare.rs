use serde::{Deserialize, Serialize};

use prunedirect_core::search::{exhaustive_scan, run_prunedirect, ScanConfig, ScanResult};

use super::{describe, load_data, Locus};
use crate::args::CompareArgs;
use crate::output::{check_paths, emit_json};
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareOutput {
    pub config: CompareArgs,
    pub agreement: bool,
    pub same_positions: bool,
    pub same_rss: bool,
    /// Exhaustive evaluations per PruneDIRECT evaluation.
    pub speedup: f64,
    pub prunedirect_loci: Vec<Locus>,
    pub exhaustive_loci: Vec<Locus>,
    pub prunedirect: ScanResult,
    pub exhaustive: ScanResult,
}

pub fn cmd_compare(args: &CompareArgs) -> CliResult<()> {
    check_paths(&[], &[args.out.as_deref()])?;
    let pop = load_data(&args.data)?;
    let exhaustive = exhaustive_scan(&pop, args.data.d, args.data.budget)?;
    let config = ScanConfig {
        epsilon: args.data.epsilon,
        ..ScanConfig::default()
    };
    let prunedirect = run_prunedirect(&pop, args.data.d, &config)?;

    let same_positions = prunedirect.best_positions == exhaustive.best_positions;
    let same_rss = prunedirect.best_rss == exhaustive.best_rss;
    let agreement = same_positions && same_rss;
    let speedup = exhaustive.evaluations as f64 / prunedirect.evaluations.max(1) as f64;
    eprintln!(
        "agreement {agreement}: PruneDIRECT {} vs exhaustive {} evaluations ({speedup:.2}x)",
        prunedirect.evaluations, exhaustive.evaluations
    );
    let output = CompareOutput {
        config: args.clone(),
        agreement,
        same_positions,
        same_rss,
        speedup,
        prunedirect_loci: describe(pop.map(), &prunedirect.best_positions),
        exhaustive_loci: describe(pop.map(), &exhaustive.best_positions),
        prunedirect,
        exhaustive,
    };
    emit_json("compare", &output, args.out.as_deref())?;
    if agreement {
        Ok(())
    } else {
        Err(CliError::Disagreement(format!(
            "PruneDIRECT RSS {} at {:?}, exhaustive RSS {} at {:?}",
            output.prunedirect.best_rss, output.prunedirect.best_points, output.exhaustive.best_rss, output.exhaustive.best_points
        )))
    }
}
