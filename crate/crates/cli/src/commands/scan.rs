use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use prunedirect_core::search::{exhaustive_scan, run_prunedirect, ScanConfig, ScanMode, ScanResult};

use super::{describe, load_data, Locus};
use crate::args::ScanArgs;
use crate::output::{check_paths, emit_json, write_atomic};
use crate::{config_error, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanOutput {
    pub config: ScanArgs,
    pub step_cm: f64,
    pub lattice_size: usize,
    pub loci: Vec<Locus>,
    pub result: ScanResult,
}

pub fn cmd_scan(args: &ScanArgs) -> CliResult<()> {
    check_paths(&[], &[args.out.as_deref(), args.dump_quantiles.as_deref()])?;
    if args.exhaustive && args.dump_quantiles.is_some() {
        return Err(config_error("--dump-quantiles needs a PruneDIRECT scan, not --exhaustive"));
    }
    let pop = load_data(&args.data)?;
    let result = if args.exhaustive {
        exhaustive_scan(&pop, args.data.d, args.data.budget)?
    } else {
        let config = ScanConfig {
            epsilon: args.data.epsilon,
            prune: !args.no_prune,
            mode: ScanMode::Search,
        };
        run_prunedirect(&pop, args.data.d, &config)?
    };

    if let Some(path) = &args.dump_quantiles {
        let mut csv = String::from("radius_cm,logvar,rss,saturated\n");
        for q in &result.quantiles {
            writeln!(csv, "{},{},{},{}", q.radius_cm, q.logvar, q.rss, q.saturated).expect("string write");
        }
        write_atomic(path, csv.as_bytes())?;
    }

    let loci = describe(pop.map(), &result.best_positions);
    eprintln!(
        "best {}-locus model at {} with RSS {:.6} (LogVar {:.6}); {} evaluations, {:?}",
        result.d,
        loci.iter().map(|l| format!("{}:{}", l.chromosome, l.offset_cm)).collect::<Vec<_>>().join(", "),
        result.best_rss,
        result.best_logvar,
        result.evaluations,
        result.terminated,
    );
    let output = ScanOutput {
        config: args.clone(),
        step_cm: pop.map().step_cm(),
        lattice_size: pop.map().lattice_size(),
        loci,
        result,
    };
    emit_json("scan", &output, args.out.as_deref())
}
