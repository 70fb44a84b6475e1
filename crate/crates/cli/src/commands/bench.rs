use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use prunedirect_core::permtest::{run_permutation_test, PermutationEngine};
use prunedirect_core::search::{exhaustive_evaluations, exhaustive_scan, run_prunedirect, ScanConfig};

use super::{build_map, check_model, simulate, Locus, Spread};
use crate::args::BenchArgs;
use crate::output::{check_paths, emit_json, write_atomic};
use crate::{config_error, CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Replicate {
    pub seed: u64,
    pub qtl: Vec<Locus>,
    pub best: Vec<Locus>,
    pub best_rss: f64,
    pub main_evaluations: u64,
    pub permutation_evaluations: u64,
    pub total_evaluations: u64,
    /// Set when `--verify` ran the exhaustive main scan.
    pub agrees_with_exhaustive: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchOutput {
    pub config: BenchArgs,
    pub lattice_size: usize,
    /// Exhaustive evaluations for the main scan plus every permutation.
    pub exhaustive_per_replicate: u128,
    pub exhaustive: Spread,
    pub prunedirect: Spread,
    pub prunedirect_main: Spread,
    pub replicates: Vec<Replicate>,
}

fn table(out: &BenchOutput) -> String {
    let c = &out.config;
    let mut s = String::new();
    writeln!(
        s,
        "d={} h2={} n={} replicates={} permutations={} (evaluations per replicate)",
        c.d, c.spec.h2, c.spec.n, c.replicates, c.perms
    )
    .unwrap();
    writeln!(s, "{:<14} {:>14} {:>14} {:>14} {:>14}", "Method", "Min", "Median", "Avg", "Maximum").unwrap();
    for (name, sp) in [("Exhaustive", out.exhaustive), ("PruneDIRECT", out.prunedirect), ("  main only", out.prunedirect_main)] {
        writeln!(s, "{:<14} {:>14.0} {:>14.1} {:>14.1} {:>14.0}", name, sp.min, sp.median, sp.mean, sp.max).unwrap();
    }
    s
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult<()> {
    check_paths(&[], &[args.out.as_deref(), args.table.as_deref()])?;
    check_model(args.d, args.epsilon)?;
    if args.replicates == 0 {
        return Err(config_error("need at least one replicate"));
    }
    let map = Arc::new(build_map(&args.spec)?);
    let lattice = map.lattice_size();
    let exhaustive_total = exhaustive_evaluations(lattice, args.d) * (1 + args.perms as u128);
    let config = ScanConfig {
        epsilon: args.epsilon,
        ..ScanConfig::default()
    };

    let mut replicates = Vec::with_capacity(args.replicates);
    for r in 0..args.replicates as u64 {
        let seed = args.seed.wrapping_add(r);
        let (pop, truth) = simulate(&args.spec, map.clone(), seed)?;
        let main = run_prunedirect(&pop, args.d, &config)?;
        let permutation_evaluations = if args.perms > 0 {
            let report =
                run_permutation_test(&pop, args.d, main.best_rss, args.perms, seed << 20, PermutationEngine::Shortcut, args.epsilon)?;
            report.evaluations.iter().sum()
        } else {
            0
        };
        let agrees_with_exhaustive = if args.verify {
            let ex = exhaustive_scan(&pop, args.d, args.budget)?;
            Some(ex.best_points == main.best_points && ex.best_rss == main.best_rss)
        } else {
            None
        };
        log::info!("replicate {r}: {} main evaluations", main.evaluations);
        replicates.push(Replicate {
            seed,
            qtl: truth.qtl,
            best: super::describe(&map, &main.best_positions),
            best_rss: main.best_rss,
            main_evaluations: main.evaluations,
            permutation_evaluations,
            total_evaluations: main.evaluations + permutation_evaluations,
            agrees_with_exhaustive,
        });
    }

    let spread = |f: &dyn Fn(&Replicate) -> f64| Spread::of(&replicates.iter().map(f).collect::<Vec<_>>()).expect("replicates");
    let output = BenchOutput {
        config: args.clone(),
        lattice_size: lattice,
        exhaustive_per_replicate: exhaustive_total,
        exhaustive: spread(&|_| exhaustive_total as f64),
        prunedirect: spread(&|r| r.total_evaluations as f64),
        prunedirect_main: spread(&|r| r.main_evaluations as f64),
        replicates,
    };
    let text = table(&output);
    print!("{text}");
    if let Some(path) = &args.table {
        write_atomic(path, text.as_bytes())?;
    }
    let disagreements = output.replicates.iter().filter(|r| r.agrees_with_exhaustive == Some(false)).count();
    if args.out.is_some() {
        emit_json("bench", &output, args.out.as_deref())?;
    }
    if disagreements > 0 {
        return Err(CliError::Disagreement(format!("{disagreements} replicates differ from the exhaustive scan")));
    }
    Ok(())
}
