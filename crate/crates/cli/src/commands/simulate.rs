use std::sync::Arc;

use prunedirect_core::io::{write_map, write_population};

use super::{build_map, simulate};
use crate::args::SimulateArgs;
use crate::output::{check_paths, emit_json, write_atomic};
use crate::CliResult;

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    check_paths(&[], &[Some(&args.out_map), Some(&args.out_pop), args.out.as_deref()])?;
    let map = Arc::new(build_map(&args.spec)?);
    let (pop, truth) = simulate(&args.spec, map.clone(), args.seed)?;

    let mut buf = Vec::new();
    write_map(&mut buf, &map)?;
    write_atomic(&args.out_map, &buf)?;
    buf.clear();
    write_population(&mut buf, &pop)?;
    write_atomic(&args.out_pop, &buf)?;

    eprintln!(
        "simulated {} individuals on {} lattice points; QTL at {}",
        pop.n(),
        map.lattice_size(),
        if truth.qtl.is_empty() {
            "none".to_string()
        } else {
            truth.qtl.iter().map(|l| format!("{}:{}", l.chromosome, l.offset_cm)).collect::<Vec<_>>().join(", ")
        }
    );
    emit_json("simulate", &truth, args.out.as_deref())
}
