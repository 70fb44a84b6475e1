//! Text formats for genetic maps and populations.
//!
//! Map: one `name<TAB>length_cM` row per chromosome; `#` starts a comment.
//!
//! Population: a header row whose first cell is the cross tag (`bc`, `f2`,
//! or `phenotype` to infer it from the labels) followed by one
//! `name:offset` cell per lattice point; then one row per individual with
//! the phenotype followed by genotype class labels.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::genome::{Chromosome, GeneticMap};
use crate::simpop::{CrossType, Population};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    reader.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| match l {
        Ok(s) => {
            let t = s.trim();
            !t.is_empty() && !t.starts_with('#')
        }
        Err(_) => true,
    })
}

pub fn read_map<R: BufRead>(reader: R) -> Result<Vec<Chromosome>> {
    let mut out: Vec<Chromosome> = Vec::new();
    for (line, text) in content_lines(reader) {
        let text = text?;
        let cells: Vec<&str> = text.split('\t').map(str::trim).collect();
        if cells.len() != 2 {
            return Err(parse_err(line, format!("expected 2 tab-separated cells, found {}", cells.len())));
        }
        let length: f64 = cells[1].parse().map_err(|_| parse_err(line, format!("bad length {:?}", cells[1])))?;
        if out.iter().any(|c| c.name == cells[0]) {
            return Err(parse_err(line, format!("duplicate chromosome {:?}", cells[0])));
        }
        out.push(Chromosome::new(cells[0], length));
    }
    if out.is_empty() {
        return Err(Error::InvalidMap("map file lists no chromosomes".into()));
    }
    Ok(out)
}

pub fn write_map<W: Write>(mut w: W, map: &GeneticMap) -> Result<()> {
    for c in map.chromosomes() {
        writeln!(w, "{}\t{}", c.name, c.length_cm)?;
    }
    Ok(())
}

fn format_offset(cm: f64) -> String {
    let s = format!("{cm:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Parse a population; the lattice step is the smallest gap between
/// header offsets on one chromosome.
pub fn read_population<R: BufRead>(reader: R, chromosomes: Vec<Chromosome>) -> Result<Population> {
    let mut lines = content_lines(reader);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let header = header?;
    let mut cells = header.split('\t').map(str::trim);
    let tag = cells.next().unwrap_or_default();
    let declared = match tag {
        "phenotype" => None,
        t => Some(CrossType::from_tag(t).ok_or_else(|| parse_err(hline, format!("unknown cross tag {t:?}")))?),
    };

    let mut columns = Vec::new();
    for cell in cells {
        let (name, offset) = cell.rsplit_once(':').ok_or_else(|| parse_err(hline, format!("bad position {cell:?}")))?;
        let chr = chromosomes
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| parse_err(hline, format!("chromosome {name:?} not in map")))?;
        let offset: f64 = offset.parse().map_err(|_| parse_err(hline, format!("bad offset in {cell:?}")))?;
        columns.push((chr, offset));
    }
    let mut step = f64::INFINITY;
    let mut sorted = columns.clone();
    sorted.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    for w in sorted.windows(2) {
        if w[0].0 == w[1].0 && w[1].1 > w[0].1 {
            step = step.min(w[1].1 - w[0].1);
        }
    }
    if !step.is_finite() {
        return Err(parse_err(hline, "cannot infer the lattice step from fewer than two loci per chromosome"));
    }
    let map = Arc::new(GeneticMap::new(chromosomes, step)?);
    let mut point_of_column = Vec::with_capacity(columns.len());
    let mut seen = vec![false; map.lattice_size()];
    for &(chr, offset) in &columns {
        let g = map.global_index(map.position_at(chr, offset).map_err(|e| parse_err(hline, e.to_string()))?)?;
        if std::mem::replace(&mut seen[g], true) {
            return Err(parse_err(hline, format!("duplicate position {}:{}", map.chromosomes()[chr].name, format_offset(offset))));
        }
        point_of_column.push(g);
    }
    if columns.len() != map.lattice_size() {
        return Err(parse_err(
            hline,
            format!("header has {} positions but the lattice has {}", columns.len(), map.lattice_size()),
        ));
    }

    let mut phenotypes = Vec::new();
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for (line, text) in lines {
        let text = text?;
        let mut cells = text.split('\t').map(str::trim);
        let y: f64 = cells
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|_| parse_err(line, "bad phenotype"))?;
        let labels = cells
            .map(|c| c.parse::<u8>().map_err(|_| parse_err(line, format!("bad genotype {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if labels.len() != columns.len() {
            return Err(parse_err(line, format!("expected {} genotypes, found {}", columns.len(), labels.len())));
        }
        phenotypes.push(y);
        rows.push(labels);
    }
    let max_label = rows.iter().flatten().copied().max().unwrap_or(0);
    let cross = declared.unwrap_or(if max_label >= 2 { CrossType::Intercross } else { CrossType::Backcross });
    let n = rows.len();
    let mut genotypes = vec![0u8; n * map.lattice_size()];
    for (ind, row) in rows.iter().enumerate() {
        for (&g, &label) in point_of_column.iter().zip(row) {
            genotypes[g * n + ind] = label;
        }
    }
    Population::new(map, cross, genotypes, phenotypes)
}

pub fn write_population<W: Write>(mut w: W, pop: &Population) -> Result<()> {
    let map = pop.map();
    write!(w, "{}", pop.cross().tag())?;
    for pos in map.lattice_points() {
        write!(w, "\t{}:{}", map.chromosomes()[pos.chromosome].name, format_offset(map.offset_cm(pos)))?;
    }
    writeln!(w)?;
    let columns: Vec<&[u8]> = (0..map.lattice_size()).map(|g| pop.genotypes_at(g)).collect();
    for (ind, y) in pop.phenotypes().iter().enumerate() {
        write!(w, "{y}")?;
        for col in &columns {
            write!(w, "\t{}", col[ind])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn load_map(path: &Path) -> Result<Vec<Chromosome>> {
    read_map(BufReader::new(File::open(path)?))
}

pub fn load_population(map_path: &Path, pop_path: &Path) -> Result<Population> {
    read_population(BufReader::new(File::open(pop_path)?), load_map(map_path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simpop::{simulate_population, QtlSpec};

    #[test]
    fn map_round_trip_and_errors() {
        let map = GeneticMap::uniform(3, 42.5, 0.5).unwrap();
        let mut buf = Vec::new();
        write_map(&mut buf, &map).unwrap();
        let back = read_map(&buf[..]).unwrap();
        assert_eq!(back, map.chromosomes());
        assert!(read_map("# only a comment\n".as_bytes()).is_err());
        assert!(matches!(read_map("1\t10\n1\t20\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_map("\n1\tx\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn population_round_trip() {
        for cross in [CrossType::Backcross, CrossType::Intercross] {
            let map = Arc::new(GeneticMap::uniform(2, 3.0, 0.5).unwrap());
            let pop = simulate_population(map.clone(), cross, 25, &QtlSpec::null(1.0), 4).unwrap();
            let mut buf = Vec::new();
            write_population(&mut buf, &pop).unwrap();
            let back = read_population(&buf[..], map.chromosomes().to_vec()).unwrap();
            assert_eq!(back.cross(), cross);
            assert_eq!(back.phenotypes(), pop.phenotypes());
            assert_eq!(back.map().step_cm(), 0.5);
            for g in 0..map.lattice_size() {
                assert_eq!(back.genotypes_at(g), pop.genotypes_at(g));
            }
        }
    }

    #[test]
    fn infers_cross_and_accepts_any_column_order() {
        let chroms = vec![Chromosome::new("A", 2.0)];
        let text = "phenotype\tA:2\tA:0\tA:1\n1.5\t1\t0\t0\n-0.5\t1\t1\t1\n";
        let pop = read_population(text.as_bytes(), chroms.clone()).unwrap();
        assert_eq!(pop.cross(), CrossType::Backcross);
        assert_eq!(pop.genotypes_at(0), &[0, 1]);
        assert_eq!(pop.genotypes_at(2), &[1, 1]);
        let f2 = "phenotype\tA:0\tA:1\tA:2\n1.5\t2\t0\t0\n0.5\t1\t1\t1\n";
        assert_eq!(read_population(f2.as_bytes(), chroms).unwrap().cross(), CrossType::Intercross);
    }

    #[test]
    fn rejects_malformed_populations() {
        let chroms = vec![Chromosome::new("A", 2.0)];
        let bad = [
            "zz\tA:0\tA:1\tA:2\n1\t0\t0\t0\n",
            "bc\tA:0\tA:1\n1\t0\t0\n",
            "bc\tA:0\tA:1\tA:2\n1\t0\t0\n",
            "bc\tA:0\tA:1\tB:2\n1\t0\t0\t0\n",
            "bc\tA:0\tA:1\tA:2\nx\t0\t0\t0\n",
            "bc\tA:0\tA:1\tA:2\n1\t0\t2\t0\n",
            "bc\tA:0\tA:1\tA:1\tA:2\n1\t0\t0\t0\t0\n",
        ];
        for text in bad {
            assert!(read_population(text.as_bytes(), chroms.clone()).is_err(), "{text}");
        }
    }
}
