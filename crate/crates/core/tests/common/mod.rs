//! Shared helpers for integration tests.
#![allow(dead_code, clippy::excessive_precision)]

use std::f64::consts::PI;
use std::sync::Arc;

use num_bigint::BigUint;

use prunedirect_core::genome::{GeneticMap, GenomePosition};
use prunedirect_core::simpop::{heritability_to_effects, simulate_population, CrossType, Population, QtlSpec};

// ln(n!) - (n + 1/2) ln n + n - ln sqrt(2 pi) at n = 0, 0.5, ..., 15.
const SFERR_HALVES: [f64; 31] = [
    0.0,
    0.153_426_409_720_027_345_291_384_8,
    0.081_061_466_795_327_258_219_670_2,
    0.054_814_121_051_917_653_896_139_0,
    0.041_340_695_955_409_294_093_822_1,
    0.033_162_873_519_936_287_485_110_48,
    0.027_677_925_684_998_339_148_789_29,
    0.023_746_163_656_297_495_971_329_20,
    0.020_790_672_103_765_093_111_522_77,
    0.018_488_450_532_673_185_230_779_34,
    0.016_644_691_189_821_192_163_194_87,
    0.015_134_973_221_917_378_873_512_55,
    0.013_876_128_823_070_747_998_745_73,
    0.012_810_465_242_920_226_924_249_86,
    0.011_896_709_945_891_770_095_055_72,
    0.011_104_559_758_206_917_326_629_91,
    0.010_411_265_261_972_096_497_478_567,
    0.009_799_416_126_158_803_298_389_475,
    0.009_255_462_182_712_732_917_728_637,
    0.008_768_700_134_139_385_462_952_823,
    0.008_330_563_433_362_871_256_469_318,
    0.007_934_114_564_314_020_547_248_100,
    0.007_573_675_487_951_840_794_972_024,
    0.007_244_554_301_320_383_179_543_912,
    0.006_942_840_107_209_529_865_664_152,
    0.006_665_247_032_707_682_442_354_394,
    0.006_408_994_188_004_207_068_439_631,
    0.006_171_712_263_039_457_647_532_867,
    0.005_951_370_112_758_847_735_624_416,
    0.005_746_216_513_010_115_682_023_589,
    0.005_554_733_551_962_801_371_038_690,
];

/// Stirling series remainder (Loader 2000).
pub fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        let nn = n + n;
        assert_eq!(nn, nn.floor(), "stirlerr needs half-integers below 15");
        return SFERR_HALVES[nn as usize];
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x / np) + np - x`, accurate when `x ~ np`.
pub fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
    }
    x * (x / np).ln() + np - x
}

/// Saddle-point binomial pmf.
pub fn dbinom(x: u64, n: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    let (xf, nf) = (x as f64, n as f64);
    if p == 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if x == n { 1.0 } else { 0.0 };
    }
    if x == 0 {
        if n == 0 {
            return 1.0;
        }
        let lc = if p < 0.1 { -bd0(nf, nf * q) - nf * p } else { nf * q.ln() };
        return lc.exp();
    }
    if x == n {
        let lc = if q < 0.1 { -bd0(nf, nf * p) - nf * q } else { nf * p.ln() };
        return lc.exp();
    }
    let lc = stirlerr(nf) - stirlerr(xf) - stirlerr(nf - xf) - bd0(xf, nf * p) - bd0(nf - xf, nf * q);
    let lf = (2.0 * PI).ln() + xf.ln() + (-xf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// `(m, e)` with `v = m * 2^e` exactly, for finite positive `v`.
fn dyadic(v: f64) -> (u64, i64) {
    let bits = v.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut m, mut e) = if biased == 0 { (frac, -1074) } else { (frac | (1u64 << 52), biased - 1075) };
    let tz = m.trailing_zeros();
    m >>= tz;
    e += tz as i64;
    (m, e)
}

/// Leading 128 bits of `x` and the dropped shift.
fn leading(x: &BigUint) -> (BigUint, i64) {
    let shift = x.bits().saturating_sub(128);
    (x >> shift, shift as i64)
}

fn ldexp(mut v: f64, mut e: i64) -> f64 {
    if e < -1200 - 64 {
        return 0.0;
    }
    while e != 0 {
        let step = e.clamp(-1000, 1000);
        v *= 2f64.powi(step as i32);
        e -= step;
    }
    v
}

/// Binomial pmf row from the exact dyadic values of `p` and `1 - p`,
/// rounded once at the end.
pub fn exact_binomial_row(n: u64, p: f64) -> Vec<f64> {
    assert!(p > 0.0 && p < 1.0);
    let (mp, ep) = dyadic(p);
    let (mq, eq) = dyadic(1.0 - p);
    let (mp_big, mq_big) = (BigUint::from(mp), BigUint::from(mq));
    let mut choose = BigUint::from(1u32);
    let mut p_pow = BigUint::from(1u32);
    let mut q_pow = mq_big.pow(n as u32);
    let mut row = Vec::with_capacity(n as usize + 1);
    for k in 0..=n {
        let (a, sa) = leading(&choose);
        let (b, sb) = leading(&p_pow);
        let (c, sc) = leading(&q_pow);
        let prod = a * b * c;
        let shift = prod.bits().saturating_sub(64);
        let top: u64 = (&prod >> shift).try_into().unwrap();
        let e = sa + sb + sc + shift as i64 + ep * k as i64 + eq * (n - k) as i64;
        row.push(ldexp(top as f64, e));
        if k < n {
            choose = choose * (n - k) / (k + 1);
            p_pow *= &mp_big;
            q_pow /= &mq_big;
        }
    }
    row
}

pub fn two_chromosome_map() -> Arc<GeneticMap> {
    Arc::new(GeneticMap::uniform(2, 100.0, 1.0).unwrap())
}

pub fn additive_backcross(map: Arc<GeneticMap>, n: usize, h2: f64, qtl: GenomePosition, seed: u64) -> Population {
    let spec = if h2 == 0.0 {
        QtlSpec::null(1.0)
    } else {
        let scaling = heritability_to_effects(h2, CrossType::Backcross, 1).unwrap();
        QtlSpec::additive(CrossType::Backcross, vec![qtl], &scaling)
    };
    simulate_population(map, CrossType::Backcross, n, &spec, seed).unwrap()
}

pub fn interaction_backcross(map: Arc<GeneticMap>, n: usize, h2: f64, loci: Vec<GenomePosition>, seed: u64) -> Population {
    let spec = if h2 == 0.0 {
        QtlSpec::null(1.0)
    } else {
        QtlSpec::interaction(CrossType::Backcross, loci, h2).unwrap()
    };
    simulate_population(map, CrossType::Backcross, n, &spec, seed).unwrap()
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// Print one verdict line and return whether it passed.
pub fn report(id: usize, pass: bool, detail: &str) -> bool {
    println!("criterion {id}: {} | {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}
