//! Randomized check that the index of the spectral abscissa of a Metzler
//! matrix equals the length of its longest chain of basic classes.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{rothblum_check_with, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub max_size: usize,
    pub max_classes: usize,
    pub max_class_size: usize,
    pub tolerances: Tolerances,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig { max_size: 8, max_classes: 5, max_class_size: 3, tolerances: Tolerances::default() }
    }
}

/// One generated matrix with the structure it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzInstance {
    pub seed: u64,
    pub matrix: DMatrix<f64>,
    pub class_sizes: Vec<usize>,
    pub basic: Vec<bool>,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzRecord {
    pub instance: usize,
    pub seed: u64,
    pub n: usize,
    pub index: usize,
    pub chain_length: usize,
    pub agree: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of instance `i` under a root seed.
pub fn instance_seed(root: u64, i: usize) -> u64 {
    splitmix64(root ^ splitmix64(i as u64))
}

fn half_integer<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(1..=4) as f64 / 2.0
}

/// Builds a reducible Metzler matrix with a known class structure.
///
/// Each diagonal block has an irreducible pattern (a random cycle plus
/// extra edges) and constant row sums, so its spectral abscissa is that row
/// sum exactly: the common target for basic classes and target minus a gap
/// for the rest. Blocks above the diagonal appear with probability 1/2.
/// Vertex labels are shuffled at the end.
pub fn generate_instance(seed: u64, cfg: &FuzzConfig) -> FuzzInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=cfg.max_classes.max(1));
    let mut sizes: Vec<usize> = (0..m).map(|_| rng.random_range(1..=cfg.max_class_size.max(1))).collect();
    while sizes.iter().sum::<usize>() > cfg.max_size.max(1) {
        let k = sizes.iter().enumerate().max_by_key(|(_, &s)| s).map(|(k, _)| k).unwrap();
        if sizes[k] > 1 {
            sizes[k] -= 1;
        } else {
            sizes.pop();
        }
    }
    let m = sizes.len();
    let mut basic: Vec<bool> = (0..m).map(|_| rng.random_bool(0.5)).collect();
    if !basic.iter().any(|&b| b) {
        let k = rng.random_range(0..m);
        basic[k] = true;
    }
    let target = rng.random_range(-4..=4) as f64 / 2.0;
    let gaps = [1.0, 1.5, 2.0];
    let n: usize = sizes.iter().sum();
    let starts: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &s| {
            let o = *acc;
            *acc += s;
            Some(o)
        })
        .collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for c in 0..m {
        let (s, k) = (starts[c], sizes[c]);
        if k > 1 {
            let mut cyc: Vec<usize> = (0..k).collect();
            cyc.shuffle(&mut rng);
            for t in 0..k {
                a[(s + cyc[t], s + cyc[(t + 1) % k])] = half_integer(&mut rng);
            }
            for i in 0..k {
                for j in 0..k {
                    if i != j && a[(s + i, s + j)] == 0.0 && rng.random_bool(0.5) {
                        a[(s + i, s + j)] = half_integer(&mut rng);
                    }
                }
            }
        }
        let row_sum = if basic[c] { target } else { target - gaps[rng.random_range(0..gaps.len())] };
        for i in 0..k {
            let off: f64 = (0..k).filter(|&j| j != i).map(|j| a[(s + i, s + j)]).sum();
            a[(s + i, s + i)] = row_sum - off;
        }
    }
    for c in 0..m {
        for d in c + 1..m {
            if !rng.random_bool(0.5) {
                continue;
            }
            let mut any = false;
            for i in starts[c]..starts[c] + sizes[c] {
                for j in starts[d]..starts[d] + sizes[d] {
                    if rng.random_bool(0.5) {
                        a[(i, j)] = half_integer(&mut rng);
                        any = true;
                    }
                }
            }
            if !any {
                a[(starts[c], starts[d])] = half_integer(&mut rng);
            }
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let matrix = DMatrix::from_fn(n, n, |i, j| a[(perm[i], perm[j])]);
    FuzzInstance { seed, matrix, class_sizes: sizes, basic, target }
}

pub fn check_instance(instance: usize, inst: &FuzzInstance, tol: &Tolerances) -> FuzzRecord {
    let n = inst.matrix.nrows();
    match rothblum_check_with(&inst.matrix, tol) {
        Ok(o) => FuzzRecord {
            instance,
            seed: inst.seed,
            n,
            index: o.index,
            chain_length: o.chain_length,
            agree: o.agree,
            error: None,
        },
        Err(e) => FuzzRecord {
            instance,
            seed: inst.seed,
            n,
            index: 0,
            chain_length: 0,
            agree: false,
            error: Some(e.to_string()),
        },
    }
}

/// Generates and checks `instances` matrices on `workers` threads. Records
/// come back in instance order.
pub fn run_fuzz(instances: usize, root_seed: u64, cfg: &FuzzConfig, workers: usize) -> Result<Vec<FuzzRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidModel(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..instances)
            .into_par_iter()
            .map(|i| {
                let inst = generate_instance(instance_seed(root_seed, i), cfg);
                check_instance(i, &inst, &cfg.tolerances)
            })
            .collect()
    }))
}

pub fn write_fuzz_csv(path: &Path, records: &[FuzzRecord]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "instance,seed,N,index,chain_length,agree")?;
    for r in records {
        writeln!(out, "{},{},{},{},{},{}", r.instance, r.seed, r.n, r.index, r.chain_length, r.agree)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{ClassPartition, Digraph};

    #[test]
    fn generated_structure_is_recovered() {
        let cfg = FuzzConfig::default();
        for i in 0..100 {
            let inst = generate_instance(instance_seed(7, i), &cfg);
            let p = ClassPartition::of(&Digraph::from_matrix(&inst.matrix, 0.0).unwrap());
            assert_eq!(p.len(), inst.class_sizes.len());
            assert!(inst.matrix.nrows() <= cfg.max_size);
        }
    }

    #[test]
    fn single_class_instance_agrees_with_index_one() {
        let cfg = FuzzConfig { max_classes: 1, ..FuzzConfig::default() };
        let inst = generate_instance(instance_seed(1, 0), &cfg);
        let r = check_instance(0, &inst, &cfg.tolerances);
        assert_eq!((r.index, r.chain_length, r.agree), (1, 1, true));
    }

    #[test]
    fn records_do_not_depend_on_workers() {
        let cfg = FuzzConfig::default();
        assert_eq!(run_fuzz(40, 3, &cfg, 1).unwrap(), run_fuzz(40, 3, &cfg, 4).unwrap());
    }

    #[test]
    fn loose_rank_tolerance_breaks_agreement() {
        let mut cfg = FuzzConfig::default();
        cfg.tolerances.rank = 1e-1;
        let recs = run_fuzz(500, 0, &cfg, 0).unwrap();
        assert!(recs.iter().any(|r| !r.agree));
    }
}
