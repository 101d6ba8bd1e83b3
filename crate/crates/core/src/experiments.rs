//! Multi-seed experiment drivers. Seeds run in parallel; results are always
//! returned sorted by seed so output does not depend on scheduling.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{input, Error, Result};
use crate::evolution::{evolve, random_program, EvolutionConfig, RunTrace};
use crate::iset::{InstructionSet, Variant};
use crate::problems::{load_csv, Benchmark, Dataset, Fitness};
use crate::program::{Program, RegisterConfig};
use crate::stats::{friedman, mean, rank_sum, spearman, std_dev};

/// A benchmark by name or a CSV file split per seed.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Benchmark(Benchmark),
    Csv { path: PathBuf, train_frac: f64 },
}

impl Problem {
    pub fn split(&self, seed: u64) -> Result<(Dataset, Dataset)> {
        match self {
            Problem::Benchmark(b) => b.train_test(seed),
            Problem::Csv { path, train_frac } => load_csv(path, seed, *train_frac),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::Benchmark(b) => write!(f, "{b}"),
            Problem::Csv { path, .. } => write!(f, "{}", path.display()),
        }
    }
}

impl FromStr for Problem {
    type Err = Error;

    /// Benchmark names are matched first; anything ending in `.csv` is a
    /// file with a 70/30 split.
    fn from_str(s: &str) -> Result<Self> {
        if let Ok(b) = s.parse::<Benchmark>() {
            return Ok(Problem::Benchmark(b));
        }
        if s.to_ascii_lowercase().ends_with(".csv") {
            return Ok(Problem::Csv {
                path: PathBuf::from(s),
                train_frac: 0.7,
            });
        }
        input(format!("unknown problem `{s}` (expected a benchmark name or a .csv path)"))
    }
}

/// The default register layout for a problem: eight registers, output R0.
pub fn instruction_set(num_features: usize, variant: Variant) -> InstructionSet {
    InstructionSet::standard(&RegisterConfig::with_features(num_features)).build_variant(variant)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub m: usize,
    /// Mean over seeds of the per-seed mean RSE.
    pub mean: f64,
    /// Standard deviation of the per-seed means.
    pub std: f64,
}

/// Mean RSE of `per_seed` uniformly random size-`m` programs on each seed's
/// training split.
pub fn sample_fitness(problem: &Problem, ms: &[usize], per_seed: usize, seeds: &[u64]) -> Result<Vec<SampleRow>> {
    if ms.is_empty() || per_seed == 0 || seeds.is_empty() {
        return input("sizes, sample count and seeds must be nonempty");
    }
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    let per_seed_means: Vec<Vec<f64>> = sorted
        .par_iter()
        .map(|&seed| {
            let (train, _) = problem.split(seed)?;
            let iset = instruction_set(train.num_features(), Variant::Default);
            let mut fit = Fitness::new(&train, iset.config())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let max = ms.iter().copied().max().unwrap_or(0);
            Ok(ms
                .iter()
                .map(|&m| {
                    let total: f64 = (0..per_seed).map(|_| fit.rse(&random_program(m, max, &iset, &mut rng))).sum();
                    total / per_seed as f64
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(ms
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let xs: Vec<f64> = per_seed_means.iter().map(|r| r[i]).collect();
            SampleRow {
                m,
                mean: mean(&xs),
                std: std_dev(&xs),
            }
        })
        .collect())
}

pub fn sample_csv(rows: &[SampleRow]) -> String {
    let mut s = String::from("m,mean_rse,std_rse\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.m, r.mean, r.std));
    }
    s
}

/// Spearman correlation between size and mean RSE.
pub fn size_fitness_correlation(rows: &[SampleRow]) -> Option<f64> {
    let ms: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    let means: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    spearman(&ms, &means)
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub seed: u64,
    pub best: Program,
    pub train_rse: f64,
    pub test_rse: f64,
    pub trace: RunTrace,
}

/// One evolution per seed, in parallel. `cfg.seed` is replaced by each seed.
pub fn evolve_seeds(problem: &Problem, cfg: &EvolutionConfig, variant: Variant, seeds: &[u64]) -> Result<Vec<RunSummary>> {
    cfg.validate()?;
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    sorted
        .par_iter()
        .map(|&seed| {
            let (train, test) = problem.split(seed)?;
            let iset = instruction_set(train.num_features(), variant);
            let run = evolve(&EvolutionConfig { seed, ..cfg.clone() }, &iset, &train)?;
            let test_rse = Fitness::new(&test, iset.config())?.rse(&run.best);
            Ok(RunSummary {
                seed,
                best: run.best,
                train_rse: run.best_fitness,
                test_rse,
                trace: run.trace,
            })
        })
        .collect()
}

/// Per-generation averages of the traces of several runs.
pub fn mean_trace(runs: &[RunSummary]) -> RunTrace {
    let Some(first) = runs.first() else {
        return RunTrace::default();
    };
    let k = runs.len() as f64;
    let records = (0..first.trace.len())
        .map(|g| {
            let mut r = first.trace.records[g];
            r.best_fitness = runs.iter().map(|s| s.trace.records[g].best_fitness).sum::<f64>() / k;
            r.mean_fitness = runs.iter().map(|s| s.trace.records[g].mean_fitness).sum::<f64>() / k;
            r.mean_size = runs.iter().map(|s| s.trace.records[g].mean_size).sum::<f64>() / k;
            r.mean_exons = runs.iter().map(|s| s.trace.records[g].mean_exons).sum::<f64>() / k;
            r
        })
        .collect();
    RunTrace { records }
}

pub fn runs_csv(runs: &[RunSummary]) -> String {
    let mut s = String::from("seed,train_rse,test_rse,best_size,final_mean_exons\n");
    for r in runs {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.seed,
            r.train_rse,
            r.test_rse,
            r.best.len(),
            r.trace.records.last().map_or(0.0, |x| x.mean_exons)
        ));
    }
    s
}

#[derive(Debug, Clone)]
pub struct StepRow {
    pub u: usize,
    pub runs: Vec<RunSummary>,
}

impl StepRow {
    /// Final best training RSE of every run.
    pub fn final_best(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.train_rse).collect()
    }
}

/// Evolve with each step size in `us` over the same seeds.
pub fn step_size_sweep(problem: &Problem, cfg: &EvolutionConfig, us: &[usize], seeds: &[u64]) -> Result<Vec<StepRow>> {
    us.iter()
        .map(|&u| {
            Ok(StepRow {
                u,
                runs: evolve_seeds(problem, &EvolutionConfig { step: u, ..cfg.clone() }, Variant::Default, seeds)?,
            })
        })
        .collect()
}

/// Mean and standard deviation across seeds for every step size and
/// generation.
pub fn step_csv(rows: &[StepRow]) -> String {
    let mut s = String::from("u,generation,best_mean,best_std,size_mean,size_std,exons_mean,exons_std\n");
    for row in rows {
        let Some(first) = row.runs.first() else { continue };
        for g in 0..first.trace.len() {
            let column = |f: fn(&crate::evolution::GenerationRecord) -> f64| -> Vec<f64> {
                row.runs.iter().map(|r| f(&r.trace.records[g])).collect()
            };
            let best = column(|r| r.best_fitness);
            let size = column(|r| r.mean_size);
            let exons = column(|r| r.mean_exons);
            s.push_str(&format!(
                "{},{g},{},{},{},{},{},{}\n",
                row.u,
                mean(&best),
                std_dev(&best),
                mean(&size),
                std_dev(&size),
                mean(&exons),
                std_dev(&exons)
            ));
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyCell {
    pub mean: f64,
    pub std: f64,
    /// Rank-sum p-value against the first variant; `None` for the first
    /// variant itself or with a single seed.
    pub p_vs_base: Option<f64>,
    pub test_rse: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub problems: Vec<String>,
    pub variants: Vec<Variant>,
    /// `cells[problem][variant]`.
    pub cells: Vec<Vec<StudyCell>>,
    /// Friedman-style mean rank of each variant's mean test RSE across
    /// problems (1 = best).
    pub mean_ranks: Vec<f64>,
}

/// Evolve under every variant on every problem and compare test RSE against
/// the first variant.
pub fn instrset_study(
    problems: &[Problem],
    variants: &[Variant],
    cfg: &EvolutionConfig,
    seeds: &[u64],
) -> Result<StudyTable> {
    if problems.is_empty() || variants.is_empty() || seeds.is_empty() {
        return input("problems, variants and seeds must be nonempty");
    }
    let mut cells = Vec::new();
    for problem in problems {
        let mut row: Vec<StudyCell> = Vec::new();
        for &v in variants {
            let test_rse: Vec<f64> = evolve_seeds(problem, cfg, v, seeds)?.iter().map(|r| r.test_rse).collect();
            let p_vs_base = match row.first() {
                Some(base) if seeds.len() > 1 => Some(rank_sum(&test_rse, &base.test_rse).p),
                _ => None,
            };
            row.push(StudyCell {
                mean: mean(&test_rse),
                std: std_dev(&test_rse),
                p_vs_base,
                test_rse,
            });
        }
        cells.push(row);
    }
    let blocks: Vec<Vec<f64>> = cells.iter().map(|r| r.iter().map(|c| c.mean).collect()).collect();
    Ok(StudyTable {
        problems: problems.iter().map(ToString::to_string).collect(),
        variants: variants.to_vec(),
        mean_ranks: friedman(&blocks).mean_ranks,
        cells,
    })
}

impl StudyTable {
    pub fn variant_index(&self, v: Variant) -> Option<usize> {
        self.variants.iter().position(|&x| x == v)
    }

    /// Long-format CSV: one row per (problem, variant), then mean ranks.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("problem,variant,mean_test_rse,std_test_rse,p_vs_base,significant\n");
        for (p, row) in self.problems.iter().zip(&self.cells) {
            for (v, c) in self.variants.iter().zip(row) {
                let (pv, sig) = match c.p_vs_base {
                    Some(x) => (x.to_string(), (x < 0.05).to_string()),
                    None => (String::new(), String::new()),
                };
                s.push_str(&format!("{p},{v},{},{},{pv},{sig}\n", c.mean, c.std));
            }
        }
        for (v, r) in self.variants.iter().zip(&self.mean_ranks) {
            s.push_str(&format!("mean_rank,{v},{r},,,\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n4() -> Problem {
        Problem::Benchmark(Benchmark::Nguyen4)
    }

    #[test]
    fn problem_parsing() {
        assert_eq!("nguyen4".parse::<Problem>().unwrap(), n4());
        assert!(matches!("data.csv".parse::<Problem>().unwrap(), Problem::Csv { .. }));
        assert!("nothing".parse::<Problem>().is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_fitness(&n4(), &[5, 10], 20, &[3, 1]).unwrap();
        let b = sample_fitness(&n4(), &[5, 10], 20, &[1, 3]).unwrap();
        assert_eq!(sample_csv(&a), sample_csv(&b));
        let one = sample_fitness(&n4(), &[7], 1, &[0]).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].std, 0.0);
    }

    #[test]
    fn zero_generation_runs() {
        let cfg = EvolutionConfig { generations: 0, pop_size: 10, ..Default::default() };
        let runs = evolve_seeds(&n4(), &cfg, Variant::Default, &[2, 0, 1]).unwrap();
        assert_eq!(runs.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(runs.iter().all(|r| r.trace.len() == 1));
    }

    #[test]
    fn single_cell_study() {
        let cfg = EvolutionConfig { generations: 2, pop_size: 10, ..Default::default() };
        let t = instrset_study(&[n4()], &[Variant::Default], &cfg, &[0]).unwrap();
        assert_eq!(t.cells.len(), 1);
        assert_eq!(t.cells[0].len(), 1);
        assert_eq!(t.cells[0][0].p_vs_base, None);
        assert_eq!(t.mean_ranks, vec![1.0]);
    }

    #[test]
    fn step_sweep_rows() {
        let cfg = EvolutionConfig { generations: 1, pop_size: 10, ..Default::default() };
        let rows = step_size_sweep(&n4(), &cfg, &[1, 3, 5, 7, 9, 12, 15], &[0]).unwrap();
        assert_eq!(rows.iter().map(|r| r.u).collect::<Vec<_>>(), vec![1, 3, 5, 7, 9, 12, 15]);
        assert_eq!(step_csv(&rows).lines().count(), 1 + 7 * 2);
    }
}
