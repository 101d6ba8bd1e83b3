//! Generational evolution with freemut variation, tournament selection and
//! elitism.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input, Result};
use crate::iset::InstructionSet;
use crate::problems::{Dataset, Fitness};
use crate::program::Program;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub pop_size: usize,
    pub generations: usize,
    pub add_rate: f64,
    pub remove_rate: f64,
    pub reproduction_rate: f64,
    pub tournament_size: usize,
    pub elitism: usize,
    /// Inclusive range of initial program lengths.
    pub init_len: (usize, usize),
    pub max_len: usize,
    /// Instructions added or removed per freemut application.
    pub step: usize,
    pub seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            pop_size: 256,
            generations: 200,
            add_rate: 0.45,
            remove_rate: 0.45,
            reproduction_rate: 0.10,
            tournament_size: 7,
            elitism: 3,
            init_len: (5, 20),
            max_len: 100,
            step: 1,
            seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let rates = [self.add_rate, self.remove_rate, self.reproduction_rate];
        if rates.iter().any(|r| !(0.0..=1.0).contains(r)) || (rates.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return input(format!("operator rates {rates:?} must be probabilities summing to 1"));
        }
        if self.pop_size == 0 || self.elitism >= self.pop_size {
            return input("elitism must be smaller than a nonempty population");
        }
        if self.tournament_size == 0 {
            return input("tournament size must be at least 1");
        }
        if self.step == 0 || self.step > self.max_len {
            return input(format!("step size {} outside 1..={}", self.step, self.max_len));
        }
        let (lo, hi) = self.init_len;
        if lo > hi || hi > self.max_len {
            return input(format!("initial length range [{lo}, {hi}] invalid for maximum {}", self.max_len));
        }
        Ok(())
    }
}

/// Population summary for one generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationRecord {
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub mean_size: f64,
    pub mean_exons: f64,
}

/// One record per generation, starting with the initial population.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub records: Vec<GenerationRecord>,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("generation,best_fitness,mean_fitness,mean_size,mean_exons\n");
        for (g, r) in self.records.iter().enumerate() {
            out.push_str(&format!(
                "{g},{},{},{},{}\n",
                r.best_fitness, r.mean_fitness, r.mean_size, r.mean_exons
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best: Program,
    pub best_fitness: f64,
    pub trace: RunTrace,
}

pub fn random_program<R: Rng + ?Sized>(len: usize, max_len: usize, iset: &InstructionSet, rng: &mut R) -> Program {
    let instructions = (0..len).map(|_| iset.sample(rng)).collect();
    Program::new(instructions, max_len).expect("caller keeps len within max_len")
}

pub fn init_population<R: Rng + ?Sized>(cfg: &EvolutionConfig, iset: &InstructionSet, rng: &mut R) -> Vec<Program> {
    let (lo, hi) = cfg.init_len;
    (0..cfg.pop_size)
        .map(|_| {
            let len = rng.random_range(lo..=hi);
            random_program(len, cfg.max_len, iset, rng)
        })
        .collect()
}

/// Insert `u` random instructions at independently drawn positions, or as
/// many as fit under the length limit.
pub fn freemut_add<R: Rng + ?Sized>(parent: &Program, u: usize, iset: &InstructionSet, rng: &mut R) -> Program {
    let mut child = parent.clone();
    let k = u.min(parent.max_len() - parent.len());
    let ins = child.instructions_mut();
    for _ in 0..k {
        let pos = rng.random_range(0..=ins.len());
        ins.insert(pos, iset.sample(rng));
    }
    child
}

/// Remove `u` distinct random instructions. A program no longer than `u`
/// keeps one randomly chosen instruction.
pub fn freemut_remove<R: Rng + ?Sized>(parent: &Program, u: usize, rng: &mut R) -> Program {
    let len = parent.len();
    let k = if len > u { u } else { len.saturating_sub(1) };
    if k == 0 {
        return parent.clone();
    }
    let mut drop = index::sample(rng, len, k).into_vec();
    drop.sort_unstable();
    let mut child = parent.clone();
    let ins = child.instructions_mut();
    for &i in drop.iter().rev() {
        ins.remove(i);
    }
    child
}

fn tournament<R: Rng + ?Sized>(fitness: &[f64], size: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..size {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] < fitness[best] {
            best = c;
        }
    }
    best
}

fn record(pop: &[Program], fitness: &[f64], iset: &InstructionSet) -> GenerationRecord {
    let n = pop.len() as f64;
    let config = iset.config();
    GenerationRecord {
        best_fitness: fitness.iter().copied().fold(f64::INFINITY, f64::min),
        mean_fitness: fitness.iter().sum::<f64>() / n,
        mean_size: pop.iter().map(|p| p.len()).sum::<usize>() as f64 / n,
        mean_exons: pop.iter().map(|p| p.exon_count(config)).sum::<usize>() as f64 / n,
    }
}

/// Minimize RSE on `train`. Deterministic for a fixed `cfg.seed`.
pub fn evolve(cfg: &EvolutionConfig, iset: &InstructionSet, train: &Dataset) -> Result<RunResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut eval = Fitness::new(train, iset.config())?;

    let mut pop = init_population(cfg, iset, &mut rng);
    let mut fit: Vec<f64> = pop.iter().map(|p| eval.rse(p)).collect();
    let mut trace = RunTrace::default();
    trace.records.push(record(&pop, &fit, iset));

    for _ in 0..cfg.generations {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]));
        let mut next: Vec<Program> = order[..cfg.elitism].iter().map(|&i| pop[i].clone()).collect();
        let mut next_fit: Vec<f64> = order[..cfg.elitism].iter().map(|&i| fit[i]).collect();
        while next.len() < cfg.pop_size {
            let parent = &pop[tournament(&fit, cfg.tournament_size, &mut rng)];
            let r: f64 = rng.random();
            let child = if r < cfg.add_rate {
                freemut_add(parent, cfg.step, iset, &mut rng)
            } else if r < cfg.add_rate + cfg.remove_rate {
                freemut_remove(parent, cfg.step, &mut rng)
            } else {
                parent.clone()
            };
            next_fit.push(eval.rse(&child));
            next.push(child);
        }
        pop = next;
        fit = next_fit;
        trace.records.push(record(&pop, &fit, iset));
    }

    let best = (0..pop.len()).min_by(|&a, &b| fit[a].total_cmp(&fit[b])).expect("nonempty population");
    Ok(RunResult {
        best: pop[best].clone(),
        best_fitness: fit[best],
        trace,
    })
}
