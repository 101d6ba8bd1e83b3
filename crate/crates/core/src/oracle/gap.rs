//! Fitness-gap certification and the fitness-probability condition over a
//! tiny space.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::TinySpace;
use crate::bounds::{fitness_gap_global, fitness_gap_positional, DeltaConstants};
use crate::program::{Instruction, Semantics};

/// RSE of one output column against `target`, capped so that degenerate
/// outputs still land in a finite bucket.
fn rse_of(output: &[f64], target: &[f64]) -> f64 {
    let mean = target.iter().sum::<f64>() / target.len() as f64;
    let num: f64 = output.iter().zip(target).map(|(o, t)| (o - t) * (o - t)).sum();
    let den: f64 = target.iter().map(|t| (t - mean) * (t - mean)).sum();
    let r = num / den;
    if r.is_finite() {
        r
    } else {
        f64::MAX
    }
}

/// Every program's padded trajectory and its pairing with every optimal
/// program, plus the empirical constants measured over those pairings.
#[derive(Debug, Clone)]
pub struct GapSample {
    /// Padded length.
    pub max_len: usize,
    pub constants: DeltaConstants,
    /// `(positional distance, fitness gap)` for every (program, optimum) pair.
    pub pairs: Vec<(usize, f64)>,
    pub programs: usize,
}

struct Trajectories {
    /// Interned states, flattened.
    states: Vec<Semantics>,
    /// `paths[p][j]` = state id before instruction `j` (`j = L` is the output).
    paths: Vec<Vec<usize>>,
    padded: Vec<Vec<Instruction>>,
}

fn intern(table: &mut HashMap<Vec<u64>, usize>, states: &mut Vec<Semantics>, s: &Semantics) -> usize {
    let key: Vec<u64> = s.values.iter().map(|v| v.to_bits()).collect();
    *table.entry(key).or_insert_with(|| {
        states.push(s.clone());
        states.len() - 1
    })
}

fn trajectories(space: &TinySpace) -> Trajectories {
    let l = space.max_size();
    let nop = Instruction::noop(0);
    let s0 = space.initial_semantics();
    let mut table = HashMap::new();
    let mut states = Vec::new();
    let mut paths = Vec::with_capacity(space.num_programs());
    let mut padded = Vec::with_capacity(space.num_programs());
    for id in 0..space.num_programs() {
        let mut ins: Vec<Instruction> = space.decode(id).iter().map(|&d| space.iset().get(d as usize)).collect();
        ins.resize(l, nop);
        let mut s = s0.clone();
        let mut path = vec![intern(&mut table, &mut states, &s)];
        for i in &ins {
            i.apply(&mut s);
            path.push(intern(&mut table, &mut states, &s));
        }
        paths.push(path);
        padded.push(ins);
    }
    Trajectories { states, paths, padded }
}

/// Measure the four constants as exact suprema over the aligned state pairs
/// that actually occur, then record distance and gap for every pair.
pub fn fitness_gap_sample(space: &TinySpace) -> GapSample {
    let l = space.max_size();
    let t = trajectories(space);
    let out = space.config().outputs[0];
    let target = space.target();
    let optimal_ids: Vec<usize> = space.optimal.iter().map(|d| space.encode(d)).collect();

    // Instruction sets: every member plus the padding no-op; the optimal
    // subset is whatever optimal programs use after padding.
    let mut all_ins: Vec<Instruction> = space.iset().members().to_vec();
    all_ins.push(Instruction::noop(0));
    let mut opt_ins: Vec<usize> = optimal_ids
        .iter()
        .flat_map(|&o| t.padded[o].iter().map(|i| all_ins.iter().position(|x| x == i).expect("member")))
        .collect();
    opt_ins.sort_unstable();
    opt_ins.dedup();

    let fitness: Vec<f64> = t.states.iter().map(|s| rse_of(&s.register_column(out), target)).collect();

    // Aligned state pairs (program state, optimal state) at the same position.
    let mut pairs_set = std::collections::HashSet::new();
    for p in &t.paths {
        for &o in &optimal_ids {
            pairs_set.extend(p.iter().zip(&t.paths[o]).take(l).map(|(&a, &b)| (a, b)));
        }
    }
    let aligned: Vec<(usize, usize)> = pairs_set.into_iter().collect();

    let apply = |s: &Semantics, i: &Instruction| {
        let mut x = s.clone();
        i.apply(&mut x);
        x
    };
    let (i_star, i_sq) = aligned
        .par_iter()
        .map(|&(a, b)| {
            let (sa, sb) = (&t.states[a], &t.states[b]);
            let base = sa.distance(sb);
            let opt_b: Vec<Semantics> = opt_ins.iter().map(|&k| apply(sb, &all_ins[k])).collect();
            let mut star = f64::NEG_INFINITY;
            for (&k, ob) in opt_ins.iter().zip(&opt_b) {
                star = star.max(apply(sa, &all_ins[k]).distance(ob) - base);
            }
            let mut sq = f64::NEG_INFINITY;
            for i in &all_ins {
                let ia = apply(sa, i);
                for ob in &opt_b {
                    sq = sq.max(ia.distance(ob) - base);
                }
            }
            (star, sq)
        })
        .reduce(|| (f64::NEG_INFINITY, f64::NEG_INFINITY), |x, y| (x.0.max(y.0), x.1.max(y.1)));

    let all_states: Vec<usize> = {
        let mut v: Vec<usize> = t.paths.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let opt_states: Vec<usize> = {
        let mut v: Vec<usize> = optimal_ids.iter().flat_map(|&o| t.paths[o].iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let psi = all_states
        .par_iter()
        .map(|&a| opt_states.iter().map(|&b| t.states[a].distance(&t.states[b])).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max);

    let outputs: Vec<usize> = {
        let mut v: Vec<usize> = t.paths.iter().map(|p| p[l]).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let opt_outputs: Vec<usize> = optimal_ids.iter().map(|&o| t.paths[o][l]).collect();
    let f_psi = outputs
        .par_iter()
        .map(|&a| {
            opt_outputs
                .iter()
                .map(|&b| {
                    let d = t.states[a].distance(&t.states[b]);
                    if d > 0.0 {
                        (fitness[a] - fitness[b]).abs() / d
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);

    let constants = DeltaConstants {
        psi,
        f_psi,
        i_star: i_star.max(0.0),
        i_sq: i_sq.max(0.0),
    };

    let pairs = t
        .padded
        .par_iter()
        .zip(&t.paths)
        .flat_map_iter(|(ins, path)| {
            let t = &t;
            let fitness = &fitness;
            optimal_ids.iter().map(move |&o| {
                let delta = ins.iter().zip(&t.padded[o]).filter(|(a, b)| a != b).count();
                (delta, (fitness[path[l]] - fitness[t.paths[o][l]]).abs())
            })
        })
        .collect();

    GapSample {
        max_len: l,
        constants,
        pairs,
        programs: t.paths.len(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub constants: DeltaConstants,
    pub pairs: usize,
    pub positional_violations: usize,
    pub global_violations: usize,
    /// Largest `gap / min(bounds)` seen.
    pub max_ratio: f64,
}

impl GapReport {
    pub fn violations(&self) -> usize {
        self.positional_violations + self.global_violations
    }
}

/// Check both fitness-gap inequalities for every recorded pair under
/// `constants`.
pub fn check_fitness_gap(sample: &GapSample, constants: &DeltaConstants) -> GapReport {
    let global = fitness_gap_global(constants);
    let exceeds = |gap: f64, bound: f64| gap > bound + 1e-9 * bound.max(1.0);
    let mut report = GapReport {
        constants: *constants,
        pairs: sample.pairs.len(),
        positional_violations: 0,
        global_violations: 0,
        max_ratio: 0.0,
    };
    for &(delta, gap) in &sample.pairs {
        let positional = fitness_gap_positional(delta as f64, sample.max_len, constants);
        if exceeds(gap, positional) {
            report.positional_violations += 1;
        }
        if exceeds(gap, global) {
            report.global_violations += 1;
        }
        let bound = positional.min(global);
        if gap > 0.0 {
            report.max_ratio = report.max_ratio.max(if bound > 0.0 { gap / bound } else { f64::INFINITY });
        }
    }
    report
}

/// One `(d, bucket)` cell of the fitness-probability condition.
#[derive(Debug, Clone, PartialEq)]
pub struct BucketRow {
    pub d: usize,
    /// Lower edge of the fitness bucket.
    pub bucket: f64,
    pub pr_d: f64,
    pub pr_next: f64,
    pub hypothesis: bool,
    pub conclusion: bool,
}

/// For each distance `d` and fitness bucket `v` reachable within `d`, compute
/// `Pr_d = |P^{d,v}| / |P^d|` and `Pr_{d+1}`, and whether the hypothesis
/// `|P^{d+1,v} \ P^{d,v}| / |P^{d+1} \ P^d| < 2 Pr_d` and conclusion
/// `|Pr_{d+1} − Pr_d| < Pr_d` hold. Cells with an empty shell are skipped.
/// Returns the rows and whether every bucket was the same (degenerate).
pub fn verify_fitness_probability_condition(space: &TinySpace, dist: &[u8], width: f64) -> (Vec<BucketRow>, bool) {
    let s0 = space.initial_semantics();
    let out = space.config().outputs[0];
    let buckets: Vec<i64> = (0..space.num_programs())
        .into_par_iter()
        .map(|id| {
            let p = space.program(&space.decode(id));
            let sem = crate::program::execute(&p, &s0);
            let r = rse_of(&sem.register_column(out), space.target()).min(1e6);
            (r / width).floor() as i64
        })
        .collect();

    let max_d = dist.iter().copied().max().unwrap_or(0) as usize;
    // cumulative[d][v] = programs with δ* ≤ d in bucket v.
    let mut per_d: Vec<BTreeMap<i64, u64>> = vec![BTreeMap::new(); max_d + 1];
    for (id, &b) in buckets.iter().enumerate() {
        *per_d[dist[id] as usize].entry(b).or_default() += 1;
    }
    let mut cumulative = Vec::with_capacity(max_d + 1);
    let mut acc: BTreeMap<i64, u64> = BTreeMap::new();
    for layer in &per_d {
        for (&b, &c) in layer {
            *acc.entry(b).or_default() += c;
        }
        cumulative.push(acc.clone());
    }
    let totals: Vec<u64> = cumulative.iter().map(|m| m.values().sum()).collect();

    let mut rows = Vec::new();
    for d in 1..max_d {
        let shell = totals[d + 1] - totals[d];
        if shell == 0 {
            continue;
        }
        for (&v, &c_d) in &cumulative[d] {
            let c_next = cumulative[d + 1].get(&v).copied().unwrap_or(0);
            let pr_d = c_d as f64 / totals[d] as f64;
            let pr_next = c_next as f64 / totals[d + 1] as f64;
            let shell_ratio = (c_next - c_d) as f64 / shell as f64;
            rows.push(BucketRow {
                d,
                bucket: v as f64 * width,
                pr_d,
                pr_next,
                hypothesis: shell_ratio < 2.0 * pr_d,
                conclusion: (pr_next - pr_d).abs() < pr_d,
            });
        }
    }
    let distinct: std::collections::HashSet<i64> = buckets.iter().copied().collect();
    (rows, distinct.len() <= 1)
}
