//! Exhaustive enumeration of small program spaces.
//!
//! Every program of size at most `L = m_max + m*` over an instruction set of
//! at most a dozen members is indexed, its distance to the nearest optimal
//! program is found by breadth-first search over single insertions and
//! deletions, and the resulting layer statistics are checked against the
//! closed-form properties in [`crate::bounds`].

mod bloat;
mod gap;

pub use bloat::{exact_bloating_factors, BloatingFactors};
pub use gap::{
    check_fitness_gap, fitness_gap_sample, verify_fitness_probability_condition, BucketRow, GapReport, GapSample,
};

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::delta_star_bounds;
use crate::bounds::SpaceParams;
use crate::error::{input, Error, Result};
use crate::iset::InstructionSet;
use crate::program::{init_registers, Func, Instruction, Operand, Program, RegisterConfig, Semantics};

/// Largest instruction set accepted by the enumerators.
pub const MAX_TINY_N: usize = 12;
/// Largest number of programs a space may contain.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

const UNSEEN: u8 = u8::MAX;

/// Relative tolerance for deciding that two outputs agree.
pub const MATCH_TOL: f64 = 1e-9;

/// Number of programs of size at most `max_size` over `n` instructions.
pub fn space_size(n: usize, max_size: usize) -> u128 {
    (0..=max_size).map(|m| (n as u128).pow(m as u32)).sum()
}

fn guard(n: usize, max_size: usize) -> Result<()> {
    let programs = space_size(n, max_size);
    if programs > ENUMERATION_LIMIT {
        return Err(Error::Guard {
            programs,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// Instruction subset with `per_dest` members for every destination and
/// register-only sources, drawn by seeded shuffle from `funcs × R × R`.
pub fn balanced_instructions(
    config: &RegisterConfig,
    funcs: &[Func],
    per_dest: usize,
    seed: u64,
) -> Result<InstructionSet> {
    let g = config.gamma;
    if per_dest == 0 || per_dest > funcs.len() * g * g {
        return input(format!("cannot pick {per_dest} instructions per destination"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = Vec::with_capacity(per_dest * g);
    for dest in 0..g {
        let mut candidates: Vec<Instruction> = funcs
            .iter()
            .flat_map(|&f| {
                (0..g).flat_map(move |a| {
                    (0..g).map(move |b| Instruction::new(dest, f, Operand::Reg(a as u16), Operand::Reg(b as u16)))
                })
            })
            .collect();
        candidates.shuffle(&mut rng);
        members.extend_from_slice(&candidates[..per_dest]);
    }
    InstructionSet::from_members(config, members)
}

/// `count` probe inputs drawn uniformly from `[-2, 2]^B`.
pub fn probe_cases(num_features: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..num_features).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect()
}

fn outputs_match(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= MATCH_TOL * y.abs().max(1.0))
}

/// Recipe for a reproducible tiny space: a balanced register-only subset of
/// `{+, −, ×, ÷}` and the first program (in index order) of `target_len`
/// exons that no shorter program reproduces and whose output varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TinySpec {
    pub gamma: usize,
    pub gamma_out: usize,
    pub per_dest: usize,
    pub target_len: usize,
    pub m_max: usize,
    pub seed: u64,
}

impl TinySpec {
    pub const fn new(gamma: usize, gamma_out: usize, per_dest: usize, target_len: usize, m_max: usize, seed: u64) -> Self {
        TinySpec {
            gamma,
            gamma_out,
            per_dest,
            target_len,
            m_max,
            seed,
        }
    }

    pub fn build(&self) -> Result<TinySpace> {
        let config = RegisterConfig::new(self.gamma, (0..self.gamma_out).collect(), 1)?;
        let funcs = [Func::Add, Func::Sub, Func::Mul, Func::Div];
        let iset = balanced_instructions(&config, &funcs, self.per_dest, self.seed)?;
        let probe = probe_cases(1, 6, self.seed.wrapping_add(100));
        let n = iset.len();
        guard(n, self.target_len)?;
        for k in 0..n.pow(self.target_len as u32) {
            let mut x = k;
            let ins = (0..self.target_len)
                .map(|_| {
                    let i = iset.get(x % n);
                    x /= n;
                    i
                })
                .collect();
            let target = Program::new(ins, self.target_len)?;
            if target.exon_count(&config) != self.target_len {
                continue;
            }
            let space = match TinySpace::from_target(iset.clone(), &target, probe.clone(), self.m_max) {
                Ok(s) => s,
                Err(Error::Input(_)) => continue,
                Err(e) => return Err(e),
            };
            let t = space.target();
            let mean = t.iter().sum::<f64>() / t.len() as f64;
            if space.m_star() == self.target_len && t.iter().any(|v| (v - mean).abs() > 1e-6) {
                return Ok(space);
            }
        }
        input(format!("no concise target of size {} in {self:?}", self.target_len))
    }
}

impl std::fmt::Display for TinySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "γ={} γ_out={} n={} m*={} m_max={} seed={}",
            self.gamma,
            self.gamma_out,
            self.gamma * self.per_dest,
            self.target_len,
            self.m_max,
            self.seed
        )
    }
}

/// The enumerated family used for the distance-structure checks.
pub const STANDARD_FAMILY: [TinySpec; 10] = [
    TinySpec::new(2, 1, 2, 2, 7, 0),
    TinySpec::new(2, 1, 3, 2, 5, 1),
    TinySpec::new(3, 1, 2, 2, 5, 2),
    TinySpec::new(3, 2, 2, 2, 5, 3),
    TinySpec::new(4, 1, 2, 2, 4, 4),
    TinySpec::new(2, 1, 2, 3, 6, 5),
    TinySpec::new(3, 1, 3, 2, 4, 6),
    TinySpec::new(4, 2, 2, 2, 4, 7),
    TinySpec::new(2, 1, 4, 2, 4, 8),
    TinySpec::new(3, 1, 2, 3, 4, 9),
];

/// A fully enumerable program space together with its optimal programs.
#[derive(Debug, Clone)]
pub struct TinySpace {
    iset: InstructionSet,
    m_max: usize,
    m_star: usize,
    max_size: usize,
    probe: Vec<Vec<f64>>,
    target: Vec<f64>,
    optimal: Vec<Vec<u16>>,
    powers: Vec<usize>,
    offsets: Vec<usize>,
}

impl TinySpace {
    /// Optimal programs are all programs whose first output register agrees
    /// with `target` on every probe case. The smallest such size is `m*`.
    pub fn from_target(iset: InstructionSet, target: &Program, probe: Vec<Vec<f64>>, m_max: usize) -> Result<Self> {
        let config = iset.config().clone();
        target.validate(&config)?;
        let s0 = init_registers(&config, &probe)?;
        let out = config.outputs[0];
        let target_out = crate::program::execute(target, &s0).register_column(out);

        // Find m* with a shallow pass before sizing the full enumeration.
        let mut m_star = None;
        for len in 0..=target.len() {
            guard(iset.len(), len)?;
            let mut found = false;
            enumerate_outputs(&iset, &s0, len, |digits, sem| {
                if digits.len() == len && outputs_match(&sem.register_column(out), &target_out) {
                    found = true;
                }
            });
            if found {
                m_star = Some(len);
                break;
            }
        }
        let m_star = m_star.expect("the target matches itself");
        if m_star == 0 {
            return input("target is computed by the empty program; choose a target with m* ≥ 1");
        }
        let max_size = m_max + m_star;
        guard(iset.len(), max_size)?;
        let mut optimal = Vec::new();
        enumerate_outputs(&iset, &s0, max_size, |digits, sem| {
            if outputs_match(&sem.register_column(out), &target_out) {
                optimal.push(digits.to_vec());
            }
        });
        Self::assemble(iset, m_max, m_star, probe, target_out, optimal)
    }

    /// Use an explicit optimal set. The fitness target is the output of the
    /// first optimal program.
    pub fn with_optimal(iset: InstructionSet, optimal: &[Program], probe: Vec<Vec<f64>>, m_max: usize) -> Result<Self> {
        if optimal.is_empty() {
            return input("optimal set is empty");
        }
        let index: HashMap<Instruction, u16> = iset.members().iter().enumerate().map(|(i, m)| (*m, i as u16)).collect();
        let digits = optimal
            .iter()
            .map(|p| {
                p.instructions()
                    .iter()
                    .map(|i| index.get(i).copied().ok_or_else(|| Error::Input(format!("`{i}` is not in the instruction set"))))
                    .collect::<Result<Vec<u16>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let m_star = digits.iter().map(Vec::len).min().unwrap_or(0);
        if m_star == 0 {
            return input("optimal programs must be nonempty");
        }
        let max_size = m_max + m_star;
        if let Some(p) = digits.iter().find(|d| d.len() > max_size) {
            return input(format!("optimal program of size {} exceeds space limit {max_size}", p.len()));
        }
        guard(iset.len(), max_size)?;
        let config = iset.config().clone();
        let s0 = init_registers(&config, &probe)?;
        let target = crate::program::execute(&optimal[0], &s0).register_column(config.outputs[0]);
        Self::assemble(iset, m_max, m_star, probe, target, digits)
    }

    fn assemble(
        iset: InstructionSet,
        m_max: usize,
        m_star: usize,
        probe: Vec<Vec<f64>>,
        target: Vec<f64>,
        mut optimal: Vec<Vec<u16>>,
    ) -> Result<Self> {
        let n = iset.len();
        if n > MAX_TINY_N {
            return input(format!("instruction set of size {n} exceeds {MAX_TINY_N}"));
        }
        let max_size = m_max + m_star;
        let powers: Vec<usize> = (0..=max_size + 1).map(|k| n.pow(k as u32)).collect();
        let mut offsets = vec![0usize; max_size + 2];
        for l in 1..offsets.len() {
            offsets[l] = offsets[l - 1] + powers[l - 1];
        }
        optimal.sort();
        optimal.dedup();
        Ok(TinySpace {
            iset,
            m_max,
            m_star,
            max_size,
            probe,
            target,
            optimal,
            powers,
            offsets,
        })
    }

    pub fn n(&self) -> usize {
        self.iset.len()
    }

    pub fn m_star(&self) -> usize {
        self.m_star
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// Largest program size in the space.
    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn iset(&self) -> &InstructionSet {
        &self.iset
    }

    pub fn config(&self) -> &RegisterConfig {
        self.iset.config()
    }

    pub fn probe(&self) -> &[Vec<f64>] {
        &self.probe
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn num_programs(&self) -> usize {
        self.offsets[self.max_size + 1]
    }

    pub fn optimal_count(&self) -> usize {
        self.optimal.len()
    }

    pub fn optimal_programs(&self) -> Vec<Program> {
        self.optimal.iter().map(|d| self.program(d)).collect()
    }

    pub fn params(&self) -> SpaceParams {
        let c = self.config();
        SpaceParams::new(c.gamma, c.gamma_out(), self.n() as u64, self.m_star, self.max_size)
            .expect("tiny space parameters are valid")
    }

    pub fn program(&self, digits: &[u16]) -> Program {
        let ins = digits.iter().map(|&d| self.iset.get(d as usize)).collect();
        Program::new(ins, self.max_size).expect("digits fit the space")
    }

    pub fn encode(&self, digits: &[u16]) -> usize {
        let n = self.n();
        self.offsets[digits.len()] + digits.iter().fold(0usize, |acc, &d| acc * n + d as usize)
    }

    pub fn decode(&self, id: usize) -> Vec<u16> {
        let len = self.offsets.partition_point(|&o| o <= id) - 1;
        let mut x = id - self.offsets[len];
        let n = self.n();
        let mut digits = vec![0u16; len];
        for slot in digits.iter_mut().rev() {
            *slot = (x % n) as u16;
            x /= n;
        }
        digits
    }

    /// Ids of all programs of size `m`.
    pub fn layer(&self, m: usize) -> std::ops::Range<usize> {
        self.offsets[m]..self.offsets[m + 1]
    }

    fn neighbours(&self, id: usize, out: &mut Vec<usize>) {
        out.clear();
        let l = self.offsets.partition_point(|&o| o <= id) - 1;
        let x = id - self.offsets[l];
        let n = self.n();
        let pw = &self.powers;
        if l > 0 {
            for p in 0..l {
                let high = x / pw[l - p];
                let low = x % pw[l - 1 - p];
                out.push(self.offsets[l - 1] + high * pw[l - 1 - p] + low);
            }
        }
        if l < self.max_size {
            for p in 0..=l {
                let high = x / pw[l - p];
                let low = x % pw[l - p];
                for c in 0..n {
                    out.push(self.offsets[l + 1] + (high * n + c) * pw[l - p] + low);
                }
            }
        }
    }

    /// Distance of every program to the nearest optimal program, by
    /// multi-source breadth-first search over insertions and deletions.
    pub fn bfs_distances(&self) -> Vec<u8> {
        let mut dist = vec![UNSEEN; self.num_programs()];
        let mut frontier: Vec<usize> = self.optimal.iter().map(|d| self.encode(d)).collect();
        frontier.sort_unstable();
        for &id in &frontier {
            dist[id] = 0;
        }
        let mut level = 0u8;
        let mut buf = Vec::new();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &id in &frontier {
                self.neighbours(id, &mut buf);
                for &nb in &buf {
                    if dist[nb] == UNSEEN {
                        dist[nb] = level + 1;
                        next.push(nb);
                    }
                }
            }
            level += 1;
            frontier = next;
        }
        dist
    }

    /// Distances recomputed by dynamic programming over the subsequence
    /// order, sharing nothing with the search. Since
    /// `δ*(ρ) = min_o |ρ| + |o| − 2·LCS(ρ, o)`, it equals `|ρ|` plus the
    /// minimum over subsequences `s` of `ρ` of `g(s) − 2|s|`, where `g(s)` is
    /// the length of the shortest optimal program containing `s`. `g` is
    /// filled from the longest layer down by single insertions and the inner
    /// minimum from the empty program up by single deletions.
    pub fn subsequence_distances(&self) -> Vec<u8> {
        const NONE: u16 = u16::MAX;
        let n = self.n();
        let mut optimal = vec![false; self.num_programs()];
        for d in &self.optimal {
            optimal[self.encode(d)] = true;
        }

        let mut g = vec![NONE; self.num_programs()];
        for m in (0..=self.max_size).rev() {
            let layer: Vec<u16> = self
                .layer(m)
                .into_par_iter()
                .map(|id| {
                    if optimal[id] {
                        return m as u16;
                    }
                    if m == self.max_size {
                        return NONE;
                    }
                    let digits = self.decode(id);
                    let mut longer = Vec::with_capacity(m + 1);
                    let mut best = NONE;
                    for p in 0..=m {
                        for c in 0..n as u16 {
                            longer.clear();
                            longer.extend_from_slice(&digits[..p]);
                            longer.push(c);
                            longer.extend_from_slice(&digits[p..]);
                            best = best.min(g[self.encode(&longer)]);
                        }
                    }
                    best
                })
                .collect();
            g[self.layer(m)].copy_from_slice(&layer);
        }

        let mut h = vec![i32::MAX; self.num_programs()];
        let mut dist = vec![UNSEEN; self.num_programs()];
        for m in 0..=self.max_size {
            let layer: Vec<i32> = self
                .layer(m)
                .into_par_iter()
                .map(|id| {
                    let mut best = if g[id] == NONE { i32::MAX } else { g[id] as i32 - 2 * m as i32 };
                    let digits = self.decode(id);
                    let mut shorter = Vec::with_capacity(m);
                    for p in 0..m {
                        shorter.clear();
                        shorter.extend_from_slice(&digits[..p]);
                        shorter.extend_from_slice(&digits[p + 1..]);
                        best = best.min(h[self.encode(&shorter)]);
                    }
                    best
                })
                .collect();
            for (id, v) in self.layer(m).zip(layer) {
                h[id] = v;
                if v != i32::MAX {
                    dist[id] = (m as i32 + v) as u8;
                }
            }
        }
        dist
    }

    /// Direct recount for one layer: `min |ρ| + |ρ*| − 2·LCS(ρ, ρ*)` over
    /// the optimal set. Quadratic in the optimal set; for small spaces.
    pub fn lcs_distances(&self, m: usize) -> Vec<u8> {
        // Closest lengths first: once the length difference alone reaches the
        // best distance found, no later optimum can improve on it.
        let mut order: Vec<&Vec<u16>> = self.optimal.iter().collect();
        order.sort_by_key(|o| o.len().abs_diff(m));
        self.layer(m)
            .into_par_iter()
            .map(|id| {
                let digits = self.decode(id);
                let mut best = usize::MAX;
                for o in &order {
                    if m.abs_diff(o.len()) >= best {
                        break;
                    }
                    best = best.min(m + o.len() - 2 * lcs(&digits, o));
                }
                best as u8
            })
            .collect()
    }

    /// Distance table for every layer up to `m_max`.
    pub fn enumerate_delta_star(&self) -> LayerStats {
        let dist = self.bfs_distances();
        self.layer_stats(&dist)
    }

    pub fn layer_stats(&self, dist: &[u8]) -> LayerStats {
        let counts = (0..=self.m_max)
            .map(|m| {
                let mut row = vec![0u64; m + self.m_star + 1];
                for id in self.layer(m) {
                    let d = dist[id] as usize;
                    if d >= row.len() {
                        row.resize(d + 1, 0);
                    }
                    row[d] += 1;
                }
                row
            })
            .collect();
        LayerStats {
            n: self.n() as u64,
            m_star: self.m_star,
            counts,
        }
    }

    /// Programs whose distance falls outside `[max{0, m*−m}, m*+m]`.
    pub fn distance_bound_violations(&self, dist: &[u8]) -> Vec<(usize, u8)> {
        let params = self.params();
        (0..=self.max_size)
            .flat_map(|m| {
                let (lo, hi) = delta_star_bounds(m, &params);
                self.layer(m)
                    .filter(move |&id| (dist[id] as usize) < lo || (dist[id] as usize) > hi)
                    .map(move |id| (id, dist[id]))
            })
            .collect()
    }

    fn initial_semantics(&self) -> Semantics {
        init_registers(self.config(), &self.probe).expect("probe matches layout")
    }
}

/// Depth-first walk over all programs of size `≤ max_len`, sharing prefix
/// execution. The callback sees each program's digits and final semantics.
fn enumerate_outputs(iset: &InstructionSet, s0: &Semantics, max_len: usize, mut f: impl FnMut(&[u16], &Semantics)) {
    fn walk(
        iset: &InstructionSet,
        sem: &Semantics,
        digits: &mut Vec<u16>,
        max_len: usize,
        f: &mut dyn FnMut(&[u16], &Semantics),
    ) {
        f(digits, sem);
        if digits.len() == max_len {
            return;
        }
        for (k, ins) in iset.members().iter().enumerate() {
            let mut next = sem.clone();
            ins.apply(&mut next);
            digits.push(k as u16);
            walk(iset, &next, digits, max_len, f);
            digits.pop();
        }
    }
    walk(iset, s0, &mut Vec::new(), max_len, &mut f);
}

pub fn lcs(a: &[u16], b: &[u16]) -> usize {
    // Tiny-space programs are short enough for rows on the stack.
    const ROW: usize = 64;
    if b.len() >= ROW {
        let mut prev = vec![0usize; b.len() + 1];
        let mut cur = vec![0usize; b.len() + 1];
        return lcs_rows(a, b, &mut prev, &mut cur);
    }
    let (mut prev, mut cur) = ([0usize; ROW], [0usize; ROW]);
    lcs_rows(a, b, &mut prev[..=b.len()], &mut cur[..=b.len()])
}

fn lcs_rows<'a>(a: &[u16], b: &[u16], mut prev: &'a mut [usize], mut cur: &'a mut [usize]) -> usize {
    for &x in a {
        for (j, &y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Exact distance histograms per program size.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStats {
    pub n: u64,
    pub m_star: usize,
    /// `counts[m][d]` programs of size `m` at distance `d`.
    pub counts: Vec<Vec<u64>>,
}

impl LayerStats {
    pub fn max_m(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn layer_size(&self, m: usize) -> u64 {
        self.n.pow(m as u32)
    }

    pub fn count(&self, m: usize, d: usize) -> u64 {
        self.counts.get(m).and_then(|r| r.get(d)).copied().unwrap_or(0)
    }

    pub fn probability(&self, m: usize, d: usize) -> f64 {
        self.count(m, d) as f64 / self.layer_size(m) as f64
    }

    /// Mean distance over all programs of size `m`.
    pub fn expectation(&self, m: usize) -> f64 {
        let total: u64 = self.counts[m].iter().enumerate().map(|(d, &c)| d as u64 * c).sum();
        total as f64 / self.layer_size(m) as f64
    }

    /// Mean of `(d_m − δ*)⁺` over programs of size `m`.
    pub fn reduction_expectation(&self, m: usize, d_m: usize) -> f64 {
        (0..=d_m).map(|d| self.probability(m, d) * (d_m - d) as f64).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,d,count,probability\n");
        for (m, row) in self.counts.iter().enumerate() {
            for (d, &c) in row.iter().enumerate() {
                s.push_str(&format!("{m},{d},{c},{}\n", self.probability(m, d)));
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityRow {
    pub m: usize,
    pub d: usize,
    pub diff: f64,
    pub within: bool,
}

/// `|Pr(δ*=d | m) − Pr(δ*=d | m+1)|` for every enumerated `m` and
/// `d ≤ d_max`.
pub fn verify_similar_delta_probability(stats: &LayerStats, d_max: usize, epsilon: f64) -> Vec<SimilarityRow> {
    let mut rows = Vec::new();
    for m in 0..stats.max_m() {
        for d in 0..=d_max {
            let diff = (stats.probability(m, d) - stats.probability(m + 1, d)).abs();
            rows.push(SimilarityRow {
                m,
                d,
                diff,
                within: diff <= epsilon,
            });
        }
    }
    rows
}

/// Successive differences `E[δ* | m+1] − E[δ* | m]`; all must be positive.
pub fn verify_expectation_growth(stats: &LayerStats) -> Vec<f64> {
    (0..stats.max_m())
        .map(|m| stats.expectation(m + 1) - stats.expectation(m))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BloatRow {
    pub m: usize,
    pub d_m: usize,
    pub shrink: Option<f64>,
    pub same: f64,
    pub grow: f64,
}

impl BloatRow {
    /// Growing by one instruction reduces distance at least as much as
    /// staying at the same size.
    pub fn grow_beats_same(&self) -> bool {
        self.grow >= self.same
    }

    pub fn grow_beats_shrink(&self) -> Option<bool> {
        self.shrink.map(|s| self.grow >= s)
    }
}

/// Expected distance reduction at sizes `m−1`, `m`, `m+1` for every
/// `m < max_m` and `d_m ≤ m*`.
pub fn verify_bloat_expectation(stats: &LayerStats) -> Vec<BloatRow> {
    let mut rows = Vec::new();
    for m in 0..stats.max_m() {
        for d_m in 0..=stats.m_star {
            rows.push(BloatRow {
                m,
                d_m,
                shrink: (m > 0).then(|| stats.reduction_expectation(m - 1, d_m)),
                same: stats.reduction_expectation(m, d_m),
                grow: stats.reduction_expectation(m + 1, d_m),
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(gamma: usize) -> RegisterConfig {
        RegisterConfig::new(gamma, vec![0], 1).unwrap()
    }

    fn small_space(per_dest: usize, m_max: usize, seed: u64) -> TinySpace {
        let iset = balanced_instructions(&cfg(2), &[Func::Add, Func::Mul, Func::Sub], per_dest, seed).unwrap();
        let target = Program::new(vec![iset.get(0)], 10).unwrap();
        TinySpace::from_target(iset, &target, probe_cases(1, 6, 1), m_max).unwrap()
    }

    #[test]
    fn encoding_round_trips() {
        let s = small_space(2, 2, 0);
        for id in 0..s.num_programs() {
            assert_eq!(s.encode(&s.decode(id)), id);
        }
        assert_eq!(s.layer(0), 0..1);
    }

    #[test]
    fn neighbours_match_explicit_edits() {
        let s = small_space(2, 2, 3);
        let mut buf = Vec::new();
        for id in 0..s.num_programs() {
            let d = s.decode(id);
            let mut expect = Vec::new();
            for p in 0..d.len() {
                let mut e = d.clone();
                e.remove(p);
                expect.push(s.encode(&e));
            }
            if d.len() < s.max_size() {
                for p in 0..=d.len() {
                    for c in 0..s.n() as u16 {
                        let mut e = d.clone();
                        e.insert(p, c);
                        expect.push(s.encode(&e));
                    }
                }
            }
            s.neighbours(id, &mut buf);
            assert_eq!(buf, expect);
        }
    }

    #[test]
    fn single_instruction_space() {
        let c = cfg(1);
        let only = Instruction::new(0, Func::Add, Operand::Reg(0), Operand::Reg(0));
        let iset = InstructionSet::from_members(&c, vec![only]).unwrap();
        let p = Program::new(vec![only], 5).unwrap();
        let s = TinySpace::with_optimal(iset, &[p], probe_cases(1, 4, 0), 1).unwrap();
        let stats = s.enumerate_delta_star();
        assert_eq!(stats.count(1, 0), 1);
        assert_eq!(stats.expectation(1), 0.0);
        assert_eq!(stats.expectation(0), 1.0);
    }

    #[test]
    fn bfs_agrees_with_lcs_and_bounds() {
        let s = small_space(1, 3, 7);
        assert_eq!(s.n(), 2);
        let dist = s.bfs_distances();
        assert!(dist.iter().all(|&d| d != UNSEEN));
        assert!(s.distance_bound_violations(&dist).is_empty());
        for m in 0..=s.m_max() {
            assert_eq!(&dist[s.layer(m)], &s.lcs_distances(m)[..], "layer {m}");
        }
        assert_eq!(dist, s.subsequence_distances());
        let stats = s.layer_stats(&dist);
        for m in 0..=s.m_max() {
            assert_eq!(stats.counts[m].iter().sum::<u64>(), stats.layer_size(m));
        }
    }

    #[test]
    fn guard_refuses_large_spaces() {
        let iset = balanced_instructions(&cfg(2), &[Func::Add, Func::Mul, Func::Sub], 6, 0).unwrap();
        let target = Program::new(vec![iset.get(0)], 10).unwrap();
        let err = TinySpace::from_target(iset, &target, probe_cases(1, 4, 0), 8).unwrap_err();
        assert!(matches!(err, Error::Guard { .. }));
    }

    #[test]
    fn three_distance_computations_agree() {
        for spec in [TinySpec::new(2, 1, 2, 2, 2, 0), TinySpec::new(3, 2, 2, 2, 2, 3)] {
            let s = spec.build().unwrap();
            let dist = s.bfs_distances();
            assert_eq!(dist, s.subsequence_distances(), "{spec}");
            for m in 0..=s.max_size() {
                assert_eq!(&dist[s.layer(m)], &s.lcs_distances(m)[..], "{spec} layer {m}");
            }
        }
    }

    #[test]
    fn lcs_basics() {
        assert_eq!(lcs(&[1, 2, 3], &[1, 3]), 2);
        assert_eq!(lcs(&[], &[1]), 0);
        assert_eq!(lcs(&[2, 1], &[1, 2]), 1);
    }

    #[test]
    fn reduction_expectation_zero_distance() {
        let s = small_space(2, 2, 5);
        let stats = s.enumerate_delta_star();
        for m in 0..=2 {
            let r = stats.reduction_expectation(m, 0);
            assert_eq!(r, 0.0);
        }
        let rows = verify_bloat_expectation(&stats);
        assert!(rows.iter().filter(|r| r.d_m == 0).all(|r| r.grow_beats_same()));
    }

    #[test]
    fn similarity_beyond_support_is_zero() {
        let s = small_space(1, 2, 2);
        let stats = s.enumerate_delta_star();
        let far = stats.m_star + stats.max_m() + 3;
        let rows = verify_similar_delta_probability(&stats, far, 0.1);
        assert!(rows.iter().filter(|r| r.d == far).all(|r| r.diff == 0.0 && r.within));
    }
}
