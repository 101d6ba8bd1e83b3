//! Subcommand implementations. Each returns the CSV files it produced so the
//! caller decides where they go.

use std::fmt::Write as _;

use anyhow::{Context, Result};
use lgp_core::bounds::{
    delta_star_bounds, grid, grid_csv, lambda_bounds, min_hitting_time, omega_bounds, phi_bounds, rate_bounds,
    BoundReport,
};
use lgp_core::experiments::{
    evolve_seeds, instrset_study, sample_csv, sample_fitness, size_fitness_correlation, step_csv, runs_csv, StepRow,
};
use lgp_core::oracle::{
    check_fitness_gap, exact_bloating_factors, fitness_gap_sample, verify_bloat_expectation,
    verify_expectation_growth, verify_fitness_probability_condition, verify_similar_delta_probability,
};
use serde::Serialize;

use crate::config::{
    config_hash, parse_problem, parse_variant, EvolveConfig, GridConfig, OracleConfig, ParamSettings, SampleConfig,
    StudyConfig,
};

/// A named CSV body, without the provenance line.
pub struct Artifact {
    pub name: String,
    pub body: String,
}

impl Artifact {
    fn new(name: impl Into<String>, body: String) -> Self {
        Artifact { name: name.into(), body }
    }
}

/// Files produced by a command plus the provenance shared by all of them.
pub struct Output {
    pub hash: String,
    pub seeds: Vec<u64>,
    /// The first artifact is the one printed when no output path is given.
    pub artifacts: Vec<Artifact>,
    /// Set when a verification check failed.
    pub failed: bool,
    /// Human-readable lines for stderr.
    pub notes: Vec<String>,
}

impl Output {
    fn new<T: Serialize>(config: &T, seeds: Vec<u64>, artifacts: Vec<Artifact>) -> Result<Self> {
        Ok(Output {
            hash: config_hash(config)?,
            seeds,
            artifacts,
            failed: false,
            notes: Vec::new(),
        })
    }

    pub fn render(&self, artifact: &Artifact) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        format!("# config_hash={} seeds=[{}]\n{}", self.hash, seeds.join(","), artifact.body)
    }
}

pub fn evolve(cfg: &EvolveConfig) -> Result<Output> {
    let problem = parse_problem(&cfg.problem)?;
    let variant = parse_variant(&cfg.variant)?;
    let seeds = cfg.seeds.resolve()?;
    let mut rows = Vec::new();
    for u in cfg.u.to_vec() {
        let runs = evolve_seeds(&problem, &cfg.evolution.to_config(u), variant, &seeds)?;
        rows.push(StepRow { u, runs });
    }
    let mut artifacts = vec![Artifact::new("aggregate.csv", step_csv(&rows))];
    for row in &rows {
        artifacts.push(Artifact::new(format!("runs_u{}.csv", row.u), runs_csv(&row.runs)));
        for run in &row.runs {
            artifacts.push(Artifact::new(
                format!("trace_u{}_seed{}.csv", row.u, run.seed),
                run.trace.to_csv(),
            ));
        }
    }
    Output::new(cfg, seeds, artifacts)
}

pub fn sample(cfg: &SampleConfig) -> Result<Output> {
    let problem = parse_problem(&cfg.problem)?;
    let seeds = cfg.seeds.resolve()?;
    let rows = sample_fitness(&problem, &cfg.sizes, cfg.per_seed, &seeds)?;
    let mut out = Output::new(cfg, seeds, vec![Artifact::new("sample.csv", sample_csv(&rows))])?;
    if let Some(rho) = size_fitness_correlation(&rows) {
        out.notes.push(format!("spearman(size, mean rse) = {rho:.4}"));
    }
    Ok(out)
}

pub fn grid_cmd(cfg: &GridConfig) -> Result<Output> {
    if cfg.u.is_empty() || cfg.d.is_empty() || cfg.m.is_empty() {
        anyhow::bail!("grid ranges must be nonempty");
    }
    let params = cfg.params.to_params()?;
    let points = grid(&params, &cfg.u, &cfg.d, &cfg.m, cfg.epsilon);
    Output::new(cfg, Vec::new(), vec![Artifact::new("grid.csv", grid_csv(&points))])
}

pub fn study(cfg: &StudyConfig) -> Result<Output> {
    let problems = cfg.problems.iter().map(|p| parse_problem(p)).collect::<Result<Vec<_>>>()?;
    let variants = cfg.variants.iter().map(|v| parse_variant(v)).collect::<Result<Vec<_>>>()?;
    let seeds = cfg.seeds.resolve()?;
    let table = instrset_study(&problems, &variants, &cfg.evolution.to_config(cfg.u), &seeds)?;
    Output::new(cfg, seeds, vec![Artifact::new("study.csv", table.to_csv())])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Info,
}

struct Report {
    rows: Vec<(String, Status, String)>,
}

impl Report {
    fn gate(&mut self, name: &str, ok: bool, detail: String) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.rows.push((name.into(), status, detail));
    }

    fn info(&mut self, name: &str, detail: String) {
        self.rows.push((name.into(), Status::Info, detail));
    }

    fn failed(&self) -> bool {
        self.rows.iter().any(|r| r.1 == Status::Fail)
    }

    fn to_csv(&self) -> String {
        let mut s = String::from("check,status,detail\n");
        for (name, status, detail) in &self.rows {
            let status = match status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Info => "info",
            };
            let _ = writeln!(s, "{name},{status},\"{}\"", detail.replace('"', "'"));
        }
        s
    }
}

/// Enumerate the configured tiny space and run every exact check. Distance
/// bounds, the dual distance computation, layer sizes, the fitness-gap
/// certificate and the fitness-probability implication are gating; the
/// remaining properties are reported for information.
pub fn oracle(cfg: &OracleConfig) -> Result<Output> {
    let spec = cfg.spec();
    let space = spec.build().with_context(|| format!("building tiny space {spec}"))?;
    let mut report = Report { rows: Vec::new() };
    report.info(
        "space",
        format!(
            "n={} m*={} L={} programs={} optimal={}",
            space.n(),
            space.m_star(),
            space.max_size(),
            space.num_programs(),
            space.optimal_count()
        ),
    );

    let dist = space.bfs_distances();
    let violations = space.distance_bound_violations(&dist);
    report.gate("distance_bounds", violations.is_empty(), format!("{} violations", violations.len()));

    let dp = space.subsequence_distances();
    let disagreements = dist.iter().zip(&dp).filter(|(a, b)| a != b).count();
    report.gate("bfs_equals_dp", disagreements == 0, format!("{disagreements} disagreements"));

    let stats = space.layer_stats(&dist);
    let n = space.n() as u64;
    let bad_layers: Vec<usize> = (0..=stats.max_m())
        .filter(|&m| stats.layer_size(m) != n.pow(m as u32))
        .collect();
    report.gate("layer_sizes", bad_layers.is_empty(), format!("mismatched layers {bad_layers:?}"));

    let sample = fitness_gap_sample(&space);
    let constants = if cfg.negative_control {
        sample.constants.scaled_f(0.5)
    } else {
        sample.constants
    };
    let gap = check_fitness_gap(&sample, &constants);
    report.gate(
        "fitness_gap",
        gap.violations() == 0,
        format!(
            "{} pairs; {} positional and {} global violations; max ratio {:.6}; f_psi={} psi={} i_star={} i_sq={}",
            gap.pairs,
            gap.positional_violations,
            gap.global_violations,
            gap.max_ratio,
            constants.f_psi,
            constants.psi,
            constants.i_star,
            constants.i_sq
        ),
    );

    let (rows, degenerate) = verify_fitness_probability_condition(&space, &dist, cfg.bucket_width);
    let held = rows.iter().filter(|r| r.hypothesis).count();
    let broken = rows.iter().filter(|r| r.hypothesis && !r.conclusion).count();
    report.gate(
        "fitness_probability",
        broken == 0,
        format!("{} cells; hypothesis holds on {held}; conclusion fails on {broken}; degenerate={degenerate}", rows.len()),
    );

    let similar = verify_similar_delta_probability(&stats, space.m_star(), cfg.similarity_epsilon);
    let within = similar.iter().filter(|r| r.within).count();
    let worst = similar.iter().map(|r| r.diff).fold(0.0, f64::max);
    report.info(
        "distance_similarity",
        format!("{within}/{} cells within {}; largest difference {worst:.4}", similar.len(), cfg.similarity_epsilon),
    );

    let growth = verify_expectation_growth(&stats);
    let expectations: Vec<String> = (0..=stats.max_m()).map(|m| format!("{:.4}", stats.expectation(m))).collect();
    report.info(
        "expectation_growth",
        format!(
            "{}/{} increasing steps; E by size [{}]",
            growth.iter().filter(|d| **d > 0.0).count(),
            growth.len(),
            expectations.join(" ")
        ),
    );

    let bloat = verify_bloat_expectation(&stats);
    let wins = bloat.iter().filter(|r| r.grow_beats_same()).count();
    report.info("bloat_expectation", format!("{wins}/{} cells where growing beats staying", bloat.len()));

    let params = space.params();
    match exact_bloating_factors(space.iset(), 1, 2) {
        Ok(f) => {
            let om = omega_bounds(1, 2, &params)?;
            let la = lambda_bounds(1, 2, &params)?;
            report.info(
                "bloating_sandwich",
                format!(
                    "m1=1 m2=2: omega={} in ({:.4}, {:.4}): {}; lambda={} in ({:.4}, {:.4}): {}",
                    f.omega,
                    om.lower(),
                    om.upper(),
                    om.strictly_contains(&f.omega),
                    f.lambda,
                    la.lower(),
                    la.upper(),
                    la.strictly_contains(&f.lambda)
                ),
            );
        }
        Err(e) => report.info("bloating_sandwich", format!("skipped: {e}")),
    }

    let failed = report.failed();
    let mut out = Output::new(
        cfg,
        Vec::new(),
        vec![
            Artifact::new("report.csv", report.to_csv()),
            Artifact::new("layers.csv", stats.to_csv()),
        ],
    )?;
    out.failed = failed;
    for (name, status, _) in &report.rows {
        if *status == Status::Fail {
            out.notes.push(format!("verification failed: {name}"));
        }
    }
    Ok(out)
}

/// A single closed-form bound evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, clap::Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum BoundQuery {
    /// Neutral bloating factor bounds.
    Omega {
        #[arg(long)]
        m1: usize,
        #[arg(long)]
        m2: usize,
    },
    /// Non-neutral bloating factor bounds.
    Lambda {
        #[arg(long)]
        m1: usize,
        #[arg(long)]
        m2: usize,
    },
    /// Constructive moving-rate upper bound.
    Rate {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        u: usize,
    },
    /// Minimum hitting time from distance `d`.
    Hitting {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        u: usize,
        #[arg(long, default_value_t = 1e-4)]
        epsilon: f64,
        /// Use the untruncated rate.
        #[arg(long)]
        untruncated: bool,
    },
    /// Range of the distance to the nearest optimum for size `m`.
    DeltaStar {
        #[arg(long)]
        m: usize,
    },
    /// Size range of optimal programs within `d` moves of size `m`.
    Phi {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d: usize,
    },
}

#[derive(Serialize)]
struct BoundsRequest<'a> {
    params: &'a ParamSettings,
    query: &'a BoundQuery,
}

fn bloating_row(m1: usize, m2: usize, r: &BoundReport) -> String {
    let (lo, hi) = match &r.exact {
        Some((lo, hi)) => (lo.to_string(), hi.to_string()),
        None => (String::new(), String::new()),
    };
    format!(
        "m1,m2,kind,ln_lower,ln_upper,lower,upper,exact_lower,exact_upper\n{m1},{m2},{:?},{},{},{},{},{lo},{hi}\n",
        r.kind,
        r.ln_lower,
        r.ln_upper,
        r.lower(),
        r.upper()
    )
}

pub fn bounds(params: &ParamSettings, query: &BoundQuery) -> Result<Output> {
    let p = params.to_params()?;
    let body = match *query {
        BoundQuery::Omega { m1, m2 } => bloating_row(m1, m2, &omega_bounds(m1, m2, &p)?),
        BoundQuery::Lambda { m1, m2 } => bloating_row(m1, m2, &lambda_bounds(m1, m2, &p)?),
        BoundQuery::Rate { d, m, u } => {
            let r = rate_bounds(d, m, u, &p);
            format!("d,m,u,untruncated,truncated,capped\n{d},{m},{u},{},{},{}\n", r.untruncated, r.truncated, r.capped)
        }
        BoundQuery::Hitting { d, m, u, epsilon, untruncated } => {
            let q = min_hitting_time(d, m, u, &p, epsilon, !untruncated);
            let q = q.map_or("unreached".to_string(), |q| q.to_string());
            format!("d,m,u,epsilon,truncated,hitting_time\n{d},{m},{u},{epsilon},{},{q}\n", !untruncated)
        }
        BoundQuery::DeltaStar { m } => {
            let (lo, hi) = delta_star_bounds(m, &p);
            format!("m,lower,upper\n{m},{lo},{hi}\n")
        }
        BoundQuery::Phi { m, d } => {
            let b = phi_bounds(m, d, &p);
            format!("m,d,inf,sup,feasible\n{m},{d},{},{},{}\n", b.inf, b.sup, b.feasible)
        }
    };
    Output::new(&BoundsRequest { params, query }, Vec::new(), vec![Artifact::new("bounds.csv", body)])
}
