//! Symbolic-regression datasets and relative-square-error fitness.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input, Error, Result};
use crate::program::{execute, init_registers, ColumnExecutor, Instruction, Program, RegisterConfig};

/// Fitness cases with one target per case.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, features: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if features.len() != targets.len() {
            return input(format!("{name}: {} feature rows but {} targets", features.len(), targets.len()));
        }
        if targets.len() < 2 {
            return input(format!("{name}: need at least 2 fitness cases"));
        }
        let width = features[0].len();
        if width == 0 || features.iter().any(|r| r.len() != width) {
            return input(format!("{name}: ragged or empty feature rows"));
        }
        if features.iter().flatten().chain(&targets).any(|v| !v.is_finite()) {
            return input(format!("{name}: non-finite value"));
        }
        let ds = Dataset { name, features, targets };
        if ds.target_sum_squares() == 0.0 {
            return input(format!("{}: zero target variance", ds.name));
        }
        Ok(ds)
    }

    pub fn num_cases(&self) -> usize {
        self.targets.len()
    }

    pub fn num_features(&self) -> usize {
        self.features[0].len()
    }

    pub fn target_mean(&self) -> f64 {
        self.targets.iter().sum::<f64>() / self.targets.len() as f64
    }

    fn target_sum_squares(&self) -> f64 {
        let mean = self.target_mean();
        self.targets.iter().map(|y| (y - mean) * (y - mean)).sum()
    }

    /// Header `x0,...,x{B-1},y` followed by one row per case.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 0..self.num_features() {
            out.push_str(&format!("x{j},"));
        }
        out.push_str("y\n");
        for (row, y) in self.features.iter().zip(&self.targets) {
            for v in row {
                out.push_str(&format!("{v},"));
            }
            out.push_str(&format!("{y}\n"));
        }
        out
    }
}

/// Synthetic benchmark functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Benchmark {
    Nguyen4,
    Nguyen5,
    Nguyen7,
    Keijzer11,
    R1,
}

impl Benchmark {
    pub const ALL: [Benchmark; 5] = [
        Benchmark::Nguyen4,
        Benchmark::Nguyen5,
        Benchmark::Nguyen7,
        Benchmark::Keijzer11,
        Benchmark::R1,
    ];

    pub fn num_features(self) -> usize {
        match self {
            Benchmark::Keijzer11 => 2,
            _ => 1,
        }
    }

    pub fn default_points(self) -> usize {
        match self {
            Benchmark::Keijzer11 => 100,
            _ => 20,
        }
    }

    /// Sampling interval, applied to every input.
    pub fn domain(self) -> (f64, f64) {
        match self {
            Benchmark::Nguyen7 => (0.0, 2.0),
            Benchmark::Keijzer11 => (-3.0, 3.0),
            _ => (-1.0, 1.0),
        }
    }

    pub fn target(self, x: &[f64]) -> f64 {
        let a = x[0];
        match self {
            Benchmark::Nguyen4 => (1..=6).map(|k| a.powi(k)).sum(),
            Benchmark::Nguyen5 => (a * a).sin() * a.cos() - 1.0,
            Benchmark::Nguyen7 => (a + 1.0).ln() + (a * a + 1.0).ln(),
            Benchmark::Keijzer11 => {
                let b = x[1];
                a * b + ((a - 1.0) * (b - 1.0)).sin()
            }
            Benchmark::R1 => (a + 1.0).powi(3) / (a * a - a + 1.0),
        }
    }

    /// Sample `n_points` inputs uniformly on `domain` (or the default domain).
    pub fn generate<R: Rng + ?Sized>(
        self,
        n_points: Option<usize>,
        domain: Option<(f64, f64)>,
        rng: &mut R,
    ) -> Result<Dataset> {
        let (lo, hi) = domain.unwrap_or(self.domain());
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return input(format!("empty domain [{lo}, {hi}]"));
        }
        let n = n_points.unwrap_or(self.default_points());
        let features: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..self.num_features()).map(|_| rng.random_range(lo..hi)).collect())
            .collect();
        let targets = features.iter().map(|x| self.target(x)).collect();
        Dataset::new(self.to_string(), features, targets)
    }

    /// Training and test samples drawn from independent streams of one seed.
    pub fn train_test(self, seed: u64) -> Result<(Dataset, Dataset)> {
        let mut train_rng = ChaCha8Rng::seed_from_u64(seed);
        let mut test_rng = ChaCha8Rng::seed_from_u64(seed);
        test_rng.set_stream(1);
        Ok((
            self.generate(None, None, &mut train_rng)?,
            self.generate(None, None, &mut test_rng)?,
        ))
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Benchmark::Nguyen4 => "Nguyen4",
            Benchmark::Nguyen5 => "Nguyen5",
            Benchmark::Nguyen7 => "Nguyen7",
            Benchmark::Keijzer11 => "Keijzer11",
            Benchmark::R1 => "R1",
        })
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.to_string().eq_ignore_ascii_case(s))
            .map_or_else(|| input(format!("unknown problem `{s}`")), Ok)
    }
}

/// Read a headered numeric CSV (last column is the target) and split it
/// into shuffled train and test parts.
pub fn load_csv(path: &Path, split_seed: u64, train_frac: f64) -> Result<(Dataset, Dataset)> {
    if !(0.0..=1.0).contains(&train_frac) {
        return input(format!("train fraction {train_frac} outside [0, 1]"));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = k + 2;
        let row = record
            .iter()
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("non-numeric cell `{cell}`"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() < 2 {
            return Err(Error::Parse { line, msg: "need at least one feature and a target".into() });
        }
        rows.push(row);
    }
    let split = |rows: &[Vec<f64>], suffix: &str| -> Result<Dataset> {
        let features = rows.iter().map(|r| r[..r.len() - 1].to_vec()).collect();
        let targets = rows.iter().map(|r| r[r.len() - 1]).collect();
        Dataset::new(format!("{name}{suffix}"), features, targets)
    };
    // Validates the whole file (shape, variance) before splitting.
    split(&rows, "")?;
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed);
    rows.shuffle(&mut rng);
    let n_train = (rows.len() as f64 * train_frac).round() as usize;
    let (train, test) = rows.split_at(n_train);
    Ok((split(train, "-train")?, split(test, "-test")?))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { line, msg: e.to_string() }
}

/// `Σ(pred − y)² / Σ(y − ȳ)²`, reading predictions from the first output
/// register after full execution.
pub fn rse(program: &Program, dataset: &Dataset, config: &RegisterConfig) -> Result<f64> {
    let s0 = init_registers(config, &dataset.features)?;
    let s = execute(program, &s0);
    let out = config.outputs[0];
    let preds: Vec<f64> = (0..dataset.num_cases()).map(|c| s.register(c, out)).collect();
    Ok(rse_from_predictions(&preds, &dataset.targets, dataset.target_sum_squares()))
}

fn rse_from_predictions(preds: &[f64], targets: &[f64], denom: f64) -> f64 {
    let num: f64 = preds.iter().zip(targets).map(|(p, y)| (p - y) * (p - y)).sum();
    let v = num / denom;
    if v.is_finite() {
        v
    } else {
        f64::MAX
    }
}

/// Reusable RSE evaluator that skips introns. Holds scratch space, so each
/// thread needs its own copy.
#[derive(Debug, Clone)]
pub struct Fitness {
    config: RegisterConfig,
    exec: ColumnExecutor,
    targets: Vec<f64>,
    denom: f64,
    exons: Vec<Instruction>,
}

impl Fitness {
    pub fn new(dataset: &Dataset, config: &RegisterConfig) -> Result<Self> {
        if dataset.num_features() != config.num_features {
            return input(format!(
                "dataset has {} features but register layout expects {}",
                dataset.num_features(),
                config.num_features
            ));
        }
        Ok(Fitness {
            config: config.clone(),
            exec: ColumnExecutor::new(config, &dataset.features)?,
            targets: dataset.targets.clone(),
            denom: dataset.target_sum_squares(),
            exons: Vec::new(),
        })
    }

    pub fn rse(&mut self, program: &Program) -> f64 {
        let mask = program.introns(&self.config);
        self.exons.clear();
        self.exons.extend(
            program
                .instructions()
                .iter()
                .zip(mask)
                .filter(|(_, intron)| !intron)
                .map(|(i, _)| *i),
        );
        let preds = self.exec.run(&self.exons, self.config.outputs[0]);
        rse_from_predictions(preds, &self.targets, self.denom)
    }
}
