//! Register-machine programs: instructions, execution over semantics vectors,
//! and structural intron detection.
//!
//! A program is a sequence of instructions `R<d> = f(a, b)` run in order over
//! a register file that is initialised from the input features. Semantics are
//! stored case-major: each fitness case contributes one block of `γ` register
//! values followed by its `B` feature values.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use crate::error::{input, Error, Result};

/// Results of every primitive are clamped into `[-CLAMP, CLAMP]`.
pub const CLAMP: f64 = 1e12;
/// Magnitude below which a divisor or logarithm argument is treated as zero.
pub const PROTECT_EPS: f64 = 1e-9;
/// Upper limit on the register count (effective sets are `u64` bitmasks).
pub const MAX_REGISTERS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Add,
    Sub,
    Mul,
    Div,
    Sin,
    Cos,
    Sqrt,
    Ln,
    Exp,
    /// Copies its first operand. Used as the padding no-op `R_i = id(R_i)`.
    Id,
}

/// The primitive set used throughout the experiments.
pub const DEFAULT_FUNCS: [Func; 8] = [
    Func::Add,
    Func::Sub,
    Func::Mul,
    Func::Div,
    Func::Sin,
    Func::Cos,
    Func::Sqrt,
    Func::Ln,
];

impl Func {
    pub fn arity(self) -> usize {
        match self {
            Func::Add | Func::Sub | Func::Mul | Func::Div => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Add => "add",
            Func::Sub => "sub",
            Func::Mul => "mul",
            Func::Div => "div",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Ln => "ln",
            Func::Exp => "exp",
            Func::Id => "id",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "add" | "+" => Func::Add,
            "sub" | "-" => Func::Sub,
            "mul" | "*" => Func::Mul,
            "div" | "/" => Func::Div,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "ln" => Func::Ln,
            "exp" => Func::Exp,
            "id" => Func::Id,
            _ => return None,
        })
    }

    /// Protected evaluation, before output wrapping and clamping.
    #[inline]
    pub fn raw(self, a: f64, b: f64) -> f64 {
        match self {
            Func::Add => a + b,
            Func::Sub => a - b,
            Func::Mul => a * b,
            Func::Div => {
                if b.abs() < PROTECT_EPS {
                    a
                } else {
                    a / b
                }
            }
            Func::Sin => a.sin(),
            Func::Cos => a.cos(),
            Func::Sqrt => a.abs().sqrt(),
            Func::Ln => {
                if a.abs() < PROTECT_EPS {
                    0.0
                } else {
                    a.abs().ln()
                }
            }
            Func::Exp => a.exp(),
            Func::Id => a,
        }
    }
}

#[inline]
pub fn clamp_value(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-CLAMP, CLAMP)
    }
}

/// A source operand: either a register or an input feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operand {
    Reg(u16),
    Feat(u16),
}

impl Operand {
    #[inline]
    fn slot(self, gamma: usize) -> usize {
        match self {
            Operand::Reg(r) => r as usize,
            Operand::Feat(f) => gamma + f as usize,
        }
    }

    pub fn register(self) -> Option<usize> {
        match self {
            Operand::Reg(r) => Some(r as usize),
            Operand::Feat(_) => None,
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Reg(r) => write!(f, "R{r}"),
            Operand::Feat(x) => write!(f, "x{x}"),
        }
    }
}

impl FromStr for Operand {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let (kind, idx) = s.split_at(s.len().min(1));
        let idx: u16 = idx.parse().map_err(|_| format!("bad operand `{s}`"))?;
        match kind {
            "R" | "r" => Ok(Operand::Reg(idx)),
            "x" | "X" => Ok(Operand::Feat(idx)),
            _ => Err(format!("bad operand `{s}`")),
        }
    }
}

/// Transform applied to an instruction's result before clamping. Manipulated
/// instruction sets use it to add scaled or shifted copies of instructions.
#[derive(Debug, Clone, Copy)]
pub enum Wrap {
    None,
    Scale(f64),
    Offset(f64),
}

impl Wrap {
    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Wrap::None => v,
            Wrap::Scale(c) => c * v,
            Wrap::Offset(c) => v + c,
        }
    }

    fn key(self) -> (u8, u64) {
        match self {
            Wrap::None => (0, 0),
            Wrap::Scale(c) => (1, c.to_bits()),
            Wrap::Offset(c) => (2, c.to_bits()),
        }
    }
}

impl PartialEq for Wrap {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Wrap {}

impl Hash for Wrap {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

/// One register-machine statement `R<dest> = wrap(func(src1, src2))`.
///
/// Unary functions keep `src2` in the tuple so that every stored tuple is a
/// distinct member of the instruction set, but never read it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub dest: u16,
    pub func: Func,
    pub src1: Operand,
    pub src2: Operand,
    pub wrap: Wrap,
}

impl Instruction {
    pub fn new(dest: usize, func: Func, src1: Operand, src2: Operand) -> Self {
        Instruction {
            dest: dest as u16,
            func,
            src1,
            src2,
            wrap: Wrap::None,
        }
    }

    pub fn with_wrap(mut self, wrap: Wrap) -> Self {
        self.wrap = wrap;
        self
    }

    /// The no-op `R_r = id(R_r)`.
    pub fn noop(register: usize) -> Self {
        let r = Operand::Reg(register as u16);
        Instruction::new(register, Func::Id, r, r)
    }

    /// Registers whose values this instruction actually reads.
    pub fn reads(&self) -> impl Iterator<Item = usize> {
        let second = if self.func.arity() == 2 {
            self.src2.register()
        } else {
            None
        };
        self.src1.register().into_iter().chain(second)
    }

    pub fn validate(&self, config: &RegisterConfig) -> Result<()> {
        if self.dest as usize >= config.gamma {
            return input(format!("destination R{} out of range", self.dest));
        }
        for op in [self.src1, self.src2] {
            let ok = match op {
                Operand::Reg(r) => (r as usize) < config.gamma,
                Operand::Feat(x) => (x as usize) < config.num_features,
            };
            if !ok {
                return input(format!("operand {op} out of range in `{self}`"));
            }
        }
        Ok(())
    }

    /// Evaluate on one case block (`γ` registers then `B` features).
    #[inline]
    pub fn eval(&self, block: &[f64], gamma: usize) -> f64 {
        let a = block[self.src1.slot(gamma)];
        let b = block[self.src2.slot(gamma)];
        clamp_value(self.wrap.apply(self.func.raw(a, b)))
    }

    /// Apply to every case of `s` in place, i.e. `σ(s)`.
    pub fn apply(&self, s: &mut Semantics) {
        let width = s.width();
        let gamma = s.gamma;
        for block in s.values.chunks_exact_mut(width) {
            block[self.dest as usize] = self.eval(block, gamma);
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{} = ", self.dest)?;
        if let Wrap::Scale(c) = self.wrap {
            write!(f, "{c}*")?;
        }
        write!(f, "{}({}, {})", self.func.name(), self.src1, self.src2)?;
        if let Wrap::Offset(c) = self.wrap {
            if c.is_sign_negative() {
                write!(f, "{c}")?;
            } else {
                write!(f, "+{c}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Instruction {
    type Err = String;

    fn from_str(line: &str) -> std::result::Result<Self, String> {
        let (lhs, rhs) = line
            .split_once('=')
            .ok_or_else(|| format!("missing `=` in `{line}`"))?;
        let dest = match lhs.trim().parse::<Operand>()? {
            Operand::Reg(r) => r as usize,
            Operand::Feat(_) => return Err("destination must be a register".into()),
        };
        let rhs = rhs.trim();
        let open = rhs.find('(').ok_or("missing `(`")?;
        let close = rhs.rfind(')').ok_or("missing `)`")?;
        if close < open {
            return Err(format!("malformed call in `{line}`"));
        }
        let head = &rhs[..open];
        let tail = rhs[close + 1..].trim();
        let (scale, fname) = match head.split_once('*') {
            Some((c, name)) => (
                Some(c.trim().parse::<f64>().map_err(|e| e.to_string())?),
                name.trim(),
            ),
            None => (None, head.trim()),
        };
        let func = Func::from_name(fname).ok_or_else(|| format!("unknown function `{fname}`"))?;
        let (a, b) = rhs[open + 1..close]
            .split_once(',')
            .ok_or("expected two operands")?;
        let mut ins = Instruction::new(dest, func, a.parse()?, b.parse()?);
        if let Some(c) = scale {
            ins.wrap = Wrap::Scale(c);
        }
        if !tail.is_empty() {
            if scale.is_some() {
                return Err("scale and offset cannot be combined".into());
            }
            let c: f64 = tail.parse().map_err(|_| format!("bad offset `{tail}`"))?;
            ins.wrap = Wrap::Offset(c);
        }
        Ok(ins)
    }
}

/// Register layout shared by programs and semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterConfig {
    pub gamma: usize,
    pub outputs: Vec<usize>,
    pub num_features: usize,
}

impl RegisterConfig {
    pub fn new(gamma: usize, outputs: Vec<usize>, num_features: usize) -> Result<Self> {
        if gamma == 0 || gamma > MAX_REGISTERS {
            return input(format!("register count {gamma} outside 1..={MAX_REGISTERS}"));
        }
        if num_features == 0 {
            return input("at least one input feature is required");
        }
        if outputs.is_empty() || outputs.len() > gamma {
            return input("need between 1 and γ output registers");
        }
        let mut seen = 0u64;
        for &o in &outputs {
            if o >= gamma || seen & (1 << o) != 0 {
                return input(format!("output register R{o} invalid or repeated"));
            }
            seen |= 1 << o;
        }
        Ok(RegisterConfig {
            gamma,
            outputs,
            num_features,
        })
    }

    /// Eight registers with `R0` as the single output.
    pub fn with_features(num_features: usize) -> Self {
        RegisterConfig::new(8, vec![0], num_features).expect("default layout is valid")
    }

    pub fn gamma_out(&self) -> usize {
        self.outputs.len()
    }

    pub fn output_mask(&self) -> u64 {
        self.outputs.iter().fold(0, |m, &o| m | (1 << o))
    }
}

/// Values of every register and feature for every fitness case.
#[derive(Debug, Clone, PartialEq)]
pub struct Semantics {
    pub values: Vec<f64>,
    pub num_cases: usize,
    pub gamma: usize,
    pub num_features: usize,
}

impl Semantics {
    pub fn width(&self) -> usize {
        self.gamma + self.num_features
    }

    pub fn case(&self, c: usize) -> &[f64] {
        let w = self.width();
        &self.values[c * w..(c + 1) * w]
    }

    pub fn register(&self, case: usize, r: usize) -> f64 {
        self.values[case * self.width() + r]
    }

    /// Values of register `r` across all cases.
    pub fn register_column(&self, r: usize) -> Vec<f64> {
        (0..self.num_cases).map(|c| self.register(c, r)).collect()
    }

    pub fn distance(&self, other: &Semantics) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Build the input semantics: register `i` of each case holds feature `i mod B`.
pub fn init_registers<F: AsRef<[f64]>>(config: &RegisterConfig, cases: &[F]) -> Result<Semantics> {
    let b = config.num_features;
    let mut values = Vec::with_capacity(cases.len() * (config.gamma + b));
    for (c, case) in cases.iter().enumerate() {
        let case = case.as_ref();
        if case.len() != b {
            return input(format!(
                "case {c} has {} features, expected {b}",
                case.len()
            ));
        }
        values.extend((0..config.gamma).map(|i| case[i % b]));
        values.extend_from_slice(case);
    }
    Ok(Semantics {
        values,
        num_cases: cases.len(),
        gamma: config.gamma,
        num_features: b,
    })
}

/// An ordered instruction sequence with a maximum length.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    instructions: Vec<Instruction>,
    max_len: usize,
}

impl Program {
    pub fn new(instructions: Vec<Instruction>, max_len: usize) -> Result<Self> {
        if instructions.len() > max_len {
            return input(format!(
                "program of length {} exceeds maximum {max_len}",
                instructions.len()
            ));
        }
        Ok(Program {
            instructions,
            max_len,
        })
    }

    pub fn empty(max_len: usize) -> Self {
        Program {
            instructions: Vec::new(),
            max_len,
        }
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub(crate) fn instructions_mut(&mut self) -> &mut Vec<Instruction> {
        &mut self.instructions
    }

    pub fn validate(&self, config: &RegisterConfig) -> Result<()> {
        self.instructions.iter().try_for_each(|i| i.validate(config))
    }

    /// `true` marks an intron.
    pub fn introns(&self, config: &RegisterConfig) -> Vec<bool> {
        detect_introns(&self.instructions, config)
    }

    pub fn exon_count(&self, config: &RegisterConfig) -> usize {
        self.introns(config).iter().filter(|&&i| !i).count()
    }

    /// The program with every structural intron removed.
    pub fn without_introns(&self, config: &RegisterConfig) -> Program {
        let mask = self.introns(config);
        let instructions = self
            .instructions
            .iter()
            .zip(mask)
            .filter(|(_, intron)| !intron)
            .map(|(i, _)| *i)
            .collect();
        Program {
            instructions,
            max_len: self.max_len,
        }
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    /// Parse one instruction per line. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str, max_len: usize) -> Result<Self> {
        let mut instructions = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let ins = line.parse().map_err(|msg| Error::Parse { line: n + 1, msg })?;
            instructions.push(ins);
        }
        Program::new(instructions, max_len)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ins in &self.instructions {
            writeln!(f, "{ins}")?;
        }
        Ok(())
    }
}

/// Run every instruction over every case, returning the final semantics.
pub fn execute(program: &Program, input: &Semantics) -> Semantics {
    let mut s = input.clone();
    for ins in program.instructions() {
        ins.apply(&mut s);
    }
    s
}

/// Like [`execute`] but also returns the semantics after each instruction.
/// The first element is the input itself.
pub fn execute_trace(program: &Program, input: &Semantics) -> Vec<Semantics> {
    let mut out = Vec::with_capacity(program.len() + 1);
    out.push(input.clone());
    let mut s = input.clone();
    for ins in program.instructions() {
        ins.apply(&mut s);
        out.push(s.clone());
    }
    out
}

/// Backward pass from the output registers. Mask entry `true` = intron.
pub fn detect_introns(instructions: &[Instruction], config: &RegisterConfig) -> Vec<bool> {
    let mut effective = config.output_mask();
    let mut mask = vec![true; instructions.len()];
    for (k, ins) in instructions.iter().enumerate().rev() {
        let bit = 1u64 << ins.dest;
        if effective & bit != 0 {
            mask[k] = false;
            effective &= !bit;
            for r in ins.reads() {
                effective |= 1 << r;
            }
        }
    }
    mask
}

/// Number of members of a full combinatorial instruction set of size `n`
/// whose destination lies outside `k` effective registers.
pub fn count_possible_introns(effective: usize, config: &RegisterConfig, n: usize) -> f64 {
    let gamma = config.gamma as f64;
    (config.gamma.saturating_sub(effective)) as f64 * n as f64 / gamma
}

/// Column-major evaluator for fitness computation. Only exons are executed
/// and only the first output register is returned, one value per case.
#[derive(Debug, Clone)]
pub struct ColumnExecutor {
    gamma: usize,
    cases: usize,
    /// `γ` register columns then `B` feature columns, each `cases` long.
    init: Vec<f64>,
    work: Vec<f64>,
}

impl ColumnExecutor {
    pub fn new<F: AsRef<[f64]>>(config: &RegisterConfig, features: &[F]) -> Result<Self> {
        let input_sem = init_registers(config, features)?;
        let width = input_sem.width();
        let cases = input_sem.num_cases;
        let mut init = vec![0.0; width * cases];
        for c in 0..cases {
            for (slot, v) in input_sem.case(c).iter().enumerate() {
                init[slot * cases + c] = *v;
            }
        }
        Ok(ColumnExecutor {
            gamma: config.gamma,
            cases,
            work: init.clone(),
            init,
        })
    }

    pub fn num_cases(&self) -> usize {
        self.cases
    }

    /// Predictions of `output` after running `exons` (assumed intron-free).
    pub fn run(&mut self, exons: &[Instruction], output: usize) -> &[f64] {
        let n = self.cases;
        let gamma = self.gamma;
        self.work[..gamma * n].copy_from_slice(&self.init[..gamma * n]);
        for ins in exons {
            let a0 = ins.src1.slot(gamma) * n;
            let b0 = ins.src2.slot(gamma) * n;
            let d0 = ins.dest as usize * n;
            for c in 0..n {
                let a = self.work[a0 + c];
                let b = self.work[b0 + c];
                self.work[d0 + c] = clamp_value(ins.wrap.apply(ins.func.raw(a, b)));
            }
        }
        let o = output * n;
        &self.work[o..o + n]
    }
}
