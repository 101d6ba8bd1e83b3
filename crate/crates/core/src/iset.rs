//! The combinatorial instruction set and its manipulated variants.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{input, Error, Result};
use crate::program::{Func, Instruction, Operand, RegisterConfig, Wrap, DEFAULT_FUNCS};

/// Every legal instruction for a register layout and primitive set.
#[derive(Debug, Clone, PartialEq)]
pub struct InstructionSet {
    members: Vec<Instruction>,
    config: RegisterConfig,
    variant: Variant,
}

/// Instruction-set manipulations compared in the step-size study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    Default,
    /// Duplicate every instruction with its output multiplied by the factor.
    Scaled(f64),
    /// Add `exp` over every destination and source.
    Exp,
    /// Duplicate every `add` instruction with the constant added to its output.
    AddOffset(f64),
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Default,
        Variant::Scaled(1.1),
        Variant::Scaled(2.0),
        Variant::Scaled(4.0),
        Variant::Exp,
        Variant::AddOffset(100.0),
        Variant::AddOffset(1000.0),
    ];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Default => f.write_str("default"),
            Variant::Scaled(c) => write!(f, "fx{c}"),
            Variant::Exp => f.write_str("exp"),
            Variant::AddOffset(c) => write!(f, "add+{c}"),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Variant::Default),
            "fx1.1" => Ok(Variant::Scaled(1.1)),
            "fx2" => Ok(Variant::Scaled(2.0)),
            "fx4" => Ok(Variant::Scaled(4.0)),
            "exp" => Ok(Variant::Exp),
            "add+100" => Ok(Variant::AddOffset(100.0)),
            "add+1000" => Ok(Variant::AddOffset(1000.0)),
            other => input(format!(
                "unknown instruction-set variant `{other}` (expected one of default, fx1.1, fx2, fx4, exp, add+100, add+1000)"
            )),
        }
    }
}

/// All source operands in canonical order: registers first, then features.
pub fn operands(config: &RegisterConfig) -> Vec<Operand> {
    (0..config.gamma)
        .map(|r| Operand::Reg(r as u16))
        .chain((0..config.num_features).map(|f| Operand::Feat(f as u16)))
        .collect()
}

impl InstructionSet {
    /// Every `(dest, func, src1, src2)` combination, ordered lexicographically.
    pub fn build_default(config: &RegisterConfig, funcs: &[Func]) -> Result<Self> {
        if funcs.is_empty() {
            return input("function list is empty");
        }
        let ops = operands(config);
        let mut members = Vec::with_capacity(config.gamma * funcs.len() * ops.len() * ops.len());
        for dest in 0..config.gamma {
            for &func in funcs {
                for &a in &ops {
                    for &b in &ops {
                        members.push(Instruction::new(dest, func, a, b));
                    }
                }
            }
        }
        Ok(InstructionSet {
            members,
            config: config.clone(),
            variant: Variant::Default,
        })
    }

    /// The experiment primitive set `{+, −, ×, ÷, sin, cos, √|·|, ln|·|}`.
    pub fn standard(config: &RegisterConfig) -> Self {
        Self::build_default(config, &DEFAULT_FUNCS).expect("nonempty primitive set")
    }

    /// Build from an explicit list; members must be distinct and valid.
    pub fn from_members(config: &RegisterConfig, members: Vec<Instruction>) -> Result<Self> {
        if members.is_empty() {
            return input("instruction set is empty");
        }
        let mut seen = std::collections::HashSet::new();
        for m in &members {
            m.validate(config)?;
            if !seen.insert(*m) {
                return input(format!("duplicate instruction `{m}`"));
            }
        }
        Ok(InstructionSet {
            members,
            config: config.clone(),
            variant: Variant::Default,
        })
    }

    /// Extend this set according to `variant`. The original members keep
    /// their positions, so every variant is a superset of its base.
    pub fn build_variant(&self, variant: Variant) -> InstructionSet {
        let base = &self.members;
        let mut members = base.clone();
        match variant {
            Variant::Default => {}
            Variant::Scaled(c) => {
                members.extend(base.iter().map(|i| i.with_wrap(Wrap::Scale(c))));
            }
            Variant::AddOffset(c) => members.extend(
                base.iter()
                    .filter(|i| i.func == Func::Add)
                    .map(|i| i.with_wrap(Wrap::Offset(c))),
            ),
            Variant::Exp => {
                let r0 = Operand::Reg(0);
                for dest in 0..self.config.gamma {
                    for a in operands(&self.config) {
                        members.push(Instruction::new(dest, Func::Exp, a, r0));
                    }
                }
            }
        }
        InstructionSet {
            members,
            config: self.config.clone(),
            variant,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Instruction] {
        &self.members
    }

    pub fn get(&self, index: usize) -> Instruction {
        self.members[index]
    }

    pub fn config(&self) -> &RegisterConfig {
        &self.config
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Instruction {
        self.members[rng.random_range(0..self.members.len())]
    }

    /// One instruction per line, in member order.
    pub fn to_text(&self) -> String {
        self.members.iter().map(|m| format!("{m}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sizes() {
        let c = RegisterConfig::new(8, vec![0], 2).unwrap();
        assert_eq!(InstructionSet::standard(&c).len(), 6400);

        let c = RegisterConfig::new(1, vec![0], 1).unwrap();
        assert_eq!(InstructionSet::build_default(&c, &[Func::Add]).unwrap().len(), 4);

        let c = RegisterConfig::new(4, vec![0], 1).unwrap();
        assert_eq!(InstructionSet::build_default(&c, &[Func::Add]).unwrap().len(), 100);

        assert!(InstructionSet::build_default(&c, &[]).is_err());
    }

    #[test]
    fn variant_sizes() {
        let c = RegisterConfig::new(8, vec![0], 2).unwrap();
        let base = InstructionSet::standard(&c);
        let n = base.len();
        assert_eq!(base.build_variant(Variant::Scaled(2.0)).len(), 2 * n);
        assert_eq!(base.build_variant(Variant::Default), base);
        assert_eq!(base.build_variant(Variant::AddOffset(100.0)).len(), n + n / 8);
        assert_eq!(base.build_variant(Variant::Exp).len(), n + 8 * 10);
    }

    #[test]
    fn variants_are_supersets_and_distinct() {
        let c = RegisterConfig::new(3, vec![0], 1).unwrap();
        let base = InstructionSet::standard(&c);
        for v in Variant::ALL {
            let set = base.build_variant(v);
            assert_eq!(&set.members()[..base.len()], base.members());
            let unique: std::collections::HashSet<_> = set.members().iter().collect();
            assert_eq!(unique.len(), set.len(), "{v}");
        }
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
        }
        assert!(matches!("fx3".parse::<Variant>(), Err(Error::Input(_))));
    }

    #[test]
    fn ordering_is_deterministic() {
        let c = RegisterConfig::new(2, vec![0], 2).unwrap();
        let a = InstructionSet::standard(&c).build_variant(Variant::Exp);
        let b = InstructionSet::standard(&c).build_variant(Variant::Exp);
        assert_eq!(a.to_text(), b.to_text());
    }
}
