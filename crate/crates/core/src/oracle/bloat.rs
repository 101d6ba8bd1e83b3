//! Exact bloating factors by exhaustive insertion.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::ENUMERATION_LIMIT;
use crate::bounds::binomial;
use crate::error::{input, Error, Result};
use crate::iset::InstructionSet;
use crate::program::{detect_introns, Instruction};

#[derive(Debug, Clone, PartialEq)]
pub struct BloatingFactors {
    /// Mean number of distinct size-`m2` programs obtained by inserting
    /// introns only.
    pub omega: BigRational,
    /// As `omega` but inserting exons only.
    pub lambda: BigRational,
    pub programs: u128,
}

/// Average over every size-`m1` program of the number of distinct size-`m2`
/// programs reachable by inserting `m2 − m1` instructions that all end up
/// introns (`omega`) or all end up exons (`lambda`).
pub fn exact_bloating_factors(iset: &InstructionSet, m1: usize, m2: usize) -> Result<BloatingFactors> {
    if m2 < m1 {
        return input(format!("need m2 ≥ m1, got m1={m1}, m2={m2}"));
    }
    let n = iset.len() as u128;
    let k = m2 - m1;
    let programs = n.pow(m1 as u32);
    let per_program = u128::try_from(binomial(m2 as u64, k as u64)).unwrap_or(u128::MAX) * n.pow(k as u32);
    let work = programs.saturating_mul(per_program);
    if work > ENUMERATION_LIMIT {
        return Err(Error::Guard {
            programs: work,
            limit: ENUMERATION_LIMIT,
        });
    }

    let config = iset.config();
    let members = iset.members();
    let positions = combinations(m2, k);
    let mut omega_total: u128 = 0;
    let mut lambda_total: u128 = 0;
    let mut base = vec![0usize; m1];
    let mut child = vec![members[0]; m2];
    let mut inserted = vec![0usize; k];
    loop {
        let mut omega_set: HashSet<Vec<Instruction>> = HashSet::new();
        let mut lambda_set: HashSet<Vec<Instruction>> = HashSet::new();
        for slots in &positions {
            inserted.iter_mut().for_each(|x| *x = 0);
            loop {
                let (mut bi, mut si) = (0, 0);
                for (pos, c) in child.iter_mut().enumerate() {
                    if si < k && slots[si] == pos {
                        *c = members[inserted[si]];
                        si += 1;
                    } else {
                        *c = members[base[bi]];
                        bi += 1;
                    }
                }
                let introns = detect_introns(&child, config);
                if slots.iter().all(|&p| introns[p]) {
                    omega_set.insert(child.clone());
                }
                if slots.iter().all(|&p| !introns[p]) {
                    lambda_set.insert(child.clone());
                }
                if !increment(&mut inserted, members.len()) {
                    break;
                }
            }
        }
        omega_total += omega_set.len() as u128;
        lambda_total += lambda_set.len() as u128;
        if !increment(&mut base, members.len()) {
            break;
        }
    }
    let mean = |total: u128| BigRational::new(BigInt::from(total), BigInt::from(programs));
    Ok(BloatingFactors {
        omega: mean(omega_total),
        lambda: mean(lambda_total),
        programs,
    })
}

/// Odometer increment; false once every digit has wrapped.
fn increment(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// All increasing `k`-subsets of `0..n`.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{Func, Operand, RegisterConfig};
    use num_traits::{One, Zero};

    fn reg(r: u16) -> Operand {
        Operand::Reg(r)
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn same_size_is_one() {
        let c = RegisterConfig::new(2, vec![0], 1).unwrap();
        let iset = InstructionSet::build_default(&c, &[Func::Add]).unwrap();
        let f = exact_bloating_factors(&iset, 1, 1).unwrap();
        // Padding with nothing leaves the program itself in both sets.
        assert!(f.omega.is_one() && f.lambda.is_one());
    }

    #[test]
    fn hand_counted_two_register_set() {
        // R1 writes are always introns when only R0 is an output.
        let c = RegisterConfig::new(2, vec![0], 1).unwrap();
        let members = vec![
            Instruction::new(0, Func::Add, reg(0), reg(1)),
            Instruction::new(0, Func::Mul, reg(0), reg(0)),
            Instruction::new(1, Func::Add, reg(0), reg(0)),
            Instruction::new(1, Func::Mul, reg(1), reg(1)),
        ];
        let iset = InstructionSet::from_members(&c, members).unwrap();
        let f = exact_bloating_factors(&iset, 0, 1).unwrap();
        // From the empty program: R1 writes are introns, R0 writes exons.
        assert_eq!(f.omega, BigRational::from_integer(2.into()));
        assert_eq!(f.lambda, BigRational::from_integer(2.into()));
        assert_eq!(f.programs, 1);
    }

    #[test]
    fn single_output_register_has_no_introns() {
        // Every member reads the only register, so nothing is ever dead.
        let c = RegisterConfig::new(1, vec![0], 1).unwrap();
        let members = vec![
            Instruction::new(0, Func::Add, reg(0), reg(0)),
            Instruction::new(0, Func::Mul, reg(0), reg(0)),
        ];
        let iset = InstructionSet::from_members(&c, members).unwrap();
        let f = exact_bloating_factors(&iset, 1, 2).unwrap();
        assert!(f.omega.is_zero());
        assert!(f.lambda > BigRational::zero());
    }

    #[test]
    fn guard_and_order() {
        let c = RegisterConfig::new(2, vec![0], 1).unwrap();
        let iset = InstructionSet::standard(&c);
        assert!(matches!(exact_bloating_factors(&iset, 3, 5), Err(Error::Guard { .. })));
        assert!(exact_bloating_factors(&iset, 2, 1).is_err());
    }
}
