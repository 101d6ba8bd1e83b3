//! Closed-form bounds on editing distance, bloating factors, offspring
//! counts, constructive moving rates and minimum hitting times.
//!
//! Magnitudes are carried as natural logarithms because the bloating-factor
//! bounds overflow `f64` long before program sizes of 100. Small queries can
//! additionally be evaluated exactly with big rationals.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use statrs::function::factorial::ln_binomial;

use crate::error::{input, Result};

/// Search-space parameters shared by every bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceParams {
    pub gamma: usize,
    pub gamma_out: usize,
    /// Instruction-set size.
    pub n: u64,
    /// Smallest size of an optimal program.
    pub m_star: usize,
    pub max_len: usize,
    /// Lower end of the intron-register range in the neutral bloating bound.
    /// `0` by default; `1` selects the alternative convention.
    pub omega_floor: usize,
}

impl SpaceParams {
    pub fn new(gamma: usize, gamma_out: usize, n: u64, m_star: usize, max_len: usize) -> Result<Self> {
        if gamma_out == 0 || gamma_out > gamma {
            return input(format!("need 1 ≤ γ_out ≤ γ, got γ_out={gamma_out}, γ={gamma}"));
        }
        if n == 0 || m_star == 0 {
            return input("n and m* must be positive");
        }
        Ok(SpaceParams {
            gamma,
            gamma_out,
            n,
            m_star,
            max_len,
            omega_floor: 0,
        })
    }

    /// Eight registers, one output, one input feature and the standard
    /// eight primitives: `n = 8·8·9² = 5184`, with `m* = 11` and `L = 100`.
    pub fn nguyen4() -> Self {
        SpaceParams::new(8, 1, 8 * 8 * 81, 11, 100).expect("valid constants")
    }

    fn omega(&self, m1: usize) -> usize {
        (self.gamma - self.gamma_out).saturating_sub(m1).max(self.omega_floor)
    }

    fn lambda(&self, m1: usize) -> usize {
        self.gamma.min(self.gamma_out + m1)
    }
}

/// Whether a report is a genuine bound pair or collapses to an exact value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Bound,
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub ln_lower: f64,
    pub ln_upper: f64,
    pub kind: BoundKind,
    /// Exact `(lower, upper)` when the query was small enough to evaluate.
    pub exact: Option<(BigRational, BigRational)>,
}

impl BoundReport {
    pub fn lower(&self) -> f64 {
        self.ln_lower.exp()
    }

    pub fn upper(&self) -> f64 {
        self.ln_upper.exp()
    }

    fn exact_one() -> Self {
        BoundReport {
            ln_lower: 0.0,
            ln_upper: 0.0,
            kind: BoundKind::Exact,
            exact: Some((BigRational::one(), BigRational::one())),
        }
    }

    /// Whether `value` lies strictly inside the open interval, judged exactly
    /// when exact bounds are available.
    pub fn strictly_contains(&self, value: &BigRational) -> bool {
        match (&self.kind, &self.exact) {
            (BoundKind::Exact, Some((lo, _))) => value == lo,
            (_, Some((lo, hi))) => lo < value && value < hi,
            (_, None) => {
                let v = value.to_f64().unwrap_or(f64::INFINITY).ln();
                self.ln_lower < v && v < self.ln_upper
            }
        }
    }
}

/// Exponents above this are reported in log space only.
const EXACT_EXPONENT_LIMIT: usize = 512;

fn ln_pos(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// `ln(base^k)` with `0^0 = 1`.
fn ln_pow(base: f64, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * ln_pos(base)
    }
}

pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn rational(num: u64, den: u64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

fn pow(base: &BigRational, k: usize) -> BigRational {
    num_traits::pow(base.clone(), k)
}

/// `max{0, m* − m} ≤ δ* ≤ m* + m`.
pub fn delta_star_bounds(m: usize, params: &SpaceParams) -> (usize, usize) {
    (params.m_star.saturating_sub(m), params.m_star + m)
}

/// Size range of optimal programs reachable from a size-`m` program within
/// `d` moves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiBounds {
    pub inf: f64,
    pub sup: f64,
    /// `false` when `sup < inf`, i.e. no such optimal program can exist.
    pub feasible: bool,
}

pub fn phi_bounds(m: usize, d: usize, params: &SpaceParams) -> PhiBounds {
    let (m, d, ms) = (m as f64, d as f64, params.m_star as f64);
    let inf = m + d - 2.0 * ((d - ms + m) / 2.0).min(d).min(m);
    let sup = m + d - 2.0 * (d - ms).max(0.0);
    PhiBounds { inf, sup, feasible: inf <= sup }
}

fn ln_omega_upper(m1: usize, m2: usize, p: &SpaceParams) -> f64 {
    let w = p.omega(m1) as f64;
    let top = (p.gamma - p.gamma_out) as f64;
    let base = m2 as f64 * (top + w) * (top - w + 1.0) * p.n as f64 / (2.0 * p.gamma as f64);
    ln_pow(base, m2 - m1)
}

fn ln_lambda_upper(m1: usize, m2: usize, p: &SpaceParams) -> f64 {
    let l = p.lambda(m1) as f64;
    let go = p.gamma_out as f64;
    let base = m2 as f64 * (go + l) * (l - go + 1.0) * p.n as f64 / (2.0 * p.gamma as f64);
    ln_pow(base, m2 - m1)
}

/// Shared shape of the two bloating-factor bounds: the lower bound sums
/// `(i·n/γ)^k` over the register range `lo..=hi`, the upper bound is
/// `(m2 · Σ i·n/γ)^k`.
fn bloating_bounds(m1: usize, m2: usize, lo: usize, hi: usize, p: &SpaceParams) -> Result<BoundReport> {
    if m2 < m1 {
        return input(format!("need m2 ≥ m1, got m1={m1}, m2={m2}"));
    }
    let k = m2 - m1;
    if k == 0 {
        return Ok(BoundReport::exact_one());
    }
    let g = p.gamma as f64;
    let terms: Vec<f64> = (lo..=hi).map(|i| ln_pow(i as f64 * p.n as f64 / g, k)).collect();
    let ln_lower = log_sum_exp(&terms);
    let range_sum: usize = (lo..=hi).sum();
    let ln_upper = ln_pow(m2 as f64 * range_sum as f64 * p.n as f64 / g, k);

    let exact = (k <= EXACT_EXPONENT_LIMIT).then(|| {
        let g = p.gamma as u64;
        let lower = (lo..=hi).fold(BigRational::zero(), |acc, i| acc + pow(&rational(i as u64 * p.n, g), k));
        let upper = pow(&rational(m2 as u64 * range_sum as u64 * p.n, g), k);
        (lower, upper)
    });
    Ok(BoundReport {
        ln_lower,
        ln_upper,
        kind: BoundKind::Bound,
        exact,
    })
}

/// Bounds on the neutral bloating factor: growth in the number of programs
/// when a size-`m1` program is padded to size `m2` with introns only.
pub fn omega_bounds(m1: usize, m2: usize, params: &SpaceParams) -> Result<BoundReport> {
    let lo = params.omega(m1);
    bloating_bounds(m1, m2, lo, params.gamma - params.gamma_out, params)
}

/// Bounds on the non-neutral bloating factor: as [`omega_bounds`] but
/// padding with exons only.
pub fn lambda_bounds(m1: usize, m2: usize, params: &SpaceParams) -> Result<BoundReport> {
    bloating_bounds(m1, m2, params.gamma_out, params.lambda(m1), params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaKind {
    Remove,
    Add,
}

/// Open bounds on the duplicate-normalisation factor after removing or
/// adding `count` instructions. `n_programs` is the number of parent
/// programs (only used for additions).
pub fn eta_bounds(kind: EtaKind, m: usize, count: usize, n_programs: u64, params: &SpaceParams) -> BoundReport {
    let (ln_upper, exact_upper) = match kind {
        EtaKind::Remove => {
            let per = (params.gamma - params.gamma_out) as u64 * params.n;
            let ln = ln_binomial(m as u64, count as u64) + ln_pow(per as f64 / params.gamma as f64, count);
            let exact = (count <= EXACT_EXPONENT_LIMIT).then(|| {
                BigRational::from_integer(binomial(m as u64, count as u64).into())
                    * pow(&rational(per, params.gamma as u64), count)
            });
            (ln, exact)
        }
        EtaKind::Add => {
            let c = binomial((m + count) as u64, count as u64) * n_programs;
            (ln_binomial((m + count) as u64, count as u64) + ln_pos(n_programs as f64), Some(BigRational::from_integer(c.into())))
        }
    };
    let kind = if exact_upper.as_ref().is_some_and(|u| u.is_one()) {
        BoundKind::Exact
    } else {
        BoundKind::Bound
    };
    BoundReport {
        ln_lower: 0.0,
        ln_upper,
        kind,
        exact: exact_upper.map(|u| (BigRational::one(), u)),
    }
}

/// Log of the upper bound on the number of offspring, produced by inserting
/// `u` instructions into a size-`m` program at distance `delta`, that
/// reduce the distance by exactly `i`.
pub fn ub_offspring_add(delta: usize, m: usize, i: usize, u: usize, params: &SpaceParams) -> Result<f64> {
    if i == 0 || i > delta.min(u) {
        return input(format!("reduction i={i} outside 1..={}", delta.min(u)));
    }
    Ok(ln_ub_add(delta, m, i, u, params))
}

fn ln_ub_add(delta: usize, m: usize, i: usize, u: usize, p: &SpaceParams) -> f64 {
    let j_max = ((u - i) / 2).min(delta - i);
    let terms: Vec<f64> = (0..=j_max)
        .map(|j| {
            ln_binomial(delta as u64, (i + j) as u64)
                + ln_lambda_upper(m + i + j, m + i + 2 * j, p)
                + ln_omega_upper(m + i + 2 * j, m + u, p)
        })
        .collect();
    log_sum_exp(&terms) - ((j_max + 1) as f64).ln()
}

/// Exact counterpart of [`ub_offspring_add`], for small arguments.
pub fn ub_offspring_add_exact(delta: usize, m: usize, i: usize, u: usize, p: &SpaceParams) -> Result<BigRational> {
    if i == 0 || i > delta.min(u) {
        return input(format!("reduction i={i} outside 1..={}", delta.min(u)));
    }
    let j_max = ((u - i) / 2).min(delta - i);
    let mut sum = BigRational::zero();
    for j in 0..=j_max {
        let c = BigRational::from_integer(binomial(delta as u64, (i + j) as u64).into());
        let lam = lambda_bounds(m + i + j, m + i + 2 * j, p)?.exact.expect("small exponent").1;
        let om = omega_bounds(m + i + 2 * j, m + u, p)?.exact.expect("small exponent").1;
        sum += c * lam * om;
    }
    Ok(sum / BigRational::from_integer((j_max as u64 + 1).into()))
}

/// Upper bound on the number of offspring reducing the distance when `u`
/// instructions are removed: every removal subset.
pub fn ub_offspring_remove(rho_len: usize, u: usize) -> Result<BigUint> {
    if u > rho_len {
        return input(format!("cannot remove {u} instructions from a program of size {rho_len}"));
    }
    Ok(binomial(rho_len as u64, u as u64))
}

/// Number of admissible distance reductions by insertion and by removal.
pub fn reduction_ranges(delta: usize, m: usize, u: usize) -> (usize, usize) {
    let i1 = delta.min(u);
    let i2 = delta.min(m).min(u).min((delta + m).saturating_sub(1) / 2);
    (i1, i2)
}

/// One evaluation of the constructive-moving-rate upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBound {
    pub untruncated: f64,
    pub truncated: f64,
    /// Some insertion probability bound exceeded 1 and was capped.
    pub capped: bool,
}

/// Both forms of the constructive-moving-rate upper bound for freemut with
/// step `u` applied to a size-`m` program at distance `delta`.
///
/// The untruncated form averages the insertion term over all
/// `C(m+u,u)·nᵘ` offspring and the removal term over all removal subsets.
/// The truncated form caps each insertion probability at 1 and rescales the
/// two sums by `1/I1` and `1/I2`. Empty sums contribute 0.
pub fn rate_bounds(delta: usize, m: usize, u: usize, params: &SpaceParams) -> RateBound {
    let (i1, i2) = reduction_ranges(delta, m, u);
    let ln_total = ln_binomial((m + u) as u64, u as u64) + u as f64 * (params.n as f64).ln();
    let mut add_raw = 0.0;
    let mut add_capped = 0.0;
    let mut capped = false;
    for i in 1..=i1 {
        let ln_p = ln_ub_add(delta, m, i, u, params) - ln_total;
        let p = ln_p.exp();
        add_raw += i as f64 * p;
        if ln_p > 0.0 {
            capped = true;
        }
        add_capped += i as f64 * p.min(1.0);
    }
    let remove_sum = (i2 * (i2 + 1)) as f64 / 2.0;
    let untruncated = 0.5 * (add_raw + remove_sum);
    let truncated = 0.5 * (scaled(add_capped, i1) + scaled(remove_sum, i2));
    RateBound {
        untruncated,
        truncated,
        capped,
    }
}

fn scaled(sum: f64, count: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

pub fn constructive_rate_ub(delta: usize, m: usize, u: usize, params: &SpaceParams, truncated: bool) -> f64 {
    let r = rate_bounds(delta, m, u, params);
    if truncated {
        r.truncated
    } else {
        r.untruncated
    }
}

/// Iteration cap for [`min_hitting_time`].
pub const MAX_HITTING_STEPS: u64 = 1_000_000;

/// Number of steps `δ ← δ − rate(⌈δ⌉)` needed to reach `δ ≤ ε`, or `None`
/// when that takes more than [`MAX_HITTING_STEPS`] or the rate vanishes.
/// The rate is only queried at integer distances, so runs of identical steps
/// are taken in one jump.
pub fn hitting_time_with(delta0: f64, epsilon: f64, mut rate: impl FnMut(usize) -> f64) -> Option<u64> {
    let mut delta = delta0;
    let mut steps = 0u64;
    while delta > epsilon {
        let k = delta.ceil();
        let r = rate(k as usize);
        if r.is_nan() || r <= 0.0 {
            return None;
        }
        let floor = (k - 1.0).max(epsilon);
        let jump = ((delta - floor) / r).ceil().max(1.0);
        if steps as f64 + jump > MAX_HITTING_STEPS as f64 {
            return None;
        }
        steps += jump as u64;
        delta -= jump * r;
    }
    Some(steps)
}

/// Minimum hitting time of the `ε`-neighbourhood of the optimum from
/// distance `delta0`, holding the program size at `m`.
pub fn min_hitting_time(delta0: usize, m: usize, u: usize, params: &SpaceParams, epsilon: f64, truncated: bool) -> Option<u64> {
    hitting_time_with(delta0 as f64, epsilon, |k| constructive_rate_ub(k, m, u, params, truncated))
}

/// One `(u, d, m)` cell of the moving-rate grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub u: usize,
    pub d: usize,
    pub m: usize,
    pub rate_ub: f64,
    pub hitting_time: Option<u64>,
    pub truncated: bool,
}

/// Evaluate every cell of `us × ds × ms` with the truncated rate bound,
/// ordered lexicographically by `(u, d, m)`.
pub fn grid(params: &SpaceParams, us: &[usize], ds: &[usize], ms: &[usize], epsilon: f64) -> Vec<GridPoint> {
    let cells: Vec<(usize, usize, usize)> = us
        .iter()
        .flat_map(|&u| ds.iter().flat_map(move |&d| ms.iter().map(move |&m| (u, d, m))))
        .collect();
    let mut out: Vec<GridPoint> = cells
        .into_par_iter()
        .map(|(u, d, m)| {
            let r = rate_bounds(d, m, u, params);
            GridPoint {
                u,
                d,
                m,
                rate_ub: r.truncated,
                hitting_time: min_hitting_time(d, m, u, params, epsilon, true),
                truncated: r.capped,
            }
        })
        .collect();
    out.sort_by_key(|p| (p.u, p.d, p.m));
    out
}

pub fn grid_csv(points: &[GridPoint]) -> String {
    let mut s = String::from("u,d,m,rate_ub,hitting_time,truncated\n");
    for p in points {
        let q = p.hitting_time.map_or("unreached".to_string(), |q| q.to_string());
        s.push_str(&format!("{},{},{},{},{q},{}\n", p.u, p.d, p.m, p.rate_ub, p.truncated));
    }
    s
}

/// Distance and sensitivity constants of the fitness-gap bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaConstants {
    /// Largest distance between any semantics and any optimal semantics.
    pub psi: f64,
    /// Largest fitness change per unit of semantic distance from the target.
    pub f_psi: f64,
    /// Largest growth in distance from applying one optimal instruction.
    pub i_star: f64,
    /// Largest growth in distance from applying any instruction to one side
    /// and an optimal instruction to the other.
    pub i_sq: f64,
}

impl DeltaConstants {
    fn check(&self) -> Result<()> {
        let all = [self.psi, self.f_psi, self.i_star, self.i_sq];
        if all.iter().any(|v| v.is_nan() || *v < 0.0) {
            return input("constants must be nonnegative");
        }
        if self.i_sq < self.i_star {
            return input(format!(
                "two-instruction constant {} is below the optimal-instruction constant {}",
                self.i_sq, self.i_star
            ));
        }
        Ok(())
    }

    pub fn scaled_f(&self, factor: f64) -> Self {
        DeltaConstants { f_psi: self.f_psi * factor, ..*self }
    }
}

/// Position-wise bound `Δ_f · (Δ_I² δ + Δ_I* (L − δ))`.
pub fn fitness_gap_positional(delta: f64, max_len: usize, c: &DeltaConstants) -> f64 {
    c.f_psi * (c.i_sq * delta + c.i_star * (max_len as f64 - delta))
}

/// Distance-free bound `Δ_f · Δ_Ψ`.
pub fn fitness_gap_global(c: &DeltaConstants) -> f64 {
    c.f_psi * c.psi
}

/// Supremum of the fitness gap at editing distance `delta`: the smaller of
/// the positional and global bounds.
pub fn fitness_gap_bound(delta: f64, max_len: usize, c: &DeltaConstants) -> Result<f64> {
    c.check()?;
    Ok(fitness_gap_positional(delta, max_len, c).min(fitness_gap_global(c)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p4(n: u64) -> SpaceParams {
        SpaceParams::new(4, 1, n, 1, 100).unwrap()
    }

    fn r(num: u64, den: u64) -> BigRational {
        rational(num, den)
    }

    #[test]
    fn delta_star_examples() {
        let p = |m_star| SpaceParams::new(8, 1, 10, m_star, 100).unwrap();
        assert_eq!(delta_star_bounds(5, &p(5)), (0, 10));
        assert_eq!(delta_star_bounds(0, &p(11)), (11, 11));
        assert_eq!(delta_star_bounds(100, &p(11)), (0, 111));
    }

    #[test]
    fn phi_examples() {
        let p = |m_star| SpaceParams::new(8, 1, 10, m_star, 100).unwrap();
        assert_eq!(phi_bounds(5, 3, &p(4)), PhiBounds { inf: 4.0, sup: 8.0, feasible: true });
        let z = phi_bounds(7, 0, &p(4));
        assert_eq!((z.inf, z.sup), (7.0, 7.0));
        let bad = phi_bounds(2, 10, &p(4));
        assert_eq!((bad.inf, bad.sup, bad.feasible), (8.0, 0.0, false));
    }

    #[test]
    fn omega_examples() {
        let b = omega_bounds(3, 4, &p4(8)).unwrap();
        assert_eq!(b.exact, Some((r(12, 1), r(48, 1))));
        assert!((b.lower() - 12.0).abs() < 1e-9 && (b.upper() - 48.0).abs() < 1e-9);

        let same = omega_bounds(4, 4, &p4(8)).unwrap();
        assert_eq!((same.kind, same.upper()), (BoundKind::Exact, 1.0));

        let b = omega_bounds(0, 1, &p4(8)).unwrap();
        assert_eq!(b.exact, Some((r(6, 1), r(6, 1))));
        assert!(omega_bounds(3, 2, &p4(8)).is_err());
    }

    #[test]
    fn omega_floor_switch_drops_zero_term() {
        let mut p = p4(8);
        p.omega_floor = 1;
        // The i = 0 term is 0 for m2 > m1, so the lower bound is unchanged.
        assert_eq!(omega_bounds(3, 4, &p).unwrap().exact.unwrap().0, r(12, 1));
        assert_eq!(omega_bounds(3, 4, &p).unwrap().exact.unwrap().1, r(4 * 4 * 3 * 8, 8));
    }

    #[test]
    fn lambda_examples() {
        let b = lambda_bounds(3, 4, &p4(8)).unwrap();
        assert_eq!(b.exact, Some((r(20, 1), r(80, 1))));
        assert_eq!(lambda_bounds(2, 2, &p4(8)).unwrap().upper(), 1.0);
        let p = SpaceParams::new(2, 2, 4, 1, 10).unwrap();
        assert_eq!(lambda_bounds(1, 2, &p).unwrap().exact.unwrap().0, r(4, 1));
    }

    #[test]
    fn eta_examples() {
        let e = eta_bounds(EtaKind::Remove, 4, 1, 1, &p4(8));
        assert_eq!(e.exact.unwrap().1, r(24, 1));
        let e = eta_bounds(EtaKind::Remove, 4, 0, 1, &p4(8));
        assert_eq!((e.kind, e.upper()), (BoundKind::Exact, 1.0));
        let e = eta_bounds(EtaKind::Add, 3, 1, 2, &p4(8));
        assert_eq!(e.exact.clone().unwrap().1, r(8, 1));
        assert!((e.upper() - 8.0).abs() < 1e-9);
    }

    #[test]
    fn offspring_add_examples() {
        let p = p4(8);
        let v = ub_offspring_add(2, 3, 1, 2, &p).unwrap();
        assert!((v.exp() - 120.0).abs() < 1e-9);
        assert_eq!(ub_offspring_add_exact(2, 3, 1, 2, &p).unwrap(), r(120, 1));
        // i = u: only j = 0 and both bloating exponents vanish.
        let v = ub_offspring_add(6, 3, 4, 4, &p).unwrap();
        assert!((v.exp() - 15.0).abs() < 1e-9);
        assert!(ub_offspring_add(0, 3, 1, 2, &p).is_err());
        assert!(ub_offspring_add(2, 3, 3, 5, &p).is_err());
    }

    #[test]
    fn offspring_add_log_matches_exact() {
        let p = SpaceParams::new(3, 1, 12, 2, 100).unwrap();
        for delta in 1..6 {
            for m in 0..5 {
                for u in 1..6 {
                    for i in 1..=delta.min(u) {
                        let ln = ub_offspring_add(delta, m, i, u, &p).unwrap();
                        let exact = ub_offspring_add_exact(delta, m, i, u, &p).unwrap().to_f64().unwrap();
                        assert!((ln - exact.ln()).abs() < 1e-9, "{delta} {m} {u} {i}");
                    }
                }
            }
        }
    }

    #[test]
    fn offspring_remove_examples() {
        assert_eq!(ub_offspring_remove(10, 2).unwrap(), 45u32.into());
        assert_eq!(ub_offspring_remove(10, 0).unwrap(), 1u32.into());
        assert_eq!(ub_offspring_remove(5, 5).unwrap(), 1u32.into());
        assert!(ub_offspring_remove(3, 4).is_err());
    }

    #[test]
    fn rate_examples() {
        let p = SpaceParams::nguyen4();
        assert_eq!(constructive_rate_ub(0, 10, 3, &p, true), 0.0);
        assert_eq!(constructive_rate_ub(0, 10, 3, &p, false), 0.0);
        assert_eq!(reduction_ranges(1, 50, 1), (1, 1));
        let r = rate_bounds(1, 50, 1, &p);
        // Removal contributes ½·1; insertion adds 1/(51·n).
        let add = 1.0 / (51.0 * p.n as f64);
        assert!((r.untruncated - 0.5 * (1.0 + add)).abs() < 1e-15);
        assert!((r.truncated - 0.5 * (1.0 + add)).abs() < 1e-15);
        assert!(!r.capped);
    }

    #[test]
    fn i2_floors_half_range() {
        assert_eq!(reduction_ranges(1, 1, 5), (1, 0));
        assert_eq!(reduction_ranges(2, 1, 5), (2, 1));
        assert_eq!(reduction_ranges(10, 100, 3), (3, 3));
        assert_eq!(reduction_ranges(4, 0, 3), (3, 0));
    }

    #[test]
    fn hitting_time_examples() {
        assert_eq!(hitting_time_with(0.0, 1e-4, |_| 1.0), Some(0));
        assert_eq!(hitting_time_with(5.0, 1e-4, |_| 1.0), Some(5));
        assert_eq!(hitting_time_with(3.0, 1e-4, |_| 0.0), None);
        assert_eq!(hitting_time_with(3.0, 1e-4, |_| 1e-7), None);
        // 0.4 per step: 3 → 2.6 → ... ; each ceiling band is crossed in jumps.
        let mut delta: f64 = 3.0;
        let mut q = 0;
        while delta > 1e-4 {
            delta -= 0.4;
            q += 1;
        }
        assert_eq!(hitting_time_with(3.0, 1e-4, |_| 0.4), Some(q));
        let p = SpaceParams::nguyen4();
        assert_eq!(min_hitting_time(0, 10, 1, &p, 1e-4, true), Some(0));
    }

    #[test]
    fn fitness_gap_examples() {
        let c = |f, psi, s, q| DeltaConstants { f_psi: f, psi, i_star: s, i_sq: q };
        assert_eq!(fitness_gap_bound(0.0, 10, &c(1.0, 5.0, 0.0, 2.0)).unwrap(), 0.0);
        assert_eq!(fitness_gap_bound(3.0, 10, &c(1.0, 100.0, 0.0, 2.0)).unwrap(), 6.0);
        assert_eq!(fitness_gap_bound(10.0, 10, &c(2.0, 3.0, 0.5, 2.0)).unwrap(), 6.0);
        assert!(fitness_gap_bound(1.0, 10, &c(1.0, 1.0, 2.0, 1.0)).is_err());
    }

    #[test]
    fn grid_is_sorted_and_sized() {
        let p = SpaceParams::nguyen4();
        let g = grid(&p, &[2, 1], &[1, 2], &[1, 5, 3], 1e-4);
        assert_eq!(g.len(), 12);
        assert!(g.windows(2).all(|w| (w[0].u, w[0].d, w[0].m) < (w[1].u, w[1].d, w[1].m)));
        let one = grid(&p, &[1], &[1], &[1], 1e-4);
        assert_eq!(grid_csv(&one).lines().count(), 2);
    }
}
