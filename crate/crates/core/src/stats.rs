//! Rank statistics for comparing runs.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Group sizes up to this use the exact permutation distribution.
pub const EXACT_RANK_SUM_LIMIT: usize = 25;

/// Midranks (1-based), ties sharing the average rank.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSum {
    /// Rank sum of the first sample.
    pub w: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub exact: bool,
}

/// Two-sided Wilcoxon rank-sum (Mann–Whitney) test. Exact when both groups
/// have at most [`EXACT_RANK_SUM_LIMIT`] members, ties included; otherwise
/// the tie-corrected normal approximation with continuity correction.
pub fn rank_sum(a: &[f64], b: &[f64]) -> RankSum {
    let (n1, n2) = (a.len(), b.len());
    if n1 == 0 || n2 == 0 {
        return RankSum { w: 0.0, p: 1.0, exact: true };
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let r = ranks(&pooled);
    let w: f64 = r[..n1].iter().sum();
    if n1 <= EXACT_RANK_SUM_LIMIT && n2 <= EXACT_RANK_SUM_LIMIT {
        RankSum { w, p: exact_p(&r, n1, w), exact: true }
    } else {
        RankSum { w, p: normal_p(&r, n1, n2, w), exact: false }
    }
}

/// Permutation distribution of the rank sum over all `n1`-subsets, on
/// doubled ranks so that midranks stay integral.
fn exact_p(r: &[f64], n1: usize, w: f64) -> f64 {
    let doubled: Vec<usize> = r.iter().map(|x| (x * 2.0).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    // counts[k][s]: subsets of size k with doubled sum s.
    let mut counts = vec![vec![0.0f64; max_sum + 1]; n1 + 1];
    counts[0][0] = 1.0;
    for &x in &doubled {
        for k in (1..=n1).rev() {
            for s in (x..=max_sum).rev() {
                let add = counts[k - 1][s - x];
                if add != 0.0 {
                    counts[k][s] += add;
                }
            }
        }
    }
    let total: f64 = counts[n1].iter().sum();
    let target = (w * 2.0).round() as usize;
    let lower: f64 = counts[n1][..=target].iter().sum();
    let upper: f64 = counts[n1][target..].iter().sum();
    (2.0 * lower.min(upper) / total).min(1.0)
}

fn normal_p(r: &[f64], n1: usize, n2: usize, w: f64) -> f64 {
    let n = (n1 + n2) as f64;
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let mean = n1f * (n + 1.0) / 2.0;
    let mut sorted = r.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&x| x == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n1f * n2f / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::standard();
    (2.0 * (1.0 - normal.cdf(z))).min(1.0)
}

/// Spearman rank correlation; `None` when either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    pearson(&ranks(x), &ranks(y))
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Friedman {
    /// Mean rank per treatment; rank 1 is the smallest value.
    pub mean_ranks: Vec<f64>,
    pub statistic: f64,
    pub p: f64,
}

/// Rank treatments within each block (row) and average across blocks.
pub fn friedman(blocks: &[Vec<f64>]) -> Friedman {
    let k = blocks.first().map_or(0, Vec::len);
    let b = blocks.len() as f64;
    let mut sums = vec![0.0; k];
    for row in blocks {
        for (s, r) in sums.iter_mut().zip(ranks(row)) {
            *s += r;
        }
    }
    let mean_ranks: Vec<f64> = sums.iter().map(|s| s / b).collect();
    let kf = k as f64;
    let centre = (kf + 1.0) / 2.0;
    let statistic = 12.0 * b / (kf * (kf + 1.0)) * mean_ranks.iter().map(|r| (r - centre).powi(2)).sum::<f64>();
    let p = if k > 1 && !blocks.is_empty() {
        1.0 - ChiSquared::new(kf - 1.0).expect("positive degrees of freedom").cdf(statistic)
    } else {
        1.0
    };
    Friedman {
        mean_ranks,
        statistic,
        p,
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; zero for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midranks() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn exact_small_case() {
        // Complete separation with 3 vs 3: the most extreme of C(6,3) = 20
        // subsets on each side.
        let r = rank_sum(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
        assert!(r.exact);
        assert_eq!(r.w, 6.0);
        assert!((r.p - 2.0 / 20.0).abs() < 1e-12);
        let same = rank_sum(&[1.0, 2.0], &[1.0, 2.0]);
        assert_eq!(same.p, 1.0);
    }

    #[test]
    fn exact_matches_brute_force_with_ties() {
        let a = [1.0, 2.0, 2.0, 5.0];
        let b = [2.0, 3.0, 4.0, 4.0, 6.0];
        let pooled: Vec<f64> = a.iter().chain(&b).copied().collect();
        let r = ranks(&pooled);
        let w: f64 = r[..4].iter().sum();
        let (mut le, mut ge, mut total) = (0u32, 0u32, 0u32);
        for mask in 0u32..(1 << 9) {
            if mask.count_ones() != 4 {
                continue;
            }
            let s: f64 = (0..9).filter(|i| mask >> i & 1 == 1).map(|i| r[i]).sum();
            total += 1;
            le += (s <= w + 1e-9) as u32;
            ge += (s >= w - 1e-9) as u32;
        }
        let expect = (2.0 * le.min(ge) as f64 / total as f64).min(1.0);
        assert!((rank_sum(&a, &b).p - expect).abs() < 1e-12);
    }

    #[test]
    fn normal_approximation_large_groups() {
        let a: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..30).map(|i| i as f64 + 100.0).collect();
        let r = rank_sum(&a, &b);
        assert!(!r.exact);
        assert!(r.p < 1e-8);
        let r = rank_sum(&a, &a);
        assert!(r.p > 0.9);
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 25.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 2.0], &[1.0, 1.0]), None);
    }

    #[test]
    fn friedman_ranks() {
        let f = friedman(&[vec![1.0, 2.0, 3.0], vec![1.0, 3.0, 2.0]]);
        assert_eq!(f.mean_ranks, vec![1.0, 2.5, 2.5]);
        assert!(f.p > 0.0 && f.p <= 1.0);
    }

    #[test]
    fn std_dev_known() {
        assert!((std_dev(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]) - 2.138089935).abs() < 1e-8);
        assert_eq!(std_dev(&[1.0]), 0.0);
    }
}
