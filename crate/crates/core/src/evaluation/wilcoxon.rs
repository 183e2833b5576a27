use alloc::vec::Vec;
use core::cmp::Ordering;

use super::EvalError;

/// Combined sample size up to which the null distribution is enumerated.
pub const EXACT_LIMIT: usize = 12;

/// Largest combined sample the exact path accepts when forced.
const ENUMERATION_CAP: usize = 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WilcoxonMethod {
    /// Exact up to [`EXACT_LIMIT`] values, normal approximation above.
    #[default]
    Auto,
    Exact,
    Normal,
}

/// Two-sided Wilcoxon rank-sum test of `x` against `y`.
///
/// Ties get mid-ranks. Small samples (`|x| + |y| <= 12`) use the exact
/// permutation distribution of the rank sum; larger ones a normal
/// approximation with tie and continuity corrections. Returns 1 when every
/// value is identical.
pub fn wilcoxon_rank_sum(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    wilcoxon_rank_sum_with(x, y, WilcoxonMethod::Auto)
}

/// [`wilcoxon_rank_sum`] with the null distribution chosen explicitly. The
/// exact path is limited to 20 values in total.
pub fn wilcoxon_rank_sum_with(x: &[f64], y: &[f64], method: WilcoxonMethod) -> Result<f64, EvalError> {
    if x.is_empty() || y.is_empty() {
        return Err(EvalError::EmptySample);
    }
    let n1 = x.len();
    let n = n1 + y.len();
    let ranks = mid_ranks(x, y);
    if ranks.iter().all(|&r| r == ranks[0]) {
        return Ok(1.0);
    }
    let w: f64 = ranks[..n1].iter().sum();
    let exact = match method {
        WilcoxonMethod::Auto => n <= EXACT_LIMIT,
        WilcoxonMethod::Exact if n > ENUMERATION_CAP => return Err(EvalError::SampleTooLarge(n)),
        WilcoxonMethod::Exact => true,
        WilcoxonMethod::Normal => false,
    };
    let p = if exact {
        exact_p(&ranks, n1, w)
    } else {
        normal_p(&ranks, n1, w, x, y)
    };
    Ok(p.min(1.0))
}

/// Mid-ranks of the pooled sample, `x` first.
fn mid_ranks(x: &[f64], y: &[f64]) -> Vec<f64> {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&a, &b| pooled[a].partial_cmp(&pooled[b]).unwrap_or(Ordering::Equal));
    let mut ranks = alloc::vec![0.0; pooled.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Share of all `C(n, n1)` assignments whose rank sum lies at least as far
/// from its mean as the observed one.
fn exact_p(ranks: &[f64], n1: usize, observed: f64) -> f64 {
    let n = ranks.len();
    let mean = n1 as f64 * (n as f64 + 1.0) / 2.0;
    let threshold = (observed - mean).abs() - 1e-9;
    let mut extreme = 0u64;
    let mut total = 0u64;
    // subsets of size n1 as bitmasks
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        total += 1;
        let sum: f64 = (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
        if (sum - mean).abs() >= threshold {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

fn normal_p(ranks: &[f64], n1: usize, w: f64, x: &[f64], y: &[f64]) -> f64 {
    let n = ranks.len() as f64;
    let (a, b) = (n1 as f64, (ranks.len() - n1) as f64);
    let u = w - a * (a + 1.0) / 2.0;
    let mean = a * b / 2.0;
    let ties = tie_term(x, y);
    let variance = a * b / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    if variance <= 0.0 {
        return 1.0;
    }
    let z = ((u - mean).abs() - 0.5).max(0.0) / libm::sqrt(variance);
    libm::erfc(z / core::f64::consts::SQRT_2)
}

/// `Σ (t³ - t)` over groups of tied values.
fn tie_term(x: &[f64], y: &[f64]) -> f64 {
    let mut pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mut total = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1] == pooled[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        total += t * t * t - t;
        i = j + 1;
    }
    total
}
