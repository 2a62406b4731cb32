//! QD metrics, corrected archives, reproducibility losses and the
//! rank-sum statistics used to compare algorithms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::archive::{BdPoint, CvtArchive, DeepGridArchive};
use crate::envs::{evaluate, TaskSpec};
use crate::error::Result;
use crate::neuro::MlpSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSet {
    pub qd_score: f64,
    pub coverage: f64,
    pub max_fitness: f64,
}

/// QD-score offset by a fixed floor, coverage and max fitness. An empty
/// archive reports the floor as its max fitness.
pub fn compute_metrics(archive: &CvtArchive, offset_floor: f64) -> MetricSet {
    let mut qd_score = 0.0;
    let mut max_fitness = f64::NEG_INFINITY;
    for (_, elite) in archive.iter() {
        qd_score += elite.fitness - offset_floor;
        max_fitness = max_fitness.max(elite.fitness);
    }
    MetricSet {
        qd_score,
        coverage: archive.coverage(),
        max_fitness: if archive.is_empty() { offset_floor } else { max_fitness },
    }
}

/// Deep-grid metrics: cells are scored by their mean fitness, while the max
/// fitness is the best stored entry.
pub fn compute_metrics_deep(archive: &DeepGridArchive, offset_floor: f64) -> MetricSet {
    let qd_score = archive.cell_scores().map(|(_, s)| s - offset_floor).sum();
    let max_fitness = (0..archive.n_cells())
        .filter_map(|i| archive.cell(i).best().map(|e| e.fitness))
        .fold(offset_floor, f64::max);
    MetricSet {
        qd_score,
        coverage: archive.len() as f64 / archive.n_cells() as f64,
        max_fitness,
    }
}

/// Mean as `x0 + sum(x - x0) / n`, which is exact when all samples agree.
fn stable_mean(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = xs.clone();
    let Some(x0) = it.next() else { return f64::NAN };
    let n = xs.clone().count() as f64;
    x0 + xs.map(|x| x - x0).sum::<f64>() / n
}

/// Per-elite ground-truth estimate from `n_reeval` fresh evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct Reevaluation {
    pub cell: usize,
    pub original_fitness: f64,
    pub mean_fitness: f64,
    pub mean_bd: BdPoint,
}

/// Re-evaluates every elite `n_reeval` times with seeds drawn from `seed`.
pub fn reevaluate(
    archive: &CvtArchive,
    task: &TaskSpec,
    policy: &MlpSpec,
    n_reeval: usize,
    seed: u64,
) -> Result<Vec<Reevaluation>> {
    assert!(n_reeval >= 1, "n_reeval must be at least 1");
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(archive.len());
    for (cell, elite) in archive.iter() {
        let results = (0..n_reeval)
            .map(|_| evaluate(task, policy, &elite.genotype, seeds.random()))
            .collect::<Result<Vec<_>>>()?;
        let mean_fitness = stable_mean(results.iter().map(|r| r.fitness));
        let mean_bd = (0..archive.bd_dim())
            .map(|d| stable_mean(results.iter().map(move |r| r.bd[d])))
            .collect();
        out.push(Reevaluation {
            cell,
            original_fitness: elite.fitness,
            mean_fitness,
            mean_bd: BdPoint::clamped(mean_bd),
        });
    }
    Ok(out)
}

/// Rebuilds the archive from re-evaluated fitness and BD. Elites are
/// inserted into a fresh archive over the same centroids in descending
/// original fitness (ties by cell id). The input archive is not touched.
pub fn build_corrected_archive(
    archive: &CvtArchive,
    task: &TaskSpec,
    policy: &MlpSpec,
    n_reeval: usize,
    seed: u64,
) -> Result<CvtArchive> {
    let mut reevals = reevaluate(archive, task, policy, n_reeval, seed)?;
    reevals.sort_by(|a, b| {
        b.original_fitness
            .total_cmp(&a.original_fitness)
            .then(a.cell.cmp(&b.cell))
    });
    let mut corrected = archive.empty_like();
    for r in reevals {
        let elite = archive.get(r.cell).unwrap();
        corrected.try_add(elite.genotype.clone(), r.mean_fitness, r.mean_bd, elite.eval_record_id);
    }
    Ok(corrected)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Losses {
    pub qd_score: f64,
    pub max_fitness: f64,
    pub coverage: f64,
}

/// `(original - corrected) / original` per metric; zero when the original
/// metric is zero. Negative values mean the corrected archive is better.
pub fn compute_losses(original: &MetricSet, corrected: &MetricSet) -> Losses {
    let loss = |o: f64, c: f64| if o == 0.0 { 0.0 } else { (o - c) / o };
    Losses {
        qd_score: loss(original.qd_score, corrected.qd_score),
        max_fitness: loss(original.max_fitness, corrected.max_fitness),
        coverage: loss(original.coverage, corrected.coverage),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedReport {
    pub original: MetricSet,
    pub corrected: MetricSet,
    pub losses: Losses,
    pub n_reeval: usize,
}

pub fn corrected_report(
    archive: &CvtArchive,
    task: &TaskSpec,
    policy: &MlpSpec,
    n_reeval: usize,
    seed: u64,
) -> Result<CorrectedReport> {
    let corrected_archive = build_corrected_archive(archive, task, policy, n_reeval, seed)?;
    let original = compute_metrics(archive, task.fitness_floor);
    let corrected = compute_metrics(&corrected_archive, task.fitness_floor);
    Ok(CorrectedReport {
        original,
        corrected,
        losses: compute_losses(&original, &corrected),
        n_reeval,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    TwoSided,
    /// First sample tends to be larger.
    Greater,
    /// First sample tends to be smaller.
    Less,
}

/// Midranks (1-based) of the pooled sample, plus the tie group sizes.
fn pooled_ranks(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut pooled: Vec<(f64, usize)> = a.iter().chain(b).copied().zip(0..).collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j + 1 < pooled.len() && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for p in &pooled[i..=j] {
            ranks[p.1] = mid;
        }
        if j > i {
            ties.push(j - i + 1);
        }
        i = j + 1;
    }
    (ranks, ties)
}

/// Exact null distribution of the rank sum of `n1` items out of ranks
/// `1..=n`, as counts indexed by the sum.
fn rank_sum_counts(n1: usize, n: usize) -> Vec<f64> {
    let max_sum = n * (n + 1) / 2;
    // counts[k][s]: subsets of size k with rank sum s.
    let mut counts = vec![vec![0.0f64; max_sum + 1]; n1 + 1];
    counts[0][0] = 1.0;
    for r in 1..=n {
        for k in (1..=n1.min(r)).rev() {
            for s in (r..=max_sum).rev() {
                counts[k][s] += counts[k - 1][s - r];
            }
        }
    }
    counts.swap_remove(n1)
}

/// Exact rank-sum p-value; only valid without ties.
pub fn rank_sum_exact_p(a: &[f64], b: &[f64], alternative: Alternative) -> f64 {
    let (n1, n) = (a.len(), a.len() + b.len());
    let (ranks, _) = pooled_ranks(a, b);
    let w = ranks[..n1].iter().sum::<f64>().round() as usize;
    let counts = rank_sum_counts(n1, n);
    let total: f64 = counts.iter().sum();
    let lower = counts[..=w].iter().sum::<f64>() / total;
    let upper = counts[w..].iter().sum::<f64>() / total;
    match alternative {
        Alternative::TwoSided => (2.0 * lower.min(upper)).min(1.0),
        Alternative::Greater => upper,
        Alternative::Less => lower,
    }
}

/// Normal approximation with tie and continuity corrections.
pub fn rank_sum_normal_p(a: &[f64], b: &[f64], alternative: Alternative) -> f64 {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let (ranks, ties) = pooled_ranks(a, b);
    let w: f64 = ranks[..a.len()].iter().sum();
    let u = w - n1 * (n1 + 1.0) / 2.0;
    let mean = n1 * n2 / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
    let sd = (n1 * n2 / 12.0 * ((n + 1.0) - tie_term)).sqrt();
    if sd == 0.0 {
        return 1.0;
    }
    let normal = Normal::new(0.0, 1.0).unwrap();
    let p = match alternative {
        Alternative::TwoSided => 2.0 * normal.sf(((u - mean).abs() - 0.5) / sd),
        Alternative::Greater => normal.sf((u - mean - 0.5) / sd),
        Alternative::Less => normal.cdf((u - mean + 0.5) / sd),
    };
    p.min(1.0)
}

/// Wilcoxon rank-sum test. Exact enumeration when the pooled size is at
/// most 20 and there are no ties, normal approximation otherwise.
pub fn wilcoxon_rank_sum_alt(a: &[f64], b: &[f64], alternative: Alternative) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "rank-sum test needs two non-empty samples");
    let first = a[0];
    if a.iter().chain(b).all(|&x| x == first) {
        return 1.0;
    }
    let (_, ties) = pooled_ranks(a, b);
    if a.len() + b.len() <= 20 && ties.is_empty() {
        rank_sum_exact_p(a, b, alternative)
    } else {
        rank_sum_normal_p(a, b, alternative)
    }
}

/// Two-sided [`wilcoxon_rank_sum_alt`].
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> f64 {
    wilcoxon_rank_sum_alt(a, b, Alternative::TwoSided)
}

pub fn bonferroni(p_values: &[f64], k: usize) -> Vec<f64> {
    assert!(k >= p_values.len().max(1), "Bonferroni factor smaller than the comparison count");
    p_values.iter().map(|p| (p * k as f64).min(1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuro::ParamVector;

    fn bd(c: &[f64]) -> BdPoint {
        BdPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn metric_definitions() {
        let mut a = CvtArchive::new(vec![bd(&[0.0]), bd(&[0.5]), bd(&[1.0])]);
        let empty = compute_metrics(&a, -10.0);
        assert_eq!((empty.qd_score, empty.coverage, empty.max_fitness), (0.0, 0.0, -10.0));
        a.try_add(ParamVector::zeros(1), 5.0, bd(&[0.0]), 0);
        a.try_add(ParamVector::zeros(1), 3.0, bd(&[1.0]), 1);
        let m = compute_metrics(&a, 0.0);
        assert_eq!(m.qd_score, 8.0);
        assert_eq!(m.max_fitness, 5.0);
        assert!((m.coverage - 2.0 / 3.0).abs() < 1e-15);

        let mut b = a.empty_like();
        b.try_add(ParamVector::zeros(1), -2.0, bd(&[0.0]), 0);
        b.try_add(ParamVector::zeros(1), -1.0, bd(&[1.0]), 1);
        assert_eq!(compute_metrics(&b, -10.0).qd_score, 17.0);
    }

    #[test]
    fn loss_definitions() {
        let m = |q: f64, x: f64, c: f64| MetricSet { qd_score: q, max_fitness: x, coverage: c };
        let same = compute_losses(&m(100.0, 3.0, 0.5), &m(100.0, 3.0, 0.5));
        assert_eq!((same.qd_score, same.max_fitness, same.coverage), (0.0, 0.0, 0.0));
        let l = compute_losses(&m(100.0, 2.0, 0.5), &m(80.0, 3.0, 0.25));
        assert!((l.qd_score - 0.2).abs() < 1e-15);
        assert!(l.max_fitness < 0.0);
        assert_eq!(l.coverage, 0.5);
        assert_eq!(compute_losses(&m(0.0, 0.0, 0.0), &m(1.0, 1.0, 1.0)).qd_score, 0.0);
    }

    #[test]
    fn stable_mean_is_exact_on_constant_samples() {
        let x = 0.1 + 0.2;
        let xs = vec![x; 50];
        assert_eq!(stable_mean(xs.iter().copied()).to_bits(), x.to_bits());
        assert_eq!(stable_mean([1.0, 2.0, 6.0].into_iter()), 3.0);
    }

    /// Brute-force enumeration of all rank assignments for tie-free data.
    fn brute_force_two_sided(a: &[f64], b: &[f64]) -> f64 {
        let n1 = a.len();
        let n = n1 + b.len();
        let (ranks, _) = pooled_ranks(a, b);
        let w: f64 = ranks[..n1].iter().sum();
        let (mut le, mut ge, mut total) = (0u64, 0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != n1 {
                continue;
            }
            let s: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| (i + 1) as f64).sum();
            total += 1;
            le += u64::from(s <= w);
            ge += u64::from(s >= w);
        }
        (2.0 * (le.min(ge) as f64) / total as f64).min(1.0)
    }

    #[test]
    fn exact_three_versus_three() {
        let p = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]);
        assert!((p - 0.1).abs() < 1e-12);
        assert!((brute_force_two_sided(&[1.0, 2.0, 3.0], &[10.0, 11.0, 12.0]) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn exact_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..40 {
            let n1 = rng.random_range(1..7);
            let n2 = rng.random_range(1..7);
            let a: Vec<f64> = (0..n1).map(|_| rng.random::<f64>()).collect();
            let b: Vec<f64> = (0..n2).map(|_| rng.random::<f64>() + 0.2).collect();
            let exact = rank_sum_exact_p(&a, &b, Alternative::TwoSided);
            assert!((exact - brute_force_two_sided(&a, &b)).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_and_symmetric() {
        assert_eq!(wilcoxon_rank_sum(&[2.0, 2.0], &[2.0, 2.0, 2.0]), 1.0);
        let a = [0.3, 1.2, 5.0, 2.2, 2.2];
        let b = [0.1, 0.4, 3.3, 2.2];
        assert_eq!(wilcoxon_rank_sum(&a, &b), wilcoxon_rank_sum(&b, &a));
        let c = [1.0, 4.0, 9.0];
        let d = [2.0, 3.0, 5.0, 7.0];
        assert_eq!(wilcoxon_rank_sum(&c, &d), wilcoxon_rank_sum(&d, &c));
    }

    #[test]
    fn one_sided_tails() {
        let lo = [1.0, 2.0, 3.0, 4.0, 5.0];
        let hi = [6.0, 7.0, 8.0, 9.0, 10.0];
        let g = wilcoxon_rank_sum_alt(&hi, &lo, Alternative::Greater);
        assert!((g - 1.0 / 252.0).abs() < 1e-12);
        assert!((wilcoxon_rank_sum_alt(&lo, &hi, Alternative::Less) - g).abs() < 1e-15);
        assert!(wilcoxon_rank_sum_alt(&lo, &hi, Alternative::Greater) > 0.99);
    }

    #[test]
    fn large_disjoint_samples() {
        let a: Vec<f64> = (0..20).map(f64::from).collect();
        let b: Vec<f64> = (100..120).map(f64::from).collect();
        let p = wilcoxon_rank_sum(&a, &b);
        assert!(p < 1e-6, "p = {p}");
        // The exact two-sided tail is 2 / C(40, 20); the approximation is
        // conservative here.
        let exact = 2.0 / 137_846_528_820.0;
        assert!(p > exact);
    }

    #[test]
    fn ties_use_normal_path() {
        let a = [1.0, 2.0, 2.0, 3.0];
        let b = [2.0, 4.0, 5.0];
        assert_eq!(wilcoxon_rank_sum(&a, &b), rank_sum_normal_p(&a, &b, Alternative::TwoSided));
    }

    #[test]
    fn bonferroni_examples() {
        assert_eq!(bonferroni(&[0.01], 4), vec![0.04]);
        assert_eq!(bonferroni(&[0.5], 4), vec![1.0]);
        assert_eq!(bonferroni(&[0.3, 0.02], 2), vec![0.6, 0.04]);
        assert_eq!(bonferroni(&[0.123], 1), vec![0.123]);
    }
}
