//! Row selection rules.

use rand::Rng;

use crate::error::{Error, Result};
use crate::solvers::problem::Problem;
use crate::solvers::steps::IterateState;

/// Cyclic row index `k mod m` (zero-based).
#[inline]
pub fn cyclic_index(k: usize, m: usize) -> usize {
    debug_assert!(m >= 1);
    k % m
}

/// Draws an index with probability proportional to `weights[i]` by inverse
/// CDF over the prefix sums. `prefix` must be nondecreasing with a positive
/// last entry.
pub fn sample_prefix<R: Rng + ?Sized>(rng: &mut R, prefix: &[f64]) -> usize {
    let total = *prefix.last().expect("nonempty prefix sums");
    let u = rng.random::<f64>() * total;
    prefix.partition_point(|&c| c <= u).min(prefix.len() - 1)
}

fn prefix_sums(weights: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .scan(0.0, |acc, &w| {
            *acc += w;
            Some(*acc)
        })
        .collect()
}

/// Sampler for row-norm weighted selection (`P(i) = ||A_i||^2 / ||A||_F^2`).
#[derive(Clone, Debug)]
pub struct RowSampler {
    prefix: Vec<f64>,
}

impl RowSampler {
    pub fn new(row_weights: &[f64]) -> Result<Self> {
        if row_weights.is_empty() {
            return Err(Error::Invalid("no rows to sample".into()));
        }
        if let Some(i) = row_weights.iter().position(|&w| !(w > 0.0)) {
            return Err(Error::ZeroRow(i));
        }
        Ok(Self {
            prefix: prefix_sums(row_weights),
        })
    }

    /// Selection probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = *self.prefix.last().unwrap();
        let mut prev = 0.0;
        self.prefix
            .iter()
            .map(|&c| {
                let p = (c - prev) / total;
                prev = c;
                p
            })
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_prefix(rng, &self.prefix)
    }
}

/// `rbk_sample`: one weighted draw.
pub fn rbk_sample<R: Rng + ?Sized>(rng: &mut R, sampler: &RowSampler) -> usize {
    sampler.sample(rng)
}

/// Outcome of the greedy threshold computation for one iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionDiagnostics {
    /// `theta * max ratio + (1 - theta) * ||R||_F^2 / ||A||_F^2`, never above
    /// the max ratio.
    pub threshold: f64,
    /// Rows with `||R_i||^2 / ||A_i||^2 >= threshold`, ascending.
    pub candidates: Vec<usize>,
    /// `||R_i||^2` for each candidate.
    pub weights: Vec<f64>,
    pub total_weight: f64,
    /// Smallest index attaining the max ratio.
    pub argmax: usize,
    pub max_ratio: f64,
    /// `||R||_F^2 / ||A||_F^2`.
    pub average_ratio: f64,
    pub theta: f64,
}

/// Computes the greedy threshold and candidate set from residual row norms.
///
/// `theta = 1/2` gives the even blend, `theta = 1` keeps only the maximizers
/// and `theta = 0` keeps every row at or above the weighted average.
pub fn greedy_threshold_from_norms(
    residual_row_norms: &[f64],
    a_row_norms: &[f64],
    a_fro_sq: f64,
    theta: f64,
) -> Result<SelectionDiagnostics> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Theta(theta));
    }
    if residual_row_norms.len() != a_row_norms.len() {
        return Err(Error::DimensionMismatch("residual and row norm lengths differ".into()));
    }
    let (argmax, max_ratio) = max_ratio(residual_row_norms, a_row_norms)?;
    let total: f64 = residual_row_norms.iter().sum();
    let average_ratio = total / a_fro_sq;
    // Rounding can push the blend past the max when all ratios coincide.
    let threshold = (theta * max_ratio + (1.0 - theta) * average_ratio).min(max_ratio);

    let mut candidates = Vec::new();
    let mut weights = Vec::new();
    for (i, (&r, &a)) in residual_row_norms.iter().zip(a_row_norms).enumerate() {
        if r / a >= threshold {
            candidates.push(i);
            weights.push(r);
        }
    }
    let total_weight = weights.iter().sum();
    Ok(SelectionDiagnostics {
        threshold,
        candidates,
        weights,
        total_weight,
        argmax,
        max_ratio,
        average_ratio,
        theta,
    })
}

/// Greedy threshold and candidates for the maintained residual of `state`.
pub fn greedy_threshold(state: &IterateState, problem: &Problem, theta: f64) -> Result<SelectionDiagnostics> {
    greedy_threshold_from_norms(state.residual_row_norms()?, problem.row_norms_squared(), problem.a_fro_sq(), theta)
}

/// Draws a candidate with probability `||R_i||^2` over the candidate total.
/// At `theta = 1` the candidates are the maximizers and the smallest index is
/// taken, the same tie rule as the maximal weighted residual selection.
pub fn greedy_sample<R: Rng + ?Sized>(rng: &mut R, diag: &SelectionDiagnostics) -> usize {
    if diag.theta == 1.0 {
        return diag.argmax;
    }
    match diag.candidates.len() {
        0 => diag.argmax,
        1 => diag.candidates[0],
        _ => diag.candidates[sample_prefix(rng, &prefix_sums(&diag.weights))],
    }
}

/// Maximal weighted residual row of the maintained residual of `state`.
pub fn mwrbk_select(state: &IterateState, problem: &Problem) -> Result<usize> {
    mwrbk_select_from_norms(state.residual_row_norms()?, problem.row_norms_squared())
}

/// Smallest index maximizing `||R_i||^2 / ||A_i||^2`.
pub fn mwrbk_select_from_norms(residual_row_norms: &[f64], a_row_norms: &[f64]) -> Result<usize> {
    max_ratio(residual_row_norms, a_row_norms).map(|(i, _)| i)
}

fn max_ratio(residual_row_norms: &[f64], a_row_norms: &[f64]) -> Result<(usize, f64)> {
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, (&r, &a)) in residual_row_norms.iter().zip(a_row_norms).enumerate() {
        let ratio = r / a;
        if ratio > best.1 {
            best = (i, ratio);
        }
    }
    if !(best.1 > 0.0) {
        return Err(Error::ZeroResidual);
    }
    Ok(best)
}

/// Max-tournament over the ratios `||R_i||^2 / ||A_i||^2` with point updates.
/// Ties go to the smaller index, so [`RatioTree::argmax`] agrees with
/// [`mwrbk_select_from_norms`] on the same norms.
#[derive(Clone, Debug)]
pub struct RatioTree {
    leaves: usize,
    ratios: Vec<f64>,
    nodes: Vec<usize>,
    scratch: Vec<usize>,
}

impl RatioTree {
    pub fn new(residual_row_norms: &[f64], a_row_norms: &[f64]) -> Self {
        let leaves = residual_row_norms.len().next_power_of_two().max(1);
        let mut ratios = vec![f64::NEG_INFINITY; leaves];
        for (i, (&r, &a)) in residual_row_norms.iter().zip(a_row_norms).enumerate() {
            ratios[i] = r / a;
        }
        let mut nodes = vec![0; 2 * leaves];
        for i in 0..leaves {
            nodes[leaves + i] = i;
        }
        let mut tree = Self {
            leaves,
            ratios,
            nodes,
            scratch: Vec::new(),
        };
        for v in (1..leaves).rev() {
            tree.nodes[v] = tree.winner(tree.nodes[2 * v], tree.nodes[2 * v + 1]);
        }
        tree
    }

    #[inline]
    fn winner(&self, l: usize, r: usize) -> usize {
        if self.ratios[l] >= self.ratios[r] {
            l
        } else {
            r
        }
    }

    /// Sets row `i` from its residual and coefficient row norms.
    pub fn update(&mut self, i: usize, residual_row_norm: f64, a_row_norm: f64) {
        self.ratios[i] = residual_row_norm / a_row_norm;
        let mut v = (self.leaves + i) / 2;
        while v >= 1 {
            self.nodes[v] = self.winner(self.nodes[2 * v], self.nodes[2 * v + 1]);
            v /= 2;
        }
    }

    /// Sets every row in `rows` and repairs the tree level by level, visiting
    /// each shared ancestor once.
    pub fn update_many(&mut self, rows: impl IntoIterator<Item = usize>, residual_row_norms: &[f64], a_row_norms: &[f64]) {
        let mut level = std::mem::take(&mut self.scratch);
        level.clear();
        for i in rows {
            self.ratios[i] = residual_row_norms[i] / a_row_norms[i];
            level.push((self.leaves + i) / 2);
        }
        while level.first().is_some_and(|&v| v >= 1) {
            level.sort_unstable();
            level.dedup();
            for &v in &level {
                self.nodes[v] = self.winner(self.nodes[2 * v], self.nodes[2 * v + 1]);
            }
            for v in level.iter_mut() {
                *v /= 2;
            }
        }
        self.scratch = level;
    }

    /// Smallest index of the largest ratio; fails on a zero residual.
    pub fn argmax(&self) -> Result<usize> {
        let i = self.nodes[1.min(self.nodes.len() - 1)];
        if !(self.ratios[i] > 0.0) {
            return Err(Error::ZeroResidual);
        }
        Ok(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ratio_tree_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [1usize, 2, 5, 16, 37] {
            let a: Vec<f64> = (0..m).map(|_| 0.5 + rng.random::<f64>()).collect();
            // Coarse values force ties.
            let mut r: Vec<f64> = (0..m).map(|_| (rng.random::<f64>() * 4.0).floor() * a[0]).collect();
            let mut tree = RatioTree::new(&r, &a);
            for _ in 0..200 {
                assert_eq!(tree.argmax().ok(), mwrbk_select_from_norms(&r, &a).ok());
                let i = rng.random_range(0..m);
                r[i] = (rng.random::<f64>() * 4.0).floor() * a[i];
                if i % 2 == 0 {
                    tree.update(i, r[i], a[i]);
                } else {
                    let j = rng.random_range(0..m);
                    r[j] = (rng.random::<f64>() * 4.0).floor() * a[j];
                    tree.update_many([i, j], &r, &a);
                }
            }
        }
        assert!(RatioTree::new(&[0.0, 0.0], &[1.0, 1.0]).argmax().is_err());
    }

    #[test]
    fn cyclic_examples() {
        assert_eq!(cyclic_index(0, 3), 0);
        assert_eq!(cyclic_index(3, 3), 0);
        assert_eq!(cyclic_index(5, 3), 2);
    }

    #[test]
    fn single_row_sampler() {
        let s = RowSampler::new(&[4.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..100).all(|_| rbk_sample(&mut rng, &s) == 0));
        assert!(RowSampler::new(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn threshold_even_blend_example() {
        // A = I_2, R = [[3], [4]]: ratios 9 and 16, average 25 / 2.
        let d = greedy_threshold_from_norms(&[9.0, 16.0], &[1.0, 1.0], 2.0, 0.5).unwrap();
        assert!((d.threshold - 14.25).abs() < 1e-15);
        assert_eq!(d.candidates, vec![1]);
        assert_eq!(d.argmax, 1);
    }

    #[test]
    fn threshold_extremes() {
        let r = [1.0, 8.0, 3.0, 8.0];
        let a = [1.0, 2.0, 1.0, 2.0];
        let d0 = greedy_threshold_from_norms(&r, &a, 6.0, 0.0).unwrap();
        assert!((d0.threshold - 20.0 / 6.0).abs() < 1e-15);
        assert_eq!(d0.candidates, vec![1, 3]);
        let d1 = greedy_threshold_from_norms(&r, &a, 6.0, 1.0).unwrap();
        assert_eq!(d1.threshold, 4.0);
        assert_eq!(d1.candidates, vec![1, 3]);
        assert_eq!(d1.argmax, 1);
        assert!(greedy_threshold_from_norms(&[0.0, 0.0], &a[..2], 3.0, 0.5).is_err());
    }

    #[test]
    fn mwrbk_examples() {
        assert_eq!(mwrbk_select_from_norms(&[9.0, 16.0], &[1.0, 1.0]).unwrap(), 1);
        assert_eq!(mwrbk_select_from_norms(&[5.0, 5.0], &[1.0, 1.0]).unwrap(), 0);
        assert_eq!(mwrbk_select_from_norms(&[2.0], &[3.0]).unwrap(), 0);
        assert!(matches!(mwrbk_select_from_norms(&[0.0, 0.0], &[1.0, 1.0]), Err(Error::ZeroResidual)));
    }

    #[test]
    fn equal_ratios_keep_every_row() {
        let d = greedy_threshold_from_norms(&[0.1, 0.1, 0.1], &[1.0, 1.0, 1.0], 3.0, 0.3).unwrap();
        assert_eq!(d.candidates, vec![0, 1, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            counts[greedy_sample(&mut rng, &d)] += 1;
        }
        assert!(counts.iter().all(|&c| (c as f64 - 10_000.0).abs() < 400.0), "{counts:?}");
    }
}
