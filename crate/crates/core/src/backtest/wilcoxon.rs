//! One-sided Wilcoxon signed-rank test of H₁: a tends to exceed b.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Enumeration is used up to this many nonzero differences.
pub const EXACT_MAX: usize = 20;

struct Ranked {
    /// Doubled ranks of |dᵢ| (average ranks for ties), as integers.
    ranks2: Vec<usize>,
    /// Doubled W⁺.
    w2: usize,
    tie_sizes: Vec<usize>,
}

fn rank(a: &[f64], b: &[f64]) -> Result<Ranked> {
    if a.len() != b.len() {
        return Err(Error::Dimension("paired samples differ in length".into()));
    }
    if a.len() < 5 {
        return Err(Error::InvalidParameter(format!("need at least 5 pairs, got {}", a.len())));
    }
    let mut d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("differences must be finite".into()));
    }
    if d.is_empty() {
        return Err(Error::InvalidParameter("all paired differences are zero".into()));
    }
    d.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let mut ranks2 = vec![0; d.len()];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < d.len() {
        let mut j = i;
        while j + 1 < d.len() && d[j + 1].abs() == d[i].abs() {
            j += 1;
        }
        // Average of ranks i+1..=j+1, doubled.
        let r2 = i + 1 + j + 1;
        for r in &mut ranks2[i..=j] {
            *r = r2;
        }
        tie_sizes.push(j - i + 1);
        i = j + 1;
    }
    let w2 = d.iter().zip(&ranks2).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    Ok(Ranked { ranks2, w2, tie_sizes })
}

fn exact_upper_tail(r: &Ranked) -> f64 {
    let total: usize = r.ranks2.iter().sum();
    let mut counts = vec![0.0_f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &rk in &r.ranks2 {
        for s in (0..=reach).rev() {
            if counts[s] > 0.0 {
                counts[s + rk] += counts[s];
            }
        }
        reach += rk;
    }
    let all: f64 = counts.iter().sum();
    counts[r.w2..].iter().sum::<f64>() / all
}

fn normal_upper_tail(r: &Ranked) -> f64 {
    let n = r.ranks2.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let ties: f64 = r.tie_sizes.iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - ties / 48.0;
    let w = r.w2 as f64 / 2.0;
    let z = (w - mean - 0.5) / var.sqrt();
    Normal::standard().cdf(-z)
}

/// P(W⁺ ≥ observed) by enumerating all sign patterns.
pub fn wilcoxon_exact(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(exact_upper_tail(&rank(a, b)?))
}

/// Normal approximation with continuity and tie corrections.
pub fn wilcoxon_normal(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(normal_upper_tail(&rank(a, b)?))
}

/// Exact for at most [`EXACT_MAX`] nonzero differences, normal above.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<f64> {
    let r = rank(a, b)?;
    Ok(if r.ranks2.len() <= EXACT_MAX {
        exact_upper_tail(&r)
    } else {
        normal_upper_tail(&r)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_positive_differences() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [0.0; 5];
        assert!((wilcoxon_exact(&a, &b).unwrap() - 0.03125).abs() < 1e-15);
    }

    #[test]
    fn all_ties_error() {
        let a = [1.0; 6];
        assert!(wilcoxon_signed_rank(&a, &a).is_err());
    }

    #[test]
    fn all_negative_gives_one() {
        let a = [0.0; 5];
        let b = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!((wilcoxon_exact(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tied_ranks_average() {
        let r = rank(&[1.0, -1.0, 2.0, 3.0, 3.0], &[0.0; 5]).unwrap();
        assert_eq!(r.ranks2, vec![3, 3, 6, 9, 9]);
        assert_eq!(r.w2, 27);
    }
}
