//! Empirical statistics: rank correlations, Kolmogorov-Smirnov distances
//! and small covariance helpers shared by tests, experiment reports and the
//! injection pipeline.

use nalgebra::DMatrix;

use crate::special::norm_cdf;
use crate::{Error, Result, SampleMatrix};

/// Mid-ranks (ties averaged), 1-based as in rank statistics.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let t = xs.len();
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut out = vec![0.0; t];
    let mut i = 0;
    while i < t {
        let mut j = i;
        while j + 1 < t && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Pearson correlation of two equally long slices.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::DimensionMismatch(
            "pearson needs equally long non-empty inputs".into(),
        ));
    }
    let t = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / t;
    let my = ys.iter().sum::<f64>() / t;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance in pearson".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    pearson(&ranks(xs), &ranks(ys))
}

/// Kendall tau-b via Knight's O(t log t) inversion counting.
pub fn kendall(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DimensionMismatch(
            "kendall needs equally long inputs of length >= 2".into(),
        ));
    }
    let t = xs.len();
    let mut idx: Vec<usize> = (0..t).collect();
    idx.sort_by(|&a, &b| {
        xs[a].partial_cmp(&xs[b])
            .unwrap()
            .then(ys[a].partial_cmp(&ys[b]).unwrap())
    });
    let y_sorted: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
    let x_sorted: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();

    fn tie_pairs<F: Fn(usize, usize) -> bool>(t: usize, same: F) -> f64 {
        let mut total = 0.0;
        let mut i = 0;
        while i < t {
            let mut j = i;
            while j + 1 < t && same(j + 1, i) {
                j += 1;
            }
            let run = (j - i + 1) as f64;
            total += run * (run - 1.0) / 2.0;
            i = j + 1;
        }
        total
    }

    // ties in x, and joint ties
    let t_x = tie_pairs(t, |a, b| x_sorted[a] == x_sorted[b]);
    let t_xy = {
        let mut total = 0.0;
        let mut i = 0;
        while i < t {
            let mut j = i;
            while j + 1 < t && x_sorted[j + 1] == x_sorted[i] && y_sorted[j + 1] == y_sorted[i] {
                j += 1;
            }
            let run = (j - i + 1) as f64;
            total += run * (run - 1.0) / 2.0;
            i = j + 1;
        }
        total
    };

    // merge sort counting discordant swaps
    fn merge_count(v: &mut Vec<f64>) -> f64 {
        let t = v.len();
        let mut buf = v.clone();
        let mut swaps = 0.0;
        let mut width = 1;
        while width < t {
            let mut lo = 0;
            while lo < t {
                let mid = (lo + width).min(t);
                let hi = (lo + 2 * width).min(t);
                let (mut i, mut j, mut k) = (lo, mid, lo);
                while i < mid && j < hi {
                    if v[i] <= v[j] {
                        buf[k] = v[i];
                        i += 1;
                    } else {
                        buf[k] = v[j];
                        swaps += (mid - i) as f64;
                        j += 1;
                    }
                    k += 1;
                }
                while i < mid {
                    buf[k] = v[i];
                    i += 1;
                    k += 1;
                }
                while j < hi {
                    buf[k] = v[j];
                    j += 1;
                    k += 1;
                }
                lo = hi;
            }
            std::mem::swap(v, &mut buf);
            width *= 2;
        }
        swaps
    }

    let mut ys_work = y_sorted.clone();
    let swaps = merge_count(&mut ys_work);
    // ties in y counted on the sorted-by-y sequence
    let mut y_for_ties = y_sorted;
    y_for_ties.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let t_y = tie_pairs(t, |a, b| y_for_ties[a] == y_for_ties[b]);

    let n0 = t as f64 * (t as f64 - 1.0) / 2.0;
    let concordant_minus_discordant = n0 - t_x - t_y + t_xy - 2.0 * swaps;
    let denom = ((n0 - t_x) * (n0 - t_y)).sqrt();
    if denom == 0.0 {
        return Err(Error::Degenerate("all pairs tied in kendall".into()));
    }
    Ok(concordant_minus_discordant / denom)
}

/// One-sample KS statistic against Uniform(0, 1).
pub fn ks_uniform(xs: &[f64]) -> f64 {
    let t = xs.len();
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut ks = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let lo = (x - i as f64 / t as f64).abs();
        let hi = (x - (i + 1) as f64 / t as f64).abs();
        ks = ks.max(lo.max(hi));
    }
    ks
}

/// One-sample KS statistic against the standard normal law.
pub fn ks_standard_normal(xs: &[f64]) -> f64 {
    let u: Vec<f64> = xs.iter().map(|&x| norm_cdf(x)).collect();
    ks_uniform(&u)
}

/// Column means of a sample matrix.
pub fn column_means(x: &SampleMatrix) -> Vec<f64> {
    let t = x.nrows() as f64;
    (0..x.ncols()).map(|c| x.column(c).sum() / t).collect()
}

/// Covariance matrix with 1/t normalization.
pub fn covariance(x: &SampleMatrix) -> DMatrix<f64> {
    let t = x.nrows();
    let n = x.ncols();
    let means = column_means(x);
    let mut centered = x.clone();
    for (c, &mean) in means.iter().enumerate() {
        centered.column_mut(c).add_scalar_mut(-mean);
    }
    let mut cov = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = centered.column(i).dot(&centered.column(j)) / t as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    cov
}

/// Empirical correlation matrix (unit diagonal).
pub fn correlation(x: &SampleMatrix) -> Result<DMatrix<f64>> {
    let cov = covariance(x);
    let n = cov.nrows();
    let mut cor = DMatrix::zeros(n, n);
    for i in 0..n {
        if cov[(i, i)] <= 0.0 {
            return Err(Error::Degenerate(format!("column {i} has zero variance")));
        }
    }
    for i in 0..n {
        for j in 0..n {
            cor[(i, j)] = cov[(i, j)] / (cov[(i, i)] * cov[(j, j)]).sqrt();
        }
    }
    Ok(cor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randsource::RngStream;

    #[test]
    fn kendall_matches_naive_on_small_inputs() {
        let mut rng = RngStream::new(77, 0);
        for trial in 0..20 {
            let t = 40 + trial;
            let xs: Vec<f64> = (0..t).map(|_| rng.uniform_open()).collect();
            let ys: Vec<f64> = xs
                .iter()
                .map(|&x| if trial % 2 == 0 { x + rng.uniform_open() } else { rng.uniform_open() })
                .collect();
            let fast = kendall(&xs, &ys).unwrap();
            let mut conc = 0.0;
            let mut disc = 0.0;
            for i in 0..t {
                for j in i + 1..t {
                    let s = (xs[i] - xs[j]) * (ys[i] - ys[j]);
                    if s > 0.0 {
                        conc += 1.0;
                    } else if s < 0.0 {
                        disc += 1.0;
                    }
                }
            }
            let naive = (conc - disc) / (t as f64 * (t as f64 - 1.0) / 2.0);
            assert!((fast - naive).abs() < 1e-12, "fast {fast} naive {naive}");
        }
    }

    #[test]
    fn spearman_of_monotone_transform_is_one() {
        let mut rng = RngStream::new(78, 0);
        let xs: Vec<f64> = (0..500).map(|_| rng.uniform_open()).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| x.powi(3) + 1.0).collect();
        assert!((spearman(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ks_detects_non_uniform() {
        let mut rng = RngStream::new(79, 0);
        let good: Vec<f64> = (0..50_000).map(|_| rng.uniform_open()).collect();
        assert!(ks_uniform(&good) < 0.01);
        let bad: Vec<f64> = good.iter().map(|u| u * u).collect();
        assert!(ks_uniform(&bad) > 0.1);
    }
}
