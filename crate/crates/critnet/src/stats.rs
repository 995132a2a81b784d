//! Small statistical helpers: chi-square tests, least squares, intervals.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

/// Result of a chi-square test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: u64,
    pub p_value: f64,
    pub buckets: usize,
}

pub fn chi_square_sf(x: f64, df: u64) -> f64 {
    if df == 0 {
        return 1.0;
    }
    ChiSquared::new(df as f64)
        .map(|d| d.sf(x))
        .unwrap_or(f64::NAN)
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Goodness of fit of counts against probabilities.
///
/// `observed[k]` counts outcome k; `probs[k]` is its probability, and the
/// remaining mass 1 − ∑probs belongs to outcomes beyond the table (observed
/// values past the table are passed in `overflow`). Adjacent outcomes are
/// merged left to right until each bucket expects at least `min_expected`;
/// the leftover right tail is folded into the last bucket.
pub fn chi_square_gof(
    observed: &[u64],
    overflow: u64,
    probs: &[f64],
    min_expected: f64,
) -> Option<ChiSquare> {
    let total = observed.iter().sum::<u64>() + overflow;
    if total == 0 {
        return None;
    }
    let n = total as f64;
    let len = probs.len().max(observed.len());
    let mut buckets: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    let mut used_p = 0.0;
    for k in 0..len {
        o += observed.get(k).copied().unwrap_or(0) as f64;
        let p = probs.get(k).copied().unwrap_or(0.0);
        e += n * p;
        used_p += p;
        if e >= min_expected {
            buckets.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    o += overflow as f64;
    e += n * (1.0 - used_p).max(0.0);
    match buckets.last_mut() {
        Some(last) if e < min_expected => {
            last.0 += o;
            last.1 += e;
        }
        _ => buckets.push((o, e)),
    }
    if buckets.len() < 2 {
        return None;
    }
    let stat: f64 = buckets.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = buckets.len() as u64 - 1;
    Some(ChiSquare {
        statistic: stat,
        df,
        p_value: chi_square_sf(stat, df),
        buckets: buckets.len(),
    })
}

/// Homogeneity test of two histograms over the same outcomes, merging
/// adjacent outcomes until every expected cell count reaches `min_expected`.
pub fn chi_square_two_sample(a: &[u64], b: &[u64], min_expected: f64) -> ChiSquare {
    let len = a.len().max(b.len());
    let get = |h: &[u64], k: usize| h.get(k).copied().unwrap_or(0) as f64;
    let ta: f64 = a.iter().sum::<u64>() as f64;
    let tb: f64 = b.iter().sum::<u64>() as f64;
    let t = ta + tb;
    let mut rows: Vec<(f64, f64)> = Vec::new();
    let (mut x, mut y) = (0.0, 0.0);
    for k in 0..len {
        x += get(a, k);
        y += get(b, k);
        let r = x + y;
        if r * ta.min(tb) / t >= min_expected {
            rows.push((x, y));
            x = 0.0;
            y = 0.0;
        }
    }
    if x + y > 0.0 {
        match rows.last_mut() {
            Some(last) => {
                last.0 += x;
                last.1 += y;
            }
            None => rows.push((x, y)),
        }
    }
    let mut stat = 0.0;
    for &(x, y) in &rows {
        let r = x + y;
        let (ex, ey) = (r * ta / t, r * tb / t);
        stat += (x - ex) * (x - ex) / ex + (y - ey) * (y - ey) / ey;
    }
    let df = rows.len().saturating_sub(1) as u64;
    ChiSquare {
        statistic: stat,
        df,
        p_value: chi_square_sf(stat, df),
        buckets: rows.len(),
    }
}

/// Index-of-dispersion test for Poisson counts: ∑(x − x̄)²/x̄ ~ χ²(n−1).
/// Returns the two-sided p-value.
pub fn poisson_dispersion_p(counts: &[u64]) -> f64 {
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let (m, v) = mean_var(&xs);
    if !(m > 0.0) || counts.len() < 2 {
        return f64::NAN;
    }
    let df = counts.len() as u64 - 1;
    let stat = v * df as f64 / m;
    let upper = chi_square_sf(stat, df);
    (2.0 * upper.min(1.0 - upper)).min(1.0)
}

/// Ordinary least squares y = a + b·x.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_se: f64,
    pub df: u64,
    pub n: usize,
}

impl LinearFit {
    /// Two-sided confidence interval for the slope.
    pub fn slope_ci(&self, level: f64) -> (f64, f64) {
        let q = if self.df > 0 {
            StudentsT::new(0.0, 1.0, self.df as f64)
                .map(|t| t.inverse_cdf(0.5 + level / 2.0))
                .unwrap_or(f64::NAN)
        } else {
            f64::INFINITY
        };
        (
            self.slope - q * self.slope_se,
            self.slope + q * self.slope_se,
        )
    }
}

/// None when fewer than two distinct x values are present.
pub fn ols(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 1e-12 * (1.0 + mx * mx) * nf) {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let df = n as u64 - 2;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_se = if df > 0 {
        (rss / df as f64 / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    Some(LinearFit {
        intercept,
        slope,
        slope_se,
        df,
        n,
    })
}

pub fn normal_sf(z: f64) -> f64 {
    Normal::new(0.0, 1.0).map(|d| d.sf(z)).unwrap_or(f64::NAN)
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0)
        .map(|d| d.inverse_cdf(p))
        .unwrap_or(f64::NAN)
}

/// P(T > t) for Student's t with `df` degrees of freedom (df may be fractional).
pub fn student_t_sf(t: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df)
        .map(|d| d.sf(t))
        .unwrap_or(f64::NAN)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = normal_quantile(0.5 + level / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}
