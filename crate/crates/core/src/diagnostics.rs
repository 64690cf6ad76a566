//! Monte Carlo error summaries.

/// Mean and batch-means standard error of a (possibly autocorrelated)
/// sequence, using ⌊√T⌋ non-overlapping batches of equal length. Leftover
/// values at the tail are excluded from the SE but included in the mean.
pub fn batch_means(values: &[f64]) -> (f64, f64) {
    let t = values.len();
    if t == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / t as f64;
    let batches = (t as f64).sqrt().floor() as usize;
    if batches < 2 {
        return (mean, 0.0);
    }
    let size = t / batches;
    let used = batches * size;
    let grand = values[..used].iter().sum::<f64>() / used as f64;
    let var_batch = values[..used]
        .chunks_exact(size)
        .map(|c| {
            let m = c.iter().sum::<f64>() / size as f64;
            (m - grand) * (m - grand)
        })
        .sum::<f64>()
        / (batches - 1) as f64;
    (mean, (var_batch / batches as f64).sqrt())
}

/// Mean and naive iid standard error.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// One-sample Kolmogorov–Smirnov statistic. Sorts `draws` in place.
pub fn ks_statistic(draws: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    draws.sort_by(f64::total_cmp);
    let n = draws.len() as f64;
    draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Median of a sample (average of the two middle values for even sizes).
pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// Linear-interpolation sample quantile (R type 7).
pub fn quantile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn iqr(values: &[f64]) -> f64 {
    quantile(values, 0.75) - quantile(values, 0.25)
}
