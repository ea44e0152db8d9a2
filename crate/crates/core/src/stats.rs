//! Small statistical helpers used by the validation tooling.

/// Two-sample Kolmogorov-Smirnov distance. Sorts both inputs.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// One-sample Kolmogorov-Smirnov distance against a continuous CDF.
/// Sorts the input.
pub fn ks_one_sample<F: Fn(f64) -> f64>(x: &mut [f64], cdf: F) -> f64 {
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let c = cdf(v);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Effective sample size from batch means with `sqrt(n)` batches.
pub fn batch_means_ess(x: &[f64]) -> f64 {
    let n = x.len();
    let batches = (n as f64).sqrt().floor() as usize;
    if batches < 2 {
        return n as f64;
    }
    let size = n / batches;
    let means: Vec<f64> = x.chunks_exact(size).take(batches).map(mean).collect();
    let var = variance(x);
    let batch_var = variance(&means) * size as f64;
    if batch_var <= 0.0 {
        return n as f64;
    }
    (n as f64 * var / batch_var).min(n as f64)
}

/// Monte Carlo standard error of the mean using batch means.
pub fn mcse(x: &[f64]) -> f64 {
    (variance(x) / batch_means_ess(x)).sqrt()
}
