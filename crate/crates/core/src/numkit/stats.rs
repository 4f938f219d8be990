use crate::error::{Error, Result};

/// The `⌈q·B⌉`-th order statistic of `samples` (1-based), with `B` the
/// sample count.
pub fn empirical_percentile(samples: &[f64], q: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "percentile level {q} outside (0, 1)"
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let b = sorted.len();
    let rank = ((q * b as f64).ceil() as usize).clamp(1, b);
    Ok(sorted[rank - 1])
}

/// Lower median: for an even count, the smaller of the two middle values.
pub fn lower_median(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[(sorted.len() - 1) / 2])
}

/// Sample mean and the standard error of the mean.
pub fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let m = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (m, 0.0);
    }
    let v = samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (m, (v / n as f64).sqrt())
}
