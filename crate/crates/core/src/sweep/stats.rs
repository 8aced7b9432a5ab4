//! Quartiles and Tukey-fence outlier counts.

/// Quantile `q` of `sorted` by linear interpolation between order
/// statistics (position `q * (n - 1)`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// `(Q1 - k IQR, Q3 + k IQR)`.
pub fn tukey_fences(values: &[f64], multiplier: f64) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    (q1 - multiplier * iqr, q3 + multiplier * iqr)
}

/// Number of values strictly outside the Tukey fences.
pub fn count_outliers(values: &[f64], multiplier: f64) -> usize {
    if values.is_empty() {
        return 0;
    }
    let (lo, hi) = tukey_fences(values, multiplier);
    values.iter().filter(|&&v| v < lo || v > hi).count()
}
