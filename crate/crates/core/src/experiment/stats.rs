/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `n` Bernoulli trials.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    assert!(n > 0, "wilson interval needs at least one trial");
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes as f64 == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        // 0 of 10: upper bound z²/(n+z²)
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!((hi - Z95 * Z95 / (10.0 + Z95 * Z95)).abs() < 1e-12);
        let (lo, hi) = wilson_interval(10, 10);
        assert!((lo - 10.0 / (10.0 + Z95 * Z95)).abs() < 1e-12);
        assert_eq!(hi, 1.0);
        // 50 of 100 → 0.5 ± 0.0962 (textbook value)
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.40383).abs() < 1e-4 && (hi - 0.59617).abs() < 1e-4);
    }
}
