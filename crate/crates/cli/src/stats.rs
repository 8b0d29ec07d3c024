//! Ensemble statistics: interpolated quantiles, pointwise error summaries,
//! and exponential decay-rate fits on the log error norm.

use crate::CliError;

/// Error norms below this are treated as saturated at the numerical floor
/// and excluded from decay-rate fits.
pub const SATURATION_FLOOR: f64 = 1e-13;

/// Linear-interpolation empirical quantile: position `q * (N - 1)` on the
/// sorted values.
pub fn quantile(values: &[f64], q: f64) -> Result<f64, CliError> {
    if values.is_empty() {
        return Err(CliError::Numeric("quantile of empty input".into()));
    }
    assert!((0.0..=1.0).contains(&q), "quantile fraction out of range");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Least-squares slope of `ln(error)` vs `t` over `[start, end]`, excluding
/// floor-saturated samples. Requires at least 10 usable samples.
pub fn fit_decay_rate(
    times: &[f64],
    errors: &[f64],
    start: f64,
    end: f64,
) -> Result<f64, CliError> {
    assert_eq!(times.len(), errors.len());
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(errors)
        .filter(|&(&t, &e)| t >= start && t <= end && e > SATURATION_FLOOR)
        .map(|(&t, &e)| (t, e.ln()))
        .collect();
    if pts.len() < 10 {
        return Err(CliError::Numeric(format!(
            "decay fit needs >= 10 unsaturated samples in [{start}, {end}], found {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, y) in &pts {
        num += (t - mean_t) * (y - mean_y);
        den += (t - mean_t) * (t - mean_t);
    }
    if den == 0.0 {
        return Err(CliError::Numeric("decay fit needs a non-degenerate time window".into()));
    }
    Ok(num / den)
}

/// Pointwise min/median/80%-quantile/max of error norms across runs.
#[derive(Debug, Clone)]
pub struct EnsembleSummary {
    pub times: Vec<f64>,
    pub min: Vec<f64>,
    pub median: Vec<f64>,
    pub q80: Vec<f64>,
    pub max: Vec<f64>,
}

impl EnsembleSummary {
    /// `runs[r]` is the error-norm series of run `r` on the shared grid.
    pub fn from_runs(times: &[f64], runs: &[&[f64]]) -> Result<Self, CliError> {
        if runs.is_empty() {
            return Err(CliError::Numeric("ensemble summary of zero runs".into()));
        }
        for r in runs {
            if r.len() != times.len() {
                return Err(CliError::Numeric(
                    "ensemble runs must share the time grid".into(),
                ));
            }
        }
        let mut summary = Self {
            times: times.to_vec(),
            min: Vec::with_capacity(times.len()),
            median: Vec::with_capacity(times.len()),
            q80: Vec::with_capacity(times.len()),
            max: Vec::with_capacity(times.len()),
        };
        let mut column = vec![0.0; runs.len()];
        for i in 0..times.len() {
            for (r, run) in runs.iter().enumerate() {
                column[r] = run[i];
            }
            summary.min.push(quantile(&column, 0.0)?);
            summary.median.push(quantile(&column, 0.5)?);
            summary.q80.push(quantile(&column, 0.8)?);
            summary.max.push(quantile(&column, 1.0)?);
        }
        Ok(summary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_examples() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5).unwrap(), 3.0);
        assert_eq!(quantile(&v, 0.0).unwrap(), 1.0);
        assert_eq!(quantile(&v, 1.0).unwrap(), 5.0);
        // Interpolated position (N-1)q = 7.2 between 8 and 9.
        let v: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        assert!((quantile(&v, 0.8).unwrap() - 8.2).abs() < 1e-12);
    }

    #[test]
    fn quantile_unsorted_input() {
        let v = [5.0, 1.0, 3.0, 2.0, 4.0];
        assert_eq!(quantile(&v, 0.5).unwrap(), 3.0);
    }

    #[test]
    fn quantile_empty_errors() {
        assert!(quantile(&[], 0.5).is_err());
    }

    #[test]
    fn fit_exact_exponential() {
        let times: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
        let errors: Vec<f64> = times.iter().map(|t| (-0.5 * t).exp()).collect();
        let slope = fit_decay_rate(&times, &errors, 0.0, 10.0).unwrap();
        assert!((slope + 0.5).abs() < 1e-9, "slope {slope}");
    }

    #[test]
    fn fit_constant_has_zero_slope() {
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let errors = vec![0.25; times.len()];
        let slope = fit_decay_rate(&times, &errors, 0.0, 10.0).unwrap();
        assert!(slope.abs() < 1e-12);
    }

    #[test]
    fn fit_excludes_saturated_samples() {
        // Exponential decay that hits the floor halfway: the fit must use
        // only the unsaturated prefix and still recover the slope.
        let times: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.01).collect();
        let errors: Vec<f64> = times
            .iter()
            .map(|t| ((-2.0 * t).exp()).max(2e-14))
            .collect();
        let slope = fit_decay_rate(&times, &errors, 0.0, 20.0).unwrap();
        assert!((slope + 2.0).abs() < 1e-6, "slope {slope}");
        // All samples saturated: error.
        let sat = vec![1e-14; times.len()];
        assert!(fit_decay_rate(&times, &sat, 0.0, 20.0).is_err());
    }

    #[test]
    fn summary_is_pointwise_coherent() {
        let times: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let runs: Vec<Vec<f64>> = (0..7)
            .map(|r| times.iter().map(|t| ((r + 1) as f64) * (1.0 + t)).collect())
            .collect();
        let refs: Vec<&[f64]> = runs.iter().map(|r| r.as_slice()).collect();
        let s = EnsembleSummary::from_runs(&times, &refs).unwrap();
        for i in 0..times.len() {
            assert!(s.min[i] <= s.median[i]);
            assert!(s.median[i] <= s.q80[i]);
            assert!(s.q80[i] <= s.max[i]);
        }
    }
}
