//! Distribution statistics, mean-preserving spreads and the r-vs-g report.

use crate::domain::{Trajectory, WealthDistribution};
use crate::error::{Error, Result};

/// Inequality summary of one distribution plus the interest/growth pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub gini: f64,
    pub cv: f64,
    pub ratio_max_min: f64,
    pub r: Option<f64>,
    pub g: Option<f64>,
    pub r_minus_g: Option<f64>,
}

impl MetricsRow {
    pub fn from_distribution(dist: &WealthDistribution, r: Option<f64>, g: Option<f64>) -> Self {
        let x = dist.as_slice();
        Self {
            // a WealthDistribution is strictly positive, so neither can fail
            gini: gini(x).unwrap_or(0.0),
            cv: coefficient_of_variation(x).unwrap_or(0.0),
            ratio_max_min: ratio_max_min(x),
            r,
            g,
            r_minus_g: r.zip(g).map(|(r, g)| r - g),
        }
    }
}

fn check_nonnegative(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidDistribution("empty".into()));
    }
    if let Some(x) = values.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::InvalidDistribution(format!("entry {x} is negative")));
    }
    let total: f64 = values.iter().sum();
    if total == 0.0 {
        return Err(Error::AllZero);
    }
    Ok(total / values.len() as f64)
}

/// Gini coefficient `Σ_i Σ_j |x_i - x_j| / (2 n² μ)`, without the small-sample
/// `n/(n-1)` correction, so it lies in `[0, 1 - 1/n]`.
pub fn gini(values: &[f64]) -> Result<f64> {
    let mean = check_nonnegative(values)?;
    let n = values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    // Σ_i Σ_j |x_i - x_j| = 2 Σ_i (2i - n + 1) x_(i) for ascending order
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * i as f64 - n + 1.0) * x)
        .sum();
    Ok((2.0 * weighted / (2.0 * n * n * mean)).max(0.0))
}

/// Population standard deviation over the mean.
pub fn coefficient_of_variation(values: &[f64]) -> Result<f64> {
    let mean = check_nonnegative(values)?;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / values.len() as f64;
    Ok(var.sqrt() / mean)
}

pub fn ratio_max_min(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

/// Moves `epsilon` from `donor` to a weakly richer `recipient`.
///
/// The mean is unchanged and, for `epsilon > 0`, the variance strictly rises.
pub fn mean_preserving_spread(
    dist: &WealthDistribution,
    donor: usize,
    recipient: usize,
    epsilon: f64,
) -> Result<WealthDistribution> {
    let n = dist.len();
    if donor >= n || recipient >= n {
        return Err(Error::DimensionMismatch(format!(
            "household index out of range for {n} households"
        )));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::NonPositiveInput {
            what: "epsilon",
            value: epsilon,
        });
    }
    if donor == recipient || dist[recipient] < dist[donor] {
        return Err(Error::NotSpreadIncreasing { donor, recipient });
    }
    let remaining = dist[donor] - epsilon;
    if remaining <= 0.0 {
        return Err(Error::WouldViolatePositivity { remaining });
    }
    let mut v = dist.as_slice().to_vec();
    v[donor] = remaining;
    v[recipient] += epsilon;
    WealthDistribution::new(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RMinusG {
    pub t: f64,
    pub r: f64,
    pub g: f64,
    pub r_minus_g: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RMinusGReport {
    pub rows: Vec<RMinusG>,
    /// Last row where both channels exist.
    pub terminal: Option<RMinusG>,
}

/// `r(t) - g(t)` at every time index where both are recorded.
pub fn r_minus_g_series(traj: &Trajectory) -> RMinusGReport {
    let rows: Vec<RMinusG> = traj
        .points
        .iter()
        .filter_map(|p| {
            let (r, g) = (p.aggregate.interest?, p.aggregate.growth?);
            Some(RMinusG {
                t: p.time,
                r,
                g,
                r_minus_g: r - g,
            })
        })
        .collect();
    RMinusGReport {
        terminal: rows.last().copied(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // O(n²) definition, the oracle for the sorted formula.
    fn gini_pairs(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let s: f64 = x
            .iter()
            .flat_map(|a| x.iter().map(move |b| (a - b).abs()))
            .sum();
        s / (2.0 * n * n * mean)
    }

    fn dist(v: &[f64]) -> WealthDistribution {
        WealthDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_relative_eq!(gini(&[0.0, 1.0]).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(gini(&[1.0, 9.0]).unwrap(), 0.4, epsilon = 1e-15);
        assert_eq!(gini(&[0.0, 0.0]), Err(Error::AllZero));
        assert!(gini(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn gini_upper_bound_attained_by_concentration() {
        for n in 1..8 {
            let mut v = vec![0.0; n];
            v[0] = 3.0;
            assert_relative_eq!(gini(&v).unwrap(), 1.0 - 1.0 / n as f64, epsilon = 1e-14);
        }
    }

    #[test]
    fn cv_and_ratio() {
        assert_eq!(coefficient_of_variation(&[2.0, 2.0]).unwrap(), 0.0);
        assert_relative_eq!(
            coefficient_of_variation(&[1.0, 9.0]).unwrap(),
            0.8,
            epsilon = 1e-15
        );
        assert_eq!(ratio_max_min(&[1.0, 9.0]), 9.0);
    }

    #[test]
    fn spread_examples() {
        let s = mean_preserving_spread(&dist(&[4.0, 6.0]), 0, 1, 1.0).unwrap();
        assert_eq!(s.as_slice(), &[3.0, 7.0]);
        assert_eq!(s.mean(), 5.0);
        let s = mean_preserving_spread(&s, 0, 1, 2.0).unwrap();
        assert_eq!(s.as_slice(), &[1.0, 9.0]);
        let s = mean_preserving_spread(&dist(&[5.0, 5.0]), 0, 1, 0.0).unwrap();
        assert_eq!(s.as_slice(), &[5.0, 5.0]);
    }

    #[test]
    fn spread_errors() {
        let d = dist(&[4.0, 6.0]);
        assert!(matches!(
            mean_preserving_spread(&d, 1, 0, 1.0),
            Err(Error::NotSpreadIncreasing { .. })
        ));
        assert!(matches!(
            mean_preserving_spread(&d, 0, 0, 1.0),
            Err(Error::NotSpreadIncreasing { .. })
        ));
        assert!(matches!(
            mean_preserving_spread(&d, 0, 1, 4.0),
            Err(Error::WouldViolatePositivity { .. })
        ));
    }

    proptest! {
        #[test]
        fn gini_matches_pairwise_definition(v in prop::collection::vec(0.01f64..100.0, 1..12)) {
            let g = gini(&v).unwrap();
            prop_assert!((g - gini_pairs(&v)).abs() < 1e-12);
            prop_assert!(g >= 0.0 && g <= 1.0 - 1.0 / v.len() as f64 + 1e-12);
        }

        #[test]
        fn metrics_are_scale_invariant(v in prop::collection::vec(0.01f64..100.0, 2..10), lambda in 1e-3f64..1e3) {
            let scaled: Vec<f64> = v.iter().map(|x| x * lambda).collect();
            prop_assert!((gini(&v).unwrap() - gini(&scaled).unwrap()).abs() < 1e-12);
            prop_assert!((coefficient_of_variation(&v).unwrap() - coefficient_of_variation(&scaled).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn spread_raises_dispersion_keeps_mean(
            v in prop::collection::vec(0.1f64..10.0, 2..8),
            frac in 0.01f64..0.99,
            i in 0usize..8, j in 0usize..8,
        ) {
            let n = v.len();
            let (i, j) = (i % n, j % n);
            prop_assume!(i != j);
            let (donor, recipient) = if v[i] <= v[j] { (i, j) } else { (j, i) };
            let d = dist(&v);
            let eps = frac * d[donor];
            let s = mean_preserving_spread(&d, donor, recipient, eps).unwrap();
            prop_assert!((s.mean() - d.mean()).abs() <= 1e-15 * d.mean().max(1.0) * n as f64);
            prop_assert!(gini(s.as_slice()).unwrap() > gini(d.as_slice()).unwrap());
            prop_assert!(coefficient_of_variation(s.as_slice()).unwrap() > coefficient_of_variation(d.as_slice()).unwrap());
        }
    }
}
