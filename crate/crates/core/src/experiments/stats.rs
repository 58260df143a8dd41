//! Small-sample statistics for Monte Carlo aggregates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator), 0 for one sample.
    pub std: f64,
    /// `std / √n`.
    pub se: f64,
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    let count = values.len();
    if count == 0 {
        return Err(Error::invalid("cannot summarize an empty sample"));
    }
    let mean = values.iter().sum::<f64>() / count as f64;
    let std = if count > 1 {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(Summary {
        count,
        mean,
        std,
        se: std / (count as f64).sqrt(),
    })
}

/// Ordinary least squares `y ≈ a + b x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_se: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::invalid("x and y differ in length"));
    }
    if n < 3 {
        return Err(Error::invalid("a slope error needs at least 3 points"));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("x values are all equal"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    Ok(LinearFit {
        intercept,
        slope,
        slope_se: (rss / (n - 2) as f64 / sxx).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_of_small_sample() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.se - s.std / 2.0).abs() < 1e-15);
        assert_eq!(summarize(&[0.3]).unwrap().std, 0.0);
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn fit_recovers_exact_line() {
        let x = [4.0, 5.0, 6.0, 7.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v| 1.5 - 0.25 * v).collect();
        let fit = linear_fit(&x, &y).unwrap();
        assert!((fit.slope + 0.25).abs() < 1e-14);
        assert!((fit.intercept - 1.5).abs() < 1e-13);
        assert!(fit.slope_se < 1e-14);
    }

    #[test]
    fn fit_standard_error_matches_hand_computation() {
        // residuals (0.1, -0.2, 0.1) around y = x: rss = 0.06, sxx = 2
        let fit = linear_fit(&[1.0, 2.0, 3.0], &[1.1, 1.8, 3.1]).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!((fit.slope_se - (0.06f64 / 1.0 / 2.0).sqrt()).abs() < 1e-12);
    }
}
