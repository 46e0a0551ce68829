//! Least-squares scaling fits of mean hop counts against `n`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::AnalysisError;

use super::sweep::{RecordStatus, SweepRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitModel {
    /// `hops ≈ A n^b`
    #[serde(rename = "powerlaw")]
    PowerLaw,
    /// `hops ≈ A (ln n)^b`
    #[serde(rename = "polylog")]
    PolyLog,
}

impl FitModel {
    fn abscissa(self, n: f64) -> f64 {
        match self {
            FitModel::PowerLaw => n.ln(),
            FitModel::PolyLog => n.ln().ln(),
        }
    }
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitModel::PowerLaw => "powerlaw",
            FitModel::PolyLog => "polylog",
        })
    }
}

impl FromStr for FitModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "powerlaw" => Ok(FitModel::PowerLaw),
            "polylog" => Ok(FitModel::PolyLog),
            other => Err(format!("unknown fit model `{other}` (expected powerlaw or polylog)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: FitModel,
    #[serde(rename = "A")]
    pub a: f64,
    pub b: f64,
    /// Root-mean-square residual on the log scale.
    pub residual: f64,
    /// Half-width of the 95% confidence interval for `b`.
    pub ci_b: f64,
    pub n_grid: Vec<u64>,
}

impl FitReport {
    pub fn predict(&self, n: f64) -> f64 {
        self.a * self.model.abscissa(n).exp().powf(self.b)
    }

    pub fn ci_excludes_zero(&self) -> bool {
        self.b - self.ci_b > 0.0 || self.b + self.ci_b < 0.0
    }
}

pub const MIN_FIT_POINTS: usize = 4;

/// Fits the mean hop count of delivered routes at each `n`.
pub fn fit_scaling(records: &[SweepRecord], model: FitModel) -> Result<FitReport, AnalysisError> {
    let mut sums: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.status == RecordStatus::Delivered) {
        let e = sums.entry(r.n).or_default();
        e.0 += r.hops_total as f64;
        e.1 += 1;
    }
    let points: Vec<(u64, f64)> = sums.into_iter().map(|(n, (s, k))| (n, s / k as f64)).collect();
    fit_points(&points, model)
}

/// Ordinary least squares of `ln h` on `ln n` (power law) or `ln ln n`
/// (polylog) over `(n, mean hops)` points.
pub fn fit_points(points: &[(u64, f64)], model: FitModel) -> Result<FitReport, AnalysisError> {
    let mut n_grid: Vec<u64> = points.iter().map(|p| p.0).collect();
    n_grid.sort_unstable();
    n_grid.dedup();
    if n_grid.len() < MIN_FIT_POINTS || n_grid.len() != points.len() {
        return Err(AnalysisError::InsufficientData(format!(
            "need at least {MIN_FIT_POINTS} distinct n values with delivered routes, got {}",
            n_grid.len()
        )));
    }
    if let Some(&(n, h)) = points.iter().find(|p| !(p.1 > 0.0 && p.1.is_finite()) || p.0 < 3) {
        return Err(AnalysisError::InsufficientData(format!(
            "cannot take logs of point (n={n}, hops={h})"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| model.abscissa(p.0 as f64)).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let ln_a = my - b * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - ln_a - b * x).powi(2)).sum();
    let dof = k - 2.0;
    let t = StudentsT::new(0.0, 1.0, dof)
        .expect("at least two degrees of freedom")
        .inverse_cdf(0.975);
    Ok(FitReport {
        model,
        a: ln_a.exp(),
        b,
        residual: (sse / k).sqrt(),
        ci_b: t * (sse / dof / sxx).sqrt(),
        n_grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(u64, f64)> = [10u64, 100, 1000, 10_000]
            .iter()
            .map(|&n| (n, (n as f64).sqrt()))
            .collect();
        let fit = fit_points(&pts, FitModel::PowerLaw).unwrap();
        assert_relative_eq!(fit.b, 0.5, max_relative = 1e-10);
        assert_relative_eq!(fit.a, 1.0, max_relative = 1e-10);
        assert!(fit.residual < 1e-12 && fit.ci_b < 1e-10);
    }

    #[test]
    fn exact_polylog() {
        let pts: Vec<(u64, f64)> = [1u64 << 12, 1 << 14, 1 << 16, 1 << 18]
            .iter()
            .map(|&n| (n, 3.0 * (n as f64).ln().powi(2)))
            .collect();
        let fit = fit_points(&pts, FitModel::PolyLog).unwrap();
        assert_relative_eq!(fit.b, 2.0, max_relative = 1e-10);
        assert_relative_eq!(fit.a, 3.0, max_relative = 1e-10);
        assert_relative_eq!(fit.predict(1e5), 3.0 * 1e5f64.ln().powi(2), max_relative = 1e-10);
    }

    #[test]
    fn ci_matches_textbook_regression() {
        // noisy points; slope and interval recomputed by hand below
        let ns = [10u64, 100, 1000, 10_000];
        let ys = [0.0, 1.1, 1.9, 3.1];
        let pts: Vec<(u64, f64)> = ns.iter().zip(ys).map(|(&n, y)| (n, f64::exp(y))).collect();
        let fit = fit_points(&pts, FitModel::PowerLaw).unwrap();
        let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let mx = xs.iter().sum::<f64>() / 4.0;
        let my = ys.iter().sum::<f64>() / 4.0;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let b = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx;
        let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - my - b * (x - mx)).powi(2)).sum();
        // t(0.975, 2) = 4.302652729911275
        let ci = 4.302_652_729_911_275 * (sse / 2.0 / sxx).sqrt();
        assert_relative_eq!(fit.b, b, max_relative = 1e-12);
        assert_relative_eq!(fit.ci_b, ci, max_relative = 1e-9);
        assert!(fit.ci_excludes_zero());
    }

    #[test]
    fn too_few_points() {
        let pts = [(100u64, 2.0), (1000, 3.0), (10_000, 4.0)];
        assert!(matches!(
            fit_points(&pts, FitModel::PowerLaw),
            Err(AnalysisError::InsufficientData(_))
        ));
        assert!(fit_scaling(&[], FitModel::PolyLog).is_err());
    }

    #[test]
    fn json_field_names() {
        let pts: Vec<(u64, f64)> = [10u64, 100, 1000, 10_000].iter().map(|&n| (n, n as f64)).collect();
        let json = serde_json::to_value(fit_points(&pts, FitModel::PowerLaw).unwrap()).unwrap();
        let keys: Vec<&String> = json.as_object().unwrap().keys().collect();
        for k in ["model", "A", "b", "residual", "ci_b", "n_grid"] {
            assert!(keys.iter().any(|x| *x == k), "{k} missing from {json}");
        }
        assert_eq!(json["model"], "powerlaw");
    }
}
