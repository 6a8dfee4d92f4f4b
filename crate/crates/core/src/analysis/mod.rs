//! Error norms, DG norms and convergence-rate fitting.

mod norms;

use crate::error::{Error, Result};

pub use norms::{
    dg_error, dg_errors, dg_norm, dg_plus_norm, element_boundary_sum, error_degree, ls_data_norm_sq, ls_functional,
    nodal_max_error, skeleton_sum, volume_errors, Exact, Piecewise, VolumeErrors, SINGULAR_CUTOFF,
};

/// Metrics of one run. Fields a method does not produce are `None`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub method: String,
    pub k: f64,
    pub h: f64,
    pub p: usize,
    pub dofs: usize,
    pub n_lambda: f64,
    pub h1_semi_rel: Option<f64>,
    pub l2_rel: Option<f64>,
    pub norm_1k_rel: Option<f64>,
    pub dg_norm: Option<f64>,
    pub dg_plus_norm: Option<f64>,
    pub j_value: Option<f64>,
    pub nodal_max: Option<f64>,
    pub gamma_n: Option<f64>,
    pub solve_residual: Option<f64>,
}

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Default number of trailing points used by [`fit_rate`].
pub const RATE_WINDOW: usize = 4;

/// Fit `log(err) = slope log(x) + intercept` over the last `window` points.
pub fn fit_rate_window(series: &[(f64, f64)], window: usize) -> Result<RateFit> {
    if series.len() < 3 {
        return Err(Error::Parameter {
            name: "series",
            reason: format!("need at least 3 points, got {}", series.len()),
        });
    }
    if let Some(&(x, y)) = series.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::Parameter {
            name: "series",
            reason: format!("nonpositive point ({x}, {y})"),
        });
    }
    let tail = &series[series.len().saturating_sub(window.max(3))..];
    let pts: Vec<(f64, f64)> = tail.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Parameter {
            name: "series",
            reason: "all abscissae are equal".into(),
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit { slope, intercept, r2 })
}

pub fn fit_rate(series: &[(f64, f64)]) -> Result<RateFit> {
    fit_rate_window(series, RATE_WINDOW)
}
