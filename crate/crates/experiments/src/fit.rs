/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("log-log fit needs positive data, got ({x}, {y})")]
    NonPositiveData { x: f64, y: f64 },
    #[error("log-log fit needs at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("log-log fit needs at least two distinct abscissae")]
    DegenerateAbscissa,
}

/// Fewest points accepted by [`fit_loglog_slope`].
pub const MIN_FIT_POINTS: usize = 5;

/// Slope of `ln y` against `ln x` with its standard error.
pub fn fit_loglog_slope(x: &[f64], y: &[f64]) -> Result<SlopeFit, FitError> {
    let n = x.len().min(y.len());
    if n < MIN_FIT_POINTS || x.len() != y.len() {
        return Err(FitError::TooFewPoints {
            needed: MIN_FIT_POINTS,
            found: n,
        });
    }
    if let Some((&a, &b)) = x
        .iter()
        .zip(y)
        .find(|(a, b)| !(**a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite()))
    {
        return Err(FitError::NonPositiveData { x: a, y: b });
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let nf = n as f64;
    let mx = lx.iter().sum::<f64>() / nf;
    let my = ly.iter().sum::<f64>() / nf;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(FitError::DegenerateAbscissa);
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Ok(SlopeFit {
        slope,
        stderr: (rss / (nf - 2.0) / sxx).sqrt(),
        intercept,
        points: n,
    })
}
