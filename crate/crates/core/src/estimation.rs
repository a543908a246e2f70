//! Parameter calibration from price and rate data, and the algebraic
//! inversion of the drift structure into prices of risk.
//!
//! The estimator is deliberately the simplest one consistent with the
//! constant-parameter model: sample moments of monthly log returns, an Ito
//! correction to convert mean log returns into arithmetic drifts, Pearson
//! correlations against the index, and the mean T-bill yield as the
//! per-period rate. The model forces `corr(green, brown) = rho12 * rho13`;
//! the estimate reports the empirical green-brown correlation next to that
//! implied value as a model diagnostic rather than fitting it.

use std::collections::BTreeMap;
use std::io::Read;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::ModelParams;
use crate::scalar::{fl, Scalar};

/// Ticker symbols identifying panel roles in the prices file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PanelTickers {
    pub index: String,
    pub green: String,
    pub brown: String,
}

impl PanelTickers {
    pub fn new(index: &str, green: &str, brown: &str) -> Self {
        PanelTickers {
            index: index.to_string(),
            green: green.to_string(),
            brown: brown.to_string(),
        }
    }
}

/// Date-aligned price and yield series. Dates are ISO-8601 strings, strictly
/// increasing; every retained date carries all three prices and a yield.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel<F> {
    pub dates: Vec<String>,
    pub index: Vec<F>,
    pub green: Vec<F>,
    pub brown: Vec<F>,
    /// Per-period (monthly) risk-free yields.
    pub yield_monthly: Vec<F>,
}

impl<F: Scalar> PricePanel<F> {
    /// Number of return observations, one less than the aligned dates.
    pub fn n_returns(&self) -> usize {
        self.dates.len().saturating_sub(1)
    }
}

const MIN_OBSERVATIONS: usize = 24;

fn find_column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers.iter().position(|h| h == name).ok_or(Error::Parse {
        row: 1,
        message: format!("missing column `{name}`"),
    })
}

/// Loads and inner-joins the prices CSV (`date,ticker,adj_close`) and the
/// rates CSV (`date,yield_annualized`, converted to monthly by /12) into a
/// panel. Requires at least 24 aligned observations.
pub fn load_panel<F: Scalar>(
    prices_csv: impl Read,
    rates_csv: impl Read,
    tickers: &PanelTickers,
) -> Result<PricePanel<F>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(prices_csv);
    let headers = reader.headers()?.clone();
    let date_col = find_column(&headers, "date")?;
    let ticker_col = find_column(&headers, "ticker")?;
    let price_col = find_column(&headers, "adj_close")?;

    // date -> (index, green, brown) prices; rows for other tickers are ignored.
    let mut by_date: BTreeMap<String, [Option<F>; 3]> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let ticker = record.get(ticker_col).unwrap_or("").trim();
        let slot = if ticker == tickers.index {
            0
        } else if ticker == tickers.green {
            1
        } else if ticker == tickers.brown {
            2
        } else {
            continue;
        };
        let date = record.get(date_col).unwrap_or("").trim().to_string();
        let raw = record.get(price_col).unwrap_or("").trim();
        let price: f64 = raw.parse().map_err(|_| Error::Parse {
            row,
            message: format!("adj_close `{raw}` is not a number"),
        })?;
        if !(price > 0.0) {
            return Err(Error::Parse {
                row,
                message: format!("adj_close must be positive, got {price} for {ticker}"),
            });
        }
        let entry = by_date.entry(date.clone()).or_insert([None; 3]);
        if entry[slot].is_some() {
            return Err(Error::Parse {
                row,
                message: format!("duplicate price for {ticker} on {date}"),
            });
        }
        entry[slot] = Some(fl(price));
    }

    let mut rates_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(rates_csv);
    let rate_headers = rates_reader.headers()?.clone();
    let rate_date_col = find_column(&rate_headers, "date")?;
    let yield_col = find_column(&rate_headers, "yield_annualized")?;
    let mut rates: BTreeMap<String, F> = BTreeMap::new();
    for (i, record) in rates_reader.records().enumerate() {
        let row = i + 2;
        let record = record?;
        let date = record.get(rate_date_col).unwrap_or("").trim().to_string();
        let raw = record.get(yield_col).unwrap_or("").trim();
        let annual: f64 = raw.parse().map_err(|_| Error::Parse {
            row,
            message: format!("yield_annualized `{raw}` is not a number"),
        })?;
        if rates.insert(date.clone(), fl(annual / 12.0)).is_some() {
            return Err(Error::Parse {
                row,
                message: format!("duplicate rate for {date}"),
            });
        }
    }

    let mut panel = PricePanel {
        dates: Vec::new(),
        index: Vec::new(),
        green: Vec::new(),
        brown: Vec::new(),
        yield_monthly: Vec::new(),
    };
    for (date, prices) in &by_date {
        let (Some(p1), Some(p2), Some(p3)) = (prices[0], prices[1], prices[2]) else {
            continue;
        };
        let Some(&rate) = rates.get(date) else {
            continue;
        };
        panel.dates.push(date.clone());
        panel.index.push(p1);
        panel.green.push(p2);
        panel.brown.push(p3);
        panel.yield_monthly.push(rate);
    }

    if panel.dates.len() < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_OBSERVATIONS} aligned observations, got {}",
            panel.dates.len()
        )));
    }
    Ok(panel)
}

/// Sample moments of the monthly log returns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimates<F> {
    /// Ito-corrected arithmetic drifts (mean log return + sigma^2/2) of the
    /// index, green, and brown series.
    pub mu: [F; 3],
    /// Sample standard deviations of the log returns.
    pub sigma: [F; 3],
    pub rho12: F,
    pub rho13: F,
    /// Empirical green-brown correlation (model-implied value is
    /// `rho12 * rho13`).
    #[serde(rename = "greenBrownCorr")]
    pub green_brown_corr: F,
    /// Mean per-period risk-free yield.
    pub r: F,
    #[serde(rename = "nReturns")]
    pub n_returns: usize,
    /// Asymptotic standard errors of the sigma estimates.
    #[serde(rename = "seSigma")]
    pub se_sigma: [F; 3],
    /// Asymptotic standard errors of (rho12, rho13).
    #[serde(rename = "seRho")]
    pub se_rho: [F; 2],
}

fn log_returns<F: Scalar>(prices: &[F]) -> Vec<F> {
    prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect()
}

fn mean<F: Scalar>(xs: &[F]) -> F {
    xs.iter().fold(F::zero(), |acc, x| acc + *x) / fl(xs.len() as f64)
}

fn sample_std<F: Scalar>(xs: &[F], mu: F) -> F {
    let ss = xs
        .iter()
        .fold(F::zero(), |acc, x| acc + (*x - mu) * (*x - mu));
    (ss / fl(xs.len() as f64 - 1.0)).sqrt()
}

fn pearson<F: Scalar>(xs: &[F], ys: &[F]) -> F {
    let mx = mean(xs);
    let my = mean(ys);
    let mut cov = F::zero();
    let mut vx = F::zero();
    let mut vy = F::zero();
    for (x, y) in xs.iter().zip(ys) {
        cov = cov + (*x - mx) * (*y - my);
        vx = vx + (*x - mx) * (*x - mx);
        vy = vy + (*y - my) * (*y - my);
    }
    cov / (vx * vy).sqrt()
}

/// Estimates volatilities, correlations against the index, drifts, and the
/// mean risk-free rate from a panel.
pub fn estimate_sigmas_rhos<F: Scalar>(panel: &PricePanel<F>) -> Result<MomentEstimates<F>> {
    let n = panel.n_returns();
    if n < MIN_OBSERVATIONS - 1 {
        return Err(Error::InsufficientData(format!(
            "need at least {} returns, got {n}",
            MIN_OBSERVATIONS - 1
        )));
    }
    let series = [
        log_returns(&panel.index),
        log_returns(&panel.green),
        log_returns(&panel.brown),
    ];
    let names = ["index", "green", "brown"];
    let mut mu = [F::zero(); 3];
    let mut sigma = [F::zero(); 3];
    let mut se_sigma = [F::zero(); 3];
    let half = fl::<F>(0.5);
    for i in 0..3 {
        let m = mean(&series[i]);
        let s = sample_std(&series[i], m);
        if s <= F::zero() {
            return Err(Error::domain(format!(
                "{} series has zero variance; cannot calibrate",
                names[i]
            )));
        }
        sigma[i] = s;
        mu[i] = m + half * s * s;
        se_sigma[i] = s / (fl::<F>(2.0) * fl(n as f64 - 1.0)).sqrt();
    }
    let rho12 = pearson(&series[1], &series[0]);
    let rho13 = pearson(&series[2], &series[0]);
    let green_brown_corr = pearson(&series[1], &series[2]);
    let se = |rho: F| (F::one() - rho * rho) / fl::<F>(n as f64 - 1.0).sqrt();
    // The rate in effect over return period k is the yield observed at its
    // start, so the last yield observation is not consumed.
    let r = mean(&panel.yield_monthly[..n]);
    Ok(MomentEstimates {
        mu,
        sigma,
        rho12,
        rho13,
        green_brown_corr,
        r,
        n_returns: n,
        se_sigma,
        se_rho: [se(rho12), se(rho13)],
    })
}

/// Inverts the drift structure into prices of risk:
///
/// ```text
/// lambda1 = (mu1 - r) / sigma1^2
/// lambda_g = (mu2 - r - lambda1 sigma1 sigma2 rho12) / (sigma2^2 sqrt(1 - rho12^2))
/// lambda_b = (mu3 - r - lambda1 sigma1 sigma3 rho13) / (sigma3^2 sqrt(1 - rho13^2))
/// ```
///
/// Signs are unconstrained; a negative brown price of risk is a legitimate
/// calibration outcome.
pub fn backout_lambdas<F: Scalar>(
    mu: [F; 3],
    sigma: [F; 3],
    rho12: F,
    rho13: F,
    r: F,
) -> Result<[F; 3]> {
    if sigma.iter().any(|s| !(*s > F::zero())) {
        return Err(Error::domain("volatilities must be positive"));
    }
    if rho12.abs() >= F::one() || rho13.abs() >= F::one() {
        return Err(Error::domain("correlations must lie strictly inside (-1, 1)"));
    }
    let one = F::one();
    let lambda1 = (mu[0] - r) / (sigma[0] * sigma[0]);
    let lambda_g = (mu[1] - r - lambda1 * sigma[0] * sigma[1] * rho12)
        / (sigma[1] * sigma[1] * (one - rho12 * rho12).sqrt());
    let lambda_b = (mu[2] - r - lambda1 * sigma[0] * sigma[2] * rho13)
        / (sigma[2] * sigma[2] * (one - rho13 * rho13).sqrt());
    Ok([lambda1, lambda_g, lambda_b])
}

/// Calibrated model parameters with estimation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatedParams<F> {
    pub params: ModelParams<F>,
    #[serde(rename = "seSigma")]
    pub se_sigma: [F; 3],
    #[serde(rename = "seRho")]
    pub se_rho: [F; 2],
    #[serde(rename = "nReturns")]
    pub n_returns: usize,
    /// Empirical green-brown correlation of the data.
    #[serde(rename = "greenBrownCorr")]
    pub green_brown_corr: F,
    /// The value the one-factor structure forces, `rho12 * rho13`. A large
    /// gap to the empirical value flags model misfit, not an input error.
    #[serde(rename = "impliedGreenBrownCorr")]
    pub implied_green_brown_corr: F,
}

/// Full calibration pipeline: moments, then prices of risk, assembled into
/// [`ModelParams`] with the default cash split (`theta_m = 1`).
pub fn estimate_params<F: Scalar>(panel: &PricePanel<F>) -> Result<EstimatedParams<F>> {
    let moments = estimate_sigmas_rhos(panel)?;
    let [lambda1, lambda_g, lambda_b] = backout_lambdas(
        moments.mu,
        moments.sigma,
        moments.rho12,
        moments.rho13,
        moments.r,
    )?;
    let params = ModelParams {
        r: moments.r,
        lambda1,
        lambda_g,
        lambda_b,
        sigma1: moments.sigma[0],
        sigma2: moments.sigma[1],
        sigma3: moments.sigma[2],
        rho12: moments.rho12,
        rho13: moments.rho13,
        theta_m: F::one(),
        theta_g: F::zero(),
        theta_b: F::zero(),
    };
    params.validate()?;
    Ok(EstimatedParams {
        params,
        se_sigma: moments.se_sigma,
        se_rho: moments.se_rho,
        n_returns: moments.n_returns,
        green_brown_corr: moments.green_brown_corr,
        implied_green_brown_corr: moments.rho12 * moments.rho13,
    })
}
