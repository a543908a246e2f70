//! One-factor market model, synthetic-asset decomposition, and exact-path
//! simulation of the wealth indexes.
//!
//! The tradable assets are a market index and two rated stocks (green and
//! brown). Each stock loads on the index with a one-factor beta plus an
//! independent idiosyncratic Brownian source. Hedging the market exposure out
//! of a stock leaves a synthetic asset driven purely by that stock's own risk
//! source; wealth under constant weights then factors into three independent
//! log-normal indexes (market/green/brown), and the product of the three index
//! ratios recovers terminal wealth exactly.
//!
//! Simulation uses the exact per-step log-normal law: constant weights make
//! the per-period drift and diffusion of each index constant, so there is no
//! discretization bias at any step size.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{fl, Scalar};

/// Full parameter set of the three-risky-asset one-factor market.
///
/// All rate-like quantities are per period (months in the bundled
/// calibrations). `lambda1`, `lambda_g`, `lambda_b` are the prices of risk of
/// the market, green, and brown Brownian sources; the corresponding risk
/// premia are `lambda1*sigma1`, `lambda_g*sigma2`, `lambda_b*sigma3`.
///
/// The cash return `r` is attributed among the three wealth indexes via the
/// split weights `theta_m + theta_g + theta_b = 1`; the default puts the whole
/// cash account in the market index (`theta_m = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "F: serde::de::Deserialize<'de> + Scalar"))]
pub struct ModelParams<F> {
    /// Risk-free rate per period.
    pub r: F,
    /// Market price of risk.
    pub lambda1: F,
    /// Green price of risk.
    #[serde(rename = "lambdaG")]
    pub lambda_g: F,
    /// Brown price of risk.
    #[serde(rename = "lambdaB")]
    pub lambda_b: F,
    /// Per-period volatility of the index.
    pub sigma1: F,
    /// Per-period volatility of the green stock.
    pub sigma2: F,
    /// Per-period volatility of the brown stock.
    pub sigma3: F,
    /// Correlation of the green stock with the index.
    pub rho12: F,
    /// Correlation of the brown stock with the index.
    pub rho13: F,
    /// Cash-return split weight of the market index.
    #[serde(rename = "thetaM", default = "theta_m_default")]
    pub theta_m: F,
    /// Cash-return split weight of the green index.
    #[serde(rename = "thetaG", default = "theta_gb_default")]
    pub theta_g: F,
    /// Cash-return split weight of the brown index.
    #[serde(rename = "thetaB", default = "theta_gb_default")]
    pub theta_b: F,
}

fn theta_m_default<F: Scalar>() -> F {
    F::one()
}

fn theta_gb_default<F: Scalar>() -> F {
    F::zero()
}

impl<F: Scalar> ModelParams<F> {
    /// Checks the type invariants: positive volatilities, correlations
    /// strictly inside (-1, 1), theta split summing to one, and all fields
    /// finite.
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.r,
            self.lambda1,
            self.lambda_g,
            self.lambda_b,
            self.sigma1,
            self.sigma2,
            self.sigma3,
            self.rho12,
            self.rho13,
            self.theta_m,
            self.theta_g,
            self.theta_b,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("model parameters must be finite"));
        }
        for (name, sigma) in [
            ("sigma1", self.sigma1),
            ("sigma2", self.sigma2),
            ("sigma3", self.sigma3),
        ] {
            if sigma <= F::zero() {
                return Err(Error::domain(format!("{name} must be positive, got {sigma}")));
            }
        }
        // rho = +/-1 is rejected, not handled: the synthetic volatility
        // collapses and the optimal-weight formulas divide by sqrt(1 - rho^2).
        for (name, rho) in [("rho12", self.rho12), ("rho13", self.rho13)] {
            if rho.abs() >= F::one() {
                return Err(Error::domain(format!(
                    "{name} must lie strictly inside (-1, 1), got {rho}"
                )));
            }
        }
        let theta_sum = self.theta_m + self.theta_g + self.theta_b;
        if (theta_sum - F::one()).abs() > F::epsilon() * fl(8.0) {
            return Err(Error::domain(format!(
                "theta split must sum to 1, got {theta_sum}"
            )));
        }
        Ok(())
    }

    /// Parses parameters from their JSON representation.
    pub fn from_json_reader(reader: impl std::io::Read) -> Result<Self>
    where
        F: serde::de::DeserializeOwned,
    {
        let params: Self = serde_json::from_reader(reader)?;
        params.validate()?;
        Ok(params)
    }

    /// Serializes parameters to JSON. `f64` values survive a write/read
    /// round-trip bit-exactly.
    pub fn to_json_string(&self) -> Result<String>
    where
        F: Serialize,
    {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One-factor betas and non-spanned volatilities of the synthetic green and
/// brown assets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticCoefficients<F> {
    /// Green stock beta on the index.
    pub beta2: F,
    /// Brown stock beta on the index.
    pub beta3: F,
    /// Green idiosyncratic volatility `sigma2 * sqrt(1 - rho12^2)`.
    pub sigma_g: F,
    /// Brown idiosyncratic volatility `sigma3 * sqrt(1 - rho13^2)`.
    pub sigma_b: F,
}

/// Derives the synthetic-asset coefficients from the market parameters.
pub fn derive_synthetics<F: Scalar>(params: &ModelParams<F>) -> Result<SyntheticCoefficients<F>> {
    params.validate()?;
    Ok(SyntheticCoefficients {
        beta2: params.sigma2 / params.sigma1 * params.rho12,
        beta3: params.sigma3 / params.sigma1 * params.rho13,
        sigma_g: params.sigma2 * (F::one() - params.rho12 * params.rho12).sqrt(),
        sigma_b: params.sigma3 * (F::one() - params.rho13 * params.rho13).sqrt(),
    })
}

/// Terminal wealth from the three index ratios: `w0 * x_m * x_g * x_b`.
pub fn wealth_from_indexes<F: Scalar>(x_m: F, x_g: F, x_b: F, w0: F) -> Result<F> {
    for (name, v) in [("x_m", x_m), ("x_g", x_g), ("x_b", x_b), ("w0", w0)] {
        if !(v > F::zero()) || !v.is_finite() {
            return Err(Error::domain(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(w0 * x_m * x_g * x_b)
}

/// Per-period log dynamics of the three indexes and of wealth under a constant
/// weight vector: each index has constant drift and a constant loading on its
/// own Brownian source, so one period advances as
/// `drift + loading * sqrt(dt) * z` with `z` standard normal.
#[derive(Debug, Clone, Copy)]
pub struct IndexDynamics<F> {
    /// Per-period log drift of (market, green, brown) index.
    pub drift: [F; 3],
    /// Diffusion loading of each index on its own source.
    pub loading: [F; 3],
    /// Per-period log drift of wealth.
    pub wealth_drift: F,
}

impl<F: Scalar> IndexDynamics<F> {
    /// Builds the per-period law for the given constant weights
    /// `(pi1, pi2, pi3)`.
    pub fn new(params: &ModelParams<F>, weights: [F; 3]) -> Result<Self> {
        params.validate()?;
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::domain("portfolio weights must be finite"));
        }
        let synth = derive_synthetics(params)?;
        let [pi1, pi2, pi3] = weights;
        let half = fl::<F>(0.5);

        // Diffusion loadings: the market one aggregates all three assets'
        // index exposure (= beta_p * sigma1), the green/brown ones are the
        // positions in the synthetic assets.
        let s_m = pi1 * params.sigma1 + pi2 * params.sigma2 * params.rho12
            + pi3 * params.sigma3 * params.rho13;
        let s_g = pi2 * synth.sigma_g;
        let s_b = pi3 * synth.sigma_b;

        let excess_m = params.lambda1 * params.sigma1 * s_m;
        let excess_g = params.lambda_g * params.sigma2 * s_g;
        let excess_b = params.lambda_b * params.sigma3 * s_b;

        let drift = [
            params.theta_m * params.r + excess_m - half * s_m * s_m,
            params.theta_g * params.r + excess_g - half * s_g * s_g,
            params.theta_b * params.r + excess_b - half * s_b * s_b,
        ];
        // Wealth drift is computed from the wealth SDE itself rather than by
        // summing the index drifts; the two agree to rounding exactly when the
        // theta split sums to one, which the path-identity tests rely on.
        let wealth_drift =
            params.r + excess_m + excess_g + excess_b - half * (s_m * s_m + s_g * s_g + s_b * s_b);

        Ok(IndexDynamics {
            drift,
            loading: [s_m, s_g, s_b],
            wealth_drift,
        })
    }
}

/// Deterministic RNG for one (path, source) pair.
///
/// Seed derivation rule: every path/source pair gets its own ChaCha8 stream,
/// `stream = path * 4 + source` on the generator seeded with `seed`. Results
/// are therefore reproducible and independent of how paths are chunked across
/// threads.
pub fn path_rng(seed: u64, path: usize, source: usize) -> ChaCha8Rng {
    debug_assert!(source < 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((path as u64) * 4 + source as u64);
    rng
}

/// Simulated paths of the three log indexes and log wealth, plus the Brownian
/// increments that generated them.
///
/// Indexes are normalized to one at time zero, so the stored values are
/// `log X_{i,t}` and `log(W_t / W_0)`; rows are `(path, step)` with
/// `n_steps + 1` entries per path including the zero row.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle<F> {
    pub n_paths: usize,
    pub n_steps: usize,
    /// Step length in periods.
    pub dt: F,
    /// Time grid, `0..=n_steps` scaled by `dt`.
    pub times: Vec<F>,
    /// Log market index, row-major `[path][step]`.
    pub log_xm: Vec<F>,
    /// Log green index.
    pub log_xg: Vec<F>,
    /// Log brown index.
    pub log_xb: Vec<F>,
    /// Log relative wealth.
    pub log_w: Vec<F>,
    /// Standard normal increments of the market source, `[path][step]`.
    pub z_m: Vec<F>,
    /// Increments of the green source.
    pub z_g: Vec<F>,
    /// Increments of the brown source.
    pub z_b: Vec<F>,
    /// Seed the bundle was generated from.
    pub seed: u64,
}

impl<F: Scalar> PathBundle<F> {
    fn row(&self, path: usize) -> std::ops::Range<usize> {
        let cols = self.n_steps + 1;
        path * cols..(path + 1) * cols
    }

    /// Log values of one path: `(log_xm, log_xg, log_xb, log_w)` slices.
    pub fn path(&self, path: usize) -> (&[F], &[F], &[F], &[F]) {
        let r = self.row(path);
        (
            &self.log_xm[r.clone()],
            &self.log_xg[r.clone()],
            &self.log_xb[r.clone()],
            &self.log_w[r],
        )
    }

    /// Terminal `(log_xm, log_xg, log_xb)` of one path.
    pub fn terminal_logs(&self, path: usize) -> [F; 3] {
        let last = self.row(path).end - 1;
        [self.log_xm[last], self.log_xg[last], self.log_xb[last]]
    }

    /// Terminal log relative wealth of one path.
    pub fn terminal_log_w(&self, path: usize) -> F {
        self.log_w[self.row(path).end - 1]
    }

    /// Writes the bundle as CSV with columns
    /// `path,step,logXm,logXg,logXb,logW`.
    pub fn write_csv(&self, mut out: impl std::io::Write) -> Result<()> {
        writeln!(out, "path,step,logXm,logXg,logXb,logW")?;
        for p in 0..self.n_paths {
            let (xm, xg, xb, w) = self.path(p);
            for s in 0..=self.n_steps {
                writeln!(out, "{p},{s},{},{},{},{}", xm[s], xg[s], xb[s], w[s])?;
            }
        }
        Ok(())
    }
}

struct PathRow<F> {
    log_x: [Vec<F>; 3],
    log_w: Vec<F>,
    z: [Vec<F>; 3],
}

// The step index walks three parallel increment streams at once.
#[allow(clippy::needless_range_loop)]
fn simulate_one<F: Scalar>(
    law: &IndexDynamics<F>,
    dt: F,
    n_steps: usize,
    seed: u64,
    path: usize,
) -> PathRow<F>
where
    StandardNormal: Distribution<F>,
{
    let sqrt_dt = dt.sqrt();
    let mut z: [Vec<F>; 3] = [
        Vec::with_capacity(n_steps),
        Vec::with_capacity(n_steps),
        Vec::with_capacity(n_steps),
    ];
    for (source, stream) in z.iter_mut().enumerate() {
        let mut rng = path_rng(seed, path, source);
        for _ in 0..n_steps {
            stream.push(StandardNormal.sample(&mut rng));
        }
    }

    let mut log_x: [Vec<F>; 3] = [
        Vec::with_capacity(n_steps + 1),
        Vec::with_capacity(n_steps + 1),
        Vec::with_capacity(n_steps + 1),
    ];
    let mut log_w = Vec::with_capacity(n_steps + 1);
    for x in log_x.iter_mut() {
        x.push(F::zero());
    }
    log_w.push(F::zero());

    for k in 0..n_steps {
        let mut diffusion_sum = F::zero();
        for i in 0..3 {
            let shock = law.loading[i] * sqrt_dt * z[i][k];
            diffusion_sum = diffusion_sum + shock;
            let next = *log_x[i].last().unwrap() + law.drift[i] * dt + shock;
            log_x[i].push(next);
        }
        log_w.push(*log_w.last().unwrap() + law.wealth_drift * dt + diffusion_sum);
    }

    PathRow { log_x, log_w, z }
}

/// Simulates `n_paths` exact paths of the three log indexes and log wealth
/// over `horizon` periods split into `n_steps` equal steps.
///
/// Paths are generated from per-path ChaCha8 substreams (see [`path_rng`]),
/// so the output is bit-identical for a given seed regardless of thread
/// count or chunking.
pub fn simulate_paths<F: Scalar>(
    params: &ModelParams<F>,
    weights: [F; 3],
    horizon: F,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<PathBundle<F>>
where
    StandardNormal: Distribution<F>,
{
    if !(horizon > F::zero()) {
        return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
    }
    if n_steps == 0 || n_paths == 0 {
        return Err(Error::domain("n_steps and n_paths must be at least 1"));
    }
    let law = IndexDynamics::new(params, weights)?;
    let dt = horizon / fl::<F>(n_steps as f64);

    let rows: Vec<PathRow<F>> = (0..n_paths)
        .into_par_iter()
        .map(|p| simulate_one(&law, dt, n_steps, seed, p))
        .collect();

    let cols = n_steps + 1;
    let mut bundle = PathBundle {
        n_paths,
        n_steps,
        dt,
        times: (0..=n_steps).map(|k| fl::<F>(k as f64) * dt).collect(),
        log_xm: Vec::with_capacity(n_paths * cols),
        log_xg: Vec::with_capacity(n_paths * cols),
        log_xb: Vec::with_capacity(n_paths * cols),
        log_w: Vec::with_capacity(n_paths * cols),
        z_m: Vec::with_capacity(n_paths * n_steps),
        z_g: Vec::with_capacity(n_paths * n_steps),
        z_b: Vec::with_capacity(n_paths * n_steps),
        seed,
    };
    for row in rows {
        let [xm, xg, xb] = row.log_x;
        bundle.log_xm.extend(xm);
        bundle.log_xg.extend(xg);
        bundle.log_xb.extend(xb);
        bundle.log_w.extend(row.log_w);
        let [zm, zg, zb] = row.z;
        bundle.z_m.extend(zm);
        bundle.z_g.extend(zg);
        bundle.z_b.extend(zb);
    }
    Ok(bundle)
}
