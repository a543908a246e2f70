//! Closed-form optimal allocations and value functions, the Merton benchmark,
//! the green-vs-brown dominance condition, and the risk-aversion trade-off
//! solver.
//!
//! The HJB equation of the index-decomposed wealth problem admits a separable
//! solution: optimal weights are state-free,
//!
//! ```text
//! pi2 = lambda_g / (sqrt(1 - rho12^2) (1 - a_g))
//! pi3 = lambda_b / (sqrt(1 - rho13^2) (1 - a_b))
//! pi1 = lambda1 / (1 - a_m) - beta2 pi2 - beta3 pi3
//! ```
//!
//! and the value function is the utility times `exp(b (T - t))` with a
//! horizon-free coefficient `b`. Setting all three exponents to `a_m` recovers
//! the classical single-attribute solution, which doubles as the benchmark for
//! the trade-off: for a given `a_m`, the pairs `(a_g, a_b)` that keep `b`
//! equal to the benchmark coefficient form a curve along which the investor
//! re-expresses ESG preferences at no cost in satisfaction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::{derive_synthetics, ModelParams};
use crate::preferences::{utility_eval, RiskAversionProfile};
use crate::scalar::{fl, Scalar};

/// Portfolio weights in the index, green stock, and brown stock, plus the
/// implied cash position and market-factor exposure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AllocationResult<F> {
    pub pi1: F,
    pub pi2: F,
    pub pi3: F,
    /// `1 - pi1 - pi2 - pi3`; negative means leverage.
    #[serde(rename = "piCash")]
    pub pi_cash: F,
    /// Market-factor exposure `pi1 + beta2*pi2 + beta3*pi3`.
    #[serde(rename = "betaP")]
    pub beta_p: F,
}

impl<F: Scalar> AllocationResult<F> {
    /// Assembles the derived fields from raw weights.
    pub fn from_weights(params: &ModelParams<F>, weights: [F; 3]) -> Result<Self> {
        let synth = derive_synthetics(params)?;
        let [pi1, pi2, pi3] = weights;
        Ok(AllocationResult {
            pi1,
            pi2,
            pi3,
            pi_cash: F::one() - pi1 - pi2 - pi3,
            beta_p: pi1 + synth.beta2 * pi2 + synth.beta3 * pi3,
        })
    }

    pub fn weights(&self) -> [F; 3] {
        [self.pi1, self.pi2, self.pi3]
    }
}

/// Optimal weights for a profile with all exponents negative. Weights may be
/// negative: a negative brown price of risk makes shorting the brown stock
/// optimal.
pub fn optimal_weights<F: Scalar>(
    params: &ModelParams<F>,
    profile: &RiskAversionProfile<F>,
) -> Result<AllocationResult<F>> {
    profile.ensure_all_negative()?;
    let synth = derive_synthetics(params)?;
    let one = F::one();
    let pi2 = params.lambda_g
        / ((one - params.rho12 * params.rho12).sqrt() * (one - profile.alpha_g));
    let pi3 = params.lambda_b
        / ((one - params.rho13 * params.rho13).sqrt() * (one - profile.alpha_b));
    let pi1 = params.lambda1 / (one - profile.alpha_m) - synth.beta2 * pi2 - synth.beta3 * pi3;
    AllocationResult::from_weights(params, [pi1, pi2, pi3])
}

/// Exponential growth coefficient `b` of the value function (per period).
pub fn value_coefficient<F: Scalar>(
    params: &ModelParams<F>,
    profile: &RiskAversionProfile<F>,
) -> Result<F> {
    profile.ensure_all_negative()?;
    params.validate()?;
    let half = fl::<F>(0.5);
    let one = F::one();
    let [am, ag, ab] = profile.as_array();
    let m_term = params.lambda1 * params.sigma1;
    let g_term = params.lambda_g * params.sigma2;
    let b_term = params.lambda_b * params.sigma3;
    Ok(half * m_term * m_term * (am / (one - am))
        + half * g_term * g_term * (ag / (one - ag))
        + half * b_term * b_term * (ab / (one - ab))
        + (params.theta_m * am + params.theta_g * ag + params.theta_b * ab) * params.r)
}

/// Value function evaluation `J = u(x) * exp(b * t_remaining)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValueFunction<F> {
    pub j: F,
    pub b: F,
}

pub fn value_function<F: Scalar>(
    params: &ModelParams<F>,
    profile: &RiskAversionProfile<F>,
    x: [F; 3],
    t_remaining: F,
) -> Result<ValueFunction<F>> {
    if !(t_remaining >= F::zero()) {
        return Err(Error::domain(format!(
            "remaining horizon must be nonnegative, got {t_remaining}"
        )));
    }
    let b = value_coefficient(params, profile)?;
    let u = utility_eval(profile, x[0], x[1], x[2])?;
    Ok(ValueFunction {
        j: u * (b * t_remaining).exp(),
        b,
    })
}

/// Benchmark coefficient `b_M`: the value coefficient with every exponent set
/// to `alpha_m` and the whole cash return attributed through `alpha_m * r`.
pub fn merton_coefficient<F: Scalar>(params: &ModelParams<F>, alpha_m: F) -> Result<F> {
    if !(alpha_m < F::zero()) || !alpha_m.is_finite() {
        return Err(Error::domain(format!("alpha_m must be negative, got {alpha_m}")));
    }
    params.validate()?;
    let half = fl::<F>(0.5);
    let one = F::one();
    let m_term = params.lambda1 * params.sigma1;
    let g_term = params.lambda_g * params.sigma2;
    let b_term = params.lambda_b * params.sigma3;
    Ok(half
        * (m_term * m_term + g_term * g_term + b_term * b_term)
        * (alpha_m / (one - alpha_m))
        + alpha_m * params.r)
}

/// Single-risk-aversion benchmark solution and its scaling constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MertonBenchmark<F> {
    pub allocation: AllocationResult<F>,
    /// Benchmark value at the requested state and horizon.
    #[serde(rename = "jM")]
    pub j_m: F,
    /// Benchmark value coefficient.
    #[serde(rename = "bM")]
    pub b_m: F,
    /// Utility scaling aligning the benchmark with the index-attribute
    /// utility at the start.
    pub a: F,
    /// Wealth-to-index normalization `w0 / (x_m x_g x_b)`.
    pub c: F,
}

/// The benchmark solution: uniform exponents `alpha_m`, wealth-based utility
/// `a * w^alpha_m / alpha_m` scaled so that it matches the index-attribute
/// utility at the initial state `x` and wealth `w0`.
pub fn merton_benchmark<F: Scalar>(
    params: &ModelParams<F>,
    alpha_m: F,
    x: [F; 3],
    w0: F,
    t_remaining: F,
) -> Result<MertonBenchmark<F>> {
    if !(w0 > F::zero()) {
        return Err(Error::domain(format!("initial wealth must be positive, got {w0}")));
    }
    let profile = RiskAversionProfile::uniform(alpha_m);
    let allocation = optimal_weights(params, &profile)?;
    let b_m = merton_coefficient(params, alpha_m)?;
    let u0 = utility_eval(&profile, x[0], x[1], x[2])?;
    // a solves a * w0^alpha_m / alpha_m = u(x).
    let a = u0 * alpha_m / w0.powf(alpha_m);
    let j_m = a * w0.powf(alpha_m) / alpha_m * (b_m * t_remaining).exp();
    Ok(MertonBenchmark {
        allocation,
        j_m,
        b_m,
        a,
        c: w0 / (x[0] * x[1] * x[2]),
    })
}

/// Thresholds for the green allocation to dominate the brown one when the
/// premium ratio `m` exceeds one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominanceThresholds<F> {
    /// Green dominance requires `alpha_b` below this (`1 - m`).
    #[serde(rename = "alphaBUpper")]
    pub alpha_b_upper: F,
    /// ... and `alpha_g` above this (`1 - 1/m + alpha_b/m`), evaluated at the
    /// profile's `alpha_b`.
    #[serde(rename = "alphaGLower")]
    pub alpha_g_lower: F,
}

/// Green-vs-brown dominance diagnosis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenDominance<F> {
    /// Premium-adjusted ratio `(lambda_b / lambda_g) *
    /// sqrt((1 - rho12^2) / (1 - rho13^2))`.
    pub m: F,
    /// Whether the optimal green weight exceeds the brown weight for the
    /// given profile.
    #[serde(rename = "pi2GreaterThanPi3")]
    pub pi2_greater_than_pi3: bool,
    /// Present only when `m > 1`; with `m <= 1` every admissible profile
    /// allocates more to green than to brown.
    pub thresholds: Option<DominanceThresholds<F>>,
}

pub fn green_dominance<F: Scalar>(
    params: &ModelParams<F>,
    profile: &RiskAversionProfile<F>,
) -> Result<GreenDominance<F>> {
    if params.lambda_g == F::zero() {
        return Err(Error::domain("m is undefined for lambda_g = 0"));
    }
    let one = F::one();
    params.validate()?;
    let m = params.lambda_b / params.lambda_g
        * ((one - params.rho12 * params.rho12) / (one - params.rho13 * params.rho13)).sqrt();
    let allocation = optimal_weights(params, profile)?;
    let thresholds = (m > one).then(|| DominanceThresholds {
        alpha_b_upper: one - m,
        alpha_g_lower: one - one / m + profile.alpha_b / m,
    });
    Ok(GreenDominance {
        m,
        pi2_greater_than_pi3: allocation.pi2 > allocation.pi3,
        thresholds,
    })
}

fn curvature_ratio<F: Scalar>(alpha: F) -> F {
    alpha / (F::one() - alpha)
}

/// Solves the trade-off relation for `alpha_g`: given `alpha_m` and
/// `alpha_b <= alpha_m < 0`, the returned exponent makes the value coefficient
/// equal the benchmark coefficient, `b = b_M`.
///
/// Returns `Ok(None)` when no negative `alpha_g` can close the gap (the
/// brown-aversion surplus would require `alpha_g >= 0`). With the whole cash
/// return on the market index the relation is closed form; other theta splits
/// shift `b` through the `theta * alpha * r` term and are solved by a
/// bracketed bisection on `b(alpha_g) - b_M` to 1e-12.
pub fn tradeoff_solve<F: Scalar>(
    params: &ModelParams<F>,
    alpha_m: F,
    alpha_b: F,
) -> Result<Option<F>> {
    params.validate()?;
    if !(alpha_m < F::zero()) || !(alpha_b <= alpha_m) || !alpha_b.is_finite() {
        return Err(Error::domain(format!(
            "need alpha_b <= alpha_m < 0, got alpha_m = {alpha_m}, alpha_b = {alpha_b}"
        )));
    }
    if params.lambda_g == F::zero() {
        return Err(Error::domain(
            "trade-off is undefined for lambda_g = 0: the green asset carries no premium",
        ));
    }

    if params.theta_m == F::one() {
        let g_term = params.lambda_g * params.sigma2;
        let b_term = params.lambda_b * params.sigma3;
        let ratio = b_term * b_term / (g_term * g_term);
        let y = (F::one() + ratio) * curvature_ratio(alpha_m) - ratio * curvature_ratio(alpha_b);
        if y >= F::zero() || y <= -F::one() {
            return Ok(None);
        }
        return Ok(Some(y / (F::one() + y)));
    }

    // General theta split: bisection on the monotone-in-practice residual
    // b(alpha_g) - b_M over alpha_g in (-inf, 0).
    let b_m = merton_coefficient(params, alpha_m)?;
    let residual = |alpha_g: F| -> Result<F> {
        let profile = RiskAversionProfile::new(alpha_m, alpha_g, alpha_b);
        Ok(value_coefficient(params, &profile)? - b_m)
    };
    let tol = fl::<F>(1e-12).max(F::epsilon() * fl(16.0));

    // Scan on a geometric grid for a sign change.
    let mut lo = None;
    let mut prev: Option<(F, F)> = None;
    for k in -40..=40 {
        let alpha_g = -fl::<F>(2.0).powi(k);
        let res = residual(alpha_g)?;
        if res.abs() <= tol {
            return Ok(Some(alpha_g));
        }
        // Grid runs from -1e-12-ish up toward -1e12: residual increasing in
        // alpha_g means the sign change appears as the grid value decreases.
        let current = (alpha_g, res);
        if let Some((prev_a, prev_r)) = prev {
            if (prev_r > F::zero()) != (res > F::zero()) {
                lo = Some(((alpha_g, res), (prev_a, prev_r)));
                break;
            }
        }
        prev = Some(current);
    }
    let Some(((mut a_neg, mut r_neg), (mut a_pos, mut r_pos))) = lo else {
        return Ok(None);
    };
    if r_neg > F::zero() {
        std::mem::swap(&mut a_neg, &mut a_pos);
        std::mem::swap(&mut r_neg, &mut r_pos);
    }
    for _ in 0..500 {
        let mid = (a_neg + a_pos) * fl(0.5);
        let res = residual(mid)?;
        if res.abs() <= tol {
            return Ok(Some(mid));
        }
        if res < F::zero() {
            a_neg = mid;
        } else {
            a_pos = mid;
        }
        if (a_pos - a_neg).abs() <= F::epsilon() * a_neg.abs() {
            break;
        }
    }
    Ok(Some((a_neg + a_pos) * fl(0.5)))
}

/// One point of a trade-off sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint<F> {
    pub alpha_b: F,
    /// `None` marks grid points with no admissible solution.
    pub solution: Option<TradeoffSolution<F>>,
}

/// Solved trade-off pair with its allocation and (benchmark-equal) value
/// coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffSolution<F> {
    pub alpha_g: F,
    pub allocation: AllocationResult<F>,
    pub b: F,
}

/// Vectorized [`tradeoff_solve`] plus weights per solved pair.
pub fn tradeoff_curve<F: Scalar>(
    params: &ModelParams<F>,
    alpha_m: F,
    alpha_b_grid: &[F],
) -> Result<Vec<TradeoffPoint<F>>> {
    alpha_b_grid
        .iter()
        .map(|&alpha_b| {
            let solution = tradeoff_solve(params, alpha_m, alpha_b)?
                .map(|alpha_g| -> Result<TradeoffSolution<F>> {
                    let profile = RiskAversionProfile::new(alpha_m, alpha_g, alpha_b);
                    Ok(TradeoffSolution {
                        alpha_g,
                        allocation: optimal_weights(params, &profile)?,
                        b: value_coefficient(params, &profile)?,
                    })
                })
                .transpose()?;
            Ok(TradeoffPoint { alpha_b, solution })
        })
        .collect()
}
