//! Value coefficients of suboptimal constant-weight strategies and the
//! Green-Index wealth equivalent loss (GWEL).
//!
//! Any constant weight vector has a value function of the same separable shape
//! as the optimum, `u(x) * exp(b_star (T - t))`; since utility is negative,
//! suboptimality shows up as `b_star >= b` with equality only at the optimal
//! weights. The GWEL of a suboptimal strategy is the fraction `q` by which the
//! optimal investor's Green Index could shrink while still matching the
//! suboptimal investor's value:
//!
//! ```text
//! q = 1 - exp((b_star - b) * T / a_g)
//! ```
//!
//! Two named strategies get dedicated entry points: the Merton solution (one
//! risk aversion everywhere) and the no-green strategy (best allocation with
//! the green weight pinned to zero, whose GWEL collapses to a closed form
//! independent of everything but the green premium and `a_g`).

use serde::Serialize;

use crate::allocation::{value_coefficient, AllocationResult};
use crate::error::{Error, Result};
use crate::market::{derive_synthetics, ModelParams};
use crate::preferences::RiskAversionProfile;
use crate::scalar::{fl, Scalar};

/// Which suboptimal strategy a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyLabel {
    Merton,
    NoGreen,
    Custom,
}

impl std::fmt::Display for StrategyLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StrategyLabel::Merton => write!(f, "merton"),
            StrategyLabel::NoGreen => write!(f, "no-green"),
            StrategyLabel::Custom => write!(f, "custom"),
        }
    }
}

/// GWEL of one suboptimal strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelReport<F> {
    /// Value coefficient of the suboptimal strategy.
    #[serde(rename = "bStar")]
    pub b_star: F,
    /// Optimal value coefficient.
    #[serde(rename = "bOpt")]
    pub b_opt: F,
    /// Loss fraction. Mathematically in `[0, 1)`; in floating point it
    /// saturates to exactly 1 once the loss exceeds representable precision,
    /// so `log_one_minus_q` is the loss-free certificate of `q < 1`.
    pub q: F,
    /// `log(1 - q) = (b_star - b_opt) * T / a_g`, always finite and
    /// nonpositive for genuinely suboptimal strategies.
    #[serde(rename = "logOneMinusQ")]
    pub log_one_minus_q: F,
    pub strategy: StrategyLabel,
}

fn report_from_coefficients<F: Scalar>(
    b_star: F,
    b_opt: F,
    alpha_g: F,
    horizon: F,
    strategy: StrategyLabel,
) -> WelReport<F> {
    let log_one_minus_q = (b_star - b_opt) * horizon / alpha_g;
    WelReport {
        b_star,
        b_opt,
        // expm1 keeps q accurate when the exponent is tiny (alpha_g near 0
        // drives it toward 0, not the formula's cancellation).
        q: -log_one_minus_q.exp_m1(),
        log_one_minus_q,
        strategy,
    }
}

fn ensure_horizon<F: Scalar>(horizon: F) -> Result<()> {
    if !(horizon > F::zero()) {
        return Err(Error::domain(format!("horizon must be positive, got {horizon}")));
    }
    Ok(())
}

/// Value coefficient of an arbitrary fixed-weight strategy.
pub fn fixed_weight_value<F: Scalar>(
    params: &ModelParams<F>,
    profile: &RiskAversionProfile<F>,
    weights: [F; 3],
) -> Result<F> {
    profile.ensure_all_negative()?;
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::domain("weights must be finite"));
    }
    let synth = derive_synthetics(params)?;
    let alloc = AllocationResult::from_weights(params, weights)?;
    let [am, ag, ab] = profile.as_array();
    let half = fl::<F>(0.5);
    let one = F::one();

    let beta_p = alloc.beta_p;
    let s1 = params.sigma1;
    let m_terms = am * params.lambda1 * beta_p * s1 * s1
        - half * am * (one - am) * beta_p * beta_p * s1 * s1;
    let g_terms = ag * params.lambda_g * alloc.pi2 * params.sigma2 * synth.sigma_g
        - half * ag * (one - ag) * alloc.pi2 * alloc.pi2 * synth.sigma_g * synth.sigma_g;
    let b_terms = ab * params.lambda_b * alloc.pi3 * params.sigma3 * synth.sigma_b
        - half * ab * (one - ab) * alloc.pi3 * alloc.pi3 * synth.sigma_b * synth.sigma_b;
    let theta_term =
        (am * params.theta_m + ag * params.theta_g + ab * params.theta_b) * params.r;
    Ok(m_terms + g_terms + b_terms + theta_term)
}

/// GWEL of an arbitrary fixed-weight strategy over `horizon` periods.
pub fn gwel<F: Scalar>(
    params: &ModelParams<F>,
    profile: &RiskAversionProfile<F>,
    sub_weights: [F; 3],
    horizon: F,
) -> Result<WelReport<F>> {
    ensure_horizon(horizon)?;
    let b_star = fixed_weight_value(params, profile, sub_weights)?;
    let b_opt = value_coefficient(params, profile)?;
    Ok(report_from_coefficients(
        b_star,
        b_opt,
        profile.alpha_g,
        horizon,
        StrategyLabel::Custom,
    ))
}

/// Closed-form value coefficient of the Merton strategy (weights sized with
/// `alpha_m` everywhere) evaluated under the full profile.
pub fn merton_suboptimal_coefficient<F: Scalar>(
    params: &ModelParams<F>,
    profile: &RiskAversionProfile<F>,
) -> Result<F> {
    profile.ensure_all_negative()?;
    params.validate()?;
    let [am, ag, ab] = profile.as_array();
    let half = fl::<F>(0.5);
    let one = F::one();
    let m2 = params.lambda1 * params.sigma1 * params.lambda1 * params.sigma1;
    let g2 = params.lambda_g * params.sigma2 * params.lambda_g * params.sigma2;
    let b2 = params.lambda_b * params.sigma3 * params.lambda_b * params.sigma3;
    let denom = one - am;
    Ok(half * m2 * (am / denom) + g2 * ag / denom
        - half * g2 * ag * (one - ag) / (denom * denom)
        + b2 * ab / denom
        - half * b2 * ab * (one - ab) / (denom * denom)
        + (am * params.theta_m + ag * params.theta_g + ab * params.theta_b) * params.r)
}

/// GWEL of the Merton strategy.
pub fn q_merton<F: Scalar>(
    params: &ModelParams<F>,
    profile: &RiskAversionProfile<F>,
    horizon: F,
) -> Result<WelReport<F>> {
    ensure_horizon(horizon)?;
    let b_star = merton_suboptimal_coefficient(params, profile)?;
    let b_opt = value_coefficient(params, profile)?;
    Ok(report_from_coefficients(
        b_star,
        b_opt,
        profile.alpha_g,
        horizon,
        StrategyLabel::Merton,
    ))
}

/// Best weights under the constraint `pi2 = 0`: the brown position is
/// unchanged and the index position keeps only the brown hedge term.
pub fn no_green_weights<F: Scalar>(
    params: &ModelParams<F>,
    profile: &RiskAversionProfile<F>,
) -> Result<AllocationResult<F>> {
    profile.ensure_all_negative()?;
    let synth = derive_synthetics(params)?;
    let one = F::one();
    let pi3 = params.lambda_b
        / ((one - params.rho13 * params.rho13).sqrt() * (one - profile.alpha_b));
    let pi1 = params.lambda1 / (one - profile.alpha_m) - synth.beta3 * pi3;
    AllocationResult::from_weights(params, [pi1, F::zero(), pi3])
}

/// GWEL of refusing to hold the green stock:
/// `q = 1 - exp(-lambda_g^2 sigma2^2 T / (2 (1 - a_g)))`,
/// independent of the other exponents, the rate, and the theta split.
pub fn q_no_green<F: Scalar>(params: &ModelParams<F>, alpha_g: F, horizon: F) -> Result<F> {
    params.validate()?;
    ensure_horizon(horizon)?;
    if !(alpha_g < F::zero()) || !alpha_g.is_finite() {
        return Err(Error::domain(format!("alpha_g must be negative, got {alpha_g}")));
    }
    let g = params.lambda_g * params.sigma2;
    let exponent = -fl::<F>(0.5) * g * g * horizon / (F::one() - alpha_g);
    Ok(-exponent.exp_m1())
}
