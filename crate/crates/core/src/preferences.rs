//! Multivariate CRRA utility, risk-aversion diagnostics, and the ESG-score
//! parameterization of risk aversions.
//!
//! The investor's utility over the market/green/brown wealth indexes is
//! `u(x_m, x_g, x_b) = (x_m^a_m / a_m)(x_g^a_g / a_g)(x_b^a_b / a_b)` with one
//! curvature exponent per index. The working region is
//! `a_b <= a_m <= a_g < 0`: more risk-averse toward brown risk than green,
//! market in between. The `kappa` map ties the green/brown exponents to ESG
//! score gaps against the market, `a_i = a_m * exp(kappa * (E_m - E_i))`, so a
//! single sensitivity parameter expresses the investor's ESG tilt
//! independently of asset performance.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{fl, Scalar};

/// Wealth-index attribute of the multivariate utility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attribute {
    Market,
    Green,
    Brown,
}

impl Attribute {
    fn index(self) -> usize {
        match self {
            Attribute::Market => 0,
            Attribute::Green => 1,
            Attribute::Brown => 2,
        }
    }
}

/// Utility curvature exponents `(a_m, a_g, a_b)`, one per wealth index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskAversionProfile<F> {
    #[serde(rename = "alphaM")]
    pub alpha_m: F,
    #[serde(rename = "alphaG")]
    pub alpha_g: F,
    #[serde(rename = "alphaB")]
    pub alpha_b: F,
}

impl<F: Scalar> RiskAversionProfile<F> {
    pub fn new(alpha_m: F, alpha_g: F, alpha_b: F) -> Self {
        RiskAversionProfile {
            alpha_m,
            alpha_g,
            alpha_b,
        }
    }

    /// Merton-style profile: one exponent for every index.
    pub fn uniform(alpha: F) -> Self {
        Self::new(alpha, alpha, alpha)
    }

    pub fn as_array(&self) -> [F; 3] {
        [self.alpha_m, self.alpha_g, self.alpha_b]
    }

    /// The working region `a_b <= a_m <= a_g < 0`.
    pub fn is_admissible(&self) -> bool {
        self.alpha_b <= self.alpha_m && self.alpha_m <= self.alpha_g && self.alpha_g < F::zero()
    }

    /// Relaxed validity used by diagnostics: all exponents strictly negative,
    /// with no ordering requirement.
    pub fn all_negative(&self) -> bool {
        self.as_array().iter().all(|a| *a < F::zero() && a.is_finite())
    }

    pub(crate) fn ensure_nonzero(&self) -> Result<()> {
        if self.as_array().iter().any(|a| *a == F::zero() || !a.is_finite()) {
            return Err(Error::domain(
                "risk-aversion exponents must be finite and nonzero",
            ));
        }
        Ok(())
    }

    pub(crate) fn ensure_all_negative(&self) -> Result<()> {
        if !self.all_negative() {
            return Err(Error::domain(format!(
                "risk-aversion exponents must all be negative, got ({}, {}, {})",
                self.alpha_m, self.alpha_g, self.alpha_b
            )));
        }
        Ok(())
    }
}

fn ensure_positive_attributes<F: Scalar>(x: [F; 3]) -> Result<()> {
    if x.iter().any(|v| !(*v > F::zero()) || !v.is_finite()) {
        return Err(Error::domain(format!(
            "attributes must be positive, got ({}, {}, {})",
            x[0], x[1], x[2]
        )));
    }
    Ok(())
}

/// Evaluates the multivariate utility at positive attributes.
pub fn utility_eval<F: Scalar>(
    profile: &RiskAversionProfile<F>,
    x_m: F,
    x_g: F,
    x_b: F,
) -> Result<F> {
    profile.ensure_nonzero()?;
    ensure_positive_attributes([x_m, x_g, x_b])?;
    Ok(x_m.powf(profile.alpha_m) / profile.alpha_m
        * (x_g.powf(profile.alpha_g) / profile.alpha_g)
        * (x_b.powf(profile.alpha_b) / profile.alpha_b))
}

/// Utility in sign/log-magnitude form from log attributes:
/// returns `(sign, log|u|)` with
/// `log|u| = a_m*l_m + a_g*l_g + a_b*l_b - log|a_m*a_g*a_b|`.
///
/// This is the overflow-safe route the Monte Carlo oracle accumulates in; for
/// strongly negative exponents `|u|` itself can leave the `f64` range while
/// the log form stays finite.
pub fn log_utility_magnitude<F: Scalar>(
    profile: &RiskAversionProfile<F>,
    log_x: [F; 3],
) -> (F, F) {
    let [am, ag, ab] = profile.as_array();
    let product = am * ag * ab;
    let sign = if product > F::zero() { F::one() } else { -F::one() };
    let log_abs = am * log_x[0] + ag * log_x[1] + ab * log_x[2] - product.abs().ln();
    (sign, log_abs)
}

/// Closed-form risk-aversion diagnostics of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskAversionReport<F> {
    /// All marginal utilities positive: exponents share one sign.
    pub monotonic: bool,
    /// Hessian negative semidefinite: every exponent, pairwise sum, and the
    /// triple sum below one.
    pub km: bool,
    /// All mixed second partials nonpositive: every exponent negative.
    pub fr: bool,
    /// Alternating-sign higher cross partials; holds for this utility family
    /// at positive attributes regardless of the exponents.
    pub s: bool,
    /// Relative risk aversion per attribute, `1 - a_i`.
    pub rra: [F; 3],
}

/// Computes the closed-form diagnostics. Requires nonzero exponents.
pub fn risk_aversion_report<F: Scalar>(
    profile: &RiskAversionProfile<F>,
) -> Result<RiskAversionReport<F>> {
    profile.ensure_nonzero()?;
    let [am, ag, ab] = profile.as_array();
    let one = F::one();
    let zero = F::zero();

    let monotonic = (am > zero && ag > zero && ab > zero) || profile.all_negative();
    let km = am < one
        && ag < one
        && ab < one
        && am + ag < one
        && am + ab < one
        && ag + ab < one
        && am + ag + ab < one;
    let fr = profile.all_negative();

    Ok(RiskAversionReport {
        monotonic,
        km,
        fr,
        s: true,
        rra: [one - am, one - ag, one - ab],
    })
}

/// Absolute risk aversion toward one attribute at level `x`: `(1 - a_i) / x`.
pub fn absolute_risk_aversion<F: Scalar>(
    profile: &RiskAversionProfile<F>,
    attribute: Attribute,
    x: F,
) -> Result<F> {
    profile.ensure_nonzero()?;
    if !(x > F::zero()) {
        return Err(Error::domain(format!("attribute level must be positive, got {x}")));
    }
    Ok((F::one() - profile.as_array()[attribute.index()]) / x)
}

/// ESG scores of the market and of the two rated stocks on the 1 (worst) to
/// 10 (best) scale. Scores are stored as reals so averaged ratings survive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsgScoreTable<F> {
    #[serde(rename = "eMarket")]
    pub e_market: F,
    #[serde(rename = "eGreen")]
    pub e_green: F,
    #[serde(rename = "eBrown")]
    pub e_brown: F,
}

impl<F: Scalar> EsgScoreTable<F> {
    pub fn new(e_market: F, e_green: F, e_brown: F) -> Self {
        EsgScoreTable {
            e_market,
            e_green,
            e_brown,
        }
    }

    /// Range check: every score inside [1, 10].
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eMarket", self.e_market),
            ("eGreen", self.e_green),
            ("eBrown", self.e_brown),
        ] {
            if !(v >= F::one() && v <= fl(10.0)) {
                return Err(Error::domain(format!(
                    "{name} must lie in [1, 10], got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Whether the green/brown labels are consistent with the scores,
    /// `e_brown <= e_market <= e_green`. A false result is a warning for the
    /// caller, not an error: the formulas stay well defined.
    pub fn labeling_consistent(&self) -> bool {
        self.e_brown <= self.e_market && self.e_market <= self.e_green
    }

    /// Parses a score table from JSON.
    pub fn from_json_reader(reader: impl Read) -> Result<Self>
    where
        F: serde::de::DeserializeOwned,
    {
        let table: Self = serde_json::from_reader(reader)?;
        table.validate()?;
        Ok(table)
    }
}

/// Maps a market risk aversion and an ESG sensitivity `kappa` to a full
/// profile: `a_i = a_m * exp(kappa * (E_m - E_i))` for the green and brown
/// indexes.
///
/// With `e_brown <= e_market <= e_green` the result lands in the admissible
/// region `a_b <= a_m <= a_g < 0`; `kappa = 0` collapses to the uniform
/// Merton profile.
pub fn kappa_map<F: Scalar>(
    alpha_m: F,
    kappa: F,
    scores: &EsgScoreTable<F>,
) -> Result<RiskAversionProfile<F>> {
    if !(alpha_m < F::zero()) || !alpha_m.is_finite() {
        return Err(Error::domain(format!("alpha_m must be negative, got {alpha_m}")));
    }
    if !(kappa >= F::zero()) || !kappa.is_finite() {
        return Err(Error::domain(format!("kappa must be nonnegative, got {kappa}")));
    }
    scores.validate()?;
    Ok(RiskAversionProfile {
        alpha_m,
        alpha_g: alpha_m * (kappa * (scores.e_market - scores.e_green)).exp(),
        alpha_b: alpha_m * (kappa * (scores.e_market - scores.e_brown)).exp(),
    })
}

/// Marginal and percentage rates of substitution between two attributes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubstitutionRates<F> {
    /// `mrs_ij = (a_i * x_j) / (a_j * x_i)`.
    pub mrs: F,
    /// `prs_ij = a_j / a_i`; under the kappa map this equals
    /// `exp(kappa * (E_i - E_j))`.
    pub prs: F,
}

/// Substitution rates of attribute `i` against attribute `j` at levels
/// `(x_i, x_j)`.
pub fn mrs_prs<F: Scalar>(
    profile: &RiskAversionProfile<F>,
    i: Attribute,
    j: Attribute,
    x_i: F,
    x_j: F,
) -> Result<SubstitutionRates<F>> {
    profile.ensure_nonzero()?;
    if i == j {
        return Err(Error::domain("substitution rates need two distinct attributes"));
    }
    if !(x_i > F::zero()) || !(x_j > F::zero()) {
        return Err(Error::domain("attribute levels must be positive"));
    }
    let a = profile.as_array();
    let (ai, aj) = (a[i.index()], a[j.index()]);
    Ok(SubstitutionRates {
        mrs: ai * x_j / (aj * x_i),
        prs: aj / ai,
    })
}

/// An indifference curve of the green and brown indexes at a fixed utility
/// level and market-index value: the set `{ (x_g, x_b) : x_g^p1 * x_b^p2 = c }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndifferenceCurve<F> {
    /// Green exponent, `a_g / a_m`; equals `exp(kappa*(E_m - E_g))` under the
    /// kappa map.
    pub p1: F,
    /// Brown exponent, `a_b / a_m`.
    pub p2: F,
    /// Curve constant `((a_m a_g a_b) * u)^(1/a_m) / x_m`.
    pub c: F,
}

impl<F: Scalar> IndifferenceCurve<F> {
    /// Solves the curve equation for the brown index at a given green index.
    pub fn x_b_for_x_g(&self, x_g: F) -> Result<F> {
        if !(x_g > F::zero()) {
            return Err(Error::domain(format!("x_g must be positive, got {x_g}")));
        }
        Ok((self.c / x_g.powf(self.p1)).powf(F::one() / self.p2))
    }
}

/// Builds the indifference curve at a (negative) utility level and a fixed
/// market index value.
pub fn indifference_curve_level<F: Scalar>(
    profile: &RiskAversionProfile<F>,
    utility_level: F,
    x_m: F,
) -> Result<IndifferenceCurve<F>> {
    profile.ensure_nonzero()?;
    if !(utility_level < F::zero()) {
        return Err(Error::domain(format!(
            "utility level must be negative, got {utility_level}"
        )));
    }
    if !(x_m > F::zero()) {
        return Err(Error::domain(format!("x_m must be positive, got {x_m}")));
    }
    let [am, ag, ab] = profile.as_array();
    let scaled = am * ag * ab * utility_level;
    if !(scaled > F::zero()) {
        return Err(Error::domain(
            "alpha_m * alpha_g * alpha_b * u must be positive to define the curve",
        ));
    }
    Ok(IndifferenceCurve {
        p1: ag / am,
        p2: ab / am,
        c: scaled.powf(F::one() / am) / x_m,
    })
}

/// Letter-grade to score mapping used when averaging rating histories.
pub type LetterMap<F> = BTreeMap<String, F>;

/// The 10-notch rating ladder, D = 1 up to AAA = 10.
pub fn reprisk_ladder<F: Scalar>() -> LetterMap<F> {
    ["D", "C", "CC", "CCC", "B", "BB", "BBB", "A", "AA", "AAA"]
        .iter()
        .enumerate()
        .map(|(i, letter)| (letter.to_string(), fl(i as f64 + 1.0)))
        .collect()
}

/// Per-company averaged ESG scores plus the cross-company market score.
#[derive(Debug, Clone, PartialEq)]
pub struct EsgScores<F> {
    /// Arithmetic mean of the mapped ratings per company, keyed by name.
    pub companies: BTreeMap<String, F>,
    /// Mean of the per-company scores.
    pub market: F,
}

/// Averages a rating history CSV (`date,company,rating`) into per-company
/// scores and a market score.
pub fn esg_scores_from_ratings<F: Scalar>(
    ratings_csv: impl Read,
    letter_map: &LetterMap<F>,
) -> Result<EsgScores<F>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(ratings_csv);
    let headers = reader.headers()?.clone();
    for required in ["date", "company", "rating"] {
        if !headers.iter().any(|h| h == required) {
            return Err(Error::Parse {
                row: 1,
                message: format!("missing column `{required}`"),
            });
        }
    }
    let company_col = headers.iter().position(|h| h == "company").unwrap();
    let rating_col = headers.iter().position(|h| h == "rating").unwrap();

    let mut sums: BTreeMap<String, (F, usize)> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // 1-based, counting the header
        let record = record?;
        let company = record.get(company_col).unwrap_or("").trim();
        let rating = record.get(rating_col).unwrap_or("").trim();
        let score = letter_map.get(rating).ok_or_else(|| Error::Parse {
            row,
            message: format!("unknown rating letter `{rating}` for company `{company}`"),
        })?;
        let entry = sums.entry(company.to_string()).or_insert((F::zero(), 0));
        entry.0 = entry.0 + *score;
        entry.1 += 1;
    }
    if sums.is_empty() {
        return Err(Error::InsufficientData(
            "ratings file contains no observations".into(),
        ));
    }

    let companies: BTreeMap<String, F> = sums
        .into_iter()
        .map(|(name, (sum, count))| (name, sum / fl(count as f64)))
        .collect();
    let market =
        companies.values().fold(F::zero(), |acc, v| acc + *v) / fl(companies.len() as f64);
    Ok(EsgScores { companies, market })
}
