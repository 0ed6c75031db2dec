//! Linear-utility interval model `u(a0) = 0`, `u(a1) ∈ [β_i - σ, β_i + σ]`
//! with `β_i = β̄ - ε_i`, and the predicted effect of raising `u(a1)` by `Δ`.
//!
//! Wedges are returned as exact systems over `(β̄, σ)`; the quantile values
//! they contain are the exact binary expansions of the `f64` results.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::dist::Cdf;
use crate::error::{invalid, Result};
use crate::polytope::HalfspaceSystem;
use crate::rational::Rational;

fn check_interior(p1: f64) -> Result<()> {
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(invalid(format!("p1 must lie strictly between 0 and 1, got {p1}")));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid(format!("Δ must be positive, got {delta}")));
    }
    Ok(())
}

fn exact(value: f64) -> Result<Rational> {
    Rational::from_f64(value).ok_or_else(|| invalid(format!("non-finite value {value}")))
}

fn r(v: i64) -> Rational {
    Rational::from_integer(v)
}

/// `{(β̄, σ) : σ >= 0, β̄ - σ <= lower, upper <= β̄ + σ}` with bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wedge {
    pub distribution: String,
    /// `inf F⁻¹(p1|z)`; the plain quantile without an instrument.
    pub lower_quantile: f64,
    /// `sup F⁻¹(p1|z)`.
    pub upper_quantile: f64,
    /// Smallest σ in the region, `(upper - lower) / 2`.
    pub sigma_lower_bound: f64,
    /// Whether `σ = 0` (complete preferences) is excluded.
    pub rejects_complete: bool,
    /// The apex: the point with the smallest σ.
    pub apex: (f64, f64),
    pub system: HalfspaceSystem,
}

impl Wedge {
    fn build(cdf: &dyn Cdf, lower: f64, upper: f64) -> Result<Self> {
        let lo = exact(lower)?;
        let hi = exact(upper)?;
        let mut system = HalfspaceSystem::new(2);
        system.add_inequality(vec![r(1), r(-1)], lo.clone())?;
        system.add_inequality(vec![r(-1), r(-1)], -hi.clone())?;
        system.add_inequality(vec![r(0), r(-1)], Rational::zero())?;
        let sigma = ((&hi - &lo) / r(2)).to_f64();
        Ok(Wedge {
            distribution: cdf.name().to_string(),
            lower_quantile: lower,
            upper_quantile: upper,
            sigma_lower_bound: sigma,
            rejects_complete: hi > lo,
            apex: (((&hi + &lo) / r(2)).to_f64(), sigma),
            system,
        })
    }

    pub fn contains(&self, beta: f64, sigma: f64) -> Result<bool> {
        self.system.contains(&[exact(beta)?, exact(sigma)?])
    }
}

/// `{(β̄, σ) : σ >= 0, β̄ - σ <= F⁻¹(p1) <= β̄ + σ}`.
pub fn parametric_region(p1: f64, cdf: &dyn Cdf) -> Result<Wedge> {
    check_interior(p1)?;
    let q = cdf.quantile(p1);
    Wedge::build(cdf, q, q)
}

/// `{(β̄, σ) : β̄ - σ <= inf_z F⁻¹(p1|z), sup_z F⁻¹(p1|z) <= β̄ + σ}`.
pub fn parametric_region_iv(p1_by_z: &[f64], cdf: &dyn Cdf) -> Result<Wedge> {
    if p1_by_z.is_empty() {
        return Err(invalid("instrument table is empty"));
    }
    for &p in p1_by_z {
        check_interior(p)?;
    }
    let qs: Vec<f64> = p1_by_z.iter().map(|&p| cdf.quantile(p)).collect();
    let lo = qs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Wedge::build(cdf, lo, hi)
}

/// `(θ₀, θ₁) = (1 - F(β̄ + σ), F(β̄ - σ))`.
pub fn theta_from_parameters(beta: f64, sigma: f64, cdf: &dyn Cdf) -> Result<(f64, f64)> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(invalid("σ must be nonnegative"));
    }
    Ok((1.0 - cdf.cdf(beta + sigma), cdf.cdf(beta - sigma)))
}

/// `F(F⁻¹(p1) + Δ)`.
pub fn policy_complete(p1: f64, delta: f64, cdf: &dyn Cdf) -> Result<f64> {
    check_interior(p1)?;
    check_delta(delta)?;
    Ok(cdf.cdf(cdf.quantile(p1) + delta))
}

/// Where zero sits relative to the predicted effect interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectSign {
    /// The lower end is negative: the policy may reduce the share of `a1`.
    NegativePossible,
    /// The lower end is exactly zero.
    ZeroBoundary,
    StrictlyPositive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyInterval {
    pub p1: f64,
    pub sigma: f64,
    pub delta: f64,
    /// Bounds on the post-policy share `p1^Δ`.
    pub share: (f64, f64),
    /// Bounds on `p1^Δ - p1`.
    pub effect: (f64, f64),
    pub sign: EffectSign,
}

/// Union over `β̄ ∈ [F⁻¹(p1) - σ, F⁻¹(p1) + σ]` of
/// `[F(β̄ + Δ - σ), F(β̄ + Δ + σ)]`.
pub fn policy_incomplete_interval(p1: f64, sigma: f64, delta: f64, cdf: &dyn Cdf) -> Result<PolicyInterval> {
    check_interior(p1)?;
    check_delta(delta)?;
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("σ must be nonnegative, got {sigma}")));
    }
    let q = cdf.quantile(p1);
    let shift = delta - 2.0 * sigma;
    let sign = match shift.partial_cmp(&0.0).expect("finite") {
        Ordering::Less => EffectSign::NegativePossible,
        Ordering::Equal => EffectSign::ZeroBoundary,
        Ordering::Greater => EffectSign::StrictlyPositive,
    };
    let lower = if sign == EffectSign::ZeroBoundary { p1 } else { cdf.cdf(q + shift) };
    let upper = cdf.cdf(q + 2.0 * sigma + delta);
    Ok(PolicyInterval { p1, sigma, delta, share: (lower, upper), effect: (lower - p1, upper - p1), sign })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonparametricBounds {
    pub p1: f64,
    pub delta: f64,
    pub f_at_delta: f64,
    pub effect: (f64, f64),
    pub sign: EffectSign,
}

/// `p1^Δ - p1 ∈ [F(Δ) - p1, 1 - p1]`, where `F` is the CDF of `u̲₀ - ū₁`.
pub fn nonparametric_policy_bounds(p1: f64, delta: f64, f: &dyn Cdf) -> Result<NonparametricBounds> {
    if !(0.0..=1.0).contains(&p1) {
        return Err(invalid(format!("p1 must lie in [0, 1], got {p1}")));
    }
    check_delta(delta)?;
    let fd = f.cdf(delta);
    let lower = fd - p1;
    let sign = match lower.partial_cmp(&0.0).expect("finite") {
        Ordering::Less => EffectSign::NegativePossible,
        Ordering::Equal => EffectSign::ZeroBoundary,
        Ordering::Greater => EffectSign::StrictlyPositive,
    };
    let upper = 1.0 - p1;
    Ok(NonparametricBounds { p1, delta, f_at_delta: fd, effect: (lower.min(upper), upper.max(lower)), sign })
}

/// One row of a post-policy share band against Δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub delta: f64,
    pub complete: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `p1^Δ` bounds on an even grid of `steps` values of Δ in `(0, max_delta]`.
pub fn policy_band(p1: f64, sigma: f64, max_delta: f64, steps: usize, cdf: &dyn Cdf) -> Result<Vec<BandPoint>> {
    if steps == 0 {
        return Err(invalid("need at least one grid point"));
    }
    (1..=steps)
        .map(|k| {
            let delta = max_delta * k as f64 / steps as f64;
            let iv = policy_incomplete_interval(p1, sigma, delta, cdf)?;
            Ok(BandPoint { delta, complete: policy_complete(p1, delta, cdf)?, lower: iv.share.0, upper: iv.share.1 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{Logit, Probit, TabulatedCdf};

    #[test]
    fn wedge_apex() {
        let w = parametric_region(0.5, &Probit).unwrap();
        assert_eq!(w.apex, (0.0, 0.0));
        assert!(w.contains(0.0, 0.0).unwrap());
        assert!(w.contains(0.3, 0.5).unwrap());
        assert!(!w.contains(0.3, 0.2).unwrap());
        assert!(!w.rejects_complete);
        assert!(parametric_region(1.0, &Probit).is_err());
        assert!(parametric_region(0.0, &Logit).is_err());
    }

    #[test]
    fn instrument_wedges() {
        let w = parametric_region_iv(&[0.4, 0.6], &Logit).unwrap();
        assert!((w.sigma_lower_bound - (1.5f64).ln()).abs() < 1e-15);
        assert!(w.rejects_complete);
        assert!(!w.contains(0.0, 0.0).unwrap());
        let flat = parametric_region_iv(&[0.3, 0.3], &Probit).unwrap();
        assert_eq!(flat.sigma_lower_bound, 0.0);
        assert!(!flat.rejects_complete);
        assert!(parametric_region_iv(&[], &Probit).is_err());
    }

    #[test]
    fn complete_policy() {
        assert!((policy_complete(0.5, 1.0, &Logit).unwrap() - 0.731_058_578_630_004_9).abs() < 1e-15);
        assert!(policy_complete(0.5, 0.0, &Probit).is_err());
        assert!((policy_complete(0.3, 1e-9, &Probit).unwrap() - 0.3).abs() < 1e-8);
    }

    #[test]
    fn incomplete_policy_trichotomy() {
        let neg = policy_incomplete_interval(0.5, 1.0, 1.0, &Probit).unwrap();
        assert_eq!(neg.sign, EffectSign::NegativePossible);
        assert!(neg.effect.0 < 0.0);
        let zero = policy_incomplete_interval(0.5, 0.5, 1.0, &Probit).unwrap();
        assert_eq!(zero.sign, EffectSign::ZeroBoundary);
        assert_eq!(zero.effect.0, 0.0);
        let pos = policy_incomplete_interval(0.5, 0.25, 1.0, &Probit).unwrap();
        assert_eq!(pos.sign, EffectSign::StrictlyPositive);
        assert!(pos.effect.0 > 0.0);
        let collapsed = policy_incomplete_interval(0.3, 0.0, 0.7, &Logit).unwrap();
        let c = policy_complete(0.3, 0.7, &Logit).unwrap();
        assert_eq!(collapsed.share, (c, c));
    }

    #[test]
    fn nonparametric_examples() {
        let f = TabulatedCdf::new(vec![(0.0, 0.0), (1.0, 0.4), (2.0, 1.0)]).unwrap();
        let b = nonparametric_policy_bounds(0.6, 1.0, &f).unwrap();
        assert!((b.effect.0 + 0.2).abs() < 1e-12 && (b.effect.1 - 0.4).abs() < 1e-12);
        assert_eq!(b.sign, EffectSign::NegativePossible);
        let edge = nonparametric_policy_bounds(0.4, 1.0, &f).unwrap();
        assert_eq!(edge.sign, EffectSign::ZeroBoundary);
        assert_eq!(edge.effect.0, 0.0);
        assert!(nonparametric_policy_bounds(0.4, -1.0, &f).is_err());
    }

    #[test]
    fn band_rows() {
        let rows = policy_band(0.5, 0.5, 2.0, 4, &Probit).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.lower <= r.complete && r.complete <= r.upper));
        assert_eq!(rows[1].lower, 0.5);
    }
}
