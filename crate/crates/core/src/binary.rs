//! Two-alternative identification regions in the plane `(x, y) = (θ₁, θ₀)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::polytope::{ConvexRegion2D, Point2};
use crate::rational::Rational;

/// Choice shares conditional on one instrument value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionalPair {
    pub p0: Rational,
    pub p1: Rational,
}

impl ConditionalPair {
    pub fn new(p0: Rational, p1: Rational) -> Result<Self> {
        let pair = ConditionalPair { p0, p1 };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        check_pair(&self.p0, &self.p1)
    }
}

fn check_pair(p0: &Rational, p1: &Rational) -> Result<()> {
    if p0.is_negative() || p1.is_negative() {
        return Err(invalid("choice probabilities must be nonnegative"));
    }
    if p0 + p1 != Rational::one() {
        return Err(invalid(format!("p0 + p1 must equal 1, got {p0:?} + {p1:?}")));
    }
    Ok(())
}

fn check_unit(name: &str, value: &Rational) -> Result<()> {
    if value.is_negative() || *value > 1 {
        return Err(invalid(format!("{name} must lie in [0, 1], got {value:?}")));
    }
    Ok(())
}

fn check_gamma(gamma: &Rational) -> Result<()> {
    if gamma.is_negative() || *gamma >= 1 {
        return Err(invalid(format!("γ must lie in [0, 1), got {gamma:?}")));
    }
    Ok(())
}

/// Observed binary choice data. `p0`, `p1` are shares among those whose
/// choice is observed; `gamma` is the unobserved share of the population.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryObservation {
    pub p0: Rational,
    pub p1: Rational,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub instruments: BTreeMap<String, ConditionalPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi0: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi1: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Rational>,
}

impl BinaryObservation {
    pub fn new(p0: Rational, p1: Rational) -> Result<Self> {
        let obs = BinaryObservation { p0, p1, instruments: BTreeMap::new(), gamma: None, pi0: None, pi1: None, nu: None };
        obs.validate()?;
        Ok(obs)
    }

    pub fn with_instrument(mut self, z: impl Into<String>, p0: Rational, p1: Rational) -> Result<Self> {
        self.instruments.insert(z.into(), ConditionalPair::new(p0, p1)?);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_pair(&self.p0, &self.p1)?;
        for (z, pair) in &self.instruments {
            pair.validate().map_err(|e| invalid(format!("instrument {z:?}: {e}")))?;
        }
        if let Some(g) = &self.gamma {
            check_gamma(g)?;
        }
        for (name, v) in [("π0", &self.pi0), ("π1", &self.pi1), ("ν", &self.nu)] {
            if let Some(v) = v {
                check_unit(name, v)?;
            }
        }
        Ok(())
    }

    /// The same data with the two alternatives relabelled.
    pub fn swapped(&self) -> Self {
        BinaryObservation {
            p0: self.p1.clone(),
            p1: self.p0.clone(),
            instruments: self
                .instruments
                .iter()
                .map(|(z, c)| (z.clone(), ConditionalPair { p0: c.p1.clone(), p1: c.p0.clone() }))
                .collect(),
            gamma: self.gamma.clone(),
            pi0: self.pi1.clone(),
            pi1: self.pi0.clone(),
            nu: self.nu.clone(),
        }
    }
}

/// What is assumed about the preferences of people whose choice is unobserved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnobservedMode {
    AllIncomparable,
    Agnostic,
    MissingAtRandom,
}

impl std::str::FromStr for UnobservedMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-incomparable" => Ok(UnobservedMode::AllIncomparable),
            "agnostic" => Ok(UnobservedMode::Agnostic),
            "missing-at-random" => Ok(UnobservedMode::MissingAtRandom),
            other => Err(invalid(format!("unknown unobserved mode {other:?} (expected all-incomparable, agnostic or missing-at-random)"))),
        }
    }
}

/// `[0, p1] x [0, p0]`.
pub fn no_assumption_region(obs: &BinaryObservation) -> Result<ConvexRegion2D> {
    obs.validate()?;
    ConvexRegion2D::rectangle(&obs.p1, &obs.p0)
}

/// The no-assumption rectangle cut by `θ₀ + θ₁ <= 1 - ν`.
pub fn min_vagueness_region(obs: &BinaryObservation) -> Result<ConvexRegion2D> {
    let nu = obs.nu.as_ref().ok_or_else(|| invalid("minimal vagueness needs ν"))?;
    let rect = no_assumption_region(obs)?;
    let one = Rational::one();
    Ok(rect.clip(&one, &one, &(Rational::one() - nu)).expect("the origin always survives"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IvRegion {
    pub region: ConvexRegion2D,
    pub inf_p0: Rational,
    pub inf_p1: Rational,
    /// `sup_z p0|z - inf_z p0|z`
    pub delta0: Rational,
    /// Lower bound on `θ₀₁`; equals `delta0`.
    pub theta01_lower: Rational,
}

/// `[0, inf_z p1|z] x [0, inf_z p0|z]`.
pub fn iv_region(obs: &BinaryObservation) -> Result<IvRegion> {
    obs.validate()?;
    if obs.instruments.is_empty() {
        return Err(invalid("instrument table is empty"));
    }
    let p0s = obs.instruments.values().map(|c| &c.p0);
    let inf_p0 = p0s.clone().min().expect("nonempty").clone();
    let sup_p0 = p0s.max().expect("nonempty").clone();
    let inf_p1 = obs.instruments.values().map(|c| &c.p1).min().expect("nonempty").clone();
    let delta0 = &sup_p0 - &inf_p0;
    Ok(IvRegion { region: ConvexRegion2D::rectangle(&inf_p1, &inf_p0)?, inf_p0, inf_p1, theta01_lower: delta0.clone(), delta0 })
}

/// `max(0, Δ₀ - δ₀ - δ₁)`.
pub fn imperfect_iv_bound(delta0: &Rational, d0: &Rational, d1: &Rational) -> Result<Rational> {
    if delta0.is_negative() || d0.is_negative() || d1.is_negative() {
        return Err(invalid("Δ₀, δ₀ and δ₁ must be nonnegative"));
    }
    Ok((delta0 - d0 - d1).max(Rational::zero()))
}

/// `(1 - γ) Θᴼ ⊕ γ Θᵁ`.
pub fn abstention_region(observed: &ConvexRegion2D, gamma: &Rational, mode: UnobservedMode) -> Result<ConvexRegion2D> {
    check_gamma(gamma)?;
    let unobserved = match mode {
        UnobservedMode::AllIncomparable => ConvexRegion2D::point(Point2::origin()),
        UnobservedMode::Agnostic => ConvexRegion2D::unit_triangle(),
        UnobservedMode::MissingAtRandom => return Ok(observed.clone()),
    };
    let kept = observed.scale(&(Rational::one() - gamma))?;
    Ok(kept.minkowski_sum(&unobserved.scale(gamma)?))
}

/// `region ∩ {θ₀ >= π₀} ∩ {θ₁ >= π₁}`.
pub fn consideration_region(region: &ConvexRegion2D, pi0: &Rational, pi1: &Rational) -> Result<ConvexRegion2D> {
    check_unit("π0", pi0)?;
    check_unit("π1", pi1)?;
    let max0 = region.max_y();
    let max1 = region.max_x();
    if *pi0 > max0 {
        return Err(Error::Coherence(format!("π0 = {} exceeds the largest θ₀ = {}", pi0.to_decimal_string(4), max0.to_decimal_string(4))));
    }
    if *pi1 > max1 {
        return Err(Error::Coherence(format!("π1 = {} exceeds the largest θ₁ = {}", pi1.to_decimal_string(4), max1.to_decimal_string(4))));
    }
    let zero = Rational::zero();
    let minus = -Rational::one();
    region
        .clip(&zero, &minus, &-pi0)
        .and_then(|r| r.clip(&minus, &zero, &-pi1))
        .ok_or_else(|| Error::Coherence("no point of the region satisfies both consideration bounds".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn pt(x: &str, y: &str) -> Point2 {
        Point2::new(q(x), q(y))
    }

    fn poly(points: &[(&str, &str)]) -> ConvexRegion2D {
        ConvexRegion2D::hull_of(&points.iter().map(|(x, y)| pt(x, y)).collect::<Vec<_>>()).unwrap()
    }

    fn obs(p0: &str, p1: &str) -> BinaryObservation {
        BinaryObservation::new(q(p0), q(p1)).unwrap()
    }

    #[test]
    fn no_assumption_rectangles() {
        let r = no_assumption_region(&obs("0.338", "0.662")).unwrap();
        assert_eq!(r, poly(&[("0", "0"), ("0.662", "0"), ("0.662", "0.338"), ("0", "0.338")]));
        let seg = no_assumption_region(&obs("1", "0")).unwrap();
        assert_eq!(seg.vertices(), &[pt("0", "0"), pt("0", "1")]);
        assert!(BinaryObservation::new(q("0.5"), q("0.6")).is_err());
    }

    #[test]
    fn minimal_vagueness_pentagon() {
        let mut o = obs("0.4", "0.6");
        o.nu = Some(q("0.15"));
        let r = min_vagueness_region(&o).unwrap();
        assert_eq!(r, poly(&[("0", "0"), ("0.6", "0"), ("0.6", "0.25"), ("0.45", "0.4"), ("0", "0.4")]));
        o.nu = Some(q("0"));
        assert_eq!(min_vagueness_region(&o).unwrap(), no_assumption_region(&o).unwrap());
        o.nu = Some(q("1"));
        assert_eq!(min_vagueness_region(&o).unwrap(), ConvexRegion2D::point(Point2::origin()));
        o.nu = Some(q("1.2"));
        assert!(min_vagueness_region(&o).is_err());
    }

    #[test]
    fn instrument_rectangle() {
        let o = obs("0.45", "0.55").with_instrument("z1", q("0.3"), q("0.7")).unwrap().with_instrument("z2", q("0.6"), q("0.4")).unwrap();
        let iv = iv_region(&o).unwrap();
        assert_eq!(iv.region, ConvexRegion2D::rectangle(&q("0.4"), &q("0.3")).unwrap());
        assert_eq!(iv.delta0, q("0.3"));
        assert_eq!(iv.theta01_lower, q("0.3"));
        assert_eq!(iv.region.support(&q("1"), &q("1")), Rational::one() - &iv.delta0);
        assert!(iv_region(&obs("0.5", "0.5")).is_err());
    }

    #[test]
    fn single_instrument_value_is_the_conditional_rectangle() {
        let o = obs("0.5", "0.5").with_instrument("only", q("0.2"), q("0.8")).unwrap();
        let iv = iv_region(&o).unwrap();
        assert_eq!(iv.region, no_assumption_region(&obs("0.2", "0.8")).unwrap());
        assert!(iv.delta0.is_zero());
    }

    #[test]
    fn imperfect_instrument_bounds() {
        assert_eq!(imperfect_iv_bound(&q("0.3"), &q("0.05"), &q("0.05")).unwrap(), q("0.2"));
        assert_eq!(imperfect_iv_bound(&q("0.3"), &q("0"), &q("0")).unwrap(), q("0.3"));
        assert_eq!(imperfect_iv_bound(&q("0.1"), &q("0.2"), &q("0.2")).unwrap(), q("0"));
        assert!(imperfect_iv_bound(&q("-0.1"), &q("0"), &q("0")).is_err());
    }

    #[test]
    fn abstention_modes() {
        let observed = ConvexRegion2D::rectangle(&q("4/7"), &q("3/7")).unwrap();
        let agnostic = abstention_region(&observed, &q("0.3"), UnobservedMode::Agnostic).unwrap();
        assert_eq!(agnostic, poly(&[("0", "0"), ("0.7", "0"), ("0.7", "0.3"), ("0.4", "0.6"), ("0", "0.6")]));
        let incomparable = abstention_region(&observed, &q("0.3"), UnobservedMode::AllIncomparable).unwrap();
        assert_eq!(incomparable, ConvexRegion2D::rectangle(&q("0.4"), &q("0.3")).unwrap());
        assert!(agnostic.contains_region(&incomparable));

        let rect = ConvexRegion2D::rectangle(&q("0.4"), &q("0.3")).unwrap();
        let scaled = abstention_region(&rect, &q("0.3"), UnobservedMode::AllIncomparable).unwrap();
        assert_eq!(scaled, ConvexRegion2D::rectangle(&q("0.28"), &q("0.21")).unwrap());
        assert_eq!(abstention_region(&rect, &q("0.3"), UnobservedMode::MissingAtRandom).unwrap(), rect);
        assert_eq!(abstention_region(&rect, &q("0"), UnobservedMode::Agnostic).unwrap(), rect);
        assert!(abstention_region(&rect, &q("1"), UnobservedMode::Agnostic).is_err());
    }

    #[test]
    fn consideration_sets() {
        let rect = ConvexRegion2D::rectangle(&q("0.6"), &q("0.4")).unwrap();
        let cut = consideration_region(&rect, &q("0.1"), &q("0.2")).unwrap();
        assert_eq!(cut, ConvexRegion2D::box_region(&q("0.2"), &q("0.6"), &q("0.1"), &q("0.4")).unwrap());
        assert!(!cut.contains(&Point2::origin()));
        assert_eq!(consideration_region(&rect, &q("0"), &q("0")).unwrap(), rect);
        assert!(matches!(consideration_region(&rect, &q("0"), &q("0.7")), Err(Error::Coherence(_))));
        let tri = ConvexRegion2D::unit_triangle();
        assert!(matches!(consideration_region(&tri, &q("0.6"), &q("0.6")), Err(Error::Coherence(_))));
    }

    #[test]
    fn exchanging_alternatives_reflects_regions() {
        let mut o = obs("0.3", "0.7").with_instrument("a", q("0.25"), q("0.75")).unwrap();
        o.nu = Some(q("0.1"));
        let s = o.swapped();
        assert_eq!(no_assumption_region(&s).unwrap(), no_assumption_region(&o).unwrap().reflect_diagonal());
        assert_eq!(min_vagueness_region(&s).unwrap(), min_vagueness_region(&o).unwrap().reflect_diagonal());
        assert_eq!(iv_region(&s).unwrap().region, iv_region(&o).unwrap().region.reflect_diagonal());
    }

    #[test]
    fn mode_parsing_and_json() {
        assert_eq!("agnostic".parse::<UnobservedMode>().unwrap(), UnobservedMode::Agnostic);
        assert!("other".parse::<UnobservedMode>().is_err());
        let text = r#"{"p0":"0.4","p1":0.6,"instruments":{"z1":{"p0":"3/10","p1":"7/10"}},"gamma":"0.3"}"#;
        let o: BinaryObservation = serde_json::from_str(text).unwrap();
        o.validate().unwrap();
        assert_eq!(o.instruments["z1"].p1, q("0.7"));
    }
}
