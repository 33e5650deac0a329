//! Existence-regime classification from the parameters and the GN constant.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::{self, SharpConstants};
use crate::error::{Error, Result};
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeTag {
    GlobalMin,
    GlobalMinMassCritical,
    LocalMinPlusMountainPass,
    NoCriticalPoint,
    LambdaEmpty,
    MaxOnLambda,
    TwoCriticalPointsOnLambda,
    OpenUnknown,
}

impl RegimeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeTag::GlobalMin => "GlobalMin",
            RegimeTag::GlobalMinMassCritical => "GlobalMinMassCritical",
            RegimeTag::LocalMinPlusMountainPass => "LocalMinPlusMountainPass",
            RegimeTag::NoCriticalPoint => "NoCriticalPoint",
            RegimeTag::LambdaEmpty => "LambdaEmpty",
            RegimeTag::MaxOnLambda => "MaxOnLambda",
            RegimeTag::TwoCriticalPointsOnLambda => "TwoCriticalPointsOnLambda",
            RegimeTag::OpenUnknown => "OpenUnknown",
        }
    }

    /// Tags under which critical points on `S(c)` are known to exist.
    pub fn is_existence(self) -> bool {
        matches!(
            self,
            RegimeTag::GlobalMin
                | RegimeTag::GlobalMinMassCritical
                | RegimeTag::LocalMinPlusMountainPass
                | RegimeTag::MaxOnLambda
                | RegimeTag::TwoCriticalPointsOnLambda
        )
    }
}

impl fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One inequality of a certificate, evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub lhs: String,
    pub lhs_value: f64,
    pub relation: String,
    pub rhs: String,
    pub rhs_value: f64,
    pub holds: bool,
}

impl Check {
    fn new(lhs: &str, lhs_value: f64, relation: &str, rhs: &str, rhs_value: f64) -> Self {
        let holds = match relation {
            "<" => lhs_value < rhs_value,
            "<=" => lhs_value <= rhs_value,
            ">" => lhs_value > rhs_value,
            ">=" => lhs_value >= rhs_value,
            "==" => lhs_value == rhs_value,
            "!=" => lhs_value != rhs_value,
            _ => false,
        };
        Check { lhs: lhs.into(), lhs_value, relation: relation.into(), rhs: rhs.into(), rhs_value, holds }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} {} {}", self.lhs, self.lhs_value, self.relation, self.rhs)?;
        if self.rhs.parse::<f64>().ok() != Some(self.rhs_value) {
            write!(f, " = {}", self.rhs_value)?;
        }
        Ok(())
    }
}

/// Every threshold relevant to the parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Thresholds {
    pub kgn: f64,
    pub k0: Option<f64>,
    pub c0: Option<f64>,
    #[serde(rename = "K1")]
    pub k1: Option<f64>,
    #[serde(rename = "K2")]
    pub k2: Option<f64>,
    /// `K₁ |γ|^{(4-p)/2} c^{3-p}`
    pub a_threshold_1: Option<f64>,
    /// `K₂ |γ|^{(4-p)/2} c^{3-p}`
    pub a_threshold_2: Option<f64>,
    pub mass_critical: Option<f64>,
}

impl Thresholds {
    pub fn compute(params: &Params, kgn: f64) -> Self {
        let Params { gamma, a, p, c } = *params;
        let k1 = constants::k1(p, kgn).ok();
        let k2 = constants::k2(p, kgn).ok();
        let factor = constants::threshold_factor(gamma, p, c);
        Thresholds {
            kgn,
            k0: constants::k0(params).ok(),
            c0: constants::c0(p, a, gamma, kgn).ok(),
            k1,
            k2,
            a_threshold_1: k1.map(|k| k * factor),
            a_threshold_2: k2.map(|k| k * factor),
            mass_critical: if p == 4.0 { constants::mass_critical_bound(a, kgn).ok() } else { None },
        }
    }
}

/// Classification outcome with the inequalities that decided it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub tag: RegimeTag,
    pub summary: String,
    pub certificate: Vec<Check>,
    pub params: Params,
    pub thresholds: Thresholds,
}

impl RegimeLabel {
    /// One-line rendering of the certificate.
    pub fn explain(&self) -> String {
        let chain: Vec<String> = self.certificate.iter().map(|c| c.to_string()).collect();
        format!("{}: {} [{}]", self.tag, self.summary, chain.join("; "))
    }
}

/// Classifies `params` using exact comparisons against the closed-form thresholds.
pub fn regime_classify(params: &Params, sharp: &SharpConstants) -> Result<RegimeLabel> {
    params.validate()?;
    if sharp.p != params.p {
        return Err(Error::InvalidParameter(format!(
            "sharp constants computed for p = {}, parameters have p = {}",
            sharp.p, params.p
        )));
    }
    let Params { gamma, a, p, c } = *params;
    let th = Thresholds::compute(params, sharp.kgn);
    let mut certificate = Vec::new();
    let mut push = |lhs: &str, lv: f64, rel: &str, rhs: &str, rv: f64| certificate.push(Check::new(lhs, lv, rel, rhs, rv));

    let (tag, summary): (RegimeTag, &str) = if gamma > 0.0 {
        push("gamma", gamma, ">", "0", 0.0);
        if a <= 0.0 {
            push("a", a, "<=", "0", 0.0);
            (RegimeTag::GlobalMin, "defocusing nonlinearity: the energy is bounded below on S(c) and the infimum is attained")
        } else if p < 4.0 {
            push("a", a, ">", "0", 0.0);
            push("p", p, "<", "4", 4.0);
            (RegimeTag::GlobalMin, "mass-subcritical focusing nonlinearity: the infimum on S(c) is attained")
        } else if p == 4.0 {
            let bound = th.mass_critical.expect("a > 0 at p = 4");
            push("a", a, ">", "0", 0.0);
            push("p", p, "==", "4", 4.0);
            if c < bound {
                push("c", c, "<", "2/(a kgn)", bound);
                (RegimeTag::GlobalMinMassCritical, "mass-critical exponent below the GN mass bound: the infimum is attained")
            } else {
                push("c", c, ">=", "2/(a kgn)", bound);
                (RegimeTag::OpenUnknown, "mass-critical exponent at or above the GN mass bound: not covered")
            }
        } else {
            let c0 = th.c0.expect("p > 4, a > 0, gamma > 0");
            push("a", a, ">", "0", 0.0);
            push("p", p, ">", "4", 4.0);
            if c < c0 {
                push("c", c, "<", "c0", c0);
                (
                    RegimeTag::LocalMinPlusMountainPass,
                    "mass-supercritical with small mass: a local minimizer on the kinetic cap and a mountain-pass solution",
                )
            } else {
                push("c", c, ">=", "c0", c0);
                (RegimeTag::OpenUnknown, "mass-supercritical with c >= c0: not covered")
            }
        }
    } else if gamma < 0.0 {
        push("gamma", gamma, "<", "0", 0.0);
        if a <= 0.0 {
            push("a", a, "<=", "0", 0.0);
            (
                RegimeTag::NoCriticalPoint,
                "every fiber map t -> F(u^t) is strictly increasing, so F has no critical point on S(c)",
            )
        } else if p < 4.0 {
            let t1 = th.a_threshold_1.expect("p < 4");
            let t2 = th.a_threshold_2.expect("p < 4");
            push("a", a, ">", "0", 0.0);
            push("p", p, "<", "4", 4.0);
            if a < t1 {
                push("a", a, "<", "K1 |gamma|^((4-p)/2) c^(3-p)", t1);
                (RegimeTag::LambdaEmpty, "a below the K1 threshold: the Pohozaev set is empty")
            } else if a == t1 {
                push("a", a, "==", "K1 |gamma|^((4-p)/2) c^(3-p)", t1);
                push("a", a, "<", "K2 |gamma|^((4-p)/2) c^(3-p)", t2);
                (RegimeTag::MaxOnLambda, "a at the K1 threshold: the supremum of F on the Pohozaev set is attained")
            } else if a < t2 {
                push("a", a, ">", "K1 |gamma|^((4-p)/2) c^(3-p)", t1);
                push("a", a, "<", "K2 |gamma|^((4-p)/2) c^(3-p)", t2);
                (
                    RegimeTag::TwoCriticalPointsOnLambda,
                    "a strictly between the K1 and K2 thresholds: critical points on both branches",
                )
            } else {
                push("a", a, ">=", "K2 |gamma|^((4-p)/2) c^(3-p)", t2);
                (RegimeTag::OpenUnknown, "a at or above the K2 threshold: not covered")
            }
        } else {
            push("a", a, ">", "0", 0.0);
            push("p", p, ">=", "4", 4.0);
            (RegimeTag::OpenUnknown, "gamma < 0 with a > 0 and p >= 4: open")
        }
    } else {
        push("gamma", gamma, "==", "0", 0.0);
        (RegimeTag::OpenUnknown, "gamma = 0 has no logarithmic interaction: outside the classified family")
    };

    Ok(RegimeLabel { tag, summary: summary.into(), certificate, params: *params, thresholds: th })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify(gamma: f64, a: f64, p: f64, c: f64, kgn: f64) -> RegimeTag {
        let params = Params::new(gamma, a, p, c).unwrap();
        regime_classify(&params, &SharpConstants::with_kgn(p, kgn)).unwrap().tag
    }

    #[test]
    fn representative_labels() {
        assert_eq!(classify(1.0, -1.0, 3.0, 5.0, 0.38), RegimeTag::GlobalMin);
        assert_eq!(classify(1.0, 1.0, 3.0, 1.0, 0.38), RegimeTag::GlobalMin);
        assert_eq!(classify(-1.0, -1.0, 3.0, 1.0, 0.38), RegimeTag::NoCriticalPoint);
        assert_eq!(classify(-1.0, 0.01, 2.5, 1.0, 0.6), RegimeTag::LambdaEmpty);
        assert_eq!(classify(1.0, 1.0, 4.0, 11.0, 0.170927), RegimeTag::GlobalMinMassCritical);
        assert_eq!(classify(1.0, 1.0, 4.0, 12.0, 0.170927), RegimeTag::OpenUnknown);
        assert_eq!(classify(-1.0, 1.0, 5.0, 1.0, 0.1), RegimeTag::OpenUnknown);
        assert_eq!(classify(0.0, 1.0, 3.0, 1.0, 0.38), RegimeTag::OpenUnknown);
    }

    #[test]
    fn window_between_thresholds() {
        let kgn = 0.380981;
        let k1 = constants::k1(3.0, kgn).unwrap();
        let k2 = constants::k2(3.0, kgn).unwrap();
        assert_eq!(classify(-1.0, k1, 3.0, 1.0, kgn), RegimeTag::MaxOnLambda);
        assert_eq!(classify(-1.0, 0.5 * (k1 + k2), 3.0, 1.0, kgn), RegimeTag::TwoCriticalPointsOnLambda);
        assert_eq!(classify(-1.0, k2, 3.0, 1.0, kgn), RegimeTag::OpenUnknown);
        // p = 3: independent of c
        assert_eq!(classify(-1.0, 0.5 * (k1 + k2), 3.0, 17.0, kgn), RegimeTag::TwoCriticalPointsOnLambda);
    }

    #[test]
    fn c0_boundary() {
        let kgn = 0.0472654;
        let c0 = constants::c0(6.0, 1.0, 1.0, kgn).unwrap();
        assert_eq!(classify(1.0, 1.0, 6.0, 0.5 * c0, kgn), RegimeTag::LocalMinPlusMountainPass);
        assert_eq!(classify(1.0, 1.0, 6.0, c0, kgn), RegimeTag::OpenUnknown);
    }

    #[test]
    fn certificate_checks_all_hold() {
        let params = Params::new(-1.0, 9.0, 3.0, 1.0).unwrap();
        let label = regime_classify(&params, &SharpConstants::with_kgn(3.0, 0.380981)).unwrap();
        assert!(label.certificate.iter().all(|c| c.holds), "{}", label.explain());
        let json = serde_json::to_string(&label).unwrap();
        let back: RegimeLabel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, label);
    }

    #[test]
    fn mismatched_sharp_constants_rejected() {
        let params = Params::new(1.0, 1.0, 3.0, 1.0).unwrap();
        assert!(regime_classify(&params, &SharpConstants::with_kgn(4.0, 0.17)).is_err());
    }
}
