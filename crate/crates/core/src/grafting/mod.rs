//! Weighted multicurves and certified length intervals under grafting.
//!
//! Curve topology is declared, never computed: every curve carries a role
//! (`support` curves may carry grafting weight, `disjoint` curves are declared
//! disjoint from all support curves), and support curves are pairwise
//! disjoint by declaration.

mod bounds;

pub use bounds::{
    bounding_annulus_moduli, bounding_radius, collar_containment_check, disjoint_length_bounds,
    graft_length_bounds, iteration_distance_bound, support_step, wolpert_ratio, BoundingModuli,
    ContainmentCheck, DisjointCurveBounds, GraftBoundsReport, GraftStep, RadiusBounds,
    SupportCurveBounds, SupportStep,
};

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CurveId(String);

impl CurveId {
    pub fn new(id: impl Into<String>) -> Self {
        CurveId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CurveId {
    fn from(s: &str) -> Self {
        CurveId::new(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveRole {
    Support,
    Disjoint,
}

impl CurveRole {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveRole::Support => "support",
            CurveRole::Disjoint => "disjoint",
        }
    }
}

/// Certified bounds `lo <= length <= hi` on a geodesic length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthInterval {
    pub lo: f64,
    pub hi: f64,
}

impl LengthInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo > 0.0 && lo <= hi && hi.is_finite() {
            Ok(LengthInterval { lo, hi })
        } else {
            Err(Error::InvalidInterval { lo, hi })
        }
    }

    pub fn exact(l: f64) -> Result<Self> {
        LengthInterval::new(l, l)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, l: f64) -> bool {
        self.lo <= l && l <= self.hi
    }
}

/// A finite formal sum of support curves with positive weights.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<CurveId, f64>", into = "BTreeMap<CurveId, f64>")]
pub struct WeightedMulticurve {
    entries: BTreeMap<CurveId, f64>,
}

impl WeightedMulticurve {
    pub fn new<I, K>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, f64)>,
        K: Into<CurveId>,
    {
        let mut map = BTreeMap::new();
        for (id, w) in entries {
            let id = id.into();
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::NonPositive {
                    name: "grafting weight",
                    value: w,
                });
            }
            if map.insert(id.clone(), w).is_some() {
                return Err(Error::DuplicateCurve(id.to_string()));
            }
        }
        Ok(WeightedMulticurve { entries: map })
    }

    pub fn empty() -> Self {
        WeightedMulticurve::default()
    }

    pub fn single(id: impl Into<CurveId>, weight: f64) -> Result<Self> {
        WeightedMulticurve::new([(id.into(), weight)])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight(&self, id: &CurveId) -> Option<f64> {
        self.entries.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CurveId, f64)> + '_ {
        self.entries.iter().map(|(k, &w)| (k, w))
    }

    pub fn support(&self) -> impl Iterator<Item = &CurveId> + '_ {
        self.entries.keys()
    }

    pub fn contains(&self, id: &CurveId) -> bool {
        self.entries.contains_key(id)
    }

    /// Every weight multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        WeightedMulticurve::new(self.entries.iter().map(|(k, &w)| (k.clone(), s * w)))
    }

    pub fn max_weight(&self) -> Option<f64> {
        self.entries.values().copied().reduce(f64::max)
    }

    pub fn min_weight(&self) -> Option<f64> {
        self.entries.values().copied().reduce(f64::min)
    }
}

impl TryFrom<BTreeMap<CurveId, f64>> for WeightedMulticurve {
    type Error = Error;
    fn try_from(map: BTreeMap<CurveId, f64>) -> Result<Self> {
        WeightedMulticurve::new(map)
    }
}

impl From<WeightedMulticurve> for BTreeMap<CurveId, f64> {
    fn from(m: WeightedMulticurve) -> Self {
        m.entries
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackedCurve {
    pub role: CurveRole,
    pub interval: LengthInterval,
}

/// Length intervals of all tracked curves plus the short-curve threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthState {
    curves: BTreeMap<CurveId, TrackedCurve>,
    epsilon: f64,
}

impl LengthState {
    pub fn new<I>(curves: I, epsilon: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (CurveId, CurveRole, LengthInterval)>,
    {
        let epsilon = crate::error::positive("epsilon", epsilon)?;
        let mut map = BTreeMap::new();
        for (id, role, interval) in curves {
            let interval = LengthInterval::new(interval.lo, interval.hi)?;
            if map
                .insert(id.clone(), TrackedCurve { role, interval })
                .is_some()
            {
                return Err(Error::DuplicateCurve(id.to_string()));
            }
        }
        Ok(LengthState {
            curves: map,
            epsilon,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn get(&self, id: &CurveId) -> Result<&TrackedCurve> {
        self.curves
            .get(id)
            .ok_or_else(|| Error::UnknownCurve(id.to_string()))
    }

    pub fn interval(&self, id: &CurveId) -> Result<LengthInterval> {
        self.get(id).map(|c| c.interval)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CurveId, &TrackedCurve)> + '_ {
        self.curves.iter()
    }

    pub fn max_hi(&self) -> Option<f64> {
        self.curves.values().map(|c| c.interval.hi).reduce(f64::max)
    }

    /// Fails unless every tracked curve has `hi <= epsilon`.
    pub fn require_short(&self) -> Result<()> {
        self.curves
            .iter()
            .try_for_each(|(id, c)| self.require_short_interval(id, c.interval))
    }

    pub(crate) fn require_short_interval(&self, id: &CurveId, i: LengthInterval) -> Result<()> {
        if i.hi <= self.epsilon {
            Ok(())
        } else {
            Err(Error::ShortnessViolated {
                curve: id.to_string(),
                hi: i.hi,
                epsilon: self.epsilon,
            })
        }
    }

    /// Checks that every curve of `lam` is tracked with the support role.
    pub fn require_support(&self, lam: &WeightedMulticurve) -> Result<()> {
        for id in lam.support() {
            let c = self.get(id)?;
            if c.role != CurveRole::Support {
                return Err(Error::RoleMismatch {
                    curve: id.to_string(),
                    actual: c.role.as_str(),
                    expected: CurveRole::Support.as_str(),
                });
            }
        }
        Ok(())
    }

    pub(crate) fn with_intervals(&self, updates: BTreeMap<CurveId, LengthInterval>) -> Self {
        let mut next = self.clone();
        for (id, interval) in updates {
            if let Some(c) = next.curves.get_mut(&id) {
                c.interval = interval;
            }
        }
        next
    }
}

/// Combination rule for grafting twice on the same support:
/// `eta (+) lam = sum ((pi + t_i)/pi * s_i + t_i) gamma_i`, where `t_i` are the
/// weights of `lam` (grafted first) and `s_i` those of `eta`.
pub fn weighted_sum(
    eta: &WeightedMulticurve,
    lam: &WeightedMulticurve,
) -> Result<WeightedMulticurve> {
    if eta.len() != lam.len() || eta.support().zip(lam.support()).any(|(a, b)| a != b) {
        return Err(Error::SupportMismatch);
    }
    WeightedMulticurve::new(lam.iter().map(|(id, t)| {
        let s = eta.entries[id];
        (id.clone(), (PI + t) / PI * s + t)
    }))
}

/// Plain union of two multicurves with disjoint supports.
pub fn split_sum(eta: &WeightedMulticurve, lam: &WeightedMulticurve) -> Result<WeightedMulticurve> {
    if let Some(id) = eta.support().find(|id| lam.contains(id)) {
        return Err(Error::OverlappingSupport(id.to_string()));
    }
    WeightedMulticurve::new(eta.iter().chain(lam.iter()).map(|(id, w)| (id.clone(), w)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mc(pairs: &[(&str, f64)]) -> WeightedMulticurve {
        WeightedMulticurve::new(pairs.iter().map(|&(k, w)| (k, w))).unwrap()
    }

    #[test]
    fn multicurve_rejects_bad_weights() {
        assert!(WeightedMulticurve::new([("a", 0.0)]).is_err());
        assert!(WeightedMulticurve::new([("a", -1.0)]).is_err());
        assert!(WeightedMulticurve::new([("a", f64::INFINITY)]).is_err());
        assert!(WeightedMulticurve::new([("a", 1.0), ("a", 2.0)]).is_err());
    }

    #[test]
    fn interval_validation() {
        assert!(LengthInterval::new(0.2, 0.1).is_err());
        assert!(LengthInterval::new(0.0, 0.1).is_err());
        assert!(LengthInterval::new(0.1, 0.1).is_ok());
    }

    #[test]
    fn weighted_sum_values() {
        let tau = 2.0 * PI;
        let w = weighted_sum(&mc(&[("g", tau)]), &mc(&[("g", tau)])).unwrap();
        let expected = 3.0 * tau + tau;
        assert!((w.weight(&"g".into()).unwrap() - expected).abs() < 1e-13);
        assert!((expected - 8.0 * PI).abs() < 1e-13);

        let small = weighted_sum(&mc(&[("g", 1e-12)]), &mc(&[("g", 1.5)])).unwrap();
        assert!((small.weight(&"g".into()).unwrap() - 1.5).abs() < 1e-11);
    }

    #[test]
    fn weighted_sum_is_symmetric_in_the_weights() {
        // (pi + t)/pi * s + t = s + t + s t / pi.
        let t = mc(&[("g", 1.0)]);
        let s = mc(&[("g", 2.0)]);
        let ab = weighted_sum(&s, &t).unwrap().weight(&"g".into()).unwrap();
        let ba = weighted_sum(&t, &s).unwrap().weight(&"g".into()).unwrap();
        assert!((ab - (3.0 + 2.0 / PI)).abs() < 1e-15);
        assert!((ab - ba).abs() < 1e-15);
    }

    #[test]
    fn weighted_sum_requires_identical_support() {
        assert_eq!(
            weighted_sum(&mc(&[("a", 1.0)]), &mc(&[("b", 1.0)])),
            Err(Error::SupportMismatch)
        );
        assert_eq!(
            weighted_sum(&mc(&[("a", 1.0)]), &mc(&[("a", 1.0), ("b", 1.0)])),
            Err(Error::SupportMismatch)
        );
    }

    #[test]
    fn split_sum_union() {
        let a = mc(&[("g1", 1.0)]);
        let b = mc(&[("g2", 2.0)]);
        assert_eq!(split_sum(&WeightedMulticurve::empty(), &b).unwrap(), b);
        let ab = split_sum(&a, &b).unwrap();
        assert_eq!(ab, mc(&[("g1", 1.0), ("g2", 2.0)]));
        assert_eq!(ab, split_sum(&b, &a).unwrap());
        assert!(matches!(
            split_sum(&a, &a),
            Err(Error::OverlappingSupport(_))
        ));
    }

    #[test]
    fn state_role_checks() {
        let state = LengthState::new(
            [
                (
                    "g".into(),
                    CurveRole::Support,
                    LengthInterval::exact(0.05).unwrap(),
                ),
                (
                    "d".into(),
                    CurveRole::Disjoint,
                    LengthInterval::exact(0.08).unwrap(),
                ),
            ],
            0.1,
        )
        .unwrap();
        assert!(state.require_support(&mc(&[("g", 1.0)])).is_ok());
        assert!(matches!(
            state.require_support(&mc(&[("d", 1.0)])),
            Err(Error::RoleMismatch { .. })
        ));
        assert!(matches!(
            state.require_support(&mc(&[("x", 1.0)])),
            Err(Error::UnknownCurve(_))
        ));
        assert!(state.require_short().is_ok());
        let dup = LengthState::new(
            [
                (
                    "g".into(),
                    CurveRole::Support,
                    LengthInterval::exact(0.05).unwrap(),
                ),
                (
                    "g".into(),
                    CurveRole::Disjoint,
                    LengthInterval::exact(0.05).unwrap(),
                ),
            ],
            0.1,
        );
        assert!(matches!(dup, Err(Error::DuplicateCurve(_))));
    }
}
