use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{CurveId, CurveRole, LengthInterval, LengthState, WeightedMulticurve};
use crate::annuli::cylinder_boundary_distance;
use crate::error::{positive, Error, Result};
use crate::hypgeom::{
    annulus_angle, collar_width, freehomotopy_distance, separation_factor, theta,
    EstimateThresholds, HypLength,
};

/// One application of the support-curve length estimate to an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportStep {
    pub weight: f64,
    pub old: LengthInterval,
    pub new: LengthInterval,
    /// `pi / (pi + t)`, applied to `hi`.
    pub upper_factor: f64,
    /// `1/(1 + hi) * 2 theta(hi) / (2 theta(hi) + t)`, applied to `lo`.
    pub lower_factor: f64,
}

/// Support curve `[lo, hi]` grafted with weight `t`. `theta` and `K1 = 1/(1+l)`
/// are taken at `hi`, which makes both factors conservative.
pub fn support_step(old: LengthInterval, t: f64) -> Result<SupportStep> {
    let t = positive("grafting weight", t)?;
    let upper_factor = PI / (PI + t);
    let two_theta = 2.0 * theta(old.hi);
    let lower_factor = two_theta / (two_theta + t) / (1.0 + old.hi);
    let new = LengthInterval::new(lower_factor * old.lo, upper_factor * old.hi)?;
    Ok(SupportStep {
        weight: t,
        old,
        new,
        upper_factor,
        lower_factor,
    })
}

/// Curve disjoint from the support: `hi` is kept, `lo` drops by at most
/// `max(K(hi), 1/(1 + hi))`.
fn separation_step(old: LengthInterval) -> Result<(LengthInterval, f64)> {
    let k = separation_factor(HypLength::new(old.hi)?).max(1.0 / (1.0 + old.hi));
    Ok((LengthInterval::new(k * old.lo, old.hi)?, k))
}

/// Exact tube radius and its power-law cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusBounds {
    pub exact: f64,
    pub cap: f64,
    pub within_cap: bool,
}

/// Radius of the tube about the geodesic (length `l_geo`) containing the
/// freely homotopic curve of length `l_long`, with the cap `k * l_original^(1/4)`.
pub fn bounding_radius(
    l_long: HypLength,
    l_geo: HypLength,
    l_original: HypLength,
    k: f64,
) -> Result<RadiusBounds> {
    let k = positive("radius constant", k)?;
    let exact = freehomotopy_distance(l_long, l_geo)?;
    let cap = k * l_original.value().powf(0.25);
    Ok(RadiusBounds {
        exact,
        cap,
        within_cap: exact <= cap,
    })
}

/// Moduli of the two halves `C1`, `C2` of the collar cut by the bounding annulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingModuli {
    pub l_geo: f64,
    pub radius: f64,
    /// `(theta(l') + psi(R)) / l'`.
    pub mod_c1: f64,
    /// `(theta(l') - psi(R)) / l'`.
    pub mod_c2: f64,
    /// `(theta(l') + R) / l'`, an upper bound for `mod_c1`.
    pub mod_c1_radius_form: f64,
    /// `(theta(l') - R) / l'`, a lower bound for `mod_c2`.
    pub mod_c2_radius_form: f64,
}

impl BoundingModuli {
    pub fn ratio(&self) -> f64 {
        self.mod_c1 / self.mod_c2
    }

    /// `(theta(l) + R) / (theta(l) - R)` for the pre-graft length `l >= l'`.
    /// Bounds [`Self::ratio`] whenever `R < theta(l)`.
    pub fn ratio_bound(&self, l_original: HypLength) -> Result<f64> {
        let th = theta(l_original.value());
        if self.radius >= th {
            return Err(Error::BoundingAnnulusExitsCollar {
                psi: self.radius,
                theta: th,
            });
        }
        Ok((th + self.radius) / (th - self.radius))
    }
}

pub fn bounding_annulus_moduli(l_geo: HypLength, r: f64) -> Result<BoundingModuli> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::OutOfRange {
            name: "R",
            value: r,
            expected: "[0, inf)".into(),
        });
    }
    let l = l_geo.value();
    let th = theta(l);
    let psi = if r == 0.0 { 0.0 } else { annulus_angle(r)?.0 };
    if psi >= th {
        return Err(Error::BoundingAnnulusExitsCollar { psi, theta: th });
    }
    Ok(BoundingModuli {
        l_geo: l,
        radius: r,
        mod_c1: (th + psi) / l,
        mod_c2: (th - psi) / l,
        mod_c1_radius_form: (th + r) / l,
        mod_c2_radius_form: (th - r) / l,
    })
}

/// Whether the grafting cylinder stays inside the collar of the new geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContainmentCheck {
    pub l: f64,
    pub t: f64,
    /// `pi / (pi + t) * l`.
    pub l_prime: f64,
    pub radius_exact: f64,
    pub radius_cap: f64,
    pub boundary_distance: f64,
    pub collar_width: f64,
    /// `R + B <= M(l')` with the exact radius.
    pub exact_holds: bool,
    pub exact_margin: f64,
    /// `R + B <= M(l')` with the capped radius `K2 l^(1/4)`.
    pub capped_holds: bool,
    pub capped_margin: f64,
    /// `e^{2 K2 l^(1/4)} l^2 <= (2 theta(l))^2`.
    pub sufficient_holds: bool,
    pub sufficient_margin: f64,
}

pub fn collar_containment_check(l: HypLength, t: f64, k2: f64) -> Result<ContainmentCheck> {
    let t = positive("grafting weight", t)?;
    let k2 = positive("K2", k2)?;
    let lv = l.value();
    let step = support_step(LengthInterval::exact(lv)?, t)?;
    let l_prime = step.new.hi;
    let radius_exact =
        freehomotopy_distance(HypLength::new(step.new.hi)?, HypLength::new(step.new.lo)?)?;
    let radius_cap = k2 * lv.powf(0.25);
    let b = cylinder_boundary_distance(l, t)?;
    let m = collar_width(HypLength::new(l_prime)?);
    let exact_margin = m - (radius_exact + b);
    let capped_margin = m - (radius_cap + b);
    let two_theta = 2.0 * theta(lv);
    let sufficient_margin = two_theta * two_theta - (2.0 * radius_cap).exp() * lv * lv;
    Ok(ContainmentCheck {
        l: lv,
        t,
        l_prime,
        radius_exact,
        radius_cap,
        boundary_distance: b,
        collar_width: m,
        exact_holds: exact_margin >= 0.0,
        exact_margin,
        capped_holds: capped_margin >= 0.0,
        capped_margin,
        sufficient_holds: sufficient_margin >= 0.0,
        sufficient_margin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportCurveBounds {
    pub id: CurveId,
    #[serde(flatten)]
    pub step: SupportStep,
    /// Tube about the new geodesic containing the flat core curve.
    pub radius: RadiusBounds,
    pub moduli: BoundingModuli,
    pub containment: ContainmentCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisjointCurveBounds {
    pub id: CurveId,
    pub role: CurveRole,
    pub old: LengthInterval,
    pub new: LengthInterval,
    pub separation_factor: f64,
    /// Tube about the new geodesic containing the old geodesic.
    pub radius: RadiusBounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraftBoundsReport {
    pub epsilon: f64,
    pub support: Vec<SupportCurveBounds>,
    pub disjoint: Vec<DisjointCurveBounds>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraftStep {
    pub report: GraftBoundsReport,
    pub next: LengthState,
}

fn check_estimates(state: &LengthState) -> Result<()> {
    let th = EstimateThresholds::get();
    state
        .iter()
        .try_for_each(|(_, c)| th.ensure_short_length(c.interval.hi))
}

/// Propagates every tracked interval through grafting along `lam`.
///
/// Curves of `lam` get the support estimate; every other tracked curve is
/// disjoint from the support and gets the separation estimate.
pub fn graft_length_bounds(
    state: &LengthState,
    lam: &WeightedMulticurve,
    k2: f64,
    k3: f64,
) -> Result<GraftStep> {
    if lam.is_empty() {
        return Err(Error::Parse("lamination is empty".into()));
    }
    state.require_support(lam)?;
    state.require_short()?;
    check_estimates(state)?;

    let mut updates = BTreeMap::new();
    let mut support = Vec::new();
    let mut disjoint = Vec::new();
    for (id, curve) in state.iter() {
        let old = curve.interval;
        let l_orig = HypLength::new(old.hi)?;
        match lam.weight(id) {
            Some(t) => {
                let step = support_step(old, t)?;
                let radius = bounding_radius(
                    HypLength::new(step.new.hi)?,
                    HypLength::new(step.new.lo)?,
                    l_orig,
                    k2,
                )?;
                let moduli = bounding_annulus_moduli(HypLength::new(step.new.hi)?, radius.exact)?;
                let containment = collar_containment_check(l_orig, t, k2)?;
                updates.insert(id.clone(), step.new);
                support.push(SupportCurveBounds {
                    id: id.clone(),
                    step,
                    radius,
                    moduli,
                    containment,
                });
            }
            None => {
                let (new, k) = separation_step(old)?;
                let radius = bounding_radius(l_orig, HypLength::new(new.lo)?, l_orig, k3)?;
                updates.insert(id.clone(), new);
                disjoint.push(DisjointCurveBounds {
                    id: id.clone(),
                    role: curve.role,
                    old,
                    new,
                    separation_factor: k,
                    radius,
                });
            }
        }
    }
    Ok(GraftStep {
        report: GraftBoundsReport {
            epsilon: state.epsilon(),
            support,
            disjoint,
        },
        next: state.with_intervals(updates),
    })
}

/// Separation update for the listed curves, which must have the disjoint role.
pub fn disjoint_length_bounds(
    state: &LengthState,
    lam: &WeightedMulticurve,
    disjoint_ids: &[CurveId],
) -> Result<BTreeMap<CurveId, LengthInterval>> {
    state.require_support(lam)?;
    let mut out = BTreeMap::new();
    for id in disjoint_ids {
        let c = state.get(id)?;
        if c.role != CurveRole::Disjoint || lam.contains(id) {
            return Err(Error::RoleMismatch {
                curve: id.to_string(),
                actual: c.role.as_str(),
                expected: CurveRole::Disjoint.as_str(),
            });
        }
        state.require_short_interval(id, c.interval)?;
        out.insert(id.clone(), separation_step(c.interval)?.0);
    }
    Ok(out)
}

/// Maximal length ratio `e^{2d}` across Teichmueller distance `d`.
pub fn wolpert_ratio(d: f64) -> Result<f64> {
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::OutOfRange {
            name: "distance",
            value: d,
            expected: "[0, inf)".into(),
        });
    }
    Ok((2.0 * d).exp())
}

/// `C * (max hi)^(1/8)` over the support-role curves (all curves if none).
pub fn iteration_distance_bound(state: &LengthState, c: f64) -> Result<f64> {
    let c = positive("C", c)?;
    state.require_short()?;
    let support_max = state
        .iter()
        .filter(|(_, tc)| tc.role == CurveRole::Support)
        .map(|(_, tc)| tc.interval.hi)
        .reduce(f64::max);
    let max_hi = support_max
        .or_else(|| state.max_hi())
        .ok_or_else(|| Error::Parse("no tracked curves".into()))?;
    Ok(c * max_hi.powf(0.125))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hl(v: f64) -> HypLength {
        HypLength::new(v).unwrap()
    }

    fn state(curves: &[(&str, CurveRole, f64, f64)], eps: f64) -> LengthState {
        LengthState::new(
            curves
                .iter()
                .map(|&(id, role, lo, hi)| (id.into(), role, LengthInterval::new(lo, hi).unwrap())),
            eps,
        )
        .unwrap()
    }

    #[test]
    fn support_step_two_pi() {
        let s = support_step(LengthInterval::exact(0.1).unwrap(), 2.0 * PI).unwrap();
        assert!((s.new.hi - 0.1 / 3.0).abs() < 1e-16);
        assert!((s.new.lo - 0.029653).abs() < 5e-7);
        assert!(support_step(LengthInterval::exact(0.1).unwrap(), 0.0).is_err());
    }

    #[test]
    fn tiny_weight_keeps_upper_bound() {
        let s = support_step(LengthInterval::exact(0.05).unwrap(), 1e-12).unwrap();
        assert!((s.new.hi - 0.05).abs() < 1e-13);
    }

    #[test]
    fn graft_rejects_long_and_misassigned_curves() {
        let lam = WeightedMulticurve::single("g", 1.0).unwrap();
        let long = state(&[("g", CurveRole::Support, 0.1, 0.2)], 0.1);
        assert!(matches!(
            graft_length_bounds(&long, &lam, 1.0, 1.0),
            Err(Error::ShortnessViolated { .. })
        ));
        let wrong = state(&[("g", CurveRole::Disjoint, 0.05, 0.05)], 0.1);
        assert!(matches!(
            graft_length_bounds(&wrong, &lam, 1.0, 1.0),
            Err(Error::RoleMismatch { .. })
        ));
        let empty = WeightedMulticurve::empty();
        let ok = state(&[("g", CurveRole::Support, 0.05, 0.05)], 0.1);
        assert!(graft_length_bounds(&ok, &empty, 1.0, 1.0).is_err());
    }

    #[test]
    fn graft_updates_support_and_disjoint_curves() {
        let st = state(
            &[
                ("g", CurveRole::Support, 0.1, 0.1),
                ("h", CurveRole::Support, 0.08, 0.09),
                ("d", CurveRole::Disjoint, 0.1, 0.1),
            ],
            0.1,
        );
        let lam = WeightedMulticurve::single("g", 2.0 * PI).unwrap();
        let step = graft_length_bounds(&st, &lam, 1.0, 1.0).unwrap();
        assert_eq!(step.report.support.len(), 1);
        assert_eq!(step.report.disjoint.len(), 2);
        let d = step.next.interval(&"d".into()).unwrap();
        assert_eq!(d.hi, 0.1);
        assert!((d.lo - 0.1 * separation_factor(hl(0.1))).abs() < 1e-16);
        let h = step.next.interval(&"h".into()).unwrap();
        assert_eq!(h.hi, 0.09);
        let g = &step.report.support[0];
        assert!(g.moduli.mod_c1 >= g.moduli.mod_c2);
        assert!(g.radius.exact > 0.0);
    }

    #[test]
    fn disjoint_bounds_role_check() {
        let st = state(
            &[
                ("g", CurveRole::Support, 0.1, 0.1),
                ("d", CurveRole::Disjoint, 0.1, 0.1),
            ],
            0.1,
        );
        let lam = WeightedMulticurve::single("g", 1.0).unwrap();
        let out = disjoint_length_bounds(&st, &lam, &["d".into()]).unwrap();
        assert!((out[&CurveId::new("d")].lo - 0.096818).abs() < 5e-7);
        assert!(matches!(
            disjoint_length_bounds(&st, &lam, &["g".into()]),
            Err(Error::RoleMismatch { .. })
        ));
    }

    #[test]
    fn radius_and_moduli_limits() {
        let r = bounding_radius(hl(0.05), hl(0.05), hl(0.1), 1.0).unwrap();
        assert_eq!(r.exact, 0.0);
        assert!(r.within_cap);
        let m = bounding_annulus_moduli(hl(0.03), 0.0).unwrap();
        assert_eq!(m.mod_c1, m.mod_c2);
        assert!((m.mod_c1 - theta(0.03) / 0.03).abs() < 1e-12);
        assert!(matches!(
            bounding_annulus_moduli(hl(0.03), 50.0),
            Err(Error::BoundingAnnulusExitsCollar { .. })
        ));
        let m = bounding_annulus_moduli(hl(0.03), 0.1).unwrap();
        assert!(m.ratio() <= m.ratio_bound(hl(0.1)).unwrap());
    }

    #[test]
    fn containment_small_and_large() {
        let c = collar_containment_check(hl(0.01), 2.0 * PI, 1.0).unwrap();
        assert!(c.sufficient_holds);
        assert!(c.exact_holds);
        let c = collar_containment_check(hl(2.0), 2.0 * PI, 1.0).unwrap();
        assert!(!c.sufficient_holds);
    }

    #[test]
    fn wolpert_values() {
        assert_eq!(wolpert_ratio(0.0).unwrap(), 1.0);
        assert!((wolpert_ratio(0.5 * 3f64.ln()).unwrap() - 3.0).abs() < 1e-14);
        assert!(wolpert_ratio(-1.0).is_err());
    }

    #[test]
    fn iteration_distance_value() {
        let st = state(
            &[
                ("g", CurveRole::Support, 0.05, 0.1),
                ("d", CurveRole::Disjoint, 0.01, 0.01),
            ],
            0.1,
        );
        let b = iteration_distance_bound(&st, 1.0).unwrap();
        assert!((b - 0.1f64.powf(0.125)).abs() < 1e-15);
    }
}
