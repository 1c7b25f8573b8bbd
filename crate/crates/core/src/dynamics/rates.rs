use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{decay_factor, iterate_grafting, GraftingTrajectory};
use crate::constants::Constants;
use crate::error::{positive, Error, Result};
use crate::grafting::{
    graft_length_bounds, weighted_sum, CurveId, CurveRole, LengthInterval, LengthState,
    WeightedMulticurve,
};
use crate::hypgeom::{theta, HypLength};
use crate::qcmaps::twist_amount_bound;
use crate::stats::semilog_slope;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeTerm {
    pub label: String,
    pub value: f64,
}

/// Radius of a tube around the grafting ray containing every holonomy lift;
/// `radius` is the sum of `terms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeReport {
    pub radius: f64,
    pub terms: Vec<TubeTerm>,
}

/// `C (max hi)^(1/8) + log(max t / min t)` over the support of `lam`. The
/// value does not depend on which lift is taken.
pub fn holonomy_tube_radius(
    state: &LengthState,
    lam: &WeightedMulticurve,
    c: f64,
) -> Result<TubeReport> {
    let c = positive("C", c)?;
    state.require_support(lam)?;
    state.require_short()?;
    let max_hi = lam
        .support()
        .map(|id| state.interval(id).map(|i| i.hi))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .reduce(f64::max)
        .ok_or_else(|| Error::Parse("lamination is empty".into()))?;
    let (wmax, wmin) = (lam.max_weight().unwrap(), lam.min_weight().unwrap());
    let terms = vec![
        TubeTerm {
            label: "comparison distance C*(max l)^(1/8)".into(),
            value: c * max_hi.powf(0.125),
        },
        TubeTerm {
            label: "weight ratio log(max t / min t)".into(),
            value: (wmax / wmin).ln(),
        },
    ];
    Ok(TubeReport {
        radius: terms.iter().map(|t| t.value).sum(),
        terms,
    })
}

/// Tube radius about the Teichmueller geodesic: the configured ray-to-geodesic
/// constant plus the holonomy tube, together with the twist bound of every
/// support curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicTubeReport {
    pub diaz_kim_r: f64,
    pub holonomy: TubeReport,
    pub twist_bounds: Vec<(CurveId, f64)>,
    pub bounded_twist: bool,
    pub radius: f64,
}

pub fn geodesic_tube_report(
    state: &LengthState,
    lam: &WeightedMulticurve,
    constants: &Constants,
) -> Result<GeodesicTubeReport> {
    constants.validate()?;
    let holonomy = holonomy_tube_radius(state, lam, constants.c)?;
    let step = graft_length_bounds(state, lam, constants.k2, constants.k3)?;
    let twist_bounds = step
        .report
        .support
        .iter()
        .map(|s| {
            Ok((
                s.id.clone(),
                twist_amount_bound(s.moduli.mod_c1, s.moduli.mod_c2)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GeodesicTubeReport {
        diaz_kim_r: constants.diaz_kim_r,
        bounded_twist: twist_bounds.iter().all(|(_, n)| n.is_finite()),
        radius: constants.diaz_kim_r + holonomy.radius,
        holonomy,
        twist_bounds,
    })
}

/// Geometric bound on the distance travelled by `n + 1` successive lifts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftRadius {
    /// `decay_factor(t)^(1/8)`.
    pub q: f64,
    /// `1 / (1 - q)`.
    pub multiplier: f64,
    /// `C l0^(1/8) (1 - q^(n+1)) / (1 - q)`.
    pub partial: f64,
    /// `C l0^(1/8) / (1 - q)`.
    pub limit: f64,
    /// Partial sums for `0..=n`.
    pub partial_sums: Vec<f64>,
}

pub fn iterated_lift_radius(l0: HypLength, t: f64, c: f64, n: usize) -> Result<LiftRadius> {
    let c = positive("C", c)?;
    let q = decay_factor(t)?.powf(0.125);
    let lead = c * l0.value().powf(0.125);
    let multiplier = 1.0 / (1.0 - q);
    let partial_sums = (0..=n)
        .map(|k| lead * (1.0 - q.powi(k as i32 + 1)) * multiplier)
        .collect::<Vec<_>>();
    Ok(LiftRadius {
        q,
        multiplier,
        partial: partial_sums[n],
        limit: lead * multiplier,
        partial_sums,
    })
}

/// Distance moved by collapsing a grafting cylinder of height `s` onto the
/// standard collar: `1/2 log(1 + s / (2 theta(l)))`.
pub fn collapse_distance_bound(l: HypLength, s: f64) -> Result<f64> {
    let s = positive("cylinder height", s)?;
    Ok(0.5 * (s / (2.0 * theta(l.value()))).ln_1p())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccumulationReport {
    pub l0: f64,
    pub t: f64,
    /// Whether `t` is a positive multiple of `2 pi` (the integral case);
    /// otherwise the rates are the generalized ones.
    pub integral_weight: bool,
    /// Steps with only the upper estimate before the curve became short.
    pub pre_steps: usize,
    pub interval_at_start: LengthInterval,
    /// Upper length bound entering each bounded step.
    pub lengths: Vec<f64>,
    /// `C (l_{n-1})^(1/8)` for `n = 1..=N`.
    pub bounds: Vec<f64>,
    pub ratios: Vec<f64>,
    pub expected_q: f64,
    pub fitted_q: Option<f64>,
    /// Combined weight of `n` successive graftings, from the weighted-sum rule.
    pub combined_weights: Vec<f64>,
    /// Slope `a_n` of the reparametrized ray after `n` graftings.
    pub slopes: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// `bounds[N-1] q / (1 - q)`, bounding everything after the last step.
    pub tail_bound: f64,
    pub constants: Constants,
}

/// Per-step distance bounds between consecutive reparametrized holonomy
/// lifts of the `t`-grafting ray through a curve of length `l0`.
pub fn accumulation_analysis(
    l0: HypLength,
    t: f64,
    constants: &Constants,
    n: usize,
) -> Result<AccumulationReport> {
    constants.validate()?;
    let t = positive("grafting weight", t)?;
    if n == 0 {
        return Err(Error::OutOfRange {
            name: "N",
            value: 0.0,
            expected: "[1, inf)".into(),
        });
    }
    let decay = decay_factor(t)?;
    let (mut lo, mut hi) = (l0.value(), l0.value());
    let mut pre_steps = 0;
    while hi > constants.epsilon {
        let two_theta = 2.0 * theta(hi);
        lo *= two_theta / (two_theta + t);
        hi *= decay;
        pre_steps += 1;
    }
    let start = LengthInterval::new(lo, hi)?;
    let id = CurveId::new("gamma");
    let state = LengthState::new([(id.clone(), CurveRole::Support, start)], constants.epsilon)?;
    let lam = WeightedMulticurve::single(id.clone(), t)?;
    let tr = iterate_grafting(&state, &lam, n - 1, constants.k2, constants.k3)?;
    let lengths: Vec<f64> = tr.series(&id)?.iter().map(|p| p.1).collect();
    let bounds: Vec<f64> = lengths
        .iter()
        .map(|l| constants.c * l.powf(0.125))
        .collect();
    let ratios = bounds.windows(2).map(|w| w[1] / w[0]).collect();
    let idx: Vec<f64> = (0..bounds.len()).map(|k| k as f64).collect();
    let fitted_q = semilog_slope(&idx, &bounds).map(f64::exp);
    let expected_q = decay.powf(0.125);

    let mut combined = Vec::with_capacity(n);
    let mut slopes = Vec::with_capacity(n);
    let mut acc = lam.clone();
    for _ in 0..n {
        let w = acc.weight(&id).unwrap();
        let one = weighted_sum(&lam, &acc)?.weight(&id).unwrap();
        let two = weighted_sum(&lam.scaled(2.0)?, &acc)?.weight(&id).unwrap();
        combined.push(w);
        slopes.push((two - one) / t);
        acc = weighted_sum(&lam, &acc)?;
    }

    let partial_sums = bounds
        .iter()
        .scan(0.0, |s, b| {
            *s += b;
            Some(*s)
        })
        .collect();
    let tail_bound = bounds[bounds.len() - 1] * expected_q / (1.0 - expected_q);
    let m = t / TAU;
    Ok(AccumulationReport {
        l0: l0.value(),
        t,
        integral_weight: m >= 1.0 - 1e-12 && (m - m.round()).abs() < 1e-12,
        pre_steps,
        interval_at_start: start,
        lengths,
        bounds,
        ratios,
        expected_q,
        fitted_q,
        combined_weights: combined,
        slopes,
        partial_sums,
        tail_bound,
        constants: *constants,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub l0: f64,
    /// `hi(gamma2) / lo(gamma1)` with weights `pi`, `2 pi`.
    pub ratio: Vec<f64>,
    /// `hi(gamma2) / hi(gamma1)` with weights `2 pi`, `2 pi`.
    pub control: Vec<f64>,
    /// Smallest step from which `ratio` is strictly decreasing.
    pub decreasing_from: Option<usize>,
    pub trajectory: GraftingTrajectory,
}

impl CounterexampleReport {
    pub fn first_step_below(&self, tol: f64) -> Option<usize> {
        self.ratio.iter().position(|&r| r < tol)
    }
}

/// Two curves of equal length grafted with weights `pi` and `2 pi`: the
/// certified ratio of their lengths tends to 0, so the lifts drift apart.
pub fn counterexample_ratio(
    l0: HypLength,
    n: usize,
    constants: &Constants,
) -> Result<CounterexampleReport> {
    let (g1, g2) = (CurveId::new("gamma1"), CurveId::new("gamma2"));
    let iv = LengthInterval::exact(l0.value())?;
    let state = LengthState::new(
        [
            (g1.clone(), CurveRole::Support, iv),
            (g2.clone(), CurveRole::Support, iv),
        ],
        constants.epsilon,
    )?;
    let run = |w1: f64, w2: f64| {
        let lam = WeightedMulticurve::new([(g1.clone(), w1), (g2.clone(), w2)])?;
        iterate_grafting(&state, &lam, n, constants.k2, constants.k3)
    };
    let tr = run(PI, TAU)?;
    let ctl = run(TAU, TAU)?;
    let (s1, s2) = (tr.series(&g1)?, tr.series(&g2)?);
    let ratio: Vec<f64> = s1.iter().zip(&s2).map(|(a, b)| b.1 / a.0).collect();
    let (c1, c2) = (ctl.series(&g1)?, ctl.series(&g2)?);
    let control = c1.iter().zip(&c2).map(|(a, b)| b.1 / a.1).collect();
    let mut decreasing_from = Some(ratio.len().saturating_sub(1));
    for k in (1..ratio.len()).rev() {
        if ratio[k] < ratio[k - 1] {
            decreasing_from = Some(k - 1);
        } else {
            break;
        }
    }
    if ratio.len() >= 2 && ratio[ratio.len() - 1] >= ratio[ratio.len() - 2] {
        decreasing_from = None;
    }
    Ok(CounterexampleReport {
        l0: l0.value(),
        ratio,
        control,
        decreasing_from,
        trajectory: tr,
    })
}
