//! Iterated grafting: certified length trajectories, tube radii around
//! holonomy lifts, accumulation rates, and endpoint analysis.

mod endpoint;
mod rates;

pub use endpoint::{
    endpoint_cauchy_analysis, endpoint_descriptor, geometric_convergence_threshold, CauchyReport,
    CuspPair, EndpointDescriptor,
};
pub use rates::{
    accumulation_analysis, collapse_distance_bound, counterexample_ratio, geodesic_tube_report,
    holonomy_tube_radius, iterated_lift_radius, AccumulationReport, CounterexampleReport,
    GeodesicTubeReport, LiftRadius, TubeReport, TubeTerm,
};

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::grafting::{
    graft_length_bounds, CurveId, GraftBoundsReport, LengthState, WeightedMulticurve,
};
use crate::numfmt::sci17;

/// `pi / (pi + t)`, the guaranteed shrink factor of a grafted curve.
pub fn decay_factor(t: f64) -> Result<f64> {
    Ok(PI / (PI + positive("grafting weight", t)?))
}

/// `f(s) = n (pi + t_min s) / pi + s`.
pub fn ray_reparametrization(n: u32, t_min: f64, s: f64) -> Result<f64> {
    let t_min = positive("t_min", t_min)?;
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::OutOfRange {
            name: "s",
            value: s,
            expected: "[0, inf)".into(),
        });
    }
    Ok(f64::from(n) * (PI + t_min * s) / PI + s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectoryMode {
    /// `gr_lam^n X` for `n = 0, 1, ...`.
    Iterate,
    /// `gr_{s lam} X` for each `s` of the grid.
    Ray { s: Vec<f64> },
}

/// One recorded state together with the grafting that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub index: usize,
    pub state: LengthState,
    /// Lamination applied to the previous state (iterate) or to the initial
    /// state (ray); `None` for the initial state.
    pub lamination: Option<WeightedMulticurve>,
    pub report: Option<GraftBoundsReport>,
}

impl TrajectoryStep {
    /// Factor applied to `hi` of `id` at this step; 1 for the initial state
    /// and for curves whose upper bound is carried over.
    pub fn upper_factor(&self, id: &CurveId) -> f64 {
        self.report
            .as_ref()
            .and_then(|r| r.support.iter().find(|s| &s.id == id))
            .map_or(1.0, |s| s.step.upper_factor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraftingTrajectory {
    pub mode: TrajectoryMode,
    pub lamination: WeightedMulticurve,
    pub steps: Vec<TrajectoryStep>,
}

impl GraftingTrajectory {
    pub fn initial(&self) -> &LengthState {
        &self.steps[0].state
    }

    pub fn last(&self) -> &LengthState {
        &self.steps[self.steps.len() - 1].state
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `(lo, hi)` of `id` at every step.
    pub fn series(&self, id: &CurveId) -> Result<Vec<(f64, f64)>> {
        self.steps
            .iter()
            .map(|s| s.state.interval(id).map(|i| (i.lo, i.hi)))
            .collect()
    }

    /// Max `hi` over the lamination support at every step.
    pub fn support_max_hi(&self) -> Vec<f64> {
        self.steps
            .iter()
            .map(|s| {
                self.lamination
                    .support()
                    .filter_map(|id| s.state.interval(id).ok())
                    .map(|i| i.hi)
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// CSV `step,curve,lo,hi,decay_factor`, one row per curve per step.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "step,curve,lo,hi,decay_factor")?;
        for step in &self.steps {
            for (id, c) in step.state.iter() {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    step.index,
                    id,
                    sci17(c.interval.lo),
                    sci17(c.interval.hi),
                    sci17(step.upper_factor(id))
                )?;
            }
        }
        Ok(())
    }

    /// Per-curve decay factors actually applied, one map per step after the first.
    pub fn decay_factors(&self) -> Vec<BTreeMap<CurveId, f64>> {
        self.steps[1..]
            .iter()
            .map(|s| {
                s.state
                    .iter()
                    .map(|(id, _)| (id.clone(), s.upper_factor(id)))
                    .collect()
            })
            .collect()
    }
}

/// `n` successive applications of the grafting length bounds.
pub fn iterate_grafting(
    state: &LengthState,
    lam: &WeightedMulticurve,
    n: usize,
    k2: f64,
    k3: f64,
) -> Result<GraftingTrajectory> {
    state.require_support(lam)?;
    if lam.is_empty() {
        return Err(Error::Parse("lamination is empty".into()));
    }
    state.require_short()?;
    let mut steps = vec![TrajectoryStep {
        index: 0,
        state: state.clone(),
        lamination: None,
        report: None,
    }];
    for index in 1..=n {
        let prev = &steps[index - 1].state;
        let g = graft_length_bounds(prev, lam, k2, k3)?;
        steps.push(TrajectoryStep {
            index,
            state: g.next,
            lamination: Some(lam.clone()),
            report: Some(g.report),
        });
    }
    Ok(GraftingTrajectory {
        mode: TrajectoryMode::Iterate,
        lamination: lam.clone(),
        steps,
    })
}

/// `gr_{s lam} X` for each `s > 0` of the grid, each grafted from `state`.
pub fn ray_trajectory(
    state: &LengthState,
    lam: &WeightedMulticurve,
    s_grid: &[f64],
    k2: f64,
    k3: f64,
) -> Result<GraftingTrajectory> {
    let mut steps = vec![TrajectoryStep {
        index: 0,
        state: state.clone(),
        lamination: None,
        report: None,
    }];
    for (k, &s) in s_grid.iter().enumerate() {
        let scaled = lam.scaled(positive("ray parameter", s)?)?;
        let g = graft_length_bounds(state, &scaled, k2, k3)?;
        steps.push(TrajectoryStep {
            index: k + 1,
            state: g.next,
            lamination: Some(scaled),
            report: Some(g.report),
        });
    }
    Ok(GraftingTrajectory {
        mode: TrajectoryMode::Ray { s: s_grid.to_vec() },
        lamination: lam.clone(),
        steps,
    })
}
