use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{decay_factor, GraftingTrajectory, TrajectoryMode};
use crate::error::{positive, Error, Result};
use crate::grafting::{CurveId, LengthInterval, LengthState, WeightedMulticurve};
use crate::hypgeom::HypLength;

/// The two punctures created by cutting along one support curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspPair {
    pub curve: CurveId,
    pub sides: [String; 2],
}

/// Punctured surface obtained by cutting along the support of the lamination
/// and capping each boundary curve with a punctured disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointDescriptor {
    pub retained: BTreeMap<CurveId, LengthInterval>,
    pub cusp_pairs: Vec<CuspPair>,
    /// Boundary curves produced by the cut, two per support curve.
    pub boundary_count: usize,
}

pub fn endpoint_descriptor(
    state: &LengthState,
    lam: &WeightedMulticurve,
) -> Result<EndpointDescriptor> {
    state.require_support(lam)?;
    let retained = state
        .iter()
        .filter(|(id, _)| !lam.contains(id))
        .map(|(id, c)| (id.clone(), c.interval))
        .collect();
    let cusp_pairs: Vec<CuspPair> = lam
        .support()
        .map(|id| CuspPair {
            curve: id.clone(),
            sides: [format!("{id}^1"), format!("{id}^2")],
        })
        .collect();
    Ok(EndpointDescriptor {
        boundary_count: 2 * cusp_pairs.len(),
        retained,
        cusp_pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub c: f64,
    /// `decay_factor(min t)^(1/8)`.
    pub q: f64,
    /// `C (max hi at step m)^(1/8)` bounding the distance between the
    /// endpoints of consecutive rays, `m = 0 .. len - 2`.
    pub bounds: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `sum_{k >= m} bounds[k]` over the computed steps.
    pub tail_sums: Vec<f64>,
    /// `bounds[m] (1 - q^(M - m)) / (1 - q)`.
    pub tail_closed_form: Vec<f64>,
    /// `bounds[m] / (1 - q)`, the tail of the full infinite sequence.
    pub tail_limit: Vec<f64>,
    pub max_tail_mismatch: f64,
    pub summable: bool,
}

pub fn endpoint_cauchy_analysis(tr: &GraftingTrajectory, c: f64) -> Result<CauchyReport> {
    let c = positive("C", c)?;
    if tr.mode != TrajectoryMode::Iterate {
        return Err(Error::Parse(
            "Cauchy analysis needs an iterate-mode trajectory".into(),
        ));
    }
    let t_min = tr
        .lamination
        .min_weight()
        .ok_or_else(|| Error::Parse("lamination is empty".into()))?;
    let q = decay_factor(t_min)?.powf(0.125);
    let max_hi = tr.support_max_hi();
    let bounds: Vec<f64> = max_hi[..max_hi.len().saturating_sub(1)]
        .iter()
        .map(|h| c * h.powf(0.125))
        .collect();
    let m_len = bounds.len();
    let ratios = bounds.windows(2).map(|w| w[1] / w[0]).collect();
    let mut tail_sums = vec![0.0; m_len];
    let mut acc = 0.0;
    for k in (0..m_len).rev() {
        acc += bounds[k];
        tail_sums[k] = acc;
    }
    let tail_closed_form: Vec<f64> = (0..m_len)
        .map(|m| bounds[m] * (1.0 - q.powi((m_len - m) as i32)) / (1.0 - q))
        .collect();
    let tail_limit = bounds.iter().map(|b| b / (1.0 - q)).collect();
    let max_tail_mismatch = tail_sums
        .iter()
        .zip(&tail_closed_form)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(CauchyReport {
        c,
        q,
        summable: q < 1.0,
        bounds,
        ratios,
        tail_sums,
        tail_closed_form,
        tail_limit,
        max_tail_mismatch,
    })
}

/// Smallest weight `s` for which the grafting cylinder on a curve of length
/// `l` contains a round annulus of modulus `(1/2pi) log(1/delta)` on each
/// side: `s = (l / pi) log(1/delta)`.
pub fn geometric_convergence_threshold(l: HypLength, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::OutOfRange {
            name: "delta",
            value: delta,
            expected: "(0, 1)".into(),
        });
    }
    Ok(l.value() / PI * (-delta.ln()))
}
