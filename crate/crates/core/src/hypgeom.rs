//! Elementary hyperbolic quantities attached to collars and tubular
//! neighbourhoods of closed geodesics.
//!
//! All functions are pure binary64 evaluations. Where a closed form has a
//! cancellation-prone textbook shape, an algebraically equivalent stable form
//! is used instead and the textbook form is noted next to it.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

/// A positive hyperbolic length.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HypLength(f64);

impl HypLength {
    pub fn new(value: f64) -> Result<Self> {
        positive("hyperbolic length", value).map(HypLength)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for HypLength {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        HypLength::new(value)
    }
}

impl From<HypLength> for f64 {
    fn from(l: HypLength) -> f64 {
        l.0
    }
}

/// An angle in radians. Collar and annulus angles lie in `[0, pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Angle(pub f64);

impl Angle {
    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }
}

/// Angle subtended by the regular `r`-neighbourhood of the imaginary axis,
/// `psi(r) = arctan((e^{2r} - 1) / (2 e^r)) = arctan(sinh r)`.
pub fn annulus_angle(r: f64) -> Result<Angle> {
    let r = positive("neighbourhood radius", r)?;
    Ok(Angle(r.sinh().atan()))
}

/// Angle of the standard collar around a geodesic of length `l`,
/// `theta(l) = arccos((e^l - 1) / (e^l + 1))`.
///
/// Evaluated as `2 arctan(e^{-l/2})`, which has no cancellation for large `l`.
pub fn collar_angle(l: HypLength) -> Angle {
    Angle(2.0 * (-0.5 * l.value()).exp().atan())
}

/// Width of the standard collar,
/// `M(x) = 1/2 log((cosh(x/2) + 1) / (cosh(x/2) - 1)) = 2 artanh(e^{-x/2})`.
pub fn collar_width(x: HypLength) -> f64 {
    2.0 * (-0.5 * x.value()).exp().atanh()
}

/// `h(x) = (cosh(x/2) - 1) / (cosh(x/2) + 1) = tanh^2(x/4) = exp(-2 M(x))`.
pub fn collar_quotient_h(x: f64) -> Result<f64> {
    let x = positive("x", x)?;
    Ok((0.25 * x).tanh().powi(2))
}

/// Radius of a tube around the closed geodesic of length `l_geo` that contains
/// every freely homotopic closed curve of length at most `l_long`:
///
/// `cosh^2 d = (cosh^2(l_long/2) - 1) / (cosh^2(l_geo/2) - 1)`.
///
/// The ratio equals `(sinh(l_long/2) / sinh(l_geo/2))^2`, which is how it is
/// evaluated.
pub fn freehomotopy_distance(l_long: HypLength, l_geo: HypLength) -> Result<f64> {
    if l_long.value() < l_geo.value() {
        return Err(Error::OutOfRange {
            name: "l_long",
            value: l_long.value(),
            expected: format!("[l_geo = {}, inf)", l_geo.value()),
        });
    }
    let ratio = (0.5 * l_long.value()).sinh() / (0.5 * l_geo.value()).sinh();
    Ok(ratio.max(1.0).acosh())
}

/// Result of scanning an inequality on a uniform grid `step, 2 step, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScan {
    pub step: f64,
    pub limit: f64,
    pub samples: usize,
    /// First sample at which the inequality failed, if any.
    pub first_failure: Option<f64>,
    /// Largest sample below which every sample passed.
    pub valid_up_to: f64,
}

impl ThresholdScan {
    /// Scans `holds(x)` for `x = k * step`, `k = 1 ..= limit / step`.
    pub fn run(step: f64, limit: f64, holds: impl Fn(f64) -> bool) -> Self {
        let samples = (limit / step).round() as usize;
        let mut valid_up_to = 0.0;
        let mut first_failure = None;
        for k in 1..=samples {
            let x = k as f64 * step;
            if holds(x) {
                valid_up_to = x;
            } else {
                first_failure = Some(x);
                break;
            }
        }
        ThresholdScan {
            step,
            limit,
            samples,
            first_failure,
            valid_up_to,
        }
    }

    pub fn admits(&self, x: f64) -> bool {
        x > 0.0 && x <= self.valid_up_to
    }

    fn ensure(&self, what: &str, x: f64) -> Result<()> {
        if self.admits(x) {
            Ok(())
        } else {
            Err(Error::EstimatesNotValid(format!(
                "{what} located valid on (0, {}] but was used at {x}",
                self.valid_up_to
            )))
        }
    }
}

/// Sampling step used to locate where the small-argument estimates hold.
pub const THRESHOLD_STEP: f64 = 1e-4;

/// Empirically located validity ranges of the small-argument estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateThresholds {
    /// `psi(r) <= r`.
    pub annulus_angle_upper: ThresholdScan,
    /// `(pi - l) / 2 <= theta(l)`.
    pub collar_angle_lower: ThresholdScan,
    /// `h(x) <= x^2 / 16`.
    pub quotient_quadratic: ThresholdScan,
    /// `K(l) >= 1 / (1 + l)` for the separation factor `K`.
    pub separation_factor_lower: ThresholdScan,
}

impl EstimateThresholds {
    pub fn locate(step: f64) -> Self {
        EstimateThresholds {
            annulus_angle_upper: ThresholdScan::run(step, 1.0, |r| r.sinh().atan() <= r),
            collar_angle_lower: ThresholdScan::run(step, 1.0, |l| {
                0.5 * (std::f64::consts::PI - l) <= collar_angle(HypLength(l)).0
            }),
            quotient_quadratic: ThresholdScan::run(step, 1.0, |x| {
                (0.25 * x).tanh().powi(2) <= x * x / 16.0
            }),
            separation_factor_lower: ThresholdScan::run(step, 4.0, |l| {
                separation_factor(HypLength(l)) >= 1.0 / (1.0 + l)
            }),
        }
    }

    /// Thresholds located once per process with [`THRESHOLD_STEP`].
    pub fn get() -> &'static EstimateThresholds {
        static CELL: OnceLock<EstimateThresholds> = OnceLock::new();
        CELL.get_or_init(|| EstimateThresholds::locate(THRESHOLD_STEP))
    }

    /// Checks that a short length `l` lies where every length estimate used
    /// by the grafting bounds was observed to hold.
    pub fn ensure_short_length(&self, l: f64) -> Result<()> {
        self.collar_angle_lower
            .ensure("(pi - l)/2 <= theta(l)", l)?;
        self.quotient_quadratic.ensure("h(x) <= x^2/16", l)?;
        self.separation_factor_lower.ensure("K(l) >= 1/(1+l)", l)
    }

    pub fn ensure_small_radius(&self, r: f64) -> Result<()> {
        self.annulus_angle_upper.ensure("psi(r) <= r", r)
    }
}

/// Collar separation factor
/// `K(l) = 1 - (4/pi) arctan((e^{l/2} - 1) / (e^{l/2} + 1))`.
///
/// Lengths of curves disjoint from a grafting multicurve shrink by at most this
/// factor. Equals `2 theta(l) / pi`.
pub fn separation_factor(l: HypLength) -> f64 {
    let e = (0.5 * l.value()).exp_m1();
    1.0 - 4.0 / std::f64::consts::PI * (e / (e + 2.0)).atan()
}

#[inline]
pub(crate) fn theta(l: f64) -> f64 {
    2.0 * (-0.5 * l).exp().atan()
}
