//! Round annuli, their moduli and logarithmic coordinates, and the modulus
//! formulas for grafting cylinders and standard collars.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::hypgeom::{collar_angle, Angle, HypLength};

/// Slack allowed when testing whether a point lies on the closed annulus.
const BOUNDARY_SLACK: f64 = 1e-12;

/// `{ inner < |z| < outer }`, stored normalized to inner radius 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundAnnulus {
    outer_normalized: f64,
    original_inner: f64,
    original_outer: f64,
}

impl RoundAnnulus {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        let inner = positive("inner radius", inner)?;
        let outer = positive("outer radius", outer)?;
        if outer <= inner {
            return Err(Error::OutOfRange {
                name: "outer radius",
                value: outer,
                expected: format!("(inner = {inner}, inf)"),
            });
        }
        Ok(RoundAnnulus {
            outer_normalized: outer / inner,
            original_inner: inner,
            original_outer: outer,
        })
    }

    /// The annulus `{1 < |z| < e^height}`.
    pub fn from_log_height(height: f64) -> Result<Self> {
        let height = positive("log height", height)?;
        RoundAnnulus::new(1.0, height.exp())
    }

    pub fn inner(&self) -> f64 {
        1.0
    }

    pub fn outer(&self) -> f64 {
        self.outer_normalized
    }

    /// Radii as originally supplied, before normalization.
    pub fn original_radii(&self) -> (f64, f64) {
        (self.original_inner, self.original_outer)
    }

    /// `log(outer / inner)`, the height of the logarithmic rectangle.
    pub fn log_height(&self) -> f64 {
        (self.original_outer / self.original_inner).ln()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        let c = positive("scale", c)?;
        RoundAnnulus::new(c * self.original_inner, c * self.original_outer)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let r = z.norm() / self.original_inner;
        r >= 1.0 - BOUNDARY_SLACK && r <= self.outer_normalized * (1.0 + BOUNDARY_SLACK)
    }
}

/// `Mod({a < |z| < b}) = log(b / a) / (2 pi)`.
pub fn modulus(annulus: &RoundAnnulus) -> f64 {
    annulus.log_height() / TAU
}

/// Length of the core geodesic of an annulus of the given modulus, `pi / Mod`.
pub fn core_length(modulus: f64) -> Result<HypLength> {
    let m = positive("modulus", modulus)?;
    HypLength::new(PI / m)
}

/// Logarithmic rectangle `[0, modulus] x [0, 1)` with the `x` direction
/// periodic. Quasiconformal maps are written in these coordinates with
/// `t + i x` as the conformal coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRect {
    pub modulus: f64,
}

impl LogRect {
    pub fn new(modulus: f64) -> Result<Self> {
        positive("modulus", modulus).map(|modulus| LogRect { modulus })
    }

    pub const fn circumference(&self) -> f64 {
        1.0
    }
}

/// Logarithmic coordinates `(t, x)` of a point of the closed annulus, with
/// `z = inner * e^{t + 2 pi i x}`, `t` in `[0, log_height]` and `x` in `[0, 1)`.
pub fn to_log_coords(annulus: &RoundAnnulus, z: Complex64) -> Result<(f64, f64)> {
    if !annulus.contains(z) {
        return Err(Error::OutOfRange {
            name: "|z|",
            value: z.norm(),
            expected: format!("[{}, {}]", annulus.original_inner, annulus.original_outer),
        });
    }
    let w = z / annulus.original_inner;
    let t = w.norm().ln().clamp(0.0, annulus.log_height());
    let x = (w.arg() / TAU).rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative arguments.
    let x = if x >= 1.0 { 0.0 } else { x };
    Ok((t, x))
}

/// Inverse of [`to_log_coords`] on the normalized annulus `{1 < |z| < e^height}`:
/// `(t, x) -> e^{t + 2 pi i x}`.
pub fn from_log_coords(height: f64, t: f64, x: f64) -> Result<Complex64> {
    let height = positive("log height", height)?;
    if !(-BOUNDARY_SLACK..=height + BOUNDARY_SLACK).contains(&t) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
            expected: format!("[0, {height}]"),
        });
    }
    Ok(Complex64::from_polar(t.exp(), TAU * x))
}

/// A flat cylinder of circumference `l` and height `t` inserted by grafting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraftingCylinder {
    pub circumference: HypLength,
    pub height: f64,
}

impl GraftingCylinder {
    pub fn new(circumference: HypLength, height: f64) -> Result<Self> {
        let height = positive("cylinder height", height)?;
        Ok(GraftingCylinder {
            circumference,
            height,
        })
    }

    pub fn modulus(&self) -> f64 {
        self.height / self.circumference.value()
    }
}

/// Modulus of the standard collar together with the grafting cylinder,
/// `(2 theta(l) + t) / l`.
pub fn extended_cylinder_modulus(l: HypLength, t: f64) -> Result<f64> {
    let t = positive("weight", t)?;
    Ok((2.0 * collar_angle(l).0 + t) / l.value())
}

/// Half-angles `(phi, pi/2 - phi)` of the grafting cylinder and of the collar
/// remainder inside the extended cylinder, `phi = (pi/2) t / (t + 2 theta)`.
pub fn grafting_sector_angles(l: HypLength, t: f64) -> Result<(Angle, Angle)> {
    let t = positive("weight", t)?;
    let two_theta = 2.0 * collar_angle(l).0;
    let phi = FRAC_PI_2 * t / (t + two_theta);
    Ok((Angle(phi), Angle(FRAC_PI_2 - phi)))
}

/// Hyperbolic distance from the flat core curve to the boundary of the
/// grafting cylinder in the complete metric of the extended cylinder,
/// `B = log(cos(phi'/2) / sin(phi'/2))` with `phi' = pi/2 - phi`.
pub fn cylinder_boundary_distance(l: HypLength, t: f64) -> Result<f64> {
    let (_, complement) = grafting_sector_angles(l, t)?;
    let half = 0.5 * complement.0;
    Ok((half.cos() / half.sin()).ln())
}

/// Modulus of the standard collar around a geodesic of length `l`,
/// `pi (1 - (4/pi) arctan((e^{l/2} - 1) / (e^{l/2} + 1))) / l`.
pub fn standard_collar_modulus(l: HypLength) -> f64 {
    let e = (0.5 * l.value()).exp_m1();
    PI * (1.0 - 4.0 / PI * (e / (e + 2.0)).atan()) / l.value()
}
