//! Quasiconformal building blocks between annuli in logarithmic coordinates,
//! a finite-difference Beltrami estimator, and the dilatation bound
//! calculators used for comparison maps.
//!
//! A map is written `w(t, x) = T + i X` on `[0, a] x [0, 1)` with the seam rule
//! `w(t, x + 1) = w(t, x) + i`. The conformal coordinate is `zeta = t + i x`, so
//! `f_zeta = (w_t - i w_x) / 2` and `f_zetabar = (w_t + i w_x) / 2`.

mod beltrami;
mod bounds;
mod distortion;
mod grid;

pub use beltrami::{beltrami_estimate, mu_field, BeltramiField, MIN_LATTICE};
pub use bounds::{
    bilipschitz_f_bound, bilipschitz_f_chain, boundary_bilipschitz_bound, boundary_lipschitz_bound,
    comparison_budget, twist_amount_bound, untwist_chain, untwist_dilatation_bound, BudgetEntry,
    ComparisonBudget, DilatationBudget, FCase, FChain, RadiusModel, UntwistChain,
};
pub use distortion::{BoundaryDistortion, DerivativeMode, SineMode};
pub use grid::GridMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A map between logarithmic rectangles.
pub trait LogCoordMap {
    fn domain_modulus(&self) -> f64;
    fn target_modulus(&self) -> f64;
    fn eval(&self, t: f64, x: f64) -> Complex64;
    /// `(f_zeta, f_zetabar)` in closed form.
    fn wirtinger(&self, t: f64, x: f64) -> (Complex64, Complex64);
    /// Analytic dilatation, or an upper bound where only a bound is known.
    fn dilatation_bound(&self) -> f64;

    fn mu(&self, t: f64, x: f64) -> Complex64 {
        let (d, dbar) = self.wirtinger(t, x);
        dbar / d
    }
}

/// `(1 + |mu|) / (1 - |mu|)`, infinite for `|mu| >= 1`.
pub fn dilatation(abs_mu: f64) -> f64 {
    if abs_mu >= 1.0 {
        f64::INFINITY
    } else {
        (1.0 + abs_mu) / (1.0 - abs_mu)
    }
}

/// `(t, x) -> ((a/b) t, x)` from `[0, b] x [0, 1)` onto `[0, a] x [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingMap {
    pub a: f64,
    pub b: f64,
}

impl ScalingMap {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        Ok(ScalingMap {
            a: positive("a", a)?,
            b: positive("b", b)?,
        })
    }
}

impl LogCoordMap for ScalingMap {
    fn domain_modulus(&self) -> f64 {
        self.b
    }
    fn target_modulus(&self) -> f64 {
        self.a
    }
    fn eval(&self, t: f64, x: f64) -> Complex64 {
        Complex64::new(self.a / self.b * t, x)
    }
    fn wirtinger(&self, _t: f64, _x: f64) -> (Complex64, Complex64) {
        let r = self.a / self.b;
        (
            Complex64::new(0.5 * (r + 1.0), 0.0),
            Complex64::new(0.5 * (r - 1.0), 0.0),
        )
    }
    fn dilatation_bound(&self) -> f64 {
        self.a.max(self.b) / self.a.min(self.b)
    }
}

/// `(t, x) -> (t, x + (t/a) k)` on `[0, a] x [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistMap {
    pub a: f64,
    pub k: f64,
}

impl TwistMap {
    pub fn new(a: f64, k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::OutOfRange {
                name: "k",
                value: k,
                expected: "finite".into(),
            });
        }
        Ok(TwistMap {
            a: positive("a", a)?,
            k,
        })
    }
}

/// `1 + 2 / (sqrt(1 + 4 a^2 / k^2) - 1)`, evaluated as `(s + u)^2 / 4` with
/// `u = |k| / a`, `s = sqrt(u^2 + 4)`.
pub fn twist_dilatation(a: f64, k: f64) -> f64 {
    let u = k.abs() / a;
    let s = (u * u + 4.0).sqrt();
    0.25 * (s + u) * (s + u)
}

/// `|mu| = 1 / sqrt(1 + 4 a^2 / k^2)` of the twist map.
pub fn twist_abs_mu(a: f64, k: f64) -> f64 {
    let u = k.abs() / a;
    u / (u * u + 4.0).sqrt()
}

impl LogCoordMap for TwistMap {
    fn domain_modulus(&self) -> f64 {
        self.a
    }
    fn target_modulus(&self) -> f64 {
        self.a
    }
    fn eval(&self, t: f64, x: f64) -> Complex64 {
        Complex64::new(t, x + t / self.a * self.k)
    }
    fn wirtinger(&self, _t: f64, _x: f64) -> (Complex64, Complex64) {
        let c = 0.5 * self.k / self.a;
        (Complex64::new(1.0, c), Complex64::new(0.0, c))
    }
    fn dilatation_bound(&self) -> f64 {
        twist_dilatation(self.a, self.k)
    }
}

/// Dilatation bounds for a shear realizing a `B`-bilipschitz distortion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShearBound {
    pub bilipschitz: f64,
    /// `sqrt(2) (B - 1) / (3 - B)`.
    pub k: f64,
    /// `(1 + k) / (1 - k)`; infinite once `k >= 1`.
    pub dilatation: f64,
    /// `C_shear (B - 1)`, the log-form bound.
    pub log_form: f64,
}

pub fn shear_bound(b: f64, c_shear: f64) -> Result<ShearBound> {
    if !(1.0..2.0).contains(&b) {
        return Err(Error::OutOfRange {
            name: "B",
            value: b,
            expected: "[1, 2)".into(),
        });
    }
    let k = std::f64::consts::SQRT_2 * (b - 1.0) / (3.0 - b);
    Ok(ShearBound {
        bilipschitz: b,
        k,
        dilatation: if k < 1.0 {
            (1.0 + k) / (1.0 - k)
        } else {
            f64::INFINITY
        },
        log_form: c_shear * (b - 1.0),
    })
}

/// `S_f(t, x) = (t, (1 - t/a) x + (t/a) f(x))`, realizing `f` on the outer boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShearingMap {
    pub a: f64,
    pub distortion: BoundaryDistortion,
}

impl ShearingMap {
    pub fn new(a: f64, distortion: BoundaryDistortion) -> Result<Self> {
        if !(a > 1.0 && a.is_finite()) {
            return Err(Error::OutOfRange {
                name: "a",
                value: a,
                expected: "(1, inf)".into(),
            });
        }
        let b = distortion.bilipschitz();
        if b >= 2.0 {
            return Err(Error::OutOfRange {
                name: "B",
                value: b,
                expected: "[1, 2)".into(),
            });
        }
        Ok(ShearingMap { a, distortion })
    }

    pub fn bound(&self, c_shear: f64) -> ShearBound {
        shear_bound(self.distortion.bilipschitz(), c_shear)
            .expect("B < 2 is checked at construction")
    }
}

impl LogCoordMap for ShearingMap {
    fn domain_modulus(&self) -> f64 {
        self.a
    }
    fn target_modulus(&self) -> f64 {
        self.a
    }
    fn eval(&self, t: f64, x: f64) -> Complex64 {
        let s = t / self.a;
        Complex64::new(t, x + s * self.distortion.periodic_part(x))
    }
    fn wirtinger(&self, t: f64, x: f64) -> (Complex64, Complex64) {
        let s = t / self.a;
        let w_t = Complex64::new(1.0, self.distortion.periodic_part(x) / self.a);
        let w_x = I * (1.0 + s * (self.distortion.slope(x) - 1.0));
        (0.5 * (w_t - I * w_x), 0.5 * (w_t + I * w_x))
    }
    fn dilatation_bound(&self) -> f64 {
        self.bound(2.0 * std::f64::consts::SQRT_2).dilatation
    }
}

/// `outer ∘ inner`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Composed<A, B> {
    pub inner: A,
    pub outer: B,
}

impl<A: LogCoordMap, B: LogCoordMap> Composed<A, B> {
    pub fn new(inner: A, outer: B) -> Result<Self> {
        let (m, n) = (inner.target_modulus(), outer.domain_modulus());
        if (m - n).abs() > 1e-12 * m.max(n) {
            return Err(Error::OutOfRange {
                name: "outer domain modulus",
                value: n,
                expected: format!("{m} (inner target modulus)"),
            });
        }
        Ok(Composed { inner, outer })
    }
}

impl<A: LogCoordMap, B: LogCoordMap> LogCoordMap for Composed<A, B> {
    fn domain_modulus(&self) -> f64 {
        self.inner.domain_modulus()
    }
    fn target_modulus(&self) -> f64 {
        self.outer.target_modulus()
    }
    fn eval(&self, t: f64, x: f64) -> Complex64 {
        let w = self.inner.eval(t, x);
        self.outer.eval(w.re, w.im)
    }
    fn wirtinger(&self, t: f64, x: f64) -> (Complex64, Complex64) {
        let w = self.inner.eval(t, x);
        let (f, fbar) = self.inner.wirtinger(t, x);
        let (g, gbar) = self.outer.wirtinger(w.re, w.im);
        (g * f + gbar * fbar.conj(), g * fbar + gbar * f.conj())
    }
    fn dilatation_bound(&self) -> f64 {
        self.inner.dilatation_bound() * self.outer.dilatation_bound()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_dilatation() {
        assert_eq!(ScalingMap::new(1.0, 1.0).unwrap().dilatation_bound(), 1.0);
        assert_eq!(ScalingMap::new(2.0, 1.0).unwrap().dilatation_bound(), 2.0);
        let m = ScalingMap::new(2.0, 1.0).unwrap();
        assert!((dilatation(m.mu(0.3, 0.2).norm()) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn twist_values() {
        assert_eq!(twist_dilatation(1.0, 0.0), 1.0);
        let k = twist_dilatation(1.0, 2.0);
        assert!((k - (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-14);
        let textbook = 1.0 + 2.0 / ((1.0f64 + 4.0 / 4.0).sqrt() - 1.0);
        assert!((k - textbook).abs() < 1e-14);
        let m = TwistMap::new(1.0, 2.0).unwrap();
        assert!((m.mu(0.5, 0.5).norm() - twist_abs_mu(1.0, 2.0)).abs() < 1e-15);
        assert!((dilatation(twist_abs_mu(1.0, 2.0)) - k).abs() < 1e-13);
    }

    #[test]
    fn shear_bound_values() {
        let s = shear_bound(1.1, 2.0 * 2f64.sqrt()).unwrap();
        assert!((s.k - 0.074432292756478687).abs() < 1e-16);
        assert!(shear_bound(2.0, 1.0).is_err());
        assert!(shear_bound(1.9, 1.0).unwrap().dilatation.is_infinite());
        assert_eq!(shear_bound(1.0, 1.0).unwrap().dilatation, 1.0);
    }

    #[test]
    fn shear_preconditions() {
        let f = BoundaryDistortion::identity();
        assert!(ShearingMap::new(1.0, f.clone()).is_err());
        assert!(ShearingMap::new(2.0, f).is_ok());
        let wild = BoundaryDistortion::single_mode(0.6, 1, DerivativeMode::Analytic).unwrap();
        assert!(ShearingMap::new(2.0, wild).is_err());
    }

    #[test]
    fn shear_seam_rule() {
        let f = BoundaryDistortion::single_mode(0.3, 2, DerivativeMode::Analytic).unwrap();
        let s = ShearingMap::new(1.5, f).unwrap();
        for &t in &[0.0, 0.7, 1.5] {
            let d = s.eval(t, 1.0) - s.eval(t, 0.0);
            assert!((d - I).norm() < 1e-15);
        }
        let w = s.eval(1.5, 0.1);
        assert!((w.im - s.distortion.eval(0.1)).abs() < 1e-15);
    }

    #[test]
    fn composition_chain_rule() {
        let c = Composed::new(
            ScalingMap::new(2.0, 1.0).unwrap(),
            TwistMap::new(2.0, 1.0).unwrap(),
        )
        .unwrap();
        let mu = c.mu(0.4, 0.3);
        // Affine composite w = 2t + i (x + t): w_t = 2 + i, w_x = i.
        let w_t = Complex64::new(2.0, 1.0);
        let w_x = I;
        let expected = (w_t + I * w_x) / (w_t - I * w_x);
        assert!((mu - expected).norm() < 1e-15);
        assert!(Composed::new(
            ScalingMap::new(2.0, 1.0).unwrap(),
            TwistMap::new(1.0, 1.0).unwrap()
        )
        .is_err());
    }
}
