use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `A sin(2 pi m x) / (2 pi m)`, contributing `A cos(2 pi m x)` to `f'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineMode {
    pub amplitude: f64,
    pub frequency: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    #[default]
    Analytic,
    /// Cyclic central differences of `f` on the sampling grid.
    FiniteDifference,
}

/// Increasing circle map `f(x) = x + sum_m A_m sin(2 pi m x) / (2 pi m)` lifted
/// to the line, so `f(0) = 0`, `f(1) = 1` and `f(x + 1) = f(x) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistortionSpec", into = "DistortionSpec")]
pub struct BoundaryDistortion {
    modes: Vec<SineMode>,
    derivative: DerivativeMode,
    samples: usize,
    min_slope: f64,
    max_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistortionSpec {
    pub modes: Vec<SineMode>,
    #[serde(default)]
    pub derivative: DerivativeMode,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    BoundaryDistortion::DEFAULT_SAMPLES
}

impl TryFrom<DistortionSpec> for BoundaryDistortion {
    type Error = Error;
    fn try_from(s: DistortionSpec) -> Result<Self> {
        BoundaryDistortion::new(s.modes, s.derivative, s.samples)
    }
}

impl From<BoundaryDistortion> for DistortionSpec {
    fn from(d: BoundaryDistortion) -> Self {
        DistortionSpec {
            modes: d.modes,
            derivative: d.derivative,
            samples: d.samples,
        }
    }
}

impl BoundaryDistortion {
    pub const DEFAULT_SAMPLES: usize = 4096;

    pub fn new(modes: Vec<SineMode>, derivative: DerivativeMode, samples: usize) -> Result<Self> {
        if samples < 8 {
            return Err(Error::Lattice(format!(
                "distortion needs at least 8 samples, got {samples}"
            )));
        }
        for m in &modes {
            if m.frequency == 0 || !m.amplitude.is_finite() {
                return Err(Error::OutOfRange {
                    name: "sine mode",
                    value: m.amplitude,
                    expected: "finite amplitude with frequency >= 1".into(),
                });
            }
        }
        let mut d = BoundaryDistortion {
            modes,
            derivative,
            samples,
            min_slope: 1.0,
            max_slope: 1.0,
        };
        let (lo, hi) = (0..samples)
            .map(|j| d.sampled_slope(j))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s), hi.max(s))
            });
        if lo <= 0.0 {
            return Err(Error::OutOfRange {
                name: "min f'",
                value: lo,
                expected: "(0, inf) for an increasing map".into(),
            });
        }
        d.min_slope = lo;
        d.max_slope = hi;
        Ok(d)
    }

    pub fn identity() -> Self {
        BoundaryDistortion::new(Vec::new(), DerivativeMode::Analytic, Self::DEFAULT_SAMPLES)
            .expect("identity is valid")
    }

    pub fn single_mode(amplitude: f64, frequency: u32, derivative: DerivativeMode) -> Result<Self> {
        BoundaryDistortion::new(
            vec![SineMode {
                amplitude,
                frequency,
            }],
            derivative,
            Self::DEFAULT_SAMPLES,
        )
    }

    /// Single first-harmonic distortion whose bilipschitz constant is `b`.
    pub fn with_bilipschitz(b: f64) -> Result<Self> {
        if !(b >= 1.0 && b.is_finite()) {
            return Err(Error::OutOfRange {
                name: "B",
                value: b,
                expected: "[1, inf)".into(),
            });
        }
        BoundaryDistortion::single_mode(1.0 - 1.0 / b, 1, DerivativeMode::Analytic)
    }

    pub fn modes(&self) -> &[SineMode] {
        &self.modes
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.derivative
    }

    pub fn eval(&self, x: f64) -> f64 {
        x + self.periodic_part(x)
    }

    /// `f(x) - x`, which has period 1.
    pub fn periodic_part(&self, x: f64) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let w = TAU * f64::from(m.frequency);
                m.amplitude * (w * x).sin() / w
            })
            .sum()
    }

    /// Closed-form `f'(x)`.
    pub fn slope(&self, x: f64) -> f64 {
        1.0 + self
            .modes
            .iter()
            .map(|m| m.amplitude * (TAU * f64::from(m.frequency) * x).cos())
            .sum::<f64>()
    }

    fn sampled_slope(&self, j: usize) -> f64 {
        let h = 1.0 / self.samples as f64;
        let x = j as f64 * h;
        match self.derivative {
            DerivativeMode::Analytic => self.slope(x),
            DerivativeMode::FiniteDifference => (self.eval(x + h) - self.eval(x - h)) / (2.0 * h),
        }
    }

    pub fn min_slope(&self) -> f64 {
        self.min_slope
    }

    pub fn max_slope(&self) -> f64 {
        self.max_slope
    }

    /// Smallest `B` with `1/B <= f' <= B` on the sampling grid.
    pub fn bilipschitz(&self) -> f64 {
        self.max_slope.max(1.0 / self.min_slope)
    }
}
