//! Configurable constants that the underlying estimates only assert to exist.

use serde::{Deserialize, Serialize};

/// Universal constants in force for a run. Every report echoes them.
///
/// `kappa` (round-subannulus loss) and the radius constants `k2`, `k3`,
/// `t_radius` are placeholders: only their existence is known, so results
/// depending on them are stated in units of these values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    /// Distance constant `C` in the `C * l^(1/8)` bounds.
    pub c: f64,
    /// Cap constant for the flat-core bounding radius, `R <= K2 * l^(1/4)`.
    pub k2: f64,
    /// Cap constant for the disjoint-curve bounding radius, `R* <= K3 * l^(1/4)`.
    pub k3: f64,
    pub kappa: f64,
    /// Short-curve threshold.
    pub epsilon: f64,
    /// Constant in the log-form shearing bound `log K <= C_shear * (B - 1)`.
    pub c_shear: f64,
    /// Radius model constant, `R = T * l^(1/4)`.
    pub t_radius: f64,
    /// Tube radius between a grafting ray and its Teichmueller geodesic.
    pub diaz_kim_r: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            c: 1.0,
            k2: 1.0,
            k3: 1.0,
            kappa: 1.0,
            epsilon: 0.1,
            c_shear: 2.0 * std::f64::consts::SQRT_2,
            t_radius: 1.0,
            diaz_kim_r: 1.0,
        }
    }
}

impl Constants {
    pub fn validate(&self) -> crate::Result<()> {
        use crate::error::positive;
        positive("C", self.c)?;
        positive("K2", self.k2)?;
        positive("K3", self.k3)?;
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(crate::Error::OutOfRange {
                name: "kappa",
                value: self.kappa,
                expected: "[0, inf)".into(),
            });
        }
        positive("epsilon", self.epsilon)?;
        positive("C_shear", self.c_shear)?;
        positive("T_radius", self.t_radius)?;
        positive("diaz_kim_r", self.diaz_kim_r)?;
        Ok(())
    }
}
