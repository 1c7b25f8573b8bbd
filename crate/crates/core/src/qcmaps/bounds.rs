use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::twist_dilatation;
use crate::constants::Constants;
use crate::error::{positive, Error, Result};
use crate::grafting::{bounding_annulus_moduli, support_step, LengthInterval};
use crate::hypgeom::{freehomotopy_distance, theta, EstimateThresholds, HypLength};

/// Lipschitz constant of the boundary restriction of a holomorphic map from
/// a round annulus of modulus `mod_source` into one of modulus `mod_target`.
pub fn boundary_lipschitz_bound(mod_source: f64, mod_target: f64) -> Result<f64> {
    Ok(positive("target modulus", mod_target)? / positive("source modulus", mod_source)?)
}

/// The Lipschitz bound applied in both directions.
pub fn boundary_bilipschitz_bound(mod_a: f64, mod_b: f64) -> Result<f64> {
    Ok(boundary_lipschitz_bound(mod_a, mod_b)?.max(boundary_lipschitz_bound(mod_b, mod_a)?))
}

/// Twist `n = 2 + sqrt(Mod(C1)^2 - Mod(C2)^2)` induced by the uniformizing map.
pub fn twist_amount_bound(mod_c1: f64, mod_c2: f64) -> Result<f64> {
    positive("Mod(C1)", mod_c1)?;
    positive("Mod(C2)", mod_c2)?;
    if mod_c1 < mod_c2 {
        return Err(Error::OutOfRange {
            name: "Mod(C1)",
            value: mod_c1,
            expected: format!("[Mod(C2) = {mod_c2}, inf)"),
        });
    }
    Ok(2.0 + ((mod_c1 - mod_c2) * (mod_c1 + mod_c2)).sqrt())
}

fn untwist_from_ratio_sq(l: f64) -> Result<f64> {
    if !(l > 1.0) {
        return Err(Error::OutOfRange {
            name: "L",
            value: l,
            expected: "(1, inf)".into(),
        });
    }
    Ok(2.0 / ((1.0 + 4.0 / (l - 1.0)).sqrt() - 1.0))
}

/// `log K <= 2 / (sqrt(1 + 4/(L - 1)) - 1)` with `L = (Mod(C1)/Mod(C2))^2`.
pub fn untwist_dilatation_bound(mod_c1: f64, mod_c2: f64) -> Result<f64> {
    positive("Mod(C1)", mod_c1)?;
    positive("Mod(C2)", mod_c2)?;
    untwist_from_ratio_sq((mod_c1 / mod_c2).powi(2))
}

/// The untwist bound along the power-law radius model `R = T l^(1/4)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UntwistChain {
    pub l: f64,
    pub l_prime: f64,
    pub radius: f64,
    /// `((theta(l') + R) / (theta(l') - R))^2`.
    pub l_theta_form: f64,
    /// `((pi/2 - l'/2 + R) / (pi/2 - l'/2 - R))^2`, which dominates the theta form.
    pub l_bound: f64,
    pub log_k_bound: f64,
    /// `log_k_bound / l^(1/8)`.
    pub effective_c: f64,
}

pub fn untwist_chain(l: HypLength, l_prime: HypLength, t_radius: f64) -> Result<UntwistChain> {
    let t_radius = positive("T_radius", t_radius)?;
    let (lv, lp) = (l.value(), l_prime.value());
    let r = t_radius * lv.powf(0.25);
    let base = FRAC_PI_2 - 0.5 * lp;
    let th = theta(lp);
    if base - r <= 0.0 {
        return Err(Error::EstimatesNotValid(format!(
            "R = {r} reaches pi/2 - l'/2 = {base}"
        )));
    }
    let l_theta_form = ((th + r) / (th - r)).powi(2);
    let l_bound = ((base + r) / (base - r)).powi(2);
    let log_k_bound = untwist_from_ratio_sq(l_bound)?;
    Ok(UntwistChain {
        l: lv,
        l_prime: lp,
        radius: r,
        l_theta_form,
        l_bound,
        log_k_bound,
        effective_c: log_k_bound / lv.powf(0.125),
    })
}

/// How the annulus `D` is chosen when bounding the distortion of `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FCase {
    /// `D = B`.
    DIsB,
    /// `D` is the maximal round-outer subannulus of `C`.
    DInC,
}

fn checked_ratio(num: f64, den: f64, kappa: f64) -> Result<f64> {
    if den <= 0.0 {
        Err(Error::ModuliTooSmall {
            kappa,
            denominator: den,
        })
    } else {
        Ok(num / den)
    }
}

/// Bilipschitz constant of `F` on the inner boundary: the larger of the
/// forward and inverse Lipschitz bounds of the selected case.
pub fn bilipschitz_f_bound(mod_b: f64, mod_c: f64, kappa: f64, case: FCase) -> Result<f64> {
    positive("Mod(B)", mod_b)?;
    positive("Mod(C)", mod_c)?;
    if !(kappa >= 0.0) {
        return Err(Error::OutOfRange {
            name: "kappa",
            value: kappa,
            expected: "[0, inf)".into(),
        });
    }
    let den = match case {
        FCase::DIsB => mod_b - kappa,
        FCase::DInC => mod_c - 2.0 * kappa,
    };
    Ok(checked_ratio(mod_c, den, kappa)?.max(checked_ratio(mod_b, den, kappa)?))
}

/// `L - 1` bounds for `F` expressed through `l`, `l'`, `R` and `kappa`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FChain {
    pub l: f64,
    pub l_prime: f64,
    pub radius: f64,
    pub kappa: f64,
    /// `None` for a curve disjoint from the grafting support.
    pub weight: Option<f64>,
    /// `(label, L - 1)` for each of the four estimates.
    pub terms: Vec<(String, f64)>,
    pub l_minus_one: f64,
    /// `l_minus_one / l^(1/4)`.
    pub effective_const: f64,
}

/// Evaluates the four `L - 1` estimates for the distortion of `F` and keeps
/// the largest. `weight` selects the extended grafting cylinder as `C`.
pub fn bilipschitz_f_chain(
    l: HypLength,
    l_prime: HypLength,
    radius: f64,
    kappa: f64,
    weight: Option<f64>,
) -> Result<FChain> {
    let (lv, lp) = (l.value(), l_prime.value());
    let r = radius;
    let k = kappa;
    let th = theta(lv);
    let mod_b_lo = (theta(lp) - r) / lp;
    let mut terms = Vec::with_capacity(4);
    let mut push = |label: &str, num: f64, den: f64| -> Result<()> {
        terms.push((label.to_string(), checked_ratio(num, den, k)?));
        Ok(())
    };
    match weight {
        Some(t) => {
            let t = positive("grafting weight", t)?;
            let mod_c = (0.5 * t + th) / lv;
            push("Mod(C)/(Mod(C)-2k)", 2.0 * k, mod_c - 2.0 * k)?;
            push("Mod(B)/(Mod(B)-k)", k, mod_b_lo - k)?;
            let a = (0.5 + k) * lp;
            push("Mod(C)/(Mod(B)-k)", a + r, FRAC_PI_2 - a - r)?;
            let s = 2.0 * k * lp * (1.0 + lv);
            push(
                "Mod(B)/(Mod(C)-2k)",
                r + lv * th + lv * r + 0.5 * lv + s,
                FRAC_PI_2 - 0.5 * lv - s,
            )?;
        }
        None => {
            let mod_c = th / lv;
            push("Mod(C)/(Mod(C)-2k)", 2.0 * k, mod_c - 2.0 * k)?;
            push("Mod(B)/(Mod(B)-k)", k, mod_b_lo - k)?;
            push("Mod(C)/(Mod(B)-k)", r + lp * k, th - r - lp * k)?;
            push(
                "Mod(B)/(Mod(C)-2k)",
                std::f64::consts::PI * lv + r + r * lv + 2.0 * k * lp,
                0.5 * (std::f64::consts::PI - lv) - 2.0 * k * lp,
            )?;
        }
    }
    let l_minus_one = terms.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(FChain {
        l: lv,
        l_prime: lp,
        radius: r,
        kappa: k,
        weight,
        terms,
        l_minus_one,
        effective_const: l_minus_one / lv.powf(0.25),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetEntry {
    pub label: String,
    pub log_k: f64,
}

/// Additive ledger of log-dilatations of composed maps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DilatationBudget {
    entries: Vec<BudgetEntry>,
    total: f64,
}

impl DilatationBudget {
    pub fn new() -> Self {
        DilatationBudget::default()
    }

    pub fn push(&mut self, label: impl Into<String>, log_k: f64) -> Result<()> {
        if !(log_k >= 0.0 && log_k.is_finite()) {
            return Err(Error::OutOfRange {
                name: "log K",
                value: log_k,
                expected: "[0, inf)".into(),
            });
        }
        self.entries.push(BudgetEntry {
            label: label.into(),
            log_k,
        });
        self.total = self.entries.iter().map(|e| e.log_k).sum();
        Ok(())
    }

    pub fn entries(&self) -> &[BudgetEntry] {
        &self.entries
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.label == label)
            .map(|e| e.log_k)
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Upper bound on the dilatation of the composite map.
    pub fn dilatation(&self) -> f64 {
        self.total.exp()
    }
}

/// Where the bounding radius `R` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusModel {
    /// Exact tube radius from the certified length interval after grafting.
    #[default]
    Certified,
    /// `R = T l^(1/4)`.
    PowerLaw { t_radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonBudget {
    pub l: f64,
    pub t: f64,
    pub model: RadiusModel,
    pub interval_after: LengthInterval,
    pub radius: f64,
    /// `(theta(l) + R) / (theta(l) - R)`, bilipschitz constant of the uniformizing map.
    pub bilipschitz: f64,
    /// Bilipschitz constant of `F` (the unshearing distortion).
    pub f_bilipschitz: f64,
    pub budget: DilatationBudget,
    /// `total / l^(1/8)`.
    pub effective_c: f64,
    pub constants: Constants,
}

/// Log-dilatation ledger of the comparison map for one short support curve of
/// length `l` grafted with weight `t`: scaling, shearing, unit twist,
/// unshearing and untwisting.
pub fn comparison_budget(
    l: HypLength,
    t: f64,
    constants: &Constants,
    model: RadiusModel,
) -> Result<ComparisonBudget> {
    constants.validate()?;
    let t = positive("grafting weight", t)?;
    let lv = l.value();
    if lv > constants.epsilon {
        return Err(Error::EstimatesNotValid(format!(
            "l = {lv} exceeds the short-curve threshold {}",
            constants.epsilon
        )));
    }
    EstimateThresholds::get().ensure_short_length(lv)?;

    let step = support_step(LengthInterval::exact(lv)?, t)?;
    let l_prime = HypLength::new(step.new.hi)?;
    let radius = match model {
        RadiusModel::Certified => {
            freehomotopy_distance(HypLength::new(step.new.hi)?, HypLength::new(step.new.lo)?)?
        }
        RadiusModel::PowerLaw { t_radius } => positive("T_radius", t_radius)? * lv.powf(0.25),
    };
    let th = theta(lv);
    if radius >= th {
        return Err(Error::EstimatesNotValid(format!(
            "R = {radius} is not below theta(l) = {th}"
        )));
    }
    let moduli = bounding_annulus_moduli(l_prime, radius)?;
    let bilipschitz = (th + radius) / (th - radius);
    if bilipschitz >= 2.0 {
        return Err(Error::EstimatesNotValid(format!(
            "shearing needs B < 2, got B = {bilipschitz}"
        )));
    }
    let chain = bilipschitz_f_chain(l, l_prime, radius, constants.kappa, Some(t))?;
    let f_bilipschitz = 1.0 + chain.l_minus_one;
    if f_bilipschitz >= 2.0 {
        return Err(Error::EstimatesNotValid(format!(
            "unshearing needs L < 2, got L = {f_bilipschitz}"
        )));
    }

    let mut budget = DilatationBudget::new();
    budget.push("scaling", bilipschitz.ln())?;
    budget.push("shearing", constants.c_shear * (bilipschitz - 1.0))?;
    budget.push(
        "unit twist",
        twist_dilatation(moduli.mod_c2_radius_form, 1.0).ln(),
    )?;
    budget.push("unshearing", constants.c_shear * (f_bilipschitz - 1.0))?;
    let untwist = if radius == 0.0 {
        0.0
    } else {
        untwist_from_ratio_sq(bilipschitz * bilipschitz)?
    };
    budget.push("untwist", untwist)?;
    let effective_c = budget.total() / lv.powf(0.125);
    Ok(ComparisonBudget {
        l: lv,
        t,
        model,
        interval_after: step.new,
        radius,
        bilipschitz,
        f_bilipschitz,
        budget,
        effective_c,
        constants: *constants,
    })
}
