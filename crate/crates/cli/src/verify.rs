//! Invariant suites behind `graftlab verify`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2, TAU};

use anyhow::Result;
use clap::ValueEnum;
use graftlab::dynamics::{
    counterexample_ratio, decay_factor, endpoint_cauchy_analysis, iterate_grafting,
    iterated_lift_radius,
};
use graftlab::grafting::{
    bounding_annulus_moduli, collar_containment_check, graft_length_bounds, support_step,
    weighted_sum, CurveRole, LengthInterval, LengthState, WeightedMulticurve,
};
use graftlab::hypgeom::{
    annulus_angle, collar_angle, collar_quotient_h, collar_width, EstimateThresholds, HypLength,
};
use graftlab::qcmaps::{
    beltrami_estimate, comparison_budget, twist_dilatation, BoundaryDistortion, Composed,
    DerivativeMode, GridMap, RadiusModel, ScalingMap, ShearingMap, TwistMap,
};
use graftlab::stats::loglog_slope;
use graftlab::Constants;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Hypgeom,
    Qcmaps,
    Grafting,
    Dynamics,
    All,
}

impl Suite {
    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Hypgeom,
                Suite::Qcmaps,
                Suite::Grafting,
                Suite::Dynamics,
            ],
            s => vec![s],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Suite::Hypgeom => "hypgeom",
            Suite::Qcmaps => "qcmaps",
            Suite::Grafting => "grafting",
            Suite::Dynamics => "dynamics",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    /// Distance to the tolerance; non-negative when the check passes.
    pub margin: f64,
    /// `"<="` or `">="`: how `value` is compared with `tolerance`.
    pub relation: &'static str,
    pub detail: String,
}

pub struct VerifyConfig {
    pub constants: Constants,
    pub lattice: usize,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
}

struct Recorder<'a> {
    cfg: &'a VerifyConfig,
    suite: &'static str,
    checks: Vec<Check>,
}

impl Recorder<'_> {
    fn tol(&self, name: &str, default: f64) -> f64 {
        let key = format!("{}.{name}", self.suite);
        self.cfg.tolerances.get(&key).copied().unwrap_or(default)
    }

    fn at_most(&mut self, name: &str, value: f64, default: f64, detail: String) {
        let tolerance = self.tol(name, default);
        self.push(name, value, tolerance, tolerance - value, "<=", detail);
    }

    fn at_least(&mut self, name: &str, value: f64, default: f64, detail: String) {
        let tolerance = self.tol(name, default);
        self.push(name, value, tolerance, value - tolerance, ">=", detail);
    }

    fn push(
        &mut self,
        name: &str,
        value: f64,
        tolerance: f64,
        margin: f64,
        relation: &'static str,
        detail: String,
    ) {
        self.checks.push(Check {
            suite: self.suite,
            name: format!("{}.{name}", self.suite),
            passed: margin >= 0.0,
            value,
            tolerance,
            margin,
            relation,
            detail,
        });
    }
}

pub fn run(suite: Suite, cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for s in suite.members() {
        let mut rec = Recorder {
            cfg,
            suite: s.name(),
            checks: Vec::new(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        match s {
            Suite::Hypgeom => hypgeom(&mut rec, &mut rng)?,
            Suite::Qcmaps => qcmaps(&mut rec, &mut rng)?,
            Suite::Grafting => grafting(&mut rec, &mut rng)?,
            Suite::Dynamics => dynamics(&mut rec)?,
            Suite::All => unreachable!(),
        }
        out.extend(rec.checks);
    }
    Ok(out)
}

fn hl(v: f64) -> Result<HypLength> {
    Ok(HypLength::new(v)?)
}

fn grid(step: f64, upper: f64) -> impl Iterator<Item = f64> {
    (1..)
        .map(move |i| i as f64 * step)
        .take_while(move |&x| x <= upper + 1e-12)
}

fn l_grid() -> Vec<f64> {
    (0..=6).map(|j| 0.1 * 0.5f64.powi(j)).collect()
}

fn hypgeom(rec: &mut Recorder, rng: &mut ChaCha8Rng) -> Result<()> {
    let psi_fail = grid(1e-4, 0.3)
        .filter(|&r| annulus_angle(r).map_or(true, |p| p.0 > r))
        .count();
    rec.at_most(
        "psi_le_r",
        psi_fail as f64,
        0.0,
        "failures of psi(r) <= r, step 1e-4 on (0, 0.3]".into(),
    );

    let mut theta_fail = 0;
    for l in grid(1e-4, 0.5) {
        theta_fail += usize::from((PI - l) / 2.0 > collar_angle(hl(l)?).0);
    }
    rec.at_most(
        "theta_lower",
        theta_fail as f64,
        0.0,
        "failures of (pi - l)/2 <= theta(l), step 1e-4 on (0, 0.5]".into(),
    );

    let mut h_fail = 0;
    for x in grid(1e-4, 0.4) {
        h_fail += usize::from(collar_quotient_h(x)? > x * x / 16.0);
    }
    rec.at_most(
        "h_quadratic",
        h_fail as f64,
        0.0,
        "failures of h(x) <= x^2/16, step 1e-4 on (0, 0.4]".into(),
    );

    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x: f64 = rng.gen_range(0.01..4.0);
        let h = collar_quotient_h(x)?;
        worst = worst.max((h - (-2.0 * collar_width(hl(x)?)).exp()).abs() / h);
    }
    rec.at_most(
        "h_exp_identity",
        worst,
        1e-12,
        "max rel |h - exp(-2M)| over 1000 random x in [0.01, 4)".into(),
    );

    let th = EstimateThresholds::get();
    let eps = rec.cfg.constants.epsilon;
    let valid = th
        .collar_angle_lower
        .valid_up_to
        .min(th.quotient_quadratic.valid_up_to)
        .min(th.separation_factor_lower.valid_up_to);
    rec.at_least(
        "thresholds_cover_epsilon",
        valid,
        eps,
        format!("short-length estimates located valid on (0, {valid}]; epsilon = {eps}"),
    );
    Ok(())
}

fn qcmaps(rec: &mut Recorder, rng: &mut ChaCha8Rng) -> Result<()> {
    let n = rec.cfg.lattice;
    let mut worst = 0.0f64;
    for a in [0.5, 1.0, 2.0] {
        for k in [0.5, 1.0, 2.0, 4.0] {
            let est = beltrami_estimate(&GridMap::sample(&TwistMap::new(a, k)?, n, n)?)?;
            let analytic = twist_dilatation(a, k);
            worst = worst.max((est.sup_k - analytic).abs() / analytic);
        }
    }
    rec.at_most(
        "twist_sup_k",
        worst,
        1e-6,
        format!("max rel |sup K - K_twist| over 12 (a, k) at {n}^2"),
    );

    let mut spread = 0.0f64;
    let mut rel = 0.0f64;
    for (a, b) in [
        (1.0, 1.0),
        (2.0, 1.0),
        (1.0, 2.0),
        (3.0, 0.5),
        (0.7, 1.3),
        (5.0, 4.0),
    ] {
        let est = beltrami_estimate(&GridMap::sample(&ScalingMap::new(a, b)?, n, n)?)?;
        let k = f64::max(a, b) / f64::min(a, b);
        spread = spread.max(est.spread());
        rel = rel.max((est.sup_k - k).abs() / k);
    }
    rec.at_most(
        "scaling_mu_spread",
        spread,
        1e-10,
        "max spread of |mu| over 6 scaling maps".into(),
    );
    rec.at_most(
        "scaling_sup_k",
        rel,
        1e-8,
        "max rel |sup K - max(a,b)/min(a,b)|".into(),
    );

    let mut margin = f64::INFINITY;
    let mut log_gap = f64::INFINITY;
    for _ in 0..5 {
        let b: f64 = rng.gen_range(1.01..1.5);
        let a: f64 = rng.gen_range(1.05..4.0);
        let map = ShearingMap::new(a, BoundaryDistortion::with_bilipschitz(b)?)?;
        let est = beltrami_estimate(&GridMap::sample(&map, n, n)?)?;
        let bound = map.bound(2.0 * SQRT_2);
        margin = margin.min(bound.dilatation - est.sup_k);
        log_gap = log_gap.min(2.0 * SQRT_2 * (b - 1.0) - bound.dilatation.ln());
    }
    rec.at_least(
        "shear_below_bound",
        margin,
        0.0,
        "min (analytic K - sup K) over 5 random shears".into(),
    );
    rec.at_least(
        "shear_log_form",
        log_gap,
        0.0,
        "min (2 sqrt2 (B-1) - log K) over the same shears".into(),
    );

    let fd = BoundaryDistortion::single_mode(0.05, 1, DerivativeMode::FiniteDifference)?;
    let map = ShearingMap::new(2.0, fd)?;
    let est = beltrami_estimate(&GridMap::sample(&map, n, n)?)?;
    rec.at_least(
        "shear_fd_slope",
        map.bound(2.0 * SQRT_2).dilatation - est.sup_k,
        0.0,
        "f(x) = x + 0.05 sin(2 pi x)/(2 pi), slopes by differences".into(),
    );

    let comp = Composed::new(ScalingMap::new(2.0, 1.0)?, TwistMap::new(2.0, 1.0)?)?;
    let est = beltrami_estimate(&GridMap::sample(&comp, n, n)?)?;
    let budget = 2f64.ln() + twist_dilatation(2.0, 1.0).ln();
    rec.at_most(
        "composed_budget",
        est.sup_k.ln() - budget,
        1e-3,
        "log sup K(twist o scaling) - (log 2 + log K_twist)".into(),
    );
    Ok(())
}

fn state(curves: &[(&str, CurveRole, f64, f64)], eps: f64) -> Result<LengthState> {
    Ok(LengthState::new(
        curves
            .iter()
            .map(|&(id, role, lo, hi)| Ok((id.into(), role, LengthInterval::new(lo, hi)?)))
            .collect::<Result<Vec<_>>>()?,
        eps,
    )?)
}

fn grafting(rec: &mut Recorder, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut chain_fail = 0;
    let mut lo_min = f64::INFINITY;
    let mut contain_margin = f64::INFINITY;
    for l in l_grid() {
        for t in [PI, TAU, 2.0 * TAU] {
            let s = support_step(LengthInterval::exact(l)?, t)?;
            let th2 = 2.0 * collar_angle(hl(l)?).0;
            let r = s.lower_factor / (th2 / (th2 + t));
            lo_min = lo_min.min(r);
            chain_fail += usize::from(
                s.new.lo > s.new.hi || s.upper_factor != PI / (PI + t) || !(0.9..=1.0).contains(&r),
            );
            if l <= 0.05 {
                let c = collar_containment_check(hl(l)?, t, rec.cfg.constants.k2)?;
                contain_margin = contain_margin.min(c.exact_margin);
            }
        }
    }
    rec.at_most(
        "length_chain",
        chain_fail as f64,
        0.0,
        format!(
            "failures over l = 0.1*2^-j, t in {{pi, 2pi, 4pi}}; min lo-factor ratio {lo_min:.6}"
        ),
    );
    rec.at_least(
        "collar_containment",
        contain_margin,
        0.0,
        "min M(l') - (R + B) with exact R, l <= 0.05".into(),
    );

    let c = collar_containment_check(hl(0.01)?, TAU, rec.cfg.constants.k2)?;
    rec.at_least(
        "sufficient_condition",
        c.sufficient_margin,
        0.0,
        "(2 theta(0.01))^2 - e^{2 K2 0.01^(1/4)} 0.01^2".into(),
    );

    let eps = rec.cfg.constants.epsilon.min(0.1);
    let mut disjoint_fail = 0;
    let mut ratio_gap = f64::INFINITY;
    let mut sym = 0.0f64;
    for _ in 0..200 {
        let g: f64 = rng.gen_range(1e-3..eps);
        let d_hi: f64 = rng.gen_range(1e-3..eps);
        let d_lo = d_hi * rng.gen_range(0.2..=1.0);
        let t: f64 = rng.gen_range(0.1..20.0);
        let st = state(
            &[
                ("g", CurveRole::Support, g, g),
                ("d", CurveRole::Disjoint, d_lo, d_hi),
            ],
            eps,
        )?;
        let lam = WeightedMulticurve::single("g", t)?;
        let step = graft_length_bounds(&st, &lam, rec.cfg.constants.k2, rec.cfg.constants.k3)?;
        let new = step.next.interval(&"d".into())?;
        disjoint_fail += usize::from(new.hi != d_hi || new.lo > d_lo);

        let lp: f64 = rng.gen_range(1e-3..0.1);
        let r: f64 = rng.gen_range(0.0..0.5);
        let m = bounding_annulus_moduli(hl(lp)?, r)?;
        ratio_gap = ratio_gap.min(m.ratio_bound(hl(lp)?)? - m.ratio());

        let (s, u) = (rng.gen_range(0.1..20.0), rng.gen_range(0.1..20.0));
        let one = |x: f64| WeightedMulticurve::single("g", x);
        let ab = weighted_sum(&one(s)?, &one(u)?)?
            .weight(&"g".into())
            .unwrap_or(f64::NAN);
        let ba = weighted_sum(&one(u)?, &one(s)?)?
            .weight(&"g".into())
            .unwrap_or(f64::NAN);
        sym = sym.max((ab - ba).abs() / ab);
    }
    rec.at_most(
        "disjoint_monotone",
        disjoint_fail as f64,
        0.0,
        "200 random disjoint curves: hi kept and lo non-increasing".into(),
    );
    rec.at_least(
        "moduli_ratio_bound",
        ratio_gap,
        0.0,
        "min ((theta+R)/(theta-R) - Mod C1/Mod C2) over 200 samples".into(),
    );
    rec.at_most(
        "weighted_sum_symmetry",
        sym,
        1e-14,
        "max rel |w(s,t) - w(t,s)|".into(),
    );
    Ok(())
}

fn single(l: f64, t: f64, eps: f64) -> Result<(LengthState, WeightedMulticurve)> {
    Ok((
        state(&[("gamma", CurveRole::Support, l, l)], eps)?,
        WeightedMulticurve::single("gamma", t)?,
    ))
}

fn dynamics(rec: &mut Recorder) -> Result<()> {
    let k = &rec.cfg.constants;
    let (k2, k3) = (k.k2, k.k3);
    let (st, lam) = single(0.1, TAU, 0.1)?;
    let tr = iterate_grafting(&st, &lam, 20, k2, k3)?;
    let worst = tr
        .series(&"gamma".into())?
        .iter()
        .enumerate()
        .map(|(n, p)| (p.1 - 0.1 * 3f64.powi(-(n as i32))).abs())
        .fold(0.0, f64::max);
    rec.at_most(
        "iteration_decay",
        worst,
        1e-12,
        "max |hi_n - 0.1*3^-n|, n <= 20".into(),
    );

    let lift = iterated_lift_radius(hl(0.1)?, TAU, 1.0, 20)?;
    rec.at_most(
        "lift_multiplier",
        (lift.multiplier - 1.0 / (1.0 - 3f64.powf(-0.125))).abs(),
        1e-6,
        format!("multiplier {}", lift.multiplier),
    );

    let cx = counterexample_ratio(hl(0.05)?, 12, &Constants { epsilon: 0.1, ..*k })?;
    let increases = cx.ratio[2..].windows(2).filter(|w| w[1] >= w[0]).count();
    rec.at_most(
        "counterexample_decreasing",
        increases as f64,
        0.0,
        "non-decreasing steps of hi(g2)/lo(g1) from step 2".into(),
    );
    let below = cx
        .first_step_below(0.05)
        .map_or(f64::INFINITY, |s| s as f64);
    rec.at_most(
        "counterexample_below",
        below,
        12.0,
        "first step with ratio < 0.05".into(),
    );
    let ctl = cx
        .control
        .iter()
        .map(|c| (c - 1.0).abs())
        .fold(0.0, f64::max);
    rec.at_most(
        "counterexample_control",
        ctl,
        0.0,
        "max |control - 1|".into(),
    );

    let mut ratio_err = 0.0f64;
    let mut tail_err = 0.0f64;
    for t in [PI, TAU, 2.0 * TAU] {
        let (st, lam) = single(0.1, t, 0.1)?;
        let r = endpoint_cauchy_analysis(&iterate_grafting(&st, &lam, 15, k2, k3)?, k.c)?;
        let q = decay_factor(t)?.powf(0.125);
        for x in &r.ratios {
            ratio_err = ratio_err.max((x - q).abs());
        }
        tail_err = tail_err.max(r.max_tail_mismatch / r.bounds[0]);
    }
    rec.at_most(
        "cauchy_ratio",
        ratio_err,
        1e-10,
        "max |bound ratio - decay^(1/8)|".into(),
    );
    rec.at_most(
        "cauchy_tails",
        tail_err,
        1e-12,
        "max |tail sum - closed form| / first bound".into(),
    );

    let ls = l_grid();
    let mut radii = Vec::new();
    let mut totals = Vec::new();
    for &l in &ls {
        radii.push(collar_containment_check(hl(l)?, TAU, k2)?.radius_exact);
        totals.push(
            comparison_budget(hl(l)?, TAU, k, RadiusModel::Certified)?
                .budget
                .total(),
        );
    }
    let r_slope = loglog_slope(&ls, &radii).unwrap_or(f64::NAN);
    let b_slope = loglog_slope(&ls, &totals).unwrap_or(f64::NAN);
    rec.at_least(
        "radius_slope",
        r_slope,
        0.23,
        "log-log slope of exact R vs l".into(),
    );
    rec.at_least(
        "budget_slope",
        b_slope,
        0.105,
        "log-log slope of budget total vs l".into(),
    );
    Ok(())
}
