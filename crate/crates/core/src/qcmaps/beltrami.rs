use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{dilatation, GridMap};
use crate::error::{Error, Result};

/// Smallest lattice side for which the difference quotients are trusted.
pub const MIN_LATTICE: usize = 33;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pointwise `|mu|` of a sampled map with its supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeltramiField {
    pub n_t: usize,
    pub n_x: usize,
    pub domain_modulus: f64,
    pub abs_mu: Vec<f64>,
    pub sup_abs_mu: f64,
    pub min_abs_mu: f64,
    pub sup_k: f64,
    /// Lattice point `(t, x)` where `sup_abs_mu` is attained.
    pub argmax: (f64, f64),
}

impl BeltramiField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.abs_mu[i * self.n_x + j]
    }

    /// `sup |mu| - inf |mu|`.
    pub fn spread(&self) -> f64 {
        self.sup_abs_mu - self.min_abs_mu
    }
}

fn d_t(g: &GridMap, i: usize, j: usize) -> Complex64 {
    let h = g.h_t();
    let n = g.n_t();
    if i == 0 {
        (-3.0 * g.value(0, j) + 4.0 * g.value(1, j) - g.value(2, j)) / (2.0 * h)
    } else if i == n - 1 {
        (3.0 * g.value(n - 1, j) - 4.0 * g.value(n - 2, j) + g.value(n - 3, j)) / (2.0 * h)
    } else {
        (g.value(i + 1, j) - g.value(i - 1, j)) / (2.0 * h)
    }
}

fn d_x(g: &GridMap, i: usize, j: usize) -> Complex64 {
    let j = j as isize;
    (g.value_cyclic(i, j + 1) - g.value_cyclic(i, j - 1)) / (2.0 * g.h_x())
}

/// Complex Beltrami coefficient at every lattice point, row-major in `t`.
///
/// Second-order differences throughout: central in the interior, one-sided
/// at `t = 0` and `t = a`, cyclic across the seam in `x`.
pub fn mu_field(g: &GridMap) -> Result<Vec<Complex64>> {
    if g.n_t() < MIN_LATTICE || g.n_x() < MIN_LATTICE {
        return Err(Error::Lattice(format!(
            "lattice {} x {} is coarser than {MIN_LATTICE} x {MIN_LATTICE}",
            g.n_t(),
            g.n_x()
        )));
    }
    let mut out = Vec::with_capacity(g.n_t() * g.n_x());
    for i in 0..g.n_t() {
        for j in 0..g.n_x() {
            let wt = d_t(g, i, j);
            let wx = d_x(g, i, j);
            let dz = 0.5 * (wt - I * wx);
            let dzbar = 0.5 * (wt + I * wx);
            if dz.norm() == 0.0 {
                return Err(Error::NotSensePreserving {
                    t: g.t_at(i),
                    x: g.x_at(j),
                    abs_mu: f64::INFINITY,
                });
            }
            out.push(dzbar / dz);
        }
    }
    Ok(out)
}

pub fn beltrami_estimate(g: &GridMap) -> Result<BeltramiField> {
    let mu = mu_field(g)?;
    let abs_mu: Vec<f64> = mu.iter().map(|m| m.norm()).collect();
    let (k_max, sup) =
        abs_mu
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, v)| {
                if v > bv {
                    (k, v)
                } else {
                    (bk, bv)
                }
            });
    let (i, j) = (k_max / g.n_x(), k_max % g.n_x());
    if sup >= 1.0 {
        return Err(Error::NotSensePreserving {
            t: g.t_at(i),
            x: g.x_at(j),
            abs_mu: sup,
        });
    }
    let min = abs_mu.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(BeltramiField {
        n_t: g.n_t(),
        n_x: g.n_x(),
        domain_modulus: g.domain_modulus(),
        abs_mu,
        sup_abs_mu: sup,
        min_abs_mu: min,
        sup_k: dilatation(sup),
        argmax: (g.t_at(i), g.x_at(j)),
    })
}
