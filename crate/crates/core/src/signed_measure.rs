//! Coefficient measures of the expansion of `L_A(P_e(beta)^{(x)2})` as a
//! polynomial in `beta`, evaluated on lower orthants.
//!
//! With `nu = (xi - zeta) / c` and `c = ||xi - zeta||_inf`,
//! `P_e(beta) = zeta + beta c nu`, hence
//! `F^A_beta = Gamma_0 + beta c Gamma_1 + (beta c)^2 Gamma_2` where
//! `Gamma_k(A)` sums `L_A` of the products with `nu` in `k` of the two
//! slots and `zeta` elsewhere.

use crate::cdf_engine::{pure_pushforward_cdf, MixingMatrix2, PureProductSpec, QuadConfig};
use crate::distributions::{kolmogorov_distance_univ, ComponentLaw, ContaminatedLaw};
use crate::error::{Error, Result};
use rayon::prelude::*;

/// The normalized signed measure `(xi - zeta) / ||xi - zeta||_inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuMeasure {
    xi: ComponentLaw,
    zeta: ComponentLaw,
    norm_c: f64,
}

impl NuMeasure {
    pub fn new(xi: ComponentLaw, zeta: ComponentLaw) -> Result<Self> {
        if xi == zeta {
            return Err(Error::IdenticalLaws);
        }
        let norm_c = kolmogorov_distance_univ(&xi, &zeta);
        if !(norm_c > 0.0) {
            return Err(Error::IdenticalLaws);
        }
        Ok(Self { xi, zeta, norm_c })
    }

    pub fn from_law(law: &ContaminatedLaw) -> Result<Self> {
        Self::new(law.xi(), law.zeta())
    }

    pub fn xi(&self) -> ComponentLaw {
        self.xi
    }

    pub fn zeta(&self) -> ComponentLaw {
        self.zeta
    }

    /// `||xi - zeta||_inf`.
    pub fn norm_c(&self) -> f64 {
        self.norm_c
    }

    pub fn nu_cdf(&self, t: f64) -> f64 {
        (self.xi.cdf(t) - self.zeta.cdf(t)) / self.norm_c
    }

    pub fn contaminated(&self, beta: f64) -> Result<ContaminatedLaw> {
        ContaminatedLaw::new(beta, self.xi, self.zeta)
    }
}

/// `L_A(mu_1 (x) mu_2)(I_x)` with `mu_i = nu` where `placement[i]` and
/// `zeta` otherwise. Each `nu` factor is expanded as `(xi - zeta) / c`.
pub fn placement_term(
    a: &MixingMatrix2,
    nu: &NuMeasure,
    placement: [bool; 2],
    x: [f64; 2],
    cfg: &QuadConfig,
) -> Result<f64> {
    let mut total = 0.0;
    // choice bit i set: slot i takes xi (sign +), else zeta (sign - if nu slot)
    for choice in 0u8..4 {
        let mut sign = 1.0;
        let mut comps = [nu.zeta; 2];
        let mut skip = false;
        for i in 0..2 {
            let pick_xi = choice & (1 << i) != 0;
            if placement[i] {
                if pick_xi {
                    comps[i] = nu.xi;
                } else {
                    sign = -sign;
                }
            } else if pick_xi {
                skip = true;
            }
        }
        if skip {
            continue;
        }
        total += sign * pure_pushforward_cdf(a, PureProductSpec::new(comps[0], comps[1]), x, cfg)?;
    }
    let k = placement.iter().filter(|&&p| p).count() as i32;
    Ok(total / nu.norm_c.powi(k))
}

/// Order-`k` coefficient measure `Gamma_k(A)` of a 2x2 model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTerm {
    pub matrix: MixingMatrix2,
    pub order: usize,
    pub nu: NuMeasure,
}

impl GammaTerm {
    pub fn new(matrix: MixingMatrix2, order: usize, nu: NuMeasure) -> Result<Self> {
        if order > 2 {
            return Err(Error::Order(order));
        }
        Ok(Self { matrix, order, nu })
    }

    /// The `C(2, k)` placements of `nu` among the `zeta` factors.
    pub fn placements(&self) -> Vec<[bool; 2]> {
        [[false, false], [true, false], [false, true], [true, true]]
            .into_iter()
            .filter(|p| p.iter().filter(|&&b| b).count() == self.order)
            .collect()
    }

    pub fn eval(&self, x: [f64; 2], cfg: &QuadConfig) -> Result<f64> {
        self.placements()
            .into_iter()
            .map(|p| placement_term(&self.matrix, &self.nu, p, x, cfg))
            .sum()
    }
}

/// `Gamma_k(A)(I_x)` for `k` in `0..=2`.
pub fn gamma_k_at(a: &MixingMatrix2, nu: &NuMeasure, k: usize, x: [f64; 2], cfg: &QuadConfig) -> Result<f64> {
    GammaTerm::new(*a, k, *nu)?.eval(x, cfg)
}

/// `sum_k beta^k c^k Gamma_k(A)(I_x)`; equals `F^A_beta(x)`.
pub fn polynomial_reconstruct(
    a: &MixingMatrix2,
    nu: &NuMeasure,
    beta: f64,
    x: [f64; 2],
    cfg: &QuadConfig,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Beta(beta));
    }
    let s = beta * nu.norm_c;
    let mut total = gamma_k_at(a, nu, 0, x, cfg)?;
    if s != 0.0 {
        total += s * gamma_k_at(a, nu, 1, x, cfg)?;
        total += s * s * gamma_k_at(a, nu, 2, x, cfg)?;
    }
    Ok(total)
}

/// `Gamma(A, B, nu)(I_x) = Gamma_1(A)(I_x) - Gamma_1(B)(I_x)`.
pub fn gamma_diff_at(
    a: &MixingMatrix2,
    b: &MixingMatrix2,
    nu: &NuMeasure,
    x: [f64; 2],
    cfg: &QuadConfig,
) -> Result<f64> {
    Ok(gamma_k_at(a, nu, 1, x, cfg)? - gamma_k_at(b, nu, 1, x, cfg)?)
}

/// Finite list of evaluation points in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    points: Vec<[f64; 2]>,
}

impl EvalGrid {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("grid"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid point"));
        }
        Ok(Self { points })
    }

    /// `n x n` tensor grid over `[lo, hi]^2`.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::Invalid(format!("bad tensor grid [{lo}, {hi}] with {n} points")));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let axis: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
        Self::new(
            axis.iter()
                .flat_map(|&x1| axis.iter().map(move |&x2| [x1, x2]))
                .collect(),
        )
    }

    /// The default 101 x 101 grid on `[-6, 6]^2`.
    pub fn default_square() -> Self {
        Self::square(-6.0, 6.0, 101).expect("static grid")
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Evaluates `f` at every point, in grid order.
    pub fn map<F>(&self, f: F) -> Result<Vec<f64>>
    where
        F: Fn([f64; 2]) -> Result<f64> + Sync,
    {
        self.points.par_iter().map(|&x| f(x)).collect()
    }
}

/// `max |v|`; a lower bound for the Kolmogorov norm of the field.
pub fn sup_on_grid(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("grid"));
    }
    Ok(values.iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// Grid supremum with its location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupEstimate {
    pub value: f64,
    pub argmax: [f64; 2],
}

pub fn grid_sup<F>(grid: &EvalGrid, f: F) -> Result<SupEstimate>
where
    F: Fn([f64; 2]) -> Result<f64> + Sync,
{
    let values = grid.map(f)?;
    let (i, v) = values
        .iter()
        .enumerate()
        .fold((0, -1.0), |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) });
    Ok(SupEstimate {
        value: v,
        argmax: grid.points()[i],
    })
}

/// Compass search for a larger `|f|` around `start`, beginning with step
/// `step` and halving down to `1e-6`. Gives up after 10_000 moves.
pub fn refine_sup<F>(f: F, start: SupEstimate, step: f64) -> Result<SupEstimate>
where
    F: Fn([f64; 2]) -> Result<f64>,
{
    let mut best = start;
    let mut h = step;
    let mut moves = 0;
    while h > 1e-6 && moves < 10_000 {
        let mut moved = false;
        for d in [[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h], [h, h], [-h, -h], [h, -h], [-h, h]] {
            let x = [best.argmax[0] + d[0], best.argmax[1] + d[1]];
            let v = f(x)?.abs();
            if v > best.value {
                best = SupEstimate { value: v, argmax: x };
                moved = true;
                moves += 1;
                break;
            }
        }
        if !moved {
            h /= 2.0;
        }
    }
    Ok(best)
}
