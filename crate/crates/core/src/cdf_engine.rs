//! Distribution functions of `A * eps` for 2x2 mixing matrices and
//! independent error coordinates.
//!
//! Gaussian-Gaussian products reduce to a bivariate normal orthant
//! probability with covariance `A A^t`. Every other product is a
//! one-dimensional integral over one error coordinate of its density times
//! the mass the other coordinate puts on the interval left feasible by
//! both half-plane constraints.

use crate::distributions::{ComponentLaw, ContaminatedLaw};
use crate::error::{Error, Result};
use crate::quadrature;
use crate::special::bvn_cdf;
use rand::Rng;

/// Smallest admissible `|det A|`.
pub const DET_EPS: f64 = 1e-12;

/// Invertible 2x2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingMatrix2 {
    m: [[f64; 2]; 2],
}

impl MixingMatrix2 {
    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Result<Self> {
        if ![a11, a12, a21, a22].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("matrix entry"));
        }
        let det = a11 * a22 - a12 * a21;
        if det.abs() <= DET_EPS {
            return Err(Error::Singular(det.abs()));
        }
        Ok(Self {
            m: [[a11, a12], [a21, a22]],
        })
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    /// `[[1, 0], [alpha, sqrt(1 - alpha^2)]]`.
    pub fn lower_pair(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Self::new(1.0, 0.0, alpha, (1.0 - alpha * alpha).sqrt())
    }

    /// `[[sqrt(1 - alpha^2), alpha], [0, 1]]`; shares `A A^t` with
    /// [`MixingMatrix2::lower_pair`] at the same `alpha`.
    pub fn upper_pair(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Self::new((1.0 - alpha * alpha).sqrt(), alpha, 0.0, 1.0)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.m[row][col]
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        self.m
    }

    pub fn determinant(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn apply(&self, e: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * e[0] + self.m[0][1] * e[1],
            self.m[1][0] * e[0] + self.m[1][1] * e[1],
        ]
    }

    /// `A A^t`, row-major.
    pub fn gram(&self) -> [[f64; 2]; 2] {
        let [[a, b], [c, d]] = self.m;
        [[a * a + b * b, a * c + b * d], [a * c + b * d, c * c + d * d]]
    }

    /// `A P` with `P` the swap permutation.
    pub fn swap_columns(&self) -> Self {
        let [[a, b], [c, d]] = self.m;
        Self {
            m: [[b, a], [d, c]],
        }
    }

    /// Column `j` as `(a_1j, a_2j)`.
    pub fn column(&self, j: usize) -> [f64; 2] {
        [self.m[0][j], self.m[1][j]]
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha.abs() >= 1.0 {
        return Err(Error::Invalid(format!("|alpha| must be < 1, got {alpha}")));
    }
    Ok(())
}

/// Law of each error coordinate of a pure product term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PureProductSpec {
    pub comps: [ComponentLaw; 2],
}

impl PureProductSpec {
    pub fn new(first: ComponentLaw, second: ComponentLaw) -> Self {
        Self {
            comps: [first, second],
        }
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.comps[1], self.comps[0])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Truncation radius in standard units for the outer integral.
    pub radius: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_subdivisions: 2000,
            radius: 20.0,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.radius > 0.0) {
            return Err(Error::Invalid("quadrature tolerance and radius must be positive".into()));
        }
        Ok(())
    }
}

fn check_point(x: [f64; 2]) -> Result<()> {
    if x[0].is_nan() || x[1].is_nan() {
        return Err(Error::NonFinite("evaluation point"));
    }
    Ok(())
}

/// `P(A eps <= x)` for independent `eps_i ~ spec.comps[i]`. Coordinates of
/// `x` may be `+inf` (constraint dropped) or `-inf` (probability zero).
pub fn pure_pushforward_cdf(
    a: &MixingMatrix2,
    spec: PureProductSpec,
    x: [f64; 2],
    cfg: &QuadConfig,
) -> Result<f64> {
    check_point(x)?;
    if x[0] == f64::NEG_INFINITY || x[1] == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if x[0] == f64::INFINITY && x[1] == f64::INFINITY {
        return Ok(1.0);
    }
    let [c0, c1] = spec.comps;
    if c0.is_gaussian() && c1.is_gaussian() {
        let g = a.gram();
        let s1 = g[0][0].sqrt();
        let s2 = g[1][1].sqrt();
        let rho = (g[0][1] / (s1 * s2)).clamp(-1.0, 1.0);
        return bvn_cdf(x[0] / s1, x[1] / s2, rho);
    }
    // Integrate over a Gaussian coordinate when there is one: the inner
    // mass is then an exponential CDF, which is cheaper than erfc.
    let outer = if c1.is_gaussian() { 1 } else { 0 };
    let inner = 1 - outer;
    Ok(conditional_integral(
        a.column(outer),
        a.column(inner),
        spec.comps[outer],
        spec.comps[inner],
        x,
        cfg,
    ))
}

/// `int f_outer(t) * P_inner(u : p_i t + q_i u <= x_i, i = 1, 2) dt`.
fn conditional_integral(
    p: [f64; 2],
    q: [f64; 2],
    outer: ComponentLaw,
    inner: ComponentLaw,
    x: [f64; 2],
    cfg: &QuadConfig,
) -> f64 {
    let (mut t_lo, mut t_hi) = outer.effective_support(cfg.radius);
    // rows that still constrain u, as (x_i, p_i, q_i)
    let mut rows: Vec<(f64, f64, f64)> = Vec::with_capacity(2);
    for i in 0..2 {
        if x[i] == f64::INFINITY {
            continue;
        }
        if q[i] == 0.0 {
            // p_i t <= x_i; p_i != 0 by invertibility
            let edge = x[i] / p[i];
            if p[i] > 0.0 {
                t_hi = t_hi.min(edge);
            } else {
                t_lo = t_lo.max(edge);
            }
        } else {
            rows.push((x[i], p[i], q[i]));
        }
    }
    if t_hi <= t_lo {
        return 0.0;
    }
    let bound = |row: &(f64, f64, f64), t: f64| (row.0 - row.1 * t) / row.2;
    let integrand = |t: f64| {
        let mut u_lo = f64::NEG_INFINITY;
        let mut u_hi = f64::INFINITY;
        for row in &rows {
            let b = bound(row, t);
            if row.2 > 0.0 {
                u_hi = u_hi.min(b);
            } else {
                u_lo = u_lo.max(b);
            }
        }
        if u_hi <= u_lo {
            return 0.0;
        }
        outer.pdf(t) * (inner.cdf(u_hi) - inner.cdf(u_lo))
    };

    let mut points = vec![t_lo, t_hi];
    if rows.len() == 2 {
        let (r1, r2) = (rows[0], rows[1]);
        let denom = r1.1 / r1.2 - r2.1 / r2.2;
        if denom != 0.0 {
            points.push((r1.0 / r1.2 - r2.0 / r2.2) / denom);
        }
    }
    if let Some(s) = inner.support_start() {
        for row in &rows {
            if row.1 != 0.0 {
                points.push((row.0 - row.2 * s) / row.1);
            }
        }
    }
    points.retain(|t| t.is_finite() && *t >= t_lo && *t <= t_hi);
    points.sort_by(f64::total_cmp);
    points.dedup();
    quadrature::integrate(&integrand, &points, cfg.abs_tol, cfg.max_subdivisions)
        .value
        .clamp(0.0, 1.0)
}

/// Binomial weights of the four component assignments, ordered
/// `(zeta, zeta), (xi, zeta), (zeta, xi), (xi, xi)`.
pub fn mixture_weights(beta: f64) -> [f64; 4] {
    let b = beta;
    let c = 1.0 - beta;
    [c * c, b * c, c * b, b * b]
}

/// Component specs in the order of [`mixture_weights`].
pub fn mixture_specs(law: &ContaminatedLaw) -> [PureProductSpec; 4] {
    let (xi, zeta) = (law.xi(), law.zeta());
    [
        PureProductSpec::new(zeta, zeta),
        PureProductSpec::new(xi, zeta),
        PureProductSpec::new(zeta, xi),
        PureProductSpec::new(xi, xi),
    ]
}

/// `F^A_beta(x)`: CDF of `A eps` with `eps` coordinates i.i.d. `law`.
pub fn mixture_pushforward_cdf(
    a: &MixingMatrix2,
    law: &ContaminatedLaw,
    x: [f64; 2],
    cfg: &QuadConfig,
) -> Result<f64> {
    let mut total = 0.0;
    for (w, spec) in mixture_weights(law.beta()).into_iter().zip(mixture_specs(law)) {
        if w != 0.0 {
            total += w * pure_pushforward_cdf(a, spec, x, cfg)?;
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Fraction of `n_mc` simulated `A eps` falling in the lower orthant at `x`.
pub fn oracle_cdf_mc<R: Rng + ?Sized>(
    a: &MixingMatrix2,
    law: &ContaminatedLaw,
    x: [f64; 2],
    n_mc: usize,
    rng: &mut R,
) -> Result<f64> {
    if n_mc == 0 {
        return Err(Error::Invalid("n_mc must be >= 1".into()));
    }
    check_point(x)?;
    let mut hits = 0usize;
    for _ in 0..n_mc {
        let e = [law.sample(rng), law.sample(rng)];
        let y = a.apply(e);
        if y[0] <= x[0] && y[1] <= x[1] {
            hits += 1;
        }
    }
    Ok(hits as f64 / n_mc as f64)
}

/// A bivariate distribution function usable as a goodness-of-fit target.
pub trait Cdf2: Sync {
    fn cdf(&self, x: [f64; 2]) -> f64;

    /// Left limit `lim_{y -> x, y < x} F(y)`; equals `cdf` for continuous
    /// targets.
    fn cdf_left(&self, x: [f64; 2]) -> f64 {
        self.cdf(x)
    }

    /// `(cdf(x), cdf_left(x))`; continuous targets evaluate once.
    fn cdf_and_left(&self, x: [f64; 2]) -> (f64, f64) {
        let g = self.cdf(x);
        (g, g)
    }
}

/// `F^A_beta` bundled with its quadrature settings.
#[derive(Debug, Clone, Copy)]
pub struct MixtureCdf {
    pub matrix: MixingMatrix2,
    pub law: ContaminatedLaw,
    pub quad: QuadConfig,
}

impl MixtureCdf {
    pub fn new(matrix: MixingMatrix2, law: ContaminatedLaw) -> Self {
        Self {
            matrix,
            law,
            quad: QuadConfig::default(),
        }
    }

    pub fn eval(&self, x: [f64; 2]) -> Result<f64> {
        mixture_pushforward_cdf(&self.matrix, &self.law, x, &self.quad)
    }
}

impl Cdf2 for MixtureCdf {
    fn cdf(&self, x: [f64; 2]) -> f64 {
        // the matrix and law were validated at construction; only a NaN
        // point can fail, and that is a caller bug
        self.eval(x).expect("mixture CDF at a NaN point")
    }
}
