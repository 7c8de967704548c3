//! Univariate building blocks: the component laws, the contaminated
//! mixture `beta * xi + (1 - beta) * zeta`, and the Kolmogorov distance
//! between univariate laws.

use crate::error::{Error, Result};
use crate::special::{norm_cdf, norm_pdf};
use rand::Rng;
use rand_distr::StandardNormal;

/// Mean-zero (or, opt-in, uncentered) univariate component law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentLaw {
    StandardNormal,
    /// `Exp(1) - 1`, support `[-1, inf)`, mean zero.
    CenteredExponential,
    /// `Exp(1)` with support `[0, inf)`. Not mean zero; only for
    /// reproducing a literal reading of the original experiment.
    StandardExponential,
}

impl ComponentLaw {
    /// Left end of the support for the exponential laws.
    pub fn support_start(self) -> Option<f64> {
        match self {
            ComponentLaw::StandardNormal => None,
            ComponentLaw::CenteredExponential => Some(-1.0),
            ComponentLaw::StandardExponential => Some(0.0),
        }
    }

    pub fn is_gaussian(self) -> bool {
        matches!(self, ComponentLaw::StandardNormal)
    }

    pub fn mean(self) -> f64 {
        match self {
            ComponentLaw::StandardExponential => 1.0,
            _ => 0.0,
        }
    }

    /// CDF; defined for all of the extended real line.
    pub fn cdf(self, t: f64) -> f64 {
        match self.support_start() {
            None => norm_cdf(t),
            Some(s) => {
                if t <= s {
                    0.0
                } else {
                    -(-(t - s)).exp_m1()
                }
            }
        }
    }

    pub fn pdf(self, t: f64) -> f64 {
        match self.support_start() {
            None => norm_pdf(t),
            Some(s) => {
                if t < s {
                    0.0
                } else {
                    (-(t - s)).exp()
                }
            }
        }
    }

    /// Interval outside which the law has mass below `~1e-80` (normal) or
    /// `exp(-2 * radius)` (exponential).
    pub fn effective_support(self, radius: f64) -> (f64, f64) {
        match self.support_start() {
            None => (-radius, radius),
            Some(s) => (s, s + 2.0 * radius),
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self.support_start() {
            None => rng.sample(StandardNormal),
            Some(s) => {
                // 1 - U lies in (0, 1], so the log is finite.
                let u = 1.0 - rng.random::<f64>();
                -u.ln() + s
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ComponentLaw::StandardNormal => "normal",
            ComponentLaw::CenteredExponential => "exp-centered",
            ComponentLaw::StandardExponential => "exp",
        }
    }
}

/// CDF of a component law at a finite point.
pub fn comp_cdf(law: ComponentLaw, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::NonFinite("t"));
    }
    Ok(law.cdf(t))
}

/// One draw from a component law.
pub fn comp_sample<R: Rng + ?Sized>(law: ComponentLaw, rng: &mut R) -> f64 {
    law.sample(rng)
}

/// `P_e(beta) = beta * xi + (1 - beta) * zeta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContaminatedLaw {
    beta: f64,
    xi: ComponentLaw,
    zeta: ComponentLaw,
}

impl ContaminatedLaw {
    pub fn new(beta: f64, xi: ComponentLaw, zeta: ComponentLaw) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Beta(beta));
        }
        if xi == zeta {
            return Err(Error::IdenticalLaws);
        }
        Ok(Self { beta, xi, zeta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn xi(&self) -> ComponentLaw {
        self.xi
    }

    pub fn zeta(&self) -> ComponentLaw {
        self.zeta
    }

    /// Same components, different contamination level.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(beta, self.xi, self.zeta)
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.beta * self.xi.cdf(t) + (1.0 - self.beta) * self.zeta.cdf(t)
    }

    /// Latent Bernoulli(beta) selector, then a draw from the chosen
    /// component. Always consumes one selector uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if rng.random::<f64>() < self.beta {
            self.xi.sample(rng)
        } else {
            self.zeta.sample(rng)
        }
    }
}

pub fn contaminated_cdf(law: &ContaminatedLaw, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::NonFinite("t"));
    }
    Ok(law.cdf(t))
}

pub fn contaminated_sample<R: Rng + ?Sized>(law: &ContaminatedLaw, rng: &mut R) -> f64 {
    law.sample(rng)
}

/// Anything with a univariate CDF.
pub trait UnivariateCdf {
    fn cdf_at(&self, t: f64) -> f64;

    /// Points where the CDF may have a kink (support edges).
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl UnivariateCdf for ComponentLaw {
    fn cdf_at(&self, t: f64) -> f64 {
        self.cdf(t)
    }

    fn kinks(&self) -> Vec<f64> {
        self.support_start().into_iter().collect()
    }
}

impl UnivariateCdf for ContaminatedLaw {
    fn cdf_at(&self, t: f64) -> f64 {
        self.cdf(t)
    }

    fn kinks(&self) -> Vec<f64> {
        let mut k = self.xi.kinks();
        k.extend(self.zeta.kinks());
        k
    }
}

const UNIV_GRID_POINTS: usize = 100_001;
const UNIV_GRID_RADIUS: f64 = 20.0;

/// `sup_t |F_a(t) - F_b(t)|` from a dense grid on `[-20, 20]`, the support
/// edges of both laws, and a golden-section polish around the best grid
/// point.
pub fn kolmogorov_distance_univ<A, B>(a: &A, b: &B) -> f64
where
    A: UnivariateCdf + ?Sized,
    B: UnivariateCdf + ?Sized,
{
    let diff = |t: f64| (a.cdf_at(t) - b.cdf_at(t)).abs();
    let step = 2.0 * UNIV_GRID_RADIUS / (UNIV_GRID_POINTS - 1) as f64;
    let mut best = 0.0;
    let mut best_t = 0.0;
    for i in 0..UNIV_GRID_POINTS {
        let t = -UNIV_GRID_RADIUS + i as f64 * step;
        let d = diff(t);
        if d > best {
            best = d;
            best_t = t;
        }
    }
    for t in a.kinks().into_iter().chain(b.kinks()) {
        let d = diff(t);
        if d > best {
            best = d;
            best_t = t;
        }
    }
    best.max(golden_max(&diff, best_t - step, best_t + step))
}

/// Golden-section search for the maximum of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    f1.max(f2).max(f(lo)).max(f(hi))
}
