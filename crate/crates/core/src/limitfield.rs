//! Draws approximating the law of `||W||_inf` for the `F^A`-Gaussian field,
//! and the two-sided bounds on the exceedance probability when the
//! contamination shrinks like `k / sqrt(n)`.
//!
//! `||W||_inf` is approximated by `sqrt(n0) ||F_n0 - F^A||_inf` under the
//! uncontaminated model with a large `n0`, reduced to the same kind of
//! grid as the experiment so both carry the same thinning bias.

use crate::cdf_engine::{MixingMatrix2, MixtureCdf, QuadConfig};
use crate::distributions::{ComponentLaw, ContaminatedLaw};
use crate::empirical::{build_eval_grid, draw_sample, sup_stat, EmpiricalCdf, EvalGridSpec};
use crate::error::{Error, Result};
use crate::montecarlo::binomial_stderr;
use crate::rng::RngStream;
use rayon::prelude::*;

/// Namespace for limit-law streams, disjoint from scenario ids.
const LIMIT_STREAM: u64 = 0x4c49_4d49_5400_0000;

pub const DEFAULT_N0: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LimitLawSample {
    pub draws: Vec<f64>,
    pub n0: usize,
    pub method: &'static str,
}

impl LimitLawSample {
    /// `P(||W|| > c)`.
    pub fn survival(&self, c: f64) -> f64 {
        self.draws.iter().filter(|&&d| d > c).count() as f64 / self.draws.len() as f64
    }

    /// `P(||W|| >= c)`.
    pub fn survival_closed(&self, c: f64) -> f64 {
        self.draws.iter().filter(|&&d| d >= c).count() as f64 / self.draws.len() as f64
    }

    pub fn stderr(&self, c: f64) -> f64 {
        binomial_stderr(self.survival(c), self.draws.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitConfig {
    pub a: MixingMatrix2,
    /// the Gaussian base law
    pub zeta: ComponentLaw,
    pub n0: usize,
    pub reps: usize,
    pub grid: EvalGridSpec,
    pub seed: u64,
    pub quad: QuadConfig,
}

/// `reps` independent draws of `sqrt(n0) ||F_n0 - F^A||_inf` with data from
/// `A zeta^{(x)2}`.
pub fn simulate_limit_sup(cfg: &LimitConfig) -> Result<LimitLawSample> {
    if cfg.n0 < 1 || cfg.reps < 1 {
        return Err(Error::Invalid("n0 and N must be >= 1".into()));
    }
    // the second component is never drawn at beta = 0
    let other = if cfg.zeta == ComponentLaw::StandardNormal {
        ComponentLaw::CenteredExponential
    } else {
        ComponentLaw::StandardNormal
    };
    let law = ContaminatedLaw::new(0.0, other, cfg.zeta)?;
    let target = MixtureCdf {
        matrix: cfg.a,
        law,
        quad: cfg.quad,
    };
    let draws = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let stream = RngStream::with_path(cfg.seed, &[LIMIT_STREAM, cfg.n0 as u64, rep as u64]);
            let sample = draw_sample(&cfg.a, &law, cfg.n0, &stream.child(0))?;
            let grid = build_eval_grid(&sample, &cfg.grid, &stream.child(1))?;
            sup_stat(&EmpiricalCdf::new(sample), &target, grid.points())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(LimitLawSample {
        draws,
        n0: cfg.n0,
        method: "empirical-process",
    })
}

/// Dimension of the model.
const P: f64 = 2.0;

/// `(P(||W|| > c + 4pk c_nu), P(||W|| >= c - 4pk c_nu))` estimated from
/// the draws, where `c_nu = ||xi - zeta||_inf`.
pub fn sandwich_bounds(k: f64, c: f64, limit: &LimitLawSample, norm_c: f64) -> Result<(f64, f64)> {
    if !(k >= 0.0 && c >= 0.0) {
        return Err(Error::Invalid("k and c must be >= 0".into()));
    }
    if limit.draws.is_empty() {
        return Err(Error::Empty("limit sample"));
    }
    let shift = 4.0 * P * k * norm_c;
    Ok((limit.survival(c + shift), limit.survival_closed(c - shift)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::GridMode;

    fn cfg(n0: usize, reps: usize) -> LimitConfig {
        LimitConfig {
            a: MixingMatrix2::lower_pair(0.4).unwrap(),
            zeta: ComponentLaw::StandardNormal,
            n0,
            reps,
            grid: EvalGridSpec {
                mode: GridMode::CornerSubsample,
                points: 300,
            },
            seed: 7,
            quad: QuadConfig::default(),
        }
    }

    #[test]
    fn draws_nonnegative_and_survival_monotone() {
        let s = simulate_limit_sup(&cfg(2000, 100)).unwrap();
        assert!(s.draws.iter().all(|&d| d >= 0.0));
        let ps: Vec<f64> = [0.5, 1.0, 1.5, 2.0].iter().map(|&c| s.survival(c)).collect();
        assert!(ps.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(s, simulate_limit_sup(&cfg(2000, 100)).unwrap());
    }

    #[test]
    fn sandwich_cases() {
        let s = LimitLawSample {
            draws: vec![0.2, 0.6, 0.9, 1.0, 1.3, 1.8, 2.5],
            n0: 1,
            method: "fixed",
        };
        let (lo, hi) = sandwich_bounds(0.0, 1.0, &s, 0.16).unwrap();
        assert_eq!(lo, s.survival(1.0));
        assert_eq!(hi, s.survival_closed(1.0));
        assert!((hi - lo - 1.0 / 7.0).abs() < 1e-15, "atom at c only");
        let (_, hi) = sandwich_bounds(10.0, 1.0, &s, 0.16).unwrap();
        assert_eq!(hi, 1.0);
        let (lo, hi) = sandwich_bounds(0.5, 1.0, &s, 0.16).unwrap();
        assert!(lo <= hi);
        assert!(sandwich_bounds(-1.0, 1.0, &s, 0.16).is_err());
    }

    #[test]
    fn continuous_draws_have_no_boundary_mass() {
        let s = simulate_limit_sup(&cfg(1000, 50)).unwrap();
        let (lo, hi) = sandwich_bounds(0.0, 1.0, &s, 0.16).unwrap();
        assert_eq!(lo, hi);
    }
}
