//! Monte Carlo estimates of `P(sqrt(n) ||F_n^A - F^B_{beta_n}||_inf > c)`
//! when the data come from `A` but the reference CDF uses `B` at the same
//! contamination level.
//!
//! Every replication draws from its own substream
//! `(seed, [scenario_id, replication, purpose])`, so estimates do not
//! depend on how replications are scheduled across workers.

use crate::cdf_engine::{mixture_pushforward_cdf, MixingMatrix2, MixtureCdf, QuadConfig};
use crate::distributions::ComponentLaw;
use crate::empirical::{build_eval_grid, draw_sample, sup_stat, EmpiricalCdf, EvalGridSpec};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::signed_measure::{gamma_diff_at, grid_sup, refine_sup, EvalGrid, NuMeasure};
use rayon::prelude::*;
use std::io::Write;
use std::time::Instant;

const SAMPLE_STREAM: u64 = 0;
const GRID_STREAM: u64 = 1;

/// How the contamination level depends on the sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSchedule {
    /// `beta_n = n^-rho`
    Power { rho: f64 },
    /// `beta_n = k / sqrt(n)`
    RootN { k: f64 },
    Fixed { beta: f64 },
}

impl BetaSchedule {
    pub fn beta(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            BetaSchedule::Power { rho } => nf.powf(-rho),
            BetaSchedule::RootN { k } => k / nf.sqrt(),
            BetaSchedule::Fixed { beta } => beta,
        }
    }

    pub fn rho(&self) -> Option<f64> {
        match *self {
            BetaSchedule::Power { rho } => Some(rho),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            BetaSchedule::Power { rho } => rho.is_finite() && rho > 0.0,
            BetaSchedule::RootN { k } => k.is_finite() && k >= 0.0,
            BetaSchedule::Fixed { beta } => (0.0..=1.0).contains(&beta),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("bad contamination schedule {self:?}")))
        }
    }
}

/// One cell of an experiment: a sample size, a schedule and a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: u64,
    /// generates the data
    pub a: MixingMatrix2,
    /// defines the reference CDF
    pub b: MixingMatrix2,
    pub xi: ComponentLaw,
    pub zeta: ComponentLaw,
    pub schedule: BetaSchedule,
    pub n: usize,
    pub c: f64,
    pub reps: usize,
    pub grid: EvalGridSpec,
    pub seed: u64,
    pub quad: QuadConfig,
}

impl Scenario {
    pub fn beta(&self) -> f64 {
        self.schedule.beta(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.reps < 1 {
            return Err(Error::Invalid("n and N must be >= 1".into()));
        }
        if !(self.c >= 0.0) {
            return Err(Error::Invalid(format!("threshold must be >= 0, got {}", self.c)));
        }
        if self.xi == self.zeta {
            return Err(Error::IdenticalLaws);
        }
        self.schedule.validate()?;
        let beta = self.beta();
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Beta(beta));
        }
        self.quad.validate()
    }

    fn stream(&self, rep: usize) -> RngStream {
        RngStream::with_path(self.seed, &[self.id, rep as u64])
    }
}

/// `sqrt(n) ||F_n^A - F^B_{beta_n}||_inf` over the replication's grid.
pub fn run_replication(scenario: &Scenario, rep: usize) -> Result<f64> {
    let law = crate::distributions::ContaminatedLaw::new(scenario.beta(), scenario.xi, scenario.zeta)?;
    let stream = scenario.stream(rep);
    let sample = draw_sample(&scenario.a, &law, scenario.n, &stream.child(SAMPLE_STREAM))?;
    let grid = build_eval_grid(&sample, &scenario.grid, &stream.child(GRID_STREAM))?;
    let ecdf = EmpiricalCdf::new(sample);
    let target = MixtureCdf {
        matrix: scenario.b,
        law,
        quad: scenario.quad,
    };
    sup_stat(&ecdf, &target, grid.points())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub scenario: Scenario,
    pub estimate: f64,
    pub stderr: f64,
    /// per-replication statistics in replication order, when retained
    pub stats: Option<Vec<f64>>,
    pub wall_ms: u128,
}

impl ScenarioResult {
    /// Re-threshold the retained statistics; exact, no resimulation.
    pub fn estimate_at(&self, c: f64) -> Option<f64> {
        let stats = self.stats.as_ref()?;
        Some(exceedance(stats, c))
    }

    pub fn median_stat(&self) -> Option<f64> {
        let mut s = self.stats.clone()?;
        s.sort_by(f64::total_cmp);
        let m = s.len();
        Some(if m % 2 == 1 { s[m / 2] } else { 0.5 * (s[m / 2 - 1] + s[m / 2]) })
    }
}

pub(crate) fn exceedance(stats: &[f64], c: f64) -> f64 {
    stats.iter().filter(|&&s| s > c).count() as f64 / stats.len() as f64
}

pub(crate) fn binomial_stderr(p: f64, reps: usize) -> f64 {
    (p * (1.0 - p) / reps as f64).sqrt()
}

/// `(1/N) sum 1(X_k > c)` over `N` independent replications. Uses the
/// ambient rayon pool; the result is identical for any pool size.
pub fn estimate_probability(scenario: &Scenario, retain: bool) -> Result<ScenarioResult> {
    scenario.validate()?;
    let start = Instant::now();
    let stats: Vec<f64> = (0..scenario.reps)
        .into_par_iter()
        .map(|rep| run_replication(scenario, rep))
        .collect::<Result<_>>()?;
    let estimate = exceedance(&stats, scenario.c);
    Ok(ScenarioResult {
        scenario: scenario.clone(),
        estimate,
        stderr: binomial_stderr(estimate, scenario.reps),
        stats: retain.then_some(stats),
        wall_ms: start.elapsed().as_millis(),
    })
}

/// A grid of scenarios: every schedule crossed with every sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub label: String,
    pub a: MixingMatrix2,
    pub b: MixingMatrix2,
    pub xi: ComponentLaw,
    pub zeta: ComponentLaw,
    pub schedules: Vec<BetaSchedule>,
    pub n_list: Vec<usize>,
    pub c: f64,
    pub reps: usize,
    pub grid: EvalGridSpec,
    pub seed: u64,
    pub retain: bool,
    pub quad: QuadConfig,
}

/// Named sweeps over the `alpha` matrix pair, each at a desk or full scale.
/// Their command-line names are `fig1-left` and `fig1-right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// rho in {0.25, 0.35, 0.50, 0.75}, n up to 5000
    SizeSweep,
    /// n = 50000, rho from 0.25 to 0.75 in steps of 0.05
    RhoSweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// N = 200 replications, M = 500 grid points
    Desk,
    /// N = 1000 replications, M = 1000 grid points
    Full,
}

pub const SIZE_SWEEP_RHOS: [f64; 4] = [0.25, 0.35, 0.50, 0.75];
pub const SIZE_SWEEP_N: [usize; 7] = [100, 250, 500, 1000, 2000, 3500, 5000];
pub const RHO_SWEEP_N: usize = 50_000;

impl Preset {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fig1-left" | "size-sweep" => Ok(Preset::SizeSweep),
            "fig1-right" | "rho-sweep" => Ok(Preset::RhoSweep),
            _ => Err(Error::Invalid(format!("unknown preset {s:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::SizeSweep => "fig1-left",
            Preset::RhoSweep => "fig1-right",
        }
    }

    pub fn rhos(self) -> Vec<f64> {
        match self {
            Preset::SizeSweep => SIZE_SWEEP_RHOS.to_vec(),
            Preset::RhoSweep => (0..=10).map(|i| (25 + 5 * i) as f64 / 100.0).collect(),
        }
    }

    pub fn n_list(self) -> Vec<usize> {
        match self {
            Preset::SizeSweep => SIZE_SWEEP_N.to_vec(),
            Preset::RhoSweep => vec![RHO_SWEEP_N],
        }
    }

    /// Sweep over the `alpha` matrix pair with `c = 1`.
    pub fn sweep(self, scale: Scale, alpha: f64, xi: ComponentLaw, seed: u64) -> Result<SweepConfig> {
        let (reps, points) = match scale {
            Scale::Desk => (200, 500),
            Scale::Full => (1000, 1000),
        };
        Ok(SweepConfig {
            label: self.name().to_string(),
            a: MixingMatrix2::lower_pair(alpha)?,
            b: MixingMatrix2::upper_pair(alpha)?,
            xi,
            zeta: ComponentLaw::StandardNormal,
            schedules: self.rhos().into_iter().map(|rho| BetaSchedule::Power { rho }).collect(),
            n_list: self.n_list(),
            c: 1.0,
            reps,
            grid: EvalGridSpec {
                mode: crate::empirical::GridMode::CornerSubsample,
                points,
            },
            seed,
            retain: false,
            quad: QuadConfig::default(),
        })
    }
}

impl SweepConfig {
    /// Scenarios in output order: schedule-major, sample size minor.
    pub fn scenarios(&self) -> Result<Vec<Scenario>> {
        if self.n_list.is_empty() {
            return Err(Error::Empty("n list"));
        }
        if self.schedules.is_empty() {
            return Err(Error::Empty("rho list"));
        }
        let mut out = Vec::with_capacity(self.schedules.len() * self.n_list.len());
        for schedule in &self.schedules {
            for &n in &self.n_list {
                let s = Scenario {
                    id: out.len() as u64,
                    a: self.a,
                    b: self.b,
                    xi: self.xi,
                    zeta: self.zeta,
                    schedule: *schedule,
                    n,
                    c: self.c,
                    reps: self.reps,
                    grid: EvalGridSpec {
                        points: self.grid.points,
                        mode: self.grid.mode,
                    },
                    seed: self.seed,
                    quad: self.quad,
                };
                s.validate()?;
                out.push(s);
            }
        }
        Ok(out)
    }
}

/// One result per scenario, in scenario order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<ScenarioResult>> {
    config
        .scenarios()?
        .iter()
        .map(|s| estimate_probability(s, config.retain))
        .collect()
}

pub const CSV_HEADER: &str = "scenario_id,rho,beta,n,c,N,grid_mode,grid_points,estimate,stderr,seed,wall_ms";

/// Writes `# key=value` metadata lines, the header and one row per result.
/// `wall_ms` is written as 0 unless `timing` is set, so that identical
/// inputs give byte-identical files.
pub fn write_csv<W: Write>(
    out: &mut W,
    metadata: &[(String, String)],
    results: &[ScenarioResult],
    timing: bool,
) -> Result<()> {
    for (k, v) in metadata {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "{CSV_HEADER}")?;
    for r in results {
        let s = &r.scenario;
        let rho = s.schedule.rho().map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            s.id,
            rho,
            s.beta(),
            s.n,
            s.c,
            s.reps,
            s.grid.mode.name(),
            s.grid.points,
            r.estimate,
            r.stderr,
            s.seed,
            if timing { r.wall_ms } else { 0 },
        )?;
    }
    Ok(())
}

/// Result of [`estimate_k`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KEstimate {
    /// `sup |Gamma(A, B, nu)| * ||xi - zeta||_inf`
    pub k: f64,
    /// `sup |F^A_beta - F^B_beta| / beta` at the cross-check level
    pub crosscheck: f64,
    pub crosscheck_beta: f64,
    pub argmax: [f64; 2],
}

impl KEstimate {
    pub fn relative_gap(&self) -> f64 {
        if self.k == 0.0 && self.crosscheck == 0.0 {
            0.0
        } else {
            (self.crosscheck - self.k).abs() / self.k.max(self.crosscheck)
        }
    }
}

pub const K_CROSSCHECK_BETA: f64 = 0.005;

/// Slope `K` of `beta -> ||F^A_beta - F^B_beta||_inf` at zero, by the
/// first-order coefficient and by a small-beta difference quotient. Both
/// suprema are grid maxima refined by local search.
pub fn estimate_k(
    a: &MixingMatrix2,
    b: &MixingMatrix2,
    nu: &NuMeasure,
    grid: &EvalGrid,
    quad: &QuadConfig,
) -> Result<KEstimate> {
    let base = nu.contaminated(0.0)?;
    let gap = grid_sup(grid, |x| {
        Ok(mixture_pushforward_cdf(a, &base, x, quad)? - mixture_pushforward_cdf(b, &base, x, quad)?)
    })?;
    if gap.value > 1e-7 {
        return Err(Error::Invalid(format!(
            "F^A and F^B differ by {:.3e}; K is only defined when they coincide",
            gap.value
        )));
    }
    let step = grid_step(grid);
    let diff = |x| gamma_diff_at(a, b, nu, x, quad);
    let g = refine_sup(diff, grid_sup(grid, diff)?, step)?;
    let beta = K_CROSSCHECK_BETA;
    let law = nu.contaminated(beta)?;
    let quotient = |x| {
        Ok((mixture_pushforward_cdf(a, &law, x, quad)? - mixture_pushforward_cdf(b, &law, x, quad)?) / beta)
    };
    let f = refine_sup(quotient, grid_sup(grid, quotient)?, step)?;
    Ok(KEstimate {
        k: g.value * nu.norm_c(),
        crosscheck: f.value,
        crosscheck_beta: beta,
        argmax: g.argmax,
    })
}

/// Smallest positive coordinate gap between grid points; the starting
/// step for local refinement.
pub(crate) fn grid_step(grid: &EvalGrid) -> f64 {
    let mut xs: Vec<f64> = grid.points().iter().map(|p| p[0]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min).min(1.0)
}

/// `exp(log(c / K) / (1/2 - rho))`: the sample size beyond which
/// `sqrt(n) K n^-rho` exceeds `c`.
pub fn predict_threshold_n(rho: f64, c: f64, k: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 0.5) {
        return Err(Error::Invalid(format!("rho must lie in (0, 1/2), got {rho}")));
    }
    if !(c > 0.0 && k > 0.0) {
        return Err(Error::Invalid("c and K must be positive".into()));
    }
    Ok(((c / k).ln() / (0.5 - rho)).exp())
}
