//! Numerical checks of the structural results: first-order expansion in
//! `beta`, the `2p` norm bounds, Gaussian non-identifiability at `beta = 0`
//! and the linear decay of `||F^A_beta - F^B_beta||_inf`.

use crate::cdf_engine::{mixture_pushforward_cdf, MixingMatrix2, QuadConfig};
use crate::distributions::{kolmogorov_distance_univ, ComponentLaw, ContaminatedLaw};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::signed_measure::{gamma_diff_at, gamma_k_at, placement_term, sup_on_grid, EvalGrid, NuMeasure};
use rand::Rng;
use std::fmt;
use std::io::Write;

/// Every threshold used by the checks and the acceptance suite.
pub mod tolerance {
    /// |polynomial reconstruction - mixture CDF|
    pub const RECONSTRUCTION: f64 = 1e-8;
    /// |semi-analytic CDF - iterated 2-D quadrature|
    pub const QUADRATURE_ORACLE: f64 = 1e-7;
    /// binomial standard errors allowed against a Monte Carlo oracle
    pub const MC_SIGMAS: f64 = 4.0;
    /// window for sup|D_beta - Gamma_1| at beta over the same at 2 beta
    pub const HALVING_RATIO: (f64, f64) = (0.35, 0.65);
    /// the 2p bound on ||Gamma_1(A)||, p = 2
    pub const GAMMA1_BOUND: f64 = 4.0;
    /// ||L_A(zeta (x) nu)|| <= ||zeta||_tv ||nu||_inf * 2
    pub const SINGLE_TERM_BOUND: f64 = 2.0;
    /// sup|F^A - F^B| when A A^t = B B^t and zeta is Gaussian
    pub const GAUSSIAN_EQUAL: f64 = 1e-7;
    /// sup|F^A - F^{AP}| for a column permutation P
    pub const PERMUTATION_EQUAL: f64 = 1e-8;
    /// sup|F^A_beta - F^B_beta| must exceed this at beta = 0.5
    pub const NON_GAUSSIAN_GAP: f64 = 1e-4;
    /// relative stability of r(beta) and its agreement with sup|Gamma| c
    pub const LINEAR_DECAY_REL: f64 = 0.05;
    /// |dist(P_e(beta), zeta) - beta dist(xi, zeta)|
    pub const CONTAMINATION_LINEAR: f64 = 1e-6;
    /// pointwise spread of the normalized direction across beta
    pub const CONTAMINATION_DIRECTION: f64 = 1e-9;
    /// joint standard errors for comparing two Monte Carlo estimates
    pub const JOINT_SIGMAS: f64 = 3.0;
    /// sandwich slack in standard errors
    pub const SANDWICH_SIGMAS: f64 = 3.0;
    /// lower bound on the rho = 0.25 estimate at n = 5000
    pub const SLOW_RATE_DETECTION: f64 = 0.9;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relation {
    AtMost(f64),
    Above(f64),
    Within(f64, f64),
}

impl Relation {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Relation::AtMost(t) => v <= t,
            Relation::Above(t) => v > t,
            Relation::Within(lo, hi) => (lo..=hi).contains(&v),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::AtMost(t) => write!(f, "<= {t}"),
            Relation::Above(t) => write!(f, "> {t}"),
            Relation::Within(lo, hi) => write!(f, "in [{lo}, {hi}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
}

impl Measurement {
    pub fn passed(&self) -> bool {
        self.relation.holds(self.value)
    }
}

/// Outcome of one check; passes iff every measurement is within bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub id: &'static str,
    pub measurements: Vec<Measurement>,
}

impl CheckReport {
    fn new(id: &'static str) -> Self {
        Self {
            id,
            measurements: Vec::new(),
        }
    }

    fn push(&mut self, name: impl Into<String>, value: f64, relation: Relation) {
        self.measurements.push(Measurement {
            name: name.into(),
            value,
            relation,
        });
    }

    pub fn pass(&self) -> bool {
        self.measurements.iter().all(Measurement::passed)
    }
}

pub const REPORT_HEADER: &str = "check,quantity,value,relation,pass";

pub fn write_reports<W: Write>(out: &mut W, reports: &[CheckReport]) -> Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for r in reports {
        for m in &r.measurements {
            writeln!(out, "{},{},{},{},{}", r.id, m.name, m.value, m.relation, m.passed())?;
        }
    }
    Ok(())
}

/// Inputs shared by all checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckContext {
    pub a: MixingMatrix2,
    pub b: MixingMatrix2,
    pub nu: NuMeasure,
    pub grid: EvalGrid,
    pub quad: QuadConfig,
    pub seed: u64,
}

impl CheckContext {
    /// The `alpha`-pair of matrices with a centered-exponential
    /// contamination of a standard normal, on the default grid.
    pub fn pair_defaults(alpha: f64, xi: ComponentLaw) -> Result<Self> {
        Ok(Self {
            a: MixingMatrix2::lower_pair(alpha)?,
            b: MixingMatrix2::upper_pair(alpha)?,
            nu: NuMeasure::new(xi, ComponentLaw::StandardNormal)?,
            grid: EvalGrid::default_square(),
            quad: QuadConfig::default(),
            seed: 20_240_601,
        })
    }

    fn law(&self, beta: f64) -> Result<ContaminatedLaw> {
        self.nu.contaminated(beta)
    }
}

pub const FIRST_ORDER_BETAS: [f64; 3] = [0.02, 0.01, 0.005];

/// `D_beta = (F^A_beta - F^A) / (beta c)` approaches `Gamma_1(A)` at rate
/// `beta`, and `F^A_beta -> F^A` uniformly.
pub fn check_first_order(ctx: &CheckContext, a: &MixingMatrix2) -> Result<CheckReport> {
    let c = ctx.nu.norm_c();
    let mut remainder = Vec::new();
    let mut distance = Vec::new();
    let base = ctx.law(0.0)?;
    let f0 = ctx.grid.map(|x| mixture_pushforward_cdf(a, &base, x, &ctx.quad))?;
    let g1 = ctx.grid.map(|x| gamma_k_at(a, &ctx.nu, 1, x, &ctx.quad))?;
    for beta in FIRST_ORDER_BETAS {
        let law = ctx.law(beta)?;
        let fb = ctx.grid.map(|x| mixture_pushforward_cdf(a, &law, x, &ctx.quad))?;
        let rem: Vec<f64> = fb
            .iter()
            .zip(&f0)
            .zip(&g1)
            .map(|((fb, f0), g1)| (fb - f0) / (beta * c) - g1)
            .collect();
        let dist: Vec<f64> = fb.iter().zip(&f0).map(|(fb, f0)| fb - f0).collect();
        remainder.push(sup_on_grid(&rem)?);
        distance.push(sup_on_grid(&dist)?);
    }
    let mut r = CheckReport::new("first-order");
    let (lo, hi) = tolerance::HALVING_RATIO;
    for i in 0..FIRST_ORDER_BETAS.len() {
        r.push(format!("sup|D-G1| beta={}", FIRST_ORDER_BETAS[i]), remainder[i], Relation::AtMost(f64::INFINITY));
    }
    for i in 1..FIRST_ORDER_BETAS.len() {
        r.push(
            format!("ratio beta={}/{}", FIRST_ORDER_BETAS[i], FIRST_ORDER_BETAS[i - 1]),
            remainder[i] / remainder[i - 1],
            Relation::Within(lo, hi),
        );
        r.push(
            format!("sup|F_beta-F| decrease {}->{}", FIRST_ORDER_BETAS[i - 1], FIRST_ORDER_BETAS[i]),
            distance[i] - distance[i - 1],
            Relation::AtMost(0.0),
        );
    }
    Ok(r)
}

/// `n` seeded random invertible matrices with entries in `[-2, 2]` and
/// `|det| >= 0.1`.
pub fn random_matrices(seed: u64, n: usize) -> Vec<MixingMatrix2> {
    let mut rng = RngStream::with_path(seed, &[0x4d41_5452]).rng();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let e: [f64; 4] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        if let Ok(m) = MixingMatrix2::new(e[0], e[1], e[2], e[3]) {
            if m.determinant().abs() >= 0.1 {
                out.push(m);
            }
        }
    }
    out
}

/// `||Gamma_1(A)|| <= 2p` and each placement term `<= 2` on the grid.
pub fn check_norm_bounds(ctx: &CheckContext, matrices: &[(String, MixingMatrix2)]) -> Result<CheckReport> {
    let mut r = CheckReport::new("norm-bounds");
    for (name, m) in matrices {
        let t1 = ctx.grid.map(|x| placement_term(m, &ctx.nu, [true, false], x, &ctx.quad))?;
        let t2 = ctx.grid.map(|x| placement_term(m, &ctx.nu, [false, true], x, &ctx.quad))?;
        let g1: Vec<f64> = t1.iter().zip(&t2).map(|(a, b)| a + b).collect();
        r.push(format!("{name} sup|G1|"), sup_on_grid(&g1)?, Relation::AtMost(tolerance::GAMMA1_BOUND));
        r.push(format!("{name} sup|nu(x)zeta|"), sup_on_grid(&t1)?, Relation::AtMost(tolerance::SINGLE_TERM_BOUND));
        r.push(format!("{name} sup|zeta(x)nu|"), sup_on_grid(&t2)?, Relation::AtMost(tolerance::SINGLE_TERM_BOUND));
    }
    Ok(r)
}

/// Equal Gaussian CDFs for `A A^t = B B^t`; strictly different CDFs once
/// the error law is non-Gaussian.
pub fn check_gaussian_equivalence(ctx: &CheckContext) -> Result<CheckReport> {
    let mut r = CheckReport::new("gaussian-equivalence");
    let (ga, gb) = (ctx.a.gram(), ctx.b.gram());
    let gram_gap = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (ga[i][j] - gb[i][j]).abs())
        .fold(0.0, f64::max);
    r.push("max|AA^t-BB^t|", gram_gap, Relation::AtMost(1e-12));
    let sup_diff = |a: &MixingMatrix2, b: &MixingMatrix2, beta: f64| -> Result<f64> {
        let law = ctx.law(beta)?;
        let v = ctx.grid.map(|x| {
            Ok(mixture_pushforward_cdf(a, &law, x, &ctx.quad)? - mixture_pushforward_cdf(b, &law, x, &ctx.quad)?)
        })?;
        sup_on_grid(&v)
    };
    r.push("sup|FA-FB| beta=0", sup_diff(&ctx.a, &ctx.b, 0.0)?, Relation::AtMost(tolerance::GAUSSIAN_EQUAL));
    r.push("sup|FA-FB| beta=0.5", sup_diff(&ctx.a, &ctx.b, 0.5)?, Relation::Above(tolerance::NON_GAUSSIAN_GAP));
    r.push(
        "sup|FA-FAP| beta=0.5",
        sup_diff(&ctx.a, &ctx.a.swap_columns(), 0.5)?,
        Relation::AtMost(tolerance::PERMUTATION_EQUAL),
    );
    Ok(r)
}

pub const DECAY_BETAS: [f64; 2] = [0.01, 0.005];

/// `r(beta) = sup|F^A_beta - F^B_beta| / beta` and the first-order slope
/// `sup|Gamma(A, B, nu)| c`, all as grid maxima.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecaySlopes {
    pub r: [f64; 2],
    pub gamma_slope: f64,
}

pub fn decay_slopes(ctx: &CheckContext, a: &MixingMatrix2, b: &MixingMatrix2) -> Result<DecaySlopes> {
    let mut r = [0.0; 2];
    for (slot, beta) in r.iter_mut().zip(DECAY_BETAS) {
        let law = ctx.law(beta)?;
        let v = ctx.grid.map(|x| {
            Ok(mixture_pushforward_cdf(a, &law, x, &ctx.quad)? - mixture_pushforward_cdf(b, &law, x, &ctx.quad)?)
        })?;
        *slot = sup_on_grid(&v)? / beta;
    }
    let g = ctx.grid.map(|x| gamma_diff_at(a, b, &ctx.nu, x, &ctx.quad))?;
    Ok(DecaySlopes {
        r,
        gamma_slope: sup_on_grid(&g)? * ctx.nu.norm_c(),
    })
}

fn rel_gap(x: f64, y: f64) -> f64 {
    if x == y {
        0.0
    } else {
        (x - y).abs() / x.abs().max(y.abs())
    }
}

pub fn check_linear_decay(ctx: &CheckContext) -> Result<CheckReport> {
    let s = decay_slopes(ctx, &ctx.a, &ctx.b)?;
    let mut r = CheckReport::new("linear-decay");
    let rel = tolerance::LINEAR_DECAY_REL;
    r.push("r(0.01)", s.r[0], Relation::AtMost(4.0 * 2.0 * ctx.nu.norm_c()));
    r.push("r(0.005)", s.r[1], Relation::AtMost(4.0 * 2.0 * ctx.nu.norm_c()));
    r.push("sup|Gamma|*c", s.gamma_slope, Relation::Above(0.0));
    r.push("rel|r(0.01)-r(0.005)|", rel_gap(s.r[0], s.r[1]), Relation::AtMost(rel));
    r.push("rel|r(0.005)-sup|Gamma|c|", rel_gap(s.r[1], s.gamma_slope), Relation::AtMost(rel));
    Ok(r)
}

pub const CONTAMINATION_BETAS: [f64; 3] = [0.1, 0.3, 0.7];

/// The contaminated family has a distance to `zeta` linear in `beta` and a
/// constant normalized direction.
pub fn check_contamination(xi: ComponentLaw, zeta: ComponentLaw) -> Result<CheckReport> {
    if xi == zeta {
        return Err(Error::IdenticalLaws);
    }
    let base = kolmogorov_distance_univ(&xi, &zeta);
    let mut r = CheckReport::new("contamination");
    let ts: Vec<f64> = (0..1001).map(|i| -10.0 + i as f64 * 0.02).collect();
    let mut dirs = Vec::new();
    for beta in CONTAMINATION_BETAS {
        let law = ContaminatedLaw::new(beta, xi, zeta)?;
        let d = kolmogorov_distance_univ(&law, &zeta);
        r.push(
            format!("|dist-beta*c| beta={beta}"),
            (d - beta * base).abs(),
            Relation::AtMost(tolerance::CONTAMINATION_LINEAR),
        );
        dirs.push(ts.iter().map(|&t| (law.cdf(t) - zeta.cdf(t)) / d).collect::<Vec<f64>>());
    }
    let spread = dirs[1..]
        .iter()
        .flat_map(|d| d.iter().zip(&dirs[0]).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    r.push("direction spread", spread, Relation::AtMost(tolerance::CONTAMINATION_DIRECTION));
    let zero = ContaminatedLaw::new(0.0, xi, zeta)?;
    r.push("dist beta=0", kolmogorov_distance_univ(&zero, &zeta), Relation::AtMost(0.0));
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckId {
    FirstOrder,
    NormBounds,
    GaussianEquivalence,
    LinearDecay,
    Contamination,
}

impl CheckId {
    pub const ALL: [CheckId; 5] = [CheckId::FirstOrder, CheckId::NormBounds, CheckId::GaussianEquivalence, CheckId::LinearDecay, CheckId::Contamination];

    pub fn parse(s: &str) -> Result<Vec<CheckId>> {
        Ok(match s {
            "all" => Self::ALL.to_vec(),
            "thm31" | "first-order" => vec![CheckId::FirstOrder],
            "lem33" | "norm-bounds" => vec![CheckId::NormBounds],
            "lem35" | "gaussian-equivalence" => vec![CheckId::GaussianEquivalence],
            "cor34" | "linear-decay" => vec![CheckId::LinearDecay],
            "lem32" | "contamination" => vec![CheckId::Contamination],
            _ => return Err(Error::Invalid(format!("unknown check {s:?}"))),
        })
    }
}

/// The named matrices for the norm-bound check: the pair plus ten random
/// invertible matrices.
pub fn bound_matrices(ctx: &CheckContext) -> Vec<(String, MixingMatrix2)> {
    let mut m = vec![("A".to_string(), ctx.a), ("B".to_string(), ctx.b), ("I".to_string(), MixingMatrix2::identity())];
    m.extend(
        random_matrices(ctx.seed, 10)
            .into_iter()
            .enumerate()
            .map(|(i, a)| (format!("R{i}"), a)),
    );
    m
}

pub fn run_checks(ctx: &CheckContext, ids: &[CheckId]) -> Result<Vec<CheckReport>> {
    ids.iter()
        .map(|id| match id {
            CheckId::FirstOrder => check_first_order(ctx, &ctx.a),
            CheckId::NormBounds => check_norm_bounds(ctx, &bound_matrices(ctx)),
            CheckId::GaussianEquivalence => check_gaussian_equivalence(ctx),
            CheckId::LinearDecay => check_linear_decay(ctx),
            CheckId::Contamination => check_contamination(ctx.nu.xi(), ctx.nu.zeta()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse() -> CheckContext {
        let mut ctx = CheckContext::pair_defaults(0.4, ComponentLaw::CenteredExponential).unwrap();
        ctx.grid = EvalGrid::square(-4.0, 4.0, 21).unwrap();
        ctx
    }

    #[test]
    fn relations() {
        assert!(Relation::AtMost(1.0).holds(1.0));
        assert!(!Relation::Above(1.0).holds(1.0));
        assert!(Relation::Within(0.35, 0.65).holds(0.5));
        assert!(!Relation::Within(0.35, 0.65).holds(0.66));
        assert!(!Relation::AtMost(1.0).holds(f64::NAN));
    }

    #[test]
    fn parse_ids() {
        assert_eq!(CheckId::parse("all").unwrap().len(), 5);
        assert_eq!(CheckId::parse("thm31").unwrap(), vec![CheckId::FirstOrder]);
        assert!(CheckId::parse("nope").is_err());
    }

    #[test]
    fn contamination_passes_and_rejects_identical() {
        for xi in [ComponentLaw::CenteredExponential, ComponentLaw::StandardExponential] {
            let r = check_contamination(xi, ComponentLaw::StandardNormal).unwrap();
            assert!(r.pass(), "{r:?}");
        }
        assert!(matches!(
            check_contamination(ComponentLaw::StandardNormal, ComponentLaw::StandardNormal),
            Err(Error::IdenticalLaws)
        ));
    }

    #[test]
    fn coarse_checks_pass() {
        let ctx = coarse();
        let reports = run_checks(&ctx, &CheckId::ALL).unwrap();
        for r in &reports {
            assert!(r.pass(), "{r:?}");
        }
    }

    #[test]
    fn equal_matrices_have_no_decay() {
        let ctx = coarse();
        let s = decay_slopes(&ctx, &ctx.a, &ctx.a).unwrap();
        assert_eq!(s.r, [0.0, 0.0]);
        assert!(s.gamma_slope < 1e-12);
    }

    #[test]
    fn random_matrices_are_seeded_and_invertible() {
        let a = random_matrices(7, 10);
        assert_eq!(a, random_matrices(7, 10));
        assert!(a.iter().all(|m| m.determinant().abs() >= 0.1));
        assert_ne!(a, random_matrices(8, 10));
    }

    #[test]
    fn report_csv() {
        let mut r = CheckReport::new("x");
        r.push("q", 0.5, Relation::AtMost(1.0));
        let mut out = Vec::new();
        write_reports(&mut out, &[r]).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert_eq!(s, format!("{REPORT_HEADER}\nx,q,0.5,<= 1,true\n"));
    }
}
