//! Two-dimensional empirical distribution functions and the grid-reduced
//! scaled Kolmogorov statistic `sqrt(n) ||F_n - G||_inf`.

use crate::cdf_engine::{Cdf2, MixingMatrix2};
use crate::distributions::ContaminatedLaw;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::signed_measure::EvalGrid;
use rand::seq::index;

/// Where a sample came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleProvenance {
    pub matrix: MixingMatrix2,
    pub beta: f64,
    pub stream: RngStream,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample2D {
    points: Vec<[f64; 2]>,
    pub provenance: Option<SampleProvenance>,
}

impl Sample2D {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("sample"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sample point"));
        }
        Ok(Self {
            points,
            provenance: None,
        })
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
}

/// `n` i.i.d. draws of `A eps`, `eps` with i.i.d. coordinates from `law`.
pub fn draw_sample(a: &MixingMatrix2, law: &ContaminatedLaw, n: usize, stream: &RngStream) -> Result<Sample2D> {
    if n == 0 {
        return Err(Error::Invalid("sample size must be >= 1".into()));
    }
    let mut rng = stream.rng();
    let points = (0..n)
        .map(|_| {
            let e0 = law.sample(&mut rng);
            let e1 = law.sample(&mut rng);
            a.apply([e0, e1])
        })
        .collect();
    Ok(Sample2D {
        points,
        provenance: Some(SampleProvenance {
            matrix: *a,
            beta: law.beta(),
            stream: stream.clone(),
        }),
    })
}

/// Fenwick tree over counts.
struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self { tree: vec![0; n + 1] }
    }

    fn add(&mut self, i: usize) {
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over slots `[0, i)`.
    fn prefix(&self, i: usize) -> usize {
        let mut i = i;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i] as usize;
            i &= i - 1;
        }
        s
    }
}

/// Empirical CDF with the sample pre-sorted for offline dominance counting.
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sample: Sample2D,
    /// sample indices ordered by first coordinate
    by_x: Vec<usize>,
    /// second coordinates, sorted
    ys: Vec<f64>,
    /// slot of each sample point in `ys`
    y_slot: Vec<usize>,
}

impl EmpiricalCdf {
    pub fn new(sample: Sample2D) -> Self {
        let pts = sample.points();
        let n = pts.len();
        let mut by_x: Vec<usize> = (0..n).collect();
        by_x.sort_by(|&i, &j| pts[i][0].total_cmp(&pts[j][0]));
        let mut by_y: Vec<usize> = (0..n).collect();
        by_y.sort_by(|&i, &j| pts[i][1].total_cmp(&pts[j][1]));
        let mut y_slot = vec![0; n];
        for (slot, &i) in by_y.iter().enumerate() {
            y_slot[i] = slot;
        }
        let ys = by_y.iter().map(|&i| pts[i][1]).collect();
        Self {
            sample,
            by_x,
            ys,
            y_slot,
        }
    }

    pub fn sample(&self) -> &Sample2D {
        &self.sample
    }

    pub fn n(&self) -> usize {
        self.sample.len()
    }

    /// Dominance counts for every query, either `#{X_i <= x}` or, with
    /// `strict`, `#{X_i < x}` (both coordinates). Offline sweep in
    /// `O((n + M) log(n + M))`.
    pub fn dominance_counts(&self, queries: &[[f64; 2]], strict: bool) -> Vec<usize> {
        let pts = self.sample.points();
        let mut order: Vec<usize> = (0..queries.len()).collect();
        order.sort_by(|&i, &j| queries[i][0].total_cmp(&queries[j][0]));
        let mut fen = Fenwick::new(self.n());
        let mut out = vec![0; queries.len()];
        let mut next = 0;
        for qi in order {
            let q = queries[qi];
            while next < self.by_x.len() {
                let p = pts[self.by_x[next]];
                let inside = if strict { p[0] < q[0] } else { p[0] <= q[0] };
                if !inside {
                    break;
                }
                fen.add(self.y_slot[self.by_x[next]]);
                next += 1;
            }
            let cut = if strict {
                self.ys.partition_point(|&y| y < q[1])
            } else {
                self.ys.partition_point(|&y| y <= q[1])
            };
            out[qi] = fen.prefix(cut);
        }
        out
    }

    /// `F_n(x)` for one point, by direct counting.
    pub fn eval_point(&self, x: [f64; 2]) -> f64 {
        let c = self.sample.points().iter().filter(|p| p[0] <= x[0] && p[1] <= x[1]).count();
        c as f64 / self.n() as f64
    }
}

impl Cdf2 for EmpiricalCdf {
    fn cdf(&self, x: [f64; 2]) -> f64 {
        self.eval_point(x)
    }

    fn cdf_left(&self, x: [f64; 2]) -> f64 {
        let c = self.sample.points().iter().filter(|p| p[0] < x[0] && p[1] < x[1]).count();
        c as f64 / self.n() as f64
    }

    fn cdf_and_left(&self, x: [f64; 2]) -> (f64, f64) {
        (self.cdf(x), self.cdf_left(x))
    }
}

/// `F_n` at every grid point.
pub fn ecdf_eval_batch(ecdf: &EmpiricalCdf, grid: &[[f64; 2]]) -> Result<Vec<f64>> {
    if grid.iter().flatten().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("grid point"));
    }
    let n = ecdf.n() as f64;
    Ok(ecdf.dominance_counts(grid, false).into_iter().map(|c| c as f64 / n).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridMode {
    /// `M` of the `n^2` corner pairs `(x_i^(1), x_j^(2))`, uniformly
    /// without replacement.
    CornerSubsample,
    /// `ceil(sqrt(M))^2` tensor grid of marginal sample quantiles.
    QuantileTensor,
}

impl GridMode {
    pub fn name(self) -> &'static str {
        match self {
            GridMode::CornerSubsample => "corner-subsample",
            GridMode::QuantileTensor => "quantile-tensor",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "corner-subsample" | "corner" => Ok(GridMode::CornerSubsample),
            "quantile-tensor" | "quantile" => Ok(GridMode::QuantileTensor),
            _ => Err(Error::Invalid(format!("unknown grid mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EvalGridSpec {
    pub mode: GridMode,
    pub points: usize,
}

impl Default for EvalGridSpec {
    fn default() -> Self {
        Self {
            mode: GridMode::CornerSubsample,
            points: 1000,
        }
    }
}

pub fn build_eval_grid(sample: &Sample2D, spec: &EvalGridSpec, stream: &RngStream) -> Result<EvalGrid> {
    if spec.points < 1 {
        return Err(Error::Invalid("grid needs at least one point".into()));
    }
    let pts = sample.points();
    let n = pts.len();
    match spec.mode {
        GridMode::CornerSubsample => {
            let total = n.checked_mul(n).ok_or_else(|| Error::Invalid("sample too large".into()))?;
            if spec.points > total {
                return Err(Error::Invalid(format!(
                    "{} corner points requested but only {total} exist",
                    spec.points
                )));
            }
            let mut rng = stream.rng();
            let mut picks = index::sample(&mut rng, total, spec.points).into_vec();
            picks.sort_unstable();
            EvalGrid::new(picks.into_iter().map(|k| [pts[k / n][0], pts[k % n][1]]).collect())
        }
        GridMode::QuantileTensor => {
            let m = (spec.points as f64).sqrt().ceil() as usize;
            let mut xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
            let mut ys: Vec<f64> = pts.iter().map(|p| p[1]).collect();
            xs.sort_by(f64::total_cmp);
            ys.sort_by(f64::total_cmp);
            let q = |v: &[f64], i: usize| v[(((i as f64 + 0.5) * n as f64 / m as f64) as usize).min(n - 1)];
            let mut grid = Vec::with_capacity(m * m);
            for i in 0..m {
                for j in 0..m {
                    grid.push([q(&xs, i), q(&ys, j)]);
                }
            }
            EvalGrid::new(grid)
        }
    }
}

/// All corners `(x_i^(1), x_j^(2))` plus the margins at `+inf`. The
/// supremum of `|F_n - G|` for a continuous `G` is attained in the limit
/// at one of these points, so [`sup_stat`] over this set is exact.
pub fn exact_corner_points(sample: &Sample2D) -> Vec<[f64; 2]> {
    let mut xs: Vec<f64> = sample.points().iter().map(|p| p[0]).collect();
    let mut ys: Vec<f64> = sample.points().iter().map(|p| p[1]).collect();
    xs.push(f64::INFINITY);
    ys.push(f64::INFINITY);
    xs.iter().flat_map(|&a| ys.iter().map(move |&b| [a, b])).collect()
}

/// `sqrt(n) * max_x max(|F_n(x) - G(x)|, |F_n(x-) - G(x-)|)` over the
/// given points; a lower bound for `sqrt(n) ||F_n - G||_inf`.
pub fn sup_stat<G: Cdf2 + ?Sized>(ecdf: &EmpiricalCdf, target: &G, points: &[[f64; 2]]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Empty("grid"));
    }
    if points.iter().flatten().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("grid point"));
    }
    let n = ecdf.n() as f64;
    let le = ecdf.dominance_counts(points, false);
    let lt = ecdf.dominance_counts(points, true);
    let mut best: f64 = 0.0;
    for (k, &x) in points.iter().enumerate() {
        let (g, g_left) = target.cdf_and_left(x);
        best = best
            .max((le[k] as f64 / n - g).abs())
            .max((lt[k] as f64 / n - g_left).abs());
    }
    Ok(n.sqrt() * best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdf_engine::MixtureCdf;
    use crate::distributions::ComponentLaw::{CenteredExponential as Exp, StandardNormal as Norm};
    use crate::special::norm_cdf;
    use proptest::prelude::*;
    use rand::Rng;

    fn naive(points: &[[f64; 2]], q: [f64; 2], strict: bool) -> usize {
        points
            .iter()
            .filter(|p| if strict { p[0] < q[0] && p[1] < q[1] } else { p[0] <= q[0] && p[1] <= q[1] })
            .count()
    }

    fn gaussian_target(a: MixingMatrix2) -> MixtureCdf {
        MixtureCdf::new(a, ContaminatedLaw::new(0.0, Exp, Norm).unwrap())
    }

    #[test]
    fn single_point_ecdf() {
        let e = EmpiricalCdf::new(Sample2D::new(vec![[0.0, 0.0]]).unwrap());
        assert_eq!(ecdf_eval_batch(&e, &[[0.0, 0.0], [-0.1, 0.0], [0.0, -0.1]]).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(ecdf_eval_batch(&e, &[[f64::INFINITY; 2]]).unwrap(), vec![1.0]);
    }

    #[test]
    fn batch_matches_naive_random() {
        let mut rng = RngStream::with_path(4, &[0]).rng();
        for case in 0..1000 {
            let n = rng.random_range(1..=500);
            // coarse values force ties
            let coarse = case % 2 == 0;
            let mut draw = || {
                let v: f64 = rng.random_range(-3.0..3.0);
                if coarse { (v * 4.0).round() / 4.0 } else { v }
            };
            let pts: Vec<[f64; 2]> = (0..n).map(|_| [draw(), draw()]).collect();
            let queries: Vec<[f64; 2]> = (0..50).map(|_| [draw(), draw()]).collect();
            let e = EmpiricalCdf::new(Sample2D::new(pts.clone()).unwrap());
            for strict in [false, true] {
                let got = e.dominance_counts(&queries, strict);
                for (q, c) in queries.iter().zip(got) {
                    assert_eq!(c, naive(&pts, *q, strict));
                }
            }
        }
    }

    #[test]
    fn draw_sample_marginal_and_covariance() {
        let a = MixingMatrix2::lower_pair(0.4).unwrap();
        let law = ContaminatedLaw::new(0.0, Exp, Norm).unwrap();
        let n = 100_000;
        let s = draw_sample(&a, &law, n, &RngStream::with_path(8, &[1])).unwrap();
        let mut xs: Vec<f64> = s.points().iter().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| (norm_cdf(x) - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - norm_cdf(x)).abs()))
            .fold(0.0, f64::max);
        assert!(ks < ((2.0f64 / 0.001).ln() / (2.0 * n as f64)).sqrt());
        let g = a.gram();
        let nf = n as f64;
        for (i, j) in [(0, 0), (0, 1), (1, 1)] {
            let m = s.points().iter().map(|p| p[i] * p[j]).sum::<f64>() / nf;
            // Var(X_i X_j) = S_ii S_jj + S_ij^2 for a centered Gaussian pair
            let sd = ((g[i][i] * g[j][j] + g[i][j] * g[i][j]) / nf).sqrt();
            assert!((m - g[i][j]).abs() < 4.0 * sd, "({i},{j}) {m}");
        }
        let again = draw_sample(&a, &law, n, &RngStream::with_path(8, &[1])).unwrap();
        assert_eq!(s, again);
        assert!(draw_sample(&a, &law, 0, &RngStream::new(0)).is_err());
    }

    #[test]
    fn corner_grid_small_and_errors() {
        let s = Sample2D::new(vec![[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let spec = EvalGridSpec { mode: GridMode::CornerSubsample, points: 4 };
        let g = build_eval_grid(&s, &spec, &RngStream::new(1)).unwrap();
        let mut got = g.points().to_vec();
        got.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        assert_eq!(got, vec![[1.0, 2.0], [1.0, 4.0], [3.0, 2.0], [3.0, 4.0]]);
        assert!(build_eval_grid(&s, &EvalGridSpec { points: 0, ..spec }, &RngStream::new(1)).is_err());
        assert!(build_eval_grid(&s, &EvalGridSpec { points: 5, ..spec }, &RngStream::new(1)).is_err());
    }

    #[test]
    fn grids_are_deterministic() {
        let a = MixingMatrix2::lower_pair(0.4).unwrap();
        let law = ContaminatedLaw::new(0.2, Exp, Norm).unwrap();
        let s = draw_sample(&a, &law, 300, &RngStream::new(2)).unwrap();
        for mode in [GridMode::CornerSubsample, GridMode::QuantileTensor] {
            let spec = EvalGridSpec { mode, points: 200 };
            let g1 = build_eval_grid(&s, &spec, &RngStream::with_path(2, &[9])).unwrap();
            let g2 = build_eval_grid(&s, &spec, &RngStream::with_path(2, &[9])).unwrap();
            assert_eq!(g1, g2);
        }
        let t = build_eval_grid(&s, &EvalGridSpec { mode: GridMode::QuantileTensor, points: 200 }, &RngStream::new(0)).unwrap();
        assert_eq!(t.len(), 15 * 15);
    }

    #[test]
    fn sup_stat_single_point() {
        let e = EmpiricalCdf::new(Sample2D::new(vec![[0.0, 0.0]]).unwrap());
        let g = gaussian_target(MixingMatrix2::identity());
        let v = sup_stat(&e, &g, &[[0.0, 0.0]]).unwrap();
        assert!((v - 0.75).abs() < 1e-12);
        assert!(sup_stat(&e, &g, &[]).is_err());
    }

    #[test]
    fn sup_stat_against_own_ecdf_is_zero() {
        let law = ContaminatedLaw::new(0.3, Exp, Norm).unwrap();
        let s = draw_sample(&MixingMatrix2::identity(), &law, 60, &RngStream::new(3)).unwrap();
        let e = EmpiricalCdf::new(s.clone());
        let corners = exact_corner_points(&s);
        assert_eq!(sup_stat(&e, &e, &corners).unwrap(), 0.0);
    }

    #[test]
    fn subsampled_below_exact() {
        let a = MixingMatrix2::lower_pair(0.4).unwrap();
        let law = ContaminatedLaw::new(0.1, Exp, Norm).unwrap();
        let target = MixtureCdf::new(MixingMatrix2::upper_pair(0.4).unwrap(), law);
        for (rep, n) in [20usize, 80, 200].into_iter().enumerate() {
            let s = draw_sample(&a, &law, n, &RngStream::with_path(5, &[rep as u64])).unwrap();
            let e = EmpiricalCdf::new(s.clone());
            let exact = sup_stat(&e, &target, &exact_corner_points(&s)).unwrap();
            for mode in [GridMode::CornerSubsample, GridMode::QuantileTensor] {
                let g = build_eval_grid(&s, &EvalGridSpec { mode, points: 300.min(n * n) }, &RngStream::new(1)).unwrap();
                assert!(sup_stat(&e, &target, g.points()).unwrap() <= exact);
            }
            // a dense probe of the plane never beats the corner set
            let probe: Vec<[f64; 2]> = (0..40)
                .flat_map(|i| (0..40).map(move |j| [-4.0 + 0.2 * i as f64, -4.0 + 0.2 * j as f64]))
                .collect();
            let direct = probe
                .iter()
                .map(|&x| (e.eval_point(x) - target.eval(x).unwrap()).abs())
                .fold(0.0, f64::max)
                * (n as f64).sqrt();
            assert!(direct <= exact + 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn sup_stat_monotone_in_grid(seed in 0u64..1000, extra in 1usize..50) {
            let law = ContaminatedLaw::new(0.2, Exp, Norm).unwrap();
            let s = draw_sample(&MixingMatrix2::identity(), &law, 40, &RngStream::new(seed)).unwrap();
            let e = EmpiricalCdf::new(s.clone());
            let target = gaussian_target(MixingMatrix2::identity());
            let corners = exact_corner_points(&s);
            let base = &corners[..10];
            let more = &corners[..10 + extra];
            prop_assert!(sup_stat(&e, &target, more).unwrap() >= sup_stat(&e, &target, base).unwrap());
        }
    }
}
