#![allow(dead_code)]

use cica::cdf_engine::MixingMatrix2;
use cica::distributions::ComponentLaw;
use std::io::Write;

/// Writes one acceptance line straight to stdout so it shows without
/// `--nocapture`.
pub fn report(id: &str, pass: bool, detail: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[{}] {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    let _ = out.flush();
}

fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson with Richardson correction, started on 8 panels so
/// narrow peaks are not skipped.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let panels = 8;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let (lo, hi) = (a + k as f64 * h, if k + 1 == panels { b } else { a + (k + 1) as f64 * h });
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson_step(f, lo, hi, fa, fm, fb, whole, tol / panels as f64, 40)
        })
        .sum()
}

fn support(law: ComponentLaw) -> (f64, f64) {
    match law {
        ComponentLaw::StandardNormal => (-12.0, 12.0),
        ComponentLaw::CenteredExponential => (-1.0, 44.0),
        ComponentLaw::StandardExponential => (0.0, 45.0),
    }
}

/// `P(A e <= x)` for independent `e1 ~ laws[0]`, `e2 ~ laws[1]` as an
/// iterated integral of the product density: the inner integral runs over
/// `inner`, the outer over the other coordinate.
pub fn product_cdf_quad(a: &MixingMatrix2, laws: [ComponentLaw; 2], x: [f64; 2], inner: usize) -> f64 {
    if x.contains(&f64::NEG_INFINITY) {
        return 0.0;
    }
    let outer = 1 - inner;
    let (olo, ohi) = support(laws[outer]);
    let (ilo, ihi) = support(laws[inner]);
    let rows: Vec<(f64, f64, f64)> = (0..2)
        .filter(|&r| x[r].is_finite())
        .map(|r| (a.get(r, outer), a.get(r, inner), x[r]))
        .collect();
    let interval = |eo: f64| -> (f64, f64) {
        let (mut lo, mut hi) = (ilo, ihi);
        for &(ao, ai, xr) in &rows {
            let rest = xr - ao * eo;
            if ai > 0.0 {
                hi = hi.min(rest / ai);
            } else if ai < 0.0 {
                lo = lo.max(rest / ai);
            } else if rest < 0.0 {
                return (0.0, 0.0);
            }
        }
        (lo, hi)
    };
    let g = |eo: f64| {
        let (lo, hi) = interval(eo);
        if hi <= lo {
            return 0.0;
        }
        laws[outer].pdf(eo) * simpson(&|ei: f64| laws[inner].pdf(ei), lo, hi, 1e-14)
    };
    let mut cuts = vec![olo, ohi];
    let bound = |r: &(f64, f64, f64), level: f64| (r.2 - r.1 * level) / r.0;
    for r in &rows {
        if r.0 == 0.0 {
            continue;
        }
        if r.1 == 0.0 {
            cuts.push(r.2 / r.0);
        } else {
            cuts.push(bound(r, ilo));
            cuts.push(bound(r, ihi));
        }
    }
    if rows.len() == 2 {
        let (p, q) = (rows[0], rows[1]);
        // bound_p(eo) = bound_q(eo) where the bounds on e_inner cross
        let den = p.0 * q.1 - q.0 * p.1;
        if den != 0.0 {
            cuts.push((p.2 * q.1 - q.2 * p.1) / den);
        }
    }
    cuts.retain(|c| c.is_finite() && *c >= olo && *c <= ohi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2).map(|w| simpson(&g, w[0], w[1], 1e-12)).sum()
}

/// Iterated-quadrature oracle for `F^A_beta(x)`, integrating the inner
/// coordinate by density rather than by closed-form CDF.
pub fn mixture_cdf_quad(a: &MixingMatrix2, beta: f64, xi: ComponentLaw, zeta: ComponentLaw, x: [f64; 2]) -> f64 {
    let parts = [(1.0 - beta, zeta), (beta, xi)];
    let mut total = 0.0;
    for &(w1, l1) in &parts {
        for &(w2, l2) in &parts {
            let w = w1 * w2;
            if w == 0.0 {
                continue;
            }
            // the library integrates over the Gaussian coordinate when there
            // is one; swap the order here
            let inner = if l2.is_gaussian() { 1 } else { 0 };
            total += w * product_cdf_quad(a, [l1, l2], x, inner);
        }
    }
    total
}
