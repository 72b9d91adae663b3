//! Oscillatory integrals `\int_a^b e^{i p(t)} dt` with polynomial phase, and
//! brute-force sublevel-set measures `|{t in [a,b] : |p(t)| <= delta}|`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::poly::Polynomial;
use crate::quad::{self, Estimate};
use crate::{par, rng};

pub const MAX_DEGREE: usize = 64;

/// Default limit on quadrature panels for a single integral.
pub const DEFAULT_PANEL_CAP: usize = 1 << 20;

/// A real polynomial phase `b_0 + b_1 t + ... + b_d t^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoly {
    poly: Polynomial,
}

impl PhasePoly {
    /// From `[b_0, b_1, ..., b_d]`.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("a phase needs at least one coefficient"));
        }
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(invalid(format!("phase degree is capped at {MAX_DEGREE}")));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("phase coefficients must be finite"));
        }
        Ok(PhasePoly { poly: Polynomial::new(coeffs) })
    }

    /// From `[b_1, ..., b_d]` with zero constant term.
    pub fn without_constant(linear_up: &[f64]) -> Result<Self> {
        let mut c = Vec::with_capacity(linear_up.len() + 1);
        c.push(0.0);
        c.extend_from_slice(linear_up);
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.poly.coeffs
    }

    /// Index of the highest nonzero coefficient (0 for constants and zero).
    pub fn degree(&self) -> usize {
        self.poly.degree().unwrap_or(0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.poly.eval(t)
    }

    pub fn negated(&self) -> PhasePoly {
        PhasePoly { poly: self.poly.scaled(-1.0) }
    }

    /// `max_{0<=k<=d} |b_k|`.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs().iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `max_{1<=k<=d} |b_k|`.
    pub fn max_nonconstant_coeff(&self) -> f64 {
        self.coeffs().iter().skip(1).fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }
}

/// Panels on `[a, b]` on which the phase moves by less than `pi/2`.
///
/// Pieces are first cut at the roots of `p''`, so `p'` is monotone on each
/// piece and `|p'|` peaks at panel endpoints; a panel is accepted once
/// `h * max(|p'(l)|, |p'(r)|) < pi/2`.
pub fn phase_panels(p: &PhasePoly, a: f64, b: f64, cap: usize) -> Result<Vec<f64>> {
    let dp = p.poly.derivative();
    let ddp = dp.derivative();
    let mut cuts = vec![a];
    if ddp.degree().is_some_and(|deg| deg >= 1) {
        cuts.extend(ddp.real_roots_in(a, b).into_iter().filter(|&t| t > a && t < b));
    }
    cuts.push(b);
    cuts.dedup();

    let mut breaks = vec![a];
    let mut stack: Vec<(f64, f64, f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        stack.push((w[0], w[1], dp.eval(w[0]).abs(), dp.eval(w[1]).abs()));
        while let Some((l, r, dl, dr)) = stack.pop() {
            let h = r - l;
            let mid = 0.5 * (l + r);
            if h * dl.max(dr) < FRAC_PI_2 || mid <= l || mid >= r {
                breaks.push(r);
                if breaks.len() > cap + 1 {
                    return Err(Error::NonConvergence { panels: breaks.len() - 1, cap });
                }
                continue;
            }
            let dm = dp.eval(mid).abs();
            // Right half first so panels come off the stack left to right.
            stack.push((mid, r, dm, dr));
            stack.push((l, mid, dl, dm));
        }
    }
    Ok(breaks)
}

/// `\int_a^b e^{i p(t)} dt` to absolute error `tol`, with panel cap `cap`.
pub fn osc_integral_with(p: &PhasePoly, a: f64, b: f64, tol: f64, cap: usize) -> Result<Estimate<Complex64>> {
    if !(a < b) {
        return Err(invalid(format!("need a < b, got [{a}, {b}]")));
    }
    if !(tol >= 1e-12) {
        return Err(invalid(format!("tolerance must be at least 1e-12, got {tol}")));
    }
    let breaks = phase_panels(p, a, b, cap)?;
    let poly = &p.poly;
    quad::integrate_panels(
        |t| {
            let (s, c) = poly.eval(t).sin_cos();
            Complex64::new(c, s)
        },
        &breaks,
        tol,
        cap,
    )
}

pub fn osc_integral(p: &PhasePoly, a: f64, b: f64, tol: f64) -> Result<Complex64> {
    osc_integral_with(p, a, b, tol, DEFAULT_PANEL_CAP).map(|e| e.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SublevelEstimate {
    pub measure: f64,
    /// `(b - a) (sign changes + 2) / grid_points`.
    pub error_bound: f64,
}

/// Uniform-midpoint estimate of `|{t in [a,b] : |p(t)| <= delta}|`.
pub fn sublevel_measure(p: &PhasePoly, a: f64, b: f64, delta: f64, grid_points: usize) -> Result<SublevelEstimate> {
    if !(a < b) {
        return Err(invalid(format!("need a < b, got [{a}, {b}]")));
    }
    if !(delta > 0.0) {
        return Err(invalid("delta must be positive"));
    }
    if grid_points < 10_000 {
        return Err(invalid(format!("sublevel_measure needs at least 10^4 grid points, got {grid_points}")));
    }
    let h = (b - a) / grid_points as f64;
    let mut inside = 0usize;
    let mut changes = 0usize;
    let mut prev: Option<bool> = None;
    for i in 0..grid_points {
        let t = a + (i as f64 + 0.5) * h;
        let hit = p.eval(t).abs() <= delta;
        inside += hit as usize;
        if prev.is_some_and(|q| q != hit) {
            changes += 1;
        }
        prev = Some(hit);
    }
    Ok(SublevelEstimate { measure: inside as f64 * h, error_bound: (b - a) * (changes + 2) as f64 / grid_points as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub measured: f64,
    pub bound_rhs: f64,
    pub ratio: f64,
}

impl BoundReport {
    fn new(measured: f64, bound_rhs: f64) -> Self {
        BoundReport { measured, bound_rhs, ratio: measured / bound_rhs }
    }
}

/// Sublevel measure from the real roots of `p = delta` and `p = -delta`.
pub fn sublevel_measure_exact(p: &PhasePoly, a: f64, b: f64, delta: f64) -> f64 {
    let mut pts = vec![a, b];
    for shift in [delta, -delta] {
        let mut c = p.coeffs().to_vec();
        c[0] -= shift;
        pts.extend(Polynomial::new(c).real_roots_in(a, b));
    }
    pts.sort_by(f64::total_cmp);
    pts.windows(2).filter(|w| p.eval(0.5 * (w[0] + w[1])).abs() <= delta).map(|w| w[1] - w[0]).sum()
}

/// Sublevel bound with both coefficient maxima: `full` uses
/// `max_{0<=k<=d}|b_k|`, `nonconstant` uses `max_{1<=k<=d}|b_k|` (absent when
/// `b_1 = ... = b_d = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VinogradovReport {
    pub full: BoundReport,
    pub nonconstant: Option<BoundReport>,
}

pub fn vinogradov_check(p: &PhasePoly, a: f64, b: f64, delta: f64, grid_points: usize) -> Result<VinogradovReport> {
    let m = p.max_coeff();
    if m == 0.0 {
        return Err(invalid("vinogradov_check needs a nonzero coefficient"));
    }
    let d = p.degree().max(1) as f64;
    let measured = sublevel_measure(p, a, b, delta, grid_points)?.measure;
    let reach = a.abs().max(b.abs());
    let rhs = |mx: f64| reach * (delta / mx).powf(1.0 / d);
    let m1 = p.max_nonconstant_coeff();
    Ok(VinogradovReport { full: BoundReport::new(measured, rhs(m)), nonconstant: (m1 > 0.0).then(|| BoundReport::new(measured, rhs(m1))) })
}

/// `|\int_a^b e^{ip}|` against `max(|a|,|b|)^(1-1/d) / (max_{k>=1}|b_k|)^(1/d)`.
pub fn vdc_bound_check(p: &PhasePoly, a: f64, b: f64, tol: f64) -> Result<BoundReport> {
    if p.coeffs()[0] != 0.0 {
        return Err(invalid("vdc_bound_check expects a phase with zero constant term"));
    }
    let m = p.max_nonconstant_coeff();
    if m == 0.0 {
        return Err(invalid("vdc_bound_check needs a nonzero coefficient b_k, k >= 1"));
    }
    let d = p.degree() as f64;
    let measured = osc_integral(p, a, b, tol)?.norm();
    let reach = a.abs().max(b.abs());
    Ok(BoundReport::new(measured, reach.powf(1.0 - 1.0 / d) / m.powf(1.0 / d)))
}

/// Worst case of a random corpus at fixed degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub degree: usize,
    pub count: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub argmax_coeffs: Vec<f64>,
    pub argmax_interval: (f64, f64),
    /// Vinogradov corpora only: the largest ratio against `max_{k>=1}|b_k|`.
    pub nonconstant_max_ratio: Option<f64>,
}

fn random_interval<R: Rng>(rng: &mut R, reach: f64) -> (f64, f64) {
    loop {
        let a = rng.random_range(-reach..reach);
        let b = rng.random_range(-reach..reach);
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        if b - a > 0.05 * reach {
            return (a, b);
        }
    }
}

fn random_coeffs<R: Rng>(rng: &mut R, degree: usize, scale: f64, constant: bool) -> Vec<f64> {
    let mut c: Vec<f64> = (0..=degree).map(|_| rng.random_range(-scale..scale)).collect();
    if !constant {
        c[0] = 0.0;
    }
    if c[degree] == 0.0 {
        c[degree] = scale;
    }
    c
}

fn summarize(degree: usize, rows: Vec<(f64, Vec<f64>, (f64, f64))>) -> CorpusSummary {
    let count = rows.len();
    let mean_ratio = rows.iter().map(|r| r.0).sum::<f64>() / count as f64;
    let best = rows
        .into_iter()
        .max_by(|x, y| {
            x.0.total_cmp(&y.0).then_with(|| {
                // Lexicographically smallest coefficients win ties.
                y.1.iter().zip(&x.1).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
            })
        })
        .expect("nonempty corpus");
    CorpusSummary {
        degree,
        count,
        max_ratio: best.0,
        mean_ratio,
        argmax_coeffs: best.1,
        argmax_interval: best.2,
        nonconstant_max_ratio: None,
    }
}

/// Vinogradov ratios (max over `0<=k<=d`) for `count` random polynomials of
/// exact degree `degree`, coefficients uniform in `[-1, 1]`, intervals in
/// `[-2, 2]` and `delta` log-uniform in `[1e-4, 1] * max|b_k|`.
pub fn vinogradov_corpus(degree: usize, count: usize, grid_points: usize, seed: u64) -> Result<CorpusSummary> {
    if degree == 0 || count == 0 {
        return Err(invalid("corpus needs degree >= 1 and count >= 1"));
    }
    let rows = par::map_indexed(count, |i| -> Result<_> {
        let mut rng = rng::stream(seed, i as u64);
        let coeffs = random_coeffs(&mut rng, degree, 1.0, true);
        let p = PhasePoly::new(coeffs.clone())?;
        let (a, b) = random_interval(&mut rng, 2.0);
        let delta = p.max_coeff() * 10f64.powf(rng.random_range(-4.0..0.0));
        let report = vinogradov_check(&p, a, b, delta, grid_points)?;
        Ok((report.full.ratio, report.nonconstant.map(|r| r.ratio), coeffs, (a, b)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let nonconstant = rows.iter().filter_map(|r| r.1).reduce(f64::max);
    let mut summary = summarize(degree, rows.into_iter().map(|(r, _, c, i)| (r, c, i)).collect());
    summary.nonconstant_max_ratio = nonconstant;
    Ok(summary)
}

/// Oscillatory-bound ratios for `count` random phases of exact degree
/// `degree`, coefficients uniform in `[-scale, scale]`, intervals in `[-1, 1]`.
pub fn vdc_corpus(degree: usize, count: usize, scale: f64, seed: u64) -> Result<CorpusSummary> {
    if degree == 0 || count == 0 {
        return Err(invalid("corpus needs degree >= 1 and count >= 1"));
    }
    let rows = par::map_indexed(count, |i| -> Result<_> {
        let mut rng = rng::stream(seed, i as u64);
        let coeffs = random_coeffs(&mut rng, degree, scale, false);
        let p = PhasePoly::new(coeffs.clone())?;
        let (a, b) = random_interval(&mut rng, 1.0);
        let report = vdc_bound_check(&p, a, b, 1e-10)?;
        Ok((report.ratio, coeffs, (a, b)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(summarize(degree, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop, prop_assert, proptest, ProptestConfig};
    use std::f64::consts::PI;

    fn phase(c: &[f64]) -> PhasePoly {
        PhasePoly::new(c.to_vec()).unwrap()
    }

    /// Independent oracle: composite Simpson with a fixed, very fine step.
    fn simpson(p: &PhasePoly, a: f64, b: f64, n: usize) -> Complex64 {
        let h = (b - a) / n as f64;
        let f = |t: f64| Complex64::new(0.0, p.eval(t)).exp();
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * (h / 3.0)
    }

    #[test]
    fn constant_and_full_period() {
        let v = osc_integral(&phase(&[0.0]), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let v = osc_integral(&phase(&[0.0, 2.0 * PI]), 0.0, 1.0, 1e-12).unwrap();
        assert!(v.norm() < 1e-13);
    }

    #[test]
    fn fresnel_value() {
        let p = phase(&[0.0, 0.0, 1.0]);
        let v = osc_integral(&p, 0.0, 1.0, 1e-12).unwrap();
        let oracle = simpson(&p, 0.0, 1.0, 200_000);
        assert!((v - oracle).norm() < 1e-12, "{v} vs {oracle}");
        // Frozen from the Simpson oracle.
        assert!((v.re - 0.904_524_237_900_272).abs() < 1e-9);
        assert!((v.im - 0.310_268_301_723_381).abs() < 1e-9);
    }

    #[test]
    fn high_degree_against_oracle() {
        let p = phase(&[0.0, 3.0, -40.0, 0.0, 120.0, -7.0, 55.0]);
        let v = osc_integral(&p, -1.0, 1.2, 1e-11).unwrap();
        let oracle = simpson(&p, -1.0, 1.2, 2_000_000);
        assert!((v - oracle).norm() < 1e-9, "{v} vs {oracle}");
    }

    #[test]
    fn rejects_bad_input() {
        let p = phase(&[0.0, 1.0]);
        assert!(osc_integral(&p, 1.0, 1.0, 1e-10).is_err());
        assert!(osc_integral(&p, 0.0, 1.0, 1e-13).is_err());
        assert!(PhasePoly::new(vec![1.0; 66]).is_err());
        assert!(PhasePoly::new(vec![]).is_err());
        let err = osc_integral_with(&phase(&[0.0, 1e9]), 0.0, 1.0, 1e-10, 1000).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn sublevel_examples() {
        let s = sublevel_measure(&phase(&[0.0, 1.0]), 0.0, 1.0, 0.3, 10_000).unwrap();
        assert!((s.measure - 0.3).abs() <= s.error_bound);
        let s = sublevel_measure(&phase(&[0.0, 0.0, 1.0]), -1.0, 1.0, 0.25, 10_000).unwrap();
        assert!((s.measure - 1.0).abs() <= s.error_bound);
        assert!(sublevel_measure(&phase(&[0.0, 1.0]), 0.0, 1.0, 0.3, 9_999).is_err());
        assert!(sublevel_measure(&phase(&[0.0, 1.0]), 0.0, 1.0, 0.0, 10_000).is_err());
    }

    #[test]
    fn sublevel_matches_root_oracle_for_random_cubics() {
        let mut rng = rng::stream(2024, 0);
        for _ in 0..50 {
            let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = phase(&c);
            let exact = sublevel_measure_exact(&p, -1.0, 1.0, 0.1);
            let brute = sublevel_measure(&p, -1.0, 1.0, 0.1, 100_000).unwrap().measure;
            assert!((brute - exact).abs() < 1e-4, "{c:?}: {brute} vs {exact}");
        }
    }

    #[test]
    fn vinogradov_examples() {
        let r = vinogradov_check(&phase(&[0.0, 1.0]), 0.0, 1.0, 1.0, 10_000).unwrap();
        assert!((r.full.measured - 1.0).abs() < 1e-12);
        assert_eq!(r.full.bound_rhs, 1.0);
        assert!((r.full.ratio - 1.0).abs() < 1e-12);
        let r = vinogradov_check(&phase(&[0.0, 2.0]), 0.0, 1.0, 1.0, 10_000).unwrap();
        assert!((r.full.measured - 0.5).abs() < 1e-12);
        assert_eq!(r.full.bound_rhs, 0.5);
        assert_eq!(r.nonconstant, Some(r.full));
        assert!(vinogradov_check(&phase(&[0.0, 0.0]), 0.0, 1.0, 1.0, 10_000).is_err());
        let r = vinogradov_check(&phase(&[3.0]), 0.0, 1.0, 1.0, 10_000).unwrap();
        assert!(r.nonconstant.is_none());
    }

    #[test]
    fn vdc_examples() {
        let lambda = 100.0;
        let r = vdc_bound_check(&phase(&[0.0, lambda]), 0.0, 1.0, 1e-12).unwrap();
        let closed = 2.0 * (lambda / 2.0).sin().abs() / lambda;
        assert!((r.measured - closed).abs() < 1e-12);
        assert!((r.bound_rhs - 0.01).abs() < 1e-15);
        assert!(r.ratio <= 2.0);
        let r = vdc_bound_check(&phase(&[0.0, 1.0]), 0.0, 1.0, 1e-12).unwrap();
        assert!((r.measured - 2.0 * 0.5f64.sin()).abs() < 1e-12);
        assert!((r.measured - 0.9589).abs() < 1e-4);
        assert!(vdc_bound_check(&phase(&[1.0, 1.0]), 0.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn corpora_are_finite_and_deterministic() {
        for d in 1..=4 {
            let v = vinogradov_corpus(d, 40, 20_000, 5).unwrap();
            assert!(v.max_ratio.is_finite() && v.max_ratio > 0.0);
            let w = vdc_corpus(d, 20, 1e3, 5).unwrap();
            assert!(w.max_ratio.is_finite() && w.max_ratio > 0.0);
            assert_eq!(w, vdc_corpus(d, 20, 1e3, 5).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn modulus_conjugation_additivity(
            c in prop::collection::vec(-30.0f64..30.0, 1..7),
            a in -1.5f64..0.0, len1 in 0.05f64..1.5, len2 in 0.05f64..1.5,
        ) {
            let tol = 1e-10;
            let p = PhasePoly::without_constant(&c).unwrap();
            let (m, b) = (a + len1, a + len1 + len2);
            let whole = osc_integral(&p, a, b, tol).unwrap();
            prop_assert!(whole.norm() <= (b - a) + 1e-12);
            let conj = osc_integral(&p.negated(), a, b, tol).unwrap();
            prop_assert!((conj - whole.conj()).norm() <= 1e-12);
            let split = osc_integral(&p, a, m, tol).unwrap() + osc_integral(&p, m, b, tol).unwrap();
            prop_assert!((split - whole).norm() <= 2.0 * tol);
        }
    }
}
