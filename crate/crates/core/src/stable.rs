//! The parabolic Poisson kernel `P^rho`, whose Fourier transform is
//! `exp(-t rho(xi))`.
//!
//! Each norm block `l` contributes `exp(-(sum_j |xi_j|^{beta_j})^{1/2^l})` with
//! `beta_j = 2^l / j`. That factor is the characteristic function of a
//! subordinated vector: draw a positive `2^{-l}`-stable `T`, then independent
//! symmetric `beta_j`-stable `Y_j`, and scale `Y_j` by `T^{1/beta_j}`.
//!
//! Samplers follow the probabilist convention `E e^{iuY} = e^{-|u|^beta}`;
//! kernel samples are divided by `2 pi` so that `E e^{-2 pi i xi.X}` matches.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::par;
use crate::parabolic::{dilate, rho, McEstimate, ParabolicSpace};
use crate::quad::{integrate, integrate_panels};
use crate::rng;

/// Block `l` of the kernel construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableBlock {
    pub l: u32,
    /// 1-based coordinates covered by the block.
    pub j_lo: usize,
    pub j_hi: usize,
    pub betas: Vec<f64>,
    /// Index of the positive-stable subordinator, `2^{-l}`.
    pub gamma_sub: f64,
}

pub fn stable_blocks(space: &ParabolicSpace) -> Vec<StableBlock> {
    space
        .blocks()
        .map(|b| StableBlock {
            l: b.level,
            j_lo: b.lo + 1,
            j_hi: b.hi,
            betas: b.coords().map(|j| b.exponent(j)).collect(),
            gamma_sub: 1.0 / b.width(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub point: Vec<f64>,
    /// Subordinator draw per block; 1 for the Cauchy block.
    pub block_subordinators: Vec<f64>,
}

/// `exp(-t rho(xi))`.
pub fn poisson_hat(xi: &[f64], t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("time must be positive, got {t}")));
    }
    Ok((-t * rho(xi)).exp())
}

/// Density of the law with Fourier transform `exp(-|u|^beta)`, that is
/// `2 \int_0^inf exp(-u^beta) cos(2 pi u x) du`.
pub fn stable_density_1d(beta: f64, x: f64, tol: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&beta) {
        return Err(invalid(format!("stability index must lie in [1, 2], got {beta}")));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    // exp(-u^beta) <= exp(-u) for u >= 1, so the tail past `upper` is below tol/4.
    let upper = (8.0 / tol).ln().max(1.0) + 1.0;
    let spacing = if x == 0.0 { upper } else { (0.5 / x.abs()).min(upper) };
    let panels = (upper / spacing).ceil() as usize;
    let breaks: Vec<f64> = (0..=panels).map(|i| (i as f64 * spacing).min(upper)).collect();
    let est = integrate_panels(|u: f64| (-u.powf(beta)).exp() * (2.0 * PI * u * x).cos(), &breaks, tol / 4.0, panels.max(1) * 64 + 4096)?;
    Ok(2.0 * est.value)
}

/// Chambers-Mallows-Stuck draw with `E e^{iuY} = exp(-|u|^beta)`.
pub fn sample_symmetric_stable<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    assert!((1.0..=2.0).contains(&beta), "stability index must lie in [1, 2]");
    let v = PI * (rng.random::<f64>() - 0.5);
    if beta == 1.0 {
        return v.tan();
    }
    let w: f64 = Exp1.sample(rng);
    (beta * v).sin() / v.cos().powf(1.0 / beta) * (((1.0 - beta) * v).cos() / w).powf((1.0 - beta) / beta)
}

/// Kanter's draw with `E e^{-sT} = exp(-s^gamma)`.
pub fn sample_positive_stable<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> f64 {
    assert!(gamma > 0.0 && gamma <= 1.0, "subordinator index must lie in (0, 1]");
    if gamma == 1.0 {
        return 1.0;
    }
    // Keep u away from 0 and pi, where the formula degenerates.
    let u = PI * rng.random_range(f64::EPSILON..1.0 - f64::EPSILON);
    let w: f64 = Exp1.sample(rng);
    let a = (gamma * u).sin() / u.sin().powf(1.0 / gamma);
    let b = (((1.0 - gamma) * u).sin() / w).powf((1.0 - gamma) / gamma);
    a * b
}

/// One draw from `P^rho_t`.
pub fn sample_kernel<R: Rng + ?Sized>(space: &ParabolicSpace, t: f64, rng: &mut R) -> Result<KernelSample> {
    let mut point = vec![0.0; space.d()];
    let mut subs = Vec::with_capacity(space.n() as usize + 1);
    for b in space.blocks() {
        let gamma = 1.0 / b.width();
        let tt = sample_positive_stable(gamma, rng);
        subs.push(tt);
        for j in b.coords() {
            let beta = b.exponent(j);
            point[j - 1] = tt.powf(1.0 / beta) * sample_symmetric_stable(beta, rng) / (2.0 * PI);
        }
    }
    Ok(KernelSample { point: dilate(&point, t)?, block_subordinators: subs })
}

const CHUNK: usize = 4096;

/// `count` kernel points; chunk `i` of 4096 draws uses stream `i`.
pub fn sample_kernel_batch(space: &ParabolicSpace, t: f64, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("time must be positive, got {t}")));
    }
    let chunks = count.div_ceil(CHUNK);
    let parts = par::map_indexed(chunks, |c| {
        let mut rng = rng::stream(seed, c as u64);
        let n = CHUNK.min(count - c * CHUNK);
        (0..n).map(|_| sample_kernel(space, t, &mut rng).map(|s| s.point)).collect::<Result<Vec<_>>>()
    });
    let mut out = Vec::with_capacity(count);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Real part of the empirical characteristic function `mean cos(2 pi xi.X)`.
///
/// The kernel is even, so the imaginary part has mean zero.
pub fn empirical_cf(points: &[Vec<f64>], xi: &[f64]) -> McEstimate {
    let n = points.len() as f64;
    let (mut s, mut s2) = (0.0, 0.0);
    for p in points {
        let phase: f64 = p.iter().zip(xi).map(|(a, b)| a * b).sum();
        let c = (2.0 * PI * phase).cos();
        s += c;
        s2 += c * c;
    }
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0);
    McEstimate { value: mean, std_error: (var / n).sqrt() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubordinationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
    pub passed: bool,
}

/// Compares `x^gamma` with `gamma / Gamma(1-gamma) \int_0^inf (1 - e^{-tx}) t^{-gamma-1} dt`.
pub fn subordination_identity_check(x: f64, gamma: f64, tol: f64) -> Result<SubordinationCheck> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(format!("x must be nonnegative, got {x}")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if x == 0.0 {
        return Ok(SubordinationCheck { lhs: 0.0, rhs: 0.0, rel_error: 0.0, passed: true });
    }
    let lhs = x.powf(gamma);
    // With t = e^s the integrand is (1 - exp(-x e^s)) e^{-gamma s}.
    // Left of s0 it is x e^{(1-gamma)s} to relative order 1e-10; right of s1
    // it is e^{-gamma s} up to exp(-x e^{s1}) = e^{-50}.
    let s0 = (1e-10 / x).ln();
    let s1 = (50.0 / x).ln();
    let f = |s: f64| -(-x * s.exp()).exp_m1() * (-gamma * s).exp();
    let scale = lhs * libm::tgamma(1.0 - gamma) / gamma;
    let body = integrate(f, s0, s1, 1e-3 * tol * scale, 1 << 16)?.value;
    let left = x * ((1.0 - gamma) * s0).exp() / (1.0 - gamma);
    let right = (-gamma * s1).exp() / gamma;
    let rhs = gamma / libm::tgamma(1.0 - gamma) * (body + left + right);
    let rel_error = (rhs - lhs).abs() / lhs;
    Ok(SubordinationCheck { lhs, rhs, rel_error, passed: rel_error <= tol })
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let m = points.len();
    if !(2..=64).contains(&m) {
        return Err(invalid(format!("need between 2 and 64 points, got {m}")));
    }
    let d = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: p.len() });
    }
    Ok(m)
}

fn difference_matrix(points: &[Vec<f64>], f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let m = points.len();
    DMatrix::from_fn(m, m, |i, j| {
        let diff: Vec<f64> = points[i].iter().zip(&points[j]).map(|(a, b)| a - b).collect();
        f(rho(&diff))
    })
}

/// Smallest eigenvalue of `[exp(-t rho(x_i - x_j))]`.
pub fn gram_psd_check(points: &[Vec<f64>], t: f64) -> Result<f64> {
    check_points(points)?;
    if !(t > 0.0) {
        return Err(invalid(format!("time must be positive, got {t}")));
    }
    let g = difference_matrix(points, |r| (-t * r).exp());
    Ok(SymmetricEigen::new(g).eigenvalues.min())
}

/// Largest value of `lambda^T [rho(x_i - x_j)] lambda` over unit `lambda`
/// with `sum lambda_i = 0`.
pub fn negative_definite_check(points: &[Vec<f64>]) -> Result<f64> {
    let m = check_points(points)?;
    let a = difference_matrix(points, |r| r);
    // Helmert basis of the zero-sum subspace.
    let q = DMatrix::from_fn(m, m - 1, |i, k| {
        let k1 = (k + 1) as f64;
        let norm = (k1 * (k1 + 1.0)).sqrt();
        match i.cmp(&(k + 1)) {
            std::cmp::Ordering::Less => 1.0 / norm,
            std::cmp::Ordering::Equal => -k1 / norm,
            std::cmp::Ordering::Greater => 0.0,
        }
    });
    let r = q.transpose() * a * &q;
    let r = (&r + r.transpose()) * 0.5;
    Ok(SymmetricEigen::new(r).eigenvalues.max())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemigroupReport {
    pub fourier_product: f64,
    pub fourier_sum: f64,
    pub fourier_ok: bool,
    pub sample_cf: McEstimate,
    pub sample_ok: bool,
    pub passed: bool,
}

impl SemigroupReport {
    pub fn failures(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if !self.fourier_ok {
            v.push("fourier");
        }
        if !self.sample_ok {
            v.push("samples");
        }
        v
    }
}

/// Checks `P_s * P_t = P_{s+t}` on the Fourier side and by sampling.
///
/// The Fourier identity is required to hold to a few ulps.
pub fn semigroup_check(space: &ParabolicSpace, s: f64, t: f64, xi: &[f64], samples: usize, seed: u64) -> Result<SemigroupReport> {
    if xi.len() != space.d() {
        return Err(Error::DimensionMismatch { expected: space.d(), got: xi.len() });
    }
    let prod = poisson_hat(xi, s)? * poisson_hat(xi, t)?;
    let sum = poisson_hat(xi, s + t)?;
    let fourier_ok = (prod - sum).abs() <= 8.0 * f64::EPSILON * sum.max(f64::MIN_POSITIVE);
    let a = sample_kernel_batch(space, s, samples, seed)?;
    let b = sample_kernel_batch(space, t, samples, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let combined: Vec<Vec<f64>> = a.iter().zip(&b).map(|(p, q)| p.iter().zip(q).map(|(x, y)| x + y).collect()).collect();
    let cf = empirical_cf(&combined, xi);
    let sample_ok = (cf.value - sum).abs() <= 3.0 * cf.std_error + 1e-12;
    Ok(SemigroupReport { fourier_product: prod, fourier_sum: sum, fourier_ok, sample_cf: cf, sample_ok, passed: fourier_ok && sample_ok })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityCheck {
    pub x: f64,
    pub numeric: f64,
    pub closed_form: f64,
    pub passed: bool,
}

/// Numeric inverse transform of `exp(-|xi|)` against `2 / (1 + 4 pi^2 x^2)`.
pub fn density_1d_check(x: f64, tol: f64) -> Result<DensityCheck> {
    let numeric = stable_density_1d(1.0, x, tol / 2.0)?;
    let closed_form = 2.0 / (1.0 + 4.0 * PI * PI * x * x);
    Ok(DensityCheck { x, numeric, closed_form, passed: (numeric - closed_form).abs() <= tol && numeric >= -tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn within_3sigma(est: McEstimate, target: f64) -> bool {
        (est.value - target).abs() <= 3.0 * est.std_error
    }

    #[test]
    fn poisson_hat_examples() {
        assert_eq!(poisson_hat(&[0.0, 0.0, 0.0], 2.5).unwrap(), 1.0);
        assert!((poisson_hat(&[1.0], 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(poisson_hat(&[1.0], 0.0).is_err());
        assert!(poisson_hat(&[1.0], -1.0).is_err());
        for xi in [[3.0, -1.0], [0.1, 0.2], [10.0, 40.0]] {
            for t in [0.1, 1.0, 7.0] {
                let v = poisson_hat(&xi, t).unwrap();
                assert!(v > 0.0 && v < 1.0 && v <= 1.0 / (t * rho(&xi)));
            }
        }
    }

    #[test]
    fn blocks_have_admissible_indices() {
        for d in 1..=40 {
            let blocks = stable_blocks(&ParabolicSpace::new(d).unwrap());
            assert_eq!(blocks.iter().map(|b| b.betas.len()).sum::<usize>(), d);
            for b in &blocks {
                assert!(b.betas.iter().all(|&x| (1.0..=2.0).contains(&x)));
                assert!(b.gamma_sub > 0.0 && b.gamma_sub <= 1.0);
                assert_eq!(b.l == 0, b.gamma_sub == 1.0);
            }
        }
    }

    #[test]
    fn density_examples() {
        assert!((stable_density_1d(1.0, 0.0, 1e-10).unwrap() - 2.0).abs() < 1e-9);
        assert!((stable_density_1d(2.0, 0.0, 1e-10).unwrap() - PI.sqrt()).abs() < 1e-9);
        assert!((stable_density_1d(1.0, 1.0 / (2.0 * PI), 1e-10).unwrap() - 1.0).abs() < 1e-9);
        for &x in &[0.05, 0.3, 1.7] {
            let g = PI.sqrt() * (-PI * PI * x * x).exp();
            assert!((stable_density_1d(2.0, x, 1e-10).unwrap() - g).abs() < 1e-9);
            assert!(density_1d_check(x, 1e-8).unwrap().passed);
        }
        assert!(stable_density_1d(0.5, 0.0, 1e-8).is_err());
        for &beta in &[1.0, 1.25, 1.5, 1.9] {
            for i in 0..20 {
                assert!(stable_density_1d(beta, i as f64 * 0.37, 1e-9).unwrap() > -1e-9);
            }
        }
    }

    #[test]
    fn gaussian_sampler_variance() {
        let mut rng = rng::stream(5, 0);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_symmetric_stable(2.0, &mut rng)).collect();
        let var = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        // Var = 2, and Var(X^2) = E X^4 - 4 = 12 - 4 = 8.
        let se = (8.0 / n as f64).sqrt();
        assert!((var - 2.0).abs() <= 3.0 * se, "variance {var}");
    }

    #[test]
    fn cauchy_sampler_cf_and_median() {
        let mut rng = rng::stream(6, 0);
        let n = 400_000;
        let mut xs: Vec<f64> = (0..n).map(|_| sample_symmetric_stable(1.0, &mut rng)).collect();
        let pts: Vec<Vec<f64>> = xs.iter().map(|x| vec![x / (2.0 * PI)]).collect();
        assert!(within_3sigma(empirical_cf(&pts, &[1.0]), (-1.0f64).exp()));
        xs.sort_by(f64::total_cmp);
        // The median of n Cauchy draws has standard error pi / (2 sqrt n).
        assert!(xs[n / 2].abs() <= 3.0 * PI / (2.0 * (n as f64).sqrt()));
    }

    #[test]
    fn levy_laplace_transform() {
        let mut rng = rng::stream(7, 0);
        let n = 400_000;
        let v: Vec<f64> = (0..n).map(|_| (-sample_positive_stable(0.5, &mut rng)).exp()).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((mean - (-1.0f64).exp()).abs() <= 3.0 * (var / n as f64).sqrt(), "mean {mean}");
        for g in [0.25, 0.125] {
            let mut rng = rng::stream(8, 0);
            let v: Vec<f64> = (0..n).map(|_| (-2.0 * sample_positive_stable(g, &mut rng)).exp()).collect();
            let mean = v.iter().sum::<f64>() / n as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
            assert!((mean - (-(2f64.powf(g))).exp()).abs() <= 3.0 * (var / n as f64).sqrt());
        }
    }

    #[test]
    fn kernel_cf_examples() {
        let s1 = ParabolicSpace::new(1).unwrap();
        let pts = sample_kernel_batch(&s1, 1.0, 200_000, 11).unwrap();
        for x in [0.5, 1.0, 2.0] {
            assert!(within_3sigma(empirical_cf(&pts, &[x]), (-x).exp()), "xi={x}");
        }
        assert_eq!(empirical_cf(&pts, &[0.0]).value, 1.0);
        let s2 = ParabolicSpace::new(2).unwrap();
        let pts = sample_kernel_batch(&s2, 1.0, 200_000, 12).unwrap();
        assert!(within_3sigma(empirical_cf(&pts, &[0.0, 1.0]), (-1.0f64).exp()));
        assert_eq!(empirical_cf(&pts, &[0.0, 0.0]).value, 1.0);
    }

    #[test]
    fn kernel_cf_higher_dimensions() {
        for d in [3usize, 5, 8] {
            let space = ParabolicSpace::new(d).unwrap();
            let t = 0.7;
            let pts = sample_kernel_batch(&space, t, 100_000, 13 + d as u64).unwrap();
            let xi: Vec<f64> = (1..=d).map(|j| 0.6 / j as f64).collect();
            let target = poisson_hat(&xi, t).unwrap();
            assert!(within_3sigma(empirical_cf(&pts, &xi), target), "d={d}");
            // Odd test functions average to zero.
            let m = pts.iter().map(|p| (2.0 * PI * p[d - 1]).sin()).sum::<f64>() / pts.len() as f64;
            assert!(m.abs() <= 3.0 / (pts.len() as f64).sqrt());
        }
    }

    #[test]
    fn kernel_scaling_in_distribution() {
        let space = ParabolicSpace::new(3).unwrap();
        let base = sample_kernel_batch(&space, 1.0, 100_000, 21).unwrap();
        let scaled: Vec<Vec<f64>> = base.iter().map(|p| dilate(p, 2.5).unwrap()).collect();
        let direct = sample_kernel_batch(&space, 2.5, 100_000, 22).unwrap();
        let xi = [0.1, -0.05, 0.02];
        let a = empirical_cf(&scaled, &xi);
        let b = empirical_cf(&direct, &xi);
        assert!((a.value - b.value).abs() <= 3.0 * (a.std_error.hypot(b.std_error)));
    }

    #[test]
    fn subordination_examples() {
        assert!(subordination_identity_check(0.0, 0.5, 1e-9).unwrap().passed);
        assert!((libm::tgamma(0.5) - PI.sqrt()).abs() < 1e-14);
        let c = subordination_identity_check(1.0, 0.5, 1e-9).unwrap();
        assert!(c.passed && (c.rhs - 1.0).abs() < 1e-9, "{c:?}");
        let c = subordination_identity_check(4.0, 0.5, 1e-9).unwrap();
        assert!(c.passed && (c.rhs - 2.0).abs() < 2e-9, "{c:?}");
        for &g in &[0.125, 0.25, 0.75, 0.9] {
            for &x in &[1e-3, 0.5, 3.0, 1e4] {
                assert!(subordination_identity_check(x, g, 1e-8).unwrap().passed, "x={x} g={g}");
            }
        }
        assert!(subordination_identity_check(-1.0, 0.5, 1e-8).is_err());
    }

    #[test]
    fn gram_examples() {
        let pair = vec![vec![0.0, 0.0], vec![1.0, 2.0]];
        let a = (-rho(&[1.0, 2.0])).exp();
        assert!((gram_psd_check(&pair, 1.0).unwrap() - (1.0 - a)).abs() < 1e-12);
        let mut r = rng::stream(40, 0);
        for t in [0.1, 1.0, 10.0] {
            let pts: Vec<Vec<f64>> = (0..20).map(|_| (0..4).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
            assert!(gram_psd_check(&pts, t).unwrap() >= -1e-8);
            assert!(negative_definite_check(&pts).unwrap() <= 1e-8);
        }
        // Log-uniform coordinates put every block in play.
        for d in [2usize, 3, 6, 9, 17] {
            let pts: Vec<Vec<f64>> =
                (0..64).map(|_| (0..d).map(|_| r.random_range(-1.0..1.0) * 10f64.powf(r.random_range(-2.0..2.0))).collect()).collect();
            assert!(gram_psd_check(&pts, 1.0).unwrap() >= -1e-8, "d={d}");
            assert!(negative_definite_check(&pts).unwrap() <= 1e-8, "d={d}");
        }
        assert!(gram_psd_check(&pair[..1], 1.0).is_err());
        assert!(gram_psd_check(&[vec![0.0], vec![1.0, 1.0]], 1.0).is_err());
    }

    #[test]
    fn semigroup_examples() {
        let s1 = ParabolicSpace::new(1).unwrap();
        let r = semigroup_check(&s1, 1.0, 1.0, &[0.0], 1000, 3).unwrap();
        assert_eq!(r.fourier_sum, 1.0);
        assert!(r.passed);
        let s2 = ParabolicSpace::new(2).unwrap();
        let r = semigroup_check(&s2, 1.0, 2.0, &[1.0, 0.0], 100_000, 4).unwrap();
        assert!((r.fourier_sum - (-3.0f64).exp()).abs() < 1e-16);
        assert!(r.passed, "{r:?}");
        let s4 = ParabolicSpace::new(4).unwrap();
        let r = semigroup_check(&s4, 0.3, 0.45, &[0.5, -0.4, 0.3, 0.2], 100_000, 5).unwrap();
        assert!(r.passed, "{:?}", r.failures());
        assert!(density_1d_check(0.0, 1e-8).unwrap().passed);
    }
}
