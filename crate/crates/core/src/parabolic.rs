//! Parabolic dilations `delta_s x = (s x_1, s^2 x_2, ..., s^d x_d)` and the
//! homogeneous norm `rho` built from dyadic coordinate blocks.
//!
//! Coordinates are 1-based in the mathematics and 0-based in slices:
//! `x[j - 1]` holds `x_j`. Block `l` (for `0 <= l <= n`) covers the
//! half-open index range `(floor(2^(l-1)), min(2^l, d)]` and contributes
//! `(sum_j |x_j|^(2^l / j))^(1 / 2^l)`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParabolicSpace {
    d: usize,
    n: u32,
    alpha: usize,
}

/// One coordinate block of the norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub level: u32,
    /// Exclusive lower coordinate index (1-based).
    pub lo: usize,
    /// Inclusive upper coordinate index (1-based).
    pub hi: usize,
}

impl Block {
    /// `2^l`, the outer root of the block.
    pub fn width(&self) -> f64 {
        (1u64 << self.level) as f64
    }

    /// Exponent `2^l / j` applied to coordinate `j`.
    pub fn exponent(&self, j: usize) -> f64 {
        self.width() / j as f64
    }

    pub fn coords(&self) -> std::ops::RangeInclusive<usize> {
        self.lo + 1..=self.hi
    }
}

impl ParabolicSpace {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        Ok(ParabolicSpace { d, n: block_count(d), alpha: d * (d + 1) / 2 })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// The `n` with `2^(n-1) < d <= 2^n`.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Homogeneous dimension `1 + 2 + ... + d`.
    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn blocks(&self) -> impl Iterator<Item = Block> + '_ {
        blocks(self.d)
    }

    pub fn rho(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.d);
        rho(x)
    }
}

fn block_count(d: usize) -> u32 {
    (usize::BITS - (d - 1).leading_zeros()) * (d > 1) as u32
}

pub fn blocks(d: usize) -> impl Iterator<Item = Block> {
    let n = block_count(d.max(1));
    (0..=n).map(move |l| Block { level: l, lo: if l == 0 { 0 } else { 1usize << (l - 1) }, hi: (1usize << l).min(d) })
}

/// Value of one block, `(sum_j |x_j|^(2^l/j))^(1/2^l)`.
fn block_value(block: Block, x: &[f64]) -> f64 {
    let width = block.width();
    let mut nonzero = 0usize;
    let mut last = 0usize;
    let mut sum = 0.0;
    let mut direct_ok = true;
    for j in block.coords() {
        let a = x[j - 1].abs();
        if a == 0.0 {
            continue;
        }
        nonzero += 1;
        last = j;
        if a < 1e-15 {
            direct_ok = false;
            continue;
        }
        let term = a.powf(block.exponent(j));
        if term == 0.0 || !term.is_finite() {
            direct_ok = false;
        }
        sum += term;
    }
    match nonzero {
        0 => 0.0,
        // A lone coordinate reduces to |x_j|^(1/j).
        1 => {
            let a = x[last - 1].abs();
            match last {
                1 => a,
                2 => a.sqrt(),
                j => a.powf(1.0 / j as f64),
            }
        }
        _ if direct_ok && sum.is_finite() => sum.powf(1.0 / width),
        _ => {
            // Log-domain evaluation for tiny or huge coordinates.
            let logs: Vec<f64> = block.coords().filter(|&j| x[j - 1] != 0.0).map(|j| block.exponent(j) * x[j - 1].abs().ln()).collect();
            let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = logs.iter().map(|v| (v - m).exp()).sum();
            ((m + s.ln()) / width).exp()
        }
    }
}

/// The homogeneous norm of `x`, with the ambient dimension taken from `x.len()`.
pub fn rho(x: &[f64]) -> f64 {
    blocks(x.len()).map(|b| block_value(b, x)).sum()
}

/// `delta_s x`. Rejects `s <= 0`.
pub fn dilate(x: &[f64], s: f64) -> Result<Vec<f64>> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(invalid(format!("dilation parameter must be positive and finite, got {s}")));
    }
    Ok(dilate_unchecked(x, s))
}

pub(crate) fn dilate_unchecked(x: &[f64], s: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut pow = 1.0;
    for &xj in x {
        pow *= s;
        out.push(pow * xj);
    }
    out
}

/// Dilation by `2^k`, exact in floating point (barring over/underflow).
pub fn dilate_dyadic(x: &[f64], k: i32) -> Vec<f64> {
    x.iter().enumerate().map(|(i, &xj)| xj * 2f64.powi(k * (i as i32 + 1))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub direction: Vec<f64>,
    pub radius: f64,
}

pub fn polar_decompose(x: &[f64]) -> Result<PolarPoint> {
    let radius = rho(x);
    if radius == 0.0 {
        return Err(invalid("polar decomposition is undefined at the origin"));
    }
    Ok(PolarPoint { direction: dilate_unchecked(x, 1.0 / radius), radius })
}

impl PolarPoint {
    pub fn recompose(&self) -> Vec<f64> {
        dilate_unchecked(&self.direction, self.radius)
    }
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Monte-Carlo volume of `{rho <= r}` using the tight box `|x_j| <= r^j`.
pub fn ball_volume(space: &ParabolicSpace, r: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    let d = space.d();
    if d > 4 {
        return Err(invalid(format!("ball_volume is limited to d <= 4, got {d}")));
    }
    if samples < 1000 {
        return Err(invalid(format!("ball_volume needs at least 1000 samples, got {samples}")));
    }
    if !(r > 0.0) {
        return Err(invalid("radius must be positive"));
    }
    let half: Vec<f64> = (1..=d).map(|j| r.powi(j as i32)).collect();
    let box_volume: f64 = half.iter().map(|h| 2.0 * h).product();
    let mut rng = rng::stream(seed, 0);
    let mut x = vec![0.0; d];
    let mut hits = 0usize;
    for _ in 0..samples {
        for (xj, h) in x.iter_mut().zip(&half) {
            *xj = rng.random_range(-*h..=*h);
        }
        if rho(&x) <= r {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    Ok(McEstimate { value: box_volume * p, std_error: box_volume * (p * (1.0 - p) / samples as f64).sqrt() })
}

/// Largest observed `rho(x+y) / (rho(x) + rho(y))` over random pairs.
///
/// Pairs mix log-uniform coordinate magnitudes, sparse supports and
/// near-parallel pairs so every block gets stressed.
pub fn quasi_triangle_ratio(space: &ParabolicSpace, trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(invalid("quasi_triangle_ratio needs at least one trial"));
    }
    let d = space.d();
    let mut rng = rng::stream(seed, 1);
    let mut worst = 0.0f64;
    let mut x = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut s = vec![0.0; d];
    for trial in 0..trials {
        random_probe(&mut rng, &mut x);
        match trial % 3 {
            0 => random_probe(&mut rng, &mut y),
            1 => {
                // Random dilate of x, maybe sign-flipped coordinatewise.
                let t: f64 = (4.0 * (rng.random::<f64>() - 0.5)).exp();
                for (j, (yj, xj)) in y.iter_mut().zip(&x).enumerate() {
                    *yj = xj * t.powi(j as i32 + 1) * if rng.random_bool(0.2) { -1.0 } else { 1.0 };
                }
            }
            _ => y.copy_from_slice(&x),
        }
        for ((sj, xj), yj) in s.iter_mut().zip(&x).zip(&y) {
            *sj = xj + yj;
        }
        let denom = rho(&x) + rho(&y);
        if denom > 0.0 {
            worst = worst.max(rho(&s) / denom);
        }
    }
    Ok(worst)
}

fn random_probe<R: Rng>(rng: &mut R, x: &mut [f64]) {
    let keep = rng.random_range(0.2..=1.0);
    for (i, xj) in x.iter_mut().enumerate() {
        if rng.random::<f64>() > keep {
            *xj = 0.0;
            continue;
        }
        let z: f64 = StandardNormal.sample(rng);
        // Magnitudes comparable to the block scale |x_j| ~ t^j.
        let scale = (3.0 * z).exp().powi(i as i32 + 1);
        *xj = if rng.random_bool(0.5) { scale } else { -scale };
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PolarCheckOptions {
    /// Parabolic truncation radius `R`: the box is `|x_j| <= R^j`.
    pub truncation: f64,
    /// Cartesian midpoints per axis.
    pub grid: usize,
    /// Cells per axis used to sample directions on the unit sphere.
    pub direction_cells: usize,
    pub radial_bins: usize,
    pub tol: f64,
}

impl Default for PolarCheckOptions {
    fn default() -> Self {
        PolarCheckOptions { truncation: 40.0, grid: 2000, direction_cells: 100, radial_bins: 512, tol: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarCheck {
    pub cartesian: f64,
    pub cartesian_error: f64,
    pub polar: f64,
    pub polar_error: f64,
    pub passed: bool,
}

/// Midpoint nodes and weights on `[-R^j, R^j]` graded as `x = sgn(u) |u|^j R^j`.
fn graded_axis(j: usize, radius: f64, cells: usize) -> Vec<(f64, f64)> {
    let h = 2.0 / cells as f64;
    let rj = radius.powi(j as i32);
    (0..cells)
        .map(|i| {
            let u: f64 = -1.0 + (i as f64 + 0.5) * h;
            let x = u.signum() * u.abs().powi(j as i32) * rj;
            let w = j as f64 * u.abs().powi(j as i32 - 1) * rj * h;
            (x, w)
        })
        .collect()
}

fn tensor_sum(axes: &[Vec<(f64, f64)>], mut f: impl FnMut(&[f64], f64)) {
    let d = axes.len();
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    loop {
        let mut w = 1.0;
        for j in 0..d {
            x[j] = axes[j][idx[j]].0;
            w *= axes[j][idx[j]].1;
        }
        f(&x, w);
        let mut j = d;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < axes[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

fn cartesian_integral(d: usize, phi: &dyn Fn(&[f64]) -> f64, radius: f64, cells: usize) -> f64 {
    let axes: Vec<_> = (1..=d).map(|j| graded_axis(j, radius, cells)).collect();
    let mut total = 0.0;
    tensor_sum(&axes, |x, w| total += w * phi(x));
    total
}

/// Cells of the unit box `[-1, 1]^d` that meet the unit ball, as
/// `(center, weight)`; cells cut by the sphere are split `SUB^d` ways.
fn unit_ball_cells(d: usize, cells: usize) -> Vec<(Vec<f64>, f64)> {
    const SUB: usize = 16;
    let h = 2.0 / cells as f64;
    let mut out = Vec::new();
    let mut lo = vec![0.0; d];
    let mut idx = vec![0usize; d];
    loop {
        for j in 0..d {
            lo[j] = -1.0 + idx[j] as f64 * h;
        }
        // Classify by the corners; rho is monotone in each |x_j|.
        let near: Vec<f64> = lo
            .iter()
            .map(|&l| {
                if l >= 0.0 {
                    l
                } else if l + h <= 0.0 {
                    l + h
                } else {
                    0.0
                }
            })
            .collect();
        let far: Vec<f64> = lo.iter().map(|&l| l.abs().max((l + h).abs())).collect();
        if rho(&far) <= 1.0 {
            let center: Vec<f64> = lo.iter().map(|l| l + 0.5 * h).collect();
            out.push((center, h.powi(d as i32)));
        } else if rho(&near) <= 1.0 {
            let hs = h / SUB as f64;
            let w = hs.powi(d as i32);
            let mut sub = vec![0usize; d];
            loop {
                let c: Vec<f64> = (0..d).map(|j| lo[j] + (sub[j] as f64 + 0.5) * hs).collect();
                if rho(&c) <= 1.0 {
                    out.push((c, w));
                }
                if !advance(&mut sub, SUB) {
                    break;
                }
            }
        }
        if !advance(&mut idx, cells) {
            return out;
        }
    }
}

fn advance(idx: &mut [usize], len: usize) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < len {
            return true;
        }
        idx[i] = 0;
    }
    false
}

fn polar_integral(space: &ParabolicSpace, phi: &dyn Fn(&[f64]) -> f64, opts: &PolarCheckOptions, cells: usize) -> f64 {
    let d = space.d();
    let alpha = space.alpha() as f64;
    // sigma_rho(E) = alpha |{y in B_1 : y' in E}|, binned from polar_decompose.
    let directions: Vec<(Vec<f64>, f64)> =
        unit_ball_cells(d, cells).into_iter().filter_map(|(y, w)| polar_decompose(&y).ok().map(|p| (p.direction, alpha * w))).collect();
    let bins = opts.radial_bins;
    let h = opts.truncation / bins as f64;
    let mut total = 0.0;
    for b in 0..bins {
        let r = (b as f64 + 0.5) * h;
        let shell: f64 = directions.iter().map(|(dir, w)| w * phi(&dilate_unchecked(dir, r))).sum();
        total += r.powi(space.alpha() as i32 - 1) * shell * h;
    }
    total
}

/// Compares `\int phi dx` on a Cartesian grid with the polar formula
/// `\int_0^R r^(alpha-1) \int_S phi(delta_r x') d sigma(x') dr`.
///
/// Both sides report a refinement error estimate (the change between the
/// given resolution and half of it).
pub fn polar_integration_check(space: &ParabolicSpace, phi: &dyn Fn(&[f64]) -> f64, opts: &PolarCheckOptions) -> Result<PolarCheck> {
    if space.d() > 2 {
        return Err(invalid("polar_integration_check supports d <= 2"));
    }
    let d = space.d();
    let cartesian = cartesian_integral(d, phi, opts.truncation, opts.grid);
    let coarse = cartesian_integral(d, phi, opts.truncation, opts.grid / 2);
    let polar = polar_integral(space, phi, opts, opts.direction_cells);
    let polar_coarse = polar_integral(space, phi, opts, opts.direction_cells / 2);
    let cartesian_error = (cartesian - coarse).abs();
    let polar_error = (polar - polar_coarse).abs();
    let passed = (cartesian - polar).abs() <= opts.tol + cartesian_error + polar_error;
    Ok(PolarCheck { cartesian, cartesian_error, polar, polar_error, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn space_parameters() {
        let s = ParabolicSpace::new(1).unwrap();
        assert_eq!((s.n(), s.alpha()), (0, 1));
        let s = ParabolicSpace::new(4).unwrap();
        assert_eq!((s.n(), s.alpha()), (2, 10));
        let s = ParabolicSpace::new(5).unwrap();
        assert_eq!((s.n(), s.alpha()), (3, 15));
        assert!(ParabolicSpace::new(0).is_err());
        for d in 1..200 {
            let s = ParabolicSpace::new(d).unwrap();
            let n = s.n();
            assert!(d <= 1 << n);
            assert!(n == 0 || (1usize << (n - 1)) < d);
        }
    }

    #[test]
    fn blocks_tile_the_coordinates() {
        for d in 1..70 {
            let mut next = 1;
            for b in blocks(d) {
                assert_eq!(b.lo + 1, next, "d={d}");
                for j in b.coords() {
                    let e = b.exponent(j);
                    assert!((1.0..=2.0).contains(&e), "d={d} j={j} e={e}");
                }
                next = b.hi + 1;
            }
            assert_eq!(next, d + 1);
        }
    }

    #[test]
    fn dilation_examples() {
        assert_eq!(dilate(&[1.0, 1.0, 1.0], 2.0).unwrap(), vec![2.0, 4.0, 8.0]);
        assert_eq!(dilate(&[0.3, -1.7], 1.0).unwrap(), vec![0.3, -1.7]);
        assert_eq!(dilate(&[2.0, 4.0, 8.0], 0.5).unwrap(), vec![1.0, 1.0, 1.0]);
        assert!(dilate(&[1.0], 0.0).is_err());
        assert!(dilate(&[1.0], -1.0).is_err());
        assert_eq!(dilate_dyadic(&[1.0, 1.0, 1.0], 1), vec![2.0, 4.0, 8.0]);
        assert_eq!(dilate_dyadic(&[1.0, 1.0], -1), vec![0.5, 0.25]);
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(&[3.0, 4.0]), 5.0);
        assert_eq!(rho(&[1.0, 1.0, 1.0]), 3.0);
        // Oracle: (1^(4/3) + 1^(4/4))^(1/4) computed by hand.
        assert!((rho(&[0.0, 0.0, 1.0, 1.0]) - 1.189_207_115_002_721).abs() < 1e-14);
        assert_eq!(rho(&[0.0; 7]), 0.0);
    }

    #[test]
    fn rho_with_tiny_and_huge_coordinates() {
        let tiny = [0.0, 0.0, 1e-300, 1e-300];
        assert!(rho(&tiny) > 0.0);
        let huge = [0.0, 0.0, 1e300, 1e300];
        assert!(rho(&huge).is_finite());
        // Homogeneity survives the log-domain path.
        let x = [1e-20, 3e-18, 2e-17, 5e-16];
        let s = 1e3;
        let lhs = rho(&dilate(&x, s).unwrap());
        assert!(close(lhs, s * rho(&x), 1e-12));
    }

    #[test]
    fn polar_examples() {
        let p = polar_decompose(&[0.0, 4.0]).unwrap();
        assert_eq!(p.radius, 2.0);
        assert_eq!(p.direction, vec![0.0, 1.0]);
        let p = polar_decompose(&[-3.0]).unwrap();
        assert_eq!((p.radius, p.direction.clone()), (3.0, vec![-1.0]));
        let p = polar_decompose(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.radius, 3.0);
        for (a, b) in p.direction.iter().zip([1.0 / 3.0, 1.0 / 9.0, 1.0 / 27.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(polar_decompose(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn ball_volume_examples() {
        let s1 = ParabolicSpace::new(1).unwrap();
        let v = ball_volume(&s1, 1.0, 1000, 3).unwrap();
        assert_eq!(v.value, 2.0);
        assert_eq!(v.std_error, 0.0);

        let s2 = ParabolicSpace::new(2).unwrap();
        // Closed form 2 * \int_0^1 2 (1 - u)^2 du = 4/3.
        let v1 = ball_volume(&s2, 1.0, 200_000, 11).unwrap();
        assert!((v1.value - 4.0 / 3.0).abs() <= 3.0 * v1.std_error, "{v1:?}");
        let v2 = ball_volume(&s2, 2.0, 200_000, 12).unwrap();
        assert!((v2.value - 32.0 / 3.0).abs() <= 3.0 * v2.std_error, "{v2:?}");
        let ratio = v2.value / v1.value;
        let se = ratio * ((v1.std_error / v1.value).powi(2) + (v2.std_error / v2.value).powi(2)).sqrt();
        assert!((ratio - 8.0).abs() <= 3.0 * se);

        assert!(ball_volume(&ParabolicSpace::new(5).unwrap(), 1.0, 1000, 0).is_err());
        assert!(ball_volume(&s2, 1.0, 999, 0).is_err());
    }

    #[test]
    fn ball_volume_scales_like_r_alpha() {
        for d in 3..=4 {
            let s = ParabolicSpace::new(d).unwrap();
            let a = ball_volume(&s, 1.0, 100_000, 5).unwrap();
            let b = ball_volume(&s, 1.5, 100_000, 6).unwrap();
            let expected = 1.5f64.powi(s.alpha() as i32);
            let ratio = b.value / a.value;
            let se = ratio * ((a.std_error / a.value).powi(2) + (b.std_error / b.value).powi(2)).sqrt();
            assert!((ratio - expected).abs() <= 3.0 * se, "d={d} ratio={ratio} expected={expected}");
        }
    }

    #[test]
    fn quasi_triangle_examples() {
        let s1 = ParabolicSpace::new(1).unwrap();
        assert!(quasi_triangle_ratio(&s1, 10_000, 1).unwrap() <= 1.0);
        let x = [0.0, 1.0];
        let r = rho(&[0.0, 2.0]) / (rho(&x) + rho(&x));
        assert!((r - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        for d in [2, 3, 5, 8, 16, 33] {
            let s = ParabolicSpace::new(d).unwrap();
            let r = quasi_triangle_ratio(&s, 10_000, d as u64).unwrap();
            assert!(r <= 2.0, "d={d} r={r}");
        }
    }

    /// Exhaustive search on a small grid at d = 2, where rho is subadditive.
    #[test]
    fn quasi_triangle_exhaustive_d2() {
        let vals: Vec<f64> = (-6..=6).map(|i| i as f64 / 2.0).collect();
        let mut worst = 0.0f64;
        for &a in &vals {
            for &b in &vals {
                for &c in &vals {
                    for &e in &vals {
                        let (x, y) = ([a, b], [c, e]);
                        let den = rho(&x) + rho(&y);
                        if den > 0.0 {
                            worst = worst.max(rho(&[a + c, b + e]) / den);
                        }
                    }
                }
            }
        }
        assert!(worst <= 1.0 + 1e-15);
        assert!(worst >= 1.0 - 1e-15);
        let random = quasi_triangle_ratio(&ParabolicSpace::new(2).unwrap(), 10_000, 9).unwrap();
        assert!(random <= worst + 1e-15);
    }

    fn exp_rho(x: &[f64]) -> f64 {
        (-rho(x)).exp()
    }

    #[test]
    fn polar_integration_examples() {
        let s1 = ParabolicSpace::new(1).unwrap();
        let c = polar_integration_check(&s1, &exp_rho, &PolarCheckOptions::default()).unwrap();
        assert!(c.passed, "{c:?}");
        assert!((c.cartesian - 2.0).abs() < 1e-3, "{c:?}");
        assert!((c.polar - 2.0).abs() < 1e-3, "{c:?}");

        let s2 = ParabolicSpace::new(2).unwrap();
        let c = polar_integration_check(&s2, &exp_rho, &PolarCheckOptions::default()).unwrap();
        assert!(c.passed, "{c:?}");
        assert!((c.cartesian - 8.0).abs() < 1e-2, "{c:?}");
        assert!((c.polar - 8.0).abs() < 1e-2, "{c:?}");

        let ball = |x: &[f64]| if rho(x) <= 1.0 { 1.0 } else { 0.0 };
        let opts = PolarCheckOptions { truncation: 2.0, tol: 1e-2, ..Default::default() };
        let c = polar_integration_check(&s2, &ball, &opts).unwrap();
        assert!(c.passed, "{c:?}");
        assert!((c.cartesian - 4.0 / 3.0).abs() < 1e-2, "{c:?}");
        assert!((c.polar - 4.0 / 3.0).abs() < 1e-2, "{c:?}");

        assert!(polar_integration_check(&ParabolicSpace::new(3).unwrap(), &exp_rho, &opts).is_err());
    }

    fn vec_in(d: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-50.0f64..50.0, d)
    }

    proptest! {
        #[test]
        fn homogeneity(d in 1usize..=64, seed in any::<u64>(), s in 0.05f64..20.0) {
            let mut rng = rng::stream(seed, 0);
            let mut x = vec![0.0; d];
            random_probe(&mut rng, &mut x);
            let r = rho(&x);
            let rs = rho(&dilate(&x, s).unwrap());
            prop_assert!((rs - s * r).abs() <= 1e-12 * s * r);
        }

        #[test]
        fn symmetry_and_nondegeneracy(x in (1usize..=16).prop_flat_map(vec_in)) {
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            prop_assert_eq!(rho(&x), rho(&neg));
            let zero = x.iter().all(|&v| v == 0.0);
            prop_assert_eq!(rho(&x) == 0.0, zero);
        }

        #[test]
        fn polar_round_trip(x in (1usize..=12).prop_flat_map(vec_in)) {
            prop_assume!(x.iter().any(|&v| v != 0.0));
            let p = polar_decompose(&x).unwrap();
            prop_assert!((rho(&p.direction) - 1.0).abs() <= 1e-12);
            for (a, b) in p.recompose().iter().zip(&x) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
            }
        }
    }
}
