//! Lattice versions, for `d <= 3`, of the averages along the moment curve and
//! their maximal functions:
//!
//! * `A_r f(x) = 1/(2r) \int_{|t|<=r} f(x - gamma(t)) dt` (ball average),
//! * `S_k f(x) = 2^{-k} \int_{2^{k-1}<|t|<=2^k} f(x - gamma(t)) dt` (shell average),
//! * `P_t f(x) = E f(x - X_t)` with `X_t` drawn from the parabolic Poisson kernel.
//!
//! Off-lattice reads use multilinear interpolation with zero extension. All
//! pointwise inequalities between these operators hold exactly for the
//! interpolant, so the only discretization error is in the `t` quadrature.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::curve::{CurveCoeffs, DyadicWindow};
use crate::error::{invalid, Error, Result};
use crate::grid::{Axis, GridFunction};
use crate::par;
use crate::parabolic::{dilate, rho, ParabolicSpace};
use crate::stable::sample_kernel_batch;

pub const MIN_T_SAMPLES: usize = 64;

/// Fraction of curve reads outside the box above which results carry a warning.
pub const OFF_GRID_WARNING: f64 = 0.1;

/// Relative Monte-Carlo error above which Poisson results carry a warning.
pub const MC_WARNING: f64 = 0.1;

/// Radii of the continuous maximal function, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiiSet {
    radii: Vec<f64>,
}

impl RadiiSet {
    pub fn new(mut radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(invalid("radii set is empty"));
        }
        if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(invalid("radii must be positive and finite"));
        }
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        Ok(RadiiSet { radii })
    }

    /// `{2^k : k in window}`.
    pub fn dyadic(window: &DyadicWindow) -> Self {
        RadiiSet { radii: window.iter().map(|k| 2f64.powi(k)).collect() }
    }

    /// `count` log-spaced radii from `lo` to `hi`.
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo) || count == 0 {
            return Err(invalid("log_spaced needs 0 < lo <= hi and count >= 1"));
        }
        if count == 1 {
            return Self::new(vec![lo]);
        }
        let step = (hi / lo).ln() / (count - 1) as f64;
        Self::new((0..count).map(|i| lo * (step * i as f64).exp()).collect())
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

/// An operator output with the share of its curve reads that left the box.
#[derive(Debug, Clone, PartialEq)]
pub struct Averaged {
    pub values: GridFunction,
    pub off_grid_fraction: f64,
}

impl Averaged {
    pub fn warning(&self) -> bool {
        self.off_grid_fraction > OFF_GRID_WARNING
    }
}

fn check_t_samples(n: usize) -> Result<()> {
    if n < MIN_T_SAMPLES {
        return Err(invalid(format!("need at least {MIN_T_SAMPLES} t samples, got {n}")));
    }
    Ok(())
}

fn midpoints(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let h = (b - a) / n as f64;
    (0..n).map(move |i| a + (i as f64 + 0.5) * h)
}

fn ball_nodes(r: f64, n: usize) -> Vec<f64> {
    midpoints(-r, r, n).collect()
}

fn shell_nodes(r: f64, n: usize) -> Vec<f64> {
    let half = n.div_ceil(2);
    midpoints(-r, -0.5 * r, half).chain(midpoints(0.5 * r, r, half)).collect()
}

/// Mean of `f(x - Gamma gamma(t))` over the nodes, at every lattice point.
fn average_over(f: &GridFunction, nodes: &[f64], curve: &CurveCoeffs) -> Result<Averaged> {
    let d = f.d();
    if curve.gamma().len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: curve.gamma().len() });
    }
    let offsets: Vec<Vec<f64>> = nodes
        .iter()
        .map(|&t| {
            let mut p = vec![0.0; d];
            curve.point(t, &mut p);
            p
        })
        .collect();
    let rows = par::map_indexed(f.len(), |idx| {
        let x = f.point(idx);
        let mut y = vec![0.0; d];
        let mut sum = 0.0;
        let mut off = 0usize;
        for o in &offsets {
            for j in 0..d {
                y[j] = x[j] - o[j];
            }
            if f.contains(&y) {
                sum += f.interpolate(&y);
            } else {
                off += 1;
            }
        }
        (sum / nodes.len() as f64, off)
    });
    let off: usize = rows.iter().map(|r| r.1).sum();
    Ok(Averaged {
        values: f.with_samples(rows.into_iter().map(|r| r.0).collect())?,
        off_grid_fraction: off as f64 / (f.len() * nodes.len()) as f64,
    })
}

fn pointwise_max(parts: Vec<Averaged>) -> Result<Averaged> {
    let count = parts.len() as f64;
    let mut it = parts.into_iter();
    let first = it.next().ok_or_else(|| invalid("empty family"))?;
    let mut best = first.values.samples().to_vec();
    let mut off = first.off_grid_fraction;
    let lattice = first.values;
    for p in it {
        for (b, v) in best.iter_mut().zip(p.values.samples()) {
            *b = b.max(*v);
        }
        off += p.off_grid_fraction;
    }
    Ok(Averaged { values: lattice.with_samples(best)?, off_grid_fraction: off / count })
}

/// `A_r f` along `gamma(t) = (t, ..., t^d)`.
pub fn curve_average(f: &GridFunction, r: f64, t_samples: usize) -> Result<Averaged> {
    curve_average_along(f, r, t_samples, &CurveCoeffs::identity(f.d()))
}

/// `A_r f` along `Gamma gamma(t)`.
pub fn curve_average_along(f: &GridFunction, r: f64, t_samples: usize, curve: &CurveCoeffs) -> Result<Averaged> {
    check_t_samples(t_samples)?;
    if !(r > 0.0) {
        return Err(invalid("radius must be positive"));
    }
    average_over(f, &ball_nodes(r, t_samples), curve)
}

/// `S_k f`.
pub fn shell_average(f: &GridFunction, k: i32, t_samples: usize) -> Result<Averaged> {
    check_t_samples(t_samples)?;
    average_over(f, &shell_nodes(2f64.powi(k), t_samples), &CurveCoeffs::identity(f.d()))
}

/// `sup_{k in window} S_k f`.
pub fn dyadic_max(f: &GridFunction, window: &DyadicWindow, t_samples: usize) -> Result<Averaged> {
    pointwise_max(window.iter().map(|k| shell_average(f, k, t_samples)).collect::<Result<Vec<_>>>()?)
}

/// `sup_{r in radii} A_r f`.
pub fn continuous_max(f: &GridFunction, radii: &RadiiSet, t_samples: usize) -> Result<Averaged> {
    pointwise_max(radii.radii().iter().map(|&r| curve_average(f, r, t_samples)).collect::<Result<Vec<_>>>()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    /// `max_x max(M_sigma - 2 M_mu, M_mu - 2 M_sigma - R, 0)`.
    pub violation: f64,
    /// Estimated `t`-quadrature error of the same combination.
    pub error_bound: f64,
    /// `max_x max(M_sigma - M_mu, 0)`, the uncorrected lower comparison.
    pub unit_constant_gap: f64,
    pub passed: bool,
}

struct SandwichParts {
    sigma: Vec<f64>,
    mu: Vec<f64>,
    remainder: Vec<f64>,
}

fn sandwich_parts(f: &GridFunction, window: &DyadicWindow, radii: &RadiiSet, n: usize) -> Result<SandwichParts> {
    let sigma = dyadic_max(f, window, n)?.values.samples().to_vec();
    // The dyadic radii join the set so that S_k <= 2 A_{2^k} is available.
    let mut all = radii.radii().to_vec();
    all.extend(RadiiSet::dyadic(window).radii());
    let mu = continuous_max(f, &RadiiSet::new(all)?, n)?.values.samples().to_vec();
    // Scales below the window: A_r f <= 2 M_sigma f + (2^{k_min-1} / r) A_{2^{k_min-1}} f.
    let inner = 2f64.powi(window.k_min - 1);
    let r_min = radii.radii()[0].min(2f64.powi(window.k_min));
    let remainder = curve_average(f, inner, n)?.values.samples().iter().map(|v| v * inner / r_min).collect();
    Ok(SandwichParts { sigma, mu, remainder })
}

fn sandwich_excess(p: &SandwichParts) -> Vec<f64> {
    (0..p.sigma.len()).map(|i| (p.sigma[i] - 2.0 * p.mu[i]).max(p.mu[i] - 2.0 * p.sigma[i] - p.remainder[i]).max(0.0)).collect()
}

/// Checks `M_sigma f <= 2 M_mu f` and `M_mu f <= 2 M_sigma f + R`, where `R`
/// carries the scales below the dyadic window. The error bound compares
/// `t_samples` with `2 t_samples` nodes.
pub fn sandwich_check(f: &GridFunction, window: &DyadicWindow, radii: &RadiiSet, t_samples: usize) -> Result<SandwichReport> {
    let (lo, hi) = (2f64.powi(window.k_min), 2f64.powi(window.k_max));
    if radii.radii().iter().any(|&r| r < lo || r > hi) {
        return Err(invalid(format!("radii must lie in [{lo}, {hi}]")));
    }
    let coarse = sandwich_parts(f, window, radii, t_samples)?;
    let fine = sandwich_parts(f, window, radii, 2 * t_samples)?;
    let excess = sandwich_excess(&coarse);
    let violation = excess.iter().cloned().fold(0.0, f64::max);
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let err_s = diff(&coarse.sigma, &fine.sigma);
    let err_m = diff(&coarse.mu, &fine.mu);
    let err_r = diff(&coarse.remainder, &fine.remainder);
    let error_bound = 2.0 * (err_s + err_m) + err_r + 1e-12;
    let unit_constant_gap = coarse.sigma.iter().zip(&coarse.mu).map(|(s, m)| (s - m).max(0.0)).fold(0.0, f64::max);
    Ok(SandwichReport { violation, error_bound, unit_constant_gap, passed: violation <= error_bound })
}

/// `P_t f` at every lattice point, with per-point standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonAverage {
    pub values: GridFunction,
    pub std_error: Vec<f64>,
    /// Largest `std_error / value` over points where the value exceeds
    /// `1e-3 max f`.
    pub max_relative_error: f64,
}

impl PoissonAverage {
    pub fn warning(&self) -> bool {
        self.max_relative_error > MC_WARNING
    }
}

fn kernel_draws(d: usize, mc_samples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if d > 2 {
        return Err(invalid(format!("Poisson convolution is limited to d <= 2, got {d}")));
    }
    if mc_samples < 2 {
        return Err(invalid("need at least two Monte-Carlo samples"));
    }
    sample_kernel_batch(&ParabolicSpace::new(d)?, 1.0, mc_samples, seed)
}

/// `P_t f` from draws of `P_1`, using `X_t = delta_t X_1` in distribution.
fn poisson_from_draws(f: &GridFunction, t: f64, draws: &[Vec<f64>]) -> Result<PoissonAverage> {
    let scaled: Vec<Vec<f64>> = draws.iter().map(|x| dilate(x, t)).collect::<Result<_>>()?;
    let n = scaled.len() as f64;
    let d = f.d();
    let rows = par::map_indexed(f.len(), |idx| {
        let x = f.point(idx);
        let mut y = vec![0.0; d];
        let (mut s, mut s2) = (0.0, 0.0);
        for o in &scaled {
            for j in 0..d {
                y[j] = x[j] - o[j];
            }
            let v = f.interpolate(&y);
            s += v;
            s2 += v * v;
        }
        let mean = s / n;
        let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
        (mean, (var / n).sqrt())
    });
    let floor = 1e-3 * f.max_value();
    let max_relative_error = rows.iter().filter(|r| r.0 > floor).map(|r| r.1 / r.0).fold(0.0, f64::max);
    Ok(PoissonAverage {
        values: f.with_samples(rows.iter().map(|r| r.0).collect())?,
        std_error: rows.iter().map(|r| r.1).collect(),
        max_relative_error,
    })
}

/// `P_t f` by Monte-Carlo with `mc_samples` kernel draws.
pub fn poisson_average(f: &GridFunction, t: f64, mc_samples: usize, seed: u64) -> Result<PoissonAverage> {
    poisson_from_draws(f, t, &kernel_draws(f.d(), mc_samples, seed)?)
}

/// `sup_{t in t_set} P_t f`, all `t` sharing one set of kernel draws. The
/// standard error at each point is the one of the maximizing `t`.
pub fn poisson_max(f: &GridFunction, t_set: &RadiiSet, mc_samples: usize, seed: u64) -> Result<PoissonAverage> {
    let draws = kernel_draws(f.d(), mc_samples, seed)?;
    let mut best: Option<PoissonAverage> = None;
    for &t in t_set.radii() {
        let p = poisson_from_draws(f, t, &draws)?;
        best = Some(match best {
            None => p,
            Some(b) => {
                let mut vals = b.values.samples().to_vec();
                let mut se = b.std_error.clone();
                for i in 0..vals.len() {
                    if p.values.samples()[i] > vals[i] {
                        vals[i] = p.values.samples()[i];
                        se[i] = p.std_error[i];
                    }
                }
                PoissonAverage {
                    values: b.values.with_samples(vals)?,
                    std_error: se,
                    max_relative_error: b.max_relative_error.max(p.max_relative_error),
                }
            }
        });
    }
    best.ok_or_else(|| invalid("empty t set"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    /// `max_x max(M_sigma f - sup_k P_{2^k} f - G f, 0)` with `G` the square function.
    pub violation: f64,
    /// Three standard errors of `sup_k P_{2^k} f + G f`, maximized over the grid.
    pub error_bound: f64,
    pub max_relative_error: f64,
    pub passed: bool,
}

/// Checks `M_sigma f <= sup_k P_{2^k} f + (sum_k |S_k f - P_{2^k} f|^2)^{1/2}`.
///
/// The Poisson maximal term and the square function use independent draws,
/// so the inequality is not an algebraic identity of the estimates.
pub fn split_check(f: &GridFunction, window: &DyadicWindow, t_samples: usize, mc_samples: usize, seed: u64) -> Result<SplitReport> {
    let sigma = dyadic_max(f, window, t_samples)?;
    let sup = poisson_max(f, &RadiiSet::dyadic(window), mc_samples, seed)?;
    let draws = kernel_draws(f.d(), mc_samples, seed.wrapping_add(0x5bd1_e995))?;
    let n = f.len();
    let mut sq = vec![0.0; n];
    let mut var = vec![0.0; n];
    let mut rel = sup.max_relative_error;
    for k in window.iter() {
        let s = shell_average(f, k, t_samples)?;
        let p = poisson_from_draws(f, 2f64.powi(k), &draws)?;
        rel = rel.max(p.max_relative_error);
        for i in 0..n {
            sq[i] += (s.values.samples()[i] - p.values.samples()[i]).powi(2);
            var[i] += p.std_error[i].powi(2);
        }
    }
    let mut violation = 0.0f64;
    let mut error_bound = 0.0f64;
    for i in 0..n {
        let rhs = sup.values.samples()[i] + sq[i].sqrt();
        violation = violation.max(sigma.values.samples()[i] - rhs);
        // |G_est - G| <= (sum_k err_k^2)^{1/2} by the triangle inequality in l2.
        error_bound = error_bound.max(3.0 * (sup.std_error[i] + var[i].sqrt()));
    }
    let error_bound = error_bound + 1e-12;
    Ok(SplitReport { violation, error_bound, max_relative_error: rel, passed: violation <= error_bound })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub name: String,
    pub f_norm: f64,
    pub mf_norm: f64,
    /// `||M_sigma f|| / ||f||`.
    pub ratio: f64,
    /// `||S_0 f|| / ||f||`.
    pub shell0_ratio: f64,
    pub off_grid_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeTable {
    pub rows: Vec<ProbeRow>,
    /// Largest ratio, a lower bound for the lattice operator norm.
    pub max_ratio: f64,
}

impl ProbeTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        for r in &self.rows {
            out.serialize(r)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `||M_sigma f||_2 / ||f||_2` over a family of lattice functions.
pub fn operator_norm_probe(family: &[(String, GridFunction)], window: &DyadicWindow, t_samples: usize) -> Result<ProbeTable> {
    if family.is_empty() {
        return Err(invalid("probe family is empty"));
    }
    let mut rows = Vec::with_capacity(family.len());
    for (name, f) in family {
        let f_norm = f.l2_norm();
        if f_norm == 0.0 {
            return Err(invalid(format!("probe function {name} vanishes")));
        }
        let m = dyadic_max(f, window, t_samples)?;
        let s0 = shell_average(f, 0, t_samples)?;
        let mf_norm = m.values.l2_norm();
        rows.push(ProbeRow {
            name: name.clone(),
            f_norm,
            mf_norm,
            ratio: mf_norm / f_norm,
            shell0_ratio: s0.values.l2_norm() / f_norm,
            off_grid_fraction: m.off_grid_fraction,
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(ProbeTable { rows, max_ratio })
}

/// Indicator of `{rho(x - center) <= radius}` on the lattice.
pub fn parabolic_ball_indicator(axes: Vec<Axis>, center: &[f64], radius: f64) -> Result<GridFunction> {
    if center.len() != axes.len() {
        return Err(Error::DimensionMismatch { expected: axes.len(), got: center.len() });
    }
    GridFunction::from_fn(axes, |x| {
        let diff: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
        if rho(&diff) <= radius {
            1.0
        } else {
            0.0
        }
    })
}

/// `exp(-|x|^2 / w^2)` on the lattice.
pub fn gaussian_bump(axes: Vec<Axis>, width: f64) -> Result<GridFunction> {
    GridFunction::from_fn(axes, |x| (-x.iter().map(|v| v * v).sum::<f64>() / (width * width)).exp())
}

/// A cubic lattice `[-l, l]^d` with `n` points per axis.
pub fn cube_axes(d: usize, l: f64, n: usize) -> Result<Vec<Axis>> {
    (0..d).map(|_| Axis::new(-l, l, n)).collect()
}
