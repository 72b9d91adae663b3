//! The dyadic multiplier `nu^ = sigma^ - exp(-rho)` and its square function
//! profile `g(xi) = (sum_k |nu^(delta_{2^k} xi)|^2)^{1/2}`.
//!
//! `g` is invariant under `xi -> delta_2 xi`, so its supremum over `R^d` is
//! attained on the annulus `1 <= rho < 2`. Profiles sum a finite window of
//! scales and bound the two infinite tails analytically.

use std::cmp::Ordering;
use std::f64::consts::{LN_2, PI};
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::curve::{shell_decay_bound, sigma_hat_dyadic_with, DyadicWindow, ShellTransform, ENVELOPE_CONSTANT};
use crate::error::{invalid, Error, Result};
use crate::oscillatory::DEFAULT_PANEL_CAP;
use crate::par;
use crate::parabolic::{dilate_dyadic, dilate_unchecked, rho, ParabolicSpace};
use crate::rng;

/// Windows never reach past `|k| = K_LIMIT`.
pub const K_LIMIT: i32 = 200;

/// Panel cap used while searching; final values use the full cap.
pub const SEARCH_PANEL_CAP: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileOptions {
    /// Target for each analytic tail bound.
    pub tol: f64,
    /// Panel cap for each `sigma^` evaluation.
    pub cap: usize,
}

impl ProfileOptions {
    pub fn new(tol: f64) -> Self {
        ProfileOptions { tol, cap: DEFAULT_PANEL_CAP }
    }

    fn quad_tol(&self) -> f64 {
        (1e-2 * self.tol).clamp(1e-12, 1e-6)
    }
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions::new(1e-6)
    }
}

/// One value of `nu^`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NuValue {
    Computed {
        value: Complex64,
        error: f64,
    },
    /// Only `|nu^| <= bound` is known.
    Bound {
        bound: f64,
    },
}

impl NuValue {
    pub fn value(&self) -> Option<Complex64> {
        match self {
            NuValue::Computed { value, .. } => Some(*value),
            NuValue::Bound { .. } => None,
        }
    }
}

fn nu_from(shell: ShellTransform, poisson: f64) -> NuValue {
    match shell {
        ShellTransform::Computed { value, error } => NuValue::Computed { value: value - poisson, error },
        ShellTransform::EnvelopeOnly { bound } => NuValue::Bound { bound: bound + poisson },
    }
}

/// `nu^(delta_{2^k} xi)`, given `rho(xi)`.
fn nu_at(xi: &[f64], r: f64, k: i32, opts: &ProfileOptions) -> Result<NuValue> {
    let poisson = (-(2f64.powi(k) * r)).exp();
    Ok(nu_from(sigma_hat_dyadic_with(xi, k, opts.quad_tol(), opts.cap)?, poisson))
}

/// Like `nu_at`, but scales whose envelope bound is below `tol / 4` are
/// recorded as bounds without quadrature. These are the high-frequency
/// scales where quadrature is most expensive and the value least relevant.
fn nu_in_profile(xi: &[f64], r: f64, k: i32, opts: &ProfileOptions) -> Result<NuValue> {
    if xi.iter().any(|&x| x != 0.0) {
        let poisson = (-(2f64.powi(k) * r)).exp();
        let bound = shell_decay_bound(&dilate_dyadic(xi, k)) + poisson;
        if bound <= 0.25 * opts.tol {
            return Ok(NuValue::Bound { bound });
        }
    }
    nu_at(xi, r, k, opts)
}

pub fn nu_hat_with(xi: &[f64], k: i32, opts: &ProfileOptions) -> Result<NuValue> {
    nu_at(xi, rho(xi), k, opts)
}

/// `sigma^(delta_{2^k} xi) - exp(-2^k rho(xi))`.
pub fn nu_hat(xi: &[f64], k: i32, tol: f64) -> Result<Complex64> {
    let opts = ProfileOptions { tol: 100.0 * tol, cap: DEFAULT_PANEL_CAP };
    match nu_at(xi, rho(xi), k, &opts)? {
        NuValue::Computed { value, .. } => Ok(value),
        NuValue::Bound { .. } => Err(Error::NonConvergence { panels: DEFAULT_PANEL_CAP + 1, cap: DEFAULT_PANEL_CAP }),
    }
}

/// `|sigma^(eta) - 1| <= sum_j c_j |eta_j|` with `c_j = \int_{1/2<|t|<=1} 2 pi |t|^j dt`.
fn lipschitz_constant(j: usize) -> f64 {
    let j = j as f64;
    4.0 * PI * (1.0 - 0.5f64.powf(j + 1.0)) / (j + 1.0)
}

/// Bound on the l2 norm of `|nu^(delta_{2^k} xi)|` over `k < k_lo`.
fn lower_tail(xi: &[f64], r: f64, k_lo: i32) -> f64 {
    let m = (k_lo - 1) as f64;
    let sigma: f64 = xi
        .iter()
        .enumerate()
        .filter(|(_, x)| **x != 0.0)
        .map(|(i, x)| {
            let j = (i + 1) as f64;
            lipschitz_constant(i + 1) * (x.abs().ln() + m * j * LN_2).exp() / (1.0 - 4f64.powf(-j)).sqrt()
        })
        .sum();
    sigma + r * (m * LN_2).exp() / 0.75f64.sqrt()
}

/// Bound on `|sigma^(delta_{2^k} xi)|` from two closed forms, with `J` the
/// last nonzero coordinate:
///
/// * the measured envelope `C |xi_J|^{-1/J} 2^{-k}`,
/// * the first-derivative test once the top term of `p'` dominates on
///   `1/2 <= |t| <= 1`: there `|p'| >= 2 pi (T - S)` with
///   `T = J |xi_J| 2^{kJ} 2^{1-J}` and `S = sum_{j<J} j |xi_j| 2^{kj}`, and each
///   half-shell splits into at most `max(1, J-1)` monotone pieces.
fn analytic_shell_bound(xi: &[f64], top: usize, k: i32) -> f64 {
    let jj = (top + 1) as f64;
    let kf = k as f64;
    let env = ENVELOPE_CONSTANT * (-(xi[top].abs().ln()) / jj - kf * LN_2).exp();
    let log_t = jj.ln() + xi[top].abs().ln() + (kf * jj + 1.0 - jj) * LN_2;
    let ratio: f64 = xi[..top]
        .iter()
        .enumerate()
        .filter(|(_, x)| **x != 0.0)
        .map(|(i, x)| ((i + 1) as f64).ln() + x.abs().ln() + kf * (i + 1) as f64 * LN_2 - log_t)
        .map(f64::exp)
        .sum();
    let fd = if ratio < 1.0 {
        let pieces = (jj - 1.0).max(1.0);
        6.0 * pieces / (2.0 * PI * (1.0 - ratio)) * (-log_t).exp()
    } else {
        f64::INFINITY
    };
    env.min(fd).min(1.0)
}

/// Bound on the l2 norm of `|nu^(delta_{2^k} xi)|` over `k > k_hi`.
fn upper_tail(xi: &[f64], r: f64, k_hi: i32) -> f64 {
    let Some(top) = xi.iter().rposition(|&x| x != 0.0) else {
        return 0.0;
    };
    let mut sigma_sq = 0.0;
    let mut k = k_hi + 1;
    loop {
        let b = analytic_shell_bound(xi, top, k);
        sigma_sq += b * b;
        // Past this point the measured envelope alone, summed geometrically
        // with ratio 1/4, is negligible.
        let env = ENVELOPE_CONSTANT * (-(xi[top].abs().ln()) / (top + 1) as f64 - (k + 1) as f64 * LN_2).exp();
        if env * env / 0.75 <= 1e-6 * sigma_sq || k - k_hi > 4 * K_LIMIT {
            sigma_sq += env * env / 0.75;
            break;
        }
        k += 1;
    }
    let mut poisson = 0.0;
    for k in k_hi + 1..=K_LIMIT + 64 {
        let term = (-2.0 * 2f64.powi(k) * r).exp();
        poisson += term;
        if term < 1e-300 {
            break;
        }
    }
    sigma_sq.sqrt() + poisson.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierProfile {
    pub xi: Vec<f64>,
    pub window: DyadicWindow,
    /// `|nu^(delta_{2^k} xi)|` for `k` in the window, 0 where only a bound is known.
    pub values: Vec<f64>,
    /// `g^2 <= g_value^2 + tail_bound^2`, covering both tails, quadrature
    /// error and bound-only scales.
    pub tail_bound: f64,
    pub g_value: f64,
    /// Scales carried by the envelope bound instead of a quadrature value.
    pub envelope_only: Vec<i32>,
}

#[derive(Default)]
struct Accumulator {
    sum_sq: f64,
    extra_sq: f64,
}

impl Accumulator {
    fn push(&mut self, v: NuValue) -> f64 {
        match v {
            NuValue::Computed { value, error } => {
                let a = value.norm();
                self.sum_sq += a * a;
                self.extra_sq += 2.0 * a * error + error * error;
                a
            }
            NuValue::Bound { bound } => {
                self.extra_sq += bound * bound;
                0.0
            }
        }
    }
}

fn base_scale(r: f64) -> i32 {
    (-r.log2().floor()).clamp(-K_LIMIT as f64, K_LIMIT as f64) as i32
}

fn window_exceeded(k_lo: i32, k_hi: i32, tol: f64) -> Error {
    Error::WindowExceeded { min: k_lo, max: k_hi, tol }
}

fn lower_edge(tail: impl Fn(i32) -> f64, start: i32, tol: f64) -> Result<i32> {
    let mut k = start;
    while tail(k) > 0.5 * tol {
        k -= 1;
        if k < -K_LIMIT {
            return Err(window_exceeded(k, start, tol));
        }
    }
    Ok(k)
}

fn upper_edge(tail: impl Fn(i32) -> f64, start: i32, tol: f64) -> Result<i32> {
    let mut k = start;
    while tail(k) > 0.5 * tol {
        k += 1;
        if k > K_LIMIT {
            return Err(window_exceeded(start, k, tol));
        }
    }
    Ok(k)
}

/// `g(xi)` with a window chosen so both analytic tails are below `opts.tol / 2`.
pub fn g_profile_with(xi: &[f64], opts: &ProfileOptions) -> Result<MultiplierProfile> {
    if xi.iter().all(|&x| x == 0.0) {
        return Err(invalid("g is evaluated at xi != 0 only"));
    }
    if !(opts.tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let r = rho(xi);
    let k0 = base_scale(r);
    let k_lo = lower_edge(|k| lower_tail(xi, r, k), k0, opts.tol)?;
    let k_hi = upper_edge(|k| upper_tail(xi, r, k), k0, opts.tol)?;
    let window = DyadicWindow::new(k_lo, k_hi)?;
    let nus = par::map_indexed(window.len(), |i| nu_in_profile(xi, r, k_lo + i as i32, opts));
    let mut acc = Accumulator::default();
    let mut values = Vec::with_capacity(nus.len());
    let mut envelope_only = Vec::new();
    for (i, v) in nus.into_iter().enumerate() {
        let v = v?;
        if matches!(v, NuValue::Bound { .. }) {
            envelope_only.push(k_lo + i as i32);
        }
        values.push(acc.push(v));
    }
    let lo = lower_tail(xi, r, k_lo);
    let hi = upper_tail(xi, r, k_hi);
    Ok(MultiplierProfile {
        xi: xi.to_vec(),
        window,
        values,
        tail_bound: (lo * lo + hi * hi + acc.extra_sq).sqrt(),
        g_value: acc.sum_sq.sqrt(),
        envelope_only,
    })
}

pub fn g_profile(xi: &[f64], tol: f64) -> Result<MultiplierProfile> {
    g_profile_with(xi, &ProfileOptions::new(tol))
}

/// Quantities from the induction step at `d = 2^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InductionDiagnostics {
    pub xi: Vec<f64>,
    /// `xi` with the top block zeroed.
    pub y: Vec<f64>,
    pub j_o: usize,
    /// `|xi_{j_o}|^{-1/j_o}`.
    pub a: f64,
    /// Scales `2^k > A` belong to term I.
    pub k_split: i32,
    pub term_i: f64,
    pub term_i_tail: f64,
    pub term_ii: f64,
    pub term_ii_tail: f64,
}

pub fn induction_diagnostics(xi: &[f64], opts: &ProfileOptions) -> Result<InductionDiagnostics> {
    let d = xi.len();
    if d < 2 || !d.is_power_of_two() {
        return Err(invalid(format!("induction diagnostics need d = 2^n >= 2, got {d}")));
    }
    let half = d / 2;
    let mut j_o = 0;
    let mut best = 0.0;
    for j in half + 1..=d {
        let v = xi[j - 1].abs().powf(1.0 / j as f64);
        if v > best {
            best = v;
            j_o = j;
        }
    }
    if j_o == 0 {
        return Err(invalid("top block of xi is zero, A is undefined"));
    }
    let a = 1.0 / best;
    let k_split = a.log2().floor() as i32;
    let mut y = xi.to_vec();
    y[half..].iter_mut().for_each(|v| *v = 0.0);

    let r = rho(xi);
    let ry = rho(&y);
    let tol = opts.tol;

    // Term I: k > k_split.
    let k_hi = upper_edge(|k| upper_tail(xi, r, k), k_split + 1, tol)?;
    let nus = par::map_indexed((k_hi - k_split) as usize, |i| nu_in_profile(xi, r, k_split + 1 + i as i32, opts));
    let mut acc = Accumulator::default();
    for v in nus {
        acc.push(v?);
    }
    let up = upper_tail(xi, r, k_hi);
    let term_i = acc.sum_sq.sqrt();
    let term_i_tail = (up * up + acc.extra_sq).sqrt();

    // Term II: k <= k_split, differences against the truncated frequency.
    let k_lo = lower_edge(|k| lower_tail(xi, r, k) + lower_tail(&y, ry, k), k_split, tol)?.min(k_split);
    let diffs = par::map_indexed((k_split - k_lo + 1) as usize, |i| {
        let k = k_lo + i as i32;
        let u = nu_in_profile(xi, r, k, opts)?;
        let v = nu_in_profile(&y, ry, k, opts)?;
        Ok::<_, Error>(match (u, v) {
            (NuValue::Computed { value: p, error: e }, NuValue::Computed { value: q, error: f }) => {
                NuValue::Computed { value: p - q, error: e + f }
            }
            _ => NuValue::Bound { bound: magnitude_bound(u) + magnitude_bound(v) },
        })
    });
    let mut acc = Accumulator::default();
    for v in diffs {
        acc.push(v?);
    }
    let lo = lower_tail(xi, r, k_lo) + lower_tail(&y, ry, k_lo);
    Ok(InductionDiagnostics {
        xi: xi.to_vec(),
        y,
        j_o,
        a,
        k_split,
        term_i,
        term_i_tail,
        term_ii: acc.sum_sq.sqrt(),
        term_ii_tail: (lo * lo + acc.extra_sq).sqrt(),
    })
}

fn magnitude_bound(v: NuValue) -> f64 {
    match v {
        NuValue::Computed { value, error } => value.norm() + error,
        NuValue::Bound { bound } => bound,
    }
}

/// One row of the growth experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub d: usize,
    /// `g` at the best point found, a lower bound for `sup g`.
    pub sup_estimate: f64,
    pub tail_bound: f64,
    pub argmax: Vec<f64>,
    pub evals: usize,
    pub seed: u64,
    /// The local refinement stopped because the budget ran out.
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Number of `g` evaluations.
    pub budget: usize,
    pub seed: u64,
    pub tol: f64,
    pub search_cap: usize,
    /// Coordinates allowed to be nonzero; all when `None`.
    pub active: Option<Vec<bool>>,
    /// Extra starting points, e.g. padded maximizers from lower dimensions.
    pub starts: Vec<Vec<f64>>,
}

impl SearchOptions {
    pub fn new(budget: usize, seed: u64, tol: f64) -> Self {
        SearchOptions { budget, seed, tol, search_cap: SEARCH_PANEL_CAP, active: None, starts: Vec::new() }
    }
}

/// Brings `xi` into `1 <= rho < 2` by a dyadic dilation, which leaves `g` unchanged.
pub fn renormalize(xi: &[f64]) -> Vec<f64> {
    let r = rho(xi);
    if r == 0.0 {
        return xi.to_vec();
    }
    dilate_dyadic(xi, -(r.log2().floor() as i32))
}

/// Larger value wins; ties go to the lexicographically smaller point.
fn better(a: (f64, &[f64]), b: (f64, &[f64])) -> bool {
    match a.0.total_cmp(&b.0) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.1.iter().zip(b.1).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()) == Some(Ordering::Less),
    }
}

fn random_annulus_point<R: Rng>(rng: &mut R, active: &[bool]) -> Vec<f64> {
    loop {
        let z: Vec<f64> = active
            .iter()
            .map(|&on| {
                if !on || rng.random_bool(0.25) {
                    0.0
                } else {
                    rng.sample::<f64, _>(StandardNormal) * 10f64.powf(rng.random_range(-1.5..1.5))
                }
            })
            .collect();
        let r = rho(&z);
        if r > 0.0 && r.is_finite() {
            return dilate_unchecked(&z, rng.random_range(1.0..2.0) / r);
        }
    }
}

/// `u_j = sgn(xi_j) |xi_j|^{1/j}`, in which every coordinate has unit scaling weight.
fn to_homogeneous(xi: &[f64]) -> Vec<f64> {
    xi.iter().enumerate().map(|(i, x)| x.signum() * x.abs().powf(1.0 / (i + 1) as f64)).collect()
}

fn from_homogeneous(u: &[f64]) -> Vec<f64> {
    u.iter().enumerate().map(|(i, x)| x.signum() * x.abs().powi(i as i32 + 1)).collect()
}

/// Heuristic maximization of `g` over the annulus: random starts in polar
/// form, then compass search in homogeneous coordinates from the best few.
pub fn sup_search_with(space: &ParabolicSpace, opts: &SearchOptions) -> Result<GrowthRow> {
    let d = space.d();
    if d > 16 {
        return Err(invalid(format!("sup_search is limited to d <= 16, got {d}")));
    }
    if opts.budget < 10 {
        return Err(invalid("sup_search needs a budget of at least 10 evaluations"));
    }
    let active = opts.active.clone().unwrap_or_else(|| vec![true; d]);
    if active.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: active.len() });
    }
    if !active.iter().any(|&a| a) {
        return Err(invalid("no active coordinates"));
    }
    for s in &opts.starts {
        if s.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: s.len() });
        }
    }
    let search = ProfileOptions { tol: opts.tol.max(1e-5), cap: opts.search_cap };
    let eval = |xi: &[f64]| g_profile_with(xi, &search).map_or(f64::NEG_INFINITY, |p| p.g_value);

    let n_random = (opts.budget / 2).max(1);
    let mut points: Vec<Vec<f64>> = opts
        .starts
        .iter()
        .filter(|s| s.iter().any(|&x| x != 0.0))
        .map(|s| renormalize(&s.iter().zip(&active).map(|(x, &on)| if on { *x } else { 0.0 }).collect::<Vec<_>>()))
        .collect();
    points.extend(par::map_indexed(n_random, |i| random_annulus_point(&mut rng::stream(opts.seed, i as u64), &active)));
    let values = par::map_indexed(points.len(), |i| eval(&points[i]));
    let mut evals = points.len();

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        if better((values[a], &points[a]), (values[b], &points[b])) {
            Ordering::Less
        } else if better((values[b], &points[b]), (values[a], &points[a])) {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    });
    let mut best_xi = points[order[0]].clone();
    let mut best_val = values[order[0]];
    let mut exhausted = false;
    let dims: Vec<usize> = (0..d).filter(|&j| active[j]).collect();

    'starts: for &start in order.iter().take(3) {
        let mut cur = points[start].clone();
        let mut cur_val = values[start];
        let mut h = 0.2;
        while h > 1e-4 {
            if evals + 2 * dims.len() > opts.budget {
                exhausted = true;
                break 'starts;
            }
            let u = to_homogeneous(&cur);
            let trials: Vec<Vec<f64>> = dims
                .iter()
                .flat_map(|&j| {
                    [h, -h].map(|s| {
                        let mut v = u.clone();
                        v[j] += s;
                        renormalize(&from_homogeneous(&v))
                    })
                })
                .filter(|p| rho(p) > 0.0)
                .collect();
            let vals = par::map_indexed(trials.len(), |i| eval(&trials[i]));
            evals += trials.len();
            let mut moved = false;
            for (p, v) in trials.iter().zip(vals) {
                if v > cur_val + 1e-12 && better((v, p), (cur_val, &cur)) {
                    cur = p.clone();
                    cur_val = v;
                    moved = true;
                }
            }
            if !moved {
                h *= 0.5;
            }
        }
        if better((cur_val, &cur), (best_val, &best_xi)) {
            best_xi = cur;
            best_val = cur_val;
        }
    }
    let final_profile = g_profile_with(&best_xi, &ProfileOptions::new(opts.tol))?;
    Ok(GrowthRow {
        d,
        sup_estimate: final_profile.g_value,
        tail_bound: final_profile.tail_bound,
        argmax: best_xi,
        evals: evals + 1,
        seed: opts.seed,
        budget_exhausted: exhausted,
    })
}

pub fn sup_search(space: &ParabolicSpace, budget: usize, seed: u64, tol: f64) -> Result<GrowthRow> {
    if budget < 1000 {
        return Err(invalid(format!("sup_search needs a budget of at least 1000, got {budget}")));
    }
    sup_search_with(space, &SearchOptions::new(budget, seed, tol))
}

/// Least-squares fit `sup ~ a log(d+1) + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    pub residuals: Vec<f64>,
}

fn log_fit(rows: &[GrowthRow]) -> Option<LogFit> {
    if rows.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = rows.iter().map(|r| ((r.d + 1) as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.sup_estimate).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (a * x + b)).collect();
    Some(LogFit { a, b, residuals })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTable {
    pub rows: Vec<GrowthRow>,
    pub fit: Option<LogFit>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    d: usize,
    sup_estimate: f64,
    tail_bound: f64,
    evals: usize,
    seed: u64,
    argmax: &'a str,
}

impl GrowthTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        for r in &self.rows {
            let argmax = serde_json::to_string(&r.argmax)?;
            out.serialize(CsvRow {
                d: r.d,
                sup_estimate: r.sup_estimate,
                tail_bound: r.tail_bound,
                evals: r.evals,
                seed: r.seed,
                argmax: &argmax,
            })?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs [`sup_search_with`] for each `d`, seeding each search with the padded
/// maximizers of the smaller dimensions, and fits the log model.
pub fn log_growth_experiment(d_list: &[usize], budget: usize, seed: u64, tol: f64) -> Result<GrowthTable> {
    let mut ds = d_list.to_vec();
    ds.sort_unstable();
    ds.dedup();
    if ds.is_empty() || ds.iter().any(|&d| !(1..=16).contains(&d)) {
        return Err(invalid("d_list must be a nonempty subset of 1..=16"));
    }
    let mut rows: Vec<GrowthRow> = Vec::with_capacity(ds.len());
    for &d in &ds {
        let space = ParabolicSpace::new(d)?;
        let mut opts = SearchOptions::new(budget, seed, tol);
        opts.starts = rows
            .iter()
            .map(|r| {
                let mut p = r.argmax.clone();
                p.resize(d, 0.0);
                p
            })
            .collect();
        rows.push(sup_search_with(&space, &opts)?);
    }
    let fit = log_fit(&rows);
    Ok(GrowthTable { rows, fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nu_closed_1d(eta: f64) -> f64 {
        let s = if eta == 0.0 { 1.0 } else { ((2.0 * PI * eta).sin() - (PI * eta).sin()) / (PI * eta) };
        s - (-eta.abs()).exp()
    }

    fn g_closed_1d(x: f64) -> f64 {
        (-60..=60).map(|k| nu_closed_1d(2f64.powi(k) * x).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn nu_examples() {
        assert_eq!(nu_hat(&[0.0, 0.0], 3, 1e-10).unwrap(), Complex64::new(0.0, 0.0));
        let v = nu_hat(&[1.0], 0, 1e-10).unwrap();
        assert!((v.re + (-1.0f64).exp()).abs() < 1e-10 && v.im.abs() < 1e-10);
        let v = nu_hat(&[0.5], 0, 1e-10).unwrap();
        assert!((v.re + 2.0 / PI + (-0.5f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn tail_constants_dominate() {
        // |sigma^(eta) - 1| <= sum_j c_j |eta_j| on random small frequencies.
        let mut r = rng::stream(90, 0);
        for d in 1..=6 {
            for _ in 0..20 {
                let eta: Vec<f64> = (0..d).map(|_| r.random_range(-0.05..0.05)).collect();
                let s = crate::curve::sigma_hat(&eta, 1e-12).unwrap().value().unwrap();
                let bound: f64 = eta.iter().enumerate().map(|(i, x)| lipschitz_constant(i + 1) * x.abs()).sum();
                assert!((s - 1.0).norm() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn profile_matches_closed_form_1d() {
        for x in [1.0, 1.37, 0.01, 250.0] {
            // Skipped scales are below tol / 4 in modulus, far below 1e-6 in g.
            let p = g_profile(&[x], 1e-4).unwrap();
            assert!((p.g_value - g_closed_1d(x)).abs() < 1e-6, "x={x}: {} vs {}", p.g_value, g_closed_1d(x));
            assert!(p.values.iter().all(|v| *v >= 0.0));
        }
        assert!(g_profile(&[0.0], 1e-6).is_err());
    }

    #[test]
    fn profile_tail_is_honest() {
        let xi = [0.4, -0.9, 0.3];
        let small = g_profile(&xi, 1e-3).unwrap();
        let big = g_profile(&xi, 1e-8).unwrap();
        assert!(small.window.len() < big.window.len());
        assert!(big.g_value >= small.g_value - 1e-9);
        assert!(big.g_value.powi(2) <= small.g_value.powi(2) + small.tail_bound.powi(2) + 1e-12);
    }

    #[test]
    fn dyadic_invariance() {
        let mut r = rng::stream(91, 0);
        for d in 1..=4 {
            let xi: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
            let a = g_profile(&xi, 1e-4).unwrap();
            let b = g_profile(&dilate_dyadic(&xi, 1), 1e-4).unwrap();
            assert!((a.g_value - b.g_value).abs() <= 2.0 * (a.tail_bound + b.tail_bound).max(1e-9));
            let c = g_profile(&renormalize(&xi), 1e-4).unwrap();
            assert!((a.g_value - c.g_value).abs() < 1e-6);
        }
    }

    #[test]
    fn base_case_envelope() {
        let mut worst = 0.0f64;
        for i in -80..=80 {
            let eta = 2f64.powf(i as f64 / 8.0);
            let v = nu_hat(&[eta], 0, 1e-10).unwrap().norm();
            assert!((v - nu_closed_1d(eta).abs()).abs() < 1e-9);
            worst = worst.max(v / eta.min(1.0 / eta));
        }
        assert!(worst < 4.0, "base-case constant {worst}");
    }

    #[test]
    fn sup_search_d1_matches_grid() {
        let grid_max = (0..20_000).map(|i| g_closed_1d(1.0 + i as f64 / 20_000.0)).fold(0.0, f64::max);
        let row = sup_search(&ParabolicSpace::new(1).unwrap(), 1000, 5, 1e-4).unwrap();
        assert!((row.sup_estimate - grid_max).abs() < 1e-3, "{} vs {grid_max}", row.sup_estimate);
        assert!(row.evals <= 1001);
    }

    #[test]
    fn slice_and_superset() {
        let d1 = sup_search_with(&ParabolicSpace::new(1).unwrap(), &SearchOptions::new(200, 8, 1e-4)).unwrap();
        let space = ParabolicSpace::new(2).unwrap();
        let mut slice = SearchOptions::new(200, 8, 1e-4);
        slice.active = Some(vec![true, false]);
        let s = sup_search_with(&space, &slice).unwrap();
        assert!((s.sup_estimate - d1.sup_estimate).abs() < 1e-3);
        assert_eq!(s.argmax[1], 0.0);
        let mut full = SearchOptions::new(200, 8, 1e-4);
        full.starts = vec![s.argmax.clone()];
        let f = sup_search_with(&space, &full).unwrap();
        assert!(f.sup_estimate >= s.sup_estimate - 1e-9);
    }

    #[test]
    fn induction_examples() {
        let opts = ProfileOptions::new(1e-6);
        let diag = induction_diagnostics(&[0.0, 1.0], &opts).unwrap();
        assert_eq!(diag.y, vec![0.0, 0.0]);
        assert_eq!(diag.j_o, 2);
        assert_eq!(diag.a, 1.0);
        let g = g_profile(&[0.0, 1.0], 1e-6).unwrap();
        let split = (diag.term_i.powi(2) + diag.term_ii.powi(2)).sqrt();
        assert!((split - g.g_value).abs() < 1e-5);
        assert!(induction_diagnostics(&[1.0, 0.0], &opts).is_err());
        assert!(induction_diagnostics(&[1.0, 1.0, 1.0], &opts).is_err());
    }

    #[test]
    fn growth_table_output() {
        let t = log_growth_experiment(&[2, 1], 40, 3, 1e-5).unwrap();
        assert_eq!(t.rows.iter().map(|r| r.d).collect::<Vec<_>>(), vec![1, 2]);
        assert!(t.rows[1].sup_estimate >= t.rows[0].sup_estimate - 1e-9);
        assert_eq!(t.fit.as_ref().unwrap().residuals.len(), 2);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("d,sup_estimate,tail_bound,evals,seed,argmax\n"));
        let back: GrowthTable = serde_json::from_str(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
        assert!(log_growth_experiment(&[17], 40, 3, 1e-5).is_err());
    }
}
