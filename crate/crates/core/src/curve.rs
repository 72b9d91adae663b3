//! Fourier transforms of the curve measures on the moment curve
//! `gamma(t) = (t, t^2, ..., t^d)`:
//!
//! * `sigma^(xi) = \int_{1/2 < |t| <= 1} e^{-2 pi i (xi_1 t + ... + xi_d t^d)} dt` (dyadic shell),
//! * `mu^(xi) = 1/2 \int_{|t| <= 1} e^{-2 pi i (...)} dt` (full average),
//!
//! plus the decay envelope `(max_j |xi_j 2^{kj}|)^{-1/d}` of `sigma^(delta_{2^k} xi)`.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::GridFunction;
use crate::oscillatory::{osc_integral_with, PhasePoly, DEFAULT_PANEL_CAP};
use crate::parabolic::dilate_dyadic;

/// Upper bound on `|sigma^(eta)| / envelope(eta)` used when quadrature is
/// out of reach. Measured over random corpora for `d <= 16` (observed
/// maximum about 0.92, see `envelope_constant_is_conservative`) with a factor
/// of two margin.
pub const ENVELOPE_CONSTANT: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveCoeffs {
    gamma: Vec<f64>,
}

impl CurveCoeffs {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() {
            return Err(invalid("curve needs at least one coefficient"));
        }
        if gamma.iter().any(|g| *g == 0.0 || !g.is_finite()) {
            return Err(invalid("curve coefficients must be finite and nonzero"));
        }
        Ok(CurveCoeffs { gamma })
    }

    pub fn identity(d: usize) -> Self {
        CurveCoeffs { gamma: vec![1.0; d] }
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// The curve point `(gamma_1 t, ..., gamma_d t^d)`.
    pub fn point(&self, t: f64, out: &mut [f64]) {
        let mut pow = 1.0;
        for (o, g) in out.iter_mut().zip(&self.gamma) {
            pow *= t;
            *o = g * pow;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicWindow {
    pub k_min: i32,
    pub k_max: i32,
}

impl DyadicWindow {
    pub fn new(k_min: i32, k_max: i32) -> Result<Self> {
        if k_min > k_max {
            return Err(invalid(format!("empty dyadic window [{k_min}, {k_max}]")));
        }
        Ok(DyadicWindow { k_min, k_max })
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> {
        self.k_min..=self.k_max
    }

    pub fn len(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Result of evaluating `sigma^` at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShellTransform {
    Computed {
        value: Complex64,
        error: f64,
    },
    /// Quadrature exceeded the panel cap; only `|sigma^| <= bound` is known.
    EnvelopeOnly {
        bound: f64,
    },
}

impl ShellTransform {
    pub fn value(&self) -> Option<Complex64> {
        match self {
            ShellTransform::Computed { value, .. } => Some(*value),
            ShellTransform::EnvelopeOnly { .. } => None,
        }
    }

    pub fn is_envelope_only(&self) -> bool {
        matches!(self, ShellTransform::EnvelopeOnly { .. })
    }

    /// A value suitable for plotting: the computed value or the bound.
    pub fn magnitude_bound(&self) -> f64 {
        match self {
            ShellTransform::Computed { value, error } => value.norm() + error,
            ShellTransform::EnvelopeOnly { bound } => *bound,
        }
    }
}

fn curve_phase(xi: &[f64]) -> Result<PhasePoly> {
    // Trailing zero coordinates do not change the phase.
    let top = xi.iter().rposition(|&x| x != 0.0).map_or(0, |i| i + 1);
    PhasePoly::without_constant(&xi[..top].iter().map(|x| -2.0 * PI * x).collect::<Vec<_>>())
}

fn envelope_only(xi: &[f64]) -> ShellTransform {
    ShellTransform::EnvelopeOnly { bound: shell_decay_bound(xi) }
}

/// First-derivative test on both half-shells: on a piece where `p'` is
/// monotone and `|p'| >= lambda`, `|\int e^{ip}| <= 3 / lambda`. `None` when
/// `p'` vanishes somewhere on the shell.
pub fn first_derivative_bound(xi: &[f64]) -> Option<f64> {
    let p = curve_phase(xi).ok()?;
    let dp = p.polynomial().derivative();
    let ddp = dp.derivative();
    let mut total = 0.0;
    for (a, b) in [(0.5, 1.0), (-1.0, -0.5)] {
        let mut cuts = vec![a];
        if ddp.degree().is_some_and(|deg| deg >= 1) {
            cuts.extend(ddp.real_roots_in(a, b).into_iter().filter(|&t| t > a && t < b));
        }
        cuts.push(b);
        for w in cuts.windows(2) {
            // Endpoints carry the minimum of a monotone |p'|; interior samples
            // guard against a root of p'' lost to rounding.
            let mut lambda = f64::INFINITY;
            let mut sign = 0.0;
            for i in 0..=8 {
                let v = dp.eval(w[0] + (w[1] - w[0]) * i as f64 / 8.0);
                if v == 0.0 || (sign != 0.0 && v.signum() != sign) {
                    return None;
                }
                sign = v.signum();
                lambda = lambda.min(v.abs());
            }
            total += 3.0 / lambda;
        }
    }
    Some(total)
}

/// Upper bound for `|sigma^(xi)|`: the smaller of 1, the measured envelope and
/// the first-derivative bound.
pub fn shell_decay_bound(xi: &[f64]) -> f64 {
    let env = effective_envelope(xi, 0).map_or(1.0, |e| ENVELOPE_CONSTANT * e);
    let fd = first_derivative_bound(xi).unwrap_or(f64::INFINITY);
    env.min(fd).min(1.0)
}

/// `sigma^(xi)` with panel cap `cap` per half-shell.
pub fn sigma_hat_with(xi: &[f64], tol: f64, cap: usize) -> Result<ShellTransform> {
    if xi.iter().all(|&x| x == 0.0) {
        return Ok(ShellTransform::Computed { value: Complex64::new(1.0, 0.0), error: 0.0 });
    }
    let p = curve_phase(xi)?;
    // Each panel advances the phase by less than pi/2, so a large phase
    // increment settles the cap question without building panels.
    let needed = (p.eval(1.0) - p.eval(0.5)).abs().max((p.eval(-1.0) - p.eval(-0.5)).abs()) / FRAC_PI_2;
    if needed > cap as f64 {
        return Ok(envelope_only(xi));
    }
    let half = (0.5 * tol).max(1e-12);
    let halves = osc_integral_with(&p, 0.5, 1.0, half, cap).and_then(|r| osc_integral_with(&p, -1.0, -0.5, half, cap).map(|l| (r, l)));
    match halves {
        Ok((r, l)) => Ok(ShellTransform::Computed { value: r.value + l.value, error: r.error + l.error }),
        Err(Error::NonConvergence { .. }) => Ok(envelope_only(xi)),
        Err(e) => Err(e),
    }
}

pub fn sigma_hat(xi: &[f64], tol: f64) -> Result<ShellTransform> {
    sigma_hat_with(xi, tol, DEFAULT_PANEL_CAP)
}

/// `sigma_{2^k}^(xi) = sigma^(delta_{2^k} xi)`.
pub fn sigma_hat_dyadic(xi: &[f64], k: i32, tol: f64) -> Result<ShellTransform> {
    sigma_hat(&dilate_dyadic(xi, k), tol)
}

pub fn sigma_hat_dyadic_with(xi: &[f64], k: i32, tol: f64, cap: usize) -> Result<ShellTransform> {
    sigma_hat_with(&dilate_dyadic(xi, k), tol, cap)
}

/// `mu^(xi) = 1/2 \int_{-1}^{1} e^{-2 pi i (xi . gamma(t))} dt`.
pub fn mu_hat(xi: &[f64], tol: f64) -> Result<Complex64> {
    if xi.iter().all(|&x| x == 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let p = curve_phase(xi)?;
    Ok(osc_integral_with(&p, -1.0, 1.0, 2.0 * tol, DEFAULT_PANEL_CAP)?.value * 0.5)
}

fn log_max_weight(xi: &[f64], k: i32) -> Result<f64> {
    let m = xi
        .iter()
        .enumerate()
        .filter(|(_, x)| **x != 0.0)
        .map(|(i, x)| x.abs().ln() + (k as f64) * (i + 1) as f64 * LN_2)
        .fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return Err(invalid("decay envelope is undefined at xi = 0"));
    }
    Ok(m)
}

fn envelope(xi: &[f64], k: i32) -> Result<f64> {
    Ok((-log_max_weight(xi, k)? / xi.len() as f64).exp())
}

/// `(max_j |xi_j 2^{kj}|)^{-1/d}`, evaluated in the log domain.
pub fn sigma_decay_envelope(xi: &[f64], k: i32) -> Result<f64> {
    envelope(xi, k)
}

/// Like [`sigma_decay_envelope`] but with root `1/J`, where `J` is the last
/// nonzero coordinate: `sigma^` only sees the degree-`J` phase.
pub fn effective_envelope(xi: &[f64], k: i32) -> Result<f64> {
    let top = xi.iter().rposition(|&x| x != 0.0).map_or(0, |i| i + 1);
    envelope(&xi[..top], k)
}

/// `f o Gamma` sampled on the lattice of `f`.
pub fn gamma_reduce(f: &GridFunction, gamma: &CurveCoeffs) -> Result<GridFunction> {
    if gamma.gamma().len() != f.d() {
        return Err(Error::DimensionMismatch { expected: f.d(), got: gamma.gamma().len() });
    }
    let g = gamma.gamma();
    let samples = (0..f.len())
        .map(|i| {
            let x: Vec<f64> = f.point(i).iter().zip(g).map(|(x, g)| x * g).collect();
            f.interpolate(&x)
        })
        .collect();
    f.with_samples(samples)
}
