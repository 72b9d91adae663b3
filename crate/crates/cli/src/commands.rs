use std::f64::consts::PI;

use polymax::curve::{mu_hat, shell_decay_bound, sigma_decay_envelope, sigma_hat, DyadicWindow, ShellTransform};
use polymax::grid::{Axis, GridFunction};
use polymax::maxop::{cube_axes, gaussian_bump, parabolic_ball_indicator, sandwich_check, split_check, RadiiSet};
use polymax::multiplier::{
    induction_diagnostics, log_growth_experiment, sup_search_with, GrowthRow, ProfileOptions, SearchOptions, SEARCH_PANEL_CAP,
};
use polymax::oscillatory::{sublevel_measure, sublevel_measure_exact, vdc_corpus, vinogradov_corpus, PhasePoly};
use polymax::parabolic::{dilate, polar_decompose};
use polymax::rng::stream;
use polymax::stable::{empirical_cf, gram_psd_check, poisson_hat, sample_kernel_batch, semigroup_check, subordination_identity_check};
use polymax::ParabolicSpace;
use rand::Rng;

use crate::config::{seed_note, task_seed, CommandKind, ExperimentConfig};
use crate::report::{format_num, vector_cell, Cell, Report};
use crate::{acceptance, ConfigError, RunError};

/// Grid size for the Vinogradov corpora.
pub const VINOGRADOV_GRID: usize = 100_000;
/// Coefficient scale for the van der Corput corpora.
pub const VDC_SCALE: f64 = 1e3;
/// Grid size for the brute-force sublevel measure compared with the root oracle.
pub const SUBLEVEL_GRID: usize = 1_000_000;
pub const SUBLEVEL_TOL: f64 = 1e-4;
pub const GRAM_TOL: f64 = 1e-8;
pub const SUBORDINATION_TOL: f64 = 1e-6;
/// Uniform bound expected of both induction terms.
pub const DIAGNOSTIC_BOUND: f64 = 4.0;

pub fn run(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let mut report = match cfg.command {
        CommandKind::NormEval => norm_eval(cfg)?,
        CommandKind::OscCorpus => osc_corpus(cfg)?,
        CommandKind::SigmaHat => sigma_hat_eval(cfg)?,
        CommandKind::KernelVerify => kernel_verify(cfg)?,
        CommandKind::MultiplierSup => multiplier_sup(cfg)?,
        CommandKind::LogGrowth => log_growth(cfg)?,
        CommandKind::MaxopCheck => maxop_check(cfg)?,
        CommandKind::Accept => acceptance::suite_report(&acceptance::SuiteOptions { quick: cfg.quick, seed: cfg.seed }, &acceptance::ALL)?,
    };
    report.header.insert(0, ("seed".into(), cfg.seed.to_string()));
    report.header.insert(1, ("seed_derivation".into(), seed_note()));
    Ok(report)
}

fn config_error(msg: impl Into<String>) -> RunError {
    RunError::Config(ConfigError(msg.into()))
}

fn require_point(cfg: &ExperimentConfig) -> Result<Vec<f64>, RunError> {
    let p = cfg.point.clone().ok_or_else(|| config_error(format!("{} needs --point", cfg.command.name())))?;
    if let Some(d) = cfg.d {
        if d != p.len() {
            return Err(config_error(format!("--point has {} coordinates but --d is {d}", p.len())));
        }
    }
    if p.is_empty() {
        return Err(config_error("--point is empty"));
    }
    Ok(p)
}

pub fn norm_eval(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let x = require_point(cfg)?;
    let space = ParabolicSpace::new(x.len())?;
    let r = space.rho(&x);
    let mut rep = Report::new("norm-eval", vec!["d", "point", "rho", "rel_tolerance"]);
    rep.row(vec![x.len().into(), vector_cell(&x), r.into(), 1e-12.into()]);
    rep.note(format!("rho({}) = {r}", vector_cell(&x).as_text()));
    Ok(rep)
}

fn osc_columns() -> Vec<&'static str> {
    vec!["degree", "test", "count", "max_value", "mean_value", "tolerance", "argmax"]
}

/// Vinogradov and van der Corput corpora plus the sublevel oracle comparison.
pub fn osc_checks(degrees: &[usize], count: usize, oracle_count: usize, seed: u64) -> Result<Report, RunError> {
    let mut rep = Report::new("osc-corpus", osc_columns());
    let mut worst_sublevel = 0.0f64;
    for &deg in degrees {
        let v = vinogradov_corpus(deg, count, VINOGRADOV_GRID, task_seed(seed, 3 * deg as u64))?;
        let w = vdc_corpus(deg, count, VDC_SCALE, task_seed(seed, 3 * deg as u64 + 1))?;
        let argmax = |c: &[f64], i: (f64, f64)| format!("{} on [{}, {}]", vector_cell(c).as_text(), i.0, i.1);
        rep.row(vec![
            deg.into(),
            "vinogradov".into(),
            count.into(),
            v.max_ratio.into(),
            v.mean_ratio.into(),
            (4.0 / VINOGRADOV_GRID as f64).into(),
            argmax(&v.argmax_coeffs, v.argmax_interval).into(),
        ]);
        rep.row(vec![
            deg.into(),
            "vinogradov-nonconstant".into(),
            count.into(),
            v.nonconstant_max_ratio.into(),
            f64::NAN.into(),
            (4.0 / VINOGRADOV_GRID as f64).into(),
            "".into(),
        ]);
        rep.row(vec![
            deg.into(),
            "van-der-corput".into(),
            count.into(),
            w.max_ratio.into(),
            w.mean_ratio.into(),
            1e-10.into(),
            argmax(&w.argmax_coeffs, w.argmax_interval).into(),
        ]);
        for (name, m) in [("vinogradov", v.max_ratio), ("van der Corput", w.max_ratio)] {
            if !m.is_finite() {
                rep.fail(format!("{name} corpus maximum is not finite at degree {deg}"));
            }
        }
        let (max_err, mean_err) = sublevel_oracle_errors(deg, oracle_count, task_seed(seed, 3 * deg as u64 + 2))?;
        worst_sublevel = worst_sublevel.max(max_err);
        rep.row(vec![
            deg.into(),
            "sublevel-oracle".into(),
            oracle_count.into(),
            max_err.into(),
            mean_err.into(),
            SUBLEVEL_TOL.into(),
            "".into(),
        ]);
        if !(max_err <= SUBLEVEL_TOL) {
            rep.fail(format!("sublevel grid measure differs from the root oracle by {max_err:e} > {SUBLEVEL_TOL:e} at degree {deg}"));
        }
        rep.note(format!(
            "degree {deg}: Vinogradov max {:.4}, van der Corput max {:.4}, sublevel oracle error {max_err:.2e}",
            v.max_ratio, w.max_ratio
        ));
    }
    rep.meta("largest_sublevel_error", format_num(worst_sublevel));
    Ok(rep)
}

/// Largest and mean `|grid - roots|` sublevel discrepancy over random polynomials.
fn sublevel_oracle_errors(degree: usize, count: usize, seed: u64) -> Result<(f64, f64), RunError> {
    let mut max_err = 0.0f64;
    let mut sum = 0.0;
    for i in 0..count {
        let mut rng = stream(seed, i as u64);
        let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = PhasePoly::new(coeffs)?;
        let a = rng.random_range(-2.0..0.0);
        let b = rng.random_range(0.0..2.0);
        let delta = p.max_coeff() * 10f64.powf(rng.random_range(-3.0..0.0));
        let grid = sublevel_measure(&p, a, b, delta, SUBLEVEL_GRID)?.measure;
        let err = (grid - sublevel_measure_exact(&p, a, b, delta)).abs();
        max_err = max_err.max(err);
        sum += err;
    }
    Ok((max_err, sum / count.max(1) as f64))
}

pub fn osc_corpus(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let degrees = cfg.dims(&[2, 3, 4, 5, 6]);
    let count = cfg.budget.unwrap_or(if cfg.quick { 40 } else { 200 });
    let oracle = if cfg.quick { 10 } else { 50 };
    let mut rep = osc_checks(&degrees, count, oracle, cfg.seed)?;
    rep.meta("tasks", "degree d: Vinogradov 3d, van der Corput 3d+1, sublevel oracle 3d+2");
    Ok(rep)
}

pub fn sigma_hat_eval(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let xi = require_point(cfg)?;
    let tol = cfg.tol.unwrap_or(1e-10);
    let mut rep = Report::new("sigma-hat", vec!["transform", "xi", "re", "im", "error", "envelope", "envelope_only"]);
    let envelope = sigma_decay_envelope(&xi, 0)?;
    let bound = shell_decay_bound(&xi);
    match sigma_hat(&xi, tol)? {
        ShellTransform::Computed { value, error } => {
            rep.row(vec!["sigma".into(), vector_cell(&xi), value.re.into(), value.im.into(), error.into(), envelope.into(), false.into()]);
            if value.norm() > 1.0 + error {
                rep.fail(format!("|sigma^| = {} exceeds 1", value.norm()));
            }
            if value.norm() > bound + error {
                rep.fail(format!("|sigma^| = {} exceeds the decay bound {bound}", value.norm()));
            }
            rep.note(format!("sigma^ = {} {:+}i (error {error:.1e})", value.re, value.im));
        }
        ShellTransform::EnvelopeOnly { bound } => {
            rep.row(vec!["sigma".into(), vector_cell(&xi), f64::NAN.into(), f64::NAN.into(), bound.into(), envelope.into(), true.into()]);
            rep.note(format!("sigma^ beyond the panel cap, |sigma^| <= {bound}"));
        }
    }
    let m = mu_hat(&xi, tol)?;
    rep.row(vec!["mu".into(), vector_cell(&xi), m.re.into(), m.im.into(), tol.into(), f64::NAN.into(), false.into()]);
    if m.norm() > 1.0 + tol {
        rep.fail(format!("|mu^| = {} exceeds 1", m.norm()));
    }
    rep.note(format!("mu^ = {} {:+}i", m.re, m.im));
    Ok(rep)
}

pub fn kernel_columns() -> Vec<&'static str> {
    vec!["check", "d", "case", "value", "target", "error", "passed"]
}

#[derive(Debug, Clone)]
pub struct KernelPlan {
    pub cf_dims: Vec<usize>,
    pub gram_dims: Vec<usize>,
    pub samples: usize,
    pub frequencies: usize,
    pub gram_sets: usize,
}

/// A frequency with `rho = r`, pointing in a random direction.
fn frequency_with_norm<R: Rng>(rng: &mut R, d: usize, r: f64) -> Result<Vec<f64>, RunError> {
    let raw: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let dir = polar_decompose(&raw)?.direction;
    Ok(dilate(&dir, r)?)
}

pub fn kernel_checks(plan: &KernelPlan, seed: u64) -> Result<Report, RunError> {
    let mut rep = Report::new("kernel-verify", kernel_columns());
    for &d in &plan.cf_dims {
        let space = ParabolicSpace::new(d)?;
        let points = sample_kernel_batch(&space, 1.0, plan.samples, task_seed(seed, 100 + d as u64))?;
        let mut rng = stream(task_seed(seed, 200 + d as u64), 0);
        let mut worst = 0.0f64;
        let mut first = None;
        for _ in 0..plan.frequencies {
            let r = 10f64.powf(rng.random_range(-1.0..0.5));
            let xi = frequency_with_norm(&mut rng, d, r)?;
            let target = poisson_hat(&xi, 1.0)?;
            let est = empirical_cf(&points, &xi);
            let z = (est.value - target).abs() / est.std_error.max(f64::MIN_POSITIVE);
            let ok = (est.value - target).abs() <= 3.0 * est.std_error;
            worst = worst.max(z);
            rep.row(vec![
                "empirical-cf".into(),
                d.into(),
                vector_cell(&xi),
                est.value.into(),
                target.into(),
                est.std_error.into(),
                ok.into(),
            ]);
            if !ok {
                rep.fail(format!("empirical characteristic function outside 3 sigma at d = {d}, xi = {}", vector_cell(&xi).as_text()));
            }
            first.get_or_insert(xi);
        }
        rep.note(format!("d = {d}: worst characteristic-function deviation {worst:.2} sigma over {} frequencies", plan.frequencies));
        if let Some(xi) = first {
            let sg = semigroup_check(&space, 0.5, 1.5, &xi, plan.samples, task_seed(seed, 300 + d as u64))?;
            let case = vector_cell(&xi);
            rep.row(vec![
                "semigroup-fourier".into(),
                d.into(),
                case.clone(),
                sg.fourier_product.into(),
                sg.fourier_sum.into(),
                (8.0 * f64::EPSILON * sg.fourier_sum).into(),
                sg.fourier_ok.into(),
            ]);
            rep.row(vec![
                "semigroup-samples".into(),
                d.into(),
                case,
                sg.sample_cf.value.into(),
                sg.fourier_sum.into(),
                sg.sample_cf.std_error.into(),
                sg.sample_ok.into(),
            ]);
            for f in sg.failures() {
                rep.fail(format!("semigroup identity ({f}) fails at d = {d}"));
            }
        }
    }
    for &d in &plan.gram_dims {
        let mut rng = stream(task_seed(seed, 400 + d as u64), 0);
        let mut min_eig = f64::INFINITY;
        for _ in 0..plan.gram_sets {
            let pts: Vec<Vec<f64>> =
                (0..20).map(|_| (1..=d).map(|j| rng.random_range(-1.0..1.0) * 2f64.powi(j as i32 / 2)).collect()).collect();
            min_eig = min_eig.min(gram_psd_check(&pts, 1.0)?);
        }
        let ok = min_eig >= -GRAM_TOL;
        rep.row(vec![
            "gram-psd".into(),
            d.into(),
            format!("{} sets of 20 points", plan.gram_sets).into(),
            min_eig.into(),
            0.0.into(),
            GRAM_TOL.into(),
            ok.into(),
        ]);
        if !ok {
            rep.fail(format!("Gram matrix of exp(-rho) has eigenvalue {min_eig:e} < -{GRAM_TOL:e} at d = {d}"));
        }
        rep.note(format!("d = {d}: smallest Gram eigenvalue {min_eig:.3e}"));
    }
    Ok(rep)
}

pub fn subordination_checks() -> Result<Report, RunError> {
    let mut rep = Report::new("kernel-verify", kernel_columns());
    let mut worst = 0.0f64;
    for x in [0.5, 1.0, 4.0] {
        for gamma in [0.25, 0.5, 0.75] {
            let c = subordination_identity_check(x, gamma, SUBORDINATION_TOL)?;
            worst = worst.max(c.rel_error);
            rep.row(vec![
                "subordination".into(),
                1usize.into(),
                format!("x={x},gamma={gamma}").into(),
                c.rhs.into(),
                c.lhs.into(),
                SUBORDINATION_TOL.into(),
                c.passed.into(),
            ]);
            if !c.passed {
                rep.fail(format!("subordination identity off by {:e} (relative) at x = {x}, gamma = {gamma}", c.rel_error));
            }
        }
    }
    rep.note(format!("subordination: worst relative error {worst:.2e}"));
    Ok(rep)
}

pub fn kernel_verify(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let dims = cfg.dims(&[1, 2, 4]);
    let plan = KernelPlan {
        cf_dims: dims.clone(),
        gram_dims: dims,
        samples: cfg.budget.unwrap_or(if cfg.quick { 20_000 } else { 100_000 }),
        frequencies: if cfg.quick { 5 } else { 20 },
        gram_sets: if cfg.quick { 10 } else { 50 },
    };
    let mut rep = kernel_checks(&plan, cfg.seed)?;
    rep.absorb(subordination_checks()?);
    rep.meta("tasks", "kernel draws 100+d, frequencies 200+d, semigroup 300+d, Gram point sets 400+d");
    Ok(rep)
}

pub fn growth_columns() -> Vec<&'static str> {
    vec!["d", "sup_estimate", "tail_bound", "sup_over_log", "evals", "seed", "budget_exhausted", "argmax"]
}

fn growth_cells(r: &GrowthRow) -> Vec<Cell> {
    vec![
        r.d.into(),
        r.sup_estimate.into(),
        r.tail_bound.into(),
        (r.sup_estimate / ((r.d + 2) as f64).ln()).into(),
        r.evals.into(),
        r.seed.into(),
        r.budget_exhausted.into(),
        vector_cell(&r.argmax),
    ]
}

pub fn multiplier_sup(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let d = cfg.d.unwrap_or(2);
    if d > 16 {
        return Err(config_error(format!("multiplier-sup supports d <= 16, got {d}")));
    }
    let budget = cfg.budget.unwrap_or(if cfg.quick { 200 } else { 2000 });
    let opts = SearchOptions::new(budget, cfg.seed, cfg.tol.unwrap_or(1e-6));
    let row = sup_search_with(&ParabolicSpace::new(d)?, &opts)?;
    let mut rep = Report::new("multiplier-sup", growth_columns());
    rep.note(format!("d = {d}: sup g >= {} (tail {:.1e}) after {} evaluations", row.sup_estimate, row.tail_bound, row.evals));
    if !(row.sup_estimate.is_finite() && row.sup_estimate >= 0.0) {
        rep.fail("g must be finite and nonnegative");
    }
    rep.row(growth_cells(&row));
    Ok(rep)
}

/// Growth table with the padding-monotonicity and flatness checks.
pub fn growth_checks(d_list: &[usize], budget: usize, seed: u64, tol: f64) -> Result<(Report, f64), RunError> {
    if let Some(&d) = d_list.iter().find(|&&d| d > 16) {
        return Err(config_error(format!("log-growth supports d <= 16, got {d}")));
    }
    let table = log_growth_experiment(d_list, budget, seed, tol)?;
    let mut rep = Report::new("log-growth", growth_columns());
    if let Some(fit) = &table.fit {
        rep.meta("fit", format!("sup ~ {} log(d+1) + {}", fit.a, fit.b));
    }
    for r in &table.rows {
        rep.row(growth_cells(r));
    }
    for (i, hi) in table.rows.iter().enumerate() {
        for lo in &table.rows[..i] {
            if hi.sup_estimate < lo.sup_estimate - hi.tail_bound - lo.tail_bound {
                rep.fail(format!("padding monotonicity: sup({}) = {} < sup({}) = {}", hi.d, hi.sup_estimate, lo.d, lo.sup_estimate));
            }
        }
    }
    let ratios: Vec<f64> = table.rows.iter().map(|r| r.sup_estimate / ((r.d + 2) as f64).ln()).collect();
    let factor = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    rep.meta("sup_over_log_variation", format_num(factor));
    if !(factor < 3.0) {
        rep.fail(format!("sup(d)/log(d+2) varies by a factor {factor} >= 3"));
    }
    rep.note(format!(
        "sup estimates {:?}, sup/log(d+2) varies by a factor {factor:.3}",
        table.rows.iter().map(|r| (r.d, (r.sup_estimate * 1e4).round() / 1e4)).collect::<Vec<_>>()
    ));
    Ok((rep, factor))
}

pub fn log_growth(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let ds = cfg.dims(&[1, 2, 4, 8, 16]);
    let budget = cfg.budget.unwrap_or(if cfg.quick { 200 } else { 2000 });
    let (mut rep, _) = growth_checks(&ds, budget, cfg.seed, cfg.tol.unwrap_or(1e-6))?;
    rep.meta("budget", budget);
    rep.meta("tasks", "every dimension searches with the master seed; padded maximizers of smaller d are extra starts");
    Ok(rep)
}

/// Largest `term_I` and `term_II` (each plus its tail) over random frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InductionSummary {
    pub d: usize,
    pub count: usize,
    pub max_term_i: f64,
    pub max_term_ii: f64,
}

pub fn induction_corpus(d: usize, count: usize, seed: u64, tol: f64) -> Result<InductionSummary, RunError> {
    let opts = ProfileOptions { tol, cap: SEARCH_PANEL_CAP };
    let mut out = InductionSummary { d, count, max_term_i: 0.0, max_term_ii: 0.0 };
    for i in 0..count {
        let mut rng = stream(seed, i as u64);
        let xi: Vec<f64> = (1..=d)
            .map(|j| {
                let u: f64 = rng.random_range(-1.5..1.5);
                let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                s * (u * j as f64).exp()
            })
            .collect();
        let diag = induction_diagnostics(&xi, &opts)?;
        out.max_term_i = out.max_term_i.max(diag.term_i + diag.term_i_tail);
        out.max_term_ii = out.max_term_ii.max(diag.term_ii + diag.term_ii_tail);
    }
    Ok(out)
}

pub fn maxop_columns() -> Vec<&'static str> {
    vec!["d", "function", "check", "grid_points", "t_samples", "violation", "error_bound", "passed"]
}

/// A test function with its dyadic window and refinement schedule.
pub struct MaxopCase {
    pub name: &'static str,
    pub d: usize,
    pub window: DyadicWindow,
    pub radii: RadiiSet,
    pub schedule: Vec<(usize, usize)>,
    pub build: fn(Vec<Axis>) -> polymax::Result<GridFunction>,
    pub half_width: f64,
}

fn interval_indicator(axes: Vec<Axis>) -> polymax::Result<GridFunction> {
    GridFunction::from_fn(axes, |x| if x.iter().all(|v| (-1.0..=1.0).contains(v)) { 1.0 } else { 0.0 })
}

fn ball_indicator(axes: Vec<Axis>) -> polymax::Result<GridFunction> {
    let d = axes.len();
    parabolic_ball_indicator(axes, &vec![0.0; d], 1.0)
}

fn bump(axes: Vec<Axis>) -> polymax::Result<GridFunction> {
    gaussian_bump(axes, 1.0)
}

pub fn maxop_cases(dims: &[usize], quick: bool) -> Result<Vec<MaxopCase>, RunError> {
    let mut cases = Vec::new();
    for &d in dims {
        match d {
            1 => {
                let mut schedule = vec![(41, 128), (81, 256), (161, 512)];
                if !quick {
                    schedule.push((321, 1024));
                }
                cases.push(MaxopCase {
                    name: "indicator",
                    d,
                    window: DyadicWindow::new(-2, 1)?,
                    radii: RadiiSet::log_spaced(0.25, 2.0, 7)?,
                    schedule,
                    build: interval_indicator,
                    half_width: 4.0,
                });
                cases.push(MaxopCase {
                    name: "gaussian",
                    d,
                    window: DyadicWindow::new(-2, 2)?,
                    radii: RadiiSet::log_spaced(0.25, 4.0, 9)?,
                    schedule: vec![(81, 64), (161, 128)],
                    build: bump,
                    half_width: 8.0,
                });
            }
            2 => {
                let mut schedule = vec![(17, 64), (33, 128), (65, 256)];
                if !quick {
                    schedule.push((129, 512));
                }
                cases.push(MaxopCase {
                    name: "gaussian",
                    d,
                    window: DyadicWindow::new(-1, 1)?,
                    radii: RadiiSet::new(vec![0.5, 0.8, 1.3, 2.0])?,
                    schedule,
                    build: bump,
                    half_width: 4.0,
                });
                // Indicator edges converge irregularly in two dimensions, so
                // this case is checked at one resolution only.
                cases.push(MaxopCase {
                    name: "ball",
                    d,
                    window: DyadicWindow::new(-1, 1)?,
                    radii: RadiiSet::new(vec![0.5, 0.8, 1.3, 2.0])?,
                    schedule: vec![(25, 64)],
                    build: ball_indicator,
                    half_width: 4.0,
                });
            }
            _ => return Err(config_error(format!("maxop-check supports d in {{1, 2}}, got {d}"))),
        }
    }
    Ok(cases)
}

/// Sandwich at every level of each schedule (violations must halve) and the
/// split check at the coarsest level.
pub fn maxop_checks(cases: &[MaxopCase], mc_samples: usize, seed: u64) -> Result<Report, RunError> {
    let mut rep = Report::new("maxop-check", maxop_columns());
    for (ci, case) in cases.iter().enumerate() {
        let mut last: Option<f64> = None;
        for &(n, t) in &case.schedule {
            let f = (case.build)(cube_axes(case.d, case.half_width, n)?)?;
            let s = sandwich_check(&f, &case.window, &case.radii, t)?;
            rep.row(vec![
                case.d.into(),
                case.name.into(),
                "sandwich".into(),
                n.into(),
                t.into(),
                s.violation.into(),
                s.error_bound.into(),
                s.passed.into(),
            ]);
            if !s.passed {
                rep.fail(format!(
                    "sandwich violation {:e} exceeds its error bound {:e} ({} at d = {}, n = {n})",
                    s.violation, s.error_bound, case.name, case.d
                ));
            }
            if let Some(prev) = last {
                if s.violation > 0.5 * prev + 1e-12 {
                    rep.fail(format!(
                        "sandwich violation did not halve under refinement ({} at d = {}: {prev:e} -> {:e})",
                        case.name, case.d, s.violation
                    ));
                }
            }
            last = Some(s.violation);
        }
        let (n, t) = case.schedule[0];
        let f = (case.build)(cube_axes(case.d, case.half_width, n)?)?;
        let sp = split_check(&f, &case.window, t, mc_samples, task_seed(seed, 500 + ci as u64))?;
        rep.row(vec![
            case.d.into(),
            case.name.into(),
            "split".into(),
            n.into(),
            t.into(),
            sp.violation.max(0.0).into(),
            sp.error_bound.into(),
            sp.passed.into(),
        ]);
        if !sp.passed {
            rep.fail(format!(
                "split violation {:e} exceeds the Monte-Carlo error {:e} ({} at d = {})",
                sp.violation, sp.error_bound, case.name, case.d
            ));
        }
        rep.note(format!(
            "d = {} {}: sandwich violations refine to {:.2e}, split violation {:.2e}",
            case.d,
            case.name,
            last.unwrap_or(0.0),
            sp.violation.max(0.0)
        ));
    }
    Ok(rep)
}

pub fn maxop_check(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let cases = maxop_cases(&cfg.dims(&[1, 2]), cfg.quick)?;
    let mut rep = maxop_checks(&cases, cfg.budget.unwrap_or(if cfg.quick { 4000 } else { 20_000 }), cfg.seed)?;
    rep.meta("tasks", "split check for case i uses task 500+i");
    Ok(rep)
}

/// `(sin 2 pi x - sin pi x) / (pi x)`, the shell transform at `d = 1`.
pub fn sigma_closed_1d(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        ((2.0 * PI * x).sin() - (PI * x).sin()) / (PI * x)
    }
}
