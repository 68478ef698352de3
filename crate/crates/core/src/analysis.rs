//! Error measurement, decay regimes and rate fitting.
//!
//! For `f ∈ L^p` the approximation error of `φ_n` decays like `2^{−κn}`, with
//! the norm and the exponent determined by `(α, p, r)`:
//!
//! | regime        | condition             | norm  | κ per n        |
//! |---------------|-----------------------|-------|----------------|
//! | `SupCase`     | `1/p < α`             | `L^∞` | `α − 1/p`      |
//! | `Critical`    | `α = 1/p`, `r < ∞`    | `L^r` | `min(1/r, 1)`  |
//! | `SubCritical` | `1 − 1/r < α < 1/p`   | `L^r` | `1 − 1/p`      |
//!
//! Since `φ_n` spans `m = 2n² + n` dimensions, a per-`n` exponent `κ` turns
//! into `2^{−κ(√(8m+1)−1)/4}` per dimension.

use std::fmt;
use std::ops::RangeInclusive;

use log::warn;

use crate::approximant::{build_with, dimension, BuildOptions, PiecewiseApproximant, Segment};
use crate::error::{domain, Error, Result};
use crate::operator::{apply_reference, OperatorParams, TestFunction};
use crate::quadrature::{Integrator, SingularityHint};
use crate::table::{Cell, Table};

/// Tolerance of reference evaluations inside error measurements.
pub const REFERENCE_TOL: f64 = 1e-12;

/// Default number of sample points per octave for sup errors.
pub const DEFAULT_GRID: usize = 40;

/// Octaves sampled below `2^{−n}` on the leftmost interval.
pub const LEFTMOST_EXTRA_OCTAVES: i32 = 8;

/// Relative tolerance of the per-interval `∫|diff|^r` integrals.
pub const LR_REL_TOL: f64 = 1e-6;

/// `α = 1/p` is decided with this absolute slack.
pub const CRITICAL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    Linf,
    Lr(f64),
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Linf => write!(f, "Linf"),
            Norm::Lr(r) => write!(f, "L{r}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeTag {
    SupCase,
    Critical,
    SubCritical,
    Invalid,
}

impl fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegimeTag::SupCase => "SupCase",
            RegimeTag::Critical => "Critical",
            RegimeTag::SubCritical => "SubCritical",
            RegimeTag::Invalid => "Invalid",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeCase {
    pub tag: RegimeTag,
    pub alpha: f64,
    pub p: f64,
    pub r: f64,
    /// Conjugate exponent `p/(p − 1)`, infinite for `p = 1`.
    pub q: f64,
    /// Zero for `Invalid`.
    pub theoretical_kappa_per_n: f64,
    pub norm_used: Norm,
    /// Why the parameters were rejected, for `Invalid`.
    pub reason: Option<String>,
}

impl RegimeCase {
    pub fn is_valid(&self) -> bool {
        self.tag != RegimeTag::Invalid
    }

    /// The exponent against `√m`: `2^{−κn} ≈ 2^{−(κ/√2)√m}`.
    pub fn kappa_per_sqrt_dim(&self) -> f64 {
        self.theoretical_kappa_per_n / std::f64::consts::SQRT_2
    }

    fn invalid(alpha: f64, p: f64, r: f64, reason: String) -> Self {
        RegimeCase {
            tag: RegimeTag::Invalid,
            alpha,
            p,
            r,
            q: conjugate(p),
            theoretical_kappa_per_n: 0.0,
            norm_used: Norm::Linf,
            reason: Some(reason),
        }
    }
}

fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// Total: every input maps to a case, rejected ones to `Invalid`.
pub fn classify(alpha: f64, p: f64, r: f64) -> RegimeCase {
    if !(alpha > 0.0 && alpha < 1.0) {
        return RegimeCase::invalid(alpha, p, r, format!("alpha = {alpha} must lie in (0, 1)"));
    }
    if !(p >= 1.0) {
        return RegimeCase::invalid(alpha, p, r, format!("p = {p} must be at least 1"));
    }
    if !(r >= 1.0) {
        return RegimeCase::invalid(alpha, p, r, format!("r = {r} must be at least 1"));
    }
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let q = conjugate(p);
    if (alpha - inv_p).abs() <= CRITICAL_EPS {
        if r.is_infinite() {
            return RegimeCase::invalid(
                alpha,
                p,
                r,
                "alpha = 1/p: the image is not approximable in L^inf; choose a finite r".to_string(),
            );
        }
        return RegimeCase {
            tag: RegimeTag::Critical,
            alpha,
            p,
            r,
            q,
            theoretical_kappa_per_n: (1.0 / r).min(1.0),
            norm_used: Norm::Lr(r),
            reason: None,
        };
    }
    if inv_p < alpha {
        return RegimeCase {
            tag: RegimeTag::SupCase,
            alpha,
            p,
            r,
            q,
            theoretical_kappa_per_n: alpha - inv_p,
            norm_used: Norm::Linf,
            reason: None,
        };
    }
    if r.is_infinite() {
        return RegimeCase::invalid(alpha, p, r, "alpha < 1/p: a finite r is required".to_string());
    }
    let lower = 1.0 - 1.0 / r;
    if lower < alpha {
        return RegimeCase {
            tag: RegimeTag::SubCritical,
            alpha,
            p,
            r,
            q,
            theoretical_kappa_per_n: 1.0 - inv_p,
            norm_used: Norm::Lr(r),
            reason: None,
        };
    }
    RegimeCase::invalid(
        alpha,
        p,
        r,
        format!("alpha = {alpha} <= 1 - 1/r = {lower}: r(1 - alpha) >= 1 makes the error non-integrable"),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub n: usize,
    pub dim: usize,
    /// Per segment: the maximum for `L^∞`, `∫_segment |diff|^r` for `L^r`.
    pub per_interval: Vec<(Segment, f64)>,
    pub total: f64,
    pub norm_used: Norm,
    /// Smallest `u` sampled on the leftmost interval (sup errors only).
    pub sample_floor: Option<f64>,
}

impl ErrorReport {
    pub fn contribution(&self, segment: Segment) -> Option<f64> {
        self.per_interval.iter().find(|(s, _)| *s == segment).map(|&(_, e)| e)
    }
}

fn zero_report(phi: &PiecewiseApproximant, norm: Norm, floor: Option<f64>) -> ErrorReport {
    ErrorReport {
        n: phi.n,
        dim: phi.dimension(),
        per_interval: Segment::all(phi.n).map(|s| (s, 0.0)).collect(),
        total: 0.0,
        norm_used: norm,
        sample_floor: floor,
    }
}

/// Log-uniform sample points of a segment, `grid` per octave.
pub fn sample_points(n: usize, segment: Segment, grid: usize) -> Vec<f64> {
    let g = grid as f64;
    match segment {
        Segment::Leftmost => {
            let base = -(n as i32) - LEFTMOST_EXTRA_OCTAVES;
            let count = grid * LEFTMOST_EXTRA_OCTAVES as usize;
            (0..=count).map(|i| 2f64.powf(base as f64 + i as f64 / g)).collect()
        }
        Segment::Interval(k) => {
            let base = -(k as f64) - 1.0;
            (1..=grid).map(|i| 2f64.powf(base + i as f64 / g)).collect()
        }
    }
}

/// `max |K̃f(u) − φ_n(u)|` over log-uniform samples of every segment.
pub fn sup_error(
    f: &TestFunction,
    phi: &PiecewiseApproximant,
    params: OperatorParams,
    grid_per_interval: usize,
) -> Result<ErrorReport> {
    if grid_per_interval == 0 {
        return Err(domain("sup_error", "grid must contain at least one point per interval"));
    }
    let floor = 2f64.powi(-(phi.n as i32) - LEFTMOST_EXTRA_OCTAVES);
    if f.is_zero() {
        return Ok(zero_report(phi, Norm::Linf, Some(floor)));
    }
    let mut per_interval = Vec::with_capacity(phi.n + 1);
    for segment in Segment::all(phi.n) {
        let mut worst: f64 = 0.0;
        for u in sample_points(phi.n, segment, grid_per_interval) {
            let diff = apply_reference(f, u, params, REFERENCE_TOL)? - phi.evaluate(u)?;
            if diff.is_nan() {
                return Err(Error::Integrability(format!("error undefined at u = {u}")));
            }
            worst = worst.max(diff.abs());
        }
        per_interval.push((segment, worst));
    }
    let total = per_interval.iter().map(|&(_, e)| e).fold(0.0, f64::max);
    Ok(ErrorReport {
        n: phi.n,
        dim: phi.dimension(),
        per_interval,
        total,
        norm_used: Norm::Linf,
        sample_floor: Some(floor),
    })
}

/// `(Σ_segments ∫ |K̃f − φ_n|^r du)^{1/r}`.
///
/// `tol` is the target accuracy of the norm itself; each contribution gets
/// `tol^r · width` absolute and [`LR_REL_TOL`] relative.
pub fn lr_error(
    f: &TestFunction,
    phi: &PiecewiseApproximant,
    params: OperatorParams,
    r: f64,
    tol: f64,
) -> Result<ErrorReport> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(domain("lr_error", format!("r = {r} must be finite and at least 1")));
    }
    if f.is_zero() {
        return Ok(zero_report(phi, Norm::Lr(r), None));
    }
    // K̃f(u) ~ u^{ν − β} near 0 once ν < β for a power pair
    let order_at_zero = (f.endpoint_exponents().0 + 1.0 - params.beta()).min(0.0);
    let left_exponent = r * order_at_zero;
    if left_exponent <= -1.0 {
        return Err(Error::Integrability(format!(
            "|K f|^r behaves like u^{left_exponent} at 0, which is not integrable"
        )));
    }
    let mut per_interval = Vec::with_capacity(phi.n + 1);
    for segment in Segment::all(phi.n) {
        let (lo, hi) = segment.bounds(phi.n);
        let integrand = |u: f64| match (apply_reference(f, u, params, REFERENCE_TOL), phi.evaluate(u)) {
            (Ok(a), Ok(b)) => (a - b).abs().powf(r),
            _ => f64::NAN,
        };
        let hint = match segment {
            Segment::Leftmost => SingularityHint::left(left_exponent),
            Segment::Interval(_) => SingularityHint::none(),
        };
        let contribution = Integrator::new(tol.powf(r) * (hi - lo))
            .with_rel_tol(LR_REL_TOL)
            .integrate(integrand, lo, hi, hint)?
            .value;
        per_interval.push((segment, contribution));
    }
    let total = per_interval.iter().map(|&(_, c)| c).sum::<f64>().powf(1.0 / r);
    Ok(ErrorReport {
        n: phi.n,
        dim: phi.dimension(),
        per_interval,
        total,
        norm_used: Norm::Lr(r),
        sample_floor: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub grid: usize,
    /// Target accuracy of `L^r` norms.
    pub lr_tol: f64,
    pub build: BuildOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            grid: DEFAULT_GRID,
            lr_tol: 1e-10,
            build: BuildOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub dim: usize,
    pub error: f64,
    pub report: ErrorReport,
}

/// Builds `φ_n` for every `n` in the range and measures the regime's norm.
pub fn decay_sweep(
    f: &TestFunction,
    params: OperatorParams,
    regime: &RegimeCase,
    n_range: RangeInclusive<usize>,
    opts: &SweepOptions,
) -> Result<Vec<SweepRow>> {
    if !regime.is_valid() {
        return Err(Error::RegimeInvalid(
            regime.reason.clone().unwrap_or_else(|| "invalid regime".to_string()),
        ));
    }
    let mut rows: Vec<SweepRow> = Vec::new();
    for n in n_range {
        let phi = build_with(f, params, n, &opts.build)?;
        let report = match regime.norm_used {
            Norm::Linf => sup_error(f, &phi, params, opts.grid)?,
            Norm::Lr(r) => lr_error(f, &phi, params, r, opts.lr_tol)?,
        };
        if let Some(prev) = rows.last() {
            if report.total > prev.error {
                warn!(
                    "{} error increased from n = {} ({:e}) to n = {} ({:e})",
                    regime.norm_used, prev.n, prev.error, n, report.total
                );
            }
        }
        rows.push(SweepRow {
            n,
            dim: dimension(n),
            error: report.total,
            report,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub kappa_hat: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_range: (usize, usize),
}

/// Ordinary least squares `y ≈ intercept + slope·x`, returning
/// `(slope, intercept, r²)` with `r²` clamped to `[0, 1]`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return Err(Error::DegenerateFit(format!(
            "need matching samples, got {} and {}",
            n,
            ys.len()
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("no spread in the abscissae".to_string()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok((slope, intercept, r2))
}

/// Fits `log₂ error = intercept − κ̂·n`.
pub fn fit_kappa(points: &[(usize, f64)]) -> Result<DecayFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "{} points given, at least 3 required",
            points.len()
        )));
    }
    if let Some(&(n, e)) = points.iter().find(|&&(_, e)| !(e > 0.0 && e.is_finite())) {
        return Err(Error::DegenerateFit(format!(
            "error {e} at n = {n} is not positive and finite"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, e)| e.log2()).collect();
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys)?;
    let n_min = points.iter().map(|p| p.0).min().unwrap_or(0);
    let n_max = points.iter().map(|p| p.0).max().unwrap_or(0);
    Ok(DecayFit {
        kappa_hat: -slope,
        intercept,
        r_squared,
        n_range: (n_min, n_max),
    })
}

/// `2^{−κ(√(8m+1)−1)/4}` for each `m`; exactly `2^{−κn}` at `m = 2n² + n`.
pub fn width_bound_curve(kappa: f64, ms: impl IntoIterator<Item = usize>) -> Result<Vec<(usize, f64)>> {
    if !(kappa > 0.0) {
        return Err(domain("width_bound_curve", format!("kappa = {kappa} must be positive")));
    }
    Ok(ms
        .into_iter()
        .map(|m| {
            let n = ((8.0 * m as f64 + 1.0).sqrt() - 1.0) / 4.0;
            (m, 2f64.powf(-kappa * n))
        })
        .collect())
}

/// Sweep CSV layout: `n, dim, norm, error_total, err_leftmost, err_k0, …`,
/// with the fit in the footer.
pub fn sweep_table(rows: &[SweepRow], regime: &RegimeCase, fit: Option<&DecayFit>) -> Table {
    let k_max = rows.iter().map(|r| r.n).max().unwrap_or(0);
    let mut columns: Vec<String> = ["n", "dim", "norm", "error_total", "err_leftmost"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    columns.extend((0..k_max).map(|k| format!("err_k{k}")));
    let mut table = Table::new(columns);
    for row in rows {
        let mut cells = vec![
            Cell::from(row.n),
            Cell::from(row.dim),
            Cell::from(row.report.norm_used.to_string()),
            Cell::from(row.error),
        ];
        for (_, e) in &row.report.per_interval {
            cells.push(Cell::from(*e));
        }
        table.push(cells);
    }
    table.push_footer("regime", regime.tag.to_string());
    table.push_footer("theoretical_kappa_per_n", regime.theoretical_kappa_per_n);
    if let Some(fit) = fit {
        table.push_footer("kappa_hat", fit.kappa_hat);
        table.push_footer("intercept", fit.intercept);
        table.push_footer("r_squared", fit.r_squared);
        table.push_footer("n_min", fit.n_range.0);
        table.push_footer("n_max", fit.n_range.1);
    }
    table
}
