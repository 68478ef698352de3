//! The kernel `(1 − xy)^(α−1)` and its transformed form.
//!
//! With `u = 1 − x`, `v = 1 − y` and `β = 1 − α` the operator becomes
//!
//! ```text
//! (K̃ f)(u) = ∫₀¹ f̃(v) (u + v − uv)^(−β) dv,      f̃(z) = f(1 − z),
//! ```
//!
//! whose only singular point is the corner `(u, v) = (0, 0)`. Test functions
//! are always described through `f̃`.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::quadrature::{Integrator, SingularityHint};
use crate::specfun::{beta_fn, gamma, hyp2f1, rgamma};

/// `|ν − β|` below this distance from an integer is treated as a Γ pole.
pub const GAMMA_POLE_EPS: f64 = 1e-8;

/// Above this `u` the power-pair closed form uses the series in `1 − u`.
pub const BRANCH_SWITCH: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorParams {
    alpha: f64,
    beta: f64,
}

impl OperatorParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(domain("OperatorParams", format!("alpha = {alpha} must lie in (0, 1)")));
        }
        Ok(OperatorParams {
            alpha,
            beta: 1.0 - alpha,
        })
    }

    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(domain("OperatorParams", format!("beta = {beta} must lie in (0, 1)")));
        }
        Ok(OperatorParams {
            alpha: 1.0 - beta,
            beta,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// A caller-supplied `f̃` with its algebraic orders at `v = 0` and `v = 1`.
#[derive(Clone)]
pub struct CustomFunction {
    label: String,
    left_exponent: f64,
    right_exponent: f64,
    eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFunction")
            .field("label", &self.label)
            .field("left_exponent", &self.left_exponent)
            .field("right_exponent", &self.right_exponent)
            .finish_non_exhaustive()
    }
}

/// Input functions, always evaluated in the tilde variable `v`.
///
/// Custom evaluators receive `(v, 1 − v)` with the second argument exact near
/// `v = 1`. They must be pure: they are called from quadrature loops in
/// unspecified order.
#[derive(Debug, Clone)]
pub enum TestFunction {
    Constant(f64),
    /// `f̃(v) = v^(ν−1) (1 − v)^(μ−1)`.
    PowerPair {
        nu: f64,
        mu: f64,
    },
    Custom(CustomFunction),
}

/// Where a test function sits in the `L^p` scale on `[0, 1]`.
///
/// `f̃ ∈ L^p` exactly for `p < sup_p` (or `p ≤ sup_p` when `sup_p` is
/// infinite).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpMembership {
    pub sup_p: f64,
}

impl LpMembership {
    pub fn contains(&self, p: f64) -> bool {
        p >= 1.0 && (self.sup_p.is_infinite() || p < self.sup_p)
    }
}

impl fmt::Display for LpMembership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sup_p.is_infinite() {
            write!(f, "L^p for every p in [1, inf]")
        } else {
            let bound = format!("{:.10}", self.sup_p);
            write!(
                f,
                "L^p for p in [1, {})",
                bound.trim_end_matches('0').trim_end_matches('.')
            )
        }
    }
}

impl TestFunction {
    pub fn constant(c: f64) -> Self {
        TestFunction::Constant(c)
    }

    pub fn zero() -> Self {
        TestFunction::Constant(0.0)
    }

    pub fn power_pair(nu: f64, mu: f64) -> Result<Self> {
        if !(nu > 0.0 && mu > 0.0 && nu.is_finite() && mu.is_finite()) {
            return Err(domain(
                "TestFunction::power_pair",
                format!("nu = {nu}, mu = {mu}: both must be positive, otherwise f is not in L^1"),
            ));
        }
        Ok(TestFunction::PowerPair { nu, mu })
    }

    /// `left_exponent` and `right_exponent` are the orders of `f̃` at
    /// `v = 0` and `v = 1`; both must exceed −1.
    pub fn custom<F>(label: impl Into<String>, left_exponent: f64, right_exponent: f64, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        if !(left_exponent > -1.0 && right_exponent > -1.0) {
            return Err(domain("TestFunction::custom", "endpoint exponents must exceed -1"));
        }
        Ok(TestFunction::Custom(CustomFunction {
            label: label.into(),
            left_exponent,
            right_exponent,
            eval: Arc::new(f),
        }))
    }

    /// `f̃(v)`.
    pub fn tilde(&self, v: f64) -> f64 {
        self.tilde_split(v, 1.0 - v)
    }

    /// `f̃(v)` with `1 − v` passed separately, so that the factor
    /// `(1 − v)^(μ−1)` keeps full precision as `v → 1`.
    pub fn tilde_split(&self, v: f64, one_minus_v: f64) -> f64 {
        match self {
            TestFunction::Constant(c) => *c,
            TestFunction::PowerPair { nu, mu } => {
                let left = if *nu == 1.0 { 1.0 } else { v.powf(nu - 1.0) };
                let right = if *mu == 1.0 { 1.0 } else { one_minus_v.powf(mu - 1.0) };
                left * right
            }
            TestFunction::Custom(c) => (c.eval)(v, one_minus_v),
        }
    }

    /// `f(y) = f̃(1 − y)`.
    pub fn original(&self, y: f64) -> f64 {
        self.tilde(1.0 - y)
    }

    /// Algebraic orders of `f̃` at `v = 0` and `v = 1`.
    pub fn endpoint_exponents(&self) -> (f64, f64) {
        match self {
            TestFunction::Constant(_) => (0.0, 0.0),
            TestFunction::PowerPair { nu, mu } => (nu - 1.0, mu - 1.0),
            TestFunction::Custom(c) => (c.left_exponent, c.right_exponent),
        }
    }

    pub fn lp_membership(&self) -> LpMembership {
        let (l, r) = self.endpoint_exponents();
        let sup_p = [l, r]
            .into_iter()
            .filter(|&e| e < 0.0)
            .map(|e| -1.0 / e)
            .fold(f64::INFINITY, f64::min);
        LpMembership { sup_p }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, TestFunction::Constant(c) if *c == 0.0)
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Constant(c) => format!("const:{c}"),
            TestFunction::PowerPair { nu, mu } => format!("pair:{nu},{mu}"),
            TestFunction::Custom(c) => c.label.clone(),
        }
    }
}

/// `(u + v − uv)^(−β)`.
pub fn kernel_tilde(u: f64, v: f64, params: OperatorParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
        return Err(domain(
            "kernel_tilde",
            format!("(u, v) = ({u}, {v}) outside the unit square"),
        ));
    }
    if u == 0.0 && v == 0.0 {
        return Err(domain("kernel_tilde", "the kernel is singular at (0, 0)"));
    }
    Ok((u + v - u * v).powf(-params.beta))
}

fn geometric_breaks(start: f64, end: f64) -> Vec<f64> {
    let mut points = vec![0.0];
    let mut p = start;
    while p < end {
        points.push(p);
        p *= 2.0;
    }
    points.push(end);
    points
}

/// `(K̃ f)(u)` by adaptive quadrature; the ground truth for error
/// measurements.
///
/// The `v` range is cut at `u, 2u, 4u, …` so that every panel sees the
/// kernel's transition near `v ≈ u` at its natural scale.
pub fn apply_reference(f: &TestFunction, u: f64, params: OperatorParams, tol: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(domain("apply_reference", format!("u = {u} outside [0, 1]")));
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    let beta = params.beta;
    let (left, right) = f.endpoint_exponents();
    if u == 0.0 {
        let e = left - beta;
        if e <= -1.0 {
            return Ok(f64::INFINITY);
        }
        let g = |v: f64, c: f64| f.tilde_split(v, c) * v.powf(-beta);
        return Ok(Integrator::new(tol)
            .integrate_complement(g, 0.0, 1.0, SingularityHint::both(e, right))?
            .value);
    }
    let g = |v: f64, c: f64| f.tilde_split(v, c) * (u + v - u * v).powf(-beta);
    let points = geometric_breaks(u, 1.0);
    let hint = SingularityHint::both(left, right);
    Ok(Integrator::new(tol)
        .integrate_breaks_complement(g, &points, hint)?
        .value)
}

/// `(K f)(x) = ∫₀¹ (1 − xy)^(α−1) f(y) dy` evaluated directly in the original
/// coordinates.
pub fn apply_original(f: &TestFunction, x: f64, params: OperatorParams, tol: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain("apply_original", format!("x = {x} outside [0, 1]")));
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    let (left, right) = f.endpoint_exponents();
    // near y = 1 the complement 1 − y is exactly the tilde argument
    let g = |y: f64, c: f64| f.tilde_split(c, y) * (1.0 - x * y).powf(params.alpha - 1.0);
    let gap = 1.0 - x;
    let mut points = vec![0.0];
    if gap > 0.0 {
        let mut d = 1.0 - gap;
        let mut w = gap;
        while d > 0.0 {
            points.push(d);
            w *= 2.0;
            d = 1.0 - w;
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
    }
    points.push(1.0);
    // f(y) = f̃(1 − y), so the orders swap ends; at x = 1 the kernel adds −β at y = 1.
    let at_one = if gap == 0.0 { left - params.beta } else { left };
    if at_one <= -1.0 {
        return Ok(f64::INFINITY);
    }
    let hint = SingularityHint::both(right, at_one);
    Ok(Integrator::new(tol)
        .integrate_breaks_complement(g, &points, hint)?
        .value)
}

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() < GAMMA_POLE_EPS
}

/// `(K̃ f_{νμ})(u)` via Gauss hypergeometric series.
///
/// For `u > ½` this is the Euler integral `B(μ, ν) ₂F₁(β, μ; μ+ν; 1 − u)`;
/// for `u ≤ ½` it is the transformed expansion in powers of `u`,
///
/// ```text
/// Γ(μ)Γ(ν−β)/Γ(μ+ν−β) · ₂F₁(β, μ; β−ν+1; u)
///   + u^(ν−β) Γ(ν)Γ(β−ν)/Γ(β) · ₂F₁(ν, μ+ν−β; ν−β+1; u),
/// ```
///
/// which degenerates when `ν − β` is an integer. At `u = 0` the value is
/// `+∞` for `ν ≤ β`.
pub fn closed_form_power_pair(u: f64, beta: f64, nu: f64, mu: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(domain(
            "closed_form_power_pair",
            format!("beta = {beta} must lie in (0, 1)"),
        ));
    }
    if !(nu > 0.0 && mu > 0.0) {
        return Err(domain("closed_form_power_pair", "nu and mu must be positive"));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(domain("closed_form_power_pair", format!("u = {u} outside [0, 1]")));
    }
    if u == 0.0 {
        if nu <= beta {
            return Ok(f64::INFINITY);
        }
        return Ok(gamma(mu) * gamma(nu - beta) * rgamma(mu + nu - beta));
    }
    if u > BRANCH_SWITCH {
        return Ok(beta_fn(mu, nu) * hyp2f1(beta, mu, mu + nu, 1.0 - u)?);
    }
    let d = nu - beta;
    if near_integer(d) {
        return Err(Error::GammaPole(format!(
            "nu - beta = {d} is (nearly) an integer; the expansion in u degenerates"
        )));
    }
    let regular = gamma(mu) * gamma(d) * rgamma(mu + d) * hyp2f1(beta, mu, 1.0 - d, u)?;
    let singular = u.powf(d) * gamma(nu) * gamma(-d) * rgamma(beta) * hyp2f1(nu, mu + d, 1.0 + d, u)?;
    Ok(regular + singular)
}

/// `∫₀¹ (1 − xy)^(α−1) dy`, the row integral in the Schur bound.
pub fn op_norm_row_integral(x: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain("op_norm_row_integral", format!("x = {x} outside [0, 1]")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(
            "op_norm_row_integral",
            format!("alpha = {alpha} must lie in (0, 1)"),
        ));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    Ok(-(alpha * (-x).ln_1p()).exp_m1() / (alpha * x))
}
