//! Adaptive 1-D quadrature for integrands with algebraic endpoint
//! singularities.
//!
//! The base rule is the 15-point Gauss–Kronrod pair with QUADPACK-style error
//! rescaling, driven by global adaptive bisection. An endpoint declared
//! singular with exponent `e ∈ (−1, 0)` is removed first by the substitution
//! `v = a + (b − a) t^{1/(1+e)}` (mirrored at the right endpoint), which makes
//! the leading behaviour of the transformed integrand constant in `t`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{domain, Error, Result};

/// Default absolute tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default subdivision budget (panels per integral).
pub const DEFAULT_MAX_PANELS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    /// Absolute error estimate, never negative.
    pub error_estimate: f64,
    /// Number of integrand evaluations.
    pub evaluations: usize,
}

impl IntegralResult {
    fn zero() -> Self {
        IntegralResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        }
    }

    fn absorb(&mut self, other: IntegralResult) {
        self.value += other.value;
        self.error_estimate += other.error_estimate;
        self.evaluations += other.evaluations;
    }
}

/// Algebraic order of the integrand at each endpoint, `|f(v)| ~ |v − a|^e`.
///
/// Only negative exponents trigger a substitution; nonnegative ones are
/// accepted and ignored.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SingularityHint {
    pub left: Option<f64>,
    pub right: Option<f64>,
}

impl SingularityHint {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn left(exponent: f64) -> Self {
        SingularityHint {
            left: Some(exponent),
            right: None,
        }
    }

    pub fn right(exponent: f64) -> Self {
        SingularityHint {
            left: None,
            right: Some(exponent),
        }
    }

    pub fn both(left: f64, right: f64) -> Self {
        SingularityHint {
            left: Some(left),
            right: Some(right),
        }
    }

    fn validate(&self) -> Result<()> {
        for e in [self.left, self.right].into_iter().flatten() {
            if !(e > -1.0) {
                return Err(domain(
                    "integrate",
                    format!("singularity exponent {e} is not integrable (must exceed −1)"),
                ));
            }
        }
        Ok(())
    }

    fn active_left(&self) -> Option<f64> {
        self.left.filter(|&e| e < 0.0)
    }

    fn active_right(&self) -> Option<f64> {
        self.right.filter(|&e| e < 0.0)
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = fc.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    Panel {
        a,
        b,
        value,
        error,
        resabs,
    }
}

/// Adaptive integrator configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::new(DEFAULT_TOL)
    }
}

impl Integrator {
    /// Absolute tolerance only.
    pub fn new(abs_tol: f64) -> Self {
        Integrator {
            abs_tol,
            rel_tol: 0.0,
            max_panels: DEFAULT_MAX_PANELS,
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) && !(self.rel_tol > 0.0) {
            return Err(domain("integrate", "a positive tolerance is required"));
        }
        if self.max_panels == 0 {
            return Err(domain("integrate", "panel budget must be positive"));
        }
        Ok(())
    }

    fn adaptive<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> Result<IntegralResult> {
        let first = gk15(f, a, b);
        let mut evaluations = 15;
        let mut value = first.value;
        let mut error = first.error;
        let mut resabs = first.resabs;
        let mut heap = BinaryHeap::new();
        heap.push(first);
        loop {
            let target = self.abs_tol.max(self.rel_tol * value.abs());
            let floor = 100.0 * f64::EPSILON * resabs;
            if error <= target || error <= floor {
                break;
            }
            if heap.len() >= self.max_panels {
                return Err(Error::NonConvergence {
                    what: "adaptive quadrature",
                    best_estimate: value,
                    error_estimate: error,
                });
            }
            let worst = heap.pop().expect("heap holds at least one panel");
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                return Err(Error::NonConvergence {
                    what: "adaptive quadrature (panel below resolution)",
                    best_estimate: value,
                    error_estimate: error,
                });
            }
            let left = gk15(f, worst.a, mid);
            let right = gk15(f, mid, worst.b);
            evaluations += 30;
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            resabs += left.resabs + right.resabs - worst.resabs;
            heap.push(left);
            heap.push(right);
        }
        // Re-sum to shed the drift of the incremental updates.
        let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if !value.is_finite() {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature (non-finite integrand)",
                best_estimate: value,
                error_estimate: f64::INFINITY,
            });
        }
        Ok(IntegralResult {
            value,
            error_estimate: error,
            evaluations,
        })
    }

    fn left_substituted<F: Fn(f64, f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        end: f64,
        e: f64,
    ) -> Result<IntegralResult> {
        let p = 1.0 / (1.0 + e);
        let w = b - a;
        let g = |t: f64| {
            let tp = t.powf(p);
            if tp == 0.0 {
                return 0.0;
            }
            let mut x = a + w * tp;
            if x <= a {
                x = a.next_up();
            }
            f(x, end - x) * w * p * tp / t
        };
        self.adaptive(&g, 0.0, 1.0)
    }

    fn right_substituted<F: Fn(f64, f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        end: f64,
        e: f64,
    ) -> Result<IntegralResult> {
        let p = 1.0 / (1.0 + e);
        let w = b - a;
        let g = |t: f64| {
            let tp = t.powf(p);
            if tp == 0.0 {
                return 0.0;
            }
            let d = w * tp;
            let mut x = b - d;
            if x >= b {
                x = b.next_down();
            }
            let complement = if b == end { d } else { end - x };
            f(x, complement) * w * p * tp / t
        };
        self.adaptive(&g, 0.0, 1.0)
    }

    fn segment<F: Fn(f64, f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        end: f64,
        hint: SingularityHint,
    ) -> Result<IntegralResult> {
        self.check()?;
        hint.validate()?;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(domain(
                "integrate",
                format!("interval [{a}, {b}] must be finite with a < b"),
            ));
        }
        match (hint.active_left(), hint.active_right()) {
            (None, None) => self.adaptive(&|x: f64| f(x, end - x), a, b),
            (Some(e), None) => self.left_substituted(f, a, b, end, e),
            (None, Some(e)) => self.right_substituted(f, a, b, end, e),
            (Some(el), Some(er)) => {
                let half = Integrator {
                    abs_tol: 0.5 * self.abs_tol,
                    ..*self
                };
                let m = 0.5 * (a + b);
                let mut out = half.left_substituted(f, a, m, end, el)?;
                out.absorb(half.right_substituted(f, m, b, end, er)?);
                Ok(out)
            }
        }
    }

    /// `∫_a^b f`, with singular endpoints removed according to `hint`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, hint: SingularityHint) -> Result<IntegralResult> {
        self.segment(&|x: f64, _| f(x), a, b, b, hint)
    }

    /// As [`Integrator::integrate`], but `f` also receives `b − x`, computed
    /// without cancellation near a hinted right endpoint.
    pub fn integrate_complement<F: Fn(f64, f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        hint: SingularityHint,
    ) -> Result<IntegralResult> {
        self.segment(&f, a, b, b, hint)
    }

    /// Integrates over consecutive segments `[p₀, p₁], [p₁, p₂], …`.
    ///
    /// `hint.left` applies to the first segment only and `hint.right` to the
    /// last; the absolute tolerance is shared evenly between segments.
    pub fn integrate_breaks<F: Fn(f64) -> f64>(
        &self,
        f: F,
        points: &[f64],
        hint: SingularityHint,
    ) -> Result<IntegralResult> {
        self.integrate_breaks_complement(|x, _| f(x), points, hint)
    }

    /// As [`Integrator::integrate_breaks`], with `f` also receiving the
    /// distance to the last break point.
    pub fn integrate_breaks_complement<F: Fn(f64, f64) -> f64>(
        &self,
        f: F,
        points: &[f64],
        hint: SingularityHint,
    ) -> Result<IntegralResult> {
        if points.len() < 2 {
            return Err(domain("integrate_breaks", "at least two break points are required"));
        }
        let end = points[points.len() - 1];
        let segments = points.len() - 1;
        let part = Integrator {
            abs_tol: self.abs_tol / segments as f64,
            ..*self
        };
        let mut total = IntegralResult::zero();
        for (i, w) in points.windows(2).enumerate() {
            let seg_hint = SingularityHint {
                left: if i == 0 { hint.left } else { None },
                right: if i + 1 == segments { hint.right } else { None },
            };
            total.absorb(part.segment(&f, w[0], w[1], end, seg_hint)?);
        }
        Ok(total)
    }
}

/// `∫_a^b f` to absolute tolerance `tol` with the default panel budget.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, hint: SingularityHint, tol: f64) -> Result<IntegralResult> {
    Integrator::new(tol).integrate(f, a, b, hint)
}

/// `∫₀¹ (1 − xy)^(2α−2) dx` evaluated in closed form as a function of `y`,
/// with `c = 1 − y` supplied separately.
fn kernel_sq_inner(alpha: f64, y: f64, c: f64) -> f64 {
    if y == 0.0 {
        return 1.0;
    }
    let log_c = if y < 0.5 { (-y).ln_1p() } else { c.ln() };
    let e = 2.0 * alpha - 1.0;
    if e.abs() < crate::specfun::HS_HALF_SPLIT {
        -log_c / y
    } else {
        -(e * log_c).exp_m1() / (e * y)
    }
}

/// `∬₀¹ (1 − xy)^(2α−2) dx dy`, the squared Hilbert–Schmidt norm.
///
/// The inner `x` integral is done analytically; the outer `y` integral runs
/// over `depth + 1` dyadic panels `[0, ½], [½, ¾], …, [1 − 2^{−depth}, 1]`,
/// with the endpoint singularity at `y = 1` removed on the last one. Depths
/// beyond the `f64` resolution of `1 − 2^{−depth}` are capped.
pub fn integrate2d_kernel_sq(alpha: f64, tol: f64, depth: u32) -> Result<IntegralResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(
            "integrate2d_kernel_sq",
            format!("alpha = {alpha} must lie in (0, 1)"),
        ));
    }
    let c = 2.0 * alpha - 1.0;
    let right = if c.abs() < crate::specfun::HS_HALF_SPLIT {
        // logarithmic; any negative exponent clusters nodes adequately
        Some(-0.5)
    } else if c < 0.0 {
        Some(c)
    } else {
        None
    };
    let mut points = vec![0.0];
    for j in 1..=depth {
        let y = 1.0 - 2f64.powi(-(j as i32));
        if y == 1.0 {
            break;
        }
        points.push(y);
    }
    points.push(1.0);
    let hint = SingularityHint { left: None, right };
    Integrator::new(tol).with_rel_tol(1e-14).integrate_breaks_complement(
        |y, c| kernel_sq_inner(alpha, y, c),
        &points,
        hint,
    )
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            if n == 1 {
                p1 = x;
                p0 = 1.0;
            } else {
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
            }
            // p1 = P_n(x), p0 = P_{n−1}(x)
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            if n == 1 {
                dp = 1.0;
            }
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}
