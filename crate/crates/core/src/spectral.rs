//! Nyström discretisation of `K_α` on `L²[0, 1]`.
//!
//! The kernel is singular only at the corner `x = y = 1`, so the grid is
//! built in `t = 1 − x` from Gauss–Legendre panels `[2^{−(j+1)}, 2^{−j}]`,
//! `j = 0..d−1`, plus `[0, 2^{−d}]`. Keeping `t` rather than `x` lets
//! `1 − x_i x_j = t_i + t_j − t_i t_j` be formed without cancellation.
//!
//! `A_ij = √(w_i w_j) (1 − x_i x_j)^{α−1}` is symmetric and its eigenvalue
//! magnitudes approximate the singular values of `K_α`.

use crate::analysis::linear_fit;
use crate::error::{domain, Error, Result};
use crate::quadrature::gauss_legendre;
use crate::specfun::hs_norm_squared;
use crate::table::{Cell, Table};

/// Largest grid accepted by [`nystrom_matrix`].
pub const MAX_GRID: usize = 4096;

/// Default number of dyadic panels toward the singular corner.
pub const DEFAULT_GRADING: u32 = 40;

/// Off-diagonal tolerance relative to `‖A‖_F`.
pub const EIG_TOL: f64 = 1e-12;

/// Singular values at or below this are excluded from decay fits.
pub const RELIABLE_SIGMA: f64 = 1e-12;

/// Negative eigenvalues below `−NEGATIVE_EIG_DIAG` are logged.
pub const NEGATIVE_EIG_DIAG: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Builds from a full row-major array, which must be exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(domain("SymmetricMatrix", "matrix must be square"));
            }
            data.extend_from_slice(row);
        }
        let m = SymmetricMatrix { n, data };
        for i in 0..n {
            for j in 0..i {
                if m.get(i, j) != m.get(j, i) {
                    return Err(domain(
                        "SymmetricMatrix",
                        format!("entries ({i}, {j}) and ({j}, {i}) differ"),
                    ));
                }
            }
        }
        Ok(m)
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymmetricMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// `Σ_ij A_ij² = trace(AᵀA)`.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }
}

/// Nyström nodes in `t = 1 − x`, ascending in `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedGrid {
    pub t: Vec<f64>,
    pub weights: Vec<f64>,
    /// Panels actually used (`min(grading, N − 1)` dyadic levels plus one).
    pub panels: usize,
}

impl GradedGrid {
    pub fn x(&self) -> Vec<f64> {
        self.t.iter().map(|t| 1.0 - t).collect()
    }
}

/// Exactly `n` nodes across the graded panels; the remainder of `n / panels`
/// goes to the panels farthest from the corner.
pub fn graded_grid(n: usize, grading: u32) -> Result<GradedGrid> {
    if n < 2 {
        return Err(domain("graded_grid", "at least two nodes are required"));
    }
    let depth = (grading as usize).min(n - 1);
    let mut panels: Vec<(f64, f64)> = (0..depth)
        .map(|j| (2f64.powi(-(j as i32) - 1), 2f64.powi(-(j as i32))))
        .collect();
    panels.push((0.0, 2f64.powi(-(depth as i32))));
    let count = panels.len();
    let base = n / count;
    let extra = n % count;
    let mut t = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (idx, &(a, b)) in panels.iter().enumerate() {
        let q = base + usize::from(idx < extra);
        let (nodes, w) = gauss_legendre(q);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        // descending t, so that x ascends
        for (z, wz) in nodes.iter().zip(&w).rev() {
            t.push(mid + half * z);
            weights.push(half * wz);
        }
    }
    Ok(GradedGrid {
        t,
        weights,
        panels: count,
    })
}

/// The symmetrised Nyström matrix and its grid.
pub fn nystrom_matrix(alpha: f64, n: usize, grading: u32) -> Result<(SymmetricMatrix, GradedGrid)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain("nystrom_matrix", format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if n > MAX_GRID {
        return Err(Error::Limit(format!("grid size {n} exceeds the cap {MAX_GRID}")));
    }
    let grid = graded_grid(n, grading)?;
    let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    let t = &grid.t;
    let a = SymmetricMatrix::from_fn(n, |i, j| {
        let s = t[i] + t[j] - t[i] * t[j];
        sw[i] * sw[j] * s.powf(alpha - 1.0)
    });
    Ok((a, grid))
}

fn tridiagonalize(a: &mut [Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        if l > 0 {
            let scale: f64 = a[i][..=l].iter().map(|v| v.abs()).sum();
            if scale == 0.0 {
                e[i] = a[i][l];
            } else {
                let mut h = 0.0;
                for k in 0..=l {
                    a[i][k] /= scale;
                    h += a[i][k] * a[i][k];
                }
                let f = a[i][l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i][l] = f - g;
                let mut ff = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j][k] * a[i][k];
                    }
                    for k in (j + 1)..=l {
                        g += a[k][j] * a[i][k];
                    }
                    e[j] = g / h;
                    ff += e[j] * a[i][j];
                }
                let hh = ff / (h + h);
                for j in 0..=l {
                    let f = a[i][j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j][k] -= f * e[k] + g * a[i][k];
                    }
                }
            }
        } else {
            e[i] = a[i][l];
        }
    }
    for i in 0..n {
        d[i] = a[i][i];
    }
    (d, e)
}

fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], floor: f64) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NonConvergence {
                    what: "tridiagonal QL",
                    best_estimate: d[l],
                    error_estimate: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Eigenvalues by Householder reduction to tridiagonal form and implicit QL.
///
/// Rows and columns are first permuted so that the diagonal grows in
/// magnitude toward the bottom right, where the reduction starts.
/// Off-diagonal entries below `EIG_TOL · 1e−4 · ‖A‖_F` are deflated outright.
pub fn eigenvalues(a: &SymmetricMatrix) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).abs().total_cmp(&a.get(j, j).abs()).then(i.cmp(&j)));
    let mut rows: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| order.iter().map(|&j| a.get(i, j)).collect())
        .collect();
    let (mut d, mut e) = tridiagonalize(&mut rows);
    let floor = EIG_TOL * 1e-4 * a.frobenius_sq().sqrt();
    tridiagonal_ql(&mut d, &mut e, floor)?;
    Ok(d)
}

/// Eigenvalues by cyclic Jacobi rotations.
pub fn eigenvalues_jacobi(a: &SymmetricMatrix) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut m = a.rows();
    let norm = a.frobenius_sq().sqrt();
    let target = EIG_TOL * norm;
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            return Ok((0..n).map(|i| m[i][i]).collect());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    Err(Error::NonConvergence {
        what: "cyclic Jacobi",
        best_estimate: f64::NAN,
        error_estimate: f64::NAN,
    })
}

/// Absolute eigenvalues sorted descending (ties broken by original index).
pub fn sorted_magnitudes(eigs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<(usize, f64)> = eigs.iter().map(|v| v.abs()).enumerate().collect();
    idx.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    idx.into_iter().map(|(_, v)| v).collect()
}

pub fn singular_values(a: &SymmetricMatrix) -> Result<Vec<f64>> {
    Ok(sorted_magnitudes(&eigenvalues(a)?))
}

pub fn schatten_norm(svs: &[f64], p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(domain("schatten_norm", format!("p = {p} must be positive")));
    }
    if p.is_infinite() {
        return Ok(svs.iter().copied().fold(0.0, f64::max));
    }
    Ok(svs.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// `d_n` in `L²`, the `(n+1)`-th singular value.
pub fn width_l2(svs: &[f64], n: usize) -> Result<f64> {
    svs.get(n).copied().ok_or(Error::Index {
        index: n,
        len: svs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtDecayFit {
    pub c_hat: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Number of singular values used.
    pub points: usize,
}

/// Least squares of `ln σ_m` against `√m`, `m = 1..=m_max`, over the values
/// above [`RELIABLE_SIGMA`].
pub fn sqrt_decay_fit(svs: &[f64], m_max: Option<usize>) -> Result<SqrtDecayFit> {
    let limit = m_max.unwrap_or(svs.len()).min(svs.len());
    let (xs, ys): (Vec<f64>, Vec<f64>) = svs[..limit]
        .iter()
        .enumerate()
        .take_while(|(_, &s)| s > RELIABLE_SIGMA)
        .map(|(i, &s)| (((i + 1) as f64).sqrt(), s.ln()))
        .unzip();
    if xs.len() < 10 {
        return Err(Error::DegenerateFit(format!(
            "{} singular values above {RELIABLE_SIGMA:e}, at least 10 required",
            xs.len()
        )));
    }
    let (slope, intercept, r_squared) = linear_fit(&xs, &ys)?;
    Ok(SqrtDecayFit {
        c_hat: -slope,
        intercept,
        r_squared,
        points: xs.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub alpha: f64,
    pub grid_size: usize,
    pub grading: u32,
    pub panels: usize,
    pub singular_values: Vec<f64>,
    pub hs_sum: f64,
    /// `Σ A_ij²`, computed from the matrix rather than the spectrum.
    pub trace_sq: f64,
    pub schatten: Vec<(f64, f64)>,
    pub min_eigenvalue: f64,
}

pub fn spectral_report(alpha: f64, n: usize, grading: u32, schatten_ps: &[f64]) -> Result<SpectralReport> {
    let (a, grid) = nystrom_matrix(alpha, n, grading)?;
    let eigs = eigenvalues(&a)?;
    let min_eigenvalue = eigs.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue < -NEGATIVE_EIG_DIAG {
        log::info!("discretised operator has a negative eigenvalue {min_eigenvalue:e}");
    }
    let svs = sorted_magnitudes(&eigs);
    let hs_sum = svs.iter().map(|s| s * s).sum();
    let schatten = schatten_ps
        .iter()
        .map(|&p| schatten_norm(&svs, p).map(|v| (p, v)))
        .collect::<Result<_>>()?;
    Ok(SpectralReport {
        alpha,
        grid_size: n,
        grading,
        panels: grid.panels,
        singular_values: svs,
        hs_sum,
        trace_sq: a.frobenius_sq(),
        schatten,
        min_eigenvalue,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsCheck {
    pub hs_sum: f64,
    pub closed_form: f64,
    pub relative_gap: f64,
}

/// `Σσ²` of the discretisation against the closed-form squared HS norm.
pub fn hs_check(alpha: f64, n: usize, grading: u32) -> Result<HsCheck> {
    let closed_form = hs_norm_squared(alpha)?;
    let (a, _) = nystrom_matrix(alpha, n, grading)?;
    let hs_sum = singular_values(&a)?.iter().map(|s| s * s).sum::<f64>();
    Ok(HsCheck {
        hs_sum,
        closed_form,
        relative_gap: (hs_sum - closed_form).abs() / closed_form,
    })
}

/// Spectrum CSV layout: `m, sigma_m, sqrt_m, ln_sigma_m`.
pub fn spectrum_table(report: &SpectralReport) -> Table {
    let mut table = Table::new(["m", "sigma_m", "sqrt_m", "ln_sigma_m"]);
    for (i, &s) in report.singular_values.iter().enumerate() {
        let m = i + 1;
        table.push(vec![Cell::from(m), s.into(), (m as f64).sqrt().into(), s.ln().into()]);
    }
    table
}
