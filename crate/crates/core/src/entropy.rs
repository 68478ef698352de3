//! Covering counts and entropy-number bounds from a width bound
//! `δ_k = 2^{−κ√k}`.
//!
//! `N_i` is the first index with `δ_k ≤ e^{−i}`, i.e.
//! `N_i = ⌈(i/(κ ln 2))²⌉`. Covering the image at scale `e^{−j}` costs about
//! `H_j = N_1 + … + N_j ≈ j(j+1)(2j+1)/(6(κ ln 2)²)` bits, so with `2^n` balls
//! one reaches radius `e^{−J}` for the largest `J` with `H_J ≤ n ln 2`, and
//! `ln(1/e_n) ≍ n^{1/3}`.

use std::f64::consts::LN_2;

use crate::analysis::linear_fit;
use crate::error::{domain, Result};
use crate::table::{Cell, Table};

/// Relative slack under which `(i/(κ ln 2))²` counts as an integer.
pub const SNAP_EPS: f64 = 1e-12;

/// Default density of the sampled bound curve.
pub const DEFAULT_POINTS_PER_DECADE: usize = 20;

fn check_kappa(func: &'static str, kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(domain(func, format!("kappa = {kappa} must be positive and finite")))
    }
}

fn count(kappa: f64, i: usize) -> u64 {
    let x = (i as f64 / (kappa * LN_2)).powi(2);
    let nearest = x.round();
    if (x - nearest).abs() <= SNAP_EPS * x.max(1.0) {
        nearest as u64
    } else {
        x.ceil() as u64
    }
}

/// `N_1..N_{j_max}`.
pub fn covering_counts(kappa: f64, j_max: usize) -> Result<Vec<u64>> {
    check_kappa("covering_counts", kappa)?;
    if j_max == 0 {
        return Err(domain("covering_counts", "j_max must be at least 1"));
    }
    Ok((1..=j_max).map(|i| count(kappa, i)).collect())
}

/// `j(j+1)(2j+1)/(6(κ ln 2)²)`.
pub fn entropy_closed_form(kappa: f64, j: usize) -> f64 {
    let j = j as f64;
    j * (j + 1.0) * (2.0 * j + 1.0) / (6.0 * (kappa * LN_2).powi(2))
}

/// `(H_j, closed form)`.
pub fn entropy_sum(kappa: f64, j: usize) -> Result<(u64, f64)> {
    let counts = covering_counts(kappa, j)?;
    Ok((counts.iter().sum(), entropy_closed_form(kappa, j)))
}

/// Radius reported for the largest admissible level `J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadiusLevel {
    /// `e^{−J}`: the scale whose covering the budget pays for.
    #[default]
    Reached,
    /// `e^{−(J−1)}`: one level coarser.
    Previous,
}

/// How many balls `e_n` refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BallCount {
    /// `2^n` balls, budget `n ln 2`.
    #[default]
    TwoToN,
    /// `2^{n−1}` balls, budget `(n − 1) ln 2`.
    TwoToNMinusOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EntropyOptions {
    pub radius: RadiusLevel,
    pub balls: BallCount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCurve {
    pub kappa: f64,
    pub counts: Vec<u64>,
    pub cumulative: Vec<u64>,
    pub bound_points: Vec<(u64, f64)>,
}

/// Log-spaced integers `1 ≤ n ≤ n_max`, `per_decade` per factor of ten,
/// always including `n_max`.
pub fn log_spaced(n_max: u64, per_decade: usize) -> Vec<u64> {
    let mut out = Vec::new();
    if n_max == 0 || per_decade == 0 {
        return out;
    }
    let steps = ((n_max as f64).log10() * per_decade as f64).ceil() as usize;
    for s in 0..=steps {
        let n = 10f64.powf(s as f64 / per_decade as f64).round() as u64;
        if n <= n_max && out.last() != Some(&n) {
            out.push(n);
        }
    }
    if out.last() != Some(&n_max) {
        out.push(n_max);
    }
    out
}

/// Bound `e_n` at each `n` in `ns`, with the counts needed to cover them.
pub fn entropy_bound_curve_at(kappa: f64, ns: &[u64], opts: EntropyOptions) -> Result<EntropyCurve> {
    check_kappa("entropy_bound_curve", kappa)?;
    let budget = |n: u64| match opts.balls {
        BallCount::TwoToN => n as f64 * LN_2,
        BallCount::TwoToNMinusOne => n.saturating_sub(1) as f64 * LN_2,
    };
    let top = ns.iter().copied().map(budget).fold(0.0, f64::max);
    let mut counts = Vec::new();
    let mut cumulative = Vec::new();
    let mut h = 0u64;
    loop {
        let next = count(kappa, counts.len() + 1);
        counts.push(next);
        h += next;
        cumulative.push(h);
        if h as f64 > top {
            break;
        }
    }
    let bound_points = ns
        .iter()
        .map(|&n| {
            let b = budget(n);
            let level = cumulative.partition_point(|&hj| hj as f64 <= b);
            let radius = match (level, opts.radius) {
                (0, _) => 1.0,
                (j, RadiusLevel::Reached) => (-(j as f64)).exp(),
                (j, RadiusLevel::Previous) => (-(j as f64 - 1.0)).exp(),
            };
            (n, radius)
        })
        .collect();
    Ok(EntropyCurve {
        kappa,
        counts,
        cumulative,
        bound_points,
    })
}

/// Bound curve on [`log_spaced`] points up to `n_max`.
pub fn entropy_bound_curve(kappa: f64, n_max: u64, opts: EntropyOptions) -> Result<EntropyCurve> {
    if n_max == 0 {
        return Err(domain("entropy_bound_curve", "n_max must be at least 1"));
    }
    entropy_bound_curve_at(kappa, &log_spaced(n_max, DEFAULT_POINTS_PER_DECADE), opts)
}

/// Slope and `r²` of `ln ln(1/e_n)` against `ln n` for `n ∈ [n_lo, n_hi]`,
/// using only points with `e_n < 1`.
pub fn cube_root_slope(curve: &EntropyCurve, n_lo: u64, n_hi: u64) -> Result<(f64, f64)> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = curve
        .bound_points
        .iter()
        .filter(|&&(n, e)| n >= n_lo && n <= n_hi && e < 1.0)
        .map(|&(n, e)| ((n as f64).ln(), (-e.ln()).ln()))
        .unzip();
    let (slope, _, r2) = linear_fit(&xs, &ys)?;
    Ok((slope, r2))
}

/// Counts CSV layout: `i, N_i, H_i`.
pub fn counts_table(curve: &EntropyCurve) -> Table {
    let mut table = Table::new(["i", "N_i", "H_i"]);
    for (i, (n, h)) in curve.counts.iter().zip(&curve.cumulative).enumerate() {
        table.push(vec![Cell::from(i + 1), Cell::Int(*n as i64), Cell::Int(*h as i64)]);
    }
    table
}

/// Entropy CSV layout: `n, e_n_bound`.
pub fn entropy_table(curve: &EntropyCurve) -> Table {
    let mut table = Table::new(["n", "e_n_bound"]);
    for &(n, e) in &curve.bound_points {
        table.push(vec![Cell::Int(n as i64), e.into()]);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Smallest `k` with `2^{−κ√k} ≤ e^{−i}`, compared in the log domain.
    fn scan(kappa: f64, i: usize) -> u64 {
        let target = i as f64;
        (1u64..)
            .find(|&k| kappa * (k as f64).sqrt() * LN_2 >= target * (1.0 - 1e-13))
            .unwrap()
    }

    #[test]
    fn counts_match_scan() {
        for kappa in [0.1, 0.25, 1.0 / LN_2, 1.0, 2.0] {
            let counts = covering_counts(kappa, 20).unwrap();
            for (idx, &c) in counts.iter().enumerate() {
                assert_eq!(c, scan(kappa, idx + 1), "kappa={kappa} i={}", idx + 1);
            }
            assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn count_examples() {
        assert_eq!(covering_counts(1.0 / LN_2, 5).unwrap(), vec![1, 4, 9, 16, 25]);
        let unit = covering_counts(1.0, 3).unwrap();
        assert_eq!(unit, vec![3, 9, 19]);
        assert!(covering_counts(0.0, 3).is_err());
        assert!(covering_counts(1.0, 0).is_err());
    }

    #[test]
    fn sum_examples() {
        let (h, closed) = entropy_sum(1.0 / LN_2, 5).unwrap();
        assert_eq!(h, 55);
        assert!((closed - 55.0).abs() < 1e-9);
        let (h3, c3) = entropy_sum(1.0, 3).unwrap();
        assert_eq!(h3, 31);
        assert!((c3 - 14.0 / LN_2.powi(2)).abs() < 1e-12);
        assert!((h3 as f64 - c3).abs() <= 3.0);
    }

    proptest! {
        #[test]
        fn cumulative_gap_within_ceiling_slack(kappa in 0.05f64..5.0, j in 1usize..400) {
            let (h, closed) = entropy_sum(kappa, j).unwrap();
            let gap = h as f64 - closed;
            prop_assert!(gap >= -1e-6 * closed.max(1.0) && gap <= j as f64 + 1e-6 * closed.max(1.0));
        }
    }

    #[test]
    fn log_spacing() {
        let ns = log_spaced(1_000_000, 20);
        assert_eq!(ns[0], 1);
        assert_eq!(*ns.last().unwrap(), 1_000_000);
        assert!(ns.windows(2).all(|w| w[0] < w[1]));
        assert!(ns.contains(&1000));
        assert_eq!(log_spaced(7, 1), vec![1, 7]);
    }

    #[test]
    fn bound_curve_monotone_and_cube_root() {
        let curve = entropy_bound_curve(0.25, 1_000_000, EntropyOptions::default()).unwrap();
        assert!(curve.bound_points.windows(2).all(|w| w[1].1 <= w[0].1));
        let (slope, r2) = cube_root_slope(&curve, 1000, 1_000_000).unwrap();
        assert!((slope - 1.0 / 3.0).abs() <= 0.05, "slope {slope}");
        assert!(r2 > 0.99);
        // the budget never overspends
        for &(n, e) in &curve.bound_points {
            if e < 1.0 {
                let j = (-e.ln()).round() as usize;
                assert!(curve.cumulative[j - 1] as f64 <= n as f64 * LN_2);
                assert!(curve.cumulative[j] as f64 > n as f64 * LN_2);
            }
        }
    }

    #[test]
    fn larger_kappa_gives_smaller_bounds() {
        let ns = log_spaced(100_000, 10);
        let a = entropy_bound_curve_at(0.25, &ns, EntropyOptions::default()).unwrap();
        let b = entropy_bound_curve_at(0.5, &ns, EntropyOptions::default()).unwrap();
        for (x, y) in a.bound_points.iter().zip(&b.bound_points) {
            assert!(y.1 <= x.1);
        }
        assert!(b.bound_points.last().unwrap().1 < a.bound_points.last().unwrap().1);
    }

    #[test]
    fn conventions() {
        let ns = [1u64, 10, 100, 1000];
        let base = entropy_bound_curve_at(1.0, &ns, EntropyOptions::default()).unwrap();
        let coarse = entropy_bound_curve_at(
            1.0,
            &ns,
            EntropyOptions {
                radius: RadiusLevel::Previous,
                ..EntropyOptions::default()
            },
        )
        .unwrap();
        let shifted = entropy_bound_curve_at(
            1.0,
            &ns,
            EntropyOptions {
                balls: BallCount::TwoToNMinusOne,
                ..EntropyOptions::default()
            },
        )
        .unwrap();
        for i in 0..ns.len() {
            assert!(coarse.bound_points[i].1 >= base.bound_points[i].1);
            assert!(shifted.bound_points[i].1 >= base.bound_points[i].1);
        }
        // N_1 = 3 > ln 2, so a single ball-doubling covers nothing yet
        assert_eq!(base.bound_points[0].1, 1.0);
    }

    #[test]
    fn tables() {
        let curve = entropy_bound_curve(1.0, 100, EntropyOptions::default()).unwrap();
        let counts = counts_table(&curve).to_csv();
        assert_eq!(counts.lines().next().unwrap(), "i,N_i,H_i");
        assert_eq!(counts.lines().nth(1).unwrap(), "1,3,3");
        let e = entropy_table(&curve).to_csv();
        assert_eq!(e.lines().next().unwrap(), "n,e_n_bound");
    }
}
