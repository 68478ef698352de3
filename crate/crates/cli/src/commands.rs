use log::warn;

use kwidth_core::analysis::{
    classify, decay_sweep, fit_kappa, sample_points, sweep_table, SweepOptions, REFERENCE_TOL,
};
use kwidth_core::approximant::{build_with, BuildOptions, LeftmostSplit, Segment, DEFAULT_MAX_ORDER};
use kwidth_core::entropy::{
    counts_table, covering_counts, cube_root_slope, entropy_bound_curve, entropy_table, BallCount, EntropyCurve,
    EntropyOptions, RadiusLevel,
};
use kwidth_core::operator::{apply_reference, OperatorParams, TestFunction};
use kwidth_core::quadrature::integrate2d_kernel_sq;
use kwidth_core::specfun::hs_norm_squared;
use kwidth_core::spectral::{hs_check, spectral_report, spectrum_table, sqrt_decay_fit};
use kwidth_core::table::{Cell, Table};
use kwidth_core::Error;

use crate::args::{
    check_grid_size, check_order_range, check_positive, BallsArg, EntropyArgs, ExampleArgs, HsnormArgs, RadiusArg,
    SpectrumArgs, SweepArgs,
};
use crate::error::CliError;
use crate::output::Artifacts;

/// Dyadic panels of the 2-D quadrature oracle; deeper levels vanish in `f64`.
const HS_QUADRATURE_DEPTH: u32 = 60;

/// Fewest singular values the square-root decay fit accepts.
const MIN_FIT_POINTS: usize = 10;

/// Lower end of the cube-root slope fit.
const SLOPE_FIT_FROM: u64 = 1000;

fn real(x: f64) -> Cell {
    if x.is_finite() {
        Cell::Num(x)
    } else {
        Cell::Text(if x > 0.0 { "inf" } else { "-inf" }.to_string())
    }
}

fn echo_order(artifacts: &mut Artifacts, params: OperatorParams) {
    artifacts.config("alpha", params.alpha());
    artifacts.config("beta", params.beta());
}

pub fn hsnorm(args: &HsnormArgs) -> Result<Artifacts, CliError> {
    let params = args.order.params()?;
    check_positive("tol", args.tol)?;
    check_grid_size(args.grid_size)?;
    let alpha = params.alpha();
    let closed = hs_norm_squared(alpha)?;
    let quadrature = integrate2d_kernel_sq(alpha, args.tol, HS_QUADRATURE_DEPTH)?.value;
    let nystrom = hs_check(alpha, args.grid_size, args.grading)?;

    let mut table = Table::new([
        "alpha",
        "hs_closed_form",
        "hs_norm",
        "quadrature",
        "quadrature_rel_gap",
        "nystrom_sum",
        "nystrom_rel_gap",
        "grid_size",
        "grading",
    ]);
    let quadrature_gap = (quadrature - closed).abs() / closed;
    table.push(vec![
        alpha.into(),
        closed.into(),
        closed.sqrt().into(),
        quadrature.into(),
        quadrature_gap.into(),
        nystrom.hs_sum.into(),
        nystrom.relative_gap.into(),
        args.grid_size.into(),
        Cell::Int(i64::from(args.grading)),
    ]);

    let mut artifacts = Artifacts::new("hsnorm");
    echo_order(&mut artifacts, params);
    artifacts.config("tol", args.tol);
    artifacts.config("grid_size", args.grid_size);
    artifacts.config("grading", Cell::Int(i64::from(args.grading)));
    artifacts.summary("hs_closed_form", closed);
    artifacts.summary("hs_norm", closed.sqrt());
    artifacts.summary("quadrature_rel_gap", quadrature_gap);
    artifacts.summary("nystrom_rel_gap", nystrom.relative_gap);
    artifacts.tables.push(("hsnorm".to_string(), table));
    Ok(artifacts)
}

pub fn example(args: &ExampleArgs) -> Result<Artifacts, CliError> {
    let n = args.n;
    if n < 2 {
        return Err(CliError::Config(format!("--n = {n} must be at least 2")));
    }
    if n > DEFAULT_MAX_ORDER {
        return Err(CliError::Config(format!(
            "--n = {n} exceeds the build limit {DEFAULT_MAX_ORDER}"
        )));
    }
    check_positive("tol", args.tol)?;
    if args.grid == 0 {
        return Err(CliError::Config("--grid must be at least 1".into()));
    }
    let params = OperatorParams::from_beta(0.5)?;
    let f = TestFunction::power_pair(1.0, 2.0 / 3.0)?;
    let opts = BuildOptions {
        tol: args.tol,
        leftmost: LeftmostSplit::Extended,
        ..BuildOptions::default()
    };
    let phi = build_with(&f, params, n, &opts)?;

    let mut coefficients = Table::new(["segment", "k", "kind", "index", "value"]);
    for (j, &c) in phi.leftmost.iter().enumerate() {
        coefficients.push(vec![
            Segment::Leftmost.label().into(),
            Cell::Empty,
            "poly".into(),
            j.into(),
            c.into(),
        ]);
    }
    for piece in phi.pieces.iter().rev() {
        let label = Segment::Interval(piece.k).label();
        for (kind, values) in [("poly", &piece.poly), ("singular", &piece.singular)] {
            for (i, &c) in values.iter().enumerate() {
                coefficients.push(vec![
                    label.clone().into(),
                    piece.k.into(),
                    kind.into(),
                    i.into(),
                    c.into(),
                ]);
            }
        }
    }

    let mut difference = Table::new([
        "segment",
        "u",
        "reference",
        "phi",
        "difference",
        "log10_u",
        "log10_abs_difference",
    ]);
    let mut max_all: f64 = 0.0;
    let mut max_upper: f64 = 0.0;
    for segment in Segment::all(n) {
        for u in sample_points(n, segment, args.grid) {
            let reference = apply_reference(&f, u, params, REFERENCE_TOL)?;
            let value = phi.evaluate(u)?;
            let diff = reference - value;
            max_all = max_all.max(diff.abs());
            if u >= 0.25 {
                max_upper = max_upper.max(diff.abs());
            }
            difference.push(vec![
                segment.label().into(),
                u.into(),
                reference.into(),
                value.into(),
                diff.into(),
                u.log10().into(),
                diff.abs().log10().into(),
            ]);
        }
    }

    let mut artifacts = Artifacts::new("example");
    artifacts.config("n", n);
    artifacts.config("beta", params.beta());
    artifacts.config("f", f.label());
    artifacts.config("tol", args.tol);
    artifacts.config("grid", args.grid);
    artifacts.config("leftmost", "extended");
    artifacts.summary("dimension", phi.dimension());
    artifacts.summary("max_abs_difference", max_all);
    artifacts.summary("max_abs_difference_upper", max_upper);
    artifacts
        .tables
        .push(("example_coefficients".to_string(), coefficients));
    artifacts.tables.push(("example_difference".to_string(), difference));
    let mut json = phi.to_json();
    json.push('\n');
    artifacts.documents.push((format!("phi_{n}.json"), json));
    Ok(artifacts)
}

pub fn sweep(args: &SweepArgs) -> Result<Artifacts, CliError> {
    let params = args.order.params()?;
    if !(args.p >= 1.0) {
        return Err(CliError::Config(format!("--p = {} must be at least 1", args.p)));
    }
    if !(args.r >= 1.0) {
        return Err(CliError::Config(format!("--r = {} must be at least 1", args.r)));
    }
    check_order_range(args.n_min, args.n_max)?;
    check_positive("tol", args.tol)?;
    if args.grid == 0 {
        return Err(CliError::Config("--grid must be at least 1".into()));
    }
    let f = args.function.build()?;
    let regime = classify(params.alpha(), args.p, args.r);
    if !regime.is_valid() {
        return Err(Error::RegimeInvalid(regime.reason.clone().unwrap_or_default()).into());
    }
    let membership = f.lp_membership();
    if !membership.contains(args.p) {
        warn!("{} is not in L^{}: it lies in {membership}", f.label(), args.p);
    }
    let opts = SweepOptions {
        grid: args.grid,
        build: BuildOptions {
            tol: args.tol,
            ..BuildOptions::default()
        },
        ..SweepOptions::default()
    };
    let rows = decay_sweep(&f, params, &regime, args.n_min..=args.n_max, &opts)?;
    let points: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.error)).collect();
    let fit = if points.len() >= 3 {
        match fit_kappa(&points) {
            Ok(fit) => Some(fit),
            Err(e) => {
                warn!("no rate fit: {e}");
                None
            }
        }
    } else {
        warn!("no rate fit: {} orders given, at least 3 required", points.len());
        None
    };

    let mut artifacts = Artifacts::new("sweep");
    echo_order(&mut artifacts, params);
    artifacts.config("p", real(args.p));
    artifacts.config("r", real(args.r));
    artifacts.config("f", args.function.to_string());
    artifacts.config("n_min", args.n_min);
    artifacts.config("n_max", args.n_max);
    artifacts.config("tol", args.tol);
    artifacts.config("grid", args.grid);
    artifacts.config("leftmost", "convergent");
    artifacts.summary("regime", regime.tag.to_string());
    artifacts.summary("theoretical_kappa_per_n", regime.theoretical_kappa_per_n);
    if let Some(fit) = &fit {
        artifacts.summary("kappa_hat", fit.kappa_hat);
        artifacts.summary("r_squared", fit.r_squared);
    }
    artifacts
        .tables
        .push(("sweep".to_string(), sweep_table(&rows, &regime, fit.as_ref())));
    Ok(artifacts)
}

pub fn spectrum(args: &SpectrumArgs) -> Result<Artifacts, CliError> {
    let params = args.order.params()?;
    check_grid_size(args.grid_size)?;
    if args.fit_max < MIN_FIT_POINTS {
        return Err(CliError::Config(format!("--fit-max must be at least {MIN_FIT_POINTS}")));
    }
    let alpha = params.alpha();
    let report = spectral_report(alpha, args.grid_size, args.grading, &[1.0, 2.0])?;
    let closed = hs_norm_squared(alpha)?;
    let fit = sqrt_decay_fit(&report.singular_values, Some(args.fit_max))?;
    let mut table = spectrum_table(&report);
    let hs_gap = (report.hs_sum - closed).abs() / closed;
    table.push_footer("hs_sum", report.hs_sum);
    table.push_footer("hs_closed_form", closed);
    table.push_footer("hs_rel_gap", hs_gap);
    table.push_footer("sigma_1", report.singular_values[0]);
    table.push_footer("c_hat", fit.c_hat);
    table.push_footer("intercept", fit.intercept);
    table.push_footer("r_squared", fit.r_squared);
    table.push_footer("fit_points", fit.points);
    for &(p, value) in &report.schatten {
        table.push_footer(format!("schatten_{p}"), value);
    }
    table.push_footer("min_eigenvalue", report.min_eigenvalue);
    table.push_footer("panels", report.panels);

    let mut artifacts = Artifacts::new("spectrum");
    echo_order(&mut artifacts, params);
    artifacts.config("grid_size", args.grid_size);
    artifacts.config("grading", Cell::Int(i64::from(args.grading)));
    artifacts.config("fit_max", args.fit_max);
    artifacts.summary("hs_rel_gap", hs_gap);
    artifacts.summary("sigma_1", report.singular_values[0]);
    artifacts.summary("c_hat", fit.c_hat);
    artifacts.summary("r_squared", fit.r_squared);
    artifacts.tables.push(("spectrum".to_string(), table));
    Ok(artifacts)
}

pub fn entropy(args: &EntropyArgs) -> Result<Artifacts, CliError> {
    check_positive("kappa", args.kappa)?;
    if args.n_max == 0 {
        return Err(CliError::Config("--n-max must be at least 1".into()));
    }
    if args.j_max == Some(0) {
        return Err(CliError::Config("--j-max must be at least 1".into()));
    }
    let opts = EntropyOptions {
        radius: match args.radius {
            RadiusArg::Reached => RadiusLevel::Reached,
            RadiusArg::Previous => RadiusLevel::Previous,
        },
        balls: match args.balls {
            BallsArg::TwoToN => BallCount::TwoToN,
            BallsArg::TwoToNMinusOne => BallCount::TwoToNMinusOne,
        },
    };
    let curve = entropy_bound_curve(args.kappa, args.n_max, opts)?;
    let counts = match args.j_max {
        Some(j) => {
            let counts = covering_counts(args.kappa, j)?;
            let cumulative = counts
                .iter()
                .scan(0u64, |h, &c| {
                    *h += c;
                    Some(*h)
                })
                .collect();
            counts_table(&EntropyCurve {
                kappa: args.kappa,
                counts,
                cumulative,
                bound_points: Vec::new(),
            })
        }
        None => counts_table(&curve),
    };
    let mut bounds = entropy_table(&curve);
    let mut artifacts = Artifacts::new("entropy");
    if args.n_max >= 10 * SLOPE_FIT_FROM {
        match cube_root_slope(&curve, SLOPE_FIT_FROM, args.n_max) {
            Ok((slope, r2)) => {
                bounds.push_footer("slope", slope);
                bounds.push_footer("r_squared", r2);
                bounds.push_footer("n_lo", Cell::Int(SLOPE_FIT_FROM as i64));
                bounds.push_footer("n_hi", Cell::Int(args.n_max as i64));
                artifacts.summary("slope", slope);
            }
            Err(e) => warn!("no slope fit: {e}"),
        }
    }
    artifacts.config("kappa", args.kappa);
    artifacts.config("n_max", Cell::Int(args.n_max as i64));
    if let Some(j) = args.j_max {
        artifacts.config("j_max", j);
    }
    let radius = match args.radius {
        RadiusArg::Reached => "reached",
        RadiusArg::Previous => "previous",
    };
    let balls = match args.balls {
        BallsArg::TwoToN => "two-to-n",
        BallsArg::TwoToNMinusOne => "two-to-n-minus-one",
    };
    artifacts.config("radius", radius);
    artifacts.config("balls", balls);
    artifacts.tables.push(("entropy".to_string(), bounds));
    artifacts.tables.push(("entropy_counts".to_string(), counts));
    Ok(artifacts)
}
