use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kwidth_core::approximant::{COEFF_TOL, DEFAULT_MAX_ORDER};
use kwidth_core::operator::{OperatorParams, TestFunction};
use kwidth_core::spectral::{DEFAULT_GRADING, MAX_GRID};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "kwidth",
    version,
    about = "Approximants, error sweeps, spectra and entropy bounds for the kernel (1 - xy)^(alpha - 1)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hilbert-Schmidt norm: closed form, 2-D quadrature and Nystrom sum.
    Hsnorm(HsnormArgs),
    /// Coefficients of phi_n for beta = 0.5, f(y) = (1 - y)^(-1/3), and the
    /// log-log difference samples on every interval.
    Example(ExampleArgs),
    /// Error decay of phi_n over a range of n with the fitted rate.
    Sweep(SweepArgs),
    /// Singular values of a graded Nystrom discretisation.
    Spectrum(SpectrumArgs),
    /// Covering counts and the entropy-number bound curve.
    Entropy(EntropyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Directory receiving the data files and a metadata sidecar; without it
    /// the main table goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    /// Exponent alpha in (0, 1).
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// beta = 1 - alpha, as an alternative to --alpha.
    #[arg(long, value_parser = parse_real, conflicts_with = "alpha", allow_hyphen_values = true)]
    pub beta: Option<f64>,
}

impl OrderArgs {
    pub fn params(&self) -> Result<OperatorParams, CliError> {
        let params = match (self.alpha, self.beta) {
            (Some(a), None) => OperatorParams::new(a),
            (None, Some(b)) => OperatorParams::from_beta(b),
            _ => return Err(CliError::Config("exactly one of --alpha or --beta is required".into())),
        };
        params.map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Args)]
pub struct HsnormArgs {
    #[command(flatten)]
    pub order: OrderArgs,
    /// Absolute tolerance of the 2-D quadrature.
    #[arg(long, value_parser = parse_real, default_value = "1e-12")]
    pub tol: f64,
    /// Nystrom grid size.
    #[arg(long = "N", default_value_t = 512)]
    pub grid_size: usize,
    /// Dyadic panels toward the singular corner.
    #[arg(long, default_value_t = DEFAULT_GRADING)]
    pub grading: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    /// Order of the approximant, 2..=12.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Coefficient quadrature tolerance.
    #[arg(long, value_parser = parse_real, default_value_t = COEFF_TOL)]
    pub tol: f64,
    /// Difference samples per octave.
    #[arg(long, default_value_t = 40)]
    pub grid: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub order: OrderArgs,
    /// The input lies in L^p, p >= 1 or inf.
    #[arg(long, value_parser = parse_real)]
    pub p: f64,
    /// Error norm exponent, r >= 1 or inf.
    #[arg(long, value_parser = parse_real, default_value = "inf")]
    pub r: f64,
    /// Input in the tilde variable: const, const:c or pair:nu,mu.
    #[arg(long = "f", value_parser = parse_function, default_value = "pair:1,2/3")]
    pub function: FunctionSpec,
    #[arg(long, default_value_t = 3)]
    pub n_min: usize,
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    /// Coefficient quadrature tolerance.
    #[arg(long, value_parser = parse_real, default_value_t = COEFF_TOL)]
    pub tol: f64,
    /// Sup-norm samples per octave.
    #[arg(long, default_value_t = kwidth_core::analysis::DEFAULT_GRID)]
    pub grid: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub order: OrderArgs,
    /// Nystrom grid size.
    #[arg(long = "N", default_value_t = 512)]
    pub grid_size: usize,
    /// Dyadic panels toward the singular corner.
    #[arg(long, default_value_t = DEFAULT_GRADING)]
    pub grading: u32,
    /// Largest index used in the sqrt(m) decay fit.
    #[arg(long, default_value_t = 40)]
    pub fit_max: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RadiusArg {
    Reached,
    Previous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BallsArg {
    TwoToN,
    TwoToNMinusOne,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// Width-bound exponent in delta_k = 2^(-kappa sqrt(k)).
    #[arg(long, value_parser = parse_real, default_value = "0.25")]
    pub kappa: f64,
    /// Largest n on the bound curve.
    #[arg(long, value_parser = parse_count, default_value = "1000000")]
    pub n_max: u64,
    /// Length of the counts table; by default the levels the curve needs.
    #[arg(long)]
    pub j_max: Option<usize>,
    #[arg(long, value_enum, default_value = "reached")]
    pub radius: RadiusArg,
    #[arg(long, value_enum, default_value = "two-to-n")]
    pub balls: BallsArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Constant(f64),
    Pair { nu: f64, mu: f64 },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<TestFunction, CliError> {
        match *self {
            FunctionSpec::Constant(c) => Ok(TestFunction::constant(c)),
            FunctionSpec::Pair { nu, mu } => {
                TestFunction::power_pair(nu, mu).map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }
}

impl std::fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FunctionSpec::Constant(c) => write!(f, "const:{c}"),
            FunctionSpec::Pair { nu, mu } => write!(f, "pair:{nu},{mu}"),
        }
    }
}

/// Decimal, `inf`, or a fraction `a/b`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let value = match t.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => f64::INFINITY,
        _ => match t.split_once('/') {
            Some((a, b)) => {
                let num: f64 = a.trim().parse().map_err(|_| format!("bad numerator in '{s}'"))?;
                let den: f64 = b.trim().parse().map_err(|_| format!("bad denominator in '{s}'"))?;
                if den == 0.0 {
                    return Err(format!("zero denominator in '{s}'"));
                }
                num / den
            }
            None => t.parse().map_err(|_| format!("'{s}' is not a number"))?,
        },
    };
    if value.is_nan() {
        return Err(format!("'{s}' is not a number"));
    }
    Ok(value)
}

/// A positive integer, also accepted in exponent form such as `1e6`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.trim().parse::<u64>() {
        return Ok(n);
    }
    let x = parse_real(s)?;
    if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
        Ok(x as u64)
    } else {
        Err(format!("'{s}' is not a non-negative integer"))
    }
}

pub fn parse_function(s: &str) -> Result<FunctionSpec, String> {
    let t = s.trim();
    if t == "const" {
        return Ok(FunctionSpec::Constant(1.0));
    }
    if let Some(c) = t.strip_prefix("const:") {
        return Ok(FunctionSpec::Constant(parse_real(c)?));
    }
    if let Some(rest) = t.strip_prefix("pair:") {
        let (nu, mu) = rest
            .split_once(',')
            .ok_or_else(|| format!("'{s}': expected pair:nu,mu"))?;
        return Ok(FunctionSpec::Pair {
            nu: parse_real(nu)?,
            mu: parse_real(mu)?,
        });
    }
    Err(format!("'{s}': expected const, const:c or pair:nu,mu"))
}

pub fn check_order_range(n_min: usize, n_max: usize) -> Result<(), CliError> {
    if n_min == 0 || n_min > n_max {
        return Err(CliError::Config(format!(
            "need 1 <= n-min <= n-max, got {n_min}..{n_max}"
        )));
    }
    if n_max > DEFAULT_MAX_ORDER {
        return Err(CliError::Config(format!(
            "n-max = {n_max} exceeds the build limit {DEFAULT_MAX_ORDER}"
        )));
    }
    Ok(())
}

pub fn check_grid_size(n: usize) -> Result<(), CliError> {
    if !(2..=MAX_GRID).contains(&n) {
        return Err(CliError::Config(format!("--N = {n} must lie in 2..={MAX_GRID}")));
    }
    Ok(())
}

pub fn check_positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("--{name} = {x} must be positive and finite")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals() {
        assert_eq!(parse_real("0.25").unwrap(), 0.25);
        assert_eq!(parse_real("2/3").unwrap(), 2.0 / 3.0);
        assert_eq!(parse_real("inf").unwrap(), f64::INFINITY);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("abc").is_err());
        assert!(parse_real("nan").is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(parse_count("1000").unwrap(), 1000);
        assert_eq!(parse_count("1e6").unwrap(), 1_000_000);
        assert!(parse_count("2.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn functions() {
        assert_eq!(parse_function("const").unwrap(), FunctionSpec::Constant(1.0));
        assert_eq!(parse_function("const:2.5").unwrap(), FunctionSpec::Constant(2.5));
        assert_eq!(
            parse_function("pair:1,2/3").unwrap(),
            FunctionSpec::Pair { nu: 1.0, mu: 2.0 / 3.0 }
        );
        assert!(parse_function("pair:1").is_err());
        assert!(parse_function("sin").is_err());
        assert!(parse_function("pair:0,1").unwrap().build().is_err());
    }

    #[test]
    fn order_ranges() {
        assert!(check_order_range(3, 8).is_ok());
        assert!(check_order_range(0, 8).is_err());
        assert!(check_order_range(5, 4).is_err());
        assert!(check_order_range(2, 13).is_err());
    }
}
