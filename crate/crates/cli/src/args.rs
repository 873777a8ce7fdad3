use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hk_core::hypersurface::{gen_perturbed_sphere, gen_sphere, RadialGraph, SphereGrid};
use hk_core::tolerances::Tolerance;
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "hkverify",
    version,
    about = "Numerical checks of Heintze-Karcher type inequalities for hypersurfaces of hyperbolic space"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a star-shaped surface and write it as JSON.
    Gen(GenArgs),
    /// Run integral identity and inequality checks on a surface.
    Verify(VerifyArgs),
    /// Run the inward unit normal flow and write the Q(t) trace as CSV.
    Flow(FlowArgs),
    /// Refine a generated shape and fit convergence orders of the checks.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Sphere,
    Perturbed,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ShapeArgs {
    #[arg(long, value_enum, default_value = "sphere")]
    pub shape: Shape,
    /// Geodesic radius of the (unperturbed) sphere.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Distance from the origin to the sphere centre.
    #[arg(long, default_value_t = 0.0)]
    pub offset: f64,
    /// Amplitude of the perturbation mode.
    #[arg(long, default_value_t = 0.0)]
    pub amp: f64,
    /// `l,m` on S^2 or `k` on S^1.
    #[arg(long, default_value = "2,0", value_parser = parse_mode)]
    pub mode: (usize, usize),
    /// Dimension of the hypersurface (1 or 2).
    #[arg(long, default_value_t = 2)]
    pub n: usize,
}

impl ShapeArgs {
    pub fn generate(&self, grid: SphereGrid) -> CliResult<RadialGraph> {
        Ok(match self.shape {
            Shape::Sphere => gen_sphere(self.radius, self.offset, grid)?,
            Shape::Perturbed => {
                if self.offset != 0.0 {
                    return Err(CliError::Usage(
                        "--offset only applies to --shape sphere".into(),
                    ));
                }
                gen_perturbed_sphere(self.radius, self.amp, self.mode, grid)?
            }
        })
    }

    /// `--grid` if given, else `default`, checked against `--n`.
    pub fn grid(&self, given: Option<&str>, default: (usize, usize)) -> CliResult<SphereGrid> {
        let grid = match given {
            Some(text) => parse_grid(text)?,
            None if self.n == 1 => SphereGrid::circle(default.1)?,
            None => SphereGrid::sphere(default.0, default.1)?,
        };
        if !(1..=2).contains(&self.n) {
            return Err(CliError::Usage(format!(
                "--n must be 1 or 2, got {}",
                self.n
            )));
        }
        if grid.n() != self.n {
            return Err(CliError::Usage(format!(
                "grid is for n = {} but --n is {}",
                grid.n(),
                self.n
            )));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// `PHIxTHETA` on S^2 (default 128x256) or `THETA` on S^1 (default 256).
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    /// Comma-separated check names; `alexandrov` selects the whole chain.
    /// Default: every check that applies in the surface dimension.
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
    /// Shift parameters of the shifted Minkowski identity.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Orders k (default 1..=n).
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// `auto` or a fixed relative tolerance.
    #[arg(long, default_value = "auto", value_parser = parse_tol)]
    pub tol: Tolerance,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub surface: PathBuf,
    #[command(flatten)]
    pub checks: CheckArgs,
    /// Report JSON path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FlowArgs {
    #[arg(long)]
    pub surface: PathBuf,
    /// Number of time steps up to t_safe.
    #[arg(long, default_value_t = 400)]
    pub samples: usize,
    /// Trace CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Coarsest grid; each level doubles every size (default 32x64 or 64).
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[command(flatten)]
    pub checks: CheckArgs,
    /// Order table CSV path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_grid(text: &str) -> CliResult<SphereGrid> {
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("bad grid size {s:?}")))
    };
    Ok(match text.split_once(['x', 'X']) {
        Some((a, b)) => SphereGrid::sphere(num(a)?, num(b)?)?,
        None => SphereGrid::circle(num(text)?)?,
    })
}

fn parse_mode(text: &str) -> Result<(usize, usize), String> {
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| format!("bad mode {text:?}"))
    };
    match text.split_once(',') {
        Some((l, m)) => Ok((num(l)?, num(m)?)),
        None => Ok((num(text)?, 0)),
    }
}

fn parse_tol(text: &str) -> Result<Tolerance, String> {
    if text.eq_ignore_ascii_case("auto") {
        return Ok(Tolerance::Auto);
    }
    match text.parse::<f64>() {
        Ok(t) if t.is_finite() && t >= 0.0 => Ok(Tolerance::Relative(t)),
        _ => Err(format!(
            "tolerance must be `auto` or a non-negative number, got {text:?}"
        )),
    }
}
