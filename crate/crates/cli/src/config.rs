//! Flag and config-file handling.
//!
//! Every setting can come from three places with increasing precedence:
//! built-in default, `--config` file (flat TOML keys mirroring the flags),
//! command-line flag. All module-level validations run here so a bad
//! configuration is rejected before any propagation starts.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use cn_tdse::{
    DiagnosticsPolicy, PhysicalConstants, PotentialSpec, ReferenceCase, SchemeKind, SpatialGrid,
    WavePacketSpec,
};

use crate::error::{from_config_error, CliError};

/// Flags shared by all subcommands. Everything is optional so the merge with
/// the config file can tell "not given" from "given".
#[derive(Debug, Args, Default, Clone)]
pub struct CommonArgs {
    /// Spatial discretization: tri (three-point) or penta (five-point).
    #[arg(long, value_parser = ["tri", "penta"])]
    pub scheme: Option<String>,

    /// Potential shape.
    #[arg(long, value_parser = ["free", "harmonic", "file"])]
    pub potential: Option<String>,

    /// Angular frequency of the harmonic potential.
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,

    /// Path of the tabulated potential (one value per grid point).
    #[arg(long)]
    pub potential_file: Option<PathBuf>,

    /// Left edge of the grid.
    #[arg(long, allow_negative_numbers = true)]
    pub xmin: Option<f64>,

    /// Right edge of the grid.
    #[arg(long, allow_negative_numbers = true)]
    pub xmax: Option<f64>,

    /// Number of grid intervals.
    #[arg(long = "J")]
    pub j: Option<usize>,

    /// Time step.
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,

    /// Total propagation time.
    #[arg(long, allow_negative_numbers = true)]
    pub tmax: Option<f64>,

    /// Initial packet center.
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,

    /// Initial packet width (position standard deviation).
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,

    /// Initial packet momentum.
    #[arg(long, allow_negative_numbers = true)]
    pub p0: Option<f64>,

    /// Reduced Planck constant.
    #[arg(long, allow_negative_numbers = true)]
    pub hbar: Option<f64>,

    /// Particle mass.
    #[arg(long, allow_negative_numbers = true)]
    pub mass: Option<f64>,

    /// Output file for the observable records (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Record format.
    #[arg(long, value_parser = ["csv", "jsonl"])]
    pub format: Option<String>,

    /// Sample observables every K steps.
    #[arg(long, value_name = "K")]
    pub every: Option<usize>,

    /// Verify the residual of every banded solve.
    #[arg(long, action = clap::ArgAction::SetTrue)]
    pub check_residuals: Option<bool>,

    /// Flat key = value configuration file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// The config-file image of [`CommonArgs`]. Unknown keys are rejected so a
/// typo cannot silently fall back to a default.
#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    scheme: Option<String>,
    potential: Option<String>,
    omega: Option<f64>,
    potential_file: Option<PathBuf>,
    xmin: Option<f64>,
    xmax: Option<f64>,
    #[serde(rename = "J")]
    j: Option<usize>,
    dt: Option<f64>,
    tmax: Option<f64>,
    x0: Option<f64>,
    sigma: Option<f64>,
    p0: Option<f64>,
    hbar: Option<f64>,
    mass: Option<f64>,
    out: Option<PathBuf>,
    format: Option<String>,
    every: Option<usize>,
    check_residuals: Option<bool>,
    dx: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    JsonLines,
}

/// Fully validated run configuration.
#[derive(Debug)]
pub struct RunConfig {
    pub scheme: SchemeKind,
    pub grid: SpatialGrid,
    pub constants: PhysicalConstants,
    pub packet: WavePacketSpec,
    pub potential: PotentialSpec,
    pub potential_values: Vec<f64>,
    pub reference: Option<ReferenceCase>,
    pub dt: f64,
    pub num_steps: usize,
    pub every: usize,
    pub diagnostics: DiagnosticsPolicy,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// Spacing list for convergence studies (from the config file's `dx`).
    pub dx_list: Option<Vec<f64>>,
}

fn load_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading config {}", path.display()), e))?;
    toml::from_str(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
}

fn invalid(key: &str, value: impl std::fmt::Display) -> CliError {
    CliError::usage(format!("invalid value for {key}: {value}"))
}

impl CommonArgs {
    /// Merge defaults, config file, and flags into a validated [`RunConfig`].
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => load_file_config(path)?,
            None => FileConfig::default(),
        };

        let scheme = match self
            .scheme
            .clone()
            .or(file.scheme)
            .unwrap_or_else(|| "penta".to_string())
            .as_str()
        {
            "tri" => SchemeKind::Tridiagonal,
            "penta" => SchemeKind::Pentadiagonal,
            other => return Err(invalid("scheme", other)),
        };

        let xmin = self.xmin.or(file.xmin).unwrap_or(-100.0);
        let xmax = self.xmax.or(file.xmax).unwrap_or(100.0);
        let intervals = self.j.or(file.j).unwrap_or(4000);
        let grid = SpatialGrid::new(xmin, xmax, intervals).map_err(from_config_error)?;

        let hbar = self.hbar.or(file.hbar).unwrap_or(1.0);
        let mass = self.mass.or(file.mass).unwrap_or(1.0);
        let constants = PhysicalConstants::new(hbar, mass).map_err(from_config_error)?;

        let x0 = self.x0.or(file.x0).unwrap_or(-50.0);
        let sigma = self.sigma.or(file.sigma).unwrap_or(2.0);
        let p0 = self.p0.or(file.p0).unwrap_or(1.0);
        let packet = WavePacketSpec::new(x0, sigma, p0).map_err(from_config_error)?;

        let omega = self.omega.or(file.omega);
        let potential_file = self.potential_file.clone().or(file.potential_file);
        let potential = match self
            .potential
            .clone()
            .or(file.potential)
            .unwrap_or_else(|| "free".to_string())
            .as_str()
        {
            "free" => PotentialSpec::Free,
            "harmonic" => {
                let omega = omega.ok_or_else(|| {
                    CliError::usage("inconsistent scenario: harmonic potential requires --omega")
                })?;
                if omega <= 0.0 || !omega.is_finite() {
                    return Err(invalid("omega", omega));
                }
                PotentialSpec::Harmonic { omega }
            }
            "file" => {
                let path = potential_file.as_ref().ok_or_else(|| {
                    CliError::usage(
                        "inconsistent scenario: tabulated potential requires --potential-file",
                    )
                })?;
                PotentialSpec::Tabulated(read_potential_table(path)?)
            }
            other => return Err(invalid("potential", other)),
        };
        let potential_values = potential
            .evaluate(&grid, &constants)
            .map_err(from_config_error)?;

        let omega0 = cn_tdse::reference::omega0_of(&packet, &constants);
        let reference = match &potential {
            PotentialSpec::Free => Some(ReferenceCase::free(omega0).map_err(from_config_error)?),
            PotentialSpec::Harmonic { omega } => {
                Some(ReferenceCase::harmonic(*omega, omega0).map_err(from_config_error)?)
            }
            PotentialSpec::Tabulated(_) => None,
        };

        let dt = self.dt.or(file.dt).unwrap_or(0.01);
        if dt <= 0.0 || !dt.is_finite() {
            return Err(invalid("dt", dt));
        }
        let tmax = self.tmax.or(file.tmax).unwrap_or(50.0);
        if tmax <= 0.0 || !tmax.is_finite() {
            return Err(invalid("tmax", tmax));
        }
        let num_steps = steps_for(tmax, dt)?;

        let every = self.every.or(file.every).unwrap_or(10);
        if every == 0 {
            return Err(invalid("every", every));
        }

        let diagnostics = if self
            .check_residuals
            .or(file.check_residuals)
            .unwrap_or(false)
        {
            DiagnosticsPolicy::ResidualCheck
        } else {
            DiagnosticsPolicy::None
        };

        let format = match self
            .format
            .clone()
            .or(file.format)
            .unwrap_or_else(|| "csv".to_string())
            .as_str()
        {
            "csv" => OutputFormat::Csv,
            "jsonl" => OutputFormat::JsonLines,
            other => return Err(invalid("format", other)),
        };

        Ok(RunConfig {
            scheme,
            grid,
            constants,
            packet,
            potential,
            potential_values,
            reference,
            dt,
            num_steps,
            every,
            diagnostics,
            out: self.out.clone().or(file.out),
            format,
            dx_list: file.dx,
        })
    }
}

/// Integer step count for `tmax / dt`; a non-integer ratio is rounded down
/// with a warning unless it is within rounding noise of an integer.
fn steps_for(tmax: f64, dt: f64) -> Result<usize, CliError> {
    let ratio = tmax / dt;
    let rounded = ratio.round();
    let steps = if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
        rounded as usize
    } else {
        eprintln!(
            "warning: tmax / dt = {ratio} is not an integer; running {} steps (t = {})",
            ratio.floor(),
            ratio.floor() * dt
        );
        ratio.floor() as usize
    };
    if steps == 0 {
        return Err(CliError::usage(format!(
            "invalid value for tmax: {tmax} gives zero steps at dt = {dt}"
        )));
    }
    Ok(steps)
}

/// Read a tabulated potential: whitespace-separated real values, one per
/// grid point.
fn read_potential_table(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading potential {}", path.display()), e))?;
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|_| {
                CliError::usage(format!(
                    "invalid value in potential {}: {tok}",
                    path.display()
                ))
            })
        })
        .collect()
}
