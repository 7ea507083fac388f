//! Spatial/temporal discretization, physical constants, wave-packet and
//! potential specifications, and the wave function container.
//!
//! All value types here are immutable after construction and cheap to share
//! across threads.

use num_complex::Complex64;

use crate::error::{Result, TdseError};

/// Minimum number of grid intervals: the five-point stencil needs two
/// interior neighbors on each side of every unknown.
pub const MIN_INTERVALS: usize = 8;

/// ħ and the particle mass. Defaults to natural units ħ = m = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if hbar <= 0.0 || !hbar.is_finite() {
            return Err(TdseError::InvalidParameter {
                name: "hbar",
                value: hbar,
            });
        }
        if mass <= 0.0 || !mass.is_finite() {
            return Err(TdseError::InvalidParameter {
                name: "mass",
                value: mass,
            });
        }
        Ok(Self { hbar, mass })
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

/// Uniform spatial grid with `intervals + 1` points `x_0 ... x_J`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    intervals: usize,
    dx: f64,
}

impl SpatialGrid {
    /// Build a uniform grid over `[x_min, x_max]` with `intervals` cells.
    pub fn new(x_min: f64, x_max: f64, intervals: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() || x_max <= x_min {
            return Err(TdseError::InvalidExtent { x_min, x_max });
        }
        if intervals < MIN_INTERVALS {
            return Err(TdseError::GridTooSmall {
                intervals,
                min: MIN_INTERVALS,
            });
        }
        let dx = (x_max - x_min) / intervals as f64;
        Ok(Self {
            x_min,
            x_max,
            intervals,
            dx,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Number of cells J; points are indexed 0 ..= J.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of grid points J + 1.
    pub fn num_points(&self) -> usize {
        self.intervals + 1
    }

    /// Number of interior points (Dirichlet unknowns) J - 1.
    pub fn num_interior(&self) -> usize {
        self.intervals - 1
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Coordinate of point `j`. The last point is pinned to `x_max` so both
    /// endpoints are reconstructed exactly regardless of rounding in `dx`.
    pub fn x(&self, j: usize) -> f64 {
        debug_assert!(j <= self.intervals);
        if j == self.intervals {
            self.x_max
        } else {
            self.x_min + j as f64 * self.dx
        }
    }

    /// All grid point coordinates.
    pub fn points(&self) -> Vec<f64> {
        (0..self.num_points()).map(|j| self.x(j)).collect()
    }
}

/// Time step and step count of a propagation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub num_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, num_steps: usize) -> Result<Self> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(TdseError::InvalidParameter {
                name: "dt",
                value: dt,
            });
        }
        if num_steps == 0 {
            return Err(TdseError::InvalidParameter {
                name: "num_steps",
                value: 0.0,
            });
        }
        Ok(Self { dt, num_steps })
    }
}

/// Gaussian wave-packet parameters: center, position standard deviation,
/// and mean momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePacketSpec {
    pub center: f64,
    pub sigma: f64,
    pub momentum: f64,
}

impl WavePacketSpec {
    pub fn new(center: f64, sigma: f64, momentum: f64) -> Result<Self> {
        if sigma <= 0.0 || !sigma.is_finite() {
            return Err(TdseError::InvalidParameter {
                name: "sigma",
                value: sigma,
            });
        }
        Ok(Self {
            center,
            sigma,
            momentum,
        })
    }

    /// Distance from the packet center to the nearest domain wall, in units
    /// of sigma. Packets with less than ~5 sigma of clearance start with
    /// visible tails on the boundary.
    pub fn containment_sigmas(&self, grid: &SpatialGrid) -> f64 {
        let left = self.center - grid.x_min();
        let right = grid.x_max() - self.center;
        left.min(right) / self.sigma
    }
}

/// Static real potential evaluated on the grid.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// V = 0 everywhere.
    Free,
    /// V(x) = m omega^2 x^2 / 2.
    Harmonic { omega: f64 },
    /// One value per grid point.
    Tabulated(Vec<f64>),
}

impl PotentialSpec {
    /// Sample the potential at every grid point.
    pub fn evaluate(&self, grid: &SpatialGrid, constants: &PhysicalConstants) -> Result<Vec<f64>> {
        match self {
            PotentialSpec::Free => Ok(vec![0.0; grid.num_points()]),
            PotentialSpec::Harmonic { omega } => {
                if *omega <= 0.0 || !omega.is_finite() {
                    return Err(TdseError::InvalidParameter {
                        name: "omega",
                        value: *omega,
                    });
                }
                let k = 0.5 * constants.mass * omega * omega;
                Ok((0..grid.num_points())
                    .map(|j| {
                        let x = grid.x(j);
                        k * x * x
                    })
                    .collect())
            }
            PotentialSpec::Tabulated(values) => {
                if values.len() != grid.num_points() {
                    return Err(TdseError::LengthMismatch {
                        what: "tabulated potential",
                        expected: grid.num_points(),
                        got: values.len(),
                    });
                }
                if let Some(index) = values.iter().position(|v| !v.is_finite()) {
                    return Err(TdseError::NonFinitePotential { index });
                }
                Ok(values.clone())
            }
        }
    }
}

/// Complex amplitudes on the full grid at one time instant.
///
/// The boundary values are held at exactly zero (homogeneous Dirichlet);
/// constructors and the propagator enforce this.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    amplitudes: Vec<Complex64>,
    time: f64,
}

impl WaveFunction {
    /// Wrap raw amplitudes, forcing the boundary points to zero.
    pub fn new(mut amplitudes: Vec<Complex64>, time: f64) -> Result<Self> {
        if amplitudes.len() < MIN_INTERVALS + 1 {
            return Err(TdseError::LengthMismatch {
                what: "wave function amplitudes",
                expected: MIN_INTERVALS + 1,
                got: amplitudes.len(),
            });
        }
        let last = amplitudes.len() - 1;
        amplitudes[0] = Complex64::new(0.0, 0.0);
        amplitudes[last] = Complex64::new(0.0, 0.0);
        Ok(Self { amplitudes, time })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Interior amplitudes `psi_1 ... psi_{J-1}`.
    pub fn interior(&self) -> &[Complex64] {
        &self.amplitudes[1..self.amplitudes.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Largest |psi| within `band` points of either wall. Used to detect a
    /// packet running into the boundary.
    pub fn boundary_leak(&self, band: usize) -> f64 {
        let n = self.amplitudes.len();
        let band = band.min(n / 2);
        let mut max = 0.0f64;
        for j in 0..band {
            max = max.max(self.amplitudes[j].norm());
            max = max.max(self.amplitudes[n - 1 - j].norm());
        }
        max
    }

    pub(crate) fn replace_interior(&mut self, interior: &[Complex64], time: f64) {
        debug_assert_eq!(interior.len(), self.amplitudes.len() - 2);
        let last = self.amplitudes.len() - 1;
        self.amplitudes[1..last].copy_from_slice(interior);
        self.amplitudes[0] = Complex64::new(0.0, 0.0);
        self.amplitudes[last] = Complex64::new(0.0, 0.0);
        self.time = time;
    }
}

/// Sample a minimum-uncertainty Gaussian packet on the grid.
///
/// The envelope is `(2 pi sigma^2)^(-1/4) exp(-(x - x0)^2 / 4 sigma^2)` with
/// a plane-wave factor `exp(i p0 x / hbar)`. Boundary points are then zeroed
/// and the state renormalized so the discrete norm is exactly one, which
/// removes quadrature-dependent norm offsets from error analysis.
pub fn init_gaussian(
    grid: &SpatialGrid,
    constants: &PhysicalConstants,
    spec: &WavePacketSpec,
) -> Result<WaveFunction> {
    let envelope_norm = (2.0 * std::f64::consts::PI * spec.sigma * spec.sigma).powf(-0.25);
    let inv_four_sigma2 = 1.0 / (4.0 * spec.sigma * spec.sigma);
    let k0 = spec.momentum / constants.hbar;

    let amplitudes: Vec<Complex64> = (0..grid.num_points())
        .map(|j| {
            let x = grid.x(j);
            let d = x - spec.center;
            let envelope = envelope_norm * (-d * d * inv_four_sigma2).exp();
            Complex64::from_polar(envelope, k0 * x)
        })
        .collect();

    let mut psi = WaveFunction::new(amplitudes, 0.0)?;
    let norm_sq: f64 = psi.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dx();
    if norm_sq <= 0.0 || !norm_sq.is_finite() {
        return Err(TdseError::VanishingPacket);
    }
    let scale = 1.0 / norm_sq.sqrt();
    for a in &mut psi.amplitudes {
        *a *= scale;
    }
    Ok(psi)
}
