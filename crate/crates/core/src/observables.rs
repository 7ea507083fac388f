//! Moments, uncertainty product, and energies of a wave function.
//!
//! Position moments integrate `|psi|^2 x^n` by the trapezoidal rule, which is
//! effectively spectrally accurate here because the states vanish at both
//! walls. `<p>` uses the five-point first-derivative stencil so observable
//! accuracy never limits a comparison between the two propagation schemes.
//!
//! `<p^2>` comes in two flavors. The production route converts potential
//! energy gained or lost since t = 0 into kinetic energy:
//! `<p^2>_t = <p^2>_0 + 2 m (<V>_0 - <V>_t)` with
//! `<p^2>_0 = p0^2 + hbar^2 / 4 sigma^2` for a minimum-uncertainty packet.
//! The direct route integrates `-hbar^2 psi* psi''` with the five-point
//! second derivative; it is independent of the energy argument and serves to
//! validate it. Reported total energy always uses the direct route — the
//! energy-method total is constant by construction and would make any
//! conservation check vacuous.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::grid::{init_gaussian, PhysicalConstants, SpatialGrid, WaveFunction, WavePacketSpec};
use crate::scheme::{second_derivative_stencil, SchemeKind};

/// Norm, first two moments of x and p, energies, and the uncertainty product
/// of one state, with an optional closed-form reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableRecord {
    pub time: f64,
    pub norm: f64,
    pub mean_x: f64,
    pub mean_x2: f64,
    pub mean_p: f64,
    /// `<p^2>` via the energy-conservation route.
    pub mean_p2: f64,
    pub mean_potential: f64,
    /// `<H>` via direct kinetic quadrature plus `<V>`.
    pub mean_energy: f64,
    pub delta_x: f64,
    pub delta_p: f64,
    pub uncertainty_product: f64,
    pub analytic_reference: Option<f64>,
    pub relative_error: Option<f64>,
}

/// Discrete norm `integral |psi|^2 dx` (trapezoidal; the boundary samples are
/// zero so the end weights do not matter).
pub fn norm(psi: &WaveFunction, grid: &SpatialGrid) -> f64 {
    psi.amplitudes().iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dx()
}

/// `<x^n>` for n = 1, 2.
pub fn moment_x(psi: &WaveFunction, grid: &SpatialGrid, n: u32) -> f64 {
    let dx = grid.dx();
    let mut acc = 0.0;
    for (j, a) in psi.amplitudes().iter().enumerate() {
        acc += a.norm_sqr() * grid.x(j).powi(n as i32);
    }
    acc * dx / norm(psi, grid)
}

/// Five-point first derivative with zero ghost points.
fn first_derivative(values: &[Complex64], j: usize, dx: f64) -> Complex64 {
    let at = |idx: isize| -> Complex64 {
        if idx < 0 || idx as usize >= values.len() {
            Complex64::new(0.0, 0.0)
        } else {
            values[idx as usize]
        }
    };
    let j = j as isize;
    (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * dx)
}

/// `<p> = -i hbar integral psi* psi' dx`.
pub fn moment_p(psi: &WaveFunction, grid: &SpatialGrid, constants: &PhysicalConstants) -> f64 {
    let values = psi.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, a) in values.iter().enumerate() {
        acc += a.conj() * first_derivative(values, j, grid.dx());
    }
    let p = Complex64::new(0.0, -constants.hbar) * acc * grid.dx() / norm(psi, grid);
    debug_assert!(p.im.abs() < 1e-8, "imaginary part {:e} left in <p>", p.im);
    p.re
}

/// `<p^2> = -hbar^2 integral psi* psi'' dx` with the five-point second
/// derivative. Direct quadrature route, independent of energy conservation.
pub fn mean_p2_direct(
    psi: &WaveFunction,
    grid: &SpatialGrid,
    constants: &PhysicalConstants,
) -> f64 {
    let values = psi.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, a) in values.iter().enumerate() {
        acc +=
            a.conj() * second_derivative_stencil(values, j, grid.dx(), SchemeKind::Pentadiagonal);
    }
    let p2 = -constants.hbar * constants.hbar * acc * grid.dx() / norm(psi, grid);
    debug_assert!(
        p2.im.abs() < 1e-8,
        "imaginary part {:e} left in <p^2>",
        p2.im
    );
    p2.re
}

/// `<V>` by trapezoidal quadrature of `V |psi|^2`.
pub fn mean_potential(psi: &WaveFunction, grid: &SpatialGrid, potential: &[f64]) -> f64 {
    debug_assert_eq!(potential.len(), psi.len());
    let acc: f64 = psi
        .amplitudes()
        .iter()
        .zip(potential)
        .map(|(a, &v)| v * a.norm_sqr())
        .sum();
    acc * grid.dx() / norm(psi, grid)
}

/// `<p^2>` and `<V>` of the initial minimum-uncertainty packet, fixed once
/// per run so the energy-conservation route can stream over states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialEnergy {
    pub mean_p2: f64,
    pub mean_potential: f64,
}

/// Evaluate the t = 0 quantities of the energy-conservation route: the
/// closed-form `<p^2>_0 = p0^2 + hbar^2 / 4 sigma^2` of the packet and `<V>`
/// over the freshly sampled initial state.
pub fn initial_energy(
    grid: &SpatialGrid,
    constants: &PhysicalConstants,
    spec: &WavePacketSpec,
    potential: &[f64],
) -> Result<InitialEnergy> {
    let psi0 = init_gaussian(grid, constants, spec)?;
    let hbar = constants.hbar;
    Ok(InitialEnergy {
        mean_p2: spec.momentum * spec.momentum + hbar * hbar / (4.0 * spec.sigma * spec.sigma),
        mean_potential: mean_potential(&psi0, grid, potential),
    })
}

/// `<p^2>_t` by energy conservation.
pub fn mean_p2_energy_method(
    psi: &WaveFunction,
    grid: &SpatialGrid,
    constants: &PhysicalConstants,
    potential: &[f64],
    initial: &InitialEnergy,
) -> f64 {
    let v_now = mean_potential(psi, grid, potential);
    initial.mean_p2 + 2.0 * constants.mass * (initial.mean_potential - v_now)
}

/// One-shot variant of [`mean_p2_energy_method`] that derives the initial
/// quantities from the packet parameters.
pub fn mean_p2_energy_from_spec(
    psi: &WaveFunction,
    initial_spec: &WavePacketSpec,
    potential: &[f64],
    grid: &SpatialGrid,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let initial = initial_energy(grid, constants, initial_spec, potential)?;
    Ok(mean_p2_energy_method(
        psi, grid, constants, potential, &initial,
    ))
}

/// Assemble the full observable record for one state. `analytic` is the
/// closed-form uncertainty product at this state's time, when one exists.
pub fn record(
    psi: &WaveFunction,
    grid: &SpatialGrid,
    potential: &[f64],
    constants: &PhysicalConstants,
    initial: &InitialEnergy,
    analytic: Option<f64>,
) -> ObservableRecord {
    let norm = norm(psi, grid);
    let mean_x = moment_x(psi, grid, 1);
    let mean_x2 = moment_x(psi, grid, 2);
    let mean_p = moment_p(psi, grid, constants);
    let mean_p2 = mean_p2_energy_method(psi, grid, constants, potential, initial);
    let mean_v = mean_potential(psi, grid, potential);
    let mean_energy = mean_p2_direct(psi, grid, constants) / (2.0 * constants.mass) + mean_v;

    let var_x = mean_x2 - mean_x * mean_x;
    let var_p = mean_p2 - mean_p * mean_p;
    debug_assert!(var_x > -1e-12, "negative position variance {var_x}");
    debug_assert!(var_p > -1e-12, "negative momentum variance {var_p}");
    let delta_x = var_x.max(0.0).sqrt();
    let delta_p = var_p.max(0.0).sqrt();
    let uncertainty_product = delta_x * delta_p;

    let relative_error = analytic.map(|a| (uncertainty_product - a).abs() / a);

    ObservableRecord {
        time: psi.time(),
        norm,
        mean_x,
        mean_x2,
        mean_p,
        mean_p2,
        mean_potential: mean_v,
        mean_energy,
        delta_x,
        delta_p,
        uncertainty_product,
        analytic_reference: analytic,
        relative_error,
    }
}
