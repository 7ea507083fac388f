//! Unitary propagation of the one-dimensional time-dependent Schrödinger
//! equation.
//!
//! The time-evolution operator is applied in its Cayley form: one step solves
//! `(1 + i H dt / 2 hbar) psi(t + dt) = (1 - i H dt / 2 hbar) psi(t)`, which
//! is unitary for a Hermitian discrete `H` and therefore preserves the norm
//! and total energy of the state to rounding accuracy, forwards or backwards
//! in time.
//!
//! Two spatial discretizations of the kinetic term are provided:
//!
//! * [`SchemeKind::Tridiagonal`] — the three-point second-derivative stencil,
//!   O(dx^2) accurate; the implicit system is solved by the Thomas algorithm.
//! * [`SchemeKind::Pentadiagonal`] — the five-point stencil, O(dx^4)
//!   accurate; the implicit system is LU-factorized once and the factors are
//!   reused every step.
//!
//! [`observables`] computes norms, moments, the Heisenberg uncertainty
//! product and energies of the evolving state, and [`mod@reference`] supplies the
//! closed-form uncertainty products of a Gaussian packet in free space and in
//! a harmonic trap for error analysis.
//!
//! ```
//! use cn_tdse::{
//!     build_scheme, init_gaussian, observables, DiagnosticsPolicy, PhysicalConstants,
//!     PotentialSpec, PropagationRun, SchemeKind, SpatialGrid, WavePacketSpec,
//! };
//!
//! let constants = PhysicalConstants::default();
//! let grid = SpatialGrid::new(-40.0, 40.0, 800)?;
//! let packet = WavePacketSpec::new(-10.0, 2.0, 1.0)?;
//! let potential = PotentialSpec::Free.evaluate(&grid, &constants)?;
//! let scheme = build_scheme(&grid, &potential, &constants, 0.01, SchemeKind::Pentadiagonal)?;
//!
//! let psi = init_gaussian(&grid, &constants, &packet)?;
//! let mut run = PropagationRun::new(&scheme, psi, DiagnosticsPolicy::ResidualCheck)?;
//! run.advance(100)?;
//! let norm = observables::norm(run.state(), &grid);
//! assert!((norm - 1.0).abs() < 1e-10);
//! # Ok::<(), cn_tdse::TdseError>(())
//! ```

pub mod error;
pub mod grid;
pub mod linalg;
pub mod observables;
pub mod propagator;
pub mod reference;
pub mod scheme;

pub use error::{Result, TdseError};
pub use grid::{
    init_gaussian, PhysicalConstants, PotentialSpec, SpatialGrid, TimeGrid, WaveFunction,
    WavePacketSpec,
};
pub use observables::{InitialEnergy, ObservableRecord};
pub use propagator::{DiagnosticsPolicy, PropagationRun};
pub use reference::ReferenceCase;
pub use scheme::{build_scheme, DiscretizedScheme, SchemeKind};
