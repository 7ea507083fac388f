//! Discretization of the Cayley time step onto banded linear systems.
//!
//! One step advances `psi` by solving `(1 + i H dt / 2 hbar) psi_next =
//! (1 - i H dt / 2 hbar) psi`. With the three-point second-derivative stencil
//! the left-hand side is tridiagonal; with the five-point stencil it is
//! pentadiagonal. Both operators act on the interior points `psi_1 ...
//! psi_{J-1}` with homogeneous Dirichlet walls, treating any point beyond the
//! grid as zero so the five-point rows next to the walls stay well defined.
//!
//! For a real potential the explicit matrix is the element-wise complex
//! conjugate of the implicit one, so only one band is derived and the other
//! is conjugated from it. The implicit matrix of a static potential never
//! changes during a run: the pentadiagonal variant is LU-factorized once at
//! build time and the factors reused every step.

use num_complex::Complex64;

use crate::error::{Result, TdseError};
use crate::grid::{PhysicalConstants, SpatialGrid, WaveFunction};
use crate::linalg::{
    banded_matvec, penta_factorize, thomas_solve, PentaFactorization, PentadiagonalSystem,
    TridiagonalSystem,
};

/// Which finite-difference stencil discretizes the kinetic term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    /// Three-point stencil, O(dx^2) accurate, tridiagonal system.
    Tridiagonal,
    /// Five-point stencil, O(dx^4) accurate, pentadiagonal system.
    Pentadiagonal,
}

impl std::fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SchemeKind::Tridiagonal => write!(f, "tridiagonal"),
            SchemeKind::Pentadiagonal => write!(f, "pentadiagonal"),
        }
    }
}

/// Second-derivative finite difference at point `j`, with indices outside
/// `values` treated as zero.
pub fn second_derivative_stencil(
    values: &[Complex64],
    j: usize,
    dx: f64,
    kind: SchemeKind,
) -> Complex64 {
    let at = |idx: isize| -> Complex64 {
        if idx < 0 || idx as usize >= values.len() {
            Complex64::new(0.0, 0.0)
        } else {
            values[idx as usize]
        }
    };
    let j = j as isize;
    match kind {
        SchemeKind::Tridiagonal => (at(j + 1) - 2.0 * at(j) + at(j - 1)) / (dx * dx),
        SchemeKind::Pentadiagonal => {
            (-at(j + 2) + 16.0 * at(j + 1) - 30.0 * at(j) + 16.0 * at(j - 1) - at(j - 2))
                / (12.0 * dx * dx)
        }
    }
}

enum SolverBackend {
    Thomas(TridiagonalSystem),
    CachedLu(PentaFactorization),
}

/// The banded matrices of one Cayley step over the interior unknowns,
/// with the pentadiagonal factorization precomputed.
pub struct DiscretizedScheme {
    kind: SchemeKind,
    dt: f64,
    lhs_diag: Vec<Complex64>,
    lhs_off1: Complex64,
    lhs_off2: Option<Complex64>,
    rhs_diag: Vec<Complex64>,
    rhs_off1: Complex64,
    rhs_off2: Option<Complex64>,
    backend: SolverBackend,
}

/// Assemble (and for the pentadiagonal case factorize) the scheme matrices
/// for a static potential sampled on the grid.
///
/// `dt` may be negative to step backwards in time; the magnitude only has to
/// be finite.
pub fn build_scheme(
    grid: &SpatialGrid,
    potential: &[f64],
    constants: &PhysicalConstants,
    dt: f64,
    kind: SchemeKind,
) -> Result<DiscretizedScheme> {
    if potential.len() != grid.num_points() {
        return Err(TdseError::LengthMismatch {
            what: "potential samples",
            expected: grid.num_points(),
            got: potential.len(),
        });
    }
    if !dt.is_finite() {
        return Err(TdseError::InvalidParameter {
            name: "dt",
            value: dt,
        });
    }

    let hbar = constants.hbar;
    let mass = constants.mass;
    let dx2 = grid.dx() * grid.dx();
    let half_step = dt / (2.0 * hbar);

    // Kinetic contribution to the diagonal of H and the off-diagonal
    // couplings, per stencil.
    let (kinetic_diag, off1, off2) = match kind {
        SchemeKind::Tridiagonal => (
            hbar * hbar / (mass * dx2),
            Complex64::new(0.0, -hbar * dt / (4.0 * mass * dx2)),
            None,
        ),
        SchemeKind::Pentadiagonal => (
            1.25 * hbar * hbar / (mass * dx2),
            Complex64::new(0.0, -hbar * dt / (3.0 * mass * dx2)),
            Some(Complex64::new(0.0, hbar * dt / (48.0 * mass * dx2))),
        ),
    };

    let lhs_diag: Vec<Complex64> = potential[1..grid.num_points() - 1]
        .iter()
        .map(|&v| Complex64::new(1.0, half_step * (kinetic_diag + v)))
        .collect();
    let rhs_diag: Vec<Complex64> = lhs_diag.iter().map(|a| a.conj()).collect();
    let rhs_off1 = off1.conj();
    let rhs_off2 = off2.map(|c| c.conj());

    let backend = match kind {
        SchemeKind::Tridiagonal => {
            SolverBackend::Thomas(TridiagonalSystem::uniform(lhs_diag.clone(), off1)?)
        }
        SchemeKind::Pentadiagonal => {
            let sys = PentadiagonalSystem::uniform(lhs_diag.clone(), off1, off2.unwrap())?;
            SolverBackend::CachedLu(penta_factorize(&sys)?)
        }
    };

    Ok(DiscretizedScheme {
        kind,
        dt,
        lhs_diag,
        lhs_off1: off1,
        lhs_off2: off2,
        rhs_diag,
        rhs_off1,
        rhs_off2,
        backend,
    })
}

impl DiscretizedScheme {
    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of interior unknowns J - 1.
    pub fn interior_len(&self) -> usize {
        self.lhs_diag.len()
    }

    /// Diagonal of the implicit (left-hand-side) matrix.
    pub fn lhs_diag(&self) -> &[Complex64] {
        &self.lhs_diag
    }

    /// First off-diagonal of the implicit matrix.
    pub fn lhs_off1(&self) -> Complex64 {
        self.lhs_off1
    }

    /// Second off-diagonal of the implicit matrix (pentadiagonal only).
    pub fn lhs_off2(&self) -> Option<Complex64> {
        self.lhs_off2
    }

    /// Diagonal of the explicit (right-hand-side) matrix.
    pub fn rhs_diag(&self) -> &[Complex64] {
        &self.rhs_diag
    }

    pub fn rhs_off1(&self) -> Complex64 {
        self.rhs_off1
    }

    pub fn rhs_off2(&self) -> Option<Complex64> {
        self.rhs_off2
    }

    /// Apply the explicit half-step matrix to the interior of `psi`,
    /// producing the right-hand-side vector of the implicit solve.
    pub fn compute_zeta(&self, psi: &WaveFunction) -> Result<Vec<Complex64>> {
        let interior = psi.interior();
        if interior.len() != self.interior_len() {
            return Err(TdseError::LengthMismatch {
                what: "wave function interior",
                expected: self.interior_len(),
                got: interior.len(),
            });
        }
        banded_matvec(&self.rhs_diag, self.rhs_off1, self.rhs_off2, interior)
    }

    /// Solve the implicit system for the next interior amplitudes.
    pub fn solve(&self, zeta: &[Complex64]) -> Result<Vec<Complex64>> {
        match &self.backend {
            SolverBackend::Thomas(sys) => thomas_solve(sys, zeta),
            SolverBackend::CachedLu(fact) => fact.solve(zeta),
        }
    }

    /// Relative infinity-norm residual of a solution of the implicit system.
    pub fn residual(&self, x: &[Complex64], rhs: &[Complex64]) -> Result<f64> {
        let ax = banded_matvec(&self.lhs_diag, self.lhs_off1, self.lhs_off2, x)?;
        if ax.len() != rhs.len() {
            return Err(TdseError::LengthMismatch {
                what: "residual right-hand side",
                expected: ax.len(),
                got: rhs.len(),
            });
        }
        let num = ax
            .iter()
            .zip(rhs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let den = rhs.iter().map(|b| b.norm()).fold(0.0, f64::max);
        Ok(if den > 0.0 { num / den } else { num })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{init_gaussian, WavePacketSpec};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_constants() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    /// Grid with dx = 0.1 used by the coefficient checks.
    fn coeff_grid() -> SpatialGrid {
        SpatialGrid::new(-0.4, 0.4, 8).unwrap()
    }

    #[test]
    fn tridiagonal_coefficients() {
        let grid = coeff_grid();
        let v = vec![0.0; grid.num_points()];
        let s = build_scheme(&grid, &v, &unit_constants(), 0.01, SchemeKind::Tridiagonal).unwrap();
        // b = -i dt / (4 dx^2) = -0.25i, a = 1 + (i dt / 2)(1 / dx^2) = 1 + 0.5i.
        assert!((s.lhs_off1() - c(0.0, -0.25)).norm() < 1e-16);
        assert!(s.lhs_off2().is_none());
        for a in s.lhs_diag() {
            assert!((a - c(1.0, 0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn pentadiagonal_coefficients() {
        let grid = coeff_grid();
        let v = vec![0.0; grid.num_points()];
        let s = build_scheme(
            &grid,
            &v,
            &unit_constants(),
            0.01,
            SchemeKind::Pentadiagonal,
        )
        .unwrap();
        assert!((s.lhs_off1() - c(0.0, -1.0 / 3.0)).norm() < 1e-16);
        assert!((s.lhs_off2().unwrap() - c(0.0, 1.0 / 48.0)).norm() < 1e-16);
        for a in s.lhs_diag() {
            assert!((a - c(1.0, 0.625)).norm() < 1e-15);
        }
    }

    #[test]
    fn vanishing_dt_gives_identity_band() {
        let grid = coeff_grid();
        let v = vec![0.0; grid.num_points()];
        for kind in [SchemeKind::Tridiagonal, SchemeKind::Pentadiagonal] {
            let s = build_scheme(&grid, &v, &unit_constants(), 1e-300, kind).unwrap();
            assert!(s.lhs_off1().norm() < 1e-250);
            if let Some(off2) = s.lhs_off2() {
                assert!(off2.norm() < 1e-250);
            }
            for a in s.lhs_diag() {
                assert!((a - c(1.0, 0.0)).norm() < 1e-250);
            }
        }
    }

    #[test]
    fn potential_length_checked() {
        let grid = coeff_grid();
        assert!(matches!(
            build_scheme(
                &grid,
                &[0.0; 4],
                &unit_constants(),
                0.01,
                SchemeKind::Tridiagonal
            ),
            Err(TdseError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn potential_enters_diagonal() {
        let grid = coeff_grid();
        let mut v = vec![0.0; grid.num_points()];
        v[3] = 2.0;
        let s = build_scheme(&grid, &v, &unit_constants(), 0.01, SchemeKind::Tridiagonal).unwrap();
        // Interior index 2 corresponds to grid point 3.
        assert!((s.lhs_diag()[2] - c(1.0, 0.5 + 0.005 * 2.0)).norm() < 1e-15);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn three_point_exact_on_quadratic() {
        // Binary-exact grid so the stencil arithmetic is free of rounding.
        let xs: Vec<f64> = (0..9).map(|j| -1.0 + 0.25 * j as f64).collect();
        let values: Vec<Complex64> = xs.iter().map(|&x| c(x * x, 0.0)).collect();
        for j in 1..8 {
            let d2 = second_derivative_stencil(&values, j, 0.25, SchemeKind::Tridiagonal);
            assert!((d2 - c(2.0, 0.0)).norm() <= 1e-12);
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn five_point_exact_on_quartic() {
        let xs: Vec<f64> = (0..9).map(|j| -1.0 + 0.25 * j as f64).collect();
        let values: Vec<Complex64> = xs.iter().map(|&x| c(x.powi(4), 0.0)).collect();
        for j in 2..7 {
            let d2 = second_derivative_stencil(&values, j, 0.25, SchemeKind::Pentadiagonal);
            let expected = 12.0 * xs[j] * xs[j];
            assert!((d2 - c(expected, 0.0)).norm() <= 1e-12);
        }
        // x = 0 sits at j = 4; the exact value there is zero.
        let at_zero = second_derivative_stencil(&values, 4, 0.25, SchemeKind::Pentadiagonal);
        assert_eq!(at_zero, c(0.0, 0.0));
    }

    /// Error of the stencil on sin(x) at x = 1 for step h.
    fn sin_stencil_error(h: f64, kind: SchemeKind) -> f64 {
        // Seven samples centered on x = 1 so both stencils have neighbors.
        let values: Vec<Complex64> = (-3..=3)
            .map(|k| c((1.0 + k as f64 * h).sin(), 0.0))
            .collect();
        let d2 = second_derivative_stencil(&values, 3, h, kind);
        (d2.re + 1.0f64.sin()).abs()
    }

    #[test]
    fn stencil_richardson_ratios() {
        let r3 = sin_stencil_error(0.1, SchemeKind::Tridiagonal)
            / sin_stencil_error(0.05, SchemeKind::Tridiagonal);
        assert!((r3 - 4.0).abs() < 0.2, "three-point ratio {r3}");
        let r5 = sin_stencil_error(0.1, SchemeKind::Pentadiagonal)
            / sin_stencil_error(0.05, SchemeKind::Pentadiagonal);
        assert!((r5 - 16.0).abs() < 0.5, "five-point ratio {r5}");
    }

    #[test]
    fn stencil_symbol_convergence_orders() {
        // Apply each stencil to exp(ikx) and compare with -k^2; the fitted
        // slope of log error vs log dx gives the order of accuracy.
        let k = 1.3;
        for (kind, expected) in [
            (SchemeKind::Tridiagonal, 2.0),
            (SchemeKind::Pentadiagonal, 4.0),
        ] {
            let mut logs = Vec::new();
            for &h in &[0.2, 0.1, 0.05, 0.025] {
                let values: Vec<Complex64> = (-3..=3)
                    .map(|m| Complex64::from_polar(1.0, k * (m as f64) * h))
                    .collect();
                let d2 = second_derivative_stencil(&values, 3, h, kind);
                let err = (d2 - c(-k * k, 0.0) * values[3]).norm();
                logs.push((h.ln(), err.ln()));
            }
            let slope = fit_slope(&logs);
            assert!(
                (slope - expected).abs() < 0.1,
                "{kind} stencil slope {slope}, expected {expected}"
            );
        }
    }

    fn fit_slope(points: &[(f64, f64)]) -> f64 {
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }

    #[test]
    fn rhs_band_is_conjugate_of_lhs() {
        let grid = SpatialGrid::new(-2.0, 2.0, 40).unwrap();
        let v: Vec<f64> = (0..grid.num_points())
            .map(|j| (j as f64 * 0.37).sin())
            .collect();
        for kind in [SchemeKind::Tridiagonal, SchemeKind::Pentadiagonal] {
            let s = build_scheme(&grid, &v, &unit_constants(), 0.02, kind).unwrap();
            for (a, b) in s.lhs_diag().iter().zip(s.rhs_diag()) {
                assert_eq!(*b, a.conj());
            }
            assert_eq!(s.rhs_off1(), s.lhs_off1().conj());
            assert_eq!(s.rhs_off2(), s.lhs_off2().map(|z| z.conj()));
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn implied_hamiltonian_is_hermitian() {
        // H = (lhs - I) * 2 hbar / (i dt) must be Hermitian for a real
        // potential; that is exactly what makes the Cayley step unitary.
        let grid = SpatialGrid::new(-2.0, 2.0, 16).unwrap();
        let v: Vec<f64> = (0..grid.num_points()).map(|j| 0.3 * j as f64).collect();
        let constants = unit_constants();
        let dt = 0.02;
        for kind in [SchemeKind::Tridiagonal, SchemeKind::Pentadiagonal] {
            let s = build_scheme(&grid, &v, &constants, dt, kind).unwrap();
            let n = s.interior_len();
            let factor = 2.0 * constants.hbar / (Complex64::i() * dt);
            let mut h = vec![vec![c(0.0, 0.0); n]; n];
            for i in 0..n {
                h[i][i] = (s.lhs_diag()[i] - 1.0) * factor;
                if i + 1 < n {
                    h[i][i + 1] = s.lhs_off1() * factor;
                    h[i + 1][i] = s.lhs_off1() * factor;
                }
                if let Some(off2) = s.lhs_off2() {
                    if i + 2 < n {
                        h[i][i + 2] = off2 * factor;
                        h[i + 2][i] = off2 * factor;
                    }
                }
            }
            let scale = h
                .iter()
                .flatten()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
                .max(1.0);
            for i in 0..n {
                for j in 0..n {
                    assert!(
                        (h[i][j] - h[j][i].conj()).norm() <= 1e-13 * scale,
                        "{kind}: non-Hermitian entry at ({i}, {j})"
                    );
                }
            }
        }
    }

    #[test]
    fn zeta_reduces_to_identity_for_vanishing_dt() {
        let grid = SpatialGrid::new(-10.0, 10.0, 100).unwrap();
        let constants = unit_constants();
        let v = vec![0.0; grid.num_points()];
        let spec = WavePacketSpec::new(0.0, 1.5, 0.4).unwrap();
        let psi = init_gaussian(&grid, &constants, &spec).unwrap();
        for kind in [SchemeKind::Tridiagonal, SchemeKind::Pentadiagonal] {
            let s = build_scheme(&grid, &v, &constants, 1e-300, kind).unwrap();
            let zeta = s.compute_zeta(&psi).unwrap();
            for (z, p) in zeta.iter().zip(psi.interior()) {
                assert!((z - p).norm() < 1e-15);
            }
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn zeta_of_constant_interior_is_constant_away_from_walls() {
        // The explicit operator applied to a constant leaves it untouched
        // wherever the stencil does not graze the Dirichlet walls.
        let grid = SpatialGrid::new(0.0, 1.6, 16).unwrap();
        let v = vec![0.0; grid.num_points()];
        let s = build_scheme(&grid, &v, &unit_constants(), 0.01, SchemeKind::Tridiagonal).unwrap();
        let mut amplitudes = vec![c(1.0, 0.0); grid.num_points()];
        amplitudes[0] = c(0.0, 0.0);
        amplitudes[16] = c(0.0, 0.0);
        let psi = WaveFunction::new(amplitudes, 0.0).unwrap();
        let zeta = s.compute_zeta(&psi).unwrap();
        for j in 1..zeta.len() - 1 {
            assert!(
                (zeta[j] - c(1.0, 0.0)).norm() < 1e-15,
                "zeta[{j}] = {}",
                zeta[j]
            );
        }
    }

    #[test]
    fn zeta_matches_pointwise_formula() {
        // Independent scalar evaluation of the explicit half step, written
        // straight from the discretized equations rather than via the band.
        let grid = SpatialGrid::new(-0.8, 0.8, 16).unwrap();
        let constants = unit_constants();
        let dt = 0.01;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let v: Vec<f64> = (0..grid.num_points())
            .map(|_| rng.gen_range(0.0..1.0))
            .collect();
        let mut amplitudes: Vec<Complex64> = (0..grid.num_points())
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let n = amplitudes.len();
        amplitudes[0] = c(0.0, 0.0);
        amplitudes[n - 1] = c(0.0, 0.0);
        let psi = WaveFunction::new(amplitudes, 0.0).unwrap();

        let half = Complex64::i() * dt / (2.0 * constants.hbar);
        let kin = -constants.hbar * constants.hbar / (2.0 * constants.mass);
        for kind in [SchemeKind::Tridiagonal, SchemeKind::Pentadiagonal] {
            let s = build_scheme(&grid, &v, &constants, dt, kind).unwrap();
            let zeta = s.compute_zeta(&psi).unwrap();
            let full = psi.amplitudes();
            for (idx, z) in zeta.iter().enumerate() {
                let j = idx + 1;
                let d2 = second_derivative_stencil(full, j, grid.dx(), kind);
                let expected = full[j] - half * (kin * d2 + v[j] * full[j]);
                assert!(
                    (z - expected).norm() <= 1e-15,
                    "{kind}: zeta[{idx}] = {z}, formula gives {expected}"
                );
            }
        }
    }

    #[test]
    fn scheme_is_shareable_across_threads() {
        // Immutable after build; concurrent runs may borrow one scheme.
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<DiscretizedScheme>();

        let grid = SpatialGrid::new(-10.0, 10.0, 200).unwrap();
        let constants = unit_constants();
        let v = vec![0.0; grid.num_points()];
        let scheme = build_scheme(&grid, &v, &constants, 0.01, SchemeKind::Pentadiagonal).unwrap();
        let spec = WavePacketSpec::new(0.0, 1.0, 0.5).unwrap();
        let psi = init_gaussian(&grid, &constants, &spec).unwrap();

        let results: Vec<Vec<Complex64>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..4)
                .map(|_| {
                    let scheme = &scheme;
                    let psi = psi.clone();
                    scope.spawn(move || {
                        let mut run = crate::propagator::PropagationRun::new(
                            scheme,
                            psi,
                            crate::propagator::DiagnosticsPolicy::None,
                        )
                        .unwrap();
                        run.advance(10).unwrap();
                        run.state().amplitudes().to_vec()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for r in &results[1..] {
            assert_eq!(r, &results[0]);
        }
    }

    #[test]
    fn solve_then_residual_is_tiny() {
        let grid = SpatialGrid::new(-5.0, 5.0, 64).unwrap();
        let constants = unit_constants();
        let v = vec![0.0; grid.num_points()];
        let spec = WavePacketSpec::new(0.0, 1.0, 1.0).unwrap();
        let psi = init_gaussian(&grid, &constants, &spec).unwrap();
        for kind in [SchemeKind::Tridiagonal, SchemeKind::Pentadiagonal] {
            let s = build_scheme(&grid, &v, &constants, 0.005, kind).unwrap();
            let zeta = s.compute_zeta(&psi).unwrap();
            let x = s.solve(&zeta).unwrap();
            assert!(s.residual(&x, &zeta).unwrap() < 1e-12);
        }
    }
}
