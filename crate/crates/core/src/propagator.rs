//! Time stepping: explicit half step, banded solve, repeat.

use num_complex::Complex64;

use crate::error::{Result, TdseError};
use crate::grid::WaveFunction;
use crate::scheme::DiscretizedScheme;

/// Relative residual allowed per solve when residual checking is on.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Relative drift of the l2 norm allowed under full diagnostics.
pub const NORM_DRIFT_TOLERANCE: f64 = 1e-8;

/// How much self-checking each step performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagnosticsPolicy {
    /// No per-step checks.
    #[default]
    None,
    /// Verify the relative residual of every banded solve.
    ResidualCheck,
    /// Residual check plus norm-drift monitoring.
    Full,
}

/// One wave function being advanced by one scheme.
///
/// Strictly sequential in time; independent runs can execute in parallel
/// since the scheme is read-only.
pub struct PropagationRun<'a> {
    scheme: &'a DiscretizedScheme,
    state: WaveFunction,
    step_index: usize,
    start_time: f64,
    initial_l2: f64,
    diagnostics: DiagnosticsPolicy,
}

/// Error type observers may return to abort a run.
pub type ObserverError = Box<dyn std::error::Error + Send + Sync>;

impl<'a> PropagationRun<'a> {
    pub fn new(
        scheme: &'a DiscretizedScheme,
        initial: WaveFunction,
        diagnostics: DiagnosticsPolicy,
    ) -> Result<Self> {
        if initial.len() != scheme.interior_len() + 2 {
            return Err(TdseError::LengthMismatch {
                what: "initial wave function",
                expected: scheme.interior_len() + 2,
                got: initial.len(),
            });
        }
        let initial_l2 = l2_norm_sqr(initial.amplitudes());
        Ok(Self {
            scheme,
            start_time: initial.time(),
            state: initial,
            step_index: 0,
            initial_l2,
            diagnostics,
        })
    }

    pub fn scheme(&self) -> &DiscretizedScheme {
        self.scheme
    }

    pub fn state(&self) -> &WaveFunction {
        &self.state
    }

    /// Steps taken since construction.
    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn time(&self) -> f64 {
        self.state.time()
    }

    /// Consume the run and return the final state.
    pub fn into_state(self) -> WaveFunction {
        self.state
    }

    /// Advance by one time step.
    pub fn step(&mut self) -> Result<()> {
        let zeta = self.scheme.compute_zeta(&self.state)?;
        let next = self.scheme.solve(&zeta)?;

        if self.diagnostics != DiagnosticsPolicy::None {
            let residual = self.scheme.residual(&next, &zeta)?;
            if residual > RESIDUAL_TOLERANCE {
                return Err(TdseError::ResidualExceeded {
                    step: self.step_index + 1,
                    residual,
                    tolerance: RESIDUAL_TOLERANCE,
                });
            }
        }

        self.step_index += 1;
        // Keep the clock multiplicative so long runs do not accumulate
        // additive rounding in the time stamp.
        let time = self.start_time + self.step_index as f64 * self.scheme.dt();
        self.state.replace_interior(&next, time);

        if self.diagnostics == DiagnosticsPolicy::Full {
            let drift = (l2_norm_sqr(self.state.amplitudes()) / self.initial_l2 - 1.0).abs();
            if drift > NORM_DRIFT_TOLERANCE {
                return Err(TdseError::NormDrift {
                    step: self.step_index,
                    drift,
                });
            }
        }
        Ok(())
    }

    /// Advance `n_steps` without observation.
    pub fn advance(&mut self, n_steps: usize) -> Result<()> {
        for _ in 0..n_steps {
            self.step()?;
        }
        Ok(())
    }

    /// Advance `n_steps`, handing the run to `observer` before the first
    /// step, after every `every`-th step, and after the final step.
    pub fn propagate<F>(&mut self, n_steps: usize, every: usize, mut observer: F) -> Result<()>
    where
        F: FnMut(&PropagationRun) -> std::result::Result<(), ObserverError>,
    {
        if n_steps == 0 {
            return Err(TdseError::InvalidParameter {
                name: "n_steps",
                value: 0.0,
            });
        }
        if every == 0 {
            return Err(TdseError::InvalidParameter {
                name: "every",
                value: 0.0,
            });
        }

        observer(self).map_err(|source| TdseError::Observer {
            step: self.step_index,
            source,
        })?;
        for i in 1..=n_steps {
            self.step()?;
            if i % every == 0 || i == n_steps {
                observer(self).map_err(|source| TdseError::Observer {
                    step: self.step_index,
                    source,
                })?;
            }
        }
        Ok(())
    }
}

fn l2_norm_sqr(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum()
}
