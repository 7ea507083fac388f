//! Complex tridiagonal and pentadiagonal solvers.
//!
//! The tridiagonal path is the Thomas algorithm (Gaussian elimination
//! specialized to bandwidth one); the pentadiagonal path is a banded LU
//! factorization without pivoting whose factors can be reused across many
//! right-hand sides. A dense partial-pivoting solver is included as the
//! reference oracle for the property tests.
//!
//! Neither banded routine pivots: the Crank-Nicolson matrices this crate
//! produces are the identity plus a skew-Hermitian-like perturbation and stay
//! diagonally dominant for real static potentials. Elimination reports a
//! singular system as soon as a pivot drops below [`PIVOT_THRESHOLD`], and
//! the propagator's optional residual check catches any silent loss of
//! dominance (e.g. deep attractive potentials combined with very large
//! `dt/dx^2`).

use num_complex::Complex64;

use crate::error::{Result, TdseError};

/// Pivot magnitudes below this are treated as an exactly singular system.
pub const PIVOT_THRESHOLD: f64 = 1e-300;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Values along one off-diagonal: either one constant for every row (the
/// Crank-Nicolson case) or an explicit per-row sequence.
#[derive(Debug, Clone, PartialEq)]
enum Band {
    Constant(Complex64),
    PerRow(Vec<Complex64>),
}

impl Band {
    #[inline]
    fn at(&self, idx: usize) -> Complex64 {
        match self {
            Band::Constant(c) => *c,
            Band::PerRow(v) => v[idx],
        }
    }
}

/// Complex tridiagonal system over `N` unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    diag: Vec<Complex64>,
    sub: Band,
    sup: Band,
}

impl TridiagonalSystem {
    /// System with a single constant value on both off-diagonals.
    pub fn uniform(diag: Vec<Complex64>, off: Complex64) -> Result<Self> {
        if diag.is_empty() {
            return Err(TdseError::SystemTooSmall { dim: 0, min: 1 });
        }
        Ok(Self {
            diag,
            sub: Band::Constant(off),
            sup: Band::Constant(off),
        })
    }

    /// System with explicit sub- and super-diagonal sequences (length N - 1).
    pub fn general(diag: Vec<Complex64>, sub: Vec<Complex64>, sup: Vec<Complex64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(TdseError::SystemTooSmall { dim: 0, min: 1 });
        }
        let expected = n - 1;
        if sub.len() != expected {
            return Err(TdseError::LengthMismatch {
                what: "tridiagonal sub-diagonal",
                expected,
                got: sub.len(),
            });
        }
        if sup.len() != expected {
            return Err(TdseError::LengthMismatch {
                what: "tridiagonal super-diagonal",
                expected,
                got: sup.len(),
            });
        }
        Ok(Self {
            diag,
            sub: Band::PerRow(sub),
            sup: Band::PerRow(sup),
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// y = A v.
    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.len();
        if v.len() != n {
            return Err(TdseError::LengthMismatch {
                what: "matvec input",
                expected: n,
                got: v.len(),
            });
        }
        let mut y = vec![ZERO; n];
        for i in 0..n {
            let mut acc = self.diag[i] * v[i];
            if i > 0 {
                acc += self.sub.at(i - 1) * v[i - 1];
            }
            if i + 1 < n {
                acc += self.sup.at(i) * v[i + 1];
            }
            y[i] = acc;
        }
        Ok(y)
    }

    /// Dense copy for oracle comparisons.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let n = self.len();
        let mut m = vec![vec![ZERO; n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i];
            if i > 0 {
                m[i][i - 1] = self.sub.at(i - 1);
            }
            if i + 1 < n {
                m[i][i + 1] = self.sup.at(i);
            }
        }
        m
    }
}

/// Solve `A x = rhs` for a tridiagonal `A` by forward elimination and back
/// substitution. O(N), no pivoting.
pub fn thomas_solve(sys: &TridiagonalSystem, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = sys.len();
    if rhs.len() != n {
        return Err(TdseError::LengthMismatch {
            what: "tridiagonal right-hand side",
            expected: n,
            got: rhs.len(),
        });
    }

    let mut sup_over_pivot = vec![ZERO; n];
    let mut x = vec![ZERO; n];

    let mut pivot = sys.diag[0];
    check_pivot(pivot, 0)?;
    if n > 1 {
        sup_over_pivot[0] = sys.sup.at(0) / pivot;
    }
    x[0] = rhs[0] / pivot;

    for i in 1..n {
        let sub = sys.sub.at(i - 1);
        pivot = sys.diag[i] - sub * sup_over_pivot[i - 1];
        check_pivot(pivot, i)?;
        if i + 1 < n {
            sup_over_pivot[i] = sys.sup.at(i) / pivot;
        }
        x[i] = (rhs[i] - sub * x[i - 1]) / pivot;
    }

    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= sup_over_pivot[i] * next;
    }
    Ok(x)
}

/// Complex pentadiagonal system over `N >= 3` unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct PentadiagonalSystem {
    diag: Vec<Complex64>,
    sub1: Band,
    sub2: Band,
    sup1: Band,
    sup2: Band,
}

impl PentadiagonalSystem {
    /// System with constant first and second off-diagonals.
    pub fn uniform(diag: Vec<Complex64>, off1: Complex64, off2: Complex64) -> Result<Self> {
        if diag.len() < 3 {
            return Err(TdseError::SystemTooSmall {
                dim: diag.len(),
                min: 3,
            });
        }
        Ok(Self {
            diag,
            sub1: Band::Constant(off1),
            sub2: Band::Constant(off2),
            sup1: Band::Constant(off1),
            sup2: Band::Constant(off2),
        })
    }

    /// System with explicit off-diagonal sequences (lengths N - 1 and N - 2).
    pub fn general(
        diag: Vec<Complex64>,
        sub1: Vec<Complex64>,
        sub2: Vec<Complex64>,
        sup1: Vec<Complex64>,
        sup2: Vec<Complex64>,
    ) -> Result<Self> {
        let n = diag.len();
        if n < 3 {
            return Err(TdseError::SystemTooSmall { dim: n, min: 3 });
        }
        for (what, seq, expected) in [
            ("pentadiagonal first sub-diagonal", &sub1, n - 1),
            ("pentadiagonal second sub-diagonal", &sub2, n - 2),
            ("pentadiagonal first super-diagonal", &sup1, n - 1),
            ("pentadiagonal second super-diagonal", &sup2, n - 2),
        ] {
            if seq.len() != expected {
                return Err(TdseError::LengthMismatch {
                    what,
                    expected,
                    got: seq.len(),
                });
            }
        }
        Ok(Self {
            diag,
            sub1: Band::PerRow(sub1),
            sub2: Band::PerRow(sub2),
            sup1: Band::PerRow(sup1),
            sup2: Band::PerRow(sup2),
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// y = A v.
    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.len();
        if v.len() != n {
            return Err(TdseError::LengthMismatch {
                what: "matvec input",
                expected: n,
                got: v.len(),
            });
        }
        let mut y = vec![ZERO; n];
        for i in 0..n {
            let mut acc = self.diag[i] * v[i];
            if i > 0 {
                acc += self.sub1.at(i - 1) * v[i - 1];
            }
            if i > 1 {
                acc += self.sub2.at(i - 2) * v[i - 2];
            }
            if i + 1 < n {
                acc += self.sup1.at(i) * v[i + 1];
            }
            if i + 2 < n {
                acc += self.sup2.at(i) * v[i + 2];
            }
            y[i] = acc;
        }
        Ok(y)
    }

    /// Dense copy for oracle comparisons.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let n = self.len();
        let mut m = vec![vec![ZERO; n]; n];
        for i in 0..n {
            m[i][i] = self.diag[i];
            if i > 0 {
                m[i][i - 1] = self.sub1.at(i - 1);
            }
            if i > 1 {
                m[i][i - 2] = self.sub2.at(i - 2);
            }
            if i + 1 < n {
                m[i][i + 1] = self.sup1.at(i);
            }
            if i + 2 < n {
                m[i][i + 2] = self.sup2.at(i);
            }
        }
        m
    }
}

/// Banded LU factors of a pentadiagonal system: L is unit lower triangular
/// with two sub-diagonals, U is upper triangular with two super-diagonals.
///
/// The factorization is immutable once built; `solve` only reads it, so one
/// factorization can serve many right-hand sides (and threads) and repeated
/// solves are bitwise reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct PentaFactorization {
    /// L[i][i-1], index i-1; length N - 1.
    l1: Vec<Complex64>,
    /// L[i][i-2], index i-2; length N - 2.
    l2: Vec<Complex64>,
    /// U[i][i]; length N.
    u0: Vec<Complex64>,
    /// U[i][i+1], index i; length N - 1.
    u1: Vec<Complex64>,
    /// U[i][i+2], index i; length N - 2 (equals the second super-diagonal).
    u2: Vec<Complex64>,
}

impl PentaFactorization {
    pub fn len(&self) -> usize {
        self.u0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u0.is_empty()
    }

    /// Bands of the unit lower factor: (first sub-diagonal, second sub-diagonal).
    pub fn lower_bands(&self) -> (&[Complex64], &[Complex64]) {
        (&self.l1, &self.l2)
    }

    /// Bands of the upper factor: (diagonal, first, second super-diagonal).
    pub fn upper_bands(&self) -> (&[Complex64], &[Complex64], &[Complex64]) {
        (&self.u0, &self.u1, &self.u2)
    }

    /// Solve `A x = rhs` by forward substitution with L and back substitution
    /// with U. O(N) per right-hand side.
    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.len();
        if rhs.len() != n {
            return Err(TdseError::LengthMismatch {
                what: "pentadiagonal right-hand side",
                expected: n,
                got: rhs.len(),
            });
        }

        // L y = rhs
        let mut y = vec![ZERO; n];
        y[0] = rhs[0];
        if n > 1 {
            y[1] = rhs[1] - self.l1[0] * y[0];
        }
        for i in 2..n {
            y[i] = rhs[i] - self.l1[i - 1] * y[i - 1] - self.l2[i - 2] * y[i - 2];
        }

        // U x = y
        let mut x = y;
        x[n - 1] /= self.u0[n - 1];
        if n > 1 {
            let t = x[n - 1];
            x[n - 2] = (x[n - 2] - self.u1[n - 2] * t) / self.u0[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            let t1 = x[i + 1];
            let t2 = x[i + 2];
            x[i] = (x[i] - self.u1[i] * t1 - self.u2[i] * t2) / self.u0[i];
        }
        Ok(x)
    }
}

/// Factor a pentadiagonal system into banded L and U without pivoting.
pub fn penta_factorize(sys: &PentadiagonalSystem) -> Result<PentaFactorization> {
    let n = sys.len();
    let mut l1 = vec![ZERO; n - 1];
    let mut l2 = vec![ZERO; n - 2];
    let mut u0 = vec![ZERO; n];
    let mut u1 = vec![ZERO; n - 1];
    let mut u2 = vec![ZERO; n - 2];

    // Row 0 of U is row 0 of A.
    u0[0] = sys.diag[0];
    check_pivot(u0[0], 0)?;
    u1[0] = sys.sup1.at(0);
    u2[0] = sys.sup2.at(0);

    // Row 1 eliminates one entry.
    l1[0] = sys.sub1.at(0) / u0[0];
    u0[1] = sys.diag[1] - l1[0] * u1[0];
    check_pivot(u0[1], 1)?;
    if n > 2 {
        u1[1] = sys.sup1.at(1) - l1[0] * u2[0];
    }
    if n > 3 {
        u2[1] = sys.sup2.at(1);
    }

    for i in 2..n {
        let l2i = sys.sub2.at(i - 2) / u0[i - 2];
        let l1i = (sys.sub1.at(i - 1) - l2i * u1[i - 2]) / u0[i - 1];
        l2[i - 2] = l2i;
        l1[i - 1] = l1i;

        u0[i] = sys.diag[i] - l1i * u1[i - 1] - l2i * u2[i - 2];
        check_pivot(u0[i], i)?;

        if i + 1 < n {
            u1[i] = sys.sup1.at(i) - l1i * u2[i - 1];
        }
        if i + 2 < n {
            u2[i] = sys.sup2.at(i);
        }
    }

    Ok(PentaFactorization { l1, l2, u0, u1, u2 })
}

/// Factor and solve in one call.
pub fn penta_solve(sys: &PentadiagonalSystem, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    penta_factorize(sys)?.solve(rhs)
}

/// Banded matrix-vector product with per-row diagonal and constant
/// off-diagonals: `y_j = diag_j v_j + off1 (v_{j-1} + v_{j+1})
/// [+ off2 (v_{j-2} + v_{j+2})]`, with out-of-range entries taken as zero.
pub fn banded_matvec(
    diag: &[Complex64],
    off1: Complex64,
    off2: Option<Complex64>,
    v: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = diag.len();
    if v.len() != n {
        return Err(TdseError::LengthMismatch {
            what: "banded matvec input",
            expected: n,
            got: v.len(),
        });
    }
    let mut y = vec![ZERO; n];
    for j in 0..n {
        let mut acc = diag[j] * v[j];
        let mut near = ZERO;
        if j > 0 {
            near += v[j - 1];
        }
        if j + 1 < n {
            near += v[j + 1];
        }
        acc += off1 * near;
        if let Some(c) = off2 {
            let mut far = ZERO;
            if j > 1 {
                far += v[j - 2];
            }
            if j + 2 < n {
                far += v[j + 2];
            }
            acc += c * far;
        }
        y[j] = acc;
    }
    Ok(y)
}

/// Dense Gaussian elimination with partial pivoting. Reference oracle for
/// the banded solvers; not meant for large systems.
#[allow(clippy::needless_range_loop)]
pub fn dense_solve(matrix: &[Vec<Complex64>], rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = matrix.len();
    if rhs.len() != n || matrix.iter().any(|row| row.len() != n) {
        return Err(TdseError::LengthMismatch {
            what: "dense system",
            expected: n,
            got: rhs.len(),
        });
    }

    let mut a: Vec<Vec<Complex64>> = matrix.to_vec();
    let mut b: Vec<Complex64> = rhs.to_vec();

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .norm_sqr()
                    .partial_cmp(&a[j][col].norm_sqr())
                    .unwrap()
            })
            .unwrap();
        if a[pivot_row][col].norm() < PIVOT_THRESHOLD {
            return Err(TdseError::SingularSystem {
                row: col,
                threshold: PIVOT_THRESHOLD,
            });
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);

        let pivot = a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / pivot;
            if factor == ZERO {
                continue;
            }
            for k in col..n {
                let t = a[col][k];
                a[row][k] -= factor * t;
            }
            let t = b[col];
            b[row] -= factor * t;
        }
    }

    let mut x = vec![ZERO; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

#[inline]
fn check_pivot(pivot: Complex64, row: usize) -> Result<()> {
    if pivot.norm() < PIVOT_THRESHOLD {
        Err(TdseError::SingularSystem {
            row,
            threshold: PIVOT_THRESHOLD,
        })
    } else {
        Ok(())
    }
}
