//! Dense complex matrix kernel.
//!
//! Decompositions (Schur, SVD, QR, LU) come from `nalgebra`; everything that
//! depends on tolerances or on the functions used by the correspondence lives
//! here and in [`funm`].

pub mod funm;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use funm::{exp_2pii, phi_matrix, phi_scalar, principal_log_over_2pii, FundamentalDomain};

/// Dense complex matrix. Zero-sized shapes are legal empty maps.
pub type CMatrix = DMatrix<Complex64>;

/// Default threshold for structural residuals.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default relative threshold for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `2πi`.
pub fn two_pi_i() -> Complex64 {
    Complex64::new(0.0, 2.0 * std::f64::consts::PI)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn scalar(value: Complex64) -> CMatrix {
    CMatrix::from_element(1, 1, value)
}

/// Row-major construction from real entries.
pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| real(x)))
}

pub fn diag(values: &[Complex64]) -> CMatrix {
    let n = values.len();
    let mut m = zeros(n, n);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = *v;
    }
    m
}

pub fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius distance; shapes must agree.
pub fn frob_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_finite(m: &CMatrix, what: &str) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Singular values in decreasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values at least `tol · σ_max`.
pub fn rank_tol(m: &CMatrix, tol: f64) -> usize {
    let sv = singular_values(m);
    let Some(&max) = sv.first() else { return 0 };
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s >= tol * max).count()
}

/// Orthonormal kernel basis (columns), rank decided relative to `σ_max`.
pub fn kernel_basis(m: &CMatrix, tol: f64) -> CMatrix {
    kernel_basis_floor(m, tol, 0.0)
}

/// As [`kernel_basis`], with singular values below `tol·max(σ_max, floor)`
/// treated as zero.
pub fn kernel_basis_floor(m: &CMatrix, tol: f64, floor: f64) -> CMatrix {
    let cols = m.ncols();
    if cols == 0 {
        return zeros(0, 0);
    }
    if m.nrows() == 0 || frob(m) == 0.0 {
        return identity(cols);
    }
    // Reduce tall systems to their triangular factor; pad wide ones so the SVD
    // returns the full right singular basis.
    let square = if m.nrows() > cols {
        m.clone().qr().r()
    } else {
        m.clone()
    };
    let square = if square.nrows() < cols {
        let mut padded = zeros(cols, cols);
        padded.view_mut((0, 0), square.shape()).copy_from(&square);
        padded
    } else {
        square
    };
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let max = svd.singular_values.iter().copied().fold(floor, f64::max);
    let null_rows: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] < tol * max)
        .collect();
    let mut basis = zeros(cols, null_rows.len());
    for (j, &i) in null_rows.iter().enumerate() {
        for r in 0..cols {
            basis[(r, j)] = v_t[(i, r)].conj();
        }
    }
    basis
}

/// Orthonormal basis (columns) of the column span, rank decided relative to `σ_max`.
pub fn range_basis(m: &CMatrix, tol: f64) -> CMatrix {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 || frob(m) == 0.0 {
        return zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] >= tol * max)
        .collect();
    let mut out = zeros(rows, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &u.column(i));
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns of `basis` inside `ℂ^n`.
pub fn orthogonal_complement(basis: &CMatrix, tol: f64) -> CMatrix {
    let n = basis.nrows();
    if basis.ncols() == 0 {
        return identity(n);
    }
    kernel_basis(&basis.adjoint(), tol)
}

/// Appends the columns of `extra` to `left`.
pub fn hstack(left: &CMatrix, extra: &CMatrix) -> CMatrix {
    debug_assert_eq!(left.nrows(), extra.nrows());
    let mut out = zeros(left.nrows(), left.ncols() + extra.ncols());
    out.view_mut((0, 0), left.shape()).copy_from(left);
    out.view_mut((0, left.ncols()), extra.shape()).copy_from(extra);
    out
}

/// Block-diagonal sum.
pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

/// `‖AB − BA‖ / max(1, ‖A‖‖B‖)` in the Frobenius norm.
pub fn commute_residual(a: &CMatrix, b: &CMatrix) -> f64 {
    let ab = a * b;
    let ba = b * a;
    frob_diff(&ab, &ba) / f64::max(1.0, frob(a) * frob(b))
}

/// Eigenvalues from the diagonal of a complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let n = ensure_square(m)?;
    ensure_finite(m, "eigenvalue input")?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let (_, t) = funm::schur(m);
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Inverse through LU, refusing numerically singular input.
pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    ensure_invertible(m, DEFAULT_RANK_TOL * 1e-4)?;
    m.clone().lu().try_inverse().ok_or(Error::Singular {
        sigma_min: 0.0,
        sigma_max: frob(m),
    })
}

/// Solves `A X = B` for square invertible `A`.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let n = ensure_square(a)?;
    if b.nrows() != n {
        return Err(Error::ShapeMismatch(format!(
            "solve: {}x{} with rhs {}x{}",
            n,
            n,
            b.nrows(),
            b.ncols()
        )));
    }
    if n == 0 {
        return Ok(zeros(0, b.ncols()));
    }
    ensure_invertible(a, DEFAULT_RANK_TOL * 1e-4)?;
    a.clone().lu().solve(b).ok_or(Error::Singular {
        sigma_min: 0.0,
        sigma_max: frob(a),
    })
}

/// Rejects matrices whose smallest singular value is below `tol · σ_max`.
pub fn ensure_invertible(m: &CMatrix, tol: f64) -> Result<()> {
    let sv = singular_values(m);
    let (Some(&max), Some(&min)) = (sv.first(), sv.last()) else {
        return Ok(());
    };
    if max == 0.0 || min < tol * max {
        return Err(Error::Singular {
            sigma_min: min,
            sigma_max: max,
        });
    }
    Ok(())
}

/// `vec` with column-major stacking.
fn vec_index(rows: usize, r: usize, c: usize) -> usize {
    c * rows + r
}

/// Orthonormal basis of `{X ∈ ℂ^{b×a} : X·P_i = Q_i·X ∀i}` for pairs `(P_i: a×a, Q_i: b×b)`.
///
/// Each basis element is returned as a `b×a` matrix; together they are
/// orthonormal in the Frobenius inner product.
pub fn solve_intertwiners(pairs: &[(CMatrix, CMatrix)], tol: f64) -> Result<Vec<CMatrix>> {
    let Some((p0, q0)) = pairs.first() else {
        return Err(Error::ShapeMismatch(
            "solve_intertwiners needs at least one pair".into(),
        ));
    };
    let a = p0.nrows();
    let b = q0.nrows();
    for (p, q) in pairs {
        if p.shape() != (a, a) || q.shape() != (b, b) {
            return Err(Error::ShapeMismatch(format!(
                "intertwiner pair shapes {:?}/{:?}, expected {a}x{a}/{b}x{b}",
                p.shape(),
                q.shape()
            )));
        }
    }
    let unknowns = a * b;
    if unknowns == 0 {
        return Ok(Vec::new());
    }
    let mut system = zeros(pairs.len() * unknowns, unknowns);
    for (block, (p, q)) in pairs.iter().enumerate() {
        let base = block * unknowns;
        // (X P)_{ij} − (Q X)_{ij}
        for i in 0..b {
            for j in 0..a {
                let row = base + vec_index(b, i, j);
                for k in 0..a {
                    system[(row, vec_index(b, i, k))] += p[(k, j)];
                }
                for k in 0..b {
                    system[(row, vec_index(b, k, j))] -= q[(i, k)];
                }
            }
        }
    }
    let kernel = kernel_basis(&system, tol);
    Ok((0..kernel.ncols())
        .map(|col| CMatrix::from_fn(b, a, |i, j| kernel[(vec_index(b, i, j), col)]))
        .collect())
}
