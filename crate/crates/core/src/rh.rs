//! Riemann–Hilbert functor on hypercube data and its inverse in a fundamental
//! domain, plus the one-arrow linearization check.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypercube::{MapLabel, MapRole};
use crate::linalg::{self, exp_2pii, phi_matrix, principal_log_over_2pii, CMatrix, FundamentalDomain};
use crate::predmod::{nonzero_integer_near, sorted_eigenvalues, PreDModule};
use crate::verdier::VerdierObject;

/// `Mono = exp(2πiΘ)`, `C = t`, `V = φ(Θ[A∖k][k])·s`.
pub fn rh(e: &PreDModule, tol: f64) -> Result<VerdierObject> {
    e.ensure_valid(tol)?;
    let cube = e.cube();
    let mut by_mask = vec![Vec::new(); cube.ctx().node_count()];
    for a in cube.strata() {
        by_mask[a.index()] = cube
            .ctx()
            .directions()
            .map(|k| phi_matrix(cube.loop_map(a, k)))
            .collect::<Result<Vec<_>>>()?;
    }
    let out = cube.map_structure(cube.dims().to_vec(), |label, g| match label.role {
        MapRole::Loop => exp_2pii(g),
        MapRole::Up => Ok(g.clone()),
        MapRole::Down => Ok(&by_mask[label.target().index()][label.k - 1] * g),
    })?;
    VerdierObject::from_cube(out)
}

/// `Θ = log(Mono)/2πi` with spectrum in `domain`, `t = C`, `s = φ(Θ[A∖k][k])⁻¹·V`.
pub fn inverse_rh(v: &VerdierObject, domain: FundamentalDomain, tol: f64) -> Result<PreDModule> {
    if !domain.avoids_nonzero_integers() {
        return Err(Error::InvalidDomain(domain.base_real));
    }
    v.ensure_valid(tol)?;
    let cube = v.cube();
    let n = cube.ctx().node_count();
    let mut logs: Vec<Vec<CMatrix>> = vec![Vec::new(); n];
    for a in cube.strata() {
        logs[a.index()] = cube
            .ctx()
            .directions()
            .map(|k| principal_log_over_2pii(cube.loop_map(a, k), domain))
            .collect::<Result<Vec<_>>>()?;
    }
    let mut phis: Vec<Vec<CMatrix>> = vec![Vec::new(); n];
    for (idx, ls) in logs.iter().enumerate() {
        phis[idx] = ls.iter().map(phi_matrix).collect::<Result<Vec<_>>>()?;
    }
    let out = cube.map_structure(cube.dims().to_vec(), |label: MapLabel, g| match label.role {
        MapRole::Loop => Ok(logs[label.node.index()][label.k - 1].clone()),
        MapRole::Up => Ok(g.clone()),
        MapRole::Down => linalg::solve(&phis[label.target().index()][label.k - 1], g),
    })?;
    PreDModule::from_cube(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobianReport {
    pub rank: usize,
    pub full_rank_expected: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// Full rank is predicted unless two eigenvalues of `st` and `ts`
    /// (taken together) differ by a nonzero integer.
    pub predicted_full_rank: bool,
}

/// `(s, t) ↦ (t, φ(st)·s)` for `s: n×m`, `t: m×n`.
pub fn arrow_map(s: &CMatrix, t: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    check_pair(s, t)?;
    let v = phi_matrix(&(s * t))? * s;
    Ok((t.clone(), v))
}

fn check_pair(s: &CMatrix, t: &CMatrix) -> Result<()> {
    if t.shape() != (s.ncols(), s.nrows()) {
        return Err(Error::ShapeMismatch(format!(
            "arrow pair s {:?} and t {:?} are not transposed shapes",
            s.shape(),
            t.shape()
        )));
    }
    Ok(())
}

fn to_real(ms: &[&CMatrix]) -> Vec<f64> {
    let mut out = Vec::new();
    for m in ms {
        for z in m.iter() {
            out.push(z.re);
            out.push(z.im);
        }
    }
    out
}

fn from_real(x: &[f64], shape: (usize, usize)) -> CMatrix {
    CMatrix::from_iterator(shape.0, shape.1, x.chunks(2).map(|p| Complex64::new(p[0], p[1])))
}

/// Central-difference Jacobian of [`arrow_map`] over the `4nm` real
/// coordinates, with rank counted against the absolute threshold `sv_tol`.
pub fn rh_jacobian_rank(s: &CMatrix, t: &CMatrix, h: f64, sv_tol: f64) -> Result<JacobianReport> {
    check_pair(s, t)?;
    if !(h > 0.0) {
        return Err(Error::InvalidParams(format!("step h must be positive, got {h}")));
    }
    linalg::ensure_finite(s, "s")?;
    linalg::ensure_finite(t, "t")?;
    let (n, m) = s.shape();
    let expected = 4 * n * m;
    let predicted = predicted_full_rank(s, t)?;
    if expected == 0 {
        return Ok(JacobianReport {
            rank: 0,
            full_rank_expected: 0,
            singular_values: Vec::new(),
            predicted_full_rank: predicted,
        });
    }
    let x0 = to_real(&[s, t]);
    let half = 2 * n * m;
    let eval = |x: &[f64]| -> Result<Vec<f64>> {
        let (ts, vs) = arrow_map(&from_real(&x[..half], (n, m)), &from_real(&x[half..], (m, n)))?;
        Ok(to_real(&[&ts, &vs]))
    };
    let mut jac = DMatrix::<f64>::zeros(expected, expected);
    let mut x = x0.clone();
    for col in 0..expected {
        x[col] = x0[col] + h;
        let plus = eval(&x)?;
        x[col] = x0[col] - h;
        let minus = eval(&x)?;
        x[col] = x0[col];
        for row in 0..expected {
            jac[(row, col)] = (plus[row] - minus[row]) / (2.0 * h);
        }
    }
    let mut sv: Vec<f64> = jac.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(JacobianReport {
        rank: sv.iter().filter(|&&x| x > sv_tol).count(),
        full_rank_expected: expected,
        singular_values: sv,
        predicted_full_rank: predicted,
    })
}

fn predicted_full_rank(s: &CMatrix, t: &CMatrix) -> Result<bool> {
    let mut ev = sorted_eigenvalues(&(s * t))?;
    ev.extend(sorted_eigenvalues(&(t * s))?);
    for i in 0..ev.len() {
        for j in i + 1..ev.len() {
            if nonzero_integer_near(ev[i] - ev[j], 1e-8).is_some() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
