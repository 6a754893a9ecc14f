//! Schur–Parlett evaluation of `exp(2πiZ)`, `φ(Z) = (exp(2πiZ) − I)/Z` and
//! `log(M)/2πi` on a chosen branch.
//!
//! The input is first split into its decoupled diagonal blocks (connected
//! components of the sparsity pattern), so block-diagonal inputs produce
//! block-diagonal outputs bit for bit. Each block is brought to complex Schur
//! form, eigenvalues are clustered, the Schur form is reordered so clusters are
//! contiguous, each atomic block is evaluated by a Taylor series about its mean
//! eigenvalue, and the off-diagonal blocks follow from the block Parlett
//! recurrence (a triangular Sylvester solve per block).

use std::f64::consts::PI;

use nalgebra::linalg::Schur;
use num_complex::Complex64;

use super::{ensure_finite, ensure_invertible, ensure_square, frob, frob_diff, zeros, CMatrix, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};

/// Cluster radius for `exp` and `φ` (absolute, on eigenvalues of the argument).
const CLUSTER_ABS: f64 = 0.1;
/// Cluster radius for `log` (relative to eigenvalue modulus).
const CLUSTER_REL: f64 = 0.1;
const MAX_TERMS: usize = 400;
/// Branch values within this distance of the closing edge of the strip are
/// moved to the opening edge.
const BRANCH_SNAP: f64 = 1e-9;
/// Relative residual `‖exp(2πiΘ) − M‖/‖M‖` accepted from the logarithm.
pub const LOG_RESIDUAL_TOL: f64 = 1e-8;

/// A half-open strip `base ≤ Re z < base + 1` selecting one value of `log(·)/2πi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalDomain {
    pub base_real: f64,
}

impl Default for FundamentalDomain {
    fn default() -> Self {
        Self { base_real: 0.0 }
    }
}

impl FundamentalDomain {
    pub fn new(base_real: f64) -> Result<Self> {
        if !base_real.is_finite() {
            return Err(Error::InvalidDomain(base_real));
        }
        Ok(Self { base_real })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.base_real && z.re < self.base_real + 1.0
    }

    /// True when the strip holds no nonzero integer, so `φ` is invertible on it.
    pub fn avoids_nonzero_integers(&self) -> bool {
        self.base_real > -1.0 && self.base_real <= 0.0
    }

    /// The unique integer in the strip.
    pub fn distinguished_integer(&self) -> i64 {
        self.base_real.ceil() as i64
    }

    /// `log(z)/2πi` with real part in the strip.
    pub fn log_over_2pii(&self, z: Complex64) -> Complex64 {
        let (modulus, arg) = z.to_polar();
        let raw = arg / (2.0 * PI);
        let mut re = raw - (raw - self.base_real).floor();
        if re >= self.base_real + 1.0 - BRANCH_SNAP {
            re -= 1.0;
        }
        Complex64::new(re, -modulus.ln() / (2.0 * PI))
    }
}

#[derive(Debug, Clone, Copy)]
enum ScalarFn {
    Exp2Pii,
    Phi,
    Log(FundamentalDomain),
}

fn w() -> Complex64 {
    Complex64::new(0.0, 2.0 * PI)
}

/// `φ(z) = (e^{2πiz} − 1)/z`, with `φ(0) = 2πi`.
pub fn phi_scalar(z: Complex64) -> Complex64 {
    phi_coefficients(z, 1)[0]
}

/// Taylor coefficients `φ^{(k)}(σ)/k!` for `k < count`.
fn phi_coefficients(sigma: Complex64, count: usize) -> Vec<Complex64> {
    let w = w();
    if sigma.norm() >= 1.0 {
        // (σ + h)φ(σ + h) = e^{wσ}e^{wh} − 1, solved forward; stable for |σ| ≥ 1.
        let e = (w * sigma).exp();
        let mut out = Vec::with_capacity(count);
        let mut prev = (e - 1.0) / sigma;
        out.push(prev);
        let mut wk_over_fact = Complex64::new(1.0, 0.0);
        for k in 1..count {
            wk_over_fact *= w / k as f64;
            prev = (e * wk_over_fact - prev) / sigma;
            out.push(prev);
        }
        return out;
    }
    // φ(z) = Σ_m w^{m+1} z^m/(m+1)!, re-expanded about σ:
    // c_k = Σ_{m≥k} w^{m+1} C(m,k) σ^{m−k}/(m+1)!.
    let mut out = Vec::with_capacity(count);
    let mut lead = w; // w^{k+1}/(k+1)!
    for k in 0..count {
        if k > 0 {
            lead *= w / (k + 1) as f64;
        }
        let mut term = lead;
        let mut sum = term;
        let mut m = k;
        loop {
            term *= w * sigma * (m + 1) as f64 / (((m + 1 - k) * (m + 2)) as f64);
            m += 1;
            sum += term;
            if term.norm() <= 1e-18 * sum.norm().max(1e-300) && m > k + 4 {
                break;
            }
            if term.norm() == 0.0 || m > k + 200 {
                break;
            }
        }
        out.push(sum);
    }
    out
}

impl ScalarFn {
    fn coefficients(&self, sigma: Complex64, count: usize) -> Vec<Complex64> {
        match *self {
            ScalarFn::Exp2Pii => {
                let e = (w() * sigma).exp();
                let mut out = Vec::with_capacity(count);
                let mut acc = e;
                out.push(acc);
                for k in 1..count {
                    acc *= w() / k as f64;
                    out.push(acc);
                }
                out
            }
            ScalarFn::Phi => phi_coefficients(sigma, count),
            ScalarFn::Log(domain) => {
                let mut out = Vec::with_capacity(count);
                out.push(domain.log_over_2pii(sigma));
                let mut pow = Complex64::new(1.0, 0.0);
                for k in 1..count {
                    pow /= sigma;
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    out.push(pow * sign / (k as f64) / w());
                }
                out
            }
        }
    }

    fn value(&self, z: Complex64) -> Complex64 {
        match *self {
            ScalarFn::Exp2Pii => (w() * z).exp(),
            ScalarFn::Phi => phi_scalar(z),
            ScalarFn::Log(domain) => domain.log_over_2pii(z),
        }
    }

    fn same_cluster(&self, a: Complex64, b: Complex64) -> bool {
        match self {
            ScalarFn::Log(_) => (a - b).norm() <= CLUSTER_REL * 0.5 * (a.norm() + b.norm()),
            _ => (a - b).norm() <= CLUSTER_ABS,
        }
    }
}

/// Complex Schur form `A = Q T Q^*` with `T` upper triangular.
pub(crate) fn schur(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    if n == 1 {
        return (CMatrix::identity(1, 1), a.clone());
    }
    let (q, mut t) = Schur::new(a.clone()).unpack();
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    (q, t)
}

/// Swaps the adjacent diagonal entries `k`, `k+1` of the triangular factor.
fn swap_adjacent(q: &mut CMatrix, t: &mut CMatrix, k: usize) {
    let n = t.nrows();
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    let x0 = t[(k, k + 1)];
    let x1 = b - a;
    let norm = (x0.norm_sqr() + x1.norm_sqr()).sqrt();
    if norm == 0.0 {
        return;
    }
    let g1 = x0 / norm;
    let g2 = x1 / norm;
    // G = [[g1, -conj(g2)], [g2, conj(g1)]]; first column is the eigenvector for b.
    for row in 0..n {
        let p = t[(row, k)];
        let r = t[(row, k + 1)];
        t[(row, k)] = p * g1 + r * g2;
        t[(row, k + 1)] = -p * g2.conj() + r * g1.conj();
    }
    for col in 0..n {
        let p = t[(k, col)];
        let r = t[(k + 1, col)];
        t[(k, col)] = g1.conj() * p + g2.conj() * r;
        t[(k + 1, col)] = -g2 * p + g1 * r;
    }
    for row in 0..n {
        let p = q[(row, k)];
        let r = q[(row, k + 1)];
        q[(row, k)] = p * g1 + r * g2;
        q[(row, k + 1)] = -p * g2.conj() + r * g1.conj();
    }
    t[(k + 1, k)] = Complex64::new(0.0, 0.0);
}

/// Cluster labels by transitive closure of the pairwise criterion, numbered by first appearance.
fn cluster(eigs: &[Complex64], f: &ScalarFn) -> Vec<usize> {
    let n = eigs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = i;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for i in 0..n {
        for j in i + 1..n {
            if f.same_cluster(eigs[i], eigs[j]) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj.max(ri)] = rj.min(ri);
                }
            }
        }
    }
    let mut label_of_root = vec![usize::MAX; n];
    let mut next = 0;
    (0..n)
        .map(|i| {
            let root = find(&mut parent, i);
            if label_of_root[root] == usize::MAX {
                label_of_root[root] = next;
                next += 1;
            }
            label_of_root[root]
        })
        .collect()
}

/// Taylor expansion of `f` about the mean eigenvalue of an atomic triangular block.
fn atomic(f: &ScalarFn, block: &CMatrix) -> Result<CMatrix> {
    let n = block.nrows();
    if n == 1 {
        return Ok(CMatrix::from_element(1, 1, f.value(block[(0, 0)])));
    }
    let center = (0..n).map(|i| block[(i, i)]).sum::<Complex64>() / n as f64;
    let mut shifted = block.clone();
    for i in 0..n {
        shifted[(i, i)] -= center;
    }
    let coeffs = f.coefficients(center, MAX_TERMS);
    let mut result = CMatrix::identity(n, n) * coeffs[0];
    let mut power = CMatrix::identity(n, n);
    let mut small_run = 0;
    for (k, &ck) in coeffs.iter().enumerate().skip(1) {
        power = &power * &shifted;
        let term = &power * ck;
        let term_norm = frob(&term);
        result += term;
        if frob(&power) == 0.0 {
            return Ok(result);
        }
        if k >= n && term_norm <= 1e-17 * frob(&result).max(1e-300) {
            small_run += 1;
            if small_run >= 2 {
                return Ok(result);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::SeriesDiverged { terms: MAX_TERMS })
}

/// Solves `A X − X B = C` for upper triangular `A`, `B` with disjoint spectra.
fn triangular_sylvester(a: &CMatrix, b: &CMatrix, rhs: &CMatrix) -> CMatrix {
    let p = a.nrows();
    let q = b.nrows();
    let mut x = zeros(p, q);
    for l in 0..q {
        let mut col: Vec<Complex64> = (0..p).map(|i| rhs[(i, l)]).collect();
        for m in 0..l {
            let coef = b[(m, l)];
            if coef != Complex64::new(0.0, 0.0) {
                for i in 0..p {
                    col[i] += x[(i, m)] * coef;
                }
            }
        }
        let shift = b[(l, l)];
        for i in (0..p).rev() {
            let mut acc = col[i];
            for j in i + 1..p {
                acc -= a[(i, j)] * x[(j, l)];
            }
            x[(i, l)] = acc / (a[(i, i)] - shift);
        }
    }
    x
}

/// Evaluates `f` on one decoupled block.
fn schur_parlett(f: &ScalarFn, a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if n == 1 {
        return Ok(CMatrix::from_element(1, 1, f.value(a[(0, 0)])));
    }
    let (mut q, mut t) = schur(a);
    let eigs: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let mut labels = cluster(&eigs, f);

    // Bubble clusters into contiguous runs ordered by label.
    for pass in 0..n {
        let mut swapped = false;
        for k in 0..n - 1 - pass.min(n - 1) {
            if labels[k] > labels[k + 1] {
                swap_adjacent(&mut q, &mut t, k);
                labels.swap(k, k + 1);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }

    let mut bounds = vec![0];
    for k in 1..n {
        if labels[k] != labels[k - 1] {
            bounds.push(k);
        }
    }
    bounds.push(n);
    let blocks = bounds.len() - 1;
    let range = |b: usize| (bounds[b], bounds[b + 1] - bounds[b]);

    let mut fmat = zeros(n, n);
    for j in 0..blocks {
        let (sj, nj) = range(j);
        let tjj = t.view((sj, sj), (nj, nj)).into_owned();
        let fjj = atomic(f, &tjj)?;
        fmat.view_mut((sj, sj), (nj, nj)).copy_from(&fjj);
        for i in (0..j).rev() {
            let (si, ni) = range(i);
            let tii = t.view((si, si), (ni, ni)).into_owned();
            let tij = t.view((si, sj), (ni, nj)).into_owned();
            let fii = fmat.view((si, si), (ni, ni)).into_owned();
            let mut rhs = &fii * &tij - &tij * &fjj;
            for k in i + 1..j {
                let (sk, nk) = range(k);
                let fik = fmat.view((si, sk), (ni, nk)).into_owned();
                let tkj = t.view((sk, sj), (nk, nj)).into_owned();
                let tik = t.view((si, sk), (ni, nk)).into_owned();
                let fkj = fmat.view((sk, sj), (nk, nj)).into_owned();
                rhs += &fik * &tkj - &tik * &fkj;
            }
            let fij = triangular_sylvester(&tii, &tjj, &rhs);
            fmat.view_mut((si, sj), (ni, nj)).copy_from(&fij);
        }
    }
    Ok(&q * fmat * q.adjoint())
}

/// Connected components of the symmetric sparsity pattern, each sorted.
fn decoupled_blocks(a: &CMatrix) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut head = 0;
        while head < comp.len() {
            let i = comp[head];
            head += 1;
            for j in 0..n {
                if !seen[j] && (a[(i, j)] != Complex64::new(0.0, 0.0) || a[(j, i)] != Complex64::new(0.0, 0.0)) {
                    seen[j] = true;
                    comp.push(j);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn matrix_function(f: ScalarFn, a: &CMatrix) -> Result<CMatrix> {
    let n = ensure_square(a)?;
    ensure_finite(a, "matrix function argument")?;
    let mut out = zeros(n, n);
    for comp in decoupled_blocks(a) {
        let sub = CMatrix::from_fn(comp.len(), comp.len(), |i, j| a[(comp[i], comp[j])]);
        let fsub = schur_parlett(&f, &sub)?;
        for (i, &gi) in comp.iter().enumerate() {
            for (j, &gj) in comp.iter().enumerate() {
                out[(gi, gj)] = fsub[(i, j)];
            }
        }
    }
    ensure_finite(&out, "matrix function result")?;
    Ok(out)
}

/// `exp(2πi Θ)`.
pub fn exp_2pii(theta: &CMatrix) -> Result<CMatrix> {
    matrix_function(ScalarFn::Exp2Pii, theta)
}

/// `φ(Θ)` for the entire function `φ(z) = (e^{2πiz} − 1)/z`.
pub fn phi_matrix(theta: &CMatrix) -> Result<CMatrix> {
    matrix_function(ScalarFn::Phi, theta)
}

/// The logarithm `Θ` of `M` with `exp(2πiΘ) = M` and spectrum in the strip of `domain`.
pub fn principal_log_over_2pii(m: &CMatrix, domain: FundamentalDomain) -> Result<CMatrix> {
    let n = ensure_square(m)?;
    ensure_finite(m, "logarithm argument")?;
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    ensure_invertible(m, DEFAULT_RANK_TOL)?;
    let theta = matrix_function(ScalarFn::Log(domain), m)?;
    let back = exp_2pii(&theta)?;
    let residual = frob_diff(&back, m) / frob(m);
    if residual > LOG_RESIDUAL_TOL {
        return Err(Error::Inaccurate {
            residual,
            condition: log_condition_estimate(m),
        });
    }
    Ok(theta)
}

/// Ratio of the off-diagonal Schur mass to the smallest eigenvalue gap.
fn log_condition_estimate(m: &CMatrix) -> f64 {
    let (_, t) = schur(m);
    let n = t.nrows();
    let mut gap = f64::INFINITY;
    let mut off = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            gap = gap.min((t[(i, i)] - t[(j, j)]).norm());
            off += t[(i, j)].norm_sqr();
        }
    }
    off.sqrt() / gap.max(f64::MIN_POSITIVE)
}
