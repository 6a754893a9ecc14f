//! Simplicity testing over ℂ in the style of the Norton irreducibility test.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::presentation::{generated_submodule, random_element, LinearPresentation};
use crate::error::{Error, Result};
use crate::hypercube::{Hypercube, ObjectKind, SubspaceSplit};
use crate::linalg::{self, frob, identity, CMatrix};

/// Random algebra elements tried before giving up (or falling back).
const ROUNDS: usize = 24;
/// Eigenvalues tried per random element, most isolated first.
const CANDIDATES: usize = 3;
/// Largest total dimension handled by the exhaustive eigenvector scan.
pub const FALLBACK_MAX_DIM: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub enum Simplicity {
    Simple,
    /// Orthonormal bases of a proper nonzero sub-object, one per node.
    NotSimple(Vec<CMatrix>),
    Inconclusive(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimplicityStatus {
    Simple,
    NotSimple,
    Inconclusive,
}

impl Simplicity {
    pub fn status(&self) -> SimplicityStatus {
        match self {
            Simplicity::Simple => SimplicityStatus::Simple,
            Simplicity::NotSimple(_) => SimplicityStatus::NotSimple,
            Simplicity::Inconclusive(_) => SimplicityStatus::Inconclusive,
        }
    }
}

fn spin_dim(bases: &[CMatrix]) -> usize {
    bases.iter().map(|b| b.ncols()).sum()
}

fn spin_vector(p: &LinearPresentation, v: &CMatrix, tol: f64) -> Result<Vec<CMatrix>> {
    let seeds: Vec<(usize, CMatrix)> = p.split(v).into_iter().enumerate().collect();
    generated_submodule(p, &seeds, tol)
}

/// Sub-object annihilated by a sub-object of the dual presentation.
fn annihilator(dual_sub: &[CMatrix], tol: f64) -> Vec<CMatrix> {
    dual_sub
        .iter()
        .map(|d| {
            if d.ncols() == 0 {
                identity(d.nrows())
            } else {
                linalg::kernel_basis(&d.transpose(), tol)
            }
        })
        .collect()
}

/// Eigenvalues of a node-diagonal element, most isolated first.
fn isolated_eigenvalues(p: &LinearPresentation, z: &CMatrix) -> Result<Vec<(num_complex::Complex64, f64)>> {
    let mut ev = Vec::new();
    for (u, off) in p.offsets().into_iter().enumerate() {
        let d = p.nodes[u].1;
        if d > 0 {
            ev.extend(linalg::eigenvalues(&z.view((off, off), (d, d)).into_owned())?);
        }
    }
    let mut out: Vec<_> = ev
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let gap = ev
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &m)| (l - m).norm())
                .fold(f64::INFINITY, f64::min);
            (l, gap)
        })
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(out)
}

/// Randomized simplicity test, deterministic for a given `seed`.
///
/// For a random algebra element `z` and eigenvalue `λ`, a kernel vector of
/// `z − λ` is spun up in the presentation and one of `(z − λ)ᵀ` in its dual.
/// A proper result is a witness; two full results with nullity one prove
/// simplicity. Small objects fall back to spinning every eigenvector of a
/// random element with simple spectrum.
pub fn is_simple(p: &LinearPresentation, seed: u64, tol: f64) -> Result<Simplicity> {
    p.check()?;
    let n = p.total_dim();
    if n == 0 {
        return Err(Error::ZeroObject);
    }
    if n == 1 {
        return Ok(Simplicity::Simple);
    }
    let dual = p.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ROUNDS {
        let z = random_element(p, &mut rng);
        let scale = frob(&z).max(1.0);
        for &(lambda, _) in isolated_eigenvalues(p, &z)?.iter().take(CANDIDATES) {
            let shifted = &z - identity(n) * lambda;
            let ker = linalg::kernel_basis(&shifted, tol);
            if ker.ncols() == 0 || frob(&(&shifted * &ker)) > tol * scale * 10.0 {
                continue;
            }
            for i in 0..ker.ncols() {
                let sub = spin_vector(p, &ker.columns(i, 1).into_owned(), tol)?;
                if spin_dim(&sub) < n {
                    return Ok(Simplicity::NotSimple(sub));
                }
            }
            let dker = linalg::kernel_basis(&shifted.transpose(), tol);
            for i in 0..dker.ncols() {
                let dsub = spin_vector(&dual, &dker.columns(i, 1).into_owned(), tol)?;
                if spin_dim(&dsub) < n {
                    return Ok(Simplicity::NotSimple(annihilator(&dsub, tol)));
                }
            }
            if ker.ncols() == 1 && dker.ncols() == 1 {
                return Ok(Simplicity::Simple);
            }
        }
    }
    if n <= FALLBACK_MAX_DIM {
        return exhaustive(p, &mut rng, tol);
    }
    Ok(Simplicity::Inconclusive(format!(
        "no random element with a simple eigenvalue decided the test after {ROUNDS} rounds"
    )))
}

/// Every proper sub-object is invariant under `z` and so contains one of its
/// eigenvectors; with simple spectrum there are only `n` lines to try.
fn exhaustive(p: &LinearPresentation, rng: &mut ChaCha8Rng, tol: f64) -> Result<Simplicity> {
    let n = p.total_dim();
    let eye = identity(n);
    for i in 0..n {
        let sub = spin_vector(p, &eye.columns(i, 1).into_owned(), tol)?;
        if spin_dim(&sub) < n {
            return Ok(Simplicity::NotSimple(sub));
        }
    }
    for _ in 0..ROUNDS {
        let z = random_element(p, rng);
        let ev = isolated_eigenvalues(p, &z)?;
        let scale = frob(&z).max(1.0);
        let simple_spectrum = ev.iter().all(|&(_, gap)| gap > 1e-6 * scale);
        for &(lambda, _) in &ev {
            let ker = linalg::kernel_basis(&(&z - identity(n) * lambda), tol);
            for i in 0..ker.ncols() {
                let sub = spin_vector(p, &ker.columns(i, 1).into_owned(), tol)?;
                if spin_dim(&sub) < n {
                    return Ok(Simplicity::NotSimple(sub));
                }
            }
        }
        if simple_spectrum {
            return Ok(Simplicity::Simple);
        }
    }
    Ok(Simplicity::Inconclusive(
        "no random element with simple spectrum found for the exhaustive scan".into(),
    ))
}

/// Orthonormal bases (in the coordinates of `cube`) of a simple sub-object,
/// found by descending through witnesses.
pub(crate) fn simple_submodule(cube: &Hypercube, kind: ObjectKind, seed: u64, tol: f64) -> Result<Vec<CMatrix>> {
    let p = LinearPresentation::from_cube(cube, kind)?;
    match is_simple(&p, seed, tol)? {
        Simplicity::Simple => Ok(cube.dims().iter().map(|&d| identity(d)).collect()),
        Simplicity::NotSimple(witness) => {
            let split = SubspaceSplit::new(cube, &witness, linalg::DEFAULT_RANK_TOL)?;
            let sub = split.sub(cube)?;
            let inner = simple_submodule(&sub, kind, seed.wrapping_add(1), tol)?;
            Ok(split.sub.iter().zip(inner).map(|(outer, b)| outer * b).collect())
        }
        Simplicity::Inconclusive(msg) => Err(Error::Inconclusive(msg)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;
    use crate::predmod::{Direction, PreDModule};
    use crate::stratum::PolydiskContext;

    fn pres(e: &PreDModule) -> LinearPresentation {
        LinearPresentation::from_cube(e.cube(), ObjectKind::PreDModule).unwrap()
    }

    fn ctx(r: usize) -> PolydiskContext {
        PolydiskContext::with_multiplicity(r).unwrap()
    }

    #[test]
    fn spec_examples() {
        let k = PreDModule::constant(ctx(1), real(0.3)).unwrap();
        assert_eq!(is_simple(&pres(&k), 1, 1e-8).unwrap(), Simplicity::Simple);
        let d = PreDModule::delta(ctx(1)).unwrap();
        assert_eq!(is_simple(&pres(&d), 1, 1e-8).unwrap(), Simplicity::Simple);
        let sum = d.direct_sum(&k).unwrap();
        match is_simple(&pres(&sum), 1, 1e-8).unwrap() {
            Simplicity::NotSimple(w) => {
                let dim = spin_dim(&w);
                assert!(dim > 0 && dim < 3);
            }
            other => panic!("{other:?}"),
        }
        let zero = PreDModule::zero(ctx(1), vec![0, 0]).unwrap();
        assert!(matches!(is_simple(&pres(&zero), 1, 1e-8), Err(Error::ZeroObject)));
    }

    #[test]
    fn constant_zero_is_not_simple() {
        let k = PreDModule::constant(ctx(1), real(0.0)).unwrap();
        assert!(matches!(
            is_simple(&pres(&k), 3, 1e-8).unwrap(),
            Simplicity::NotSimple(_)
        ));
    }

    #[test]
    fn extension_is_not_simple() {
        for r in 1..=2 {
            let e = PreDModule::extension(ctx(r), real(0.3)).unwrap();
            assert!(matches!(
                is_simple(&pres(&e), 5, 1e-8).unwrap(),
                Simplicity::NotSimple(_)
            ));
        }
    }

    #[test]
    fn catalogue_simples() {
        let types = [Direction::Free(real(0.4)), Direction::Point, Direction::Delta];
        for &a in &types {
            for &b in &types {
                for &c in &types {
                    let e = PreDModule::simple(ctx(3), &[a, b, c]).unwrap();
                    for seed in 0..3 {
                        assert_eq!(
                            is_simple(&pres(&e), seed, 1e-8).unwrap(),
                            Simplicity::Simple,
                            "{a:?} {b:?} {c:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn simple_submodule_descends() {
        let k = PreDModule::constant(ctx(2), real(0.3)).unwrap();
        let d = PreDModule::delta(ctx(2)).unwrap();
        let sum = k.direct_sum(&d).unwrap().direct_sum(&k).unwrap();
        let bases = simple_submodule(sum.cube(), ObjectKind::PreDModule, 9, 1e-8).unwrap();
        let (sub, _) = sum.sub_quotient(&bases, 1e-8).unwrap();
        assert_eq!(is_simple(&pres(&sub), 0, 1e-8).unwrap(), Simplicity::Simple);
    }
}
