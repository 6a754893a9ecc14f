use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::presentation::{random_complex, LinearPresentation};
use crate::error::{Error, Result};
use crate::linalg::{self, frob, zeros, CMatrix};

/// Random invertible candidates drawn from the homomorphism space.
const SAMPLES: usize = 16;
/// Matched random words compared by traces of powers.
const WORDS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum Isomorphism {
    /// Per-node intertwiner `X_u: W_u → W'_u`.
    Yes(Vec<CMatrix>),
    /// A separating invariant.
    No(String),
    ProbablyNot(String),
}

impl Isomorphism {
    pub fn is_yes(&self) -> bool {
        matches!(self, Isomorphism::Yes(_))
    }

    pub fn status(&self) -> &'static str {
        match self {
            Isomorphism::Yes(_) => "yes",
            Isomorphism::No(_) => "no",
            Isomorphism::ProbablyNot(_) => "probably-not",
        }
    }
}

fn check_matching(a: &LinearPresentation, b: &LinearPresentation) -> Result<()> {
    let same_shape = a.nodes.len() == b.nodes.len()
        && a.generators.len() == b.generators.len()
        && a.generators
            .iter()
            .zip(&b.generators)
            .all(|(g, h)| g.source == h.source && g.target == h.target);
    if same_shape {
        Ok(())
    } else {
        Err(Error::Incompatible("presentations have different quivers".into()))
    }
}

/// Node-diagonal random word with coefficients shared by both presentations.
fn matched_word(a: &LinearPresentation, b: &LinearPresentation, rng: &mut ChaCha8Rng) -> (CMatrix, CMatrix) {
    let n = a.total_dim();
    let offsets = a.offsets();
    let combo = |rng: &mut ChaCha8Rng| {
        let mut xa = zeros(n, n);
        let mut xb = zeros(n, n);
        for (u, &(_, d)) in a.nodes.iter().enumerate() {
            let c = random_complex(rng);
            for i in 0..d {
                xa[(offsets[u] + i, offsets[u] + i)] += c;
                xb[(offsets[u] + i, offsets[u] + i)] += c;
            }
        }
        for (g, h) in a.generators.iter().zip(&b.generators) {
            let c = random_complex(rng);
            xa += a.embed(g, &offsets) * c;
            xb += b.embed(h, &offsets) * c;
        }
        (xa, xb)
    };
    let (mut za, mut zb) = combo(rng);
    let (ya, yb) = combo(rng);
    za = &za * &ya + &ya;
    zb = &zb * &yb + &yb;
    (za, zb)
}

fn trace_invariant(a: &LinearPresentation, b: &LinearPresentation, rng: &mut ChaCha8Rng) -> Option<String> {
    let offsets = a.offsets();
    for w in 0..WORDS {
        let (za, zb) = matched_word(a, b, rng);
        for (u, &(ref label, d)) in a.nodes.iter().enumerate() {
            if d == 0 {
                continue;
            }
            let o = offsets[u];
            let ba = za.view((o, o), (d, d)).into_owned();
            let bb = zb.view((o, o), (d, d)).into_owned();
            let (mut pa, mut pb) = (ba.clone(), bb.clone());
            for power in 1..=d {
                let (ta, tb) = (pa.trace(), pb.trace());
                let scale = 1.0 + frob(&pa) + frob(&pb);
                if (ta - tb).norm() > 1e-6 * scale {
                    return Some(format!(
                        "trace of power {power} of random word {w} at node {label}: {ta} vs {tb}"
                    ));
                }
                pa = &pa * &ba;
                pb = &pb * &bb;
            }
        }
    }
    None
}

/// Orthonormal basis of the homomorphisms `a → b`, each as per-node blocks.
pub fn hom_space(a: &LinearPresentation, b: &LinearPresentation, tol: f64) -> Result<Vec<Vec<CMatrix>>> {
    check_matching(a, b)?;
    let (da, db) = (a.dims(), b.dims());
    let mut col_off = Vec::with_capacity(da.len());
    let mut unknowns = 0;
    for (x, y) in da.iter().zip(&db) {
        col_off.push(unknowns);
        unknowns += x * y;
    }
    if unknowns == 0 {
        return Ok(Vec::new());
    }
    // X_u is db[u] × da[u], stored column-major at col_off[u].
    let idx = |u: usize, i: usize, j: usize| col_off[u] + j * db[u] + i;
    let rows: usize = a.generators.iter().map(|g| db[g.target] * da[g.source]).sum();
    let mut system = zeros(rows.max(1), unknowns);
    let mut row = 0;
    // One global scale, never below 1, so that numerically zero maps stay zero.
    let scale = a
        .generators
        .iter()
        .chain(&b.generators)
        .map(|g| frob(&g.matrix))
        .fold(0.0, f64::max);
    let w = 1.0 / scale.max(1.0);
    for (g, h) in a.generators.iter().zip(&b.generators) {
        let (u, v) = (g.source, g.target);
        // (X_v G − H X_u)_{ij}
        for i in 0..db[v] {
            for j in 0..da[u] {
                for k in 0..da[v] {
                    system[(row, idx(v, i, k))] += g.matrix[(k, j)] * w;
                }
                for k in 0..db[u] {
                    system[(row, idx(u, k, j))] -= h.matrix[(i, k)] * w;
                }
                row += 1;
            }
        }
    }
    let kernel = linalg::kernel_basis_floor(&system, tol, 1.0);
    Ok(kernel
        .column_iter()
        .map(|x| {
            (0..da.len())
                .map(|u| CMatrix::from_fn(db[u], da[u], |i, j| x[idx(u, i, j)]))
                .collect()
        })
        .collect())
}

/// Randomized isomorphism test, deterministic for a given `seed`.
pub fn isomorphic_presentations(
    a: &LinearPresentation,
    b: &LinearPresentation,
    seed: u64,
    tol: f64,
) -> Result<Isomorphism> {
    check_matching(a, b)?;
    a.check()?;
    b.check()?;
    if a.dims() != b.dims() {
        return Ok(Isomorphism::No(format!(
            "dimension vectors differ: {:?} vs {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if let Some(inv) = trace_invariant(a, b, &mut rng) {
        return Ok(Isomorphism::No(inv));
    }
    if a.total_dim() == 0 {
        return Ok(Isomorphism::Yes(a.dims().iter().map(|_| zeros(0, 0)).collect()));
    }
    let homs = hom_space(a, b, tol)?;
    if homs.is_empty() {
        return Ok(Isomorphism::No("no nonzero homomorphism".into()));
    }
    for _ in 0..SAMPLES {
        let coeffs: Vec<Complex64> = homs.iter().map(|_| random_complex(&mut rng)).collect();
        let x: Vec<CMatrix> = (0..a.nodes.len())
            .map(|u| {
                homs.iter()
                    .zip(&coeffs)
                    .fold(zeros(b.nodes[u].1, a.nodes[u].1), |acc, (h, c)| acc + &h[u] * *c)
            })
            .collect();
        if x.iter().all(|m| linalg::ensure_invertible(m, 1e-8).is_ok()) {
            return Ok(Isomorphism::Yes(x));
        }
    }
    Ok(Isomorphism::ProbablyNot(format!(
        "homomorphism space has dimension {} but no sampled element is invertible",
        homs.len()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::ObjectKind;
    use crate::linalg::{frob_diff, real};
    use crate::predmod::PreDModule;
    use crate::stratum::PolydiskContext;

    fn pres(e: &PreDModule) -> LinearPresentation {
        LinearPresentation::from_cube(e.cube(), ObjectKind::PreDModule).unwrap()
    }

    fn ctx(r: usize) -> PolydiskContext {
        PolydiskContext::with_multiplicity(r).unwrap()
    }

    #[test]
    fn conjugated_is_isomorphic() {
        let e = PreDModule::extension(ctx(2), real(0.3)).unwrap();
        let p = linalg::from_real_rows(2, 2, &[2.0, 1.0, -1.0, 3.0]);
        let f = e.conjugate(&vec![p; 4]).unwrap();
        match isomorphic_presentations(&pres(&e), &pres(&f), 4, 1e-8).unwrap() {
            Isomorphism::Yes(x) => {
                for g in pres(&e).generators.iter().zip(pres(&f).generators.iter()) {
                    let lhs = &x[g.0.target] * &g.0.matrix;
                    let rhs = &g.1.matrix * &x[g.0.source];
                    assert!(frob_diff(&lhs, &rhs) < 1e-9);
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn different_scalars_separated() {
        let a = PreDModule::constant(ctx(1), real(0.25)).unwrap();
        let b = PreDModule::constant(ctx(1), real(0.3)).unwrap();
        assert!(matches!(
            isomorphic_presentations(&pres(&a), &pres(&b), 1, 1e-8).unwrap(),
            Isomorphism::No(_)
        ));
    }

    #[test]
    fn extension_vs_split() {
        let e = PreDModule::extension(ctx(1), real(0.3)).unwrap();
        let k = PreDModule::constant(ctx(1), real(0.3)).unwrap();
        let split = k.direct_sum(&k).unwrap();
        let res = isomorphic_presentations(&pres(&e), &pres(&split), 2, 1e-8).unwrap();
        assert!(
            matches!(res, Isomorphism::No(_) | Isomorphism::ProbablyNot(_)),
            "{res:?}"
        );
    }

    #[test]
    fn dimension_vectors_separate() {
        let d = PreDModule::delta(ctx(1)).unwrap();
        let k = PreDModule::constant(ctx(1), real(0.3)).unwrap();
        assert!(matches!(
            isomorphic_presentations(&pres(&d), &pres(&k), 1, 1e-8).unwrap(),
            Isomorphism::No(_)
        ));
    }
}
