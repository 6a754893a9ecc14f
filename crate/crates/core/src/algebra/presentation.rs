use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hypercube::{Hypercube, MapRole, ObjectKind};
use crate::linalg::{self, frob, zeros, CMatrix};
use crate::stratum::StratumIndex;

/// One structural map `W_source → W_target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub label: String,
    pub source: usize,
    pub target: usize,
    pub matrix: CMatrix,
}

/// A quiver representation: node spaces plus generating maps. Sub-objects of
/// a hypercube object are exactly the subrepresentations of its presentation.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPresentation {
    pub nodes: Vec<(String, usize)>,
    pub generators: Vec<Generator>,
}

impl LinearPresentation {
    pub fn new(nodes: Vec<(String, usize)>, generators: Vec<Generator>) -> Result<Self> {
        let p = Self { nodes, generators };
        p.check()?;
        Ok(p)
    }

    /// Nodes indexed by subset mask. Verdier presentations also carry the
    /// inverse monodromies so that closure under them is enforced.
    pub fn from_cube(cube: &Hypercube, kind: ObjectKind) -> Result<Self> {
        cube.check_shapes()?;
        let nodes = (0..cube.ctx().node_count())
            .map(|m| {
                let a = StratumIndex::from_mask(m as u32);
                (a.label(), cube.dim(a))
            })
            .collect();
        let mut generators = Vec::new();
        for label in cube.labels() {
            let matrix = cube.get(label).clone();
            if kind == ObjectKind::VerdierObject && label.role == MapRole::Loop {
                generators.push(Generator {
                    label: format!("{}^-1", label.display(kind)),
                    source: label.source().index(),
                    target: label.target().index(),
                    matrix: linalg::inverse(&matrix)?,
                });
            }
            generators.push(Generator {
                label: label.display(kind),
                source: label.source().index(),
                target: label.target().index(),
                matrix,
            });
        }
        Self::new(nodes, generators)
    }

    pub fn check(&self) -> Result<()> {
        for g in &self.generators {
            let (Some(src), Some(dst)) = (self.nodes.get(g.source), self.nodes.get(g.target)) else {
                return Err(Error::Malformed(format!(
                    "generator {} refers to a missing node",
                    g.label
                )));
            };
            if g.matrix.shape() != (dst.1, src.1) {
                return Err(Error::Malformed(format!(
                    "generator {} has shape {:?}, expected {:?}",
                    g.label,
                    g.matrix.shape(),
                    (dst.1, src.1)
                )));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.1).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.nodes.iter().map(|n| n.1).sum()
    }

    /// Start of each node's block in the total space `⊕ W_u`.
    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut acc = 0;
        for n in &self.nodes {
            out.push(acc);
            acc += n.1;
        }
        out
    }

    /// The dual representation: every map transposed and reversed.
    pub fn transpose(&self) -> LinearPresentation {
        LinearPresentation {
            nodes: self.nodes.clone(),
            generators: self
                .generators
                .iter()
                .map(|g| Generator {
                    label: format!("{}^T", g.label),
                    source: g.target,
                    target: g.source,
                    matrix: g.matrix.transpose(),
                })
                .collect(),
        }
    }

    /// A generator as an operator on the total space.
    pub(crate) fn embed(&self, g: &Generator, offsets: &[usize]) -> CMatrix {
        let n = self.total_dim();
        let mut out = zeros(n, n);
        out.view_mut((offsets[g.target], offsets[g.source]), g.matrix.shape())
            .copy_from(&g.matrix);
        out
    }

    /// Splits a total-space vector into per-node pieces.
    pub(crate) fn split(&self, v: &CMatrix) -> Vec<CMatrix> {
        let offsets = self.offsets();
        self.nodes
            .iter()
            .zip(offsets)
            .map(|(n, off)| v.rows(off, n.1).into_owned())
            .collect()
    }
}

pub(crate) fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Random element of the path algebra, projected to its node-diagonal part
/// `Σ e_u z e_u` (each `e_u` is itself in the algebra).
/// Generators below this fraction of the largest one are treated as zero.
const NOISE_FLOOR: f64 = 1e-10;

pub(crate) fn random_element(p: &LinearPresentation, rng: &mut ChaCha8Rng) -> CMatrix {
    let n = p.total_dim();
    let offsets = p.offsets();
    let norms: Vec<f64> = p.generators.iter().map(|g| frob(&g.matrix)).collect();
    let floor = NOISE_FLOOR * norms.iter().copied().fold(1.0, f64::max);
    let ops: Vec<CMatrix> = p
        .generators
        .iter()
        .zip(&norms)
        .filter(|&(_, &norm)| norm > floor)
        .map(|(g, &norm)| p.embed(g, &offsets) / Complex64::new(norm, 0.0))
        .collect();
    let combo = |rng: &mut ChaCha8Rng| {
        let mut out = zeros(n, n);
        for (u, &(_, d)) in p.nodes.iter().enumerate() {
            let c = random_complex(rng);
            for i in 0..d {
                out[(offsets[u] + i, offsets[u] + i)] += c;
            }
        }
        for op in &ops {
            out += op * random_complex(rng);
        }
        out
    };
    let mut z = zeros(n, n);
    for length in 1..=3 {
        let mut word = combo(rng);
        for _ in 1..length {
            word = &word * combo(rng);
        }
        z += word * random_complex(rng);
    }
    let mut out = zeros(n, n);
    for (u, &(_, d)) in p.nodes.iter().enumerate() {
        let o = offsets[u];
        out.view_mut((o, o), (d, d)).copy_from(&z.view((o, o), (d, d)));
    }
    out
}

/// Smallest invariant family of subspaces containing the seeds.
///
/// A candidate direction is kept when its component outside the current span
/// exceeds `tol` times the norm of the map that produced it; the returned
/// bases are orthonormal.
pub fn generated_submodule(p: &LinearPresentation, seeds: &[(usize, CMatrix)], tol: f64) -> Result<Vec<CMatrix>> {
    p.check()?;
    let dims = p.dims();
    let mut bases: Vec<CMatrix> = dims.iter().map(|&d| zeros(d, 0)).collect();
    let mut queue: std::collections::VecDeque<(usize, usize)> = Default::default();
    let push = |bases: &mut Vec<CMatrix>,
                queue: &mut std::collections::VecDeque<(usize, usize)>,
                node: usize,
                w: &CMatrix,
                scale: f64| {
        let b = &bases[node];
        let mut r = w - b * (b.adjoint() * w);
        r -= b * (b.adjoint() * &r);
        let norm = frob(&r);
        if norm > tol * scale && norm > 0.0 && b.ncols() < dims[node] {
            let col = r / Complex64::new(norm, 0.0);
            bases[node] = linalg::hstack(b, &col);
            queue.push_back((node, bases[node].ncols() - 1));
        }
    };
    for (node, v) in seeds {
        if *node >= dims.len() || v.shape() != (dims[*node], 1) {
            return Err(Error::ShapeMismatch(format!(
                "seed vector of shape {:?} at node {node}",
                v.shape()
            )));
        }
        let scale = frob(v);
        if scale > 0.0 {
            push(&mut bases, &mut queue, *node, v, scale);
        }
    }
    let norms: Vec<f64> = p.generators.iter().map(|g| frob(&g.matrix)).collect();
    // Noise-level generators must not be rescaled into real directions.
    let global = norms.iter().copied().fold(1.0, f64::max);
    while let Some((node, col)) = queue.pop_front() {
        let u = bases[node].columns(col, 1).into_owned();
        for (g, &norm) in p.generators.iter().zip(&norms) {
            if g.source != node || norm <= tol * global {
                continue;
            }
            let w = &g.matrix * &u;
            push(&mut bases, &mut queue, g.target, &w, global);
        }
    }
    Ok(bases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;
    use crate::predmod::PreDModule;
    use crate::stratum::PolydiskContext;

    fn sum() -> LinearPresentation {
        let ctx = PolydiskContext::with_multiplicity(1).unwrap();
        let e = PreDModule::delta(ctx)
            .unwrap()
            .direct_sum(&PreDModule::constant(ctx, real(0.3)).unwrap())
            .unwrap();
        LinearPresentation::from_cube(e.cube(), ObjectKind::PreDModule).unwrap()
    }

    #[test]
    fn closure_examples() {
        let p = sum();
        let none = generated_submodule(&p, &[], 1e-10).unwrap();
        assert!(none.iter().all(|b| b.ncols() == 0));

        // Node {1} has basis (delta, constant); the delta vector is e1 there.
        let delta = CMatrix::from_column_slice(2, 1, &[real(1.0), real(0.0)]);
        let sub = generated_submodule(&p, &[(1, delta)], 1e-10).unwrap();
        assert_eq!(sub.iter().map(|b| b.ncols()).collect::<Vec<_>>(), vec![0, 1]);

        let generic = CMatrix::from_column_slice(1, 1, &[real(0.7)]);
        let sub = generated_submodule(&p, &[(0, generic)], 1e-10).unwrap();
        assert_eq!(sub.iter().map(|b| b.ncols()).collect::<Vec<_>>(), vec![1, 1]);
        assert!(sub[1][(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn verdier_presentation_has_inverses() {
        let v = crate::verdier::VerdierObject::nearby_vanishing(real(-1.0)).unwrap();
        let p = LinearPresentation::from_cube(v.cube(), ObjectKind::VerdierObject).unwrap();
        assert_eq!(p.generators.iter().filter(|g| g.label.ends_with("^-1")).count(), 2);
        assert_eq!(p.transpose().transpose(), {
            let mut q = p.clone();
            for g in &mut q.generators {
                g.label = format!("{}^T^T", g.label);
            }
            q
        });
    }
}
