use super::iso::{isomorphic_presentations, Isomorphism};
use super::meataxe::simple_submodule;
use super::presentation::LinearPresentation;
use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::hypercube::{HypercubeObject, SubspaceSplit};
use crate::linalg::{self, hstack, identity, zeros, CMatrix};

#[derive(Debug, Clone)]
pub struct JordanHolderReport<T> {
    /// Composition series of the input, graded `0, 1, …, len`.
    pub filtration: Filtration,
    /// Successive quotients, bottom first.
    pub series: Vec<T>,
    /// Isomorphism classes of the factors with multiplicities, in order of first appearance.
    pub factors: Vec<(T, usize)>,
    pub dimension_vector: Vec<usize>,
}

impl<T: HypercubeObject> JordanHolderReport<T> {
    /// Sum of multiplicity × factor dimension vector.
    pub fn factor_dimension_sum(&self) -> Vec<usize> {
        let mut out = vec![0; self.dimension_vector.len()];
        for (f, m) in &self.factors {
            for (o, d) in out.iter_mut().zip(f.cube().dimension_vector()) {
                *o += m * d;
            }
        }
        out
    }
}

fn presentation<T: HypercubeObject>(x: &T) -> Result<LinearPresentation> {
    LinearPresentation::from_cube(x.cube(), T::KIND)
}

/// Composition series by repeatedly splitting off a simple sub-object of the
/// current quotient. Bases are tracked in the coordinates of the input.
pub fn jordan_holder<T: HypercubeObject>(obj: &T, seed: u64, tol: f64) -> Result<JordanHolderReport<T>> {
    let cube = obj.cube();
    cube.check_shapes()?;
    let mut quotient = cube.clone();
    let mut coords: Vec<CMatrix> = cube.dims().iter().map(|&d| identity(d)).collect();
    let mut accumulated: Vec<CMatrix> = cube.dims().iter().map(|&d| zeros(d, 0)).collect();
    let mut chain = Vec::new();
    let mut series = Vec::new();
    let mut step = 0u64;
    while !quotient.is_zero() {
        let bases = simple_submodule(
            &quotient,
            T::KIND,
            seed.wrapping_add(step.wrapping_mul(0x9e37_79b9)),
            tol,
        )?;
        let split = SubspaceSplit::new(&quotient, &bases, linalg::DEFAULT_RANK_TOL)?;
        let factor = split.sub(&quotient)?;
        if factor.is_zero() {
            return Err(Error::Inconclusive("simple sub-object search returned zero".into()));
        }
        series.push(T::from_cube(factor)?);
        for u in 0..coords.len() {
            accumulated[u] = hstack(&accumulated[u], &(&coords[u] * &split.sub[u]));
            coords[u] = &coords[u] * &split.complement[u];
        }
        quotient = split.quotient(&quotient)?;
        chain.push(accumulated.clone());
        step += 1;
    }
    chain.pop();
    let filtration = Filtration::from_chain(cube, chain);

    let mut factors: Vec<(T, usize)> = Vec::new();
    let mut presentations: Vec<LinearPresentation> = Vec::new();
    for f in &series {
        let p = presentation(f)?;
        let mut found = false;
        for (i, q) in presentations.iter().enumerate() {
            if let Isomorphism::Yes(_) = isomorphic_presentations(&p, q, seed, tol)? {
                factors[i].1 += 1;
                found = true;
                break;
            }
        }
        if !found {
            presentations.push(p);
            factors.push((f.clone(), 1));
        }
    }
    Ok(JordanHolderReport {
        filtration,
        series,
        factors,
        dimension_vector: cube.dimension_vector(),
    })
}

/// Direct sum of the composition factors (a representative of the
/// S-equivalence class).
pub fn semisimplify<T: HypercubeObject>(obj: &T, seed: u64, tol: f64) -> Result<T> {
    let report = jordan_holder(obj, seed, tol)?;
    let mut cube = crate::hypercube::Hypercube::zero(*obj.cube().ctx(), vec![0; obj.cube().dims().len()])?;
    for f in &report.series {
        cube = cube.direct_sum(f.cube())?;
    }
    T::from_cube(cube)
}
