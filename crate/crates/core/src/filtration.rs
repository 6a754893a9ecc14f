//! Exhaustive filtrations by sub-objects and the one-parameter degeneration
//! they induce.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hypercube::{Hypercube, ObjectKind, SubspaceSplit};
use crate::linalg::{self, frob, hstack, identity, zeros, CMatrix};
use crate::stratum::StratumIndex;

/// `0 = F_{p_0} ⊆ F_{p_1} ⊆ … ⊆ F_{p_m} = W` at every node, with integer grades.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    grades: Vec<i64>,
    /// `spaces[i][mask]`: spanning columns of `F_{grades[i]}` at that node.
    spaces: Vec<Vec<CMatrix>>,
}

/// Orthonormal basis adapted to a filtration, with the grade of each column.
#[derive(Debug, Clone)]
pub struct AdaptedBasis {
    pub basis: CMatrix,
    pub grades: Vec<i64>,
}

impl Filtration {
    pub fn new(grades: Vec<i64>, spaces: Vec<Vec<CMatrix>>) -> Result<Self> {
        if grades.is_empty() || grades.len() != spaces.len() {
            return Err(Error::InvalidFiltration(format!(
                "{} grades for {} subspace families",
                grades.len(),
                spaces.len()
            )));
        }
        if grades.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidFiltration("grades must be strictly increasing".into()));
        }
        Ok(Self { grades, spaces })
    }

    /// `0 ⊂ W` with grades `0, 1`.
    pub fn trivial(cube: &Hypercube) -> Self {
        let dims = cube.dims();
        Self {
            grades: vec![0, 1],
            spaces: vec![
                dims.iter().map(|&n| zeros(n, 0)).collect(),
                dims.iter().map(|&n| identity(n)).collect(),
            ],
        }
    }

    /// `0 ⊂ F ⊂ W` with grades `0, 1, 2`.
    pub fn two_step(cube: &Hypercube, sub: Vec<CMatrix>) -> Self {
        let dims = cube.dims();
        Self {
            grades: vec![0, 1, 2],
            spaces: vec![
                dims.iter().map(|&n| zeros(n, 0)).collect(),
                sub,
                dims.iter().map(|&n| identity(n)).collect(),
            ],
        }
    }

    /// Filtration from a chain of nested subspace families, graded `0, 1, …`;
    /// the zero and full steps are added when missing.
    pub fn from_chain(cube: &Hypercube, chain: Vec<Vec<CMatrix>>) -> Self {
        let dims = cube.dims();
        let mut spaces = vec![dims.iter().map(|&n| zeros(n, 0)).collect::<Vec<_>>()];
        spaces.extend(chain);
        spaces.push(dims.iter().map(|&n| identity(n)).collect());
        let grades = (0..spaces.len() as i64).collect();
        Self { grades, spaces }
    }

    pub fn grades(&self) -> &[i64] {
        &self.grades
    }

    /// Spanning columns of `F_p` at `node` for the `i`-th grade.
    pub fn space(&self, i: usize, node: StratumIndex) -> &CMatrix {
        &self.spaces[i][node.index()]
    }

    pub fn len(&self) -> usize {
        self.grades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grades.is_empty()
    }

    /// Checks exhaustiveness, nesting and invariance of every step.
    pub fn validate(&self, cube: &Hypercube, kind: ObjectKind, tol: f64, rank_tol: f64) -> Result<()> {
        let nodes = cube.ctx().node_count();
        for (i, family) in self.spaces.iter().enumerate() {
            if family.len() != nodes {
                return Err(Error::InvalidFiltration(format!(
                    "grade {} has {} node subspaces, expected {nodes}",
                    self.grades[i],
                    family.len()
                )));
            }
            for (idx, b) in family.iter().enumerate() {
                if b.nrows() != cube.dims()[idx] {
                    return Err(Error::InvalidFiltration(format!(
                        "grade {} at {}: {} rows, node dimension {}",
                        self.grades[i],
                        StratumIndex::from_mask(idx as u32),
                        b.nrows(),
                        cube.dims()[idx]
                    )));
                }
            }
        }
        let first = &self.spaces[0];
        let last = &self.spaces[self.spaces.len() - 1];
        for idx in 0..nodes {
            if linalg::rank_tol(&first[idx], rank_tol) != 0 {
                return Err(Error::InvalidFiltration("lowest step must be zero".into()));
            }
            if linalg::rank_tol(&last[idx], rank_tol) != cube.dims()[idx] {
                return Err(Error::InvalidFiltration("highest step must be the whole object".into()));
            }
        }
        for i in 0..self.spaces.len() {
            let split = SubspaceSplit::new(cube, &self.spaces[i], rank_tol)?;
            split
                .check_invariant(cube, kind, tol)
                .map_err(|e| Error::InvalidFiltration(format!("grade {}: {e}", self.grades[i])))?;
            if i + 1 < self.spaces.len() {
                let next = SubspaceSplit::new(cube, &self.spaces[i + 1], rank_tol)?;
                for idx in 0..nodes {
                    let u = &split.sub[idx];
                    let v = &next.sub[idx];
                    let leak = frob(&(u - v * (v.adjoint() * u)));
                    if leak > tol.max(rank_tol * 1e-2) {
                        return Err(Error::InvalidFiltration(format!(
                            "grade {} not contained in grade {} at {} (residual {leak:.3e})",
                            self.grades[i],
                            self.grades[i + 1],
                            StratumIndex::from_mask(idx as u32)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Unitary basis per node whose leading columns span each step.
    pub fn adapted_bases(&self, cube: &Hypercube, rank_tol: f64) -> Vec<AdaptedBasis> {
        (0..cube.ctx().node_count())
            .map(|idx| {
                let n = cube.dims()[idx];
                let mut basis = zeros(n, 0);
                let mut grades = Vec::new();
                for (i, family) in self.spaces.iter().enumerate() {
                    let step = linalg::range_basis(&family[idx], rank_tol);
                    let residual = &step - &basis * (basis.adjoint() * &step);
                    let fresh = linalg::range_basis(&residual, rank_tol);
                    // Range of the residual can pick up noise directions when
                    // the step is nearly contained; cap by the dimension gain.
                    let gain = step.ncols().saturating_sub(basis.ncols()).min(fresh.ncols());
                    let fresh = fresh.columns(0, gain).into_owned();
                    grades.extend(std::iter::repeat_n(self.grades[i], fresh.ncols()));
                    basis = hstack(&basis, &fresh);
                }
                AdaptedBasis { basis, grades }
            })
            .collect()
    }
}

/// The `τ`-fibre of the Rees-type family attached to a filtration.
///
/// In an adapted basis each block of a structural map carrying grade `q` into
/// grade `p ≤ q` is multiplied by `τ^{q−p}`; the result is transported back to
/// the original basis. At `τ = 1` this is the input, at `τ = 0` the associated
/// graded object, and for `τ ≠ 0` it is conjugate to the input by
/// `diag(τ^{-grade})`.
pub fn degenerate(
    cube: &Hypercube,
    kind: ObjectKind,
    filtration: &Filtration,
    tau: Complex64,
    tol: f64,
    rank_tol: f64,
) -> Result<Hypercube> {
    filtration.validate(cube, kind, tol, rank_tol)?;
    let bases = filtration.adapted_bases(cube, rank_tol);
    for (idx, b) in bases.iter().enumerate() {
        if b.basis.ncols() != cube.dims()[idx] {
            return Err(Error::InvalidFiltration(format!(
                "adapted basis at {} has {} columns for dimension {}",
                StratumIndex::from_mask(idx as u32),
                b.basis.ncols(),
                cube.dims()[idx]
            )));
        }
    }
    cube.map_structure(cube.dims().to_vec(), |label, g| {
        let src = &bases[label.source().index()];
        let dst = &bases[label.target().index()];
        let mut local = dst.basis.adjoint() * g * &src.basis;
        for i in 0..local.nrows() {
            for j in 0..local.ncols() {
                let gap = src.grades[j] - dst.grades[i];
                local[(i, j)] = if gap < 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    local[(i, j)] * tau.powi(gap as i32)
                };
            }
        }
        Ok(&dst.basis * local * src.basis.adjoint())
    })
}

/// The intertwiner `diag(τ^{-grade})` (expressed in the original basis) from
/// the input to its `τ`-fibre, `τ ≠ 0`.
pub fn degeneration_intertwiner(
    cube: &Hypercube,
    filtration: &Filtration,
    tau: Complex64,
    rank_tol: f64,
) -> Result<Vec<CMatrix>> {
    if tau.norm() == 0.0 {
        return Err(Error::InvalidParams("no intertwiner at tau = 0".into()));
    }
    Ok(filtration
        .adapted_bases(cube, rank_tol)
        .into_iter()
        .map(|b| {
            let d: Vec<Complex64> = b.grades.iter().map(|&g| tau.powi(-(g as i32))).collect();
            &b.basis * linalg::diag(&d) * b.basis.adjoint()
        })
        .collect())
}
