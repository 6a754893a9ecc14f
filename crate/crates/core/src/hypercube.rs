//! Hypercube storage shared by pre-D-modules and Verdier objects.
//!
//! Every node `A ⊆ {1,…,r}` carries a vector space `ℂ^{n_A}` and `r` commuting
//! endomorphisms (the residues `Θ` or the monodromies). Every pair `(A, k)`
//! with `k ∈ A` carries an arrow toward the deeper node, `W_{A∖k} → W_A`
//! (`t` or `C`), and one back, `W_A → W_{A∖k}` (`s` or `V`). The two object kinds
//! differ only in the relations tying the arrows to the loops.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, block_diag, frob, frob_diff, identity, zeros, CMatrix};
use crate::stratum::{enumerate_strata, PolydiskContext, StratumIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectKind {
    PreDModule,
    VerdierObject,
}

impl ObjectKind {
    pub fn name(self) -> &'static str {
        match self {
            ObjectKind::PreDModule => "pre-d-module",
            ObjectKind::VerdierObject => "verdier-object",
        }
    }

    pub fn loop_name(self) -> &'static str {
        match self {
            ObjectKind::PreDModule => "theta",
            ObjectKind::VerdierObject => "mono",
        }
    }

    pub fn up_name(self) -> &'static str {
        match self {
            ObjectKind::PreDModule => "t",
            ObjectKind::VerdierObject => "C",
        }
    }

    pub fn down_name(self) -> &'static str {
        match self {
            ObjectKind::PreDModule => "s",
            ObjectKind::VerdierObject => "V",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapRole {
    Loop,
    Up,
    Down,
}

/// Names one structural matrix of a hypercube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MapLabel {
    pub role: MapRole,
    pub node: StratumIndex,
    pub k: usize,
}

impl MapLabel {
    pub fn source(&self) -> StratumIndex {
        match self.role {
            MapRole::Loop | MapRole::Down => self.node,
            MapRole::Up => self.node.without(self.k),
        }
    }

    pub fn target(&self) -> StratumIndex {
        match self.role {
            MapRole::Loop | MapRole::Up => self.node,
            MapRole::Down => self.node.without(self.k),
        }
    }

    pub fn display(&self, kind: ObjectKind) -> String {
        match self.role {
            MapRole::Loop => format!("{}{}[{}]", kind.loop_name(), self.node.label(), self.k),
            MapRole::Up => format!("{}{}|{}", kind.up_name(), self.node.label(), self.k),
            MapRole::Down => format!("{}{}|{}", kind.down_name(), self.node.label(), self.k),
        }
    }
}

/// Common view of pre-D-modules and Verdier objects as hypercubes.
pub trait HypercubeObject: Clone + fmt::Debug {
    const KIND: ObjectKind;

    fn cube(&self) -> &Hypercube;

    /// Wraps a hypercube after a shape check; axioms are not checked.
    fn from_cube(cube: Hypercube) -> Result<Self>;

    fn validate(&self, tol: f64) -> Result<ValidationReport>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypercube {
    ctx: PolydiskContext,
    dims: Vec<usize>,
    loops: Vec<Vec<CMatrix>>,
    up: Vec<Vec<Option<CMatrix>>>,
    down: Vec<Vec<Option<CMatrix>>>,
}

impl Hypercube {
    /// All-zero structure with the given node dimensions (indexed by subset mask).
    pub fn zero(ctx: PolydiskContext, dims: Vec<usize>) -> Result<Self> {
        ctx.check()?;
        if dims.len() != ctx.node_count() {
            return Err(Error::Malformed(format!(
                "expected {} node dimensions, got {}",
                ctx.node_count(),
                dims.len()
            )));
        }
        let r = ctx.r();
        let mut loops = Vec::with_capacity(dims.len());
        let mut up = Vec::with_capacity(dims.len());
        let mut down = Vec::with_capacity(dims.len());
        for mask in 0..dims.len() {
            let a = StratumIndex::from_mask(mask as u32);
            let n = dims[mask];
            loops.push((0..r).map(|_| zeros(n, n)).collect());
            let mut u = Vec::with_capacity(r);
            let mut d = Vec::with_capacity(r);
            for k in 1..=r {
                if a.contains(k) {
                    let m = dims[a.without(k).index()];
                    u.push(Some(zeros(n, m)));
                    d.push(Some(zeros(m, n)));
                } else {
                    u.push(None);
                    d.push(None);
                }
            }
            up.push(u);
            down.push(d);
        }
        Ok(Self {
            ctx,
            dims,
            loops,
            up,
            down,
        })
    }

    /// Same dimension `n` at every node.
    pub fn constant_dims(ctx: PolydiskContext, n: usize) -> Result<Self> {
        Self::zero(ctx, vec![n; ctx.node_count()])
    }

    pub fn ctx(&self) -> &PolydiskContext {
        &self.ctx
    }

    pub fn dim(&self, a: StratumIndex) -> usize {
        self.dims[a.index()]
    }

    /// Dimensions indexed by subset mask.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Dimensions in stratum enumeration order.
    pub fn dimension_vector(&self) -> Vec<usize> {
        enumerate_strata(&self.ctx).iter().map(|a| self.dim(*a)).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    pub fn strata(&self) -> Vec<StratumIndex> {
        enumerate_strata(&self.ctx)
    }

    pub fn loop_map(&self, a: StratumIndex, k: usize) -> &CMatrix {
        &self.loops[a.index()][k - 1]
    }

    /// Arrow `W_{A∖k} → W_A`. Panics unless `k ∈ A`.
    pub fn up_map(&self, a: StratumIndex, k: usize) -> &CMatrix {
        self.up[a.index()][k - 1]
            .as_ref()
            .unwrap_or_else(|| panic!("no arrow at {a}|{k}: {k} not in {a}"))
    }

    /// Arrow `W_A → W_{A∖k}`. Panics unless `k ∈ A`.
    pub fn down_map(&self, a: StratumIndex, k: usize) -> &CMatrix {
        self.down[a.index()][k - 1]
            .as_ref()
            .unwrap_or_else(|| panic!("no arrow at {a}|{k}: {k} not in {a}"))
    }

    pub fn get(&self, label: MapLabel) -> &CMatrix {
        match label.role {
            MapRole::Loop => self.loop_map(label.node, label.k),
            MapRole::Up => self.up_map(label.node, label.k),
            MapRole::Down => self.down_map(label.node, label.k),
        }
    }

    pub fn expected_shape(&self, label: MapLabel) -> (usize, usize) {
        (self.dim(label.target()), self.dim(label.source()))
    }

    /// Replaces one structural matrix after checking its shape.
    pub fn set(&mut self, label: MapLabel, m: CMatrix) -> Result<()> {
        if label.k == 0 || label.k > self.ctx.r() || !self.ctx.contains_stratum(label.node) {
            return Err(Error::Malformed(format!("label {label:?} outside the context")));
        }
        if label.role != MapRole::Loop && !label.node.contains(label.k) {
            return Err(Error::Malformed(format!(
                "arrow key {}|{}: k not in A",
                label.node.label(),
                label.k
            )));
        }
        let expected = self.expected_shape(label);
        if m.shape() != expected {
            return Err(Error::Malformed(format!(
                "{:?} at {}: shape {:?}, expected {:?}",
                label.role,
                label.node.label(),
                m.shape(),
                expected
            )));
        }
        linalg::ensure_finite(&m, &format!("{:?} at {}", label.role, label.node.label()))?;
        let slot = label.k - 1;
        let idx = label.node.index();
        match label.role {
            MapRole::Loop => self.loops[idx][slot] = m,
            MapRole::Up => self.up[idx][slot] = Some(m),
            MapRole::Down => self.down[idx][slot] = Some(m),
        }
        Ok(())
    }

    /// All structural labels in a fixed order: per node (enumeration order),
    /// loops by direction, then up arrows, then down arrows.
    pub fn labels(&self) -> Vec<MapLabel> {
        let mut out = Vec::new();
        for a in self.strata() {
            for k in self.ctx.directions() {
                out.push(MapLabel {
                    role: MapRole::Loop,
                    node: a,
                    k,
                });
            }
            for k in a.elements() {
                out.push(MapLabel {
                    role: MapRole::Up,
                    node: a,
                    k,
                });
            }
            for k in a.elements() {
                out.push(MapLabel {
                    role: MapRole::Down,
                    node: a,
                    k,
                });
            }
        }
        out
    }

    /// Builds a new hypercube with `new_dims`, mapping every structural matrix through `f`.
    pub fn map_structure<F>(&self, new_dims: Vec<usize>, mut f: F) -> Result<Hypercube>
    where
        F: FnMut(MapLabel, &CMatrix) -> Result<CMatrix>,
    {
        let mut out = Hypercube::zero(self.ctx, new_dims)?;
        for label in self.labels() {
            let m = f(label, self.get(label))?;
            out.set(label, m)?;
        }
        Ok(out)
    }

    /// Consistency of shapes and finiteness (distinct from the axioms).
    pub fn check_shapes(&self) -> Result<()> {
        self.ctx.check()?;
        if self.dims.len() != self.ctx.node_count() {
            return Err(Error::Malformed("node count does not match context".into()));
        }
        for label in self.labels() {
            let m = self.get(label);
            if m.shape() != self.expected_shape(label) {
                return Err(Error::Malformed(format!(
                    "{:?} at {}|{}: shape {:?}, expected {:?}",
                    label.role,
                    label.node.label(),
                    label.k,
                    m.shape(),
                    self.expected_shape(label)
                )));
            }
            linalg::ensure_finite(m, &format!("{:?} at {}|{}", label.role, label.node.label(), label.k))?;
        }
        Ok(())
    }

    pub fn direct_sum(&self, other: &Hypercube) -> Result<Hypercube> {
        if self.ctx != other.ctx {
            return Err(Error::Incompatible(
                "direct sum of objects over different contexts".into(),
            ));
        }
        let dims = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        self.map_structure(dims, |label, m| Ok(block_diag(m, other.get(label))))
    }

    /// Change of basis: every map `G: W_u → W_v` becomes `P_v G P_u^{-1}`.
    pub fn conjugate(&self, per_node: &[CMatrix]) -> Result<Hypercube> {
        if per_node.len() != self.ctx.node_count() {
            return Err(Error::ShapeMismatch("one basis change per node required".into()));
        }
        let mut inverses = Vec::with_capacity(per_node.len());
        for (idx, p) in per_node.iter().enumerate() {
            if p.shape() != (self.dims[idx], self.dims[idx]) {
                return Err(Error::ShapeMismatch(format!(
                    "basis change at node {} has shape {:?}",
                    StratumIndex::from_mask(idx as u32),
                    p.shape()
                )));
            }
            inverses.push(linalg::inverse(p)?);
        }
        self.map_structure(self.dims.clone(), |label, m| {
            Ok(&per_node[label.target().index()] * m * &inverses[label.source().index()])
        })
    }

    /// Splits along per-node subspaces invariant under every structural map.
    ///
    /// The sub-object is expressed in an orthonormal basis of each subspace,
    /// the quotient in an orthonormal basis of the orthogonal complement.
    pub fn sub_quotient(
        &self,
        kind: ObjectKind,
        bases: &[CMatrix],
        tol: f64,
        rank_tol: f64,
    ) -> Result<(Hypercube, Hypercube)> {
        let split = SubspaceSplit::new(self, bases, rank_tol)?;
        split.check_invariant(self, kind, tol)?;
        Ok((split.sub(self)?, split.quotient(self)?))
    }
}

/// Orthonormal bases of per-node subspaces together with their complements.
#[derive(Debug, Clone)]
pub(crate) struct SubspaceSplit {
    pub(crate) sub: Vec<CMatrix>,
    pub(crate) complement: Vec<CMatrix>,
}

impl SubspaceSplit {
    pub(crate) fn new(cube: &Hypercube, bases: &[CMatrix], rank_tol: f64) -> Result<Self> {
        if bases.len() != cube.ctx.node_count() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} subspace bases, got {}",
                cube.ctx.node_count(),
                bases.len()
            )));
        }
        let mut sub = Vec::with_capacity(bases.len());
        let mut complement = Vec::with_capacity(bases.len());
        for (idx, b) in bases.iter().enumerate() {
            if b.nrows() != cube.dims[idx] {
                return Err(Error::ShapeMismatch(format!(
                    "subspace basis at {} has {} rows, node dimension is {}",
                    StratumIndex::from_mask(idx as u32),
                    b.nrows(),
                    cube.dims[idx]
                )));
            }
            let u = linalg::range_basis(b, rank_tol);
            complement.push(linalg::orthogonal_complement(&u, rank_tol));
            sub.push(u);
        }
        Ok(Self { sub, complement })
    }

    pub(crate) fn check_invariant(&self, cube: &Hypercube, kind: ObjectKind, tol: f64) -> Result<()> {
        for label in cube.labels() {
            let g = cube.get(label);
            let u_src = &self.sub[label.source().index()];
            let u_dst = &self.sub[label.target().index()];
            let image = g * u_src;
            let leak = &image - u_dst * (u_dst.adjoint() * &image);
            let residual = frob(&leak);
            if residual > tol * f64::max(1.0, frob(g)) {
                return Err(Error::NotInvariant {
                    generator: label.display(kind),
                    residual,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn sub(&self, cube: &Hypercube) -> Result<Hypercube> {
        let dims = self.sub.iter().map(|u| u.ncols()).collect();
        cube.map_structure(dims, |label, g| {
            Ok(self.sub[label.target().index()].adjoint() * g * &self.sub[label.source().index()])
        })
    }

    pub(crate) fn quotient(&self, cube: &Hypercube) -> Result<Hypercube> {
        let dims = self.complement.iter().map(|c| c.ncols()).collect();
        cube.map_structure(dims, |label, g| {
            Ok(self.complement[label.target().index()].adjoint() * g * &self.complement[label.source().index()])
        })
    }
}

/// One failed relation, with the node and directions involved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub axiom: &'static str,
    pub stratum: StratumIndex,
    pub indices: Vec<usize>,
    pub residual: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {} {:?}: residual {:.3e}",
            self.axiom,
            self.stratum.label(),
            self.indices,
            self.residual
        )
    }
}

/// Result of axiom validation; an empty violation list means valid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub kind: ObjectKind,
    pub tol: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.violations.iter().map(|v| v.residual).fold(0.0, f64::max)
    }

    pub(crate) fn into_result(self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(first) => Err(Error::InvalidObject {
                count: self.violations.len(),
                first: first.to_string(),
            }),
        }
    }
}

/// Names of the relations for one object kind.
pub(crate) struct AxiomNames {
    pub commuting: &'static str,
    pub shallow: &'static str,
    pub deep: &'static str,
    pub intertwine_up: &'static str,
    pub intertwine_down: &'static str,
}

/// Checks the relations common to both kinds.
///
/// With `offset_identity` the arrow composites must equal `loop − I`
/// (Verdier objects); otherwise they must equal the loop itself.
pub(crate) fn check_relations(cube: &Hypercube, names: &AxiomNames, offset_identity: bool, tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    let ctx = *cube.ctx();
    let mut push = |axiom: &'static str, stratum: StratumIndex, indices: Vec<usize>, residual: f64| {
        if residual > tol || residual.is_nan() {
            out.push(Violation {
                axiom,
                stratum,
                indices,
                residual,
            });
        }
    };
    let target = |m: &CMatrix| -> CMatrix {
        if offset_identity {
            m - identity(m.nrows())
        } else {
            m.clone()
        }
    };

    for a in cube.strata() {
        for j in 1..=ctx.r() {
            for k in j + 1..=ctx.r() {
                let x = cube.loop_map(a, j);
                let y = cube.loop_map(a, k);
                push(names.commuting, a, vec![j, k], frob_diff(&(x * y), &(y * x)));
            }
        }
        for k in a.elements() {
            let shallow = a.without(k);
            let up = cube.up_map(a, k);
            let down = cube.down_map(a, k);
            push(
                names.shallow,
                a,
                vec![k],
                frob_diff(&(down * up), &target(cube.loop_map(shallow, k))),
            );
            push(
                names.deep,
                a,
                vec![k],
                frob_diff(&(up * down), &target(cube.loop_map(a, k))),
            );
            for j in ctx.directions() {
                push(
                    names.intertwine_up,
                    a,
                    vec![k, j],
                    frob_diff(&(up * cube.loop_map(shallow, j)), &(cube.loop_map(a, j) * up)),
                );
                push(
                    names.intertwine_down,
                    a,
                    vec![k, j],
                    frob_diff(&(down * cube.loop_map(a, j)), &(cube.loop_map(shallow, j) * down)),
                );
            }
        }
        let elems = a.elements();
        for &k in &elems {
            for &l in &elems {
                if k == l {
                    continue;
                }
                let (ak, al) = (a.without(k), a.without(l));
                if k < l {
                    // I: up[A][k]·up[A∖k][ℓ] = up[A][ℓ]·up[A∖ℓ][k]
                    let lhs = cube.up_map(a, k) * cube.up_map(ak, l);
                    let rhs = cube.up_map(a, l) * cube.up_map(al, k);
                    push("diagram-I", a, vec![k, l], frob_diff(&lhs, &rhs));
                    // II: down[A∖ℓ][k]·down[A][ℓ] = down[A∖k][ℓ]·down[A][k]
                    let lhs = cube.down_map(al, k) * cube.down_map(a, l);
                    let rhs = cube.down_map(ak, l) * cube.down_map(a, k);
                    push("diagram-II", a, vec![k, l], frob_diff(&lhs, &rhs));
                }
                // III: up[A∖ℓ][k]·down[A∖k][ℓ] = down[A][ℓ]·up[A][k]
                let lhs = cube.up_map(al, k) * cube.down_map(ak, l);
                let rhs = cube.down_map(a, l) * cube.up_map(a, k);
                push("diagram-III", a, vec![k, l], frob_diff(&lhs, &rhs));
            }
        }
    }
    out
}

#[cfg(test)]
fn zero_bases(cube: &Hypercube) -> Vec<CMatrix> {
    cube.dims().iter().map(|&n| zeros(n, 0)).collect()
}
