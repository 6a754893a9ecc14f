//! Verdier objects: commuting invertible monodromies with canonical (`C`) and
//! variation (`V`) maps on the hypercube.
//!
//! Relations are `VC = Mono − 1` on the shallow node and `CV = Mono − 1` on the
//! deep one, the orientation under which `Mono = exp(2πiΘ)` makes the
//! Riemann–Hilbert formulas exact.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hypercube::{
    check_relations, AxiomNames, Hypercube, HypercubeObject, MapLabel, MapRole, ObjectKind, ValidationReport, Violation,
};
use crate::linalg::{self, commute_residual, frob_diff, identity, real, scalar, CMatrix};
use crate::stratum::{enumerate_strata, PolydiskContext, StratumIndex};

const NAMES: AxiomNames = AxiomNames {
    commuting: "commuting-mono",
    shallow: "vc-relation",
    deep: "cv-relation",
    intertwine_up: "intertwine-C",
    intertwine_down: "intertwine-V",
};

#[derive(Debug, Clone, PartialEq)]
pub struct VerdierObject {
    cube: Hypercube,
}

impl VerdierObject {
    pub fn from_cube(cube: Hypercube) -> Result<Self> {
        cube.check_shapes()?;
        Ok(Self { cube })
    }

    /// Zero arrows and identity monodromies.
    pub fn trivial(ctx: PolydiskContext, dims: Vec<usize>) -> Result<Self> {
        let mut cube = Hypercube::zero(ctx, dims)?;
        for a in enumerate_strata(&ctx) {
            for k in ctx.directions() {
                let n = cube.dim(a);
                cube.set(
                    MapLabel {
                        role: MapRole::Loop,
                        node: a,
                        k,
                    },
                    identity(n),
                )?;
            }
        }
        Ok(Self { cube })
    }

    pub fn cube(&self) -> &Hypercube {
        &self.cube
    }

    pub fn into_cube(self) -> Hypercube {
        self.cube
    }

    pub fn ctx(&self) -> &PolydiskContext {
        self.cube.ctx()
    }

    pub fn dim(&self, a: StratumIndex) -> usize {
        self.cube.dim(a)
    }

    pub fn mono(&self, a: StratumIndex, k: usize) -> &CMatrix {
        self.cube.loop_map(a, k)
    }

    pub fn canonical(&self, a: StratumIndex, k: usize) -> &CMatrix {
        self.cube.up_map(a, k)
    }

    pub fn variation(&self, a: StratumIndex, k: usize) -> &CMatrix {
        self.cube.down_map(a, k)
    }

    pub fn set_mono(&mut self, a: StratumIndex, k: usize, m: CMatrix) -> Result<()> {
        self.cube.set(
            MapLabel {
                role: MapRole::Loop,
                node: a,
                k,
            },
            m,
        )
    }

    pub fn set_canonical(&mut self, a: StratumIndex, k: usize, m: CMatrix) -> Result<()> {
        self.cube.set(
            MapLabel {
                role: MapRole::Up,
                node: a,
                k,
            },
            m,
        )
    }

    pub fn set_variation(&mut self, a: StratumIndex, k: usize, m: CMatrix) -> Result<()> {
        self.cube.set(
            MapLabel {
                role: MapRole::Down,
                node: a,
                k,
            },
            m,
        )
    }

    /// Axiom violations above `tol`, including numerically singular
    /// monodromies (residual = smallest singular value).
    pub fn validate(&self, tol: f64) -> Result<ValidationReport> {
        self.cube.check_shapes()?;
        let mut violations = Vec::new();
        for a in self.cube.strata() {
            for k in self.ctx().directions() {
                let m = self.mono(a, k);
                if m.nrows() == 0 {
                    continue;
                }
                let sv = linalg::singular_values(m);
                let (hi, lo) = (sv[0], sv[sv.len() - 1]);
                if !(lo > linalg::DEFAULT_RANK_TOL * hi.max(1.0)) {
                    violations.push(Violation {
                        axiom: "invertible-mono",
                        stratum: a,
                        indices: vec![k],
                        residual: lo,
                    });
                }
            }
        }
        violations.extend(check_relations(&self.cube, &NAMES, true, tol));
        Ok(ValidationReport {
            kind: ObjectKind::VerdierObject,
            tol,
            violations,
        })
    }

    pub fn ensure_valid(&self, tol: f64) -> Result<()> {
        self.validate(tol)?.into_result()
    }

    /// Flags every `(A, k)` where the normal monodromy differs from `1 + C·V`.
    pub fn monodromy_consistency(&self, tol: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        for a in self.cube.strata() {
            for k in a.elements() {
                let m = self.mono(a, k);
                let cv = self.canonical(a, k) * self.variation(a, k);
                let residual = frob_diff(m, &(cv + identity(m.nrows())));
                if residual > tol || residual.is_nan() {
                    out.push(Violation {
                        axiom: "mono-consistency",
                        stratum: a,
                        indices: vec![k],
                        residual,
                    });
                }
            }
        }
        out
    }

    pub fn direct_sum(&self, other: &VerdierObject) -> Result<VerdierObject> {
        Ok(Self {
            cube: self.cube.direct_sum(&other.cube)?,
        })
    }

    pub fn sub_quotient(&self, bases: &[CMatrix], tol: f64) -> Result<(VerdierObject, VerdierObject)> {
        let (sub, quo) = self
            .cube
            .sub_quotient(ObjectKind::VerdierObject, bases, tol, linalg::DEFAULT_RANK_TOL)?;
        Ok((Self { cube: sub }, Self { cube: quo }))
    }

    pub fn conjugate(&self, per_node: &[CMatrix]) -> Result<VerdierObject> {
        Ok(Self {
            cube: self.cube.conjugate(per_node)?,
        })
    }

    /// One-dimensional object at the deepest node, monodromy 1.
    pub fn delta(ctx: PolydiskContext) -> Result<Self> {
        let mut dims = vec![0; ctx.node_count()];
        dims[ctx.full().index()] = 1;
        Self::trivial(ctx, dims)
    }

    /// `r = 1` nearby/vanishing pair: `ℂ` at both nodes, monodromy `λ`,
    /// `C = λ − 1`, `V = 1`.
    pub fn nearby_vanishing(lambda: Complex64) -> Result<Self> {
        let ctx = PolydiskContext::with_multiplicity(1)?;
        let one = StratumIndex::from_mask(1);
        let mut out = Self::trivial(ctx, vec![1, 1])?;
        for a in [StratumIndex::EMPTY, one] {
            out.set_mono(a, 1, scalar(lambda))?;
        }
        out.set_canonical(one, 1, scalar(lambda - real(1.0)))?;
        out.set_variation(one, 1, scalar(real(1.0)))?;
        Ok(out)
    }

    /// Constant hypercube with the given commuting monodromies at every node,
    /// `C = M_k − 1` and `V = 1`.
    pub fn from_local_system(ctx: PolydiskContext, monodromies: &[CMatrix], tol: f64) -> Result<Self> {
        if monodromies.len() != ctx.r() {
            return Err(Error::InvalidParams(format!(
                "expected {} monodromies, got {}",
                ctx.r(),
                monodromies.len()
            )));
        }
        let n = match monodromies.first() {
            Some(m) => linalg::ensure_square(m)?,
            None => 1,
        };
        for (i, m) in monodromies.iter().enumerate() {
            if m.shape() != (n, n) {
                return Err(Error::ShapeMismatch(format!(
                    "monodromy {} has shape {:?}",
                    i + 1,
                    m.shape()
                )));
            }
            linalg::ensure_invertible(m, linalg::DEFAULT_RANK_TOL)?;
            for (j, other) in monodromies.iter().enumerate().skip(i + 1) {
                let residual = commute_residual(m, other);
                if residual > tol {
                    return Err(Error::NonCommuting {
                        first: i + 1,
                        second: j + 1,
                        residual,
                    });
                }
            }
        }
        let mut out = Self::trivial(ctx, vec![n; ctx.node_count()])?;
        for a in enumerate_strata(&ctx) {
            for k in ctx.directions() {
                out.set_mono(a, k, monodromies[k - 1].clone())?;
            }
            for k in a.elements() {
                out.set_canonical(a, k, &monodromies[k - 1] - identity(n))?;
                out.set_variation(a, k, identity(n))?;
            }
        }
        Ok(out)
    }
}

impl HypercubeObject for VerdierObject {
    const KIND: ObjectKind = ObjectKind::VerdierObject;

    fn cube(&self) -> &Hypercube {
        &self.cube
    }

    fn from_cube(cube: Hypercube) -> Result<Self> {
        VerdierObject::from_cube(cube)
    }

    fn validate(&self, tol: f64) -> Result<ValidationReport> {
        VerdierObject::validate(self, tol)
    }
}
