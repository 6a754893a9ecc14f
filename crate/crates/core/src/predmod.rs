//! Pre-D-modules on a polydisk with normal-crossing divisor, at the central
//! fibre: residues `Θ[A][k]` and arrows `t`, `s` on the hypercube.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filtration::{self, Filtration};
use crate::hypercube::{
    check_relations, AxiomNames, Hypercube, HypercubeObject, MapLabel, MapRole, ObjectKind, ValidationReport,
};
use crate::linalg::{self, commute_residual, identity, real, scalar, zeros, CMatrix, FundamentalDomain};
use crate::stratum::{enumerate_strata, PolydiskContext, StratumIndex};

const NAMES: AxiomNames = AxiomNames {
    commuting: "integrability",
    shallow: "euler-st",
    deep: "euler-ts",
    intertwine_up: "linearity-t",
    intertwine_down: "linearity-s",
};

/// Which arrow carries the residue in the constant-hypercube builders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArrowStyle {
    /// `t = Θ`, `s = 1`
    #[default]
    TTheta,
    /// `t = 1`, `s = Θ`
    STheta,
}

/// Behaviour of a rank-one simple object along one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Direction {
    /// Residue `α ≠ 0`; the object lives on both sides of the hyperplane.
    Free(Complex64),
    /// Supported off the hyperplane, residue 0.
    Point,
    /// Supported on the hyperplane, residue 0.
    Delta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreDModule {
    cube: Hypercube,
}

/// Two residue eigenvalues at one codimension level differing by a nonzero integer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvalueWitness {
    pub level: usize,
    /// `(A, k)` labels of the residues `Θ[A∖k][k]` carrying each eigenvalue.
    pub first: (StratumIndex, usize),
    pub second: (StratumIndex, usize),
    /// Larger real part first.
    pub eigenvalues: (Complex64, Complex64),
    pub difference: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodEigenvalueReport {
    pub good: bool,
    pub witness: Option<EigenvalueWitness>,
}

/// `n` with `|z − n| ≤ tol`, `n ≠ 0`.
pub(crate) fn nonzero_integer_near(z: Complex64, tol: f64) -> Option<i64> {
    let n = z.re.round();
    if n != 0.0 && (z - real(n)).norm() <= tol {
        Some(n as i64)
    } else {
        None
    }
}

pub(crate) fn sorted_eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let mut ev = linalg::eigenvalues(m)?;
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

impl PreDModule {
    /// Wraps a hypercube after a shape check; axioms are not checked.
    pub fn from_cube(cube: Hypercube) -> Result<Self> {
        cube.check_shapes()?;
        Ok(Self { cube })
    }

    pub fn zero(ctx: PolydiskContext, dims: Vec<usize>) -> Result<Self> {
        Ok(Self {
            cube: Hypercube::zero(ctx, dims)?,
        })
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

    pub fn theta(&self, a: StratumIndex, k: usize) -> &CMatrix {
        self.cube.loop_map(a, k)
    }

    pub fn t(&self, a: StratumIndex, k: usize) -> &CMatrix {
        self.cube.up_map(a, k)
    }

    pub fn s(&self, a: StratumIndex, k: usize) -> &CMatrix {
        self.cube.down_map(a, k)
    }

    pub fn set_theta(&mut self, a: StratumIndex, k: usize, m: CMatrix) -> Result<()> {
        self.cube.set(
            MapLabel {
                role: MapRole::Loop,
                node: a,
                k,
            },
            m,
        )
    }

    pub fn set_t(&mut self, a: StratumIndex, k: usize, m: CMatrix) -> Result<()> {
        self.cube.set(
            MapLabel {
                role: MapRole::Up,
                node: a,
                k,
            },
            m,
        )
    }

    pub fn set_s(&mut self, a: StratumIndex, k: usize, m: CMatrix) -> Result<()> {
        self.cube.set(
            MapLabel {
                role: MapRole::Down,
                node: a,
                k,
            },
            m,
        )
    }

    /// All axiom violations above `tol`. Malformed shapes are an error, not a report entry.
    pub fn validate(&self, tol: f64) -> Result<ValidationReport> {
        self.cube.check_shapes()?;
        Ok(ValidationReport {
            kind: ObjectKind::PreDModule,
            tol,
            violations: check_relations(&self.cube, &NAMES, false, tol),
        })
    }

    pub fn ensure_valid(&self, tol: f64) -> Result<()> {
        self.validate(tol)?.into_result()
    }

    /// Per codimension level `c`, pools the eigenvalues of `Θ[A∖k][k]` over
    /// `|A| = c`, `k ∈ A` and looks for two differing by a nonzero integer.
    pub fn good_residual_eigenvalues(&self, tol: f64) -> Result<GoodEigenvalueReport> {
        self.ensure_valid(tol)?;
        let ctx = *self.ctx();
        for level in 1..=ctx.r() {
            let mut pool: Vec<((StratumIndex, usize), Complex64)> = Vec::new();
            for a in enumerate_strata(&ctx).into_iter().filter(|a| a.codim() == level) {
                for k in a.elements() {
                    for ev in sorted_eigenvalues(self.theta(a.without(k), k))? {
                        pool.push(((a, k), ev));
                    }
                }
            }
            for i in 0..pool.len() {
                for j in i + 1..pool.len() {
                    let (li, x) = pool[i];
                    let (lj, y) = pool[j];
                    if let Some(n) = nonzero_integer_near(x - y, tol) {
                        let (first, second, eigenvalues, difference) = if n > 0 {
                            (li, lj, (x, y), n)
                        } else {
                            (lj, li, (y, x), -n)
                        };
                        return Ok(GoodEigenvalueReport {
                            good: false,
                            witness: Some(EigenvalueWitness {
                                level,
                                first,
                                second,
                                eigenvalues,
                                difference,
                            }),
                        });
                    }
                }
            }
        }
        Ok(GoodEigenvalueReport {
            good: true,
            witness: None,
        })
    }

    pub fn direct_sum(&self, other: &PreDModule) -> Result<PreDModule> {
        Ok(Self {
            cube: self.cube.direct_sum(&other.cube)?,
        })
    }

    /// Sub-object on invariant per-node subspaces and the quotient by it.
    pub fn sub_quotient(&self, bases: &[CMatrix], tol: f64) -> Result<(PreDModule, PreDModule)> {
        let (sub, quo) = self
            .cube
            .sub_quotient(ObjectKind::PreDModule, bases, tol, linalg::DEFAULT_RANK_TOL)?;
        Ok((Self { cube: sub }, Self { cube: quo }))
    }

    /// Basis change `G ↦ P_target G P_source⁻¹` on every structural map.
    pub fn conjugate(&self, per_node: &[CMatrix]) -> Result<PreDModule> {
        Ok(Self {
            cube: self.cube.conjugate(per_node)?,
        })
    }

    pub fn degenerate(&self, filt: &Filtration, tau: Complex64, tol: f64) -> Result<PreDModule> {
        let cube = filtration::degenerate(
            &self.cube,
            ObjectKind::PreDModule,
            filt,
            tau,
            tol,
            linalg::DEFAULT_RANK_TOL,
        )?;
        Ok(Self { cube })
    }

    /// Constant hypercube `ℂⁿ` with the given commuting residues at every node.
    pub fn from_residues(ctx: PolydiskContext, residues: &[CMatrix], style: ArrowStyle) -> Result<Self> {
        if residues.len() != ctx.r() {
            return Err(Error::InvalidParams(format!(
                "expected {} residues, got {}",
                ctx.r(),
                residues.len()
            )));
        }
        let n = match residues.first() {
            Some(m) => linalg::ensure_square(m)?,
            None => 1,
        };
        if let Some(bad) = residues.iter().find(|m| m.shape() != (n, n)) {
            return Err(Error::ShapeMismatch(format!(
                "residue of shape {:?}, expected {n}x{n}",
                bad.shape()
            )));
        }
        let mut out = Self::zero(ctx, vec![n; ctx.node_count()])?;
        for a in enumerate_strata(&ctx) {
            for k in ctx.directions() {
                out.set_theta(a, k, residues[k - 1].clone())?;
            }
            for k in a.elements() {
                let (t, s) = match style {
                    ArrowStyle::TTheta => (residues[k - 1].clone(), identity(n)),
                    ArrowStyle::STheta => (identity(n), residues[k - 1].clone()),
                };
                out.set_t(a, k, t)?;
                out.set_s(a, k, s)?;
            }
        }
        Ok(out)
    }

    /// Canonical extension of a local system: residues `log(M_k)/2πi` in `domain`.
    pub fn from_local_system(
        ctx: PolydiskContext,
        monodromies: &[CMatrix],
        domain: FundamentalDomain,
        style: ArrowStyle,
        tol: f64,
    ) -> Result<Self> {
        if monodromies.len() != ctx.r() {
            return Err(Error::InvalidParams(format!(
                "expected {} monodromies, got {}",
                ctx.r(),
                monodromies.len()
            )));
        }
        for i in 0..monodromies.len() {
            for j in i + 1..monodromies.len() {
                let residual = commute_residual(&monodromies[i], &monodromies[j]);
                if residual > tol {
                    return Err(Error::NonCommuting {
                        first: i + 1,
                        second: j + 1,
                        residual,
                    });
                }
            }
        }
        let residues = monodromies
            .iter()
            .map(|m| linalg::principal_log_over_2pii(m, domain))
            .collect::<Result<Vec<_>>>()?;
        Self::from_residues(ctx, &residues, style)
    }

    /// One-dimensional object supported at the deepest node, all residues 0.
    pub fn delta(ctx: PolydiskContext) -> Result<Self> {
        Self::simple(ctx, &vec![Direction::Delta; ctx.r()])
    }

    /// `W_A = ℂ`, `Θ = α`, `t = α`, `s = 1` everywhere.
    pub fn constant(ctx: PolydiskContext, alpha: Complex64) -> Result<Self> {
        let residues = vec![scalar(alpha); ctx.r()];
        Self::from_residues(ctx, &residues, ArrowStyle::TTheta)
    }

    /// Rank-one object described direction by direction.
    ///
    /// The support is the set of nodes containing every `Delta` direction and no
    /// `Point` direction; each supported node is `ℂ` with `Θ_k = α_k`
    /// (0 for `Point`/`Delta`), `s = 1` and `t = α_k`. Simple as soon as every
    /// `Free` residue is nonzero.
    pub fn simple(ctx: PolydiskContext, directions: &[Direction]) -> Result<Self> {
        if directions.len() != ctx.r() {
            return Err(Error::InvalidParams(format!(
                "expected {} direction types, got {}",
                ctx.r(),
                directions.len()
            )));
        }
        let mut delta = 0u32;
        let mut point = 0u32;
        let mut alpha = vec![Complex64::new(0.0, 0.0); ctx.r()];
        for (i, d) in directions.iter().enumerate() {
            match d {
                Direction::Free(a) => alpha[i] = *a,
                Direction::Point => point |= 1 << i,
                Direction::Delta => delta |= 1 << i,
            }
        }
        let supported = |a: StratumIndex| a.mask() & delta == delta && a.mask() & point == 0;
        let dims = (0..ctx.node_count())
            .map(|m| usize::from(supported(StratumIndex::from_mask(m as u32))))
            .collect();
        let mut out = Self::zero(ctx, dims)?;
        for a in enumerate_strata(&ctx).into_iter().filter(|a| supported(*a)) {
            for k in ctx.directions() {
                out.set_theta(a, k, scalar(alpha[k - 1]))?;
            }
            for k in a.elements() {
                if supported(a.without(k)) {
                    out.set_t(a, k, scalar(alpha[k - 1]))?;
                    out.set_s(a, k, scalar(real(1.0)))?;
                }
            }
        }
        Ok(out)
    }

    /// Non-split self-extension of `constant(α)`: `W_A = ℂ²`, every residue
    /// the Jordan block `[[α,1],[0,α]]`, `t = Θ`, `s = 1`. The first basis
    /// vector spans the sub-object.
    pub fn extension(ctx: PolydiskContext, alpha: Complex64) -> Result<Self> {
        let j = CMatrix::from_row_slice(2, 2, &[alpha, real(1.0), real(0.0), alpha]);
        Self::from_residues(ctx, &vec![j; ctx.r()], ArrowStyle::TTheta)
    }

    /// Sub-object of [`PreDModule::extension`]: `span(e₁)` at every node.
    pub fn extension_sub(ctx: PolydiskContext) -> Vec<CMatrix> {
        let e1 = CMatrix::from_column_slice(2, 1, &[real(1.0), real(0.0)]);
        vec![e1; ctx.node_count()]
    }

    /// Non-split `r = 1` object with residues 0 gluing two copies of the delta
    /// object through the point object: `W_∅ = ℂ`, `W_{1} = ℂ²`,
    /// `t = (1,0)ᵀ`, `s = (0,1)`, `Θ_{1} = [[0,1],[0,0]]`.
    pub fn delta_extension() -> Result<Self> {
        let ctx = PolydiskContext::with_multiplicity(1)?;
        let one = StratumIndex::from_mask(1);
        let mut out = Self::zero(ctx, vec![1, 2])?;
        out.set_theta(one, 1, linalg::from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]))?;
        out.set_t(one, 1, linalg::from_real_rows(2, 1, &[1.0, 0.0]))?;
        out.set_s(one, 1, linalg::from_real_rows(1, 2, &[0.0, 1.0]))?;
        Ok(out)
    }

    /// `r = 2`, `W_A = ℂ²`, residues `diag(a,0)` and `diag(0,a)`, `t = Θ`, `s = 1`.
    /// With `a = 1` both 0 and 1 occur as residue eigenvalues.
    pub fn esnault(a: Complex64) -> Result<Self> {
        let ctx = PolydiskContext::with_multiplicity(2)?;
        let zero = real(0.0);
        let residues = [linalg::diag(&[a, zero]), linalg::diag(&[zero, a])];
        Self::from_residues(ctx, &residues, ArrowStyle::TTheta)
    }

    /// All-zero data with the same dimensions.
    pub fn zero_like(&self) -> Result<Self> {
        Self::zero(*self.ctx(), self.cube.dims().to_vec())
    }

    /// Empty subspace per node (`n_A × 0`).
    pub fn empty_bases(&self) -> Vec<CMatrix> {
        self.cube.dims().iter().map(|&n| zeros(n, 0)).collect()
    }
}

impl HypercubeObject for PreDModule {
    const KIND: ObjectKind = ObjectKind::PreDModule;

    fn cube(&self) -> &Hypercube {
        &self.cube
    }

    fn from_cube(cube: Hypercube) -> Result<Self> {
        PreDModule::from_cube(cube)
    }

    fn validate(&self, tol: f64) -> Result<ValidationReport> {
        PreDModule::validate(self, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, frob_diff, DEFAULT_TOL};

    fn ctx(r: usize) -> PolydiskContext {
        PolydiskContext::with_multiplicity(r).unwrap()
    }

    #[test]
    fn constant_and_delta_validate() {
        for r in 1..=3 {
            assert!(PreDModule::constant(ctx(r), real(0.3))
                .unwrap()
                .validate(1e-12)
                .unwrap()
                .is_valid());
            let d = PreDModule::delta(ctx(r)).unwrap();
            assert!(d.validate(1e-12).unwrap().is_valid());
            assert_eq!(d.cube().total_dim(), 1);
            assert_eq!(d.dim(ctx(r).full()), 1);
        }
    }

    #[test]
    fn perturbed_euler_relation_reported() {
        let alpha = 0.3;
        let mut e = PreDModule::constant(ctx(1), real(alpha)).unwrap();
        let one = StratumIndex::from_mask(1);
        e.set_s(one, 1, scalar(real(2.0))).unwrap();
        let report = e.validate(1e-12).unwrap();
        let st = report.violations.iter().find(|v| v.axiom == "euler-st").unwrap();
        assert!((st.residual - alpha).abs() < 1e-14);
        assert_eq!(st.stratum, one);
    }

    #[test]
    fn esnault_is_bad_with_witness() {
        let e = PreDModule::esnault(real(1.0)).unwrap();
        assert!(e.validate(DEFAULT_TOL).unwrap().is_valid());
        let rep = e.good_residual_eigenvalues(DEFAULT_TOL).unwrap();
        assert!(!rep.good);
        let w = rep.witness.unwrap();
        assert_eq!(w.level, 1);
        assert_eq!(w.eigenvalues, (real(1.0), real(0.0)));
        let shifted = PreDModule::esnault(real(0.5)).unwrap();
        assert!(shifted.good_residual_eigenvalues(DEFAULT_TOL).unwrap().good);
    }

    #[test]
    fn r1_pairs() {
        let check = |a: f64, b: f64| {
            let th = linalg::diag(&[real(a), real(b)]);
            let e = PreDModule::from_residues(ctx(1), &[th], ArrowStyle::TTheta).unwrap();
            e.good_residual_eigenvalues(DEFAULT_TOL).unwrap().good
        };
        assert!(check(0.2, 0.7));
        assert!(!check(0.2, 1.2));
        assert!(
            PreDModule::constant(ctx(2), real(0.3))
                .unwrap()
                .good_residual_eigenvalues(DEFAULT_TOL)
                .unwrap()
                .good
        );
    }

    #[test]
    fn local_system_examples() {
        let e = PreDModule::from_local_system(
            ctx(1),
            &[scalar(real(1.0))],
            FundamentalDomain::default(),
            ArrowStyle::TTheta,
            DEFAULT_TOL,
        )
        .unwrap();
        let one = StratumIndex::from_mask(1);
        assert!(e.theta(one, 1)[(0, 0)].norm() < 1e-15);
        assert!(e.t(one, 1)[(0, 0)].norm() < 1e-15);
        assert_eq!(e.s(one, 1)[(0, 0)], real(1.0));

        let e = PreDModule::from_local_system(
            ctx(2),
            &[scalar(c(0.0, 1.0)), scalar(real(-1.0))],
            FundamentalDomain::default(),
            ArrowStyle::TTheta,
            DEFAULT_TOL,
        )
        .unwrap();
        for a in enumerate_strata(&ctx(2)) {
            assert!((e.theta(a, 1)[(0, 0)] - real(0.25)).norm() < 1e-14);
            assert!((e.theta(a, 2)[(0, 0)] - real(0.5)).norm() < 1e-14);
        }

        let jordan = linalg::from_real_rows(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        for style in [ArrowStyle::TTheta, ArrowStyle::STheta] {
            let e = PreDModule::from_local_system(
                ctx(1),
                &[jordan.clone()],
                FundamentalDomain::default(),
                style,
                DEFAULT_TOL,
            )
            .unwrap();
            assert!(e.validate(DEFAULT_TOL).unwrap().is_valid());
            let th = e.theta(StratumIndex::EMPTY, 1);
            assert!(frob_diff(&(th * th), &zeros(2, 2)) < 1e-14);
        }

        let a = linalg::from_real_rows(2, 2, &[1.0, 1.0, 0.0, 2.0]);
        let b = linalg::from_real_rows(2, 2, &[1.0, 0.0, 1.0, 2.0]);
        let err = PreDModule::from_local_system(
            ctx(2),
            &[a, b],
            FundamentalDomain::default(),
            ArrowStyle::TTheta,
            DEFAULT_TOL,
        );
        assert!(matches!(err, Err(Error::NonCommuting { .. })));
    }

    #[test]
    fn direct_sum_and_split_sub_quotient() {
        let d = PreDModule::delta(ctx(1)).unwrap();
        let k = PreDModule::constant(ctx(1), real(0.3)).unwrap();
        let sum = d.direct_sum(&k).unwrap();
        assert_eq!(sum.cube().dims(), &[1, 2]);
        assert!(sum.validate(1e-12).unwrap().is_valid());
        let bases = vec![zeros(1, 0), CMatrix::from_column_slice(2, 1, &[real(1.0), real(0.0)])];
        let (sub, quo) = sum.sub_quotient(&bases, 1e-12).unwrap();
        assert_eq!(sub.cube().dims(), d.cube().dims());
        assert_eq!(quo.cube().dims(), k.cube().dims());
        assert!(sub.validate(1e-12).unwrap().is_valid());
        assert!(quo.validate(1e-12).unwrap().is_valid());
    }

    #[test]
    fn extensions_validate() {
        for r in 1..=3 {
            let e = PreDModule::extension(ctx(r), real(0.3)).unwrap();
            assert!(e.validate(1e-12).unwrap().is_valid());
            let (sub, quo) = e.sub_quotient(&PreDModule::extension_sub(ctx(r)), 1e-12).unwrap();
            assert!(sub.validate(1e-12).unwrap().is_valid());
            assert!(quo.validate(1e-12).unwrap().is_valid());
        }
        assert!(PreDModule::delta_extension()
            .unwrap()
            .validate(1e-12)
            .unwrap()
            .is_valid());
    }

    #[test]
    fn simple_catalogue_validates() {
        let types = [Direction::Free(real(0.4)), Direction::Point, Direction::Delta];
        for &a in &types {
            for &b in &types {
                for &cc in &types {
                    let e = PreDModule::simple(ctx(3), &[a, b, cc]).unwrap();
                    assert!(e.validate(1e-12).unwrap().is_valid(), "{a:?} {b:?} {cc:?}");
                }
            }
        }
    }

    #[test]
    fn degenerate_extension() {
        let r = 1;
        let e = PreDModule::extension(ctx(r), real(0.3)).unwrap();
        let filt = Filtration::two_step(e.cube(), PreDModule::extension_sub(ctx(r)));
        let one = e.degenerate(&filt, real(1.0), 1e-12).unwrap();
        for label in e.cube().labels() {
            assert!(frob_diff(one.cube().get(label), e.cube().get(label)) < 1e-14);
        }
        let graded = e.degenerate(&filt, real(0.0), 1e-12).unwrap();
        assert!(graded.validate(1e-12).unwrap().is_valid());
        let th = graded.theta(StratumIndex::EMPTY, 1);
        assert!(frob_diff(th, &(identity(2) * real(0.3))) < 1e-14);

        let half = e.degenerate(&filt, real(0.5), 1e-12).unwrap();
        let p = vec![linalg::diag(&[real(1.0), real(2.0)]); 2];
        let conj = e.conjugate(&p).unwrap();
        for label in e.cube().labels() {
            assert!(frob_diff(half.cube().get(label), conj.cube().get(label)) < 1e-14);
        }

        let trivial = Filtration::trivial(e.cube());
        let same = e.degenerate(&trivial, real(0.0), 1e-12).unwrap();
        assert_eq!(same.cube().dims(), e.cube().dims());
        for label in e.cube().labels() {
            assert!(frob_diff(same.cube().get(label), e.cube().get(label)) < 1e-14);
        }
    }

    #[test]
    fn non_invariant_filtration_rejected() {
        let e = PreDModule::extension(ctx(1), real(0.3)).unwrap();
        let e2 = CMatrix::from_column_slice(2, 1, &[real(0.0), real(1.0)]);
        let filt = Filtration::two_step(e.cube(), vec![e2.clone(), e2]);
        assert!(matches!(
            e.degenerate(&filt, real(0.5), 1e-12),
            Err(Error::InvalidFiltration(_))
        ));
    }
}
