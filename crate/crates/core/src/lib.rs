//! Finite linear-algebra models of regular holonomic D-modules and perverse
//! sheaves with normal-crossing singularities on a polydisk.
//!
//! Objects are hypercubes of vector spaces indexed by subsets of `{1..r}`:
//! [`PreDModule`] carries residues `Θ` with arrows `t`/`s`, [`VerdierObject`]
//! carries monodromies with arrows `C`/`V`. [`rh()`] and [`inverse_rh`] move
//! between them.

pub mod algebra;
pub mod error;
pub mod filtration;
pub mod hypercube;
pub mod io;
pub mod linalg;
pub mod predmod;
pub mod rh;
pub mod stratum;
pub mod verdier;

pub use algebra::{
    is_simple, is_stable, isomorphic, jordan_holder, presentation, semisimplify, Isomorphism, JordanHolderReport,
    LinearPresentation, Simplicity, StabilityReport,
};
pub use error::{Error, Result};
pub use filtration::{degenerate, degeneration_intertwiner, Filtration};
pub use hypercube::{Hypercube, HypercubeObject, MapLabel, MapRole, ObjectKind, ValidationReport, Violation};
pub use io::{AnyObject, ObjectDocument};
pub use linalg::{CMatrix, FundamentalDomain, DEFAULT_RANK_TOL, DEFAULT_TOL};
pub use num_complex::Complex64;
pub use predmod::{ArrowStyle, Direction, EigenvalueWitness, GoodEigenvalueReport, PreDModule};
pub use rh::{inverse_rh, rh, rh_jacobian_rank, JacobianReport};
pub use stratum::{PolydiskContext, StratumIndex};
pub use verdier::VerdierObject;
