//! Sub-objects, composition series, semisimplification and isomorphism
//! testing, shared by both object kinds through a linear presentation.
//!
//! At the level of fibres every nonzero sub-object has the same normalized
//! Hilbert polynomial, so stability coincides with simplicity.

mod iso;
mod jordan_holder;
mod meataxe;
mod presentation;

use serde::Serialize;

pub use iso::{hom_space, isomorphic_presentations, Isomorphism};
pub use jordan_holder::{jordan_holder, semisimplify, JordanHolderReport};
pub use meataxe::{is_simple, Simplicity, SimplicityStatus, FALLBACK_MAX_DIM};
pub use presentation::{generated_submodule, Generator, LinearPresentation};

use crate::error::{Error, Result};
use crate::hypercube::HypercubeObject;

pub fn presentation<T: HypercubeObject>(obj: &T) -> Result<LinearPresentation> {
    LinearPresentation::from_cube(obj.cube(), T::KIND)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// `None` when the randomized test was inconclusive.
    pub stable: Option<bool>,
    pub status: String,
}

/// Stable means nonzero and simple.
pub fn is_stable<T: HypercubeObject>(obj: &T, seed: u64, tol: f64) -> Result<StabilityReport> {
    let p = presentation(obj)?;
    match is_simple(&p, seed, tol) {
        Err(Error::ZeroObject) => Ok(StabilityReport {
            stable: Some(false),
            status: "stable requires nonzero".into(),
        }),
        Err(e) => Err(e),
        Ok(Simplicity::Simple) => Ok(StabilityReport {
            stable: Some(true),
            status: "simple".into(),
        }),
        Ok(Simplicity::NotSimple(_)) => Ok(StabilityReport {
            stable: Some(false),
            status: "proper nonzero sub-object found".into(),
        }),
        Ok(Simplicity::Inconclusive(msg)) => Ok(StabilityReport {
            stable: None,
            status: msg,
        }),
    }
}

/// Isomorphism test for two objects of the same kind over the same context.
pub fn isomorphic<T: HypercubeObject>(a: &T, b: &T, seed: u64, tol: f64) -> Result<Isomorphism> {
    if a.cube().ctx() != b.cube().ctx() {
        return Err(Error::Incompatible("objects live over different contexts".into()));
    }
    isomorphic_presentations(&presentation(a)?, &presentation(b)?, seed, tol)
}
