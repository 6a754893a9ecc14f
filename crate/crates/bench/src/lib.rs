//! Shared fixtures for the criterion benches.

use ncrh_core::io::gen::generate_str;
use ncrh_core::{AnyObject, CMatrix, PreDModule, StratumIndex, VerdierObject};

pub fn local_system(r: usize, n: usize, seed: u64) -> PreDModule {
    match generate_str(&format!("local-system r={r} n={n}"), &[], seed)
        .expect("generator")
        .object
    {
        AnyObject::PreD(e) => e,
        AnyObject::Verdier(_) => unreachable!(),
    }
}

pub fn verdier_local_system(r: usize, n: usize, seed: u64) -> VerdierObject {
    match generate_str(&format!("local-system r={r} n={n} kind=verdier"), &[], seed)
        .expect("generator")
        .object
    {
        AnyObject::Verdier(v) => v,
        AnyObject::PreD(_) => unreachable!(),
    }
}

/// A residue with a dense spectrum in the strip `[0, 1)`.
pub fn residue(n: usize, seed: u64) -> CMatrix {
    local_system(1, n, seed).theta(StratumIndex::EMPTY, 1).clone()
}

/// Sum of `copies` catalogue simples and one extension over `r` directions.
pub fn mixed_sum(r: usize, copies: usize) -> PreDModule {
    let mut parts = vec!["extension alpha=0.3"];
    parts.extend(std::iter::repeat_n("delta", copies));
    parts.push("constant alpha=0.7");
    match generate_str(&format!("direct-sum r={r}"), &parts, 0)
        .expect("generator")
        .object
    {
        AnyObject::PreD(e) => e,
        AnyObject::Verdier(_) => unreachable!(),
    }
}
