//! Acceptance suite. Run with
//! `cargo test -p ncrh-core --test acceptance -- --nocapture`
//! to see one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use ncrh_core::io::gen::generate_str;
use ncrh_core::linalg::{exp_2pii, frob, frob_diff, identity, phi_matrix, zeros};
use ncrh_core::predmod::Direction;
use ncrh_core::{
    degenerate, inverse_rh, isomorphic, jordan_holder, rh, rh_jacobian_rank, semisimplify, AnyObject, CMatrix,
    Complex64, Filtration, FundamentalDomain, Hypercube, HypercubeObject, PolydiskContext, PreDModule, StratumIndex,
    VerdierObject,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-8;

type Check = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

/// `I + 0.3·X`, rescaled until it is safely invertible.
fn random_basis_change(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    loop {
        let p = identity(n) + random_matrix(n, n, rng) * c(0.3, 0.0);
        if n == 0 || p.clone().lu().determinant().norm() > 0.2 {
            return p;
        }
    }
}

fn basis_changes(cube: &Hypercube, rng: &mut ChaCha8Rng) -> Vec<CMatrix> {
    cube.dims().iter().map(|&d| random_basis_change(d, rng)).collect()
}

fn ctx(r: usize) -> PolydiskContext {
    PolydiskContext::with_multiplicity(r).unwrap()
}

fn gen(spec: &str, parts: &[&str], seed: u64) -> AnyObject {
    generate_str(spec, parts, seed)
        .unwrap_or_else(|e| panic!("gen {spec}: {e}"))
        .object
}

fn pre_d(obj: AnyObject) -> PreDModule {
    match obj {
        AnyObject::PreD(e) => e,
        AnyObject::Verdier(_) => panic!("expected a pre-D-module"),
    }
}

fn verdier(obj: AnyObject) -> VerdierObject {
    match obj {
        AnyObject::Verdier(v) => v,
        AnyObject::PreD(_) => panic!("expected a Verdier object"),
    }
}

fn validate_any(obj: &AnyObject, tol: f64) -> usize {
    match obj {
        AnyObject::PreD(e) => e.validate(tol).unwrap().violations.len(),
        AnyObject::Verdier(v) => v.validate(tol).unwrap().violations.len(),
    }
}

/// Largest entrywise difference over all structural maps.
fn max_entry_diff(a: &Hypercube, b: &Hypercube) -> f64 {
    assert_eq!(a.dims(), b.dims());
    a.labels()
        .into_iter()
        .map(|l| (a.get(l) - b.get(l)).iter().map(|z| z.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1
fn axiom_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut objects = 0;
    let mut perturbations = 0;
    let mut slowest = Duration::ZERO;
    for r in 1..=3 {
        for kind in ["pre-d-module", "verdier"] {
            let mut specs = vec![
                (format!("delta r={r} kind={kind}"), vec![]),
                (format!("constant r={r} alpha=0.37 kind={kind}"), vec![]),
                (format!("extension r={r} alpha=0.3+0.1i kind={kind}"), vec![]),
                (
                    format!("direct-sum r={r} kind={kind}"),
                    vec!["delta", "constant alpha=0.6", "extension alpha=0.2"],
                ),
            ];
            for n in 1..=4 {
                specs.push((format!("local-system r={r} n={n} kind={kind}"), vec![]));
            }
            for (i, (spec, parts)) in specs.iter().enumerate() {
                let start = Instant::now();
                let obj = gen(spec, parts, 1000 * r as u64 + i as u64);
                let found = validate_any(&obj, TOL);
                ensure(found == 0, || format!("{spec}: {found} violations"))?;
                let cube = obj.cube();
                for label in cube.labels() {
                    let m = cube.get(label);
                    if m.is_empty() {
                        continue;
                    }
                    let dir = random_matrix(m.nrows(), m.ncols(), &mut rng);
                    let delta = &dir * c(1e-3 / frob(&dir), 0.0);
                    let mut bad = cube.clone();
                    bad.set(label, m + delta).unwrap();
                    let bad = AnyObject::from_cube(obj.kind(), bad).unwrap();
                    ensure(validate_any(&bad, TOL) > 0, || {
                        format!("{spec}: perturbation of {} undetected", label.display(obj.kind()))
                    })?;
                    perturbations += 1;
                }
                let elapsed = start.elapsed();
                slowest = slowest.max(elapsed);
                ensure(elapsed < Duration::from_secs(1), || {
                    format!("{spec}: {elapsed:?} > 1 s")
                })?;
                objects += 1;
            }
        }
    }
    Ok(format!(
        "{objects} objects valid, {perturbations} single-matrix perturbations detected, slowest {slowest:.2?}"
    ))
}

/// Scaled Taylor oracle: 60 terms of `φ(z) = Σ (2πi)^{j+1} z^j/(j+1)!` at
/// `Θ/2^s`, then `φ(2z) = φ(z)(e^{2πiz}+1)/2` and `e^{2πi·2z} = (e^{2πiz})²`.
fn phi_oracle(theta: &CMatrix) -> (CMatrix, CMatrix) {
    let n = theta.nrows();
    let mut s = 0;
    while frob(theta) / f64::from(1u32 << s) > 0.25 {
        s += 1;
    }
    let z = theta * c(1.0 / f64::from(1u32 << s), 0.0);
    let w = c(0.0, 2.0 * PI);
    let mut phi = zeros(n, n);
    let mut term = identity(n) * w;
    for j in 0..60 {
        phi += &term;
        term = &term * &z * (w / c((j + 2) as f64, 0.0));
    }
    let mut e = identity(n) + &z * &phi;
    for _ in 0..s {
        phi = &phi * (&e + identity(n)) * c(0.5, 0.0);
        e = &e * &e;
    }
    (phi, e)
}

// 2
fn phi_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut worst_id, mut worst_oracle) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let n = rng.random_range(1..=6);
        let raw = random_matrix(n, n, &mut rng);
        let norm = rng.random_range(0.05..=4.0);
        let theta = &raw * c(norm / frob(&raw), 0.0);
        let phi = phi_matrix(&theta).map_err(|e| format!("theta {i}: {e}"))?;
        let e = exp_2pii(&theta).map_err(|e| format!("theta {i}: {e}"))?;
        let id = frob_diff(&(&phi * &theta), &(&e - identity(n))) / (1.0 + frob(&e));
        let (oracle, _) = phi_oracle(&theta);
        let agree = frob_diff(&phi, &oracle) / (1.0 + frob(&oracle));
        worst_id = worst_id.max(id);
        worst_oracle = worst_oracle.max(agree);
        ensure(id <= 1e-10, || {
            format!("theta {i} (n={n}, |theta|={norm:.2}): identity residual {id:.2e}")
        })?;
        ensure(agree <= 1e-10, || {
            format!("theta {i} (n={n}, |theta|={norm:.2}): oracle gap {agree:.2e}")
        })?;
    }
    Ok(format!(
        "100 residues: identity residual <= {worst_id:.1e}, oracle gap <= {worst_oracle:.1e}"
    ))
}

// 3
fn rh_round_trips() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let domain = FundamentalDomain::default();
    let mut pre = Vec::new();
    for i in 0..40u64 {
        let r = 1 + (i % 3) as usize;
        let n = 1 + (i / 3 % 4) as usize;
        let style = if i % 5 == 0 { " style=s" } else { "" };
        pre.push(pre_d(gen(&format!("local-system r={r} n={n}{style}"), &[], i)));
    }
    for i in 0..10 {
        let r = 1 + i % 3;
        let alpha = c(rng.random_range(0.05..0.95), rng.random_range(-0.5..0.5));
        pre.push(if i % 2 == 0 {
            PreDModule::constant(ctx(r), alpha).unwrap()
        } else {
            PreDModule::extension(ctx(r), alpha).unwrap()
        });
    }
    let mut worst_pre = 0.0f64;
    for (i, e) in pre.iter().enumerate() {
        let back = inverse_rh(&rh(e, TOL).unwrap(), domain, TOL).map_err(|err| format!("pre-D {i}: {err}"))?;
        let d = max_entry_diff(e.cube(), back.cube());
        worst_pre = worst_pre.max(d);
        ensure(d <= 1e-7, || format!("pre-D {i}: entrywise error {d:.2e}"))?;
    }

    let mut ver = Vec::new();
    for i in 0..20u64 {
        let r = 1 + (i % 3) as usize;
        let n = 1 + (i / 3 % 4) as usize;
        ver.push(verdier(gen(
            &format!("local-system r={r} n={n} kind=verdier"),
            &[],
            500 + i,
        )));
    }
    for i in 0..10 {
        // Residues outside the strip [0, 1).
        let r = 1 + i % 3;
        let alpha = c(
            rng.random_range(1.05..2.95) * if i % 2 == 0 { 1.0 } else { -1.0 },
            rng.random_range(-0.3..0.3),
        );
        let e = if i % 3 == 0 {
            PreDModule::constant(ctx(r), alpha).unwrap()
        } else {
            PreDModule::extension(ctx(r), alpha).unwrap()
        };
        ver.push(rh(&e, TOL).unwrap());
    }
    for i in 0..15u64 {
        let r = 1 + (i % 3) as usize;
        let v = verdier(gen(&format!("local-system r={r} n=2 kind=verdier"), &[], 900 + i));
        let p = basis_changes(v.cube(), &mut rng);
        ver.push(v.conjugate(&p).unwrap());
    }
    for _ in 0..5 {
        let lambda = Complex64::from_polar(rng.random_range(0.3..3.0), rng.random_range(-3.0..3.0));
        ver.push(VerdierObject::nearby_vanishing(lambda).unwrap());
    }
    let mut worst_ver = 0.0f64;
    for (i, v) in ver.iter().enumerate() {
        let e = inverse_rh(v, domain, TOL).map_err(|err| format!("Verdier {i}: {err}"))?;
        let back = rh(&e, TOL).map_err(|err| format!("Verdier {i}: {err}"))?;
        let d = max_entry_diff(v.cube(), back.cube());
        worst_ver = worst_ver.max(d);
        ensure(d <= 1e-7, || format!("Verdier {i}: entrywise error {d:.2e}"))?;
    }
    Ok(format!(
        "{} pre-D round trips <= {worst_pre:.1e}, {} Verdier round trips <= {worst_ver:.1e}",
        pre.len(),
        ver.len()
    ))
}

// 4
fn good_eigenvalues() -> Check {
    let bad = PreDModule::esnault(c(1.0, 0.0))
        .unwrap()
        .good_residual_eigenvalues(TOL)
        .unwrap();
    ensure(!bad.good, || "Esnault data reported good".into())?;
    let w = bad.witness.ok_or("no witness")?;
    ensure(w.eigenvalues == (c(1.0, 0.0), c(0.0, 0.0)) && w.difference == 1, || {
        format!("witness {:?}, difference {}", w.eigenvalues, w.difference)
    })?;
    let shifted = PreDModule::esnault(c(0.5, 0.0))
        .unwrap()
        .good_residual_eigenvalues(TOL)
        .unwrap();
    ensure(shifted.good && shifted.witness.is_none(), || {
        "shifted data reported bad".into()
    })?;
    Ok("Esnault data bad with witness (1, 0); diag(0.5,0)/diag(0,0.5) good".into())
}

fn extension_corpus() -> Vec<(PreDModule, Filtration)> {
    let mut out = Vec::new();
    for r in 1..=3 {
        for alpha in [c(0.3, 0.0), c(0.5, 0.2), c(0.0, 0.0), c(1.0, 0.0)] {
            let e = PreDModule::extension(ctx(r), alpha).unwrap();
            let f = Filtration::two_step(e.cube(), PreDModule::extension_sub(ctx(r)));
            out.push((e, f));
        }
    }
    let de = PreDModule::delta_extension().unwrap();
    let sub = vec![
        zeros(1, 0),
        CMatrix::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]),
    ];
    let f = Filtration::two_step(de.cube(), sub);
    out.push((de, f));
    out
}

fn degenerate_pre(e: &PreDModule, f: &Filtration, tau: Complex64) -> PreDModule {
    PreDModule::from_cube(degenerate(e.cube(), PreDModule::KIND, f, tau, TOL, 1e-6).unwrap()).unwrap()
}

// 5
fn degeneration() -> Check {
    let corpus = extension_corpus();
    let mut slowest = Duration::ZERO;
    for (i, (e, f)) in corpus.iter().enumerate() {
        let start = Instant::now();
        for tau in [0.0, 0.25, 1.0, 2.0] {
            let d = degenerate_pre(e, f, c(tau, 0.0));
            let v = d.validate(TOL).unwrap().violations.len();
            ensure(v == 0, || format!("object {i}, tau {tau}: {v} violations"))?;
        }
        let one = degenerate_pre(e, f, c(1.0, 0.0));
        let gap = max_entry_diff(one.cube(), e.cube());
        ensure(gap <= 1e-12, || format!("object {i}: fibre at 1 differs by {gap:.2e}"))?;
        ensure(isomorphic(&one, e, 7, TOL).unwrap().is_yes(), || {
            format!("object {i}: fibre at 1 not iso")
        })?;

        let sub: Vec<CMatrix> = (0..e.ctx().node_count())
            .map(|m| f.space(1, StratumIndex::from_mask(m as u32)).clone())
            .collect();
        let (s, q) = e.sub_quotient(&sub, TOL).unwrap();
        let graded = s.direct_sum(&q).unwrap();
        let zero = degenerate_pre(e, f, c(0.0, 0.0));
        ensure(isomorphic(&zero, &graded, 7, TOL).unwrap().is_yes(), || {
            format!("object {i}: fibre at 0 not iso to sub + quotient")
        })?;
        ensure(!isomorphic(&zero, e, 7, TOL).unwrap().is_yes(), || {
            format!("object {i}: extension split")
        })?;
        let elapsed = start.elapsed();
        ensure(elapsed < Duration::from_secs(1), || {
            format!("object {i}: {elapsed:?} > 1 s")
        })?;
        slowest = slowest.max(elapsed);
    }
    Ok(format!(
        "{} extensions: fibre 1 = E, fibre 0 = sub + quotient, valid at tau in {{0, 0.25, 1, 2}} (slowest {slowest:.2?})",
        corpus.len()
    ))
}

const ALPHAS: [(f64, f64); 4] = [(0.3, 0.0), (0.45, 0.1), (0.7, 0.0), (-0.2, 0.3)];

fn random_direction(rng: &mut ChaCha8Rng) -> Direction {
    match rng.random_range(0..6) {
        0 => Direction::Point,
        1 => Direction::Delta,
        _ => {
            let (re, im) = ALPHAS[rng.random_range(0..ALPHAS.len())];
            Direction::Free(c(re, im))
        }
    }
}

/// Independent check that `f` is the catalogue simple with these directions.
fn matches_catalogue(f: &PreDModule, dirs: &[Direction]) -> bool {
    let cube = f.cube();
    cube.strata().into_iter().all(|a| {
        let supported = dirs.iter().enumerate().all(|(i, d)| match d {
            Direction::Point => !a.contains(i + 1),
            Direction::Delta => a.contains(i + 1),
            Direction::Free(_) => true,
        });
        if cube.dim(a) != usize::from(supported) {
            return false;
        }
        !supported
            || dirs.iter().enumerate().all(|(i, d)| {
                let expect = match d {
                    Direction::Free(alpha) => *alpha,
                    _ => c(0.0, 0.0),
                };
                (cube.loop_map(a, i + 1)[(0, 0)] - expect).norm() < 1e-6
            })
    })
}

// 6
fn jordan_holder_recovery() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut total_factors = 0;
    for case in 0..30 {
        let r = rng.random_range(1..=3);
        let (simples, mults, sum) = loop {
            let count = rng.random_range(2..=3);
            let mut simples: Vec<Vec<Direction>> = Vec::new();
            while simples.len() < count {
                let dirs: Vec<Direction> = (0..r).map(|_| random_direction(&mut rng)).collect();
                if !simples.contains(&dirs) {
                    simples.push(dirs);
                }
            }
            let mults: Vec<usize> = (0..count).map(|_| rng.random_range(1..=2)).collect();
            let mut sum: Option<PreDModule> = None;
            for (dirs, &m) in simples.iter().zip(&mults) {
                let s = PreDModule::simple(ctx(r), dirs).unwrap();
                for _ in 0..m {
                    sum = Some(match sum {
                        None => s.clone(),
                        Some(acc) => acc.direct_sum(&s).unwrap(),
                    });
                }
            }
            let sum = sum.unwrap();
            if sum.cube().total_dim() <= 10 {
                break (simples, mults, sum);
            }
        };
        let p = basis_changes(sum.cube(), &mut rng);
        let obj = sum.conjugate(&p).unwrap();
        for seed in [11, 29] {
            let rep = jordan_holder(&obj, seed, TOL).map_err(|e| format!("case {case}, seed {seed}: {e}"))?;
            ensure(rep.factors.len() == simples.len(), || {
                format!(
                    "case {case}, seed {seed}: {} classes, expected {}",
                    rep.factors.len(),
                    simples.len()
                )
            })?;
            for (dirs, &m) in simples.iter().zip(&mults) {
                let known = PreDModule::simple(ctx(r), dirs).unwrap();
                let hits: Vec<usize> = rep
                    .factors
                    .iter()
                    .filter(|(f, _)| isomorphic(f, &known, seed, TOL).unwrap().is_yes())
                    .map(|(f, mult)| {
                        assert!(
                            matches_catalogue(f, dirs),
                            "case {case}: iso test disagrees with catalogue"
                        );
                        *mult
                    })
                    .collect();
                ensure(hits == vec![m], || {
                    format!(
                        "case {case}, seed {seed}: simple {dirs:?} found with multiplicities {hits:?}, expected {m}"
                    )
                })?;
            }
            total_factors += rep.series.len();
        }
        let ss = semisimplify(&obj, 11, TOL).unwrap();
        let ss2 = semisimplify(&ss, 29, TOL).unwrap();
        ensure(isomorphic(&ss, &ss2, 5, TOL).unwrap().is_yes(), || {
            format!("case {case}: not idempotent")
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("{elapsed:?} > 30 s"))?;
    Ok(format!(
        "30 sums under 2 seeds: {total_factors} factors matched, semisimplify idempotent ({elapsed:.2?})"
    ))
}

// 7
fn s_equivalence() -> Check {
    let start = Instant::now();
    let corpus = extension_corpus();
    for (i, (e, f)) in corpus.iter().enumerate() {
        let zero = degenerate_pre(e, f, c(0.0, 0.0));
        let a = semisimplify(&zero, 3, TOL).unwrap();
        let b = semisimplify(e, 3, TOL).unwrap();
        ensure(isomorphic(&a, &b, 3, TOL).unwrap().is_yes(), || {
            format!("pre-D object {i}")
        })?;
        // Same statement on the perverse side.
        let (va, vb) = (rh(&zero, TOL).unwrap(), rh(e, TOL).unwrap());
        let (sa, sb) = (semisimplify(&va, 3, TOL).unwrap(), semisimplify(&vb, 3, TOL).unwrap());
        ensure(isomorphic(&sa, &sb, 3, TOL).unwrap().is_yes(), || {
            format!("Verdier object {i}")
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("{elapsed:?} > 5 s"))?;
    Ok(format!(
        "{} extensions (both kinds) S-equivalent to their fibre at 0 ({elapsed:.2?})",
        corpus.len()
    ))
}

fn has_nonzero_integer(ev: &[Complex64]) -> bool {
    ev.iter().any(|z| {
        let n = z.re.round();
        n != 0.0 && (z - c(n, 0.0)).norm() < 0.05
    })
}

// 8
fn rigidity() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let (h, sv_tol) = (1e-5, 1e-5);
    let mut accepted = 0;
    let mut smallest = f64::INFINITY;
    while accepted < 20 {
        let (n, m) = (rng.random_range(1..=2), rng.random_range(1..=2));
        let s = random_matrix(n, m, &mut rng) * c(0.7, 0.0);
        let t = random_matrix(m, n, &mut rng) * c(0.7, 0.0);
        let ts = &t * &s;
        let ev = ncrh_core::linalg::eigenvalues(&ts).unwrap();
        if has_nonzero_integer(&ev) {
            continue;
        }
        let rep = rh_jacobian_rank(&s, &t, h, sv_tol).unwrap();
        ensure(rep.rank == rep.full_rank_expected, || {
            format!(
                "pair {accepted} ({n}x{m}): rank {} of {}",
                rep.rank, rep.full_rank_expected
            )
        })?;
        smallest = smallest.min(*rep.singular_values.last().unwrap());
        accepted += 1;
    }
    let s = CMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 0.0)]);
    let t = s.transpose();
    let rep = rh_jacobian_rank(&s, &t, h, sv_tol).unwrap();
    ensure(rep.rank < rep.full_rank_expected, || {
        format!("constructed point has full rank {}", rep.rank)
    })?;
    ensure(!rep.predicted_full_rank, || "constructed point predicted full".into())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("{elapsed:?} > 5 s"))?;
    Ok(format!(
        "20 random pairs full rank (smallest singular value {smallest:.1e}); st = 1, ts = diag(1,0) has rank {} of {} ({elapsed:.2?})",
        rep.rank, rep.full_rank_expected
    ))
}

// 9
fn functoriality() -> Check {
    let start = Instant::now();
    let mut pairs: Vec<(PreDModule, PreDModule)> = Vec::new();
    for r in 1..=3 {
        pairs.push((
            pre_d(gen(&format!("local-system r={r} n=2"), &[], r as u64)),
            PreDModule::extension(ctx(r), c(0.4, 0.1)).unwrap(),
        ));
        pairs.push((
            PreDModule::delta(ctx(r)).unwrap(),
            PreDModule::constant(ctx(r), c(0.8, 0.0)).unwrap(),
        ));
        pairs.push((
            pre_d(gen(&format!("local-system r={r} n=3"), &[], 10 + r as u64)),
            pre_d(gen(&format!("local-system r={r} n=1 style=s"), &[], 20 + r as u64)),
        ));
    }
    pairs.push((
        PreDModule::esnault(c(1.0, 0.0)).unwrap(),
        PreDModule::esnault(c(0.5, 0.0)).unwrap(),
    ));
    for (i, (a, b)) in pairs.iter().enumerate() {
        let lhs = rh(&a.direct_sum(b).unwrap(), TOL).unwrap();
        let rhs = rh(a, TOL).unwrap().direct_sum(&rh(b, TOL).unwrap()).unwrap();
        ensure(lhs == rhs, || {
            format!(
                "pair {i}: rh(E+E') differs by {:.2e}",
                max_entry_diff(lhs.cube(), rhs.cube())
            )
        })?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let objects = [
        PreDModule::esnault(c(1.0, 0.0)).unwrap(),
        PreDModule::esnault(c(0.5, 0.0)).unwrap(),
        pre_d(gen("local-system r=2 n=3", &[], 7)),
        PreDModule::constant(ctx(2), c(0.0, 0.0))
            .unwrap()
            .direct_sum(&PreDModule::constant(ctx(2), c(1.0, 0.0)).unwrap())
            .unwrap(),
    ];
    for (i, e) in objects.iter().enumerate() {
        let base = e.good_residual_eigenvalues(TOL).unwrap();
        for j in 0..5 {
            let p = basis_changes(e.cube(), &mut rng);
            let conj = e.conjugate(&p).unwrap().good_residual_eigenvalues(TOL).unwrap();
            ensure(conj.good == base.good, || {
                format!("object {i}, conjugation {j}: verdict changed")
            })?;
            if let (Some(x), Some(y)) = (&base.witness, &conj.witness) {
                let moved = (x.eigenvalues.0 - y.eigenvalues.0).norm() + (x.eigenvalues.1 - y.eigenvalues.1).norm();
                ensure(
                    x.difference == y.difference && x.level == y.level && moved < 1e-9,
                    || format!("object {i}, conjugation {j}: witness changed"),
                )?;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(2), || format!("{elapsed:?} > 2 s"))?;
    Ok(format!(
        "{} sums commute with rh bitwise; good-eigenvalue verdicts stable under 20 conjugations ({elapsed:.2?})",
        pairs.len()
    ))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("axiom suite", axiom_suite),
        ("phi identity", phi_identity),
        ("rh round trips", rh_round_trips),
        ("good eigenvalues", good_eigenvalues),
        ("degeneration", degeneration),
        ("jordan-holder", jordan_holder_recovery),
        ("s-equivalence", s_equivalence),
        ("rigidity", rigidity),
        ("functoriality", functoriality),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run)
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(why) => {
                println!("FAIL {} {name}: {why} [{elapsed:.2?}]", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
