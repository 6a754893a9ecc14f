use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ncrh_core::io::gen::{generate, parse_complex_str, BuilderSpec};
use ncrh_core::io::{self, filtration_from_value, parse_matrix};
use ncrh_core::stratum::{cover_y_star, cover_z, cover_z_star, enumerate_strata};
use ncrh_core::{
    degenerate, inverse_rh, is_stable, isomorphic, jordan_holder, rh, rh_jacobian_rank, semisimplify, AnyObject, Error,
    FundamentalDomain, HypercubeObject, Isomorphism, ObjectDocument, PolydiskContext,
};
use serde_json::{json, Value};

/// Hypercube models of regular holonomic D-modules and perverse sheaves with
/// normal-crossing singularities. Every report is JSON on standard output.
///
/// Exit codes: 0 success, 1 axiom failure, 2 malformed input, 3 inconclusive.
#[derive(Debug, Parser)]
#[command(name = "ncrh", version)]
struct Cli {
    /// Tolerance for structural residuals.
    #[arg(long, global = true, env = "NCRH_TOL", default_value_t = ncrh_core::DEFAULT_TOL)]
    tol: f64,
    /// Relative tolerance for rank decisions.
    #[arg(long, global = true, default_value_t = ncrh_core::DEFAULT_RANK_TOL)]
    rank_tol: f64,
    /// Seed for randomized algorithms and generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Base of the fundamental domain `sigma <= Re < sigma + 1` for logarithms.
    #[arg(long, global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    sigma: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the axioms of one or more objects.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Look for residue eigenvalues differing by a nonzero integer.
    GoodEig { file: PathBuf },
    /// Apply the Riemann-Hilbert functor to a pre-D-module.
    Rh { file: PathBuf },
    /// Recover a pre-D-module from a Verdier object (domain set by --sigma).
    InvRh { file: PathBuf },
    /// Composition series and factors with multiplicities.
    Jh { file: PathBuf },
    /// Compare two objects up to S-equivalence.
    Sequiv { first: PathBuf, second: PathBuf },
    /// Stable means nonzero and simple.
    Stable { file: PathBuf },
    /// Fibre at tau of the filtration degeneration family.
    Degenerate {
        file: PathBuf,
        /// Filtration JSON; defaults to the input's `metadata.filtration`.
        #[arg(long)]
        filtration: Option<PathBuf>,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        tau: String,
    },
    /// Numerical rank of the arrow map `(s, t) -> (t, phi(st) s)`.
    Jacobian {
        /// JSON file `{"s": matrix, "t": matrix}`.
        file: PathBuf,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
        /// Absolute singular-value threshold.
        #[arg(long, default_value_t = 1e-5)]
        sv_tol: f64,
    },
    /// Build an object, e.g. `gen constant r=2 alpha=0.3`.
    Gen {
        builder: String,
        /// `key=value` parameters.
        params: Vec<String>,
        /// Summand spec for direct-sum, e.g. `--part "constant alpha=0.3"`.
        #[arg(long = "part")]
        parts: Vec<String>,
    },
    /// Enumerate strata and their covers.
    Strata {
        #[arg(long)]
        r: usize,
        #[arg(long)]
        d: Option<usize>,
    },
}

enum Failure {
    Core(Error),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(Error::InvalidObject { .. }) => 1,
            Failure::Core(Error::Inconclusive(_)) => 3,
            _ => 2,
        }
    }

    fn report(&self) -> Value {
        let (status, message) = match self {
            Failure::Core(Error::InvalidObject { .. }) => ("invalid", self.message()),
            Failure::Core(Error::Inconclusive(_)) => ("inconclusive", self.message()),
            _ => ("error", self.message()),
        };
        json!({"status": status, "message": message})
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(p, e) => format!("{}: {e}", p.display()),
            Failure::Usage(m) => m.clone(),
        }
    }
}

type Outcome = Result<(Value, u8), Failure>;

struct Settings {
    tol: f64,
    rank_tol: f64,
    seed: u64,
    sigma: f64,
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::Core(Error::Parse {
            path: "$".into(),
            message: e.to_string(),
        })
    })
}

fn read_document(path: &Path) -> Result<ObjectDocument, Failure> {
    Ok(io::from_value(&read_json(path)?)?)
}

fn document_value(object: impl Into<AnyObject>, metadata: Option<Value>) -> Value {
    io::to_value(&ObjectDocument {
        object: object.into(),
        metadata,
    })
}

fn validate_one(path: &Path, s: &Settings) -> (Value, u8) {
    let doc = match read_document(path) {
        Ok(d) => d,
        Err(f) => {
            return (
                json!({"file": path.display().to_string(), "status": "error", "message": f.message()}),
                2,
            )
        }
    };
    let (report, extra) = match &doc.object {
        AnyObject::PreD(e) => (e.validate(s.tol), Vec::new()),
        AnyObject::Verdier(v) => (v.validate(s.tol), v.monodromy_consistency(s.tol)),
    };
    match report {
        Ok(r) => {
            let code = if r.is_valid() { 0 } else { 1 };
            let mut out = json!({
                "file": path.display().to_string(),
                "kind": r.kind,
                "valid": r.is_valid(),
                "violations": r.violations,
                "max_residual": r.max_residual(),
            });
            if doc.object.kind() == ncrh_core::ObjectKind::VerdierObject {
                out["mono_consistency"] = json!(extra);
            }
            (out, code)
        }
        Err(e) => {
            let f = Failure::Core(e);
            let mut out = f.report();
            out["file"] = json!(path.display().to_string());
            (out, f.code())
        }
    }
}

fn validate(files: &[PathBuf], s: &Settings) -> Outcome {
    let results: Vec<(Value, u8)> = std::thread::scope(|scope| {
        let handles: Vec<_> = files.iter().map(|f| scope.spawn(move || validate_one(f, s))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("validation worker panicked"))
            .collect()
    });
    let code = if results.iter().any(|r| r.1 == 2) {
        2
    } else {
        results.iter().map(|r| r.1).max().unwrap_or(0)
    };
    let all_valid = code == 0;
    Ok((
        json!({"valid": all_valid, "results": results.into_iter().map(|r| r.0).collect::<Vec<_>>()}),
        code,
    ))
}

fn require_pre_d(doc: ObjectDocument) -> Result<ncrh_core::PreDModule, Failure> {
    match doc.object {
        AnyObject::PreD(e) => Ok(e),
        AnyObject::Verdier(_) => Err(Failure::Usage("expected a pre-d-module document".into())),
    }
}

fn require_verdier(doc: ObjectDocument) -> Result<ncrh_core::VerdierObject, Failure> {
    match doc.object {
        AnyObject::Verdier(v) => Ok(v),
        AnyObject::PreD(_) => Err(Failure::Usage("expected a verdier-object document".into())),
    }
}

fn jh_value<T: HypercubeObject + Into<AnyObject>>(obj: &T, s: &Settings) -> Result<Value, Failure> {
    let rep = jordan_holder(obj, s.seed, s.tol)?;
    let factors: Vec<Value> = rep
        .factors
        .iter()
        .map(|(f, m)| json!({"object": document_value(f.clone(), None), "multiplicity": m}))
        .collect();
    Ok(json!({
        "status": "decided",
        "dimension_vector": rep.dimension_vector,
        "length": rep.series.len(),
        "factors": factors,
    }))
}

fn factor_summary<T: HypercubeObject>(obj: &T, s: &Settings) -> Result<Value, Failure> {
    let rep = jordan_holder(obj, s.seed, s.tol)?;
    Ok(rep
        .factors
        .iter()
        .map(|(f, m)| json!({"dimension_vector": f.cube().dimension_vector(), "multiplicity": m}))
        .collect())
}

fn iso_value(iso: &Isomorphism) -> Value {
    match iso {
        Isomorphism::Yes(_) => json!({"status": "yes"}),
        Isomorphism::No(why) => json!({"status": "no", "invariant": why}),
        Isomorphism::ProbablyNot(why) => json!({"status": "probably-not", "message": why}),
    }
}

fn sequiv_value<T: HypercubeObject + Into<AnyObject>>(a: &T, b: &T, s: &Settings) -> Outcome {
    let direct = isomorphic(a, b, s.seed, s.tol)?;
    let ss = isomorphic(
        &semisimplify(a, s.seed, s.tol)?,
        &semisimplify(b, s.seed, s.tol)?,
        s.seed,
        s.tol,
    )?;
    let (status, equivalent, code) = match &ss {
        Isomorphism::Yes(_) => ("decided", Some(true), 0),
        Isomorphism::No(_) => ("decided", Some(false), 0),
        Isomorphism::ProbablyNot(_) => ("inconclusive", None, 3),
    };
    Ok((
        json!({
            "status": status,
            "s_equivalent": equivalent,
            "semisimplifications": iso_value(&ss),
            "isomorphic": iso_value(&direct),
            "factors": [factor_summary(a, s)?, factor_summary(b, s)?],
        }),
        code,
    ))
}

fn parse_tau(text: &str) -> Result<ncrh_core::Complex64, Failure> {
    parse_complex_str(text).map_err(Failure::Core)
}

fn run(cli: Cli) -> Outcome {
    let s = Settings {
        tol: cli.tol,
        rank_tol: cli.rank_tol,
        seed: cli.seed,
        sigma: cli.sigma,
    };
    if !(s.tol > 0.0 && s.tol.is_finite() && s.rank_tol > 0.0 && s.rank_tol.is_finite()) {
        return Err(Failure::Usage("tolerances must be positive and finite".into()));
    }
    match cli.command {
        Command::Validate { files } => validate(&files, &s),
        Command::GoodEig { file } => {
            let e = require_pre_d(read_document(&file)?)?;
            e.ensure_valid(s.tol)?;
            Ok((json!(e.good_residual_eigenvalues(s.tol)?), 0))
        }
        Command::Rh { file } => {
            let doc = read_document(&file)?;
            let meta = doc.metadata.clone();
            Ok((document_value(rh(&require_pre_d(doc)?, s.tol)?, meta), 0))
        }
        Command::InvRh { file } => {
            let doc = read_document(&file)?;
            let meta = doc.metadata.clone();
            let domain = FundamentalDomain::new(s.sigma)?;
            Ok((
                document_value(inverse_rh(&require_verdier(doc)?, domain, s.tol)?, meta),
                0,
            ))
        }
        Command::Jh { file } => match read_document(&file)?.object {
            AnyObject::PreD(e) => Ok((jh_value(&e, &s)?, 0)),
            AnyObject::Verdier(v) => Ok((jh_value(&v, &s)?, 0)),
        },
        Command::Sequiv { first, second } => match (read_document(&first)?.object, read_document(&second)?.object) {
            (AnyObject::PreD(a), AnyObject::PreD(b)) => sequiv_value(&a, &b, &s),
            (AnyObject::Verdier(a), AnyObject::Verdier(b)) => sequiv_value(&a, &b, &s),
            _ => Err(Failure::Usage("sequiv needs two documents of the same kind".into())),
        },
        Command::Stable { file } => {
            let rep = match read_document(&file)?.object {
                AnyObject::PreD(e) => is_stable(&e, s.seed, s.tol)?,
                AnyObject::Verdier(v) => is_stable(&v, s.seed, s.tol)?,
            };
            let code = if rep.stable.is_some() { 0 } else { 3 };
            let status = if code == 0 { "decided" } else { "inconclusive" };
            Ok((
                json!({"status": status, "stable": rep.stable, "message": rep.status}),
                code,
            ))
        }
        Command::Degenerate { file, filtration, tau } => {
            let doc = read_document(&file)?;
            let tau = parse_tau(&tau)?;
            let fv = match filtration {
                Some(p) => read_json(&p)?,
                None => doc
                    .metadata
                    .as_ref()
                    .and_then(|m| m.get("filtration"))
                    .cloned()
                    .ok_or_else(|| Failure::Usage("no --filtration given and none in metadata".into()))?,
            };
            let cube = doc.object.cube();
            let filt = filtration_from_value(&fv, cube)?;
            let kind = doc.object.kind();
            let out = degenerate(cube, kind, &filt, tau, s.tol, s.rank_tol)?;
            let meta = json!({"tau": [tau.re, tau.im]});
            Ok((document_value(AnyObject::from_cube(kind, out)?, Some(meta)), 0))
        }
        Command::Jacobian { file, step, sv_tol } => {
            let v = read_json(&file)?;
            let matrix = |key: &str| -> Result<_, Failure> {
                let m = v.get(key).ok_or_else(|| {
                    Failure::Core(Error::Parse {
                        path: format!("$.{key}"),
                        message: "missing".into(),
                    })
                })?;
                let rows = m.as_array().map_or(0, Vec::len);
                Ok(parse_matrix(m, rows, None, &format!("$.{key}"))?)
            };
            let (sm, tm) = (matrix("s")?, matrix("t")?);
            Ok((json!(rh_jacobian_rank(&sm, &tm, step, sv_tol)?), 0))
        }
        Command::Gen { builder, params, parts } => {
            let spec_text = std::iter::once(builder).chain(params).collect::<Vec<_>>().join(" ");
            let parts = parts
                .iter()
                .map(|p| BuilderSpec::parse(p))
                .collect::<Result<Vec<_>, _>>()?;
            let doc = generate(&BuilderSpec::parse(&spec_text)?.with_parts(parts), s.seed)?;
            Ok((io::to_value(&doc), 0))
        }
        Command::Strata { r, d } => {
            let ctx = PolydiskContext::new(d.unwrap_or(r), r)?;
            let strata: Vec<Value> = enumerate_strata(&ctx)
                .into_iter()
                .map(|a| json!({"label": a.label(), "elements": a, "codim": a.codim()}))
                .collect();
            let mut covers = Vec::new();
            for codim in 1..=r {
                let y: Vec<Value> = cover_y_star(&ctx, codim)?
                    .into_iter()
                    .map(|(a, k)| json!([a, k]))
                    .collect();
                let (z, zs): (Vec<Value>, Vec<Value>) = if codim >= 2 {
                    (
                        cover_z(&ctx, codim)?.into_iter().map(|(a, p)| json!([a, p])).collect(),
                        cover_z_star(&ctx, codim)?
                            .into_iter()
                            .map(|(a, p, swapped)| json!([a, p, swapped]))
                            .collect(),
                    )
                } else {
                    (Vec::new(), Vec::new())
                };
                covers.push(json!({"codim": codim, "y_star": y, "z": z, "z_star": zs}));
            }
            Ok((json!({"context": ctx, "strata": strata, "covers": covers}), 0))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (value, code) = match run(cli) {
        Ok(out) => out,
        Err(f) => (f.report(), f.code()),
    };
    let text = serde_json::to_string_pretty(&value).expect("JSON values always serialize");
    // A closed pipe (e.g. `| head`) is not an error worth a panic.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    ExitCode::from(code)
}
