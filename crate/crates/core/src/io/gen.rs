//! Seeded object generators addressed by short spec strings such as
//! `"constant r=2 alpha=0.3"` or `"local-system r=2 n=3 kind=verdier"`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::{filtration_to_value, AnyObject, ObjectDocument};
use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::hypercube::ObjectKind;
use crate::linalg::{self, identity, zeros, CMatrix, FundamentalDomain, DEFAULT_TOL};
use crate::predmod::{ArrowStyle, Direction, PreDModule};
use crate::rh::rh;
use crate::stratum::PolydiskContext;
use crate::verdier::VerdierObject;

pub const BUILDERS: &[&str] = &[
    "delta",
    "constant",
    "local-system",
    "extension",
    "direct-sum",
    "simple",
    "esnault",
    "delta-extension",
    "nearby-vanishing",
];

/// Keys a `direct-sum` passes down to parts that do not set them.
const INHERITED: &[&str] = &["r", "d", "kind"];
const ATTEMPTS: usize = 64;
/// Minimum distance of generated residue real parts from the strip edges.
const EDGE_MARGIN: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BuilderSpec {
    pub name: String,
    pub params: BTreeMap<String, String>,
    pub parts: Vec<BuilderSpec>,
}

impl BuilderSpec {
    /// Parses `name key=value ...`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut words = text.split_whitespace();
        let name = words
            .next()
            .ok_or_else(|| Error::InvalidParams("empty builder spec".into()))?
            .to_string();
        if !BUILDERS.contains(&name.as_str()) {
            return Err(Error::InvalidParams(format!(
                "unknown builder {name:?}; expected one of {}",
                BUILDERS.join(", ")
            )));
        }
        let mut params = BTreeMap::new();
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| Error::InvalidParams(format!("expected key=value, found {w:?}")))?;
            let k = if k == "α" { "alpha" } else { k };
            if params.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::InvalidParams(format!("parameter {k} given twice")));
            }
        }
        Ok(Self {
            name,
            params,
            parts: Vec::new(),
        })
    }

    pub fn with_parts(mut self, parts: Vec<BuilderSpec>) -> Self {
        self.parts = parts;
        self
    }

    pub fn to_value(&self) -> Value {
        let mut v = json!({"builder": self.name, "params": self.params});
        if !self.parts.is_empty() {
            v["parts"] = Value::Array(self.parts.iter().map(BuilderSpec::to_value).collect());
        }
        v
    }
}

/// Parses `0.3`, `-1`, `2i`, `0.3+0.2i`, `0.3-0.2i`.
pub fn parse_complex_str(s: &str) -> Result<Complex64> {
    let bad = || Error::InvalidParams(format!("cannot read {s:?} as a complex number"));
    let t = s.trim();
    let z = if let Some(body) = t.strip_suffix('i') {
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(i, ch)| (ch == '+' || ch == '-') && !matches!(body.as_bytes()[i - 1], b'e' | b'E'))
            .map(|(i, _)| i)
            .last();
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            x => x.parse::<f64>().map_err(|_| bad())?,
        };
        Complex64::new(re.parse::<f64>().map_err(|_| bad())?, im)
    } else {
        Complex64::new(t.parse::<f64>().map_err(|_| bad())?, 0.0)
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(bad())
    }
}

struct Params<'a> {
    builder: &'a str,
    map: &'a BTreeMap<String, String>,
    allowed: &'a [&'a str],
}

impl Params<'_> {
    fn check(&self) -> Result<()> {
        for k in self.map.keys() {
            if !self.allowed.contains(&k.as_str()) {
                return Err(Error::InvalidParams(format!(
                    "builder {} does not take parameter {k}",
                    self.builder
                )));
            }
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        self.raw(key).map_or(Ok(default), |v| {
            v.parse()
                .map_err(|_| Error::InvalidParams(format!("{key}={v} is not a non-negative integer")))
        })
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        self.raw(key).map_or(Ok(default), |v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidParams(format!("{key}={v} is not a finite number")))
        })
    }

    fn complex(&self, key: &str, default: Complex64) -> Result<Complex64> {
        self.raw(key).map_or(Ok(default), parse_complex_str)
    }

    fn kind(&self) -> Result<ObjectKind> {
        match self.raw("kind") {
            None | Some("pre-d-module") | Some("predmod") => Ok(ObjectKind::PreDModule),
            Some("verdier-object") | Some("verdier") => Ok(ObjectKind::VerdierObject),
            Some(v) => Err(Error::InvalidParams(format!("unknown kind {v:?}"))),
        }
    }

    fn context(&self) -> Result<PolydiskContext> {
        let r = self.usize("r", 1)?;
        let d = self.usize("d", r)?;
        PolydiskContext::new(d, r).map_err(|e| Error::InvalidParams(e.to_string()))
    }
}

fn parse_direction(s: &str) -> Result<Direction> {
    match s {
        "point" => Ok(Direction::Point),
        "delta" => Ok(Direction::Delta),
        _ => {
            let alpha = s.strip_prefix("free:").ok_or_else(|| {
                Error::InvalidParams(format!("direction {s:?}: expected free:<alpha>, point or delta"))
            })?;
            Ok(Direction::Free(parse_complex_str(alpha)?))
        }
    }
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| random_complex(rng))
}

fn eval_poly(coeffs: &[Complex64], x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    coeffs
        .iter()
        .rev()
        .fold(zeros(n, n), |acc, &c| acc * x + identity(n) * c)
}

/// Eigenvalues of `M` far from zero, from each other, and with `log/2πi` well
/// inside the strip.
fn acceptable_monodromy(m: &CMatrix, domain: FundamentalDomain) -> Result<bool> {
    let ev = linalg::eigenvalues(m)?;
    let separated = ev
        .iter()
        .enumerate()
        .all(|(i, a)| ev[i + 1..].iter().all(|b| (a - b).norm() > 0.05));
    let inside = ev.iter().all(|&mu| {
        let re = domain.log_over_2pii(mu).re - domain.base_real;
        mu.norm() > 0.2 && mu.norm() < 5.0 && re > EDGE_MARGIN && re < 1.0 - EDGE_MARGIN
    });
    Ok(separated && inside)
}

/// Random commuting monodromies `M_k = p_k(X)` for one random invertible `X`.
pub fn random_commuting_monodromies(
    r: usize,
    n: usize,
    degree: usize,
    domain: FundamentalDomain,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<CMatrix>> {
    if n == 0 {
        return Err(Error::InvalidParams("local system rank must be positive".into()));
    }
    for _ in 0..ATTEMPTS {
        let scale = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
        let x = random_matrix(n, rng) * scale + identity(n) * Complex64::new(1.0, 0.0);
        if linalg::ensure_invertible(&x, 1e-2).is_err() {
            continue;
        }
        let mut monos = Vec::with_capacity(r);
        for _ in 0..r {
            let coeffs: Vec<Complex64> = (0..=degree).map(|_| random_complex(rng)).collect();
            let m = eval_poly(&coeffs, &x);
            if !acceptable_monodromy(&m, domain)? {
                break;
            }
            monos.push(m);
        }
        if monos.len() == r {
            return Ok(monos);
        }
    }
    Err(Error::InvalidParams(format!(
        "no well-conditioned commuting monodromies found in {ATTEMPTS} attempts"
    )))
}

fn to_kind(e: PreDModule, kind: ObjectKind) -> Result<AnyObject> {
    Ok(match kind {
        ObjectKind::PreDModule => e.into(),
        ObjectKind::VerdierObject => rh(&e, DEFAULT_TOL)?.into(),
    })
}

fn local_system(p: &Params, rng: &mut ChaCha8Rng) -> Result<AnyObject> {
    let ctx = p.context()?;
    let kind = p.kind()?;
    let n = p.usize("n", 2)?;
    let degree = p.usize("degree", 2)?;
    let domain = FundamentalDomain::new(p.f64("sigma", 0.0)?)?;
    let style = match p.raw("style") {
        None | Some("t") => ArrowStyle::TTheta,
        Some("s") => ArrowStyle::STheta,
        Some(v) => return Err(Error::InvalidParams(format!("style={v}: expected t or s"))),
    };
    for _ in 0..ATTEMPTS {
        let monos = random_commuting_monodromies(ctx.r(), n, degree, domain, rng)?;
        let obj: AnyObject = match kind {
            ObjectKind::PreDModule => PreDModule::from_local_system(ctx, &monos, domain, style, DEFAULT_TOL)?.into(),
            ObjectKind::VerdierObject => VerdierObject::from_local_system(ctx, &monos, DEFAULT_TOL)?.into(),
        };
        if is_valid(&obj)? {
            return Ok(obj);
        }
    }
    Err(Error::InvalidParams(format!(
        "no local system passing validation found in {ATTEMPTS} attempts"
    )))
}

fn is_valid(obj: &AnyObject) -> Result<bool> {
    Ok(match obj {
        AnyObject::PreD(e) => e.validate(DEFAULT_TOL)?.is_valid(),
        AnyObject::Verdier(v) => v.validate(DEFAULT_TOL)?.is_valid(),
    })
}

fn part_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add((i as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn allowed_params(name: &str) -> Result<&'static [&'static str]> {
    Ok(match name {
        "delta" | "direct-sum" => &["r", "d", "kind"],
        "constant" | "extension" => &["r", "d", "kind", "alpha"],
        "local-system" => &["r", "d", "kind", "n", "degree", "sigma", "style"],
        "simple" => &["d", "kind", "dirs"],
        "esnault" => &["kind", "a"],
        "delta-extension" => &["kind"],
        "nearby-vanishing" => &["lambda"],
        other => return Err(Error::InvalidParams(format!("unknown builder {other:?}"))),
    })
}

fn build(spec: &BuilderSpec, seed: u64) -> Result<(AnyObject, Option<Value>)> {
    let allowed = allowed_params(&spec.name)?;
    let p = Params {
        builder: &spec.name,
        map: &spec.params,
        allowed,
    };
    p.check()?;
    if spec.name != "direct-sum" && !spec.parts.is_empty() {
        return Err(Error::InvalidParams(format!("builder {} takes no parts", spec.name)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extra = None;
    let obj = match spec.name.as_str() {
        "delta" => match p.kind()? {
            ObjectKind::PreDModule => PreDModule::delta(p.context()?)?.into(),
            ObjectKind::VerdierObject => VerdierObject::delta(p.context()?)?.into(),
        },
        "constant" => to_kind(
            PreDModule::constant(p.context()?, p.complex("alpha", Complex64::new(0.0, 0.0))?)?,
            p.kind()?,
        )?,
        "extension" => {
            let ctx = p.context()?;
            let e = PreDModule::extension(ctx, p.complex("alpha", Complex64::new(0.3, 0.0))?)?;
            let filt = Filtration::two_step(e.cube(), PreDModule::extension_sub(ctx));
            extra = Some(filtration_to_value(&filt, &ctx));
            to_kind(e, p.kind()?)?
        }
        "local-system" => local_system(&p, &mut rng)?,
        "simple" => {
            let dirs = p
                .raw("dirs")
                .ok_or_else(|| Error::InvalidParams("simple needs dirs=<dir>,<dir>,...".into()))?
                .split(',')
                .map(parse_direction)
                .collect::<Result<Vec<_>>>()?;
            let r = dirs.len();
            let ctx = PolydiskContext::new(p.usize("d", r)?, r).map_err(|e| Error::InvalidParams(e.to_string()))?;
            to_kind(PreDModule::simple(ctx, &dirs)?, p.kind()?)?
        }
        "esnault" => to_kind(
            PreDModule::esnault(p.complex("a", Complex64::new(1.0, 0.0))?)?,
            p.kind()?,
        )?,
        "delta-extension" => to_kind(PreDModule::delta_extension()?, p.kind()?)?,
        "nearby-vanishing" => VerdierObject::nearby_vanishing(p.complex("lambda", Complex64::new(-1.0, 0.0))?)?.into(),
        "direct-sum" => {
            if spec.parts.is_empty() {
                return Err(Error::InvalidParams("direct-sum needs at least one part".into()));
            }
            let mut acc: Option<AnyObject> = None;
            for (i, part) in spec.parts.iter().enumerate() {
                let mut part = part.clone();
                let takes = allowed_params(&part.name)?;
                for key in INHERITED.iter().filter(|k| takes.contains(k)) {
                    if let (Some(v), false) = (spec.params.get(*key), part.params.contains_key(*key)) {
                        part.params.insert(key.to_string(), v.clone());
                    }
                }
                let (obj, _) = build(&part, part_seed(seed, i))?;
                acc = Some(match acc {
                    None => obj,
                    Some(prev) => prev.direct_sum(&obj)?,
                });
            }
            acc.expect("at least one part")
        }
        _ => unreachable!(),
    };
    Ok((obj, extra))
}

/// Builds the object described by `spec`; the result is deterministic in
/// `seed` and always passes validation at the default tolerance.
pub fn generate(spec: &BuilderSpec, seed: u64) -> Result<ObjectDocument> {
    let (object, filtration) = build(spec, seed)?;
    if !is_valid(&object)? {
        return Err(Error::InvalidParams(format!(
            "builder {} produced an object failing validation",
            spec.name
        )));
    }
    let mut metadata = spec.to_value();
    metadata["seed"] = json!(seed);
    if let Some(f) = filtration {
        metadata["filtration"] = f;
    }
    Ok(ObjectDocument {
        object,
        metadata: Some(metadata),
    })
}

/// Convenience wrapper taking spec strings.
pub fn generate_str(spec: &str, parts: &[&str], seed: u64) -> Result<ObjectDocument> {
    let parts = parts
        .iter()
        .map(|p| BuilderSpec::parse(p))
        .collect::<Result<Vec<_>>>()?;
    generate(&BuilderSpec::parse(spec)?.with_parts(parts), seed)
}
