//! JSON documents for objects and filtrations.
//!
//! ```json
//! {"kind": "pre-d-module", "context": {"d": 1, "r": 1},
//!  "nodes": {"[]": {"dim": 1, "theta": {"1": [[[0.3, 0.0]]]}}, "[1]": {...}},
//!  "t": {"[1]|1": [[[0.3, 0.0]]]}, "s": {"[1]|1": [[[1.0, 0.0]]]}}
//! ```
//!
//! Matrices are row lists of `[re, im]` pairs (a bare number is read as a real
//! entry). Verdier objects use `"verdier-object"`, `"mono"`, `"C"` and `"V"`.
//! Keys are emitted sorted, so serialization is canonical.

pub mod gen;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::hypercube::{Hypercube, MapLabel, MapRole, ObjectKind};
use crate::linalg::{zeros, CMatrix};
use crate::predmod::PreDModule;
use crate::stratum::{enumerate_strata, PolydiskContext, StratumIndex};
use crate::verdier::VerdierObject;

/// An object of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyObject {
    PreD(PreDModule),
    Verdier(VerdierObject),
}

impl AnyObject {
    pub fn kind(&self) -> ObjectKind {
        match self {
            AnyObject::PreD(_) => ObjectKind::PreDModule,
            AnyObject::Verdier(_) => ObjectKind::VerdierObject,
        }
    }

    pub fn cube(&self) -> &Hypercube {
        match self {
            AnyObject::PreD(e) => e.cube(),
            AnyObject::Verdier(v) => v.cube(),
        }
    }

    pub fn direct_sum(&self, other: &AnyObject) -> Result<AnyObject> {
        match (self, other) {
            (AnyObject::PreD(a), AnyObject::PreD(b)) => Ok(AnyObject::PreD(a.direct_sum(b)?)),
            (AnyObject::Verdier(a), AnyObject::Verdier(b)) => Ok(AnyObject::Verdier(a.direct_sum(b)?)),
            _ => Err(Error::Incompatible("direct sum of objects of different kinds".into())),
        }
    }

    pub fn from_cube(kind: ObjectKind, cube: Hypercube) -> Result<AnyObject> {
        Ok(match kind {
            ObjectKind::PreDModule => AnyObject::PreD(PreDModule::from_cube(cube)?),
            ObjectKind::VerdierObject => AnyObject::Verdier(VerdierObject::from_cube(cube)?),
        })
    }
}

impl From<PreDModule> for AnyObject {
    fn from(e: PreDModule) -> Self {
        AnyObject::PreD(e)
    }
}

impl From<VerdierObject> for AnyObject {
    fn from(v: VerdierObject) -> Self {
        AnyObject::Verdier(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectDocument {
    pub object: AnyObject,
    pub metadata: Option<Value>,
}

impl ObjectDocument {
    pub fn new(object: impl Into<AnyObject>) -> Self {
        Self {
            object: object.into(),
            metadata: None,
        }
    }
}

pub fn complex_value(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_value(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_value(m[(i, j)])).collect()))
            .collect(),
    )
}

fn kind_keys(kind: ObjectKind) -> (&'static str, &'static str, &'static str) {
    (kind.loop_name(), kind.up_name(), kind.down_name())
}

fn arrow_key(a: StratumIndex, k: usize) -> String {
    format!("{}|{}", a.label(), k)
}

pub fn to_value(doc: &ObjectDocument) -> Value {
    let cube = doc.object.cube();
    let kind = doc.object.kind();
    let (loop_key, up_key, down_key) = kind_keys(kind);
    let mut nodes = Map::new();
    let mut up = Map::new();
    let mut down = Map::new();
    for a in cube.strata() {
        let loops: Map<String, Value> = cube
            .ctx()
            .directions()
            .map(|k| (k.to_string(), matrix_value(cube.loop_map(a, k))))
            .collect();
        nodes.insert(a.label(), json!({"dim": cube.dim(a), loop_key: loops}));
        for k in a.elements() {
            up.insert(arrow_key(a, k), matrix_value(cube.up_map(a, k)));
            down.insert(arrow_key(a, k), matrix_value(cube.down_map(a, k)));
        }
    }
    let mut out = Map::new();
    out.insert("kind".into(), json!(kind.name()));
    out.insert("context".into(), json!(cube.ctx()));
    out.insert("nodes".into(), Value::Object(nodes));
    out.insert(up_key.into(), Value::Object(up));
    out.insert(down_key.into(), Value::Object(down));
    if let Some(m) = &doc.metadata {
        out.insert("metadata".into(), m.clone());
    }
    Value::Object(out)
}

pub fn to_string(doc: &ObjectDocument) -> String {
    serde_json::to_string_pretty(&to_value(doc)).expect("JSON values always serialize")
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::parse(path, "expected an object"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::parse(path, "expected a non-negative integer"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    let x = v.as_f64().ok_or_else(|| Error::parse(path, "expected a number"))?;
    if !x.is_finite() {
        return Err(Error::parse(path, "non-finite number"));
    }
    Ok(x)
}

pub fn parse_complex(v: &Value, path: &str) -> Result<Complex64> {
    match v {
        Value::Number(_) => Ok(Complex64::new(as_f64(v, path)?, 0.0)),
        Value::Array(pair) if pair.len() == 2 => Ok(Complex64::new(
            as_f64(&pair[0], &format!("{path}[0]"))?,
            as_f64(&pair[1], &format!("{path}[1]"))?,
        )),
        _ => Err(Error::parse(path, "expected a number or an [re, im] pair")),
    }
}

/// Parses a matrix; `cols` is required when there are no rows to infer it from.
pub fn parse_matrix(v: &Value, rows: usize, cols: Option<usize>, path: &str) -> Result<CMatrix> {
    let list = v
        .as_array()
        .ok_or_else(|| Error::parse(path, "expected a list of rows"))?;
    if list.len() != rows {
        return Err(Error::parse(
            path,
            format!("expected {rows} rows, found {}", list.len()),
        ));
    }
    let ncols = match (cols, list.first()) {
        (Some(c), _) => c,
        (None, Some(first)) => first
            .as_array()
            .map(|r| r.len())
            .ok_or_else(|| Error::parse(format!("{path}[0]"), "expected a row list"))?,
        (None, None) => 0,
    };
    let mut m = zeros(rows, ncols);
    for (i, row) in list.iter().enumerate() {
        let rp = format!("{path}[{i}]");
        let entries = row.as_array().ok_or_else(|| Error::parse(&rp, "expected a row list"))?;
        if entries.len() != ncols {
            return Err(Error::parse(
                &rp,
                format!("expected {ncols} entries, found {}", entries.len()),
            ));
        }
        for (j, e) in entries.iter().enumerate() {
            m[(i, j)] = parse_complex(e, &format!("{rp}[{j}]"))?;
        }
    }
    Ok(m)
}

fn parse_kind(v: &Value) -> Result<ObjectKind> {
    match v.as_str() {
        Some("pre-d-module") => Ok(ObjectKind::PreDModule),
        Some("verdier-object") => Ok(ObjectKind::VerdierObject),
        Some(other) => Err(Error::parse("$.kind", format!("unknown kind {other:?}"))),
        None => Err(Error::parse("$.kind", "expected a string")),
    }
}

fn parse_context(v: &Value) -> Result<PolydiskContext> {
    let obj = as_object(v, "$.context")?;
    for key in obj.keys() {
        if key != "d" && key != "r" {
            return Err(Error::parse(format!("$.context.{key}"), "unknown key"));
        }
    }
    let field = |k: &str| {
        obj.get(k)
            .ok_or_else(|| Error::parse(format!("$.context.{k}"), "missing"))
            .and_then(|x| as_usize(x, &format!("$.context.{k}")))
    };
    PolydiskContext::new(field("d")?, field("r")?).map_err(|e| Error::parse("$.context", e.to_string()))
}

fn parse_stratum(label: &str, ctx: &PolydiskContext, path: &str) -> Result<StratumIndex> {
    let a = StratumIndex::parse_label(label).map_err(|e| Error::parse(path, e.to_string()))?;
    if !ctx.contains_stratum(a) {
        return Err(Error::parse(path, format!("{label} is not a subset of 1..{}", ctx.r())));
    }
    if a.label() != label {
        return Err(Error::parse(
            path,
            format!("non-canonical label, expected {}", a.label()),
        ));
    }
    Ok(a)
}

/// Parses a document, reporting the JSON path of the first problem.
pub fn from_value(v: &Value) -> Result<ObjectDocument> {
    let top = as_object(v, "$")?;
    let kind = parse_kind(top.get("kind").ok_or_else(|| Error::parse("$.kind", "missing"))?)?;
    let (loop_key, up_key, down_key) = kind_keys(kind);
    for key in top.keys() {
        if !["kind", "context", "nodes", "metadata", up_key, down_key].contains(&key.as_str()) {
            return Err(Error::parse(
                format!("$.{key}"),
                format!("unknown key for kind {}", kind.name()),
            ));
        }
    }
    let ctx = parse_context(top.get("context").ok_or_else(|| Error::parse("$.context", "missing"))?)?;
    let nodes = as_object(
        top.get("nodes").ok_or_else(|| Error::parse("$.nodes", "missing"))?,
        "$.nodes",
    )?;

    let mut dims = vec![None; ctx.node_count()];
    for (label, node) in nodes {
        let path = format!("$.nodes[{label:?}]");
        let a = parse_stratum(label, &ctx, &path)?;
        let obj = as_object(node, &path)?;
        let dim = as_usize(
            obj.get("dim")
                .ok_or_else(|| Error::parse(format!("{path}.dim"), "missing"))?,
            &format!("{path}.dim"),
        )?;
        dims[a.index()] = Some(dim);
    }
    let dims = dims
        .into_iter()
        .enumerate()
        .map(|(m, d)| {
            d.ok_or_else(|| Error::parse("$.nodes", format!("missing node {}", StratumIndex::from_mask(m as u32))))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cube = Hypercube::zero(ctx, dims)?;

    for (label, node) in nodes {
        let path = format!("$.nodes[{label:?}]");
        let a = parse_stratum(label, &ctx, &path)?;
        let n = cube.dim(a);
        let obj = as_object(node, &path)?;
        for key in obj.keys() {
            if key != "dim" && key != loop_key {
                return Err(Error::parse(format!("{path}.{key}"), "unknown key"));
            }
        }
        let loops = match obj.get(loop_key) {
            Some(l) => as_object(l, &format!("{path}.{loop_key}"))?.clone(),
            None if n == 0 => Map::new(),
            None => return Err(Error::parse(format!("{path}.{loop_key}"), "missing")),
        };
        for key in loops.keys() {
            let ok = key
                .parse::<usize>()
                .is_ok_and(|k| (1..=ctx.r()).contains(&k) && k.to_string() == *key);
            if !ok {
                return Err(Error::parse(
                    format!("{path}.{loop_key}[{key:?}]"),
                    format!("direction must be 1..{}", ctx.r()),
                ));
            }
        }
        for k in ctx.directions() {
            let lp = format!("{path}.{loop_key}[\"{k}\"]");
            let m = match loops.get(&k.to_string()) {
                Some(m) => parse_matrix(m, n, Some(n), &lp)?,
                None if n == 0 => zeros(0, 0),
                None => return Err(Error::parse(lp, "missing")),
            };
            cube.set(
                MapLabel {
                    role: MapRole::Loop,
                    node: a,
                    k,
                },
                m,
            )
            .map_err(|e| Error::parse(&path, e.to_string()))?;
        }
    }

    for (key, role) in [(up_key, MapRole::Up), (down_key, MapRole::Down)] {
        let path = format!("$.{key}");
        let arrows = match top.get(key) {
            Some(v) => as_object(v, &path)?.clone(),
            None => Map::new(),
        };
        let mut seen = vec![vec![false; ctx.r()]; ctx.node_count()];
        for (akey, m) in &arrows {
            let ap = format!("{path}[{akey:?}]");
            let (label, k) = akey
                .rsplit_once('|')
                .ok_or_else(|| Error::parse(&ap, "arrow key must have the form A|k"))?;
            let a = parse_stratum(label, &ctx, &ap)?;
            let k: usize = k
                .parse()
                .ok()
                .filter(|k| (1..=ctx.r()).contains(k))
                .ok_or_else(|| Error::parse(&ap, format!("direction must be 1..{}", ctx.r())))?;
            if !a.contains(k) {
                return Err(Error::parse(&ap, "arrow key: k not in A"));
            }
            let label = MapLabel { role, node: a, k };
            let (rows, cols) = cube.expected_shape(label);
            let m = parse_matrix(m, rows, Some(cols), &ap)?;
            cube.set(label, m).map_err(|e| Error::parse(&ap, e.to_string()))?;
            seen[a.index()][k - 1] = true;
        }
        for a in enumerate_strata(&ctx) {
            for k in a.elements() {
                let label = MapLabel { role, node: a, k };
                let (rows, cols) = cube.expected_shape(label);
                if !seen[a.index()][k - 1] && rows * cols > 0 {
                    return Err(Error::parse(format!("{path}[\"{}\"]", arrow_key(a, k)), "missing"));
                }
            }
        }
    }

    Ok(ObjectDocument {
        object: AnyObject::from_cube(kind, cube)?,
        metadata: top.get("metadata").cloned(),
    })
}

pub fn from_str(text: &str) -> Result<ObjectDocument> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::parse("$", e.to_string()))?;
    from_value(&v)
}

/// `{"grades": [...], "spaces": [{"[A]": matrix, ...}, ...]}`; each matrix has
/// spanning columns of the step at that node. Nodes of dimension 0 may be omitted.
pub fn filtration_to_value(f: &Filtration, ctx: &PolydiskContext) -> Value {
    let spaces: Vec<Value> = (0..f.len())
        .map(|i| {
            let m: Map<String, Value> = enumerate_strata(ctx)
                .into_iter()
                .map(|a| (a.label(), matrix_value(f.space(i, a))))
                .collect();
            Value::Object(m)
        })
        .collect();
    json!({"grades": f.grades(), "spaces": spaces})
}

pub fn filtration_from_value(v: &Value, cube: &Hypercube) -> Result<Filtration> {
    let top = as_object(v, "$")?;
    let ctx = *cube.ctx();
    let grades = top
        .get("grades")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("$.grades", "expected a list of integers"))?
        .iter()
        .enumerate()
        .map(|(i, g)| {
            g.as_i64()
                .ok_or_else(|| Error::parse(format!("$.grades[{i}]"), "expected an integer"))
        })
        .collect::<Result<Vec<_>>>()?;
    let spaces = top
        .get("spaces")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("$.spaces", "expected a list"))?;
    let mut families = Vec::with_capacity(spaces.len());
    for (i, s) in spaces.iter().enumerate() {
        let path = format!("$.spaces[{i}]");
        let obj = as_object(s, &path)?;
        let mut family: Vec<Option<CMatrix>> = vec![None; ctx.node_count()];
        for (label, m) in obj {
            let mp = format!("{path}[{label:?}]");
            let a = parse_stratum(label, &ctx, &mp)?;
            family[a.index()] = Some(parse_matrix(m, cube.dim(a), None, &mp)?);
        }
        let family = family
            .into_iter()
            .enumerate()
            .map(|(m, b)| {
                let n = cube.dims()[m];
                b.map(Ok).unwrap_or_else(|| {
                    if n == 0 {
                        Ok(zeros(0, 0))
                    } else {
                        Err(Error::parse(
                            &path,
                            format!("missing node {}", StratumIndex::from_mask(m as u32)),
                        ))
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        families.push(family);
    }
    Filtration::new(grades, families)
}
