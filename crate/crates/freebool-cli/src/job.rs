//! Job files: one expression, its marginals and per-command options.
//!
//! ```json
//! {
//!   "name": "t3-semicircle",
//!   "expression": "X*Y*Z + Y*X*Z + X*Z*Y + Z*X*Y + Y*Z*X + Z*Y*X",
//!   "variables": {"X": {"kind": "semicircle", "variance": "1"}, "Y": "semicircle", "Z": "semicircle"},
//!   "order": 32,
//!   "retain": ["X"],
//!   "series": {"M": "moments", "E0": {"expansion": ""}, "E2": {"expansion": "X*X"}},
//!   "define": {"c0": "(1 - inv(E0))/2"},
//!   "equations": ["2*M^2*(M+2)^2*z^2 - 3*(M-1)"],
//!   "rmt": {"n": 1000, "seed": 7, "k_max": 6}
//! }
//! ```
//! Exact numbers are strings `"p/q"` (or `"a+bi"`); plain JSON integers are accepted too.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use freebool::cumulants::{Dist, Embedding};
use freebool::ncpoly::{parse, Alphabet, NCPoly, RatExpr, Var, VarSet, Word};
use freebool::Scalar;
use serde_json::{Map, Value};

use crate::Failure;

pub const DEFAULT_ORDER: usize = 32;
pub const DEFAULT_EXPAND_LEN: usize = 4;
pub const DEFAULT_ORACLE_ORDER: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Auto,
    Suffix,
    Automaton,
    Resolvent,
}

/// Where a named series comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum SeriesSource {
    Moments,
    /// Coefficient of a word in the retained variables of `E_retain[Ψ]`.
    Expansion(Word),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RmtSpec {
    pub n: usize,
    pub seed: u64,
    pub k_max: usize,
    pub bins: usize,
}

#[derive(Clone, Debug)]
pub struct Job {
    pub name: String,
    pub text: String,
    pub alpha: Alphabet,
    pub expr: RatExpr,
    pub emb: Embedding,
    pub order: usize,
    pub z_degree: Option<usize>,
    pub retain: VarSet,
    pub method: Method,
    pub expand_len: usize,
    pub oracle_order: usize,
    pub series: BTreeMap<String, SeriesSource>,
    pub define: Vec<(String, String)>,
    pub equations: Vec<String>,
    pub rmt: Option<RmtSpec>,
    /// Default output path (the `--out` flag wins).
    pub out: Option<std::path::PathBuf>,
}

fn schema(msg: impl Into<String>) -> Failure {
    Failure::Schema(msg.into())
}

pub fn scalar_of(v: &Value, what: &str) -> Result<Scalar, Failure> {
    match v {
        Value::String(s) => s.parse().map_err(|_| schema(format!("{what}: bad number {s:?}"))),
        Value::Number(n) => n
            .as_i64()
            .map(Scalar::int)
            .ok_or_else(|| schema(format!("{what}: non-integer JSON number {n}; use a \"p/q\" string"))),
        _ => Err(schema(format!("{what}: expected a number string"))),
    }
}

fn usize_of(v: &Value, what: &str) -> Result<usize, Failure> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| schema(format!("{what}: expected a nonnegative integer")))
}

/// Distribution from `"semicircle"` or `{"kind": …, …}`.
pub fn dist_of(v: &Value, what: &str) -> Result<Dist, Failure> {
    let (kind, obj) = match v {
        Value::String(s) => (s.as_str(), None),
        Value::Object(o) => (
            o.get("kind").and_then(Value::as_str).ok_or_else(|| schema(format!("{what}: missing \"kind\"")))?,
            Some(o),
        ),
        _ => return Err(schema(format!("{what}: expected a distribution"))),
    };
    let field = |k: &str| obj.and_then(|o| o.get(k));
    Ok(match kind {
        "semicircle" => match field("variance") {
            Some(x) => Dist::semicircle(scalar_of(x, what)?),
            None => Dist::standard_semicircle(),
        },
        "bernoulli" => Dist::bernoulli(),
        "arcsine" => Dist::arcsine(),
        "point" => Dist::point(scalar_of(field("value").ok_or_else(|| schema(format!("{what}: point needs \"value\"")))?, what)?),
        "moments" => {
            let list = field("moments")
                .and_then(Value::as_array)
                .ok_or_else(|| schema(format!("{what}: moments needs a \"moments\" array")))?;
            let m = list.iter().map(|x| scalar_of(x, what)).collect::<Result<Vec<_>, _>>()?;
            Dist::from_moments(m).map_err(|e| schema(format!("{what}: {e}")))?
        }
        other => return Err(schema(format!("{what}: unknown distribution kind {other:?}"))),
    })
}

/// JSON form accepted by [`dist_of`].
pub fn dist_json(d: &Dist) -> Value {
    use freebool::cumulants::DistKind;
    match d.kind() {
        DistKind::Semicircle { variance } => serde_json::json!({"kind": "semicircle", "variance": variance.to_string()}),
        DistKind::Bernoulli => serde_json::json!({"kind": "bernoulli"}),
        DistKind::Arcsine => serde_json::json!({"kind": "arcsine"}),
        DistKind::Point { c } => serde_json::json!({"kind": "point", "value": c.to_string()}),
        DistKind::Moments(m) => {
            serde_json::json!({"kind": "moments", "moments": m.iter().map(|x| x.to_string()).collect::<Vec<_>>()})
        }
    }
}

/// Parses `"X*Y*X"` (or `""` / `"1"` for the empty word) over known variables.
pub fn word_of(text: &str, alpha: &Alphabet) -> Result<Word, Failure> {
    let t = text.trim();
    if t.is_empty() || t == "1" {
        return Ok(Word::unit());
    }
    t.split('*')
        .map(|n| alpha.lookup(n.trim()).ok_or_else(|| schema(format!("unknown variable {:?} in word {text:?}", n.trim()))))
        .collect::<Result<Vec<Var>, _>>()
        .map(Word)
}

fn names_of(v: &Value, what: &str) -> Result<Vec<String>, Failure> {
    match v {
        Value::String(s) => Ok(s.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()),
        Value::Array(a) => a
            .iter()
            .map(|x| x.as_str().map(String::from).ok_or_else(|| schema(format!("{what}: expected names"))))
            .collect(),
        _ => Err(schema(format!("{what}: expected a list of names"))),
    }
}

const KEYS: &[&str] = &[
    "name", "expression", "variables", "order", "z_degree", "retain", "linearization", "expand_len",
    "oracle_order", "series", "define", "equations", "rmt", "out",
];

impl Job {
    pub fn from_file(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| schema(format!("{}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| schema(format!("{}: {e}", path.display())))?;
        Self::from_json(&v)
    }

    pub fn from_json(v: &Value) -> Result<Self, Failure> {
        let obj = v.as_object().ok_or_else(|| schema("job must be a JSON object"))?;
        if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(schema(format!("unknown job field {k:?}")));
        }
        let text = obj
            .get("expression")
            .and_then(Value::as_str)
            .ok_or_else(|| schema("missing \"expression\""))?
            .to_string();
        if text.trim().is_empty() {
            return Err(schema("empty expression"));
        }
        let mut alpha = Alphabet::new();
        let expr = parse(&text, &mut alpha).map_err(|e| schema(format!("expression: {e}")))?;
        if expr.to_poly().is_some_and(|p| p.is_zero()) {
            return Err(schema("expression is the zero polynomial"));
        }
        if alpha.is_empty() {
            return Err(schema("expression has no variables"));
        }
        let vars = obj.get("variables").and_then(Value::as_object).ok_or_else(|| schema("missing \"variables\""))?;
        let mut emb = Embedding::new();
        for (name, d) in vars {
            let v = alpha.lookup(name).ok_or_else(|| schema(format!("variable {name:?} does not occur in the expression")))?;
            emb.set_dist(v, dist_of(d, name)?);
        }
        if let Some(v) = alpha.vars().find(|&v| !emb.has_dist(v)) {
            return Err(schema(format!("no distribution for variable {:?}", alpha.name(v))));
        }
        let opt_usize = |k: &str, default: usize| obj.get(k).map_or(Ok(default), |x| usize_of(x, k));
        let order = opt_usize("order", DEFAULT_ORDER)?;
        let z_degree = obj.get("z_degree").map(|x| usize_of(x, "z_degree")).transpose()?;
        let retain = match obj.get("retain") {
            Some(r) => lookup_all(&names_of(r, "retain")?, &alpha)?,
            None => VarSet::new(),
        };
        let method = match obj.get("linearization").map(|m| m.as_str().unwrap_or("?")) {
            None | Some("auto") => Method::Auto,
            Some("suffix") => Method::Suffix,
            Some("automaton") => Method::Automaton,
            Some("resolvent") => Method::Resolvent,
            Some(other) => return Err(schema(format!("unknown linearization {other:?}"))),
        };
        let mut series = BTreeMap::new();
        if let Some(s) = obj.get("series") {
            let s = s.as_object().ok_or_else(|| schema("\"series\" must be an object"))?;
            for (name, src) in s {
                let source = match src {
                    Value::String(m) if m == "moments" => SeriesSource::Moments,
                    Value::Object(o) if o.len() == 1 && o.contains_key("expansion") => {
                        let w = o["expansion"].as_str().ok_or_else(|| schema(format!("series {name}: word must be a string")))?;
                        SeriesSource::Expansion(word_of(w, &alpha)?)
                    }
                    _ => return Err(schema(format!("series {name}: expected \"moments\" or {{\"expansion\": word}}"))),
                };
                series.insert(name.clone(), source);
            }
        }
        let define = match obj.get("define") {
            Some(Value::Object(d)) => d
                .iter()
                .map(|(k, v)| Ok((k.clone(), v.as_str().ok_or_else(|| schema(format!("define {k}: expected text")))?.to_string())))
                .collect::<Result<Vec<_>, Failure>>()?,
            Some(_) => return Err(schema("\"define\" must be an object")),
            None => Vec::new(),
        };
        let equations = match obj.get("equations") {
            Some(Value::Array(a)) => a
                .iter()
                .map(|e| e.as_str().map(String::from).ok_or_else(|| schema("equations must be strings")))
                .collect::<Result<_, _>>()?,
            Some(_) => return Err(schema("\"equations\" must be an array")),
            None => Vec::new(),
        };
        let rmt = obj.get("rmt").map(rmt_of).transpose()?;
        Ok(Job {
            name: obj.get("name").and_then(Value::as_str).unwrap_or("job").to_string(),
            text,
            alpha,
            expr,
            emb,
            order,
            z_degree,
            retain,
            method,
            expand_len: opt_usize("expand_len", DEFAULT_EXPAND_LEN)?,
            oracle_order: opt_usize("oracle_order", DEFAULT_ORACLE_ORDER)?,
            series,
            define,
            equations,
            rmt,
            out: obj.get("out").and_then(Value::as_str).map(Into::into),
        })
    }

    pub fn poly(&self) -> Option<NCPoly> {
        self.expr.to_poly()
    }

    pub fn set_retain(&mut self, names: &str) -> Result<(), Failure> {
        self.retain = lookup_all(&names_of(&Value::String(names.into()), "--retain")?, &self.alpha)?;
        Ok(())
    }

    pub fn var_names(&self, s: &VarSet) -> Vec<String> {
        s.iter().map(|&v| self.alpha.name(v).to_string()).collect()
    }

    pub fn distributions_json(&self) -> Value {
        let m: Map<String, Value> = self.alpha.vars().map(|v| (self.alpha.name(v).to_string(), dist_json(self.emb.dist(v)))).collect();
        Value::Object(m)
    }
}

fn lookup_all(names: &[String], alpha: &Alphabet) -> Result<VarSet, Failure> {
    let set: BTreeSet<Var> = names
        .iter()
        .map(|n| alpha.lookup(n).ok_or_else(|| schema(format!("retained variable {n:?} does not occur in the expression"))))
        .collect::<Result<_, _>>()?;
    Ok(set)
}

fn rmt_of(v: &Value) -> Result<RmtSpec, Failure> {
    let o = v.as_object().ok_or_else(|| schema("\"rmt\" must be an object"))?;
    let get = |k: &str, d: usize| o.get(k).map_or(Ok(d), |x| usize_of(x, k));
    Ok(RmtSpec {
        n: get("n", 1000)?,
        seed: get("seed", 1)? as u64,
        k_max: get("k_max", 6)?,
        bins: get("bins", 80)?,
    })
}
