//! Job-file driven front end: each command turns a [`Job`] into JSON (and
//! optionally CSV) by calling into `freebool` and `freebool-rmt`.

pub mod job;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use freebool::condexp::{
    check_equation, cond_exp_poly, expand_in_retained, expand_natural, integrate_out, moment_series, EquationSpec,
};
use freebool::linearize::{automaton_linearize, resolvent_pencil, suffix_linearize, verify_pencil, GradedPencil};
use freebool::mps::{MatSeries, ScalarSeries};
use freebool::ncpoly::{evaluate, parse_unguarded, Alphabet, Word};
use freebool::solver::{solve, FSolution, FixedPointProblem};
use freebool::{Mat, Ring, Scalar, ZPoly};
use freebool_rmt::{compare, trace_moments, MatrixModel};
use serde_json::{json, Map, Value};

pub use job::{Job, Method, RmtSpec, SeriesSource};

#[derive(Debug)]
pub enum Failure {
    /// Malformed job or arguments.
    Schema(String),
    /// A mathematical precondition failed inside the pipeline.
    Math(freebool::Error),
    /// `checkeq --assert` found a nonvanishing residual.
    Residual(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Schema(_) => 2,
            Failure::Math(_) => 3,
            Failure::Residual(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Schema(m) => write!(f, "invalid job: {m}"),
            Failure::Math(e) => write!(f, "{e}"),
            Failure::Residual(m) => write!(f, "equation residual found: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<freebool::Error> for Failure {
    fn from(e: freebool::Error) -> Self {
        match e {
            freebool::Error::Parse { .. } | freebool::Error::UnknownVar(_) => Failure::Schema(e.to_string()),
            e => Failure::Math(e),
        }
    }
}

pub type Res<T> = Result<T, Failure>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// JSON document plus its CSV rendering where one exists.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub json: Value,
    pub csv: Option<String>,
}

impl Output {
    pub fn render(&self, f: Format) -> Res<String> {
        match f {
            Format::Json => Ok(serde_json::to_string_pretty(&self.json).expect("JSON values serialize") + "\n"),
            Format::Csv => self.csv.clone().ok_or_else(|| Failure::Schema("this command has no CSV output".into())),
        }
    }
}

fn strs(v: &[Scalar]) -> Vec<String> {
    v.iter().map(Scalar::to_string).collect()
}

fn zpoly_json(p: &ZPoly) -> Value {
    json!(strs(p.coeffs()))
}

fn mat_json<R: Ring>(m: &Mat<R>, entry: impl Fn(&R) -> Value) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array((0..m.cols()).map(|j| entry(&m[(i, j)])).collect())).collect())
}

fn scalar_json(s: &Scalar) -> Value {
    Value::String(s.to_string())
}

fn series_json<R: Ring>(s: &MatSeries<R>, entry: impl Fn(&R) -> Value + Copy) -> Value {
    Value::Array(s.coeffs().iter().map(|m| mat_json(m, entry)).collect())
}

fn word_text(w: &Word, alpha: &Alphabet) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.letters().iter().map(|&v| alpha.name(v)).collect::<Vec<_>>().join("*")
}

/// Graded linearization for polynomials, `z`-parametric one for rational expressions.
pub fn pencil(job: &Job) -> Res<GradedPencil> {
    let poly = job.poly();
    Ok(match (job.method, &poly) {
        (Method::Auto | Method::Suffix, Some(p)) => suffix_linearize(p)?,
        (Method::Automaton, Some(p)) => automaton_linearize(p)?,
        (Method::Suffix | Method::Automaton, None) => {
            return Err(Failure::Schema("this linearization needs a polynomial expression".into()))
        }
        (Method::Auto | Method::Resolvent, None) | (Method::Resolvent, Some(_)) => resolvent_pencil(&job.expr)?,
    })
}

/// Solved graded system; `job.order` counts powers of the natural variable.
pub fn solve_graded(job: &Job, pen: &GradedPencil) -> Res<FSolution<Scalar>> {
    Ok(solve(&FixedPointProblem::graded(pen, &job.emb, job.order * pen.m)?)?)
}

pub fn solve_s_mode(job: &Job, pen: &GradedPencil) -> Res<FSolution<ZPoly>> {
    let zd = job.z_degree.unwrap_or(job.order);
    Ok(solve(&FixedPointProblem::s_mode(pen, &job.emb, job.order, zd)?)?)
}

fn header(job: &Job) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("name".into(), json!(job.name));
    m.insert("expression".into(), json!(job.text));
    m.insert("variables".into(), job.distributions_json());
    m
}

pub fn cmd_linearize(job: &Job) -> Res<Output> {
    let pen = pencil(job)?;
    let mut out = header(job);
    out.insert("m".into(), json!(pen.m));
    out.insert("dim".into(), json!(pen.dim()));
    out.insert("u".into(), json!(strs(&pen.u)));
    out.insert("v".into(), json!(strs(&pen.v)));
    let c: Map<String, Value> =
        pen.c.iter().map(|(&x, a)| (job.alpha.name(x).to_string(), mat_json(a, zpoly_json))).collect();
    out.insert("c".into(), Value::Object(c));
    if let Some(p) = job.poly() {
        out.insert("verified".into(), json!(verify_pencil(&pen, &p, 6).is_ok()));
    }
    Ok(Output { json: Value::Object(out), csv: None })
}

pub fn cmd_moments(job: &Job) -> Res<Output> {
    let pen = pencil(job)?;
    let mut out = header(job);
    out.insert("order".into(), json!(job.order));
    if pen.m > 0 {
        let sol = solve_graded(job, &pen)?;
        let m = moment_series(&sol)?;
        out.insert("moments".into(), json!(strs(m.coeffs())));
        out.insert("grading".into(), json!(pen.m));
        out.insert("graded_moments".into(), json!(strs(&sol.resolvent_series()?)));
        let mut csv = String::from("k,value\n");
        for (k, c) in m.coeffs().iter().enumerate() {
            writeln!(csv, "{k},{c}").unwrap();
        }
        return Ok(Output { json: Value::Object(out), csv: Some(csv) });
    }
    // rational: bivariate M(s, z), one polynomial in z per power of s
    let sol = solve_s_mode(job, &pen)?;
    let rows = sol.resolvent_series()?;
    out.insert("mode".into(), json!("s"));
    out.insert("z_degree".into(), json!(job.z_degree.unwrap_or(job.order)));
    out.insert("coefficients".into(), Value::Array(rows.iter().map(zpoly_json).collect()));
    out.insert("stabilization_order".into(), json!(sol.stabilization_order()?));
    let mut csv = String::from("s,z,value\n");
    for (n, p) in rows.iter().enumerate() {
        for (k, c) in p.coeffs().iter().enumerate() {
            writeln!(csv, "{n},{k},{c}").unwrap();
        }
    }
    Ok(Output { json: Value::Object(out), csv: Some(csv) })
}

pub fn cmd_oracle(job: &Job) -> Res<Output> {
    let p = job.poly().ok_or_else(|| Failure::Schema("the oracle needs a polynomial expression".into()))?;
    let k = job.oracle_order;
    let m = job.emb.phi_powers(&p, k);
    let mut out = header(job);
    out.insert("order".into(), json!(k));
    out.insert("moments".into(), json!(strs(&m)));
    let mut csv = String::from("k,value\n");
    for (k, c) in m.iter().enumerate() {
        writeln!(csv, "{k},{c}").unwrap();
    }
    Ok(Output { json: Value::Object(out), csv: Some(csv) })
}

pub fn cmd_condexp(job: &Job) -> Res<Output> {
    let pen = pencil(job)?;
    let mut out = header(job);
    out.insert("order".into(), json!(job.order));
    out.insert("retained".into(), json!(job.var_names(&job.retain)));
    let mut csv = String::from("word,k,value\n");
    let (pencil_json, expansion) = if pen.m > 0 {
        let sol = solve_graded(job, &pen)?;
        let sp = integrate_out(&sol, &job.retain)?;
        let exp = expand_natural(&sp, job.expand_len)?;
        let mut e = Map::new();
        for (w, s) in &exp {
            let name = word_text(w, &job.alpha);
            for (k, c) in s.coeffs().iter().enumerate() {
                writeln!(csv, "{name},{k},{c}").unwrap();
            }
            e.insert(name, json!(strs(s.coeffs())));
        }
        let pj = json!({
            "grading": sp.grading,
            "u": strs(&sp.u),
            "v": strs(&sp.v),
            "retained": sp.retained.iter().map(|(&x, c)| (job.alpha.name(x).to_string(), series_json(c, scalar_json))).collect::<Map<_, _>>(),
            "absorbed": series_json(&sp.absorbed, scalar_json),
        });
        (pj, Value::Object(e))
    } else {
        let sol = solve_s_mode(job, &pen)?;
        let sp = integrate_out(&sol, &job.retain)?;
        let exp = expand_in_retained(&sp, job.expand_len)?;
        let mut e = Map::new();
        for (w, s) in &exp {
            let name = word_text(w, &job.alpha);
            for (n, p) in s.iter().enumerate() {
                for (k, c) in p.coeffs().iter().enumerate() {
                    writeln!(csv, "{name},s{n}z{k},{c}").unwrap();
                }
            }
            e.insert(name, Value::Array(s.iter().map(zpoly_json).collect()));
        }
        let pj = json!({
            "grading": 0,
            "u": sp.u.iter().map(zpoly_json).collect::<Vec<_>>(),
            "v": sp.v.iter().map(zpoly_json).collect::<Vec<_>>(),
            "retained": sp.retained.iter().map(|(&x, c)| (job.alpha.name(x).to_string(), series_json(c, zpoly_json))).collect::<Map<_, _>>(),
            "absorbed": series_json(&sp.absorbed, zpoly_json),
        });
        (pj, Value::Object(e))
    };
    out.insert("pencil".into(), pencil_json);
    out.insert("expansion".into(), expansion);
    if let Some(p) = job.poly() {
        out.insert("polynomial".into(), json!(cond_exp_poly(&p, &job.retain, &job.emb).display(&job.alpha).to_string()));
    }
    Ok(Output { json: Value::Object(out), csv: Some(csv) })
}

/// Named series of a job: its `series` sources, then its `define`s in order.
/// Without any `series`, `M` is bound to the moment series.
pub fn series_bindings(job: &Job, sol: &FSolution<Scalar>) -> Res<BTreeMap<String, ScalarSeries>> {
    let mut sources = job.series.clone();
    if sources.is_empty() {
        sources.insert("M".into(), SeriesSource::Moments);
    }
    let mut out = BTreeMap::new();
    let mut expansion: Option<BTreeMap<Word, ScalarSeries>> = None;
    for (name, src) in &sources {
        let s = match src {
            SeriesSource::Moments => moment_series(sol)?,
            SeriesSource::Expansion(w) => {
                if w.letters().iter().any(|v| !job.retain.contains(v)) {
                    return Err(Failure::Schema(format!("series {name}: word uses a variable that is not retained")));
                }
                if expansion.is_none() {
                    let longest = sources
                        .values()
                        .filter_map(|s| if let SeriesSource::Expansion(w) = s { Some(w.len()) } else { None })
                        .max()
                        .unwrap_or(0);
                    expansion = Some(expand_natural(&integrate_out(sol, &job.retain)?, longest)?);
                }
                let e = expansion.as_ref().unwrap();
                e.get(w).cloned().unwrap_or_else(|| ScalarSeries::zero(job.order))
            }
        };
        out.insert(name.clone(), s);
    }
    // defines may refer to each other in any order
    let mut pending: Vec<&(String, String)> = job.define.iter().collect();
    while !pending.is_empty() {
        let before = pending.len();
        let mut last_err = None;
        pending.retain(|(name, text)| match eval_series(text, &out, job.order) {
            Ok(s) => {
                out.insert(name.clone(), s);
                false
            }
            Err(e) => {
                last_err = Some(e);
                true
            }
        });
        if pending.len() == before {
            return Err(last_err.expect("nonempty pending list"));
        }
    }
    Ok(out)
}

/// Evaluates a rational expression in named series and the series variable `z`.
pub fn eval_series(text: &str, env: &BTreeMap<String, ScalarSeries>, order: usize) -> Res<ScalarSeries> {
    let mut names = Alphabet::new();
    let e = parse_unguarded(text, &mut names)?;
    let mut assign = BTreeMap::new();
    for v in names.vars() {
        let n = names.name(v);
        let s = match env.get(n) {
            Some(s) => s.clone(),
            None if n == "z" => ScalarSeries::var(order),
            None => return Err(Failure::Schema(format!("{text:?}: unknown series {n:?}"))),
        };
        assign.insert(v, s);
    }
    if assign.is_empty() {
        let c = e.eps();
        return Ok(ScalarSeries::constant(c, order));
    }
    Ok(evaluate(&e, &assign)?)
}

/// Residual valuation per equation (`None` = vanishes to the job order).
pub fn equation_orders(job: &Job) -> Res<Vec<(String, Option<usize>)>> {
    let pen = pencil(job)?;
    if pen.m == 0 {
        return Err(Failure::Schema("checkeq works on polynomial expressions".into()));
    }
    let sol = solve_graded(job, &pen)?;
    let env = series_bindings(job, &sol)?;
    job.equations
        .iter()
        .map(|t| {
            let eq = EquationSpec::parse(t)?;
            Ok((t.clone(), check_equation(&eq, &env)?))
        })
        .collect()
}

pub fn residual_text(order: usize, r: Option<usize>) -> Value {
    match r {
        None => json!(format!("≥ {}", order + 1)),
        Some(n) => json!(n),
    }
}

/// Residual report; the flag tells whether every equation vanishes.
pub fn cmd_checkeq(job: &Job) -> Res<(Output, bool)> {
    if job.equations.is_empty() {
        return Err(Failure::Schema("job has no \"equations\"".into()));
    }
    let orders = equation_orders(job)?;
    let mut out = header(job);
    out.insert("order".into(), json!(job.order));
    let mut csv = String::from("equation,residual_order\n");
    let mut list = Vec::new();
    for (t, r) in &orders {
        let ro = residual_text(job.order, *r);
        writeln!(csv, "\"{t}\",{}", ro.as_str().map_or_else(|| ro.to_string(), String::from)).unwrap();
        list.push(json!({"equation": t, "residual_order": ro, "vanishes": r.is_none()}));
    }
    out.insert("equations".into(), Value::Array(list));
    let ok = orders.iter().all(|(_, r)| r.is_none());
    Ok((Output { json: Value::Object(out), csv: Some(csv) }, ok))
}

pub fn cmd_rmt(job: &Job, seed: Option<u64>) -> Res<Output> {
    let spec = job.rmt.clone().unwrap_or(RmtSpec { n: 1000, seed: 1, k_max: 6, bins: 80 });
    let seed = seed.unwrap_or(spec.seed);
    let model = MatrixModel::from_embedding(&job.emb, spec.n, seed)?;
    let mats = model.sample(0)?;
    let tm = trace_moments(&job.expr, &mats, spec.k_max)?;
    let mut out = header(job);
    out.insert("n".into(), json!(spec.n));
    out.insert("seed".into(), json!(seed));
    out.insert("k_max".into(), json!(spec.k_max));
    out.insert("hermitian_defect".into(), json!(tm.hermitian_defect));
    if tm.hermitian_warning() {
        eprintln!("warning: evaluated matrix deviates from Hermitian by {:e}", tm.hermitian_defect);
    }
    let targets = match job.poly() {
        Some(_) => {
            let pen = pencil(job)?;
            let sub = Job { order: spec.k_max, ..job.clone() };
            Some(moment_series(&solve_graded(&sub, &pen)?)?.coeffs().to_vec())
        }
        None => None,
    };
    let report: Vec<Value> = match &targets {
        Some(t) => compare(&tm.moments, t, 1)
            .iter()
            .map(|c| {
                json!({"k": c.k, "estimate": c.estimate.re, "estimate_im": c.estimate.im,
                       "target": c.target.to_string(), "rel_err": c.rel_err, "pass": c.pass})
            })
            .collect(),
        None => tm.moments.iter().enumerate().skip(1).map(|(k, m)| json!({"k": k, "estimate": m.re, "estimate_im": m.im})).collect(),
    };
    let all_pass = report.iter().all(|r| r.get("pass").and_then(Value::as_bool).unwrap_or(true));
    out.insert("report".into(), Value::Array(report));
    out.insert("all_pass".into(), json!(all_pass));
    let csv = if freebool_rmt::HAS_EIGENSOLVER {
        let ev = freebool_rmt::spectrum(&job.expr, &mats)?;
        let h = freebool_rmt::histogram(&ev, spec.bins)?;
        let width = if h.len() > 1 { h[1].0 - h[0].0 } else { 1.0 };
        let mut csv = String::from("value,count,density\n");
        for (x, d) in h {
            let count = (d * width * ev.len() as f64).round();
            writeln!(csv, "{x},{count},{d}").unwrap();
        }
        Some(csv)
    } else {
        None
    };
    Ok(Output { json: Value::Object(out), csv })
}

/// Reads the exact numbers back out of an emitted moments document.
pub fn moments_from_json(v: &Value) -> Res<Vec<Scalar>> {
    v.get("moments")
        .and_then(Value::as_array)
        .ok_or_else(|| Failure::Schema("no \"moments\" array".into()))?
        .iter()
        .map(|x| job::scalar_of(x, "moments"))
        .collect()
}
