//! End-to-end acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. Exit
//! status is nonzero if any exact criterion fails; the random-matrix check
//! (8) is statistical and reported as-is, see `KNOWN_STATISTICAL`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use freebool::condexp::{cond_exp_closed, cond_exp_poly, expand_natural, integrate_out, moment_series};
use freebool::cumulants::{Dist, Embedding};
use freebool::linearize::suffix_linearize;
use freebool::mps::ScalarSeries;
use freebool::ncpoly::{free_derivative_k, ldelta, rdelta, NCPoly, Var, VarSet, Word};
use freebool::solver::{iteration_trace, solve, FixedPointProblem};
use freebool::{Scalar, ZPoly};
use freebool_cli::{equation_orders, pencil, series_bindings, solve_graded, solve_s_mode, Job};
use freebool_rmt::{compare, compare_scaled, trace_moments, MatrixModel};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria whose failure is reported but does not fail the run.
const KNOWN_STATISTICAL: &[u8] = &[8];

type Check = Result<String, String>;
type Suite = (&'static str, fn() -> Result<(), String>);
type Criterion = (u8, &'static str, u64, fn() -> Check);

fn jobs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("jobs")
}

fn job(name: &str) -> Job {
    Job::from_file(&jobs_dir().join(format!("{name}.json"))).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn with_order(mut j: Job, k: usize) -> Job {
    j.order = k;
    j
}

fn ints(v: &[i64]) -> Vec<Scalar> {
    v.iter().map(|&x| Scalar::int(x)).collect()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn moments_of(j: &Job) -> Result<Vec<Scalar>, String> {
    let pen = pencil(j).map_err(err)?;
    let sol = solve_graded(j, &pen).map_err(err)?;
    Ok(moment_series(&sol).map_err(err)?.coeffs().to_vec())
}

fn all_vanish(j: &Job) -> Result<(), String> {
    for (eq, r) in equation_orders(j).map_err(err)? {
        ensure(r.is_none(), || format!("{eq}: residual at z^{}", r.unwrap()))?;
    }
    Ok(())
}

fn catalan(n: usize) -> Scalar {
    (0..n).fold(Scalar::one(), |c, k| &c * &Scalar::ratio(2 * (2 * k as i64 + 1), k as i64 + 2))
}

// --- 1 -------------------------------------------------------------------

fn additive() -> Check {
    let j = job("additive");
    let m = moments_of(&with_order(j.clone(), 16))?;
    let want = ints(&[2, 8, 40, 224]);
    for (i, w) in want.iter().enumerate() {
        ensure(&m[2 * i + 2] == w, || format!("z^{}: {} != {w}", 2 * i + 2, m[2 * i + 2]))?;
    }
    // semicircle of variance 2 from the marginals alone
    let oracle = j.emb.phi_powers(&j.poly().unwrap(), 8);
    ensure(oracle[..=8] == m[..=8], || "series differs from the oracle".into())?;
    Ok("2, 8, 40, 224 at z^2..z^8".into())
}

// --- 2 -------------------------------------------------------------------

fn alpha_invariance() -> Check {
    let (a, b) = (with_order(job("anticommutator"), 16), with_order(job("alpha-phase"), 16));
    let ma = moments_of(&a)?;
    ensure(ma == moments_of(&b)?, || "moment series differ".into())?;
    for x in ["X", "Y"] {
        let mut exps = Vec::new();
        for j in [&a, &b] {
            let mut j = j.clone();
            j.set_retain(x).map_err(err)?;
            let pen = pencil(&j).map_err(err)?;
            let sol = solve_graded(&j, &pen).map_err(err)?;
            exps.push(expand_natural(&integrate_out(&sol, &j.retain).map_err(err)?, 6).map_err(err)?);
        }
        ensure(exps[0] == exps[1], || format!("E_{x} expansions differ"))?;
    }
    let oracle = a.emb.phi_powers(&a.poly().unwrap(), 5);
    ensure(oracle[..=5] == ma[..=5], || format!("oracle {:?} vs {:?}", &oracle[..=5], &ma[..=5]))?;
    Ok(format!("equal to K = 16; oracle k <= 5: {}", ma[..=5].iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")))
}

// --- 3 -------------------------------------------------------------------

fn degree_three_semicircle() -> Check {
    let j = with_order(job("t3-semicircle"), 32);
    let pen = pencil(&j).map_err(err)?;
    ensure(pen.dim() == 7, || format!("pencil dimension {}", pen.dim()))?;
    let sol = solve_graded(&j, &pen).map_err(err)?;
    let env = series_bindings(&j, &sol).map_err(err)?;
    let prefix = |name: &str, want: &[i64]| {
        let got = &env[name].coeffs()[..want.len()];
        ensure(got == ints(want).as_slice(), || format!("{name}: {got:?}"))
    };
    prefix("M", &[1, 0, 6, 0, 96, 0, 2064])?;
    prefix("c0", &[0, 0, 2, 0, 20, 0, 376])?;
    prefix("c2", &[0, 0, 1, 0, 8, 0, 140])?;
    all_vanish(&j)?;
    Ok("series, M-equation and both quartics to z^33".into())
}

// --- 4 -------------------------------------------------------------------

fn free_group_walk() -> Check {
    let j = job("walk");
    let m = moments_of(&with_order(j.clone(), 32))?;
    let want = ints(&[48, 5184, 720384, 113304576, 19186556928]);
    for (i, w) in want.iter().enumerate() {
        ensure(&m[2 * i + 2] == w, || format!("z^{}: {}", 2 * i + 2, m[2 * i + 2]))?;
    }
    all_vanish(&j)?;
    let m = moments_of(&with_order(j, 64))?;
    let rho = domb_sykes(&m);
    let rel = (rho - 15.08724).abs() / 15.08724;
    ensure(rel < 0.02, || format!("rho ~ {rho:.5}"))?;
    Ok(format!("quartic to z^33; rho ~ {rho:.5} ({:.3}% off)", 100.0 * rel))
}

/// Radius estimate from an even series: `sqrt(m_n / m_{n-2})` is linear in
/// `1/n` near `n = ∞` for a square-root singularity; extrapolate the last two.
fn domb_sykes(m: &[Scalar]) -> f64 {
    let k = (m.len() - 1) & !1;
    let r = |n: usize| (&m[n] / &m[n - 2]).to_f64().0.sqrt();
    let (n1, n2) = ((k - 2) as f64, k as f64);
    let (r1, r2) = (r(k - 2), r(k));
    (n2 * r2 - n1 * r1) / (n2 - n1)
}

// --- 5 -------------------------------------------------------------------

fn lie_polynomial() -> Check {
    let a = job("lie-semicircle");
    all_vanish(&a)?;
    let b = job("lie-bernoulli");
    let k = b.order;
    let pen = pencil(&b).map_err(err)?;
    let sol = solve_graded(&b, &pen).map_err(err)?;
    let exp = expand_natural(&integrate_out(&sol, &b.retain).map_err(err)?, pen.m * k).map_err(err)?;
    let y = *b.retain.iter().next().unwrap();
    // reduce with Y² = 1: even powers feed the unit, odd ones Y
    let (mut unit, mut lin) = (ScalarSeries::zero(k), ScalarSeries::zero(k));
    for (w, c) in &exp {
        ensure(w.letters().iter().all(|&v| v == y), || "unexpected letter".into())?;
        if w.len() % 2 == 0 {
            unit = unit.add(c);
        } else {
            lin = lin.add(c);
        }
    }
    let mut target = vec![Scalar::zero(); k + 1];
    for n in 0..=k / 2 {
        target[2 * n] = &catalan(n) * &Scalar::int(3).pow(n as u32);
    }
    ensure(unit == ScalarSeries::from_coeffs(target, k), || format!("E_Y unit part {:?}", &unit.coeffs()[..9]))?;
    ensure(lin.is_zero(), || "E_Y depends on Y".into())?;
    Ok(format!("quartic to z^{}; E_Y = sum Cat(n) 3^n z^(4n) to K = {k}", a.order + 1))
}

// --- 6 -------------------------------------------------------------------

/// Truncated bivariate series: `[s-power][z-power]`.
#[derive(Clone, PartialEq)]
struct Biv(Vec<Vec<Scalar>>);

impl Biv {
    fn zero(ks: usize, kz: usize) -> Self {
        Biv(vec![vec![Scalar::zero(); kz + 1]; ks + 1])
    }

    fn mono(c: Scalar, i: usize, j: usize, ks: usize, kz: usize) -> Self {
        let mut b = Self::zero(ks, kz);
        b.0[i][j] = c;
        b
    }

    fn add(&self, o: &Self) -> Self {
        Biv(self.0.iter().zip(&o.0).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect()).collect())
    }

    fn scale(&self, c: &Scalar) -> Self {
        Biv(self.0.iter().map(|r| r.iter().map(|x| x * c).collect()).collect())
    }

    fn mul(&self, o: &Self) -> Self {
        let (ks, kz) = (self.0.len() - 1, self.0[0].len() - 1);
        let mut out = Self::zero(ks, kz);
        for (i, ra) in self.0.iter().enumerate() {
            for (j, a) in ra.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
                for (i2, rb) in o.0.iter().enumerate().take(ks + 1 - i) {
                    for (j2, b) in rb.iter().enumerate().take(kz + 1 - j) {
                        out.0[i + i2][j + j2] += &(a * b);
                    }
                }
            }
        }
        out
    }
}

/// `1 + z s² ((1 − z s²)² − s²/16)^{−1/2}`: the closed form at `a = b = 1/8`
/// after `z → z s²`, `a → a s`, `b → b s`. Of the two branches of `√D` the
/// one with `√D(0) < 0` is taken, since `φ(X(1 − aX − bY)⁻¹X) > 0` fixes the
/// sign of the `z` coefficient.
fn rational_closed_form(ks: usize, kz: usize) -> Biv {
    let m = |c: Scalar, i, j| Biv::mono(c, i, j, ks, kz);
    let u = m(Scalar::int(-2), 2, 1).add(&m(Scalar::one(), 4, 2)).add(&m(Scalar::ratio(-1, 16), 2, 0));
    // (1 + u)^{-1/2} = Σ (−1)^k C(2k, k)/4^k u^k
    let (mut acc, mut pw, mut c) = (m(Scalar::one(), 0, 0), m(Scalar::one(), 0, 0), Scalar::one());
    for k in 1..=ks / 2 {
        pw = pw.mul(&u);
        c = &c * &Scalar::ratio(-(2 * k as i64 - 1), 2 * k as i64);
        acc = acc.add(&pw.scale(&c));
    }
    m(Scalar::one(), 0, 0).add(&m(Scalar::one(), 2, 1).mul(&acc))
}

fn rational_example() -> Check {
    let j = job("rational");
    let (ks, kz) = (j.order, j.z_degree.unwrap_or(j.order));
    let pen = pencil(&j).map_err(err)?;
    let sol = solve_s_mode(&j, &pen).map_err(err)?;
    let got: Vec<ZPoly> = sol.resolvent_series().map_err(err)?;
    let want = rational_closed_form(ks, kz);
    for (n, row) in want.0.iter().enumerate() {
        for (k, c) in row.iter().enumerate() {
            ensure(&got[n].coeff(k) == c, || format!("s^{n} z^{k}: {} != {c}", got[n].coeff(k)))?;
        }
    }
    let stab = sol.stabilization_order().map_err(err)?;
    ensure(stab >= ks, || format!("stabilization order {stab}"))?;
    Ok(format!("closed form to s^{ks} z^{kz}; stabilization order {stab}"))
}

// --- 7 -------------------------------------------------------------------

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn shifted(d: &Dist, c: i64, n: usize) -> Dist {
    let m = d.moments(n).unwrap();
    let c = Scalar::int(c);
    let out = (0..=n)
        .map(|k| {
            let mut b = Scalar::one();
            let mut acc = Scalar::zero();
            for (j, mj) in m.iter().enumerate().take(k + 1) {
                acc += &(&b * &(mj * &c.pow((k - j) as u32)));
                b = &b * &Scalar::ratio((k - j) as i64, j as i64 + 1);
            }
            acc
        })
        .collect();
    Dist::from_moments(out).unwrap()
}

fn skewed() -> Embedding {
    Embedding::new()
        .with(0, shifted(&Dist::standard_semicircle(), 1, 40))
        .with(1, shifted(&Dist::bernoulli(), 2, 40))
        .with(2, shifted(&Dist::arcsine(), -1, 40))
}

fn word(r: &mut ChaCha8Rng, letters: &[Var], min: usize, max: usize) -> Word {
    let n = r.gen_range(min..=max);
    Word((0..n).map(|_| letters[r.gen_range(0..letters.len())]).collect())
}

fn poly(r: &mut ChaCha8Rng, letters: &[Var], terms: usize, max: usize) -> NCPoly {
    let mut p = NCPoly::zero();
    for _ in 0..terms {
        let w = word(r, letters, 0, max);
        p.add_term(w, Scalar::ratio(r.gen_range(-4..=4), r.gen_range(1..=3)));
    }
    p
}

fn set(v: &[Var]) -> VarSet {
    v.iter().copied().collect()
}

const A: &[Var] = &[0];
const B: &[Var] = &[1, 2];
const ALL: &[Var] = &[0, 1, 2];

fn cac_vanishing() -> Result<(), String> {
    let (e, mut r) = (skewed(), rng(11));
    for _ in 0..40 {
        let n = r.gen_range(2..=5);
        let mut a: Vec<Word> =
            (0..n).map(|_| if r.gen_bool(0.5) { word(&mut r, A, 1, 2) } else { word(&mut r, B, 1, 2) }).collect();
        a[0] = word(&mut r, A, 1, 2);
        a[n - 1] = word(&mut r, B, 1, 2);
        ensure(e.mixed_boolean_cumulant(&a).is_zero(), || format!("{a:?}"))?;
    }
    Ok(())
}

fn product_and_units() -> Result<(), String> {
    let (e, mut r) = (skewed(), rng(12));
    for _ in 0..40 {
        let n = r.gen_range(2..=5);
        let a: Vec<Word> = (0..n).map(|_| word(&mut r, ALL, 1, 2)).collect();
        let p = r.gen_range(1..n);
        let mut merged = a[..p - 1].to_vec();
        merged.push(a[p - 1].concat(&a[p]));
        merged.extend_from_slice(&a[p + 1..]);
        let rhs = &e.mixed_boolean_cumulant(&a[..p]) * &e.mixed_boolean_cumulant(&a[p..]) + e.mixed_boolean_cumulant(&a);
        ensure(e.mixed_boolean_cumulant(&merged) == rhs, || format!("product formula {a:?} at {p}"))?;
        let mut first = a.clone();
        first[0] = Word::unit();
        ensure(e.mixed_boolean_cumulant(&first).is_zero(), || format!("unit in front {a:?}"))?;
        let mut inner = a.clone();
        inner.insert(p, Word::unit());
        if n >= 2 {
            ensure(e.mixed_boolean_cumulant(&inner) == e.mixed_boolean_cumulant(&a), || format!("inner unit {a:?}"))?;
        }
    }
    Ok(())
}

fn alternating(a: &[Word], b: &[Word]) -> Vec<Word> {
    let mut out = Vec::new();
    for (i, w) in a.iter().enumerate() {
        out.push(w.clone());
        if let Some(v) = b.get(i) {
            out.push(v.clone());
        }
    }
    out
}

fn splitting_and_bocu2() -> Result<(), String> {
    let (e, mut r) = (skewed(), rng(15));
    for _ in 0..30 {
        let n = r.gen_range(1..=3);
        let a: Vec<Word> = (0..n).map(|_| word(&mut r, A, 1, 2)).collect();
        let b: Vec<Word> = (0..n - 1).map(|_| word(&mut r, B, 1, 3)).collect();
        let grouped = alternating(&a, &b);
        let mut split = Vec::new();
        for (i, w) in a.iter().enumerate() {
            split.push(w.clone());
            if let Some(v) = b.get(i) {
                split.extend(v.letters().iter().map(|&x| Word::letter(x)));
            }
        }
        ensure(e.mixed_boolean_cumulant(&grouped) == e.mixed_boolean_cumulant(&split), || format!("split {grouped:?}"))?;
        ensure(e.bocu2(&a, &b) == e.mixed_boolean_cumulant(&grouped), || format!("bocu2 {grouped:?}"))?;
    }
    Ok(())
}

fn integration_formula() -> Result<(), String> {
    let (e, mut r) = (skewed(), rng(31));
    for retained in [set(&[0]), set(&[1, 2])] {
        let letters: Vec<Var> = retained.iter().copied().collect();
        for _ in 0..10 {
            let p = poly(&mut r, ALL, 3, 5);
            let ep = cond_exp_poly(&p, &retained, &e);
            ensure(ep == cond_exp_closed(&p, &retained, &e), || format!("recurrence vs closed {p:?}"))?;
            let (b, q) = (poly(&mut r, &letters, 2, 3), poly(&mut r, &letters, 2, 3));
            ensure(e.phi(&b.mul(&ep).mul(&q)) == e.phi(&b.mul(&p).mul(&q)), || format!("phi-compatibility {p:?}"))?;
        }
    }
    Ok(())
}

fn derivative_identities() -> Result<(), String> {
    let e = Embedding::new()
        .with(0, shifted(&Dist::standard_semicircle(), 1, 40))
        .with(1, shifted(&Dist::bernoulli(), 2, 40));
    let (xs, ys) = (set(&[0]), set(&[1]));
    let dx = e.dist(0).clone();
    let mut r = rng(34);
    for _ in 0..20 {
        let p = poly(&mut r, &[0, 1], 3, 6);
        let lhs = e.bbeta(&p, &xs);
        let left = &p.eps() + &ldelta(&p, 0).apply(|l| e.fbeta_word(l, &xs), |w| e.bbeta_word(w, &xs));
        let right = &p.eps() + &rdelta(&p, 0).apply(|l| e.bbeta_word(l, &xs), |w| e.fbeta_word(w, &xs));
        ensure(lhs == left && lhs == right, || format!("block cumulants {p:?}"))?;
        let mut rhs = p.eps();
        for k in 1..=p.degree() {
            let mut acc = Scalar::zero();
            for (parts, c) in free_derivative_k(&p, 0, k) {
                if parts[0].is_empty() && parts[k].is_empty() {
                    acc += &parts[1..k].iter().fold(c.clone(), |a, w| &a * &e.bbeta_word(w, &ys));
                }
            }
            rhs += &(&dx.boolean(k) * &acc);
        }
        ensure(e.fbeta(&p, &xs) == rhs, || format!("higher derivatives {p:?}"))?;
    }
    Ok(())
}

fn solver_orders() -> Result<(), String> {
    for name in ["anticommutator", "lie-semicircle", "t3-semicircle", "walk"] {
        let j = job(name);
        let pen = suffix_linearize(&j.poly().unwrap()).map_err(err)?;
        let prob = FixedPointProblem::graded(&pen, &j.emb, 8 * pen.m).map_err(err)?;
        let trace = iteration_trace(&prob, 6).map_err(err)?;
        ensure(trace.iter().enumerate().all(|(r, &o)| o >= r), || format!("{name}: agreement orders {trace:?}"))?;
        let sol = solve(&prob).map_err(err)?;
        ensure(sol.residual_order().map_err(err)?.is_none(), || format!("{name}: nonzero residual"))?;
    }
    Ok(())
}

fn moments_match_oracle() -> Result<(), String> {
    let mut names: Vec<String> = std::fs::read_dir(jobs_dir())
        .map_err(err)?
        .map(|e| e.unwrap().path().file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for name in names {
        let j = job(&name);
        let Some(p) = j.poly() else { continue };
        let m = moments_of(&with_order(j.clone(), 6))?;
        ensure(m[..=6] == j.emb.phi_powers(&p, 6)[..=6], || format!("{name}: moments differ from the oracle"))?;
    }
    Ok(())
}

fn multiplicative_subordination() -> Result<(), String> {
    let e = Embedding::new()
        .with(0, shifted(&Dist::standard_semicircle(), 1, 40))
        .with(1, shifted(&Dist::bernoulli(), 2, 40));
    let k = 8;
    let xy = Word(vec![0, 1]);
    let mut b = vec![Scalar::one()];
    b.extend((1..=k).map(|n| e.mixed_boolean_cumulant(&vec![xy.clone(); n])));
    let omega = |first: Var, second: Var| {
        let mut c = vec![Scalar::zero()];
        c.extend((0..k).map(|n| {
            let args: Vec<Word> = (0..2 * n + 1).map(|i| Word::letter(if i % 2 == 0 { first } else { second })).collect();
            e.mixed_boolean_cumulant(&args)
        }));
        ScalarSeries::from_coeffs(c, k)
    };
    let z = ScalarSeries::var(k);
    let lhs = z.mul(&ScalarSeries::from_coeffs(b, k));
    ensure(lhs == z.add(&omega(1, 0).mul(&omega(0, 1))), || "zB != z + w1 w2".into())
}

fn property_suites() -> Check {
    let suites: [Suite; 8] = [
        ("cyclic alternation", cac_vanishing),
        ("product formula + units", product_and_units),
        ("splitting + bocu2", splitting_and_bocu2),
        ("integration formula + phi", integration_formula),
        ("derivative identities", derivative_identities),
        ("agreement orders + residual", solver_orders),
        ("moments vs oracle", moments_match_oracle),
        ("subordination", multiplicative_subordination),
    ];
    let mut notes = Vec::new();
    for (name, f) in suites {
        let t = Instant::now();
        f().map_err(|e| format!("{name}: {e}"))?;
        let dt = t.elapsed();
        ensure(dt < Duration::from_secs(60), || format!("{name}: {dt:.1?}"))?;
        notes.push(format!("{name} {:.2}s", dt.as_secs_f64()));
    }
    Ok(notes.join("; "))
}

// --- 8 -------------------------------------------------------------------

fn random_matrices() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for (label, name) in [("T1", "anticommutator"), ("T3", "t3-semicircle")] {
        let t = Instant::now();
        let j = job(name);
        let spec = j.rmt.clone().unwrap();
        let mats = MatrixModel::from_embedding(&j.emb, spec.n, spec.seed).map_err(err)?.sample(0).map_err(err)?;
        let tm = trace_moments(&j.expr, &mats, spec.k_max + 1).map_err(err)?;
        let targets = moments_of(&with_order(j.clone(), spec.k_max + 1))?;
        let strict = compare(&tm.moments[..=spec.k_max], &targets[..=spec.k_max], 1);
        let scaled = compare_scaled(&tm.moments[..=spec.k_max], &targets, 1);
        let dt = t.elapsed();
        let strict_ok = strict.iter().all(|c| c.pass);
        ok &= strict_ok && dt < Duration::from_secs(30);
        let detail: Vec<String> =
            strict.iter().map(|c| format!("k={} {:.3}/{}{}", c.k, c.estimate.re, c.target, if c.pass { "" } else { "!" })).collect();
        lines.push(format!(
            "{label} ({name}) N={} seed={} {:.1}s [{}] scale-aware: {}",
            spec.n,
            spec.seed,
            dt.as_secs_f64(),
            detail.join(" "),
            if scaled.iter().all(|c| c.pass) { "all within" } else { "off" }
        ));
    }
    if ok {
        Ok(lines.join(" | "))
    } else {
        Err(lines.join(" | "))
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "additive convolution", 1, additive),
        (2, "phase invariance", 5, alpha_invariance),
        (3, "degree-3 polynomial, semicircles", 30, degree_three_semicircle),
        (4, "free-group walk", 60, free_group_walk),
        (5, "Lie polynomial", 10, lie_polynomial),
        (6, "rational expression", 10, rational_example),
        (7, "property suites", 8 * 60, property_suites),
        (8, "random matrices", 60, random_matrices),
    ];
    let mut hard_failures = 0;
    for (id, name, limit, f) in criteria {
        let t = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let dt = t.elapsed().as_secs_f64();
        let res = match res {
            Ok(_) if dt >= limit as f64 => Err(format!("took {dt:.2}s, limit {limit}s")),
            r => r,
        };
        match &res {
            Ok(d) => println!("PASS {id} {name} ({dt:.2}s < {limit}s): {d}"),
            Err(d) => {
                println!("FAIL {id} {name} ({dt:.2}s): {d}");
                if KNOWN_STATISTICAL.contains(&id) {
                    println!("     criterion {id} is a single-trial statistical check; see the README");
                } else {
                    hard_failures += 1;
                }
            }
        }
    }
    if hard_failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
