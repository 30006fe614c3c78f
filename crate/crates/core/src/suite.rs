//! Named invariance suites. Each suite walks the built-in corpus, executes
//! the module invariants as properties and collects one record per
//! (property, input). Expected values come from oracles computed on the spot;
//! the only frozen constant is the sign exponent.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::{analytic_torsion_circle, closed_form_det, truncated_det, CircleModel};
use crate::bundle::{check_flatness, kt_class, FBundle, FlatBundle, QBundle, EPS_FLAT};
use crate::complex::{validate, CellId, Complex, EdgePath, Step, ViolationKind};
use crate::corpus::{content_hash, corpus_get, corpus_names, lens_rotation_bundle, random_flat_bundle, random_invertible, rotation, CorpusEntry, Family};
use crate::error::{Error, Result};
use crate::euler::{act_in, loop_modify, spray_difference_in, H1Basis, H1Class, Spray};
use crate::matrix::{FMat, QMat};
use crate::scalar::{Rational, Scalar};
use crate::subdivide::barycentric_subdivide;
use crate::torsion::{
    assemble, euler_action_on_torsion, ft_ratio_along, harmonic_bases, harmonic_value, spray_change_ratio, t_comb,
    t_comb_squared_elimination, base_change_ratio, S_EXPONENT,
};

pub const SUITES: [&str; 6] = ["flatness", "euler-action", "torsion-invariance", "subdivision", "cheeger-muller", "ft-transformation"];

pub const DEFAULT_SEED: u64 = 0x7e57_5eed;

/// Module invariant → suite executing it.
pub const COVERAGE: &[(&str, &str)] = &[
    ("complex.dd-zero", "flatness"),
    ("complex.chi-subdivision", "subdivision"),
    ("complex.homology-subdivision", "subdivision"),
    ("complex.flat-subdivision", "subdivision"),
    ("bundle.transport-functorial", "flatness"),
    ("bundle.kt-detour", "flatness"),
    ("bundle.kt-homology", "flatness"),
    ("bundle.kt-unimodular", "flatness"),
    ("euler.action-identity", "euler-action"),
    ("euler.action-compose", "euler-action"),
    ("euler.free-transitive", "euler-action"),
    ("euler.diff-vs-torsion", "euler-action"),
    ("euler.cocycle", "euler-action"),
    ("euler.loop-modify", "euler-action"),
    ("torsion.dd-zero", "torsion-invariance"),
    ("torsion.dimensions", "torsion-invariance"),
    ("torsion.laplacian-vs-det", "torsion-invariance"),
    ("torsion.inv-spray", "torsion-invariance"),
    ("torsion.inv-gauge", "torsion-invariance"),
    ("torsion.inv-kernel-basis", "torsion-invariance"),
    ("torsion.inv-subdivision", "torsion-invariance"),
    ("torsion.action-multiplicative", "ft-transformation"),
    ("torsion.base-change", "ft-transformation"),
    ("analytic.truncation", "cheeger-muller"),
    ("analytic.scale", "cheeger-muller"),
    ("analytic.cheeger-muller", "cheeger-muller"),
];

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOptions {
    pub exact: bool,
    /// Overrides every non-exact tolerance.
    pub tol: Option<f64>,
    /// Run only the property (or `property@input` id) given.
    pub only: Option<String>,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { exact: false, tol: None, only: None, seed: DEFAULT_SEED }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyRecord {
    pub index: usize,
    pub id: String,
    pub property: String,
    pub description: String,
    pub inputs_digest: String,
    pub measured: BTreeMap<String, f64>,
    /// `0` for exact comparisons.
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repro: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub version: String,
    pub mode: String,
    pub seed: u64,
    pub status: String,
    pub passed: usize,
    pub failed: usize,
    pub properties: Vec<PropertyRecord>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

struct Outcome {
    measured: Vec<(String, f64)>,
    pass: bool,
    note: Option<String>,
}

fn outcome(pass: bool, measured: &[(&str, f64)]) -> Outcome {
    Outcome { measured: measured.iter().map(|(k, v)| (k.to_string(), *v)).collect(), pass, note: None }
}

impl Outcome {
    fn note(mut self, n: impl Into<String>) -> Self {
        self.note = Some(n.into());
        self
    }
}

struct Runner<'a> {
    suite: &'a str,
    opts: &'a SuiteOptions,
    next: usize,
    records: Vec<PropertyRecord>,
}

impl<'a> Runner<'a> {
    /// `tol = None` marks an exact comparison.
    fn run(&mut self, property: &str, input: &str, description: &str, inputs: &str, tol: Option<f64>, f: impl FnOnce(&mut ChaCha8Rng, f64) -> Result<Outcome>) {
        let index = self.next;
        self.next += 1;
        let id = format!("{property}@{input}");
        if let Some(only) = &self.opts.only {
            if only != &id && only != property {
                return;
            }
        }
        let tolerance = tol.map_or(0.0, |t| self.opts.tol.unwrap_or(t));
        let mut h = Sha256::new();
        h.update(format!("{id}|{}|{}|{inputs}", self.opts.seed, self.opts.exact));
        let digest = h.finalize();
        let seed = self.opts.seed ^ u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o = f(&mut rng, tolerance).unwrap_or_else(|e| Outcome { measured: Vec::new(), pass: false, note: Some(format!("error: {e}")) });
        let repro = (!o.pass).then(|| {
            let mut cmd = format!("rtorsion suite run {} --property {id}", self.suite);
            if self.opts.exact {
                cmd.push_str(" --exact");
            }
            if let Some(t) = self.opts.tol {
                cmd.push_str(&format!(" --tol {t:e}"));
            }
            cmd
        });
        self.records.push(PropertyRecord {
            index,
            id,
            property: property.into(),
            description: description.into(),
            inputs_digest: hex::encode(&digest[..8]),
            measured: o.measured.into_iter().collect(),
            tolerance,
            pass: o.pass,
            note: o.note,
            repro,
        });
    }
}

pub fn run_suite(name: &str, opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut r = Runner { suite: name, opts, next: 0, records: Vec::new() };
    match name {
        "flatness" => flatness(&mut r)?,
        "euler-action" => euler_action(&mut r)?,
        "torsion-invariance" => torsion_invariance(&mut r)?,
        "subdivision" => subdivision(&mut r)?,
        "cheeger-muller" => cheeger_muller(&mut r)?,
        "ft-transformation" => ft_transformation(&mut r)?,
        other => return Err(Error::UnknownName(format!("suite {other:?} (expected one of {})", SUITES.join(", ")))),
    }
    let failed = r.records.iter().filter(|p| !p.pass).count();
    Ok(SuiteReport {
        suite: name.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        mode: if opts.exact { "exact" } else { "float" }.into(),
        seed: opts.seed,
        status: if failed == 0 { "pass" } else { "fail" }.into(),
        passed: r.records.len() - failed,
        failed,
        properties: r.records,
    })
}

// ---------------------------------------------------------------- helpers

fn corpus() -> Result<Vec<CorpusEntry>> {
    corpus_names().iter().map(|n| corpus_get(n)).collect()
}

fn default_bundle(e: &CorpusEntry) -> QBundle {
    e.bundle.clone().unwrap_or_else(|| FlatBundle::trivial(&e.complex, 1))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn max_abs_diff(a: &FMat, b: &FMat) -> f64 {
    a.row_major().iter().zip(b.row_major()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Random walk of `len` steps starting at `start`.
fn random_walk<R: Rng>(c: &Complex, start: CellId, len: usize, rng: &mut R) -> Result<EdgePath> {
    let mut out: Vec<(CellId, Step, CellId)> = Vec::new();
    for &e in c.cells_of_dim(1) {
        let (t, h) = c.edge_endpoints(e)?;
        out.push((t, Step::fwd(e), h));
        out.push((h, Step::rev(e), t));
    }
    let mut at = start;
    let mut steps = Vec::new();
    for _ in 0..len {
        let options: Vec<&(CellId, Step, CellId)> = out.iter().filter(|(from, _, _)| *from == at).collect();
        if options.is_empty() {
            break;
        }
        let (_, s, to) = options[rng.gen_range(0..options.len())];
        steps.push(*s);
        at = *to;
    }
    c.path(start, steps)
}

/// Random loop at the base vertex: a walk closed up through the spanning tree.
fn random_loop<R: Rng>(c: &Complex, max_len: usize, rng: &mut R) -> Result<EdgePath> {
    let len = rng.gen_range(0..=max_len);
    let w = random_walk(c, c.base_vertex(), len, rng)?;
    let back = c.spanning_tree_paths()[&w.end].reversed();
    Ok(w.then(&back))
}

fn random_class<R: Rng>(h1: &H1Basis, r: i64, rng: &mut R) -> Result<H1Class> {
    let coords = h1.moduli().iter().map(|&m| if m > 0 { rng.gen_range(0..m as i64) } else { rng.gen_range(-r..=r) }).collect();
    h1.class(coords)
}

fn random_bundle<R: Rng>(e: &CorpusEntry, rng: &mut R) -> Result<QBundle> {
    let k = rng.gen_range(1..=2);
    random_flat_bundle(e, k, rng)
}

fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> FMat {
    if n == 0 {
        return FMat::zeros(0, 0);
    }
    loop {
        let m = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        if m.determinant().abs() > 1e-3 {
            return FMat::from_dmatrix(&m.qr().q());
        }
    }
}

fn blockdiag_identity(sizes: impl Iterator<Item = usize>) -> Vec<FMat> {
    sizes.map(FMat::identity).collect()
}

// ---------------------------------------------------------------- flatness

fn flatness(r: &mut Runner) -> Result<()> {
    let exact = r.opts.exact;
    for e in corpus()? {
        let c = &e.complex;
        let hash = content_hash(c);
        r.run("complex.dd-zero", &e.name, "integer boundary composition vanishes", &hash, None, |_, _| {
            let bad = validate(&c.to_description()).violations.iter().filter(|v| v.kind == ViolationKind::BoundaryNotNilpotent).count();
            Ok(outcome(bad == 0, &[("violating_pairs", bad as f64)]))
        });
        r.run("bundle.flat", &e.name, "default and random bundles are flat around every 2-cell", &hash, (!exact).then_some(EPS_FLAT), |rng, tol| {
            let mut worst: f64 = 0.0;
            let mut pass = true;
            let mut bundles = vec![default_bundle(&e)];
            for _ in 0..3 {
                bundles.push(random_bundle(&e, rng)?);
            }
            for b in &bundles {
                let rep = if exact { check_flatness(c, b)? } else { check_flatness(c, &b.to_f64())? };
                worst = worst.max(rep.max_deviation());
                pass &= rep.passed && (exact || rep.max_deviation() <= tol);
            }
            Ok(outcome(pass, &[("max_deviation", worst), ("bundles", bundles.len() as f64)]))
        });
        r.run("bundle.transport-functorial", &e.name, "transport(p·q) = transport(p)·transport(q)", &hash, (!exact).then_some(EPS_FLAT), |rng, tol| {
            let b = random_bundle(&e, rng)?;
            let mut worst: f64 = 0.0;
            for _ in 0..10 {
                let p = random_walk(c, c.base_vertex(), rng.gen_range(0..6), rng)?;
                let q = random_walk(c, p.end, rng.gen_range(0..6), rng)?;
                let d = if exact {
                    let (lhs, rhs) = (b.transport(&p.then(&q))?, &b.transport(&p)? * &b.transport(&q)?);
                    if lhs == rhs { 0.0 } else { max_abs_diff(&lhs.to_f64(), &rhs.to_f64()).max(f64::MIN_POSITIVE) }
                } else {
                    let f = b.to_f64();
                    let (tp, tq) = (f.transport(&p)?, f.transport(&q)?);
                    let scale = tp.max_abs() * tq.max_abs() * f.rank() as f64;
                    max_abs_diff(&f.transport(&p.then(&q))?, &(&tp * &tq)) / scale
                };
                worst = worst.max(d);
            }
            Ok(outcome(worst <= tol, &[("max_scaled_difference", worst), ("pairs", 10.0)]))
        });
        r.run("bundle.kt-detour", &e.name, "kt_evaluate is unchanged by inserting an edge and its reverse", &hash, Some(1e-12), |rng, tol| {
            let b = random_bundle(&e, rng)?;
            let mut worst: f64 = 0.0;
            for _ in 0..10 {
                let lp = random_loop(c, 6, rng)?;
                let i = rng.gen_range(0..=lp.steps.len());
                let prefix = c.path(lp.start, lp.steps[..i].to_vec())?;
                let hop = random_walk(c, prefix.end, 1, rng)?;
                let detoured = prefix.then(&hop).then(&hop.reversed()).then(&c.path(prefix.end, lp.steps[i..].to_vec())?);
                worst = worst.max((b.kt_evaluate(&detoured)? - b.kt_evaluate(&lp)?).abs());
            }
            Ok(outcome(worst <= tol, &[("max_difference", worst)]))
        });
        if matches!(e.family, Family::Torus | Family::Klein) {
            r.run("bundle.kt-homology", &e.name, "loops in the same H1 class have equal kt values (all words of length <= 4)", &hash, Some(EPS_FLAT), |rng, tol| {
                let b = random_bundle(&e, rng)?;
                let h1 = H1Basis::new(c)?;
                let letters: Vec<Step> = c.cells_of_dim(1).iter().flat_map(|&x| [Step::fwd(x), Step::rev(x)]).collect();
                let mut words: Vec<Vec<Step>> = vec![Vec::new()];
                let mut frontier = words.clone();
                for _ in 0..4 {
                    frontier = frontier.iter().flat_map(|w| letters.iter().map(move |l| [w.clone(), vec![*l]].concat())).collect();
                    words.extend(frontier.iter().cloned());
                }
                let mut by_class: BTreeMap<Vec<i64>, (f64, f64)> = BTreeMap::new();
                for w in &words {
                    let lp = c.path(c.base_vertex(), w.clone())?;
                    let v = b.kt_evaluate(&lp)?;
                    let k = h1.class_of_loop(&lp)?.coords;
                    let slot = by_class.entry(k).or_insert((v, v));
                    *slot = (slot.0.min(v), slot.1.max(v));
                }
                let spread = by_class.values().map(|(lo, hi)| hi - lo).fold(0.0, f64::max);
                Ok(outcome(spread <= tol, &[("loops", words.len() as f64), ("classes", by_class.len() as f64), ("max_spread", spread)]))
            });
        }
        r.run("bundle.kt-unimodular", &e.name, "kt class vanishes when every edge matrix has |det| = 1", &hash, Some(EPS_FLAT), |rng, tol| {
            let b = random_bundle(&e, rng)?.to_f64();
            let k = b.rank() as f64;
            let m = b.edge_matrices().iter().map(|(&x, a)| (x, a.scale(&(1.0 / a.det().abs().powf(1.0 / k))))).collect();
            let u = FlatBundle::new(c, b.rank(), m)?;
            let kt = kt_class(c, &u)?;
            let worst = kt.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
            Ok(outcome(kt.is_zero(tol), &[("max_abs_value", worst), ("generators", kt.values.len() as f64)]))
        });
    }
    Ok(())
}

// ---------------------------------------------------------------- euler

const TORSOR_COMPLEXES: [&str; 4] = ["circle-1cell", "circle-triangle", "torus", "klein"];

fn euler_action(r: &mut Runner) -> Result<()> {
    for name in TORSOR_COMPLEXES {
        let e = corpus_get(name)?;
        let c = &e.complex;
        let h1 = H1Basis::new(c)?;
        let alpha = &e.spray;
        let hash = content_hash(c);
        r.run("euler.action-identity", name, "act(0, α) has zero difference from α", &hash, None, |_, _| {
            let b = act_in(&h1, c, &h1.zero(), alpha)?;
            let d = spray_difference_in(&h1, c, alpha, &b)?;
            Ok(outcome(d.is_zero(), &[]))
        });
        r.run("euler.free-transitive", name, "spray_difference(α, act(u, α)) = u over the box [-3, 3]", &hash, None, |_, _| {
            let boxed = h1.box_elements(3);
            let mut bad = 0;
            for u in &boxed {
                if spray_difference_in(&h1, c, alpha, &act_in(&h1, c, u, alpha)?)? != *u {
                    bad += 1;
                }
            }
            Ok(outcome(bad == 0, &[("classes", boxed.len() as f64), ("mismatches", bad as f64)]))
        });
        r.run("euler.action-compose", name, "act(u, act(v, α)) and act(u + v, α) are the same Euler structure", &hash, None, |_, _| {
            let boxed = h1.box_elements(1);
            let mut bad = 0;
            for u in &boxed {
                for v in &boxed {
                    let lhs = act_in(&h1, c, u, &act_in(&h1, c, v, alpha)?)?;
                    let rhs = act_in(&h1, c, &u.add(v)?, alpha)?;
                    if !spray_difference_in(&h1, c, &lhs, &rhs)?.is_zero() {
                        bad += 1;
                    }
                }
            }
            Ok(outcome(bad == 0, &[("pairs", (boxed.len() * boxed.len()) as f64), ("mismatches", bad as f64)]))
        });
        r.run("euler.cocycle", name, "u(α, β) + u(β, δ) = u(α, δ)", &hash, None, |rng, _| {
            let mut bad = 0;
            let mut sprays = Vec::new();
            for _ in 0..20 {
                let u = random_class(&h1, 3, rng)?;
                let g = random_loop(c, 5, rng)?;
                sprays.push(loop_modify(c, &act_in(&h1, c, &u, alpha)?, &g)?);
            }
            for w in sprays.windows(3) {
                let lhs = spray_difference_in(&h1, c, &w[0], &w[1])?.add(&spray_difference_in(&h1, c, &w[1], &w[2])?)?;
                if lhs != spray_difference_in(&h1, c, &w[0], &w[2])? {
                    bad += 1;
                }
            }
            Ok(outcome(bad == 0, &[("triples", 18.0), ("mismatches", bad as f64)]))
        });
        r.run("euler.diff-vs-torsion", name, "FT values of α and act(u, α) coincide iff u has zero free part", &hash, Some(1e-9), |_, tol| {
            let b = default_bundle(&e);
            let mut bad = 0;
            let boxed = h1.box_elements(2);
            for u in &boxed {
                let ratio = euler_action_on_torsion(c, &b, alpha, u)?;
                let free_zero = u.coords.iter().zip(&u.moduli).all(|(&x, &m)| m > 0 || x == 0);
                if ((ratio - 1.0).abs() <= tol) != free_zero {
                    bad += 1;
                }
            }
            let mut o = outcome(bad == 0, &[("classes", boxed.len() as f64), ("mismatches", bad as f64)]);
            if !h1.torsion().is_empty() {
                o = o.note("torsion classes have |det ρ| = 1 and cannot change a scalar FT value");
            }
            Ok(o)
        });
    }
    for e in corpus()? {
        let c = &e.complex;
        r.run("euler.loop-modify", &e.name, "spray_difference(α, α^γ) = χ·[γ] for generator loops and 20 random loops", &content_hash(c), None, |rng, _| {
            let h1 = H1Basis::new(c)?;
            let chi = c.euler_characteristic();
            let mut loops: Vec<EdgePath> = (0..h1.moduli().len()).map(|i| h1.generator_loop(c, i)).collect::<Result<_>>()?;
            for _ in 0..20 {
                loops.push(random_loop(c, 8, rng)?);
            }
            let mut bad = 0;
            for g in &loops {
                let d = spray_difference_in(&h1, c, &e.spray, &loop_modify(c, &e.spray, g)?)?;
                if d != h1.class_of_loop(g)?.scale(chi) {
                    bad += 1;
                }
            }
            Ok(outcome(bad == 0, &[("loops", loops.len() as f64), ("mismatches", bad as f64), ("chi", chi as f64)]))
        });
    }
    Ok(())
}

// ---------------------------------------------------------------- torsion

/// Random bundle without eigenvalue 1 on a circle (acyclic twisted complex).
fn acyclic_circle_bundle<R: Rng>(c: &Complex, rng: &mut R) -> QBundle {
    let edges = c.cells_of_dim(1).to_vec();
    loop {
        let k = rng.gen_range(1..=2);
        let m: BTreeMap<CellId, QMat> = edges.iter().map(|&x| (x, random_invertible(rng, k))).collect();
        let b = FlatBundle::new(c, k, m).expect("invertible matrices on a graph");
        let lp = H1Basis::new(c).and_then(|h| h.generator_loop(c, 0)).expect("circle has a generator");
        let hol = b.transport(&lp).expect("valid loop");
        if !(&hol - &QMat::identity(k)).det().is_zero() {
            return b;
        }
    }
}

fn check_laplacian_vs_det<F: Scalar>(c: &Complex, b: &FlatBundle<F>, spray: &Spray, tol: f64) -> Result<Outcome> {
    let tcc = assemble(c, b, spray)?;
    let (t_lap, spectra) = t_comb(&tcc.to_f64())?;
    if spectra.iter().any(|s| s.zero_modes > 0) {
        return Err(Error::ZeroMode);
    }
    let t_det = t_comb_squared_elimination(&tcc, 1e-12).to_f64().sqrt();
    let mut m = vec![("laplacian_route", t_lap), ("determinant_route", t_det)];
    if tcc.top() == 1 && tcc.dim(0) == tcc.dim(1) {
        m.push(("abs_det_delta0", tcc.coboundary(0).det().to_f64().abs()));
    }
    let err = m[1..].iter().map(|(_, v)| rel(t_lap, *v)).fold(0.0, f64::max);
    m.push(("max_relative_error", err));
    Ok(outcome(err <= tol, &m))
}

fn torsion_invariance(r: &mut Runner) -> Result<()> {
    let exact = r.opts.exact;
    for e in corpus()? {
        let c = &e.complex;
        let hash = content_hash(c);
        let subdividable = !matches!(e.family, Family::Lens { .. });
        for variant in ["default", "random"] {
            let input = format!("{}/{variant}", e.name);
            let bundle = |rng: &mut ChaCha8Rng| if variant == "default" { Ok(default_bundle(&e)) } else { random_bundle(&e, rng) };
            r.run("torsion.dd-zero", &input, "assembled coboundaries compose to zero", &hash, (!exact).then_some(EPS_FLAT), |rng, tol| {
                let b = bundle(rng)?;
                if exact {
                    let t = assemble(c, &b, &e.spray)?;
                    Ok(outcome(t.is_cochain_complex(), &[("defect", t.composition_defect())]))
                } else {
                    let t = assemble(c, &b.to_f64(), &e.spray)?;
                    let scale = (0..=t.top()).map(|d| t.coboundary(d).max_abs()).fold(1.0, f64::max);
                    let defect = t.composition_defect() / (scale * scale);
                    Ok(outcome(defect <= tol, &[("relative_defect", defect)]))
                }
            });
            r.run("torsion.dimensions", &input, "Σ (−1)^d dim C^d = k·χ", &hash, None, |rng, _| {
                let b = bundle(rng)?;
                let t = assemble(c, &b, &e.spray)?;
                let alt: i64 = (0..=t.top()).map(|d| if d % 2 == 0 { 1 } else { -1 } * t.dim(d) as i64).sum();
                let want = b.rank() as i64 * c.euler_characteristic();
                Ok(outcome(alt == want, &[("alternating_dimension", alt as f64), ("k_chi", want as f64)]))
            });
            r.run("torsion.inv-spray", &input, "FT value unchanged under a spray with zero difference class", &hash, Some(1e-8), |rng, tol| {
                let b = bundle(rng)?;
                let g = random_loop(c, 6, rng)?;
                let even = c.cells().find(|x| x.dim % 2 == 0).map(|x| x.id);
                let odd = c.cells().find(|x| x.dim % 2 == 1).map(|x| x.id);
                let mut beta = e.spray.clone();
                if let (Some(a), Some(o)) = (even, odd) {
                    for x in [a, o] {
                        beta.legs.insert(x, g.then(e.spray.leg(x)?));
                    }
                }
                let diff = H1Basis::new(c).and_then(|h| spray_difference_in(&h, c, &e.spray, &beta))?;
                let ratio = spray_change_ratio(c, &b, &e.spray, &beta)?;
                Ok(outcome(diff.is_zero() && (ratio - 1.0).abs() <= tol, &[("ratio", ratio)]))
            });
            r.run("torsion.inv-gauge", &input, "FT value unchanged by gauge normalization", &hash, Some(1e-8), |rng, tol| {
                let b = bundle(rng)?;
                let g = b.gauge_normalize(c)?;
                let a = assemble(c, &b, &e.spray)?.to_f64();
                let n = assemble(c, &g, &e.spray)?.to_f64();
                let ratio = ft_ratio_along(&a, &n, &blockdiag_identity((0..=a.top()).map(|d| a.dim(d))))?;
                Ok(outcome((ratio - 1.0).abs() <= tol, &[("ratio", ratio)]))
            });
            r.run("torsion.inv-kernel-basis", &input, "FT value unchanged under an orthogonal change of harmonic basis", &hash, Some(1e-8), |rng, tol| {
                let b = bundle(rng)?;
                let t = assemble(c, &b, &e.spray)?.to_f64();
                let h = harmonic_bases(&t)?;
                let rotated: Vec<FMat> = h.iter().map(|m| m * &random_orthogonal(m.ncols(), rng)).collect();
                let v = harmonic_value(&t, &rotated)?;
                let dims: usize = h.iter().map(FMat::ncols).sum();
                Ok(outcome((v - 1.0).abs() <= tol, &[("value", v), ("harmonic_dimension", dims as f64)]))
            });
            if subdividable {
                r.run("torsion.inv-subdivision", &input, "FT value unchanged by barycentric subdivision", &hash, Some(1e-8), |rng, tol| {
                    let b = bundle(rng)?;
                    let s = barycentric_subdivide(c, &b, &e.spray)?;
                    let big = assemble(&s.complex, &s.bundle, &s.spray)?.to_f64();
                    let small = assemble(c, &b, &e.spray)?.to_f64();
                    let ratio = ft_ratio_along(&big, &small, &s.map.cochain_maps::<f64>(b.rank()))?;
                    Ok(outcome((ratio - 1.0).abs() <= tol, &[("ratio", ratio), ("cells_after", s.complex.cells().count() as f64)]))
                });
            }
        }
    }
    for name in ["circle-1cell", "circle-2cell", "circle-triangle"] {
        let e = corpus_get(name)?;
        for i in 0..3 {
            r.run("torsion.laplacian-vs-det", &format!("{name}/acyclic-{i}"), "Laplacian-route torsion equals the determinant route", &content_hash(&e.complex), Some(1e-9), |rng, tol| {
                let b = acyclic_circle_bundle(&e.complex, rng);
                if exact {
                    check_laplacian_vs_det(&e.complex, &b, &e.spray, tol)
                } else {
                    check_laplacian_vs_det(&e.complex, &b.to_f64(), &e.spray, tol)
                }
            });
        }
    }
    for name in corpus_names().iter().filter(|n| n.starts_with("lens-")) {
        let e = corpus_get(name)?;
        let Family::Lens { p, .. } = e.family else { unreachable!() };
        for j in 1..p {
            r.run("torsion.laplacian-vs-det", &format!("{name}/rotation-{j}"), "Laplacian-route torsion equals the determinant route", &content_hash(&e.complex), Some(1e-9), |_, tol| {
                let b = lens_rotation_bundle(&e.complex, p, j)?;
                check_laplacian_vs_det(&e.complex, &b, &e.spray, tol)
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- subdivision

fn subdivision(r: &mut Runner) -> Result<()> {
    for e in corpus()? {
        let c = &e.complex;
        let hash = content_hash(c);
        if matches!(e.family, Family::Lens { .. }) {
            r.run("complex.subdivision-unsupported", &e.name, "non-regular 3-dimensional complexes are rejected with an error", &hash, None, |_, _| {
                let ok = matches!(crate::subdivide::subdivide(c), Err(Error::Subdivision(_) | Error::UnsupportedDimension(_)));
                Ok(outcome(ok, &[]))
            });
            continue;
        }
        let rounds = if matches!(e.name.as_str(), "circle-1cell" | "torus") { 2 } else { 1 };
        for round in 1..=rounds {
            let input = format!("{}/round-{round}", e.name);
            let refine = |rng: &mut ChaCha8Rng| -> Result<(Complex, QBundle, QBundle, EdgePathsMap)> {
                let b = random_bundle(&e, rng)?;
                let mut k = c.clone();
                let mut bundle = b.clone();
                let mut spray = e.spray.clone();
                let mut loops: Vec<(EdgePath, EdgePath)> = Vec::new();
                let h1 = H1Basis::new(c)?;
                for i in 0..h1.moduli().len() {
                    let g = h1.generator_loop(c, i)?;
                    loops.push((g.clone(), g));
                }
                for _ in 0..round {
                    let s = barycentric_subdivide(&k, &bundle, &spray)?;
                    for l in &mut loops {
                        l.1 = s.map.transfer_path(&l.1)?;
                    }
                    k = s.complex;
                    bundle = s.bundle;
                    spray = s.spray;
                }
                Ok((k, b, bundle, loops))
            };
            r.run("complex.chi-subdivision", &input, "Euler characteristic preserved", &hash, None, |rng, _| {
                let (k, ..) = refine(rng)?;
                let (a, b) = (c.euler_characteristic(), k.euler_characteristic());
                Ok(outcome(a == b, &[("chi_before", a as f64), ("chi_after", b as f64)]))
            });
            r.run("complex.homology-subdivision", &input, "integral homology preserved in every degree", &hash, None, |rng, _| {
                let (k, ..) = refine(rng)?;
                let mut bad = 0;
                for d in 0..=c.dimension() {
                    if c.integral_homology(d)? != k.integral_homology(d)? {
                        bad += 1;
                    }
                }
                Ok(outcome(bad == 0, &[("degrees_checked", (c.dimension() + 1) as f64), ("mismatches", bad as f64)]))
            });
            r.run("complex.flat-subdivision", &input, "transferred bundle is flat around every 2-cell", &hash, None, |rng, _| {
                let (k, _, b, _) = refine(rng)?;
                let rep = check_flatness(&k, &b)?;
                Ok(outcome(rep.passed && rep.max_deviation() == 0.0, &[("max_deviation", rep.max_deviation()), ("faces", k.count(2) as f64)]))
            });
            r.run("complex.transport-refined", &input, "holonomy of generator loops preserved by path transfer", &hash, None, |rng, _| {
                let (_, b0, b, loops) = refine(rng)?;
                let mut bad = 0;
                for (old, new) in &loops {
                    if b0.transport(old)? != b.transport(new)? {
                        bad += 1;
                    }
                }
                Ok(outcome(bad == 0, &[("loops", loops.len() as f64), ("mismatches", bad as f64)]))
            });
        }
    }
    Ok(())
}

type EdgePathsMap = Vec<(EdgePath, EdgePath)>;

// ---------------------------------------------------------------- analytic

fn random_holonomy<R: Rng>(rng: &mut R) -> QMat {
    loop {
        let k = rng.gen_range(1..=2);
        let h = random_invertible(rng, k);
        if (&h - &QMat::identity(k)).det().is_zero() {
            continue;
        }
        let model = CircleModel::new(h.to_f64(), 1.0).expect("invertible");
        if model.eigenvalues().iter().all(|l| (l - 1.0).norm() > 1e-3) {
            return h;
        }
    }
}

fn fixed_holonomies() -> Vec<(&'static str, FMat)> {
    vec![
        ("minus-one", FMat::from_rows(vec![vec![-1.0]])),
        ("rotation-1-3", rotation(1, 3)),
        ("three", FMat::from_rows(vec![vec![3.0]])),
        ("shear-scale", FMat::from_rows(vec![vec![2.0, 1.0], vec![0.0, 0.5]])),
        ("identity", FMat::identity(1)),
    ]
}

fn cheeger_muller(r: &mut Runner) -> Result<()> {
    let circle = corpus_get("circle-1cell")?;
    let c = &circle.complex;
    let edge = c.cells_of_dim(1)[0];
    for i in 0..50 {
        r.run("analytic.cheeger-muller", &format!("holonomy-{i:02}"), "anomaly-corrected analytic torsion equals t_comb of the circle", "circle-1cell", Some(1e-6), |rng, tol| {
            let h = random_holonomy(rng);
            let b = FlatBundle::new(c, h.nrows(), BTreeMap::from([(edge, h.clone())]))?;
            let t2 = t_comb_squared_elimination(&assemble(c, &b, &circle.spray)?, 0.0);
            let t = t2.to_f64().sqrt();
            let an = analytic_torsion_circle(&CircleModel::new(h.to_f64(), 1.0)?, 10_000)?;
            let unitary = h.det().abs() == Rational::from_i64(1);
            let err = rel(an.anomaly_corrected, t);
            let mut o = outcome(
                err <= tol,
                &[
                    ("rank", h.nrows() as f64),
                    ("t_comb", t),
                    ("t_an", an.t_an),
                    ("t_an_corrected", an.anomaly_corrected),
                    ("raw_relative_error", rel(an.t_an, t)),
                    ("relative_error", err),
                    ("unitary_det", unitary as u8 as f64),
                ],
            );
            if !unitary {
                o = o.note("raw T_an differs from t_comb by |det H|^{1/2} for non-unimodular holonomy");
            }
            Ok(o)
        });
    }
    for (name, h) in fixed_holonomies() {
        r.run("analytic.truncation", name, "plain truncation error decreases for N = 1e3..1e6; corrected error < tol at N = 1e6", name, Some(1e-6), |_, tol| {
            let model = CircleModel::new(h.clone(), 1.0)?;
            let exact = closed_form_det(&model, true)?;
            let mut errs = Vec::new();
            for n in [1_000, 10_000, 100_000, 1_000_000] {
                errs.push(rel(truncated_det(&model, n, 0, true)?, exact));
            }
            let corrected = rel(truncated_det(&model, 1_000_000, 7, true)?, exact);
            let monotone = errs.windows(2).all(|w| w[1] < w[0]);
            Ok(outcome(
                monotone && corrected <= tol,
                &[("plain_1e3", errs[0]), ("plain_1e4", errs[1]), ("plain_1e5", errs[2]), ("plain_1e6", errs[3]), ("corrected_1e6", corrected)],
            ))
        });
    }
    for (name, h) in fixed_holonomies().into_iter().filter(|(n, _)| *n != "identity") {
        r.run("analytic.scale", name, "analytic torsion independent of circumference (1, 2, π)", name, Some(1e-9), |_, tol| {
            let mut vals = Vec::new();
            for l in [1.0, 2.0, std::f64::consts::PI] {
                vals.push(analytic_torsion_circle(&CircleModel::new(h.clone(), l)?, 10_000)?.t_an_truncated);
            }
            let spread = vals.iter().map(|v| rel(*v, vals[0])).fold(0.0, f64::max);
            Ok(outcome(spread <= tol, &[("t_an_l1", vals[0]), ("t_an_l2", vals[1]), ("t_an_lpi", vals[2]), ("max_relative_spread", spread)]))
        });
    }
    Ok(())
}

// ---------------------------------------------------------------- ft transformation

fn ft_transformation(r: &mut Runner) -> Result<()> {
    let entries: Vec<CorpusEntry> = TORSOR_COMPLEXES.iter().map(|n| corpus_get(n)).collect::<Result<_>>()?;
    for i in 0..50 {
        r.run("torsion.action-law", &format!("pair-{i:02}"), "ft(act(u, α)) / ft(α) = |det ρ(u)|^s", "torsor corpus", Some(1e-9), |rng, tol| {
            let e = &entries[rng.gen_range(0..entries.len())];
            let c = &e.complex;
            let b = random_bundle(e, rng)?;
            let h1 = H1Basis::new(c)?;
            let u = random_class(&h1, 2, rng)?;
            let expected = (S_EXPONENT as f64 * kt_class(c, &b)?.evaluate(&u)).exp();
            let ratio = euler_action_on_torsion(c, &b, &e.spray, &u)?;
            let err = rel(ratio, expected);
            Ok(outcome(err <= tol, &[("rank", b.rank() as f64), ("ratio", ratio), ("expected", expected), ("relative_error", err)]).note(format!("{} u={u}", e.name)))
        });
    }
    let orthogonal: Vec<(&str, FBundle)> = {
        let circle = &entries[0].complex;
        let torus = &entries[2].complex;
        let klein = &entries[3].complex;
        let (te, ke) = (torus.cells_of_dim(1), klein.cells_of_dim(1));
        let swap = FMat::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        vec![
            ("circle-1cell", FlatBundle::new(circle, 2, BTreeMap::from([(circle.cells_of_dim(1)[0], rotation(2, 5))]))?),
            ("torus", FlatBundle::new(torus, 2, BTreeMap::from([(te[0], rotation(1, 5)), (te[1], rotation(2, 7))]))?),
            ("klein", FlatBundle::new(klein, 2, BTreeMap::from([(ke[0], swap), (ke[1], FMat::from_rows(vec![vec![-1.0, 0.0], vec![0.0, -1.0]]))]))?),
        ]
    };
    for (name, b) in &orthogonal {
        let e = entries.iter().find(|e| e.name == *name).expect("torsor corpus");
        r.run("torsion.action-orthogonal", name, "orthogonal bundles: act(u, ·) leaves the FT value unchanged", name, Some(1e-9), |_, tol| {
            let h1 = H1Basis::new(&e.complex)?;
            let mut worst: f64 = 0.0;
            for u in h1.box_elements(2) {
                worst = worst.max((euler_action_on_torsion(&e.complex, b, &e.spray, &u)? - 1.0).abs());
            }
            Ok(outcome(worst <= tol, &[("max_deviation_from_one", worst)]))
        });
    }
    for e in &entries {
        r.run("torsion.action-multiplicative", &e.name, "ratio(u + v) = ratio(u)·ratio(v)", &content_hash(&e.complex), Some(1e-9), |rng, tol| {
            let c = &e.complex;
            let b = random_bundle(e, rng)?;
            let h1 = H1Basis::new(c)?;
            let mut worst: f64 = 0.0;
            for _ in 0..10 {
                let (u, v) = (random_class(&h1, 2, rng)?, random_class(&h1, 2, rng)?);
                let f = |w: &H1Class| euler_action_on_torsion(c, &b, &e.spray, w);
                worst = worst.max(rel(f(&u.add(&v)?)?, f(&u)? * f(&v)?));
            }
            Ok(outcome(worst <= tol, &[("max_relative_error", worst)]))
        });
    }
    for name in ["point", "circle-1cell", "circle-triangle", "torus", "klein", "rp2", "sphere", "lens-3-1"] {
        let e = corpus_get(name)?;
        r.run("torsion.base-change", name, "fiber-basis change S at the base vertex scales ft by |det S|^(−2χ)", &content_hash(&e.complex), Some(1e-9), |rng, tol| {
            let c = &e.complex;
            let b = random_bundle(&e, rng)?;
            let s = random_invertible(rng, b.rank());
            let expected = s.det().to_f64().abs().powi(-2 * c.euler_characteristic() as i32);
            let ratio = base_change_ratio(c, &b, &e.spray, &s)?;
            let err = rel(ratio, expected);
            Ok(outcome(err <= tol, &[("chi", c.euler_characteristic() as f64), ("ratio", ratio), ("expected", expected), ("relative_error", err)]))
        });
    }
    Ok(())
}
