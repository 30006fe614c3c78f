//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits non-zero on any FAIL.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtorsion::analytic::{analytic_torsion_circle, zeta_det_laplacian, CircleModel};
use rtorsion::bundle::{check_flatness, FBundle, FlatBundle, QBundle};
use rtorsion::corpus::{corpus_get, corpus_names, lens_rotation_bundle, random_flat_bundle, random_invertible, CorpusEntry};
use rtorsion::euler::{act_in, canonical_spray, loop_modify, spray_difference_in, H1Basis, Spray};
use rtorsion::subdivide::barycentric_subdivide;
use rtorsion::torsion::{assemble, base_change_ratio, euler_action_on_torsion, ft_ratio_along, t_comb, t_comb_squared_exact, S_EXPONENT};
use rtorsion::{Complex, FMat, Mat, QMat, Scalar};

use common::*;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xacce97 ^ salt)
}

fn entry(name: &str) -> CorpusEntry {
    corpus_get(name).unwrap()
}

fn acyclic_holonomy<R: Rng>(rng: &mut R) -> QMat {
    loop {
        let k = rng.gen_range(1..=2);
        let h = random_invertible(rng, k);
        let model = CircleModel::new(h.to_f64(), 1.0).unwrap();
        if model.eigenvalues().iter().all(|l| (l - 1.0).norm() > 1e-3) {
            return h;
        }
    }
}

fn circle_bundle<F: Scalar>(c: &Complex, h: Mat<F>) -> FlatBundle<F> {
    FlatBundle::new(c, h.nrows(), BTreeMap::from([(c.cells_of_dim(1)[0], h)])).unwrap()
}

// 1 -------------------------------------------------------------------------

fn exactness() -> Verdict {
    let mut r = rng(1);
    let (mut checked, mut bad) = (0, Vec::new());
    for name in corpus_names() {
        let e = entry(&name);
        for i in 0..100 {
            let b = random_flat_bundle(&e, i % 3 + 1, &mut r).unwrap();
            let flat = check_flatness(&e.complex, &b).unwrap();
            let tcc = assemble(&e.complex, &b, &e.spray).unwrap();
            if !(flat.passed && flat.max_deviation() == 0.0 && tcc.is_cochain_complex()) {
                bad.push(format!("{name}#{i}"));
            }
            checked += 1;
        }
    }
    verdict(bad.is_empty(), format!("{checked} exact bundles over {} complexes, failures {bad:?}", corpus_names().len()))
}

// 2 -------------------------------------------------------------------------

fn acyclic_oracle() -> Verdict {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut check = |tcc: rtorsion::torsion::TwistedComplex<f64>| {
        let (t, _) = t_comb(&tcc).unwrap();
        let dims: Vec<usize> = (0..=tcc.top()).map(|d| tcc.dim(d)).collect();
        let deltas: Vec<Dense> = (0..tcc.top()).map(|d| to_dense(&tcc.coboundary(d))).collect();
        let oracle = milnor_torsion(&dims, &deltas).expect("acyclic instance");
        worst = worst.max(rel(t, oracle));
        count += 1;
    };
    for name in ["circle-1cell", "circle-2cell", "circle-triangle"] {
        let e = entry(name);
        for _ in 0..20 {
            let edges = e.complex.cells_of_dim(1);
            let h = acyclic_holonomy(&mut r);
            let k = h.nrows();
            let m = edges.iter().enumerate().map(|(i, &x)| (x, if i == 0 { h.clone() } else { QMat::identity(k) })).collect();
            let b = FlatBundle::new(&e.complex, k, m).unwrap();
            check(assemble(&e.complex, &b, &e.spray).unwrap().to_f64());
        }
    }
    for name in corpus_names().iter().filter(|n| n.starts_with("lens-")) {
        let e = entry(name);
        let p: u32 = name.split('-').nth(1).unwrap().parse().unwrap();
        for j in 1..p {
            let b = lens_rotation_bundle(&e.complex, p, j).unwrap();
            check(assemble(&e.complex, &b, &e.spray).unwrap());
        }
    }
    verdict(worst <= 1e-9, format!("{count} acyclic instances, max relative gap Laplacian vs elimination oracle {worst:.3e} (tol 1e-9)"))
}

// 3 -------------------------------------------------------------------------

/// `T − I`, `Σ_{i<p} T^i`, `T − I` for `L(p, 1)` with holonomy `T`, built
/// directly from the cellular chain complex.
fn lens_formula_torsion(p: usize, t: &Dense) -> f64 {
    let i2 = identity(2);
    let sum = (0..p).fold(zeros(2, 2), |acc, i| add(&acc, &power(t, i)));
    milnor_torsion(&[2, 2, 2, 2], &[sub(t, &i2), sum, sub(t, &i2)]).expect("acyclic")
}

fn lens_closed_form() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for p in [3u32, 5, 7] {
        let e = entry(&format!("lens-{p}-1"));
        for j in 1..p {
            let b = lens_rotation_bundle(&e.complex, p, j).unwrap();
            let (t, _) = t_comb(&assemble(&e.complex, &b, &e.spray).unwrap()).unwrap();
            let oracle = lens_formula_torsion(p as usize, &rotation(std::f64::consts::TAU * j as f64 / p as f64));
            worst = worst.max(rel(t, oracle));
            if j == 1 {
                lines.push(format!("L({p},1): t={t:.12} oracle={oracle:.12}"));
            }
        }
    }
    verdict(worst <= 1e-9, format!("{}; max relative error {worst:.3e} (tol 1e-9)", lines.join(", ")))
}

// 4 -------------------------------------------------------------------------

fn torsor_laws() -> Verdict {
    let mut r = rng(4);
    let mut problems = Vec::new();
    let mut stats = Vec::new();
    for name in ["circle-1cell", "torus", "klein"] {
        let e = entry(name);
        let c = &e.complex;
        let h1 = H1Basis::new(c).unwrap();
        let alpha = canonical_spray(c);
        // free and transitive over the box
        let boxed = h1.box_elements(3);
        for u in &boxed {
            let beta = act_in(&h1, c, u, &alpha).unwrap();
            if spray_difference_in(&h1, c, &alpha, &beta).unwrap() != *u {
                problems.push(format!("{name}: act({u}) not recovered"));
            }
        }
        // cocycle on a pool of assorted sprays
        let mut pool: Vec<Spray> = vec![alpha.clone()];
        for _ in 0..7 {
            let u = &boxed[r.gen_range(0..boxed.len())];
            let g = random_loop(c, 6, &mut r);
            pool.push(loop_modify(c, &act_in(&h1, c, u, &alpha).unwrap(), &g).unwrap());
        }
        let d = |a: &Spray, b: &Spray| spray_difference_in(&h1, c, a, b).unwrap();
        let mut triples = 0;
        for a in &pool {
            for b in &pool {
                for g in &pool {
                    triples += 1;
                    if d(a, b).add(&d(b, g)).unwrap() != d(a, g) {
                        problems.push(format!("{name}: cocycle"));
                    }
                }
            }
        }
        // loop modification moves by χ·[γ], 20 random loops
        let chi = c.euler_characteristic();
        for _ in 0..20 {
            let g = random_loop(c, 8, &mut r);
            let want = h1.class_of_loop(&g).unwrap().scale(chi);
            if d(&alpha, &loop_modify(c, &alpha, &g).unwrap()) != want {
                problems.push(format!("{name}: loop modification"));
            }
        }
        stats.push(format!("{name}: box {} triples {triples}", boxed.len()));
    }
    verdict(problems.is_empty(), format!("{}; violations {problems:?}", stats.join(", ")))
}

// 5 -------------------------------------------------------------------------

fn ft_transformation() -> Verdict {
    let mut r = rng(5);
    let names = ["circle-1cell", "circle-triangle", "torus", "klein"];
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let e = entry(names[r.gen_range(0..names.len())]);
        let c = &e.complex;
        let b = random_flat_bundle(&e, r.gen_range(1..=2), &mut r).unwrap();
        let h1 = H1Basis::new(c).unwrap();
        let coords = h1.moduli().iter().map(|&m| if m > 0 { r.gen_range(0..m as i64) } else { r.gen_range(-3..=3) }).collect();
        let u = h1.class(coords).unwrap();
        // oracle: holonomy along the representative loop, exact determinant
        let hol = b.transport(&h1.representative(c, &u).unwrap()).unwrap();
        let expected = hol.det().to_f64().abs().powi(S_EXPONENT);
        let ratio = euler_action_on_torsion(c, &b, &e.spray, &u).unwrap();
        worst = worst.max(rel(ratio, expected));
    }
    // orthogonal bundles
    let mut orth: f64 = 0.0;
    let rot = |t: f64| FMat::from_rows(rotation(t));
    let cases: Vec<(CorpusEntry, Vec<FMat>)> = vec![
        (entry("circle-1cell"), vec![rot(0.7)]),
        (entry("torus"), vec![rot(1.1), rot(-2.3)]),
        (entry("klein"), vec![FMat::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]), FMat::from_rows(vec![vec![-1.0, 0.0], vec![0.0, -1.0]])]),
    ];
    for (e, mats) in cases {
        let b: FBundle = FlatBundle::new(&e.complex, 2, e.complex.cells_of_dim(1).iter().copied().zip(mats).collect()).unwrap();
        let h1 = H1Basis::new(&e.complex).unwrap();
        for u in h1.box_elements(2) {
            orth = orth.max((euler_action_on_torsion(&e.complex, &b, &e.spray, &u).unwrap() - 1.0).abs());
        }
    }
    verdict(
        worst <= 1e-9 && orth <= 1e-9,
        format!("50 pairs: max relative error vs |det ρ(u)|^{S_EXPONENT} {worst:.3e}; orthogonal bundles max |ratio−1| {orth:.3e} (tol 1e-9)"),
    )
}

// 6 -------------------------------------------------------------------------

fn subdivision_invariance() -> Verdict {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for name in ["circle-1cell", "torus"] {
        let e = entry(name);
        let bundles: Vec<QBundle> = vec![e.bundle.clone().unwrap(), random_flat_bundle(&e, 2, &mut r).unwrap()];
        for b in bundles {
            let small = assemble(&e.complex, &b, &e.spray).unwrap().to_f64();
            let (mut k, mut bb, mut s) = (e.complex.clone(), b.clone(), e.spray.clone());
            let mut maps: Option<Vec<FMat>> = None;
            for _round in 1..=2 {
                let sd = barycentric_subdivide(&k, &bb, &s).unwrap();
                let step: Vec<FMat> = sd.map.cochain_maps::<f64>(b.rank());
                maps = Some(match maps {
                    None => step,
                    Some(prev) => prev.iter().zip(&step).map(|(a, b)| a * b).collect(),
                });
                let big = assemble(&sd.complex, &sd.bundle, &sd.spray).unwrap().to_f64();
                let ratio = ft_ratio_along(&big, &small, maps.as_ref().unwrap()).unwrap();
                worst = worst.max((ratio - 1.0).abs());
                n += 1;
                (k, bb, s) = (sd.complex, sd.bundle, sd.spray);
            }
        }
    }
    verdict(worst <= 1e-8, format!("{n} (instance, rounds) pairs over circle and torus, max |ratio−1| {worst:.3e} (tol 1e-8)"))
}

// 7 -------------------------------------------------------------------------

fn cheeger_muller_unitary() -> Verdict {
    let mut r = rng(71);
    let c = entry("circle-1cell").complex;
    let mut worst: f64 = 0.0;
    for i in 0..25 {
        let h = if i % 5 == 0 { FMat::from_rows(vec![vec![-1.0]]) } else { FMat::from_rows(rotation(r.gen_range(0.2..6.0))) };
        let (t, _) = t_comb(&assemble(&c, &circle_bundle(&c, h.clone()), &canonical_spray(&c)).unwrap()).unwrap();
        let an = analytic_torsion_circle(&CircleModel::new(h, 1.0).unwrap(), 1000).unwrap();
        worst = worst.max(rel(an.t_an, t));
    }
    verdict(worst <= 1e-6, format!("25 unitary acyclic holonomies, max relative |T_an − t_comb| {worst:.3e} (tol 1e-6)"))
}

fn random_holonomies() -> Vec<QMat> {
    let mut r = rng(72);
    (0..50).map(|_| acyclic_holonomy(&mut r)).collect()
}

fn cheeger_muller_raw() -> Verdict {
    let c = entry("circle-1cell").complex;
    let mut worst: f64 = 0.0;
    let mut off = 0;
    for h in random_holonomies() {
        let t = t_comb_squared_exact(&assemble(&c, &circle_bundle(&c, h.clone()), &canonical_spray(&c)).unwrap()).to_f64().sqrt();
        let an = analytic_torsion_circle(&CircleModel::new(h.to_f64(), 1.0).unwrap(), 1000).unwrap();
        let e = rel(an.t_an, t);
        worst = worst.max(e);
        off += (e > 1e-6) as usize;
    }
    verdict(worst <= 1e-6, format!("50 random acyclic holonomies incl. non-unitary: raw T_an vs t_comb max relative error {worst:.3e}, {off}/50 outside 1e-6"))
}

fn cheeger_muller_corrected() -> Verdict {
    let c = entry("circle-1cell").complex;
    let mut worst: f64 = 0.0;
    for h in random_holonomies() {
        let t = t_comb_squared_exact(&assemble(&c, &circle_bundle(&c, h.clone()), &canonical_spray(&c)).unwrap()).to_f64().sqrt();
        let an = analytic_torsion_circle(&CircleModel::new(h.to_f64(), 1.0).unwrap(), 1000).unwrap();
        worst = worst.max(rel(an.anomaly_corrected, t));
    }
    verdict(worst <= 1e-6, format!("same 50 holonomies: T_an·|det H|^(1/2) vs t_comb max relative error {worst:.3e} (tol 1e-6)"))
}

fn truncation_route() -> Verdict {
    let mut worst: f64 = 0.0;
    let hs = random_holonomies();
    let mut models: Vec<FMat> = hs.iter().take(4).map(|h| h.to_f64()).collect();
    models.push(FMat::from_rows(rotation(2.0)));
    for h in &models {
        let d = zeta_det_laplacian(&CircleModel::new(h.clone(), 1.0).unwrap(), 1_000_000, false).unwrap();
        worst = worst.max(d.discrepancy);
    }
    verdict(worst <= 1e-6, format!("{} holonomies at N = 1e6 with Euler–Maclaurin tail: max relative discrepancy {worst:.3e} (tol 1e-6)", models.len()))
}

// 8 -------------------------------------------------------------------------

fn base_change() -> Verdict {
    let mut r = rng(8);
    let mut worst: f64 = 0.0;
    let mut zero_chi: f64 = 0.0;
    for name in ["point", "sphere", "circle-1cell", "circle-triangle", "torus", "klein", "rp2", "lens-5-2"] {
        let e = entry(name);
        let chi = e.complex.euler_characteristic();
        for _ in 0..4 {
            let b = random_flat_bundle(&e, r.gen_range(1..=2), &mut r).unwrap();
            let s = random_invertible(&mut r, b.rank());
            let expected = s.det().to_f64().abs().powi(-2 * chi as i32);
            let ratio = base_change_ratio(&e.complex, &b, &e.spray, &s).unwrap();
            worst = worst.max(rel(ratio, expected));
            if chi == 0 {
                zero_chi = zero_chi.max((ratio - 1.0).abs());
            }
        }
    }
    verdict(worst <= 1e-9 && zero_chi <= 1e-9, format!("max relative error vs |det S|^(−2χ) {worst:.3e}; χ=0 max |ratio−1| {zero_chi:.3e} (tol 1e-9)"))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Verdict)> = vec![
        ("1 exactness", exactness),
        ("2 acyclic oracle equivalence", acyclic_oracle),
        ("3 lens closed form", lens_closed_form),
        ("4 euler torsor laws", torsor_laws),
        ("5 ft transformation law", ft_transformation),
        ("6 subdivision invariance", subdivision_invariance),
        ("7a cheeger-muller unitary", cheeger_muller_unitary),
        ("7b cheeger-muller non-unitary raw", cheeger_muller_raw),
        ("7c spectral truncation", truncation_route),
        ("7d cheeger-muller anomaly-corrected", cheeger_muller_corrected),
        ("8 base-change covariance", base_change),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        failed += !v.pass as usize;
        println!("acceptance {name}: {} — {} [{:.2?}]", if v.pass { "PASS" } else { "FAIL" }, v.detail, t.elapsed());
    }
    println!("acceptance total: {failed} failing criteria [{:.2?}]", start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
