mod common;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rtorsion::analytic::{analytic_torsion_circle, closed_form_det, truncated_det, CircleModel};
use rtorsion::bundle::FlatBundle;
use rtorsion::corpus::{corpus_get, corpus_names, random_flat_bundle};
use rtorsion::scalar::rational;
use rtorsion::suite::{run_suite, SuiteOptions, SUITES};
use rtorsion::torsion::{assemble, ft_torsion, t_comb, t_comb_squared_exact};
use rtorsion::{FMat, QMat};

#[test]
fn circle_with_holonomy_three() {
    let e = corpus_get("circle-1cell").unwrap();
    let edge = e.complex.cells_of_dim(1)[0];
    let b = FlatBundle::new(&e.complex, 1, BTreeMap::from([(edge, QMat::from_row_major(1, 1, vec![rational(3, 1)]))])).unwrap();
    let r = ft_torsion(&e.complex, &b, &e.spray).unwrap();
    assert!(r.acyclic);
    assert_eq!(r.t_comb_squared_exact.as_deref(), Some("4"));
    assert!((r.t_comb - 2.0).abs() < 1e-14);
    assert!((r.ft_metric.value - 0.25).abs() < 1e-14);
}

#[test]
fn trivial_circle_is_not_acyclic() {
    let e = corpus_get("circle-triangle").unwrap();
    let r = ft_torsion(&e.complex, &FlatBundle::<rtorsion::Rational>::trivial(&e.complex, 1), &e.spray).unwrap();
    assert_eq!(r.harmonic_dims, vec![1, 1]);
}

#[test]
fn exact_and_float_routes_agree() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for name in corpus_names().iter().filter(|n| !n.starts_with("lens-6") && !n.starts_with("lens-7")) {
        let e = corpus_get(name).unwrap();
        let b = random_flat_bundle(&e, 1, &mut r).unwrap();
        let tcc = assemble(&e.complex, &b, &e.spray).unwrap();
        let exact = t_comb_squared_exact(&tcc);
        let (t, _) = t_comb(&tcc.to_f64()).unwrap();
        let ex = rtorsion::Scalar::to_f64(&exact);
        assert!(common::rel(t * t, ex) < 1e-9, "{name}: {} vs {ex}", t * t);
    }
}

#[test]
fn analytic_routes_agree() {
    for h in [vec![-1.0], vec![2.0], vec![0.0, -1.0, 1.0, 0.0], vec![2.0, 1.0, 1.0, 1.0]] {
        let k = (h.len() as f64).sqrt() as usize;
        let m = CircleModel::new(FMat::from_row_major(k, k, h), 2.5).unwrap();
        let closed = closed_form_det(&m, false).unwrap();
        let trunc = truncated_det(&m, 2000, 7, false).unwrap();
        assert!(common::rel(trunc, closed) < 1e-9);
        let an = analytic_torsion_circle(&m, 2000).unwrap();
        assert!(an.acyclic);
    }
}

#[test]
fn every_suite_passes_in_both_modes() {
    for name in SUITES {
        for exact in [false, true] {
            let report = run_suite(name, &SuiteOptions { exact, ..Default::default() }).unwrap();
            let failing: Vec<_> = report.properties.iter().filter(|p| !p.pass).map(|p| &p.id).collect();
            assert!(report.all_passed(), "{name} exact={exact}: {failing:?}");
        }
    }
}
