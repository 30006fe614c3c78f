//! Property tests over the corpus with seeded random walks and bundles.

mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtorsion::corpus::{corpus_get, random_flat_bundle, CorpusEntry};
use rtorsion::euler::{act_in, canonical_spray, loop_modify, spray_difference_in, H1Basis};
use rtorsion::homology::H1Class;
use rtorsion::subdivide::subdivide;
use rtorsion::torsion::assemble;

use common::{random_loop, random_walk};

const SMALL: &[&str] = &["circle-1cell", "circle-triangle", "torus", "klein", "rp2", "sphere", "lens-3-1", "lens-5-2"];
const SURFACES: &[&str] = &["circle-1cell", "circle-triangle", "torus", "klein", "rp2", "sphere"];

fn pick(names: &[&str], i: usize) -> CorpusEntry {
    corpus_get(names[i % names.len()]).unwrap()
}

fn random_class<R: Rng>(h1: &H1Basis, rng: &mut R) -> H1Class {
    let coords = h1.moduli().iter().map(|&m| if m > 0 { rng.gen_range(0..m as i64) } else { rng.gen_range(-3..=3) }).collect();
    h1.class(coords).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transport_is_functorial(i in 0usize..64, seed: u64) {
        let e = pick(SMALL, i);
        let c = &e.complex;
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let b = random_flat_bundle(&e, r.gen_range(1..=2), &mut r).unwrap();
        let p = random_walk(c, c.base_vertex(), 5, &mut r);
        let q = random_walk(c, p.end, 5, &mut r);
        let tp = b.transport(&p).unwrap();
        prop_assert_eq!(b.transport(&p.then(&q)).unwrap(), &tp * &b.transport(&q).unwrap());
        prop_assert_eq!(b.transport(&p.reversed()).unwrap(), tp.inverse().unwrap());
    }

    #[test]
    fn kt_ignores_detours_and_conjugation(i in 0usize..64, seed: u64) {
        let e = pick(SMALL, i);
        let c = &e.complex;
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let b = random_flat_bundle(&e, r.gen_range(1..=2), &mut r).unwrap();
        let g = random_loop(c, 6, &mut r);
        let w = random_walk(c, c.base_vertex(), 4, &mut r);
        let detour = w.then(&w.reversed()).then(&g);
        let k = b.kt_evaluate(&g).unwrap();
        prop_assert!((b.kt_evaluate(&detour).unwrap() - k).abs() < 1e-12);
        // a loop at another vertex, conjugated back
        let h = random_walk(c, w.end, 4, &mut r);
        let back = c.spanning_tree_paths()[&h.end].reversed();
        let there = h.then(&back).then(&w);
        let conj = w.then(&there).then(&w.reversed());
        prop_assert!(conj.is_closed() && there.is_closed());
        prop_assert!((b.kt_evaluate(&conj).unwrap() - b.kt_evaluate(&there).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn spray_difference_is_an_antisymmetric_cocycle(i in 0usize..64, seed: u64) {
        let e = pick(SMALL, i);
        let c = &e.complex;
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let h1 = H1Basis::new(c).unwrap();
        let alpha = canonical_spray(c);
        let mut sprays = Vec::new();
        for _ in 0..3 {
            let u = random_class(&h1, &mut r);
            let g = random_loop(c, 5, &mut r);
            sprays.push(loop_modify(c, &act_in(&h1, c, &u, &alpha).unwrap(), &g).unwrap());
        }
        let d = |a, b| spray_difference_in(&h1, c, a, b).unwrap();
        let (a, b, g) = (&sprays[0], &sprays[1], &sprays[2]);
        prop_assert_eq!(d(a, b).add(&d(b, g)).unwrap(), d(a, g));
        prop_assert_eq!(d(a, b), d(b, a).neg());
        prop_assert!(d(a, a).is_zero());
    }

    #[test]
    fn action_is_free_and_transitive(i in 0usize..64, seed: u64) {
        let e = pick(SMALL, i);
        let c = &e.complex;
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let h1 = H1Basis::new(c).unwrap();
        let alpha = loop_modify(c, &canonical_spray(c), &random_loop(c, 4, &mut r)).unwrap();
        let (u, v) = (random_class(&h1, &mut r), random_class(&h1, &mut r));
        let au = act_in(&h1, c, &u, &alpha).unwrap();
        prop_assert_eq!(spray_difference_in(&h1, c, &alpha, &au).unwrap(), u.clone());
        let auv = act_in(&h1, c, &v, &au).unwrap();
        prop_assert_eq!(spray_difference_in(&h1, c, &alpha, &auv).unwrap(), u.add(&v).unwrap());
    }

    #[test]
    fn loop_modification_moves_by_chi(i in 0usize..64, seed: u64) {
        let e = pick(SMALL, i);
        let c = &e.complex;
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let h1 = H1Basis::new(c).unwrap();
        let alpha = canonical_spray(c);
        let g = random_loop(c, 8, &mut r);
        let want = h1.class_of_loop(&g).unwrap().scale(c.euler_characteristic());
        prop_assert_eq!(spray_difference_in(&h1, c, &alpha, &loop_modify(c, &alpha, &g).unwrap()).unwrap(), want);
    }

    #[test]
    fn twisted_coboundaries_compose_to_zero(i in 0usize..64, seed: u64) {
        let e = pick(SMALL, i);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let b = random_flat_bundle(&e, r.gen_range(1..=3), &mut r).unwrap();
        let tcc = assemble(&e.complex, &b, &e.spray).unwrap();
        prop_assert!(tcc.is_cochain_complex());
    }
}

#[test]
fn subdivision_preserves_chi_and_homology() {
    for name in SURFACES {
        let mut k = corpus_get(name).unwrap().complex;
        for _ in 0..2 {
            let sd = subdivide(&k).unwrap();
            let big = sd.target().clone();
            assert_eq!(big.euler_characteristic(), k.euler_characteristic(), "{name}");
            for d in 0..=k.dimension() {
                assert_eq!(big.integral_homology(d).unwrap(), k.integral_homology(d).unwrap(), "{name} H{d}");
            }
            k = big;
        }
    }
}

#[test]
fn known_homology() {
    let h1 = |n: &str| {
        let h = corpus_get(n).unwrap().complex.integral_homology(1).unwrap();
        (h.betti, h.torsion)
    };
    assert_eq!(h1("torus"), (2, vec![]));
    assert_eq!(h1("klein"), (1, vec![2]));
    assert_eq!(h1("rp2"), (0, vec![2]));
    assert_eq!(h1("sphere"), (0, vec![]));
    assert_eq!(h1("lens-7-3"), (0, vec![7]));
    let lens = corpus_get("lens-5-2").unwrap().complex;
    assert_eq!(lens.integral_homology(3).unwrap().betti, 1);
    assert_eq!(lens.integral_homology(2).unwrap().betti, 0);
}

#[test]
fn lens_complexes_refuse_subdivision() {
    assert!(subdivide(&corpus_get("lens-3-1").unwrap().complex).is_err());
}
