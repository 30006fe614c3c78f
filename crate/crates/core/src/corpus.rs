//! Built-in complexes and generators of random flat bundles on them.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bundle::{FBundle, FlatBundle, QBundle};
use crate::complex::{one_vertex, simplicial, CellId, CellSpec, Complex, ComplexDescription, IncidenceSpec, Step};
use crate::error::{Error, Result};
use crate::euler::{canonical_spray, Spray};
use crate::matrix::{FMat, QMat};
use crate::scalar::{rational, Rational, Scalar};

/// Shape of the fundamental group presentation, which decides how random
/// flat bundles are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// no 2-cells: any edge matrices are flat
    Graph,
    /// simply connected
    SimplyConnected,
    Torus,
    Klein,
    ProjectivePlane,
    Lens { p: u32, q: u32 },
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub family: Family,
    pub complex: Complex,
    pub bundle: Option<QBundle>,
    pub spray: Spray,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusInfo {
    pub name: String,
    pub dimension: usize,
    pub euler_characteristic: i64,
    pub cells: usize,
    pub content_hash: String,
}

/// Names of every built-in complex.
pub fn corpus_names() -> Vec<String> {
    let mut names: Vec<String> =
        ["point", "circle-1cell", "circle-2cell", "circle-triangle", "torus", "klein", "rp2", "sphere"].iter().map(|s| s.to_string()).collect();
    for p in 2..=7u32 {
        for q in 1..p {
            if p.gcd(&q) == 1 {
                names.push(format!("lens-{p}-{q}"));
            }
        }
    }
    names
}

/// Inverse of `q` modulo `p`.
pub fn mod_inverse(q: u32, p: u32) -> u32 {
    (1..p).find(|x| (x * q) % p == 1).unwrap_or(1)
}

/// One cell per dimension 0..3: the 2-cell wraps `p` times around the edge,
/// the 3-cell meets the 2-cell along `t^{q'}` and the identity.
pub fn lens_complex(p: u32, q: u32) -> Result<Complex> {
    if p < 2 || q == 0 || q >= p || p.gcd(&q) != 1 {
        return Err(Error::UnknownName(format!("lens-{p}-{q}")));
    }
    let qi = mod_inverse(q, p) as usize;
    one_vertex(&format!("lens-{p}-{q}"), 1, &[vec![(0, 1); p as usize]], &[vec![(0, 1, vec![(0, 1); qi]), (0, -1, vec![])]])
}

fn two_cell_circle() -> Result<Complex> {
    let v = |i| CellId(i);
    let edge = |e: u32| {
        [
            IncidenceSpec { coface: v(e), face: v(0), coeff: -1, path: vec![] },
            IncidenceSpec { coface: v(e), face: v(1), coeff: 1, path: vec![Step::fwd(v(e))] },
        ]
    };
    Complex::from_description(&ComplexDescription {
        name: "circle-2cell".into(),
        base_vertex: v(0),
        cells: vec![
            CellSpec { id: v(0), dim: 0, anchor: v(0) },
            CellSpec { id: v(1), dim: 0, anchor: v(1) },
            CellSpec { id: v(2), dim: 1, anchor: v(0) },
            CellSpec { id: v(3), dim: 1, anchor: v(0) },
        ],
        incidences: edge(2).into_iter().chain(edge(3)).collect(),
    })
}

fn build(name: &str) -> Result<(Complex, Family)> {
    let c = match name {
        "point" => (simplicial(name, &[vec![0]])?, Family::SimplyConnected),
        "circle-1cell" => (one_vertex(name, 1, &[], &[])?, Family::Graph),
        "circle-2cell" => (two_cell_circle()?, Family::Graph),
        "circle-triangle" => (simplicial(name, &[vec![0, 1], vec![1, 2], vec![0, 2]])?, Family::Graph),
        "torus" => (one_vertex(name, 2, &[vec![(0, 1), (1, 1), (0, -1), (1, -1)]], &[])?, Family::Torus),
        "klein" => (one_vertex(name, 2, &[vec![(0, 1), (1, 1), (0, -1), (1, 1)]], &[])?, Family::Klein),
        "rp2" => (one_vertex(name, 1, &[vec![(0, 1), (0, 1)]], &[])?, Family::ProjectivePlane),
        "sphere" => (simplicial(name, &[vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]])?, Family::SimplyConnected),
        _ => {
            let parts: Vec<&str> = name.strip_prefix("lens-").ok_or_else(|| Error::UnknownName(name.into()))?.split('-').collect();
            let parse = |s: &str| s.parse::<u32>().map_err(|_| Error::UnknownName(name.into()));
            if parts.len() != 2 {
                return Err(Error::UnknownName(name.into()));
            }
            let (p, q) = (parse(parts[0])?, parse(parts[1])?);
            if p > 7 {
                return Err(Error::UnknownName(name.into()));
            }
            (lens_complex(p, q)?, Family::Lens { p, q })
        }
    };
    Ok(c)
}

fn q1(v: i64) -> QMat {
    QMat::from_i64_rows(&[&[v]])
}

/// Default example bundle of each entry.
fn default_bundle(name: &str, c: &Complex) -> Option<QBundle> {
    let edges = c.cells_of_dim(1);
    let m: BTreeMap<CellId, QMat> = match name {
        "circle-1cell" => BTreeMap::from([(edges[0], q1(3))]),
        "circle-2cell" => BTreeMap::from([(edges[0], q1(3)), (edges[1], q1(1))]),
        "circle-triangle" => edges.iter().enumerate().map(|(i, &e)| (e, q1(if i == 0 { 3 } else { 1 }))).collect(),
        "torus" => BTreeMap::from([(edges[0], q1(2)), (edges[1], q1(3))]),
        "klein" => BTreeMap::from([(edges[0], q1(2)), (edges[1], q1(-1))]),
        "rp2" => BTreeMap::from([(edges[0], q1(-1))]),
        _ => return Some(FlatBundle::trivial(c, 1)),
    };
    FlatBundle::new(c, 1, m).ok()
}

pub fn corpus_get(name: &str) -> Result<CorpusEntry> {
    let (complex, family) = build(name)?;
    Ok(CorpusEntry { name: name.into(), family, bundle: default_bundle(name, &complex), spray: canonical_spray(&complex), complex })
}

/// SHA-256 of the canonical JSON description.
pub fn content_hash(complex: &Complex) -> String {
    let json = serde_json::to_vec(&complex.to_description()).expect("descriptions serialize");
    hex::encode(Sha256::digest(json))
}

pub fn corpus_list() -> Vec<CorpusInfo> {
    corpus_names()
        .into_iter()
        .map(|n| {
            let e = corpus_get(&n).expect("built-in corpus is valid");
            CorpusInfo {
                dimension: e.complex.dimension(),
                euler_characteristic: e.complex.euler_characteristic(),
                cells: e.complex.cells().count(),
                content_hash: content_hash(&e.complex),
                name: n,
            }
        })
        .collect()
}

fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    rational(rng.gen_range(-4..=4), rng.gen_range(1..=3))
}

/// Random invertible rational matrix with small entries.
pub fn random_invertible<R: Rng>(rng: &mut R, k: usize) -> QMat {
    loop {
        let m = QMat::from_fn(k, k, |_, _| small_rational(rng));
        if !m.det().is_zero() {
            return m;
        }
    }
}

/// Random invertible `P·L·U` (permutation, unit lower, upper triangular with
/// small rational entries) with `‖S‖_max·‖S⁻¹‖_max·k ≤ 100`. The factored form
/// keeps denominators of `S⁻¹` small, and the condition cap keeps twisted
/// Laplacians away from the rank guard band.
pub fn random_conditioned<R: Rng>(rng: &mut R, k: usize) -> QMat {
    let entry = |rng: &mut R| rational(rng.gen_range(-1..=1), rng.gen_range(1..=2));
    loop {
        let mut perm: Vec<usize> = (0..k).collect();
        perm.shuffle(rng);
        let p = QMat::from_fn(k, k, |i, j| Rational::from_i64((perm[i] == j) as i64));
        let l = QMat::from_fn(k, k, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => entry(rng),
            std::cmp::Ordering::Equal => Rational::from_i64(1),
            std::cmp::Ordering::Less => Rational::from_i64(0),
        });
        let u = QMat::from_fn(k, k, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => entry(rng),
            std::cmp::Ordering::Equal => rational(if rng.gen_bool(0.5) { 1 } else { -1 }, 1) * rational(rng.gen_range(1..=2), rng.gen_range(1..=2)),
            std::cmp::Ordering::Greater => Rational::from_i64(0),
        });
        let s = &(&p * &l) * &u;
        let f = s.to_f64();
        let inv = f.inverse().expect("invertible");
        if f.max_abs() * inv.max_abs() * k as f64 <= 100.0 {
            return s;
        }
    }
}

fn nonzero<R: Rng>(rng: &mut R) -> Rational {
    loop {
        let r = small_rational(rng);
        if !r.is_zero() {
            return r;
        }
    }
}

fn conj(s: &QMat, m: &QMat) -> QMat {
    &(s * m) * &s.inverse().expect("invertible")
}

fn cyclic_permutation(p: usize) -> QMat {
    QMat::from_fn(p, p, |i, j| Rational::from_i64(((j + 1) % p == i) as i64))
}

/// Draws a random exact flat bundle. The rank is `rank` except on lens
/// complexes with `rank > 1`, where holonomy is a conjugated `p`-cycle (rank `p`),
/// and on the Klein bottle, where `rank` is rounded to 1 or 2.
pub fn random_flat_bundle<R: Rng>(entry: &CorpusEntry, rank: usize, rng: &mut R) -> Result<QBundle> {
    let c = &entry.complex;
    let edges = c.cells_of_dim(1).to_vec();
    let mut m: BTreeMap<CellId, QMat> = BTreeMap::new();
    let k = match entry.family {
        Family::Graph => {
            for &e in &edges {
                m.insert(e, random_conditioned(rng, rank));
            }
            rank
        }
        Family::SimplyConnected => {
            for &e in &edges {
                m.insert(e, QMat::identity(rank));
            }
            rank
        }
        Family::Torus => {
            let s = random_conditioned(rng, rank);
            let d1: Vec<Rational> = (0..rank).map(|_| nonzero(rng)).collect();
            let d2: Vec<Rational> = (0..rank).map(|_| nonzero(rng)).collect();
            m.insert(edges[0], conj(&s, &QMat::diag(&d1)));
            m.insert(edges[1], conj(&s, &QMat::diag(&d2)));
            rank
        }
        Family::Klein => {
            if rank >= 2 {
                let s = random_conditioned(rng, 2);
                let swap = QMat::from_i64_rows(&[&[0, 1], &[1, 0]]).scale(&nonzero(rng));
                let b = nonzero(rng);
                m.insert(edges[0], conj(&s, &swap));
                m.insert(edges[1], conj(&s, &QMat::diag(&[b.clone(), Rational::from_i64(1) / b])));
                2
            } else {
                m.insert(edges[0], QMat::from_rows(vec![vec![nonzero(rng)]]));
                m.insert(edges[1], q1(if rng.gen_bool(0.5) { 1 } else { -1 }));
                1
            }
        }
        Family::ProjectivePlane => {
            let s = random_conditioned(rng, rank);
            let signs: Vec<Rational> = (0..rank).map(|_| Rational::from_i64(if rng.gen_bool(0.5) { 1 } else { -1 })).collect();
            m.insert(edges[0], conj(&s, &QMat::diag(&signs)));
            rank
        }
        Family::Lens { p, .. } => {
            if rank > 1 {
                let s = random_conditioned(rng, p as usize);
                m.insert(edges[0], conj(&s, &cyclic_permutation(p as usize)));
                p as usize
            } else {
                m.insert(edges[0], q1(if p % 2 == 0 && rng.gen_bool(0.5) { -1 } else { 1 }));
                1
            }
        }
    };
    let b = FlatBundle::new(c, k, m)?;
    // random gauge on every vertex
    let g: BTreeMap<CellId, QMat> = c.cells_of_dim(0).iter().map(|&v| (v, random_conditioned(rng, k))).collect();
    b.gauge(c, &g)
}

/// Rotation by angle `2π j / p` on the plane.
pub fn rotation(j: u32, p: u32) -> FMat {
    let (s, co) = (std::f64::consts::TAU * j as f64 / p as f64).sin_cos();
    FMat::from_rows(vec![vec![co, -s], vec![s, co]])
}

/// Rank-2 rotation bundle on `lens-p-q` with holonomy `R(2πj/p)`.
pub fn lens_rotation_bundle(c: &Complex, p: u32, j: u32) -> Result<FBundle> {
    FlatBundle::new(c, 2, BTreeMap::from([(c.cells_of_dim(1)[0], rotation(j, p))]))
}
