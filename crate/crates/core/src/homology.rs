//! First integral homology in Smith-normal-form coordinates, with
//! deterministic representative loops built from a spanning tree.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::complex::{CellId, Complex, EdgePath, Step};
use crate::error::{Error, Result};
use crate::snf::{smith_normal_form, IntMat};

/// An element of H₁(M;ℤ). `moduli[i] == 0` marks a free coordinate; torsion
/// coordinates are kept reduced into `[0, moduli[i])`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct H1Class {
    pub coords: Vec<i64>,
    pub moduli: Vec<u64>,
}

impl H1Class {
    pub fn zero(moduli: &[u64]) -> Self {
        H1Class { coords: vec![0; moduli.len()], moduli: moduli.to_vec() }
    }

    /// Builds a class, reducing torsion coordinates.
    pub fn new(coords: Vec<i64>, moduli: &[u64]) -> Result<Self> {
        if coords.len() != moduli.len() {
            return Err(Error::ClassMismatch(format!("expected {} coordinates, got {}", moduli.len(), coords.len())));
        }
        let mut c = H1Class { coords, moduli: moduli.to_vec() };
        c.reduce();
        Ok(c)
    }

    fn reduce(&mut self) {
        for (x, &m) in self.coords.iter_mut().zip(&self.moduli) {
            if m > 0 {
                *x = x.rem_euclid(m as i64);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&x| x == 0)
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    fn check_same_group(&self, other: &H1Class) -> Result<()> {
        if self.moduli != other.moduli {
            return Err(Error::ClassMismatch("classes belong to different groups".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &H1Class) -> Result<H1Class> {
        self.check_same_group(other)?;
        H1Class::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(), &self.moduli)
    }

    pub fn neg(&self) -> H1Class {
        self.scale(-1)
    }

    pub fn sub(&self, other: &H1Class) -> Result<H1Class> {
        self.add(&other.neg())
    }

    pub fn scale(&self, n: i64) -> H1Class {
        let mut c = H1Class { coords: self.coords.iter().map(|x| x * n).collect(), moduli: self.moduli.clone() };
        c.reduce();
        c
    }
}

impl fmt::Display for H1Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (x, m)) in self.coords.iter().zip(&self.moduli).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if *m > 0 {
                write!(f, "{x} mod {m}")?;
            } else {
                write!(f, "{x}")?;
            }
        }
        write!(f, ")")
    }
}

/// SNF presentation of H₁ together with generator loops at the base vertex.
#[derive(Clone, Debug)]
pub struct H1Basis {
    moduli: Vec<u64>,
    edges: Vec<CellId>,
    rank1: usize,
    q_inv: IntMat,
    p2: IntMat,
    kept: Vec<usize>,
    generators: Vec<Vec<i128>>,
    tree: BTreeMap<CellId, EdgePath>,
    tree_edges: std::collections::BTreeSet<CellId>,
    base: CellId,
}

impl H1Basis {
    pub fn new(complex: &Complex) -> Result<Self> {
        let edges = complex.cells_of_dim(1).to_vec();
        let d1 = complex.boundary_matrix(1);
        let s1 = smith_normal_form(&d1)?;
        let n_e = edges.len();
        let r = s1.rank;
        // cycle coordinates of the image of ∂₂
        let d2 = if complex.dimension() >= 2 { complex.boundary_matrix(2) } else { IntMat::zeros(n_e, 0) };
        let b = s1.q_inv.mul(&d2)?.row_range(r, n_e);
        let s2 = smith_normal_form(&b)?;
        let z = s1.q.col_range(r, n_e);
        let p2_inv = s2.p_inv.clone();
        let gens_all = z.mul(&p2_inv)?;
        let mut moduli = Vec::new();
        let mut kept = Vec::new();
        for i in 0..(n_e - r) {
            let d = if i < s2.rank { s2.diag[i] } else { 0 };
            if d == 1 {
                continue;
            }
            kept.push(i);
            moduli.push(d as u64);
        }
        let generators = kept.iter().map(|&i| gens_all.column(i)).collect();
        Ok(H1Basis {
            moduli,
            edges,
            rank1: r,
            q_inv: s1.q_inv,
            p2: s2.p,
            kept,
            generators,
            tree: complex.spanning_tree_paths(),
            tree_edges: complex.tree_edges(),
            base: complex.base_vertex(),
        })
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn betti(&self) -> usize {
        self.moduli.iter().filter(|&&m| m == 0).count()
    }

    pub fn torsion(&self) -> Vec<u64> {
        self.moduli.iter().copied().filter(|&m| m > 0).collect()
    }

    pub fn zero(&self) -> H1Class {
        H1Class::zero(&self.moduli)
    }

    pub fn class(&self, coords: Vec<i64>) -> Result<H1Class> {
        H1Class::new(coords, &self.moduli)
    }

    /// The i-th generator as a class.
    pub fn generator(&self, i: usize) -> H1Class {
        let mut c = self.zero();
        c.coords[i] = 1;
        c.reduce();
        c
    }

    /// Generator 1-cycles, as integer vectors over edges in id order.
    pub fn generator_chains(&self) -> &[Vec<i128>] {
        &self.generators
    }

    pub fn class_of_chain(&self, chain: &BTreeMap<CellId, i64>) -> Result<H1Class> {
        let mut z = vec![0i128; self.edges.len()];
        for (e, &c) in chain {
            let i = self.edges.binary_search(e).map_err(|_| Error::NotAnEdge(*e))?;
            z[i] += c as i128;
        }
        let y = self.q_inv.mul_vec(&z)?;
        if y[..self.rank1].iter().any(|&v| v != 0) {
            return Err(Error::ClassMismatch("chain is not a cycle".into()));
        }
        let h = self.p2.mul_vec(&y[self.rank1..])?;
        let coords = self.kept.iter().map(|&i| i64::try_from(h[i]).map_err(|_| Error::Overflow)).collect::<Result<_>>()?;
        H1Class::new(coords, &self.moduli)
    }

    pub fn class_of_loop(&self, path: &EdgePath) -> Result<H1Class> {
        if !path.is_closed() {
            return Err(Error::OpenPath(path.start));
        }
        self.class_of_chain(&path.chain())
    }

    /// The loop at the base vertex through the tree, across `edge`, and back.
    pub fn fundamental_loop(&self, complex: &Complex, edge: CellId) -> Result<EdgePath> {
        let (t, h) = complex.edge_endpoints(edge)?;
        let step = EdgePath { start: t, end: h, steps: vec![Step::fwd(edge)] };
        Ok(self.tree[&t].then(&step).then(&self.tree[&h].reversed()).reduced())
    }

    /// Deterministic loop at the base vertex representing `class`.
    pub fn representative(&self, complex: &Complex, class: &H1Class) -> Result<EdgePath> {
        if class.moduli != self.moduli {
            return Err(Error::ClassMismatch("class belongs to another complex".into()));
        }
        let mut z = vec![0i128; self.edges.len()];
        for (g, &x) in self.generators.iter().zip(&class.coords) {
            for (zi, gi) in z.iter_mut().zip(g) {
                *zi += gi * x as i128;
            }
        }
        let mut out = EdgePath::empty(self.base);
        for (e, &c) in self.edges.iter().zip(&z) {
            if c == 0 || self.tree_edges.contains(e) {
                continue;
            }
            let c = i64::try_from(c).map_err(|_| Error::Overflow)?;
            out = out.then(&self.fundamental_loop(complex, *e)?.power(c));
        }
        Ok(out.reduced())
    }

    pub fn generator_loop(&self, complex: &Complex, i: usize) -> Result<EdgePath> {
        self.representative(complex, &self.generator(i))
    }

    /// Every class whose free coordinates lie in `[-r, r]` (torsion coordinates over their full range).
    pub fn box_elements(&self, r: i64) -> Vec<H1Class> {
        let mut out = vec![Vec::new()];
        for &m in &self.moduli {
            let range: Vec<i64> = if m > 0 { (0..m as i64).collect() } else { (-r..=r).collect() };
            out = out.into_iter().flat_map(|c: Vec<i64>| range.iter().map(move |&x| [c.clone(), vec![x]].concat())).collect();
        }
        out.into_iter().map(|c| H1Class { coords: c, moduli: self.moduli.clone() }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::one_vertex;

    #[test]
    fn klein_bottle_has_z_plus_z2() {
        let k = one_vertex("klein", 2, &[vec![(0, 1), (1, 1), (0, -1), (1, 1)]], &[]).unwrap();
        let h = H1Basis::new(&k).unwrap();
        assert_eq!(h.betti(), 1);
        assert_eq!(h.torsion(), vec![2]);
        // b·b is a boundary-adjusted generator: twice the torsion generator vanishes
        let b = k.path(CellId(0), vec![Step::fwd(CellId(2))]).unwrap();
        let cb = h.class_of_loop(&b).unwrap();
        assert!(cb.scale(2).is_zero());
        assert!(!cb.is_zero());
    }

    #[test]
    fn representatives_round_trip() {
        let t = one_vertex("torus", 2, &[vec![(0, 1), (1, 1), (0, -1), (1, -1)]], &[]).unwrap();
        let h = H1Basis::new(&t).unwrap();
        for c in h.box_elements(2) {
            let l = h.representative(&t, &c).unwrap();
            assert!(l.is_closed());
            assert_eq!(h.class_of_loop(&l).unwrap(), c);
        }
    }

    #[test]
    fn non_cycle_is_rejected() {
        let s = crate::complex::simplicial("segment", &[vec![0, 1]]).unwrap();
        let h = H1Basis::new(&s).unwrap();
        assert!(h.class_of_chain(&BTreeMap::from([(CellId(2), 1)])).is_err());
        assert_eq!(h.moduli().len(), 0);
    }
}
