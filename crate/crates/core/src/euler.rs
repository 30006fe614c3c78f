//! Euler structures as sprays: a path from the base vertex to the anchor of
//! every cell. Two sprays give the same Euler structure iff their
//! difference class vanishes.

use std::collections::BTreeMap;

use crate::complex::{CellId, Complex, EdgePath};
use crate::error::{Error, Result};
pub use crate::homology::{H1Basis, H1Class};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spray {
    pub legs: BTreeMap<CellId, EdgePath>,
}

impl Spray {
    pub fn leg(&self, cell: CellId) -> Result<&EdgePath> {
        self.legs.get(&cell).ok_or_else(|| Error::InvalidSpray(format!("no leg for cell {cell}")))
    }

    /// Every cell needs a walk from the base vertex to its anchor. The base
    /// vertex's own leg may be any loop at the base vertex (loop modification
    /// prepends to it as well).
    pub fn validate(&self, complex: &Complex) -> Result<()> {
        let m0 = complex.base_vertex();
        for c in complex.cells() {
            let leg = self.leg(c.id)?;
            if leg.start != m0 || leg.end != c.anchor {
                return Err(Error::InvalidSpray(format!("leg of {} must run from {} to {}", c.id, m0, c.anchor)));
            }
            complex.check_path(leg).map_err(|e| Error::InvalidSpray(format!("leg of {}: {e}", c.id)))?;
        }
        if let Some(extra) = self.legs.keys().find(|id| !complex.contains(**id)) {
            return Err(Error::InvalidSpray(format!("leg for unknown cell {extra}")));
        }
        Ok(())
    }

    /// Cancels backtracking in every leg; the Euler structure is unchanged.
    pub fn reduced(&self) -> Spray {
        Spray { legs: self.legs.iter().map(|(&c, p)| (c, p.reduced())).collect() }
    }
}

/// Legs along the lowest-id-first spanning tree.
pub fn canonical_spray(complex: &Complex) -> Spray {
    let tree = complex.spanning_tree_paths();
    Spray { legs: complex.cells().map(|c| (c.id, tree[&c.anchor].clone())).collect() }
}

/// Class of Σ_cells (−1)^dim (β_leg − α_leg).
pub fn spray_difference_in(h1: &H1Basis, complex: &Complex, alpha: &Spray, beta: &Spray) -> Result<H1Class> {
    let mut chain: BTreeMap<CellId, i64> = BTreeMap::new();
    for c in complex.cells() {
        let sign = if c.dim % 2 == 0 { 1 } else { -1 };
        let (a, b) = (alpha.leg(c.id)?, beta.leg(c.id)?);
        if a.end != b.end {
            return Err(Error::InvalidSpray(format!("legs of {} end at different vertices", c.id)));
        }
        for (e, v) in b.chain() {
            *chain.entry(e).or_insert(0) += sign * v;
        }
        for (e, v) in a.chain() {
            *chain.entry(e).or_insert(0) -= sign * v;
        }
    }
    h1.class_of_chain(&chain)
}

pub fn spray_difference(complex: &Complex, alpha: &Spray, beta: &Spray) -> Result<H1Class> {
    spray_difference_in(&H1Basis::new(complex)?, complex, alpha, beta)
}

/// A spray `β` with `u(α, β) = u`: the leg of the lowest-id even-dimensional
/// cell is prefixed by a representative loop of `u`.
pub fn act_in(h1: &H1Basis, complex: &Complex, u: &H1Class, alpha: &Spray) -> Result<Spray> {
    if u.moduli != h1.moduli() {
        return Err(Error::ClassMismatch(format!("class {u} has the wrong shape")));
    }
    let target = complex.cells().find(|c| c.dim % 2 == 0).map(|c| c.id).ok_or(Error::Disconnected)?;
    let lp = h1.representative(complex, u)?;
    let mut beta = alpha.clone();
    let leg = alpha.leg(target)?;
    beta.legs.insert(target, lp.then(leg).reduced());
    Ok(beta)
}

pub fn act(complex: &Complex, u: &H1Class, alpha: &Spray) -> Result<Spray> {
    act_in(&H1Basis::new(complex)?, complex, u, alpha)
}

/// Prepends the loop `gamma` (closed at the base vertex) to every leg.
pub fn loop_modify(complex: &Complex, alpha: &Spray, gamma: &EdgePath) -> Result<Spray> {
    let m0 = complex.base_vertex();
    if gamma.start != m0 || gamma.end != m0 {
        return Err(Error::OpenPath(m0));
    }
    complex.check_path(gamma)?;
    let legs = alpha.legs.iter().map(|(&c, leg)| (c, gamma.then(leg))).collect();
    Ok(Spray { legs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{one_vertex, simplicial, Step};

    #[test]
    fn canonical_spray_on_two_vertex_circle() {
        // vertices 0,1; edges 2=[0,1], 3=[0,1]' — build as a triangle boundary instead
        let c = simplicial("circle3", &[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let s = canonical_spray(&c);
        s.validate(&c).unwrap();
        assert!(s.leg(CellId(0)).unwrap().is_empty());
        assert_eq!(s.leg(CellId(1)).unwrap().steps, vec![Step::fwd(CellId(3))]);
        // edges are anchored at their lowest vertex
        assert_eq!(s.leg(CellId(5)).unwrap().end, CellId(1));
    }

    #[test]
    fn circle_generator_action() {
        let c = one_vertex("circle", 1, &[], &[]).unwrap();
        let h = H1Basis::new(&c).unwrap();
        let a = canonical_spray(&c);
        let g = h.generator(0);
        let b = act_in(&h, &c, &g, &a).unwrap();
        assert_eq!(spray_difference_in(&h, &c, &a, &b).unwrap(), g);
        // winding the 1-cell's leg gives minus the class of the loop
        let lp = h.representative(&c, &g).unwrap();
        let mut w = a.clone();
        w.legs.insert(CellId(1), lp.clone());
        assert_eq!(spray_difference_in(&h, &c, &a, &w).unwrap(), h.class_of_loop(&lp).unwrap().neg());
    }

    #[test]
    fn loop_modification_on_torus_is_invisible() {
        let t = one_vertex("torus", 2, &[vec![(0, 1), (1, 1), (0, -1), (1, -1)]], &[]).unwrap();
        let a = canonical_spray(&t);
        let gamma = t.path(CellId(0), vec![Step::fwd(CellId(1))]).unwrap();
        let b = loop_modify(&t, &a, &gamma).unwrap();
        assert!(spray_difference(&t, &a, &b).unwrap().is_zero());
        assert!(loop_modify(&t, &a, &EdgePath::empty(CellId(0))).unwrap() == a);
    }

    #[test]
    fn invalid_legs_rejected() {
        let c = simplicial("seg", &[vec![0, 1]]).unwrap();
        let mut s = canonical_spray(&c);
        s.legs.insert(CellId(1), EdgePath::empty(CellId(0)));
        assert!(s.validate(&c).is_err());
        let open = c.path(CellId(0), vec![Step::fwd(CellId(2))]).unwrap();
        assert!(loop_modify(&c, &canonical_spray(&c), &open).is_err());
    }
}
