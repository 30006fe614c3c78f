//! Barycentric subdivision of complexes of dimension ≤ 3, carrying flat
//! bundles, sprays and paths along.
//!
//! New vertices are the old cells. A new edge from `b̂` to `ĉ` is a *relation
//! class*: a set of incidence chains `c → … → b` describing the same position
//! of `b` in the boundary of `c`. In a regular complex there is one class per
//! comparable pair. In a non-regular complex (dimension ≤ 2) every incidence
//! is its own class, and the corners of a 2-cell pair up the two chains
//! `f → x → v` meeting there. Higher simplices are composable sequences of
//! classes, ordered by increasing old dimension.

use std::collections::{BTreeMap, HashMap};

use crate::bundle::{require_flat, FlatBundle};
use crate::complex::{CellId, CellSpec, Complex, ComplexDescription, EdgePath, IncidenceSpec, Step};
use crate::error::{Error, Result};
use crate::euler::Spray;
use crate::matrix::Mat;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
struct Chain {
    incs: Vec<usize>,
    top: CellId,
    bottom: CellId,
    sign: i64,
    composite: EdgePath,
}

#[derive(Clone, Debug)]
struct Class {
    top: CellId,
    bottom: CellId,
    chains: Vec<usize>,
    rep: EdgePath,
}

#[derive(Clone, Debug)]
struct Flag {
    cells: Vec<CellId>,
    classes: Vec<usize>,
    /// composite class from the top cell to the bottom cell
    total: Option<usize>,
}

/// Correspondence between a complex and its barycentric subdivision.
#[derive(Clone, Debug)]
pub struct SubdivisionMap {
    source: Complex,
    target: Complex,
    /// old cell ↦ its barycenter
    pub vertex_images: BTreeMap<CellId, CellId>,
    /// new cell ↦ the old cell whose interior contains it
    pub cell_carriers: BTreeMap<CellId, CellId>,
    classes: Vec<Class>,
    class_edges: Vec<CellId>,
    flags: BTreeMap<CellId, Flag>,
    /// old edge ↦ (tail class, head class)
    edge_classes: BTreeMap<CellId, (usize, usize)>,
    /// old cell ↦ class towards its anchor through an empty composite
    trivial_class: BTreeMap<CellId, usize>,
    /// (new cell, old cell, sign) for every full flag
    sd_entries: Vec<(CellId, CellId, i64)>,
}

fn enumerate_chains(k: &Complex) -> Vec<Chain> {
    let incs = k.incidences();
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = Vec::new();
    for c in k.cells().filter(|c| c.dim > 0) {
        for &i in k.incidence_ids(c.id).iter().rev() {
            stack.push(vec![i]);
        }
        while let Some(chain) = stack.pop() {
            let last = &incs[*chain.last().unwrap()];
            let composite = chain.iter().fold(EdgePath::empty(c.anchor), |p, &i| p.then(&incs[i].path)).reduced();
            out.push(Chain {
                incs: chain.clone(),
                top: c.id,
                bottom: last.face,
                sign: chain.iter().map(|&i| incs[i].coeff).product(),
                composite,
            });
            for &i in k.incidence_ids(last.face).iter().rev() {
                let mut next = chain.clone();
                next.push(i);
                stack.push(next);
            }
        }
    }
    out
}

fn is_regular(k: &Complex) -> bool {
    let mut seen = std::collections::HashSet::new();
    k.incidences().iter().all(|i| i.coeff.abs() == 1 && seen.insert((i.coface, i.face)))
}

fn build_classes(k: &Complex, chains: &[Chain]) -> Result<Vec<Class>> {
    let mut groups: Vec<((CellId, CellId), Vec<Vec<usize>>)> = Vec::new();
    let mut push_group = |key: (CellId, CellId), members: Vec<usize>| groups.push((key, vec![members]));
    if is_regular(k) {
        let mut by_pair: BTreeMap<(CellId, CellId), Vec<usize>> = BTreeMap::new();
        for (i, ch) in chains.iter().enumerate() {
            by_pair.entry((ch.top, ch.bottom)).or_default().push(i);
        }
        for (key, members) in by_pair {
            push_group(key, members);
        }
    } else {
        if k.dimension() > 2 {
            return Err(Error::Subdivision("non-regular complexes are only subdivided up to dimension 2".into()));
        }
        if let Some(i) = k.incidences().iter().find(|i| i.coeff.abs() != 1) {
            return Err(Error::Subdivision(format!("incidence {} -> {} has coefficient {}", i.coface, i.face, i.coeff)));
        }
        let mut corners: BTreeMap<(CellId, CellId), Vec<usize>> = BTreeMap::new();
        for (i, ch) in chains.iter().enumerate() {
            match ch.incs.len() {
                1 => push_group((ch.top, ch.bottom), vec![i]),
                2 => corners.entry((ch.top, ch.bottom)).or_default().push(i),
                _ => unreachable!("dimension ≤ 2"),
            }
        }
        for (key, members) in corners {
            // same corner ⇔ same reduced composite; leftovers pair in order
            let mut by_word: Vec<(Vec<Step>, Vec<usize>, Vec<usize>)> = Vec::new();
            for &i in &members {
                let w = chains[i].composite.steps.clone();
                let slot = match by_word.iter().position(|g| g.0 == w) {
                    Some(p) => p,
                    None => {
                        by_word.push((w, Vec::new(), Vec::new()));
                        by_word.len() - 1
                    }
                };
                if chains[i].sign > 0 {
                    by_word[slot].1.push(i);
                } else {
                    by_word[slot].2.push(i);
                }
            }
            let (mut plus_left, mut minus_left) = (Vec::new(), Vec::new());
            let mut pairs = Vec::new();
            for (_, plus, minus) in by_word {
                let n = plus.len().min(minus.len());
                pairs.extend(plus[..n].iter().zip(&minus[..n]).map(|(&a, &b)| vec![a.min(b), a.max(b)]));
                plus_left.extend_from_slice(&plus[n..]);
                minus_left.extend_from_slice(&minus[n..]);
            }
            if plus_left.len() != minus_left.len() {
                return Err(Error::Subdivision(format!("corners of {} -> {} do not pair up", key.0, key.1)));
            }
            pairs.extend(plus_left.iter().zip(&minus_left).map(|(&a, &b)| vec![a.min(b), a.max(b)]));
            pairs.sort();
            for p in pairs {
                push_group(key, p);
            }
        }
    }
    Ok(groups
        .into_iter()
        .flat_map(|(key, sets)| sets.into_iter().map(move |members| (key, members)))
        .map(|((top, bottom), members)| {
            let rep = members.iter().map(|&i| &chains[i].composite).min_by_key(|p| p.len()).unwrap().clone();
            Class { top, bottom, chains: members, rep }
        })
        .collect())
}

impl SubdivisionMap {
    pub fn source(&self) -> &Complex {
        &self.source
    }

    pub fn target(&self) -> &Complex {
        &self.target
    }

    fn edge_of(&self, class: usize) -> CellId {
        self.class_edges[class]
    }

    /// Replaces each old edge step by the two half-edges through its barycenter.
    pub fn transfer_path(&self, path: &EdgePath) -> Result<EdgePath> {
        let mut steps = Vec::with_capacity(2 * path.len());
        for s in &path.steps {
            let &(tail, head) = self.edge_classes.get(&s.edge).ok_or(Error::NotAnEdge(s.edge))?;
            if s.dir > 0 {
                steps.extend([Step::fwd(self.edge_of(tail)), Step::rev(self.edge_of(head))]);
            } else {
                steps.extend([Step::fwd(self.edge_of(head)), Step::rev(self.edge_of(tail))]);
            }
        }
        self.target.path(self.vertex_images[&path.start], steps)
    }

    /// Edge for class `b̂ → ĉ` carries the inverse transport of the class's
    /// representative path from the anchor of `c` to the anchor of `b`.
    pub fn transfer_bundle<F: Scalar>(&self, bundle: &FlatBundle<F>) -> Result<FlatBundle<F>> {
        require_flat(&self.source, bundle)?;
        let mut out = BTreeMap::new();
        for (i, class) in self.classes.iter().enumerate() {
            let t = bundle.transport(&class.rep)?;
            out.insert(self.edge_of(i), t.inverse().ok_or(Error::SingularMatrix(self.edge_of(i)))?);
        }
        FlatBundle::new(&self.target, bundle.rank(), out)
    }

    /// Leg of a flag `c_0 < … < c_k`: the transferred leg of `c_k`, into the
    /// barycenter of `c_k`, then down to `ĉ_0` along the flag's composite class.
    pub fn transfer_spray(&self, spray: &Spray) -> Result<Spray> {
        spray.validate(&self.source)?;
        let mut legs = BTreeMap::new();
        for (&id, flag) in &self.flags {
            let top = *flag.cells.last().unwrap();
            let mut leg = self.transfer_path(spray.leg(top)?)?;
            if let Some(&triv) = self.trivial_class.get(&top) {
                leg = leg.then(&self.target.path(leg.end, vec![Step::fwd(self.edge_of(triv))])?);
            }
            if let Some(c) = flag.total {
                leg = leg.then(&self.target.path(leg.end, vec![Step::rev(self.edge_of(c))])?);
            }
            legs.insert(id, leg);
        }
        Ok(Spray { legs })
    }

    /// Pull-back `C^d(K') → C^d(K)`: the value on `σ` is the signed sum over
    /// full flags topped by `σ`.
    pub fn cochain_map<F: Scalar>(&self, rank: usize, d: usize) -> Mat<F> {
        let mut m = Mat::zeros(rank * self.source.count(d), rank * self.target.count(d));
        let id = Mat::identity(rank);
        for &(new, old, sign) in &self.sd_entries {
            if self.source.dim_of(old) == d {
                m.add_block(rank * self.source.position(old), rank * self.target.position(new), &id, &F::from_i64(sign));
            }
        }
        m
    }

    pub fn cochain_maps<F: Scalar>(&self, rank: usize) -> Vec<Mat<F>> {
        (0..=self.source.dimension()).map(|d| self.cochain_map(rank, d)).collect()
    }
}

/// Subdivides the complex alone; bundles, sprays and paths are carried by the map.
pub fn subdivide(k: &Complex) -> Result<SubdivisionMap> {
    if k.dimension() > 3 {
        return Err(Error::UnsupportedDimension(k.dimension()));
    }
    let chains = enumerate_chains(k);
    let classes = build_classes(k, &chains)?;
    let mut class_of_chain: HashMap<Vec<usize>, usize> = HashMap::new();
    for (ci, c) in classes.iter().enumerate() {
        for &ch in &c.chains {
            class_of_chain.insert(chains[ch].incs.clone(), ci);
        }
    }
    let compose = |upper: usize, lower: usize| -> Result<usize> {
        let mut incs = chains[classes[upper].chains[0]].incs.clone();
        incs.extend_from_slice(&chains[classes[lower].chains[0]].incs);
        class_of_chain.get(&incs).copied().ok_or_else(|| Error::Subdivision("incidence chains do not compose".into()))
    };
    let mut by_bottom: HashMap<CellId, Vec<usize>> = HashMap::new();
    for (i, c) in classes.iter().enumerate() {
        by_bottom.entry(c.bottom).or_default().push(i);
    }
    // flags, level by level
    let mut levels: Vec<Vec<Flag>> = vec![k.cells().map(|c| Flag { cells: vec![c.id], classes: vec![], total: None }).collect()];
    loop {
        let mut next = Vec::new();
        for f in levels.last().unwrap() {
            let top = *f.cells.last().unwrap();
            for &r in by_bottom.get(&top).into_iter().flatten() {
                let total = match f.total {
                    None => r,
                    Some(t) => compose(r, t)?,
                };
                let mut cells = f.cells.clone();
                cells.push(classes[r].top);
                let mut cl = f.classes.clone();
                cl.push(r);
                next.push(Flag { cells, classes: cl, total: Some(total) });
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_by(|a, b| (&a.cells, &a.classes).cmp(&(&b.cells, &b.classes)));
        levels.push(next);
    }
    let mut ids: HashMap<(Vec<CellId>, Vec<usize>), CellId> = HashMap::new();
    let mut flags = BTreeMap::new();
    let mut next_id = 0u32;
    for level in &levels {
        for f in level {
            let id = CellId(next_id);
            next_id += 1;
            ids.insert((f.cells.clone(), f.classes.clone()), id);
            flags.insert(id, f.clone());
        }
    }
    let vertex_images: BTreeMap<CellId, CellId> = k.cells().map(|c| (c.id, ids[&(vec![c.id], vec![])])).collect();
    let class_edges: Vec<CellId> = (0..classes.len()).map(|r| ids[&(vec![classes[r].bottom, classes[r].top], vec![r])]).collect();

    let mut cells = Vec::new();
    let mut incidences = Vec::new();
    for (&id, f) in &flags {
        let dim = f.classes.len();
        cells.push(CellSpec { id, dim, anchor: vertex_images[&f.cells[0]] });
        for i in 0..=dim {
            if dim == 0 {
                break;
            }
            let (fc, fr): (Vec<CellId>, Vec<usize>) = if i == 0 {
                (f.cells[1..].to_vec(), f.classes[1..].to_vec())
            } else if i == dim {
                (f.cells[..dim].to_vec(), f.classes[..dim - 1].to_vec())
            } else {
                let mut fc = f.cells.clone();
                fc.remove(i);
                let mut fr = f.classes[..i - 1].to_vec();
                fr.push(compose(f.classes[i], f.classes[i - 1])?);
                fr.extend_from_slice(&f.classes[i + 1..]);
                (fc, fr)
            };
            let path = if i == 0 { vec![Step::fwd(class_edges[f.classes[0]])] } else { vec![] };
            let face = ids[&(fc, fr)];
            incidences.push(IncidenceSpec { coface: id, face, coeff: if i % 2 == 0 { 1 } else { -1 }, path });
        }
    }
    let target = Complex::from_description(&ComplexDescription {
        name: format!("sd({})", k.name()),
        base_vertex: vertex_images[&k.base_vertex()],
        cells,
        incidences,
    })?;

    let mut edge_classes = BTreeMap::new();
    for &e in k.cells_of_dim(1) {
        let find = |coeff: i64| {
            k.incidence_ids(e).iter().find(|&&i| k.incidences()[i].coeff == coeff).map(|&i| class_of_chain[&vec![i]])
        };
        match (find(-1), find(1)) {
            (Some(t), Some(h)) => edge_classes.insert(e, (t, h)),
            _ => return Err(Error::Subdivision(format!("edge {e} lacks tail/head incidences"))),
        };
    }
    let mut trivial_class = BTreeMap::new();
    for c in k.cells().filter(|c| c.dim > 0) {
        let found = chains.iter().find(|ch| ch.top == c.id && ch.bottom == c.anchor && ch.composite.is_empty());
        let ch = found.ok_or_else(|| Error::Subdivision(format!("no trivial chain from {} to its anchor", c.id)))?;
        trivial_class.insert(c.id, class_of_chain[&ch.incs]);
    }
    let mut sd_entries = Vec::new();
    for (&id, f) in &flags {
        let d = f.classes.len();
        if f.cells.iter().enumerate().all(|(i, &c)| k.dim_of(c) == i) {
            let sign: i64 = f.classes.iter().map(|&r| chains[classes[r].chains[0]].sign).product();
            let tri = if (d * (d + 1) / 2) % 2 == 0 { 1 } else { -1 };
            sd_entries.push((id, *f.cells.last().unwrap(), tri * sign));
        }
    }
    let cell_carriers = flags.iter().map(|(&id, f)| (id, *f.cells.last().unwrap())).collect();
    Ok(SubdivisionMap {
        source: k.clone(),
        target,
        vertex_images,
        cell_carriers,
        classes,
        class_edges,
        flags,
        edge_classes,
        trivial_class,
        sd_entries,
    })
}

#[derive(Clone, Debug)]
pub struct Subdivision<F: Scalar> {
    pub complex: Complex,
    pub bundle: FlatBundle<F>,
    pub spray: Spray,
    pub map: SubdivisionMap,
}

pub fn barycentric_subdivide<F: Scalar>(k: &Complex, bundle: &FlatBundle<F>, spray: &Spray) -> Result<Subdivision<F>> {
    let map = subdivide(k)?;
    Ok(Subdivision { complex: map.target().clone(), bundle: map.transfer_bundle(bundle)?, spray: map.transfer_spray(spray)?, map })
}
