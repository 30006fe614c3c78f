//! Finite CW/simplicial complexes with oriented incidences and connector paths.
//!
//! Every cell has an anchor vertex. An incidence `coface -> face` carries an
//! integer coefficient and a connector walk in the 1-skeleton from the anchor
//! of the coface to the anchor of the face. A 1-cell `e` is always recorded
//! with exactly two incidences: `(e, tail, -1, [])` and `(e, head, +1, [e])`,
//! where the tail is the anchor of `e`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snf::{smith_normal_form, IntMat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CellId(pub u32);

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Step {
    pub edge: CellId,
    pub dir: i8,
}

impl Step {
    pub fn fwd(edge: CellId) -> Self {
        Step { edge, dir: 1 }
    }

    pub fn rev(edge: CellId) -> Self {
        Step { edge, dir: -1 }
    }

    pub fn inverse(self) -> Self {
        Step { edge: self.edge, dir: -self.dir }
    }
}

/// A walk in the 1-skeleton. Empty walks still record their vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgePath {
    pub start: CellId,
    pub end: CellId,
    pub steps: Vec<Step>,
}

impl EdgePath {
    pub fn empty(at: CellId) -> Self {
        EdgePath { start: at, end: at, steps: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.start == self.end
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    /// `self` followed by `other`. Panics if the endpoints do not meet.
    pub fn then(&self, other: &EdgePath) -> EdgePath {
        assert_eq!(self.end, other.start, "concatenated paths must be composable");
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        EdgePath { start: self.start, end: other.end, steps }
    }

    pub fn reversed(&self) -> EdgePath {
        EdgePath { start: self.end, end: self.start, steps: self.steps.iter().rev().map(|s| s.inverse()).collect() }
    }

    /// Cancels adjacent `e, e^-1` pairs.
    pub fn reduced(&self) -> EdgePath {
        let mut out: Vec<Step> = Vec::with_capacity(self.steps.len());
        for &s in &self.steps {
            if out.last().is_some_and(|&l| l.edge == s.edge && l.dir == -s.dir) {
                out.pop();
            } else {
                out.push(s);
            }
        }
        EdgePath { start: self.start, end: self.end, steps: out }
    }

    /// The walk repeated `n` times (reversed for negative `n`). Requires a loop.
    pub fn power(&self, n: i64) -> EdgePath {
        assert!(self.is_closed());
        let base = if n < 0 { self.reversed() } else { self.clone() };
        let mut out = EdgePath::empty(self.start);
        for _ in 0..n.unsigned_abs() {
            out = out.then(&base);
        }
        out
    }

    /// Integral 1-chain of the walk.
    pub fn chain(&self) -> BTreeMap<CellId, i64> {
        let mut c = BTreeMap::new();
        for s in &self.steps {
            *c.entry(s.edge).or_insert(0) += s.dir as i64;
        }
        c.retain(|_, v| *v != 0);
        c
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSpec {
    pub id: CellId,
    pub dim: usize,
    pub anchor: CellId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceSpec {
    pub coface: CellId,
    pub face: CellId,
    pub coeff: i64,
    #[serde(default)]
    pub path: Vec<Step>,
}

/// Raw, possibly invalid, description of a complex. This is the JSON file format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexDescription {
    pub name: String,
    pub base_vertex: CellId,
    pub cells: Vec<CellSpec>,
    pub incidences: Vec<IncidenceSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    DuplicateCell,
    UnknownCell,
    BadAnchor,
    BadBaseVertex,
    BadIncidence,
    BadEdge,
    BadConnector,
    BoundaryNotNilpotent,
    Disconnected,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub cells: Vec<CellId>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: ViolationKind, cells: Vec<CellId>, message: impl Into<String>) {
        self.violations.push(Violation { kind, cells, message: message.into() });
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Incidence {
    pub coface: CellId,
    pub face: CellId,
    pub coeff: i64,
    pub path: EdgePath,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Homology {
    pub betti: usize,
    pub torsion: Vec<u64>,
}

/// A validated complex with derived indices.
#[derive(Clone, Debug)]
pub struct Complex {
    name: String,
    base: CellId,
    cells: BTreeMap<CellId, CellSpec>,
    by_dim: Vec<Vec<CellId>>,
    position: HashMap<CellId, usize>,
    incidences: Vec<Incidence>,
    by_coface: HashMap<CellId, Vec<usize>>,
    endpoints: HashMap<CellId, (CellId, CellId)>,
}

fn edge_endpoints(desc: &ComplexDescription, report: &mut ValidationReport) -> HashMap<CellId, (CellId, CellId)> {
    let dims: HashMap<CellId, &CellSpec> = desc.cells.iter().map(|c| (c.id, c)).collect();
    let mut out = HashMap::new();
    for cell in desc.cells.iter().filter(|c| c.dim == 1) {
        let incs: Vec<&IncidenceSpec> = desc.incidences.iter().filter(|i| i.coface == cell.id).collect();
        let tail = incs.iter().find(|i| i.coeff == -1 && i.path.is_empty());
        let head = incs.iter().find(|i| i.coeff == 1 && i.path == [Step::fwd(cell.id)]);
        match (incs.len(), tail, head) {
            (2, Some(t), Some(h)) => {
                if t.face != cell.anchor {
                    report.push(ViolationKind::BadEdge, vec![cell.id], format!("tail of edge {} must be its anchor", cell.id));
                }
                if dims.get(&h.face).is_some_and(|c| c.dim == 0) {
                    out.insert(cell.id, (t.face, h.face));
                }
            }
            _ => report.push(
                ViolationKind::BadEdge,
                vec![cell.id],
                format!("edge {} needs exactly the incidences (tail, -1, []) and (head, +1, [edge])", cell.id),
            ),
        }
    }
    out
}

fn walk(endpoints: &HashMap<CellId, (CellId, CellId)>, start: CellId, steps: &[Step]) -> std::result::Result<CellId, String> {
    let mut at = start;
    for s in steps {
        let &(t, h) = endpoints.get(&s.edge).ok_or_else(|| format!("{} is not an edge", s.edge))?;
        let (from, to) = match s.dir {
            1 => (t, h),
            -1 => (h, t),
            d => return Err(format!("direction {d} is not +1/-1")),
        };
        if from != at {
            return Err(format!("step along {} starts at {} but walk is at {}", s.edge, from, at));
        }
        at = to;
    }
    Ok(at)
}

/// Checks every structural invariant and lists each violation.
pub fn validate(desc: &ComplexDescription) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut cells: HashMap<CellId, &CellSpec> = HashMap::new();
    for c in &desc.cells {
        if cells.insert(c.id, c).is_some() {
            report.push(ViolationKind::DuplicateCell, vec![c.id], format!("cell id {} appears twice", c.id));
        }
    }
    for c in &desc.cells {
        match cells.get(&c.anchor) {
            None => report.push(ViolationKind::BadAnchor, vec![c.id], format!("anchor {} of {} does not exist", c.anchor, c.id)),
            Some(a) if a.dim != 0 => report.push(ViolationKind::BadAnchor, vec![c.id], format!("anchor of {} is not a vertex", c.id)),
            Some(_) if c.dim == 0 && c.anchor != c.id => {
                report.push(ViolationKind::BadAnchor, vec![c.id], format!("vertex {} must anchor itself", c.id))
            }
            _ => {}
        }
    }
    match cells.get(&desc.base_vertex) {
        Some(c) if c.dim == 0 => {}
        _ => report.push(ViolationKind::BadBaseVertex, vec![desc.base_vertex], "base vertex must be an existing 0-cell"),
    }
    let mut incidences_ok = true;
    for inc in &desc.incidences {
        let (Some(co), Some(fa)) = (cells.get(&inc.coface), cells.get(&inc.face)) else {
            report.push(ViolationKind::UnknownCell, vec![inc.coface, inc.face], "incidence refers to an unknown cell");
            incidences_ok = false;
            continue;
        };
        if co.dim != fa.dim + 1 {
            report.push(
                ViolationKind::BadIncidence,
                vec![inc.coface, inc.face],
                format!("incidence {} -> {} does not lower dimension by one", inc.coface, inc.face),
            );
            incidences_ok = false;
        }
        if inc.coeff == 0 {
            report.push(ViolationKind::BadIncidence, vec![inc.coface, inc.face], "incidence coefficient is zero");
        }
    }
    let endpoints = edge_endpoints(desc, &mut report);
    for inc in &desc.incidences {
        let (Some(co), Some(fa)) = (cells.get(&inc.coface), cells.get(&inc.face)) else { continue };
        match walk(&endpoints, co.anchor, &inc.path) {
            Ok(end) if end == fa.anchor => {}
            Ok(end) => report.push(
                ViolationKind::BadConnector,
                vec![inc.coface, inc.face],
                format!("connector {} -> {} ends at {} instead of {}", inc.coface, inc.face, end, fa.anchor),
            ),
            Err(e) => report.push(ViolationKind::BadConnector, vec![inc.coface, inc.face], e),
        }
    }
    if incidences_ok {
        // integer d∘d over all pairs two dimensions apart
        let mut first: BTreeMap<CellId, BTreeMap<CellId, i64>> = BTreeMap::new();
        for inc in &desc.incidences {
            *first.entry(inc.coface).or_default().entry(inc.face).or_insert(0) += inc.coeff;
        }
        for (&sigma, faces) in &first {
            let mut total: BTreeMap<CellId, i64> = BTreeMap::new();
            for (&tau, &c) in faces {
                if let Some(ff) = first.get(&tau) {
                    for (&nu, &c2) in ff {
                        *total.entry(nu).or_insert(0) += c * c2;
                    }
                }
            }
            for (nu, v) in total {
                if v != 0 {
                    report.push(
                        ViolationKind::BoundaryNotNilpotent,
                        vec![sigma, nu],
                        format!("boundary of boundary of {} has coefficient {} on {}", sigma, v, nu),
                    );
                }
            }
        }
    }
    // connectivity of the 1-skeleton
    let vertices: BTreeSet<CellId> = desc.cells.iter().filter(|c| c.dim == 0).map(|c| c.id).collect();
    if let Some(&root) = vertices.get(&desc.base_vertex).or(vertices.iter().next()) {
        let mut adj: HashMap<CellId, Vec<CellId>> = HashMap::new();
        for &(t, h) in endpoints.values() {
            adj.entry(t).or_default().push(h);
            adj.entry(h).or_default().push(t);
        }
        let mut seen = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in adj.get(&v).into_iter().flatten() {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        let missing: Vec<CellId> = vertices.difference(&seen).copied().collect();
        if !missing.is_empty() {
            report.push(ViolationKind::Disconnected, missing, "1-skeleton is disconnected");
        }
    }
    report
}

impl Complex {
    pub fn from_description(desc: &ComplexDescription) -> Result<Self> {
        let report = validate(desc);
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidComplex(format!("{} ({} violations)", v.message, report.violations.len())));
        }
        let mut dummy = ValidationReport::default();
        let endpoints = edge_endpoints(desc, &mut dummy);
        let cells: BTreeMap<CellId, CellSpec> = desc.cells.iter().map(|c| (c.id, c.clone())).collect();
        let top = cells.values().map(|c| c.dim).max().unwrap_or(0);
        let mut by_dim = vec![Vec::new(); top + 1];
        for c in cells.values() {
            by_dim[c.dim].push(c.id);
        }
        let position = by_dim.iter().flat_map(|ids| ids.iter().enumerate().map(|(i, &id)| (id, i))).collect();
        let mut incidences = Vec::with_capacity(desc.incidences.len());
        let mut by_coface: HashMap<CellId, Vec<usize>> = HashMap::new();
        for inc in &desc.incidences {
            let start = cells[&inc.coface].anchor;
            let end = cells[&inc.face].anchor;
            by_coface.entry(inc.coface).or_default().push(incidences.len());
            incidences.push(Incidence { coface: inc.coface, face: inc.face, coeff: inc.coeff, path: EdgePath { start, end, steps: inc.path.clone() } });
        }
        Ok(Complex { name: desc.name.clone(), base: desc.base_vertex, cells, by_dim, position, incidences, by_coface, endpoints })
    }

    pub fn to_description(&self) -> ComplexDescription {
        ComplexDescription {
            name: self.name.clone(),
            base_vertex: self.base,
            cells: self.cells.values().cloned().collect(),
            incidences: self
                .incidences
                .iter()
                .map(|i| IncidenceSpec { coface: i.coface, face: i.face, coeff: i.coeff, path: i.path.steps.clone() })
                .collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base_vertex(&self) -> CellId {
        self.base
    }

    pub fn dimension(&self) -> usize {
        self.by_dim.len() - 1
    }

    pub fn cell(&self, id: CellId) -> Result<&CellSpec> {
        self.cells.get(&id).ok_or(Error::UnknownCell(id))
    }

    pub fn cells(&self) -> impl Iterator<Item = &CellSpec> {
        self.cells.values()
    }

    pub fn contains(&self, id: CellId) -> bool {
        self.cells.contains_key(&id)
    }

    pub fn dim_of(&self, id: CellId) -> usize {
        self.cells[&id].dim
    }

    pub fn anchor(&self, id: CellId) -> CellId {
        self.cells[&id].anchor
    }

    /// Cells of dimension `d`, sorted by id. This order fixes chain bases.
    pub fn cells_of_dim(&self, d: usize) -> &[CellId] {
        self.by_dim.get(d).map_or(&[], Vec::as_slice)
    }

    pub fn count(&self, d: usize) -> usize {
        self.cells_of_dim(d).len()
    }

    /// Index of a cell within its dimension.
    pub fn position(&self, id: CellId) -> usize {
        self.position[&id]
    }

    pub fn incidences(&self) -> &[Incidence] {
        &self.incidences
    }

    /// Indices into [`Complex::incidences`] of the incidences out of `coface`.
    pub fn incidence_ids(&self, coface: CellId) -> &[usize] {
        self.by_coface.get(&coface).map_or(&[], Vec::as_slice)
    }

    pub fn incidences_of(&self, coface: CellId) -> impl Iterator<Item = &Incidence> {
        self.by_coface.get(&coface).into_iter().flatten().map(|&i| &self.incidences[i])
    }

    pub fn edge_endpoints(&self, edge: CellId) -> Result<(CellId, CellId)> {
        self.endpoints.get(&edge).copied().ok_or(Error::NotAnEdge(edge))
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.by_dim.iter().enumerate().map(|(d, c)| if d % 2 == 0 { c.len() as i64 } else { -(c.len() as i64) }).sum()
    }

    /// Builds a path from `start` along `steps`, checking it is a walk.
    pub fn path(&self, start: CellId, steps: Vec<Step>) -> Result<EdgePath> {
        let end = walk(&self.endpoints, start, &steps).map_err(Error::InvalidPath)?;
        Ok(EdgePath { start, end, steps })
    }

    pub fn check_path(&self, p: &EdgePath) -> Result<()> {
        if !self.contains(p.start) || self.dim_of(p.start) != 0 {
            return Err(Error::InvalidPath(format!("start {} is not a vertex", p.start)));
        }
        let end = walk(&self.endpoints, p.start, &p.steps).map_err(Error::InvalidPath)?;
        if end != p.end {
            return Err(Error::InvalidPath(format!("walk ends at {} but path claims {}", end, p.end)));
        }
        Ok(())
    }

    /// Integer boundary matrix `C_d -> C_{d-1}` (rows: (d-1)-cells), connector paths ignored.
    pub fn boundary_matrix(&self, d: usize) -> IntMat {
        let rows = if d == 0 { 0 } else { self.count(d - 1) };
        let mut m = IntMat::zeros(rows, self.count(d));
        if d == 0 {
            return m;
        }
        for inc in self.incidences.iter().filter(|i| self.dim_of(i.coface) == d) {
            let (r, c) = (self.position(inc.face), self.position(inc.coface));
            m.set(r, c, m.get(r, c) + inc.coeff as i128);
        }
        m
    }

    pub fn integral_homology(&self, d: usize) -> Result<Homology> {
        if d > self.dimension() {
            return Ok(Homology { betti: 0, torsion: vec![] });
        }
        let rank_out = smith_normal_form(&self.boundary_matrix(d))?.rank;
        let incoming = smith_normal_form(&self.boundary_matrix(d + 1))?;
        let torsion = incoming.diag.iter().filter(|&&v| v > 1).map(|&v| v as u64).collect();
        Ok(Homology { betti: self.count(d) - rank_out - incoming.rank, torsion })
    }

    /// Spanning tree of the 1-skeleton grown from the base vertex, always
    /// adding the lowest-id edge that reaches a new vertex. Returns, for each
    /// vertex, the tree path from the base vertex.
    pub fn spanning_tree_paths(&self) -> BTreeMap<CellId, EdgePath> {
        let mut paths = BTreeMap::from([(self.base, EdgePath::empty(self.base))]);
        loop {
            let next = self.cells_of_dim(1).iter().find_map(|&e| {
                let (t, h) = self.endpoints[&e];
                match (paths.contains_key(&t), paths.contains_key(&h)) {
                    (true, false) => Some((e, t, h, Step::fwd(e))),
                    (false, true) => Some((e, h, t, Step::rev(e))),
                    _ => None,
                }
            });
            let Some((_, from, to, step)) = next else { break };
            let p = paths[&from].then(&EdgePath { start: from, end: to, steps: vec![step] });
            paths.insert(to, p);
        }
        paths
    }

    pub fn tree_edges(&self) -> BTreeSet<CellId> {
        self.spanning_tree_paths().values().filter_map(|p| p.steps.last().map(|s| s.edge)).collect()
    }
}

/// Builds a simplicial complex from its facets. Vertices are the given labels;
/// every simplex is oriented by increasing label and anchored at its lowest
/// vertex. Cell ids run through vertices, then edges, then triangles, ...
pub fn simplicial(name: &str, facets: &[Vec<u32>]) -> Result<Complex> {
    let mut simplices: BTreeSet<Vec<u32>> = BTreeSet::new();
    for f in facets {
        let mut f = f.clone();
        f.sort_unstable();
        f.dedup();
        let n = f.len();
        for mask in 1u32..(1 << n) {
            simplices.insert((0..n).filter(|i| mask & (1 << i) != 0).map(|i| f[i]).collect());
        }
    }
    let mut ordered: Vec<Vec<u32>> = simplices.into_iter().collect();
    ordered.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    let ids: HashMap<Vec<u32>, CellId> = ordered.iter().enumerate().map(|(i, s)| (s.clone(), CellId(i as u32))).collect();
    let vid = |v: u32| ids[&vec![v]];
    let mut cells = Vec::new();
    let mut incidences = Vec::new();
    for s in &ordered {
        let id = ids[s];
        cells.push(CellSpec { id, dim: s.len() - 1, anchor: vid(s[0]) });
        if s.len() == 1 {
            continue;
        }
        for i in 0..s.len() {
            let face: Vec<u32> = s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
            let path = if i == 0 { vec![Step::fwd(ids[&vec![s[0], s[1]]])] } else { vec![] };
            incidences.push(IncidenceSpec { coface: id, face: ids[&face], coeff: if i % 2 == 0 { 1 } else { -1 }, path });
        }
    }
    let base = ordered.first().map(|s| ids[s]).ok_or_else(|| Error::InvalidComplex("no simplices".into()))?;
    Complex::from_description(&ComplexDescription { name: name.into(), base_vertex: base, cells, incidences })
}

/// A word in the edge loops of a one-vertex complex: `(edge index, ±1)`.
pub type Word = Vec<(usize, i8)>;

/// One-vertex CW complex. Vertex id 0, edges `1..=n_edges`, 2-cells follow,
/// then 3-cells. 2-cells attach along words; their incidences are the Fox
/// derivatives of the word. Each 3-cell lists `(2-cell index, coeff, word)`
/// incidences explicitly, the word being the connector loop.
pub fn one_vertex(name: &str, n_edges: usize, faces: &[Word], solids: &[Vec<(usize, i64, Word)>]) -> Result<Complex> {
    let v = CellId(0);
    let edge = |i: usize| CellId(1 + i as u32);
    let face = |i: usize| CellId((1 + n_edges + i) as u32);
    let solid = |i: usize| CellId((1 + n_edges + faces.len() + i) as u32);
    let steps = |w: &Word| -> Vec<Step> { w.iter().map(|&(e, d)| Step { edge: edge(e), dir: d }).collect() };
    let mut cells = vec![CellSpec { id: v, dim: 0, anchor: v }];
    let mut incidences = Vec::new();
    for i in 0..n_edges {
        cells.push(CellSpec { id: edge(i), dim: 1, anchor: v });
        incidences.push(IncidenceSpec { coface: edge(i), face: v, coeff: -1, path: vec![] });
        incidences.push(IncidenceSpec { coface: edge(i), face: v, coeff: 1, path: vec![Step::fwd(edge(i))] });
    }
    for (f, word) in faces.iter().enumerate() {
        cells.push(CellSpec { id: face(f), dim: 2, anchor: v });
        let mut prefix: Vec<Step> = Vec::new();
        for &(e, d) in word {
            if d > 0 {
                incidences.push(IncidenceSpec { coface: face(f), face: edge(e), coeff: 1, path: prefix.clone() });
                prefix.push(Step::fwd(edge(e)));
            } else {
                prefix.push(Step::rev(edge(e)));
                incidences.push(IncidenceSpec { coface: face(f), face: edge(e), coeff: -1, path: prefix.clone() });
            }
        }
    }
    for (s, incs) in solids.iter().enumerate() {
        cells.push(CellSpec { id: solid(s), dim: 3, anchor: v });
        for (f, c, w) in incs {
            incidences.push(IncidenceSpec { coface: solid(s), face: face(*f), coeff: *c, path: steps(w) });
        }
    }
    Complex::from_description(&ComplexDescription { name: name.into(), base_vertex: v, cells, incidences })
}
