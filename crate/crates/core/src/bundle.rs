//! Flat bundles presented by invertible matrices on oriented edges.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::complex::{CellId, Complex, EdgePath};
use crate::error::{Error, Result};
use crate::homology::H1Basis;
use crate::matrix::{Mat, QMat};
use crate::scalar::{rational_from_f64, Scalar};

/// Relative tolerance for flatness of floating bundles.
pub const EPS_FLAT: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct FlatBundle<F: Scalar> {
    rank: usize,
    matrices: BTreeMap<CellId, Mat<F>>,
    inverses: BTreeMap<CellId, Mat<F>>,
}

pub type QBundle = FlatBundle<crate::scalar::Rational>;
pub type FBundle = FlatBundle<f64>;

impl<F: Scalar> FlatBundle<F> {
    /// Assigns `matrices[e]` to each edge `e` of `complex`, checking shapes and
    /// invertibility. Flatness is checked separately by [`check_flatness`].
    pub fn new(complex: &Complex, rank: usize, matrices: BTreeMap<CellId, Mat<F>>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::RankMismatch { rows: 0, cols: 0, expected: 1 });
        }
        for &e in matrices.keys() {
            if !complex.contains(e) || complex.dim_of(e) != 1 {
                return Err(Error::NotAnEdge(e));
            }
        }
        let mut inverses = BTreeMap::new();
        for &e in complex.cells_of_dim(1) {
            let m = matrices.get(&e).ok_or(Error::MissingEdgeMatrix(e))?;
            if m.nrows() != rank || m.ncols() != rank {
                return Err(Error::RankMismatch { rows: m.nrows(), cols: m.ncols(), expected: rank });
            }
            inverses.insert(e, m.inverse().ok_or(Error::SingularMatrix(e))?);
        }
        Ok(FlatBundle { rank, matrices, inverses })
    }

    pub fn trivial(complex: &Complex, rank: usize) -> Self {
        let m: BTreeMap<_, _> = complex.cells_of_dim(1).iter().map(|&e| (e, Mat::identity(rank))).collect();
        FlatBundle { rank, inverses: m.clone(), matrices: m }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn edge_matrix(&self, e: CellId) -> Result<&Mat<F>> {
        self.matrices.get(&e).ok_or(Error::MissingEdgeMatrix(e))
    }

    pub fn edge_matrices(&self) -> &BTreeMap<CellId, Mat<F>> {
        &self.matrices
    }

    /// Ordered product of edge matrices along the path; reversed steps use inverses.
    pub fn transport(&self, path: &EdgePath) -> Result<Mat<F>> {
        let mut t: Option<Mat<F>> = None;
        for s in &path.steps {
            let m = if s.dir > 0 { self.matrices.get(&s.edge) } else { self.inverses.get(&s.edge) };
            let m = m.ok_or(Error::MissingEdgeMatrix(s.edge))?;
            t = Some(match t {
                None => m.clone(),
                Some(t) => &t * m,
            });
        }
        Ok(t.unwrap_or_else(|| Mat::identity(self.rank)))
    }

    /// `log |det T(loop)|`.
    pub fn kt_evaluate(&self, path: &EdgePath) -> Result<f64> {
        if !path.is_closed() {
            return Err(Error::OpenPath(path.start));
        }
        Ok(self.transport(path)?.det().magnitude().ln())
    }

    /// Gauge transform `A_e ↦ g(tail) A_e g(head)⁻¹`. Missing vertices use the identity.
    pub fn gauge(&self, complex: &Complex, g: &BTreeMap<CellId, Mat<F>>) -> Result<Self> {
        let id = Mat::identity(self.rank);
        let mut out = BTreeMap::new();
        for (&e, a) in &self.matrices {
            let (t, h) = complex.edge_endpoints(e)?;
            let gh = g.get(&h).unwrap_or(&id).inverse().ok_or(Error::SingularMatrix(h))?;
            out.insert(e, &(g.get(&t).unwrap_or(&id) * a) * &gh);
        }
        FlatBundle::new(complex, self.rank, out)
    }

    /// Gauge making every spanning-tree edge the identity.
    pub fn gauge_normalize(&self, complex: &Complex) -> Result<Self> {
        let g = complex
            .spanning_tree_paths()
            .into_iter()
            .map(|(v, p)| Ok((v, self.transport(&p)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        self.gauge(complex, &g)
    }

    /// Expresses the bundle in the fiber basis `e' = e·S` at every point
    /// (`A ↦ S⁻¹ A S`).
    pub fn change_basis(&self, s: &Mat<F>) -> Result<Self> {
        if s.nrows() != self.rank || s.ncols() != self.rank {
            return Err(Error::RankMismatch { rows: s.nrows(), cols: s.ncols(), expected: self.rank });
        }
        let s_inv = s.inverse().ok_or_else(|| Error::NotFlat("basis change is singular".into()))?;
        let conj = |a: &Mat<F>| &(&s_inv * a) * s;
        Ok(FlatBundle {
            rank: self.rank,
            matrices: self.matrices.iter().map(|(&e, a)| (e, conj(a))).collect(),
            inverses: self.inverses.iter().map(|(&e, a)| (e, conj(a))).collect(),
        })
    }

    pub fn to_f64(&self) -> FBundle {
        FlatBundle {
            rank: self.rank,
            matrices: self.matrices.iter().map(|(&e, m)| (e, m.to_f64())).collect(),
            inverses: self.inverses.iter().map(|(&e, m)| (e, m.to_f64())).collect(),
        }
    }
}

impl FBundle {
    /// Exact version of a floating bundle; fails unless all entries are finite.
    pub fn to_rational(&self, complex: &Complex) -> Result<QBundle> {
        let mut out = BTreeMap::new();
        for (&e, m) in &self.matrices {
            let data = m
                .row_major()
                .iter()
                .map(|&x| rational_from_f64(x).ok_or_else(|| Error::NotExact(x.to_string())))
                .collect::<Result<Vec<_>>>()?;
            out.insert(e, QMat::from_row_major(self.rank, self.rank, data));
        }
        FlatBundle::new(complex, self.rank, out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellDeviation {
    pub cell: CellId,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub exact: bool,
    pub tolerance: f64,
    pub deviations: Vec<CellDeviation>,
    pub passed: bool,
}

impl FlatnessReport {
    pub fn failing_cells(&self) -> Vec<CellId> {
        self.deviations.iter().filter(|d| d.deviation > self.tolerance).map(|d| d.cell).collect()
    }

    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().map(|d| d.deviation).fold(0.0, f64::max)
    }
}

/// Twisted ∂∂ around each 2-cell. For a 2-cell attached along a word `w`,
/// the composite of incidence transports is `T(w) − I` up to a transport,
/// so it vanishes iff the holonomy around the cell is trivial. The deviation
/// is the largest entry of that composite (relative to its scale in floating mode).
pub fn check_flatness<F: Scalar>(complex: &Complex, bundle: &FlatBundle<F>) -> Result<FlatnessReport> {
    for &e in complex.cells_of_dim(1) {
        bundle.edge_matrix(e)?;
    }
    let k = bundle.rank();
    let mut deviations = Vec::new();
    let mut passed = true;
    for &sigma in complex.cells_of_dim(2) {
        let mut blocks: BTreeMap<CellId, Mat<F>> = BTreeMap::new();
        let mut scale = 1.0f64;
        for i2 in complex.incidences_of(sigma) {
            for i1 in complex.incidences_of(i2.face) {
                let t = bundle.transport(&i2.path.then(&i1.path))?;
                scale = scale.max(t.max_abs());
                let coeff = F::from_i64(i2.coeff * i1.coeff);
                blocks.entry(i1.face).or_insert_with(|| Mat::zeros(k, k)).add_block(0, 0, &t, &coeff);
            }
        }
        let raw = blocks.values().map(Mat::max_abs).fold(0.0, f64::max);
        let deviation = if F::EXACT { raw } else { raw / scale };
        let ok = if F::EXACT { blocks.values().all(Mat::is_zero) } else { deviation <= EPS_FLAT };
        passed &= ok;
        deviations.push(CellDeviation { cell: sigma, deviation });
    }
    Ok(FlatnessReport { exact: F::EXACT, tolerance: if F::EXACT { 0.0 } else { EPS_FLAT }, deviations, passed })
}

pub fn require_flat<F: Scalar>(complex: &Complex, bundle: &FlatBundle<F>) -> Result<()> {
    let r = check_flatness(complex, bundle)?;
    if r.passed {
        Ok(())
    } else {
        let cells: Vec<String> = r.failing_cells().iter().map(ToString::to_string).collect();
        Err(Error::NotFlat(format!("holonomy around {} is not the identity", cells.join(", "))))
    }
}

/// Kamber–Tondeur class: `log|det ρ|` on each SNF generator of H₁.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KtClass {
    pub moduli: Vec<u64>,
    pub values: Vec<f64>,
}

impl KtClass {
    pub fn evaluate(&self, class: &crate::homology::H1Class) -> f64 {
        class.coords.iter().zip(&self.values).zip(&self.moduli).map(|((&c, &v), &m)| if m > 0 { 0.0 } else { c as f64 * v }).sum()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.abs() <= tol)
    }
}

pub fn kt_class<F: Scalar>(complex: &Complex, bundle: &FlatBundle<F>) -> Result<KtClass> {
    require_flat(complex, bundle)?;
    let h1 = H1Basis::new(complex)?;
    let values = (0..h1.moduli().len())
        .map(|i| bundle.kt_evaluate(&h1.generator_loop(complex, i)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(KtClass { moduli: h1.moduli().to_vec(), values })
}
