//! Twisted cochain complexes, combinatorial Laplacians, combinatorial
//! torsion and the Farber–Turaev scalar product.
//!
//! Convention: `δ_d : C^d → C^{d+1}` has block `(σ, τ)` equal to
//! `Σ coeff · T(leg_σ · connector · leg_τ⁻¹)`. Scalar products on determinant
//! lines are stored as the squared norm of a reference element.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::bundle::{require_flat, FlatBundle};
use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::euler::{act_in, H1Basis, H1Class, Spray};
use crate::matrix::{FMat, Mat};
use crate::scalar::{Rational, Scalar};

/// Relative eigenvalue cutoff for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// `ft(act(u, α)) / ft(α) = |det ρ(u)|^S_EXPONENT`, pinned by the circle with
/// `ρ(e) = [2]` (see the `sign_exponent_is_pinned` test).
pub const S_EXPONENT: i32 = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct TwistedComplex<F: Scalar> {
    rank: usize,
    counts: Vec<usize>,
    delta: Vec<Mat<F>>,
}

impl<F: Scalar> TwistedComplex<F> {
    pub fn from_coboundaries(rank: usize, counts: Vec<usize>, delta: Vec<Mat<F>>) -> Self {
        assert_eq!(delta.len() + 1, counts.len().max(1));
        TwistedComplex { rank, counts, delta }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn top(&self) -> usize {
        self.counts.len() - 1
    }

    /// Dimension of `C^d`, i.e. rank × number of d-cells.
    pub fn dim(&self, d: usize) -> usize {
        self.counts.get(d).map_or(0, |c| c * self.rank)
    }

    /// `δ_d : C^d → C^{d+1}`; zero maps outside the range.
    pub fn coboundary(&self, d: usize) -> Mat<F> {
        self.delta.get(d).cloned().unwrap_or_else(|| Mat::zeros(self.dim(d + 1), self.dim(d)))
    }

    /// Incoming map into `C^d`.
    pub fn incoming(&self, d: usize) -> Mat<F> {
        if d == 0 {
            Mat::zeros(self.dim(0), 0)
        } else {
            self.coboundary(d - 1)
        }
    }

    /// Largest entry of any `δ_{d+1} δ_d`.
    pub fn composition_defect(&self) -> f64 {
        self.delta.windows(2).map(|w| (&w[1] * &w[0]).max_abs()).fold(0.0, f64::max)
    }

    pub fn is_cochain_complex(&self) -> bool {
        if F::EXACT {
            self.delta.windows(2).all(|w| (&w[1] * &w[0]).is_zero())
        } else {
            let scale = self.delta.iter().map(Mat::max_abs).fold(1.0, f64::max);
            self.composition_defect() <= crate::bundle::EPS_FLAT * scale * scale
        }
    }

    /// `Δ_d = δ_dᵀ δ_d + δ_{d−1} δ_{d−1}ᵀ`.
    pub fn laplacian(&self, d: usize) -> Mat<F> {
        let up = self.coboundary(d);
        let down = self.incoming(d);
        &(&up.transpose() * &up) + &(&down * &down.transpose())
    }

    pub fn laplacians(&self) -> Vec<Mat<F>> {
        (0..=self.top()).map(|d| self.laplacian(d)).collect()
    }

    pub fn to_f64(&self) -> TwistedComplex<f64> {
        TwistedComplex { rank: self.rank, counts: self.counts.clone(), delta: self.delta.iter().map(Mat::to_f64).collect() }
    }
}

/// Builds the twisted cochain complex from the bundle, transporting the fiber
/// basis at the base vertex along each leg of the spray.
pub fn assemble<F: Scalar>(complex: &Complex, bundle: &FlatBundle<F>, spray: &Spray) -> Result<TwistedComplex<F>> {
    require_flat(complex, bundle)?;
    spray.validate(complex)?;
    let k = bundle.rank();
    let mut legs = std::collections::HashMap::new();
    for c in complex.cells() {
        let t = bundle.transport(spray.leg(c.id)?)?;
        let inv = t.inverse().ok_or_else(|| Error::InvalidSpray("leg transport is singular".into()))?;
        legs.insert(c.id, (t, inv));
    }
    let top = complex.dimension();
    let counts: Vec<usize> = (0..=top).map(|d| complex.count(d)).collect();
    let mut delta = Vec::with_capacity(top);
    for d in 0..top {
        let mut m = Mat::zeros(k * counts[d + 1], k * counts[d]);
        for &sigma in complex.cells_of_dim(d + 1) {
            let r0 = k * complex.position(sigma);
            for inc in complex.incidences_of(sigma) {
                let block = &(&legs[&sigma].0 * &bundle.transport(&inc.path)?) * &legs[&inc.face].1;
                m.add_block(r0, k * complex.position(inc.face), &block, &F::from_i64(inc.coeff));
            }
        }
        delta.push(m);
    }
    Ok(TwistedComplex { rank: k, counts, delta })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub degree: usize,
    pub dimension: usize,
    pub zero_modes: usize,
    pub lambda_max: f64,
    pub lambda_min_nonzero: Option<f64>,
    pub log_det_prime: f64,
}

fn check_symmetric(m: &FMat) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Asymmetric);
    }
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::Asymmetric);
            }
        }
    }
    Ok(())
}

fn eigen(m: &FMat) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    check_symmetric(m)?;
    Ok(SymmetricEigen::new(m.to_dmatrix()))
}

fn cutoff_of(eigs: &[f64], rank_tol: f64) -> f64 {
    rank_tol * eigs.iter().copied().fold(0.0, f64::max)
}

fn guard(eigs: &[f64], cutoff: f64) -> Result<()> {
    if let Some(&e) = eigs.iter().find(|&&e| e >= 0.1 * cutoff && e <= 10.0 * cutoff) {
        return Err(Error::IllConditioned { eigenvalue: e, cutoff });
    }
    Ok(())
}

/// Product of eigenvalues above `rank_tol · λ_max` (1 for the zero matrix).
pub fn det_prime(m: &FMat, rank_tol: f64) -> Result<f64> {
    let e = eigen(m)?;
    let eigs: Vec<f64> = e.eigenvalues.iter().copied().collect();
    let cutoff = cutoff_of(&eigs, rank_tol);
    Ok(eigs.iter().filter(|&&x| x > cutoff).map(|x| x.ln()).sum::<f64>().exp())
}

/// Eigenvalue summary with the guard-band check on the rank decision.
pub fn spectrum(m: &FMat, degree: usize, rank_tol: f64) -> Result<Spectrum> {
    let e = eigen(m)?;
    let eigs: Vec<f64> = e.eigenvalues.iter().copied().collect();
    let cutoff = cutoff_of(&eigs, rank_tol);
    let lambda_max = eigs.iter().copied().fold(0.0, f64::max);
    if lambda_max > 0.0 {
        guard(&eigs, cutoff)?;
    }
    let nonzero: Vec<f64> = eigs.iter().copied().filter(|&x| lambda_max > 0.0 && x > cutoff).collect();
    Ok(Spectrum {
        degree,
        dimension: eigs.len(),
        zero_modes: eigs.len() - nonzero.len(),
        lambda_max,
        lambda_min_nonzero: nonzero.iter().copied().reduce(f64::min),
        log_det_prime: nonzero.iter().map(|x| x.ln()).sum(),
    })
}

/// Deterministic orthonormal basis (columns) of `ker Δ`: projector onto the
/// kernel, greedy column pivoting on norm, Gram–Schmidt in pivot order.
pub fn harmonic_basis(lap: &FMat, rank_tol: f64) -> Result<FMat> {
    let e = eigen(lap)?;
    let eigs: Vec<f64> = e.eigenvalues.iter().copied().collect();
    let n = eigs.len();
    let lambda_max = eigs.iter().copied().fold(0.0, f64::max);
    let cutoff = cutoff_of(&eigs, rank_tol);
    if lambda_max > 0.0 {
        guard(&eigs, cutoff)?;
    }
    let kernel: Vec<usize> = (0..n).filter(|&i| lambda_max == 0.0 || eigs[i] <= cutoff).collect();
    let v = DMatrix::from_fn(n, kernel.len(), |i, j| e.eigenvectors[(i, kernel[j])]);
    let mut cols: Vec<Vec<f64>> = {
        let p = &v * v.transpose();
        (0..n).map(|j| p.column(j).iter().copied().collect()).collect()
    };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(kernel.len());
    for _ in 0..kernel.len() {
        let norm = |c: &Vec<f64>| c.iter().map(|x| x * x).sum::<f64>();
        let (best, _) = cols.iter().enumerate().fold((0, -1.0), |acc, (j, c)| if norm(c) > acc.1 + 1e-12 { (j, norm(c)) } else { acc });
        let len = norm(&cols[best]).sqrt();
        let q: Vec<f64> = cols[best].iter().map(|x| x / len).collect();
        for c in cols.iter_mut() {
            let dot: f64 = c.iter().zip(&q).map(|(a, b)| a * b).sum();
            c.iter_mut().zip(&q).for_each(|(a, b)| *a -= dot * b);
        }
        basis.push(q);
    }
    Ok(FMat::from_fn(n, basis.len(), |i, j| basis[j][i]))
}

/// Combinatorial torsion by the Laplacian route:
/// `log T = ½ Σ_d (−1)^{d+1} d log det′Δ_d`.
pub fn t_comb(tcc: &TwistedComplex<f64>) -> Result<(f64, Vec<Spectrum>)> {
    let spectra = tcc.laplacians().iter().enumerate().map(|(d, l)| spectrum(l, d, RANK_TOL)).collect::<Result<Vec<_>>>()?;
    let log_t: f64 = spectra.iter().map(|s| if s.degree % 2 == 1 { 1.0 } else { -1.0 } * s.degree as f64 * s.log_det_prime).sum::<f64>() / 2.0;
    Ok((log_t.exp(), spectra))
}

/// `det′(MᵀM)` restricted to the row space of `M`.
fn det_prime_gram<F: Scalar>(m: &Mat<F>, tol: f64) -> F {
    let r = m.row_space_basis(tol);
    if r.nrows() == 0 {
        return F::from_i64(1);
    }
    let mtm = &m.transpose() * m;
    (&(&r * &mtm) * &r.transpose()).det() / (&r * &r.transpose()).det()
}

/// `T²` by Gaussian elimination: `Π_d det′(δ_dᵀδ_d)^{(−1)^d}`. The pivot
/// tolerance is ignored in exact arithmetic.
pub fn t_comb_squared_elimination<F: Scalar>(tcc: &TwistedComplex<F>, tol: f64) -> F {
    // entries negligible against the whole complex are round-off (e.g. Σ T^j = 0)
    let scale = tcc.delta.iter().map(Mat::max_abs).fold(0.0, f64::max);
    let mut t2 = F::from_i64(1);
    for (d, delta) in tcc.delta.iter().enumerate() {
        let cleaned;
        let delta = if F::EXACT {
            delta
        } else {
            cleaned = Mat::from_fn(delta.nrows(), delta.ncols(), |i, j| if delta[(i, j)].magnitude() <= tol * scale { F::zero() } else { delta[(i, j)].clone() });
            &cleaned
        };
        let a = det_prime_gram(delta, tol);
        t2 = if d % 2 == 0 { t2 * a } else { t2 / a };
    }
    t2
}

pub fn t_comb_squared_exact(tcc: &TwistedComplex<Rational>) -> Rational {
    t_comb_squared_elimination(tcc, 0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetLineMetric {
    /// Squared norm of the reference element.
    pub value: f64,
    pub grading: String,
    pub reference: String,
}

impl DetLineMetric {
    fn new(value: f64, reference: &str) -> Self {
        DetLineMetric { value, grading: "odd degrees dualized".into(), reference: reference.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsionResult {
    pub complex: String,
    pub exact: bool,
    pub rank: usize,
    pub euler_characteristic: i64,
    pub t_comb: f64,
    pub t_comb_squared_exact: Option<String>,
    pub acyclic: bool,
    pub harmonic_dims: Vec<usize>,
    pub harmonic_metric: DetLineMetric,
    pub ft_metric: DetLineMetric,
    pub sign_exponent: i32,
    pub spectra: Vec<Spectrum>,
}

const ORTHONORMAL_REFERENCE: &str = "orthonormal harmonic basis, reference fiber basis orthonormal at base vertex";

/// Orthonormal harmonic bases in every degree.
pub fn harmonic_bases(tcc: &TwistedComplex<f64>) -> Result<Vec<FMat>> {
    tcc.laplacians().iter().map(|l| harmonic_basis(l, RANK_TOL)).collect()
}

/// `Π_d Gram_d^{(−1)^d}` where `Gram_d` is the Gram determinant of the
/// harmonic projections of the reference cocycles in degree d.
pub fn harmonic_value(tcc: &TwistedComplex<f64>, reference: &[FMat]) -> Result<f64> {
    let bases = harmonic_bases(tcc)?;
    let mut log = 0.0;
    for (d, (h, r)) in bases.iter().zip(reference).enumerate() {
        if r.nrows() != h.nrows() || r.ncols() != h.ncols() {
            return Err(Error::RankMismatch { rows: r.nrows(), cols: r.ncols(), expected: h.ncols() });
        }
        if h.ncols() == 0 {
            continue;
        }
        let coords = &h.transpose() * r;
        let g = coords.det().powi(2);
        log += if d % 2 == 0 { g.ln() } else { -g.ln() };
    }
    Ok(log.exp())
}

/// FT scalar product `T^{−2} · Π_d Gram_d^{(−1)^d}` of a reference element.
pub fn ft_value(tcc: &TwistedComplex<f64>, t: f64, reference: &[FMat]) -> Result<f64> {
    Ok(harmonic_value(tcc, reference)? / (t * t))
}

pub fn ft_torsion<F: Scalar>(complex: &Complex, bundle: &FlatBundle<F>, spray: &Spray) -> Result<TorsionResult> {
    let tcc = assemble(complex, bundle, spray)?;
    let ftcc = tcc.to_f64();
    let (t_float, spectra) = t_comb(&ftcc)?;
    let mut t = t_float;
    let mut exact = None;
    if F::EXACT {
        let q = TwistedComplex {
            rank: tcc.rank,
            counts: tcc.counts.clone(),
            delta: tcc.delta.iter().map(|m| m.to_rational().expect("exact scalars are rational")).collect(),
        };
        let t2 = t_comb_squared_exact(&q);
        t = t2.to_f64().sqrt();
        exact = Some(crate::scalar::format_rational(&t2));
    }
    let harmonic_dims: Vec<usize> = spectra.iter().map(|s| s.zero_modes).collect();
    let h = 1.0;
    Ok(TorsionResult {
        complex: complex.name().to_string(),
        exact: F::EXACT,
        rank: bundle.rank(),
        euler_characteristic: complex.euler_characteristic(),
        t_comb: t,
        t_comb_squared_exact: exact,
        acyclic: harmonic_dims.iter().all(|&b| b == 0),
        harmonic_dims,
        harmonic_metric: DetLineMetric::new(h, ORTHONORMAL_REFERENCE),
        ft_metric: DetLineMetric::new(h / (t * t), ORTHONORMAL_REFERENCE),
        sign_exponent: S_EXPONENT,
        spectra,
    })
}

/// Block-diagonal maps `L_d` with `L_σ = T(β_σ) T(α_σ)⁻¹`, so that cochain
/// coordinates in the α-frames become `L y` in the β-frames.
pub fn spray_change_maps<F: Scalar>(complex: &Complex, bundle: &FlatBundle<F>, alpha: &Spray, beta: &Spray) -> Result<Vec<Mat<F>>> {
    let k = bundle.rank();
    (0..=complex.dimension())
        .map(|d| {
            let n = complex.count(d);
            let mut l = Mat::zeros(k * n, k * n);
            for (i, &c) in complex.cells_of_dim(d).iter().enumerate() {
                let ta = bundle.transport(alpha.leg(c)?)?;
                let tb = bundle.transport(beta.leg(c)?)?;
                let block = &tb * &ta.inverse().ok_or_else(|| Error::InvalidSpray("singular leg transport".into()))?;
                l.set_block(k * i, k * i, &block);
            }
            Ok(l)
        })
        .collect()
}

/// `t_a² / t_b²`, by elimination over Q when the scalars are exact.
fn torsion_square_ratio<F: Scalar>(a: &TwistedComplex<F>, b: &TwistedComplex<F>) -> Result<f64> {
    if F::EXACT {
        Ok((t_comb_squared_elimination(a, 0.0) / t_comb_squared_elimination(b, 0.0)).to_f64())
    } else {
        let (ta, _) = t_comb(&a.to_f64())?;
        let (tb, _) = t_comb(&b.to_f64())?;
        Ok((ta / tb).powi(2))
    }
}

/// `ft_b(L h) / ft_a(h)` for the orthonormal harmonic basis `h` of `a`,
/// where `L` maps cochains of `a` to cochains of `b`.
pub fn ft_ratio_along<F: Scalar>(a: &TwistedComplex<F>, b: &TwistedComplex<F>, maps: &[Mat<F>]) -> Result<f64> {
    let t = torsion_square_ratio(a, b)?;
    let (fa, fb) = (a.to_f64(), b.to_f64());
    let h = harmonic_bases(&fa)?;
    if h.iter().all(|m| m.ncols() == 0) {
        return Ok(t);
    }
    let pushed: Vec<FMat> = h.iter().zip(maps).map(|(h, l)| &l.to_f64() * h).collect();
    Ok(t * harmonic_value(&fb, &pushed)? / harmonic_value(&fa, &h)?)
}

/// Ratio of FT values at `act(u, α)` and at `α`.
pub fn euler_action_on_torsion<F: Scalar>(complex: &Complex, bundle: &FlatBundle<F>, alpha: &Spray, u: &H1Class) -> Result<f64> {
    let h1 = H1Basis::new(complex)?;
    let beta = act_in(&h1, complex, u, alpha)?;
    spray_change_ratio(complex, bundle, alpha, &beta)
}

pub fn spray_change_ratio<F: Scalar>(complex: &Complex, bundle: &FlatBundle<F>, alpha: &Spray, beta: &Spray) -> Result<f64> {
    let a = assemble(complex, bundle, alpha)?;
    let b = assemble(complex, bundle, beta)?;
    ft_ratio_along(&a, &b, &spray_change_maps(complex, bundle, alpha, beta)?)
}

/// Ratio of FT values after re-expressing everything in the fiber basis
/// `e·S` at the base vertex.
pub fn base_change_ratio<F: Scalar>(complex: &Complex, bundle: &FlatBundle<F>, spray: &Spray, s: &Mat<F>) -> Result<f64> {
    let changed = bundle.change_basis(s)?;
    let a = assemble(complex, bundle, spray)?;
    let b = assemble(complex, &changed, spray)?;
    let s_inv = s.inverse().ok_or_else(|| Error::NotFlat("basis change is singular".into()))?;
    let k = bundle.rank();
    let maps: Vec<Mat<F>> = (0..=complex.dimension())
        .map(|d| {
            let n = complex.count(d);
            let mut l = Mat::zeros(k * n, k * n);
            for i in 0..n {
                l.set_block(k * i, k * i, &s_inv);
            }
            l
        })
        .collect();
    ft_ratio_along(&a, &b, &maps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::QBundle;
    use crate::matrix::QMat;
    use crate::complex::{one_vertex, simplicial, CellId};
    use crate::euler::canonical_spray;
    use crate::scalar::rational;
    use std::collections::BTreeMap;

    fn circle_bundle(a: i64) -> (Complex, QBundle) {
        let c = one_vertex("circle", 1, &[], &[]).unwrap();
        let b = FlatBundle::new(&c, 1, BTreeMap::from([(CellId(1), QMat::from_i64_rows(&[&[a]]))])).unwrap();
        (c, b)
    }

    #[test]
    fn circle_coboundary_is_a_minus_one() {
        let (c, b) = circle_bundle(3);
        let t = assemble(&c, &b, &canonical_spray(&c)).unwrap();
        assert_eq!(t.coboundary(0), QMat::from_i64_rows(&[&[2]]));
        let l = t.to_f64().laplacians();
        assert_eq!(l[0][(0, 0)], 4.0);
        assert_eq!(l[1][(0, 0)], 4.0);
    }

    #[test]
    fn circle_torsion_and_ft_value() {
        let (c, b) = circle_bundle(3);
        let r = ft_torsion(&c, &b, &canonical_spray(&c)).unwrap();
        assert!(r.acyclic);
        assert_eq!(r.t_comb_squared_exact.as_deref(), Some("4"));
        assert!((r.t_comb - 2.0).abs() < 1e-12);
        assert!((r.ft_metric.value - 0.25).abs() < 1e-12);
        let f = ft_torsion(&c, &b.to_f64(), &canonical_spray(&c)).unwrap();
        assert!((f.t_comb - 2.0).abs() < 1e-9);
    }

    #[test]
    fn det_prime_examples() {
        assert_eq!(det_prime(&FMat::zeros(3, 3), RANK_TOL).unwrap(), 1.0);
        assert!((det_prime(&FMat::diag(&[0.0, 4.0]), RANK_TOL).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(det_prime(&FMat::from_rows(vec![vec![1.0, 2.0], vec![0.0, 1.0]]), RANK_TOL), Err(Error::Asymmetric));
    }

    #[test]
    fn guard_band_rejects_ambiguous_rank() {
        let m = FMat::diag(&[1.0, 1e-10]);
        assert!(matches!(spectrum(&m, 0, RANK_TOL), Err(Error::IllConditioned { .. })));
        assert!(matches!(harmonic_basis(&m, RANK_TOL), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn point_has_trivial_torsion() {
        let p = simplicial("point", &[vec![0]]).unwrap();
        let b = FlatBundle::<Rational>::trivial(&p, 2);
        let r = ft_torsion(&p, &b, &canonical_spray(&p)).unwrap();
        assert_eq!(r.t_comb, 1.0);
        assert_eq!(r.harmonic_dims, vec![2]);
        assert_eq!(r.ft_metric.value, 1.0);
    }

    #[test]
    fn untwisted_circle_harmonic_forms_are_constant() {
        let (c, b) = circle_bundle(1);
        let t = assemble(&c, &b, &canonical_spray(&c)).unwrap().to_f64();
        let h = harmonic_bases(&t).unwrap();
        assert_eq!((h[0][(0, 0)].abs(), h[1][(0, 0)].abs()), (1.0, 1.0));
        let r = ft_torsion(&c, &b, &canonical_spray(&c)).unwrap();
        assert_eq!(r.harmonic_dims, vec![1, 1]);
    }

    #[test]
    fn sign_exponent_is_pinned() {
        // circle, ρ(e) = [2]: winding the base leg once changes δ from [1] to [1/2]
        let (c, b) = circle_bundle(2);
        let h1 = H1Basis::new(&c).unwrap();
        let ratio = euler_action_on_torsion(&c, &b, &canonical_spray(&c), &h1.generator(0)).unwrap();
        let beta = act_in(&h1, &c, &h1.generator(0), &canonical_spray(&c)).unwrap();
        let direct = assemble(&c, &b, &beta).unwrap();
        assert_eq!(direct.coboundary(0), QMat::from_rows(vec![vec![rational(1, 2)]]));
        // t goes from 1 to 1/2, so ft goes from 1 to 4
        assert!((ratio - 4.0).abs() < 1e-12);
        assert!((ratio - 2f64.powi(S_EXPONENT)).abs() < 1e-12);
    }

    #[test]
    fn base_change_on_point_scales_by_chi() {
        let p = simplicial("point", &[vec![0]]).unwrap();
        let b = FlatBundle::<Rational>::trivial(&p, 1);
        let r = base_change_ratio(&p, &b, &canonical_spray(&p), &QMat::from_i64_rows(&[&[3]])).unwrap();
        assert!((r - 1.0 / 9.0).abs() < 1e-12);
    }
}
