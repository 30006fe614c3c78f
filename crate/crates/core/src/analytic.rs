//! Zeta-regularized analytic torsion of the circle with holonomy `H`.
//!
//! Each eigenvalue `λ = r e^{iθ}` of `H` contributes one line bundle whose
//! Laplacian spectrum is `((2πn + θ + i ln r)/ℓ)²`, `n ∈ ℤ`. Its regularized
//! determinant is `|λ − 1|² / |λ|`, independent of the circumference `ℓ`;
//! with `λ = 1` the zero mode is removed and `det′ = ℓ²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FMat;

/// Default truncation of the direct spectral sum.
pub const DEFAULT_TRUNCATION: usize = 1_000_000;

/// `B_{2k}` for k = 1..7.
const BERNOULLI: [f64; 7] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0];

const UNIT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CircleModel {
    pub holonomy: FMat,
    pub circumference: f64,
}

impl CircleModel {
    pub fn new(holonomy: FMat, circumference: f64) -> Result<Self> {
        if !holonomy.is_square() || holonomy.nrows() == 0 {
            return Err(Error::RankMismatch { rows: holonomy.nrows(), cols: holonomy.ncols(), expected: holonomy.nrows().max(1) });
        }
        if holonomy.det().abs() == 0.0 {
            return Err(Error::SingularMatrix(crate::complex::CellId(0)));
        }
        if !(circumference > 0.0 && circumference.is_finite()) {
            return Err(Error::Parse(format!("circumference must be positive, got {circumference}")));
        }
        Ok(CircleModel { holonomy, circumference })
    }

    pub fn rank(&self) -> usize {
        self.holonomy.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = self.holonomy.to_dmatrix().complex_eigenvalues().iter().copied().collect();
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    fn is_trivial_line(l: Complex64) -> bool {
        (l - 1.0).norm() <= UNIT_TOL * l.norm().max(1.0)
    }

    /// Number of eigenvalues equal to 1, i.e. harmonic dimension in degrees 0 and 1.
    pub fn zero_modes(&self) -> usize {
        self.eigenvalues().into_iter().filter(|&l| Self::is_trivial_line(l)).count()
    }

    /// Spectral parameter `w = (θ + i ln r)/2π` with `θ ∈ [0, 2π)`.
    fn parameter(l: Complex64) -> Complex64 {
        let theta = l.arg().rem_euclid(std::f64::consts::TAU);
        Complex64::new(theta, l.norm().ln()) / std::f64::consts::TAU
    }
}

/// `∂_s ζ(s, a)` at `s = 0` by `N` direct terms plus an Euler–Maclaurin tail
/// with `bernoulli_terms` correction terms.
pub fn hurwitz_zeta_prime_at_zero(a: Complex64, n: usize, bernoulli_terms: usize) -> Complex64 {
    // compensated sums: 10⁶ terms of size ~10 otherwise lose ~1e−9
    let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
    for k in 0..n {
        let t = (a + k as f64).ln();
        re.add(t.re);
        im.add(t.im);
    }
    let sum = Complex64::new(re.total(), im.total());
    let x = a + n as f64;
    let lx = x.ln();
    let mut tail = x * lx - x - 0.5 * lx;
    let mut xp = x;
    let x2 = x * x;
    for (k, b) in BERNOULLI.iter().enumerate().take(bernoulli_terms) {
        let k = (k + 1) as f64;
        tail += *b / (2.0 * k * (2.0 * k - 1.0)) / xp;
        xp *= x2;
    }
    tail - sum
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `ζ(0, a) = ½ − a`.
fn hurwitz_zeta_at_zero(a: Complex64) -> Complex64 {
    Complex64::new(0.5, 0.0) - a
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaDeterminant {
    pub closed_form: f64,
    pub truncated: f64,
    pub truncation: usize,
    pub discrepancy: f64,
    pub zero_modes: usize,
}

/// Closed-form (restricted) determinant of the twisted 0-form Laplacian.
pub fn closed_form_det(model: &CircleModel, allow_zero_modes: bool) -> Result<f64> {
    let mut log = 0.0;
    for l in model.eigenvalues() {
        if CircleModel::is_trivial_line(l) {
            if !allow_zero_modes {
                return Err(Error::ZeroMode);
            }
            log += 2.0 * model.circumference.ln();
        } else {
            log += 2.0 * (l - 1.0).norm().ln() - l.norm().ln();
        }
    }
    Ok(log.exp())
}

/// Same determinant from the regularized spectral product.
pub fn truncated_det(model: &CircleModel, n: usize, bernoulli_terms: usize, allow_zero_modes: bool) -> Result<f64> {
    let scale = (std::f64::consts::TAU / model.circumference).powi(2).ln();
    let mut log = 0.0;
    for l in model.eigenvalues() {
        // n ≥ 0 uses a = w, n ≤ −1 uses a = 1 − w; a zero mode drops n = 0
        let (a, b) = if CircleModel::is_trivial_line(l) {
            if !allow_zero_modes {
                return Err(Error::ZeroMode);
            }
            (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
        } else {
            let w = CircleModel::parameter(l);
            (w, Complex64::new(1.0, 0.0) - w)
        };
        let zp = hurwitz_zeta_prime_at_zero(a, n, bernoulli_terms) + hurwitz_zeta_prime_at_zero(b, n, bernoulli_terms);
        let z0 = hurwitz_zeta_at_zero(a) + hurwitz_zeta_at_zero(b);
        // squared eigenvalues: factor 2 on ζ′, and the (2π/ℓ)² rescaling enters through ζ(0)
        log += -2.0 * zp.re + scale * z0.re;
    }
    Ok(log.exp())
}

pub fn zeta_det_laplacian(model: &CircleModel, truncation: usize, allow_zero_modes: bool) -> Result<ZetaDeterminant> {
    let closed_form = closed_form_det(model, allow_zero_modes)?;
    let truncated = truncated_det(model, truncation, BERNOULLI.len(), allow_zero_modes)?;
    Ok(ZetaDeterminant {
        closed_form,
        truncated,
        truncation,
        discrepancy: (truncated - closed_form).abs() / closed_form,
        zero_modes: model.zero_modes(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticTorsion {
    pub rank: usize,
    pub circumference: f64,
    pub acyclic: bool,
    /// harmonic dimensions in degrees 0 and 1
    pub harmonic_dims: [usize; 2],
    pub det: ZetaDeterminant,
    /// `T_an = det(Δ₀)^{1/2}` (Δ₁ is isospectral to Δ₀ on the circle)
    pub t_an: f64,
    pub t_an_truncated: f64,
    /// `T_an · |det H|^{1/2}`: removes the metric anomaly of non-unitary holonomy
    pub anomaly_corrected: f64,
}

pub fn analytic_torsion_circle(model: &CircleModel, truncation: usize) -> Result<AnalyticTorsion> {
    let zm = model.zero_modes();
    let det = zeta_det_laplacian(model, truncation, true)?;
    let t_an = det.closed_form.sqrt();
    Ok(AnalyticTorsion {
        rank: model.rank(),
        circumference: model.circumference,
        acyclic: zm == 0,
        harmonic_dims: [zm, zm],
        t_an_truncated: det.truncated.sqrt(),
        anomaly_corrected: t_an * model.holonomy.det().abs().sqrt(),
        det,
        t_an,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(rows: Vec<Vec<f64>>) -> CircleModel {
        CircleModel::new(FMat::from_rows(rows), 1.0).unwrap()
    }

    #[test]
    fn antiperiodic_line_has_determinant_four() {
        let m = model(vec![vec![-1.0]]);
        let d = zeta_det_laplacian(&m, 10_000, false).unwrap();
        assert!((d.closed_form - 4.0).abs() < 1e-12);
        assert!(d.discrepancy < 1e-9, "{d:?}");
    }

    #[test]
    fn rotation_splits_into_conjugate_lines() {
        let (s, c) = (2.0 * std::f64::consts::PI / 3.0).sin_cos();
        let m = model(vec![vec![c, -s], vec![s, c]]);
        let d = zeta_det_laplacian(&m, 10_000, false).unwrap();
        let line = 4.0 * (std::f64::consts::PI / 3.0).sin().powi(2);
        assert!((d.closed_form - line * line).abs() < 1e-10);
        assert!(d.discrepancy < 1e-9);
    }

    #[test]
    fn identity_needs_restricted_determinant() {
        let m = CircleModel::new(FMat::identity(2), 2.0).unwrap();
        assert_eq!(zeta_det_laplacian(&m, 1000, false), Err(Error::ZeroMode));
        let d = zeta_det_laplacian(&m, 10_000, true).unwrap();
        assert!((d.closed_form - 16.0).abs() < 1e-12);
        assert!(d.discrepancy < 1e-9);
        let t = analytic_torsion_circle(&m, 1000).unwrap();
        assert_eq!(t.harmonic_dims, [2, 2]);
        assert!(!t.acyclic);
    }

    #[test]
    fn non_unitary_line_uses_complex_parameter() {
        let m = model(vec![vec![3.0]]);
        let d = zeta_det_laplacian(&m, 10_000, false).unwrap();
        assert!((d.closed_form - 4.0 / 3.0).abs() < 1e-12);
        assert!(d.discrepancy < 1e-9);
        let t = analytic_torsion_circle(&m, 10_000).unwrap();
        assert!((t.anomaly_corrected - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hurwitz_derivative_at_one_is_minus_half_log_two_pi() {
        let z = hurwitz_zeta_prime_at_zero(Complex64::new(1.0, 0.0), 100, 7);
        assert!((z.re + 0.5 * std::f64::consts::TAU.ln()).abs() < 1e-13);
    }
}
