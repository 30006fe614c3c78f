#![allow(dead_code)]

use rand::Rng;
use rtorsion::{CellId, Complex, EdgePath, Step};

/// Random walk from `start` of at most `len` steps.
pub fn random_walk<R: Rng>(c: &Complex, start: CellId, len: usize, rng: &mut R) -> EdgePath {
    let mut moves = Vec::new();
    for &e in c.cells_of_dim(1) {
        let (t, h) = c.edge_endpoints(e).unwrap();
        moves.push((t, Step::fwd(e), h));
        moves.push((h, Step::rev(e), t));
    }
    let mut at = start;
    let mut steps = Vec::new();
    for _ in 0..len {
        let here: Vec<_> = moves.iter().filter(|m| m.0 == at).collect();
        if here.is_empty() {
            break;
        }
        let (_, s, to) = here[rng.gen_range(0..here.len())];
        steps.push(*s);
        at = *to;
    }
    c.path(start, steps).unwrap()
}

/// Random loop at the base vertex, closed through the spanning tree.
pub fn random_loop<R: Rng>(c: &Complex, max_len: usize, rng: &mut R) -> EdgePath {
    let w = random_walk(c, c.base_vertex(), rng.gen_range(0..=max_len), rng);
    let back = c.spanning_tree_paths()[&w.end].reversed();
    w.then(&back)
}

pub type Dense = Vec<Vec<f64>>;

pub fn zeros(r: usize, c: usize) -> Dense {
    vec![vec![0.0; c]; r]
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, m, k) = (a.len(), b.first().map_or(0, Vec::len), b.len());
    let mut out = zeros(n, m);
    for i in 0..n {
        for l in 0..k {
            for j in 0..m {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    out
}

/// Determinant by partial-pivot elimination.
pub fn det(mut a: Dense) -> f64 {
    let n = a.len();
    let mut d = 1.0;
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        if a[p][col] == 0.0 {
            return 0.0;
        }
        if p != col {
            a.swap(p, col);
            d = -d;
        }
        d *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for j in col..n {
                a[r][j] -= f * a[col][j];
            }
        }
    }
    d
}

fn max_abs(a: &Dense) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Columns of `a` independent of the preceding ones (greedy Gram–Schmidt);
/// residual norms at or below `tol` count as dependent.
pub fn pivot_columns(a: &Dense, ncols: usize, tol: f64) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut out = Vec::new();
    for j in 0..ncols {
        let mut v: Vec<f64> = a.iter().map(|row| row[j]).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > tol {
            basis.push(v.iter().map(|x| x / n).collect());
            out.push(j);
        }
    }
    out
}

/// Torsion of an acyclic based cochain complex `C^0 → … → C^n` in the
/// classical form: with `S_d` the pivot columns of `δ_d`, the square matrix
/// `B_d = [δ_{d−1} e_{S_{d−1}} | e_{S_d}]` re-bases `C^d`, and
/// `τ = Π_d |det B_d|^{(−1)^{d+1}}`. Returns `None` when not acyclic.
pub fn milnor_torsion(dims: &[usize], deltas: &[Dense]) -> Option<f64> {
    // one scale for the whole complex: a coboundary that vanishes exactly
    // arrives as pure round-off and must not be read by its own scale
    let scale = deltas.iter().map(max_abs).fold(f64::MIN_POSITIVE, f64::max);
    let pivots: Vec<Vec<usize>> = deltas.iter().zip(dims).map(|(d, &n)| pivot_columns(d, n, 1e-10 * scale)).collect();
    let mut log = 0.0;
    for (d, &n) in dims.iter().enumerate() {
        let mut cols: Vec<Vec<f64>> = Vec::new();
        if d > 0 {
            for &j in &pivots[d - 1] {
                cols.push(deltas[d - 1].iter().map(|row| row[j]).collect());
            }
        }
        if d < deltas.len() {
            for &j in &pivots[d] {
                cols.push((0..n).map(|i| (i == j) as u8 as f64).collect());
            }
        }
        if cols.len() != n {
            return None;
        }
        let b: Dense = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        let v = det(b).abs();
        if v == 0.0 {
            return None;
        }
        log += if d % 2 == 1 { v.ln() } else { -v.ln() };
    }
    Some(log.exp())
}

pub fn to_dense(m: &rtorsion::FMat) -> Dense {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn rotation(theta: f64) -> Dense {
    let (s, c) = theta.sin_cos();
    vec![vec![c, -s], vec![s, c]]
}

pub fn identity(n: usize) -> Dense {
    (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect()
}

pub fn sub(a: &Dense, b: &Dense) -> Dense {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

pub fn add(a: &Dense, b: &Dense) -> Dense {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect()).collect()
}

pub fn power(a: &Dense, n: usize) -> Dense {
    (0..n).fold(identity(a.len()), |acc, _| matmul(&acc, a))
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
