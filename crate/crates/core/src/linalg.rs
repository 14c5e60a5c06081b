//! Small dense complex linear-algebra helpers shared by the precoder and rate
//! code. Everything is `nalgebra` underneath.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest entry magnitude, `‖A‖_max`.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `‖A − I‖_max` for a square matrix.
pub fn identity_defect(m: &CMatrix) -> f64 {
    assert_eq!(m.nrows(), m.ncols(), "identity_defect needs a square matrix");
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}

/// Orthogonal projector `B B*` onto the span of orthonormal columns `B`.
pub fn projector(basis: &CMatrix) -> CMatrix {
    basis * basis.adjoint()
}

/// Relative threshold below which a singular value counts as zero.
///
/// `max(rows, cols) · ε · σ_max`, the usual floating-point rank cutoff.
pub fn rank_threshold(singular_values: &[f64], rows: usize, cols: usize) -> f64 {
    let sigma_max = singular_values.iter().cloned().fold(0.0_f64, f64::max);
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

/// Number of singular values above [`rank_threshold`].
pub fn numerical_rank(singular_values: &[f64], rows: usize, cols: usize) -> usize {
    let threshold = rank_threshold(singular_values, rows, cols);
    singular_values.iter().filter(|&&s| s > threshold).count()
}

/// Thin SVD with singular values sorted in descending order.
///
/// Returns `(U, σ, V)` with `A = U diag(σ) V*`, `U` of size `m × k`, `V` of
/// size `n × k`, `k = min(m, n)`.
///
/// Householder QR followed by one-sided Jacobi on the triangular factor.
/// `nalgebra`'s bidiagonal SVD loses accuracy on tightly clustered singular
/// values (errors near 1e-7 on near-isometries), which Jacobi does not.
pub fn thin_svd(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (rows, cols) = m.shape();
    if rows < cols {
        let (u, s, v) = thin_svd(&m.adjoint());
        return (v, s, u);
    }
    if cols == 0 {
        return (CMatrix::zeros(rows, 0), Vec::new(), CMatrix::zeros(0, 0));
    }
    let qr = m.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let (w, s, v) = jacobi_svd(r);
    (q * w, s, v)
}

/// One-sided (Hestenes) Jacobi SVD of a square matrix.
fn jacobi_svd(mut a: CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let n = a.ncols();
    let mut v = CMatrix::identity(n, n);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                // Make the off-diagonal real, then apply a real rotation.
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..mat.nrows() {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)] * phase.conj();
                        mat[(i, p)] = xp * c - xq * s;
                        mat[(i, q)] = xp * s + xq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(usize, f64)> = (0..n).map(|j| (j, a.column(j).norm())).collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1));
    let sigma: Vec<f64> = order.iter().map(|o| o.1).collect();
    let mut u = CMatrix::zeros(n, n);
    let mut v_sorted = CMatrix::zeros(n, n);
    let mut filled = 0;
    for (k, &(j, s)) in order.iter().enumerate() {
        v_sorted.set_column(k, &v.column(j));
        if s > 0.0 {
            u.set_column(k, &(a.column(j) / Complex64::new(s, 0.0)));
            filled = k + 1;
        }
    }
    complete_orthonormal(&mut u, filled);
    (u, sigma, v_sorted)
}

/// Fills columns `from..` of `u` with unit vectors orthogonal to all
/// earlier columns, by Gram-Schmidt over the standard basis.
fn complete_orthonormal(u: &mut CMatrix, from: usize) {
    let n = u.nrows();
    let mut next = from;
    for e in 0..n {
        if next >= u.ncols() {
            break;
        }
        let mut x = CVector::zeros(n);
        x[e] = ONE;
        for _ in 0..2 {
            for k in 0..next {
                let proj = u.column(k).dotc(&x);
                x -= u.column(k) * proj;
            }
        }
        let norm = x.norm();
        if norm > 0.5 {
            u.set_column(next, &(x / Complex64::new(norm, 0.0)));
            next += 1;
        }
    }
}

/// Orthonormal basis of the orthogonal complement of `span(basis)`.
///
/// `basis` must have orthonormal columns. Computed from the eigenvectors of
/// `I − B B*` with eigenvalue one.
pub fn orthogonal_complement(basis: &CMatrix) -> CMatrix {
    let m = basis.nrows();
    let k = basis.ncols();
    let complement = CMatrix::identity(m, m) - projector(basis);
    let eig = SymmetricEigen::new(complement);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let cols: Vec<CVector> = order[..m - k]
        .iter()
        .map(|&j| eig.eigenvectors.column(j).into_owned())
        .collect();
    if cols.is_empty() {
        CMatrix::zeros(m, 0)
    } else {
        CMatrix::from_columns(&cols)
    }
}

/// Diagonal of a square matrix as real parts (for Hermitian inputs).
pub fn real_diagonal(m: &CMatrix) -> Vec<f64> {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)].re).collect()
}
