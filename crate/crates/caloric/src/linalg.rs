//! Dense least squares by one-sided Jacobi SVD with singular-value
//! truncation. Jacobi orthogonalization is slow but accurate on the extremely
//! ill-conditioned design matrices that heat-kernel and exponential columns
//! produce, which is exactly where truncation thresholds matter.

use crate::num::{cast, Real};

/// Column-major dense matrix.
#[derive(Debug, Clone)]
pub struct ColMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> ColMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            m.col_mut(j).copy_from_slice(col);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[j * self.rows + i] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.rows + i]
    }

    /// `A c` for a coefficient vector `c`.
    pub fn mul_vec(&self, c: &[T]) -> Vec<T> {
        assert_eq!(c.len(), self.cols);
        let mut out = vec![T::zero(); self.rows];
        for (j, &cj) in c.iter().enumerate() {
            if cj == T::zero() {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.col(j)) {
                *o += cj * a;
            }
        }
        out
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Result of a truncated-SVD least-squares solve.
#[derive(Debug, Clone)]
pub struct Lstsq<T> {
    pub coefficients: Vec<T>,
    /// Singular values, one per column, in Jacobi output order.
    pub singular_values: Vec<T>,
    /// Count of singular values kept above the truncation threshold.
    pub rank: usize,
    pub sigma_max: T,
}

/// Minimum-norm solution of `min ||A c - b||_2`, discarding directions whose
/// singular value falls below `rel_threshold * sigma_max`.
///
/// Columns are equilibrated to unit norm before the decomposition (and the
/// solution unscaled afterwards), so the truncation threshold acts on the
/// normalized spectrum rather than on raw column magnitudes.
#[allow(clippy::needless_range_loop)]
pub fn truncated_lstsq<T: Real>(a: &ColMatrix<T>, b: &[T], rel_threshold: T) -> Lstsq<T> {
    assert_eq!(a.rows(), b.len());
    let scales: Vec<T> = (0..a.cols())
        .map(|j| {
            let n = norm2(a.col(j));
            if n > T::zero() {
                n.recip()
            } else {
                T::zero()
            }
        })
        .collect();
    let mut scaled = a.clone();
    for (j, &s) in scales.iter().enumerate() {
        for v in scaled.col_mut(j) {
            *v *= s;
        }
    }
    let (u, sigma, v) = jacobi_svd(&scaled);
    let sigma_max = sigma.iter().cloned().fold(T::zero(), T::max);
    let cutoff = rel_threshold * sigma_max;
    let mut coeffs = vec![T::zero(); a.cols()];
    let mut rank = 0;
    for j in 0..a.cols() {
        if sigma[j] > cutoff && sigma[j] > T::zero() {
            rank += 1;
            // c += v_j * (u_j . b) / sigma_j
            let scale = dot(u.col(j), b) / sigma[j];
            for (c, &vj) in coeffs.iter_mut().zip(v.col(j)) {
                *c += scale * vj;
            }
        }
    }
    for (c, &s) in coeffs.iter_mut().zip(&scales) {
        *c *= s;
    }
    Lstsq {
        coefficients: coeffs,
        singular_values: sigma,
        rank,
        sigma_max,
    }
}

/// One-sided Jacobi SVD: returns `(U, sigma, V)` with `A = U diag(sigma) V^T`,
/// `U` having orthonormal columns where `sigma > 0`.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_svd<T: Real>(a: &ColMatrix<T>) -> (ColMatrix<T>, Vec<T>, ColMatrix<T>) {
    let n = a.cols();
    let mut u = a.clone();
    let mut v = ColMatrix::zeros(n, n);
    for j in 0..n {
        v.set(j, j, T::one());
    }
    let eps = T::epsilon();
    let tol_sq = cast::<T>(16.0) * eps * eps;
    let abs_floor = T::min_positive_value();
    let max_sweeps = 120;
    for _ in 0..max_sweeps {
        let mut converged = true;
        for i in 0..n.saturating_sub(1) {
            for j in (i + 1)..n {
                let aa = dot(u.col(i), u.col(i));
                let bb = dot(u.col(j), u.col(j));
                let d = dot(u.col(i), u.col(j));
                if d * d <= tol_sq * aa * bb || d.abs() <= abs_floor {
                    continue;
                }
                converged = false;
                let zeta = (bb - aa) / (cast::<T>(2.0) * d);
                let t = if zeta >= T::zero() {
                    (zeta + (T::one() + zeta * zeta).sqrt()).recip()
                } else {
                    -((-zeta + (T::one() + zeta * zeta).sqrt()).recip())
                };
                let c = (T::one() + t * t).sqrt().recip();
                let s = c * t;
                rotate_pair(&mut u, i, j, c, s);
                rotate_pair(&mut v, i, j, c, s);
            }
        }
        if converged {
            break;
        }
    }
    let sigma: Vec<T> = (0..n).map(|j| norm2(u.col(j))).collect();
    for j in 0..n {
        if sigma[j] > T::zero() {
            let inv = sigma[j].recip();
            for x in u.col_mut(j) {
                *x *= inv;
            }
        }
    }
    (u, sigma, v)
}

fn rotate_pair<T: Real>(m: &mut ColMatrix<T>, i: usize, j: usize, c: T, s: T) {
    for r in 0..m.rows() {
        let mi = m.get(r, i);
        let mj = m.get(r, j);
        m.set(r, i, c * mi - s * mj);
        m.set(r, j, s * mi + c * mj);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_solution_of_well_posed_system() {
        // A = [[1, 1], [1, -1], [0, 2]], c = [2, -3]
        let a: ColMatrix<f64> =
            ColMatrix::from_columns(3, &[vec![1.0, 1.0, 0.0], vec![1.0, -1.0, 2.0]]);
        let b = a.mul_vec(&[2.0, -3.0]);
        let sol = truncated_lstsq(&a, &b, 1e-12);
        assert!((sol.coefficients[0] - 2.0).abs() < 1e-12);
        assert!((sol.coefficients[1] + 3.0).abs() < 1e-12);
        assert_eq!(sol.rank, 2);
    }

    #[test]
    fn singular_values_match_known_diagonal() {
        let a: ColMatrix<f64> = ColMatrix::from_columns(2, &[vec![3.0, 0.0], vec![0.0, 0.5]]);
        let (_, sigma, _) = jacobi_svd(&a);
        let mut s = sigma.clone();
        s.sort_by(|x, y| y.partial_cmp(x).unwrap());
        assert!((s[0] - 3.0).abs() < 1e-14);
        assert!((s[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn zero_rhs_gives_zero_coefficients() {
        let a: ColMatrix<f64> =
            ColMatrix::from_columns(3, &[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0000001]]);
        let sol = truncated_lstsq(&a, &[0.0, 0.0, 0.0], 1e-10);
        assert!(sol.coefficients.iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn truncation_tames_duplicated_columns() {
        // Two identical columns: rank 1; the minimum-norm solution splits the
        // coefficient evenly and the residual still vanishes.
        let col = vec![1.0, 2.0, -1.0];
        let a = ColMatrix::from_columns(3, &[col.clone(), col.clone()]);
        let b: Vec<f64> = col.iter().map(|v| 4.0 * v).collect();
        let sol = truncated_lstsq(&a, &b, 1e-10);
        assert_eq!(sol.rank, 1);
        let r: Vec<f64> = a
            .mul_vec(&sol.coefficients)
            .iter()
            .zip(&b)
            .map(|(x, y)| x - y)
            .collect();
        assert!(norm2(&r) < 1e-12);
        assert!((sol.coefficients[0] - 2.0).abs() < 1e-10);
        assert!((sol.coefficients[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn ill_conditioned_system_keeps_residual_small() {
        // Vandermonde-like columns on clustered nodes: condition number blows
        // up but an exactly representable target must still fit.
        let nodes: Vec<f64> = (0..12).map(|i| 1.0 + 1e-3 * i as f64).collect();
        let cols: Vec<Vec<f64>> = (0..6)
            .map(|p| nodes.iter().map(|x| x.powi(p)).collect())
            .collect();
        let a = ColMatrix::from_columns(nodes.len(), &cols);
        let truth = [1.0, -2.0, 0.5, 0.0, 1.0, 0.0];
        let b = a.mul_vec(&truth);
        let sol = truncated_lstsq(&a, &b, 1e-12);
        let r: Vec<f64> = a
            .mul_vec(&sol.coefficients)
            .iter()
            .zip(&b)
            .map(|(x, y)| x - y)
            .collect();
        assert!(norm2(&r) < 1e-8, "residual {}", norm2(&r));
    }
}
