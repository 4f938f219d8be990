use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::SizeMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::SizeMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Copy of the matrix restricted to the given columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, keep.len());
        for i in 0..self.rows {
            let src = self.row(i);
            for (k, &j) in keep.iter().enumerate() {
                out.data[i * keep.len() + k] = src[j];
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// `XᵀX` as a symmetric matrix.
    pub fn gram(&self) -> SymMatrix {
        let p = self.cols;
        let mut g = SymMatrix::zeros(p);
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..p {
                for b in a..p {
                    g.add(a, b, r[a] * r[b]);
                }
            }
        }
        g
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense symmetric matrix. Every write goes to both `(i, j)` and `(j, i)`,
/// so the stored entries are exactly symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    inner: Matrix,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: Matrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: Matrix::identity(dim),
        }
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from the upper triangle of `m`; the lower triangle is ignored.
    pub fn from_upper(m: &Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::SizeMismatch {
                expected: m.rows(),
                got: m.cols(),
            });
        }
        let mut s = Self::zeros(m.rows());
        for i in 0..m.rows() {
            for j in i..m.rows() {
                s.set(i, j, m[(i, j)]);
            }
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.inner.rows
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.inner[(i, j)] = v;
        self.inner[(j, i)] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let nv = self.inner[(i, j)] + v;
        self.set(i, j, nv);
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.inner.data {
            *v *= c;
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.inner
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.inner.mul_vec(v)
    }

    /// Principal submatrix on `idx`.
    pub fn submatrix(&self, idx: &[usize]) -> SymMatrix {
        let mut s = SymMatrix::zeros(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate().skip(a) {
                s.set(a, b, self.get(i, j));
            }
        }
        s
    }

    pub fn max_abs_diag(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.get(i, i).abs())
            .fold(0.0, f64::max)
    }
}

/// Lower-triangular Cholesky factor of an SPD matrix.
fn cholesky(a: &SymMatrix) -> Result<Matrix> {
    let n = a.dim();
    let tol = 1e-12 * a.max_abs_diag();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > tol) {
            return Err(Error::NotPositiveDefinite { row: j, pivot: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `A x = b` for symmetric positive definite `A` via Cholesky.
pub fn solve_spd(a: &SymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let l = cholesky(a)?;
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Ok(x)
}

/// Eigen-decomposition `A = V diag(values) Vᵀ`; column `k` of `vectors`
/// pairs with `values[k]`. Values are sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigenvalue iteration.
pub fn sym_eig(a: &SymMatrix) -> Result<SymEig> {
    let n = a.dim();
    let mut m = a.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let scale: f64 = m.data.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut sweep = 0;
    if n > 1 && scale > 0.0 {
        loop {
            if sweep == JACOBI_MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    what: "jacobi eigensolver",
                    iterations: sweep,
                });
            }
            sweep += 1;
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)] * m[(i, j)])
                .sum::<f64>()
                .sqrt();
            if off <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = m[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = m[(p, p)];
                    let aqq = m[(q, q)];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let mkp = m[(k, p)];
                        let mkq = m[(k, q)];
                        m[(k, p)] = c * mkp - s * mkq;
                        m[(k, q)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[(p, k)];
                        let mqk = m[(q, k)];
                        m[(p, k)] = c * mpk - s * mqk;
                        m[(q, k)] = s * mpk + c * mqk;
                    }
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[(y, y)].total_cmp(&m[(x, x)]));
    let values = order.iter().map(|&k| m[(k, k)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(SymEig { values, vectors })
}

#[derive(Debug, Clone)]
pub struct PsdSqrt {
    pub root: SymMatrix,
    /// Number of negative eigenvalues that were set to zero.
    pub clipped: usize,
}

/// Symmetric square root `V diag(sqrt(max(λ, 0))) Vᵀ`.
pub fn psd_sqrt(a: &SymMatrix) -> Result<PsdSqrt> {
    let eig = sym_eig(a)?;
    let n = a.dim();
    let mut clipped = 0;
    let roots: Vec<f64> = eig
        .values
        .iter()
        .map(|&l| {
            if l < 0.0 {
                clipped += 1;
                0.0
            } else {
                l.sqrt()
            }
        })
        .collect();
    let mut root = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..n)
                .map(|k| eig.vectors[(i, k)] * roots[k] * eig.vectors[(j, k)])
                .sum();
            root.set(i, j, s);
        }
    }
    Ok(PsdSqrt { root, clipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::RngStream;
    use proptest::prelude::*;

    fn random_spd(dim: usize, rng: &mut RngStream) -> SymMatrix {
        let b =
            Matrix::from_row_major(dim, dim, (0..dim * dim).map(|_| rng.std_normal()).collect())
                .unwrap();
        let mut a = SymMatrix::from_upper(&b.matmul(&b.transpose())).unwrap();
        for i in 0..dim {
            a.add(i, i, 0.5);
        }
        a
    }

    fn random_sym(dim: usize, rng: &mut RngStream) -> SymMatrix {
        let mut a = SymMatrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                a.set(i, j, rng.std_normal());
            }
        }
        a
    }

    // Plain Gaussian elimination with partial pivoting on a dense copy.
    fn gauss_solve(a: &SymMatrix, b: &[f64]) -> Vec<f64> {
        let n = a.dim();
        let mut m: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut r: Vec<f64> = (0..n).map(|j| a.get(i, j)).collect();
                r.push(b[i]);
                r
            })
            .collect();
        for c in 0..n {
            let piv = (c..n)
                .max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))
                .unwrap();
            m.swap(c, piv);
            for r in c + 1..n {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
            x[i] = (m[i][n] - s) / m[i][i];
        }
        x
    }

    fn frob(m: &Matrix) -> f64 {
        m.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn reconstruct(e: &SymEig) -> Matrix {
        let n = e.values.len();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (0..n)
                    .map(|k| e.vectors[(i, k)] * e.values[k] * e.vectors[(j, k)])
                    .sum();
            }
        }
        out
    }

    #[test]
    fn solve_identity_and_diag() {
        let b = [1.5, -2.0, 3.0];
        assert_eq!(solve_spd(&SymMatrix::identity(3), &b).unwrap(), b.to_vec());
        let x = solve_spd(&SymMatrix::from_diag(&[2.0, 4.0]), &[2.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn solve_matches_elimination() {
        let mut rng = RngStream::new(11, 0);
        let a = random_spd(5, &mut rng);
        let b: Vec<f64> = (0..5).map(|_| rng.std_normal()).collect();
        let x = solve_spd(&a, &b).unwrap();
        let oracle = gauss_solve(&a, &b);
        for (u, v) in x.iter().zip(&oracle) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn solve_residuals_many_instances() {
        let mut rng = RngStream::new(12, 0);
        for k in 0..1000 {
            let dim = 1 + k % 20;
            let a = random_spd(dim, &mut rng);
            let b: Vec<f64> = (0..dim).map(|_| rng.std_normal()).collect();
            let x = solve_spd(&a, &b).unwrap();
            let r: f64 = a
                .mul_vec(&x)
                .iter()
                .zip(&b)
                .map(|(u, v)| (u - v).powi(2))
                .sum::<f64>()
                .sqrt();
            let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(r / nb <= 1e-10, "instance {k}: {}", r / nb);
        }
    }

    #[test]
    fn solve_rejects_indefinite() {
        let mut a = SymMatrix::identity(2);
        a.set(0, 1, 2.0);
        assert!(matches!(
            solve_spd(&a, &[1.0, 1.0]),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            solve_spd(&SymMatrix::zeros(2), &[1.0, 1.0]),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn eig_diag_and_identity() {
        let e = sym_eig(&SymMatrix::from_diag(&[3.0, 1.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert_eq!(e.vectors[(0, 0)].abs(), 1.0);
        assert_eq!(e.vectors[(1, 1)].abs(), 1.0);
        let e = sym_eig(&SymMatrix::identity(4)).unwrap();
        assert!(e.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn eig_reconstructs_random() {
        let mut rng = RngStream::new(13, 0);
        for _ in 0..50 {
            let a = random_sym(4, &mut rng);
            let e = sym_eig(&a).unwrap();
            let mut diff = reconstruct(&e);
            for i in 0..4 {
                for j in 0..4 {
                    diff[(i, j)] -= a.get(i, j);
                }
            }
            assert!(frob(&diff) <= 1e-9 * frob(a.as_matrix()));
            let vtv = e.vectors.transpose().matmul(&e.vectors);
            for i in 0..4 {
                for j in 0..4 {
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((vtv[(i, j)] - target).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn sqrt_simple_cases() {
        let r = psd_sqrt(&SymMatrix::from_diag(&[4.0, 9.0])).unwrap();
        assert_eq!(r.root.get(0, 0), 2.0);
        assert_eq!(r.root.get(1, 1), 3.0);
        assert_eq!(r.root.get(0, 1), 0.0);
        assert_eq!(r.clipped, 0);
        let r = psd_sqrt(&SymMatrix::identity(3)).unwrap();
        assert_eq!(r.root, SymMatrix::identity(3));
    }

    #[test]
    fn sqrt_clips_negative_eigenvalues() {
        let r = psd_sqrt(&SymMatrix::from_diag(&[4.0, -1.0])).unwrap();
        assert_eq!(r.clipped, 1);
        assert_eq!(r.root.get(1, 1), 0.0);
    }

    proptest! {
        #[test]
        fn sqrt_squares_to_psd_projection(seed in any::<u64>(), dim in 1usize..7, shift in -1.0f64..1.0) {
            let mut rng = RngStream::new(seed, 1);
            let mut a = random_spd(dim, &mut rng);
            for i in 0..dim {
                a.add(i, i, shift * 2.0);
            }
            let e = sym_eig(&a).unwrap();
            let clipped: Vec<f64> = e.values.iter().map(|&l| l.max(0.0)).collect();
            let proj = reconstruct(&SymEig { values: clipped, vectors: e.vectors.clone() });
            let r = psd_sqrt(&a).unwrap();
            let sq = r.root.as_matrix().matmul(r.root.as_matrix());
            let mut diff = sq.clone();
            for i in 0..dim {
                for j in 0..dim {
                    diff[(i, j)] -= proj[(i, j)];
                }
            }
            prop_assert!(frob(&diff) <= 1e-8 * (1.0 + frob(&proj)));
        }
    }
}
