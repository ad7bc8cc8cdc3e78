//! Dense complex matrices and the few operations the simulator needs.
//!
//! Matrices are row-major over `Complex<T>` and tiny (tens of rows), so
//! everything is plain loops. Shape mismatches are programming errors and
//! panic; only numerical rank deficiency is reported through `Result`.

use crate::scalar::Real;
use num_complex::Complex;
use std::ops::{Index, IndexMut};

/// Pivot magnitude below which the regularized normal matrix is declared
/// numerically singular instead of producing garbage.
pub const SINGULAR_PIVOT: f64 = 1e-12;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum LinalgError {
    #[error("normal matrix numerically singular at column {col} (pivot {pivot:.3e})")]
    Singular { col: usize, pivot: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Builds from row slices; every row must have the same length.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Self {
        assert!(!rows.is_empty() && !rows[0].is_empty());
        let cols = rows[0].len();
        Self::from_fn(rows.len(), cols, |r, c| {
            assert_eq!(rows[r].len(), cols, "ragged rows");
            rows[r][c]
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Complex<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re.is_zero() && a.im.is_zero() {
                    continue;
                }
                let rr = rhs.row(k);
                let or = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for j in 0..rhs.cols {
                    or[j] += a * rr[j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.cols, "matvec shape mismatch");
        (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                let mut acc = Complex::new(T::zero(), T::zero());
                for (a, x) in row.iter().zip(v) {
                    acc += *a * *x;
                }
                acc
            })
            .collect()
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }
}

impl<T> Index<(usize, usize)> for CMat<T> {
    type Output = Complex<T>;

    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for CMat<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        &mut self.data[r * self.cols + c]
    }
}

/// Sum of `conj(a_i) * b_i`.
pub fn dot_h<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    assert_eq!(a.len(), b.len());
    let mut acc = Complex::new(T::zero(), T::zero());
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * *y;
    }
    acc
}

/// Squared Euclidean norm of a complex vector.
pub fn norm_sqr<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

/// Solves `(M^H M + sigma2 I) x = M^H y` by Cholesky on the regularized
/// normal matrix. `sigma2 = 0` turns this into an ordinary least-squares
/// solve and may legitimately fail as `Singular` when `M` is rank deficient.
pub fn solve_regularized<T: Real>(
    m: &CMat<T>,
    y: &[Complex<T>],
    sigma2: T,
) -> Result<Vec<Complex<T>>, LinalgError> {
    assert_eq!(y.len(), m.rows(), "rhs length must match rows");
    assert!(sigma2 >= T::zero(), "sigma2 must be non-negative");
    let n = m.cols();
    let mh = m.hermitian();
    let mut normal = mh.matmul(m);
    for i in 0..n {
        normal[(i, i)] += Complex::new(sigma2, T::zero());
    }
    let rhs = mh.matvec(y);
    let l = cholesky(&normal)?;

    // L z = rhs, then L^H x = z.
    let mut z = rhs;
    for i in 0..n {
        for k in 0..i {
            let step = l[(i, k)] * z[k];
            z[i] -= step;
        }
        let d = l[(i, i)];
        z[i] /= d;
    }
    let mut x = z;
    for i in (0..n).rev() {
        for k in i + 1..n {
            let step = l[(k, i)].conj() * x[k];
            x[i] -= step;
        }
        let d = l[(i, i)];
        x[i] /= d;
    }
    Ok(x)
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
fn cholesky<T: Real>(a: &CMat<T>) -> Result<CMat<T>, LinalgError> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        // NaN input falls through the comparison and is reported singular.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(d.to64() > SINGULAR_PIVOT) {
            return Err(LinalgError::Singular {
                col: j,
                pivot: d.to64(),
            });
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex::new(djj, T::zero());
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}
