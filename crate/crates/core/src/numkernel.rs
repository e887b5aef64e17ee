//! Dense symmetric eigensolver and restricted-eigenvalue computation.
//!
//! The solver is a plain cyclic Jacobi iteration. Dimensions here stay small
//! (the largest matrix is the trace-free form matrix, 112 x 112 at n = 8), so
//! determinism and a short, auditable implementation matter more than speed.

use crate::error::{check_finite, Error, Result};
use crate::stability::DiagonalFormCoefficients;
use crate::sym3tensor::TraceFreeBasis;

const MAX_SWEEPS: usize = 60;
const OFF_DIAGONAL_RTOL: f64 = 1e-13;

/// Real symmetric matrix stored as its packed upper triangle, row by row.
/// Serializes as a list of full rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    packed: Vec<f64>,
}

impl serde::Serialize for SymMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            packed: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    /// Builds the matrix by evaluating `f(i, j)` for `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut packed = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                packed.push(f(i, j));
            }
        }
        Self { n, packed }
    }

    /// Packed upper triangle `a11, a12, .., a1n, a22, .., ann`.
    pub fn from_packed(n: usize, packed: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension {
                n,
                reason: "matrix dimension must be positive",
            });
        }
        let expected = n * (n + 1) / 2;
        if packed.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: packed.len(),
            });
        }
        check_finite(&packed, "packed")?;
        Ok(Self { n, packed })
    }

    /// Accepts a full row-major matrix; rejects it unless it is symmetric
    /// to within `1e-12 * (1 + max|a|)`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidDimension {
                n,
                reason: "matrix dimension must be positive",
            });
        }
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            check_finite(row, "row")?;
        }
        let scale = 1.0 + rows.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in i + 1..n {
                if (rows[i][j] - rows[j][i]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter {
                        name: "matrix",
                        reason: format!("not symmetric at ({i}, {j})"),
                    });
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| 0.5 * (rows[i][j] + rows[j][i])))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn packed(&self) -> &[f64] {
        &self.packed
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[self.offset(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let k = self.offset(i, j);
        self.packed[k] = value;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.get(i, j).powi(2);
            }
        }
        s.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.packed.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `self * self`, which is again symmetric.
    pub fn square(&self) -> SymMatrix {
        let n = self.n;
        Self::from_fn(n, |i, j| (0..n).map(|k| self.get(i, k) * self.get(k, j)).sum())
    }

    /// `Qᵀ · self · Q` for a square row-major `q`.
    pub fn conjugate(&self, q: &[Vec<f64>]) -> SymMatrix {
        let n = self.n;
        let a = self.to_rows();
        let mut aq = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                aq[i][j] = (0..n).map(|k| a[i][k] * q[k][j]).sum();
            }
        }
        Self::from_fn(n, |i, j| (0..n).map(|k| q[k][i] * aq[k][j]).sum())
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Row-major `n x n`; column `k` is the eigenvector of `eigenvalues[k]`.
    vectors: Vec<f64>,
    n: usize,
}

impl EigenDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Component `row` of eigenvector `k`.
    #[inline]
    pub fn component(&self, row: usize, k: usize) -> f64 {
        self.vectors[row * self.n + k]
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|r| self.component(r, k)).collect()
    }

    /// Eigenvector matrix `Q` as rows, so that `M = Q diag(λ) Qᵀ`.
    pub fn vectors_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|r| self.vectors[r * self.n..(r + 1) * self.n].to_vec())
            .collect()
    }

    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.n;
        SymMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| self.component(i, k) * self.eigenvalues[k] * self.component(j, k))
                .sum()
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::INFINITY)
    }
}

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops below
/// `1e-13 * ‖M‖_F`. Each eigenvector is sign-normalized so its first
/// nonzero component is positive; exact eigenvalue ties are ordered by the
/// normalized eigenvectors, lexicographically.
pub fn sym_eigen(m: &SymMatrix) -> Result<EigenDecomposition> {
    let n = m.n();
    if n == 0 {
        return Err(Error::InvalidDimension {
            n,
            reason: "matrix dimension must be positive",
        });
    }
    check_finite(m.packed(), "matrix")?;

    let mut a: Vec<f64> = m.to_rows().into_iter().flatten().collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let threshold = OFF_DIAGONAL_RTOL * m.frobenius_norm();
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= threshold {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                rotate(&mut a, n, p, q, c, s);
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let (x, y) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * x - s * y;
                    v[k * n + q] = s * x + c * y;
                }
            }
        }
        sweeps += 1;
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| {
            let mut col: Vec<f64> = (0..n).map(|r| v[r * n + k]).collect();
            normalize_sign(&mut col);
            (a[k * n + k], col)
        })
        .collect();
    pairs.sort_by(|(la, va), (lb, vb)| {
        la.total_cmp(lb).then_with(|| {
            va.iter()
                .zip(vb)
                .map(|(x, y)| y.total_cmp(x))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });

    let mut vectors = vec![0.0; n * n];
    let mut eigenvalues = Vec::with_capacity(n);
    for (k, (lambda, col)) in pairs.into_iter().enumerate() {
        eigenvalues.push(lambda);
        for r in 0..n {
            vectors[r * n + k] = col[r];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        vectors,
        n,
    })
}

fn rotate(a: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..n {
        let (x, y) = (a[k * n + p], a[k * n + q]);
        a[k * n + p] = c * x - s * y;
        a[k * n + q] = s * x + c * y;
    }
    for k in 0..n {
        let (x, y) = (a[p * n + k], a[q * n + k]);
        a[p * n + k] = c * x - s * y;
        a[q * n + k] = s * x + c * y;
    }
}

fn normalize_sign(col: &mut [f64]) {
    let scale = col.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(first) = col.iter().find(|x| x.abs() > 1e-12 * scale) {
        if *first < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Matrix of the diagonal form in the coordinates of an ambient-orthonormal
/// basis of the trace-free subspace: `Σ_c coef(c) B_a(c) B_b(c)`.
pub fn restricted_form_matrix(
    form: &DiagonalFormCoefficients,
    basis: &TraceFreeBasis,
) -> Result<SymMatrix> {
    if form.n() != basis.n() {
        return Err(Error::DimensionMismatch {
            expected: form.n(),
            found: basis.n(),
        });
    }
    let elements = basis.elements();
    let coef = form.coefficients();
    Ok(SymMatrix::from_fn(elements.len(), |a, b| {
        let (ea, eb) = (elements[a].coeffs(), elements[b].coeffs());
        coef.iter()
            .zip(ea.iter().zip(eb))
            .map(|(c, (x, y))| c * x * y)
            .sum()
    }))
}

/// Minimum of the form over unit trace-free tensors. An empty basis (n = 1)
/// gives `+∞`.
pub fn restricted_min_eigenvalue(
    form: &DiagonalFormCoefficients,
    basis: &TraceFreeBasis,
) -> Result<f64> {
    if basis.elements().is_empty() {
        if form.n() != basis.n() {
            return Err(Error::DimensionMismatch {
                expected: form.n(),
                found: basis.n(),
            });
        }
        return Ok(f64::INFINITY);
    }
    let m = restricted_form_matrix(form, basis)?;
    Ok(sym_eigen(&m)?.min_eigenvalue())
}
