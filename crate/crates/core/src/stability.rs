//! Stability quadratic forms on the second fundamental form.
//!
//! For a minimal Lagrangian graph with slope eigenvalues `λ` and second
//! fundamental form `h_ijk` (in the eigenframe), the Laplacian of `ln *Ω` is
//! `-F(h)` with
//!
//! ```text
//! F(h) = Σ_{ijk} h_ijk² + Σ_{k,i} λ_i² h_iik² + 2 Σ_{k, i<j} λ_i λ_j h_ijk²
//! ```
//!
//! `F` is diagonal in the sorted-component coordinates of [`Sym3Tensor`]:
//!
//! | component        | coefficient                          |
//! |------------------|--------------------------------------|
//! | `iii`            | `1 + λ_i²`                           |
//! | `iij`, `i != j`  | `3 + λ_i² + 2 λ_i λ_j`               |
//! | `ijk` distinct   | `6 + 2 (λ_iλ_j + λ_jλ_k + λ_kλ_i)`   |
//!
//! Every function here takes the eigenvalues in the same frame order as the
//! tensor indices; a sorted [`Spectrum`](crate::regions::Spectrum) is only
//! appropriate when the tensor was expressed in the sorted frame.
//!
//! The `evaluate_*` functions are literal index loops and serve as the
//! oracle for the coefficient table.

use crate::error::{Error, Result};
use crate::sym3tensor::{component_table, max_trace, Sym3Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalFormCoefficients {
    n: usize,
    coefficients: Vec<f64>,
    multiplicities: Vec<f64>,
}

impl DiagonalFormCoefficients {
    pub fn new(lambda: &[f64]) -> Self {
        let n = lambda.len();
        let table = component_table(n);
        let coefficients = table
            .iter()
            .map(|c| {
                let [i, j, k] = c.index;
                match c.multiplicity {
                    1 => 1.0 + lambda[i] * lambda[i],
                    3 => {
                        let (rep, other) = if i == j { (i, k) } else { (j, i) };
                        3.0 + lambda[rep] * lambda[rep] + 2.0 * lambda[rep] * lambda[other]
                    }
                    _ => {
                        6.0 + 2.0
                            * (lambda[i] * lambda[j] + lambda[j] * lambda[k] + lambda[k] * lambda[i])
                    }
                }
            })
            .collect();
        let multiplicities = table.iter().map(|c| c.multiplicity as f64).collect();
        Self {
            n,
            coefficients,
            multiplicities,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn multiplicities(&self) -> &[f64] {
        &self.multiplicities
    }

    /// `coef(c) / m(c)`: the form in ambient-orthonormal coordinates.
    pub fn ratios(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .zip(&self.multiplicities)
            .map(|(c, m)| c / m)
            .collect()
    }

    /// The form minus `shift · |h|²`; every ratio drops by `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            n: self.n,
            coefficients: self
                .coefficients
                .iter()
                .zip(&self.multiplicities)
                .map(|(c, m)| c - shift * m)
                .collect(),
            multiplicities: self.multiplicities.clone(),
        }
    }

    /// Fast path: `Σ_c coef(c) · h_c²`.
    pub fn evaluate(&self, t: &Sym3Tensor) -> Result<f64> {
        check_dims(self.n, t.n())?;
        Ok(self
            .coefficients
            .iter()
            .zip(t.coeffs())
            .map(|(c, h)| c * h * h)
            .sum())
    }
}

pub fn form_coefficients(lambda: &[f64]) -> DiagonalFormCoefficients {
    DiagonalFormCoefficients::new(lambda)
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `F(h)` by direct summation over ordered indices.
pub fn evaluate_form(lambda: &[f64], t: &Sym3Tensor) -> Result<f64> {
    let n = lambda.len();
    check_dims(n, t.n())?;
    let mut norm = 0.0;
    let mut squares = 0.0;
    let mut cross = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                norm += t.get(i, j, k).powi(2);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            squares += lambda[i].powi(2) * t.get(i, i, k).powi(2);
            for j in i + 1..n {
                cross += lambda[i] * lambda[j] * t.get(i, j, k).powi(2);
            }
        }
    }
    Ok(norm + squares + 2.0 * cross)
}

/// `F(h) - |h|²`; nonnegative on trace-free tensors is the `Δ ln *Ω ≤ -|A|²`
/// statement.
pub fn evaluate_strengthened(lambda: &[f64], t: &Sym3Tensor) -> Result<f64> {
    Ok(evaluate_form(lambda, t)? - crate::sym3tensor::ambient_norm_sq(t))
}

/// `(Σ_i λ_i h_iik)_k`; up to the factor `-*Ω` this is the gradient of `*Ω`.
pub fn weighted_traces(lambda: &[f64], t: &Sym3Tensor) -> Result<Vec<f64>> {
    let n = lambda.len();
    check_dims(n, t.n())?;
    Ok((0..n)
        .map(|k| (0..n).map(|i| lambda[i] * t.get(i, i, k)).sum())
        .collect())
}

/// Second fundamental form `h[α][i][k]` of an n-dimensional submanifold of
/// ℝ²ⁿ, normal index `α` (zero-based, standing for `n + α + 1`) and tangent
/// indices `i, k`. Symmetric in `(i, k)` only.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientSecondForm {
    n: usize,
    data: Vec<f64>,
}

impl AmbientSecondForm {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    /// Evaluates `f(α, i, k)` for `i <= k` and mirrors.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(n);
        for a in 0..n {
            for i in 0..n {
                for k in i..n {
                    let v = f(a, i, k);
                    out.data[(a * n + i) * n + k] = v;
                    out.data[(a * n + k) * n + i] = v;
                }
            }
        }
        out
    }

    /// Lagrangian identification `h[n+i][j][k] = h_ijk`.
    pub fn lagrangianize(t: &Sym3Tensor) -> Self {
        Self::from_fn(t.n(), |a, i, k| t.get(a, i, k))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, alpha: usize, i: usize, k: usize) -> f64 {
        self.data[(alpha * self.n + i) * self.n + k]
    }
}

/// Bracket of the general (non-Lagrangian) `Δ*Ω` formula:
/// `Σ h_αik² - 2Σ_{k,i<j} λ_iλ_j h_{n+i,ik} h_{n+j,jk}
///  + 2Σ_{k,i<j} λ_iλ_j h_{n+j,ik} h_{n+i,jk}`.
pub fn evaluate_ambient_form(lambda: &[f64], h: &AmbientSecondForm) -> Result<f64> {
    let n = lambda.len();
    check_dims(n, h.n())?;
    let mut norm = 0.0;
    for a in 0..n {
        for i in 0..n {
            for k in 0..n {
                norm += h.get(a, i, k).powi(2);
            }
        }
    }
    let mut diag = 0.0;
    let mut swap = 0.0;
    for k in 0..n {
        for i in 0..n {
            for j in i + 1..n {
                let l = lambda[i] * lambda[j];
                diag += l * h.get(i, i, k) * h.get(j, j, k);
                swap += l * h.get(j, i, k) * h.get(i, j, k);
            }
        }
    }
    Ok(norm - 2.0 * diag + 2.0 * swap)
}

/// Residual of `F(h) - [Δ*Ω bracket](h) - Σ_k (Σ_i λ_i h_iik)²`, which is
/// identically zero for every symmetric tensor.
pub fn bracket_identity_residual(lambda: &[f64], t: &Sym3Tensor) -> Result<f64> {
    let f = evaluate_form(lambda, t)?;
    let g = evaluate_ambient_form(lambda, &AmbientSecondForm::lagrangianize(t))?;
    let grad: f64 = weighted_traces(lambda, t)?.iter().map(|x| x * x).sum();
    Ok(f - g - grad)
}

fn require_trace_free(t: &Sym3Tensor) -> Result<()> {
    let worst = max_trace(t);
    if worst > 1e-10 * (1.0 + t.max_abs()) {
        return Err(Error::NotTraceFree { max_trace: worst });
    }
    Ok(())
}

/// `|LHS - RHS|` of
/// `Σ_i λ_i² h_iii² = Σ_{i≠j} λ_i² h_ijj² + 2 Σ_{i≠j, i≠l, j<l} λ_i² h_ijj h_ill`,
/// which holds once `h_iii = -Σ_{j≠i} h_ijj`.
pub fn trace_identity_residual(lambda: &[f64], t: &Sym3Tensor) -> Result<f64> {
    let n = lambda.len();
    check_dims(n, t.n())?;
    require_trace_free(t)?;
    let lhs: f64 = (0..n).map(|i| lambda[i].powi(2) * t.get(i, i, i).powi(2)).sum();
    let mut rhs = 0.0;
    for i in 0..n {
        let l2 = lambda[i].powi(2);
        for j in 0..n {
            if j == i {
                continue;
            }
            rhs += l2 * t.get(i, j, j).powi(2);
            for l in j + 1..n {
                if l != i {
                    rhs += 2.0 * l2 * t.get(i, j, j) * t.get(i, l, l);
                }
            }
        }
    }
    Ok((lhs - rhs).abs())
}

/// `F(h)` after eliminating `h_iii` with the trace condition:
/// `Σ h² + 2Σ λ_i² h_ijj h_ill + Σ_{p≠q} (λ_p+λ_q)² h_pqq² + 2Σ_{i<j<k} σ_ijk h_ijk²`.
/// Agrees with [`evaluate_form`] on trace-free tensors only.
pub fn regrouped_form(lambda: &[f64], t: &Sym3Tensor) -> Result<f64> {
    let n = lambda.len();
    check_dims(n, t.n())?;
    let mut total = crate::sym3tensor::ambient_norm_sq(t);
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            for l in j + 1..n {
                if l != i {
                    total += 2.0 * lambda[i].powi(2) * t.get(i, j, j) * t.get(i, l, l);
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            if p != q {
                total += (lambda[p] + lambda[q]).powi(2) * t.get(p, q, q).powi(2);
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let s = lambda[i] * lambda[j] + lambda[j] * lambda[k] + lambda[k] * lambda[i];
                total += 2.0 * s * t.get(i, j, k).powi(2);
            }
        }
    }
    Ok(total)
}

/// Minimum over index triples `(i; j < l)`, `j, l != i`, whose pair sum
/// `λ_iλ_j + λ_jλ_l + λ_lλ_i` is nonnegative, of
/// `2 λ_i² h_ijj h_ill + (λ_i + λ_l)² h_ill² + (λ_i + λ_j)² h_ijj²`.
///
/// Returns `+∞` when no triple qualifies.
pub fn pair_inequality_min(lambda: &[f64], t: &Sym3Tensor) -> Result<f64> {
    let n = lambda.len();
    check_dims(n, t.n())?;
    if n < 3 {
        return Err(Error::InvalidDimension {
            n,
            reason: "pair inequality needs three distinct indices",
        });
    }
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            for l in j + 1..n {
                if j == i || l == i {
                    continue;
                }
                let s = lambda[i] * lambda[j] + lambda[j] * lambda[l] + lambda[l] * lambda[i];
                if s < 0.0 {
                    continue;
                }
                let (x, y) = (t.get(i, j, j), t.get(i, l, l));
                let v = 2.0 * lambda[i].powi(2) * x * y
                    + (lambda[i] + lambda[l]).powi(2) * y * y
                    + (lambda[i] + lambda[j]).powi(2) * x * x;
                best = best.min(v);
            }
        }
    }
    Ok(best)
}
