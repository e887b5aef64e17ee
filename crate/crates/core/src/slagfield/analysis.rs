use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::field::GraphField;
use super::stencil::{hessian_offset, third_offset};
use crate::error::{Error, Result};
use crate::numkernel::{sym_eigen, SymMatrix};
use crate::regions::{classify, RegionReport, Spectrum};
use crate::stability::evaluate_form;
use crate::sym3tensor::{ambient_norm_sq, project_trace_free, traces, Sym3Tensor};

/// Everything computed at one grid node.
///
/// `frame_eigenvalues` are the Hessian eigenvalues in ascending order; the
/// `second_form` is expressed in that eigenframe. `spectrum` is the same set
/// of numbers in canonical (descending) order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointAnalysis {
    /// Empty when built directly from derivatives.
    pub index: Vec<usize>,
    pub position: Vec<f64>,
    pub hessian: SymMatrix,
    pub spectrum: Spectrum,
    pub frame_eigenvalues: Vec<f64>,
    /// `*Ω = 1/√Π(1 + λ_i²)`.
    pub omega: f64,
    /// `Σ arctan λ_i`, principal branches.
    pub phase: f64,
    /// `Im det(I + i Hess F)`.
    pub im_det: f64,
    pub residual: f64,
    pub second_form: Sym3Tensor,
    /// `Σ_i h_iik`, the mean curvature components.
    pub traces: Vec<f64>,
    pub a_norm_sq: f64,
    /// `-F(h)`, the analytic `Δ ln *Ω`.
    pub analytic_laplacian: f64,
    /// Finite-difference `Δ ln *Ω`, when the node has three nodes of margin.
    pub fd_laplacian: Option<f64>,
    pub region: RegionReport,
}

/// `h_abc = F̃_abc / √((1+λ_a²)(1+λ_b²)(1+λ_c²))` where `F̃` is the third
/// derivative rotated into the eigenframe. `frame[i][a]` is component `i`
/// of eigenvector `a`.
pub fn second_form_in_frame(third: &Sym3Tensor, eigenvalues: &[f64], frame: &[Vec<f64>]) -> Sym3Tensor {
    let n = third.n();
    let stretch: Vec<f64> = eigenvalues.iter().map(|l| (1.0 + l * l).sqrt()).collect();
    Sym3Tensor::from_fn(n, |a, b, c| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    s += third.get(i, j, k) * frame[i][a] * frame[j][b] * frame[k][c];
                }
            }
        }
        s / (stretch[a] * stretch[b] * stretch[c])
    })
}

/// Pointwise quantities from a Hessian and third-derivative tensor, whether
/// they come from stencils or from a closed form.
pub fn analyze_derivatives(
    hessian: &SymMatrix,
    third: &Sym3Tensor,
    c: f64,
    k: f64,
    tol: f64,
) -> Result<PointAnalysis> {
    if hessian.n() != third.n() {
        return Err(Error::DimensionMismatch {
            expected: hessian.n(),
            found: third.n(),
        });
    }
    let eig = sym_eigen(hessian)?;
    let lambda = eig.eigenvalues.clone();
    let second_form = second_form_in_frame(third, &lambda, &eig.vectors_rows());
    let stretch: f64 = lambda.iter().map(|l| (1.0 + l * l).sqrt()).product();
    let phase: f64 = lambda.iter().map(|l| l.atan()).sum();
    let im_det = stretch * phase.sin();
    let spectrum = Spectrum::new(lambda.clone())?;
    let region = classify(&spectrum, k, tol)?;
    Ok(PointAnalysis {
        index: Vec::new(),
        position: Vec::new(),
        hessian: hessian.clone(),
        spectrum,
        omega: 1.0 / stretch,
        phase,
        im_det,
        residual: im_det - c,
        traces: traces(&second_form),
        a_norm_sq: ambient_norm_sq(&second_form),
        analytic_laplacian: -evaluate_form(&lambda, &second_form)?,
        second_form,
        frame_eigenvalues: lambda,
        fd_laplacian: None,
        region,
    })
}

/// Stencil-based analysis at a node with two nodes of margin.
pub fn analyze_point(field: &GraphField, p: &[usize], c: f64, k: f64, tol: f64) -> Result<PointAnalysis> {
    field.require_margin(p, 2)?;
    let zero = vec![0; field.n()];
    let hessian = hessian_offset(field, p, &zero);
    let third = third_offset(field, p, &zero);
    let mut out = analyze_derivatives(&hessian, &third, c, k, tol)?;
    out.index = p.to_vec();
    out.position = field.position(p);
    Ok(out)
}

/// `det(M)` and `M⁻¹` by Gauss–Jordan elimination with partial pivoting.
fn det_inverse(m: &SymMatrix) -> (f64, Vec<Vec<f64>>) {
    let n = m.n();
    let mut a = m.to_rows();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("nonempty");
        if piv != col {
            a.swap(piv, col);
            inv.swap(piv, col);
            det = -det;
        }
        let d = a[col][col];
        det *= d;
        for j in 0..n {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for j in 0..n {
                        a[r][j] -= f * a[col][j];
                        inv[r][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    (det, inv)
}

/// Induced metric `g = I + H²` of the graph of `∇F` in the base coordinates.
fn induced_metric(hessian: &SymMatrix) -> SymMatrix {
    let mut g = hessian.square();
    for i in 0..g.n() {
        g.set(i, i, g.get(i, i) + 1.0);
    }
    g
}

fn log_omega(field: &GraphField, p: &[usize], offset: &[isize]) -> f64 {
    let (det, _) = det_inverse(&induced_metric(&hessian_offset(field, p, offset)));
    -0.5 * det.ln()
}

/// `|D_k *Ω + *Ω Σ_i λ_i h_iik|` for each eigen-direction `k`, where
/// `D_k` differentiates the stencil-computed `*Ω` field along the unit
/// tangent over the `k`-th eigenvector. Needs three nodes of margin.
pub fn gradient_identity_residual(field: &GraphField, p: &[usize]) -> Result<Vec<f64>> {
    field.require_margin(p, 3)?;
    let n = field.n();
    let h = field.spacing();
    let zero = vec![0; n];
    let hessian = hessian_offset(field, p, &zero);
    let third = third_offset(field, p, &zero);
    let eig = sym_eigen(&hessian)?;
    let lambda = &eig.eigenvalues;
    let hform = second_form_in_frame(&third, lambda, &eig.vectors_rows());
    let omega: f64 = 1.0 / lambda.iter().map(|l| (1.0 + l * l).sqrt()).product::<f64>();

    let grad: Vec<f64> = (0..n)
        .map(|j| {
            let mut plus = zero.clone();
            plus[j] = 1;
            let mut minus = zero.clone();
            minus[j] = -1;
            (log_omega(field, p, &plus).exp() - log_omega(field, p, &minus).exp()) / (2.0 * h)
        })
        .collect();

    Ok((0..n)
        .map(|k| {
            let directional: f64 = (0..n).map(|j| eig.component(j, k) * grad[j]).sum();
            let lhs = directional / (1.0 + lambda[k] * lambda[k]).sqrt();
            let rhs = -omega * (0..n).map(|i| lambda[i] * hform.get(i, i, k)).sum::<f64>();
            (lhs - rhs).abs()
        })
        .collect())
}

/// Laplace–Beltrami operator of the induced metric applied to `ln *Ω`,
/// `(1/√g) ∂_i (√g g^{ij} ∂_j ln *Ω)`, with nested central differences.
/// Needs three nodes of margin.
pub fn surface_laplacian(field: &GraphField, p: &[usize]) -> Result<f64> {
    field.require_margin(p, 3)?;
    Ok(surface_laplacian_unchecked(field, p))
}

fn surface_laplacian_unchecked(field: &GraphField, p: &[usize]) -> f64 {
    let n = field.n();
    let h = field.spacing();
    let mut cache: HashMap<Vec<isize>, f64> = HashMap::new();
    let mut u = |o: &[isize]| -> f64 {
        *cache
            .entry(o.to_vec())
            .or_insert_with(|| log_omega(field, p, o))
    };

    let mut div = 0.0;
    for i in 0..n {
        for s in [1isize, -1] {
            let mut q = vec![0isize; n];
            q[i] = s;
            let (det, ginv) = det_inverse(&induced_metric(&hessian_offset(field, p, &q)));
            let grad: Vec<f64> = (0..n)
                .map(|j| {
                    let mut a = q.clone();
                    a[j] += 1;
                    let mut b = q.clone();
                    b[j] -= 1;
                    (u(&a) - u(&b)) / (2.0 * h)
                })
                .collect();
            let flux: f64 = det.sqrt() * (0..n).map(|j| ginv[i][j] * grad[j]).sum::<f64>();
            div += s as f64 * flux;
        }
    }
    let (det_p, _) = det_inverse(&induced_metric(&hessian_offset(field, p, &vec![0; n])));
    div / (2.0 * h) / det_p.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualStats {
    pub c: f64,
    pub c_estimated: bool,
    pub points: usize,
    pub max_abs: f64,
    pub mean: f64,
    pub stddev: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn im_det_at(field: &GraphField, p: &[usize]) -> Result<f64> {
    let eig = sym_eigen(&hessian_offset(field, p, &vec![0; field.n()]))?;
    let stretch: f64 = eig.eigenvalues.iter().map(|l| (1.0 + l * l).sqrt()).product();
    let phase: f64 = eig.eigenvalues.iter().map(|l| l.atan()).sum();
    Ok(stretch * phase.sin())
}

/// Residual of `Im det(I + i Hess F) = c` over all nodes with one node of
/// margin. Without `c`, the median of `Im det` is used.
pub fn slag_residual_stats(field: &GraphField, c: Option<f64>) -> Result<ResidualStats> {
    if let Some(a) = field.shape().iter().position(|&s| s < 5) {
        return Err(Error::Field(format!(
            "residual statistics need at least 5 nodes per axis, axis {a} has {}",
            field.shape()[a]
        )));
    }
    let im: Vec<f64> = field
        .interior(1)
        .par_iter()
        .map(|p| im_det_at(field, p))
        .collect::<Result<_>>()?;
    let (c, c_estimated) = match c {
        Some(c) => (c, false),
        None => (median(im.clone()), true),
    };
    let res: Vec<f64> = im.iter().map(|v| v - c).collect();
    let count = res.len() as f64;
    let mean = res.iter().sum::<f64>() / count;
    let var = res.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / count;
    Ok(ResidualStats {
        c,
        c_estimated,
        points: res.len(),
        max_abs: res.iter().fold(0.0_f64, |m, r| m.max(r.abs())),
        mean,
        stddev: var.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// In `Ξ` but `Δ ln *Ω > 0`.
    XiNotSuperharmonic,
    /// In `Ξ'` but `Δ ln *Ω > -|A|²` on the trace-free part.
    XiPrimeAboveNormBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub index: Vec<usize>,
    pub position: Vec<f64>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    #[serde(flatten)]
    pub analysis: PointAnalysis,
    /// `|analytic_laplacian - fd_laplacian|`.
    pub mismatch: f64,
    /// `-F` and `|h|²` of the trace-free projection of the second form.
    pub analytic_laplacian_trace_free: f64,
    pub a_norm_sq_trace_free: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldReport {
    pub n: usize,
    pub spacing: f64,
    pub shape: Vec<usize>,
    #[serde(rename = "K")]
    pub k: f64,
    pub tolerance: f64,
    pub residual: ResidualStats,
    pub points_analyzed: usize,
    pub xi_points: usize,
    pub xi_prime_points: usize,
    pub max_mismatch: f64,
    pub max_analytic_laplacian_in_xi: Option<f64>,
    pub max_trace_defect: f64,
    pub violations: Vec<Violation>,
    pub points: Vec<PointReport>,
}

/// Pointwise check of the superharmonicity formula over every node with
/// three nodes of margin.
///
/// A point in `Ξ` must have `analytic_laplacian <= tol (1 + |A|²)`. For the `Ξ'` bound the
/// second form is first projected onto the trace-free subspace, since
/// stencil error leaves it only approximately trace-free and the bound is a
/// statement about trace-free tensors.
pub fn superharmonicity_report(
    field: &GraphField,
    k: f64,
    c: Option<f64>,
    tol: f64,
) -> Result<FieldReport> {
    let residual = slag_residual_stats(field, c)?;
    let c = residual.c;
    let points: Vec<PointReport> = field
        .interior(3)
        .par_iter()
        .map(|p| -> Result<PointReport> {
            let mut a = analyze_point(field, p, c, k, tol)?;
            let lap = surface_laplacian_unchecked(field, p);
            a.fd_laplacian = Some(lap);
            let tf = project_trace_free(&a.second_form);
            let rhs_tf = -evaluate_form(&a.frame_eigenvalues, &tf)?;
            Ok(PointReport {
                mismatch: (a.analytic_laplacian - lap).abs(),
                analytic_laplacian_trace_free: rhs_tf,
                a_norm_sq_trace_free: ambient_norm_sq(&tf),
                analysis: a,
            })
        })
        .collect::<Result<_>>()?;

    let mut violations = Vec::new();
    let mut xi_points = 0;
    let mut xi_prime_points = 0;
    let mut max_mismatch = 0.0_f64;
    let mut max_rhs_xi: Option<f64> = None;
    let mut max_trace_defect = 0.0_f64;
    for pr in &points {
        let a = &pr.analysis;
        max_mismatch = max_mismatch.max(pr.mismatch);
        max_trace_defect = a.traces.iter().fold(max_trace_defect, |m, t| m.max(t.abs()));
        if a.region.flags.xi {
            xi_points += 1;
            max_rhs_xi = Some(max_rhs_xi.map_or(a.analytic_laplacian, |m| m.max(a.analytic_laplacian)));
            let bound = tol * (1.0 + a.a_norm_sq);
            if a.analytic_laplacian > bound {
                violations.push(Violation {
                    kind: ViolationKind::XiNotSuperharmonic,
                    index: a.index.clone(),
                    position: a.position.clone(),
                    value: a.analytic_laplacian,
                    bound,
                });
            }
        }
        if a.region.flags.xi_prime {
            xi_prime_points += 1;
            let bound = -pr.a_norm_sq_trace_free + tol * (1.0 + pr.a_norm_sq_trace_free);
            if pr.analytic_laplacian_trace_free > bound {
                violations.push(Violation {
                    kind: ViolationKind::XiPrimeAboveNormBound,
                    index: a.index.clone(),
                    position: a.position.clone(),
                    value: pr.analytic_laplacian_trace_free,
                    bound,
                });
            }
        }
    }
    Ok(FieldReport {
        n: field.n(),
        spacing: field.spacing(),
        shape: field.shape().to_vec(),
        k,
        tolerance: tol,
        residual,
        points_analyzed: points.len(),
        xi_points,
        xi_prime_points,
        max_mismatch,
        max_analytic_laplacian_in_xi: max_rhs_xi,
        max_trace_defect,
        violations,
        points,
    })
}
