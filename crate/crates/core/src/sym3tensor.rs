//! Fully symmetric 3-tensors on ℝⁿ.
//!
//! A tensor is stored by its sorted components `i <= j <= k` in
//! lexicographic order, `n(n+1)(n+2)/6` numbers in all. The ambient inner
//! product is the full `n³` Euclidean one, which on symmetric tensors is the
//! component inner product weighted by multiplicity (1, 3 or 6).
//!
//! The trace-free subspace is `{h : Σ_i h_iik = 0 for every k}`; for a
//! Lagrangian second fundamental form this is minimality.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_finite, Error, Result};

/// Number of sorted components, `n(n+1)(n+2)/6`.
pub fn component_count(n: usize) -> usize {
    n * (n + 1) * (n + 2) / 6
}

/// Number of distinct orderings of a triple.
pub fn multiplicity(index: [usize; 3]) -> usize {
    let [i, j, k] = index;
    if i == j && j == k {
        1
    } else if i == j || j == k || i == k {
        3
    } else {
        6
    }
}

fn sorted(mut index: [usize; 3]) -> [usize; 3] {
    index.sort_unstable();
    index
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Component {
    /// Sorted, zero-based.
    pub index: [usize; 3],
    pub multiplicity: usize,
}

/// All sorted components of dimension `n` in storage order.
pub fn component_table(n: usize) -> Vec<Component> {
    let mut out = Vec::with_capacity(component_count(n));
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                out.push(Component {
                    index: [i, j, k],
                    multiplicity: multiplicity([i, j, k]),
                });
            }
        }
    }
    out
}

/// Storage position of the component `(i, j, k)` in any index order.
pub fn component_index(n: usize, index: [usize; 3]) -> usize {
    let [i, j, k] = sorted(index);
    debug_assert!(k < n);
    let mut pos = 0;
    for a in 0..i {
        let m = n - a;
        pos += m * (m + 1) / 2;
    }
    for b in i..j {
        pos += n - b;
    }
    pos + (k - j)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Sym3Tensor {
    n: usize,
    coeffs: Vec<f64>,
}

impl Sym3Tensor {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            coeffs: vec![0.0; component_count(n)],
        }
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension {
                n,
                reason: "tensor dimension must be positive",
            });
        }
        if coeffs.len() != component_count(n) {
            return Err(Error::DimensionMismatch {
                expected: component_count(n),
                found: coeffs.len(),
            });
        }
        check_finite(&coeffs, "coeffs")?;
        Ok(Self { n, coeffs })
    }

    /// Symmetric tensor with `h_ijk = f(i, j, k)` read off sorted indices.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let coeffs = component_table(n)
            .iter()
            .map(|c| f(c.index[0], c.index[1], c.index[2]))
            .collect();
        Self { n, coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.coeffs[component_index(self.n, [i, j, k])]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let pos = component_index(self.n, [i, j, k]);
        self.coeffs[pos] = value;
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// Ambient inner product `Σ_{ijk} a_ijk b_ijk`.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        component_table(self.n)
            .iter()
            .zip(self.coeffs.iter().zip(&other.coeffs))
            .map(|(c, (a, b))| c.multiplicity as f64 * a * b)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// `Σ_{ijk} h_ijk²` over all `n³` ordered triples.
pub fn ambient_norm_sq(t: &Sym3Tensor) -> f64 {
    t.inner(t)
}

/// `(Σ_i h_iik)_k`.
pub fn traces(t: &Sym3Tensor) -> Vec<f64> {
    (0..t.n)
        .map(|k| (0..t.n).map(|i| t.get(i, i, k)).sum())
        .collect()
}

pub fn max_trace(t: &Sym3Tensor) -> f64 {
    traces(t).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Row `k` holds the coefficient of each component in `Σ_i h_iik`.
fn trace_constraints(n: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![0.0; component_count(n)]; n];
    for (k, row) in rows.iter_mut().enumerate() {
        for i in 0..n {
            row[component_index(n, [i, i, k])] += 1.0;
        }
    }
    rows
}

/// Orthogonal projection onto the trace-free subspace in the ambient inner
/// product.
pub fn project_trace_free(t: &Sym3Tensor) -> Sym3Tensor {
    let n = t.n;
    let table = component_table(n);
    let rows = trace_constraints(n);
    // Riesz representer of trace_k is W⁻¹ C_k.
    let reps: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .zip(&table)
                .map(|(x, c)| x / c.multiplicity as f64)
                .collect()
        })
        .collect();
    let gram: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            reps.iter()
                .map(|s| r.iter().zip(s).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    let rhs = traces(t);
    let mu = cholesky_solve(&gram, &rhs);
    let mut out = t.clone();
    for (rep, m) in reps.iter().zip(&mu) {
        for (o, r) in out.coeffs.iter_mut().zip(rep) {
            *o -= m * r;
        }
    }
    out
}

fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            l[i][j] = if i == j { s.sqrt() } else { s / l[j][j] };
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    x
}

/// Ambient-orthonormal basis of the trace-free subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFreeBasis {
    n: usize,
    elements: Vec<Sym3Tensor>,
}

impl TraceFreeBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn elements(&self) -> &[Sym3Tensor] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Coordinates of `t` along the basis.
    pub fn coordinates(&self, t: &Sym3Tensor) -> Vec<f64> {
        self.elements.iter().map(|e| e.inner(t)).collect()
    }

    pub fn combine(&self, coords: &[f64]) -> Sym3Tensor {
        self.elements
            .iter()
            .zip(coords)
            .fold(Sym3Tensor::zeros(self.n), |acc, (e, c)| acc.add(&e.scaled(*c)))
    }
}

/// Gram–Schmidt (two passes) over the projected unit components.
pub fn trace_free_basis(n: usize) -> TraceFreeBasis {
    let dim = component_count(n) - n;
    let mut elements: Vec<Sym3Tensor> = Vec::with_capacity(dim);
    for pos in 0..component_count(n) {
        if elements.len() == dim {
            break;
        }
        let mut e = Sym3Tensor::zeros(n);
        e.coeffs[pos] = 1.0;
        let mut v = project_trace_free(&e);
        let start = ambient_norm_sq(&v).sqrt();
        if start < 1e-12 {
            continue;
        }
        for _ in 0..2 {
            for b in &elements {
                let d = b.inner(&v);
                v = v.sub(&b.scaled(d));
            }
        }
        let norm = ambient_norm_sq(&v).sqrt();
        if norm > 1e-8 * start {
            elements.push(v.scaled(1.0 / norm));
        }
    }
    assert_eq!(elements.len(), dim, "trace-free basis has wrong dimension");
    TraceFreeBasis { n, elements }
}

/// Unit-norm trace-free tensor drawn from the projected standard normal
/// distribution; the stream is fixed by `seed`.
pub fn random_trace_free(n: usize, seed: u64) -> Result<Sym3Tensor> {
    if n < 2 {
        return Err(Error::InvalidDimension {
            n,
            reason: "trace-free subspace is trivial for n < 2",
        });
    }
    let mut rng = crate::seeded_rng(seed, 0);
    loop {
        let raw = Sym3Tensor {
            n,
            coeffs: (0..component_count(n))
                .map(|_| StandardNormal.sample(&mut rng))
                .collect(),
        };
        let p = project_trace_free(&raw);
        let norm = ambient_norm_sq(&p).sqrt();
        if norm > 1e-6 {
            return Ok(p.scaled(1.0 / norm));
        }
    }
}

/// Symmetric (not trace-free) tensor with standard normal components.
pub fn random_symmetric(n: usize, seed: u64) -> Sym3Tensor {
    let mut rng = crate::seeded_rng(seed, 1);
    Sym3Tensor {
        n,
        coeffs: (0..component_count(n))
            .map(|_| StandardNormal.sample(&mut rng))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_norm_sq(t: &Sym3Tensor) -> f64 {
        let n = t.n();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    s += t.get(i, j, k).powi(2);
                }
            }
        }
        s
    }

    #[test]
    fn component_tables() {
        assert_eq!(
            component_table(1),
            vec![Component {
                index: [0, 0, 0],
                multiplicity: 1
            }]
        );
        let t2: Vec<usize> = component_table(2).iter().map(|c| c.multiplicity).collect();
        assert_eq!(t2, vec![1, 3, 3, 1]);
        let t3 = component_table(3);
        assert_eq!(t3.len(), 10);
        let c123 = t3.iter().find(|c| c.index == [0, 1, 2]).unwrap();
        assert_eq!(c123.multiplicity, 6);
        for n in 1..=8 {
            let t = component_table(n);
            assert_eq!(t.len(), component_count(n));
            assert_eq!(t.iter().map(|c| c.multiplicity).sum::<usize>(), n * n * n);
            for (pos, c) in t.iter().enumerate() {
                assert_eq!(component_index(n, c.index), pos);
                let [i, j, k] = c.index;
                assert_eq!(component_index(n, [k, i, j]), pos);
            }
        }
    }

    #[test]
    fn norm_examples() {
        assert_eq!(ambient_norm_sq(&Sym3Tensor::zeros(3)), 0.0);
        let (a, b) = (0.7, -1.3);
        let t = Sym3Tensor::from_coeffs(2, vec![a, b, -a, -b]).unwrap();
        assert!((ambient_norm_sq(&t) - 4.0 * (a * a + b * b)).abs() < 1e-14);
        let mut w = Sym3Tensor::zeros(3);
        w.set(0, 0, 1, 1.0);
        w.set(1, 2, 2, -1.0);
        assert_eq!(ambient_norm_sq(&w), 6.0);
        assert_eq!(traces(&w), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn trace_examples() {
        assert_eq!(traces(&Sym3Tensor::zeros(3)), vec![0.0; 3]);
        let mut t = Sym3Tensor::zeros(2);
        t.set(0, 0, 0, 1.0);
        assert_eq!(traces(&t), vec![1.0, 0.0]);
    }

    #[test]
    fn basis_sizes_and_orthonormality() {
        assert_eq!(trace_free_basis(1).dim(), 0);
        assert_eq!(trace_free_basis(2).dim(), 2);
        assert_eq!(trace_free_basis(3).dim(), 7);
        for n in 2..=6 {
            let b = trace_free_basis(n);
            assert_eq!(b.dim(), component_count(n) - n);
            for (a, ea) in b.elements().iter().enumerate() {
                assert!(max_trace(ea) < 1e-12);
                for (c, ec) in b.elements().iter().enumerate() {
                    let want = if a == c { 1.0 } else { 0.0 };
                    assert!((ea.inner(ec) - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn projection_two_dim_hand_value() {
        // Minimizing (a-1)² + 3b² + 3a² + b² over trace-free (a, b, -a, -b)
        // gives a = 1/4, b = 0.
        let mut t = Sym3Tensor::zeros(2);
        t.set(0, 0, 0, 1.0);
        let p = project_trace_free(&t);
        let want = [0.25, 0.0, -0.25, 0.0];
        for (x, y) in p.coeffs().iter().zip(want) {
            assert!((x - y).abs() < 1e-14, "{:?}", p.coeffs());
        }
    }

    #[test]
    fn projection_of_trace_free_and_zero() {
        assert_eq!(project_trace_free(&Sym3Tensor::zeros(4)), Sym3Tensor::zeros(4));
        let t = random_trace_free(4, 3).unwrap();
        let p = project_trace_free(&t);
        for (x, y) in p.coeffs().iter().zip(t.coeffs()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn random_trace_free_contract() {
        assert!(random_trace_free(1, 0).is_err());
        assert_eq!(random_trace_free(2, 7).unwrap(), random_trace_free(2, 7).unwrap());
        assert_ne!(random_trace_free(3, 7).unwrap(), random_trace_free(3, 8).unwrap());
        for seed in 0..20 {
            let t = random_trace_free(2 + (seed as usize % 5), seed).unwrap();
            assert!(max_trace(&t) < 1e-12);
            assert!((ambient_norm_sq(&t) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_spans_projection() {
        for n in 2..=5 {
            let b = trace_free_basis(n);
            for seed in 0..20 {
                let t = random_symmetric(n, seed + 100 * n as u64);
                let via_basis = b.combine(&b.coordinates(&t));
                let direct = project_trace_free(&t);
                for (x, y) in via_basis.coeffs().iter().zip(direct.coeffs()) {
                    assert!((x - y).abs() < 1e-10);
                }
            }
        }
    }

    fn tensor_strategy() -> impl Strategy<Value = Sym3Tensor> {
        (1usize..=6).prop_flat_map(|n| {
            prop::collection::vec(-10.0f64..10.0, component_count(n))
                .prop_map(move |c| Sym3Tensor::from_coeffs(n, c).unwrap())
        })
    }

    proptest! {
        #[test]
        fn weighted_norm_matches_full_sum(t in tensor_strategy()) {
            let a = ambient_norm_sq(&t);
            prop_assert!((a - brute_norm_sq(&t)).abs() <= 1e-12 * (1.0 + a));
        }

        #[test]
        fn projection_idempotent_and_orthogonal(t in tensor_strategy()) {
            let p = project_trace_free(&t);
            let scale = 1.0 + t.max_abs();
            prop_assert!(max_trace(&p) < 1e-12 * scale);
            let pp = project_trace_free(&p);
            for (x, y) in pp.coeffs().iter().zip(p.coeffs()) {
                prop_assert!((x - y).abs() < 1e-12 * scale);
            }
            // Residual is orthogonal to every trace-free direction.
            let r = t.sub(&p);
            if t.n() >= 2 {
                for e in trace_free_basis(t.n()).elements() {
                    prop_assert!(e.inner(&r).abs() < 1e-11 * scale);
                }
            }
            // p + r reconstructs t.
            let back = p.add(&r);
            for (x, y) in back.coeffs().iter().zip(t.coeffs()) {
                prop_assert!((x - y).abs() < 1e-12 * scale);
            }
        }
    }
}
