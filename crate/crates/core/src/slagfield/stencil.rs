//! Central-difference stencils. All are exact on polynomials one degree
//! above the derivative order, up to rounding.

use super::field::GraphField;
use crate::error::Result;
use crate::numkernel::SymMatrix;
use crate::sym3tensor::Sym3Tensor;

/// Hessian at `p + offset` without margin checks.
pub(crate) fn hessian_offset(field: &GraphField, p: &[usize], offset: &[isize]) -> SymMatrix {
    let n = field.n();
    let h2 = field.spacing() * field.spacing();
    let mut o = offset.to_vec();
    let at = |o: &mut Vec<isize>, d: &[(usize, isize)]| {
        for &(a, s) in d {
            o[a] += s;
        }
        let v = field.at(p, o);
        for &(a, s) in d {
            o[a] -= s;
        }
        v
    };
    let center = at(&mut o, &[]);
    SymMatrix::from_fn(n, |i, j| {
        if i == j {
            (at(&mut o, &[(i, 1)]) - 2.0 * center + at(&mut o, &[(i, -1)])) / h2
        } else {
            (at(&mut o, &[(i, 1), (j, 1)]) - at(&mut o, &[(i, 1), (j, -1)])
                - at(&mut o, &[(i, -1), (j, 1)])
                + at(&mut o, &[(i, -1), (j, -1)]))
                / (4.0 * h2)
        }
    })
}

/// Second-order Hessian at an interior node (one node of margin).
pub fn hessian_at(field: &GraphField, p: &[usize]) -> Result<SymMatrix> {
    field.require_margin(p, 1)?;
    Ok(hessian_offset(field, p, &vec![0; field.n()]))
}

pub(crate) fn third_offset(field: &GraphField, p: &[usize], offset: &[isize]) -> Sym3Tensor {
    let n = field.n();
    let h = field.spacing();
    // dh[k] = (H(q + e_k) - H(q - e_k)) / 2h
    let dh: Vec<SymMatrix> = (0..n)
        .map(|k| {
            let mut plus = offset.to_vec();
            plus[k] += 1;
            let mut minus = offset.to_vec();
            minus[k] -= 1;
            let hp = hessian_offset(field, p, &plus);
            let hm = hessian_offset(field, p, &minus);
            SymMatrix::from_fn(n, |i, j| (hp.get(i, j) - hm.get(i, j)) / (2.0 * h))
        })
        .collect();
    Sym3Tensor::from_fn(n, |i, j, k| (dh[k].get(i, j) + dh[j].get(i, k) + dh[i].get(j, k)) / 3.0)
}

/// Third derivatives `F_ijk` by differencing neighboring Hessian stencils,
/// symmetrized over the three choices of the differentiated index. Needs two
/// nodes of margin.
pub fn third_derivatives_at(field: &GraphField, p: &[usize]) -> Result<Sym3Tensor> {
    field.require_margin(p, 2)?;
    Ok(third_offset(field, p, &vec![0; field.n()]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::slagfield::field::{Builtin, GridSpec};

    #[test]
    fn quadratic_hessian_is_exact() {
        let b = Builtin::parse("quadratic:2:1,0.5,-1").unwrap();
        let f = b.sample(GridSpec::new(1.0, 1.0 / 16.0)).unwrap();
        for p in f.interior(1) {
            let h = hessian_at(&f, &p).unwrap();
            for (x, y) in h.packed().iter().zip([1.0, 0.5, -1.0]) {
                assert!((x - y).abs() < 1e-10);
            }
        }
        for p in f.interior(2).into_iter().step_by(37) {
            assert!(third_derivatives_at(&f, &p).unwrap().max_abs() < 1e-10);
        }
    }

    #[test]
    fn quadratic_three_dim_third_is_zero() {
        let b = Builtin::parse("quadratic:3:1,0.2,0.3,-1,0.1,2").unwrap();
        let f = b.sample(GridSpec::new(0.5, 0.125)).unwrap();
        for p in f.interior(2) {
            assert!(third_derivatives_at(&f, &p).unwrap().max_abs() < 1e-10);
        }
    }

    #[test]
    fn odd_function_second_derivative() {
        let f = GraphField::from_fn(vec![-0.5], 0.1, vec![11], |x| x[0].powi(3)).unwrap();
        let p = f.node_at(&[0.0]).unwrap();
        assert!(hessian_at(&f, &p).unwrap().get(0, 0).abs() < 1e-12);
    }

    #[test]
    fn cubic_third_derivative() {
        let f = GraphField::from_fn(vec![-0.5], 0.1, vec![11], |x| x[0].powi(3) / 6.0).unwrap();
        for p in f.interior(2) {
            assert!((third_derivatives_at(&f, &p).unwrap().get(0, 0, 0) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn mixed_cubic_is_exact() {
        // F = x²y + x y z + z³, F_xxy = 2, F_xyz = 1, F_zzz = 6.
        let f = GraphField::from_fn(vec![-0.3; 3], 0.1, vec![7; 3], |x| {
            x[0] * x[0] * x[1] + x[0] * x[1] * x[2] + x[2].powi(3)
        })
        .unwrap();
        let t = third_derivatives_at(&f, &[3, 3, 3]).unwrap();
        assert!((t.get(0, 0, 1) - 2.0).abs() < 1e-9);
        assert!((t.get(0, 1, 2) - 1.0).abs() < 1e-9);
        assert!((t.get(2, 2, 2) - 6.0).abs() < 1e-9);
        assert!(t.get(0, 0, 0).abs() < 1e-9 && t.get(1, 1, 2).abs() < 1e-9);
    }

    #[test]
    fn harmonic_origin_converges() {
        let mut errs = Vec::new();
        for h in [1.0 / 16.0, 1.0 / 32.0] {
            let f = Builtin::HarmonicExpCos.sample(GridSpec::new(0.5, h)).unwrap();
            let p = f.node_at(&[0.0, 0.0]).unwrap();
            let hs = hessian_at(&f, &p).unwrap();
            let t = third_derivatives_at(&f, &p).unwrap();
            let eh = [hs.get(0, 0) - 1.0, hs.get(0, 1), hs.get(1, 1) + 1.0];
            let et = [t.get(0, 0, 0) - 1.0, t.get(0, 0, 1), t.get(0, 1, 1) + 1.0, t.get(1, 1, 1)];
            let e = eh.iter().chain(&et).fold(0.0_f64, |m, v| m.max(v.abs()));
            errs.push(e);
        }
        assert!(errs[0] < 1e-2);
        assert!(errs[0] / errs[1] > 3.5, "{errs:?}");
    }

    #[test]
    fn boundary_rejection() {
        let f = GraphField::from_fn(vec![0.0], 1.0, vec![5], |x| x[0]).unwrap();
        assert!(matches!(hessian_at(&f, &[0]), Err(Error::Boundary { .. })));
        assert!(matches!(third_derivatives_at(&f, &[1]), Err(Error::Boundary { .. })));
        assert!(third_derivatives_at(&f, &[2]).is_ok());
    }
}
