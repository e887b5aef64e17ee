//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! status 1 if any criterion fails.

use std::f64::consts::FRAC_PI_4;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use slag_core::gaussmap::{lewy_rotate, RotationAngle};
use slag_core::numkernel::restricted_min_eigenvalue;
use slag_core::regions::{classify, m_margin, region_scan, ScanCondition, ScanConfig, Spectrum};
use slag_core::slagfield::{
    analyze_derivatives, gradient_identity_residual, slag_residual_stats, surface_laplacian,
    Builtin, GridSpec,
};
use slag_core::stability::{
    bracket_identity_residual, evaluate_ambient_form, evaluate_form, form_coefficients,
    pair_inequality_min, trace_identity_residual, weighted_traces, AmbientSecondForm,
};
use slag_core::sym3tensor::{
    ambient_norm_sq, random_symmetric, random_trace_free, trace_free_basis, Sym3Tensor,
};

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_spectrum(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| r.random_range(lo..=hi)).collect()
}

fn triple_sums_nonnegative(l: &[f64]) -> bool {
    let n = l.len();
    (0..n).all(|i| {
        (i + 1..n).all(|j| (j + 1..n).all(|k| l[i] * l[j] + l[j] * l[k] + l[k] * l[i] >= 0.0))
    })
}

fn order(errs: &[f64]) -> f64 {
    errs.windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .fold(f64::INFINITY, f64::min)
}

fn harmonic(h: f64) -> slag_core::slagfield::GraphField {
    Builtin::HarmonicExpCos.sample(GridSpec::new(0.5, h)).unwrap()
}

const HS: [f64; 3] = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];

fn xi_subset_m() -> Outcome {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    let mut parts = Vec::new();
    for n in 2..=5 {
        let cfg = ScanConfig::new(n, 3.0, 500, 1000 + n as u64).with_condition(ScanCondition::Xi);
        let s = region_scan(&cfg).unwrap();
        let w = s.extremes.min_m.value;
        worst = worst.min(w);
        parts.push(format!("n={n}: {w:.4}"));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst >= -1e-9 && secs <= 30.0,
        format!("min m margin over Ξ samples [{}], {secs:.1}s", parts.join(", ")),
    )
}

fn xi_prime_strengthened() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 3..=5 {
        let cfg = ScanConfig::new(n, 3.0, 500, 2000 + n as u64).with_condition(ScanCondition::XiPrime);
        let s = region_scan(&cfg).unwrap();
        let w = s.extremes.min_strengthened.value;
        pass &= w >= -1e-9;
        parts.push(format!("n={n}: {w:.4}"));
    }
    outcome(pass, format!("min strengthened margin over Ξ' samples [{}]", parts.join(", ")))
}

fn two_dim_vacuity() -> Outcome {
    let s = region_scan(&ScanConfig::new(2, 10.0, 500, 3000)).unwrap();
    let w = s.extremes.min_strengthened.value;
    outcome(w >= -1e-9, format!("min strengthened margin on [-10,10]²: {w:.6}"))
}

fn witness_fixture() -> Outcome {
    let mut h = Sym3Tensor::zeros(3);
    h.set(0, 0, 1, 1.0);
    h.set(1, 2, 2, -1.0);
    let f = evaluate_form(&[10.0, -10.0, 0.0], &h).unwrap();
    let m = m_margin(&Spectrum::new(vec![10.0, -10.0, 0.0]).unwrap());
    outcome(
        (f + 94.0).abs() <= 1e-9 && m <= -15.0,
        format!("F(witness) = {f}, m margin = {m:.6}"),
    )
}

fn margin_fixture() -> Outcome {
    let m = m_margin(&Spectrum::new(vec![2.0, -0.5]).unwrap());
    outcome((m - 1.5625).abs() <= 1e-9, format!("m margin of (2, -0.5) = {m}"))
}

fn lewy_convex() -> Outcome {
    let mut r = rng(6000);
    let mut max_abs = 0.0_f64;
    let mut outside = 0;
    for _ in 0..500 {
        let spec = Spectrum::new(uniform_spectrum(&mut r, 3, 0.0, 100.0)).unwrap();
        let rot = lewy_rotate(&spec, RotationAngle::new(FRAC_PI_4).unwrap()).unwrap();
        max_abs = max_abs.max(rot.max_abs());
        let c = classify(&rot, 1.0, 1e-12).unwrap();
        if !(c.flags.xi && c.flags.ball) {
            outside += 1;
        }
    }
    outcome(
        max_abs <= 1.0 + 1e-12 && outside == 0,
        format!("max |rotated λ| = {max_abs:.12}, outside Ξ ∩ 𝔅_1: {outside}"),
    )
}

fn bracket_identity() -> Outcome {
    let mut r = rng(7000);
    let mut worst = 0.0_f64;
    for s in 0..200u64 {
        let n = 2 + (s % 3) as usize;
        let lambda = uniform_spectrum(&mut r, n, -5.0, 5.0);
        let t = random_symmetric(n, 7000 + s);
        let f = evaluate_form(&lambda, &t).unwrap();
        let g = evaluate_ambient_form(&lambda, &AmbientSecondForm::lagrangianize(&t)).unwrap();
        let grad: f64 = weighted_traces(&lambda, &t).unwrap().iter().map(|x| x * x).sum();
        let res = bracket_identity_residual(&lambda, &t).unwrap();
        let scale = f.abs().max(g.abs()).max(grad).max(1.0);
        worst = worst.max(res.abs() / scale);
    }
    outcome(worst <= 1e-10, format!("max relative residual {worst:.3e}"))
}

fn trace_identity() -> Outcome {
    let mut r = rng(8000);
    let mut worst = 0.0_f64;
    for s in 0..200u64 {
        let n = 3 + (s % 3) as usize;
        let lambda = uniform_spectrum(&mut r, n, -5.0, 5.0);
        let t = random_trace_free(n, 8000 + s).unwrap();
        worst = worst.max(trace_identity_residual(&lambda, &t).unwrap());
    }
    outcome(worst <= 1e-9, format!("max residual {worst:.3e}"))
}

fn pair_inequality() -> Outcome {
    let mut r = rng(9000);
    let mut worst = f64::INFINITY;
    for s in 0..200u64 {
        let n = 3 + (s % 3) as usize;
        let lambda = loop {
            let l = uniform_spectrum(&mut r, n, -3.0, 3.0);
            if triple_sums_nonnegative(&l) {
                break l;
            }
        };
        let t = random_trace_free(n, 9000 + s).unwrap().scaled(r.random_range(0.1..10.0));
        let v = pair_inequality_min(&lambda, &t).unwrap() / ambient_norm_sq(&t);
        worst = worst.min(v);
    }
    outcome(worst >= -1e-10, format!("min of pair term / |T|² = {worst:.3e}"))
}

fn gradient_identity() -> Outcome {
    let errs: Vec<f64> = HS
        .iter()
        .map(|&h| {
            let f = harmonic(h);
            let p = f.node_at(&[0.0, 0.0]).unwrap();
            gradient_identity_residual(&f, &p).unwrap().into_iter().fold(0.0, f64::max)
        })
        .collect();
    let q = order(&errs);
    outcome(
        q >= 1.8,
        format!("residuals {:.3e} {:.3e} {:.3e}, order {q:.2}", errs[0], errs[1], errs[2]),
    )
}

fn laplacian_cross_check() -> Outcome {
    let b = Builtin::HarmonicExpCos;
    let x = [0.0, 0.0];
    let exact = analyze_derivatives(&b.hessian(&x), &b.third(&x), 0.0, 2.0, 1e-9).unwrap();
    let analytic_err = (exact.analytic_laplacian + 0.5).abs();
    let errs: Vec<f64> = HS
        .iter()
        .map(|&h| {
            let f = harmonic(h);
            let p = f.node_at(&x).unwrap();
            (surface_laplacian(&f, &p).unwrap() + 0.5).abs()
        })
        .collect();
    let rel = errs[2] / 0.5;
    let q = order(&errs);
    outcome(
        analytic_err <= 1e-10 && rel <= 0.05 && q >= 1.5,
        format!(
            "analytic rhs {} (err {analytic_err:.1e}), fd rel err {rel:.2e} at h=1/256, order {q:.2}",
            exact.analytic_laplacian
        ),
    )
}

fn phase_residual() -> Outcome {
    let mut worst_sd = 0.0_f64;
    for d in [
        "quadratic:1:0.7",
        "quadratic:2:1,0.5,-1",
        "quadratic:2:3,-2,0.25",
        "quadratic:3:1,0.2,0.3,-1,0.1,2",
        "paraboloid:2:1.5",
        "paraboloid:3:0.5",
    ] {
        let b = Builtin::parse(d).unwrap();
        let s = slag_residual_stats(&b.sample(b.default_grid()).unwrap(), None).unwrap();
        worst_sd = worst_sd.max(s.stddev);
    }
    let errs: Vec<f64> = HS
        .iter()
        .map(|&h| slag_residual_stats(&harmonic(h), Some(0.0)).unwrap().max_abs)
        .collect();
    let q = order(&errs);
    outcome(
        worst_sd <= 1e-12 && q >= 1.8,
        format!("quadratic stddev max {worst_sd:.1e}, harmonic max|res| order {q:.2}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut r = rng(13000);
    let mut worst_gap = f64::INFINITY;
    let mut worst_2d = 0.0_f64;
    for n in [2usize, 3] {
        let basis = trace_free_basis(n);
        for s in 0..20u64 {
            let lambda = uniform_spectrum(&mut r, n, -3.0, 3.0);
            let spec = Spectrum::new(lambda).unwrap();
            let eig = restricted_min_eigenvalue(&form_coefficients(&spec), &basis).unwrap();
            let seed0 = (n as u64) << 40 | s << 20;
            let sampled = (0..100_000u64)
                .into_par_iter()
                .map(|i| {
                    let h = random_trace_free(n, seed0 + i).unwrap();
                    evaluate_form(&spec, &h).unwrap()
                })
                .reduce(|| f64::INFINITY, f64::min);
            worst_gap = worst_gap.min(sampled - eig);
            if n == 2 {
                worst_2d = worst_2d.max((sampled - eig).abs());
            }
        }
    }
    outcome(
        worst_gap >= -1e-6 && worst_2d <= 1e-3,
        format!("min(sampled - eigen) = {worst_gap:.3e}, max 2D gap {worst_2d:.3e}"),
    )
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("xi_subset_m", xi_subset_m),
        ("xi_prime_strengthened_bound", xi_prime_strengthened),
        ("two_dim_strengthened_vacuity", two_dim_vacuity),
        ("witness_outside_m", witness_fixture),
        ("margin_two_dim_fixture", margin_fixture),
        ("lewy_rotation_convex", lewy_convex),
        ("bracket_identity", bracket_identity),
        ("trace_identity", trace_identity),
        ("pair_inequality", pair_inequality),
        ("gradient_identity_order", gradient_identity),
        ("laplacian_cross_check", laplacian_cross_check),
        ("phase_residual", phase_residual),
        ("oracle_equivalence", oracle_equivalence),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
