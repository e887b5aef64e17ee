//! Graphical Lagrangian planes and the diagonal rotation action on them.
//!
//! Rotating every `(x_i, y_i)` coordinate plane of ℂⁿ by the same angle `θ`
//! is a unitary map. On the graph of a symmetric slope matrix it shifts the
//! slope angle of each eigen-direction: `arctan λ_i ↦ arctan λ_i - θ`. At
//! `θ = π/4` this is the Lewy transformation, `λ ↦ (λ - 1)/(λ + 1)`, which
//! sends convex potentials (`λ >= 0`) to slopes in `[-1, 1]`.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkernel::{sym_eigen, SymMatrix};
use crate::regions::{Spectrum, DEFAULT_TOLERANCE};

const POLE_TOL: f64 = 1e-12;
/// Number of grid points in `(-π/2, π/2]`, i.e. a step of `π/720`.
pub const ROTATION_GRID: usize = 720;

/// The graph of a symmetric linear map `L: ℝⁿ → ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianPlane {
    slope: SymMatrix,
    spectrum: Spectrum,
}

impl LagrangianPlane {
    pub fn new(slope: SymMatrix) -> Result<Self> {
        let spectrum = plane_spectrum(&slope)?;
        Ok(Self { slope, spectrum })
    }

    pub fn slope(&self) -> &SymMatrix {
        &self.slope
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }
}

pub fn plane_spectrum(slope: &SymMatrix) -> Result<Spectrum> {
    Spectrum::new(sym_eigen(slope)?.eigenvalues)
}

/// Simultaneous rotation angle, normalized into `(-π/2, π/2]`. The action on
/// spectra has period π, so nothing is lost.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct RotationAngle(f64);

impl RotationAngle {
    pub const LEWY: RotationAngle = RotationAngle(std::f64::consts::FRAC_PI_4);

    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::NonFinite {
                location: "theta".into(),
                value: theta,
            });
        }
        let mut t = theta.rem_euclid(PI);
        if t > FRAC_PI_2 {
            t -= PI;
        }
        // rem_euclid maps -π/2 to π/2 already; guard the rounding edge.
        if t <= -FRAC_PI_2 {
            t += PI;
        }
        Ok(Self(t))
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

fn rotate_slope(lambda: f64, cos: f64, sin: f64) -> Result<f64> {
    let den = cos + lambda * sin;
    if den.abs() <= POLE_TOL {
        return Err(Error::VerticalPlane {
            slope: lambda,
            denominator: den,
        });
    }
    Ok((lambda * cos - sin) / den)
}

/// `λ̄_i = (λ_i cos θ - sin θ)/(cos θ + λ_i sin θ) = tan(arctan λ_i - θ)`.
pub fn lewy_rotate(spec: &Spectrum, angle: RotationAngle) -> Result<Spectrum> {
    let (sin, cos) = angle.0.sin_cos();
    let rotated = spec
        .iter()
        .map(|&l| rotate_slope(l, cos, sin))
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(rotated)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationSearch {
    #[serde(rename = "K")]
    pub k: f64,
    pub tolerance: f64,
    pub admissible: bool,
    /// Best grid angle; `None` only if every grid angle hits a pole.
    pub theta: Option<RotationAngle>,
    /// Worst-case `K - max|λ̄|` over the family at `theta`.
    pub ball_margin: f64,
    /// Worst-case `min λ̄_iλ̄_j + 1` over the family at `theta`.
    pub xi_margin: f64,
    pub grid_points: usize,
    pub skipped_poles: usize,
}

impl RotationSearch {
    pub fn admissible_angle(&self) -> Option<RotationAngle> {
        self.admissible.then_some(self.theta).flatten()
    }
}

fn family_margins(spectra: &[Spectrum], angle: RotationAngle, k: f64) -> Option<(f64, f64)> {
    let mut ball = f64::INFINITY;
    let mut xi = f64::INFINITY;
    for s in spectra {
        let r = lewy_rotate(s, angle).ok()?;
        ball = ball.min(k - r.max_abs());
        for i in 0..r.n() {
            for j in i + 1..r.n() {
                xi = xi.min(r[i] * r[j] + 1.0);
            }
        }
    }
    Some((ball, xi))
}

/// Grid search over `θ ∈ (-π/2, π/2]` with step `π/720` for a rotation that
/// places every spectrum of the family in `Ξ ∩ 𝔅_K`.
///
/// The chosen angle maximizes the worst-case `(ball, xi)` margin pair in
/// lexicographic order. Angles at which some slope is vertical are skipped.
pub fn find_admissible_rotation(spectra: &[Spectrum], k: f64) -> Result<RotationSearch> {
    find_admissible_rotation_with(spectra, k, DEFAULT_TOLERANCE)
}

pub fn find_admissible_rotation_with(
    spectra: &[Spectrum],
    k: f64,
    tol: f64,
) -> Result<RotationSearch> {
    if spectra.is_empty() {
        return Err(Error::InvalidParameter {
            name: "spectra",
            reason: "family must be nonempty".into(),
        });
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParameter {
            name: "K",
            reason: format!("must be positive and finite, got {k}"),
        });
    }
    let step = PI / ROTATION_GRID as f64;
    let evaluated: Vec<(usize, Option<(f64, f64)>)> = (1..=ROTATION_GRID)
        .into_par_iter()
        .map(|g| {
            let angle = RotationAngle(-FRAC_PI_2 + g as f64 * step);
            (g, family_margins(spectra, angle, k))
        })
        .collect();

    let mut best: Option<(usize, f64, f64)> = None;
    let mut skipped = 0;
    for (g, m) in evaluated {
        let Some((ball, xi)) = m else {
            skipped += 1;
            continue;
        };
        let better = match best {
            None => true,
            Some((_, b, x)) => ball > b || (ball == b && xi > x),
        };
        if better {
            best = Some((g, ball, xi));
        }
    }
    Ok(match best {
        Some((g, ball, xi)) => RotationSearch {
            k,
            tolerance: tol,
            admissible: ball >= -tol && xi >= -tol,
            theta: Some(RotationAngle(-FRAC_PI_2 + g as f64 * step)),
            ball_margin: ball,
            xi_margin: xi,
            grid_points: ROTATION_GRID,
            skipped_poles: skipped,
        },
        None => RotationSearch {
            k,
            tolerance: tol,
            admissible: false,
            theta: None,
            ball_margin: f64::NEG_INFINITY,
            xi_margin: f64::NEG_INFINITY,
            grid_points: ROTATION_GRID,
            skipped_poles: skipped,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn plane_spectra() {
        assert_eq!(plane_spectrum(&SymMatrix::zeros(3)).unwrap().values(), &[0.0; 3]);
        assert_eq!(
            plane_spectrum(&SymMatrix::diagonal(&[2.0, -0.5])).unwrap().values(),
            &[2.0, -0.5]
        );
        let s = plane_spectrum(&SymMatrix::from_packed(2, vec![0.0, 1.0, 0.0]).unwrap()).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(RotationAngle::new(0.0).unwrap().radians(), 0.0);
        let a = RotationAngle::new(-FRAC_PI_2).unwrap().radians();
        assert!((a - FRAC_PI_2).abs() < 1e-15);
        let a = RotationAngle::new(PI + 0.25).unwrap().radians();
        assert!((a - 0.25).abs() < 1e-12);
        assert!(RotationAngle::new(f64::NAN).is_err());
    }

    #[test]
    fn rotation_examples() {
        let s = spec(&[0.3, -2.0, 7.0]);
        assert_eq!(lewy_rotate(&s, RotationAngle::new(0.0).unwrap()).unwrap(), s);

        let r = lewy_rotate(&spec(&[0.0, 1.0]), RotationAngle::LEWY).unwrap();
        assert!(r[0].abs() < 1e-15 && (r[1] + 1.0).abs() < 1e-15);

        let r = lewy_rotate(&spec(&[3.0]), RotationAngle::LEWY).unwrap();
        assert!((r[0] - 0.5).abs() < 1e-15);
        assert!((r[0] - (3f64.atan() - FRAC_PI_4).tan()).abs() < 1e-15);
    }

    #[test]
    fn pole_is_an_error() {
        // cos θ + λ sin θ = 0 at λ = -1, θ = π/4.
        assert!(matches!(
            lewy_rotate(&spec(&[-1.0, 2.0]), RotationAngle::LEWY),
            Err(Error::VerticalPlane { .. })
        ));
    }

    #[test]
    fn phase_covariance_and_composition() {
        let s = spec(&[4.0, 0.7, -0.2, -3.0]);
        for (t1, t2) in [(0.3, 0.4), (-1.1, 0.5), (1.2, 1.0)] {
            let a1 = RotationAngle::new(t1).unwrap();
            let r1 = lewy_rotate(&s, a1).unwrap();
            let mut want: Vec<f64> = s.iter().map(|l| l.atan() - t1).collect();
            let mut got: Vec<f64> = r1.iter().map(|l| l.atan()).collect();
            want.iter_mut().for_each(|w| *w = w.rem_euclid(PI));
            got.iter_mut().for_each(|w| *w = w.rem_euclid(PI));
            want.sort_by(f64::total_cmp);
            got.sort_by(f64::total_cmp);
            for (w, g) in want.iter().zip(&got) {
                let d = (w - g).rem_euclid(PI);
                assert!(d.min(PI - d) < 1e-12);
            }
            let two = lewy_rotate(&r1, RotationAngle::new(t2).unwrap()).unwrap();
            let once = lewy_rotate(&s, RotationAngle::new(t1 + t2).unwrap()).unwrap();
            for (a, b) in two.iter().zip(once.iter()) {
                assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn flat_family_admits_zero_rotation() {
        let s = find_admissible_rotation(&[spec(&[0.0, 0.0, 0.0])], 0.5).unwrap();
        assert!(s.admissible);
        let theta = s.theta.unwrap().radians();
        assert!(theta.abs() < 1e-12, "{theta}");
    }

    #[test]
    fn convex_family_picks_lewy_angle() {
        let family = [spec(&[0.0, 100.0]), spec(&[0.0, 0.0]), spec(&[100.0, 100.0, ])];
        let s = find_admissible_rotation(&family, 1.0).unwrap();
        assert!(s.admissible);
        let theta = s.admissible_angle().unwrap().radians();
        assert!((theta - FRAC_PI_4).abs() <= PI / 720.0 + 1e-12, "{theta}");
    }

    #[test]
    fn product_minus_one_family_stays_on_boundary() {
        let family: Vec<Spectrum> = [2.0, 4.0, 8.0].iter().map(|t| spec(&[*t, -1.0 / t])).collect();
        let s = find_admissible_rotation(&family, 10.0).unwrap();
        assert!(s.xi_margin >= -1e-9);
        assert!(s.admissible);
    }

    #[test]
    fn inadmissible_family_reports_best_margin() {
        // Slope angles spread over more than a half-turn minus the K window.
        let family = [spec(&[50.0, -50.0, 0.0])];
        let s = find_admissible_rotation(&family, 0.5).unwrap();
        assert!(!s.admissible);
        assert!(s.admissible_angle().is_none());
        assert!(s.ball_margin < 0.0);
        assert!(find_admissible_rotation(&[], 1.0).is_err());
    }
}
