//! Regions of the Lagrangian Grassmannian, described on the spectrum of the
//! slope matrix of a graphical plane.
//!
//! * bounded slope: `|λ_i| <= K`
//! * `Ξ`: `λ_iλ_j >= -1` for all `i != j`
//! * `Ξ'`: `λ_iλ_j + λ_jλ_k + λ_kλ_i >= 0` for pairwise distinct `i, j, k`
//! * `𝔐`: the stability form `F` is positive on nonzero trace-free tensors
//!
//! Each region is reported through a margin that is nonnegative exactly on
//! the region. The `𝔐` margin is the restricted minimum eigenvalue of `F`
//! on the trace-free subspace, and the strengthened margin is the same for
//! `F - |h|²`. The bounded variant of `𝔐` is called `m_k` here: it is the
//! intersection `𝔐 ∩ 𝔅_K`. (Some write-ups of the same result call it
//! `Ξ'_K` in one place; it is not related to the `Ξ'` above.)

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_finite, Error, Result};
use crate::numkernel::restricted_min_eigenvalue;
use crate::stability::DiagonalFormCoefficients;
use crate::sym3tensor::{trace_free_basis, TraceFreeBasis};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
const REJECTION_CAP: u64 = 1_000_000;

/// Slope eigenvalues of a graphical Lagrangian plane, sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDimension {
                n: 0,
                reason: "spectrum must be nonempty",
            });
        }
        check_finite(&values, "spectrum")?;
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self(values))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn negated(&self) -> Self {
        Self::new(self.0.iter().map(|v| -v).collect()).expect("finite")
    }
}

impl std::ops::Deref for Spectrum {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl std::str::FromStr for Spectrum {
    type Err = Error;

    /// Comma-separated decimals, e.g. `"2,-0.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split(',')
            .map(|x| {
                x.trim().parse::<f64>().map_err(|e| Error::InvalidParameter {
                    name: "spectrum",
                    reason: format!("{x:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Margins {
    pub ball: f64,
    pub xi: f64,
    pub xi_prime: f64,
    pub m: f64,
    pub strengthened: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RegionFlags {
    pub ball: bool,
    pub xi: bool,
    pub xi_prime: bool,
    /// `F >= 0` on trace-free tensors, up to tolerance.
    pub m: bool,
    /// `F > 0` on nonzero trace-free tensors, beyond tolerance.
    pub m_strict: bool,
    /// `𝔐 ∩ 𝔅_K`.
    pub m_k: bool,
    pub xi_ball: bool,
    pub xi_prime_ball: bool,
    pub strengthened: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionReport {
    pub spectrum: Spectrum,
    #[serde(rename = "K")]
    pub k: f64,
    pub tolerance: f64,
    pub margins: Margins,
    pub flags: RegionFlags,
}

fn xi_margin(l: &[f64]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            m = m.min(l[i] * l[j] + 1.0);
        }
    }
    m
}

fn xi_prime_margin(l: &[f64]) -> f64 {
    let n = l.len();
    let mut m = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                m = m.min(l[i] * l[j] + l[j] * l[k] + l[k] * l[i]);
            }
        }
    }
    m
}

fn form_margin(spec: &Spectrum, basis: &TraceFreeBasis, shift: f64) -> f64 {
    let form = DiagonalFormCoefficients::new(spec.values()).shifted(shift);
    restricted_min_eigenvalue(&form, basis).expect("basis built for the spectrum's dimension")
}

/// Restricted minimum of `F` over unit trace-free tensors; `+∞` when n = 1.
pub fn m_margin(spec: &Spectrum) -> f64 {
    form_margin(spec, &trace_free_basis(spec.n()), 0.0)
}

/// Restricted minimum of `F - |h|²`; `+∞` when n = 1.
pub fn strengthened_margin(spec: &Spectrum) -> f64 {
    form_margin(spec, &trace_free_basis(spec.n()), 1.0)
}

fn validate(k: f64, tol: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParameter {
            name: "K",
            reason: format!("must be positive and finite, got {k}"),
        });
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "tolerance",
            reason: format!("must be nonnegative, got {tol}"),
        });
    }
    Ok(())
}

pub fn classify(spec: &Spectrum, k: f64, tol: f64) -> Result<RegionReport> {
    validate(k, tol)?;
    Ok(classify_with_basis(spec, k, tol, &trace_free_basis(spec.n())))
}

pub(crate) fn classify_with_basis(
    spec: &Spectrum,
    k: f64,
    tol: f64,
    basis: &TraceFreeBasis,
) -> RegionReport {
    let l = spec.values();
    let margins = Margins {
        ball: k - spec.max_abs(),
        xi: xi_margin(l),
        xi_prime: xi_prime_margin(l),
        m: form_margin(spec, basis, 0.0),
        strengthened: form_margin(spec, basis, 1.0),
    };
    let ok = |m: f64| m >= -tol;
    let flags = RegionFlags {
        ball: ok(margins.ball),
        xi: ok(margins.xi),
        xi_prime: ok(margins.xi_prime),
        m: ok(margins.m),
        m_strict: margins.m > tol,
        m_k: ok(margins.m) && ok(margins.ball),
        xi_ball: ok(margins.xi) && ok(margins.ball),
        xi_prime_ball: ok(margins.xi_prime) && ok(margins.ball),
        strengthened: ok(margins.strengthened),
    };
    RegionReport {
        spectrum: spec.clone(),
        k,
        tolerance: tol,
        margins,
        flags,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScanCondition {
    #[default]
    None,
    Xi,
    XiPrime,
}

impl std::str::FromStr for ScanCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "xi" => Ok(Self::Xi),
            "xiprime" | "xi_prime" => Ok(Self::XiPrime),
            other => Err(Error::InvalidParameter {
                name: "condition",
                reason: format!("expected none, xi or xiprime, got {other:?}"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub count: usize,
    pub seed: u64,
    pub condition: ScanCondition,
    pub tolerance: f64,
}

impl ScanConfig {
    pub fn new(n: usize, k: f64, count: usize, seed: u64) -> Self {
        Self {
            n,
            k,
            count,
            seed,
            condition: ScanCondition::None,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn with_condition(mut self, condition: ScanCondition) -> Self {
        self.condition = condition;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSample {
    pub index: usize,
    pub attempts: u64,
    pub report: RegionReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterexampleKind {
    /// In `Ξ` but the `𝔐` margin is negative.
    XiNotM,
    /// In `Ξ'` (vacuous for n < 3) but `F - |h|²` goes negative.
    XiPrimeNotStrengthened,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub kind: CounterexampleKind,
    pub sample: usize,
    pub spectrum: Spectrum,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub struct RegionCounts {
    pub ball: usize,
    pub xi: usize,
    pub xi_prime: usize,
    pub m: usize,
    pub m_strict: usize,
    pub strengthened: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extremum {
    pub value: f64,
    pub spectrum: Spectrum,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanExtremes {
    pub min_m: Extremum,
    pub min_strengthened: Extremum,
    pub min_xi: Extremum,
    pub min_xi_prime: Extremum,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub config: ScanConfig,
    pub samples: usize,
    pub attempts: u64,
    pub counts: RegionCounts,
    /// Samples in `𝔐` that are in neither `Ξ` nor `Ξ'`.
    pub m_outside_xi_and_xi_prime: usize,
    pub extremes: ScanExtremes,
    pub counterexamples: Vec<Counterexample>,
    #[serde(skip)]
    pub rows: Vec<ScanSample>,
}

fn draw_sample(
    cfg: &ScanConfig,
    index: usize,
    basis: &TraceFreeBasis,
) -> Result<ScanSample> {
    use rand::Rng;
    let mut rng = crate::seeded_rng(cfg.seed, index as u64 + 1);
    for attempt in 1..=REJECTION_CAP {
        let values: Vec<f64> = (0..cfg.n).map(|_| rng.random_range(-cfg.k..=cfg.k)).collect();
        let spec = Spectrum::new(values)?;
        let accept = match cfg.condition {
            ScanCondition::None => true,
            ScanCondition::Xi => xi_margin(&spec) >= 0.0,
            ScanCondition::XiPrime => xi_prime_margin(&spec) >= 0.0,
        };
        if accept {
            return Ok(ScanSample {
                index,
                attempts: attempt,
                report: classify_with_basis(&spec, cfg.k, cfg.tolerance, basis),
            });
        }
    }
    Err(Error::InvalidParameter {
        name: "condition",
        reason: format!("no accepted sample after {REJECTION_CAP} draws"),
    })
}

/// Uniform samples from `[-K, K]ⁿ`, optionally rejected into `Ξ` or `Ξ'`.
///
/// Sample `i` uses its own stream derived from `(seed, i)`, so the summary
/// does not depend on how the work is scheduled.
pub fn region_scan(cfg: &ScanConfig) -> Result<ScanSummary> {
    if cfg.n == 0 {
        return Err(Error::InvalidDimension {
            n: 0,
            reason: "scan dimension must be positive",
        });
    }
    if cfg.count == 0 {
        return Err(Error::InvalidParameter {
            name: "count",
            reason: "must be at least 1".into(),
        });
    }
    validate(cfg.k, cfg.tolerance)?;
    let basis = trace_free_basis(cfg.n);
    let rows = (0..cfg.count)
        .into_par_iter()
        .map(|i| draw_sample(cfg, i, &basis))
        .collect::<Result<Vec<_>>>()?;

    let tol = cfg.tolerance;
    let mut counts = RegionCounts::default();
    let mut outside = 0;
    let mut counterexamples = Vec::new();
    let first = &rows[0].report;
    let seed_ext = |v: f64| Extremum {
        value: v,
        spectrum: first.spectrum.clone(),
    };
    let mut extremes = ScanExtremes {
        min_m: seed_ext(first.margins.m),
        min_strengthened: seed_ext(first.margins.strengthened),
        min_xi: seed_ext(first.margins.xi),
        min_xi_prime: seed_ext(first.margins.xi_prime),
    };
    let lower = |e: &mut Extremum, v: f64, s: &Spectrum| {
        if v < e.value {
            e.value = v;
            e.spectrum = s.clone();
        }
    };
    for row in &rows {
        let r = &row.report;
        let f = &r.flags;
        counts.ball += f.ball as usize;
        counts.xi += f.xi as usize;
        counts.xi_prime += f.xi_prime as usize;
        counts.m += f.m as usize;
        counts.m_strict += f.m_strict as usize;
        counts.strengthened += f.strengthened as usize;
        if f.m && !f.xi && !f.xi_prime {
            outside += 1;
        }
        lower(&mut extremes.min_m, r.margins.m, &r.spectrum);
        lower(&mut extremes.min_strengthened, r.margins.strengthened, &r.spectrum);
        lower(&mut extremes.min_xi, r.margins.xi, &r.spectrum);
        lower(&mut extremes.min_xi_prime, r.margins.xi_prime, &r.spectrum);
        if f.xi && r.margins.m < -tol {
            counterexamples.push(Counterexample {
                kind: CounterexampleKind::XiNotM,
                sample: row.index,
                spectrum: r.spectrum.clone(),
                margin: r.margins.m,
            });
        }
        if f.xi_prime && r.margins.strengthened < -tol {
            counterexamples.push(Counterexample {
                kind: CounterexampleKind::XiPrimeNotStrengthened,
                sample: row.index,
                spectrum: r.spectrum.clone(),
                margin: r.margins.strengthened,
            });
        }
    }
    Ok(ScanSummary {
        config: cfg.clone(),
        samples: rows.len(),
        attempts: rows.iter().map(|r| r.attempts).sum(),
        counts,
        m_outside_xi_and_xi_prime: outside,
        extremes,
        counterexamples,
        rows,
    })
}
