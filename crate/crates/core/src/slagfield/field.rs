use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::SymMatrix;
use crate::sym3tensor::Sym3Tensor;

pub const MAX_FIELD_DIM: usize = 3;

/// Samples of a potential `F` at the nodes of a uniform grid, row-major
/// (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct GraphField {
    origin: Vec<f64>,
    spacing: f64,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl GraphField {
    pub fn new(origin: Vec<f64>, spacing: f64, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let n = shape.len();
        if n == 0 || n > MAX_FIELD_DIM {
            return Err(Error::InvalidDimension {
                n,
                reason: "fields support 1 <= n <= 3",
            });
        }
        if origin.len() != n {
            return Err(Error::Field(format!(
                "origin has {} entries, expected {n}",
                origin.len()
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Field(format!("spacing must be positive, got {spacing}")));
        }
        if let Some(a) = shape.iter().position(|&s| s == 0) {
            return Err(Error::Field(format!("shape[{a}] is zero")));
        }
        let count: usize = shape.iter().product();
        if values.len() != count {
            return Err(Error::Field(format!(
                "shape {shape:?} needs {count} values, found {}",
                values.len()
            )));
        }
        if let Some(i) = origin.iter().position(|v| !v.is_finite()) {
            return Err(Error::Field(format!("origin[{i}] is not finite")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Field(format!("values[{i}] is not finite")));
        }
        Ok(Self {
            origin,
            spacing,
            shape,
            values,
        })
    }

    /// Samples `f` at every node.
    pub fn from_fn(
        origin: Vec<f64>,
        spacing: f64,
        shape: Vec<usize>,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let count: usize = shape.iter().product();
        let mut values = Vec::with_capacity(count);
        let mut idx = vec![0usize; shape.len()];
        let mut x = vec![0.0; shape.len()];
        for flat in 0..count {
            unflatten(flat, &shape, &mut idx);
            for (a, xi) in x.iter_mut().enumerate() {
                *xi = origin.get(a).copied().unwrap_or(0.0) + idx[a] as f64 * spacing;
            }
            values.push(f(&x));
        }
        Self::new(origin, spacing, shape, values)
    }

    pub fn n(&self) -> usize {
        self.shape.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn position(&self, p: &[usize]) -> Vec<f64> {
        p.iter()
            .zip(&self.origin)
            .map(|(&i, o)| o + i as f64 * self.spacing)
            .collect()
    }

    /// Node whose position matches `x` to within a thousandth of a cell.
    pub fn node_at(&self, x: &[f64]) -> Option<Vec<usize>> {
        if x.len() != self.n() {
            return None;
        }
        let mut p = Vec::with_capacity(x.len());
        for (a, xi) in x.iter().enumerate() {
            let s = (xi - self.origin[a]) / self.spacing;
            let r = s.round();
            if (s - r).abs() > 1e-3 || r < 0.0 || r as usize >= self.shape[a] {
                return None;
            }
            p.push(r as usize);
        }
        Some(p)
    }

    /// Distance in nodes to the nearest boundary.
    pub fn margin(&self, p: &[usize]) -> usize {
        p.iter()
            .zip(&self.shape)
            .map(|(&i, &s)| if i >= s { 0 } else { i.min(s - 1 - i) })
            .min()
            .unwrap_or(0)
    }

    pub(crate) fn require_margin(&self, p: &[usize], required: usize) -> Result<()> {
        if p.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: p.len(),
            });
        }
        let margin = self.margin(p);
        if margin < required || p.iter().zip(&self.shape).any(|(&i, &s)| i >= s) {
            return Err(Error::Boundary {
                index: p.to_vec(),
                margin,
                required,
            });
        }
        Ok(())
    }

    /// Value at `p + offset`; the caller guarantees the node exists.
    #[inline]
    pub(crate) fn at(&self, p: &[usize], offset: &[isize]) -> f64 {
        let mut flat = 0usize;
        for a in 0..self.n() {
            let i = (p[a] as isize + offset[a]) as usize;
            flat = flat * self.shape[a] + i;
        }
        self.values[flat]
    }

    /// All nodes at least `margin` from the boundary, in row-major order.
    pub fn interior(&self, margin: usize) -> Vec<Vec<usize>> {
        let lo = margin;
        if self.shape.iter().any(|&s| s < 2 * margin + 1) {
            return Vec::new();
        }
        let inner: Vec<usize> = self.shape.iter().map(|&s| s - 2 * margin).collect();
        let count: usize = inner.iter().product();
        let mut out = Vec::with_capacity(count);
        let mut idx = vec![0; inner.len()];
        for flat in 0..count {
            unflatten(flat, &inner, &mut idx);
            out.push(idx.iter().map(|i| i + lo).collect());
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FieldFile {
            n: self.n(),
            origin: self.origin.clone(),
            spacing: Spacing::Uniform(self.spacing),
            shape: self.shape.clone(),
            values: self.values.clone(),
        })
        .expect("field serializes")
    }
}

fn unflatten(mut flat: usize, shape: &[usize], idx: &mut [usize]) {
    for a in (0..shape.len()).rev() {
        idx[a] = flat % shape[a];
        flat /= shape[a];
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Spacing {
    Uniform(f64),
    PerAxis(Vec<f64>),
}

/// On-disk field format.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldFile {
    n: usize,
    origin: Vec<f64>,
    spacing: Spacing,
    shape: Vec<usize>,
    values: Vec<f64>,
}

pub fn parse_field_json(text: &str) -> Result<GraphField> {
    let file: FieldFile = serde_json::from_str(text)
        .map_err(|e| Error::Field(format!("line {} column {}: {e}", e.line(), e.column())))?;
    if file.shape.len() != file.n {
        return Err(Error::Field(format!(
            "\"shape\" has {} entries but \"n\" is {}",
            file.shape.len(),
            file.n
        )));
    }
    let spacing = match file.spacing {
        Spacing::Uniform(h) => h,
        Spacing::PerAxis(hs) => {
            let Some(&h) = hs.first() else {
                return Err(Error::Field("\"spacing\" array is empty".into()));
            };
            if hs.len() != file.n {
                return Err(Error::Field(format!(
                    "\"spacing\" has {} entries, expected {}",
                    hs.len(),
                    file.n
                )));
            }
            if let Some(a) = hs.iter().position(|&x| x != h) {
                return Err(Error::Field(format!(
                    "non-uniform spacing: axis {a} has {} but axis 0 has {h}",
                    hs[a]
                )));
            }
            h
        }
    };
    GraphField::new(file.origin, spacing, file.shape, file.values)
}

/// Centered box `[-half_width, half_width]ⁿ` with the given node spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub spacing: f64,
}

impl GridSpec {
    pub fn new(half_width: f64, spacing: f64) -> Self {
        Self {
            half_width,
            spacing,
        }
    }

    fn nodes_per_axis(&self) -> Result<usize> {
        if !(self.spacing > 0.0 && self.half_width > 0.0)
            || !self.spacing.is_finite()
            || !self.half_width.is_finite()
        {
            return Err(Error::Field(format!("invalid grid {self:?}")));
        }
        let cells = 2.0 * self.half_width / self.spacing;
        let r = cells.round();
        if (cells - r).abs() > 1e-9 * cells.max(1.0) {
            return Err(Error::Field(format!(
                "half width {} is not a multiple of spacing {}",
                self.half_width, self.spacing
            )));
        }
        Ok(r as usize + 1)
    }
}

/// Closed-form potentials, sampled exactly at grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    /// `F = xᵀ A x / 2`.
    Quadratic(SymMatrix),
    /// `F = e^x cos y`, harmonic, hence special Lagrangian for n = 2.
    HarmonicExpCos,
    /// `F = c |x|² / 2`.
    Paraboloid { n: usize, c: f64 },
}

impl Builtin {
    /// Parses `quadratic:<n>:<packed A>`, `harmonic_expcos` or
    /// `paraboloid:<n>:<c>`. The packed matrix is the comma-separated upper
    /// triangle, row by row.
    pub fn parse(descriptor: &str) -> Result<Self> {
        let bad = |msg: String| Error::Field(format!("builtin {descriptor:?}: {msg}"));
        let parts: Vec<&str> = descriptor.split(':').collect();
        let parse_n = |s: &str| -> Result<usize> {
            let n: usize = s.trim().parse().map_err(|e| bad(format!("dimension: {e}")))?;
            if n == 0 || n > MAX_FIELD_DIM {
                return Err(bad(format!("dimension {n} outside 1..=3")));
            }
            Ok(n)
        };
        match parts.as_slice() {
            ["harmonic_expcos"] => Ok(Self::HarmonicExpCos),
            ["quadratic", n, packed] => {
                let n = parse_n(n)?;
                let entries = packed
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|e| bad(format!("{x:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                let a = SymMatrix::from_packed(n, entries).map_err(|e| bad(e.to_string()))?;
                Ok(Self::Quadratic(a))
            }
            ["paraboloid", n, c] => {
                let n = parse_n(n)?;
                let c: f64 = c.trim().parse().map_err(|e| bad(format!("c: {e}")))?;
                if !c.is_finite() {
                    return Err(bad("c must be finite".into()));
                }
                Ok(Self::Paraboloid { n, c })
            }
            _ => Err(bad(
                "expected quadratic:<n>:<packed>, harmonic_expcos or paraboloid:<n>:<c>".into(),
            )),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Quadratic(a) => a.n(),
            Self::HarmonicExpCos => 2,
            Self::Paraboloid { n, .. } => *n,
        }
    }

    pub fn default_grid(&self) -> GridSpec {
        match self {
            Self::HarmonicExpCos => GridSpec::new(0.5, 1.0 / 64.0),
            Self::Quadratic(_) | Self::Paraboloid { .. } => GridSpec::new(1.0, 1.0 / 16.0),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::Quadratic(a) => {
                let n = a.n();
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += x[i] * a.get(i, j) * x[j];
                    }
                }
                0.5 * s
            }
            Self::HarmonicExpCos => x[0].exp() * x[1].cos(),
            Self::Paraboloid { c, .. } => 0.5 * c * x.iter().map(|v| v * v).sum::<f64>(),
        }
    }

    /// Exact Hessian.
    pub fn hessian(&self, x: &[f64]) -> SymMatrix {
        match self {
            Self::Quadratic(a) => a.clone(),
            Self::HarmonicExpCos => {
                let (e, (s, c)) = (x[0].exp(), x[1].sin_cos());
                SymMatrix::from_packed(2, vec![e * c, -e * s, -e * c]).expect("finite")
            }
            Self::Paraboloid { n, c } => SymMatrix::diagonal(&vec![*c; *n]),
        }
    }

    /// Exact third derivatives `F_ijk`.
    pub fn third(&self, x: &[f64]) -> Sym3Tensor {
        match self {
            Self::HarmonicExpCos => {
                let (e, (s, c)) = (x[0].exp(), x[1].sin_cos());
                // F_xxx, F_xxy, F_xyy, F_yyy
                Sym3Tensor::from_coeffs(2, vec![e * c, -e * s, -e * c, e * s]).expect("finite")
            }
            other => Sym3Tensor::zeros(other.n()),
        }
    }

    pub fn sample(&self, grid: GridSpec) -> Result<GraphField> {
        let nodes = grid.nodes_per_axis()?;
        let n = self.n();
        GraphField::from_fn(vec![-grid.half_width; n], grid.spacing, vec![nodes; n], |x| {
            self.value(x)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    File(PathBuf),
    Builtin(Builtin),
}

impl FieldSource {
    /// `builtin:<descriptor>` or a path to a JSON field file.
    pub fn parse(s: &str) -> Result<Self> {
        match s.strip_prefix("builtin:") {
            Some(d) => Ok(Self::Builtin(Builtin::parse(d)?)),
            None => Ok(Self::File(PathBuf::from(s))),
        }
    }
}

pub fn load_field_file(path: &Path) -> Result<GraphField> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Field(format!("{}: {e}", path.display())))?;
    parse_field_json(&text).map_err(|e| match e {
        Error::Field(msg) => Error::Field(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Loads a field; `grid` overrides the builtin default grid and is ignored
/// for files.
pub fn load_field(source: &FieldSource, grid: Option<GridSpec>) -> Result<GraphField> {
    match source {
        FieldSource::File(path) => load_field_file(path),
        FieldSource::Builtin(b) => b.sample(grid.unwrap_or_else(|| b.default_grid())),
    }
}
