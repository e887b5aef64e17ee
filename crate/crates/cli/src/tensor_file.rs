//! Tensor files for `form eval`:
//!
//! ```json
//! { "n": 3, "entries": [ { "index": [1, 1, 2], "value": 1.0 } ] }
//! ```
//!
//! Indices are 1-based and may be given in any order; each component may be
//! listed at most once and unlisted components are zero.

use std::path::Path;

use serde::Deserialize;
use slag_core::sym3tensor::{component_index, Sym3Tensor};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorFile {
    n: usize,
    entries: Vec<Entry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    index: [usize; 3],
    value: f64,
}

pub fn parse(text: &str) -> Result<Sym3Tensor, String> {
    let file: TensorFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let n = file.n;
    if n == 0 {
        return Err("n must be positive".into());
    }
    let mut t = Sym3Tensor::zeros(n);
    let mut seen = vec![false; t.coeffs().len()];
    for e in &file.entries {
        if e.index.iter().any(|&i| i == 0 || i > n) {
            return Err(format!("index {:?} out of range 1..={n}", e.index));
        }
        if !e.value.is_finite() {
            return Err(format!("non-finite value at {:?}", e.index));
        }
        let [i, j, k] = e.index.map(|i| i - 1);
        let pos = component_index(n, [i, j, k]);
        if std::mem::replace(&mut seen[pos], true) {
            return Err(format!("component {:?} listed twice", e.index));
        }
        t.set(i, j, k, e.value);
    }
    Ok(t)
}

pub fn load(path: &Path) -> Result<Sym3Tensor, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_file() {
        let t = parse(r#"{"n":3,"entries":[{"index":[1,1,2],"value":1},{"index":[3,2,3],"value":-1}]}"#)
            .unwrap();
        assert_eq!(t.get(0, 1, 0), 1.0);
        assert_eq!(t.get(1, 2, 2), -1.0);
        assert_eq!(t.get(0, 0, 0), 0.0);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse(r#"{"n":2,"entries":[{"index":[0,1,1],"value":1}]}"#).is_err());
        assert!(parse(r#"{"n":2,"entries":[{"index":[1,1,3],"value":1}]}"#).is_err());
        assert!(parse(r#"{"n":2,"entries":[{"index":[1,2,1],"value":1},{"index":[2,1,1],"value":2}]}"#).is_err());
        assert!(parse(r#"{"n":2,"entries":[],"extra":1}"#).is_err());
        assert!(parse(r#"{"n":0,"entries":[]}"#).is_err());
    }
}
