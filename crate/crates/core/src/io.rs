//! File formats.
//!
//! Generating vectors are JSON objects:
//!
//! ```json
//! {"dimension": 2, "primes": [2, 3], "permutations": [[0, 1], [0, 2, 1]]}
//! ```
//!
//! Point sets are plain text: an optional `# n d` header, then one point
//! per line with coordinates separated by single spaces. Coordinates are
//! written in the shortest decimal form that parses back to the same
//! double.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{first_primes, GeneratingVector, Permutation, PointSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorFile {
    pub dimension: usize,
    pub primes: Vec<usize>,
    pub permutations: Vec<Vec<usize>>,
}

impl From<&GeneratingVector> for VectorFile {
    fn from(gv: &GeneratingVector) -> Self {
        Self {
            dimension: gv.dimension(),
            primes: gv.primes(),
            permutations: gv.perms().iter().map(|p| p.map().to_vec()).collect(),
        }
    }
}

impl TryFrom<VectorFile> for GeneratingVector {
    type Error = Error;

    fn try_from(f: VectorFile) -> Result<Self> {
        let field = |field: &str, message: String| Error::Vector {
            field: field.into(),
            message,
        };
        if f.permutations.len() != f.dimension {
            return Err(field(
                "permutations",
                format!(
                    "{} entries for dimension {}",
                    f.permutations.len(),
                    f.dimension
                ),
            ));
        }
        let expected = first_primes(f.dimension);
        if f.primes != expected {
            return Err(field("primes", format!("expected {expected:?}")));
        }
        let perms = f
            .permutations
            .into_iter()
            .enumerate()
            .map(|(j, map)| {
                if map.len() != expected[j] {
                    return Err(field(
                        &format!("permutations[{j}]"),
                        format!("length {} but base is {}", map.len(), expected[j]),
                    ));
                }
                Permutation::new(map)
                    .map_err(|e| field(&format!("permutations[{j}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        GeneratingVector::new(perms)
    }
}

pub fn vector_to_json(gv: &GeneratingVector) -> String {
    serde_json::to_string(&VectorFile::from(gv)).expect("vector file serializes")
}

pub fn vector_from_json(text: &str) -> Result<GeneratingVector> {
    let file: VectorFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    file.try_into()
}

pub fn write_vector(path: &Path, gv: &GeneratingVector) -> Result<()> {
    let mut text = vector_to_json(gv);
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_vector(path: &Path) -> Result<GeneratingVector> {
    vector_from_json(&std::fs::read_to_string(path)?)
}

pub fn format_points(x: &PointSet) -> String {
    let mut out = String::with_capacity(x.len() * x.dimension() * 20);
    writeln!(out, "# {} {}", x.len(), x.dimension()).unwrap();
    for p in x.points() {
        for (j, c) in p.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{c}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parses a point-set file. The header is optional; when present, its
/// counts must match the body.
pub fn parse_points(text: &str) -> Result<PointSet> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut dim: Option<usize> = None;
    let mut coords = Vec::new();
    let mut rows = 0usize;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if header.is_none() && rows == 0 {
                let nums: Vec<&str> = rest.split_whitespace().collect();
                if nums.len() == 2 {
                    let parse = |s: &str| {
                        s.parse::<usize>().map_err(|e| Error::Parse {
                            line: line_no,
                            message: format!("bad header value `{s}`: {e}"),
                        })
                    };
                    header = Some((parse(nums[0])?, parse(nums[1])?, line_no));
                }
            }
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|s| {
                s.parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad coordinate `{s}`: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {d} coordinates, found {}", values.len()),
                })
            }
            Some(_) => {}
        }
        if let Some(bad) = values.iter().find(|c| !(0.0..1.0).contains(*c)) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("coordinate {bad} outside [0, 1)"),
            });
        }
        coords.extend(values);
        rows += 1;
    }
    let Some(d) = dim else {
        return Err(Error::Parse {
            line: 0,
            message: "no points".into(),
        });
    };
    if let Some((n, hd, line)) = header {
        if n != rows || hd != d {
            return Err(Error::Parse {
                line,
                message: format!("header says {n} x {hd}, body has {rows} x {d}"),
            });
        }
    }
    PointSet::new(d, coords)
}

pub fn write_points(path: &Path, x: &PointSet) -> Result<()> {
    std::fs::write(path, format_points(x))?;
    Ok(())
}

pub fn read_points(path: &Path) -> Result<PointSet> {
    parse_points(&std::fs::read_to_string(path)?)
}
