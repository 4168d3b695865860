//! QUBO record: minimize `zᵀAz + zᵀb` over `z ∈ {0,1}^M`.
//!
//! `A` is kept symmetric with the linear term separate, so the record
//! matches the regression expansion directly. The constant dropped from the
//! objective is retained as `offset`, which makes `energy + offset` equal to
//! the regression error of the decoded weights.
//!
//! Energies are always accumulated in one canonical order (variable `j`
//! ascending; on a set bit add `a_jj + b_j`, then `a_ij + a_ji` for each set
//! `i < j`). Two QUBOs with the same merged upper-triangular form therefore
//! produce bitwise-identical energies, which the exporters rely on.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Qubo {
    m: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    offset: f64,
}

/// A bit assignment and its QUBO energy (offset excluded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySolution {
    pub bits: Vec<u8>,
    pub energy: f64,
}

#[derive(Serialize, Deserialize)]
struct QuboJson {
    m: usize,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    offset: f64,
}

impl Qubo {
    /// `a` is row-major M×M and must be exactly symmetric.
    pub fn new(m: usize, a: Vec<f64>, b: Vec<f64>, offset: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::contract("QUBO needs at least one variable"));
        }
        if a.len() != m * m || b.len() != m {
            return Err(Error::contract(format!(
                "QUBO of size {m} needs {} matrix and {m} vector entries, got {} and {}",
                m * m,
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) || !offset.is_finite() {
            return Err(Error::contract("QUBO contains non-finite coefficients"));
        }
        for i in 0..m {
            for j in 0..i {
                if a[i * m + j] != a[j * m + i] {
                    return Err(Error::contract(format!(
                        "QUBO matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Qubo { m, a, b, offset })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.m + j]
    }

    pub fn a_row_major(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Diagonal of the merged form, `a_ii + b_i`.
    pub(crate) fn merged_diag(&self, i: usize) -> f64 {
        self.a(i, i) + self.b[i]
    }

    /// Off-diagonal coupling of the merged form, `a_ij + a_ji`.
    pub(crate) fn coupling(&self, i: usize, j: usize) -> f64 {
        self.a(i, j) + self.a(j, i)
    }

    /// Upper-triangular merged coefficients as `(i, j, value)`, nonzeros only.
    pub fn upper_triangle(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.m {
            for j in i..self.m {
                let v = if i == j {
                    self.merged_diag(i)
                } else {
                    self.coupling(i, j)
                };
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Coordinate-list text: `p <M> <nnz>`, one `i j value` line per
    /// upper-triangle nonzero, then `# offset <value>`.
    pub fn to_coo_string(&self) -> String {
        let entries = self.upper_triangle();
        let mut s = String::new();
        let _ = writeln!(s, "p {} {}", self.m, entries.len());
        for (i, j, v) in entries {
            let _ = writeln!(s, "{i} {j} {v}");
        }
        let _ = writeln!(s, "# offset {}", self.offset);
        s
    }

    /// Parses the coordinate-list format. The result has `b = 0`, the
    /// merged diagonal on `a_ii` and each coupling split evenly over
    /// `a_ij` and `a_ji`.
    pub fn from_coo_str(text: &str) -> Result<Self> {
        let ctx = "QUBO coordinate list";
        let mut header: Option<(usize, usize)> = None;
        let mut offset = 0.0;
        let mut a = Vec::new();
        let mut seen = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let mut parts = comment.split_whitespace();
                if parts.next() == Some("offset") {
                    let v = parts
                        .next()
                        .ok_or_else(|| Error::parse(ctx, "offset line without value"))?;
                    offset = v
                        .parse()
                        .map_err(|_| Error::parse(ctx, format!("bad offset {v:?}")))?;
                }
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::parse(ctx, format!("line {}: {raw:?}", lineno + 1));
            match (header, fields.as_slice()) {
                (None, ["p", m, nnz]) => {
                    let m: usize = m.parse().map_err(|_| bad())?;
                    let nnz: usize = nnz.parse().map_err(|_| bad())?;
                    a = vec![0.0; m * m];
                    header = Some((m, nnz));
                }
                (Some((m, _)), [i, j, v]) => {
                    let i: usize = i.parse().map_err(|_| bad())?;
                    let j: usize = j.parse().map_err(|_| bad())?;
                    let v: f64 = v.parse().map_err(|_| bad())?;
                    if i > j || j >= m {
                        return Err(bad());
                    }
                    if i == j {
                        a[i * m + i] = v;
                    } else {
                        a[i * m + j] = v / 2.0;
                        a[j * m + i] = v / 2.0;
                    }
                    seen += 1;
                }
                _ => return Err(bad()),
            }
        }
        let (m, nnz) = header.ok_or_else(|| Error::parse(ctx, "missing `p` header"))?;
        if seen != nnz {
            return Err(Error::parse(
                ctx,
                format!("header declares {nnz} entries, found {seen}"),
            ));
        }
        Qubo::new(m, a, vec![0.0; m], offset)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let rec = QuboJson {
            m: self.m,
            a: self.a.chunks(self.m).map(<[f64]>::to_vec).collect(),
            b: self.b.clone(),
            offset: self.offset,
        };
        Ok(serde_json::to_string_pretty(&rec)?)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let rec: QuboJson = serde_json::from_str(text)?;
        if rec.a.len() != rec.m || rec.a.iter().any(|r| r.len() != rec.m) {
            return Err(Error::contract("QUBO JSON matrix shape does not match m"));
        }
        Qubo::new(rec.m, rec.a.concat(), rec.b, rec.offset)
    }

    /// Loads either export format, chosen by content (JSON starts with `{`).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if text.trim_start().starts_with('{') {
            Qubo::from_json_str(&text)
        } else {
            Qubo::from_coo_str(&text)
        }
    }

    pub fn write_coo<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(self.to_coo_string().as_bytes())
    }
}

/// `zᵀAz + zᵀb`; the offset is not included.
pub fn qubo_energy(q: &Qubo, bits: &[u8]) -> Result<f64> {
    if bits.len() != q.m() {
        return Err(Error::contract(format!(
            "assignment has {} bits, QUBO has {}",
            bits.len(),
            q.m()
        )));
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::contract("assignment entries must be 0 or 1"));
    }
    Ok(energy_unchecked(q, bits))
}

pub(crate) fn energy_unchecked(q: &Qubo, bits: &[u8]) -> f64 {
    let mut acc = 0.0;
    for (j, &bj) in bits.iter().enumerate().take(q.m()) {
        if bj == 1 {
            acc += q.merged_diag(j);
            for (i, &bi) in bits[..j].iter().enumerate() {
                if bi == 1 {
                    acc += q.coupling(i, j);
                }
            }
        }
    }
    acc
}

impl BinarySolution {
    pub fn evaluate(q: &Qubo, bits: Vec<u8>) -> Result<Self> {
        let energy = qubo_energy(q, &bits)?;
        Ok(BinarySolution { bits, energy })
    }
}
