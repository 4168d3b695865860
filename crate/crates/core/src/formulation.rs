//! Binary encoding of real weights and the regression-to-QUBO compiler.
//!
//! Weight `w_i` is represented by `K` bits as `w_i = Σ_k p_k · z[i*K + k]`,
//! where `p` is the [`PrecisionVector`]. Bits are laid out weight-major: all
//! `K` bits of the first weight, then the second, and so on. Substituting
//! `w = 𝒫 z` into `||Xw - Y||²` gives
//!
//! ```text
//! zᵀ (𝒫ᵀ XᵀX 𝒫) z − 2 zᵀ 𝒫ᵀ XᵀY + YᵀY
//! ```
//!
//! whose first two terms form the QUBO and whose constant is kept as the
//! record's offset.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::Qubo;
use crate::regression::{Dataset, Gram, Weights};

/// Largest precision vector accepted by [`enumerate_representable`].
pub const MAX_ENUMERATION_K: usize = 20;

/// Sorted signed powers of two whose subset sums are the representable
/// values of each weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PrecisionVector(Vec<f64>);

impl PrecisionVector {
    /// Validates that entries are strictly ascending signed powers of two.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        Self::with_options(p, false)
    }

    /// Like [`PrecisionVector::new`]; `allow_any` skips the power-of-two
    /// check but still requires nonzero, finite, strictly ascending entries.
    pub fn with_options(p: Vec<f64>, allow_any: bool) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::contract("precision vector must be non-empty"));
        }
        for &v in &p {
            if !v.is_finite() || v == 0.0 {
                return Err(Error::contract(format!(
                    "precision entry {v} must be finite and nonzero"
                )));
            }
            if !allow_any && !is_power_of_two(v.abs()) {
                return Err(Error::contract(format!(
                    "precision entry {v} is not a signed power of two"
                )));
            }
        }
        if p.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::contract(
                "precision vector must be sorted strictly ascending",
            ));
        }
        Ok(PrecisionVector(p))
    }

    /// Parses a comma-separated list; entries may be decimals or `a/b`
    /// fractions, e.g. `-1,-1/2,1/2,1`.
    pub fn parse(s: &str, allow_any: bool) -> Result<Self> {
        let values = s
            .split(',')
            .map(|tok| parse_scalar(tok.trim()))
            .collect::<Result<Vec<_>>>()?;
        Self::with_options(values, allow_any)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Number of bits per weight.
    pub fn k(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for PrecisionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

fn parse_scalar(tok: &str) -> Result<f64> {
    let bad = || Error::parse("precision vector", format!("cannot parse {tok:?}"));
    match tok.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            Ok(num / den)
        }
        None => tok.parse().map_err(|_| bad()),
    }
}

fn is_power_of_two(v: f64) -> bool {
    if !v.is_finite() || v <= 0.0 {
        return false;
    }
    let bits = v.to_bits();
    let exponent = (bits >> 52) & 0x7ff;
    let mantissa = bits & ((1u64 << 52) - 1);
    if exponent == 0 {
        // subnormal: exactly one mantissa bit set
        mantissa.is_power_of_two()
    } else {
        mantissa == 0
    }
}

/// The (d+1) × K(d+1) matrix `I_{d+1} ⊗ Pᵀ`, stored dense row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PrecisionMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }
}

pub fn precision_matrix(p: &PrecisionVector, d_plus_1: usize) -> Result<PrecisionMatrix> {
    if d_plus_1 == 0 {
        return Err(Error::contract("precision matrix needs d+1 >= 1"));
    }
    let k = p.k();
    let cols = k * d_plus_1;
    let mut data = vec![0.0; d_plus_1 * cols];
    for i in 0..d_plus_1 {
        data[i * cols + i * k..i * cols + (i + 1) * k].copy_from_slice(p.as_slice());
    }
    Ok(PrecisionMatrix {
        rows: d_plus_1,
        cols,
        data,
    })
}

/// Maps a weight-major bit vector to real weights.
pub fn decode(p: &PrecisionVector, bits: &[u8]) -> Result<Weights> {
    let k = p.k();
    if bits.is_empty() || !bits.len().is_multiple_of(k) {
        return Err(Error::contract(format!(
            "bit vector length {} is not a positive multiple of K={k}",
            bits.len()
        )));
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::contract("bit vector entries must be 0 or 1"));
    }
    let w = bits
        .chunks_exact(k)
        .map(|chunk| {
            chunk
                .iter()
                .zip(p.as_slice())
                .fold(0.0, |acc, (&b, &pk)| if b == 1 { acc + pk } else { acc })
        })
        .collect();
    Ok(Weights::from_vec_unchecked(w))
}

/// All distinct subset sums of `p`, ascending.
pub fn enumerate_representable(p: &PrecisionVector) -> Result<Vec<f64>> {
    let k = p.k();
    if k > MAX_ENUMERATION_K {
        return Err(Error::SizeGuard {
            what: "precision vector length",
            actual: k,
            limit: MAX_ENUMERATION_K,
        });
    }
    // adding 0.0 folds -0.0 into 0.0 before deduplication
    let mut values: Vec<f64> = (0u32..(1 << k))
        .map(|mask| subset_sum(p.as_slice(), mask) + 0.0)
        .collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    Ok(values)
}

fn subset_sum(p: &[f64], mask: u32) -> f64 {
    p.iter().enumerate().fold(
        0.0,
        |acc, (k, &pk)| if mask >> k & 1 == 1 { acc + pk } else { acc },
    )
}

/// The lexicographically smallest `K`-bit pattern (first bit most
/// significant) that decodes exactly to `value`, if any.
pub fn encode_weight(p: &PrecisionVector, value: f64) -> Option<Vec<u8>> {
    let k = p.k();
    if k > MAX_ENUMERATION_K {
        return None;
    }
    (0u32..(1 << k)).find_map(|code| {
        let bits: Vec<u8> = (0..k).map(|i| (code >> (k - 1 - i) & 1) as u8).collect();
        let sum = bits
            .iter()
            .zip(p.as_slice())
            .fold(0.0, |acc, (&b, &pk)| if b == 1 { acc + pk } else { acc });
        (sum == value).then_some(bits)
    })
}

/// Compiles the regression objective into a QUBO over `(d+1)·K` bits.
///
/// XᵀX and XᵀY are accumulated in one streaming pass over the rows, then
/// expanded by the precision vector: `a[(i,k),(j,l)] = p_k p_l (XᵀX)_ij`,
/// `b[(i,k)] = −2 p_k (XᵀY)_i`, `offset = YᵀY`.
pub fn build_qubo(ds: &Dataset, p: &PrecisionVector) -> Result<Qubo> {
    build_qubo_from_gram(&ds.gram(), p)
}

pub(crate) fn build_qubo_from_gram(g: &Gram, p: &PrecisionVector) -> Result<Qubo> {
    if g.xtx.iter().chain(&g.xty).any(|v| !v.is_finite()) || !g.yty.is_finite() {
        return Err(Error::contract("non-finite sufficient statistics"));
    }
    let k = p.k();
    let c = g.cols;
    let m = c * k;
    let pv = p.as_slice();
    let mut a = vec![0.0; m * m];
    let mut b = vec![0.0; m];
    for i in 0..c {
        for kk in 0..k {
            let row = i * k + kk;
            b[row] = -2.0 * pv[kk] * g.xty[i];
            for j in 0..c {
                let gij = g.xtx(i, j);
                for l in 0..k {
                    a[row * m + j * k + l] = (pv[kk] * pv[l]) * gij;
                }
            }
        }
    }
    Qubo::new(m, a, b, g.yty)
}
