//! Chaotic permutation keys from the hybrid logistic-sine map.
//!
//! The recurrence is
//! `x' = (r x (1 - x) + (4 - r) sin(pi x) / 4) mod 1`.
//! A key of length `n` iterates it `2n` times, keeps the last `n` states,
//! quantizes them to integers and double-argsorts the result, which turns the
//! quantized sequence into its rank vector.

use std::f64::consts::PI;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::argsort::{argsort, is_permutation};
use crate::error::{Error, Result};

pub const DEFAULT_R: f64 = 3.99;
pub const DEFAULT_X0: f64 = 0.41;
pub const DEFAULT_SCALE: u64 = 1000;

const KEY_MAGIC: &[u8; 4] = b"PXKY";

/// Parameters of the chaotic key generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaosParams {
    /// Control parameter, `0 < r <= 4`.
    pub r: f64,
    /// Initial state, `0 < x0 < 1`.
    pub x0: f64,
    /// Quantization factor applied before ranking.
    pub scale: u64,
    /// Key length.
    pub n: usize,
}

impl Default for ChaosParams {
    fn default() -> Self {
        Self {
            r: DEFAULT_R,
            x0: DEFAULT_X0,
            scale: DEFAULT_SCALE,
            n: 1,
        }
    }
}

impl ChaosParams {
    pub fn new(r: f64, x0: f64, scale: u64, n: usize) -> Result<Self> {
        let p = Self { r, x0, scale, n };
        p.validate()?;
        Ok(p)
    }

    pub fn with_len(self, n: usize) -> Self {
        Self { n, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        check_r(self.r)?;
        if !(self.x0 > 0.0 && self.x0 < 1.0) {
            return Err(Error::Parameter(format!("x0 must lie in (0, 1), got {}", self.x0)));
        }
        if self.scale == 0 {
            return Err(Error::Parameter("scale must be >= 1".into()));
        }
        if self.n == 0 {
            return Err(Error::Parameter("key length must be >= 1".into()));
        }
        Ok(())
    }
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r <= 4.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("r must lie in (0, 4], got {r}")))
    }
}

/// One step of the hybrid map. The result lies in `[0, 1)`.
pub fn logistic_sine_step(x: f64, r: f64) -> Result<f64> {
    check_r(r)?;
    Ok(step(x, r))
}

#[inline]
fn step(x: f64, r: f64) -> f64 {
    let next = (r * x * (1.0 - x) + (4.0 - r) * (PI * x).sin() / 4.0).rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    if next >= 1.0 {
        0.0
    } else {
        next
    }
}

/// The retained tail of a chaotic trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaoticSequence {
    values: Vec<f64>,
}

impl ChaoticSequence {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Iterates the map `2n` times from `x0` and returns the last `n` states.
pub fn generate_sequence(p: &ChaosParams) -> Result<ChaoticSequence> {
    p.validate()?;
    let mut x = p.x0;
    for _ in 0..p.n {
        x = step(x, p.r);
    }
    let values = (0..p.n)
        .map(|_| {
            x = step(x, p.r);
            x
        })
        .collect();
    Ok(ChaoticSequence { values })
}

/// A bijection on `0..n` derived from a chaotic sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationKey {
    key: Vec<usize>,
}

/// Quantization statistics of a derived key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyStats {
    pub len: usize,
    /// Number of distinct quantized values.
    pub distinct: usize,
    /// Entries sharing their quantized value with an earlier entry.
    pub collisions: usize,
}

impl PermutationKey {
    pub fn from_indices(key: Vec<usize>) -> Result<Self> {
        if !is_permutation(&key) {
            return Err(Error::Parameter("key is not a permutation".into()));
        }
        Ok(Self { key })
    }

    pub fn identity(n: usize) -> Self {
        Self { key: (0..n).collect() }
    }

    pub fn indices(&self) -> &[usize] {
        &self.key
    }

    pub fn len(&self) -> usize {
        self.key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.key.is_empty()
    }

    /// Binary form: `PXKY`, u32 LE length, then the indices as u32 LE.
    pub fn write_binary(&self, mut out: impl Write) -> Result<()> {
        out.write_all(KEY_MAGIC)?;
        write_u32_slice(&mut out, &self.key)?;
        Ok(())
    }

    pub fn read_binary(mut input: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        input
            .read_exact(&mut magic)
            .map_err(|_| Error::format(0, "missing PXKY magic"))?;
        if &magic != KEY_MAGIC {
            return Err(Error::format(0, "bad magic, expected PXKY"));
        }
        let key = read_u32_vec(&mut input, 4)?;
        Self::from_indices(key)
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "position,index")?;
        for (z, k) in self.key.iter().enumerate() {
            writeln!(out, "{z},{k}")?;
        }
        Ok(())
    }
}

/// Quantizes `round(s * scale)` (half away from zero), then applies two
/// stable ascending argsorts. The first gives the positions in sorted order;
/// the second inverts that, yielding each entry's rank. Equal quantized values
/// are ranked in trajectory order.
pub fn derive_permutation_key(s: &ChaoticSequence, scale: u64) -> PermutationKey {
    let quantized = quantize(s, scale);
    let sorted_positions = argsort(&quantized);
    PermutationKey {
        key: argsort(&sorted_positions),
    }
}

pub fn quantize(s: &ChaoticSequence, scale: u64) -> Vec<i64> {
    let scale = scale as f64;
    s.values.iter().map(|v| (v * scale).round() as i64).collect()
}

pub fn key_stats(s: &ChaoticSequence, scale: u64) -> KeyStats {
    let mut q = quantize(s, scale);
    q.sort_unstable();
    q.dedup();
    KeyStats {
        len: s.len(),
        distinct: q.len(),
        collisions: s.len() - q.len(),
    }
}

/// Full key generation: sequence plus key derivation.
pub fn generate_key(p: &ChaosParams) -> Result<PermutationKey> {
    Ok(derive_permutation_key(&generate_sequence(p)?, p.scale))
}

pub(crate) fn write_u32_slice(out: &mut impl Write, values: &[usize]) -> Result<()> {
    let n = u32::try_from(values.len()).map_err(|_| Error::Parameter("more than u32::MAX entries".into()))?;
    let mut buf = Vec::with_capacity(4 + 4 * values.len());
    buf.extend_from_slice(&n.to_le_bytes());
    for &v in values {
        buf.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub(crate) fn read_u32_vec(input: &mut impl Read, offset: usize) -> Result<Vec<usize>> {
    let mut word = [0u8; 4];
    input
        .read_exact(&mut word)
        .map_err(|_| Error::format(offset, "missing length"))?;
    let n = u32::from_le_bytes(word) as usize;
    let mut raw = Vec::new();
    input.take(4 * n as u64).read_to_end(&mut raw)?;
    if raw.len() != 4 * n {
        return Err(Error::format(
            offset + 4 + raw.len(),
            format!("truncated: expected {n} indices"),
        ));
    }
    Ok(raw
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect())
}
