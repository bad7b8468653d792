//! Reference scrambling schemes to compare against: whole-row/whole-column
//! shuffles (seeded PRNG or chaotic) and the chaotic key without feature
//! ranking.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::argsort::argsort_f64;
use crate::error::{Error, Result};
use crate::features::{ImportanceRanking, DEFAULT_WINDOW};
use crate::image::GrayImage;
use crate::keygen::{generate_key, generate_sequence, ChaosParams};
use crate::permutation::{apply_permutation, compose_permutation, permutex, PixelPermutation, Provenance};

pub const DEFAULT_SEED: u64 = 1;

/// Every row of the comparison table, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Original,
    RandomRc,
    ChaoticRc,
    KeyOnly,
    Permutex,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Original,
        Scheme::RandomRc,
        Scheme::ChaoticRc,
        Scheme::KeyOnly,
        Scheme::Permutex,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Original => "original",
            Scheme::RandomRc => "random_rc",
            Scheme::ChaoticRc => "chaotic_rc",
            Scheme::KeyOnly => "key_only",
            Scheme::Permutex => "permutex",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown scheme {s:?}")))
    }
}

/// Shared settings for running any scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub chaos: ChaosParams,
    pub window: usize,
    pub seed: u64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            chaos: ChaosParams::default(),
            window: DEFAULT_WINDOW,
            seed: DEFAULT_SEED,
        }
    }
}

/// Runs `scheme` on `img`. `Original` yields the identity.
pub fn run_scheme(img: &GrayImage, scheme: Scheme, cfg: &SchemeConfig) -> Result<(GrayImage, PixelPermutation)> {
    match scheme {
        Scheme::Original => {
            let mut p = PixelPermutation::identity(img.len());
            p.provenance_mut().scheme = Scheme::Original.name().into();
            Ok((img.clone(), p))
        }
        Scheme::RandomRc => random_row_column_shuffle(img, cfg.seed),
        Scheme::ChaoticRc => chaotic_row_column_shuffle(img, &cfg.chaos),
        Scheme::KeyOnly => key_only_permutation(img, &cfg.chaos),
        Scheme::Permutex => permutex(img, &cfg.chaos, cfg.window),
    }
}

/// Unbiased draw from `0..bound` (Lemire's widening-multiply rejection).
pub(crate) fn below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let mut m = u128::from(rng.next_u64()) * u128::from(bound);
    if (m as u64) < bound {
        let threshold = bound.wrapping_neg() % bound;
        while (m as u64) < threshold {
            m = u128::from(rng.next_u64()) * u128::from(bound);
        }
    }
    (m >> 64) as u64
}

/// Fisher-Yates shuffle of `0..n`.
fn shuffled_indices(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = below(rng, i as u64 + 1) as usize;
        v.swap(i, j);
    }
    v
}

/// Gather mapping that sends output `(x, y)` to input `(cols[x], rows[y])`.
pub fn row_column_mapping(rows: &[usize], cols: &[usize]) -> Vec<usize> {
    let w = cols.len();
    rows.iter()
        .flat_map(|&r| cols.iter().map(move |&c| r * w + c))
        .collect()
}

/// Shuffles whole rows, then whole columns, using ChaCha8 seeded from `seed`.
pub fn random_row_column_shuffle(img: &GrayImage, seed: u64) -> Result<(GrayImage, PixelPermutation)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = shuffled_indices(&mut rng, img.height());
    let cols = shuffled_indices(&mut rng, img.width());
    let provenance = Provenance {
        seed: Some(seed),
        ..Provenance::new(Scheme::RandomRc.name())
    };
    let perm = PixelPermutation::new(row_column_mapping(&rows, &cols), provenance)?;
    Ok((apply_permutation(img, &perm)?, perm))
}

/// Row and column orders from argsorting `H + W` chaotic values: the first
/// `H` order the rows, the remaining `W` the columns.
pub fn chaotic_row_column_orders(height: usize, width: usize, chaos: &ChaosParams) -> Result<(Vec<usize>, Vec<usize>)> {
    let seq = generate_sequence(&chaos.with_len(height + width))?;
    let (row_vals, col_vals) = seq.values().split_at(height);
    Ok((argsort_f64(row_vals), argsort_f64(col_vals)))
}

pub fn chaotic_row_column_shuffle(img: &GrayImage, chaos: &ChaosParams) -> Result<(GrayImage, PixelPermutation)> {
    let (rows, cols) = chaotic_row_column_orders(img.height(), img.width(), chaos)?;
    let provenance = Provenance {
        chaos: Some(chaos.with_len(img.height() + img.width())),
        ..Provenance::new(Scheme::ChaoticRc.name())
    };
    let perm = PixelPermutation::new(row_column_mapping(&rows, &cols), provenance)?;
    Ok((apply_permutation(img, &perm)?, perm))
}

/// The chaotic key used directly as the pixel mapping.
pub fn key_only_permutation(img: &GrayImage, chaos: &ChaosParams) -> Result<(GrayImage, PixelPermutation)> {
    let chaos = chaos.with_len(img.len());
    let key = generate_key(&chaos)?;
    let mut perm = compose_permutation(&ImportanceRanking::identity(img.len()), &key)?;
    *perm.provenance_mut() = Provenance {
        chaos: Some(chaos),
        ..Provenance::new(Scheme::KeyOnly.name())
    };
    Ok((apply_permutation(img, &perm)?, perm))
}
