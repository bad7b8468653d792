//! Pixel permutations: composing the importance ranking with a chaotic key,
//! applying and inverting the result, and the end-to-end scrambling pipeline.
//!
//! A [`PixelPermutation`] uses gather semantics: output slot `z` receives the
//! input pixel at flat index `mapping[z]`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::argsort::{invert, is_permutation};
use crate::error::{Error, Result};
use crate::features::{extract_features, ImportanceRanking};
use crate::image::GrayImage;
use crate::keygen::{generate_key, read_u32_vec, write_u32_slice, ChaosParams, PermutationKey};

const PERM_MAGIC: &[u8; 4] = b"PXPM";

pub const FORMAT_VERSION: &str = concat!("permutex ", env!("CARGO_PKG_VERSION"));

/// Where a permutation came from; enough to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub scheme: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chaos: Option<ChaosParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking_hash: Option<String>,
    /// Set when this is the inverse of the described permutation.
    #[serde(default)]
    pub inverted: bool,
    pub version: String,
}

impl Provenance {
    pub fn new(scheme: impl Into<String>) -> Self {
        Self {
            scheme: scheme.into(),
            chaos: None,
            window: None,
            seed: None,
            ranking_hash: None,
            inverted: false,
            version: FORMAT_VERSION.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PixelPermutation {
    mapping: Vec<usize>,
    provenance: Provenance,
}

impl PixelPermutation {
    pub fn new(mapping: Vec<usize>, provenance: Provenance) -> Result<Self> {
        if !is_permutation(&mapping) {
            return Err(Error::Parameter("mapping is not a permutation".into()));
        }
        Ok(Self { mapping, provenance })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mapping: (0..n).collect(),
            provenance: Provenance::new("identity"),
        }
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn provenance_mut(&mut self) -> &mut Provenance {
        &mut self.provenance
    }

    /// `PXPM`, u32 LE N, N u32 LE mapping entries, u32 LE byte length of the
    /// provenance JSON, then the JSON itself.
    pub fn write_binary(&self, mut out: impl Write) -> Result<()> {
        out.write_all(PERM_MAGIC)?;
        write_u32_slice(&mut out, &self.mapping)?;
        let json = serde_json::to_vec(&self.provenance)?;
        out.write_all(&(json.len() as u32).to_le_bytes())?;
        out.write_all(&json)?;
        Ok(())
    }

    pub fn read_binary(mut input: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        input
            .read_exact(&mut magic)
            .map_err(|_| Error::format(0, "missing PXPM magic"))?;
        if &magic != PERM_MAGIC {
            return Err(Error::format(0, "bad magic, expected PXPM"));
        }
        let mapping = read_u32_vec(&mut input, 4)?;
        let json_at = 8 + 4 * mapping.len();
        let mut word = [0u8; 4];
        input
            .read_exact(&mut word)
            .map_err(|_| Error::format(json_at, "missing provenance length"))?;
        let len = u32::from_le_bytes(word) as usize;
        let mut json = Vec::new();
        input.take(len as u64).read_to_end(&mut json)?;
        if json.len() != len {
            return Err(Error::format(json_at + 4 + json.len(), "truncated provenance"));
        }
        let provenance = serde_json::from_slice(&json)?;
        Self::new(mapping, provenance)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_binary(&mut buf).expect("write to Vec");
        buf
    }
}

/// Short content hash of a ranking, used to tie a permutation to the image
/// features it was built from.
pub fn ranking_hash(ranking: &ImportanceRanking) -> String {
    let mut hasher = Sha256::new();
    for &i in ranking.order() {
        hasher.update((i as u32).to_le_bytes());
    }
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// `mapping[z] = ranking[key[z]]`.
pub fn compose_permutation(ranking: &ImportanceRanking, key: &PermutationKey) -> Result<PixelPermutation> {
    if ranking.len() != key.len() {
        return Err(Error::shape(
            format!("key of length {}", ranking.len()),
            format!("key of length {}", key.len()),
        ));
    }
    let order = ranking.order();
    let mapping = key.indices().iter().map(|&k| order[k]).collect();
    Ok(PixelPermutation {
        mapping,
        provenance: Provenance::new("composed"),
    })
}

pub fn apply_permutation(img: &GrayImage, p: &PixelPermutation) -> Result<GrayImage> {
    if img.len() != p.len() {
        return Err(Error::shape(
            format!("permutation of {} pixels", img.len()),
            format!("permutation of {} pixels", p.len()),
        ));
    }
    let src = img.pixels();
    let pixels = p.mapping.iter().map(|&i| src[i]).collect();
    GrayImage::new(img.width(), img.height(), pixels)
}

pub fn invert_permutation(p: &PixelPermutation) -> PixelPermutation {
    let mut provenance = p.provenance.clone();
    provenance.inverted = !provenance.inverted;
    PixelPermutation {
        mapping: invert(&p.mapping),
        provenance,
    }
}

/// Feature-ranked chaotic scrambling of `img`. The key length in `chaos` is
/// replaced by the pixel count.
pub fn permutex(img: &GrayImage, chaos: &ChaosParams, window: usize) -> Result<(GrayImage, PixelPermutation)> {
    let chaos = chaos.with_len(img.len());
    let features = extract_features(img, window)?;
    let key = generate_key(&chaos)?;
    let mut perm = compose_permutation(&features.ranking, &key)?;
    perm.provenance = Provenance {
        chaos: Some(chaos),
        window: Some(window),
        ranking_hash: Some(ranking_hash(&features.ranking)),
        ..Provenance::new("permutex")
    };
    let scrambled = apply_permutation(img, &perm)?;
    Ok((scrambled, perm))
}

/// Undoes [`apply_permutation`] with `p`.
pub fn unpermutex(img: &GrayImage, p: &PixelPermutation) -> Result<GrayImage> {
    apply_permutation(img, &invert_permutation(p))
}
