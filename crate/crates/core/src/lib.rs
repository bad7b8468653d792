//! Feature-ranked chaotic pixel permutation for 8-bit grayscale images.
//!
//! Pixels are ranked by a blend of spatial-frequency content (centered
//! log-magnitude spectrum) and local contrast (windowed standard deviation).
//! The ranking is composed with a key drawn from the hybrid logistic-sine map
//! to scramble the image. The crate also ships baseline scramblers and the
//! correlation metrics used to compare them.
//!
//! ```
//! use permutex::{permutex, unpermutex, ChaosParams, GrayImage};
//!
//! let img = GrayImage::from_fn(16, 16, |x, y| (x * 16 + y) as u8).unwrap();
//! let (scrambled, perm) = permutex(&img, &ChaosParams::default(), 3).unwrap();
//! assert_eq!(unpermutex(&scrambled, &perm).unwrap(), img);
//! ```

pub mod argsort;
pub mod baselines;
pub mod error;
pub mod features;
pub mod image;
pub mod keygen;
pub mod metrics;
pub mod permutation;

pub use baselines::{run_scheme, Scheme, SchemeConfig};
pub use error::{Error, Result};
pub use features::{
    dft2, extract_features, fft_shift, importance_map, local_contrast, magnitude_log_norm, rank_pixels,
    ComplexSpectrum, FeatureKind, FeatureMap, FeatureSet, ImportanceRanking,
};
pub use image::{decode_pgm, encode_pgm, load_pgm, save_pgm, FlatVector, GrayImage};
pub use keygen::{
    derive_permutation_key, generate_key, generate_sequence, logistic_sine_step, ChaosParams, ChaoticSequence,
    PermutationKey,
};
pub use metrics::{
    adjacent_correlation, analysis_report, corr2, correlation_scatter, glcm_correlation, Direction, GlcmParams,
    MetricsReport, ScatterPairs,
};
pub use permutation::{
    apply_permutation, compose_permutation, invert_permutation, permutex, unpermutex, PixelPermutation, Provenance,
};
