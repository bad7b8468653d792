//! Spatial-frequency and local-contrast feature maps, their fusion into a
//! per-pixel importance score, and the descending importance ranking.

use std::fmt;
use std::io::Write;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::argsort::argsort_f64_desc;
use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Window size used when none is given.
pub const DEFAULT_WINDOW: usize = 3;

/// 2-D spectrum stored row-major; `entry(u, v)` is row frequency `u`,
/// column frequency `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    width: usize,
    height: usize,
    entries: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn new(width: usize, height: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != width * height {
            return Err(Error::shape(width * height, entries.len()));
        }
        Ok(Self { width, height, entries })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entry(&self, u: usize, v: usize) -> Complex64 {
        self.entries[u * self.width + v]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    FrequencyNorm,
    ContrastRaw,
    ContrastNorm,
    Importance,
    ImportanceNorm,
}

impl FeatureKind {
    /// Kinds whose values are min-max normalized into `[0, 1]`.
    pub fn is_normalized(self) -> bool {
        matches!(
            self,
            FeatureKind::FrequencyNorm | FeatureKind::ContrastNorm | FeatureKind::ImportanceNorm
        )
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FeatureKind::FrequencyNorm => "frequency_norm",
            FeatureKind::ContrastRaw => "contrast_raw",
            FeatureKind::ContrastNorm => "contrast_norm",
            FeatureKind::Importance => "importance",
            FeatureKind::ImportanceNorm => "importance_norm",
        };
        f.write_str(s)
    }
}

/// Real-valued per-pixel map, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    kind: FeatureKind,
}

impl FeatureMap {
    pub fn new(kind: FeatureKind, width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::shape(width * height, values.len()));
        }
        Ok(Self {
            width,
            height,
            values,
            kind,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Min-max rescale into `[0, 1]`, tagged as `kind`. A constant map
    /// becomes all zeros.
    pub fn normalized(&self, kind: FeatureKind) -> FeatureMap {
        FeatureMap {
            width: self.width,
            height: self.height,
            values: min_max_normalize(&self.values),
            kind,
        }
    }

    /// Renders the map as an 8-bit image, mapping `[0, 1]` to `[0, 255]` with
    /// round-half-up. Unnormalized kinds are min-max rescaled first.
    pub fn to_image(&self) -> GrayImage {
        let scaled;
        let unit = if self.kind.is_normalized() {
            &self.values
        } else {
            scaled = min_max_normalize(&self.values);
            &scaled
        };
        let pixels = unit
            .iter()
            .map(|v| (v * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8)
            .collect();
        GrayImage::new(self.width, self.height, pixels).expect("shape checked at construction")
    }

    /// Writes the raw values as an `height x width` CSV matrix with 17
    /// significant digits, which round-trips every `f64` exactly.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        for row in self.values.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Inverse of [`FeatureMap::write_csv`].
    pub fn read_csv(kind: FeatureKind, text: &str) -> Result<Self> {
        let mut values = Vec::new();
        let mut width = None;
        let mut height = 0;
        for (row, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
            let before = values.len();
            for cell in line.split(',') {
                let v = cell
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Serialization(format!("row {row}: bad value {cell:?}: {e}")))?;
                values.push(v);
            }
            let w = values.len() - before;
            if *width.get_or_insert(w) != w {
                return Err(Error::shape(width.unwrap(), w));
            }
            height += 1;
        }
        FeatureMap::new(kind, width.unwrap_or(0), height, values)
    }

    fn check_same_shape(&self, other: &FeatureMap) -> Result<()> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(Error::shape(
                format!("{}x{}", self.width, self.height),
                format!("{}x{}", other.width, other.height),
            ));
        }
        Ok(())
    }
}

/// `(v - min) / (max - min)` elementwise; all zeros when `max == min`.
pub fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let range = max - min;
    if values.is_empty() || range == 0.0 || !range.is_finite() {
        return vec![0.0; values.len()];
    }
    values.iter().map(|&v| (v - min) / range).collect()
}

/// Unnormalized 2-D DFT:
/// `F(u,v) = sum_x sum_y I(x,y) exp(-2 pi j (u x / H + v y / W))`
/// where `x` runs over rows and `y` over columns.
pub fn dft2(img: &GrayImage) -> ComplexSpectrum {
    let (w, h) = (img.width(), img.height());
    let mut buf: Vec<Complex64> = img
        .pixels()
        .iter()
        .map(|&p| Complex64::new(f64::from(p), 0.0))
        .collect();

    let mut planner = FftPlanner::<f64>::new();
    let row_fft = planner.plan_fft_forward(w);
    row_fft.process(&mut buf);

    let col_fft = planner.plan_fft_forward(h);
    let mut column = vec![Complex64::default(); h];
    for v in 0..w {
        for (u, c) in column.iter_mut().enumerate() {
            *c = buf[u * w + v];
        }
        col_fft.process(&mut column);
        for (u, c) in column.iter().enumerate() {
            buf[u * w + v] = *c;
        }
    }
    ComplexSpectrum {
        width: w,
        height: h,
        entries: buf,
    }
}

/// Moves the zero-frequency entry to `(H/2, W/2)` (floor division): entry
/// `(u, v)` goes to `((u + H/2) mod H, (v + W/2) mod W)`.
pub fn fft_shift(spec: &ComplexSpectrum) -> ComplexSpectrum {
    let (w, h) = (spec.width, spec.height);
    let (dh, dw) = (h / 2, w / 2);
    let mut entries = vec![Complex64::default(); spec.entries.len()];
    for u in 0..h {
        let du = (u + dh) % h;
        for v in 0..w {
            entries[du * w + (v + dw) % w] = spec.entries[u * w + v];
        }
    }
    ComplexSpectrum {
        width: w,
        height: h,
        entries,
    }
}

/// `ln(|F| + 1)` per entry, min-max normalized to `[0, 1]`.
pub fn magnitude_log_norm(spec: &ComplexSpectrum) -> FeatureMap {
    let log_mag: Vec<f64> = spec.entries.iter().map(|c| c.norm().ln_1p()).collect();
    FeatureMap {
        width: spec.width,
        height: spec.height,
        values: min_max_normalize(&log_mag),
        kind: FeatureKind::FrequencyNorm,
    }
}

/// Normalized, centered log-magnitude spectrum of `img`.
pub fn frequency_feature(img: &GrayImage) -> FeatureMap {
    magnitude_log_norm(&fft_shift(&dft2(img)))
}

/// Population standard deviation of the `window x window` neighbourhood
/// centered on each pixel. Out-of-range coordinates clamp to the nearest
/// edge pixel, so every window holds exactly `window^2` samples.
pub fn local_contrast(img: &GrayImage, window: usize) -> Result<FeatureMap> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "contrast window must be odd and >= 1, got {window}"
        )));
    }
    let (w, h) = (img.width() as isize, img.height() as isize);
    let half = (window / 2) as isize;
    let count = (window * window) as f64;
    let px = img.pixels();
    let mut samples = Vec::with_capacity(window * window);
    let mut values = Vec::with_capacity(img.len());

    for y in 0..h {
        for x in 0..w {
            samples.clear();
            for dy in -half..=half {
                let yy = (y + dy).clamp(0, h - 1);
                for dx in -half..=half {
                    let xx = (x + dx).clamp(0, w - 1);
                    samples.push(f64::from(px[(yy * w + xx) as usize]));
                }
            }
            let mean = samples.iter().sum::<f64>() / count;
            let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / count;
            values.push(var.sqrt());
        }
    }
    Ok(FeatureMap {
        width: img.width(),
        height: img.height(),
        values,
        kind: FeatureKind::ContrastRaw,
    })
}

/// Fuses the frequency map with the min-max normalized contrast map by
/// averaging, then min-max normalizes the result.
pub fn importance_map(freq: &FeatureMap, contrast: &FeatureMap) -> Result<FeatureMap> {
    freq.check_same_shape(contrast)?;
    if freq.kind != FeatureKind::FrequencyNorm {
        return Err(Error::Parameter(format!(
            "expected frequency_norm map, got {}",
            freq.kind
        )));
    }
    let contrast_norm = match contrast.kind {
        FeatureKind::ContrastRaw => min_max_normalize(&contrast.values),
        FeatureKind::ContrastNorm => contrast.values.clone(),
        other => {
            return Err(Error::Parameter(format!("expected contrast map, got {other}")));
        }
    };
    let fused: Vec<f64> = freq
        .values
        .iter()
        .zip(&contrast_norm)
        .map(|(f, c)| (f + c) / 2.0)
        .collect();
    Ok(FeatureMap {
        width: freq.width,
        height: freq.height,
        values: min_max_normalize(&fused),
        kind: FeatureKind::ImportanceNorm,
    })
}

/// Flat pixel indices ordered from most to least important.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportanceRanking {
    order: Vec<usize>,
}

impl ImportanceRanking {
    /// Wraps an explicit order; it must be a permutation of `0..len`.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        if !crate::argsort::is_permutation(&order) {
            return Err(Error::Parameter("ranking is not a permutation".into()));
        }
        Ok(Self { order })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
        }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "rank,flat_index")?;
        for (rank, idx) in self.order.iter().enumerate() {
            writeln!(out, "{rank},{idx}")?;
        }
        Ok(())
    }
}

/// Sorts the row-major flattened map in descending order; ties keep
/// ascending flat-index order.
pub fn rank_pixels(imp: &FeatureMap) -> ImportanceRanking {
    ImportanceRanking {
        order: argsort_f64_desc(&imp.values),
    }
}

/// Every intermediate of the feature pipeline for one image.
#[derive(Debug, Clone)]
pub struct FeatureSet {
    pub frequency: FeatureMap,
    pub contrast: FeatureMap,
    pub importance: FeatureMap,
    pub ranking: ImportanceRanking,
}

pub fn extract_features(img: &GrayImage, window: usize) -> Result<FeatureSet> {
    let frequency = frequency_feature(img);
    let contrast = local_contrast(img, window)?;
    let importance = importance_map(&frequency, &contrast)?;
    let ranking = rank_pixels(&importance);
    Ok(FeatureSet {
        frequency,
        contrast,
        importance,
        ranking,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dft_of_constant() {
        let img = GrayImage::filled(5, 3, 7).unwrap();
        let spec = dft2(&img);
        assert!((spec.entry(0, 0) - c(105.0, 0.0)).norm() < 1e-9);
        for (i, e) in spec.entries().iter().enumerate().skip(1) {
            assert!(e.norm() < 1e-9, "entry {i} = {e}");
        }
    }

    #[test]
    fn two_point_dft() {
        let img = GrayImage::new(2, 1, vec![9, 4]).unwrap();
        let spec = dft2(&img);
        assert!((spec.entry(0, 0) - c(13.0, 0.0)).norm() < 1e-12);
        assert!((spec.entry(0, 1) - c(5.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn shift_swaps_quadrants() {
        let (a, b, cc, d) = (c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0));
        let spec = ComplexSpectrum::new(2, 2, vec![a, b, cc, d]).unwrap();
        assert_eq!(fft_shift(&spec).entries(), &[d, cc, b, a]);
    }

    #[test]
    fn shift_centers_dc() {
        for (w, h) in [(4, 4), (5, 3), (1, 7), (6, 1)] {
            let spec = dft2(&GrayImage::filled(w, h, 3).unwrap());
            let shifted = fft_shift(&spec);
            let dc = shifted.entry(h / 2, w / 2);
            assert!((dc.re - (3 * w * h) as f64).abs() < 1e-9, "{w}x{h}");
        }
    }

    #[test]
    fn shift_twice_is_identity_on_even_shapes() {
        let entries: Vec<_> = (0..24).map(|i| c(i as f64, -(i as f64))).collect();
        let spec = ComplexSpectrum::new(6, 4, entries).unwrap();
        assert_eq!(fft_shift(&fft_shift(&spec)), spec);
    }

    #[test]
    fn log_magnitude_arithmetic() {
        let spec = ComplexSpectrum::new(2, 1, vec![c(3.0, 4.0), c(0.0, 0.0)]).unwrap();
        // ln(6) vs ln(1) = 0 normalize to [1, 0]
        assert_eq!(magnitude_log_norm(&spec).values(), &[1.0, 0.0]);
        assert!((c(3.0, 4.0).norm().ln_1p() - 6f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn constant_magnitude_normalizes_to_zero() {
        let spec = ComplexSpectrum::new(2, 2, vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]).unwrap();
        assert!(magnitude_log_norm(&spec).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn contrast_of_single_bright_pixel() {
        let mut px = vec![0u8; 9];
        px[4] = 255;
        let img = GrayImage::new(3, 3, px).unwrap();
        let map = local_contrast(&img, 3).unwrap();
        let mean: f64 = 255.0 / 9.0;
        let expected = ((8.0 * mean * mean + (255.0 - mean) * (255.0 - mean)) / 9.0).sqrt();
        assert!((map.get(1, 1) - expected).abs() < 1e-12);
        assert!((map.get(1, 1) - 80.139).abs() < 1e-3);
    }

    #[test]
    fn contrast_of_constant_is_zero() {
        let img = GrayImage::filled(4, 6, 200).unwrap();
        let map = local_contrast(&img, 5).unwrap();
        assert_eq!(map.kind(), FeatureKind::ContrastRaw);
        assert!(map.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn contrast_rejects_even_window() {
        let img = GrayImage::filled(3, 3, 0).unwrap();
        assert!(matches!(local_contrast(&img, 2), Err(Error::Parameter(_))));
        assert!(matches!(local_contrast(&img, 0), Err(Error::Parameter(_))));
        // 1x1 window has no spread
        assert!(local_contrast(&img, 1).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn importance_of_zero_maps() {
        let f = FeatureMap::new(FeatureKind::FrequencyNorm, 2, 2, vec![0.0; 4]).unwrap();
        let cm = FeatureMap::new(FeatureKind::ContrastRaw, 2, 2, vec![0.0; 4]).unwrap();
        assert_eq!(importance_map(&f, &cm).unwrap().values(), &[0.0; 4]);
    }

    #[test]
    fn importance_endpoints_preserved() {
        let f = FeatureMap::new(FeatureKind::FrequencyNorm, 2, 1, vec![0.0, 1.0]).unwrap();
        let cm = FeatureMap::new(FeatureKind::ContrastRaw, 2, 1, vec![0.0, 10.0]).unwrap();
        let p = importance_map(&f, &cm).unwrap();
        assert_eq!(p.values(), &[0.0, 1.0]);
        assert_eq!(p.kind(), FeatureKind::ImportanceNorm);
    }

    #[test]
    fn importance_shape_and_kind_errors() {
        let f = FeatureMap::new(FeatureKind::FrequencyNorm, 2, 1, vec![0.0, 1.0]).unwrap();
        let cm = FeatureMap::new(FeatureKind::ContrastRaw, 1, 2, vec![0.0, 1.0]).unwrap();
        assert!(matches!(importance_map(&f, &cm), Err(Error::Shape { .. })));
        assert!(matches!(importance_map(&cm, &f), Err(Error::Shape { .. })));
        let g = FeatureMap::new(FeatureKind::ContrastRaw, 2, 1, vec![0.0, 1.0]).unwrap();
        assert!(matches!(importance_map(&g, &g), Err(Error::Parameter(_))));
    }

    #[test]
    fn rank_descending() {
        let m = FeatureMap::new(FeatureKind::ImportanceNorm, 3, 1, vec![0.1, 0.9, 0.5]).unwrap();
        assert_eq!(rank_pixels(&m).order(), &[1, 2, 0]);
    }

    #[test]
    fn rank_ties_keep_index_order() {
        let m = FeatureMap::new(FeatureKind::ImportanceNorm, 2, 2, vec![0.0; 4]).unwrap();
        assert_eq!(rank_pixels(&m).order(), &[0, 1, 2, 3]);
    }

    #[test]
    fn image_dump_rounds_half_up() {
        let m = FeatureMap::new(FeatureKind::ImportanceNorm, 3, 1, vec![0.0, 0.5, 1.0]).unwrap();
        // 0.5 * 255 = 127.5 rounds up
        assert_eq!(m.to_image().pixels(), &[0, 128, 255]);
    }

    #[test]
    fn csv_dump_is_lossless() {
        let vals = vec![0.1, 1.0 / 3.0, std::f64::consts::PI, 1e-300, 0.0, 80.13888888888889];
        let m = FeatureMap::new(FeatureKind::ContrastRaw, 3, 2, vals).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = FeatureMap::read_csv(FeatureKind::ContrastRaw, std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
