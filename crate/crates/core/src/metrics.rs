//! Correlation statistics used to judge how well a scrambled image destroys
//! spatial structure.
//!
//! Zero-variance inputs have no defined Pearson coefficient; every statistic
//! here returns 0 for them and the report sets its `degenerate` flag.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::below;
use crate::error::{Error, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Horizontal,
    Vertical,
    Diagonal,
}

impl Direction {
    pub const ALL: [Direction; 3] = [Direction::Horizontal, Direction::Vertical, Direction::Diagonal];

    /// Neighbour offset `(dx, dy)`.
    pub fn offset(self) -> (usize, usize) {
        match self {
            Direction::Horizontal => (1, 0),
            Direction::Vertical => (0, 1),
            Direction::Diagonal => (1, 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Horizontal => "horizontal",
            Direction::Vertical => "vertical",
            Direction::Diagonal => "diagonal",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Direction::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown direction {s:?}")))
    }
}

/// A Pearson coefficient plus whether it was forced to 0 by zero variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub value: f64,
    pub degenerate: bool,
}

impl Correlation {
    const DEGENERATE: Correlation = Correlation {
        value: 0.0,
        degenerate: true,
    };
}

fn pearson(xs: &[f64], ys: &[f64]) -> Correlation {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Correlation::DEGENERATE;
    }
    Correlation {
        value: (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0),
        degenerate: false,
    }
}

/// All in-bounds `(pixel, neighbour)` intensity pairs in raster order.
pub fn adjacent_pairs(img: &GrayImage, dir: Direction) -> Result<Vec<(u8, u8)>> {
    let (dx, dy) = dir.offset();
    let (w, h) = (img.width(), img.height());
    if w <= dx || h <= dy {
        return Err(Error::Dimension(format!("{w}x{h} image has no {dir} neighbour pairs")));
    }
    let mut pairs = Vec::with_capacity((w - dx) * (h - dy));
    for y in 0..h - dy {
        for x in 0..w - dx {
            pairs.push((img.get(x, y), img.get(x + dx, y + dy)));
        }
    }
    Ok(pairs)
}

fn pairs_correlation(pairs: &[(u8, u8)]) -> Correlation {
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.iter().map(|&(a, b)| (f64::from(a), f64::from(b))).unzip();
    pearson(&xs, &ys)
}

pub fn adjacent_correlation_detail(img: &GrayImage, dir: Direction) -> Result<Correlation> {
    Ok(pairs_correlation(&adjacent_pairs(img, dir)?))
}

/// Pearson correlation over every in-bounds adjacent pair in `dir`.
pub fn adjacent_correlation(img: &GrayImage, dir: Direction) -> Result<f64> {
    adjacent_correlation_detail(img, dir).map(|c| c.value)
}

/// Co-occurrence settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlcmParams {
    /// Number of gray levels after quantization.
    pub levels: usize,
    /// Neighbour offset `(dy, dx)`.
    pub offset: (i64, i64),
    /// Count each pair in both orders.
    pub symmetric: bool,
}

impl Default for GlcmParams {
    fn default() -> Self {
        Self {
            levels: 8,
            offset: (0, 1),
            symmetric: true,
        }
    }
}

/// Maps an 8-bit intensity into `0..levels`.
pub fn quantize_level(intensity: u8, levels: usize) -> usize {
    (usize::from(intensity) * levels / 256).min(levels - 1)
}

/// Normalized gray-level co-occurrence matrix, row-major `levels x levels`.
pub fn glcm(img: &GrayImage, params: &GlcmParams) -> Result<Vec<f64>> {
    let levels = params.levels;
    if !(2..=256).contains(&levels) {
        return Err(Error::Parameter(format!("levels must be in 2..=256, got {levels}")));
    }
    let (dy, dx) = params.offset;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let q: Vec<usize> = img.pixels().iter().map(|&p| quantize_level(p, levels)).collect();
    let mut counts = vec![0u64; levels * levels];
    for y in 0..h {
        let yy = y + dy;
        if !(0..h).contains(&yy) {
            continue;
        }
        for x in 0..w {
            let xx = x + dx;
            if !(0..w).contains(&xx) {
                continue;
            }
            let i = q[(y * w + x) as usize];
            let j = q[(yy * w + xx) as usize];
            counts[i * levels + j] += 1;
            if params.symmetric {
                counts[j * levels + i] += 1;
            }
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::Dimension(format!(
            "offset {:?} leaves no pixel pairs in a {w}x{h} image",
            params.offset
        )));
    }
    Ok(counts.into_iter().map(|c| c as f64 / total as f64).collect())
}

pub fn glcm_correlation_detail(img: &GrayImage, params: &GlcmParams) -> Result<Correlation> {
    let levels = params.levels;
    let p = glcm(img, params)?;
    let (mut mu_i, mut mu_j) = (0.0, 0.0);
    for i in 0..levels {
        for j in 0..levels {
            let pij = p[i * levels + j];
            mu_i += i as f64 * pij;
            mu_j += j as f64 * pij;
        }
    }
    let (mut var_i, mut var_j, mut cov) = (0.0, 0.0, 0.0);
    for i in 0..levels {
        let di = i as f64 - mu_i;
        for j in 0..levels {
            let dj = j as f64 - mu_j;
            let pij = p[i * levels + j];
            var_i += di * di * pij;
            var_j += dj * dj * pij;
            cov += di * dj * pij;
        }
    }
    if var_i == 0.0 || var_j == 0.0 {
        return Ok(Correlation::DEGENERATE);
    }
    Ok(Correlation {
        value: (cov / (var_i * var_j).sqrt()).clamp(-1.0, 1.0),
        degenerate: false,
    })
}

/// GLCM correlation with `levels` gray levels at offset `(dy, dx)`,
/// symmetrized.
pub fn glcm_correlation(img: &GrayImage, levels: usize, offset: (i64, i64)) -> Result<f64> {
    let params = GlcmParams {
        levels,
        offset,
        symmetric: true,
    };
    glcm_correlation_detail(img, &params).map(|c| c.value)
}

pub fn corr2_detail(a: &GrayImage, b: &GrayImage) -> Result<Correlation> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(Error::shape(
            format!("{}x{}", a.width(), a.height()),
            format!("{}x{}", b.width(), b.height()),
        ));
    }
    let xs: Vec<f64> = a.pixels().iter().map(|&p| f64::from(p)).collect();
    let ys: Vec<f64> = b.pixels().iter().map(|&p| f64::from(p)).collect();
    Ok(pearson(&xs, &ys))
}

/// 2-D Pearson correlation between two equally sized images.
pub fn corr2(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    corr2_detail(a, b).map(|c| c.value)
}

/// Adjacent-pair samples for scatter plots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScatterPairs {
    pub direction: Direction,
    pub pairs: Vec<(u8, u8)>,
}

impl ScatterPairs {
    pub fn pearson(&self) -> f64 {
        pairs_correlation(&self.pairs).value
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "intensity,neighbor")?;
        for (a, b) in &self.pairs {
            writeln!(out, "{a},{b}")?;
        }
        Ok(())
    }
}

/// Adjacent pairs in `dir`: all of them in raster order when `sample_n` is 0,
/// otherwise `sample_n` distinct pairs drawn with a ChaCha8 generator seeded
/// from `seed`.
pub fn correlation_scatter(img: &GrayImage, dir: Direction, sample_n: usize, seed: u64) -> Result<ScatterPairs> {
    let mut pairs = adjacent_pairs(img, dir)?;
    if sample_n > 0 {
        if sample_n > pairs.len() {
            return Err(Error::Parameter(format!(
                "requested {sample_n} samples but only {} {dir} pairs exist",
                pairs.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // partial Fisher-Yates: the first sample_n slots end up drawn without replacement
        for i in 0..sample_n {
            let j = i + below(&mut rng, (pairs.len() - i) as u64) as usize;
            pairs.swap(i, j);
        }
        pairs.truncate(sample_n);
    }
    Ok(ScatterPairs { direction: dir, pairs })
}

/// One comparison-table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scheme: String,
    pub horizontal: f64,
    pub vertical: f64,
    pub diagonal: f64,
    pub glcm_correlation: f64,
    pub corr2_with_original: f64,
    /// True when any statistic hit the zero-variance convention.
    pub degenerate: bool,
    pub params_echo: serde_json::Value,
}

pub const REPORT_CSV_HEADER: [&str; 8] = [
    "Image",
    "Horizontal Coeff",
    "Vertical Coeff",
    "Diagonal Coeff",
    "GLCM Correlation",
    "Correlation (Orig, Permuted) – Corr2",
    "Degenerate",
    "Params",
];

/// Fills every statistic for `permuted`, with corr2 taken against `original`.
/// `params_echo` records the GLCM settings; callers may extend it.
pub fn analysis_report(
    original: &GrayImage,
    permuted: &GrayImage,
    scheme: &str,
    glcm_params: &GlcmParams,
) -> Result<MetricsReport> {
    let h = adjacent_correlation_detail(permuted, Direction::Horizontal)?;
    let v = adjacent_correlation_detail(permuted, Direction::Vertical)?;
    let d = adjacent_correlation_detail(permuted, Direction::Diagonal)?;
    let g = glcm_correlation_detail(permuted, glcm_params)?;
    let c = corr2_detail(original, permuted)?;
    Ok(MetricsReport {
        scheme: scheme.to_string(),
        horizontal: h.value,
        vertical: v.value,
        diagonal: d.value,
        glcm_correlation: g.value,
        corr2_with_original: c.value,
        degenerate: [h, v, d, g, c].iter().any(|x| x.degenerate),
        params_echo: serde_json::json!({ "glcm": glcm_params }),
    })
}

fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_reports_csv(reports: &[MetricsReport], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_CSV_HEADER)?;
    for r in reports {
        w.write_record([
            r.scheme.clone(),
            fmt_real(r.horizontal),
            fmt_real(r.vertical),
            fmt_real(r.diagonal),
            fmt_real(r.glcm_correlation),
            fmt_real(r.corr2_with_original),
            r.degenerate.to_string(),
            serde_json::to_string(&r.params_echo)?,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_reports_csv(input: impl Read) -> Result<Vec<MetricsReport>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(REPORT_CSV_HEADER) {
        return Err(Error::Serialization(format!("unexpected report header {header:?}")));
    }
    let real = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| Error::Serialization(format!("bad number {s:?}: {e}")))
    };
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok(MetricsReport {
                scheme: rec[0].to_string(),
                horizontal: real(&rec[1])?,
                vertical: real(&rec[2])?,
                diagonal: real(&rec[3])?,
                glcm_correlation: real(&rec[4])?,
                corr2_with_original: real(&rec[5])?,
                degenerate: rec[6]
                    .parse()
                    .map_err(|_| Error::Serialization(format!("bad flag {:?}", &rec[6])))?,
                params_echo: serde_json::from_str(&rec[7])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_rows_correlate_perfectly() {
        let img = GrayImage::from_fn(6, 4, |x, _| (x * 40) as u8).unwrap();
        let h = adjacent_correlation(&img, Direction::Horizontal).unwrap();
        assert!((h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_image_is_degenerate() {
        let img = GrayImage::filled(5, 5, 77).unwrap();
        for d in Direction::ALL {
            let c = adjacent_correlation_detail(&img, d).unwrap();
            assert_eq!(c, Correlation::DEGENERATE);
        }
        assert_eq!(glcm_correlation(&img, 8, (0, 1)).unwrap(), 0.0);
        assert_eq!(corr2(&img, &img).unwrap(), 0.0);
        assert!(
            analysis_report(&img, &img, "x", &GlcmParams::default())
                .unwrap()
                .degenerate
        );
    }

    #[test]
    fn too_small_for_direction() {
        let row = GrayImage::new(3, 1, vec![1, 2, 3]).unwrap();
        assert!(adjacent_correlation(&row, Direction::Horizontal).is_ok());
        assert!(matches!(
            adjacent_correlation(&row, Direction::Vertical),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            adjacent_correlation(&row, Direction::Diagonal),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn checkerboard_glcm_is_anticorrelated() {
        let img = GrayImage::from_fn(8, 8, |x, y| if (x + y) % 2 == 0 { 0 } else { 255 }).unwrap();
        let p = glcm(&img, &GlcmParams::default()).unwrap();
        // only cells (0,7) and (7,0) are populated, half each
        assert_eq!(p[7], 0.5);
        assert_eq!(p[7 * 8], 0.5);
        let g = glcm_correlation(&img, 8, (0, 1)).unwrap();
        assert!((g + 1.0).abs() < 1e-9);
    }

    #[test]
    fn glcm_parameter_checks() {
        let img = GrayImage::filled(3, 3, 0).unwrap();
        assert!(matches!(glcm_correlation(&img, 1, (0, 1)), Err(Error::Parameter(_))));
        assert!(matches!(glcm_correlation(&img, 8, (0, 3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn quantization_bins() {
        assert_eq!(quantize_level(0, 8), 0);
        assert_eq!(quantize_level(31, 8), 0);
        assert_eq!(quantize_level(32, 8), 1);
        assert_eq!(quantize_level(255, 8), 7);
        assert_eq!(quantize_level(255, 256), 255);
    }

    #[test]
    fn corr2_self_and_negative() {
        let img = GrayImage::from_fn(7, 5, |x, y| ((x * 13 + y * 71) % 256) as u8).unwrap();
        let neg = GrayImage::new(7, 5, img.pixels().iter().map(|p| 255 - p).collect()).unwrap();
        assert!((corr2(&img, &img).unwrap() - 1.0).abs() < 1e-12);
        assert!((corr2(&img, &neg).unwrap() + 1.0).abs() < 1e-12);
        let other = GrayImage::filled(5, 7, 0).unwrap();
        assert!(matches!(corr2(&img, &other), Err(Error::Shape { .. })));
    }

    #[test]
    fn scatter_counts_and_sampling() {
        let img = GrayImage::from_fn(3, 3, |x, y| (x + 3 * y) as u8).unwrap();
        assert_eq!(
            correlation_scatter(&img, Direction::Horizontal, 0, 0)
                .unwrap()
                .pairs
                .len(),
            6
        );
        assert_eq!(
            correlation_scatter(&img, Direction::Diagonal, 0, 0)
                .unwrap()
                .pairs
                .len(),
            4
        );
        let a = correlation_scatter(&img, Direction::Vertical, 4, 9).unwrap();
        let b = correlation_scatter(&img, Direction::Vertical, 4, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pairs.len(), 4);
        let mut all = correlation_scatter(&img, Direction::Vertical, 6, 9).unwrap().pairs;
        all.sort();
        let mut reference = adjacent_pairs(&img, Direction::Vertical).unwrap();
        reference.sort();
        assert_eq!(all, reference);
        assert!(matches!(
            correlation_scatter(&img, Direction::Horizontal, 7, 0),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn report_of_image_with_itself() {
        let img = GrayImage::from_fn(9, 9, |x, y| ((x * x + 3 * y) % 256) as u8).unwrap();
        let r = analysis_report(&img, &img, "original", &GlcmParams::default()).unwrap();
        assert!((r.corr2_with_original - 1.0).abs() < 1e-12);
        assert_eq!(r.horizontal, adjacent_correlation(&img, Direction::Horizontal).unwrap());
        assert_eq!(r.vertical, adjacent_correlation(&img, Direction::Vertical).unwrap());
    }

    #[test]
    fn csv_header_and_roundtrip() {
        let img = GrayImage::from_fn(9, 9, |x, y| ((x * 7 + y * y) % 256) as u8).unwrap();
        let flipped = GrayImage::from_fn(9, 9, |x, y| img.get(8 - x, y)).unwrap();
        let reports = vec![
            analysis_report(&img, &img, "original", &GlcmParams::default()).unwrap(),
            analysis_report(&img, &flipped, "flipped", &GlcmParams::default()).unwrap(),
        ];
        let mut buf = Vec::new();
        write_reports_csv(&reports, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "Image,Horizontal Coeff,Vertical Coeff,Diagonal Coeff,GLCM Correlation,\"Correlation (Orig, Permuted) – Corr2\",Degenerate,Params\n"
        ));
        assert_eq!(read_reports_csv(&buf[..]).unwrap(), reports);
    }
}
