//! Brute-force reference implementations. Each one follows the textbook
//! definition directly and shares no code path with the library.

#![allow(dead_code)]

use std::f64::consts::PI;

use permutex::GrayImage;

/// Direct double-sum DFT: `F(u,v) = sum_x sum_y I(x,y) e^{-2 pi j (u x / H + v y / W)}`
/// with `x` the row and `y` the column index. Returns `(re, im)` row-major.
pub fn dft_direct(img: &GrayImage) -> Vec<(f64, f64)> {
    let (w, h) = (img.width(), img.height());
    let mut out = Vec::with_capacity(w * h);
    for u in 0..h {
        for v in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for x in 0..h {
                for y in 0..w {
                    let frac = ((u * x) % h) as f64 / h as f64 + ((v * y) % w) as f64 / w as f64;
                    let angle = -2.0 * PI * frac;
                    let i = f64::from(img.get(y, x));
                    re += i * angle.cos();
                    im += i * angle.sin();
                }
            }
            out.push((re, im));
        }
    }
    out
}

/// Windowed population standard deviation computed on an explicitly
/// edge-padded copy, with exact integer moments.
pub fn contrast_brute(img: &GrayImage, m: usize) -> Vec<f64> {
    let half = m / 2;
    let (w, h) = (img.width(), img.height());
    let pw = w + 2 * half;
    let ph = h + 2 * half;
    let mut padded = vec![0i64; pw * ph];
    for py in 0..ph {
        for px in 0..pw {
            let sx = px.saturating_sub(half).min(w - 1);
            let sy = py.saturating_sub(half).min(h - 1);
            padded[py * pw + px] = i64::from(img.get(sx, sy));
        }
    }
    let n = (m * m) as i64;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (mut s, mut s2) = (0i64, 0i64);
            for wy in 0..m {
                for wx in 0..m {
                    let v = padded[(y + wy) * pw + (x + wx)];
                    s += v;
                    s2 += v * v;
                }
            }
            // n^2 var = n sum(x^2) - (sum x)^2, exact in integers
            let scaled = n * s2 - s * s;
            out.push((scaled as f64).sqrt() / n as f64);
        }
    }
    out
}

/// Pearson correlation from exact integer moments; 0 on zero variance.
pub fn pearson_exact(pairs: &[(i64, i64)]) -> f64 {
    let n = pairs.len() as i128;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0i128, 0i128, 0i128, 0i128, 0i128);
    for &(a, b) in pairs {
        let (a, b) = (a as i128, b as i128);
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    let num = n * sxy - sx * sy;
    let vx = n * sxx - sx * sx;
    let vy = n * syy - sy * sy;
    if vx == 0 || vy == 0 {
        return 0.0;
    }
    num as f64 / ((vx as f64).sqrt() * (vy as f64).sqrt())
}

/// Lists every pixel pair at offset `(dx, dy)` by scanning all positions and
/// bounds-checking the neighbour.
pub fn pairs_brute(img: &GrayImage, dx: i64, dy: i64) -> Vec<(i64, i64)> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut pairs = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let (nx, ny) = (x + dx, y + dy);
            if nx >= 0 && nx < w && ny >= 0 && ny < h {
                pairs.push((
                    i64::from(img.get(x as usize, y as usize)),
                    i64::from(img.get(nx as usize, ny as usize)),
                ));
            }
        }
    }
    pairs
}

pub fn adjacent_brute(img: &GrayImage, dx: i64, dy: i64) -> f64 {
    pearson_exact(&pairs_brute(img, dx, dy))
}

/// Symmetric GLCM correlation as the Pearson coefficient of the multiset of
/// quantized pairs counted in both orders.
pub fn glcm_brute(img: &GrayImage, levels: i64, dy: i64, dx: i64) -> f64 {
    let q = |v: i64| (v * levels / 256).min(levels - 1);
    let mut pairs = Vec::new();
    for (a, b) in pairs_brute(img, dx, dy) {
        pairs.push((q(a), q(b)));
        pairs.push((q(b), q(a)));
    }
    pearson_exact(&pairs)
}

pub fn corr2_brute(a: &GrayImage, b: &GrayImage) -> f64 {
    let pairs: Vec<(i64, i64)> = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| (i64::from(x), i64::from(y)))
        .collect();
    pearson_exact(&pairs)
}

/// Quadratic selection sort: repeatedly take the largest remaining value,
/// lowest index first on ties.
pub fn argsort_desc_selection(values: &[f64]) -> Vec<usize> {
    let mut taken = vec![false; values.len()];
    let mut order = Vec::with_capacity(values.len());
    for _ in 0..values.len() {
        let mut best: Option<usize> = None;
        for (i, &v) in values.iter().enumerate() {
            if taken[i] {
                continue;
            }
            if best.is_none_or(|b| v > values[b]) {
                best = Some(i);
            }
        }
        let b = best.unwrap();
        taken[b] = true;
        order.push(b);
    }
    order
}

/// Permutation check by sorting a copy and comparing with `0..n`.
pub fn is_bijection(p: &[usize]) -> bool {
    let mut sorted = p.to_vec();
    sorted.sort_unstable();
    sorted.into_iter().eq(0..p.len())
}
