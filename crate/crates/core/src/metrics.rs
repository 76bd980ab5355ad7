//! Blind dehazing quality indicators.
//!
//! `e` is the relative gain in visible edges, `r_bar` the geometric mean of
//! gradient ratios over the restored image's visible edges, and `sigma` the
//! fraction of pixels newly driven to black or white. Standard deviation and
//! average gradient are reported on the 8-bit scale.
//!
//! A pixel is a visible edge when its Sobel gradient magnitude is non-zero and
//! at least `threshold` times the image's dynamic range.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::scalar::Real;

pub const DEFAULT_EDGE_THRESHOLD: f64 = 0.05;
/// Original gradients below this are excluded from the ratio average.
pub const MIN_ORIGINAL_GRADIENT: f64 = 1e-9;
/// Distance from 0 or 1 within which a sample counts as saturated.
pub const SATURATION_EPS: f64 = 1.0 / (2.0 * 65535.0);

/// Sobel gradient magnitude, scaled by 1/8 so a unit step gives 0.5 per side.
/// Borders are edge-replicated.
pub fn sobel_magnitude<T: Real>(img: &GrayImage<T>) -> GrayImage<T> {
    let (rows, cols) = img.dims();
    let eighth = T::lit(0.125);
    let two = T::lit(2.0);
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows as isize {
        for c in 0..cols as isize {
            let p = |dr: isize, dc: isize| img.get_clamped(r + dr, c + dc);
            let gx = (p(-1, 1) + two * p(0, 1) + p(1, 1)) - (p(-1, -1) + two * p(0, -1) + p(1, -1));
            let gy = (p(1, -1) + two * p(1, 0) + p(1, 1)) - (p(-1, -1) + two * p(-1, 0) + p(-1, 1));
            out.push(gx.hypot(gy) * eighth);
        }
    }
    GrayImage::new(rows, cols, out).expect("same dims as input")
}

#[derive(Clone, Debug)]
pub struct EdgeMap<T = f64> {
    pub gradient: GrayImage<T>,
    pub mask: Vec<bool>,
    pub count: usize,
}

pub fn visible_edges<T: Real>(img: &GrayImage<T>, threshold: f64) -> Result<EdgeMap<T>> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidParameter(format!("edge threshold must be >= 0, got {threshold}")));
    }
    let gradient = sobel_magnitude(img);
    let (lo, hi) = img.min_max();
    let cut = T::lit(threshold) * (hi - lo);
    let mask: Vec<bool> = gradient.data().iter().map(|&g| g > T::zero() && g >= cut).collect();
    let count = mask.iter().filter(|&&m| m).count();
    Ok(EdgeMap { gradient, mask, count })
}

/// `(n_r - n_o) / n_o`; undefined when the original has no visible edge.
pub fn metric_e<T: Real>(original: &GrayImage<T>, restored: &GrayImage<T>, threshold: f64) -> Result<f64> {
    original.ensure_same_dims(restored)?;
    let n_o = visible_edges(original, threshold)?.count;
    let n_r = visible_edges(restored, threshold)?.count;
    rate_of_new_edges(n_o, n_r)
}

fn rate_of_new_edges(n_o: usize, n_r: usize) -> Result<f64> {
    if n_o == 0 {
        return Err(Error::Undefined("e: original image has no visible edges"));
    }
    Ok((n_r as f64 - n_o as f64) / n_o as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientRatio {
    pub r_bar: f64,
    /// Restored edge pixels that entered the average.
    pub used: usize,
    /// Restored edge pixels skipped because the original gradient was ~0.
    pub excluded: usize,
}

/// Geometric mean of `grad_restored / grad_original` over the restored
/// image's visible edges.
pub fn metric_rbar<T: Real>(original: &GrayImage<T>, restored: &GrayImage<T>, threshold: f64) -> Result<GradientRatio> {
    original.ensure_same_dims(restored)?;
    let edges = visible_edges(restored, threshold)?;
    let g_o = sobel_magnitude(original);
    gradient_ratio(&edges, &g_o)
}

fn gradient_ratio<T: Real>(edges: &EdgeMap<T>, g_o: &GrayImage<T>) -> Result<GradientRatio> {
    let (mut log_sum, mut used, mut excluded) = (0.0, 0usize, 0usize);
    for ((&m, &gr), &go) in edges.mask.iter().zip(edges.gradient.data()).zip(g_o.data()) {
        if !m {
            continue;
        }
        let go = go.as_f64();
        if go < MIN_ORIGINAL_GRADIENT {
            excluded += 1;
            continue;
        }
        log_sum += (gr.as_f64() / go).ln();
        used += 1;
    }
    if used == 0 {
        return Err(Error::Undefined("r_bar: no restored visible edge with a measurable original gradient"));
    }
    Ok(GradientRatio { r_bar: (log_sum / used as f64).exp(), used, excluded })
}

fn is_saturated(v: f64) -> bool {
    v <= SATURATION_EPS || v >= 1.0 - SATURATION_EPS
}

/// Number of pixels saturated in `restored` but not in `original`.
pub fn newly_saturated<T: Real>(original: &GrayImage<T>, restored: &GrayImage<T>) -> Result<usize> {
    original.ensure_same_dims(restored)?;
    Ok(original
        .data()
        .iter()
        .zip(restored.data())
        .filter(|(&o, &r)| is_saturated(r.as_f64()) && !is_saturated(o.as_f64()))
        .count())
}

/// `n_s / (rows * cols)`.
pub fn metric_sigma<T: Real>(original: &GrayImage<T>, restored: &GrayImage<T>) -> Result<f64> {
    Ok(newly_saturated(original, restored)? as f64 / original.len() as f64)
}

/// Population standard deviation, times 255.
pub fn metric_sd<T: Real>(img: &GrayImage<T>) -> f64 {
    // deviations from the first sample keep constant images exactly at zero
    let n = img.len() as f64;
    let base = img.data()[0].as_f64();
    let dev: Vec<f64> = img.data().iter().map(|v| v.as_f64() - base).collect();
    let mean = dev.iter().sum::<f64>() / n;
    let var = dev.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() * 255.0
}

/// Mean of `sqrt((dx^2 + dy^2) / 2)` with forward differences, times 255.
///
/// The mean runs over pixels that have both a right and a lower neighbour.
/// Single-row or single-column images use the one available difference.
pub fn metric_ag<T: Real>(img: &GrayImage<T>) -> f64 {
    let (rows, cols) = img.dims();
    if rows == 1 && cols == 1 {
        return 0.0;
    }
    let at = |r: usize, c: usize| img[(r, c)].as_f64();
    let (r_end, c_end) = (rows.saturating_sub(1).max(1), cols.saturating_sub(1).max(1));
    let mut sum = 0.0;
    for r in 0..r_end {
        for c in 0..c_end {
            let dx = if cols > 1 { at(r, c + 1) - at(r, c) } else { 0.0 };
            let dy = if rows > 1 { at(r + 1, c) - at(r, c) } else { 0.0 };
            sum += ((dx * dx + dy * dy) / 2.0).sqrt();
        }
    }
    sum / (r_end * c_end) as f64 * 255.0
}

/// All indicators for one original / restored pair.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    /// `None` when undefined (no visible edge in the original).
    pub e: Option<f64>,
    /// `None` when undefined (no usable restored edge).
    pub r_bar: Option<f64>,
    pub sigma: f64,
    pub sd: f64,
    pub ag: f64,
    pub n_o: usize,
    pub n_r: usize,
    pub n_s: usize,
    pub threshold: f64,
}

pub const CSV_HEADER: &str = "file,e,rbar,sigma,sd,ag,n_o,n_r,n_s,threshold";

impl MetricsReport {
    pub fn assess<T: Real>(original: &GrayImage<T>, restored: &GrayImage<T>, threshold: f64) -> Result<Self> {
        original.ensure_same_dims(restored)?;
        let orig_edges = visible_edges(original, threshold)?;
        let rest_edges = visible_edges(restored, threshold)?;
        let n_s = newly_saturated(original, restored)?;
        Ok(Self {
            e: rate_of_new_edges(orig_edges.count, rest_edges.count).ok(),
            r_bar: gradient_ratio(&rest_edges, &orig_edges.gradient).ok().map(|g| g.r_bar),
            sigma: n_s as f64 / original.len() as f64,
            sd: metric_sd(restored),
            ag: metric_ag(restored),
            n_o: orig_edges.count,
            n_r: rest_edges.count,
            n_s,
            threshold,
        })
    }

    /// One CSV line matching [`CSV_HEADER`]; undefined values are written as `nan`.
    pub fn csv_row(&self, file: &str) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |x| format!("{x:.6}"));
        format!(
            "{},{},{},{:.6},{:.6},{:.6},{},{},{},{}",
            csv_field(file),
            opt(self.e),
            opt(self.r_bar),
            self.sigma,
            self.sd,
            self.ag,
            self.n_o,
            self.n_r,
            self.n_s,
            self.threshold
        )
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(rows: usize, cols: usize, at: usize) -> GrayImage {
        GrayImage::from_fn(rows, cols, |_, c| if c >= at { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn constant_has_no_edges() {
        let img = GrayImage::filled(6, 6, 0.3).unwrap();
        assert_eq!(visible_edges(&img, 0.05).unwrap().count, 0);
        assert_eq!(visible_edges(&img, 0.0).unwrap().count, 0);
        assert!(matches!(metric_e(&img, &img, 0.05), Err(Error::Undefined(_))));
    }

    #[test]
    fn unit_step_marks_two_columns() {
        // Sobel row kernel [1 2 1]^T x [-1 0 1]: columns c-1 and c straddle the step,
        // each with response (1+2+1)/8 = 0.5.
        let img = step(7, 10, 4);
        let edges = visible_edges(&img, 0.05).unwrap();
        assert_eq!(edges.count, 7 * 2);
        for r in 0..7 {
            assert_eq!(edges.gradient[(r, 3)], 0.5);
            assert_eq!(edges.gradient[(r, 4)], 0.5);
            assert!(edges.mask[r * 10 + 3] && edges.mask[r * 10 + 4]);
        }
        assert!(visible_edges(&img, -0.1).is_err());
    }

    #[test]
    fn zero_threshold_counts_any_gradient() {
        let mut img = GrayImage::filled(5, 5, 0.0).unwrap();
        img[(2, 2)] = 1e-3;
        // 3x3 neighbourhood minus the center, whose Sobel response is zero
        assert_eq!(visible_edges(&img, 0.0).unwrap().count, 8);
    }

    #[test]
    fn e_formula() {
        assert_eq!(rate_of_new_edges(100, 250).unwrap(), 1.5);
        let img = step(8, 8, 3);
        assert_eq!(metric_e(&img, &img, 0.05).unwrap(), 0.0);
    }

    #[test]
    fn rbar_cases() {
        let img = GrayImage::from_fn(9, 9, |r, c| ((r * 13 + c * 7) % 11) as f64 / 11.0).unwrap();
        assert!((metric_rbar(&img, &img, 0.05).unwrap().r_bar - 1.0).abs() < 1e-15);
        let doubled = img.map(|v| 2.0 * v);
        assert!((metric_rbar(&img, &doubled, 0.05).unwrap().r_bar - 2.0).abs() < 1e-12);

        // two edge pixels with ratios 2 and 8
        let g_o = GrayImage::new(1, 2, vec![1.0, 1.0]).unwrap();
        let edges = EdgeMap { gradient: GrayImage::new(1, 2, vec![2.0, 8.0]).unwrap(), mask: vec![true, true], count: 2 };
        assert!((gradient_ratio(&edges, &g_o).unwrap().r_bar - 4.0).abs() < 1e-15);
    }

    #[test]
    fn rbar_excludes_flat_original() {
        let flat = GrayImage::filled(6, 6, 0.5).unwrap();
        let restored = step(6, 6, 3);
        assert!(matches!(metric_rbar(&flat, &restored, 0.05), Err(Error::Undefined(_))));
    }

    #[test]
    fn sigma_cases() {
        let orig = GrayImage::filled(100, 100, 0.5).unwrap();
        assert_eq!(metric_sigma(&orig, &orig).unwrap(), 0.0);
        let mut rest = orig.clone();
        for i in 0..5 {
            rest[(i, i)] = if i % 2 == 0 { 1.0 } else { 0.0 };
        }
        assert_eq!(metric_sigma(&orig, &rest).unwrap(), 0.0005);
        let white = GrayImage::filled(100, 100, 1.0).unwrap();
        assert_eq!(metric_sigma(&orig, &white).unwrap(), 1.0);
        // already saturated in the original does not count
        assert_eq!(metric_sigma(&white, &white).unwrap(), 0.0);
    }

    #[test]
    fn sd_and_ag() {
        let c = GrayImage::filled(4, 4, 0.7).unwrap();
        assert_eq!(metric_sd(&c), 0.0);
        assert_eq!(metric_ag(&c), 0.0);
        let halves = GrayImage::from_fn(4, 4, |_, col| if col < 2 { 0.0 } else { 1.0 }).unwrap();
        assert!((metric_sd(&halves) - 127.5).abs() < 1e-12);
        // ramp 0..1 over 256 columns: dx = 1/255 everywhere
        let ramp = GrayImage::from_fn(4, 256, |_, col| col as f64 / 255.0).unwrap();
        assert!((metric_ag(&ramp) - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn report_and_csv() {
        let img = step(8, 8, 4);
        let rep = MetricsReport::assess(&img, &img, 0.05).unwrap();
        assert_eq!(rep.e, Some(0.0));
        assert_eq!(rep.r_bar, Some(1.0));
        assert_eq!(rep.sigma, 0.0);
        let row = rep.csv_row("a.png");
        assert!(row.starts_with("a.png,0.000000,1.000000,0.000000,"), "{row}");
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        let flat = GrayImage::filled(8, 8, 0.5).unwrap();
        let rep = MetricsReport::assess(&flat, &flat, 0.05).unwrap();
        assert!(rep.csv_row("x,y").starts_with("\"x,y\",nan,nan,"));
    }
}
