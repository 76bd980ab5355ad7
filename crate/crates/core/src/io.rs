//! PNG / PGM reading and writing, and on-disk stack persistence.
//!
//! Every file is written to a temporary sibling and renamed into place, so a
//! reader never observes a partially written output.

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat, ImageReader};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::scalar::Real;
use crate::stack::ImageStack;

/// Loads a PNG or binary PGM as a single plane.
///
/// Color inputs are reduced to the plain average of their color channels
/// (alpha ignored). With `normalize` the samples are divided by the format's
/// maximum code value (255 or 65535); otherwise raw code values are kept.
pub fn load_image<T: Real>(path: impl AsRef<Path>, normalize: bool) -> Result<GrayImage<T>> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|source| Error::Read { path: path.to_path_buf(), source })?
        .with_guessed_format()
        .map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
    let decoded = reader.decode().map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let (cols, rows) = (decoded.width() as usize, decoded.height() as usize);
    if rows == 0 || cols == 0 {
        return Err(Error::Decode { path: path.to_path_buf(), message: "zero-sized image".into() });
    }
    let (samples, max): (Vec<f64>, f64) = match decoded {
        DynamicImage::ImageLuma8(b) => (b.into_raw().into_iter().map(f64::from).collect(), 255.0),
        DynamicImage::ImageLumaA8(b) => (stride_avg(&b.into_raw(), 2, 1), 255.0),
        DynamicImage::ImageRgb8(b) => (stride_avg(&b.into_raw(), 3, 3), 255.0),
        DynamicImage::ImageRgba8(b) => (stride_avg(&b.into_raw(), 4, 3), 255.0),
        DynamicImage::ImageLuma16(b) => (b.into_raw().into_iter().map(f64::from).collect(), 65535.0),
        DynamicImage::ImageLumaA16(b) => (stride_avg(&b.into_raw(), 2, 1), 65535.0),
        DynamicImage::ImageRgb16(b) => (stride_avg(&b.into_raw(), 3, 3), 65535.0),
        DynamicImage::ImageRgba16(b) => (stride_avg(&b.into_raw(), 4, 3), 65535.0),
        other => {
            return Err(Error::Unsupported {
                path: path.to_path_buf(),
                message: format!("unsupported sample layout {:?}", other.color()),
            })
        }
    };
    let scale = if normalize { 1.0 / max } else { 1.0 };
    GrayImage::new(rows, cols, samples.into_iter().map(|v| T::lit(v * scale)).collect())
}

fn stride_avg<P: Copy + Into<f64>>(raw: &[P], stride: usize, take: usize) -> Vec<f64> {
    raw.chunks_exact(stride)
        .map(|px| px[..take].iter().map(|&v| v.into()).sum::<f64>() / take as f64)
        .collect()
}

/// Quantizes `[0, 1]` samples to 16-bit codes, clamping out-of-range values.
pub fn to_u16_codes<T: Real>(img: &GrayImage<T>) -> Vec<u16> {
    img.data()
        .iter()
        .map(|&v| {
            let v = v.as_f64();
            let v = if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 };
            (v * 65535.0).round() as u16
        })
        .collect()
}

/// Writes a 16-bit grayscale image. The container follows the extension
/// (`.pgm` gives binary P5, anything else PNG).
pub fn save_image16<T: Real>(img: &GrayImage<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let codes = to_u16_codes(img);
    let is_pgm = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let bytes = if is_pgm {
        // binary P5, big-endian 16-bit samples
        let mut bytes = format!("P5\n{} {}\n65535\n", img.cols(), img.rows()).into_bytes();
        bytes.extend(codes.iter().flat_map(|c| c.to_be_bytes()));
        bytes
    } else {
        let buf = image::ImageBuffer::<image::Luma<u16>, _>::from_raw(img.cols() as u32, img.rows() as u32, codes)
            .expect("buffer length matches dims");
        let mut bytes = Vec::new();
        DynamicImage::ImageLuma16(buf)
            .write_to(&mut Cursor::new(&mut bytes), ImageFormat::Png)
            .map_err(|e| Error::Encode(e.to_string()))?;
        bytes
    };
    write_atomic(path, &bytes)
}

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let wrap = |source| Error::Write { path: path.to_path_buf(), source };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(wrap)?;
    }
    let tmp = temp_sibling(path);
    fs::write(&tmp, bytes).map_err(wrap)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        wrap(e)
    })
}

fn temp_sibling(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp-{}", std::process::id()))
}

const META_FILE: &str = "meta.txt";

fn layer_file(t: usize) -> String {
    format!("layer_{t:04}.pgm")
}

/// Persists a stack as per-layer 16-bit PGMs plus `meta.txt`.
///
/// The volume's `[min, max]` is mapped to the full code range; the bounds are
/// recorded as `min=` / `max=` lines so [`load_stack`] can undo the mapping.
pub fn save_stack<T: Real>(stack: &ImageStack<T>, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|source| Error::Write { path: dir.to_path_buf(), source })?;
    let (lo, hi) = stack
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.as_f64()), hi.max(v.as_f64())));
    let span = if hi > lo { hi - lo } else { 1.0 };
    for t in 0..stack.layers() {
        let layer = stack.layer(t).map(|v| T::lit((v.as_f64() - lo) / span));
        save_image16(&layer, dir.join(layer_file(t)))?;
    }
    let meta = format!(
        "layers={}\nrows={}\ncols={}\ndt={}\nmin={lo:e}\nmax={hi:e}\n",
        stack.layers(),
        stack.rows(),
        stack.cols(),
        stack.dt().as_f64(),
    );
    write_atomic(&dir.join(META_FILE), meta.as_bytes())
}

/// Reads a stack written by [`save_stack`] (16-bit quantized).
pub fn load_stack<T: Real>(dir: impl AsRef<Path>) -> Result<ImageStack<T>> {
    let dir = dir.as_ref();
    let meta_path = dir.join(META_FILE);
    let text = fs::read_to_string(&meta_path).map_err(|source| Error::Read { path: meta_path.clone(), source })?;
    let bad = |message: String| Error::StackMeta { path: meta_path.clone(), message };
    let mut fields = std::collections::HashMap::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {line:?}")))?;
        fields.insert(k.trim().to_string(), v.trim().to_string());
    }
    let num = |key: &str| -> Result<f64> {
        fields
            .get(key)
            .ok_or_else(|| bad(format!("missing {key}")))?
            .parse::<f64>()
            .map_err(|e| bad(format!("{key}: {e}")))
    };
    let layers = num("layers")? as usize;
    let (rows, cols, dt) = (num("rows")? as usize, num("cols")? as usize, num("dt")?);
    let lo = fields.get("min").map(|_| num("min")).transpose()?.unwrap_or(0.0);
    let hi = fields.get("max").map(|_| num("max")).transpose()?.unwrap_or(1.0);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut frames = Vec::with_capacity(layers);
    for t in 0..layers {
        let f: GrayImage<f64> = load_image(dir.join(layer_file(t)), true)?;
        if f.dims() != (rows, cols) {
            return Err(bad(format!("layer {t} is {}x{}, expected {rows}x{cols}", f.rows(), f.cols())));
        }
        frames.push(f.map(|v| v * span + lo).cast());
    }
    ImageStack::from_layers(frames)?.with_dt(T::lit(dt))
}
