//! Subcommand implementations. Each returns the number of failed items.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use log::{debug, info};
use polarfog::io::write_atomic;
use polarfog::metrics::CSV_HEADER;
use polarfog::scatter::depth_ramp;
use polarfog::{
    dehaze, load_image, match_histogram, save_image16, save_stack, synth_haze, AnglePlanes, GrayImage64, MetricsReport,
    PolarFrame64, ScatterParams,
};

use crate::config::{ConfigError, Settings};
use crate::inputs::{expand, images_in, is_image, output_for, report, run_batch, stem};
use crate::planes::Plane;

fn load(path: &Path) -> Result<GrayImage64> {
    Ok(load_image(path, true)?)
}

/// Writes every plane of `frame` into `dir` as `<prefix><plane>.png`, plus
/// `<prefix>ranges.txt` describing how stored codes map back to plane values.
fn write_products(frame: &PolarFrame64, dir: &Path, prefix: &str) -> Result<()> {
    let mut ranges = String::new();
    for p in Plane::ALL {
        save_image16(&p.stored(frame), dir.join(format!("{prefix}{p}.png")))?;
        let (lo, hi) = p.stored_range();
        writeln!(ranges, "{p}={lo},{hi}").expect("string write");
    }
    write_atomic(&dir.join(format!("{prefix}ranges.txt")), ranges.as_bytes())?;
    Ok(())
}

pub fn demosaic(s: &Settings, inputs: &[String], out: &Path) -> Result<usize> {
    let files = expand(inputs)?;
    let (_, failed) = run_batch(&files, |p| p.display().to_string(), |path| {
        let raw = load(path)?;
        let frame = PolarFrame64::from_mosaic(&raw, s.layout)?;
        if frame.dolp_report.degenerate > 0 {
            info!("{}: {} pixels with S0 near zero", path.display(), frame.dolp_report.degenerate);
        }
        write_products(&frame, out, &format!("{}_", stem(path)))
    });
    Ok(report(&failed))
}

fn dehaze_to(s: &Settings, img: &GrayImage64, out: &Path, stack_dir: Option<PathBuf>) -> Result<GrayImage64> {
    let start = Instant::now();
    let d = dehaze(img, &s.dehaze)?;
    debug!(
        "{}: dehazed in {:?}, imaginary residue {:e} of {:e}",
        out.display(),
        start.elapsed(),
        d.max_imag_residue,
        d.volume_max
    );
    save_image16(&d.image, out)?;
    if let Some(dir) = stack_dir {
        save_stack(&d.sequence, dir)?;
    }
    Ok(d.image)
}

pub fn dehaze_cmd(s: &Settings, inputs: &[String], out: &Path) -> Result<usize> {
    let files = expand(inputs)?;
    let n = files.len();
    let (_, failed) = run_batch(&files, |p| p.display().to_string(), |path| {
        let img = load(path)?;
        let stack_dir = s.save_stack.as_ref().map(|d| if n == 1 { d.clone() } else { d.join(stem(path)) });
        dehaze_to(s, &img, &output_for(out, path, n), stack_dir)?;
        info!("{} done", path.display());
        Ok(())
    });
    Ok(report(&failed))
}

pub struct SynthArgs<'a> {
    pub beta: f64,
    pub a_inf: f64,
    pub depth: Option<&'a Path>,
    pub depth_scale: f64,
    pub airlight: Option<&'a Path>,
}

pub fn synth(inputs: &[String], out: &Path, a: &SynthArgs) -> Result<usize> {
    if !(a.depth_scale >= 0.0 && a.depth_scale.is_finite()) {
        return Err(ConfigError(format!("depth scale must be >= 0, got {}", a.depth_scale)).into());
    }
    // Validate beta and A_inf once, before touching any file.
    ScatterParams::new(a.beta, a.a_inf, GrayImage64::zeros(1, 1)?).map_err(|e| ConfigError(e.to_string()))?;
    let depth_file = a.depth.map(load).transpose()?;
    let files = expand(inputs)?;
    let n = files.len();
    let (_, failed) = run_batch(&files, |p| p.display().to_string(), |path| {
        let scene = load(path)?;
        let depth = match &depth_file {
            Some(d) => d.map(|z| z * a.depth_scale),
            None => depth_ramp(scene.rows(), scene.cols(), a.depth_scale)?,
        };
        let hazy = synth_haze(&scene, &ScatterParams::new(a.beta, a.a_inf, depth)?)?;
        save_image16(&hazy.image, output_for(out, path, n))?;
        if let Some(dest) = a.airlight {
            save_image16(&hazy.airlight, output_for(dest, path, n))?;
        }
        Ok(())
    });
    Ok(report(&failed))
}

fn pair_files(original: &Path, restored: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    let pairs = match (original.is_dir(), restored.is_dir()) {
        (true, true) => images_in(original)
            .with_context(|| format!("listing {}", original.display()))?
            .into_iter()
            .map(|o| {
                let name = o.file_name().expect("listed file").to_string_lossy().into_owned();
                let r = restored.join(&name);
                (name, o, r)
            })
            .collect(),
        (false, true) => {
            let name = original.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            vec![(name.clone(), original.to_path_buf(), restored.join(name))]
        }
        (true, false) => bail!(ConfigError("--original is a directory but --restored is a file".into())),
        (false, false) => vec![(original.display().to_string(), original.to_path_buf(), restored.to_path_buf())],
    };
    if pairs.is_empty() {
        bail!(ConfigError(format!("no images in {}", original.display())));
    }
    Ok(pairs)
}

pub fn metrics(s: &Settings, original: &Path, restored: &Path) -> Result<usize> {
    let pairs = pair_files(original, restored)?;
    let (rows, failed) = run_batch(&pairs, |(name, _, _)| name.clone(), |(name, o, r)| {
        let report = MetricsReport::assess(&load(o)?, &load(r)?, s.threshold)?;
        Ok(report.csv_row(name))
    });
    println!("{CSV_HEADER}");
    for row in rows {
        println!("{row}");
    }
    Ok(report(&failed))
}

pub fn histmatch(s: &Settings, reference: &Path, inputs: &[String], out: &Path) -> Result<usize> {
    let files = expand(inputs)?;
    let reference = load(reference).context("loading reference")?;
    let n = files.len();
    let (_, failed) = run_batch(&files, |p| p.display().to_string(), |path| {
        let matched = match_histogram(&load(path)?, &reference, s.bins)?;
        save_image16(&matched, output_for(out, path, n))?;
        Ok(())
    });
    Ok(report(&failed))
}

/// One polarization capture: a raw mosaic, or a directory of four angle images.
#[derive(Clone, Debug)]
enum Scene {
    Mosaic(PathBuf),
    Angles(PathBuf),
}

impl Scene {
    fn name(&self) -> String {
        match self {
            Scene::Mosaic(p) => stem(p),
            Scene::Angles(d) => d.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        }
    }

    fn load(&self, s: &Settings) -> Result<PolarFrame64> {
        match self {
            Scene::Mosaic(p) => Ok(PolarFrame64::from_mosaic(&load(p)?, s.layout)?),
            Scene::Angles(dir) => {
                let files = images_in(dir)?;
                let find = |deg: &str| -> Result<GrayImage64> {
                    let path = files
                        .iter()
                        .find(|p| {
                            let st = stem(p).to_ascii_lowercase();
                            st == deg || st.strip_prefix('i') == Some(deg)
                        })
                        .with_context(|| format!("no {deg} degree image in {}", dir.display()))?;
                    load(path)
                };
                let angles = AnglePlanes { i0: find("0")?, i45: find("45")?, i90: find("90")?, i135: find("135")? };
                Ok(PolarFrame64::from_angles(angles)?)
            }
        }
    }
}

fn is_angle_dir(dir: &Path) -> bool {
    images_in(dir).is_ok_and(|files| {
        files.iter().any(|p| {
            let st = stem(p).to_ascii_lowercase();
            let st = st.strip_prefix('i').unwrap_or(&st);
            ["0", "45", "90", "135"].contains(&st)
        })
    })
}

fn discover_scenes(inputs: &[String]) -> Result<Vec<Scene>> {
    let mut scenes = Vec::new();
    for arg in inputs {
        let path = Path::new(arg);
        if !path.is_dir() {
            scenes.extend(expand(std::slice::from_ref(arg))?.into_iter().map(Scene::Mosaic));
            continue;
        }
        let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
            .with_context(|| format!("listing {arg}"))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        entries.sort();
        if is_angle_dir(path) {
            scenes.push(Scene::Angles(path.to_path_buf()));
            continue;
        }
        for e in entries {
            if e.is_file() && is_image(&e) {
                scenes.push(Scene::Mosaic(e));
            } else if e.is_dir() && is_angle_dir(&e) {
                scenes.push(Scene::Angles(e));
            }
        }
    }
    if scenes.is_empty() {
        bail!(ConfigError("no scenes found".into()));
    }
    Ok(scenes)
}

/// Demosaic, dehaze the selected planes, match each back to its original
/// histogram and score it, for every scene.
pub fn pipeline(s: &Settings, inputs: &[String], out: &Path) -> Result<usize> {
    let scenes = discover_scenes(inputs)?;
    info!("{} scene(s)", scenes.len());
    let (rows, failed) = run_batch(&scenes, Scene::name, |scene| {
        let name = scene.name();
        let dir = out.join(&name);
        let frame = scene.load(s)?;
        write_products(&frame, &dir, "")?;
        let mut rows = Vec::new();
        for &plane in &s.planes {
            let original = plane.for_processing(&frame);
            let stack_dir = s.save_stack.as_ref().map(|d| d.join(&name).join(plane.name()));
            let dehazed = dehaze_to(s, &original, &dir.join(format!("{plane}_dehazed.png")), stack_dir)
                .with_context(|| format!("plane {plane}"))?;
            let matched = match_histogram(&dehazed, &original, s.bins)?;
            save_image16(&matched, dir.join(format!("{plane}_matched.png")))?;
            let report = MetricsReport::assess(&original, &matched, s.threshold)?;
            rows.push(report.csv_row(&format!("{name}/{plane}")));
        }
        info!("{name} done");
        Ok(rows)
    });
    let mut csv = format!("{CSV_HEADER}\n");
    for row in rows.iter().flatten() {
        csv.push_str(row);
        csv.push('\n');
    }
    write_atomic(&out.join("metrics.csv"), csv.as_bytes())?;
    print!("{csv}");
    Ok(report(&failed))
}
