//! Input expansion, output naming and batch execution.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::ConfigError;

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "pgm", "pnm"];

pub fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
}

/// Image files directly inside `dir`, sorted.
pub fn images_in(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_image(p))
        .collect();
    out.sort();
    Ok(out)
}

/// Expands directories and glob patterns into a sorted, de-duplicated list of
/// files. Plain paths are kept even if missing so they surface as per-file
/// failures. An empty result is a configuration error.
pub fn expand(args: &[String]) -> Result<Vec<PathBuf>, ConfigError> {
    let mut out = BTreeSet::new();
    for arg in args {
        let path = Path::new(arg);
        if path.is_dir() {
            let found = images_in(path).map_err(|e| ConfigError(format!("cannot list {arg}: {e}")))?;
            out.extend(found);
        } else if arg.contains(['*', '?', '[']) {
            let paths = glob::glob(arg).map_err(|e| ConfigError(format!("bad pattern {arg:?}: {e}")))?;
            out.extend(paths.filter_map(Result::ok).filter(|p| p.is_file()));
        } else {
            out.insert(path.to_path_buf());
        }
    }
    if out.is_empty() {
        return Err(ConfigError("no input files".into()));
    }
    Ok(out.into_iter().collect())
}

pub fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into())
}

/// Output location for one of `n_inputs` files. A single input with an
/// image-like `-o` is written there; otherwise `-o` is a directory and the
/// output is `<dir>/<stem>.png`.
pub fn output_for(output: &Path, input: &Path, n_inputs: usize) -> PathBuf {
    if n_inputs == 1 && is_image(output) && !output.is_dir() {
        output.to_path_buf()
    } else {
        output.join(format!("{}.png", stem(input)))
    }
}

pub struct Failure {
    pub label: String,
    pub error: anyhow::Error,
}

/// Runs `f` over `items` in parallel. Successes are returned in input order;
/// failures are collected rather than aborting the batch.
pub fn run_batch<I, R, F>(items: &[I], label: impl Fn(&I) -> String + Sync, f: F) -> (Vec<R>, Vec<Failure>)
where
    I: Sync,
    R: Send,
    F: Fn(&I) -> anyhow::Result<R> + Sync,
{
    let results: Vec<_> = items.par_iter().map(|item| f(item).map_err(|error| Failure { label: label(item), error })).collect();
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => failed.push(e),
        }
    }
    (ok, failed)
}

/// Prints failures to standard error; returns the number reported.
pub fn report(failures: &[Failure]) -> usize {
    for f in failures {
        eprintln!("error: {}: {:#}", f.label, f.error);
    }
    if !failures.is_empty() {
        eprintln!("{} item(s) failed", failures.len());
    }
    failures.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_naming() {
        let out = Path::new("res/out.png");
        assert_eq!(output_for(out, Path::new("a/b.pgm"), 1), PathBuf::from("res/out.png"));
        assert_eq!(output_for(Path::new("res"), Path::new("a/b.pgm"), 1), PathBuf::from("res/b.png"));
        assert_eq!(output_for(out, Path::new("a/b.pgm"), 2), PathBuf::from("res/out.png/b.png"));
    }

    #[test]
    fn empty_input_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(expand(&[dir.path().display().to_string()]).is_err());
        let pat = format!("{}/*.png", dir.path().display());
        assert!(expand(&[pat]).is_err());
    }

    #[test]
    fn directories_and_globs_expand_sorted() {
        let dir = tempfile::tempdir().unwrap();
        for n in ["b.png", "a.pgm", "c.txt"] {
            std::fs::write(dir.path().join(n), b"x").unwrap();
        }
        let got = expand(&[dir.path().display().to_string()]).unwrap();
        let names: Vec<_> = got.iter().map(|p| p.file_name().unwrap().to_str().unwrap()).collect();
        assert_eq!(names, ["a.pgm", "b.png"]);
        let got = expand(&[format!("{}/*.png", dir.path().display())]).unwrap();
        assert_eq!(got.len(), 1);
    }

    #[test]
    fn batch_keeps_order_and_collects_failures() {
        let items: Vec<i32> = (0..20).collect();
        let (ok, failed) = run_batch(&items, |i| i.to_string(), |&i| {
            if i % 7 == 3 {
                anyhow::bail!("bad {i}")
            }
            Ok(i * 2)
        });
        assert_eq!(failed.len(), 3);
        assert!(ok.windows(2).all(|w| w[0] < w[1]));
    }
}
