//! Run configuration: built-in defaults, `key = value` files, then flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use polarfog::metrics::DEFAULT_EDGE_THRESHOLD;
use polarfog::histmatch::DEFAULT_BINS;
use polarfog::{DcPolicy, DehazeParams, MosaicLayout};

use crate::planes::Plane;

/// A problem with flags, config files or the input set. Maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Flags shared by every subcommand. Unset flags fall back to the config file.
#[derive(Args, Debug, Default, Clone)]
pub struct Overrides {
    /// Config file of `key = value` lines
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Depth of the simulated diffusion stack
    #[arg(long, global = true)]
    pub layers: Option<usize>,
    /// Frames in the restored sequence
    #[arg(long, global = true)]
    pub outputs: Option<usize>,
    /// Diffusion coefficient
    #[arg(long, global = true)]
    pub k_diff: Option<f64>,
    /// Blur sigma of the last stack layer, pixels
    #[arg(long, global = true)]
    pub sigma_max: Option<f64>,
    #[arg(long, global = true)]
    pub t_downsample: Option<usize>,
    #[arg(long, global = true)]
    pub s_downsample: Option<usize>,
    #[arg(long, global = true)]
    pub pad_t: Option<usize>,
    #[arg(long, global = true)]
    pub pad_s: Option<usize>,
    /// Temporal moving-average width (odd)
    #[arg(long, global = true)]
    pub smooth_window: Option<usize>,
    #[arg(long, global = true)]
    pub t_extend_factor: Option<usize>,
    /// annihilate | pass
    #[arg(long, global = true)]
    pub dc_policy: Option<DcPolicy>,
    /// Mosaic angles, top-left,top-right,bottom-left,bottom-right
    #[arg(long, global = true, value_name = "A,B,C,D")]
    pub layout: Option<MosaicLayout>,
    /// Visible-edge threshold as a fraction of dynamic range
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    /// Histogram bins for matching
    #[arg(long, global = true)]
    pub bins: Option<usize>,
    /// Planes dehazed by `pipeline`
    #[arg(long, global = true, value_delimiter = ',')]
    pub planes: Option<Vec<Plane>>,
    /// Also write the restored sequence as per-layer PGMs under DIR
    #[arg(long, global = true, value_name = "DIR")]
    pub save_stack: Option<PathBuf>,
    /// Accepted for compatibility; processing is deterministic
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

/// Fully resolved settings.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub dehaze: DehazeParams,
    pub layout: MosaicLayout,
    pub threshold: f64,
    pub bins: usize,
    pub planes: Vec<Plane>,
    pub save_stack: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            dehaze: DehazeParams::default(),
            layout: MosaicLayout::default(),
            threshold: DEFAULT_EDGE_THRESHOLD,
            bins: DEFAULT_BINS,
            planes: vec![Plane::S0, Plane::Dolp],
            save_stack: None,
            seed: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| format!("{key}: cannot parse {value:?}: {e}"))
}

impl Settings {
    /// Defaults, then the config file (if any), then explicit flags.
    pub fn resolve(o: &Overrides) -> Result<Self, ConfigError> {
        let mut s = match &o.config {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        s.apply_overrides(o);
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_str(&text).map_err(|e| ConfigError(format!("{}:{e}", path.display())))
    }

    /// Parses config text. Errors are prefixed with the 1-based line number.
    pub fn parse_str(text: &str) -> Result<Self, String> {
        let mut s = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| format!("{}: {msg}", n + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected `key = value`, got {line:?}")))?;
            s.set(&key.trim().replace('-', "_"), value.trim()).map_err(at)?;
        }
        Ok(s)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        let d = &mut self.dehaze;
        match key {
            "layers" => d.layers = parse(key, v)?,
            "outputs" => d.outputs = parse(key, v)?,
            "k_diff" => d.k_diff = parse(key, v)?,
            "sigma_max" => d.sigma_max = parse(key, v)?,
            "t_downsample" => d.t_downsample = parse(key, v)?,
            "s_downsample" => d.s_downsample = parse(key, v)?,
            "pad_t" => d.pad_t = parse(key, v)?,
            "pad_s" => d.pad_s = parse(key, v)?,
            "smooth_window" => d.smooth_window = parse(key, v)?,
            "t_extend_factor" => d.t_extend_factor = parse(key, v)?,
            "dc_policy" => d.dc_policy = parse(key, v)?,
            "layout" => self.layout = parse(key, v)?,
            "threshold" => self.threshold = parse(key, v)?,
            "bins" => self.bins = parse(key, v)?,
            "planes" => {
                self.planes = v.split(',').map(|p| parse(key, p.trim())).collect::<Result<_, _>>()?;
            }
            "save_stack" => self.save_stack = Some(PathBuf::from(v)),
            "seed" => self.seed = Some(parse(key, v)?),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    fn apply_overrides(&mut self, o: &Overrides) {
        let d = &mut self.dehaze;
        macro_rules! take {
            ($($src:ident => $dst:expr),* $(,)?) => {
                $(if let Some(v) = o.$src.clone() { $dst = v; })*
            };
        }
        take!(
            layers => d.layers,
            outputs => d.outputs,
            k_diff => d.k_diff,
            sigma_max => d.sigma_max,
            t_downsample => d.t_downsample,
            s_downsample => d.s_downsample,
            pad_t => d.pad_t,
            pad_s => d.pad_s,
            smooth_window => d.smooth_window,
            t_extend_factor => d.t_extend_factor,
            dc_policy => d.dc_policy,
            layout => self.layout,
            threshold => self.threshold,
            bins => self.bins,
            planes => self.planes,
        );
        if o.save_stack.is_some() {
            self.save_stack = o.save_stack.clone();
        }
        if o.seed.is_some() {
            self.seed = o.seed;
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.dehaze.validate().map_err(|e| ConfigError(e.to_string()))?;
        if !(self.threshold >= 0.0 && self.threshold.is_finite()) {
            return Err(ConfigError(format!("threshold must be a finite value >= 0, got {}", self.threshold)));
        }
        if self.bins < 2 {
            return Err(ConfigError(format!("bins must be >= 2, got {}", self.bins)));
        }
        if self.planes.is_empty() {
            return Err(ConfigError("planes must name at least one plane".into()));
        }
        Ok(())
    }
}
