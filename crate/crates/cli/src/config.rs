//! Flat TOML pipeline configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use simnerve_core::{InputFormat, LowThreshold};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub input: PathBuf,
    /// `csv` or `jsonl`; guessed from the extension when empty.
    pub format: String,
    pub renormalize: bool,
    /// `pca` or a path to a lens CSV.
    pub lens: String,
    pub resolution: usize,
    pub gain: f64,
    pub histogram_bins: usize,
    pub min_component_size: usize,
    pub gamma: f64,
    pub louvain_seed: u64,
    pub weighted: bool,
    pub layout_iterations: usize,
    pub layout_seed: u64,
    pub layout_area: f64,
    pub functional_threshold: f64,
    pub cross_capacity_threshold: f64,
    pub focal_ids: Vec<i64>,
    pub top: usize,
    /// `mean` or a number.
    pub low_threshold: String,
    /// Highest regression model fitted (1, 2 or 3).
    pub max_model: u8,
    pub block_size: usize,
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: PathBuf::new(),
            format: String::new(),
            renormalize: false,
            lens: "pca".into(),
            resolution: 35,
            gain: 2.0,
            histogram_bins: 10,
            min_component_size: 2,
            gamma: 1.0,
            louvain_seed: 0,
            weighted: false,
            layout_iterations: 500,
            layout_seed: 0,
            layout_area: 1.0,
            functional_threshold: 0.7,
            cross_capacity_threshold: 0.6,
            focal_ids: Vec::new(),
            top: 5,
            low_threshold: "mean".into(),
            max_model: 3,
            block_size: 256,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: PipelineConfig = toml::from_str(text).context("invalid pipeline config")?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn input_format(&self) -> Result<InputFormat> {
        if self.format.is_empty() {
            Ok(InputFormat::from_path(&self.input))
        } else {
            Ok(self.format.parse()?)
        }
    }

    pub fn low_threshold(&self) -> Result<LowThreshold> {
        Ok(self.low_threshold.parse()?)
    }

    /// Range checks matching each stage's preconditions.
    pub fn validate(&self) -> Result<()> {
        if self.input.as_os_str().is_empty() {
            bail!("config key `input` is required");
        }
        self.input_format()?;
        self.low_threshold()?;
        if self.lens.is_empty() {
            bail!("`lens` must be `pca` or a file path");
        }
        if self.resolution == 0 {
            bail!("`resolution` must be ≥ 1");
        }
        if !(self.gain > 1.0) || !self.gain.is_finite() {
            bail!("`gain` must be a finite number > 1, got {}", self.gain);
        }
        if self.histogram_bins == 0 {
            bail!("`histogram_bins` must be ≥ 1");
        }
        if self.min_component_size == 0 {
            bail!("`min_component_size` must be ≥ 1");
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            bail!("`gamma` must be positive, got {}", self.gamma);
        }
        if self.layout_iterations == 0 {
            bail!("`layout_iterations` must be ≥ 1");
        }
        if !(self.layout_area > 0.0) || !self.layout_area.is_finite() {
            bail!("`layout_area` must be positive, got {}", self.layout_area);
        }
        for (key, t) in [
            ("functional_threshold", self.functional_threshold),
            ("cross_capacity_threshold", self.cross_capacity_threshold),
        ] {
            if !(-1.0..=1.0).contains(&t) {
                bail!("`{key}` must lie in [-1, 1], got {t}");
            }
        }
        if self.top == 0 {
            bail!("`top` must be ≥ 1");
        }
        if !(1..=3).contains(&self.max_model) {
            bail!("`max_model` must be 1, 2 or 3");
        }
        if self.block_size == 0 {
            bail!("`block_size` must be ≥ 1");
        }
        Ok(())
    }

    /// Resolves relative paths against the directory holding the config.
    pub fn resolve_paths(&self, base: &Path) -> PipelineConfig {
        let join = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        let mut out = self.clone();
        out.input = join(&self.input);
        out.output_dir = join(&self.output_dir);
        if self.lens != "pca" {
            out.lens = join(Path::new(&self.lens)).display().to_string();
        }
        out
    }
}
