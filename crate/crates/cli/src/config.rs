//! Flat `key = value` run configuration, overridable by command-line
//! flags (flags win). The effective map, defaults materialized, is echoed
//! into run manifests so every reported number is reproducible from the
//! manifest alone.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use semfuse_core::evaluation::IgnorePolicy;
use semfuse_core::fusion::FusionConfig;
use semfuse_core::prompting::AugmentStrategy;
use semfuse_core::segmenter::NoiseSpec;

/// Where per-frame masks come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaskSourceSpec {
    /// Externally produced masks in a directory (`<dir>/<index>.pgm`).
    Directory(PathBuf),
    /// Dataset ground-truth masks, optionally degraded by the noise spec.
    Oracle,
    /// Per-class point prompts against ground truth, with augmentation.
    PromptedOracle,
}

impl MaskSourceSpec {
    fn parse(value: &str) -> Self {
        match value {
            "oracle" => MaskSourceSpec::Oracle,
            "prompted-oracle" => MaskSourceSpec::PromptedOracle,
            other => MaskSourceSpec::Directory(PathBuf::from(
                other.strip_prefix("dir:").unwrap_or(other),
            )),
        }
    }

    fn to_value(&self) -> String {
        match self {
            MaskSourceSpec::Directory(p) => format!("dir:{}", p.display()),
            MaskSourceSpec::Oracle => "oracle".into(),
            MaskSourceSpec::PromptedOracle => "prompted-oracle".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub scene: Option<PathBuf>,
    pub frames: Option<PathBuf>,
    pub masks: MaskSourceSpec,
    pub classes: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub acc_out: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub frame_stride: u32,
    pub pixel_stride: u32,
    pub radius_m: f64,
    pub strategy: AugmentStrategy,
    pub policy: IgnorePolicy,
    pub seed: u64,
    pub skip_missing: bool,
    pub noise_drop: f64,
    pub noise_mislabel: f64,
    pub noise_morph: i32,
    // synthetic stage of the pipeline command
    pub synth: bool,
    pub synth_frames: usize,
    pub synth_objects: usize,
    pub synth_density: f64,
    pub synth_room: [f64; 3],
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            scene: None,
            frames: None,
            masks: MaskSourceSpec::Oracle,
            classes: None,
            out: None,
            acc_out: None,
            manifest: None,
            frame_stride: 50,
            pixel_stride: 1,
            radius_m: 0.1,
            strategy: AugmentStrategy::None,
            policy: IgnorePolicy::Penalize,
            seed: 1,
            skip_missing: false,
            noise_drop: 0.0,
            noise_mislabel: 0.0,
            noise_morph: 0,
            synth: false,
            synth_frames: 30,
            synth_objects: 8,
            synth_density: 3400.0,
            synth_room: [4.0, 4.0, 2.5],
        }
    }
}

/// Flag overrides shared by `fuse` and `pipeline`.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct OverrideFlags {
    /// Flat key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scene point cloud (PLY).
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Posed frame directory.
    #[arg(long)]
    pub frames: Option<PathBuf>,
    /// Mask source: oracle, prompted-oracle, or a mask directory.
    #[arg(long)]
    pub masks: Option<String>,
    /// Class table file, one name per line (default: the 20 ScanNet classes).
    #[arg(long)]
    pub classes: Option<PathBuf>,
    /// Fused-label PLY to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional binary accumulator dump to write.
    #[arg(long)]
    pub acc_out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use every n-th frame.
    #[arg(long)]
    pub frame_stride: Option<u32>,
    /// Unproject every n-th pixel row/column.
    #[arg(long)]
    pub pixel_stride: Option<u32>,
    /// Vote-transfer radius gate in meters.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Prompt augmentation: none|random|max_distance|max_entropy.
    #[arg(long)]
    pub strategy: Option<String>,
    /// Ignore handling during evaluation: penalize|exclude.
    #[arg(long)]
    pub policy: Option<String>,
    /// Skip frames whose mask is missing instead of failing.
    #[arg(long)]
    pub skip_missing: bool,
}

pub fn parse_room_arg(value: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = value.split('x').collect();
    if parts.len() != 3 {
        bail!("room must be WxDxH, got '{value}'");
    }
    let mut room = [0.0; 3];
    for (slot, part) in room.iter_mut().zip(&parts) {
        *slot = part.parse::<f64>().with_context(|| format!("bad room dimension '{part}'"))?;
    }
    Ok(room)
}

impl PipelineConfig {
    /// Reads a config file (when given) and overlays flags on top.
    pub fn load(flags: &OverrideFlags) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = &flags.config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    bail!("{}:{}: expected key = value", path.display(), lineno + 1);
                };
                cfg.set(key.trim(), value.trim())
                    .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
            }
        }
        cfg.apply_flags(flags)?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "scene" => self.scene = Some(value.into()),
            "frames" => self.frames = Some(value.into()),
            "masks" => self.masks = MaskSourceSpec::parse(value),
            "classes" => self.classes = Some(value.into()),
            "out" => self.out = Some(value.into()),
            "acc_out" => self.acc_out = Some(value.into()),
            "manifest" => self.manifest = Some(value.into()),
            "frame_stride" => self.frame_stride = value.parse()?,
            "pixel_stride" => self.pixel_stride = value.parse()?,
            "radius" => self.radius_m = value.parse()?,
            "strategy" => self.strategy = value.parse()?,
            "policy" => self.policy = value.parse()?,
            "seed" => self.seed = value.parse()?,
            "skip_missing" => self.skip_missing = value.parse()?,
            "noise_drop" => self.noise_drop = value.parse()?,
            "noise_mislabel" => self.noise_mislabel = value.parse()?,
            "noise_morph" => self.noise_morph = value.parse()?,
            "synth" => self.synth = value.parse()?,
            "synth_frames" => self.synth_frames = value.parse()?,
            "synth_objects" => self.synth_objects = value.parse()?,
            "synth_density" => self.synth_density = value.parse()?,
            "synth_room" => self.synth_room = parse_room_arg(value)?,
            other => bail!("unknown config key '{other}'"),
        }
        Ok(())
    }

    fn apply_flags(&mut self, flags: &OverrideFlags) -> Result<()> {
        if let Some(v) = &flags.scene {
            self.scene = Some(v.clone());
        }
        if let Some(v) = &flags.frames {
            self.frames = Some(v.clone());
        }
        if let Some(v) = &flags.masks {
            self.masks = MaskSourceSpec::parse(v);
        }
        if let Some(v) = &flags.classes {
            self.classes = Some(v.clone());
        }
        if let Some(v) = &flags.out {
            self.out = Some(v.clone());
        }
        if let Some(v) = &flags.acc_out {
            self.acc_out = Some(v.clone());
        }
        if let Some(v) = flags.seed {
            self.seed = v;
        }
        if let Some(v) = flags.frame_stride {
            self.frame_stride = v;
        }
        if let Some(v) = flags.pixel_stride {
            self.pixel_stride = v;
        }
        if let Some(v) = flags.radius {
            self.radius_m = v;
        }
        if let Some(v) = &flags.strategy {
            self.strategy = v.parse()?;
        }
        if let Some(v) = &flags.policy {
            self.policy = v.parse()?;
        }
        if flags.skip_missing {
            self.skip_missing = true;
        }
        Ok(())
    }

    pub fn fusion_config(&self) -> FusionConfig {
        FusionConfig {
            radius_m: self.radius_m,
            pixel_stride: self.pixel_stride,
            frame_stride: self.frame_stride,
        }
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        NoiseSpec {
            morph_radius_px: self.noise_morph,
            drop_instance_prob: self.noise_drop,
            mislabel_prob: self.noise_mislabel,
            rng_seed: self.seed,
        }
    }

    /// Fails fast when a referenced input path does not exist.
    pub fn validate_paths(&self, synth_will_create: bool) -> Result<()> {
        let mut required: Vec<(&str, &Path)> = Vec::new();
        if !synth_will_create {
            if let Some(p) = &self.scene {
                required.push(("scene", p));
            }
            if let Some(p) = &self.frames {
                required.push(("frames", p));
            }
        }
        if let Some(p) = &self.classes {
            required.push(("classes", p));
        }
        if let MaskSourceSpec::Directory(p) = &self.masks {
            required.push(("masks", p));
        }
        for (what, path) in required {
            if !path.exists() {
                bail!("{what} path does not exist: {}", path.display());
            }
        }
        Ok(())
    }

    /// The full effective configuration, defaults materialized, in
    /// deterministic key order.
    pub fn effective_map(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            map.insert(k.to_string(), v);
        };
        let path_or = |p: &Option<PathBuf>| {
            p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
        };
        put("scene", path_or(&self.scene));
        put("frames", path_or(&self.frames));
        put("masks", self.masks.to_value());
        put("classes", path_or(&self.classes));
        put("out", path_or(&self.out));
        put("acc_out", path_or(&self.acc_out));
        put("manifest", path_or(&self.manifest));
        put("frame_stride", self.frame_stride.to_string());
        put("pixel_stride", self.pixel_stride.to_string());
        put("radius", self.radius_m.to_string());
        put("strategy", self.strategy.to_string());
        put(
            "policy",
            match self.policy {
                IgnorePolicy::Penalize => "penalize".into(),
                IgnorePolicy::Exclude => "exclude".into(),
            },
        );
        put("seed", self.seed.to_string());
        put("skip_missing", self.skip_missing.to_string());
        put("noise_drop", self.noise_drop.to_string());
        put("noise_mislabel", self.noise_mislabel.to_string());
        put("noise_morph", self.noise_morph.to_string());
        put("synth", self.synth.to_string());
        put("synth_frames", self.synth_frames.to_string());
        put("synth_objects", self.synth_objects.to_string());
        put("synth_density", self.synth_density.to_string());
        put(
            "synth_room",
            format!("{}x{}x{}", self.synth_room[0], self.synth_room[1], self.synth_room[2]),
        );
        map
    }
}
