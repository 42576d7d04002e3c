use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use semfuse_core::io::pnm;
use semfuse_core::prompting::{
    augment_max_distance, augment_max_entropy, augment_random, AugmentStrategy,
};

/// Pick an augmented point prompt on an initial mask.
#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Color image (binary PPM).
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Initial mask (8-bit PGM; nonzero bytes are members).
    #[arg(long)]
    pub mask: PathBuf,
    /// Anchor pixel as "u,v" (the original positive prompt).
    #[arg(long)]
    pub anchor: String,
    /// random | max_distance | max_entropy
    #[arg(long)]
    pub strategy: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optional output PGM visualizing mask, anchor, and chosen point.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_pixel(text: &str) -> Result<(u32, u32)> {
    let Some((u, v)) = text.split_once(',') else {
        bail!("anchor must be 'u,v', got '{text}'");
    };
    Ok((
        u.trim().parse().with_context(|| format!("bad anchor column '{u}'"))?,
        v.trim().parse().with_context(|| format!("bad anchor row '{v}'"))?,
    ))
}

pub fn run(args: &AugmentArgs) -> Result<()> {
    let strategy: AugmentStrategy = args.strategy.parse()?;
    let mask = pnm::read_binary_mask_pgm(&args.mask)
        .with_context(|| format!("loading mask {}", args.mask.display()))?;
    let anchor = parse_pixel(&args.anchor)?;

    let chosen = match strategy {
        AugmentStrategy::None => bail!("strategy 'none' picks no augmented point"),
        AugmentStrategy::Random => augment_random(&mask, args.seed)?,
        AugmentStrategy::MaxDistance => augment_max_distance(&mask, anchor)?,
        AugmentStrategy::MaxEntropy => {
            let image_path = args
                .image
                .as_ref()
                .ok_or_else(|| anyhow::anyhow!("max_entropy needs --image"))?;
            let image = pnm::read_ppm(image_path)
                .with_context(|| format!("loading image {}", image_path.display()))?;
            augment_max_entropy(&image, &mask, anchor)?
        }
    };
    println!("({}, {})", chosen.0, chosen.1);

    if let Some(out) = &args.out {
        // grayscale sketch: members 128, anchor 64, chosen point 255
        let mut sketch = vec![0u8; (mask.width() * mask.height()) as usize];
        for (u, v) in mask.iter_pixels() {
            sketch[(v * mask.width() + u) as usize] = 128;
        }
        if anchor.0 < mask.width() && anchor.1 < mask.height() {
            sketch[(anchor.1 * mask.width() + anchor.0) as usize] = 64;
        }
        sketch[(chosen.1 * mask.width() + chosen.0) as usize] = 255;
        let mut bytes = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
        bytes.extend_from_slice(&sketch);
        std::fs::write(out, bytes).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}
