//! Command-line pipeline: synthesize verification datasets, fuse 2D masks
//! into 3D pseudo-labels, pick augmented point prompts, and score results.

mod commands;
mod config;
mod manifest;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "semfuse",
    version,
    about = "Fuses per-frame 2D segmentation masks of posed RGB-D sequences into 3D point-cloud pseudo-labels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Synth(commands::synth::SynthArgs),
    Fuse(commands::fuse::FuseArgs),
    Augment(commands::augment::AugmentArgs),
    Eval(commands::eval::EvalArgs),
    Pipeline(commands::pipeline::PipelineArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(args) => commands::synth::run(args),
        Command::Fuse(args) => commands::fuse::run(args),
        Command::Augment(args) => commands::augment::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Pipeline(args) => commands::pipeline::run(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
