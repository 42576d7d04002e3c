pub mod augment;
pub mod eval;
pub mod fuse;
pub mod pipeline;
pub mod synth;

use std::path::Path;

use anyhow::{Context, Result};
use semfuse_core::class_table::ClassTable;

use crate::config::PipelineConfig;

pub fn load_class_table(cfg: &PipelineConfig) -> Result<ClassTable> {
    match &cfg.classes {
        Some(path) => ClassTable::load(path)
            .with_context(|| format!("loading class table {}", path.display())),
        None => Ok(ClassTable::scannet20()),
    }
}

pub fn load_class_table_from(path: Option<&Path>) -> Result<ClassTable> {
    match path {
        Some(p) => {
            ClassTable::load(p).with_context(|| format!("loading class table {}", p.display()))
        }
        None => Ok(ClassTable::scannet20()),
    }
}
