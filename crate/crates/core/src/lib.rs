//! Fuses per-frame 2D semantic masks of posed RGB-D sequences into 3D
//! point-cloud pseudo-labels.
//!
//! The pipeline: unproject each selected frame's labeled pixels through the
//! pinhole model into a world-space fragment, transfer each fragment
//! point's label as a vote onto its nearest scene point (within a radius
//! gate), and take the per-point majority as the pseudo-label. Around that
//! core sit sparse point-prompt sampling with augmentation strategies, a
//! pluggable 2D segmenter contract, a synthetic indoor-scene generator for
//! end-to-end verification, and an IoU evaluation suite.
//!
//! # Example
//!
//! Fuse ground-truth renderings of a synthetic room back onto its cloud:
//!
//! ```
//! use semfuse_core::{
//!     evaluate, make_scene, make_trajectory, render_view, run_fusion, CameraIntrinsics,
//!     ClassTable, FrameRecord, FusionConfig, IgnorePolicy, SceneSpec,
//! };
//!
//! let ct = ClassTable::scannet20();
//! let spec = SceneSpec {
//!     room: [2.5, 2.5, 2.0],
//!     object_count: 1,
//!     density: 150.0,
//!     ..SceneSpec::default()
//! };
//! let cloud = make_scene(&spec, &ct)?;
//! let k = CameraIntrinsics::new(24.0, 24.0, 23.5, 23.5, 48, 48)?;
//!
//! let frames: Vec<FrameRecord> = make_trajectory(&spec, 4)?
//!     .into_iter()
//!     .enumerate()
//!     .map(|(i, pose)| {
//!         let view = render_view(&cloud, &k, &pose, 1, &ct)?;
//!         FrameRecord::new(i as u32, k, pose, view.depth, view.color, Some(view.labels))
//!     })
//!     .collect::<semfuse_core::Result<_>>()?;
//!
//! let cfg = FusionConfig { frame_stride: 1, ..FusionConfig::default() };
//! let outcome = run_fusion(&cloud, &frames, &ct, &cfg)?;
//! let report = evaluate(&outcome.labels, cloud.gt_labels().unwrap(), &ct, IgnorePolicy::Exclude)?;
//! assert!(report.miou() > 0.8);
//! # Ok::<(), semfuse_core::Error>(())
//! ```

pub mod camera;
pub mod class_table;
pub mod cloud;
pub mod error;
pub mod evaluation;
pub mod frame;
pub mod fusion;
pub mod io;
pub mod mask;
pub mod projection;
pub mod prompting;
pub mod raster;
pub mod segmenter;
pub mod spatial;
pub mod synthetic;

pub use camera::{CameraIntrinsics, CameraPose};
pub use class_table::ClassTable;
pub use cloud::ScenePointCloud;
pub use error::{Error, Result};
pub use evaluation::{evaluate, format_report, machine_report, EvalReport, IgnorePolicy};
pub use frame::{select_frames, FrameRecord};
pub use fusion::{
    build_spatial_index, fuse_labels, merge_accumulators, run_fusion, transfer_votes,
    FusionConfig, FusionOutcome, FusionStats, VoteAccumulator,
};
pub use mask::BinaryMask;
pub use projection::{
    frame_to_fragment, project_point, render_frame, render_view, unproject_pixel,
    LabeledFragment, PixelProjection, RenderedView,
};
pub use raster::{ColorImage, DepthMap, LabelMask};
pub use prompting::{
    assemble_class_prompt, augment_max_distance, augment_max_entropy, augment_random,
    region_entropy, run_augmented_prompt, sample_sparse_prompts, AugmentStrategy, PromptPoint,
    PromptRole, PromptSet,
};
pub use segmenter::{
    load_mask_directory, oracle_segmenter, prompted_oracle_segmenter, CandidateMask,
    GranularityMode, MaskCandidate, NoiseSpec, Prompt, Segmenter, SegmenterOutput,
};
pub use spatial::SceneIndex;
pub use synthetic::{
    build_scene, emit_dataset, make_scene, make_trajectory, EmittedDataset, SceneSpec,
};
