pub mod frames;
pub mod ply;
pub mod pnm;
pub mod text;

pub use frames::{list_frame_indices, load_frame, save_frame, write_dataset_intrinsics};
pub use ply::{load_scene, save_scene, save_scene_with_format, PlyFormat};
