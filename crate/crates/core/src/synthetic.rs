//! Synthetic indoor scenes with exact ground truth.
//!
//! A room (floor + four walls) with axis-aligned cuboid objects placed on
//! the floor, surface-sampled at a fixed density so point counts follow
//! analytically from areas. An orbiting camera trajectory and a dataset
//! writer turn a scene into the posed-frame layout the loaders read,
//! closing the loop for end-to-end verification.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::camera::{CameraIntrinsics, CameraPose};
use crate::class_table::ClassTable;
use crate::cloud::ScenePointCloud;
use crate::error::{Error, Result};
use crate::frame::FrameRecord;
use crate::io::{frames as frame_io, ply};
use crate::projection::render_view;

/// Parameters of a generated scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    /// Room extent in meters: width (x), depth (y), height (z).
    pub room: [f64; 3],
    pub object_count: usize,
    /// Classes objects are drawn from.
    pub object_classes: Vec<u32>,
    /// Surface sampling density in points per square meter.
    pub density: f64,
    pub wall_class: u32,
    pub floor_class: u32,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            room: [4.0, 4.0, 2.5],
            object_count: 8,
            object_classes: vec![2, 3, 4, 5, 6, 7, 8, 9],
            density: 3400.0,
            wall_class: 0,
            floor_class: 1,
            seed: 7,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self, ct: &ClassTable) -> Result<()> {
        if self.room.iter().any(|&d| !d.is_finite() || d <= 0.0) {
            return Err(Error::InvalidData("room dimensions must be positive".into()));
        }
        let density_valid = self.density.is_finite() && self.density > 0.0;
        if !density_valid {
            return Err(Error::InvalidData("density must be positive".into()));
        }
        if self.object_count > 0 && self.object_classes.is_empty() {
            return Err(Error::InvalidData("object classes must not be empty".into()));
        }
        for &c in self
            .object_classes
            .iter()
            .chain([&self.wall_class, &self.floor_class])
        {
            ct.check_class(c)?;
        }
        Ok(())
    }
}

/// An axis-aligned object footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cuboid {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub class_id: u32,
}

impl Cuboid {
    fn overlaps(&self, other: &Cuboid, gap: f64) -> bool {
        (0..2).all(|a| self.min[a] - gap < other.max[a] && other.min[a] - gap < self.max[a])
    }
}

/// A generated scene plus the layout facts tests lean on.
#[derive(Debug, Clone)]
pub struct SceneBuild {
    pub cloud: ScenePointCloud,
    pub cuboids: Vec<Cuboid>,
    /// Total sampled surface area in square meters.
    pub surface_area: f64,
}

const WALL_MARGIN: f64 = 0.4;
const OBJECT_GAP: f64 = 0.35;
const PLACEMENT_RETRIES: usize = 200;

/// Generates the labeled cloud; see `build_scene` for layout details.
pub fn make_scene(spec: &SceneSpec, ct: &ClassTable) -> Result<ScenePointCloud> {
    build_scene(spec, ct).map(|b| b.cloud)
}

pub fn build_scene(spec: &SceneSpec, ct: &ClassTable) -> Result<SceneBuild> {
    spec.validate(ct)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let [w, d, h] = spec.room;

    let mut cuboids: Vec<Cuboid> = Vec::with_capacity(spec.object_count);
    for _ in 0..spec.object_count {
        let mut placed = false;
        for _ in 0..PLACEMENT_RETRIES {
            let sx: f64 = rng.random_range(0.25..0.6);
            let sy: f64 = rng.random_range(0.25..0.6);
            let sz: f64 = rng.random_range(0.3..0.8);
            let max_x = w - WALL_MARGIN - sx;
            let max_y = d - WALL_MARGIN - sy;
            if max_x <= WALL_MARGIN || max_y <= WALL_MARGIN {
                continue;
            }
            let x0 = rng.random_range(WALL_MARGIN..max_x);
            let y0 = rng.random_range(WALL_MARGIN..max_y);
            let class_id = spec.object_classes[rng.random_range(0..spec.object_classes.len())];
            let candidate = Cuboid {
                min: [x0, y0, 0.0],
                max: [x0 + sx, y0 + sy, sz.min(h)],
                class_id,
            };
            if cuboids.iter().all(|c| !c.overlaps(&candidate, OBJECT_GAP)) {
                cuboids.push(candidate);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::InvalidData("scene too crowded".into()));
        }
    }

    let mut points = SurfaceSampler::new(spec.density);
    // floor: z = 0
    points.rect(
        &mut rng,
        [0.0, 0.0, 0.0],
        [w, 0.0, 0.0],
        [0.0, d, 0.0],
        spec.floor_class,
    );
    // walls: x = 0, x = w, y = 0, y = d
    points.rect(&mut rng, [0.0, 0.0, 0.0], [0.0, d, 0.0], [0.0, 0.0, h], spec.wall_class);
    points.rect(&mut rng, [w, 0.0, 0.0], [0.0, d, 0.0], [0.0, 0.0, h], spec.wall_class);
    points.rect(&mut rng, [0.0, 0.0, 0.0], [w, 0.0, 0.0], [0.0, 0.0, h], spec.wall_class);
    points.rect(&mut rng, [0.0, d, 0.0], [w, 0.0, 0.0], [0.0, 0.0, h], spec.wall_class);

    for c in &cuboids {
        let [x0, y0, _] = c.min;
        let [x1, y1, z1] = c.max;
        let (sx, sy) = (x1 - x0, y1 - y0);
        // top face plus four sides; the bottom sits on the floor
        points.rect(&mut rng, [x0, y0, z1], [sx, 0.0, 0.0], [0.0, sy, 0.0], c.class_id);
        points.rect(&mut rng, [x0, y0, 0.0], [sx, 0.0, 0.0], [0.0, 0.0, z1], c.class_id);
        points.rect(&mut rng, [x0, y1, 0.0], [sx, 0.0, 0.0], [0.0, 0.0, z1], c.class_id);
        points.rect(&mut rng, [x0, y0, 0.0], [0.0, sy, 0.0], [0.0, 0.0, z1], c.class_id);
        points.rect(&mut rng, [x1, y0, 0.0], [0.0, sy, 0.0], [0.0, 0.0, z1], c.class_id);
    }

    let SurfaceSampler { positions, labels, surface_area, .. } = points;
    let colors = paint_points(&positions, &labels, &cuboids, &mut rng);
    let cloud = ScenePointCloud::new(positions, Some(colors), Some(labels), ct)?;
    Ok(SceneBuild { cloud, cuboids, surface_area })
}

struct SurfaceSampler {
    density: f64,
    positions: Vec<[f32; 3]>,
    labels: Vec<u32>,
    surface_area: f64,
}

impl SurfaceSampler {
    fn new(density: f64) -> Self {
        Self { density, positions: Vec::new(), labels: Vec::new(), surface_area: 0.0 }
    }

    /// Uniformly samples a parallelogram `origin + s*edge_a + t*edge_b`.
    fn rect(
        &mut self,
        rng: &mut ChaCha8Rng,
        origin: [f64; 3],
        edge_a: [f64; 3],
        edge_b: [f64; 3],
        label: u32,
    ) {
        let len_a = (edge_a[0].powi(2) + edge_a[1].powi(2) + edge_a[2].powi(2)).sqrt();
        let len_b = (edge_b[0].powi(2) + edge_b[1].powi(2) + edge_b[2].powi(2)).sqrt();
        let area = len_a * len_b;
        if area <= 0.0 {
            return;
        }
        self.surface_area += area;
        let count = (area * self.density).round().max(1.0) as usize;
        for _ in 0..count {
            let s: f64 = rng.random();
            let t: f64 = rng.random();
            self.positions.push([
                (origin[0] + s * edge_a[0] + t * edge_b[0]) as f32,
                (origin[1] + s * edge_a[1] + t * edge_b[1]) as f32,
                (origin[2] + s * edge_a[2] + t * edge_b[2]) as f32,
            ]);
            self.labels.push(label);
        }
    }
}

/// Per-class base color, perturbed per object and speckled per point so
/// local color entropy varies across surfaces.
fn paint_points(
    positions: &[[f32; 3]],
    labels: &[u32],
    cuboids: &[Cuboid],
    rng: &mut ChaCha8Rng,
) -> Vec<[u8; 3]> {
    let base = |class: u32| -> [i32; 3] {
        let c = class as i32;
        [40 + (c * 53) % 180, 40 + (c * 97 + 61) % 180, 40 + (c * 29 + 17) % 180]
    };
    let jitters: Vec<[i32; 3]> = (0..cuboids.len())
        .map(|_| {
            [
                rng.random_range(-25..=25),
                rng.random_range(-25..=25),
                rng.random_range(-25..=25),
            ]
        })
        .collect();
    let object_of = |p: &[f32; 3], label: u32| -> Option<usize> {
        cuboids.iter().position(|c| {
            c.class_id == label
                && (0..3).all(|a| {
                    (p[a] as f64) >= c.min[a] - 1e-6 && (p[a] as f64) <= c.max[a] + 1e-6
                })
        })
    };
    positions
        .iter()
        .zip(labels)
        .map(|(p, &label)| {
            let mut rgb = base(label);
            if let Some(i) = object_of(p, label) {
                for (c, j) in rgb.iter_mut().zip(jitters[i]) {
                    *c += j;
                }
            }
            let speckle = rng.random_range(-12..=12);
            rgb.map(|c| (c + speckle).clamp(0, 255) as u8)
        })
        .collect()
}

/// Poses orbiting the room center at eye height with a gentle downward
/// tilt, evenly spaced in angle and looking inward. The orbit radius
/// swells and shrinks smoothly over the revolution so near-wall
/// viewpoints also observe the outward-facing sides of objects.
pub fn make_trajectory(spec: &SceneSpec, n_frames: usize) -> Result<Vec<CameraPose>> {
    if n_frames == 0 {
        return Err(Error::InvalidData("trajectory needs at least one frame".into()));
    }
    let [w, d, h] = spec.room;
    let center = Vector3::new(w / 2.0, d / 2.0, 0.38 * h);
    let eye_z = 0.52 * h;
    let up = Vector3::new(0.0, 0.0, 1.0);

    let mut poses = Vec::with_capacity(n_frames);
    for i in 0..n_frames {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / n_frames as f64;
        let radius = (0.30 + 0.06 * (1.0 + (3.0 * theta).cos())) * w.min(d);
        let eye = Vector3::new(
            w / 2.0 + radius * theta.cos(),
            d / 2.0 + radius * theta.sin(),
            eye_z,
        );
        let forward = (center - eye).normalize();
        let right = forward.cross(&up).normalize();
        let down = forward.cross(&right);
        let rotation = Matrix3::from_columns(&[right, down, forward]);
        poses.push(CameraPose::from_parts(rotation, eye)?);
    }
    Ok(poses)
}

/// Intrinsics the synthetic datasets default to: a square 90-degree view.
pub fn default_intrinsics() -> CameraIntrinsics {
    CameraIntrinsics::new(160.0, 160.0, 159.5, 159.5, 320, 320).expect("static intrinsics")
}

pub const DEFAULT_SPLAT_RADIUS: u32 = 1;

/// Summary of an emitted dataset.
#[derive(Debug, Clone)]
pub struct EmittedDataset {
    pub n_points: usize,
    pub frame_indices: Vec<u32>,
    /// Point count per class id.
    pub class_histogram: BTreeMap<u32, usize>,
}

/// Renders `n_frames` orbit views and writes the full on-disk dataset:
/// `scene.ply`, shared intrinsics, and per-frame depth/pose/label/color
/// files. Frame indices advance by `frame_index_spacing` so the default
/// every-50th-frame selection picks every emitted frame.
pub fn emit_dataset(
    spec: &SceneSpec,
    n_frames: usize,
    k: &CameraIntrinsics,
    out_dir: impl AsRef<Path>,
    frame_index_spacing: u32,
    ct: &ClassTable,
) -> Result<EmittedDataset> {
    if frame_index_spacing == 0 {
        return Err(Error::InvalidData("frame index spacing must be at least 1".into()));
    }
    let out_dir = out_dir.as_ref();
    let build = build_scene(spec, ct)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    ply::save_scene(&build.cloud, None, out_dir.join("scene.ply"), ct)?;
    frame_io::write_dataset_intrinsics(out_dir, k)?;

    let poses = make_trajectory(spec, n_frames)?;
    let mut frame_indices = Vec::with_capacity(n_frames);
    for (i, pose) in poses.iter().enumerate() {
        let index = i as u32 * frame_index_spacing;
        let view = render_view(&build.cloud, k, pose, DEFAULT_SPLAT_RADIUS, ct)?;
        let frame = FrameRecord::new(index, *k, *pose, view.depth, view.color, Some(view.labels))?;
        frame_io::save_frame(out_dir, &frame, ct)?;
        frame_indices.push(index);
    }

    let mut class_histogram = BTreeMap::new();
    if let Some(labels) = build.cloud.gt_labels() {
        for &l in labels {
            *class_histogram.entry(l).or_insert(0) += 1;
        }
    }
    Ok(EmittedDataset { n_points: build.cloud.len(), frame_indices, class_histogram })
}
