//! Binary pixel masks and the small amount of 2D geometry the prompting
//! and segmenter layers need: connected components, square-element
//! morphology, and a principal-axis split.

use crate::class_table::ClassTable;
use crate::error::{Error, Result};
use crate::raster::LabelMask;

/// Set of pixels inside a width x height grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn empty(width: u32, height: u32) -> Self {
        Self { width, height, bits: vec![false; (width * height) as usize] }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut mask = Self::empty(width, height);
        for v in 0..height {
            for u in 0..width {
                if f(u, v) {
                    mask.insert(u, v);
                }
            }
        }
        mask
    }

    /// Pixels of `label` in a label mask.
    pub fn from_label(mask: &LabelMask, label: u32) -> Self {
        Self::from_fn(mask.width(), mask.height(), |u, v| mask.get(u, v) == label)
    }

    pub fn width(&self) -> u32 {
        self.width
    }
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn contains(&self, u: u32, v: u32) -> bool {
        u < self.width && v < self.height && self.bits[(v * self.width + u) as usize]
    }

    #[inline]
    pub fn insert(&mut self, u: u32, v: u32) {
        self.bits[(v * self.width + u) as usize] = true;
    }

    #[inline]
    pub fn remove(&mut self, u: u32, v: u32) {
        self.bits[(v * self.width + u) as usize] = false;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Member pixels in row-major order.
    pub fn iter_pixels(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i as u32 % w, i as u32 / w))
    }

    /// First member pixel in row-major order.
    pub fn first_pixel(&self) -> Option<(u32, u32)> {
        self.iter_pixels().next()
    }

    pub fn union(&self, other: &BinaryMask) -> BinaryMask {
        debug_assert_eq!((self.width, self.height), (other.width, other.height));
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a || b).collect();
        BinaryMask { width: self.width, height: self.height, bits }
    }

    pub fn contains_all(&self, pixels: impl IntoIterator<Item = (u32, u32)>) -> bool {
        pixels.into_iter().all(|(u, v)| self.contains(u, v))
    }

    /// Intersection-over-union against another mask of the same size.
    pub fn iou(&self, other: &BinaryMask) -> f64 {
        debug_assert_eq!((self.width, self.height), (other.width, other.height));
        let mut inter = 0usize;
        let mut union = 0usize;
        for (&a, &b) in self.bits.iter().zip(&other.bits) {
            inter += (a && b) as usize;
            union += (a || b) as usize;
        }
        if union == 0 {
            0.0
        } else {
            inter as f64 / union as f64
        }
    }
}

/// One connected component of same-class pixels.
#[derive(Debug, Clone)]
pub struct Instance {
    pub class_id: u32,
    pub pixels: BinaryMask,
}

impl Instance {
    pub fn centroid(&self) -> (f64, f64) {
        let mut su = 0.0;
        let mut sv = 0.0;
        let mut n = 0.0;
        for (u, v) in self.pixels.iter_pixels() {
            su += u as f64;
            sv += v as f64;
            n += 1.0;
        }
        (su / n, sv / n)
    }
}

/// 4-connected components of every non-ignore class, discovered in
/// row-major seed order.
pub fn connected_components(mask: &LabelMask, ct: &ClassTable) -> Vec<Instance> {
    let (w, h) = (mask.width(), mask.height());
    let ignore = ct.ignore_id();
    let mut visited = vec![false; (w * h) as usize];
    let mut instances = Vec::new();
    let idx = |u: u32, v: u32| (v * w + u) as usize;

    for v0 in 0..h {
        for u0 in 0..w {
            if visited[idx(u0, v0)] {
                continue;
            }
            let class = mask.get(u0, v0);
            if class == ignore {
                continue;
            }
            let mut pixels = BinaryMask::empty(w, h);
            let mut stack = vec![(u0, v0)];
            visited[idx(u0, v0)] = true;
            while let Some((u, v)) = stack.pop() {
                pixels.insert(u, v);
                let mut push = |u: u32, v: u32| {
                    if !visited[idx(u, v)] && mask.get(u, v) == class {
                        visited[idx(u, v)] = true;
                        stack.push((u, v));
                    }
                };
                if u > 0 {
                    push(u - 1, v);
                }
                if u + 1 < w {
                    push(u + 1, v);
                }
                if v > 0 {
                    push(u, v - 1);
                }
                if v + 1 < h {
                    push(u, v + 1);
                }
            }
            instances.push(Instance { class_id: class, pixels });
        }
    }
    instances
}

/// The component of `mask.get(u, v)` containing `(u, v)`; an error when the
/// pixel carries the ignore label.
pub fn component_at(mask: &LabelMask, u: u32, v: u32, ct: &ClassTable) -> Result<Instance> {
    let class = mask.get(u, v);
    if class == ct.ignore_id() {
        return Err(Error::EmptyMask);
    }
    let (w, h) = (mask.width(), mask.height());
    let mut pixels = BinaryMask::empty(w, h);
    let mut stack = vec![(u, v)];
    pixels.insert(u, v);
    while let Some((u, v)) = stack.pop() {
        let push = |pu: u32, pv: u32, pixels: &mut BinaryMask, stack: &mut Vec<(u32, u32)>| {
            if !pixels.contains(pu, pv) && mask.get(pu, pv) == class {
                pixels.insert(pu, pv);
                stack.push((pu, pv));
            }
        };
        if u > 0 {
            push(u - 1, v, &mut pixels, &mut stack);
        }
        if u + 1 < w {
            push(u + 1, v, &mut pixels, &mut stack);
        }
        if v > 0 {
            push(u, v - 1, &mut pixels, &mut stack);
        }
        if v + 1 < h {
            push(u, v + 1, &mut pixels, &mut stack);
        }
    }
    Ok(Instance { class_id: class, pixels })
}

/// Erosion with a square structuring element of the given radius: a pixel
/// survives when its whole square neighborhood is inside the mask (image
/// borders count as outside).
pub fn erode(mask: &BinaryMask, radius: u32) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let r = radius as i64;
    BinaryMask::from_fn(mask.width(), mask.height(), |u, v| {
        for dv in -r..=r {
            for du in -r..=r {
                let (qu, qv) = (u as i64 + du, v as i64 + dv);
                if qu < 0 || qv < 0 || qu >= mask.width() as i64 || qv >= mask.height() as i64 {
                    return false;
                }
                if !mask.contains(qu as u32, qv as u32) {
                    return false;
                }
            }
        }
        true
    })
}

/// Dilation with a square structuring element, clipped to the image.
pub fn dilate(mask: &BinaryMask, radius: u32) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let r = radius as i64;
    let mut out = BinaryMask::empty(mask.width(), mask.height());
    for (u, v) in mask.iter_pixels() {
        for dv in -r..=r {
            for du in -r..=r {
                let (qu, qv) = (u as i64 + du, v as i64 + dv);
                if qu >= 0 && qv >= 0 && qu < mask.width() as i64 && qv < mask.height() as i64 {
                    out.insert(qu as u32, qv as u32);
                }
            }
        }
    }
    out
}

/// Principal axis of a pixel set: centroid plus the unit eigenvector of
/// the larger eigenvalue of the 2x2 position covariance.
pub fn principal_axis(mask: &BinaryMask) -> ((f64, f64), (f64, f64)) {
    let mut su = 0.0;
    let mut sv = 0.0;
    let mut n = 0.0;
    for (u, v) in mask.iter_pixels() {
        su += u as f64;
        sv += v as f64;
        n += 1.0;
    }
    let (cu, cv) = (su / n, sv / n);
    let mut cuu = 0.0;
    let mut cuv = 0.0;
    let mut cvv = 0.0;
    for (u, v) in mask.iter_pixels() {
        let du = u as f64 - cu;
        let dv = v as f64 - cv;
        cuu += du * du;
        cuv += du * dv;
        cvv += dv * dv;
    }
    // closed-form leading eigenvector of [[cuu, cuv], [cuv, cvv]]
    let trace_half = (cuu + cvv) / 2.0;
    let det = cuu * cvv - cuv * cuv;
    let lambda = trace_half + (trace_half * trace_half - det).max(0.0).sqrt();
    let (mut ax, mut ay) = if cuv.abs() > 1e-12 {
        (lambda - cvv, cuv)
    } else if cuu >= cvv {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let norm = (ax * ax + ay * ay).sqrt();
    if norm > 0.0 {
        ax /= norm;
        ay /= norm;
    } else {
        (ax, ay) = (1.0, 0.0);
    }
    ((cu, cv), (ax, ay))
}

/// Splits a pixel set at its centroid, perpendicular to its principal
/// axis, and returns the side containing `(u, v)` (the boundary belongs to
/// the non-positive side).
pub fn principal_half_containing(mask: &BinaryMask, u: u32, v: u32) -> BinaryMask {
    let ((cu, cv), (ax, ay)) = principal_axis(mask);
    let side = |pu: u32, pv: u32| -> bool {
        (pu as f64 - cu) * ax + (pv as f64 - cv) * ay > 0.0
    };
    let wanted = side(u, v);
    BinaryMask::from_fn(mask.width(), mask.height(), |pu, pv| {
        mask.contains(pu, pv) && side(pu, pv) == wanted
    })
}

/// Extent of the pixel set along its own principal axis.
pub fn principal_extent(mask: &BinaryMask) -> f64 {
    if mask.is_empty() {
        return 0.0;
    }
    let ((cu, cv), (ax, ay)) = principal_axis(mask);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (u, v) in mask.iter_pixels() {
        let t = (u as f64 - cu) * ax + (v as f64 - cv) * ay;
        lo = lo.min(t);
        hi = hi.max(t);
    }
    hi - lo
}
