//! Exact nearest-neighbor index over scene points.
//!
//! A median-split kd-tree on f64 coordinates. Queries are exact: pruning
//! uses `>` against the best squared distance, so boundary-equal subtrees
//! are still visited, and ties on distance resolve to the lowest point id.
//! Those two rules make index-based lookups reproduce a linear scan
//! exactly, duplicates included.

use crate::cloud::ScenePointCloud;

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone, Copy)]
pub struct Neighbor {
    pub index: usize,
    pub dist_sq: f64,
}

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

pub struct SceneIndex {
    points: Vec<[f64; 3]>,
    // permutation of point ids, partitioned by the tree structure
    order: Vec<u32>,
    nodes: Vec<Node>,
    root: usize,
}

#[inline]
fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

impl SceneIndex {
    pub fn build(cloud: &ScenePointCloud) -> Self {
        let points: Vec<[f64; 3]> = cloud
            .positions()
            .iter()
            .map(|p| [p[0] as f64, p[1] as f64, p[2] as f64])
            .collect();
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::new();
        let n = points.len();
        let root = build_node(&points, &mut order, 0, n, &mut nodes);
        Self { points, order, nodes, root }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The nearest point to `query`; lowest id wins on exact distance ties.
    pub fn nearest(&self, query: &[f64; 3]) -> Neighbor {
        debug_assert!(!self.points.is_empty());
        let mut best = Neighbor { index: usize::MAX, dist_sq: f64::INFINITY };
        self.search(self.root, query, &mut best);
        best
    }

    fn search(&self, node: usize, query: &[f64; 3], best: &mut Neighbor) {
        match &self.nodes[node] {
            Node::Leaf { start, end } => {
                for &id in &self.order[*start..*end] {
                    let id = id as usize;
                    let d = dist_sq(&self.points[id], query);
                    if d < best.dist_sq || (d == best.dist_sq && id < best.index) {
                        *best = Neighbor { index: id, dist_sq: d };
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let delta = query[*axis] - value;
                let (near, far) = if delta <= 0.0 { (*left, *right) } else { (*right, *left) };
                self.search(near, query, best);
                // the far side may still hold an equal-distance lower id
                if delta * delta <= best.dist_sq {
                    self.search(far, query, best);
                }
            }
        }
    }

    /// Reference linear scan with the same tie rule as `nearest`.
    pub fn nearest_brute_force(&self, query: &[f64; 3]) -> Neighbor {
        let mut best = Neighbor { index: usize::MAX, dist_sq: f64::INFINITY };
        for (id, p) in self.points.iter().enumerate() {
            let d = dist_sq(p, query);
            if d < best.dist_sq || (d == best.dist_sq && id < best.index) {
                best = Neighbor { index: id, dist_sq: d };
            }
        }
        best
    }
}

fn build_node(
    points: &[[f64; 3]],
    order: &mut [u32],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return nodes.len() - 1;
    }

    // split the widest axis at the median
    let slice = &order[start..end];
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &id in slice.iter() {
        let p = &points[id as usize];
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let axis = (0..3)
        .max_by(|&a, &b| (hi[a] - lo[a]).partial_cmp(&(hi[b] - lo[b])).unwrap())
        .unwrap();
    if hi[axis] == lo[axis] {
        // all points coincide on every axis; no split is possible
        nodes.push(Node::Leaf { start, end });
        return nodes.len() - 1;
    }

    let mid = (end - start) / 2;
    order[start..end].select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis]
            .partial_cmp(&points[b as usize][axis])
            .unwrap()
            .then(a.cmp(&b))
    });
    let value = points[order[start + mid] as usize][axis];

    // reserve a slot so child indices stay stable
    nodes.push(Node::Leaf { start, end });
    let me = nodes.len() - 1;
    let left = build_node(points, order, start, start + mid, nodes);
    let right = build_node(points, order, start + mid, end, nodes);
    nodes[me] = Node::Split { axis, value, left, right };
    me
}
