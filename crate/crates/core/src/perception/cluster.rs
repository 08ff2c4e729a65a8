use std::collections::{HashMap, VecDeque};

use super::types::{Point3, PointCloud};
use super::PerceptionError;

type Cell = (i64, i64, i64);

/// Uniform voxel hash with cell size equal to the query radius.
struct Grid<'a> {
    points: &'a [Point3],
    size: f64,
    cells: HashMap<Cell, Vec<usize>>,
}

impl<'a> Grid<'a> {
    fn new(points: &'a [Point3], size: f64) -> Self {
        let mut cells: HashMap<Cell, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::cell_of(p, size)).or_default().push(i);
        }
        Self {
            points,
            size,
            cells,
        }
    }

    fn cell_of(p: &Point3, size: f64) -> Cell {
        (
            (p.x / size).floor() as i64,
            (p.y / size).floor() as i64,
            (p.z / size).floor() as i64,
        )
    }

    /// Indices within `radius` of point `i`, excluding `i`.
    fn neighbours(&self, i: usize, radius: f64, out: &mut Vec<usize>) {
        out.clear();
        let p = &self.points[i];
        let (cx, cy, cz) = Self::cell_of(p, self.size);
        let r2 = radius * radius;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(idx) = self.cells.get(&(cx + dx, cy + dy, cz + dz)) {
                        out.extend(
                            idx.iter()
                                .copied()
                                .filter(|&j| j != i && (self.points[j] - p).norm_squared() <= r2),
                        );
                    }
                }
            }
        }
    }
}

/// Connected components under the "within `tol`" relation. Components
/// smaller than `min_size` are dropped; the rest are ordered by size,
/// largest first, then by first point index.
pub fn euclidean_cluster(cloud: &PointCloud, tol: f64, min_size: usize) -> Vec<PointCloud> {
    if cloud.is_empty() || tol.is_nan() || tol <= 0.0 {
        return Vec::new();
    }
    let grid = Grid::new(&cloud.points, tol);
    let mut label = vec![usize::MAX; cloud.len()];
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    let mut nb = Vec::new();
    for seed in 0..cloud.len() {
        if label[seed] != usize::MAX {
            continue;
        }
        let id = components.len();
        label[seed] = id;
        let mut members = vec![seed];
        queue.push_back(seed);
        while let Some(i) = queue.pop_front() {
            grid.neighbours(i, tol, &mut nb);
            for &j in &nb {
                if label[j] == usize::MAX {
                    label[j] = id;
                    members.push(j);
                    queue.push_back(j);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components.retain(|c| c.len() >= min_size.max(1));
    components.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    components.iter().map(|c| cloud.select(c)).collect()
}

/// Drops points with fewer than `min_neighbours` others within `radius`.
pub fn radius_outlier_filter(cloud: &PointCloud, radius: f64, min_neighbours: usize) -> PointCloud {
    if cloud.is_empty() || min_neighbours == 0 || radius.is_nan() || radius <= 0.0 {
        return cloud.clone();
    }
    let grid = Grid::new(&cloud.points, radius);
    let mut nb = Vec::new();
    let keep: Vec<usize> = (0..cloud.len())
        .filter(|&i| {
            grid.neighbours(i, radius, &mut nb);
            nb.len() >= min_neighbours
        })
        .collect();
    cloud.select(&keep)
}

/// Largest cluster; ties go to the centroid nearest the camera.
pub fn select_target_cluster(clusters: &[PointCloud]) -> Result<&PointCloud, PerceptionError> {
    let dist = |c: &PointCloud| c.centroid().map_or(f64::INFINITY, |p| p.coords.norm());
    clusters
        .iter()
        .reduce(|best, c| {
            if c.len() > best.len() || (c.len() == best.len() && dist(c) < dist(best)) {
                c
            } else {
                best
            }
        })
        .ok_or(PerceptionError::NoClusters)
}
