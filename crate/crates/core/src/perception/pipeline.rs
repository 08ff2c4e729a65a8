use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::cluster::{euclidean_cluster, radius_outlier_filter, select_target_cluster};
use super::filter::{crop_by_roi, range_filter};
use super::geometry::{extrude_box, fit_rectangle, project_to_plane};
use super::ransac::{ransac_plane, RansacParams};
use super::types::{Box3D, CameraIntrinsics, Catalog, Plane, PointCloud, Roi2D};
use super::PerceptionError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectParams {
    /// Meters from the camera.
    pub max_range: f64,
    pub ransac: RansacParams,
    /// Largest angle between the floor normal and the camera up axis.
    pub floor_max_angle_deg: f64,
    /// Camera-frame gravity direction.
    pub down: [f64; 3],
    /// Planes tried before giving up on finding the floor.
    pub max_floor_planes: usize,
    /// Points closer to the floor than this are treated as floor.
    pub floor_clearance: f64,
    pub cluster_tol: f64,
    pub min_cluster_size: usize,
    /// Radius outlier removal before clustering; 0 neighbours disables it.
    pub outlier_radius: f64,
    pub outlier_min_neighbours: usize,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            max_range: 1.5,
            ransac: RansacParams::default(),
            floor_max_angle_deg: 30.0,
            down: [0.0, 1.0, 0.0],
            max_floor_planes: 3,
            floor_clearance: 0.01,
            cluster_tol: 0.02,
            min_cluster_size: 30,
            outlier_radius: 0.015,
            outlier_min_neighbours: 3,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum DetectFailure {
    #[error("invalid RoI: {0}")]
    InvalidRoi(String),
    #[error("unknown category {0:?}")]
    UnknownCategory(String),
    #[error("no floor plane")]
    NoFloor,
    #[error("no points in RoI")]
    NoPoints,
    #[error("no cluster")]
    NoCluster,
    #[error("degenerate cluster: {0}")]
    Degenerate(String),
}

/// Outcome for one RoI, in input order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiDetection {
    pub roi_index: usize,
    pub category: String,
    pub result: Result<Box3D, DetectFailure>,
}

/// Least-squares plane through the points, facing the camera.
fn refine_plane(cloud: &PointCloud) -> Option<Plane> {
    let c = cloud.centroid()?.coords;
    let mut cov = Matrix3::zeros();
    for p in &cloud.points {
        let r = p.coords - c;
        cov += r * r.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let (i, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let n: Vector3<f64> = eig.eigenvectors.column(i).into_owned();
    Plane::new(n, -n.dot(&c)).ok().map(Plane::facing_origin)
}

/// Floor plane: the first RANSAC plane whose normal is close enough to
/// camera up, refined by least squares on its inliers. Planes that fail
/// the test have their inliers removed before the next attempt.
pub fn find_floor(
    cloud: &PointCloud,
    params: &DetectParams,
) -> Result<(Plane, Vec<usize>), PerceptionError> {
    let up = -Vector3::from(params.down);
    let up = up
        .try_normalize(1e-12)
        .ok_or_else(|| PerceptionError::Invalid("zero down vector".into()))?;
    let cos_max = params.floor_max_angle_deg.to_radians().cos();
    let mut remaining: Vec<usize> = (0..cloud.len()).collect();
    for attempt in 0..params.max_floor_planes {
        let sub = cloud.select(&remaining);
        let ransac = RansacParams {
            seed: params.ransac.seed.wrapping_add(attempt as u64),
            ..params.ransac
        };
        let (plane, inliers) = ransac_plane(&sub, &ransac)?;
        if plane.n.dot(&up) >= cos_max {
            let plane = refine_plane(&sub.select(&inliers)).unwrap_or(plane);
            let tol = params.ransac.inlier_tol;
            let all = (0..cloud.len())
                .filter(|&i| plane.signed_distance(&cloud.points[i]).abs() <= tol)
                .collect();
            return Ok((plane, all));
        }
        let mut drop = vec![false; sub.len()];
        for i in inliers {
            drop[i] = true;
        }
        remaining = remaining
            .into_iter()
            .zip(drop)
            .filter(|(_, d)| !d)
            .map(|(i, _)| i)
            .collect();
        if remaining.len() < 3 {
            break;
        }
    }
    Err(PerceptionError::NoFloor)
}

fn detect_one(
    objects: &PointCloud,
    floor: &Plane,
    roi: &Roi2D,
    cam: &CameraIntrinsics,
    catalog: &Catalog,
    params: &DetectParams,
) -> Result<Box3D, DetectFailure> {
    roi.validate(cam)
        .map_err(|e| DetectFailure::InvalidRoi(e.to_string()))?;
    let category = catalog
        .get(&roi.category)
        .map_err(|_| DetectFailure::UnknownCategory(roi.category.clone()))?;
    let crop = crop_by_roi(objects, roi, cam);
    if crop.is_empty() {
        return Err(DetectFailure::NoPoints);
    }
    let crop = radius_outlier_filter(&crop, params.outlier_radius, params.outlier_min_neighbours);
    let clusters = euclidean_cluster(&crop, params.cluster_tol, params.min_cluster_size);
    let target = select_target_cluster(&clusters).map_err(|_| DetectFailure::NoCluster)?;
    let flat = project_to_plane(&target.points, floor);
    let rect =
        fit_rectangle(&flat, category).map_err(|e| DetectFailure::Degenerate(e.to_string()))?;
    Ok(extrude_box(&rect, floor, category.height(), &category.name))
}

/// Runs the full pipeline once per RoI. The floor is fitted once for the
/// whole cloud; failures are reported per RoI.
pub fn detect_boxes(
    cloud: &PointCloud,
    rois: &[Roi2D],
    cam: &CameraIntrinsics,
    catalog: &Catalog,
    params: &DetectParams,
) -> Vec<RoiDetection> {
    let near = range_filter(cloud, params.max_range);
    let floor = find_floor(&near, params).ok().map(|(plane, _)| plane);
    let objects = floor.map(|plane| PointCloud {
        points: near
            .points
            .iter()
            .filter(|p| plane.signed_distance(p) > params.floor_clearance)
            .copied()
            .collect(),
    });
    rois.iter()
        .enumerate()
        .map(|(roi_index, roi)| RoiDetection {
            roi_index,
            category: roi.category.clone(),
            result: match (&floor, &objects) {
                (Some(plane), Some(objects)) => {
                    detect_one(objects, plane, roi, cam, catalog, params)
                }
                _ => Err(DetectFailure::NoFloor),
            },
        })
        .collect()
}
