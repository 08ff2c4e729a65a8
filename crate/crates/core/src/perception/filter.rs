use super::types::{CameraIntrinsics, PointCloud, Roi2D};

/// Keeps points no farther than `max_range` from the camera.
pub fn range_filter(cloud: &PointCloud, max_range: f64) -> PointCloud {
    let r2 = max_range * max_range;
    PointCloud {
        points: cloud
            .points
            .iter()
            .filter(|p| p.coords.norm_squared() <= r2)
            .copied()
            .collect(),
    }
}

/// Keeps points in front of the camera whose projection falls in the RoI.
pub fn crop_by_roi(cloud: &PointCloud, roi: &Roi2D, cam: &CameraIntrinsics) -> PointCloud {
    PointCloud {
        points: cloud
            .points
            .iter()
            .filter(|p| cam.project(p).is_some_and(|(u, v)| roi.contains(u, v)))
            .copied()
            .collect(),
    }
}
