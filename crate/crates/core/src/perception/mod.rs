//! Per-RoI 3D box fitting on a single point cloud.
//!
//! Pipeline: range filter, floor plane by RANSAC, RoI frustum crop,
//! euclidean clustering, projection onto the floor, minimum-area rectangle
//! snapped to the catalog footprint, extrusion along the floor normal.

mod cluster;
mod filter;
mod geometry;
mod io;
mod pipeline;
mod ransac;
mod types;

pub use cluster::{euclidean_cluster, radius_outlier_filter, select_target_cluster};
pub use filter::{crop_by_roi, range_filter};
pub use geometry::{
    convex_hull, extrude_box, fit_rectangle, min_area_rect, project_to_plane, PlaneBasis,
};
pub use io::{read_cloud_csv, read_ply, write_cloud_csv, write_ply};
pub use pipeline::{detect_boxes, find_floor, DetectFailure, DetectParams, RoiDetection};
pub use ransac::{exhaustive_plane, ransac_plane, triple_count, RansacParams};
pub use types::{
    Box3D, CameraIntrinsics, Catalog, CategorySpec, OrientedRect, Plane, Point3, PointCloud, Roi2D,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerceptionError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("points are collinear")]
    Collinear,
    #[error("no clusters")]
    NoClusters,
    #[error("unknown category {0:?}")]
    UnknownCategory(String),
    #[error("invalid value: {0}")]
    Invalid(String),
    #[error("no floor plane found")]
    NoFloor,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for PerceptionError {
    fn from(e: std::io::Error) -> Self {
        PerceptionError::Io(e.to_string())
    }
}
