//! Point cloud data model.

use crate::error::{Error, Result};

/// A single point: position in meters plus an RGB color.
///
/// Coordinates are stored relative to the owning cloud's `geo_origin`,
/// so 64-bit precision is not exhausted by georeferenced magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Point {
    pub fn new(x: f64, y: f64, z: f64, r: u8, g: u8, b: u8) -> Self {
        Point { x, y, z, r, g, b }
    }

    pub fn pos(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn dist_xy(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    /// Euclidean distance between the two colors over the RGB channels.
    pub fn color_dist(&self, other: &Point) -> f64 {
        let dr = self.r as f64 - other.r as f64;
        let dg = self.g as f64 - other.g as f64;
        let db = self.b as f64 - other.b as f64;
        (dr * dr + dg * dg + db * db).sqrt()
    }
}

/// Semantic class of a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum ClassLabel {
    Unlabeled = 0,
    Ground = 1,
    Building = 2,
    Tree = 3,
}

impl ClassLabel {
    pub fn from_code(code: u8) -> Option<ClassLabel> {
        match code {
            0 => Some(ClassLabel::Unlabeled),
            1 => Some(ClassLabel::Ground),
            2 => Some(ClassLabel::Building),
            3 => Some(ClassLabel::Tree),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Unlabeled => "unlabeled",
            ClassLabel::Ground => "ground",
            ClassLabel::Building => "building",
            ClassLabel::Tree => "tree",
        }
    }
}

/// A georeferenced point cloud with optional per-point class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point>,
    /// When present, exactly one label per point.
    pub labels: Option<Vec<ClassLabel>>,
    /// Offset of the local frame in the declared planar reference frame.
    pub geo_origin: [f64; 3],
    /// Identifier of the reference frame; "local" when not georeferenced.
    pub crs_tag: String,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Self {
        PointCloud {
            points,
            labels: None,
            geo_origin: [0.0; 3],
            crs_tag: "local".to_string(),
        }
    }

    pub fn with_labels(points: Vec<Point>, labels: Vec<ClassLabel>) -> Self {
        assert_eq!(points.len(), labels.len());
        PointCloud {
            points,
            labels: Some(labels),
            geo_origin: [0.0; 3],
            crs_tag: "local".to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn require_non_empty(&self) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptyCloud)
        } else {
            Ok(())
        }
    }

    /// Extracts the subset at `ids`, keeping labels and georeference.
    pub fn subset(&self, ids: &[usize]) -> PointCloud {
        PointCloud {
            points: ids.iter().map(|&i| self.points[i]).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| ids.iter().map(|&i| l[i]).collect()),
            geo_origin: self.geo_origin,
            crs_tag: self.crs_tag.clone(),
        }
    }

    /// Validates basic structural invariants.
    pub fn validate(&self) -> Result<()> {
        if let Some(labels) = &self.labels {
            if labels.len() != self.points.len() {
                return Err(Error::LengthMismatch(labels.len(), self.points.len()));
            }
        }
        if !self.geo_origin.iter().all(|v| v.is_finite()) {
            return Err(Error::MissingGeoreference);
        }
        for (i, p) in self.points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::Parse {
                    line: i,
                    msg: "non-finite coordinate".to_string(),
                });
            }
        }
        Ok(())
    }
}
