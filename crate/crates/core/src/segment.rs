//! Ground extraction, ground post-processing, and the two local
//! label-refinement rules (majority-vote smoothing and color-proximity
//! building cleaning).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cloud::{ClassLabel, PointCloud};
use crate::components::connected_components;
use crate::error::{Error, Result};
use crate::spatial::{Dims, SpatialIndex};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GroundParams {
    /// Seed-grid cell size over x-y, meters.
    pub grid_cell: f64,
    /// Maximum height above the seed surface for a ground point, meters.
    pub height_tol: f64,
    /// Maximum rise/run between neighboring accepted seeds.
    pub slope_tol: f64,
}

impl Default for GroundParams {
    fn default() -> Self {
        GroundParams {
            grid_cell: 5.0,
            height_tol: 0.5,
            slope_tol: 0.35,
        }
    }
}

impl GroundParams {
    pub fn validate(&self) -> Result<()> {
        if self.grid_cell <= 0.0 || self.height_tol <= 0.0 || self.slope_tol <= 0.0 {
            return Err(Error::Config("ground params must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SmoothParams {
    /// Majority-vote neighborhood radius, meters.
    pub radius: f64,
    /// Number of smoothing iterations.
    pub iterations: usize,
    /// Maximum RGB distance for the building-cleaning rule.
    pub color_tol: f64,
    /// Neighborhood radius of the building-cleaning rule, meters.
    pub clean_radius: f64,
}

impl Default for SmoothParams {
    fn default() -> Self {
        SmoothParams {
            radius: 1.5,
            iterations: 2,
            color_tol: 30.0,
            clean_radius: 1.5,
        }
    }
}

impl SmoothParams {
    pub fn validate(&self) -> Result<()> {
        if self.radius <= 0.0 || self.clean_radius <= 0.0 {
            return Err(Error::Config("smoothing radii must be positive".into()));
        }
        if self.iterations < 1 {
            return Err(Error::Config("iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Grid-minimum region-growing ground extractor.
///
/// Per-cell minimum-z points act as seed candidates. Seeds are accepted by
/// growing from the lowest seed across adjacent cells while the seed-to-seed
/// slope stays within `slope_tol`. A point is ground when its height above
/// the accepted seed surface (inverse-distance interpolation over the 3x3
/// cell neighborhood) is at most `height_tol`.
pub fn extract_ground(cloud: &PointCloud, params: &GroundParams) -> Result<Vec<usize>> {
    cloud.require_non_empty()?;
    params.validate()?;
    let cell = params.grid_cell;
    let key = |x: f64, y: f64| ((x / cell).floor() as i64, (y / cell).floor() as i64);

    // Seed candidate per cell: the minimum-z point.
    let mut seeds: HashMap<(i64, i64), usize> = HashMap::new();
    for (i, p) in cloud.points.iter().enumerate() {
        let k = key(p.x, p.y);
        match seeds.get(&k) {
            Some(&j) if cloud.points[j].z <= p.z => {}
            _ => {
                seeds.insert(k, i);
            }
        }
    }

    // Grow the accepted seed set from the lowest seed; a candidate joins
    // when the slope to an accepted 8-neighbor cell seed is acceptable.
    let mut accepted: HashMap<(i64, i64), usize> = HashMap::new();
    let start = seeds
        .iter()
        .min_by(|a, b| {
            let za = cloud.points[*a.1].z;
            let zb = cloud.points[*b.1].z;
            za.partial_cmp(&zb).unwrap().then(a.0.cmp(b.0))
        })
        .map(|(&k, &i)| (k, i))
        .unwrap();
    let mut queue = vec![start.0];
    accepted.insert(start.0, start.1);
    while let Some(k) = queue.pop() {
        let pi = accepted[&k];
        let pz = cloud.points[pi].z;
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let nk = (k.0 + dx, k.1 + dy);
                if accepted.contains_key(&nk) {
                    continue;
                }
                if let Some(&ni) = seeds.get(&nk) {
                    let nz = cloud.points[ni].z;
                    let run = cell * ((dx * dx + dy * dy) as f64).sqrt();
                    if (nz - pz).abs() / run <= params.slope_tol {
                        accepted.insert(nk, ni);
                        queue.push(nk);
                    }
                }
            }
        }
    }

    // Interpolate the seed surface over each point's 3x3 cell neighborhood.
    let mut ground = Vec::new();
    for (i, p) in cloud.points.iter().enumerate() {
        let k = key(p.x, p.y);
        let mut wsum = 0.0;
        let mut zsum = 0.0;
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                if let Some(&si) = accepted.get(&(k.0 + dx, k.1 + dy)) {
                    let s = &cloud.points[si];
                    let d = ((p.x - s.x).powi(2) + (p.y - s.y).powi(2)).sqrt().max(1e-6);
                    let w = 1.0 / d;
                    wsum += w;
                    zsum += w * s.z;
                }
            }
        }
        if wsum == 0.0 {
            continue; // no accepted seed nearby: not ground
        }
        let est = zsum / wsum;
        if p.z - est <= params.height_tol {
            ground.push(i);
        }
    }
    Ok(ground)
}

/// Keeps only ground points in 3D connected components of size >=
/// `min_comp`; everything else is returned for relabeling as non-ground.
/// The output is always a subset of the input.
pub fn ground_postprocess(
    cloud: &PointCloud,
    ground_ids: &[usize],
    link: f64,
    min_comp: usize,
) -> Vec<usize> {
    connected_components(cloud, ground_ids, link, min_comp).surviving
}

/// Majority-vote label smoothing over Building/Tree points.
///
/// Each iteration every non-ground point takes the majority label among
/// non-ground neighbors within `radius` (synchronous update); ties keep the
/// current label. Ground labels never change.
pub fn smooth_labels(
    cloud: &PointCloud,
    labels: &[ClassLabel],
    params: &SmoothParams,
) -> Result<Vec<ClassLabel>> {
    if labels.len() != cloud.len() {
        return Err(Error::LengthMismatch(labels.len(), cloud.len()));
    }
    params.validate()?;
    let non_ground: Vec<usize> = (0..cloud.len())
        .filter(|&i| labels[i] != ClassLabel::Ground)
        .collect();
    if non_ground.is_empty() {
        return Ok(labels.to_vec());
    }
    let pts: Vec<[f64; 3]> = non_ground.iter().map(|&i| cloud.points[i].pos()).collect();
    let index = SpatialIndex::from_points(pts);

    let mut current: Vec<ClassLabel> = labels.to_vec();
    for _ in 0..params.iterations {
        let mut next = current.clone();
        for (k, &i) in non_ground.iter().enumerate() {
            let mut building = 0usize;
            let mut tree = 0usize;
            for j in index.radius_neighbors_of(k, params.radius, Dims::Three) {
                match current[non_ground[j]] {
                    ClassLabel::Building => building += 1,
                    ClassLabel::Tree => tree += 1,
                    _ => {}
                }
            }
            if building > tree {
                next[i] = ClassLabel::Building;
            } else if tree > building {
                next[i] = ClassLabel::Tree;
            } // tie: keep current label
        }
        if next == current {
            break;
        }
        current = next;
    }
    Ok(current)
}

/// Single-pass color-proximity building cleaning: a Tree point within
/// `clean_radius` of a Building point with RGB distance <= `color_tol` is
/// relabeled Building. Only Tree -> Building changes happen.
pub fn clean_building_points(
    cloud: &PointCloud,
    labels: &[ClassLabel],
    params: &SmoothParams,
) -> Result<Vec<ClassLabel>> {
    if labels.len() != cloud.len() {
        return Err(Error::LengthMismatch(labels.len(), cloud.len()));
    }
    params.validate()?;
    let index = SpatialIndex::from_cloud(cloud)?;
    let mut out = labels.to_vec();
    for i in 0..cloud.len() {
        if labels[i] != ClassLabel::Tree {
            continue;
        }
        for j in index.radius_neighbors_of(i, params.clean_radius, Dims::Three) {
            if labels[j] == ClassLabel::Building
                && cloud.points[i].color_dist(&cloud.points[j]) <= params.color_tol
            {
                out[i] = ClassLabel::Building;
                break;
            }
        }
    }
    Ok(out)
}
