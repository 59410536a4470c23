//! Voxelization and voxel-grid subsampling.

use std::collections::BTreeMap;

use crate::cloud::{Point, PointCloud};
use crate::error::Result;

/// Occupancy + mean color per cell. Presence of a key means the cell is
/// occupied by at least one source point.
#[derive(Debug, Clone)]
pub struct VoxelGrid {
    pub origin: [f64; 3],
    pub resolution: f64,
    pub cells: BTreeMap<(i64, i64, i64), VoxelCell>,
}

#[derive(Debug, Clone)]
pub struct VoxelCell {
    pub count: usize,
    pub mean_color: [f64; 3],
}

fn cell_index(p: &Point, origin: [f64; 3], res: f64) -> (i64, i64, i64) {
    (
        ((p.x - origin[0]) / res).floor() as i64,
        ((p.y - origin[1]) / res).floor() as i64,
        ((p.z - origin[2]) / res).floor() as i64,
    )
}

/// Builds an occupancy grid; a cell is occupied iff it contains a point.
pub fn voxelize(cloud: &PointCloud, resolution: f64) -> Result<VoxelGrid> {
    assert!(resolution > 0.0);
    cloud.require_non_empty()?;
    let origin = [0.0; 3];
    let mut cells: BTreeMap<(i64, i64, i64), (usize, [f64; 3])> = BTreeMap::new();
    for p in &cloud.points {
        let e = cells.entry(cell_index(p, origin, resolution)).or_default();
        e.0 += 1;
        e.1[0] += p.r as f64;
        e.1[1] += p.g as f64;
        e.1[2] += p.b as f64;
    }
    Ok(VoxelGrid {
        origin,
        resolution,
        cells: cells
            .into_iter()
            .map(|(k, (n, sum))| {
                let nf = n as f64;
                (
                    k,
                    VoxelCell {
                        count: n,
                        mean_color: [sum[0] / nf, sum[1] / nf, sum[2] / nf],
                    },
                )
            })
            .collect(),
    })
}

/// One output point per occupied cell, at the centroid with mean color.
/// Output points are ordered by cell index; labels are dropped.
pub fn voxel_subsample(cloud: &PointCloud, cell: f64) -> Result<PointCloud> {
    assert!(cell > 0.0);
    cloud.require_non_empty()?;
    let origin = [0.0; 3];
    let mut acc: BTreeMap<(i64, i64, i64), (usize, [f64; 3], [f64; 3])> = BTreeMap::new();
    for p in &cloud.points {
        let e = acc.entry(cell_index(p, origin, cell)).or_default();
        e.0 += 1;
        e.1[0] += p.x;
        e.1[1] += p.y;
        e.1[2] += p.z;
        e.2[0] += p.r as f64;
        e.2[1] += p.g as f64;
        e.2[2] += p.b as f64;
    }
    let points = acc
        .into_values()
        .map(|(n, pos, col)| {
            let nf = n as f64;
            Point::new(
                pos[0] / nf,
                pos[1] / nf,
                pos[2] / nf,
                (col[0] / nf + 0.5).floor().clamp(0.0, 255.0) as u8,
                (col[1] / nf + 0.5).floor().clamp(0.0, 255.0) as u8,
                (col[2] / nf + 0.5).floor().clamp(0.0, 255.0) as u8,
            )
        })
        .collect();
    Ok(PointCloud {
        points,
        labels: None,
        geo_origin: cloud.geo_origin,
        crs_tag: cloud.crs_tag.clone(),
    })
}
