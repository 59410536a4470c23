//! Per-point geometric features: neighborhood covariance eigenvalues,
//! verticality, roughness and density.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::cloud::{Point, PointCloud};
use crate::error::{Error, Result};
use crate::spatial::{Dims, SpatialIndex};

/// Eigen decomposition of a neighborhood covariance matrix, eigenvalues
/// sorted descending and normalized so the largest is 1.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub lambdas: [f64; 3],
    pub evecs: [Vector3<f64>; 3],
}

/// Per-point feature record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureRecord {
    pub verticality: f64,
    pub roughness: f64,
    pub density: usize,
    pub valid: bool,
}

#[derive(Debug, Clone)]
pub struct FeatureSet {
    pub records: Vec<FeatureRecord>,
}

fn default_feature_radius() -> f64 {
    1.5
}
fn default_density_radius() -> f64 {
    3.0
}
fn default_min_neighbors() -> usize {
    8
}
fn default_roughness_cap() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FeatureParams {
    /// Neighborhood radius for covariance and plane fitting, meters.
    pub feature_radius: f64,
    /// Radius of the density-count sphere, meters.
    pub density_radius: f64,
    /// Minimum neighbor count for a stable plane fit; points below this
    /// are flagged invalid.
    pub min_neighbors: usize,
    /// Roughness values are divided by this cap and clamped to 1.
    pub roughness_cap: f64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        FeatureParams {
            feature_radius: default_feature_radius(),
            density_radius: default_density_radius(),
            min_neighbors: default_min_neighbors(),
            roughness_cap: default_roughness_cap(),
        }
    }
}

impl FeatureParams {
    pub fn validate(&self) -> Result<()> {
        if self.feature_radius <= 0.0 || self.density_radius <= 0.0 || self.roughness_cap <= 0.0 {
            return Err(Error::Config("feature radii and cap must be positive".into()));
        }
        if self.min_neighbors < 3 {
            return Err(Error::Config("min_neighbors must be >= 3".into()));
        }
        Ok(())
    }
}

/// Covariance of a neighborhood and its sorted, normalized eigen system.
///
/// The covariance is taken over the neighbor positions themselves (the
/// center point is not implicitly included). Eigenvalues come back sorted
/// descending and divided by the largest; eigenvectors are unit norm.
pub fn covariance_eigen(neighbors: &[Point]) -> Result<EigenDecomposition> {
    if neighbors.len() < 3 {
        return Err(Error::InsufficientNeighbors {
            got: neighbors.len(),
            need: 3,
        });
    }
    let n = neighbors.len() as f64;
    let mut mean = Vector3::zeros();
    for p in neighbors {
        mean += Vector3::new(p.x, p.y, p.z);
    }
    mean /= n;
    let mut cov = Matrix3::zeros();
    for p in neighbors {
        let d = Vector3::new(p.x, p.y, p.z) - mean;
        cov += d * d.transpose();
    }
    cov /= n;

    let eig = cov.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut lambdas = [0.0; 3];
    let mut evecs = [Vector3::zeros(); 3];
    for (slot, &src) in order.iter().enumerate() {
        lambdas[slot] = eig.eigenvalues[src].max(0.0);
        evecs[slot] = eig.eigenvectors.column(src).into_owned().normalize();
    }
    if lambdas[0] <= 0.0 {
        return Err(Error::DegenerateNeighborhood);
    }
    let l1 = lambdas[0];
    for l in &mut lambdas {
        *l /= l1;
    }
    Ok(EigenDecomposition { lambdas, evecs })
}

/// 1 - |<up, e3>| for the smallest-eigenvalue direction `e3`.
/// 0 on horizontal surfaces, 1 on vertical ones; sign of `e3` is irrelevant.
pub fn verticality(e3: &Vector3<f64>) -> Result<f64> {
    if (e3.norm() - 1.0).abs() > 1e-6 {
        return Err(Error::NonUnitVector);
    }
    Ok((1.0 - e3.z.abs()).clamp(0.0, 1.0))
}

/// Orthogonal distance from `center` to the least-squares plane of
/// `neighbors`, divided by `cap` and clamped to 1.
pub fn roughness(neighbors: &[Point], center: &Point, cap: f64) -> Result<f64> {
    assert!(cap > 0.0);
    let eig = covariance_eigen(neighbors)?;
    // Collinear neighborhoods leave the plane normal undetermined.
    if eig.lambdas[1] <= 1e-12 {
        return Err(Error::DegenerateNeighborhood);
    }
    let n = neighbors.len() as f64;
    let mut mean = Vector3::zeros();
    for p in neighbors {
        mean += Vector3::new(p.x, p.y, p.z);
    }
    mean /= n;
    let d = (Vector3::new(center.x, center.y, center.z) - mean).dot(&eig.evecs[2]);
    Ok((d.abs() / cap).min(1.0))
}

/// Number of other indexed points within 3D distance `r` of point `id`.
pub fn density(index: &SpatialIndex, point_id: usize, r: f64) -> usize {
    index.radius_neighbors_of(point_id, r, Dims::Three).len()
}

/// Computes verticality, roughness and density for every point of `cloud`.
///
/// Features are derived from the provided cloud only, so callers that
/// filter a cloud and recompute see the staged-recomputation semantics.
/// Points with fewer than `min_neighbors` neighbors within
/// `feature_radius` are flagged invalid with zeroed features.
pub fn compute_features(cloud: &PointCloud, params: &FeatureParams) -> Result<FeatureSet> {
    cloud.require_non_empty()?;
    params.validate()?;
    let index = SpatialIndex::from_cloud(cloud)?;
    let mut records = Vec::with_capacity(cloud.len());
    for i in 0..cloud.len() {
        let nb_ids = index.radius_neighbors_of(i, params.feature_radius, Dims::Three);
        let dens = density(&index, i, params.density_radius);
        if nb_ids.len() < params.min_neighbors {
            records.push(FeatureRecord {
                verticality: 0.0,
                roughness: 0.0,
                density: dens,
                valid: false,
            });
            continue;
        }
        let neighbors: Vec<Point> = nb_ids.iter().map(|&j| cloud.points[j]).collect();
        match covariance_eigen(&neighbors) {
            Ok(eig) if eig.lambdas[1] > 1e-12 => {
                let vert = verticality(&eig.evecs[2])?;
                let rough = roughness(&neighbors, &cloud.points[i], params.roughness_cap)?;
                records.push(FeatureRecord {
                    verticality: vert,
                    roughness: rough,
                    density: dens,
                    valid: true,
                });
            }
            // Coincident or collinear neighborhoods carry no surface.
            _ => records.push(FeatureRecord {
                verticality: 0.0,
                roughness: 0.0,
                density: dens,
                valid: false,
            }),
        }
    }
    Ok(FeatureSet { records })
}

/// One text line per point: `id verticality roughness density valid`.
pub fn dump_features(features: &FeatureSet) -> String {
    let mut s = String::new();
    for (i, r) in features.records.iter().enumerate() {
        s.push_str(&format!(
            "{} {:.6} {:.6} {} {}\n",
            i, r.verticality, r.roughness, r.density, r.valid
        ));
    }
    s
}
