//! Terrain data fusion: coarse georeference alignment, two-pass ICP with a
//! boundary buffer, optional semantic ground-border refinement with x/y
//! translation zeroing, and overlap removal.

use std::collections::BTreeSet;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::cloud::{ClassLabel, PointCloud};
use crate::error::{Error, Result};
use crate::segment::{extract_ground, GroundParams};
use crate::spatial::{Dims, SpatialIndex};
use crate::transform::{apply_transform, RigidTransform};
use crate::voxel::voxel_subsample;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct IcpParams {
    pub max_iterations: usize,
    /// Convergence threshold on the RMS change between iterations, meters.
    pub convergence_delta: f64,
    /// Correspondences beyond this distance are rejected, meters.
    pub max_correspondence_dist: f64,
    /// Both clouds are voxel-subsampled at this cell before iterating.
    pub subsample_cell: f64,
}

impl Default for IcpParams {
    fn default() -> Self {
        IcpParams {
            max_iterations: 50,
            convergence_delta: 1e-6,
            max_correspondence_dist: 10.0,
            subsample_cell: 0.5,
        }
    }
}

impl IcpParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0
            || self.convergence_delta <= 0.0
            || self.max_correspondence_dist <= 0.0
            || self.subsample_cell <= 0.0
        {
            return Err(Error::Config("icp params must be positive".into()));
        }
        Ok(())
    }
}

/// Per-run ICP diagnostics.
#[derive(Debug, Clone)]
pub struct IcpStats {
    pub iterations: usize,
    /// Post-alignment RMS per iteration.
    pub rms_history: Vec<f64>,
    pub final_rms: f64,
    pub correspondences: usize,
}

/// Pure translation between the two declared geo origins, expressing
/// source (UAV) points in the target (reference) frame.
pub fn coarse_align(uav: &PointCloud, bing: &PointCloud) -> Result<RigidTransform> {
    if uav.crs_tag == "local" || bing.crs_tag == "local" {
        return Err(Error::MissingGeoreference);
    }
    if uav.crs_tag != bing.crs_tag {
        return Err(Error::CrsMismatch(uav.crs_tag.clone(), bing.crs_tag.clone()));
    }
    Ok(RigidTransform::translation([
        uav.geo_origin[0] - bing.geo_origin[0],
        uav.geo_origin[1] - bing.geo_origin[1],
        uav.geo_origin[2] - bing.geo_origin[2],
    ]))
}

/// Least-squares rigid transform mapping the source points of `pairs` onto
/// the targets, reflection-corrected to determinant +1 (Kabsch).
pub fn estimate_rigid_transform(pairs: &[([f64; 3], [f64; 3])]) -> Result<RigidTransform> {
    if pairs.len() < 3 {
        return Err(Error::DegenerateCorrespondences);
    }
    let n = pairs.len() as f64;
    let mut sc = Vector3::zeros();
    let mut qc = Vector3::zeros();
    for (s, q) in pairs {
        sc += Vector3::from_row_slice(s);
        qc += Vector3::from_row_slice(q);
    }
    sc /= n;
    qc /= n;

    let mut h = Matrix3::zeros();
    for (s, q) in pairs {
        let ds = Vector3::from_row_slice(s) - sc;
        let dq = Vector3::from_row_slice(q) - qc;
        h += ds * dq.transpose();
    }

    let svd = h.svd(true, true);
    let sigma = svd.singular_values;
    let rotation = if sigma[0] <= 1e-12 {
        // No rotational information (all pairs coincide): centroid shift.
        Matrix3::identity()
    } else if sigma[1] <= 1e-9 * sigma[0] {
        // Collinear correspondences leave the rotation undetermined.
        return Err(Error::DegenerateCorrespondences);
    } else {
        let u = svd.u.unwrap();
        let vt = svd.v_t.unwrap();
        let mut r = vt.transpose() * u.transpose();
        if r.determinant() < 0.0 {
            let mut d = Matrix3::identity();
            d[(2, 2)] = -1.0;
            r = vt.transpose() * d * u.transpose();
        }
        r
    };
    RigidTransform::new(rotation, qc - rotation * sc)
}

/// Point-to-point ICP with distance-based correspondence rejection.
///
/// Both clouds are voxel-subsampled at `subsample_cell` first. Returns the
/// cumulative transform (starting from `init`) and the per-iteration RMS
/// history measured after each alignment step.
pub fn icp(
    source: &PointCloud,
    target: &PointCloud,
    init: &RigidTransform,
    params: &IcpParams,
) -> Result<(RigidTransform, IcpStats)> {
    params.validate()?;
    init.check()?;
    let src = voxel_subsample(source, params.subsample_cell)?;
    let tgt = voxel_subsample(target, params.subsample_cell)?;
    let index = SpatialIndex::from_cloud(&tgt)?;

    let mut transform = init.clone();
    let mut rms_history = Vec::new();
    let mut last_pairs = 0usize;
    let mut prev_rms = f64::INFINITY;
    for _ in 0..params.max_iterations {
        let mut pairs: Vec<([f64; 3], [f64; 3])> = Vec::new();
        for p in &src.points {
            let moved = transform.apply(p.pos());
            if let Some((j, _)) = index.nearest(moved, params.max_correspondence_dist, Dims::Three)
            {
                pairs.push((p.pos(), tgt.points[j].pos()));
            }
        }
        if pairs.len() < 3 {
            if rms_history.is_empty() {
                return Err(Error::NoCorrespondences);
            }
            break;
        }
        last_pairs = pairs.len();
        transform = estimate_rigid_transform(&pairs)?;
        let mut sq = 0.0;
        for (s, q) in &pairs {
            let m = transform.apply(*s);
            sq += (m[0] - q[0]).powi(2) + (m[1] - q[1]).powi(2) + (m[2] - q[2]).powi(2);
        }
        let rms = (sq / pairs.len() as f64).sqrt();
        rms_history.push(rms);
        if rms <= params.convergence_delta || (prev_rms - rms).abs() < params.convergence_delta {
            break;
        }
        prev_rms = rms;
    }
    let final_rms = *rms_history.last().unwrap_or(&f64::NAN);
    Ok((
        transform,
        IcpStats {
            iterations: rms_history.len(),
            rms_history,
            final_rms,
            correspondences: last_pairs,
        },
    ))
}

/// 2D occupancy grid over x-y with its boundary cells.
#[derive(Debug, Clone)]
pub struct Footprint {
    pub cell: f64,
    pub occupied: BTreeSet<(i64, i64)>,
    /// Occupied cells with at least one unoccupied 8-neighbor.
    pub boundary: BTreeSet<(i64, i64)>,
}

impl Footprint {
    pub fn cell_of(&self, x: f64, y: f64) -> (i64, i64) {
        ((x / self.cell).floor() as i64, (y / self.cell).floor() as i64)
    }

    pub fn covers(&self, x: f64, y: f64) -> bool {
        self.occupied.contains(&self.cell_of(x, y))
    }
}

fn dilate(cells: &BTreeSet<(i64, i64)>, by: i64) -> BTreeSet<(i64, i64)> {
    if by <= 0 {
        return cells.clone();
    }
    let mut out = BTreeSet::new();
    for &(x, y) in cells {
        for dx in -by..=by {
            for dy in -by..=by {
                out.insert((x + dx, y + dy));
            }
        }
    }
    out
}

pub fn compute_footprint(cloud: &PointCloud, cell: f64) -> Result<Footprint> {
    assert!(cell > 0.0);
    cloud.require_non_empty()?;
    let mut occupied = BTreeSet::new();
    for p in &cloud.points {
        occupied.insert(((p.x / cell).floor() as i64, (p.y / cell).floor() as i64));
    }
    let boundary = occupied
        .iter()
        .copied()
        .filter(|&(x, y)| {
            (-1..=1).any(|dx: i64| {
                (-1..=1).any(|dy: i64| {
                    (dx != 0 || dy != 0) && !occupied.contains(&(x + dx, y + dy))
                })
            })
        })
        .collect();
    Ok(Footprint {
        cell,
        occupied,
        boundary,
    })
}

/// Points of `bing` whose x-y cell lies within the footprint dilated by
/// `ceil(buffer / cell)` cells.
pub fn crop_overlap(bing: &PointCloud, fp: &Footprint, buffer: f64) -> PointCloud {
    assert!(buffer >= 0.0);
    let grown = dilate(&fp.occupied, (buffer / fp.cell).ceil() as i64);
    let ids: Vec<usize> = (0..bing.len())
        .filter(|&i| {
            let p = &bing.points[i];
            grown.contains(&fp.cell_of(p.x, p.y))
        })
        .collect();
    bing.subset(&ids)
}

/// Complement of [`crop_overlap`] at buffer 0: Bing points over occupied
/// footprint cells are removed.
pub fn remove_overlap(bing: &PointCloud, fp: &Footprint) -> PointCloud {
    let ids: Vec<usize> = (0..bing.len())
        .filter(|&i| {
            let p = &bing.points[i];
            !fp.covers(p.x, p.y)
        })
        .collect();
    bing.subset(&ids)
}

/// Ground points within `border_width` of the footprint boundary
/// (cell-quantized: the boundary dilated by `ceil(border_width / cell)`).
fn border_subset(ground: &PointCloud, fp: &Footprint, border_width: f64) -> PointCloud {
    let cells = dilate(&fp.boundary, (border_width / fp.cell).ceil() as i64);
    let ids: Vec<usize> = (0..ground.len())
        .filter(|&i| {
            let p = &ground.points[i];
            cells.contains(&fp.cell_of(p.x, p.y))
        })
        .collect();
    ground.subset(&ids)
}

/// Registers the ground borders of the two clouds and zeroes the x and y
/// translation of the result. Rotation is kept.
pub fn semantic_ground_register(
    uav_ground: &PointCloud,
    bing_ground: &PointCloud,
    fp: &Footprint,
    border_width: f64,
    params: &IcpParams,
) -> Result<RigidTransform> {
    uav_ground.require_non_empty()?;
    bing_ground.require_non_empty()?;
    let uav_border = border_subset(uav_ground, fp, border_width);
    let bing_border = border_subset(bing_ground, fp, border_width);
    if uav_border.is_empty() || bing_border.is_empty() {
        return Err(Error::EmptyBorder);
    }
    let (mut t, _) = icp(&uav_border, &bing_border, &RigidTransform::identity(), params)?;
    t.translation.x = 0.0;
    t.translation.y = 0.0;
    Ok(t)
}

fn default_boundary_buffer() -> f64 {
    20.0
}
fn default_footprint_cell() -> f64 {
    5.0
}
fn default_border_width() -> f64 {
    15.0
}
fn default_semantic() -> bool {
    true
}
fn pass1_params() -> IcpParams {
    IcpParams::default()
}
fn pass2_params() -> IcpParams {
    IcpParams {
        max_correspondence_dist: 2.0,
        ..IcpParams::default()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct FusionOptions {
    pub icp_pass1: IcpParams,
    pub icp_pass2: IcpParams,
    /// Boundary buffer for the overlap crop between passes, meters.
    pub boundary_buffer: f64,
    pub footprint_cell: f64,
    /// Enables the semantic ground-border refinement stage.
    pub semantic: bool,
    pub border_width: f64,
    /// Run pass one against the pre-cropped overlap instead of full clouds.
    pub precrop_pass1: bool,
    pub ground: GroundParams,
}

impl Default for FusionOptions {
    fn default() -> Self {
        FusionOptions {
            icp_pass1: pass1_params(),
            icp_pass2: pass2_params(),
            boundary_buffer: default_boundary_buffer(),
            footprint_cell: default_footprint_cell(),
            semantic: default_semantic(),
            border_width: default_border_width(),
            precrop_pass1: false,
            ground: GroundParams::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FusionDiagnostics {
    pub coarse: RigidTransform,
    pub pass1: RigidTransform,
    pub pass2: RigidTransform,
    pub ground_stage: Option<RigidTransform>,
    pub pass1_rms: f64,
    pub pass2_rms: f64,
    pub ground_rms: Option<f64>,
    /// Mean |dz| on the ground border before / after the ground stage.
    pub border_dz_before: Option<f64>,
    pub border_dz_after: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct FusionResult {
    /// Final transform mapping UAV points into the Bing frame.
    pub transform: RigidTransform,
    /// Bing cloud with the UAV-covered region removed.
    pub trimmed_bing: PointCloud,
    pub diagnostics: FusionDiagnostics,
}

fn ground_ids_or_extract(
    cloud: &PointCloud,
    provided: Option<&[usize]>,
    params: &GroundParams,
) -> Result<Vec<usize>> {
    match provided {
        Some(ids) => Ok(ids.to_vec()),
        None => match cloud.labels.as_ref() {
            Some(labels) => Ok((0..cloud.len())
                .filter(|&i| labels[i] == ClassLabel::Ground)
                .collect()),
            None => extract_ground(cloud, params),
        },
    }
}

/// Mean |dz| between UAV ground border points and their 2D-nearest Bing
/// ground border point. None when either border strip is empty.
fn border_gap(
    uav_ground: &PointCloud,
    bing_ground: &PointCloud,
    fp: &Footprint,
    border_width: f64,
) -> Option<f64> {
    let ub = border_subset(uav_ground, fp, border_width);
    let bb = border_subset(bing_ground, fp, border_width);
    if ub.is_empty() || bb.is_empty() {
        return None;
    }
    let index = SpatialIndex::from_cloud(&bb).ok()?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for p in &ub.points {
        if let Some((j, _)) = index.nearest(p.pos(), 5.0, Dims::Two) {
            sum += (p.z - bb.points[j].z).abs();
            n += 1;
        }
    }
    if n == 0 {
        None
    } else {
        Some(sum / n as f64)
    }
}

/// The full fusion workflow: coarse alignment, two ICP passes with an
/// overlap crop in between, optional ground-border refinement, and overlap
/// removal. A failing ground stage degrades to the two-pass result with a
/// warning.
pub fn fuse(
    uav: &PointCloud,
    bing: &PointCloud,
    ground_labels: Option<(&[usize], &[usize])>,
    opts: &FusionOptions,
) -> Result<FusionResult> {
    uav.require_non_empty()?;
    bing.require_non_empty()?;
    let mut warnings = Vec::new();

    let coarse = coarse_align(uav, bing)?;

    let pass1_target = if opts.precrop_pass1 {
        let moved = apply_transform(uav, &coarse);
        let fp = compute_footprint(&moved, opts.footprint_cell)?;
        let cropped = crop_overlap(bing, &fp, opts.boundary_buffer);
        if cropped.is_empty() {
            warnings.push("pre-crop produced an empty overlap; using the full cloud".into());
            bing.clone()
        } else {
            cropped
        }
    } else {
        bing.clone()
    };
    let (t1, stats1) = icp(uav, &pass1_target, &coarse, &opts.icp_pass1)?;

    let uav1 = apply_transform(uav, &t1);
    let fp1 = compute_footprint(&uav1, opts.footprint_cell)?;
    let cropped = crop_overlap(bing, &fp1, opts.boundary_buffer);
    if cropped.is_empty() {
        warnings.push("overlap crop is empty; the clouds may be disjoint".into());
    }
    let pass2_target = if cropped.is_empty() { bing.clone() } else { cropped };
    let (t2, stats2) = icp(uav, &pass2_target, &t1, &opts.icp_pass2)?;

    let uav2 = apply_transform(uav, &t2);
    let fp2 = compute_footprint(&uav2, opts.footprint_cell)?;

    let mut ground_stage = None;
    let mut ground_rms = None;
    let mut border_before = None;
    let mut border_after = None;
    let mut final_t = t2.clone();
    if opts.semantic {
        let stage = (|| -> Result<(RigidTransform, f64, Option<f64>, Option<f64>)> {
            let uav_gids = ground_ids_or_extract(uav, ground_labels.map(|g| g.0), &opts.ground)?;
            let bing_gids = ground_ids_or_extract(bing, ground_labels.map(|g| g.1), &opts.ground)?;
            if uav_gids.is_empty() || bing_gids.is_empty() {
                return Err(Error::EmptyBorder);
            }
            let uav_ground = apply_transform(&uav.subset(&uav_gids), &t2);
            let bing_ground = bing.subset(&bing_gids);
            let before = border_gap(&uav_ground, &bing_ground, &fp2, opts.border_width);
            let g = semantic_ground_register(
                &uav_ground,
                &bing_ground,
                &fp2,
                opts.border_width,
                &opts.icp_pass2,
            )?;
            let refined = apply_transform(&uav_ground, &g);
            let after = border_gap(&refined, &bing_ground, &fp2, opts.border_width);
            let rms = {
                // report the remaining border misfit as the stage RMS
                after.unwrap_or(f64::NAN)
            };
            Ok((g, rms, before, after))
        })();
        match stage {
            Ok((g, rms, before, after)) => {
                final_t = g.compose(&t2);
                ground_stage = Some(g);
                ground_rms = Some(rms);
                border_before = before;
                border_after = after;
            }
            Err(e) => warnings.push(format!("ground stage skipped: {e}")),
        }
    }

    let uav_final = apply_transform(uav, &final_t);
    let fp_final = compute_footprint(&uav_final, opts.footprint_cell)?;
    let trimmed_bing = remove_overlap(bing, &fp_final);

    Ok(FusionResult {
        transform: final_t,
        trimmed_bing,
        diagnostics: FusionDiagnostics {
            coarse,
            pass1: t1,
            pass2: t2,
            ground_stage,
            pass1_rms: stats1.final_rms,
            pass2_rms: stats2.final_rms,
            ground_rms,
            border_dz_before: border_before,
            border_dz_after: border_after,
            warnings,
        },
    })
}

/// Renders the final transform as 16 row-major values, one row per line.
pub fn render_transform(t: &RigidTransform) -> String {
    let m = t.to_matrix4();
    let mut s = String::new();
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| format!("{}", m[(i, j)])).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// Structured diagnostics report, one `key value` pair per line.
pub fn render_diagnostics(d: &FusionDiagnostics) -> String {
    let mut s = String::new();
    s.push_str(&format!("pass1_rms {}\n", d.pass1_rms));
    s.push_str(&format!("pass2_rms {}\n", d.pass2_rms));
    if let Some(g) = d.ground_rms {
        s.push_str(&format!("ground_rms {g}\n"));
    }
    if let Some(v) = d.border_dz_before {
        s.push_str(&format!("border_dz_before {v}\n"));
    }
    if let Some(v) = d.border_dz_after {
        s.push_str(&format!("border_dz_after {v}\n"));
    }
    for w in &d.warnings {
        s.push_str(&format!("warning {w}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(x: f64, y: f64, z: f64) -> Point {
        Point::new(x, y, z, 100, 100, 100)
    }

    fn random_cloud(n: usize, extent: f64, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointCloud::new(
            (0..n)
                .map(|_| {
                    pt(
                        rng.gen_range(0.0..extent),
                        rng.gen_range(0.0..extent),
                        rng.gen_range(0.0..extent / 10.0),
                    )
                })
                .collect(),
        )
    }

    #[test]
    fn coarse_align_is_origin_difference() {
        let mut a = random_cloud(10, 10.0, 1);
        let mut b = random_cloud(10, 10.0, 2);
        a.geo_origin = [600100.0, 4000050.0, 0.0];
        a.crs_tag = "utm17n".into();
        b.geo_origin = [600000.0, 4000000.0, 0.0];
        b.crs_tag = "utm17n".into();
        let t = coarse_align(&a, &b).unwrap();
        assert_eq!(t.translation, Vector3::new(100.0, 50.0, 0.0));
        assert_eq!(t.rotation, Matrix3::identity());
    }

    #[test]
    fn coarse_align_identical_origins_is_identity() {
        let mut a = random_cloud(5, 10.0, 3);
        let mut b = random_cloud(5, 10.0, 4);
        for c in [&mut a, &mut b] {
            c.geo_origin = [1.0, 2.0, 3.0];
            c.crs_tag = "utm10n".into();
        }
        let t = coarse_align(&a, &b).unwrap();
        assert_eq!(t.translation, Vector3::zeros());
    }

    #[test]
    fn coarse_align_rejects_crs_mismatch() {
        let mut a = random_cloud(5, 10.0, 5);
        let mut b = random_cloud(5, 10.0, 6);
        a.crs_tag = "utm17n".into();
        a.geo_origin = [1.0, 0.0, 0.0];
        b.crs_tag = "local".into();
        assert!(matches!(
            coarse_align(&a, &b),
            Err(Error::MissingGeoreference)
        ));
        b.crs_tag = "utm10n".into();
        assert!(matches!(coarse_align(&a, &b), Err(Error::CrsMismatch(_, _))));
    }

    #[test]
    fn estimate_identity_on_identical_pairs() {
        let pairs: Vec<([f64; 3], [f64; 3])> = (0..5)
            .map(|i| {
                let p = [i as f64, (i * i) as f64 * 0.1, 1.0];
                (p, p)
            })
            .collect();
        let t = estimate_rigid_transform(&pairs).unwrap();
        assert!((t.rotation - Matrix3::identity()).norm() < 1e-12);
        assert!(t.translation.norm() < 1e-12);
    }

    #[test]
    fn estimate_recovers_known_transform() {
        let known = RigidTransform::translation([1.0, 2.0, 0.5])
            .compose(&RigidTransform::yaw(5.0_f64.to_radians()));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pairs: Vec<([f64; 3], [f64; 3])> = (0..50)
            .map(|_| {
                let p = [
                    rng.gen_range(-10.0..10.0),
                    rng.gen_range(-10.0..10.0),
                    rng.gen_range(-2.0..2.0),
                ];
                (p, known.apply(p))
            })
            .collect();
        let t = estimate_rigid_transform(&pairs).unwrap();
        assert!((t.rotation - known.rotation).norm() < 1e-9);
        assert!((t.translation - known.translation).norm() < 1e-9);
    }

    #[test]
    fn estimate_never_returns_reflection() {
        // Near-planar correspondences built with a mirrored target.
        let mut pairs = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                let p = [i as f64, j as f64, 0.001 * (i + j) as f64];
                let q = [p[0], p[1], -p[2]]; // mirror in z
                pairs.push((p, q));
            }
        }
        let t = estimate_rigid_transform(&pairs).unwrap();
        assert!((t.rotation.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn estimate_rejects_collinear() {
        let pairs: Vec<([f64; 3], [f64; 3])> = (0..10)
            .map(|i| ([i as f64, 0.0, 0.0], [i as f64, 1.0, 0.0]))
            .collect();
        assert!(matches!(
            estimate_rigid_transform(&pairs),
            Err(Error::DegenerateCorrespondences)
        ));
    }

    #[test]
    fn icp_identity_on_equal_clouds() {
        let cloud = random_cloud(500, 30.0, 9);
        let (t, stats) = icp(&cloud, &cloud, &RigidTransform::identity(), &IcpParams::default())
            .unwrap();
        assert!(t.translation.norm() < 1e-9);
        assert!((t.rotation - Matrix3::identity()).norm() < 1e-9);
        assert_eq!(stats.iterations, 1);
        assert!(stats.final_rms < 1e-9);
    }

    #[test]
    fn icp_rejects_disjoint_clouds() {
        let a = random_cloud(100, 10.0, 10);
        let mut b = random_cloud(100, 10.0, 11);
        for p in &mut b.points {
            p.x += 1000.0;
        }
        assert!(matches!(
            icp(&a, &b, &RigidTransform::identity(), &IcpParams::default()),
            Err(Error::NoCorrespondences)
        ));
    }

    #[test]
    fn footprint_of_uniform_block() {
        let mut pts = Vec::new();
        for i in 0..100 {
            for j in 0..100 {
                pts.push(pt(i as f64 + 0.5, j as f64 + 0.5, 0.0));
            }
        }
        let cloud = PointCloud::new(pts);
        let fp = compute_footprint(&cloud, 5.0).unwrap();
        assert_eq!(fp.occupied.len(), 400);
        // Interior cells are not boundary; the ring of edge cells is.
        assert_eq!(fp.boundary.len(), 4 * 20 - 4);
    }

    #[test]
    fn single_point_footprint_is_boundary() {
        let cloud = PointCloud::new(vec![pt(1.0, 1.0, 0.0)]);
        let fp = compute_footprint(&cloud, 5.0).unwrap();
        assert_eq!(fp.occupied.len(), 1);
        assert_eq!(fp.boundary.len(), 1);
    }

    #[test]
    fn crop_and_remove_partition_cloud() {
        let bing = random_cloud(2000, 100.0, 12);
        let uav = random_cloud(500, 40.0, 13);
        let fp = compute_footprint(&uav, 5.0).unwrap();
        let kept = crop_overlap(&bing, &fp, 0.0);
        let removed = remove_overlap(&bing, &fp);
        assert_eq!(kept.len() + removed.len(), bing.len());
        for p in &kept.points {
            assert!(fp.covers(p.x, p.y));
        }
        for p in &removed.points {
            assert!(!fp.covers(p.x, p.y));
        }
    }

    #[test]
    fn crop_with_buffer_dilates() {
        let uav = PointCloud::new(vec![pt(2.5, 2.5, 0.0)]);
        let fp = compute_footprint(&uav, 5.0).unwrap();
        let bing = PointCloud::new(vec![pt(22.0, 2.5, 0.0), pt(30.0, 2.5, 0.0)]);
        // buffer 20 at cell 5 dilates by 4 cells: x < 25 is inside.
        let kept = crop_overlap(&bing, &fp, 20.0);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept.points[0].x, 22.0);
    }

    #[test]
    fn ground_register_zeroes_xy_translation() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let ground = PointCloud::new(
            (0..4000)
                .map(|_| {
                    pt(
                        rng.gen_range(0.0..60.0),
                        rng.gen_range(0.0..60.0),
                        rng.gen_range(-0.02..0.02),
                    )
                })
                .collect(),
        );
        let shifted = apply_transform(&ground, &RigidTransform::translation([5.0, 5.0, 0.4]));
        let fp = compute_footprint(&shifted, 5.0).unwrap();
        let t = semantic_ground_register(&ground, &shifted, &fp, 15.0, &IcpParams::default())
            .unwrap();
        assert_eq!(t.translation.x, 0.0);
        assert_eq!(t.translation.y, 0.0);
        assert!((t.translation.z - 0.4).abs() < 0.05, "z = {}", t.translation.z);
        assert!(t.rotation_angle().to_degrees() < 0.5);
    }

    #[test]
    fn identical_borders_give_identity() {
        let ground = random_cloud(2000, 50.0, 15);
        let fp = compute_footprint(&ground, 5.0).unwrap();
        let t = semantic_ground_register(&ground, &ground, &fp, 15.0, &IcpParams::default())
            .unwrap();
        assert_eq!(t.translation.x, 0.0);
        assert_eq!(t.translation.y, 0.0);
        assert!(t.translation.z.abs() < 1e-9);
    }
}
