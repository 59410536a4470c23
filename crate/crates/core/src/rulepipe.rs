//! Rule-based annotation: staged roof extraction, roof-to-building
//! expansion, and full three-class labeling.
//!
//! The roof chain runs blue -> verticality -> roughness -> density ->
//! connected components. All threshold comparisons are strict, so a point
//! sitting exactly on a threshold survives its stage. Verticality and
//! roughness are computed on the blue-stage survivors; the density stage
//! counts neighbors among its own survivors.

use serde::{Deserialize, Serialize};

use crate::cloud::{ClassLabel, PointCloud};
use crate::components::connected_components;
use crate::error::{Error, Result};
use crate::features::{compute_features, FeatureParams, FeatureSet};
use crate::spatial::{Dims, SpatialIndex};

fn d_blue_max() -> u8 {
    60
}
fn d_verticality_max() -> f64 {
    0.5
}
fn d_roughness_max() -> f64 {
    0.3
}
fn d_density_min() -> usize {
    60
}
fn d_density_radius() -> f64 {
    3.0
}
fn d_cc_link() -> f64 {
    1.0
}
fn d_cc_min_points() -> usize {
    100
}
fn d_expand_radius_2d() -> f64 {
    3.0
}

/// Thresholds of the roof-extraction chain.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RuleConfig {
    /// Points with blue channel strictly below this are removed.
    pub blue_max: u8,
    /// Points with verticality strictly above this are removed.
    pub verticality_max: f64,
    /// Points with roughness strictly above this are removed.
    pub roughness_max: f64,
    /// Points with strictly fewer neighbors than this are removed.
    pub density_min: usize,
    /// Radius of the density neighbor count, meters.
    pub density_radius: f64,
    /// Connected-component linking distance, meters.
    pub cc_link: f64,
    /// Components smaller than this are removed.
    pub cc_min_points: usize,
    /// 2D radius of the roof-to-building expansion, meters.
    pub expand_radius_2d: f64,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            blue_max: d_blue_max(),
            verticality_max: d_verticality_max(),
            roughness_max: d_roughness_max(),
            density_min: d_density_min(),
            density_radius: d_density_radius(),
            cc_link: d_cc_link(),
            cc_min_points: d_cc_min_points(),
            expand_radius_2d: d_expand_radius_2d(),
        }
    }
}

impl RuleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.density_radius <= 0.0 || self.cc_link <= 0.0 || self.expand_radius_2d <= 0.0 {
            return Err(Error::Config("rule radii must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.verticality_max) || !(0.0..=1.0).contains(&self.roughness_max)
        {
            return Err(Error::Config(
                "verticality_max and roughness_max must lie in [0, 1]".into(),
            ));
        }
        if self.density_min < 1 || self.cc_min_points < 1 {
            return Err(Error::Config("counts must be >= 1".into()));
        }
        Ok(())
    }
}

/// One stage of the roof-extraction chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Blue,
    Verticality,
    Roughness,
    Density,
    Components,
}

impl Stage {
    pub fn full_chain() -> &'static [Stage] {
        &[
            Stage::Blue,
            Stage::Verticality,
            Stage::Roughness,
            Stage::Density,
            Stage::Components,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Blue => "blue",
            Stage::Verticality => "verticality",
            Stage::Roughness => "roughness",
            Stage::Density => "density",
            Stage::Components => "components",
        }
    }
}

#[derive(Debug, Clone)]
pub struct StageRecord {
    pub stage: Stage,
    pub input: usize,
    pub removed: usize,
    pub surviving: Vec<usize>,
}

/// Audit trail of the roof-extraction chain; counts telescope exactly.
#[derive(Debug, Clone, Default)]
pub struct StageTrace {
    pub records: Vec<StageRecord>,
}

impl StageTrace {
    fn push(&mut self, stage: Stage, input: &[usize], surviving: Vec<usize>) {
        self.records.push(StageRecord {
            stage,
            input: input.len(),
            removed: input.len() - surviving.len(),
            surviving,
        });
    }

    /// One line per stage: name, in, removed, out.
    pub fn render(&self) -> String {
        let mut s = String::from("stage        in       removed  out\n");
        for r in &self.records {
            s.push_str(&format!(
                "{:<12} {:<8} {:<8} {}\n",
                r.stage.name(),
                r.input,
                r.removed,
                r.surviving.len()
            ));
        }
        s
    }

    pub fn telescopes(&self) -> bool {
        self.records.windows(2).all(|w| {
            w[0].surviving.len() == w[1].input
        }) && self
            .records
            .iter()
            .all(|r| r.input - r.removed == r.surviving.len())
    }
}

/// Survivors of the blue filter: keep points with blue >= `blue_max`.
pub fn blue_survivors(cloud: &PointCloud, ids: &[usize], blue_max: u8) -> Vec<usize> {
    ids.iter()
        .copied()
        .filter(|&i| cloud.points[i].b >= blue_max)
        .collect()
}

/// Keep points with verticality <= `max`; invalid points are removed
/// (they cannot evidence a planar roof).
pub fn verticality_survivors(features: &FeatureSet, ids: &[usize], max: f64) -> Vec<usize> {
    ids.iter()
        .copied()
        .enumerate()
        .filter(|&(k, _)| {
            let r = features.records[k];
            r.valid && r.verticality <= max
        })
        .map(|(_, id)| id)
        .collect()
}

/// Keep points with roughness <= `max` (invalid already removed upstream).
pub fn roughness_survivors(features: &FeatureSet, ids: &[usize], keep: &[usize], max: f64) -> Vec<usize> {
    // `features` is indexed over `ids`; `keep` is the surviving subset.
    let mut pos = std::collections::HashMap::new();
    for (k, &id) in ids.iter().enumerate() {
        pos.insert(id, k);
    }
    keep.iter()
        .copied()
        .filter(|id| features.records[pos[id]].roughness <= max)
        .collect()
}

/// Keep points with at least `density_min` neighbors within
/// `density_radius`, counted among `ids` only.
pub fn density_survivors(
    cloud: &PointCloud,
    ids: &[usize],
    density_radius: f64,
    density_min: usize,
) -> Vec<usize> {
    if ids.is_empty() {
        return Vec::new();
    }
    let pts: Vec<[f64; 3]> = ids.iter().map(|&i| cloud.points[i].pos()).collect();
    let index = SpatialIndex::from_points(pts);
    ids.iter()
        .copied()
        .enumerate()
        .filter(|&(k, _)| index.radius_neighbors_of(k, density_radius, Dims::Three).len() >= density_min)
        .map(|(_, id)| id)
        .collect()
}

/// Runs the staged roof-extraction chain on the non-ground cloud.
///
/// `stages` must be a prefix of the full chain (or the full chain).
/// Returns the surviving roof ids (possibly empty) and the stage trace.
pub fn extract_roofs(
    non_ground: &PointCloud,
    config: &RuleConfig,
    stages: &[Stage],
    params: &FeatureParams,
) -> Result<(Vec<usize>, StageTrace)> {
    non_ground.require_non_empty()?;
    config.validate()?;
    assert!(
        Stage::full_chain().starts_with(stages),
        "stages must be a prefix of the full chain"
    );

    let mut trace = StageTrace::default();
    let mut survivors: Vec<usize> = (0..non_ground.len()).collect();
    // Verticality/roughness features are shared: both are computed once on
    // the blue-stage survivors.
    let mut vr_features: Option<(Vec<usize>, FeatureSet)> = None;
    for &stage in stages {
        if survivors.is_empty() {
            trace.push(stage, &survivors.clone(), Vec::new());
            continue;
        }
        let next = match stage {
            Stage::Blue => blue_survivors(non_ground, &survivors, config.blue_max),
            Stage::Verticality => {
                let sub = non_ground.subset(&survivors);
                let fs = compute_features(&sub, params)?;
                let out = verticality_survivors(&fs, &survivors, config.verticality_max);
                vr_features = Some((survivors.clone(), fs));
                out
            }
            Stage::Roughness => {
                let (ids, fs) = vr_features
                    .as_ref()
                    .expect("roughness stage requires the verticality stage");
                roughness_survivors(fs, ids, &survivors, config.roughness_max)
            }
            Stage::Density => {
                density_survivors(non_ground, &survivors, config.density_radius, config.density_min)
            }
            Stage::Components => {
                connected_components(non_ground, &survivors, config.cc_link, config.cc_min_points)
                    .surviving
            }
        };
        trace.push(stage, &survivors, next.clone());
        survivors = next;
    }
    Ok((survivors, trace))
}

/// Collects building points around roofs: every point within
/// `expand_radius_2d` (x-y distance) of a roof point and strictly below
/// that roof point joins the building set. Single pass, no transitive
/// closure. The result is a superset of `roof_ids`.
pub fn expand_buildings(
    cloud: &PointCloud,
    roof_ids: &[usize],
    expand_radius_2d: f64,
) -> Result<Vec<usize>> {
    if roof_ids.is_empty() {
        return Err(Error::EmptyRoofSet);
    }
    assert!(expand_radius_2d > 0.0);
    let index = SpatialIndex::from_cloud(cloud)?;
    let mut building = vec![false; cloud.len()];
    for &q in roof_ids {
        building[q] = true;
        let qz = cloud.points[q].z;
        for p in index.radius_neighbors_of(q, expand_radius_2d, Dims::Two) {
            if cloud.points[p].z < qz {
                building[p] = true;
            }
        }
    }
    Ok((0..cloud.len()).filter(|&i| building[i]).collect())
}

/// Outcome of the full annotation workflow.
#[derive(Debug, Clone)]
pub struct Annotation {
    pub cloud: PointCloud,
    pub trace: StageTrace,
    pub warnings: Vec<String>,
}

/// Labels the whole cloud: `ground_ids` become Ground, roof extraction plus
/// expansion over the remaining points yields Building, everything else is
/// Tree. The result is always a total labeling.
pub fn annotate(
    cloud: &PointCloud,
    ground_ids: &[usize],
    config: &RuleConfig,
    params: &FeatureParams,
) -> Result<Annotation> {
    cloud.require_non_empty()?;
    let mut is_ground = vec![false; cloud.len()];
    for &i in ground_ids {
        is_ground[i] = true;
    }
    let non_ground_ids: Vec<usize> = (0..cloud.len()).filter(|&i| !is_ground[i]).collect();

    let mut labels = vec![ClassLabel::Tree; cloud.len()];
    for &i in ground_ids {
        labels[i] = ClassLabel::Ground;
    }

    let mut warnings = Vec::new();
    let mut trace = StageTrace::default();
    if !non_ground_ids.is_empty() {
        let non_ground = cloud.subset(&non_ground_ids);
        let (roofs, t) = extract_roofs(&non_ground, config, Stage::full_chain(), params)?;
        trace = t;
        if roofs.is_empty() {
            warnings.push("roof extraction removed all points; all non-ground labeled tree".into());
        } else {
            let buildings = expand_buildings(&non_ground, &roofs, config.expand_radius_2d)?;
            for local in buildings {
                labels[non_ground_ids[local]] = ClassLabel::Building;
            }
        }
    }

    let mut out = cloud.clone();
    out.labels = Some(labels);
    Ok(Annotation {
        cloud: out,
        trace,
        warnings,
    })
}
