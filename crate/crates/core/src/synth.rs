//! Deterministic synthetic scene generator: noisy ground plane, box
//! buildings with flat roofs and vertical walls, ellipsoidal tree crowns.
//! Provides exact truth labels for desk-scale testing, plus an optional
//! bowl-shaped ground warp for fusion experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::{ClassLabel, Point, PointCloud};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SceneSpec {
    /// Scene extent in meters (x, y).
    pub extent: [f64; 2],
    /// Ground z noise amplitude, meters.
    pub ground_noise: f64,
    /// Nominal sampling distance, meters.
    pub point_spacing: f64,
    pub building_count: usize,
    /// Building footprint side range, meters.
    pub footprint_range: [f64; 2],
    /// Building height range, meters.
    pub height_range: [f64; 2],
    pub tree_count: usize,
    /// Crown radius range, meters.
    pub crown_radius_range: [f64; 2],
    /// Relative radial jitter of crown points; makes crowns rough.
    pub crown_jitter: f64,
    /// Depth of the parabolic ground sag at the scene center, meters.
    /// Zero disables the warp.
    pub bowl_depth: f64,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            extent: [100.0, 100.0],
            ground_noise: 0.08,
            point_spacing: 0.35,
            building_count: 2,
            footprint_range: [8.0, 15.0],
            height_range: [5.0, 12.0],
            tree_count: 5,
            crown_radius_range: [1.5, 3.0],
            crown_jitter: 0.3,
            bowl_depth: 0.0,
            seed: 0,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.extent[0] <= 0.0 || self.extent[1] <= 0.0 || self.point_spacing <= 0.0 {
            return Err(Error::Spec("extent and point_spacing must be positive".into()));
        }
        if self.footprint_range[0] > self.footprint_range[1]
            || self.height_range[0] > self.height_range[1]
            || self.crown_radius_range[0] > self.crown_radius_range[1]
        {
            return Err(Error::Spec("range minima must not exceed maxima".into()));
        }
        if self.building_count > 0
            && self.footprint_range[1] + 10.0 > self.extent[0].min(self.extent[1])
        {
            return Err(Error::Spec(
                "buildings do not fit in the extent with clearance".into(),
            ));
        }
        if self.ground_noise < 0.0 || self.crown_jitter < 0.0 || self.bowl_depth < 0.0 {
            return Err(Error::Spec("amplitudes must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl Rect {
    fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    fn dist_xy(&self, x: f64, y: f64) -> f64 {
        let dx = (self.x0 - x).max(0.0).max(x - self.x1);
        let dy = (self.y0 - y).max(0.0).max(y - self.y1);
        (dx * dx + dy * dy).sqrt()
    }

    fn gap(&self, other: &Rect) -> f64 {
        let dx = (other.x0 - self.x1).max(self.x0 - other.x1).max(0.0);
        let dy = (other.y0 - self.y1).max(self.y0 - other.y1).max(0.0);
        (dx * dx + dy * dy).sqrt()
    }
}

/// Generates the scene; identical specs produce bit-identical clouds.
/// Truth labels are attached to the returned cloud.
pub fn generate_synthetic_scene(spec: &SceneSpec) -> Result<PointCloud> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let s = spec.point_spacing;
    let [ex, ey] = spec.extent;

    // Place building footprints with mutual clearance.
    let mut boxes: Vec<(Rect, f64)> = Vec::new();
    for _ in 0..spec.building_count {
        let mut placed = false;
        for _ in 0..1000 {
            let w = rng.gen_range(spec.footprint_range[0]..=spec.footprint_range[1]);
            let d = rng.gen_range(spec.footprint_range[0]..=spec.footprint_range[1]);
            let h = rng.gen_range(spec.height_range[0]..=spec.height_range[1]);
            if w + 10.0 >= ex || d + 10.0 >= ey {
                continue;
            }
            let x0 = rng.gen_range(5.0..ex - w - 5.0);
            let y0 = rng.gen_range(5.0..ey - d - 5.0);
            let rect = Rect {
                x0,
                y0,
                x1: x0 + w,
                y1: y0 + d,
            };
            if boxes.iter().all(|(b, _)| b.gap(&rect) > 8.0) {
                boxes.push((rect, h));
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Spec(
                "could not place buildings without overlap; shrink counts or grow extent".into(),
            ));
        }
    }

    // Tree crown centers keep clear of buildings (crown + expansion slack).
    let mut trees: Vec<(f64, f64, f64, f64)> = Vec::new(); // cx, cy, cz, radius
    for _ in 0..spec.tree_count {
        let mut placed = false;
        for _ in 0..1000 {
            let r = rng.gen_range(spec.crown_radius_range[0]..=spec.crown_radius_range[1]);
            let reach = r * (1.0 + spec.crown_jitter);
            if 2.0 * reach >= ex || 2.0 * reach >= ey {
                continue;
            }
            let cx = rng.gen_range(reach..ex - reach);
            let cy = rng.gen_range(reach..ey - reach);
            let clearance = reach + 4.0;
            let clear_of_boxes = boxes.iter().all(|(b, _)| b.dist_xy(cx, cy) > clearance);
            let clear_of_trees = trees
                .iter()
                .all(|&(tx, ty, _, tr)| ((tx - cx).powi(2) + (ty - cy).powi(2)).sqrt() > tr + r);
            if clear_of_boxes && clear_of_trees {
                let cz = r + rng.gen_range(1.0..3.0);
                trees.push((cx, cy, cz, r));
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Spec(
                "could not place trees without overlap; shrink counts or grow extent".into(),
            ));
        }
    }

    let bowl = |x: f64, y: f64| -> f64 {
        if spec.bowl_depth == 0.0 {
            return 0.0;
        }
        let cx = ex / 2.0;
        let cy = ey / 2.0;
        let rmax = ex.min(ey) / 2.0;
        let d2 = ((x - cx).powi(2) + (y - cy).powi(2)) / (rmax * rmax);
        -spec.bowl_depth * (1.0 - d2.min(1.0))
    };

    let mut points = Vec::new();
    let mut labels = Vec::new();

    // Ground lattice with jitter; cells under buildings are occluded.
    let nx = (ex / s).floor() as usize;
    let ny = (ey / s).floor() as usize;
    for i in 0..=nx {
        for j in 0..=ny {
            let x = (i as f64 * s + rng.gen_range(-0.3 * s..0.3 * s)).clamp(0.0, ex);
            let y = (j as f64 * s + rng.gen_range(-0.3 * s..0.3 * s)).clamp(0.0, ey);
            let z = rng.gen_range(-spec.ground_noise..=spec.ground_noise);
            if boxes.iter().any(|(b, _)| b.contains(x, y)) {
                continue;
            }
            points.push(Point::new(
                x,
                y,
                z + bowl(x, y),
                rng.gen_range(100..=140),
                rng.gen_range(90..=130),
                rng.gen_range(70..=110),
            ));
            labels.push(ClassLabel::Ground);
        }
    }

    // Buildings: flat roof lattice plus four wall lattices.
    for &(b, h) in &boxes {
        let base = bowl((b.x0 + b.x1) / 2.0, (b.y0 + b.y1) / 2.0);
        let gray = |rng: &mut ChaCha8Rng| -> (u8, u8, u8) {
            let v: u8 = rng.gen_range(110..=160);
            (
                v,
                v.saturating_add(rng.gen_range(0..8)),
                v.saturating_add(rng.gen_range(0..8)),
            )
        };
        let (w, d) = (b.x1 - b.x0, b.y1 - b.y0);
        let rx = (w / s).floor() as usize;
        let ry = (d / s).floor() as usize;
        for i in 0..=rx {
            for j in 0..=ry {
                let x = (b.x0 + i as f64 * s + rng.gen_range(-0.3 * s..0.3 * s)).clamp(b.x0, b.x1);
                let y = (b.y0 + j as f64 * s + rng.gen_range(-0.3 * s..0.3 * s)).clamp(b.y0, b.y1);
                let z = base + h + rng.gen_range(-0.05..0.05);
                let (cr, cg, cb) = gray(&mut rng);
                points.push(Point::new(x, y, z, cr, cg, cb));
                labels.push(ClassLabel::Building);
            }
        }
        let nz = (h / s).floor() as usize;
        let mut wall = |rng: &mut ChaCha8Rng, along_x: bool, fixed: f64, lo: f64, hi: f64| {
            let nl = ((hi - lo) / s).floor() as usize;
            for i in 0..=nl {
                for k in 0..nz {
                    let a = (lo + i as f64 * s + rng.gen_range(-0.3 * s..0.3 * s)).clamp(lo, hi);
                    let z = base + (k as f64 * s + rng.gen_range(0.0..0.3 * s)).min(h);
                    let (x, y) = if along_x { (a, fixed) } else { (fixed, a) };
                    let (cr, cg, cb) = gray(rng);
                    points.push(Point::new(x, y, z, cr, cg, cb));
                    labels.push(ClassLabel::Building);
                }
            }
        };
        wall(&mut rng, true, b.y0, b.x0, b.x1);
        wall(&mut rng, true, b.y1, b.x0, b.x1);
        wall(&mut rng, false, b.x0, b.y0, b.y1);
        wall(&mut rng, false, b.x1, b.y0, b.y1);
    }

    // Trees: jittered shells of ellipsoidal crowns (low blue channel).
    for &(cx, cy, cz, r) in &trees {
        let count = ((4.0 * std::f64::consts::PI * r * r) / (s * s)).ceil() as usize;
        let rz = 0.8 * r; // slightly flattened crown
        let base = bowl(cx, cy);
        for _ in 0..count {
            // Uniform direction on the unit sphere.
            let z = rng.gen_range(-1.0..1.0f64);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            let rho = (1.0f64 - z * z).sqrt();
            let dir = [rho * phi.cos(), rho * phi.sin(), z];
            let scale = 1.0 + spec.crown_jitter * rng.gen_range(-1.0..1.0f64);
            points.push(Point::new(
                cx + r * scale * dir[0],
                cy + r * scale * dir[1],
                base + cz + rz * scale * dir[2],
                rng.gen_range(30..=70),
                rng.gen_range(90..=160),
                rng.gen_range(10..=55),
            ));
            labels.push(ClassLabel::Tree);
        }
    }

    Ok(PointCloud::with_labels(points, labels))
}
