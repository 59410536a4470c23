//! Uniform-grid spatial index with 2D and 3D radius / nearest queries.
//!
//! A hash grid is sufficient here: query radii are known up front (density
//! uses a 3 m sphere, roof expansion a 3 m disk, ICP a correspondence
//! cutoff), and a grid keeps results trivially exact. Query results are
//! sorted by point id so every caller sees a deterministic order.

use std::collections::HashMap;

use crate::cloud::PointCloud;
use crate::error::Result;

/// Whether a query measures distance in the x-y plane or in full 3D.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dims {
    Two,
    Three,
}

/// Immutable spatial index over a fixed point set.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    pts: Vec<[f64; 3]>,
    cell: f64,
    grid: HashMap<(i64, i64, i64), Vec<u32>>,
    z_cells: (i64, i64),
}

impl SpatialIndex {
    pub fn from_cloud(cloud: &PointCloud) -> Result<Self> {
        cloud.require_non_empty()?;
        Ok(Self::from_points(
            cloud.points.iter().map(|p| p.pos()).collect(),
        ))
    }

    pub fn from_points(pts: Vec<[f64; 3]>) -> Self {
        assert!(!pts.is_empty());
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &pts {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        // Aim for a handful of points per cell.
        let volume: f64 = (0..3).map(|a| (hi[a] - lo[a]).max(1e-3)).product();
        let cell = (volume / pts.len() as f64).cbrt().clamp(0.25, 10.0);

        let mut grid: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
        for (i, p) in pts.iter().enumerate() {
            grid.entry(Self::key(p, cell)).or_default().push(i as u32);
        }
        let z_cells = (
            (lo[2] / cell).floor() as i64,
            (hi[2] / cell).floor() as i64,
        );
        SpatialIndex {
            pts,
            cell,
            grid,
            z_cells,
        }
    }

    fn key(p: &[f64; 3], cell: f64) -> (i64, i64, i64) {
        (
            (p[0] / cell).floor() as i64,
            (p[1] / cell).floor() as i64,
            (p[2] / cell).floor() as i64,
        )
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn point(&self, id: usize) -> [f64; 3] {
        self.pts[id]
    }

    fn dist2(&self, id: usize, q: &[f64; 3], dims: Dims) -> f64 {
        let p = &self.pts[id];
        let dx = p[0] - q[0];
        let dy = p[1] - q[1];
        let mut d2 = dx * dx + dy * dy;
        if dims == Dims::Three {
            let dz = p[2] - q[2];
            d2 += dz * dz;
        }
        d2
    }

    /// Ids of all indexed points with distance <= `r` to `q`.
    pub fn radius_neighbors(&self, q: [f64; 3], r: f64, dims: Dims) -> Vec<usize> {
        self.radius_impl(q, r, dims, None)
    }

    /// Same as [`radius_neighbors`](Self::radius_neighbors) but excludes the
    /// indexed point `id` itself; used when the query point is a member.
    pub fn radius_neighbors_of(&self, id: usize, r: f64, dims: Dims) -> Vec<usize> {
        self.radius_impl(self.pts[id], r, dims, Some(id))
    }

    fn radius_impl(&self, q: [f64; 3], r: f64, dims: Dims, exclude: Option<usize>) -> Vec<usize> {
        assert!(r > 0.0, "radius must be positive");
        let r2 = r * r;
        let span = (r / self.cell).ceil() as i64;
        let (cx, cy, cz) = Self::key(&q, self.cell);
        let (z0, z1) = match dims {
            Dims::Three => (cz - span, cz + span),
            Dims::Two => self.z_cells,
        };
        let mut out = Vec::new();
        for ix in cx - span..=cx + span {
            for iy in cy - span..=cy + span {
                for iz in z0..=z1 {
                    if let Some(ids) = self.grid.get(&(ix, iy, iz)) {
                        for &id in ids {
                            let id = id as usize;
                            if Some(id) != exclude && self.dist2(id, &q, dims) <= r2 {
                                out.push(id);
                            }
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Nearest indexed point to `q` within `max_dist`, with its distance.
    /// Ties are broken by the smaller id.
    pub fn nearest(&self, q: [f64; 3], max_dist: f64, dims: Dims) -> Option<(usize, f64)> {
        assert!(max_dist > 0.0);
        let (cx, cy, cz) = Self::key(&q, self.cell);
        let max_ring = (max_dist / self.cell).ceil() as i64 + 1;
        let mut best: Option<(usize, f64)> = None;
        for ring in 0..=max_ring {
            // Any point in a farther ring is at least (ring - 1) cells away.
            if let Some((_, d)) = best {
                if d <= (ring - 1).max(0) as f64 * self.cell {
                    break;
                }
            }
            self.scan_ring(cx, cy, cz, ring, dims, |id| {
                let d2 = self.dist2(id, &q, dims);
                let d = d2.sqrt();
                if d <= max_dist {
                    match best {
                        Some((bid, bd)) if d > bd || (d == bd && id >= bid) => {}
                        _ => best = Some((id, d)),
                    }
                }
            });
        }
        best
    }

    fn scan_ring<F: FnMut(usize)>(
        &self,
        cx: i64,
        cy: i64,
        cz: i64,
        ring: i64,
        dims: Dims,
        mut f: F,
    ) {
        let (z0, z1) = match dims {
            Dims::Three => (cz - ring, cz + ring),
            Dims::Two => self.z_cells,
        };
        for ix in cx - ring..=cx + ring {
            for iy in cy - ring..=cy + ring {
                let on_xy_ring = (ix - cx).abs() == ring || (iy - cy).abs() == ring;
                for iz in z0..=z1 {
                    let on_ring = match dims {
                        Dims::Three => on_xy_ring || (iz - cz).abs() == ring,
                        Dims::Two => on_xy_ring || ring == 0,
                    };
                    if !on_ring {
                        continue;
                    }
                    if let Some(ids) = self.grid.get(&(ix, iy, iz)) {
                        for &id in ids {
                            f(id as usize);
                        }
                    }
                }
            }
        }
    }

    /// The k nearest indexed points to `q`, closest first.
    pub fn k_nearest(&self, q: [f64; 3], k: usize, dims: Dims) -> Vec<(usize, f64)> {
        if k == 0 {
            return Vec::new();
        }
        let mut r = self.cell;
        loop {
            let ids = self.radius_impl(q, r, dims, None);
            if ids.len() >= k.min(self.pts.len()) || r > 4.0 * self.diameter() {
                let mut with_d: Vec<(usize, f64)> = ids
                    .into_iter()
                    .map(|id| (id, self.dist2(id, &q, dims).sqrt()))
                    .collect();
                with_d.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
                with_d.truncate(k);
                return with_d;
            }
            r *= 2.0;
        }
    }

    fn diameter(&self) -> f64 {
        let n = self.grid.len() as f64;
        (n.cbrt() + 2.0) * self.cell * 3.0
    }
}

/// Builds a spatial index over a cloud; errors on an empty cloud.
pub fn build_spatial_index(cloud: &PointCloud) -> Result<SpatialIndex> {
    SpatialIndex::from_cloud(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_radius(pts: &[[f64; 3]], q: [f64; 3], r: f64, dims: Dims) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, p) in pts.iter().enumerate() {
            let dx = p[0] - q[0];
            let dy = p[1] - q[1];
            let mut d2 = dx * dx + dy * dy;
            if dims == Dims::Three {
                let dz = p[2] - q[2];
                d2 += dz * dz;
            }
            if d2 <= r * r {
                out.push(i);
            }
        }
        out
    }

    #[test]
    fn single_point_index() {
        let cloud = PointCloud::new(vec![Point::new(1.0, 2.0, 3.0, 0, 0, 0)]);
        let idx = build_spatial_index(&cloud).unwrap();
        assert_eq!(idx.len(), 1);
        assert!(idx.radius_neighbors_of(0, 3.0, Dims::Three).is_empty());
    }

    #[test]
    fn empty_cloud_rejected() {
        assert!(build_spatial_index(&PointCloud::new(vec![])).is_err());
    }

    #[test]
    fn two_d_query_ignores_z() {
        let pts = vec![
            Point::new(0.0, 0.0, 0.0, 0, 0, 0),
            Point::new(1.0, 0.0, 100.0, 0, 0, 0),
        ];
        let idx = build_spatial_index(&PointCloud::new(pts)).unwrap();
        assert_eq!(idx.radius_neighbors_of(0, 3.0, Dims::Two), vec![1]);
        assert!(idx.radius_neighbors_of(0, 3.0, Dims::Three).is_empty());
    }

    #[test]
    fn radius_three_d_basic() {
        let pts = vec![
            Point::new(0.0, 0.0, 0.0, 0, 0, 0),
            Point::new(1.0, 0.0, 0.0, 0, 0, 0),
            Point::new(5.0, 0.0, 0.0, 0, 0, 0),
        ];
        let idx = build_spatial_index(&PointCloud::new(pts)).unwrap();
        assert_eq!(idx.radius_neighbors_of(0, 3.0, Dims::Three), vec![1]);
    }

    #[test]
    fn parity_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<[f64; 3]> = (0..1000)
            .map(|_| {
                [
                    rng.gen_range(0.0..30.0),
                    rng.gen_range(0.0..30.0),
                    rng.gen_range(0.0..10.0),
                ]
            })
            .collect();
        let idx = SpatialIndex::from_points(pts.clone());
        for r in [0.5, 3.0] {
            for dims in [Dims::Two, Dims::Three] {
                for qi in (0..pts.len()).step_by(37) {
                    let got = idx.radius_neighbors(pts[qi], r, dims);
                    let want = brute_radius(&pts, pts[qi], r, dims);
                    assert_eq!(got, want, "r={r} dims={dims:?} qi={qi}");
                }
            }
        }
    }

    #[test]
    fn nearest_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<[f64; 3]> = (0..500)
            .map(|_| {
                [
                    rng.gen_range(0.0..20.0),
                    rng.gen_range(0.0..20.0),
                    rng.gen_range(0.0..20.0),
                ]
            })
            .collect();
        let idx = SpatialIndex::from_points(pts.clone());
        for _ in 0..100 {
            let q = [
                rng.gen_range(-5.0..25.0),
                rng.gen_range(-5.0..25.0),
                rng.gen_range(-5.0..25.0),
            ];
            let got = idx.nearest(q, 50.0, Dims::Three);
            let want = pts
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2))
                        .sqrt();
                    (i, d)
                })
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            let (gi, gd) = got.unwrap();
            assert_eq!(gi, want.0);
            assert!((gd - want.1).abs() < 1e-12);
        }
    }

    #[test]
    fn rebuilt_index_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<[f64; 3]> = (0..300)
            .map(|_| {
                [
                    rng.gen_range(0.0..10.0),
                    rng.gen_range(0.0..10.0),
                    rng.gen_range(0.0..10.0),
                ]
            })
            .collect();
        let a = SpatialIndex::from_points(pts.clone());
        let b = SpatialIndex::from_points(pts.clone());
        for qi in 0..pts.len() {
            assert_eq!(
                a.radius_neighbors_of(qi, 2.0, Dims::Three),
                b.radius_neighbors_of(qi, 2.0, Dims::Three)
            );
        }
    }

    #[test]
    fn k_nearest_returns_sorted() {
        let pts: Vec<[f64; 3]> = (0..10).map(|i| [i as f64, 0.0, 0.0]).collect();
        let idx = SpatialIndex::from_points(pts);
        let knn = idx.k_nearest([0.1, 0.0, 0.0], 3, Dims::Three);
        assert_eq!(knn.iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 1, 2]);
    }
}
