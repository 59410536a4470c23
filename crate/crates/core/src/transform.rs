//! Proper rigid transforms (rotation + translation).

use nalgebra::{Matrix3, Matrix4, Vector3};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

const ORTHONORMALITY_TOL: f64 = 1e-9;

/// A proper rigid transform: `p -> rotation * p + translation`.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn translation(t: [f64; 3]) -> Self {
        RigidTransform {
            rotation: Matrix3::identity(),
            translation: Vector3::new(t[0], t[1], t[2]),
        }
    }

    /// Constructs a transform, verifying the rotation is orthonormal with
    /// determinant +1 within 1e-9.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let t = RigidTransform {
            rotation,
            translation,
        };
        t.check()?;
        Ok(t)
    }

    pub fn check(&self) -> Result<()> {
        let rtr = self.rotation.transpose() * self.rotation;
        let dev = (rtr - Matrix3::identity()).norm();
        if dev > ORTHONORMALITY_TOL * 10.0 {
            return Err(Error::InvalidTransform(format!(
                "rotation not orthonormal (|R'R - I| = {dev:.3e})"
            )));
        }
        let det = self.rotation.determinant();
        if (det - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidTransform(format!(
                "rotation determinant {det} != +1"
            )));
        }
        if !self.translation.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidTransform("non-finite translation".into()));
        }
        Ok(())
    }

    /// Rotation about the z axis by `angle` radians.
    pub fn yaw(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        RigidTransform {
            rotation: Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
            translation: Vector3::zeros(),
        }
    }

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let v = self.rotation * Vector3::new(p[0], p[1], p[2]) + self.translation;
        [v.x, v.y, v.z]
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Row-major 4x4 homogeneous matrix.
    pub fn to_matrix4(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Rotation angle in radians (0 for identity).
    pub fn rotation_angle(&self) -> f64 {
        let tr = self.rotation.trace();
        ((tr - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
    }
}

/// Maps every point of `cloud` through `t`; colors and labels unchanged.
pub fn apply_transform(cloud: &PointCloud, t: &RigidTransform) -> PointCloud {
    let mut out = cloud.clone();
    for p in &mut out.points {
        let [x, y, z] = t.apply([p.x, p.y, p.z]);
        p.x = x;
        p.y = y;
        p.z = z;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Point;
    use proptest::prelude::*;

    #[test]
    fn identity_leaves_cloud_unchanged() {
        let cloud = PointCloud::new(vec![Point::new(1.0, 2.0, 3.0, 9, 9, 9)]);
        let out = apply_transform(&cloud, &RigidTransform::identity());
        assert_eq!(out, cloud);
    }

    #[test]
    fn translation_shifts_coordinates() {
        let cloud = PointCloud::new(vec![Point::new(1.0, 1.0, 1.0, 0, 0, 0)]);
        let out = apply_transform(&cloud, &RigidTransform::translation([1.0, 2.0, 3.0]));
        assert_eq!(out.points[0].pos(), [2.0, 3.0, 4.0]);
    }

    #[test]
    fn yaw_90_deg_rotates_x_to_y() {
        let t = RigidTransform::yaw(std::f64::consts::FRAC_PI_2);
        let p = t.apply([1.0, 0.0, 0.0]);
        assert!((p[0]).abs() < 1e-12);
        assert!((p[1] - 1.0).abs() < 1e-12);
        assert!((p[2]).abs() < 1e-12);
    }

    #[test]
    fn compose_then_inverse_is_identity() {
        let a = RigidTransform::yaw(0.3).compose(&RigidTransform::translation([1.0, -2.0, 0.5]));
        let id = a.compose(&a.inverse());
        assert!((id.rotation - Matrix3::identity()).norm() < 1e-12);
        assert!(id.translation.norm() < 1e-12);
    }

    #[test]
    fn check_rejects_reflection() {
        let mut r = Matrix3::identity();
        r[(2, 2)] = -1.0;
        assert!(RigidTransform::new(r, Vector3::zeros()).is_err());
    }

    proptest! {
        #[test]
        fn preserves_pairwise_distances(
            angle in -3.1f64..3.1,
            tx in -100.0f64..100.0,
            ty in -100.0f64..100.0,
            tz in -100.0f64..100.0,
            pts in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0, -50.0f64..50.0), 2..20),
        ) {
            let cloud = PointCloud::new(
                pts.iter().map(|&(x, y, z)| Point::new(x, y, z, 0, 0, 0)).collect(),
            );
            let t = RigidTransform::translation([tx, ty, tz]).compose(&RigidTransform::yaw(angle));
            let out = apply_transform(&cloud, &t);
            for i in 0..cloud.len() {
                for j in (i + 1)..cloud.len() {
                    let d0 = cloud.points[i].dist(&cloud.points[j]);
                    let d1 = out.points[i].dist(&out.points[j]);
                    prop_assert!((d0 - d1).abs() <= 1e-9 * d0.max(1.0));
                }
            }
        }
    }
}
