//! Angles, areas and volumes of single simplices.

use super::{MeshError, Vec3};

/// Angle between two vectors in `[0, π]`.
///
/// Uses `atan2(|u×v|, u·v)`, which stays accurate near `0` and `π` where
/// `acos` of the normalised dot product loses half its digits.
pub fn angle_between(u: &Vec3, v: &Vec3) -> f64 {
    u.cross(v).norm().atan2(u.dot(v))
}

/// `½|(b−a)×(c−a)|`.
pub fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Area as `¼ Σ cot α_i |v_{i+1} − v_{i−1}|²`.
///
/// Degenerate triangles return 0.
pub fn triangle_area_cot(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let p = [a, b, c];
    if triangle_area(a, b, c) == 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..3 {
        let prev = p[(i + 2) % 3];
        let next = p[(i + 1) % 3];
        let u = next - p[i];
        let w = prev - p[i];
        let cot = u.dot(&w) / u.cross(&w).norm();
        sum += cot * (next - prev).norm_squared();
    }
    0.25 * sum
}

/// Interior angle of triangle `tri` at corner `at` (0, 1 or 2).
pub fn vertex_angle(tri: &[Vec3; 3], at: usize) -> Result<f64, MeshError> {
    if at > 2 {
        return Err(MeshError::InvalidParameter(format!(
            "corner index {at} out of range"
        )));
    }
    let u = tri[(at + 1) % 3] - tri[at];
    let w = tri[(at + 2) % 3] - tri[at];
    let scale = u.norm_squared().max(w.norm_squared());
    if u.cross(&w).norm() <= super::DEGENERATE_AREA_RATIO * scale {
        return Err(MeshError::DegenerateTriangle);
    }
    Ok(angle_between(&u, &w))
}

/// `det[b−a, c−a, d−a] / 6`.
pub fn signed_tet_volume(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    (b - a).dot(&(c - a).cross(&(d - a))) / 6.0
}

/// Unsigned tetrahedron volume.
pub fn tet_volume(p: &[Vec3; 4]) -> f64 {
    signed_tet_volume(&p[0], &p[1], &p[2], &p[3]).abs()
}

/// Angle between the half-planes bounded by line `ab` that contain `k` and
/// `l` respectively. Coplanar points on opposite sides give `π`.
pub fn dihedral_between(a: &Vec3, b: &Vec3, k: &Vec3, l: &Vec3) -> f64 {
    let e = (b - a).normalize();
    let u = (k - a) - e * (k - a).dot(&e);
    let w = (l - a) - e * (l - a).dot(&e);
    angle_between(&u, &w)
}

/// Outward area vector of the face of tet `p` opposite corner `corner`.
/// Its length is the face area.
pub fn outward_area_vector(p: &[Vec3; 4], corner: usize) -> Vec3 {
    let f = [(corner + 1) % 4, (corner + 2) % 4, (corner + 3) % 4];
    let n = 0.5 * (p[f[1]] - p[f[0]]).cross(&(p[f[2]] - p[f[0]]));
    if n.dot(&(p[f[0]] - p[corner])) < 0.0 {
        -n
    } else {
        n
    }
}
