//! Discrete mean curvature at vertices and along edges.
//!
//! The vertex curvature is the area gradient of the one-ring. The edge
//! curvatures are functions of the dihedral angle `θ` (π = flat):
//!
//! * edge: `cos(θ/2)·|e|`,
//! * reciprocal: `tan(θ/2)·|e|/2`, the radius of the circle tangent to both
//!   face planes in the cross-section perpendicular to the edge,
//! * associated of order `n`: `sinⁿ(θ/2)·cos(θ/2)/(n − 1)`.
//!
//! The in-plane rotation `J` of a face is `x ↦ n × x` with `n` the unit
//! normal from the face winding.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

use crate::laplacian::normal_factor;
use crate::mesh::{EdgeKey, MeshError, TriMesh, Vec3};
use crate::par::{self, Execution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("angle {0} outside [0, π]")]
    AngleOutOfRange(f64),
    #[error("angle {0} must lie strictly between 0 and π")]
    DegenerateAngle(f64),
    #[error("edge length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("order must be at least 2, got {0}")]
    InvalidOrder(u32),
}

/// A real value that may be the tagged infinity the formulas produce at
/// their singular angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == ExtReal::Infinite
    }

    /// `f64::INFINITY` for the sentinel.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x:.17e}"),
            ExtReal::Infinite => write!(f, "∞"),
        }
    }
}

fn check_angle(theta: f64) -> Result<(), CurvatureError> {
    if !(0.0..=PI).contains(&theta) {
        return Err(CurvatureError::AngleOutOfRange(theta));
    }
    Ok(())
}

fn check_length(len: f64) -> Result<(), CurvatureError> {
    if !(len > 0.0 && len.is_finite()) {
        return Err(CurvatureError::NonPositiveLength(len));
    }
    Ok(())
}

/// `sin((π − θ)/2)·|e| = cos(θ/2)·|e|`. At the boundary convention `θ = 0`
/// this is `|e|`.
pub fn edge_mean_curvature(theta: f64, edge_len: f64) -> Result<f64, CurvatureError> {
    check_angle(theta)?;
    check_length(edge_len)?;
    Ok((0.5 * theta).cos() * edge_len)
}

/// `(1 − cos θ)/sin θ · |e|/2 = tan(θ/2)·|e|/2`; `0` at `θ = 0` and the
/// infinite sentinel at `θ = π`.
pub fn reciprocal_mean_curvature(theta: f64, edge_len: f64) -> Result<ExtReal, CurvatureError> {
    check_angle(theta)?;
    check_length(edge_len)?;
    if theta == PI {
        return Ok(ExtReal::Infinite);
    }
    Ok(ExtReal::Finite((0.5 * theta).tan() * 0.5 * edge_len))
}

/// `sinⁿ(θ/2)·cos(θ/2)/(n − 1)`; `0` at both `θ = 0` and `θ = π`.
pub fn associated_mean_curvature(theta: f64, n: u32) -> Result<f64, CurvatureError> {
    check_angle(theta)?;
    if n < 2 {
        return Err(CurvatureError::InvalidOrder(n));
    }
    Ok(normal_factor(theta, n) / (n as f64 - 1.0))
}

/// The literal `((1 − cos θ)/sin θ)ⁿ sin^{n+1}((π − θ)/2)/(n − 1)`, for
/// `θ` strictly inside `(0, π)`.
pub fn associated_mean_curvature_literal(theta: f64, n: u32) -> Result<f64, CurvatureError> {
    if !(theta > 0.0 && theta < PI) {
        return Err(CurvatureError::DegenerateAngle(theta));
    }
    if n < 2 {
        return Err(CurvatureError::InvalidOrder(n));
    }
    Ok(crate::laplacian::normal_factor_literal(theta, n) / (n as f64 - 1.0))
}

// ---------------------------------------------------------------------------
// Tangent-sphere cross-section

/// The quadrilateral `c_ij, c_ijk, c_ijkl, c_ijl` in the plane
/// perpendicular to an edge, in coordinates with `c_ij` at the origin and
/// `c_ijk` on the positive x-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentSphereSection {
    pub c_ij: Vector2<f64>,
    pub c_ijk: Vector2<f64>,
    pub c_ijl: Vector2<f64>,
    pub c_ijkl: Vector2<f64>,
    pub h: f64,
}

impl TangentSphereSection {
    /// Section for dihedral angle `θ ∈ (0, π)` and edge length `|e|`.
    pub fn new(theta: f64, edge_len: f64) -> Result<Self, CurvatureError> {
        if !(theta > 0.0 && theta < PI) {
            return Err(CurvatureError::DegenerateAngle(theta));
        }
        check_length(edge_len)?;
        let r = 0.5 * edge_len;
        Ok(Self::from_feet(
            Vector2::new(r, 0.0),
            Vector2::new(r * theta.cos(), r * theta.sin()),
        ))
    }

    /// Section at an interior edge of a triangle mesh, built from the face
    /// rotations: `c_ijk = c_ij + ½ J_k(v_j − v_i)` for the face that runs
    /// `i → j` and `c_ijl = c_ij − ½ J_l(v_j − v_i)` for the other.
    pub fn from_hinge(mesh: &TriMesh, edge: EdgeKey) -> Result<Self, CurvatureError> {
        let faces = mesh.edge_faces(edge)?;
        if faces.len() != 2 {
            return Err(if faces.len() == 1 {
                MeshError::BoundaryEdge(edge)
            } else {
                MeshError::NonManifoldEdge {
                    edge,
                    faces: faces.to_vec(),
                }
            }
            .into());
        }
        let (tk, tl) = if runs_forward(&mesh.triangles()[faces[0]], edge) {
            (faces[0], faces[1])
        } else {
            (faces[1], faces[0])
        };
        let e = mesh.vertex(edge.j()) - mesh.vertex(edge.i());
        let to_k: Vec3 = 0.5 * mesh.face_normal(tk).cross(&e);
        let to_l: Vec3 = -0.5 * mesh.face_normal(tl).cross(&e);
        let x = to_k.normalize();
        let y = e.normalize().cross(&x);
        let project = |v: &Vec3| Vector2::new(v.dot(&x), v.dot(&y));
        let mut c_ijl = project(&to_l);
        // orient the plane so c_ijl lies in the upper half
        if c_ijl.y < 0.0 {
            c_ijl.y = -c_ijl.y;
        }
        Ok(Self::from_feet(project(&to_k), c_ijl))
    }

    /// Solves the two perpendicularity conditions
    /// `(c_ijkl − c_ijk)·c_ijk = 0` and `(c_ijkl − c_ijl)·c_ijl = 0`.
    fn from_feet(c_ijk: Vector2<f64>, c_ijl: Vector2<f64>) -> Self {
        let m = Matrix2::new(c_ijk.x, c_ijk.y, c_ijl.x, c_ijl.y);
        let rhs = Vector2::new(c_ijk.norm_squared(), c_ijl.norm_squared());
        let c_ijkl = m
            .lu()
            .solve(&rhs)
            .unwrap_or(Vector2::new(f64::NAN, f64::NAN));
        let h = (c_ijkl - c_ijk).norm();
        Self {
            c_ij: Vector2::zeros(),
            c_ijk,
            c_ijl,
            c_ijkl,
            h,
        }
    }

    /// Distances from `c_ijkl` to the two face lines, minus `h`.
    pub fn tangency_residuals(&self) -> [f64; 2] {
        let dist = |foot: &Vector2<f64>| {
            let d = foot.normalize();
            let p = self.c_ijkl - self.c_ij;
            (p.x * d.y - p.y * d.x).abs()
        };
        [dist(&self.c_ijk) - self.h, dist(&self.c_ijl) - self.h]
    }

    /// The two inner products that define `c_ijkl`.
    pub fn orthogonality_residuals(&self) -> [f64; 2] {
        [
            (self.c_ijk - self.c_ij).dot(&(self.c_ijk - self.c_ijkl)),
            (self.c_ijl - self.c_ij).dot(&(self.c_ijkl - self.c_ijl)),
        ]
    }

    /// `|c_ijkl − c_ijl| − h`.
    pub fn radius_mismatch(&self) -> f64 {
        (self.c_ijkl - self.c_ijl).norm() - self.h
    }
}

fn runs_forward(tri: &[usize; 3], edge: EdgeKey) -> bool {
    (0..3).any(|k| tri[k] == edge.i() && tri[(k + 1) % 3] == edge.j())
}

// ---------------------------------------------------------------------------
// Candidate angle functions

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Candidate {
    /// `sin((π − θ)/2) = cos(θ/2)`
    F,
    /// `((1 − cos θ)/sin θ)² sin³((π − θ)/2) = ½ sin(θ/2) sin θ`
    G,
    /// `sin θ/(1 − cos θ) = cot(θ/2)`
    P,
    /// `sin⁻²((π − θ)/2) (sin θ/(1 − cos θ))³ = ½ csc⁴(θ/2) sin θ`
    Q,
}

impl Candidate {
    pub const ALL: [Candidate; 4] = [Candidate::F, Candidate::G, Candidate::P, Candidate::Q];

    pub fn name(self) -> &'static str {
        match self {
            Candidate::F => "f",
            Candidate::G => "g",
            Candidate::P => "p",
            Candidate::Q => "q",
        }
    }

    /// True for `p` and `q`, which blow up at `θ = 0`.
    pub fn singular_at_zero(self) -> bool {
        matches!(self, Candidate::P | Candidate::Q)
    }

    /// Simplified closed form. `p(0)` and `q(0)` are the infinite sentinel.
    pub fn eval(self, theta: f64) -> Result<ExtReal, CurvatureError> {
        check_angle(theta)?;
        let h = 0.5 * theta;
        if theta == 0.0 && self.singular_at_zero() {
            return Ok(ExtReal::Infinite);
        }
        Ok(ExtReal::Finite(match self {
            Candidate::F => h.cos(),
            Candidate::G => 0.5 * h.sin() * theta.sin(),
            Candidate::P => h.cos() / h.sin(),
            Candidate::Q => 0.5 * theta.sin() / h.sin().powi(4),
        }))
    }

    /// The defining expression, evaluated literally. Only meaningful where
    /// every factor is finite: `θ ∈ (0, π)` (`f` also at the end points).
    pub fn eval_defining(self, theta: f64) -> Result<f64, CurvatureError> {
        check_angle(theta)?;
        let half_comp = (0.5 * (PI - theta)).sin();
        let ratio = (1.0 - theta.cos()) / theta.sin();
        Ok(match self {
            Candidate::F => half_comp,
            Candidate::G => ratio.powi(2) * half_comp.powi(3),
            Candidate::P => theta.sin() / (1.0 - theta.cos()),
            Candidate::Q => (theta.sin() / (1.0 - theta.cos())).powi(3) / half_comp.powi(2),
        })
    }
}

// ---------------------------------------------------------------------------
// Vertex curvature

#[derive(Debug, Clone, PartialEq)]
pub struct VertexCurvature {
    pub vertex: usize,
    pub h_vec: Vec3,
    pub one_ring_area: f64,
}

/// `½ Σ_i (cot α_i + cot β_i)(v − v_i)` over the one-ring of an interior
/// vertex.
pub fn vertex_mean_curvature(mesh: &TriMesh, v: usize) -> Result<VertexCurvature, CurvatureError> {
    if v >= mesh.vertex_count() {
        return Err(MeshError::InvalidParameter(format!("vertex {v} out of range")).into());
    }
    if mesh.is_boundary_vertex(v) || mesh.vertex_faces(v).is_empty() {
        return Err(MeshError::BoundaryVertex(v).into());
    }
    let p = mesh.vertex(v);
    let mut h = Vec3::zeros();
    for u in mesh.neighbors(v) {
        let e = EdgeKey::new(v, u).expect("neighbours differ");
        let (a, b) = mesh.opposite_angles(e)?;
        let w = 0.5 * (a.cos() / a.sin() + b.cos() / b.sin());
        h += w * (p - mesh.vertex(u));
    }
    Ok(VertexCurvature {
        vertex: v,
        h_vec: h,
        one_ring_area: mesh.one_ring_area(v),
    })
}

/// The same vector accumulated edge by edge from face rotations:
/// `½ Σ_i (J_l − J_r)(v − v_i)`, where `J_l` belongs to the face that runs
/// `v → v_i` and `J_r` to the face that runs `v_i → v`.
pub fn vertex_mean_curvature_by_rotation(mesh: &TriMesh, v: usize) -> Result<Vec3, CurvatureError> {
    if v >= mesh.vertex_count() {
        return Err(MeshError::InvalidParameter(format!("vertex {v} out of range")).into());
    }
    if mesh.is_boundary_vertex(v) || mesh.vertex_faces(v).is_empty() {
        return Err(MeshError::BoundaryVertex(v).into());
    }
    let p = mesh.vertex(v);
    let mut h = Vec3::zeros();
    for u in mesh.neighbors(v) {
        let e = EdgeKey::new(v, u).expect("neighbours differ");
        let d = p - mesh.vertex(u);
        for &t in mesh.edge_faces(e)? {
            let tri = mesh.triangles()[t];
            let forward = (0..3).any(|k| tri[k] == v && tri[(k + 1) % 3] == u);
            let j = mesh.face_normal(t).cross(&d);
            if forward {
                h += 0.5 * j;
            } else {
                h -= 0.5 * j;
            }
        }
    }
    Ok(h)
}

/// Curvature at every interior vertex, in vertex order.
pub fn vertex_curvatures(
    mesh: &TriMesh,
    exec: Execution,
) -> Result<Vec<VertexCurvature>, CurvatureError> {
    let interior: Vec<usize> = (0..mesh.vertex_count())
        .filter(|&v| !mesh.is_boundary_vertex(v) && !mesh.vertex_faces(v).is_empty())
        .collect();
    par::map(exec, &interior, |&v| vertex_mean_curvature(mesh, v))
        .into_iter()
        .collect()
}

// ---------------------------------------------------------------------------
// Edge curvature

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCurvature {
    pub edge: EdgeKey,
    /// Dihedral angle with the boundary convention `θ = 0` applied.
    pub theta: f64,
    pub boundary: bool,
    pub h_edge: f64,
    pub h_recip: ExtReal,
    /// `(n, H_a(n))` for each requested order.
    pub h_assoc: Vec<(u32, f64)>,
}

pub fn edge_curvature(
    mesh: &TriMesh,
    edge: EdgeKey,
    orders: &[u32],
) -> Result<EdgeCurvature, CurvatureError> {
    let dihedral = mesh.dihedral_angle(edge)?;
    let theta = dihedral.with_boundary_zero();
    let len = mesh.edge_length(edge);
    let h_assoc = orders
        .iter()
        .map(|&n| associated_mean_curvature(theta, n).map(|h| (n, h)))
        .collect::<Result<_, _>>()?;
    Ok(EdgeCurvature {
        edge,
        theta,
        boundary: dihedral.interior().is_none(),
        h_edge: edge_mean_curvature(theta, len)?,
        h_recip: reciprocal_mean_curvature(theta, len)?,
        h_assoc,
    })
}

/// Curvatures of every edge in increasing `(i, j)` order.
pub fn edge_curvatures(
    mesh: &TriMesh,
    orders: &[u32],
    exec: Execution,
) -> Result<Vec<EdgeCurvature>, CurvatureError> {
    let keys = mesh.edge_keys();
    par::map(exec, &keys, |&e| edge_curvature(mesh, e, orders))
        .into_iter()
        .collect()
}
