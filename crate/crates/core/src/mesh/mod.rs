//! Indexed triangle and tetrahedral meshes.
//!
//! Meshes are validated once at construction and are immutable afterwards.
//! Edge and face tables are kept in `BTreeMap`s so every traversal runs in
//! sorted key order, and incident element lists are sorted by element index.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub mod generate;
pub mod io;
pub mod measure;

pub use generate::*;
pub use measure::*;

/// Point or vector in ambient 3-space.
pub type Vec3 = nalgebra::Vector3<f64>;

/// Relative area threshold below which a triangle is rejected as degenerate.
pub const DEGENERATE_AREA_RATIO: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("element {element} references vertex {index}, but the mesh has {count} vertices")]
    IndexOutOfRange {
        element: usize,
        index: usize,
        count: usize,
    },
    #[error("element {0} repeats a vertex")]
    RepeatedVertex(usize),
    #[error("degenerate elements (area/volume below tolerance): {0:?}")]
    Degenerate(Vec<usize>),
    #[error("edge {edge} is traversed in the same direction by faces {faces:?}")]
    InconsistentOrientation { edge: EdgeKey, faces: [usize; 2] },
    #[error("edge {edge} is non-manifold, incident faces {faces:?}")]
    NonManifoldEdge { edge: EdgeKey, faces: Vec<usize> },
    #[error("face {face:?} is shared by more than two tetrahedra: {tets:?}")]
    NonManifoldFace { face: [usize; 3], tets: Vec<usize> },
    #[error("edge {0} is not part of the mesh")]
    UnknownEdge(EdgeKey),
    #[error("edge {0} lies on the boundary")]
    BoundaryEdge(EdgeKey),
    #[error("vertex {0} lies on the boundary")]
    BoundaryVertex(usize),
    #[error("edge {edge} is not an edge of element {element}")]
    NotInElement { edge: EdgeKey, element: usize },
    #[error("degenerate triangle")]
    DegenerateTriangle,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Unordered vertex pair with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey {
    i: usize,
    j: usize,
}

impl EdgeKey {
    /// Returns `None` when `a == b`.
    pub fn new(a: usize, b: usize) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Self { i: a, j: b }),
            std::cmp::Ordering::Greater => Some(Self { i: b, j: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn i(self) -> usize {
        self.i
    }

    pub fn j(self) -> usize {
        self.j
    }

    pub fn contains(self, v: usize) -> bool {
        self.i == v || self.j == v
    }

    /// The endpoint that is not `v`.
    pub fn other(self, v: usize) -> usize {
        if self.i == v {
            self.j
        } else {
            self.i
        }
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// Interior dihedral angle at a triangle-mesh edge.
///
/// Boundary edges carry no angle. The edge curvature formulas treat them
/// as `θ = 0`, but that value is never fed to a cotangent by accident.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dihedral {
    Interior(f64),
    Boundary,
}

impl Dihedral {
    /// Angle with the boundary convention `θ := 0` applied.
    pub fn with_boundary_zero(self) -> f64 {
        match self {
            Dihedral::Interior(t) => t,
            Dihedral::Boundary => 0.0,
        }
    }

    pub fn interior(self) -> Option<f64> {
        match self {
            Dihedral::Interior(t) => Some(t),
            Dihedral::Boundary => None,
        }
    }
}

fn bbox_diagonal(vertices: &[Vec3]) -> f64 {
    if vertices.is_empty() {
        return 0.0;
    }
    let mut lo = vertices[0];
    let mut hi = vertices[0];
    for v in vertices {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    (hi - lo).norm()
}

fn check_vertices(vertices: &[Vec3]) -> Result<(), MeshError> {
    match vertices
        .iter()
        .position(|v| !v.iter().all(|c| c.is_finite()))
    {
        Some(i) => Err(MeshError::NonFinite(i)),
        None => Ok(()),
    }
}

fn check_element<const N: usize>(
    element: usize,
    idx: &[usize; N],
    count: usize,
) -> Result<(), MeshError> {
    for &index in idx {
        if index >= count {
            return Err(MeshError::IndexOutOfRange {
                element,
                index,
                count,
            });
        }
    }
    for a in 0..N {
        for b in a + 1..N {
            if idx[a] == idx[b] {
                return Err(MeshError::RepeatedVertex(element));
            }
        }
    }
    Ok(())
}

/// Triangle mesh with an edge → incident-face table.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    edges: BTreeMap<EdgeKey, Vec<usize>>,
    vertex_faces: Vec<Vec<usize>>,
}

impl TriMesh {
    /// Validates and indexes a triangle soup.
    ///
    /// Edges with more than two incident faces are allowed (see
    /// [`TriMesh::is_manifold`]); edges with exactly two must be traversed in
    /// opposite directions.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        check_vertices(&vertices)?;
        let n = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            check_element(t, tri, n)?;
        }
        let diag = bbox_diagonal(&vertices);
        let min_area = DEGENERATE_AREA_RATIO * diag * diag;
        let degenerate: Vec<usize> = triangles
            .iter()
            .enumerate()
            .filter(|(_, t)| {
                triangle_area(&vertices[t[0]], &vertices[t[1]], &vertices[t[2]]) <= min_area
            })
            .map(|(i, _)| i)
            .collect();
        if !degenerate.is_empty() {
            return Err(MeshError::Degenerate(degenerate));
        }

        let mut edges: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
        let mut vertex_faces = vec![Vec::new(); n];
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let key = EdgeKey::new(tri[k], tri[(k + 1) % 3]).expect("distinct");
                edges.entry(key).or_default().push(t);
                vertex_faces[tri[k]].push(t);
            }
        }
        for (&edge, faces) in &edges {
            if faces.len() == 2 {
                let d0 = directed(&triangles[faces[0]], edge);
                let d1 = directed(&triangles[faces[1]], edge);
                if d0 == d1 {
                    return Err(MeshError::InconsistentOrientation {
                        edge,
                        faces: [faces[0], faces[1]],
                    });
                }
            }
        }
        Ok(Self {
            vertices,
            triangles,
            edges,
            vertex_faces,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Vec3 {
        &self.vertices[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in sorted order with their incident faces.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeKey, &[usize])> + '_ {
        self.edges.iter().map(|(k, f)| (*k, f.as_slice()))
    }

    pub fn edge_keys(&self) -> Vec<EdgeKey> {
        self.edges.keys().copied().collect()
    }

    pub fn edge_faces(&self, edge: EdgeKey) -> Result<&[usize], MeshError> {
        self.edges
            .get(&edge)
            .map(|f| f.as_slice())
            .ok_or(MeshError::UnknownEdge(edge))
    }

    pub fn is_manifold(&self) -> bool {
        self.edges.values().all(|f| f.len() <= 2)
    }

    pub fn is_boundary_edge(&self, edge: EdgeKey) -> bool {
        self.edges.get(&edge).is_some_and(|f| f.len() == 1)
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.edges.values().filter(|f| f.len() == 1).count()
    }

    /// Faces incident to `v`, in increasing index order.
    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    /// True if `v` is on a boundary edge or has no incident faces.
    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        let faces = &self.vertex_faces[v];
        if faces.is_empty() {
            return true;
        }
        faces.iter().any(|&t| {
            let tri = self.triangles[t];
            tri.iter()
                .filter(|&&w| w != v)
                .any(|&w| self.is_boundary_edge(EdgeKey::new(v, w).expect("distinct")))
        })
    }

    /// Neighbours of `v` in increasing index order.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.vertex_faces[v]
            .iter()
            .flat_map(|&t| self.triangles[t])
            .filter(|&w| w != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn edge_length(&self, edge: EdgeKey) -> f64 {
        (self.vertices[edge.j()] - self.vertices[edge.i()]).norm()
    }

    pub fn mean_edge_length(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        let total: f64 = self.edges.keys().map(|&e| self.edge_length(e)).sum();
        total / self.edges.len() as f64
    }

    pub fn face_points(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn face_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.face_points(t);
        triangle_area(&a, &b, &c)
    }

    /// Unit normal from the stored winding.
    pub fn face_normal(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.face_points(t);
        (b - a).cross(&(c - a)).normalize()
    }

    /// The vertex of face `t` that is not on `edge`.
    pub fn opposite_vertex(&self, t: usize, edge: EdgeKey) -> Result<usize, MeshError> {
        let tri = self.triangles[t];
        if !(tri.contains(&edge.i()) && tri.contains(&edge.j())) {
            return Err(MeshError::NotInElement { edge, element: t });
        }
        Ok(*tri
            .iter()
            .find(|&&v| !edge.contains(v))
            .expect("triangle has three distinct vertices"))
    }

    /// Angle in face `t` at the vertex opposite `edge`.
    pub fn opposite_angle(&self, t: usize, edge: EdgeKey) -> Result<f64, MeshError> {
        let k = self.opposite_vertex(t, edge)?;
        let p = &self.vertices;
        Ok(angle_between(&(p[edge.i()] - p[k]), &(p[edge.j()] - p[k])))
    }

    /// Interior dihedral angle at `edge`: `π` for coplanar neighbours,
    /// [`Dihedral::Boundary`] for boundary edges.
    pub fn dihedral_angle(&self, edge: EdgeKey) -> Result<Dihedral, MeshError> {
        let faces = self.edge_faces(edge)?;
        match faces.len() {
            1 => Ok(Dihedral::Boundary),
            2 => {
                let k = self.opposite_vertex(faces[0], edge)?;
                let l = self.opposite_vertex(faces[1], edge)?;
                let p = &self.vertices;
                Ok(Dihedral::Interior(dihedral_between(
                    &p[edge.i()],
                    &p[edge.j()],
                    &p[k],
                    &p[l],
                )))
            }
            _ => Err(MeshError::NonManifoldEdge {
                edge,
                faces: faces.to_vec(),
            }),
        }
    }

    /// Angles opposite an interior edge: `α` in the lower-indexed incident
    /// face, `β` in the other.
    pub fn opposite_angles(&self, edge: EdgeKey) -> Result<(f64, f64), MeshError> {
        let faces = self.edge_faces(edge)?;
        match faces.len() {
            1 => Err(MeshError::BoundaryEdge(edge)),
            2 => Ok((
                self.opposite_angle(faces[0], edge)?,
                self.opposite_angle(faces[1], edge)?,
            )),
            _ => Err(MeshError::NonManifoldEdge {
                edge,
                faces: faces.to_vec(),
            }),
        }
    }

    /// Sum of the areas of the faces around `v`.
    pub fn one_ring_area(&self, v: usize) -> f64 {
        self.vertex_faces[v]
            .iter()
            .map(|&t| self.face_area(t))
            .sum()
    }
}

/// True if `tri` traverses `edge` as `i → j`.
fn directed(tri: &[usize; 3], edge: EdgeKey) -> bool {
    (0..3).any(|k| tri[k] == edge.i() && tri[(k + 1) % 3] == edge.j())
}

/// Tetrahedral mesh with edge and face adjacency.
#[derive(Debug, Clone)]
pub struct TetMesh {
    vertices: Vec<Vec3>,
    tets: Vec<[usize; 4]>,
    edges: BTreeMap<EdgeKey, Vec<usize>>,
    faces: BTreeMap<[usize; 3], Vec<usize>>,
}

impl TetMesh {
    /// Validates a tetrahedron list. Negatively oriented tets are reordered
    /// by swapping their last two vertices.
    pub fn new(vertices: Vec<Vec3>, mut tets: Vec<[usize; 4]>) -> Result<Self, MeshError> {
        check_vertices(&vertices)?;
        let n = vertices.len();
        for (t, tet) in tets.iter().enumerate() {
            check_element(t, tet, n)?;
        }
        let diag = bbox_diagonal(&vertices);
        let min_vol = DEGENERATE_AREA_RATIO * diag * diag * diag;
        let mut degenerate = Vec::new();
        for (t, tet) in tets.iter_mut().enumerate() {
            let p = tet.map(|v| vertices[v]);
            let vol = signed_tet_volume(&p[0], &p[1], &p[2], &p[3]);
            if vol.abs() <= min_vol {
                degenerate.push(t);
            } else if vol < 0.0 {
                tet.swap(2, 3);
            }
        }
        if !degenerate.is_empty() {
            return Err(MeshError::Degenerate(degenerate));
        }

        let mut edges: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
        let mut faces: BTreeMap<[usize; 3], Vec<usize>> = BTreeMap::new();
        for (t, tet) in tets.iter().enumerate() {
            for a in 0..4 {
                for b in a + 1..4 {
                    edges
                        .entry(EdgeKey::new(tet[a], tet[b]).expect("distinct"))
                        .or_default()
                        .push(t);
                }
                let mut face = [tet[(a + 1) % 4], tet[(a + 2) % 4], tet[(a + 3) % 4]];
                face.sort_unstable();
                faces.entry(face).or_default().push(t);
            }
        }
        if let Some((face, ts)) = faces.iter().find(|(_, ts)| ts.len() > 2) {
            return Err(MeshError::NonManifoldFace {
                face: *face,
                tets: ts.clone(),
            });
        }
        Ok(Self {
            vertices,
            tets,
            edges,
            faces,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn tet_count(&self) -> usize {
        self.tets.len()
    }

    pub fn edge_keys(&self) -> Vec<EdgeKey> {
        self.edges.keys().copied().collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Tets incident to `edge`, increasing.
    pub fn edge_tets(&self, edge: EdgeKey) -> Result<&[usize], MeshError> {
        self.edges
            .get(&edge)
            .map(|t| t.as_slice())
            .ok_or(MeshError::UnknownEdge(edge))
    }

    /// Sorted face triples with their incident tets.
    pub fn faces(&self) -> impl Iterator<Item = (&[usize; 3], &[usize])> + '_ {
        self.faces.iter().map(|(f, t)| (f, t.as_slice()))
    }

    pub fn interior_face_count(&self) -> usize {
        self.faces.values().filter(|t| t.len() == 2).count()
    }

    pub fn tet_points(&self, t: usize) -> [Vec3; 4] {
        self.tets[t].map(|v| self.vertices[v])
    }

    pub fn tet_volume(&self, t: usize) -> f64 {
        let p = self.tet_points(t);
        signed_tet_volume(&p[0], &p[1], &p[2], &p[3])
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.tets.len()).map(|t| self.tet_volume(t)).sum()
    }

    pub fn edge_length(&self, edge: EdgeKey) -> f64 {
        (self.vertices[edge.j()] - self.vertices[edge.i()]).norm()
    }

    /// The two vertices of tet `t` not on `edge`, in the tet's stored order.
    pub fn opposite_pair(&self, t: usize, edge: EdgeKey) -> Result<(usize, usize), MeshError> {
        let tet = self.tets[t];
        if !(tet.contains(&edge.i()) && tet.contains(&edge.j())) {
            return Err(MeshError::NotInElement { edge, element: t });
        }
        let mut rest = tet.iter().copied().filter(|&v| !edge.contains(v));
        let k = rest.next().expect("four distinct vertices");
        let l = rest.next().expect("four distinct vertices");
        Ok((k, l))
    }

    /// Interior dihedral angle of tet `t` at `edge`.
    pub fn dihedral_angle(&self, t: usize, edge: EdgeKey) -> Result<f64, MeshError> {
        let (k, l) = self.opposite_pair(t, edge)?;
        let p = &self.vertices;
        Ok(dihedral_between(&p[edge.i()], &p[edge.j()], &p[k], &p[l]))
    }
}
