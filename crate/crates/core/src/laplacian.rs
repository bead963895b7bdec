//! Edge weights, Laplacian assembly, Dirichlet energy and the Dirichlet
//! boundary-value solve.
//!
//! Four weight families are provided:
//!
//! * triangle cotangent: `w_ij = ½(cot α + cot β)`,
//! * tetrahedral primal: per tet `(1/6)|e_kl| cot θ_kl`, where `θ_kl` is the
//!   dihedral angle at the edge opposite `ij`,
//! * tetrahedral dual: per tet `w_ijkl + w_ijlk` with
//!   `w_ijkl = (|e|/8) cot θ (2 cot α cot β / cos θ − (cot²α + cot²β))`,
//!   where `θ` is the dihedral angle on `ij` itself,
//! * associated of order `n` on a triangle mesh: a tangential cotangent
//!   part plus a normal part driven by the dihedral angle at the edge.
//!
//! Per-element sums run in increasing element index so every weight is
//! bitwise reproducible.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::mesh::{
    dihedral_between, outward_area_vector, tet_volume, EdgeKey, MeshError, TetMesh, TriMesh, Vec3,
};
use crate::par::{self, Execution};

/// Dense LU is used up to this many unknowns, conjugate gradients above.
pub const DENSE_SOLVE_LIMIT: usize = 1000;

/// Relative residual a solve must reach.
pub const SOLVE_TOLERANCE: f64 = 1e-8;

/// Condition numbers above this are reported as ill-conditioned.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LaplacianError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("degenerate element {0}")]
    DegenerateElement(usize),
    #[error("dihedral angle {theta} at edge {edge} is degenerate (0 or π)")]
    DegenerateAngle { edge: EdgeKey, theta: f64 },
    #[error("associated order must be at least 2, got {0}")]
    InvalidOrder(u32),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vertex {vertex} out of range for {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("interior system is singular (condition estimate {condition:.3e})")]
    Singular { condition: f64 },
    #[error("interior system is ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },
    #[error("solver stopped at relative residual {residual:.3e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },
}

/// Weight family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    TriCotan,
    TetPrimal,
    TetDual,
    Associated(u32),
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::TriCotan => write!(f, "tri-cotan"),
            Scheme::TetPrimal => write!(f, "tet-primal"),
            Scheme::TetDual => write!(f, "tet-dual"),
            Scheme::Associated(n) => write!(f, "assoc-{n}"),
        }
    }
}

/// Per-edge weights keyed by unordered edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights {
    scheme: Scheme,
    weights: BTreeMap<EdgeKey, f64>,
}

impl EdgeWeights {
    pub fn new(scheme: Scheme, weights: BTreeMap<EdgeKey, f64>) -> Self {
        Self { scheme, weights }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn get(&self, edge: EdgeKey) -> Option<f64> {
        self.weights.get(&edge).copied()
    }

    /// Entries in increasing `(i, j)` order.
    pub fn iter(&self) -> impl Iterator<Item = (EdgeKey, f64)> + '_ {
        self.weights.iter().map(|(&e, &w)| (e, w))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.weights.values().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// `Σ_edges w_ij (f_i − f_j)²`.
    pub fn edge_energy(&self, f: &[f64]) -> f64 {
        self.iter()
            .map(|(e, w)| w * (f[e.i()] - f[e.j()]).powi(2))
            .sum()
    }
}

fn cot(x: f64) -> f64 {
    x.cos() / x.sin()
}

// ---------------------------------------------------------------------------
// Triangle cotangent

/// `½ cot θ_k` for the triangle `p` and the edge opposite corner `k`.
pub fn tri_cotan_term(p: &[Vec3; 3], k: usize) -> f64 {
    let a = p[(k + 1) % 3] - p[k];
    let b = p[(k + 2) % 3] - p[k];
    0.5 * a.dot(&b) / a.cross(&b).norm()
}

/// The same term as `−(n_i·n_j)/(4|T|)`, where `n_i` is the edge opposite
/// corner `i` rotated by 90° in the face plane.
pub fn tri_cotan_term_normal(p: &[Vec3; 3], k: usize) -> f64 {
    let (i, j) = ((k + 1) % 3, (k + 2) % 3);
    let cross = (p[1] - p[0]).cross(&(p[2] - p[0]));
    let area = 0.5 * cross.norm();
    let s = cross / cross.norm();
    let n_i = s.cross(&(p[k] - p[j]));
    let n_j = s.cross(&(p[i] - p[k]));
    -n_i.dot(&n_j) / (4.0 * area)
}

fn corner_of(tri: &[usize; 3], v: usize) -> usize {
    tri.iter()
        .position(|&x| x == v)
        .expect("vertex of triangle")
}

/// `½(cot α + cot β)` at an interior edge, `½ cot α` at a boundary edge.
pub fn tri_cotan_weight(mesh: &TriMesh, edge: EdgeKey) -> Result<f64, LaplacianError> {
    tri_cotan_weight_with(mesh, edge, tri_cotan_term)
}

/// [`tri_cotan_weight`] evaluated through the normal-product form.
pub fn tri_cotan_weight_normal_form(mesh: &TriMesh, edge: EdgeKey) -> Result<f64, LaplacianError> {
    tri_cotan_weight_with(mesh, edge, tri_cotan_term_normal)
}

fn tri_cotan_weight_with(
    mesh: &TriMesh,
    edge: EdgeKey,
    term: fn(&[Vec3; 3], usize) -> f64,
) -> Result<f64, LaplacianError> {
    let faces = mesh.edge_faces(edge)?;
    if faces.len() > 2 {
        return Err(MeshError::NonManifoldEdge {
            edge,
            faces: faces.to_vec(),
        }
        .into());
    }
    let mut w = 0.0;
    for &t in faces {
        let k = mesh.opposite_vertex(t, edge)?;
        let value = term(&mesh.face_points(t), corner_of(&mesh.triangles()[t], k));
        if !value.is_finite() {
            return Err(LaplacianError::DegenerateElement(t));
        }
        w += value;
    }
    Ok(w)
}

// ---------------------------------------------------------------------------
// Tetrahedral primal

fn local(tet: &[usize; 4], v: usize) -> usize {
    tet.iter().position(|&x| x == v).expect("vertex of tet")
}

fn other_two(a: usize, b: usize) -> (usize, usize) {
    let mut rest = (0..4).filter(|&c| c != a && c != b);
    (rest.next().unwrap(), rest.next().unwrap())
}

/// Primal term of tet `p` for the edge between local corners `a` and `b`:
/// `(1/6)|e_kl| cot θ_kl` with `kl` the opposite edge.
pub fn tet_primal_term(p: &[Vec3; 4], a: usize, b: usize) -> f64 {
    let (k, l) = other_two(a, b);
    let theta = dihedral_between(&p[k], &p[l], &p[a], &p[b]);
    (p[l] - p[k]).norm() * cot(theta) / 6.0
}

/// The same term as `−(s_a·s_b)/(9|τ|)`, where `s_c` is the outward area
/// vector of the face opposite corner `c` (its length is the face area).
pub fn tet_primal_term_normal(p: &[Vec3; 4], a: usize, b: usize) -> f64 {
    let sa = outward_area_vector(p, a);
    let sb = outward_area_vector(p, b);
    -sa.dot(&sb) / (9.0 * tet_volume(p))
}

/// Sum of primal terms over the tets incident to `edge`.
pub fn tet_primal_weight(mesh: &TetMesh, edge: EdgeKey) -> Result<f64, LaplacianError> {
    let mut w = 0.0;
    for &t in mesh.edge_tets(edge)? {
        let tet = mesh.tets()[t];
        let v = tet_primal_term(
            &mesh.tet_points(t),
            local(&tet, edge.i()),
            local(&tet, edge.j()),
        );
        if !v.is_finite() {
            return Err(LaplacianError::DegenerateElement(t));
        }
        w += v;
    }
    Ok(w)
}

// ---------------------------------------------------------------------------
// Tetrahedral dual

/// `w_ijkl` from the edge length, the dihedral angle `θ` on the edge and the
/// face angles `α`, `β` opposite it.
///
/// Written as `(|e|/8)(2 cot α cot β / sin θ − cot θ (cot²α + cot²β))`,
/// which equals the `cot θ / cos θ` form and stays finite at `θ = π/2`.
pub fn dual_term(edge_len: f64, theta: f64, alpha: f64, beta: f64) -> f64 {
    let (ca, cb) = (cot(alpha), cot(beta));
    edge_len / 8.0 * (2.0 * ca * cb / theta.sin() - cot(theta) * (ca * ca + cb * cb))
}

/// Geometry of tet `p` seen from the edge between local corners `a`, `b`:
/// `(|e|, θ, α, β)` with `α` at the first remaining corner and `β` at the
/// second.
pub fn dual_angles(p: &[Vec3; 4], a: usize, b: usize) -> (f64, f64, f64, f64) {
    let (k, l) = other_two(a, b);
    let theta = dihedral_between(&p[a], &p[b], &p[k], &p[l]);
    let angle_at = |c: usize| crate::mesh::angle_between(&(p[a] - p[c]), &(p[b] - p[c]));
    ((p[b] - p[a]).norm(), theta, angle_at(k), angle_at(l))
}

/// Per-tet dual contribution `w_ijkl + w_ijlk` for the edge `a`–`b`.
///
/// The second term swaps the roles of the two faces at the edge; the
/// formula is symmetric in `α, β`, so both terms are equal.
pub fn tet_dual_term(p: &[Vec3; 4], a: usize, b: usize) -> f64 {
    let (len, theta, alpha, beta) = dual_angles(p, a, b);
    dual_term(len, theta, alpha, beta) + dual_term(len, theta, beta, alpha)
}

/// Sum of dual contributions over the tets incident to `edge`.
pub fn tet_dual_weight(mesh: &TetMesh, edge: EdgeKey) -> Result<f64, LaplacianError> {
    let mut w = 0.0;
    for &t in mesh.edge_tets(edge)? {
        let tet = mesh.tets()[t];
        let p = mesh.tet_points(t);
        let (a, b) = (local(&tet, edge.i()), local(&tet, edge.j()));
        let (_, theta, _, _) = dual_angles(&p, a, b);
        if theta <= 0.0 || theta >= std::f64::consts::PI {
            return Err(LaplacianError::DegenerateAngle { edge, theta });
        }
        let v = tet_dual_term(&p, a, b);
        if !v.is_finite() {
            return Err(LaplacianError::DegenerateElement(t));
        }
        w += v;
    }
    Ok(w)
}

// ---------------------------------------------------------------------------
// Associated ansatz

/// Normal factor `tanⁿ(θ/2)·cos^{n+1}(θ/2)`, evaluated as
/// `sinⁿ(θ/2)·cos(θ/2)`.
pub fn normal_factor(theta: f64, n: u32) -> f64 {
    let h = 0.5 * theta;
    h.sin().powi(n as i32) * h.cos()
}

/// The literal product `((1 − cos θ)/sin θ)ⁿ · sin^{n+1}((π − θ)/2)`.
/// Undefined at `θ ∈ {0, π}`; kept as the reference for [`normal_factor`].
pub fn normal_factor_literal(theta: f64, n: u32) -> f64 {
    let t = (1.0 - theta.cos()) / theta.sin();
    t.powi(n as i32)
        * (0.5 * (std::f64::consts::PI - theta))
            .sin()
            .powi(n as i32 + 1)
}

/// `(|e|/4n)(n−1)·cotmean + (|e|/4n)·sinⁿ(θ/2)cos(θ/2)` with
/// `cotmean = ½(cot α + cot β)`.
pub fn associated_term(
    edge_len: f64,
    theta: f64,
    alpha: f64,
    beta: f64,
    n: u32,
) -> Result<f64, LaplacianError> {
    if n < 2 {
        return Err(LaplacianError::InvalidOrder(n));
    }
    let scale = edge_len / (4.0 * n as f64);
    let cot_mean = 0.5 * (cot(alpha) + cot(beta));
    Ok(scale * (n as f64 - 1.0) * cot_mean + scale * normal_factor(theta, n))
}

/// Associated weight at an interior edge of a triangle mesh. The two
/// incident triangles form the virtual tet: only `θ`, `α`, `β` and `|e|`
/// enter.
pub fn associated_weight(mesh: &TriMesh, edge: EdgeKey, n: u32) -> Result<f64, LaplacianError> {
    if n < 2 {
        return Err(LaplacianError::InvalidOrder(n));
    }
    let theta = mesh
        .dihedral_angle(edge)?
        .interior()
        .ok_or(MeshError::BoundaryEdge(edge))?;
    let (alpha, beta) = mesh.opposite_angles(edge)?;
    associated_term(mesh.edge_length(edge), theta, alpha, beta, n)
}

/// Boundary edges get the one-sided tangential part and no normal part.
fn associated_weight_any(mesh: &TriMesh, edge: EdgeKey, n: u32) -> Result<f64, LaplacianError> {
    if mesh.is_boundary_edge(edge) {
        let t = mesh.edge_faces(edge)?[0];
        let alpha = mesh.opposite_angle(t, edge)?;
        let scale = mesh.edge_length(edge) / (4.0 * n as f64);
        return Ok(scale * (n as f64 - 1.0) * 0.5 * cot(alpha));
    }
    associated_weight(mesh, edge, n)
}

// ---------------------------------------------------------------------------
// Batch evaluation

fn collect(
    scheme: Scheme,
    keys: Vec<EdgeKey>,
    values: Vec<Result<f64, LaplacianError>>,
) -> Result<EdgeWeights, LaplacianError> {
    let mut map = BTreeMap::new();
    for (e, v) in keys.into_iter().zip(values) {
        map.insert(e, v?);
    }
    Ok(EdgeWeights::new(scheme, map))
}

pub fn tri_cotan_weights(mesh: &TriMesh, exec: Execution) -> Result<EdgeWeights, LaplacianError> {
    let keys = mesh.edge_keys();
    let values = par::map(exec, &keys, |&e| tri_cotan_weight(mesh, e));
    collect(Scheme::TriCotan, keys, values)
}

pub fn tet_primal_weights(mesh: &TetMesh, exec: Execution) -> Result<EdgeWeights, LaplacianError> {
    let keys = mesh.edge_keys();
    let values = par::map(exec, &keys, |&e| tet_primal_weight(mesh, e));
    collect(Scheme::TetPrimal, keys, values)
}

pub fn tet_dual_weights(mesh: &TetMesh, exec: Execution) -> Result<EdgeWeights, LaplacianError> {
    let keys = mesh.edge_keys();
    let values = par::map(exec, &keys, |&e| tet_dual_weight(mesh, e));
    collect(Scheme::TetDual, keys, values)
}

/// Associated weights on every edge; boundary edges keep only their
/// one-sided tangential part.
pub fn associated_weights(
    mesh: &TriMesh,
    n: u32,
    exec: Execution,
) -> Result<EdgeWeights, LaplacianError> {
    if n < 2 {
        return Err(LaplacianError::InvalidOrder(n));
    }
    let keys = mesh.edge_keys();
    let values = par::map(exec, &keys, |&e| associated_weight_any(mesh, e, n));
    collect(Scheme::Associated(n), keys, values)
}

// ---------------------------------------------------------------------------
// Assembly

/// Sparse symmetric Laplacian in compressed-row form. Off-diagonal entries
/// are the edge weights; each diagonal entry is minus its row's
/// off-diagonal sum. Columns within a row are increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphLaplacian {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Builds `L` from edge weights. Edges referencing a vertex `≥ n` are an
/// error.
pub fn assemble(weights: &EdgeWeights, n: usize) -> Result<GraphLaplacian, LaplacianError> {
    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for (e, w) in weights.iter() {
        if e.j() >= n {
            return Err(LaplacianError::VertexOutOfRange {
                vertex: e.j(),
                count: n,
            });
        }
        *rows[e.i()].entry(e.j()).or_insert(0.0) += w;
        *rows[e.j()].entry(e.i()).or_insert(0.0) += w;
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for (i, row) in rows.iter_mut().enumerate() {
        let diag: f64 = -row.values().sum::<f64>();
        row.insert(i, diag);
        for (&c, &v) in row.iter() {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(GraphLaplacian {
        n,
        row_ptr,
        cols,
        vals,
    })
}

impl GraphLaplacian {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.get(i, i)
    }

    pub fn max_abs_diagonal(&self) -> f64 {
        (0..self.n).fold(0.0, |m, i| m.max(self.diagonal(i).abs()))
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>, LaplacianError> {
        if f.len() != self.n {
            return Err(LaplacianError::DimensionMismatch {
                expected: self.n,
                found: f.len(),
            });
        }
        Ok((0..self.n)
            .map(|i| self.row(i).map(|(c, v)| v * f[c]).sum())
            .collect())
    }

    /// `‖L𝟏‖_∞`.
    pub fn kernel_residual(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    /// Exact entrywise symmetry.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// `−fᵀ L f`.
pub fn dirichlet_energy(l: &GraphLaplacian, f: &[f64]) -> Result<f64, LaplacianError> {
    let lf = l.apply(f)?;
    Ok(-f.iter().zip(&lf).map(|(a, b)| a * b).sum::<f64>())
}

// ---------------------------------------------------------------------------
// Dirichlet problem

/// Laplacian plus prescribed values on a boundary vertex set. All other
/// vertices are unknowns.
#[derive(Debug, Clone)]
pub struct DirichletProblem {
    laplacian: GraphLaplacian,
    boundary: BTreeMap<usize, f64>,
}

impl DirichletProblem {
    pub fn new(
        laplacian: GraphLaplacian,
        boundary: BTreeMap<usize, f64>,
    ) -> Result<Self, LaplacianError> {
        let count = laplacian.dim();
        if let Some((&v, _)) = boundary.iter().next_back().filter(|(&v, _)| v >= count) {
            return Err(LaplacianError::VertexOutOfRange { vertex: v, count });
        }
        Ok(Self {
            laplacian,
            boundary,
        })
    }

    pub fn laplacian(&self) -> &GraphLaplacian {
        &self.laplacian
    }

    pub fn boundary(&self) -> &BTreeMap<usize, f64> {
        &self.boundary
    }

    pub fn interior(&self) -> Vec<usize> {
        (0..self.laplacian.dim())
            .filter(|v| !self.boundary.contains_key(v))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Trivial,
    DenseLu,
    ConjugateGradient,
}

#[derive(Debug, Clone)]
pub struct DirichletSolution {
    pub values: Vec<f64>,
    /// `‖A x − b‖ / ‖b‖` of the interior equations (absolute when `b = 0`).
    pub residual: f64,
    /// `|λ|_max / |λ|_min` of the interior block; `None` for the iterative
    /// path, which does not estimate it.
    pub condition: Option<f64>,
    pub method: SolveMethod,
    pub iterations: usize,
}

/// Solves `(L f)_i = 0` at every interior vertex with the boundary values
/// fixed, i.e. minimises the discrete Dirichlet energy.
///
/// Up to [`DENSE_SOLVE_LIMIT`] unknowns the interior block is factored by
/// LU and its condition number estimated from the symmetric spectrum.
/// Larger systems use Jacobi-preconditioned conjugate gradients, which
/// assumes the negated block is positive definite (true for positive
/// weights on a connected mesh) and reports non-convergence otherwise.
pub fn solve_dirichlet(problem: &DirichletProblem) -> Result<DirichletSolution, LaplacianError> {
    let l = &problem.laplacian;
    let n = l.dim();
    let interior = problem.interior();
    let mut values = vec![0.0; n];
    for (&v, &x) in &problem.boundary {
        values[v] = x;
    }
    if interior.is_empty() {
        return Ok(DirichletSolution {
            values,
            residual: 0.0,
            condition: None,
            method: SolveMethod::Trivial,
            iterations: 0,
        });
    }
    let mut slot = vec![usize::MAX; n];
    for (k, &v) in interior.iter().enumerate() {
        slot[v] = k;
    }
    // A = −L_II (positive for positive weights), b = L_IB · f_B
    let m = interior.len();
    let mut rhs = DVector::zeros(m);
    for (k, &v) in interior.iter().enumerate() {
        for (c, w) in l.row(v) {
            if let Some(&x) = problem.boundary.get(&c) {
                rhs[k] += w * x;
            }
        }
    }
    let apply_a = |x: &DVector<f64>| -> DVector<f64> {
        let mut y = DVector::zeros(m);
        for (k, &v) in interior.iter().enumerate() {
            let mut s = 0.0;
            for (c, w) in l.row(v) {
                if slot[c] != usize::MAX {
                    s -= w * x[slot[c]];
                }
            }
            y[k] = s;
        }
        y
    };
    let b_norm = rhs.norm();
    let rel = |r: f64| if b_norm > 0.0 { r / b_norm } else { r };

    let (x, condition, method, iterations) = if m <= DENSE_SOLVE_LIMIT {
        let mut a = DMatrix::zeros(m, m);
        for (k, &v) in interior.iter().enumerate() {
            for (c, w) in l.row(v) {
                if slot[c] != usize::MAX {
                    a[(k, slot[c])] = -w;
                }
            }
        }
        let eig = SymmetricEigen::new(a.clone());
        let (lo, hi) = eig
            .eigenvalues
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), e| {
                (lo.min(e.abs()), hi.max(e.abs()))
            });
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !condition.is_finite() || lo <= f64::EPSILON * hi * m as f64 {
            return Err(LaplacianError::Singular { condition });
        }
        if condition > MAX_CONDITION {
            return Err(LaplacianError::IllConditioned { condition });
        }
        let x = a
            .lu()
            .solve(&rhs)
            .ok_or(LaplacianError::Singular { condition })?;
        (x, Some(condition), SolveMethod::DenseLu, 1)
    } else {
        let (x, it) = conjugate_gradient(apply_a, l, &interior, &rhs, m)?;
        (x, None, SolveMethod::ConjugateGradient, it)
    };

    let residual = rel((apply_a(&x) - &rhs).norm());
    if residual > SOLVE_TOLERANCE {
        return Err(LaplacianError::NotConverged {
            residual,
            iterations,
        });
    }
    for (k, &v) in interior.iter().enumerate() {
        values[v] = x[k];
    }
    Ok(DirichletSolution {
        values,
        residual,
        condition,
        method,
        iterations,
    })
}

fn conjugate_gradient(
    apply_a: impl Fn(&DVector<f64>) -> DVector<f64>,
    l: &GraphLaplacian,
    interior: &[usize],
    rhs: &DVector<f64>,
    m: usize,
) -> Result<(DVector<f64>, usize), LaplacianError> {
    let inv_diag = DVector::from_iterator(
        m,
        interior.iter().map(|&v| {
            let d = -l.diagonal(v);
            if d != 0.0 {
                1.0 / d
            } else {
                1.0
            }
        }),
    );
    let b_norm = rhs.norm();
    if b_norm == 0.0 {
        return Ok((DVector::zeros(m), 0));
    }
    let target = 0.1 * SOLVE_TOLERANCE * b_norm;
    let mut x = DVector::zeros(m);
    let mut r = rhs.clone();
    let mut z = r.component_mul(&inv_diag);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let max_iter = 10 * m + 100;
    for it in 1..=max_iter {
        let ap = apply_a(&p);
        let pap = p.dot(&ap);
        if pap <= 0.0 {
            return Err(LaplacianError::NotConverged {
                residual: r.norm() / b_norm,
                iterations: it,
            });
        }
        let step = rz / pap;
        x.axpy(step, &p, 1.0);
        r.axpy(-step, &ap, 1.0);
        if r.norm() <= target {
            return Ok((x, it));
        }
        z = r.component_mul(&inv_diag);
        let rz_next = r.dot(&z);
        p = &z + (rz_next / rz) * &p;
        rz = rz_next;
    }
    Err(LaplacianError::NotConverged {
        residual: r.norm() / b_norm,
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{icosphere, planar_disk, regular_tet, two_triangle_hinge};
    use std::f64::consts::PI;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    fn corner_tet() -> [Vec3; 4] {
        [v(0., 0., 0.), v(1., 0., 0.), v(0., 1., 0.), v(0., 0., 1.)]
    }

    #[test]
    fn cotan_examples() {
        let s3 = 3f64.sqrt();
        let rhombus = TriMesh::new(
            vec![
                v(0., 0., 0.),
                v(1., 0., 0.),
                v(0.5, s3 / 2.0, 0.),
                v(0.5, -s3 / 2.0, 0.),
            ],
            vec![[0, 1, 2], [1, 0, 3]],
        )
        .unwrap();
        let e = EdgeKey::new(0, 1).unwrap();
        let oracle = 0.5 * 2.0 * (PI / 3.0).cos() / (PI / 3.0).sin();
        assert!((tri_cotan_weight(&rhombus, e).unwrap() - oracle).abs() < 1e-15);
        assert!((oracle - 0.577350).abs() < 1e-6);
        let b = EdgeKey::new(0, 2).unwrap();
        assert!((tri_cotan_weight(&rhombus, b).unwrap() - 0.5 / s3).abs() < 1e-15);

        let square = TriMesh::new(
            vec![v(0., 0., 0.), v(1., 0., 0.), v(1., 1., 0.), v(0., 1., 0.)],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let d = EdgeKey::new(0, 2).unwrap();
        assert!(tri_cotan_weight(&square, d).unwrap().abs() < 1e-15);
    }

    #[test]
    fn cotan_forms_agree_on_sphere() {
        let m = icosphere(2).unwrap();
        for e in m.edge_keys() {
            let a = tri_cotan_weight(&m, e).unwrap();
            let b = tri_cotan_weight_normal_form(&m, e).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300), "{e}");
        }
    }

    #[test]
    fn primal_examples() {
        let reg = regular_tet();
        let e = EdgeKey::new(0, 1).unwrap();
        let expect = 1.0 / (12.0 * 2f64.sqrt());
        assert!((tet_primal_weight(&reg, e).unwrap() - expect).abs() < 1e-15);
        let p = corner_tet();
        // edge (1,0,0)-(0,1,0); opposite edge on the z axis has a right dihedral
        assert!(tet_primal_term(&p, 1, 2).abs() < 1e-15);
        assert!(tet_primal_term_normal(&p, 1, 2).abs() < 1e-15);
        for (a, b) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            let c = tet_primal_term(&p, a, b);
            let n = tet_primal_term_normal(&p, a, b);
            assert!((c - n).abs() < 1e-15, "{a}{b}: {c} vs {n}");
        }
    }

    #[test]
    fn dual_examples() {
        let reg = regular_tet();
        let e = EdgeKey::new(2, 3).unwrap();
        let single = 1.0 / (12.0 * 2f64.sqrt());
        assert!((tet_dual_weight(&reg, e).unwrap() - 2.0 * single).abs() < 1e-15);
        assert!((2.0 * single - 0.1178511).abs() < 1e-7);
        // cot θ / cos θ rewritten as 1 / sin θ
        let (a, b, t) = (0.7, 1.1, 2.2);
        let literal =
            0.125 * cot(t) * (2.0 * cot(a) * cot(b) / t.cos() - (cot(a).powi(2) + cot(b).powi(2)));
        assert!((dual_term(1.0, t, a, b) - literal).abs() < 1e-14);
        // right dihedral: only the 1/sin θ part survives
        let rd = dual_term(1.0, PI / 2.0, PI / 3.0, PI / 3.0);
        assert!((rd - 0.125 * 2.0 / 3.0).abs() < 1e-15);
        // on the corner tet the two schemes disagree
        let p = corner_tet();
        assert!((tet_dual_term(&p, 1, 2) - tet_primal_term(&p, 1, 2)).abs() > 1e-3);
    }

    #[test]
    fn associated_examples() {
        let third = PI / 3.0;
        let w = associated_term(1.0, PI / 2.0, third, third, 2).unwrap();
        let tangential = 0.125 / 3f64.sqrt();
        let normal = 0.125 * (0.5f64.sqrt()).powi(3);
        assert!((tangential - 0.072169).abs() < 1e-6);
        assert!((normal - 0.044194).abs() < 1e-6);
        assert!((w - (tangential + normal)).abs() < 1e-15);
        assert!((w - 0.116363).abs() < 1e-6);

        let flat = associated_term(2.0, PI, 0.9, 1.2, 2).unwrap();
        let cot_mean = 0.5 * (cot(0.9) + cot(1.2));
        assert!((flat - 2.0 / 8.0 * cot_mean).abs() < 1e-15);

        let n10 = associated_term(1.0, PI / 2.0, PI / 2.0, PI / 2.0, 10).unwrap();
        assert!((n10 - 0.025 * (0.5f64.sqrt()).powi(11)).abs() < 1e-16);
        assert_eq!(
            associated_term(1.0, 1.0, 1.0, 1.0, 1),
            Err(LaplacianError::InvalidOrder(1))
        );

        let hinge = two_triangle_hinge(PI / 2.0).unwrap();
        let e = EdgeKey::new(0, 1).unwrap();
        let (a, b) = hinge.opposite_angles(e).unwrap();
        let direct = associated_term(1.0, PI / 2.0, a, b, 2).unwrap();
        assert!((associated_weight(&hinge, e, 2).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn normal_factor_identity() {
        for k in 1..1000 {
            let t = 0.01 + (PI - 0.02) * k as f64 / 1000.0;
            for n in 2..=12 {
                assert!((normal_factor(t, n) - normal_factor_literal(t, n)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn associated_flat_limit_is_monotone() {
        let (a, b) = (0.8, 1.3);
        for n in [2, 3, 10] {
            let limit = (n as f64 - 1.0) / (4.0 * n as f64) * 0.5 * (cot(a) + cot(b));
            let gaps: Vec<f64> = (2..=6)
                .map(|k| {
                    let t = PI - 10f64.powi(-k);
                    (associated_term(1.0, t, a, b, n).unwrap() - limit).abs()
                })
                .collect();
            assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        }
    }

    #[test]
    fn assembly_basics() {
        let mut map = BTreeMap::new();
        map.insert(EdgeKey::new(0, 1).unwrap(), 2.5);
        let l = assemble(&EdgeWeights::new(Scheme::TriCotan, map), 2).unwrap();
        assert_eq!(
            l.to_dense(),
            DMatrix::from_row_slice(2, 2, &[-2.5, 2.5, 2.5, -2.5])
        );
        assert_eq!(l.apply(&[1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        assert!(l.is_symmetric());

        let mut map = BTreeMap::new();
        map.insert(EdgeKey::new(0, 1).unwrap(), 1.0);
        let l = assemble(&EdgeWeights::new(Scheme::TriCotan, map.clone()), 2).unwrap();
        assert_eq!(dirichlet_energy(&l, &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(dirichlet_energy(&l, &[3.0, 3.0]).unwrap(), 0.0);
        assert!(dirichlet_energy(&l, &[1.0]).is_err());
        assert!(assemble(&EdgeWeights::new(Scheme::TriCotan, map), 1).is_err());
    }

    #[test]
    fn assembled_schemes_have_constant_kernel() {
        let s = icosphere(2).unwrap();
        for w in [
            tri_cotan_weights(&s, Execution::Parallel).unwrap(),
            associated_weights(&s, 2, Execution::Parallel).unwrap(),
        ] {
            let l = assemble(&w, s.vertex_count()).unwrap();
            assert!(l.kernel_residual() <= 1e-10 * l.max_abs_diagonal());
            assert!(l.is_symmetric());
        }
        let t = crate::mesh::cube_tets(2).unwrap();
        for w in [
            tet_primal_weights(&t, Execution::Parallel).unwrap(),
            tet_dual_weights(&t, Execution::Parallel).unwrap(),
        ] {
            let l = assemble(&w, t.vertex_count()).unwrap();
            assert!(l.kernel_residual() <= 1e-10 * l.max_abs_diagonal());
            assert!(l.is_symmetric());
        }
    }

    #[test]
    fn energy_matches_edge_sum() {
        let s = icosphere(2).unwrap();
        let w = tri_cotan_weights(&s, Execution::Sequential).unwrap();
        let l = assemble(&w, s.vertex_count()).unwrap();
        let f: Vec<f64> = s.vertices().iter().map(|p| p.x * p.y + p.z.sin()).collect();
        let quad = dirichlet_energy(&l, &f).unwrap();
        let sum = w.edge_energy(&f);
        assert!((quad - sum).abs() <= 1e-10 * sum.abs());
    }

    #[test]
    fn sequential_matches_parallel() {
        let s = icosphere(3).unwrap();
        let a = tri_cotan_weights(&s, Execution::Sequential).unwrap();
        let b = tri_cotan_weights(&s, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dirichlet_linear_precision() {
        let disk = planar_disk(4).unwrap();
        let w = tri_cotan_weights(&disk, Execution::Sequential).unwrap();
        let l = assemble(&w, disk.vertex_count()).unwrap();
        let boundary: BTreeMap<usize, f64> = (0..disk.vertex_count())
            .filter(|&v| disk.is_boundary_vertex(v))
            .map(|v| (v, disk.vertex(v).x))
            .collect();
        let sol = solve_dirichlet(&DirichletProblem::new(l, boundary).unwrap()).unwrap();
        assert_eq!(sol.method, SolveMethod::DenseLu);
        for (p, x) in disk.vertices().iter().zip(&sol.values) {
            assert!((p.x - x).abs() < 1e-8);
        }
        assert!(sol.condition.unwrap() > 1.0);
    }

    #[test]
    fn dirichlet_trivial_cases() {
        let mut map = BTreeMap::new();
        map.insert(EdgeKey::new(0, 1).unwrap(), 1.0);
        let l = assemble(&EdgeWeights::new(Scheme::TriCotan, map), 2).unwrap();
        let all: BTreeMap<usize, f64> = [(0, 3.0), (1, -1.0)].into_iter().collect();
        let sol = solve_dirichlet(&DirichletProblem::new(l.clone(), all).unwrap()).unwrap();
        assert_eq!(sol.values, vec![3.0, -1.0]);
        assert_eq!(sol.method, SolveMethod::Trivial);
        let one: BTreeMap<usize, f64> = [(0, 4.0)].into_iter().collect();
        let sol = solve_dirichlet(&DirichletProblem::new(l.clone(), one).unwrap()).unwrap();
        assert!((sol.values[1] - 4.0).abs() < 1e-15);
        let none = BTreeMap::new();
        assert!(matches!(
            solve_dirichlet(&DirichletProblem::new(l.clone(), none).unwrap()),
            Err(LaplacianError::Singular { .. })
        ));
        let bad: BTreeMap<usize, f64> = [(5, 0.0)].into_iter().collect();
        assert!(DirichletProblem::new(l, bad).is_err());
    }

    #[test]
    fn conjugate_gradient_path() {
        let grid = crate::mesh::planar_grid(40).unwrap();
        let w = tri_cotan_weights(&grid, Execution::Parallel).unwrap();
        let l = assemble(&w, grid.vertex_count()).unwrap();
        let boundary: BTreeMap<usize, f64> = (0..grid.vertex_count())
            .filter(|&v| grid.is_boundary_vertex(v))
            .map(|v| (v, 2.0 * grid.vertex(v).x - grid.vertex(v).y))
            .collect();
        let sol = solve_dirichlet(&DirichletProblem::new(l, boundary).unwrap()).unwrap();
        assert_eq!(sol.method, SolveMethod::ConjugateGradient);
        for (p, x) in grid.vertices().iter().zip(&sol.values) {
            assert!((2.0 * p.x - p.y - x).abs() < 1e-7);
        }
    }
}
