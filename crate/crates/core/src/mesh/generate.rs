//! Test-fixture mesh generators.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EdgeKey, MeshError, TetMesh, TriMesh, Vec3};

/// Unit icosphere: an icosahedron refined `level` times by 1→4 midpoint
/// subdivision, every new vertex projected back onto the sphere.
///
/// `level k` has `10·4^k + 2` vertices and `20·4^k` outward-wound faces.
pub fn icosphere(level: u32) -> Result<TriMesh, MeshError> {
    if level > 8 {
        return Err(MeshError::InvalidParameter(format!(
            "icosphere level {level} is above the supported maximum 8"
        )));
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for f in &mut faces {
        let [a, b, c] = f.map(|i| vertices[i]);
        if (b - a).cross(&(c - a)).dot(&(a + b + c)) < 0.0 {
            f.swap(1, 2);
        }
    }

    for _ in 0..level {
        let mut midpoint: HashMap<EdgeKey, usize> = HashMap::with_capacity(faces.len() * 3 / 2);
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let mut mid = |p: usize, q: usize| -> usize {
                let key = EdgeKey::new(p, q).expect("distinct");
                *midpoint.entry(key).or_insert_with(|| {
                    vertices.push(((vertices[p] + vertices[q]) * 0.5).normalize());
                    vertices.len() - 1
                })
            };
            let ab = mid(a, b);
            let bc = mid(b, c);
            let ca = mid(c, a);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriMesh::new(vertices, faces)
}

/// Regular tetrahedron with unit edges.
pub fn regular_tet() -> TetMesh {
    let s3 = 3f64.sqrt();
    let vertices = vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.5, s3 / 2.0, 0.0),
        Vec3::new(0.5, s3 / 6.0, (2.0f64 / 3.0).sqrt()),
    ];
    TetMesh::new(vertices, vec![[0, 1, 2, 3]]).expect("regular tetrahedron is valid")
}

/// Unit cube `[0,1]³` cut into `n³` cells, each split into six tets around
/// its main diagonal (`6n³` tets in total).
pub fn cube_tets(n: usize) -> Result<TetMesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameter(
            "cube resolution must be ≥ 1".into(),
        ));
    }
    let h = 1.0 / n as f64;
    let idx = |x: usize, y: usize, z: usize| (z * (n + 1) + y) * (n + 1) + x;
    let mut vertices = Vec::with_capacity((n + 1).pow(3));
    for z in 0..=n {
        for y in 0..=n {
            for x in 0..=n {
                vertices.push(Vec3::new(x as f64 * h, y as f64 * h, z as f64 * h));
            }
        }
    }
    const AXIS_ORDERS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut tets = Vec::with_capacity(6 * n * n * n);
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                for order in AXIS_ORDERS {
                    let mut c = [x, y, z];
                    let mut tet = [idx(c[0], c[1], c[2]); 4];
                    for (s, &axis) in order.iter().enumerate() {
                        c[axis] += 1;
                        tet[s + 1] = idx(c[0], c[1], c[2]);
                    }
                    tets.push(tet);
                }
            }
        }
    }
    TetMesh::new(vertices, tets)
}

/// Two unit-base triangles sharing the edge `(0,0,0)–(1,0,0)` with interior
/// dihedral angle `theta` between them.
///
/// Vertex 2 is at `(½, 1, 0)`, vertex 3 is that point rotated by `theta`
/// about the x-axis, so `theta = π` is a flat rhombus.
pub fn two_triangle_hinge(theta: f64) -> Result<TriMesh, MeshError> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(MeshError::InvalidParameter(format!(
            "hinge angle {theta} outside (0, π]"
        )));
    }
    let vertices = vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(1.0, 0.0, 0.0),
        Vec3::new(0.5, 1.0, 0.0),
        Vec3::new(0.5, theta.cos(), theta.sin()),
    ];
    TriMesh::new(vertices, vec![[0, 1, 2], [1, 0, 3]])
}

/// Hexagonal patch of the unit-spacing triangular lattice in the plane
/// `z = 0`, `rings` lattice steps from the centre vertex (vertex 0).
pub fn planar_disk(rings: usize) -> Result<TriMesh, MeshError> {
    if rings == 0 {
        return Err(MeshError::InvalidParameter(
            "disk needs at least one ring".into(),
        ));
    }
    let r = rings as i64;
    let inside = |q: i64, s: i64| q.abs() <= r && s.abs() <= r && (q + s).abs() <= r;
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut coords = vec![(0i64, 0i64)];
    for q in -r..=r {
        for s in -r..=r {
            if inside(q, s) && (q, s) != (0, 0) {
                coords.push((q, s));
            }
        }
    }
    let s3 = 3f64.sqrt();
    let vertices: Vec<Vec3> = coords
        .iter()
        .enumerate()
        .map(|(i, &(q, s))| {
            index.insert((q, s), i);
            Vec3::new(q as f64 + 0.5 * s as f64, 0.5 * s3 * s as f64, 0.0)
        })
        .collect();
    let mut triangles = Vec::new();
    for (q, s) in (-r - 1..=r).flat_map(|q| (-r - 1..=r).map(move |s| (q, s))) {
        let up = [(q, s), (q + 1, s), (q, s + 1)];
        let down = [(q + 1, s), (q + 1, s + 1), (q, s + 1)];
        for tri in [up, down] {
            if tri.iter().all(|&(a, b)| inside(a, b)) {
                triangles.push(tri.map(|c| index[&c]));
            }
        }
    }
    triangles.sort_unstable();
    TriMesh::new(vertices, triangles)
}

/// Unit square in `z = 0` with `n × n` cells, each split along its
/// `(0,0)–(1,1)` diagonal.
pub fn planar_grid(n: usize) -> Result<TriMesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameter(
            "grid needs at least one cell".into(),
        ));
    }
    let h = 1.0 / n as f64;
    let idx = |x: usize, y: usize| y * (n + 1) + x;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for y in 0..=n {
        for x in 0..=n {
            vertices.push(Vec3::new(x as f64 * h, y as f64 * h, 0.0));
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for y in 0..n {
        for x in 0..n {
            let (a, b, c, d) = (idx(x, y), idx(x + 1, y), idx(x + 1, y + 1), idx(x, y + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    TriMesh::new(vertices, triangles)
}

/// Closed fan around an apex at `(0, 0, height)` over a regular `k`-gon on
/// the unit circle. The apex is vertex 0 and is interior.
pub fn cone_fan(k: usize, height: f64) -> Result<TriMesh, MeshError> {
    if k < 3 || !height.is_finite() {
        return Err(MeshError::InvalidParameter(format!(
            "cone fan needs k ≥ 3 and finite height (k = {k}, height = {height})"
        )));
    }
    let mut vertices = vec![Vec3::new(0.0, 0.0, height)];
    for i in 0..k {
        let a = 2.0 * PI * i as f64 / k as f64;
        vertices.push(Vec3::new(a.cos(), a.sin(), 0.0));
    }
    let triangles = (0..k).map(|i| [0, 1 + i, 1 + (i + 1) % k]).collect();
    TriMesh::new(vertices, triangles)
}

/// Copy of `mesh` with every interior vertex moved by a uniform random
/// offset of at most `amount` in x and y (z unchanged).
pub fn jitter_interior(mesh: &TriMesh, amount: f64, seed: u64) -> Result<TriMesh, MeshError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(v, p)| {
            let dx = rng.random_range(-amount..=amount);
            let dy = rng.random_range(-amount..=amount);
            if mesh.is_boundary_vertex(v) {
                *p
            } else {
                p + Vec3::new(dx, dy, 0.0)
            }
        })
        .collect();
    TriMesh::new(vertices, mesh.triangles().to_vec())
}

/// Random convex fan: an apex (vertex 0) above a closed ring of `k`
/// vertices at sorted random angles (consecutive gaps below `π/2`), random
/// radii in `[0.5, 1.5]` and heights in `[−0.4, 0]`.
pub fn random_fan(k: usize, seed: u64) -> Result<TriMesh, MeshError> {
    if k < 5 {
        return Err(MeshError::InvalidParameter(format!(
            "random fan needs at least 5 ring vertices, got {k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // jittered equal spacing keeps every gap below π/2 for k ≥ 5
    let step = 2.0 * PI / k as f64;
    let offset = rng.random_range(0.0..2.0 * PI);
    let mut vertices = vec![Vec3::new(
        rng.random_range(-0.1..0.1),
        rng.random_range(-0.1..0.1),
        rng.random_range(0.2..1.0),
    )];
    for i in 0..k {
        let a = offset + step * (i as f64 + rng.random_range(-0.3..0.3));
        let r = rng.random_range(0.5..1.5);
        vertices.push(Vec3::new(
            r * a.cos(),
            r * a.sin(),
            rng.random_range(-0.4..0.0),
        ));
    }
    let triangles = (0..k).map(|i| [0, 1 + i, 1 + (i + 1) % k]).collect();
    TriMesh::new(vertices, triangles)
}
