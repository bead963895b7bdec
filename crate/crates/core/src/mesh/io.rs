//! ASCII mesh files: OFF for triangle meshes, TetGen `.node`/`.ele` pairs
//! for tetrahedral meshes.
//!
//! Writers emit 0-based indices, a comment line declaring the base, and
//! coordinates with 17 significant digits so a write/read cycle reproduces
//! every `f64` exactly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{MeshError, TetMesh, TriMesh, Vec3};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("{file}: {source}")]
    Mesh { file: String, source: MeshError },
}

fn fmt_coord(x: f64) -> String {
    format!("{x:.16e}")
}

/// Non-empty, non-comment lines with their 1-based line numbers.
struct Lines<'a> {
    file: &'a str,
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(file: &'a str, text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
                .filter(|(_, l)| !l.is_empty()),
        );
        Self {
            file,
            inner: it.peekable(),
            last_line: text.lines().count(),
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> IoError {
        IoError::Parse {
            file: self.file.to_string(),
            line,
            message: message.into(),
        }
    }

    fn next_line(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), IoError> {
        match self.inner.next() {
            Some((n, l)) => Ok((n, l.split_whitespace().collect())),
            None => Err(self.err(
                self.last_line.max(1),
                format!("unexpected end of file, expected {what}"),
            )),
        }
    }

    fn parse<T: std::str::FromStr>(
        &self,
        line: usize,
        tok: &str,
        what: &str,
    ) -> Result<T, IoError> {
        tok.parse()
            .map_err(|_| self.err(line, format!("expected {what}, found '{tok}'")))
    }

    fn expect_len(
        &self,
        line: usize,
        toks: &[&str],
        min: usize,
        what: &str,
    ) -> Result<(), IoError> {
        if toks.len() < min {
            return Err(self.err(
                line,
                format!(
                    "{what}: expected at least {min} fields, found {}",
                    toks.len()
                ),
            ));
        }
        Ok(())
    }
}

/// Parses an OFF document. `file` is used in error messages only.
pub fn parse_off(file: &str, text: &str) -> Result<TriMesh, IoError> {
    let mut lines = Lines::new(file, text);
    let (n, magic) = lines.next_line("'OFF' header")?;
    if magic.first() != Some(&"OFF") {
        return Err(lines.err(n, "missing 'OFF' magic"));
    }
    // counts may follow the magic on the same line
    let (n, counts) = if magic.len() > 1 {
        (n, magic[1..].to_vec())
    } else {
        lines.next_line("vertex/face counts")?
    };
    lines.expect_len(n, &counts, 2, "counts line")?;
    let nv: usize = lines.parse(n, counts[0], "vertex count")?;
    let nf: usize = lines.parse(n, counts[1], "face count")?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, t) = lines.next_line("vertex line")?;
        lines.expect_len(n, &t, 3, "vertex line")?;
        let x: f64 = lines.parse(n, t[0], "number")?;
        let y: f64 = lines.parse(n, t[1], "number")?;
        let z: f64 = lines.parse(n, t[2], "number")?;
        vertices.push(Vec3::new(x, y, z));
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (n, t) = lines.next_line("face line")?;
        lines.expect_len(n, &t, 1, "face line")?;
        let k: usize = lines.parse(n, t[0], "vertex count of face")?;
        if k != 3 {
            return Err(lines.err(
                n,
                format!("only triangles are supported, face has {k} vertices"),
            ));
        }
        lines.expect_len(n, &t, 4, "face line")?;
        let mut tri = [0usize; 3];
        for (slot, tok) in tri.iter_mut().zip(&t[1..4]) {
            *slot = lines.parse(n, tok, "vertex index")?;
            if *slot >= nv {
                return Err(lines.err(n, format!("vertex index {slot} out of range (nv = {nv})")));
            }
        }
        triangles.push(tri);
    }
    TriMesh::new(vertices, triangles).map_err(|source| IoError::Mesh {
        file: file.to_string(),
        source,
    })
}

pub fn write_off<W: Write>(mesh: &TriMesh, mut w: W) -> std::io::Result<()> {
    writeln!(w, "OFF")?;
    writeln!(w, "# vertex indices are 0-based")?;
    writeln!(w, "{} {} 0", mesh.vertex_count(), mesh.triangle_count())?;
    for p in mesh.vertices() {
        writeln!(
            w,
            "{} {} {}",
            fmt_coord(p.x),
            fmt_coord(p.y),
            fmt_coord(p.z)
        )?;
    }
    for t in mesh.triangles() {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

pub fn to_off_string(mesh: &TriMesh) -> String {
    let mut buf = Vec::new();
    write_off(mesh, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ascii")
}

pub fn read_off(path: impl AsRef<Path>) -> Result<TriMesh, IoError> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    parse_off(&path.display().to_string(), &text)
}

pub fn save_off(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    fs::write(path, to_off_string(mesh)).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses a TetGen node/ele pair. The index base (0 or 1) is taken from the
/// first node index and applied to the element file.
pub fn parse_tetgen(
    node_file: &str,
    node_text: &str,
    ele_file: &str,
    ele_text: &str,
) -> Result<TetMesh, IoError> {
    let mut lines = Lines::new(node_file, node_text);
    let (n, head) = lines.next_line("node header")?;
    lines.expect_len(n, &head, 2, "node header")?;
    let nv: usize = lines.parse(n, head[0], "node count")?;
    let dim: usize = lines.parse(n, head[1], "dimension")?;
    if dim != 3 {
        return Err(lines.err(n, format!("dimension must be 3, found {dim}")));
    }
    let mut vertices = Vec::with_capacity(nv);
    let mut base = 0usize;
    for k in 0..nv {
        let (n, t) = lines.next_line("node line")?;
        lines.expect_len(n, &t, 4, "node line")?;
        let id: usize = lines.parse(n, t[0], "node index")?;
        if k == 0 {
            if id > 1 {
                return Err(lines.err(n, format!("first node index must be 0 or 1, found {id}")));
            }
            base = id;
        }
        if id != k + base {
            return Err(lines.err(n, format!("expected node index {}, found {id}", k + base)));
        }
        let x: f64 = lines.parse(n, t[1], "number")?;
        let y: f64 = lines.parse(n, t[2], "number")?;
        let z: f64 = lines.parse(n, t[3], "number")?;
        vertices.push(Vec3::new(x, y, z));
    }

    let mut lines = Lines::new(ele_file, ele_text);
    let (n, head) = lines.next_line("element header")?;
    lines.expect_len(n, &head, 2, "element header")?;
    let nt: usize = lines.parse(n, head[0], "element count")?;
    let per: usize = lines.parse(n, head[1], "nodes per element")?;
    if per != 4 {
        return Err(lines.err(
            n,
            format!("only 4-node tetrahedra are supported, found {per}"),
        ));
    }
    let mut tets = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (n, t) = lines.next_line("element line")?;
        lines.expect_len(n, &t, 5, "element line")?;
        let mut tet = [0usize; 4];
        for (slot, tok) in tet.iter_mut().zip(&t[1..5]) {
            let raw: usize = lines.parse(n, tok, "node index")?;
            if raw < base || raw - base >= nv {
                return Err(lines.err(n, format!("node index {raw} out of range")));
            }
            *slot = raw - base;
        }
        tets.push(tet);
    }
    TetMesh::new(vertices, tets).map_err(|source| IoError::Mesh {
        file: ele_file.to_string(),
        source,
    })
}

pub fn write_node<W: Write>(mesh: &TetMesh, mut w: W) -> std::io::Result<()> {
    writeln!(w, "# node indices are 0-based")?;
    writeln!(w, "{} 3 0 0", mesh.vertex_count())?;
    for (i, p) in mesh.vertices().iter().enumerate() {
        writeln!(
            w,
            "{i} {} {} {}",
            fmt_coord(p.x),
            fmt_coord(p.y),
            fmt_coord(p.z)
        )?;
    }
    Ok(())
}

pub fn write_ele<W: Write>(mesh: &TetMesh, mut w: W) -> std::io::Result<()> {
    writeln!(w, "# node indices are 0-based")?;
    writeln!(w, "{} 4 0", mesh.tet_count())?;
    for (i, t) in mesh.tets().iter().enumerate() {
        writeln!(w, "{i} {} {} {} {}", t[0], t[1], t[2], t[3])?;
    }
    Ok(())
}

/// `foo`, `foo.node` or `foo.ele` → (`foo.node`, `foo.ele`).
pub fn tetgen_paths(path: impl AsRef<Path>) -> (PathBuf, PathBuf) {
    let path = path.as_ref();
    let stem = match path.extension().and_then(|e| e.to_str()) {
        Some("node") | Some("ele") => path.with_extension(""),
        _ => path.to_path_buf(),
    };
    let mut node = stem.clone().into_os_string();
    node.push(".node");
    let mut ele = stem.into_os_string();
    ele.push(".ele");
    (node.into(), ele.into())
}

pub fn read_tetgen(path: impl AsRef<Path>) -> Result<TetMesh, IoError> {
    let (node, ele) = tetgen_paths(path);
    let node_text = read_to_string(&node)?;
    let ele_text = read_to_string(&ele)?;
    parse_tetgen(
        &node.display().to_string(),
        &node_text,
        &ele.display().to_string(),
        &ele_text,
    )
}

pub fn save_tetgen(mesh: &TetMesh, path: impl AsRef<Path>) -> Result<(PathBuf, PathBuf), IoError> {
    let (node, ele) = tetgen_paths(path);
    let io = |p: &Path, e: std::io::Error| IoError::Io {
        path: p.display().to_string(),
        source: e,
    };
    let mut buf = Vec::new();
    write_node(mesh, &mut buf).map_err(|e| io(&node, e))?;
    fs::write(&node, &buf).map_err(|e| io(&node, e))?;
    buf.clear();
    write_ele(mesh, &mut buf).map_err(|e| io(&ele, e))?;
    fs::write(&ele, &buf).map_err(|e| io(&ele, e))?;
    Ok((node, ele))
}

fn read_to_string(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}
