//! Triangle meshes and STL reading/writing.
//!
//! Both binary and ASCII STL are accepted. Stored facet normals are kept only
//! as informational data; every computation derives orientation from the
//! vertex winding instead.

use nalgebra::Matrix3;
use thiserror::Error;

use crate::Vec3;

const HEADER_LEN: usize = 80;
const RECORD_LEN: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("input is empty")]
    EmptyInput,
    #[error("truncated STL: {declared} triangles declared, only {available} bytes of records present")]
    TruncatedFile { declared: u32, available: usize },
    #[error("malformed ASCII STL at line {line}: {message}")]
    MalformedAscii { line: usize, message: String },
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("mesh has zero surface area")]
    ZeroArea,
    #[error("triangle {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("rotation is not orthonormal (max deviation {deviation:e})")]
    NonOrthonormalRotation { deviation: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triangle {
    pub v0: Vec3,
    pub v1: Vec3,
    pub v2: Vec3,
    /// Normal as stored in the source file, if it was a unit vector.
    pub normal: Option<Vec3>,
}

impl Triangle {
    pub fn new(v0: Vec3, v1: Vec3, v2: Vec3) -> Self {
        Triangle { v0, v1, v2, normal: None }
    }

    fn with_stored_normal(mut self, n: Vec3) -> Self {
        let len = n.norm();
        if (0.99..=1.01).contains(&len) {
            self.normal = Some(n);
        }
        self
    }

    pub fn area(&self) -> f64 {
        0.5 * (self.v1 - self.v0).cross(&(self.v2 - self.v0)).norm()
    }

    pub fn centroid(&self) -> Vec3 {
        (self.v0 + self.v1 + self.v2) / 3.0
    }

    /// Unit normal from the winding order, or `None` for degenerate triangles.
    pub fn winding_normal(&self) -> Option<Vec3> {
        let n = (self.v1 - self.v0).cross(&(self.v2 - self.v0));
        let len = n.norm();
        (len > 0.0).then(|| n / len)
    }

    fn is_finite(&self) -> bool {
        [self.v0, self.v1, self.v2]
            .iter()
            .all(|v| v.iter().all(|c| c.is_finite()))
    }
}

/// A non-empty triangle soup with positive total area.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    triangles: Vec<Triangle>,
    source_id: String,
}

impl TriangleMesh {
    pub fn new(triangles: Vec<Triangle>, source_id: impl Into<String>) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::EmptyMesh);
        }
        if let Some(index) = triangles.iter().position(|t| !t.is_finite()) {
            return Err(MeshError::NonFinite { index });
        }
        let mesh = TriangleMesh { triangles, source_id: source_id.into() };
        if !(surface_area(&mesh) > 0.0) {
            return Err(MeshError::ZeroArea);
        }
        Ok(mesh)
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn with_source_id(mut self, id: impl Into<String>) -> Self {
        self.source_id = id.into();
        self
    }

    /// Applies `f` to every vertex, dropping stored normals.
    pub fn map_vertices(&self, f: impl Fn(&Vec3) -> Vec3) -> Result<Self, MeshError> {
        let triangles = self
            .triangles
            .iter()
            .map(|t| Triangle::new(f(&t.v0), f(&t.v1), f(&t.v2)))
            .collect();
        TriangleMesh::new(triangles, self.source_id.clone())
    }
}

pub fn surface_area(mesh: &TriangleMesh) -> f64 {
    mesh.triangles.iter().map(Triangle::area).sum()
}

/// Area-weighted mean of the triangle centroids.
pub fn area_centroid(mesh: &TriangleMesh) -> Vec3 {
    let mut weighted = Vec3::zeros();
    let mut total = 0.0;
    for t in &mesh.triangles {
        let a = t.area();
        weighted += t.centroid() * a;
        total += a;
    }
    weighted / total
}

/// Maps every vertex `v` to `rotation * v + translation`.
pub fn apply_rigid(
    mesh: &TriangleMesh,
    rotation: &Matrix3<f64>,
    translation: &Vec3,
) -> Result<TriangleMesh, MeshError> {
    let deviation = (rotation.transpose() * rotation - Matrix3::identity()).amax();
    if !(deviation <= 1e-9) {
        return Err(MeshError::NonOrthonormalRotation { deviation });
    }
    mesh.map_vertices(|v| rotation * v + translation)
}

/// Parses binary or ASCII STL.
///
/// A file is read as ASCII only when it begins with `solid`, contains a
/// `facet` token, and does not also have the exact length of a binary file
/// with non-text content.
pub fn parse_stl(bytes: &[u8]) -> Result<TriangleMesh, MeshError> {
    if bytes.is_empty() {
        return Err(MeshError::EmptyInput);
    }
    if looks_ascii(bytes) {
        parse_ascii(bytes)
    } else {
        parse_binary(bytes)
    }
}

fn looks_ascii(bytes: &[u8]) -> bool {
    let start = bytes.iter().position(|b| !b.is_ascii_whitespace()).unwrap_or(bytes.len());
    let body = &bytes[start..];
    if !body.starts_with(b"solid") || !contains(bytes, b"facet") {
        return false;
    }
    if bytes.len() >= HEADER_LEN + 4 {
        let count = read_u32(bytes, HEADER_LEN) as usize;
        let binary_len = count.checked_mul(RECORD_LEN).and_then(|n| n.checked_add(HEADER_LEN + 4));
        if binary_len == Some(bytes.len()) {
            // Exact binary length: trust it unless the whole file is text.
            return bytes.iter().all(|&b| b.is_ascii_graphic() || b.is_ascii_whitespace());
        }
    }
    true
}

fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    haystack.windows(needle.len()).any(|w| w == needle)
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn read_vec(bytes: &[u8], at: usize) -> Vec3 {
    let f = |o: usize| f32::from_le_bytes(bytes[at + o..at + o + 4].try_into().unwrap()) as f64;
    Vec3::new(f(0), f(4), f(8))
}

fn parse_binary(bytes: &[u8]) -> Result<TriangleMesh, MeshError> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(MeshError::TruncatedFile {
            declared: 0,
            available: bytes.len().saturating_sub(HEADER_LEN + 4),
        });
    }
    let declared = read_u32(bytes, HEADER_LEN);
    if declared == 0 {
        return Err(MeshError::EmptyMesh);
    }
    let records = &bytes[HEADER_LEN + 4..];
    if (records.len() as u64) < declared as u64 * RECORD_LEN as u64 {
        return Err(MeshError::TruncatedFile { declared, available: records.len() });
    }
    let triangles = records
        .chunks_exact(RECORD_LEN)
        .take(declared as usize)
        .map(|r| {
            Triangle::new(read_vec(r, 12), read_vec(r, 24), read_vec(r, 36))
                .with_stored_normal(read_vec(r, 0))
        })
        .collect();
    TriangleMesh::new(triangles, "")
}

struct Tokens<'a> {
    inner: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        let tok = self.inner.get(self.pos).copied();
        if let Some((line, _)) = tok {
            self.last_line = line;
            self.pos += 1;
        }
        tok
    }

    fn peek(&self) -> Option<&'a str> {
        self.inner.get(self.pos).map(|(_, t)| *t)
    }

    fn fail(&self, message: impl Into<String>) -> MeshError {
        MeshError::MalformedAscii { line: self.last_line, message: message.into() }
    }

    fn expect(&mut self, keyword: &str) -> Result<(), MeshError> {
        match self.next() {
            Some((_, t)) if t.eq_ignore_ascii_case(keyword) => Ok(()),
            Some((_, t)) => Err(self.fail(format!("expected `{keyword}`, found `{t}`"))),
            None => Err(self.fail(format!("expected `{keyword}`, found end of file"))),
        }
    }

    fn number(&mut self) -> Result<f64, MeshError> {
        match self.next() {
            Some((_, t)) => t
                .parse::<f32>()
                .map(f64::from)
                .map_err(|_| self.fail(format!("invalid number `{t}`"))),
            None => Err(self.fail("expected number, found end of file")),
        }
    }

    fn vec3(&mut self) -> Result<Vec3, MeshError> {
        Ok(Vec3::new(self.number()?, self.number()?, self.number()?))
    }
}

fn parse_ascii(bytes: &[u8]) -> Result<TriangleMesh, MeshError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| MeshError::MalformedAscii { line: 1, message: e.to_string() })?;
    let mut lines = text.lines().enumerate();
    // The first line holds `solid` plus a free-form name.
    let first = lines.by_ref().find(|(_, l)| !l.trim().is_empty());
    let first_line = first.map(|(i, _)| i + 1).unwrap_or(1);
    let inner = lines
        .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)))
        .collect();
    let mut tokens = Tokens { inner, pos: 0, last_line: first_line };

    let mut triangles = Vec::new();
    loop {
        match tokens.peek() {
            Some(t) if t.eq_ignore_ascii_case("facet") => {
                tokens.next();
                tokens.expect("normal")?;
                let normal = tokens.vec3()?;
                tokens.expect("outer")?;
                tokens.expect("loop")?;
                let mut v = [Vec3::zeros(); 3];
                for slot in &mut v {
                    tokens.expect("vertex")?;
                    *slot = tokens.vec3()?;
                }
                tokens.expect("endloop")?;
                tokens.expect("endfacet")?;
                triangles.push(Triangle::new(v[0], v[1], v[2]).with_stored_normal(normal));
            }
            Some(t) if t.eq_ignore_ascii_case("endsolid") => break,
            Some(t) => {
                let t = t.to_owned();
                tokens.next();
                return Err(tokens.fail(format!("expected `facet` or `endsolid`, found `{t}`")));
            }
            None => return Err(tokens.fail("missing `endsolid`")),
        }
    }
    if triangles.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    TriangleMesh::new(triangles, "")
}

/// Serializes to binary STL. Vertices are narrowed to `f32`; a stored
/// normal is written back as is, otherwise it is computed from the winding.
pub fn write_binary_stl(mesh: &TriangleMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 + RECORD_LEN * mesh.len());
    let mut header = [0u8; HEADER_LEN];
    let tag = b"binary STL";
    header[..tag.len()].copy_from_slice(tag);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.len() as u32).to_le_bytes());
    for t in mesh.triangles() {
        let n = t.normal.or_else(|| t.winding_normal()).unwrap_or_else(Vec3::zeros);
        for v in [n, t.v0, t.v1, t.v2] {
            for c in v.iter() {
                out.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives;
    use proptest::prelude::*;

    fn right_triangle() -> TriangleMesh {
        TriangleMesh::new(
            vec![Triangle::new(Vec3::zeros(), Vec3::x(), Vec3::y())],
            "tri",
        )
        .unwrap()
    }

    fn binary_with_count(count: u32, records: usize) -> Vec<u8> {
        let mut bytes = vec![0u8; HEADER_LEN];
        bytes.extend_from_slice(&count.to_le_bytes());
        for _ in 0..records {
            let mut rec = [0u8; RECORD_LEN];
            // v1 = (1,0,0), v2 = (0,1,0)
            rec[24..28].copy_from_slice(&1f32.to_le_bytes());
            rec[40..44].copy_from_slice(&1f32.to_le_bytes());
            bytes.extend_from_slice(&rec);
        }
        bytes
    }

    #[test]
    fn minimal_binary_file() {
        let mesh = parse_stl(&binary_with_count(1, 1)).unwrap();
        assert_eq!(mesh.len(), 1);
        let t = &mesh.triangles()[0];
        assert_eq!(t.v0, Vec3::zeros());
        assert_eq!(t.v1, Vec3::x());
        assert_eq!(t.v2, Vec3::y());
        // all-zero stored normal is not unit length
        assert_eq!(t.normal, None);
    }

    #[test]
    fn truncated_binary_file() {
        let err = parse_stl(&binary_with_count(5, 3)).unwrap_err();
        assert_eq!(err, MeshError::TruncatedFile { declared: 5, available: 150 });
        assert!(matches!(parse_stl(&[0u8; 40]), Err(MeshError::TruncatedFile { .. })));
    }

    #[test]
    fn zero_count_is_empty_mesh() {
        assert_eq!(parse_stl(&binary_with_count(0, 0)), Err(MeshError::EmptyMesh));
        assert_eq!(parse_stl(&[]), Err(MeshError::EmptyInput));
    }

    #[test]
    fn unit_cube_area_is_six() {
        let cube = primitives::unit_cube().to_mesh("cube").unwrap();
        let mesh = parse_stl(&write_binary_stl(&cube)).unwrap();
        assert_eq!(mesh.len(), 12);
        assert_eq!(surface_area(&mesh), 6.0);
        let c = area_centroid(&mesh);
        assert!((c - Vec3::new(0.5, 0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn centered_cube_centroid_is_origin() {
        let cube = primitives::unit_cube().to_mesh("cube").unwrap();
        let centered = cube.map_vertices(|v| v - Vec3::repeat(0.5)).unwrap();
        assert!(area_centroid(&centered).norm() < 1e-15);
    }

    #[test]
    fn right_triangle_area_and_centroid() {
        let mesh = right_triangle();
        assert_eq!(surface_area(&mesh), 0.5);
        let c = area_centroid(&mesh);
        assert!((c - Vec3::new(1.0 / 3.0, 1.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ascii_file_parses() {
        let text = "solid test facet inside name\n\
            facet normal 0 0 1\n outer loop\n  vertex 0 0 0\n  vertex 1 0 0\n  vertex 0 1 0\n endloop\nendfacet\n\
            facet normal 0 0 -1\n outer loop\n  vertex 0 0 0\n  vertex 0 1 0\n  vertex 1 0 0\n endloop\nendfacet\n\
            endsolid test\n";
        let mesh = parse_stl(text.as_bytes()).unwrap();
        assert_eq!(mesh.len(), 2);
        assert_eq!(mesh.triangles()[0].normal, Some(Vec3::z()));
        assert_eq!(mesh.triangles()[1].v1, Vec3::y());
    }

    #[test]
    fn ascii_grammar_errors_carry_line() {
        let text = "solid x\nfacet normal 0 0 1\nouter loop\nvertex 0 0 0\nvertex 1 0\nendloop\nendfacet\nendsolid\n";
        match parse_stl(text.as_bytes()) {
            Err(MeshError::MalformedAscii { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
        let missing_end = "solid x\nfacet normal 0 0 1\nouter loop\nvertex 0 0 0\nvertex 1 0 0\nvertex 0 1 0\nendloop\nendfacet\n";
        assert!(matches!(
            parse_stl(missing_end.as_bytes()),
            Err(MeshError::MalformedAscii { .. })
        ));
    }

    #[test]
    fn binary_starting_with_solid_is_binary() {
        let mut bytes = binary_with_count(1, 1);
        bytes[..11].copy_from_slice(b"solid facet");
        let mesh = parse_stl(&bytes).unwrap();
        assert_eq!(mesh.len(), 1);
    }

    #[test]
    fn identity_transform_is_bitwise() {
        let mesh = primitives::icosphere(1).to_mesh("s").unwrap();
        let moved = apply_rigid(&mesh, &Matrix3::identity(), &Vec3::zeros()).unwrap();
        for (a, b) in mesh.triangles().iter().zip(moved.triangles()) {
            assert_eq!((a.v0, a.v1, a.v2), (b.v0, b.v1, b.v2));
        }
    }

    #[test]
    fn quarter_turn_about_z() {
        let rot = nalgebra::Rotation3::from_axis_angle(&Vec3::z_axis(), std::f64::consts::FRAC_PI_2);
        let moved = apply_rigid(&right_triangle(), rot.matrix(), &Vec3::zeros()).unwrap();
        assert!((moved.triangles()[0].v1 - Vec3::y()).norm() < 1e-15);
    }

    #[test]
    fn rotation_then_inverse_restores_vertices() {
        let mesh = primitives::torus(1.0, 0.3, 12, 8).to_mesh("t").unwrap();
        let rot = nalgebra::Rotation3::from_euler_angles(0.3, -1.1, 2.0);
        let shift = Vec3::new(1.0, -2.0, 0.5);
        let there = apply_rigid(&mesh, rot.matrix(), &shift).unwrap();
        let back = apply_rigid(&there, rot.inverse().matrix(), &Vec3::zeros())
            .unwrap()
            .map_vertices(|v| v - rot.inverse() * shift)
            .unwrap();
        for (a, b) in mesh.triangles().iter().zip(back.triangles()) {
            assert!((a.v0 - b.v0).norm() < 1e-12);
            assert!((a.v2 - b.v2).norm() < 1e-12);
        }
        let rel = (surface_area(&there) - surface_area(&mesh)).abs() / surface_area(&mesh);
        assert!(rel < 1e-12);
    }

    #[test]
    fn non_orthonormal_rotation_rejected() {
        let m = Matrix3::identity() * 1.01;
        assert!(matches!(
            apply_rigid(&right_triangle(), &m, &Vec3::zeros()),
            Err(MeshError::NonOrthonormalRotation { .. })
        ));
    }

    #[test]
    fn degenerate_triangles_are_kept() {
        let tris = vec![
            Triangle::new(Vec3::zeros(), Vec3::x(), Vec3::y()),
            Triangle::new(Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0),
        ];
        let mesh = TriangleMesh::new(tris, "d").unwrap();
        assert_eq!(mesh.len(), 2);
        let only_degenerate = vec![Triangle::new(Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0)];
        assert_eq!(TriangleMesh::new(only_degenerate, "d"), Err(MeshError::ZeroArea));
    }

    proptest! {
        #[test]
        fn parse_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
            let _ = parse_stl(&bytes);
        }

        #[test]
        fn parse_never_panics_on_text(body in "solid [a-z ]{0,8}\n(facet normal|vertex|outer loop|endloop|endfacet| 1e3| -0.5| nan|\n){0,40}(endsolid)?") {
            let _ = parse_stl(body.as_bytes());
        }

        #[test]
        fn binary_round_trip_is_bit_exact(
            coords in proptest::collection::vec(-1e4f32..1e4f32, 9..90)
        ) {
            let tris: Vec<Triangle> = coords
                .chunks_exact(9)
                .map(|c| {
                    let v = |i: usize| Vec3::new(c[i] as f64, c[i + 1] as f64, c[i + 2] as f64);
                    Triangle::new(v(0), v(3), v(6))
                })
                .collect();
            prop_assume!(tris.iter().map(Triangle::area).sum::<f64>() > 0.0);
            let mesh = TriangleMesh::new(tris, "p").unwrap();
            let parsed = parse_stl(&write_binary_stl(&mesh)).unwrap();
            let again = parse_stl(&write_binary_stl(&parsed)).unwrap();
            for (a, b) in mesh.triangles().iter().zip(again.triangles()) {
                for (x, y) in [(a.v0, b.v0), (a.v1, b.v1), (a.v2, b.v2)] {
                    prop_assert_eq!(x.map(f64::to_bits), y.map(f64::to_bits));
                }
            }
        }

        #[test]
        fn area_and_centroid_ignore_order(seed in 0u64..1000) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mesh = primitives::cylinder(0.7, 2.0, 10).to_mesh("c").unwrap();
            let mut tris = mesh.triangles().to_vec();
            tris.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled = TriangleMesh::new(tris, "c").unwrap();
            prop_assert!((surface_area(&mesh) - surface_area(&shuffled)).abs() < 1e-12);
            prop_assert!((area_centroid(&mesh) - area_centroid(&shuffled)).norm() < 1e-12);
        }
    }
}
