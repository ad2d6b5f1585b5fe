//! Parametric primitive meshes used for synthetic corpora and test fixtures.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::mesh::{MeshError, Triangle, TriangleMesh};
use crate::Vec3;

/// Shared-vertex mesh; perturbing a vertex moves every face that uses it, so
/// closed primitives stay closed.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

impl IndexedMesh {
    pub fn to_mesh(&self, source_id: &str) -> Result<TriangleMesh, MeshError> {
        let triangles = self
            .faces
            .iter()
            .map(|f| Triangle::new(self.vertices[f[0]], self.vertices[f[1]], self.vertices[f[2]]))
            .collect();
        TriangleMesh::new(triangles, source_id)
    }

    pub fn scaled(mut self, factors: Vec3) -> Self {
        for v in &mut self.vertices {
            *v = v.component_mul(&factors);
        }
        self
    }

    pub fn translated(mut self, offset: Vec3) -> Self {
        for v in &mut self.vertices {
            *v += offset;
        }
        self
    }

    /// Largest vertex distance from the vertex mean.
    pub fn radius(&self) -> f64 {
        let mean = self.vertices.iter().sum::<Vec3>() / self.vertices.len() as f64;
        self.vertices.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max)
    }

    /// Displaces each vertex by a uniform offset in `[-eps, eps]^3`, with
    /// `eps` relative to [`IndexedMesh::radius`].
    pub fn jittered<R: Rng>(mut self, eps: f64, rng: &mut R) -> Self {
        if eps > 0.0 {
            let amplitude = eps * self.radius();
            for v in &mut self.vertices {
                *v += Vec3::new(
                    rng.random_range(-1.0..=1.0),
                    rng.random_range(-1.0..=1.0),
                    rng.random_range(-1.0..=1.0),
                ) * amplitude;
            }
        }
        self
    }
}

/// Axis-aligned cube `[0,1]^3`, 12 outward-wound triangles.
pub fn unit_cube() -> IndexedMesh {
    let vertices = (0..8)
        .map(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
        .collect();
    let faces = vec![
        [0, 2, 1], [1, 2, 3], // z = 0
        [4, 5, 6], [5, 7, 6], // z = 1
        [0, 1, 4], [1, 5, 4], // y = 0
        [2, 6, 3], [3, 6, 7], // y = 1
        [0, 4, 2], [2, 4, 6], // x = 0
        [1, 3, 5], [3, 7, 5], // x = 1
    ];
    IndexedMesh { vertices, faces }
}

/// Box with the given edge lengths, centered at the origin.
pub fn cuboid(size: Vec3) -> IndexedMesh {
    unit_cube().translated(Vec3::repeat(-0.5)).scaled(size)
}

/// Unit-radius icosphere: an icosahedron subdivided `level` times.
pub fn icosphere(level: u32) -> IndexedMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, t, 0.0), (1.0, t, 0.0), (-1.0, -t, 0.0), (1.0, -t, 0.0),
        (0.0, -1.0, t), (0.0, 1.0, t), (0.0, -1.0, -t), (0.0, 1.0, -t),
        (t, 0.0, -1.0), (t, 0.0, 1.0), (-t, 0.0, -1.0), (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec3>| {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                vertices.push(((vertices[a] + vertices[b]) / 2.0).normalize());
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    IndexedMesh { vertices, faces }
}

/// Icosphere with a smooth radial bump of relative `height` centered on
/// `direction`; `width` is the angular standard deviation in radians.
pub fn bumped_sphere(level: u32, direction: Vec3, height: f64, width: f64) -> IndexedMesh {
    let dir = direction.normalize();
    let mut mesh = icosphere(level);
    for v in &mut mesh.vertices {
        let angle = v.dot(&dir).clamp(-1.0, 1.0).acos();
        *v *= 1.0 + height * (-(angle * angle) / (2.0 * width * width)).exp();
    }
    mesh
}

/// Closed cylinder along z, centered at the origin.
pub fn cylinder(radius: f64, height: f64, segments: usize) -> IndexedMesh {
    let segments = segments.max(3);
    let h = height / 2.0;
    let mut vertices = vec![Vec3::new(0.0, 0.0, -h), Vec3::new(0.0, 0.0, h)];
    for i in 0..segments {
        let a = TAU * i as f64 / segments as f64;
        let (s, c) = a.sin_cos();
        vertices.push(Vec3::new(radius * c, radius * s, -h));
        vertices.push(Vec3::new(radius * c, radius * s, h));
    }
    let mut faces = Vec::with_capacity(segments * 4);
    for i in 0..segments {
        let j = (i + 1) % segments;
        let (b0, t0, b1, t1) = (2 + 2 * i, 3 + 2 * i, 2 + 2 * j, 3 + 2 * j);
        faces.push([0, b1, b0]);
        faces.push([1, t0, t1]);
        faces.push([b0, b1, t1]);
        faces.push([b0, t1, t0]);
    }
    IndexedMesh { vertices, faces }
}

/// Torus around the z axis.
pub fn torus(major: f64, minor: f64, major_segments: usize, minor_segments: usize) -> IndexedMesh {
    let (nu, nv) = (major_segments.max(3), minor_segments.max(3));
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = TAU * i as f64 / nu as f64;
        for j in 0..nv {
            let v = TAU * j as f64 / nv as f64;
            let r = major + minor * v.cos();
            vertices.push(Vec3::new(r * u.cos(), r * u.sin(), minor * v.sin()));
        }
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(nu * nv * 2);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    IndexedMesh { vertices, faces }
}

/// Surface of revolution profile helper: a cone with apex on +z.
pub fn cone(radius: f64, height: f64, segments: usize) -> IndexedMesh {
    let segments = segments.max(3);
    let mut vertices = vec![Vec3::new(0.0, 0.0, -height / 2.0), Vec3::new(0.0, 0.0, height / 2.0)];
    for i in 0..segments {
        let a = TAU * i as f64 / segments as f64;
        vertices.push(Vec3::new(radius * a.cos(), radius * a.sin(), -height / 2.0));
    }
    let mut faces = Vec::with_capacity(segments * 2);
    for i in 0..segments {
        let (r0, r1) = (2 + i, 2 + (i + 1) % segments);
        faces.push([0, r1, r0]);
        faces.push([1, r0, r1]);
    }
    IndexedMesh { vertices, faces }
}

/// Exact surface area of a sphere of radius `r`, for fixture checks.
pub fn sphere_area(r: f64) -> f64 {
    4.0 * PI * r * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{area_centroid, surface_area};

    #[test]
    fn icosphere_counts_and_area() {
        let s = icosphere(3);
        assert_eq!(s.faces.len(), 20 * 64);
        assert_eq!(s.vertices.len(), 642);
        let area = surface_area(&s.to_mesh("s").unwrap());
        assert!((area - sphere_area(1.0)).abs() / sphere_area(1.0) < 0.01);
    }

    #[test]
    fn closed_primitives_are_outward_wound() {
        for mesh in [
            unit_cube().translated(Vec3::repeat(-0.5)),
            icosphere(2),
            cylinder(0.5, 1.5, 16),
            torus(1.0, 0.3, 16, 8),
            cone(0.5, 1.0, 16),
        ] {
            let tm = mesh.to_mesh("p").unwrap();
            let c = area_centroid(&tm);
            // Divergence theorem: signed volume is positive for outward winding.
            let volume: f64 = tm
                .triangles()
                .iter()
                .map(|t| (t.v0 - c).dot(&(t.v1 - c).cross(&(t.v2 - c))) / 6.0)
                .sum();
            assert!(volume > 0.0, "volume {volume}");
        }
    }

    #[test]
    fn cylinder_area_matches_closed_form() {
        let cyl = cylinder(1.0, 2.0, 256).to_mesh("c").unwrap();
        let exact = 2.0 * PI * 1.0 * 2.0 + 2.0 * PI;
        assert!((surface_area(&cyl) - exact).abs() / exact < 1e-3);
    }
}
