//! Surface sampling, normalization, voxelization and restriction of the voxel
//! grid to concentric spheres.
//!
//! Coordinates after normalization live in the cube `[-1, 1]^3`. Voxel `i`
//! along an axis covers `[-1 + 2i/n, -1 + 2(i+1)/n)`, so in continuous index
//! space voxel centers sit on integers and the grid center is `n/2 - 1/2`.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::mesh::TriangleMesh;
use crate::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("sampling density must be positive and finite, got {0}")]
    InvalidDensity(f64),
    #[error("target mean radius must lie in (0, 1), got {0}")]
    InvalidTargetRadius(f64),
    #[error("degenerate shape: all sample points coincide")]
    DegenerateShape,
    #[error("no sample points")]
    NoSamples,
    #[error("grid resolution must be even and at least 8, got {0}")]
    InvalidResolution(usize),
    #[error("radius index {index} outside 1..={radii}")]
    RadiusOutOfRange { index: usize, radii: usize },
    #[error("radius count {radii} must be in 1..={max}")]
    InvalidRadii { radii: usize, max: usize },
    #[error("bandwidth must be positive")]
    InvalidBandwidth,
}

/// Weighted surface points; weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSamples {
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl SurfaceSamples {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weighted_centroid(&self) -> Vec3 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| p * *w)
            .sum()
    }
}

/// Uniform area sampling: every non-degenerate triangle gets
/// `max(1, round(density * area))` barycentric samples. Zero-area triangles
/// receive none.
///
/// Each triangle draws from its own stream of the seeded generator, keyed by
/// its position in the mesh, so samples never depend on coordinates: rigidly
/// moving a mesh moves its samples with it.
pub fn sample_surface(
    mesh: &TriangleMesh,
    density: f64,
    seed: u64,
) -> Result<SurfaceSamples, SamplingError> {
    if !(density > 0.0 && density.is_finite()) {
        return Err(SamplingError::InvalidDensity(density));
    }
    let total: f64 = mesh.triangles().iter().map(|t| t.area()).sum();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (index, t) in mesh.triangles().iter().enumerate() {
        let area = t.area();
        if area <= 0.0 {
            continue;
        }
        let count = ((density * area).round() as usize).max(1);
        let w = area / (total * count as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        for _ in 0..count {
            let r1: f64 = rng.random::<f64>().sqrt();
            let r2: f64 = rng.random();
            points.push(t.v0 * (1.0 - r1) + t.v1 * (r1 * (1.0 - r2)) + t.v2 * (r1 * r2));
            weights.push(w);
        }
    }
    Ok(SurfaceSamples { points, weights })
}

/// Maps `p` to `(p + translation) * scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationTransform {
    pub translation: Vec3,
    pub scale: f64,
}

impl NormalizationTransform {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        (p + self.translation) * self.scale
    }
}

/// Centers the samples on their weighted centroid and scales them so the
/// weighted mean distance from the origin equals `target_mean_radius`.
pub fn compute_normalization(
    samples: &SurfaceSamples,
    target_mean_radius: f64,
) -> Result<NormalizationTransform, SamplingError> {
    if !(target_mean_radius > 0.0 && target_mean_radius < 1.0) {
        return Err(SamplingError::InvalidTargetRadius(target_mean_radius));
    }
    if samples.is_empty() {
        return Err(SamplingError::NoSamples);
    }
    let translation = -samples.weighted_centroid();
    let mean_radius: f64 = samples
        .points
        .iter()
        .zip(&samples.weights)
        .map(|(p, w)| (p + translation).norm() * w)
        .sum();
    let scale = target_mean_radius / mean_radius;
    if !(mean_radius > 0.0) || !scale.is_finite() {
        return Err(SamplingError::DegenerateShape);
    }
    Ok(NormalizationTransform { translation, scale })
}

/// Cubic occupancy grid of side `n`, stored x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    n: usize,
    values: Vec<f64>,
    /// Points that fell outside `[-1, 1]^3` and were clamped onto the border.
    pub overflow: usize,
}

impl VoxelGrid {
    pub fn zeros(n: usize) -> Result<Self, SamplingError> {
        if n < 8 || n % 2 != 0 {
            return Err(SamplingError::InvalidResolution(n));
        }
        Ok(VoxelGrid { n, values: vec![0.0; n * n * n], overflow: 0 })
    }

    /// Builds a grid by evaluating `f` at each voxel's integer index.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self, SamplingError> {
        let mut grid = VoxelGrid::zeros(n)?;
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    let i = grid.index(x, y, z);
                    grid.values[i] = f(x, y, z);
                }
            }
        }
        Ok(grid)
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.n + y) * self.n + x
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.values[self.index(x, y, z)]
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, value: f64) {
        let i = self.index(x, y, z);
        self.values[i] = value;
    }

    pub fn nonzero_count(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    /// Center of the grid in continuous index coordinates.
    pub fn center(&self) -> f64 {
        self.n as f64 / 2.0 - 0.5
    }

    /// Trilinear interpolation at continuous index coordinates; anything
    /// outside the grid reads as zero.
    pub fn interpolate(&self, u: Vec3) -> f64 {
        let base = u.map(f64::floor);
        let frac = u - base;
        let mut acc = 0.0;
        for corner in 0..8 {
            let offs = [(corner & 1) as f64, ((corner >> 1) & 1) as f64, ((corner >> 2) & 1) as f64];
            let mut weight = 1.0;
            let mut idx = [0usize; 3];
            let mut inside = true;
            for a in 0..3 {
                let c = base[a] + offs[a];
                weight *= if offs[a] == 1.0 { frac[a] } else { 1.0 - frac[a] };
                if c < 0.0 || c > (self.n - 1) as f64 {
                    inside = false;
                } else {
                    idx[a] = c as usize;
                }
            }
            if inside && weight != 0.0 {
                acc += weight * self.get(idx[0], idx[1], idx[2]);
            }
        }
        acc
    }

    pub fn scaled_sum(&self, a: f64, other: &VoxelGrid, b: f64) -> VoxelGrid {
        assert_eq!(self.n, other.n);
        VoxelGrid {
            n: self.n,
            values: self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect(),
            overflow: 0,
        }
    }
}

/// Binary surface rasterization: every voxel containing a transformed sample
/// is set to one. Out-of-range points are clamped to the border and counted.
pub fn voxelize(
    samples: &SurfaceSamples,
    transform: &NormalizationTransform,
    n: usize,
) -> Result<VoxelGrid, SamplingError> {
    let mut grid = VoxelGrid::zeros(n)?;
    let half = n as f64 / 2.0;
    for p in &samples.points {
        let q = transform.apply(p);
        let mut idx = [0usize; 3];
        let mut clamped = false;
        for a in 0..3 {
            let u = ((q[a] + 1.0) * half).floor();
            idx[a] = if u < 0.0 {
                clamped = true;
                0
            } else if u > (n - 1) as f64 {
                clamped = true;
                n - 1
            } else {
                u as usize
            };
        }
        if clamped {
            grid.overflow += 1;
        }
        grid.set(idx[0], idx[1], idx[2], 1.0);
    }
    Ok(grid)
}

/// The `2B x 2B` equiangular grid on the sphere:
/// `theta_i = (i + 1/2) pi / 2B`, `phi_j = (j + 1/2) 2 pi / 2B`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid {
    bandwidth: usize,
}

impl AngularGrid {
    pub fn new(bandwidth: usize) -> Result<Self, SamplingError> {
        if bandwidth == 0 {
            return Err(SamplingError::InvalidBandwidth);
        }
        Ok(AngularGrid { bandwidth })
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Samples per angular axis (`2B`).
    pub fn side(&self) -> usize {
        2 * self.bandwidth
    }

    pub fn theta(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * PI / self.side() as f64
    }

    pub fn phi(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * TAU / self.side() as f64
    }

    pub fn direction(&self, i: usize, j: usize) -> Vec3 {
        let (st, ct) = self.theta(i).sin_cos();
        let (sp, cp) = self.phi(j).sin_cos();
        Vec3::new(st * cp, st * sp, ct)
    }

    /// All directions, theta-major.
    pub fn directions(&self) -> Vec<Vec3> {
        let side = self.side();
        (0..side)
            .flat_map(|i| (0..side).map(move |j| (i, j)))
            .map(|(i, j)| self.direction(i, j))
            .collect()
    }
}

/// Values of the grid function on one sphere, theta-major `2B x 2B`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSampleGrid {
    pub radius_index: usize,
    pub bandwidth: usize,
    pub values: Vec<f64>,
}

impl SphereSampleGrid {
    pub fn side(&self) -> usize {
        2 * self.bandwidth
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.side() + j]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Restricts the grid to the sphere of normalized radius `k / radii` (that
/// is `k * (n/2) / radii` voxel units) around the grid center.
pub fn restrict_to_sphere(
    grid: &VoxelGrid,
    radius_index: usize,
    radii: usize,
    bandwidth: usize,
) -> Result<SphereSampleGrid, SamplingError> {
    let angular = AngularGrid::new(bandwidth)?;
    restrict_with_directions(grid, radius_index, radii, bandwidth, &angular.directions())
}

pub(crate) fn restrict_with_directions(
    grid: &VoxelGrid,
    radius_index: usize,
    radii: usize,
    bandwidth: usize,
    directions: &[Vec3],
) -> Result<SphereSampleGrid, SamplingError> {
    let half = grid.resolution() / 2;
    if radii == 0 || radii > half {
        return Err(SamplingError::InvalidRadii { radii, max: half });
    }
    if radius_index == 0 || radius_index > radii {
        return Err(SamplingError::RadiusOutOfRange { index: radius_index, radii });
    }
    let r = radius_index as f64 * half as f64 / radii as f64;
    let center = Vec3::repeat(grid.center());
    let values = directions.iter().map(|d| grid.interpolate(center + d * r)).collect();
    Ok(SphereSampleGrid { radius_index, bandwidth, values })
}
