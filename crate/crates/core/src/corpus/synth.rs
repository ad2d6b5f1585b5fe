use std::fmt;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use super::{write_metadata, CorpusError, DesignRecord};
use crate::mesh::{write_binary_stl, TriangleMesh};
use crate::primitives::{cuboid, cylinder, icosphere, torus, IndexedMesh};
use crate::Vec3;

/// Ground-truth label injected by the generator. Roots are not remixes and
/// carry no originality label of their own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrueClass {
    Original,
    Imitative,
    Root,
}

impl fmt::Display for TrueClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrueClass::Original => "original",
            TrueClass::Imitative => "imitative",
            TrueClass::Root => "root",
        })
    }
}

/// Primitive family a synthetic shape was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Ellipsoid,
    Box,
    Cylinder,
    Torus,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Ellipsoid, Family::Box, Family::Cylinder, Family::Torus];

    /// A random variant of this family, centered at the origin with unit-ish
    /// extent.
    pub fn variant<R: Rng>(self, rng: &mut R) -> IndexedMesh {
        match self {
            Family::Ellipsoid => icosphere(3).scaled(Vec3::new(
                1.0,
                rng.random_range(0.55..0.95),
                rng.random_range(0.55..0.95),
            )),
            Family::Box => cuboid(Vec3::new(2.0, rng.random_range(0.5..1.8), rng.random_range(0.3..1.2)))
                .translated(Vec3::new(-1.0, -0.5, -0.5)),
            Family::Cylinder => cylinder(rng.random_range(0.25..0.6), 2.0, 32),
            Family::Torus => torus(1.0, rng.random_range(0.15..0.45), 32, 16),
        }
    }
}

/// Negative-binomial outcome model, drawn as a gamma-Poisson mixture with
/// mean `base + original_effect * [original remix] + inherited_effect * [remix]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeModel {
    pub base: f64,
    pub original_effect: f64,
    pub inherited_effect: f64,
    /// Gamma shape; variance is `mu + mu^2 / dispersion`.
    pub dispersion: f64,
}

impl OutcomeModel {
    pub fn mean(&self, class: TrueClass) -> f64 {
        let mu = match class {
            TrueClass::Root => self.base,
            TrueClass::Imitative => self.base + self.inherited_effect,
            TrueClass::Original => self.base + self.inherited_effect + self.original_effect,
        };
        mu.max(0.0)
    }

    fn draw<R: Rng>(&self, class: TrueClass, rng: &mut R) -> u64 {
        let mu = self.mean(class);
        if mu <= 0.0 {
            return 0;
        }
        let gamma = Gamma::new(self.dispersion, mu / self.dispersion).expect("validated");
        let lambda: f64 = gamma.sample(rng);
        if lambda <= 0.0 {
            return 0;
        }
        Poisson::new(lambda).map(|p| p.sample(rng) as u64).unwrap_or(0)
    }

    fn validate(&self, name: &str) -> Result<(), CorpusError> {
        let finite = [self.base, self.original_effect, self.inherited_effect].iter().all(|v| v.is_finite());
        if !finite || self.base < 0.0 || !(self.dispersion > 0.0 && self.dispersion.is_finite()) {
            return Err(CorpusError::ConfigError(format!("{name} outcome model {self:?} is invalid")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_designs: usize,
    /// Fraction of designs that remix an earlier design.
    pub remix_fraction: f64,
    /// Fraction of remixes that are original (a fresh shape of a different
    /// family) rather than imitative (a perturbed copy of the parent).
    pub original_fraction: f64,
    /// Vertex jitter of imitative copies, relative to the mesh radius.
    pub perturbation: f64,
    /// Per-axis scale of imitative copies is drawn from `1 ± anisotropy`.
    pub anisotropy: f64,
    /// Chance that a remix lists a second parent.
    pub second_parent_probability: f64,
    pub likes: OutcomeModel,
    pub makes: OutcomeModel,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_designs: 500,
            remix_fraction: 0.7,
            original_fraction: 0.4,
            perturbation: 0.02,
            anisotropy: 0.05,
            second_parent_probability: 0.1,
            likes: OutcomeModel { base: 10.0, original_effect: 6.0, inherited_effect: 4.0, dispersion: 3.0 },
            makes: OutcomeModel { base: 0.7, original_effect: 0.6, inherited_effect: 0.6, dispersion: 2.0 },
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.n_designs < 10 {
            return Err(CorpusError::ConfigError(format!("n_designs = {} is below 10", self.n_designs)));
        }
        for (name, v) in [
            ("remix_fraction", self.remix_fraction),
            ("original_fraction", self.original_fraction),
            ("second_parent_probability", self.second_parent_probability),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CorpusError::ConfigError(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if !(self.perturbation >= 0.0 && self.perturbation <= 0.5) {
            return Err(CorpusError::ConfigError(format!("perturbation = {} is outside [0, 0.5]", self.perturbation)));
        }
        if !(self.anisotropy >= 0.0 && self.anisotropy < 0.5) {
            return Err(CorpusError::ConfigError(format!("anisotropy = {} is outside [0, 0.5)", self.anisotropy)));
        }
        self.likes.validate("likes")?;
        self.makes.validate("makes")
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDesign {
    pub record: DesignRecord,
    pub mesh: TriangleMesh,
    pub truth: TrueClass,
    pub family: Family,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub designs: Vec<SyntheticDesign>,
}

impl SyntheticCorpus {
    pub fn records(&self) -> Vec<DesignRecord> {
        self.designs.iter().map(|d| d.record.clone()).collect()
    }

    pub fn truth_csv(&self) -> String {
        let mut out = String::from("id,true_class\n");
        for d in &self.designs {
            out.push_str(&format!("{},{}\n", d.record.id, d.truth));
        }
        out
    }

    /// Writes `metadata.csv`, `truth.csv` and `meshes/<id>.stl` under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), CorpusError> {
        std::fs::create_dir_all(dir.join("meshes"))?;
        for d in &self.designs {
            std::fs::write(dir.join(&d.record.mesh_path), write_binary_stl(&d.mesh))?;
        }
        std::fs::write(dir.join("metadata.csv"), write_metadata(&self.records())?)?;
        std::fs::write(dir.join("truth.csv"), self.truth_csv())?;
        Ok(())
    }
}

const BASE_TIMESTAMP: i64 = 1_400_000_000;

/// Generates a remix corpus with known originality labels.
///
/// Roots come first and cycle through the primitive families. Each later
/// design remixes a uniformly chosen earlier one. Imitative remixes copy the
/// parent's shape with jitter and a mild anisotropic scale; original remixes
/// draw a fresh variant of a family none of their parents belong to. Roots
/// are labelled [`TrueClass::Root`]. Every design gets a random unit scale
/// and offset, and timestamps increase with generation order.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<SyntheticCorpus, CorpusError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_designs;
    let n_remix = ((n as f64) * config.remix_fraction).round() as usize;
    let n_roots = (n - n_remix.min(n)).max(1);
    let width = n.to_string().len().max(4);

    struct Draft {
        shape: IndexedMesh,
        family: Family,
        truth: TrueClass,
        parents: Vec<usize>,
    }
    let mut drafts: Vec<Draft> = Vec::with_capacity(n);
    for i in 0..n {
        let draft = if i < n_roots {
            let family = Family::ALL[i % Family::ALL.len()];
            Draft { shape: family.variant(&mut rng), family, truth: TrueClass::Root, parents: vec![] }
        } else {
            let mut parents = vec![rng.random_range(0..i)];
            if i >= 2 && rng.random_bool(config.second_parent_probability) {
                let second = loop {
                    let p = rng.random_range(0..i);
                    if p != parents[0] {
                        break p;
                    }
                };
                parents.push(second);
            }
            if rng.random_bool(config.original_fraction) {
                let taken: Vec<Family> = parents.iter().map(|&p| drafts[p].family).collect();
                let choices: Vec<Family> = Family::ALL.iter().copied().filter(|f| !taken.contains(f)).collect();
                let family = *choices.choose(&mut rng).expect("at most two of four families are taken");
                Draft { shape: family.variant(&mut rng), family, truth: TrueClass::Original, parents }
            } else {
                let source = &drafts[parents[0]];
                let a = config.anisotropy;
                let factors = if a > 0.0 {
                    Vec3::new(
                        rng.random_range(1.0 - a..=1.0 + a),
                        rng.random_range(1.0 - a..=1.0 + a),
                        rng.random_range(1.0 - a..=1.0 + a),
                    )
                } else {
                    Vec3::new(1.0, 1.0, 1.0)
                };
                let shape = source.shape.clone().scaled(factors).jittered(config.perturbation, &mut rng);
                Draft { shape, family: source.family, truth: TrueClass::Imitative, parents }
            }
        };
        drafts.push(draft);
    }

    let id_of = |i: usize| format!("d{:0width$}", i + 1);
    let mut designs = Vec::with_capacity(n);
    for (i, d) in drafts.iter().enumerate() {
        let id = id_of(i);
        let unit_scale = rng.random_range(5.0..50.0);
        let offset = Vec3::new(
            rng.random_range(-100.0..100.0),
            rng.random_range(-100.0..100.0),
            rng.random_range(0.0..100.0),
        );
        let placed = d.shape.clone().scaled(Vec3::repeat(unit_scale)).translated(offset);
        let mesh = placed.to_mesh(&id)?;
        let likes = config.likes.draw(d.truth, &mut rng);
        let makes = config.makes.draw(d.truth, &mut rng);
        let record = DesignRecord {
            mesh_path: format!("meshes/{id}.stl"),
            likes,
            makes,
            parent_ids: d.parents.iter().map(|&p| id_of(p)).collect(),
            timestamp: Some(BASE_TIMESTAMP + 3600 * i as i64),
            id,
        };
        designs.push(SyntheticDesign { record, mesh, truth: d.truth, family: d.family });
    }
    Ok(SyntheticCorpus { designs })
}
