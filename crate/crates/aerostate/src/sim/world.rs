use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mcl::{Descriptor, FeatureMap, MapFeature};

/// Ground-truth world: a textured rectangle scattered with features.
#[derive(Debug, Clone)]
pub struct World {
    pub width: f64,
    pub height: f64,
    pub features: Vec<MapFeature>,
    pub seed: u64,
}

/// Scatter features over the surface at the requested density
/// (features per square meter) with one jittered sample per grid cell, so
/// the texture is dense everywhere but never clumps degenerately.
/// Descriptors are uniformly random. Deterministic per seed.
pub fn generate_world(bounds: (f64, f64), density: f64, seed: u64) -> Result<World> {
    let (width, height) = bounds;
    if !(width > 0.0 && height > 0.0) {
        return Err(Error::invalid("world bounds must be positive"));
    }
    if !(density > 0.0) {
        return Err(Error::invalid("feature density must be > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell = 1.0 / density.sqrt();
    let nx = (width / cell).round().max(1.0) as usize;
    let ny = (height / cell).round().max(1.0) as usize;
    let step_x = width / nx as f64;
    let step_y = height / ny as f64;

    let mut features = Vec::with_capacity(nx * ny);
    let mut id = 0u64;
    for iy in 0..ny {
        for ix in 0..nx {
            let x = (ix as f64 + rng.random_range(0.05..0.95)) * step_x;
            let y = (iy as f64 + rng.random_range(0.05..0.95)) * step_y;
            features.push(MapFeature { id, x, y, descriptor: Descriptor::random(&mut rng) });
            id += 1;
        }
    }
    Ok(World { width, height, features, seed })
}

impl World {
    /// Ground-truth features as a localization map (the stand-in for the
    /// stitched photo map).
    pub fn to_feature_map(&self) -> FeatureMap {
        FeatureMap::new(self.width, self.height, self.features.clone())
            .expect("world features are in bounds by construction")
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }
}
