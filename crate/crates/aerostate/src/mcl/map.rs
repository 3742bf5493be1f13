use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::MapFeature;
use crate::error::{Error, Result};

/// Grid cell edge for the spatial index. Fine enough that a typical
/// perceptual-range query touches tens of cells, coarse enough to keep
/// the index small.
const CELL_SIZE: f64 = 0.1;

/// Feature map over a rectangular surface with a uniform-grid spatial
/// index. Queries return exactly the features inside the query radius.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    width: f64,
    height: f64,
    features: Vec<MapFeature>,
    cells_x: usize,
    cells_y: usize,
    grid: Vec<Vec<u32>>,
}

/// On-disk schema shared by the world exporter and the SLAM exporter.
#[derive(Debug, Serialize, Deserialize)]
struct MapFile {
    bounds: Bounds,
    features: Vec<MapFeature>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Bounds {
    width: f64,
    height: f64,
}

impl FeatureMap {
    /// Build a map whose features must all lie inside the bounds.
    pub fn new(width: f64, height: f64, features: Vec<MapFeature>) -> Result<Self> {
        for f in &features {
            if f.x < 0.0 || f.x > width || f.y < 0.0 || f.y > height {
                return Err(Error::invalid(format!(
                    "feature {} at ({}, {}) outside map bounds {width}x{height}",
                    f.id, f.x, f.y
                )));
            }
        }
        Self::with_features_unchecked(width, height, features)
    }

    /// Build a map without the bounds check. Estimated maps (SLAM exports)
    /// may place landmarks slightly outside the nominal surface; queries
    /// still find them (boundary cells absorb the overhang).
    pub fn with_features_unchecked(
        width: f64,
        height: f64,
        features: Vec<MapFeature>,
    ) -> Result<Self> {
        if !(width > 0.0 && height > 0.0) {
            return Err(Error::invalid("map bounds must be positive"));
        }
        let cells_x = (width / CELL_SIZE).ceil().max(1.0) as usize;
        let cells_y = (height / CELL_SIZE).ceil().max(1.0) as usize;
        let mut map = Self {
            width,
            height,
            features: Vec::new(),
            cells_x,
            cells_y,
            grid: vec![Vec::new(); cells_x * cells_y],
        };
        for f in features {
            let idx = map.features.len() as u32;
            let cell = map.cell_of(f.x, f.y);
            map.grid[cell].push(idx);
            map.features.push(f);
        }
        Ok(map)
    }

    fn cell_of(&self, x: f64, y: f64) -> usize {
        // casts saturate, so out-of-bounds coordinates clamp into the
        // boundary cells
        let cx = ((x / CELL_SIZE) as usize).min(self.cells_x - 1);
        let cy = ((y / CELL_SIZE) as usize).min(self.cells_y - 1);
        cy * self.cells_x + cx
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.width, self.height)
    }

    pub fn features(&self) -> &[MapFeature] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Indices of all features within `radius` of `(x, y)`, in insertion
    /// order (deterministic).
    pub fn radius_query(&self, x: f64, y: f64, radius: f64, out: &mut Vec<u32>) {
        out.clear();
        if radius <= 0.0 {
            return;
        }
        let r2 = radius * radius;
        let cx_lo = (((x - radius) / CELL_SIZE).floor().max(0.0)) as usize;
        let cy_lo = (((y - radius) / CELL_SIZE).floor().max(0.0)) as usize;
        let cx_hi = (((x + radius) / CELL_SIZE).floor().max(0.0))
            .min((self.cells_x - 1) as f64) as usize;
        let cy_hi = (((y + radius) / CELL_SIZE).floor().max(0.0))
            .min((self.cells_y - 1) as f64) as usize;
        for cy in cy_lo..=cy_hi {
            for cx in cx_lo..=cx_hi {
                for &idx in &self.grid[cy * self.cells_x + cx] {
                    let f = &self.features[idx as usize];
                    let (dx, dy) = (f.x - x, f.y - y);
                    if dx * dx + dy * dy <= r2 {
                        out.push(idx);
                    }
                }
            }
        }
        out.sort_unstable();
    }

    pub fn to_json(&self) -> String {
        let file = MapFile {
            bounds: Bounds { width: self.width, height: self.height },
            features: self.features.clone(),
        };
        serde_json::to_string(&file).expect("map serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: MapFile = serde_json::from_str(json)
            .map_err(|e| Error::MalformedLog { line: e.line(), message: e.to_string() })?;
        FeatureMap::with_features_unchecked(file.bounds.width, file.bounds.height, file.features)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let json = std::fs::read_to_string(path)?;
        Self::from_json(&json)
    }
}
