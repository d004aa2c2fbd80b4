use std::fs::File;
use std::io::BufReader;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::ExperimentRecord;
use crate::error::{Error, Result};
use crate::interpolation::{
    default_candidates, lebesgue_constant, loi_factorize_with, scale_mesh, LebesgueWeight, DEFAULT_CANDIDATE_COUNT,
    DEFAULT_MAX_DEGREE,
};
use crate::mesh::{read_csv, NodalArray, Sampler};
use crate::poly_basis::Density;
use crate::rng::{derive_seed, label_tag};

/// A generated mesh, as written by the `mesh` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub sampler: Sampler,
    pub count: usize,
    pub dimension: usize,
    /// Per-axis degree of the Gauss candidate grid.
    pub candidate_degree: u32,
    /// Optional contraction applied after sampling.
    pub scale: Option<f64>,
    pub seed: u64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            sampler: Sampler::Weil,
            count: 179,
            dimension: 2,
            candidate_degree: 20,
            scale: None,
            seed: 0,
        }
    }
}

impl MeshConfig {
    pub fn generate(&self) -> Result<NodalArray> {
        let seed = derive_seed(self.seed, &[label_tag("mesh"), label_tag(self.sampler.name())]);
        let mesh = self
            .sampler
            .generate(self.count, self.dimension, seed, self.candidate_degree)?;
        match self.scale {
            Some(f) => scale_mesh(&mesh, f),
            None => Ok(mesh),
        }
    }
}

/// Least orthogonal interpolation on a mesh and its Lebesgue constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterpConfig {
    /// Mesh CSV to read; when absent `mesh` is generated.
    pub mesh_file: Option<String>,
    pub mesh: MeshConfig,
    pub density: Density,
    pub max_degree: u32,
    /// Random candidates added to the mesh for the Lebesgue maximization;
    /// zero skips the estimate.
    pub lebesgue_candidates: usize,
    /// Weight the Lebesgue function by `density` instead of `1`.
    pub weighted: bool,
    pub seed: u64,
}

impl Default for InterpConfig {
    fn default() -> Self {
        Self {
            mesh_file: None,
            mesh: MeshConfig {
                count: 50,
                ..MeshConfig::default()
            },
            density: Density::Chebyshev,
            max_degree: DEFAULT_MAX_DEGREE,
            lebesgue_candidates: DEFAULT_CANDIDATE_COUNT,
            weighted: false,
            seed: 0,
        }
    }
}

pub fn run_interp_study(config: &InterpConfig) -> Result<ExperimentRecord> {
    let start = Instant::now();
    let mesh = match &config.mesh_file {
        Some(path) => {
            let file = File::open(path).map_err(|e| Error::InvalidArgument(format!("cannot open {path}: {e}")))?;
            read_csv(BufReader::new(file))?
        }
        None => config.mesh.generate()?,
    };
    let fact = loi_factorize_with(&mesh, config.density, config.max_degree)?;
    let mut record = ExperimentRecord::new("interp", config, &["degree", "dimension", "cumulative_dimension"])?;
    record
        .metadata
        .insert("summary".into(), serde_json::to_value(fact.summary())?);
    if config.lebesgue_candidates > 0 {
        let weight = if config.weighted {
            LebesgueWeight::Density(config.density)
        } else {
            LebesgueWeight::Unit
        };
        let seed = derive_seed(config.seed, &[label_tag("lebesgue")]);
        let candidates = default_candidates(&fact, config.lebesgue_candidates, seed)?;
        let estimate = lebesgue_constant(&fact, weight, &candidates)?;
        record
            .metadata
            .insert("lebesgue".into(), serde_json::to_value(estimate)?);
    }
    let mut total = 0;
    for block in fact.block_dimensions() {
        total += block.dimension;
        record.push(vec![block.degree.into(), block.dimension.into(), total.into()]);
    }
    record.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_sum_to_mesh_size() {
        let config = InterpConfig {
            lebesgue_candidates: 500,
            ..InterpConfig::default()
        };
        let rec = run_interp_study(&config).unwrap();
        let cum = rec.column("cumulative_dimension").unwrap();
        assert_eq!(rec.rows.last().unwrap()[cum].as_f64(), Some(50.0));
        let value = rec.metadata["lebesgue"]["value"].as_f64().unwrap();
        assert!(value >= 1.0);
    }

    #[test]
    fn reads_mesh_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mesh.csv");
        let mesh = MeshConfig {
            sampler: Sampler::McUniform,
            count: 12,
            ..MeshConfig::default()
        }
        .generate()
        .unwrap();
        crate::mesh::write_csv(&mesh, File::create(&path).unwrap()).unwrap();
        let config = InterpConfig {
            mesh_file: Some(path.to_string_lossy().into_owned()),
            density: Density::Uniform,
            lebesgue_candidates: 0,
            ..InterpConfig::default()
        };
        let rec = run_interp_study(&config).unwrap();
        assert!(!rec.metadata.contains_key("lebesgue"));
        assert_eq!(rec.metadata["summary"]["count"], 12);
    }
}
