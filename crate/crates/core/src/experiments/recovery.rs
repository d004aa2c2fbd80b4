use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::ExperimentRecord;
use crate::error::{Error, Result};
use crate::index_sets::IndexSet;
use crate::mesh::Sampler;
use crate::poly_basis::{Family, TensorBasis};
use crate::sparse::{recovery_study, RecoverySetup, SolverOptions, DEFAULT_SUCCESS_TOL};

/// A mesh family together with whether the ℓ1 problem is preconditioned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoveryArm {
    pub sampler: Sampler,
    #[serde(default)]
    pub preconditioned: bool,
}

impl RecoveryArm {
    pub const fn direct(sampler: Sampler) -> Self {
        Self {
            sampler,
            preconditioned: false,
        }
    }

    pub const fn preconditioned(sampler: Sampler) -> Self {
        Self {
            sampler,
            preconditioned: true,
        }
    }

    pub fn label(&self) -> String {
        if self.preconditioned {
            format!("{}_preconditioned", self.sampler.name())
        } else {
            self.sampler.name().to_owned()
        }
    }
}

/// Total-degree recovery settings from the reference study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryPreset {
    /// `d=2, k=20, M=74`, Chebyshev basis, three Chebyshev-distributed meshes.
    Chebyshev2d,
    /// `d=2, k=35, M=66`, Legendre basis, uniform MC against preconditioned meshes.
    Legendre2d,
    /// `d=15, k=4, M=81`, Chebyshev basis.
    Chebyshev15d,
    /// `d=15, k=4, M=97`, Legendre basis.
    Legendre15d,
}

const CHEBYSHEV_ARMS: [RecoveryArm; 3] = [
    RecoveryArm::direct(Sampler::McChebyshev),
    RecoveryArm::direct(Sampler::Weil),
    RecoveryArm::direct(Sampler::GaussSubsample),
];

const LEGENDRE_ARMS: [RecoveryArm; 4] = [
    RecoveryArm::direct(Sampler::McUniform),
    RecoveryArm::preconditioned(Sampler::McChebyshev),
    RecoveryArm::preconditioned(Sampler::Weil),
    RecoveryArm::preconditioned(Sampler::GaussSubsample),
];

impl RecoveryPreset {
    /// `(dimension, degree, count, family)`.
    pub fn parameters(self) -> (usize, u32, usize, Family) {
        match self {
            RecoveryPreset::Chebyshev2d => (2, 20, 74, Family::Chebyshev),
            RecoveryPreset::Legendre2d => (2, 35, 66, Family::Legendre),
            RecoveryPreset::Chebyshev15d => (15, 4, 81, Family::Chebyshev),
            RecoveryPreset::Legendre15d => (15, 4, 97, Family::Legendre),
        }
    }

    pub fn arms(self) -> Vec<RecoveryArm> {
        match self.parameters().3 {
            Family::Legendre => LEGENDRE_ARMS.to_vec(),
            _ => CHEBYSHEV_ARMS.to_vec(),
        }
    }

    pub fn sparsities(self) -> Vec<usize> {
        match self {
            RecoveryPreset::Chebyshev2d | RecoveryPreset::Legendre2d => vec![1, 5, 10, 15, 20, 25, 30, 35, 40],
            RecoveryPreset::Chebyshev15d | RecoveryPreset::Legendre15d => vec![1, 2, 5, 8, 10, 15, 20],
        }
    }
}

/// ℓ1 recovery success rates against sparsity. Fields left unset come from
/// `preset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryConfig {
    pub preset: Option<RecoveryPreset>,
    pub dimension: Option<usize>,
    pub degree: Option<u32>,
    pub count: Option<usize>,
    pub family: Option<Family>,
    pub arms: Option<Vec<RecoveryArm>>,
    pub sparsities: Option<Vec<usize>>,
    pub trials: usize,
    pub success_tol: f64,
    pub solver: SolverOptions,
    pub seed: u64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            preset: Some(RecoveryPreset::Chebyshev2d),
            dimension: None,
            degree: None,
            count: None,
            family: None,
            arms: None,
            sparsities: None,
            trials: 100,
            success_tol: DEFAULT_SUCCESS_TOL,
            solver: SolverOptions::default(),
            seed: 0,
        }
    }
}

impl RecoveryConfig {
    pub fn preset(preset: RecoveryPreset) -> Self {
        Self {
            preset: Some(preset),
            ..Self::default()
        }
    }

    /// Fills every optional field, from the preset where one is given.
    pub fn resolved(&self) -> Result<RecoveryConfig> {
        let missing = |name: &str| Error::InvalidArgument(format!("recovery config needs `{name}` or a preset"));
        let preset = self.preset.map(RecoveryPreset::parameters);
        let dimension = self.dimension.or(preset.map(|p| p.0)).ok_or_else(|| missing("dimension"))?;
        let degree = self.degree.or(preset.map(|p| p.1)).ok_or_else(|| missing("degree"))?;
        let count = self.count.or(preset.map(|p| p.2)).ok_or_else(|| missing("count"))?;
        let family = self.family.or(preset.map(|p| p.3)).ok_or_else(|| missing("family"))?;
        let arms = self
            .arms
            .clone()
            .or(self.preset.map(RecoveryPreset::arms))
            .ok_or_else(|| missing("arms"))?;
        let sparsities = self
            .sparsities
            .clone()
            .or(self.preset.map(RecoveryPreset::sparsities))
            .ok_or_else(|| missing("sparsities"))?;
        Ok(RecoveryConfig {
            preset: self.preset,
            dimension: Some(dimension),
            degree: Some(degree),
            count: Some(count),
            family: Some(family),
            arms: Some(arms),
            sparsities: Some(sparsities),
            ..self.clone()
        })
    }
}

pub fn run_recovery_study(config: &RecoveryConfig) -> Result<ExperimentRecord> {
    let start = Instant::now();
    let config = config.resolved()?;
    let (d, k, m, family) = (
        config.dimension.unwrap(),
        config.degree.unwrap(),
        config.count.unwrap(),
        config.family.unwrap(),
    );
    let basis = TensorBasis::isotropic(family, IndexSet::total_degree(d, k)?);
    let sparsities = config.sparsities.as_deref().unwrap();
    let mut record = ExperimentRecord::new(
        "recovery",
        &config,
        &["arm", "sampler", "preconditioned", "n", "m", "s", "trials", "successes", "rate", "mean_iterations"],
    )?;
    for arm in config.arms.as_deref().unwrap() {
        let setup = RecoverySetup {
            basis: basis.clone(),
            sampler: arm.sampler,
            preconditioned: arm.preconditioned,
            count: m,
            candidate_degree: k,
            success_tol: config.success_tol,
            options: config.solver.clone(),
        };
        for row in recovery_study(&setup, sparsities, config.trials, config.seed)? {
            record.push(vec![
                arm.label().into(),
                arm.sampler.name().into(),
                arm.preconditioned.into(),
                basis.len().into(),
                m.into(),
                row.s.into(),
                row.trials.into(),
                row.successes.into(),
                row.rate.into(),
                row.mean_iterations.into(),
            ]);
        }
    }
    record.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        let c = RecoveryConfig::preset(RecoveryPreset::Legendre15d).resolved().unwrap();
        assert_eq!((c.dimension, c.degree, c.count), (Some(15), Some(4), Some(97)));
        assert_eq!(c.arms.as_ref().unwrap().len(), 4);
        assert!(!c.arms.unwrap()[0].preconditioned);
        let bare = RecoveryConfig {
            preset: None,
            ..RecoveryConfig::default()
        };
        assert!(bare.resolved().is_err());
    }

    #[test]
    fn overrides_win_over_preset() {
        let config = RecoveryConfig {
            degree: Some(6),
            count: Some(20),
            sparsities: Some(vec![0, 2]),
            trials: 3,
            ..RecoveryConfig::default()
        };
        let rec = run_recovery_study(&config).unwrap();
        assert_eq!(rec.rows.len(), 3 * 2);
        let (rate, n) = (rec.column("rate").unwrap(), rec.column("n").unwrap());
        for row in rec.select(&[("s", "0")]) {
            assert_eq!(row[rate].as_f64(), Some(1.0));
            assert_eq!(row[n].as_f64(), Some(28.0));
        }
        assert_eq!(rec.config["degree"], 6);
    }
}
