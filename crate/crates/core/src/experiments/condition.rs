use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gauss_grid_degree, mean_std, ExperimentRecord, SampleCount, ScalingRule};
use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::index_sets::{tensor_cardinality, IndexSet, IndexSetKind, DEFAULT_CARDINALITY_CAP};
use crate::mesh::Sampler;
use crate::poly_basis::{Family, TensorBasis};
use crate::rng::{derive_seed, label_tag};

/// Condition number of the normalized Gram matrix against polynomial degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionConfig {
    pub dimension: usize,
    pub index_set: IndexSetKind,
    pub family: Family,
    pub degrees: Vec<u32>,
    pub rules: Vec<ScalingRule>,
    pub samplers: Vec<Sampler>,
    /// Trials per random sampler; deterministic samplers run once.
    pub trials: usize,
    /// Per-axis degree of the Gauss candidate grid. By default the smallest
    /// degree covering the basis with at least twice the samples.
    pub grid_degree: Option<u32>,
    pub seed: u64,
}

impl Default for ConditionConfig {
    fn default() -> Self {
        Self {
            dimension: 4,
            index_set: IndexSetKind::HyperbolicCross,
            family: Family::Chebyshev,
            degrees: (2..=8).collect(),
            rules: vec![ScalingRule::Linear2p5, ScalingRule::Loglinear1p5, ScalingRule::Logcubed0p3],
            samplers: vec![Sampler::McChebyshev, Sampler::Weil, Sampler::GaussSubsample],
            trials: 200,
            grid_degree: None,
            seed: 0,
        }
    }
}

impl ConditionConfig {
    fn basis(&self, degree: u32) -> Result<TensorBasis> {
        let set = IndexSet::build(self.index_set, self.dimension, degree, DEFAULT_CARDINALITY_CAP)?;
        Ok(TensorBasis::isotropic(self.family, set))
    }

    fn grid_degree_for(&self, basis: &TensorBasis, m: usize) -> u32 {
        self.grid_degree.unwrap_or_else(|| {
            let k = basis.index_set().max_degrees().into_iter().max().unwrap_or(0);
            gauss_grid_degree(k, self.dimension, m)
        })
    }
}

struct Setting {
    sampler: Sampler,
    rule: ScalingRule,
    degree: u32,
    n: usize,
    count: SampleCount,
    prime: Option<u64>,
    trials: usize,
    feasible: bool,
}

/// Condition number of one trial mesh. Exposed so the aggregation can be
/// checked against a serial recomputation.
pub fn condition_trial(config: &ConditionConfig, sampler: Sampler, rule: ScalingRule, degree: u32, trial: usize) -> Result<(f64, bool)> {
    let basis = config.basis(degree)?;
    let count = rule.count(basis.len())?;
    let seed = derive_seed(
        config.seed,
        &[
            label_tag("condition"),
            label_tag(sampler.name()),
            label_tag(&rule.tag()),
            u64::from(degree),
            trial as u64,
        ],
    );
    let mesh = sampler.generate(count.m, config.dimension, seed, config.grid_degree_for(&basis, count.m))?;
    let cond = DesignMatrix::assemble(&mesh, &basis)?.condition_number();
    Ok((cond.value, cond.rank_deficient))
}

pub fn run_condition_study(config: &ConditionConfig) -> Result<ExperimentRecord> {
    let start = Instant::now();
    if config.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let mut cells = Vec::new();
    for &sampler in &config.samplers {
        for &rule in &config.rules {
            for &degree in &config.degrees {
                let basis = config.basis(degree)?;
                let count = rule.count(basis.len())?;
                let feasible = sampler != Sampler::GaussSubsample
                    || tensor_cardinality(config.dimension, config.grid_degree_for(&basis, count.m))
                        .is_some_and(|total| total >= count.m as u128);
                cells.push(Setting {
                    sampler,
                    rule,
                    degree,
                    n: basis.len(),
                    count,
                    prime: (sampler == Sampler::Weil).then(|| Sampler::weil_prime_for(count.m)),
                    trials: if !feasible {
                        0
                    } else if sampler.is_random() {
                        config.trials
                    } else {
                        1
                    },
                    feasible,
                });
            }
        }
    }
    let jobs: Vec<(usize, usize)> = cells
        .iter()
        .enumerate()
        .flat_map(|(c, cell)| (0..cell.trials).map(move |t| (c, t)))
        .collect();
    let values: Vec<(f64, bool)> = jobs
        .par_iter()
        .map(|&(c, t)| condition_trial(config, cells[c].sampler, cells[c].rule, cells[c].degree, t))
        .collect::<Result<_>>()?;

    let mut record = ExperimentRecord::new(
        "condition",
        config,
        &[
            "sampler",
            "rule",
            "k",
            "n",
            "m",
            "clamped",
            "prime",
            "trials",
            "mean_condition",
            "std_condition",
            "rank_deficient",
            "status",
        ],
    )?;
    let mut offset = 0;
    for cell in &cells {
        let chunk = &values[offset..offset + cell.trials];
        offset += cell.trials;
        let conds: Vec<f64> = chunk.iter().map(|v| v.0).collect();
        let (mean, std) = mean_std(&conds);
        record.push(vec![
            cell.sampler.name().into(),
            cell.rule.tag().into(),
            cell.degree.into(),
            cell.n.into(),
            cell.count.m.into(),
            cell.count.clamped.into(),
            cell.prime.into(),
            cell.trials.into(),
            mean.into(),
            std.into(),
            chunk.iter().filter(|v| v.1).count().into(),
            if cell.feasible { "ok" } else { "infeasible_grid" }.into(),
        ]);
    }
    record.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ConditionConfig {
        ConditionConfig {
            dimension: 2,
            degrees: vec![0, 2, 3],
            trials: 4,
            ..ConditionConfig::default()
        }
    }

    #[test]
    fn degree_zero_is_perfectly_conditioned() {
        let rec = run_condition_study(&small()).unwrap();
        let mean = rec.column("mean_condition").unwrap();
        for row in rec.select(&[("k", "0")]) {
            assert!((row[mean].as_f64().unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(rec.rows.len(), 3 * 3 * 3);
    }

    #[test]
    fn weil_rows_are_single_deterministic_trials() {
        let rec = run_condition_study(&small()).unwrap();
        let (trials, std, prime) = (
            rec.column("trials").unwrap(),
            rec.column("std_condition").unwrap(),
            rec.column("prime").unwrap(),
        );
        for row in rec.select(&[("sampler", "weil")]) {
            assert_eq!(row[trials].as_f64(), Some(1.0));
            assert_eq!(row[std].as_f64(), Some(0.0));
            assert!(row[prime].as_f64().is_some());
        }
    }

    #[test]
    fn infeasible_grid_is_flagged() {
        let config = ConditionConfig {
            grid_degree: Some(1),
            samplers: vec![Sampler::GaussSubsample],
            ..small()
        };
        let rec = run_condition_study(&config).unwrap();
        let status = rec.column("status").unwrap();
        assert!(rec.rows.iter().any(|r| r[status].as_str() == Some("infeasible_grid")));
    }
}
