use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gauss_grid_degree, mean_std, ExperimentRecord, ScalingRule};
use crate::design::{ls_weights, DesignMatrix};
use crate::error::{Error, Result};
use crate::index_sets::IndexSet;
use crate::least_squares::{solve_ls, solve_weighted_ls, sup_error};
use crate::mesh::{sample_iid, Sampler};
use crate::poly_basis::{Density, Family, TensorBasis};
use crate::rng::{derive_seed, label_tag, rng_from_seed};

/// Basis and weighting of the least-squares fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LsVariant {
    /// Chebyshev basis, unweighted.
    Chebyshev,
    /// Legendre basis with Christoffel weights for the uniform density.
    LegendrePreconditioned,
}

impl LsVariant {
    pub fn name(self) -> &'static str {
        match self {
            LsVariant::Chebyshev => "chebyshev",
            LsVariant::LegendrePreconditioned => "legendre_preconditioned",
        }
    }

    fn family(self) -> Family {
        match self {
            LsVariant::Chebyshev => Family::Chebyshev,
            LsVariant::LegendrePreconditioned => Family::Legendre,
        }
    }
}

/// Function approximated by the study. The coefficients `a_i` are drawn iid
/// uniform on `[-1, 1]` from the master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceTarget {
    /// `exp(-Σ a_i z_i)`.
    Exponential,
    /// `(1 + Σ a_i z_i)²`, inside every space of degree at least 2.
    Quadratic,
}

impl ConvergenceTarget {
    fn eval(self, a: &[f64], z: &[f64]) -> f64 {
        let s: f64 = a.iter().zip(z).map(|(a, z)| a * z).sum();
        match self {
            ConvergenceTarget::Exponential => (-s).exp(),
            ConvergenceTarget::Quadratic => (1.0 + s).powi(2),
        }
    }
}

/// Least-squares test error on total-degree spaces against degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub dimension: usize,
    pub degrees: Vec<u32>,
    pub rule: ScalingRule,
    pub samplers: Vec<Sampler>,
    pub variants: Vec<LsVariant>,
    pub target: ConvergenceTarget,
    pub test_points: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            dimension: 2,
            degrees: (1..=26).collect(),
            rule: ScalingRule::Linear2,
            samplers: vec![Sampler::McChebyshev, Sampler::Weil, Sampler::GaussSubsample],
            variants: vec![LsVariant::Chebyshev, LsVariant::LegendrePreconditioned],
            target: ConvergenceTarget::Exponential,
            test_points: 2000,
            trials: 1,
            seed: 0,
        }
    }
}

pub fn run_convergence_study(config: &ConvergenceConfig) -> Result<ExperimentRecord> {
    let start = Instant::now();
    if config.trials == 0 || config.test_points == 0 {
        return Err(Error::InvalidArgument("trials and test_points must be positive".into()));
    }
    let d = config.dimension;
    let mut rng = rng_from_seed(derive_seed(config.seed, &[label_tag("target")]));
    let a: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let test = sample_iid(Density::Uniform, config.test_points, d, derive_seed(config.seed, &[label_tag("test_points")]))?;
    let truth = |z: &[f64]| config.target.eval(&a, z);

    struct Setting {
        sampler: Sampler,
        variant: LsVariant,
        degree: u32,
        n: usize,
        m: usize,
        clamped: bool,
        trials: usize,
    }
    let mut settings = Vec::new();
    for &sampler in &config.samplers {
        for &variant in &config.variants {
            for &degree in &config.degrees {
                let n = IndexSet::total_degree(d, degree)?.len();
                let count = config.rule.count(n)?;
                settings.push(Setting {
                    sampler,
                    variant,
                    degree,
                    n,
                    m: count.m,
                    clamped: count.clamped,
                    trials: if sampler.is_random() { config.trials } else { 1 },
                });
            }
        }
    }
    let jobs: Vec<(usize, usize)> = settings
        .iter()
        .enumerate()
        .flat_map(|(c, s)| (0..s.trials).map(move |t| (c, t)))
        .collect();
    let errors: Vec<f64> = jobs
        .par_iter()
        .map(|&(c, t)| -> Result<f64> {
            let s = &settings[c];
            // Both variants see the same mesh.
            let seed = derive_seed(
                config.seed,
                &[label_tag("convergence"), label_tag(s.sampler.name()), u64::from(s.degree), t as u64],
            );
            let mesh = s.sampler.generate(s.m, d, seed, gauss_grid_degree(s.degree, d, s.m))?;
            let basis = TensorBasis::isotropic(s.variant.family(), IndexSet::total_degree(d, s.degree)?);
            let design = DesignMatrix::assemble(&mesh, &basis)?;
            let u: Vec<f64> = mesh.iter().map(truth).collect();
            let fit = match s.variant {
                LsVariant::Chebyshev => solve_ls(&design, &u)?,
                LsVariant::LegendrePreconditioned => {
                    solve_weighted_ls(&design, &u, &ls_weights(&mesh, Density::Uniform)?)?
                }
            };
            sup_error(&fit.surrogate, truth, &test)
        })
        .collect::<Result<_>>()?;

    let mut record = ExperimentRecord::new(
        "convergence",
        config,
        &["sampler", "variant", "k", "n", "m", "clamped", "trials", "mean_error", "std_error"],
    )?;
    record
        .metadata
        .insert("target_coefficients".into(), serde_json::to_value(&a)?);
    let mut offset = 0;
    for s in &settings {
        let (mean, std) = mean_std(&errors[offset..offset + s.trials]);
        offset += s.trials;
        record.push(vec![
            s.sampler.name().into(),
            s.variant.name().into(),
            s.degree.into(),
            s.n.into(),
            s.m.into(),
            s.clamped.into(),
            s.trials.into(),
            mean.into(),
            std.into(),
        ]);
    }
    record.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_target_is_reproduced() {
        let config = ConvergenceConfig {
            degrees: vec![2, 4],
            target: ConvergenceTarget::Quadratic,
            test_points: 200,
            ..ConvergenceConfig::default()
        };
        let rec = run_convergence_study(&config).unwrap();
        let err = rec.column("mean_error").unwrap();
        assert_eq!(rec.rows.len(), 3 * 2 * 2);
        for row in &rec.rows {
            assert!(row[err].as_f64().unwrap() < 1e-10, "{row:?}");
        }
    }

    #[test]
    fn error_decays_with_degree() {
        let config = ConvergenceConfig {
            degrees: vec![2, 8],
            samplers: vec![Sampler::McChebyshev],
            test_points: 300,
            ..ConvergenceConfig::default()
        };
        let rec = run_convergence_study(&config).unwrap();
        let err = rec.column("mean_error").unwrap();
        for variant in ["chebyshev", "legendre_preconditioned"] {
            let rows = rec.select(&[("variant", variant)]);
            let (e2, e8) = (rows[0][err].as_f64().unwrap(), rows[1][err].as_f64().unwrap());
            assert!(e8 < 1e-3 * e2, "{variant}: {e2} -> {e8}");
        }
        assert!(rec.metadata["target_coefficients"].as_array().unwrap().len() == 2);
    }

    #[test]
    fn seed_changes_the_draw() {
        let base = ConvergenceConfig {
            degrees: vec![3],
            samplers: vec![Sampler::Weil],
            variants: vec![LsVariant::Chebyshev],
            test_points: 50,
            ..ConvergenceConfig::default()
        };
        let a = run_convergence_study(&base).unwrap();
        let b = run_convergence_study(&ConvergenceConfig { seed: 1, ..base }).unwrap();
        assert_ne!(a.metadata, b.metadata);
    }
}
