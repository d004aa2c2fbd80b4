use nalgebra::DVector;
use rand::seq::index::sample;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve, BpProblem, SolverOptions};
use crate::design::{cs_preconditioner, DesignMatrix};
use crate::error::{Error, Result};
use crate::mesh::{NodalArray, Sampler};
use crate::poly_basis::TensorBasis;
use crate::rng::{derive_seed, label_tag, rng_from_seed};

/// A trial succeeds when `‖c# - c‖∞` is at most this.
pub const DEFAULT_SUCCESS_TOL: f64 = 1e-4;

/// One recovery configuration: basis, mesh family, sample count and solver settings.
#[derive(Clone, Debug)]
pub struct RecoverySetup {
    pub basis: TensorBasis,
    pub sampler: Sampler,
    pub preconditioned: bool,
    pub count: usize,
    /// Per-axis degree of the candidate grid for [`Sampler::GaussSubsample`].
    pub candidate_degree: u32,
    pub success_tol: f64,
    pub options: SolverOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryRow {
    pub s: usize,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    pub mean_iterations: f64,
}

struct Trial {
    success: bool,
    iterations: usize,
}

fn mesh_for(setup: &RecoverySetup, seed: u64, s: usize, t: usize) -> Result<NodalArray> {
    let mesh_seed = derive_seed(seed, &[label_tag("mesh"), label_tag(setup.sampler.name()), s as u64, t as u64]);
    setup
        .sampler
        .generate(setup.count, setup.basis.dimension(), mesh_seed, setup.candidate_degree)
}

fn run_trial(setup: &RecoverySetup, fixed: Option<&NodalArray>, seed: u64, s: usize, t: usize) -> Result<Trial> {
    let owned;
    let mesh = match fixed {
        Some(m) => m,
        None => {
            owned = mesh_for(setup, seed, s, t)?;
            &owned
        }
    };
    let n = setup.basis.len();
    // The planted vector depends only on (s, t), so samplers are compared on equal footing.
    let mut rng = rng_from_seed(derive_seed(seed, &[label_tag("coefficients"), s as u64, t as u64]));
    let mut c = DVector::zeros(n);
    for i in sample(&mut rng, n, s) {
        c[i] = rng.sample(StandardNormal);
    }
    let a = DesignMatrix::assemble(mesh, &setup.basis)?;
    let u: Vec<f64> = (a.values() * &c).iter().copied().collect();
    let mut problem = BpProblem::from_design(&a, u, 0.0)?;
    if setup.preconditioned {
        problem = problem.with_preconditioner(cs_preconditioner(mesh)?)?;
    }
    let result = solve(&problem, &setup.options);
    let err = result
        .coefficients
        .iter()
        .zip(c.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(Trial {
        success: err <= setup.success_tol,
        iterations: result.iterations,
    })
}

/// Success rates of ℓ1 recovery of planted `s`-sparse vectors. Supports are
/// uniform over the index set, values iid standard normal. Trials run in
/// parallel; rows are ordered as `s_values`.
pub fn recovery_study(setup: &RecoverySetup, s_values: &[usize], trials: usize, seed: u64) -> Result<Vec<RecoveryRow>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let n = setup.basis.len();
    if let Some(&s) = s_values.iter().find(|&&s| s > n) {
        return Err(Error::InvalidArgument(format!("sparsity {s} exceeds basis size {n}")));
    }
    let fixed = if setup.sampler.is_random() {
        None
    } else {
        Some(mesh_for(setup, seed, 0, 0)?)
    };
    let jobs: Vec<(usize, usize)> = s_values
        .iter()
        .flat_map(|&s| (0..trials).map(move |t| (s, t)))
        .collect();
    let outcomes: Vec<Trial> = jobs
        .par_iter()
        .map(|&(s, t)| run_trial(setup, fixed.as_ref(), seed, s, t))
        .collect::<Result<_>>()?;
    Ok(s_values
        .iter()
        .zip(outcomes.chunks(trials))
        .map(|(&s, chunk)| {
            let successes = chunk.iter().filter(|t| t.success).count();
            let iters: usize = chunk.iter().map(|t| t.iterations).sum();
            RecoveryRow {
                s,
                trials,
                successes,
                rate: successes as f64 / trials as f64,
                mean_iterations: iters as f64 / trials as f64,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_sets::IndexSet;
    use crate::poly_basis::Family;

    fn setup(sampler: Sampler) -> RecoverySetup {
        RecoverySetup {
            basis: TensorBasis::isotropic(Family::Chebyshev, IndexSet::total_degree(2, 8).unwrap()),
            sampler,
            preconditioned: false,
            count: 25,
            candidate_degree: 8,
            success_tol: DEFAULT_SUCCESS_TOL,
            options: SolverOptions::default(),
        }
    }

    #[test]
    fn zero_sparsity_always_succeeds() {
        let rows = recovery_study(&setup(Sampler::McChebyshev), &[0], 5, 1).unwrap();
        assert_eq!(rows[0].successes, 5);
        assert_eq!(rows[0].rate, 1.0);
    }

    #[test]
    fn deterministic_and_ordered() {
        let a = recovery_study(&setup(Sampler::Weil), &[1, 3, 12], 6, 9).unwrap();
        let b = recovery_study(&setup(Sampler::Weil), &[1, 3, 12], 6, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|r| r.s).collect::<Vec<_>>(), vec![1, 3, 12]);
        assert!(a[0].rate >= a[2].rate);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(recovery_study(&setup(Sampler::McChebyshev), &[1], 0, 0).is_err());
        assert!(recovery_study(&setup(Sampler::McChebyshev), &[1000], 1, 0).is_err());
    }
}
