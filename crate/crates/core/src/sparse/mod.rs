//! Sparse coefficient recovery by ℓ1 minimization.
//!
//! * basis pursuit: `min ‖c‖₁` subject to `Ac = u`
//! * basis pursuit denoising: `min ‖c‖₁` subject to `‖Ac - u‖₂ ≤ ε`
//! * preconditioned variants, solved on `(WA, Wu)` with `W` diagonal

mod ric;
mod simplex;
mod spgl1;
mod study;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::design::{DesignMatrix, WeightVector};
use crate::error::{Error, Result};

pub use ric::ric_bruteforce;
pub use study::{recovery_study, RecoveryRow, RecoverySetup, DEFAULT_SUCCESS_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Relative duality-gap tolerance of the inner problems.
    pub opt_tol: f64,
    /// Relative residual at which an equality-constrained solve is accepted.
    pub bp_tol: f64,
    /// Gradient-to-residual ratio that signals an infeasible budget.
    pub ls_tol: f64,
    /// Relative objective decrease that triggers a Newton update of τ.
    pub dec_tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            opt_tol: 1e-9,
            bp_tol: 1e-9,
            ls_tol: 1e-6,
            dec_tol: 1e-4,
            max_iterations: 10_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BpProblem {
    matrix: DMatrix<f64>,
    data: Vec<f64>,
    epsilon: f64,
    preconditioner: Option<WeightVector>,
}

impl BpProblem {
    pub fn new(matrix: DMatrix<f64>, data: Vec<f64>, epsilon: f64) -> Result<Self> {
        if data.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: data.len(),
            });
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("residual budget {epsilon} must be non-negative")));
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidArgument("need at least one measurement".into()));
        }
        Ok(Self {
            matrix,
            data,
            epsilon,
            preconditioner: None,
        })
    }

    pub fn from_design(a: &DesignMatrix, data: Vec<f64>, epsilon: f64) -> Result<Self> {
        Self::new(a.values().clone(), data, epsilon)
    }

    pub fn with_preconditioner(mut self, w: WeightVector) -> Result<Self> {
        if w.len() != self.matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                got: w.len(),
            });
        }
        self.preconditioner = Some(w);
        Ok(self)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn preconditioner(&self) -> Option<&WeightVector> {
        self.preconditioner.as_ref()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub coefficients: Vec<f64>,
    /// `‖Ac - u‖₂` recomputed from the unscaled problem.
    pub residual: f64,
    pub l1_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Basis pursuit. Inconsistent data yields `converged = false`.
pub fn solve_bp(problem: &BpProblem, opts: &SolverOptions) -> Result<RecoveryResult> {
    if problem.epsilon != 0.0 {
        return Err(Error::InvalidArgument("basis pursuit needs ε = 0".into()));
    }
    Ok(solve(problem, opts))
}

/// Basis pursuit denoising with budget `ε > 0`. With a preconditioner the
/// budget applies to the scaled residual `‖W(Ac - u)‖₂`.
pub fn solve_bpdn(problem: &BpProblem, opts: &SolverOptions) -> Result<RecoveryResult> {
    if problem.epsilon <= 0.0 {
        return Err(Error::InvalidArgument("denoising needs ε > 0".into()));
    }
    Ok(solve(problem, opts))
}

/// Solves the row-scaled problem; coefficients stay in the original coordinates.
pub fn solve_preconditioned(problem: &BpProblem, opts: &SolverOptions) -> Result<RecoveryResult> {
    if problem.preconditioner.is_none() {
        return Err(Error::InvalidArgument("no preconditioner attached".into()));
    }
    Ok(solve(problem, opts))
}

const SIMPLEX_PIVOTS_PER_ROW: usize = 50;

/// Dispatches on ε and the optional preconditioner.
pub fn solve(problem: &BpProblem, opts: &SolverOptions) -> RecoveryResult {
    let (m, n) = problem.matrix.shape();
    let (a, b) = match &problem.preconditioner {
        None => (problem.matrix.clone(), DVector::from_column_slice(&problem.data)),
        Some(w) => {
            let mut a = problem.matrix.clone();
            let mut b = DVector::from_column_slice(&problem.data);
            for i in 0..m {
                let f = w.row_factor(i);
                a.row_mut(i).scale_mut(f);
                b[i] *= f;
            }
            (a, b)
        }
    };
    let b_norm = b.norm();
    let eps = problem.epsilon;

    let (x, iterations, solver_ok) = if b_norm == 0.0 || eps >= b_norm {
        (DVector::zeros(n), 0, true)
    } else {
        let b_unit = &b / b_norm;
        let out = spgl1::solve(&a, &b_unit, eps / b_norm, opts);
        let mut x = out.x;
        let mut ok = matches!(
            out.exit,
            spgl1::Exit::RootFound | spgl1::Exit::BpSolution | spgl1::Exit::Certified
        );
        if eps == 0.0 && out.exit != spgl1::Exit::Certified {
            // Gradient steps can stop on a near-optimal point; pivoting to
            // an optimal vertex settles it exactly.
            match simplex::solve(&a, &b_unit, &x, SIMPLEX_PIVOTS_PER_ROW * m.max(1)) {
                Some(v) if v.optimal => {
                    x = v.x;
                    ok = true;
                }
                _ => {
                    if let Some(y) = spgl1::polish(&a, &b_unit, &x) {
                        x = y;
                    } else if out.exit == spgl1::Exit::BpSolution {
                        ok = true;
                    }
                }
            }
        }
        (x * b_norm, out.iterations, ok)
    };

    let scaled_residual = (&b - &a * &x).norm();
    let feasible = if eps == 0.0 {
        scaled_residual <= 1e-8 * b_norm.max(f64::MIN_POSITIVE) || b_norm == 0.0
    } else {
        scaled_residual <= eps * (1.0 + 1e-6)
    };
    let u = DVector::from_column_slice(&problem.data);
    RecoveryResult {
        residual: (&problem.matrix * &x - u).norm(),
        l1_norm: x.lp_norm(1),
        coefficients: x.iter().copied().collect(),
        iterations,
        converged: solver_ok && feasible,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::seq::index::sample;
    use rand::Rng as _;
    use rand_distr::StandardNormal;

    fn gaussian(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rng_from_seed(seed);
        let scale = 1.0 / (m as f64).sqrt();
        DMatrix::from_fn(m, n, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
    }

    fn planted(n: usize, s: usize, seed: u64) -> DVector<f64> {
        let mut rng = rng_from_seed(seed);
        let mut c = DVector::zeros(n);
        for i in sample(&mut rng, n, s) {
            c[i] = rng.sample(StandardNormal);
        }
        c
    }

    #[test]
    fn zero_data_gives_zero() {
        let p = BpProblem::new(gaussian(5, 10, 1), vec![0.0; 5], 0.0).unwrap();
        let r = solve_bp(&p, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.coefficients.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn square_system_is_forced() {
        let a = gaussian(6, 6, 2);
        let c = DVector::from_vec(vec![1.0, -2.0, 0.5, 0.0, 3.0, -1.0]);
        let u = &a * &c;
        let p = BpProblem::new(a, u.iter().copied().collect(), 0.0).unwrap();
        let r = solve_bp(&p, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        for (x, y) in r.coefficients.iter().zip(c.iter()) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn recovers_planted_sparse_vector() {
        let a = gaussian(40, 100, 3);
        let c = planted(100, 5, 4);
        let u = &a * &c;
        let p = BpProblem::new(a, u.iter().copied().collect(), 0.0).unwrap();
        let r = solve_bp(&p, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        let err = r.coefficients.iter().zip(c.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        assert!(r.residual < 1e-8 * u.norm());
    }

    #[test]
    fn budget_above_data_norm_gives_zero() {
        let a = gaussian(10, 30, 5);
        let u: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let norm = DVector::from_column_slice(&u).norm();
        let p = BpProblem::new(a, u, norm * 1.01).unwrap();
        let r = solve_bpdn(&p, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.l1_norm, 0.0);
    }

    #[test]
    fn denoising_respects_budget() {
        let a = gaussian(30, 60, 6);
        let c = planted(60, 4, 7);
        let u = &a * &c;
        let eps = 0.05 * u.norm();
        let p = BpProblem::new(a, u.iter().copied().collect(), eps).unwrap();
        let r = solve_bpdn(&p, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.residual <= eps * (1.0 + 1e-6));
        assert!(r.l1_norm < c.lp_norm(1));
    }

    #[test]
    fn identity_preconditioner_matches_plain_solve() {
        let a = gaussian(20, 50, 8);
        let c = planted(50, 3, 9);
        let u: Vec<f64> = (&a * &c).iter().copied().collect();
        let plain = solve_bp(&BpProblem::new(a.clone(), u.clone(), 0.0).unwrap(), &SolverOptions::default()).unwrap();
        let w = WeightVector::new(crate::design::WeightKind::CsPreconditioner, vec![1.0; 20]).unwrap();
        let pre = BpProblem::new(a, u, 0.0).unwrap().with_preconditioner(w).unwrap();
        let r = solve_preconditioned(&pre, &SolverOptions::default()).unwrap();
        assert_eq!(r.coefficients, plain.coefficients);
    }

    #[test]
    fn scale_equivariance() {
        let a = gaussian(25, 60, 10);
        let c = planted(60, 4, 11);
        let u = &a * &c;
        let base = solve(&BpProblem::new(a.clone(), u.iter().copied().collect(), 0.0).unwrap(), &SolverOptions::default());
        for lambda in [1e-3, 7.5, 1e4] {
            let p = BpProblem::new(a.clone(), (&u * lambda).iter().copied().collect(), 0.0).unwrap();
            let r = solve(&p, &SolverOptions::default());
            for (x, y) in r.coefficients.iter().zip(&base.coefficients) {
                assert!((x - lambda * y).abs() <= 1e-10 * lambda.max(1.0));
            }
        }
    }

    #[test]
    fn inconsistent_system_is_not_converged() {
        // Two identical rows with different data.
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
        let p = BpProblem::new(a, vec![1.0, 2.0], 0.0).unwrap();
        let r = solve_bp(&p, &SolverOptions::default()).unwrap();
        assert!(!r.converged);
        assert!(r.residual > 0.5);
    }

    #[test]
    fn argument_checks() {
        assert!(BpProblem::new(gaussian(3, 5, 0), vec![0.0; 4], 0.0).is_err());
        assert!(BpProblem::new(gaussian(3, 5, 0), vec![0.0; 3], -1.0).is_err());
        let p = BpProblem::new(gaussian(3, 5, 0), vec![0.0; 3], 0.1).unwrap();
        assert!(solve_bp(&p, &SolverOptions::default()).is_err());
        assert!(solve_preconditioned(&p, &SolverOptions::default()).is_err());
    }
}
