//! Overdetermined (weighted) least-squares collocation and surrogate evaluation.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{DesignMatrix, WeightVector};
use crate::error::{Error, Result};
use crate::index_sets::IndexSet;
use crate::mesh::NodalArray;
use crate::poly_basis::{Family, TensorBasis};

/// Relative singular-value threshold below which a design is rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// A polynomial `Σ_α c_α φ_α` over a tensor basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSurrogate", into = "RawSurrogate")]
pub struct Surrogate {
    basis: TensorBasis,
    coefficients: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSurrogate {
    index_set: IndexSet,
    families: Vec<Family>,
    coefficients: Vec<f64>,
}

impl TryFrom<RawSurrogate> for Surrogate {
    type Error = Error;
    fn try_from(raw: RawSurrogate) -> Result<Self> {
        Surrogate::new(TensorBasis::new(raw.families, raw.index_set)?, raw.coefficients)
    }
}

impl From<Surrogate> for RawSurrogate {
    fn from(s: Surrogate) -> Self {
        RawSurrogate {
            index_set: s.basis.index_set().clone(),
            families: s.basis.families().to_vec(),
            coefficients: s.coefficients,
        }
    }
}

impl Surrogate {
    pub fn new(basis: TensorBasis, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: coefficients.len(),
            });
        }
        Ok(Self { basis, coefficients })
    }

    pub fn zero(basis: TensorBasis) -> Self {
        let n = basis.len();
        Self {
            basis,
            coefficients: vec![0.0; n],
        }
    }

    pub fn basis(&self) -> &TensorBasis {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coefficients
    }

    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        let mut row = vec![0.0; self.basis.len()];
        self.basis.eval_row(z, &mut row)?;
        Ok(row.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Result of a least-squares solve.
#[derive(Clone, Debug)]
pub struct LsFit {
    pub surrogate: Surrogate,
    /// `‖diag(r)(Ac - u)‖₂` with the row factors used in the solve.
    pub residual: f64,
}

fn solve_scaled(a: DMatrix<f64>, u: &[f64], factors: Option<&[f64]>, basis: &TensorBasis) -> Result<LsFit> {
    let (m, n) = a.shape();
    if u.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: u.len() });
    }
    if m < n {
        return Err(Error::Underdetermined { rows: m, cols: n });
    }
    let mut rhs = DVector::from_column_slice(u);
    if let Some(f) = factors {
        for (x, s) in rhs.iter_mut().zip(f) {
            *x *= s;
        }
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_TOL * smax)
        .count();
    if n > 0 && (smax == 0.0 || rank < n) {
        return Err(Error::RankDeficient { rank, required: n });
    }
    let c = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let residual = (&a * &c - &rhs).norm();
    Ok(LsFit {
        surrogate: Surrogate::new(basis.clone(), c.iter().copied().collect())?,
        residual,
    })
}

/// Minimizes `‖Ac - u‖₂` by SVD. Row weights attached to `A` are honored.
pub fn solve_ls(a: &DesignMatrix, u: &[f64]) -> Result<LsFit> {
    let factors = a.row_weights().map(WeightVector::row_factors);
    solve_scaled(a.weighted_values(), u, factors.as_deref(), a.basis())
}

/// Minimizes `Σ_m w_m (u_m - (Ac)_m)²` by scaling rows of `A` and `u` by `√w_m`.
pub fn solve_weighted_ls(a: &DesignMatrix, u: &[f64], w: &WeightVector) -> Result<LsFit> {
    if w.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: w.len(),
        });
    }
    let factors: Vec<f64> = w.values().iter().map(|x| x.sqrt()).collect();
    let mut scaled = a.values().clone();
    for (m, f) in factors.iter().enumerate() {
        scaled.row_mut(m).scale_mut(*f);
    }
    solve_scaled(scaled, u, Some(&factors), a.basis())
}

/// Surrogate values at every point of a mesh.
pub fn eval_surrogate(s: &Surrogate, points: &NodalArray) -> Result<Vec<f64>> {
    let pts: Vec<&[f64]> = points.iter().collect();
    pts.par_iter().map(|z| s.eval(z)).collect()
}

/// `max_i |s(z_i) - truth(z_i)|` over the test points.
pub fn sup_error(s: &Surrogate, truth: impl Fn(&[f64]) -> f64 + Sync, test_points: &NodalArray) -> Result<f64> {
    let values = eval_surrogate(s, test_points)?;
    Ok(values
        .iter()
        .zip(test_points.iter())
        .map(|(v, z)| (v - truth(z)).abs())
        .fold(0.0, f64::max))
}
