//! Design matrices `A_{mn} = φ_n(z_m)`, row weights, and Gram diagnostics.
//!
//! Gram matrices are normalized as `G = (1/M) AᵀA`, so a well-sampled
//! orthonormal basis gives `G ≈ I`.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::NodalArray;
use crate::poly_basis::{Density, TensorBasis};

/// Above this many columns spectral diagnostics switch to power iteration.
pub const DENSE_SPECTRAL_LIMIT: usize = 2000;
const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// Least-squares weights; rows are scaled by `√w`.
    ChristoffelLs,
    /// ℓ1 preconditioner; rows are scaled by `w`.
    CsPreconditioner,
    Unit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    kind: WeightKind,
    values: Vec<f64>,
}

impl WeightVector {
    pub fn new(kind: WeightKind, values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "weight {i} is {}; weights must be positive and finite",
                values[i]
            )));
        }
        Ok(Self { kind, values })
    }

    pub fn unit(count: usize) -> Self {
        Self {
            kind: WeightKind::Unit,
            values: vec![1.0; count],
        }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multiplier applied to row `m` of the design matrix and the data.
    pub fn row_factor(&self, m: usize) -> f64 {
        match self.kind {
            WeightKind::ChristoffelLs => self.values[m].sqrt(),
            WeightKind::CsPreconditioner => self.values[m],
            WeightKind::Unit => 1.0,
        }
    }

    pub fn row_factors(&self) -> Vec<f64> {
        (0..self.len()).map(|m| self.row_factor(m)).collect()
    }
}

fn interior_factor(mesh: &NodalArray, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    mesh.iter()
        .enumerate()
        .map(|(row, z)| {
            if z.iter().any(|x| x.abs() >= 1.0) {
                return Err(Error::BoundaryPoint { row });
            }
            Ok(z.iter().map(|&x| f(x)).product())
        })
        .collect()
}

/// Weights `π^d ρ(z) ∏ √(1-z_q²)` that retarget Chebyshev-distributed samples
/// to the density `ρ`. Only compactly supported densities are accepted.
pub fn ls_weights(mesh: &NodalArray, density: Density) -> Result<WeightVector> {
    let values = match density {
        Density::Uniform => interior_factor(mesh, |x| {
            std::f64::consts::FRAC_PI_2 * (1.0 - x * x).sqrt()
        })?,
        Density::Chebyshev => interior_factor(mesh, |_| 1.0)?,
        Density::Gaussian => {
            return Err(Error::InvalidArgument(
                "least-squares weights need a density supported on [-1,1]".into(),
            ))
        }
    };
    WeightVector::new(WeightKind::ChristoffelLs, values)
}

/// Diagonal preconditioner `(π/2)^{-d/2} ∏ (1-z_q²)^{1/4}` for Legendre
/// recovery from Chebyshev-distributed samples.
pub fn cs_preconditioner(mesh: &NodalArray) -> Result<WeightVector> {
    let c = std::f64::consts::FRAC_PI_2.powf(-0.5);
    let values = interior_factor(mesh, |x| c * (1.0 - x * x).sqrt().sqrt())?;
    WeightVector::new(WeightKind::CsPreconditioner, values)
}

/// Condition number of a Gram matrix. Singular matrices give `+∞` with the flag set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionNumber {
    pub value: f64,
    pub rank_deficient: bool,
}

#[derive(Clone, Debug)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    mesh: Arc<NodalArray>,
    basis: TensorBasis,
    row_weights: Option<WeightVector>,
}

impl DesignMatrix {
    /// Builds the `M×N` matrix, columns in index-set order.
    pub fn assemble(mesh: &NodalArray, basis: &TensorBasis) -> Result<Self> {
        if mesh.dimension() != basis.dimension() {
            return Err(Error::DimensionMismatch {
                expected: basis.dimension(),
                got: mesh.dimension(),
            });
        }
        for (row, z) in mesh.iter().enumerate() {
            for (coordinate, (f, &value)) in basis.families().iter().zip(z).enumerate() {
                if !f.support().contains(value) {
                    return Err(Error::RowOutsideSupport {
                        row,
                        coordinate,
                        value,
                    });
                }
            }
        }
        let n = basis.len();
        let rows: Vec<Vec<f64>> = mesh
            .iter()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|z| {
                let mut r = vec![0.0; n];
                basis.eval_row_unchecked(z, &mut r);
                r
            })
            .collect();
        let values = DMatrix::from_fn(mesh.count(), n, |i, j| rows[i][j]);
        Ok(Self {
            values,
            mesh: Arc::new(mesh.clone()),
            basis: basis.clone(),
            row_weights: None,
        })
    }

    /// Attaches row weights. Diagnostics and solves then use the scaled rows.
    pub fn with_weights(mut self, weights: WeightVector) -> Result<Self> {
        if weights.len() != self.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.nrows(),
                got: weights.len(),
            });
        }
        self.row_weights = Some(weights);
        Ok(self)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn mesh(&self) -> &NodalArray {
        &self.mesh
    }

    pub fn basis(&self) -> &TensorBasis {
        &self.basis
    }

    pub fn row_weights(&self) -> Option<&WeightVector> {
        self.row_weights.as_ref()
    }

    /// `diag(r) A` with `r` the weights' row factors, or `A` when unweighted.
    pub fn weighted_values(&self) -> DMatrix<f64> {
        match &self.row_weights {
            None => self.values.clone(),
            Some(w) => {
                let mut a = self.values.clone();
                for m in 0..a.nrows() {
                    let f = w.row_factor(m);
                    a.row_mut(m).scale_mut(f);
                }
                a
            }
        }
    }

    pub fn gram(&self) -> DMatrix<f64> {
        gram_matrix(&self.weighted_values())
    }

    pub fn stability_norm(&self) -> f64 {
        stability_norm(&self.gram())
    }

    pub fn condition_number(&self) -> ConditionNumber {
        condition_number(&self.gram())
    }

    /// Writes the unweighted matrix as CSV with `phi_<index>` column headers.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = self
            .basis
            .index_set()
            .iter()
            .map(|a| {
                let parts: Vec<String> = a.degrees().iter().map(u32::to_string).collect();
                format!("phi_{}", parts.join("_"))
            })
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for row in self.values.row_iter() {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// `(1/M) AᵀA`, symmetrized.
pub fn gram_matrix(a: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows().max(1) as f64;
    let mut g = a.tr_mul(a) / m;
    let n = g.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (g[(i, j)] + g[(j, i)]);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Spectral norm `|||G - I|||` of a symmetric matrix.
pub fn stability_norm(gram: &DMatrix<f64>) -> f64 {
    let n = gram.nrows();
    let dev = gram - DMatrix::<f64>::identity(n, n);
    if n == 0 {
        return 0.0;
    }
    if n < DENSE_SPECTRAL_LIMIT {
        SymmetricEigen::new(dev).eigenvalues.amax()
    } else {
        power_iteration(&dev).abs()
    }
}

/// `λ_max / λ_min` of a symmetric positive semidefinite matrix.
pub fn condition_number(gram: &DMatrix<f64>) -> ConditionNumber {
    let n = gram.nrows();
    if n == 0 {
        return ConditionNumber {
            value: 1.0,
            rank_deficient: false,
        };
    }
    let (lo, hi) = if n < DENSE_SPECTRAL_LIMIT {
        let ev = SymmetricEigen::new(gram.clone()).eigenvalues;
        (ev.min(), ev.max())
    } else {
        let hi = power_iteration(gram);
        let shifted = DMatrix::<f64>::identity(n, n) * hi - gram;
        (hi - power_iteration(&shifted), hi)
    };
    if hi.is_nan() || hi <= 0.0 || lo <= hi * f64::EPSILON * n as f64 {
        return ConditionNumber {
            value: f64::INFINITY,
            rank_deficient: true,
        };
    }
    ConditionNumber {
        value: (hi / lo).max(1.0),
        rank_deficient: false,
    }
}

/// Dominant eigenvalue (signed) of a symmetric matrix.
fn power_iteration(s: &DMatrix<f64>) -> f64 {
    let n = s.nrows();
    // Deterministic start with a component along every coordinate.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618_033_988_75).fract());
    v.normalize_mut();
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let w = s * &v;
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        if (next - lambda).abs() <= POWER_TOL * next.abs().max(1e-300) {
            return next;
        }
        lambda = next;
    }
    lambda
}
