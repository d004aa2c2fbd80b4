//! Univariate orthonormal polynomial families, their tensor products, and
//! the probability densities they are orthonormal against.
//!
//! Every family is normalized so that `φ_0 ≡ 1` and
//! `∫ φ_n φ_m ρ = δ_{nm}` with `ρ` a probability density.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index_sets::{IndexSet, MultiIndex};

/// Orthonormal polynomial family.
///
/// | family    | support  | probability weight          |
/// |-----------|----------|-----------------------------|
/// | chebyshev | `[-1,1]` | `1 / (π √(1-z²))`           |
/// | legendre  | `[-1,1]` | `1/2`                       |
/// | hermite   | `ℝ`      | `exp(-z²) / √π`             |
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Chebyshev,
    Legendre,
    Hermite,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    Interval(f64, f64),
    RealLine,
}

impl Support {
    pub fn contains(&self, z: f64) -> bool {
        match *self {
            Support::Interval(a, b) => (a..=b).contains(&z),
            Support::RealLine => z.is_finite(),
        }
    }
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Chebyshev => "chebyshev",
            Family::Legendre => "legendre",
            Family::Hermite => "hermite",
        }
    }

    pub fn support(self) -> Support {
        match self {
            Family::Chebyshev | Family::Legendre => Support::Interval(-1.0, 1.0),
            Family::Hermite => Support::RealLine,
        }
    }

    /// Off-diagonal Jacobi coefficient `b_n` (n ≥ 1) of the orthonormal recurrence
    /// `z φ_{n-1} = b_n φ_n + b_{n-1} φ_{n-2}`. All three families are symmetric,
    /// so the diagonal coefficients vanish.
    pub fn recurrence_b(self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        let nf = n as f64;
        match self {
            Family::Chebyshev => {
                if n == 1 {
                    FRAC_1_SQRT_2
                } else {
                    0.5
                }
            }
            Family::Legendre => nf / (4.0 * nf * nf - 1.0).sqrt(),
            Family::Hermite => (nf / 2.0).sqrt(),
        }
    }

    /// Value of the degree-`n` orthonormal polynomial at `z`.
    pub fn eval(self, n: usize, z: f64) -> Result<f64> {
        self.check_support(z)?;
        let mut buf = vec![0.0; n + 1];
        self.eval_upto(z, &mut buf);
        Ok(buf[n])
    }

    /// Fills `out[i] = φ_i(z)` for `i < out.len()` by forward recurrence.
    /// No support check.
    pub fn eval_upto(self, z: f64, out: &mut [f64]) {
        self.recur(1.0, z, out);
    }

    fn recur(self, start: f64, z: f64, out: &mut [f64]) {
        if out.is_empty() {
            return;
        }
        out[0] = start;
        if out.len() == 1 {
            return;
        }
        out[1] = z * start / self.recurrence_b(1);
        let mut b_prev = self.recurrence_b(1);
        for n in 2..out.len() {
            let b = self.recurrence_b(n);
            out[n] = (z * out[n - 1] - b_prev * out[n - 2]) / b;
            b_prev = b;
        }
    }

    pub fn check_support(self, z: f64) -> Result<()> {
        if self.support().contains(z) {
            Ok(())
        } else {
            Err(Error::OutsideSupport {
                family: self.name(),
                value: z,
            })
        }
    }

    /// Probability density the family is orthonormal against.
    pub fn weight(self, z: f64) -> Result<f64> {
        match self {
            Family::Chebyshev => Density::Chebyshev.eval(z),
            Family::Legendre => Density::Uniform.eval(z),
            Family::Hermite => Ok((-z * z).exp() / PI.sqrt()),
        }
    }
}

/// Named probability densities used for sampling and weighting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    /// `1/2` on `[-1,1]`.
    Uniform,
    /// Arcsine density `1/(π√(1-z²))` on `(-1,1)`.
    Chebyshev,
    /// Standard normal.
    Gaussian,
}

impl Density {
    pub fn name(self) -> &'static str {
        match self {
            Density::Uniform => "uniform",
            Density::Chebyshev => "chebyshev",
            Density::Gaussian => "gaussian",
        }
    }

    /// The orthonormal family associated with this density.
    pub fn family(self) -> Family {
        match self {
            Density::Uniform => Family::Legendre,
            Density::Chebyshev => Family::Chebyshev,
            Density::Gaussian => Family::Hermite,
        }
    }

    pub fn eval(self, z: f64) -> Result<f64> {
        match self {
            Density::Uniform => {
                if (-1.0..=1.0).contains(&z) {
                    Ok(0.5)
                } else {
                    Err(Error::OutsideSupport {
                        family: "uniform",
                        value: z,
                    })
                }
            }
            Density::Chebyshev => {
                if z.abs() < 1.0 {
                    Ok(1.0 / (PI * (1.0 - z * z).sqrt()))
                } else {
                    Err(Error::SingularDensity {
                        density: "chebyshev",
                        value: z,
                    })
                }
            }
            Density::Gaussian => Ok((-0.5 * z * z).exp() / (2.0 * PI).sqrt()),
        }
    }

    /// Product density over the coordinates of `z`.
    pub fn eval_product(self, z: &[f64]) -> Result<f64> {
        z.iter().try_fold(1.0, |acc, &x| Ok(acc * self.eval(x)?))
    }
}

/// Hermite function `ψ_n(z) = exp(-z²/2) φ_n(z)`, `φ_n` orthonormal under `exp(-z²)/√π`.
///
/// The Gaussian envelope is folded into the recurrence start, so large `|z|`
/// does not overflow.
pub fn hermite_function(n: usize, z: f64) -> f64 {
    let mut buf = vec![0.0; n + 1];
    Family::Hermite.recur((-0.5 * z * z).exp(), z, &mut buf);
    buf[n]
}

/// Tensor-product basis `φ_α(z) = ∏_j φ^{(j)}_{α_j}(z_j)` over an index set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensorBasis", into = "RawTensorBasis")]
pub struct TensorBasis {
    families: Vec<Family>,
    index_set: Arc<IndexSet>,
    max_degrees: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RawTensorBasis {
    families: Vec<Family>,
    index_set: IndexSet,
}

impl TryFrom<RawTensorBasis> for TensorBasis {
    type Error = Error;
    fn try_from(raw: RawTensorBasis) -> Result<Self> {
        TensorBasis::new(raw.families, raw.index_set)
    }
}

impl From<TensorBasis> for RawTensorBasis {
    fn from(b: TensorBasis) -> Self {
        RawTensorBasis {
            families: b.families,
            index_set: (*b.index_set).clone(),
        }
    }
}

impl TensorBasis {
    pub fn new(families: Vec<Family>, index_set: impl Into<Arc<IndexSet>>) -> Result<Self> {
        let index_set = index_set.into();
        if families.len() != index_set.dimension() {
            return Err(Error::DimensionMismatch {
                expected: index_set.dimension(),
                got: families.len(),
            });
        }
        let max_degrees = index_set.max_degrees();
        Ok(Self {
            families,
            index_set,
            max_degrees,
        })
    }

    /// Same family in every coordinate.
    pub fn isotropic(family: Family, index_set: impl Into<Arc<IndexSet>>) -> Self {
        let index_set = index_set.into();
        let families = vec![family; index_set.dimension()];
        Self::new(families, index_set).expect("family count matches by construction")
    }

    pub fn families(&self) -> &[Family] {
        &self.families
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    pub fn index_set_arc(&self) -> &Arc<IndexSet> {
        &self.index_set
    }

    pub fn dimension(&self) -> usize {
        self.families.len()
    }

    /// Number of basis functions `N`.
    pub fn len(&self) -> usize {
        self.index_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_set.is_empty()
    }

    pub fn check_point(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: z.len(),
            });
        }
        for (f, &x) in self.families.iter().zip(z) {
            f.check_support(x)?;
        }
        Ok(())
    }

    /// `φ_α(z)` for a single multi-index.
    pub fn eval(&self, alpha: &MultiIndex, z: &[f64]) -> Result<f64> {
        self.check_point(z)?;
        if alpha.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: alpha.dimension(),
            });
        }
        let mut value = 1.0;
        for ((f, &a), &x) in self.families.iter().zip(alpha.degrees()).zip(z) {
            value *= f.eval(a as usize, x)?;
        }
        Ok(value)
    }

    /// Writes all `N` basis values at `z` into `out`, in index-set order.
    pub fn eval_row(&self, z: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_point(z)?;
        if out.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: out.len(),
            });
        }
        self.eval_row_unchecked(z, out);
        Ok(())
    }

    pub(crate) fn eval_row_unchecked(&self, z: &[f64], out: &mut [f64]) {
        let tables: Vec<Vec<f64>> = self
            .families
            .iter()
            .zip(&self.max_degrees)
            .zip(z)
            .map(|((f, &k), &x)| {
                let mut t = vec![0.0; k as usize + 1];
                f.eval_upto(x, &mut t);
                t
            })
            .collect();
        for (o, alpha) in out.iter_mut().zip(self.index_set.iter()) {
            *o = alpha
                .degrees()
                .iter()
                .zip(&tables)
                .map(|(&a, t)| t[a as usize])
                .product();
        }
    }

    /// Product of the families' orthogonality weights at `z`.
    pub fn density(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: z.len(),
            });
        }
        self.families
            .iter()
            .zip(z)
            .try_fold(1.0, |acc, (f, &x)| Ok(acc * f.weight(x)?))
    }
}
