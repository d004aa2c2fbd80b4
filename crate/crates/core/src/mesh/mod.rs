//! Collocation meshes: Monte Carlo samples, Weil points, subsampled
//! Chebyshev–Gauss grids, mapped samples for unbounded domains, and greedy
//! discrete Leja subsets.

mod io;
mod leja;
mod weil;

use rand::distr::Open01;
use rand::seq::index;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index_sets::tensor_cardinality;
use crate::poly_basis::Density;
use crate::quadrature::chebyshev_gauss_nodes;
use crate::rng::rng_from_seed;

pub use io::{read_csv, write_csv};
pub use leja::{discrete_leja, discrete_leja_indices};
pub use weil::{
    check_prime, is_prime, smallest_prime_at_least, weil_point, weil_points, weil_points_interior,
    weil_symmetry_holds,
};

/// How a mesh was produced. Together with the sampler code this determines
/// the points exactly.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub sampler: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Density>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_parameter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<Box<Provenance>>,
}

impl Provenance {
    pub fn named(sampler: &str) -> Self {
        Self {
            sampler: sampler.to_string(),
            ..Self::default()
        }
    }
}

/// `M` points in `d` dimensions, stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNodalArray", into = "RawNodalArray")]
pub struct NodalArray {
    dimension: usize,
    points: Vec<f64>,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct RawNodalArray {
    dimension: usize,
    count: usize,
    provenance: Provenance,
    points: Vec<Vec<f64>>,
}

impl TryFrom<RawNodalArray> for NodalArray {
    type Error = Error;
    fn try_from(raw: RawNodalArray) -> Result<Self> {
        if raw.points.len() != raw.count {
            return Err(Error::Parse(format!(
                "count {} does not match {} points",
                raw.count,
                raw.points.len()
            )));
        }
        NodalArray::from_rows(raw.dimension, &raw.points, raw.provenance)
    }
}

impl From<NodalArray> for RawNodalArray {
    fn from(a: NodalArray) -> Self {
        RawNodalArray {
            dimension: a.dimension,
            count: a.count(),
            points: a.iter().map(<[f64]>::to_vec).collect(),
            provenance: a.provenance,
        }
    }
}

impl NodalArray {
    /// Builds from a flat row-major buffer. Every coordinate must be finite.
    pub fn new(dimension: usize, points: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if !points.len().is_multiple_of(dimension) {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates do not form rows of length {dimension}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite coordinate in row {}",
                i / dimension
            )));
        }
        Ok(Self {
            dimension,
            points,
            provenance,
        })
    }

    pub fn from_rows(dimension: usize, rows: &[Vec<f64>], provenance: Provenance) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.len() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: r.len(),
            });
        }
        Self::new(dimension, rows.concat(), provenance)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of points `M`.
    pub fn count(&self) -> usize {
        self.points.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dimension)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Values of one coordinate across all points.
    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.iter().map(|p| p[j]).collect()
    }

    /// First `m` points, keeping provenance.
    pub fn truncated(&self, m: usize) -> NodalArray {
        let m = m.min(self.count());
        NodalArray {
            dimension: self.dimension,
            points: self.points[..m * self.dimension].to_vec(),
            provenance: self.provenance.clone(),
        }
    }

    /// Subset of rows in the given order.
    pub fn select(&self, rows: &[usize], provenance: Provenance) -> NodalArray {
        let mut points = Vec::with_capacity(rows.len() * self.dimension);
        for &r in rows {
            points.extend_from_slice(self.point(r));
        }
        NodalArray {
            dimension: self.dimension,
            points,
            provenance,
        }
    }

    /// Concatenation with another mesh of the same dimension.
    pub fn concat(&self, other: &NodalArray) -> Result<NodalArray> {
        if other.dimension != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: other.dimension,
            });
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        Ok(NodalArray {
            dimension: self.dimension,
            points,
            provenance: Provenance {
                sampler: "concat".into(),
                parent: Some(Box::new(self.provenance.clone())),
                ..Provenance::default()
            },
        })
    }

    /// Every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> NodalArray {
        NodalArray {
            dimension: self.dimension,
            points: self.points.iter().map(|x| x * factor).collect(),
            provenance: Provenance {
                sampler: "scaled".into(),
                map_parameter: Some(factor),
                parent: Some(Box::new(self.provenance.clone())),
                ..Provenance::default()
            },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `M` iid draws from a product density. Chebyshev draws are `cos(πU)`.
pub fn sample_iid(density: Density, count: usize, dimension: usize, seed: u64) -> Result<NodalArray> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let n = count * dimension;
    let points: Vec<f64> = match density {
        Density::Uniform => (0..n)
            .map(|_| 2.0 * rng.sample::<f64, _>(Open01) - 1.0)
            .collect(),
        Density::Chebyshev => (0..n)
            .map(|_| (std::f64::consts::PI * rng.sample::<f64, _>(Open01)).cos())
            .collect(),
        Density::Gaussian => (0..n).map(|_| rng.sample(StandardNormal)).collect(),
    };
    NodalArray::new(
        dimension,
        points,
        Provenance {
            sampler: "iid".into(),
            density: Some(density),
            seed: Some(seed),
            ..Provenance::default()
        },
    )
}

/// `M` distinct points drawn uniformly without replacement from the tensor grid
/// of `(k+1)`-point Chebyshev–Gauss rules. Rows are returned in grid order.
pub fn subsampled_gauss_grid(degree: u32, dimension: usize, count: usize, seed: u64) -> Result<NodalArray> {
    let total = tensor_cardinality(dimension, degree)
        .filter(|&t| t <= usize::MAX as u128)
        .ok_or_else(|| Error::InvalidArgument("candidate grid too large".into()))?
        as usize;
    if count == 0 || count > total {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {count} points from a candidate grid of {total}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut picks = index::sample(&mut rng, total, count).into_vec();
    picks.sort_unstable();
    let nodes = chebyshev_gauss_nodes(degree as usize + 1);
    let base = nodes.len();
    let mut points = Vec::with_capacity(count * dimension);
    for flat in picks {
        let mut rest = flat;
        for _ in 0..dimension {
            points.push(nodes[rest % base]);
            rest /= base;
        }
    }
    NodalArray::new(
        dimension,
        points,
        Provenance {
            sampler: "gauss_subsample".into(),
            seed: Some(seed),
            candidate_degree: Some(degree),
            ..Provenance::default()
        },
    )
}

/// The full tensor Chebyshev–Gauss grid with `(k+1)^d` points.
pub fn gauss_tensor_grid(degree: u32, dimension: usize) -> Result<NodalArray> {
    let total = tensor_cardinality(dimension, degree)
        .filter(|&t| t <= 10_000_000)
        .ok_or_else(|| Error::InvalidArgument("tensor grid too large".into()))? as usize;
    let mut mesh = subsampled_gauss_grid(degree, dimension, total, 0)?;
    mesh.provenance = Provenance {
        sampler: "gauss_grid".into(),
        candidate_degree: Some(degree),
        ..Provenance::default()
    };
    Ok(mesh)
}

/// One-dimensional samples `z = (L/2) ln((1-ξ)/(1+ξ))` with `ξ` uniform on `(-1,1)`.
pub fn mapped_uniform(count: usize, map_parameter: f64, seed: u64) -> Result<NodalArray> {
    if !(map_parameter > 0.0 && map_parameter.is_finite()) {
        return Err(Error::InvalidArgument("map parameter must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let points = (0..count)
        .map(|_| loop {
            let xi = 2.0 * rng.sample::<f64, _>(Open01) - 1.0;
            if xi.abs() < 1.0 {
                break map_to_real_line(xi, map_parameter);
            }
        })
        .collect();
    NodalArray::new(
        1,
        points,
        Provenance {
            sampler: "mapped_uniform".into(),
            seed: Some(seed),
            map_parameter: Some(map_parameter),
            ..Provenance::default()
        },
    )
}

/// The monotone decreasing map `(-1,1) → ℝ` used by [`mapped_uniform`].
pub fn map_to_real_line(xi: f64, map_parameter: f64) -> f64 {
    0.5 * map_parameter * ((1.0 - xi) / (1.0 + xi)).ln()
}

/// Target distribution for [`empirical_marginal_distance`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalTarget {
    /// CDF `arcsin(z)/π + 1/2` on `[-1,1]`.
    Arcsine,
}

impl MarginalTarget {
    pub fn cdf(self, z: f64) -> f64 {
        match self {
            MarginalTarget::Arcsine => {
                if z <= -1.0 {
                    0.0
                } else if z >= 1.0 {
                    1.0
                } else {
                    z.asin() / std::f64::consts::PI + 0.5
                }
            }
        }
    }
}

/// Kolmogorov–Smirnov distance between one coordinate's empirical CDF and a target CDF.
pub fn empirical_marginal_distance(mesh: &NodalArray, coordinate: usize, target: MarginalTarget) -> Result<f64> {
    if coordinate >= mesh.dimension() {
        return Err(Error::InvalidArgument(format!(
            "coordinate {coordinate} out of range for dimension {}",
            mesh.dimension()
        )));
    }
    let mut values = mesh.coordinate(coordinate);
    if values.is_empty() {
        return Ok(0.0);
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in values.iter().enumerate() {
        let f = target.cdf(x);
        worst = worst.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m);
    }
    Ok(worst.clamp(0.0, 1.0))
}

/// Mesh families used by the experiment harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    McUniform,
    McChebyshev,
    McGaussian,
    /// Interior Weil points from the smallest prime yielding enough points.
    Weil,
    GaussSubsample,
}

impl Sampler {
    pub fn name(self) -> &'static str {
        match self {
            Sampler::McUniform => "mc_uniform",
            Sampler::McChebyshev => "mc_chebyshev",
            Sampler::McGaussian => "mc_gaussian",
            Sampler::Weil => "weil",
            Sampler::GaussSubsample => "gauss_subsample",
        }
    }

    pub fn is_random(self) -> bool {
        !matches!(self, Sampler::Weil)
    }

    /// Prime seed used for `count` Weil points: the smallest prime `p ≥ 3`
    /// with `⌊p/2⌋ ≥ count`.
    pub fn weil_prime_for(count: usize) -> u64 {
        smallest_prime_at_least((2 * count as u64 + 1).max(3))
    }

    /// Generates exactly `count` points. `candidate_degree` is the per-axis
    /// degree of the candidate grid for [`Sampler::GaussSubsample`].
    pub fn generate(self, count: usize, dimension: usize, seed: u64, candidate_degree: u32) -> Result<NodalArray> {
        match self {
            Sampler::McUniform => sample_iid(Density::Uniform, count, dimension, seed),
            Sampler::McChebyshev => sample_iid(Density::Chebyshev, count, dimension, seed),
            Sampler::McGaussian => sample_iid(Density::Gaussian, count, dimension, seed),
            Sampler::Weil => {
                let prime = Self::weil_prime_for(count);
                Ok(weil_points_interior(prime, dimension)?.truncated(count))
            }
            Sampler::GaussSubsample => subsampled_gauss_grid(candidate_degree, dimension, count, seed),
        }
    }
}
