//! Least orthogonal interpolation on arbitrary distinct point sets.
//!
//! The `M×K` matrix of a total-degree candidate basis at the mesh is reduced
//! degree block by degree block, giving `PA = LUH` with `P` a row
//! permutation, `L` unit lower triangular, `U` upper triangular and the rows
//! of `H` spanning the least polynomial space `Π_Z` of dimension `M`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::index_sets::{total_degree_cardinality, IndexSet};
use crate::least_squares::Surrogate;
use crate::mesh::{sample_iid, NodalArray};
use crate::poly_basis::{Density, TensorBasis};

pub const DEFAULT_MAX_DEGREE: u32 = 40;
/// Residual block norms below this fraction of the block's largest row norm count as zero.
const BLOCK_TOL: f64 = 1e-12;
/// Number of random candidates drawn by [`default_candidates`].
pub const DEFAULT_CANDIDATE_COUNT: usize = 100_000;

#[derive(Clone, Debug)]
pub struct LoiFactorization {
    mesh: NodalArray,
    density: Density,
    basis: TensorBasis,
    permutation: Vec<usize>,
    l: DMatrix<f64>,
    u: DMatrix<f64>,
    h: DMatrix<f64>,
    h_tilde: DMatrix<f64>,
    pivot_degrees: Vec<u32>,
}

/// Per-block dimensions of `Π_Z`, exported as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoiSummary {
    pub dimension: usize,
    pub count: usize,
    pub density: Density,
    /// `deg Π_Z`.
    pub degree: u32,
    /// Degree of the candidate space the factorization ran in.
    pub candidate_degree: u32,
    pub blocks: Vec<BlockDimension>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDimension {
    pub degree: u32,
    pub dimension: usize,
}

fn check_distinct(mesh: &NodalArray) -> Result<()> {
    let d = mesh.dimension();
    // Adding 0.0 folds -0.0 into +0.0 so equal points sort together.
    let keys: Vec<Vec<f64>> = mesh.iter().map(|p| p.iter().map(|x| x + 0.0).collect()).collect();
    let mut order: Vec<usize> = (0..mesh.count()).collect();
    order.sort_by(|&i, &j| {
        (0..d)
            .map(|q| keys[i][q].total_cmp(&keys[j][q]))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for w in order.windows(2) {
        if keys[w[0]] == keys[w[1]] {
            return Err(Error::DuplicatePoints(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    Ok(())
}

fn start_degree(dimension: usize, count: usize) -> u32 {
    (0u32..)
        .find(|&k| total_degree_cardinality(dimension, k).is_none_or(|c| c >= count as u128))
        .expect("cardinality grows without bound")
}

/// Factorizes with the default maximum candidate degree.
pub fn loi_factorize(mesh: &NodalArray, density: Density) -> Result<LoiFactorization> {
    loi_factorize_with(mesh, density, DEFAULT_MAX_DEGREE)
}

/// Grows the candidate degree from the smallest admissible one until `M`
/// pivots are found, failing past `max_degree`.
pub fn loi_factorize_with(mesh: &NodalArray, density: Density, max_degree: u32) -> Result<LoiFactorization> {
    if mesh.is_empty() {
        return Err(Error::InvalidArgument("mesh has no points".into()));
    }
    check_distinct(mesh)?;
    let d = mesh.dimension();
    let m = mesh.count();
    let mut k = start_degree(d, m);
    if k > max_degree {
        return Err(Error::InvalidArgument(format!(
            "{m} points in dimension {d} need candidate degree at least {k}, above the cap {max_degree}"
        )));
    }
    let mut best_rank = 0;
    while k <= max_degree {
        let basis = TensorBasis::isotropic(density.family(), IndexSet::total_degree(d, k)?);
        let a = DesignMatrix::assemble(mesh, &basis)?;
        match block_reduce(a.values(), &basis) {
            Ok(parts) => return Ok(assemble_factorization(mesh, density, basis, parts)),
            Err(rank) => best_rank = best_rank.max(rank),
        }
        k += 1;
    }
    Err(Error::RankDeficient {
        rank: best_rank,
        required: m,
    })
}

struct Reduction {
    permutation: Vec<usize>,
    l: DMatrix<f64>,
    /// Row `i` is the residual of pivot row `permutation[i]` when it was chosen.
    r: DMatrix<f64>,
    pivot_degrees: Vec<u32>,
    pivot_blocks: Vec<std::ops::Range<usize>>,
}

/// Degree-blocked elimination. Returns the achieved rank on failure.
fn block_reduce(a: &DMatrix<f64>, basis: &TensorBasis) -> std::result::Result<Reduction, usize> {
    let (m, k) = a.shape();
    let mut work = a.clone();
    let mut assigned = vec![false; m];
    let mut position = vec![usize::MAX; m];
    let mut permutation = Vec::with_capacity(m);
    let mut pivot_degrees = Vec::with_capacity(m);
    let mut pivot_blocks = Vec::with_capacity(m);
    let mut l = DMatrix::<f64>::identity(m, m);
    let mut r = DMatrix::<f64>::zeros(m, k);

    for (degree, cols) in basis.index_set().degree_blocks() {
        if permutation.len() == m {
            break;
        }
        let seg_norm = |mat: &DMatrix<f64>, row: usize| -> f64 {
            cols.clone().map(|c| mat[(row, c)].powi(2)).sum::<f64>().sqrt()
        };
        let scale = (0..m).map(|row| seg_norm(a, row)).fold(0.0, f64::max);
        let tol = BLOCK_TOL * scale;
        loop {
            if permutation.len() == m {
                break;
            }
            let mut best = None;
            let mut best_norm = 0.0;
            for row in (0..m).filter(|&row| !assigned[row]) {
                let nrm = seg_norm(&work, row);
                if nrm > best_norm {
                    best_norm = nrm;
                    best = Some(row);
                }
            }
            let Some(p) = best.filter(|_| best_norm > tol) else {
                break;
            };
            assigned[p] = true;
            position[p] = permutation.len();
            permutation.push(p);
            pivot_degrees.push(degree);
            pivot_blocks.push(cols.clone());
            let g2 = best_norm * best_norm;
            let pivot_row: Vec<f64> = work.row(p).iter().copied().collect();
            for row in (0..m).filter(|&row| !assigned[row]) {
                let mut total = 0.0;
                // Two passes: the second removes what rounding left of the projection.
                for _ in 0..2 {
                    let dot: f64 = cols.clone().map(|c| work[(row, c)] * pivot_row[c]).sum();
                    let mult = dot / g2;
                    if mult != 0.0 {
                        for (c, &v) in pivot_row.iter().enumerate() {
                            work[(row, c)] -= mult * v;
                        }
                    }
                    total += mult;
                }
                l[(row, position[p])] = total;
            }
            r.row_mut(position[p]).copy_from(&work.row(p));
        }
    }
    if permutation.len() < m {
        return Err(permutation.len());
    }
    // Multipliers were stored by original row; reorder to pivot order.
    let mut lp = DMatrix::<f64>::identity(m, m);
    for (i, &row) in permutation.iter().enumerate() {
        for j in 0..i {
            lp[(i, j)] = l[(row, j)];
        }
    }
    Ok(Reduction {
        permutation,
        l: lp,
        r,
        pivot_degrees,
        pivot_blocks,
    })
}

fn assemble_factorization(mesh: &NodalArray, density: Density, basis: TensorBasis, red: Reduction) -> LoiFactorization {
    let (m, k) = red.r.shape();
    // Leading block segments, orthonormalized within each block.
    let mut h_tilde = DMatrix::<f64>::zeros(m, k);
    for i in 0..m {
        let cols = red.pivot_blocks[i].clone();
        let mut v = DVector::<f64>::zeros(k);
        for c in cols.clone() {
            v[c] = red.r[(i, c)];
        }
        for j in 0..i {
            if red.pivot_blocks[j] == cols {
                let hj = h_tilde.row(j).transpose();
                let proj = hj.dot(&v);
                v.axpy(-proj, &hj, 1.0);
            }
        }
        let nrm = v.norm();
        h_tilde.row_mut(i).copy_from(&(v / nrm).transpose());
    }
    let full = &red.r * h_tilde.transpose();
    let u = full.upper_triangle();
    let h = u
        .solve_upper_triangular(&red.r)
        .expect("pivots are nonzero by construction");
    LoiFactorization {
        mesh: mesh.clone(),
        density,
        basis,
        permutation: red.permutation,
        l: red.l,
        u,
        h,
        h_tilde,
        pivot_degrees: red.pivot_degrees,
    }
}

impl LoiFactorization {
    pub fn mesh(&self) -> &NodalArray {
        &self.mesh
    }

    pub fn density(&self) -> Density {
        self.density
    }

    /// Total-degree basis the factorization ran in.
    pub fn candidate_basis(&self) -> &TensorBasis {
        &self.basis
    }

    pub fn candidate_degree(&self) -> u32 {
        self.basis.index_set().degree().unwrap_or(0)
    }

    /// `deg Π_Z`.
    pub fn degree(&self) -> u32 {
        self.pivot_degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// Row-orthonormal matrix whose rows span `Π_Z` in candidate coefficients.
    pub fn h_tilde(&self) -> &DMatrix<f64> {
        &self.h_tilde
    }

    /// The candidate design matrix `A`.
    pub fn candidate_matrix(&self) -> DMatrix<f64> {
        DesignMatrix::assemble(&self.mesh, &self.basis)
            .expect("mesh was validated against this basis")
            .values()
            .clone()
    }

    /// `P A`.
    pub fn permuted_matrix(&self) -> DMatrix<f64> {
        let a = self.candidate_matrix();
        DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(self.permutation[i], j)])
    }

    pub fn block_dimensions(&self) -> Vec<BlockDimension> {
        let mut out: Vec<BlockDimension> = Vec::new();
        for &deg in &self.pivot_degrees {
            match out.last_mut() {
                Some(b) if b.degree == deg => b.dimension += 1,
                _ => out.push(BlockDimension {
                    degree: deg,
                    dimension: 1,
                }),
            }
        }
        out
    }

    pub fn summary(&self) -> LoiSummary {
        LoiSummary {
            dimension: self.mesh.dimension(),
            count: self.mesh.count(),
            density: self.density,
            degree: self.degree(),
            candidate_degree: self.candidate_degree(),
            blocks: self.block_dimensions(),
        }
    }

    pub fn write_summary_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.summary())?;
        Ok(())
    }

    /// Basis of `T_{deg Π_Z}`, a prefix of the candidate basis.
    fn truncated_basis(&self) -> (TensorBasis, usize) {
        let set = IndexSet::total_degree(self.mesh.dimension(), self.degree())
            .expect("smaller than the candidate set");
        let len = set.len();
        (TensorBasis::isotropic(self.density.family(), set), len)
    }

    /// `U⁻¹ L⁻¹ P Y` for an `M×c` right-hand side.
    fn solve_lu(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let py = DMatrix::from_fn(y.nrows(), y.ncols(), |i, j| y[(self.permutation[i], j)]);
        let z = self
            .l
            .solve_lower_triangular(&py)
            .expect("unit diagonal");
        self.u.solve_upper_triangular(&z).expect("pivots are nonzero")
    }
}

/// The unique interpolant in `Π_Z`: coefficients `H̃ᵀ U⁻¹ L⁻¹ P u`.
pub fn loi_interpolate(fact: &LoiFactorization, u: &[f64]) -> Result<Surrogate> {
    let m = fact.mesh.count();
    if u.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: u.len() });
    }
    let w = fact.solve_lu(&DMatrix::from_column_slice(m, 1, u));
    let c = fact.h_tilde.tr_mul(&w);
    let (basis, len) = fact.truncated_basis();
    Surrogate::new(basis, c.column(0).rows(0, len).iter().copied().collect())
}

/// Lagrange functions `ℓ_m ∈ Π_Z` with `ℓ_m(z_n) = δ_{mn}`.
pub fn cardinal_functions(fact: &LoiFactorization) -> Vec<Surrogate> {
    let coeffs = cardinal_coefficients(fact);
    let (basis, _) = fact.truncated_basis();
    coeffs
        .column_iter()
        .map(|c| Surrogate::new(basis.clone(), c.iter().copied().collect()).expect("length matches"))
        .collect()
}

/// Columns are the cardinal functions' coefficients in the truncated basis.
fn cardinal_coefficients(fact: &LoiFactorization) -> DMatrix<f64> {
    let m = fact.mesh.count();
    let w = fact.solve_lu(&DMatrix::identity(m, m));
    let (_, len) = fact.truncated_basis();
    fact.h_tilde.tr_mul(&w).rows(0, len).into_owned()
}

/// Weight in the Lebesgue function `max_z ρ(z) Σ_m |ℓ_m(z)| / ρ(z_m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LebesgueWeight {
    /// `ρ ≡ 1`, the classical Lebesgue constant.
    Unit,
    Density(Density),
}

impl LebesgueWeight {
    fn eval(self, z: &[f64]) -> Result<f64> {
        match self {
            LebesgueWeight::Unit => Ok(1.0),
            LebesgueWeight::Density(d) => d.eval_product(z),
        }
    }
}

/// The largest weighted Lebesgue function value found over the candidates:
/// a lower bound on the true constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LebesgueEstimate {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub candidates: usize,
}

/// Maximizes the weighted Lebesgue function over `candidates`. Ties go to the
/// earliest candidate.
pub fn lebesgue_constant(fact: &LoiFactorization, weight: LebesgueWeight, candidates: &NodalArray) -> Result<LebesgueEstimate> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidate points".into()));
    }
    let coeffs = cardinal_coefficients(fact);
    let (basis, len) = fact.truncated_basis();
    let node_weights: Vec<f64> = fact
        .mesh
        .iter()
        .map(|z| weight.eval(z))
        .collect::<Result<_>>()?;
    let pts: Vec<&[f64]> = candidates.iter().collect();
    let values: Vec<f64> = pts
        .par_iter()
        .map(|z| -> Result<f64> {
            let mut row = vec![0.0; len];
            basis.eval_row(z, &mut row)?;
            let rz = weight.eval(z)?;
            let row = DVector::from_vec(row);
            let ell = coeffs.tr_mul(&row);
            Ok(rz * ell.iter().zip(&node_weights).map(|(l, w)| l.abs() / w).sum::<f64>())
        })
        .collect::<Result<_>>()?;
    let (best, value) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    Ok(LebesgueEstimate {
        value,
        argmax: candidates.point(best).to_vec(),
        candidates: candidates.count(),
    })
}

/// `count` iid samples of the factorization's density followed by the mesh itself.
pub fn default_candidates(fact: &LoiFactorization, count: usize, seed: u64) -> Result<NodalArray> {
    let draws = sample_iid(fact.density, count, fact.mesh.dimension(), seed)?;
    draws.concat(&fact.mesh)
}

/// Mesh contracted by `factor`, as used for unbounded-domain point sets.
pub fn scale_mesh(mesh: &NodalArray, factor: f64) -> Result<NodalArray> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale factor {factor} must be positive")));
    }
    Ok(mesh.scaled(factor))
}

/// Contraction `k^{-1/r}` for a mesh of degree `k` and weight exponent `r`.
pub fn contraction_factor(degree: u32, exponent: f64) -> f64 {
    (degree.max(1) as f64).powf(-1.0 / exponent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{gauss_tensor_grid, Provenance};
    use crate::poly_basis::Family;

    fn line(points: Vec<f64>) -> NodalArray {
        NodalArray::new(1, points, Provenance::named("test")).unwrap()
    }

    #[test]
    fn single_point_is_constant() {
        let mesh = NodalArray::new(2, vec![0.3, -0.4], Provenance::named("one")).unwrap();
        let f = loi_factorize(&mesh, Density::Uniform).unwrap();
        assert_eq!(f.degree(), 0);
        let s = loi_interpolate(&f, &[2.5]).unwrap();
        assert_eq!(s.coefficients().len(), 1);
        assert!((s.eval(&[0.9, 0.9]).unwrap() - 2.5).abs() < 1e-14);
        let ell = cardinal_functions(&f);
        assert!((ell[0].eval(&[-0.2, 0.1]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn one_dimensional_space_is_classical() {
        let mesh = line(vec![-0.9, -0.2, 0.1, 0.5, 0.95]);
        for density in [Density::Uniform, Density::Chebyshev] {
            let f = loi_factorize(&mesh, density).unwrap();
            assert_eq!(f.degree(), 4);
            assert!(f.block_dimensions().iter().all(|b| b.dimension == 1));
        }
    }

    #[test]
    fn factorization_identities() {
        let mesh = sample_iid(Density::Uniform, 23, 2, 4).unwrap();
        let f = loi_factorize(&mesh, Density::Uniform).unwrap();
        let pa = f.permuted_matrix();
        let luh = f.l() * f.u() * f.h();
        assert!((&pa - &luh).amax() < 1e-10);
        let hht = f.h_tilde() * f.h_tilde().transpose();
        assert!((hht - DMatrix::identity(23, 23)).amax() < 1e-10);
        let dims: usize = f.block_dimensions().iter().map(|b| b.dimension).sum();
        assert_eq!(dims, 23);
    }

    #[test]
    fn interpolates_and_reproduces_constants() {
        let mesh = sample_iid(Density::Chebyshev, 30, 3, 8).unwrap();
        let f = loi_factorize(&mesh, Density::Chebyshev).unwrap();
        let u: Vec<f64> = mesh.iter().map(|z| (z[0] + 2.0 * z[1] - z[2]).sin()).collect();
        let s = loi_interpolate(&f, &u).unwrap();
        for (z, want) in mesh.iter().zip(&u) {
            assert!((s.eval(z).unwrap() - want).abs() < 1e-9);
        }
        let ones = loi_interpolate(&f, &[1.0; 30]).unwrap();
        assert!((ones.coefficients()[0] - 1.0).abs() < 1e-9);
        assert!(ones.coefficients()[1..].iter().all(|c| c.abs() < 1e-9));
    }

    #[test]
    fn cardinal_functions_are_kronecker() {
        let mesh = sample_iid(Density::Uniform, 20, 2, 1).unwrap();
        let f = loi_factorize(&mesh, Density::Uniform).unwrap();
        let ell = cardinal_functions(&f);
        for (m, l) in ell.iter().enumerate() {
            for (n, z) in mesh.iter().enumerate() {
                let want = if m == n { 1.0 } else { 0.0 };
                assert!((l.eval(z).unwrap() - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn tensor_grid_gives_total_space_dimension_per_block() {
        let mesh = gauss_tensor_grid(2, 2).unwrap();
        let f = loi_factorize(&mesh, Density::Chebyshev).unwrap();
        // 9 points of a 3×3 grid: blocks 1, 2, 3, 2, 1.
        let dims: Vec<usize> = f.block_dimensions().iter().map(|b| b.dimension).collect();
        assert_eq!(dims, vec![1, 2, 3, 2, 1]);
        assert_eq!(f.degree(), 4);
    }

    #[test]
    fn duplicates_are_rejected() {
        let mesh = line(vec![0.1, 0.4, 0.1]);
        assert!(matches!(loi_factorize(&mesh, Density::Uniform), Err(Error::DuplicatePoints(0, 2))));
        let mesh = line(vec![0.0, -0.0]);
        assert!(loi_factorize(&mesh, Density::Uniform).is_err());
    }

    #[test]
    fn degree_cap_is_an_error() {
        // Collinear points need degree 5 although 6 ≤ dim T_2.
        let pts: Vec<f64> = (0..6).flat_map(|i| [i as f64 / 10.0, 0.0]).collect();
        let mesh = NodalArray::new(2, pts, Provenance::named("line")).unwrap();
        assert_eq!(loi_factorize(&mesh, Density::Uniform).unwrap().degree(), 5);
        match loi_factorize_with(&mesh, Density::Uniform, 3) {
            Err(Error::RankDeficient { rank, required: 6 }) => assert_eq!(rank, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lebesgue_of_single_point_is_one() {
        let mesh = line(vec![0.2]);
        let f = loi_factorize(&mesh, Density::Uniform).unwrap();
        let cand = line(vec![-1.0, 0.0, 1.0]);
        let est = lebesgue_constant(&f, LebesgueWeight::Unit, &cand).unwrap();
        assert!((est.value - 1.0).abs() < 1e-14);
        assert_eq!(est.candidates, 3);
    }

    #[test]
    fn lebesgue_grows_with_refinement() {
        let mesh = line((0..8).map(|i| -1.0 + 2.0 * i as f64 / 7.0).collect());
        let f = loi_factorize(&mesh, Density::Uniform).unwrap();
        let coarse = line((0..=50).map(|i| -1.0 + i as f64 / 25.0).collect());
        let fine = line((0..=500).map(|i| -1.0 + i as f64 / 250.0).collect());
        let a = lebesgue_constant(&f, LebesgueWeight::Unit, &coarse).unwrap();
        let b = lebesgue_constant(&f, LebesgueWeight::Unit, &fine).unwrap();
        assert!(b.value >= a.value);
        assert!(a.value >= 1.0 - 1e-10);
        let defaults = default_candidates(&f, 1000, 3).unwrap();
        assert_eq!(defaults.count(), 1008);
        let w = lebesgue_constant(&f, LebesgueWeight::Density(Density::Uniform), &defaults).unwrap();
        assert!(w.value >= 1.0 - 1e-10);
    }

    #[test]
    fn hermite_mesh_and_scaling() {
        let mesh = sample_iid(Density::Gaussian, 10, 1, 2).unwrap();
        let scaled = scale_mesh(&mesh, contraction_factor(9, 2.0)).unwrap();
        assert!((scaled.point(0)[0] - mesh.point(0)[0] / 3.0).abs() < 1e-15);
        let f = loi_factorize(&scaled, Density::Gaussian).unwrap();
        assert_eq!(f.candidate_basis().families()[0], Family::Hermite);
        let u: Vec<f64> = scaled.iter().map(|z| z[0].cos()).collect();
        let s = loi_interpolate(&f, &u).unwrap();
        for (z, want) in scaled.iter().zip(&u) {
            assert!((s.eval(z).unwrap() - want).abs() < 1e-9);
        }
        assert!(scale_mesh(&mesh, 0.0).is_err());
    }

    #[test]
    fn summary_json() {
        let mesh = gauss_tensor_grid(1, 2).unwrap();
        let f = loi_factorize(&mesh, Density::Chebyshev).unwrap();
        let mut buf = Vec::new();
        f.write_summary_json(&mut buf).unwrap();
        let back: LoiSummary = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, f.summary());
        assert_eq!(back.degree, 2);
    }
}
