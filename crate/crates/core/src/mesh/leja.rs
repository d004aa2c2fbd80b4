use nalgebra::DMatrix;

use super::{NodalArray, Provenance};
use crate::error::{Error, Result};
use crate::poly_basis::TensorBasis;

/// Rows chosen by greedy LU with partial row pivoting on the candidate
/// Vandermonde matrix, one pivot per basis column. Ties go to the lowest row.
pub fn discrete_leja_indices(candidates: &NodalArray, basis: &TensorBasis, count: usize) -> Result<Vec<usize>> {
    if candidates.dimension() != basis.dimension() {
        return Err(Error::DimensionMismatch {
            expected: basis.dimension(),
            got: candidates.dimension(),
        });
    }
    if count > basis.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot pick {count} points with only {} basis columns",
            basis.len()
        )));
    }
    let k = candidates.count();
    let n = basis.len();
    let mut v = DMatrix::<f64>::zeros(k, n);
    let mut row = vec![0.0; n];
    for (i, z) in candidates.iter().enumerate() {
        basis.eval_row(z, &mut row).map_err(|e| match e {
            Error::OutsideSupport { value, .. } => Error::RowOutsideSupport {
                row: i,
                coordinate: z.iter().position(|&x| x == value).unwrap_or(0),
                value,
            },
            other => other,
        })?;
        for (j, &x) in row.iter().enumerate() {
            v[(i, j)] = x;
        }
    }
    let scale = v.amax();
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);

    let mut free: Vec<usize> = (0..k).collect();
    let mut picked = Vec::with_capacity(count);
    for c in 0..count {
        let mut best = None;
        let mut best_val = 0.0;
        for (slot, &r) in free.iter().enumerate() {
            let a = v[(r, c)].abs();
            if a > best_val {
                best_val = a;
                best = Some(slot);
            }
        }
        let slot = match best {
            Some(s) if best_val > tol => s,
            _ => {
                return Err(Error::RankDeficient {
                    rank: c,
                    required: count,
                })
            }
        };
        let p = free.remove(slot);
        picked.push(p);
        let pivot = v[(p, c)];
        for &r in &free {
            let m = v[(r, c)] / pivot;
            if m != 0.0 {
                for j in c..n {
                    let delta = m * v[(p, j)];
                    v[(r, j)] -= delta;
                }
            }
        }
    }
    Ok(picked)
}

/// The discrete Leja subset of `candidates`, in selection order.
pub fn discrete_leja(candidates: &NodalArray, basis: &TensorBasis, count: usize) -> Result<NodalArray> {
    let rows = discrete_leja_indices(candidates, basis, count)?;
    Ok(candidates.select(
        &rows,
        Provenance {
            sampler: "discrete_leja".into(),
            parent: Some(Box::new(candidates.provenance().clone())),
            ..Provenance::default()
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_sets::IndexSet;
    use crate::mesh::gauss_tensor_grid;
    use crate::poly_basis::Family;

    #[test]
    fn first_pick_maximizes_constant_then_linear() {
        let pts: Vec<f64> = (0..=20).map(|i| -1.0 + 0.1 * i as f64).collect();
        let cand = NodalArray::new(1, pts, Provenance::named("grid")).unwrap();
        let basis = TensorBasis::isotropic(Family::Legendre, IndexSet::total_degree(1, 4).unwrap());
        let rows = discrete_leja_indices(&cand, &basis, 3).unwrap();
        // Constant column ties everywhere: lowest index wins.
        assert_eq!(rows[0], 0);
        // Next pick maximizes |z - z_0|.
        assert_eq!(rows[1], 20);
        assert_eq!(rows.len(), 3);
    }

    #[test]
    fn selected_square_system_is_nonsingular() {
        let cand = gauss_tensor_grid(9, 2).unwrap();
        let set = IndexSet::total_degree(2, 5).unwrap();
        let basis = TensorBasis::isotropic(Family::Chebyshev, set);
        let mesh = discrete_leja(&cand, &basis, basis.len()).unwrap();
        let n = basis.len();
        let mut a = DMatrix::zeros(n, n);
        let mut row = vec![0.0; n];
        for (i, z) in mesh.iter().enumerate() {
            basis.eval_row(z, &mut row).unwrap();
            for j in 0..n {
                a[(i, j)] = row[j];
            }
        }
        let sv = a.singular_values();
        assert!(sv.min() / sv.max() > 1e-6);
    }

    #[test]
    fn too_few_candidates_reports_rank() {
        let cand = NodalArray::new(1, vec![-0.5, 0.5], Provenance::named("two")).unwrap();
        let basis = TensorBasis::isotropic(Family::Legendre, IndexSet::total_degree(1, 3).unwrap());
        match discrete_leja_indices(&cand, &basis, 4) {
            Err(Error::RankDeficient { rank, required }) => {
                assert_eq!(rank, 2);
                assert_eq!(required, 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
