use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest column count accepted by [`ric_bruteforce`].
pub const RIC_MAX_COLUMNS: usize = 30;

/// Exact restricted isometry constant `δ_s` of `A` (unnormalized `AᵀA`).
///
/// By eigenvalue interlacing the extremes over supports of size `≤ s` are
/// attained at size exactly `min(s, N)`, so only those supports are visited.
pub fn ric_bruteforce(a: &DMatrix<f64>, s: usize) -> Result<f64> {
    let n = a.ncols();
    if n > RIC_MAX_COLUMNS {
        return Err(Error::InvalidArgument(format!(
            "brute-force RIC is limited to {RIC_MAX_COLUMNS} columns, got {n}"
        )));
    }
    if s == 0 || n == 0 {
        return Ok(0.0);
    }
    let s = s.min(n);
    let gram = a.tr_mul(a);
    let mut worst: f64 = 0.0;
    let mut support: Vec<usize> = (0..s).collect();
    loop {
        let sub = DMatrix::from_fn(s, s, |i, j| gram[(support[i], support[j])]);
        let ev = SymmetricEigen::new(sub).eigenvalues;
        worst = worst.max((ev.max() - 1.0).abs()).max((1.0 - ev.min()).abs());
        // Next combination in lexicographic order.
        let Some(i) = (0..s).rev().find(|&i| support[i] < n - s + i) else {
            break;
        };
        support[i] += 1;
        for j in i + 1..s {
            support[j] = support[j - 1] + 1;
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng as _;

    #[test]
    fn orthonormal_columns() {
        let q = DMatrix::<f64>::identity(8, 5);
        for s in 1..=5 {
            assert!(ric_bruteforce(&q, s).unwrap() < 1e-15);
        }
    }

    #[test]
    fn duplicated_column() {
        let a = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        assert!((ric_bruteforce(&a, 2).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn first_order_constant_is_column_norm_deviation() {
        let mut rng = rng_from_seed(1);
        let a = DMatrix::from_fn(20, 10, |_, _| rng.random::<f64>() * 0.5 - 0.25);
        let want = a
            .column_iter()
            .map(|c| (c.norm_squared() - 1.0).abs())
            .fold(0.0, f64::max);
        assert!((ric_bruteforce(&a, 1).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_s_and_rejects_wide() {
        let mut rng = rng_from_seed(2);
        let a = DMatrix::from_fn(12, 9, |_, _| rng.random::<f64>() - 0.5);
        let d: Vec<f64> = (1..=3).map(|s| ric_bruteforce(&a, s).unwrap()).collect();
        assert!(d[0] <= d[1] + 1e-12 && d[1] <= d[2] + 1e-12);
        assert!(ric_bruteforce(&DMatrix::zeros(3, 31), 1).is_err());
    }
}
