//! Exact finish for basis pursuit: simplex pivoting on `min ‖x‖₁, Ax = b`.
//!
//! Every nonsingular column basis `S` gives a feasible vertex `x_S = A_S⁻¹ b`
//! (the split `x = x⁺ - x⁻` absorbs signs), so no phase one is needed. A
//! vertex is optimal when `y = A_S⁻ᵀ sign(x_S)` satisfies `‖Aᵀy‖∞ ≤ 1`.
//! Pivots take the long step along an edge: the entering column moves past
//! every breakpoint at which the objective still decreases.

use nalgebra::{DMatrix, DVector};

/// Relative size of the deterministic perturbation of `b` that removes
/// degenerate vertices during pivoting.
const PERTURBATION: f64 = 1e-9;
const DUAL_SLACK: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-12;

pub(crate) struct Vertex {
    pub x: DVector<f64>,
    /// A dual certificate was verified on the unperturbed data.
    pub optimal: bool,
}

/// Columns chosen greedily in order of decreasing `|x_i|`, skipping any that
/// are numerically dependent on those already taken.
fn starting_basis(a: &DMatrix<f64>, x: &DVector<f64>) -> Option<Vec<usize>> {
    let (m, n) = a.shape();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()).then(i.cmp(&j)));
    let mut q: Vec<DVector<f64>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for j in order {
        let col = a.column(j).into_owned();
        let norm = col.norm();
        if norm == 0.0 {
            continue;
        }
        let mut v = col;
        for _ in 0..2 {
            for qi in &q {
                let c = qi.dot(&v);
                v.axpy(-c, qi, 1.0);
            }
        }
        let vn = v.norm();
        if vn > 1e-8 * norm {
            q.push(v / vn);
            basis.push(j);
            if basis.len() == m {
                return Some(basis);
            }
        }
    }
    None
}

/// A small fixed perturbation, so results do not depend on any random stream.
fn perturbation(m: usize, scale: f64) -> DVector<f64> {
    DVector::from_iterator(
        m,
        (0..m).map(|i| {
            let h = ((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64 / (1u64 << 53) as f64;
            scale * (2.0 * h - 1.0)
        }),
    )
}

/// Pivots from the vertex nearest to `start` until optimal or `max_pivots`.
/// Returns `None` when `A` lacks full row rank.
pub(crate) fn solve(a: &DMatrix<f64>, b: &DVector<f64>, start: &DVector<f64>, max_pivots: usize) -> Option<Vertex> {
    let (m, n) = a.shape();
    let mut basis = starting_basis(a, start)?;
    let mut in_basis = vec![false; n];
    basis.iter().for_each(|&j| in_basis[j] = true);
    let b_pert = b + perturbation(m, PERTURBATION * b.norm());

    let mut inverse = a.select_columns(&basis).try_inverse()?;
    for pivot in 0..=max_pivots {
        // Refactor periodically; rank-one updates drift.
        if pivot % 32 == 31 {
            inverse = a.select_columns(&basis).try_inverse()?;
        }
        let xs = &inverse * &b_pert;
        let sigma = xs.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let y = inverse.tr_mul(&sigma);
        let g = a.tr_mul(&y);
        let entering = (0..n)
            .filter(|&j| !in_basis[j])
            .max_by(|&i, &j| g[i].abs().total_cmp(&g[j].abs()).then(j.cmp(&i)));
        let Some(j) = entering.filter(|&j| g[j].abs() > 1.0 + DUAL_SLACK) else {
            return Some(finish(a, b, &basis, &y));
        };
        if pivot == max_pivots {
            break;
        }
        let delta = g[j].signum();
        let w = &inverse * a.column(j);
        // Breakpoints where a basic variable crosses zero while moving.
        let mut breaks: Vec<(f64, usize)> = (0..m)
            .filter(|&i| delta * w[i] * sigma[i] > 0.0 && w[i].abs() > PIVOT_TOL)
            .map(|i| (xs[i] / (delta * w[i]), i))
            .collect();
        breaks.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
        let mut slope = 1.0 - g[j].abs();
        let mut leaving = None;
        for &(_, i) in &breaks {
            slope += 2.0 * w[i].abs();
            if slope >= 0.0 {
                leaving = Some(i);
                break;
            }
        }
        let r = leaving?;
        // Rank-one update of the inverse for column r replaced by a_j.
        let wr = w[r];
        let row_r = inverse.row(r).into_owned() / wr;
        for i in 0..m {
            if i != r {
                let f = w[i];
                if f != 0.0 {
                    let upd = &row_r * f;
                    let mut row = inverse.row_mut(i);
                    row -= upd;
                }
            }
        }
        inverse.row_mut(r).copy_from(&row_r);
        in_basis[basis[r]] = false;
        in_basis[j] = true;
        basis[r] = j;
    }
    // Pivot budget spent: return the current vertex uncertified.
    let inverse = a.select_columns(&basis).try_inverse()?;
    let x = scatter(n, &basis, &(&inverse * b));
    Some(Vertex { x, optimal: false })
}

fn scatter(n: usize, basis: &[usize], values: &DVector<f64>) -> DVector<f64> {
    let mut x = DVector::zeros(n);
    for (&j, &v) in basis.iter().zip(values.iter()) {
        x[j] = v;
    }
    x
}

/// Re-solves on the final basis with the exact data and checks the
/// certificate from the perturbed signs.
fn finish(a: &DMatrix<f64>, b: &DVector<f64>, basis: &[usize], y: &DVector<f64>) -> Vertex {
    let n = a.ncols();
    let ab = a.select_columns(basis);
    let Some(xs) = ab.clone().lu().solve(b) else {
        return Vertex {
            x: DVector::zeros(n),
            optimal: false,
        };
    };
    let scale = xs.amax();
    let xs = xs.map(|v| if v.abs() <= 1e-12 * scale { 0.0 } else { v });
    let x = scatter(n, basis, &xs);
    let signs_agree = basis
        .iter()
        .zip(ab.tr_mul(y).iter())
        .zip(xs.iter())
        .all(|((_, s), v)| *v == 0.0 || (s.signum() == v.signum()));
    let dual_ok = a.tr_mul(y).amax() <= 1.0 + 1e-6;
    let feasible = (a * &x - b).norm() <= 1e-10 * b.norm().max(f64::MIN_POSITIVE);
    Vertex {
        x,
        optimal: signs_agree && dual_ok && feasible,
    }
}
