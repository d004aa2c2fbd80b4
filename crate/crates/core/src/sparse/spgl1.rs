//! ℓ1 solver: Newton root-finding on the Pareto curve `φ(τ) = min ‖Ax - b‖₂`
//! subject to `‖x‖₁ ≤ τ`, with spectral projected-gradient inner iterations.
//!
//! For the equality-constrained case the iterate's support is periodically
//! refined by a direct solve and, when a dual certificate confirms it, the
//! exact basis-pursuit solution is returned early.

use nalgebra::{DMatrix, DVector};

use super::SolverOptions;

const STEP_MIN: f64 = 1e-16;
const STEP_MAX: f64 = 1e5;
const GAMMA: f64 = 1e-4;
const NONMONOTONE_MEMORY: usize = 3;
const LINE_SEARCH_ITS: usize = 10;
const REFINE_EVERY: usize = 10;
const TRIED_MEMORY: usize = 32;
const CERT_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Exit {
    /// `‖Ax - b‖ = σ` on the Pareto curve.
    RootFound,
    /// Residual below the basis-pursuit tolerance.
    BpSolution,
    /// Certified basis-pursuit solution from support refinement.
    Certified,
    /// Gradient vanishes with a nonzero residual: σ is below the least-squares residual.
    LeastSquares,
    LineSearchFailed,
    MaxIterations,
}

pub(crate) struct Outcome {
    pub x: DVector<f64>,
    pub iterations: usize,
    pub exit: Exit,
}

/// Euclidean projection onto `{‖x‖₁ ≤ τ}` by sorting magnitudes.
pub(crate) fn project_l1(x: &DVector<f64>, tau: f64) -> DVector<f64> {
    if x.lp_norm(1) <= tau {
        return x.clone();
    }
    if tau <= 0.0 {
        return DVector::zeros(x.len());
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &m) in mags.iter().enumerate() {
        cum += m;
        let t = (cum - tau) / (j as f64 + 1.0);
        if m > t {
            theta = t;
        } else {
            break;
        }
    }
    x.map(|v| v.signum() * (v.abs() - theta).max(0.0))
}

struct State<'a> {
    a: &'a DMatrix<f64>,
    b: &'a DVector<f64>,
}

impl State<'_> {
    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut r = self.b.clone();
        let nnz = x.iter().filter(|v| **v != 0.0).count();
        if nnz * 4 < x.len() {
            for (j, &v) in x.iter().enumerate() {
                if v != 0.0 {
                    r.axpy(-v, &self.a.column(j), 1.0);
                }
            }
        } else {
            r.gemv(-1.0, self.a, x, 1.0);
        }
        r
    }

    /// Gradient of `½‖b - Ax‖²`.
    fn gradient(&self, r: &DVector<f64>) -> DVector<f64> {
        -self.a.tr_mul(r)
    }
}

/// Solves `min ‖x‖₁ s.t. ‖Ax - b‖₂ ≤ σ`. `b` must have unit norm.
pub(crate) fn solve(a: &DMatrix<f64>, b: &DVector<f64>, sigma: f64, opts: &SolverOptions) -> Outcome {
    let n = a.ncols();
    let st = State { a, b };
    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut g = st.gradient(&r);
    let mut f = 0.5 * r.norm_squared();
    let mut f_old = f;
    let mut tau = 0.0;
    let mut tau_updated = false;
    let mut last_f = [f; NONMONOTONE_MEMORY];

    let mut g_step = {
        let d = project_l1(&(&x - &g), tau) - &x;
        let dn = d.amax();
        if dn < 1.0 / STEP_MAX {
            STEP_MAX
        } else {
            (1.0 / dn).clamp(STEP_MIN, STEP_MAX)
        }
    };

    let mut iterations = 0;
    let mut tried: Vec<Vec<usize>> = Vec::new();
    loop {
        let g_norm = g.amax();
        let r_norm = r.norm();
        let gap = r.dot(&(&r - b)) + tau * g_norm;
        let r_gap = gap.abs() / f.max(1.0);
        let a_error1 = r_norm - sigma;
        let a_error2 = f - 0.5 * sigma * sigma;
        let r_error1 = a_error1.abs() / r_norm.max(1.0);
        let r_error2 = a_error2.abs() / f.max(1.0);

        if g_norm <= opts.ls_tol * r_norm && r_norm > sigma {
            return Outcome { x, iterations, exit: Exit::LeastSquares };
        }
        if r_gap <= opts.opt_tol.max(r_error2) || r_error1 <= opts.opt_tol {
            if r_error1 <= opts.opt_tol && sigma > 0.0 {
                return Outcome { x, iterations, exit: Exit::RootFound };
            }
            if r_norm <= opts.bp_tol && sigma == 0.0 {
                return Outcome { x, iterations, exit: Exit::BpSolution };
            }
        }
        if sigma == 0.0 && tau > 0.0 && iterations % REFINE_EVERY == 0 {
            for support in ranked_supports(&x, a.nrows()) {
                if tried.contains(&support) {
                    continue;
                }
                if let Some(y) = certified_refinement(a, b, &support, n, &r) {
                    return Outcome { x: y, iterations, exit: Exit::Certified };
                }
                if tried.len() == TRIED_MEMORY {
                    tried.remove(0);
                }
                tried.push(support);
            }
        }
        if iterations >= opts.max_iterations {
            return Outcome { x, iterations, exit: Exit::MaxIterations };
        }

        // Newton update of τ once the subproblem has stalled.
        let rel1 = (f - f_old).abs() <= opts.dec_tol * f;
        let rel2 = (f - f_old).abs() <= 1e-1 * f * (r_norm - sigma).abs();
        let update = ((rel1 && r_norm > 2.0 * sigma) || (rel2 && r_norm <= 2.0 * sigma)) && !tau_updated;
        tau_updated = false;
        if update && g_norm > 0.0 {
            let tau_old = tau;
            tau = (tau + r_norm * a_error1 / g_norm).max(0.0);
            tau_updated = true;
            if tau < tau_old {
                x = project_l1(&x, tau);
                r = st.residual(&x);
                g = st.gradient(&r);
                f = 0.5 * r.norm_squared();
                last_f = [f; NONMONOTONE_MEMORY];
            }
        }

        iterations += 1;
        f_old = f;
        let f_max = last_f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let x_old = x.clone();
        let g_old = g.clone();

        let step = curvy_line_search(&st, &x, &g, f_max, g_step, tau)
            .or_else(|| projected_line_search(&st, &x, &g, f_max, g_step, tau));
        let Some((x_new, r_new, f_new)) = step else {
            return Outcome { x, iterations, exit: Exit::LineSearchFailed };
        };
        x = x_new;
        r = r_new;
        f = f_new;
        g = st.gradient(&r);

        let s = &x - &x_old;
        let y = &g - &g_old;
        let sts = s.norm_squared();
        let sty = s.dot(&y);
        g_step = if sty <= 0.0 {
            STEP_MAX
        } else {
            (sts / sty).clamp(STEP_MIN, STEP_MAX)
        };
        last_f[iterations % NONMONOTONE_MEMORY] = f;
    }
}

type Step = (DVector<f64>, DVector<f64>, f64);

/// Backtracks along the projected arc `P(x - α g)`.
fn curvy_line_search(st: &State, x: &DVector<f64>, g: &DVector<f64>, f_max: f64, step0: f64, tau: f64) -> Option<Step> {
    let mut step = step0;
    for _ in 0..LINE_SEARCH_ITS {
        let x_new = project_l1(&(x - g * step), tau);
        let r_new = st.residual(&x_new);
        let f_new = 0.5 * r_new.norm_squared();
        let gts = g.dot(&(&x_new - x));
        if f_new < f_max + GAMMA * step * gts {
            return Some((x_new, r_new, f_new));
        }
        step *= 0.5;
    }
    None
}

/// Backtracks along the fixed direction `P(x - α g) - x`.
fn projected_line_search(st: &State, x: &DVector<f64>, g: &DVector<f64>, f_max: f64, step0: f64, tau: f64) -> Option<Step> {
    let d = project_l1(&(x - g * step0), tau) - x;
    let gtd = g.dot(&d);
    let mut step = 1.0;
    for _ in 0..LINE_SEARCH_ITS {
        let x_new = x + &d * step;
        let r_new = st.residual(&x_new);
        let f_new = 0.5 * r_new.norm_squared();
        if f_new <= f_max + GAMMA * step * gtd {
            return Some((x_new, r_new, f_new));
        }
        step *= 0.5;
    }
    None
}

/// Nonzero entries of `x` ordered by decreasing magnitude, at most `cap` of them.
fn ranked_support(x: &DVector<f64>, cap: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).filter(|&i| x[i] != 0.0).collect();
    idx.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()).then(i.cmp(&j)));
    idx.truncate(cap);
    idx.sort_unstable();
    idx
}

/// Supports made of the `k` largest entries of `x`, for `k` growing
/// geometrically up to `min(nnz, cap)`.
fn ranked_supports(x: &DVector<f64>, cap: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..x.len()).filter(|&i| x[i] != 0.0).collect();
    order.sort_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()).then(i.cmp(&j)));
    let kmax = order.len().min(cap);
    let mut sizes = Vec::new();
    let mut k = 1usize;
    while k < kmax {
        sizes.push(k);
        k = (k * 3).div_ceil(2);
    }
    if kmax > 0 {
        sizes.push(kmax);
    }
    sizes
        .into_iter()
        .map(|k| {
            let mut s = order[..k].to_vec();
            s.sort_unstable();
            s
        })
        .collect()
}

/// Thin QR of `A_S`, or `None` if it is numerically rank deficient.
fn restricted_qr(a: &DMatrix<f64>, support: &[usize]) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    if support.len() > a.nrows() {
        return None;
    }
    let qr = a.select_columns(support).qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..r.ncols()).map(|i| r[(i, i)].abs()).collect();
    let dmax = diag.iter().copied().fold(0.0, f64::max);
    if dmax == 0.0 || diag.iter().any(|&v| v <= 1e-10 * dmax) {
        return None;
    }
    Some((qr.q(), r))
}

/// Least-squares solve of `A_S y = b`.
fn restricted_solve(a: &DMatrix<f64>, b: &DVector<f64>, support: &[usize]) -> Option<DVector<f64>> {
    let (q, r) = restricted_qr(a, support)?;
    r.solve_upper_triangular(&q.tr_mul(b))
}

/// The solution on `support` if it is consistent and a dual certificate proves
/// it minimizes ‖·‖₁ among all solutions of `Ax = b`.
///
/// A certificate is any `w` with `A_Sᵀ w = sign(y_S)` and `‖Aᵀw‖∞ ≤ 1`. Two
/// candidates are tried: the minimum-norm one, and the current residual
/// (which tends to the dual solution) scaled and corrected onto the
/// constraint.
fn certified_refinement(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    support: &[usize],
    n: usize,
    residual: &DVector<f64>,
) -> Option<DVector<f64>> {
    let (x, support) = consistent_refinement(a, b, support, n)?;
    let signs = DVector::from_iterator(support.len(), support.iter().map(|&i| x[i].signum()));
    let (q, r) = restricted_qr(a, &support)?;
    let rt = r.transpose();
    // w = w0 + Q R⁻ᵀ (sign - A_Sᵀ w0) satisfies the constraint exactly.
    let correct = |w0: DVector<f64>| -> Option<DVector<f64>> {
        let defect = &signs - a.select_columns(&support).tr_mul(&w0);
        Some(w0 + &q * rt.solve_lower_triangular(&defect)?)
    };
    let certifies = |w: &DVector<f64>| a.tr_mul(w).amax() <= 1.0 + CERT_SLACK;

    let w = correct(DVector::zeros(a.nrows()))?;
    if certifies(&w) {
        return Some(x);
    }
    let g = a.tr_mul(residual).amax();
    if g > 0.0 {
        let w = correct(residual / g)?;
        if certifies(&w) {
            return Some(x);
        }
    }
    None
}

/// Solves on the support, drops negligible entries and re-solves. Returns the
/// full-length vector and its support when the restricted system is consistent.
pub(crate) fn consistent_refinement(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    support: &[usize],
    n: usize,
) -> Option<(DVector<f64>, Vec<usize>)> {
    let y = restricted_solve(a, b, support)?;
    let ymax = y.amax();
    let kept: Vec<usize> = support
        .iter()
        .zip(y.iter())
        .filter(|(_, v)| v.abs() > 1e-12 * ymax)
        .map(|(&i, _)| i)
        .collect();
    if kept.is_empty() {
        return None;
    }
    let y = if kept.len() == support.len() {
        y
    } else {
        restricted_solve(a, b, &kept)?
    };
    let mut x = DVector::zeros(n);
    for (&i, &v) in kept.iter().zip(y.iter()) {
        x[i] = v;
    }
    let res = (b - a * &x).norm();
    if res <= 1e-10 * b.norm().max(f64::MIN_POSITIVE) {
        Some((x, kept))
    } else {
        None
    }
}

/// Final polish for the equality case: replaces `x` by its support refinement
/// when that is feasible and no worse in ℓ1.
pub(crate) fn polish(a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> Option<DVector<f64>> {
    let support = ranked_support(x, a.nrows());
    if support.is_empty() {
        return None;
    }
    let (y, _) = consistent_refinement(a, b, &support, x.len())?;
    (y.lp_norm(1) <= x.lp_norm(1) * (1.0 + 1e-6)).then_some(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_cases() {
        let x = DVector::from_vec(vec![3.0, -1.0, 0.5]);
        assert_eq!(project_l1(&x, 10.0), x);
        let p = project_l1(&x, 2.0);
        assert!((p.lp_norm(1) - 2.0).abs() < 1e-14);
        assert_eq!(p, DVector::from_vec(vec![2.0, 0.0, 0.0]));
        let p = project_l1(&DVector::from_vec(vec![1.0, -1.0]), 1.0);
        assert_eq!(p, DVector::from_vec(vec![0.5, -0.5]));
        assert_eq!(project_l1(&x, 0.0), DVector::zeros(3));
    }

    #[test]
    fn projection_is_nearest_point() {
        let x = DVector::from_vec(vec![0.9, -0.3, 0.2, 0.7, -1.4]);
        let tau = 1.5;
        let p = project_l1(&x, tau);
        let d = (&x - &p).norm();
        // Compare against random feasible points.
        for k in 0..200 {
            let mut q = DVector::from_fn(5, |i, _| ((i * 7 + k * 13) % 11) as f64 / 11.0 - 0.5);
            let l1 = q.lp_norm(1);
            if l1 > tau {
                q *= tau / l1;
            }
            assert!((&x - &q).norm() >= d - 1e-12);
        }
    }
}
