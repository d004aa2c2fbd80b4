//! Gauss quadrature rules from the Jacobi matrix of a family's recurrence.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::poly_basis::Family;

/// An `n`-point Gauss rule for a family's probability weight. Weights sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussRule {
    pub family: Family,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix;
    /// weights come from the Christoffel function `1 / Σ_{k<n} φ_k(x)²`,
    /// which is more accurate than squared eigenvector components for
    /// nodes far in the tails.
    pub fn new(family: Family, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("a Gauss rule needs at least one node".into()));
        }
        let mut jacobi = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            let b = family.recurrence_b(i);
            jacobi[(i, i - 1)] = b;
            jacobi[(i - 1, i)] = b;
        }
        let eig = SymmetricEigen::new(jacobi);
        let mut vals = vec![0.0; n];
        let mut pairs: Vec<(f64, f64)> = eig
            .eigenvalues
            .iter()
            .map(|&x| {
                family.eval_upto(x, &mut vals);
                (x, 1.0 / vals.iter().map(|v| v * v).sum::<f64>())
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        // The weights are even about the origin; average mirrored pairs so the
        // computed rule is exactly symmetric.
        let mut nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -x;
            nodes[j] = x;
            let w = 0.5 * (weights[i] + weights[j]);
            weights[i] = w;
            weights[j] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self {
            family,
            nodes,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Discrete Gram matrix `Σ_i w_i φ_n(x_i) φ_m(x_i)` for `n, m ≤ max_degree`.
    pub fn gram(&self, max_degree: usize) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(max_degree + 1, max_degree + 1);
        let mut vals = vec![0.0; max_degree + 1];
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            self.family.eval_upto(x, &mut vals);
            for n in 0..=max_degree {
                for m in 0..=max_degree {
                    g[(n, m)] += w * vals[n] * vals[m];
                }
            }
        }
        g
    }

    /// Writes `node,weight` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# family: {}", self.family.name())?;
        writeln!(out, "node,weight")?;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            writeln!(out, "{x:e},{w:e}")?;
        }
        Ok(())
    }
}

/// Chebyshev–Gauss nodes `cos((2i+1)π/(2n))`, in descending order.
///
/// Evaluated as `sin(π(n-1-2i)/(2n))` so the set is exactly antisymmetric and
/// the middle node of an odd rule is exactly zero.
pub fn chebyshev_gauss_nodes(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..n)
        .map(|i| (std::f64::consts::PI * (nf - 1.0 - 2.0 * i as f64) / (2.0 * nf)).sin())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormality_under_sixty_point_rules() {
        for family in [Family::Chebyshev, Family::Legendre, Family::Hermite] {
            let rule = GaussRule::new(family, 60).unwrap();
            let g = rule.gram(30);
            for n in 0..=30 {
                for m in 0..=30 {
                    let want = if n == m { 1.0 } else { 0.0 };
                    assert!(
                        (g[(n, m)] - want).abs() < 1e-10,
                        "{family:?} n={n} m={m}: {}",
                        g[(n, m)]
                    );
                }
            }
        }
    }

    #[test]
    fn chebyshev_rule_matches_closed_form() {
        let rule = GaussRule::new(Family::Chebyshev, 17).unwrap();
        let mut closed = chebyshev_gauss_nodes(17);
        closed.sort_by(f64::total_cmp);
        for (a, b) in rule.nodes.iter().zip(&closed) {
            assert!((a - b).abs() < 1e-13);
        }
        for w in &rule.weights {
            assert!((w - 1.0 / 17.0).abs() < 1e-13);
        }
    }

    #[test]
    fn nodes_are_symmetric() {
        for family in [Family::Chebyshev, Family::Legendre, Family::Hermite] {
            for n in 1..25 {
                let rule = GaussRule::new(family, n).unwrap();
                for i in 0..n {
                    assert!((rule.nodes[i] + rule.nodes[n - 1 - i]).abs() < 1e-13);
                }
            }
        }
        assert_eq!(chebyshev_gauss_nodes(1), vec![0.0]);
    }

    #[test]
    fn integrates_moments() {
        let rule = GaussRule::new(Family::Legendre, 5).unwrap();
        assert!((rule.integrate(|x| x * x) - 1.0 / 3.0).abs() < 1e-14);
        let rule = GaussRule::new(Family::Hermite, 6).unwrap();
        assert!((rule.integrate(|x| x * x) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        GaussRule::new(Family::Legendre, 3).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("# family: legendre\nnode,weight\n"));
    }
}
