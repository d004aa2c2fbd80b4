//! Multi-index sets that define polynomial approximation spaces.
//!
//! Every constructor returns indices in a canonical order: graded by total
//! degree `|α|`, and within one grade in descending lexicographic order, so
//! `(1,0)` precedes `(0,1)`. Design-matrix columns follow this order.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest set any constructor will build unless a different cap is given.
pub const DEFAULT_CARDINALITY_CAP: usize = 10_000_000;

/// A multi-index `α ∈ ℕ₀^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(degrees: Vec<u32>) -> Self {
        Self(degrees)
    }

    pub fn zero(dimension: usize) -> Self {
        Self(vec![0; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn degrees(&self) -> &[u32] {
        &self.0
    }

    /// `|α| = Σ α_j`.
    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn max_degree(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// `∏ (α_j + 1)`, the quantity bounded by the hyperbolic cross.
    pub fn hyperbolic_weight(&self) -> u64 {
        self.0.iter().map(|&a| u64::from(a) + 1).product()
    }

    /// Componentwise `self ≤ other`.
    pub fn is_below(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Graded order, descending lexicographic within a grade.
    pub fn canonical_cmp(&self, other: &MultiIndex) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexSetKind {
    Tensor,
    TotalDegree,
    HyperbolicCross,
    Custom,
}

impl IndexSetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IndexSetKind::Tensor => "tensor",
            IndexSetKind::TotalDegree => "total_degree",
            IndexSetKind::HyperbolicCross => "hyperbolic_cross",
            IndexSetKind::Custom => "custom",
        }
    }
}

/// An ordered set of distinct multi-indices of a common dimension.
///
/// Serializes as `{dimension, kind, degree, indices: [[...], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawIndexSet")]
pub struct IndexSet {
    dimension: usize,
    kind: IndexSetKind,
    degree: Option<u32>,
    indices: Vec<MultiIndex>,
}

#[derive(Deserialize)]
struct RawIndexSet {
    dimension: usize,
    kind: IndexSetKind,
    degree: Option<u32>,
    indices: Vec<MultiIndex>,
}

impl TryFrom<RawIndexSet> for IndexSet {
    type Error = Error;

    fn try_from(raw: RawIndexSet) -> Result<Self> {
        let mut set = IndexSet::custom(raw.dimension, raw.indices)?;
        set.kind = raw.kind;
        set.degree = if raw.kind == IndexSetKind::Custom {
            None
        } else {
            raw.degree
        };
        Ok(set)
    }
}

impl IndexSet {
    /// `{α : max_j α_j ≤ k}`, cardinality `(k+1)^d`.
    pub fn tensor(dimension: usize, degree: u32) -> Result<Self> {
        Self::build(IndexSetKind::Tensor, dimension, degree, DEFAULT_CARDINALITY_CAP)
    }

    /// `{α : |α| ≤ k}`, cardinality `C(d+k, k)`.
    pub fn total_degree(dimension: usize, degree: u32) -> Result<Self> {
        Self::build(
            IndexSetKind::TotalDegree,
            dimension,
            degree,
            DEFAULT_CARDINALITY_CAP,
        )
    }

    /// `{α : ∏_j (α_j + 1) ≤ k + 1}`.
    pub fn hyperbolic_cross(dimension: usize, degree: u32) -> Result<Self> {
        Self::build(
            IndexSetKind::HyperbolicCross,
            dimension,
            degree,
            DEFAULT_CARDINALITY_CAP,
        )
    }

    /// Builds one of the three standard sets, refusing anything larger than `cap`.
    pub fn build(kind: IndexSetKind, dimension: usize, degree: u32, cap: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        let check = |requested: Option<u128>| match requested {
            Some(n) if n <= cap as u128 => Ok(()),
            Some(n) => Err(Error::CardinalityOverflow { requested: n, cap }),
            None => Err(Error::CardinalityOverflow {
                requested: u128::MAX,
                cap,
            }),
        };
        let mut indices = Vec::new();
        let mut current = vec![0u32; dimension];
        match kind {
            IndexSetKind::Tensor => {
                check(tensor_cardinality(dimension, degree))?;
                enumerate_tensor(&mut current, 0, degree, &mut indices);
            }
            IndexSetKind::TotalDegree => {
                check(total_degree_cardinality(dimension, degree))?;
                enumerate_total(&mut current, 0, degree, &mut indices);
            }
            IndexSetKind::HyperbolicCross => {
                let mut count = 0usize;
                enumerate_hyperbolic(
                    &mut current,
                    0,
                    u64::from(degree) + 1,
                    cap,
                    &mut count,
                    &mut indices,
                )?;
            }
            IndexSetKind::Custom => {
                return Err(Error::InvalidArgument(
                    "custom sets are built with IndexSet::custom".into(),
                ))
            }
        }
        indices.sort_by(MultiIndex::canonical_cmp);
        Ok(Self {
            dimension,
            kind,
            degree: Some(degree),
            indices,
        })
    }

    /// Wraps an arbitrary collection, sorting it canonically. Duplicates are rejected.
    pub fn custom(dimension: usize, mut indices: Vec<MultiIndex>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if let Some(bad) = indices.iter().find(|a| a.dimension() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: bad.dimension(),
            });
        }
        indices.sort_by(MultiIndex::canonical_cmp);
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "duplicate multi-index {}",
                w[0]
            )));
        }
        Ok(Self {
            dimension,
            kind: IndexSetKind::Custom,
            degree: None,
            indices,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kind(&self) -> IndexSetKind {
        self.kind
    }

    pub fn degree(&self) -> Option<u32> {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, i: usize) -> Option<&MultiIndex> {
        self.indices.get(i)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.indices.iter().position(|a| a == alpha)
    }

    /// Largest entry of any index in the set, per coordinate.
    pub fn max_degrees(&self) -> Vec<u32> {
        let mut out = vec![0; self.dimension];
        for alpha in &self.indices {
            for (m, &a) in out.iter_mut().zip(alpha.degrees()) {
                *m = (*m).max(a);
            }
        }
        out
    }

    /// True iff every componentwise predecessor of every member is a member.
    pub fn is_lower_set(&self) -> bool {
        let members: HashSet<&[u32]> = self.indices.iter().map(|a| a.degrees()).collect();
        let mut probe = vec![0u32; self.dimension];
        self.indices.iter().all(|alpha| {
            // Checking the immediate predecessors suffices by induction.
            (0..self.dimension).all(|j| {
                if alpha.degrees()[j] == 0 {
                    return true;
                }
                probe.copy_from_slice(alpha.degrees());
                probe[j] -= 1;
                members.contains(probe.as_slice())
            })
        })
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        let members: HashSet<&MultiIndex> = other.indices.iter().collect();
        self.indices.iter().all(|a| members.contains(a))
    }

    /// Contiguous column ranges sharing one total degree, in order.
    pub fn degree_blocks(&self) -> Vec<(u32, std::ops::Range<usize>)> {
        let mut blocks: Vec<(u32, std::ops::Range<usize>)> = Vec::new();
        for (i, alpha) in self.indices.iter().enumerate() {
            let g = alpha.total_degree();
            match blocks.last_mut() {
                Some((deg, range)) if *deg == g => range.end = i + 1,
                _ => blocks.push((g, i..i + 1)),
            }
        }
        blocks
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::slice::Iter<'a, MultiIndex>;

    fn into_iter(self) -> Self::IntoIter {
        self.indices.iter()
    }
}

/// `(k+1)^d`, or `None` on overflow.
pub fn tensor_cardinality(dimension: usize, degree: u32) -> Option<u128> {
    u128::from(degree)
        .checked_add(1)?
        .checked_pow(u32::try_from(dimension).ok()?)
}

/// `C(d+k, k)`, or `None` on overflow.
pub fn total_degree_cardinality(dimension: usize, degree: u32) -> Option<u128> {
    let d = dimension as u128;
    let mut acc: u128 = 1;
    for i in 1..=u128::from(degree) {
        acc = acc.checked_mul(d + i)? / i;
    }
    Some(acc)
}

/// Upper bound `⌊(k+1)(1 + ln(k+1))^{d-1}⌋` on the hyperbolic-cross cardinality.
pub fn hyperbolic_cross_bound(dimension: usize, degree: u32) -> f64 {
    let kp1 = f64::from(degree) + 1.0;
    (kp1 * (1.0 + kp1.ln()).powi(dimension as i32 - 1)).floor()
}

fn enumerate_tensor(current: &mut [u32], pos: usize, degree: u32, out: &mut Vec<MultiIndex>) {
    if pos == current.len() {
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for a in 0..=degree {
        current[pos] = a;
        enumerate_tensor(current, pos + 1, degree, out);
    }
    current[pos] = 0;
}

fn enumerate_total(current: &mut [u32], pos: usize, budget: u32, out: &mut Vec<MultiIndex>) {
    if pos == current.len() {
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for a in 0..=budget {
        current[pos] = a;
        enumerate_total(current, pos + 1, budget - a, out);
    }
    current[pos] = 0;
}

fn enumerate_hyperbolic(
    current: &mut [u32],
    pos: usize,
    budget: u64,
    cap: usize,
    count: &mut usize,
    out: &mut Vec<MultiIndex>,
) -> Result<()> {
    if pos == current.len() {
        *count += 1;
        if *count > cap {
            return Err(Error::CardinalityOverflow {
                requested: *count as u128,
                cap,
            });
        }
        out.push(MultiIndex(current.to_vec()));
        return Ok(());
    }
    let mut a = 0u64;
    while a < budget {
        current[pos] = a as u32;
        enumerate_hyperbolic(current, pos + 1, budget / (a + 1), cap, count, out)?;
        a += 1;
    }
    current[pos] = 0;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn degree_25_planar_cardinalities() {
        assert_eq!(IndexSet::tensor(2, 25).unwrap().len(), 676);
        assert_eq!(IndexSet::total_degree(2, 25).unwrap().len(), 351);
    }

    #[test]
    fn small_tensor_and_total_sets() {
        let t = IndexSet::tensor(1, 0).unwrap();
        assert_eq!(t.indices(), &[idx(&[0])]);
        assert_eq!(IndexSet::tensor(3, 2).unwrap().len(), 27);

        let lin = IndexSet::total_degree(2, 1).unwrap();
        assert_eq!(lin.indices(), &[idx(&[0, 0]), idx(&[1, 0]), idx(&[0, 1])]);
        assert_eq!(IndexSet::total_degree(15, 4).unwrap().len(), 3876);
    }

    #[test]
    fn hyperbolic_cross_d2_k3() {
        let h = IndexSet::hyperbolic_cross(2, 3).unwrap();
        let mut got: Vec<Vec<u32>> = h.iter().map(|a| a.degrees().to_vec()).collect();
        got.sort();
        let mut want = vec![
            vec![0, 0],
            vec![1, 0],
            vec![2, 0],
            vec![3, 0],
            vec![0, 1],
            vec![0, 2],
            vec![0, 3],
            vec![1, 1],
        ];
        want.sort();
        assert_eq!(got, want);
        assert!(h.len() as f64 <= hyperbolic_cross_bound(2, 3));
        assert_eq!(hyperbolic_cross_bound(2, 3), 9.0);
    }

    #[test]
    fn hyperbolic_matches_total_in_one_dimension() {
        for k in 0..12 {
            assert_eq!(
                IndexSet::hyperbolic_cross(1, k).unwrap().indices(),
                IndexSet::total_degree(1, k).unwrap().indices()
            );
        }
    }

    #[test]
    fn lower_set_checks() {
        assert!(IndexSet::total_degree(2, 3).unwrap().is_lower_set());
        assert!(IndexSet::hyperbolic_cross(3, 5).unwrap().is_lower_set());
        let gap = IndexSet::custom(2, vec![idx(&[0, 0]), idx(&[1, 1])]).unwrap();
        assert!(!gap.is_lower_set());
    }

    #[test]
    fn canonical_order_is_graded_then_descending_lex() {
        let t = IndexSet::total_degree(3, 2).unwrap();
        let got: Vec<MultiIndex> = t.iter().cloned().collect();
        let want = [
            [0, 0, 0],
            [1, 0, 0],
            [0, 1, 0],
            [0, 0, 1],
            [2, 0, 0],
            [1, 1, 0],
            [1, 0, 1],
            [0, 2, 0],
            [0, 1, 1],
            [0, 0, 2],
        ]
        .map(|a| idx(&a));
        assert_eq!(got, want);
        let blocks = t.degree_blocks();
        assert_eq!(blocks, vec![(0, 0..1), (1, 1..4), (2, 4..10)]);
    }

    #[test]
    fn overflow_is_reported() {
        let err = IndexSet::tensor(40, 9).unwrap_err();
        assert!(matches!(err, Error::CardinalityOverflow { .. }));
        let err = IndexSet::build(IndexSetKind::TotalDegree, 5, 10, 100).unwrap_err();
        assert!(matches!(err, Error::CardinalityOverflow { cap: 100, .. }));
        let err = IndexSet::build(IndexSetKind::HyperbolicCross, 3, 50, 10).unwrap_err();
        assert!(matches!(err, Error::CardinalityOverflow { cap: 10, .. }));
        assert!(IndexSet::tensor(0, 2).is_err());
    }

    #[test]
    fn custom_rejects_duplicates_and_bad_dimension() {
        assert!(IndexSet::custom(2, vec![idx(&[1, 0]), idx(&[1, 0])]).is_err());
        assert!(matches!(
            IndexSet::custom(2, vec![idx(&[1, 0, 0])]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let h = IndexSet::hyperbolic_cross(3, 4).unwrap();
        let s = h.to_json().unwrap();
        assert!(s.contains("\"kind\":\"hyperbolic_cross\""));
        assert!(s.contains("\"degree\":4"));
        assert_eq!(IndexSet::from_json(&s).unwrap(), h);
    }
}
