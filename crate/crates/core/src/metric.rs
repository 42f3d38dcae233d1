//! Exact distances on boundaries of level-normed trees.
//!
//! Every node norm produced by a function system is `0` or a power `λ^k`, so
//! canonical ultrametric distances are kept symbolically as [`Scale`] values
//! and only turned into rationals at the edges.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::Report;
use crate::tree::{common_prefix_len, lambda_pow, NodePath};

/// `0` or `λ^k`; ordered by value for a fixed `0 < λ < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scale {
    Zero,
    Pow(i64),
}

impl Scale {
    pub const ONE: Scale = Scale::Pow(0);

    pub fn to_rational(self, lambda: &BigRational) -> BigRational {
        match self {
            Scale::Zero => BigRational::zero(),
            Scale::Pow(k) => lambda_pow(lambda, k),
        }
    }

    /// `λ · self`.
    pub fn times_lambda(self) -> Scale {
        match self {
            Scale::Zero => Scale::Zero,
            Scale::Pow(k) => Scale::Pow(k + 1),
        }
    }

    pub fn exponent(self) -> Option<i64> {
        match self {
            Scale::Zero => None,
            Scale::Pow(k) => Some(k),
        }
    }
}

impl Ord for Scale {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scale::Zero, Scale::Zero) => Ordering::Equal,
            (Scale::Zero, _) => Ordering::Less,
            (_, Scale::Zero) => Ordering::Greater,
            (Scale::Pow(a), Scale::Pow(b)) => b.cmp(a),
        }
    }
}

impl PartialOrd for Scale {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scale::Zero => write!(f, "0"),
            Scale::Pow(k) => write!(f, "l^{k}"),
        }
    }
}

/// Norm scales along the stem of an eventually-central branch, plus the
/// piece it lives in (for glued spaces).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    pub piece: usize,
    pub stem: NodePath,
    /// `scales[d]` is the scale of the stem node at depth `d + 1`.
    pub scales: Vec<Scale>,
}

impl Profile {
    /// Scale of the node at `depth` (`≥ 1`); central nodes past the stem are `0`.
    pub fn scale_at(&self, depth: usize) -> Scale {
        self.scales.get(depth - 1).copied().unwrap_or(Scale::Zero)
    }

    /// Canonical ultrametric distance; pieces differing means distance `1/λ`.
    pub fn distance(&self, other: &Profile) -> Scale {
        if self.piece != other.piece {
            return Scale::Pow(-1);
        }
        match common_prefix_len(&self.stem, &other.stem) {
            None => Scale::Zero,
            Some(k) => self.scale_at(k + 1).max(other.scale_at(k + 1)),
        }
    }
}

/// Diameter of a finite set: with `k` the depth where the set first splits,
/// every point's scale at depth `k + 1` is realized against a point from
/// another part, and bounds all distances within its own part.
pub fn diameter_of(profiles: &[Profile]) -> Scale {
    let Some(first) = profiles.first() else {
        return Scale::Zero;
    };
    if profiles.iter().any(|p| p.piece != first.piece) {
        return Scale::Pow(-1);
    }
    let split = profiles
        .iter()
        .filter_map(|p| common_prefix_len(&first.stem, &p.stem))
        .min();
    match split {
        None => Scale::Zero,
        Some(k) => profiles.iter().map(|p| p.scale_at(k + 1)).max().unwrap_or(Scale::Zero),
    }
}

static NEXT_CONTEXT: AtomicU64 = AtomicU64::new(1);

pub(crate) fn fresh_context() -> u64 {
    NEXT_CONTEXT.fetch_add(1, AtomicOrdering::Relaxed)
}

/// A finite point set tied to the metric context of one function system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PointSet<P: Ord> {
    #[serde(skip)]
    context: u64,
    points: BTreeSet<P>,
}

impl<P: Ord + Clone> PointSet<P> {
    pub(crate) fn new(context: u64, points: impl IntoIterator<Item = P>) -> Self {
        PointSet {
            context,
            points: points.into_iter().collect(),
        }
    }

    pub fn context(&self) -> u64 {
        self.context
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &P) -> bool {
        self.points.contains(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = &P> {
        self.points.iter()
    }

    pub fn points(&self) -> &BTreeSet<P> {
        &self.points
    }

    pub fn to_vec(&self) -> Vec<P> {
        self.points.iter().cloned().collect()
    }

    pub fn is_subset(&self, other: &PointSet<P>) -> bool {
        self.points.is_subset(&other.points)
    }

    pub(crate) fn same_context(&self, other: &PointSet<P>) -> Result<()> {
        if self.context != other.context {
            return Err(Error::MixedContexts);
        }
        Ok(())
    }
}

/// Symmetry, identity of indiscernibles and the strong triangle inequality
/// over all pairs and triples of a distance matrix.
pub fn verify_ultrametric_matrix<T, L>(labels: &[L], d: &[Vec<T>], zero: &T) -> Report
where
    T: Ord + fmt::Display + Sync,
    L: fmt::Display + Sync,
{
    let mut r = Report::new("ultrametric");
    let n = labels.len();
    for i in 0..n {
        r.check(d[i][i] == *zero, &labels[i], || format!("d(x,x) = {}", d[i][i]));
        for j in i + 1..n {
            let at = || format!("{} / {}", labels[i], labels[j]);
            r.check(d[i][j] == d[j][i], at(), || format!("asymmetric: {} vs {}", d[i][j], d[j][i]));
            r.check(d[i][j] > *zero, at(), || "distinct points at distance 0".into());
        }
    }
    let bad: Vec<(usize, usize, usize)> = crate::par::map(
        crate::par::Exec::default(),
        &(0..n).collect::<Vec<_>>(),
        |&x| {
            let mut out = Vec::new();
            for y in 0..n {
                for z in 0..n {
                    if d[x][z] > *std::cmp::max(&d[x][y], &d[y][z]) {
                        out.push((x, y, z));
                    }
                }
            }
            out
        },
    )
    .into_iter()
    .flatten()
    .collect();
    r.checked += n * n * n;
    for (x, y, z) in bad {
        r.fail(
            format!("{} / {} / {}", labels[x], labels[y], labels[z]),
            format!(
                "strong triangle inequality violated: {} > max({}, {})",
                d[x][z], d[x][y], d[y][z]
            ),
        );
    }
    r
}
