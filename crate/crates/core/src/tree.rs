//! Lazily generated height trees, eventually-central branches, tree norms and
//! the canonical ultrametric on the boundary.
//!
//! Nodes are addressed by [`NodePath`]s of child indices from the root. Index
//! `0` is always the central successor `*_x` (height `-1`); indices `1, 2, …`
//! enumerate the remaining successors. A tree is a rule object: heights are
//! computed on demand and nothing is materialized.

use std::borrow::Borrow;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordinal::{ExtHeight, HeightKind};
use crate::report::Report;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn child(&self, index: usize) -> NodePath {
        let mut v = self.0.clone();
        v.push(index);
        NodePath(v)
    }

    pub fn parent(&self) -> Option<NodePath> {
        if self.0.is_empty() {
            None
        } else {
            Some(NodePath(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn is_prefix_of(&self, other: &[usize]) -> bool {
        other.len() >= self.0.len() && other[..self.0.len()] == self.0[..]
    }
}

impl Deref for NodePath {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl Borrow<[usize]> for NodePath {
    fn borrow(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for NodePath {
    fn from(v: Vec<usize>) -> Self {
        NodePath(v)
    }
}

impl From<&[usize]> for NodePath {
    fn from(v: &[usize]) -> Self {
        NodePath(v.to_vec())
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

/// Accepts `[1,2,3]`, `1,2,3` and `[]`.
impl FromStr for NodePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('[').trim_end_matches(']').trim();
        if inner.is_empty() {
            return Ok(NodePath::root());
        }
        inner
            .split(',')
            .enumerate()
            .map(|(i, part)| {
                part.trim().parse::<usize>().map_err(|_| Error::Syntax {
                    pos: i,
                    msg: format!("bad path component {part:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(NodePath)
    }
}

/// An eventually-central branch: the stem followed by central successors
/// forever. Trailing zeros are stripped so equality is branch equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Branch {
    stem: NodePath,
}

impl Branch {
    pub fn new(stem: impl Into<NodePath>) -> Self {
        let mut v = stem.into().0;
        while v.last() == Some(&0) {
            v.pop();
        }
        Branch { stem: NodePath(v) }
    }

    pub fn central() -> Self {
        Branch {
            stem: NodePath::root(),
        }
    }

    pub fn stem(&self) -> &NodePath {
        &self.stem
    }

    /// Child index at `depth`, reading past the stem as central.
    pub fn index_at(&self, depth: usize) -> usize {
        self.stem.get(depth).copied().unwrap_or(0)
    }

    /// The node of the branch at the given depth (the root has depth 0).
    pub fn node_at(&self, depth: usize) -> NodePath {
        NodePath((0..depth).map(|d| self.index_at(d)).collect())
    }

    pub fn passes_through(&self, node: &[usize]) -> bool {
        node.iter().enumerate().all(|(d, &i)| self.index_at(d) == i)
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.stem.is_empty() {
            write!(f, "central")
        } else {
            write!(f, "branch{}", self.stem)
        }
    }
}

/// Length of the longest common prefix of two zero-extended paths.
pub fn common_prefix_len(a: &[usize], b: &[usize]) -> Option<usize> {
    let n = a.len().max(b.len());
    (0..n).find(|&i| a.get(i).copied().unwrap_or(0) != b.get(i).copied().unwrap_or(0))
}

/// `a ∧ b`, the last common node of two distinct branches.
pub fn meet(a: &Branch, b: &Branch) -> Result<NodePath> {
    let k = common_prefix_len(a.stem(), b.stem()).ok_or(Error::EqualBranches)?;
    Ok(a.node_at(k))
}

/// Child heights below one node: `leading[i]` for successor `i+1`, `rest`
/// for every later successor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChildRule {
    Canonical,
    Explicit {
        leading: Vec<ExtHeight>,
        rest: ExtHeight,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightTree {
    root: ExtHeight,
    overrides: BTreeMap<NodePath, ChildRule>,
}

impl HeightTree {
    /// Successors of a node of height `α+1` have height `α`, those of a limit
    /// `λ` have heights `λ[n]`, those of `∞` have height `∞`.
    pub fn canonical(root: ExtHeight) -> Result<Self> {
        if root == ExtHeight::MinusOne {
            return Err(Error::InvalidRootHeight);
        }
        Ok(HeightTree {
            root,
            overrides: BTreeMap::new(),
        })
    }

    /// Replaces the child rule below `at`; other nodes stay canonical.
    pub fn with_rule(mut self, at: NodePath, rule: ChildRule) -> Self {
        self.overrides.insert(at, rule);
        self
    }

    pub fn root_height(&self) -> &ExtHeight {
        &self.root
    }

    pub fn rule_at(&self, path: &[usize]) -> &ChildRule {
        self.overrides.get(path).unwrap_or(&ChildRule::Canonical)
    }

    pub fn is_canonical(&self) -> bool {
        self.overrides.is_empty()
    }

    /// Height of successor `index` of the node at `parent` (of height
    /// `parent_height`).
    pub fn child_height(&self, parent: &[usize], parent_height: &ExtHeight, index: usize) -> Result<ExtHeight> {
        if index == 0 {
            return Ok(ExtHeight::MinusOne);
        }
        if parent_height.is_leaf_like() {
            let mut p = parent.to_vec();
            p.push(index);
            return Err(Error::Unaddressable {
                path: NodePath(p),
                reason: format!("a node of height {parent_height} has only its central successor"),
            });
        }
        match self.rule_at(parent) {
            ChildRule::Explicit { leading, rest } => {
                Ok(leading.get(index - 1).cloned().unwrap_or_else(|| rest.clone()))
            }
            ChildRule::Canonical => canonical_child_height(parent_height, index),
        }
    }

    pub fn node_height(&self, path: &[usize]) -> Result<ExtHeight> {
        let mut h = self.root.clone();
        for d in 0..path.len() {
            h = self.child_height(&path[..d], &h, path[d])?;
        }
        Ok(h)
    }

    /// First successor index from which child heights are non-decreasing.
    pub fn regular_from(&self, path: &[usize]) -> usize {
        match self.rule_at(path) {
            ChildRule::Canonical => 1,
            ChildRule::Explicit { leading, .. } => leading.len() + 1,
        }
    }

    /// The eventual constant child height, when the rule has one.
    pub fn tail_height(&self, path: &[usize], height: &ExtHeight) -> Option<ExtHeight> {
        match self.rule_at(path) {
            ChildRule::Explicit { rest, .. } => Some(rest.clone()),
            ChildRule::Canonical => match height.kind() {
                HeightKind::Successor | HeightKind::Infinity => height.minus_one().ok(),
                _ => None,
            },
        }
    }

    /// All nodes below `from` at relative depth `<= depth`, using successor
    /// indices `0..=breadth`, in depth-first order.
    pub fn window(&self, from: &[usize], depth: usize, breadth: usize) -> Result<Vec<(NodePath, ExtHeight)>> {
        let mut out = Vec::new();
        let h = self.node_height(from)?;
        self.collect_window(NodePath::from(from), h, depth, breadth, &mut out)?;
        Ok(out)
    }

    fn collect_window(
        &self,
        path: NodePath,
        height: ExtHeight,
        depth: usize,
        breadth: usize,
        out: &mut Vec<(NodePath, ExtHeight)>,
    ) -> Result<()> {
        out.push((path.clone(), height.clone()));
        if depth == 0 {
            return Ok(());
        }
        let top = if height.is_leaf_like() { 0 } else { breadth };
        for i in 0..=top {
            let h = self.child_height(&path, &height, i)?;
            self.collect_window(path.child(i), h, depth - 1, breadth, out)?;
        }
        Ok(())
    }
}

fn canonical_child_height(parent: &ExtHeight, index: usize) -> Result<ExtHeight> {
    match parent {
        ExtHeight::Infinity => Ok(ExtHeight::Infinity),
        ExtHeight::Ord(o) => match o.kind() {
            HeightKind::Successor => Ok(ExtHeight::Ord(o.predecessor().expect("successor"))),
            HeightKind::Limit => Ok(ExtHeight::Ord(o.fundamental(index as u64)?)),
            _ => unreachable!("leaf-like heights are handled by the caller"),
        },
        ExtHeight::MinusOne => unreachable!("leaf-like heights are handled by the caller"),
    }
}

pub fn canonical_tree(root_height: ExtHeight) -> Result<HeightTree> {
    HeightTree::canonical(root_height)
}

pub fn node_height(tree: &HeightTree, path: &NodePath) -> Result<ExtHeight> {
    tree.node_height(path)
}

/// A norm on the nodes of a height tree.
pub trait TreeNorm: Sync {
    fn norm(&self, path: &[usize]) -> Result<BigRational>;

    /// The finite set `{x : ‖x‖ ≥ ε}` when the norm can declare it.
    fn support_at_least(&self, _eps: &BigRational) -> Result<Option<Vec<NodePath>>> {
        Ok(None)
    }
}

impl<N: TreeNorm + ?Sized> TreeNorm for &N {
    fn norm(&self, path: &[usize]) -> Result<BigRational> {
        (**self).norm(path)
    }

    fn support_at_least(&self, eps: &BigRational) -> Result<Option<Vec<NodePath>>> {
        (**self).support_at_least(eps)
    }
}

pub struct NormedHeightTree<N> {
    pub tree: Arc<HeightTree>,
    pub norm: N,
}

impl<N: TreeNorm> NormedHeightTree<N> {
    pub fn new(tree: Arc<HeightTree>, norm: N) -> Self {
        NormedHeightTree { tree, norm }
    }
}

/// `‖x‖ = λ^{Σ indices}` off the central nodes. Defined on every height
/// tree, including those of limit height that carry no contracting system.
#[derive(Clone, Debug)]
pub struct PathSumNorm {
    tree: Arc<HeightTree>,
    lambda: BigRational,
}

impl PathSumNorm {
    pub fn new(tree: Arc<HeightTree>, lambda: BigRational) -> Result<Self> {
        check_lambda(&lambda)?;
        Ok(PathSumNorm { tree, lambda })
    }
}

pub fn check_lambda(lambda: &BigRational) -> Result<()> {
    if lambda.is_positive() && *lambda < BigRational::one() {
        Ok(())
    } else {
        Err(Error::LambdaOutOfRange)
    }
}

pub fn lambda_pow(lambda: &BigRational, k: i64) -> BigRational {
    if k >= 0 {
        num_traits::pow(lambda.clone(), k as usize)
    } else {
        num_traits::pow(lambda.recip(), k.unsigned_abs() as usize)
    }
}

/// Largest `k` with `λ^k ≥ ε` (`None` when even `λ^0 = 1` is below `ε`).
pub fn max_exponent_at_least(lambda: &BigRational, eps: &BigRational) -> Option<u32> {
    let mut v = BigRational::one();
    if v < *eps {
        return None;
    }
    let mut k = 0;
    loop {
        let next = &v * lambda;
        if next < *eps {
            return Some(k);
        }
        v = next;
        k += 1;
    }
}

impl TreeNorm for PathSumNorm {
    fn norm(&self, path: &[usize]) -> Result<BigRational> {
        if self.tree.node_height(path)? == ExtHeight::MinusOne {
            return Ok(BigRational::zero());
        }
        Ok(lambda_pow(&self.lambda, path.iter().sum::<usize>() as i64))
    }

    fn support_at_least(&self, eps: &BigRational) -> Result<Option<Vec<NodePath>>> {
        if !eps.is_positive() {
            return Ok(None);
        }
        let Some(budget) = max_exponent_at_least(&self.lambda, eps) else {
            return Ok(Some(Vec::new()));
        };
        let mut out = Vec::new();
        let mut stack = vec![(NodePath::root(), self.tree.root_height().clone(), budget as usize)];
        while let Some((p, h, left)) = stack.pop() {
            out.push(p.clone());
            if h.is_leaf_like() {
                continue;
            }
            for i in 1..=left {
                let ch = self.tree.child_height(&p, &h, i)?;
                if ch != ExtHeight::MinusOne {
                    stack.push((p.child(i), ch, left - i));
                }
            }
        }
        out.sort();
        Ok(Some(out))
    }
}

type NormFn = dyn Fn(&[usize]) -> BigRational + Send + Sync;

/// A norm given by a closure, with an optionally declared support.
pub struct FnNorm {
    f: Box<NormFn>,
    support: Option<Vec<NodePath>>,
}

impl FnNorm {
    pub fn new(f: impl Fn(&[usize]) -> BigRational + Send + Sync + 'static) -> Self {
        FnNorm {
            f: Box::new(f),
            support: None,
        }
    }

    pub fn with_support(mut self, support: Vec<NodePath>) -> Self {
        self.support = Some(support);
        self
    }
}

impl TreeNorm for FnNorm {
    fn norm(&self, path: &[usize]) -> Result<BigRational> {
        Ok((self.f)(path))
    }

    fn support_at_least(&self, _eps: &BigRational) -> Result<Option<Vec<NodePath>>> {
        Ok(self.support.clone())
    }
}

/// `d(a,b) = max{‖z‖ : z ∈ (a ∪ b) ∩ suc(a ∧ b)}`, and `0` on the diagonal.
pub fn canonical_ultrametric<N: TreeNorm>(nt: &NormedHeightTree<N>, a: &Branch, b: &Branch) -> Result<BigRational> {
    let Some(k) = common_prefix_len(a.stem(), b.stem()) else {
        return Ok(BigRational::zero());
    };
    let na = nt.norm.norm(&a.node_at(k + 1))?;
    let nb = nt.norm.norm(&b.node_at(k + 1))?;
    Ok(if na >= nb { na } else { nb })
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Checks the height-tree axioms on the window of the given depth and
/// breadth. A finite window can refute but not certify the limit condition;
/// the report notes the verified fragment.
pub fn verify_height_tree_axioms(tree: &HeightTree, depth: usize, breadth: usize) -> Report {
    let mut r = Report::new("height-tree axioms");
    let breadth = breadth.max(1);
    let nodes = match tree.window(&[], depth, breadth) {
        Ok(n) => n,
        Err(e) => {
            r.fail("[]", format!("window enumeration failed: {e}"));
            return r;
        }
    };
    for (path, h) in &nodes {
        check_node_axioms(tree, path, h, breadth, &mut r);
    }
    r.note(format!(
        "verified {} nodes to depth {depth} with successors 0..={breadth}",
        nodes.len()
    ));
    r
}

fn check_node_axioms(tree: &HeightTree, path: &NodePath, h: &ExtHeight, breadth: usize, r: &mut Report) {
    match tree.child_height(path, h, 0) {
        Ok(c) => r.check(c == ExtHeight::MinusOne, path, || {
            format!("central successor has height {c}, expected -1")
        }),
        Err(e) => r.fail(path, format!("central successor missing: {e}")),
    }
    if h.is_leaf_like() {
        r.check(tree.child_height(path, h, 1).is_err(), path, || {
            format!("node of height {h} has more than its central successor")
        });
        return;
    }
    let mut children = Vec::with_capacity(breadth);
    for i in 1..=breadth {
        match tree.child_height(path, h, i) {
            Ok(c) => children.push(c),
            Err(e) => {
                r.fail(path.child(i), format!("successor not addressable: {e}"));
                return;
            }
        }
    }
    for (i, c) in children.iter().enumerate() {
        r.check(*c != ExtHeight::MinusOne, path.child(i + 1), || {
            "a second successor of height -1".to_string()
        });
    }
    let regular = tree.regular_from(path);
    let tail = tree.tail_height(path, h);
    if *h == ExtHeight::Infinity {
        match &tail {
            Some(t) => r.check(*t == ExtHeight::Infinity, path, || {
                format!("all but finitely many successors must have height inf, tail has {t}")
            }),
            None => {
                for (i, c) in children.iter().enumerate().skip(regular.saturating_sub(1)) {
                    r.check(*c == ExtHeight::Infinity, path.child(i + 1), || {
                        format!("successor of an inf node has height {c}")
                    });
                }
            }
        }
        return;
    }
    // 0 < h < ω₁: every successor satisfies ℏ(y)+1 ≤ ℏ(x)
    for (i, c) in children.iter().enumerate() {
        r.check(c < h, path.child(i + 1), || {
            format!("successor height {c} is not below {h}")
        });
    }
    match (h.kind(), tail) {
        (_, Some(t)) => {
            let sup = t.plus_one();
            r.check(sup.as_ref() == Ok(h), path, || match &sup {
                Ok(s) => format!("sup of successor heights + 1 is {s}, expected {h}"),
                Err(e) => format!("tail height overflow: {e}"),
            });
        }
        (HeightKind::Limit, None) => {
            for w in children.windows(2).skip(regular.saturating_sub(1)) {
                r.check(w[0] <= w[1], path, || {
                    format!("successor heights decrease: {} then {}", w[0], w[1])
                });
            }
            // every bound h[k] below h is exceeded by ℏ(y)+1 from successor k on
            for k in 1..=breadth {
                let Ok(bound) = crate::ordinal::fundamental_sequence(h, k as u64) else {
                    r.fail(path, "no fundamental sequence for a limit height");
                    return;
                };
                let bound = ExtHeight::Ord(bound);
                let ok = children
                    .iter()
                    .skip((k - 1).max(regular.saturating_sub(1)))
                    .all(|c| c.plus_one().map(|s| s > bound).unwrap_or(false));
                r.check(ok, path, || {
                    format!("successors from index {k} do not exceed {bound}")
                });
            }
        }
        (HeightKind::Successor, None) => {
            let target = h.minus_one().expect("successor");
            for (i, c) in children.iter().enumerate().skip(regular.saturating_sub(1)) {
                r.check(*c == target, path.child(i + 1), || {
                    format!("successor height {c}, expected {target}")
                });
            }
        }
        _ => {}
    }
}

/// Checks the norm axioms: monotone along the tree order, zero exactly on
/// central nodes, and `{x : ‖x‖ ≥ ε}` equal to the declared finite support.
pub fn verify_norm_axioms<N: TreeNorm>(
    nt: &NormedHeightTree<N>,
    eps: &BigRational,
    depth: usize,
    breadth: usize,
) -> Result<Report> {
    let support = nt.norm.support_at_least(eps)?.ok_or(Error::UndeclaredSupport)?;
    let mut r = Report::new("norm axioms");
    let nodes = nt.tree.window(&[], depth, breadth)?;
    let mut norms = BTreeMap::new();
    for (p, h) in &nodes {
        let n = nt.norm.norm(p)?;
        r.check(!n.is_negative(), p, || format!("negative norm {n}"));
        let is_central = *h == ExtHeight::MinusOne;
        r.check(n.is_zero() == is_central, p, || {
            format!("norm {n} at height {h}: zero exactly on height -1 nodes")
        });
        norms.insert(p.clone(), n);
    }
    for (p, n) in &norms {
        if let Some(parent) = p.parent() {
            let pn = &norms[&parent];
            r.check(n <= pn, p, || format!("norm {n} exceeds parent norm {pn}"));
        }
    }
    let set: HashSet<&NodePath> = support.iter().collect();
    for s in &support {
        let n = nt.norm.norm(s)?;
        r.check(n >= *eps, s, || format!("declared support node has norm {n} < {eps}"));
        if let Some(parent) = s.parent() {
            r.check(set.contains(&parent), s, || {
                "declared support is not closed under predecessors".to_string()
            });
        }
        let h = nt.tree.node_height(s)?;
        let top = if h.is_leaf_like() { 0 } else { breadth };
        for i in 0..=top {
            let c = s.child(i);
            if !set.contains(&c) {
                let n = nt.norm.norm(&c)?;
                r.check(n < *eps, &c, || format!("norm {n} >= {eps} outside the declared support"));
            }
        }
    }
    for (p, n) in &norms {
        if !set.contains(p) {
            r.check(*n < *eps, p, || format!("norm {n} >= {eps} outside the declared support"));
        }
    }
    r.note(format!("|{{x : ‖x‖ ≥ {eps}}}| = {}", support.len()));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(s: &str) -> ExtHeight {
        s.parse().unwrap()
    }

    fn p(v: &[usize]) -> NodePath {
        NodePath(v.to_vec())
    }

    #[test]
    fn canonical_heights() {
        let t1 = canonical_tree(h("1")).unwrap();
        assert_eq!(t1.node_height(&[5]).unwrap(), h("0"));
        let tw = canonical_tree(h("w")).unwrap();
        assert_eq!(tw.node_height(&[3]).unwrap(), h("3"));
        let ti = canonical_tree(h("inf")).unwrap();
        assert_eq!(ti.node_height(&[2]).unwrap(), h("inf"));
        let t2 = canonical_tree(h("2")).unwrap();
        assert_eq!(node_height(&t2, &p(&[0])).unwrap(), h("-1"));
        assert_eq!(node_height(&t2, &p(&[4])).unwrap(), h("1"));
        assert_eq!(node_height(&t2, &p(&[4, 3])).unwrap(), h("0"));
        assert!(matches!(
            node_height(&t2, &p(&[4, 3, 1])),
            Err(Error::Unaddressable { .. })
        ));
        assert!(matches!(
            node_height(&t2, &p(&[0, 1])),
            Err(Error::Unaddressable { .. })
        ));
        assert_eq!(canonical_tree(h("-1")), Err(Error::InvalidRootHeight));
    }

    #[test]
    fn meet_examples() {
        let m = |a: &[usize], b: &[usize]| meet(&Branch::new(p(a)), &Branch::new(p(b)));
        assert_eq!(m(&[1, 2, 3], &[1, 2, 5]).unwrap(), p(&[1, 2]));
        assert_eq!(m(&[1], &[2]).unwrap(), p(&[]));
        assert_eq!(m(&[1], &[1, 0, 0, 3]).unwrap(), p(&[1, 0, 0]));
        assert_eq!(m(&[1], &[1, 0, 0]), Err(Error::EqualBranches));
    }

    #[test]
    fn branch_normalization() {
        assert_eq!(Branch::new(p(&[1, 0, 0])), Branch::new(p(&[1])));
        assert_eq!(Branch::new(p(&[0, 0])), Branch::central());
        assert!(Branch::new(p(&[2, 1])).passes_through(&[2, 1, 0, 0]));
        assert!(!Branch::new(p(&[2, 1])).passes_through(&[2, 2]));
        assert_eq!(Branch::new(p(&[3])).node_at(2), p(&[3, 0]));
    }

    #[test]
    fn path_parsing() {
        assert_eq!("[1,2,3]".parse::<NodePath>().unwrap(), p(&[1, 2, 3]));
        assert_eq!("[]".parse::<NodePath>().unwrap(), p(&[]));
        assert_eq!("4".parse::<NodePath>().unwrap(), p(&[4]));
        assert!("[a]".parse::<NodePath>().is_err());
    }

    #[test]
    fn axioms_pass_on_canonical_trees() {
        let r = verify_height_tree_axioms(&canonical_tree(h("w")).unwrap(), 3, 8);
        assert!(r.passed(), "{r}");
        let r = verify_height_tree_axioms(&canonical_tree(h("0")).unwrap(), 5, 5);
        assert!(r.passed(), "{r}");
        let r = verify_height_tree_axioms(&canonical_tree(h("w^w+1")).unwrap(), 3, 4);
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn axioms_reject_bad_limit_rule() {
        let t = canonical_tree(h("w")).unwrap().with_rule(
            p(&[]),
            ChildRule::Explicit {
                leading: vec![],
                rest: h("1"),
            },
        );
        let r = verify_height_tree_axioms(&t, 2, 6);
        assert!(!r.passed());
        assert!(r.has_failure_matching("sup of successor heights + 1 is 2"), "{r}");
    }

    #[test]
    fn axioms_reject_tall_successor_and_finite_inf_tail() {
        let t = canonical_tree(h("2")).unwrap().with_rule(
            p(&[]),
            ChildRule::Explicit {
                leading: vec![h("3")],
                rest: h("1"),
            },
        );
        assert!(!verify_height_tree_axioms(&t, 1, 4).passed());
        let t = canonical_tree(h("inf")).unwrap().with_rule(
            p(&[]),
            ChildRule::Explicit {
                leading: vec![],
                rest: h("5"),
            },
        );
        assert!(!verify_height_tree_axioms(&t, 1, 4).passed());
        let t = canonical_tree(h("2")).unwrap().with_rule(
            p(&[]),
            ChildRule::Explicit {
                leading: vec![h("-1")],
                rest: h("1"),
            },
        );
        let r = verify_height_tree_axioms(&t, 1, 4);
        assert!(r.has_failure_matching("second successor of height -1"), "{r}");
    }

    #[test]
    fn path_sum_norm_axioms() {
        let tree = Arc::new(canonical_tree(h("w^2")).unwrap());
        let norm = PathSumNorm::new(tree.clone(), rational(1, 2)).unwrap();
        let nt = NormedHeightTree::new(tree, norm);
        let r = verify_norm_axioms(&nt, &rational(1, 8), 4, 8).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn constant_norm_fails() {
        let tree = Arc::new(canonical_tree(h("1")).unwrap());
        let nt = NormedHeightTree::new(
            tree,
            FnNorm::new(|_| BigRational::one()).with_support(vec![NodePath::root()]),
        );
        let r = verify_norm_axioms(&nt, &rational(1, 8), 2, 4).unwrap();
        assert!(r.has_failure_matching("zero exactly on height -1"));
        assert!(r.has_failure_matching("outside the declared support"));
    }

    #[test]
    fn increasing_norm_fails_monotonicity() {
        let tree = Arc::new(canonical_tree(h("2")).unwrap());
        let base = PathSumNorm::new(tree.clone(), rational(1, 2)).unwrap();
        let support = base.support_at_least(&rational(1, 8)).unwrap().unwrap();
        let nt = NormedHeightTree::new(
            tree,
            FnNorm::new(move |q| {
                if q == [1, 1] {
                    rational(1, 1)
                } else {
                    base.norm(q).unwrap()
                }
            })
            .with_support(support),
        );
        let r = verify_norm_axioms(&nt, &rational(1, 8), 2, 4).unwrap();
        assert!(r.has_failure_matching("exceeds parent norm"), "{r}");
    }

    #[test]
    fn undeclared_support_is_an_error() {
        let tree = Arc::new(canonical_tree(h("1")).unwrap());
        let nt = NormedHeightTree::new(tree, FnNorm::new(|_| BigRational::one()));
        assert!(matches!(
            verify_norm_axioms(&nt, &rational(1, 8), 2, 4),
            Err(Error::UndeclaredSupport)
        ));
    }

    #[test]
    fn path_sum_ultrametric() {
        let tree = Arc::new(canonical_tree(h("inf")).unwrap());
        let norm = PathSumNorm::new(tree.clone(), rational(1, 2)).unwrap();
        let nt = NormedHeightTree::new(tree, norm);
        let a = Branch::new(p(&[1, 2]));
        let b = Branch::new(p(&[1, 3]));
        assert_eq!(canonical_ultrametric(&nt, &a, &b).unwrap(), rational(1, 8));
        assert_eq!(canonical_ultrametric(&nt, &a, &a).unwrap(), rational(0, 1));
        assert_eq!(
            canonical_ultrametric(&nt, &Branch::central(), &b).unwrap(),
            rational(1, 2)
        );
    }
}
