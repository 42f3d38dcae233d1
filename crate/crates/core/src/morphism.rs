//! Height morphisms between (sub)trees of height trees.
//!
//! A [`HeightMorphism`] is stored as a per-node child map that is resolved on
//! demand and memoized, so infinite trees are never materialized. The default
//! child map is the greedy matching that realizes a surjective morphism
//! `↑s → ↑t` whenever `ℏ(s) ≥ ℏ(t)`: target successor `m = 1, 2, …` takes the
//! smallest unused source successor of at least its height, and source
//! successors that are never taken go to the central successor.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, RwLock};

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::ordinal::ExtHeight;
use crate::par::{self, Exec};
use crate::report::Report;
use crate::tree::{canonical_ultrametric, Branch, HeightTree, NodePath, NormedHeightTree, TreeNorm};

pub const DEFAULT_SEARCH_CAP: usize = 1 << 16;

/// How the successors of one source node are sent to successors of its image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChildMap {
    /// Greedy smallest-index matching (surjective onto the target successors).
    Greedy,
    /// `x_k ↦ x_{k+1}` on the successors of height `ℏ(node) − 1`, all other
    /// successors to the central one.
    Shift,
    /// Explicit table for hand-built maps: successor `i < leading.len()` goes
    /// to `leading[i]`, the rest follow `rest`.
    Table { leading: Vec<usize>, rest: RestRule },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestRule {
    Identity,
    Central,
    Constant(usize),
}

/// A map between subtrees `↑source_root → ↑target_root`, addressed by
/// absolute paths.
pub trait TreeMap: Sync {
    fn source_tree(&self) -> &HeightTree;
    fn source_root(&self) -> &NodePath;
    fn target_tree(&self) -> &HeightTree;
    fn target_root(&self) -> &NodePath;
    fn apply(&self, path: &[usize]) -> Result<NodePath>;
    /// Some node mapped onto `path`, if any.
    fn preimage(&self, path: &[usize]) -> Result<Option<NodePath>>;
    fn claims_surjective(&self) -> bool;
}

#[derive(Debug)]
struct Greedy {
    by_target: Vec<usize>,
    by_source: HashMap<usize, usize>,
    skipped: BTreeSet<usize>,
    frontier: usize,
    last_target_height: Option<ExtHeight>,
}

#[derive(Debug)]
enum Matcher {
    Collapse,
    Greedy(Greedy),
    Shift,
    Table { leading: Vec<usize>, rest: RestRule },
}

/// Resolved child map of one source node.
#[derive(Debug)]
struct NodeMatch {
    src: NodePath,
    src_height: ExtHeight,
    dst: NodePath,
    dst_height: ExtHeight,
    src_children: HashMap<usize, ExtHeight>,
    dst_children: HashMap<usize, ExtHeight>,
    matcher: Matcher,
}

pub struct HeightMorphism {
    source: Arc<HeightTree>,
    source_root: NodePath,
    target: Arc<HeightTree>,
    target_root: NodePath,
    rules: BTreeMap<NodePath, ChildMap>,
    surjective: bool,
    search_cap: usize,
    memo: RwLock<HashMap<NodePath, NodeMatch>>,
}

impl std::fmt::Debug for HeightMorphism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HeightMorphism")
            .field("source_root", &self.source_root)
            .field("target_root", &self.target_root)
            .field("rules", &self.rules)
            .field("surjective", &self.surjective)
            .finish()
    }
}

impl Clone for HeightMorphism {
    fn clone(&self) -> Self {
        HeightMorphism {
            source: self.source.clone(),
            source_root: self.source_root.clone(),
            target: self.target.clone(),
            target_root: self.target_root.clone(),
            rules: self.rules.clone(),
            surjective: self.surjective,
            search_cap: self.search_cap,
            memo: RwLock::new(HashMap::new()),
        }
    }
}

impl HeightMorphism {
    /// A morphism with explicit child maps at some source nodes and greedy
    /// matching elsewhere. No surjectivity is claimed.
    pub fn from_rules(
        source: Arc<HeightTree>,
        source_root: NodePath,
        target: Arc<HeightTree>,
        target_root: NodePath,
        rules: BTreeMap<NodePath, ChildMap>,
    ) -> Result<Self> {
        source.node_height(&source_root)?;
        target.node_height(&target_root)?;
        Ok(HeightMorphism {
            source,
            source_root,
            target,
            target_root,
            rules,
            surjective: false,
            search_cap: DEFAULT_SEARCH_CAP,
            memo: RwLock::new(HashMap::new()),
        })
    }

    /// The surjective morphism `↑source_root → ↑target_root`; requires
    /// `ℏ(source_root) ≥ ℏ(target_root)`.
    pub fn surjection(
        source: Arc<HeightTree>,
        source_root: NodePath,
        target: Arc<HeightTree>,
        target_root: NodePath,
    ) -> Result<Self> {
        let hs = source.node_height(&source_root)?;
        let ht = target.node_height(&target_root)?;
        if hs < ht {
            return Err(Error::HeightPrecondition { src: hs, dst: ht });
        }
        let mut m = Self::from_rules(source, source_root, target, target_root, BTreeMap::new())?;
        m.surjective = true;
        Ok(m)
    }

    /// The self-map of `tree` that fixes the root, shifts the successors of
    /// height `ℏ(root) − 1` one step along their enumeration, collapses every
    /// other root successor onto the central one, and below each root
    /// successor continues with the greedy surjection.
    pub fn shift(tree: Arc<HeightTree>) -> Result<Self> {
        let mut rules = BTreeMap::new();
        rules.insert(NodePath::root(), ChildMap::Shift);
        Self::from_rules(tree.clone(), NodePath::root(), tree, NodePath::root(), rules)
    }

    pub fn with_search_cap(mut self, cap: usize) -> Self {
        self.search_cap = cap.max(1);
        self
    }

    pub fn source_arc(&self) -> &Arc<HeightTree> {
        &self.source
    }

    pub fn target_arc(&self) -> &Arc<HeightTree> {
        &self.target
    }

    pub fn rules(&self) -> &BTreeMap<NodePath, ChildMap> {
        &self.rules
    }

    fn new_match(&self, src: &[usize], dst: &[usize]) -> Result<NodeMatch> {
        let src_height = self.source.node_height(src)?;
        let dst_height = self.target.node_height(dst)?;
        let rule = self.rules.get(src).unwrap_or(&ChildMap::Greedy);
        let matcher = match rule {
            ChildMap::Table { leading, rest } => Matcher::Table {
                leading: leading.clone(),
                rest: *rest,
            },
            ChildMap::Shift => Matcher::Shift,
            ChildMap::Greedy if dst_height.is_leaf_like() => Matcher::Collapse,
            ChildMap::Greedy => {
                if src_height < dst_height {
                    return Err(Error::HeightPrecondition {
                        src: src_height,
                        dst: dst_height,
                    });
                }
                Matcher::Greedy(Greedy {
                    by_target: Vec::new(),
                    by_source: HashMap::new(),
                    skipped: BTreeSet::new(),
                    frontier: 1,
                    last_target_height: None,
                })
            }
        };
        Ok(NodeMatch {
            src: src.into(),
            src_height,
            dst: dst.into(),
            dst_height,
            src_children: HashMap::new(),
            dst_children: HashMap::new(),
            matcher,
        })
    }

    /// Image of successor `c` of source node `src`, whose image is `dst`.
    fn child_image(&self, src: &[usize], dst: &[usize], c: usize) -> Result<usize> {
        if let Some(m) = self.memo.read().expect("memo lock").get(src) {
            if let Some(v) = m.resolved(c) {
                return Ok(v);
            }
        }
        let mut memo = self.memo.write().expect("memo lock");
        if !memo.contains_key(src) {
            let nm = self.new_match(src, dst)?;
            memo.insert(NodePath::from(src), nm);
        }
        let nm = memo.get_mut(src).expect("inserted");
        nm.forward(&self.source, &self.target, c, self.search_cap)
    }

    fn child_preimage(&self, src: &[usize], dst: &[usize], m: usize) -> Result<Option<usize>> {
        let mut memo = self.memo.write().expect("memo lock");
        if !memo.contains_key(src) {
            let nm = self.new_match(src, dst)?;
            memo.insert(NodePath::from(src), nm);
        }
        let nm = memo.get_mut(src).expect("inserted");
        nm.backward(&self.source, &self.target, m, self.search_cap)
    }
}

impl NodeMatch {
    fn src_child(&mut self, source: &HeightTree, n: usize) -> Result<ExtHeight> {
        if let Some(h) = self.src_children.get(&n) {
            return Ok(h.clone());
        }
        let h = source.child_height(&self.src, &self.src_height, n)?;
        self.src_children.insert(n, h.clone());
        Ok(h)
    }

    fn dst_child(&mut self, target: &HeightTree, m: usize) -> Result<ExtHeight> {
        if let Some(h) = self.dst_children.get(&m) {
            return Ok(h.clone());
        }
        let h = target.child_height(&self.dst, &self.dst_height, m)?;
        self.dst_children.insert(m, h.clone());
        Ok(h)
    }

    /// Cached answer without mutation, for the read-locked fast path.
    fn resolved(&self, c: usize) -> Option<usize> {
        match &self.matcher {
            Matcher::Table { .. } => None,
            _ if c == 0 => Some(0),
            Matcher::Collapse => Some(0),
            Matcher::Greedy(g) => g.by_source.get(&c).copied(),
            _ => None,
        }
    }

    fn forward(&mut self, source: &HeightTree, target: &HeightTree, c: usize, cap: usize) -> Result<usize> {
        // addressability of the source successor
        self.src_child(source, c)?;
        if c == 0 && !matches!(self.matcher, Matcher::Table { .. }) {
            return Ok(0);
        }
        let out = match &self.matcher {
            Matcher::Collapse => 0,
            Matcher::Table { leading, rest } => match leading.get(c) {
                Some(&v) => v,
                None => match rest {
                    RestRule::Identity => c,
                    RestRule::Central => 0,
                    RestRule::Constant(k) => *k,
                },
            },
            Matcher::Shift => {
                let target_level = self.src_height.minus_one()?;
                if self.src_child(source, c)? != target_level {
                    0
                } else {
                    let rank = self.rank_in_level(source, c, cap)?;
                    self.nth_in_level_dst(target, rank + 1, cap)?
                }
            }
            Matcher::Greedy(_) => return self.greedy_forward(source, target, c, cap),
        };
        // addressability of the image
        self.dst_child(target, out)?;
        Ok(out)
    }

    fn backward(&mut self, source: &HeightTree, target: &HeightTree, m: usize, cap: usize) -> Result<Option<usize>> {
        if self.dst_child(target, m).is_err() {
            return Ok(None);
        }
        if m == 0 {
            return Ok(Some(0));
        }
        match &self.matcher {
            Matcher::Collapse => Ok(None),
            Matcher::Table { leading, rest } => {
                if let Some(i) = leading.iter().position(|&v| v == m) {
                    return Ok(Some(i));
                }
                Ok(match rest {
                    RestRule::Identity if m >= leading.len() => Some(m),
                    RestRule::Constant(k) if *k == m => Some(leading.len().max(1)),
                    _ => None,
                })
            }
            Matcher::Shift => {
                let level = self.dst_height.minus_one()?;
                if self.dst_child(target, m)? != level {
                    return Ok(None);
                }
                let rank = self.rank_in_level_dst(target, m, cap)?;
                if rank == 0 {
                    return Ok(None);
                }
                Ok(Some(self.nth_in_level_src(source, rank - 1, cap)?))
            }
            Matcher::Greedy(_) => {
                while self.greedy().by_target.len() < m {
                    self.greedy_stage(source, target, cap)?;
                }
                Ok(Some(self.greedy().by_target[m - 1]))
            }
        }
    }

    fn greedy(&mut self) -> &mut Greedy {
        match &mut self.matcher {
            Matcher::Greedy(g) => g,
            _ => unreachable!("greedy matcher expected"),
        }
    }

    fn greedy_forward(&mut self, source: &HeightTree, target: &HeightTree, c: usize, cap: usize) -> Result<usize> {
        let regular = target.regular_from(&self.dst);
        let hc = self.src_child(source, c)?;
        for _ in 0..cap {
            let g = self.greedy();
            if let Some(&m) = g.by_source.get(&c) {
                return Ok(m);
            }
            if c < g.frontier {
                // c was passed over; target heights are non-decreasing from
                // `regular` on, so once they exceed ℏ(c) it is never taken
                let stage = g.by_target.len();
                if stage >= regular {
                    if let Some(last) = &g.last_target_height {
                        if *last > hc {
                            return Ok(0);
                        }
                    }
                }
            }
            self.greedy_stage(source, target, cap)?;
        }
        Err(Error::GreedyExhausted(self.src.clone()))
    }

    /// Matches the next target successor.
    fn greedy_stage(&mut self, source: &HeightTree, target: &HeightTree, cap: usize) -> Result<()> {
        let m = self.greedy().by_target.len() + 1;
        let hd = self.dst_child(target, m)?;
        let skipped: Vec<usize> = self.greedy().skipped.iter().copied().collect();
        let mut chosen = None;
        for n in skipped {
            if self.src_child(source, n)? >= hd {
                chosen = Some(n);
                break;
            }
        }
        match chosen {
            Some(n) => {
                self.greedy().skipped.remove(&n);
            }
            None => {
                let start = self.greedy().frontier;
                for n in start..start + cap {
                    if self.src_child(source, n)? >= hd {
                        chosen = Some(n);
                        break;
                    }
                    self.greedy().skipped.insert(n);
                }
                let Some(n) = chosen else {
                    return Err(Error::GreedyExhausted(self.src.clone()));
                };
                self.greedy().frontier = n + 1;
            }
        }
        let n = chosen.expect("chosen");
        let g = self.greedy();
        g.by_target.push(n);
        g.by_source.insert(n, m);
        g.last_target_height = Some(hd);
        Ok(())
    }

    fn level_members(
        tree: &HeightTree,
        node: &[usize],
        node_height: &ExtHeight,
        cache: &mut HashMap<usize, ExtHeight>,
        upto: Option<usize>,
        count: Option<usize>,
        cap: usize,
    ) -> Result<(usize, Option<usize>)> {
        let level = node_height.minus_one()?;
        let mut seen = 0;
        for n in 1..=cap {
            if upto == Some(n) {
                return Ok((seen, None));
            }
            let h = match cache.get(&n) {
                Some(h) => h.clone(),
                None => {
                    let h = tree.child_height(node, node_height, n)?;
                    cache.insert(n, h.clone());
                    h
                }
            };
            if h == level {
                if count == Some(seen) {
                    return Ok((seen, Some(n)));
                }
                seen += 1;
            }
        }
        Err(Error::GreedyExhausted(node.into()))
    }

    fn rank_in_level(&mut self, source: &HeightTree, c: usize, cap: usize) -> Result<usize> {
        Ok(Self::level_members(source, &self.src, &self.src_height, &mut self.src_children, Some(c), None, cap)?.0)
    }

    fn rank_in_level_dst(&mut self, target: &HeightTree, m: usize, cap: usize) -> Result<usize> {
        Ok(Self::level_members(target, &self.dst, &self.dst_height, &mut self.dst_children, Some(m), None, cap)?.0)
    }

    fn nth_in_level_src(&mut self, source: &HeightTree, k: usize, cap: usize) -> Result<usize> {
        Self::level_members(source, &self.src, &self.src_height, &mut self.src_children, None, Some(k), cap)?
            .1
            .ok_or_else(|| Error::GreedyExhausted(self.src.clone()))
    }

    fn nth_in_level_dst(&mut self, target: &HeightTree, k: usize, cap: usize) -> Result<usize> {
        Self::level_members(target, &self.dst, &self.dst_height, &mut self.dst_children, None, Some(k), cap)?
            .1
            .ok_or_else(|| Error::GreedyExhausted(self.dst.clone()))
    }
}

impl TreeMap for HeightMorphism {
    fn source_tree(&self) -> &HeightTree {
        &self.source
    }

    fn source_root(&self) -> &NodePath {
        &self.source_root
    }

    fn target_tree(&self) -> &HeightTree {
        &self.target
    }

    fn target_root(&self) -> &NodePath {
        &self.target_root
    }

    fn apply(&self, path: &[usize]) -> Result<NodePath> {
        if !self.source_root.is_prefix_of(path) {
            return Err(Error::NotInSource(path.into()));
        }
        let mut q = self.target_root.0.clone();
        for d in self.source_root.len()..path.len() {
            let m = self.child_image(&path[..d], &q, path[d])?;
            q.push(m);
        }
        Ok(NodePath(q))
    }

    fn preimage(&self, path: &[usize]) -> Result<Option<NodePath>> {
        if !self.target_root.is_prefix_of(path) {
            return Ok(None);
        }
        let mut p = self.source_root.0.clone();
        for d in self.target_root.len()..path.len() {
            match self.child_preimage(&p, &path[..d], path[d])? {
                Some(n) => p.push(n),
                None => return Ok(None),
            }
        }
        Ok(Some(NodePath(p)))
    }

    fn claims_surjective(&self) -> bool {
        self.surjective
    }
}

/// `second ∘ first`.
pub struct Composed<'a, A, B> {
    first: &'a A,
    second: &'a B,
}

impl<'a, A: TreeMap, B: TreeMap> Composed<'a, A, B> {
    pub fn new(first: &'a A, second: &'a B) -> Result<Self> {
        if first.target_tree() != second.source_tree() || !second.source_root().is_prefix_of(first.target_root()) {
            return Err(Error::InvalidTree(
                "the first map's target is not inside the second map's source".into(),
            ));
        }
        Ok(Composed { first, second })
    }
}

impl<A: TreeMap, B: TreeMap> TreeMap for Composed<'_, A, B> {
    fn source_tree(&self) -> &HeightTree {
        self.first.source_tree()
    }

    fn source_root(&self) -> &NodePath {
        self.first.source_root()
    }

    fn target_tree(&self) -> &HeightTree {
        self.second.target_tree()
    }

    fn target_root(&self) -> &NodePath {
        self.second.target_root()
    }

    fn apply(&self, path: &[usize]) -> Result<NodePath> {
        self.second.apply(&self.first.apply(path)?)
    }

    fn preimage(&self, path: &[usize]) -> Result<Option<NodePath>> {
        match self.second.preimage(path)? {
            Some(mid) => self.first.preimage(&mid),
            None => Ok(None),
        }
    }

    fn claims_surjective(&self) -> bool {
        false
    }
}

pub fn build_surjective_morphism(
    source: Arc<HeightTree>,
    source_root: NodePath,
    target: Arc<HeightTree>,
    target_root: NodePath,
) -> Result<HeightMorphism> {
    HeightMorphism::surjection(source, source_root, target, target_root)
}

pub fn apply_morphism<M: TreeMap + ?Sized>(m: &M, path: &[usize]) -> Result<NodePath> {
    m.apply(path)
}

/// The induced map on eventually-central branches.
pub fn boundary_map<M: TreeMap + ?Sized>(m: &M, b: &Branch) -> Result<Branch> {
    let root = m.source_root();
    let depth = b.stem().len().max(root.len());
    let node = b.node_at(depth);
    if !root.is_prefix_of(&node) {
        return Err(Error::NotInSource(node));
    }
    let image = m.apply(&node.child(0))?;
    if image.last() != Some(&0) {
        return Err(Error::NotCentralPreserving(node));
    }
    Ok(Branch::new(image))
}

/// Checks the three height-morphism conditions on the source window, plus
/// surjectivity onto the target window when the map claims it.
pub fn verify_morphism_axioms<M: TreeMap + ?Sized>(m: &M, depth: usize, breadth: usize) -> Report {
    let mut r = Report::new("morphism axioms");
    let nodes = match m.source_tree().window(m.source_root(), depth, breadth) {
        Ok(n) => n,
        Err(e) => {
            r.fail(m.source_root(), format!("source window failed: {e}"));
            return r;
        }
    };
    for (x, hx) in &nodes {
        let img = match m.apply(x) {
            Ok(i) => i,
            Err(e) => {
                r.fail(x, format!("image undefined: {e}"));
                continue;
            }
        };
        match m.target_tree().node_height(&img) {
            Ok(hy) => r.check(hy <= *hx, x, || format!("image height {hy} exceeds source height {hx}")),
            Err(e) => r.fail(x, format!("image {img} not addressable: {e}")),
        }
        match m.apply(&x.child(0)) {
            Ok(c) => r.check(c == img.child(0), x, || {
                format!("central successor goes to {c}, expected {}", img.child(0))
            }),
            Err(e) => r.fail(x, format!("central successor image undefined: {e}")),
        }
        if hx.is_leaf_like() {
            continue;
        }
        let mut hit: BTreeMap<usize, usize> = BTreeMap::new();
        for i in 1..=breadth {
            match m.apply(&x.child(i)) {
                Ok(c) => {
                    let last = *c.last().expect("child image is non-root");
                    if m.target_tree().node_height(&c).is_err() {
                        r.fail(x.child(i), format!("image {c} not addressable"));
                    }
                    if last != 0 {
                        if let Some(prev) = hit.insert(last, i) {
                            r.fail(
                                x,
                                format!("successors {prev} and {i} both map to non-central successor {c}"),
                            );
                        }
                    }
                    r.checked += 1;
                }
                Err(e) => r.fail(x.child(i), format!("image undefined: {e}")),
            }
        }
    }
    if m.claims_surjective() {
        match m.target_tree().window(m.target_root(), depth, breadth) {
            Ok(targets) => {
                for (y, _) in &targets {
                    match m.preimage(y) {
                        Ok(Some(x)) => match m.apply(&x) {
                            Ok(back) => r.check(back == *y, y, || format!("preimage {x} maps to {back}")),
                            Err(e) => r.fail(y, format!("preimage {x} has no image: {e}")),
                        },
                        Ok(None) => r.fail(y, "no preimage: map is not surjective"),
                        Err(e) => r.fail(y, format!("preimage search failed: {e}")),
                    }
                }
            }
            Err(e) => r.fail(m.target_root(), format!("target window failed: {e}")),
        }
    }
    r.note(format!("{} source nodes to depth {depth}, breadth {breadth}", nodes.len()));
    r
}

/// Node-level `‖f(x)‖ ≤ λ‖x‖` on `nodes` (the tree root, which lies on no
/// successor set, is exempt) and branch-level `d(f̄a, f̄b) ≤ λ·d(a,b)` on all
/// pairs from `branches`.
pub fn lipschitz_check<M, NS, ND>(
    m: &M,
    src: &NormedHeightTree<NS>,
    dst: &NormedHeightTree<ND>,
    lambda: &BigRational,
    nodes: &[NodePath],
    branches: &[Branch],
) -> Result<Report>
where
    M: TreeMap + ?Sized,
    NS: TreeNorm,
    ND: TreeNorm,
{
    let mut r = Report::new("lipschitz");
    for x in nodes.iter().filter(|x| !x.is_empty()) {
        let nx = src.norm.norm(x)?;
        let img = m.apply(x)?;
        let ny = dst.norm.norm(&img)?;
        r.check(ny <= lambda * &nx, x, || {
            format!("‖f(x)‖ = {ny} exceeds {lambda}·{nx}")
        });
    }
    let images: Vec<Branch> = branches
        .iter()
        .map(|b| boundary_map(m, b))
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..branches.len())
        .flat_map(|i| (i + 1..branches.len()).map(move |j| (i, j)))
        .collect();
    let verdicts = par::try_map(Exec::default(), &pairs, |&(i, j)| -> Result<Option<String>> {
        let d = canonical_ultrametric(src, &branches[i], &branches[j])?;
        let di = canonical_ultrametric(dst, &images[i], &images[j])?;
        Ok((di > lambda * &d).then(|| {
            format!(
                "d({}, {}) = {di} exceeds {lambda}·{d}",
                images[i], images[j]
            )
        }))
    })?;
    for ((i, j), v) in pairs.iter().zip(verdicts) {
        r.checked += 1;
        if let Some(msg) = v {
            r.fail(format!("{} / {}", branches[*i], branches[*j]), msg);
        }
    }
    Ok(r)
}
