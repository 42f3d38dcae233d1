//! Contracting function systems on boundaries of height trees.
//!
//! [`IfsSystem`] realizes a unital space of non-limit height as the attractor
//! of `{f} ∪ {g_x : x ∈ E ∪ {x₀}}`: `f` fixes the root and shifts the root
//! successors of height `ℏ(root) − 1` one step, each `g_x` maps the whole tree
//! onto `↑x`. The node norm is `λ^n` on `Tₙ ∖ Tₙ₋₁`, where `T₀ = {root}` and
//! `Tₙ₊₁ = ⋃ φ(Tₙ)`.
//!
//! The algorithms over point sets are generic in [`FunctionSystem`] and are
//! shared with the glued systems of non-unital spaces.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{diameter_of, fresh_context, verify_ultrametric_matrix, PointSet, Profile, Scale};
use crate::morphism::{boundary_map, HeightMorphism, TreeMap};
use crate::ordinal::{ExtHeight, HeightKind};
use crate::par::{self, Exec};
use crate::report::Report;
use crate::tree::{
    canonical_tree, check_lambda, lambda_pow, max_exponent_at_least, Branch, ChildRule, HeightTree, NodePath,
    NormedHeightTree, TreeNorm,
};

/// Resource bounds; exceeding one is an error, never a silent truncation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Caps {
    /// Largest level searched when locating a node in `⋃ Tₙ`.
    pub level_cap: u32,
    /// Largest point or node set built by iteration.
    pub net_cap: usize,
    /// Longest word enumerated by [`word_diameters`].
    pub word_cap: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            level_cap: 64,
            net_cap: 1_000_000,
            word_cap: 20,
        }
    }
}

/// A finite family of `λ`-Lipschitz self-maps of an ultrametric boundary.
pub trait FunctionSystem: Sync {
    type Point: Clone + Ord + Send + Sync + fmt::Display + fmt::Debug;

    fn context(&self) -> u64;
    fn lambda(&self) -> &BigRational;
    fn map_count(&self) -> usize;
    fn map_label(&self, i: usize) -> String;
    fn apply_map(&self, i: usize, p: &Self::Point) -> Result<Self::Point>;
    /// Starting points of the Hutchinson iteration.
    fn seed_points(&self) -> Vec<Self::Point>;
    fn profile(&self, p: &Self::Point) -> Result<Profile>;
    fn caps(&self) -> &Caps;
    fn exec(&self) -> Exec;

    fn seed(&self) -> PointSet<Self::Point> {
        PointSet::new(self.context(), self.seed_points())
    }

    fn point_set(&self, points: Vec<Self::Point>) -> PointSet<Self::Point> {
        PointSet::new(self.context(), points)
    }
}

fn own<S: FunctionSystem>(s: &S, k: &PointSet<S::Point>) -> Result<()> {
    if k.context() != s.context() {
        return Err(Error::MixedContexts);
    }
    Ok(())
}

/// Image of one point set under one map.
pub fn map_image<S: FunctionSystem>(s: &S, i: usize, k: &PointSet<S::Point>) -> Result<PointSet<S::Point>> {
    own(s, k)?;
    if i >= s.map_count() {
        return Err(Error::NoSuchMap(i));
    }
    let pts = k.to_vec();
    let out = par::try_map(s.exec(), &pts, |p| s.apply_map(i, p))?;
    Ok(s.point_set(out))
}

/// `K ↦ ⋃_φ φ(K)`.
pub fn hutchinson_step<S: FunctionSystem>(s: &S, k: &PointSet<S::Point>) -> Result<PointSet<S::Point>> {
    own(s, k)?;
    if k.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let pts = k.to_vec();
    let m = s.map_count();
    let images = par::try_map_range(s.exec(), pts.len() * m, |j| s.apply_map(j % m, &pts[j / m]))?;
    let out = s.point_set(images);
    if out.len() > s.caps().net_cap {
        return Err(Error::SizeCapExceeded(s.caps().net_cap));
    }
    Ok(out)
}

/// `𝓕⁰(seed), …, 𝓕ⁿ(seed)`.
pub fn attractor_nets<S: FunctionSystem>(s: &S, n: usize) -> Result<Vec<PointSet<S::Point>>> {
    let mut out = vec![s.seed()];
    for _ in 0..n {
        let next = hutchinson_step(s, out.last().expect("nonempty"))?;
        out.push(next);
    }
    Ok(out)
}

pub fn attractor_net<S: FunctionSystem>(s: &S, n: usize) -> Result<PointSet<S::Point>> {
    Ok(attractor_nets(s, n)?.pop().expect("nonempty"))
}

pub fn profiles<S: FunctionSystem>(s: &S, k: &PointSet<S::Point>) -> Result<Vec<Profile>> {
    own(s, k)?;
    let pts = k.to_vec();
    par::try_map(s.exec(), &pts, |p| s.profile(p))
}

pub fn distance<S: FunctionSystem>(s: &S, a: &S::Point, b: &S::Point) -> Result<BigRational> {
    Ok(s.profile(a)?.distance(&s.profile(b)?).to_rational(s.lambda()))
}

fn directed(exec: Exec, a: &[Profile], b: &[Profile]) -> Scale {
    par::map(exec, a, |p| {
        b.iter().map(|q| p.distance(q)).min().expect("nonempty")
    })
    .into_iter()
    .max()
    .unwrap_or(Scale::Zero)
}

/// Exact Hausdorff distance as a scale `0` or `λ^k`.
pub fn hausdorff_scale<S: FunctionSystem>(s: &S, a: &PointSet<S::Point>, b: &PointSet<S::Point>) -> Result<Scale> {
    a.same_context(b)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let pa = profiles(s, a)?;
    let pb = profiles(s, b)?;
    Ok(directed(s.exec(), &pa, &pb).max(directed(s.exec(), &pb, &pa)))
}

pub fn hausdorff_distance<S: FunctionSystem>(
    s: &S,
    a: &PointSet<S::Point>,
    b: &PointSet<S::Point>,
) -> Result<BigRational> {
    Ok(hausdorff_scale(s, a, b)?.to_rational(s.lambda()))
}

pub fn diameter<S: FunctionSystem>(s: &S, k: &PointSet<S::Point>) -> Result<BigRational> {
    Ok(diameter_of(&profiles(s, k)?).to_rational(s.lambda()))
}

/// All three ultrametric axioms over every pair and triple of `k`.
pub fn verify_ultrametric<S: FunctionSystem>(s: &S, k: &PointSet<S::Point>) -> Result<Report> {
    let pts = k.to_vec();
    let pr = profiles(s, k)?;
    let d: Vec<Vec<Scale>> = par::map(s.exec(), &pr, |p| pr.iter().map(|q| p.distance(q)).collect());
    Ok(verify_ultrametric_matrix(&pts, &d, &Scale::Zero))
}

/// `d(φa, φb) ≤ λ·d(a, b)` for every map and every pair of `k`.
pub fn verify_boundary_lipschitz<S: FunctionSystem>(s: &S, k: &PointSet<S::Point>) -> Result<Report> {
    let mut r = Report::new("boundary lipschitz");
    let pts = k.to_vec();
    let pr = profiles(s, k)?;
    for i in 0..s.map_count() {
        let img = par::try_map(s.exec(), &pts, |p| s.profile(&s.apply_map(i, p)?))?;
        let bad: Vec<(usize, usize)> = par::map(s.exec(), &(0..pts.len()).collect::<Vec<_>>(), |&a| {
            (a + 1..pts.len())
                .filter(|&b| img[a].distance(&img[b]) > pr[a].distance(&pr[b]).times_lambda())
                .map(|b| (a, b))
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect();
        r.checked += pts.len() * pts.len().saturating_sub(1) / 2;
        for (a, b) in bad {
            let lam = s.lambda();
            r.fail(
                format!("{} on {} / {}", s.map_label(i), pts[a], pts[b]),
                format!(
                    "image distance {} exceeds {} times {}",
                    img[a].distance(&img[b]).to_rational(lam),
                    lam,
                    pr[a].distance(&pr[b]).to_rational(lam)
                ),
            );
        }
    }
    Ok(r)
}

/// The blocks `φ(attractor_net(n−1))` are pairwise disjoint, their union is
/// `attractor_net(n)`, and `attractor_net(n) ⊆ 𝓕(attractor_net(n))`.
pub fn verify_boundary_partition<S: FunctionSystem>(s: &S, n: usize) -> Result<Report> {
    let mut r = Report::new("boundary partition");
    let nets = attractor_nets(s, n.max(1))?;
    let prev = &nets[nets.len() - 2];
    let last = &nets[nets.len() - 1];
    let blocks: Vec<PointSet<S::Point>> = (0..s.map_count())
        .map(|i| map_image(s, i, prev))
        .collect::<Result<_>>()?;
    for i in 0..blocks.len() {
        for j in i + 1..blocks.len() {
            let common: Vec<_> = blocks[i].points().intersection(blocks[j].points()).collect();
            r.check(common.is_empty(), format!("{} / {}", s.map_label(i), s.map_label(j)), || {
                format!("image blocks share {} points, first {}", common.len(), common[0])
            });
        }
    }
    let union: BTreeSet<S::Point> = blocks.iter().flat_map(|b| b.iter().cloned()).collect();
    r.check(union == *last.points(), format!("net {n}"), || {
        "union of image blocks differs from the next net".into()
    });
    let cover = hutchinson_step(s, last)?;
    r.check(last.is_subset(&cover), format!("net {n}"), || {
        "net is not covered by its own image".into()
    });
    Ok(r)
}

/// `max_{|w| = n} diam(φ_w(attractor_net(N)))`.
pub fn word_diameters<S: FunctionSystem>(s: &S, n: usize, big_n: usize) -> Result<BigRational> {
    Ok(word_diameter_scale(s, n, big_n)?.to_rational(s.lambda()))
}

pub fn word_diameter_scale<S: FunctionSystem>(s: &S, n: usize, big_n: usize) -> Result<Scale> {
    let cap = s.caps().word_cap;
    if n > cap {
        return Err(Error::WordCapExceeded { len: n, cap });
    }
    let net = attractor_net(s, big_n)?;
    let mut best = Scale::Zero;
    let mut stack = vec![(net, 0usize)];
    while let Some((set, len)) = stack.pop() {
        // a singleton stays a singleton under every further word
        if len == n || set.len() <= 1 {
            best = best.max(diameter_of(&profiles(s, &set)?));
            continue;
        }
        for i in 0..s.map_count() {
            stack.push((map_image(s, i, &set)?, len + 1));
        }
    }
    Ok(best)
}

/// A fixed point of one map; `exact` is false when only a `tol`-close
/// approximation is available.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedPoint<P = Branch> {
    pub point: P,
    pub exact: bool,
    pub steps: usize,
}

/// The system of a unital space on the boundary of one height tree.
pub struct IfsSystem {
    context: u64,
    tree: Arc<HeightTree>,
    lambda: BigRational,
    maps: Vec<HeightMorphism>,
    labels: Vec<String>,
    exceptional: Vec<usize>,
    caps: Caps,
    exec: Exec,
    levels: RwLock<HashMap<NodePath, u32>>,
    level_sets: RwLock<Vec<BTreeSet<NodePath>>>,
}

impl fmt::Debug for IfsSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IfsSystem")
            .field("root", self.tree.root_height())
            .field("lambda", &self.lambda)
            .field("maps", &self.labels)
            .finish()
    }
}

/// The canonical system on `canonical_tree(root_height)`.
pub fn build_ifs_unital(root_height: ExtHeight, lambda: BigRational) -> Result<IfsSystem> {
    if root_height.kind() == HeightKind::Limit {
        return Err(Error::NotSuccessor(root_height));
    }
    IfsSystem::from_tree(Arc::new(canonical_tree(root_height)?), lambda)
}

impl IfsSystem {
    /// Builds `{f} ∪ {g_x : x ∈ E ∪ {x₀}}` for any height tree whose root
    /// height is `0`, a successor or `∞`.
    pub fn from_tree(tree: Arc<HeightTree>, lambda: BigRational) -> Result<Self> {
        check_lambda(&lambda)?;
        let h = tree.root_height().clone();
        match h.kind() {
            HeightKind::Limit => return Err(Error::NotSuccessor(h)),
            HeightKind::MinusOne => return Err(Error::InvalidRootHeight),
            HeightKind::Zero => {
                let id = HeightMorphism::surjection(tree.clone(), NodePath::root(), tree.clone(), NodePath::root())?;
                return Self::with_maps(tree, lambda, vec![("id".into(), id)]);
            }
            HeightKind::Successor | HeightKind::Infinity => {}
        }
        let level = h.minus_one()?;
        let (exceptional, x0) = match tree.rule_at(&[]) {
            ChildRule::Canonical => (Vec::new(), 1),
            ChildRule::Explicit { leading, rest } => {
                if *rest != level {
                    return Err(Error::InvalidTree(format!(
                        "the root needs infinitely many successors of height {level}"
                    )));
                }
                let e: Vec<usize> = (1..=leading.len()).filter(|&i| leading[i - 1] != level).collect();
                let x0 = (1..=leading.len())
                    .find(|&i| leading[i - 1] == level)
                    .unwrap_or(leading.len() + 1);
                (e, x0)
            }
        };
        let mut maps = vec![("f".to_string(), HeightMorphism::shift(tree.clone())?)];
        for x in std::iter::once(x0).chain(exceptional.iter().copied()) {
            let g = HeightMorphism::surjection(tree.clone(), NodePath::root(), tree.clone(), NodePath(vec![x]))?;
            maps.push((format!("g[{x}]"), g));
        }
        let mut s = Self::with_maps(tree, lambda, maps)?;
        s.exceptional = exceptional;
        Ok(s)
    }

    /// A system with an arbitrary map list, for hand-built experiments.
    pub fn with_maps(tree: Arc<HeightTree>, lambda: BigRational, maps: Vec<(String, HeightMorphism)>) -> Result<Self> {
        check_lambda(&lambda)?;
        let (labels, maps) = maps.into_iter().unzip();
        Ok(IfsSystem {
            context: fresh_context(),
            tree,
            lambda,
            maps,
            labels,
            exceptional: Vec::new(),
            caps: Caps::default(),
            exec: Exec::default(),
            levels: RwLock::new(HashMap::new()),
            level_sets: RwLock::new(Vec::new()),
        })
    }

    pub fn with_caps(mut self, caps: Caps) -> Self {
        self.set_caps(caps);
        self
    }

    pub fn set_caps(&mut self, caps: Caps) {
        self.caps = caps;
    }

    pub fn set_exec(&mut self, exec: Exec) {
        self.exec = exec;
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.set_exec(exec);
        self
    }

    pub fn tree(&self) -> &Arc<HeightTree> {
        &self.tree
    }

    pub fn maps(&self) -> &[HeightMorphism] {
        &self.maps
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Root successors of non-negative height below `ℏ(root) − 1`.
    pub fn exceptional(&self) -> &[usize] {
        &self.exceptional
    }

    /// `T₀, …, Tₙ`, computed forward and cached.
    pub fn level_sets(&self, n: usize) -> Result<Vec<BTreeSet<NodePath>>> {
        {
            let cache = self.level_sets.read().expect("level lock");
            if cache.len() > n {
                return Ok(cache[..=n].to_vec());
            }
        }
        let mut cache = self.level_sets.write().expect("level lock");
        if cache.is_empty() {
            cache.push(BTreeSet::from([NodePath::root()]));
        }
        while cache.len() <= n {
            let last: Vec<NodePath> = cache.last().expect("nonempty").iter().cloned().collect();
            let m = self.maps.len();
            let next = par::try_map_range(self.exec, last.len() * m, |j| self.maps[j % m].apply(&last[j / m]))?;
            let next: BTreeSet<NodePath> = next.into_iter().collect();
            if next.len() > self.caps.net_cap {
                return Err(Error::SizeCapExceeded(self.caps.net_cap));
            }
            cache.push(next);
        }
        Ok(cache[..=n].to_vec())
    }

    /// First `n` with `p ∈ Tₙ`, for nodes of non-negative height, found by
    /// walking preimages back to the root; `None` for height `−1`.
    pub fn node_level(&self, p: &[usize]) -> Result<Option<u32>> {
        if self.tree.node_height(p)? == ExtHeight::MinusOne {
            return Ok(None);
        }
        self.level_rec(p, 0).map(Some).map_err(|e| match e {
            Error::LevelCapExceeded { cap, .. } => Error::LevelCapExceeded { path: p.into(), cap },
            other => other,
        })
    }

    fn level_rec(&self, y: &[usize], depth: u32) -> Result<u32> {
        if y.is_empty() {
            return Ok(0);
        }
        if let Some(&l) = self.levels.read().expect("level lock").get(y) {
            return Ok(l);
        }
        let cap = self.caps.level_cap;
        if depth >= cap {
            return Err(Error::LevelCapExceeded { path: y.into(), cap });
        }
        let mut best: Option<u32> = None;
        let mut err = None;
        for m in &self.maps {
            if let Some(x) = m.preimage(y)? {
                match self.level_rec(&x, depth + 1) {
                    Ok(l) => best = Some(best.map_or(l + 1, |b| b.min(l + 1))),
                    Err(e) => err = Some(e),
                }
            }
        }
        match (best, err) {
            (Some(l), _) if l <= cap => {
                self.levels.write().expect("level lock").insert(y.into(), l);
                Ok(l)
            }
            (_, Some(e)) => Err(e),
            _ => Err(Error::LevelCapExceeded { path: y.into(), cap }),
        }
    }

    /// `λ^n` on `Tₙ ∖ Tₙ₋₁`, `0` at height `−1`.
    pub fn node_norm(&self, p: &[usize]) -> Result<BigRational> {
        Ok(match self.node_level(p)? {
            None => BigRational::zero(),
            Some(l) => lambda_pow(&self.lambda, l as i64),
        })
    }

    pub fn normed(&self) -> NormedHeightTree<&IfsSystem> {
        NormedHeightTree::new(self.tree.clone(), self)
    }

    /// Every node of `Tₙ` lies in exactly one `φ(T)`, the backward level of
    /// every node of height `≥ 0` matches its forward first appearance, and
    /// the boundary blocks partition the attractor net.
    pub fn verify_partition(&self, n: usize) -> Result<Report> {
        let mut r = Report::new("partition");
        let sets = self.level_sets(n)?;
        let mut first: HashMap<&NodePath, usize> = HashMap::new();
        for (k, set) in sets.iter().enumerate() {
            for p in set {
                first.entry(p).or_insert(k);
            }
        }
        let nodes: Vec<&NodePath> = sets[n].iter().collect();
        let rows = par::try_map(self.exec, &nodes, |y| -> Result<(usize, Option<u32>)> {
            let mut hits = 0;
            for m in &self.maps {
                if m.preimage(y)?.is_some() {
                    hits += 1;
                }
            }
            Ok((hits, self.node_level(y)?))
        })?;
        for (y, (hits, level)) in nodes.iter().zip(rows) {
            r.check(hits == 1, y, || format!("node lies in {hits} map images"));
            if let Some(l) = level {
                let f = first[*y];
                r.check(l as usize == f, y, || format!("backward level {l}, forward level {f}"));
            }
        }
        r.merge(verify_boundary_partition(self, n)?);
        r.suite = "partition".into();
        Ok(r)
    }

    /// Follows the nested chain `root, φ(root), φ²(root), …` to the fixed
    /// branch of `φ`.
    pub fn fixed_point(&self, map: usize, tol: &BigRational) -> Result<FixedPoint> {
        if *tol <= BigRational::zero() {
            return Err(Error::NonPositiveTolerance);
        }
        let m = self.maps.get(map).ok_or(Error::NoSuchMap(map))?;
        let mut x = NodePath::root();
        let limit = 1usize << 16;
        for steps in 0..limit {
            let y = m.apply(&x)?;
            if y == x {
                return Ok(FixedPoint {
                    point: Branch::new(x),
                    exact: true,
                    steps,
                });
            }
            if self.tree.node_height(&y)? == ExtHeight::MinusOne {
                return Ok(FixedPoint {
                    point: Branch::new(y),
                    exact: true,
                    steps: steps + 1,
                });
            }
            if self.node_norm(&y)? < *tol {
                return Ok(FixedPoint {
                    point: Branch::new(y),
                    exact: false,
                    steps: steps + 1,
                });
            }
            x = y;
        }
        Err(Error::InexactFixedPoint(map))
    }

    pub fn branch_profile(&self, b: &Branch, piece: usize) -> Result<Profile> {
        let stem = b.stem();
        let mut scales = Vec::with_capacity(stem.len());
        for d in 1..=stem.len() {
            scales.push(match self.node_level(&stem[..d])? {
                Some(l) => Scale::Pow(l as i64),
                None => Scale::Zero,
            });
        }
        Ok(Profile {
            piece,
            stem: stem.clone(),
            scales,
        })
    }
}

impl FunctionSystem for IfsSystem {
    type Point = Branch;

    fn context(&self) -> u64 {
        self.context
    }

    fn lambda(&self) -> &BigRational {
        &self.lambda
    }

    fn map_count(&self) -> usize {
        self.maps.len()
    }

    fn map_label(&self, i: usize) -> String {
        self.labels[i].clone()
    }

    fn apply_map(&self, i: usize, p: &Branch) -> Result<Branch> {
        boundary_map(self.maps.get(i).ok_or(Error::NoSuchMap(i))?, p)
    }

    fn seed_points(&self) -> Vec<Branch> {
        vec![Branch::central()]
    }

    fn profile(&self, p: &Branch) -> Result<Profile> {
        self.branch_profile(p, 0)
    }

    fn caps(&self) -> &Caps {
        &self.caps
    }

    fn exec(&self) -> Exec {
        self.exec
    }
}

impl TreeNorm for IfsSystem {
    fn norm(&self, path: &[usize]) -> Result<BigRational> {
        self.node_norm(path)
    }

    fn support_at_least(&self, eps: &BigRational) -> Result<Option<Vec<NodePath>>> {
        if *eps <= BigRational::zero() {
            return Ok(None);
        }
        let Some(k) = max_exponent_at_least(&self.lambda, eps) else {
            return Ok(Some(Vec::new()));
        };
        let sets = self.level_sets(k as usize)?;
        let mut out = Vec::new();
        for p in &sets[k as usize] {
            if self.tree.node_height(p)? != ExtHeight::MinusOne {
                out.push(p.clone());
            }
        }
        Ok(Some(out))
    }
}
