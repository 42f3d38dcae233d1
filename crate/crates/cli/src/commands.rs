use std::fmt::Write as _;
use std::sync::Arc;

use num_rational::BigRational;
use serde_json::{json, Value};
use ultrafractal::export::{level_set_dot, tree_dot, tree_export, RunReport, SuiteVerdict};
use ultrafractal::glued::{build_ifs_general, GluedIfs, GluedPoint};
use ultrafractal::ifs::{
    attractor_net, attractor_nets, build_ifs_unital, diameter, distance, hausdorff_distance, verify_boundary_lipschitz,
    verify_boundary_partition, verify_ultrametric, word_diameters, FixedPoint, FunctionSystem, IfsSystem,
};
use ultrafractal::metric::PointSet;
use ultrafractal::morphism::{build_surjective_morphism, lipschitz_check, verify_morphism_axioms};
use ultrafractal::ordinal::{ExtHeight, HeightKind};
use ultrafractal::par::Exec;
use ultrafractal::report::Report;
use ultrafractal::space::{verdict_for_height, Multiplicity};
use ultrafractal::tree::{
    canonical_tree, lambda_pow, verify_height_tree_axioms, verify_norm_axioms, Branch, HeightTree, NodePath,
    NormedHeightTree, PathSumNorm, TreeNorm,
};
use ultrafractal::Error;

use crate::{CapArgs, ClassifyArgs, Format, IfsArgs, IterateArgs, SourceArgs, Suite, TreeArgs, VerifyArgs};

pub struct Output {
    pub text: String,
    pub code: u8,
}

pub enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<Output, Failure>;

fn ok(text: String) -> Outcome {
    Ok(Output { text, code: 0 })
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn reject_format(cmd: &str, format: Format, allowed: &[Format]) -> Result<(), Failure> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{cmd} does not support --format {format:?}").to_lowercase()))
    }
}

/// Pieces are listed only for spaces with this many or fewer.
const LISTED_PIECES: u64 = 16;

pub fn classify(a: &ClassifyArgs) -> Outcome {
    reject_format("classify", a.format, &[Format::Text, Format::Json])?;
    let (height, mult) = a.space.scattered_height()?;
    let verdict = verdict_for_height(&height);
    let unital = a.space.is_unital()?;
    let piece_count = match mult {
        Multiplicity::Finite(n) => Some(n),
        Multiplicity::Infinite => None,
    };
    let pieces: Option<Vec<String>> = match piece_count {
        Some(n) if n <= LISTED_PIECES => Some(a.space.unital_decomposition()?.iter().map(|p| p.to_string()).collect()),
        _ => None,
    };
    if a.format == Format::Json {
        let mut v = json!({
            "space": a.space.to_string(),
            "verdict": verdict.to_string(),
            "fractal": verdict.is_fractal(),
            "height": height.to_string(),
            "height_kind": height.kind().to_string(),
            "multiplicity": mult.to_string(),
            "unital": unital,
            "piece_count": piece_count.map_or_else(|| "inf".to_string(), |n| n.to_string()),
        });
        if let Some(p) = &pieces {
            v["pieces"] = json!(p);
        }
        return ok(pretty(&v));
    }
    let mut out = format!("{verdict} (height {height}, {})\n", height.kind());
    let _ = writeln!(out, "space:        {}", a.space);
    let _ = writeln!(out, "multiplicity: {mult}");
    let _ = writeln!(out, "unital:       {}", if unital { "yes" } else { "no" });
    match (&pieces, piece_count) {
        (Some(p), _) => {
            let _ = writeln!(out, "pieces:       {}", p.join(" "));
        }
        (None, Some(n)) => {
            let _ = writeln!(out, "pieces:       {n} copies of a unital space");
        }
        (None, None) => {
            let _ = writeln!(out, "pieces:       infinitely many");
        }
    }
    ok(out)
}

fn exec(caps: &CapArgs) -> Exec {
    if caps.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    }
}

fn unital_system(h: ExtHeight, lambda: &BigRational, caps: &CapArgs) -> Result<IfsSystem, Error> {
    Ok(build_ifs_unital(h, lambda.clone())?.with_caps(caps.caps()).with_exec(exec(caps)))
}

pub fn tree(a: &TreeArgs) -> Outcome {
    let tree = Arc::new(canonical_tree(a.height.clone())?);
    let (depth, breadth) = (a.depth as usize, a.breadth as usize);
    let limit = a.height.kind() == HeightKind::Limit;
    let system;
    let path_norm;
    let norm: Option<&dyn TreeNorm> = match (a.norm, limit) {
        (false, _) => None,
        (true, true) => {
            path_norm = PathSumNorm::new(tree.clone(), a.lambda.clone())?;
            Some(&path_norm)
        }
        (true, false) => {
            system = unital_system(a.height.clone(), &a.lambda, &a.caps)?;
            Some(&system)
        }
    };
    let text = match a.format {
        Format::Dot => tree_dot(&tree, norm, depth, breadth)?,
        Format::Json => pretty(&tree_export(&tree, norm, depth, breadth)?),
        Format::Text => {
            let ex = tree_export(&tree, norm, depth, breadth)?;
            let mut out = String::new();
            for n in &ex.nodes {
                let indent = "  ".repeat(n.path.0.len());
                let _ = write!(out, "{indent}{}  h={}", n.path, n.height);
                if let Some(v) = &n.norm {
                    let _ = write!(out, "  norm={v}");
                }
                out.push('\n');
            }
            out
        }
    };
    ok(text)
}

enum System {
    Tree(IfsSystem),
    Glued(GluedIfs),
}

/// What a `--height`/`--space` pair resolves to.
struct Resolved {
    label: String,
    height: ExtHeight,
    system: Option<System>,
}

fn resolve(src: &SourceArgs, lambda: &BigRational, caps: &CapArgs, need_system: bool) -> Result<Resolved, Failure> {
    if let Some(h) = &src.height {
        let system = if h.kind() == HeightKind::Limit {
            if need_system {
                return Err(Error::NotSuccessor(h.clone()).into());
            }
            None
        } else {
            Some(System::Tree(unital_system(h.clone(), lambda, caps)?))
        };
        return Ok(Resolved {
            label: format!("height {h}"),
            height: h.clone(),
            system,
        });
    }
    let x = src.space.as_ref().expect("clap requires --height or --space");
    let (height, _) = x.scattered_height()?;
    let system = if height.kind() == HeightKind::Limit && !need_system {
        None
    } else {
        let g = build_ifs_general(x, lambda.clone())?
            .with_caps(caps.caps())
            .with_exec(exec(caps));
        Some(System::Glued(g))
    };
    Ok(Resolved {
        label: format!("space {x}"),
        height,
        system,
    })
}

fn hutchinson_table<S: FunctionSystem>(s: &S, n: usize) -> Result<(Vec<usize>, Vec<BigRational>), Error> {
    let nets = attractor_nets(s, n)?;
    let sizes = nets.iter().map(PointSet::len).collect();
    let mut dists = Vec::with_capacity(n);
    for k in 0..n {
        dists.push(hausdorff_distance(s, &nets[k], &nets[k + 1])?);
    }
    Ok((sizes, dists))
}

fn net_verdicts<S: FunctionSystem>(s: &S, level: usize) -> Result<Vec<Report>, Error> {
    let net = attractor_net(s, level)?;
    Ok(vec![ultrametric(s, level)?, verify_boundary_lipschitz(s, &net)?])
}

pub fn ifs(a: &IfsArgs) -> Outcome {
    let r = resolve(&a.source, &a.lambda, &a.caps, true)?;
    let n = a.iterate as usize;
    let level = (a.verdict_level as usize).min(n);
    let (labels, level_sizes, (sizes, dists), reports) = match r.system.as_ref().expect("system requested") {
        System::Tree(s) => {
            if a.format == Format::Dot {
                return ok(level_set_dot(s, n)?);
            }
            let levels = s.level_sets(n)?;
            let mut reports = vec![s.verify_partition(level)?];
            reports.extend(net_verdicts(s, level)?);
            (
                s.labels().to_vec(),
                levels.iter().map(|l| l.len()).collect(),
                hutchinson_table(s, n)?,
                reports,
            )
        }
        System::Glued(g) => {
            if a.format == Format::Dot {
                return Err(Failure::Usage("dot output needs a single tree; use --height".into()));
            }
            let mut reports = vec![verify_boundary_partition(g, level)?];
            reports.extend(net_verdicts(g, level)?);
            let labels = (0..g.map_count()).map(|i| g.map_label(i)).collect();
            (labels, Vec::new(), hutchinson_table(g, n)?, reports)
        }
    };
    let code = if reports.iter().all(Report::passed) { 0 } else { 1 };
    let run = RunReport {
        space: r.label.clone(),
        lambda: a.lambda.to_string(),
        n,
        maps: labels,
        level_sizes,
        net_sizes: sizes,
        hausdorff: dists.iter().map(ToString::to_string).collect(),
        verdicts: reports.iter().map(SuiteVerdict::from).collect(),
    };
    if a.format == Format::Json {
        return Ok(Output { text: pretty(&run), code });
    }
    let mut out = String::new();
    let _ = writeln!(out, "system: {}, lambda {}", run.space, run.lambda);
    let _ = writeln!(out, "maps:   {}", run.maps.join(" "));
    let with_levels = !run.level_sizes.is_empty();
    let _ = writeln!(
        out,
        "{:>4} {:>9}{} {:>14} {:>8}",
        "k",
        "|K_k|",
        if with_levels { format!(" {:>9}", "|T_k|") } else { String::new() },
        "d(K_k,K_k+1)",
        "ratio"
    );
    for k in 0..=n {
        let lv = if with_levels { format!(" {:>9}", run.level_sizes[k]) } else { String::new() };
        let d = dists.get(k).map_or("-".to_string(), ToString::to_string);
        let ratio = match (k.checked_sub(1).and_then(|j| dists.get(j)), dists.get(k)) {
            (Some(prev), Some(cur)) if *prev != BigRational::from_integer(0.into()) => (cur / prev).to_string(),
            _ => "-".to_string(),
        };
        let _ = writeln!(out, "{k:>4} {:>9}{lv} {d:>14} {ratio:>8}", run.net_sizes[k]);
    }
    let _ = writeln!(out, "verdicts at level {level}:");
    for rep in &reports {
        let _ = writeln!(
            out,
            "  {} {:<22} {} checks",
            if rep.passed() { "PASS" } else { "FAIL" },
            rep.suite,
            rep.checked
        );
        for f in &rep.failures {
            let _ = writeln!(out, "       at {}: {}", f.location, f.message);
        }
    }
    Ok(Output { text: out, code })
}

/// Ultrametric checks are cubic in the net size; larger nets are refused.
const TRIPLE_POINTS: usize = 600;

enum Verdict {
    Ran(Report),
    Skipped(String),
}

fn words<S: FunctionSystem>(s: &S, levels: usize) -> Result<Report, Error> {
    let mut r = Report::new("word diameters");
    // a word of length n is λⁿ-Lipschitz, so it shrinks the net by λⁿ
    let whole = diameter(s, &attractor_net(s, levels)?)?;
    for n in 0..=levels {
        let d = word_diameters(s, n, levels)?;
        let bound = lambda_pow(s.lambda(), n as i64) * &whole;
        r.check(d <= bound, format!("n={n}"), || format!("diameter {d} exceeds {bound}"));
    }
    Ok(r)
}

fn ultrametric<S: FunctionSystem>(s: &S, levels: usize) -> Result<Report, Error> {
    let net = attractor_net(s, levels)?;
    if net.len() > TRIPLE_POINTS {
        return Err(Error::SizeCapExceeded(TRIPLE_POINTS));
    }
    verify_ultrametric(s, &net)
}

fn tree_lipschitz(s: &IfsSystem, levels: usize) -> Result<Report, Error> {
    let sets = s.level_sets(levels)?;
    let nodes: Vec<NodePath> = sets[levels].iter().cloned().collect();
    let branches = attractor_net(s, levels)?.to_vec();
    let nt = s.normed();
    let mut r = Report::new("lipschitz");
    for (label, m) in s.labels().iter().zip(s.maps()) {
        let mut one = lipschitz_check(m, &nt, &nt, s.lambda(), &nodes, &branches)?;
        for f in &mut one.failures {
            f.location = format!("{label} {}", f.location);
        }
        r.merge(one);
    }
    r.merge(verify_boundary_lipschitz(s, &attractor_net(s, levels)?)?);
    r.suite = "lipschitz".into();
    Ok(r)
}

fn structural(
    suite: Suite,
    height: &ExtHeight,
    unit: Option<&IfsSystem>,
    a: &VerifyArgs,
) -> Result<Report, Error> {
    let (depth, breadth) = (a.depth as usize, a.breadth as usize);
    let tree = match unit {
        Some(s) => s.tree().clone(),
        None => Arc::new(canonical_tree(height.clone())?),
    };
    match suite {
        Suite::Tree => Ok(verify_height_tree_axioms(&tree, depth, breadth)),
        Suite::Norm => {
            let eps = lambda_pow(&a.lambda, 3);
            match unit {
                Some(s) => verify_norm_axioms(&s.normed(), &eps, depth, breadth),
                None => {
                    let norm = PathSumNorm::new(tree.clone(), a.lambda.clone())?;
                    verify_norm_axioms(&NormedHeightTree::new(tree, norm), &eps, depth, breadth)
                }
            }
        }
        Suite::Morphism => {
            let mut r = Report::new("morphism axioms");
            match unit {
                Some(s) => {
                    for (label, m) in s.labels().iter().zip(s.maps()) {
                        let mut one = verify_morphism_axioms(m, depth, breadth);
                        one.notes.push(format!("map {label}"));
                        r.merge(one);
                    }
                }
                None => {
                    // no system on a limit height; check surjections onto
                    // the first few terms of its fundamental sequence
                    let root = height.as_ordinal().expect("limit heights are ordinals");
                    for k in 1..=3 {
                        let low = ExtHeight::Ord(root.fundamental(k)?);
                        let dst = Arc::new(canonical_tree(low.clone())?);
                        let m = build_surjective_morphism(tree.clone(), NodePath::root(), dst, NodePath::root())?;
                        let mut one = verify_morphism_axioms(&m, depth, breadth);
                        one.notes.push(format!("onto height {low}"));
                        r.merge(one);
                    }
                }
            }
            Ok(r)
        }
        _ => unreachable!("only structural suites reach here"),
    }
}

fn run_suite(suite: Suite, r: &Resolved, a: &VerifyArgs) -> Result<Verdict, Error> {
    let levels = a.levels as usize;
    let unit = match &r.system {
        Some(System::Tree(s)) => Some(s),
        Some(System::Glued(g)) => Some(&g.pieces()[0].1),
        None => None,
    };
    let rep = match (suite, &r.system) {
        (Suite::Tree | Suite::Norm | Suite::Morphism, _) => structural(suite, &r.height, unit, a)?,
        (_, None) => {
            return Ok(Verdict::Skipped(format!("height {} is a limit; no contracting system", r.height)))
        }
        (Suite::Ultrametric, Some(System::Tree(s))) => ultrametric(s, levels)?,
        (Suite::Ultrametric, Some(System::Glued(g))) => ultrametric(g, levels)?,
        (Suite::Lipschitz, Some(System::Tree(s))) => tree_lipschitz(s, levels)?,
        (Suite::Lipschitz, Some(System::Glued(g))) => verify_boundary_lipschitz(g, &attractor_net(g, levels)?)?,
        (Suite::Partition, Some(System::Tree(s))) => s.verify_partition(levels)?,
        (Suite::Partition, Some(System::Glued(g))) => verify_boundary_partition(g, levels)?,
        (Suite::Words, Some(System::Tree(s))) => words(s, levels)?,
        (Suite::Words, Some(System::Glued(g))) => words(g, levels)?,
        (Suite::All, _) => unreachable!("expanded before dispatch"),
    };
    Ok(Verdict::Ran(rep))
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::All => "all",
        Suite::Tree => "tree",
        Suite::Norm => "norm",
        Suite::Morphism => "morphism",
        Suite::Ultrametric => "ultrametric",
        Suite::Lipschitz => "lipschitz",
        Suite::Partition => "partition",
        Suite::Words => "words",
    }
}

const ALL_SUITES: [Suite; 7] = [
    Suite::Tree,
    Suite::Norm,
    Suite::Morphism,
    Suite::Ultrametric,
    Suite::Lipschitz,
    Suite::Partition,
    Suite::Words,
];

pub fn verify(a: &VerifyArgs) -> Outcome {
    reject_format("verify", a.format, &[Format::Text, Format::Json])?;
    let r = resolve(&a.source, &a.lambda, &a.caps, false)?;
    let mut suites: Vec<Suite> = if a.suite.contains(&Suite::All) {
        ALL_SUITES.to_vec()
    } else {
        a.suite.clone()
    };
    suites.sort();
    suites.dedup();
    let mut rows = Vec::new();
    for s in suites {
        rows.push((suite_name(s), run_suite(s, &r, a)?));
    }
    let failed = rows.iter().any(|(_, v)| matches!(v, Verdict::Ran(rep) if !rep.passed()));
    let code = u8::from(failed);
    if a.format == Format::Json {
        let suites: Vec<Value> = rows
            .iter()
            .map(|(name, v)| match v {
                Verdict::Ran(rep) => json!({
                    "suite": name,
                    "status": if rep.passed() { "pass" } else { "fail" },
                    "checks": rep.checked,
                    "failures": rep.failure_count,
                    "details": rep.failures,
                    "notes": rep.notes,
                }),
                Verdict::Skipped(why) => json!({
                    "suite": name,
                    "status": "skip",
                    "checks": 0,
                    "failures": 0,
                    "details": [],
                    "notes": [why],
                }),
            })
            .collect();
        let v = json!({
            "source": r.label,
            "lambda": a.lambda.to_string(),
            "levels": a.levels,
            "passed": !failed,
            "suites": suites,
        });
        return Ok(Output { text: pretty(&v), code });
    }
    let mut out = format!("{}, lambda {}, levels {}\n", r.label, a.lambda, a.levels);
    let _ = writeln!(out, "{:<12} {:<6} {:>9} {:>9}", "suite", "result", "checks", "failures");
    for (name, v) in &rows {
        match v {
            Verdict::Ran(rep) => {
                let res = if rep.passed() { "PASS" } else { "FAIL" };
                let _ = writeln!(out, "{name:<12} {res:<6} {:>9} {:>9}", rep.checked, rep.failure_count);
            }
            Verdict::Skipped(why) => {
                let _ = writeln!(out, "{name:<12} {:<6} {:>9} {:>9}  {why}", "SKIP", "-", "-");
            }
        }
    }
    for (name, v) in &rows {
        if let Verdict::Ran(rep) = v {
            for f in &rep.failures {
                let _ = writeln!(out, "{name}: at {}: {}", f.location, f.message);
            }
        }
    }
    let _ = writeln!(out, "{}", if failed { "FAIL" } else { "PASS" });
    Ok(Output { text: out, code })
}

/// Something `iterate` can run on: a system plus a way to read seeds and
/// fixed points in its own point type.
trait Orbits: FunctionSystem {
    fn parse_seed(&self, s: &str) -> Result<Self::Point, Failure>;
    fn fixed(&self, map: usize, tol: &BigRational) -> Result<FixedPoint<Self::Point>, Error>;
}

fn addressable(tree: &HeightTree, text: &str) -> Result<Branch, Failure> {
    let path: NodePath = text.trim().parse().map_err(|e: Error| Failure::Usage(format!("seed `{text}`: {e}")))?;
    tree.node_height(&path)?;
    Ok(Branch::new(path))
}

impl Orbits for IfsSystem {
    fn parse_seed(&self, s: &str) -> Result<Branch, Failure> {
        addressable(self.tree(), s)
    }

    fn fixed(&self, map: usize, tol: &BigRational) -> Result<FixedPoint, Error> {
        self.fixed_point(map, tol)
    }
}

impl Orbits for GluedIfs {
    fn parse_seed(&self, s: &str) -> Result<GluedPoint, Failure> {
        let (piece, stem) = match s.split_once(':') {
            Some((p, rest)) => {
                let p: usize = p
                    .trim()
                    .parse()
                    .map_err(|_| Failure::Usage(format!("seed `{s}`: bad piece index")))?;
                (p, rest)
            }
            None => (0, s),
        };
        let (_, sys) = self
            .pieces()
            .get(piece)
            .ok_or_else(|| Failure::Usage(format!("seed `{s}`: no piece {piece}")))?;
        Ok(GluedPoint {
            piece,
            branch: addressable(sys.tree(), stem)?,
        })
    }

    fn fixed(&self, map: usize, tol: &BigRational) -> Result<FixedPoint<GluedPoint>, Error> {
        self.fixed_point(map, tol)
    }
}

/// Default seeds when none are given.
const DEFAULT_SEEDS: usize = 4;

fn orbits<S: Orbits>(s: &S, a: &IterateArgs, label: &str) -> Outcome {
    let maps: Vec<usize> = match a.map {
        Some(i) if i >= s.map_count() => return Err(Error::NoSuchMap(i).into()),
        Some(i) => vec![i],
        None => (0..s.map_count()).collect(),
    };
    let seeds: Vec<S::Point> = if a.seeds.is_empty() {
        attractor_net(s, 2)?.iter().take(DEFAULT_SEEDS).cloned().collect()
    } else {
        a.seeds.iter().map(|t| s.parse_seed(t)).collect::<Result<_, _>>()?
    };
    let steps = a.steps as usize;
    let mut failed = false;
    let mut records = Vec::new();
    let mut out = format!("{label}, lambda {}, tol {}\n", s.lambda(), a.tol);
    for &i in &maps {
        let fp = s.fixed(i, &a.tol)?;
        let _ = writeln!(
            out,
            "{}: fixed point {} ({}, {} steps)",
            s.map_label(i),
            fp.point,
            if fp.exact { "exact" } else { "approximate" },
            fp.steps
        );
        let mut orbit_records = Vec::new();
        for seed in &seeds {
            let mut x = seed.clone();
            let d0 = distance(s, &x, &fp.point)?;
            let mut ds = vec![d0.clone()];
            for k in 1..=steps {
                x = s.apply_map(i, &x)?;
                let d = distance(s, &x, &fp.point)?;
                // d(φᵏx, p) ≤ λᵏ·d(x, p); an approximate p is off by less than tol
                let mut bound = lambda_pow(s.lambda(), k as i64) * &d0;
                if !fp.exact && bound < a.tol {
                    bound = a.tol.clone();
                }
                if d > bound {
                    failed = true;
                    let _ = writeln!(out, "  FAIL seed {seed} step {k}: {d} > {bound}");
                }
                ds.push(d);
            }
            let shown: Vec<String> = ds.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "  seed {seed}: {}", shown.join(" "));
            orbit_records.push(json!({"seed": seed.to_string(), "distances": shown}));
        }
        records.push(json!({
            "map": s.map_label(i),
            "index": i,
            "fixed_point": fp.point.to_string(),
            "exact": fp.exact,
            "steps": fp.steps,
            "orbits": orbit_records,
        }));
    }
    let code = u8::from(failed);
    if a.format == Format::Json {
        let v = json!({
            "source": label,
            "lambda": s.lambda().to_string(),
            "tol": a.tol.to_string(),
            "passed": !failed,
            "maps": records,
        });
        return Ok(Output { text: pretty(&v), code });
    }
    Ok(Output { text: out, code })
}

pub fn iterate(a: &IterateArgs) -> Outcome {
    reject_format("iterate", a.format, &[Format::Text, Format::Json])?;
    let r = resolve(&a.source, &a.lambda, &a.caps, true)?;
    match r.system.as_ref().expect("system requested") {
        System::Tree(s) => orbits(s, a, &r.label),
        System::Glued(g) => orbits(g, a, &r.label),
    }
}
