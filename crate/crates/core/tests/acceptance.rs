//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Run with `cargo test -p ultrafractal --test acceptance`.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use ultrafractal::glued::build_ifs_general;
use ultrafractal::ifs::{
    attractor_nets, build_ifs_unital, distance, hausdorff_distance, verify_boundary_partition, verify_ultrametric,
    word_diameters, FunctionSystem, IfsSystem,
};
use ultrafractal::morphism::{build_surjective_morphism, lipschitz_check, verify_morphism_axioms};
use ultrafractal::ordinal::{ExtHeight, Ordinal, Term};
use ultrafractal::space::{Multiplicity, OrdinalSpace};
use ultrafractal::tree::{
    canonical_tree, lambda_pow, rational, verify_height_tree_axioms, verify_norm_axioms, Branch, ChildRule,
    NodePath, NormedHeightTree, PathSumNorm,
};
use ultrafractal::Error;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn half() -> BigRational {
    rational(1, 2)
}

fn h(s: &str) -> ExtHeight {
    s.parse().unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t <= limit, || format!("took {t:.2?}, limit {limit:?}"))
}

/// Catalog systems: canonical trees of non-limit height plus one tree with
/// exceptional root successors.
fn catalog() -> Vec<(String, IfsSystem)> {
    let mut out: Vec<(String, IfsSystem)> = ["0", "1", "2", "w+1", "inf"]
        .iter()
        .map(|s| (s.to_string(), build_ifs_unital(h(s), half()).unwrap()))
        .collect();
    let custom = canonical_tree(h("3")).unwrap().with_rule(
        NodePath::root(),
        ChildRule::Explicit {
            leading: vec![h("0"), h("2"), h("1")],
            rest: h("2"),
        },
    );
    out.push((
        "3 with E={[1],[3]}".into(),
        IfsSystem::from_tree(Arc::new(custom), half()).unwrap(),
    ));
    out
}

fn c1_classification() -> Outcome {
    let start = Instant::now();
    let catalog = ["5", "w", "w*2", "w^2", "w^2*3+w*2+5", "w^w", "w^(w+1)", "w^w*2", "cantor"];
    let expected = [true, true, true, true, true, false, true, false, true];
    for (lit, want) in catalog.iter().zip(expected) {
        let space: OrdinalSpace = lit.parse().map_err(|e| format!("{lit}: {e}"))?;
        let got = space.classify_fractal().map_err(|e| format!("{lit}: {e}"))?.is_fractal();
        ensure(got == want, || format!("{lit}: fractal={got}, expected {want}"))?;
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!("{} spaces", catalog.len()))
}

/// Derived-set oracle on order types `ω³a₃ + ω²a₂ + ωa₁ + a₀` kept as plain
/// coefficient arrays: the limit points of an ordinal `τ` have order type
/// `ω²a₃ + ωa₂ + a₁`.
fn oracle_height(gamma: [u64; 4]) -> (u64, u64) {
    // τ = γ + 1
    let mut tau = gamma;
    tau[3] += 1;
    let mut k = 0;
    loop {
        let next = [0, tau[0], tau[1], tau[2]];
        if next == [0; 4] {
            return (k, tau[3]);
        }
        tau = next;
        k += 1;
    }
}

fn ordinal_from(c: [u64; 4]) -> Ordinal {
    let terms = c
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0)
        .map(|(i, &m)| Term {
            exponent: Ordinal::finite(3 - i as u64),
            coefficient: m,
        })
        .collect();
    Ordinal::from_terms(terms).unwrap()
}

fn c2_cb_oracle() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for a3 in 0..=4 {
        for a2 in 0..=4 {
            for a1 in 0..=4 {
                for a0 in 0..=4 {
                    let c = [a3, a2, a1, a0];
                    let gamma = ordinal_from(c);
                    let x = OrdinalSpace::Interval(gamma.clone());
                    let (oh, om) = oracle_height(c);
                    let (height, mult) = x.scattered_height().map_err(|e| e.to_string())?;
                    ensure(height == ExtHeight::finite(oh) && mult == Multiplicity::Finite(om), || {
                        format!("[0,{gamma}]: closed form ({height}, {mult}), oracle ({oh}, {om})")
                    })?;
                    // iterated one-step derivatives against the closed form
                    let mut y = x.clone();
                    for _ in 0..oh {
                        y = y.derived_set().map_err(|e| e.to_string())?;
                    }
                    let top = match &y {
                        OrdinalSpace::Interval(t) => t.as_finite().map(|n| n + 1),
                        _ => None,
                    };
                    ensure(top == Some(om), || format!("[0,{gamma}]: iterated top stage {top:?}, oracle {om}"))?;
                    ensure(
                        y.derived_set().map_err(|e| e.to_string())? == OrdinalSpace::Empty,
                        || format!("[0,{gamma}]: stage {} not empty", oh + 1),
                    )?;
                    cases += 1;
                }
            }
        }
    }
    within(start, Duration::from_secs(5))?;
    Ok(format!("{cases} intervals"))
}

fn c3_axioms() -> Outcome {
    let start = Instant::now();
    let eps = lambda_pow(&half(), 3);
    let mut suites = 0;
    for lit in ["0", "1", "2", "w", "w+1", "w^2", "inf"] {
        let tree = Arc::new(canonical_tree(h(lit)).unwrap());
        let r = verify_height_tree_axioms(&tree, 4, 8);
        ensure(r.passed(), || format!("height {lit}: {r}"))?;
        suites += 1;
        let limit = matches!(lit, "w" | "w^2");
        if limit {
            let norm = PathSumNorm::new(tree.clone(), half()).map_err(|e| e.to_string())?;
            let r = verify_norm_axioms(&NormedHeightTree::new(tree.clone(), norm), &eps, 4, 8)
                .map_err(|e| e.to_string())?;
            ensure(r.passed(), || format!("height {lit}: {r}"))?;
            let lower: &[&str] = if lit == "w" { &["1", "2", "5"] } else { &["w", "w+1", "w*2+3"] };
            for low in lower {
                let dst = Arc::new(canonical_tree(h(low)).unwrap());
                let m = build_surjective_morphism(tree.clone(), NodePath::root(), dst, NodePath::root())
                    .map_err(|e| e.to_string())?;
                let r = verify_morphism_axioms(&m, 4, 8);
                ensure(r.passed(), || format!("{lit} onto {low}: {r}"))?;
            }
            suites += 1 + lower.len();
        } else {
            let s = build_ifs_unital(h(lit), half()).map_err(|e| e.to_string())?;
            let r = verify_norm_axioms(&s.normed(), &eps, 4, 8).map_err(|e| e.to_string())?;
            ensure(r.passed(), || format!("height {lit}: {r}"))?;
            for (label, m) in s.labels().iter().zip(s.maps()) {
                let r = verify_morphism_axioms(m, 4, 8);
                ensure(r.passed(), || format!("height {lit}, map {label}: {r}"))?;
            }
            suites += 1 + s.map_count();
        }
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!("{suites} suites"))
}

fn c4_contraction() -> Outcome {
    let start = Instant::now();
    let mut sharp = Vec::new();
    for lit in ["1", "2", "w+1", "inf"] {
        let s = build_ifs_unital(h(lit), half()).unwrap();
        let nets = attractor_nets(&s, 12).map_err(|e| e.to_string())?;
        let mut equal_at = None;
        for n in 0..12 {
            let d = hausdorff_distance(&s, &nets[n], &nets[12]).map_err(|e| e.to_string())?;
            let bound = lambda_pow(&half(), n as i64 + 1);
            ensure(d <= bound, || format!("height {lit}, n={n}: d_H = {d} > {bound}"))?;
            if d == bound && equal_at.is_none() {
                equal_at = Some(n);
            }
        }
        let n = equal_at.ok_or_else(|| format!("height {lit}: bound never attained"))?;
        sharp.push(format!("{lit}@{n}"));
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("sharp at {}", sharp.join(", ")))
}

fn c5_lipschitz() -> Outcome {
    let mut checks = 0;
    for (name, s) in catalog() {
        let levels = s.level_sets(10).map_err(|e| e.to_string())?;
        let nodes: Vec<NodePath> = levels[10].iter().cloned().collect();
        let net = attractor_nets(&s, 8).map_err(|e| e.to_string())?.pop().unwrap();
        let branches: Vec<Branch> = net.to_vec();
        let nt = s.normed();
        for (label, m) in s.labels().iter().zip(s.maps()) {
            let r = lipschitz_check(m, &nt, &nt, &half(), &nodes, &branches).map_err(|e| e.to_string())?;
            ensure(r.passed(), || format!("{name}, map {label}: {r}"))?;
            checks += r.checked;
        }
    }
    Ok(format!("{checks} exact inequalities"))
}

fn c6_partition() -> Outcome {
    let mut names = Vec::new();
    for (name, s) in catalog() {
        let r = s.verify_partition(8).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("{name}: {r}"))?;
        names.push(name);
    }
    let g = build_ifs_general(&"w*2".parse().unwrap(), half()).map_err(|e| e.to_string())?;
    let r = verify_boundary_partition(&g, 8).map_err(|e| e.to_string())?;
    ensure(r.passed(), || format!("glued w*2: {r}"))?;
    Ok(format!("{} systems plus glued [0,w*2]", names.len()))
}

fn c7_ultrametric() -> Outcome {
    let mut triples = 0;
    for (name, s) in catalog() {
        let net = attractor_nets(&s, 8).map_err(|e| e.to_string())?.pop().unwrap();
        let r = verify_ultrametric(&s, &net).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("{name}: {r}"))?;
        triples += net.len().pow(3);
    }
    let g = build_ifs_general(&"w*2".parse().unwrap(), half()).map_err(|e| e.to_string())?;
    let net = attractor_nets(&g, 8).map_err(|e| e.to_string())?.pop().unwrap();
    let r = verify_ultrametric(&g, &net).map_err(|e| e.to_string())?;
    ensure(r.passed(), || format!("glued: {r}"))?;
    let pts = net.to_vec();
    let mut cross = 0;
    for a in &pts {
        for b in pts.iter().filter(|b| b.piece != a.piece) {
            let d = distance(&g, a, b).map_err(|e| e.to_string())?;
            ensure(d == rational(2, 1), || format!("cross distance {a} / {b} is {d}"))?;
            cross += 1;
        }
    }
    ensure(cross > 0, || "glued net has a single piece".into())?;
    Ok(format!("{triples} triples, {cross} cross-piece pairs at distance 2"))
}

fn c8_words() -> Outcome {
    let s = build_ifs_unital(h("2"), half()).unwrap();
    let mut worst = Vec::new();
    for n in 0..=10 {
        let d = word_diameters(&s, n, 10).map_err(|e| e.to_string())?;
        let bound = lambda_pow(&half(), n as i64);
        ensure(d <= bound, || format!("n={n}: {d} > {bound}"))?;
        worst.push(d.to_string());
    }
    Ok(format!("diameters {}", worst.join(" ")))
}

fn c9_fixed_points() -> Outcome {
    let s = build_ifs_unital(h("1"), half()).unwrap();
    let tol = lambda_pow(&half(), 30);
    let f = s.fixed_point(0, &tol).map_err(|e| e.to_string())?;
    let g = s.fixed_point(1, &tol).map_err(|e| e.to_string())?;
    ensure(f.exact && f.point == Branch::central(), || format!("Fix(f) = {:?}", f))?;
    ensure(g.exact && g.point == Branch::new(vec![1]), || format!("Fix(g) = {:?}", g))?;
    let seeds = [Branch::central(), Branch::new(vec![3]), Branch::new(vec![7])];
    let target = lambda_pow(&half(), 10);
    for (i, fix) in [(0, &f.point), (1, &g.point)] {
        for seed in &seeds {
            let d0 = distance(&s, seed, fix).map_err(|e| e.to_string())?;
            let mut x = seed.clone();
            for n in 1..=10 {
                x = s.apply_map(i, &x).map_err(|e| e.to_string())?;
                let d = distance(&s, &x, fix).map_err(|e| e.to_string())?;
                let bound = lambda_pow(&half(), n) * &d0;
                ensure(d <= bound, || format!("map {i}, seed {seed}, step {n}: {d} > {bound}"))?;
            }
            let d = distance(&s, &x, fix).map_err(|e| e.to_string())?;
            ensure(d < target, || format!("map {i}, seed {seed}: {d} after 10 steps"))?;
        }
    }
    Ok("Fix(f) = central, Fix(g) = branch[1], 3 seeds".into())
}

fn c10_refusal() -> Outcome {
    let mut refused = BTreeSet::new();
    for lit in ["w", "w^2", "w*2", "w^w", "w^(w+1)", "w^w*2+w"] {
        match build_ifs_unital(h(lit), half()) {
            Err(Error::NotSuccessor(_)) => {
                refused.insert(format!("height {lit}"));
            }
            other => return Err(format!("unital height {lit}: {other:?}")),
        }
    }
    for lit in ["w^w", "w^w*2", "w^(w*2)+5"] {
        match build_ifs_general(&lit.parse().unwrap(), half()) {
            Err(Error::NotSuccessor(_)) => {
                refused.insert(format!("space [0,{lit}]"));
            }
            other => return Err(format!("space [0,{lit}]: {:?}", other.map(|g| g.map_count()))),
        }
    }
    Ok(format!("{} limit-height inputs refused", refused.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("classification table", c1_classification),
        ("Cantor-Bendixson oracle equivalence", c2_cb_oracle),
        ("axiom suites on canonical trees", c3_axioms),
        ("exact contraction of attractor nets", c4_contraction),
        ("Lipschitz exactness", c5_lipschitz),
        ("partition", c6_partition),
        ("ultrametric", c7_ultrametric),
        ("topological contraction of words", c8_words),
        ("fixed points", c9_fixed_points),
        ("limit heights refused", c10_refusal),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{t:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{t:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
