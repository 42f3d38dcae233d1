use std::cmp::Ordering;
use std::sync::Arc;

use num_rational::BigRational;
use proptest::prelude::*;
use ultrafractal::ifs::{
    attractor_net, build_ifs_unital, hausdorff_scale, hutchinson_step, verify_boundary_lipschitz, verify_ultrametric,
    FunctionSystem,
};
use ultrafractal::metric::Scale;
use ultrafractal::morphism::{build_surjective_morphism, verify_morphism_axioms, Composed};
use ultrafractal::ordinal::{ExtHeight, HeightKind, Ordinal, Term};
use ultrafractal::space::OrdinalSpace;
use ultrafractal::tree::{canonical_tree, rational, Branch, NodePath};

const EXP: usize = 4;

/// Ordinals below `ω^4` as coefficient arrays, highest exponent first.
fn coeffs() -> impl Strategy<Value = [u64; EXP]> {
    prop::array::uniform4(0u64..5)
}

fn from_coeffs(c: [u64; EXP]) -> Ordinal {
    let terms = c
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0)
        .map(|(i, &m)| Term {
            exponent: Ordinal::finite((EXP - 1 - i) as u64),
            coefficient: m,
        })
        .collect();
    Ordinal::from_terms(terms).unwrap()
}

fn build(mut parts: Vec<(Ordinal, u64)>) -> Ordinal {
    parts.sort_by(|a, b| b.0.cmp(&a.0));
    let mut terms: Vec<Term> = Vec::new();
    for (e, c) in parts {
        match terms.last_mut() {
            Some(t) if t.exponent == e => t.coefficient += c,
            _ => terms.push(Term {
                exponent: e,
                coefficient: c,
            }),
        }
    }
    Ordinal::from_terms(terms).unwrap()
}

/// Ordinals below `ω^(ω^4)`, with exponents that are themselves infinite.
fn ordinal() -> impl Strategy<Value = Ordinal> {
    prop::collection::vec((coeffs().prop_map(from_coeffs), 1u64..5), 0..4).prop_map(build)
}

fn limit_ordinal() -> impl Strategy<Value = Ordinal> {
    ordinal().prop_filter("limit", |o| o.kind() == HeightKind::Limit)
}

fn lex(a: [u64; EXP], b: [u64; EXP]) -> Ordering {
    a.cmp(&b)
}

fn add_coeffs(a: [u64; EXP], b: [u64; EXP]) -> [u64; EXP] {
    match b.iter().position(|&c| c > 0) {
        None => a,
        Some(top) => {
            let mut out = [0; EXP];
            out[..top].copy_from_slice(&a[..top]);
            out[top] = a[top] + b[top];
            out[top + 1..].copy_from_slice(&b[top + 1..]);
            out
        }
    }
}

proptest! {
    #[test]
    fn print_parse_round_trip(o in ordinal()) {
        let back: Ordinal = o.to_string().parse().unwrap();
        prop_assert_eq!(back, o);
    }

    #[test]
    fn order_matches_lexicographic_oracle(a in coeffs(), b in coeffs()) {
        prop_assert_eq!(from_coeffs(a).cmp(&from_coeffs(b)), lex(a, b));
    }

    #[test]
    fn addition_matches_oracle(a in coeffs(), b in coeffs()) {
        prop_assert_eq!(from_coeffs(a).add(&from_coeffs(b)).unwrap(), from_coeffs(add_coeffs(a, b)));
    }

    #[test]
    fn addition_is_associative_and_monotone(a in ordinal(), b in ordinal(), c in ordinal()) {
        let ab_c = a.add(&b).unwrap().add(&c).unwrap();
        let a_bc = a.add(&b.add(&c).unwrap()).unwrap();
        prop_assert_eq!(&ab_c, &a_bc);
        prop_assert!(a.add(&b).unwrap() >= a);
    }

    #[test]
    fn left_subtraction_inverts_addition(a in ordinal(), b in ordinal()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let x = hi.left_sub(&lo).unwrap();
        prop_assert_eq!(lo.add(&x).unwrap(), hi);
    }

    #[test]
    fn fundamental_sequences_increase_below_the_limit(l in limit_ordinal(), n in 1u64..8) {
        let a = l.fundamental(n).unwrap();
        let b = l.fundamental(n + 1).unwrap();
        prop_assert!(a < b);
        prop_assert!(b < l);
    }

    #[test]
    fn fundamental_sequences_are_cofinal(l in limit_ordinal(), beta in ordinal()) {
        prop_assume!(beta < l);
        // β < λ[n] for some n; the sequence grows by at least one unit of
        // β's leading coefficient per step, so 64 terms suffice here
        prop_assert!((1..=64).any(|n| l.fundamental(n).unwrap() > beta));
    }

    #[test]
    fn minus_one_undoes_plus_one(o in ordinal()) {
        let h = ExtHeight::Ord(o.clone());
        prop_assert_eq!(h.plus_one().unwrap().minus_one().unwrap(), h.clone());
        if o.kind() != HeightKind::Successor {
            prop_assert_eq!(h.minus_one().unwrap(), h);
        }
    }

    #[test]
    fn derived_sets_never_grow(g in ordinal()) {
        let x = OrdinalSpace::Interval(g);
        let y = x.derived_set().unwrap();
        let tx = x.order_type().unwrap().unwrap();
        let ty = y.order_type().unwrap().unwrap();
        prop_assert!(ty <= tx);
        if let OrdinalSpace::Interval(t) = &x {
            if t.is_finite() {
                prop_assert_eq!(y, OrdinalSpace::Empty);
            }
        }
    }

    #[test]
    fn decomposition_reassembles(g in ordinal()) {
        let x = OrdinalSpace::Interval(g);
        let (height, _) = x.scattered_height().unwrap();
        let pieces = x.unital_decomposition().unwrap();
        let mut total = Ordinal::zero();
        for p in &pieces {
            prop_assert!(p.is_unital().unwrap());
            prop_assert_eq!(&p.scattered_height().unwrap().0, &height);
            total = total.add(&p.order_type().unwrap().unwrap()).unwrap();
        }
        prop_assert_eq!(Some(total), x.order_type().unwrap());
    }
}

const HEIGHTS: [&str; 9] = ["0", "1", "2", "3", "w", "w+1", "w+2", "w*2", "w^2"];

fn height_pair() -> impl Strategy<Value = (usize, usize)> {
    (0..HEIGHTS.len(), 0..HEIGHTS.len()).prop_map(|(a, b)| (a.max(b), a.min(b)))
}

fn tree(i: usize) -> Arc<ultrafractal::tree::HeightTree> {
    Arc::new(canonical_tree(HEIGHTS[i].parse().unwrap()).unwrap())
}

const SYSTEMS: [&str; 5] = ["1", "2", "w+1", "w^2+1", "inf"];

/// Longest addressable prefix of a branch.
fn addressable(t: &ultrafractal::tree::HeightTree, b: &Branch) -> Branch {
    let stem = b.stem();
    let len = (0..=stem.len()).rev().find(|&k| t.node_height(&stem[..k]).is_ok()).unwrap_or(0);
    Branch::new(NodePath(stem[..len].to_vec()))
}

fn branch() -> impl Strategy<Value = Branch> {
    prop::collection::vec(1usize..4, 0..4).prop_map(|v| Branch::new(NodePath(v)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn surjections_satisfy_the_axioms((hi, lo) in height_pair()) {
        let m = build_surjective_morphism(tree(hi), NodePath::root(), tree(lo), NodePath::root()).unwrap();
        let r = verify_morphism_axioms(&m, 3, 5);
        prop_assert!(r.passed(), "{} onto {}: {}", HEIGHTS[hi], HEIGHTS[lo], r);
    }

    #[test]
    fn compositions_are_morphisms(a in 0..HEIGHTS.len(), b in 0..HEIGHTS.len(), c in 0..HEIGHTS.len()) {
        let mut v = [a, b, c];
        v.sort_unstable_by(|x, y| y.cmp(x));
        let first = build_surjective_morphism(tree(v[0]), NodePath::root(), tree(v[1]), NodePath::root()).unwrap();
        let second = build_surjective_morphism(tree(v[1]), NodePath::root(), tree(v[2]), NodePath::root()).unwrap();
        let both = Composed::new(&first, &second).unwrap();
        prop_assert!(verify_morphism_axioms(&both, 3, 4).passed());
    }

    #[test]
    fn nets_are_ultrametric_and_maps_contract(i in 0..SYSTEMS.len(), n in 0usize..6, keep in prop::collection::vec(any::<bool>(), 64)) {
        let s = build_ifs_unital(SYSTEMS[i].parse().unwrap(), rational(1, 3)).unwrap();
        let net = attractor_net(&s, n).unwrap();
        let chosen: Vec<Branch> = net.iter().zip(keep.iter().cycle()).filter(|(_, &k)| k).map(|(b, _)| b.clone()).collect();
        prop_assume!(!chosen.is_empty());
        let sub = s.point_set(chosen);
        prop_assert!(verify_ultrametric(&s, &sub).unwrap().passed());
        prop_assert!(verify_boundary_lipschitz(&s, &sub).unwrap().passed());
    }

    #[test]
    fn hutchinson_iteration_contracts(i in 0..SYSTEMS.len(), seed in prop::collection::vec(branch(), 1..4), n in 0usize..5) {
        let s = build_ifs_unital(SYSTEMS[i].parse().unwrap(), rational(1, 2)).unwrap();
        let big = attractor_net(&s, 7).unwrap();
        let k0 = s.point_set(seed.iter().map(|b| addressable(s.tree(), b)).collect());
        let mut k = k0.clone();
        for _ in 0..n {
            k = hutchinson_step(&s, &k).unwrap();
        }
        // d_H(𝓕ⁿK, A) ≤ λⁿ·d_H(K, A), and the net 𝓕⁷ is λ⁸-close to A
        let start = hausdorff_scale(&s, &k0, &big).unwrap();
        let slack = Scale::Pow(8);
        let bound = match start {
            Scale::Zero => slack,
            Scale::Pow(e) => Scale::Pow(e + n as i64).max(slack),
        };
        let now = hausdorff_scale(&s, &k, &big).unwrap();
        prop_assert!(now <= bound, "{} > {}", now, bound);
    }

    #[test]
    fn glued_distances_are_ultrametric(m in 2u64..4, n in 0usize..4) {
        let x: OrdinalSpace = format!("w*{m}").parse().unwrap();
        let g = ultrafractal::glued::build_ifs_general(&x, rational(1, 2)).unwrap();
        let net = attractor_net(&g, n).unwrap();
        prop_assert!(verify_ultrametric(&g, &net).unwrap().passed());
        prop_assert!(verify_boundary_lipschitz(&g, &net).unwrap().passed());
    }
}

#[test]
fn scale_rationals_agree_with_order() {
    let l: BigRational = rational(2, 3);
    let scales = [Scale::Zero, Scale::Pow(5), Scale::Pow(2), Scale::ONE, Scale::Pow(-1)];
    for a in scales {
        for b in scales {
            assert_eq!(a.cmp(&b), a.to_rational(&l).cmp(&b.to_rational(&l)));
        }
    }
}
